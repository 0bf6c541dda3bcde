"""Kœnigs (Schröder) function of ``exp_b`` at its principal fixed point.

``chi`` linearises ``exp_b`` near ``L``: ``chi(b**z) == c * chi(z)`` with
``chi(L) == 0`` and ``chi'(L) == 1``.  The inverse ``chi_inverse`` is entire.

Both are evaluated with a local power series of ``chi_inverse`` at ``L``
whose coefficients follow from the Schröder equation; points farther away
are first pulled towards ``L`` by backward iteration (``log_b`` on the branch
nearest ``L``) or pushed out again by forward iteration with ``exp_b``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AtFixedPoint, BasinEscape, DepthInsufficient, OverflowEscape
from .fixpoint import FixedPointData

SERIES_ORDER = 48
_OVERFLOW = 1e150


def inverse_series(fp: FixedPointData, order: int = SERIES_ORDER) -> np.ndarray:
    """Taylor coefficients ``a_k`` of ``chi_inverse(w) = L + sum a_k w^k``.

    Matching powers of ``w`` in ``exp_b(h(w)) = h(c w)`` gives
    ``a_k (c^k - c) = L * r_k`` where ``r_k`` collects the contributions of
    ``a_1 .. a_{k-1}`` to ``exp(ln(b) (h - L))``.
    """
    lam = fp.base.ln_b
    L, c = fp.L, fp.c
    a = np.zeros(order + 1, dtype=complex)
    e = np.zeros(order + 1, dtype=complex)  # coefficients of exp(lam * (h - L))
    a[1] = 1.0
    e[0] = 1.0
    e[1] = lam
    for k in range(2, order + 1):
        j = np.arange(1, k)
        rest = lam / k * np.sum(j * a[1:k] * e[k - 1:0:-1])
        a[k] = L * rest / (c**k - c)
        e[k] = lam * a[k] + rest
    return a


def _local_radius(a: np.ndarray) -> float:
    k = np.arange(2, len(a))
    mags = np.abs(a[2:])
    with np.errstate(divide="ignore"):
        roots = np.where(mags > 0, mags ** (-1.0 / k), np.inf)
    return float(min(1.0, 0.25 * roots.min()))


@dataclass(frozen=True)
class KoenigsContext:
    """Immutable evaluation context for ``chi`` at ``fp.L``.

    ``depth`` bounds the number of backward steps.  Build the context on
    ``fp.conjugate()`` to work at ``L*``.
    """

    fp: FixedPointData
    depth: int = 60
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    radius: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be positive")
        a = inverse_series(self.fp)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "radius", _local_radius(a))

    @property
    def L(self) -> complex:
        return self.fp.L

    @property
    def c(self) -> complex:
        return self.fp.c

    @property
    def branch_offset(self) -> int:
        """Branch index ``k`` for which ``log_b(L) + 2 pi i k / ln b == L``."""
        lam = self.fp.base.ln_b
        return round((self.L - cmath.log(self.L) / lam).imag * lam / (2 * math.pi))

    def branch_log(self, z: complex):
        """``log_b`` on the branch whose value lies nearest ``L``."""
        lam = self.fp.base.ln_b
        if z == 0:
            raise BasinEscape("backward orbit hit 0")
        p = cmath.log(z) / lam
        period = 2 * math.pi / lam
        k = round((self.L.imag - p.imag) / period)
        return p + 1j * period * k, k

    def series(self, w: complex) -> complex:
        """Evaluate the local series of ``chi_inverse`` (Horner)."""
        acc = 0j
        for coef in self.coeffs[:0:-1]:
            acc = acc * w + coef
        return self.L + acc * w

    def _series_derivative(self, w: complex) -> complex:
        a = self.coeffs
        acc = 0j
        for k in range(len(a) - 1, 0, -1):
            acc = acc * w + k * a[k]
        return acc

    def _local_chi(self, z: complex) -> complex:
        """Invert the local series by Newton; ``z`` must be near ``L``."""
        w = z - self.L
        for _ in range(50):
            step = (self.series(w) - z) / self._series_derivative(w)
            w -= step
            if abs(step) <= 1e-17 * max(abs(w), 1e-300):
                break
        return w


def backward_orbit(ctx: KoenigsContext, z: complex):
    """Pull ``z`` into the local series disc.

    Returns the list of visited points and the branch indices chosen at each
    step (recorded for reproducibility).
    """
    points = [complex(z)]
    ks = []
    cur = complex(z)
    while abs(cur - ctx.L) > ctx.radius:
        if len(ks) >= ctx.depth:
            raise BasinEscape(
                f"backward iteration from {z!r} did not reach L within depth {ctx.depth}"
            )
        cur, k = ctx.branch_log(cur)
        if not (math.isfinite(cur.real) and math.isfinite(cur.imag)):
            raise BasinEscape(f"backward orbit of {z!r} left the plane")
        points.append(cur)
        ks.append(k)
    return points, ks


def chi(ctx: KoenigsContext, z: complex) -> complex:
    """Kœnigs function ``lim c^n (log_b^n(z) - L)``.

    The limit is taken exactly once the orbit is inside the disc where the
    local series is accurate; one extra backward step cross-checks the value.
    """
    z = complex(z)
    if z == ctx.L:
        return 0j
    points, _ = backward_orbit(ctx, z)
    n = len(points) - 1
    value = ctx.c**n * ctx._local_chi(points[-1])
    nxt, _ = ctx.branch_log(points[-1])
    check = ctx.c ** (n + 1) * ctx._local_chi(nxt)
    if abs(check - value) > 1e-12 * max(1.0, abs(value)):
        raise DepthInsufficient(
            f"successive truncations of chi({z!r}) differ by {abs(check - value):.3e}"
        )
    return value


def chi_inverse(ctx: KoenigsContext, w: complex) -> complex:
    """Entire inverse ``lim exp_b^n(L + c^-n w)``."""
    w = complex(w)
    n = 0
    if w != 0:
        n = max(0, math.ceil(math.log(abs(w) / (0.5 * ctx.radius)) / math.log(abs(ctx.c))))
    z = ctx.series(w / ctx.c**n)
    base = ctx.fp.base
    for _ in range(n):
        if abs(z.real) * base.ln_b > 700 or abs(z) > _OVERFLOW:
            raise OverflowEscape(f"forward iterates for chi_inverse({w!r}) overflow")
        z = base.exp(z)
    if abs(z) > _OVERFLOW:
        raise OverflowEscape(f"forward iterates for chi_inverse({w!r}) overflow")
    return z


def reference_point(fp: FixedPointData) -> complex:
    """Midpoint of the upper half of the segment between ``L*`` and ``L``."""
    return complex(fp.L.real, 0.5 * fp.L.imag)


def regular_abel(ctx: KoenigsContext, z: complex) -> complex:
    """Regular Abel function ``ln(chi(z)) / ln(c)``.

    The logarithm's cut is the ray opposite to ``chi`` of
    :func:`reference_point`, so it stays away from the region between the
    segment ``[L*, L]`` and its image under ``exp_b``.
    """
    value = chi(ctx, z)
    if value == 0 or abs(value) < 1e-300:
        raise AtFixedPoint(f"regular Abel function is singular at {z!r}")
    u = _cut_direction(ctx)
    return (cmath.log(u) + cmath.log(value / u)) / cmath.log(ctx.c)


def _cut_direction(ctx: KoenigsContext) -> complex:
    ref = chi(ctx, reference_point(ctx.fp))
    return ref / abs(ref)


def series_array(ctx: KoenigsContext, w: np.ndarray) -> np.ndarray:
    """Vectorised local series; every ``|w|`` must be within ``ctx.radius``."""
    w = np.asarray(w, dtype=complex)
    return ctx.L + w * np.polyval(ctx.coeffs[:0:-1], w)


def local_chi_array(ctx: KoenigsContext, z: np.ndarray) -> np.ndarray:
    """Vectorised ``chi`` for points already inside the local disc."""
    z = np.asarray(z, dtype=complex)
    a = ctx.coeffs
    deriv = (np.arange(1, len(a)) * a[1:])[::-1]
    w = z - ctx.L
    for _ in range(50):
        step = (series_array(ctx, w) - z) / np.polyval(deriv, w)
        w = w - step
        if np.all(np.abs(step) <= 1e-17 * np.maximum(np.abs(w), 1e-300)):
            break
    return w
