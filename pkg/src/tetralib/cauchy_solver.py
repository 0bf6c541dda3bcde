"""Holomorphic 4-exponential on the strip ``|Re z| < 1`` by Cauchy integrals.

The unknowns are the values ``f(iy)`` on a uniform grid of the imaginary axis.
One sweep rebuilds them from the closed rectangular contour

* right edge ``Re t = 1`` carrying ``exp_b(f(t - 1))``,
* left edge ``Re t = -1`` carrying ``log_b(f(t + 1))`` (principal branch),
* horizontal caps carrying the limits ``L`` (top) and ``L*`` (bottom),

integrated with the trapezoidal rule.  Above ``Im = A`` the edges continue
with the asymptotic form ``f(z) = chi_inverse(K c^z)`` (``chi`` the Kœnigs
function at ``L``), ``K`` refitted every sweep from the nodes just below
``A``; this makes the cap truncation error negligible instead of
``O(exp(-Im(log c) A))``.  ``tail="constant"`` closes the contour at ``+-A``
with constant caps instead.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import BranchCollapse, NoConvergence, NumericalError, OutOfStrip, UsageError
from .fixpoint import Base, FixedPointData, principal_fixed_point, validate_base
from .koenigs import KoenigsContext, chi, chi_inverse, local_chi_array, series_array

logger = logging.getLogger(__name__)

#: Refinement factor of the contour used for evaluation off the axis.
EVAL_REFINE = 4
# Asymptotic tails run until exp(-Im(log c) y) drops below exp(-_TAIL_DECAY).
_TAIL_DECAY = 42.0
_MAX_TAIL_NODES = 20000


@dataclass(frozen=True)
class SolverParams:
    """Discretisation and iteration controls.

    ``n_nodes // 2`` uniform intervals cover ``[0, height]``, so the grid is
    symmetric about ``y = 0`` and always contains it.
    """

    n_nodes: int = 128
    height: float = 6.0
    tol: float = 1e-10
    max_iters: int = 5000
    damping: float = 0.5
    tail: str = "asymptotic"

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 32:
            raise UsageError(f"n_nodes must be an integer >= 32, got {self.n_nodes!r}")
        if not self.height >= 2:
            raise UsageError(f"height must be >= 2, got {self.height!r}")
        if not self.tol >= 1e-14:
            raise UsageError(f"tol must be >= 1e-14, got {self.tol!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise UsageError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not 0 < self.damping <= 1:
            raise UsageError(f"damping must lie in (0, 1], got {self.damping!r}")
        if self.tail not in ("asymptotic", "constant"):
            raise UsageError(f"tail must be 'asymptotic' or 'constant', got {self.tail!r}")

    @property
    def half_nodes(self) -> int:
        return self.n_nodes // 2

    @property
    def spacing(self) -> float:
        return self.height / self.half_nodes


def axis_grid(params: SolverParams) -> np.ndarray:
    m = params.half_nodes
    return params.spacing * np.arange(-m, m + 1)


def _tail_count(fp: FixedPointData, params: SolverParams) -> int:
    """Grid points appended above ``A`` so the edges reach the far field."""
    rate = 2 * _Asymptote.kappa
    if params.tail == "asymptotic":
        rate = min(rate, fp.log_c.imag)
    extent = max(0.0, _TAIL_DECAY / rate - params.height)
    return min(_MAX_TAIL_NODES, math.ceil(extent / params.spacing))


def _edge_weights(Y: np.ndarray) -> np.ndarray:
    h = Y[1] - Y[0]
    w = np.full(len(Y), h)
    w[0] = w[-1] = h / 2
    return w


class _Asymptote:
    """Smooth model ``S(t) = Re L + i Im L tanh(-i kappa t)`` of the far field.

    ``S`` tends to ``L`` / ``L*`` at ``+-i oo`` and is holomorphic for
    ``|Re t| < pi / (2 kappa)``, so ``F(z) = S(z) + Cauchy(F - S)`` and the
    remaining edge integrand decays exponentially; without the subtraction the
    truncated trapezoidal rule carries an ``O(h^2)`` end error.
    """

    kappa = 0.75

    def __init__(self, fp: FixedPointData):
        self.re = fp.L.real
        self.im = fp.L.imag

    def __call__(self, t):
        return self.re + 1j * self.im * np.tanh(-1j * self.kappa * t)

    def derivative(self, t):
        th = np.tanh(-1j * self.kappa * t)
        return self.im * self.kappa * (1 - th * th)


class _Contour:
    """Trapezoidal Cauchy integral over the vertical lines ``Re t = +-1``.

    ``axis`` holds function values at ``iY``; the right edge carries
    ``exp_b(axis)`` and the left edge ``log_b(axis)``.  The edges stop where
    both the data and the asymptote agree with ``L`` to ~1e-18, so the caps
    are dropped.
    """

    def __init__(self, fp: FixedPointData, Y: np.ndarray, axis: np.ndarray):
        lam = fp.base.ln_b
        if np.any((axis.real <= 0) & (np.abs(axis.imag) <= 1e-300)):
            raise BranchCollapse("log_b of an axis value hit the negative real axis")
        self.fp = fp
        self.Y = Y
        self.w = _edge_weights(Y)
        self.S = _Asymptote(fp)
        self.tr = 1 + 1j * Y
        self.tl = -1 + 1j * Y
        self.right = np.exp(lam * axis) - self.S(self.tr)
        self.left = np.log(axis) / lam - self.S(self.tl)

    def _apply(self, z, power):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(len(z), dtype=complex)
        for s in range(0, len(z), 256):
            zz = z[s:s + 256, None]
            kr = self.w / (self.tr - zz) ** power
            kl = self.w / (self.tl - zz) ** power
            out[s:s + 256] = (kr @ self.right - kl @ self.left) / (2 * np.pi)
        return z, out

    def __call__(self, z) -> np.ndarray:
        z, out = self._apply(z, 1)
        return out + self.S(z)

    def derivative(self, z) -> np.ndarray:
        z, out = self._apply(z, 2)
        return out + self.S.derivative(z)


class _Discretisation:
    """Grid bookkeeping shared by the sweep loop and the finished table."""

    def __init__(self, fp: FixedPointData, params: SolverParams):
        self.fp = fp
        self.params = params
        self.ctx = KoenigsContext(fp)
        self.S = _Asymptote(fp)
        self.y = axis_grid(params)
        self.m = params.half_nodes
        self.mt = _tail_count(fp, params)
        h = params.spacing
        self.Y = h * np.arange(-(self.m + self.mt), self.m + self.mt + 1)
        self.fit = (self.y >= params.height - 1.0) & (self.y > 0)
        self.log_c = fp.log_c
        self.asymptotic = params.tail == "asymptotic"

    def fit_asymptotic(self, f: np.ndarray) -> complex:
        """Coefficient ``K`` in ``f(iy) ~ chi_inverse(K c^(iy))`` near the top.

        ``nan`` when the tail is constant or the top nodes are not yet close
        enough to ``L`` for the local series.
        """
        if not self.asymptotic:
            return complex("nan")
        vals = f[self.fit]
        if np.all(np.abs(vals - self.fp.L) <= self.ctx.radius):
            chis = local_chi_array(self.ctx, vals)
        else:
            try:
                chis = np.array([chi(self.ctx, v) for v in vals])
            except NumericalError:
                return complex("nan")
        k = chis * np.exp(-1j * self.y[self.fit] * self.log_c)
        return complex(np.mean(k))

    def tail_values(self, K: complex, ys: np.ndarray) -> np.ndarray:
        if not cmath.isfinite(K):
            return np.full(len(ys), self.fp.L)
        w = K * np.exp(1j * ys * self.log_c)
        near = np.abs(w) <= self.ctx.radius
        out = np.empty(len(w), dtype=complex)
        out[near] = series_array(self.ctx, w[near])
        out[~near] = [chi_inverse(self.ctx, v) for v in w[~near]]
        return out

    def extend(self, f: np.ndarray, K: complex) -> np.ndarray:
        if self.mt == 0:
            return f
        up = self.tail_values(K, self.Y[self.m * 2 + self.mt + 1:])
        return np.concatenate([np.conj(up[::-1]), f, up])

    def contour(self, f: np.ndarray, K: complex) -> _Contour:
        return _Contour(self.fp, self.Y, self.extend(f, K))


def _symmetrize(f: np.ndarray, m: int) -> np.ndarray:
    f = f.copy()
    f[:m] = np.conj(f[:m:-1])
    f[m] = f[m].real
    return f


def _initial_guess(fp: FixedPointData, y: np.ndarray, height: float) -> np.ndarray:
    def step(t):
        u = np.clip(2 * t / height, 0.0, 1.0)
        return u * u * (3 - 2 * u)

    s_up, s_down = step(y), step(-y)
    return fp.L * s_up + fp.L_conj * s_down + (1 - s_up - s_down)


@dataclass(frozen=True, eq=False)
class TetrationTable:
    """Converged samples of ``sexp_b(iy)`` plus the data needed to evaluate it.

    ``f[k]`` is the value at ``i * y[k]``; ``f`` at ``y = 0`` is exactly 1 and
    ``f(-y) == conj(f(y))`` bit for bit.  ``asymptotic`` is ``K`` in
    ``sexp(z) ~ chi_inverse(K c^z)`` for large ``Im z`` (``nan`` when
    ``tail == "constant"``).
    """

    base: Base
    fp: FixedPointData
    y: np.ndarray
    f: np.ndarray
    params: SolverParams
    final_residual: float = float("nan")
    iterations: int = 0
    update_norm: float = float("nan")
    asymptotic: complex = complex("nan")
    converged: bool = True
    _disc: _Discretisation = field(default=None, repr=False, compare=False)

    @property
    def height(self) -> float:
        return self.params.height

    @property
    def nodes(self):
        return list(zip(self.y.tolist(), self.f.tolist()))

    @property
    def endpoint_gap(self) -> float:
        """``max(|f(A) - L|, |f(-A) - L*|)``."""
        return float(max(abs(self.f[-1] - self.fp.L), abs(self.f[0] - self.fp.L_conj)))

    @cached_property
    def _coarse(self) -> _Contour:
        return self._disc.contour(self.f, self.asymptotic)

    @cached_property
    def _fine(self) -> _Contour:
        disc = self._disc
        h = self.params.spacing / EVAL_REFINE
        n_half = EVAL_REFINE * (disc.m + disc.mt)
        Y = h * np.arange(-n_half, n_half + 1)
        inner = np.abs(Y) <= self.height + 1e-12
        axis = np.empty(len(Y), dtype=complex)
        axis[inner] = self._coarse(1j * Y[inner])
        upper = Y > self.height + 1e-12
        if np.any(upper):
            tail = disc.tail_values(self.asymptotic, Y[upper])
            axis[upper] = tail
            axis[Y < -self.height - 1e-12] = np.conj(tail[::-1])
        axis = _symmetrize(axis, n_half)
        return _Contour(self.fp, Y, axis)

    def interior(self, z) -> np.ndarray:
        """Cauchy representation anywhere inside ``|Re z| < 1``."""
        return self._fine(z)

    def interior_derivative(self, z) -> np.ndarray:
        return self._fine.derivative(z)


def _edge_data(disc: _Discretisation, f: np.ndarray):
    K = disc.fit_asymptotic(f)
    ext = disc.extend(f, K)
    if np.any((ext.real <= 0) & (np.abs(ext.imag) <= 1e-300)):
        raise BranchCollapse("log_b of an axis value hit the negative real axis")
    lam = disc.fp.base.ln_b
    S = disc.S
    return np.exp(lam * ext) - S(1 + 1j * disc.Y), np.log(ext) / lam - S(-1 + 1j * disc.Y), K


class _AxisKernels:
    """Cauchy weights (and derivative weights) from the edges to the axis nodes."""

    def __init__(self, disc: _Discretisation):
        Y, y = disc.Y, disc.y
        w = _edge_weights(Y)
        z = 1j * y[:, None]
        dr = 1 + 1j * Y - z
        dl = -1 + 1j * Y - z
        self.kr, self.kl = w / dr, w / dl
        self.dkr, self.dkl = w / dr**2, w / dl**2
        self.s0 = disc.S(1j * y)
        self.ds0 = disc.S.derivative(1j * y)

    def values(self, right, left):
        return (self.kr @ right - self.kl @ left) / (2 * np.pi) + self.s0

    def slopes(self, right, left):
        return (self.dkr @ right - self.dkl @ left) / (2 * np.pi) + self.ds0


def _sweep(disc: _Discretisation, kern: _AxisKernels, f: np.ndarray):
    right, left, K = _edge_data(disc, f)
    return _symmetrize(kern.values(right, left), disc.m), (right, left)


def _recenter(disc: _Discretisation, kern: _AxisKernels, f: np.ndarray):
    """Translate ``f`` along the real axis to first order so that ``f(0) = 1``."""
    right, left, _ = _edge_data(disc, f)
    slope = kern.slopes(right, left)
    sigma = (f[disc.m].real - 1.0) / slope[disc.m].real
    sigma = max(-0.1, min(0.1, sigma))
    return _symmetrize(f - sigma * slope, disc.m)


def _iterate(disc, f, params, progress, start=0, budget=None):
    kern = _AxisKernels(disc)
    d = params.damping
    budget = params.max_iters if budget is None else budget
    update = float("inf")
    for it in range(start + 1, start + budget + 1):
        new, _ = _sweep(disc, kern, f)
        nxt = _recenter(disc, kern, _symmetrize((1 - d) * f + d * new, disc.m))
        update = float(np.max(np.abs(nxt - f)))
        f = nxt
        if not np.isfinite(update):
            raise NoConvergence("iteration diverged", final_update_norm=update)
        if progress is not None and it % 10 == 0:
            progress(it, update)
        if update < params.tol:
            return f, it, update, True
    return f, start + budget, update, False


def _shift_to_one(table: TetrationTable) -> float:
    """Real ``s`` with ``sexp(s) == 1`` on the current representation."""
    s = 0.0
    for _ in range(50):
        val = table.interior(s)[0]
        der = table.interior_derivative(s)[0]
        step = ((val - 1) / der).real
        s -= step
        if abs(s) > 0.9:
            raise NoConvergence("normalisation shift left the strip")
        if abs(step) < 1e-16:
            break
    return s


def solve(
    b,
    params: Optional[SolverParams] = None,
    progress: Optional[Callable[[int, float], None]] = None,
    allow_unconverged: bool = False,
) -> TetrationTable:
    """Solve for ``sexp_b`` on the imaginary axis.

    Damped Picard sweeps run until the sup-norm update drops below
    ``params.tol``.  The result is then translated along the real axis so
    that ``f(0) = 1`` and polished with further sweeps.

    With ``allow_unconverged`` an exhausted sweep budget returns the last
    iterate (``converged`` false, no translation) instead of raising.

    Raises
    ------
    NoConvergence
        If ``params.max_iters`` sweeps do not reach the tolerance.
    BranchCollapse
        If ``log_b`` of an iterate lands on its cut.
    """
    params = params or SolverParams()
    base = b if isinstance(b, Base) else validate_base(b)
    fp = principal_fixed_point(base)
    disc = _Discretisation(fp, params)
    f = _symmetrize(_initial_guess(fp, disc.y, params.height), disc.m)

    f, iters, update, ok = _iterate(disc, f, params, progress)
    if not ok and allow_unconverged:
        table = _make_table(base, fp, disc, f, params, iters, update, converged=False)
        return _make_table(base, fp, disc, f, params, iters, update, residual_report(table), False)
    if not ok:
        raise NoConvergence(
            f"no convergence after {iters} sweeps (update {update:.3e})",
            final_update_norm=update,
        )
    # pin the translation: solve f(s) = 1 and resample at s + iy, twice
    for _ in range(2):
        table = _make_table(base, fp, disc, f, params, iters, update)
        s = _shift_to_one(table)
        f = _symmetrize(table.interior(s + 1j * disc.y), disc.m)
        remaining = max(1, params.max_iters - iters)
        f, iters, update, ok = _iterate(disc, f, params, progress, start=iters, budget=remaining)
        if not ok:
            raise NoConvergence(
                f"no convergence while polishing (update {update:.3e})",
                final_update_norm=update,
            )
    f = f.copy()
    f[disc.m] = 1.0
    table = _make_table(base, fp, disc, f, params, iters, update)
    residual = residual_report(table)
    table = _make_table(base, fp, disc, f, params, iters, update, residual)
    if table.endpoint_gap > 0.05:
        logger.warning("endpoint gap %.3g exceeds 0.05; increase the height", table.endpoint_gap)
    return table


def _make_table(base, fp, disc, f, params, iters, update, residual=float("nan"), converged=True):
    K = disc.fit_asymptotic(f)
    return TetrationTable(
        base=base, fp=fp, y=disc.y.copy(), f=f, params=params,
        final_residual=residual, iterations=iters, update_norm=update,
        asymptotic=K, converged=converged, _disc=disc,
    )


def table_from_nodes(b, y, f, params: SolverParams, **meta) -> TetrationTable:
    """Rebuild a table from stored nodes (used when loading from disk)."""
    base = b if isinstance(b, Base) else validate_base(b)
    fp = principal_fixed_point(base)
    disc = _Discretisation(fp, params)
    y = np.asarray(y, dtype=float)
    if len(y) != len(disc.y) or np.max(np.abs(y - disc.y)) > 1e-12 * params.height:
        raise UsageError("stored grid does not match the solver parameters")
    f = np.asarray(f, dtype=complex)
    K = disc.fit_asymptotic(f)
    return TetrationTable(
        base=base, fp=fp, y=disc.y.copy(), f=f, params=params,
        final_residual=meta.get("final_residual", float("nan")),
        iterations=meta.get("iterations", 0),
        update_norm=meta.get("update_norm", float("nan")),
        asymptotic=K, _disc=disc,
    )


def evaluate_strip(table: TetrationTable, z: complex) -> complex:
    """``sexp_b(z)`` for ``Re z in [-0.5, 0.5]`` and ``|Im z| <= A - 1``.

    Grid nodes on the imaginary axis return the stored value exactly.
    """
    z = complex(z)
    if not (-0.5 <= z.real <= 0.5 and abs(z.imag) <= table.height - 1):
        raise OutOfStrip(f"{z!r} is outside the strip |Re| <= 0.5, |Im| <= {table.height - 1}")
    if z.real == 0:
        k = int(round(z.imag / table.params.spacing)) + table.params.half_nodes
        if table.y[k] == z.imag:
            return complex(table.f[k])
    return complex(table.interior(z)[0])


def evaluate_strip_derivative(table: TetrationTable, z: complex) -> complex:
    z = complex(z)
    if not (-0.5 <= z.real <= 0.5 and abs(z.imag) <= table.height - 1):
        raise OutOfStrip(f"{z!r} is outside the strip |Re| <= 0.5, |Im| <= {table.height - 1}")
    return complex(table.interior_derivative(z)[0])


def residual_report(table: TetrationTable) -> float:
    """Max of ``|exp_b(sexp(z)) - sexp(z + 1)|`` over 101 points on ``Re z = -0.25``."""
    top = table.height - 1
    z = -0.25 + 1j * np.linspace(-top, top, 101)
    lhs = np.exp(table.base.ln_b * table.interior(z))
    rhs = table.interior(z + 1)
    return float(np.max(np.abs(lhs - rhs)))
