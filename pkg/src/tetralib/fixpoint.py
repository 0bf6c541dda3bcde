"""Principal complex fixed point of ``exp_b`` and its multiplier."""

import cmath
import math
from dataclasses import dataclass

from .errors import BaseOutOfRange, NoConvergence

#: Threshold e^(1/e); bases at or below it have real fixed points.
BASE_THRESHOLD = math.exp(1.0 / math.e)

_SEED_E = 0.3 + 1.3j
_MAX_ITER = 100
_HOMOTOPY_STEP = 0.125


@dataclass(frozen=True)
class Base:
    """A validated tetration base ``b > e^(1/e)``."""

    b: float

    @property
    def ln_b(self) -> float:
        return math.log(self.b)

    def exp(self, z: complex) -> complex:
        return cmath.exp(self.ln_b * z)

    def log(self, z: complex) -> complex:
        """Principal ``log_b``; cut along the negative real axis."""
        return cmath.log(z) / self.ln_b


@dataclass(frozen=True)
class FixedPointData:
    """Fixed point ``L`` of ``exp_b`` in the upper half plane.

    ``c`` is the multiplier ``exp_b'(L) = ln(b) * L``, which equals the
    principal ``ln(L)`` because ``L`` is also the attracting fixed point of
    the principal ``log_b``.
    """

    L: complex
    L_conj: complex
    c: complex
    base: Base

    @property
    def b(self) -> float:
        return self.base.b

    @property
    def residual(self) -> float:
        return abs(self.base.exp(self.L) - self.L)

    @property
    def log_c(self) -> complex:
        return cmath.log(self.c)

    def conjugate(self) -> "FixedPointData":
        """The same data seen from ``L*`` (used for lower-half-plane work)."""
        return FixedPointData(
            L=self.L_conj, L_conj=self.L, c=self.c.conjugate(), base=self.base
        )


def validate_base(b) -> Base:
    """Return an immutable :class:`Base` for ``b``, or raise BaseOutOfRange."""
    try:
        value = float(b)
    except (TypeError, ValueError):
        raise BaseOutOfRange(f"base {b!r} is not a real number") from None
    if not math.isfinite(value) or value <= BASE_THRESHOLD:
        raise BaseOutOfRange(
            f"base {value!r} must exceed e^(1/e) = {BASE_THRESHOLD!r}"
        )
    return Base(value)


def _newton(ln_b: float, z: complex) -> complex:
    """Damped Newton iteration on ``b^z - z``."""
    res = cmath.exp(ln_b * z) - z
    for _ in range(_MAX_ITER):
        ez = cmath.exp(ln_b * z)
        step = (ez - z) / (ln_b * ez - 1.0)
        damping = 1.0
        while True:
            trial = z - damping * step
            trial_res = cmath.exp(ln_b * trial) - trial
            if abs(trial_res) <= abs(res) or damping < 1e-6:
                break
            damping *= 0.5
        z, res = trial, trial_res
        if abs(damping * step) < 1e-15 * max(1.0, abs(z)) or abs(res) < 1e-14:
            # one more full step polishes the last bits
            ez = cmath.exp(ln_b * z)
            polished = z - (ez - z) / (ln_b * ez - 1.0)
            if abs(cmath.exp(ln_b * polished) - polished) <= abs(res):
                z = polished
            return z
    raise NoConvergence(f"fixed-point Newton iteration did not converge (residual {abs(res):.3e})")


def principal_fixed_point(b) -> FixedPointData:
    """Locate the principal fixed point ``L`` of ``exp_b`` with ``Im L > 0``.

    Newton is started at ``0.3+1.3i`` for ``b = e`` and continued along a
    homotopy in ``ln(ln(b))`` to the requested base, which keeps the iterate
    on the conjugate pair closest to the real axis.

    Raises
    ------
    BaseOutOfRange
        If ``b <= e^(1/e)``.
    NoConvergence
        If Newton fails within its iteration budget.
    """
    base = b if isinstance(b, Base) else validate_base(b)
    target = math.log(base.ln_b)
    n_steps = max(1, math.ceil(abs(target) / _HOMOTOPY_STEP))
    z = _SEED_E
    for k in range(n_steps + 1):
        s = target * k / n_steps
        z = _newton(math.exp(s), z)
    if z.imag < 0:
        z = z.conjugate()
    ln_b = base.ln_b
    if not (0.0 < z.imag * ln_b < math.pi):
        raise NoConvergence(f"homotopy left the principal fixed point pair (got {z!r})")
    return FixedPointData(L=z, L_conj=z.conjugate(), c=ln_b * z, base=base)


def multiplier(fp: FixedPointData) -> complex:
    """Multiplier ``c = ln(b) L``; checked against the principal ``ln(L)``."""
    c = fp.base.ln_b * fp.L
    assert abs(c - cmath.log(fp.L)) <= 1e-12 * max(1.0, abs(c)), "multiplier mismatch"
    return c
