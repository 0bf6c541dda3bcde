"""Tetration ``sexp_b`` on ``C_-2``, its inverse ``slog_b`` and fractional iterates.

``sexp`` continues the strip solution of :mod:`tetralib.cauchy_solver` with
the recurrence ``sexp(z + 1) = exp_b(sexp(z))``: rightwards by ``exp_b`` and
leftwards by the principal ``log_b``.  ``slog`` inverts it by Newton's method.
"""

import cmath
import math
import weakref
from dataclasses import dataclass

import numpy as np

from .cauchy_solver import TetrationTable, evaluate_strip, evaluate_strip_derivative
from .errors import (
    AtFixedPoint,
    BranchViolation,
    DomainClipped,
    NoConvergence,
    NumericalError,
    OutsideDomain,
    Overflow,
    TetraError,
)
from .koenigs import KoenigsContext, regular_abel

_OVERFLOW = 1e300


@dataclass(frozen=True)
class BranchPolicy:
    """How logarithms are chosen when ``sexp`` is continued to the left.

    Only the principal branch ``-pi < Im(log z) <= pi`` is supported; a
    descent whose argument lies on the cut raises :class:`BranchViolation`
    instead of switching sheets.
    """

    descent_branch: str = "principal"
    max_descents: int = 64

    def __post_init__(self):
        if self.descent_branch != "principal":
            raise ValueError("only the principal branch is supported")
        if self.max_descents < 1:
            raise ValueError("max_descents must be positive")


DEFAULT_POLICY = BranchPolicy()


class DomainC2:
    """Membership in ``C_-2``, the plane without the real ray ``x <= -2``."""

    @staticmethod
    def contains(z) -> bool:
        z = complex(z)
        return not (z.imag == 0 and z.real <= -2)

    def __contains__(self, z) -> bool:
        return self.contains(z)


def _reduce(table: TetrationTable, z: complex, policy: BranchPolicy):
    if not DomainC2.contains(z):
        raise OutsideDomain(f"{z!r} is a real number <= -2")
    k = math.floor(z.real + 0.5)
    w = complex(z.real - k, z.imag)
    if abs(w.imag) > table.height - 1:
        raise DomainClipped(
            f"|Im z| = {abs(z.imag):g} exceeds the table limit {table.height - 1:g}"
        )
    if -k > policy.max_descents:
        raise DomainClipped(f"{z!r} needs more than {policy.max_descents} descents")
    return k, w


def _principal_log(base, v: complex) -> complex:
    if v.imag == 0 and v.real <= 0:
        raise BranchViolation(f"log_b of {v!r} lies on the principal cut")
    return base.log(v)


def _continue(table, v, dv, k):
    """Apply the recurrence ``k`` times to ``v`` (and its derivative ``dv``)."""
    base = table.base
    lam = base.ln_b
    for _ in range(k):
        if v.real * lam > 690 or abs(v) > _OVERFLOW:
            raise Overflow("sexp exceeds 1e300")
        v = base.exp(v)
        if dv is not None:
            dv = lam * v * dv
    for _ in range(-k):
        if dv is not None:
            dv = dv / (lam * v)
        v = _principal_log(base, v)
    if not (cmath.isfinite(v) and abs(v) <= _OVERFLOW):
        raise Overflow("sexp exceeds 1e300")
    return v, dv


def sexp(table: TetrationTable, z, policy: BranchPolicy = DEFAULT_POLICY) -> complex:
    """``sexp_b(z)`` for ``z`` in ``C_-2`` with ``|Im z| <= A - 1``.

    Raises
    ------
    OutsideDomain
        If ``z`` is real and ``<= -2``.
    DomainClipped
        If ``|Im z|`` exceeds what the table covers.
    Overflow
        If a rightward step exceeds ``1e300``.
    """
    z = complex(z)
    k, w = _reduce(table, z, policy)
    v, _ = _continue(table, evaluate_strip(table, w), None, k)
    if z.imag == 0:
        v = complex(v.real, 0.0)
    return v


def sexp_derivative(table: TetrationTable, z, policy: BranchPolicy = DEFAULT_POLICY) -> complex:
    """``sexp_b'(z)`` by the chain rule through the recurrence."""
    z = complex(z)
    k, w = _reduce(table, z, policy)
    _, dv = _continue(
        table, evaluate_strip(table, w), evaluate_strip_derivative(table, w), k
    )
    return dv


def _value_and_slope(table, w, policy):
    k, s = _reduce(table, w, policy)
    return _continue(
        table, evaluate_strip(table, s), evaluate_strip_derivative(table, s), k
    )


# Principal values of slog are taken from this window of the w-plane.
_RE_MIN, _RE_MAX = -2.0, 3.5
_LOOKUP_STEP = 0.05
_NEAR_FIXED_POINT = 0.5
_MAX_SEEDS = 8


class _Inverter:
    """Per-table data for slog: a coarse sexp lookup and the Abel calibration."""

    def __init__(self, table: TetrationTable):
        self.table = table
        self.top = table.height - 1
        base = table.base
        lam = base.ln_b
        xs = np.arange(-0.5, 0.5, _LOOKUP_STEP)
        ys = np.linspace(0.0, self.top, int(round(self.top / 0.1)) + 1)
        strip = table.interior((xs[None, :] + 1j * ys[:, None]).ravel())
        ws, vs = [], []
        with np.errstate(all="ignore"):
            for k in range(math.floor(_RE_MIN + 0.5), math.floor(_RE_MAX + 0.5) + 1):
                v = strip.copy()
                for _ in range(k):
                    v = np.exp(lam * v)
                for _ in range(-k):
                    v = np.log(v) / lam
                w = (xs[None, :] + k + 1j * ys[:, None]).ravel()
                keep = (w.real > _RE_MIN) & (w.real <= _RE_MAX) & np.isfinite(v) & (np.abs(v) < 1e12)
                keep &= ~((w.imag == 0) & (w.real <= -2))
                ws.append(w[keep])
                vs.append(v[keep])
        self.w = np.concatenate(ws)
        self.v = np.concatenate(vs)
        self.ctx = KoenigsContext(table.fp)
        self.offset = self._calibrate()
        self.sheet = 2j * math.pi / table.fp.log_c

    def _calibrate(self) -> complex:
        """Constant making ``regular_abel + offset`` agree with the table."""
        fp = self.table.fp
        d = np.abs(self.table.f - fp.L)
        idx = int(np.argmax((d < 0.3) & (self.table.y > 0)))
        return 1j * self.table.y[idx] - regular_abel(self.ctx, complex(self.table.f[idx]))

    def abel_estimate(self, z: complex) -> complex:
        return regular_abel(self.ctx, z) + self.offset

    def seeds(self, z: complex):
        out = []
        if abs(z - self.table.fp.L) < _NEAR_FIXED_POINT:
            w0 = self.abel_estimate(z)
            out += [w0, w0 - self.sheet, w0 + self.sheet]
        order = np.argsort(np.abs(self.v - z))
        for i in order:
            if len(out) >= _MAX_SEEDS:
                break
            w = complex(self.w[i])
            if all(abs(w - s) > 0.3 for s in out):
                out.append(w)
        return out


_INVERTERS = weakref.WeakKeyDictionary()


def _inverter(table: TetrationTable) -> _Inverter:
    inv = _INVERTERS.get(table)
    if inv is None:
        inv = _INVERTERS[table] = _Inverter(table)
    return inv


def _admissible(w: complex, top: float) -> bool:
    return _RE_MIN < w.real <= _RE_MAX + 0.5 and abs(w.imag) <= top


def _newton(table, z, w, policy, top):
    for _ in range(60):
        try:
            v, dv = _value_and_slope(table, w, policy)
        except TetraError:
            return None
        if dv == 0 or not cmath.isfinite(dv):
            return None
        step = (v - z) / dv
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        w = w - step
        if z.imag == 0 and w.imag != 0 and abs(w.imag) < 1e-12:
            w = complex(w.real, 0.0)
        if not _admissible(w, top):
            return None
        if abs(step) <= 1e-15 * max(1.0, abs(w)):
            break
    try:
        v = sexp(table, w, policy)
    except TetraError:
        return None
    if abs(v - z) > 1e-10 * max(1.0, abs(z)):
        return None
    return w


def _preference(w: complex, z: complex):
    same_side = (w.imag > 0) == (z.imag > 0) or (w.imag == 0 and z.imag == 0)
    return (not same_side, w.real, abs(w.imag))


def slog(table: TetrationTable, z, policy: BranchPolicy = DEFAULT_POLICY) -> complex:
    """Principal ``slog_b(z)``: the leftmost solution of ``sexp(w) = z``.

    Candidates are restricted to ``-2 < Re w <= 3.5`` inside the table's
    strip.  Near the fixed points the regular Abel function supplies both
    the seeds and, when the solution lies beyond the table, the value.
    ``slog(conj(z)) == conj(slog(z))`` holds exactly.

    Raises
    ------
    AtFixedPoint
        For ``z`` equal to ``L`` or ``L*``.
    NoConvergence
        If Newton's method fails from every seed.
    """
    z = complex(z)
    if z == 1:
        return 0j
    if z.imag < 0:
        return slog(table, z.conjugate(), policy).conjugate()
    fp = table.fp
    if abs(z - fp.L) <= 1e-12 * abs(fp.L):
        raise AtFixedPoint(f"slog is singular at the fixed point {z!r}")
    if not cmath.isfinite(z):
        raise NoConvergence(f"cannot invert sexp at {z!r}")
    inv = _inverter(table)
    near = abs(z - fp.L) < _NEAR_FIXED_POINT
    found = []
    for seed in inv.seeds(z):
        if near and abs(seed.imag) > inv.top:
            continue
        w = _newton(table, z, seed, policy, inv.top)
        if w is not None and all(abs(w - u) > 1e-8 for u in found):
            found.append(w)
    if found:
        return min(found, key=lambda w: _preference(w, z))
    if near:
        try:
            w = inv.abel_estimate(z)
        except NumericalError:
            w = None
        if w is not None and abs(w.imag) > inv.top - 0.5:
            return w
    raise NoConvergence(f"Newton inversion of sexp failed at {z!r} from every seed")


def _shifted(table, c: complex, s: complex, real: bool, policy) -> complex:
    w = c + s
    if real:
        w = complex(w.real, 0.0)
    if not DomainC2.contains(w):
        raise BranchViolation(f"c + slog(z) = {w!r} lies on the cut x <= -2")
    return sexp(table, w, policy)


def iterate(table: TetrationTable, c, z, policy: BranchPolicy = DEFAULT_POLICY) -> complex:
    """Fractional iterate ``exp_b^c(z) = sexp(c + slog(z))``.

    Raises
    ------
    BranchViolation
        If ``c + slog(z)`` is a real number ``<= -2``.
    """
    c = complex(c)
    z = complex(z)
    return _shifted(table, c, slog(table, z, policy), z.imag == 0 and c.imag == 0, policy)


def emit_iterate_family(table: TetrationTable, c_list, x_range=(-3.0, 3.0), n_points=121, extra=()):
    """Rows ``(c, x, y)`` of ``y = exp_b^c(x)`` on a uniform grid of real ``x``.

    ``extra`` abscissae inside ``x_range`` are merged into the grid.  Rows
    are grouped by ``c``.  Points where the iterate is undefined (or
    overflows) get ``y = nan`` so every ``c`` contributes the same number of
    rows.
    """
    xs = np.linspace(x_range[0], x_range[1], n_points)
    extra = [x for x in extra if x_range[0] <= x <= x_range[1]]
    xs = np.union1d(xs, np.asarray(extra, dtype=float))
    logs = []
    for x in xs:
        try:
            logs.append(slog(table, x))
        except TetraError:
            logs.append(None)
    rows = []
    for c in c_list:
        for x, s in zip(xs, logs):
            y = float("nan")
            if s is not None:
                try:
                    y = _shifted(table, complex(c), s, True, DEFAULT_POLICY).real
                except TetraError:
                    pass
            rows.append((float(c), float(x), y))
    return rows
