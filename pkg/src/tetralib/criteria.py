"""Numerical checks of the uniqueness criteria for Abel functions of ``exp_b``.

Curves are handled as sampled polylines.  Injectivity and disjointness are
segment distance tests with tolerance ``GEOMETRY_TOL``; divergence of the
imaginary part at the curve ends becomes a finite threshold test.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .errors import EvaluationFailure, TetraError
from .fixpoint import Base, FixedPointData

GEOMETRY_TOL = 1e-9
ON_CURVE_TOL = 1e-12
DEFAULT_THRESHOLD = 3.0
# Curve parameters stop this far short of +-1, where Abel functions blow up.
T_MARGIN = 1e-4
_TREND_SAMPLES = 5
_CHUNK = 1 << 20


class Side(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    ON_CURVE = "OnCurve"


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Samples ``z[k] = gamma(t[k])`` of a curve on ``(-1, 1)``.

    ``endpoint_a`` and ``endpoint_b`` are the limits at ``t -> -1`` and
    ``t -> 1``; they are not part of the polyline.
    """

    t: np.ndarray
    z: np.ndarray
    endpoint_a: complex
    endpoint_b: complex

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        z = np.asarray(self.z, dtype=complex)
        if t.shape != z.shape or t.ndim != 1 or len(t) < 2:
            raise ValueError("t and z must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(t) <= 0) or t[0] <= -1 or t[-1] >= 1:
            raise ValueError("t must be strictly increasing inside (-1, 1)")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z", z)

    def __len__(self):
        return len(self.z)

    def map(self, fn, endpoints=None) -> "SampledCurve":
        """Apply ``fn`` to every sample (``fn`` takes and returns arrays)."""
        a, b = endpoints if endpoints is not None else (fn(np.array([self.endpoint_a]))[0],
                                                        fn(np.array([self.endpoint_b]))[0])
        return SampledCurve(self.t, fn(self.z), complex(a), complex(b))

    def shifted(self, d) -> "SampledCurve":
        return SampledCurve(self.t, self.z + d, self.endpoint_a + d, self.endpoint_b + d)


@dataclass(frozen=True)
class Witness:
    index: int
    location: complex
    detail: str

    def to_dict(self):
        return {
            "index": int(self.index),
            "location": [float(self.location.real), float(self.location.imag)],
            "detail": self.detail,
        }


@dataclass
class CriterionReport:
    """Outcome of one check; ``passed`` is true exactly when there are no witnesses."""

    criterion: str
    witnesses: list
    sample_count: int
    threshold: Optional[float] = None
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.witnesses = sorted(self.witnesses, key=lambda w: w.index)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_dict(self):
        out = {
            "criterion": self.criterion,
            "passed": self.passed,
            "sample_count": int(self.sample_count),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.checks:
            out["checks"] = dict(self.checks)
        return out


# -- curves ------------------------------------------------------------------


def chebyshev_parameters(n: int) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[-1, 1]`` pulled in by ``T_MARGIN``."""
    k = np.arange(n)
    t = -np.cos(np.pi * k / (n - 1)) * (1 - T_MARGIN)
    return (t - t[::-1]) / 2  # exact antisymmetry, t = 0 for odd n


def curve_ell(fp: FixedPointData, n: int = 256) -> SampledCurve:
    """Vertical segment ``Re L + i Im L t`` from ``L*`` to ``L``."""
    if n < 16:
        raise ValueError("n must be at least 16")
    t = chebyshev_parameters(n)
    z = fp.L.real + 1j * fp.L.imag * t
    return SampledCurve(t, z, fp.L_conj, fp.L)


def push_curve(curve: SampledCurve, b: Base) -> SampledCurve:
    """Image of ``curve`` under ``exp_b``."""
    lam = b.ln_b
    with np.errstate(over="ignore", invalid="ignore"):
        return curve.map(lambda z: np.exp(lam * z))


def segment_curve(a: complex, b: complex, n: int = 256) -> SampledCurve:
    """Straight segment from ``a`` (at ``t = -1``) to ``b`` on Chebyshev parameters."""
    t = chebyshev_parameters(n)
    a, b = complex(a), complex(b)
    z = (a + b) / 2 + (b - a) / 2 * t
    return SampledCurve(t, z, a, b)


@dataclass(frozen=True)
class InitialRegionH:
    """``{Re z >= Re L, |z| <= |L|}`` without ``L`` and ``L*``.

    Bounded by the segment ``[L*, L]`` and its image under ``exp_b``.
    """

    fp: FixedPointData

    def contains(self, z) -> bool:
        z = complex(z)
        L = self.fp.L
        if z in (L, L.conjugate()):
            return False
        return z.real >= L.real and abs(z) <= abs(L)

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        """``n`` deterministic interior points (Halton, rejection in the bounding box)."""
        L = self.fp.L
        lo = [L.real, -L.imag]
        hi = [abs(L), L.imag]
        gen = qmc.Halton(d=2, scramble=False, seed=seed)
        out = []
        while len(out) < n:
            for x, y in qmc.scale(gen.random(4 * n), lo, hi):
                z = complex(x, y)
                if abs(z) < abs(L) and z.real > L.real and len(out) < n:
                    out.append(z)
        return np.array(out)


# -- polyline geometry -------------------------------------------------------


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _point_segment(p, a, b):
    d = b - a
    n2 = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(n2 > 0, ((p - a) * np.conj(d)).real / n2, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return np.abs(p - (a + s * d))


def segment_distance(a0, a1, b0, b1):
    """Distance between segments ``[a0, a1]`` and ``[b0, b1]`` (broadcasting).

    Segments with non-finite ends get ``nan``, which never counts as close.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _segment_distance(a0, a1, b0, b1)


def _segment_distance(a0, a1, b0, b1):
    d1 = _cross(b1 - b0, a0 - b0)
    d2 = _cross(b1 - b0, a1 - b0)
    d3 = _cross(a1 - a0, b0 - a0)
    d4 = _cross(a1 - a0, b1 - a0)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum(
        np.minimum(_point_segment(a0, b0, b1), _point_segment(a1, b0, b1)),
        np.minimum(_point_segment(b0, a0, a1), _point_segment(b1, a0, a1)),
    )
    return np.where(crossing, 0.0, dist)


def _close_pairs(p, q, tol, skip_adjacent):
    """Index pairs ``(i, j)`` of segments of ``p`` and ``q`` closer than ``tol``."""
    a0, a1 = p[:-1], p[1:]
    b0, b1 = q[:-1], q[1:]
    rows = max(1, _CHUNK // max(1, len(b0)))
    hits = []
    for s in range(0, len(a0), rows):
        i = np.arange(s, min(s + rows, len(a0)))
        d = segment_distance(a0[i, None], a1[i, None], b0[None, :], b1[None, :])
        bad = d <= tol
        if skip_adjacent:
            j = np.arange(len(b0))
            bad &= j[None, :] > i[:, None] + 1
        ii, jj = np.nonzero(bad)
        hits.extend(zip((i[ii]).tolist(), jj.tolist()))
    return hits


def polyline_self_intersections(z: np.ndarray, tol: float = GEOMETRY_TOL):
    """Repeated samples and pairs of non-adjacent segments that touch."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore"):
        repeats = np.nonzero(np.abs(np.diff(z)) <= tol)[0].tolist()
    return repeats, _close_pairs(z, z, tol, skip_adjacent=True)


def polyline_distance(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    best = math.inf
    rows = max(1, _CHUNK // max(1, len(q)))
    for s in range(0, len(p) - 1, rows):
        e = min(s + rows, len(p) - 1)
        d = segment_distance(p[s:e, None], p[s + 1:e + 1, None], q[None, :-1], q[None, 1:])
        best = min(best, float(d.min()))
    return best


def _injectivity_witnesses(z, label):
    repeats, pairs = polyline_self_intersections(z)
    out = [Witness(k + 1, complex(z[k + 1]), f"{label}: repeated sample {k + 1}") for k in repeats]
    out += [
        Witness(i, complex(z[i]), f"{label}: segment {i} meets segment {j}") for i, j in pairs
    ]
    return out


def _disjointness_witnesses(p, q, label):
    out = []
    for i, j in _close_pairs(p, q, GEOMETRY_TOL, skip_adjacent=False):
        out.append(Witness(i, complex(p[i]), f"{label}: segment {i} meets segment {j}"))
    return out


def is_initial_curve(curve: SampledCurve, b: Base) -> CriterionReport:
    """Check that ``curve`` and its ``exp_b`` image are injective and disjoint
    and that the endpoints are fixed points of ``exp_b``.

    ``checks`` records each sub-check separately.
    """
    image = push_curve(curve, b)
    inj = _injectivity_witnesses(curve.z, "curve not injective")
    inj_image = _injectivity_witnesses(image.z, "image not injective")
    disjoint = _disjointness_witnesses(curve.z, image.z, "curve meets its image")
    ends = []
    for k, e in ((0, curve.endpoint_a), (len(curve) - 1, curve.endpoint_b)):
        if abs(b.exp(e) - e) > 1e-10 * max(1.0, abs(e)):
            ends.append(Witness(k, complex(e), "endpoint is not a fixed point"))
    if abs(curve.endpoint_a - curve.endpoint_b) <= 1e-10:
        ends.append(Witness(0, complex(curve.endpoint_a), "endpoints coincide"))
    return CriterionReport(
        criterion="initial",
        witnesses=inj + inj_image + disjoint + ends,
        sample_count=len(curve),
        checks={
            "curve_injective": not inj,
            "image_injective": not inj_image,
            "disjoint": not disjoint,
            "endpoints_fixed": not ends,
        },
    )


# -- left / right of a curve -------------------------------------------------


def _ray_crossings(z, p):
    """Crossings of the leftward horizontal rays from ``p`` with the extended polyline."""
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    x, y = p.real[:, None], p.imag[:, None]
    a, b = z[None, :-1], z[None, 1:]
    straddle = (a.imag > y) != (b.imag > y)
    with np.errstate(invalid="ignore", divide="ignore"):
        xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    count = np.sum(straddle & (xc < x), axis=1)
    # vertical extensions below the first and above the last sample
    count += (z[0].imag > p.imag) & (z[0].real < p.real)
    count += (z[-1].imag <= p.imag) & (z[-1].real < p.real)
    return count


def _near_polyline(z, p, tol):
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    out = np.zeros(len(p), dtype=bool)
    for s in range(0, len(p), 1024):
        q = p[s:s + 1024, None]
        d = _point_segment(q, z[None, :-1], z[None, 1:]).min(axis=1)
        out[s:s + 1024] = d <= tol
    return out


def classify_sides(curve: SampledCurve, points) -> list:
    """Vectorised :func:`classify_side`."""
    z = curve.z
    if z[-1].imag <= z[0].imag:
        raise ValueError("curve must run upwards (Im increasing towards endpoint_b)")
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    even = _ray_crossings(z, pts) % 2 == 0
    on = _near_polyline(z, pts, ON_CURVE_TOL)
    return [Side.ON_CURVE if o else (Side.LEFT if e else Side.RIGHT) for o, e in zip(on, even)]


def classify_side(curve: SampledCurve, z) -> Side:
    """Left or right of a curve whose imaginary part runs from -oo to +oo.

    The polyline is continued vertically beyond its first and last sample.
    A point is ``LEFT`` when the horizontal ray going left from it crosses
    the continued polyline an even number of times.
    """
    return classify_sides(curve, [z])[0]


# -- criteria ----------------------------------------------------------------


def _evaluate(alpha, curve):
    values = np.full(len(curve), np.nan + 0j)
    failures = []
    for k, z in enumerate(curve.z):
        try:
            values[k] = complex(alpha(complex(z)))
        except (TetraError, ArithmeticError, ValueError) as exc:
            failures.append(Witness(k, complex(z), f"evaluation failed: {exc}"))
    return values, failures


def _trend_witnesses(values, threshold):
    out = []
    im = values.imag
    n = min(_TREND_SAMPLES, len(values))
    for k in range(n):
        if not im[k] < -threshold:
            out.append(Witness(k, complex(values[k]), f"Im = {im[k]:.6g} is not below -{threshold:g}"))
    for k in range(len(values) - n, len(values)):
        if not im[k] > threshold:
            out.append(Witness(k, complex(values[k]), f"Im = {im[k]:.6g} is not above {threshold:g}"))
    return out


def check_criterion_C(alpha: Callable, curve: SampledCurve, threshold: float = DEFAULT_THRESHOLD) -> CriterionReport:
    """``Im(alpha(curve))`` strictly increasing and beyond ``+-threshold`` at the ends."""
    values, failures = _evaluate(alpha, curve)
    ok = np.isfinite(values)
    mono = []
    idx = np.nonzero(ok)[0]
    steps = np.diff(values[idx].imag)
    for j in np.nonzero(~(steps > 1e-12))[0]:
        k = int(idx[j + 1])
        mono.append(Witness(k, complex(values[k]), f"Im does not increase (step {steps[j]:.3e})"))
    trend = _trend_witnesses(values, threshold)
    return CriterionReport(
        criterion="C",
        witnesses=failures + mono + trend,
        sample_count=len(curve),
        threshold=threshold,
        checks={"evaluable": not failures, "increasing": not mono, "divergent": not trend},
    )


def abel_image(alpha: Callable, curve: SampledCurve) -> SampledCurve:
    """``alpha`` applied to the samples; endpoints are kept as ``+-i oo`` markers."""
    values, failures = _evaluate(alpha, curve)
    if failures:
        raise EvaluationFailure(f"sample {failures[0].index}: {failures[0].detail}")
    return SampledCurve(curve.t, values, complex(0, -math.inf), complex(0, math.inf))


def check_criterion_B(alpha: Callable, curve: SampledCurve, threshold: float = DEFAULT_THRESHOLD) -> CriterionReport:
    """``zeta = alpha(curve)`` injective, disjoint from ``zeta + 1``, with divergent Im."""
    values, failures = _evaluate(alpha, curve)
    z = values[np.isfinite(values)]
    inj = _injectivity_witnesses(z, "zeta not injective")
    disjoint = _disjointness_witnesses(z, z + 1, "zeta meets zeta + 1")
    trend = _trend_witnesses(values, threshold)
    return CriterionReport(
        criterion="B",
        witnesses=failures + inj + disjoint + trend,
        sample_count=len(curve),
        threshold=threshold,
        checks={
            "evaluable": not failures,
            "injective": not inj,
            "disjoint": not disjoint,
            "divergent": not trend,
        },
    )


def covering_shift(zeta: SampledCurve, w: complex, k_range) -> Optional[int]:
    """Some ``k`` in ``k_range`` with ``w - k`` between ``zeta`` and ``zeta + 1``, else None.

    Membership uses closed sides: right of (or on) ``zeta`` and left of (or
    on) ``zeta + 1``.
    """
    ks = np.arange(k_range[0], k_range[1] + 1)
    pts = complex(w) - ks
    right = classify_sides(zeta, pts)
    left = classify_sides(zeta.shifted(1), pts)
    for k, r, l in zip(ks, right, left):
        if r is not Side.LEFT and l is not Side.RIGHT:
            return int(k)
    return None


def halton_window(window, samples: int) -> np.ndarray:
    """Deterministic quasi-random points in ``(x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = window
    pts = qmc.scale(qmc.Halton(d=2, scramble=False).random(samples), [x0, y0], [x1, y1])
    return pts[:, 0] + 1j * pts[:, 1]


def check_covering(
    alpha: Callable,
    region: InitialRegionH,
    window=(-3.0, 3.0, -3.0, 3.0),
    k_range=(-8, 8),
    samples: int = 500,
    boundary_samples: int = 256,
    injectivity_samples: int = 48,
) -> CriterionReport:
    """Check that integer translates of ``alpha(H)`` cover ``window``.

    ``alpha(H)`` is the region right of ``zeta = alpha(ell)`` and left of
    ``zeta + 1`` (the image of ``exp_b(ell)`` under the Abel equation).
    """
    witnesses = []
    spots = region.sample(injectivity_samples)
    images = np.array([complex(alpha(complex(z))) for z in spots])
    gaps = np.abs(images[:, None] - images[None, :])
    np.fill_diagonal(gaps, np.inf)
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    injective = bool(gaps[i, j] > 1e-10)
    if not injective:
        witnesses.append(Witness(-1, complex(spots[i]), f"alpha not injective: H samples {i} and {j} collide"))

    zeta = abel_image(alpha, curve_ell(region.fp, boundary_samples))
    uncovered = []
    for k, w in enumerate(halton_window(window, samples)):
        if covering_shift(zeta, w, k_range) is None:
            uncovered.append(Witness(k, complex(w), f"no k in [{k_range[0]}, {k_range[1]}] covers this point"))
    return CriterionReport(
        criterion="A",
        witnesses=witnesses + uncovered,
        sample_count=samples,
        checks={"injective_on_samples": injective, "covered": not uncovered},
    )


def szekeres(alpha: Callable, amplitude: float = 1 / (4 * math.pi)) -> Callable:
    """``alpha + g(alpha)`` with the 1-periodic ``g(x) = amplitude * sin(2 pi x)``.

    Still an Abel function with the same zero at ``d`` when ``alpha`` is.
    """

    def perturbed(z):
        a = complex(alpha(z))
        return a + amplitude * np.sin(2 * np.pi * a)

    return perturbed
