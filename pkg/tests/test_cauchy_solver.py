import math

import numpy as np
import pytest
from scipy.interpolate import BarycentricInterpolator

from tetralib.cauchy_solver import (
    SolverParams,
    _Contour,
    axis_grid,
    evaluate_strip,
    evaluate_strip_derivative,
    residual_report,
    solve,
)
from tetralib.errors import BranchCollapse, NoConvergence, OutOfStrip, UsageError
from tetralib.fixpoint import principal_fixed_point

# 20 fixed probe points inside |Re| <= 0.5, |Im| <= 4
PROBES = [complex(x, y) for x in (-0.5, -0.2, 0.0, 0.3, 0.5) for y in (-3.7, -0.4, 1.1, 4.0)]


def test_normalisation_and_symmetry(table_e):
    m = table_e.params.half_nodes
    assert table_e.y[m] == 0 and table_e.f[m] == 1.0
    assert np.array_equal(table_e.f[::-1], np.conj(table_e.f))
    assert np.array_equal(table_e.y, axis_grid(table_e.params))


def test_converged_table_for_base_e(table_e):
    assert table_e.converged
    assert table_e.final_residual <= 1e-9
    assert table_e.final_residual <= 10 * table_e.params.tol
    assert abs(table_e.f[-1] - table_e.fp.L) <= 0.05
    assert abs(table_e.f[0] - table_e.fp.L_conj) <= 0.05
    assert table_e.iterations < table_e.params.max_iters


def test_converged_table_for_base_2(table_2):
    assert table_2.final_residual <= 1e-9
    assert table_2.endpoint_gap <= 0.05


def test_residual_report_recomputes(table_e):
    assert residual_report(table_e) == table_e.final_residual


def test_small_problem_has_larger_residual(table_e):
    small = solve(math.e, SolverParams(n_nodes=32, height=2.0))
    assert small.final_residual > table_e.final_residual


def test_unconverged_residual_is_larger(table_e):
    raw = solve(math.e, SolverParams(max_iters=1), allow_unconverged=True)
    assert not raw.converged
    assert raw.final_residual > table_e.final_residual
    with pytest.raises(NoConvergence) as info:
        solve(math.e, SolverParams(max_iters=1))
    assert info.value.final_update_norm > 0


def test_damping_does_not_change_the_answer(table_e):
    undamped = solve(math.e, SolverParams(damping=1.0))
    ratio = undamped.final_residual / table_e.final_residual
    assert 0.1 <= ratio <= 10
    for z in PROBES[:5]:
        assert abs(evaluate_strip(undamped, z) - evaluate_strip(table_e, z)) < 1e-9


def test_constant_tail_variant_converges():
    t = solve(math.e, SolverParams(tail="constant"))
    assert t.final_residual <= 1e-3
    assert math.isnan(t.asymptotic.real)


def test_refinement(table_e, table_e_fine):
    worst = max(abs(evaluate_strip(table_e, z) - evaluate_strip(table_e_fine, z)) for z in PROBES)
    assert worst <= 1e-6


def test_strip_values(table_e):
    assert evaluate_strip(table_e, 0) == 1
    k = 80
    assert evaluate_strip(table_e, 1j * table_e.y[k]) == table_e.f[k]
    half = evaluate_strip(table_e, 0.5)
    assert half.imag == pytest.approx(0, abs=1e-10)
    assert 1 < half.real < math.e


def test_half_grid_matches_local_interpolation(table_e):
    y, f = table_e.y, table_e.f
    h = table_e.params.spacing
    for k in range(20, len(y) - 21, 7):
        sl = slice(k - 5, k + 6)
        local = BarycentricInterpolator(y[sl], f[sl])
        mid = y[k] + h / 2
        assert abs(evaluate_strip(table_e, 1j * mid) - local(mid)) <= 1e-8


def test_conjugation_on_strip(table_e):
    rng = np.random.default_rng(3)
    for _ in range(30):
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-5, 5))
        assert abs(evaluate_strip(table_e, z.conjugate()) - evaluate_strip(table_e, z).conjugate()) <= 1e-10


def test_real_on_real_axis(table_e):
    for x in np.linspace(-0.5, 0.5, 21):
        assert abs(evaluate_strip(table_e, x).imag) <= 1e-10


def test_derivative_matches_finite_difference(table_e):
    for z in (0.1 + 0.3j, -0.3 - 2j, 0.25):
        h = 1e-5
        fd = (evaluate_strip(table_e, z + h) - evaluate_strip(table_e, z - h)) / (2 * h)
        assert abs(evaluate_strip_derivative(table_e, z) - fd) < 1e-8


def test_endpoint_approach_improves_with_height():
    gaps = []
    for A in (4.0, 6.0, 8.0):
        t = solve(math.e, SolverParams(height=A, n_nodes=int(round(A / 6.0 * 128))))
        gaps.append(abs(evaluate_strip(t, 0.1 + 1j * (A - 1)) - t.fp.L))
    assert gaps[0] > gaps[1] - 1e-3 and gaps[1] > gaps[2] - 1e-3
    assert gaps[0] > gaps[2]


@pytest.mark.parametrize("z", [0.6, -0.51, 5.01j, -5.5j, 0.5 + 5.2j])
def test_out_of_strip(table_e, z):
    with pytest.raises(OutOfStrip):
        evaluate_strip(table_e, z)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_nodes=16), dict(n_nodes=64.5), dict(height=1.5), dict(tol=1e-15),
        dict(max_iters=0), dict(damping=0.0), dict(damping=1.5), dict(tail="flat"),
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(UsageError):
        SolverParams(**kwargs)


def test_grid_contains_zero():
    p = SolverParams(n_nodes=128, height=6.0)
    y = axis_grid(p)
    assert len(y) == 129 and y[64] == 0 and y[-1] == 6.0


def test_branch_collapse_is_reported():
    fp = principal_fixed_point(math.e)
    Y = np.linspace(-1, 1, 5)
    axis = np.array([1, 1, -0.5, 1, 1], dtype=complex)
    with pytest.raises(BranchCollapse):
        _Contour(fp, Y, axis)


def test_progress_callback():
    seen = []
    solve(2.0, SolverParams(n_nodes=64, height=4.0), progress=lambda it, u: seen.append((it, u)))
    assert seen and all(it % 10 == 0 for it, _ in seen)
