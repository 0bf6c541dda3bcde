"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""

import cmath
import math
import time

import numpy as np

from tetralib import figures
from tetralib.cauchy_solver import SolverParams, evaluate_strip, residual_report, solve
from tetralib.criteria import (
    InitialRegionH,
    check_covering,
    check_criterion_B,
    check_criterion_C,
    curve_ell,
    is_initial_curve,
    push_curve,
    szekeres,
)
from tetralib.fixpoint import principal_fixed_point
from tetralib.koenigs import KoenigsContext, chi, chi_inverse
from tetralib.special_functions import iterate, sexp, slog

PROBES = [complex(x, y) for x in (-0.5, -0.2, 0.0, 0.3, 0.5) for y in (-3.7, -0.4, 1.1, 4.0)]


def test_criterion_1_fixed_point(acceptance_line):
    principal_fixed_point(math.e)
    runs = []
    for _ in range(20):
        t0 = time.perf_counter()
        fp = principal_fixed_point(math.e)
        runs.append(time.perf_counter() - t0)
    runtime = min(runs)
    fixed = abs(cmath.exp(fp.L) - fp.L)
    log_gap = abs(cmath.log(fp.L) - fp.L)
    ok = fixed <= 1e-13 and log_gap <= 1e-12 and runtime < 1e-3
    acceptance_line(1, ok, f"|e^L - L| = {fixed:.1e} (<= 1e-13), |ln L - L| = {log_gap:.1e} (<= 1e-12), "
                           f"runtime {runtime * 1e3:.3f} ms (< 1 ms)")
    assert ok


def test_criterion_2_schroder(acceptance_line):
    t0 = time.perf_counter()
    fp = principal_fixed_point(math.e)
    ctx = KoenigsContext(fp)
    rng = np.random.default_rng(20260101)
    r = 0.3 * np.sqrt(rng.random(100))
    pts = fp.L + r * np.exp(2j * np.pi * rng.random(100))
    schroder = max(abs(chi(ctx, cmath.exp(z)) - fp.c * chi(ctx, z)) for z in pts)
    trip = max(abs(chi_inverse(ctx, chi(ctx, z)) - z) for z in pts)
    runtime = time.perf_counter() - t0
    ok = schroder <= 1e-9 and trip <= 1e-8 and runtime < 1
    acceptance_line(2, ok, f"Schroeder residual {schroder:.1e} (<= 1e-9), round trip {trip:.1e} (<= 1e-8) "
                           f"on 100 points within 0.3 of L, runtime {runtime:.2f} s (< 1 s)")
    assert ok


def test_criterion_3_solver(acceptance_line):
    t0 = time.perf_counter()
    coarse = solve(math.e, SolverParams(n_nodes=128, height=6, tol=1e-10))
    fine = solve(math.e, SolverParams(n_nodes=256, height=8, tol=1e-10))
    residual = residual_report(coarse)
    moved = max(abs(evaluate_strip(coarse, z) - evaluate_strip(fine, z)) for z in PROBES)
    runtime = time.perf_counter() - t0
    ok = coarse.converged and coarse.iterations <= 5000 and residual <= 1e-8 and moved <= 1e-6 and runtime < 120
    acceptance_line(3, ok, f"{coarse.iterations} sweeps (<= 5000), residual {residual:.1e} (<= 1e-8), "
                           f"refinement moves 20 probes by {moved:.1e} (<= 1e-6), runtime {runtime:.1f} s (< 120 s)")
    assert ok


def test_criterion_4_normalizations(acceptance_line, table_e, table_2):
    parts = []
    ok = True
    for table in (table_e, table_2):
        b = table.base.b
        s0 = sexp(table, 0)
        e1 = abs(sexp(table, 1) - b)
        e2 = abs(sexp(table, 2) - b ** b)
        em = abs(sexp(table, -1))
        ok &= s0 == 1 and e1 <= 1e-9 and e2 <= 1e-8 and em <= 1e-9
        parts.append(f"b={b:.4g}: sexp(0)-1 = {abs(s0 - 1):.0e}, |sexp(1)-b| = {e1:.1e}, "
                     f"|sexp(2)-b^b| = {e2:.1e}, |sexp(-1)| = {em:.1e}")
    acceptance_line(4, ok, "; ".join(parts) + " (tol 0 / 1e-9 / 1e-8 / 1e-9)")
    assert ok


def test_criterion_5_abel_and_round_trips(acceptance_line, table_e):
    abel = 0.0
    for x in np.linspace(-1.4, 3, 20):
        for y in np.linspace(-1, 1, 10):
            z = complex(x, y)
            abel = max(abel, abs(slog(table_e, cmath.exp(z)) - slog(table_e, z) - 1))
    forward, forward_at, bad = 0.0, None, 0
    backward = 0.0
    for x in np.linspace(-1.5, 3, 19):
        for y in np.linspace(-2, 2, 17):
            w = complex(x, y)
            z = sexp(table_e, w)
            err = abs(slog(table_e, z) - w)
            bad += err > 1e-8
            if err > forward:
                forward, forward_at = err, w
            backward = max(backward, abs(sexp(table_e, slog(table_e, z)) - z) / max(1, abs(z)))
    at_one = slog(table_e, 1)
    ok = abel <= 1e-8 and forward <= 1e-8 and backward <= 1e-8 and at_one == 0
    collision = ""
    if forward > 1e-8:
        # sexp is not injective on this box, so no inverse can satisfy both points
        other = slog(table_e, sexp(table_e, forward_at))
        gap = abs(sexp(table_e, other) - sexp(table_e, forward_at))
        collision = f"; {bad}/323 grid points fail, sexp({other:.4g}) = sexp({forward_at:.4g}) to {gap:.0e}"
    acceptance_line(5, ok, f"Abel residual {abel:.1e} on 200 points, |slog(sexp(w)) - w| = {forward:.1e}, "
                           f"|sexp(slog(z)) - z| = {backward:.1e} (all <= 1e-8), slog(1) = {at_one}{collision}")
    assert ok


def test_criterion_6_fractional_iterates(acceptance_line, table_e):
    xs = np.linspace(-1, 2, 13)
    one = max(abs(iterate(table_e, 1, x) - math.exp(x)) for x in xs)
    zero = max(abs(iterate(table_e, 0, x) - x) for x in xs)
    minus = max(abs(iterate(table_e, -1, x) - math.log(x)) for x in xs if x > 0)
    half = max(abs(iterate(table_e, 0.5, iterate(table_e, 0.5, x)) - math.exp(x)) for x in (-1, 0, 1, 2))
    ok = one <= 1e-8 and zero <= 1e-9 and minus <= 1e-8 and half <= 1e-6
    acceptance_line(6, ok, f"exp {one:.1e} (<= 1e-8), identity {zero:.1e} (<= 1e-9), log {minus:.1e} (<= 1e-8), "
                           f"half-iterate semigroup {half:.1e} (<= 1e-6)")
    assert ok


def test_criterion_7_criteria(acceptance_line, table_e):
    alpha = lambda z: slog(table_e, z)  # noqa: E731
    t0 = time.perf_counter()
    ell = curve_ell(table_e.fp, 256)
    c = check_criterion_C(alpha, ell)
    b = check_criterion_B(alpha, ell)
    a = check_covering(alpha, InitialRegionH(table_e.fp), (-3, 3, -3, 3), (-8, 8), samples=500)
    perturbed = check_criterion_C(szekeres(alpha), ell)
    runtime = time.perf_counter() - t0
    ok = c.passed and b.passed and a.passed and not perturbed.passed and runtime < 60
    acceptance_line(7, ok, f"C {'pass' if c.passed else 'fail'} on {c.sample_count} samples, "
                           f"B {'pass' if b.passed else 'fail'}, covering {'pass' if a.passed else 'fail'} "
                           f"({a.sample_count} probes), Szekeres-perturbed C "
                           f"{'fails' if not perturbed.passed else 'passes'} ({len(perturbed.witnesses)} witnesses), "
                           f"runtime {runtime:.1f} s (< 60 s)")
    assert ok


def test_criterion_8_initial_curves(acceptance_line, table_e):
    curve = curve_ell(table_e.fp, 256)
    verdicts = []
    for _ in range(3):
        verdicts.append(is_initial_curve(curve, table_e.base).passed)
        curve = push_curve(curve, table_e.base)
    arc = push_curve(curve_ell(table_e.fp, 256), table_e.base)
    modulus = float(np.max(np.abs(np.abs(arc.z) - abs(table_e.fp.L))))
    fourth = push_curve(curve, table_e.base)
    fourth_injective = is_initial_curve(fourth, table_e.base).checks["curve_injective"]
    ok = all(verdicts) and not fourth_injective and modulus <= 1e-12
    acceptance_line(8, ok, f"initial: ell {verdicts[0]}, e^ell {verdicts[1]}, e^e^ell {verdicts[2]}; "
                           f"fourth push injective {fourth_injective}; arc modulus error {modulus:.1e} (<= 1e-12)")
    assert ok


def test_criterion_9_figure_shapes(acceptance_line, table_e, table_2):
    rows = np.array(figures.fig1_rows(table_e, table_2))
    inner = rows[rows[:, 0] < 3]
    real = all(sexp(t, x).imag == 0 for t in (table_e, table_2) for x in rows[:, 0])
    increasing = bool(np.all(np.diff(inner[:, 1]) > 0) and np.all(np.diff(inner[:, 2]) > 0))
    edge = [(sexp(t, -1.99).real, sexp(t, -1.999).real) for t in (table_e, table_2)]
    diverges = all(a < -3 and b < a for a, b in edge)
    fam = figures.fig4_rows(table_e)
    at_one = sorted((c, y) for c, x, y in fam if x == 1.0 and not math.isnan(y))
    ordered = len(at_one) >= 9 and all(p[1] < q[1] for p, q in zip(at_one, at_one[1:]))
    ok = len(rows) == 500 and real and increasing and diverges and ordered
    acceptance_line(9, ok, f"fig1: {len(rows)} rows, real {real}, increasing {increasing}, "
                           f"sexp(-1.999) = {edge[0][1]:.3g} / {edge[1][1]:.3g}; "
                           f"fig4: {len(at_one)} orders at x = 1, ordered {ordered}")
    assert ok
