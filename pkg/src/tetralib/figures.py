"""Data behind the plots: real tetration curves, a complex contour grid, iterate families."""

import math

import numpy as np

from .criteria import curve_ell
from .errors import TetraError
from .special_functions import emit_iterate_family, sexp, slog

FIG4_ORDERS = (-2.0, -1.0, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9, 1.0, 2.0)


def _safe(fn, *args):
    try:
        return fn(*args)
    except TetraError:
        return complex("nan")


def fig1_rows(table_e, table_2):
    """``(x, sexp_e(x), sexp_2(x))`` for 500 points ``x = -1.99, -1.98, ..., 3``."""
    xs = (np.arange(500) - 199) / 100
    return [(x, sexp(table_e, x).real, sexp(table_2, x).real) for x in xs]


def fig3_rows(table, n: int = 101, extent: float = 2.5):
    """``(re, im, |sexp|, arg sexp)`` on an ``n`` by ``n`` grid of ``[-extent, extent]^2``.

    Points on the cut ``x <= -2`` get ``nan`` values.
    """
    grid = np.linspace(-extent, extent, n)
    rows = []
    for y in grid:
        for x in grid:
            v = _safe(sexp, table, complex(x, y))
            rows.append((x, y, abs(v), math.atan2(v.imag, v.real) if v == v else math.nan))
    return rows


def fig3_boundary_rows(table, n: int = 256):
    """Boundary of ``slog(H)``: ``(t, zeta, zeta + 1)`` with ``zeta = slog(ell(t))``."""
    curve = curve_ell(table.fp, n)
    rows = []
    for t, z in zip(curve.t, curve.z):
        w = _safe(slog, table, z)
        rows.append((t, w.real, w.imag, w.real + 1, w.imag))
    return rows


def fig4_rows(table, orders=FIG4_ORDERS, n_points: int = 121):
    """``(c, x, exp_b^c(x))`` on ``[-3, 3]``; the grid also contains ``x = 1`` and ``x = b``."""
    return emit_iterate_family(table, orders, (-3.0, 3.0), n_points, extra=(1.0, table.base.b))


FIG1_HEADER = ("x", "sexp_e", "sexp_2")
FIG3_HEADER = ("re", "im", "abs", "arg")
FIG3_BOUNDARY_HEADER = ("t", "zeta_re", "zeta_im", "zeta_plus_one_re", "zeta_plus_one_im")
FIG4_HEADER = ("c", "x", "y")
