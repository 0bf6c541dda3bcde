import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lambertw

from tetralib.errors import BaseOutOfRange
from tetralib.fixpoint import BASE_THRESHOLD, Base, multiplier, principal_fixed_point, validate_base


def lambert_fixed_point(b):
    # exp_b(L) = L  <=>  L = -W(-ln b) / ln b on the principal branch
    lb = math.log(b)
    L = complex(-lambertw(-lb, 0) / lb)
    return L if L.imag > 0 else L.conjugate()


@pytest.mark.parametrize("b", [math.e, 2.0, 1.5, 10.0, 100.0])
def test_matches_lambert_w(b):
    fp = principal_fixed_point(b)
    assert abs(fp.L - lambert_fixed_point(b)) < 1e-13
    assert fp.residual <= 1e-13


def test_base_e_value():
    fp = principal_fixed_point(math.e)
    assert abs(fp.L - (0.3181315 + 1.3372357j)) < 1e-7
    assert fp.L_conj == fp.L.conjugate()


def test_base_2_invariants():
    fp = principal_fixed_point(2.0)
    assert fp.L.imag > 0
    assert abs(2 ** fp.L - fp.L) < 1e-13
    assert 0 < fp.L.imag * math.log(2) < math.pi


def test_multiplier():
    fp = principal_fixed_point(math.e)
    assert multiplier(fp) == fp.L
    assert abs(abs(multiplier(fp)) - 1.374) < 1e-3
    fp2 = principal_fixed_point(2.0)
    assert multiplier(fp2) == math.log(2) * fp2.L
    assert abs(multiplier(fp2)) > 1


@pytest.mark.parametrize("b", [1.2, BASE_THRESHOLD, 0.5, -3.0, float("nan"), float("inf"), "x"])
def test_rejected_bases(b):
    with pytest.raises(BaseOutOfRange):
        validate_base(b)
    with pytest.raises(BaseOutOfRange):
        principal_fixed_point(b)


def test_accepted_bases_are_immutable():
    for b in (math.e, 10.0, math.nextafter(BASE_THRESHOLD, 2)):
        base = validate_base(b)
        assert isinstance(base, Base)
        with pytest.raises(AttributeError):
            base.b = 3.0


def test_deterministic():
    a = principal_fixed_point(3.3)
    b = principal_fixed_point(3.3)
    assert (a.L.real, a.L.imag) == (b.L.real, b.L.imag)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1.4447, max_value=1e4))
def test_fixed_point_invariants(b):
    if b <= BASE_THRESHOLD * (1 + 1e-9):
        return
    fp = principal_fixed_point(b)
    lb = math.log(b)
    scale = max(1.0, abs(fp.L))
    assert abs(cmath.exp(lb * fp.L) - fp.L) <= 1e-13 * scale
    assert abs(cmath.exp(lb * fp.L_conj) - fp.L_conj) <= 1e-13 * scale
    assert abs(b ** fp.L.real - abs(fp.L)) <= 1e-12 * scale
    assert 0 < fp.L.imag * lb < math.pi
    assert abs(fp.c - cmath.log(fp.L)) <= 1e-12 * max(1.0, abs(fp.c))
    assert abs(fp.c) > 1
