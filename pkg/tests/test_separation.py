import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kramers_sep.errors import DomainError, ValidationError
from kramers_sep.model import KramersParams, SchemeTag
from kramers_sep.separation import (CoordinateSystem, build_coordinate_system,
                                    check_constraint, pair_coefficients)
from kramers_sep.timebasis import ConstantsAB, RFunction, TimeBasis

T = SchemeTag
P_CRIT = KramersParams(1, 0.25)
P_FREE = KramersParams(1, 0)


def test_pair_coefficients_c34():
    C = pair_coefficients(ConstantsAB((0, 0, 1, 0), (0, 0, 0, 1)))
    assert C[3, 4] == -1 and C[4, 3] == 1
    others = [C[i, j] for i in range(1, 5) for j in range(1, 5) if {i, j} != {3, 4}]
    assert not any(others)


def test_pair_coefficients_antisymmetric():
    C = pair_coefficients(ConstantsAB((1, 2, 3, 4), (1, 2, 3, 4)))
    assert not np.any(C.C)


def test_pair_coefficients_c12():
    C = pair_coefficients(ConstantsAB((1, 0, 0, 0), (0, 1, 0, 0)))
    assert C[1, 2] == -1


@given(st.lists(st.floats(-5, 5), min_size=8, max_size=8))
def test_pair_coefficients_skew(v):
    if not any(v):
        return
    C = pair_coefficients(ConstantsAB(v[:4], v[4:])).C
    np.testing.assert_array_equal(C, -C.T)


def test_critical_constraint_examples():
    assert check_constraint(T.FirstOrderCritical, ConstantsAB((0, 0, 1, 0), (0, 0, 0, 1)),
                            P_CRIT).satisfied
    rep = check_constraint(T.FirstOrderCritical, ConstantsAB((1, 0, 0, 0), (0, 1, 0, 0)), P_CRIT)
    assert not rep.satisfied and rep.residual == -2


def test_critical_constraint_sign_variants():
    ab = ConstantsAB((1, 0, 0, 0), (0, 1, 2, 0))
    assert check_constraint(T.FirstOrderCritical, ab, P_CRIT, form="printed").satisfied
    assert not check_constraint(T.FirstOrderCritical, ab, P_CRIT).satisfied


@pytest.mark.parametrize("A,B,residual", [
    ((0, 0, 0, 1), (0, 0, 1, 0), -1.0),
    ((0, 0, 1, 0), (0, 0, 0, 1), 1.0),
    ((1, 0, 0, 0), (0, 1, 0, 0), -1.0),
    ((0, 0, 0, 1), (1, 0, 0, 0), 0.0),
])
def test_free_constraint_examples(A, B, residual):
    rep = check_constraint(T.FirstOrderFree, ConstantsAB(A, B), P_FREE)
    assert rep.residual == residual
    assert rep.satisfied == (residual == 0)


def test_constraint_rejects_second_order():
    with pytest.raises(ValidationError):
        check_constraint(T.SecondOrderFree, ConstantsAB((1, 0, 0, 0), (0, 1, 0, 0)), P_FREE)


def sinh_cosh_system(interval=(-1.0, 1.0)):
    return build_coordinate_system(T.FirstOrderCritical, ConstantsAB((0, 0, 1, 0), (0, 0, 0, 1)),
                                   P_CRIT, interval)


def test_sinh_cosh_at_zero():
    cs = sinh_cosh_system()
    assert float(cs.W(0.0)) == pytest.approx(-0.5)
    x, y = 0.7, -0.3
    assert float(cs.omega1(0.0, x, y)) == pytest.approx(x, abs=1e-15)
    assert float(cs.omega2(0.0, x, y)) == pytest.approx(-2 * y, abs=1e-15)


def test_second_order_free():
    cs = build_coordinate_system(T.SecondOrderFree, None, P_FREE, (0, 2))
    t, x, y = 1.3, np.linspace(-1, 1, 5), np.linspace(-2, 2, 5)
    w1, w2, lnq = cs.fields(t, x, y)
    np.testing.assert_array_equal(w1, x)
    np.testing.assert_array_equal(w2, y)
    np.testing.assert_allclose(lnq, -y * y / 4)


def test_special_k_example():
    p = KramersParams(2, -3)
    cs = build_coordinate_system(T.SecondOrderSpecialK, RFunction("exp-", 1.0), p, (-1, 1))
    x, y = 0.4, 0.9
    assert float(cs.omega1(0.0, x, y)) == pytest.approx(x)
    assert float(cs.omega2(0.0, x, y)) == pytest.approx(y - 3 * x)
    assert float(cs.coeffs(0.0).alpha) == pytest.approx(-0.75)


def test_outside_interval():
    cs = sinh_cosh_system((0, 1))
    with pytest.raises(DomainError):
        cs.fields(1.5, 0, 0)


def test_vanishing_wronskian_rejected():
    # f1 = f2 gives W identically zero
    f = TimeBasis.sinh(0.5)
    with pytest.raises(ValidationError):
        build_coordinate_system(T.FirstOrderCritical, (f, f), P_CRIT, (0, 1), force=True)


def test_wronskian_zero_inside_interval():
    # f1 = 1, f2 = t^2 / 2 has W = t, which vanishes at 0
    f1, f2 = TimeBasis.const(1), TimeBasis([(0.5, 2, 0.0, "none", 0.0)])
    with pytest.raises(DomainError):
        build_coordinate_system(T.FirstOrderFree, (f1, f2), P_FREE, (-1, 1), force=True)
    build_coordinate_system(T.FirstOrderFree, (f1, f2), P_FREE, (0.5, 1), force=True)


def test_constraint_enforced_unless_forced():
    ab = ConstantsAB((1, 0, 0, 0), (0, 1, 0, 0))
    with pytest.raises(ValidationError):
        build_coordinate_system(T.FirstOrderCritical, ab, P_CRIT, (0.1, 0.9))
    build_coordinate_system(T.FirstOrderCritical, ab, P_CRIT, (0.1, 0.9), force=True)


def test_regime_enforced():
    with pytest.raises(ValidationError):
        build_coordinate_system(T.SecondOrderFree, None, KramersParams(1, 1), (0, 1))


def test_special_k_rate_mismatch():
    with pytest.raises(ValidationError):
        build_coordinate_system(T.SecondOrderSpecialK, RFunction("sech", 0.3),
                                KramersParams(2, 0.75), (0, 1))


def test_csch_pole_interval():
    with pytest.raises(DomainError):
        build_coordinate_system(T.SecondOrderSpecialK, RFunction("csch", 0.5),
                                KramersParams(2, 0.75), (-1, 1))


def test_unknown_qform():
    with pytest.raises(ValidationError):
        build_coordinate_system(T.SecondOrderFree, None, P_FREE, (0, 1), qform="bogus")


SYSTEMS = {
    "critical": lambda: sinh_cosh_system((0.1, 0.9)),
    "free-first": lambda: build_coordinate_system(
        T.FirstOrderFree, ConstantsAB((0, 0, 0, 1), (1, 0, 0, 0)), P_FREE, (0.1, 0.9)),
    "second-free": lambda: build_coordinate_system(T.SecondOrderFree, None, P_FREE, (0.1, 0.9)),
    "special-k": lambda: build_coordinate_system(
        T.SecondOrderSpecialK, RFunction("sech", 0.5), KramersParams(2, 0.75), (0.1, 0.9)),
}


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_partials_match_finite_differences(name):
    cs = SYSTEMS[name]()
    L = np.longdouble
    t, x, y = L(0.5), L(0.3), L(-0.4)
    h = L(1e-4)
    parts = cs.partials(t, x, y)
    getters = {"omega1": cs.omega1, "omega2": cs.omega2, "lnQ": cs.lnQ}
    for key, fn in getters.items():
        d_t = (fn(t + h, x, y) - fn(t - h, x, y)) / (2 * h)
        d_x = (fn(t, x + h, y) - fn(t, x - h, y)) / (2 * h)
        d_y = (fn(t, x, y + h) - fn(t, x, y - h)) / (2 * h)
        d_yy = (fn(t, x, y + h) - 2 * fn(t, x, y) + fn(t, x, y - h)) / (h * h)
        for suffix, ref in (("t", d_t), ("x", d_x), ("y", d_y), ("yy", d_yy)):
            got = parts[f"{key}_{suffix}"]
            assert abs(float(got - ref)) <= 1e-6 * (1 + abs(float(ref))), (key, suffix)


def riccati_residual(cs, t):
    """L[exp(lnQ)] / exp(lnQ) on a small (x, y) patch."""
    L = np.longdouble
    nu, k = L(cs.params.nu), L(cs.params.k)
    pts = np.linspace(-1, 1, 5).astype(L)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    p = cs.partials(L(t), X, Y)
    g = (p["lnQ_t"] - nu * (p["lnQ_yy"] + p["lnQ_y"] ** 2) + Y * p["lnQ_x"]
         - (nu * Y + k * X) * p["lnQ_y"] - nu)
    return float(np.max(np.abs(g)))


@pytest.mark.parametrize("name", ["critical", "free-first"])
def test_weight_annihilates_operator(name):
    # first-order schemes at lambda = 0 reduce to u = Q
    cs = SYSTEMS[name]()
    for t in (0.2, 0.5, 0.8):
        assert riccati_residual(cs, t) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_critical_family_weight(c1, c2, c3):
    # constants satisfying 2C12 + nu(C13 - C24) = 0 with A = (0, 0, 0, 1)
    # reduce to B4 free and the others arbitrary except B2 = 0
    ab = ConstantsAB((0, 0, 0, 1), (c1, 0, c2, c3))
    if abs(c1) + abs(c2) < 1e-3:
        return
    rep = check_constraint(T.FirstOrderCritical, ab, P_CRIT)
    if not rep.satisfied:
        return
    try:
        cs = build_coordinate_system(T.FirstOrderCritical, ab, P_CRIT, (0.2, 0.8))
    except DomainError:
        return
    assert riccati_residual(cs, 0.5) <= 1e-9 * (1 + max(abs(c1), abs(c2), abs(c3))) ** 4


def test_roundtrip_serialization():
    for name, make in SYSTEMS.items():
        cs = make()
        back = CoordinateSystem.from_dict(cs.to_dict())
        a = cs.fields(0.4, 0.2, 0.3)
        b = back.fields(0.4, 0.2, 0.3)
        for u, v in zip(a, b):
            assert float(u) == float(v), name
