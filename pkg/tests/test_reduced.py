import math

import numpy as np
import pytest

from kramers_sep.errors import DomainError, EvaluationWarning, NumericalError, ValidationError
from kramers_sep.model import KramersParams, SchemeTag
from kramers_sep.reduced import (SeparatedSolution, SpectralPair, build_solution,
                                 eval_solution, log_phi0_first_order, log_phi0_special,
                                 phi0_first_order, phi1_exponential, phi2_special)
from kramers_sep.separation import build_coordinate_system
from kramers_sep.special import airy
from kramers_sep.timebasis import ConstantsAB, RFunction, TimeBasis

T = SchemeTag
P_CRIT = KramersParams(1, 0.25)


def sinh_cosh(interval=(0.0, 1.0)):
    return build_coordinate_system(T.FirstOrderCritical, ConstantsAB((0, 0, 1, 0), (0, 0, 0, 1)),
                                   P_CRIT, interval)


def test_phi0_trivial_lambda():
    f1, f2 = TimeBasis.sinh(0.5), TimeBasis.cosh(0.5)
    t = np.linspace(0, 1, 7)
    np.testing.assert_array_equal(phi0_first_order(f1, f2, SpectralPair(0, 0), P_CRIT, 0.3, t), 1)


def test_phi0_at_reference_time():
    f1, f2 = TimeBasis.sinh(0.5), TimeBasis.cosh(0.5)
    assert phi0_first_order(f1, f2, SpectralPair(0.7, -1.2), P_CRIT, 0.3, 0.3) == 1.0


def simpson(f, a, b, n):
    x = np.linspace(a, b, n + 1)
    y = f(x)
    h = (b - a) / n
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def test_phi0_against_simpson():
    # f1 = 1, f2 = sinh t: W = cosh t
    f1, f2 = TimeBasis.const(1), TimeBasis.sinh(1.0)
    got = phi0_first_order(f1, f2, SpectralPair(1, 0), KramersParams(1, 0), 0.0, 1.0)
    ref = math.exp(simpson(lambda t: 1 / np.cosh(t) ** 2, 0.0, 1.0, 10 ** 6))
    assert got == pytest.approx(ref, rel=1e-8)
    assert got == pytest.approx(math.exp(math.tanh(1.0)), rel=1e-12)


def test_phi0_tolerance_halving():
    f1, f2 = TimeBasis.const(1), TimeBasis.sinh(1.0)
    lam, p = SpectralPair(1.3, 0.4), KramersParams(1, 0)
    t = np.array([-1.5, 0.2, 2.0])
    v1, e1 = log_phi0_first_order(f1, f2, lam, p, 0.0, t, rtol=1e-10)
    v2, _ = log_phi0_first_order(f1, f2, lam, p, 0.0, t, rtol=5e-11)
    assert np.all(np.abs(v1 - v2) <= np.maximum(e1, 1e-15))


def test_phi0_special_exp():
    a, p, lam = 0.7, KramersParams(2, -3), SpectralPair(0.4, 0)
    R = RFunction("exp-", a)
    got = log_phi0_special(R, lam, p, 0.0, 1.3)
    assert got == pytest.approx(p.nu * lam.lambda1 * (1 - math.exp(-2 * a * 1.3)) / (2 * a),
                                rel=1e-14)


def test_phi0_special_sech_against_quadrature():
    from kramers_sep.quad import integrate

    R = RFunction("sech", 0.5)
    p, lam = KramersParams(2, 0.75), SpectralPair(1, 0)
    got = log_phi0_special(R, lam, p, 0.0, 1.7)
    ref, _ = integrate(lambda s: R(s) ** 2, 0, 1.7, rtol=1e-13)
    assert got == pytest.approx(p.nu * float(ref), rel=1e-10)
    assert got == pytest.approx(p.nu * math.tanh(0.85) / 0.5, rel=1e-14)


def test_phi0_special_zero_lambda():
    R = RFunction("sech", 0.5)
    assert log_phi0_special(R, SpectralPair(0, 3), KramersParams(2, 0.75), 0.1, 2.0) == 0


def test_phi0_special_csch_pole():
    R = RFunction("csch", 0.5)
    with pytest.raises(DomainError):
        log_phi0_special(R, SpectralPair(1, 0), KramersParams(2, 0.75), -0.5, 0.5)


def test_phi1_examples():
    assert phi1_exponential(0.0, 3.0) == 1.0
    assert phi1_exponential(1.0, 0.0) == 1.0
    assert phi1_exponential(2.0, 0.5) == pytest.approx(math.e, rel=1e-15)
    with pytest.raises(NumericalError):
        phi1_exponential(1.0, 1e4)


def test_phi2_weber_order_zero():
    y = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(phi2_special("weber", SpectralPair(0, 0), y),
                               np.exp(-y * y / 4), rtol=1e-14)


def test_phi2_airy_at_zero():
    assert phi2_special("airy", SpectralPair(0, 1), 0.0) == pytest.approx(airy("Ai", 0.0))


@pytest.mark.parametrize("l1,first,second", [
    (4.0, lambda w: np.exp(-2 * w), lambda w: np.exp(2 * w)),
    (-4.0, lambda w: np.cos(2 * w), lambda w: np.sin(2 * w)),
    (0.0, lambda w: np.ones_like(w), lambda w: w),
])
def test_phi2_airy_degenerate(l1, first, second):
    w = np.linspace(-1, 1, 9)
    lam = SpectralPair(l1, 0)
    np.testing.assert_allclose(phi2_special("airy", lam, w), first(w), rtol=1e-14)
    np.testing.assert_allclose(phi2_special("airy", lam, w, "second"), second(w), rtol=1e-14)


def test_phi2_bad_kind():
    with pytest.raises(ValidationError):
        phi2_special("exponential", SpectralPair(0, 0), 0.0)


def maxwellian():
    cs = build_coordinate_system(T.SecondOrderFree, None, KramersParams(1, 0), (0, 1))
    return build_solution(T.SecondOrderFree, cs, SpectralPair(0, 0))


def test_maxwellian():
    sol = maxwellian()
    assert sol.phi2_kind == "weber"
    assert sol(0.3, -1.0, 0.0) == 1.0
    y = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(sol(0.3, 0.5, y), np.exp(-y * y / 2), rtol=1e-14)


def test_first_order_zero_lambda_is_weight():
    cs = sinh_cosh()
    sol = build_solution(T.FirstOrderCritical, cs, SpectralPair(0, 0))
    x, y = np.linspace(-1, 1, 5), np.linspace(1, -1, 5)
    for t in (0.2, 0.7):
        np.testing.assert_allclose(sol(t, x, y), np.exp(cs.lnQ(t, x, y)), rtol=1e-15)


def test_reference_time_gives_weight():
    cs = sinh_cosh()
    sol = build_solution(T.FirstOrderCritical, cs, SpectralPair(0, 0), t_ref=0.4)
    assert sol(0.4, 0.3, 0.2) == pytest.approx(math.exp(float(cs.lnQ(0.4, 0.3, 0.2))))


def closed_form_sinh_cosh(lam, t_ref, t, x, y):
    """Hand-derived u for f1 = sinh(t/2), f2 = cosh(t/2), nu = 1, k = 1/4."""
    l1, l2 = lam
    s, c = math.sinh(t / 2), math.cosh(t / 2)
    w1 = c * x - 2 * s * y
    w2 = s * x - 2 * c * y
    lnq = -y * y / 4 - x * y / 4 - x * x / 16 - 0.5 * math.log(0.5) + t / 2

    def G(tau):
        return (l1 * l1 * (math.sinh(tau) - tau) / 2 + l1 * l2 * math.cosh(tau)
                + l2 * l2 * (math.sinh(tau) + tau) / 2)

    return math.exp(lnq + 4 * (G(t) - G(t_ref)) + l1 * w1 + l2 * w2)


def test_sinh_cosh_against_closed_form():
    lam = (0.3, -0.2)
    sol = build_solution(T.FirstOrderCritical, sinh_cosh(), SpectralPair(*lam), t_ref=0.25)
    for pt in [(0.5, 0.2, -0.1), (0.9, -0.7, 0.8), (0.1, 1.0, 1.0)]:
        assert sol(*pt) == pytest.approx(closed_form_sinh_cosh(lam, 0.25, *pt), rel=1e-12)


def test_special_k_evaluable():
    cs = build_coordinate_system(T.SecondOrderSpecialK, RFunction("sech", 0.5),
                                 KramersParams(2, 0.75), (-1, 1))
    sol = build_solution(T.SecondOrderSpecialK, cs, SpectralPair(0, 1))
    g = np.linspace(-1, 1, 7)
    u = sol(*np.meshgrid(g, g, g, indexing="ij"))
    assert np.all(np.isfinite(u))
    assert sol.phi2_kind == "airy"


def test_default_t_ref_is_midpoint():
    sol = build_solution(T.FirstOrderCritical, sinh_cosh((0.2, 1.0)), SpectralPair(1, 1))
    assert sol.t_ref == pytest.approx(0.6)


def test_build_solution_validation():
    cs = sinh_cosh()
    with pytest.raises(ValidationError):
        build_solution(T.FirstOrderFree, cs, SpectralPair(0, 0))
    with pytest.raises(ValidationError):
        build_solution(T.FirstOrderCritical, cs, SpectralPair(0, 0), t_ref=5.0)
    with pytest.raises(ValidationError):
        build_solution(T.FirstOrderCritical, cs, SpectralPair(0, 0), branch="second")
    with pytest.raises(ValidationError):
        SpectralPair(math.nan, 0)


def test_overflow_is_clamped():
    sol = build_solution(T.FirstOrderCritical, sinh_cosh(), SpectralPair(0, 0))
    with pytest.warns(EvaluationWarning):
        u, flags = eval_solution(sol, 0.5, 0.0, np.array([0.0, 60.0]), return_flags=True)
    assert flags.tolist() == [False, True]
    assert u[1] == 0.0


def test_solution_roundtrip():
    sol = build_solution(T.FirstOrderCritical, sinh_cosh(), SpectralPair(0.3, -0.2), t_ref=0.25)
    back = SeparatedSolution.from_dict(sol.to_dict())
    assert back(0.5, 0.2, -0.1) == sol(0.5, 0.2, -0.1)
