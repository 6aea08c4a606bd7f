import math

import numpy as np
import pytest

from kramers_sep.errors import NumericalError, ValidationError
from kramers_sep.model import KramersParams, SchemeTag
from kramers_sep.reduced import SpectralPair, build_solution
from kramers_sep.separation import build_coordinate_system
from kramers_sep.timebasis import ConstantsAB, RFunction
from kramers_sep.verify import (GridSpec, eval_grid, fd_simulate, kramers_residual,
                                observed_order, ode_residual_checks, r_identity_checks,
                                rank_condition, residual_scan, stable_dt, write_fields_csv)

T = SchemeTag
P_CRIT = KramersParams(1, 0.25)
P_FREE = KramersParams(1, 0)
GRID = GridSpec((-1, 1), (-1, 1), 21, 21, 0.2, 0.8, 5)


def sinh_cosh(lam=(0.3, -0.2), ab=((0, 0, 1, 0), (0, 0, 0, 1)), force=False):
    cs = build_coordinate_system(T.FirstOrderCritical, ConstantsAB(*ab), P_CRIT, (0.1, 0.9),
                                 force=force)
    return build_solution(T.FirstOrderCritical, cs, SpectralPair(*lam))


def maxwellian(interval=(-0.1, 1.0)):
    cs = build_coordinate_system(T.SecondOrderFree, None, P_FREE, interval)
    return build_solution(T.SecondOrderFree, cs, SpectralPair(0, 0))


def test_residual_of_zero():
    assert kramers_residual(lambda t, x, y: 0 * t, P_FREE, (0.3, 0.1, 0.2)) == 0


def test_residual_of_maxwellian():
    u = lambda t, x, y: np.exp(-y * y / 2)
    pts = (np.full(9, 0.4), np.linspace(-1, 1, 9), np.linspace(-2, 2, 9))
    assert np.max(np.abs(kramers_residual(u, P_FREE, pts, h=2.5e-3))) <= 1e-10
    r1 = np.max(np.abs(kramers_residual(u, P_FREE, pts, h=1e-2)))
    r2 = np.max(np.abs(kramers_residual(u, P_FREE, pts, h=5e-3)))
    assert 12 < r1 / r2 < 20  # fourth order


def test_residual_of_t():
    # u = t gives L[u] = 1 - nu t
    p = KramersParams(1.5, 0.3)
    for t in (0.0, 0.4, 1.0):
        r = kramers_residual(lambda t, x, y: t + 0 * x, p, (t, 0.2, -0.7))
        assert abs(float(r) - (1 - p.nu * t)) <= 1e-12


def test_residual_bad_h():
    with pytest.raises(ValidationError):
        kramers_residual(lambda t, x, y: t, P_FREE, (0, 0, 0), h=0)


def test_scan_maxwellian():
    grid = GridSpec((-2, 2), (-2, 2), 17, 17, 0.2, 0.8, 4)
    assert residual_scan(maxwellian(), grid, h=2.5e-3).rel_max <= 1e-10


def test_scan_positive_control_refines():
    sol = sinh_cosh()
    r1 = residual_scan(sol, GRID, 1e-2)
    r2 = residual_scan(sol, GRID, 5e-3)
    assert r1.rel_max <= 1e-6
    assert r1.n_points == 21 * 21 * 5
    assert 14 < r1.rel_max / r2.rel_max < 18


def test_scan_negative_control():
    sol = sinh_cosh(ab=((1, 0, 0, 0), (0, 1, 0, 0)), force=True)
    assert residual_scan(sol, GRID, 1e-2).rel_max >= 1e-2


def test_scan_needs_time_margin():
    with pytest.raises(ValidationError):
        residual_scan(sinh_cosh(), GridSpec((-1, 1), (-1, 1), 9, 9, 0.1, 0.8, 2), 1e-2)


def test_ode_checks_zero_lambda():
    rep = ode_residual_checks(sinh_cosh(lam=(0, 0)))
    assert rep.max() <= 1e-10


def test_ode_checks_weber():
    cs = build_coordinate_system(T.SecondOrderFree, None, P_FREE, (0, 1))
    sol = build_solution(T.SecondOrderFree, cs, SpectralPair(0.5, 0.5))
    rep = ode_residual_checks(sol, n_samples=50, omega_range=(-4, 4))
    assert rep.passed(1e-6)


def test_ode_checks_airy_degenerate():
    cs = build_coordinate_system(T.SecondOrderSpecialK, RFunction("sech", 0.5),
                                 KramersParams(2, 0.75), (0.1, 0.9))
    sol = build_solution(T.SecondOrderSpecialK, cs, SpectralPair(1, 0))
    np.testing.assert_allclose(sol.phi2(np.array([0.0, 1.0])), [1, math.exp(-1)], rtol=1e-15)
    assert ode_residual_checks(sol).residuals["phi2"] <= 1e-10


def test_ode_checks_airy():
    cs = build_coordinate_system(T.SecondOrderSpecialK, RFunction("sech", 0.5),
                                 KramersParams(2, 0.75), (0.1, 0.9))
    sol = build_solution(T.SecondOrderSpecialK, cs, SpectralPair(0.3, -0.2))
    assert ode_residual_checks(sol).passed(1e-6)


def test_rank_first_order():
    assert rank_condition(sinh_cosh(), (0.5, 0.2, 0.3))


def test_rank_second_order_free():
    cs = build_coordinate_system(T.SecondOrderFree, None, P_FREE, (0, 1))
    for lam in ((0, 0), (0.7, -1.3)):
        sol = build_solution(T.SecondOrderFree, cs, SpectralPair(*lam))
        assert rank_condition(sol, (0.5, 0.2, 0.3))


def test_rank_zero_phi():
    with pytest.raises(ValidationError):
        rank_condition(sinh_cosh(), (0.5, 0.2, 0.3), phis=(1.0, 1.0, 0.0))


def test_r_identities():
    rep = r_identity_checks(RFunction("sech", 0.5), KramersParams(2, 0.75))
    assert rep.max() <= 1e-10
    rep = r_identity_checks(RFunction("exp-", 1.0), KramersParams(2, -3))
    assert rep.riccati <= 1e-10


def test_r_identity_wrong_k():
    rep = r_identity_checks(RFunction("sech", 0.5), KramersParams(2, 1))
    assert rep.ratio_identity >= 1e-2


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec((1, -1), (-1, 1), 9, 9, 0, 1)
    with pytest.raises(ValidationError):
        GridSpec((-1, 1), (-1, 1), 4, 9, 0, 1)
    with pytest.raises(ValidationError):
        GridSpec((-1, 1), (-1, 1), 9, 9, 1, 0)


def test_grid_refined_is_nested():
    g = GridSpec((-1, 1), (0, 2), 9, 11, 0, 1).refined()
    assert (g.nx, g.ny) == (17, 21)
    np.testing.assert_allclose(g.x[::2], GridSpec((-1, 1), (0, 2), 9, 11, 0, 1).x)


def test_csv_format(tmp_path):
    grid = GridSpec((-1, 1), (-1, 1), 9, 8, 0.2, 0.8, 3)
    fields = eval_grid(sinh_cosh(), grid)
    path = tmp_path / "u.csv"
    rows = write_fields_csv(path, fields)
    assert rows == 3 * 9 * 8
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,x,y,value" and len(lines) == rows + 1
    t, x, y, v = (float(s) for s in lines[5].split(","))
    assert v == float(sinh_cosh()(t, x, y))


def test_fd_maxwellian_stationary():
    grid = GridSpec((-3, 3), (-3, 3), 64, 64, 0.0, 0.5)
    res = fd_simulate(maxwellian((0.0, 0.5)), grid)
    assert res.error_max <= 1e-6


def test_fd_converges_second_order():
    sol = sinh_cosh()
    errs, hs = [], []
    for n in (17, 33, 65):
        g = GridSpec((-1, 1), (-1, 1), n, n, 0.2, 0.5)
        errs.append(fd_simulate(sol, g).error_l2)
        hs.append(2 / (n - 1))
    assert errs[0] > errs[1] > errs[2]
    assert all(1.7 <= q <= 2.3 for q in observed_order(errs, hs))


def test_fd_backends_agree():
    sol = sinh_cosh()
    g = GridSpec((-1, 1), (-1, 1), 33, 33, 0.2, 0.4)
    a = fd_simulate(sol, g, backend="python")
    b = fd_simulate(sol, g)
    assert a.backend == "python"
    np.testing.assert_allclose(a.numeric.values, b.numeric.values, rtol=1e-12, atol=1e-14)


def test_fd_instability_detected(monkeypatch):
    import kramers_sep.verify as v

    monkeypatch.setattr(v, "stable_dt", lambda p, g: 20 * stable_dt(p, g))
    g = GridSpec((-1, 1), (-1, 1), 65, 65, 0.2, 0.8)
    with pytest.raises(NumericalError):
        fd_simulate(sinh_cosh(), g)


def test_observed_order():
    assert observed_order([4.0, 1.0], [0.2, 0.1]) == [pytest.approx(2.0)]
