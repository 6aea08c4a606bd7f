"""Acceptance matrix shared by the test suite and ``kramers-sep selftest``.

Each ``criterion_N`` returns a :class:`CriterionResult` whose ``details``
hold only deterministic numbers (no timings), so selftest reports can be
compared byte for byte.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationWarning
from .model import KramersParams, SchemeTag, classify, special_k_values
from .reduced import SpectralPair, build_solution
from .separation import build_coordinate_system
from .special import airy, weber_d
from .timebasis import ConstantsAB, RFunction, build_R
from .verify import (GridSpec, fd_simulate, observed_order, ode_residual_checks,
                     r_identity_checks, rank_condition, residual_scan)

T = SchemeTag
LAMBDAS = ((0.0, 0.0), (0.3, -0.2), (1.0, 1.0))
BOX = (-1.0, 1.0)
WINDOW = 0.6


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": bool(self.passed),
                "details": self.details}


@dataclass(frozen=True)
class Control:
    """One entry of the positive-control matrix."""
    label: str
    tag: SchemeTag
    nu: float
    k: float
    source: object  # (A, B) tuple, R choice string, or None
    t0: float

    @property
    def params(self) -> KramersParams:
        return KramersParams(self.nu, self.k)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(BOX, BOX, 21, 21, self.t0, self.t0 + WINDOW, 5)

    def coordinate_system(self):
        p = self.params
        src = self.source
        if self.tag.is_first_order:
            src = ConstantsAB(*src)
        elif self.tag is T.SecondOrderSpecialK:
            src = build_R(src, p)
        return build_coordinate_system(self.tag, src, p, (self.t0 - 0.05, self.t0 + WINDOW + 0.05))

    def solutions(self):
        cs = self.coordinate_system()
        return [build_solution(self.tag, cs, SpectralPair(*lam)) for lam in LAMBDAS]


def _sub_proj(nu, k):
    """A=(0,0,0,1), B=(0,1,-a/b,0): satisfies the k < nu^2/4 condition with W(0) != 0."""
    a, b = nu / 2, math.sqrt(nu * nu / 4 - k)
    return ((0, 0, 0, 1), (0, 1, -a / b, 0))


# Windows keep each Wronskian (or R) away from zero so that the solutions'
# derivatives stay moderate on the [-1, 1]^2 box.
POSITIVE_CONTROLS = (
    Control("critical-c1", T.FirstOrderCritical, 1.0, 0.25, ((0, 0, 0, 1), (1, 0, 2, 0)), 0.2),
    Control("critical-c2", T.FirstOrderCritical, 1.0, 0.25, ((1, 0, 0, 0), (0, 1, -2, 0)), 2.0),
    Control("oscillatory-c1", T.FirstOrderOscillatory, 1.0, 1.0,
            ((0, 0, 0, 1), (0, 1, 0.5 / math.sqrt(0.75), 0)), 0.2),
    Control("oscillatory-c2", T.FirstOrderOscillatory, 1.0, 1.0, ((0, 0, 0, 1), (1, 0, 0, 0)), 1.0),
    Control("generic-c1", T.FirstOrderGenericSub, 1.0, -1.0, ((0, 0, 0, 1), (1, 0, 0, 0)), 1.0),
    Control("generic-c2", T.FirstOrderGenericSub, 1.0, -1.0, ((0, 1, 0, 0), (0, 0, 1, 0)), 1.5),
    Control("free-c1", T.FirstOrderFree, 1.0, 0.0, ((0, 0, 0, 1), (1, 0, 0, 0)), 0.2),
    Control("free-c2", T.FirstOrderFree, 1.0, 0.0, ((0, 1, 0, 0), (0, 0, 0, 1)), 1.0),
    Control("specialk1-plus-c1", T.FirstOrderSpecialK, 2.0, 0.75, ((0, 0, 0, 1), (1, 0, 0, 0)), 1.0),
    Control("specialk1-plus-c2", T.FirstOrderSpecialK, 2.0, 0.75, ((0, 1, 0, 0), (0, 0, 1, 0)), 1.5),
    Control("specialk1-minus-c1", T.FirstOrderSpecialK, 2.0, -3.0, ((0, 0, 0, 1), (1, 0, 0, 0)), 1.0),
    Control("specialk1-minus-c2", T.FirstOrderSpecialK, 2.0, -3.0, _sub_proj(2.0, -3.0), 1.5),
    Control("free2-nu1", T.SecondOrderFree, 1.0, 0.0, None, 0.2),
    Control("free2-nu0.5", T.SecondOrderFree, 0.5, 0.0, None, 0.2),
    Control("specialk2-plus-sech", T.SecondOrderSpecialK, 2.0, 0.75, "sech", 1.0),
    Control("specialk2-plus-exp-", T.SecondOrderSpecialK, 2.0, 0.75, "exp-", 1.0),
    Control("specialk2-plus-csch", T.SecondOrderSpecialK, 2.0, 0.75, "csch", 2.5),
    Control("specialk2-plus-exp+", T.SecondOrderSpecialK, 2.0, 0.75, "exp+", -2.0),
    Control("specialk2-minus-sech", T.SecondOrderSpecialK, 2.0, -3.0, "sech", 1.0),
    Control("specialk2-minus-exp-", T.SecondOrderSpecialK, 2.0, -3.0, "exp-", 1.0),
    Control("specialk2-minus-csch", T.SecondOrderSpecialK, 2.0, -3.0, "csch", 2.5),
)

RESIDUAL_TOL = 1e-6
REFINE_FACTOR = 10.0
NEGATIVE_TOL = 1e-2
MAXWELL_TOL = 1e-10
MAXWELL_H = 2.5e-3


def _timed(fn):
    def run(*args, **kwargs):
        start = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EvaluationWarning)
            res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def criterion_1() -> CriterionResult:
    """Regime classification sweep."""
    rows, ok = [], True
    for nu in (0.5, 1.0, 2.0, 3.7):
        kp, km = special_k_values(nu)
        crit = nu * nu / 4
        specials = (0.0, kp, km)
        for k in (0.0, kp, km, crit, crit + 0.1, crit - 0.1, 1.0, -1.0):
            tags = classify(KramersParams(nu, k)).available
            n_first = sum(t.is_first_order for t in tags)
            has_second = any(not t.is_first_order for t in tags)
            expect_second = any(abs(k - s) <= 1e-12 * nu * nu for s in specials)
            good = n_first == 1 and has_second == expect_second
            ok &= good
            rows.append({"nu": nu, "k": k, "tags": [t.value for t in tags], "ok": good})
    return CriterionResult(1, "regime classification", ok, {"cases": rows})


@_timed
def criterion_2(controls=POSITIVE_CONTROLS) -> CriterionResult:
    """Positive-control residual matrix with h-refinement."""
    rows, ok = [], True
    counts = {}
    for c in controls:
        for sol in c.solutions():
            r1 = residual_scan(sol, c.grid, 1e-2)
            r2 = residual_scan(sol, c.grid, 5e-3)
            ratio = r1.rel_max / r2.rel_max if r2.rel_max > 0 else math.inf
            good = r1.rel_max <= RESIDUAL_TOL and ratio >= REFINE_FACTOR
            ok &= good
            rows.append({"control": c.label, "lambda": sol.lam.as_list(),
                         "rel_max": r1.rel_max, "rel_max_half_h": r2.rel_max,
                         "ratio": ratio, "ok": good})
        counts[c.tag.value] = counts.get(c.tag.value, 0) + 1
    coverage = all(counts.get(t.value, 0) >= 2 for t in SchemeTag)
    return CriterionResult(2, "positive-control residual matrix", ok and coverage,
                           {"cases": rows, "controls_per_tag": counts})


def negative_controls():
    """(label, solution, grid) triples that must not annihilate the operator."""
    grid = GridSpec(BOX, BOX, 21, 21, 0.2, 0.8, 5)
    lam = SpectralPair(0.3, -0.2)
    p2 = KramersParams(1.0, 0.25)
    out = []
    cs = build_coordinate_system(T.FirstOrderCritical, ConstantsAB((1, 0, 0, 0), (0, 1, 0, 0)),
                                 p2, (0.1, 0.9), force=True)
    out.append(("constraint-violated", build_solution(T.FirstOrderCritical, cs, lam), grid))
    # R(t) built for k = 3nu^2/16 but used with k = 1
    wrong = KramersParams(2.0, 1.0)
    cs = build_coordinate_system(T.SecondOrderSpecialK, RFunction("sech", 0.5), wrong,
                                 (0.1, 0.9), force=True)
    out.append(("wrong-k", build_solution(T.SecondOrderSpecialK, cs, lam), grid))
    cs = build_coordinate_system(T.FirstOrderCritical, ConstantsAB((0, 0, 1, 0), (0, 0, 0, 1)),
                                 p2, (0.1, 0.9), qform="middle-x")
    out.append(("middle-term-x", build_solution(T.FirstOrderCritical, cs, lam), grid))
    cs = build_coordinate_system(T.FirstOrderCritical, ConstantsAB((0, 0, 0, 1), (1, 0, 2, 0)),
                                 p2, (0.1, 0.9), qform="printed-x2-sign")
    out.append(("x2-sign-as-printed", build_solution(T.FirstOrderCritical, cs, lam), grid))
    return out


@_timed
def criterion_3() -> CriterionResult:
    """Negative controls must fail loudly."""
    rows, ok = [], True
    for label, sol, grid in negative_controls():
        rel = residual_scan(sol, grid, 1e-2).rel_max
        good = rel >= NEGATIVE_TOL
        ok &= good
        rows.append({"control": label, "rel_max": rel, "ok": good})
    return CriterionResult(3, "negative controls", ok, {"cases": rows})


def maxwellian():
    p = KramersParams(1.0, 0.0)
    cs = build_coordinate_system(T.SecondOrderFree, None, p, (0.0, 1.0))
    return build_solution(T.SecondOrderFree, cs, SpectralPair(0.0, 0.0))


@_timed
def criterion_4() -> CriterionResult:
    """Stationary Maxwellian at the stencil floor."""
    sol = maxwellian()
    grid = GridSpec((-2, 2), (-2, 2), 21, 21, 0.2, 0.8, 5)
    rep = residual_scan(sol, grid, MAXWELL_H)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    shape_err = float(np.max(np.abs(sol(0.5, X, Y) - np.exp(-Y * Y / 2))))
    ok = rep.rel_max <= MAXWELL_TOL and shape_err <= 1e-14
    return CriterionResult(4, "stationary Maxwellian", ok,
                           {"rel_max": rep.rel_max, "h": MAXWELL_H, "shape_error": shape_err})


def _fd2(f, s, h):
    return (-f(s - 2 * h) + 16 * f(s - h) - 30 * f(s) + 16 * f(s + h) - f(s + 2 * h)) / (12 * h * h)


def _hermite_d(n, z):
    """D_n(z) = 2^{-n/2} H_n(z / sqrt 2) e^{-z^2/4} from the H_n recurrence."""
    u = z / math.sqrt(2)
    h0, h1 = np.ones_like(u), 2 * u
    hs = [h0, h1]
    for m in range(1, n):
        hs.append(2 * u * hs[m] - 2 * m * hs[m - 1])
    return 2.0 ** (-n / 2) * hs[n] * np.exp(-z * z / 4)


@_timed
def criterion_5() -> CriterionResult:
    """Special-function identities."""
    z = np.linspace(-6, 6, 241)
    herm = {}
    for n in range(4):
        ref = _hermite_d(n, z)
        herm[str(n)] = float(np.max(np.abs(weber_d(n, z) - ref) / (np.abs(ref) + 1e-6)))
    d0 = float(np.max(np.abs(weber_d(0, z) - np.exp(-z * z / 4)) / np.exp(-z * z / 4)))
    L = np.longdouble
    s = np.linspace(-5, 5, 201).astype(L)
    h = L(1e-3)
    ai = lambda v: airy("Ai", v)
    bi = lambda v: airy("Bi", v)
    ode = max(float(np.max(np.abs(_fd2(f, s, h) - s * f(s)))) for f in (ai, bi))
    pts = np.array([-4.0, -2.0, 0.0, 2.0, 4.0])
    wr = airy("Ai", pts) * airy("Bi'", pts) - airy("Ai'", pts) * airy("Bi", pts)
    wr_err = float(np.max(np.abs(wr - 1 / math.pi)))
    ok = d0 <= 1e-9 and max(herm.values()) <= 1e-9 and ode <= 1e-8 and wr_err <= 1e-8
    return CriterionResult(5, "special functions", ok,
                           {"d0_rel": d0, "hermite_rel": herm, "airy_ode": ode,
                            "airy_wronskian": wr_err})


@_timed
def criterion_6() -> CriterionResult:
    """R(t) identities at both special k, plus the k = 1 control."""
    rows, ok = [], True
    nu = 2.0
    for k in special_k_values(nu):
        p = KramersParams(nu, k)
        for choice in ("sech", "csch", "exp+", "exp-"):
            rep = r_identity_checks(build_R(choice, p), p)
            good = rep.ratio_identity <= 1e-10 and rep.k_identity <= 1e-10 and rep.riccati <= 1e-10
            ok &= good
            rows.append({"k": k, "R": choice, **rep.to_dict(), "ok": good})
    neg = r_identity_checks(RFunction("sech", nu / 4), KramersParams(nu, 1.0))
    neg_ok = neg.ratio_identity >= 1e-2 and neg.k_identity >= 1e-2
    return CriterionResult(6, "R(t) identities", ok and neg_ok,
                           {"cases": rows, "negative_k1": neg.to_dict(), "negative_ok": neg_ok})


MMS_CASES = (
    ("critical-sinh-cosh", T.FirstOrderCritical, 1.0, 0.25, ((0, 0, 1, 0), (0, 0, 0, 1)), (0.3, -0.2)),
    ("oscillatory", T.FirstOrderOscillatory, 1.0, 1.0,
     ((0, 0, 0, 1), (0, 1, 0.5 / math.sqrt(0.75), 0)), (0.3, -0.2)),
    ("free-second-order", T.SecondOrderFree, 1.0, 0.0, None, (0.3, -0.2)),
    ("specialk-second-order", T.SecondOrderSpecialK, 2.0, 0.75, "sech", (0.0, 1.0)),
)
MMS_SIZES = (32, 64, 128)
MMS_T = (0.2, 0.5)


def mms_solution(case):
    _, tag, nu, k, src, lam = case
    p = KramersParams(nu, k)
    if tag.is_first_order:
        src = ConstantsAB(*src)
    elif tag is T.SecondOrderSpecialK:
        src = build_R(src, p)
    t0, t1 = MMS_T
    cs = build_coordinate_system(tag, src, p, (t0 - 0.05, t1 + 0.05))
    return build_solution(tag, cs, SpectralPair(*lam))


@_timed
def criterion_7(cases=MMS_CASES, sizes=MMS_SIZES) -> CriterionResult:
    """Finite-difference cross-validation with spatial order 2."""
    rows, ok = [], True
    for case in cases:
        sol = mms_solution(case)
        errs, hs, rels = [], [], []
        for n in sizes:
            res = fd_simulate(sol, GridSpec(BOX, BOX, n, n, *MMS_T, 1))
            errs.append(res.error_l2)
            hs.append((BOX[1] - BOX[0]) / (n - 1))
            rels.append(res.error_l2 / float(np.max(np.abs(res.analytic.values))))
        orders = observed_order(errs, hs)
        good = all(abs(o - 2.0) <= 0.3 for o in orders) and rels[-1] < 1e-3
        ok &= good
        rows.append({"case": case[0], "error_l2": errs, "orders": orders,
                     "final_rel_l2": rels[-1], "ok": good})
    return CriterionResult(7, "MMS cross-validation", ok, {"cases": rows, "sizes": list(sizes)})


@_timed
def criterion_8(controls=POSITIVE_CONTROLS) -> CriterionResult:
    """Reduced-ODE residuals and rank condition on every positive control."""
    rows, ok = [], True
    for c in controls:
        for sol in c.solutions():
            rep = ode_residual_checks(sol, 50)
            tmid = c.t0 + WINDOW / 2
            rank = rank_condition(sol, (tmid, 0.3, -0.2))
            good = rep.passed(1e-6) and rank
            ok &= good
            rows.append({"control": c.label, "lambda": sol.lam.as_list(),
                         "ode": rep.residuals, "rank": rank, "ok": good})
    return CriterionResult(8, "reduced ODEs and rank", ok, {"cases": rows})


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8)


def run_all(progress=None) -> list:
    """Run criteria 1-8; ``progress`` is called with each result."""
    out = []
    for fn in CRITERIA:
        res = fn()
        if progress is not None:
            progress(res)
        out.append(res)
    return out
