"""Coordinate systems (omega1, omega2, ln Q) providing separability.

Every system handled here is linear in (x, y) at fixed t:

    omega_i = p_i(t) y + q_i(t) x
    ln Q    = alpha(t) y^2 + beta(t) x y + gamma(t) x^2 + c(t)

so a :class:`CoordinateSystem` only has to produce these eight time
coefficients and their time derivatives; all partials follow from them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ValidationError
from .model import KramersParams, SchemeTag, classify, regime_constants
from .timebasis import (ConstantsAB, RFunction, TimeBasis, build_f_pair, deriv,
                        eval_basis)

DEFAULT_CONSTRAINT_TOL = 1e-9
QFORMS = ("standard", "middle-x", "printed-x2-sign")


# ---------------------------------------------------------------------------
# constants constraints


@dataclass(frozen=True)
class PairCoefficients:
    C: np.ndarray

    def __getitem__(self, ij):
        i, j = ij
        return float(self.C[i - 1, j - 1])


def pair_coefficients(ab: ConstantsAB) -> PairCoefficients:
    """C[i][j] = B_i A_j - A_i B_j (1-based in :meth:`PairCoefficients.__getitem__`)."""
    A = np.asarray(ab.A, dtype=float)
    B = np.asarray(ab.B, dtype=float)
    return PairCoefficients(np.outer(B, A) - np.outer(A, B))


@dataclass(frozen=True)
class ConstraintReport:
    satisfied: bool
    residual: float
    condition_text: str


def check_constraint(tag: SchemeTag, ab: ConstantsAB, params: KramersParams,
                     tol: float = DEFAULT_CONSTRAINT_TOL,
                     form: str = "derived") -> ConstraintReport:
    """Evaluate the linear condition on C_ij attached to a first-order scheme.

    ``form="printed"`` evaluates the k = nu^2/4 condition with the sign as
    typeset, 2C12 - nu(C13 - C24); the default uses 2C12 + nu(C13 - C24),
    the form that makes the Q-exponent Riccati system consistent.  The two
    forms agree for every other scheme.
    """
    tag = SchemeTag(tag)
    if not tag.is_first_order:
        raise ValidationError(f"{tag.value} has no constants constraint")
    if form not in ("derived", "printed"):
        raise ValidationError(f"unknown constraint form {form!r}")
    C = pair_coefficients(ab)
    nu = params.nu
    if tag is SchemeTag.FirstOrderCritical:
        if form == "printed":
            res = 2 * C[1, 2] - nu * (C[1, 3] - C[2, 4])
            text = "2*C12 - nu*(C13 - C24) = 0"
        else:
            res = 2 * C[1, 2] + nu * (C[1, 3] - C[2, 4])
            text = "2*C12 + nu*(C13 - C24) = 0"
    elif tag is SchemeTag.FirstOrderOscillatory:
        a, b = regime_constants(params, tag)
        res = (C[1, 2] + C[3, 4]) * b + (C[1, 3] - C[2, 4]) * a
        text = "(C12 + C34)*b + (C13 - C24)*a = 0"
    elif tag in (SchemeTag.FirstOrderGenericSub, SchemeTag.FirstOrderSpecialK):
        a = nu / 2.0
        b = math.sqrt(nu * nu / 4.0 - params.k)
        res = (C[1, 2] - C[3, 4]) * b + (C[1, 3] - C[2, 4]) * a
        text = "(C12 - C34)*b + (C13 - C24)*a = 0"
    else:
        res = nu * C[1, 2] - C[3, 4]
        text = "nu*C12 - C34 = 0"
    scale = (1.0 + float(np.max(np.abs(C.C)))) * max(nu, 1.0)
    return ConstraintReport(abs(res) <= tol * scale, float(res), text)


# ---------------------------------------------------------------------------
# coordinate systems


class TimeCoeffs(NamedTuple):
    p1: np.ndarray
    q1: np.ndarray
    p2: np.ndarray
    q2: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    c: np.ndarray
    p1_t: np.ndarray
    q1_t: np.ndarray
    p2_t: np.ndarray
    q2_t: np.ndarray
    alpha_t: np.ndarray
    beta_t: np.ndarray
    gamma_t: np.ndarray
    c_t: np.ndarray


@dataclass(frozen=True, eq=False)
class CoordinateSystem:
    scheme: SchemeTag
    params: KramersParams
    t_interval: tuple
    f1: TimeBasis | None = None
    f2: TimeBasis | None = None
    R: RFunction | None = None
    constants: ConstantsAB | None = None
    qform: str = "standard"
    _derivs: tuple = field(default=(), repr=False)

    # -- time coefficients -------------------------------------------------
    def _check_t(self, t):
        lo, hi = self.t_interval
        if np.any(t < lo) or np.any(t > hi):
            raise DomainError(f"t outside the admissible interval [{lo}, {hi}]")

    def coeffs(self, t) -> TimeCoeffs:
        """Time coefficients at (array) t, dtype preserved."""
        t = np.asarray(t)
        if t.dtype.kind != "f":
            t = t.astype(np.float64)
        self._check_t(t)
        flat, inv = np.unique(t.ravel(), return_inverse=True)
        if self.scheme is SchemeTag.SecondOrderFree:
            vals = _free_coeffs(flat)
        elif self.scheme is SchemeTag.SecondOrderSpecialK:
            vals = _special_coeffs(self.R, self.params, flat)
        else:
            vals = _first_order_coeffs(self._derivs, self.params, flat, self.qform)
        return TimeCoeffs(*(np.asarray(v)[inv].reshape(t.shape) for v in vals))

    def W(self, t):
        """Wronskian f1 f2' - f1' f2 (first-order schemes only)."""
        if self.f1 is None:
            raise ValidationError("W is defined only for first-order schemes")
        (f1, d1), (f2, d2) = self._derivs[0][:2], self._derivs[1][:2]
        return eval_basis(f1, t) * eval_basis(d2, t) - eval_basis(d1, t) * eval_basis(f2, t)

    # -- evaluators ------------------------------------------------------------
    @staticmethod
    def _bc(t, x, y):
        t, x, y = np.broadcast_arrays(*(np.asarray(v) for v in (t, x, y)))
        dt = np.result_type(t, x, y, np.float64)
        return t.astype(dt), x.astype(dt), y.astype(dt)

    def fields(self, t, x, y):
        """(omega1, omega2, lnQ) from a single coefficient evaluation."""
        t, x, y = self._bc(t, x, y)
        c = self.coeffs(t)
        mid = x if self.qform == "middle-x" else x * y
        return (c.p1 * y + c.q1 * x, c.p2 * y + c.q2 * x,
                c.alpha * y * y + c.beta * mid + c.gamma * x * x + c.c)

    def omega1(self, t, x, y):
        t, x, y = self._bc(t, x, y)
        c = self.coeffs(t)
        return c.p1 * y + c.q1 * x

    def omega2(self, t, x, y):
        t, x, y = self._bc(t, x, y)
        c = self.coeffs(t)
        return c.p2 * y + c.q2 * x

    def lnQ(self, t, x, y):
        t, x, y = self._bc(t, x, y)
        c = self.coeffs(t)
        mid = x if self.qform == "middle-x" else x * y
        return c.alpha * y * y + c.beta * mid + c.gamma * x * x + c.c

    def partials(self, t, x, y) -> dict:
        """First partials (t, x, y) and second partials (xx, xy, yy) of
        omega1, omega2 and lnQ, keyed like ``"lnQ_yy"``."""
        t, x, y = self._bc(t, x, y)
        c = self.coeffs(t)
        zero = np.zeros_like(t)
        out = {}
        for i, (p, q, pt, qt) in enumerate(((c.p1, c.q1, c.p1_t, c.q1_t),
                                            (c.p2, c.q2, c.p2_t, c.q2_t)), 1):
            name = f"omega{i}"
            out[f"{name}_t"] = pt * y + qt * x
            out[f"{name}_x"] = q + zero
            out[f"{name}_y"] = p + zero
            out[f"{name}_xx"] = zero
            out[f"{name}_xy"] = zero
            out[f"{name}_yy"] = zero
        if self.qform == "middle-x":
            out["lnQ_t"] = c.alpha_t * y * y + c.beta_t * x + c.gamma_t * x * x + c.c_t
            out["lnQ_x"] = c.beta + 2 * c.gamma * x
            out["lnQ_y"] = 2 * c.alpha * y
            out["lnQ_xy"] = zero
        else:
            out["lnQ_t"] = c.alpha_t * y * y + c.beta_t * x * y + c.gamma_t * x * x + c.c_t
            out["lnQ_x"] = c.beta * y + 2 * c.gamma * x
            out["lnQ_y"] = 2 * c.alpha * y + c.beta * x
            out["lnQ_xy"] = c.beta + zero
        out["lnQ_xx"] = 2 * c.gamma + zero
        out["lnQ_yy"] = 2 * c.alpha + zero
        return out

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        if self.R is not None:
            sources = {"R": self.R.to_dict()}
        elif self.f1 is not None:
            sources = {"f1": self.f1.to_json(), "f2": self.f2.to_json()}
        else:
            sources = {}
        d = {"scheme": self.scheme.value, "nu": self.params.nu, "k": self.params.k,
             "sources": sources, "t_interval": list(self.t_interval)}
        if self.constants is not None:
            d["constants"] = self.constants.to_dict()
        if self.qform != "standard":
            d["qform"] = self.qform
        return d

    @classmethod
    def from_dict(cls, d: dict, force: bool = True) -> "CoordinateSystem":
        scheme = SchemeTag.parse(d["scheme"])
        params = KramersParams(d["nu"], d["k"])
        src = d.get("sources", {})
        if "R" in src:
            sources = RFunction(src["R"]["choice"], src["R"]["a"])
        elif "f1" in src:
            sources = (TimeBasis.from_json(src["f1"]), TimeBasis.from_json(src["f2"]))
        else:
            sources = None
        ab = d.get("constants")
        return build_coordinate_system(
            scheme, sources, params, tuple(d["t_interval"]),
            qform=d.get("qform", "standard"), force=force,
            constants=ConstantsAB(ab["A"], ab["B"]) if ab else None)


def _free_coeffs(t):
    z = np.zeros_like(t)
    one = z + 1
    return (z, one, one, z, z - 0.25, z, z, z, z, z, z, z, z, z, z, z)


def _special_coeffs(R: RFunction, params: KramersParams, t):
    dt = t.dtype.type
    nu, k = dt(params.nu), dt(params.k)
    r, r1, r2, r3, r4 = R.derivs(t, 4)
    z = np.zeros_like(t)
    p1, q1 = z, r ** 3
    p2, q2 = r, 3 * r1
    p1_t, q1_t = z, 3 * r * r * r1
    p2_t, q2_t = r1, 3 * r2
    alpha = r1 / (nu * r) - dt(0.25)
    alpha_t = (r2 * r - r1 * r1) / (nu * r * r)
    beta = (3 * r2 / r - k) / (2 * nu)
    beta_t = 3 * (r3 * r - r2 * r1) / (2 * nu * r * r)
    gamma = -3 * r3 / (4 * nu * r) + 15 * r1 * r2 / (4 * nu * r * r) - k / 4
    gamma_t = (-3 * (r4 * r - r3 * r1) / (4 * nu * r * r)
               + 15 * (r2 * r2 + r1 * r3) / (4 * nu * r * r)
               - 30 * r1 * r1 * r2 / (4 * nu * r ** 3))
    c = nu * t / 2 + 2 * np.log(np.abs(r))
    c_t = nu / 2 + 2 * r1 / r + z
    return (p1, q1, p2, q2, alpha, beta, gamma, c,
            p1_t, q1_t, p2_t, q2_t, alpha_t, beta_t, gamma_t, c_t)


def _first_order_coeffs(derivs, params: KramersParams, t, qform: str):
    dt = t.dtype.type
    nu, k = dt(params.nu), dt(params.k)
    f1, d1, dd1, ddd1, dddd1 = (eval_basis(g, t) for g in derivs[0])
    f2, d2, dd2, ddd2, dddd2 = (eval_basis(g, t) for g in derivs[1])
    W = f1 * d2 - d1 * f2
    Wd = f1 * dd2 - dd1 * f2
    Wdd = d1 * dd2 + f1 * ddd2 - ddd1 * f2 - dd1 * d2
    N = d1 * dd2 - dd1 * d2
    Nd = d1 * ddd2 - ddd1 * d2
    Ndd = dd1 * ddd2 + d1 * dddd2 - dddd1 * d2 - ddd1 * dd2
    W2 = W * W
    p1, q1 = f1 / W, -d1 / W
    p2, q2 = f2 / W, -d2 / W
    p1_t = (d1 * W - f1 * Wd) / W2
    p2_t = (d2 * W - f2 * Wd) / W2
    q1_t = -(dd1 * W - d1 * Wd) / W2
    q2_t = -(dd2 * W - d2 * Wd) / W2
    alpha = -Wd / (4 * nu * W) - dt(0.25)
    alpha_t = -(Wdd * W - Wd * Wd) / (4 * nu * W2)
    beta = (N / W - k) / (2 * nu)
    beta_t = (Nd * W - N * Wd) / (2 * nu * W2)
    # the x^2 coefficient is -(f2'''f1' - f1'''f2')/(4 nu W) - k/4
    sgn = dt(1) if qform == "printed-x2-sign" else dt(-1)
    gamma = sgn * Nd / (4 * nu * W) - k / 4
    gamma_t = sgn * (Ndd * W - Nd * Wd) / (4 * nu * W2)
    c = -np.log(np.abs(W)) / 2 + nu * t / 2
    c_t = -Wd / (2 * W) + nu / 2
    return (p1, q1, p2, q2, alpha, beta, gamma, c,
            p1_t, q1_t, p2_t, q2_t, alpha_t, beta_t, gamma_t, c_t)


def _scan_nonvanishing(fn, lo: float, hi: float, what: str, n: int = 1024):
    ts = np.linspace(lo, hi, n)
    vals = np.asarray(fn(ts), dtype=float)
    scale = float(np.max(np.abs(vals)))
    if not np.isfinite(scale):
        raise DomainError(f"{what} is not finite on [{lo}, {hi}]")
    if scale == 0.0:
        raise ValidationError(f"{what} vanishes identically (f1, f2 linearly dependent)")
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if idx.size:
        a, b = float(ts[idx[0]]), float(ts[idx[0] + 1])
        fa = float(fn(a))
        if fa == 0.0:
            b = a
        for _ in range(60):
            if b - a <= 1e-14 * max(1.0, abs(a)):
                break
            m = 0.5 * (a + b)
            fm = float(fn(m))
            if fm == 0.0:
                a = b = m
                break
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        raise DomainError(f"{what} vanishes in [{lo}, {hi}]: root bracketed in [{a!r}, {b!r}]")
    if float(np.min(np.abs(vals))) <= 1e-12 * scale:
        i = int(np.argmin(np.abs(vals)))
        raise DomainError(f"{what} (nearly) vanishes at t = {float(ts[i])!r}")


def build_coordinate_system(tag: SchemeTag, sources, params: KramersParams,
                            t_interval, *, force: bool = False, qform: str = "standard",
                            tol: float = DEFAULT_CONSTRAINT_TOL,
                            constants: ConstantsAB | None = None) -> CoordinateSystem:
    """Construct the coordinate system of ``tag``.

    ``sources`` is a :class:`ConstantsAB` or an (f1, f2) pair for first-order
    tags, an :class:`RFunction` for SecondOrderSpecialK, and ignored for
    SecondOrderFree.  ``force`` skips the constraint and regime checks so
    that negative controls can be built; ``qform`` selects alternative Q
    exponents used only as negative controls.
    """
    tag = SchemeTag(tag)
    if qform not in QFORMS:
        raise ValidationError(f"unknown qform {qform!r}")
    lo, hi = (float(v) for v in t_interval)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValidationError("t_interval must be a finite interval with t1 > t0")
    if not force and tag not in classify(params).available:
        raise ValidationError(
            f"scheme {tag.value} is not available for nu={params.nu}, k={params.k}")

    if tag is SchemeTag.SecondOrderFree:
        return CoordinateSystem(tag, params, (lo, hi), qform=qform)

    if tag is SchemeTag.SecondOrderSpecialK:
        if not isinstance(sources, RFunction):
            raise ValidationError("SecondOrderSpecialK needs an RFunction source")
        if not force:
            a, _ = regime_constants(params, tag)
            if abs(a - sources.a) > 1e-12 * a:
                raise ValidationError(f"R rate {sources.a} does not match a = {a} for this k")
        if not sources.admissible(lo, hi):
            raise DomainError(f"R = {sources.choice.value} has a pole in [{lo}, {hi}]")
        _scan_nonvanishing(sources, lo, hi, "R(t)")
        return CoordinateSystem(tag, params, (lo, hi), R=sources, qform=qform)

    if isinstance(sources, ConstantsAB):
        constants = sources
        f1, f2 = build_f_pair(tag, sources, params, check=not force, tol=tol)
    else:
        try:
            f1, f2 = sources
        except (TypeError, ValueError):
            raise ValidationError("first-order schemes need constants or an (f1, f2) pair") from None
        if constants is not None and not force:
            rep = check_constraint(tag, constants, params, tol)
            if not rep.satisfied:
                raise ValidationError(f"constraint violated: {rep.condition_text}")
    derivs = tuple(tuple(deriv(f, n) for n in range(5)) for f in (f1, f2))
    cs = CoordinateSystem(tag, params, (lo, hi), f1=f1, f2=f2, constants=constants,
                          qform=qform, _derivs=derivs)
    _scan_nonvanishing(cs.W, lo, hi, "Wronskian W")
    return cs
