"""Separated factors phi0(t), phi1(omega1), phi2(omega2) and the composed
solution u = Q phi0 phi1 phi2."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import quad
from .errors import DomainError, EvaluationWarning, NumericalError, ValidationError
from .model import KramersParams, SchemeTag
from .separation import CoordinateSystem
from .special import airy, weber_d
from .timebasis import RFunction, TimeBasis, deriv, eval_basis

PHI0_RTOL = 1e-10
PHI2_KINDS = ("exponential", "weber", "airy")
BRANCHES = ("first", "second")


@dataclass(frozen=True)
class SpectralPair:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        l1, l2 = float(self.lambda1), float(self.lambda2)
        if not (math.isfinite(l1) and math.isfinite(l2)):
            raise ValidationError("lambda1, lambda2 must be finite")
        object.__setattr__(self, "lambda1", l1)
        object.__setattr__(self, "lambda2", l2)

    def as_list(self) -> list:
        return [self.lambda1, self.lambda2]


def _t_array(t):
    arr = np.asarray(t)
    return arr.astype(np.float64) if arr.dtype.kind != "f" else arr


# ---------------------------------------------------------------------------
# phi0


def log_phi0_first_order(f1: TimeBasis, f2: TimeBasis, lam: SpectralPair,
                         params: KramersParams, t_ref: float, t, rtol: float = PHI0_RTOL):
    """nu * integral_{t_ref}^t ((f1 l1 + f2 l2)/W)^2 and its error estimate."""
    arr = _t_array(t)
    if lam.lambda1 == 0.0 and lam.lambda2 == 0.0:
        z = np.zeros_like(arr)
        return z, z
    d1, d2 = deriv(f1), deriv(f2)
    L = np.longdouble
    l1, l2, nu = L(lam.lambda1), L(lam.lambda2), L(params.nu)

    def g(s):
        a, b = eval_basis(f1, s), eval_basis(f2, s)
        w = a * eval_basis(d2, s) - eval_basis(d1, s) * b
        r = (a * l1 + b * l2) / w
        return r * r

    val, err = quad.cumulative(g, t_ref, arr, rtol=rtol)
    return (nu * val).astype(arr.dtype), (nu * err).astype(arr.dtype)


def phi0_first_order(f1, f2, lam, params, t_ref, t, rtol: float = PHI0_RTOL):
    """exp(nu * integral_{t_ref}^t ((f1 l1 + f2 l2)/W)^2 dtau)."""
    return np.exp(log_phi0_first_order(f1, f2, lam, params, t_ref, t, rtol)[0])


def log_phi0_special(R: RFunction, lam: SpectralPair, params: KramersParams, t_ref, t):
    arr = _t_array(t)
    if R.choice.value == "csch" and np.any(arr * t_ref <= 0):
        raise DomainError("1/sinh(at) has a pole between t_ref and t")
    dt = arr.dtype.type
    F = R.integral_sq(arr) - R.integral_sq(np.asarray(t_ref, dtype=arr.dtype))
    return dt(params.nu) * dt(lam.lambda1) * F


def phi0_special(R, lam, params, t_ref, t):
    """exp(nu l1 integral_{t_ref}^t R^2) from the closed-form antiderivative."""
    return np.exp(log_phi0_special(R, lam, params, t_ref, t))


# ---------------------------------------------------------------------------
# phi1, phi2


def phi1_exponential(lam_component: float, omega1, scale: float = 1.0):
    """exp(scale * lam_component * omega1)."""
    w = np.asarray(omega1)
    expo = scale * lam_component * w
    with np.errstate(over="ignore"):
        out = np.exp(expo)
    if not np.all(np.isfinite(out)):
        raise NumericalError("phi1 overflow")
    return out[()] if np.ndim(omega1) == 0 else out


def airy_argument(lam: SpectralPair, omega2):
    c = np.cbrt(lam.lambda2)
    return c * np.asarray(omega2) + lam.lambda1 / (c * c)


def phi2_special(kind: str, lam: SpectralPair, omega2, branch: str = "first"):
    """Value of the second-order phi2 (kind "weber" or "airy")."""
    w = np.asarray(omega2)
    if w.dtype.kind != "f":
        w = w.astype(np.float64)
    l1, l2 = lam.lambda1, lam.lambda2
    if kind == "weber":
        if branch != "first":
            raise ValidationError("only the D branch is offered for the Weber equation")
        out = weber_d(l2 * l2 - l1, w + w.dtype.type(2 * l2))
    elif kind == "airy":
        if l2 != 0.0:
            out = airy("Ai" if branch == "first" else "Bi", airy_argument(lam, w))
        elif l1 > 0:
            r = w.dtype.type(math.sqrt(l1))
            out = np.exp(-r * w) if branch == "first" else np.exp(r * w)
        elif l1 < 0:
            r = w.dtype.type(math.sqrt(-l1))
            out = np.cos(r * w) if branch == "first" else np.sin(r * w)
        else:
            out = np.ones_like(w) if branch == "first" else w.copy()
    else:
        raise ValidationError(f"phi2 kind {kind!r} has no special-function form")
    return out[()] if np.ndim(omega2) == 0 else out


# ---------------------------------------------------------------------------
# composed solution


@dataclass(frozen=True, eq=False)
class SeparatedSolution:
    scheme: SchemeTag
    cs: CoordinateSystem
    lam: SpectralPair
    t_ref: float
    phi2_kind: str
    branch: str = "first"

    @property
    def params(self) -> KramersParams:
        return self.cs.params

    # exponent pieces ------------------------------------------------------
    def log_phi0(self, t):
        p = self.params
        if self.scheme.is_first_order:
            return log_phi0_first_order(self.cs.f1, self.cs.f2, self.lam, p, self.t_ref, t)[0]
        arr = _t_array(t)
        if self.scheme is SchemeTag.SecondOrderFree:
            return arr.dtype.type(p.nu * self.lam.lambda1) * arr
        return log_phi0_special(self.cs.R, self.lam, p, self.t_ref, arr)

    def phi1_scale(self) -> tuple:
        """(scale, lambda) of the exponential phi1."""
        if self.scheme.is_first_order:
            return 1.0, self.lam.lambda1
        return self.params.nu, self.lam.lambda2

    def phi0(self, t):
        return np.exp(self.log_phi0(t))

    def phi1(self, omega1):
        s, l = self.phi1_scale()
        return phi1_exponential(l, omega1, s)

    def phi2(self, omega2):
        if self.phi2_kind == "exponential":
            return phi1_exponential(self.lam.lambda2, omega2, 1.0)
        return phi2_special(self.phi2_kind, self.lam, omega2, self.branch)

    def __call__(self, t, x, y):
        return eval_solution(self, t, x, y)

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {"scheme": self.scheme.value, "lambda": self.lam.as_list(),
                "t_ref": self.t_ref, "phi2_kind": self.phi2_kind, "branch": self.branch,
                "coordinate_system": self.cs.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SeparatedSolution":
        cs = CoordinateSystem.from_dict(d["coordinate_system"])
        return build_solution(SchemeTag.parse(d["scheme"]), cs, SpectralPair(*d["lambda"]),
                              d["t_ref"], branch=d.get("branch", "first"))


_KINDS = {SchemeTag.SecondOrderFree: "weber", SchemeTag.SecondOrderSpecialK: "airy"}


def build_solution(tag: SchemeTag, cs: CoordinateSystem, lam: SpectralPair,
                   t_ref: float | None = None, branch: str = "first") -> SeparatedSolution:
    """Wire the phi kinds of ``tag`` onto ``cs``.

    ``t_ref`` defaults to the midpoint of the coordinate system's interval.
    SecondOrderFree uses phi0 = exp(nu l1 t) and ignores ``t_ref``.
    """
    tag = SchemeTag(tag)
    if cs.scheme is not tag:
        raise ValidationError(f"coordinate system is {cs.scheme.value}, not {tag.value}")
    if not isinstance(lam, SpectralPair):
        lam = SpectralPair(*lam)
    if branch not in BRANCHES:
        raise ValidationError(f"branch must be one of {BRANCHES}")
    lo, hi = cs.t_interval
    t_ref = 0.5 * (lo + hi) if t_ref is None else float(t_ref)
    if not lo <= t_ref <= hi:
        raise ValidationError(f"t_ref = {t_ref} outside [{lo}, {hi}]")
    kind = _KINDS.get(tag, "exponential")
    if kind == "exponential" and branch != "first":
        raise ValidationError("first-order schemes have a single branch")
    if kind == "weber" and branch != "first":
        raise ValidationError("only the D branch is offered for the Weber equation")
    return SeparatedSolution(tag, cs, lam, t_ref, kind, branch)


def eval_solution(sol: SeparatedSolution, t, x, y, return_flags: bool = False):
    """u = exp(lnQ) phi0 phi1 phi2.

    All exponential factors are summed in log space and exponentiated once.
    Results beyond the dtype's range are clamped (to +-max or 0) with an
    :class:`EvaluationWarning`; ``return_flags`` also returns the boolean
    mask of clamped entries.
    """
    t, x, y = CoordinateSystem._bc(t, x, y)
    w1, w2, lnq = sol.cs.fields(t, x, y)
    s1, l1 = sol.phi1_scale()
    dt = t.dtype.type
    expo = lnq + sol.log_phi0(t) + dt(s1 * l1) * w1
    if sol.phi2_kind == "exponential":
        expo = expo + dt(sol.lam.lambda2) * w2
        factor = np.ones_like(expo)
    else:
        factor = phi2_special(sol.phi2_kind, sol.lam, w2, sol.branch)
    info = np.finfo(expo.dtype)
    hi, lo = np.log(info.max), np.log(info.tiny)
    with np.errstate(over="ignore", under="ignore"):
        mag = np.exp(expo)
        u = mag * factor
    over = (expo > hi) | ~np.isfinite(u)
    under = (expo < lo) & (factor != 0)
    flags = over | under
    if np.any(flags):
        u = np.where(over, np.sign(factor) * info.max, u)
        u = np.where(under, 0.0, u).astype(expo.dtype)
        warnings.warn(f"{int(flags.sum())} solution value(s) clamped on overflow/underflow",
                      EvaluationWarning, stacklevel=2)
    if u.ndim == 0:
        u = u[()]
        flags = flags[()]
    return (u, flags) if return_flags else u
