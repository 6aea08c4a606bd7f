"""Exactly differentiable time functions.

:class:`TimeBasis` holds finite sums of ``c t^p e^{alpha t} osc(beta t)``
with ``osc`` one of 1, sin, cos.  Hyperbolic functions are expanded into
exponentials, so the class is closed under differentiation and
multiplication.  :class:`RFunction` holds the four R(t) forms used by the
second-order special-k systems; they are not exponential sums, so their
derivatives are hand coded.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError, NumericalError, ValidationError
from .model import KramersParams, SchemeTag, family_rates, regime_constants

OSC_KINDS = ("none", "sin", "cos")


@dataclass(frozen=True, order=True)
class Term:
    power: int
    exp_rate: float
    osc_kind: str
    osc_freq: float
    coef: float

    @property
    def key(self):
        return (self.power, self.exp_rate, self.osc_kind, self.osc_freq)

    def to_dict(self) -> dict:
        return {"coef": self.coef, "power": self.power, "exp_rate": self.exp_rate,
                "osc_kind": self.osc_kind, "osc_freq": self.osc_freq}


def _normalize(coef, power, rate, kind, freq):
    """Map one raw term onto canonical form, or None if it vanishes."""
    coef, rate, freq = float(coef), float(rate), float(freq)
    power = int(power)
    if power < 0:
        raise ValidationError("negative powers are not representable")
    if kind not in OSC_KINDS:
        raise ValidationError(f"unknown osc_kind {kind!r}")
    if kind == "none":
        freq = 0.0
    elif freq < 0:
        freq = -freq
        if kind == "sin":
            coef = -coef
    if kind != "none" and freq == 0.0:
        if kind == "sin":
            return None
        kind = "none"
    if rate == 0.0:
        rate = 0.0  # drop negative zero
    if coef == 0.0:
        return None
    return Term(power, rate, kind, freq, coef)


class TimeBasis:
    """Canonical sum of ``coef * t**power * exp(exp_rate*t) * osc(osc_freq*t)``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable = ()):
        acc: dict = {}
        for term in terms:
            if isinstance(term, Term):
                raw = (term.coef, term.power, term.exp_rate, term.osc_kind, term.osc_freq)
            elif isinstance(term, dict):
                raw = (term["coef"], term["power"], term["exp_rate"],
                       term.get("osc_kind", "none"), term.get("osc_freq", 0.0))
            else:
                raw = tuple(term)
            t = _normalize(*raw)
            if t is None:
                continue
            acc[t.key] = acc.get(t.key, 0.0) + t.coef
        self.terms = tuple(Term(*key, coef) for key, coef in sorted(acc.items())
                           if coef != 0.0)

    # construction helpers
    @classmethod
    def const(cls, c: float) -> "TimeBasis":
        return cls([(c, 0, 0.0, "none", 0.0)])

    @classmethod
    def exp(cls, rate: float, c: float = 1.0, power: int = 0) -> "TimeBasis":
        return cls([(c, power, rate, "none", 0.0)])

    @classmethod
    def sinh(cls, rate: float, c: float = 1.0, power: int = 0) -> "TimeBasis":
        return cls([(0.5 * c, power, rate, "none", 0.0),
                    (-0.5 * c, power, -rate, "none", 0.0)])

    @classmethod
    def cosh(cls, rate: float, c: float = 1.0, power: int = 0) -> "TimeBasis":
        return cls([(0.5 * c, power, rate, "none", 0.0),
                    (0.5 * c, power, -rate, "none", 0.0)])

    @classmethod
    def sin(cls, freq: float, c: float = 1.0) -> "TimeBasis":
        return cls([(c, 0, 0.0, "sin", freq)])

    @classmethod
    def cos(cls, freq: float, c: float = 1.0) -> "TimeBasis":
        return cls([(c, 0, 0.0, "cos", freq)])

    @classmethod
    def t(cls, c: float = 1.0) -> "TimeBasis":
        return cls([(c, 1, 0.0, "none", 0.0)])

    # algebra
    def __add__(self, other: "TimeBasis") -> "TimeBasis":
        return TimeBasis(self.terms + other.terms)

    def __neg__(self) -> "TimeBasis":
        return self.scale(-1.0)

    def __sub__(self, other: "TimeBasis") -> "TimeBasis":
        return self + (-other)

    def scale(self, c: float) -> "TimeBasis":
        return TimeBasis([(c * s.coef, s.power, s.exp_rate, s.osc_kind, s.osc_freq)
                          for s in self.terms])

    def __mul__(self, other):
        if not isinstance(other, TimeBasis):
            return self.scale(float(other))
        out = []
        for p in self.terms:
            for q in other.terms:
                c = p.coef * q.coef
                power = p.power + q.power
                rate = p.exp_rate + q.exp_rate
                out.extend((cc, power, rate, kind, freq)
                           for cc, kind, freq in _osc_product(c, p, q))
        return TimeBasis(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeBasis) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self) -> str:
        return f"TimeBasis({[s.to_dict() for s in self.terms]!r})"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def deriv(self, order: int = 1) -> "TimeBasis":
        return deriv(self, order)

    def __call__(self, t):
        return eval_basis(self, t)

    def to_json(self) -> list:
        return [s.to_dict() for s in self.terms]

    @classmethod
    def from_json(cls, data) -> "TimeBasis":
        return cls(list(data))


def _osc_product(c, p: Term, q: Term):
    a, b = p.osc_freq, q.osc_freq
    kp, kq = p.osc_kind, q.osc_kind
    if kp == "none":
        return [(c, kq, b)]
    if kq == "none":
        return [(c, kp, a)]
    h = 0.5 * c
    if kp == "sin" and kq == "sin":
        return [(h, "cos", a - b), (-h, "cos", a + b)]
    if kp == "cos" and kq == "cos":
        return [(h, "cos", a - b), (h, "cos", a + b)]
    if kp == "cos":  # cos a * sin b
        a, b = b, a
    # sin a * cos b
    return [(h, "sin", a + b), (h, "sin", a - b)]


def _deriv_once(f: TimeBasis) -> TimeBasis:
    out = []
    for s in f.terms:
        if s.power:
            out.append((s.coef * s.power, s.power - 1, s.exp_rate, s.osc_kind, s.osc_freq))
        if s.exp_rate:
            out.append((s.coef * s.exp_rate, s.power, s.exp_rate, s.osc_kind, s.osc_freq))
        if s.osc_kind == "sin":
            out.append((s.coef * s.osc_freq, s.power, s.exp_rate, "cos", s.osc_freq))
        elif s.osc_kind == "cos":
            out.append((-s.coef * s.osc_freq, s.power, s.exp_rate, "sin", s.osc_freq))
    return TimeBasis(out)


def deriv(f: TimeBasis, order: int = 1) -> TimeBasis:
    """Exact ``order``-th derivative."""
    if int(order) != order or order < 0:
        raise ValidationError("derivative order must be a non-negative integer")
    for _ in range(int(order)):
        f = _deriv_once(f)
    return f


def _as_array(t):
    arr = np.asarray(t)
    if arr.dtype.kind != "f":
        arr = arr.astype(np.float64)
    return arr


def eval_basis(f: TimeBasis, t):
    """Evaluate at scalar or array ``t``; the float dtype of ``t`` is kept."""
    arr = _as_array(t)
    dt = arr.dtype.type
    if not np.all(np.isfinite(arr)):
        raise DomainError("t must be finite")
    total = np.zeros_like(arr)
    with np.errstate(over="ignore", invalid="ignore"):
        for s in f.terms:
            v = dt(s.coef) * np.exp(dt(s.exp_rate) * arr)
            if s.power:
                v = v * arr ** s.power
            if s.osc_kind == "sin":
                v = v * np.sin(dt(s.osc_freq) * arr)
            elif s.osc_kind == "cos":
                v = v * np.cos(dt(s.osc_freq) * arr)
            if not np.all(np.isfinite(v)):
                raise NumericalError(f"overflow evaluating term {s.to_dict()}")
            total = total + v
    if np.ndim(t) == 0:
        return total[()]
    return total


def wronskian(f1: TimeBasis, f2: TimeBasis) -> TimeBasis:
    """W = f1 * f2' - f1' * f2."""
    return f1 * deriv(f2) - deriv(f1) * f2


# ---------------------------------------------------------------------------
# constants and family builders


@dataclass(frozen=True)
class ConstantsAB:
    A: tuple
    B: tuple

    def __post_init__(self):
        A = tuple(float(v) for v in self.A)
        B = tuple(float(v) for v in self.B)
        if len(A) != 4 or len(B) != 4:
            raise ValidationError("A and B must have 4 entries each")
        if not all(math.isfinite(v) for v in A + B):
            raise ValidationError("constants must be finite")
        if not any(A) and not any(B):
            raise ValidationError("A and B cannot both vanish")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def to_dict(self) -> dict:
        return {"A": list(self.A), "B": list(self.B)}


def _family(tag: SchemeTag, a: float, b: float | None, c) -> TimeBasis:
    c1, c2, c3, c4 = c
    if tag is SchemeTag.FirstOrderCritical:
        # t(c1 sinh at + c2 cosh at) + c3 sinh at + c4 cosh at
        return (TimeBasis.sinh(a, c1, power=1) + TimeBasis.cosh(a, c2, power=1)
                + TimeBasis.sinh(a, c3) + TimeBasis.cosh(a, c4))
    if tag is SchemeTag.FirstOrderOscillatory:
        inner1 = TimeBasis.sinh(a, c1) + TimeBasis.cosh(a, c2)
        inner2 = TimeBasis.sinh(a, c3) + TimeBasis.cosh(a, c4)
        return TimeBasis.sin(b) * inner1 + TimeBasis.cos(b) * inner2
    if tag in (SchemeTag.FirstOrderGenericSub, SchemeTag.FirstOrderSpecialK):
        inner1 = TimeBasis.sinh(a, c1) + TimeBasis.cosh(a, c2)
        inner2 = TimeBasis.sinh(a, c3) + TimeBasis.cosh(a, c4)
        return TimeBasis.sinh(b) * inner1 + TimeBasis.cosh(b) * inner2
    if tag is SchemeTag.FirstOrderFree:
        return (TimeBasis.sinh(a, c1) + TimeBasis.cosh(a, c2)
                + TimeBasis.t(c3) + TimeBasis.const(c4))
    raise ValidationError(f"{tag.value} has no f1/f2 family")


def build_f_pair(tag: SchemeTag, ab: ConstantsAB, params: KramersParams, *,
                 check: bool = True, tol: float = 1e-9) -> tuple[TimeBasis, TimeBasis]:
    """Expanded (f1, f2) of a first-order scheme.

    With ``check`` the constants must satisfy the scheme's constraint;
    ``check=False`` is for negative controls only.
    """
    tag = SchemeTag(tag)
    a, b = family_rates(params, tag)
    if check:
        from .separation import check_constraint

        rep = check_constraint(tag, ab, params, tol)
        if not rep.satisfied:
            raise ValidationError(
                f"constraint violated: {rep.condition_text} (residual {rep.residual:.6g})")
    return _family(tag, a, b, ab.A), _family(tag, a, b, ab.B)


# ---------------------------------------------------------------------------
# R(t)


class RChoice(str, enum.Enum):
    SechForm = "sech"
    CschForm = "csch"
    ExpForm = "exp+"
    ExpNegForm = "exp-"

    @classmethod
    def parse(cls, value) -> "RChoice":
        if isinstance(value, RChoice):
            return value
        for c in cls:
            if value in (c.value, c.name):
                return c
        raise ValidationError(f"unknown R choice {value!r}")


@dataclass(frozen=True)
class RFunction:
    choice: RChoice
    a: float

    def __post_init__(self):
        object.__setattr__(self, "choice", RChoice.parse(self.choice))
        a = float(self.a)
        if not (a > 0 and math.isfinite(a)):
            raise ValidationError("R rate a must be positive")
        object.__setattr__(self, "a", a)

    def _check(self, arr):
        if self.choice is RChoice.CschForm and np.any(arr == 0):
            raise DomainError("1/sinh(at) has a pole at t = 0")

    def derivs(self, t, order: int = 3):
        """Tuple (R, R', ..., R^(order)) for order <= 4."""
        arr = _as_array(t)
        self._check(arr)
        dt = arr.dtype.type
        a = dt(self.a)
        at = a * arr
        c = self.choice
        if c in (RChoice.ExpForm, RChoice.ExpNegForm):
            sgn = dt(1) if c is RChoice.ExpForm else dt(-1)
            r = np.exp(sgn * at)
            out = [r * (sgn * a) ** n for n in range(order + 1)]
        else:
            if c is RChoice.SechForm:
                r = 1 / np.cosh(at)
                q = np.tanh(at)
            else:
                r = 1 / np.sinh(at)
                q = 1 / np.tanh(at)
            # both forms share the polynomial structure in q = tanh or coth
            polys = [dt(1) + 0 * q, -q, 2 * q * q - 1, q * (5 - 6 * q * q),
                     24 * q ** 4 - 28 * q * q + 5]
            out = [r * a ** n * polys[n] for n in range(order + 1)]
        if np.ndim(t) == 0:
            out = [o[()] for o in out]
        return tuple(out)

    def __call__(self, t):
        return self.derivs(t, 0)[0]

    def integral_sq(self, t):
        """An antiderivative of R(t)^2."""
        arr = _as_array(t)
        self._check(arr)
        dt = arr.dtype.type
        a = dt(self.a)
        c = self.choice
        if c is RChoice.SechForm:
            out = np.tanh(a * arr) / a
        elif c is RChoice.CschForm:
            out = -1 / (np.tanh(a * arr) * a)
        elif c is RChoice.ExpForm:
            out = np.exp(2 * a * arr) / (2 * a)
        else:
            out = -np.exp(-2 * a * arr) / (2 * a)
        return out[()] if np.ndim(t) == 0 else out

    def admissible(self, t0: float, t1: float) -> bool:
        if self.choice is RChoice.CschForm:
            return t0 * t1 > 0
        return True

    def to_dict(self) -> dict:
        return {"choice": self.choice.value, "a": self.a}


def build_R(choice, params: KramersParams, tag: SchemeTag = SchemeTag.SecondOrderSpecialK,
            tol_k: float | None = None) -> RFunction:
    """R(t) with the rate fixed by k: nu/4 at 3nu^2/16, nu/2 at -3nu^2/4."""
    tag = SchemeTag(tag)
    if tag not in (SchemeTag.FirstOrderSpecialK, SchemeTag.SecondOrderSpecialK):
        raise ValidationError("R(t) exists only for the special-k schemes")
    kw = {} if tol_k is None else {"tol_k": tol_k}
    a, _ = regime_constants(params, tag, **kw)
    return RFunction(RChoice.parse(choice), a)
