"""The Kramers equation instance and its separation regimes.

The equation is

    u_t = nu u_yy - y u_x + (nu y + k x) u_y + nu u

and the set of available separation schemes depends only on how ``k``
compares with the special values 0, 3 nu^2/16, -3 nu^2/4 and nu^2/4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ValidationError

DEFAULT_TOL_K = 1e-12


@dataclass(frozen=True)
class KramersParams:
    nu: float
    k: float

    def __post_init__(self):
        nu, k = float(self.nu), float(self.k)
        if not (math.isfinite(nu) and math.isfinite(k)):
            raise ValidationError("nu and k must be finite")
        if nu <= 0:
            raise ValidationError("nu must be positive")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "k", k)


class SchemeTag(str, enum.Enum):
    FirstOrderCritical = "FirstOrderCritical"
    FirstOrderOscillatory = "FirstOrderOscillatory"
    FirstOrderGenericSub = "FirstOrderGenericSub"
    FirstOrderFree = "FirstOrderFree"
    SecondOrderFree = "SecondOrderFree"
    FirstOrderSpecialK = "FirstOrderSpecialK"
    SecondOrderSpecialK = "SecondOrderSpecialK"

    @property
    def is_first_order(self) -> bool:
        return self.name.startswith("FirstOrder")

    @classmethod
    def parse(cls, name: str) -> "SchemeTag":
        try:
            return cls(name)
        except ValueError:
            raise ValidationError(f"unknown scheme {name!r}") from None


FIRST_ORDER_TAGS = tuple(t for t in SchemeTag if t.is_first_order)
SECOND_ORDER_TAGS = tuple(t for t in SchemeTag if not t.is_first_order)


@dataclass(frozen=True)
class RegimeReport:
    params: KramersParams
    available: tuple[SchemeTag, ...]
    a: float | None = None
    b: float | None = None
    constants: dict = field(default_factory=dict, compare=False)

    @property
    def first_order(self) -> SchemeTag:
        return next(t for t in self.available if t.is_first_order)

    def to_dict(self) -> dict:
        return {
            "nu": self.params.nu,
            "k": self.params.k,
            "available": [t.value for t in self.available],
            "a": self.a,
            "b": self.b,
            "constants": {
                t.value: {"a": ab[0], "b": ab[1]} for t, ab in self.constants.items()
            },
        }


def _close(k: float, target: float, nu: float, tol_k: float) -> bool:
    return abs(k - target) <= tol_k * nu * nu


def special_k_values(nu: float) -> tuple[float, float]:
    """The two nonzero k admitting second-order separation: 3nu^2/16, -3nu^2/4."""
    return 3.0 * nu * nu / 16.0, -3.0 * nu * nu / 4.0


def classify(params: KramersParams, tol_k: float = DEFAULT_TOL_K) -> RegimeReport:
    """Return every scheme whose k-condition holds for ``params``.

    Equality tests on k are relative to nu^2 with tolerance ``tol_k``.
    Exactly one first-order scheme is always present; second-order
    schemes appear only for k in {0, 3nu^2/16, -3nu^2/4}.
    """
    if not (tol_k > 0 and math.isfinite(tol_k)):
        raise ValidationError("tol_k must be positive")
    nu, k = params.nu, params.k
    k_plus, k_minus = special_k_values(nu)
    if _close(k, 0.0, nu, tol_k):
        tags = (SchemeTag.FirstOrderFree, SchemeTag.SecondOrderFree)
    elif _close(k, k_plus, nu, tol_k) or _close(k, k_minus, nu, tol_k):
        tags = (SchemeTag.FirstOrderSpecialK, SchemeTag.SecondOrderSpecialK)
    elif _close(k, nu * nu / 4.0, nu, tol_k):
        tags = (SchemeTag.FirstOrderCritical,)
    elif k > nu * nu / 4.0:
        tags = (SchemeTag.FirstOrderOscillatory,)
    else:
        tags = (SchemeTag.FirstOrderGenericSub,)
    consts = {t: _constants(params, t, tol_k) for t in tags}
    a, b = consts[tags[0]]
    return RegimeReport(params, tags, a, b, consts)


def _constants(params: KramersParams, tag: SchemeTag, tol_k: float):
    nu, k = params.nu, params.k
    if tag in (SchemeTag.FirstOrderOscillatory, SchemeTag.FirstOrderGenericSub):
        return nu / 2.0, math.sqrt(abs(k - nu * nu / 4.0))
    if tag is SchemeTag.FirstOrderCritical:
        return nu / 2.0, None
    if tag in (SchemeTag.FirstOrderFree, SchemeTag.SecondOrderFree):
        return nu, None
    # decay rate of R(t)
    k_plus, _ = special_k_values(nu)
    return (nu / 4.0 if _close(k, k_plus, nu, tol_k) else nu / 2.0), None


def regime_constants(params: KramersParams, tag: SchemeTag,
                     tol_k: float = DEFAULT_TOL_K) -> tuple[float, float | None]:
    """(a, b) for ``tag``; ``b`` is None where the family does not use it.

    For the two SpecialK tags ``a`` is the rate of R(t): nu/4 at
    k = 3nu^2/16 and nu/2 at k = -3nu^2/4.  For the Free tags ``a`` is the
    exponential rate nu of the k = 0 family.
    """
    tag = SchemeTag(tag)
    report = classify(params, tol_k)
    if tag not in report.available:
        raise ValidationError(
            f"scheme {tag.value} is not available for nu={params.nu}, k={params.k}")
    return report.constants[tag]


def family_rates(params: KramersParams, tag: SchemeTag,
                 tol_k: float = DEFAULT_TOL_K) -> tuple[float, float | None]:
    """Rates (a, b) entering the f1/f2 family of a first-order tag.

    Differs from :func:`regime_constants` only for FirstOrderSpecialK, which
    reuses the k < nu^2/4 family with a = nu/2, b = sqrt(nu^2/4 - k).
    """
    tag = SchemeTag(tag)
    if not tag.is_first_order:
        raise ValidationError(f"{tag.value} has no f1/f2 family")
    regime_constants(params, tag, tol_k)
    if tag is SchemeTag.FirstOrderSpecialK:
        return params.nu / 2.0, math.sqrt(params.nu ** 2 / 4.0 - params.k)
    return regime_constants(params, tag, tol_k)
