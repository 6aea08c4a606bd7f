"""Parabolic cylinder function D_v(z) and Airy functions for real arguments.

Both are evaluated from power series near the origin and asymptotic
expansions further out.  The central series runs in numpy longdouble.
Where cancellation in a series would exceed longdouble precision, or an
asymptotic expansion cannot reach double accuracy, the series is summed
with mpmath at a working precision sized to the cancellation.
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import DomainError

MAX_ARG = 30.0
WEBER_LD_MAX = 4.5
WEBER_SERIES_MAX = 8.0
AIRY_LD_MAX = 5.0
AIRY_SERIES_MAX = 10.0
_MP_DPS = 50
AIRY_KINDS = ("Ai", "Bi", "Ai'", "Bi'")


def _prep(z, name):
    arr = np.asarray(z)
    if arr.dtype.kind != "f":
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(np.abs(arr) > MAX_ARG):
        raise DomainError(f"|{name}| > {MAX_ARG} is outside the supported range")
    return arr


def _apply_unique(arr, fn):
    """Evaluate ``fn`` on the unique entries of ``arr`` and scatter back."""
    flat, inv = np.unique(arr.ravel(), return_inverse=True)
    out = np.empty(flat.shape, dtype=arr.dtype)
    fn(flat, out)
    return out[inv].reshape(arr.shape)


def _ld(x) -> np.longdouble:
    return np.longdouble(mp.nstr(x, 25))


def _to_mp(x):
    """Exact-enough mpmath copy of a float or longdouble scalar."""
    with mp.workdps(40):
        return mp.mpf(np.format_float_scientific(x, unique=True))


def _cast(x, dtype):
    """mpmath or float value to ``dtype`` without a detour through double."""
    if dtype == np.longdouble and isinstance(x, mp.mpf):
        return _ld(x)
    return dtype.type(float(x))


# ---------------------------------------------------------------------------
# parabolic cylinder D_v


@lru_cache(maxsize=256)
def _weber_consts(v: float):
    with mp.workdps(_MP_DPS):
        v = mp.mpf(v)
        c1 = mp.sqrt(mp.pi) * mp.rgamma((1 - v) / 2)
        c2 = -mp.sqrt(2 * mp.pi) * mp.rgamma(-v / 2)
        return c1, c2


def _kummer_ld(a, b, x):
    """M(a, b, x) by its power series for x >= 0, with the sum of |terms|."""
    term = np.ones_like(x)
    total = term.copy()
    mag = term.copy()
    eps = np.finfo(np.longdouble).eps
    for n in range(4000):
        term = term * (a + n) / (b + n) * x / (n + 1)
        total = total + term
        mag = mag + np.abs(term)
        if n > 2 and np.all(np.abs(term) <= eps * mag):
            return total, mag
    raise ArithmeticError("Kummer series did not converge")  # pragma: no cover


_LD_COND_MAX = 1e3  # tolerated cancellation: eps_ld * 1e3 ~ 1e-16


def _weber_series_ld(v, z):
    """Series value and a flag marking entries lost to cancellation."""
    L = np.longdouble
    c1, c2 = (_ld(c) for c in _weber_consts(v))
    vl = L(v)
    zl = z.astype(L)
    x = zl * zl / 2
    m1, a1 = _kummer_ld(-vl / 2, L(0.5), x) if c1 != 0 else (0, 0)
    m2, a2 = _kummer_ld((1 - vl) / 2, L(1.5), x) if c2 != 0 else (0, 0)
    inner = c1 * m1 + c2 * zl * m2
    mag = np.abs(c1) * a1 + np.abs(c2 * zl) * a2
    with np.errstate(divide="ignore", invalid="ignore"):
        bad = ~(mag <= _LD_COND_MAX * np.abs(inner))
    pref = np.power(L(2), vl / 2) * np.exp(-zl * zl / 4)
    return pref * inner, bad


def _weber_series_mp(v: float, z: float) -> float:
    # working precision covers the e^{z^2/2} cancellation plus the order growth
    dps = 30 + int((z * z / 2 + (abs(v) + 1) * math.log(2 + abs(z))) / math.log(10))
    with mp.workdps(dps):
        c1, c2 = _weber_consts_mp(v)
        zm = mp.mpf(z)
        x = zm * zm / 2
        vm = mp.mpf(v)
        tol = mp.mpf(10) ** (-dps)
        tot = mp.mpf(0)
        for c, a, b, fac in ((c1, -vm / 2, mp.mpf(1) / 2, 1), (c2, (1 - vm) / 2, mp.mpf(3) / 2, zm)):
            if c == 0:
                continue
            term = mp.mpf(1)
            s = term
            mag = term
            n = 0
            while True:
                term = term * (a + n) / (b + n) * x / (n + 1)
                s += term
                mag += abs(term)
                n += 1
                if n > 5 and abs(term) <= tol * mag:
                    break
            tot += c * fac * s
        return mp.power(2, vm / 2) * mp.exp(-zm * zm / 4) * tot


def _weber_consts_mp(v: float):
    v = mp.mpf(v)
    return mp.sqrt(mp.pi) * mp.rgamma((1 - v) / 2), -mp.sqrt(2 * mp.pi) * mp.rgamma(-v / 2)


def _asym_sum(coef_fn, inv, nmax=400):
    """Asymptotic series truncated before its smallest term; returns the
    sum and the size of the first omitted term (an error estimate)."""
    total = 1.0
    term = 1.0
    prev = 1.0
    for s in range(1, nmax):
        term = term * coef_fn(s) * inv
        if abs(term) >= prev:
            return total, abs(term)
        if term == 0.0:
            return total, 0.0
        total += term
        prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            return total, abs(term)
    return total, prev


_ASYM_RTOL = 1e-15


def _weber_asym(v: float, z: float):
    """Large-|z| expansion; None when its error estimate is too large."""
    x = abs(z)
    inv = 1.0 / (2 * x * x)
    # (-v)_{2s} / s! with alternating sign, built termwise
    s_dec, e_dec = _asym_sum(lambda s: -(-v + 2 * s - 2) * (-v + 2 * s - 1) / s, inv)
    if e_dec > _ASYM_RTOL * abs(s_dec):
        return None
    dec = x ** v * math.exp(-x * x / 4) * s_dec
    if z > 0:
        return dec
    rg = float(mp.rgamma(-v))
    grow = 0.0
    if rg != 0.0:
        s_grow, e_grow = _asym_sum(lambda s: (v + 2 * s - 1) * (v + 2 * s) / s, inv)
        if e_grow > _ASYM_RTOL * abs(s_grow):
            return None
        grow = math.sqrt(2 * math.pi) * rg * x ** (-v - 1) * math.exp(x * x / 4) * s_grow
    return math.cos(math.pi * v) * dec + grow


def weber_d(order: float, z):
    """Parabolic cylinder function D_order(z) for real order and |z| <= 30.

    Solves D'' + (order + 1/2 - z^2/4) D = 0 with D ~ z^order e^{-z^2/4}
    as z -> +inf.  The result has the float dtype of ``z`` (longdouble
    input is honoured by the central series).
    """
    v = float(order)
    if not math.isfinite(v):
        raise DomainError("order must be finite")
    arr = _prep(z, "z")

    def fill(flat, out):
        a = np.abs(flat)
        m = a <= WEBER_LD_MAX
        rest = ~m
        if m.any():
            val, bad = _weber_series_ld(v, flat[m])
            out[m] = val.astype(out.dtype)
            rest[np.nonzero(m)[0][bad]] = True
        for i in np.nonzero(rest)[0]:
            zi = float(flat[i])
            val = _weber_asym(v, zi) if abs(zi) > WEBER_SERIES_MAX else None
            if val is None:
                val = _weber_series_mp(v, _to_mp(flat[i]))
            out[i] = _cast(val, out.dtype)

    res = _apply_unique(arr, fill)
    return res[()] if np.ndim(z) == 0 else res


# ---------------------------------------------------------------------------
# Airy


@lru_cache(maxsize=None)
def _airy_consts():
    with mp.workdps(_MP_DPS):
        c1 = mp.power(3, mp.mpf(-2) / 3) / mp.gamma(mp.mpf(2) / 3)
        c2 = mp.power(3, mp.mpf(-1) / 3) / mp.gamma(mp.mpf(1) / 3)
        return c1, c2, mp.sqrt(3)


def _airy_fg_ld(s):
    """Maclaurin solutions f (f(0)=1, f'(0)=0), g (g(0)=0, g'(0)=1) and
    their derivatives, longdouble."""
    L = np.longdouble
    s = s.astype(L)
    eps = np.finfo(L).eps
    # f = sum a_n s^n with a_{n+3} = a_n / ((n+2)(n+3))
    f = np.ones_like(s)
    fp = np.zeros_like(s)
    g = s.copy()
    gp = np.ones_like(s)
    tf = np.ones_like(s)
    tg = s.copy()
    s2 = s * s
    s3 = s2 * s
    for n in range(0, 600, 3):
        # derivative of the new term, written without dividing by s
        fp = fp + tf * s2 / L(n + 2)
        gp = gp + tg * s2 / L(n + 3)
        tf = tf * s3 / L((n + 2) * (n + 3))
        tg = tg * s3 / L((n + 3) * (n + 4))
        f = f + tf
        g = g + tg
        if (np.all(np.abs(tf) <= eps * np.abs(f))
                and np.all(np.abs(tg) <= eps * np.maximum(np.abs(g), eps))):
            break
    return f, fp, g, gp


def _airy_series_mp(s: float):
    with mp.workdps(_MP_DPS):
        sm = mp.mpf(s)
        s3 = sm ** 3
        f, fp, g, gp = mp.mpf(1), mp.mpf(0), sm, mp.mpf(1)
        tf, tg = mp.mpf(1), sm
        n = 0
        tol = mp.mpf(10) ** (-_MP_DPS)
        mag_f, mag_g = abs(f), abs(g)
        while True:
            fp += tf * sm * sm / (n + 2)
            gp += tg * sm * sm / (n + 3)
            tf = tf * s3 / ((n + 2) * (n + 3))
            tg = tg * s3 / ((n + 3) * (n + 4))
            f += tf
            g += tg
            mag_f += abs(tf)
            mag_g += abs(tg)
            n += 3
            if abs(tf) <= tol * mag_f and abs(tg) <= tol * mag_g:
                break
        c1, c2, r3 = _airy_consts()
        return (c1 * f - c2 * g, r3 * (c1 * f + c2 * g), c1 * fp - c2 * gp, r3 * (c1 * fp + c2 * gp))


def _uv(nmax=40):
    u = [1.0]
    for k in range(1, nmax):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, nmax)]
    return u, v


_U, _V = _uv()


def _trunc(coeffs, z, sign):
    """Sum_k sign^k c_k / z^k truncated at its smallest term."""
    total = 0.0
    prev = math.inf
    for k, c in enumerate(coeffs):
        t = (sign ** k) * c / z ** k
        if abs(t) >= prev:
            break
        total += t
        prev = abs(t)
        if abs(t) < 1e-17 * abs(total):
            break
    return total


def _trunc_parity(coeffs, z, parity):
    """Sum_k (-1)^k c_{2k+parity} / z^{2k+parity}."""
    sub = [(-1) ** k * coeffs[2 * k + parity] for k in range((len(coeffs) - parity) // 2)]
    total = 0.0
    prev = math.inf
    for k, c in enumerate(sub):
        t = c / z ** (2 * k + parity)
        if abs(t) >= prev:
            break
        total += t
        prev = abs(t)
    return total


def _airy_asym(s: float):
    sp = math.sqrt(math.pi)
    if s > 0:
        zeta = 2.0 / 3.0 * s ** 1.5
        q = s ** 0.25
        em, ep = math.exp(-zeta), math.exp(zeta)
        return (em / (2 * sp * q) * _trunc(_U, zeta, -1),
                ep / (sp * q) * _trunc(_U, zeta, 1),
                -q * em / (2 * sp) * _trunc(_V, zeta, -1),
                q * ep / sp * _trunc(_V, zeta, 1))
    x = -s
    zeta = 2.0 / 3.0 * x ** 1.5
    q = x ** 0.25
    c, sn = math.cos(zeta - math.pi / 4), math.sin(zeta - math.pi / 4)
    u0, u1 = _trunc_parity(_U, zeta, 0), _trunc_parity(_U, zeta, 1)
    v0, v1 = _trunc_parity(_V, zeta, 0), _trunc_parity(_V, zeta, 1)
    return ((c * u0 + sn * u1) / (sp * q),
            (-sn * u0 + c * u1) / (sp * q),
            q * (sn * v0 - c * v1) / sp,
            q * (c * v0 + sn * v1) / sp)


def airy(kind: str, s):
    """Airy function ``kind`` in {"Ai", "Bi", "Ai'", "Bi'"} at real |s| <= 30."""
    if kind not in AIRY_KINDS:
        raise DomainError(f"unknown Airy kind {kind!r}")
    idx = AIRY_KINDS.index(kind)
    arr = _prep(s, "s")

    def fill(flat, out):
        m = np.abs(flat) <= AIRY_LD_MAX
        if m.any():
            c1, c2, r3 = (_ld(c) for c in _airy_consts())
            f, fp, g, gp = _airy_fg_ld(flat[m])
            vals = (c1 * f - c2 * g, r3 * (c1 * f + c2 * g),
                    c1 * fp - c2 * gp, r3 * (c1 * fp + c2 * gp))
            out[m] = vals[idx].astype(out.dtype)
        for i in np.nonzero(~m)[0]:
            si = float(flat[i])
            vals = (_airy_series_mp(_to_mp(flat[i])) if abs(si) <= AIRY_SERIES_MAX
                    else _airy_asym(si))
            out[i] = _cast(vals[idx], out.dtype)

    res = _apply_unique(arr, fill)
    return res[()] if np.ndim(s) == 0 else res
