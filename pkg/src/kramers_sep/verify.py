"""Mechanical checks of constructed solutions.

The PDE residual treats the solution as a black box evaluated pointwise,
so a bug shared with the construction code cannot certify itself.
Residuals are evaluated in numpy longdouble to keep round-off well below
the stencil truncation error at the step sizes used for refinement.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericalError, ValidationError
from .model import KramersParams, SchemeTag
from .reduced import SeparatedSolution
from .timebasis import RFunction, eval_basis

DEFAULT_H = 1e-2
LD = np.longdouble


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    t0: float
    t1: float
    nt: int = 1

    def __post_init__(self):
        xr = tuple(float(v) for v in self.x_range)
        yr = tuple(float(v) for v in self.y_range)
        if len(xr) != 2 or len(yr) != 2 or not xr[1] > xr[0] or not yr[1] > yr[0]:
            raise ValidationError("x_range and y_range must be non-degenerate intervals")
        if not all(math.isfinite(v) for v in xr + yr + (float(self.t0), float(self.t1))):
            raise ValidationError("grid bounds must be finite")
        if int(self.nx) < 8 or int(self.ny) < 8:
            raise ValidationError("nx and ny must be at least 8")
        if not float(self.t1) > float(self.t0):
            raise ValidationError("t1 must exceed t0")
        if int(self.nt) < 1:
            raise ValidationError("nt must be positive")
        for name, v in (("x_range", xr), ("y_range", yr), ("nx", int(self.nx)),
                        ("ny", int(self.ny)), ("t0", float(self.t0)),
                        ("t1", float(self.t1)), ("nt", int(self.nt))):
            object.__setattr__(self, name, v)

    @property
    def x(self):
        return np.linspace(*self.x_range, self.nx)

    @property
    def y(self):
        return np.linspace(*self.y_range, self.ny)

    @property
    def times(self):
        if self.nt == 1:
            return np.array([self.t0])
        return np.linspace(self.t0, self.t1, self.nt)

    def refined(self, factor: int = 2) -> "GridSpec":
        """Grid with (n - 1) * factor + 1 nodes per axis (nested)."""
        return GridSpec(self.x_range, self.y_range, (self.nx - 1) * factor + 1,
                        (self.ny - 1) * factor + 1, self.t0, self.t1, self.nt)

    def to_dict(self) -> dict:
        return {"x": list(self.x_range), "y": list(self.y_range), "t": [self.t0, self.t1],
                "nx": self.nx, "ny": self.ny, "nt": self.nt}


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    values: np.ndarray
    time: float

    def __post_init__(self):
        if np.shape(self.values) != (self.spec.nx, self.spec.ny):
            raise ValidationError("field shape does not match the grid")


def eval_grid(sol, grid: GridSpec) -> list:
    """GridFields of ``sol`` at each of the grid's nt times."""
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    return [GridField(grid, np.asarray(sol(t, X, Y), dtype=float), float(t))
            for t in grid.times]


def write_fields_csv(path, fields) -> int:
    """Write fields as ``t,x,y,value`` rows with 17 significant digits.

    Returns the number of data rows written.
    """
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y", "value"])
        for f in fields:
            xs, ys = f.spec.x, f.spec.y
            for i, xv in enumerate(xs):
                for j, yv in enumerate(ys):
                    w.writerow([f"{f.time:.17g}", f"{xv:.17g}", f"{yv:.17g}",
                                f"{float(f.values[i, j]):.17g}"])
                    n += 1
    return n


# ---------------------------------------------------------------------------
# PDE residual


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    rel_max: float
    l2: float
    n_points: int
    stencil_h: float

    def to_dict(self) -> dict:
        return {"max_abs": self.max_abs, "rel_max": self.rel_max, "l2": self.l2,
                "n_points": self.n_points, "stencil_h": self.stencil_h}


def _d1(f, h):
    return (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * h)


def _d2(f, h):
    return (-f(-2) + 16 * f(-1) - 30 * f(0) + 16 * f(1) - f(2)) / (12 * h * h)


def _residual_and_u(u, params: KramersParams, t, x, y, h):
    t, x, y = (np.asarray(v, dtype=LD) for v in np.broadcast_arrays(t, x, y))
    h = LD(h)
    nu, k = LD(params.nu), LD(params.k)
    u0 = np.asarray(u(t, x, y), dtype=LD)
    u_t = _d1(lambda s: u(t + s * h, x, y), h)
    u_x = _d1(lambda s: u(t, x + s * h, y), h)
    ys = {s: np.asarray(u(t, x, y + s * h), dtype=LD) for s in (-2, -1, 1, 2)}
    ys[0] = u0
    u_y = _d1(ys.__getitem__, h)
    u_yy = _d2(ys.__getitem__, h)
    return u_t - nu * u_yy + y * u_x - (nu * y + k * x) * u_y - nu * u0, u0


def kramers_residual(u, params: KramersParams, point, h: float = DEFAULT_H):
    """L[u] = u_t - nu u_yy + y u_x - (nu y + k x) u_y - nu u at ``point``.

    ``u`` is any callable u(t, x, y) accepting broadcastable arrays;
    ``point`` = (t, x, y) may hold arrays.  Derivatives use 5-point
    fourth-order central stencils of step ``h``.
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    res, _ = _residual_and_u(u, params, *point, h)
    return res[()] if res.ndim == 0 else res


def residual_scan(sol: SeparatedSolution, grid: GridSpec, h: float = DEFAULT_H) -> ResidualReport:
    """Residual of ``sol`` over every node of ``grid`` at its nt times."""
    if not h > 0:
        raise ValidationError("h must be positive")
    lo, hi = sol.cs.t_interval
    if grid.t0 - 2 * h < lo or grid.t1 + 2 * h > hi:
        raise ValidationError(
            f"grid times [{grid.t0}, {grid.t1}] need a margin of 2h = {2 * h} inside "
            f"the admissible interval [{lo}, {hi}]")
    T, X, Y = np.meshgrid(grid.times, grid.x, grid.y, indexing="ij")
    res, u0 = _residual_and_u(sol, sol.params, T, X, Y, h)
    scale = float(np.max(np.abs(u0)))
    max_abs = float(np.max(np.abs(res)))
    return ResidualReport(
        max_abs=max_abs,
        rel_max=max_abs / scale if scale > 0 else math.inf,
        l2=float(np.sqrt(np.mean(res * res))),
        n_points=int(res.size),
        stencil_h=float(h),
    )


# ---------------------------------------------------------------------------
# reduced ODEs and rank


@dataclass(frozen=True)
class OdeReport:
    residuals: dict
    n_samples: int
    h: float

    def max(self) -> float:
        return max(self.residuals.values())

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max() <= tol

    def to_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "n_samples": self.n_samples, "h": self.h}


def _a0(sol: SeparatedSolution, t):
    """Coefficient A0(t) of phi0' = A0 phi0."""
    p, lam = sol.params, sol.lam
    nu = LD(p.nu)
    if sol.scheme.is_first_order:
        f1, f2 = eval_basis(sol.cs.f1, t), eval_basis(sol.cs.f2, t)
        d1, d2 = eval_basis(sol.cs.f1.deriv(), t), eval_basis(sol.cs.f2.deriv(), t)
        r = (f1 * LD(lam.lambda1) + f2 * LD(lam.lambda2)) / (f1 * d2 - d1 * f2)
        return nu * r * r
    if sol.scheme is SchemeTag.SecondOrderFree:
        return nu * LD(lam.lambda1) + 0 * t
    return nu * LD(lam.lambda1) * sol.cs.R(t) ** 2


def ode_residual_checks(sol: SeparatedSolution, n_samples: int = 50, h: float = 1e-3,
                        omega_range=(-4.0, 4.0)) -> OdeReport:
    """Finite-difference residuals of the three reduced ODEs.

    Each residual is |lhs - rhs| / max(1, |phi|), maximized over
    ``n_samples`` points: t across the admissible interval (margin 2h),
    omega across ``omega_range``.
    """
    lo, hi = sol.cs.t_interval
    ts = np.linspace(lo + 2 * h, hi - 2 * h, n_samples).astype(LD)
    ws = np.linspace(*omega_range, n_samples).astype(LD)
    hh = LD(h)
    lam, nu = sol.lam, LD(sol.params.nu)

    def norm(res, phi):
        return float(np.max(np.abs(res) / np.maximum(1, np.abs(phi))))

    phi0 = sol.phi0(ts)
    r0 = _d1(lambda s: sol.phi0(ts + s * hh), hh) - _a0(sol, ts) * phi0
    out = {"phi0": norm(r0, phi0)}

    c1 = LD(lam.lambda1) if sol.scheme.is_first_order else nu * LD(lam.lambda2)
    phi1 = sol.phi1(ws)
    out["phi1"] = norm(_d1(lambda s: sol.phi1(ws + s * hh), hh) - c1 * phi1, phi1)

    phi2 = sol.phi2(ws)
    l1, l2 = LD(lam.lambda1), LD(lam.lambda2)
    if sol.phi2_kind == "exponential":
        r2 = _d1(lambda s: sol.phi2(ws + s * hh), hh) - l2 * phi2
    else:
        if sol.phi2_kind == "weber":
            coef = ws * ws / 4 + l2 * ws + l1 - LD(0.5)
        else:
            coef = l2 * ws + l1
        r2 = _d2(lambda s: sol.phi2(ws + s * hh), hh) - coef * phi2
    out["phi2"] = norm(r2, phi2)
    return OdeReport(out, int(n_samples), float(h))


def rank_matrix(sol: SeparatedSolution, point, phis=None) -> np.ndarray:
    """The 3x2 matrix dU_i/dlambda_j of the reduced system at ``point``.

    ``phis`` optionally overrides the (phi0, phi1, phi2) values.
    """
    t, x, y = (float(v) for v in point)
    w1, w2, _ = sol.cs.fields(t, x, y)
    w2 = float(w2)
    if phis is None:
        phis = (float(sol.phi0(t)), float(sol.phi1(w1)), float(sol.phi2(w2)))
    p0, p1, p2 = (float(v) for v in phis)
    if p0 == 0 or p1 == 0 or p2 == 0:
        raise ValidationError("rank condition needs nonzero phi values at the sample")
    nu, lam = sol.params.nu, sol.lam
    if sol.scheme.is_first_order:
        f1, f2 = float(eval_basis(sol.cs.f1, t)), float(eval_basis(sol.cs.f2, t))
        W = float(sol.cs.W(t))
        s = 2 * nu * (f1 * lam.lambda1 + f2 * lam.lambda2) / (W * W)
        return np.array([[-s * f1 * p0, -s * f2 * p0], [-p1, 0.0], [0.0, -p2]])
    if sol.scheme is SchemeTag.SecondOrderFree:
        row0 = [-nu * p0, 0.0]
    else:
        row0 = [-nu * float(sol.cs.R(t)) ** 2 * p0, 0.0]
    return np.array([row0, [0.0, -nu * p1], [-p2, -w2 * p2]])


def rank_condition(sol: SeparatedSolution, sample_point, phis=None) -> bool:
    """True iff dU/dlambda has rank 2 at ``sample_point``."""
    M = rank_matrix(sol, sample_point, phis)
    return int(np.linalg.matrix_rank(M / np.max(np.abs(M)))) == 2


# ---------------------------------------------------------------------------
# R(t) identities


@dataclass(frozen=True)
class RIdentityReport:
    riccati: float
    ratio_identity: float
    k_identity: float
    n_points: int

    def max(self) -> float:
        return max(self.riccati, self.ratio_identity, self.k_identity)

    def to_dict(self) -> dict:
        return {"riccati": self.riccati, "ratio_identity": self.ratio_identity,
                "k_identity": self.k_identity, "n_points": self.n_points}


def r_identity_checks(R: RFunction, params: KramersParams, n: int = 100,
                      t_range=(-2.0, 2.0)) -> RIdentityReport:
    """Residuals of the identities satisfied by R(t) at the special k.

    ``riccati``: R''/R - 2(R'/R)^2 + a^2.
    ``ratio_identity``: R''/R - 2R'^2/R^2 + nu^2/10 - k/5 (the C1 = 0 case).
    ``k_identity``: nu^4/100 + k^2/25 - nu^2 k/25 - k^2/9 (scalar, C1 = 0).
    Sample points avoid t = 0 (pole of 1/sinh).
    """
    if n % 2:
        n += 1
    ts = np.linspace(*t_range, n).astype(LD)
    r, r1, r2 = R.derivs(ts, 2)
    base = r2 / r - 2 * (r1 / r) ** 2
    nu, k = LD(params.nu), LD(params.k)
    ric = float(np.max(np.abs(base + LD(R.a) ** 2)))
    e_ratio = float(np.max(np.abs(base + nu * nu / 10 - k / 5)))
    e_k = float(abs(nu ** 4 / 100 + k * k / 25 - nu * nu * k / 25 - k * k / 9))
    return RIdentityReport(ric, e_ratio, e_k, int(n))


# ---------------------------------------------------------------------------
# finite-difference cross-check


@dataclass(frozen=True, eq=False)
class FDResult:
    numeric: GridField
    analytic: GridField
    error_l2: float
    error_max: float
    steps: int
    dt: float
    backend: str = field(default="")

    def to_dict(self) -> dict:
        scale = float(np.max(np.abs(self.analytic.values)))
        return {"error_l2": self.error_l2, "error_max": self.error_max,
                "max_abs_u": scale, "steps": self.steps, "dt": self.dt,
                "t_final": self.numeric.time, "grid": self.numeric.spec.to_dict()}


def stable_dt(params: KramersParams, grid: GridSpec) -> float:
    """0.4 * min(dy^2/(2 nu), dx/max|y|, dy/max|nu y + k x|) over the grid."""
    x, y = grid.x, grid.y
    dx, dy = x[1] - x[0], y[1] - y[0]
    cand = [dy * dy / (2 * params.nu)]
    ymax = np.max(np.abs(y))
    if ymax > 0:
        cand.append(dx / ymax)
    drift = np.max(np.abs(params.nu * y[None, :] + params.k * x[:, None]))
    if drift > 0:
        cand.append(dy / drift)
    return 0.4 * min(cand)


def _boundary_mask(nx, ny):
    m = np.zeros((nx, ny), dtype=bool)
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
    return m


def _boundary_values(sol, times, bx, by, chunk=512):
    """Exact solution on the boundary nodes at every stage time."""
    out = np.empty((len(times), bx.size))
    for s in range(0, len(times), chunk):
        tt = times[s:s + chunk, None]
        out[s:s + chunk] = np.asarray(sol(tt, bx[None, :], by[None, :]), dtype=float)
    return out


def fd_simulate(sol: SeparatedSolution, grid: GridSpec, backend=None) -> FDResult:
    """Explicit RK4 / second-order central-difference solution on ``grid``.

    Starts from the exact field at t0 and imposes the exact solution on
    the boundary at every stage time.  Raises NumericalError if the
    numeric field grows beyond 10x the exact one.
    """
    p = sol.params
    x, y = grid.x, grid.y
    dx, dy = x[1] - x[0], y[1] - y[0]
    span = grid.t1 - grid.t0
    steps = max(1, int(math.ceil(span / stable_dt(p, grid))))
    dt = span / steps
    X, Y = np.meshgrid(x, y, indexing="ij")
    bmask = _boundary_mask(grid.nx, grid.ny)
    bx, by = X[bmask], Y[bmask]
    # stage times t0 + m dt/2, m = 0..2*steps
    times = grid.t0 + 0.5 * dt * np.arange(2 * steps + 1)
    times[-1] = grid.t1
    bvals = _boundary_values(sol, times, bx, by)

    u = np.ascontiguousarray(np.asarray(sol(grid.t0, X, Y), dtype=float))
    ref_max = float(np.max(np.abs(u)))
    fin = np.asarray(sol(grid.t1, X, Y), dtype=float)
    bound = 10.0 * max(ref_max, float(np.max(np.abs(fin))))
    stage = np.empty_like(u)
    ks = [np.zeros_like(u) for _ in range(4)]
    impl = kernels.get_backend(backend)
    nth = kernels.num_threads()
    nu, k = float(p.nu), float(p.k)

    def rhs(v, out):
        impl.rhs_interior(v, x, y, dx, dy, nu, k, out, nth)

    for n in range(steps):
        m = 2 * n
        rhs(u, ks[0])
        stage[bmask] = bvals[m + 1]
        impl.axpy_interior(stage, u, 0.5 * dt, ks[0], nth)
        rhs(stage, ks[1])
        impl.axpy_interior(stage, u, 0.5 * dt, ks[1], nth)
        rhs(stage, ks[2])
        stage[bmask] = bvals[m + 2]
        impl.axpy_interior(stage, u, dt, ks[2], nth)
        rhs(stage, ks[3])
        u[1:-1, 1:-1] += dt / 6.0 * (ks[0][1:-1, 1:-1] + 2 * ks[1][1:-1, 1:-1]
                                     + 2 * ks[2][1:-1, 1:-1] + ks[3][1:-1, 1:-1])
        u[bmask] = bvals[m + 2]
        if n % 64 == 0 or n == steps - 1:
            peak = float(np.max(np.abs(u)))
            if not math.isfinite(peak) or peak > bound:
                raise NumericalError(f"finite-difference solution unstable at step {n + 1}")
    err = u - fin
    return FDResult(
        numeric=GridField(grid, u, float(grid.t1)),
        analytic=GridField(grid, fin, float(grid.t1)),
        error_l2=float(np.sqrt(np.mean(err * err))),
        error_max=float(np.max(np.abs(err))),
        steps=steps, dt=dt,
        backend="python" if impl is kernels.get_backend("python") else "cython",
    )


def observed_order(errors, spacings) -> list:
    """log(e_i/e_{i+1}) / log(h_i/h_{i+1}) for consecutive refinements."""
    return [math.log(errors[i] / errors[i + 1]) / math.log(spacings[i] / spacings[i + 1])
            for i in range(len(errors) - 1)]
