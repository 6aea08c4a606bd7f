"""Pure numpy versions of the stencil kernels (fallback backend)."""
import numpy as np


def half_weights(y):
    """exp(+-(y[j+1]^2 - y[j]^2) / 4) at the half nodes j + 1/2."""
    y = np.asarray(y, dtype=float)
    a = 0.25 * (y[1:] * y[1:] - y[:-1] * y[:-1])
    return np.exp(a), np.exp(-a)


def rhs_interior(u, x, y, dx, dy, nu, k, out, num_threads=0):
    """out = nu d/dy(u_y + y u) - y u_x + k x u_y on interior nodes
    (Maxwellian-preserving y-flux, central differences elsewhere)."""
    ep, em = half_weights(y)
    c = u[1:-1, 1:-1]
    yj = y[None, 1:-1]
    xi = x[1:-1, None]
    flux = (u[1:-1, 2:] * ep[None, 1:] - c * (em[None, 1:] + ep[None, :-1])
            + u[1:-1, :-2] * em[None, :-1])
    u_x = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * dx)
    u_y = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * dy)
    out[1:-1, 1:-1] = nu * flux / (dy * dy) - yj * u_x + k * xi * u_y
    return out


def axpy_interior(dst, u, a, kv, num_threads=0):
    """dst = u + a * kv on interior nodes."""
    dst[1:-1, 1:-1] = u[1:-1, 1:-1] + a * kv[1:-1, 1:-1]
    return dst
