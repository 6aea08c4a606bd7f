import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kramers_sep import kernels

HAVE_EXT = True
try:
    kernels.get_backend("cython")
except ImportError:  # pragma: no cover - extension not built
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT, reason="compiled backend not built")


def setup(n, m, seed=0):
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.5, 1.0, n)
    y = np.linspace(-2.0, 2.5, m)
    return rng.standard_normal((n, m)), x, y, x[1] - x[0], y[1] - y[0]


def test_rhs_of_maxwellian_vanishes():
    _, x, y, dx, dy = setup(33, 41)
    u = np.ascontiguousarray(np.broadcast_to(np.exp(-y * y / 2), (33, 41)))
    out = np.zeros_like(u)
    kernels.rhs_interior(u, x, y, dx, dy, 1.3, 0.0, out, backend="python")
    assert np.max(np.abs(out)) <= 1e-12


def test_rhs_consistent_with_operator():
    n = 201
    x = np.linspace(-1, 1, n)
    y = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    nu, k = 0.7, 0.4
    u = np.sin(X + 2 * Y) * np.exp(0.3 * Y)
    u_x = np.cos(X + 2 * Y) * np.exp(0.3 * Y)
    u_y = (2 * np.cos(X + 2 * Y) + 0.3 * np.sin(X + 2 * Y)) * np.exp(0.3 * Y)
    u_yy = ((0.09 - 4) * np.sin(X + 2 * Y) + 1.2 * np.cos(X + 2 * Y)) * np.exp(0.3 * Y)
    exact = nu * u_yy - Y * u_x + (nu * Y + k * X) * u_y + nu * u
    out = np.zeros_like(u)
    kernels.rhs_interior(u, x, y, x[1] - x[0], y[1] - y[0], nu, k, out, backend="python")
    assert np.max(np.abs(out - exact)[1:-1, 1:-1]) <= 1e-3


@needs_ext
@settings(max_examples=20, deadline=None)
@given(st.integers(3, 40), st.integers(3, 40), st.floats(0.1, 3), st.floats(-2, 2))
def test_backends_agree(n, m, nu, k):
    u, x, y, dx, dy = setup(n, m, seed=n * m)
    a, b = np.zeros_like(u), np.zeros_like(u)
    kernels.rhs_interior(u, x, y, dx, dy, nu, k, a, backend="python")
    kernels.rhs_interior(u, x, y, dx, dy, nu, k, b, backend="cython")
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(a)))


@needs_ext
def test_axpy_agree():
    u, *_ = setup(17, 13)
    kv = u[::-1].copy()
    a, b = np.zeros_like(u), np.zeros_like(u)
    kernels.axpy_interior(a, u, 0.3, kv, backend="python")
    kernels.axpy_interior(b, u, 0.3, kv, backend="cython")
    np.testing.assert_array_equal(a, b)
    assert not a[0].any() and not a[:, -1].any()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_thread_env(monkeypatch):
    monkeypatch.setenv("KRAMERS_SEP_THREADS", "3")
    assert kernels.num_threads() == 3
    monkeypatch.setenv("KRAMERS_SEP_THREADS", "junk")
    assert kernels.num_threads() == 0


def test_pure_python_switch():
    env = dict(os.environ, KRAMERS_SEP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import kramers_sep.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
