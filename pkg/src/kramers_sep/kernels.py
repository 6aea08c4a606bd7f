"""Backend selection for the stencil kernels.

The compiled extension is used when it was built; otherwise, or when
``KRAMERS_SEP_PURE_PYTHON`` is set to a non-empty value other than "0",
the numpy implementation is used.  ``KRAMERS_SEP_THREADS`` caps the
OpenMP thread count of the compiled backend (0 = runtime default).
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("KRAMERS_SEP_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def num_threads() -> int:
    try:
        n = int(os.environ.get("KRAMERS_SEP_THREADS", "0"))
    except ValueError:
        return 0
    return max(n, 0)


def get_backend(name=None):
    """Kernel module by name ("cython" or "python"); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def rhs_interior(u, x, y, dx, dy, nu, k, out, backend=None):
    return get_backend(backend).rhs_interior(u, x, y, dx, dy, nu, k, out, num_threads())


def axpy_interior(dst, u, a, kv, backend=None):
    return get_backend(backend).axpy_interior(dst, u, a, kv, num_threads())
