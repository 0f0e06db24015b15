"""Hot numeric kernels with a compiled path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``VFSOLVE_DISABLE_NUMBA`` is unset or ``0``.  ``BACKEND`` names
the active path.  Both implementations stay importable as ``numpy_impl``
and ``numba_impl`` (the latter is ``None`` without numba) so tests and
benchmarks can compare them directly.
"""
import os

import numpy as np

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

_disabled = os.environ.get("VFSOLVE_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

if numba_impl is not None and not _disabled:
    _impl = numba_impl
    BACKEND = "numba"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

KERNEL_NAMES = (
    "proj_l1",
    "proj_nonneg_l1",
    "proj_huber_level",
    "huber_sum",
    "huber_grad",
    "student_t_sum",
    "student_t_grad",
)


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def proj_l1(x, tau):
    return _impl.proj_l1(_f64(x), float(tau))


def proj_nonneg_l1(x, tau):
    return _impl.proj_nonneg_l1(_f64(x), float(tau))


def proj_huber_level(x, kappa, tau):
    return _impl.proj_huber_level(_f64(x), float(kappa), float(tau))


def huber_sum(r, kappa):
    return float(_impl.huber_sum(_f64(r), float(kappa)))


def huber_grad(r, kappa):
    return _impl.huber_grad(_f64(r), float(kappa))


def student_t_sum(r, nu):
    return float(_impl.student_t_sum(_f64(r), float(nu)))


def student_t_grad(r, nu):
    return _impl.student_t_grad(_f64(r), float(nu))


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    x = np.array([1.0, -2.0, 0.5])
    proj_l1(x, 1.0)
    proj_nonneg_l1(x, 1.0)
    proj_huber_level(x, 1.0, 0.5)
    huber_sum(x, 1.0)
    huber_grad(x, 1.0)
    student_t_sum(x, 1.0)
    student_t_grad(x, 1.0)
