"""Hot-kernel backend selection.

The log-power integrand evaluations dominate FEM assembly time.  They exist
twice: a compiled Cython extension (``_core``) and a NumPy fallback with the
identical contract.  The compiled one is preferred when importable; the
benchmark in ``benchmarks/bench_kernels.py`` compares the two.
"""

from . import numpy_backend

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

_active = _compiled if _compiled is not None else numpy_backend


def available_backends():
    out = {"numpy": numpy_backend}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def active_backend_name():
    return _active.name


def use_backend(name):
    """Switch backend globally (used by tests and the benchmark)."""
    global _active
    _active = available_backends()[name]


def logpower_eval(t, p, gamma, scale, t0, a2, a1):
    return _active.logpower_eval(t, p, gamma, scale, t0, a2, a1)


def logpower_deriv(t, p, gamma, scale, t0, a2, a1):
    return _active.logpower_deriv(t, p, gamma, scale, t0, a2, a1)


def logpower_log_eval(ln_t, p, gamma, scale):
    return _active.logpower_log_eval(ln_t, p, gamma, scale)
