"""Pure NumPy implementation of the hot log-power kernels.

Same contract as the compiled backend in ``_core.pyx``; selected at import
time when the extension is unavailable (see ``dpgap.kernels``).

Conventions: the raw integrand is ``scale * t^p * log^gamma(e + t)``; below
the convexification knot ``t0`` the quadratic substitute ``a2*t^2 + a1*t``
is used (``a2``/``a1`` already contain ``scale``).  ``t0 = 0`` disables the
substitute branch.
"""

import numpy as np

name = "numpy"

_LOG_SWITCH = 1.0e8


def logpower_eval(t, p, gamma, scale, t0, a2, a1):
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    small = t < t0
    big = t > _LOG_SWITCH
    mid = ~(small | big)

    tm = t[mid]
    out[mid] = scale * tm**p * np.log(np.e + tm) ** gamma

    if np.any(small):
        ts = t[small]
        out[small] = a2 * ts * ts + a1 * ts
    if np.any(big):
        with np.errstate(over="ignore"):
            out[big] = np.exp(logpower_log_eval(np.log(t[big]), p, gamma, scale))
    return out


def logpower_deriv(t, p, gamma, scale, t0, a2, a1):
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    small = t < t0
    reg = ~small

    tr = t[reg]
    L = np.log(np.e + tr)
    with np.errstate(over="ignore", invalid="ignore"):
        base = scale * tr ** (p - 1.0) * L ** (gamma - 1.0)
        out[reg] = base * (p * L + gamma * tr / (np.e + tr))
    # t = 0 in the raw branch: derivative limit is 0 for p > 1
    out[reg & (t == 0.0)] = 0.0

    if np.any(small):
        out[small] = 2.0 * a2 * t[small] + a1
    return out


def logpower_log_eval(ln_t, p, gamma, scale):
    """log of the raw integrand, overflow-safe for huge arguments."""
    ln_t = np.asarray(ln_t, dtype=np.float64)
    big = ln_t > 40.0
    L = np.empty_like(ln_t)
    L[big] = ln_t[big] + np.log1p(np.exp(1.0 - ln_t[big]))
    L[~big] = np.log(np.e + np.exp(ln_t[~big]))
    return np.log(scale) + p * ln_t + gamma * np.log(L)
