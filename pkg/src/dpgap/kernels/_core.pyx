# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-power kernels; contract documented in numpy_backend.py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, pow, sqrt, M_E

cnp.import_array()

name = "cython"

cdef double _LOG_SWITCH = 1.0e8


cdef inline double _fast_pow(double x, double e) nogil:
    # small integer and half-integer exponents dominate the workloads;
    # dodge the generic libm pow for them
    if e == 2.0:
        return x * x
    if e == 1.0:
        return x
    if e == 0.0:
        return 1.0
    if e == 3.0:
        return x * x * x
    if e == -1.0:
        return 1.0 / x
    if e == -2.0:
        return 1.0 / (x * x)
    if e == 0.5:
        return sqrt(x)
    if e == 1.5:
        return x * sqrt(x)
    return pow(x, e)


cdef inline double _log_L(double ln_t) nogil:
    # log(e + t) expressed through ln(t), stable for huge t
    if ln_t > 40.0:
        return ln_t + log1p(exp(1.0 - ln_t))
    return log(M_E + exp(ln_t))


def logpower_eval(t, double p, double gamma, double scale,
                  double t0, double a2, double a1):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = \
        np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(tt)
    cdef Py_ssize_t i, n = tt.shape[0]
    cdef double x, lnL
    for i in range(n):
        x = tt[i]
        if x < t0:
            out[i] = a2 * x * x + a1 * x
        elif x > _LOG_SWITCH:
            lnL = log(x)
            out[i] = exp(log(scale) + p * lnL + gamma * log(_log_L(lnL)))
        elif x == 0.0:
            out[i] = 0.0
        else:
            out[i] = scale * _fast_pow(x, p) * _fast_pow(log(M_E + x), gamma)
    return out.reshape(np.shape(t))


def logpower_deriv(t, double p, double gamma, double scale,
                   double t0, double a2, double a1):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = \
        np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(tt)
    cdef Py_ssize_t i, n = tt.shape[0]
    cdef double x, L
    for i in range(n):
        x = tt[i]
        if x < t0:
            out[i] = 2.0 * a2 * x + a1
        elif x == 0.0:
            out[i] = 0.0
        else:
            L = log(M_E + x)
            out[i] = scale * _fast_pow(x, p - 1.0) * _fast_pow(L, gamma - 1.0) \
                * (p * L + gamma * x / (M_E + x))
    return out.reshape(np.shape(t))


def logpower_log_eval(ln_t, double p, double gamma, double scale):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = \
        np.ascontiguousarray(np.atleast_1d(np.asarray(ln_t, dtype=np.float64)).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(u)
    cdef Py_ssize_t i, n = u.shape[0]
    for i in range(n):
        out[i] = log(scale) + p * u[i] + gamma * log(_log_L(u[i]))
    return out.reshape(np.shape(ln_t))
