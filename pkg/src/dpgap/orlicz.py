"""N-function algebra: log-power integrands, conjugates, Luxemburg norms.

The working family is ``t^p * log^gamma(e + t)`` (no 1/p prefactor; every
downstream verdict is invariant under positive scalar factors, which is
tested).  For ``gamma < 1 - p`` the raw formula is not convex near the
origin and is replaced below a knot ``t0`` by a quadratic substitute
matching value and slope at the knot; only large-t behaviour matters for
anything built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import kernels
from .errors import DomainError, NormOverflowError, UnboundedConjugateError

_T_MAX = 1.0e300
_CONJ_BRACKET = (1.0e-12, 1.0e12)

# smallest acceptable slope ratio Phi'(t0) t0 / Phi(t0) at the knot; below 1
# the quadratic substitute would need a negative leading coefficient
_KNOT_MIN_RATIO = 1.05


def _check_arg(t):
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise DomainError("non-finite evaluation argument")
    if np.any(t < 0.0):
        raise DomainError("negative evaluation argument")
    if np.any(t > _T_MAX):
        raise DomainError("argument above 1e300 rejected")
    return t


def _logpower_second_deriv(t, p, gamma, scale):
    L = np.log(np.e + t)
    A = p / t + gamma / ((np.e + t) * L)
    dA = -p / t**2 - gamma * (L + 1.0) / ((np.e + t) * L) ** 2
    return scale * t**p * L**gamma * (A * A + dA)


def _slope_ratio(t, p, gamma):
    # Phi'(t) t / Phi(t) for the raw formula
    return p + gamma * t / ((np.e + t) * np.log(np.e + t))


def _find_knot(p, gamma, scale):
    """Convexification knot and quadratic substitute coefficients.

    Returns (t0, a2, a1); t0 = 0 when the raw formula is already convex.
    """
    if gamma >= 0.0:
        return 0.0, 0.0, 0.0
    grid = np.logspace(-8.0, 10.0, 2400)
    neg = np.where(_logpower_second_deriv(grid, p, gamma, scale) < 0.0)[0]
    if neg.size == 0:
        return 0.0, 0.0, 0.0
    i = neg[-1]
    hi = grid[i + 1] if i + 1 < len(grid) else 2.0 * grid[i]
    # for p near 1 with very negative gamma the sign change sits beyond the
    # grid; extend the bracket until the second derivative turns positive
    while _logpower_second_deriv(hi, p, gamma, scale) < 0.0:
        hi *= 10.0
        if hi > 1e280:  # pragma: no cover
            raise DomainError("convexification knot search failed")
    t0 = brentq(
        lambda t: _logpower_second_deriv(t, p, gamma, scale),
        grid[i], hi, xtol=1e-14, rtol=1e-13,
    )
    # push the knot right until the substitute coefficients are nonnegative
    if _slope_ratio(t0, p, gamma) < _KNOT_MIN_RATIO:
        hi = t0
        while _slope_ratio(hi, p, gamma) < _KNOT_MIN_RATIO:
            hi *= 2.0
            if hi > 1e250:  # pragma: no cover
                raise DomainError("convexification knot search failed")
        t0 = brentq(
            lambda t: _slope_ratio(t, p, gamma) - _KNOT_MIN_RATIO,
            hi / 2.0, hi, xtol=1e-14, rtol=1e-13,
        )
    val = scale * t0**p * math.log(math.e + t0) ** gamma
    r = _slope_ratio(t0, p, gamma)
    a2 = (r - 1.0) * val / t0**2
    a1 = (2.0 - r) * val / t0
    return t0, a2, a1


@dataclass(frozen=True)
class LogPower:
    """Integrand t^p log^gamma(e+t), convexified near 0 when needed."""

    p: float
    gamma: float = 0.0
    scale: float = 1.0
    conjugate_equivalent: bool = False  # marks growth-class results
    _knot: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.p > 1.0):
            raise DomainError("LogPower requires p > 1")
        if not (self.scale > 0.0):
            raise DomainError("LogPower requires scale > 0")
        object.__setattr__(self, "_knot", _find_knot(self.p, self.gamma, self.scale))

    @property
    def knot(self):
        return self._knot[0]

    def __call__(self, t):
        t = _check_arg(t)
        t0, a2, a1 = self._knot
        return kernels.logpower_eval(t, self.p, self.gamma, self.scale, t0, a2, a1)

    def deriv(self, t):
        t = _check_arg(t)
        t0, a2, a1 = self._knot
        return kernels.logpower_deriv(t, self.p, self.gamma, self.scale, t0, a2, a1)

    def deriv_ratio(self, t, floor=1e-12):
        """Phi'(t)/t with the argument floored to avoid 0/0 in assembly."""
        t = np.maximum(np.asarray(t, dtype=np.float64), floor)
        return self.deriv(t) / t

    def second_deriv(self, t):
        t = _check_arg(t)
        t0, a2, a1 = self._knot
        t = np.asarray(t, dtype=np.float64)
        # below 1e-8 the raw formula cancels catastrophically (A^2 + dA with
        # A ~ p/t); the clamp keeps the t->0 limit p(p-1)t^{p-2}L^gamma exact
        # to quadrature accuracy for p = 2 and finite elsewhere
        out = _logpower_second_deriv(np.maximum(t, 1e-8), self.p, self.gamma, self.scale)
        return np.where(t < t0, 2.0 * a2, out)

    def log_eval(self, ln_t):
        """log Phi(t) given ln t; raw branch only, for overflow-free tails."""
        return kernels.logpower_log_eval(ln_t, self.p, self.gamma, self.scale)

    def conjugate_params(self):
        return conjugate_log_power(self.p, self.gamma)

    def to_dict(self):
        d = {"kind": "log_power", "p": float(self.p), "gamma": float(self.gamma)}
        if self.scale != 1.0:
            d["scale"] = float(self.scale)
        if self.conjugate_equivalent:
            d["conjugate_equivalent"] = True
        return d


@dataclass(frozen=True)
class PurePower:
    """c * t^p; the analytic workhorse for closed-form cross-checks."""

    p: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.p > 1.0):
            raise DomainError("PurePower requires p > 1")

    def __call__(self, t):
        t = _check_arg(t)
        with np.errstate(over="ignore"):
            return self.scale * np.asarray(t, dtype=np.float64) ** self.p

    def deriv(self, t):
        t = _check_arg(t)
        return self.scale * self.p * np.asarray(t, dtype=np.float64) ** (self.p - 1.0)

    def deriv_ratio(self, t, floor=1e-12):
        t = np.maximum(np.asarray(t, dtype=np.float64), floor)
        return self.deriv(t) / t

    def second_deriv(self, t):
        t = _check_arg(t)
        return self.scale * self.p * (self.p - 1.0) * np.asarray(t) ** (self.p - 2.0)

    def log_eval(self, ln_t):
        return math.log(self.scale) + self.p * np.asarray(ln_t, dtype=np.float64)

    def deriv_inverse(self, s):
        # (Phi')^{-1}(s), exact
        s = np.asarray(s, dtype=np.float64)
        return (s / (self.scale * self.p)) ** (1.0 / (self.p - 1.0))

    def conjugate(self):
        q = self.p / (self.p - 1.0)
        cq = (self.p - 1.0) / self.p * (self.scale * self.p) ** (1.0 / (1.0 - self.p))
        return PurePower(q, cq)

    def to_dict(self):
        d = {"kind": "pure_power", "p": float(self.p)}
        if self.scale != 1.0:
            d["scale"] = float(self.scale)
        return d


class TabulatedConjugate:
    """Numeric conjugate of a base N-function, cached on a log grid.

    512 log-spaced nodes with monotone (PCHIP in log-log) interpolation;
    outside the table the interpolant's own extrapolation is used.
    """

    N_NODES = 512
    S_RANGE = (1.0e-6, 1.0e9)

    def __init__(self, base):
        self.base = base
        s = np.logspace(math.log10(self.S_RANGE[0]), math.log10(self.S_RANGE[1]),
                        self.N_NODES)
        vals = np.array([conjugate_numeric(base, si) for si in s])
        pos = vals > 0.0
        self.nodes_s = s[pos]
        self.nodes_v = vals[pos]
        self._interp = PchipInterpolator(np.log(self.nodes_s), np.log(self.nodes_v),
                                         extrapolate=True)

    def __call__(self, s):
        s = _check_arg(s)
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = np.exp(self._interp(np.log(s[pos])))
        return out

    def deriv(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros_like(s)
        pos = s > 0.0
        ls = np.log(s[pos])
        out[pos] = np.exp(self._interp(ls)) / s[pos] * self._interp.derivative()(ls)
        return out

    def deriv_ratio(self, t, floor=1e-12):
        t = np.maximum(np.asarray(t, dtype=np.float64), floor)
        return self.deriv(t) / t

    def to_dict(self):
        return {
            "kind": "tabulated_conjugate",
            "base": self.base.to_dict(),
            "nodes_s": self.nodes_s.tolist(),
            "nodes_value": self.nodes_v.tolist(),
        }


def orlicz_from_dict(d):
    kind = d["kind"]
    if kind == "log_power":
        return LogPower(d["p"], d["gamma"], d.get("scale", 1.0),
                        d.get("conjugate_equivalent", False))
    if kind == "pure_power":
        return PurePower(d["p"], d.get("scale", 1.0))
    if kind == "tabulated_conjugate":
        return TabulatedConjugate(orlicz_from_dict(d["base"]))
    raise DomainError(f"unknown orlicz kind {kind!r}")


def conjugate_log_power(p, gamma):
    """Closed-form conjugate exponents: (p, gamma) -> (p', gamma/(1-p)).

    Exact on the exponent parameters (rational arithmetic); the returned
    descriptor is an equivalence-class representative, valid up to a
    multiplicative growth constant.
    """
    if not p > 1.0:
        raise DomainError("conjugate_log_power requires p > 1")
    fp = Fraction(p).limit_denominator(10**12)
    fg = Fraction(gamma).limit_denominator(10**12)
    q = fp / (fp - 1)
    gq = fg / (1 - fp)
    return LogPower(float(q), float(gq), conjugate_equivalent=True)


def conjugate_numeric(f, s):
    """Legendre-Fenchel conjugate sup_t (s t - f(t)) of a convex N-function.

    Locates the stationary point f'(t) = s by bisection on a log bracket.
    """
    s = float(s)
    if not math.isfinite(s) or s < 0.0:
        raise DomainError("conjugate argument must be finite and nonnegative")
    if s == 0.0:
        return 0.0
    lo, hi = _CONJ_BRACKET
    dlo = float(f.deriv(lo))
    dhi = float(f.deriv(hi))
    if dhi < s:
        raise UnboundedConjugateError(
            f"f' never reaches {s} on [{lo}, {hi}]")
    if dlo >= s:
        # supremum attained at (numerical) zero
        return max(0.0, s * lo - float(f(lo)))
    t_star = brentq(lambda t: float(f.deriv(t)) - s, lo, hi,
                    xtol=1e-300, rtol=1e-12, maxiter=200)
    return s * t_star - float(f(t_star))


def young_gap(f, t, s):
    """Psi(t) + Psi*(s) - t s; nonnegative up to conjugation tolerance."""
    return float(f(t)) + conjugate_numeric(f, s) - float(t) * float(s)


def delta2_estimate(f, t_grid=None):
    """Grid supremum of f(2t)/f(t); doubling-constant estimate, not a proof."""
    if t_grid is None:
        t_grid = np.logspace(-6.0, 9.0, 600)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    num = np.asarray(f(2.0 * t_grid), dtype=np.float64)
    den = np.asarray(f(t_grid), dtype=np.float64)
    ratio = np.where((num == 0.0) & (den == 0.0), 1.0, num / np.where(den == 0, 1.0, den))
    return float(np.max(ratio))


def luxemburg_norm(values, weights, f, points=None):
    """inf{gamma > 0 : sum_i w_i Phi(x_i, |v_i| / gamma) <= 1} by bisection.

    ``f`` is an N-function or a DoublePhase (then ``points`` supplies x_i).
    """
    values = np.abs(np.asarray(values, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights <= 0.0):
        raise DomainError("quadrature weights must be positive")
    if not np.any(values > 0.0):
        return 0.0

    if points is None:
        def modular(g):
            with np.errstate(over="ignore"):
                m = np.sum(weights * np.asarray(f(values / g)))
            return m
    else:
        def modular(g):
            with np.errstate(over="ignore"):
                m = np.sum(weights * np.asarray(f.eval_at(points, values / g)))
            return m

    lo = hi = 1.0
    while not (modular(hi) <= 1.0):
        hi *= 4.0
        if hi > 1.0e12:
            raise NormOverflowError("modular exceeds 1 for every gamma up to 1e12")
    while modular(lo) <= 1.0 and lo > 1.0e-14:
        lo /= 4.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10 * hi:
            break
    return hi


def zygmund_ratio(a_field, b_field, weights, pa, alpha, pb, beta):
    """||AB|| / (||A|| ||B||) for the Zygmund-class Hoelder inequality.

    Exponents of the product norm follow 1/c = 1/a + 1/b and
    gamma/c = alpha/a + beta/b.
    """
    c = 1.0 / (1.0 / pa + 1.0 / pb)
    gamma_c = c * (alpha / pa + beta / pb)
    na = luxemburg_norm(a_field, weights, LogPower(pa, alpha))
    nb = luxemburg_norm(b_field, weights, LogPower(pb, beta))
    nab = luxemburg_norm(np.asarray(a_field) * np.asarray(b_field), weights,
                         LogPower(c, gamma_c))
    return nab / (na * nb)


@dataclass(frozen=True)
class DoublePhase:
    """Phi(x, t) = phi(t) + a(x) psi(t) with a spatial weight in [0, 1]."""

    phi: object
    psi: object
    weight: object = None  # callable (x1, x2) -> {0, 1}; checkerboard if None

    def weight_at(self, points):
        points = np.asarray(points, dtype=np.float64)
        if self.weight is not None:
            return np.asarray(self.weight(points[..., 0], points[..., 1]))
        from .geometry import eval_weight
        return eval_weight(points[..., 0], points[..., 1])

    def eval_at(self, points, t):
        a = self.weight_at(points)
        return np.asarray(self.phi(t)) + a * np.asarray(self.psi(t))

    def deriv_at(self, points, t):
        a = self.weight_at(points)
        return np.asarray(self.phi.deriv(t)) + a * np.asarray(self.psi.deriv(t))

    def comparability_constants(self, t_grid=None):
        """(c3, c4) with phi <= c3 psi + c4 on the sampled grid."""
        if t_grid is None:
            t_grid = np.logspace(-6.0, 9.0, 600)
        pv = np.asarray(self.phi(t_grid))
        sv = np.asarray(self.psi(t_grid))
        c3 = float(np.max(np.where(sv > 0, pv / np.where(sv == 0, 1.0, sv), 0.0)))
        c4 = float(max(0.0, np.max(pv - c3 * sv)))
        return c3, c4


def double_phase_log(alpha, beta, p=2.0, scale=1.0):
    """The borderline checkerboard pair: phi = t^p log^{-beta}, psi = t^p log^{alpha}."""
    return DoublePhase(phi=LogPower(p, -beta, scale), psi=LogPower(p, alpha, scale))
