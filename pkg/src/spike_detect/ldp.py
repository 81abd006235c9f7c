"""Large-deviation rate functions and error-exponent curves.

Rates are in nats per snapshot. A rate that is infinite (the event is
impossible at exponential scale) is returned as ``math.inf``, which is
totally ordered against finite values and never combined arithmetically
below except through ``min``.

Notation: ``c`` is the limiting ratio ``K/N``, ``rho`` the limiting SNR
``||h||^2 / sigma^2``, ``F+`` and ``F-`` the log-potentials of the
Marčenko-Pastur law (see :mod:`spike_detect.mp_law`).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError
from .mp_law import MPLaw, log_potential_minus, log_potential_plus, stieltjes

# relative slack when a point lands on a support edge through rounding
_EDGE_RTOL = 1e-13
GRID_POINTS = 1024
REFINE_TOL = 1e-10
CURVE_POINTS = 256
# curvature of the sampling map; larger values crowd points near the left end
_CURVE_KAPPA = 4.0


def lambda_spike(rho, c):
    """``(1 + rho)(1 + c / rho)``.

    For ``rho > sqrt(c)`` this is the almost-sure limit of the largest sample
    eigenvalue under the spiked alternative. It equals ``(1 + sqrt(c))^2`` at
    ``rho = sqrt(c)`` and exceeds it on both sides.
    """
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    return (1.0 + rho) * (1.0 + c / rho)


@dataclass(frozen=True)
class LdpContext:
    """Limiting ratio ``c`` and SNR ``rho`` with the derived edge constants."""

    c: float
    rho: float
    law: MPLaw = field(init=False, repr=False)
    lambda_minus: float = field(init=False)
    lambda_plus: float = field(init=False)
    lambda_spk: float = field(init=False)
    supercritical: bool = field(init=False)

    def __post_init__(self):
        c, rho = float(self.c), float(self.rho)
        spk = lambda_spike(rho, c)
        law = MPLaw(c)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "law", law)
        object.__setattr__(self, "lambda_minus", law.lambda_minus)
        object.__setattr__(self, "lambda_plus", law.lambda_plus)
        object.__setattr__(self, "lambda_spk", spk)
        object.__setattr__(self, "supercritical", bool(rho > math.sqrt(c)))
        object.__setattr__(self, "_fplus_edge", float(log_potential_plus(law, law.lambda_plus)))
        object.__setattr__(self, "_fminus_edge", float(log_potential_minus(law, law.lambda_minus)))
        object.__setattr__(self, "_fplus_spk", float(log_potential_plus(law, max(spk, law.lambda_plus))))

    @property
    def lambda1_limit(self):
        """Almost-sure limit of the largest eigenvalue under the alternative."""
        return self.lambda_spk if self.supercritical else self.lambda_plus


@dataclass(frozen=True)
class CurvePoint:
    """Achievable pair of error exponents (false alarm, miss)."""

    a: float
    b: float


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def _right_part(ctx, x):
    """Split ``x`` into the finite part (clamped to ``[lambda+, inf)``) and a mask."""
    x = np.asarray(x, dtype=float)
    ok = x >= ctx.lambda_plus * (1.0 - _EDGE_RTOL)
    return np.maximum(np.where(ok, x, ctx.lambda_plus), ctx.lambda_plus), ok


def rate_I0_plus(ctx, x):
    """Rate of the largest eigenvalue under the null.

    ``x - lambda+ - (1 - c) log(x / lambda+) - 2c (F+(x) - F+(lambda+))`` on
    ``[lambda+, inf)``, ``inf`` below. Zero at ``lambda+`` and increasing.
    """
    xs, ok = _right_part(ctx, x)
    c, lp = ctx.c, ctx.lambda_plus
    val = xs - lp - (1.0 - c) * np.log(xs / lp) - 2.0 * c * (log_potential_plus(ctx.law, xs) - ctx._fplus_edge)
    return _scalar(np.where(ok, val, np.inf))


def _need_super(ctx):
    if not ctx.supercritical:
        raise DomainError(f"rho={ctx.rho} is not above sqrt(c)={math.sqrt(ctx.c):.6g}")


def rate_Irho_plus(ctx, x):
    """Rate of the largest eigenvalue under the spiked alternative.

    ``(x - s)/(1 + rho) - (1 - c) log(x / s) - c (F+(x) - F+(s))`` with
    ``s = lambda_spk``, on ``[lambda+, inf)``; ``inf`` below. V-shaped with
    its zero at ``lambda_spk``. Requires ``rho > sqrt(c)``.
    """
    _need_super(ctx)
    xs, ok = _right_part(ctx, x)
    c, s = ctx.c, ctx.lambda_spk
    val = (xs - s) / (1.0 + ctx.rho) - (1.0 - c) * np.log(xs / s) - c * (log_potential_plus(ctx.law, xs) - ctx._fplus_spk)
    return _scalar(np.where(ok, val, np.inf))


def rate_I_minus(ctx, y):
    """Rate of the smallest eigenvalue (same under both hypotheses).

    ``y - lambda- - (1 - c) log(y / lambda-) - 2c (F-(y) - F-(lambda-))`` on
    ``(0, lambda-]``, ``inf`` elsewhere.
    """
    y = np.asarray(y, dtype=float)
    lm = ctx.lambda_minus
    ok = (y > 0.0) & (y <= lm * (1.0 + _EDGE_RTOL))
    ys = np.minimum(np.where(ok, y, lm), lm)
    c = ctx.c
    val = ys - lm - (1.0 - c) * np.log(ys / lm) - 2.0 * c * (log_potential_minus(ctx.law, ys) - ctx._fminus_edge)
    return _scalar(np.where(ok, val, np.inf))


def _check_right(ctx, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < ctx.lambda_plus * (1.0 - _EDGE_RTOL)):
        raise DomainError(f"x must be >= lambda+ = {ctx.lambda_plus:.6g}")
    return np.maximum(x, ctx.lambda_plus)


def appendix_J_rho(ctx, x):
    """Limit of the normalised log spherical integral with a rank-one argument.

    For ``rho <= sqrt(c)`` and ``x`` in ``[lambda+, lambda_spk]`` it is the
    constant ``rho/c - log(rho/(c(1 + rho))) - F+(lambda_spk)``; otherwise
    ``rho x / (c(1 + rho)) - 1 - log(rho/(c(1 + rho))) - F+(x)``. The two
    branches agree at ``x = lambda_spk``.
    """
    x = _check_right(ctx, x)
    c, rho = ctx.c, ctx.rho
    k = math.log(rho / (c * (1.0 + rho)))
    moving = rho * x / (c * (1.0 + rho)) - 1.0 - k - log_potential_plus(ctx.law, x)
    if ctx.supercritical:
        return _scalar(moving)
    flat = rho / c - k - ctx._fplus_spk
    return _scalar(np.where(x <= ctx.lambda_spk, flat, moving))


def phi_mp(ctx, y):
    """``-y + (1 - c) log y + 2c F+(y)``: the one-eigenvalue potential against the bulk."""
    y = _check_right(ctx, y)
    c = ctx.c
    return _scalar(-y + (1.0 - c) * np.log(y) + 2.0 * c * log_potential_plus(ctx.law, y))


def appendix_G_rho(ctx, x):
    """``x/(1 + rho) - (1 - c) log x - c F+(x) + c + c log(rho/(c(1 + rho)))``.

    For ``rho > sqrt(c)`` this is minimal at ``lambda_spk`` and the spiked
    rate is ``G(x) - G(lambda_spk)``. It equals ``-(phi_mp + c J_rho)`` on
    the supercritical branch.
    """
    x = _check_right(ctx, x)
    c, rho = ctx.c, ctx.rho
    val = x / (1.0 + rho) - (1.0 - c) * np.log(x) - c * log_potential_plus(ctx.law, x)
    return _scalar(val + c + c * math.log(rho / (c * (1.0 + rho))))


def appendix_G_rho_prime(ctx, x):
    """``1/(1 + rho) - (1 - c)/x + c f(x)``."""
    x = _check_right(ctx, x)
    return _scalar(1.0 / (1.0 + ctx.rho) - (1.0 - ctx.c) / x + ctx.c * stieltjes(ctx.law, x))


def error_exponent_T(ctx):
    """Miss exponent of the GLRT at any fixed level: ``I_rho+(lambda+)`` or 0."""
    if not ctx.supercritical:
        return 0.0
    return float(rate_Irho_plus(ctx, ctx.lambda_plus))


def high_snr_exponent(rho, c):
    """``log rho - (1 + sqrt c) - (1 - c) log(1 + sqrt c) - (c/2) log c``.

    Large-``rho`` form of :func:`error_exponent_T`; the gap vanishes as
    ``rho`` grows.
    """
    if not rho > 0 or not 0.0 < c < 1.0:
        raise DomainError("need rho > 0 and c in (0, 1)")
    sc = math.sqrt(c)
    return math.log(rho) - (1.0 + sc) - (1.0 - c) * math.log1p(sc) - 0.5 * c * math.log(c)


def psi(c):
    """``exp(-(1 + sqrt c)) (1 + sqrt c)^(c - 1) c^(-c/2)``.

    At high SNR the GLRT miss probability behaves like ``(psi(c) rho)^(-N)``,
    i.e. ``exp(-N high_snr_exponent(rho, c))``.
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    sc = math.sqrt(c)
    return math.exp(-(1.0 + sc)) * (1.0 + sc) ** (c - 1.0) * c ** (-0.5 * c)


def _curve_nodes(lo, hi, n):
    """``n`` points strictly inside ``(lo, hi)``, crowded toward ``lo``."""
    v = np.arange(1, n + 1) / (n + 1.0)
    return lo + (hi - lo) * np.expm1(_CURVE_KAPPA * v) / math.expm1(_CURVE_KAPPA)


def ee_curve_T_arrays(ctx, n_points=CURVE_POINTS):
    """Arrays ``(x, a, b)`` behind :func:`ee_curve_T`; empty when subcritical."""
    if n_points < 2:
        raise DomainError("need at least two curve points")
    if not ctx.supercritical:
        return np.empty(0), np.empty(0), np.empty(0)
    x = _curve_nodes(ctx.lambda_plus, ctx.lambda_spk, n_points)
    return x, rate_I0_plus(ctx, x), rate_Irho_plus(ctx, x)


def ee_curve_T(ctx, n_points=CURVE_POINTS):
    """Error-exponent curve of the GLRT.

    Pairs ``(I0+(x), I_rho+(x))`` for ``x`` in ``(lambda+, lambda_spk)``. The
    list is empty when ``rho <= sqrt(c)``: no pair with both exponents
    positive is achievable then.
    """
    _, a, b = ee_curve_T_arrays(ctx, n_points)
    return [CurvePoint(float(p), float(q)) for p, q in zip(a, b)]


def _contraction(ctx, t, rate_top):
    """``min over y in [lambda+/t, lambda-] of rate_top(t y) + I-(y)``.

    The reduced objective is not known to be unimodal, so the minimum is
    bracketed on a dense grid and then polished with bounded Brent search.
    """
    if not t > 1.0:
        raise DomainError(f"ratio argument must exceed 1, got {t!r}")
    lo, hi = ctx.lambda_plus / t, ctx.lambda_minus
    if lo > hi * (1.0 + _EDGE_RTOL):
        return math.inf
    if lo >= hi:
        return float(rate_top(ctx, t * hi) + rate_I_minus(ctx, hi))
    y = np.linspace(lo, hi, GRID_POINTS)
    vals = rate_top(ctx, np.maximum(t * y, ctx.lambda_plus)) + rate_I_minus(ctx, y)
    k = int(np.argmin(vals))
    best = float(vals[k])
    a, b = y[max(k - 1, 0)], y[min(k + 1, y.size - 1)]

    def obj(z):
        return float(rate_top(ctx, max(t * z, ctx.lambda_plus)) + rate_I_minus(ctx, z))

    res = optimize.minimize_scalar(obj, bounds=(a, b), method="bounded", options={"xatol": REFINE_TOL})
    return min(best, float(res.fun))


def gamma_0(ctx, t):
    """Rate of the condition number ``t`` under the null."""
    return _contraction(ctx, t, rate_I0_plus)


def gamma_rho(ctx, t):
    """Rate of the condition number ``t`` under the spiked alternative."""
    _need_super(ctx)
    return _contraction(ctx, t, rate_Irho_plus)


def error_exponent_U(ctx):
    """Miss exponent of the condition-number test: ``Gamma_rho(lambda+/lambda-)`` or 0."""
    if not ctx.supercritical:
        return 0.0
    return gamma_rho(ctx, ctx.lambda_plus / ctx.lambda_minus)


def ee_curve_U_arrays(ctx, n_points=CURVE_POINTS):
    """Arrays ``(t, a, b)`` behind :func:`ee_curve_U`; empty when subcritical."""
    if n_points < 2:
        raise DomainError("need at least two curve points")
    if not ctx.supercritical:
        return np.empty(0), np.empty(0), np.empty(0)
    lm = ctx.lambda_minus
    t = _curve_nodes(ctx.lambda_plus / lm, ctx.lambda_spk / lm, n_points)
    a = np.array([gamma_0(ctx, ti) for ti in t])
    b = np.array([gamma_rho(ctx, ti) for ti in t])
    return t, a, b


def ee_curve_U(ctx, n_points=CURVE_POINTS):
    """Error-exponent curve of the condition-number test.

    Pairs ``(Gamma_0(t), Gamma_rho(t))`` for ``t`` in
    ``(lambda+/lambda-, lambda_spk/lambda-)``; empty when ``rho <= sqrt(c)``.
    """
    _, a, b = ee_curve_U_arrays(ctx, n_points)
    return [CurvePoint(float(p), float(q)) for p, q in zip(a, b)]


def dominance_margins(ctx, curve_u):
    """Gap between the GLRT curve and the condition-number curve.

    For each point ``(a, b)`` of ``curve_u``, find ``x`` with ``I0+(x) = a``
    and return ``I_rho+(x) - b``. Positive everywhere means the GLRT curve
    lies strictly above at matched false-alarm exponents.
    """
    _need_super(ctx)
    lp, spk = ctx.lambda_plus, ctx.lambda_spk
    top = rate_I0_plus(ctx, spk)
    out = []
    for pt in curve_u:
        if not 0.0 < pt.a < top:
            raise DomainError(f"abscissa {pt.a} is outside the GLRT curve range (0, {top:.6g})")
        x = optimize.brentq(lambda z: rate_I0_plus(ctx, z) - pt.a, lp, spk, xtol=1e-14, rtol=1e-15)
        out.append(rate_Irho_plus(ctx, x) - pt.b)
    return np.array(out)
