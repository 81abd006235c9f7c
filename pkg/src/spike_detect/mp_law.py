"""Marčenko-Pastur law: density, Stieltjes transforms and log-potentials.

All transforms are evaluated on the real axis outside the open support
``(lambda_minus, lambda_plus)``, which is all the rate functions need.
``mp_expect`` integrates against the law by adaptive quadrature and serves
as the independent check on the closed forms.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError

# relative slack when deciding that x sits on a support edge
_EDGE_RTOL = 1e-13


@dataclass(frozen=True)
class MPLaw:
    """Marčenko-Pastur law with aspect ratio ``c`` in (0, 1)."""

    c: float
    lambda_minus: float = field(init=False)
    lambda_plus: float = field(init=False)

    def __post_init__(self):
        c = float(self.c)
        if not (0.0 < c < 1.0) or not np.isfinite(c):
            raise DomainError(f"aspect ratio must lie in (0, 1), got {self.c!r}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lambda_minus", float((1.0 - np.sqrt(c)) ** 2))
        object.__setattr__(self, "lambda_plus", float((1.0 + np.sqrt(c)) ** 2))


def mp_pdf(law, y):
    """Density of the law at ``y`` (zero outside the open support)."""
    y = np.asarray(y, dtype=float)
    lm, lp = law.lambda_minus, law.lambda_plus
    inside = (y > lm) & (y < lp)
    ys = np.where(inside, y, 0.5 * (lm + lp))
    val = np.sqrt((lp - ys) * (ys - lm)) / (2.0 * np.pi * law.c * ys)
    out = np.where(inside, val, 0.0)
    return out[()] if out.ndim == 0 else out


def _side(law, x):
    """Return +1 right of the support, -1 left of it; raise inside."""
    x = np.asarray(x, dtype=float)
    lm, lp = law.lambda_minus, law.lambda_plus
    right = x >= lp * (1.0 - _EDGE_RTOL)
    left = (x > 0.0) & (x <= lm * (1.0 + _EDGE_RTOL))
    if not np.all(right | left):
        bad = np.atleast_1d(x)[~np.atleast_1d(right | left)][0]
        raise DomainError(
            f"x={bad!r} is not in (0, {lm:.6g}] or [{lp:.6g}, inf) for c={law.c}"
        )
    return x, np.where(right, 1.0, -1.0)


def stieltjes(law, x):
    """Stieltjes transform ``f(x) = int dMP(y) / (y - x)`` off the support.

    The sign of the square root follows the branch of the side of the
    support ``x`` sits on. The discriminant ``(1 - x - c)^2 - 4cx`` is used
    in its factored form ``(x - lambda_minus)(x - lambda_plus)`` so that it
    vanishes exactly at the edges; it is clamped at zero there. The root
    ``(b + s sqrt(d)) / (2cx)`` is evaluated as ``2 / (b - s sqrt(d))``,
    which avoids cancellation far from the support.
    """
    x, side = _side(law, x)
    c = law.c
    b = 1.0 - x - c
    disc = np.maximum((x - law.lambda_minus) * (x - law.lambda_plus), 0.0)
    out = 2.0 / (b - side * np.sqrt(disc))
    return out[()] if out.ndim == 0 else out


def stieltjes_tilde(law, x):
    """Companion transform ``c f(x) - (1 - c) / x``."""
    f = stieltjes(law, x)
    x = np.asarray(x, dtype=float)
    out = law.c * f - (1.0 - law.c) / x
    return out[()] if np.ndim(out) == 0 else out


def _potential(law, x):
    f = stieltjes(law, x)
    ft = stieltjes_tilde(law, x)
    x = np.asarray(x, dtype=float)
    c = law.c
    return np.log(x) + np.log1p(c * f) / c, ft, x * f * ft


def log_potential_plus(law, x):
    """``F+(x) = int log(x - y) dMP(y)`` for ``x >= lambda_plus``, closed form."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < law.lambda_plus * (1.0 - _EDGE_RTOL)):
        raise DomainError(f"log_potential_plus needs x >= {law.lambda_plus:.6g}")
    head, ft, cross = _potential(law, x_arr)
    out = head + np.log1p(ft) + cross
    return out[()] if np.ndim(out) == 0 else out


def log_potential_minus(law, x):
    """``F-(x) = int log(y - x) dMP(y)`` for ``0 < x <= lambda_minus``, closed form."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0.0) or np.any(x_arr > law.lambda_minus * (1.0 + _EDGE_RTOL)):
        raise DomainError(f"log_potential_minus needs 0 < x <= {law.lambda_minus:.6g}")
    head, ft, cross = _potential(law, x_arr)
    # 1 + f~ < 0 on this side of the support
    out = head + np.log(-(1.0 + ft)) + cross
    return out[()] if np.ndim(out) == 0 else out


def mp_expect(law, g, tol=1e-11):
    """Integrate ``g(y)`` against the law by adaptive Gauss-Kronrod quadrature.

    Uses ``y = lambda_minus + (lambda_plus - lambda_minus) sin^2(theta)``,
    which absorbs the square-root edge behaviour of the density.
    """
    lm, lp = law.lambda_minus, law.lambda_plus
    w = lp - lm

    def integrand(theta):
        s, co = np.sin(theta), np.cos(theta)
        y = lm + w * s * s
        dens = (w * s * co) ** 2 * 2.0 / (2.0 * np.pi * law.c * y)
        return g(y) * dens

    val, _ = integrate.quad(integrand, 0.0, np.pi / 2, epsabs=tol, epsrel=tol, limit=400)
    return val
