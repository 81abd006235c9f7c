"""Tracy-Widom (beta = 2) distribution.

``F(x)`` is the Fredholm determinant ``det(I - K_Ai)`` of the Airy kernel on
``(x, inf)``. It is discretised with Gauss-Legendre nodes mapped through
``u = x + t / (1 - t)``. The Nyström matrix is symmetric, so ``log F`` is
taken as ``sum(log1p(-mu))`` over its eigenvalues, which keeps full relative
precision in the upper tail where ``1 - F`` is tiny. The derivative of
``log F`` follows from ``(d/dx) K(u + x, v + x) = -Ai(u + x) Ai(v + x)``:

    d log F / dx = v^T (I - A)^{-1} v,   v_i = sqrt(w_i) Ai(u_i)

A table of ``log F`` and its slope on ``[-13, 8]`` is interpolated by
monotone cubic Hermite segments. Outside the range where the determinant is
well conditioned, the classical tail expansions take over:

    log F(x) = -|x|^3/12 - log|x|/8 + zeta'(-1) + log(2)/24 + 3/(64|x|^3)   (x -> -inf)
    log F(x) = -int_x^inf (u - x) Ai(u)^2 du                                (x -> +inf)
"""

import os
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize, special
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, GridError, ParseError

CACHE_ENV_VAR = "SPIKE_DETECT_TW_CACHE"

DEFAULT_ORDER = 64
TABLE_LO, TABLE_HI, TABLE_STEP = -13.0, 8.0, 0.02
# below this the smallest factor 1 - mu of the determinant loses relative precision
LEFT_JUNCTION = -6.0

_AIRY_RANGE = 20.0
_CACHE_SF_FLOOR = 5e-9
# zeta'(-1) + log(2)/24
_LEFT_CONST = -0.16542114370045092 + np.log(2.0) / 24.0


def airy_ai(x):
    """Airy function ``Ai(x)`` on ``[-20, 20]``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) > _AIRY_RANGE) or not np.all(np.isfinite(x_arr)):
        raise DomainError(f"airy_ai is supported on [-{_AIRY_RANGE:g}, {_AIRY_RANGE:g}]")
    out = special.airy(x_arr)[0]
    return out[()] if np.ndim(out) == 0 else out


@lru_cache(maxsize=8)
def _unit_nodes(order):
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    return t / (1.0 - t), w / (1.0 - t) ** 2


def fredholm_log_cdf(x, order=DEFAULT_ORDER):
    """Return ``(log F(x), d log F / dx)`` from the Airy-kernel determinant."""
    s, w = _unit_nodes(order)
    u = x + s
    ai, aip, _, _ = special.airy(u)
    sw = np.sqrt(w)
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, 1.0)
    kern = (ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]) / du
    np.fill_diagonal(kern, aip * aip - u * ai * ai)
    a = sw[:, None] * kern * sw[None, :]
    mu, vecs = np.linalg.eigh(0.5 * (a + a.T))
    mu = np.minimum(mu, 1.0 - 1e-300)
    v = vecs.T @ (sw * ai)
    return float(np.sum(np.log1p(-mu))), float(np.sum(v * v / (1.0 - mu)))


def _left_tail(x):
    ax = -np.asarray(x, dtype=float)
    logf = -(ax**3) / 12.0 - np.log(ax) / 8.0 + _LEFT_CONST + 3.0 / (64.0 * ax**3)
    slope = ax**2 / 4.0 + 1.0 / (8.0 * ax) + 9.0 / (64.0 * ax**4)
    return logf, slope


def _right_tail(x):
    x = np.asarray(x, dtype=float)
    ai, aip, _, _ = special.airy(x)
    tail = (2.0 * x * x * ai * ai - 2.0 * x * aip * aip - ai * aip) / 3.0
    slope = aip * aip - x * ai * ai
    return -tail, slope


def _fd_slopes(x, y):
    """Fourth-order finite-difference slopes on a uniform grid."""
    h = x[1] - x[0]
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[:2] = (-25 * y[:2] + 48 * y[1:3] - 36 * y[2:4] + 16 * y[3:5] - 3 * y[4:6]) / (12.0 * h)
    d[-2:] = (25 * y[-2:] - 48 * y[-3:-1] + 36 * y[-4:-2] - 16 * y[-5:-3] + 3 * y[-6:-4]) / (12.0 * h)
    return d


def _limit_slopes(x, y, d):
    """Fritsch-Carlson limiter so the Hermite interpolant stays increasing."""
    d = np.maximum(d, 0.0)
    delta = np.diff(y) / np.diff(x)
    for k, dk in enumerate(delta):
        al, be = d[k] / dk, d[k + 1] / dk
        r = al * al + be * be
        if r > 9.0:
            tau = 3.0 / np.sqrt(r)
            d[k], d[k + 1] = tau * al * dk, tau * be * dk
    return d


@dataclass(frozen=True, eq=False)
class TWCdf:
    """Tabulated Tracy-Widom c.d.f.

    The table holds ``log F`` rather than ``F``: the upper tail ``1 - F``
    drops below double-precision resolution well inside the table, while
    ``log F`` stays strictly negative and strictly increasing.
    """

    grid: np.ndarray
    log_values: np.ndarray
    slopes: np.ndarray
    order: int = DEFAULT_ORDER
    accuracy: float = 1e-8

    def __post_init__(self):
        g, lv = np.asarray(self.grid, float), np.asarray(self.log_values, float)
        if g.ndim != 1 or g.shape != lv.shape or g.size < 6:
            raise GridError("grid and values must be 1-D arrays of equal length >= 6")
        if np.any(np.diff(g) <= 0) or np.any(np.diff(lv) <= 0):
            raise GridError("Tracy-Widom table must be strictly increasing")
        if np.any(lv >= 0) or not np.all(np.isfinite(lv)):
            raise GridError("Tracy-Widom table values must lie in (0, 1)")
        if lv[0] >= np.log(1e-8) or lv[-1] <= np.log1p(-1e-8):
            raise GridError("Tracy-Widom table must span (1e-8, 1 - 1e-8)")
        d = _limit_slopes(g, lv, np.asarray(self.slopes, float).copy())
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "log_values", lv)
        object.__setattr__(self, "slopes", d)
        object.__setattr__(self, "_spline", CubicHermiteSpline(g, lv, d))
        object.__setattr__(self, "_dspline", self._spline.derivative())

    @property
    def values(self):
        return np.exp(self.log_values)

    def logcdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        out = np.empty_like(x)
        left, right = x < lo, x > hi
        mid = ~(left | right)
        out[mid] = self._spline(x[mid])
        out[left] = _left_tail(x[left])[0]
        out[right] = _right_tail(x[right])[0]
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        return np.exp(self.logcdf(x))

    def sf(self, x):
        """Upper tail ``1 - F(x)``, accurate far into the right tail."""
        return -np.expm1(self.logcdf(x))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        slope = np.empty_like(x)
        left, right = x < lo, x > hi
        mid = ~(left | right)
        slope[mid] = self._dspline(x[mid])
        slope[left] = _left_tail(x[left])[1]
        slope[right] = _right_tail(x[right])[1]
        out = np.maximum(slope, 0.0) * np.exp(self.logcdf(x))
        return out[()] if out.ndim == 0 else out

    def _solve_log(self, target):
        """Solve ``log F(x) = target`` for a scalar ``target < 0``."""
        lv, g = self.log_values, self.grid
        if target < lv[0]:
            lo = g[0] - 1.0
            while _left_tail(lo)[0] > target:
                lo = 2.0 * lo
            return optimize.brentq(lambda z: _left_tail(z)[0] - target, lo, g[0], xtol=1e-14, rtol=1e-15)
        if target > lv[-1]:
            need = -target
            if _right_tail(40.0)[0] < target or need <= 0.0:
                raise DomainError("probability too close to 1 for the right-tail evaluator")
            return optimize.brentq(lambda z: -_right_tail(z)[0] - need, g[-1], 40.0, xtol=1e-14, rtol=1e-15)
        k = int(np.clip(np.searchsorted(lv, target), 1, lv.size - 1))
        return optimize.brentq(lambda z: float(self._spline(z)) - target, g[k - 1], g[k], xtol=1e-15, rtol=1e-15)

    def ppf(self, p):
        """Quantile ``F^{-1}(p)`` for ``p`` in (0, 1)."""
        p_arr = np.asarray(p, dtype=float)
        if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
            raise DomainError("probability must lie strictly inside (0, 1)")
        if p_arr.ndim == 0:
            return self._solve_log(float(np.log(p_arr)))
        return self._ppf_log_vec(np.log(p_arr))

    def isf(self, q):
        """Complementary quantile: ``x`` with ``1 - F(x) = q``."""
        q_arr = np.asarray(q, dtype=float)
        if np.any(~((q_arr > 0.0) & (q_arr < 1.0))):
            raise DomainError("probability must lie strictly inside (0, 1)")
        if q_arr.ndim == 0:
            return self._solve_log(float(np.log1p(-q_arr)))
        return self._ppf_log_vec(np.log1p(-q_arr))

    def _ppf_log_vec(self, target):
        """Vectorised inverse: safeguarded Newton inside each table segment."""
        lv, g = self.log_values, self.grid
        out = np.empty_like(target)
        inside = (target >= lv[0]) & (target <= lv[-1])
        t = target[inside]
        k = np.clip(np.searchsorted(lv, t), 1, lv.size - 1)
        a, b = g[k - 1], g[k]
        fa, fb = lv[k - 1], lv[k]
        x = a + (b - a) * (t - fa) / (fb - fa)
        for _ in range(8):
            step = (self._spline(x) - t) / np.maximum(self._dspline(x), 1e-300)
            x = np.clip(x - step, a, b)
        out[inside] = x
        for i in np.flatnonzero(~inside):
            out[i] = self._solve_log(float(target[i]))
        return out

    def rvs(self, size, rng):
        """Draw Tracy-Widom variates by inverting uniforms."""
        u = rng.random(size)
        u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
        return self._ppf_log_vec(np.log(np.atleast_1d(u))).reshape(np.shape(u))


def tabulate(lo=TABLE_LO, hi=TABLE_HI, step=TABLE_STEP, order=DEFAULT_ORDER):
    """``(grid, log F, d log F/dx)`` on a uniform grid from ``lo`` to ``hi``."""
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi and 0.0 < step <= hi - lo):
        raise DomainError(f"need lo < hi and 0 < step <= hi - lo, got {lo}, {hi}, {step}")
    n = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(n)
    logv = np.empty(n)
    slopes = np.empty(n)
    tail = grid < LEFT_JUNCTION
    logv[tail], slopes[tail] = _left_tail(grid[tail])
    for i in np.flatnonzero(~tail):
        logv[i], slopes[i] = fredholm_log_cdf(grid[i], order)
    return grid, logv, slopes


def build_table(lo=TABLE_LO, hi=TABLE_HI, step=TABLE_STEP, order=DEFAULT_ORDER):
    """Tabulate ``log F`` on a uniform grid wide enough to carry both tails."""
    grid, logv, slopes = tabulate(lo, hi, step, order)
    return TWCdf(grid, logv, slopes, order=order)


def format_rows(grid, values):
    """Cache-file text: ``x,F(x)`` rows with 12 significant digits."""
    return "".join(f"{x:.12g},{f:.12g}\n" for x, f in zip(grid, values))


def save_table(table, path):
    """Write ``x,F(x)`` rows with 12 significant digits."""
    Path(path).write_text(format_rows(table.grid, table.values), encoding="ascii")


def load_table(path):
    """Read a table written by :func:`save_table`.

    Rows must be non-decreasing in both columns. Twelve digits of ``F`` leave
    few digits of ``1 - F`` once it drops below ``5e-9``, so those rows are
    dropped and the right-tail expansion, accurate to ``1e-9`` relative there,
    covers that range. Slopes are rebuilt by finite differences.
    """
    xs, fs = [], []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"expected 2 fields, got {len(parts)}", lineno)
            try:
                x, f = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if not (np.isfinite(x) and 0.0 <= f <= 1.0):
                raise ParseError("value out of range", lineno, 2)
            if xs and (x <= xs[-1] or f < fs[-1]):
                raise ParseError("table is not monotone", lineno)
            xs.append(x)
            fs.append(f)
    x, f = np.array(xs), np.array(fs)
    keep = (f > 0.0) & (f <= 1.0 - _CACHE_SF_FLOOR)
    x, f = x[keep], f[keep]
    if x.size < 6 or np.any(np.abs(np.diff(x, 2)) > 1e-9):
        raise ParseError("cache must hold a uniform grid of at least 6 informative rows")
    logv = np.log(f)
    return TWCdf(x, logv, _fd_slopes(x, logv))


_default = None
_default_lock = threading.Lock()


def default_table():
    """Process-wide table, built once.

    When ``SPIKE_DETECT_TW_CACHE`` names a file it is loaded if present and
    written after a fresh build otherwise.
    """
    global _default
    if _default is not None:
        return _default
    with _default_lock:
        if _default is None:
            path = os.environ.get(CACHE_ENV_VAR)
            if path and Path(path).is_file():
                table = load_table(path)
            else:
                table = build_table()
                if path:
                    save_table(table, path)
            _default = table
    return _default


def tw2_cdf(x):
    return default_table().cdf(x)


def tw2_sf(x):
    return default_table().sf(x)


def tw2_pdf(x):
    return default_table().pdf(x)


def tw2_quantile(p):
    return default_table().ppf(p)


def tw2_isf(q):
    return default_table().isf(q)


class ComboQuantiler:
    """Law of ``a X + b Y`` for independent Tracy-Widom ``X`` and ``Y``.

    The two scaled densities are sampled on a common uniform spacing over
    their ``[tail, 1 - tail]`` quantile ranges and convolved; the c.d.f. is
    the cumulative trapezoid of the result.
    """

    def __init__(self, a, b, table=None, n_grid=2**14, tail=1e-7):
        if not a > 0:
            raise DomainError("weight a must be positive")
        self.a, self.b = float(a), float(b)
        self.tail = float(tail)
        self.table = table if table is not None else default_table()
        if self.b == 0.0:
            self.z = self.density = self.cdf_grid = None
            self.mass = 1.0
            return
        t = self.table
        xlo, xhi = t.ppf(tail), t.ppf(1.0 - tail)
        ulo, uhi = self.a * xlo, self.a * xhi
        vlo, vhi = sorted((self.b * xlo, self.b * xhi))
        h = (uhi - ulo + vhi - vlo) / (n_grid - 1)
        u = ulo + h * np.arange(int(np.ceil((uhi - ulo) / h)) + 1)
        v = vlo + h * np.arange(int(np.ceil((vhi - vlo) / h)) + 1)
        fu = t.pdf(u / self.a) / self.a
        fv = t.pdf(v / self.b) / abs(self.b)
        dens = np.convolve(fu, fv) * h
        z = ulo + vlo + h * np.arange(dens.size)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * h)])
        self.mass = cum[-1]
        self.z = z
        self.density = dens / self.mass
        self.cdf_grid = cum / self.mass

    def cdf(self, z):
        if self.density is None:
            return self.table.cdf(np.asarray(z, float) / self.a)
        return np.interp(z, self.z, self.cdf_grid, left=0.0, right=1.0)

    def sf(self, z):
        if self.density is None:
            return self.table.sf(np.asarray(z, float) / self.a)
        return 1.0 - self.cdf(z)

    def ppf(self, p):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError("probability must lie strictly inside (0, 1)")
        if self.density is None:
            return self.a * self.table.ppf(p)
        cg = self.cdf_grid
        # the grid drops mass `tail` from each component, so shallower tails are not resolved
        if p < self.tail or p > 1.0 - self.tail or p <= cg[1] or p >= cg[-2]:
            raise GridError(f"p={p} lies beyond the convolution grid; widen the tail bound")
        k = int(np.searchsorted(cg, p))
        z0, z1, c0, c1 = self.z[k - 1], self.z[k], cg[k - 1], cg[k]
        return float(z0 + (z1 - z0) * (p - c0) / (c1 - c0))

    def isf(self, q):
        q = float(q)
        if not 0.0 < q < 1.0:
            raise DomainError("probability must lie strictly inside (0, 1)")
        if self.density is None:
            return self.a * self.table.isf(q)
        return self.ppf(1.0 - q)


@lru_cache(maxsize=64)
def combo_quantiler(a, b):
    return ComboQuantiler(a, b)


def combo_quantile(a, b, p):
    """Quantile of ``a X + b Y`` for independent Tracy-Widom ``X``, ``Y``."""
    if not 0.0 < p < 1.0:
        raise DomainError("probability must lie strictly inside (0, 1)")
    return combo_quantiler(float(a), float(b)).ppf(p)
