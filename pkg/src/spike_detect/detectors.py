"""GLRT and condition-number detectors with asymptotic thresholds.

Both tests reject the noise-only hypothesis for large values of a
scale-invariant spectral statistic. Thresholds come from the Tracy-Widom
fluctuations of the extreme sample eigenvalues around the Marčenko-Pastur
edges, so they depend only on ``K``, ``N`` and the level ``alpha``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .spectrum import (
    SnapshotMatrix,
    bottom_scale,
    clamp_eigenvalues,
    condition_number,
    glr_statistic,
    hermitian_eigenvalues,
    sample_covariance,
    top_scale,
)
from .tracy_widom import combo_quantiler, default_table

TEST_KINDS = ("glrt", "condition")


@dataclass(frozen=True)
class Decision:
    """Outcome of one detection test.

    ``reject_null`` agrees with ``statistic_value > threshold`` and, when a
    p-value is attached, with ``p_value < alpha``. The two rules are computed
    from the same c.d.f., so they can only disagree when the statistic sits
    on the threshold to within rounding; such ties follow the p-value.
    """

    statistic_value: float
    threshold: float
    reject_null: bool
    test_kind: str
    K: int
    N: int
    alpha: float
    p_value: Optional[float] = None

    def __post_init__(self):
        if self.test_kind not in TEST_KINDS:
            raise DomainError(f"test_kind must be one of {TEST_KINDS}")
        on_edge = abs(self.statistic_value - self.threshold) <= 1e-12 * abs(self.threshold)
        if not on_edge and self.reject_null != (self.statistic_value > self.threshold):
            raise ValueError("decision disagrees with statistic and threshold")
        if self.p_value is not None and self.reject_null != (self.p_value < self.alpha):
            raise ValueError("decision disagrees with p-value and level")


def _check(K, N, alpha=None):
    if not (isinstance(K, (int, np.integer)) and isinstance(N, (int, np.integer))):
        raise DomainError("K and N must be integers")
    if not (2 <= K < N):
        raise DomainError(f"need 2 <= K < N, got K={K}, N={N}")
    if alpha is not None and not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return K / N


def glrt_threshold(K, N, alpha):
    """Threshold on ``T`` with asymptotic false-alarm probability ``alpha``.

    ``(1 + sqrt(c))^2 + b_N N^(-2/3) q``, ``q`` the upper ``alpha`` quantile
    of the Tracy-Widom law and ``c = K/N``.
    """
    c = _check(K, N, alpha)
    q = default_table().isf(alpha)
    return float((1.0 + np.sqrt(c)) ** 2 + top_scale(c) * N ** (-2.0 / 3.0) * q)


def glrt_pvalue(t, K, N):
    """Asymptotic p-value of the GLRT statistic ``t``."""
    c = _check(K, N)
    z = N ** (2.0 / 3.0) * (np.asarray(t, dtype=float) - (1.0 + np.sqrt(c)) ** 2) / top_scale(c)
    return default_table().sf(z)


def _eigs(y):
    if not isinstance(y, SnapshotMatrix):
        y = SnapshotMatrix(y)
    eigs = clamp_eigenvalues(hermitian_eigenvalues(sample_covariance(y)))
    return y, eigs


def glrt_decide(y, alpha):
    """Run the GLRT on a snapshot matrix."""
    y, eigs = _eigs(y)
    _check(y.K, y.N, alpha)
    t = float(glr_statistic(eigs))
    p = float(glrt_pvalue(t, y.K, y.N))
    thr = glrt_threshold(y.K, y.N, alpha)
    return Decision(t, thr, bool(p < alpha), "glrt", y.K, y.N, alpha, p)


def cond_weights(c):
    """Weights ``(a, b)`` of the limit ``a X + b Y`` of the condition number.

    ``a = (1 + sqrt(c)) / (1 - sqrt(c))^2 (1/sqrt(c) + 1)^(1/3)`` scales the
    top-edge fluctuation ``X``; ``b = -(1 + sqrt(c))^2 / (sqrt(c) - 1)^3
    (1/sqrt(c) - 1)^(1/3)`` scales the bottom-edge fluctuation ``Y``. Both are
    positive: a large ``Y`` pushes the smallest eigenvalue below the lower
    edge, which raises the condition number.
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    sc = np.sqrt(c)
    lm, lp = (1.0 - sc) ** 2, (1.0 + sc) ** 2
    a = top_scale(c) / lm
    b = -lp * bottom_scale(c) / lm**2
    return float(a), float(b)


def _cond_center(c):
    sc = np.sqrt(c)
    return (1.0 + sc) ** 2 / (1.0 - sc) ** 2


def cond_threshold(K, N, alpha):
    """Threshold on ``U`` with asymptotic false-alarm probability ``alpha``."""
    c = _check(K, N, alpha)
    a, b = cond_weights(c)
    return float(_cond_center(c) + N ** (-2.0 / 3.0) * combo_quantiler(a, b).isf(alpha))


def cond_pvalue(u, K, N):
    """Asymptotic p-value of the condition-number statistic ``u``."""
    c = _check(K, N)
    a, b = cond_weights(c)
    z = N ** (2.0 / 3.0) * (np.asarray(u, dtype=float) - _cond_center(c))
    return combo_quantiler(a, b).sf(z)


def cond_decide(y, alpha, with_pvalue=False):
    """Run the condition-number test on a snapshot matrix.

    The decision is threshold-only unless ``with_pvalue`` is set.
    """
    y, eigs = _eigs(y)
    _check(y.K, y.N, alpha)
    u = float(condition_number(eigs))
    thr = cond_threshold(y.K, y.N, alpha)
    if with_pvalue:
        p = float(cond_pvalue(u, y.K, y.N))
        return Decision(u, thr, bool(p < alpha), "condition", y.K, y.N, alpha, p)
    return Decision(u, thr, bool(u > thr), "condition", y.K, y.N, alpha)
