"""Seeded Monte Carlo engine for both hypotheses.

Every trial draws from its own generator, keyed by ``(seed, trial, role)``
through ``numpy.random.SeedSequence`` spawn keys, with roles ``noise``,
``signal`` and ``channel``. A trial's matrix therefore does not depend on
batch sizes, trial order or which other trials run, so results are a pure
function of the configuration.

Complex Gaussian entries are drawn as two independent real normals, each
with variance ``sigma2 / 2``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .detectors import glrt_threshold
from .errors import DomainError
from .spectrum import SnapshotMatrix, center_statistics
from .tracy_widom import default_table

ROLES = {"noise": 0, "signal": 1, "channel": 2}
CHANNEL_MODES = ("deterministic_axis", "random_isotropic")
# complex entries per batch; bounds memory at about 16 bytes times this
_BATCH_ENTRIES = 2_000_000


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo configuration. ``rho`` is linear, not in dB."""

    K: int
    N: int
    sigma2: float = 1.0
    rho: float = 0.0
    channel_mode: str = "deterministic_axis"
    trials: int = 1000
    seed: int = 0
    alpha: Optional[float] = None

    def __post_init__(self):
        if not (2 <= self.K < self.N):
            raise DomainError(f"need 2 <= K < N, got K={self.K}, N={self.N}")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        if not self.rho >= 0:
            raise DomainError("rho must be non-negative")
        if self.channel_mode not in CHANNEL_MODES:
            raise DomainError(f"channel_mode must be one of {CHANNEL_MODES}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")


def trial_rng(cfg, trial_index, role):
    """Independent generator for one (trial, role) pair."""
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(int(trial_index), ROLES[role]))
    return np.random.Generator(np.random.PCG64(ss))


def _cgauss(rng, shape, var):
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(var / 2.0) * (z[..., 0] + 1j * z[..., 1])


def _channel(cfg, trial_index):
    norm = np.sqrt(cfg.rho * cfg.sigma2)
    if cfg.channel_mode == "deterministic_axis":
        h = np.zeros(cfg.K, dtype=complex)
        h[0] = norm
        return h
    g = _cgauss(trial_rng(cfg, trial_index, "channel"), (cfg.K,), 1.0)
    return norm * g / np.linalg.norm(g)


def _h0_array(cfg, trial_index):
    return _cgauss(trial_rng(cfg, trial_index, "noise"), (cfg.K, cfg.N), cfg.sigma2)


def _h1_array(cfg, trial_index):
    w = _h0_array(cfg, trial_index)
    s = _cgauss(trial_rng(cfg, trial_index, "signal"), (cfg.N,), 1.0)
    return w + np.outer(_channel(cfg, trial_index), s)


def gen_h0(cfg, trial_index):
    """Noise-only snapshot matrix for one trial."""
    return SnapshotMatrix(_h0_array(cfg, trial_index))


def gen_h1(cfg, trial_index):
    """Rank-one signal plus noise, ``||h||^2 = rho sigma2``, for one trial."""
    return SnapshotMatrix(_h1_array(cfg, trial_index))


def channel_vector(cfg, trial_index):
    """The channel ``h`` used by :func:`gen_h1` for this trial."""
    return _channel(cfg, trial_index)


def spectra(cfg, hypothesis):
    """Descending covariance eigenvalues of every trial, shape (trials, K)."""
    make = {"h0": _h0_array, "h1": _h1_array}.get(hypothesis)
    if make is None:
        raise DomainError("hypothesis must be 'h0' or 'h1'")
    out = np.empty((cfg.trials, cfg.K))
    step = max(1, _BATCH_ENTRIES // (cfg.K * cfg.N))
    for start in range(0, cfg.trials, step):
        idx = range(start, min(start + step, cfg.trials))
        y = np.stack([make(cfg, i) for i in idx])
        r = y @ np.conj(np.swapaxes(y, 1, 2)) / cfg.N
        out[start : start + len(idx)] = np.linalg.eigvalsh(r)[:, ::-1]
    return out


def _t_u(eigs):
    return eigs[:, 0] / eigs.mean(axis=1), eigs[:, 0] / eigs[:, -1]


@dataclass(frozen=True)
class PfaEstimate:
    trials: int
    rejections: int
    pfa: float
    ci_low: float
    ci_high: float
    threshold: float


def _wilson(k, n):
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def empirical_pfa(cfg, threshold=None):
    """False-alarm rate of the GLRT over ``cfg.trials`` null trials.

    The threshold defaults to the asymptotic one at ``cfg.alpha``. The
    interval is the 95% Wilson score interval.
    """
    if threshold is None:
        if cfg.alpha is None:
            raise DomainError("either cfg.alpha or an explicit threshold is required")
        threshold = glrt_threshold(cfg.K, cfg.N, cfg.alpha)
    t, _ = _t_u(spectra(cfg, "h0"))
    k = int(np.count_nonzero(t > threshold))
    lo, hi = _wilson(k, cfg.trials)
    return PfaEstimate(cfg.trials, k, k / cfg.trials, lo, hi, float(threshold))


@dataclass(frozen=True)
class RocCurve:
    """Empirical operating points of one test, ordered by false-alarm rate."""

    test_kind: str
    thresholds: np.ndarray
    pfa: np.ndarray
    power: np.ndarray
    trials_h0: int
    trials_h1: int

    def __post_init__(self):
        for arr in (self.pfa, self.power):
            if np.any((arr < 0) | (arr > 1)):
                raise ValueError("rates must lie in [0, 1]")
        if np.any(np.diff(self.pfa) < 0):
            raise ValueError("points must be ordered by false-alarm rate")

    @property
    def points(self):
        return list(zip(self.pfa.tolist(), self.power.tolist()))


@dataclass(frozen=True)
class PairedStatistics:
    """GLRT and condition-number statistics on shared null and alternative draws."""

    t_h0: np.ndarray
    u_h0: np.ndarray
    t_h1: np.ndarray
    u_h1: np.ndarray


def paired_statistics(cfg):
    t0, u0 = _t_u(spectra(cfg, "h0"))
    t1, u1 = _t_u(spectra(cfg, "h1"))
    return PairedStatistics(t0, u0, t1, u1)


def default_threshold_grid(null_stat, levels=None):
    """Thresholds at empirical null quantiles, bracketed by -inf and +inf."""
    if levels is None:
        levels = np.linspace(0.0, 1.0, 201)[1:-1]
    q = np.quantile(null_stat, 1.0 - np.asarray(levels), method="higher")
    return np.concatenate([[np.inf], np.sort(q)[::-1], [-np.inf]])


def _roc(kind, null_stat, alt_stat, grid):
    grid = np.sort(np.asarray(grid, dtype=float))[::-1]
    pfa = np.array([np.mean(null_stat > g) for g in grid])
    power = np.array([np.mean(alt_stat > g) for g in grid])
    return RocCurve(kind, grid, pfa, power, null_stat.size, alt_stat.size)


def roc_curves(cfg, threshold_grid=None, stats_=None):
    """Empirical ROC curves of both tests on the same trials.

    Parameters
    ----------
    threshold_grid : tuple of array_like, optional
        ``(grid_T, grid_U)``. Each defaults to :func:`default_threshold_grid`
        of that statistic's null sample.
    stats_ : PairedStatistics, optional
        Precomputed statistics; drawn from ``cfg`` when absent.
    """
    s = stats_ if stats_ is not None else paired_statistics(cfg)
    if threshold_grid is None:
        grid_t, grid_u = default_threshold_grid(s.t_h0), default_threshold_grid(s.u_h0)
    else:
        grid_t, grid_u = threshold_grid
    return _roc("glrt", s.t_h0, s.t_h1, grid_t), _roc("condition", s.u_h0, s.u_h1, grid_u)


@dataclass(frozen=True)
class MatchedComparison:
    """Power of both tests at matched empirical false-alarm levels."""

    levels: np.ndarray
    power_glrt: np.ndarray
    power_cond: np.ndarray
    difference: np.ndarray
    paired_se: np.ndarray


def compare_at_levels(s, levels):
    """Compare the tests at each level using empirical null quantiles.

    ``paired_se`` is the standard error of the mean per-trial difference of
    detection indicators, which exploits the shared alternative draws.
    """
    levels = np.asarray(levels, dtype=float)
    n = s.t_h1.size
    pt, pu, d, se = [], [], [], []
    for a in levels:
        tt = np.quantile(s.t_h0, 1.0 - a, method="higher")
        tu = np.quantile(s.u_h0, 1.0 - a, method="higher")
        it = (s.t_h1 > tt).astype(float)
        iu = (s.u_h1 > tu).astype(float)
        diff = it - iu
        pt.append(it.mean())
        pu.append(iu.mean())
        d.append(diff.mean())
        se.append(diff.std(ddof=1) / np.sqrt(n) if n > 1 else np.inf)
    return MatchedComparison(levels, np.array(pt), np.array(pu), np.array(d), np.array(se))


def tw_fluctuation_check(cfg, hypothesis="h0"):
    """Kolmogorov distance between centred largest eigenvalues and Tracy-Widom.

    The noise variance is treated as known, so eigenvalues are divided by
    ``cfg.sigma2`` before centring. ``hypothesis="h1"`` gives a negative
    control: above the detection threshold the top eigenvalue leaves the
    bulk edge and the distance becomes large.
    """
    eigs = spectra(cfg, hypothesis) / cfg.sigma2
    lam1, _ = center_statistics(eigs, cfg.K, cfg.N)
    return float(stats.kstest(lam1, default_table().cdf).statistic)


def mean_top_eigenvalue(cfg):
    """Sample mean of ``lambda_1 / sigma2`` under the alternative."""
    return float(np.mean(spectra(cfg, "h1")[:, 0]) / cfg.sigma2)
