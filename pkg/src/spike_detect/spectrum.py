"""Observations, sample covariance, Hermitian eigenvalues and test statistics.

All statistics take eigenvalues along the last axis, so a stack of spectra
from a Monte Carlo batch goes through the same functions as a single one.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateDataError, DomainError

# eigenvalues this far below zero (relative to the largest) are rounding noise
NEG_EIG_RTOL = 1e-12


@dataclass(frozen=True)
class SnapshotMatrix:
    """K x N complex observation matrix (sensors by snapshots)."""

    entries: np.ndarray
    K: int = field(init=False)
    N: int = field(init=False)

    def __post_init__(self):
        y = np.array(self.entries, dtype=complex)
        if y.ndim != 2:
            raise DomainError(f"observations must be a 2-D array, got shape {y.shape}")
        k, n = y.shape
        if k < 2 or n < k:
            raise DomainError(f"need K >= 2 and N >= K, got K={k}, N={n}")
        if not np.all(np.isfinite(y)):
            raise DomainError("observations contain non-finite entries")
        y.setflags(write=False)
        object.__setattr__(self, "entries", y)
        object.__setattr__(self, "K", k)
        object.__setattr__(self, "N", n)

    @property
    def c(self):
        return self.K / self.N


def _as_array(y):
    return y.entries if isinstance(y, SnapshotMatrix) else np.asarray(y, dtype=complex)


def sample_covariance(y):
    """``R = Y Y^H / N``, symmetrised. Accepts stacks of shape (..., K, N)."""
    y = _as_array(y)
    n = y.shape[-1]
    r = y @ np.conj(np.swapaxes(y, -1, -2)) / n
    return 0.5 * (r + np.conj(np.swapaxes(r, -1, -2)))


def _off_norm(a):
    return np.linalg.norm(a - np.diag(np.diag(a)))


def jacobi_eigh(r, tol=1e-13, max_sweeps=30):
    """Cyclic complex Jacobi diagonalisation of one Hermitian matrix.

    Each rotation first strips the phase of the pivot ``r[p, q]`` and then
    applies the real symmetric Schur rotation. Sweeps stop once the
    off-diagonal Frobenius norm falls below ``tol * ||R||_F``.

    Returns
    -------
    eigenvalues : ndarray
        Unsorted real eigenvalues (the final diagonal).
    vectors : ndarray
        Unitary matrix ``V`` with ``R V = V diag(eigenvalues)``.
    """
    a = np.array(r, dtype=complex)
    k = a.shape[0]
    v = np.eye(k, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(k), v
    target = tol * scale
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= target:
            return np.real(np.diag(a)).copy(), v
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                cs = 1.0 / np.hypot(1.0, t)
                sn = t * cs
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on rows/cols p, q
                jpp, jpq = cs, sn
                jqp, jqq = -sn * np.conj(phase), cs * np.conj(phase)
                colp, colq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = colp * jpp + colq * jqp
                a[:, q] = colp * jpq + colq * jqq
                rowp, rowq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = np.conj(jpp) * rowp + np.conj(jqp) * rowq
                a[q, :] = np.conj(jpq) * rowp + np.conj(jqq) * rowq
                a[p, q] = a[q, p] = 0.0
                a[p, p], a[q, q] = a[p, p].real, a[q, q].real
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * jpp + vq * jqp
                v[:, q] = vp * jpq + vq * jqq
    off = _off_norm(a)
    if off <= target:
        return np.real(np.diag(a)).copy(), v
    raise ConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps: off-diagonal norm {off:.3e}, "
        f"||R||_F {scale:.3e}, cond estimate {np.linalg.cond(r):.3e}"
    )


def hermitian_eigenvalues(r, method="lapack", tol=1e-13, max_sweeps=30):
    """Eigenvalues of a Hermitian matrix, descending along the last axis.

    Parameters
    ----------
    r : array_like
        Hermitian matrix, or a stack of shape (..., K, K) for ``method="lapack"``.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigvalsh``; ``"jacobi"`` runs
        :func:`jacobi_eigh` on a single matrix.
    """
    r = np.asarray(r)
    if r.ndim < 2 or r.shape[-1] != r.shape[-2]:
        raise DomainError(f"expected a square matrix, got shape {r.shape}")
    asym = np.max(np.abs(r - np.conj(np.swapaxes(r, -1, -2))), initial=0.0)
    if asym > 1e-12 * max(np.max(np.abs(r), initial=0.0), 1e-300):
        raise DomainError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    if method == "lapack":
        w = np.linalg.eigvalsh(r)
    elif method == "jacobi":
        if r.ndim != 2:
            raise DomainError("Jacobi works on one matrix at a time")
        w = np.sort(jacobi_eigh(r, tol=tol, max_sweeps=max_sweeps)[0])
    else:
        raise DomainError(f"unknown eigen-solver {method!r}")
    return w[..., ::-1]


def clamp_eigenvalues(eigs):
    """Zero out tiny negative eigenvalues; reject genuinely negative ones."""
    eigs = np.asarray(eigs, dtype=float)
    floor = -NEG_EIG_RTOL * np.max(np.abs(eigs), axis=-1, keepdims=True)
    if np.any(eigs < floor):
        raise DomainError("covariance has a negative eigenvalue beyond rounding")
    return np.maximum(eigs, 0.0)


def glr_statistic(eigs, trace_mean=None):
    """``T = lambda_1 / (tr R / K)``. Eigenvalues must be sorted descending."""
    eigs = np.asarray(eigs, dtype=float)
    if trace_mean is None:
        trace_mean = np.mean(eigs, axis=-1)
    trace_mean = np.asarray(trace_mean, dtype=float)
    if np.any(trace_mean <= 0.0):
        raise DegenerateDataError("observations have zero energy; the statistic is undefined")
    return eigs[..., 0] / trace_mean


def log_glr(t, K, N):
    """Logarithm of the generalised likelihood ratio as a function of ``T``.

    ``(K - 1) N log(1 - 1/K) - N log T - (K - 1) N log(1 - T/K)``. It is
    increasing on ``(1, K)`` and vanishes as ``T -> 1``, where the rank-one
    fit gains nothing over white noise.
    """
    t = np.asarray(t, dtype=float)
    if K < 2 or N < 1:
        raise DomainError(f"need K >= 2 and N >= 1, got K={K}, N={N}")
    if np.any(t <= 1.0) or np.any(t >= K):
        raise DomainError(f"T must lie in (1, {K})")
    out = (K - 1) * N * np.log1p(-1.0 / K) - N * np.log(t) - (K - 1) * N * np.log1p(-t / K)
    return out[()] if out.ndim == 0 else out


def condition_number(eigs):
    """``U = lambda_1 / lambda_K``. Eigenvalues must be sorted descending."""
    eigs = np.asarray(eigs, dtype=float)
    low = eigs[..., -1]
    if np.any(low <= 0.0):
        raise DegenerateDataError("smallest eigenvalue is zero; the condition number is undefined")
    return eigs[..., 0] / low


def _check_ratio(K, N):
    if not (K >= 1 and N > K):
        raise DomainError(f"K/N must lie in (0, 1), got K={K}, N={N}")
    return K / N


def top_scale(c):
    """``b_N = (1 + sqrt(c)) (1/sqrt(c) + 1)^(1/3)``."""
    sc = np.sqrt(c)
    return (1.0 + sc) * np.cbrt(1.0 / sc + 1.0)


def bottom_scale(c):
    """``(sqrt(c) - 1)(1/sqrt(c) - 1)^(1/3)``; negative for ``c < 1``."""
    sc = np.sqrt(c)
    return (sc - 1.0) * np.cbrt(1.0 / sc - 1.0)


def center_statistics(eigs, K, N):
    """Edge-centred and rescaled extreme eigenvalues ``(Lambda_1, Lambda_K)``.

    Under the null both converge to the Tracy-Widom law.
    """
    c = _check_ratio(K, N)
    eigs = np.asarray(eigs, dtype=float)
    sc = np.sqrt(c)
    n23 = N ** (2.0 / 3.0)
    lam1 = n23 * (eigs[..., 0] - (1.0 + sc) ** 2) / top_scale(c)
    lamk = n23 * (eigs[..., -1] - (1.0 - sc) ** 2) / bottom_scale(c)
    return lam1, lamk


@dataclass(frozen=True)
class SpectrumSummary:
    """Spectrum of the sample covariance and the statistics built on it."""

    eigenvalues: np.ndarray
    trace_mean: float
    t_stat: float
    u_stat: float
    lambda1_centered: float
    lambdaK_centered: float


def summarize(y, method="lapack"):
    """Run the full spectral pipeline on one snapshot matrix.

    ``u_stat`` is ``inf`` when the smallest eigenvalue is exactly zero.
    """
    if not isinstance(y, SnapshotMatrix):
        y = SnapshotMatrix(y)
    r = sample_covariance(y)
    eigs = clamp_eigenvalues(hermitian_eigenvalues(r, method=method))
    trace_mean = float(np.real(np.trace(r))) / y.K
    t = float(glr_statistic(eigs, trace_mean))
    u = float(eigs[0] / eigs[-1]) if eigs[-1] > 0 else np.inf
    if y.N > y.K:
        lam1, lamk = (float(v) for v in center_statistics(eigs, y.K, y.N))
    else:
        lam1 = lamk = np.nan
    return SpectrumSummary(eigs, trace_mean, t, u, lam1, lamk)
