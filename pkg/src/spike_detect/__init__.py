"""Detection of a single source with an uncalibrated sensor array.

The generalised likelihood ratio test (GLRT) thresholds the largest sample
covariance eigenvalue over the mean eigenvalue; the condition-number test
thresholds the ratio of extreme eigenvalues. Both are calibrated with the
Tracy-Widom law, compared through large-deviation error exponents, and
checked by seeded Monte Carlo.
"""

__version__ = "0.1.0"

from .detectors import (
    Decision,
    cond_decide,
    cond_pvalue,
    cond_threshold,
    cond_weights,
    glrt_decide,
    glrt_pvalue,
    glrt_threshold,
)
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    GridError,
    ParseError,
    SpikeDetectError,
)
from .ldp import (
    CurvePoint,
    LdpContext,
    appendix_G_rho,
    appendix_J_rho,
    ee_curve_T,
    ee_curve_U,
    error_exponent_T,
    error_exponent_U,
    gamma_0,
    gamma_rho,
    high_snr_exponent,
    lambda_spike,
    phi_mp,
    psi,
    rate_I0_plus,
    rate_I_minus,
    rate_Irho_plus,
)
from .mp_law import (
    MPLaw,
    log_potential_minus,
    log_potential_plus,
    mp_expect,
    mp_pdf,
    stieltjes,
    stieltjes_tilde,
)
from .simulate import (
    RocCurve,
    SimConfig,
    empirical_pfa,
    gen_h0,
    gen_h1,
    roc_curves,
    tw_fluctuation_check,
)
from .spectrum import (
    SnapshotMatrix,
    SpectrumSummary,
    center_statistics,
    condition_number,
    glr_statistic,
    hermitian_eigenvalues,
    log_glr,
    sample_covariance,
    summarize,
)
from .tracy_widom import (
    ComboQuantiler,
    TWCdf,
    airy_ai,
    combo_quantile,
    tw2_cdf,
    tw2_isf,
    tw2_pdf,
    tw2_quantile,
    tw2_sf,
)
