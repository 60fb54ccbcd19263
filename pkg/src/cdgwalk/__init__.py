"""Mixing analysis of the random process X_{n+1} = 2 X_n + b_n (mod p)."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .model import (
    CDGError,
    DistVector,
    ModulusSpec,
    StepDistribution,
    TvCurve,
    tv_between,
    tv_to_uniform,
    validate_step,
)
from .exact import (
    BudgetExceededError,
    MixReport,
    b0_equivalence_triple,
    case1_upper_bound,
    dft_coefficient,
    distribution_at,
    evolve_step,
    mixing_time,
    tv_curve,
)
from .spectral import (
    Case1DegenerateError,
    LowerBoundCertificate,
    SpectralSummary,
    chebyshev_certificate,
    claim_ratio,
    fact_checks,
    g_interval_sup,
    g_magnitude,
    hat_p_n,
    phi_factor,
    pi1_beta_trend,
    pi_product,
    r_schedule,
    separating_f,
    spectral_summary,
    unit_root_power,
)
from .montecarlo import (
    EmpiricalMoment,
    SamplerConfig,
    empirical_event_bound,
    empirical_f_moment,
    sample_final_state,
)
