"""Pseudospectral simulation and dyadic-frequency (Besov-norm) analysis of
one-dimensional hyperbolic systems with partial damping."""

from .dyadic import (
    CutoffProfile,
    DyadicDecomposition,
    FrequencySplit,
    NormSpec,
    besov_norm,
    block,
    build,
    default_profile,
    get_decomposition,
    highpass,
    hybrid_data_norm,
    j_threshold,
    lowpass,
    lp_norm,
    smoothing,
)
from .errors import (
    AlignmentError,
    BlowupDetected,
    ConfigError,
    ContractError,
    DomainError,
    EmptyFieldError,
    FitError,
    GridError,
    RangeError,
)
from .functionals import (
    DecayExponents,
    DecayFit,
    FunctionalSeries,
    Trajectory,
    X_p_lambda,
    besov_series,
    damped_mode,
    decay_fit,
    lyapunov,
    predicted_decay,
    simulate,
    stability_metric,
)
from .models import (
    EulerConfig,
    EulerModel,
    GeneralConfig,
    GeneralModel,
    PressureLaw,
    ToyConfig,
    ToyModel,
    G_of_n,
    euler_rhs,
    general_rhs,
    linear_spectrum,
    ltm_rhs,
    make_initial_data,
    n_from_rho,
    normalize_general,
    rescale_solution,
    rho_from_n,
    toy_rhs,
)
from .spectral import (
    Field,
    GridSpec,
    SystemState,
    dealias_product,
    derivative,
    dilate,
    resample,
    step,
    transform,
)

__version__ = "0.1.0"
