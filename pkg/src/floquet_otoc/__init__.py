"""Out-of-time-order correlators and eigenphase statistics of kicked
quenched-field Ising chains.

The package evolves Heisenberg-picture observables under kicked transverse
plus longitudinal field protocols, measures OTOC growth and saturation,
and scores nearest-neighbor eigenphase spacing statistics of the cumulative
unitary in the reflection-even sector.
"""

from .analysis import (
    FitPolicy,
    IprResult,
    PowerLawFit,
    SaturationStats,
    fit_power_law,
    ipr_of_amplitudes,
    ipr_of_otoc,
    normalize_ipr_sweep,
    saturation_stats,
)
from .backends import backend_name, get_backend
from .evolution import (
    ChainParams,
    EvolutionState,
    FloquetStep,
    HeisenbergConvention,
    NormDriftError,
    build_kick,
    cumulative_unitary,
)
from .otoc import (
    ObservableFamily,
    ObservableSpec,
    OtocSeries,
    c_infinity,
    make_observables,
    otoc_point,
    run_otoc,
)
from .schedules import KickFields, ProtocolTag, QuenchProtocol, fields_at_kick
from .spectral import (
    NnsdScore,
    SpacingEnsemble,
    Verdict,
    eigenphase_spacings,
    nnsd_at_kicks,
    palindrome_projector,
    project_unitary,
    score_nnsd,
)
from .sweeps import (
    AnalysisToggles,
    FigureRecipe,
    GridResult,
    RunConfig,
    RunResult,
    figure_recipe,
    run_grid,
    run_point,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisToggles",
    "ChainParams",
    "EvolutionState",
    "FigureRecipe",
    "FitPolicy",
    "FloquetStep",
    "GridResult",
    "HeisenbergConvention",
    "IprResult",
    "KickFields",
    "NnsdScore",
    "NormDriftError",
    "ObservableFamily",
    "ObservableSpec",
    "OtocSeries",
    "PowerLawFit",
    "ProtocolTag",
    "QuenchProtocol",
    "RunConfig",
    "RunResult",
    "SaturationStats",
    "SpacingEnsemble",
    "Verdict",
    "backend_name",
    "build_kick",
    "c_infinity",
    "cumulative_unitary",
    "eigenphase_spacings",
    "fields_at_kick",
    "figure_recipe",
    "fit_power_law",
    "get_backend",
    "ipr_of_amplitudes",
    "ipr_of_otoc",
    "make_observables",
    "nnsd_at_kicks",
    "normalize_ipr_sweep",
    "otoc_point",
    "palindrome_projector",
    "project_unitary",
    "run_grid",
    "run_otoc",
    "run_point",
    "saturation_stats",
    "score_nnsd",
    "__version__",
]
