"""Edgeworth expansions for sums driven by finite-state Markov chains.

The pipeline: a model (Markov chain, i.i.d. law or discretized interval
map) yields a family of twisted transfer operators; jets of the leading
eigenvalue yield the asymptotic parameters; those yield the polynomial
families of the expansion, which the evaluation layer turns into CDF,
pmf and weak-form approximations checked against exact oracles.
"""

from .errors import (
    EdgeworthError,
    OracleInfeasible,
    OracleUnavailable,
    QuadratureNotConverged,
    TableTooLarge,
    TooManyValues,
    ValidationError,
)
from .expansion import (
    AsymptoticParams,
    ExpansionSet,
    asymptotic_params,
    build_expansion,
    expansion_for_model,
)
from .jets import BivariateSeries, Jet, Polynomial
from .models import (
    BUNDLED_MODELS,
    IidMomentModel,
    MarkovModel,
    UlamModel,
    bundled_model,
    diophantine_scan,
    iid_model,
    markov_model,
    pmf_moments,
    ulam_model,
)
from .oracle import (
    ExactDistribution,
    dp_pmf,
    enum_distribution,
    erf,
    erfc,
    exact_moments,
    kolmogorov_distance,
    mc_sample,
    normal_cdf,
    normal_density,
)
from .spectral import (
    PerronBase,
    SpectralJets,
    build_operator_family,
    eigen_perturbation,
    evaluate_family,
    norm_decay_scan,
    perron_base,
)
from .evaluate import (
    ConvergenceReport,
    ModDevResult,
    TestFunction,
    averaged,
    cdf_callable,
    convergence_study,
    edgeworth_cdf,
    exact_distribution,
    lattice_pmf,
    lclt_estimate,
    lclt_window,
    moddev_ratio,
    simpson_integral,
    weak_global,
    weak_local,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticParams",
    "BUNDLED_MODELS",
    "BivariateSeries",
    "ConvergenceReport",
    "EdgeworthError",
    "ExactDistribution",
    "ExpansionSet",
    "IidMomentModel",
    "Jet",
    "MarkovModel",
    "ModDevResult",
    "OracleInfeasible",
    "OracleUnavailable",
    "PerronBase",
    "Polynomial",
    "QuadratureNotConverged",
    "SpectralJets",
    "TableTooLarge",
    "TestFunction",
    "TooManyValues",
    "UlamModel",
    "ValidationError",
    "asymptotic_params",
    "averaged",
    "build_expansion",
    "build_operator_family",
    "bundled_model",
    "cdf_callable",
    "convergence_study",
    "diophantine_scan",
    "dp_pmf",
    "edgeworth_cdf",
    "eigen_perturbation",
    "enum_distribution",
    "erf",
    "erfc",
    "evaluate_family",
    "exact_distribution",
    "exact_moments",
    "expansion_for_model",
    "iid_model",
    "kolmogorov_distance",
    "lattice_pmf",
    "lclt_estimate",
    "lclt_window",
    "markov_model",
    "mc_sample",
    "moddev_ratio",
    "norm_decay_scan",
    "normal_cdf",
    "normal_density",
    "perron_base",
    "pmf_moments",
    "simpson_integral",
    "ulam_model",
    "weak_global",
    "weak_local",
]
