"""Network formation among information-gathering agents.

A library and CLI for a link-formation game in which agents hold correlated
information described by an entropic vector, sponsor costly links to gather
more, and optionally choose how much information to produce. Ships exhaustive
equilibrium enumeration, closed-form structural and efficiency predictors
with cross-validation against brute force, and a batch experiment front end.
"""
from .entropy import (
    EntropicVector,
    JointPmf,
    ShannonReport,
    ShannonViolation,
    cond_entropy,
    family_pair_redundancy,
    family_independent,
    family_max_correlated,
    from_joint_pmf,
    kl_total,
    mutual_info,
    subset_entropy,
    subset_mask,
    validate_shannon,
)
from .formation_game import (
    BenefitFunction,
    CostModel,
    GameConfig,
    LinkProfile,
    components,
    is_minimally_connected,
    reachable_set,
    social_welfare,
    topology,
    utility,
)
from .equilibrium import (
    CapExceededError,
    EquilibriumReport,
    best_responses,
    enumerate_nash,
    is_nash,
    is_strict_nash,
    max_information_loss,
    price_of_anarchy,
    social_optimum,
)
from .analytic import (
    ConnectivityRegion,
    Prediction,
    check_component_structure_ne,
    check_strict_ne_structure,
    classify_homogeneous,
    mil_predict,
    poa_monotonicity_sweep,
    poa_predict,
    region_heterogeneous,
    thresholds_homogeneous,
)
from .production import (
    Aggregation,
    FewSweepPoint,
    ProductionGameConfig,
    ProductionProfile,
    aggregate,
    check_sum_equilibrium,
    check_max_equilibrium,
    enumerate_production_ne,
    few_metrics,
    few_sweep,
    h_bar,
    is_production_ne,
    production_utility,
)
from .verification import VerifyReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "BenefitFunction",
    "CapExceededError",
    "ConnectivityRegion",
    "CostModel",
    "EntropicVector",
    "EquilibriumReport",
    "FewSweepPoint",
    "GameConfig",
    "JointPmf",
    "LinkProfile",
    "Prediction",
    "ProductionGameConfig",
    "ProductionProfile",
    "ShannonReport",
    "ShannonViolation",
    "VerifyReport",
    "aggregate",
    "best_responses",
    "check_component_structure_ne",
    "check_strict_ne_structure",
    "check_sum_equilibrium",
    "check_max_equilibrium",
    "classify_homogeneous",
    "components",
    "cond_entropy",
    "enumerate_nash",
    "enumerate_production_ne",
    "family_pair_redundancy",
    "family_independent",
    "family_max_correlated",
    "few_metrics",
    "few_sweep",
    "from_joint_pmf",
    "h_bar",
    "is_minimally_connected",
    "is_nash",
    "is_production_ne",
    "is_strict_nash",
    "kl_total",
    "max_information_loss",
    "mil_predict",
    "mutual_info",
    "poa_monotonicity_sweep",
    "poa_predict",
    "price_of_anarchy",
    "production_utility",
    "reachable_set",
    "region_heterogeneous",
    "run_verification",
    "social_optimum",
    "social_welfare",
    "subset_entropy",
    "subset_mask",
    "thresholds_homogeneous",
    "topology",
    "utility",
    "validate_shannon",
]
