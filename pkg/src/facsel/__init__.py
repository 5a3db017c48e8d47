"""Objective Bayesian variable selection with categorical factors.

Candidate predictors may mix numeric variables with factors; factors enter
through the full (rank-deficient) indicator coding, one column per level,
and Bayes factors are computed directly on that coding by replacing the
column count with the design rank.  Model-space priors correct for
multiplicity hierarchically: first over which predictors are active, then
over the active-level pattern within each active factor.
"""

from .bayesfactor import (BayesFactorEngine, BayesFactorValue, bayes_factor,
                          bf_invariance_report)
from .design import (DesignAssembly, FactorSpec, ModelGamma, PredictorSchema,
                     assemble, dumps_schema, ingest, load_schema, loads_schema,
                     model_design, rank_and_sse, save_schema)
from .errors import (CapacityError, ConstructionError, DataError,
                     DegenerateDataError, DomainError, FacselError,
                     NumericError, SchemaError)
from .modelspace import ModelPriorScheme, PriorMassAudit, prior_mass_audit
from .numerics import (HyperGPrior, LogValue, bayes_factor_quadrature,
                       bayes_factor_robust_closed, gauss_2f1, gauss_2f1_euler)
from .posterior import (PosteriorReport, baseline_sensitivity_demo,
                        enumerate_posterior, factor_inclusion, level_inclusion,
                        variable_inclusion)
from .validation import (GIConstruction, build_nullspace_psd,
                         check_generalized_inverse, explicit_prior_log_bf,
                         marginal_via_explicit_prior, run_validation,
                         testability_check)

__version__ = "0.1.0"

__all__ = [
    "BayesFactorEngine", "BayesFactorValue", "bayes_factor", "bf_invariance_report",
    "DesignAssembly", "FactorSpec", "ModelGamma", "PredictorSchema",
    "assemble", "dumps_schema", "ingest", "load_schema", "loads_schema",
    "model_design", "rank_and_sse", "save_schema",
    "CapacityError", "ConstructionError", "DataError", "DegenerateDataError",
    "DomainError", "FacselError", "NumericError", "SchemaError",
    "ModelPriorScheme", "PriorMassAudit", "prior_mass_audit",
    "HyperGPrior", "LogValue", "bayes_factor_quadrature",
    "bayes_factor_robust_closed", "gauss_2f1", "gauss_2f1_euler",
    "PosteriorReport", "baseline_sensitivity_demo", "enumerate_posterior",
    "factor_inclusion", "level_inclusion", "variable_inclusion",
    "GIConstruction", "build_nullspace_psd", "check_generalized_inverse",
    "explicit_prior_log_bf", "marginal_via_explicit_prior", "run_validation",
    "testability_check",
    "__version__",
]
