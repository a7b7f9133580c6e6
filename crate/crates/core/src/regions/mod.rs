//! Asymptotic rate regions: quantum inner bounds, classical full-CSI capacities,
//! the causal-CSI rate and the auxiliary-distribution search.

pub mod classical;
pub mod fm;
pub mod optimize;
pub mod polygon;
pub mod quantum;

pub use classical::{
    check_degraded, classical_region_evaluate, joint_distribution, superposition_transform,
    total_variation, warden_marginal, AuxiliaryPolicy, ClassicalEvaluation, ClassicalProblem,
    ClassicalWhich, Degradedness, SuperpositionTerms,
};
pub use fm::{fm_check, fourier_motzkin, FmCheck, LinIneq};
pub use optimize::{
    causal_rate_classical, causal_rate_quantum, optimize_auxiliary, project_covert, CausalRate,
    OptimizeResult, SearchConfig,
};
pub use polygon::{BoundaryPoint, Constraint, RateRegion};
pub use quantum::{
    corollary_rates, corollary_rates_from_terms, evaluate_ensemble, region_cc_csk, region_csc_csk,
    CorollaryRates, QuantumEvaluation, RegionTerms,
};
