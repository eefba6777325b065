//! Numerical machinery for fixed-point lower bounds of Hamiltonian
//! diffeomorphisms on products of tori and complex projective spaces:
//! truncated Fourier loop spaces with the H^{1/2} pairing, lifted
//! quadratic Hamiltonians on the sphere bundle, a modified action
//! functional with a spectral-parameter cutoff, endpoint transversality
//! certificates, Galerkin gradient-flow audits with continuation, a
//! multistart critical-point search, and graded-algebra cup-length
//! arithmetic over F_2.

pub mod action;
pub mod cohomology;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod loops;
pub mod report;

pub use action::{
    action_gradient, action_value, condition_a_certificate, f_lambda, ActionGradient, ChiCutoff,
    ConditionACertificate,
};
pub use cohomology::{
    hyperbolic_conley_index, model_by_name, product_model, proj_model, relative_cup_length,
    rest_point_lower_bound, sphere_model, tensor_product, torus_model, Element, GradedAlgebra,
    GradedModule, Generator, IndexReport,
};
pub use dynamics::{
    audit_isolating_neighborhood, auto_radius, cluster_families, continuation_sweep,
    families_match, flow_step, galerkin_vector_field, multistart_search, solve_critical,
    AuditParams, ContinuationReport, CriticalFamily, IsolationAudit, MultistartConfig,
    SolveOutcome, SolveStatus, TruncationLevel,
};
pub use error::{CoreError, Result};
pub use hamiltonian::{
    lift, resonant_family, resonant_spec, HamiltonianSpec, LiftedHamiltonian, QuadraticForm,
    TrigTerm,
};
pub use loops::{anti_alias_grid, h_half_weight, FourierLoop, ProductPoint};
pub use report::{RunReport, Timings, REPORT_SCHEMA_VERSION};
