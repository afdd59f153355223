//! Transformation families over environments, lifting constructors,
//! built-in counterexample candidates, and the randomized checker for the
//! three local-applicability axioms (state locality, no signaling, update
//! commutativity).

mod checks;
mod family;
mod spec;
mod zoo;

pub use checks::{
    check_all, check_no_signaling, check_state_locality, check_update_commutativity,
    merge_fragments, Axiom, AxiomFragment, AxiomReport, InvalidOutputInfo, MaxViolations,
    SamplingConfig, Verdict, Witness,
};
pub use family::{
    compose_families, identity_family, lift_channel, lift_isometry, FamilyKind, TransFamily,
};
pub use spec::{FamilySpec, FamilySpecKind};
pub use zoo::{
    constant_mixed, constant_pure, nonlinear_phase, transpose_mixed, zoo_catalog, zoo_family,
    ZooEntry,
};
