//! Exact equilibrium computation for the two-stage facility location game
//! with atomic clients on a vertex-weighted directed host graph.
//!
//! All quantities live in [`Scalar`], the ordered field Q(√5), so both
//! rational instances and golden-ratio constructions are handled without
//! rounding.

pub mod classes;
pub mod client_eq;
pub mod error;
pub mod flow;
pub mod game;
pub mod instances;
pub mod io;
pub mod lp;
pub mod policy;
pub mod reduction;
pub mod scalar;
pub mod spe;
pub mod welfare;

pub use classes::{class_set, mns, mns_bruteforce, Class, ClassSet};
pub use client_eq::{
    all_pure_equilibria, all_rounded_assignments, enumerate_equilibria, favoring_profile, greedy_weighted_equilibrium,
    is_rounded, rounded_profile, EnumGuard, EquilibriumPolytope, PureAssignment,
};
pub use error::{FlgError, Result};
pub use game::{
    attraction_range, equilibrium_violations, facility_loads, participation, shopping_range, verify_client_equilibrium,
    waiting_time, ClientProfile, EqVerdict, FacilityId, HostGraph, Instance, LoadReport, Permutation, Placement,
    VertexId,
};
pub use instances::{gen_paper_instance, paper_placement, random_instance, reach_table, PaperInstance, RandomSpec};
pub use io::{parse_instance, serialize_instance, to_dot, ResultDocument, ResultValue};
pub use policy::FullProfilePolicy;
pub use reduction::{reduce_sat, CnfFormula, Reduction};
pub use scalar::Scalar;
pub use spe::{
    find_spe, k_approx_spe, spe_exists, verify_spe, Alpha, PartialCertificate, SpeDecision, SpeGuard, SpeRun,
    SpeVerdict,
};
pub use welfare::{fig8_certificate, optimum_placement, poa_certificate, WelfareReport};
