//! Checks of the analytical properties of the scheduling problem on solved
//! instances: shadow-price structure, storage complementarity, parametric
//! affinity and envelope relations.

mod cases;
mod duals;
mod props;
mod report;
mod sensitivity;
mod solved;

pub use cases::{classify_cer, classify_rec, CaseRow, CaseTable, Certificate};
pub use duals::NamedDuals;
pub use props::{check_prop1, rps_priority_check};
pub use report::{PropertyReport, PropertyStatus, Witness, PROPERTY_IDS};
pub use sensitivity::{
    affine_sensitivity, envelope_check, fingerprint, tie_break, AffinePoint, AffineReport,
    Fingerprint, Param, Segment,
};
pub use solved::{solve_model, solve_problem, AnalysisError, SolvedModel};

/// A multiplier counts as positive above this.
pub const MULT_TOL: f64 = 1e-6;
/// A trade is at its cap when within this fraction of it.
pub const CAP_REL_TOL: f64 = 1e-6;
/// Relative tolerance of the price identities.
pub const REL_TOL: f64 = 1e-6;
/// A constraint is active when its slack is below `FINGERPRINT_TOL·(1+|bound|)`.
pub const FINGERPRINT_TOL: f64 = 1e-7;
/// Allowed second difference per unit of scale inside one critical region.
pub const AFFINE_TOL: f64 = 1e-6;
/// Allowed envelope slope error per unit of `1+|slope|`.
pub const ENVELOPE_TOL: f64 = 1e-4;
/// Largest simultaneous charge and discharge tolerated when the RPS binds.
pub const PROP1_TOL: f64 = 1e-7;
