//! Boundary-layer similarity problems on semi-infinite domains, solved by
//! the differential transform method with Padé closure at infinity.
//!
//! The pipeline for a problem is:
//!
//! 1. [`dtm::generate`] turns trial initial derivatives into Taylor series;
//! 2. [`pade::build`] forms diagonal rational approximants of those series;
//! 3. [`rootfind::solve_problem`] drives the approximants' limits at
//!    infinity to the far-field boundary values.
//!
//! [`shooting`] is an independent RK4 shooting solver used to check the
//! results.

pub mod dtm;
pub mod error;
pub mod pade;
pub mod profile;
pub mod rootfind;
pub mod series;
pub mod shooting;

pub use dtm::{DtmSolution, Problem, ProblemParams, RecurrenceMode};
pub use error::{Approximant, Error, Result, StopReason};
pub use pade::RationalApproximant;
pub use profile::{Profile, ProfileRow};
pub use rootfind::{ClosureConfig, NewtonSettings, Provenance, SolveResult};
pub use series::TruncatedSeries;
pub use shooting::ShootConfig;
