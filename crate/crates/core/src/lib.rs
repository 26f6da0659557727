//! Exact polyhedral tools for set-valued optimization on finite data:
//! an LP oracle, cone and polytope geometry, the nonconvex separation
//! functional, lower-boundedness classification of polyhedral ranges, and
//! a certified Ekeland-type descent on finite metric spaces.
//!
//! All data is stored as [`num_rational::BigRational`]. The LP backend
//! ([`Backend::Exact`] or [`Backend::Float`]) only affects how linear
//! programs are solved.

pub mod boundedness;
pub mod evp;
pub mod geometry;
pub mod lp;
pub mod random;
pub mod rational;
pub mod scalarization;

pub use boundedness::{classify, BoundednessError, BoundednessReport, Candidate, HLower};
pub use evp::{
    EvpCertificate, EvpError, EvpProblem, FiniteMetricSpace, Mode, PointId, SetValuedMapTable,
    VerificationReport,
};
pub use geometry::{ConeGen, GeometryError, Piece, Polytope, VPolyhedralUnion};
pub use lp::{Backend, LinearProgram, LpError, LpResult, LpStatus, Objective};
pub use rational::{Rat, Vector};
pub use scalarization::{ExtendedReal, ScalarizationError, SeparationFunctional};
