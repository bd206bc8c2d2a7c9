//! Exact-rational tools for generalized absolute continuity on R^n: interval
//! geometry, explicit pathological functions, the recursive square hierarchy,
//! class checkers and witness construction.

pub mod checkers;
pub mod error;
pub mod geometry;
pub mod hierarchy;
pub mod witness;
pub mod zoo;

pub use checkers::{AcClassSpec, ClassKind, MeasureMode, Verdict};
pub use error::{Error, Result};
pub use geometry::{Ball, BallShape, DiagBasis, Disjointness, Interval, Point, Rat, Span};
pub use hierarchy::Hierarchy;
pub use witness::{Outcome, WitnessReport};
pub use zoo::{FunctionSpec, Profile, ScalarQ2, Value};
