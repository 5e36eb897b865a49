//! Simplicial decomposition of the nonnegative part of a complete toric
//! variety and its homeomorphism with the closed ball.
//!
//! The combinatorial layer ([`exact`], [`fan`], [`cones`], [`bary`]) works in
//! exact rational arithmetic. The analytic layer ([`charts`], [`homeo`]) uses
//! `f64`. [`complex`] assembles the ball model and the orbit complex, and
//! [`verify`] runs the full check suite on a fan.

pub mod bary;
pub mod bundled;
pub mod charts;
pub mod complex;
pub mod cones;
pub mod exact;
pub mod fan;
pub mod homeo;
pub mod verify;

pub use bary::{enumerate_flags, flag_intersection, Flag, FlagCone, Subdivision};
pub use cones::{dual_cone, hilbert_basis, triangular_generators, DualCone, SemigroupGens};
pub use fan::{parse_and_validate, Cone, Fan, FanDescription, FanError};
pub use charts::{Atlas, Chart, DeltaPoint, ToricPoint};
pub use complex::{BallModel, OrbitComplex};
pub use verify::{Report, VerifyConfig};
