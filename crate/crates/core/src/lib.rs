//! Explicit multi-peak solutions of the torsion problem `-Laplace(u) = 1`,
//! extraction of the implicitly defined starshaped domains, numerical
//! certificates for their geometric properties, and an independent
//! finite-difference solver for cross-validation on the extracted domain.
//!
//! The crate is organized around five concerns:
//!
//! * [`field`] - closed-form evaluation of the perturbed field, its exact
//!   derivatives, level-curve curvature and asymptotic predictions;
//! * [`geometry`] - marching-squares extraction of level curves and the
//!   domain, superlevel component counting, and the starshape / curvature
//!   certificates;
//! * [`critical`] - Newton enumeration and Morse classification of critical
//!   points;
//! * [`pde`] - Shortley-Weller finite differences on the extracted domain:
//!   torsion and semilinear solves, semi-stability eigenvalues;
//! * [`verify`] - orchestration of the full certificate run and automatic
//!   epsilon selection.
//!
//! All field evaluations are pure functions of immutable data and safe to
//! call concurrently.

pub mod critical;
pub mod error;
pub mod export;
pub mod field;
pub mod geometry;
pub mod pde;
pub mod poly;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use field::{
    curvature, predictions, radial_derivative, AsymptoticPrediction, ImplicitField, RadialField,
    Rect, RootConfig, ScalarField, StripField,
};
pub use poly::PolyCoeffs;

/// Version tag embedded in every JSON artifact.
pub const SCHEMA_VERSION: &str = "torsion-landscape/1";
