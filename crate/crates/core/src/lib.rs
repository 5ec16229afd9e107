//! Numerical verification of nonsymmetric Gaussian correlation inequalities.
//!
//! The crate measures convex bodies under rotationally invariant and product
//! densities, evaluates the objects the proofs are built from (the `f_n`
//! approximants of an indicator, the ball-correlation profile `Phi(t)`, slice
//! decompositions, the FKG inequality, one-dimensional monotone transport)
//! and checks each correlation inequality with explicit standard errors.

pub mod correlation;
pub mod error;
pub mod field;
pub mod geometry;
pub mod integration;
pub mod interp;
pub mod measures;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod search;
pub mod transport;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use geometry::{ConvexBody, Point};
pub use measures::{Measure, MeasureEstimate, ProductDensity, RadialDensity};
pub use report::{CheckReport, Verdict, VerificationReport};
