//! Mirror descent on linearly separable classification problems.
//!
//! The crate integrates mirror descent / mirror flow for exponential-tailed
//! losses, computes the horizon function `φ∞` of a mirror potential (in closed
//! limit form for separable potentials and from normalized sublevel sets for
//! general ones), solves the `φ∞`-max-margin problem and checks that the
//! normalized iterates line up with its solution.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what every
//! documented tolerance refers to.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod flow;
pub mod horizon;
pub mod linalg;
pub mod losses;
pub mod margin;
pub mod potentials;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type ScalarPotential = potentials::ScalarPotential<f64>;
pub type VectorPotential = potentials::VectorPotential<f64>;
pub type Loss = losses::Loss<f64>;
pub type Dataset = data::Dataset<f64>;
pub type BlobSpec = data::BlobSpec<f64>;
pub type FlowConfig = flow::FlowConfig<f64>;
pub type Trajectory = flow::Trajectory<f64>;
pub type Gauge = horizon::Gauge<f64>;
pub type HorizonShapeProbe = horizon::HorizonShapeProbe<f64>;
pub type MarginProblem = margin::MarginProblem<f64>;
pub type MarginSolution = margin::MarginSolution<f64>;
