//! Extremal statistics of random beta polygons in the unit disk.
//!
//! The crate samples i.i.d. points from the beta density
//! `(β+1)/π · (1−|x|²)^β` on the unit disk, computes the U-max statistic
//! (largest perimeter or area over all `n`-point sub-polygons) exactly, and
//! evaluates the constants of the Weibull limit law for the scaled deficiency
//! `N^A · (M − H_N)`. The [`montecarlo`] module checks those limits against
//! simulation.
//!
//! Geometry and kernel code is generic over a [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, which is what the sampler and
//! the simulation harness use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod limits;
pub mod linalg;
pub mod montecarlo;
pub mod output;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::Objective;
pub use scalar::Scalar;

pub type DiskPoint = geometry::DiskPoint<f64>;
pub type PolarPoint = geometry::PolarPoint<f64>;
pub type PolygonChain = geometry::PolygonChain;
pub type UMaxResult = geometry::UMaxResult<f64>;
pub type KernelSpec = kernels::KernelSpec<f64>;
pub type Maximizer = kernels::Maximizer<f64>;
pub type MaximizerAnalysis = kernels::MaximizerAnalysis<f64>;
