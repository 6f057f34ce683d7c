//! Explicit ReLU generators for `n`-tiled histogram distributions on the unit
//! square.
//!
//! Given a histogram `P` and an accuracy `epsilon`, [`pushforward::build_phi`]
//! assembles a network `phi: R -> R^2` such that pushing `U[0,1]` through it
//! lands within `epsilon` of `P` in Wasserstein-1 distance. The
//! [`transport`] module certifies that distance numerically and [`bounds`]
//! evaluates the matching size lower bounds.

pub mod bounds;
pub mod error;
pub mod histogram;
pub mod pushforward;
pub mod pwl;
pub mod relunet;
pub mod transport;

pub use error::{Error, Result};
pub use histogram::{Histogram1D, Histogram2D};
pub use pushforward::{build_phi, build_phi_baseline, BuildReport, Variant};
pub use pwl::PiecewiseAffine;
pub use relunet::{AffineLayer, PieceDecomposition, ReluNet};
