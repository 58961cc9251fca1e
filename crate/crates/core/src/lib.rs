//! Modeling diagnostics for panel indicator data: long-CSV ingest, Box-Cox
//! preprocessing, VIF collinearity filtering, least-squares fits with
//! condition-number and normality diagnostics, stochastic indicator-subset
//! search, and PCA with scree/loading analysis.
//!
//! Everything stochastic runs off an explicit 64-bit seed through a pinned
//! generator ([`rng::Xoshiro256StarStar`]), so identical inputs give
//! identical outputs.

pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod ols;
pub mod panel;
pub mod pca;
pub mod rng;
pub mod search;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
