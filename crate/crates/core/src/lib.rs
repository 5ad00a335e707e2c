//! Graph polynomial convolution networks (GPCN) and their relatives.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: CSR adjacency, normalization, homophily measures and spectra.
//! - [`autodiff`]: a small reverse-mode tape over dense matrices.
//! - [`models`]: forward passes for the GPCN family and the baselines.
//! - [`train`]: splits, Adam, full-batch training, grid and ablation runs.
//! - [`bounds`]: numeric evaluation of the transductive generalization bounds.
//! - [`data`]: dataset formats, synthetic SBM graphs and external adapters.
//! - [`verify`]: the invariant suite behind `gpcn verify`.

pub mod autodiff;
pub mod bounds;
pub mod data;
mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod train;
pub mod verify;

pub use error::{Error, ParseError, Result};
pub use linalg::Matrix;
