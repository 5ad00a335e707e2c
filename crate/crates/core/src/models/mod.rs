//! Model configurations, parameters and forward passes.
//!
//! Every forward is built from [`crate::autodiff::Tape`] operations, so a
//! single training loop serves all model kinds.

mod checkpoint;
mod config;
mod forward;
mod params;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use config::{binomial, Coefficients, GprInit, LinkAdjacency, ModelConfig, ModelKind, MuParam};
pub use forward::{
    agpcn_forward, agpcn_link_forward, forward, gcn_forward, gpcn_forward_polynomial,
    gpcn_forward_recursive, gpcn_link_forward, gpr_combine, gprgnn_forward, link_forward,
    linkx_forward, mlp_forward, predict, predict_with, sgc_forward, GraphInputs, Mode,
};
pub use params::{
    binomial_theta, init_params, layer_name, theta_for, Dims, ParamVars, ParameterSet, GPR_THETA,
    MU_RAW, THETA, W_A, W_OUT, W_RES,
};
