//! Forward passes. Every model is a composition of tape operations, so one
//! training loop serves them all.

use super::config::{Coefficients, LinkAdjacency, ModelConfig, ModelKind, MuParam};
use super::params::{layer_name, Dims, ParamVars, ParameterSet, GPR_THETA, MU_RAW, THETA, W_A, W_OUT, W_RES};
use crate::autodiff::{Precision, Tape, Var};
use crate::graph::{normalized_adjacency, SparseAdjacency, Symmetrize};
use crate::rng::{streams, CounterRng};
use crate::{Error, Matrix, Result};
use std::sync::Arc;

/// Graph operators and features shared by every forward pass on one dataset.
#[derive(Debug, Clone)]
pub struct GraphInputs {
    pub features: Matrix,
    /// Raw adjacency `A`.
    pub a_raw: Arc<SparseAdjacency>,
    /// `Ã = D̂^{-1/2}(A+I)D̂^{-1/2}`.
    pub a_tilde: Arc<SparseAdjacency>,
    pub num_classes: usize,
}

impl GraphInputs {
    pub fn new(
        features: Matrix,
        a_raw: SparseAdjacency,
        num_classes: usize,
        symmetrize: Symmetrize,
    ) -> Result<Self> {
        if features.rows() != a_raw.n_rows() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                a_raw.n_rows()
            )));
        }
        let a_tilde = normalized_adjacency(&a_raw, symmetrize)?;
        Ok(GraphInputs {
            features,
            a_raw: Arc::new(a_raw),
            a_tilde: Arc::new(a_tilde),
            num_classes,
        })
    }

    /// Uses `a_tilde` as given instead of normalizing `a_raw`.
    pub fn with_operator(
        features: Matrix,
        a_raw: SparseAdjacency,
        a_tilde: SparseAdjacency,
        num_classes: usize,
    ) -> Self {
        GraphInputs {
            features,
            a_raw: Arc::new(a_raw),
            a_tilde: Arc::new(a_tilde),
            num_classes,
        }
    }

    pub fn dims(&self) -> Dims {
        Dims {
            nodes: self.features.rows(),
            features: self.features.cols(),
            classes: self.num_classes,
        }
    }
}

/// Training or evaluation mode for a forward pass.
#[derive(Debug, Clone)]
pub struct Mode {
    pub training: bool,
    rng: CounterRng,
}

impl Mode {
    pub fn eval() -> Self {
        Mode {
            training: false,
            rng: CounterRng::new(0, streams::DROPOUT),
        }
    }

    /// Training mode with dropout masks drawn from `(seed, epoch)`.
    pub fn train(seed: u64, epoch: u64) -> Self {
        Mode {
            training: true,
            rng: CounterRng::new(seed, streams::DROPOUT + epoch),
        }
    }

    fn dropout(&mut self, tape: &mut Tape, x: Var, p: f64) -> Result<Var> {
        tape.dropout(x, p, &mut self.rng, self.training)
    }
}

/// `T` ReLU layers on the features, with dropout after each.
fn feature_layers(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    let mut h = tape.constant(g.features.clone())?;
    for i in 0..cfg.t_layers {
        let w = p.get(&layer_name(i))?;
        h = tape.matmul(h, w)?;
        h = tape.relu(h)?;
        h = mode.dropout(tape, h, cfg.dropout)?;
    }
    Ok(h)
}

pub fn mlp_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    tape.matmul(h, p.get(W_OUT)?)
}

/// `Ã ReLU(Ã X W₀) W₁` for the default depth of two.
pub fn gcn_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let mut h = tape.constant(g.features.clone())?;
    for l in 0..cfg.gcn_layers {
        h = tape.matmul(h, p.get(&format!("gcn{l}"))?)?;
        h = tape.spmm(&g.a_tilde, h)?;
        if l + 1 < cfg.gcn_layers {
            h = tape.relu(h)?;
            h = mode.dropout(tape, h, cfg.dropout)?;
        }
    }
    Ok(h)
}

/// `Ã^p X W`.
pub fn sgc_forward(tape: &mut Tape, g: &GraphInputs, p: &ParamVars, cfg: &ModelConfig) -> Result<Var> {
    let mut x = tape.constant(g.features.clone())?;
    for _ in 0..cfg.sgc_power {
        x = tape.spmm(&g.a_tilde, x)?;
    }
    tape.matmul(x, p.get("w_sgc")?)
}

/// `Σ_{k=0}^{K−1} θ_k Ã^k H₀` by iterated propagation.
pub fn gpr_combine(
    tape: &mut Tape,
    h0: Var,
    a_tilde: &Arc<SparseAdjacency>,
    theta: Var,
    k_terms: usize,
) -> Result<Var> {
    if theta.cols() < k_terms || k_terms == 0 {
        return Err(Error::Shape(format!(
            "{} coefficients for {k_terms} propagation terms",
            theta.cols()
        )));
    }
    let mut power = h0;
    let mut z = tape.scale_by_entry(h0, theta, 0)?;
    for k in 1..k_terms {
        power = tape.spmm(a_tilde, power)?;
        let term = tape.scale_by_entry(power, theta, k)?;
        z = tape.add(z, term)?;
    }
    Ok(z)
}

/// Feature MLP `f_θ(X)` followed by GPR propagation of its class scores.
pub fn gprgnn_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let h0 = tape.matmul(h, p.get(W_OUT)?)?;
    gpr_combine(tape, h0, &g.a_tilde, p.get(GPR_THETA)?, cfg.l_layers)
}

/// `A W` on the raw adjacency.
pub fn link_forward(tape: &mut Tape, g: &GraphInputs, p: &ParamVars) -> Result<Var> {
    tape.spmm(&g.a_raw, p.get("w_link")?)
}

/// Separate adjacency and feature MLPs, mixed as
/// `ReLU(W·concat(h_A, h_X) + h_A + h_X)` and read out linearly.
pub fn linkx_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let a_in = tape.spmm(&g.a_raw, p.get("linkx_a1")?)?;
    let a_hidden = tape.relu(a_in)?;
    let h_a = tape.matmul(a_hidden, p.get("linkx_a2")?)?;

    let x = tape.constant(g.features.clone())?;
    let x_in = tape.matmul(x, p.get("linkx_x1")?)?;
    let x_hidden = tape.relu(x_in)?;
    let h_x = tape.matmul(x_hidden, p.get("linkx_x2")?)?;

    let cat = tape.concat_cols(h_a, h_x)?;
    let mixed = tape.matmul(cat, p.get("linkx_cat")?)?;
    let mixed = tape.add(mixed, h_a)?;
    let mixed = tape.add(mixed, h_x)?;
    let z = tape.relu(mixed)?;
    let z = mode.dropout(tape, z, cfg.dropout)?;
    tape.matmul(z, p.get(W_OUT)?)
}

/// `L` weight-shared steps `X ← X + γ Ã X W_T`.
fn residual_trunk(tape: &mut Tape, h: Var, g: &GraphInputs, w_res: Var, cfg: &ModelConfig) -> Result<Var> {
    let mut x = h;
    for _ in 0..cfg.l_layers {
        let prop = tape.spmm(&g.a_tilde, x)?;
        let mixed = tape.matmul(prop, w_res)?;
        let step = tape.scale(mixed, cfg.gamma)?;
        x = tape.add(x, step)?;
    }
    Ok(x)
}

/// `Σ_{k=0}^{L} c_k Ã^k H W^k` with `W^k` built by repeated multiplication.
fn polynomial_trunk(
    tape: &mut Tape,
    h: Var,
    g: &GraphInputs,
    w_res: Var,
    cfg: &ModelConfig,
    coeffs: Coefficients,
) -> Result<Var> {
    let l = cfg.l_layers;
    let mut sum = h;
    let mut a_power = h;
    let mut w_power = w_res;
    for k in 1..=l {
        a_power = tape.spmm(&g.a_tilde, a_power)?;
        if k > 1 {
            w_power = tape.matmul(w_power, w_res)?;
        }
        let term = tape.matmul(a_power, w_power)?;
        let term = tape.scale(term, coeffs.coefficient(l, k, cfg.gamma))?;
        sum = tape.add(sum, term)?;
    }
    Ok(sum)
}

/// `θ₀ H + Σ_{k=1}^{L} θ_k Ã^k H W^k`, accumulating `P_k = Ã P_{k−1} W`.
fn adaptive_trunk(tape: &mut Tape, h: Var, g: &GraphInputs, w_res: Var, theta: Var, l: usize) -> Result<Var> {
    if theta.shape() != (1, l + 1) {
        return Err(Error::Shape(format!(
            "theta is {}x{}, expected 1x{}",
            theta.rows(),
            theta.cols(),
            l + 1
        )));
    }
    let mut sum = tape.scale_by_entry(h, theta, 0)?;
    let mut p = h;
    for k in 1..=l {
        let prop = tape.spmm(&g.a_tilde, p)?;
        p = tape.matmul(prop, w_res)?;
        let term = tape.scale_by_entry(p, theta, k)?;
        sum = tape.add(sum, term)?;
    }
    Ok(sum)
}

fn mixing_weight(tape: &mut Tape, p: &ParamVars, cfg: &ModelConfig) -> Result<Var> {
    let raw = p.get(MU_RAW)?;
    match cfg.mu_param {
        MuParam::Sigmoid => tape.sigmoid(raw),
        MuParam::Clamp => tape.clamp01(raw),
    }
}

/// `(μ X_{T+L} + (1−μ) Ā W_A) W_{T+1}`.
fn link_head(
    tape: &mut Tape,
    trunk: Var,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    let adj = match cfg.link_adjacency {
        LinkAdjacency::Normalized => &g.a_tilde,
        LinkAdjacency::Raw => &g.a_raw,
    };
    let mut branch = tape.spmm(adj, p.get(W_A)?)?;
    if cfg.link_dropout {
        branch = mode.dropout(tape, branch, cfg.dropout)?;
    }
    let mu = mixing_weight(tape, p, cfg)?;
    let mixed = tape.affine_combine(mu, trunk, branch)?;
    tape.matmul(mixed, p.get(W_OUT)?)
}

/// GPCN through its defining residual recursion.
pub fn gpcn_forward_recursive(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let x = residual_trunk(tape, h, g, p.get(W_RES)?, cfg)?;
    let x = mode.dropout(tape, x, cfg.dropout)?;
    tape.matmul(x, p.get(W_OUT)?)
}

/// GPCN through its closed-form polynomial expansion.
pub fn gpcn_forward_polynomial(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
    coeffs: Coefficients,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let x = polynomial_trunk(tape, h, g, p.get(W_RES)?, cfg, coeffs)?;
    let x = mode.dropout(tape, x, cfg.dropout)?;
    tape.matmul(x, p.get(W_OUT)?)
}

pub fn gpcn_link_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let x = residual_trunk(tape, h, g, p.get(W_RES)?, cfg)?;
    let x = mode.dropout(tape, x, cfg.dropout)?;
    link_head(tape, x, g, p, cfg, mode)
}

pub fn agpcn_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let x = adaptive_trunk(tape, h, g, p.get(W_RES)?, p.get(THETA)?, cfg.l_layers)?;
    let x = mode.dropout(tape, x, cfg.dropout)?;
    tape.matmul(x, p.get(W_OUT)?)
}

pub fn agpcn_link_forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    cfg.check_structure()?;
    let h = feature_layers(tape, g, p, cfg, mode)?;
    let x = adaptive_trunk(tape, h, g, p.get(W_RES)?, p.get(THETA)?, cfg.l_layers)?;
    let x = mode.dropout(tape, x, cfg.dropout)?;
    link_head(tape, x, g, p, cfg, mode)
}

/// Dispatches on `cfg.kind`. GPCN uses the recursive form.
pub fn forward(
    tape: &mut Tape,
    g: &GraphInputs,
    p: &ParamVars,
    cfg: &ModelConfig,
    mode: &mut Mode,
) -> Result<Var> {
    match cfg.kind {
        ModelKind::Mlp => mlp_forward(tape, g, p, cfg, mode),
        ModelKind::Gcn => gcn_forward(tape, g, p, cfg, mode),
        ModelKind::Sgc => sgc_forward(tape, g, p, cfg),
        ModelKind::Gprgnn => gprgnn_forward(tape, g, p, cfg, mode),
        ModelKind::Link => link_forward(tape, g, p),
        ModelKind::Linkx => linkx_forward(tape, g, p, cfg, mode),
        ModelKind::Gpcn => gpcn_forward_recursive(tape, g, p, cfg, mode),
        ModelKind::GpcnLink => gpcn_link_forward(tape, g, p, cfg, mode),
        ModelKind::Agpcn => agpcn_forward(tape, g, p, cfg, mode),
        ModelKind::AgpcnLink => agpcn_link_forward(tape, g, p, cfg, mode),
    }
}

/// Evaluation-mode logits for a parameter set.
pub fn predict(params: &ParameterSet, g: &GraphInputs, cfg: &ModelConfig) -> Result<Matrix> {
    predict_with(params, g, cfg, Precision::F64, |tape, g, p, cfg, mode| {
        forward(tape, g, p, cfg, mode)
    })
}

/// Evaluation-mode logits through an arbitrary forward function.
pub fn predict_with<F>(
    params: &ParameterSet,
    g: &GraphInputs,
    cfg: &ModelConfig,
    precision: Precision,
    f: F,
) -> Result<Matrix>
where
    F: FnOnce(&mut Tape, &GraphInputs, &ParamVars, &ModelConfig, &mut Mode) -> Result<Var>,
{
    let mut tape = Tape::with_precision(precision);
    let vars = params.register(&mut tape)?;
    let out = f(&mut tape, g, &vars, cfg, &mut Mode::eval())?;
    Ok(tape.value(out).clone())
}
