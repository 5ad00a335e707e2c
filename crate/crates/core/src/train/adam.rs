use crate::models::ParameterSet;
use crate::{Error, Matrix, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Subtract `lr·wd·p` from the parameter instead of adding `wd·p` to the
    /// gradient.
    pub decoupled: bool,
}

impl AdamConfig {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            decoupled: false,
        }
    }
}

/// First and second moment estimates, one pair per parameter.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    step: u64,
    moments: Vec<(Matrix, Matrix)>,
}

impl AdamState {
    pub fn new() -> Self {
        AdamState::default()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update with bias correction. `grads` is aligned with the
/// iteration order of `params`; `decay[i]` says whether weight decay applies
/// to parameter `i`.
pub fn adam_step(
    params: &mut ParameterSet,
    grads: &[Matrix],
    decay: &[bool],
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<()> {
    if grads.len() != params.len() || decay.len() != params.len() {
        return Err(Error::Shape(format!(
            "{} gradients and {} decay flags for {} parameters",
            grads.len(),
            decay.len(),
            params.len()
        )));
    }
    if state.moments.is_empty() {
        state.moments = params
            .iter()
            .map(|(_, p)| (Matrix::zeros(p.rows(), p.cols()), Matrix::zeros(p.rows(), p.cols())))
            .collect();
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, (_, p)) in params.iter_mut().enumerate() {
        let g = &grads[i];
        if g.shape() != p.shape() {
            return Err(Error::Shape(format!("gradient {i} does not match its parameter")));
        }
        let (m, v) = &mut state.moments[i];
        let wd = if decay[i] { cfg.weight_decay } else { 0.0 };
        let p = p.data_mut();
        let (m, v) = (m.data_mut(), v.data_mut());
        for j in 0..p.len() {
            let mut gj = g.data()[j];
            if !cfg.decoupled {
                gj += wd * p[j];
            }
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            if cfg.decoupled {
                p[j] -= cfg.lr * wd * p[j];
            }
            p[j] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}
