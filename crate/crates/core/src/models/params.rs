use super::config::{binomial, Coefficients, GprInit, ModelConfig, ModelKind};
use crate::autodiff::{Tape, Var};
use crate::rng::{streams, CounterRng};
use crate::{Error, Matrix, Result};

pub const MU_RAW: &str = "mu_raw";
pub const THETA: &str = "theta";
pub const GPR_THETA: &str = "gpr_theta";
pub const W_RES: &str = "w_res";
pub const W_OUT: &str = "w_out";
pub const W_A: &str = "w_a";

/// Name of the `i`-th initial feature layer weight.
pub fn layer_name(i: usize) -> String {
    format!("w{i}")
}

/// Problem dimensions a parameter set is shaped for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nodes: usize,
    pub features: usize,
    pub classes: usize,
}

/// Named model parameters in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterSet {
    entries: Vec<(String, Matrix)>,
}

impl ParameterSet {
    pub fn new() -> Self {
        ParameterSet::default()
    }

    /// Inserts or replaces `name`.
    pub fn insert(&mut self, name: impl Into<String>, value: Matrix) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some((_, v)) => *v = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.entries.iter_mut().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn require(&self, name: &str) -> Result<&Matrix> {
        self.get(name)
            .ok_or_else(|| Error::Config(format!("missing parameter {name:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Matrix)> {
        self.entries.iter_mut().map(|(n, v)| (n.as_str(), &mut *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Total scalar count.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|(_, m)| m.len()).sum()
    }

    /// Registers every parameter as a differentiable leaf.
    pub fn register(&self, tape: &mut Tape) -> Result<ParamVars> {
        let vars = self
            .entries
            .iter()
            .map(|(n, m)| Ok((n.clone(), tape.leaf(m.clone(), true)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParamVars { vars })
    }

    /// Mixing weight `μ`, if the set has one.
    pub fn mu(&self, cfg: &ModelConfig) -> Option<f64> {
        self.get(MU_RAW).map(|m| {
            let raw = m.get(0, 0);
            match cfg.mu_param {
                super::MuParam::Sigmoid => 1.0 / (1.0 + (-raw).exp()),
                super::MuParam::Clamp => raw.clamp(0.0, 1.0),
            }
        })
    }

    /// Coefficient vector `θ` (or the GPR coefficients), if present.
    pub fn theta(&self) -> Option<Vec<f64>> {
        self.get(THETA)
            .or_else(|| self.get(GPR_THETA))
            .map(|m| m.data().to_vec())
    }
}

/// Tape handles for a registered [`ParameterSet`].
#[derive(Debug, Clone)]
pub struct ParamVars {
    vars: Vec<(String, Var)>,
}

impl ParamVars {
    pub fn from_pairs(vars: Vec<(String, Var)>) -> Self {
        ParamVars { vars }
    }

    pub fn get(&self, name: &str) -> Result<Var> {
        self.vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Config(format!("missing parameter {name:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Var)> {
        self.vars.iter().map(|(n, v)| (n.as_str(), *v))
    }
}

fn glorot(rows: usize, cols: usize, rng: &mut CounterRng) -> Matrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-bound, bound))
}

/// `θ_k = C(L,k) γ^k`, the AGPCN starting point equal to GPCN.
pub fn binomial_theta(l: usize, gamma: f64) -> Matrix {
    Matrix::from_fn(1, l + 1, |_, k| binomial(l, k) * gamma.powi(k as i32))
}

/// `θ` reproducing a coefficient scheme exactly.
pub fn theta_for(coeffs: Coefficients, l: usize, gamma: f64) -> Matrix {
    Matrix::from_fn(1, l + 1, |_, k| coeffs.coefficient(l, k, gamma))
}

fn gpr_coefficients(init: GprInit, k: usize, alpha: f64) -> Matrix {
    Matrix::from_fn(1, k, |_, i| match init {
        GprInit::Ppr if i + 1 == k => (1.0 - alpha).powi(i as i32),
        GprInit::Ppr => alpha * (1.0 - alpha).powi(i as i32),
        GprInit::Delta => f64::from(u8::from(i == 0)),
        GprInit::Uniform => 1.0 / k as f64,
    })
}

/// Glorot-uniform weights (bound `sqrt(6/(fan_in+fan_out))`), `θ` at the
/// binomial GPCN pattern, `μ_raw = 0`.
pub fn init_params(cfg: &ModelConfig, dims: Dims, seed: u64) -> Result<ParameterSet> {
    cfg.check_structure()?;
    let mut rng = CounterRng::new(seed, streams::INIT);
    let h = cfg.hidden;
    let (n, q, c) = (dims.nodes, dims.features, dims.classes);
    let mut p = ParameterSet::new();
    let feature_layers = |p: &mut ParameterSet, rng: &mut CounterRng| {
        for i in 0..cfg.t_layers {
            let fan_in = if i == 0 { q } else { h };
            p.insert(layer_name(i), glorot(fan_in, h, rng));
        }
    };
    match cfg.kind {
        ModelKind::Mlp => {
            feature_layers(&mut p, &mut rng);
            p.insert(W_OUT, glorot(h, c, &mut rng));
        }
        ModelKind::Gcn => {
            let d = cfg.gcn_layers;
            for l in 0..d {
                let fan_in = if l == 0 { q } else { h };
                let fan_out = if l + 1 == d { c } else { h };
                p.insert(format!("gcn{l}"), glorot(fan_in, fan_out, &mut rng));
            }
        }
        ModelKind::Sgc => p.insert("w_sgc", glorot(q, c, &mut rng)),
        ModelKind::Gprgnn => {
            feature_layers(&mut p, &mut rng);
            p.insert(W_OUT, glorot(h, c, &mut rng));
            p.insert(GPR_THETA, gpr_coefficients(cfg.gpr_init, cfg.l_layers, cfg.gpr_alpha));
        }
        ModelKind::Link => p.insert("w_link", glorot(n, c, &mut rng)),
        ModelKind::Linkx => {
            p.insert("linkx_a1", glorot(n, h, &mut rng));
            p.insert("linkx_a2", glorot(h, h, &mut rng));
            p.insert("linkx_x1", glorot(q, h, &mut rng));
            p.insert("linkx_x2", glorot(h, h, &mut rng));
            p.insert("linkx_cat", glorot(2 * h, h, &mut rng));
            p.insert(W_OUT, glorot(h, c, &mut rng));
        }
        ModelKind::Gpcn | ModelKind::GpcnLink | ModelKind::Agpcn | ModelKind::AgpcnLink => {
            feature_layers(&mut p, &mut rng);
            p.insert(W_RES, glorot(h, h, &mut rng));
            p.insert(W_OUT, glorot(h, c, &mut rng));
            if cfg.kind.uses_link_branch() {
                p.insert(W_A, glorot(n, h, &mut rng));
                p.insert(MU_RAW, Matrix::scalar(0.0));
            }
            if cfg.kind.uses_theta() {
                p.insert(THETA, binomial_theta(cfg.l_layers, cfg.gamma));
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_bounds_and_shapes() {
        let mut cfg = ModelConfig::new(ModelKind::AgpcnLink);
        cfg.t_layers = 2;
        cfg.l_layers = 3;
        cfg.hidden = 8;
        cfg.gamma = 0.5;
        let dims = Dims { nodes: 10, features: 5, classes: 3 };
        let p = init_params(&cfg, dims, 1).unwrap();
        assert_eq!(p.require("w0").unwrap().shape(), (5, 8));
        assert_eq!(p.require("w1").unwrap().shape(), (8, 8));
        assert_eq!(p.require(W_A).unwrap().shape(), (10, 8));
        assert_eq!(p.require(W_OUT).unwrap().shape(), (8, 3));
        let bound = (6.0f64 / 13.0).sqrt();
        assert!(p.require("w0").unwrap().data().iter().all(|v| v.abs() <= bound));
        assert_eq!(p.require(THETA).unwrap().data(), &[1.0, 1.5, 0.75, 0.125]);
        assert_eq!(p.mu(&cfg), Some(0.5));
        assert_eq!(init_params(&cfg, dims, 1).unwrap(), p);
        assert_ne!(init_params(&cfg, dims, 2).unwrap(), p);
    }

    #[test]
    fn ppr_coefficients_sum_to_one() {
        let g = gpr_coefficients(GprInit::Ppr, 5, 0.1);
        assert!((g.sum() - 1.0).abs() < 1e-12);
    }
}
