use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    Gcn,
    Sgc,
    Gprgnn,
    Link,
    Linkx,
    Gpcn,
    GpcnLink,
    Agpcn,
    AgpcnLink,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Mlp,
        ModelKind::Gcn,
        ModelKind::Sgc,
        ModelKind::Gprgnn,
        ModelKind::Link,
        ModelKind::Linkx,
        ModelKind::Gpcn,
        ModelKind::GpcnLink,
        ModelKind::Agpcn,
        ModelKind::AgpcnLink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Gcn => "gcn",
            ModelKind::Sgc => "sgc",
            ModelKind::Gprgnn => "gprgnn",
            ModelKind::Link => "link",
            ModelKind::Linkx => "linkx",
            ModelKind::Gpcn => "gpcn",
            ModelKind::GpcnLink => "gpcn_link",
            ModelKind::Agpcn => "agpcn",
            ModelKind::AgpcnLink => "agpcn_link",
        }
    }

    /// Kinds whose trunk uses the fixed `γ` pattern.
    pub fn uses_gamma(self) -> bool {
        matches!(self, ModelKind::Gpcn | ModelKind::GpcnLink)
    }

    /// Kinds with learnable per-order coefficients `θ`.
    pub fn uses_theta(self) -> bool {
        matches!(self, ModelKind::Agpcn | ModelKind::AgpcnLink)
    }

    /// Kinds mixing the trunk with a direct adjacency branch through `μ`.
    pub fn uses_link_branch(self) -> bool {
        matches!(self, ModelKind::GpcnLink | ModelKind::AgpcnLink)
    }

    /// Kinds with node-indexed weights (not permutation equivariant).
    pub fn node_indexed(self) -> bool {
        matches!(
            self,
            ModelKind::Link | ModelKind::Linkx | ModelKind::GpcnLink | ModelKind::AgpcnLink
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?}")))
    }
}

/// How the mixing weight `μ` is obtained from its raw parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuParam {
    /// `μ = sigmoid(raw)`, always inside `(0, 1)`.
    #[default]
    Sigmoid,
    /// `μ = clamp(raw, 0, 1)`; endpoints reachable exactly.
    Clamp,
}

/// Operator used by the direct adjacency branch of the `*_link` kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkAdjacency {
    #[default]
    Normalized,
    Raw,
}

/// Initial GPR coefficients for GPRGNN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GprInit {
    /// `α(1−α)^k`, with the last coefficient `(1−α)^{K−1}`.
    #[default]
    Ppr,
    /// `e₀`.
    Delta,
    /// `1/K` each.
    Uniform,
}

/// Expansion coefficients for the closed-form GPCN trunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    /// `C(L,k) γ^k`, the exact expansion of the residual recursion.
    #[default]
    Canonical,
    /// `L γ^k` for `0 < k < L` and `γ^L` for `k = L`. Agrees with the
    /// canonical expansion for `L ≤ 3` only.
    Linear,
}

impl FromStr for Coefficients {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Coefficients::Canonical),
            "linear" => Ok(Coefficients::Linear),
            other => Err(Error::Config(format!("unknown coefficient scheme {other:?}"))),
        }
    }
}

impl Coefficients {
    /// Coefficient of the order-`k` term for `L` residual steps.
    pub fn coefficient(self, l: usize, k: usize, gamma: f64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let g = gamma.powi(k as i32);
        match self {
            Coefficients::Canonical => binomial(l, k) * g,
            Coefficients::Linear if k < l => l as f64 * g,
            Coefficients::Linear => g,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn default_hidden() -> usize {
    64
}
fn default_one() -> usize {
    1
}
fn default_two() -> usize {
    2
}
fn default_gamma() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    0.1
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Initial ReLU layers applied to the node features.
    #[serde(default = "default_one")]
    pub t_layers: usize,
    /// Residual steps (GPCN family) or propagation depth (GPRGNN).
    #[serde(default = "default_one")]
    pub l_layers: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub dropout: f64,
    #[serde(default = "default_two")]
    pub sgc_power: usize,
    #[serde(default = "default_two")]
    pub gcn_layers: usize,
    #[serde(default)]
    pub gpr_init: GprInit,
    #[serde(default = "default_alpha")]
    pub gpr_alpha: f64,
    /// L2 coefficient on `θ`; falls back to the run's weight decay.
    #[serde(default)]
    pub lambda_theta: Option<f64>,
    #[serde(default)]
    pub mu_param: MuParam,
    #[serde(default)]
    pub link_adjacency: LinkAdjacency,
    /// Apply dropout to the direct adjacency branch.
    #[serde(default)]
    pub link_dropout: bool,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            t_layers: 1,
            l_layers: 1,
            hidden: default_hidden(),
            gamma: default_gamma(),
            dropout: 0.0,
            sgc_power: 2,
            gcn_layers: 2,
            gpr_init: GprInit::default(),
            gpr_alpha: default_alpha(),
            lambda_theta: None,
            mu_param: MuParam::default(),
            link_adjacency: LinkAdjacency::default(),
            link_dropout: false,
        }
    }

    /// Structural checks every forward pass needs.
    pub fn check_structure(&self) -> Result<()> {
        if self.t_layers == 0 {
            return Err(Error::Config("t_layers must be at least 1".into()));
        }
        if self.l_layers == 0 {
            return Err(Error::Config("l_layers must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden width must be at least 1".into()));
        }
        if self.kind == ModelKind::Gcn && self.gcn_layers == 0 {
            return Err(Error::Config("gcn_layers must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::Config("gamma must be finite".into()));
        }
        Ok(())
    }

    /// Full validation for a training configuration.
    pub fn validate(&self) -> Result<()> {
        self.check_structure()?;
        if self.kind.uses_gamma() && self.gamma <= 0.0 {
            return Err(Error::Config(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if let Some(l) = self.lambda_theta {
            if l < 0.0 {
                return Err(Error::Config("lambda_theta must be >= 0".into()));
            }
        }
        if self.kind == ModelKind::Gprgnn && !(0.0..=1.0).contains(&self.gpr_alpha) {
            return Err(Error::Config("gpr_alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
