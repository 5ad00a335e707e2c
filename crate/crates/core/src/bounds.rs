//! Numeric evaluation of the transductive generalization bound and the
//! Rademacher complexity bounds for GPCN-LINK (fixed `γ` pattern) and
//! AGPCN-LINK (learned `θ`).
//!
//! Universal constants are unknown, so every value here is "up to
//! constants": `C'` and `c₀` default to 1 and are exposed in
//! [`BoundOptions`]. The results are meant for relative and monotonicity
//! comparisons.
//!
//! With `S_k = Σ_j |λ_j|^k` over the spectrum of `Ã`, `p₀ = MU/(M+U)²` and
//! `D = √N·R`, the trunk term is
//!
//! ```text
//! C'·B⁽ᵀ⁺¹⁾·μ·[ 2ᵀ·∏_{l<T} B⁽ˡ⁾·√(2p₀)·(c₀' + P)·‖X‖_F + P·D ]
//! ```
//!
//! where `P = Σ_{k=1}^{L} B⁽ᵀ⁾ᵏ c_k S_k`, `c₀' = 1` and `c_k` is the `γ`
//! pattern (fixed models) or `c₀' = θ₀`, `c_k = θ_k` (adaptive models). The
//! link term is `(1−μ)·2^{5/2}·B⁽ᵀ⁺¹⁾·B_A·√(MU)/(M+U)·S_1`. Both bound
//! `Q⁻¹` times the Rademacher complexity, with `Q = 1/M + 1/U`.

use crate::data::GraphDataset;
use crate::graph::{normalized_adjacency, spectrum, Spectrum, SpectrumRequest, Symmetrize};
use crate::models::{layer_name, Coefficients, ModelConfig, ParameterSet, THETA, W_A, W_OUT, W_RES};
use crate::train::Split;
use crate::{Error, Result};
use std::io::Write;

/// Everything the bound formulas depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub spectrum: Spectrum,
    /// `B⁽⁰⁾ … B⁽ᵀ⁺¹⁾`: `T` feature layers, the residual weight, the head.
    pub b: Vec<f64>,
    pub b_a: f64,
    pub mu: f64,
    pub gamma: f64,
    /// `θ₀ … θ_L` for the adaptive bound.
    pub theta: Option<Vec<f64>>,
    pub t_layers: usize,
    pub l_layers: usize,
    /// Training nodes.
    pub m: usize,
    /// Test nodes.
    pub u: usize,
    pub x_fro: f64,
    /// Bound on the activation output, `|σ(·)| ≤ R`.
    pub r: f64,
    pub n: usize,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.u == 0 {
            return Err(Error::Config("bounds need M, U >= 1".into()));
        }
        if self.b.len() != self.t_layers + 2 {
            return Err(Error::Shape(format!(
                "{} weight caps for T = {} (expected T + 2)",
                self.b.len(),
                self.t_layers
            )));
        }
        if self.b.iter().chain([&self.b_a, &self.x_fro, &self.r]).any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("weight caps, norms and R must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config(format!("mu = {} outside [0, 1]", self.mu)));
        }
        if self.l_layers == 0 {
            return Err(Error::Config("L must be at least 1".into()));
        }
        if !self.spectrum.is_full() || self.spectrum.n_computed() != self.n {
            return Err(Error::InsufficientSpectrum {
                have: self.spectrum.n_computed(),
                need: self.n,
            });
        }
        Ok(())
    }

    fn b_res(&self) -> f64 {
        self.b[self.t_layers]
    }

    fn b_out(&self) -> f64 {
        self.b[self.t_layers + 1]
    }

    /// `S_k = Σ_j |λ_j|^k` for `k = 0 … L` (index 0 unused).
    fn power_sums(&self) -> Result<Vec<f64>> {
        let mut s = vec![0.0];
        for k in 1..=self.l_layers {
            s.push(self.spectrum.power_sum(k as u32)?);
        }
        Ok(s)
    }
}

/// Constants and conventions for bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub c_prime: f64,
    pub c0: f64,
    /// Coefficient pattern of the fixed-`γ` bound.
    pub coefficients: Coefficients,
    /// Confidence parameter `δ` of the generalization gap.
    pub delta: f64,
    /// Multiply the adaptive trunk's `‖X‖_F` term by a second `∏_{l<T} B⁽ˡ⁾`,
    /// the literal form of the adaptive statement. Off by default so the
    /// adaptive bound reduces to the fixed one under the matching `θ`.
    pub repeat_layer_product: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            c_prime: 1.0,
            c0: 1.0,
            coefficients: Coefficients::Linear,
            delta: 0.05,
            repeat_layer_product: false,
        }
    }
}

/// The two additive parts of a bound and the resulting complexity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub trunk: f64,
    pub link: f64,
    /// `Q = 1/M + 1/U`.
    pub q: f64,
}

impl BoundTerms {
    /// Right-hand side as stated, bounding `Q⁻¹·𝓡`.
    pub fn rhs(&self) -> f64 {
        self.trunk + self.link
    }

    /// Rademacher complexity bound `Q·(trunk + link)`.
    pub fn rademacher(&self) -> f64 {
        self.q * self.rhs()
    }
}

fn terms(inp: &BoundInputs, opts: &BoundOptions, lead: f64, coeff: &[f64], extra_product: bool) -> Result<BoundTerms> {
    inp.validate()?;
    let s = inp.power_sums()?;
    let (m, u) = (inp.m as f64, inp.u as f64);
    let b_t = inp.b_res();
    let poly: f64 = (1..=inp.l_layers)
        .map(|k| b_t.powi(k as i32) * coeff[k] * s[k])
        .sum();
    let layer_product: f64 = inp.b[..inp.t_layers].iter().product();
    let p0_factor = (2.0 * m * u / (m + u).powi(2)).sqrt();
    let mut x_term = 2f64.powi(inp.t_layers as i32) * layer_product * p0_factor * (lead + poly) * inp.x_fro;
    if extra_product {
        x_term *= layer_product;
    }
    let d = (inp.n as f64).sqrt() * inp.r;
    let trunk = opts.c_prime * inp.b_out() * inp.mu * (x_term + poly * d);
    let link = (1.0 - inp.mu) * 2f64.powf(2.5) * inp.b_out() * inp.b_a * (m * u).sqrt() / (m + u) * s[1];
    Ok(BoundTerms { trunk, link, q: 1.0 / m + 1.0 / u })
}

/// Fixed-`γ` bound terms with coefficients `c_k` from `opts.coefficients`.
pub fn theorem1_terms(inp: &BoundInputs, opts: &BoundOptions) -> Result<BoundTerms> {
    let coeff: Vec<f64> = (0..=inp.l_layers)
        .map(|k| opts.coefficients.coefficient(inp.l_layers, k, inp.gamma))
        .collect();
    terms(inp, opts, 1.0, &coeff, false)
}

/// Adaptive bound terms using `inp.theta`.
pub fn theorem2_terms(inp: &BoundInputs, opts: &BoundOptions) -> Result<BoundTerms> {
    let theta = inp
        .theta
        .as_ref()
        .ok_or_else(|| Error::Config("the adaptive bound needs theta".into()))?;
    if theta.len() != inp.l_layers + 1 {
        return Err(Error::Shape(format!(
            "{} coefficients for L = {}",
            theta.len(),
            inp.l_layers
        )));
    }
    terms(inp, opts, theta[0], theta, opts.repeat_layer_product)
}

/// Fixed-`γ` right-hand side with default options.
pub fn theorem1_rhs(inp: &BoundInputs) -> Result<f64> {
    Ok(theorem1_terms(inp, &BoundOptions::default())?.rhs())
}

/// Adaptive right-hand side with default options.
pub fn theorem2_rhs(inp: &BoundInputs) -> Result<f64> {
    Ok(theorem2_terms(inp, &BoundOptions::default())?.rhs())
}

/// `rad + c₀·Q·√min(M,U) + √((S·Q/2)·ln(1/δ))` with
/// `S = 2(M+U)·min / ((2(M+U)−1)(2·min−1))`.
pub fn generalization_gap_rhs(rad: f64, m: usize, u: usize, delta: f64, c0: f64) -> Result<f64> {
    if m == 0 || u == 0 {
        return Err(Error::Config("bounds need M, U >= 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta = {delta} outside (0, 1]")));
    }
    let (mf, uf) = (m as f64, u as f64);
    let min = mf.min(uf);
    let q = 1.0 / mf + 1.0 / uf;
    let s = 2.0 * (mf + uf) * min / ((2.0 * (mf + uf) - 1.0) * (2.0 * min - 1.0));
    Ok(rad + c0 * q * min.sqrt() + (s * q / 2.0 * (1.0 / delta).ln()).sqrt())
}

/// One line of a bound report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub l: usize,
    /// `γ`, or the `θ` vector joined with semicolons.
    pub gamma_theta: String,
    pub mu: f64,
    pub trunk_term: f64,
    pub link_term: f64,
    pub q: f64,
    /// `Q·(trunk + link)`.
    pub total: f64,
    pub gap_rhs: f64,
}

impl BoundRow {
    fn new(l: usize, gamma_theta: String, mu: f64, t: &BoundTerms, inp: &BoundInputs, opts: &BoundOptions) -> Result<Self> {
        let total = t.rademacher();
        Ok(BoundRow {
            l,
            gamma_theta,
            mu,
            trunk_term: t.trunk,
            link_term: t.link,
            q: t.q,
            total,
            gap_rhs: generalization_gap_rhs(total, inp.m, inp.u, opts.delta, opts.c0)?,
        })
    }
}

/// Report row for the fixed-`γ` or adaptive bound.
pub fn bound_row(inp: &BoundInputs, opts: &BoundOptions, adaptive: bool) -> Result<BoundRow> {
    if adaptive {
        let t = theorem2_terms(inp, opts)?;
        let theta = inp.theta.as_deref().unwrap_or_default();
        let joined = theta.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        BoundRow::new(inp.l_layers, joined, inp.mu, &t, inp, opts)
    } else {
        let t = theorem1_terms(inp, opts)?;
        BoundRow::new(inp.l_layers, inp.gamma.to_string(), inp.mu, &t, inp, opts)
    }
}

/// Fixed-`γ` bound swept over depths, holding everything else.
pub fn oversmoothing_profile(inp: &BoundInputs, depths: &[usize], opts: &BoundOptions) -> Result<Vec<BoundRow>> {
    depths
        .iter()
        .map(|&l| {
            let at = BoundInputs { l_layers: l, theta: None, ..inp.clone() };
            bound_row(&at, opts, false)
        })
        .collect()
}

pub fn write_bound_csv<W: Write>(w: W, rows: &[BoundRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["L", "gamma_theta", "mu", "trunk_term", "link_term", "Q", "total", "gap_rhs"])?;
    for r in rows {
        out.write_record([
            r.l.to_string(),
            r.gamma_theta.clone(),
            r.mu.to_string(),
            r.trunk_term.to_string(),
            r.link_term.to_string(),
            r.q.to_string(),
            r.total.to_string(),
            r.gap_rhs.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Bound inputs from trained parameters: `B⁽ˡ⁾` are maximum column L1
/// norms, `μ` is read from the mixing parameter (1 without a link branch),
/// `M` and `U` are the training and test set sizes, and the spectrum of `Ã`
/// is computed in full. `R` defaults to 1.
pub fn extract_bound_inputs(
    ds: &GraphDataset,
    params: &ParameterSet,
    cfg: &ModelConfig,
    split: &Split,
    symmetrize: Symmetrize,
) -> Result<BoundInputs> {
    let mut b = Vec::with_capacity(cfg.t_layers + 2);
    for i in 0..cfg.t_layers {
        b.push(params.require(&layer_name(i))?.max_column_l1());
    }
    b.push(params.require(W_RES)?.max_column_l1());
    b.push(params.require(W_OUT)?.max_column_l1());
    let b_a = params.get(W_A).map_or(0.0, |w| w.max_column_l1());
    let a_tilde = normalized_adjacency(&ds.adjacency, symmetrize)?;
    Ok(BoundInputs {
        spectrum: spectrum(&a_tilde, SpectrumRequest::All)?,
        b,
        b_a,
        mu: params.mu(cfg).unwrap_or(1.0),
        gamma: cfg.gamma,
        theta: params.get(THETA).map(|t| t.data().to_vec()),
        t_layers: cfg.t_layers,
        l_layers: cfg.l_layers,
        m: split.train.len(),
        u: split.test.len(),
        x_fro: ds.features.frobenius_norm(),
        r: 1.0,
        n: ds.num_nodes(),
    })
}
