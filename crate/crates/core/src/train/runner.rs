use super::adam::{adam_step, AdamConfig, AdamState};
use super::metrics::accuracy;
use super::split::Split;
use crate::autodiff::{Precision, Tape};
use crate::graph::LabelVector;
use crate::models::{
    forward, init_params, predict_with, GraphInputs, ModelConfig, Mode, ParameterSet, GPR_THETA,
    MU_RAW, THETA,
};
use crate::{Error, Matrix, Result};
use serde::{Deserialize, Serialize};

fn default_lr() -> f64 {
    0.01
}
fn default_epochs() -> usize {
    1000
}
fn default_patience() -> usize {
    100
}
fn default_eval_every() -> usize {
    1
}

/// Optimizer and stopping settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    /// Evaluations without validation improvement before stopping.
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default)]
    pub decoupled_weight_decay: bool,
    /// Round every forward value to single precision.
    #[serde(default)]
    pub f32: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: default_lr(),
            weight_decay: 0.0,
            max_epochs: default_epochs(),
            patience: default_patience(),
            seed: 0,
            eval_every: default_eval_every(),
            decoupled_weight_decay: false,
            f32: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::Config("weight decay must be >= 0".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        Ok(())
    }

    fn precision(&self) -> Precision {
        if self.f32 {
            Precision::F32
        } else {
            Precision::F64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A non-finite value appeared; accuracies are those of the best
    /// checkpoint reached before the failure.
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_val_acc: f64,
    /// Test accuracy of the best-validation checkpoint.
    pub test_acc: f64,
    /// Epoch (1-based) of the best-validation checkpoint.
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Training objective per epoch, including regularization.
    pub loss_curve: Vec<f64>,
    pub learned_mu: Option<f64>,
    pub learned_theta: Option<Vec<f64>>,
    pub status: RunStatus,
    pub params: ParameterSet,
}

impl RunResult {
    pub fn is_aborted(&self) -> bool {
        matches!(self.status, RunStatus::Aborted(_))
    }
}

/// Whether weight decay applies to a parameter. Mixing coefficients are
/// excluded.
pub fn decays(name: &str) -> bool {
    !matches!(name, MU_RAW | THETA | GPR_THETA)
}

/// Full-batch training with early stopping on validation accuracy.
///
/// Parameters are initialized from `tc.seed` and dropout masks are drawn from
/// `(tc.seed, epoch)`, so a run is a pure function of its inputs.
pub fn train(
    g: &GraphInputs,
    y: &LabelVector,
    mc: &ModelConfig,
    tc: &TrainConfig,
    split: &Split,
) -> Result<RunResult> {
    mc.validate()?;
    tc.validate()?;
    split.validate(y.len())?;
    if y.len() != g.features.rows() || y.num_classes() != g.num_classes {
        return Err(Error::Shape("labels do not match the graph inputs".into()));
    }
    let params = init_params(mc, g.dims(), tc.seed)?;
    train_from(g, y, mc, tc, split, params)
}

/// As [`train`], starting from the given parameters.
pub fn train_from(
    g: &GraphInputs,
    y: &LabelVector,
    mc: &ModelConfig,
    tc: &TrainConfig,
    split: &Split,
    mut params: ParameterSet,
) -> Result<RunResult> {
    let decay: Vec<bool> = params.iter().map(|(n, _)| decays(n)).collect();
    let adam = AdamConfig {
        decoupled: tc.decoupled_weight_decay,
        ..AdamConfig::new(tc.lr, tc.weight_decay)
    };
    let lambda_theta = mc.lambda_theta.unwrap_or(tc.weight_decay);
    let mut state = AdamState::new();
    let mut best = params.clone();
    let (mut best_val, mut best_test, mut best_epoch) = (f64::NEG_INFINITY, 0.0, 0);
    let mut since_best = 0usize;
    let mut loss_curve = Vec::new();
    let mut status = RunStatus::Completed;
    let mut epochs_run = 0;

    for epoch in 0..tc.max_epochs {
        let step = (|| -> Result<(f64, Vec<Matrix>)> {
            let mut tape = Tape::with_precision(tc.precision());
            let vars = params.register(&mut tape)?;
            let mut mode = Mode::train(tc.seed, epoch as u64);
            let logits = forward(&mut tape, g, &vars, mc, &mut mode)?;
            let mut loss = tape.softmax_cross_entropy(logits, y.labels(), &split.train)?;
            if mc.kind.uses_theta() && lambda_theta > 0.0 {
                let reg = tape.l2_penalty(&[vars.get(THETA)?], lambda_theta)?;
                loss = tape.add(loss, reg)?;
            }
            let value = tape.value(loss).get(0, 0);
            let grads = tape.backward(loss)?;
            let grads = vars.iter().map(|(_, v)| grads.get_or_zeros(v)).collect();
            Ok((value, grads))
        })();
        let (loss, grads) = match step {
            Ok(s) => s,
            Err(Error::Numeric(msg)) => {
                status = RunStatus::Aborted(msg);
                break;
            }
            Err(e) => return Err(e),
        };
        loss_curve.push(loss);
        epochs_run = epoch + 1;
        adam_step(&mut params, &grads, &decay, &mut state, &adam)?;
        if !params.iter().all(|(_, p)| p.is_finite()) {
            status = RunStatus::Aborted(format!("non-finite parameters after epoch {epochs_run}"));
            break;
        }

        if epochs_run % tc.eval_every != 0 {
            continue;
        }
        let logits = match predict_with(&params, g, mc, tc.precision(), forward) {
            Ok(l) => l,
            Err(Error::Numeric(msg)) => {
                status = RunStatus::Aborted(msg);
                break;
            }
            Err(e) => return Err(e),
        };
        let val = if split.val.is_empty() {
            accuracy(&logits, y.labels(), &split.train)?
        } else {
            accuracy(&logits, y.labels(), &split.val)?
        };
        if val > best_val {
            best_val = val;
            best_test = if split.test.is_empty() {
                f64::NAN
            } else {
                accuracy(&logits, y.labels(), &split.test)?
            };
            best_epoch = epochs_run;
            best = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= tc.patience {
                break;
            }
        }
    }

    if best_val == f64::NEG_INFINITY {
        best_val = 0.0;
    }
    Ok(RunResult {
        best_val_acc: best_val,
        test_acc: best_test,
        best_epoch,
        epochs_run,
        loss_curve,
        learned_mu: best.mu(mc),
        learned_theta: best.theta(),
        status,
        params: best,
    })
}
