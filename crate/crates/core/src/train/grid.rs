use super::runner::{train, RunResult, TrainConfig};
use super::split::Split;
use crate::graph::LabelVector;
use crate::models::{GraphInputs, ModelConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// One graph problem with its evaluation splits.
#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a> {
    pub name: &'a str,
    pub inputs: &'a GraphInputs,
    pub labels: &'a LabelVector,
    pub splits: &'a [Split],
}

/// Execution settings shared by batch runners.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Record wall-clock time. Off gives byte-identical tables across runs.
    pub record_time: bool,
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model: String,
    pub dataset: String,
    pub seed: u64,
    pub split_protocol: String,
    pub t_layers: usize,
    pub l_layers: usize,
    pub gamma: f64,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    /// `-inf` for aborted runs.
    pub best_val_acc: f64,
    pub test_acc: f64,
    pub epochs: usize,
    pub learned_mu: Option<f64>,
    /// Semicolon-joined coefficients, empty when the model has none.
    pub learned_theta: String,
    pub wall_ms: u64,
}

impl ResultRow {
    pub const HEADER: [&'static str; 17] = [
        "model",
        "dataset",
        "seed",
        "split_protocol",
        "T",
        "L",
        "gamma",
        "hidden",
        "lr",
        "weight_decay",
        "dropout",
        "best_val_acc",
        "test_acc",
        "epochs",
        "learned_mu",
        "learned_theta",
        "wall_ms",
    ];

    /// Fields in [`ResultRow::HEADER`] order; reals use shortest round-trip
    /// decimal form.
    pub fn record(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.dataset.clone(),
            self.seed.to_string(),
            self.split_protocol.clone(),
            self.t_layers.to_string(),
            self.l_layers.to_string(),
            self.gamma.to_string(),
            self.hidden.to_string(),
            self.lr.to_string(),
            self.weight_decay.to_string(),
            self.dropout.to_string(),
            self.best_val_acc.to_string(),
            self.test_acc.to_string(),
            self.epochs.to_string(),
            self.learned_mu.map(|m| m.to_string()).unwrap_or_default(),
            self.learned_theta.clone(),
            self.wall_ms.to_string(),
        ]
    }

    pub fn new(
        dataset: &str,
        split: &Split,
        mc: &ModelConfig,
        tc: &TrainConfig,
        r: &RunResult,
        wall_ms: u64,
    ) -> Self {
        ResultRow {
            model: mc.kind.to_string(),
            dataset: dataset.to_string(),
            seed: split.seed,
            split_protocol: split.protocol.to_string(),
            t_layers: mc.t_layers,
            l_layers: mc.l_layers,
            gamma: mc.gamma,
            hidden: mc.hidden,
            lr: tc.lr,
            weight_decay: tc.weight_decay,
            dropout: mc.dropout,
            best_val_acc: if r.is_aborted() { f64::NEG_INFINITY } else { r.best_val_acc },
            test_acc: r.test_acc,
            epochs: r.epochs_run,
            learned_mu: r.learned_mu,
            learned_theta: r
                .learned_theta
                .as_ref()
                .map(|t| t.iter().map(f64::to_string).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            wall_ms,
        }
    }
}

pub fn write_results_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ResultRow::HEADER)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

/// Runs every `(config, split)` pair, in parallel, returning results in
/// input order. The run for split `s` uses `s.seed` as its training seed.
pub fn run_cells(
    exp: &Experiment<'_>,
    cells: &[(ModelConfig, TrainConfig)],
    opts: RunOptions,
) -> Result<Vec<(RunResult, ResultRow)>> {
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..exp.splits.len()).map(move |s| (c, s)))
        .collect();
    let run = |&(c, s): &(usize, usize)| -> Result<(RunResult, ResultRow)> {
        let (mc, tc) = &cells[c];
        let split = &exp.splits[s];
        let tc = TrainConfig { seed: split.seed, ..tc.clone() };
        let start = Instant::now();
        let r = train(exp.inputs, exp.labels, mc, &tc, split)?;
        let ms = if opts.record_time { start.elapsed().as_millis() as u64 } else { 0 };
        let row = ResultRow::new(exp.name, split, mc, &tc, &r, ms);
        Ok((r, row))
    };
    let collect = || tasks.par_iter().map(run).collect::<Result<Vec<_>>>();
    match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(collect),
        None => collect(),
    }
}

/// Values to try per hyperparameter; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub hidden: Vec<usize>,
    pub lr: Vec<f64>,
    pub weight_decay: Vec<f64>,
    pub t_layers: Vec<usize>,
    pub l_layers: Vec<usize>,
    pub gamma: Vec<f64>,
    pub dropout: Vec<f64>,
}

impl GridSpec {
    /// Cartesian product over the listed values, last axis fastest.
    pub fn expand(&self, mc: &ModelConfig, tc: &TrainConfig) -> Vec<(ModelConfig, TrainConfig)> {
        fn axis<T: Copy>(v: &[T], base: T) -> Vec<T> {
            if v.is_empty() {
                vec![base]
            } else {
                v.to_vec()
            }
        }
        let mut out = Vec::new();
        for h in axis(&self.hidden, mc.hidden) {
            for lr in axis(&self.lr, tc.lr) {
                for wd in axis(&self.weight_decay, tc.weight_decay) {
                    for t in axis(&self.t_layers, mc.t_layers) {
                        for l in axis(&self.l_layers, mc.l_layers) {
                            for g in axis(&self.gamma, mc.gamma) {
                                for d in axis(&self.dropout, mc.dropout) {
                                    let m = ModelConfig {
                                        hidden: h,
                                        t_layers: t,
                                        l_layers: l,
                                        gamma: g,
                                        dropout: d,
                                        ..mc.clone()
                                    };
                                    let tr = TrainConfig { lr, weight_decay: wd, ..tc.clone() };
                                    out.push((m, tr));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<(ModelConfig, TrainConfig)>,
    /// Mean validation accuracy per cell; `-inf` if any run aborted.
    pub scores: Vec<f64>,
    pub best: usize,
}

impl GridOutcome {
    pub fn best_config(&self) -> &(ModelConfig, TrainConfig) {
        &self.cells[self.best]
    }
}

/// Grid search selecting the cell with the highest mean validation accuracy
/// across splits. Ties keep the earlier cell.
pub fn grid_search(
    exp: &Experiment<'_>,
    mc: &ModelConfig,
    tc: &TrainConfig,
    grid: &GridSpec,
    opts: RunOptions,
) -> Result<GridOutcome> {
    if exp.splits.is_empty() {
        return Err(Error::Config("grid search needs at least one split".into()));
    }
    let cells = grid.expand(mc, tc);
    for (m, t) in &cells {
        m.validate()?;
        t.validate()?;
    }
    let results = run_cells(exp, &cells, opts)?;
    let k = exp.splits.len();
    let scores: Vec<f64> = results
        .chunks(k)
        .map(|runs| {
            if runs.iter().any(|(r, _)| r.is_aborted()) {
                f64::NEG_INFINITY
            } else {
                runs.iter().map(|(r, _)| r.best_val_acc).sum::<f64>() / k as f64
            }
        })
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(GridOutcome {
        rows: results.into_iter().map(|(_, row)| row).collect(),
        cells,
        scores,
        best,
    })
}

/// Values for a one-factor-at-a-time sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub gamma: Vec<f64>,
    pub l_layers: Vec<usize>,
    pub dropout: Vec<f64>,
}

impl SweepSpec {
    /// Powers of two `2⁰, 2⁻², …, 2⁻⁸`, depths `1, 2, 4, 8, 16` and the four
    /// dropout rates of the depth/scale ablation.
    pub fn standard() -> Self {
        SweepSpec {
            gamma: (0..=4).map(|i| 2f64.powi(-2 * i)).collect(),
            l_layers: vec![1, 2, 4, 8, 16],
            dropout: vec![0.0, 0.3, 0.6, 0.9],
        }
    }
}

/// One sweep result: the varied factor, its value and the run row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub factor: &'static str,
    pub value: f64,
    pub row: ResultRow,
}

/// Varies γ, L and dropout one at a time, holding the others at `mc`.
pub fn ablation_sweep(
    exp: &Experiment<'_>,
    mc: &ModelConfig,
    tc: &TrainConfig,
    sweep: &SweepSpec,
    opts: RunOptions,
) -> Result<Vec<SweepRow>> {
    let mut labels = Vec::new();
    let mut cells = Vec::new();
    for &g in &sweep.gamma {
        labels.push(("gamma", g));
        cells.push((ModelConfig { gamma: g, ..mc.clone() }, tc.clone()));
    }
    for &l in &sweep.l_layers {
        labels.push(("L", l as f64));
        cells.push((ModelConfig { l_layers: l, ..mc.clone() }, tc.clone()));
    }
    for &d in &sweep.dropout {
        labels.push(("dropout", d));
        cells.push((ModelConfig { dropout: d, ..mc.clone() }, tc.clone()));
    }
    for (m, t) in &cells {
        m.validate()?;
        t.validate()?;
    }
    let results = run_cells(exp, &cells, opts)?;
    let k = exp.splits.len();
    Ok(results
        .into_iter()
        .enumerate()
        .map(|(i, (_, row))| {
            let (factor, value) = labels[i / k];
            SweepRow { factor, value, row }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<&str> = ["factor", "value"].into_iter().chain(ResultRow::HEADER).collect();
    out.write_record(header)?;
    for r in rows {
        let mut rec = vec![r.factor.to_string(), r.value.to_string()];
        rec.extend(r.row.record());
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}
