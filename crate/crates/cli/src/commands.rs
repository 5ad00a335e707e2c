use crate::config::ExperimentConfig;
use crate::manifest::Manifest;
use crate::GlobalArgs;
use clap::Args;
use gpcn::bounds::{bound_row, extract_bound_inputs, oversmoothing_profile, write_bound_csv, BoundOptions};
use gpcn::data::{generate_sbm, load_dataset, save_dataset, GraphDataset, SyntheticSpec};
use gpcn::graph::{class_homophily, edge_homophily, normalized_adjacency, spectrum as eigen, SpectrumRequest};
use gpcn::models::{load_checkpoint, save_checkpoint, Checkpoint, ModelConfig};
use gpcn::train::{
    ablation_sweep, format_mean_std, grid_search, make_split, run_cells, write_results_csv,
    write_sweep_csv, Experiment, GridSpec, RunOptions, SplitProtocol, SweepSpec, TrainConfig,
};
use gpcn::verify::run_all;
use gpcn::{Error, Result};
use serde::Serialize;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

fn load_config(g: &GlobalArgs) -> Result<(ExperimentConfig, String)> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --config".into()))?;
    let (mut cfg, text) = ExperimentConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.split.seeds = vec![seed];
    }
    if let Some(s) = g.symmetrize {
        cfg.symmetrize = s;
    }
    cfg.train.f32 |= g.f32;
    cfg.row_normalize_features |= g.row_normalize;
    cfg.validate()?;
    Ok((cfg, text))
}

fn output_dir(g: &GlobalArgs, cfg: Option<&ExperimentConfig>) -> Result<PathBuf> {
    let dir = g
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("gpcn-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run_options(g: &GlobalArgs) -> RunOptions {
    RunOptions { jobs: g.jobs, record_time: g.timing }
}

/// Shared setup for commands driven by an experiment config.
struct Prepared {
    cfg: ExperimentConfig,
    text: String,
    ds: GraphDataset,
    splits: Vec<gpcn::train::Split>,
    inputs: gpcn::models::GraphInputs,
}

impl Prepared {
    fn new(g: &GlobalArgs) -> Result<Self> {
        let (cfg, text) = load_config(g)?;
        let ds = cfg.load_dataset()?;
        let splits = cfg.splits(&ds)?;
        let inputs = ds.graph_inputs(cfg.symmetrize)?;
        Ok(Prepared { cfg, text, ds, splits, inputs })
    }

    fn experiment(&self) -> Experiment<'_> {
        Experiment {
            name: self.cfg.name.as_deref().unwrap_or(&self.ds.name),
            inputs: &self.inputs,
            labels: &self.ds.labels,
            splits: &self.splits,
        }
    }

    fn seeds(&self) -> Vec<u64> {
        self.splits.iter().map(|s| s.seed).collect()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn train(g: &GlobalArgs) -> Result<u8> {
    let p = Prepared::new(g)?;
    let cell = (p.cfg.model.clone(), p.cfg.train.clone());
    let results = run_cells(&p.experiment(), std::slice::from_ref(&cell), run_options(g))?;
    let dir = output_dir(g, Some(&p.cfg))?;
    let mut manifest = Manifest::new("train", &p.text, p.seeds());

    let rows: Vec<_> = results.iter().map(|(_, row)| row.clone()).collect();
    write_results_csv(create(&dir.join("results.csv"))?, &rows)?;
    manifest.outputs.push("results.csv".into());
    for (r, row) in &results {
        let name = format!("checkpoint-seed{}.pgck", row.seed);
        let ck = Checkpoint { config: p.cfg.model.clone(), params: r.params.clone() };
        save_checkpoint(&dir.join(&name), &ck)?;
        manifest.outputs.push(name);
    }
    manifest.write(&dir)?;

    let ok: Vec<_> = results.iter().filter(|(r, _)| !r.is_aborted()).collect();
    for (r, row) in results.iter().filter(|(r, _)| r.is_aborted()) {
        eprintln!("warning: seed {} aborted: {:?}", row.seed, r.status);
    }
    if ok.is_empty() {
        return Err(Error::Numeric("every run aborted".into()));
    }
    let test: Vec<f64> = ok.iter().map(|(r, _)| r.test_acc).collect();
    let val: Vec<f64> = ok.iter().map(|(r, _)| r.best_val_acc).collect();
    println!("model: {}", p.cfg.model.kind);
    println!("dataset: {}", p.experiment().name);
    println!("splits: {}", ok.len());
    println!("validation accuracy: {}", format_mean_std(&val));
    println!("test accuracy: {}", format_mean_std(&test));
    println!("results: {}", dir.join("results.csv").display());
    Ok(0)
}

fn load_plain(g: &GlobalArgs, path: &Path) -> Result<GraphDataset> {
    let ds = load_dataset(path, g.format.unwrap_or_default())?;
    Ok(if g.row_normalize { ds.row_normalized() } else { ds })
}

pub fn homophily(g: &GlobalArgs, path: &Path) -> Result<u8> {
    let ds = load_plain(g, path)?;
    let edge = edge_homophily(&ds.adjacency, &ds.labels)?;
    let class = class_homophily(&ds.adjacency, &ds.labels)?;
    let report = format!(
        "nodes: {}\nedges: {}\nclasses: {}\nedge_homophily: {edge}\nclass_homophily: {class}\n",
        ds.num_nodes(),
        ds.adjacency.nnz(),
        ds.num_classes()
    );
    print!("{report}");
    if g.out.is_some() {
        let dir = output_dir(g, None)?;
        fs::write(dir.join("homophily.txt"), &report)?;
        let mut m = Manifest::new("homophily", &path.display().to_string(), vec![]);
        m.outputs.push("homophily.txt".into());
        m.write(&dir)?;
    }
    Ok(0)
}

pub fn spectrum(g: &GlobalArgs, path: &Path, k: &str) -> Result<u8> {
    let ds = load_plain(g, path)?;
    let request = match k {
        "all" => SpectrumRequest::All,
        n => SpectrumRequest::Top(
            n.parse()
                .map_err(|_| Error::Config(format!("--k must be a count or `all`, got {n:?}")))?,
        ),
    };
    let a = normalized_adjacency(&ds.adjacency, g.symmetrize.unwrap_or_default())?;
    let s = eigen(&a, request)?;
    let write = |w: &mut dyn Write| -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "eigenvalue"])?;
        for (i, l) in s.eigenvalues.iter().enumerate() {
            out.write_record([(i + 1).to_string(), l.to_string()])?;
        }
        out.flush()?;
        Ok(())
    };
    if g.out.is_some() {
        let dir = output_dir(g, None)?;
        write(&mut create(&dir.join("spectrum.csv"))?)?;
        let mut m = Manifest::new("spectrum", &format!("{} {k}", path.display()), vec![]);
        m.outputs.push("spectrum.csv".into());
        m.write(&dir)?;
    } else {
        write(&mut io::stdout().lock())?;
    }
    Ok(0)
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub dataset: PathBuf,
    pub checkpoint: PathBuf,
    /// 1: fixed γ pattern; 2: learned θ. Defaults to 2 when the checkpoint
    /// has θ.
    #[arg(long)]
    pub theorem: Option<u8>,
    /// Split protocol used to count training (M) and test (U) nodes.
    #[arg(long, default_value = "per_class_60_20_20")]
    pub split_protocol: String,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Activation output bound R.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Also sweep the fixed-γ bound over these depths, e.g. `1,2,4,8,16`.
    #[arg(long, value_delimiter = ',')]
    pub profile: Vec<usize>,
}

pub fn bound(g: &GlobalArgs, a: &BoundArgs) -> Result<u8> {
    let ds = load_plain(g, &a.dataset)?;
    let ck = load_checkpoint(&a.checkpoint)?;
    let protocol: SplitProtocol = a.split_protocol.parse()?;
    let split = make_split(&ds.labels, protocol, g.seed.unwrap_or(0))?;
    let mut inputs = extract_bound_inputs(&ds, &ck.params, &ck.config, &split, g.symmetrize.unwrap_or_default())?;
    inputs.r = a.r;
    let opts = BoundOptions {
        c_prime: a.c_prime,
        c0: a.c0,
        coefficients: g.coefficients.unwrap_or(BoundOptions::default().coefficients),
        delta: a.delta,
        ..BoundOptions::default()
    };
    let adaptive = match a.theorem {
        Some(1) => false,
        Some(2) => true,
        None => inputs.theta.is_some(),
        Some(t) => return Err(Error::Config(format!("--theorem must be 1 or 2, got {t}"))),
    };
    let mut rows = vec![bound_row(&inputs, &opts, adaptive)?];
    if !a.profile.is_empty() {
        rows.extend(oversmoothing_profile(&inputs, &a.profile, &opts)?);
    }
    if g.out.is_some() {
        let dir = output_dir(g, None)?;
        write_bound_csv(create(&dir.join("bound.csv"))?, &rows)?;
        let args = format!("{} {} {a:?} {opts:?}", a.dataset.display(), a.checkpoint.display());
        let mut m = Manifest::new("bound", &args, vec![split.seed]);
        m.outputs.push("bound.csv".into());
        m.write(&dir)?;
    } else {
        write_bound_csv(io::stdout().lock(), &rows)?;
    }
    Ok(0)
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn ablate(g: &GlobalArgs, sweep_path: Option<&Path>) -> Result<u8> {
    let p = Prepared::new(g)?;
    let sweep: SweepSpec = match sweep_path {
        Some(path) => read_toml(path)?,
        None => p.cfg.sweep.clone().unwrap_or_else(SweepSpec::standard),
    };
    let rows = ablation_sweep(&p.experiment(), &p.cfg.model, &p.cfg.train, &sweep, run_options(g))?;
    let dir = output_dir(g, Some(&p.cfg))?;
    write_sweep_csv(create(&dir.join("ablation.csv"))?, &rows)?;
    let mut m = Manifest::new("ablate", &p.text, p.seeds());
    m.outputs.push("ablation.csv".into());
    m.write(&dir)?;

    let k = p.splits.len();
    for chunk in rows.chunks(k) {
        let test: Vec<f64> = chunk.iter().map(|r| r.row.test_acc).collect();
        println!("{} = {}: {}", chunk[0].factor, chunk[0].value, format_mean_std(&test));
    }
    Ok(0)
}

#[derive(Serialize)]
struct BestConfig<'a> {
    model: &'a ModelConfig,
    train: &'a TrainConfig,
}

pub fn grid(g: &GlobalArgs, grid_path: Option<&Path>) -> Result<u8> {
    let p = Prepared::new(g)?;
    let spec: GridSpec = match grid_path {
        Some(path) => read_toml(path)?,
        None => p
            .cfg
            .grid
            .clone()
            .ok_or_else(|| Error::Config("no grid given: use --grid or a [grid] section".into()))?,
    };
    let outcome = grid_search(&p.experiment(), &p.cfg.model, &p.cfg.train, &spec, run_options(g))?;
    let dir = output_dir(g, Some(&p.cfg))?;
    write_results_csv(create(&dir.join("grid.csv"))?, &outcome.rows)?;
    let (model, train) = outcome.best_config();
    let best = toml::to_string(&BestConfig { model, train }).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("best.toml"), &best)?;
    let mut m = Manifest::new("grid", &p.text, p.seeds());
    m.outputs.extend(["grid.csv".into(), "best.toml".into()]);
    m.write(&dir)?;

    let score = outcome.scores[outcome.best];
    if score == f64::NEG_INFINITY {
        return Err(Error::Numeric("every grid cell aborted".into()));
    }
    let k = p.splits.len();
    let test: Vec<f64> = outcome.rows[outcome.best * k..(outcome.best + 1) * k]
        .iter()
        .map(|r| r.test_acc)
        .collect();
    println!("cells: {}", outcome.cells.len());
    println!("best mean validation accuracy: {:.2}", 100.0 * score);
    println!("test accuracy at best cell: {}", format_mean_std(&test));
    println!("best configuration:\n{best}");
    Ok(0)
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long)]
    pub p_in: f64,
    #[arg(long)]
    pub p_out: f64,
    #[arg(long, default_value_t = 8)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
}

pub fn synth(g: &GlobalArgs, a: &SynthArgs) -> Result<u8> {
    let out = g
        .out
        .clone()
        .ok_or_else(|| Error::Config("synth needs --out <file>".into()))?;
    let spec = SyntheticSpec {
        n: a.n,
        classes: a.classes,
        p_in: a.p_in,
        p_out: a.p_out,
        feature_dim: a.feature_dim,
        feature_separation: a.separation,
        seed: g.seed.unwrap_or(0),
    };
    let ds = generate_sbm(&spec)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_dataset(&ds, &out, g.format.unwrap_or_default())?;
    let spec_text = serde_json::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?;
    let mut m = Manifest::new("synth", &spec_text, vec![spec.seed]);
    let file_name = out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    m.outputs.push(file_name.clone());
    let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Data(e.to_string()))?;
    fs::write(out.with_file_name(format!("{file_name}.manifest.json")), text + "\n")?;
    println!(
        "wrote {} ({} nodes, {} stored edges, edge homophily {})",
        out.display(),
        ds.num_nodes(),
        ds.adjacency.nnz(),
        edge_homophily(&ds.adjacency, &ds.labels).map_or("undefined".into(), |h| h.to_string())
    );
    Ok(0)
}

pub fn verify() -> Result<u8> {
    let checks = run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { 3 })
}
