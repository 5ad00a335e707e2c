//! Self-checks run by `gpcn verify`: gradient checks, model equivalences,
//! oracle comparisons and format round trips on small random instances.

use crate::autodiff::{gradcheck, Tape, Var};
use crate::bounds::{theorem1_terms, theorem2_terms, BoundInputs, BoundOptions};
use crate::data::{generate_sbm, read_binary, read_text, write_binary, write_text, GraphDataset, SyntheticSpec};
use crate::graph::{
    class_homophily, edge_homophily, spectrum, LabelVector, SparseAdjacency, SpectrumRequest, Symmetrize,
};
use crate::linalg::rel_inf_diff;
use crate::models::{
    forward, gpcn_forward_polynomial, gpcn_forward_recursive, init_params, predict, predict_with, theta_for,
    Coefficients, GraphInputs, ModelConfig, ModelKind, Mode, MuParam, ParamVars, ParameterSet, MU_RAW, THETA,
};
use crate::rng::CounterRng;
use crate::{Matrix, Result};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

/// Random connected undirected graph: a random spanning path plus extra
/// edges with probability `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut CounterRng) -> Result<SparseAdjacency> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    SparseAdjacency::from_edges(&edges, n, false)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut CounterRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
}

/// A small random problem for model checks.
pub fn random_problem(n: usize, q: usize, c: usize, rng: &mut CounterRng) -> Result<(GraphInputs, Vec<usize>)> {
    let a = random_connected_graph(n, 0.3, rng)?;
    let x = random_matrix(n, q, rng);
    let labels = (0..n).map(|i| if i < c { i } else { rng.below(c as u64) as usize }).collect();
    Ok((GraphInputs::new(x, a, c, Symmetrize::Auto)?, labels))
}

/// Largest gradient error over all parameters of a model on one instance,
/// with the training loss on every node plus an L2 term on `θ`.
pub fn model_gradcheck(cfg: &ModelConfig, g: &GraphInputs, labels: &[usize], params: &ParameterSet) -> Result<f64> {
    let names = params.names();
    let values: Vec<Matrix> = params.iter().map(|(_, m)| m.clone()).collect();
    let rows: Vec<usize> = (0..labels.len()).collect();
    gradcheck(
        |tape: &mut Tape, vars: &[Var]| {
            let pv = ParamVars::from_pairs(names.iter().cloned().zip(vars.iter().copied()).collect());
            let logits = forward(tape, g, &pv, cfg, &mut Mode::eval())?;
            let loss = tape.softmax_cross_entropy(logits, labels, &rows)?;
            if cfg.kind.uses_theta() {
                let reg = tape.l2_penalty(&[pv.get(THETA)?], 0.01)?;
                return tape.add(loss, reg);
            }
            Ok(loss)
        },
        &values,
        1e-5,
    )
}

fn random_config(kind: ModelKind, rng: &mut CounterRng) -> ModelConfig {
    let mut cfg = ModelConfig::new(kind);
    cfg.t_layers = 1 + rng.below(3) as usize;
    cfg.l_layers = 1 + rng.below(4) as usize;
    cfg.hidden = 2 + rng.below(7) as usize;
    cfg.gamma = 2f64.powi(-(rng.below(4) as i32));
    cfg.gcn_layers = 1 + rng.below(3) as usize;
    cfg.sgc_power = rng.below(3) as usize;
    cfg
}

fn check_gradients() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(11, 0);
    let mut worst = 0.0f64;
    for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
        let cfg = random_config(kind, &mut rng);
        let (g, labels) = random_problem(6 + i % 4, 3, 3, &mut rng)?;
        let mut params = init_params(&cfg, g.dims(), i as u64)?;
        if let Some(mu) = params.get_mut(MU_RAW) {
            *mu = Matrix::scalar(0.3);
        }
        worst = worst.max(model_gradcheck(&cfg, &g, &labels, &params)?);
    }
    Ok((worst < 1e-4, format!("max relative error {worst:.2e} over all model kinds")))
}

fn check_recursion() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(12, 0);
    let mut worst = 0.0f64;
    for l in 1..=8 {
        let mut cfg = random_config(ModelKind::Gpcn, &mut rng);
        cfg.l_layers = l;
        let (g, _) = random_problem(10, 4, 3, &mut rng)?;
        let params = init_params(&cfg, g.dims(), l as u64)?;
        let rec = predict_with(&params, &g, &cfg, Default::default(), gpcn_forward_recursive)?;
        let poly = predict_with(&params, &g, &cfg, Default::default(), |t, g, p, c, m| {
            gpcn_forward_polynomial(t, g, p, c, m, Coefficients::Canonical)
        })?;
        worst = worst.max(rel_inf_diff(&rec, &poly));
    }
    Ok((worst < 1e-10, format!("max relative discrepancy {worst:.2e} for L = 1..8")))
}

fn check_reductions() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(13, 0);
    let (g, _) = random_problem(9, 4, 3, &mut rng)?;
    let mut worst = 0.0f64;

    let mut gpcn = random_config(ModelKind::Gpcn, &mut rng);
    let params = init_params(&gpcn, g.dims(), 1)?;
    gpcn.gamma = 0.0;
    let mlp = ModelConfig { kind: ModelKind::Mlp, ..gpcn.clone() };
    worst = worst.max(rel_inf_diff(&predict(&params, &g, &gpcn)?, &predict(&params, &g, &mlp)?));

    let link = ModelConfig { kind: ModelKind::GpcnLink, gamma: 0.5, mu_param: MuParam::Clamp, ..gpcn.clone() };
    let mut lp = init_params(&link, g.dims(), 2)?;
    lp.insert(MU_RAW, Matrix::scalar(1.0));
    let plain = ModelConfig { kind: ModelKind::Gpcn, ..link.clone() };
    worst = worst.max(rel_inf_diff(&predict(&lp, &g, &link)?, &predict(&lp, &g, &plain)?));

    let agpcn = ModelConfig { kind: ModelKind::Agpcn, ..plain.clone() };
    let mut ap = init_params(&agpcn, g.dims(), 3)?;
    ap.insert(THETA, theta_for(Coefficients::Canonical, agpcn.l_layers, agpcn.gamma));
    worst = worst.max(rel_inf_diff(&predict(&ap, &g, &agpcn)?, &predict(&ap, &g, &plain)?));
    Ok((worst < 1e-12, format!("max discrepancy {worst:.2e}")))
}

fn brute_force_homophily(a: &SparseAdjacency, y: &LabelVector) -> (f64, f64) {
    let n = y.len();
    let c = y.num_classes();
    let (mut same, mut total) = (0.0, 0.0);
    let mut same_k = vec![0.0; c];
    let mut deg_k = vec![0.0; c];
    let mut size_k = vec![0.0; c];
    for i in 0..n {
        size_k[y.get(i)] += 1.0;
        for j in 0..n {
            if a.get(i, j) != 0.0 {
                total += 1.0;
                deg_k[y.get(i)] += 1.0;
                if y.get(i) == y.get(j) {
                    same += 1.0;
                    same_k[y.get(i)] += 1.0;
                }
            }
        }
    }
    let class = (0..c)
        .map(|k| (same_k[k] / deg_k[k] - size_k[k] / n as f64).max(0.0))
        .sum::<f64>()
        / (c - 1) as f64;
    (same / total, class)
}

fn check_homophily() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(14, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = 2 + rng.below(3) as usize;
        let n = 3 * c + rng.below(20) as usize;
        let a = random_connected_graph(n, 0.2, &mut rng)?;
        let labels = (0..n).map(|i| if i < c { i } else { rng.below(c as u64) as usize }).collect();
        let y = LabelVector::new(labels, c)?;
        let (e, k) = brute_force_homophily(&a, &y);
        worst = worst.max((edge_homophily(&a, &y)? - e).abs());
        worst = worst.max((class_homophily(&a, &y)? - k).abs());
    }
    Ok((worst < 1e-12, format!("max deviation from brute force {worst:.2e}")))
}

fn check_spectrum() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(15, 0);
    let (mut top_err, mut excess, mut lanczos_err) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..10 {
        let n = 20 + 10 * t;
        let a = random_connected_graph(n, 0.1, &mut rng)?;
        let at = crate::graph::normalized_adjacency(&a, Symmetrize::Auto)?;
        let full = spectrum(&at, SpectrumRequest::All)?;
        top_err = top_err.max((full.eigenvalues[0] - 1.0).abs());
        excess = excess.max(full.eigenvalues.iter().map(|l| l.abs() - 1.0).fold(f64::MIN, f64::max));
        let top = spectrum(&at, SpectrumRequest::Top(5))?;
        for (x, y) in top.eigenvalues.iter().zip(&full.eigenvalues) {
            lanczos_err = lanczos_err.max((x - y).abs());
        }
    }
    Ok((
        top_err < 1e-8 && excess <= 1e-9 && lanczos_err < 1e-6,
        format!("|λ₁−1| ≤ {top_err:.1e}, max |λ|−1 = {excess:.1e}, Lanczos error {lanczos_err:.1e}"),
    ))
}

fn check_bounds() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(16, 0);
    let mut worst = 0.0f64;
    let mut link_ok = true;
    for _ in 0..50 {
        let n = 6;
        let a = random_connected_graph(n, 0.4, &mut rng)?;
        let at = crate::graph::normalized_adjacency(&a, Symmetrize::Auto)?;
        let t_layers = 1 + rng.below(3) as usize;
        let l = 1 + rng.below(6) as usize;
        let gamma = rng.uniform(0.05, 1.0);
        let mut inp = BoundInputs {
            spectrum: spectrum(&at, SpectrumRequest::All)?,
            b: (0..t_layers + 2).map(|_| rng.uniform(0.1, 2.0)).collect(),
            b_a: rng.uniform(0.1, 2.0),
            mu: rng.next_f64(),
            gamma,
            theta: None,
            t_layers,
            l_layers: l,
            m: 1 + rng.below(50) as usize,
            u: 1 + rng.below(50) as usize,
            x_fro: rng.uniform(0.1, 10.0),
            r: 1.0,
            n,
        };
        let opts = BoundOptions::default();
        inp.theta = Some((0..=l).map(|k| opts.coefficients.coefficient(l, k, gamma)).collect());
        let t1 = theorem1_terms(&inp, &opts)?.rhs();
        let t2 = theorem2_terms(&inp, &opts)?.rhs();
        worst = worst.max((t1 - t2).abs() / t1.abs().max(1e-300));
        inp.mu = 1.0;
        link_ok &= theorem1_terms(&inp, &opts)?.link == 0.0;
    }
    Ok((worst < 1e-12 && link_ok, format!("adaptive vs fixed relative gap {worst:.2e}; μ=1 link term zero: {link_ok}")))
}

fn check_round_trip() -> Result<(bool, String)> {
    let ds = generate_sbm(&SyntheticSpec {
        n: 30,
        classes: 3,
        p_in: 0.3,
        p_out: 0.05,
        feature_dim: 4,
        feature_separation: 1.0,
        seed: 5,
    })?;
    let mut text = Vec::new();
    write_text(&mut text, &ds)?;
    let mut bin = Vec::new();
    write_binary(&mut bin, &ds)?;
    let from_text: GraphDataset = read_text(text.as_slice(), &ds.name)?;
    let from_bin = read_binary(bin.as_slice(), &ds.name)?;
    let ok = from_text == ds && from_bin == ds;
    Ok((ok, format!("text and binary round trips exact: {ok}")))
}

fn check_spmm() -> Result<(bool, String)> {
    let mut rng = CounterRng::new(17, 0);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = 5 + rng.below(40) as usize;
        let a = random_connected_graph(n, 0.2, &mut rng)?;
        let x = random_matrix(n, 3, &mut rng);
        let s = a.spmm(&x)?;
        let d = a.to_dense().matmul(&x)?;
        worst = worst.max(rel_inf_diff(&d, &s));
    }
    Ok((worst < 1e-12, format!("max deviation from dense product {worst:.2e}")))
}

/// Runs the whole suite.
pub fn run_all() -> Vec<Check> {
    vec![
        Check::from_result("sparse product matches dense", check_spmm()),
        Check::from_result("homophily matches brute force", check_homophily()),
        Check::from_result("normalized spectrum invariants", check_spectrum()),
        Check::from_result("gradients match finite differences", check_gradients()),
        Check::from_result("recursive and polynomial forms agree", check_recursion()),
        Check::from_result("model reductions", check_reductions()),
        Check::from_result("bound formulas agree", check_bounds()),
        Check::from_result("dataset round trips", check_round_trip()),
    ]
}
