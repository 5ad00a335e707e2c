mod common;

use common::*;
use gpcn::autodiff::{gradcheck, Tape, Var};
use gpcn::graph::{SparseAdjacency, Symmetrize};
use gpcn::linalg::rel_inf_diff;
use gpcn::models::{
    forward, gpcn_forward_polynomial, gpcn_forward_recursive, init_params, layer_name, load_checkpoint, predict,
    predict_with, save_checkpoint, theta_for, Checkpoint, Coefficients, GraphInputs, ModelConfig, ModelKind, Mode,
    MuParam, ParamVars, ParameterSet, MU_RAW, THETA, W_OUT, W_RES,
};
use gpcn::rng::CounterRng;
use gpcn::Matrix;

fn problem(n: usize, q: usize, c: usize, r: &mut CounterRng) -> (GraphInputs, Vec<(usize, usize)>, Vec<usize>) {
    let edges = random_edges(n, 0.3, true, r);
    let x = random_matrix(n, q, r);
    let labels = random_labels(n, c, r);
    let g = GraphInputs::new(x, sparse(&edges, n), c, Symmetrize::Auto).unwrap();
    (g, edges, labels)
}

fn config(kind: ModelKind, t: usize, l: usize, hidden: usize, gamma: f64) -> ModelConfig {
    let mut cfg = ModelConfig::new(kind);
    cfg.t_layers = t;
    cfg.l_layers = l;
    cfg.hidden = hidden;
    cfg.gamma = gamma;
    cfg
}

fn polynomial(coeffs: Coefficients, params: &ParameterSet, g: &GraphInputs, cfg: &ModelConfig) -> Matrix {
    predict_with(params, g, cfg, Default::default(), |t, g, p, c, m| {
        gpcn_forward_polynomial(t, g, p, c, m, coeffs)
    })
    .unwrap()
}

#[test]
fn gpcn_matches_dense_expansion() {
    let mut r = rng(10);
    for l in 1..=8 {
        let (g, edges, _) = problem(9, 4, 3, &mut r);
        let cfg = config(ModelKind::Gpcn, 1 + l % 3, l, 5, 2f64.powi(l as i32 % 5 - 3));
        let params = init_params(&cfg, g.dims(), l as u64).unwrap();
        let layers: Vec<Dense> = (0..cfg.t_layers)
            .map(|i| to_dense(params.require(&layer_name(i)).unwrap()))
            .collect();
        let want = gpcn_logits(
            &to_dense(&g.features),
            &normalize(&dense_adjacency(&edges, 9)),
            &layers,
            &to_dense(params.require(W_RES).unwrap()),
            &to_dense(params.require(W_OUT).unwrap()),
            l,
            cfg.gamma,
        );
        let rec = predict_with(&params, &g, &cfg, Default::default(), gpcn_forward_recursive).unwrap();
        let poly = polynomial(Coefficients::Canonical, &params, &g, &cfg);
        assert!(max_rel_diff(&want, &to_dense(&rec)) < 1e-12, "recursive, L = {l}");
        assert!(max_rel_diff(&want, &to_dense(&poly)) < 1e-12, "polynomial, L = {l}");
    }
}

#[test]
fn linear_coefficients_agree_only_for_shallow_stacks() {
    let mut r = rng(11);
    for l in 1..=8 {
        let (g, _, _) = problem(10, 3, 2, &mut r);
        let cfg = config(ModelKind::Gpcn, 1, l, 6, 0.5);
        let params = init_params(&cfg, g.dims(), 3).unwrap();
        let rec = predict(&params, &g, &cfg).unwrap();
        let linear = polynomial(Coefficients::Linear, &params, &g, &cfg);
        let d = rel_inf_diff(&rec, &linear);
        if l <= 3 {
            assert!(d < 1e-12, "L = {l}: {d}");
        } else {
            assert!(d > 1e-6, "L = {l}: linear coefficients unexpectedly match");
        }
    }
}

#[test]
fn reductions_hold() {
    let mut r = rng(12);
    for i in 0..10 {
        let (g, _, _) = problem(8, 3, 3, &mut r);
        let base = config(ModelKind::Gpcn, 1 + i % 2, 1 + i % 4, 4, 0.0);
        let params = init_params(&base, g.dims(), i as u64).unwrap();
        let mlp = ModelConfig { kind: ModelKind::Mlp, ..base.clone() };
        assert!(rel_inf_diff(&predict(&params, &g, &base).unwrap(), &predict(&params, &g, &mlp).unwrap()) < 1e-12);

        let link = ModelConfig { kind: ModelKind::GpcnLink, gamma: 0.3, mu_param: MuParam::Clamp, ..base.clone() };
        let mut lp = init_params(&link, g.dims(), i as u64).unwrap();
        lp.insert(MU_RAW, Matrix::scalar(1.0));
        let plain = ModelConfig { kind: ModelKind::Gpcn, ..link.clone() };
        assert!(rel_inf_diff(&predict(&lp, &g, &link).unwrap(), &predict(&lp, &g, &plain).unwrap()) < 1e-12);

        let adaptive = ModelConfig { kind: ModelKind::Agpcn, ..plain.clone() };
        let ap = init_params(&adaptive, g.dims(), i as u64).unwrap();
        assert_eq!(ap.require(THETA).unwrap(), &theta_for(Coefficients::Canonical, plain.l_layers, 0.3));
        assert!(rel_inf_diff(&predict(&ap, &g, &adaptive).unwrap(), &predict(&ap, &g, &plain).unwrap()) < 1e-12);
    }
}

#[test]
fn sigmoid_mu_at_init_is_one_half() {
    let mut r = rng(13);
    let (g, _, _) = problem(6, 2, 2, &mut r);
    let cfg = config(ModelKind::GpcnLink, 1, 2, 3, 0.5);
    let p = init_params(&cfg, g.dims(), 0).unwrap();
    assert_eq!(p.mu(&cfg), Some(0.5));
}

fn permuted(g: &GraphInputs, edges: &[(usize, usize)], perm: &[usize]) -> GraphInputs {
    let n = perm.len();
    let pe: Vec<_> = edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
    let mut x = Matrix::zeros(n, g.features.cols());
    for i in 0..n {
        x.row_mut(perm[i]).copy_from_slice(g.features.row(i));
    }
    GraphInputs::new(x, SparseAdjacency::from_edges(&pe, n, false).unwrap(), g.num_classes, Symmetrize::Auto).unwrap()
}

#[test]
fn node_permutation_equivariance() {
    let mut r = rng(14);
    let kinds = [ModelKind::Gcn, ModelKind::Sgc, ModelKind::Gpcn, ModelKind::Agpcn, ModelKind::Mlp, ModelKind::Gprgnn];
    for kind in kinds {
        let (g, edges, _) = problem(11, 4, 3, &mut r);
        let mut perm: Vec<usize> = (0..11).collect();
        r.shuffle(&mut perm);
        let pg = permuted(&g, &edges, &perm);
        let cfg = config(kind, 2, 3, 5, 0.5);
        let params = init_params(&cfg, g.dims(), 1).unwrap();
        let a = predict(&params, &g, &cfg).unwrap();
        let b = predict(&params, &pg, &cfg).unwrap();
        for i in 0..11 {
            for j in 0..3 {
                assert!((a.get(i, j) - b.get(perm[i], j)).abs() < 1e-12, "{kind}");
            }
        }
    }
}

fn loss_fn<'a>(
    cfg: &'a ModelConfig,
    g: &'a GraphInputs,
    labels: &'a [usize],
    names: &'a [String],
) -> impl Fn(&mut Tape, &[Var]) -> gpcn::Result<Var> + 'a {
    move |tape, vars| {
        let pv = ParamVars::from_pairs(names.iter().cloned().zip(vars.iter().copied()).collect());
        let logits = forward(tape, g, &pv, cfg, &mut Mode::eval())?;
        let rows: Vec<usize> = (0..labels.len()).step_by(2).collect();
        let loss = tape.softmax_cross_entropy(logits, labels, &rows)?;
        let decayed: Vec<Var> = pv.iter().map(|(_, v)| v).collect();
        let reg = tape.l2_penalty(&decayed, 0.05)?;
        tape.add(loss, reg)
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(15);
    for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
        let (g, _, labels) = problem(7, 3, 3, &mut r);
        let mut cfg = config(kind, 1 + i % 2, 1 + i % 3, 4, 0.5);
        cfg.gcn_layers = 2;
        cfg.mu_param = if i % 2 == 0 { MuParam::Sigmoid } else { MuParam::Clamp };
        let mut params = init_params(&cfg, g.dims(), i as u64).unwrap();
        if let Some(mu) = params.get_mut(MU_RAW) {
            *mu = Matrix::scalar(0.35);
        }
        let names = params.names();
        let values: Vec<Matrix> = params.iter().map(|(_, m)| m.clone()).collect();
        let err = gradcheck(loss_fn(&cfg, &g, &labels, &names), &values, 1e-5).unwrap();
        assert!(err < 1e-6, "{kind}: {err:e}");
    }
}

#[test]
fn dropout_is_unbiased_and_reproducible() {
    let x = Matrix::filled(200, 50, 1.0);
    let p = 0.3;
    let run = |seed, epoch| {
        let mut tape = Tape::new();
        let v = tape.constant(x.clone()).unwrap();
        let mut rng = CounterRng::new(seed, epoch);
        let out = tape.dropout(v, p, &mut rng, true).unwrap();
        tape.value(out).clone()
    };
    let a = run(7, 1);
    let dropped = a.data().iter().filter(|&&v| v == 0.0).count() as f64 / a.len() as f64;
    assert!((dropped - p).abs() < 0.02, "{dropped}");
    assert!((a.sum() / a.len() as f64 - 1.0).abs() < 0.03);
    assert!(a.data().iter().all(|&v| v == 0.0 || (v - 1.0 / 0.7).abs() < 1e-15));
    assert_eq!(a, run(7, 1));
    assert_ne!(a, run(7, 2));

    let mut tape = Tape::new();
    let v = tape.constant(x.clone()).unwrap();
    let out = tape.dropout(v, p, &mut CounterRng::new(0, 0), false).unwrap();
    assert_eq!(tape.value(out), &x);
}

#[test]
fn training_mode_forward_depends_on_epoch_only_through_dropout() {
    let mut r = rng(16);
    let (g, _, _) = problem(10, 3, 2, &mut r);
    let mut cfg = config(ModelKind::GpcnLink, 1, 2, 8, 0.5);
    cfg.dropout = 0.5;
    let params = init_params(&cfg, g.dims(), 0).unwrap();
    let run = |mode: &mut Mode| {
        let mut tape = Tape::new();
        let pv = params.register(&mut tape).unwrap();
        let out = forward(&mut tape, &g, &pv, &cfg, mode).unwrap();
        tape.value(out).clone()
    };
    assert_eq!(run(&mut Mode::train(3, 5)), run(&mut Mode::train(3, 5)));
    assert_ne!(run(&mut Mode::train(3, 5)), run(&mut Mode::train(3, 6)));
    assert_eq!(run(&mut Mode::eval()), predict(&params, &g, &cfg).unwrap());
}

#[test]
fn checkpoint_round_trip() {
    let mut r = rng(17);
    let (g, _, _) = problem(9, 4, 3, &mut r);
    let cfg = config(ModelKind::AgpcnLink, 2, 3, 6, 0.25);
    let params = init_params(&cfg, g.dims(), 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pgck");
    save_checkpoint(&path, &Checkpoint { config: cfg.clone(), params: params.clone() }).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(back.params, params);
    assert_eq!(predict(&back.params, &g, &back.config).unwrap(), predict(&params, &g, &cfg).unwrap());

    std::fs::write(&path, b"nope").unwrap();
    assert!(load_checkpoint(&path).is_err());
}

#[test]
fn init_is_seeded() {
    let cfg = config(ModelKind::Gpcn, 2, 2, 8, 0.5);
    let dims = gpcn::models::Dims { nodes: 5, features: 3, classes: 2 };
    assert_eq!(init_params(&cfg, dims, 4).unwrap(), init_params(&cfg, dims, 4).unwrap());
    assert_ne!(init_params(&cfg, dims, 4).unwrap(), init_params(&cfg, dims, 5).unwrap());
}

#[test]
fn structural_errors_are_reported() {
    let mut r = rng(18);
    let (g, _, _) = problem(5, 2, 2, &mut r);
    let mut cfg = config(ModelKind::Gpcn, 0, 1, 4, 0.5);
    assert!(init_params(&cfg, g.dims(), 0).is_err());
    cfg.t_layers = 1;
    cfg.dropout = 1.0;
    assert!(cfg.validate().is_err());
    cfg.dropout = 0.0;
    cfg.gamma = -1.0;
    assert!(cfg.validate().is_err());
}
