mod common;

use common::*;
use gpcn::graph::{
    class_homophily, edge_homophily, normalized_adjacency, spectrum, LabelVector, SparseAdjacency, SpectrumMethod,
    SpectrumRequest, Symmetrize,
};
use gpcn::{Error, Matrix};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = proptest::collection::vec((0..n, 0..n), 0..3 * n);
        (Just(n), pairs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmm_matches_dense_product((n, raw) in graph_strategy(20), cols in 1usize..5, seed in any::<u64>()) {
        let edges: Vec<_> = raw.into_iter().filter(|(i, j)| i != j).collect();
        let a = SparseAdjacency::from_edges(&edges, n, true).unwrap();
        let x = random_matrix(n, cols, &mut rng(seed));
        let got = to_dense(&a.spmm(&x).unwrap());
        let mut dense = vec![vec![0.0; n]; n];
        for &(i, j) in &edges {
            dense[i][j] = 1.0;
        }
        let want = mm(&dense, &to_dense(&x));
        prop_assert!(max_rel_diff(&want, &got) < 1e-14);

        let back = to_dense(&a.spmm_transpose(&x).unwrap());
        let dense_t: Dense = (0..n).map(|i| (0..n).map(|j| dense[j][i]).collect()).collect();
        prop_assert!(max_rel_diff(&mm(&dense_t, &to_dense(&x)), &back) < 1e-14);
    }

    #[test]
    fn normalization_matches_dense_formula((n, raw) in graph_strategy(25)) {
        let edges: Vec<_> = raw.into_iter().filter(|(i, j)| i != j).collect();
        let a = sparse(&edges, n);
        let got = to_dense(&normalized_adjacency(&a, Symmetrize::Auto).unwrap().to_dense());
        let want = normalize(&dense_adjacency(&edges, n));
        prop_assert!(max_rel_diff(&want, &got) < 1e-15);
    }

    #[test]
    fn homophily_is_permutation_invariant((n, raw) in graph_strategy(30), seed in any::<u64>()) {
        let edges: Vec<_> = raw.into_iter().filter(|(i, j)| i != j).collect();
        prop_assume!(!edges.is_empty());
        let mut r = rng(seed);
        let c = 2 + (seed % 3) as usize;
        prop_assume!(n >= c);
        let labels = random_labels(n, c, &mut r);
        let a = sparse(&edges, n);
        let y = LabelVector::new(labels.clone(), c).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        r.shuffle(&mut perm);
        let pa = a.permute(&perm).unwrap();
        let mut plabels = vec![0; n];
        for i in 0..n {
            plabels[perm[i]] = labels[i];
        }
        let py = LabelVector::new(plabels, c).unwrap();
        prop_assert_eq!(edge_homophily(&a, &y).unwrap(), edge_homophily(&pa, &py).unwrap());
        match (class_homophily(&a, &y), class_homophily(&pa, &py)) {
            (Ok(x), Ok(z)) => prop_assert!((x - z).abs() < 1e-14),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "class homophily defined on only one ordering"),
        }
    }
}

#[test]
fn homophily_matches_enumeration() {
    let mut r = rng(1);
    for _ in 0..40 {
        let c = 2 + r.below(4) as usize;
        let n = 2 * c + r.below(30) as usize;
        let edges = random_edges(n, 0.15, true, &mut r);
        let labels = random_labels(n, c, &mut r);
        let (e, k) = homophily_by_enumeration(&dense_adjacency(&edges, n), &labels, c);
        let y = LabelVector::new(labels, c).unwrap();
        let a = sparse(&edges, n);
        assert!((edge_homophily(&a, &y).unwrap() - e).abs() < 1e-12);
        assert!((class_homophily(&a, &y).unwrap() - k).abs() < 1e-12);
    }
}

#[test]
fn homophily_extremes() {
    // Two disjoint triangles, one per class.
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
    let a = sparse(&edges, 6);
    let y = LabelVector::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
    assert_eq!(edge_homophily(&a, &y).unwrap(), 1.0);
    assert_eq!(class_homophily(&a, &y).unwrap(), 1.0);
    // Complete bipartite: every edge crosses.
    let bip = [(0, 3), (0, 4), (1, 3), (1, 4), (2, 5), (0, 5)];
    let b = sparse(&bip, 6);
    assert_eq!(edge_homophily(&b, &y).unwrap(), 0.0);
    assert_eq!(class_homophily(&b, &y).unwrap(), 0.0);
}

#[test]
fn homophily_rejects_empty_graph() {
    let a = sparse(&[], 4);
    let y = LabelVector::new(vec![0, 1, 0, 1], 2).unwrap();
    assert!(matches!(edge_homophily(&a, &y), Err(Error::UndefinedMeasure(_))));
}

#[test]
fn dense_spectrum_matches_jacobi() {
    let mut r = rng(2);
    for _ in 0..30 {
        let n = 2 + r.below(40) as usize;
        let edges = random_edges(n, 0.2, true, &mut r);
        let at = normalized_adjacency(&sparse(&edges, n), Symmetrize::Auto).unwrap();
        let got = spectrum(&at, SpectrumRequest::All).unwrap();
        assert_eq!(got.method, SpectrumMethod::Dense);
        let want = jacobi_eigenvalues(&to_dense(&at.to_dense()));
        for (g, w) in got.eigenvalues.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }
}

#[test]
fn spectrum_of_known_matrices() {
    // Path on two nodes: Ã = [[1/2, 1/2], [1/2, 1/2]].
    let at = normalized_adjacency(&sparse(&[(0, 1)], 2), Symmetrize::Auto).unwrap();
    let s = spectrum(&at, SpectrumRequest::All).unwrap();
    assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
    assert!(s.eigenvalues[1].abs() < 1e-15);
    // Complete graph K_n: eigenvalues 1 and 0 (n−1 times).
    let n = 7;
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let at = normalized_adjacency(&sparse(&edges, n), Symmetrize::Auto).unwrap();
    let s = spectrum(&at, SpectrumRequest::All).unwrap();
    assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
    assert!(s.eigenvalues[1..].iter().all(|v| v.abs() < 1e-12));
    assert!((s.power_sum(2).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn lanczos_matches_dense_top_values() {
    let mut r = rng(3);
    for _ in 0..10 {
        let n = 60 + r.below(100) as usize;
        let edges = random_edges(n, 0.05, true, &mut r);
        let at = normalized_adjacency(&sparse(&edges, n), Symmetrize::Auto).unwrap();
        let dense = spectrum(&at, SpectrumRequest::All).unwrap();
        let top = spectrum(&at, SpectrumRequest::Top(5)).unwrap();
        assert_eq!(top.method, SpectrumMethod::Lanczos);
        assert_eq!(top.n_computed(), 5);
        assert!(!top.is_full());
        for (a, b) in top.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(matches!(top.power_sum(1), Err(Error::InsufficientSpectrum { .. })));
    }
}

#[test]
fn directed_input_is_kept_or_symmetrized() {
    let a = SparseAdjacency::from_edges(&[(0, 1), (1, 2)], 3, true).unwrap();
    let directed = normalized_adjacency(&a, Symmetrize::Never).unwrap();
    assert!(matches!(
        spectrum(&directed, SpectrumRequest::All),
        Err(Error::Asymmetric { .. })
    ));
    let forced = normalized_adjacency(&a, Symmetrize::Force).unwrap();
    forced.check_symmetric(1e-15).unwrap();
    // Â + Âᵀ for the directed path is 2I plus the undirected path.
    let mut m = vec![vec![0.0; 3]; 3];
    for (i, j) in [(0, 1), (1, 2)] {
        m[i][j] += 1.0;
        m[j][i] += 1.0;
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += 2.0;
    }
    let d: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    let want: Dense = (0..3).map(|i| (0..3).map(|j| m[i][j] / (d[i] * d[j]).sqrt()).collect()).collect();
    assert!(max_rel_diff(&want, &to_dense(&forced.to_dense())) < 1e-15);
}

#[test]
fn isolated_nodes_keep_their_self_loop() {
    let a = sparse(&[(0, 1)], 3);
    let at = normalized_adjacency(&a, Symmetrize::Auto).unwrap();
    assert_eq!(at.get(2, 2), 1.0);
    assert_eq!(at.row_nnz(2), 1);
    let x = Matrix::from_rows(&[vec![1.0], vec![3.0], vec![5.0]]).unwrap();
    assert_eq!(at.spmm(&x).unwrap().get(2, 0), 5.0);
}
