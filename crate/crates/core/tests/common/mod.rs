//! Independent dense oracles shared by the integration tests. Nothing here
//! calls into the sparse or tape code paths under test.
#![allow(dead_code)]

use gpcn::graph::SparseAdjacency;
use gpcn::rng::CounterRng;
use gpcn::Matrix;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> CounterRng {
    CounterRng::new(seed, 0xACCE)
}

/// Undirected simple graph as an edge list, optionally made connected by a
/// random spanning path.
pub fn random_edges(n: usize, p: f64, connected: bool, rng: &mut CounterRng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if connected {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        edges.extend(order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.next_f64() < p && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn sparse(edges: &[(usize, usize)], n: usize) -> SparseAdjacency {
    SparseAdjacency::from_edges(edges, n, false).unwrap()
}

/// Labels covering every class at least once.
pub fn random_labels(n: usize, c: usize, rng: &mut CounterRng) -> Vec<usize> {
    (0..n).map(|i| if i < c { i } else { rng.below(c as u64) as usize }).collect()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut CounterRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
}

pub fn dense_adjacency(edges: &[(usize, usize)], n: usize) -> Dense {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j) in edges {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    a
}

pub fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

pub fn mm(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn axpy(a: &Dense, c: f64, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + c * v).collect())
        .collect()
}

pub fn relu(a: &Dense) -> Dense {
    a.iter().map(|r| r.iter().map(|v| v.max(0.0)).collect()).collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

/// `D^{-1/2}(A+I)D^{-1/2}` with `D` the row sums of `A+I`.
pub fn normalize(a: &Dense) -> Dense {
    let n = a.len();
    let hat: Dense = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] + f64::from(u8::from(i == j))).collect())
        .collect();
    let d: Vec<f64> = hat.iter().map(|r| r.iter().sum()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| hat[i][j] / (d[i] * d[j]).sqrt()).collect())
        .collect()
}

/// Pascal's triangle row `L`.
pub fn pascal(l: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..l {
        let mut next = vec![1.0; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// GPCN logits from the expanded form `Σ_k C(L,k) γ^k Ã^k H W^k`, with
/// `H` the ReLU feature layers.
pub fn gpcn_logits(x: &Dense, a_tilde: &Dense, layers: &[Dense], w_res: &Dense, w_out: &Dense, l: usize, gamma: f64) -> Dense {
    let mut h = x.clone();
    for w in layers {
        h = relu(&mm(&h, w));
    }
    let binom = pascal(l);
    let mut sum = h.clone();
    let mut a_pow = identity(a_tilde.len());
    let mut w_pow = identity(w_res.len());
    for (k, c) in binom.iter().enumerate().skip(1) {
        a_pow = mm(&a_pow, a_tilde);
        w_pow = mm(&w_pow, w_res);
        sum = axpy(&sum, c * gamma.powi(k as i32), &mm(&mm(&a_pow, &h), &w_pow));
    }
    mm(&sum, w_out)
}

pub fn max_rel_diff(a: &Dense, b: &Dense) -> f64 {
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

/// Edge and class homophily by enumerating every ordered node pair.
pub fn homophily_by_enumeration(a: &Dense, labels: &[usize], c: usize) -> (f64, f64) {
    let n = labels.len();
    let mut edges = 0.0;
    let mut same = 0.0;
    let mut h_num = vec![0.0; c];
    let mut h_den = vec![0.0; c];
    for u in 0..n {
        for v in 0..n {
            if a[u][v] == 0.0 {
                continue;
            }
            edges += 1.0;
            h_den[labels[u]] += 1.0;
            if labels[u] == labels[v] {
                same += 1.0;
                h_num[labels[u]] += 1.0;
            }
        }
    }
    let mut class = 0.0;
    for k in 0..c {
        let frac = labels.iter().filter(|&&y| y == k).count() as f64 / n as f64;
        class += (h_num[k] / h_den[k] - frac).max(0.0);
    }
    (same / edges, class / (c - 1) as f64)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
pub fn jacobi_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Transductive gap right-hand side written out term by term.
pub fn gap_oracle(rad: f64, m: f64, u: f64, delta: f64, c0: f64) -> f64 {
    let q = (m + u) / (m * u);
    let mn = m.min(u);
    let s = 2.0 * (m + u) * mn / ((2.0 * m + 2.0 * u - 1.0) * (2.0 * mn - 1.0));
    rad + c0 * q * mn.sqrt() + (0.5 * s * q * (1.0 / delta).ln()).sqrt()
}
