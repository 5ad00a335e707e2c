//! Eigenvalue spectra of symmetric sparse matrices.
//!
//! The full spectrum is computed densely (Householder reduction to
//! tridiagonal form, then implicit QL). Extremal eigenvalues of larger graphs
//! come from Lanczos with full reorthogonalization.

use super::SparseAdjacency;
use crate::rng::{streams, CounterRng};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest matrix the dense path accepts.
pub const MAX_DENSE_N: usize = 10_000;

/// Matrices up to this size are checked for symmetry entrywise even when
/// they carry a symmetry hint.
const SYMMETRY_CHECK_N: usize = 2_000;
const SYMMETRY_TOL: f64 = 1e-9;
const LANCZOS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Dense,
    Lanczos,
}

/// Which eigenvalues to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumRequest {
    All,
    /// The `k` algebraically largest eigenvalues.
    Top(usize),
}

/// Eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub method: SpectrumMethod,
    /// Dimension of the matrix the values came from.
    pub dim: usize,
}

impl Spectrum {
    /// Full spectrum from known values; sorts them.
    pub fn from_values(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let dim = eigenvalues.len();
        Spectrum {
            eigenvalues,
            method: SpectrumMethod::Dense,
            dim,
        }
    }

    pub fn n_computed(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_full(&self) -> bool {
        self.eigenvalues.len() == self.dim
    }

    /// `Σ_j |λ_j|^k` over the full spectrum.
    pub fn power_sum(&self, k: u32) -> Result<f64> {
        spectral_power_sum(self, k)
    }
}

/// `Σ_j |λ_j|^k`. Requires the full spectrum.
pub fn spectral_power_sum(s: &Spectrum, k: u32) -> Result<f64> {
    if !s.is_full() {
        return Err(Error::InsufficientSpectrum {
            have: s.n_computed(),
            need: s.dim,
        });
    }
    if k == 0 {
        return Err(Error::Config("spectral power sum needs k >= 1".into()));
    }
    Ok(s.eigenvalues.iter().map(|l| l.abs().powi(k as i32)).sum())
}

pub fn spectrum(a: &SparseAdjacency, request: SpectrumRequest) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "spectrum needs a square matrix, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    let n = a.n_rows();
    if !a.symmetric_hint() || n <= SYMMETRY_CHECK_N {
        a.check_symmetric(SYMMETRY_TOL)?;
    }
    match request {
        SpectrumRequest::Top(k) if k < n => {
            let eigenvalues = lanczos_top(a, k)?;
            Ok(Spectrum {
                eigenvalues,
                method: SpectrumMethod::Lanczos,
                dim: n,
            })
        }
        SpectrumRequest::Top(_) | SpectrumRequest::All => {
            if n > MAX_DENSE_N {
                return Err(Error::SpectrumTooLarge { n, max: MAX_DENSE_N });
            }
            let mut dense = a.to_dense().into_data();
            let (mut d, mut e) = tridiagonalize(&mut dense, n);
            tql(&mut d, &mut e, None)?;
            Ok(Spectrum::from_values(d))
        }
    }
}

/// Householder reduction of a symmetric row-major matrix (lower triangle
/// used) to tridiagonal form. Returns `(diagonal, subdiagonal)` with the
/// subdiagonal in `e[1..]` and `e[0] = 0`.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
            } else {
                for k in 0..=l {
                    a[at(i, k)] /= scale;
                    h += a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[at(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[at(j, k)] * a[at(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[at(i, i)];
    }
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[1..]` holds the
/// subdiagonal on entry and is destroyed. When `z` is given (row-major
/// `n × n`, usually the identity) its columns are rotated into eigenvectors.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Numeric("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

fn random_unit(rng: &mut CounterRng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// Ritz values of the tridiagonal `(alpha, beta)` with their bottom
/// eigenvector components, sorted descending.
fn ritz(alpha: &[f64], beta: &[f64]) -> Result<Vec<(f64, f64)>> {
    let m = alpha.len();
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; m];
    e[1..m].copy_from_slice(&beta[..(m - 1)]);
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut z))?;
    let mut pairs: Vec<(f64, f64)> = (0..m).map(|j| (d[j], z[(m - 1) * m + j])).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}

/// Top-`k` eigenvalues by Lanczos with full reorthogonalization. Breakdowns
/// restart from a fresh random vector orthogonal to the current basis.
fn lanczos_top(a: &SparseAdjacency, k: usize) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = CounterRng::new(0x5eed, streams::LANCZOS);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = random_unit(&mut rng, n, &basis)
        .ok_or_else(|| Error::Numeric("cannot draw a Lanczos start vector".into()))?;
    loop {
        let mut w = vec![0.0; n];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = a.row(i).map(|(j, v)| v * q[j]).sum();
        }
        let a_j = dot(&w, &q);
        basis.push(q.clone());
        alpha.push(a_j);
        orthogonalize(&mut w, &basis);
        let b_j = norm(&w);
        let m = basis.len();

        let converged = if m >= k && (m % 5 == 0 || m == n || b_j < 1e-12) {
            let pairs = ritz(&alpha, &beta)?;
            pairs
                .iter()
                .take(k)
                .all(|&(theta, s)| (b_j * s).abs() <= LANCZOS_TOL * theta.abs().max(1.0))
        } else {
            false
        };
        if converged || m == n {
            let pairs = ritz(&alpha, &beta)?;
            return Ok(pairs.into_iter().take(k).map(|(t, _)| t).collect());
        }
        if b_j < 1e-12 {
            beta.push(0.0);
            q = random_unit(&mut rng, n, &basis).ok_or_else(|| {
                Error::Numeric("Lanczos restart found no new direction".into())
            })?;
        } else {
            beta.push(b_j);
            q = w.iter().map(|x| x / b_j).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn identity_spectrum() {
        let s = spectrum(&SparseAdjacency::identity(3), SpectrumRequest::All).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for l in &s.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn k3_with_loops_is_rank_one() {
        let a = SparseAdjacency::from_dense(&Matrix::filled(3, 3, 1.0 / 3.0));
        let s = spectrum(&a, SpectrumRequest::All).unwrap();
        let expected = [1.0, 0.0, 0.0];
        for (l, e) in s.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-14, "{:?}", s.eigenvalues);
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = SparseAdjacency::from_edges(&[(0, 1)], 2, true).unwrap();
        assert!(matches!(
            spectrum(&a, SpectrumRequest::All),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn power_sum_examples() {
        let s = Spectrum::from_values(vec![1.0, 0.0, 0.0]);
        assert_eq!(spectral_power_sum(&s, 5).unwrap(), 1.0);
        let s = Spectrum::from_values(vec![1.0, -1.0]);
        assert_eq!(spectral_power_sum(&s, 2).unwrap(), 2.0);
        let partial = Spectrum {
            eigenvalues: vec![1.0],
            method: SpectrumMethod::Lanczos,
            dim: 4,
        };
        assert!(matches!(
            spectral_power_sum(&partial, 1),
            Err(Error::InsufficientSpectrum { have: 1, need: 4 })
        ));
    }

    #[test]
    fn lanczos_on_identity_restarts_through_breakdown() {
        let s = spectrum(&SparseAdjacency::identity(6), SpectrumRequest::Top(3)).unwrap();
        assert_eq!(s.method, SpectrumMethod::Lanczos);
        for l in &s.eigenvalues {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }
}
