//! Principal component analysis.
//!
//! Small problems are solved exactly through the smaller of the two Gram
//! matrices (covariance `XᵀX` or `XXᵀ`). Wide-and-tall problems use a seeded
//! block subspace iteration followed by Rayleigh-Ritz.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::linalg::{dot, gram_cols, gram_rows, orthonormalize_rows, symmetric_eigen};
use crate::scalar::Scalar;

/// Largest `min(samples, dim)` solved exactly under [`PcaSolver::Auto`].
pub const EXACT_LIMIT: usize = 1500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PcaSolver {
    Auto,
    Exact,
    Subspace { iterations: usize, oversample: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub dim: usize,
    pub mean: Vec<f64>,
    /// `k x dim`, orthonormal rows sorted by descending variance.
    pub components: Vec<f64>,
    /// Sample variance captured by each component.
    pub explained_variance: Vec<f64>,
    /// Total sample variance (trace of the covariance).
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.explained_variance.len()
    }

    /// Fits `k` components to `n` row-major samples of length `dim`.
    pub fn fit<T: Scalar>(data: &[T], n: usize, dim: usize, k: usize) -> Result<Self> {
        Self::fit_with(data, n, dim, k, PcaSolver::Auto)
    }

    pub fn fit_with<T: Scalar>(data: &[T], n: usize, dim: usize, k: usize, solver: PcaSolver) -> Result<Self> {
        if data.len() != n * dim {
            return Err(MlError::Shape(format!("pca: {} values for {n} x {dim}", data.len())));
        }
        if k == 0 || k > dim {
            return Err(MlError::Domain(format!("pca: {k} components for {dim} features")));
        }
        if n <= k {
            return Err(MlError::Domain(format!("pca: {n} samples cannot support {k} components")));
        }
        let mut mean = vec![0.0; dim];
        for row in data.chunks(dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v.to_f64();
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered: Vec<f64> = data
            .chunks(dim)
            .flat_map(|row| row.iter().zip(&mean).map(|(v, m)| v.to_f64() - m))
            .collect();
        let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;

        let solver = match solver {
            PcaSolver::Auto if n.min(dim) <= EXACT_LIMIT => PcaSolver::Exact,
            PcaSolver::Auto => PcaSolver::Subspace { iterations: 20, oversample: 20, seed: 0x5eed },
            s => s,
        };
        let (components, explained_variance) = match solver {
            PcaSolver::Exact => exact(&centered, n, dim, k),
            PcaSolver::Subspace { iterations, oversample, seed } => {
                subspace(&centered, n, dim, k, iterations, oversample, seed)
            }
            PcaSolver::Auto => unreachable!(),
        };
        let mut model = PcaModel { dim, mean, components, explained_variance, total_variance };
        model.fix_signs();
        Ok(model)
    }

    /// Flips each component so its largest-magnitude entry is positive.
    fn fix_signs(&mut self) {
        let dim = self.dim;
        for row in self.components.chunks_mut(dim) {
            let mut best = 0;
            for (i, v) in row.iter().enumerate() {
                if v.abs() > row[best].abs() {
                    best = i;
                }
            }
            if row[best] < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }

    pub fn project<T: Scalar>(&self, x: &[T]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "pca: projecting wrong dimension");
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v.to_f64() - m).collect();
        self.components.chunks(self.dim).map(|c| dot(c, &centered)).collect()
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &w) in self.components.chunks(self.dim).zip(z) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        out
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance.iter().map(|v| v / self.total_variance).collect()
    }

    /// Rounds every parameter to `f32` precision, so the model survives a
    /// round-trip through an `f32` file unchanged.
    pub fn to_f32_precision(&self) -> Self {
        let r = |v: &Vec<f64>| v.iter().map(|&x| x as f32 as f64).collect();
        PcaModel {
            dim: self.dim,
            mean: r(&self.mean),
            components: r(&self.components),
            explained_variance: r(&self.explained_variance),
            total_variance: self.total_variance as f32 as f64,
        }
    }
}

fn exact(x: &[f64], n: usize, dim: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let denom = (n - 1) as f64;
    if dim <= n {
        let cov = gram_cols(x, n, dim);
        let (vals, vecs) = symmetric_eigen(&cov, dim);
        let comps = vecs[..k * dim].to_vec();
        (comps, vals[..k].iter().map(|v| v.max(0.0) / denom).collect())
    } else {
        let g = gram_rows(x, n, dim);
        let (vals, vecs) = symmetric_eigen(&g, n);
        let mut comps = vec![0.0; k * dim];
        for c in 0..k {
            let u = &vecs[c * n..(c + 1) * n];
            let s = vals[c].max(0.0).sqrt();
            if s > 1e-12 * vals[0].abs().sqrt().max(1e-300) {
                let row = &mut comps[c * dim..(c + 1) * dim];
                for (i, &ui) in u.iter().enumerate() {
                    for (r, xv) in row.iter_mut().zip(&x[i * dim..(i + 1) * dim]) {
                        *r += ui * xv;
                    }
                }
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        orthonormalize_rows(&mut comps, k, dim);
        (comps, vals[..k].iter().map(|v| v.max(0.0) / denom).collect())
    }
}

fn subspace(
    x: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    iterations: usize,
    oversample: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let q = (k + oversample).min(dim).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // basis rows: q x dim
    let mut basis: Vec<f64> = (0..q * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    orthonormalize_rows(&mut basis, q, dim);
    let mut z = vec![0.0; n * q];
    for _ in 0..iterations {
        // z = X basis^T  (n x q)
        f64::gemm(n, dim, q, 1.0, x, dim as isize, 1, &basis, 1, dim as isize, 0.0, &mut z, q as isize, 1);
        // basis = z^T X  (q x dim)
        f64::gemm(q, n, dim, 1.0, &z, 1, q as isize, x, dim as isize, 1, 0.0, &mut basis, dim as isize, 1);
        orthonormalize_rows(&mut basis, q, dim);
    }
    f64::gemm(n, dim, q, 1.0, x, dim as isize, 1, &basis, 1, dim as isize, 0.0, &mut z, q as isize, 1);
    let small = gram_cols(&z, n, q);
    let (vals, vecs) = symmetric_eigen(&small, q);
    let mut comps = vec![0.0; k * dim];
    f64::gemm(k, q, dim, 1.0, &vecs, q as isize, 1, &basis, dim as isize, 1, 0.0, &mut comps, dim as isize, 1);
    orthonormalize_rows(&mut comps, k, dim);
    let denom = (n - 1) as f64;
    (comps, vals[..k].iter().map(|v| v.max(0.0) / denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn gram_error(m: &PcaModel) -> f64 {
        let (k, d) = (m.n_components(), m.dim);
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let g = dot(&m.components[i * d..(i + 1) * d], &m.components[j * d..(j + 1) * d]);
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    #[test]
    fn line_in_plane() {
        let data: Vec<f64> = (0..20).flat_map(|i| {
            let t = i as f64 - 9.5;
            [3.0 * t + 1.0, 4.0 * t - 2.0]
        }).collect();
        let m = PcaModel::fit(&data, 20, 2, 1).unwrap();
        assert!((m.components[0] - 0.6).abs() < 1e-12 && (m.components[1] - 0.8).abs() < 1e-12);
        assert!((m.explained_variance_ratio()[0] - 1.0).abs() < 1e-12);
        let m2 = PcaModel::fit(&data, 20, 2, 2).unwrap();
        assert!(gram_error(&m2) <= 1e-8);
    }

    #[test]
    fn full_rank_projection_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = PcaModel::fit(&data, 100, 2, 2).unwrap();
        for row in data.chunks(2) {
            let rec = m.reconstruct(&m.project(row));
            assert!((rec[0] - row[0]).abs() < 1e-12 && (rec[1] - row[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_data_uses_row_gram_and_stays_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, d) = (12, 40);
        let data: Vec<f32> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        // rank is at most n - 1 = 11; ask for more to exercise completion
        let m = PcaModel::fit(&data, n, d, 11).unwrap();
        assert!(gram_error(&m) <= 1e-8);
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn rejects_bad_k() {
        let data = vec![0.0f64; 30];
        assert!(matches!(PcaModel::fit(&data, 10, 3, 4), Err(MlError::Domain(_))));
        assert!(matches!(PcaModel::fit(&data, 3, 10, 3), Err(MlError::Domain(_))));
    }

    #[test]
    fn subspace_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (n, d, k) = (150, 60, 5);
        // decaying spectrum
        let data: Vec<f64> = (0..n * d)
            .map(|i| {
                let col = i % d;
                let z: f64 = StandardNormal.sample(&mut rng);
                z * (0.8f64).powi(col as i32) * 5.0
            })
            .collect();
        let a = PcaModel::fit_with(&data, n, d, k, PcaSolver::Exact).unwrap();
        let b = PcaModel::fit_with(&data, n, d, k, PcaSolver::Subspace { iterations: 60, oversample: 15, seed: 1 }).unwrap();
        for c in 0..k {
            let cos = dot(&a.components[c * d..(c + 1) * d], &b.components[c * d..(c + 1) * d]);
            assert!((cos - 1.0).abs() < 1e-8, "component {c}: cos {cos}");
            assert!((a.explained_variance[c] - b.explained_variance[c]).abs() < 1e-8 * a.explained_variance[0]);
        }
    }
}
