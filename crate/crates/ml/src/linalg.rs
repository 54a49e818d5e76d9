//! Small dense linear algebra in `f64`: symmetric eigensolver and
//! Gram-Schmidt orthonormalization. Row-major throughout.

use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric `n x n` matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as rows of an `n x n` matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    // v holds eigenvectors as columns while iterating
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (r, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[r * n + k] = v[k * n + i];
        }
    }
    (values, vectors)
}

/// Modified Gram-Schmidt on the rows of a `rows x dim` matrix, in place.
///
/// Rows that become numerically dependent are replaced by the next standard
/// basis vector that is not yet spanned, so the result is always orthonormal.
pub fn orthonormalize_rows(a: &mut [f64], rows: usize, dim: usize) {
    assert!(rows <= dim);
    let mut next_basis = 0;
    for r in 0..rows {
        let norm_before = norm(&a[r * dim..(r + 1) * dim]);
        project_out(a, r, dim);
        let mut nrm = norm(&a[r * dim..(r + 1) * dim]);
        if nrm <= 1e-10 * norm_before.max(1e-300) || nrm == 0.0 {
            loop {
                let row = &mut a[r * dim..(r + 1) * dim];
                row.fill(0.0);
                row[next_basis] = 1.0;
                next_basis += 1;
                project_out(a, r, dim);
                nrm = norm(&a[r * dim..(r + 1) * dim]);
                if nrm > 1e-6 {
                    break;
                }
            }
        }
        for x in &mut a[r * dim..(r + 1) * dim] {
            *x /= nrm;
        }
    }
}

fn project_out(a: &mut [f64], r: usize, dim: usize) {
    // two passes for numerical orthogonality
    for _ in 0..2 {
        for prev in 0..r {
            let (head, tail) = a.split_at_mut(r * dim);
            let p = &head[prev * dim..(prev + 1) * dim];
            let row = &mut tail[..dim];
            let d = dot(p, row);
            for (x, y) in row.iter_mut().zip(p) {
                *x -= d * y;
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A^T A` for a row-major `rows x cols` matrix.
pub fn gram_cols(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut g = vec![0.0; cols * cols];
    f64::gemm(cols, rows, cols, 1.0, a, 1, cols as isize, a, cols as isize, 1, 0.0, &mut g, cols as isize, 1);
    symmetrize(&mut g, cols);
    g
}

/// `A A^T` for a row-major `rows x cols` matrix.
pub fn gram_rows(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut g = vec![0.0; rows * rows];
    f64::gemm(rows, cols, rows, 1.0, a, cols as isize, 1, a, 1, cols as isize, 0.0, &mut g, rows as isize, 1);
    symmetrize(&mut g, rows);
    g
}

fn symmetrize(g: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (g[i * n + j] + g[j * n + i]);
            g[i * n + j] = avg;
            g[j * n + i] = avg;
        }
    }
}
