//! Small dense helpers shared by the solvers.

use nalgebra::SymmetricEigen;

use crate::{Matrix, Vector};

/// Symmetric eigen-decomposition (unsorted).
///
/// The implicit QR result is polished with cyclic Jacobi rotations: on some
/// inputs with clustered small eigenvalues it leaves eigenvector residuals
/// around 1e-11, which is too coarse for detecting the trust-region hard case.
pub fn symmetric_eigen(h: &Matrix) -> (Vector, Matrix) {
    let n = h.nrows();
    let hs = symmetrize(h);
    let eig = SymmetricEigen::new(hs.clone());
    let mut v = eig.eigenvectors;
    let mut b = symmetrize(&(v.transpose() * &hs * &v));
    for _ in 0..30 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let bpq = b[(p, q)];
                let tiny = f64::EPSILON * 1e-3 * (b[(p, p)].abs() * b[(q, q)].abs()).sqrt();
                if bpq.abs() <= tiny.max(f64::MIN_POSITIVE) {
                    b[(p, q)] = 0.0;
                    b[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (b[(q, q)] - b[(p, p)]) / (2.0 * bpq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (b[(k, p)], b[(k, q)]);
                    b[(k, p)] = c * x - s * y;
                    b[(k, q)] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (b[(p, k)], b[(q, k)]);
                    b[(p, k)] = c * x - s * y;
                    b[(q, k)] = s * x + c * y;
                }
                b[(p, q)] = 0.0;
                b[(q, p)] = 0.0;
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * x - s * y;
                    v[(k, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (b.diagonal(), v)
}

/// Eigen-decomposition with eigenvalues sorted ascending and eigenvectors
/// permuted to match.
pub fn sorted_eigen(h: &Matrix) -> (Vector, Matrix) {
    let n = h.nrows();
    let (vals, vecs) = symmetric_eigen(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| vals[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &vecs.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix (`+inf` for an empty matrix).
pub fn min_eigenvalue(h: &Matrix) -> f64 {
    symmetric_eigen(h)
        .0
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm2(h: &Matrix) -> f64 {
    symmetric_eigen(h)
        .0
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `(h + h') / 2`.
pub fn symmetrize(h: &Matrix) -> Matrix {
    (h + h.transpose()) * 0.5
}

pub fn norm1(v: &Vector) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn min_entry(v: &Vector) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_entry(v: &Vector) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
