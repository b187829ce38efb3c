//! Dense linear algebra helpers shared by the modules: rank and null spaces by
//! singular-value thresholding, orthonormalization, trace pairing and random
//! test matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense real `n x n` matrix. Used for group elements `g` and Lie algebra
/// elements `A` alike.
pub type LinearMap = DMatrix<f64>;

/// Relative singular-value threshold used for rank decisions.
pub const RANK_RTOL: f64 = 1e-9;

/// `<<A, B>> = tr(A B^t)`.
pub fn trace_pairing(a: &LinearMap, b: &LinearMap) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn commutator(a: &LinearMap, b: &LinearMap) -> LinearMap {
    a * b - b * a
}

/// Singular values of `m`, in no particular order. Empty matrices have none.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn max_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Number of singular values strictly above `threshold`.
pub fn rank_above(m: &DMatrix<f64>, threshold: f64) -> usize {
    singular_values(m)
        .into_iter()
        .filter(|&s| s > threshold && s > 0.0)
        .count()
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.into_iter().filter(|&s| s > rtol * smax && s > 0.0).count()
}

/// Orthonormal basis (as columns) of the null space of `m`. Singular values at
/// or below `rtol * sigma_max` count as zero; a zero matrix has the whole space
/// as kernel.
pub fn null_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let p = m.ncols();
    if p == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(p, p);
    }
    // Pad short matrices so the thin SVD returns a full p x p right factor.
    let work = if m.nrows() < p {
        let mut padded = DMatrix::zeros(p, p);
        padded.view_mut((0, 0), (m.nrows(), p)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rtol * smax || s == 0.0)
        .map(|(r, _)| v_t.row(r).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(p, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the column space of `m`, using the same
/// relative threshold convention as [`null_space`].
pub fn range_basis(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold && s > 0.0)
        .map(|(r, _)| u.column(r).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Condition number `sigma_max / sigma_min`; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Trace-orthonormal basis of `symm(n)`: `E_aa` and `(E_ab + E_ba)/sqrt 2`.
pub fn symmetric_basis(n: usize) -> Vec<LinearMap> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let mut e = DMatrix::zeros(n, n);
            if a == b {
                e[(a, a)] = 1.0;
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                e[(a, b)] = s;
                e[(b, a)] = s;
            }
            out.push(e);
        }
    }
    out
}

/// Trace-orthonormal basis of the traceless symmetric matrices.
pub fn traceless_symmetric_basis(n: usize) -> Vec<LinearMap> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            e[(a, b)] = s;
            e[(b, a)] = s;
            out.push(e);
        }
    }
    // Diagonal part: orthonormal basis of {d : sum d = 0} (Helmert vectors).
    for k in 1..n {
        let mut e = DMatrix::zeros(n, n);
        let norm = ((k * (k + 1)) as f64).sqrt();
        for a in 0..k {
            e[(a, a)] = 1.0 / norm;
        }
        e[(k, k)] = -(k as f64) / norm;
        out.push(e);
    }
    out
}

/// Trace-orthonormal basis of the span of `maps`, dropping dependent
/// directions (relative threshold [`RANK_RTOL`]).
pub fn orthonormalize_maps(maps: &[LinearMap]) -> Vec<LinearMap> {
    let Some(first) = maps.first() else {
        return Vec::new();
    };
    let (r, c) = first.shape();
    let cols: Vec<DVector<f64>> = maps
        .iter()
        .map(|m| DVector::from_column_slice(m.as_slice()))
        .collect();
    let stacked = DMatrix::from_columns(&cols);
    let smax = max_singular_value(&stacked);
    let basis = range_basis(&stacked, RANK_RTOL * smax);
    basis
        .column_iter()
        .map(|col| DMatrix::from_column_slice(r, c, col.as_slice()))
        .collect()
}

/// Largest deviation of the trace Gram matrix of `maps` from the identity.
pub fn gram_deviation(maps: &[LinearMap]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, x) in maps.iter().enumerate() {
        for (b, y) in maps.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((trace_pairing(x, y) - target).abs());
        }
    }
    worst
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearMap {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.transpose()) * 0.5
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix, with the
/// sign of `R`'s diagonal absorbed so the distribution is Haar.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearMap {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random `g = U diag(s) V^t` with singular values log-uniform in
/// `[1, max_condition]`, so `cond(g) <= max_condition`.
pub fn random_well_conditioned<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_condition: f64,
) -> LinearMap {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let log_max = max_condition.ln();
    let s = DVector::from_fn(n, |_, _| (rng.random::<f64>() * log_max).exp());
    u * DMatrix::from_diagonal(&s) * v.transpose()
}
