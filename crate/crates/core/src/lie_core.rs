//! Brackets stored as structure constants, the `GL(n)` action on them, and
//! derivation spaces.
//!
//! A bracket `mu` on `R^n` is stored densely as `c[i][j][k]` with
//! `mu(e_i, e_j) = sum_k c[i][j][k] e_k`. Both orders `(i, j)` and `(j, i)`
//! are stored; antisymmetry is validated when a tensor is built from raw data.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, LinearMap};

/// Absolute Jacobi tolerance on unit-norm tensors.
pub const JACOBI_TOL: f64 = 1e-9;
/// Relative null-space tolerance for derivation spaces.
pub const DERIVATION_RTOL: f64 = 1e-9;
/// Largest condition number accepted by [`gl_act`].
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct BracketTensor {
    dim: usize,
    coeffs: Vec<f64>,
}

impl BracketTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            coeffs: vec![0.0; dim * dim * dim],
        }
    }

    /// Builds a bracket from independent constants `(i, j, k, c)` meaning
    /// `c_{ij}^k = c` and `c_{ji}^k = -c`, with 0-based indices.
    pub fn from_constants(dim: usize, constants: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut t = Self::zeros(dim);
        for &(i, j, k, c) in constants {
            let bad = [i, j, k].into_iter().find(|&x| x >= dim);
            if let Some(found) = bad {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: found + 1,
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
            if i == j {
                if c != 0.0 {
                    return Err(Error::NotAntisymmetric {
                        i,
                        j,
                        k,
                        deviation: 2.0 * c.abs(),
                    });
                }
                continue;
            }
            t.set(i, j, k, c);
        }
        Ok(t)
    }

    /// Builds a bracket from a dense `n^3` array in `(i, j, k)` row-major order,
    /// rejecting non-finite or non-antisymmetric data.
    pub fn from_dense(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let t = Self { dim, coeffs };
        let scale = t.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
        for i in 0..dim {
            for j in i..dim {
                for k in 0..dim {
                    let deviation = (t.get(i, j, k) + t.get(j, i, k)).abs();
                    if deviation > 1e-12 * scale {
                        return Err(Error::NotAntisymmetric { i, j, k, deviation });
                    }
                }
            }
        }
        Ok(t)
    }

    /// Internal constructor for coefficient arrays that are antisymmetric by
    /// construction; exact antisymmetry is restored by averaging.
    fn from_raw(dim: usize, mut coeffs: Vec<f64>) -> Self {
        for i in 0..dim {
            coeffs[(i * dim + i) * dim..(i * dim + i + 1) * dim].fill(0.0);
            for j in (i + 1)..dim {
                for k in 0..dim {
                    let a = (i * dim + j) * dim + k;
                    let b = (j * dim + i) * dim + k;
                    let v = 0.5 * (coeffs[a] - coeffs[b]);
                    coeffs[a] = v;
                    coeffs[b] = -v;
                }
            }
        }
        Self { dim, coeffs }
    }

    /// The Heisenberg bracket `[e_1, e_2] = e_3`.
    pub fn heisenberg() -> Self {
        Self::from_constants(3, &[(0, 1, 2, 1.0)]).expect("valid constants")
    }

    /// The standard filiform bracket `[e_1, e_i] = e_{i+1}`, `i = 2..n-1`.
    pub fn filiform(dim: usize) -> Self {
        let constants: Vec<_> = (1..dim.saturating_sub(1)).map(|i| (0, i, i + 1, 1.0)).collect();
        Self::from_constants(dim, &constants).expect("valid constants")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[self.idx(i, j, k)]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, c: f64) {
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.coeffs[a] = c;
        self.coeffs[b] = -c;
    }

    /// Independent constants `(i, j, k, c)` with `i < j` and `c != 0`.
    pub fn nonzero_constants(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let c = self.get(i, j, k);
                    if c != 0.0 {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }

    /// `ad_mu(e_i)` as a matrix: column `j` is `mu(e_i, e_j)`.
    pub fn ad(&self, i: usize) -> LinearMap {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| self.get(i, j, k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, t: f64, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + t * b)
                .collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let r = self.norm();
        if r == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(1.0 / r))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Block-diagonal bracket on `R^{n1} + R^{n2}`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n1, n2) = (self.dim, other.dim);
        let mut out = Self::zeros(n1 + n2);
        for (i, j, k, c) in self.nonzero_constants() {
            out.set(i, j, k, c);
        }
        for (i, j, k, c) in other.nonzero_constants() {
            out.set(i + n1, j + n1, k + n1, c);
        }
        out
    }

    /// Coefficient vector over the independent coordinates `(i < j, k)`, scaled
    /// by `sqrt 2` so the Euclidean inner product matches [`inner_product_v`].
    pub fn to_independent(&self) -> DVector<f64> {
        let n = self.dim;
        let s = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(independent_dim(n));
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    v.push(s * self.get(i, j, k));
                }
            }
        }
        DVector::from_vec(v)
    }

    /// Inverse of [`BracketTensor::to_independent`].
    pub fn from_independent(dim: usize, v: &[f64]) -> Result<Self> {
        if v.len() != independent_dim(dim) {
            return Err(Error::DimensionMismatch {
                expected: independent_dim(dim),
                found: v.len(),
            });
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut t = Self::zeros(dim);
        let mut it = v.iter();
        for i in 0..dim {
            for j in (i + 1)..dim {
                for k in 0..dim {
                    let c = *it.next().expect("length checked");
                    t.set(i, j, k, s * c);
                }
            }
        }
        Ok(t)
    }
}

/// Dimension of `Lambda^2(R^n)* (x) R^n`.
pub fn independent_dim(n: usize) -> usize {
    n * n * n.saturating_sub(1) / 2
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `mu(x, y)`.
pub fn bracket_apply(mu: &BracketTensor, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = mu.dim;
    check_dims(n, x.len())?;
    check_dims(n, y.len())?;
    let mut out = DVector::zeros(n);
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            let base = mu.idx(i, j, 0);
            for k in 0..n {
                out[k] += w * mu.coeffs[base + k];
            }
        }
    }
    Ok(out)
}

/// Largest Jacobiator norm over basis triples; zero iff `mu` is a Lie bracket.
pub fn jacobi_residual(mu: &BracketTensor) -> f64 {
    let n = mu.dim;
    // jac[k] = sum_l c_{ij}^l c_{lk}^m + c_{jk}^l c_{li}^m + c_{ki}^l c_{lj}^m
    let mut worst: f64 = 0.0;
    let mut acc = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                acc.fill(0.0);
                for l in 0..n {
                    let a = mu.get(i, j, l);
                    let b = mu.get(j, k, l);
                    let c = mu.get(k, i, l);
                    for (m, slot) in acc.iter_mut().enumerate() {
                        *slot += a * mu.get(l, k, m) + b * mu.get(l, i, m) + c * mu.get(l, j, m);
                    }
                }
                let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst = worst.max(norm);
            }
        }
    }
    worst
}

/// Fails with [`Error::JacobiViolation`] unless the unit-normalized `mu`
/// satisfies the Jacobi identity within `tol`.
pub fn check_jacobi(mu: &BracketTensor, tol: f64) -> Result<()> {
    if mu.is_zero() {
        return Ok(());
    }
    let residual = jacobi_residual(&mu.normalized()?);
    if residual > tol {
        return Err(Error::JacobiViolation { residual, tol });
    }
    Ok(())
}

/// Step of nilpotency via the lower central series.
pub fn nilpotency_class(mu: &BracketTensor) -> Result<usize> {
    check_jacobi(mu, JACOBI_TOL)?;
    let n = mu.dim;
    if mu.is_zero() {
        return Ok(1);
    }
    let unit = mu.normalized()?;
    let ads: Vec<LinearMap> = (0..n).map(|i| unit.ad(i)).collect();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut step = 0;
    loop {
        step += 1;
        let images: Vec<DVector<f64>> = ads
            .iter()
            .flat_map(|ad| {
                let prod = ad * &term;
                prod.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>()
            })
            .collect();
        let next = if images.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            // Orthonormal inputs and a unit-norm bracket: absolute threshold.
            linalg::range_basis(&DMatrix::from_columns(&images), linalg::RANK_RTOL)
        };
        if next.ncols() == 0 {
            return Ok(step);
        }
        if next.ncols() == term.ncols() {
            return Err(Error::NotNilpotent {
                stable_dim: next.ncols(),
            });
        }
        term = next;
    }
}

/// `(g . mu)(x, y) = g mu(g^-1 x, g^-1 y)`.
pub fn gl_act(g: &LinearMap, mu: &BracketTensor) -> Result<BracketTensor> {
    gl_act_with_bound(g, mu, MAX_CONDITION)
}

pub fn gl_act_with_bound(g: &LinearMap, mu: &BracketTensor, max_condition: f64) -> Result<BracketTensor> {
    let n = mu.dim;
    check_dims(n, g.nrows())?;
    check_dims(n, g.ncols())?;
    let condition = linalg::condition_number(g);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::SingularMatrix { condition });
    }
    let h = g
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix { condition })?;
    Ok(transform(mu, g, &h))
}

/// Change of basis with a known inverse: `c'_{ij}^k = sum h_ai h_bj c_ab^c g_kc`.
fn transform(mu: &BracketTensor, g: &LinearMap, h: &LinearMap) -> BracketTensor {
    let n = mu.dim;
    // Output leg first: t1[a][b][k] = sum_c c_ab^c g_kc
    let mut t1 = vec![0.0; n * n * n];
    for ab in 0..n * n {
        for k in 0..n {
            let mut s = 0.0;
            for c in 0..n {
                s += mu.coeffs[ab * n + c] * g[(k, c)];
            }
            t1[ab * n + k] = s;
        }
    }
    // Second input leg: t2[a][j][k] = sum_b h_bj t1[a][b][k]
    let mut t2 = vec![0.0; n * n * n];
    for a in 0..n {
        for j in 0..n {
            for b in 0..n {
                let w = h[(b, j)];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    t2[(a * n + j) * n + k] += w * t1[(a * n + b) * n + k];
                }
            }
        }
    }
    // First input leg: out[i][j][k] = sum_a h_ai t2[a][j][k]
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for a in 0..n {
            let w = h[(a, i)];
            if w == 0.0 {
                continue;
            }
            for jk in 0..n * n {
                out[i * n * n + jk] += w * t2[a * n * n + jk];
            }
        }
    }
    BracketTensor::from_raw(n, out)
}

/// `(exp(t A), exp(-t A))` for symmetric `A`, through its eigendecomposition.
pub fn symmetric_exp_pair(a: &LinearMap, t: f64) -> (LinearMap, LinearMap) {
    let eig = ((a + a.transpose()) * 0.5).symmetric_eigen();
    let q = &eig.eigenvectors;
    let exp_diag = |s: f64| DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (s * l).exp()));
    (
        q * exp_diag(t) * q.transpose(),
        q * exp_diag(-t) * q.transpose(),
    )
}

/// `exp(t A) . mu` for symmetric `A`.
pub fn exp_symmetric_act(a: &LinearMap, t: f64, mu: &BracketTensor) -> Result<BracketTensor> {
    check_dims(mu.dim, a.nrows())?;
    check_dims(mu.dim, a.ncols())?;
    let (g, g_inv) = symmetric_exp_pair(a, t);
    Ok(transform(mu, &g, &g_inv))
}

/// `g . mu` for a caller-supplied inverse; no conditioning check is made.
pub fn act_with_inverse(g: &LinearMap, g_inv: &LinearMap, mu: &BracketTensor) -> Result<BracketTensor> {
    for m in [g, g_inv] {
        check_dims(mu.dim, m.nrows())?;
        check_dims(mu.dim, m.ncols())?;
    }
    Ok(transform(mu, g, g_inv))
}

/// Orthogonal change of basis `k . mu`; `k^-1 = k^t` is used directly.
pub fn orthogonal_act(k: &LinearMap, mu: &BracketTensor) -> Result<BracketTensor> {
    check_dims(mu.dim, k.nrows())?;
    check_dims(mu.dim, k.ncols())?;
    Ok(transform(mu, k, &k.transpose()))
}

/// Derivative of the action: `(A . mu)(x, y) = A mu(x, y) - mu(Ax, y) - mu(x, Ay)`.
pub fn gl_infinitesimal_act(a: &LinearMap, mu: &BracketTensor) -> Result<BracketTensor> {
    let n = mu.dim;
    check_dims(n, a.nrows())?;
    check_dims(n, a.ncols())?;
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let base = (i * n + j) * n;
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += a[(k, l)] * mu.get(i, j, l);
                    s -= a[(l, i)] * mu.get(l, j, k);
                    s -= a[(l, j)] * mu.get(i, l, k);
                }
                out[base + k] = s;
            }
        }
    }
    Ok(BracketTensor::from_raw(n, out))
}

/// `<lambda, mu> = sum_{ijk} c_{ij}^k(lambda) c_{ij}^k(mu)` over ordered pairs.
pub fn inner_product_v(lambda: &BracketTensor, mu: &BracketTensor) -> Result<f64> {
    check_dims(lambda.dim, mu.dim)?;
    Ok(lambda.coeffs.iter().zip(&mu.coeffs).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone)]
pub struct DerivationBasis {
    pub dim: usize,
    pub elements: Vec<LinearMap>,
}

impl DerivationBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Distance from `a` to the span of the basis, in trace norm.
    pub fn distance_to_span(&self, a: &LinearMap) -> f64 {
        let mut r = a.clone();
        for e in &self.elements {
            r -= e * linalg::trace_pairing(e, a);
        }
        r.norm()
    }
}

fn full_basis(n: usize) -> Vec<LinearMap> {
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut e = DMatrix::zeros(n, n);
            e[(a, b)] = 1.0;
            out.push(e);
        }
    }
    out
}

/// Matrix whose columns are `E . mu` for each `E` in `maps`.
pub(crate) fn action_matrix(mu: &BracketTensor, maps: &[LinearMap]) -> Result<DMatrix<f64>> {
    let n = mu.dim;
    let mut m = DMatrix::zeros(n * n * n, maps.len());
    for (col, e) in maps.iter().enumerate() {
        let img = gl_infinitesimal_act(e, mu)?;
        m.column_mut(col).copy_from_slice(&img.coeffs);
    }
    Ok(m)
}

/// Orthonormal (trace pairing) basis of `Der(mu)`, or of its symmetric part.
pub fn derivation_space(mu: &BracketTensor, symmetric_only: bool) -> Result<DerivationBasis> {
    check_jacobi(mu, JACOBI_TOL)?;
    let n = mu.dim;
    let params = if symmetric_only {
        linalg::symmetric_basis(n)
    } else {
        full_basis(n)
    };
    let unit = if mu.is_zero() { mu.clone() } else { mu.normalized()? };
    let system = action_matrix(&unit, &params)?;
    let kernel = linalg::null_space(&system, DERIVATION_RTOL);
    let elements = kernel
        .column_iter()
        .map(|col| {
            params
                .iter()
                .zip(col.iter())
                .fold(DMatrix::zeros(n, n), |acc, (e, &w)| acc + e * w)
        })
        .collect();
    Ok(DerivationBasis { dim: n, elements })
}
