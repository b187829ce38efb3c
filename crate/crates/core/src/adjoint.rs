//! The adjoint representation of `sl(n)`: moment map `m(X) = X X^t - X^t X`,
//! nilpotent orbits labelled by partitions, their distinguished Jordan
//! representatives, and detection along transpose-stable subalgebras.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, LinearMap};
use crate::moment::SymmetricMatrix;

/// Relative bound for the nilpotency certificate `|X^n| <= c |X|^n`.
pub const NILPOTENCY_TOL: f64 = 1e-8;

/// Default relative singular-value threshold for orbit classification.
pub const CLASSIFY_TOL: f64 = 1e-7;

/// A partition of `n`, parts weakly decreasing and positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parts must be weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPartition(format!("{p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

/// A square matrix with `|X^n| <= NILPOTENCY_TOL |X|^n` (Frobenius norms).
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentMatrix(DMatrix<f64>);

impl NilpotentMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let n = square_dim(&x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = x.norm();
        if norm == 0.0 {
            return Ok(Self(x));
        }
        // Powers of X / |X| keep the certificate free of overflow.
        let unit = &x / norm;
        let mut power = DMatrix::identity(n, n);
        for _ in 0..n {
            power = &power * &unit;
        }
        let residual = power.norm();
        if residual > NILPOTENCY_TOL {
            return Err(Error::NotNilpotent {
                stable_dim: linalg::rank_above(&power, NILPOTENCY_TOL).max(1),
            });
        }
        Ok(Self(x))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

fn square_dim(x: &DMatrix<f64>) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: x.ncols(),
        });
    }
    Ok(x.nrows())
}

/// `m(X) = -[X, theta(X)] = X X^t - X^t X`.
pub fn adjoint_moment(x: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    square_dim(x)?;
    SymmetricMatrix::new(x * x.transpose() - x.transpose() * x)
}

/// Block-diagonal Jordan matrix whose size-`k` blocks have superdiagonal
/// `lambda_i = sqrt(i (k - i) / 2)`, so that `[m(X), X] = X`.
pub fn jordan_rep(p: &Partition) -> NilpotentMatrix {
    let n = p.n();
    let mut x = DMatrix::zeros(n, n);
    let mut start = 0;
    for &k in p.parts() {
        for i in 1..k {
            x[(start + i - 1, start + i)] = ((i * (k - i)) as f64 / 2.0).sqrt();
        }
        start += k;
    }
    NilpotentMatrix(x)
}

/// Returns `c` with `[m(X), X] = c X` when the residual is within `tol |X|`.
/// The zero matrix gives `c = 0`.
pub fn verify_adjoint_distinguished(x: &DMatrix<f64>, tol: f64) -> Result<Option<f64>> {
    let m = adjoint_moment(x)?;
    let norm_sq = x.norm_squared();
    if norm_sq == 0.0 {
        return Ok(Some(0.0));
    }
    let w = linalg::commutator(m.matrix(), x);
    let c = linalg::trace_pairing(&w, x) / norm_sq;
    let residual = (&w - x * c).norm();
    Ok((residual <= tol * norm_sq.sqrt()).then_some(c))
}

/// Jordan type of a nilpotent matrix.
///
/// The kernels `K_k = ker X^k` are built iteratively as
/// `K_k = { v : X v in K_(k-1) }`, each a null space of `X` followed by the
/// projection off `K_(k-1)`, with singular values below `tol sigma_max(X)`
/// counted as zero. Unlike ranks of `X^k`, this never forms a power of `X`.
/// The number of parts `>= k` is `dim K_k - dim K_(k-1)`.
pub fn classify_nilpotent_orbit(x: &DMatrix<f64>, tol: f64) -> Result<Partition> {
    let x = NilpotentMatrix::new(x.clone())?.into_inner();
    let n = x.nrows();
    if n == 0 {
        return Err(Error::InvalidPartition("empty matrix".into()));
    }
    let smax = linalg::max_singular_value(&x);
    if smax == 0.0 {
        return Partition::new(vec![1; n]);
    }
    let threshold = tol * smax;
    let mut dims = vec![0usize];
    let mut kernel = DMatrix::<f64>::zeros(n, 0);
    while *dims.last().unwrap() < n {
        let off_kernel = DMatrix::identity(n, n) - &kernel * kernel.transpose();
        let system = off_kernel * &x;
        kernel = null_space_absolute(&system, threshold);
        let d = kernel.ncols();
        if d <= *dims.last().unwrap() || dims.len() > n {
            return Err(Error::NotNilpotent {
                stable_dim: n - dims.last().unwrap(),
            });
        }
        dims.push(d);
    }
    // at_least[k - 1] = number of parts >= k.
    let at_least: Vec<usize> = dims.windows(2).map(|w| w[1] - w[0]).collect();
    let mut parts = Vec::new();
    for k in (1..=at_least.len()).rev() {
        let longer = at_least.get(k).copied().unwrap_or(0);
        let exact = at_least[k - 1].checked_sub(longer).ok_or_else(|| {
            Error::InvalidPartition("inconsistent kernel dimensions".into())
        })?;
        parts.extend(std::iter::repeat_n(k, exact));
    }
    Partition::new(parts)
}

fn null_space_absolute(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(r, _)| v_t.row(r).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// All partitions of `n`, in ascending lexicographic order of their parts.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::InvalidPartition("n must be positive".into()));
    }
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for part in 1..=rest.min(max) {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// `so(n)`: `(E_ab - E_ba) / sqrt 2`.
pub fn so_basis(n: usize) -> Vec<LinearMap> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(a, b)] = s;
            e[(b, a)] = -s;
            out.push(e);
        }
    }
    out
}

/// `sl(n)`: off-diagonal units and traceless diagonal matrices.
pub fn sl_basis(n: usize) -> Vec<LinearMap> {
    block_sl_basis(&[n])
}

/// `sl(k_1) x ... x sl(k_r)` embedded block-diagonally.
pub fn block_sl_basis(sizes: &[usize]) -> Vec<LinearMap> {
    let n: usize = sizes.iter().sum();
    let mut out = Vec::new();
    let mut start = 0;
    for &k in sizes {
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    let mut e = DMatrix::zeros(n, n);
                    e[(start + a, start + b)] = 1.0;
                    out.push(e);
                }
            }
        }
        for a in 1..k {
            let mut e = DMatrix::zeros(n, n);
            e[(start + a - 1, start + a - 1)] = 1.0;
            e[(start + a, start + a)] = -1.0;
            out.push(e);
        }
        start += k;
    }
    out
}

fn distance_to_span(basis: &[LinearMap], a: &LinearMap) -> f64 {
    let mut r = a.clone();
    for e in basis {
        r -= e * linalg::trace_pairing(e, a);
    }
    r.norm()
}

/// Checks that the span of `g_basis` is closed under brackets and transposes
/// (relative `tol`), that `X` lies in it, and returns whether `m(X)` does.
pub fn subalgebra_detection_check(x: &DMatrix<f64>, g_basis: &[LinearMap], tol: f64) -> Result<bool> {
    let n = square_dim(x)?;
    for b in g_basis {
        if b.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
    }
    let span = linalg::orthonormalize_maps(g_basis);
    for e in &span {
        let residual = distance_to_span(&span, &e.transpose());
        if residual > tol {
            return Err(Error::NotThetaStable {
                reason: "transpose",
                residual,
            });
        }
    }
    for (i, a) in span.iter().enumerate() {
        for b in &span[i + 1..] {
            let residual = distance_to_span(&span, &linalg::commutator(a, b));
            if residual > tol {
                return Err(Error::NotThetaStable {
                    reason: "bracket",
                    residual,
                });
            }
        }
    }
    let residual = distance_to_span(&span, x);
    if residual > tol * x.norm() {
        return Err(Error::NotInSubalgebra { residual });
    }
    let m = adjoint_moment(x)?;
    Ok(distance_to_span(&span, m.matrix()) <= tol * m.norm())
}
