//! Moment maps for the `GL(n)` action on brackets and for a generic
//! representation given by an orthonormal basis of generators.
//!
//! With the Cartan involution `theta(A) = -A^t` the moment map takes values in
//! the symmetric matrices and is characterized by
//! `<<m(v), A>> = 2 <A . v, v>` for symmetric `A`, where `<<A, B>> = tr(A B^t)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie_core::{gl_infinitesimal_act, inner_product_v, BracketTensor};
use crate::linalg::{self, LinearMap};

/// Default relative tolerance of [`is_distinguished`].
pub const DISTINGUISHED_TOL: f64 = 1e-8;

/// Real symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::symmetrize(m))
    }

    fn symmetrize(m: DMatrix<f64>) -> Self {
        let s = (&m + m.transpose()) * 0.5;
        Self(s)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
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

    /// Frobenius norm, i.e. the norm of `<<, >>`.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(&self.0 * t)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

/// A real representation with a `K`-invariant inner product.
pub trait Representation {
    type Vector;

    /// Infinitesimal action `A . v`.
    fn act(&self, a: &LinearMap, v: &Self::Vector) -> Result<Self::Vector>;

    fn inner(&self, v: &Self::Vector, w: &Self::Vector) -> Result<f64>;
}

/// `GL(n)` acting on brackets by change of basis.
#[derive(Debug, Clone, Copy, Default)]
pub struct BracketRepresentation;

impl Representation for BracketRepresentation {
    type Vector = BracketTensor;

    fn act(&self, a: &LinearMap, v: &BracketTensor) -> Result<BracketTensor> {
        gl_infinitesimal_act(a, v)
    }

    fn inner(&self, v: &BracketTensor, w: &BracketTensor) -> Result<f64> {
        inner_product_v(v, w)
    }
}

/// Adjoint action of `sl(n)` on itself, `A . X = [A, X]`.
///
/// The inner product on the representation space is `tr(X Y^t) / 2`. With
/// that normalization the defining identity reproduces `m(X) = X X^t - X^t X`
/// exactly; any other positive multiple only rescales `m`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdjointRepresentation;

impl Representation for AdjointRepresentation {
    type Vector = DMatrix<f64>;

    fn act(&self, a: &LinearMap, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if a.shape() != x.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: x.nrows(),
            });
        }
        Ok(linalg::commutator(a, x))
    }

    fn inner(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        if x.shape() != y.shape() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: y.nrows(),
            });
        }
        Ok(0.5 * linalg::trace_pairing(x, y))
    }
}

/// Trace-orthonormal generators spanning (part of) `p` together with the
/// representation they act through.
#[derive(Debug, Clone)]
pub struct ActionBasis<R> {
    generators: Vec<LinearMap>,
    rep: R,
}

impl<R: Representation> ActionBasis<R> {
    /// Fails with [`Error::NonOrthonormalBasis`] when the Gram matrix of the
    /// generators deviates from the identity by more than `1e-8`.
    pub fn new(generators: Vec<LinearMap>, rep: R) -> Result<Self> {
        let deviation = linalg::gram_deviation(&generators);
        if deviation > 1e-8 {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        Ok(Self { generators, rep })
    }

    /// Orthonormalizes `maps` first.
    pub fn spanned_by(maps: &[LinearMap], rep: R) -> Self {
        Self {
            generators: linalg::orthonormalize_maps(maps),
            rep,
        }
    }

    pub fn generators(&self) -> &[LinearMap] {
        &self.generators
    }

    pub fn representation(&self) -> &R {
        &self.rep
    }

    /// Orthogonal projection of `a` onto the span of the generators.
    pub fn project(&self, a: &LinearMap) -> LinearMap {
        let mut out = DMatrix::zeros(a.nrows(), a.ncols());
        for e in &self.generators {
            out += e * linalg::trace_pairing(e, a);
        }
        out
    }
}

impl ActionBasis<BracketRepresentation> {
    /// Full `symm(n)`, i.e. `p` for `GL(n)`.
    pub fn bracket_full(n: usize) -> Self {
        Self {
            generators: linalg::symmetric_basis(n),
            rep: BracketRepresentation,
        }
    }
}

impl ActionBasis<AdjointRepresentation> {
    /// Traceless symmetric matrices, i.e. `p` for `SL(n)`.
    pub fn adjoint(n: usize) -> Self {
        Self {
            generators: linalg::traceless_symmetric_basis(n),
            rep: AdjointRepresentation,
        }
    }
}

/// `m(mu) = -4 sum_i ad(e_i)^t ad(e_i) + 2 sum_i ad(e_i) ad(e_i)^t`.
pub fn moment_bracket(mu: &BracketTensor) -> SymmetricMatrix {
    let n = mu.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let ad = mu.ad(i);
        m.gemm_tr(-4.0, &ad, &ad, 1.0);
        m.gemm(2.0, &ad, &ad.transpose(), 1.0);
    }
    SymmetricMatrix::symmetrize(m)
}

/// `m(v) = sum_r 2 <E_r . v, v> E_r` over an orthonormal basis.
pub fn moment_generic<R: Representation>(
    basis: &ActionBasis<R>,
    v: &R::Vector,
) -> Result<SymmetricMatrix> {
    let Some(first) = basis.generators.first() else {
        return Err(Error::NonOrthonormalBasis { deviation: 0.0 });
    };
    let mut m = DMatrix::zeros(first.nrows(), first.ncols());
    for e in &basis.generators {
        let coeff = 2.0 * basis.rep.inner(&basis.rep.act(e, v)?, v)?;
        m += e * coeff;
    }
    SymmetricMatrix::new(m)
}

/// `m[mu] = m(mu) / |mu|^2`.
pub fn moment_projective(mu: &BracketTensor) -> Result<SymmetricMatrix> {
    let norm_sq = mu.norm().powi(2);
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(moment_bracket(mu).scale(1.0 / norm_sq))
}

/// `|m[mu]|^2`, the function whose gradient flow is studied.
pub fn moment_norm_sq(mu: &BracketTensor) -> Result<f64> {
    Ok(moment_projective(mu)?.norm_sq())
}

/// Action of a symmetric moment value on a bracket, `m . mu`.
pub fn moment_act(m: &SymmetricMatrix, mu: &BracketTensor) -> Result<BracketTensor> {
    gl_infinitesimal_act(m.matrix(), mu)
}

fn require_unit(mu: &BracketTensor) -> Result<()> {
    let norm = mu.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitNorm { norm });
    }
    Ok(())
}

/// Tangential projection of `w` at the unit vector `mu`.
fn tangential(w: BracketTensor, mu: &BracketTensor) -> Result<BracketTensor> {
    let radial = inner_product_v(&w, mu)?;
    w.add_scaled(-radial, mu)
}

/// Gradient of `F(mu) = |m[mu]|^2` on the unit sphere at a unit-norm `mu`:
/// `8 (m(mu) . mu)` minus its radial part.
///
/// Differentiating the defining identity gives `dm_mu(nu) = 4 sum_r <E_r . mu, nu> E_r`,
/// hence `dF = 2 <<m, dm>> = 8 <m . mu, nu>`.
pub fn grad_norm_sq(mu: &BracketTensor) -> Result<BracketTensor> {
    require_unit(mu)?;
    let m = moment_bracket(mu);
    tangential(moment_act(&m, mu)?.scale(8.0), mu)
}

/// Gradient on the unit sphere of `|P m[mu]|^2`, where `P` projects onto the
/// span of `basis`. For the full `symm(n)` basis this is [`grad_norm_sq`].
pub fn grad_norm_sq_restricted(
    mu: &BracketTensor,
    basis: &ActionBasis<BracketRepresentation>,
) -> Result<BracketTensor> {
    require_unit(mu)?;
    let m = SymmetricMatrix::new(basis.project(moment_bracket(mu).matrix()))?;
    tangential(moment_act(&m, mu)?.scale(8.0), mu)
}

/// Returns `c` when `m(mu) . mu = c mu` holds within `tol * |mu|`.
pub fn is_distinguished(mu: &BracketTensor, tol: f64) -> Result<Option<f64>> {
    let norm_sq = mu.norm().powi(2);
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let w = moment_act(&moment_bracket(mu), mu)?;
    let c = inner_product_v(&w, mu)? / norm_sq;
    let residual = w.add_scaled(-c, mu)?.norm();
    Ok((residual <= tol * norm_sq.sqrt()).then_some(c))
}

/// Largest `|2 <A . mu, mu>|` over an orthonormal basis of `so(n)`. Zero up to
/// rounding for every `mu` because the inner product is `O(n)`-invariant, so
/// the moment map has no skew component.
pub fn skew_component(mu: &BracketTensor) -> f64 {
    let n = mu.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(a, b)] = std::f64::consts::FRAC_1_SQRT_2;
            e[(b, a)] = -std::f64::consts::FRAC_1_SQRT_2;
            let act = gl_infinitesimal_act(&e, mu).expect("dims agree");
            let v = 2.0 * inner_product_v(&act, mu).expect("dims agree");
            worst = worst.max(v.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{gl_act, independent_dim};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_bracket(rng: &mut ChaCha8Rng, n: usize) -> BracketTensor {
        let v = linalg::gaussian_matrix(rng, independent_dim(n), 1);
        BracketTensor::from_independent(n, v.as_slice()).unwrap()
    }

    /// Term-by-term double sums of `<m(mu) e_x, e_y>` in structure constants.
    fn moment_oracle(mu: &BracketTensor) -> DMatrix<f64> {
        let n = mu.dim();
        DMatrix::from_fn(n, n, |x, y| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s -= 4.0 * mu.get(x, i, j) * mu.get(y, i, j);
                    s += 2.0 * mu.get(i, j, x) * mu.get(i, j, y);
                }
            }
            s
        })
    }

    #[test]
    fn heisenberg_moment() {
        let mu = BracketTensor::heisenberg();
        let m = moment_bracket(&mu);
        let expected = SymmetricMatrix::from_diagonal(&[-4.0, -4.0, 4.0]);
        assert!(m.max_abs_diff(&expected) <= 1e-12);
        assert!((m.matrix() - moment_oracle(&mu)).amax() <= 1e-12);
        assert_eq!(moment_bracket(&BracketTensor::zeros(3)), SymmetricMatrix::zeros(3));
        let scaled = moment_bracket(&mu.scale(3.0));
        assert!(scaled.max_abs_diff(&m.scale(9.0)) < 1e-12);
    }

    #[test]
    fn moment_matches_term_by_term_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            let mu = random_bracket(&mut rng, n);
            assert!((moment_bracket(&mu).matrix() - moment_oracle(&mu)).amax() < 1e-12 * mu.norm().powi(2).max(1.0));
        }
    }

    #[test]
    fn defining_identity_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..100 {
            let n = 2 + trial % 5;
            let mu = random_bracket(&mut rng, n);
            let a = linalg::random_symmetric(&mut rng, n);
            let lhs = linalg::trace_pairing(moment_bracket(&mu).matrix(), &a);
            let rhs = 2.0 * inner_product_v(&gl_infinitesimal_act(&a, &mu).unwrap(), &mu).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * a.norm() * mu.norm().powi(2));
        }
    }

    #[test]
    fn skew_component_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..6 {
            let mu = random_bracket(&mut rng, n);
            assert!(skew_component(&mu) < 1e-12 * mu.norm().powi(2));
        }
    }

    #[test]
    fn generic_moment_examples() {
        let mu = BracketTensor::heisenberg();
        let basis = ActionBasis::bracket_full(3);
        let generic = moment_generic(&basis, &mu).unwrap();
        assert!(generic.max_abs_diff(&moment_bracket(&mu)) <= 1e-12);
        assert_eq!(
            moment_generic(&basis, &BracketTensor::zeros(3)).unwrap(),
            SymmetricMatrix::zeros(3)
        );

        let adj = ActionBasis::adjoint(2);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0]);
        let m = moment_generic(&adj, &x).unwrap();
        assert!(m.max_abs_diff(&SymmetricMatrix::from_diagonal(&[0.5, -0.5])) < 1e-15);
    }

    #[test]
    fn generic_rejects_non_orthonormal_generators() {
        let gens = vec![DMatrix::identity(2, 2)];
        assert!(matches!(
            ActionBasis::new(gens, BracketRepresentation),
            Err(Error::NonOrthonormalBasis { .. })
        ));
    }

    #[test]
    fn projective_moment() {
        let mu = BracketTensor::heisenberg();
        let m = moment_projective(&mu).unwrap();
        assert!(m.max_abs_diff(&SymmetricMatrix::from_diagonal(&[-2.0, -2.0, 2.0])) < 1e-15);
        assert!(moment_projective(&mu.scale(5.0)).unwrap().max_abs_diff(&m) < 1e-14);
        assert!(matches!(
            moment_projective(&BracketTensor::zeros(3)),
            Err(Error::ZeroVector)
        ));
        assert!((moment_norm_sq(&mu).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn equivariance_under_orthogonal_change_of_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 2..6 {
            let mu = random_bracket(&mut rng, n);
            let k = linalg::random_orthogonal(&mut rng, n);
            let lhs = moment_bracket(&gl_act(&k, &mu).unwrap());
            let rhs = &k * moment_bracket(&mu).matrix() * k.transpose();
            assert!((lhs.matrix() - rhs).amax() <= 1e-10 * mu.norm().powi(2));
        }
    }

    #[test]
    fn heisenberg_is_distinguished_with_c_12() {
        let mu = BracketTensor::heisenberg();
        // m . mu = m e3 - mu(m e1, e2) - mu(e1, m e2) = (4 + 4 + 4) e3
        let w = moment_act(&moment_bracket(&mu), &mu).unwrap();
        assert!(w.max_abs_diff(&mu.scale(12.0)) <= 1e-12);
        let c = is_distinguished(&mu, DISTINGUISHED_TOL).unwrap().unwrap();
        assert!((c - 12.0).abs() < 1e-12);
        let unit = mu.normalized().unwrap();
        assert!(grad_norm_sq(&unit).unwrap().norm() < 1e-12);
    }

    #[test]
    fn perturbed_heisenberg_is_not_distinguished() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = random_bracket(&mut rng, 3).scale(0.1);
        let mu = BracketTensor::heisenberg().add_scaled(1.0, &noise).unwrap();
        assert_eq!(is_distinguished(&mu, DISTINGUISHED_TOL).unwrap(), None);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = 1e-5;
        for n in [3, 4, 5] {
            let mu = random_bracket(&mut rng, n).normalized().unwrap();
            let grad = grad_norm_sq(&mu).unwrap();
            assert!(inner_product_v(&grad, &mu).unwrap().abs() < 1e-12 * grad.norm());
            for _ in 0..5 {
                let raw = random_bracket(&mut rng, n);
                let t = raw
                    .add_scaled(-inner_product_v(&raw, &mu).unwrap(), &mu)
                    .unwrap()
                    .normalized()
                    .unwrap();
                let fp = moment_norm_sq(&mu.add_scaled(h, &t).unwrap()).unwrap();
                let fm = moment_norm_sq(&mu.add_scaled(-h, &t).unwrap()).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let exact = inner_product_v(&grad, &t).unwrap();
                assert!((fd - exact).abs() < 1e-5 * exact.abs().max(1.0), "fd={fd} exact={exact}");
            }
        }
    }

    #[test]
    fn gradient_requires_unit_norm() {
        assert!(matches!(
            grad_norm_sq(&BracketTensor::heisenberg()),
            Err(Error::NotUnitNorm { .. })
        ));
        assert!(matches!(
            grad_norm_sq(&BracketTensor::zeros(3)),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn restricted_gradient_with_full_basis_is_full_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mu = random_bracket(&mut rng, 4).normalized().unwrap();
        let full = grad_norm_sq(&mu).unwrap();
        let restricted = grad_norm_sq_restricted(&mu, &ActionBasis::bracket_full(4)).unwrap();
        assert!(full.max_abs_diff(&restricted) < 1e-12);
    }
}
