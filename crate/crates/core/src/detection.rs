//! Block structures from symmetric derivations, the compatible subspace `W`
//! and the checks that `m(lambda)` lies in the block subalgebra `h` for
//! `lambda` in `W`.
//!
//! Every check runs in the adapted orthonormal basis: `lambda` is conjugated
//! once by the basis and the block conditions become coordinate masks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie_core::{self, BracketTensor};
use crate::linalg::{self, LinearMap};
use crate::moment::{moment_bracket, SymmetricMatrix};

/// Default merge tolerance for eigenvalues.
pub const GAP_TOL: f64 = 1e-7;

/// Relative commutator bound for a family of derivations to count as commuting.
pub const COMMUTATOR_TOL: f64 = 1e-9;

/// Rank threshold for the tangent-space computation, relative to the largest
/// singular value of the full tangent map.
pub const TANGENT_RTOL: f64 = 1e-9;

/// An orthonormal basis adapted to a decomposition of `R^n` into consecutive
/// coordinate blocks, and the subspace `W` of brackets compatible with it.
pub trait Compatible {
    /// Orthogonal matrix whose column groups span the blocks.
    fn basis(&self) -> &LinearMap;

    fn block_sizes(&self) -> &[usize];

    /// Whether `lambda'(e_a, e_b)` may have an `e_k` component for `lambda`
    /// in `W`, in the adapted basis.
    fn allows(&self, a: usize, b: usize, k: usize) -> bool;

    fn dim(&self) -> usize {
        self.basis().nrows()
    }

    /// `allows` tabulated at index `(a * n + b) * n + k`.
    fn mask(&self) -> Vec<bool> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    out.push(self.allows(a, b, k));
                }
            }
        }
        out
    }

    /// Block index of every adapted coordinate.
    fn block_index(&self) -> Vec<usize> {
        self.block_sizes()
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect()
    }

    /// `h = gl(V_1) + ... + gl(V_k)` as trace-orthonormal ambient matrices.
    fn subalgebra_basis(&self) -> Vec<LinearMap> {
        block_maps(self.basis(), self.block_sizes(), false)
    }

    /// The symmetric part of `h`, e.g. for the restricted flow.
    fn symmetric_generators(&self) -> Vec<LinearMap> {
        block_maps(self.basis(), self.block_sizes(), true)
    }
}

fn block_maps(basis: &LinearMap, sizes: &[usize], symmetric: bool) -> Vec<LinearMap> {
    let n = basis.nrows();
    let mut out = Vec::new();
    let mut start = 0;
    for &size in sizes {
        let cols = basis.columns(start, size);
        let local = if symmetric {
            linalg::symmetric_basis(size)
        } else {
            (0..size * size)
                .map(|r| {
                    let mut e = DMatrix::zeros(size, size);
                    e[(r / size, r % size)] = 1.0;
                    e
                })
                .collect()
        };
        for e in local {
            let m: LinearMap = cols * e * cols.transpose();
            debug_assert_eq!(m.nrows(), n);
            out.push(m);
        }
        start += size;
    }
    out
}

/// Joint eigenspace decomposition of one or more commuting symmetric maps.
///
/// Blocks are ordered by their labels (lexicographically); each label lists
/// the eigenvalue of every map on that block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    basis: LinearMap,
    block_sizes: Vec<usize>,
    labels: Vec<Vec<f64>>,
    gap_tol: f64,
}

impl BlockStructure {
    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    /// Distinct eigenvalues of the first map, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l[0]).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// `basis . diag(labels[.][index]) . basis^t`, i.e. the `index`-th input
    /// map with its eigenvalues snapped to the block labels.
    pub fn reconstruct(&self, index: usize) -> SymmetricMatrix {
        let diag: Vec<f64> = self
            .block_index()
            .into_iter()
            .map(|b| self.labels[b][index])
            .collect();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        SymmetricMatrix::new(&self.basis * d * self.basis.transpose())
            .expect("finite square matrix")
    }

    fn label_sum_block(&self, alpha: usize, beta: usize) -> Option<usize> {
        let target: Vec<f64> = self.labels[alpha]
            .iter()
            .zip(&self.labels[beta])
            .map(|(x, y)| x + y)
            .collect();
        let tol = 2.0 * self.gap_tol;
        self.labels
            .iter()
            .position(|l| l.iter().zip(&target).all(|(x, y)| (x - y).abs() <= tol))
    }
}

impl Compatible for BlockStructure {
    fn basis(&self) -> &LinearMap {
        &self.basis
    }

    fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    fn allows(&self, a: usize, b: usize, k: usize) -> bool {
        let index = self.block_index();
        self.label_sum_block(index[a], index[b]) == Some(index[k])
    }

    fn mask(&self) -> Vec<bool> {
        let n = self.dim();
        let index = self.block_index();
        let blocks = self.num_blocks();
        let sums: Vec<Option<usize>> = (0..blocks * blocks)
            .map(|r| self.label_sum_block(r / blocks, r % blocks))
            .collect();
        let mut out = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    out.push(sums[index[a] * blocks + index[b]] == Some(index[k]));
                }
            }
        }
        out
    }
}

/// Eigenspace blocks of a single symmetric map. Eigenvalues closer than
/// `gap_tol` (chained) are merged into one block.
pub fn eigenspace_blocks(d: &SymmetricMatrix, gap_tol: f64) -> BlockStructure {
    joint_blocks(std::slice::from_ref(d), gap_tol).expect("a single map commutes with itself")
}

/// Common refinement of the eigenspace decompositions of commuting symmetric
/// maps. Fails with [`Error::NonCommuting`] when some pair has
/// `|[D_a, D_b]| > COMMUTATOR_TOL |D_a| |D_b|`.
pub fn joint_blocks(ds: &[SymmetricMatrix], gap_tol: f64) -> Result<BlockStructure> {
    let Some(first) = ds.first() else {
        return Err(Error::Parse("at least one derivation is required".into()));
    };
    let n = first.dim();
    for d in ds {
        if d.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.dim(),
            });
        }
    }
    for (a, x) in ds.iter().enumerate() {
        for y in &ds[a + 1..] {
            let norm = linalg::commutator(x.matrix(), y.matrix()).norm();
            if norm > COMMUTATOR_TOL * x.norm() * y.norm() {
                return Err(Error::NonCommuting { norm });
            }
        }
    }

    let mut blocks: Vec<(LinearMap, Vec<f64>)> = vec![(DMatrix::identity(n, n), Vec::new())];
    for d in ds {
        let mut refined = Vec::new();
        for (cols, label) in blocks {
            let local = cols.transpose() * d.matrix() * &cols;
            let local = (&local + local.transpose()) * 0.5;
            let eig = local.symmetric_eigen();
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for &i in &order {
                match groups.last_mut() {
                    Some(g)
                        if eig.eigenvalues[i] - eig.eigenvalues[*g.last().unwrap()] <= gap_tol =>
                    {
                        g.push(i)
                    }
                    _ => groups.push(vec![i]),
                }
            }
            for g in groups {
                let vecs = DMatrix::from_columns(
                    &g.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>(),
                );
                let sub = (&cols * vecs).qr().q();
                let mean = g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64;
                let mut l = label.clone();
                l.push(mean);
                refined.push((sub, l));
            }
        }
        blocks = refined;
    }
    blocks.sort_by(|a, b| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let block_sizes = blocks.iter().map(|(c, _)| c.ncols()).collect();
    let basis = DMatrix::from_columns(
        &blocks
            .iter()
            .flat_map(|(c, _)| c.column_iter().map(|col| col.into_owned()))
            .collect::<Vec<_>>(),
    );
    Ok(BlockStructure {
        basis,
        block_sizes,
        labels: blocks.into_iter().map(|(_, l)| l).collect(),
        gap_tol,
    })
}

/// Orthogonal decomposition `R^n = V_1 + V_2` into the first `dim_1` and the
/// last `dim_2` columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSplit {
    dim_1: usize,
    dim_2: usize,
    basis: LinearMap,
    sizes: [usize; 2],
}

impl SumSplit {
    /// The coordinate split `R^{dim_1} + R^{dim_2}`.
    pub fn coordinate(dim_1: usize, dim_2: usize) -> Self {
        let n = dim_1 + dim_2;
        Self {
            dim_1,
            dim_2,
            basis: DMatrix::identity(n, n),
            sizes: [dim_1, dim_2],
        }
    }

    pub fn with_basis(dim_1: usize, dim_2: usize, basis: LinearMap) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n || dim_1 + dim_2 != n {
            return Err(Error::InvalidSplit { dim_1, dim_2, dim: n });
        }
        let deviation = (basis.transpose() * &basis - DMatrix::identity(n, n)).amax();
        if deviation > 1e-10 {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        Ok(Self {
            dim_1,
            dim_2,
            basis,
            sizes: [dim_1, dim_2],
        })
    }

    pub fn dim_1(&self) -> usize {
        self.dim_1
    }

    pub fn dim_2(&self) -> usize {
        self.dim_2
    }
}

impl Compatible for SumSplit {
    fn basis(&self) -> &LinearMap {
        &self.basis
    }

    fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn allows(&self, a: usize, b: usize, k: usize) -> bool {
        let first = |x: usize| x < self.dim_1;
        first(a) == first(b) && first(b) == first(k)
    }
}

fn check_dim<C: Compatible + ?Sized>(c: &C, lambda: &BracketTensor) -> Result<()> {
    if c.dim() != lambda.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: lambda.dim(),
        });
    }
    Ok(())
}

/// `lambda` written in the adapted basis.
pub fn adapted<C: Compatible + ?Sized>(lambda: &BracketTensor, c: &C) -> Result<BracketTensor> {
    check_dim(c, lambda)?;
    lie_core::orthogonal_act(&c.basis().transpose(), lambda)
}

/// Norm of the part of `lambda` outside `W`, divided by `|lambda|` (zero for
/// the zero bracket).
pub fn w_residual<C: Compatible + ?Sized>(lambda: &BracketTensor, c: &C) -> Result<f64> {
    let local = adapted(lambda, c)?;
    let allowed = c.mask();
    let outside: f64 = local
        .coeffs()
        .iter()
        .zip(&allowed)
        .filter(|(_, &ok)| !ok)
        .map(|(x, _)| x * x)
        .sum();
    let norm = lambda.norm();
    Ok(if norm == 0.0 { 0.0 } else { outside.sqrt() / norm })
}

/// Largest off-block entry of `m` in the adapted basis, divided by `|m|`
/// (zero when `m = 0`).
pub fn off_block_residual<C: Compatible + ?Sized>(m: &SymmetricMatrix, c: &C) -> Result<f64> {
    if m.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: m.dim(),
        });
    }
    let local = c.basis().transpose() * m.matrix() * c.basis();
    let index = c.block_index();
    let mut worst: f64 = 0.0;
    for a in 0..c.dim() {
        for b in 0..c.dim() {
            if index[a] != index[b] {
                worst = worst.max(local[(a, b)].abs());
            }
        }
    }
    let norm = m.norm();
    Ok(if norm == 0.0 { 0.0 } else { worst / norm })
}

/// Whether `lambda` is in the kernel of the `D`-action:
/// `|D . lambda| <= tol |D| |lambda|`.
pub fn in_w(lambda: &BracketTensor, d: &SymmetricMatrix, tol: f64) -> Result<bool> {
    Ok(in_w_residual(lambda, d)? <= tol)
}

/// `|D . lambda| / (|D| |lambda|)`, or zero when either factor vanishes.
pub fn in_w_residual(lambda: &BracketTensor, d: &SymmetricMatrix) -> Result<f64> {
    let image = lie_core::gl_infinitesimal_act(d.matrix(), lambda)?;
    let scale = d.norm() * lambda.norm();
    Ok(if scale == 0.0 { 0.0 } else { image.norm() / scale })
}

/// `lambda(V_alpha, V_beta) in V_{alpha+beta}` for all block pairs, where
/// `V_{alpha+beta} = 0` if the label sum is not a label. The tolerance is
/// relative to `|lambda|`.
pub fn graded_bracket_check(lambda: &BracketTensor, blocks: &BlockStructure, tol: f64) -> Result<bool> {
    Ok(w_residual(lambda, blocks)? <= tol)
}

/// `m(lambda) in h`: every off-block entry of `m(lambda)` in the adapted
/// basis is at most `tol |m(lambda)|`.
pub fn check_detection(lambda: &BracketTensor, blocks: &BlockStructure, tol: f64) -> Result<bool> {
    Ok(detection_residual(lambda, blocks)? <= tol)
}

pub fn detection_residual<C: Compatible + ?Sized>(lambda: &BracketTensor, c: &C) -> Result<f64> {
    check_dim(c, lambda)?;
    off_block_residual(&moment_bracket(lambda), c)
}

/// Restricts `mu` to the two summands after checking that they are ideals
/// with `mu(V_1, V_2) = 0`, each component relative to `|mu|`.
pub fn split_direct_sum(
    mu: &BracketTensor,
    split: &SumSplit,
    tol: f64,
) -> Result<(BracketTensor, BracketTensor)> {
    let local = adapted(mu, split)?;
    let (n1, n) = (split.dim_1, split.dim());
    let scale = mu.norm();
    let mut parts = [0.0_f64; 3];
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, j, k, c) in local.nonzero_constants() {
        let (a, b, out) = (i < n1, j < n1, k < n1);
        match (a, b) {
            (true, true) if out => first.push((i, j, k, c)),
            (true, true) => parts[0] += c * c,
            (false, false) if !out => second.push((i - n1, j - n1, k - n1, c)),
            (false, false) => parts[1] += c * c,
            _ => parts[2] += c * c,
        }
    }
    let names = ["mu(V1, V1) outside V1", "mu(V2, V2) outside V2", "mu(V1, V2)"];
    for (name, sq) in names.into_iter().zip(parts) {
        // Each independent constant appears twice in the norm on V.
        let norm = (2.0 * sq).sqrt();
        if norm > tol * scale {
            return Err(Error::NotAnIdealSum {
                component: name,
                norm,
            });
        }
    }
    Ok((
        BracketTensor::from_constants(n1, &first)?,
        BracketTensor::from_constants(n - n1, &second)?,
    ))
}

/// `m(lambda) in gl(V_1) x gl(V_2)` for `lambda` in
/// `W = Lambda^2 V_1* (x) V_1 + Lambda^2 V_2* (x) V_2`. Fails with
/// [`Error::NotInW`] if `lambda` is not in `W` within `tol`.
pub fn check_sum_detection(lambda: &BracketTensor, split: &SumSplit, tol: f64) -> Result<bool> {
    let residual = w_residual(lambda, split)?;
    if residual > tol {
        return Err(Error::NotInW { residual });
    }
    Ok(detection_residual(lambda, split)? <= tol)
}

/// Dimensions of `T(G . mu) cap W` and `T(H . mu)`, which agree when
/// detection holds. Fails with [`Error::NotInW`] when `mu` is not in `W`
/// (relative residual above `TANGENT_RTOL`).
pub fn tangent_intersection_rank<C: Compatible + ?Sized>(
    mu: &BracketTensor,
    c: &C,
) -> Result<(usize, usize)> {
    let residual = w_residual(mu, c)?;
    if residual > TANGENT_RTOL {
        return Err(Error::NotInW { residual });
    }
    let n = c.dim();
    let local = adapted(mu, c)?;
    let full: Vec<LinearMap> = block_maps(&DMatrix::identity(n, n), &[n], false);
    let m_g = lie_core::action_matrix(&local, &full)?;
    let smax = linalg::max_singular_value(&m_g);
    if smax == 0.0 {
        return Ok((0, 0));
    }
    let threshold = TANGENT_RTOL * smax;
    let mut outside = m_g.clone();
    for (row, ok) in c.mask().into_iter().enumerate() {
        if ok {
            outside.row_mut(row).fill(0.0);
        }
    }
    let intersection = linalg::rank_above(&m_g, threshold) - linalg::rank_above(&outside, threshold);
    let identity = DMatrix::identity(n, n);
    let h_local = block_maps(&identity, c.block_sizes(), false);
    let m_h = lie_core::action_matrix(&local, &h_local)?;
    Ok((intersection, linalg::rank_above(&m_h, threshold)))
}

/// Matrix of `lambda -> D . lambda` on independent coordinates.
fn action_on_independent(d: &SymmetricMatrix) -> DMatrix<f64> {
    let n = d.dim();
    let size = lie_core::independent_dim(n);
    let mut out = DMatrix::zeros(size, size);
    let mut unit = vec![0.0; size];
    for r in 0..size {
        unit[r] = 1.0;
        let e = BracketTensor::from_independent(n, &unit).expect("length matches");
        let image = lie_core::gl_infinitesimal_act(d.matrix(), &e).expect("dimensions match");
        out.column_mut(r).copy_from(&image.to_independent());
        unit[r] = 0.0;
    }
    out
}

/// Orthonormal basis of `W = cap ker(D_a .)` in independent coordinates
/// (columns), from the stacked kernel.
pub fn w_basis(ds: &[SymmetricMatrix]) -> Result<DMatrix<f64>> {
    let Some(first) = ds.first() else {
        return Err(Error::Parse("at least one derivation is required".into()));
    };
    let n = first.dim();
    let size = lie_core::independent_dim(n);
    let mut stacked = DMatrix::zeros(size * ds.len(), size);
    for (a, d) in ds.iter().enumerate() {
        if d.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.dim(),
            });
        }
        stacked
            .view_mut((a * size, 0), (size, size))
            .copy_from(&action_on_independent(d));
    }
    Ok(linalg::null_space(&stacked, linalg::RANK_RTOL))
}

/// Gaussian combination of the columns of a [`w_basis`].
pub fn sample_w<R: Rng + ?Sized>(rng: &mut R, dim: usize, basis: &DMatrix<f64>) -> Result<BracketTensor> {
    let coeffs = linalg::gaussian_matrix(rng, basis.ncols(), 1);
    let v = basis * coeffs;
    BracketTensor::from_independent(dim, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(d)
    }

    fn conjugate(q: &LinearMap, d: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix::new(q.transpose() * d.matrix() * q).unwrap()
    }

    /// Number of independent slots `(i < j, k)` with `d_k = d_i + d_j`.
    fn graded_count(d: &[f64]) -> usize {
        let n = d.len();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    if (d[k] - d[i] - d[j]).abs() < 1e-12 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Random integer grading with a nonzero `W`, rotated by a random `Q`.
    fn random_scenario(rng: &mut ChaCha8Rng) -> (SymmetricMatrix, Vec<f64>) {
        loop {
            let n = rng.random_range(3..=6);
            let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(1..=4) as f64).collect();
            d.sort_by(f64::total_cmp);
            if graded_count(&d) == 0 {
                continue;
            }
            let q = linalg::random_orthogonal(rng, n);
            return (conjugate(&q, &diag(&d)), d);
        }
    }

    #[test]
    fn blocks_of_diagonal_maps() {
        let b = eigenspace_blocks(&diag(&[1.0, 1.0, 2.0]), GAP_TOL);
        assert_eq!(b.eigenvalues(), vec![1.0, 2.0]);
        assert_eq!(b.block_sizes(), &[2, 1]);

        let id = eigenspace_blocks(&diag(&[1.0; 4]), GAP_TOL);
        assert_eq!(id.block_sizes(), &[4]);
    }

    #[test]
    fn blocks_of_conjugated_map_span_rotated_eigenspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let q = linalg::random_orthogonal(&mut rng, 3);
        let d = conjugate(&q, &diag(&[1.0, 1.0, 2.0]));
        let b = eigenspace_blocks(&d, GAP_TOL);
        assert_eq!(b.block_sizes(), &[2, 1]);
        assert!((b.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((b.eigenvalues()[1] - 2.0).abs() < 1e-12);
        // Projector onto the 1-eigenspace: Q^t diag(1, 1, 0) Q.
        let expected = q.transpose() * diag(&[1.0, 1.0, 0.0]).matrix() * &q;
        let cols = b.basis().columns(0, 2);
        assert!((cols * cols.transpose() - expected).amax() < 1e-12);
        let basis = b.basis();
        assert!((basis.transpose() * basis - DMatrix::identity(3, 3)).amax() < 1e-10);
        assert!(b.reconstruct(0).max_abs_diff(&d) < 1e-9);
    }

    #[test]
    fn nearby_eigenvalues_are_merged() {
        let b = eigenspace_blocks(&diag(&[1.0, 1.0 + 1e-9, 2.0]), GAP_TOL);
        assert_eq!(b.block_sizes(), &[2, 1]);
        let split = eigenspace_blocks(&diag(&[1.0, 1.0 + 1e-3, 2.0]), GAP_TOL);
        assert_eq!(split.block_sizes(), &[1, 1, 1]);
    }

    #[test]
    fn joint_blocks_refine_and_reject_non_commuting_families() {
        let b = joint_blocks(
            &[diag(&[1.0, 1.0, 2.0, 2.0]), diag(&[1.0, 2.0, 1.0, 2.0])],
            GAP_TOL,
        )
        .unwrap();
        assert_eq!(b.block_sizes(), &[1, 1, 1, 1]);
        assert_eq!(b.labels()[1], vec![1.0, 2.0]);

        let mut off = DMatrix::zeros(2, 2);
        off[(0, 1)] = 1.0;
        off[(1, 0)] = 1.0;
        let family = [diag(&[1.0, 2.0]), SymmetricMatrix::new(off).unwrap()];
        assert!(matches!(
            joint_blocks(&family, GAP_TOL),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn membership_in_w() {
        let heis = BracketTensor::heisenberg();
        assert!(in_w(&heis, &diag(&[1.0, 1.0, 2.0]), 1e-12).unwrap());
        // (D . mu)(e1, e2) = 4 e3 - e3 - 2 e3 = e3.
        assert!(!in_w(&heis, &diag(&[1.0, 2.0, 4.0]), 1e-6).unwrap());
        // 3 = 1 + 2, so this one is a derivation as well.
        assert!(in_w(&heis, &diag(&[1.0, 2.0, 3.0]), 1e-12).unwrap());
        assert!(in_w(&heis, &SymmetricMatrix::zeros(3), 1e-12).unwrap());
    }

    #[test]
    fn w_dimension_matches_graded_count() {
        for d in [
            vec![1.0, 1.0, 2.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![1.0, 1.0, 2.0, 2.0, 3.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ] {
            let basis = w_basis(&[diag(&d)]).unwrap();
            assert_eq!(basis.ncols(), graded_count(&d), "{d:?}");
        }
    }

    #[test]
    fn heisenberg_checks() {
        let heis = BracketTensor::heisenberg();
        let b = eigenspace_blocks(&diag(&[1.0, 1.0, 2.0]), GAP_TOL);
        assert!(graded_bracket_check(&heis, &b, 1e-12).unwrap());
        assert!(check_detection(&heis, &b, 1e-12).unwrap());
        // dim H . mu = dim h - dim(Der(mu) cap h) = 5 - 4, and
        // dim G . mu = 9 - 6 = 3 meets W in one dimension.
        assert_eq!(tangent_intersection_rank(&heis, &b).unwrap(), (1, 1));

        let zero = BracketTensor::zeros(3);
        assert!(graded_bracket_check(&zero, &b, 1e-12).unwrap());
        assert_eq!(tangent_intersection_rank(&zero, &b).unwrap(), (0, 0));
    }

    #[test]
    fn generic_brackets_fail_the_block_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let b = eigenspace_blocks(&diag(&[1.0, 1.0, 2.0]), GAP_TOL);
        let v = linalg::gaussian_matrix(&mut rng, lie_core::independent_dim(3), 1);
        let lambda = BracketTensor::from_independent(3, v.as_slice()).unwrap();
        assert!(!graded_bracket_check(&lambda, &b, 1e-9).unwrap());
        assert!(!check_detection(&lambda, &b, 1e-9).unwrap());
        assert!(matches!(
            tangent_intersection_rank(&lambda, &b),
            Err(Error::NotInW { .. })
        ));
    }

    #[test]
    fn splitting_direct_sums() {
        let heis = BracketTensor::heisenberg();
        let (a, b) = split_direct_sum(
            &heis.direct_sum(&BracketTensor::zeros(1)),
            &SumSplit::coordinate(3, 1),
            1e-12,
        )
        .unwrap();
        assert_eq!(a, heis);
        assert!(b.is_zero());

        let (a, b) = split_direct_sum(&heis.direct_sum(&heis), &SumSplit::coordinate(3, 3), 1e-12)
            .unwrap();
        assert_eq!((a, b), (heis.clone(), heis.clone()));

        assert!(matches!(
            split_direct_sum(&heis, &SumSplit::coordinate(2, 1), 1e-12),
            Err(Error::NotAnIdealSum { component: "mu(V1, V1) outside V1", .. })
        ));
        assert!(SumSplit::with_basis(2, 2, DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn splitting_in_a_rotated_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let q = linalg::random_orthogonal(&mut rng, 6);
        let heis = BracketTensor::heisenberg();
        let sum = heis.direct_sum(&heis);
        let rotated = lie_core::orthogonal_act(&q, &sum).unwrap();
        let split = SumSplit::with_basis(3, 3, q).unwrap();
        let (a, b) = split_direct_sum(&rotated, &split, 1e-12).unwrap();
        assert!(a.max_abs_diff(&heis) < 1e-12);
        assert!(b.max_abs_diff(&heis) < 1e-12);
    }

    #[test]
    fn sum_detection_examples() {
        let heis = BracketTensor::heisenberg();
        let sum = heis.direct_sum(&heis);
        let split = SumSplit::coordinate(3, 3);
        assert!(check_sum_detection(&sum, &split, 1e-12).unwrap());
        let expected = diag(&[-4.0, -4.0, 4.0, -4.0, -4.0, 4.0]);
        assert!(moment_bracket(&sum).max_abs_diff(&expected) < 1e-12);
        assert!(check_sum_detection(&BracketTensor::zeros(6), &split, 1e-12).unwrap());
        assert_eq!(tangent_intersection_rank(&sum, &split).unwrap(), (6, 6));

        let mixed = BracketTensor::from_constants(6, &[(0, 3, 1, 1.0)]).unwrap();
        assert!(matches!(
            check_sum_detection(&mixed, &split, 1e-9),
            Err(Error::NotInW { .. })
        ));
    }

    #[test]
    fn subalgebra_generators_are_block_diagonal() {
        let b = eigenspace_blocks(&diag(&[1.0, 1.0, 2.0]), GAP_TOL);
        assert_eq!(b.subalgebra_basis().len(), 5);
        assert_eq!(b.symmetric_generators().len(), 4);
        assert!(linalg::gram_deviation(&b.subalgebra_basis()) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn detection_holds_on_w(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (d, _) = random_scenario(&mut rng);
            let n = d.dim();
            let blocks = eigenspace_blocks(&d, GAP_TOL);
            let basis = w_basis(std::slice::from_ref(&d)).unwrap();
            for _ in 0..10 {
                let lambda = sample_w(&mut rng, n, &basis).unwrap();
                prop_assert!(in_w(&lambda, &d, 1e-9).unwrap());
                prop_assert!(graded_bracket_check(&lambda, &blocks, 1e-9).unwrap());
                prop_assert!(check_detection(&lambda, &blocks, 1e-9).unwrap());
                let (meet, orbit) = tangent_intersection_rank(&lambda, &blocks).unwrap();
                prop_assert_eq!(meet, orbit);
            }
        }

        #[test]
        fn w_is_a_linear_subspace(seed in any::<u64>(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (d, _) = random_scenario(&mut rng);
            let n = d.dim();
            let basis = w_basis(std::slice::from_ref(&d)).unwrap();
            let a = sample_w(&mut rng, n, &basis).unwrap();
            let b = sample_w(&mut rng, n, &basis).unwrap();
            let c = a.scale(s).add_scaled(t, &b).unwrap();
            prop_assert!(in_w(&c, &d, 1e-9).unwrap());
        }

        #[test]
        fn block_sums_pass_sum_detection(seed in any::<u64>(), n1 in 1usize..4, n2 in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let random = |rng: &mut ChaCha8Rng, n: usize| {
                let v = linalg::gaussian_matrix(rng, lie_core::independent_dim(n), 1);
                BracketTensor::from_independent(n, v.as_slice()).unwrap()
            };
            let lambda = random(&mut rng, n1).direct_sum(&random(&mut rng, n2));
            let q = linalg::random_orthogonal(&mut rng, n1 + n2);
            let rotated = lie_core::orthogonal_act(&q, &lambda).unwrap();
            let split = SumSplit::with_basis(n1, n2, q).unwrap();
            prop_assert!(check_sum_detection(&rotated, &split, 1e-9).unwrap());
            let (meet, orbit) = tangent_intersection_rank(&rotated, &split).unwrap();
            prop_assert_eq!(meet, orbit);
        }
    }

    #[test]
    fn joint_w_is_the_intersection() {
        let d1 = diag(&[1.0, 1.0, 2.0, 2.0]);
        let d2 = diag(&[1.0, 2.0, 3.0, 4.0]);
        let joint = w_basis(&[d1.clone(), d2.clone()]).unwrap();
        // Only (e0, e1) -> e2 is graded for both: 1 + 2 = 3 and 1 + 1 = 2.
        assert_eq!(joint.ncols(), 1);
        let lambda = BracketTensor::from_independent(4, joint.column(0).as_slice()).unwrap();
        assert!(lambda.get(0, 1, 2).abs() > 0.5);
        let blocks = joint_blocks(&[d1, d2], GAP_TOL).unwrap();
        assert!(check_detection(&lambda, &blocks, 1e-12).unwrap());
    }
}
