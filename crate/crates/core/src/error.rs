use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("structure constants are not antisymmetric at ({i}, {j}, {k}): deviation {deviation:e}")]
    NotAntisymmetric {
        i: usize,
        j: usize,
        k: usize,
        deviation: f64,
    },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("Jacobi identity violated: residual {residual:e} exceeds {tol:e}")]
    JacobiViolation { residual: f64, tol: f64 },

    #[error("not nilpotent: lower central series stabilizes at dimension {stable_dim}")]
    NotNilpotent { stable_dim: usize },

    #[error("matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("tensor is not unit norm (norm {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("generators are not orthonormal: Gram deviation {deviation:e}")]
    NonOrthonormalBasis { deviation: f64 },

    #[error("not a sum of ideals: {component} has norm {norm:e}")]
    NotAnIdealSum { component: &'static str, norm: f64 },

    #[error("bracket is not in the compatible subspace W: residual {residual:e}")]
    NotInW { residual: f64 },

    #[error("derivations do not commute: commutator norm {norm:e}")]
    NonCommuting { norm: f64 },

    #[error("span is not a theta-stable subalgebra: {reason} residual {residual:e}")]
    NotThetaStable { reason: &'static str, residual: f64 },

    #[error("matrix does not lie in the subalgebra span: residual {residual:e}")]
    NotInSubalgebra { residual: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid split: {dim_1} + {dim_2} != {dim}")]
    InvalidSplit { dim_1: usize, dim_2: usize, dim: usize },

    #[error("{0}")]
    Parse(String),
}
