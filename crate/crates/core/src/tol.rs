//! Numerical tolerances, centralized so every module agrees on them.

/// Tolerance ladder used across the crate. `TOL` holds the defaults; the
/// fields exist as one record so tests can refer to the same numbers the
/// implementation uses.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Max entrywise deviation allowed between `m` and its adjoint.
    pub hermiticity: f64,
    /// Max entrywise residual for eigendecomposition round-trips.
    pub reconstruction: f64,
    /// Eigenvalues in `[-psd_clamp, 0)` are treated as zero when taking roots.
    pub psd_clamp: f64,
    /// Max entrywise residual of `sum M^dag M - I` for a Kraus set
    /// (and of `sum F - I` for a POVM).
    pub completeness: f64,
    /// Off-diagonal bound in the pairwise inner-product test for orthogonality.
    pub orthogonality: f64,
    /// Off-diagonal bound on `c^dag c` in the orthogonal-equivalence test.
    pub oe_diagonality: f64,
    /// Max entrywise deviation of a squared frame operator from identity;
    /// a retained frame element beyond this is not unitary and the
    /// decomposition is rejected.
    pub frame_involution: f64,
    /// Weights below this are dropped from the orthogonal decomposition.
    pub alpha_cutoff: f64,
    /// Schmidt coefficients below this are dropped.
    pub schmidt_cutoff: f64,
    /// Allowed deviation of a coefficient vector's squared sum from 1
    /// (entropy input check).
    pub coefficient_norm: f64,
    /// Squared coefficients below this contribute zero entropy.
    pub entropy_floor: f64,
    /// Allowed deviation of a probability distribution's total from 1.
    pub probability: f64,
    /// Branches with probability below this are pruned after a measurement.
    pub branch_prune: f64,
    /// Allowed deviation of a state's norm from 1 where normalization is required.
    pub normalization: f64,
}

/// Default tolerance ladder.
pub const TOL: Tolerances = Tolerances {
    hermiticity: 1e-10,
    reconstruction: 1e-9,
    psd_clamp: 1e-12,
    completeness: 1e-9,
    orthogonality: 1e-9,
    oe_diagonality: 1e-8,
    frame_involution: 1e-8,
    alpha_cutoff: 1e-7,
    schmidt_cutoff: 1e-8,
    coefficient_norm: 1e-9,
    entropy_floor: 1e-15,
    probability: 1e-10,
    branch_prune: 1e-14,
    normalization: 1e-10,
};
