//! Exact one-point densities of determinantal planar Coulomb gases.
//!
//! The ensemble is n points in the plane with joint density proportional to
//! `prod |z_i - z_j|^2 * prod exp(-n Q(z_j))` for an external potential Q.
//! Every correlation function is a determinant of one kernel K_n, and the
//! one-point density R_n(z) = K_n(z,z) is computable exactly from the norms
//! of monomials in the weighted polynomial space. This crate computes those
//! densities, the boundary geometry of the equilibrium droplet, the
//! square-root-of-n edge correction coefficient C(z_0; t), and the
//! expectation-of-fluctuations functional rho_half, together with the
//! convergence studies that compare exact finite-n densities against the
//! edge expansion.
//!
//! Module map:
//! - [`specfun`]: erfc and friends, log-scale arithmetic, stable sums.
//! - [`quad`]: adaptive Gauss-Kronrod quadrature, Gauss-Legendre nodes.
//! - [`potential`]: admissible potentials, droplet radius, edge geometry.
//! - [`geometry`]: curvature, normal-coordinate identities, Jacobians.
//! - [`opkernel`]: weighted-monomial norms and exact kernel diagonals.
//! - [`edge`]: the edge expansion and residual-decay studies.
//! - [`fluct`]: linear-statistics fluctuation functionals.
//!
//! All computations are deterministic; with the default `parallel` feature
//! the embarrassingly parallel grids fan out over rayon but results are
//! assembled in grid order, so outputs are identical with and without it.

// Coefficient tables and frozen references keep their published digits, and
// the `!(x > 0.0)` guard style must stay: it rejects NaN where `x <= 0.0`
// would let it through.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod edge;
pub mod fluct;
pub mod geometry;
pub mod opkernel;
pub mod potential;
pub mod quad;
pub mod specfun;

/// Error type shared by every module.
///
/// The variants mirror how failures are reported downstream: `Domain` and
/// `Misuse` are caller errors, `Numeric` is a convergence or overflow
/// failure inside a kernel, and `Validation` is a self-check (oracle gate,
/// consistency test) that refused to trust a result.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric kernel failed to converge or overflowed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// API misuse, e.g. mixing a basis with the wrong potential.
    #[error("misuse: {0}")]
    Misuse(String),

    /// A construction-time self-check or oracle gate failed.
    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
