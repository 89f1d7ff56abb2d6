//! Commutator norm bounds for tuples of real skew-symmetric matrices.
//!
//! For skew-symmetric `B_1, …, B_m` of order `n ≥ 3`,
//!
//! ```text
//! Σ_{r,s} ‖[B_r, B_s]‖² ≤ d(n) · (Σ_r ‖B_r‖²)²,   d(3) = 1/3,  d(n ≥ 4) = 2/3,
//! ```
//!
//! with equality exactly on the orbits of the `so(3)` triple (`n = 3`) and the
//! quaternion triple embedded in the leading 4×4 block (`n ≥ 4`).
//!
//! The crate is organised bottom-up:
//!
//! * [`skew`]: skew matrices, tuples, the ordered standard basis of `o(n)` and the
//!   `O(n) × O(m)` action.
//! * [`canonical`]: block-diagonal canonical forms, the complex diagonalisation used
//!   by the pairwise bound, orthogonal factor recovery and λ-vector bounds.
//! * [`compound`]: second compound matrices and commutator Gram matrices.
//! * [`inequality`]: the bound itself, equality canonicalisation and the simplex
//!   quadratic form attached to an orthonormal basis of `o(n)`.
//! * [`optimize`]: simplex maximisation, KKT certificates and the sharpness search.
//! * [`submersion`]: pointwise curvature of Riemannian submersions with totally
//!   geodesic fibres and the equality models.

pub mod canonical;
pub mod compound;
mod error;
pub mod forms;
pub mod inequality;
pub mod jacobi;
pub mod optimize;
pub mod random;
pub mod skew;
pub mod submersion;

pub use error::{Error, Result};
pub use skew::{PairIndex, SkewMatrix, SkewTuple};
