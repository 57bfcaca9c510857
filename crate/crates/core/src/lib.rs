//! Numerics for the fourth Painlevé equation, its Lax pairs and its monodromy data.
//!
//! The crate is organised by subject:
//!
//! * [`algebra`]: matrices of polynomials in `z^{1/3}`, gauge transformations and
//!   a term-by-term formal gauge solver.
//! * [`rank2_moduli`]: the two standard charts of the rank-2 moduli space, local data,
//!   chart normalisation and the reducible-locus predicates.
//! * [`isomonodromy`]: the rank-2 Lax pair, the isomonodromy flow, PIV itself, Riccati
//!   families and an adaptive integrator over complex paths.
//! * [`backlund`]: the order-16 symmetry group, its lifts, the explicit Bäcklund map and
//!   the extra generator coming from the symmetric form.
//! * [`noumi_yamada`]: the symmetric form of PIV, its 3×3 Lax pair, invariant lattices at
//!   infinity and the normal-form check.
//! * [`monodromy`]: Stokes data, topological monodromy, fibre singularities and
//!   invariant flags.
//! * [`cli`]: the `painleve` command-line front-end.

pub mod algebra;
pub mod backlund;
pub mod cli;
mod error;
pub mod fd;
pub mod isomonodromy;
pub mod linalg;
pub mod monodromy;
pub mod noumi_yamada;
pub mod rank2_moduli;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used across the crate.
pub type C64 = Complex64;
