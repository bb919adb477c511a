//! Exact-arithmetic diagnostics for locally analytic operators and algebra
//! actions on p-adic Banach spaces.
//!
//! The crate works over finite orthonormal truncations with precision-tracked
//! `Q_p` arithmetic, and provides:
//!
//! - [`padic`]: truncated scalars (valuation + unit digits) whose operations
//!   never claim more precision than the inputs justify;
//! - [`poly`]: polynomials with Gauss norms and Hensel root lifting;
//! - [`banach`]: truncated spaces, bounded operators, lattice certificates;
//! - [`locan`]: local-analyticity witnesses, contraction degrees, and finite
//!   algebra images in `End(L/p^n L)`;
//! - [`iwasawa`]: commuting group actions, closed-polydisc evaluation, and
//!   the eigenvalue congruence check;
//! - [`mahler`]: Mahler transforms, analyticity levels, analytic vectors,
//!   and the invariant-factoring harness for toy admissible models;
//! - [`pseudorep`]: 2-dimensional trace identities, the odd splitting, the
//!   reducibility ideal, and matrix reconstruction;
//! - [`fixtures`]: seeded deterministic generators for all of the above;
//! - [`json`]: the wire schemas used by the CLI.

pub mod banach;
pub mod fixtures;
pub mod iwasawa;
pub mod json;
pub mod locan;
pub mod mahler;
pub mod padic;
pub mod poly;
pub mod pseudorep;
pub mod residue;

pub use banach::{BoundedOperator, Exactness, ResidueOperator, TruncatedSpace};
pub use padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
pub use poly::PadicPoly;
