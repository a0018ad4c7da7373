//! Exact rank-metric geometry in matrix rings `M_n(GF(p))`: rank and
//! distance, rational canonical forms and the index, idempotent nests,
//! discrete geodesics, ball factorizations of units, and conjugacy-class
//! coverage in small linear groups.

pub mod ball;
pub mod canonical;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod field;
pub mod geodesic;
pub mod idempotent;
pub mod mat;
pub mod poly;
pub mod rank;
pub mod sample;
pub mod suite;

pub use canonical::{charpoly, companion, index, index_bound_certificate, invariant_factors, rcf, Rcf};
pub use error::{Error, Result};
pub use field::{scalar_arith, FieldSpec, Scalar, ScalarOp};
pub use mat::{diag_factorize, inverse, rref, DiagFactorization, Mat, Rref};
pub use poly::{poly_divmod, poly_roots, Poly};
pub use rank::{dist, dist_to_center, rk, unit_sum_decomposition, RankValue};
