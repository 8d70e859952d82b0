//! Exact moments and joint cumulants of products of centered, jointly
//! Gaussian random variables.
//!
//! Results are [`Poly`] values: integer-coefficient polynomials in the
//! covariance symbols `V[i,j]`. The main entry points are
//! [`moments::moment_memoized`] for `E(X_i1 ... X_in)` and
//! [`CumulantEngine::cumulant`] for joint cumulants of products such as
//! `X_3, X_1 X_3, X_1 X_2 X_3`.
//!
//! ```
//! use gauss_cumulants::{CumulantEngine, CumulantQuery};
//!
//! let q = CumulantQuery::from_slices(&[&[1, 2], &[3, 4]]).unwrap();
//! let k = CumulantEngine::default().cumulant(&q).unwrap();
//! assert_eq!(k.to_string(), "V[1,3]*V[2,4] + V[1,4]*V[2,3]");
//! ```

pub mod combinat;
pub mod cumulants;
mod error;
pub mod evalnum;
pub mod moments;
pub mod polyalg;

/// One-based label of a Gaussian variable.
pub type Index = u32;

pub use cumulants::{
    apply_mixed_rules, cumulant_doublets_direct, moments_to_cumulants_structural_check, CumulantEngine,
    CumulantQuery, EngineConfig, Group, MixedRule, UnitCoefficientCheck,
};
pub use error::Error;
pub use evalnum::{eval_numeric, mc_estimate_cumulant, CovMatrix, CovMatrixFile, McConfig, McEstimate};
pub use moments::{moment, moment_memoized, IndexList, MomentCache};
pub use polyalg::{CovSymbol, Monomial, Poly};
