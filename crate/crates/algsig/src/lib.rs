//! Quasi-interpolation by neural-network operators built on the algebraic
//! sigmoid `φ(x) = x/(1 + x^{2m})^{1/(2m)}`, with Caputo fractional
//! derivatives and numerically checked error estimates.
//!
//! - [`activation`]: the sigmoid and its bell density `Φ`.
//! - [`density`]: partition-of-unity sums, tails, the interval denominator.
//! - [`vector`], [`registry`]: vector-valued functions, norms, moduli of
//!   continuity and the builtin test functions.
//! - [`operators`]: `A_n`, `A_n*` and the whole-line `Ā_n`.
//! - [`fractional`]: left, right and iterated Caputo derivatives.
//! - [`certify`], [`rate`]: bound reports and convergence-rate fits.
//!
//! ```
//! use algsig::activation::SigmoidParams;
//! use algsig::density::OperatorConfig;
//! use algsig::operators::a_n_deviation;
//! use algsig::registry::builtin;
//! use algsig::vector::NormKind;
//!
//! let cfg = OperatorConfig::new(-1.0, 1.0, 512, SigmoidParams::new(2).unwrap()).unwrap();
//! let err = a_n_deviation(builtin("runge").unwrap().as_ref(), 0.2, &cfg).unwrap();
//! assert!(err.norm(NormKind::Euclidean) < 1e-2);
//! ```

// Reference constants are kept at the digits they were generated with; `!(x < y)` tests are NaN guards.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod certify;
pub mod density;
pub mod error;
pub mod fractional;
pub mod operators;
pub mod quadrature;
pub mod rate;
pub mod registry;
pub mod summation;
pub mod vector;

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/activation.md")]
    mod activation {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/fractional.md")]
    mod fractional {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
