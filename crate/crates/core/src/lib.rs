//! Malliavin calculus on Brownian path signatures.
//!
//! Functionals of a Brownian path are represented as linear functionals on its
//! time-augmented signature. Letter `0` is time, letters `1..=d` are the Brownian
//! components. Malliavin derivatives, Skorokhod integrals, the Ornstein-Uhlenbeck
//! semigroup and Greeks weights all reduce to algebra on finite tensor polynomials.
//!
//! ```
//! use sigmal::brownian::MCConfig;
//! use sigmal::greeks::{closed_form_weight, run_delta, DeltaProblem, Estimator, ModelSpec, Payoff, Truncation, WeightKind};
//! use sigmal::tensor_algebra::{TensorPoly, Word};
//!
//! let sigma = TensorPoly::from_terms(2, [(Word::empty(), 0.25), (Word::letter(1), 0.04)])?;
//! let model = ModelSpec::new(sigma, -0.9, 100.0)?;
//! let w = closed_form_weight(&model, WeightKind::H4, 3, Truncation::Strict)?;
//! let problem = DeltaProblem::european(&model, Payoff::Digital { strike: 100.0 }, 3);
//! let cfg = MCConfig::new(500, 50, 1.0, 7)?;
//! let res = run_delta(&problem, &[Estimator::Malliavin(w), Estimator::FiniteDifference { eps: 0.01 }], &cfg)?;
//! assert!(res[0].consistent_with(&res[1], 4.0));
//! # Ok::<(), sigmal::SigError>(())
//! ```

pub mod brownian;
pub mod error;
pub mod greeks;
pub mod malliavin;
pub mod path_signature;
pub mod scalar;
pub mod sig_operators;
pub mod tensor_algebra;
pub mod validation;

pub use error::{Result, SigError};
pub use scalar::{Real, Scalar};
pub use tensor_algebra::{GroupTensor, TensorPoly, Word};

/// Double precision tensor polynomial.
pub type Poly = TensorPoly<f64>;
/// Single precision tensor polynomial.
pub type Poly32 = TensorPoly<f32>;
/// Double precision truncated group element.
pub type Sig = GroupTensor<f64>;
/// Single precision truncated group element.
pub type Sig32 = GroupTensor<f32>;
/// Double precision coefficient vector, one polynomial per Brownian letter.
pub type Coeffs = sig_operators::CoeffVector<f64>;
