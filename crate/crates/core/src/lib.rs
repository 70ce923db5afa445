//! Naive probabilistic extension of Turing machines.
//!
//! The crate propagates beliefs about a machine's tape and state through its
//! step function under the conditional-independence (naive) rule, evaluates
//! the polynomial semantics of plain proofs that underlies that rule, and
//! learns uncertain tape contents by gradient descent on a smoothed KL loss.
//!
//! * [`simplex`]: distributions, tangent vectors, KL divergence, smoothing.
//! * [`proof`]: plain proofs, naive and standard extensions, derivative kets.
//! * [`machine`], [`belief`], [`standard`]: deterministic and naive stepping,
//!   plus the exact enumeration oracle.
//! * [`strstep`]: the string-configuration form of the naive step.
//! * [`synthesis`]: losses, gradients, descent, flow fields, causality reports.
//! * [`fixtures`]: the shift machine and causality instance.

pub mod belief;
pub mod error;
pub mod fixtures;
pub mod machine;
pub mod proof;
pub mod scalar;
pub mod simplex;
pub mod standard;
pub mod strstep;
pub mod synthesis;

pub use belief::{naive_run, naive_step, support_window, ConfigBelief, TapeBelief};
pub use error::{Error, Result};
pub use machine::{DiscreteConfig, Move, Rule, Transition, TuringMachine};
pub use proof::{ComponentwiseProof, Multiplicities, PlainProof, Slot};
pub use scalar::{Dual, Scalar};
pub use simplex::{
    basis_tangent, clip_to_simplex, kl_divergence, project_to_affine_tangent, smooth_mu, Distribution, SymbolSet,
    TangentVector,
};
pub use standard::{standard_run, StandardOutcome};
pub use strstep::{marginal_left, marginal_right, naive_strstep, patch, StrConfigBelief, StringDistribution};
