//! Radial shooting solver for the singular quasilinear problem
//!
//! ```text
//! -Δ_p u = λ (u^(-δ) + u^q + f(u)) + μ   in B_R ⊂ R^N,   u = 0 on ∂B_R,   u > 0,
//! ```
//!
//! together with its regularization `u^(-δ) -> (u + ε)^(-δ)` and a set of
//! numerical checks for the qualitative properties of its solutions.
//!
//! The crate is organised bottom-up:
//!
//! - [`problem`]: parameters, the nonlinearity `g`, hypothesis (H), the
//!   nonexistence constant `k`.
//! - [`radial`]: the radial ODE, its series start and adaptive integration.
//! - [`shooting`]: the Dirichlet problem by shooting on `u(0)`, and the first
//!   eigenpair of `-Δ_p`.
//! - [`continuation`]: `ε -> 0` paths, `λ` sweeps and `μ` probes.
//! - [`verify`]: weak residuals, cone and Hardy bounds, ordering, Picone,
//!   monotone-operator and blow-up checks.
//!
//! The guide under `book/` walks through the same material with runnable
//! snippets; those snippets are compiled as doctests of this crate.

// `!(a < b)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
mod ode;
pub mod problem;
pub mod profile;
pub mod quadrature;
pub mod radial;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use problem::{FSpec, Monomial, ProblemParams};
pub use profile::{RadialProfile, Termination};
pub use radial::IntegratorControl;
pub use shooting::EigenPair;
pub use verify::VerificationReport;

// Every rust block of the guide runs as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem.md")]
    mod problem {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/shooting.md")]
    mod shooting {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
