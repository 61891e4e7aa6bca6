//! Numerical laboratory for the sublinear fractional heat equation
//!
//! ```text
//! u_t + (-Δ)^s u = q(x) |u|^{α-1} u   in (0,T) × Ω,
//! u = 0 in (0,T) × (ℝ^N ∖ Ω),   u = 0 at t = 0,
//! ```
//!
//! built around an explicit sub/supersolution pair. For `α ∈ (0,1)` the
//! monotone iteration started from the subsolution `θ(t)ψ(x)` converges to a
//! nontrivial solution with zero data, next to the trivial one; for `α ≥ 1`
//! the energy (Grönwall) argument forces the zero solution.
//!
//! Layers, bottom up:
//!
//! * [`specfun`]: Γ, B, ψ, `₂F₁` on `[0,1]`, `c_{N,s}`, `κ`.
//! * [`quadrature`]: Gauss–Legendre and adaptive Gauss–Kronrod rules.
//! * [`bump`]: the barrier `ψ_{x₀,R} = (R² - |x-x₀|²)₊^p`, its fractional
//!   Laplacian (closed form and singular quadrature), the ratio bound and the
//!   time profile `θ`.
//! * [`discretization`]: the dense 1-D nonlocal operator with zero exterior
//!   data, an M-matrix by construction.
//! * [`stationary`]: the Lane–Emden supersolution (energy minimiser and an
//!   independent fixed-point solver).
//! * [`parabolic`]: backward Euler, monotone iteration, time shifts and the
//!   uniqueness experiment.
//!
//! The guide under `book/` walks through the same material; its code blocks
//! are compiled and run as doctests of this crate.

pub mod bump;
pub mod discretization;
pub mod error;
pub mod parabolic;
pub mod quadrature;
pub mod specfun;
pub mod stationary;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/bump.md")]
    mod bump {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/lane-emden.md")]
    mod lane_emden {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/uniqueness.md")]
    mod uniqueness {}
}
