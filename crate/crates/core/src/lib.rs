//! Numerical toolkit for finite-dimensional quantum Markov semigroups.
//!
//! The crate works in the σ-weighted non-commutative L_p spaces attached to
//! the stationary state of a primitive Liouvillian and provides:
//!
//! * dense operator primitives and the superoperator exponential ([`operator`]),
//! * weighted norms, power operators and L_p relative entropies ([`lp_space`]),
//! * Lindblad generators and the standard families ([`generators`]),
//! * L_p Dirichlet forms and the spectral gap ([`dirichlet`]),
//! * Log-Sobolev constant estimation and analytic bounds ([`ls_estimator`]),
//! * the h(s) regularity functional and direct regularity checks ([`regularity`]),
//! * distances, evolution and mixing-time bounds ([`mixing`]).
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dirichlet;
pub mod error;
pub mod generators;
pub mod lp_space;
pub mod ls_estimator;
pub mod mixing;
pub mod operator;
pub mod optimize;
pub mod random;
pub mod regularity;

pub use error::{Error, Result};
pub use generators::{DaviesSpec, Family, Flags, Generator};
pub use lp_space::WeightedSpace;
pub use operator::{CMatrix, Hermitian, Superoperator, C64};

pub(crate) mod prelude {
    pub use alloc::format;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    #[cfg(not(feature = "std"))]
    pub use num_traits::Float;
}
