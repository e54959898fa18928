//! Disclosure mappings under perfect sample privacy.
//!
//! A curator holds a dataset `X^n = (X_1, ..., X_n)` correlated with a latent
//! feature `W` and wants to release `Y` that is as informative about `W` as
//! possible while `Y` stays statistically independent of every individual
//! sample `X_i`. Pairwise independence does not imply joint independence, so
//! `Y` can still carry collective ("synergistic") information about the data.
//!
//! The crate computes:
//!
//! * the optimal mapping and its value `I_s(W, X^n)` through vertex
//!   enumeration of the admissible polytope followed by a linear program
//!   ([`engine::solve_capacity`]),
//! * closed forms for two binary samples and modular constructions
//!   ([`closed_form`]),
//! * private information, the zero-leakage endpoints `C_1(0)`/`C_2(0)` and
//!   finite-`n` capacity scans ([`asymptotics`]),
//! * low-complexity windowed and uniformizer heuristics ([`heuristics`]),
//! * independent checks: privacy residuals, exact-rational vertices and a
//!   brute-force capacity ([`oracle`]).
//!
//! All information quantities are in bits. The crate is `no_std` and only
//! needs `alloc`; the `std` feature enables `std` in the dependencies and
//! `parallel` spreads vertex enumeration over a rayon pool.
//!
//! ```
//! use sampleprivacy_core::{closed_form, engine};
//!
//! // W = X1 xor X2 over two fair coins: one full bit can be released.
//! let (scenario, _) = closed_form::modular_sum_construct(2, 1).unwrap();
//! let report = engine::solve_capacity(&scenario, None, engine::DEFAULT_CAP).unwrap();
//! assert!((report.capacity - 1.0).abs() < 1e-9);
//! ```
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
mod linalg;
mod math;

pub mod asymptotics;
pub mod closed_form;
pub mod engine;
pub mod geometry;
pub mod heuristics;
pub mod oracle;
pub mod prob;
pub mod simplex;

pub use error::{Error, Result};
pub use prob::{Channel, DiscreteScenario, Pmf};
