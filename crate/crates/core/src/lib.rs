//! Mellin-type approximation operators with values in a vector lattice.
//!
//! The operators act on compactly supported signals `f : (0, ∞) → X` by
//! convolution against the Haar measure `dt/t`:
//!
//! ```text
//! (T_n f)(s) = ∫_0^∞ L_n(t/s) Υ_n(f(t)) dt/t
//! ```
//!
//! where `L_n` is one of the kernel families in [`kernels`] and `Υ_n` a
//! pointwise map from [`nonlinearity`]. The [`modular`] module measures
//! convergence in Orlicz modulars `ρ(f) = ∫ |f|^q dt/t`, and [`singularity`]
//! checks the conditions under which `T_n f → f`.

pub mod cli;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod modular;
pub mod nonlinearity;
pub mod operators;
pub mod quadrature;
pub mod signal;
pub mod singularity;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelFamily};
pub use lattice::{LatticeValue, OrderUnit, Shape};
pub use nonlinearity::{UpsilonKind, UpsilonMap};
pub use quadrature::{LogInterval, QuadratureConfig};
pub use signal::{LatticeFunction, Signal};
