//! Numerical toolkit for flag multipliers on the Heisenberg group `ℍⁿ`.
//!
//! A flag multiplier `K̂(w, λ)` is fibered over the central frequency `λ`; each
//! fiber is realized as a Kohn–Nirenberg quantized operator on a discretized
//! `L²(ℝⁿ)`, inverted there, and the inverse multiplier is reassembled from the
//! fiber symbols. The modules follow that pipeline:
//!
//! - [`group`]: group law, dilations, homogeneous norm.
//! - [`grid`], [`transform`]: sampled fields, Fourier transforms, twisted convolution.
//! - [`schrodinger`]: the Schrödinger representation and its integrated form.
//! - [`spectrum`], [`symbolcalc`]: multipliers, fiber symbols, quantization, seminorm reports.
//! - [`inversion`]: fiberwise inversion and reconstruction of the inverse multiplier.
//! - [`io`]: on-disk containers.
//!
//! All numerics are generic over [`Real`]; the `*64` aliases below fix `f64`.

pub mod error;
pub mod expr;
pub mod grid;
pub mod group;
pub mod inversion;
pub mod io;
pub mod jet;
pub mod linalg;
pub mod scalar;
pub mod schrodinger;
pub mod spectrum;
pub mod symbolcalc;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GroupPoint64 = group::GroupPoint<f64>;
pub type Grid64 = grid::Grid<f64>;
pub type SampledField64 = transform::SampledField<f64>;
pub type LineGrid64 = schrodinger::LineGrid<f64>;
pub type StateVector64 = schrodinger::StateVector<f64>;
pub type FiberOperator64 = schrodinger::FiberOperator<f64>;
pub type SymbolGrid64 = symbolcalc::SymbolGrid<f64>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type InversionResult64 = inversion::InversionResult<f64>;
