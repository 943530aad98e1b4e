//! Upper bounds on maximum-likelihood decoding error probability of binary
//! linear code ensembles transmitted over parallel MBIOS channels.
//!
//! The crate computes DS2 bounds with optimized tilting measures, the 1961
//! Gallager bound with optimized tilting functions, exact ensemble weight
//! enumerators of repeat-accumulate and turbo ensembles, and inner bounds on
//! attainable channel regions. It is `no_std` with `alloc`; IO and the command
//! line live in the companion `parbound` crate.

#![no_std]
// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod ds2;
pub mod error;
pub mod g61;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod regions;
pub mod special;
pub mod spectra;

pub use channel::{DensityTable, MbiosChannel, ParallelChannelSet, ParallelDensities};
pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;
pub use spectra::{DistanceSpectrum, Iowe, SpectralExponent, Weighting};
