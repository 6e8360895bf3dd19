//! Degrees-of-freedom laboratory for the K-user MISO broadcast channel with
//! imperfect current CSIT (error variance `P^-α`) and perfect delayed CSIT.
//!
//! * [`dofcalc`] exact DoF accounting and validation of declarative schemes
//! * [`schemes`] builders for the X1–X5 schemes and the MAT/ZF/TDMA
//!   baselines, plus a numeric executor
//! * [`region`] DoF regions as α-parameterized polytopes
//! * [`sim`] Monte Carlo sweeps and slope regression
//! * [`channel`], [`beamform`] channel sampling and precoders

pub mod alpha;
pub mod beamform;
pub mod channel;
pub mod dofcalc;
pub mod error;
pub mod region;
pub mod schemes;
pub mod sim;

pub use alpha::{AffineAlpha, PolyAlpha, Rational};
pub use error::{Error, Result};
