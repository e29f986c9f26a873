//! Desk-scale laboratory for beam-hardening metal artifacts in parallel-beam CT.
//!
//! The crate synthesizes polychromatic sinograms for phantoms with metal inclusions,
//! reconstructs them by filtered back-projection, predicts where streaks must appear
//! from the inclusion geometry, and measures streak strength as an empirical
//! singularity order.

pub mod beamhardening;
pub mod geometry;
pub mod model;
pub mod specfilter;
pub mod streaks;
pub mod xray;

mod fftutil;

pub use model::{Error, Result};
