//! Line-of-sight LEO multiuser MIMO downlink simulator.
//!
//! The crate models a satellite array serving ground users whose channels are
//! Vandermonde steering vectors in spatial frequency and Doppler. It provides
//! zero-forcing (ZF) and space-time adaptive beamforming (STAB) rates, the
//! crowding analysis that predicts when ZF collapses, eigenvalue bounds for
//! crowded clusters, and the space-Doppler scheduler (SDS) that restores
//! near-orthogonality by user selection.

pub mod channel;
pub mod crowding;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod precoding;
pub mod rng;
pub mod scheduler;
pub mod spectral;

pub use error::{Error, Result};
