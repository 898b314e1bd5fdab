//! Dynamic control of a quantized reconfigurable intelligent surface (RIS)
//! serving a multi-user MIMO down-link.
//!
//! The crate is organised bottom-up:
//!
//! - [`scene`]: static geometry (base-station array, RIS and wall patches,
//!   coordinate frames) and per-step user snapshots.
//! - [`em`]: surface-susceptibility scattering model of the RIS and wall,
//!   the cascaded BS-to-user channel and power footprints.
//! - [`beamforming`]: zero-forcing weights from the cascaded channel.
//! - [`qos`]: per-user throughput, worst-case throughput and the scalar cost
//!   minimised by the optimizer.
//! - [`ga`]: the memory-enhanced genetic optimizer.
//! - [`scenario`]: trajectories, the multi-step simulation loop and the
//!   baseline variants.
//! - [`config`] and [`cli`]: run configuration and the batch front-end.

pub mod beamforming;
pub mod cli;
pub mod config;
pub mod em;
pub mod error;
pub mod ga;
pub mod linalg;
pub mod qos;
pub mod scenario;
pub mod scene;
pub mod seeds;
pub mod units;

pub use error::{Error, Result};

/// Complex scalar used throughout the field computations.
pub type C64 = num_complex::Complex64;
