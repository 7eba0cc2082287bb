//! SSVEP-driven robot teleoperation at desk scale.
//!
//! The crate covers the whole decode → photogrammetry → navigate loop:
//!
//! - [`signal`]: the 9-channel EEG data model, a seeded synthetic SSVEP
//!   generator, the 9–100 Hz Butterworth bandpass and the `SSVEP1` file format.
//! - [`scu`]: a from-scratch 1D convolutional classifier (conv → batch norm →
//!   ReLU → max-pool → dropout → dense → softmax) trained with Adam.
//! - [`metrics`]: accuracy, confusion matrices and information transfer rate.
//! - [`geometry`]: monocular distance and bearing estimation from a bounding box.
//! - [`simworld`]: 2D world, surrogate detector, robot kinematics and the
//!   alternating object/arrow navigation state machine.
//! - [`session`]: calibration, closed-loop experiments, logs and the operator
//!   console service.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the concrete instantiations used by the pipeline and the tests.

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod num;
pub mod scu;
pub mod session;
pub mod signal;
pub mod simworld;

pub use error::{Error, Result};
pub use num::Scalar;

/// Epoch in single precision; the on-disk dataset format stores `f32`.
pub type EegEpoch32 = signal::EegEpoch<f32>;
/// Epoch in double precision, used by the gradient check.
pub type EegEpoch64 = signal::EegEpoch<f64>;
pub type SsvepDataset32 = signal::SsvepDataset<f32>;
pub type SsvepDataset64 = signal::SsvepDataset<f64>;
pub type FilterSpec32 = signal::FilterSpec<f32>;
pub type FilterSpec64 = signal::FilterSpec<f64>;
pub type CameraModel64 = geometry::CameraModel<f64>;
pub type BoundingBox64 = geometry::BoundingBox<f64>;
pub type RobotPose64 = simworld::RobotPose<f64>;
/// Classifier used by calibration and online sessions.
pub type ScuModel32 = scu::ScuModel<f32>;
pub type ScuModel64 = scu::ScuModel<f64>;
