//! Guaranteed loop-closure detection from noisy velocity measurements.

pub mod error;
pub mod interval;
pub(crate) mod rmq;
pub mod tube;
pub mod detector;
pub mod contour;
pub mod degree;
pub mod uniqueness;
pub mod mission;
pub mod pipeline;
pub mod selftest;

pub use error::{Error, Result};
pub use interval::{det2, Box2, Interval};
pub use tube::{build_tube, VelocitySample, VelocitySamples, VelocityTube};
