//! Tracking engine for polygon-based multi-object tracking and segmentation.
//!
//! The pipeline sits downstream of a center-point detector: every object is a
//! fixed-size bounding polygon with a center, a pseudo-depth and a tracking
//! offset pointing at its position in the previous frame. Tracks are
//! associated greedily on those offsets, and a per-track Unscented Kalman
//! Filter keeps unmatched (frozen) tracks moving along their trajectory.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The concrete
//! aliases below fix the scalar for the common cases; the simulator, metrics
//! and file formats work in `f64`.

// Validation is written as `!(x > 0)` so that NaN is rejected too; matrix
// code indexes by row and column on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod heatmap;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod scalar;
pub mod simulator;
pub mod tracker;
pub mod ukf;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point2f64 = geometry::Point2<f64>;
pub type Point2f32 = geometry::Point2<f32>;
pub type Polygon64 = geometry::Polygon<f64>;
pub type Polygon32 = geometry::Polygon<f32>;
pub type Heatmap64 = heatmap::Heatmap<f64>;
pub type Heatmap32 = heatmap::Heatmap<f32>;
pub type FilterState64 = ukf::FilterState<f64>;
pub type FilterState32 = ukf::FilterState<f32>;
pub type UkfParams64 = ukf::UkfParams<f64>;
pub type UkfParams32 = ukf::UkfParams<f32>;
pub type Detection64 = tracker::Detection<f64>;
pub type Detection32 = tracker::Detection<f32>;
pub type Track64 = tracker::Track<f64>;
pub type Track32 = tracker::Track<f32>;
pub type TrackerConfig64 = tracker::TrackerConfig<f64>;
pub type TrackerConfig32 = tracker::TrackerConfig<f32>;
pub type Tracker64 = tracker::Tracker<f64>;
pub type Tracker32 = tracker::Tracker<f32>;
pub type DenseMap64 = losses::DenseMap<f64>;
pub type DenseMap32 = losses::DenseMap<f32>;
