//! Cascaded buffered-IoU (C-BIoU) multi-object tracking.
//!
//! Appearance-free tracker that associates detections to tracks with a
//! buffered IoU in two rounds of increasing buffer scale, plus a small
//! linear motion model, MOT-style evaluation (HOTA, MOTA, IDF1) and a
//! seeded synthetic benchmark.

pub mod assignment;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod metrics;
pub mod mot_io;
pub mod motion;
pub mod synth;
pub mod tracker;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{BoundingBox, CornerBox, SimilarityKind};
pub use tracker::{Detection, DetectionSequence, FrameOutput, TrackRecord, Tracker, TrackerConfig, Variant};
