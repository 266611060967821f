//! Merge-error detection for 3D image segmentations.
//!
//! The pipeline operates on binary occupancy masks of segmented objects:
//! training data is synthesized by fusing adjacent objects, a small
//! convolutional classifier is trained on fixed-size mask windows, and
//! inference produces per-object merge-probability heatmaps with
//! thresholded flagging. A 2D variant runs the same machinery on chained
//! digit images.
//!
//! Modules:
//! - [`volume`]: label grids, per-object masks, anisotropic max-pool
//!   downsampling, window extraction, point sampling, heatmap interpolation.
//! - [`synth`]: artificial merges, chained-digit images, procedural tube
//!   volumes, balanced example assembly.
//! - [`net`]: the convolutional classifier with its own forward/backward
//!   passes, SGD training, and finite-difference gradient verification.
//! - [`detect`]: the inference pipeline, evaluation metrics, window-size
//!   sweep, and throughput benchmark.
//! - [`io`]: bit-exact file formats for volumes, datasets, checkpoints,
//!   and IDX image ingestion.

pub mod detect;
pub mod io;
pub mod net;
mod rng;
pub mod synth;
pub mod volume;
