//! Volumetric data model: label grids, per-object binary masks, anisotropic
//! max-pool downsampling, window extraction, point sampling, and heatmap
//! interpolation.
//!
//! All types are immutable after construction and all operations are pure
//! functions, so they are safe to call from any number of threads.
//!
//! Conventions used throughout the crate:
//! - voxel data is stored x-fastest: linear index `(z * ny + y) * nx + x`;
//! - label `0` is reserved for background;
//! - 2D data is represented as depth-1 volumes.

use std::error::Error;
use std::fmt;

use rayon::prelude::*;

use crate::rng::{rng_from_seed, uniform_usize};

// ── Errors ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VolumeError {
    /// The requested label does not occur in the grid.
    UnknownLabel(u32),
    /// Label 0 is background, not an object.
    BackgroundLabel,
    /// A window center must lie on mask foreground.
    CenterOffObject(Point),
    /// The mask has no foreground voxels.
    EmptyMask,
    /// Points and predictions must pair up one-to-one.
    LengthMismatch { points: usize, preds: usize },
    /// Interpolation needs at least one sample point.
    EmptyPointSet,
}

impl fmt::Display for VolumeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeError::UnknownLabel(label) => write!(f, "label {label} not present in grid"),
            VolumeError::BackgroundLabel => write!(f, "label 0 is reserved for background"),
            VolumeError::CenterOffObject(p) => {
                write!(f, "window center ({}, {}, {}) is not on foreground", p.x, p.y, p.z)
            }
            VolumeError::EmptyMask => write!(f, "mask has no foreground voxels"),
            VolumeError::LengthMismatch { points, preds } => {
                write!(f, "{points} points but {preds} predictions")
            }
            VolumeError::EmptyPointSet => write!(f, "need at least one sample point"),
        }
    }
}

impl Error for VolumeError {}

// ── Domain types ─────────────────────────────────────────────────────────

/// Dense 3D grid of unsigned object labels; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    dims: [usize; 3],
    labels: Vec<u32>,
}

impl LabelGrid {
    /// Build a grid from dims `(nx, ny, nz)` and an x-fastest label array.
    pub fn new(dims: [usize; 3], labels: Vec<u32>) -> Self {
        assert!(dims.iter().all(|&d| d >= 1), "grid dims must be >= 1");
        assert_eq!(
            labels.len(),
            dims[0] * dims[1] * dims[2],
            "label array length must be nx*ny*nz"
        );
        Self { dims, labels }
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        let len = dims[0] * dims[1] * dims[2];
        Self::new(dims, vec![0; len])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, label: u32) {
        let i = self.index(x, y, z);
        self.labels[i] = label;
    }

    /// Replace every voxel of `from` with `to`.
    pub fn relabel(&mut self, from: u32, to: u32) {
        for v in &mut self.labels {
            if *v == from {
                *v = to;
            }
        }
    }

    /// Distinct nonzero labels with their voxel counts, ascending by label.
    pub fn object_sizes(&self) -> Vec<(u32, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for &v in &self.labels {
            if v != 0 {
                *counts.entry(v).or_insert(0usize) += 1;
            }
        }
        counts.into_iter().collect()
    }
}

/// Per-object binary occupancy grid, cropped to a bounding box at `origin`
/// within its parent grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    dims: [usize; 3],
    origin: [usize; 3],
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(dims: [usize; 3], origin: [usize; 3], bits: Vec<u8>) -> Self {
        assert!(dims.iter().all(|&d| d >= 1), "mask dims must be >= 1");
        assert_eq!(bits.len(), dims[0] * dims[1] * dims[2]);
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { dims, origin, bits }
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        let len = dims[0] * dims[1] * dims[2];
        Self::new(dims, [0, 0, 0], vec![0; len])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> [usize; 3] {
        self.origin
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.index(x, y, z)] != 0
    }

    /// Like `get`, but signed coordinates; out-of-bounds reads as background.
    #[inline]
    pub fn get_padded(&self, x: i64, y: i64, z: i64) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return false;
        }
        self.get(x, y, z)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, on: bool) {
        let i = self.index(x, y, z);
        self.bits[i] = on as u8;
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Foreground voxel coordinates in x-fastest order.
    pub fn foreground_points(&self) -> Vec<Point> {
        let [nx, ny, _] = self.dims;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| Point {
                x: i % nx,
                y: (i / nx) % ny,
                z: i / (nx * ny),
            })
            .collect()
    }
}

/// Integer reduction factors per axis for max-pool downsampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DownsampleRatio {
    pub rx: usize,
    pub ry: usize,
    pub rz: usize,
}

impl DownsampleRatio {
    /// Preset compensating mild anisotropy.
    pub const R10_10_2: Self = Self { rx: 10, ry: 10, rz: 2 };
    /// Preset compensating strong anisotropy.
    pub const R25_25_5: Self = Self { rx: 25, ry: 25, rz: 5 };

    pub fn new(rx: usize, ry: usize, rz: usize) -> Self {
        assert!(rx >= 1 && ry >= 1 && rz >= 1, "downsample factors must be >= 1");
        Self { rx, ry, rz }
    }
}

/// Window extents per axis. The center voxel is at index `floor(extent / 2)`
/// on each axis, a single convention covering odd and even widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub w: usize,
    pub h: usize,
    pub d: usize,
}

impl WindowSpec {
    /// The standard 3D input window.
    pub const CUBE_51: Self = Self { w: 51, h: 51, d: 51 };

    pub fn new(w: usize, h: usize, d: usize) -> Self {
        assert!(w >= 1 && h >= 1 && d >= 1, "window extents must be >= 1");
        Self { w, h, d }
    }

    pub fn cube(side: usize) -> Self {
        Self::new(side, side, side)
    }

    /// Depth-1 window for 2D inputs.
    pub fn square(side: usize) -> Self {
        Self::new(side, side, 1)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.w, self.h, self.d]
    }

    pub fn center_offset(&self) -> [usize; 3] {
        [self.w / 2, self.h / 2, self.d / 2]
    }

    pub fn volume(&self) -> usize {
        self.w * self.h * self.d
    }

    pub fn is_2d(&self) -> bool {
        self.d == 1
    }
}

/// Voxel coordinates within a mask (downsampled object space in the
/// detection pipeline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    // Field order gives derived Ord the x-fastest sort: z, then y, then x.
    pub z: usize,
    pub y: usize,
    pub x: usize,
}

impl Point {
    pub fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    /// Squared Euclidean distance, exact in integer arithmetic.
    pub fn distance_sq(&self, other: &Point) -> u64 {
        let d = |a: usize, b: usize| {
            let d = a.abs_diff(b) as u64;
            d * d
        };
        d(self.x, other.x) + d(self.y, other.y) + d(self.z, other.z)
    }
}

/// Fixed-size dense binary block extracted around a query point; the sole
/// classifier input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    dims: [usize; 3],
    values: Vec<u8>,
}

impl Window {
    pub fn new(dims: [usize; 3], values: Vec<u8>) -> Self {
        assert_eq!(values.len(), dims[0] * dims[1] * dims[2]);
        debug_assert!(values.iter().all(|&v| v <= 1));
        Self { dims, values }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.values[(z * self.dims[1] + y) * self.dims[0] + x] != 0
    }
}

/// Per-voxel merge probability over one object's foreground.
///
/// Values are stored dense over the mask bounding box; background voxels
/// carry the sentinel `-1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    mask: BinaryMask,
    values: Vec<f32>,
}

pub const PROB_BACKGROUND: f32 = -1.0;

impl ProbabilityMap {
    pub fn new(mask: BinaryMask, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), mask.bits().len());
        Self { mask, values }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Dense values over the mask bounding box, `-1.0` on background.
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<f32> {
        if self.mask.get(x, y, z) {
            Some(self.values[self.mask.index(x, y, z)])
        } else {
            None
        }
    }

    /// Maximum probability over foreground; `None` for an empty mask.
    pub fn max_value(&self) -> Option<f32> {
        self.mask
            .bits()
            .iter()
            .zip(&self.values)
            .filter(|(&b, _)| b != 0)
            .map(|(_, &v)| v)
            .fold(None, |acc, v| Some(acc.map_or(v, |m: f32| m.max(v))))
    }

    /// Number of foreground voxels whose value strictly exceeds `threshold`.
    pub fn count_above(&self, threshold: f32) -> usize {
        self.mask
            .bits()
            .iter()
            .zip(&self.values)
            .filter(|(&b, &v)| b != 0 && v > threshold)
            .count()
    }
}

// ── Operations ───────────────────────────────────────────────────────────

/// Isolate one object of the segmentation as a mask cropped to its tight
/// bounding box, with the box offset recorded as the mask origin.
pub fn extract_object(grid: &LabelGrid, label: u32) -> Result<BinaryMask, VolumeError> {
    if label == 0 {
        return Err(VolumeError::BackgroundLabel);
    }
    let [nx, ny, nz] = grid.dims();
    let mut min = [usize::MAX; 3];
    let mut max = [0usize; 3];
    let mut found = false;
    let mut i = 0;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if grid.labels()[i] == label {
                    found = true;
                    min[0] = min[0].min(x);
                    min[1] = min[1].min(y);
                    min[2] = min[2].min(z);
                    max[0] = max[0].max(x);
                    max[1] = max[1].max(y);
                    max[2] = max[2].max(z);
                }
                i += 1;
            }
        }
    }
    if !found {
        return Err(VolumeError::UnknownLabel(label));
    }
    let dims = [max[0] - min[0] + 1, max[1] - min[1] + 1, max[2] - min[2] + 1];
    let mut bits = vec![0u8; dims[0] * dims[1] * dims[2]];
    let mut o = 0;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            let row = grid.index(min[0], min[1] + y, min[2] + z);
            for x in 0..dims[0] {
                bits[o] = (grid.labels()[row + x] == label) as u8;
                o += 1;
            }
        }
    }
    Ok(BinaryMask::new(dims, min, bits))
}

/// Max-pool downsampling: an output voxel is foreground iff any voxel of the
/// corresponding input block is. Partial edge blocks follow the same rule,
/// so output dims are the ceiling division of input dims by the ratio.
pub fn downsample_mask(mask: &BinaryMask, ratio: DownsampleRatio) -> BinaryMask {
    let [nx, ny, nz] = mask.dims();
    let odims = [nx.div_ceil(ratio.rx), ny.div_ceil(ratio.ry), nz.div_ceil(ratio.rz)];
    let mut bits = vec![0u8; odims[0] * odims[1] * odims[2]];
    // Single input-major pass; each input voxel ORs into its block's output.
    let mut i = 0;
    for z in 0..nz {
        let oz = z / ratio.rz;
        for y in 0..ny {
            let orow = (oz * odims[1] + y / ratio.ry) * odims[0];
            for x in 0..nx {
                if mask.bits()[i] != 0 {
                    bits[orow + x / ratio.rx] = 1;
                }
                i += 1;
            }
        }
    }
    BinaryMask::new(odims, [0, 0, 0], bits)
}

/// Extract the window of `spec` extents centered at `center`; positions
/// outside the mask bounding box read as background (zero padding).
pub fn extract_window(
    mask: &BinaryMask,
    center: Point,
    spec: WindowSpec,
) -> Result<Window, VolumeError> {
    if !mask.get(center.x, center.y, center.z) {
        return Err(VolumeError::CenterOffObject(center));
    }
    Ok(window_at(mask, center, spec))
}

/// `extract_window` without the foreground-center check; used where the
/// caller already guarantees it.
pub(crate) fn window_at(mask: &BinaryMask, center: Point, spec: WindowSpec) -> Window {
    let [cw, ch, cd] = spec.center_offset();
    let x0 = center.x as i64 - cw as i64;
    let y0 = center.y as i64 - ch as i64;
    let z0 = center.z as i64 - cd as i64;
    let [nx, ny, nz] = mask.dims();
    let mut values = vec![0u8; spec.volume()];
    let mut o = 0;
    for dz in 0..spec.d as i64 {
        let z = z0 + dz;
        if z < 0 || z >= nz as i64 {
            o += spec.w * spec.h;
            continue;
        }
        for dy in 0..spec.h as i64 {
            let y = y0 + dy;
            if y < 0 || y >= ny as i64 {
                o += spec.w;
                continue;
            }
            // Clip the x run once per row instead of testing every voxel.
            let xs = (-x0).clamp(0, spec.w as i64) as usize;
            let xe = (nx as i64 - x0).clamp(0, spec.w as i64) as usize;
            let row = mask.index(0, y as usize, z as usize);
            for dx in xs..xe {
                values[o + dx] = mask.bits()[row + (x0 + dx as i64) as usize];
            }
            o += spec.w;
        }
    }
    Window::new(spec.dims(), values)
}

/// Draw `min(n, foreground count)` distinct foreground voxels uniformly
/// without replacement, deterministically for a fixed seed. The result is
/// sorted x-fastest.
pub fn sample_points(mask: &BinaryMask, n: usize, seed: u64) -> Result<Vec<Point>, VolumeError> {
    assert!(n >= 1, "sample count must be >= 1");
    let mut linear: Vec<u64> = mask
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .map(|(i, _)| i as u64)
        .collect();
    if linear.is_empty() {
        return Err(VolumeError::EmptyMask);
    }
    let k = n.min(linear.len());
    let mut rng = rng_from_seed(seed);
    // Partial Fisher-Yates: the first k slots become the sample.
    for i in 0..k {
        let j = i + uniform_usize(&mut rng, linear.len() - i);
        linear.swap(i, j);
    }
    linear.truncate(k);
    linear.sort_unstable();
    let [nx, ny, _] = mask.dims();
    Ok(linear
        .into_iter()
        .map(|i| {
            let i = i as usize;
            Point::new(i % nx, (i / nx) % ny, i / (nx * ny))
        })
        .collect())
}

/// Extend predictions at sample points over the whole object: each
/// foreground voxel takes the prediction of its Euclidean-nearest sample
/// point, ties broken by the lowest point index.
pub fn interpolate_predictions(
    mask: &BinaryMask,
    points: &[Point],
    preds: &[f32],
) -> Result<ProbabilityMap, VolumeError> {
    if points.is_empty() {
        return Err(VolumeError::EmptyPointSet);
    }
    if points.len() != preds.len() {
        return Err(VolumeError::LengthMismatch {
            points: points.len(),
            preds: preds.len(),
        });
    }
    debug_assert!(preds.iter().all(|&p| (0.0..=1.0).contains(&p)));
    let [nx, ny, _] = mask.dims();
    let mut values = vec![PROB_BACKGROUND; mask.bits().len()];
    values
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, v)| {
            if mask.bits()[i] == 0 {
                return;
            }
            let here = Point::new(i % nx, (i / nx) % ny, i / (nx * ny));
            let mut best = 0usize;
            let mut best_d = here.distance_sq(&points[0]);
            for (j, p) in points.iter().enumerate().skip(1) {
                let d = here.distance_sq(p);
                // Strict improvement only, so the lowest index wins ties.
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            *v = preds[best];
        });
    Ok(ProbabilityMap::new(mask.clone(), values))
}
