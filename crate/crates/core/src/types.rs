//! Domain types shared by the decomposition engine, the hard-constraint
//! pipeline and the metrics.

use crate::error::{Result, ScalpError};

/// Extent of a pixel or voxel grid. Planar images have `depth == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub depth: usize,
}

impl Dims {
    pub fn new_2d(width: usize, height: usize) -> Self {
        Dims {
            width,
            height,
            depth: 1,
        }
    }

    pub fn new_3d(width: usize, height: usize, depth: usize) -> Self {
        Dims { width, height, depth }
    }

    pub fn len(&self) -> usize {
        self.width * self.height * self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_volume(&self) -> bool {
        self.depth > 1
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.height + y) * self.width + x
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let plane = self.width * self.height;
        let z = idx / plane;
        let rem = idx % plane;
        [rem % self.width, rem / self.width, z]
    }

    #[inline]
    pub fn contains(&self, p: [isize; 3]) -> bool {
        p[0] >= 0
            && p[1] >= 0
            && p[2] >= 0
            && (p[0] as usize) < self.width
            && (p[1] as usize) < self.height
            && (p[2] as usize) < self.depth
    }

    pub(crate) fn check_nonempty(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.depth == 0 {
            return Err(ScalpError::InvalidData(format!(
                "grid dimensions must be at least 1, got {}x{}x{}",
                self.width, self.height, self.depth
            )));
        }
        Ok(())
    }

    /// Face-adjacent neighbors (4 in 2D, 6 in 3D) of `idx`, written into `out`.
    pub(crate) fn face_neighbors(&self, idx: usize, out: &mut Vec<usize>) {
        out.clear();
        let [x, y, z] = self.coords(idx);
        if x > 0 {
            out.push(idx - 1);
        }
        if x + 1 < self.width {
            out.push(idx + 1);
        }
        if y > 0 {
            out.push(idx - self.width);
        }
        if y + 1 < self.height {
            out.push(idx + self.width);
        }
        let plane = self.width * self.height;
        if z > 0 {
            out.push(idx - plane);
        }
        if z + 1 < self.depth {
            out.push(idx + plane);
        }
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.depth == 1 {
            write!(f, "{}x{}", self.width, self.height)
        } else {
            write!(f, "{}x{}x{}", self.width, self.height, self.depth)
        }
    }
}

/// Per-pixel CIELab colors of a planar image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        Dims::new_2d(width, height).check_nonempty()?;
        if data.len() != width * height {
            return Err(ScalpError::dims(width * height, data.len()));
        }
        for (i, lab) in data.iter().enumerate() {
            let ok = (0.0..=100.0).contains(&lab[0])
                && (-128.0..=128.0).contains(&lab[1])
                && (-128.0..=128.0).contains(&lab[2]);
            if !ok {
                return Err(ScalpError::InvalidData(format!(
                    "Lab value {lab:?} at pixel {i} is out of range"
                )));
            }
        }
        Ok(LabImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> Dims {
        Dims::new_2d(self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// Per-pixel contour confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ContourMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Dims::new_2d(width, height).check_nonempty()?;
        if data.len() != width * height {
            return Err(ScalpError::dims(width * height, data.len()));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ScalpError::InvalidData(format!("contour value {bad} outside [0, 1]")));
        }
        Ok(ContourMap { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        ContourMap {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> Dims {
        Dims::new_2d(self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// One label per pixel (or voxel). After a decomposition finishes the labels
/// are the contiguous range `0..K` and each label is a connected region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: Dims,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        Self::from_dims(Dims::new_2d(width, height), labels)
    }

    pub fn new_3d(width: usize, height: usize, depth: usize, labels: Vec<u32>) -> Result<Self> {
        Self::from_dims(Dims::new_3d(width, height, depth), labels)
    }

    pub fn from_dims(dims: Dims, labels: Vec<u32>) -> Result<Self> {
        dims.check_nonempty()?;
        if labels.len() != dims.len() {
            return Err(ScalpError::dims(dims.len(), labels.len()));
        }
        Ok(LabelMap { dims, labels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        LabelMap {
            dims: Dims::new_2d(width, height),
            labels,
        }
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn depth(&self) -> usize {
        self.dims.depth
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.dims.width + x]
    }

    pub fn get3(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[self.dims.index(x, y, z)]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    /// Largest label plus one; zero for an empty map.
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Number of distinct labels.
    pub fn label_count(&self) -> usize {
        let mut seen = vec![false; self.label_bound()];
        let mut count = 0;
        for &l in &self.labels {
            if !seen[l as usize] {
                seen[l as usize] = true;
                count += 1;
            }
        }
        count
    }

    /// True when the labels are exactly `0..label_count()`.
    pub fn is_compact(&self) -> bool {
        self.label_bound() == self.label_count()
    }

    /// Relabels to `0..K` in order of first appearance (row-major scan).
    pub fn compacted(&self) -> LabelMap {
        let mut remap = vec![u32::MAX; self.label_bound()];
        let mut next = 0u32;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let slot = &mut remap[l as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    next += 1;
                }
                *slot
            })
            .collect();
        LabelMap {
            dims: self.dims,
            labels,
        }
    }

    /// Pixel count per label, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.label_bound()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// A superpixel cluster: mean feature, continuous barycenter and population.
///
/// Barycenters are `[x, y, z]` in pixel-center coordinates; `z` stays 0 for
/// planar images. Single-channel volumes keep their intensity in channel 0
/// and zeros elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterState {
    pub mean_feature: [f64; 3],
    pub barycenter: [f64; 3],
    pub population: usize,
}

/// How linear-path color distances are reused within one cluster's window scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathCache {
    /// Every path pixel distance is evaluated directly.
    #[default]
    Off,
    /// Per-pixel color distances to the current cluster are memoized.
    /// Produces results identical to `Off`.
    Exact,
    /// Each processed pixel stores the color-distance sum, length and maximum
    /// contour of its own path; a later path that crosses it reuses that
    /// remainder instead of walking on to the barycenter.
    Approximate,
}

/// Parameters of a decomposition run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalpParams {
    /// Target number of superpixels.
    pub k: usize,
    /// Regularity: the compactness `m^2` equals `m2_scale * r^2`.
    pub m2_scale: f64,
    /// Weight of the pixel's own color distance against the path average.
    pub lambda: f64,
    /// Contour prior weight.
    pub gamma: f64,
    /// Neighborhood radius; windows are `(2n+1)` pixels wide.
    pub n: usize,
    /// Bandwidth of the neighborhood color weights.
    pub sigma: f64,
    pub iterations: usize,
    pub rng_seed: u64,
    pub path_cache: PathCache,
}

impl Default for ScalpParams {
    fn default() -> Self {
        ScalpParams {
            k: 250,
            m2_scale: 0.075,
            lambda: 0.5,
            gamma: 50.0,
            n: 3,
            sigma: 40.0,
            iterations: 5,
            rng_seed: 0,
            path_cache: PathCache::Off,
        }
    }
}

impl ScalpParams {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// Checks every parameter against its admissible range for an input of
    /// `element_count` pixels or voxels.
    pub fn validate(&self, element_count: usize) -> Result<()> {
        if self.k == 0 || self.k > element_count {
            return Err(ScalpError::param(format!(
                "k = {} must lie in [1, {element_count}]",
                self.k
            )));
        }
        if !(self.m2_scale.is_finite() && self.m2_scale >= 0.0) {
            return Err(ScalpError::param(format!(
                "m2_scale = {} must be finite and nonnegative",
                self.m2_scale
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ScalpError::param(format!(
                "lambda = {} must lie in [0, 1]",
                self.lambda
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(ScalpError::param(format!(
                "gamma = {} must be finite and nonnegative",
                self.gamma
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(ScalpError::param(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.iterations == 0 {
            return Err(ScalpError::param("iterations must be at least 1"));
        }
        Ok(())
    }
}
