//! The iterative clustering engine.
//!
//! Each pass scans a `(2r+1)` window around every cluster barycenter and
//! assigns pixels to the cluster minimizing
//!
//! ```text
//! D = (lambda * Dc(p) + (1 - lambda) * mean_{q in path} Dc(q) + ds(p) * m2_scale)
//!     * (1 + gamma * max_{q in path} C(q))
//! ```
//!
//! where `Dc` is the neighborhood color distance read from precomputed
//! moments, `ds` the squared spatial distance to the barycenter and the path
//! runs from the pixel to the rounded barycenter. Cluster colors and
//! barycenters are refreshed after every pass. The same engine handles
//! planar images (`depth == 1`) and volumes.

use crate::connectivity::enforce_connectivity_within;
use crate::error::{Result, ScalpError};
use crate::moments::MomentImages;
use crate::path::{LineIter, PixelPath};
use crate::types::{ClusterState, ContourMap, Dims, LabImage, LabelMap, PathCache, ScalpParams};

/// Mutable state of one decomposition run.
#[derive(Debug, Clone)]
pub struct DecompositionState {
    dims: Dims,
    /// Grid step `r`.
    pub step: f64,
    pub clusters: Vec<ClusterState>,
    /// Per-pixel cluster index.
    pub labels: Vec<u32>,
    /// Per-pixel distance to its cluster from the last assignment pass;
    /// infinite for pixels no window reached.
    pub best_distance: Vec<f64>,
    /// Region each cluster is confined to, when running under a hard constraint.
    pub cluster_region: Option<Vec<u32>>,
}

impl DecompositionState {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn live_clusters(&self) -> usize {
        self.clusters.iter().filter(|c| c.population > 0).count()
    }

    pub fn label_map(&self) -> LabelMap {
        LabelMap::from_dims(self.dims, self.labels.clone()).expect("state labels match dims")
    }

    /// Recomputes every cluster's mean feature and barycenter from its member
    /// pixels. Clusters left without pixels get population 0 and are skipped
    /// from then on.
    pub fn update_clusters(&mut self, features: &[[f64; 3]]) {
        let n = self.clusters.len();
        let mut sum_f = vec![[0.0f64; 3]; n];
        let mut sum_x = vec![[0.0f64; 3]; n];
        let mut count = vec![0usize; n];
        for (idx, &l) in self.labels.iter().enumerate() {
            let k = l as usize;
            let [x, y, z] = self.dims.coords(idx);
            let f = &features[idx];
            for c in 0..3 {
                sum_f[k][c] += f[c];
            }
            sum_x[k][0] += x as f64;
            sum_x[k][1] += y as f64;
            sum_x[k][2] += z as f64;
            count[k] += 1;
        }
        for (k, cl) in self.clusters.iter_mut().enumerate() {
            cl.population = count[k];
            if count[k] > 0 {
                let inv = 1.0 / count[k] as f64;
                cl.mean_feature = sum_f[k].map(|v| v * inv);
                cl.barycenter = sum_x[k].map(|v| v * inv);
            }
        }
    }
}

/// Number of grid blocks along each axis for `k` clusters, plus the step.
///
/// Axes of extent 1 are ignored; an axis too short to hold one block of the
/// nominal step gets a single block and the step is recomputed over the
/// remaining axes.
pub(crate) fn grid_layout(dims: Dims, k: usize) -> ([usize; 3], f64) {
    let extents = [dims.width, dims.height, dims.depth];
    let mut counts = [1usize; 3];
    let mut active: Vec<usize> = (0..3).filter(|&a| extents[a] > 1).collect();
    let mut step = 1.0;
    loop {
        if active.is_empty() {
            return (counts, step);
        }
        let volume: f64 = active.iter().map(|&a| extents[a] as f64).product();
        step = (volume / k as f64).powf(1.0 / active.len() as f64);
        let before = active.len();
        active.retain(|&a| extents[a] as f64 >= step);
        if active.len() == before {
            break;
        }
    }
    for &a in &active {
        counts[a] = ((extents[a] as f64 / step).round() as usize).clamp(1, extents[a]);
    }
    (counts, step)
}

#[inline]
fn block_of(coord: usize, count: usize, extent: usize) -> usize {
    coord * count / extent
}

/// Regular-grid initialization: one cluster per block, each pixel labelled by
/// its block and each barycenter at its block's center. Mean features are
/// zero until [`DecompositionState::update_clusters`] runs.
pub fn init_grid(width: usize, height: usize, k: usize) -> Result<DecompositionState> {
    init_grid_dims(Dims::new_2d(width, height), k)
}

pub fn init_grid_dims(dims: Dims, k: usize) -> Result<DecompositionState> {
    dims.check_nonempty()?;
    if k == 0 || k > dims.len() {
        return Err(ScalpError::param(format!("k = {k} must lie in [1, {}]", dims.len())));
    }
    let (counts, step) = grid_layout(dims, k);
    let extents = [dims.width, dims.height, dims.depth];
    let center = |axis: usize, i: usize| {
        let (c, e) = (counts[axis], extents[axis]);
        let lo = (i * e).div_ceil(c);
        let hi = ((i + 1) * e).div_ceil(c);
        (lo + hi - 1) as f64 / 2.0
    };
    let mut clusters = Vec::with_capacity(counts.iter().product());
    for bz in 0..counts[2] {
        for by in 0..counts[1] {
            for bx in 0..counts[0] {
                clusters.push(ClusterState {
                    mean_feature: [0.0; 3],
                    barycenter: [center(0, bx), center(1, by), center(2, bz)],
                    population: 0,
                });
            }
        }
    }
    let mut labels = Vec::with_capacity(dims.len());
    for z in 0..dims.depth {
        let bz = block_of(z, counts[2], dims.depth);
        for y in 0..dims.height {
            let by = block_of(y, counts[1], dims.height);
            for x in 0..dims.width {
                let bx = block_of(x, counts[0], dims.width);
                labels.push(((bz * counts[1] + by) * counts[0] + bx) as u32);
            }
        }
    }
    let sizes = {
        let mut s = vec![0usize; clusters.len()];
        for &l in &labels {
            s[l as usize] += 1;
        }
        s
    };
    for (c, s) in clusters.iter_mut().zip(sizes) {
        c.population = s;
    }
    Ok(DecompositionState {
        dims,
        step,
        clusters,
        labels,
        best_distance: vec![f64::INFINITY; dims.len()],
        cluster_region: None,
    })
}

/// Initialization from a seed labelling (one cluster per seed label), used
/// by the hard-constraint pipeline. Labels must be compact.
pub fn init_from_labels(
    seeds: &LabelMap,
    features: &[[f64; 3]],
    regions: Option<&[u32]>,
    k: usize,
) -> Result<DecompositionState> {
    let dims = seeds.dims();
    if !seeds.is_compact() {
        return Err(ScalpError::InvalidData("seed labels must be compact".into()));
    }
    let (_, step) = grid_layout(dims, k.clamp(1, dims.len()));
    let n = seeds.label_bound();
    let mut state = DecompositionState {
        dims,
        step,
        clusters: vec![
            ClusterState {
                mean_feature: [0.0; 3],
                barycenter: [0.0; 3],
                population: 0,
            };
            n
        ],
        labels: seeds.labels().to_vec(),
        best_distance: vec![f64::INFINITY; dims.len()],
        cluster_region: None,
    };
    state.update_clusters(features);
    if let Some(reg) = regions {
        let mut cluster_region = vec![u32::MAX; n];
        for (p, &l) in seeds.labels().iter().enumerate() {
            let slot = &mut cluster_region[l as usize];
            if *slot == u32::MAX {
                *slot = reg[p];
            } else if *slot != reg[p] {
                return Err(ScalpError::InvalidData(format!(
                    "seed label {l} spans regions {} and {}",
                    *slot, reg[p]
                )));
            }
        }
        state.cluster_region = Some(cluster_region);
    }
    Ok(state)
}

/// Squared spatial distance between a pixel and a cluster barycenter.
pub fn spatial_distance(p: [usize; 2], cluster: &ClusterState) -> f64 {
    let dx = p[0] as f64 - cluster.barycenter[0];
    let dy = p[1] as f64 - cluster.barycenter[1];
    dx * dx + dy * dy
}

fn spatial_distance_3(p: [usize; 3], b: &[f64; 3]) -> f64 {
    let dx = p[0] as f64 - b[0];
    let dy = p[1] as f64 - b[1];
    let dz = p[2] as f64 - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Color distance mixing the pixel's own neighborhood distance with the mean
/// distance over the path pixels.
pub fn path_color_distance(
    p: [usize; 2],
    cluster_feature: &[f64; 3],
    path: &PixelPath<2>,
    moments: &MomentImages,
    lambda: f64,
) -> f64 {
    let dims = moments.dims();
    let own = moments.distance_at(dims.index(p[0], p[1], 0), cluster_feature);
    if lambda == 1.0 {
        return own;
    }
    let sum: f64 = path
        .iter()
        .map(|q| moments.distance_at(dims.index(q[0], q[1], 0), cluster_feature))
        .sum();
    lambda * own + (1.0 - lambda) * sum / path.len() as f64
}

/// `1 + gamma * max C(q)` over the path.
pub fn contour_weight(path: &PixelPath<2>, contour: &ContourMap, gamma: f64) -> f64 {
    let max = path.iter().map(|q| contour.get(q[0], q[1])).fold(0.0f64, f64::max);
    1.0 + gamma * max
}

/// Full clustering distance of pixel `p` to `cluster` along `path`.
pub fn total_distance(
    p: [usize; 2],
    cluster: &ClusterState,
    path: &PixelPath<2>,
    moments: &MomentImages,
    contour: Option<&ContourMap>,
    params: &ScalpParams,
) -> f64 {
    let color = path_color_distance(p, &cluster.mean_feature, path, moments, params.lambda);
    let spatial = spatial_distance(p, cluster) * params.m2_scale;
    let weight = match contour {
        Some(c) if params.gamma > 0.0 => contour_weight(path, c, params.gamma),
        _ => 1.0,
    };
    (color + spatial) * weight
}

/// Read-only inputs of a decomposition plus the precomputed moments.
pub struct Engine<'a> {
    dims: Dims,
    features: &'a [[f64; 3]],
    moments: MomentImages,
    contour: Option<&'a [f64]>,
    regions: Option<&'a [u32]>,
    params: ScalpParams,
}

#[derive(Clone, Copy, Default)]
struct PathMemo {
    sum: f64,
    len: u32,
    max_contour: f64,
}

/// Per-window scratch, reset per cluster with a generation stamp.
struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    color: Vec<f64>,
    memo: Vec<PathMemo>,
    origin: [usize; 3],
    extent: [usize; 3],
}

impl Scratch {
    fn new(size: usize) -> Self {
        Scratch {
            stamp: vec![0; size],
            generation: 0,
            color: vec![0.0; size],
            memo: vec![PathMemo::default(); size],
            origin: [0; 3],
            extent: [0; 3],
        }
    }

    fn reset(&mut self, origin: [usize; 3], extent: [usize; 3]) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.origin = origin;
        self.extent = extent;
    }

    #[inline]
    fn slot(&self, q: [usize; 3]) -> usize {
        let lx = q[0] - self.origin[0];
        let ly = q[1] - self.origin[1];
        let lz = q[2] - self.origin[2];
        (lz * self.extent[1] + ly) * self.extent[0] + lx
    }
}

impl<'a> Engine<'a> {
    pub fn new(
        dims: Dims,
        features: &'a [[f64; 3]],
        contour: Option<&'a [f64]>,
        regions: Option<&'a [u32]>,
        params: &ScalpParams,
    ) -> Result<Self> {
        dims.check_nonempty()?;
        params.validate(dims.len())?;
        if features.len() != dims.len() {
            return Err(ScalpError::dims(dims.len(), features.len()));
        }
        if let Some(c) = contour {
            if c.len() != dims.len() {
                return Err(ScalpError::dims(
                    format!("contour map of {dims}"),
                    format!("{} values", c.len()),
                ));
            }
        }
        if let Some(r) = regions {
            if r.len() != dims.len() {
                return Err(ScalpError::dims(
                    format!("region map of {dims}"),
                    format!("{} values", r.len()),
                ));
            }
        }
        let moments = MomentImages::compute(dims, features, params.n, params.sigma)?;
        Ok(Engine {
            dims,
            features,
            moments,
            contour,
            regions,
            params: params.clone(),
        })
    }

    pub fn moments(&self) -> &MomentImages {
        &self.moments
    }

    pub fn params(&self) -> &ScalpParams {
        &self.params
    }

    /// Grid initialization with mean features filled in.
    pub fn init_grid(&self) -> Result<DecompositionState> {
        let mut state = init_grid_dims(self.dims, self.params.k)?;
        state.update_clusters(self.features);
        Ok(state)
    }

    fn half_window(&self, step: f64) -> [usize; 3] {
        let r = (step.round() as usize).max(1);
        [r, r, if self.dims.is_volume() { r } else { 0 }]
    }

    fn rounded_center(&self, b: &[f64; 3]) -> [usize; 3] {
        let ext = [self.dims.width, self.dims.height, self.dims.depth];
        let mut c = [0usize; 3];
        for a in 0..3 {
            c[a] = (b[a].round().max(0.0) as usize).min(ext[a] - 1);
        }
        c
    }

    /// Distance of pixel `idx` to `cluster` without any path reuse.
    pub fn distance(&self, idx: usize, cluster: &ClusterState) -> f64 {
        let center = self.rounded_center(&cluster.barycenter);
        self.distance_inner(idx, cluster, center, None)
    }

    fn distance_inner(
        &self,
        idx: usize,
        cluster: &ClusterState,
        center: [usize; 3],
        scratch: Option<&mut Scratch>,
    ) -> f64 {
        let p = self.dims.coords(idx);
        let f = &cluster.mean_feature;
        let own = self.moments.distance_at(idx, f);
        let lambda = self.params.lambda;
        let use_contour = self.params.gamma > 0.0 && self.contour.is_some();
        let need_path = lambda < 1.0 || use_contour;

        let (path_mean, max_contour) = if need_path {
            match (self.params.path_cache, scratch) {
                (PathCache::Off, _) | (_, None) => self.walk_direct(p, center, f),
                (PathCache::Exact, Some(s)) => self.walk_exact(p, center, f, s),
                (PathCache::Approximate, Some(s)) => self.walk_approx(p, center, f, s),
            }
        } else {
            (0.0, 0.0)
        };

        let color = if lambda == 1.0 {
            own
        } else {
            lambda * own + (1.0 - lambda) * path_mean
        };
        let spatial = spatial_distance_3(p, &cluster.barycenter) * self.params.m2_scale;
        let weight = if use_contour {
            1.0 + self.params.gamma * max_contour
        } else {
            1.0
        };
        (color + spatial) * weight
    }

    fn for_each_path_index(&self, p: [usize; 3], c: [usize; 3], mut visit: impl FnMut([usize; 3], usize) -> bool) {
        if self.dims.is_volume() {
            for q in LineIter::new(p, c) {
                if !visit(q, self.dims.index(q[0], q[1], q[2])) {
                    return;
                }
            }
        } else {
            for q in LineIter::new([p[0], p[1]], [c[0], c[1]]) {
                if !visit([q[0], q[1], 0], self.dims.index(q[0], q[1], 0)) {
                    return;
                }
            }
        }
    }

    #[inline]
    fn contour_at(&self, idx: usize) -> f64 {
        self.contour.map_or(0.0, |c| c[idx])
    }

    fn walk_direct(&self, p: [usize; 3], c: [usize; 3], f: &[f64; 3]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut len = 0usize;
        let mut maxc = 0.0f64;
        self.for_each_path_index(p, c, |_, q| {
            sum += self.moments.distance_at(q, f);
            maxc = maxc.max(self.contour_at(q));
            len += 1;
            true
        });
        (sum / len as f64, maxc)
    }

    fn walk_exact(&self, p: [usize; 3], c: [usize; 3], f: &[f64; 3], s: &mut Scratch) -> (f64, f64) {
        let mut sum = 0.0;
        let mut len = 0usize;
        let mut maxc = 0.0f64;
        self.for_each_path_index(p, c, |q, qi| {
            let slot = s.slot(q);
            if s.stamp[slot] != s.generation {
                s.stamp[slot] = s.generation;
                s.color[slot] = self.moments.distance_at(qi, f);
                s.memo[slot] = PathMemo::default();
            }
            sum += s.color[slot];
            maxc = maxc.max(self.contour_at(qi));
            len += 1;
            true
        });
        (sum / len as f64, maxc)
    }

    fn walk_approx(&self, p: [usize; 3], c: [usize; 3], f: &[f64; 3], s: &mut Scratch) -> (f64, f64) {
        let mut sum = 0.0;
        let mut len = 0u32;
        let mut maxc = 0.0f64;
        let mut first = true;
        self.for_each_path_index(p, c, |q, qi| {
            let slot = s.slot(q);
            if !first && s.stamp[slot] == s.generation && s.memo[slot].len > 0 {
                let m = s.memo[slot];
                sum += m.sum;
                len += m.len;
                maxc = maxc.max(m.max_contour);
                return false;
            }
            first = false;
            sum += self.moments.distance_at(qi, f);
            maxc = maxc.max(self.contour_at(qi));
            len += 1;
            true
        });
        let slot = s.slot(p);
        s.stamp[slot] = s.generation;
        s.memo[slot] = PathMemo {
            sum,
            len,
            max_contour: maxc,
        };
        (sum / len as f64, maxc)
    }

    /// Window of cluster `center`: origin and extent, clipped to the grid.
    fn window(&self, center: [usize; 3], half: [usize; 3]) -> ([usize; 3], [usize; 3]) {
        let ext = [self.dims.width, self.dims.height, self.dims.depth];
        let mut lo = [0usize; 3];
        let mut size = [0usize; 3];
        for a in 0..3 {
            lo[a] = center[a].saturating_sub(half[a]);
            let hi = (center[a] + half[a]).min(ext[a] - 1);
            size[a] = hi - lo[a] + 1;
        }
        (lo, size)
    }

    /// One assignment pass: every live cluster scans its window and claims
    /// the pixels for which it is strictly closer than any earlier cluster.
    pub fn assign(&self, state: &mut DecompositionState) {
        let half = self.half_window(state.step);
        let mut scratch = Scratch::new((2 * half[0] + 1) * (2 * half[1] + 1) * (2 * half[2] + 1));
        state.best_distance.fill(f64::INFINITY);
        for k in 0..state.clusters.len() {
            let cluster = state.clusters[k];
            if cluster.population == 0 {
                continue;
            }
            let region = state.cluster_region.as_ref().map(|r| r[k]);
            let center = self.rounded_center(&cluster.barycenter);
            let (lo, size) = self.window(center, half);
            scratch.reset(lo, size);
            for z in lo[2]..lo[2] + size[2] {
                for y in lo[1]..lo[1] + size[1] {
                    for x in lo[0]..lo[0] + size[0] {
                        let idx = self.dims.index(x, y, z);
                        if let (Some(reg), Some(want)) = (self.regions, region) {
                            if reg[idx] != want {
                                continue;
                            }
                        }
                        let d = self.distance_inner(idx, &cluster, center, Some(&mut scratch));
                        if d < state.best_distance[idx] {
                            state.best_distance[idx] = d;
                            state.labels[idx] = k as u32;
                        }
                    }
                }
            }
        }
    }

    /// Whether the window scan of cluster `k` visits pixel `idx`.
    pub fn window_covers(&self, state: &DecompositionState, idx: usize, k: usize) -> bool {
        let cluster = &state.clusters[k];
        if cluster.population == 0 {
            return false;
        }
        if let (Some(reg), Some(cr)) = (self.regions, state.cluster_region.as_ref()) {
            if reg[idx] != cr[k] {
                return false;
            }
        }
        let half = self.half_window(state.step);
        let center = self.rounded_center(&cluster.barycenter);
        let (lo, size) = self.window(center, half);
        let p = self.dims.coords(idx);
        (0..3).all(|a| p[a] >= lo[a] && p[a] < lo[a] + size[a])
    }

    pub fn update(&self, state: &mut DecompositionState) {
        state.update_clusters(self.features);
    }

    /// Runs all passes, then makes superpixels connected and compacts labels.
    pub fn run(&self, mut state: DecompositionState) -> LabelMap {
        for _ in 0..self.params.iterations {
            self.assign(&mut state);
            self.update(&mut state);
        }
        let labels = state.label_map();
        enforce_connectivity_within(&labels, self.regions).compacted()
    }
}

/// Decomposes a CIELab image. `contour`, when given, must match the image
/// size; it only has an effect when `params.gamma > 0`.
pub fn run_scalp(image: &LabImage, params: &ScalpParams, contour: Option<&ContourMap>) -> Result<LabelMap> {
    if let Some(c) = contour {
        if c.dims() != image.dims() {
            return Err(ScalpError::dims(image.dims(), c.dims()));
        }
    }
    run_scalp_features(image.dims(), image.pixels(), params, contour.map(|c| c.values()))
}

/// Decomposition over arbitrary 3-channel per-pixel features. This is the
/// entry point for feature spaces other than CIELab; unused channels should
/// be zero.
pub fn run_scalp_features(
    dims: Dims,
    features: &[[f64; 3]],
    params: &ScalpParams,
    contour: Option<&[f64]>,
) -> Result<LabelMap> {
    let engine = Engine::new(dims, features, contour, None, params)?;
    let state = engine.init_grid()?;
    Ok(engine.run(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::precompute_moments;
    use crate::path::linear_path;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_region_image(w: usize, h: usize, split: usize) -> LabImage {
        LabImage::from_fn(w, h, |x, _| {
            if x < split {
                [10.0, 40.0, 30.0]
            } else {
                [90.0, -40.0, -30.0]
            }
        })
        .unwrap()
    }

    #[test]
    fn grid_symmetric_quadrants() {
        let s = init_grid(100, 100, 4).unwrap();
        assert_eq!(s.clusters.len(), 4);
        let mut centers: Vec<[f64; 2]> = s.clusters.iter().map(|c| [c.barycenter[0], c.barycenter[1]]).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [[25.0, 25.0], [25.0, 75.0], [75.0, 25.0], [75.0, 75.0]];
        for (c, e) in centers.iter().zip(expected) {
            assert!((c[0] - e[0]).abs() <= 0.5 && (c[1] - e[1]).abs() <= 0.5, "{c:?}");
        }
    }

    #[test]
    fn grid_one_cluster_per_pixel() {
        let s = init_grid(10, 10, 100).unwrap();
        assert_eq!(s.clusters.len(), 100);
        for (i, &l) in s.labels.iter().enumerate() {
            assert_eq!(l as usize, i);
        }
    }

    #[test]
    fn grid_count_close_to_target() {
        // 321x481 at K=250: r = 24.85, 13 x 19 blocks.
        let s = init_grid(481, 321, 250).unwrap();
        assert_eq!(s.clusters.len(), 247);
        assert!((s.step - (481.0 * 321.0 / 250.0f64).sqrt()).abs() < 1e-12);
        for (w, h, k) in [(481, 321, 250), (50, 7, 20), (1, 100, 10), (64, 64, 37)] {
            let s = init_grid(w, h, k).unwrap();
            let kk = s.clusters.len() as f64;
            assert!(
                (kk - k as f64).abs() <= 2.0 * (k as f64).sqrt(),
                "{w}x{h} k={k} -> {kk}"
            );
        }
    }

    #[test]
    fn grid_rejects_bad_k() {
        assert!(init_grid(4, 4, 0).is_err());
        assert!(init_grid(4, 4, 17).is_err());
    }

    #[test]
    fn spatial_distance_examples() {
        let c = ClusterState {
            mean_feature: [0.0; 3],
            barycenter: [0.0, 0.0, 0.0],
            population: 1,
        };
        assert_eq!(spatial_distance([3, 4], &c), 25.0);
        assert_eq!(spatial_distance([0, 0], &c), 0.0);
    }

    #[test]
    fn path_color_distance_limits() {
        let img = two_region_image(12, 6, 5);
        let m = precompute_moments(&img, 1, 40.0).unwrap();
        let f = [50.0, 0.0, 0.0];
        let path = linear_path([1, 2], [9, 3]);
        let own = m.distance_at(2 * 12 + 1, &f);
        assert_eq!(path_color_distance([1, 2], &f, &path, &m, 1.0), own);
        let single = linear_path([4, 4], [4, 4]);
        let d = path_color_distance([4, 4], &f, &single, &m, 0.3);
        assert!((d - m.distance_at(4 * 12 + 4, &f)).abs() < 1e-9);
        // Direct-sum oracle at lambda = 0.5.
        let sum: f64 = path.iter().map(|q| m.distance_at(q[1] * 12 + q[0], &f)).sum();
        let expected = 0.5 * own + 0.5 * sum / path.len() as f64;
        assert!((path_color_distance([1, 2], &f, &path, &m, 0.5) - expected).abs() < 1e-9);
    }

    #[test]
    fn contour_weight_examples() {
        let path = linear_path([0, 0], [4, 0]);
        let zero = ContourMap::zeros(5, 1);
        assert_eq!(contour_weight(&path, &zero, 50.0), 1.0);
        let line = ContourMap::new(5, 1, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(contour_weight(&path, &line, 0.0), 1.0);
        assert_eq!(contour_weight(&path, &line, 50.0), 51.0);
    }

    #[test]
    fn engine_distance_matches_public_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = LabImage::from_fn(20, 16, |_, _| {
            [rng.random_range(0.0..100.0), rng.random_range(-50.0..50.0), 0.0]
        })
        .unwrap();
        let contour = ContourMap::from_fn(20, 16, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0).unwrap();
        let params = ScalpParams {
            k: 6,
            n: 2,
            ..ScalpParams::default()
        };
        let engine = Engine::new(img.dims(), img.pixels(), Some(contour.values()), None, &params).unwrap();
        for _ in 0..200 {
            let cluster = ClusterState {
                mean_feature: [rng.random_range(0.0..100.0), rng.random_range(-50.0..50.0), 3.0],
                barycenter: [rng.random_range(0.0..19.0), rng.random_range(0.0..15.0), 0.0],
                population: 5,
            };
            let p = [rng.random_range(0..20), rng.random_range(0..16)];
            let c = [
                cluster.barycenter[0].round() as usize,
                cluster.barycenter[1].round() as usize,
            ];
            let path = linear_path(p, c);
            let expected = total_distance(p, &cluster, &path, engine.moments(), Some(&contour), &params);
            let got = engine.distance(p[1] * 20 + p[0], &cluster);
            assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn uniform_cluster_center_distance_is_zero() {
        let img = LabImage::from_fn(9, 9, |_, _| [30.0, 5.0, 5.0]).unwrap();
        let m = precompute_moments(&img, 3, 40.0).unwrap();
        let cluster = ClusterState {
            mean_feature: [30.0, 5.0, 5.0],
            barycenter: [4.0, 4.0, 0.0],
            population: 81,
        };
        let path = linear_path([4, 4], [4, 4]);
        let d = total_distance(
            [4, 4],
            &cluster,
            &path,
            &m,
            Some(&ContourMap::zeros(9, 9)),
            &ScalpParams::default(),
        );
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn assignment_is_optimal_over_covering_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = LabImage::from_fn(40, 32, |x, y| {
            let base = if (x / 10 + y / 8) % 2 == 0 { 30.0 } else { 70.0 };
            [base + rng.random_range(-5.0..5.0), rng.random_range(-10.0..10.0), 0.0]
        })
        .unwrap();
        let params = ScalpParams {
            k: 12,
            ..ScalpParams::default()
        };
        let engine = Engine::new(img.dims(), img.pixels(), None, None, &params).unwrap();
        let mut state = engine.init_grid().unwrap();
        for _ in 0..2 {
            engine.assign(&mut state);
            for idx in 0..img.pixels().len() {
                for k in 0..state.clusters.len() {
                    if engine.window_covers(&state, idx, k) {
                        let d = engine.distance(idx, &state.clusters[k]);
                        assert!(state.best_distance[idx] <= d);
                    }
                }
                if state.best_distance[idx].is_finite() {
                    let own = engine.distance(idx, &state.clusters[state.labels[idx] as usize]);
                    assert_eq!(own, state.best_distance[idx]);
                }
            }
            engine.update(&mut state);
        }
    }

    #[test]
    fn update_recomputes_means() {
        let img = two_region_image(10, 4, 3);
        let params = ScalpParams {
            k: 2,
            ..ScalpParams::default()
        };
        let engine = Engine::new(img.dims(), img.pixels(), None, None, &params).unwrap();
        let mut state = engine.init_grid().unwrap();
        engine.assign(&mut state);
        engine.update(&mut state);
        for (k, c) in state.clusters.iter().enumerate() {
            let members: Vec<usize> = (0..40).filter(|&i| state.labels[i] as usize == k).collect();
            assert_eq!(c.population, members.len());
            if members.is_empty() {
                continue;
            }
            let mx = members.iter().map(|&i| (i % 10) as f64).sum::<f64>() / members.len() as f64;
            let ml = members.iter().map(|&i| img.pixels()[i][0]).sum::<f64>() / members.len() as f64;
            assert!((c.barycenter[0] - mx).abs() < 1e-12);
            assert!((c.mean_feature[0] - ml).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_cache_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = LabImage::from_fn(48, 40, |x, _| {
            let base = if x < 20 { 25.0 } else { 75.0 };
            [
                base + rng.random_range(-8.0..8.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
            ]
        })
        .unwrap();
        let base = ScalpParams {
            k: 20,
            ..ScalpParams::default()
        };
        let a = run_scalp(&img, &base, None).unwrap();
        let b = run_scalp(
            &img,
            &ScalpParams {
                path_cache: PathCache::Exact,
                ..base.clone()
            },
            None,
        )
        .unwrap();
        assert_eq!(a, b);
        let c = run_scalp(
            &img,
            &ScalpParams {
                path_cache: PathCache::Approximate,
                ..base
            },
            None,
        )
        .unwrap();
        assert!(crate::connectivity::is_connected_partition(&c));
    }

    #[test]
    fn run_is_deterministic_and_valid() {
        let img = two_region_image(60, 40, 23);
        let params = ScalpParams {
            k: 12,
            ..ScalpParams::default()
        };
        let a = run_scalp(&img, &params, None).unwrap();
        let b = run_scalp(&img, &params, None).unwrap();
        assert_eq!(a, b);
        assert!(a.is_compact());
        assert!(crate::connectivity::is_connected_partition(&a));
        // No superpixel straddles the color edge.
        for y in 0..40 {
            for x in 0..59 {
                if x == 22 {
                    assert_ne!(a.get(x, y), a.get(x + 1, y));
                }
            }
        }
    }

    #[test]
    fn contour_size_mismatch_rejected() {
        let img = two_region_image(10, 10, 5);
        let c = ContourMap::zeros(9, 10);
        assert!(run_scalp(
            &img,
            &ScalpParams {
                k: 4,
                ..Default::default()
            },
            Some(&c)
        )
        .is_err());
        assert!(run_scalp(
            &img,
            &ScalpParams {
                k: 101,
                ..Default::default()
            },
            None
        )
        .is_err());
    }
}
