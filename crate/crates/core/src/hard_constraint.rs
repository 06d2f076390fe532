//! Region-constrained decomposition driven by a hierarchical contour map:
//! threshold the map into closed regions, merge regions that are too small,
//! seed each region with a spatial K-means split, then cluster with every
//! superpixel confined to its region.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{init_from_labels, Engine};
use crate::error::{Result, ScalpError};
use crate::types::{ContourMap, Dims, LabImage, LabelMap, ScalpParams};

/// Default contour threshold.
pub const DEFAULT_TAU: f64 = 0.4;
/// Default fraction of the mean superpixel size below which regions merge.
pub const DEFAULT_MERGE_FRACTION: f64 = 0.15;

/// Per-pixel contour probability of a hierarchical segmentation. Any
/// threshold of such a map closes into regions once its contour pixels are
/// absorbed, so no further validation is needed beyond the value range.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl HierarchicalMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let dims = Dims::new_2d(width, height);
        dims.check_nonempty()?;
        if data.len() != dims.len() {
            return Err(ScalpError::dims(dims.len(), data.len()));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ScalpError::InvalidData(format!("contour value {v} outside [0, 1]")));
        }
        Ok(HierarchicalMap { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let data = (0..width * height).map(|i| f(i % width, i / width)).collect();
        Self::new(width, height, data)
    }

    /// Reads an 8/16-bit grayscale PNG or PGM.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (w, h, data) = crate::io::read_gray_normalized(path)?;
        Self::new(w, h, data)
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

    /// Value after suppressing everything below `tau`.
    fn suppressed(&self, idx: usize, tau: f64) -> f64 {
        let v = self.data[idx];
        if v < tau {
            0.0
        } else {
            v
        }
    }
}

/// A partition of the image into regions with compact labels, their sizes
/// and the 4-neighbor pixel pairs along each shared boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    dims: Dims,
    labels: Vec<u32>,
    sizes: Vec<usize>,
    /// Keyed by `(a, b)` with `a < b`; pairs are `(pixel in a, pixel in b)`.
    adjacency: BTreeMap<(u32, u32), Vec<(usize, usize)>>,
    /// Contour threshold the partition was built with; 0 when unknown.
    tau: f64,
}

impl RegionPartition {
    /// Builds a partition from any labelling. Labels are renumbered by first
    /// appearance in scan order.
    pub fn from_labels(dims: Dims, labels: &[u32]) -> Result<Self> {
        dims.check_nonempty()?;
        if dims.is_volume() {
            return Err(ScalpError::InvalidData("region partitions are planar".into()));
        }
        let map = LabelMap::from_dims(dims, labels.to_vec())?.compacted();
        let labels = map.into_labels();
        let mut sizes = vec![0usize; labels.iter().max().map_or(0, |&m| m as usize + 1)];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let mut adjacency: BTreeMap<(u32, u32), Vec<(usize, usize)>> = BTreeMap::new();
        let w = dims.width;
        for p in 0..labels.len() {
            let right = (p % w + 1 < w).then_some(p + 1);
            let down = (p + w < labels.len()).then_some(p + w);
            for q in [right, down].into_iter().flatten() {
                let (a, b) = (labels[p], labels[q]);
                if a < b {
                    adjacency.entry((a, b)).or_default().push((p, q));
                } else if b < a {
                    adjacency.entry((b, a)).or_default().push((q, p));
                }
            }
        }
        Ok(RegionPartition {
            dims,
            labels,
            sizes,
            adjacency,
            tau: 0.0,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn region_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn label_map(&self) -> LabelMap {
        LabelMap::from_dims(self.dims, self.labels.clone()).expect("partition labels match dims")
    }

    /// Regions sharing a boundary with `region`, ascending.
    pub fn neighbors(&self, region: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .adjacency
            .keys()
            .filter_map(|&(a, b)| {
                if a == region {
                    Some(b)
                } else if b == region {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Pixel pairs `(in a, in b)` along the boundary of `a` and `b`.
    pub fn boundary(&self, a: u32, b: u32) -> Option<Vec<(usize, usize)>> {
        if a < b {
            self.adjacency.get(&(a, b)).cloned()
        } else {
            self.adjacency
                .get(&(b, a))
                .map(|v| v.iter().map(|&(p, q)| (q, p)).collect())
        }
    }

    pub fn adjacent_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.keys().copied()
    }

    /// Number of 4-neighbor pixel pairs in different regions that `labels`
    /// puts in the same superpixel. Zero when `labels` respects the partition.
    pub fn crossing_pairs(&self, labels: &LabelMap) -> usize {
        self.adjacency
            .values()
            .flatten()
            .filter(|&&(p, q)| labels.labels()[p] == labels.labels()[q])
            .count()
    }
}

/// Splits the image along contour pixels with `U >= tau` (and `U > 0`).
/// Contour pixels are then absorbed in waves into the adjacent region holding
/// most of their 4-neighbors, ties to the lowest label. A map without any
/// region pixel yields a single region.
pub fn threshold_regions(ucm: &HierarchicalMap, tau: f64) -> Result<RegionPartition> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(ScalpError::param(format!("tau = {tau} outside [0, 1]")));
    }
    let dims = ucm.dims();
    let (w, n) = (dims.width, dims.len());
    const NONE: u32 = u32::MAX;
    let is_contour = |i: usize| ucm.data[i] > 0.0 && ucm.data[i] >= tau;
    let mut labels = vec![NONE; n];
    let mut next = 0u32;
    let mut stack = Vec::new();
    let mut nb = Vec::with_capacity(4);
    for start in 0..n {
        if labels[start] != NONE || is_contour(start) {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            dims.face_neighbors(p, &mut nb);
            for &q in &nb {
                if labels[q] == NONE && !is_contour(q) {
                    labels[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    if next == 0 {
        labels.fill(0);
    }
    let mut pending: Vec<usize> = (0..n).filter(|&i| labels[i] == NONE).collect();
    while !pending.is_empty() {
        let mut updates = Vec::new();
        let mut rest = Vec::new();
        for &p in &pending {
            dims.face_neighbors(p, &mut nb);
            let mut votes: Vec<u32> = nb.iter().map(|&q| labels[q]).filter(|&l| l != NONE).collect();
            if votes.is_empty() {
                rest.push(p);
                continue;
            }
            votes.sort_unstable();
            let mut best = (0usize, NONE);
            let mut i = 0;
            while i < votes.len() {
                let j = votes[i..].iter().take_while(|&&v| v == votes[i]).count();
                if j > best.0 {
                    best = (j, votes[i]);
                }
                i += j;
            }
            updates.push((p, best.1));
        }
        for (p, l) in updates {
            labels[p] = l;
        }
        pending = rest;
    }
    debug_assert!(labels.iter().all(|&l| l != NONE) || w == 0);
    let mut part = RegionPartition::from_labels(dims, &labels)?;
    part.tau = tau;
    Ok(part)
}

/// Strength of a shared boundary: the weakest crossing, where a crossing is
/// rated by the stronger of its two pixels in the suppressed map.
fn boundary_strength(ucm: &HierarchicalMap, tau: f64, pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .map(|&(p, q)| ucm.suppressed(p, tau).max(ucm.suppressed(q, tau)))
        .fold(f64::INFINITY, f64::min)
}

/// Repeatedly merges the smallest region with fewer than `s * t` pixels into
/// the neighbor sharing its weakest boundary (ties to the lowest label),
/// until no region is below the limit or one region remains.
pub fn merge_small_regions(
    partition: &RegionPartition,
    ucm: &HierarchicalMap,
    s: f64,
    t: f64,
) -> Result<RegionPartition> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ScalpError::param(format!("t = {t} outside [0, 1]")));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(ScalpError::param(format!("mean superpixel size {s} must be positive")));
    }
    if ucm.dims() != partition.dims {
        return Err(ScalpError::dims(partition.dims, ucm.dims()));
    }
    let limit = s * t;
    let n = partition.region_count();
    let mut sizes = partition.sizes.clone();
    let mut alive = vec![true; n];
    let mut owner: Vec<u32> = (0..n as u32).collect();
    let mut strength: BTreeMap<(u32, u32), f64> = partition
        .adjacency
        .iter()
        .map(|(&k, pairs)| (k, boundary_strength(ucm, partition.tau, pairs)))
        .collect();
    let mut remaining = n;
    while remaining > 1 {
        let small = (0..n)
            .filter(|&r| alive[r] && (sizes[r] as f64) < limit)
            .min_by_key(|&r| (sizes[r], r));
        let Some(a) = small else { break };
        let a = a as u32;
        let target = strength
            .iter()
            .filter_map(|(&(x, y), &v)| {
                if x == a {
                    Some((y, v))
                } else if y == a {
                    Some((x, v))
                } else {
                    None
                }
            })
            .min_by(|l, r| l.1.total_cmp(&r.1).then(l.0.cmp(&r.0)));
        let Some((b, _)) = target else { break };
        let keys: Vec<(u32, u32)> = strength.keys().copied().filter(|&(x, y)| x == a || y == a).collect();
        for k in keys {
            let v = strength.remove(&k).expect("key present");
            let other = if k.0 == a { k.1 } else { k.0 };
            if other == b {
                continue;
            }
            let nk = (b.min(other), b.max(other));
            let e = strength.entry(nk).or_insert(f64::INFINITY);
            *e = e.min(v);
        }
        sizes[b as usize] += sizes[a as usize];
        sizes[a as usize] = 0;
        alive[a as usize] = false;
        for o in owner.iter_mut() {
            if *o == a {
                *o = b;
            }
        }
        remaining -= 1;
    }
    let labels: Vec<u32> = partition.labels.iter().map(|&l| owner[l as usize]).collect();
    let mut out = RegionPartition::from_labels(partition.dims, &labels)?;
    out.tau = partition.tau;
    Ok(out)
}

/// Independent K-means runs per region, the lowest inertia wins. Large
/// regions get fewer runs so that points times clusters times runs stays
/// near `KMEANS_WORK_BUDGET`.
const KMEANS_RESTARTS: usize = 4;
const KMEANS_WORK_BUDGET: usize = 20_000_000;
const KMEANS_MAX_ITERATIONS: usize = 30;

/// K-means on pixel coordinates with k-means++ seeding, best of several
/// runs. Returns the cluster index of every point, clusters renumbered by
/// first appearance to drop empty ones.
fn spatial_kmeans(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut best: Option<(f64, Vec<u32>)> = None;
    let runs = (KMEANS_WORK_BUDGET / (points.len() * k).max(1)).clamp(1, KMEANS_RESTARTS);
    for _ in 0..runs {
        let (inertia, assign) = lloyd(points, k, rng);
        if best.as_ref().is_none_or(|b| inertia < b.0) {
            best = Some((inertia, assign));
        }
    }
    let mut assign = best.expect("at least one run").1;
    let mut remap = vec![u32::MAX; k];
    let mut next = 0;
    for a in assign.iter_mut() {
        if remap[*a as usize] == u32::MAX {
            remap[*a as usize] = next;
            next += 1;
        }
        *a = remap[*a as usize];
    }
    assign
}

fn lloyd(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<u32>) {
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut nearest: Vec<f64> = points.iter().map(|&p| d2(p, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if u < d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick]);
        for (d, &p) in nearest.iter_mut().zip(points) {
            *d = d.min(d2(p, points[pick]));
        }
    }
    let mut assign = vec![0u32; points.len()];
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        for (a, &p) in assign.iter_mut().zip(points) {
            let best = (0..centers.len())
                .min_by(|&i, &j| d2(p, centers[i]).total_cmp(&d2(p, centers[j])).then(i.cmp(&j)))
                .expect("at least one center") as u32;
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        let mut sum = vec![[0.0f64; 2]; centers.len()];
        let mut count = vec![0usize; centers.len()];
        for (&a, &p) in assign.iter().zip(points) {
            sum[a as usize][0] += p[0];
            sum[a as usize][1] += p[1];
            count[a as usize] += 1;
        }
        for (c, (s, &m)) in centers.iter_mut().zip(sum.iter().zip(&count)) {
            if m > 0 {
                *c = [s[0] / m as f64, s[1] / m as f64];
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = assign
        .iter()
        .zip(points)
        .map(|(&a, &p)| d2(p, centers[a as usize]))
        .sum();
    (inertia, assign)
}

/// Splits every region with `floor(size / s) >= 2` into that many parts by
/// K-means on pixel coordinates. Each region draws from its own generator
/// derived from `seed`, so results do not depend on processing order.
pub fn partition_regions(partition: &RegionPartition, s: f64, seed: u64) -> Result<RegionPartition> {
    if !(s.is_finite() && s > 0.0) {
        return Err(ScalpError::param(format!("mean superpixel size {s} must be positive")));
    }
    let w = partition.dims.width;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); partition.region_count()];
    for (i, &l) in partition.labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    let mut labels = vec![0u32; partition.labels.len()];
    let mut next = 0u32;
    for (r, pix) in members.iter().enumerate() {
        let parts = (pix.len() as f64 / s).floor() as usize;
        if parts < 2 {
            for &i in pix {
                labels[i] = next;
            }
            next += 1;
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let points: Vec<[f64; 2]> = pix.iter().map(|&i| [(i % w) as f64, (i / w) as f64]).collect();
        let assign = spatial_kmeans(&points, parts, &mut rng);
        let used = assign.iter().max().map_or(0, |&m| m + 1);
        for (&i, &a) in pix.iter().zip(&assign) {
            labels[i] = next + a;
        }
        next += used;
    }
    let mut out = RegionPartition::from_labels(partition.dims, &labels)?;
    out.tau = partition.tau;
    Ok(out)
}

/// How the region partition is used during clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// Superpixels never leave the region they were seeded in.
    #[default]
    Hard,
    /// Regions only provide the initial clusters.
    InitOnly,
}

#[derive(Debug, Clone)]
pub struct HcOutput {
    pub labels: LabelMap,
    /// Regions after thresholding and merging.
    pub regions: RegionPartition,
    /// Initial clusters after K-means splitting.
    pub seeds: RegionPartition,
}

/// Full region-constrained pipeline: threshold at `tau`, merge below `t`
/// times the mean superpixel size, split large regions and cluster.
pub fn run_scalp_hc(
    image: &LabImage,
    params: &ScalpParams,
    contour: Option<&ContourMap>,
    ucm: &HierarchicalMap,
    tau: f64,
    t: f64,
    mode: ConstraintMode,
) -> Result<HcOutput> {
    let dims = image.dims();
    if ucm.dims() != dims {
        return Err(ScalpError::dims(dims, ucm.dims()));
    }
    if let Some(c) = contour {
        if c.dims() != dims {
            return Err(ScalpError::dims(dims, c.dims()));
        }
    }
    params.validate(dims.len())?;
    let s = dims.len() as f64 / params.k as f64;
    let regions = merge_small_regions(&threshold_regions(ucm, tau)?, ucm, s, t)?;
    let seeds = partition_regions(&regions, s, params.rng_seed)?;
    let region_mask = match mode {
        ConstraintMode::Hard => Some(regions.labels()),
        ConstraintMode::InitOnly => None,
    };
    let engine = Engine::new(dims, image.pixels(), contour.map(|c| c.values()), region_mask, params)?;
    let state = init_from_labels(&seeds.label_map(), image.pixels(), region_mask, params.k)?;
    let labels = engine.run(state);
    Ok(HcOutput { labels, regions, seeds })
}
