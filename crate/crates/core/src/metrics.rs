//! Decomposition quality metrics: achievable segmentation accuracy, boundary
//! recall, contour density, shape regularity and boundary precision-recall.
//!
//! Boundary pixels are those with at least one face neighbor carrying a
//! different label, the same definition used by the contour prior builder.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::connectivity::boundary_mask;
use crate::error::{Result, ScalpError};
use crate::types::{Dims, LabelMap};

/// Per-pixel boundary strength. Maps built from a single decomposition hold
/// 0 or 1; multi-scale averages hold fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMap {
    dims: Dims,
    values: Vec<f64>,
}

impl BoundaryMap {
    pub fn new(dims: Dims, values: Vec<f64>) -> Result<Self> {
        dims.check_nonempty()?;
        if values.len() != dims.len() {
            return Err(ScalpError::dims(dims.len(), values.len()));
        }
        Ok(BoundaryMap { dims, values })
    }

    pub fn from_labels(labels: &LabelMap) -> Self {
        let values = boundary_mask(labels.dims(), labels.labels())
            .into_iter()
            .map(|b| if b { 1.0 } else { 0.0 })
            .collect();
        BoundaryMap {
            dims: labels.dims(),
            values,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// Boolean mask of pixels with strength `>= threshold` (and nonzero).
    pub fn mask_at(&self, threshold: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v > 0.0 && v >= threshold).collect()
    }
}

/// Human annotations of one image.
#[derive(Debug, Clone)]
pub struct GroundTruthSet {
    maps: Vec<LabelMap>,
}

impl GroundTruthSet {
    pub fn new(maps: Vec<LabelMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| ScalpError::InvalidData("ground truth set is empty".into()))?;
        if let Some(bad) = maps.iter().find(|m| m.dims() != first.dims()) {
            return Err(ScalpError::dims(first.dims(), bad.dims()));
        }
        Ok(GroundTruthSet { maps })
    }

    pub fn single(map: LabelMap) -> Self {
        GroundTruthSet { maps: vec![map] }
    }

    pub fn maps(&self) -> &[LabelMap] {
        &self.maps
    }

    pub fn dims(&self) -> Dims {
        self.maps[0].dims()
    }

    /// Arithmetic mean of `metric` over annotators.
    pub fn mean_of(&self, mut metric: impl FnMut(&LabelMap) -> Result<f64>) -> Result<f64> {
        let mut sum = 0.0;
        for m in &self.maps {
            sum += metric(m)?;
        }
        Ok(sum / self.maps.len() as f64)
    }
}

fn check_same(a: &LabelMap, b: &LabelMap) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(ScalpError::dims(a.dims(), b.dims()));
    }
    Ok(())
}

/// Achievable segmentation accuracy: the fraction of pixels covered when
/// every superpixel is assigned to the ground-truth region it overlaps most.
/// Works on planar maps and volumes.
pub fn asa(s: &LabelMap, t: &LabelMap) -> Result<f64> {
    check_same(s, t)?;
    let mut overlap: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for (&a, &b) in s.labels().iter().zip(t.labels()) {
        *overlap.entry((a, b)).or_insert(0) += 1;
    }
    let mut best: BTreeMap<u32, usize> = BTreeMap::new();
    for (&(a, _), &n) in &overlap {
        let e = best.entry(a).or_insert(0);
        *e = (*e).max(n);
    }
    let total: usize = best.values().sum();
    Ok(total as f64 / s.len() as f64)
}

/// Planar offsets with Euclidean norm strictly below `epsilon`.
fn tolerance_offsets(epsilon: f64) -> Vec<(isize, isize)> {
    let r = epsilon.ceil().max(0.0) as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64) < epsilon * epsilon {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Fraction of `targets` pixels having a `hits` pixel within distance `< epsilon`.
/// An empty target set counts as fully matched.
fn matched_fraction(dims: Dims, targets: &[bool], hits: &[bool], epsilon: f64) -> f64 {
    let offsets = tolerance_offsets(epsilon);
    let (w, h) = (dims.width as isize, dims.height as isize);
    let mut total = 0usize;
    let mut matched = 0usize;
    for (i, _) in targets.iter().enumerate().filter(|(_, &t)| t) {
        total += 1;
        let (x, y) = ((i % dims.width) as isize, (i / dims.width) as isize);
        let found = offsets.iter().any(|&(dx, dy)| {
            let (qx, qy) = (x + dx, y + dy);
            qx >= 0 && qy >= 0 && qx < w && qy < h && hits[(qy * w + qx) as usize]
        });
        if found {
            matched += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        matched as f64 / total as f64
    }
}

/// Boundary recall: fraction of ground-truth boundary pixels with a
/// decomposition boundary pixel at distance `< epsilon`. A ground truth
/// without boundaries yields 1.
pub fn boundary_recall(s: &LabelMap, t: &LabelMap, epsilon: f64) -> Result<f64> {
    check_same(s, t)?;
    let bs = boundary_mask(s.dims(), s.labels());
    let bt = boundary_mask(t.dims(), t.labels());
    Ok(matched_fraction(s.dims(), &bt, &bs, epsilon))
}

/// Boundary precision: fraction of decomposition boundary pixels with a
/// ground-truth boundary pixel at distance `< epsilon`.
pub fn boundary_precision(s: &LabelMap, t: &LabelMap, epsilon: f64) -> Result<f64> {
    check_same(s, t)?;
    let bs = boundary_mask(s.dims(), s.labels());
    let bt = boundary_mask(t.dims(), t.labels());
    Ok(matched_fraction(s.dims(), &bs, &bt, epsilon))
}

/// Boundary pixels over total pixels.
pub fn contour_density(s: &LabelMap) -> f64 {
    let b = boundary_mask(s.dims(), s.labels());
    b.iter().filter(|&&v| v).count() as f64 / s.len() as f64
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of integer points, counter-clockwise, without collinear
/// vertices. Degenerate inputs give one or two vertices.
pub(crate) fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn in_hull(hull: &[(i64, i64)], q: (i64, i64)) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == q,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross(a, b, q) == 0
                && q.0 >= a.0.min(b.0)
                && q.0 <= a.0.max(b.0)
                && q.1 >= a.1.min(b.1)
                && q.1 <= a.1.max(b.1)
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], q) >= 0),
    }
}

/// Number of pixel edges of `set` facing a pixel outside it.
fn exposed_edges(set: &std::collections::HashSet<(i64, i64)>) -> usize {
    set.iter()
        .map(|&(x, y)| {
            [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                .iter()
                .filter(|q| !set.contains(q))
                .count()
        })
        .sum()
}

fn compactness(perimeter: usize, area: usize) -> f64 {
    (perimeter * perimeter) as f64 / (4.0 * std::f64::consts::PI * area as f64)
}

/// Shape regularity terms of one superpixel: hull compactness ratio and
/// spread balance.
pub(crate) fn shape_terms(points: &[(i64, i64)]) -> (f64, f64) {
    use std::collections::HashSet;
    let shape: HashSet<(i64, i64)> = points.iter().copied().collect();
    let hull = convex_hull(points);
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let mut hull_set = HashSet::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if in_hull(&hull, (x, y)) {
                hull_set.insert((x, y));
            }
        }
    }
    let ratio = compactness(exposed_edges(&hull_set), hull_set.len()) / compactness(exposed_edges(&shape), shape.len());

    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let sx = (points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (points.iter().map(|p| (p.1 as f64 - my).powi(2)).sum::<f64>() / n).sqrt();
    // Spread per axis is the square root of the standard deviation.
    let (sx, sy) = (sx.sqrt(), sy.sqrt());
    let hi = sx.max(sy);
    let balance = if hi == 0.0 { 1.0 } else { sx.min(sy) / hi };
    (ratio, balance)
}

/// Shape regularity criterion: size-weighted mean over superpixels of the
/// hull/shape compactness ratio times the x/y spread balance. Perfectly
/// convex, isotropic superpixels score 1.
pub fn shape_regularity(s: &LabelMap) -> f64 {
    let dims = s.dims();
    let mut members: BTreeMap<u32, Vec<(i64, i64)>> = BTreeMap::new();
    for (i, &l) in s.labels().iter().enumerate() {
        members
            .entry(l)
            .or_default()
            .push(((i % dims.width) as i64, (i / dims.width % dims.height) as i64));
    }
    let total = s.len() as f64;
    members
        .values()
        .map(|pts| {
            let (ratio, balance) = shape_terms(pts);
            pts.len() as f64 / total * ratio * balance
        })
        .sum()
}

/// One operating point of a boundary precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    /// Points ordered by decreasing threshold.
    pub points: Vec<PrPoint>,
    pub max_f: f64,
    pub best_threshold: f64,
}

pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Sweeps every distinct nonzero strength of `avg_boundary` as a threshold.
/// At each threshold precision and recall are averaged over annotators and
/// the F-measure is taken from those means. Thresholds that select no pixel
/// are skipped.
pub fn pr_curve(avg_boundary: &BoundaryMap, gts: &GroundTruthSet, epsilon: f64) -> Result<PrCurve> {
    if avg_boundary.dims() != gts.dims() {
        return Err(ScalpError::dims(gts.dims(), avg_boundary.dims()));
    }
    let dims = avg_boundary.dims();
    let gt_masks: Vec<Vec<bool>> = gts.maps().iter().map(|m| boundary_mask(m.dims(), m.labels())).collect();
    let mut thresholds: Vec<f64> = avg_boundary.values().iter().copied().filter(|&v| v > 0.0).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).expect("finite boundary strengths"));
    thresholds.dedup();

    let mut points = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        let pred = avg_boundary.mask_at(t);
        if !pred.iter().any(|&b| b) {
            continue;
        }
        let mut p_sum = 0.0;
        let mut r_sum = 0.0;
        for gt in &gt_masks {
            p_sum += matched_fraction(dims, &pred, gt, epsilon);
            r_sum += matched_fraction(dims, gt, &pred, epsilon);
        }
        let n = gt_masks.len() as f64;
        let (precision, recall) = (p_sum / n, r_sum / n);
        points.push(PrPoint {
            threshold: t,
            precision,
            recall,
            f_measure: f_measure(precision, recall),
        });
    }
    let (max_f, best_threshold) = points.iter().fold((0.0, 0.0), |acc, p| {
        if p.f_measure > acc.0 {
            (p.f_measure, p.threshold)
        } else {
            acc
        }
    });
    Ok(PrCurve {
        points,
        max_f,
        best_threshold,
    })
}

/// Metrics of one decomposition against all annotators of its image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageMetrics {
    pub superpixels: usize,
    pub ground_truths: usize,
    pub asa: f64,
    pub br: f64,
    pub cd: f64,
    pub src: f64,
}

/// ASA and BR are averaged over annotators; CD and SRC depend only on `s`.
pub fn evaluate(s: &LabelMap, gts: &GroundTruthSet, epsilon: f64) -> Result<ImageMetrics> {
    Ok(ImageMetrics {
        superpixels: s.label_count(),
        ground_truths: gts.maps().len(),
        asa: gts.mean_of(|t| asa(s, t))?,
        br: gts.mean_of(|t| boundary_recall(s, t, epsilon))?,
        cd: contour_density(s),
        src: shape_regularity(s),
    })
}
