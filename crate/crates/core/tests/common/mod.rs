//! Brute-force oracles and synthetic fixtures shared by integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use image::{Rgb, RgbImage};
use rand::Rng;
use scalp::LabelMap;

pub const LEFT_COLOR: [u8; 3] = [180, 60, 50];
pub const RIGHT_COLOR: [u8; 3] = [60, 90, 170];

/// Region membership of the synthetic two-region image: a tilted boundary
/// not aligned with any grid line.
pub fn in_left(x: usize, y: usize) -> bool {
    (x as f64) < 37.0 + 0.15 * y as f64
}

pub fn two_region_rgb(w: u32, h: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        Rgb(if in_left(x as usize, y as usize) {
            LEFT_COLOR
        } else {
            RIGHT_COLOR
        })
    })
}

pub fn two_region_gt(w: usize, h: usize) -> LabelMap {
    LabelMap::from_fn(w, h, |x, y| in_left(x, y) as u32)
}

/// Exact one-pixel contour of the two-region image: left-region pixels with
/// a 4-neighbor in the right region.
pub fn two_region_contour(w: usize, h: usize) -> scalp::ContourMap {
    scalp::ContourMap::from_fn(w, h, |x, y| {
        let right = |x: usize, y: usize| !in_left(x, y);
        let edge = in_left(x, y)
            && ((x > 0 && right(x - 1, y))
                || (x + 1 < w && right(x + 1, y))
                || (y > 0 && right(x, y - 1))
                || (y + 1 < h && right(x, y + 1)));
        edge as u8 as f64
    })
    .unwrap()
}

/// Random label map of one of several flavors: Voronoi cells, Voronoi with
/// flipped pixels, or pure noise.
pub fn random_labels(rng: &mut impl Rng, w: usize, h: usize, flavor: usize) -> LabelMap {
    let sites: Vec<(f64, f64)> = (0..rng.random_range(1..10))
        .map(|_| (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64)))
        .collect();
    let voronoi = |x: usize, y: usize| {
        (0..sites.len())
            .min_by(|&a, &b| {
                let da = (x as f64 - sites[a].0).powi(2) + (y as f64 - sites[a].1).powi(2);
                let db = (x as f64 - sites[b].0).powi(2) + (y as f64 - sites[b].1).powi(2);
                da.total_cmp(&db)
            })
            .unwrap() as u32
    };
    match flavor % 3 {
        0 => LabelMap::from_fn(w, h, voronoi),
        1 => {
            let n = sites.len() as u32;
            LabelMap::from_fn(w, h, |x, y| {
                if rng.random_bool(0.1) {
                    rng.random_range(0..n)
                } else {
                    voronoi(x, y)
                }
            })
        }
        _ => LabelMap::from_fn(w, h, |_, _| rng.random_range(0..4)),
    }
}

pub fn asa_oracle(s: &LabelMap, t: &LabelMap) -> f64 {
    let sl: BTreeSet<u32> = s.labels().iter().copied().collect();
    let tl: BTreeSet<u32> = t.labels().iter().copied().collect();
    let mut total = 0;
    for &a in &sl {
        let mut best = 0;
        for &b in &tl {
            let n = s
                .labels()
                .iter()
                .zip(t.labels())
                .filter(|&(&x, &y)| x == a && y == b)
                .count();
            best = best.max(n);
        }
        total += best;
    }
    total as f64 / s.len() as f64
}

pub fn boundary_pixels(l: &LabelMap) -> Vec<(i64, i64)> {
    let (w, h) = (l.width(), l.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = l.get(x, y);
            let mut diff = false;
            for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (qx, qy) = (x as i64 + dx, y as i64 + dy);
                if qx >= 0 && qy >= 0 && (qx as usize) < w && (qy as usize) < h && l.get(qx as usize, qy as usize) != v
                {
                    diff = true;
                }
            }
            if diff {
                out.push((x as i64, y as i64));
            }
        }
    }
    out
}

/// Fraction of `targets` with some `hits` pixel at Euclidean distance < eps.
fn matched(targets: &[(i64, i64)], hits: &[(i64, i64)], eps: f64) -> f64 {
    if targets.is_empty() {
        return 1.0;
    }
    let m = targets
        .iter()
        .filter(|t| {
            hits.iter()
                .any(|h| (((t.0 - h.0).pow(2) + (t.1 - h.1).pow(2)) as f64).sqrt() < eps)
        })
        .count();
    m as f64 / targets.len() as f64
}

pub fn br_oracle(s: &LabelMap, t: &LabelMap, eps: f64) -> f64 {
    matched(&boundary_pixels(t), &boundary_pixels(s), eps)
}

pub fn bp_oracle(s: &LabelMap, t: &LabelMap, eps: f64) -> f64 {
    matched(&boundary_pixels(s), &boundary_pixels(t), eps)
}

pub fn cd_oracle(s: &LabelMap) -> f64 {
    boundary_pixels(s).len() as f64 / s.len() as f64
}

fn orient(a: (i64, i64), b: (i64, i64), q: (i64, i64)) -> i64 {
    (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0)
}

/// Pixels inside the convex hull of `pts`, found from supporting lines: a
/// pixel is inside unless some line through two shape pixels has the whole
/// shape on one side and the pixel strictly on the other.
pub fn hull_pixels_oracle(pts: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
    let set: BTreeSet<(i64, i64)> = pts.iter().copied().collect();
    let border: Vec<(i64, i64)> = set
        .iter()
        .copied()
        .filter(|&(x, y)| {
            [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                .iter()
                .any(|q| !set.contains(q))
        })
        .collect();
    let mut supporting = Vec::new();
    for &a in &border {
        for &b in &border {
            if a == b {
                continue;
            }
            let mut strictly = false;
            let ok = border.iter().all(|&p| {
                let o = orient(a, b, p);
                strictly |= o > 0;
                o >= 0
            });
            if ok && strictly {
                supporting.push((a, b));
            }
        }
    }
    let (x0, x1) = (
        pts.iter().map(|p| p.0).min().unwrap(),
        pts.iter().map(|p| p.0).max().unwrap(),
    );
    let (y0, y1) = (
        pts.iter().map(|p| p.1).min().unwrap(),
        pts.iter().map(|p| p.1).max().unwrap(),
    );
    let mut out = BTreeSet::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let q = (x, y);
            let inside = if supporting.is_empty() {
                // Collinear shape: the hull is the segment spanned by it.
                let (a, b) = (*set.iter().next().unwrap(), *set.iter().next_back().unwrap());
                orient(a, b, q) == 0
            } else {
                supporting.iter().all(|&(a, b)| orient(a, b, q) >= 0)
            };
            if inside {
                out.insert(q);
            }
        }
    }
    out
}

fn perimeter(set: &BTreeSet<(i64, i64)>) -> usize {
    set.iter()
        .map(|&(x, y)| {
            [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                .iter()
                .filter(|q| !set.contains(q))
                .count()
        })
        .sum()
}

fn circularity(set: &BTreeSet<(i64, i64)>) -> f64 {
    let p = perimeter(set) as f64;
    p * p / (4.0 * std::f64::consts::PI * set.len() as f64)
}

pub fn src_oracle(s: &LabelMap) -> f64 {
    let mut members: BTreeMap<u32, Vec<(i64, i64)>> = BTreeMap::new();
    for y in 0..s.height() {
        for x in 0..s.width() {
            members.entry(s.get(x, y)).or_default().push((x as i64, y as i64));
        }
    }
    let total = s.len() as f64;
    let mut sum = 0.0;
    for pts in members.values() {
        let shape: BTreeSet<(i64, i64)> = pts.iter().copied().collect();
        let hull = hull_pixels_oracle(pts);
        let ratio = circularity(&hull) / circularity(&shape);
        let n = pts.len() as f64;
        let mean = |f: fn(&(i64, i64)) -> i64| pts.iter().map(|p| f(p) as f64).sum::<f64>() / n;
        let (mx, my) = (mean(|p| p.0), mean(|p| p.1));
        let std_x = (pts.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum::<f64>() / n).sqrt();
        let std_y = (pts.iter().map(|p| (p.1 as f64 - my).powi(2)).sum::<f64>() / n).sqrt();
        let (sx, sy) = (std_x.sqrt(), std_y.sqrt());
        let balance = if sx.max(sy) == 0.0 {
            1.0
        } else {
            sx.min(sy) / sx.max(sy)
        };
        sum += n / total * ratio * balance;
    }
    sum
}

/// Max F over thresholds of an averaged boundary map, with precision and
/// recall averaged over annotators at each threshold.
pub fn max_f_oracle(avg: &[f64], w: usize, gts: &[LabelMap], eps: f64) -> f64 {
    let thresholds: BTreeSet<u64> = avg.iter().filter(|&&v| v > 0.0).map(|v| v.to_bits()).collect();
    let mut best = 0.0f64;
    for t in thresholds {
        let t = f64::from_bits(t);
        let pred: Vec<(i64, i64)> = avg
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= t)
            .map(|(i, _)| ((i % w) as i64, (i / w) as i64))
            .collect();
        let (mut p, mut r) = (0.0, 0.0);
        for g in gts {
            let gb = boundary_pixels(g);
            p += matched(&pred, &gb, eps);
            r += matched(&gb, &pred, eps);
        }
        let n = gts.len() as f64;
        let (p, r) = (p / n, r / n);
        if p + r > 0.0 {
            best = best.max(2.0 * p * r / (p + r));
        }
    }
    best
}

/// Flood-fill regions of pixels with value below `tau`, 4-connected.
pub fn flood_regions(values: &[f64], w: usize, h: usize, tau: f64) -> Vec<Option<u32>> {
    let mut out = vec![None; w * h];
    let mut next = 0;
    for s in 0..w * h {
        if out[s].is_some() || values[s] >= tau {
            continue;
        }
        out[s] = Some(next);
        let mut stack = vec![s];
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut nb = Vec::new();
            if x > 0 {
                nb.push(p - 1);
            }
            if x + 1 < w {
                nb.push(p + 1);
            }
            if y > 0 {
                nb.push(p - w);
            }
            if y + 1 < h {
                nb.push(p + w);
            }
            for q in nb {
                if out[q].is_none() && values[q] < tau {
                    out[q] = Some(next);
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    out
}

/// Pixel-level simulation of small-region merging: repeatedly take the
/// smallest region under `limit` (ties to lowest label) and relabel it to
/// the neighbor whose shared boundary has the lowest crossing strength,
/// where a crossing between two pixels is rated by the larger of their
/// suppressed contour values.
pub fn merge_oracle(labels: &[u32], w: usize, ucm: &[f64], tau: f64, limit: f64) -> Vec<u32> {
    let mut labels = labels.to_vec();
    let u = |i: usize| if ucm[i] < tau { 0.0 } else { ucm[i] };
    loop {
        let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
        for &l in &labels {
            *sizes.entry(l).or_insert(0) += 1;
        }
        if sizes.len() <= 1 {
            return labels;
        }
        let Some((&a, _)) = sizes
            .iter()
            .filter(|(_, &n)| (n as f64) < limit)
            .min_by_key(|(&l, &n)| (n, l))
        else {
            return labels;
        };
        let mut best: BTreeMap<u32, f64> = BTreeMap::new();
        for p in 0..labels.len() {
            for q in [p + 1, p + w] {
                if q >= labels.len() || (q == p + 1 && q % w == 0) {
                    continue;
                }
                let (lp, lq) = (labels[p], labels[q]);
                let other = match (lp == a, lq == a) {
                    (true, false) => lq,
                    (false, true) => lp,
                    _ => continue,
                };
                let e = best.entry(other).or_insert(f64::INFINITY);
                *e = e.min(u(p).max(u(q)));
            }
        }
        let (&b, _) = best
            .iter()
            .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(y.0)))
            .unwrap();
        for l in labels.iter_mut() {
            if *l == a {
                *l = b;
            }
        }
    }
}

/// Whether two labelings describe the same partition up to renaming.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

/// Direct neighborhood color distance: weights recomputed from scratch over
/// the clipped window.
#[allow(clippy::too_many_arguments)]
pub fn neighborhood_distance_oracle(
    pix: &[[f64; 3]],
    w: usize,
    h: usize,
    x: usize,
    y: usize,
    n: usize,
    sigma: f64,
    feature: &[f64; 3],
) -> f64 {
    let fp = pix[y * w + x];
    let d2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|c| (a[c] - b[c]).powi(2)).sum::<f64>();
    let (mut num, mut z) = (0.0, 0.0);
    for qy in y.saturating_sub(n)..=(y + n).min(h - 1) {
        for qx in x.saturating_sub(n)..=(x + n).min(w - 1) {
            let fq = &pix[qy * w + qx];
            let wt = (-d2(&fp, fq) / (2.0 * sigma * sigma)).exp();
            num += wt * d2(fq, feature);
            z += wt;
        }
    }
    num / z
}

/// Input files for exercising the command-line tool.
pub struct CliFixture {
    pub dir: tempfile::TempDir,
    pub image: std::path::PathBuf,
    pub gt: std::path::PathBuf,
    pub contour: std::path::PathBuf,
    pub ucm: std::path::PathBuf,
    pub volume: std::path::PathBuf,
    pub volume_gt: std::path::PathBuf,
}

impl CliFixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = |name: &str| dir.path().join(name);
        let (w, h) = (64, 48);
        let image = p("scene.png");
        let rgb = two_region_rgb(w as u32, h as u32);
        scalp::io::write_png(&image, &rgb).unwrap();
        let gt = p("scene_gt.csv");
        scalp::io::write_label_map(&gt, &two_region_gt(w, h)).unwrap();
        let contour = p("scene_contour.pgm");
        scalp::io::write_contour_pgm(&contour, &two_region_contour(w, h)).unwrap();
        // Strong contour on both sides of the region border, a weak inner loop.
        let ucm = p("scene_ucm.pgm");
        let band: BTreeSet<(i64, i64)> = boundary_pixels(&two_region_gt(w, h)).into_iter().collect();
        let ucm_values: Vec<f64> = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                if band.contains(&(x as i64, y as i64)) {
                    0.9
                } else if (x == 50 || x == 58) && (10..=20).contains(&y)
                    || (y == 10 || y == 20) && (50..=58).contains(&x)
                {
                    0.2
                } else {
                    0.0
                }
            })
            .collect();
        scalp::io::write_unit_pgm(&ucm, w, h, &ucm_values).unwrap();
        let volume = p("vol.json");
        let vol =
            scalp::supervoxel::Volume::from_fn(16, 16, 8, |x, y, z| if x + y / 4 + z / 2 < 9 { 20.0 } else { 80.0 })
                .unwrap();
        scalp::supervoxel::write_volume(&volume, &vol).unwrap();
        let volume_gt = p("vol_gt.json");
        let mut gt3 = Vec::new();
        for z in 0..8 {
            for y in 0..16 {
                for x in 0..16 {
                    gt3.push((x + y / 4 + z / 2 >= 9) as u32);
                }
            }
        }
        scalp::supervoxel::write_label_volume(&volume_gt, &LabelMap::new_3d(16, 16, 8, gt3).unwrap()).unwrap();
        CliFixture {
            dir,
            image,
            gt,
            contour,
            ucm,
            volume,
            volume_gt,
        }
    }

    pub fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }
}

pub fn scalp_bin() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_scalp"))
}

/// Runs the tool and panics with its stderr on failure.
pub fn run_ok(args: &[&std::ffi::OsStr]) -> Vec<u8> {
    let out = scalp_bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "scalp {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// Every command with fixed flags, each writing into `out`. Returns the
/// produced files in a fixed order.
pub fn run_all_commands(fx: &CliFixture, out: &std::path::Path) -> Vec<std::path::PathBuf> {
    use std::ffi::OsStr;
    std::fs::create_dir_all(out).unwrap();
    let o = |n: &str| out.join(n);
    let s = |x: &std::path::Path| x.as_os_str().to_owned();
    let arg = |x: &str| OsStr::new(x).to_owned();
    let cmds: Vec<Vec<std::ffi::OsString>> = vec![
        vec![
            arg("decompose"),
            s(&fx.image),
            arg("--k"),
            arg("30"),
            arg("--seed"),
            arg("7"),
            arg("--noise-var"),
            arg("20"),
            arg("--contour"),
            s(&fx.contour),
            arg("--out-labels"),
            s(&o("d.pgm")),
            arg("--out-overlay"),
            s(&o("d.png")),
        ],
        vec![
            arg("prior"),
            s(&fx.image),
            arg("--scales"),
            arg("10,20,40"),
            arg("--out"),
            s(&o("p.pgm")),
            arg("--out-average"),
            s(&o("pa.pgm")),
        ],
        vec![
            arg("hc"),
            s(&fx.image),
            arg("--ucm"),
            s(&fx.ucm),
            arg("--k"),
            arg("25"),
            arg("--seed"),
            arg("3"),
            arg("--out-labels"),
            s(&o("h.csv")),
            arg("--out-regions"),
            s(&o("hr.pgm")),
            arg("--out-overlay"),
            s(&o("h.png")),
        ],
        vec![
            arg("metrics"),
            arg("--labels"),
            s(&o("d.pgm")),
            arg("--gt"),
            s(&fx.gt),
            arg("--pr-map"),
            s(&o("pa.pgm")),
            arg("--out"),
            s(&o("m.csv")),
        ],
        vec![
            arg("decompose3d"),
            s(&fx.volume),
            arg("--k"),
            arg("8"),
            arg("--out-labels"),
            s(&o("v.json")),
        ],
    ];
    for c in &cmds {
        let refs: Vec<&OsStr> = c.iter().map(|x| x.as_os_str()).collect();
        run_ok(&refs);
    }
    [
        "d.pgm", "d.png", "p.pgm", "pa.pgm", "h.csv", "hr.pgm", "h.png", "m.csv", "v.json", "v.raw",
    ]
    .iter()
    .map(|n| o(n))
    .collect()
}
