//! Command-line front end.
//!
//! Every option can also come from a JSON config file given with `--config`:
//! an object whose keys are the long option names without the leading dashes
//! (`"k"`, `"m2-scale"`, `"out-labels"`, ...). Options given on the command
//! line win over the config file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::clustering::run_scalp;
use crate::color::rgb_to_lab;
use crate::contour_prior::{self, DEFAULT_PRIOR_THRESHOLD, DEFAULT_SCALES};
use crate::error::{Result, ScalpError};
use crate::hard_constraint::{self, ConstraintMode, HierarchicalMap, DEFAULT_MERGE_FRACTION, DEFAULT_TAU};
use crate::io;
use crate::metrics::{self, BoundaryMap, GroundTruthSet};
use crate::noise::add_gaussian_noise;
use crate::report::{self, MetricsRow};
use crate::supervoxel;
use crate::types::{ContourMap, LabImage, LabelMap, PathCache, ScalpParams};

const OVERLAY_COLOR: [u8; 3] = [255, 0, 0];

#[derive(Debug, Parser)]
#[command(
    name = "scalp",
    version,
    about = "Superpixel and supervoxel decomposition with evaluation tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose one or more images into superpixels.
    Decompose(DecomposeArgs),
    /// Build a multi-scale boundary prior from an image.
    Prior(PriorArgs),
    /// Decompose an image under a hierarchical contour map constraint.
    Hc(HcArgs),
    /// Evaluate label maps against ground truth.
    Metrics(MetricsArgs),
    /// Decompose a volume into supervoxels.
    Decompose3d(Decompose3dArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathCacheArg {
    Off,
    Exact,
    Approximate,
}

impl From<PathCacheArg> for PathCache {
    fn from(v: PathCacheArg) -> Self {
        match v {
            PathCacheArg::Off => PathCache::Off,
            PathCacheArg::Exact => PathCache::Exact,
            PathCacheArg::Approximate => PathCache::Approximate,
        }
    }
}

/// Decomposition parameters shared by all decomposing commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// JSON config file supplying any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target number of superpixels [default: 250].
    #[arg(long)]
    pub k: Option<usize>,
    /// Compactness: m^2 = m2_scale * r^2 [default: 0.075].
    #[arg(long)]
    pub m2_scale: Option<f64>,
    /// Weight of the pixel's own color distance [default: 0.5].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Contour prior weight [default: 50; 0 for volumes].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Neighborhood radius [default: 3].
    #[arg(long)]
    pub n: Option<usize>,
    /// Neighborhood color bandwidth [default: 40].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Clustering iterations [default: 5].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Random seed for noise and region splitting [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Path distance reuse [default: off].
    #[arg(long, value_enum)]
    pub path_cache: Option<PathCacheArg>,
}

const PARAM_KEYS: [&str; 9] = [
    "k",
    "m2-scale",
    "lambda",
    "gamma",
    "n",
    "sigma",
    "iters",
    "seed",
    "path-cache",
];

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Input images (PNG or PPM).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Contour prior map (8/16-bit grayscale); single input only.
    #[arg(long)]
    pub contour: Option<PathBuf>,
    /// Directory holding `<stem>.png` or `<stem>.pgm` contour maps per input.
    #[arg(long)]
    pub contour_dir: Option<PathBuf>,
    /// Variance of Gaussian noise added to the input before decomposition.
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Label output, `.csv` for CSV, otherwise 16-bit PGM; single input only.
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    /// Boundary overlay PNG; single input only.
    #[arg(long)]
    pub out_overlay: Option<PathBuf>,
    /// Output directory receiving `<stem>.pgm` and `<stem>_overlay.png` per input.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Comma-separated superpixel counts [default: 25,50,100,200,...,1000].
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<usize>>,
    /// Values of the averaged boundary map below this are zeroed [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Thresholded prior as 16-bit PGM.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Unthresholded average as 16-bit PGM.
    #[arg(long)]
    pub out_average: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HcArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Hierarchical contour map (8/16-bit grayscale).
    #[arg(long)]
    pub ucm: Option<PathBuf>,
    /// Contour threshold [default: 0.4].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Merge regions smaller than t times the mean superpixel size [default: 0.15].
    #[arg(long)]
    pub t: Option<f64>,
    /// Use regions only to initialize clusters instead of confining them.
    #[arg(long)]
    pub init_only: bool,
    /// Contour prior map.
    #[arg(long)]
    pub contour: Option<PathBuf>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    #[arg(long)]
    pub out_overlay: Option<PathBuf>,
    /// Region partition after thresholding and merging.
    #[arg(long)]
    pub out_regions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// JSON config file supplying any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Label maps to evaluate (comma-separated or repeated). `.json` paths
    /// are label volumes and get ASA only.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<PathBuf>,
    /// Ground truth: one comma-separated annotator group per label map, or a
    /// single group shared by all.
    #[arg(long)]
    pub gt: Vec<String>,
    /// Boundary matching tolerance in pixels (strict) [default: 2].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Averaged boundary maps for precision-recall, one per label map.
    #[arg(long, value_delimiter = ',')]
    pub pr_map: Vec<PathBuf>,
    /// Report format [default: from --out extension, else csv].
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Report file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Decompose3dArgs {
    /// Volume JSON header.
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Single-channel contour volume header with values in [0, 1].
    #[arg(long)]
    pub contour: Option<PathBuf>,
    /// Label volume JSON header; samples go to a sibling `.raw` file.
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
}

/// Options read from a JSON config file.
struct Config {
    source: Option<PathBuf>,
    map: Map<String, Value>,
}

impl Config {
    fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Config {
                source: None,
                map: Map::new(),
            });
        };
        let text = std::fs::read_to_string(path).map_err(|e| ScalpError::io(path, e))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| ScalpError::Format(format!("{}: {e}", path.display())))?;
        let Value::Object(map) = value else {
            return Err(ScalpError::Format(format!(
                "{}: config must be a JSON object",
                path.display()
            )));
        };
        if let Some(bad) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ScalpError::Format(format!(
                "{}: unknown option {bad:?}",
                path.display()
            )));
        }
        Ok(Config {
            source: Some(path.to_path_buf()),
            map,
        })
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| {
                let src = self.source.as_deref().unwrap_or(Path::new("config"));
                ScalpError::Format(format!("{}: option {key:?}: {e}", src.display()))
            }),
        }
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn pick_vec<T: DeserializeOwned>(&self, flag: Vec<T>, key: &str) -> Result<Vec<T>> {
        if flag.is_empty() {
            Ok(self.get(key)?.unwrap_or_default())
        } else {
            Ok(flag)
        }
    }
}

fn keys<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    PARAM_KEYS.iter().copied().chain(extra.iter().copied()).collect()
}

impl ParamFlags {
    fn resolve(&self, cfg: &Config, defaults: ScalpParams) -> Result<ScalpParams> {
        Ok(ScalpParams {
            k: cfg.pick(self.k, "k")?.unwrap_or(defaults.k),
            m2_scale: cfg.pick(self.m2_scale, "m2-scale")?.unwrap_or(defaults.m2_scale),
            lambda: cfg.pick(self.lambda, "lambda")?.unwrap_or(defaults.lambda),
            gamma: cfg.pick(self.gamma, "gamma")?.unwrap_or(defaults.gamma),
            n: cfg.pick(self.n, "n")?.unwrap_or(defaults.n),
            sigma: cfg.pick(self.sigma, "sigma")?.unwrap_or(defaults.sigma),
            iterations: cfg.pick(self.iters, "iters")?.unwrap_or(defaults.iterations),
            rng_seed: cfg.pick(self.seed, "seed")?.unwrap_or(defaults.rng_seed),
            path_cache: cfg
                .pick(self.path_cache, "path-cache")?
                .map(PathCache::from)
                .unwrap_or(defaults.path_cache),
        })
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| ScalpError::param(format!("--{flag} is required")))
}

/// Reads an image, optionally adds noise, and converts it to CIELab.
fn load_lab(path: &Path, noise_var: Option<f64>, seed: u64) -> Result<(image::RgbImage, LabImage)> {
    let mut rgb = io::read_rgb(path)?;
    if let Some(v) = noise_var {
        rgb = add_gaussian_noise(&rgb, v, seed)?;
    }
    let lab = rgb_to_lab(&rgb);
    Ok((rgb, lab))
}

fn load_contour(path: Option<&Path>, lab: &LabImage) -> Result<Option<ContourMap>> {
    path.map(|p| contour_prior::load_contour_map(p, lab.width(), lab.height()))
        .transpose()
}

fn write_outputs(
    labels: &LabelMap,
    rgb: &image::RgbImage,
    out_labels: Option<&Path>,
    out_overlay: Option<&Path>,
) -> Result<()> {
    if let Some(p) = out_labels {
        io::write_label_map(p, labels)?;
    }
    if let Some(p) = out_overlay {
        io::write_png(p, &io::boundary_overlay(rgb, labels, OVERLAY_COLOR))?;
    }
    Ok(())
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| ScalpError::param(format!("{}: no file name", path.display())))
}

fn find_contour(dir: &Path, input: &Path) -> Result<PathBuf> {
    let s = stem(input)?;
    ["png", "pgm"]
        .iter()
        .map(|ext| dir.join(format!("{s}.{ext}")))
        .find(|p| p.exists())
        .ok_or_else(|| ScalpError::InvalidData(format!("no contour map for {s} in {}", dir.display())))
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let cfg = Config::load(
        a.params.config.as_deref(),
        &keys(&[
            "contour",
            "contour-dir",
            "noise-var",
            "out-labels",
            "out-overlay",
            "out-dir",
        ]),
    )?;
    let params = a.params.resolve(&cfg, ScalpParams::default())?;
    let contour: Option<PathBuf> = cfg.pick(a.contour, "contour")?;
    let contour_dir: Option<PathBuf> = cfg.pick(a.contour_dir, "contour-dir")?;
    let noise_var: Option<f64> = cfg.pick(a.noise_var, "noise-var")?;
    let out_labels: Option<PathBuf> = cfg.pick(a.out_labels, "out-labels")?;
    let out_overlay: Option<PathBuf> = cfg.pick(a.out_overlay, "out-overlay")?;
    let out_dir: Option<PathBuf> = cfg.pick(a.out_dir, "out-dir")?;
    if contour.is_some() && contour_dir.is_some() {
        return Err(ScalpError::param("--contour and --contour-dir are exclusive"));
    }

    if a.inputs.len() == 1 && out_dir.is_none() {
        if out_labels.is_none() && out_overlay.is_none() {
            return Err(ScalpError::param("give --out-labels, --out-overlay or --out-dir"));
        }
        let input = &a.inputs[0];
        let (rgb, lab) = load_lab(input, noise_var, params.rng_seed)?;
        let cpath = match &contour_dir {
            Some(d) => Some(find_contour(d, input)?),
            None => contour,
        };
        let prior = load_contour(cpath.as_deref(), &lab)?;
        let labels = run_scalp(&lab, &params, prior.as_ref())?;
        return write_outputs(&labels, &rgb, out_labels.as_deref(), out_overlay.as_deref());
    }

    let dir = require(out_dir, "out-dir (for several inputs)")?;
    if out_labels.is_some() || out_overlay.is_some() || contour.is_some() {
        return Err(ScalpError::param(
            "--out-labels, --out-overlay and --contour take a single input; use --out-dir and --contour-dir",
        ));
    }
    std::fs::create_dir_all(&dir).map_err(|e| ScalpError::io(&dir, e))?;
    let mut stems: Vec<String> = a.inputs.iter().map(|p| stem(p)).collect::<Result<_>>()?;
    stems.sort();
    if stems.windows(2).any(|w| w[0] == w[1]) {
        return Err(ScalpError::param("inputs must have distinct file stems"));
    }
    a.inputs.par_iter().try_for_each(|input| {
        let (rgb, lab) = load_lab(input, noise_var, params.rng_seed)?;
        let cpath = contour_dir.as_deref().map(|d| find_contour(d, input)).transpose()?;
        let prior = load_contour(cpath.as_deref(), &lab)?;
        let labels = run_scalp(&lab, &params, prior.as_ref())?;
        let s = stem(input)?;
        write_outputs(
            &labels,
            &rgb,
            Some(&dir.join(format!("{s}.pgm"))),
            Some(&dir.join(format!("{s}_overlay.png"))),
        )
    })
}

fn cmd_prior(a: PriorArgs) -> Result<()> {
    let cfg = Config::load(
        a.params.config.as_deref(),
        &keys(&["scales", "threshold", "out", "out-average"]),
    )?;
    let params = a.params.resolve(&cfg, ScalpParams::default())?;
    let scales = cfg.pick(a.scales, "scales")?.unwrap_or_else(|| DEFAULT_SCALES.to_vec());
    let threshold = cfg.pick(a.threshold, "threshold")?.unwrap_or(DEFAULT_PRIOR_THRESHOLD);
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let out_average: Option<PathBuf> = cfg.pick(a.out_average, "out-average")?;
    if out.is_none() && out_average.is_none() {
        return Err(ScalpError::param("give --out or --out-average"));
    }
    let (_, lab) = load_lab(&a.input, None, params.rng_seed)?;
    let average = contour_prior::multiscale_boundary_average(&lab, &scales, &params)?;
    let prior = contour_prior::threshold_boundaries(&average, threshold)?;
    if let Some(p) = out {
        io::write_contour_pgm(p, &prior)?;
    }
    if let Some(p) = out_average {
        io::write_unit_pgm(p, lab.width(), lab.height(), average.values())?;
    }
    Ok(())
}

fn cmd_hc(a: HcArgs) -> Result<()> {
    let cfg = Config::load(
        a.params.config.as_deref(),
        &keys(&[
            "ucm",
            "tau",
            "t",
            "init-only",
            "contour",
            "noise-var",
            "out-labels",
            "out-overlay",
            "out-regions",
        ]),
    )?;
    let params = a.params.resolve(&cfg, ScalpParams::default())?;
    let ucm_path: PathBuf = require(cfg.pick(a.ucm, "ucm")?, "ucm")?;
    let tau = cfg.pick(a.tau, "tau")?.unwrap_or(DEFAULT_TAU);
    let t = cfg.pick(a.t, "t")?.unwrap_or(DEFAULT_MERGE_FRACTION);
    let init_only = a.init_only || cfg.get::<bool>("init-only")?.unwrap_or(false);
    let contour: Option<PathBuf> = cfg.pick(a.contour, "contour")?;
    let noise_var: Option<f64> = cfg.pick(a.noise_var, "noise-var")?;
    let out_labels: Option<PathBuf> = cfg.pick(a.out_labels, "out-labels")?;
    let out_overlay: Option<PathBuf> = cfg.pick(a.out_overlay, "out-overlay")?;
    let out_regions: Option<PathBuf> = cfg.pick(a.out_regions, "out-regions")?;
    if out_labels.is_none() && out_overlay.is_none() && out_regions.is_none() {
        return Err(ScalpError::param("give --out-labels, --out-overlay or --out-regions"));
    }
    let (rgb, lab) = load_lab(&a.input, noise_var, params.rng_seed)?;
    let prior = load_contour(contour.as_deref(), &lab)?;
    let ucm = HierarchicalMap::load(&ucm_path)?;
    let mode = if init_only {
        ConstraintMode::InitOnly
    } else {
        ConstraintMode::Hard
    };
    let out = hard_constraint::run_scalp_hc(&lab, &params, prior.as_ref(), &ucm, tau, t, mode)?;
    write_outputs(&out.labels, &rgb, out_labels.as_deref(), out_overlay.as_deref())?;
    if let Some(p) = out_regions {
        io::write_label_map(p, &out.regions.label_map())?;
    }
    Ok(())
}

fn is_volume_path(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_any_labels(p: &Path) -> Result<LabelMap> {
    if is_volume_path(p) {
        supervoxel::read_label_volume(p)
    } else {
        io::read_label_map(p)
    }
}

fn evaluate_one(labels_path: &Path, group: &str, pr_map: Option<&Path>, epsilon: f64) -> Result<MetricsRow> {
    let s = read_any_labels(labels_path)?;
    let gts = group
        .split(',')
        .filter(|g| !g.is_empty())
        .map(|g| read_any_labels(Path::new(g)))
        .collect::<Result<Vec<_>>>()?;
    let gts = GroundTruthSet::new(gts)?;
    let name = labels_path.display().to_string();
    if s.dims().is_volume() {
        if pr_map.is_some() {
            return Err(ScalpError::param("precision-recall applies to planar maps only"));
        }
        return Ok(MetricsRow {
            labels: name,
            superpixels: s.label_count(),
            ground_truths: gts.maps().len(),
            asa: gts.mean_of(|t| supervoxel::asa_3d(&s, t))?,
            br: None,
            cd: None,
            src: None,
            max_f: None,
            best_threshold: None,
        });
    }
    let m = metrics::evaluate(&s, &gts, epsilon)?;
    let pr = match pr_map {
        Some(p) => {
            let (w, h, values) = io::read_gray_normalized(p)?;
            if (w, h) != (s.width(), s.height()) {
                return Err(ScalpError::dims(s.dims(), format!("{w}x{h}")));
            }
            Some(metrics::pr_curve(&BoundaryMap::new(s.dims(), values)?, &gts, epsilon)?)
        }
        None => None,
    };
    Ok(MetricsRow::from_metrics(name, &m, pr.as_ref()))
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let cfg = Config::load(
        a.config.as_deref(),
        &["labels", "gt", "epsilon", "pr-map", "format", "out"],
    )?;
    let labels: Vec<PathBuf> = cfg.pick_vec(a.labels, "labels")?;
    let gt: Vec<String> = cfg.pick_vec(a.gt, "gt")?;
    let pr_maps: Vec<PathBuf> = cfg.pick_vec(a.pr_map, "pr-map")?;
    let epsilon = cfg.pick(a.epsilon, "epsilon")?.unwrap_or(2.0);
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let format = match cfg.pick(a.format, "format")? {
        Some(f) => f,
        None if out.as_deref().is_some_and(is_volume_path) => ReportFormat::Json,
        None => ReportFormat::Csv,
    };
    if labels.is_empty() {
        return Err(ScalpError::param("--labels is required"));
    }
    if gt.len() != 1 && gt.len() != labels.len() {
        return Err(ScalpError::param(format!(
            "{} ground-truth groups for {} label maps",
            gt.len(),
            labels.len()
        )));
    }
    if !pr_maps.is_empty() && pr_maps.len() != labels.len() {
        return Err(ScalpError::param(format!(
            "{} precision-recall maps for {} label maps",
            pr_maps.len(),
            labels.len()
        )));
    }
    let rows = labels
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let group = if gt.len() == 1 { &gt[0] } else { &gt[i] };
            evaluate_one(l, group, pr_maps.get(i).map(PathBuf::as_path), epsilon)
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match format {
        ReportFormat::Csv => report::to_csv(&rows),
        ReportFormat::Json => report::to_json(&rows),
    };
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| ScalpError::io(&p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_decompose3d(a: Decompose3dArgs) -> Result<()> {
    let cfg = Config::load(a.params.config.as_deref(), &keys(&["contour", "out-labels"]))?;
    let defaults = ScalpParams {
        gamma: 0.0,
        ..ScalpParams::default()
    };
    let params = a.params.resolve(&cfg, defaults)?;
    let contour: Option<PathBuf> = cfg.pick(a.contour, "contour")?;
    let out: PathBuf = require(cfg.pick(a.out_labels, "out-labels")?, "out-labels")?;
    let volume = supervoxel::read_volume(&a.input)?;
    let prior = contour.map(supervoxel::read_volume).transpose()?;
    let labels = supervoxel::run_scalp_3d(&volume, &params, prior.as_ref())?;
    supervoxel::write_label_volume(out, &labels)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Prior(a) => cmd_prior(a),
        Command::Hc(a) => cmd_hc(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Decompose3d(a) => cmd_decompose3d(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"k": 40, "lambda": 0.25, "path-cache": "exact"}"#).unwrap();
        let cfg = Config::load(Some(&p), &PARAM_KEYS).unwrap();
        let flags = ParamFlags {
            k: Some(10),
            ..Default::default()
        };
        let params = flags.resolve(&cfg, ScalpParams::default()).unwrap();
        assert_eq!(params.k, 10);
        assert_eq!(params.lambda, 0.25);
        assert_eq!(params.path_cache, PathCache::Exact);
        assert_eq!(params.sigma, 40.0);
    }

    #[test]
    fn config_rejects_unknown_and_mistyped_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"kk": 40}"#).unwrap();
        assert!(Config::load(Some(&p), &PARAM_KEYS).is_err());
        std::fs::write(&p, r#"{"k": "many"}"#).unwrap();
        let cfg = Config::load(Some(&p), &PARAM_KEYS).unwrap();
        assert!(ParamFlags::default().resolve(&cfg, ScalpParams::default()).is_err());
    }
}
