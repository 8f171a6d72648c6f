//! Scenario files: a versioned TOML description of a group, lattice,
//! automorphism family and profile, plus the analyses to run on them.

use affine_frames::automorphisms::{AutomorphismFamily, Envelope, Generator, IndexSet, Weight};
use affine_frames::calderon::{FrequencyProfile, ValueBox};
use affine_frames::linalg::Matrix;
use affine_frames::metric_lattice::{Lattice, MetricSpace};
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub group: GroupSpec,
    #[serde(default)]
    pub lattice: LatticeSpec,
    pub family: FamilySpec,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub analysis: Vec<AnalysisSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Euclidean {
        dim: usize,
        #[serde(default)]
        metric: EuclideanMetric,
    },
    Gabor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EuclideanMetric {
    #[default]
    L2,
    Linf,
}

impl GroupSpec {
    pub fn metric(&self) -> MetricSpace {
        match *self {
            GroupSpec::Euclidean {
                dim,
                metric: EuclideanMetric::L2,
            } => MetricSpace::l2(dim),
            GroupSpec::Euclidean {
                dim,
                metric: EuclideanMetric::Linf,
            } => MetricSpace::linf(dim),
            GroupSpec::Gabor => MetricSpace::gabor(),
        }
    }

    pub fn is_gabor(&self) -> bool {
        matches!(self, GroupSpec::Gabor)
    }

    /// Dimension of the base space (1 on the Gabor group).
    pub fn base_dim(&self) -> usize {
        match *self {
            GroupSpec::Euclidean { dim, .. } => dim,
            GroupSpec::Gabor => 1,
        }
    }
}

/// `columns` generate the annihilator lattice; absent means `ℤⁿ`. On the
/// Gabor group only `spacing` is used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

fn unit_weight() -> Weight {
    Weight::constant(1.0)
}

fn all_integers() -> IndexSet {
    IndexSet::Integers { min: None, max: None }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `j ↦ base^j`, rows given row-major.
    MatrixPower {
        base: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<i64>,
        #[serde(default = "unit_weight")]
        weight: Weight,
    },
    /// `a ↦ a·I`.
    Dilation {
        index: IndexSet,
        #[serde(default = "unit_weight")]
        weight: Weight,
    },
    /// Grid of `(a, s)` shearlet parameters.
    Shearlet {
        a: Vec<f64>,
        s: Vec<f64>,
        #[serde(default = "unit_weight")]
        weight: Weight,
    },
    GaborShift {
        #[serde(default = "one")]
        spacing: f64,
        #[serde(default = "all_integers")]
        index: IndexSet,
        #[serde(default = "unit_weight")]
        weight: Weight,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub shape: ProfileShape,
    /// Modulation line the profile lives on (Gabor group only, default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gabor_line: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileShape {
    PiecewiseConstant {
        boxes: Vec<BoxSpec>,
    },
    /// Constant `value` on a union of intervals of the line.
    Intervals {
        parts: Vec<[f64; 2]>,
        #[serde(default = "one")]
        value: f64,
    },
    Bump {
        center: Vec<f64>,
        half_widths: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "two")]
        power: u32,
    },
    SampledGrid {
        lo: Vec<f64>,
        hi: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
    },
    /// CSV with columns `coordinates..., value` on a uniform grid; relative
    /// paths resolve against the scenario file.
    SampledGridFile {
        path: PathBuf,
    },
}

fn two() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub value: f64,
}

/// Evaluation points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `n_per_side` evenly spaced points on each of `[lo, hi]` and `[-hi, -lo]`.
    SymmetricLine {
        lo: f64,
        hi: f64,
        n_per_side: usize,
    },
    /// `n` cell midpoints of `[lo, hi]`, on the modulation line `kappa` when given.
    Line {
        lo: f64,
        hi: f64,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<i64>,
    },
    /// Tensor grid of `counts[i]` evenly spaced nodes on `[lo_i, hi_i]`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        counts: Vec<usize>,
    },
    Points {
        points: Vec<Vec<f64>>,
    },
}

impl GridSpec {
    pub fn default_for(group: &GroupSpec) -> Self {
        match group {
            GroupSpec::Gabor => GridSpec::Line {
                lo: -5.0,
                hi: 5.0,
                n: 200,
                kappa: Some(1),
            },
            GroupSpec::Euclidean { dim: 1, .. } => GridSpec::SymmetricLine {
                lo: 0.01,
                hi: 2.0,
                n_per_side: 200,
            },
            // An even node count keeps the origin off the grid.
            GroupSpec::Euclidean { dim, .. } => GridSpec::Box {
                lo: vec![-2.0; *dim],
                hi: vec![2.0; *dim],
                counts: vec![20; *dim],
            },
        }
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let lin = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        };
        Ok(match self {
            GridSpec::SymmetricLine { lo, hi, n_per_side } => {
                affine_frames::frame_functional::symmetric_line_grid(*lo, *hi, *n_per_side)
            }
            GridSpec::Line { lo, hi, n, kappa } => (0..*n)
                .map(|i| {
                    let x = lo + (hi - lo) * (i as f64 + 0.5) / *n as f64;
                    match kappa {
                        Some(k) => vec![x, *k as f64],
                        None => vec![x],
                    }
                })
                .collect(),
            GridSpec::Box { lo, hi, counts } => {
                if lo.len() != hi.len() || lo.len() != counts.len() {
                    bail!("box grid needs lo, hi and counts of equal length");
                }
                let axes: Vec<Vec<f64>> = (0..lo.len()).map(|i| lin(lo[i], hi[i], counts[i])).collect();
                let mut out = vec![vec![]];
                for axis in &axes {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |&x| {
                                let mut q = p.clone();
                                q.push(x);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
            GridSpec::Points { points } => points.clone(),
        })
    }
}

/// Evenly spaced values, for one-dimensional knobs such as `t` grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Linspace {
    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisSpec {
    CalderonScan(CalderonScanSpec),
    PropertyX(PropertyXSpec),
    Counting(CountingSpec),
    Lipschitz(LipschitzSpec),
    Classify(ClassifySpec),
    #[serde(rename = "u_c")]
    Uc(UcSpec),
    FrameReport(FrameReportSpec),
    WeilCheck(WeilCheckSpec),
}

impl AnalysisSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisSpec::CalderonScan(_) => "calderon_scan",
            AnalysisSpec::PropertyX(_) => "property_x",
            AnalysisSpec::Counting(_) => "counting",
            AnalysisSpec::Lipschitz(_) => "lipschitz",
            AnalysisSpec::Classify(_) => "classify",
            AnalysisSpec::Uc(_) => "u_c",
            AnalysisSpec::FrameReport(_) => "frame_report",
            AnalysisSpec::WeilCheck(_) => "weil_check",
        }
    }
}

/// `C_ψ(ξ)` on a grid. With `a`/`b` set, every value must lie in `[a, b]`
/// up to `tol` plus the reported tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalderonScanSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub tol: f64,
}

impl Default for CalderonScanSpec {
    fn default() -> Self {
        CalderonScanSpec {
            grid: None,
            truncation: None,
            a: None,
            b: None,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropertyXSpec {
    pub r: f64,
    pub m: f64,
    pub truncation: i64,
    pub explosion_factor: f64,
    /// Fail when the estimated constant exceeds this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
}

impl Default for PropertyXSpec {
    fn default() -> Self {
        PropertyXSpec {
            r: 0.4,
            m: 1.0,
            truncation: 30,
            explosion_factor: 10.0,
            c_max: None,
        }
    }
}

/// Counts with their two-sided bounds for the listed members (`params`) or
/// for every member within `truncation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountingSpec {
    pub radii: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<Vec<f64>>>,
    pub truncation: i64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CountingSpec {
    fn default() -> Self {
        CountingSpec {
            radii: vec![0.5],
            params: None,
            truncation: 3,
            samples: 100_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzSpec {
    pub truncation: i64,
    /// Sample size of the direction oracle; 0 skips it.
    pub oracle_directions: usize,
    pub seed: u64,
    /// Relative slack allowed between oracle and closed form.
    pub tol: f64,
}

impl Default for LipschitzSpec {
    fn default() -> Self {
        LipschitzSpec {
            truncation: 10,
            oracle_directions: 10_000,
            seed: 1,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySpec {
    pub truncation: i64,
    pub m: f64,
    pub n_floor: f64,
    pub decay_slope: f64,
    /// Expected verdict name; absent means any verdict passes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

impl Default for ClassifySpec {
    fn default() -> Self {
        ClassifySpec {
            truncation: 30,
            m: 1.0,
            n_floor: 1.0,
            decay_slope: -0.25,
            expect: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UcSpec {
    pub c: f64,
    pub m: f64,
    pub t: Linspace,
    pub envelope: Envelope,
    pub cap: f64,
    pub truncation: i64,
    /// Expected boundedness; absent means bounded is required.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_bounded: Option<bool>,
}

impl Default for UcSpec {
    fn default() -> Self {
        UcSpec {
            c: 2.0,
            m: 1.0,
            t: Linspace {
                lo: 1.0,
                hi: 100.0,
                n: 100,
            },
            envelope: Envelope::Identity,
            cap: 1e3,
            truncation: 30,
            expect_bounded: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameReportSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub exclusion: f64,
    pub eps: f64,
    pub property_x_truncation: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<i64>,
    pub cells: usize,
    pub order: usize,
    pub probe: ProbeSpec,
}

impl Default for FrameReportSpec {
    fn default() -> Self {
        FrameReportSpec {
            grid: None,
            a: 1.0,
            b: 1.0,
            m: 2.0,
            exclusion: 1e-3,
            eps: 0.01,
            property_x_truncation: 30,
            truncation: None,
            cells: 24,
            order: 4,
            probe: ProbeSpec::default(),
        }
    }
}

/// Random unit-norm ensemble for the empirical frame bounds; `size = 0`
/// disables it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub size: usize,
    pub band: [f64; 2],
    pub pieces: usize,
    pub seed: u64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            size: 0,
            band: [0.1, 4.0],
            pieces: 8,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeilCheckSpec {
    pub cells: usize,
    pub order: usize,
    pub tol: f64,
}

impl Default for WeilCheckSpec {
    fn default() -> Self {
        WeilCheckSpec {
            cells: 8,
            order: 8,
            tol: 1e-8,
        }
    }
}

/// Parses scenario text, applying `key=value` overrides first. Keys are
/// dotted paths (`analysis.0.r`, `family.base`); values are TOML literals,
/// falling back to plain strings.
pub fn parse(text: &str, overrides: &[String]) -> Result<Scenario> {
    let scenario: Scenario = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| anyhow!("scenario parse error: {e}"))?
    } else {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| anyhow!("scenario parse error: {e}"))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        toml::Value::Table(doc)
            .try_into()
            .map_err(|e| anyhow!("scenario parse error after overrides: {e}"))?
    };
    if scenario.schema_version != SCHEMA_VERSION {
        bail!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            scenario.schema_version
        );
    }
    Ok(scenario)
}

pub fn to_toml(s: &Scenario) -> Result<String> {
    Ok(toml::to_string(s)?)
}

fn apply_override(doc: &mut toml::Table, o: &str) -> Result<()> {
    let (key, raw) = o
        .split_once('=')
        .ok_or_else(|| anyhow!("override {o:?} is not of the form key=value"))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key {key:?} has an empty segment");
    }
    let mut root = toml::Value::Table(std::mem::take(doc));
    let r = set_path(&mut root, &parts, value).with_context(|| format!("override {key:?}"));
    if let toml::Value::Table(t) = root {
        *doc = t;
    }
    r
}

fn set_path(node: &mut toml::Value, parts: &[&str], value: toml::Value) -> Result<()> {
    let Some((head, rest)) = parts.split_first() else {
        *node = value;
        return Ok(());
    };
    match node {
        toml::Value::Table(t) => {
            let child = t
                .entry(head.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            set_path(child, rest, value)
        }
        toml::Value::Array(items) => {
            let idx: usize = head.parse().map_err(|_| anyhow!("{head} is not an array index"))?;
            let len = items.len();
            let item = items
                .get_mut(idx)
                .ok_or_else(|| anyhow!("index {idx} out of range (length {len})"))?;
            set_path(item, rest, value)
        }
        _ => bail!("cannot descend into {head}: the parent is not a table or array"),
    }
}

/// Core objects built from a scenario.
pub struct Setting {
    pub metric: MetricSpace,
    pub lattice: Lattice,
    pub family: AutomorphismFamily,
    pub profile: FrequencyProfile,
}

impl Scenario {
    /// Fills in defaults that depend on the group, so the echoed scenario
    /// shows every knob that was used.
    pub fn resolved(&self) -> Scenario {
        let mut s = self.clone();
        for a in &mut s.analysis {
            match a {
                AnalysisSpec::CalderonScan(c) if c.grid.is_none() => c.grid = Some(GridSpec::default_for(&s.group)),
                AnalysisSpec::FrameReport(f) if f.grid.is_none() => f.grid = Some(GridSpec::default_for(&s.group)),
                _ => {}
            }
        }
        if s.group.is_gabor() && s.profile.gabor_line.is_none() {
            s.profile.gabor_line = Some(1);
        }
        s
    }

    pub fn build(&self, base_dir: Option<&Path>) -> Result<Setting> {
        let metric = self.group.metric();
        let lattice = self.build_lattice()?;
        let family = self.build_family(metric)?;
        let mut profile = build_profile(&self.profile.shape, base_dir)?;
        if profile.base_dim() != self.group.base_dim() {
            bail!(
                "profile has dimension {}, the group base has dimension {}",
                profile.base_dim(),
                self.group.base_dim()
            );
        }
        match (self.group.is_gabor(), self.profile.gabor_line) {
            (true, k) => profile = profile.on_gabor_line(k.unwrap_or(1))?,
            (false, Some(_)) => bail!("gabor_line is only meaningful on the Gabor group"),
            (false, None) => {}
        }
        Ok(Setting {
            metric,
            lattice,
            family,
            profile,
        })
    }

    fn build_lattice(&self) -> Result<Lattice> {
        match &self.group {
            GroupSpec::Gabor => {
                if self.lattice.columns.is_some() {
                    bail!("the Gabor lattice is given by `spacing`, not `columns`");
                }
                Ok(Lattice::gabor(self.lattice.spacing.unwrap_or(1.0))?)
            }
            GroupSpec::Euclidean { dim, .. } => {
                if self.lattice.spacing.is_some() {
                    bail!("Euclidean lattices are given by `columns`, not `spacing`");
                }
                match &self.lattice.columns {
                    None => Ok(Lattice::integer(*dim)),
                    Some(cols) => {
                        if cols.len() != *dim || cols.iter().any(|c| c.len() != *dim) {
                            bail!("lattice needs {dim} columns of length {dim}");
                        }
                        Ok(Lattice::from_columns(cols)?)
                    }
                }
            }
        }
    }

    fn build_family(&self, metric: MetricSpace) -> Result<AutomorphismFamily> {
        let fam = match &self.family {
            FamilySpec::MatrixPower { base, min, max, weight } => {
                AutomorphismFamily::matrix_powers(Matrix::from_rows(base)?, *min, *max, metric)?
                    .with_weight(weight.clone())?
            }
            FamilySpec::Dilation { index, weight } => AutomorphismFamily::new(
                Generator::Dilation {
                    dim: self.group.base_dim(),
                },
                index.clone(),
                weight.clone(),
                metric,
            )?,
            FamilySpec::Shearlet { a, s, weight } => AutomorphismFamily::new(
                Generator::Shearlet,
                IndexSet::Grid {
                    axes: vec![a.clone(), s.clone()],
                },
                weight.clone(),
                metric,
            )?,
            FamilySpec::GaborShift { spacing, index, weight } => AutomorphismFamily::new(
                Generator::GaborShift { spacing: *spacing },
                index.clone(),
                weight.clone(),
                metric,
            )?,
        };
        Ok(fam)
    }
}

fn build_profile(shape: &ProfileShape, base_dir: Option<&Path>) -> Result<FrequencyProfile> {
    Ok(match shape {
        ProfileShape::PiecewiseConstant { boxes } => FrequencyProfile::piecewise_constant(
            boxes
                .iter()
                .map(|b| ValueBox {
                    lo: b.lo.clone(),
                    hi: b.hi.clone(),
                    value: b.value,
                })
                .collect(),
        )?,
        ProfileShape::Intervals { parts, value } => {
            let parts: Vec<(f64, f64)> = parts.iter().map(|p| (p[0], p[1])).collect();
            FrequencyProfile::intervals(&parts, *value)?
        }
        ProfileShape::Bump {
            center,
            half_widths,
            amplitude,
            power,
        } => FrequencyProfile::bump(center.clone(), half_widths.clone(), *amplitude, *power)?,
        ProfileShape::SampledGrid { lo, hi, counts, values } => {
            FrequencyProfile::sampled_grid(lo.clone(), hi.clone(), counts.clone(), values.clone())?
        }
        ProfileShape::SampledGridFile { path } => {
            let full = match base_dir {
                Some(d) if path.is_relative() => d.join(path),
                _ => path.clone(),
            };
            read_grid_csv(&full)?
        }
    })
}

/// Reads `coordinates..., value` rows on a uniform tensor grid.
fn read_grid_csv(path: &Path) -> Result<FrequencyProfile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("reading profile grid {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .with_context(|| format!("{}: row {} is not numeric", path.display(), i + 2))?;
        rows.push(row);
    }
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    if width < 2 || rows.iter().any(|r| r.len() != width) {
        bail!("{}: expected rows of coordinates followed by a value", path.display());
    }
    let d = width - 1;
    let mut axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut a: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        })
        .collect();
    for a in &mut axes {
        if a.len() < 2 {
            bail!("{}: every axis needs at least two nodes", path.display());
        }
        let step = (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64;
        if a.windows(2)
            .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0))
        {
            bail!("{}: grid nodes are not uniformly spaced", path.display());
        }
    }
    let counts: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = counts.iter().product();
    if rows.len() != total {
        bail!("{}: {} rows for a grid of {} nodes", path.display(), rows.len(), total);
    }
    let mut values = vec![f64::NAN; total];
    for r in &rows {
        let mut idx = 0;
        for i in 0..d {
            let k = axes[i].partition_point(|&x| x < r[i]);
            idx = idx * counts[i] + k;
        }
        values[idx] = r[d];
    }
    if values.iter().any(|v| v.is_nan()) {
        bail!("{}: duplicate grid nodes", path.display());
    }
    let lo = axes.iter().map(|a| a[0]).collect();
    let hi = axes.iter().map(|a| a[a.len() - 1]).collect();
    Ok(FrequencyProfile::sampled_grid(lo, hi, counts, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "schema_version = 1\n[group]\nkind = \"euclidean\"\ndim = 2\n\
        [family]\nkind = \"matrix_power\"\nbase = [[2.0, 0.0], [0.0, 2.0]]\n\
        [profile]\nkind = \"bump\"\ncenter = [0.0, 0.0]\nhalf_widths = [1.0, 1.0]\n\
        [[analysis]]\nkind = \"property_x\"\n";

    #[test]
    fn defaults_fill_in() {
        let s = parse(BASE, &[]).unwrap();
        assert_eq!(s.group.metric(), MetricSpace::l2(2));
        assert_eq!(s.analysis, vec![AnalysisSpec::PropertyX(PropertyXSpec::default())]);
        let ProfileShape::Bump { power, amplitude, .. } = s.profile.shape else {
            panic!()
        };
        assert_eq!((power, amplitude), (2, 1.0));
    }

    #[test]
    fn dotted_overrides() {
        let s = parse(
            BASE,
            &[
                "analysis.0.r=0.25".into(),
                "group.metric=linf".into(),
                "lattice.columns=[[1.0, 0.0], [0.5, 1.0]]".into(),
            ],
        )
        .unwrap();
        let AnalysisSpec::PropertyX(p) = &s.analysis[0] else {
            panic!()
        };
        assert_eq!(p.r, 0.25);
        assert_eq!(s.group.metric(), MetricSpace::linf(2));
        assert_eq!(s.lattice.columns.as_ref().unwrap()[1], vec![0.5, 1.0]);
        assert!(parse(BASE, &["analysis.3.r=1".into()]).is_err());
        assert!(parse(BASE, &["noequals".into()]).is_err());
        assert!(parse(BASE, &["analysis.0.bogus=1".into()]).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let e = parse(&BASE.replace("schema_version = 1", "schema_version = 2"), &[]).unwrap_err();
        assert!(e.to_string().contains("schema_version"));
    }

    #[test]
    fn grids() {
        let g = GridSpec::Box {
            lo: vec![-1.0, 0.0],
            hi: vec![1.0, 1.0],
            counts: vec![3, 2],
        };
        let p = g.points().unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![-1.0, 0.0]);
        assert_eq!(p[5], vec![1.0, 1.0]);
        let line = GridSpec::Line {
            lo: 0.0,
            hi: 1.0,
            n: 4,
            kappa: Some(1),
        };
        assert_eq!(line.points().unwrap()[0], vec![0.125, 1.0]);
        let d = GridSpec::default_for(&GroupSpec::Euclidean {
            dim: 2,
            metric: EuclideanMetric::L2,
        });
        assert!(d.points().unwrap().iter().all(|x| x.iter().any(|v| *v != 0.0)));
    }

    #[test]
    fn builds_core_objects() {
        let st = parse(BASE, &[]).unwrap().build(None).unwrap();
        assert_eq!(st.lattice.covolume(), 1.0);
        assert_eq!(st.profile.base_dim(), 2);
        let bad = parse(BASE, &["lattice.spacing=1.0".into()]).unwrap();
        assert!(bad.build(None).is_err());
    }
}
