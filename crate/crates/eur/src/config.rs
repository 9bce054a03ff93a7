//! JSON run configuration and its resolution into core inputs.
//!
//! Every field is optional; unknown keys are rejected. A minimal config is
//! `{}` (qubit, Bloch vector along x, smallest valid `s`).

use std::fmt;
use std::path::{Path, PathBuf};

use eur_core::nalgebra::DMatrix;
use eur_core::spectrum::{min_valid_s, reduce_to_integers, validate_s, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE};
use eur_core::{BinPartition, DensityMatrix, EnergySpectrum, RationalStructure, C64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;
use crate::io;

/// Default sweep grid of entropic orders.
pub const DEFAULT_ALPHAS: [f64; 9] = eur_core::bounds::DEFAULT_ALPHAS;

/// Detector efficiencies swept by default.
pub const DEFAULT_ETAS: [f64; 3] = [0.5, 0.75, 1.0];

/// β values of the figure data; they span the admissible range (1/2, 1].
pub const DEFAULT_FIG1_BETAS: [f64; 4] = [0.55, 0.7, 0.85, 1.0];

/// Bloch-vector lengths of the figure data.
pub const DEFAULT_FIG1_RADII: [f64; 2] = [1.0, 0.75];

/// An entropic order: a positive number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order(pub f64);

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(Order(x)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => Ok(Order(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid order {t:?}"))),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSource {
    /// `"qubit"`, `"equidistant:d"` or `"three-level-3-2"`.
    Preset(String),
    Levels(Vec<f64>),
    /// Text file with one level per line, or JSON `{"levels": [...]}`.
    File(PathBuf),
}

impl Default for SpectrumSource {
    fn default() -> Self {
        Self::Preset("qubit".into())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Bloch([f64; 3]),
    /// Coefficients `⟨ε_n|ψ⟩`; normalized on load.
    Pure {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    Density {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Vec<Vec<f64>>,
    },
    Diagonal(Vec<f64>),
    Mixed,
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        rank: Option<usize>,
    },
    /// JSON file holding one of the other forms.
    File(PathBuf),
}

impl Default for StateSpec {
    fn default() -> Self {
        Self::Bloch([1.0, 0.0, 0.0])
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SValues {
    List(Vec<usize>),
    Range(IntRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntRange {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// Equal bins.
    Uniform(usize),
    /// Interior cut offsets from `τ_0`.
    Cuts(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub radii: Vec<f64>,
    pub betas: Vec<f64>,
    pub s_plus_1: IntRange,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            radii: DEFAULT_FIG1_RADII.to_vec(),
            betas: DEFAULT_FIG1_BETAS.to_vec(),
            s_plus_1: IntRange { from: 2, to: 1000 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub samples: usize,
    pub presets: Vec<String>,
    /// Each sample draws `s` from `[min_valid_s, min_valid_s + s_span]`.
    pub s_span: usize,
    /// Also evaluate the continuum relations on a random partition.
    pub continuum: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            presets: vec!["qubit".into()],
            s_span: 64,
            continuum: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuumConfig {
    /// Points in the exported density CSV.
    pub points: usize,
    /// Initial quadrature nodes; automatic when absent.
    pub nodes: Option<usize>,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        Self {
            points: 1025,
            nodes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub spectrum: SpectrumSource,
    pub max_denominator: u64,
    pub tolerance: f64,
    pub state: StateSpec,
    pub s: Option<SValues>,
    pub alphas: Vec<Order>,
    pub etas: Vec<f64>,
    pub tau0: f64,
    pub partitions: Vec<PartitionSpec>,
    /// Include continuum relations in `certify`.
    pub continuum_checks: bool,
    /// Write each measurement and its extension as JSON.
    pub export_measurements: bool,
    pub seed: Option<u64>,
    pub fig1: Fig1Config,
    pub sweep: SweepConfig,
    pub continuum: ContinuumConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spectrum: SpectrumSource::default(),
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            tolerance: DEFAULT_TOLERANCE,
            state: StateSpec::default(),
            s: None,
            alphas: DEFAULT_ALPHAS.iter().map(|&a| Order(a)).collect(),
            etas: DEFAULT_ETAS.to_vec(),
            tau0: 0.0,
            partitions: vec![PartitionSpec::Uniform(16)],
            continuum_checks: true,
            export_measurements: false,
            seed: None,
            fig1: Fig1Config::default(),
            sweep: SweepConfig::default(),
            continuum: ContinuumConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Relative file paths in the config resolve against `base`.
    pub fn resolve(&self, base: &Path, seed: u64) -> Result<Resolved, CliError> {
        let structure = resolve_spectrum(&self.spectrum, base, self.max_denominator, self.tolerance)?;
        let state = resolve_state(&self.state, base, structure.dimension(), self.seed.unwrap_or(seed))?;
        let s_values = self.resolve_s(&structure)?;
        for order in &self.alphas {
            if !(order.0 > 0.0) {
                return Err(CliError::Config(format!("alpha must be positive, got {order}")));
            }
        }
        for &eta in &self.etas {
            if !(0.5..=1.0).contains(&eta) {
                return Err(CliError::Config(format!("eta must lie in [0.5, 1], got {eta}")));
            }
        }
        if !self.tau0.is_finite() {
            return Err(CliError::Config("tau0 must be finite".into()));
        }
        let partitions = self
            .partitions
            .iter()
            .map(|p| resolve_partition(p, self.tau0, structure.period()))
            .collect::<Result<_, _>>()?;
        Ok(Resolved {
            structure,
            state,
            s_values,
            alphas: self.alphas.iter().map(|o| o.0).collect(),
            etas: self.etas.clone(),
            tau0: self.tau0,
            partitions,
        })
    }

    fn resolve_s(&self, structure: &RationalStructure) -> Result<Vec<usize>, CliError> {
        match &self.s {
            None => Ok(vec![min_valid_s(structure)]),
            Some(SValues::List(list)) => {
                for &s in list {
                    if !validate_s(structure, s) {
                        return Err(CliError::Config(format!(
                            "s = {s} is not valid for r = {:?}",
                            structure.r()
                        )));
                    }
                }
                Ok(list.clone())
            }
            Some(SValues::Range(range)) => {
                let valid: Vec<usize> = (range.from..=range.to).filter(|&s| validate_s(structure, s)).collect();
                if valid.is_empty() {
                    return Err(CliError::Config(format!(
                        "no valid s in {}..={} for r = {:?}",
                        range.from,
                        range.to,
                        structure.r()
                    )));
                }
                Ok(valid)
            }
        }
    }
}

/// Validated inputs of one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub structure: RationalStructure,
    pub state: DensityMatrix,
    pub s_values: Vec<usize>,
    pub alphas: Vec<f64>,
    pub etas: Vec<f64>,
    pub tau0: f64,
    pub partitions: Vec<BinPartition>,
}

/// Levels of a named preset.
pub fn preset_levels(name: &str) -> Result<Vec<f64>, CliError> {
    match name {
        "qubit" => Ok(vec![0.0, 1.0]),
        "three-level-3-2" => Ok(vec![0.0, 1.0, 1.5]),
        _ => {
            let d = name
                .strip_prefix("equidistant:")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&d| d >= 1)
                .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?;
            Ok((0..=d).map(|n| n as f64).collect())
        }
    }
}

pub fn resolve_spectrum(
    source: &SpectrumSource,
    base: &Path,
    max_denominator: u64,
    tolerance: f64,
) -> Result<RationalStructure, CliError> {
    let levels = match source {
        SpectrumSource::Preset(name) => preset_levels(name)?,
        SpectrumSource::Levels(levels) => levels.clone(),
        SpectrumSource::File(path) => io::read_spectrum(&base.join(path))?,
    };
    let spectrum = EnergySpectrum::shifted_to_ground(levels).map_err(CliError::config)?;
    reduce_to_integers(&spectrum, max_denominator, tolerance).map_err(CliError::config)
}

pub fn resolve_state(spec: &StateSpec, base: &Path, dimension: usize, seed: u64) -> Result<DensityMatrix, CliError> {
    let state = match spec {
        StateSpec::Bloch([x, y, z]) => {
            if dimension != 2 {
                return Err(CliError::Config(format!(
                    "a Bloch vector needs 2 levels, spectrum has {dimension}"
                )));
            }
            DensityMatrix::bloch_qubit(*x, *y, *z)
        }
        StateSpec::Pure { re, im } => {
            let coefficients = complex_vector(re, im)?;
            DensityMatrix::pure_state(&coefficients)
        }
        StateSpec::Density { re, im } => DensityMatrix::new(matrix_from_parts(re, im)?),
        StateSpec::Diagonal(populations) => DensityMatrix::diagonal(populations),
        StateSpec::Mixed => Ok(DensityMatrix::maximally_mixed(dimension)),
        StateSpec::Random { seed: own, rank } => {
            DensityMatrix::random_state(dimension, rank.unwrap_or(dimension), own.unwrap_or(seed))
        }
        StateSpec::File(path) => {
            let path = base.join(path);
            let nested = io::read_state_spec(&path)?;
            if matches!(nested, StateSpec::File(_)) {
                return Err(CliError::Config("state files cannot refer to other state files".into()));
            }
            let parent = path.parent().unwrap_or(base).to_path_buf();
            return resolve_state(&nested, &parent, dimension, seed);
        }
    }
    .map_err(CliError::config)?;
    if state.dimension() != dimension {
        return Err(CliError::Config(format!(
            "state has dimension {}, spectrum has {dimension} levels",
            state.dimension()
        )));
    }
    Ok(state)
}

fn complex_vector(re: &[f64], im: &[f64]) -> Result<Vec<C64>, CliError> {
    if !im.is_empty() && im.len() != re.len() {
        return Err(CliError::Config("re and im must have the same length".into()));
    }
    Ok(re
        .iter()
        .enumerate()
        .map(|(i, &x)| C64::new(x, im.get(i).copied().unwrap_or(0.0)))
        .collect())
}

fn resolve_partition(spec: &PartitionSpec, tau0: f64, period: f64) -> Result<BinPartition, CliError> {
    match spec {
        PartitionSpec::Uniform(bins) => BinPartition::uniform(tau0, period, *bins),
        PartitionSpec::Cuts(cuts) => BinPartition::from_cuts(tau0, period, cuts),
    }
    .map_err(CliError::config)
}

/// Row-major real and imaginary parts into a square matrix.
fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<DMatrix<C64>, CliError> {
    let n = re.len();
    if re.iter().any(|row| row.len() != n) {
        return Err(CliError::Config("density matrix must be square".into()));
    }
    if !im.is_empty() && (im.len() != n || im.iter().any(|row| row.len() != n)) {
        return Err(CliError::Config("im must have the same shape as re".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        C64::new(re[i][j], im.get(i).map_or(0.0, |row| row[j]))
    }))
}
