//! The `certify`, `fig1`, `sweep` and `continuum` commands.
//!
//! Each command resolves and validates its whole configuration before it
//! creates the output directory, so a rejected config leaves no files.
//! Work items run on the rayon pool and are collected in input order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use eur_core::bounds::{conjugate_beta, Evaluation};
use eur_core::continuum::{check_binned_relations, check_continuous_relation, check_norm_inequalities};
use eur_core::naimark::{consistency_check, extend};
use eur_core::povm::build_povm;
use eur_core::quadrature::Simpson;
use eur_core::spectrum::{min_valid_s, reduce_to_integers, validate_s, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE};
use eur_core::{
    BinPartition, BoundReport, DensityMatrix, EnergySpectrum, Parameters, RationalStructure, RelationId, TimeDensity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{preset_levels, Fig1Config, Order, Resolved, RunConfig};
use crate::error::CliError;
use crate::io::{self, DensityRow, ExtensionExport, Format, MeasurementExport, ReportRow};

/// Largest accepted `max_m |⟨η̃_m|ρ̃|η̃_m⟩ − ⟨θ_m|ρ|θ_m⟩|`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

/// Where and how a command writes its results.
#[derive(Debug, Clone)]
pub struct Options {
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
    /// Directory against which relative paths in the config resolve.
    pub base_dir: PathBuf,
}

impl Options {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            formats: vec![Format::Csv, Format::Jsonl],
            seed: 0,
            base_dir: PathBuf::from("."),
        }
    }

    fn prepare(&self) -> Result<&Path, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(CliError::output)?;
        Ok(&self.out_dir)
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub reports: usize,
    pub violations: usize,
    /// Smallest slack per relation.
    pub min_slack: BTreeMap<&'static str, f64>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn tally<'a>(reports: impl IntoIterator<Item = &'a BoundReport>) -> Self {
        let mut outcome = Outcome::default();
        for report in reports {
            outcome.reports += 1;
            outcome.violations += usize::from(!report.holds);
            let entry = outcome
                .min_slack
                .entry(report.relation.as_str())
                .or_insert(f64::INFINITY);
            *entry = entry.min(report.slack);
        }
        outcome
    }

    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

fn numerical(err: eur_core::Error) -> CliError {
    CliError::Numerical(err)
}

/// THMTH: the phase-state distribution of the embedded state reproduces
/// the complement distribution.
fn naimark_report(resolved: &Resolved, s: usize) -> Result<BoundReport, CliError> {
    let measurement = build_povm(&resolved.structure, resolved.tau0, s).map_err(numerical)?;
    let system = extend(&resolved.structure, resolved.tau0, s).map_err(numerical)?;
    let gap = consistency_check(&system, &measurement, &resolved.state).map_err(numerical)?;
    let params = Parameters {
        s: Some(s),
        d: resolved.structure.d(),
        purity: resolved.state.purity(),
        ..Parameters::default()
    };
    Ok(BoundReport::new(RelationId::Thmth, gap, CONSISTENCY_TOLERANCE, params).with_tolerance(0.0))
}

/// Discrete relations for every `(s, α)`, the Naimark consistency per `s`,
/// and, when `continuum` is set, the continuous-time relations.
pub fn certify_reports(
    resolved: &Resolved,
    continuum: bool,
    nodes: Option<usize>,
) -> Result<Vec<BoundReport>, CliError> {
    let per_s: Vec<Vec<BoundReport>> = resolved
        .s_values
        .par_iter()
        .map(|&s| {
            let measurement = build_povm(&resolved.structure, resolved.tau0, s).map_err(numerical)?;
            let evaluation = Evaluation::new(&measurement, &resolved.state).map_err(numerical)?;
            let mut reports = Vec::new();
            for &alpha in &resolved.alphas {
                reports.extend(evaluation.all(alpha, &resolved.etas).map_err(numerical)?);
            }
            reports.push(naimark_report(resolved, s)?);
            Ok(reports)
        })
        .collect::<Result<_, CliError>>()?;
    let mut reports: Vec<BoundReport> = per_s.into_iter().flatten().collect();
    if continuum {
        reports.extend(continuum_reports(resolved, nodes)?);
    }
    Ok(reports)
}

fn time_density(resolved: &Resolved, nodes: Option<usize>) -> Result<TimeDensity, CliError> {
    let density = TimeDensity::new(&resolved.structure, &resolved.state, resolved.tau0).map_err(numerical)?;
    Ok(match nodes {
        Some(nodes) => density.with_quadrature(Simpson::with_nodes(nodes)),
        None => density,
    })
}

/// CTREN per α, CRBIN/CTBIN per (partition, α), and the norm inequalities
/// per (partition, α ≥ 1, s).
pub fn continuum_reports(resolved: &Resolved, nodes: Option<usize>) -> Result<Vec<BoundReport>, CliError> {
    let density = time_density(resolved, nodes)?;
    let conjugate: Vec<f64> = resolved.alphas.iter().copied().filter(|&a| a > 0.5).collect();
    let mut reports: Vec<BoundReport> = conjugate
        .par_iter()
        .map(|&alpha| check_continuous_relation(&density, alpha).map_err(numerical))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(&BinPartition, f64)> = resolved
        .partitions
        .iter()
        .flat_map(|p| conjugate.iter().map(move |&a| (p, a)))
        .collect();
    let per_job: Vec<Vec<BoundReport>> = jobs
        .par_iter()
        .map(|&(partition, alpha)| {
            let mut out = check_binned_relations(&density, partition, alpha)
                .map_err(numerical)?
                .to_vec();
            if alpha >= 1.0 && alpha.is_finite() {
                for &s in &resolved.s_values {
                    out.extend(check_norm_inequalities(&density, partition, alpha, s).map_err(numerical)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    reports.extend(per_job.into_iter().flatten());
    Ok(reports)
}

/// Evaluates every requested relation and writes `reports.{csv,jsonl}`.
pub fn certify(config: &RunConfig, options: &Options) -> Result<Outcome, CliError> {
    let resolved = config.resolve(&options.base_dir, options.seed)?;
    let reports = certify_reports(&resolved, config.continuum_checks, config.continuum.nodes)?;
    let dir = options.prepare()?;
    let mut outcome = Outcome::tally(&reports);
    outcome.files = io::write_reports(dir, "reports", &reports, &options.formats)?;
    if config.export_measurements {
        for &s in &resolved.s_values {
            let measurement = build_povm(&resolved.structure, resolved.tau0, s).map_err(numerical)?;
            let system = extend(&resolved.structure, resolved.tau0, s).map_err(numerical)?;
            let measurement_path = dir.join(format!("measurement_s{s}.json"));
            io::write_json(&measurement_path, &MeasurementExport::from(&measurement))?;
            let extension_path = dir.join(format!("extension_s{s}.json"));
            io::write_json(&extension_path, &ExtensionExport::from(&system))?;
            outcome.files.extend([measurement_path, extension_path]);
        }
    }
    Ok(outcome)
}

/// One point of the figure data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub s_plus_1: usize,
    pub beta: f64,
    pub lhs: f64,
    pub ln_bound: f64,
    pub slack: f64,
}

#[derive(Debug, Serialize)]
struct Fig1Meta<'a> {
    radii: &'a [f64],
    betas: &'a [f64],
    s_plus_1_from: usize,
    s_plus_1_to: usize,
    tau0: f64,
    state: &'static str,
    lhs: &'static str,
}

fn validate_fig1(fig: &Fig1Config) -> Result<(), CliError> {
    if fig.radii.is_empty() || fig.radii.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(CliError::Config("fig1 radii must lie in [0, 1]".into()));
    }
    if fig.betas.is_empty() || fig.betas.iter().any(|&b| !(b > 0.5 && b <= 1.0)) {
        return Err(CliError::Config("fig1 betas must lie in (1/2, 1]".into()));
    }
    if fig.s_plus_1.from < 2 || fig.s_plus_1.to < fig.s_plus_1.from {
        return Err(CliError::Config("fig1 needs 2 ≤ s_plus_1.from ≤ s_plus_1.to".into()));
    }
    Ok(())
}

/// `R_α(E) + R_β(T)` for the qubit with Bloch vector `(radius, 0, 0)`,
/// `τ_0 = 0`, α conjugate to each β, over the configured `s + 1` range.
/// Rows are ordered by `s + 1`, then β.
pub fn fig1_rows(fig: &Fig1Config, radius: f64) -> Result<Vec<Fig1Row>, CliError> {
    validate_fig1(fig)?;
    let structure = qubit_structure();
    let state = DensityMatrix::bloch_qubit(radius, 0.0, 0.0).map_err(CliError::config)?;
    let outcomes: Vec<usize> = (fig.s_plus_1.from..=fig.s_plus_1.to).collect();
    let rows: Vec<Vec<Fig1Row>> = outcomes
        .par_iter()
        .map(|&outcomes| {
            let measurement = build_povm(&structure, 0.0, outcomes - 1).map_err(numerical)?;
            let evaluation = Evaluation::new(&measurement, &state).map_err(numerical)?;
            fig.betas
                .iter()
                .map(|&beta| {
                    // conjugation is an involution: α = β/(2β − 1)
                    let alpha = conjugate_beta(beta).map_err(CliError::config)?;
                    let [renfr, _] = evaluation.state_independent(alpha).map_err(numerical)?;
                    Ok(Fig1Row {
                        s_plus_1: outcomes,
                        beta,
                        lhs: renfr.lhs,
                        ln_bound: renfr.rhs,
                        slack: renfr.slack,
                    })
                })
                .collect()
        })
        .collect::<Result<_, CliError>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn qubit_structure() -> RationalStructure {
    reduce_to_integers(&EnergySpectrum::qubit(), DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE)
        .expect("{0, 1} reduces exactly")
}

/// Writes `fig1_r<r>.csv` per radius and `fig1_meta.json`.
pub fn fig1(config: &RunConfig, options: &Options) -> Result<Outcome, CliError> {
    let fig = &config.fig1;
    validate_fig1(fig)?;
    let per_radius: Vec<(f64, Vec<Fig1Row>)> = fig
        .radii
        .iter()
        .map(|&r| Ok((r, fig1_rows(fig, r)?)))
        .collect::<Result<_, CliError>>()?;
    let dir = options.prepare()?;
    let mut outcome = Outcome::default();
    for (radius, rows) in &per_radius {
        let path = dir.join(format!("fig1_r{radius}.csv"));
        io::write_csv(&path, rows.iter())?;
        outcome.files.push(path);
        outcome.reports += rows.len();
        outcome.violations += rows
            .iter()
            .filter(|row| row.slack < -eur_core::bounds::HOLD_TOLERANCE)
            .count();
        let entry = outcome.min_slack.entry("RENFR").or_insert(f64::INFINITY);
        *entry = rows.iter().map(|row| row.slack).fold(*entry, f64::min);
    }
    let meta_path = dir.join("fig1_meta.json");
    io::write_json(
        &meta_path,
        &Fig1Meta {
            radii: &fig.radii,
            betas: &fig.betas,
            s_plus_1_from: fig.s_plus_1.from,
            s_plus_1_to: fig.s_plus_1.to,
            tau0: 0.0,
            state: "qubit {0, 1}, Bloch vector (r, 0, 0)",
            lhs: "R_alpha(E) + R_beta(T), 1/alpha + 1/beta = 2",
        },
    )?;
    outcome.files.push(meta_path);
    Ok(outcome)
}

/// One randomized tuple of the sweep.
#[derive(Debug, Clone)]
pub struct SweepSample {
    pub index: usize,
    pub preset: String,
    pub s: usize,
    pub alpha: f64,
    pub eta: f64,
    pub reports: Vec<BoundReport>,
}

#[derive(Debug, Serialize)]
struct SweepRow<'a> {
    sample: usize,
    preset: &'a str,
    relation_id: &'a str,
    alpha: Option<Order>,
    beta: Option<Order>,
    s: Option<usize>,
    d: usize,
    purity: f64,
    eta: Option<f64>,
    lhs: f64,
    rhs: f64,
    slack: f64,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    relation_id: &'a str,
    reports: usize,
    failures: usize,
    min_slack: f64,
}

/// Draws sample `index`: preset, state of random rank, valid `s`, α and η.
///
/// Sample `i` uses ChaCha8 stream `i` of `seed`, so any subset of samples
/// can be reproduced independently and in any order.
pub fn draw_sample(
    config: &RunConfig,
    structures: &[(String, RationalStructure)],
    seed: u64,
    index: usize,
) -> Result<SweepSample, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (preset, structure) = &structures[rng.random_range(0..structures.len())];
    let dim = structure.dimension();
    let rank = rng.random_range(1..=dim);
    let state = DensityMatrix::random_with(dim, rank, &mut rng).map_err(numerical)?;
    let lowest = min_valid_s(structure);
    let s = loop {
        let s = lowest + rng.random_range(0..=config.sweep.s_span);
        if validate_s(structure, s) {
            break s;
        }
    };
    let alpha = config.alphas[rng.random_range(0..config.alphas.len())].0;
    let eta = config.etas[rng.random_range(0..config.etas.len())];
    let measurement = build_povm(structure, config.tau0, s).map_err(numerical)?;
    let evaluation = Evaluation::new(&measurement, &state).map_err(numerical)?;
    let mut reports = evaluation.all(alpha, &[eta]).map_err(numerical)?;
    if config.sweep.continuum && alpha > 0.5 {
        let density = TimeDensity::new(structure, &state, config.tau0).map_err(numerical)?;
        let bins = rng.random_range(1..=64usize);
        let period = structure.period();
        let cuts: Vec<f64> = (1..bins).map(|_| period * rng.random_range(0.001..0.999)).collect();
        let partition = BinPartition::from_cuts(config.tau0, period, &cuts).map_err(numerical)?;
        reports.push(check_continuous_relation(&density, alpha).map_err(numerical)?);
        reports.extend(check_binned_relations(&density, &partition, alpha).map_err(numerical)?);
    }
    Ok(SweepSample {
        index,
        preset: preset.clone(),
        s,
        alpha,
        eta,
        reports,
    })
}

fn sweep_structures(config: &RunConfig) -> Result<Vec<(String, RationalStructure)>, CliError> {
    if config.sweep.presets.is_empty() {
        return Err(CliError::Config("sweep needs at least one preset".into()));
    }
    if config.alphas.is_empty() || config.alphas.iter().any(|a| !(a.0 > 0.0)) {
        return Err(CliError::Config("sweep needs positive alphas".into()));
    }
    if config.etas.is_empty() || config.etas.iter().any(|e| !(0.5..=1.0).contains(e)) {
        return Err(CliError::Config("sweep etas must lie in [0.5, 1]".into()));
    }
    config
        .sweep
        .presets
        .iter()
        .map(|name| {
            let spectrum = EnergySpectrum::new(preset_levels(name)?).map_err(CliError::config)?;
            let structure =
                reduce_to_integers(&spectrum, config.max_denominator, config.tolerance).map_err(CliError::config)?;
            Ok((name.clone(), structure))
        })
        .collect()
}

/// All samples of a sweep, in index order.
pub fn sweep_samples(config: &RunConfig, seed: u64) -> Result<Vec<SweepSample>, CliError> {
    let structures = sweep_structures(config)?;
    (0..config.sweep.samples)
        .into_par_iter()
        .map(|i| draw_sample(config, &structures, seed, i))
        .collect()
}

/// Writes `sweep.{csv,jsonl}` and `sweep_summary.csv`.
pub fn sweep(config: &RunConfig, options: &Options) -> Result<Outcome, CliError> {
    let seed = config.seed.unwrap_or(options.seed);
    let samples = sweep_samples(config, seed)?;
    let dir = options.prepare()?;
    let mut outcome = Outcome::tally(samples.iter().flat_map(|s| &s.reports));
    let rows = || {
        samples.iter().flat_map(|sample| {
            sample.reports.iter().map(move |report| {
                let row = ReportRow::from(report);
                SweepRow {
                    sample: sample.index,
                    preset: &sample.preset,
                    relation_id: report.relation.as_str(),
                    alpha: row.alpha,
                    beta: row.beta,
                    s: row.s,
                    d: row.d,
                    purity: row.purity,
                    eta: row.eta,
                    lhs: row.lhs,
                    rhs: row.rhs,
                    slack: row.slack,
                    holds: row.holds,
                }
            })
        })
    };
    for &format in &options.formats {
        let path = dir.join(format!("sweep.{}", format.extension()));
        match format {
            Format::Csv => io::write_csv(&path, rows())?,
            Format::Jsonl => io::write_jsonl(&path, rows())?,
        }
        outcome.files.push(path);
    }
    let mut counts: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    for report in samples.iter().flat_map(|s| &s.reports) {
        let entry = counts.entry(report.relation.as_str()).or_default();
        entry.0 += 1;
        entry.1 += usize::from(!report.holds);
    }
    let summary_path = dir.join("sweep_summary.csv");
    io::write_csv(
        &summary_path,
        counts.iter().map(|(&relation_id, &(reports, failures))| SummaryRow {
            relation_id,
            reports,
            failures,
            min_slack: outcome.min_slack[relation_id],
        }),
    )?;
    outcome.files.push(summary_path);
    Ok(outcome)
}

/// `points` samples of `w(τ)` over `[τ_0, τ_0 + T_c]`, endpoints included.
pub fn density_rows(density: &TimeDensity, points: usize) -> Vec<DensityRow> {
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|k| {
            let tau = density.tau0() + density.period() * k as f64 / steps as f64;
            DensityRow {
                tau,
                w: density.evaluate(tau),
            }
        })
        .collect()
}

/// Writes `density.csv` and `continuum.{csv,jsonl}`.
pub fn continuum(config: &RunConfig, options: &Options) -> Result<Outcome, CliError> {
    let resolved = config.resolve(&options.base_dir, options.seed)?;
    if config.continuum.points < 2 {
        return Err(CliError::Config("continuum.points must be at least 2".into()));
    }
    let reports = continuum_reports(&resolved, config.continuum.nodes)?;
    let density = time_density(&resolved, config.continuum.nodes)?;
    let dir = options.prepare()?;
    let mut outcome = Outcome::tally(&reports);
    let density_path = dir.join("density.csv");
    io::write_csv(&density_path, density_rows(&density, config.continuum.points))?;
    outcome.files.push(density_path);
    outcome
        .files
        .extend(io::write_reports(dir, "continuum", &reports, &options.formats)?);
    Ok(outcome)
}

/// Runs `f` on a pool capped by `EUR_NUM_THREADS` when that is set.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match std::env::var("EUR_NUM_THREADS") {
        Ok(value) => {
            let threads: usize = value
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("EUR_NUM_THREADS must be a positive integer, got {value:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
