//! Command-line front end: `generate`, `verify`, `radar` and `cdma`.
//!
//! Exit codes: 0 success, 1 property violation (or a strict-mode simulation
//! failure), 2 usage or parse error, 3 construction failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, BoundSet, CorrelationReport, CrossOptions, VerifyOptions, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::field::{PrimeModulus, Tolerance};
use crate::heisenberg::heisenberg_system;
use crate::io::{self, Document, Format};
use crate::oscillator::{build_oscillator_system, standard_basis_system, ExtendedSystem, OscillatorKind};
use crate::signal::{Provenance, SignalDictionary, SystemKind};
use crate::sims::{self, CdmaScenario, CdmaUser, DecodeSearch, DistortionModel, RadarSummary, Shift, SweepConfig};
use crate::tori::TorusCensus;
use crate::weil::WeilRepresentation;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONSTRUCTION: u8 = 3;

/// System names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    Heisenberg,
    Split,
    Nonsplit,
    Oscillator,
    Extended,
    Standard,
}

impl SystemArg {
    pub fn kind(self) -> SystemKind {
        match self {
            SystemArg::Heisenberg => SystemKind::Heisenberg,
            SystemArg::Split => SystemKind::SplitOscillator,
            SystemArg::Nonsplit => SystemKind::NonsplitOscillator,
            SystemArg::Oscillator => SystemKind::Oscillator,
            SystemArg::Extended => SystemKind::Extended,
            SystemArg::Standard => SystemKind::Standard,
        }
    }

    pub fn from_kind(kind: SystemKind) -> Self {
        match kind {
            SystemKind::Heisenberg => SystemArg::Heisenberg,
            SystemKind::SplitOscillator => SystemArg::Split,
            SystemKind::NonsplitOscillator => SystemArg::Nonsplit,
            SystemKind::Oscillator => SystemArg::Oscillator,
            SystemKind::Extended => SystemArg::Extended,
            SystemKind::Standard => SystemArg::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Against {
    /// Pick bounds from the dictionary kind.
    Auto,
    Oscillator,
    Heisenberg,
}

#[derive(Debug, Parser)]
#[command(name = "osc", version, about = "Oscillator and Heisenberg sequence dictionaries over F_p")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Odd prime modulus.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub system: Option<SystemArg>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file; results go to stdout when omitted (except binary output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Absolute tolerance for bound checks and eigenvector residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Cross-correlation cells evaluated before switching to sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_PAIR_BUDGET)]
    pub pair_budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "OSC_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Treat simulation failures and projective calibrations as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Largest accepted modulus.
    #[arg(long, global = true, default_value_t = crate::field::DEFAULT_MAX_P)]
    pub max_p: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a dictionary and write it to `--out`.
    Generate,
    /// Check a dictionary file against its correlation bounds.
    Verify {
        dictionary: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        against: Against,
    },
    /// Run a radar scenario file.
    Radar { scenario: PathBuf },
    /// Run a CDMA scenario or sweep file.
    Cdma { scenario: PathBuf },
}

/// Everything that determines a run, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub p: Option<u64>,
    pub system: Option<SystemArg>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tolerance: f64,
    pub pair_budget: u64,
    pub seed: u64,
    pub threads: usize,
    pub strict: bool,
    pub max_p: u64,
}

impl RunConfig {
    fn new(command: &str, g: &GlobalArgs) -> Result<Self> {
        if !(g.tolerance.is_finite() && g.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", g.tolerance)));
        }
        if g.pair_budget == 0 {
            return Err(Error::InvalidConfig("pair budget must be positive".into()));
        }
        if let Some(p) = g.p {
            PrimeModulus::with_max(p, g.max_p)?;
        }
        Ok(RunConfig {
            command: command.to_string(),
            p: g.p,
            system: g.system,
            format: g.format,
            out: g.out.clone(),
            tolerance: g.tolerance,
            pair_budget: g.pair_budget,
            seed: g.seed,
            threads: g.threads,
            strict: g.strict,
            max_p: g.max_p,
        })
    }

    pub fn tol(&self) -> Tolerance {
        Tolerance(self.tolerance)
    }
}

pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotOddPrime(_)
        | Error::ModulusTooLarge { .. }
        | Error::InvalidConfig(_)
        | Error::Parse { .. }
        | Error::Io(_) => EXIT_USAGE,
        Error::AmbiguousPeak { .. } | Error::DecodeMarginBelowThreshold { .. } => EXIT_VIOLATION,
        _ => EXIT_CONSTRUCTION,
    }
}

/// Builds the dictionary of the given kind.
pub fn build_dictionary(m: PrimeModulus, kind: SystemKind, tol: Tolerance) -> Result<SignalDictionary> {
    let oscillator = |k: OscillatorKind| {
        let weil = WeilRepresentation::new(m);
        let census = TorusCensus::new(m)?;
        build_oscillator_system(&weil, &census, k, tol)
    };
    match kind {
        SystemKind::Heisenberg => heisenberg_system(m, tol),
        SystemKind::SplitOscillator => oscillator(OscillatorKind::Split),
        SystemKind::NonsplitOscillator => oscillator(OscillatorKind::NonSplit),
        SystemKind::Oscillator => oscillator(OscillatorKind::Both),
        SystemKind::Extended => Ok(ExtendedSystem::new(oscillator(OscillatorKind::Both)?).materialize()),
        SystemKind::Standard => Ok(standard_basis_system(m)),
    }
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<()> {
    match &cfg.out {
        Some(path) => io::write_file(path, bytes),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn require_p(cfg: &RunConfig, from_file: Option<u64>) -> Result<PrimeModulus> {
    let p = match (cfg.p, from_file) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidConfig(format!("--p {a} disagrees with p = {b} in the input")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::InvalidConfig("--p is required".into())),
    };
    PrimeModulus::with_max(p, cfg.max_p)
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<u8> {
    let m = require_p(cfg, None)?;
    let system = cfg.system.ok_or_else(|| Error::InvalidConfig("--system is required".into()))?;
    if cfg.format == Format::Bin && cfg.out.is_none() {
        return Err(Error::InvalidConfig("binary output needs --out".into()));
    }
    info!("building {system:?} dictionary for p = {m}");
    let dict = build_dictionary(m, system.kind(), cfg.tol())?;
    if cfg.strict && dict.metadata.projective {
        return Err(Error::InvalidConfig("Weil calibration is only projective".into()));
    }
    info!("{} signals", dict.len());
    let bytes = match cfg.format {
        Format::Json => io::write_dictionary_json(&dict, cfg),
        Format::Bin => io::encode_binary(&dict),
    };
    emit(cfg, &bytes)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ReportPayload<'a> {
    config: &'a RunConfig,
    dictionary: &'a Path,
    report: &'a CorrelationReport,
}

/// Loads a dictionary and, when it came without provenance, restores it by
/// regenerating the same system.
pub fn load_dictionary(cfg: &RunConfig, path: &Path) -> Result<SignalDictionary> {
    let mut dict = io::read_dictionary(path)?;
    require_p(cfg, Some(dict.modulus.p()))?;
    let bare = dict.iter().all(|s| matches!(s.provenance(), Provenance::External { .. }));
    if bare && dict.kind != SystemKind::Extended && dict.modulus.p() <= cfg.max_p {
        let reference = build_dictionary(dict.modulus, dict.kind, cfg.tol())?;
        if !io::restore_provenance(&mut dict, &reference, 1e-12) {
            info!("dictionary differs from the generated {:?} system; provenance not restored", dict.kind);
        }
    }
    Ok(dict)
}

pub fn verify_with(dict: &SignalDictionary, cfg: &RunConfig, against: Against) -> Result<CorrelationReport> {
    let has_tori = dict.iter().any(|s| matches!(s.provenance(), Provenance::Torus { .. }));
    let group = if has_tori {
        Some((WeilRepresentation::new(dict.modulus), TorusCensus::new(dict.modulus)?))
    } else {
        None
    };
    let opts = VerifyOptions {
        tolerance: cfg.tol(),
        cross: CrossOptions { pair_budget: cfg.pair_budget, seed: cfg.seed },
        bound_set: match against {
            Against::Auto => None,
            Against::Oscillator => Some(BoundSet::Oscillator),
            Against::Heisenberg => Some(BoundSet::Heisenberg),
        },
    };
    analysis::verify_dictionary(dict, opts, group.as_ref().map(|(w, c)| (w, c)))
}

pub fn cmd_verify(cfg: &RunConfig, path: &Path, against: Against) -> Result<u8> {
    let dict = load_dictionary(cfg, path)?;
    info!("verifying {} signals of {:?} at p = {}", dict.len(), dict.kind, dict.modulus);
    let report = verify_with(&dict, cfg, against)?;
    let bytes = io::to_json(&Document::new(ReportPayload { config: cfg, dictionary: path, report: &report }));
    emit(cfg, &bytes)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VIOLATION })
}

/// Shared scenario-file fields naming the dictionary to use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub p: Option<u64>,
    pub system: Option<SystemArg>,
    /// Dictionary file to load instead of generating one.
    pub dictionary: Option<PathBuf>,
}

impl Source {
    fn resolve(&self, cfg: &RunConfig, default_system: SystemArg) -> Result<SignalDictionary> {
        if let Some(path) = &self.dictionary {
            return load_dictionary(cfg, path);
        }
        let m = require_p(cfg, self.p)?;
        let system = match (cfg.system, self.system) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidConfig(format!("--system {a:?} disagrees with {b:?} in the scenario")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => default_system,
        };
        build_dictionary(m, system.kind(), cfg.tol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarFile {
    #[serde(flatten)]
    pub source: Source,
    /// Probe indices; every signal when omitted.
    #[serde(default)]
    pub probes: Option<Vec<usize>>,
    /// True shifts; all of `V` when omitted.
    #[serde(default)]
    pub shifts: Option<Vec<Shift>>,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarRecord {
    pub probe: usize,
    pub shift: Shift,
    pub detection: Option<sims::RadarDetection>,
    pub recovered: bool,
}

#[derive(Debug, Serialize)]
struct RadarPayload<'a> {
    config: &'a RunConfig,
    scenario: &'a RadarFile,
    summary: RadarSummary,
    records: Vec<RadarRecord>,
}

fn read_scenario<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    io::parse_json(&std::fs::read(path)?)
}

pub fn cmd_radar(cfg: &RunConfig, path: &Path) -> Result<u8> {
    let sc: RadarFile = read_scenario(path)?;
    if !(sc.noise.is_finite() && sc.noise >= 0.0) {
        return Err(Error::InvalidConfig("noise must be non-negative".into()));
    }
    let dict = sc.source.resolve(cfg, SystemArg::Nonsplit)?;
    let m = dict.modulus;
    let probes = sc.probes.clone().unwrap_or_else(|| (0..dict.len()).collect());
    if let Some(&bad) = probes.iter().find(|&&i| i >= dict.len()) {
        return Err(Error::InvalidConfig(format!("probe {bad} out of range")));
    }
    let (summary, records) = match &sc.shifts {
        None => (sims::radar_exhaustive(&dict, &probes, sc.noise, cfg.seed), Vec::new()),
        Some(shifts) => {
            let mut records = Vec::new();
            for &probe in &probes {
                for (k, &shift) in shifts.iter().enumerate() {
                    if shift.tau >= m.p() || shift.w >= m.p() {
                        return Err(Error::InvalidConfig(format!("shift {shift:?} outside F_{m}")));
                    }
                    let scenario = sims::RadarScenario {
                        probe: dict.signals[probe].clone(),
                        true_shift: shift.element(m),
                        noise: sc.noise,
                        seed: cfg.seed.wrapping_add((probe * shifts.len() + k) as u64),
                    };
                    let detection = sims::radar_detect(&scenario.probe, &sims::radar_echo(&scenario)).ok();
                    let recovered = detection.is_some_and(|d| d.estimate == shift);
                    records.push(RadarRecord { probe, shift, detection, recovered });
                }
            }
            let summary = RadarSummary {
                probes: probes.len(),
                trials: records.len(),
                recovered: records.iter().filter(|r| r.recovered).count(),
                ambiguous: records.iter().filter(|r| r.detection.is_none()).count(),
                min_separation: records
                    .iter()
                    .map(|r| r.detection.map_or(0.0, |d| d.separation()))
                    .fold(f64::INFINITY, f64::min),
                first_failure: records.iter().find(|r| !r.recovered).map(|r| (r.probe, r.shift)),
            };
            (summary, records)
        }
    };
    info!("radar: {}/{} recovered", summary.recovered, summary.trials);
    let failed = summary.recovered < summary.trials;
    emit(cfg, &io::to_json(&Document::new(RadarPayload { config: cfg, scenario: &sc, summary, records })))?;
    Ok(if cfg.strict && failed { EXIT_VIOLATION } else { EXIT_OK })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CdmaRequest {
    Scenario {
        #[serde(flatten)]
        source: Source,
        users: Vec<CdmaUser>,
        #[serde(default = "default_order")]
        order: u32,
        #[serde(default)]
        noise: f64,
        #[serde(default = "default_search")]
        search: SearchArg,
    },
    Sweep {
        #[serde(flatten)]
        source: Source,
        user_counts: Vec<usize>,
        trials: usize,
        #[serde(default = "default_order")]
        order: u32,
        #[serde(default = "default_model")]
        model: DistortionModel,
        #[serde(default)]
        noise: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArg {
    KnownShift,
    FullSweep,
}

fn default_order() -> u32 {
    2
}

fn default_search() -> SearchArg {
    SearchArg::KnownShift
}

fn default_model() -> DistortionModel {
    DistortionModel::Combined
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user: usize,
    pub sent: u32,
    pub decoded: Option<sims::Decoded>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CdmaResult {
    Scenario { users: Vec<UserOutcome>, bit_errors: usize },
    Sweep { rows: Vec<sims::SweepRow> },
}

#[derive(Debug, Serialize)]
struct CdmaPayload<'a> {
    config: &'a RunConfig,
    scenario: &'a CdmaRequest,
    result: CdmaResult,
}

pub fn cmd_cdma(cfg: &RunConfig, path: &Path) -> Result<u8> {
    let req: CdmaRequest = read_scenario(path)?;
    let (result, failed) = match &req {
        CdmaRequest::Scenario { source, users, order, noise, search } => {
            let dict = source.resolve(cfg, SystemArg::Oscillator)?;
            let sc = CdmaScenario { users: users.clone(), order: *order, noise: *noise, seed: cfg.seed };
            sc.validate(&dict)?;
            let u = sims::cdma_transmit(&dict, &sc);
            let outcomes: Vec<UserOutcome> = sc
                .users
                .iter()
                .enumerate()
                .map(|(i, user)| {
                    let mode = match search {
                        SearchArg::KnownShift => DecodeSearch::KnownShift(user.distortion),
                        SearchArg::FullSweep => DecodeSearch::FullSweep,
                    };
                    match sims::cdma_decode(&u, &dict.signals[user.signal], mode, sc.order) {
                        Ok(d) => UserOutcome { user: i, sent: user.bit, decoded: Some(d), error: None },
                        Err(e) => UserOutcome { user: i, sent: user.bit, decoded: None, error: Some(e.to_string()) },
                    }
                })
                .collect();
            let bit_errors = outcomes.iter().filter(|o| o.decoded.is_none_or(|d| d.bit != o.sent)).count();
            (CdmaResult::Scenario { users: outcomes, bit_errors }, bit_errors > 0)
        }
        CdmaRequest::Sweep { source, user_counts, trials, order, model, noise } => {
            let dict = source.resolve(cfg, SystemArg::Oscillator)?;
            let sweep = SweepConfig {
                user_counts: user_counts.clone(),
                trials: *trials,
                order: *order,
                model: *model,
                noise: *noise,
                seed: cfg.seed,
            };
            if sweep.order < 2 {
                return Err(Error::InvalidConfig("root order must be at least 2".into()));
            }
            let rows = sims::cdma_sweep(&dict, &sweep)?;
            let failed = rows.iter().any(|r| r.errors > 0);
            (CdmaResult::Sweep { rows }, failed)
        }
    };
    emit(cfg, &io::to_json(&Document::new(CdmaPayload { config: cfg, scenario: &req, result })))?;
    Ok(if cfg.strict && failed { EXIT_VIOLATION } else { EXIT_OK })
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let name = match &cli.command {
        Command::Generate => "generate",
        Command::Verify { .. } => "verify",
        Command::Radar { .. } => "radar",
        Command::Cdma { .. } => "cdma",
    };
    let cfg = RunConfig::new(name, &cli.global)?;
    if cfg.threads > 0 {
        // a pool may already exist when running in-process more than once
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match &cli.command {
        Command::Generate => cmd_generate(&cfg),
        Command::Verify { dictionary, against } => cmd_verify(&cfg, dictionary, *against),
        Command::Radar { scenario } => cmd_radar(&cfg, scenario),
        Command::Cdma { scenario } => cmd_cdma(&cfg, scenario),
    }
}

/// Parses arguments and runs the command, mapping errors to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
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
    fn error_classes() {
        assert_eq!(exit_code_for(&Error::NotOddPrime(4)), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::Parse { offset: 3, message: String::new() }), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::NotCyclic { order: 4 }), EXIT_CONSTRUCTION);
        assert_eq!(
            exit_code_for(&Error::DecodeMarginBelowThreshold { interference: 1.0, threshold: 1.0 }),
            EXIT_VIOLATION
        );
    }

    #[test]
    fn scenario_files_parse() {
        let r: RadarFile = serde_json::from_str(r#"{"p": 7, "system": "nonsplit", "shifts": [{"tau": 2, "w": 3}]}"#).unwrap();
        assert_eq!(r.source.p, Some(7));
        assert_eq!(r.shifts.unwrap(), vec![Shift::new(2, 3)]);
        let c: CdmaRequest =
            serde_json::from_str(r#"{"mode": "sweep", "p": 31, "user_counts": [1, 2], "trials": 3}"#).unwrap();
        assert!(matches!(c, CdmaRequest::Sweep { order: 2, model: DistortionModel::Combined, .. }));
        assert!(serde_json::from_str::<RadarFile>(r#"{"p": 7, "bogus": 1}"#).is_err());
    }
}
