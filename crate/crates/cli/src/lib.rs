//! `grs`: runs cataloged or configured scenarios through the closed forms
//! and/or the numerical oracle and writes CSV or JSON series.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grs_core::closed_forms::closed_form_entries;
use grs_core::config::{parse_params, CouplingConfig, InitialAmplitudes, ScenarioConfig};
use grs_core::export::{modes_csv, modes_json, trajectory_csv, trajectory_json, OutputGroup};
use grs_core::field::Scenario;
use grs_core::modes::{propagate_modes, ModeOptions};
use grs_core::propagator::{propagate_entries, Deviation};
use grs_core::theta::{verify_ansatz, verify_scenario, ThetaTable, VerifyOptions, VerifyReport};
use grs_core::{Family, PropagatorConfig, ScenarioParams, Scheme, ThetaAnsatz, Trajectory, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Samples used when neither flags nor config give a window.
pub const DEFAULT_SAMPLES: usize = 1001;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] grs_core::Error),
    #[error("cannot access `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_usage() => EXIT_USAGE,
            CliError::Io { .. } => EXIT_USAGE,
            CliError::Core(_) | CliError::Failed(_) => EXIT_NUMERIC,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "grs", version, about = "Exactly solvable two-level dynamics: closed forms, oracle, export")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a scenario and write its trajectory.
    Run(RunArgs),
    /// List the built-in scenarios and their parameters.
    ListScenarios(ListArgs),
    /// Check scenarios against their solvability condition and the oracle.
    Verify(VerifyArgs),
    /// Propagate two coupled guided modes.
    Modes(ModesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ClosedForm,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Integration step of the oracle.
    #[arg(long)]
    pub step: Option<f64>,
    /// Oracle scheme: midpoint or cf4.
    #[arg(long, env = "GRS_DEFAULT_SCHEME")]
    pub scheme: Option<String>,
}

impl OracleArgs {
    pub fn config(&self) -> CliResult<PropagatorConfig> {
        let mut cfg = PropagatorConfig::default();
        if let Some(s) = &self.scheme {
            cfg.scheme = Scheme::from_str(s)?;
        }
        if let Some(h) = self.step {
            cfg.step = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Built-in scenario name (see `list-scenarios`).
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameters as name=value,name=value.
    #[arg(long)]
    pub params: Option<String>,
    /// Fraction of the detuning carried by the phase velocity.
    #[arg(long)]
    pub split: Option<f64>,
    /// End of the time window (default depends on the scenario).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of equally spaced samples including both ends.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub engine: Engine,
    /// Column groups: fields, detuning, entries, probabilities, expectations, all.
    #[arg(long, default_value = "all")]
    pub outputs: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Scenario to check; all cataloged scenarios when neither this nor --config is given.
    #[command(flatten)]
    pub source: SourceArgs,
    /// Ansatz name (zero, case1, case2); defaults to the scenario's own.
    #[arg(long, conflicts_with = "ansatz_table")]
    pub ansatz: Option<String>,
    /// CSV file of tau,Theta rows.
    #[arg(long)]
    pub ansatz_table: Option<PathBuf>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub oracle_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    /// Coupling JSON file.
    #[arg(long, conflicts_with = "coupling")]
    pub config: Option<PathBuf>,
    /// Built-in coupling: constant or sech.
    #[arg(long)]
    pub coupling: Option<String>,
    /// Coupling parameters k_re, k_im, width.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Initial amplitudes as re_A,im_A,re_B,im_B.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    /// Keep the initial power instead of normalizing it to one.
    #[arg(long)]
    pub raw_power: bool,
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

/// Everything `run` needs, resolved from flags and config.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub params: ScenarioParams,
    pub window: Window,
    pub outputs: Vec<OutputGroup>,
    pub engine: Engine,
    pub format: Format,
    pub oracle: PropagatorConfig,
}

/// Maximum closed-form/oracle differences written for `--engine both`.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationSummary {
    pub scenario: String,
    pub samples: usize,
    pub t_max: f64,
    pub scheme: Scheme,
    pub step: f64,
    pub max_dp: f64,
    pub max_da: f64,
    pub max_db: f64,
    pub max_unitarity_oracle: f64,
    pub max_unitarity_closed_form: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub data: String,
    pub summary: Option<DeviationSummary>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn resolve_source(src: &SourceArgs) -> CliResult<(ScenarioParams, Option<Window>)> {
    let (mut params, window) = match (&src.scenario, &src.config) {
        (Some(name), None) => (ScenarioParams::new(Family::from_str(name)?), None),
        (None, Some(path)) => {
            let cfg = ScenarioConfig::from_json_str(&read(path)?)?;
            (cfg.params(), cfg.window)
        }
        _ => return Err(CliError::Usage("give exactly one of --scenario or --config".into())),
    };
    if let Some(text) = &src.params {
        params.values.extend(parse_params(text)?);
    }
    if let Some(f) = src.split {
        params.split_fraction = Some(f);
    }
    Ok((params, window))
}

fn resolve_window(src: &SourceArgs, configured: Option<Window>, scenario: &Scenario) -> CliResult<Window> {
    let t_max = src.t_max.or(configured.map(|w| w.t_max)).unwrap_or_else(|| scenario.default_t_max());
    let samples = src.samples.or(configured.map(|w| w.samples)).unwrap_or(DEFAULT_SAMPLES);
    Ok(Window::new(t_max, samples)?)
}

impl RunSpec {
    pub fn from_args(args: &RunArgs) -> CliResult<Self> {
        let (params, configured) = resolve_source(&args.source)?;
        let scenario = params.build()?;
        Ok(Self {
            window: resolve_window(&args.source, configured, &scenario)?,
            params,
            outputs: OutputGroup::parse_list(&args.outputs)?,
            engine: args.engine,
            format: args.format,
            oracle: args.oracle.config()?,
        })
    }
}

fn render(traj: &Trajectory, spec: &RunSpec) -> CliResult<String> {
    Ok(match spec.format {
        Format::Csv => trajectory_csv(traj, &spec.outputs)?,
        Format::Json => trajectory_json(traj, &spec.outputs)?,
    })
}

/// Evaluates a run spec; the caller decides where output goes.
pub fn execute_run(spec: &RunSpec) -> CliResult<RunOutput> {
    let scenario = spec.params.build()?;
    let scale = scenario.abscissa_scale();
    let profile = &scenario.profile;
    let closed = || -> CliResult<Trajectory> {
        Ok(Trajectory::from_entries(profile, closed_form_entries(&scenario, &spec.window)?, scale))
    };
    let oracle = || -> CliResult<Trajectory> {
        Ok(Trajectory::from_entries(profile, propagate_entries(profile, &spec.oracle, &spec.window)?, scale))
    };
    match spec.engine {
        Engine::ClosedForm => Ok(RunOutput { data: render(&closed()?, spec)?, summary: None }),
        Engine::Oracle => Ok(RunOutput { data: render(&oracle()?, spec)?, summary: None }),
        Engine::Both => {
            let (c, o) = (closed()?, oracle()?);
            let Deviation { max_dp, max_da, max_db } = c.deviation(&o);
            let summary = DeviationSummary {
                scenario: profile.label().to_string(),
                samples: spec.window.samples,
                t_max: spec.window.t_max,
                scheme: spec.oracle.scheme,
                step: spec.oracle.step,
                max_dp,
                max_da,
                max_db,
                max_unitarity_oracle: o.max_unitarity_defect(),
                max_unitarity_closed_form: c.max_unitarity_defect(),
            };
            Ok(RunOutput { data: render(&c, spec)?, summary: Some(summary) })
        }
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    let owned;
    let text = if text.ends_with('\n') {
        text
    } else {
        owned = format!("{text}\n");
        &owned
    };
    match out {
        Some(path) => write(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"));
    s.push('\n');
    s
}

fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let spec = RunSpec::from_args(args)?;
    let output = execute_run(&spec)?;
    emit(args.out.as_deref(), &output.data, stdout)?;
    if let Some(summary) = &output.summary {
        let text = to_json(summary);
        let _ = stderr.write_all(text.as_bytes());
        if let Some(out) = &args.out {
            write(&summary_path(out), &text)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CatalogEntry {
    name: &'static str,
    params: &'static [&'static str],
    split: bool,
    description: &'static str,
}

fn cmd_list(args: &ListArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let entries: Vec<CatalogEntry> = Family::CATALOG
        .iter()
        .chain(std::iter::once(&Family::Custom))
        .map(|f| CatalogEntry { name: f.name(), params: f.allowed_params(), split: f.accepts_split(), description: f.description() })
        .collect();
    let text = match args.format {
        Format::Json => to_json(&entries),
        Format::Csv => {
            let mut s = String::from("name,params,split,description\n");
            for e in &entries {
                s.push_str(&format!("{},{},{},\"{}\"\n", e.name, e.params.join(";"), e.split, e.description));
            }
            s
        }
    };
    emit(None, &text, stdout)
}

fn verify_options(args: &VerifyArgs) -> CliResult<VerifyOptions> {
    let mut opts = VerifyOptions::default();
    if args.oracle.scheme.is_some() || args.oracle.step.is_some() {
        let mut cfg = opts.oracle;
        if let Some(s) = &args.oracle.scheme {
            cfg.scheme = Scheme::from_str(s)?;
        }
        if let Some(h) = args.oracle.step {
            cfg.step = h;
        }
        cfg.validate()?;
        opts.oracle = cfg;
    }
    if let Some(t) = args.residual_tol {
        opts.residual_tol = t;
    }
    if let Some(t) = args.oracle_tol {
        opts.oracle_tol = t;
    }
    Ok(opts)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let opts = verify_options(args)?;
    let ansatz = match (&args.ansatz, &args.ansatz_table) {
        (Some(name), _) => Some(ThetaAnsatz::by_name(name)?),
        (None, Some(path)) => {
            let label = path.file_stem().map_or("table".into(), |s| s.to_string_lossy().into_owned());
            Some(ThetaAnsatz::from_table(label, ThetaTable::from_csv_str(&read(path)?)?))
        }
        (None, None) => None,
    };
    let targets: Vec<(ScenarioParams, Option<Window>)> = if args.source.scenario.is_none() && args.source.config.is_none() {
        Family::CATALOG.iter().map(|&f| (ScenarioParams::new(f), None)).collect()
    } else {
        vec![resolve_source(&args.source)?]
    };
    let mut reports: Vec<VerifyReport> = Vec::new();
    for (params, configured) in targets {
        let scenario = params.build()?;
        let window = resolve_window(&args.source, configured, &scenario)?;
        reports.push(match &ansatz {
            Some(a) => verify_ansatz(a, &scenario.profile, &window, &opts),
            None => verify_scenario(&scenario, &window, &opts),
        });
    }
    let text = to_json(&reports);
    emit(args.out.as_deref(), &text, stdout)?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.profile.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("verification failed for: {}", failed.join(", "))))
    }
}

fn parse_initial(text: &str) -> CliResult<InitialAmplitudes> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--initial `{text}`: expected four numbers re_A,im_A,re_B,im_B")))?;
    match v.as_slice() {
        &[ar, ai, br, bi] => Ok(InitialAmplitudes { a: [ar, ai], b: [br, bi] }),
        _ => Err(CliError::Usage(format!("--initial `{text}`: expected four numbers re_A,im_A,re_B,im_B"))),
    }
}

fn coupling_config(args: &ModesArgs) -> CliResult<CouplingConfig> {
    let mut cfg = match (&args.config, &args.coupling) {
        (Some(path), None) => CouplingConfig::from_json_str(&read(path)?)?,
        (None, Some(family)) => {
            let params = match &args.params {
                Some(p) => parse_params(p)?,
                None => Default::default(),
            };
            let doc = serde_json::json!({
                "delta": args.delta.unwrap_or(0.0),
                "coupling": { "family": family, "params": params },
            });
            CouplingConfig::from_json_str(&doc.to_string())?
        }
        _ => return Err(CliError::Usage("give exactly one of --config or --coupling".into())),
    };
    if args.config.is_some() {
        if let Some(d) = args.delta {
            cfg.delta = d;
        }
        if args.params.is_some() {
            return Err(CliError::Usage("--params only applies with --coupling".into()));
        }
    }
    if let Some(text) = &args.initial {
        cfg.initial = parse_initial(text)?;
    }
    if args.raw_power {
        cfg.normalize = false;
    }
    Ok(cfg)
}

/// Coupled-mode trajectory rendered in the requested format.
pub fn execute_modes(args: &ModesArgs) -> CliResult<String> {
    let cfg = coupling_config(args)?;
    let spec = cfg.spec()?;
    let z_max = args.z_max.or(cfg.window.map(|w| w.t_max)).unwrap_or(10.0);
    let samples = args.samples.or(cfg.window.map(|w| w.samples)).unwrap_or(DEFAULT_SAMPLES);
    let window = Window::new(z_max, samples)?;
    let opts = ModeOptions { propagator: args.oracle.config()?, normalize: cfg.normalize };
    let traj = propagate_modes(&spec, cfg.initial.state(), &window, &opts)?;
    Ok(match args.format {
        Format::Csv => modes_csv(&traj)?,
        Format::Json => modes_json(&traj)?,
    })
}

fn cmd_modes(args: &ModesArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let text = execute_modes(args)?;
    emit(args.out.as_deref(), &text, stdout)
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::ListScenarios(a) => cmd_list(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Modes(a) => cmd_modes(a, stdout),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
