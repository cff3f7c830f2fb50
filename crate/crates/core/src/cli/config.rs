use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{ConfigExit, EXIT_OK};
use crate::decoherence::DecayMeasure;
use crate::multiqubit::MAX_QUBITS;
use crate::protocols::{default_dicke_index, DerivativeMode, ThetaGrid, DEFAULT_FD_STEP};
use crate::qudit::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Qfi,
    SweepDicke,
    SweepGhz,
    Decoherence,
    Equivalence,
    Reproduce,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Qfi => "qfi",
            CommandKind::SweepDicke => "sweep-dicke",
            CommandKind::SweepGhz => "sweep-ghz",
            CommandKind::Decoherence => "decoherence",
            CommandKind::Equivalence => "equivalence",
            CommandKind::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Probe states accepted by the `qfi` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Ghz,
    Dicke,
    Coherent,
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeArg {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeasureArg {
    PhaseGenerator,
    CollectiveMax,
}

/// Every configurable field, all optional. Config files use these names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<CommandKind>,
    pub d: Option<usize>,
    pub d_list: Option<Vec<usize>>,
    pub i: Option<usize>,
    pub theta_start: Option<f64>,
    pub theta_stop: Option<f64>,
    pub theta_count: Option<usize>,
    pub gamma: Option<f64>,
    pub t_list: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub derivative_mode: Option<DerivativeArg>,
    pub fd_step: Option<f64>,
    pub measurements: Option<u32>,
    pub state: Option<StateKind>,
    pub polar: Option<f64>,
    pub azimuth: Option<f64>,
    pub figure: Option<u8>,
    pub random_states: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub measure: Option<MeasureArg>,
}

impl PartialConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        macro_rules! pick {
            ($($f:ident),*) => { PartialConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, d, d_list, i, theta_start, theta_stop, theta_count, gamma, t_list, out,
            format, derivative_mode, fd_step, measurements, state, polar, azimuth, figure,
            random_states, seed, tol, measure
        )
    }
}

/// Fully resolved configuration; echoed verbatim into the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub d: Option<usize>,
    pub d_list: Option<Vec<usize>>,
    pub i: Option<usize>,
    pub theta_start: f64,
    pub theta_stop: f64,
    pub theta_count: usize,
    pub gamma: f64,
    pub t_list: Option<Vec<f64>>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub derivative_mode: DerivativeMode,
    pub measurements: u32,
    pub state: Option<StateKind>,
    pub polar: f64,
    pub azimuth: f64,
    pub figure: Option<u8>,
    pub random_states: usize,
    pub seed: u64,
    pub tol: f64,
    pub measure: DecayMeasure,
}

impl RunConfig {
    pub fn grid(&self) -> ThetaGrid {
        ThetaGrid::new(self.theta_start, self.theta_stop, self.theta_count)
            .expect("grid validated when the config was built")
    }

    /// `d_list`, falling back to the single `d`.
    pub fn dims(&self) -> Vec<usize> {
        match (&self.d_list, self.d) {
            (Some(list), _) => list.clone(),
            (None, Some(d)) => vec![d],
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qudit-metrology", version, about = "Qudit parameter-estimation sweeps and QFI reports")]
struct Cli {
    /// JSON file with defaults for any field; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for data files and manifest.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// QFI report for a probe state.
    Qfi(QfiArgs),
    /// Dicke-like protocol sweep over θ.
    SweepDicke(SweepArgs),
    /// GHZ-like protocol sweep over θ.
    SweepGhz(SweepArgs),
    /// QFI decay of the dephased GHZ-like probe.
    Decoherence(DecoherenceArgs),
    /// Qudit vs symmetric multi-qubit QFI comparison.
    Equivalence(EquivalenceArgs),
    /// Regenerates the data behind a figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct QfiArgs {
    #[arg(long, value_enum)]
    state: Option<StateKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    polar: Option<f64>,
    #[arg(long)]
    azimuth: Option<f64>,
    #[arg(long = "m")]
    measurements: Option<u32>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    theta_start: Option<f64>,
    #[arg(long)]
    theta_stop: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
    #[arg(long, value_enum)]
    derivative_mode: Option<DerivativeArg>,
    /// Step of the central difference.
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long = "m")]
    measurements: Option<u32>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct DecoherenceArgs {
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t_list: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
}

#[derive(Debug, Args)]
struct EquivalenceArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long)]
    random_states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[arg(long)]
    figure: Option<u8>,
    #[command(flatten)]
    grid: GridArgs,
}

impl GridArgs {
    fn into_partial(self, p: &mut PartialConfig) {
        p.theta_start = self.theta_start;
        p.theta_stop = self.theta_stop;
        p.theta_count = self.theta_count;
        p.derivative_mode = self.derivative_mode;
        p.fd_step = self.fd_step;
        p.measurements = self.measurements;
    }
}

impl Cli {
    fn into_partial(self) -> (Option<PathBuf>, PartialConfig) {
        let mut p = PartialConfig {
            out: self.out,
            format: self.format,
            ..PartialConfig::default()
        };
        match self.command {
            Cmd::Qfi(a) => {
                p.command = Some(CommandKind::Qfi);
                p.state = a.state;
                p.d = a.d;
                p.i = a.i;
                p.polar = a.polar;
                p.azimuth = a.azimuth;
                p.measurements = a.measurements;
            }
            Cmd::SweepDicke(a) => {
                p.command = Some(CommandKind::SweepDicke);
                p.d = a.d;
                p.i = a.i;
                a.grid.into_partial(&mut p);
            }
            Cmd::SweepGhz(a) => {
                p.command = Some(CommandKind::SweepGhz);
                p.d = a.d;
                p.i = a.i;
                a.grid.into_partial(&mut p);
            }
            Cmd::Decoherence(a) => {
                p.command = Some(CommandKind::Decoherence);
                p.d_list = a.d_list;
                p.gamma = a.gamma;
                p.t_list = a.t_list;
                p.measure = a.measure;
            }
            Cmd::Equivalence(a) => {
                p.command = Some(CommandKind::Equivalence);
                p.d = a.d;
                p.d_list = a.d_list;
                p.random_states = a.random_states;
                p.seed = a.seed;
                p.tol = a.tol;
            }
            Cmd::Reproduce(a) => {
                p.command = Some(CommandKind::Reproduce);
                p.figure = a.figure;
                a.grid.into_partial(&mut p);
            }
        }
        (self.config, p)
    }
}

fn read_config_file(path: &Path) -> Result<PartialConfig, ConfigExit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigExit::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigExit::usage(format!("malformed config {}: {e}", path.display())))
}

fn check_dim(d: usize, max: usize) -> Result<(), ConfigExit> {
    if (2..=max).contains(&d) {
        Ok(())
    } else {
        Err(ConfigExit::usage(format!(
            "dimension d = {d} outside the supported range 2..={max}"
        )))
    }
}

fn require<T>(value: Option<T>, field: &str, command: CommandKind) -> Result<T, ConfigExit> {
    value.ok_or_else(|| {
        ConfigExit::usage(format!("{} requires `{field}`", command.name()))
    })
}

/// Parses argv (program name first) plus the optional `--config` JSON file.
pub fn parse_config<I, S>(argv: I) -> Result<RunConfig, ConfigExit>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { super::EXIT_USAGE } else { EXIT_OK };
        ConfigExit {
            code,
            message: e.render().to_string(),
        }
    })?;
    let (file, flags) = cli.into_partial();
    let base = match file {
        Some(path) => read_config_file(&path)?,
        None => PartialConfig::default(),
    };
    if let (Some(a), Some(b)) = (base.command, flags.command) {
        if a != b {
            return Err(ConfigExit::usage(format!(
                "config file is for `{}` but the command line asks for `{}`",
                a.name(),
                b.name()
            )));
        }
    }
    resolve(base.overlay(flags))
}

/// Fills defaults and validates the per-command required fields.
pub fn resolve(p: PartialConfig) -> Result<RunConfig, ConfigExit> {
    let command = p
        .command
        .ok_or_else(|| ConfigExit::usage("no command given"))?;
    let default_grid = ThetaGrid::default_sweep();
    let grid = ThetaGrid::new(
        p.theta_start.unwrap_or(default_grid.start()),
        p.theta_stop.unwrap_or(default_grid.stop()),
        p.theta_count.unwrap_or(default_grid.count()),
    )
    .map_err(|e| ConfigExit::usage(e.to_string()))?;
    let derivative_mode = match p.derivative_mode.unwrap_or(DerivativeArg::Analytic) {
        DerivativeArg::Analytic => DerivativeMode::Analytic,
        DerivativeArg::FiniteDifference => {
            let h = p.fd_step.unwrap_or(DEFAULT_FD_STEP);
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigExit::usage(format!("fd_step must be positive, got {h}")));
            }
            DerivativeMode::FiniteDifference(h)
        }
    };
    let measurements = p.measurements.unwrap_or(1);
    if measurements < 1 {
        return Err(ConfigExit::usage("m must be at least 1"));
    }
    let mut config = RunConfig {
        command,
        d: p.d,
        d_list: p.d_list,
        i: p.i,
        theta_start: grid.start(),
        theta_stop: grid.stop(),
        theta_count: grid.count(),
        gamma: p.gamma.unwrap_or(1.0),
        t_list: p.t_list,
        out: p.out.unwrap_or_else(|| PathBuf::from("out")),
        format: p.format.unwrap_or_default(),
        derivative_mode,
        measurements,
        state: p.state,
        polar: p.polar.unwrap_or(0.0),
        azimuth: p.azimuth.unwrap_or(0.0),
        figure: p.figure,
        random_states: p.random_states.unwrap_or(50),
        seed: p.seed.unwrap_or(7),
        tol: p.tol.unwrap_or(1e-8),
        measure: match p.measure.unwrap_or(MeasureArg::PhaseGenerator) {
            MeasureArg::PhaseGenerator => DecayMeasure::PhaseGenerator,
            MeasureArg::CollectiveMax => DecayMeasure::CollectiveMax,
        },
    };
    match command {
        CommandKind::Qfi => {
            let state = require(config.state, "state", command)?;
            let d = require(config.d, "d", command)?;
            check_dim(d, MAX_DIM)?;
            if state == StateKind::Dicke {
                let i = *config.i.get_or_insert(default_dicke_index(d));
                check_level(i, d)?;
            }
        }
        CommandKind::SweepDicke => {
            let d = require(config.d, "d", command)?;
            check_dim(d, MAX_DIM)?;
            let i = *config.i.get_or_insert(default_dicke_index(d));
            check_level(i, d)?;
        }
        CommandKind::SweepGhz => {
            check_dim(require(config.d, "d", command)?, MAX_DIM)?;
        }
        CommandKind::Decoherence => {
            let dims = config.dims();
            if dims.is_empty() {
                return Err(ConfigExit::usage("decoherence requires `d_list`"));
            }
            for d in dims {
                check_dim(d, MAX_DIM)?;
            }
            let t_list = require(config.t_list.as_ref(), "t_list", command)?;
            if t_list.is_empty() {
                return Err(ConfigExit::usage("t_list must not be empty"));
            }
            let gamma = config.gamma;
            if !(gamma >= 0.0 && gamma.is_finite()) || t_list.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(ConfigExit::usage("gamma and all t must be finite and non-negative"));
            }
        }
        CommandKind::Equivalence => {
            let dims = config.dims();
            if dims.is_empty() {
                return Err(ConfigExit::usage("equivalence requires `d` or `d_list`"));
            }
            for d in dims {
                check_dim(d, MAX_QUBITS + 1)?;
            }
            if config.tol.is_nan() || config.tol < 0.0 {
                return Err(ConfigExit::usage("tol must be non-negative"));
            }
        }
        CommandKind::Reproduce => match require(config.figure, "figure", command)? {
            1 | 2 => {}
            f => return Err(ConfigExit::usage(format!("unknown figure {f}; expected 1 or 2"))),
        },
    }
    Ok(config)
}

fn check_level(i: usize, d: usize) -> Result<(), ConfigExit> {
    if i < d {
        Ok(())
    } else {
        Err(ConfigExit::usage(format!("level i = {i} out of range for d = {d}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigExit> {
        parse_config(std::iter::once("qudit-metrology").chain(args.iter().copied()))
    }

    #[test]
    fn sweep_defaults() {
        let c = parse(&["sweep-ghz", "--d", "8"]).unwrap();
        assert_eq!(c.command, CommandKind::SweepGhz);
        assert_eq!(c.grid(), ThetaGrid::default_sweep());
        assert_eq!(c.derivative_mode, DerivativeMode::Analytic);
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.measurements, 1);
        let c = parse(&["sweep-dicke", "--d", "4"]).unwrap();
        assert_eq!(c.i, Some(1));
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["sweep-ghz", "--d", "200"][..],
            &["sweep-ghz"],
            &["sweep-ghz", "--d", "4", "--bogus"],
            &["sweep-dicke", "--d", "4", "--i", "4"],
            &["sweep-ghz", "--d", "4", "--theta-count", "1"],
            &["reproduce", "--figure", "3"],
            &["equivalence", "--d", "14"],
            &["decoherence", "--d-list", "2,3"],
            &["qfi", "--d", "3"],
            &[],
        ] {
            let e = parse(args).unwrap_err();
            assert_eq!(e.code, 2, "{args:?}");
        }
        let e = parse(&["sweep-ghz", "--d", "200"]).unwrap_err();
        assert!(e.message.contains("2..=64"));
        assert_eq!(parse(&["--help"]).unwrap_err().code, 0);
    }

    #[test]
    fn file_values_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"d": 5, "theta_count": 11, "format": "json"}"#).unwrap();
        let c = parse(&["sweep-ghz", "--config", path.to_str().unwrap(), "--d", "6"]).unwrap();
        assert_eq!(c.d, Some(6));
        assert_eq!(c.theta_count, 11);
        assert_eq!(c.format, OutputFormat::Json);
        std::fs::write(&path, r#"{"d": 5, "nonsense": 1}"#).unwrap();
        assert_eq!(parse(&["sweep-ghz", "--config", path.to_str().unwrap()]).unwrap_err().code, 2);
        std::fs::write(&path, r#"{"command": "qfi"}"#).unwrap();
        assert_eq!(parse(&["sweep-ghz", "--config", path.to_str().unwrap(), "--d", "3"]).unwrap_err().code, 2);
    }

    #[test]
    fn decoherence_lists() {
        let c = parse(&["decoherence", "--d-list", "2,3,4", "--gamma", "0.5", "--t-list", "0,0.1,0.2"]).unwrap();
        assert_eq!(c.dims(), vec![2, 3, 4]);
        assert_eq!(c.t_list, Some(vec![0.0, 0.1, 0.2]));
        assert_eq!(parse(&["decoherence", "--d-list", "3", "--t-list", "-1"]).unwrap_err().code, 2);
    }
}
