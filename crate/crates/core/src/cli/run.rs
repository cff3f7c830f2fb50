use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CommandKind, OutputFormat, RunConfig, StateKind};
use super::CliError;
use crate::decoherence::{power_decay_curve, qfi_decay_curve, DecayCurve, DecayMeasure};
use crate::direction::GeneratorDirection;
use crate::multiqubit::{qfi_equivalence_check, EquivalenceReport};
use crate::output::{csv_line, format_number, sha256_hex, write_atomic};
use crate::par::{self, Execution};
use crate::protocols::{
    default_dicke_index, jz_view, run_dicke_protocol, run_ghz_protocol, ProtocolOptions,
    ProtocolResult, ThetaGrid,
};
use crate::qfi::{qfi_report, QfiReport};
use crate::qudit::{basis_state, ghz_like, spin_coherent, DensityMatrix, PureState};
use crate::random::{random_direction, random_pure_state};

/// Worker-count override; unset means one worker per available core.
pub const WORKERS_ENV: &str = "QUDIT_WORKERS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub workers: usize,
    pub files: Vec<FileRecord>,
    pub wall_time_s: f64,
}

struct Output {
    name: String,
    bytes: Vec<u8>,
}

fn output(name: String, text: String) -> Output {
    Output {
        name,
        bytes: text.into_bytes(),
    }
}

fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<(T, usize), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Invariant(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (f(), rayon::current_num_threads())))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(
    _workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<(T, usize), CliError> {
    Ok((f(), 1))
}

/// Runs the configured command, writes its data files and `manifest.json`
/// into `config.out`, and returns the manifest path.
pub fn run(config: &RunConfig) -> Result<(PathBuf, RunManifest), CliError> {
    let start = Instant::now();
    let workers = workers_from_env()?;
    let (produced, workers) = with_workers(workers, || produce(config))?;
    let (outputs, deferred) = produced?;

    std::fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    let mut files = Vec::with_capacity(outputs.len());
    for out in &outputs {
        let path = config.out.join(&out.name);
        write_atomic(&path, &out.bytes).map_err(|e| CliError::io(&path, e))?;
        files.push(FileRecord {
            name: out.name.clone(),
            bytes: out.bytes.len(),
            sha256: sha256_hex(&out.bytes),
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        workers,
        files,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = config.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
    write_atomic(&path, text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
    // failures found after the data was computed are reported once it is on disk
    match deferred {
        Some(e) => Err(e),
        None => Ok((path, manifest)),
    }
}

type Produced = Result<(Vec<Output>, Option<CliError>), CliError>;

fn produce(config: &RunConfig) -> Produced {
    let opts = ProtocolOptions {
        derivative_mode: config.derivative_mode,
        measurements: config.measurements,
        execution: Execution::Auto,
    };
    let ext = config.format.extension();
    let outputs = match config.command {
        CommandKind::Qfi => vec![qfi_output(config)?],
        CommandKind::SweepDicke => {
            let d = config.d.expect("validated");
            let i = config.i.unwrap_or(default_dicke_index(d));
            let r = run_dicke_protocol(d, i, &config.grid(), &opts)?;
            vec![protocol_output(format!("sweep_dicke_d{d}_i{i}.{ext}"), &r, config.format)?]
        }
        CommandKind::SweepGhz => {
            let d = config.d.expect("validated");
            let r = run_ghz_protocol(d, &config.grid(), &opts)?;
            vec![protocol_output(format!("sweep_ghz_d{d}.{ext}"), &r, config.format)?]
        }
        CommandKind::Decoherence => vec![decoherence_output(config)?],
        CommandKind::Equivalence => return equivalence_outputs(config),
        CommandKind::Reproduce => reproduce_outputs(config, &opts)?,
    };
    Ok((outputs, None))
}

fn protocol_output(name: String, r: &ProtocolResult, format: OutputFormat) -> Result<Output, CliError> {
    r.check_invariants()?;
    let text = match format {
        OutputFormat::Csv => r.to_csv(),
        OutputFormat::Json => r.to_json(),
    };
    Ok(output(name, text))
}

fn qfi_output(config: &RunConfig) -> Result<Output, CliError> {
    let d = config.d.expect("validated");
    let state = config.state.expect("validated");
    let m = config.measurements;
    let (label, report): (&str, QfiReport) = match state {
        StateKind::Ghz => ("ghz", qfi_report(&ghz_like(d)?, m)?),
        StateKind::Dicke => {
            let i = config.i.expect("validated");
            ("dicke", qfi_report(&basis_state(d, i)?, m)?)
        }
        StateKind::Coherent => (
            "coherent",
            qfi_report(&spin_coherent(d, config.polar, config.azimuth)?, m)?,
        ),
        StateKind::MaximallyMixed => ("maximally_mixed", qfi_report(&DensityMatrix::maximally_mixed(d)?, m)?),
    };
    let text = match config.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report).expect("reports serialize"),
        OutputFormat::Csv => {
            let [nx, ny, nz] = report.direction.components();
            format!(
                "f_q,n_x,n_y,n_z,d_eff,nonclassicality,metrological_power,crb\n{}\n",
                csv_line(&[
                    report.f_q,
                    nx,
                    ny,
                    nz,
                    report.d_eff,
                    report.nonclassicality,
                    report.metrological_power,
                    report.crb
                ])
            )
        }
    };
    Ok(output(format!("qfi_{label}_d{d}.{}", config.format.extension()), text))
}

fn decoherence_output(config: &RunConfig) -> Result<Output, CliError> {
    let gamma_t: Vec<f64> = config
        .t_list
        .as_ref()
        .expect("validated")
        .iter()
        .map(|t| config.gamma * t)
        .collect();
    let dims = config.dims();
    let curve: DecayCurve = match config.measure {
        DecayMeasure::PhaseGenerator => qfi_decay_curve(&dims, &gamma_t, Execution::Auto)?,
        DecayMeasure::CollectiveMax => power_decay_curve(&dims, &gamma_t, Execution::Auto)?,
    };
    curve.check_invariants()?;
    let text = match config.format {
        OutputFormat::Csv => curve.to_csv(),
        OutputFormat::Json => curve.to_json(),
    };
    Ok(output(format!("decoherence.{}", config.format.extension()), text))
}

/// Collective directions used by the equivalence check: the three axes plus
/// three random ones.
fn check_directions(rng: &mut ChaCha8Rng) -> Vec<GeneratorDirection> {
    let mut dirs = vec![GeneratorDirection::X, GeneratorDirection::Y, GeneratorDirection::Z];
    dirs.extend((0..3).map(|_| random_direction(rng)));
    dirs
}

fn equivalence_report(d: usize, config: &RunConfig) -> Result<EquivalenceReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(d as u64));
    let directions = check_directions(&mut rng);
    let mut states: Vec<(String, PureState)> = vec![("ghz".into(), ghz_like(d)?)];
    for i in 0..d {
        states.push((format!("dicke_{i}"), basis_state(d, i)?));
    }
    for k in 0..config.random_states {
        states.push((format!("random_{k}"), random_pure_state(d, &mut rng)?));
    }
    let reports = par::map(Execution::Auto, &states, |(label, psi)| {
        qfi_equivalence_check(psi, label, &directions, config.tol)
    });
    let mut merged: Option<EquivalenceReport> = None;
    for r in reports {
        let r = r?;
        merged = Some(match merged {
            None => r,
            Some(m) => m.merge(r)?,
        });
    }
    Ok(merged.expect("at least the GHZ case is present"))
}

fn equivalence_outputs(config: &RunConfig) -> Produced {
    let mut reports = Vec::new();
    for d in config.dims() {
        reports.push(equivalence_report(d, config)?);
    }
    let text = match config.format {
        OutputFormat::Json => serde_json::to_string_pretty(&reports).expect("reports serialize"),
        OutputFormat::Csv => {
            let mut s = String::from("n_qubits,state_label,n_x,n_y,n_z,qudit_qfi,multiqubit_qfi,residual\n");
            for r in &reports {
                for c in &r.cases {
                    let [x, y, z] = c.direction.components();
                    s.push_str(&format!("{},{},", r.n_qubits, c.state_label));
                    s.push_str(&csv_line(&[x, y, z, c.qudit_qfi, c.multiqubit_qfi, c.residual]));
                    s.push('\n');
                }
            }
            s
        }
    };
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("N = {} (max residual {})", r.n_qubits, format_number(r.max_residual)))
        .collect();
    let deferred = (!failed.is_empty()).then(|| {
        CliError::Invariant(format!(
            "qudit and multi-qubit QFI differ beyond tol = {} for {}",
            format_number(config.tol),
            failed.join(", ")
        ))
    });
    Ok((vec![output(format!("equivalence.{}", config.format.extension()), text)], deferred))
}

/// Figure dimensions; both figures compare d = 4 and d = 8.
const FIGURE_DIMS: [usize; 2] = [4, 8];

fn reproduce_outputs(config: &RunConfig, opts: &ProtocolOptions) -> Result<Vec<Output>, CliError> {
    let grid: ThetaGrid = config.grid();
    let ext = config.format.extension();
    let mut outputs = Vec::new();
    for d in FIGURE_DIMS {
        if config.figure == Some(1) {
            let i = default_dicke_index(d);
            let r = run_dicke_protocol(d, i, &grid, opts)?;
            outputs.push(protocol_output(format!("figure1_d{d}_i{i}.{ext}"), &r, config.format)?);
        } else {
            let r = run_ghz_protocol(d, &grid, opts)?;
            outputs.push(protocol_output(format!("figure2_d{d}.{ext}"), &r, config.format)?);
            let jz = jz_view(&r)?;
            let text = match config.format {
                OutputFormat::Csv => {
                    let mut s = String::from("theta,jz_expectation\n");
                    for (row, j) in r.rows.iter().zip(&jz) {
                        s.push_str(&csv_line(&[row.theta, *j]));
                        s.push('\n');
                    }
                    s
                }
                OutputFormat::Json => {
                    let theta: Vec<f64> = r.rows.iter().map(|row| row.theta).collect();
                    serde_json::to_string_pretty(&serde_json::json!({
                        "d": d,
                        "theta": theta,
                        "jz_expectation": jz,
                    }))
                    .expect("plain numbers serialize")
                }
            };
            outputs.push(output(format!("figure2_d{d}_jz.{ext}"), text));
        }
    }
    Ok(outputs)
}
