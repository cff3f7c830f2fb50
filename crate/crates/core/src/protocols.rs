//! Four-stage estimation protocols: prepare a probe, encode θ with a unitary,
//! read out an observable, and estimate θ through error propagation.
//!
//! Two protocols are provided. The Dicke-like protocol rotates a basis level
//! |i⟩ about x and reads out Jz². The GHZ-like protocol imprints a phase with
//! P = diag(0, …, d−1), recombines |d−1⟩ onto |1⟩, mixes |0⟩ and |1⟩ with a
//! π/2 pulse and reads out P.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QuditError, Result};
use crate::linalg::{commutator, CMatrix, I};
use crate::output::{csv_line, float_token, parse_number};
use crate::par::{self, Execution};
use crate::qfi::{cramer_rao, qfi_pure};
use crate::qudit::{
    apply_sequence, basis_state, compile_preparation, ghz_like, phase_generator, spin_operators,
    GivensPulse, HermitianObservable, PreparationTarget, Propagator, PulseSequence, PureState,
    QuditState, Sign,
};

/// Slopes at or below this magnitude are treated as nodes (infinite precision).
pub const SLOPE_TOL: f64 = 1e-12;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const CSV_HEADER: &str = "theta,expectation,variance,d_expectation,precision_sq,qfi,crb";

/// Axis phase of the fixed π/2 mixing pulse on levels (0, 1).
pub const MIXING_AXIS_PHASE: f64 = 3.0 * FRAC_PI_2;

/// Inclusive uniform grid of encoded phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    start: f64,
    stop: f64,
    count: usize,
}

impl ThetaGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(QuditError::InvalidArgument(format!(
                "theta grid needs at least 2 points, got {count}"
            )));
        }
        if !start.is_finite() || !stop.is_finite() || start >= stop {
            return Err(QuditError::InvalidArgument(format!(
                "theta grid must satisfy start < stop, got [{start}, {stop}]"
            )));
        }
        Ok(Self { start, stop, count })
    }

    /// 0..π with 721 points.
    pub fn default_sweep() -> Self {
        Self {
            start: 0.0,
            stop: PI,
            count: 721,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// ∂θ⟨A⟩ as the expectation of a commutator on the evolved state.
    #[default]
    Analytic,
    /// Central difference with step h.
    FiniteDifference(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "i")]
pub enum ProtocolKind {
    Dicke(usize),
    Ghz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub dim: usize,
    pub derivative_mode: DerivativeMode,
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        crate::qudit::basis_state(self.dim, 0)?;
        if let ProtocolKind::Dicke(i) = self.kind {
            if i >= self.dim {
                return Err(QuditError::IndexOutOfRange {
                    index: i,
                    dim: self.dim,
                });
            }
        }
        if let DerivativeMode::FiniteDifference(h) = self.derivative_mode {
            if !(h > 0.0 && h.is_finite()) {
                return Err(QuditError::InvalidArgument(format!(
                    "finite-difference step must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOptions {
    pub derivative_mode: DerivativeMode,
    /// Number of repetitions m in the Cramér-Rao column.
    pub measurements: u32,
    pub execution: Execution,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            derivative_mode: DerivativeMode::Analytic,
            measurements: 1,
            execution: Execution::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub theta: f64,
    pub expectation: f64,
    pub variance: f64,
    pub d_expectation: f64,
    #[serde(with = "float_token")]
    pub precision_sq: f64,
    pub qfi: f64,
    #[serde(with = "float_token")]
    pub crb: f64,
}

impl ProtocolRow {
    fn values(&self) -> [f64; 7] {
        [
            self.theta,
            self.expectation,
            self.variance,
            self.d_expectation,
            self.precision_sq,
            self.qfi,
            self.crb,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    #[serde(flatten)]
    pub kind: ProtocolKind,
    pub d: usize,
    pub grid: ThetaGrid,
    pub derivative_mode: DerivativeMode,
    pub measurements: u32,
    pub rows: Vec<ProtocolRow>,
}

impl ProtocolResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 140);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_line(&row.values()));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol results serialize")
    }

    /// Row invariants: variance ≥ −1e-12 and precision ≥ CRB − 1e-8 where finite.
    pub fn check_invariants(&self) -> Result<()> {
        for row in &self.rows {
            if row.variance < -1e-12 {
                return Err(QuditError::Invariant(format!(
                    "negative variance {} at theta = {}",
                    row.variance, row.theta
                )));
            }
            if row.precision_sq.is_finite() && row.precision_sq < row.crb - 1e-8 {
                return Err(QuditError::Invariant(format!(
                    "precision {} beats the Cramér-Rao bound {} at theta = {}",
                    row.precision_sq, row.crb, row.theta
                )));
            }
        }
        Ok(())
    }
}

/// Parses the CSV emitted by [`ProtocolResult::to_csv`].
pub fn parse_protocol_csv(text: &str) -> Result<Vec<ProtocolRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(QuditError::InvalidArgument("unexpected CSV header".into()));
    }
    lines
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| {
                    parse_number(t)
                        .ok_or_else(|| QuditError::InvalidArgument(format!("bad number {t:?}")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 7 {
                return Err(QuditError::InvalidArgument(format!(
                    "expected 7 columns, got {}",
                    v.len()
                )));
            }
            Ok(ProtocolRow {
                theta: v[0],
                expectation: v[1],
                variance: v[2],
                d_expectation: v[3],
                precision_sq: v[4],
                qfi: v[5],
                crb: v[6],
            })
        })
        .collect()
}

/// (Δθ)² = Var(A)/|∂θ⟨A⟩|², infinite when the slope vanishes.
pub fn error_propagation(variance: f64, d_expectation: f64) -> Result<f64> {
    if variance < -1e-12 || variance.is_nan() {
        return Err(QuditError::InvalidArgument(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    if d_expectation.abs() <= SLOPE_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(variance.max(0.0) / (d_expectation * d_expectation))
}

/// Basis level used when none is requested: (d−1)/2 for odd d, d/2 − 1 for even d.
pub fn default_dicke_index(d: usize) -> usize {
    if d % 2 == 1 {
        (d - 1) / 2
    } else {
        d / 2 - 1
    }
}

/// probe → exp(s·iθG) → post-unitary W → readout A.
struct Pipeline {
    probe: PureState,
    propagator: Propagator,
    sign: Sign,
    post: CMatrix,
    readout: HermitianObservable,
    /// s·i[A, W G W†], whose expectation on the final state is ∂θ⟨A⟩.
    slope_observable: HermitianObservable,
}

impl Pipeline {
    fn new(
        probe: PureState,
        generator: &HermitianObservable,
        sign: Sign,
        post: CMatrix,
        readout: HermitianObservable,
    ) -> Self {
        let moved = generator
            .conjugate_by(&post)
            .expect("post-unitary matches generator dimension");
        let k = commutator(readout.matrix(), moved.matrix()) * (I * sign.value());
        Self {
            probe,
            propagator: Propagator::new(generator),
            sign,
            post,
            readout,
            slope_observable: HermitianObservable::from_matrix_unchecked(k),
        }
    }

    fn final_state(&self, theta: f64) -> Result<PureState> {
        let u = &self.post * self.propagator.unitary(theta, self.sign);
        self.probe.apply_matrix(&u)
    }

    fn row(&self, theta: f64, mode: DerivativeMode, qfi: f64, crb: f64) -> Result<ProtocolRow> {
        let psi = self.final_state(theta)?;
        let expectation = psi.expectation(&self.readout)?;
        let variance = psi.variance(&self.readout)?;
        let d_expectation = match mode {
            DerivativeMode::Analytic => psi.expectation(&self.slope_observable)?,
            DerivativeMode::FiniteDifference(h) => {
                let plus = self.final_state(theta + h)?.expectation(&self.readout)?;
                let minus = self.final_state(theta - h)?.expectation(&self.readout)?;
                (plus - minus) / (2.0 * h)
            }
        };
        Ok(ProtocolRow {
            theta,
            expectation,
            variance,
            d_expectation,
            precision_sq: error_propagation(variance, d_expectation)?,
            qfi,
            crb,
        })
    }

    fn sweep(
        &self,
        grid: &ThetaGrid,
        options: &ProtocolOptions,
        qfi: f64,
    ) -> Result<Vec<ProtocolRow>> {
        let crb = cramer_rao(qfi, options.measurements)?;
        par::map_range(options.execution, grid.count(), |k| {
            self.row(grid.value(k), options.derivative_mode, qfi, crb)
        })
        .into_iter()
        .collect()
    }
}

fn validate_options(spec: ProtocolSpec, options: &ProtocolOptions) -> Result<()> {
    spec.validate()?;
    if options.measurements < 1 {
        return Err(QuditError::InvalidArgument(
            "number of measurements must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Rotates |i⟩ about x by θ and reads out Jz².
pub fn run_dicke_protocol(
    d: usize,
    i: usize,
    grid: &ThetaGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolResult> {
    let spec = ProtocolSpec {
        kind: ProtocolKind::Dicke(i),
        dim: d,
        derivative_mode: options.derivative_mode,
    };
    validate_options(spec, options)?;
    let spin = spin_operators(d)?;
    let ground = basis_state(d, 0)?;
    let probe = apply_sequence(&ground, &compile_preparation(d, PreparationTarget::Dicke(i))?)?;
    let pipeline = Pipeline::new(
        probe,
        &spin.jx,
        Sign::Minus,
        CMatrix::identity(d, d),
        spin.jz.squared(),
    );
    let qfi = qfi_pure(&basis_state(d, i)?, &spin.jx)?;
    Ok(ProtocolResult {
        kind: spec.kind,
        d,
        grid: *grid,
        derivative_mode: options.derivative_mode,
        measurements: options.measurements,
        rows: pipeline.sweep(grid, options, qfi)?,
    })
}

/// Recombination (|d−1⟩ → |1⟩, skipped for d = 2) followed by the π/2 mix on (0, 1).
pub fn ghz_readout_sequence(d: usize) -> Result<PulseSequence> {
    let mut pulses = Vec::new();
    if d > 2 {
        pulses.push(GivensPulse::transfer_down(1, d - 1)?);
    }
    pulses.push(GivensPulse::new(0, 1, FRAC_PI_2, MIXING_AXIS_PHASE)?);
    PulseSequence::new(d, pulses)
}

/// Encodes θ with exp(+iθP) on the GHZ-like probe and reads out P after
/// interferometric recombination.
pub fn run_ghz_protocol(
    d: usize,
    grid: &ThetaGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolResult> {
    let spec = ProtocolSpec {
        kind: ProtocolKind::Ghz,
        dim: d,
        derivative_mode: options.derivative_mode,
    };
    validate_options(spec, options)?;
    let p = phase_generator(d)?;
    let probe = apply_sequence(
        &basis_state(d, 0)?,
        &compile_preparation(d, PreparationTarget::Ghz)?,
    )?;
    let pipeline = Pipeline::new(
        probe,
        &p,
        Sign::Plus,
        ghz_readout_sequence(d)?.unitary(),
        p.clone(),
    );
    let qfi = qfi_pure(&ghz_like(d)?, &p)?;
    Ok(ProtocolResult {
        kind: spec.kind,
        d,
        grid: *grid,
        derivative_mode: options.derivative_mode,
        measurements: options.measurements,
        rows: pipeline.sweep(grid, options, qfi)?,
    })
}

pub fn run_protocol(
    spec: ProtocolSpec,
    grid: &ThetaGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolResult> {
    let options = ProtocolOptions {
        derivative_mode: spec.derivative_mode,
        ..*options
    };
    match spec.kind {
        ProtocolKind::Dicke(i) => run_dicke_protocol(spec.dim, i, grid, &options),
        ProtocolKind::Ghz => run_ghz_protocol(spec.dim, grid, &options),
    }
}

/// Analytic moments of the GHZ-like protocol at one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzClosedForm {
    /// sin²((d−1)θ/2)
    pub expectation: f64,
    /// sin²((d−1)θ)/4
    pub variance: f64,
    /// (d−1)/2 · sin((d−1)θ)
    pub d_expectation: f64,
    /// 1/(d−1)² off nodes, infinite at (d−1)θ = nπ.
    pub precision_sq: f64,
    /// Off-node value 1/(d−1)², also the limit approaching a node.
    pub precision_limit: f64,
    pub at_node: bool,
}

pub fn ghz_closed_form(d: usize, theta: f64) -> Result<GhzClosedForm> {
    crate::qudit::basis_state(d, 0)?;
    let n = (d - 1) as f64;
    let x = n * theta;
    let half = (x / 2.0).sin();
    let d_expectation = n / 2.0 * x.sin();
    let variance = x.sin().powi(2) / 4.0;
    let precision_sq = error_propagation(variance, d_expectation)?;
    Ok(GhzClosedForm {
        expectation: half * half,
        variance,
        d_expectation,
        precision_sq,
        precision_limit: 1.0 / (n * n),
        at_node: precision_sq.is_infinite(),
    })
}

/// ⟨Jz⟩ = ⟨P⟩ − (d−1)/2 for each row of a GHZ-like run.
pub fn jz_view(result: &ProtocolResult) -> Result<Vec<f64>> {
    if result.kind != ProtocolKind::Ghz {
        return Err(QuditError::InvalidArgument(
            "the Jz view applies to runs read out with P".into(),
        ));
    }
    let shift = (result.d - 1) as f64 / 2.0;
    Ok(result.rows.iter().map(|r| r.expectation - shift).collect())
}

/// Shifts a ⟨P⟩ value to ⟨Jz⟩.
pub fn jz_from_p(expectation_p: f64, d: usize) -> f64 {
    expectation_p - (d - 1) as f64 / 2.0
}
