//! Collective dephasing and the decay of metrological resources.
//!
//! The channel damps each coherence ρ_jk by exp(−(j−k)²γt), the dephasing
//! generated by P. On the GHZ-like probe only the |0⟩⟨d−1| coherence survives
//! and is damped by exp(−(d−1)²γt).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QuditError, Result};
use crate::linalg::CMatrix;
use crate::output::csv_line;
use crate::par::{self, Execution};
use crate::qfi::{metrological_power_from_qfi, qfi_max_collective, qfi_spectral};
use crate::qudit::{phase_generator, DensityMatrix, QuditState};

pub const CSV_HEADER: &str = "d,gamma_t,f_q,d_eff,metrological_power";

/// Damping factors below this are flushed to zero.
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingChannel {
    gamma: f64,
    t: f64,
}

impl DephasingChannel {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        if !(gamma >= 0.0 && t >= 0.0) || !(gamma * t).is_finite() {
            return Err(QuditError::InvalidArgument(format!(
                "dephasing needs finite gamma >= 0 and t >= 0, got gamma = {gamma}, t = {t}"
            )));
        }
        Ok(Self { gamma, t })
    }

    /// Channel with rate 1 acting for time `gamma_t`.
    pub fn from_product(gamma_t: f64) -> Result<Self> {
        Self::new(1.0, gamma_t)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma * self.t
    }

    pub fn damping(&self, j: usize, k: usize) -> f64 {
        let gap = j.abs_diff(k) as f64;
        let f = (-gap * gap * self.gamma_t()).exp();
        if f < UNDERFLOW {
            0.0
        } else {
            f
        }
    }
}

/// ρ_jk → ρ_jk·exp(−(j−k)²γt); populations untouched.
pub fn dephase(rho: &DensityMatrix, channel: &DephasingChannel) -> DensityMatrix {
    let m = rho.matrix();
    let out = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * channel.damping(r, c));
    DensityMatrix::from_matrix_unchecked(out)
}

/// Dephased GHZ-like probe after encoding θ:
/// ½[|0⟩⟨0| + |d−1⟩⟨d−1| + e^{−(d−1)²γt}(e^{−i(d−1)θ}|0⟩⟨d−1| + h.c.)].
pub fn ghz_dephased(d: usize, channel: &DephasingChannel, theta: f64) -> Result<DensityMatrix> {
    crate::qudit::basis_state(d, 0)?;
    let top = d - 1;
    let coherence = Complex64::from_polar(0.5 * channel.damping(0, top), -(top as f64) * theta);
    let mut m = CMatrix::zeros(d, d);
    m[(0, 0)] = Complex64::new(0.5, 0.0);
    m[(top, top)] = Complex64::new(0.5, 0.0);
    m[(0, top)] = coherence;
    m[(top, 0)] = coherence.conj();
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Which generator the decay rows are normalized against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMeasure {
    /// QFI under the encoding generator P.
    PhaseGenerator,
    /// QFI maximized over collective directions n·J.
    CollectiveMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub d: usize,
    pub gamma_t: f64,
    pub f_q: f64,
    pub d_eff: f64,
    pub metrological_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub measure: DecayMeasure,
    pub rows: Vec<DecayRow>,
}

impl DecayCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.d.to_string());
            out.push(',');
            out.push_str(&csv_line(&[r.gamma_t, r.f_q, r.d_eff, r.metrological_power]));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decay curves serialize")
    }

    /// f_q must not increase along γt at fixed d (1e-12 slack).
    pub fn check_invariants(&self) -> Result<()> {
        for pair in self.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.d == b.d && b.gamma_t >= a.gamma_t && b.f_q > a.f_q + 1e-12 {
                return Err(QuditError::Invariant(format!(
                    "QFI increased from {} to {} at d = {} (gamma_t {} -> {})",
                    a.f_q, b.f_q, a.d, a.gamma_t, b.gamma_t
                )));
            }
        }
        Ok(())
    }
}

fn grid(d_list: &[usize], gamma_t_list: &[f64]) -> Result<Vec<(usize, f64)>> {
    if d_list.is_empty() || gamma_t_list.is_empty() {
        return Err(QuditError::InvalidArgument(
            "decay curves need nonempty d and gamma_t lists".into(),
        ));
    }
    let mut sorted = gamma_t_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(d_list
        .iter()
        .flat_map(|&d| sorted.iter().map(move |&g| (d, g)))
        .collect())
}

/// QFI of the dephased GHZ-like probe under P, with d_eff = f_q/(d−1) and the
/// corresponding power max(d_eff − 1, 0). Rows are ordered by d, then γt.
pub fn qfi_decay_curve(
    d_list: &[usize],
    gamma_t_list: &[f64],
    execution: Execution,
) -> Result<DecayCurve> {
    let points = grid(d_list, gamma_t_list)?;
    let rows = par::map(execution, &points, |&(d, gamma_t)| {
        let rho = ghz_dephased(d, &DephasingChannel::from_product(gamma_t)?, 0.0)?;
        let f_q = qfi_spectral(&rho, &phase_generator(d)?)?;
        Ok(DecayRow {
            d,
            gamma_t,
            f_q,
            d_eff: f_q / (d - 1) as f64,
            metrological_power: metrological_power_from_qfi(f_q, d),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        measure: DecayMeasure::PhaseGenerator,
        rows,
    })
}

/// State-level power of the dephased GHZ-like probe: the collective-maximal
/// QFI, its d_eff, and max(d_eff − 1, 0).
pub fn power_decay_curve(
    d_list: &[usize],
    gamma_t_list: &[f64],
    execution: Execution,
) -> Result<DecayCurve> {
    let points = grid(d_list, gamma_t_list)?;
    let rows = par::map(execution, &points, |&(d, gamma_t)| {
        let rho = ghz_dephased(d, &DephasingChannel::from_product(gamma_t)?, 0.0)?;
        let (f_q, _) = qfi_max_collective(&rho)?;
        let d_eff = f_q / (rho.dim() - 1) as f64;
        Ok(DecayRow {
            d,
            gamma_t,
            f_q,
            d_eff,
            metrological_power: (d_eff - 1.0).max(0.0),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        measure: DecayMeasure::CollectiveMax,
        rows,
    })
}
