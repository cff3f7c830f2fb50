use serde::{Deserialize, Serialize};

use crate::error::{QuditError, Result};

/// Unit 3-vector selecting the collective generator n·J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct GeneratorDirection([f64; 3]);

impl GeneratorDirection {
    pub const X: Self = Self([1.0, 0.0, 0.0]);
    pub const Y: Self = Self([0.0, 1.0, 0.0]);
    pub const Z: Self = Self([0.0, 0.0, 1.0]);

    /// Accepts a vector that is already unit length within 1e-12.
    pub fn new(n: [f64; 3]) -> Result<Self> {
        let norm = norm3(n);
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(QuditError::InvalidArgument(format!(
                "generator direction must have unit norm, got {norm}"
            )));
        }
        Ok(Self(n))
    }

    pub fn normalized(n: [f64; 3]) -> Result<Self> {
        let norm = norm3(n);
        if !norm.is_finite() || norm == 0.0 {
            return Err(QuditError::InvalidArgument(
                "cannot normalize a zero or non-finite direction".into(),
            ));
        }
        Ok(Self([n[0] / norm, n[1] / norm, n[2] / norm]))
    }

    /// Unit vector from polar angle (from +z) and azimuth.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        Self([
            polar.sin() * azimuth.cos(),
            polar.sin() * azimuth.sin(),
            polar.cos(),
        ])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// Flips the sign so the largest-magnitude component is positive.
    /// n and −n give the same QFI, this picks one representative.
    pub fn canonical(self) -> Self {
        let [x, y, z] = self.0;
        let lead = [x, y, z]
            .into_iter()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            Self([-x, -y, -z])
        } else {
            self
        }
    }
}

impl TryFrom<[f64; 3]> for GeneratorDirection {
    type Error = QuditError;

    fn try_from(n: [f64; 3]) -> Result<Self> {
        Self::new(n)
    }
}

impl From<GeneratorDirection> for [f64; 3] {
    fn from(d: GeneratorDirection) -> Self {
        d.0
    }
}

fn norm3(n: [f64; 3]) -> f64 {
    (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}
