use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every numerical threshold used by the toolkit, threaded explicitly through
/// the operations that need one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative bound on `max |M - M*|` for Hermitian inputs.
    pub hermitian: f64,
    /// Smallest admissible eigenvalue of a density.
    pub psd: f64,
    /// Admissible `|Tr D - 1|`.
    pub trace: f64,
    /// Admissible `| |x| - 1 |` for unit vectors.
    pub unit_vector: f64,
    /// Negative central moments above `-moment_clamp` are rounded to zero.
    pub moment_clamp: f64,
    /// Feasibility tolerance for spectrahedron constraints.
    pub feasibility: f64,
    /// Relative eigenvalue floor used for numerical rank.
    pub rank_floor: f64,
    /// Operator-norm slack allowed for contraction inputs.
    pub contraction: f64,
    /// Relative tolerance of the normality check `|A*A - AA*|`.
    pub normality: f64,
    /// Orthonormality residual accepted as is.
    pub orthonormal: f64,
    /// Orthonormality residual up to which a basis is repaired by Gram-Schmidt.
    pub orthonormal_repair: f64,
    /// Slack added to every bound before a trial counts as a violation.
    pub slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            psd: 1e-10,
            trace: 1e-10,
            unit_vector: 1e-12,
            moment_clamp: 1e-12,
            feasibility: 1e-8,
            rank_floor: 1e-10,
            contraction: 1e-10,
            normality: 1e-8,
            orthonormal: 1e-10,
            orthonormal_repair: 1e-6,
            slack: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub const NAMES: [&'static str; 12] = [
        "hermitian",
        "psd",
        "trace",
        "unit_vector",
        "moment_clamp",
        "feasibility",
        "rank_floor",
        "contraction",
        "normality",
        "orthonormal",
        "orthonormal_repair",
        "slack",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "hermitian" => &mut self.hermitian,
            "psd" => &mut self.psd,
            "trace" => &mut self.trace,
            "unit_vector" => &mut self.unit_vector,
            "moment_clamp" => &mut self.moment_clamp,
            "feasibility" => &mut self.feasibility,
            "rank_floor" => &mut self.rank_floor,
            "contraction" => &mut self.contraction,
            "normality" => &mut self.normality,
            "orthonormal" => &mut self.orthonormal,
            "orthonormal_repair" => &mut self.orthonormal_repair,
            "slack" => &mut self.slack,
            _ => return None,
        })
    }

    /// Overrides one tolerance by name; unknown names are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance `{name}` must be a finite non-negative number, got {value}"
            )));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::UnknownTolerance(name.to_string()))?;
        *slot = value;
        Ok(())
    }

    pub fn with_overrides<'a, I>(mut self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        for (name, value) in overrides {
            self.set(name, value)?;
        }
        Ok(self)
    }
}
