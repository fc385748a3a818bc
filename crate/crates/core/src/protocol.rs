//! Protocol-level configuration shared by every module.
//!
//! Quadrature convention used throughout the crate: `x = a + a†`, so the vacuum
//! has quadrature variance 1 (shot-noise units) and a coherent state `|β⟩` has
//! mean quadratures `(2 Re β, 2 Im β)`. Alice's modulation variance is then
//! `V_A = 2α²` for both discrete constellations.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Alice's modulation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modulation {
    /// `{|γ⟩, |−γ⟩}` with `γ = α e^{−iπ/4}`.
    TwoState,
    /// `{|α e^{i(2k+1)π/4}⟩ : k = 0..3}`.
    FourState,
    /// Gaussian-modulated coherent states, used as a reference.
    Gaussian,
}

impl Modulation {
    pub fn constellation(self) -> Option<Constellation> {
        match self {
            Modulation::TwoState => Some(Constellation::Two),
            Modulation::FourState => Some(Constellation::Four),
            Modulation::Gaussian => None,
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modulation::TwoState => "two-state",
            Modulation::FourState => "four-state",
            Modulation::Gaussian => "gaussian",
        })
    }
}

/// The discrete constellations, for routines that have no Gaussian analogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constellation {
    Two,
    Four,
}

impl Constellation {
    pub fn size(self) -> usize {
        match self {
            Constellation::Two => 2,
            Constellation::Four => 4,
        }
    }
}

/// Bob's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

impl std::fmt::Display for Detection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Detection::Homodyne => "homodyne",
            Detection::Heterodyne => "heterodyne",
        })
    }
}

/// Modulation kind, modulation variance and reconciliation efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub modulation: Modulation,
    /// Modulation variance `V_A = 2α²` in shot-noise units.
    pub v_a: f64,
    /// Reconciliation efficiency β.
    pub beta: f64,
}

impl ProtocolConfig {
    pub fn new(modulation: Modulation, v_a: f64, beta: f64) -> Result<Self> {
        if !(v_a.is_finite() && v_a >= 0.0) {
            return domain(format!("modulation variance must be finite and >= 0, got {v_a}"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return domain(format!("reconciliation efficiency must lie in [0, 1], got {beta}"));
        }
        Ok(ProtocolConfig { modulation, v_a, beta })
    }

    /// Builds a configuration from the coherent-state amplitude α (`V_A = 2α²`).
    pub fn from_alpha(modulation: Modulation, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(modulation, 2.0 * alpha * alpha, beta)
    }

    pub fn alpha(&self) -> f64 {
        (self.v_a / 2.0).sqrt()
    }

    pub fn with_v_a(self, v_a: f64) -> Self {
        ProtocolConfig { v_a, ..self }
    }
}
