//! Two-mode covariance matrices of the entanglement-based protocols, their
//! evolution through a lossy noisy channel, and conditioning on Bob's
//! measurement.
//!
//! All matrices have the symmetric block form
//! `((X 𝟙, Z σ_z), (Z σ_z, Y 𝟙))` in shot-noise units.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::protocol::{Constellation, Detection, Modulation};
use crate::states::mixture_weights;

/// Correlation term of the two-mode squeezed vacuum with modulation variance
/// `v_a`: `Z_G = √(V_A² + 2V_A)`.
pub fn z_gauss(v_a: f64) -> Result<f64> {
    if !(v_a.is_finite() && v_a >= 0.0) {
        return domain(format!("modulation variance must be >= 0, got {v_a}"));
    }
    Ok((v_a * v_a + 2.0 * v_a).sqrt())
}

/// `Z₂ = 2α²(1 + e^{−4α²})/√(1 − e^{−4α²})`; 0 at `α = 0`.
pub fn z_two(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return domain(format!("alpha must be >= 0, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let a = alpha * alpha;
    let e = (-4.0 * a).exp();
    Ok(2.0 * a * (1.0 + e) / (-(-4.0 * a).exp_m1()).sqrt())
}

/// `Z₄ = 2α² Σ_k λ_{k−1}^{3/2} / λ_k^{1/2}` with indices mod 4; 0 at `α = 0`.
pub fn z_four(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return domain(format!("alpha must be >= 0, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let w = mixture_weights(Constellation::Four, alpha)?;
    let sum: f64 = (0..4)
        .map(|k| w.get(k + 3).powf(1.5) / w.get(k).sqrt())
        .sum();
    Ok(2.0 * alpha * alpha * sum)
}

/// Correlation term for `modulation` at modulation variance `v_a`.
pub fn z_for(modulation: Modulation, v_a: f64) -> Result<f64> {
    if !(v_a.is_finite() && v_a >= 0.0) {
        return domain(format!("modulation variance must be >= 0, got {v_a}"));
    }
    let alpha = (v_a / 2.0).sqrt();
    match modulation {
        Modulation::TwoState => z_two(alpha),
        Modulation::FourState => z_four(alpha),
        Modulation::Gaussian => z_gauss(v_a),
    }
}

/// Fibre transmission for `distance_km` at 0.2 dB/km: `T = 10^{−0.02 d}`.
pub fn transmission_from_distance(distance_km: f64) -> f64 {
    10f64.powf(-0.02 * distance_km)
}

/// Inverse of [`transmission_from_distance`].
pub fn distance_from_transmission(t: f64) -> f64 {
    -50.0 * t.log10()
}

/// Channel and detector seen by the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Channel transmission in `(0, 1]`.
    pub t: f64,
    /// Excess noise referred to the channel input, shot-noise units.
    pub xi: f64,
    /// Detector efficiency in `(0, 1]`, counted as extra loss.
    pub eta: f64,
    pub detection: Detection,
}

impl ChannelParams {
    pub fn new(t: f64, xi: f64, eta: f64, detection: Detection) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return domain(format!("transmission must lie in (0, 1], got {t}"));
        }
        if !(xi.is_finite() && xi >= 0.0) {
            return domain(format!("excess noise must be finite and >= 0, got {xi}"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("detector efficiency must lie in (0, 1], got {eta}"));
        }
        Ok(ChannelParams { t, xi, eta, detection })
    }

    /// Fibre link of `distance_km` at 0.2 dB/km.
    pub fn from_distance(distance_km: f64, xi: f64, eta: f64, detection: Detection) -> Result<Self> {
        if !(distance_km.is_finite() && distance_km >= 0.0) {
            return domain(format!("distance must be >= 0, got {distance_km}"));
        }
        Self::new(transmission_from_distance(distance_km), xi, eta, detection)
    }

    /// `η·T`.
    pub fn t_eff(&self) -> f64 {
        self.eta * self.t
    }

    pub fn distance_km(&self) -> f64 {
        distance_from_transmission(self.t)
    }
}

/// Symmetric two-mode covariance matrix `((X𝟙, Zσ_z), (Zσ_z, Y𝟙))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix2Mode {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Slack allowed below the Heisenberg floor for rounding.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

impl CovMatrix2Mode {
    /// Two-mode state before the channel: `X = Y = V_A + 1`.
    pub fn entangled_source(v_a: f64, z: f64) -> Self {
        CovMatrix2Mode { x: v_a + 1.0, y: v_a + 1.0, z }
    }

    /// Symplectic eigenvalues `(ν₁, ν₂)`, `ν₁ ≥ ν₂`, from
    /// `ν² = (Δ ± √(Δ² − 4D²))/2`, `Δ = X² + Y² − 2Z²`, `D = XY − Z²`.
    pub fn symplectic_eigs(&self) -> Result<(f64, f64)> {
        let CovMatrix2Mode { x, y, z } = *self;
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return domain("covariance entries must be finite");
        }
        let delta = x * x + y * y - 2.0 * z * z;
        let d = x * y - z * z;
        let disc = (delta * delta - 4.0 * d * d).max(0.0).sqrt();
        let nu1 = ((delta + disc) / 2.0).max(0.0).sqrt();
        // ν₁ν₂ = |D|; dividing avoids cancellation in the smaller root.
        let nu2 = if nu1 > 0.0 { d.abs() / nu1 } else { 0.0 };
        let nu_min = nu1.min(nu2);
        if d <= 0.0 || nu_min < 1.0 - PHYSICALITY_SLACK {
            return Err(Error::Unphysical { nu_min });
        }
        Ok((nu1, nu2))
    }

    pub fn is_physical(&self) -> bool {
        self.x >= 1.0 - PHYSICALITY_SLACK
            && self.y >= 1.0 - PHYSICALITY_SLACK
            && self.symplectic_eigs().is_ok()
    }
}

/// Covariance matrix after Bob's mode crosses the channel:
/// `X = V_A + 1`, `Y = T_eff V_A + 1 + T_eff ξ`, `Z_out = √T_eff Z`.
pub fn gamma_after_channel(v_a: f64, z: f64, ch: &ChannelParams) -> Result<CovMatrix2Mode> {
    if !(v_a.is_finite() && v_a >= 0.0) {
        return domain(format!("modulation variance must be >= 0, got {v_a}"));
    }
    let t = ch.t_eff();
    let gamma = CovMatrix2Mode {
        x: v_a + 1.0,
        y: t * v_a + 1.0 + t * ch.xi,
        z: t.sqrt() * z,
    };
    gamma.symplectic_eigs()?;
    Ok(gamma)
}

/// Alice's mode conditioned on Bob's measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCov {
    pub vx: f64,
    pub vp: f64,
    pub detection: Detection,
}

impl ConditionalCov {
    /// Symplectic eigenvalue `√(vx·vp)` of the diagonal one-mode matrix.
    pub fn nu(&self) -> f64 {
        (self.vx * self.vp).sqrt()
    }
}

/// Homodyne: `vx = X − Z²/Y`, `vp = X`. Heterodyne: `vx = vp = X − Z²/(Y + 1)`.
pub fn conditional_cov(gamma: &CovMatrix2Mode, detection: Detection) -> ConditionalCov {
    let CovMatrix2Mode { x, y, z } = *gamma;
    match detection {
        Detection::Homodyne => ConditionalCov {
            vx: x - z * z / y,
            vp: x,
            detection,
        },
        Detection::Heterodyne => {
            let v = x - z * z / (y + 1.0);
            ConditionalCov { vx: v, vp: v, detection }
        }
    }
}

/// Channel parameters recovered from sample moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    pub v_a: f64,
    pub t: f64,
    pub xi: f64,
    /// The solved excess noise was negative and has been clamped to 0.
    pub xi_clamped: bool,
    /// `⟨xy⟩ = 0`: no signal reaches Bob.
    pub degenerate: bool,
}

/// Inverts the output-variance model.
///
/// Homodyne: `⟨y²⟩ = T V_A + 1 + Tξ`, `T = ⟨xy⟩²/⟨x²⟩²`.
/// Heterodyne, moments per quadrature in detector units
/// (`y = √(T/2)·x + noise`): `⟨y²⟩ = (T V_A + 2 + Tξ)/2`, `T = 2⟨xy⟩²/⟨x²⟩²`.
pub fn estimate_params(x2: f64, xy: f64, y2: f64, detection: Detection) -> Result<EstimatedParams> {
    if !(x2.is_finite() && xy.is_finite() && y2.is_finite()) {
        return domain("moments must be finite");
    }
    if x2 <= 0.0 {
        return domain(format!("<x^2> must be > 0, got {x2}"));
    }
    let v_a = x2;
    let (t, total_noise) = match detection {
        Detection::Homodyne => (xy * xy / (x2 * x2), y2 - 1.0),
        Detection::Heterodyne => (2.0 * xy * xy / (x2 * x2), 2.0 * y2 - 2.0),
    };
    if t == 0.0 {
        return Ok(EstimatedParams {
            v_a,
            t: 0.0,
            xi: 0.0,
            xi_clamped: false,
            degenerate: true,
        });
    }
    let xi = (total_noise - t * v_a) / t;
    Ok(EstimatedParams {
        v_a,
        t,
        xi: xi.max(0.0),
        xi_clamped: xi < 0.0,
        degenerate: false,
    })
}
