//! Asymptotic secret key rate `K = β I(x;y) − S(y;E)` under collective
//! attacks, with the eavesdropper's information bounded by the Gaussian state
//! sharing the protocol's covariance matrix.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{conditional_cov, gamma_after_channel, z_for, ChannelParams, CovMatrix2Mode};
use crate::error::{domain, Error, Result};
use crate::protocol::{Detection, Modulation, ProtocolConfig};

/// Absolute tolerance requested from the capacity quadrature.
pub const CAPACITY_TOLERANCE: f64 = 1e-9;

/// `g(x) = (x+1)log₂(x+1) − x log₂ x`, the entropy of a thermal state with
/// mean photon number `x`.
pub fn g_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((x + 1.0) * (x + 1.0).ln() - x * x.ln()) / LN_2
}

/// Symplectic eigenvalues entering the Holevo bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub nu1: f64,
    pub nu2: f64,
    /// Eigenvalue of Alice's mode conditioned on Bob's outcome.
    pub nu3: f64,
}

pub fn symplectic_spectrum(gamma: &CovMatrix2Mode, detection: Detection) -> Result<SymplecticSpectrum> {
    let (nu1, nu2) = gamma.symplectic_eigs()?;
    let nu3 = conditional_cov(gamma, detection).nu();
    Ok(SymplecticSpectrum { nu1, nu2, nu3 })
}

/// `S(y;E) = g((ν₁−1)/2) + g((ν₂−1)/2) − g((ν₃−1)/2)`, clamped at 0.
pub fn holevo_bound(gamma: &CovMatrix2Mode, detection: Detection) -> Result<f64> {
    let s = symplectic_spectrum(gamma, detection)?;
    let h = |nu: f64| g_entropy((nu - 1.0) / 2.0);
    Ok((h(s.nu1) + h(s.nu2) - h(s.nu3)).max(0.0))
}

/// `½ log₂(1 + s)`.
pub fn capacity_gauss(s: f64) -> f64 {
    0.5 * s.max(0.0).ln_1p() / LN_2
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Capacity of the binary-input AWGN channel at SNR `s`, in bits per use.
///
/// With `u = x√s` the output density is
/// `ψ(u) = (e^{−(u+√s)²/2} + e^{−(u−√s)²/2})/√(8π)` and
/// `C = h(ψ) − ½log₂(2πe)`. Writing `h(ψ) = h(N(0, 1+s)) − D(ψ ‖ N(0, 1+s))`
/// gives `C = C_Gauss(s) − D`, whose integrand is `O(s²)` near zero SNR and
/// keeps full relative precision there.
pub fn capacity_biawgn(s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return domain(format!("SNR must be finite and > 0, got {s}"));
    }
    let r = s.sqrt();
    // ln(ψ/N) = ln cosh(u√s) − s/2 + ½ln(1+s) − u²s/(2(1+s)).
    let log_ratio = move |u: f64| ln_cosh(u * r) - s / 2.0 + 0.5 * s.ln_1p() - u * u * s / (2.0 * (1.0 + s));
    let density = move |u: f64| {
        ((-(u + r) * (u + r) / 2.0).exp() + (-(u - r) * (u - r) / 2.0).exp()) / (8.0 * PI).sqrt()
    };
    let integrand = move |u: f64| density(u) * log_ratio(u);
    // ψ is even; integrate the half-line up to 12 standard deviations past the peak.
    let tol = CAPACITY_TOLERANCE / 4.0;
    let inner = quadrature::integrate(integrand, 0.0, r, tol).integral;
    let outer = quadrature::integrate(integrand, r, r + 12.0, tol).integral;
    let divergence = (2.0 * (inner + outer) / LN_2).max(0.0);
    Ok((capacity_gauss(s) - divergence).clamp(0.0, 1.0))
}

/// SNR of the equivalent classical channel per quadrature:
/// `T_eff V_A/(1 + T_eff ξ)` for homodyne, `T_eff V_A/(2 + T_eff ξ)` for heterodyne.
pub fn snr(v_a: f64, ch: &ChannelParams) -> f64 {
    let t = ch.t_eff();
    let noise = match ch.detection {
        Detection::Homodyne => 1.0,
        Detection::Heterodyne => 2.0,
    };
    t * v_a / (noise + t * ch.xi)
}

fn check_supported(modulation: Modulation, detection: Detection) -> Result<()> {
    if modulation == Modulation::TwoState && detection == Detection::Heterodyne {
        return Err(Error::Unsupported(
            "the two-state protocol encodes a single quadrature and is analysed with homodyne detection only".into(),
        ));
    }
    Ok(())
}

/// Alice–Bob mutual information in bits per channel use.
///
/// Discrete modulations see a binary-input AWGN channel on each measured
/// quadrature; the Gaussian reference uses `C_Gauss`.
pub fn mutual_info(v_a: f64, ch: &ChannelParams, modulation: Modulation) -> Result<f64> {
    if !(v_a.is_finite() && v_a >= 0.0) {
        return domain(format!("modulation variance must be >= 0, got {v_a}"));
    }
    check_supported(modulation, ch.detection)?;
    let s = snr(v_a, ch);
    if s == 0.0 {
        return Ok(0.0);
    }
    let per_quadrature = match modulation {
        Modulation::Gaussian => capacity_gauss(s),
        Modulation::TwoState | Modulation::FourState => capacity_biawgn(s)?,
    };
    Ok(match ch.detection {
        Detection::Homodyne => per_quadrature,
        Detection::Heterodyne => 2.0 * per_quadrature,
    })
}

/// One evaluated operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    /// Channel transmission, detector efficiency excluded.
    pub t: f64,
    /// `η·T`.
    pub t_eff: f64,
    pub xi: f64,
    pub v_a: f64,
    pub beta: f64,
    pub i_xy: f64,
    pub s_ye: f64,
    /// `β I_xy − S_yE`; negative values mean no key.
    pub k: f64,
}

impl KeyRatePoint {
    pub fn has_key(&self) -> bool {
        self.k > 0.0
    }
}

/// Evaluates `K = β I(x;y) − S(y;E)` for one configuration.
pub fn key_rate(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<KeyRatePoint> {
    check_supported(cfg.modulation, ch.detection)?;
    let z = z_for(cfg.modulation, cfg.v_a)?;
    let gamma = gamma_after_channel(cfg.v_a, z, ch)?;
    let s_ye = holevo_bound(&gamma, ch.detection)?;
    let i_xy = mutual_info(cfg.v_a, ch, cfg.modulation)?;
    Ok(KeyRatePoint {
        distance_km: ch.distance_km(),
        t: ch.t,
        t_eff: ch.t_eff(),
        xi: ch.xi,
        v_a: cfg.v_a,
        beta: cfg.beta,
        i_xy,
        s_ye,
        k: cfg.beta * i_xy - s_ye,
    })
}

/// Grid search over `V_A`; ties go to the smaller variance.
pub fn optimize_va(cfg: &ProtocolConfig, ch: &ChannelParams, grid: &[f64]) -> Result<KeyRatePoint> {
    if grid.is_empty() {
        return Err(Error::Empty("modulation-variance grid"));
    }
    let points = grid
        .par_iter()
        .map(|&v_a| key_rate(&cfg.with_v_a(v_a), ch))
        .collect::<Result<Vec<_>>>()?;
    let mut best = points[0];
    for p in &points[1..] {
        if p.k > best.k || (p.k == best.k && p.v_a < best.v_a) {
            best = *p;
        }
    }
    Ok(best)
}

/// Fibre link shared by every point of a distance scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub xi: f64,
    pub eta: f64,
    pub detection: Detection,
}

impl LinkModel {
    pub fn at(&self, distance_km: f64) -> Result<ChannelParams> {
        ChannelParams::from_distance(distance_km, self.xi, self.eta, self.detection)
    }
}

/// Key rate at each distance with `V_A` fixed by `cfg`.
pub fn distance_scan(cfg: &ProtocolConfig, link: &LinkModel, distances_km: &[f64]) -> Result<Vec<KeyRatePoint>> {
    distances_km
        .par_iter()
        .map(|&d| key_rate(cfg, &link.at(d)?))
        .collect()
}

/// Key rate at each distance with `V_A` re-optimized on `grid` per point.
pub fn optimized_distance_scan(
    cfg: &ProtocolConfig,
    link: &LinkModel,
    distances_km: &[f64],
    grid: &[f64],
) -> Result<Vec<KeyRatePoint>> {
    distances_km
        .iter()
        .map(|&d| optimize_va(cfg, &link.at(d)?, grid))
        .collect()
}

/// First distance in `[0, max_km]` where `K` turns non-positive, located on a
/// 1 km grid and refined by bisection to `1e-6` km. `None` if `K > 0`
/// throughout; `Some(0.0)` if there is no key even at zero distance.
pub fn zero_crossing_km(cfg: &ProtocolConfig, link: &LinkModel, max_km: f64) -> Result<Option<f64>> {
    let k_at = |d: f64| -> Result<f64> { Ok(key_rate(cfg, &link.at(d)?)?.k) };
    if k_at(0.0)? <= 0.0 {
        return Ok(Some(0.0));
    }
    let steps = max_km.ceil() as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let hi = (i as f64).min(max_km);
        if k_at(hi)? <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-6 {
                let mid = 0.5 * (a + b);
                if k_at(mid)? > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        lo = hi;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::z_gauss;
    use approx::assert_abs_diff_eq;

    #[test]
    fn g_values() {
        assert_eq!(g_entropy(0.0), 0.0);
        assert_abs_diff_eq!(g_entropy(1.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g_entropy(0.5), 1.5 * 1.5f64.log2() - 0.5 * 0.5f64.log2(), epsilon = 1e-14);
        assert_abs_diff_eq!(g_entropy(0.5), 1.3774, epsilon = 1e-4);
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity_gauss(0.0), 0.0);
        assert_abs_diff_eq!(capacity_gauss(1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(capacity_gauss(3.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(capacity_biawgn(1.0).unwrap(), 0.486, epsilon = 1e-3);
        assert!(capacity_biawgn(100.0).unwrap() >= 0.999);
        assert!(capacity_biawgn(0.0).is_err());
        assert!(capacity_biawgn(f64::NAN).is_err());
        let r = capacity_biawgn(1e-4).unwrap() / capacity_gauss(1e-4);
        assert!((0.999..=1.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn capacity_is_monotone() {
        let mut prev = 0.0;
        for i in 0..200 {
            let s = 10f64.powf(-5.0 + i as f64 * 0.04);
            let c = capacity_biawgn(s).unwrap();
            assert!(c >= prev - CAPACITY_TOLERANCE, "decreasing at s = {s}");
            if s < 10.0 {
                assert!(c > prev, "not increasing at s = {s}");
            }
            assert!(c <= capacity_gauss(s) + 1e-12);
            prev = c;
        }
    }

    #[test]
    fn holevo_limits() {
        let v_a = 0.25;
        let ch = ChannelParams::new(1.0, 0.0, 1.0, Detection::Homodyne).unwrap();
        let tms = gamma_after_channel(v_a, z_gauss(v_a).unwrap(), &ch).unwrap();
        assert_abs_diff_eq!(holevo_bound(&tms, Detection::Homodyne).unwrap(), 0.0, epsilon = 1e-9);
        let g = CovMatrix2Mode { x: 1.3, y: 1.2, z: 0.0 };
        let s = holevo_bound(&g, Detection::Homodyne).unwrap();
        assert_abs_diff_eq!(s, g_entropy(0.1), epsilon = 1e-12);
    }

    #[test]
    fn two_state_heterodyne_rejected() {
        let cfg = ProtocolConfig::new(Modulation::TwoState, 0.03, 0.8).unwrap();
        let ch = ChannelParams::new(0.5, 0.001, 0.6, Detection::Heterodyne).unwrap();
        assert!(matches!(key_rate(&cfg, &ch), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_beta_gives_negative_key() {
        let cfg = ProtocolConfig::new(Modulation::FourState, 0.25, 0.0).unwrap();
        let ch = ChannelParams::new(0.5, 0.0, 0.6, Detection::Homodyne).unwrap();
        let p = key_rate(&cfg, &ch).unwrap();
        assert!(p.k <= 0.0);
        assert_eq!(p.k, -p.s_ye);
    }

    #[test]
    fn full_loss_gives_no_information() {
        let ch = ChannelParams::new(1e-15, 0.0, 1.0, Detection::Homodyne).unwrap();
        assert!(mutual_info(0.25, &ch, Modulation::FourState).unwrap() < 1e-12);
    }

    #[test]
    fn optimizer_edge_cases() {
        let cfg = ProtocolConfig::new(Modulation::TwoState, 0.03, 0.8).unwrap();
        let ch = ChannelParams::from_distance(5.0, 0.001, 0.6, Detection::Homodyne).unwrap();
        assert!(matches!(optimize_va(&cfg, &ch, &[]), Err(Error::Empty(_))));
        let p = optimize_va(&cfg, &ch, &[0.02]).unwrap();
        assert_eq!(p.v_a, 0.02);
    }
}
