//! Truncated Fock-space representations of the states behind the two- and
//! four-state protocols, and their Wigner functions.
//!
//! Wigner functions use the shot-noise convention of [`crate::protocol`]:
//! `W(x, p)` integrates to 1 over `dx dp` and the vacuum is
//! `W(x, p) = exp(−(x² + p²)/2) / (2π)`, so `W(0, 0) = 1/(2π)`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::protocol::Constellation;

/// Largest norm deficit tolerated when truncating a normalized state.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Photon-number cutoff for a state with mean photon number `mean_photons`:
/// `ceil(m + 10√(m + 1))`, never below 20.
pub fn truncation_for(mean_photons: f64) -> usize {
    let m = mean_photons.max(0.0);
    ((m + 10.0 * (m + 1.0).sqrt()).ceil() as usize).max(20)
}

/// Complex amplitudes over the photon-number basis `|0⟩ … |n_cut⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return domain("a Fock vector needs n_cut >= 1");
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return domain("non-finite Fock amplitude");
        }
        Ok(FockVector { amplitudes })
    }

    pub fn vacuum(n_cut: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_cut.max(1) + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        FockVector { amplitudes }
    }

    pub fn n_cut(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`; the shorter vector is zero-padded.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Complex conjugation of the amplitudes, `|φ⟩ ↦ |φ*⟩`.
    pub fn conj(&self) -> FockVector {
        FockVector {
            amplitudes: self.amplitudes.iter().map(|c| c.conj()).collect(),
        }
    }

    /// `a|ψ⟩`; the top amplitude is lost to truncation.
    pub fn annihilate(&self) -> FockVector {
        let n_cut = self.n_cut();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_cut + 1];
        for n in 0..n_cut {
            amplitudes[n] = self.amplitudes[n + 1] * ((n + 1) as f64).sqrt();
        }
        FockVector { amplitudes }
    }

    /// `⟨ψ|a|ψ⟩`.
    pub fn expect_annihilation(&self) -> Complex64 {
        self.inner(&self.annihilate())
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    fn scaled(&self, factor: Complex64) -> FockVector {
        FockVector {
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
        }
    }

    fn add(&self, other: &FockVector) -> FockVector {
        FockVector {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn check_truncation(self) -> Result<Self> {
        let deficit = 1.0 - self.norm_sqr();
        if deficit > TRUNCATION_TOLERANCE {
            return Err(Error::Truncation {
                n_cut: self.n_cut(),
                deficit,
                limit: TRUNCATION_TOLERANCE,
            });
        }
        Ok(self)
    }
}

/// Coherent state `|β⟩` truncated at `n_cut`: `c_n = e^{−|β|²/2} βⁿ/√(n!)`.
pub fn coherent_fock(beta: Complex64, n_cut: usize) -> Result<FockVector> {
    if !(beta.re.is_finite() && beta.im.is_finite()) {
        return domain("coherent amplitude must be finite");
    }
    if n_cut < 1 {
        return domain("n_cut must be >= 1");
    }
    let mut amplitudes = Vec::with_capacity(n_cut + 1);
    let mut c = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    amplitudes.push(c);
    for n in 1..=n_cut {
        c = c * beta / (n as f64).sqrt();
        amplitudes.push(c);
    }
    FockVector { amplitudes }.check_truncation()
}

/// Eigenvalues of the mixture Bob sees: `(μ₀, μ₁)` for two states,
/// `(λ₀, …, λ₃)` for four.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    pub constellation: Constellation,
    pub weights: Vec<f64>,
}

impl MixtureWeights {
    pub fn get(&self, k: usize) -> f64 {
        self.weights[k % self.weights.len()]
    }
}

/// `e^{−a} Σ_{n ≡ r (mod period)} aⁿ/n!`, summed term by term so the small
/// weights (e.g. `λ₃ ≈ a³/6`) keep full relative precision as `a → 0`.
fn residue_weight(a: f64, r: usize, period: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        if n % period == r {
            sum += term;
        }
        n += 1;
        term *= a / n as f64;
        if n > r && term < 1e-18 * sum.max(f64::MIN_POSITIVE) && (n as f64) > a {
            break;
        }
        if n > 2000 {
            break;
        }
    }
    sum * (-a).exp()
}

/// Mixture weights for amplitude `alpha`:
/// `μ₀ = e^{−α²}cosh α²`, `μ₁ = e^{−α²}sinh α²`,
/// `λ_{0,2} = ½e^{−α²}(cosh α² ± cos α²)`, `λ_{1,3} = ½e^{−α²}(sinh α² ± sin α²)`.
pub fn mixture_weights(constellation: Constellation, alpha: f64) -> Result<MixtureWeights> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return domain(format!("alpha must be > 0, got {alpha}"));
    }
    let a = alpha * alpha;
    let weights = match constellation {
        Constellation::Two => {
            let mu1 = -(-2.0 * a).exp_m1() / 2.0;
            vec![(1.0 + (-2.0 * a).exp()) / 2.0, mu1]
        }
        Constellation::Four => (0..4).map(|k| residue_weight(a, k, 4)).collect(),
    };
    Ok(MixtureWeights {
        constellation,
        weights,
    })
}

fn check_index(constellation: Constellation, k: usize) -> Result<()> {
    if k >= constellation.size() {
        return Err(Error::IndexOutOfRange {
            index: k,
            size: constellation.size(),
        });
    }
    Ok(())
}

/// The eigenvectors `|φ_k⟩` of Bob's mixture.
///
/// Two states: `|φ₀⟩ ∝ Σ (−i)ⁿ α^{2n}/√(2n)! |2n⟩` and
/// `|φ₁⟩ ∝ Σ e^{−iπ/4}(−i)ⁿ α^{2n+1}/√(2n+1)! |2n+1⟩`.
/// Four states: `|φ_k⟩ ∝ Σ (−1)ⁿ α^{4n+k}/√(4n+k)! |4n+k⟩`.
pub fn phi_state(
    constellation: Constellation,
    k: usize,
    alpha: f64,
    n_cut: usize,
) -> Result<FockVector> {
    check_index(constellation, k)?;
    if n_cut < 1 {
        return domain("n_cut must be >= 1");
    }
    let weights = mixture_weights(constellation, alpha)?;
    let period = constellation.size();
    let norm = (-alpha * alpha / 2.0).exp() / weights.get(k).sqrt();

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_cut + 1];
    // αⁿ/√(n!) built incrementally.
    let mut magnitude = 1.0;
    for (n, slot) in amplitudes.iter_mut().enumerate() {
        if n > 0 {
            magnitude *= alpha / (n as f64).sqrt();
        }
        if n % period != k {
            continue;
        }
        let j = n / period;
        let phase = match constellation {
            // (−i)^j, times e^{−iπ/4} on the odd sector: the phase of γⁿ.
            Constellation::Two => Complex64::from_polar(1.0, -FRAC_PI_4 * n as f64),
            Constellation::Four => Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
        };
        *slot = phase * (magnitude * norm);
    }
    FockVector { amplitudes }.check_truncation()
}

/// Alice's measurement basis `|ψ_k⟩`.
///
/// Two states: `|ψ_{0,1}⟩ = (|φ₀*⟩ ± |φ₁*⟩)/√2`.
/// Four states: `|ψ_k⟩ = ½ Σ_m e^{i(1+2k)mπ/4} |φ_m⟩`.
pub fn psi_state(
    constellation: Constellation,
    k: usize,
    alpha: f64,
    n_cut: usize,
) -> Result<FockVector> {
    check_index(constellation, k)?;
    match constellation {
        Constellation::Two => {
            let phi0 = phi_state(constellation, 0, alpha, n_cut)?.conj();
            let phi1 = phi_state(constellation, 1, alpha, n_cut)?.conj();
            let sign = if k == 0 { 1.0 } else { -1.0 };
            Ok(phi0
                .add(&phi1.scaled(Complex64::new(sign, 0.0)))
                .scaled(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
        }
        Constellation::Four => {
            let mut acc = FockVector {
                amplitudes: vec![Complex64::new(0.0, 0.0); n_cut + 1],
            };
            for m in 0..4 {
                let phi = phi_state(constellation, m, alpha, n_cut)?;
                let phase = Complex64::from_polar(0.5, ((1 + 2 * k) * m) as f64 * FRAC_PI_4);
                acc = acc.add(&phi.scaled(phase));
            }
            Ok(acc)
        }
    }
}

/// A pure two-mode state `Σ c_{mn} |m⟩_A |n⟩_B`, both modes cut at `n_cut`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    n_cut: usize,
    coeffs: Vec<Complex64>,
}

impl TwoModeState {
    fn dim(&self) -> usize {
        self.n_cut + 1
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    /// Amplitude of `|m⟩_A |n⟩_B`.
    pub fn coeff(&self, m: usize, n: usize) -> Complex64 {
        self.coeffs[m * self.dim() + n]
    }

    pub fn product(a: &FockVector, b: &FockVector) -> Result<TwoModeState> {
        if a.n_cut() != b.n_cut() {
            return Err(Error::LengthMismatch {
                expected: a.amplitudes.len(),
                actual: b.amplitudes.len(),
            });
        }
        let coeffs = a
            .amplitudes
            .iter()
            .flat_map(|ca| b.amplitudes.iter().map(move |cb| ca * cb))
            .collect();
        Ok(TwoModeState {
            n_cut: a.n_cut(),
            coeffs,
        })
    }

    fn accumulate(&mut self, other: &TwoModeState, weight: Complex64) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * weight;
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &TwoModeState) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨Φ|ab|Φ⟩`.
    pub fn expect_ab(&self) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.n_cut {
            for n in 0..self.n_cut {
                let shifted = self.coeffs[(m + 1) * d + n + 1] * (((m + 1) * (n + 1)) as f64).sqrt();
                acc += self.coeffs[m * d + n].conj() * shifted;
            }
        }
        acc
    }

    /// Correlation term `⟨ab + a†b†⟩ = 2 Re⟨ab⟩` of the covariance matrix.
    pub fn correlation(&self) -> f64 {
        2.0 * self.expect_ab().re
    }

    /// `⟨2a†a + 1⟩` and `⟨2b†b + 1⟩`.
    pub fn variances(&self) -> (f64, f64) {
        let d = self.dim();
        let (mut na, mut nb) = (0.0, 0.0);
        for m in 0..d {
            for n in 0..d {
                let p = self.coeffs[m * d + n].norm_sqr();
                na += m as f64 * p;
                nb += n as f64 * p;
            }
        }
        (2.0 * na + 1.0, 2.0 * nb + 1.0)
    }

    /// Reduced state of mode B, `Tr_A |Φ⟩⟨Φ|`, as a dense row-major matrix.
    pub fn reduced_density_b(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
        for m in 0..d {
            let row = &self.coeffs[m * d..(m + 1) * d];
            for n in 0..d {
                for np in 0..d {
                    rho[n * d + np] += row[n] * row[np].conj();
                }
            }
        }
        rho
    }
}

/// Purification used in the entanglement-based picture:
/// `|Φ₂⟩ = √μ₀|φ₀*⟩|φ₀⟩ + √μ₁|φ₁*⟩|φ₁⟩` or `|Φ₄⟩ = Σ √λ_k |φ_k⟩|φ_k⟩`.
pub fn purification_state(
    constellation: Constellation,
    alpha: f64,
    n_cut: usize,
) -> Result<TwoModeState> {
    let weights = mixture_weights(constellation, alpha)?;
    let d = n_cut + 1;
    let mut state = TwoModeState {
        n_cut,
        coeffs: vec![Complex64::new(0.0, 0.0); d * d],
    };
    for k in 0..constellation.size() {
        let phi = phi_state(constellation, k, alpha, n_cut)?;
        let alice = match constellation {
            Constellation::Two => phi.conj(),
            Constellation::Four => phi.clone(),
        };
        let term = TwoModeState::product(&alice, &phi)?;
        state.accumulate(&term, Complex64::new(weights.get(k).sqrt(), 0.0));
    }
    Ok(state)
}

/// Wigner function sampled on the grid `x_axis × p_axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Row-major: `values[i * p_axis.len() + j] = W(x_axis[i], p_axis[j])`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.len() + j]
    }

    /// Trapezoidal estimate of `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.x_axis);
        let wp = trapezoid_weights(&self.p_axis);
        let mut total = 0.0;
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                total += a * b * self.at(i, j);
            }
        }
        total
    }

    /// Grid point `(x, p, W)` with the largest value.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let (idx, &w) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid is non-empty");
        let np = self.p_axis.len();
        (self.x_axis[idx / np], self.p_axis[idx % np], w)
    }

    /// CSV with header `x,p,W`, one line per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,p,W")?;
        for (i, x) in self.x_axis.iter().enumerate() {
            for (j, p) in self.p_axis.iter().enumerate() {
                writeln!(out, "{x},{p},{:e}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect()
}

/// `L_j^{(order)}(x)` for `j = 0..=max_degree`, by the three-term recurrence.
fn laguerre_column(order: usize, x: f64, max_degree: usize, out: &mut Vec<f64>) {
    out.clear();
    let a = order as f64;
    out.push(1.0);
    if max_degree >= 1 {
        out.push(1.0 + a - x);
    }
    for j in 1..max_degree {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * out[j] - (jf + a) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
}

/// `D(γ)|ψ⟩` projected on `|0⟩ … |out_dim − 1⟩`, using the displacement matrix
/// elements `⟨k|D(γ)|n⟩ = √(n!/k!) γ^{k−n} e^{−|γ|²/2} L_n^{(k−n)}(|γ|²)` for
/// `k ≥ n` and `√(k!/n!) (−γ*)^{n−k} e^{−|γ|²/2} L_k^{(n−k)}(|γ|²)` otherwise.
fn displaced(psi: &[Complex64], gamma: Complex64, out_dim: usize, scratch: &mut Vec<f64>) -> Vec<Complex64> {
    let r2 = gamma.norm_sqr();
    let env = (-r2 / 2.0).exp();
    let n_in = psi.len();
    let mut out = vec![Complex64::new(0.0, 0.0); out_dim];
    let max_order = out_dim.max(n_in);
    for order in 0..max_order {
        // Pairs (k, n) = (j + order, j) and (j, j + order).
        let max_j_lower = n_in.min(out_dim.saturating_sub(order));
        let max_j_upper = out_dim.min(n_in.saturating_sub(order));
        let max_j = max_j_lower.max(max_j_upper);
        if max_j == 0 {
            continue;
        }
        laguerre_column(order, r2, max_j - 1, scratch);
        // prefactor_j = √(j!/(j+order)!) · z^order, updated as j grows.
        let mut base = Complex64::new(1.0, 0.0);
        let mut mag = 1.0;
        for i in 1..=order {
            mag /= (i as f64).sqrt();
        }
        for _ in 0..order {
            base *= gamma;
        }
        let neg_conj = -gamma.conj();
        let mut base_upper = Complex64::new(1.0, 0.0);
        for _ in 0..order {
            base_upper *= neg_conj;
        }
        for j in 0..max_j {
            if j > 0 {
                mag *= ((j as f64) / ((j + order) as f64)).sqrt();
            }
            let lag = scratch[j] * mag * env;
            // k = j + order, n = j
            if j < n_in && j + order < out_dim {
                out[j + order] += base * lag * psi[j];
            }
            // k = j, n = j + order
            if order > 0 && j < out_dim && j + order < n_in {
                out[j] += base_upper * lag * psi[j + order];
            }
        }
    }
    out
}

/// Wigner function of a pure state as a displaced-parity sum,
/// `W(x, p) = (1/2π) Σ_k (−1)^k |⟨k|D(−β)|ψ⟩|²` with `β = (x + ip)/2`.
pub fn wigner(state: &FockVector, x_axis: &[f64], p_axis: &[f64]) -> Result<WignerGrid> {
    if x_axis.is_empty() || p_axis.is_empty() {
        return Err(Error::Empty("wigner axes"));
    }
    if x_axis.iter().chain(p_axis).any(|v| !v.is_finite()) {
        return domain("wigner axes must be finite");
    }
    let psi = state.amplitudes();
    let mut scratch = Vec::new();
    let mut values = Vec::with_capacity(x_axis.len() * p_axis.len());
    for &x in x_axis {
        for &p in p_axis {
            let beta = Complex64::new(x / 2.0, p / 2.0);
            let r2 = beta.norm_sqr();
            let out_dim = psi.len() + (r2 + 10.0 * (r2 + 1.0).sqrt()).ceil() as usize + 10;
            let d = displaced(psi, -beta, out_dim, &mut scratch);
            let parity: f64 = d
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() })
                .sum();
            values.push(parity / (2.0 * PI));
        }
    }
    Ok(WignerGrid {
        x_axis: x_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        values,
    })
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
