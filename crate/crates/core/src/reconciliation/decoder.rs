//! Layered sum-product decoding in the coset of a syndrome.
//!
//! Messages are log-likelihood ratios `ln P(bit = 0)/P(bit = 1)`. A check
//! with syndrome bit 1 flips the sign of every message it emits, which turns
//! the standard decoder into a coset decoder.

use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::reconciliation::ldpc::LdpcCode;

/// Magnitude cap on every message.
const LLR_CLIP: f64 = 30.0;
/// Decoding stops early once the number of unsatisfied checks has not
/// reached a new minimum for this many sweeps.
pub const STALL_ITERATIONS: usize = 60;

/// `φ(x) = −ln tanh(x/2)` is its own inverse on `(0, ∞)`, which turns the
/// check update into sums: `|out_j| = φ(Σ_{i≠j} φ(|q_i|))`.
///
/// The table covers `[2^PHI_MIN_EXP, 2^PHI_MAX_EXP)` with `2^PHI_MANTISSA_BITS`
/// linear segments per octave, indexed directly by the float's exponent and
/// leading mantissa bits.
const PHI_MIN_EXP: i64 = -44;
const PHI_MAX_EXP: i64 = 6;
const PHI_MANTISSA_BITS: u32 = 8;
const PHI_SHIFT: u32 = 52 - PHI_MANTISSA_BITS;

fn phi_exact(x: f64) -> f64 {
    (2.0 / x.exp_m1()).ln_1p()
}

fn phi_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let first = ((PHI_MIN_EXP + 1023) as u64) << PHI_MANTISSA_BITS;
        let segments = ((PHI_MAX_EXP - PHI_MIN_EXP) as u64) << PHI_MANTISSA_BITS;
        (0..=segments)
            .map(|i| phi_exact(f64::from_bits((first + i) << PHI_SHIFT)))
            .collect()
    })
}

/// Table lookup of `φ(x)` for `x ≥ 0`; error below `1e-4·φ(x) + 1e-6`.
/// Arguments are clamped to the table range.
#[inline]
fn phi(table: &[f64], x: f64) -> f64 {
    let lo = f64::from_bits(((PHI_MIN_EXP + 1023) as u64) << 52);
    let hi = f64::from_bits((((PHI_MAX_EXP + 1023) as u64) << 52) - 1);
    let bits = x.clamp(lo, hi).to_bits();
    let first = ((PHI_MIN_EXP + 1023) as u64) << PHI_MANTISSA_BITS;
    let i = ((bits >> PHI_SHIFT) - first) as usize;
    let frac = (bits & ((1u64 << PHI_SHIFT) - 1)) as f64 * (1.0 / (1u64 << PHI_SHIFT) as f64);
    let (a, b) = (table[i], table[i + 1]);
    a + frac * (b - a)
}

/// Result of decoding one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Hard decisions, one 0/1 byte per variable.
    pub bits: Vec<u8>,
    /// The hard decisions satisfy the syndrome.
    pub converged: bool,
    /// Full layered sweeps performed; 0 if the channel decisions already
    /// satisfied the syndrome.
    pub iterations: usize,
}

/// Decoder state for one code. Not shareable while decoding; build one per
/// worker.
///
/// Variables of degree 1 always send their channel LLR; their posterior is
/// never stored and is recomputed from the channel value and the one
/// incoming message when a hard decision is needed.
#[derive(Debug, Clone)]
pub struct CosetDecoder<'a> {
    code: &'a LdpcCode,
    /// `offsets[c]..offsets[c + 1]` indexes the edges of check `c`.
    offsets: Vec<usize>,
    edge_var: Vec<u32>,
    /// Check-to-variable messages.
    r: Vec<f64>,
    /// A-posteriori LLRs.
    post: Vec<f64>,
    /// Per edge: the channel LLR if the variable has degree 1, NaN otherwise.
    fixed: Vec<f64>,
    /// Per variable: its only edge if it has degree 1.
    single_edge: Vec<Option<u32>>,
    /// Per edge of the current check: `φ(|q|)`.
    phis: Vec<f64>,
    /// Per edge of the current check: `q < 0`.
    negative: Vec<bool>,
    table: &'static [f64],
}

fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

impl<'a> CosetDecoder<'a> {
    pub fn new(code: &'a LdpcCode) -> Self {
        let mut offsets = Vec::with_capacity(code.m() + 1);
        let mut edge_var = Vec::with_capacity(code.edges());
        offsets.push(0);
        for vars in code.check_vars() {
            edge_var.extend_from_slice(vars);
            offsets.push(edge_var.len());
        }
        let max_deg = code.check_vars().iter().map(Vec::len).max().unwrap_or(0);
        let mut single_edge = vec![None; code.n()];
        for (e, &v) in edge_var.iter().enumerate() {
            if code.var_checks()[v as usize].len() == 1 {
                single_edge[v as usize] = Some(e as u32);
            }
        }
        CosetDecoder {
            code,
            offsets,
            r: vec![0.0; edge_var.len()],
            fixed: vec![f64::NAN; edge_var.len()],
            edge_var,
            post: vec![0.0; code.n()],
            single_edge,
            phis: vec![0.0; max_deg],
            negative: vec![false; max_deg],
            table: phi_table(),
        }
    }

    pub fn code(&self) -> &LdpcCode {
        self.code
    }

    /// Hard decision on variable `v`: the sign of its a-posteriori LLR.
    #[inline]
    fn bit(&self, v: usize) -> u8 {
        let l = match self.single_edge[v] {
            Some(e) => self.post[v] + self.r[e as usize],
            None => self.post[v],
        };
        u8::from(l < 0.0)
    }

    fn hard_decisions(&self) -> Vec<u8> {
        (0..self.code.n()).map(|v| self.bit(v)).collect()
    }

    fn unsatisfied(&self, syndrome: &[u8]) -> usize {
        (0..self.code.m())
            .filter(|&c| {
                let parity = self.edge_var[self.offsets[c]..self.offsets[c + 1]]
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ self.bit(v as usize));
                parity != syndrome[c]
            })
            .count()
    }

    /// Decodes `llr` in the coset `{c : Hc = syndrome}`. Stops after
    /// `max_iter` sweeps, or earlier if decoding stalls.
    pub fn decode(&mut self, syndrome: &[u8], llr: &[f64], max_iter: usize) -> Result<DecodeOutcome> {
        let code = self.code;
        if syndrome.len() != code.m() {
            return Err(Error::LengthMismatch {
                expected: code.m(),
                actual: syndrome.len(),
            });
        }
        if llr.len() != code.n() {
            return Err(Error::LengthMismatch {
                expected: code.n(),
                actual: llr.len(),
            });
        }
        if max_iter == 0 {
            return domain("max_iter must be >= 1");
        }
        if llr.iter().any(|l| !l.is_finite()) {
            return domain("LLRs must be finite");
        }
        for (v, (p, &l)) in self.post.iter_mut().zip(llr).enumerate() {
            *p = clip(l);
            if let Some(e) = self.single_edge[v] {
                self.fixed[e as usize] = *p;
            }
        }
        self.r.fill(0.0);
        let mut best = self.unsatisfied(syndrome);
        let mut best_iter = 0;
        let mut iterations = 0;
        while best > 0 && iterations < max_iter && iterations - best_iter < STALL_ITERATIONS {
            iterations += 1;
            for c in 0..code.m() {
                self.update_check(c, syndrome[c]);
            }
            let now = self.unsatisfied(syndrome);
            if now < best {
                best = now;
                best_iter = iterations;
            }
            if now == 0 {
                break;
            }
        }
        Ok(DecodeOutcome {
            bits: self.hard_decisions(),
            converged: best == 0 && self.unsatisfied(syndrome) == 0,
            iterations,
        })
    }

    /// One layered update: variable-to-check messages from the current
    /// posteriors, extrinsic magnitudes in the `φ` domain, then the
    /// posteriors absorb the new check messages.
    fn update_check(&mut self, c: usize, syndrome_bit: u8) {
        let edges = self.offsets[c]..self.offsets[c + 1];
        let deg = edges.len();
        let vars = &self.edge_var[edges.clone()];
        let fixed = &self.fixed[edges.clone()];
        let r = &mut self.r[edges];
        let post = &mut self.post;
        let phis = &mut self.phis[..deg];
        let negative = &mut self.negative[..deg];
        let table = self.table;
        let mut total = 0.0;
        let mut parity = syndrome_bit == 1;
        for j in 0..deg {
            let q = if fixed[j].is_nan() { post[vars[j] as usize] - r[j] } else { fixed[j] };
            phis[j] = phi(table, q.abs());
            negative[j] = q < 0.0;
            total += phis[j];
            parity ^= negative[j];
        }
        for j in 0..deg {
            let magnitude = phi(table, total - phis[j]).min(LLR_CLIP);
            let msg = if parity ^ negative[j] { -magnitude } else { magnitude };
            if fixed[j].is_nan() {
                post[vars[j] as usize] += msg - r[j];
            }
            r[j] = msg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> LdpcCode {
        LdpcCode::from_checks(7, vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]]).unwrap()
    }

    #[test]
    fn clean_codeword_needs_no_iterations() {
        let code = hamming();
        let mut dec = CosetDecoder::new(&code);
        let out = dec.decode(&[0, 0, 0], &[5.0; 7], 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.bits, vec![0; 7]);
    }

    #[test]
    fn corrects_a_single_weak_error() {
        let code = hamming();
        let mut dec = CosetDecoder::new(&code);
        let mut llr = [4.0; 7];
        llr[3] = -0.5;
        let out = dec.decode(&[0, 0, 0], &llr, 20).unwrap();
        assert!(out.converged);
        assert_eq!(out.bits, vec![0; 7]);
    }

    #[test]
    fn decodes_in_the_coset() {
        let code = hamming();
        let word = [1u8, 0, 1, 1, 0, 0, 1];
        let syndrome = code.syndrome(&word).unwrap();
        let mut llr: Vec<f64> = word.iter().map(|&b| if b == 0 { 3.0 } else { -3.0 }).collect();
        llr[0] = 0.4; // wrong sign, low confidence
        let mut dec = CosetDecoder::new(&code);
        let out = dec.decode(&syndrome, &llr, 20).unwrap();
        assert!(out.converged);
        assert_eq!(out.bits, word);
    }

    #[test]
    fn phi_table_matches_exact() {
        let table = phi_table();
        for i in 0..=4000 {
            let x = 10f64.powf(-12.0 + i as f64 * 0.004);
            let exact = phi_exact(x);
            let err = (phi(table, x) - exact).abs();
            assert!(err < 1e-4 * exact + 1e-6, "phi at {x}: {} vs {exact}", phi(table, x));
        }
        // φ is an involution.
        for x in [0.01, 0.3, 1.0, 4.0, 15.0] {
            assert!((phi(table, phi(table, x)) - x).abs() < 1e-3 * x);
        }
    }

    #[test]
    fn check_update_matches_tanh_rule() {
        // Three-variable parity check with one external message each; the
        // outgoing LLRs follow 2·atanh(Π tanh(q/2)).
        let code = LdpcCode::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
        let mut dec = CosetDecoder::new(&code);
        let llr = [0.7, -1.3, 2.1];
        dec.post.copy_from_slice(&llr);
        dec.update_check(0, 1);
        for j in 0..3 {
            let prod: f64 = (0..3).filter(|&i| i != j).map(|i| (llr[i] / 2.0).tanh()).product();
            let expected = -2.0 * prod.atanh();
            assert!((dec.r[j] - expected).abs() < 1e-4, "edge {j}: {} vs {expected}", dec.r[j]);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let code = hamming();
        let mut dec = CosetDecoder::new(&code);
        assert!(dec.decode(&[0, 0], &[1.0; 7], 5).is_err());
        assert!(dec.decode(&[0, 0, 0], &[1.0; 6], 5).is_err());
        assert!(dec.decode(&[0, 0, 0], &[1.0; 7], 0).is_err());
        assert!(dec.decode(&[0, 0, 0], &[f64::NAN; 7], 5).is_err());
    }
}
