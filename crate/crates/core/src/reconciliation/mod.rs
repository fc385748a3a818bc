//! Reverse reconciliation at low SNR: Bob's sign bits are the raw key, Alice
//! recovers them by coset decoding an LDPC code from Bob's syndrome and the
//! magnitudes `|y|`, with an optional repetition stage that trades code rate
//! for SNR.
//!
//! All inputs are in the normalized form `y = x + z`, `x = ±1`, produced by
//! [`SimBatch::normalized`].

pub mod construction;
pub mod decoder;
pub mod ldpc;
pub mod sideinfo;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel_sim::SimBatch;
use crate::error::{domain, Error, Result};
use crate::keyrate::{capacity_biawgn, capacity_gauss};

pub use decoder::{CosetDecoder, DecodeOutcome};
pub use ldpc::LdpcCode;
pub use sideinfo::SideInfo;

/// SNR at which the shipped rate-1/10 code is operated.
pub const SHIPPED_DESIGN_SNR: f64 = 0.17;
/// Seed of the construction that produced the shipped code.
pub const SHIPPED_CODE_SEED: u64 = 2010;
/// Default iteration cap for the decoder.
pub const DEFAULT_MAX_ITERATIONS: usize = 300;
/// Length of the verification hash, in bits.
pub const HASH_BITS: usize = 64;

static SHIPPED: OnceLock<LdpcCode> = OnceLock::new();

/// The shipped multi-edge-type code: rate 1/10, `n = 64000`.
pub fn shipped_code() -> &'static LdpcCode {
    SHIPPED.get_or_init(|| {
        LdpcCode::from_alist(include_str!("../../codes/met_rate0.1_n64000.alist"))
            .expect("shipped alist parses")
            .with_design_snr(SHIPPED_DESIGN_SNR)
    })
}

/// Per-sample quantities of the reverse-reconciliation transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseTransform {
    /// `sgn(y)`, zeros mapped to `+1`.
    pub u: Vec<f64>,
    /// `|y|`.
    pub t: Vec<f64>,
    /// Alice's `x·t`.
    pub v: Vec<f64>,
    /// `v − u`, equal to `sgn(xy)·(y − x)`.
    pub w: Vec<f64>,
    /// Outcomes that were exactly zero.
    pub zero_ties: usize,
}

fn sign(y: f64) -> f64 {
    if y < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Splits Bob's outcomes into sign and magnitude and forms Alice's view.
pub fn reverse_transform(x: &[f64], y: &[f64]) -> Result<ReverseTransform> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let n = x.len();
    let mut out = ReverseTransform {
        u: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        zero_ties: 0,
    };
    for (&xi, &yi) in x.iter().zip(y) {
        if yi == 0.0 {
            out.zero_ties += 1;
        }
        let u = sign(yi);
        let t = yi.abs();
        let v = xi * t;
        out.u.push(u);
        out.t.push(t);
        out.v.push(v);
        out.w.push(v - u);
    }
    Ok(out)
}

/// Efficiency after concatenating a repetition code of length `k`:
/// `β′(s/k) = β(s)·log₂(1+s)/(k·log₂(1+s/k))`.
pub fn repetition_efficiency(beta_s: f64, s: f64, k: usize) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return domain(format!("SNR must be > 0, got {s}"));
    }
    if !(beta_s > 0.0 && beta_s <= 1.0) {
        return domain(format!("efficiency must lie in (0, 1], got {beta_s}"));
    }
    if k == 0 {
        return domain("repetition length must be >= 1");
    }
    let kf = k as f64;
    Ok(beta_s * s.ln_1p() / (kf * (s / kf).ln_1p()))
}

/// `H·bits` over GF(2).
pub fn ldpc_encode_syndrome(code: &LdpcCode, bits: &[u8]) -> Result<Vec<u8>> {
    code.syndrome(bits)
}

/// One-shot coset decoding; see [`CosetDecoder`] to reuse buffers.
pub fn ldpc_decode_coset(code: &LdpcCode, syndrome: &[u8], llr: &[f64], max_iter: usize) -> Result<DecodeOutcome> {
    CosetDecoder::new(code).decode(syndrome, llr, max_iter)
}

/// What Bob holds for one frame of `n·k` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseFrame {
    /// Block signs `U_i = sgn(y_{i1})`.
    pub u: Vec<f64>,
    /// Key bits: 1 iff `U_i = −1`.
    pub bits: Vec<u8>,
    /// Public side information sent to Alice.
    pub side: SideInfo,
    pub zero_ties: usize,
}

/// Bob's side of one frame: block signs, magnitudes, relative signs within
/// each block of `k` consecutive samples, and the syndrome of the sign bits.
pub fn bob_frame(y: &[f64], code: &LdpcCode, k: usize) -> Result<ReverseFrame> {
    if k == 0 {
        return domain("repetition length must be >= 1");
    }
    let expected = code.n() * k;
    if y.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: y.len(),
        });
    }
    let mut zero_ties = 0;
    let mut u = Vec::with_capacity(code.n());
    let mut rel_signs = Vec::with_capacity(y.len());
    let t: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    for block in y.chunks_exact(k) {
        zero_ties += block.iter().filter(|&&v| v == 0.0).count();
        let head = sign(block[0]);
        u.push(head);
        rel_signs.extend(block.iter().map(|&v| sign(v) * head < 0.0));
    }
    let bits: Vec<u8> = u.iter().map(|&s| u8::from(s < 0.0)).collect();
    let syndrome = code.syndrome(&bits)?;
    Ok(ReverseFrame {
        u,
        bits,
        side: SideInfo {
            k,
            t,
            rel_signs,
            syndrome,
        },
        zero_ties,
    })
}

/// Alice's LLR for each block sign: `(2/σ²) Σ_j x_{ij} r_{ij} t_{ij}`, where
/// `r_{ij} = ±1` is the sign of `y_{ij}` relative to `y_{i1}`.
pub fn alice_llr(x: &[f64], side: &SideInfo, noise_variance: f64) -> Result<Vec<f64>> {
    if x.len() != side.t.len() || side.rel_signs.len() != side.t.len() {
        return Err(Error::LengthMismatch {
            expected: side.t.len(),
            actual: x.len(),
        });
    }
    if !(noise_variance > 0.0) {
        return domain(format!("noise variance must be > 0, got {noise_variance}"));
    }
    let scale = 2.0 / noise_variance;
    Ok(x.chunks_exact(side.k)
        .zip(side.t.chunks_exact(side.k))
        .zip(side.rel_signs.chunks_exact(side.k))
        .map(|((xs, ts), rs)| {
            let sum: f64 = xs
                .iter()
                .zip(ts)
                .zip(rs)
                .map(|((x, t), &flip)| if flip { -x * t } else { x * t })
                .sum();
            scale * sum
        })
        .collect())
}

/// First 64 bits of SHA-256 over the bits packed LSB-first.
pub fn verification_hash(bits: &[u8]) -> u64 {
    let mut packed = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        packed[i / 8] |= (b & 1) << (i % 8);
    }
    let digest = Sha256::digest(&packed);
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Tuning knobs of [`reconcile_reverse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconcileOptions {
    /// Per-sample noise variance `σ²`; estimated as `⟨(y − x)²⟩` if absent.
    pub noise_variance: Option<f64>,
    pub max_iterations: usize,
}

impl Default for ReconcileOptions {
    fn default() -> Self {
        ReconcileOptions {
            noise_variance: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Efficiency bookkeeping for a reconciliation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    /// Per-sample SNR `1/σ²`.
    pub s: f64,
    /// Rate of the LDPC code.
    pub rate: f64,
    pub k: usize,
    /// `(R/k)/C_Gauss(s)`.
    pub beta: f64,
    /// `C_BI-AWGN(s)/C_Gauss(s)`: the part of the gap due to binary modulation.
    pub beta_modulation: f64,
    pub fer: f64,
    pub frames: usize,
    pub failed_frames: usize,
    pub mean_iterations: f64,
    /// Syndrome bits disclosed, summed over frames.
    pub leaked_bits: usize,
    /// Verification-hash bits per frame; not counted in `beta`.
    pub hash_bits: usize,
}

/// Outcome of [`reconcile_reverse`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    /// Concatenated key bits of the frames that decoded and verified.
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    /// Per frame: decoded and hash-verified.
    pub frame_ok: Vec<bool>,
    pub leaked_bits: usize,
    pub zero_ties: usize,
    pub report: EfficiencyReport,
}

struct FrameResult {
    alice: Vec<u8>,
    bob: Vec<u8>,
    ok: bool,
    iterations: usize,
    zero_ties: usize,
    leaked: usize,
}

fn frame_noise_variance(x: &[f64], y: &[f64]) -> f64 {
    let mse = x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / x.len() as f64;
    mse.max(1e-12)
}

/// Runs reverse reconciliation over every frame of `batch`.
///
/// The batch (normalized) is cut into frames of `k·n` consecutive samples.
/// For each frame Bob discloses `t`, the relative signs and the syndrome;
/// Alice decodes and the frame counts only if the decoder converges and the
/// verification hashes agree.
pub fn reconcile_reverse(
    batch: &SimBatch,
    code: &LdpcCode,
    k: usize,
    opts: &ReconcileOptions,
) -> Result<Reconciliation> {
    if k == 0 {
        return domain("repetition length must be >= 1");
    }
    let (x, y) = batch.normalized()?;
    let frame_len = code.n() * k;
    if x.is_empty() || x.len() % frame_len != 0 {
        return domain(format!(
            "batch length {} is not a positive multiple of k·n = {frame_len}",
            x.len()
        ));
    }
    let sigma2 = match opts.noise_variance {
        Some(v) if v > 0.0 => v,
        Some(v) => return domain(format!("noise variance must be > 0, got {v}")),
        None => frame_noise_variance(&x, &y),
    };
    let frames = x.len() / frame_len;
    let results: Vec<FrameResult> = (0..frames)
        .into_par_iter()
        .map_init(
            || CosetDecoder::new(code),
            |decoder, f| -> Result<FrameResult> {
                let range = f * frame_len..(f + 1) * frame_len;
                let bob = bob_frame(&y[range.clone()], code, k)?;
                let llr = alice_llr(&x[range], &bob.side, sigma2)?;
                let out = decoder.decode(&bob.side.syndrome, &llr, opts.max_iterations)?;
                let ok = out.converged && verification_hash(&out.bits) == verification_hash(&bob.bits);
                Ok(FrameResult {
                    alice: out.bits,
                    bob: bob.bits,
                    ok,
                    iterations: out.iterations,
                    zero_ties: bob.zero_ties,
                    leaked: bob.side.syndrome.len(),
                })
            },
        )
        .collect::<Result<_>>()?;

    let mut rec = Reconciliation {
        alice_key: Vec::new(),
        bob_key: Vec::new(),
        frame_ok: Vec::with_capacity(frames),
        leaked_bits: 0,
        zero_ties: 0,
        report: efficiency_report(code, k, 1.0 / sigma2)?,
    };
    let mut iterations = 0;
    for r in results {
        rec.leaked_bits += r.leaked;
        rec.zero_ties += r.zero_ties;
        iterations += r.iterations;
        rec.frame_ok.push(r.ok);
        if r.ok {
            rec.alice_key.extend(r.alice);
            rec.bob_key.extend(r.bob);
        }
    }
    let failed = rec.frame_ok.iter().filter(|ok| !**ok).count();
    rec.report.frames = frames;
    rec.report.failed_frames = failed;
    rec.report.fer = failed as f64 / frames as f64;
    rec.report.mean_iterations = iterations as f64 / frames as f64;
    rec.report.leaked_bits = rec.leaked_bits;
    Ok(rec)
}

/// Efficiency figures for running `code` with repetition `k` at per-sample
/// SNR `s`; frame statistics are left at zero.
pub fn efficiency_report(code: &LdpcCode, k: usize, s: f64) -> Result<EfficiencyReport> {
    if k == 0 {
        return domain("repetition length must be >= 1");
    }
    let rate = code.rate();
    let c_gauss = capacity_gauss(s);
    Ok(EfficiencyReport {
        s,
        rate,
        k,
        beta: rate / k as f64 / c_gauss,
        beta_modulation: capacity_biawgn(s)? / c_gauss,
        fer: 0.0,
        frames: 0,
        failed_frames: 0,
        mean_iterations: 0.0,
        leaked_bits: 0,
        hash_bits: HASH_BITS,
    })
}
