//! Monte-Carlo prepare-and-measure simulation over a linear quadrature
//! channel `y = g·x + B`.
//!
//! Samples are kept in shot-noise units. [`SimBatch::normalized`] rescales
//! them to the `y = x + z`, `x = ±1` form used by reconciliation.
//!
//! Generation is split into fixed chunks of [`CHUNK`] symbols; chunk `c` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, so a batch depends only
//! on its seed and size, not on the number of worker threads.

use std::io::{BufRead, Read, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::protocol::{Detection, Modulation, ProtocolConfig};

/// Symbols generated per RNG stream.
pub const CHUNK: usize = 1 << 16;

/// Quadrature measured by Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn tag(self) -> u8 {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Quadrature::X),
            1 => Ok(Quadrature::P),
            other => Err(Error::Format(format!("unknown quadrature tag {other}"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

/// Shape of the added channel noise. All kinds are variance-matched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    /// Uniform on `[−√(3v), √(3v)]`.
    Uniform,
    /// Student-t with `nu > 4` degrees of freedom, rescaled to variance `v`.
    StudentT { nu: f64 },
}

/// Linear channel `y_q = g_q x_q + B_q` per quadrature, followed by Bob's
/// detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearChannelModel {
    pub gain_x: f64,
    pub gain_p: f64,
    pub noise_kind: NoiseKind,
    /// Total noise variance on X before the heterodyne split, shot noise
    /// included (`1 + Tξ` for a physical channel).
    pub noise_variance_x: f64,
    pub noise_variance_p: f64,
    pub detection: Detection,
}

impl LinearChannelModel {
    pub fn new(
        gain_x: f64,
        gain_p: f64,
        noise_kind: NoiseKind,
        noise_variance_x: f64,
        noise_variance_p: f64,
        detection: Detection,
    ) -> Result<Self> {
        for g in [gain_x, gain_p] {
            if !(g > 0.0 && g <= 1.0) {
                return domain(format!("channel gains must lie in (0, 1], got {g}"));
            }
        }
        for v in [noise_variance_x, noise_variance_p] {
            if !(v.is_finite() && v >= 0.0) {
                return domain(format!("noise variances must be >= 0, got {v}"));
            }
        }
        if let NoiseKind::StudentT { nu } = noise_kind {
            if !(nu > 4.0) {
                return domain(format!("Student-t noise needs nu > 4, got {nu}"));
            }
        }
        Ok(LinearChannelModel {
            gain_x,
            gain_p,
            noise_kind,
            noise_variance_x,
            noise_variance_p,
            detection,
        })
    }

    /// Symmetric channel with `g = √(ηT)` and noise `1 + ηTξ`.
    pub fn from_channel(ch: &ChannelParams, noise_kind: NoiseKind) -> Result<Self> {
        let t = ch.t_eff();
        let v = 1.0 + t * ch.xi;
        Self::new(t.sqrt(), t.sqrt(), noise_kind, v, v, ch.detection)
    }

    /// `y = x` exactly.
    pub fn noiseless(detection: Detection) -> Self {
        LinearChannelModel {
            gain_x: 1.0,
            gain_p: 1.0,
            noise_kind: NoiseKind::Gaussian,
            noise_variance_x: 0.0,
            noise_variance_p: 0.0,
            detection,
        }
    }

    pub fn transmission_x(&self) -> f64 {
        self.gain_x * self.gain_x
    }

    pub fn transmission_p(&self) -> f64 {
        self.gain_p * self.gain_p
    }

    fn gain(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.gain_x,
            Quadrature::P => self.gain_p,
        }
    }

    fn noise_variance(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.noise_variance_x,
            Quadrature::P => self.noise_variance_p,
        }
    }

    fn draw_noise<R: Rng>(&self, q: Quadrature, rng: &mut R) -> f64 {
        let v = self.noise_variance(q);
        if v == 0.0 {
            return 0.0;
        }
        match self.noise_kind {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                v.sqrt() * z
            }
            NoiseKind::Uniform => {
                let half = (3.0 * v).sqrt();
                rng.random_range(-half..half)
            }
            NoiseKind::StudentT { nu } => {
                let t = StudentT::new(nu).expect("nu validated").sample(rng);
                t * (v * (nu - 2.0) / nu).sqrt()
            }
        }
    }
}

/// Classical data shared after the quantum phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimBatch {
    /// Alice's value on the measured quadrature, shot-noise units.
    pub x: Vec<f64>,
    /// Bob's outcome, shot-noise units (per-quadrature detector units for
    /// heterodyne).
    pub y: Vec<f64>,
    pub quadrature: Vec<Quadrature>,
    /// `|x|` for discrete modulations (`√V_A`); the modulation standard
    /// deviation for Gaussian modulation.
    pub amplitude: f64,
    /// Signal gain from `x` to `y` on each quadrature, detector split included.
    pub gain_x: f64,
    pub gain_p: f64,
    pub detection: Detection,
    pub seed: u64,
}

/// Sample second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub x2: f64,
    pub xy: f64,
    pub y2: f64,
    pub n: usize,
}

impl SimBatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn gain(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.gain_x,
            Quadrature::P => self.gain_p,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.len();
        for len in [self.y.len(), self.quadrature.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, actual: len });
            }
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite outcome".into()));
        }
        Ok(())
    }

    /// `(x/A, y/(g_q A))`: unit-amplitude symbols and outcomes with
    /// `y = x + z`, `Var z = 1/s`.
    pub fn normalized(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        if !(self.amplitude > 0.0) {
            return domain("batch amplitude must be > 0 to normalize");
        }
        let a = self.amplitude;
        let x = self.x.iter().map(|v| v / a).collect();
        let y = self
            .y
            .iter()
            .zip(&self.quadrature)
            .map(|(v, q)| v / (self.gain(*q) * a))
            .collect();
        Ok((x, y))
    }

    /// `⟨x²⟩ / ⟨(y − x)²⟩` on the normalized data.
    pub fn empirical_snr(&self) -> Result<f64> {
        let (x, y) = self.normalized()?;
        if x.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let signal = x.iter().map(|v| v * v).sum::<f64>();
        let noise = x.iter().zip(&y).map(|(a, b)| (b - a) * (b - a)).sum::<f64>();
        Ok(signal / noise)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        writeln!(
            out,
            "# detection={},amplitude={},gain_x={},gain_p={},seed={}",
            self.detection, self.amplitude, self.gain_x, self.gain_p, self.seed
        )?;
        writeln!(out, "x,y,quadrature")?;
        for ((x, y), q) in self.x.iter().zip(&self.y).zip(&self.quadrature) {
            writeln!(out, "{x:e},{y:e},{}", q.name())?;
        }
        Ok(())
    }

    /// Reads the format of [`SimBatch::write_csv`]. Without the metadata
    /// comment, homodyne detection is assumed and the amplitude and gains are
    /// estimated from the data.
    pub fn read_csv<R: BufRead>(input: R) -> Result<SimBatch> {
        let mut meta: Option<(Detection, f64, f64, f64, u64)> = None;
        let (mut x, mut y, mut quadrature) = (Vec::new(), Vec::new(), Vec::new());
        let mut saw_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                meta = Some(parse_csv_meta(rest)?);
                continue;
            }
            if !saw_header {
                if line.replace(' ', "") != "x,y,quadrature" {
                    return Err(Error::Format(format!("expected header x,y,quadrature, got {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<_> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 fields", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            x.push(parse(fields[0])?);
            y.push(parse(fields[1])?);
            quadrature.push(match fields[2] {
                "x" | "X" | "0" => Quadrature::X,
                "p" | "P" | "1" => Quadrature::P,
                other => return Err(Error::Format(format!("line {}: bad quadrature {other:?}", lineno + 1))),
            });
        }
        if x.is_empty() {
            return Err(Error::Empty("csv batch"));
        }
        let (detection, amplitude, gain_x, gain_p, seed) = match meta {
            Some(m) => m,
            None => {
                let amplitude = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
                let gain_for = |q: Quadrature| {
                    let (mut sxy, mut sxx) = (0.0, 0.0);
                    for i in 0..x.len() {
                        if quadrature[i] == q {
                            sxy += x[i] * y[i];
                            sxx += x[i] * x[i];
                        }
                    }
                    if sxx > 0.0 { (sxy / sxx).abs() } else { 1.0 }
                };
                (Detection::Homodyne, amplitude, gain_for(Quadrature::X), gain_for(Quadrature::P), 0)
            }
        };
        let batch = SimBatch {
            x,
            y,
            quadrature,
            amplitude,
            gain_x,
            gain_p,
            detection,
            seed,
        };
        batch.validate()?;
        Ok(batch)
    }

    /// Little-endian binary: magic `CVQB`, version, detection, amplitude,
    /// gains, seed and count, then `(f64 x, f64 y, u8 quadrature)` records.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&BINARY_VERSION.to_le_bytes())?;
        out.write_all(&[match self.detection {
            Detection::Homodyne => 0,
            Detection::Heterodyne => 1,
        }])?;
        for v in [self.amplitude, self.gain_x, self.gain_p] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        for ((x, y), q) in self.x.iter().zip(&self.y).zip(&self.quadrature) {
            out.write_all(&x.to_le_bytes())?;
            out.write_all(&y.to_le_bytes())?;
            out.write_all(&[q.tag()])?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<SimBatch> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Format("not a batch file (bad magic)".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut input)?);
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported batch version {version}")));
        }
        let detection = match read_array::<1, _>(&mut input)?[0] {
            0 => Detection::Homodyne,
            1 => Detection::Heterodyne,
            other => return Err(Error::Format(format!("unknown detection tag {other}"))),
        };
        let amplitude = f64::from_le_bytes(read_array(&mut input)?);
        let gain_x = f64::from_le_bytes(read_array(&mut input)?);
        let gain_p = f64::from_le_bytes(read_array(&mut input)?);
        let seed = u64::from_le_bytes(read_array(&mut input)?);
        let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
        let mut x = Vec::with_capacity(count.min(1 << 24));
        let mut y = Vec::with_capacity(count.min(1 << 24));
        let mut quadrature = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let rec: [u8; 17] = read_array(&mut input)?;
            x.push(f64::from_le_bytes(rec[0..8].try_into().expect("8 bytes")));
            y.push(f64::from_le_bytes(rec[8..16].try_into().expect("8 bytes")));
            quadrature.push(Quadrature::from_tag(rec[16])?);
        }
        let batch = SimBatch {
            x,
            y,
            quadrature,
            amplitude,
            gain_x,
            gain_p,
            detection,
            seed,
        };
        batch.validate()?;
        Ok(batch)
    }
}

const BINARY_MAGIC: &[u8; 4] = b"CVQB";
const BINARY_VERSION: u16 = 1;

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated batch file: {e}")))?;
    Ok(buf)
}

fn parse_csv_meta(text: &str) -> Result<(Detection, f64, f64, f64, u64)> {
    let mut detection = Detection::Homodyne;
    let (mut amplitude, mut gain_x, mut gain_p, mut seed) = (None, None, None, 0);
    for item in text.split(',') {
        let Some((key, value)) = item.trim().split_once('=') else {
            continue;
        };
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("bad metadata value {value:?} for {key}")))
        };
        match key {
            "detection" => {
                detection = match value {
                    "homodyne" => Detection::Homodyne,
                    "heterodyne" => Detection::Heterodyne,
                    other => return Err(Error::Format(format!("unknown detection {other:?}"))),
                }
            }
            "amplitude" => amplitude = Some(num()?),
            "gain_x" => gain_x = Some(num()?),
            "gain_p" => gain_p = Some(num()?),
            "seed" => seed = value.parse().map_err(|_| Error::Format(format!("bad seed {value:?}")))?,
            _ => {}
        }
    }
    match (amplitude, gain_x, gain_p) {
        (Some(a), Some(gx), Some(gp)) => Ok((detection, a, gx, gp, seed)),
        _ => Err(Error::Format("metadata needs amplitude, gain_x and gain_p".into())),
    }
}

/// Alice's mean quadratures `(x, p)` for a uniformly drawn symbol.
fn draw_symbol<R: Rng>(modulation: Modulation, amplitude: f64, rng: &mut R) -> (f64, f64) {
    match modulation {
        // ±γ with γ = α e^{−iπ/4}: (x, p) = ±(√V_A, −√V_A).
        Modulation::TwoState => {
            let s = if rng.random::<bool>() { amplitude } else { -amplitude };
            (s, -s)
        }
        // α e^{i(2k+1)π/4}: independent signs on both quadratures.
        Modulation::FourState => {
            let sx = if rng.random::<bool>() { amplitude } else { -amplitude };
            let sp = if rng.random::<bool>() { amplitude } else { -amplitude };
            (sx, sp)
        }
        Modulation::Gaussian => {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            (amplitude * a, amplitude * b)
        }
    }
}

fn pick(q: Quadrature, pair: (f64, f64)) -> f64 {
    match q {
        Quadrature::X => pair.0,
        Quadrature::P => pair.1,
    }
}

fn draw_quadrature<R: Rng>(rng: &mut R) -> Quadrature {
    if rng.random::<bool>() {
        Quadrature::X
    } else {
        Quadrature::P
    }
}

type Chunk = (Vec<f64>, Vec<f64>, Vec<Quadrature>);

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn collect_chunks(chunks: Vec<Chunk>) -> Chunk {
    let total = chunks.iter().map(|c| c.0.len()).sum();
    let mut out = (Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(total));
    for (x, y, q) in chunks {
        out.0.extend(x);
        out.1.extend(y);
        out.2.extend(q);
    }
    out
}

fn batch_gains(model: &LinearChannelModel) -> (f64, f64) {
    match model.detection {
        Detection::Homodyne => (model.gain_x, model.gain_p),
        Detection::Heterodyne => (
            model.gain_x * std::f64::consts::FRAC_1_SQRT_2,
            model.gain_p * std::f64::consts::FRAC_1_SQRT_2,
        ),
    }
}

/// Sends `n` symbols through `model`.
///
/// Homodyne: one sample per symbol on a uniformly random quadrature.
/// Heterodyne: both quadratures per symbol, each `(g x + B + vacuum)/√2`,
/// so the batch holds `2n` samples.
pub fn simulate(cfg: &ProtocolConfig, model: &LinearChannelModel, n: usize, seed: u64) -> Result<SimBatch> {
    if n == 0 {
        return domain("need at least one symbol");
    }
    if cfg.modulation == Modulation::TwoState && model.detection == Detection::Heterodyne {
        return Err(Error::Unsupported(
            "the two-state protocol is simulated with homodyne detection only".into(),
        ));
    }
    let amplitude = cfg.v_a.sqrt();
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Chunk> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            let per = if model.detection == Detection::Heterodyne { 2 } else { 1 };
            let mut out: Chunk = (
                Vec::with_capacity(len * per),
                Vec::with_capacity(len * per),
                Vec::with_capacity(len * per),
            );
            for _ in 0..len {
                let symbol = draw_symbol(cfg.modulation, amplitude, &mut rng);
                match model.detection {
                    Detection::Homodyne => {
                        let q = draw_quadrature(&mut rng);
                        let xa = pick(q, symbol);
                        let y = model.gain(q) * xa + model.draw_noise(q, &mut rng);
                        out.0.push(xa);
                        out.1.push(y);
                        out.2.push(q);
                    }
                    Detection::Heterodyne => {
                        for q in [Quadrature::X, Quadrature::P] {
                            let xa = pick(q, symbol);
                            let vacuum: f64 = StandardNormal.sample(&mut rng);
                            let y = (model.gain(q) * xa + model.draw_noise(q, &mut rng) + vacuum)
                                * std::f64::consts::FRAC_1_SQRT_2;
                            out.0.push(xa);
                            out.1.push(y);
                            out.2.push(q);
                        }
                    }
                }
            }
            out
        })
        .collect();
    let (x, y, quadrature) = collect_chunks(parts);
    let (gain_x, gain_p) = batch_gains(model);
    Ok(SimBatch {
        x,
        y,
        quadrature,
        amplitude,
        gain_x,
        gain_p,
        detection: model.detection,
        seed,
    })
}

/// Homodyne simulation in which each run of `k` consecutive channel uses
/// carries the same symbol on the same quadrature (the direct-reconciliation
/// repetition path).
pub fn simulate_repeated(
    cfg: &ProtocolConfig,
    model: &LinearChannelModel,
    blocks: usize,
    k: usize,
    seed: u64,
) -> Result<SimBatch> {
    if blocks == 0 || k == 0 {
        return domain("need at least one block of length >= 1");
    }
    if model.detection != Detection::Homodyne {
        return Err(Error::Unsupported("repeated transmission is simulated with homodyne detection".into()));
    }
    let amplitude = cfg.v_a.sqrt();
    let per_chunk = (CHUNK / k).max(1);
    let chunks = blocks.div_ceil(per_chunk);
    let parts: Vec<Chunk> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = per_chunk.min(blocks - c * per_chunk);
            let mut out: Chunk = (Vec::with_capacity(len * k), Vec::with_capacity(len * k), Vec::with_capacity(len * k));
            for _ in 0..len {
                let symbol = draw_symbol(cfg.modulation, amplitude, &mut rng);
                let q = draw_quadrature(&mut rng);
                let xa = pick(q, symbol);
                for _ in 0..k {
                    out.0.push(xa);
                    out.1.push(model.gain(q) * xa + model.draw_noise(q, &mut rng));
                    out.2.push(q);
                }
            }
            out
        })
        .collect();
    let (x, y, quadrature) = collect_chunks(parts);
    Ok(SimBatch {
        x,
        y,
        quadrature,
        amplitude,
        gain_x: model.gain_x,
        gain_p: model.gain_p,
        detection: Detection::Homodyne,
        seed,
    })
}

/// Sample means of `x²`, `xy` and `y²`.
pub fn moments(batch: &SimBatch) -> Result<Moments> {
    batch.validate()?;
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let n = batch.len();
    let (mut x2, mut xy, mut y2) = (0.0, 0.0, 0.0);
    for (x, y) in batch.x.iter().zip(&batch.y) {
        x2 += x * x;
        xy += x * y;
        y2 += y * y;
    }
    let nf = n as f64;
    Ok(Moments {
        x2: x2 / nf,
        xy: xy / nf,
        y2: y2 / nf,
        n,
    })
}

/// Averages consecutive blocks of `k` normalized samples that carry the same
/// symbol: `Y_i = (1/k) Σ_j y_{ij}`. The result has unit amplitude and gain
/// and `k` times the input SNR.
pub fn effective_sidechannel(batch: &SimBatch, k: usize) -> Result<SimBatch> {
    if k == 0 {
        return domain("repetition length must be >= 1");
    }
    if batch.len() % k != 0 {
        return domain(format!("batch length {} is not a multiple of k = {k}", batch.len()));
    }
    let (x, y) = batch.normalized()?;
    let blocks = x.len() / k;
    let mut out_x = Vec::with_capacity(blocks);
    let mut out_y = Vec::with_capacity(blocks);
    let mut out_q = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let range = b * k..(b + 1) * k;
        let x0 = x[b * k];
        let q0 = batch.quadrature[b * k];
        if range.clone().any(|i| x[i] != x0 || batch.quadrature[i] != q0) {
            return domain(format!("block {b} does not carry a single repeated symbol"));
        }
        out_x.push(x0);
        out_y.push(y[range].iter().sum::<f64>() / k as f64);
        out_q.push(q0);
    }
    Ok(SimBatch {
        x: out_x,
        y: out_y,
        quadrature: out_q,
        amplitude: 1.0,
        gain_x: 1.0,
        gain_p: 1.0,
        detection: batch.detection,
        seed: batch.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(modulation: Modulation, v_a: f64) -> ProtocolConfig {
        ProtocolConfig::new(modulation, v_a, 0.8).unwrap()
    }

    #[test]
    fn noiseless_channel_reproduces_symbols() {
        let model = LinearChannelModel::noiseless(Detection::Homodyne);
        let b = simulate(&cfg(Modulation::FourState, 0.5), &model, 1000, 3).unwrap();
        assert_eq!(b.x, b.y);
        let (x, y) = b.normalized().unwrap();
        assert!(x.iter().all(|v| v.abs() == 1.0));
        assert_eq!(x, y);
    }

    #[test]
    fn deterministic_given_seed() {
        let ch = ChannelParams::new(0.5, 0.01, 1.0, Detection::Homodyne).unwrap();
        let model = LinearChannelModel::from_channel(&ch, NoiseKind::Gaussian).unwrap();
        let c = cfg(Modulation::FourState, 0.25);
        let a = simulate(&c, &model, 2 * CHUNK + 17, 9).unwrap();
        let b = simulate(&c, &model, 2 * CHUNK + 17, 9).unwrap();
        assert_eq!(a, b);
        let other = simulate(&c, &model, 2 * CHUNK + 17, 10).unwrap();
        assert_ne!(a.y, other.y);
    }

    #[test]
    fn two_state_symbols_are_anticorrelated_across_quadratures() {
        let model = LinearChannelModel::noiseless(Detection::Homodyne);
        let b = simulate(&cfg(Modulation::TwoState, 0.02), &model, 10, 1).unwrap();
        assert!(b.x.iter().all(|v| (v.abs() - 0.02f64.sqrt()).abs() < 1e-15));
        assert!(simulate(
            &cfg(Modulation::TwoState, 0.02),
            &LinearChannelModel::noiseless(Detection::Heterodyne),
            10,
            1
        )
        .is_err());
    }

    #[test]
    fn heterodyne_emits_two_samples_per_symbol() {
        let ch = ChannelParams::new(0.5, 0.0, 1.0, Detection::Heterodyne).unwrap();
        let model = LinearChannelModel::from_channel(&ch, NoiseKind::Gaussian).unwrap();
        let b = simulate(&cfg(Modulation::FourState, 0.25), &model, 100, 1).unwrap();
        assert_eq!(b.len(), 200);
        assert_eq!(b.quadrature[0], Quadrature::X);
        assert_eq!(b.quadrature[1], Quadrature::P);
        assert!((b.gain_x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(LinearChannelModel::new(0.0, 1.0, NoiseKind::Gaussian, 1.0, 1.0, Detection::Homodyne).is_err());
        assert!(LinearChannelModel::new(1.0, 1.0, NoiseKind::Gaussian, -1.0, 1.0, Detection::Homodyne).is_err());
        assert!(LinearChannelModel::new(1.0, 1.0, NoiseKind::StudentT { nu: 4.0 }, 1.0, 1.0, Detection::Homodyne).is_err());
    }

    #[test]
    fn sidechannel_identity_and_errors() {
        let model = LinearChannelModel::noiseless(Detection::Homodyne);
        let c = cfg(Modulation::FourState, 0.25);
        let b = simulate(&c, &model, 10, 1).unwrap();
        let one = effective_sidechannel(&b, 1).unwrap();
        let (x, y) = b.normalized().unwrap();
        assert_eq!(one.x, x);
        assert_eq!(one.y, y);
        assert!(effective_sidechannel(&b, 3).is_err());
        let rep = simulate_repeated(&c, &model, 5, 4, 1).unwrap();
        assert_eq!(effective_sidechannel(&rep, 4).unwrap().len(), 5);
    }

    #[test]
    fn moments_of_empty_batch_fail() {
        let b = SimBatch {
            x: vec![],
            y: vec![],
            quadrature: vec![],
            amplitude: 1.0,
            gain_x: 1.0,
            gain_p: 1.0,
            detection: Detection::Homodyne,
            seed: 0,
        };
        assert!(matches!(moments(&b), Err(Error::Empty(_))));
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let ch = ChannelParams::new(0.4, 0.01, 1.0, Detection::Heterodyne).unwrap();
        let model = LinearChannelModel::from_channel(&ch, NoiseKind::Uniform).unwrap();
        let b = simulate(&cfg(Modulation::FourState, 0.25), &model, 50, 4).unwrap();

        let mut bin = Vec::new();
        b.write_binary(&mut bin).unwrap();
        assert_eq!(SimBatch::read_binary(&bin[..]).unwrap(), b);
        assert!(SimBatch::read_binary(&bin[..bin.len() - 3]).is_err());

        let mut csv = Vec::new();
        b.write_csv(&mut csv).unwrap();
        let back = SimBatch::read_csv(&csv[..]).unwrap();
        assert_eq!(back, b);

        let bare = "x,y,quadrature\n0.5,0.45,x\n-0.5,-0.55,p\n0.5,0.5,x\n-0.5,-0.4,p\n";
        let est = SimBatch::read_csv(bare.as_bytes()).unwrap();
        assert!((est.amplitude - 0.5).abs() < 1e-12);
        assert!((est.gain_x - 0.95).abs() < 1e-12);
        assert!(SimBatch::read_csv("x,y\n1,2\n".as_bytes()).is_err());
    }
}
