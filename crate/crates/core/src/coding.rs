//! Encoder, AWGN channel, successive-cancellation decoder and Monte-Carlo runs.
//!
//! Conventions: `x = u F^{⊗n}` with `F = [[1, 0], [1, 1]]` and no bit
//! reversal, so `u_i` sees the synthetic channel whose MSB-first index is `i`.
//! BPSK maps bit 0 to `+1`; LLRs are `ln W(y|0) / W(y|1) = 2y / sigma^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designer::{CodeDesign, DesignFile};
use crate::error::{Error, Result};
use crate::ga::{self, ChannelParam};
use crate::scalar::Real;

/// Magnitude limit applied to check-node inputs.
pub const LLR_CLAMP: f64 = 40.0;

fn check_len(len: usize, n: u32) -> Result<()> {
    let expected = 1usize << n;
    if len != expected {
        return Err(Error::LengthMismatch { expected, got: len });
    }
    Ok(())
}

/// In-place butterfly for `x = u F^{⊗n}`; applying it twice is the identity.
pub fn polar_transform(bits: &mut [u8]) {
    let len = bits.len();
    let mut h = 1;
    while h < len {
        for block in bits.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x ^= *y;
            }
        }
        h *= 2;
    }
}

pub fn polar_encode(u: &[u8], n: u32) -> Result<Vec<u8>> {
    check_len(u.len(), n)?;
    let mut x = u.to_vec();
    polar_transform(&mut x);
    Ok(x)
}

/// BPSK symbol of a bit.
pub fn bpsk<T: Real>(bit: u8) -> T {
    if bit == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Noisy observations `y = s + noise` of the BPSK image of `x`.
pub fn transmit<R: Rng + ?Sized>(x: &[u8], sigma2: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain { value: sigma2, domain: "sigma2 > 0" });
    }
    let sigma = sigma2.sqrt();
    Ok(x.iter()
        .map(|&b| bpsk::<f64>(b) + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// Channel LLRs `2y / sigma^2`.
pub fn channel_llrs<T: Real>(y: &[T], sigma2: T) -> Vec<T> {
    let scale = T::of(2.0) / sigma2;
    y.iter().map(|&v| scale * v).collect()
}

/// Check-node rule `2 atanh(tanh(a/2) tanh(b/2))`, inputs clamped to `±LLR_CLAMP`.
///
/// Evaluated as `sign(a) sign(b) [min(|a|,|b|) + ln(1 + e^{-(|a|+|b|)}) - ln(1 + e^{-||a|-|b||})]`,
/// which is exact and never forms `atanh(±1)`.
pub fn check_node<T: Real>(a: T, b: T) -> T {
    let lim = T::of(LLR_CLAMP);
    let a = a.max(-lim).min(lim);
    let b = b.max(-lim).min(lim);
    let (ma, mb) = (a.abs(), b.abs());
    let mag = ma.min(mb) + (-(ma + mb)).exp().ln_1p() - (-(ma - mb).abs()).exp().ln_1p();
    if (a < T::zero()) != (b < T::zero()) {
        -mag
    } else {
        mag
    }
}

/// Successive-cancellation decoder for a fixed frozen pattern.
#[derive(Debug, Clone)]
pub struct ScDecoder<T> {
    n: u32,
    frozen: Vec<bool>,
    work: Vec<T>,
    partial: Vec<u8>,
}

impl<T: Real> ScDecoder<T> {
    pub fn new(n: u32, frozen: Vec<bool>) -> Result<Self> {
        check_len(frozen.len(), n)?;
        let size = 1usize << n;
        Ok(Self { n, frozen, work: vec![T::zero(); size.max(1)], partial: vec![0; size] })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    /// Decodes into `u` (length `2^n`); frozen positions come out as 0.
    pub fn decode_into(&mut self, llr: &[T], u: &mut [u8]) -> Result<()> {
        check_len(llr.len(), self.n)?;
        check_len(u.len(), self.n)?;
        sc_rec(llr, &self.frozen, u, &mut self.partial, &mut self.work);
        Ok(())
    }

    pub fn decode(&mut self, llr: &[T]) -> Result<Vec<u8>> {
        let mut u = vec![0; llr.len()];
        self.decode_into(llr, &mut u)?;
        Ok(u)
    }
}

/// Decodes the subtree fed by `llr`, writing decisions to `u` and the re-encoded word to `x`.
fn sc_rec<T: Real>(llr: &[T], frozen: &[bool], u: &mut [u8], x: &mut [u8], work: &mut [T]) {
    let len = llr.len();
    if len == 1 {
        let bit = if frozen[0] { 0 } else { u8::from(llr[0] < T::zero()) };
        u[0] = bit;
        x[0] = bit;
        return;
    }
    let h = len / 2;
    let (child, rest) = work.split_at_mut(h);
    let (xa, xb) = x.split_at_mut(h);
    let (ua, ub) = u.split_at_mut(h);
    for i in 0..h {
        child[i] = check_node(llr[i], llr[i + h]);
    }
    sc_rec(child, &frozen[..h], ua, xa, rest);
    for i in 0..h {
        child[i] = if xa[i] == 1 { llr[i + h] - llr[i] } else { llr[i + h] + llr[i] };
    }
    sc_rec(child, &frozen[h..], ub, xb, rest);
    for i in 0..h {
        xa[i] ^= xb[i];
    }
}

/// One-shot decode.
pub fn sc_decode<T: Real>(llr: &[T], frozen: &[bool]) -> Result<Vec<u8>> {
    let n = llr.len().trailing_zeros();
    check_len(llr.len(), n)?;
    ScDecoder::new(n, frozen.to_vec())?.decode(llr)
}

/// When to stop simulating one SNR point; checked only at batch boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub batch_size: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_frame_errors: 100, max_frames: 1_000_000, batch_size: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub stop: StopRule,
    /// Send the all-zero word instead of random information bits.
    pub all_zero: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { seed: 1, stop: StopRule::default(), all_zero: false }
    }
}

/// Estimates at one Eb/N0 point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    pub sigma2: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub fer_stderr: f64,
    pub ber: f64,
    pub union_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub seed: u64,
    pub points: Vec<SimPoint>,
}

/// Reproducibility record written next to simulation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimManifest {
    pub design: DesignFile,
    pub snr_db: Vec<f64>,
    /// Always "ebn0": `sigma^2 = 1 / (2 R 10^{EbN0/10})`.
    pub snr_kind: String,
    pub config: SimConfig,
    pub tool_version: String,
}

impl SimManifest {
    pub fn new(design: &CodeDesign, snr_db: &[f64], config: &SimConfig) -> Self {
        Self {
            design: DesignFile::from_design(design),
            snr_db: snr_db.to_vec(),
            snr_kind: "ebn0".into(),
            config: config.clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Noise variance of a design at `Eb/N0`; a rate-0 code is treated as rate 1 (no information energy to scale).
pub fn design_sigma2(design: &CodeDesign, ebn0_db: f64) -> Result<f64> {
    let rate = if design.spec.k == 0 { 1.0 } else { design.spec.rate() };
    Ok(ChannelParam::from_ebn0_db(ebn0_db, rate)?.sigma2())
}

/// RNG for one frame: keyed by the run seed and SNR point, stream = frame number.
fn frame_rng(seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(frame);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
        }
    }
}

struct FrameWork {
    decoder: ScDecoder<f64>,
    u: Vec<u8>,
    u_hat: Vec<u8>,
}

fn run_frame(design: &CodeDesign, sigma2: f64, all_zero: bool, rng: &mut ChaCha8Rng, w: &mut FrameWork) -> Tally {
    w.u.iter_mut().for_each(|b| *b = 0);
    if !all_zero {
        for &i in &design.info {
            w.u[i as usize] = rng.gen::<bool>() as u8;
        }
    }
    let mut x = w.u.clone();
    polar_transform(&mut x);
    let y = transmit(&x, sigma2, rng).expect("sigma2 checked");
    let llr = channel_llrs(&y, sigma2);
    w.decoder.decode_into(&llr, &mut w.u_hat).expect("lengths fixed");
    let bit_errors = design.info.iter().filter(|&&i| w.u[i as usize] != w.u_hat[i as usize]).count() as u64;
    Tally { frames: 1, frame_errors: u64::from(bit_errors > 0), bit_errors }
}

/// Simulates `design` at each Eb/N0 point; results depend only on the seed, not on thread count.
pub fn monte_carlo(design: &CodeDesign, ebn0_db: &[f64], config: &SimConfig) -> Result<SimResult> {
    let stop = config.stop;
    if stop.batch_size == 0 || stop.max_frames == 0 {
        return Err(Error::InvalidSpec("batch_size and max_frames must be positive".into()));
    }
    let n = design.spec.n;
    let mask = design.is_frozen_mask();
    let mut points = Vec::with_capacity(ebn0_db.len());
    for (p, &db) in ebn0_db.iter().enumerate() {
        let sigma2 = design_sigma2(design, db)?;
        let mut total = Tally::default();
        while total.frame_errors < stop.min_frame_errors && total.frames < stop.max_frames {
            let start = total.frames;
            let end = (start + stop.batch_size).min(stop.max_frames);
            let batch = (start..end)
                .into_par_iter()
                .map_init(
                    || FrameWork {
                        decoder: ScDecoder::new(n, mask.clone()).expect("mask length 2^n"),
                        u: vec![0; mask.len()],
                        u_hat: vec![0; mask.len()],
                    },
                    |w, f| {
                        let mut rng = frame_rng(config.seed, p as u64, f);
                        run_frame(design, sigma2, config.all_zero, &mut rng, w)
                    },
                )
                .reduce(Tally::default, Tally::merge);
            total = total.merge(batch);
        }
        let means = ga::evolve(n, ChannelParam::new(sigma2)?);
        let fer = total.frame_errors as f64 / total.frames as f64;
        let info_bits = (total.frames * design.spec.k).max(1);
        points.push(SimPoint {
            snr_db: db,
            sigma2,
            frames: total.frames,
            frame_errors: total.frame_errors,
            bit_errors: total.bit_errors,
            fer,
            fer_stderr: (fer * (1.0 - fer) / total.frames as f64).sqrt(),
            ber: total.bit_errors as f64 / info_bits as f64,
            union_bound: ga::union_bound(&means, &design.info)?,
        });
    }
    Ok(SimResult { seed: config.seed, points })
}

/// CSV with header `snr_db,frames,frame_errors,fer,fer_stderr,ber,union_bound`.
pub fn sim_csv(result: &SimResult) -> String {
    let mut out = String::from("snr_db,frames,frame_errors,fer,fer_stderr,ber,union_bound\n");
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{:e},{:e},{:e},{:e}\n",
            p.snr_db, p.frames, p.frame_errors, p.fer, p.fer_stderr, p.ber, p.union_bound
        ));
    }
    out
}
