//! Monte Carlo link simulation: bits → turbo → constellation → scheme →
//! TU6 channel → detector → LLRs → turbo decoder, swept over SNR.
//!
//! A frame occupies `n_units` subcarriers (spread evenly over the FFT) for
//! four OFDM-symbol slots. Every scheme places four data symbols per
//! subcarrier, so all schemes use the same time-frequency resources. Coded
//! symbols are mapped subcarrier-first: symbol `s` goes to unit
//! `s mod n_units`, position `s / n_units`.

mod io;
mod link;
mod stats;
mod uncoded;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdd::CddConfig;
use crate::channel::{draw_channel, noise_variance, ChannelSpec, TapProfile};
use crate::detect::DetectorKind;
use crate::error::{invalid, Error, Result};
use crate::numerics::{Constellation, Modulation, RngStream};
use crate::stbc::SchemeId;
use crate::turbo::{CodeRate, LlrFrame, TurboCodec, TurboConfig};

pub use io::{
    append_records, parse_csv, read_config, write_config, write_records, CSV_HEADER,
};
pub use link::{default_detector, Link, SLOTS_PER_UNIT, SYMBOLS_PER_UNIT};
pub use stats::{ber_slope, snr_at, weighted_slope, wilson, Z95};
pub use uncoded::{uncoded_ber, UncodedPoint};

/// Detector noise variance floor, used when the link is noiseless.
const NOISELESS_N0: f64 = 1e-12;

fn default_nt() -> usize {
    4
}
fn default_nr() -> usize {
    2
}
fn default_n_fft() -> usize {
    512
}
fn default_delays() -> Vec<usize> {
    vec![0, 64, 128, 192]
}
fn default_iterations() -> usize {
    8
}
fn default_min_errors() -> u64 {
    100
}
fn default_max_frames() -> u64 {
    20000
}
fn default_channel() -> ChannelSpec {
    ChannelSpec::Tu6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: SchemeId,
    #[serde(default = "default_nt")]
    pub nt: usize,
    #[serde(default = "default_nr")]
    pub nr: usize,
    #[serde(default)]
    pub modulation: Modulation,
    pub rate: CodeRate,
    /// Information bits per frame; the rate's default when absent.
    #[serde(default)]
    pub block_len: Option<usize>,
    #[serde(default = "default_n_fft")]
    pub n_fft: usize,
    #[serde(default = "default_delays")]
    pub cdd_delays: Vec<usize>,
    #[serde(default = "default_channel")]
    pub channel: ChannelSpec,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default)]
    pub seed: u64,
    /// `None` picks LMMSE for QO-STBC and ML for the other schemes.
    #[serde(default)]
    pub detector: Option<DetectorKind>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub interleaver_seed: u64,
    /// Skip noise entirely (SNR grid is ignored for the noise draw).
    #[serde(default)]
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(scheme: SchemeId, rate: CodeRate, snr_db: Vec<f64>) -> Self {
        Self {
            scheme,
            nt: default_nt(),
            nr: default_nr(),
            modulation: Modulation::Qpsk,
            rate,
            block_len: None,
            n_fft: default_n_fft(),
            cdd_delays: default_delays(),
            channel: default_channel(),
            snr_db,
            min_errors: default_min_errors(),
            max_frames: default_max_frames(),
            seed: 0,
            detector: None,
            iterations: default_iterations(),
            interleaver_seed: 0,
            noiseless: false,
        }
    }

    pub fn detector(&self) -> DetectorKind {
        self.detector.unwrap_or_else(|| default_detector(self.scheme))
    }

    pub fn block_len(&self) -> usize {
        self.block_len.unwrap_or_else(|| self.rate.default_block_len())
    }

    pub fn turbo(&self) -> TurboConfig {
        let mut t = TurboConfig::new(self.block_len(), self.rate);
        t.iterations = self.iterations;
        t.interleaver_seed = self.interleaver_seed;
        t
    }

    pub fn cdd(&self) -> CddConfig {
        CddConfig {
            n_fft: self.n_fft,
            delays: self.cdd_delays.clone(),
            ..CddConfig::default()
        }
    }
}

/// Result of one SNR point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub scheme: SchemeId,
    pub rate: CodeRate,
    #[serde(rename = "mod")]
    pub modulation: Modulation,
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, o: &Self) -> bool {
        self.scheme == o.scheme
            && self.rate == o.rate
            && self.modulation == o.modulation
            && self.snr_db.to_bits() == o.snr_db.to_bits()
            && self.frames == o.frames
            && self.frame_errors == o.frame_errors
            && self.bit_errors == o.bit_errors
            && self.fer.to_bits() == o.fer.to_bits()
            && self.ber.to_bits() == o.ber.to_bits()
            && self.fer_ci_lo.to_bits() == o.fer_ci_lo.to_bits()
            && self.fer_ci_hi.to_bits() == o.fer_ci_hi.to_bits()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
}

/// Time-frequency resources one frame occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceUsage {
    pub subcarriers: usize,
    pub ofdm_symbols: usize,
    pub data_symbols: usize,
}

/// Validated, ready-to-run configuration.
#[derive(Debug)]
pub struct Simulator {
    cfg: SimConfig,
    codec: TurboCodec,
    cons: Constellation,
    cdd: CddConfig,
    profile: TapProfile,
    n_symbols: usize,
    n_units: usize,
}

impl Simulator {
    /// Checks the whole configuration before any frame runs.
    pub fn new(cfg: SimConfig) -> Result<Self> {
        if cfg.nt != 4 {
            return invalid(format!("all schemes use 4 transmit antennas, got nt = {}", cfg.nt));
        }
        if cfg.nr == 0 || cfg.nr > 16 {
            return invalid(format!("nr must be in 1..=16, got {}", cfg.nr));
        }
        if cfg.snr_db.iter().any(|s| s.is_nan()) {
            return invalid("SNR grid contains NaN");
        }
        if cfg.max_frames == 0 {
            return invalid("max_frames must be positive");
        }
        let cdd = cfg.cdd();
        cdd.validate(cfg.nt)?;
        if !crate::numerics::is_power_of_two(cfg.n_fft) {
            return invalid(format!("n_fft {} is not a power of two", cfg.n_fft));
        }
        let profile = cfg.channel.profile()?;
        profile.validate()?;
        if let Some(&d) = profile.tap_samples().iter().max() {
            if d >= crate::channel::MAX_TAP_SPAN.min(cfg.n_fft) {
                return Err(Error::Config(format!(
                    "channel delay spread of {d} samples does not fit n_fft {}",
                    cfg.n_fft
                )));
            }
        }
        let codec = TurboCodec::new(cfg.turbo())?;
        let cons = Constellation::new(cfg.modulation);
        let per_unit_bits = SYMBOLS_PER_UNIT * cons.bits_per_symbol();
        let n_units = codec.coded_len().div_ceil(per_unit_bits);
        if n_units > cfg.n_fft {
            return invalid(format!(
                "{} coded bits need {n_units} subcarriers, only {} available",
                codec.coded_len(),
                cfg.n_fft
            ));
        }
        Ok(Self {
            n_symbols: n_units * SYMBOLS_PER_UNIT,
            n_units,
            cfg,
            codec,
            cons,
            cdd,
            profile,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn codec(&self) -> &TurboCodec {
        &self.codec
    }

    /// Subcarrier index of unit `u`.
    pub fn unit_subcarrier(&self, u: usize) -> usize {
        u * self.cfg.n_fft / self.n_units
    }

    pub fn resources(&self) -> ResourceUsage {
        ResourceUsage {
            subcarriers: self.n_units,
            ofdm_symbols: SLOTS_PER_UNIT,
            data_symbols: self.n_symbols,
        }
    }

    /// One frame on stream `(seed, frame)`. Also returns the resources the
    /// transmission actually touched.
    pub fn run_frame_counted(&self, snr_db: f64, frame: u64) -> Result<(FrameOutcome, ResourceUsage)> {
        let mut rng = RngStream::new(self.cfg.seed, frame).generator();
        let k = self.cfg.block_len();
        let info = rng.bits(k);
        let mut coded = self.codec.encode(&info)?;
        let n_coded = coded.len();
        // Pad to whole units; the padding is not decoded.
        coded.resize(self.n_symbols * self.cons.bits_per_symbol(), 0);
        let symbols = self.cons.map(&coded)?;
        let h = draw_channel(&self.profile, self.cfg.nt, self.cfg.nr, self.cfg.n_fft, &mut rng)?;
        let (n0, n0_det) = if self.cfg.noiseless || snr_db == f64::INFINITY {
            (0.0, NOISELESS_N0)
        } else {
            let n0 = noise_variance(snr_db);
            (n0, n0.max(NOISELESS_N0))
        };
        let link = Link {
            scheme: self.cfg.scheme,
            detector: self.cfg.detector(),
            cdd: &self.cdd,
            cons: &self.cons,
        };
        let bps = self.cons.bits_per_symbol();
        let mut llrs = vec![0.0; self.n_symbols * bps];
        let mut subcarriers = std::collections::BTreeSet::new();
        let mut max_slots = 0;
        for u in 0..self.n_units {
            let kc = self.unit_subcarrier(u);
            let idx: [usize; SYMBOLS_PER_UNIT] = std::array::from_fn(|p| u + p * self.n_units);
            let s = idx.map(|i| symbols[i]);
            let (d, slots) = link.run_unit(&s, &h.subcarrier(kc), kc, n0, n0_det, &mut rng)?;
            subcarriers.insert(kc);
            max_slots = max_slots.max(slots);
            for (p, &i) in idx.iter().enumerate() {
                llrs[i * bps..(i + 1) * bps].copy_from_slice(&d.llrs[p * bps..(p + 1) * bps]);
            }
        }
        llrs.truncate(n_coded);
        let decoded = self.codec.decode(&LlrFrame::new(llrs)?)?;
        let bit_errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        Ok((
            FrameOutcome { frame_error: bit_errors > 0, bit_errors },
            ResourceUsage {
                subcarriers: subcarriers.len(),
                ofdm_symbols: max_slots,
                data_symbols: self.n_units * SYMBOLS_PER_UNIT,
            },
        ))
    }

    pub fn run_frame(&self, snr_db: f64, frame: u64) -> Result<FrameOutcome> {
        self.run_frame_counted(snr_db, frame).map(|r| r.0)
    }

    /// Runs frames in parallel batches and applies the stop rule in frame
    /// order, so the record does not depend on the number of workers.
    pub fn run_point(&self, snr_db: f64) -> Result<RunRecord> {
        let start = Instant::now();
        let batch = (rayon::current_num_threads() * 4).max(16) as u64;
        let (mut frames, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
        'outer: while frames < self.cfg.max_frames {
            let hi = (frames + batch).min(self.cfg.max_frames);
            let out: Vec<FrameOutcome> = (frames..hi)
                .into_par_iter()
                .map(|f| self.run_frame(snr_db, f))
                .collect::<Result<_>>()?;
            for o in out {
                frames += 1;
                frame_errors += u64::from(o.frame_error);
                bit_errors += o.bit_errors;
                if frame_errors >= self.cfg.min_errors {
                    break 'outer;
                }
            }
        }
        let (lo, hi) = wilson(frame_errors, frames, Z95);
        Ok(RunRecord {
            scheme: self.cfg.scheme,
            rate: self.cfg.rate,
            modulation: self.cfg.modulation,
            snr_db,
            frames,
            frame_errors,
            bit_errors,
            fer: frame_errors as f64 / frames as f64,
            ber: bit_errors as f64 / (frames * self.cfg.block_len() as u64) as f64,
            fer_ci_lo: lo,
            fer_ci_hi: hi,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// All SNR points in grid order; `on_record` sees each record as soon
    /// as it is complete.
    pub fn sweep(&self, mut on_record: impl FnMut(&RunRecord) -> Result<()>) -> Result<Vec<RunRecord>> {
        if self.cfg.snr_db.is_empty() {
            return invalid("SNR grid is empty");
        }
        let mut out = Vec::with_capacity(self.cfg.snr_db.len());
        for &s in &self.cfg.snr_db {
            let r = self.run_point(s)?;
            on_record(&r)?;
            out.push(r);
        }
        Ok(out)
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Validates `cfg` and sweeps it.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<RunRecord>> {
    Simulator::new(cfg.clone())?.sweep(|_| Ok(()))
}

/// Parses `lo:step:hi` (inclusive) or a single value.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("bad SNR value '{t}'")))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) || hi < lo || !lo.is_finite() || !hi.is_finite() {
                return invalid(format!("bad SNR grid '{s}' (lo:step:hi with step > 0)"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| lo + i as f64 * step).collect())
        }
        _ => invalid(format!("bad SNR grid '{s}' (lo:step:hi)")),
    }
}
