//! Incremental-diversity HARQ over the rows of an MDC-QOSTBC codeword.
//!
//! Round 1 sends row 1 (spatial multiplexing of four symbols), round 2 adds
//! row 2 (rows 1–2 form a DSTTD block) and round 3 adds rows 3–4, completing
//! the MDC-QOSTBC codeword. Every round decodes all rows received so far.
//! Sessions carry one uncoded codeword and use a genie ACK.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::{joint_mld_real, mdc_mld, LlrMode};
use crate::error::{invalid, Error, Result};
use crate::numerics::{CMat, Constellation, Cplx, Modulation, RMat, RngStream, SimRng};
use crate::stbc::{mdc_codeword_from_reals, stack_real, RealSymbolVec, SchemeId};

/// Stream ids at or above this value are reserved for HARQ sessions so they
/// never collide with per-frame streams of the coded simulator.
pub const SESSION_STREAM_BASE: u64 = 1 << 48;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelMode {
    /// One channel realization for the whole session.
    #[default]
    #[serde(rename = "static")]
    Static,
    /// A fresh realization for every transmitted row.
    #[serde(rename = "independent")]
    Independent,
}

impl FromStr for ChannelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(ChannelMode::Static),
            "independent" => Ok(ChannelMode::Independent),
            o => invalid(format!("unknown channel mode '{o}' (static|independent)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stages {
    /// Rows 3 and 4 are sent together.
    #[default]
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4")]
    Four,
}

impl Stages {
    /// Codeword rows sent in each round.
    pub fn schedule(self) -> &'static [Range<usize>] {
        match self {
            Stages::Three => &[0..1, 1..2, 2..4],
            Stages::Four => &[0..1, 1..2, 2..3, 3..4],
        }
    }

    pub fn rounds(self) -> usize {
        self.schedule().len()
    }
}

impl FromStr for Stages {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3" => Ok(Stages::Three),
            "4" => Ok(Stages::Four),
            o => invalid(format!("HARQ stages must be 3 or 4, got '{o}'")),
        }
    }
}

/// What the accumulated rows amount to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiversityLabel {
    #[serde(rename = "sm")]
    Sm,
    #[serde(rename = "dsttd")]
    Dsttd,
    #[serde(rename = "rows-1-3")]
    ThreeRows,
    #[serde(rename = "mdc-qostbc")]
    MdcQostbc,
}

impl DiversityLabel {
    fn for_rows(n: usize) -> Self {
        match n {
            1 => DiversityLabel::Sm,
            2 => DiversityLabel::Dsttd,
            3 => DiversityLabel::ThreeRows,
            _ => DiversityLabel::MdcQostbc,
        }
    }

    /// Transmit diversity level, where one is stated.
    pub fn transmit_diversity(self) -> Option<u32> {
        match self {
            DiversityLabel::Sm => Some(1),
            DiversityLabel::Dsttd => Some(2),
            DiversityLabel::ThreeRows => None,
            DiversityLabel::MdcQostbc => Some(4),
        }
    }
}

impl fmt::Display for DiversityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiversityLabel::Sm => "sm",
            DiversityLabel::Dsttd => "dsttd",
            DiversityLabel::ThreeRows => "rows-1-3",
            DiversityLabel::MdcQostbc => "mdc-qostbc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ack {
    Success,
    Fail,
}

/// Genie error detection.
pub fn ack_oracle(decoded: &[u8], info: &[u8]) -> Ack {
    if decoded == info {
        Ack::Success
    } else {
        Ack::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarqConfig {
    pub nr: usize,
    pub modulation: Modulation,
    pub stages: Stages,
    pub channel_mode: ChannelMode,
}

impl Default for HarqConfig {
    fn default() -> Self {
        Self {
            nr: 2,
            modulation: Modulation::Qpsk,
            stages: Stages::Three,
            channel_mode: ChannelMode::Static,
        }
    }
}

impl HarqConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nr == 0 || self.nr > 16 {
            return invalid(format!("nr must be in 1..=16, got {}", self.nr));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub symbols: [Cplx; 4],
    pub bits: Vec<u8>,
    pub label: DiversityLabel,
}

/// Noiseless content of codeword row `t` through channel `h` (`Nr × 4`).
fn row_through(cw: &CMat, t: usize, h: &CMat) -> Vec<Cplx> {
    (0..h.rows())
        .map(|rx| cw.row(t).iter().zip(h.row(rx)).map(|(a, b)| a * b).sum())
        .collect()
}

/// Real linear model of the first `rows.len()` codeword rows, each seen
/// through its own channel.
fn prefix_real_channel(channels: &[CMat]) -> RMat {
    let nr = channels[0].rows();
    let m = 2 * nr * channels.len();
    let mut g = RMat::zeros(m, 8);
    for j in 0..8 {
        let mut e = [0.0; 8];
        e[j] = 1.0;
        let cw = mdc_codeword_from_reals(&RealSymbolVec(e));
        let y: Vec<Cplx> = channels
            .iter()
            .enumerate()
            .flat_map(|(t, h)| row_through(&cw, t, h))
            .collect();
        for (i, v) in stack_real(&y).into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    g
}

/// Decodes the first `rows` codeword rows. `received[t]` and `channels[t]`
/// belong to row `t`; effective channels include the power scaling.
pub fn decode_rows(
    received: &[Vec<Cplx>],
    channels: &[CMat],
    n0: f64,
    cons: &Constellation,
) -> Result<Decision> {
    let rows = received.len();
    if rows == 0 || rows > 4 || channels.len() != rows {
        return invalid(format!("{rows} received rows for {} channels", channels.len()));
    }
    let r: Vec<Cplx> = received.concat();
    let label = DiversityLabel::for_rows(rows);
    let static_channel = channels.iter().all(|h| h == &channels[0]);
    let symbols: [Cplx; 4] = if rows == 4 && static_channel {
        let d = mdc_mld(&r, &channels[0], n0, cons, LlrMode::Exact)?;
        std::array::from_fn(|i| d.hard_symbols[i])
    } else {
        joint_mld_real(&prefix_real_channel(channels), &stack_real(&r), cons)?.0
    };
    let bits = symbols
        .iter()
        .flat_map(|s| cons.bits_of(cons.nearest(*s)))
        .collect();
    Ok(Decision { symbols, bits, label })
}

/// One HARQ session: a single MDC-QOSTBC codeword delivered over up to
/// three (or four) rounds.
#[derive(Debug)]
pub struct HarqSession {
    cfg: HarqConfig,
    cons: Constellation,
    n0: f64,
    info: Vec<u8>,
    symbols: [Cplx; 4],
    codeword: CMat,
    rng: SimRng,
    channels: Vec<CMat>,
    received: Vec<Vec<Cplx>>,
    outcomes: Vec<Ack>,
}

fn draw_h(rng: &mut SimRng, nr: usize) -> Result<CMat> {
    let s = SchemeId::MdcQostbc.power_scale();
    let mut h = CMat::zeros(nr, 4);
    for rx in 0..nr {
        for tx in 0..4 {
            h[(rx, tx)] = rng.gaussian_pair(1.0)? * s;
        }
    }
    Ok(h)
}

impl HarqSession {
    /// Draws the info bits (and, for a static channel, the channel) from
    /// `stream`.
    pub fn new(cfg: &HarqConfig, snr_db: f64, stream: RngStream) -> Result<Self> {
        cfg.validate()?;
        let cons = Constellation::new(cfg.modulation);
        let mut rng = stream.generator();
        let info = rng.bits(4 * cons.bits_per_symbol());
        let sym = cons.map(&info)?;
        let symbols: [Cplx; 4] = std::array::from_fn(|i| sym[i]);
        let codeword = mdc_codeword_from_reals(&RealSymbolVec::from_symbols(&symbols));
        let mut channels = Vec::with_capacity(4);
        if cfg.channel_mode == ChannelMode::Static {
            let h = draw_h(&mut rng, cfg.nr)?;
            channels.extend(std::iter::repeat_n(h, 4));
        }
        Ok(Self {
            cfg: cfg.clone(),
            cons,
            n0: crate::channel::noise_variance(snr_db),
            info,
            symbols,
            codeword,
            rng,
            channels,
            received: Vec::with_capacity(4),
            outcomes: Vec::new(),
        })
    }

    pub fn info(&self) -> &[u8] {
        &self.info
    }

    pub fn symbols(&self) -> &[Cplx; 4] {
        &self.symbols
    }

    pub fn codeword(&self) -> &CMat {
        &self.codeword
    }

    /// Rounds already transmitted.
    pub fn round(&self) -> usize {
        self.outcomes.len() + usize::from(self.awaiting_ack())
    }

    pub fn outcomes(&self) -> &[Ack] {
        &self.outcomes
    }

    pub fn rows_received(&self) -> usize {
        self.received.len()
    }

    pub fn succeeded(&self) -> bool {
        self.outcomes.last() == Some(&Ack::Success)
    }

    pub fn finished(&self) -> bool {
        self.succeeded() || self.outcomes.len() == self.cfg.stages.rounds()
    }

    fn awaiting_ack(&self) -> bool {
        let sent = self
            .cfg
            .stages
            .schedule()
            .iter()
            .take_while(|r| r.end <= self.received.len())
            .count();
        sent > self.outcomes.len()
    }

    /// Sends the next round and returns the transmitted codeword rows
    /// (before channel and power scaling).
    pub fn transmit_round(&mut self) -> Result<Vec<Vec<Cplx>>> {
        if self.succeeded() {
            return Err(Error::Protocol("transmission requested after ACK".into()));
        }
        if self.awaiting_ack() {
            return Err(Error::Protocol("previous round has not been acknowledged".into()));
        }
        let Some(rows) = self.cfg.stages.schedule().get(self.outcomes.len()).cloned() else {
            return Err(Error::Protocol("all rounds already used".into()));
        };
        let mut sent = Vec::new();
        for t in rows {
            if self.cfg.channel_mode == ChannelMode::Independent {
                let h = draw_h(&mut self.rng, self.cfg.nr)?;
                self.channels.push(h);
            }
            let mut y = row_through(&self.codeword, t, &self.channels[t]);
            for v in &mut y {
                *v += self.rng.gaussian_pair(self.n0)?;
            }
            self.received.push(y);
            sent.push(self.codeword.row(t).to_vec());
        }
        Ok(sent)
    }

    /// ML decoding of everything received so far.
    pub fn combine_decode(&self) -> Result<Decision> {
        let k = self.received.len();
        if k == 0 {
            return Err(Error::Protocol("nothing received yet".into()));
        }
        decode_rows(&self.received, &self.channels[..k], self.n0, &self.cons)
    }

    /// Decodes, consults the genie and records the outcome.
    pub fn acknowledge(&mut self) -> Result<(Decision, Ack)> {
        if !self.awaiting_ack() {
            return Err(Error::Protocol("no round awaiting acknowledgement".into()));
        }
        let d = self.combine_decode()?;
        let ack = ack_oracle(&d.bits, &self.info);
        self.outcomes.push(ack);
        Ok((d, ack))
    }

    /// Received rows and the channels they saw.
    pub fn received(&self) -> (&[Vec<Cplx>], &[CMat]) {
        (&self.received, &self.channels[..self.received.len()])
    }

    pub fn noise_variance(&self) -> f64 {
        self.n0
    }
}

/// Per-round statistics of a HARQ Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub label: DiversityLabel,
    /// Channel uses after this round.
    pub slots: usize,
    /// Symbols per channel use if decoding stops here.
    pub rate: f64,
    pub sessions: u64,
    /// Decoding every session with the rows up to this round, regardless of
    /// earlier ACKs.
    pub symbol_errors: u64,
    pub frame_errors: u64,
    /// Sessions whose first ACK came in this round.
    pub first_success: u64,
}

impl RoundStats {
    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / (4 * self.sessions) as f64
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.sessions as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarqReport {
    pub config: HarqConfig,
    pub snr_db: f64,
    pub seed: u64,
    pub rounds: Vec<RoundStats>,
    /// Delivered symbols per channel use under the ACK protocol.
    pub throughput: f64,
    pub residual_failures: u64,
}

/// Runs `sessions` sessions; session `i` uses stream
/// `SESSION_STREAM_BASE + i`, so results do not depend on thread count.
pub fn simulate(cfg: &HarqConfig, snr_db: f64, sessions: u64, seed: u64) -> Result<HarqReport> {
    use rayon::prelude::*;
    cfg.validate()?;
    let n_rounds = cfg.stages.rounds();
    // (symbol errors per round, frame error per round, first success round)
    let per: Vec<(Vec<u64>, Vec<bool>, Option<usize>)> = (0..sessions)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut s = HarqSession::new(cfg, snr_db, RngStream::new(seed, SESSION_STREAM_BASE + i))?;
            for _ in 0..n_rounds {
                s.transmit_round_unchecked()?;
            }
            let (rx, ch) = s.received();
            let mut sym_err = Vec::with_capacity(n_rounds);
            let mut frm_err = Vec::with_capacity(n_rounds);
            let mut first = None;
            for (k, rows) in cfg.stages.schedule().iter().enumerate() {
                let d = decode_rows(&rx[..rows.end], &ch[..rows.end], s.n0, &s.cons)?;
                sym_err.push(d.symbols.iter().zip(&s.symbols).filter(|(a, b)| a != b).count() as u64);
                let ok = ack_oracle(&d.bits, &s.info) == Ack::Success;
                frm_err.push(!ok);
                if ok && first.is_none() {
                    first = Some(k);
                }
            }
            Ok((sym_err, frm_err, first))
        })
        .collect::<Result<_>>()?;

    let mut rounds: Vec<RoundStats> = cfg
        .stages
        .schedule()
        .iter()
        .enumerate()
        .map(|(k, r)| RoundStats {
            round: k + 1,
            label: DiversityLabel::for_rows(r.end),
            slots: r.end,
            rate: 4.0 / r.end as f64,
            sessions,
            symbol_errors: 0,
            frame_errors: 0,
            first_success: 0,
        })
        .collect();
    let (mut delivered, mut used, mut residual) = (0u64, 0u64, 0u64);
    for (se, fe, first) in &per {
        for k in 0..n_rounds {
            rounds[k].symbol_errors += se[k];
            rounds[k].frame_errors += u64::from(fe[k]);
        }
        match first {
            Some(k) => {
                rounds[*k].first_success += 1;
                delivered += 4;
                used += rounds[*k].slots as u64;
            }
            None => {
                residual += 1;
                used += 4;
            }
        }
    }
    Ok(HarqReport {
        config: cfg.clone(),
        snr_db,
        seed,
        rounds,
        throughput: if used > 0 { delivered as f64 / used as f64 } else { 0.0 },
        residual_failures: residual,
    })
}

impl HarqSession {
    /// Sends the next round without waiting for an ACK. Only the Monte
    /// Carlo driver uses this, to score every round on the same draws.
    fn transmit_round_unchecked(&mut self) -> Result<()> {
        let saved = std::mem::take(&mut self.outcomes);
        let k = self
            .cfg
            .stages
            .schedule()
            .iter()
            .position(|r| r.start == self.received.len())
            .expect("rounds remain");
        self.outcomes = vec![Ack::Fail; k];
        let r = self.transmit_round();
        self.outcomes = saved;
        r.map(|_| ())
    }
}

pub const HARQ_CSV_HEADER: &str =
    "round,label,slots,rate,sessions,symbol_errors,ser,frame_errors,fer,first_success,throughput";

/// Writes one CSV row per round. The protocol throughput is repeated on
/// every row.
pub fn write_csv<W: Write>(report: &HarqReport, mut w: W) -> Result<()> {
    writeln!(w, "{HARQ_CSV_HEADER}")?;
    for r in &report.rounds {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6e},{},{:.6e},{},{:.6}",
            r.round,
            r.label,
            r.slots,
            r.rate,
            r.sessions,
            r.symbol_errors,
            r.ser(),
            r.frame_errors,
            r.fer(),
            r.first_success,
            report.throughput
        )?;
    }
    Ok(())
}
