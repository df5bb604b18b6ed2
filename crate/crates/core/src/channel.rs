//! Block-fading frequency-selective Rayleigh channel and AWGN.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{delay_phase, CMat, Cplx, SimRng};

/// Delay taps must stay inside the cyclic-prefix-equivalent span.
pub const MAX_TAP_SPAN: usize = 128;

/// 512 subcarriers at 15 kHz.
pub const DEFAULT_SAMPLE_RATE: f64 = 7.68e6;

const TU6_TABLE: &str = include_str!("../data/tu6.txt");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapProfile {
    pub delays_s: Vec<f64>,
    pub powers_db: Vec<f64>,
    pub sample_rate: f64,
}

impl TapProfile {
    pub fn tu6() -> Self {
        Self::from_table(TU6_TABLE, DEFAULT_SAMPLE_RATE).expect("bundled TU6 table parses")
    }

    pub fn flat() -> Self {
        Self {
            delays_s: vec![0.0],
            powers_db: vec![0.0],
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }

    /// Parses `delay_us power_db` lines; `#` starts a comment.
    pub fn from_table(text: &str, sample_rate: f64) -> Result<Self> {
        let mut delays_s = Vec::new();
        let mut powers_db = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |v: Option<&str>| -> Result<f64> {
                v.and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Config(format!("profile line {}: '{line}'", no + 1)))
            };
            delays_s.push(parse(it.next())? * 1e-6);
            powers_db.push(parse(it.next())?);
            if it.next().is_some() {
                return Err(Error::Config(format!("profile line {}: extra columns", no + 1)));
            }
        }
        let p = Self {
            delays_s,
            powers_db,
            sample_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays_s.is_empty() || self.delays_s.len() != self.powers_db.len() {
            return Err(Error::Config("profile needs matching, non-empty delay and power lists".into()));
        }
        if self.delays_s.iter().any(|d| !(*d >= 0.0)) || self.delays_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tap delays must be non-negative and increasing".into()));
        }
        if !(self.sample_rate > 0.0) || self.powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("bad sample rate or tap power".into()));
        }
        Ok(())
    }

    /// Linear tap powers normalised to unit sum.
    pub fn linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.iter().map(|p| p / total).collect()
    }

    /// Tap delays rounded to the nearest sample.
    pub fn tap_samples(&self) -> Vec<usize> {
        self.delays_s
            .iter()
            .map(|d| (d * self.sample_rate).round() as usize)
            .collect()
    }
}

/// Profile selector: `tu6`, `flat` or `file:<path>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ChannelSpec {
    Tu6,
    Flat,
    File(PathBuf),
}

impl ChannelSpec {
    pub fn profile(&self) -> Result<TapProfile> {
        match self {
            ChannelSpec::Tu6 => Ok(TapProfile::tu6()),
            ChannelSpec::Flat => Ok(TapProfile::flat()),
            ChannelSpec::File(p) => TapProfile::from_table(&std::fs::read_to_string(p)?, DEFAULT_SAMPLE_RATE),
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Tu6 => f.write_str("tu6"),
            ChannelSpec::Flat => f.write_str("flat"),
            ChannelSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tu6" => Ok(ChannelSpec::Tu6),
            "flat" => Ok(ChannelSpec::Flat),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(ChannelSpec::File(p.into())),
                _ => invalid(format!("unknown channel '{s}' (tu6|flat|file:<path>)")),
            },
        }
    }
}

impl TryFrom<String> for ChannelSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ChannelSpec> for String {
    fn from(c: ChannelSpec) -> String {
        c.to_string()
    }
}

/// One block-fading draw for every (tx, rx) antenna pair.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    nt: usize,
    nr: usize,
    n_fft: usize,
    tap_samples: Vec<usize>,
    taps: Vec<Cplx>,
    freq: Vec<Cplx>,
}

impl ChannelRealization {
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn tap_samples(&self) -> &[usize] {
        &self.tap_samples
    }

    pub fn taps(&self, tx: usize, rx: usize) -> &[Cplx] {
        let n = self.tap_samples.len();
        let i = tx * self.nr + rx;
        &self.taps[i * n..(i + 1) * n]
    }

    pub fn response(&self, tx: usize, rx: usize) -> &[Cplx] {
        let i = tx * self.nr + rx;
        &self.freq[i * self.n_fft..(i + 1) * self.n_fft]
    }

    /// `Nr × Nt` channel matrix on subcarrier `k`.
    pub fn subcarrier(&self, k: usize) -> CMat {
        CMat::from_fn(self.nr, self.nt, |rx, tx| self.response(tx, rx)[k])
    }
}

/// Draws independent complex Gaussian taps (variance = normalised tap power)
/// for every antenna pair and computes their frequency responses.
pub fn draw_channel(
    profile: &TapProfile,
    nt: usize,
    nr: usize,
    n_fft: usize,
    rng: &mut SimRng,
) -> Result<ChannelRealization> {
    profile.validate()?;
    let powers = profile.linear_powers();
    let tap_samples = profile.tap_samples();
    let mut taps = Vec::with_capacity(nt * nr * powers.len());
    let mut freq = Vec::with_capacity(nt * nr * n_fft);
    for _tx in 0..nt {
        for _rx in 0..nr {
            let start = taps.len();
            for &p in &powers {
                taps.push(rng.gaussian_pair(p)?);
            }
            freq.extend(freq_response(&tap_samples, &taps[start..], n_fft)?);
        }
    }
    Ok(ChannelRealization {
        nt,
        nr,
        n_fft,
        tap_samples,
        taps,
        freq,
    })
}

/// `H(k) = Σ_t g_t e^{-j2πk d_t/N}` for sample-spaced taps.
pub fn freq_response(tap_samples: &[usize], gains: &[Cplx], n_fft: usize) -> Result<Vec<Cplx>> {
    if tap_samples.len() != gains.len() {
        return invalid("tap delay and gain counts differ");
    }
    let span = MAX_TAP_SPAN.min(n_fft);
    if let Some(d) = tap_samples.iter().find(|&&d| d >= span) {
        return Err(Error::Config(format!(
            "tap delay {d} samples exceeds the {span}-sample span"
        )));
    }
    Ok((0..n_fft)
        .map(|k| {
            tap_samples
                .iter()
                .zip(gains)
                .map(|(&d, &g)| g * delay_phase(k, d, n_fft))
                .sum()
        })
        .collect())
}

/// Noise variance per complex sample for unit-energy symbols.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Adds complex AWGN at `snr_db` (Es/N0 with Es = 1). `+∞` leaves the
/// signal untouched.
pub fn add_awgn(signal: &mut [Cplx], snr_db: f64, rng: &mut SimRng) -> Result<()> {
    if snr_db.is_nan() {
        return invalid("SNR is NaN");
    }
    if snr_db == f64::INFINITY {
        return Ok(());
    }
    let n0 = noise_variance(snr_db);
    for s in signal.iter_mut() {
        *s += rng.gaussian_pair(n0)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cplx, dft, RngStream};

    #[test]
    fn tu6_table_values() {
        let p = TapProfile::tu6();
        assert_eq!(p.tap_samples(), vec![0, 2, 4, 12, 18, 38]);
        let total: f64 = p.linear_powers().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(p.powers_db, vec![-3.0, 0.0, -2.0, -6.0, -8.0, -10.0]);
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(TapProfile::from_table("0.0 0\n0.0 -3\n", 1e6).is_err());
        assert!(TapProfile::from_table("0.0\n", 1e6).is_err());
        assert!(TapProfile::from_table("# only comments\n", 1e6).is_err());
        assert!(TapProfile::from_table("0 0 7\n", 1e6).is_err());
    }

    #[test]
    fn channel_spec_parsing() {
        assert_eq!("tu6".parse::<ChannelSpec>().unwrap(), ChannelSpec::Tu6);
        assert_eq!(
            "file:/tmp/x.txt".parse::<ChannelSpec>().unwrap(),
            ChannelSpec::File("/tmp/x.txt".into())
        );
        assert!("file:".parse::<ChannelSpec>().is_err());
        assert!("ray".parse::<ChannelSpec>().is_err());
    }

    #[test]
    fn impulse_responses() {
        let h = freq_response(&[0], &[cplx(1., 0.)], 16).unwrap();
        assert!(h.iter().all(|v| (v - cplx(1., 0.)).norm() < 1e-15));
        let h = freq_response(&[1], &[cplx(1., 0.)], 4).unwrap();
        let want = [cplx(1., 0.), cplx(0., -1.), cplx(-1., 0.), cplx(0., 1.)];
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(matches!(
            freq_response(&[128], &[cplx(1., 0.)], 512),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn response_matches_dft_of_tap_vector() {
        let mut rng = RngStream::new(1, 1).generator();
        let ch = draw_channel(&TapProfile::tu6(), 4, 2, 512, &mut rng).unwrap();
        for tx in 0..4 {
            for rx in 0..2 {
                let mut v = vec![Cplx::new(0., 0.); 512];
                for (&d, &g) in ch.tap_samples().iter().zip(ch.taps(tx, rx)) {
                    v[d] += g;
                }
                let f = dft(&v, false).unwrap();
                for (k, h) in ch.response(tx, rx).iter().enumerate() {
                    assert!((h - f[k] * (512f64).sqrt()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn single_tap_is_flat() {
        let mut rng = RngStream::new(2, 0).generator();
        let ch = draw_channel(&TapProfile::flat(), 1, 1, 64, &mut rng).unwrap();
        let m0 = ch.response(0, 0)[0].norm();
        assert!(ch.response(0, 0).iter().all(|v| (v.norm() - m0).abs() < 1e-12));
    }

    #[test]
    fn two_equal_taps_alternate() {
        let n = 64;
        let g = [cplx(0.8, 0.1), cplx(-0.3, 0.4)];
        let h = freq_response(&[0, n / 2], &g, n).unwrap();
        for (k, v) in h.iter().enumerate() {
            let want = if k % 2 == 0 { g[0] + g[1] } else { g[0] - g[1] };
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn tap_power_normalisation() {
        let p = TapProfile::tu6();
        let mut rng = RngStream::new(3, 0).generator();
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            acc += p
                .linear_powers()
                .iter()
                .map(|&pw| rng.gaussian_pair(pw).unwrap().norm_sqr())
                .sum::<f64>();
        }
        assert!((acc / trials as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn parseval_over_subcarriers() {
        let p = TapProfile::tu6();
        let mut rng = RngStream::new(4, 0).generator();
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let ch = draw_channel(&p, 1, 1, 512, &mut rng).unwrap();
            acc += ch.response(0, 0).iter().map(|v| v.norm_sqr()).sum::<f64>() / 512.0;
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn rayleigh_marginal_ks() {
        // |g|²/p ~ Exp(1); KS critical value at 1% is 1.628/√n.
        let p = TapProfile::tu6();
        let powers = p.linear_powers();
        let mut rng = RngStream::new(5, 0).generator();
        let n = 100_000;
        let mut x: Vec<f64> = (0..n)
            .map(|_| rng.gaussian_pair(powers[3]).unwrap().norm_sqr() / powers[3])
            .collect();
        x.sort_by(f64::total_cmp);
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = 1.0 - (-v).exp();
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS D = {d}");
    }

    #[test]
    fn antenna_pairs_independent() {
        let p = TapProfile::tu6();
        let mut rng = RngStream::new(6, 0).generator();
        let trials = 100_000;
        let (mut cross, mut pa, mut pb) = (Cplx::new(0., 0.), 0.0, 0.0);
        for _ in 0..trials {
            let ch = draw_channel(&p, 2, 2, 64, &mut rng).unwrap();
            let a = ch.taps(0, 0)[1];
            let b = ch.taps(1, 1)[1];
            cross += a * b.conj();
            pa += a.norm_sqr();
            pb += b.norm_sqr();
        }
        let rho = cross.norm() / (pa * pb).sqrt();
        assert!(rho < 0.01, "{rho}");
    }

    #[test]
    fn frequency_correlation_decays() {
        let p = TapProfile::tu6();
        let mut rng = RngStream::new(7, 0).generator();
        let lags = [0usize, 2, 4, 6, 8];
        let mut corr = [Cplx::new(0., 0.); 5];
        for _ in 0..2_000 {
            let ch = draw_channel(&p, 1, 1, 512, &mut rng).unwrap();
            let h = ch.response(0, 0);
            for (i, &l) in lags.iter().enumerate() {
                for k in 0..512 - l {
                    corr[i] += h[k] * h[k + l].conj();
                }
            }
        }
        let mags: Vec<f64> = corr.iter().zip(lags).map(|(c, l)| c.norm() / (512 - l) as f64).collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");
    }

    #[test]
    fn awgn_power_and_determinism() {
        let mut rng = RngStream::new(8, 0).generator();
        let mut sig = vec![Cplx::new(0., 0.); 1_000_000];
        add_awgn(&mut sig, 0.0, &mut rng).unwrap();
        let p = sig.iter().map(|v| v.norm_sqr()).sum::<f64>() / sig.len() as f64;
        assert!((p - 1.0).abs() < 0.01);

        let mut clean = vec![cplx(1., -1.); 8];
        add_awgn(&mut clean, f64::INFINITY, &mut rng).unwrap();
        assert!(clean.iter().all(|v| *v == cplx(1., -1.)));

        let run = || {
            let mut r = RngStream::new(42, 1).generator();
            let mut s = vec![cplx(0.5, 0.5); 32];
            add_awgn(&mut s, 7.0, &mut r).unwrap();
            s
        };
        assert_eq!(run(), run());
    }
}
