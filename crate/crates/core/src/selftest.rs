//! Fast oracle checks run by `txdivsim selftest`.

use crate::detect::{mdc_joint_mld, mdc_mld, mld_group, qostbc_mld, LlrMode};
use crate::harq::{ChannelMode, HarqConfig, HarqSession};
use crate::numerics::{CMat, Constellation, Cplx, Modulation, RngStream};
use crate::stbc::{encode, equiv_channel, matched_whiten, stack_real, transmit, GroupSystem, SchemeId};
use crate::turbo::{CodeRate, LlrFrame, TurboCodec, TurboConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rand_h(rng: &mut crate::numerics::SimRng, nr: usize, scale: f64) -> CMat {
    CMat::from_fn(nr, 4, |_, _| rng.gaussian_pair(1.0).expect("unit variance") * scale)
}

fn gram_block_diagonal() -> Check {
    let mut rng = RngStream::new(1, 0).generator();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h = rand_h(&mut rng, 2, 0.5);
        let g = equiv_channel(SchemeId::MdcQostbc, &h, 0.0).expect("valid channel");
        let k = g.real().expect("real form").gram();
        for a in 0..8 {
            for b in 0..8 {
                if a / 2 != b / 2 {
                    worst = worst.max(k[(a, b)].abs());
                }
            }
        }
    }
    check("gram-block-diagonal", worst < 1e-10, format!("max off-block {worst:.2e}"))
}

fn symbolwise_equals_joint() -> Check {
    let mut rng = RngStream::new(2, 0).generator();
    let cons = Constellation::qpsk();
    let mut bad = 0;
    for i in 0..1000 {
        let n0 = [1.0, 0.3, 0.1, 0.03][i % 4];
        let s: Vec<Cplx> = (0..4).map(|_| cons.points()[(rng.uniform() * 4.0) as usize % 4]).collect();
        let h = rand_h(&mut rng, 2, 0.5);
        let mut r = transmit(&encode(SchemeId::MdcQostbc, &s).expect("4 symbols").entries, &h);
        for v in &mut r {
            *v += rng.gaussian_pair(n0).expect("variance");
        }
        let a = mdc_mld(&r, &h, n0, &cons, LlrMode::Exact).map(|d| d.hard_symbols);
        let b = mdc_joint_mld(&r, &h, &cons).map(|d| d.hard_symbols);
        if a.is_err() || a.ok() != b.ok() {
            bad += 1;
        }
    }
    check("symbolwise-equals-joint-mld", bad == 0, format!("{bad}/1000 mismatches"))
}

fn llr_posterior() -> Check {
    let mut rng = RngStream::new(3, 0).generator();
    let cons = Constellation::qpsk();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h = [[rng.standard_normal(), rng.standard_normal()], [rng.standard_normal(), rng.standard_normal()]];
        let sys = GroupSystem { y: [2.0 * rng.standard_normal(), 2.0 * rng.standard_normal()], h };
        let d = mld_group(&sys, &cons, LlrMode::Exact);
        for b in 0..2 {
            let (mut p0, mut p1) = (0.0, 0.0);
            for (i, p) in cons.points().iter().enumerate() {
                let l = (-0.5 * sys.distance([p.re, p.im])).exp();
                if cons.bits_of(i).nth(b) == Some(0) {
                    p0 += l
                } else {
                    p1 += l
                }
            }
            worst = worst.max((d.llrs[b] - (p0 / p1).ln()).abs());
        }
    }
    check("llr-posterior", worst < 1e-9, format!("max |ΔLLR| {worst:.2e}"))
}

fn whitening() -> Check {
    let mut rng = RngStream::new(4, 0).generator();
    let h = rand_h(&mut rng, 2, 0.5);
    let n0 = 0.5;
    let g = equiv_channel(SchemeId::MdcQostbc, &h, n0).expect("valid channel");
    let mut cov = [[0.0f64; 8]; 8];
    let trials = 100_000;
    for _ in 0..trials {
        let noise: Vec<Cplx> = (0..8).map(|_| rng.gaussian_pair(n0).expect("variance")).collect();
        let w = matched_whiten(&g, &stack_real(&noise)).expect("full rank");
        let v: Vec<f64> = w.iter().flat_map(|s| s.y).collect();
        for a in 0..8 {
            for b in 0..8 {
                cov[a][b] += v[a] * v[b] / trials as f64;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (a, row) in cov.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            worst = worst.max((c - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    check("whitened-noise-covariance", worst < 0.02, format!("max |C − I| {worst:.4}"))
}

fn table1() -> Check {
    let mut rng = RngStream::new(5, 0).generator();
    let h = rand_h(&mut rng, 2, 0.5);
    let r = vec![Cplx::new(0.1, -0.2); 8];
    let mut got = Vec::new();
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let c = Constellation::new(m);
        let qo = qostbc_mld(&r, &h, 0.1, &c, LlrMode::Exact).map(|d| d.search_space).unwrap_or(0);
        let mdc = mdc_mld(&r, &h, 0.1, &c, LlrMode::Exact).map(|d| d.search_space).unwrap_or(0);
        let orth = crate::detect::cdd_detect(&r[..2], &[h[(0, 0)], h[(1, 0)]], 0.1, &c, LlrMode::Exact)
            .map(|d| d.search_space)
            .unwrap_or(0);
        got.push((qo, mdc, orth));
    }
    check("table1-counters", got == vec![(16, 4, 2), (256, 16, 4)], format!("{got:?}"))
}

fn turbo_noiseless() -> Check {
    let mut bad = 0;
    for rate in [CodeRate::Half, CodeRate::EightNinths] {
        let codec = TurboCodec::new(TurboConfig::for_rate(rate)).expect("valid codec");
        let mut rng = RngStream::new(6, 0).generator();
        for _ in 0..5 {
            let info = rng.bits(codec.config().block_len);
            let coded = codec.encode(&info).expect("block length");
            let llr: Vec<f64> = coded.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
            let dec = codec.decode(&LlrFrame::new(llr).expect("finite")).expect("length");
            bad += usize::from(dec != info);
        }
    }
    check("turbo-noiseless", bad == 0, format!("{bad}/10 failed"))
}

fn harq_rows() -> Check {
    let cfg = HarqConfig { channel_mode: ChannelMode::Static, ..HarqConfig::default() };
    let mut ok = true;
    for i in 0..100 {
        let s = HarqSession::new(&cfg, 10.0, RngStream::new(7, i)).expect("valid config");
        let full = encode(SchemeId::MdcQostbc, s.symbols()).expect("4 symbols").entries;
        ok &= s.codeword() == &full;
    }
    check("harq-row-stacking", ok, "100 sessions".into())
}

/// Runs every check; all must pass.
pub fn run_all() -> Vec<Check> {
    vec![
        gram_block_diagonal(),
        symbolwise_equals_joint(),
        llr_posterior(),
        whitening(),
        table1(),
        turbo_noiseless(),
        harq_rows(),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_pass() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
