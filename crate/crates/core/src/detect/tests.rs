use super::*;
use crate::numerics::{CMat, Modulation, RngStream, SimRng};
use crate::stbc::{
    conjugation_pattern, encode, equiv_channel, stack_complex, transmit, GroupSystem, SchemeId,
};

fn c(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}

fn random_symbols(g: &mut SimRng, cons: &Constellation, n: usize) -> Vec<Cplx> {
    (0..n)
        .map(|_| cons.points()[(g.uniform() * cons.order() as f64) as usize % cons.order()])
        .collect()
}

fn random_h(g: &mut SimRng, nr: usize, nt: usize, scale: f64) -> CMat {
    CMat::from_fn(nr, nt, |_, _| g.gaussian_pair(1.0).unwrap() * scale)
}

fn add_noise(g: &mut SimRng, r: &mut [Cplx], n0: f64) {
    for v in r.iter_mut() {
        *v += g.gaussian_pair(n0).unwrap();
    }
}

#[test]
fn group_hard_decision() {
    let cons = Constellation::qpsk().scaled(2f64.sqrt());
    let sys = GroupSystem { y: [2.0, 0.5], h: [[1.0, 0.0], [0.0, 1.0]] };
    let d = mld_group(&sys, &cons, LlrMode::Exact);
    assert!((d.hard[0] - 1.0).abs() < 1e-12 && (d.hard[1] - 1.0).abs() < 1e-12);
    assert_eq!(d.hypotheses, 4);
}

#[test]
fn group_llr_hand_value() {
    let cons = Constellation::qpsk().scaled(2f64.sqrt());
    let sys = GroupSystem { y: [2.0, 0.0], h: [[1.0, 0.0], [0.0, 1.0]] };
    let d = mld_group(&sys, &cons, LlrMode::Exact);
    let expect = ((-1f64).exp() * 2.0 / ((-5f64).exp() * 2.0)).ln();
    assert!((d.llrs[0] - expect).abs() < 1e-12);
    assert!((d.llrs[0] - 4.0).abs() < 1e-12);
    assert!(d.llrs[1].abs() < 1e-12);
}

#[test]
fn group_llr_matches_posterior_enumeration() {
    let mut g = RngStream::new(11, 0).generator();
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let cons = Constellation::new(m);
        for _ in 0..200 {
            let h = [
                [g.standard_normal(), g.standard_normal()],
                [g.standard_normal(), g.standard_normal()],
            ];
            let sys = GroupSystem { y: [g.standard_normal() * 2.0, g.standard_normal() * 2.0], h };
            let d = mld_group(&sys, &cons, LlrMode::Exact);
            let nb = cons.bits_per_symbol();
            for b in 0..nb {
                let (mut p0, mut p1) = (0.0, 0.0);
                for (idx, p) in cons.points().iter().enumerate() {
                    let e0 = sys.y[0] - h[0][0] * p.re - h[0][1] * p.im;
                    let e1 = sys.y[1] - h[1][0] * p.re - h[1][1] * p.im;
                    let like = (-(e0 * e0 + e1 * e1) / 2.0).exp();
                    let bit = cons.bits_of(idx).nth(b).unwrap();
                    if bit == 0 {
                        p0 += like;
                    } else {
                        p1 += like;
                    }
                }
                if p0 > 1e-250 && p1 > 1e-250 {
                    assert!((d.llrs[b] - (p0 / p1).ln()).abs() < 1e-8);
                }
            }
        }
    }
}

// max ≤ logsumexp ≤ max + ln n over the n = M/2 hypotheses on each side,
// so the two LLRs differ by at most ln(M/2) and must agree in sign beyond it.
#[test]
fn maxlog_within_bound_of_exact() {
    let mut g = RngStream::new(12, 0).generator();
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let cons = Constellation::new(m);
        let bound = (cons.order() as f64 / 2.0).ln();
        for snr_db in [-5.0, 0.0, 5.0, 10.0, 15.0] {
            let amp = 10f64.powf(snr_db / 20.0);
            for _ in 0..2000 {
                let h = [
                    [amp * g.standard_normal(), amp * g.standard_normal()],
                    [amp * g.standard_normal(), amp * g.standard_normal()],
                ];
                let p = cons.points()[(g.uniform() * cons.order() as f64) as usize % cons.order()];
                let y = [
                    h[0][0] * p.re + h[0][1] * p.im + g.standard_normal(),
                    h[1][0] * p.re + h[1][1] * p.im + g.standard_normal(),
                ];
                let sys = GroupSystem { y, h };
                let e = mld_group(&sys, &cons, LlrMode::Exact);
                let x = mld_group(&sys, &cons, LlrMode::MaxLog);
                assert_eq!(e.hard, x.hard);
                for (a, b) in e.llrs.iter().zip(&x.llrs) {
                    if a.abs() < LLR_LIMIT {
                        assert!((a - b).abs() <= bound + 1e-9);
                    }
                    if a.abs() > bound {
                        assert_eq!(a.signum(), b.signum());
                    }
                }
            }
        }
    }
}

fn mdc_instance(g: &mut SimRng, cons: &Constellation, nr: usize, n0: f64) -> (Vec<Cplx>, CMat, Vec<Cplx>) {
    let s = random_symbols(g, cons, 4);
    let h = random_h(g, nr, 4, SchemeId::MdcQostbc.power_scale());
    let cw = encode(SchemeId::MdcQostbc, &s).unwrap();
    let mut r = transmit(&cw.entries, &h);
    add_noise(g, &mut r, n0);
    (s, h, r)
}

#[test]
fn mdc_noiseless_round_trip() {
    let mut g = RngStream::new(13, 0).generator();
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let cons = Constellation::new(m);
        for _ in 0..100 {
            let (s, h, r) = mdc_instance(&mut g, &cons, 2, 0.0);
            let d = mdc_mld(&r, &h, 0.0, &cons, LlrMode::Exact).unwrap();
            assert_eq!(d.hard_symbols, s);
            assert_eq!(d.hypotheses_evaluated, 4 * cons.order());
            assert_eq!(d.llrs.len(), 4 * cons.bits_per_symbol());
        }
    }
}

#[test]
fn mdc_symbolwise_equals_joint_mld() {
    let mut g = RngStream::new(14, 0).generator();
    let cons = Constellation::qpsk();
    let mut disagreements = 0;
    let mut errors = 0;
    for snr_db in [0.0, 5.0, 10.0, 15.0] {
        let n0 = 10f64.powf(-snr_db / 10.0);
        for _ in 0..300 {
            let (s, h, r) = mdc_instance(&mut g, &cons, 2, n0);
            let sym = mdc_mld(&r, &h, n0, &cons, LlrMode::Exact).unwrap();
            let joint = mdc_joint_mld(&r, &h, &cons).unwrap();
            assert_eq!(joint.hypotheses_evaluated, 256);
            if sym.hard_symbols != joint.hard_symbols {
                disagreements += 1;
            }
            if sym.hard_symbols != s {
                errors += 1;
            }
        }
    }
    assert_eq!(disagreements, 0);
    assert!(errors > 0, "test must exercise noisy decisions");
}

#[test]
fn mdc_symbolwise_equals_joint_mld_16qam() {
    let mut g = RngStream::new(15, 0).generator();
    let cons = Constellation::qam16();
    for _ in 0..20 {
        let (_, h, r) = mdc_instance(&mut g, &cons, 2, 0.05);
        let sym = mdc_mld(&r, &h, 0.05, &cons, LlrMode::Exact).unwrap();
        let joint = mdc_joint_mld(&r, &h, &cons).unwrap();
        assert_eq!(sym.hard_symbols, joint.hard_symbols);
    }
}

#[test]
fn mdc_degenerate_channel() {
    let cons = Constellation::qpsk();
    let h = CMat::zeros(2, 4);
    let r = vec![c(0.0, 0.0); 8];
    assert!(matches!(
        mdc_mld(&r, &h, 0.1, &cons, LlrMode::Exact),
        Err(Error::DegenerateChannel(_))
    ));
}

fn qostbc_joint_oracle(r: &[Cplx], h: &CMat, cons: &Constellation) -> Vec<Cplx> {
    let pts = cons.points();
    let m = pts.len();
    let mut best = (f64::INFINITY, vec![]);
    for i in 0..m.pow(4) {
        let s: Vec<Cplx> = (0..4).map(|k| pts[(i / m.pow(k)) % m]).collect();
        let y = transmit(&encode(SchemeId::Qostbc, &s).unwrap().entries, h);
        let d: f64 = y.iter().zip(r).map(|(a, b)| (a - b).norm_sqr()).sum();
        if d < best.0 {
            best = (d, s);
        }
    }
    best.1
}

#[test]
fn qostbc_pairwise_equals_joint() {
    let mut g = RngStream::new(16, 0).generator();
    let cons = Constellation::qpsk();
    for n0 in [0.0, 0.1, 0.5] {
        for _ in 0..100 {
            let s = random_symbols(&mut g, &cons, 4);
            let h = random_h(&mut g, 2, 4, 0.5);
            let mut r = transmit(&encode(SchemeId::Qostbc, &s).unwrap().entries, &h);
            add_noise(&mut g, &mut r, n0);
            let d = qostbc_mld(&r, &h, n0, &cons, LlrMode::Exact).unwrap();
            assert_eq!(d.hard_symbols, qostbc_joint_oracle(&r, &h, &cons));
            assert_eq!(d.search_space, 16);
            if n0 == 0.0 {
                assert_eq!(d.hard_symbols, s);
            }
        }
    }
}

#[test]
fn search_space_table_matches_detectors() {
    for (m, want) in [(Modulation::Qpsk, [2, 2, 16, 4]), (Modulation::Qam16, [4, 4, 256, 16])] {
        let got: Vec<usize> = SchemeId::ALL.iter().map(|&s| search_space(s, m)).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn table1_counters() {
    let mut g = RngStream::new(17, 0).generator();
    for (m, qo, mdc, orth) in [(Modulation::Qpsk, 16, 4, 2), (Modulation::Qam16, 256, 16, 4)] {
        let cons = Constellation::new(m);
        let h4 = random_h(&mut g, 2, 4, 0.5);
        let r8 = vec![c(0.1, 0.2); 8];
        let r4 = vec![c(0.1, 0.2); 4];
        let r2 = vec![c(0.1, 0.2); 2];
        assert_eq!(qostbc_mld(&r8, &h4, 0.1, &cons, LlrMode::Exact).unwrap().search_space, qo);
        assert_eq!(mdc_mld(&r8, &h4, 0.1, &cons, LlrMode::Exact).unwrap().search_space, mdc);
        let ga = [(c(1.0, 0.0), c(0.5, 0.0)), (c(0.2, 0.1), c(0.0, 1.0))];
        assert_eq!(alamouti_detect(&r4, &ga, 0.1, &cons, LlrMode::Exact).unwrap().search_space, orth);
        let hc = [c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(cdd_detect(&r2, &hc, 0.1, &cons, LlrMode::Exact).unwrap().search_space, orth);
    }
}

#[test]
fn alamouti_noiseless_and_gain() {
    let cons = Constellation::qpsk();
    let s = [cons.points()[1], cons.points()[2]];
    let cw = crate::stbc::alamouti_codeword(s[0], s[1]);
    let h = CMat::from_rows(&[[c(1.0, 0.0), c(0.0, 0.0)]]);
    let r = transmit(&cw, &h);
    let d = alamouti_detect(&r, &[(c(1.0, 0.0), c(0.0, 0.0))], 0.0, &cons, LlrMode::Exact).unwrap();
    assert_eq!(d.hard_symbols, s.to_vec());

    // Combined gain: with the symbol scaled out, combiner output equals γ·s.
    let mut g = RngStream::new(18, 0).generator();
    for _ in 0..100 {
        let h = random_h(&mut g, 2, 2, 1.0);
        let r = transmit(&crate::stbc::alamouti_codeword(s[0], s[1]), &h);
        let gains: Vec<_> = (0..2).map(|rx| (h[(rx, 0)], h[(rx, 1)])).collect();
        let gamma: f64 = gains.iter().map(|(a, b)| a.norm_sqr() + b.norm_sqr()).sum();
        // LLR of QPSK = 4·a·γ·Re(s)/N0 ⇒ recover γ from the first LLR
        let n0 = 0.3;
        let d = alamouti_detect(&r, &gains, n0, &cons, LlrMode::Exact).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let expect = 4.0 * a * gamma * s[0].re / n0;
        assert!((d.llrs[0] - expect).abs() < 1e-9 * expect.abs().max(1.0));
    }
}

#[test]
fn alamouti_zero_channel() {
    let cons = Constellation::qpsk();
    let r = vec![c(0.0, 0.0); 2];
    assert!(matches!(
        alamouti_detect(&r, &[(c(0.0, 0.0), c(0.0, 0.0))], 0.1, &cons, LlrMode::Exact),
        Err(Error::DegenerateChannel(_))
    ));
}

#[test]
fn cdd_cases() {
    let cons = Constellation::qpsk();
    let s = cons.points()[3];
    let d = cdd_detect(&[s], &[c(1.0, 0.0)], 0.0, &cons, LlrMode::Exact).unwrap();
    assert_eq!(d.hard_symbols, vec![s]);

    let zero = cdd_detect(&[c(0.3, 0.1)], &[c(0.0, 0.0)], 0.1, &cons, LlrMode::Exact).unwrap();
    assert_eq!(zero.llrs, vec![0.0, 0.0]);

    // MRC with (1,1) doubles post-combining SNR: the LLR doubles.
    let y = c(0.4, -0.2);
    let one = cdd_detect(&[y], &[c(1.0, 0.0)], 0.5, &cons, LlrMode::Exact).unwrap();
    let two = cdd_detect(&[y, y], &[c(1.0, 0.0), c(1.0, 0.0)], 0.5, &cons, LlrMode::Exact).unwrap();
    for (a, b) in one.llrs.iter().zip(&two.llrs) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
}

#[test]
fn qpsk_llr_closed_form() {
    let cons = Constellation::qpsk();
    let mut g = RngStream::new(19, 0).generator();
    let a = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..100 {
        let h = g.gaussian_pair(1.0).unwrap();
        let y = g.gaussian_pair(1.0).unwrap();
        let n0 = 0.7;
        let d = cdd_detect(&[y], &[h], n0, &cons, LlrMode::Exact).unwrap();
        let hy = h.conj() * y;
        assert!((d.llrs[0] - 4.0 * a * hy.re / n0).abs() < 1e-9);
        assert!((d.llrs[1] - 4.0 * a * hy.im / n0).abs() < 1e-9);
    }
}

#[test]
fn lmmse_scalar_and_zf_limit() {
    let g = CMat::identity(1);
    let s = lmmse_equalize(&[c(1.0, -2.0)], &g, 1.0).unwrap();
    assert!((s[0].biased - c(0.5, -1.0)).norm() < 1e-12);
    assert!((s[0].gain - 0.5).abs() < 1e-12);
    assert!((s[0].estimate - c(1.0, -2.0)).norm() < 1e-12);

    let mut rng = RngStream::new(20, 0).generator();
    let gm = random_h(&mut rng, 4, 4, 1.0);
    let x: Vec<Cplx> = (0..4).map(|_| rng.gaussian_pair(1.0).unwrap()).collect();
    let r = gm.mul_vec(&x);
    let s = lmmse_equalize(&r, &gm, 0.0).unwrap();
    for (a, b) in s.iter().zip(&x) {
        assert!((a.biased - b).norm() < 1e-9);
    }
    let near = lmmse_equalize(&r, &gm, 1e-10).unwrap();
    for (a, b) in near.iter().zip(&x) {
        assert!((a.biased - b).norm() < 1e-6);
    }
}

#[test]
fn lmmse_qostbc_noiseless() {
    let mut g = RngStream::new(21, 0).generator();
    let cons = Constellation::qpsk();
    for _ in 0..50 {
        let s = random_symbols(&mut g, &cons, 4);
        let h = random_h(&mut g, 2, 4, 0.5);
        let r = transmit(&encode(SchemeId::Qostbc, &s).unwrap().entries, &h);
        let eq = equiv_channel(SchemeId::Qostbc, &h, 1e-9).unwrap();
        let y = stack_complex(&r, 2, conjugation_pattern(SchemeId::Qostbc));
        let d = lmmse_detect(&y, &eq, &cons, LlrMode::Exact).unwrap();
        assert_eq!(d.hard_symbols, s);
    }
}

#[test]
fn lmmse_mdc_noiseless() {
    let mut g = RngStream::new(22, 0).generator();
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let cons = Constellation::new(m);
        for _ in 0..50 {
            let (s, h, r) = mdc_instance(&mut g, &cons, 2, 0.0);
            let d = mdc_lmmse_detect(&r, &h, 1e-9, &cons, LlrMode::Exact).unwrap();
            assert_eq!(d.hard_symbols, s);
            // LLR signs agree with the transmitted bits
            let idx: Vec<usize> = s.iter().map(|p| cons.nearest(*p)).collect();
            let bits: Vec<u8> = idx.iter().flat_map(|&i| cons.bits_of(i)).collect();
            for (l, b) in d.llrs.iter().zip(bits) {
                assert_eq!(*l > 0.0, b == 0);
            }
        }
    }
}

#[test]
fn detector_kind_names() {
    for k in [DetectorKind::Mld, DetectorKind::Lmmse, DetectorKind::MaxLogMld] {
        assert_eq!(k.to_string().parse::<DetectorKind>().unwrap(), k);
    }
    assert!("zf".parse::<DetectorKind>().is_err());
    assert_eq!(DetectorKind::MaxLogMld.llr_mode(), LlrMode::MaxLog);
}
