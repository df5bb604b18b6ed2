use super::EquivChannel;
use crate::error::{invalid, Error, Result};
use crate::numerics::cholesky2;

/// One decoupled 2×2 real system `y = H c + v` for the pair `(c_iR, c_iI)`.
/// After whitening `v` has identity covariance (unless the channel was
/// flagged noiseless, in which case no normalisation is applied).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupSystem {
    pub y: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl GroupSystem {
    /// `‖y − H c‖²`.
    pub fn distance(&self, c: [f64; 2]) -> f64 {
        let e0 = self.y[0] - self.h[0][0] * c[0] - self.h[0][1] * c[1];
        let e1 = self.y[1] - self.h[1][0] * c[0] - self.h[1][1] * c[1];
        e0 * e0 + e1 * e1
    }
}

/// Matched filter followed by per-group whitening on the real MDC-QOSTBC
/// equivalent channel.
///
/// With `K = GᵀG` block diagonal, `z = Gᵀ r` splits into four pairs
/// `z_g = K_g c_g + w_g` with `cov(w_g) = (N0/2) K_g`. Writing `K_g = L Lᵀ`,
/// `L⁻¹ z_g = Lᵀ c_g + L⁻¹ w_g` has white noise of variance `N0/2`, which is
/// then normalised to one. A noise variance of zero skips the normalisation.
pub fn matched_whiten(g: &EquivChannel, r: &[f64]) -> Result<[GroupSystem; 4]> {
    let Some(gm) = g.real().filter(|m| m.cols() == 8) else {
        return invalid("matched_whiten needs the 8-column real MDC-QOSTBC channel");
    };
    if r.len() != gm.rows() {
        return invalid(format!("received stack has {} rows, channel {}", r.len(), gm.rows()));
    }
    let z = gm.adjoint_mul_vec(r);
    let k = gm.gram();
    let s = if g.noise_variance > 0.0 {
        (g.noise_variance / 2.0).sqrt()
    } else {
        1.0
    };
    let mut out = [GroupSystem {
        y: [0.0; 2],
        h: [[0.0; 2]; 2],
    }; 4];
    for (grp, sys) in out.iter_mut().enumerate() {
        let (a, b) = (2 * grp, 2 * grp + 1);
        let block = [[k[(a, a)], k[(a, b)]], [k[(b, a)], k[(b, b)]]];
        let l = cholesky2(block).ok_or_else(|| {
            Error::DegenerateChannel(format!("Gram block {grp} is not positive definite"))
        })?;
        let w0 = z[a] / l[0][0];
        let w1 = (z[b] - l[1][0] * w0) / l[1][1];
        sys.y = [w0 / s, w1 / s];
        // Lᵀ
        sys.h = [[l[0][0] / s, l[1][0] / s], [0.0, l[1][1] / s]];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{CMat, RMat, RngStream};
    use crate::stbc::{equiv_channel, EquivForm, SchemeId};

    fn random_channel(nr: usize, seed: u64) -> CMat {
        let mut g = RngStream::new(seed, 3).generator();
        CMat::from_fn(nr, 4, |_, _| g.gaussian_pair(0.25).unwrap())
    }

    #[test]
    fn orthonormal_channel_passes_through() {
        let g = EquivChannel {
            form: EquivForm::Real(RMat::identity(8)),
            noise_variance: 0.0,
        };
        let c = [0.7, -0.7, 0.7, 0.7, -0.7, -0.7, 0.7, -0.7];
        let groups = matched_whiten(&g, &c).unwrap();
        for (i, gs) in groups.iter().enumerate() {
            assert_eq!(gs.h, [[1.0, 0.0], [0.0, 1.0]]);
            assert_eq!(gs.y, [c[2 * i], c[2 * i + 1]]);
        }
    }

    #[test]
    fn noiseless_groups_solve_back_to_symbols() {
        for seed in 0..100 {
            let h = random_channel(2, seed);
            let g = equiv_channel(SchemeId::MdcQostbc, &h, 0.1).unwrap();
            let mut rng = RngStream::new(seed, 9).generator();
            let c: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
            let r = g.real().unwrap().mul_vec(&c);
            let groups = matched_whiten(&g, &r).unwrap();
            for (i, gs) in groups.iter().enumerate() {
                let hm = RMat::from_rows(&gs.h);
                let sol = hm.solve(&gs.y).unwrap();
                assert!((sol[0] - c[2 * i]).abs() < 1e-8);
                assert!((sol[1] - c[2 * i + 1]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn whitened_noise_is_white() {
        let n0 = 0.3;
        let h = random_channel(2, 77);
        let g = equiv_channel(SchemeId::MdcQostbc, &h, n0).unwrap();
        let gm = g.real().unwrap().clone();
        let mut rng = RngStream::new(5, 5).generator();
        let trials = 100_000;
        let mut cov = [[[0.0f64; 2]; 2]; 4];
        let c = [0.7; 8];
        let clean = gm.mul_vec(&c);
        for _ in 0..trials {
            let r: Vec<f64> = clean
                .iter()
                .map(|v| v + (n0 / 2.0).sqrt() * rng.standard_normal())
                .collect();
            for (grp, gs) in matched_whiten(&g, &r).unwrap().iter().enumerate() {
                let cg = [c[2 * grp], c[2 * grp + 1]];
                let e = [
                    gs.y[0] - gs.h[0][0] * cg[0] - gs.h[0][1] * cg[1],
                    gs.y[1] - gs.h[1][0] * cg[0] - gs.h[1][1] * cg[1],
                ];
                for i in 0..2 {
                    for j in 0..2 {
                        cov[grp][i][j] += e[i] * e[j];
                    }
                }
            }
        }
        for grp in cov {
            for i in 0..2 {
                for j in 0..2 {
                    let v = grp[i][j] / trials as f64;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 0.02, "cov[{i}][{j}] = {v}");
                }
            }
        }
    }

    #[test]
    fn zero_channel_is_degenerate() {
        let g = equiv_channel(SchemeId::MdcQostbc, &CMat::zeros(2, 4), 1.0).unwrap();
        let err = matched_whiten(&g, &[0.0; 16]).unwrap_err();
        assert!(matches!(err, Error::DegenerateChannel(_)));
    }

    #[test]
    fn wrong_form_rejected() {
        let g = equiv_channel(SchemeId::Qostbc, &CMat::zeros(1, 4), 1.0).unwrap();
        assert!(matched_whiten(&g, &[0.0; 8]).is_err());
    }
}
