use super::trellis::Trellis;

const NEG_INF: f64 = -1e300;

/// Max-Log-MAP (max-approximated BCJR) pass over a terminated trellis.
///
/// `sys`, `par` hold channel LLRs for every step including the tail;
/// `apriori` covers the information steps only. LLRs follow the
/// `log P(0)/P(1)` convention. Returns a-posteriori LLRs of the information
/// steps.
pub(crate) fn max_log_map(trellis: &Trellis, sys: &[f64], par: &[f64], apriori: &[f64]) -> Vec<f64> {
    let steps = sys.len();
    let k = apriori.len();
    let ns = trellis.states();
    debug_assert_eq!(par.len(), steps);

    // gamma for input u: ½ (Ls + La)(1 − 2u) + ½ Lp (1 − 2p)
    let gamma = |t: usize, s: usize, u: u8| -> f64 {
        let la = if t < k { apriori[t] } else { 0.0 };
        let su = if u == 0 { 0.5 } else { -0.5 };
        let sp = if trellis.parity(s, u) == 0 { 0.5 } else { -0.5 };
        su * (sys[t] + la) + sp * par[t]
    };

    let mut alpha = vec![NEG_INF; (steps + 1) * ns];
    alpha[0] = 0.0;
    for t in 0..steps {
        let (cur, nxt) = alpha.split_at_mut((t + 1) * ns);
        let cur = &cur[t * ns..];
        let nxt = &mut nxt[..ns];
        for s in 0..ns {
            if cur[s] <= NEG_INF {
                continue;
            }
            for u in 0..2u8 {
                let m = cur[s] + gamma(t, s, u);
                let n = trellis.next(s, u);
                if m > nxt[n] {
                    nxt[n] = m;
                }
            }
        }
        let mx = nxt.iter().cloned().fold(NEG_INF, f64::max);
        nxt.iter_mut().for_each(|v| *v -= mx);
    }

    let mut beta = vec![NEG_INF; ns];
    beta[0] = 0.0;
    let mut out = vec![0.0; k];
    let mut prev = vec![NEG_INF; ns];
    for t in (0..steps).rev() {
        let a = &alpha[t * ns..(t + 1) * ns];
        let mut best = [NEG_INF; 2];
        for s in 0..ns {
            let mut b = NEG_INF;
            for u in 0..2u8 {
                let g = gamma(t, s, u);
                let n = trellis.next(s, u);
                let m = g + beta[n];
                b = b.max(m);
                if t < k && a[s] > NEG_INF {
                    best[u as usize] = best[u as usize].max(a[s] + m);
                }
            }
            prev[s] = b;
        }
        let mx = prev.iter().cloned().fold(NEG_INF, f64::max);
        for (b, p) in beta.iter_mut().zip(&prev) {
            *b = p - mx;
        }
        if t < k {
            out[t] = best[0] - best[1];
        }
    }
    out
}
