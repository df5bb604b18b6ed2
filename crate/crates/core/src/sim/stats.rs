/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.959964;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// SNR at which a curve crosses `target`, interpolating `log10(FER)`
/// linearly between the bracketing points. Points must be sorted by SNR.
/// `None` if the curve never reaches `target`.
pub fn snr_at(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(s, f)) = points.first() {
        if f <= target {
            return if f == target { Some(s) } else { None };
        }
    }
    for w in points.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 > target && f1 <= target {
            if f1 <= 0.0 {
                // Zero observed errors: fall back to linear FER.
                return Some(s0 + (s1 - s0) * (f0 - target) / (f0 - f1));
            }
            let (l0, l1, lt) = (f0.log10(), f1.log10(), target.log10());
            return Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}

/// Weighted least-squares line `y = a + b x`. Returns `(b, se(b))`.
pub fn weighted_slope(x: &[f64], y: &[f64], var: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 || x.len() != y.len() || y.len() != var.len() {
        return None;
    }
    let w: Vec<f64> = var.iter().map(|v| 1.0 / v).collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let d = sw * sxx - sx * sx;
    if d <= 0.0 {
        return None;
    }
    Some(((sw * sxy - sx * sy) / d, (sw / d).sqrt()))
}

/// Slope of `log10(BER)` against SNR in dB from error counts, weighting each
/// point by the delta-method variance of `log10(p̂)`.
pub fn ber_slope(snr_db: &[f64], errors: &[u64], bits: &[u64]) -> Option<(f64, f64)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut v = Vec::new();
    for ((&s, &e), &n) in snr_db.iter().zip(errors).zip(bits) {
        if e == 0 || n == 0 {
            continue;
        }
        let p = e as f64 / n as f64;
        x.push(s);
        y.push(p.log10());
        v.push((1.0 - p) / (e as f64) / std::f64::consts::LN_10.powi(2));
    }
    weighted_slope(&x, &y, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10/100: (0.0552, 0.1744) to 4 places
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4);
        let (lo, hi) = wilson(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(0.0, 1.0), (2.0, 0.01)];
        assert!((snr_at(&pts, 0.1).unwrap() - 1.0).abs() < 1e-12);
        assert!(snr_at(&[(0.0, 0.5), (1.0, 0.3)], 0.1).is_none());
        assert!(snr_at(&[(0.0, 0.05)], 0.1).is_none());
        assert!((snr_at(&[(0.0, 0.5), (1.0, 0.0)], 0.1).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn slope_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|x| 1.0 - 0.5 * x).collect();
        let (b, se) = weighted_slope(&x, &y, &[1.0; 4]).unwrap();
        assert!((b + 0.5).abs() < 1e-12);
        assert!(se > 0.0);
        assert!(weighted_slope(&[1.0], &[1.0], &[1.0]).is_none());
    }
}
