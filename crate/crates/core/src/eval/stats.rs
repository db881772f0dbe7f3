//! Pearson and Kendall correlation.

use crate::error::{Error, Result};

fn check_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::NotComputable(format!("{} pairs; at least 3 are needed", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NotComputable("non-finite observation".into()));
    }
    Ok(())
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pairs(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::NotComputable("constant sequence".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Number of pairs tied within runs of equal values of a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        prev = Some(v);
    }
    total + run * (run + 1) / 2
}

/// Sorts `v` by merge sort and returns the number of inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Tie-corrected Kendall rank correlation (tau-b), O(n log n).
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pairs(x, y)?;
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    // partial_cmp keeps -0.0 and 0.0 tied, matching the equality used for
    // tie counting; NaN was rejected above
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));

    let n0 = n * (n - 1) / 2;
    let ties_x = tied_pairs(pairs.iter().map(|p| p.0));
    let ties_xy = tied_pairs(pairs.iter().copied());

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let discordant = merge_count(&mut ys, &mut buf);
    let ties_y = tied_pairs(ys.iter().copied());

    let denom = ((n0 - ties_x) as f64) * ((n0 - ties_y) as f64);
    if denom == 0.0 {
        return Err(Error::NotComputable("every pair is tied in one sequence".into()));
    }
    let numer = n0 as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * discordant as f64;
    Ok((numer / denom.sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates all pairs and counts concordance directly.
    fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
        let sgn = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
        let (mut s, mut tx, mut ty) = (0.0_f64, 0.0_f64, 0.0_f64);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let a = sgn(x[i] - x[j]);
                let b = sgn(y[i] - y[j]);
                s += a * b;
                tx += a * a;
                ty += b * b;
            }
        }
        s / (tx * ty).sqrt()
    }

    /// Raw-sum formula, a different algebraic route from the centred one.
    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(Error::NotComputable(_))));
        assert!(matches!(pearson(&x[..2], &x[..2]), Err(Error::NotComputable(_))));
    }

    #[test]
    fn kendall_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(kendall(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall(&x, &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((kendall(&x, &[1.0, 3.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(kendall(&x, &[5.0; 3]), Err(Error::NotComputable(_))));
    }

    #[test]
    fn kendall_with_ties() {
        let x = [1.0, 1.0, 2.0, 3.0, 3.0, 3.0];
        let y = [2.0, 1.0, 2.0, 2.0, 5.0, 4.0];
        assert!((kendall(&x, &y).unwrap() - kendall_oracle(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn signed_zeros_are_ties() {
        let x = [0.0, -0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        assert!((kendall(&x, &y).unwrap() - kendall_oracle(&x, &y)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn match_oracles(
            pairs in prop::collection::vec((0i32..12, -50.0f64..50.0), 3..50),
            quantize in any::<bool>(),
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let y: Vec<f64> = pairs.iter().map(|p| if quantize { p.1.round() } else { p.1 }).collect();
            if let Ok(t) = kendall(&x, &y) {
                prop_assert!((t - kendall_oracle(&x, &y)).abs() < 1e-9);
            }
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((r - pearson_oracle(&x, &y)).abs() < 1e-9);
            }
        }

        #[test]
        fn symmetric_and_transform_invariant(
            x in prop::collection::vec(-10.0f64..10.0, 5..40),
            seed in -10.0f64..10.0,
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v * seed + i as f64).sin()).collect();
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r - pearson(&y, &x).unwrap()).abs() < 1e-9);
            let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((r - pearson(&xa, &y).unwrap()).abs() < 1e-9);

            let t = kendall(&x, &y).unwrap();
            prop_assert!((t - kendall(&y, &x).unwrap()).abs() < 1e-9);
            let xm: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            prop_assert!((t - kendall(&xm, &y).unwrap()).abs() < 1e-9);
        }
    }
}
