//! Kendall's tau-b by Knight's O(n log n) merge-sort counting.

use crate::error::{Error, Result};

/// Kendall rank correlation between the two coordinates of `pairs`, with the
/// tau-b tie correction in both margins.
///
/// tau_b = (C − D) / √((n₀ − n₁)(n₀ − n₂)), where n₀ is the number of pairs,
/// n₁/n₂ the tied pairs within each margin, C/D the concordant/discordant
/// counts.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "kendall_tau requires at least 2 pairs, got {n}"
        )));
    }
    if pairs.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::domain("kendall_tau requires finite values"));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        pairs[a]
            .0
            .partial_cmp(&pairs[b].0)
            .unwrap()
            .then(pairs[a].1.partial_cmp(&pairs[b].1).unwrap())
    });

    let n0 = n as u64 * (n as u64 - 1) / 2;

    // tie pairs within x, and joint ties within (x, y)
    let mut n1: u64 = 0;
    let mut n3: u64 = 0;
    let mut run = 1u64;
    let mut joint_run = 1u64;
    for w in 1..n {
        let (prev, cur) = (pairs[idx[w - 1]], pairs[idx[w]]);
        if prev.0 == cur.0 {
            run += 1;
            if prev.1 == cur.1 {
                joint_run += 1;
            } else {
                n3 += joint_run * (joint_run - 1) / 2;
                joint_run = 1;
            }
        } else {
            n1 += run * (run - 1) / 2;
            run = 1;
            n3 += joint_run * (joint_run - 1) / 2;
            joint_run = 1;
        }
    }
    n1 += run * (run - 1) / 2;
    n3 += joint_run * (joint_run - 1) / 2;

    // discordant pairs = inversions of the y sequence taken in (x, y) order
    let mut ys: Vec<f64> = idx.iter().map(|&i| pairs[i].1).collect();
    let mut buf = vec![0.0; n];
    let discordant = count_inversions(&mut ys, &mut buf);

    // tie pairs within y
    let mut sorted_y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    sorted_y.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut n2: u64 = 0;
    let mut run = 1u64;
    for w in 1..n {
        if sorted_y[w - 1] == sorted_y[w] {
            run += 1;
        } else {
            n2 += run * (run - 1) / 2;
            run = 1;
        }
    }
    n2 += run * (run - 1) / 2;

    let denom = ((n0 - n1) as f64) * ((n0 - n2) as f64);
    if denom <= 0.0 {
        return Err(Error::domain(
            "kendall_tau undefined: a margin is constant (all pairs tied)",
        ));
    }
    let num = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * discordant as i64;
    Ok(num as f64 / denom.sqrt())
}

/// Merge sort that counts inversions; equal elements are kept stable so ties
/// contribute nothing.
fn count_inversions(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = xs.split_at_mut(mid);
    let mut inv = count_inversions(left, &mut buf[..mid]) + count_inversions(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            j += 1;
            inv += (left.len() - i) as u64;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    xs.copy_from_slice(&buf[..n]);
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n²) brute-force tau-b, the independent oracle.
    fn tau_brute(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len();
        let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pairs[i].0 - pairs[j].0;
                let dy = pairs[i].1 - pairs[j].1;
                if dx == 0.0 && dy == 0.0 {
                    tx += 1;
                    ty += 1;
                } else if dx == 0.0 {
                    tx += 1;
                } else if dy == 0.0 {
                    ty += 1;
                } else if dx * dy > 0.0 {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as i64;
        (c - d) as f64 / (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt()
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        let inc: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, (i * i) as f64)).collect();
        assert_eq!(kendall_tau(&inc).unwrap(), 1.0);
        let dec: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, -(i as f64))).collect();
        assert_eq!(kendall_tau(&dec).unwrap(), -1.0);
    }

    #[test]
    fn three_point_example() {
        let pairs = [(1.0, 1.0), (2.0, 3.0), (3.0, 2.0)];
        let got = kendall_tau(&pairs).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-15);
        assert!((tau_brute(&pairs) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..30 {
            let n = 5 + trial * 7;
            // integer-valued draws so ties are common
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    (
                        rng.gen_range(0..6) as f64,
                        rng.gen_range(0..6) as f64,
                    )
                })
                .collect();
            if pairs.iter().all(|p| p.0 == pairs[0].0) {
                continue;
            }
            let fast = kendall_tau(&pairs).unwrap();
            let brute = tau_brute(&pairs);
            assert!(
                (fast - brute).abs() < 1e-12,
                "n={n}: fast={fast} brute={brute}"
            );
        }
    }

    #[test]
    fn monotone_transform_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pairs: Vec<(f64, f64)> = (0..400)
            .map(|_| (rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0))
            .collect();
        let base = kendall_tau(&pairs).unwrap();
        let transformed: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x.exp(), y)).collect();
        let got = kendall_tau(&transformed).unwrap();
        assert!((got - base).abs() < 1e-12);
        // self-correlation
        let with_self: Vec<(f64, f64)> = pairs.iter().map(|&(x, _)| (x, x)).collect();
        assert_eq!(kendall_tau(&with_self).unwrap(), 1.0);
        let with_neg: Vec<(f64, f64)> = pairs.iter().map(|&(x, _)| (x, -x)).collect();
        assert_eq!(kendall_tau(&with_neg).unwrap(), -1.0);
    }

    #[test]
    fn independent_uniforms_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<(f64, f64)> = (0..100_000).map(|_| (rng.gen(), rng.gen())).collect();
        let tau = kendall_tau(&pairs).unwrap();
        assert!(tau.abs() < 0.02, "tau={tau}");
    }

    #[test]
    fn error_cases() {
        assert!(kendall_tau(&[(1.0, 2.0)]).is_err());
        assert!(kendall_tau(&[(1.0, 2.0), (f64::NAN, 0.0)]).is_err());
        assert!(kendall_tau(&[(1.0, 2.0), (1.0, 3.0)]).is_err()); // constant x margin
    }
}
