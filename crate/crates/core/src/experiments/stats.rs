//! Interval estimates and two-sample tests used by the campaigns.

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

use crate::error::{Error, Result};

/// Standard normal 97.5% quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`.
/// Zero trials give the uninformative interval `[0, 1]`.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Kolmogorov survival function `Q(x) = 2 Σ (-1)^{k-1} exp(-2 k² x²)`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // the alternating series converges slowly here and Q is 1 to
        // double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test. Returns `D = sup |F_a - F_b|` and
/// the asymptotic p-value `Q((√m + 0.12 + 0.11/√m) D)` with
/// `m = n_a n_b / (n_a + n_b)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("KS test samples contain NaN".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let m = (na * nb / (na + nb)).sqrt();
    let p = kolmogorov_q((m + 0.12 + 0.11 / m) * d);
    Ok((d, p))
}

/// Two-sample KS test on pooled integer values of independent replicates
/// (for example the degree sequences of independently sampled graphs).
///
/// Values within one replicate may be dependent, which invalidates the
/// asymptotic p-value. Under the null the replicates are exchangeable, so
/// the p-value `(1 + #{D_π ≥ D}) / (1 + permutations)` comes from
/// reassigning whole replicates between the two sides at random.
pub fn ks_replicate_permutation<R: Rng>(
    a: &[Vec<usize>],
    b: &[Vec<usize>],
    permutations: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let total = |groups: &[Vec<usize>]| groups.iter().map(Vec::len).sum::<usize>();
    if total(a) == 0 || total(b) == 0 {
        return Err(Error::InvalidInput("KS test needs two non-empty samples".into()));
    }
    let max = a.iter().chain(b).flatten().copied().max().unwrap_or(0);
    let histograms: Vec<Vec<(usize, u64)>> = a
        .iter()
        .chain(b)
        .map(|g| {
            let mut values = g.clone();
            values.sort_unstable();
            let mut hist: Vec<(usize, u64)> = Vec::new();
            for v in values {
                match hist.last_mut() {
                    Some((last, count)) if *last == v => *count += 1,
                    _ => hist.push((v, 1)),
                }
            }
            hist
        })
        .collect();
    let mut left = vec![0u64; max + 1];
    let mut right = vec![0u64; max + 1];
    let mut statistic = |in_a: &[bool]| {
        left.iter_mut().for_each(|c| *c = 0);
        right.iter_mut().for_each(|c| *c = 0);
        for (hist, &side) in histograms.iter().zip(in_a) {
            let target = if side { &mut left } else { &mut right };
            for &(v, c) in hist {
                target[v] += c;
            }
        }
        let (na, nb) = (left.iter().sum::<u64>() as f64, right.iter().sum::<u64>() as f64);
        if na == 0.0 || nb == 0.0 {
            return 1.0;
        }
        let (mut ca, mut cb, mut d) = (0u64, 0u64, 0.0f64);
        for (l, r) in left.iter().zip(&right) {
            ca += l;
            cb += r;
            d = d.max((ca as f64 / na - cb as f64 / nb).abs());
        }
        d
    };
    let mut labels: Vec<bool> = (0..a.len() + b.len()).map(|i| i < a.len()).collect();
    let observed = statistic(&labels);
    let mut at_least = 0usize;
    for _ in 0..permutations {
        labels.shuffle(rng);
        if statistic(&labels) >= observed - 1e-12 {
            at_least += 1;
        }
    }
    Ok((observed, (1 + at_least) as f64 / (1 + permutations) as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Chi-square test that two samples come from one distribution, on a
/// 2 × k table whose bins are cut at quantiles of the pooled sample.
pub fn chi_square_homogeneity(a: &[f64], b: &[f64], max_bins: usize) -> Result<ChiSquare> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("chi-square test needs two non-empty samples".into()));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let bins = max_bins.max(2);
    let mut cuts: Vec<f64> = (1..bins)
        .map(|i| pooled[i * pooled.len() / bins])
        .collect();
    cuts.dedup();
    // a cut at the minimum would leave its lower bin empty
    cuts.retain(|&c| c > pooled[0]);
    let k = cuts.len() + 1;
    if k < 2 {
        return Ok(ChiSquare { statistic: 0.0, df: 0, p_value: 1.0 });
    }
    let bin = |x: f64| cuts.partition_point(|&c| c <= x);
    let mut table = vec![[0.0f64; 2]; k];
    for &x in a {
        table[bin(x)][0] += 1.0;
    }
    for &x in b {
        table[bin(x)][1] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    for row in &table {
        let col = row[0] + row[1];
        for (observed, size) in row.iter().zip([na, nb]) {
            let expected = col * size / total;
            if expected > 0.0 {
                statistic += (observed - expected).powi(2) / expected;
            }
        }
    }
    let df = k - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        df,
        p_value: dist.sf(statistic),
    })
}

/// Smallest `c` with `P[Bin(trials, p) ≤ c] ≥ level`: the largest count
/// a one-sided test at that level accepts.
pub fn binomial_upper_critical(trials: u64, p: f64, level: f64) -> Result<u64> {
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(p, trials).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut c = 0;
    while c < trials && dist.cdf(c) < level {
        c += 1;
    }
    Ok(c)
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Hill estimate of the power-law exponent of `values` (density
/// exponent, `1 + α`) from the `k` largest entries.
pub fn hill_exponent(values: &[f64], k: usize) -> Result<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| *x > 0.0).collect();
    if k < 2 || k >= v.len() {
        return Err(Error::InvalidInput(format!(
            "Hill estimator needs 2 ≤ k < {} positive values",
            v.len()
        )));
    }
    v.sort_by(|a, b| b.total_cmp(a));
    let threshold = v[k].ln();
    let mean_excess: f64 = v[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    Ok(1.0 + 1.0 / mean_excess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson(20, 20);
        assert!((lo - 0.838_875_2).abs() < 1e-6, "{lo}");
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.403_831_4).abs() < 1e-6);
        assert!((hi - 0.596_168_6).abs() < 1e-6);
        assert_eq!(wilson(0, 0), (0.0, 1.0));
    }

    #[test]
    fn wilson_contains_estimate_and_shrinks() {
        let mut last = f64::INFINITY;
        for n in [10u64, 40, 160, 640, 2560] {
            let k = n * 3 / 10;
            let (lo, hi) = wilson(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi);
            let width = hi - lo;
            assert!(width < last);
            // quadrupling n roughly halves the width
            if last.is_finite() {
                assert!((last / width - 2.0).abs() < 0.3);
            }
            last = width;
        }
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), (0.0, 1.0));
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap().0, 1.0);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        let (d, _) = ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.5]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.358_098_8) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_q(1.627_624) - 0.01).abs() < 1e-5);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn chi_square_identical_and_shifted() {
        let a: Vec<f64> = (0..300).map(|i| (i % 30) as f64).collect();
        let same = chi_square_homogeneity(&a, &a, 10).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        assert!((same.p_value - 1.0).abs() < 1e-12);
        let b: Vec<f64> = a.iter().map(|x| x + 15.0).collect();
        assert!(chi_square_homogeneity(&a, &b, 10).unwrap().p_value < 1e-10);
        let c = vec![1.0; 5];
        assert_eq!(chi_square_homogeneity(&c, &c, 10).unwrap().df, 0);
    }

    #[test]
    fn binomial_critical_values() {
        // Bin(1000, 0.1): mean 100, sd 9.49; the 99% point is 123
        assert_eq!(binomial_upper_critical(1000, 0.1, 0.99).unwrap(), 123);
        assert_eq!(binomial_upper_critical(10, 0.0, 0.99).unwrap(), 0);
        assert_eq!(binomial_upper_critical(10, 1.0, 0.99).unwrap(), 10);
    }

    #[test]
    fn replicate_permutation_ks() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a: Vec<Vec<usize>> = (0..30).map(|i| vec![i % 7, i % 5, 3]).collect();
        let b: Vec<Vec<usize>> = (0..30).map(|i| vec![(i + 3) % 7, (i + 1) % 5, 3]).collect();
        let (d, p) = ks_replicate_permutation(&a, &b, 199, &mut rng).unwrap();
        assert!(d < 0.1 && p > 0.1, "{d} {p}");
        let shifted: Vec<Vec<usize>> = a.iter().map(|g| g.iter().map(|v| v + 4).collect()).collect();
        let (d, p) = ks_replicate_permutation(&a, &shifted, 199, &mut rng).unwrap();
        assert!(d > 0.5);
        assert_eq!(p, 1.0 / 200.0);
        assert!(ks_replicate_permutation(&[vec![]], &b, 9, &mut rng).is_err());
    }

    #[test]
    fn median_and_hill() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        // exact Pareto quantiles with exponent 2.5
        let n = 100_000;
        let v: Vec<f64> = (0..n)
            .map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-1.0 / 1.5))
            .collect();
        let est = hill_exponent(&v, 2000).unwrap();
        assert!((est - 2.5).abs() < 0.05, "{est}");
    }
}
