//! Small statistics toolkit shared by the estimators and the test suites.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn variance(xs: &[f64]) -> f64 {
    let (mean, _) = mean_se(xs);
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `log(mean(exp(v)))` without overflow.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + (s / values.len() as f64).ln()
}

/// Bootstrap standard deviation of `stat` over `resamples` resamples with
/// replacement of the index set `0..n`.
pub fn bootstrap_se<R: Rng + ?Sized>(
    n: usize,
    resamples: usize,
    rng: &mut R,
    mut stat: impl FnMut(&[usize]) -> f64,
) -> f64 {
    let mut idx = vec![0usize; n];
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let v = stat(&idx);
        if v.is_finite() {
            values.push(v);
        }
    }
    if values.len() < 2 {
        return f64::NAN;
    }
    variance(&values).sqrt()
}

/// Result of a chi-square test.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Goodness of fit of integer counts to a Poisson law. Cells are merged from
/// both tails until every expected frequency is at least 5.
pub fn chi_square_poisson(counts: &[usize], mean: f64) -> ChiSquareResult {
    let n = counts.len() as f64;
    let pois = Poisson::new(mean).expect("positive mean");
    let max_k = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0.0; max_k + 1];
    for &c in counts {
        observed[c] += 1.0;
    }
    let mut expected: Vec<f64> = (0..=max_k).map(|k| n * pois.pmf(k as u64)).collect();
    // put the upper tail mass into the last cell
    let tail: f64 = n - expected.iter().sum::<f64>();
    *expected.last_mut().unwrap() += tail.max(0.0);
    let (obs, exp) = merge_small_cells(&observed, &expected, 5.0);
    let statistic = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = obs.len().saturating_sub(1);
    ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

fn merge_small_cells(observed: &[f64], expected: &[f64], min_expected: f64) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(o), Some(e)) = (obs.last_mut(), exp.last_mut()) {
            *o += o_acc;
            *e += e_acc;
        } else {
            obs.push(o_acc);
            exp.push(e_acc);
        }
    }
    (obs, exp)
}

/// Two-sample chi-square homogeneity test on integer-valued data. Adjacent
/// values are pooled until each pooled cell holds at least 10 observations.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> ChiSquareResult {
    let max_k = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut ha = vec![0.0; max_k + 1];
    let mut hb = vec![0.0; max_k + 1];
    for &k in a {
        ha[k] += 1.0;
    }
    for &k in b {
        hb[k] += 1.0;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for k in 0..=max_k {
        ca += ha[k];
        cb += hb[k];
        if ca + cb >= 10.0 {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => cells.push((ca, cb)),
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    for &(x, y) in &cells {
        let col = x + y;
        let ea = na * col / total;
        let eb = nb * col / total;
        statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    let dof = cells.len().saturating_sub(1);
    ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson as PoissonDist};

    #[test]
    fn mean_se_of_constant() {
        assert_eq!(mean_se(&[2.0, 2.0, 2.0]), (2.0, 0.0));
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_mean_exp(&v) - 1000.0).abs() < 1e-12);
        let w = [0.0, (3.0f64).ln()];
        assert!((log_mean_exp(&w) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn chi_square_accepts_poisson_and_rejects_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = PoissonDist::new(16.0).unwrap();
        let xs: Vec<usize> = (0..10_000).map(|_| d.sample(&mut rng) as usize).collect();
        assert!(chi_square_poisson(&xs, 16.0).p_value > 0.01);
        assert!(chi_square_poisson(&xs, 17.0).p_value < 1e-6);
    }

    #[test]
    fn two_sample_tests() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = PoissonDist::new(5.0).unwrap();
        let e = PoissonDist::new(6.0).unwrap();
        let a: Vec<usize> = (0..3000).map(|_| d.sample(&mut rng) as usize).collect();
        let b: Vec<usize> = (0..3000).map(|_| d.sample(&mut rng) as usize).collect();
        let c: Vec<usize> = (0..3000).map(|_| e.sample(&mut rng) as usize).collect();
        assert!(chi_square_two_sample(&a, &b).p_value > 0.01);
        assert!(chi_square_two_sample(&a, &c).p_value < 1e-6);

        let fa: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let fb: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let fc: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() + 0.2).collect();
        assert!(ks_two_sample(&fa, &fb).1 > 0.01);
        assert!(ks_two_sample(&fa, &fc).1 < 1e-6);
    }
}
