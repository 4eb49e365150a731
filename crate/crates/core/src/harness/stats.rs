//! Summary statistics and goodness-of-fit tests.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const MIN_KS_SAMPLES: usize = 100;

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    carry: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Mean and variance with standard errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Large-sample standard error of the variance, from the fourth moment.
    pub variance_se: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    let nf = n as f64;
    let mean = neumaier_sum(xs.iter().copied()) / nf;
    let m2 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(2))) / nf;
    let m4 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(4))) / nf;
    let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    let var_of_var = if n > 3 { (m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf } else { f64::INFINITY };
    Moments {
        n,
        mean,
        mean_se: (variance / nf).sqrt(),
        variance,
        variance_se: var_of_var.max(0.0).sqrt(),
    }
}

/// Sample covariance (unbiased).
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = neumaier_sum(xs.iter().copied()) / n;
    let my = neumaier_sum(ys.iter().copied()) / n;
    neumaier_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (n - 1.0)
}

/// Sample correlation and its large-sample standard error `(1 - r²)/√(n-1)`.
pub fn correlation(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let c = covariance(xs, ys);
    let (vx, vy) = (covariance(xs, xs), covariance(ys, ys));
    if vx == 0.0 || vy == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = c / (vx * vy).sqrt();
    (r, (1.0 - r * r) / ((xs.len() as f64) - 1.0).sqrt())
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and the
/// standard normal, without rescaling.
pub fn ks_standard_normal(xs: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormalityResult {
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Studentize and measure the KS distance to the standard normal.
pub fn normality_test(samples: &[f64], threshold: f64) -> Result<NormalityResult> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_KS_SAMPLES, got: samples.len() });
    }
    let m = moments(samples);
    let sd = m.variance.sqrt();
    let z: Vec<f64> = if sd > 0.0 {
        samples.iter().map(|x| (x - m.mean) / sd).collect()
    } else {
        vec![0.0; samples.len()]
    };
    let ks = ks_standard_normal(&z);
    Ok(NormalityResult { ks, threshold, pass: ks < threshold })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Goodness of fit of observed counts to cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e > 0.0 {
            statistic += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    let df = cells.saturating_sub(1);
    ChiSquare { statistic, df, p_value: chi_square_p(statistic, df) }
}

/// Two-sample homogeneity test on paired count vectors.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let (ea, eb) = (na * col / total, nb * col / total);
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let df = cells.saturating_sub(1);
    ChiSquare { statistic, df, p_value: chi_square_p(statistic, df) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Seed;
    use rand::Rng;

    // Box–Muller from the seeded stream
    fn standard_normals(seed: Seed, n: usize) -> Vec<f64> {
        let mut rng = seed.rng();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let v: f64 = rng.random();
                (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
            })
            .collect()
    }

    #[test]
    fn neumaier_is_exact_where_naive_is_not() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn normal_samples_pass() {
        let xs = standard_normals(Seed::new(3), 10_000);
        let r = normality_test(&xs, 0.05).unwrap();
        assert!(r.ks < 0.02, "{}", r.ks);
        let m = moments(&xs);
        assert!(m.mean.abs() < 4.0 * m.mean_se);
        assert!((m.variance - 1.0).abs() < 4.0 * m.variance_se);
    }

    #[test]
    fn constant_samples_fail() {
        let r = normality_test(&[3.0; 200], 0.05).unwrap();
        assert!((r.ks - 0.5).abs() < 1e-12 && !r.pass);
        assert!(matches!(normality_test(&[0.0; 10], 0.05), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn chi_square_sanity() {
        let fair = chi_square_gof(&[250, 260, 240, 250], &[0.25; 4]);
        assert!(fair.p_value > 0.5);
        let skew = chi_square_gof(&[400, 200, 200, 200], &[0.25; 4]);
        assert!(skew.p_value < 1e-6);
        let same = chi_square_two_sample(&[10, 20, 30], &[11, 19, 30]);
        assert!(same.p_value > 0.9);
        assert_eq!(chi_square_two_sample(&[5], &[7]).df, 0);
    }

    #[test]
    fn correlation_of_linear_pair() {
        let xs: Vec<f64> = (0..50).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let (r, se) = correlation(&xs, &ys);
        assert!((r - 1.0).abs() < 1e-12 && se.abs() < 1e-12);
    }
}
