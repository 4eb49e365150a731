//! Exact scans over size sweeps and the one-hub cross-check.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::families::{empirical_law, StatFamily};
use super::stats::{chi_square_gof, chi_square_two_sample, ChiSquare};
use crate::asymptotics::{gamma_p, mu_n, pi_p};
use crate::error::{Error, Result};
use crate::moments::{exact_variance, factorial_moment, mean_count};
use crate::rational::{int, ln_rational, to_f64};
use crate::sampling::{sample_composition_hub, sample_uniform_tree, Seed};
use crate::tree::{enumerate_trees_capped, DegreeStatistic, PlaneTree};

/// p-value below which a χ² comparison is reported as a failure.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;
/// Largest tree count for which the exact law is enumerated.
pub const EXACT_LAW_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct GwScanRow {
    pub size: u64,
    pub mu: f64,
    pub sigma: f64,
    pub q_max: u64,
    /// `|log LHS - log RHS|` for `q = 0..=q_max`.
    pub deviations: Vec<f64>,
    pub max_log_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GwScan {
    pub pattern: PlaneTree,
    pub c: f64,
    pub gamma: f64,
    pub rows: Vec<GwScanRow>,
}

impl GwScan {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_log_deviation < w[0].max_log_deviation)
    }
}

/// Compare exact factorial moments with the quadratic-exponent asymptotic
/// `μ^q exp(½ (γσ² - μ) q² / μ²)`, `σ = |n|^{1/2}`, for `q ≤ cμ/σ`.
pub fn gw_condition_scan(family: &StatFamily, pattern: &PlaneTree, sizes: &[u64], c: f64) -> Result<GwScan> {
    let target = family.target();
    if !pi_p(&target, pattern).is_positive() {
        return Err(Error::InvalidConfig(format!("pattern {pattern} has probability zero under the target law")));
    }
    let gamma = gamma_p(&target, pattern, pattern).to_f64();
    let rows = sizes
        .iter()
        .map(|&size| {
            let stat = family.statistic(size)?;
            let mu_exact = mu_n(&stat, pattern);
            let (mu, ln_mu) = (to_f64(&mu_exact), ln_rational(&mu_exact));
            let n = stat.size() as f64;
            let sigma = n.sqrt();
            let q_max = (c * mu / sigma).floor().max(0.0) as u64;
            let deviations = (0..=q_max)
                .into_par_iter()
                .map(|q| {
                    let lhs = factorial_moment(&stat, pattern, q)?;
                    if lhs.is_zero() {
                        return Ok(f64::INFINITY);
                    }
                    let qf = q as f64;
                    let rhs = qf * ln_mu + 0.5 * (gamma * n - mu) * qf * qf / (mu * mu);
                    Ok((ln_rational(&lhs) - rhs).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            let max_log_deviation = deviations.iter().copied().fold(0.0, f64::max);
            Ok(GwScanRow { size: stat.size(), mu, sigma, q_max, deviations, max_log_deviation })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GwScan { pattern: pattern.clone(), c, gamma, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct O1Row {
    pub size: u64,
    pub exact_mean: f64,
    pub mu_n: f64,
    pub mean_gap: f64,
    pub exact_variance: f64,
    /// `|n| γ_{p(n)}(T, T)` with the empirical law of the statistic.
    pub predicted_variance: f64,
    pub variance_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct O1Scan {
    pub family: String,
    pub pattern: PlaneTree,
    pub rows: Vec<O1Row>,
    pub sup_mean_gap: f64,
    pub sup_variance_gap: f64,
}

fn o1_row(stat: &DegreeStatistic, pattern: &PlaneTree) -> Result<O1Row> {
    let mean = mean_count(stat, pattern)?;
    let mu = mu_n(stat, pattern);
    let var = exact_variance(stat, pattern)?;
    let law = empirical_law(stat);
    let gamma = gamma_p(&law, pattern, pattern);
    let gamma = gamma.as_exact().cloned().expect("empirical law is exact");
    let predicted = int(stat.size()) * gamma;
    Ok(O1Row {
        size: stat.size(),
        exact_mean: to_f64(&mean),
        mu_n: to_f64(&mu),
        mean_gap: to_f64(&(&mean - &mu)).abs(),
        exact_variance: to_f64(&var),
        predicted_variance: to_f64(&predicted),
        variance_gap: to_f64(&(&var - &predicted)).abs(),
    })
}

/// Exact gaps between finite-size moments and their plug-in approximations.
pub fn o1_scan(family: &StatFamily, pattern: &PlaneTree, sizes: &[u64]) -> Result<O1Scan> {
    let rows = sizes
        .par_iter()
        .map(|&size| o1_row(&family.statistic(size)?, pattern))
        .collect::<Result<Vec<_>>>()?;
    Ok(O1Scan {
        family: family.name().to_string(),
        pattern: pattern.clone(),
        sup_mean_gap: rows.iter().map(|r| r.mean_gap).fold(0.0, f64::max),
        sup_variance_gap: rows.iter().map(|r| r.variance_gap).fold(0.0, f64::max),
        rows,
    })
}

/// Sizes spaced evenly on a log scale, endpoints included.
pub fn log_spaced(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    pub n0: u32,
    pub n1: u32,
    pub reps: usize,
    /// Histogram of `N_{path2}` under the cycle-lemma sampler.
    pub uniform_counts: Vec<u64>,
    /// Histogram under the composition sampler.
    pub composition_counts: Vec<u64>,
    pub two_sample: ChiSquare,
    /// Exact law of `N_{path2}` when the trees were enumerated.
    pub exact_law: Option<Vec<f64>>,
    pub uniform_vs_exact: Option<ChiSquare>,
    pub composition_vs_exact: Option<ChiSquare>,
    pub alpha: f64,
    pub pass: bool,
}

/// One-hub statistic `{0: n0, 1: n1, n0: 1}`.
pub fn hub_statistic(n0: u32, n1: u32) -> Result<DegreeStatistic> {
    if n0 < 2 {
        return Err(Error::InvalidStatistic("one-hub trees need n0 >= 2".into()));
    }
    let mut counts = std::collections::BTreeMap::from([(0, n0 as u64), (n0, 1)]);
    *counts.entry(1).or_default() += n1 as u64;
    DegreeStatistic::new(counts)
}

/// Check that the cycle-lemma sampler and the composition sampler agree on
/// the law of `N_{path2}` for one-hub statistics.
pub fn composition_crosscheck(n0: u32, n1: u32, reps: usize, seed: Seed) -> Result<CompositionReport> {
    let stat = hub_statistic(n0, n1)?;
    let path2 = PlaneTree::path(2);
    let cells = n0.min(n1) as usize + 1;
    let draws: Vec<(usize, usize)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let a = sample_uniform_tree(&stat, seed.derive(2 * r)).count_fringe(&path2) as usize;
            let b = sample_composition_hub(n0, n1, seed.derive(2 * r + 1))?.count_fringe(&path2) as usize;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let mut uniform_counts = vec![0u64; cells];
    let mut composition_counts = vec![0u64; cells];
    for (a, b) in draws {
        uniform_counts[a] += 1;
        composition_counts[b] += 1;
    }
    let two_sample = chi_square_two_sample(&uniform_counts, &composition_counts);

    let mut exact_law = None;
    let mut uniform_vs_exact = None;
    let mut composition_vs_exact = None;
    let total = stat.count_trees();
    if total <= EXACT_LAW_LIMIT.into() {
        let mut hist = vec![0u64; cells];
        let mut trees = 0u64;
        for t in enumerate_trees_capped(&stat, usize::MAX)? {
            hist[t.count_fringe(&path2) as usize] += 1;
            trees += 1;
        }
        let law: Vec<f64> = hist.iter().map(|&h| h as f64 / trees as f64).collect();
        uniform_vs_exact = Some(chi_square_gof(&uniform_counts, &law));
        composition_vs_exact = Some(chi_square_gof(&composition_counts, &law));
        exact_law = Some(law);
    }
    let pass = [Some(two_sample), uniform_vs_exact, composition_vs_exact]
        .iter()
        .flatten()
        .all(|c| c.p_value > CHI_SQUARE_ALPHA);
    Ok(CompositionReport {
        n0,
        n1,
        reps,
        uniform_counts,
        composition_counts,
        two_sample,
        exact_law,
        uniform_vs_exact,
        composition_vs_exact,
        alpha: CHI_SQUARE_ALPHA,
        pass,
    })
}
