//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p fringelab-core --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use fringelab::asymptotics::{
    additive_f, additive_gamma, classify_exceptional, gamma_hat_vanishes, gamma_p, gw_equivalents, pi_p,
    Exceptional, TollFunction, WeightSequence,
};
use fringelab::harness::{
    gw_condition_scan, log_spaced, o1_scan, run_experiment, stats, ExperimentConfig, StatFamily,
};
use fringelab::moments::{degree_factorial_moment, factorial_moment, joint_factorial_moment, mean_count, product_moment};
use fringelab::offspring::OffspringDistribution;
use fringelab::rational::{falling_factorial_u, int, rat, to_f64};
use fringelab::sampling::sample_uniform_tree;
use fringelab::tree::{all_degree_statistics, bridge_from_degrees, vervaat, MultisetPermutations};
use fringelab::{DegreeStatistic, Error, PlaneTree, Seed};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let spent = start.elapsed();
    (spent <= budget, format!("{:.1}s of {}s", spent.as_secs_f64(), budget.as_secs()))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let patterns = common::trees_between(1, 5);
    let mut cases = 0u64;
    for k in 1..=9 {
        for stat in all_degree_statistics(k) {
            let trees = common::all_trees(&stat);
            for p in &patterns {
                let brute = common::brute_joint(&trees, std::slice::from_ref(p), &[1]);
                let exact = mean_count(&stat, p).map_err(|e| e.to_string())?;
                if brute != exact {
                    return Err(format!("stat {} pattern {p}: {exact} != {brute}", stat.to_json()));
                }
                cases += 1;
            }
        }
    }
    let (fast, time) = within_budget(start, Duration::from_secs(60));
    check(fast, format!("{cases} (statistic, pattern) pairs exact; {time}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let small = common::trees_between(1, 4);
    let mut sets: Vec<Vec<PlaneTree>> = Vec::new();
    for a in 0..small.len() {
        sets.push(vec![small[a].clone()]);
        for b in a + 1..small.len() {
            sets.push(vec![small[a].clone(), small[b].clone()]);
            for c in b + 1..small.len() {
                sets.push(vec![small[a].clone(), small[b].clone(), small[c].clone()]);
            }
        }
    }
    let q_vectors = |m: usize| -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let mut q = vec![0u64; m];
        loop {
            let s: u64 = q.iter().sum();
            if s <= 3 {
                out.push(q.clone());
            }
            let mut i = 0;
            loop {
                if i == m {
                    return out;
                }
                q[i] += 1;
                if q[i] <= 3 {
                    break;
                }
                q[i] = 0;
                i += 1;
            }
        }
    };
    let mut cases = 0u64;
    for k in 1..=8 {
        for stat in all_degree_statistics(k) {
            let trees = common::all_trees(&stat);
            for set in &sets {
                for q in q_vectors(set.len()) {
                    let brute = common::brute_joint(&trees, set, &q);
                    let exact = joint_factorial_moment(&stat, set, &q).map_err(|e| e.to_string())?;
                    if brute != exact {
                        return Err(format!("stat {} set {set:?} q {q:?}: {exact} != {brute}", stat.to_json()));
                    }
                    let reduced = match (set.len(), q.as_slice()) {
                        (1, [k]) => Some(factorial_moment(&stat, &set[0], *k)),
                        (2, [1, 1]) => Some(product_moment(&stat, &set[0], &set[1])),
                        _ => None,
                    };
                    if let Some(r) = reduced {
                        if r.map_err(|e| e.to_string())? != exact {
                            return Err(format!("reduction mismatch for {set:?} q {q:?}"));
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    let (fast, time) = within_budget(start, Duration::from_secs(300));
    check(fast, format!("{cases} joint moments exact; {time}"))
}

fn criterion_3() -> Outcome {
    let stats: Vec<DegreeStatistic> = [
        vec![(0, 3), (2, 2)],
        vec![(0, 4), (2, 3)],
        vec![(0, 3), (1, 1), (3, 1)],
        vec![(0, 3), (1, 1), (2, 2)],
        vec![(0, 5), (2, 4)],
    ]
    .iter()
    .map(|p| DegreeStatistic::from_pairs(p).expect("balanced"))
    .collect();
    let draws = 100_000u64;
    let mut worst = 1.0f64;
    for (k, stat) in stats.iter().enumerate() {
        let trees = common::all_trees(stat);
        let count = trees.len();
        if !(2..=50).contains(&count) {
            return Err(format!("statistic {} has {count} trees", stat.to_json()));
        }
        let index: BTreeMap<&PlaneTree, usize> = trees.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut observed = vec![0u64; count];
        let base = Seed::with_stream(2024, k as u64);
        for r in 0..draws {
            observed[index[&sample_uniform_tree(stat, base.derive(r))]] += 1;
        }
        let p = stats::chi_square_gof(&observed, &vec![1.0 / count as f64; count]).p_value;
        worst = worst.min(p);
    }
    // cycle lemma: every tree has exactly |n| preimages among the bridges
    let mut bridges = 0u64;
    for k in 1..=7 {
        for stat in all_degree_statistics(k) {
            let mut hits: BTreeMap<PlaneTree, u64> = BTreeMap::new();
            for seq in MultisetPermutations::new(&stat.degree_multiset(), false) {
                let (exc, _) = vervaat(&bridge_from_degrees(&seq)).map_err(|e| e.to_string())?;
                *hits.entry(exc.to_tree().map_err(|e| e.to_string())?).or_default() += 1;
                bridges += 1;
            }
            let expected = stat.count_trees();
            if BigInt::from(hits.len()) != BigInt::from(expected) || hits.values().any(|&h| h != k) {
                return Err(format!("vervaat is not {k}-to-1 on {}", stat.to_json()));
            }
        }
    }
    check(worst > 1e-3, format!("min chi-square p = {worst:.4}; vervaat {bridges} bridges checked"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cherry = PlaneTree::cherry();
    let other: PlaneTree = "2,0,2,0,0".parse().expect("valid");
    let cfg = ExperimentConfig::new(
        StatFamily::FullBinary,
        vec![cherry.clone(), other],
        vec![10_001],
        2000,
        Seed::new(20_240_101),
    );
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let size = &report.sizes[0];
    let c = &size.patterns[0];
    let rel = (c.variance_over_size - 1.0 / 32.0).abs() / (1.0 / 32.0);
    let ks = c.normality.map_or(1.0, |n| n.ks);
    let pair = &size.pairs[0];
    let corr_ok = (pair.correlation - pair.predicted_correlation).abs() <= 3.0 * pair.correlation_se;
    let (fast, time) = within_budget(start, Duration::from_secs(600));
    check(
        rel <= 0.10 && ks < 0.05 && corr_ok && fast,
        format!(
            "Var/|n| = {:.5} (rel err {:.3}), KS = {ks:.4}, corr = {:.4} vs {:.4} (SE {:.4}); {time}",
            c.variance_over_size, rel, pair.correlation, pair.predicted_correlation, pair.correlation_se
        ),
    )
}

/// Required ceiling for the full-binary cherry scan.
const O1_CEILING: f64 = 10.0;
/// Frozen from the first full run, whose largest gap over all three scans was 0.130.
const O1_BOUND: f64 = 0.5;

fn criterion_5() -> Outcome {
    let sizes = log_spaced(100, 100_000, 7);
    let a = o1_scan(&StatFamily::FullBinary, &PlaneTree::cherry(), &sizes).map_err(|e| e.to_string())?;
    let b = o1_scan(&StatFamily::GeometricProfile, &PlaneTree::path(3), &sizes).map_err(|e| e.to_string())?;
    let c = o1_scan(&StatFamily::GeometricProfile, &PlaneTree::cherry(), &sizes).map_err(|e| e.to_string())?;
    let sup = |s: &fringelab::harness::O1Scan| s.sup_mean_gap.max(s.sup_variance_gap);
    check(
        sup(&a) < O1_CEILING && sup(&a) < O1_BOUND && sup(&b) < O1_BOUND && sup(&c) < O1_BOUND,
        format!(
            "sup gaps: full-binary cherry mean {:.4} var {:.4}; geometric path3 mean {:.4} var {:.4}; geometric cherry mean {:.4} var {:.4}",
            a.sup_mean_gap, a.sup_variance_gap, b.sup_mean_gap, b.sup_variance_gap, c.sup_mean_gap, c.sup_variance_gap
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = 1e-12;
    let binary = gw_equivalents(&WeightSequence::from_pairs(&[(0, 1, 1), (2, 1, 1)]).expect("valid"))
        .map_err(|e| e.to_string())?;
    let expect = [0.5, 0.0, 0.5];
    let mut ok = (binary.tau.to_f64() - 1.0).abs() < tol && (binary.sigma2.to_f64() - 1.0).abs() < tol;
    ok &= (0..3).all(|i| (binary.theta_i(i).to_f64() - expect[i as usize]).abs() < tol);

    let plane = gw_equivalents(&WeightSequence::all_ones(64)).map_err(|e| e.to_string())?;
    ok &= (plane.tau.to_f64() - 0.5).abs() < tol && (plane.sigma2.to_f64() - 2.0).abs() < tol;
    ok &= (0..64).all(|i| (plane.theta_i(i).to_f64() - 0.5f64.powi(i as i32 + 1)).abs() < tol);

    let mut rng = Seed::new(66).rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut pairs = vec![(0u32, rng.random_range(1..=9i64), rng.random_range(1..=9i64))];
        for d in 1..=4u32 {
            if rng.random_bool(0.7) || d == 2 {
                pairs.push((d, rng.random_range(1..=9), rng.random_range(1..=9)));
            }
        }
        let w = WeightSequence::from_pairs(&pairs).expect("valid");
        let a = rat(rng.random_range(1..=20), rng.random_range(1..=20));
        let b = rat(rng.random_range(1..=20), rng.random_range(1..=20));
        let base = gw_equivalents(&w).map_err(|e| e.to_string())?;
        let tilted = gw_equivalents(&w.tilt(&a, &b).expect("finite")).map_err(|e| e.to_string())?;
        for i in 0..=4 {
            worst = worst.max((base.theta_i(i).to_f64() - tilted.theta_i(i).to_f64()).abs());
        }
    }
    check(ok && worst < tol, format!("analytic cases within {tol:e}; max tilt drift {worst:.2e}"))
}

/// Conditional expectation of `Π (n(i))_{q_i}` given size `n`, summing over
/// degree statistics weighted by tree count times `Π w_i^{n(i)}`.
fn conditional_enumeration(w: &BTreeMap<u32, BigRational>, n: u64, q: &BTreeMap<u32, u64>) -> Option<BigRational> {
    let mut num = BigRational::zero();
    let mut den = BigRational::zero();
    for stat in all_degree_statistics(n) {
        let mut weight = BigRational::from_integer(BigInt::from(stat.count_trees()));
        for (i, c) in stat.iter() {
            let wi = w.get(&i).cloned().unwrap_or_else(BigRational::zero);
            weight *= num_traits::pow(wi, c as usize);
        }
        if weight.is_zero() {
            continue;
        }
        let mut f = BigRational::one();
        for (&i, &k) in q {
            f *= BigRational::from_integer(BigInt::from(falling_factorial_u(stat.get(i), k)));
        }
        num += &weight * f;
        den += weight;
    }
    (!den.is_zero()).then(|| num / den)
}

fn criterion_7() -> Outcome {
    let laws = [
        OffspringDistribution::full_binary(),
        OffspringDistribution::geometric_truncated(rat(1, 2), 3).expect("valid"),
    ];
    let mut q_maps: Vec<BTreeMap<u32, u64>> = vec![BTreeMap::new()];
    for i in 0..=3u32 {
        for j in i..=3u32 {
            for k in j..=3u32 {
                for m in [vec![i], vec![i, j], vec![i, j, k]] {
                    let mut q = BTreeMap::new();
                    for d in m {
                        *q.entry(d).or_insert(0) += 1;
                    }
                    if !q_maps.contains(&q) {
                        q_maps.push(q);
                    }
                }
            }
        }
    }
    let mut cases = 0;
    for law in &laws {
        let table = law.exact_table().map_err(|e| e.to_string())?;
        for n in 1..=12 {
            for q in &q_maps {
                let oracle = conditional_enumeration(&table, n, q);
                match (degree_factorial_moment(law, n, q), oracle) {
                    (Ok(v), Some(o)) if v == o => {}
                    (Err(Error::InfeasibleSize(_)), None) => {}
                    (got, want) => return Err(format!("{law} n={n} q={q:?}: {got:?} vs {want:?}")),
                }
                cases += 1;
            }
        }
    }
    let worked = degree_factorial_moment(&laws[0], 5, &BTreeMap::from([(0, 1)])).map_err(|e| e.to_string())?;
    check(worked == int(3), format!("{cases} cases exact; E n(0) at n=5 full binary = {worked}"))
}

fn criterion_8() -> Outcome {
    let scan = gw_condition_scan(&StatFamily::FullBinary, &PlaneTree::cherry(), &[1_000, 10_000, 100_000], 1.0)
        .map_err(|e| e.to_string())?;
    let devs: Vec<f64> = scan.rows.iter().map(|r| r.max_log_deviation).collect();
    let last = *devs.last().expect("three sizes");
    check(
        scan.strictly_decreasing() && last < 0.05,
        format!("max log-deviations {devs:.5?} (q up to {})", scan.rows.last().expect("rows").q_max),
    )
}

fn criterion_9() -> Outcome {
    let mut corpus = common::law_corpus(909, 100);
    let patterns = common::trees_between(1, 5);
    let mut violations = Vec::new();
    let mut checked = 0u64;
    for p in &corpus {
        for t in patterns.iter().filter(|t| t.size() >= 2) {
            if pi_p(p, t).is_positive() {
                checked += 1;
                if !gamma_p(p, t, t).is_positive() {
                    violations.push(format!("gamma <= 0 for {t} under {p}"));
                }
            }
        }
    }
    corpus.extend([common::point_mass(0), common::point_mass(1)]);
    for p in &corpus {
        for t in &patterns {
            let exceptional = classify_exceptional(t, p) != Exceptional::None;
            if gamma_hat_vanishes(p, t) != exceptional {
                violations.push(format!("gamma_hat taxonomy fails for {t} under {p}"));
            }
        }
    }
    let star = classify_exceptional(&PlaneTree::star(3), &common::point_mass(0)) == Exceptional::StarP0
        && gamma_hat_vanishes(&common::point_mass(0), &PlaneTree::star(3));
    let path = classify_exceptional(&PlaneTree::path(4), &common::point_mass(1)) == Exceptional::PathP1
        && gamma_hat_vanishes(&common::point_mass(1), &PlaneTree::path(4));
    check(
        violations.is_empty() && star && path,
        format!(
            "{checked} positivity cases, {} taxonomy cases, {} violations{}",
            corpus.len() * patterns.len(),
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let small = common::trees_between(1, 4);
    let corpus = common::law_corpus(1010, 10);
    let mut rng = Seed::new(10).rng();
    let mut agree = 0;
    for k in 0..50 {
        let mut f = TollFunction::default();
        for t in &small {
            if rng.random_bool(0.5) {
                f.insert(t.clone(), rat(rng.random_range(-9..=9), rng.random_range(1..=7)));
            }
        }
        let p = if k % 2 == 0 {
            OffspringDistribution::geometric(rat(1, 2)).expect("valid")
        } else {
            corpus[k / 2 % corpus.len()].clone()
        };
        let g = additive_gamma(&p, &f);
        if g.direct.is_exact() && g.direct == g.quadratic {
            agree += 1;
        }
    }
    let leaf = additive_gamma(
        &OffspringDistribution::geometric(rat(1, 2)).expect("valid"),
        &TollFunction::indicator(PlaneTree::leaf()),
    );
    let leaf_zero = leaf.direct.as_exact().is_some_and(Zero::is_zero) && leaf.quadratic.is_zero();

    // Monte Carlo: (F - E F)/sqrt(|n| gamma_p(f)) against N(0,1)
    let mut f = TollFunction::indicator(PlaneTree::cherry());
    f.insert("2,0,2,0,0".parse().expect("valid"), int(3));
    f.insert("2,2,0,0,0".parse().expect("valid"), rat(-2, 1));
    let gamma_f = additive_gamma(&OffspringDistribution::full_binary(), &f).direct.to_f64();
    let stat = StatFamily::FullBinary.statistic(10_001).map_err(|e| e.to_string())?;
    let n = stat.size() as f64;
    let mean: BigRational = f
        .iter()
        .map(|(t, v)| mean_count(&stat, t).map(|m| m * v))
        .sum::<Result<BigRational, _>>()
        .map_err(|e| e.to_string())?;
    let base = Seed::new(8_080);
    let samples: Vec<f64> = (0..2000u64)
        .map(|r| to_f64(&additive_f(&sample_uniform_tree(&stat, base.derive(r)), &f)))
        .collect();
    let scale = (n * gamma_f).sqrt();
    let z: Vec<f64> = samples.iter().map(|x| (x - to_f64(&mean)) / scale).collect();
    let ks = stats::ks_standard_normal(&z);
    let (fast, time) = within_budget(start, Duration::from_secs(600));
    check(
        agree == 50 && leaf_zero && ks < 0.05 && fast,
        format!("{agree}/50 tolls agree exactly; leaf toll gamma = {}; MC KS = {ks:.4} (gamma_f = {gamma_f:.5}); {time}", leaf.direct),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact mean oracle", criterion_1),
        ("joint moment oracle", criterion_2),
        ("sampler uniformity and cycle lemma", criterion_3),
        ("central limit at desk scale", criterion_4),
        ("bounded finite-size gaps", criterion_5),
        ("simply generated equivalents", criterion_6),
        ("degree factorial moments", criterion_7),
        ("factorial moment scan", criterion_8),
        ("positivity taxonomy", criterion_9),
        ("additive functionals", criterion_10),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let label = format!("C{}", k + 1);
        if filter.as_ref().is_some_and(|f| f != &label) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{label} PASS [{name}] {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("{label} FAIL [{name}] {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
