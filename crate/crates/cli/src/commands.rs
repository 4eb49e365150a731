use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fringelab::asymptotics::{
    additive_gamma, classify_exceptional, degree_cov, gamma_hat, gamma_hat_matrix, gamma_matrix,
    gw_equivalents, gw_fringe_cov, pi_p, pi_theta, Regime, TollFunction,
};
use fringelab::harness::{gw_condition_scan, run_experiment, with_workers};
use fringelab::moments::{degree_factorial_moment, exact_variance, joint_factorial_moment, mean_count};
use fringelab::rational::{format_rational, to_f64};
use fringelab::sampling::{sample_conditioned_gw, sample_labelled, sample_uniform_tree};
use fringelab::tree::{all_degree_statistics, canonical_unordered, enumerate_trees_capped};
use fringelab::{asymptotics::mu_n, CovMatrix, DegreeSequence, ExperimentConfig, PlaneTree, Seed, StatFamily};
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::error::{usage, CliError};

type Result<T> = std::result::Result<T, CliError>;

const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;
const DEFAULT_ENUMERATION_LIMIT: usize = 100_000;

/// What a subcommand produced, before rendering.
struct Output {
    command: &'static str,
    config: Value,
    result: Value,
    lines: Vec<String>,
    csv: Vec<String>,
}

impl Output {
    fn new(command: &'static str, config: &impl Serialize, result: Value) -> Result<Self> {
        Ok(Output { command, config: serde_json::to_value(config)?, result, lines: Vec::new(), csv: Vec::new() })
    }

    fn render(&self, format: Format) -> Result<String> {
        let header = || format!("# fringelab {} {}\n", self.command, self.config);
        Ok(match format {
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": self.config,
                    "result": self.result,
                });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
            Format::Text => header() + &join_lines(&self.lines),
            Format::Csv => header() + &join_lines(if self.csv.is_empty() { &self.lines } else { &self.csv }),
        })
    }
}

fn join_lines(lines: &[String]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}

fn rational(x: &BigRational) -> Value {
    Value::String(format_rational(x))
}

/// Text-mode rendering: integers without a denominator.
fn plain(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format_rational(x)
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Merge a JSON config file under the flags: a flag that was given wins,
/// anything else falls back to the file.
fn resolve<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(flags) };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let Value::Object(mut base) =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
    else {
        return Err(usage(format!("config {} must hold a JSON object", path.display())));
    };
    let Value::Object(given) = serde_json::to_value(&flags)? else { unreachable!("options are structs") };
    for (k, v) in given {
        let unset = v.is_null() || v == Value::Bool(false) || v.as_array().is_some_and(Vec::is_empty);
        if !unset || !base.contains_key(&k) {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

fn emit(out: &Output, format: Format, path: Option<&PathBuf>) -> Result<()> {
    let text = out.render(format)?;
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write { path: p.display().to_string(), source }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write { path: "stdout".into(), source })
        }
    }
}

fn read_patterns(inline: &[PlaneTree], file: Option<&PathBuf>) -> Result<Vec<PlaneTree>> {
    let mut out = inline.to_vec();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            out.push(line.parse()?);
        }
    }
    Ok(out)
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Sample(a) => sample(a),
        Command::Count(a) => count(a),
        Command::Moments(a) => moments(a),
        Command::Asymptotics(a) => asymptotics(a),
        Command::Experiment(a) => experiment(a),
        Command::CheckGw(a) => check_gw(a),
        Command::Enumerate(a) => enumerate(a),
    }
}

fn sample(a: SampleArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    o.reps.get_or_insert(1);
    o.seed.get_or_insert(0);
    let format = *o.format.get_or_insert_with(Format::default);
    let (reps, seed) = (o.reps.unwrap_or(1), Seed::new(o.seed.unwrap_or(0)));
    let modes = [o.stat.is_some(), !o.dseq.is_empty(), o.p.is_some()];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(usage("give exactly one of --stat, --dseq or --p"));
    }
    let mut out = Output::new("sample", &o, Value::Null)?;
    if let Some(stat) = &o.stat {
        let trees: Vec<PlaneTree> = (0..reps).map(|r| sample_uniform_tree(stat, seed.derive(r))).collect();
        out.lines = trees.iter().map(ToString::to_string).collect();
        out.result = json!({ "trees": trees });
    } else if !o.dseq.is_empty() {
        let dseq = DegreeSequence::new(o.dseq.clone())?;
        let trees: Vec<_> = (0..reps).map(|r| sample_labelled(&dseq, seed.derive(r))).collect();
        let parents: Vec<Vec<u32>> = trees.iter().map(|t| t.parent_array()).collect();
        out.lines = parents.iter().map(|p| p.iter().map(u32::to_string).collect::<Vec<_>>().join(",")).collect();
        out.result = json!({
            "trees": trees.iter().zip(&parents).map(|(t, p)| json!({
                "tree": t.tree, "labels": t.labels, "parents": p,
            })).collect::<Vec<_>>(),
        });
    } else if let Some(p) = &o.p {
        let n = o.n.ok_or_else(|| usage("--p needs --n"))?;
        let budget = *o.max_attempts.get_or_insert(DEFAULT_MAX_ATTEMPTS);
        out.config = serde_json::to_value(&o)?;
        let trees = (0..reps)
            .map(|r| sample_conditioned_gw(p, n, seed.derive(r), budget))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        out.lines = trees.iter().map(ToString::to_string).collect();
        out.result = json!({ "trees": trees });
    }
    emit(&out, format, a.io.out.as_ref())
}

fn count(a: CountArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    let format = *o.format.get_or_insert_with(Format::default);
    let mut out = Output::new("count", &o, Value::Null)?;
    match (&o.stat, &o.tree) {
        (Some(stat), None) => {
            let n = stat.count_trees().to_string();
            out.lines = vec![n.clone()];
            out.result = json!({ "statistic": stat, "size": stat.size(), "count": n });
        }
        (None, Some(tree)) => {
            let counts: Vec<(PlaneTree, u64)> = if o.pattern.is_empty() {
                tree.fringe_counts().into_iter().collect()
            } else {
                o.pattern.iter().map(|p| (p.clone(), tree.count_fringe(p))).collect()
            };
            out.lines = if o.pattern.len() == 1 {
                vec![counts[0].1.to_string()]
            } else {
                counts.iter().map(|(p, c)| format!("{c}\t{p}")).collect()
            };
            out.csv = std::iter::once("pattern,count".to_string())
                .chain(counts.iter().map(|(p, c)| format!("{},{c}", csv_quote(&p.to_string()))))
                .collect();
            out.result = json!({
                "tree": tree,
                "counts": counts.iter().map(|(p, c)| json!({ "pattern": p, "count": c })).collect::<Vec<_>>(),
            });
        }
        _ => return Err(usage("give exactly one of --stat or --tree")),
    }
    emit(&out, format, a.io.out.as_ref())
}

fn parse_degree_q(pairs: &[String]) -> Result<BTreeMap<u32, u64>> {
    let mut q = BTreeMap::new();
    for pair in pairs {
        let (i, k) = pair.split_once('=').ok_or_else(|| usage(format!("--degree-q entry {pair:?} is not DEGREE=ORDER")))?;
        let i: u32 = i.trim().parse().map_err(|_| usage(format!("bad degree in {pair:?}")))?;
        let k: u64 = k.trim().parse().map_err(|_| usage(format!("bad order in {pair:?}")))?;
        *q.entry(i).or_insert(0) += k;
    }
    Ok(q)
}

fn moments(a: MomentsArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    let format = *o.format.get_or_insert_with(Format::default);
    if let Some(w) = &o.w {
        if o.stat.is_some() || !o.pattern.is_empty() {
            return Err(usage("--w computes degree moments; do not combine it with --stat or --pattern"));
        }
        let n = o.n.ok_or_else(|| usage("--w needs --n"))?;
        let q = parse_degree_q(&o.degree_q)?;
        let value = degree_factorial_moment(w, n, &q)?;
        let mut out = Output::new("moments", &o, json!({ "moment": rational(&value), "approx": to_f64(&value) }))?;
        out.lines = vec![plain(&value)];
        return emit(&out, format, a.io.out.as_ref());
    }
    let stat = o.stat.clone().ok_or_else(|| usage("missing --stat (or --w with --n)"))?;
    let patterns = read_patterns(&o.pattern, o.patterns.as_ref())?;
    if patterns.is_empty() {
        return Err(usage("give at least one --pattern"));
    }
    if o.q.is_empty() {
        o.q = vec![1; patterns.len()];
    }
    if o.q.len() != patterns.len() {
        return Err(usage(format!("{} orders given for {} patterns", o.q.len(), patterns.len())));
    }
    let value = joint_factorial_moment(&stat, &patterns, &o.q)?;
    let mut result = json!({ "patterns": patterns, "q": o.q, "moment": rational(&value), "approx": to_f64(&value) });
    let mut lines = vec![plain(&value)];
    let mut csv = vec!["pattern,mean,variance,mu_n".to_string()];
    if o.variance {
        let mut rows = Vec::new();
        for t in &patterns {
            let (mean, var, mu) = (mean_count(&stat, t)?, exact_variance(&stat, t)?, mu_n(&stat, t));
            lines.push(format!("{t}\tmean={}\tvariance={}\tmu_n={}", plain(&mean), plain(&var), plain(&mu)));
            csv.push(format!("{},{},{},{}", csv_quote(&t.to_string()), format_rational(&mean), format_rational(&var), format_rational(&mu)));
            rows.push(json!({ "pattern": t, "mean": rational(&mean), "variance": rational(&var), "mu_n": rational(&mu) }));
        }
        result["per_pattern"] = Value::Array(rows);
    }
    let mut out = Output::new("moments", &o, result)?;
    out.lines = lines;
    if o.variance {
        out.csv = csv;
    }
    emit(&out, format, a.io.out.as_ref())
}

fn matrix_lines(name: &str, m: &CovMatrix, lines: &mut Vec<String>, csv: &mut Vec<String>) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            lines.push(format!("{name}[{} | {}] = {}", m.labels[i], m.labels[j], m.get(i, j)));
            csv.push(format!("{name},{},{},{}", csv_quote(&m.labels[i]), csv_quote(&m.labels[j]), m.get(i, j)));
        }
    }
    lines.push(format!("{name} min eigenvalue = {:e}", m.min_eigenvalue()));
}

fn matrix_json(m: &CovMatrix) -> Result<Value> {
    let mut v = serde_json::to_value(m)?;
    v["min_eigenvalue"] = json!(m.min_eigenvalue());
    v["determinant"] = json!(m.determinant());
    Ok(v)
}

fn asymptotics(a: AsymptoticsArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    let format = *o.format.get_or_insert_with(Format::default);
    let patterns = read_patterns(&o.pattern, o.patterns.as_ref())?;
    let mut lines = Vec::new();
    let mut csv = vec!["quantity,row,col,value".to_string()];
    let mut result = Map::new();
    match (&o.p, &o.w) {
        (Some(p), None) => {
            if patterns.is_empty() && o.toll.is_none() {
                return Err(usage("give --pattern, --patterns or --toll"));
            }
            let mut rows = Vec::new();
            for t in &patterns {
                let pi = pi_p(p, t);
                let exceptional = classify_exceptional(t, p);
                let hat = gamma_hat(p, t, t);
                lines.push(format!("pi[{t}] = {pi}"));
                csv.push(format!("pi,{},,{pi}", csv_quote(&t.to_string())));
                rows.push(json!({
                    "pattern": t,
                    "unordered": canonical_unordered(t).to_string(),
                    "pi": pi,
                    "exceptional": exceptional,
                    "gamma_hat": hat,
                }));
            }
            result.insert("law".into(), serde_json::to_value(p)?);
            if !patterns.is_empty() {
                let g = gamma_matrix(p, &patterns)?;
                let h = gamma_hat_matrix(p, &patterns)?;
                matrix_lines("gamma", &g, &mut lines, &mut csv);
                matrix_lines("gamma_hat", &h, &mut lines, &mut csv);
                result.insert("patterns".into(), Value::Array(rows));
                result.insert("gamma".into(), matrix_json(&g)?);
                result.insert("gamma_hat".into(), matrix_json(&h)?);
            }
            if let Some(path) = &o.toll {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                let f: TollFunction = serde_json::from_str(&text).map_err(|e| usage(format!("toll {}: {e}", path.display())))?;
                let g = additive_gamma(p, &f);
                lines.push(format!("gamma(f) = {}", g.direct));
                csv.push(format!("gamma_f,,,{}", g.direct));
                result.insert("additive".into(), json!({ "toll": f, "gamma": g, "formulas_agree": g.agree() }));
            }
        }
        (None, Some(w)) => {
            let regime: Regime = o.regime.unwrap_or(RegimeArg::Auto).into();
            let eq = gw_equivalents(w)?;
            lines.push(format!("tau = {}", eq.tau));
            lines.push(format!("sigma2 = {}", eq.sigma2.render()));
            lines.push(format!("varsigma2 = {}", eq.varsigma2.render()));
            for (i, th) in eq.theta.iter().enumerate().filter(|(_, t)| !t.is_zero()).take(16) {
                lines.push(format!("theta[{i}] = {th}"));
                csv.push(format!("theta,{i},,{th}"));
            }
            result.insert("weights".into(), serde_json::to_value(w)?);
            result.insert("equivalents".into(), serde_json::to_value(&*eq)?);
            if !patterns.is_empty() {
                let pis: Vec<Value> = patterns.iter().map(|t| json!({ "pattern": t, "pi": pi_theta(&eq, t) })).collect();
                let cov = gw_fringe_cov(w, &patterns, regime)?;
                matrix_lines("fringe_cov", &cov, &mut lines, &mut csv);
                result.insert("patterns".into(), Value::Array(pis));
                result.insert("fringe_cov".into(), matrix_json(&cov)?);
            }
            if let Some(k) = o.degrees {
                let cov = degree_cov(w, k, regime)?;
                matrix_lines("degree_cov", &cov, &mut lines, &mut csv);
                result.insert("degree_cov".into(), matrix_json(&cov)?);
            }
        }
        _ => return Err(usage("give exactly one of --p or --w")),
    }
    let mut out = Output::new("asymptotics", &o, Value::Object(result))?;
    out.lines = lines;
    out.csv = csv;
    emit(&out, format, a.io.out.as_ref())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let path = a.io.config.as_ref().ok_or_else(|| usage("experiment needs --config FILE"))?;
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    if !a.sizes.is_empty() {
        cfg.sizes = a.sizes.clone();
    }
    if let Some(r) = a.reps {
        cfg.replicates = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = Seed::new(s);
    }
    let format = a.io.format.unwrap_or(Format::Json);
    cfg.export_samples |= a.samples.is_some() || format == Format::Csv;
    cfg.validate()?;
    let report = with_workers(|| run_experiment(&cfg))?;
    if let Some(p) = &a.samples {
        fs::write(p, report.samples_csv()).map_err(|source| CliError::Write { path: p.display().to_string(), source })?;
    }
    let mut lines = Vec::new();
    for s in &report.sizes {
        for p in &s.patterns {
            lines.push(format!(
                "size {} pattern {}: Var/|n| = {:.6} (limit {:.6}), KS = {}",
                s.size,
                p.pattern,
                p.variance_over_size,
                p.limit_gamma,
                p.normality.map_or("n/a".into(), |n| format!("{:.4}", n.ks)),
            ));
        }
    }
    for v in report.all_verdicts() {
        lines.push(format!(
            "{} {} observed={:.6} expected={:.6} tolerance={:.6}",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            v.observed,
            v.expected,
            v.tolerance
        ));
    }
    lines.push(format!("overall {}", if report.pass { "PASS" } else { "FAIL" }));
    let mut out = Output::new("experiment", &cfg, serde_json::to_value(&report)?)?;
    out.lines = lines;
    out.csv = report.samples_csv().lines().map(str::to_string).collect();
    emit(&out, format, a.io.out.as_ref())
}

fn check_gw(a: CheckGwArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    let format = *o.format.get_or_insert_with(Format::default);
    let family = o.family.get_or_insert(StatFamily::FullBinary).clone();
    let c = *o.c.get_or_insert(1.0);
    let pattern = o.pattern.clone().ok_or_else(|| usage("missing --pattern"))?;
    if o.sizes.is_empty() {
        return Err(usage("missing --sizes"));
    }
    let scan = with_workers(|| gw_condition_scan(&family, &pattern, &o.sizes, c))?;
    let mut out = Output::new("check-gw", &o, serde_json::to_value(&scan)?)?;
    out.result["strictly_decreasing"] = json!(scan.strictly_decreasing());
    out.lines = scan
        .rows
        .iter()
        .map(|r| format!("size {} mu {:.4} q_max {} max_log_deviation {:.6e}", r.size, r.mu, r.q_max, r.max_log_deviation))
        .collect();
    out.lines.push(format!("strictly decreasing: {}", scan.strictly_decreasing()));
    out.csv = std::iter::once("size,mu,sigma,q_max,max_log_deviation".to_string())
        .chain(scan.rows.iter().map(|r| format!("{},{:?},{:?},{},{:?}", r.size, r.mu, r.sigma, r.q_max, r.max_log_deviation)))
        .collect();
    emit(&out, format, a.io.out.as_ref())
}

fn enumerate(a: EnumerateArgs) -> Result<()> {
    let mut o = a.opts;
    o.format = a.io.format;
    let mut o = resolve(o, a.io.config.as_deref())?;
    let format = *o.format.get_or_insert_with(Format::default);
    let limit = *o.limit.get_or_insert(DEFAULT_ENUMERATION_LIMIT);
    let stats = match (&o.stat, o.size) {
        (Some(stat), None) => vec![stat.clone()],
        (None, Some(k)) => all_degree_statistics(k),
        _ => return Err(usage("give exactly one of --stat or --size")),
    };
    let total: num_bigint::BigUint = stats.iter().map(|s| s.count_trees()).sum();
    if total > num_bigint::BigUint::from(limit) {
        return Err(usage(format!("{total} trees exceed --limit {limit}")));
    }
    let mut trees = Vec::new();
    for stat in &stats {
        trees.extend(enumerate_trees_capped(stat, usize::MAX)?);
    }
    trees.sort();
    let mut out = Output::new("enumerate", &o, json!({ "count": trees.len(), "trees": trees }))?;
    out.lines = trees.iter().map(ToString::to_string).collect();
    emit(&out, format, a.io.out.as_ref())
}
