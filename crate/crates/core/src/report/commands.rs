use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use super::verify::{run_verify_suite, VerifyOptions};
use super::{Assertion, RunRecord};
use crate::counting::DifferenceSequence;
use crate::discrepancy::good_set_search;
use crate::error::{Error, Result};
use crate::group::{ApParams, Group};
use crate::intersectivity::{
    decide, default_exact_limit, estimate_critical_size, CriticalSizePolicy, Decision,
};
use crate::kimvu::{
    build_hi, mu_profile, tail_probe, verify_set_vs_bernoulli, xi_mean_closed_form, xi_mean_exact,
    HypergraphPoly, MuProfile, EXACT_SET_LIMIT,
};
use crate::matrix::{
    choose, default_subset_size, khintchine_bench, norm_report, random_symmetric_family,
    SparseMatrix, SpectralOptions,
};
use crate::rng::{substream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every command. Only `seed` enters the payload.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Ledger file; one JSON record is appended per run.
    #[arg(long, default_value = "runs.ledger", global = true)]
    pub out: PathBuf,
    /// Format of the copy printed to stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CriticalSizeArgs {
    #[arg(long)]
    pub modulus: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Trials per probed m.
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long)]
    pub exact_limit: Option<usize>,
    /// Largest m probed; defaults to 8 N.
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub modulus: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Comma-separated differences, each reduced mod N.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub differences: Vec<i64>,
    #[arg(long)]
    pub exact_limit: Option<usize>,
    /// Move budget for the heuristic above the exact limit.
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Negative control: corrupt one matrix entry; the run must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KhintchineArgs {
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KimvuArgs {
    /// Profile of the one-edge polynomial f(x) = x_0 instead of an H_i.
    #[arg(long)]
    pub single_edge: bool,
    /// Bernoulli parameter as `a/b`; defaults to 1/2 for --single-edge and s/N otherwise.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, default_value_t = 31)]
    pub modulus: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Length of the difference sequence.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Subset size; defaults to floor(N^{1-2/k}).
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5,1")]
    pub c_factors: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4.0)]
    pub collision_slack: f64,
    #[arg(long, default_value_t = 100)]
    pub attempts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormDemo {
    Identity,
    Ones,
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NormsArgs {
    #[arg(long, value_enum, default_value_t = NormDemo::Random)]
    pub demo: NormDemo,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
}

fn params(k: usize, epsilon: f64) -> Result<ApParams> {
    ApParams::new(k, epsilon)
}

pub fn cmd_critical_size(args: &CriticalSizeArgs, seed: u64) -> Result<RunRecord> {
    let ap = params(args.k, args.epsilon)?;
    let g = Group::new(args.modulus)?;
    if !(args.confidence > 0.0 && args.confidence < 1.0) {
        return Err(Error::InvalidParameter("confidence must lie in (0, 1)".into()));
    }
    let policy = CriticalSizePolicy {
        trials_per_m: args.trials,
        confidence: args.confidence,
        m_max: args.m_max,
        exact_limit: args.exact_limit.unwrap_or_else(|| default_exact_limit(args.k)),
        ..CriticalSizePolicy::new(args.k)
    };
    let est = estimate_critical_size(&ap, &g, &policy, seed)?;
    let found = est.m_star_hat.is_some();
    let detail = match est.m_star_hat {
        Some(m) => format!("m_star_hat = {m}"),
        None => format!("no m up to {} met the boundary rule", args.m_max.unwrap_or(8 * args.modulus)),
    };
    RunRecord::new("critical-size", args, seed, &est, vec![Assertion::new("boundary-rule-met", found, detail)])
}

pub fn cmd_check(args: &CheckArgs, seed: u64) -> Result<RunRecord> {
    let ap = params(args.k, args.epsilon)?;
    let g = Group::new(args.modulus)?;
    let entries = args.differences.iter().map(|&d| g.reduce(d)).collect();
    let ds = DifferenceSequence::new(g, entries)?;
    let limit = args.exact_limit.unwrap_or_else(|| default_exact_limit(args.k));
    let mut rng = substream(seed, tag::HEURISTIC, 0, 0);
    let results = match decide(&ds, &ap, limit, args.budget, &mut rng)? {
        Decision::Settled(v) => json!({
            "intersective": v.intersective,
            "witness": v.witness.map(|w| w.to_vec()),
            "method": v.method,
            "density_target": ap.density_target(&g),
        }),
        Decision::Inconclusive { best, target } => json!({
            "intersective": null,
            "witness": null,
            "method": "inconclusive",
            "best_apfree": best.to_vec(),
            "density_target": target,
        }),
    };
    RunRecord::new("check", args, seed, &results, vec![])
}

pub fn cmd_verify(args: &VerifyArgs, seed: u64) -> Result<RunRecord> {
    let (assertions, results) = run_verify_suite(&VerifyOptions {
        seed,
        corrupt: args.corrupt,
    })?;
    RunRecord::new("verify", args, seed, &results, assertions)
}

pub fn cmd_khintchine(args: &KhintchineArgs, seed: u64) -> Result<RunRecord> {
    if args.count == 0 || args.trials == 0 {
        return Err(Error::InvalidParameter("count and trials must be positive".into()));
    }
    let mut rng = substream(seed, tag::KHINTCHINE, 1, 0);
    let family = random_symmetric_family(args.dim, args.count, &mut rng);
    let report = khintchine_bench(&family, args.trials, &mut rng)?;
    let a = Assertion::new(
        "every-draw-within-bound",
        report.all_within,
        format!("max ratio {}", super::format_f64(report.max_ratio)),
    );
    RunRecord::new("khintchine", args, seed, &report, vec![a])
}

fn parse_ratio(s: &str) -> Result<Ratio<i128>> {
    let bad = || Error::InvalidParameter(format!("p must look like a/b, got {s:?}"));
    let (a, b) = s.split_once('/').ok_or_else(bad)?;
    let a: i128 = a.trim().parse().map_err(|_| bad())?;
    let b: i128 = b.trim().parse().map_err(|_| bad())?;
    if b == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(a, b))
}

fn profile_json(p: &MuProfile) -> serde_json::Value {
    let show = |r: &Ratio<i128>| json!({"exact": r.to_string(), "value": r.to_f64()});
    json!({
        "p": show(&p.p),
        "mu": p.mu.iter().map(show).collect::<Vec<_>>(),
        "mu_max": show(&p.mu_max),
        "mu_prime": show(&p.mu_prime),
    })
}

pub fn cmd_kimvu(args: &KimvuArgs, seed: u64) -> Result<RunRecord> {
    if args.single_edge {
        let p = parse_ratio(args.p.as_deref().unwrap_or("1/2"))?;
        let mut h = HypergraphPoly::new(1);
        h.add_edge(&[0], 1)?;
        let profile = mu_profile(&h, p)?;
        let ok = profile.mu.len() == 2 && profile.mu[0] == p && profile.mu[1] == Ratio::from_integer(1);
        let a = Assertion::new("single-edge-profile", ok, "mu_0 = p, mu_1 = 1");
        return RunRecord::new("kimvu", args, seed, &json!({"profile": profile_json(&profile)}), vec![a]);
    }
    let ap = params(args.k, 0.5)?;
    let r = ap.half_length()?;
    let g = Group::new(args.modulus)?;
    let n = args.modulus;
    let s = args.s.unwrap_or_else(|| default_subset_size(n, args.k));
    if s == 0 || s >= n {
        return Err(Error::InvalidParameter(format!("subset size s = {s} must lie in [1, N)")));
    }
    let p = match &args.p {
        Some(text) => parse_ratio(text)?,
        None => Ratio::new(s as i128, n as i128),
    };
    let mut rng = substream(seed, tag::KIMVU, 3, 0);
    let good = good_set_search(args.m, &ap, &g, &mut rng, args.attempts, args.collision_slack)?;
    let ds = &good.sequence;
    let i = good.partition.left().first().copied().unwrap_or(0);
    let right = good.partition.right();
    let h = build_hi(ds, i, right, r)?;
    let profile = mu_profile(&h, p)?;
    let mut probes = Vec::new();
    for &c in &args.c_factors {
        let mut local = substream(seed, tag::KIMVU, 4, 0);
        probes.push(tail_probe(&h, s, p, c, args.trials, &mut local)?);
    }
    let mut assertions = Vec::new();
    let monotone = probes.windows(2).all(|w| w[0].c_factor > w[1].c_factor || w[0].fraction >= w[1].fraction);
    assertions.push(Assertion::new("tail-monotone-in-c", monotone, format!("{} factors", probes.len())));
    let xi = if choose(n, s) <= EXACT_SET_LIMIT {
        let exact = xi_mean_exact(ds, i, right, s, r)?;
        let closed = xi_mean_closed_form(ds, i, right, s, r);
        assertions.push(Assertion::new("xi-mean-closed-form", exact == closed, format!("{exact} vs {closed}")));
        json!({"exact": exact.to_string(), "closed_form": closed.to_string(), "value": exact.to_f64()})
    } else {
        json!(null)
    };
    let mut local = substream(seed, tag::KIMVU, 5, 0);
    let set_vs = match verify_set_vs_bernoulli(&h, s, p, args.trials, &mut local) {
        Ok(c) => {
            assertions.push(Assertion::new("set-vs-bernoulli", c.holds, format!("E_S f = {}", super::format_f64(c.set_mean))));
            serde_json::to_value(&c)?
        }
        Err(Error::Precondition(why)) => json!({"skipped": why}),
        Err(e) => return Err(e),
    };
    let results = json!({
        "differences": ds.entries(),
        "left": good.partition.left(),
        "right": right,
        "i": i,
        "s": s,
        "edges": h.edge_count(),
        "profile": profile_json(&profile),
        "tail": probes,
        "xi_mean": xi,
        "set_vs_bernoulli": set_vs,
    });
    RunRecord::new("kimvu", args, seed, &results, assertions)
}

pub fn cmd_norms(args: &NormsArgs, seed: u64) -> Result<RunRecord> {
    let d = args.dim;
    if d == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    let m = match args.demo {
        NormDemo::Identity => SparseMatrix::identity(d),
        NormDemo::Ones => SparseMatrix::from_dense(&vec![vec![1; d]; d]),
        NormDemo::Random => {
            use rand::Rng;
            let mut rng = substream(seed, tag::NORMS, 1, 0);
            let mut m = SparseMatrix::zeros(d);
            for i in 0..d {
                for j in i..d {
                    let v = rng.random_range(-3..=3);
                    m.add(i, j, v);
                    if i != j {
                        m.add(j, i, v);
                    }
                }
            }
            m
        }
    };
    let opts = SpectralOptions {
        seed,
        ..SpectralOptions::default()
    };
    let report = norm_report(&m, &opts)?;
    let a = Assertion::new("simple-inequalities", report.simple_inequalities_hold(m.is_symmetric()), "inf-to-1 <= d * spectral, spectral <= one-to-one");
    RunRecord::new("norms", args, seed, &report, vec![a])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_examples() {
        let base = CheckArgs {
            modulus: 5,
            k: 3,
            epsilon: 0.6,
            differences: vec![1],
            exact_limit: None,
            budget: 1000,
        };
        let r = cmd_check(&base, 0).unwrap();
        assert_eq!(r.results["intersective"], false);
        assert_eq!(r.results["witness"], json!([0, 1, 3]));
        let r = cmd_check(&CheckArgs { differences: vec![0], ..base.clone() }, 0).unwrap();
        assert_eq!(r.results["intersective"], true);
        let r = cmd_check(&CheckArgs { differences: vec![1, 2, 3, 4], ..base }, 0).unwrap();
        assert_eq!(r.results["intersective"], true);
    }

    #[test]
    fn norms_identity() {
        let r = cmd_norms(&NormsArgs { demo: NormDemo::Identity, dim: 8 }, 0).unwrap();
        assert!((r.results["spectral"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.results["inf_to_1"]["value"], 8);
        assert_eq!(r.results["one_to_one"], 1);
        assert!(r.all_pass());
    }

    #[test]
    fn kimvu_single_edge() {
        let args = KimvuArgs {
            single_edge: true,
            p: None,
            modulus: 31,
            k: 3,
            m: 6,
            s: None,
            c_factors: vec![],
            trials: 10,
            collision_slack: 4.0,
            attempts: 10,
        };
        let r = cmd_kimvu(&args, 0).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.results["profile"]["mu"][0]["exact"], "1/2");
        assert_eq!(r.results["profile"]["mu"][1]["exact"], "1");
    }

    #[test]
    fn kimvu_hi_run() {
        let args = KimvuArgs {
            single_edge: false,
            p: None,
            modulus: 31,
            k: 3,
            m: 6,
            s: None,
            c_factors: vec![0.05, 0.5],
            trials: 200,
            collision_slack: 4.0,
            attempts: 100,
        };
        let r = cmd_kimvu(&args, 0).unwrap();
        assert!(r.all_pass(), "{:?}", r.assertions);
        assert_eq!(r.results["s"], 3);
        assert!(r.results["set_vs_bernoulli"]["skipped"].is_string());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("3/31").unwrap(), Ratio::new(3, 31));
        assert!(parse_ratio("0.5").is_err());
        assert!(parse_ratio("1/0").is_err());
    }
}
