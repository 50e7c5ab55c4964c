use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::Assertion;
use crate::counting::DifferenceSequence;
use crate::discrepancy::{
    multilinear_dominance, verify_cs_pointwise, symmetrization_check, IndexPartition, SignDomain,
    SignVector,
};
use crate::error::Result;
use crate::group::{is_good_pair, Group};
use crate::matrix::{
    build_mij, lift, norm_report, pairs_per_point, support_sign_sum, verify_lower_bound_chain,
    SparseMatrix, SpectralOptions, DEFAULT_DIMENSION_CAP,
};
use crate::rng::{substream, tag, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negative control: perturbs one embedding-matrix entry so the identity
    /// check must fail.
    pub corrupt: bool,
}

struct Tally {
    name: &'static str,
    passed: usize,
    total: usize,
    failures: Vec<Value>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, replay: impl FnOnce() -> Value) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 5 {
            let mut blob = replay();
            blob["check"] = json!(self.name);
            self.failures.push(blob);
        }
    }

    fn assertion(&self) -> Assertion {
        Assertion::new(
            self.name,
            self.total > 0 && self.passed == self.total,
            format!("{}/{} instances", self.passed, self.total),
        )
    }
}

fn random_sequence(rng: &mut Stream, n: usize, m: usize) -> Result<DifferenceSequence> {
    let entries = (0..m).map(|_| rng.random_range(0..n)).collect();
    DifferenceSequence::new(Group::new(n)?, entries)
}

fn mstz(opts: &VerifyOptions) -> Result<Tally> {
    let mut t = Tally::new("mstz-identity");
    let mut rng = substream(opts.seed, tag::VERIFY, 1, 0);
    let (n, s, r) = (11, 2, 1);
    let mut corrupted = false;
    for _ in 0..5 {
        let ds = random_sequence(&mut rng, n, 4)?;
        let g = *ds.group();
        for i in 0..4 {
            for j in i + 1..4 {
                let (di, dj) = (ds.entries()[i], ds.entries()[j]);
                if !is_good_pair(&g, di, dj, r) {
                    continue;
                }
                let mut m = build_mij(&ds, i, j, s, r, DEFAULT_DIMENSION_CAP)?;
                if opts.corrupt && !corrupted {
                    let (a, b, _) = m.matrix.entries().next().expect("good pair gives entries");
                    m.matrix.add(a, b, 1);
                    corrupted = true;
                }
                for _ in 0..5 {
                    let z = SignVector::random(n, SignDomain::Group, &mut rng);
                    let lifted = lift(&z, &m.indexer);
                    let lhs = m.matrix.bilinear(&lifted, &lifted);
                    let rhs = pairs_per_point(n, s, r) as i128 * support_sign_sum(&g, di, dj, r, &z) as i128;
                    t.record(lhs == rhs, || {
                        json!({"modulus": n, "differences": ds.entries(), "i": i, "j": j, "s": s, "r": r,
                               "z": z.entries(), "lhs": lhs.to_string(), "rhs": rhs.to_string(),
                               "corrupted": opts.corrupt})
                    });
                }
            }
        }
    }
    Ok(t)
}

fn cs_pointwise(opts: &VerifyOptions) -> Result<Tally> {
    let mut t = Tally::new("cs-pointwise");
    let mut rng = substream(opts.seed, tag::VERIFY, 2, 0);
    for _ in 0..200 {
        let n = rng.random_range(3..=16);
        let m = rng.random_range(1..=5);
        let k = if rng.random::<bool>() { 3 } else { 5 };
        let ds = random_sequence(&mut rng, n, m)?;
        let sigma = SignVector::random(m, SignDomain::Sequence, &mut rng);
        let z = SignVector::random(n, SignDomain::Group, &mut rng);
        let c = verify_cs_pointwise(&ds, &sigma, &z, k)?;
        t.record(c.holds, || {
            json!({"modulus": n, "differences": ds.entries(), "k": k, "sigma": sigma.entries(), "z": z.entries()})
        });
    }
    Ok(t)
}

fn dominance(opts: &VerifyOptions) -> Result<Tally> {
    let mut t = Tally::new("multilinear-dominance");
    let mut rng = substream(opts.seed, tag::VERIFY, 3, 0);
    for _ in 0..20 {
        let n = [5, 7, 9, 11][rng.random_range(0..4)];
        let m = rng.random_range(1..=3);
        let ds = random_sequence(&mut rng, n, m)?;
        let sigma = SignVector::random(m, SignDomain::Sequence, &mut rng);
        let c = multilinear_dominance(&ds, &sigma, 3)?;
        t.record(c.holds, || json!({"modulus": n, "differences": ds.entries(), "k": 3, "sigma": sigma.entries()}));
    }
    Ok(t)
}

fn random_symmetric(rng: &mut Stream, d: usize) -> SparseMatrix {
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

fn norms(opts: &VerifyOptions) -> Result<Tally> {
    let mut t = Tally::new("norm-inequalities");
    let mut rng = substream(opts.seed, tag::VERIFY, 4, 0);
    let spectral = SpectralOptions {
        seed: opts.seed,
        ..SpectralOptions::default()
    };
    for _ in 0..30 {
        let d = rng.random_range(2..=12);
        let m = random_symmetric(&mut rng, d);
        let report = norm_report(&m, &spectral)?;
        t.record(report.simple_inequalities_hold(true), || {
            json!({"entries": m.entries().map(|(i, j, v)| [i as i64, j as i64, v]).collect::<Vec<_>>(), "dim": d})
        });
    }
    Ok(t)
}

fn chain(opts: &VerifyOptions) -> Result<Tally> {
    let mut t = Tally::new("lower-bound-chain");
    let mut rng = substream(opts.seed, tag::VERIFY, 5, 0);
    let spectral = SpectralOptions {
        seed: opts.seed,
        ..SpectralOptions::default()
    };
    for (n, count) in [(7, 4), (11, 2)] {
        for _ in 0..count {
            let m = rng.random_range(2..=3);
            let ds = random_sequence(&mut rng, n, m)?;
            let part = IndexPartition::random_balanced(m, &mut rng);
            let sigma = SignVector::random(part.left().len(), SignDomain::Left, &mut rng);
            let tau = SignVector::random(part.right().len(), SignDomain::Right, &mut rng);
            let z = SignVector::random(n, SignDomain::Group, &mut rng);
            let c = verify_lower_bound_chain(&ds, &part, &sigma, &tau, 2, 1, &z, DEFAULT_DIMENSION_CAP, &spectral)?;
            t.record(c.holds(), || {
                json!({"modulus": n, "differences": ds.entries(), "left": part.left(), "right": part.right(),
                       "sigma": sigma.entries(), "tau": tau.entries(), "z": z.entries(), "s": 2, "r": 1})
            });
        }
    }
    Ok(t)
}

fn symmetrization() -> Result<Tally> {
    let mut t = Tally::new("symmetrization");
    let g = Group::new(5)?;
    for m in [1, 2] {
        let rep = symmetrization_check(&g, m, 3)?;
        t.record(rep.holds, || json!({"modulus": 5, "m": m, "k": 3, "lhs": rep.lhs.to_string(), "rhs": rep.rhs.to_string()}));
    }
    Ok(t)
}

/// Runs every identity and inequality on a fixed seeded grid. Returns the
/// per-check assertions and a results object holding counts and replay
/// blobs for failing instances.
pub fn run_verify_suite(opts: &VerifyOptions) -> Result<(Vec<Assertion>, Value)> {
    let tallies = [
        mstz(opts)?,
        cs_pointwise(opts)?,
        dominance(opts)?,
        norms(opts)?,
        chain(opts)?,
        symmetrization()?,
    ];
    let assertions = tallies.iter().map(Tally::assertion).collect();
    let results = json!({
        "checks": tallies.iter().map(|t| json!({"name": t.name, "passed": t.passed, "total": t.total})).collect::<Vec<_>>(),
        "failures": tallies.iter().flat_map(|t| t.failures.clone()).collect::<Vec<_>>(),
    });
    Ok((assertions, results))
}
