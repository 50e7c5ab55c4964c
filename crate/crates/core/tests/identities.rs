//! Cross-module checks on small instances.

use num_rational::Ratio;

use aplab::counting::DifferenceSequence;
use aplab::group::Group;
use aplab::kimvu::{build_hi, mu_profile, poly_eval, xi_mean_closed_form, xi_mean_exact};
use aplab::report::{run_verify_suite, VerifyOptions};

#[test]
fn verify_suite_passes_and_detects_corruption() {
    let (ok, _) = run_verify_suite(&VerifyOptions { seed: 3, corrupt: false }).unwrap();
    assert!(ok.iter().all(|a| a.pass), "{ok:?}");
    let (bad, results) = run_verify_suite(&VerifyOptions { seed: 3, corrupt: true }).unwrap();
    assert!(bad.iter().any(|a| !a.pass));
    assert!(!results["failures"].as_array().unwrap().is_empty());
}

#[test]
fn xi_mean_closed_form_matches_enumeration() {
    let g = Group::new(11).unwrap();
    let ds = DifferenceSequence::new(g, vec![1, 2, 3, 5, 7]).unwrap();
    for s in 2..=6 {
        assert_eq!(
            xi_mean_closed_form(&ds, 0, &[2, 3, 4], s, 1),
            xi_mean_exact(&ds, 0, &[2, 3, 4], s, 1).unwrap(),
            "s = {s}"
        );
    }
}

#[test]
fn hypergraph_mean_matches_mu_zero() {
    // E[h(x)] under independent Bernoulli(p) equals the zeroth derivative profile
    let g = Group::new(7).unwrap();
    let ds = DifferenceSequence::new(g, vec![1, 3, 2]).unwrap();
    let h = build_hi(&ds, 0, &[1, 2], 1).unwrap();
    let p = Ratio::new(2i128, 5);
    let mut mean = Ratio::from_integer(0i128);
    for bits in 0u32..1 << 7 {
        let x: Vec<bool> = (0..7).map(|v| bits >> v & 1 == 1).collect();
        let ones = bits.count_ones() as i32;
        let weight = p.pow(ones) * (Ratio::from_integer(1) - p).pow(7 - ones);
        mean += weight * Ratio::from_integer(poly_eval(&h, &x).unwrap() as i128);
    }
    assert_eq!(mu_profile(&h, p).unwrap().mu[0], mean);
}
