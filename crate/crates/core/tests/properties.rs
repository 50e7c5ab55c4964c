//! Property tests for the invariants the library promises.

use proptest::prelude::*;

use aplab::counting::{lambda_d, lambda_single, DifferenceSequence, SubsetMask};
use aplab::discrepancy::{signed_objective, verify_cs_pointwise, SignDomain, SignVector};
use aplab::group::{ApParams, Group};
use aplab::intersectivity::is_intersective_exact;
use aplab::kimvu::{poly_eval, HypergraphPoly};
use aplab::matrix::{build_mij, SubsetIndexer, DEFAULT_DIMENSION_CAP};

fn group_and_bits(max_n: usize) -> impl Strategy<Value = (usize, u64)> {
    (1..=max_n).prop_flat_map(|n| (Just(n), 0u64..(1u64 << n)))
}

fn signs(len: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lambda_is_translation_invariant((n, bits) in group_and_bits(20), d in 0usize..20, c in 0usize..20, k in 2usize..6) {
        let g = Group::new(n).unwrap();
        let a = SubsetMask::from_bits(&g, bits);
        let d = d % n;
        prop_assert_eq!(lambda_single(&a, d, k), lambda_single(&a.translate(c % n), d, k));
    }

    #[test]
    fn lambda_is_monotone_in_a((n, bits) in group_and_bits(16), extra in any::<u64>(), d in prop::collection::vec(0usize..16, 1..5)) {
        let g = Group::new(n).unwrap();
        let a = SubsetMask::from_bits(&g, bits);
        let b = SubsetMask::from_bits(&g, bits | (extra & ((1u64 << n) - 1)));
        let ds = DifferenceSequence::new(g, d.iter().map(|x| x % n).collect()).unwrap();
        prop_assert!(lambda_d(&a, &ds, 3).unwrap() <= lambda_d(&b, &ds, 3).unwrap());
    }

    #[test]
    fn intersectivity_is_monotone_in_d(n in prop::sample::select(vec![5usize, 7, 11, 13]), d in prop::collection::vec(0usize..13, 1..4), extra in 0usize..13) {
        let g = Group::new(n).unwrap();
        let params = ApParams::new(3, 0.4).unwrap();
        let ds = DifferenceSequence::new(g, d.iter().map(|x| x % n).collect()).unwrap();
        let more = ds.appended(&[extra % n]).unwrap();
        let a = is_intersective_exact(&ds, &params, 40).unwrap().intersective;
        let b = is_intersective_exact(&more, &params, 40).unwrap().intersective;
        prop_assert!(!a || b);
    }

    #[test]
    fn signed_objective_is_odd_for_odd_k(n in 2usize..14, d in prop::collection::vec(0usize..14, 1..5), seed in any::<u64>(), k in prop::sample::select(vec![3usize, 5, 7])) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ds = DifferenceSequence::new(Group::new(n).unwrap(), d.iter().map(|x| x % n).collect()).unwrap();
        let sigma = SignVector::random(ds.len(), SignDomain::Sequence, &mut rng);
        let z = SignVector::random(n, SignDomain::Group, &mut rng);
        let v = signed_objective(&ds, &sigma, &z, k).unwrap();
        prop_assert_eq!(signed_objective(&ds, &sigma, &z.negated(), k).unwrap(), -v);
    }

    #[test]
    fn cs_pointwise_always_holds(n in 1usize..16, d in prop::collection::vec(0usize..16, 1..6), z in signs(16), s in signs(6), k in prop::sample::select(vec![3usize, 5])) {
        let ds = DifferenceSequence::new(Group::new(n).unwrap(), d.iter().map(|x| x % n).collect()).unwrap();
        let sigma = SignVector::new(s[..ds.len()].to_vec(), SignDomain::Sequence).unwrap();
        let z = SignVector::new(z[..n].to_vec(), SignDomain::Group).unwrap();
        prop_assert!(verify_cs_pointwise(&ds, &sigma, &z, k).unwrap().holds);
    }

    #[test]
    fn colex_rank_roundtrip(n in 1usize..25, s in 0usize..6, r in any::<usize>()) {
        let s = s.min(n);
        let ix = SubsetIndexer::new(n, s, usize::MAX).unwrap();
        let rank = r % ix.total();
        prop_assert_eq!(ix.rank(&ix.unrank(rank)), rank);
    }

    #[test]
    fn embedding_matrices_are_symmetric_and_nonnegative(n in 5usize..12, di in 1usize..12, dj in 1usize..12, s in 2usize..4) {
        let ds = DifferenceSequence::new(Group::new(n).unwrap(), vec![di % n, dj % n]).unwrap();
        let m = build_mij(&ds, 0, 1, s, 1, DEFAULT_DIMENSION_CAP).unwrap();
        prop_assert!(m.matrix.is_symmetric());
        for (a, b, v) in m.matrix.entries() {
            prop_assert!(v > 0);
            let sa = m.indexer.unrank(a);
            let tb = m.indexer.unrank(b);
            let sym = sa.iter().filter(|y| !tb.contains(y)).count() + tb.iter().filter(|y| !sa.contains(y)).count();
            prop_assert_eq!(sym, 4);
        }
    }

    #[test]
    fn hypergraph_polynomial_is_monotone(edges in prop::collection::vec(prop::collection::vec(0usize..8, 1..4), 0..10), x in any::<u8>(), more in any::<u8>()) {
        let mut h = HypergraphPoly::new(8);
        for e in &edges {
            h.add_edge(e, 1).unwrap();
        }
        let lo: Vec<bool> = (0..8).map(|i| x >> i & 1 == 1).collect();
        let hi: Vec<bool> = (0..8).map(|i| (x | more) >> i & 1 == 1).collect();
        prop_assert!(poly_eval(&h, &lo).unwrap() <= poly_eval(&h, &hi).unwrap());
    }
}
