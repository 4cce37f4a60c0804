use std::collections::BTreeSet;
use std::sync::Arc;

use mcg_core::coding::{chi, chi_dagger, BitStream};
use mcg_core::inj::Injection;
use mcg_core::orders::OrderContext;
use mcg_core::periodic::{random_equal_word, random_word, run_glue, substitute, APerm, FilePartition, PartialInj};
use mcg_core::tower::{Tower, TowerConfig};
use mcg_core::words::{OmegaWord, SeedTriple, Sign};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite_stream() -> impl Strategy<Value = BitStream> {
    proptest::collection::btree_set(0usize..24, 0..5).prop_map(|s| BitStream::from_ones(&s.into_iter().collect::<Vec<_>>()))
}

fn omega_word(max_len: usize) -> impl Strategy<Value = OmegaWord> {
    let letter = (finite_stream(), finite_stream(), finite_stream(), any::<bool>())
        .prop_map(|(x, d0, d1, s)| (Arc::new(SeedTriple::new(x, d0, d1)), if s { Sign::Pos } else { Sign::Neg }));
    proptest::collection::vec(letter, 0..max_len).prop_map(OmegaWord::new)
}

fn tower() -> Tower {
    Tower::new(TowerConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_stays_in_the_interval(w in omega_word(4), p in 0u64..4000) {
        let t = tower();
        let p = BigUint::from(p);
        let q = t.eval_e(&w, &p).unwrap();
        prop_assert_eq!(t.interval_of(&p).unwrap(), t.interval_of(&q).unwrap());
    }

    #[test]
    fn eval_is_a_homomorphism(v in omega_word(3), w in omega_word(3), p in 0u64..4000) {
        let t = tower();
        let p = BigUint::from(p);
        let direct = t.eval_e(&v.mul(&w), &p).unwrap();
        let stepwise = t.eval_e(&v, &t.eval_e(&w, &p).unwrap()).unwrap();
        prop_assert_eq!(direct, stepwise);
        prop_assert_eq!(t.eval_e(&w.inverse(), &t.eval_e(&w, &p).unwrap()).unwrap(), p);
    }

    #[test]
    fn chi_dagger_inverts_chi(h in proptest::collection::btree_set(0u64..40, 0..10), shuffle in any::<u64>()) {
        let mut h: Vec<u64> = h.into_iter().collect();
        let n = h.len().max(1);
        h.rotate_left((shuffle as usize) % n);
        let x = chi(&h);
        prop_assert_eq!(chi_dagger(&x), h);
        let ones: Vec<usize> = (0..x.len()).filter(|&i| x.get(i)).collect();
        let gaps: Vec<usize> = ones.windows(2).map(|p| p[1] - p[0]).collect();
        prop_assert_eq!(gaps.iter().collect::<BTreeSet<_>>().len(), gaps.len());
    }

    #[test]
    fn glue_invariants_on_random_partitions(cuts in proptest::collection::vec(1u64..6, 1..40), steps in 1usize..120) {
        let mut text = String::new();
        let mut next = 0;
        for c in cuts {
            let block: Vec<String> = (next..next + c).map(|p| p.to_string()).collect();
            text.push_str(&block.join(" "));
            text.push('\n');
            next += c;
        }
        let mut src = FilePartition::parse(&text).unwrap();
        let (h, rep) = run_glue(&mut src, steps, 1 << 32).unwrap();
        prop_assert!(rep.ok());
        prop_assert_eq!(h.len(), steps);
        let dom: BTreeSet<u64> = h.pairs().map(|(a, _)| a).collect();
        let range: BTreeSet<u64> = h.pairs().map(|(_, b)| b).collect();
        prop_assert_eq!((dom.len(), range.len()), (steps, steps));
    }

    #[test]
    fn partial_inj_rejects_reused_points(pairs in proptest::collection::vec((0u64..20, 0u64..20), 0..30)) {
        let mut h = PartialInj::new();
        let mut ok = vec![];
        for (a, b) in pairs {
            let taken = ok.iter().any(|&(x, y)| x == a || y == b);
            prop_assert_eq!(h.insert(a, b).is_err(), taken);
            if !taken {
                ok.push((a, b));
            }
        }
        prop_assert_eq!(h.len(), ok.len());
    }

    #[test]
    fn substitute_respects_free_product_equality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = 64;
        let shift: Vec<u64> = (0..window).map(|p| (p + 5) % window).collect();
        let rev: Vec<u64> = (0..window).rev().collect();
        let a = [APerm::window(shift).unwrap(), APerm::window(rev).unwrap()];
        let mut src = mcg_core::periodic::Singletons;
        let (h, _) = run_glue(&mut src, 200, 1 << 32).unwrap();
        let w = random_word(&mut rng, a.len(), 3, 2);
        let w2 = random_equal_word(&mut rng, &w, a.len(), 3, 2);
        for p in 0..window {
            let (x, y) = (substitute(&w, &a, &h, p, window).unwrap(), substitute(&w2, &a, &h, p, window).unwrap());
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert_eq!(x, y, "w = {} w' = {} at {}", w, w2, p);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orders_are_irreflexive_and_asymmetric(a in 0u64..30, b in 0u64..30, pts in proptest::collection::vec(0u64..300, 3..6)) {
        let t = tower();
        let f: Injection = format!("swap={a},{b} +0").parse().unwrap();
        let ord = OrderContext::new(&t, &f);
        let pts: Vec<BigUint> = pts.into_iter().map(BigUint::from).collect();
        for m in &pts {
            prop_assert!(!ord.less0(m, m).unwrap());
            prop_assert!(!ord.less1(m, m).unwrap());
            for m2 in &pts {
                prop_assert!(!(ord.less0(m, m2).unwrap() && ord.less0(m2, m).unwrap()));
                prop_assert!(!(ord.less1(m, m2).unwrap() && ord.less1(m2, m).unwrap()));
            }
        }
    }
}
