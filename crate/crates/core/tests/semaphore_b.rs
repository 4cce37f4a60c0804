use std::sync::Arc;

use mcg_core::coding::{BitSeq, BitStream};
use mcg_core::inj::Injection;
use mcg_core::semaphore::{Semaphore, Universe};
use mcg_core::sparse::b0_upto;
use mcg_core::tower::{Tower, TowerConfig};
use mcg_core::words::{OmegaWord, SeedTriple, Sign};
use num_bigint::BigUint;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn ones() -> BitSeq {
    BitSeq::Infinite("periodic: ∅ / 1".parse().unwrap())
}

/// The generator seed of `f` with both selectors all ones.
fn own_seed(f: &Injection) -> Arc<SeedTriple> {
    let one: BitStream = "periodic: ∅ / 1".parse().unwrap();
    Arc::new(SeedTriple { x: BitStream::Chi(f.clone()), d0: one.clone(), d1: one })
}

/// The default alphabet with its first seed replaced, which would collide with `q` at level 2.
fn tower_with(q: &Arc<SeedTriple>) -> Tower {
    let mut cfg = TowerConfig::scaled();
    cfg.alphabet[0] = q.clone();
    Tower::new(cfg)
}

/// A target agreeing with `e(q^sign)` at the level-2 anchor 21.
fn aligned_target(t: &Tower, q: &Arc<SeedTriple>, sign: Sign) -> Injection {
    let w = OmegaWord::single(q.clone(), sign);
    let v = t.eval_e(&w, &big(21)).unwrap();
    Injection::identity().with_value_swap(&big(21), &v)
}

#[test]
fn removal_reproduced_by_exhaustive_search() {
    let f = Injection::identity();
    let q = own_seed(&f);
    let t = tower_with(&q);
    assert!(t.dictionary_available(2).unwrap());
    let sem = Semaphore::new(&t);
    let b0 = b0_upto(&t, &f, &ones(), &ones(), 8).unwrap();
    assert!(b0.iter().any(|b| b.anchor.point == big(21)));

    let u = Universe {
        targets: vec![Injection::identity(), aligned_target(&t, &q, Sign::Pos)],
        seeds: vec![q.clone(), t.config.alphabet[1].clone()],
        max_word_len: 1,
        max_k: 260,
    };
    let fast = sem.b_targeted(&u, &f, &ones(), &ones(), 8).unwrap();
    let slow = sem.b_exhaustive(&u, &f, &ones(), &ones(), 8).unwrap();
    assert!(fast.removals.iter().any(|r| r.m == big(21)), "{:?}", fast.removals);
    assert_eq!(fast.kept, slow.kept);
    for r in &fast.removals {
        assert!(slow.removals.iter().any(|s| s.m == r.m && s.k == r.k));
    }
    assert!(fast.kept.iter().all(|p| fast.b0.contains(p)));
}

#[test]
fn misaligned_targets_keep_b0() {
    let f = Injection::identity();
    let q = own_seed(&f);
    let t = tower_with(&q);
    let sem = Semaphore::new(&t);
    let u = Universe { targets: vec![Injection::identity()], seeds: vec![q], max_word_len: 1, max_k: 40 };
    let b = sem.b_targeted(&u, &f, &ones(), &ones(), 8).unwrap();
    assert_eq!(b.kept, b.b0);
    // q⁻¹q is a node word of T that reduces to ∅, which is δ at every fixed point
    let u2 = Universe { max_word_len: 2, ..u };
    let b2 = sem.b_targeted(&u2, &f, &ones(), &ones(), 8).unwrap();
    assert!(!b2.kept.contains(&big(21)));
}
