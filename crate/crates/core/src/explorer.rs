//! Bounded drivers for the chain/good-pair dichotomy and for witness search against a
//! given function.

use num_bigint::BigUint;

use crate::coding::{good_extend, in_c, BitSeq, BitStream, Bits};
use crate::error::Result;
use crate::inj::Injection;
use crate::orders::OrderContext;
use crate::recognizer::{eval_word, reduced_words};
use crate::sparse::{b0_upto, theta_state};
use crate::surgery::{Edot, GeneratorSeed};
use crate::tower::Tower;
use crate::words::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DichotomyKind {
    Chain,
    GoodPair,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubCase {
    /// `B₀` linearly ordered by `<ᵍ₁`.
    A,
    /// No two elements of `B₀` are `<ᵍ₁`-comparable.
    B,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct DichotomyOutcome {
    pub kind: DichotomyKind,
    pub chain: Vec<BigUint>,
    pub d0: Option<Bits>,
    pub d1: Option<Bits>,
    pub sub_case: SubCase,
    /// Number of anchor arguments the quantifiers ranged over.
    pub bound: usize,
}

impl DichotomyOutcome {
    fn inconclusive(bound: usize) -> Self {
        DichotomyOutcome { kind: DichotomyKind::Inconclusive, chain: vec![], d0: None, d1: None, sub_case: SubCase::Unknown, bound }
    }
}

/// Elements of `𝒞` of length at most `n`.
fn c_upto(n: usize) -> Vec<Bits> {
    let mut out = vec![Bits::new()];
    for len in 1..=n {
        for v in 0..(1u64 << len) {
            let b = Bits::from_u64(v, len);
            if in_c(&b) {
                out.push(b);
            }
        }
    }
    out
}

fn extends(c: &Bits, c2: &Bits) -> bool {
    matches!(good_extend(c, c2.len()), Ok(Some(ref x)) if x == c2)
}

/// `(∃c₀)(∀c₁ ▷ c₀)(∃c₂ ▷ c₁) rel(lh c₁ − 1, lh c₂ − 1)` over `𝒞` elements of length `≤ n`;
/// a `c₁` of length `n` has no room for `c₂` and is exempt.
fn star(cs: &[Bits], n: usize, rel: &dyn Fn(usize, usize) -> Result<bool>) -> Result<Option<Bits>> {
    for c0 in cs {
        let mut nonvacuous = false;
        let mut all = true;
        for c1 in cs.iter().filter(|c1| c1.len() < n && extends(c0, c1)) {
            nonvacuous = true;
            let mut found = false;
            for c2 in cs.iter().filter(|c2| extends(c1, c2)) {
                if rel(c1.len() - 1, c2.len() - 1)? {
                    found = true;
                    break;
                }
            }
            if !found {
                all = false;
                break;
            }
        }
        if nonvacuous && all {
            return Ok(Some(c0.clone()));
        }
    }
    Ok(None)
}

/// The chain the proof builds from a `(∗)` witness.
fn star_chain(cs: &[Bits], c0: &Bits, rel: &dyn Fn(usize, usize) -> Result<bool>) -> Result<Vec<usize>> {
    let Some(mut c1) = cs.iter().filter(|c| extends(c0, c)).min_by_key(|c| c.len()).cloned() else {
        return Ok(vec![]);
    };
    let mut chain = vec![c1.len() - 1];
    loop {
        let last = *chain.last().expect("nonempty");
        let mut next = None;
        for c2 in cs.iter().filter(|c2| extends(&c1, c2)) {
            if rel(last, c2.len() - 1)? {
                next = Some(c2.clone());
                break;
            }
        }
        let Some(c2) = next else { break };
        chain.push(c2.len() - 1);
        // d₂: the extension of c₀ of the same length, instantiating the universal quantifier
        match cs.iter().find(|d| d.len() == c2.len() && extends(c0, d)) {
            Some(d2) => c1 = d2.clone(),
            None => break,
        }
    }
    Ok(chain)
}

/// The `(¬∗)` recipe: `d₀ ◁ d₁ ◁ …`, each step avoiding `rel` from its last one.
fn neg_star_sequence(cs: &[Bits], rel: &dyn Fn(usize, usize) -> Result<bool>) -> Result<Bits> {
    let mut cur = Bits::new();
    loop {
        let mut step = None;
        for c1 in cs.iter().filter(|c1| extends(&cur, c1)) {
            let mut clean = true;
            for c2 in cs.iter().filter(|c2| extends(c1, c2)) {
                if rel(c1.len() - 1, c2.len() - 1)? {
                    clean = false;
                    break;
                }
            }
            if clean {
                step = Some(c1.clone());
                break;
            }
        }
        match step {
            Some(s) => cur = s,
            None => return Ok(cur),
        }
    }
}

fn padded(b: &Bits) -> BitSeq {
    BitSeq::Infinite(BitStream::EventuallyZero(b.clone()))
}

/// Emulates the proof of the dichotomy on the first `depth_bound + 1` anchors of `g`.
pub fn dichotomy_search(t: &Tower, g: &Injection, depth_bound: usize) -> Result<DichotomyOutcome> {
    if depth_bound == 0 {
        return Ok(DichotomyOutcome::inconclusive(0));
    }
    let anchors: Vec<BigUint> = theta_state(t, g, t.max_level())?.anchors.into_iter().map(|a| a.point).take_while(|p| g.in_dom(p)).collect();
    let n = anchors.len().min(depth_bound + 1);
    if n == 0 {
        return Ok(DichotomyOutcome::inconclusive(0));
    }
    let ord = OrderContext::new(t, g);
    let cs = c_upto(n);
    let rel0 = |i: usize, j: usize| -> Result<bool> {
        if i >= n || j >= n {
            return Ok(false);
        }
        ord.less0(&anchors[i], &anchors[j])
    };
    if let Some(c0) = star(&cs, n, &rel0)? {
        let idx = star_chain(&cs, &c0, &rel0)?;
        let chain: Vec<BigUint> = idx.iter().map(|&i| anchors[i].clone()).collect();
        let verified = chain.windows(2).map(|w| ord.less0(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
        if chain.len() >= 2 && verified.iter().all(|&b| b) {
            return Ok(DichotomyOutcome { kind: DichotomyKind::Chain, chain, d0: None, d1: None, sub_case: SubCase::Unknown, bound: n });
        }
    }
    let d0 = neg_star_sequence(&cs, &rel0)?;
    let picks: Vec<usize> = (0..d0.len()).filter(|&i| d0.get(i)).collect();
    if picks.is_empty() {
        return Ok(DichotomyOutcome::inconclusive(n));
    }
    let m = picks.len();
    let rel1 = |i: usize, j: usize| -> Result<bool> {
        if i >= m || j >= m {
            return Ok(false);
        }
        ord.less1(&anchors[picks[i]], &anchors[picks[j]])
    };
    let cs1 = c_upto(m);
    let (d1, claimed) = match star(&cs1, m, &rel1)? {
        Some(c0) => {
            let idx = star_chain(&cs1, &c0, &rel1)?;
            let mut b = Bits::zeros(idx.last().map_or(0, |l| l + 1));
            for i in idx {
                b.0[i] = true;
            }
            (b, SubCase::A)
        }
        None => (neg_star_sequence(&cs1, &rel1)?, SubCase::B),
    };
    if d1.is_empty() || !crate::coding::is_good(&d1) {
        return Ok(DichotomyOutcome::inconclusive(n));
    }
    // verification on the computed B₀ prefix
    let b0: Vec<BigUint> = b0_upto(t, g, &padded(&d0), &padded(&d1), t.max_level())?.into_iter().map(|b| b.anchor.point).collect();
    for a in &b0 {
        for c in &b0 {
            if ord.less0(a, c)? {
                return Ok(DichotomyOutcome::inconclusive(n));
            }
        }
    }
    let mut pairs = 0;
    let mut comparable = 0;
    for (i, a) in b0.iter().enumerate() {
        for c in &b0[i + 1..] {
            pairs += 1;
            if ord.less1(a, c)? || ord.less1(c, a)? {
                comparable += 1;
            }
        }
    }
    let sub_case = match claimed {
        SubCase::A if comparable == pairs => SubCase::A,
        SubCase::B if comparable == 0 => SubCase::B,
        _ => SubCase::Unknown,
    };
    Ok(DichotomyOutcome { kind: DichotomyKind::GoodPair, chain: vec![], d0: Some(d0), d1: Some(d1), sub_case, bound: n })
}

#[derive(Clone, Debug)]
pub enum ProbeOutcome {
    Found { word: Vec<(usize, Sign)>, agreements: usize },
    Inconclusive { words_tried: usize, best: usize },
}

/// Agreement count of `word` with `g` on `dom g ∩ [0, horizon)`.
pub fn agreements(eds: &[Edot], word: &[(usize, Sign)], g: &Injection, horizon: u64) -> Result<usize> {
    let mut n = 0;
    for p in 0..horizon {
        let pb = BigUint::from(p);
        if let Some(v) = g.get(&pb) {
            if eval_word(eds, word, &pb)? == v {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// The first reduced word over `seeds` (shortest first) agreeing with `g` on at least
/// `threshold` points below `horizon`, re-verified before it is returned.
pub fn maximality_probe(
    t: &Tower,
    g: &Injection,
    seeds: &[GeneratorSeed],
    word_bound: usize,
    horizon: u64,
    threshold: usize,
) -> Result<ProbeOutcome> {
    let eds: Vec<Edot> = seeds.iter().map(|s| Edot::plain(t, s.clone())).collect();
    let mut best = 0;
    let mut tried = 0;
    for w in reduced_words(seeds.len(), word_bound) {
        tried += 1;
        let a = agreements(&eds, &w, g, horizon)?;
        best = best.max(a);
        if a >= threshold {
            let fresh: Vec<Edot> = seeds.iter().map(|s| Edot::plain(t, s.clone())).collect();
            assert_eq!(agreements(&fresh, &w, g, horizon)?, a, "probe witness failed re-verification");
            return Ok(ProbeOutcome::Found { word: w, agreements: a });
        }
    }
    Ok(ProbeOutcome::Inconclusive { words_tried: tried, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::OmegaWord;

    #[test]
    fn zero_depth_is_inconclusive() {
        let t = Tower::scaled();
        let out = dichotomy_search(&t, &Injection::identity(), 0).unwrap();
        assert_eq!(out.kind, DichotomyKind::Inconclusive);
    }

    #[test]
    fn planted_word_gives_chain() {
        let t = Tower::scaled();
        let w = OmegaWord::single(t.config.alphabet[1].clone(), Sign::Pos);
        let id = Injection::identity();
        let anchors: Vec<BigUint> = theta_state(&t, &id, t.max_level()).unwrap().anchors.into_iter().map(|a| a.point).collect();
        assert_eq!(anchors.len(), 3);
        let mut g = id;
        for a in &anchors {
            let v = t.eval_e(&w, a).unwrap();
            g = g.with_value_swap(a, &v);
        }
        let out = dichotomy_search(&t, &g, 3).unwrap();
        assert_eq!(out.kind, DichotomyKind::Chain, "{out:?}");
        assert_eq!(out.chain, anchors);
        // planting only the first two anchors leaves the third fixed, so δ there is ∅
        let two = Injection::identity()
            .with_value_swap(&anchors[0], &t.eval_e(&w, &anchors[0]).unwrap())
            .with_value_swap(&anchors[1], &t.eval_e(&w, &anchors[1]).unwrap());
        assert_eq!(dichotomy_search(&t, &two, 1).unwrap().kind, DichotomyKind::Chain);
        assert_ne!(dichotomy_search(&t, &two, 3).unwrap().kind, DichotomyKind::Chain);
    }

    #[test]
    fn off_dictionary_anchors_give_good_pair() {
        let t = Tower::scaled();
        // moves not realized by any dictionary word
        let g = Injection::identity().with_value_swap(&BigUint::from(21u32), &BigUint::from(47u32));
        let out = dichotomy_search(&t, &g, 3).unwrap();
        assert_eq!(out.kind, DichotomyKind::GoodPair, "{out:?}");
        assert!(crate::coding::is_good(out.d0.as_ref().unwrap()));
        assert!(crate::coding::is_good(out.d1.as_ref().unwrap()));
    }

    #[test]
    fn probe_finds_identity_and_seed() {
        let t = Tower::scaled();
        let seed: GeneratorSeed = "[ones: 0 ; ones: 1 ; ones: 0 1 3]".parse().unwrap();
        let id = Injection::finite((0u64..200).collect()).unwrap();
        match maximality_probe(&t, &id, std::slice::from_ref(&seed), 1, 200, 10).unwrap() {
            ProbeOutcome::Found { word, agreements } => {
                assert!(word.is_empty());
                assert_eq!(agreements, 200);
            }
            other => panic!("{other:?}"),
        }
        let ed = Edot::plain(&t, seed.clone());
        let img = Injection::finite((0u32..200).map(|p| ed.value(&BigUint::from(p)).unwrap()).collect()).unwrap();
        match maximality_probe(&t, &img, &[seed], 1, 200, 200).unwrap() {
            ProbeOutcome::Found { word, agreements } => {
                assert_eq!(word, vec![(0, Sign::Pos)]);
                assert_eq!(agreements, 200);
            }
            other => panic!("{other:?}"),
        }
    }
}
