//! Prefix recognition for `range(ė)` and bounded search for words over generators.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::coding::{chi, chi_dagger, BitSeq, BitStream, Bits};
use crate::error::{Error, Result};
use crate::inj::Injection;
use crate::orders::OrderContext;
use crate::semaphore::{interval_length, Semaphore, Universe};
use crate::sparse::b0_upto;
use crate::surgery::{Edot, GeneratorSeed};
use crate::tower::Tower;
use crate::words::{GenTriple, Sign};

/// An injective prefix `f̄` of interval length `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prefix {
    pub values: Vec<BigUint>,
    pub k: usize,
}

impl Prefix {
    pub fn new(t: &Tower, values: Vec<BigUint>) -> Result<Self> {
        let k = interval_length(t, &BigUint::from(values.len()))?
            .ok_or_else(|| Error::domain(format!("length {} is not an interval length", values.len())))?;
        let mut seen = HashSet::new();
        if !values.iter().all(|v| seen.insert(v)) {
            return Err(Error::domain("prefix is not injective"));
        }
        Ok(Prefix { values, k })
    }

    /// `f↾l(k)` for an evaluable `f`.
    pub fn of_fn(t: &Tower, k: usize, f: impl Fn(&BigUint) -> Result<BigUint>) -> Result<Self> {
        let end = t.end(k)?.to_u64().ok_or_else(|| Error::capacity("prefix too long"))?;
        let values = (0..end).map(|p| f(&BigUint::from(p))).collect::<Result<Vec<_>>>()?;
        Prefix::new(t, values)
    }

    /// Decimal values, one per line.
    pub fn parse(t: &Tower, text: &str) -> Result<Self> {
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| BigUint::from_str(l).map_err(|_| Error::parse(format!("bad prefix value `{l}`"))))
            .collect::<Result<Vec<_>>>()?;
        Prefix::new(t, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.values.get(n)
    }
}

/// The triples `(x̄, d̄⁰, d̄¹)` a search ranges over.
#[derive(Clone, Debug)]
pub enum TripleSpace {
    /// All of `2^k × 2^k × 2^k`.
    Full,
    /// Restrictions of triples drawn from the given streams.
    Restricted(Vec<BitStream>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub x: Bits,
    pub d0: Bits,
    pub d1: Bits,
}

impl Triple {
    fn gen(&self) -> GenTriple {
        GenTriple { x: self.x.clone(), d0: self.d0.clone(), d1: self.d1.clone() }
    }

    fn restrict(&self, m: usize) -> Triple {
        Triple { x: self.x.restrict(m), d0: self.d0.restrict(m), d1: self.d1.restrict(m) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryWitness {
    pub triple: Triple,
    pub gbar: Vec<u64>,
}

/// Counts of the level element each point of `I_m` needs.
fn needed_histogram(t: &Tower, p: &Prefix, m: usize) -> Result<(usize, HashMap<BigUint, usize>)> {
    let lv = t.level(m)?;
    let lo = lv.start.to_usize().expect("prefix-sized");
    let hi = lv.end().to_usize().expect("prefix-sized");
    let mut hist = HashMap::new();
    for n in lo..hi {
        let v = &p.values[n];
        if !lv.contains(v) {
            continue;
        }
        let need = lv.mul(&lv.phi_inv(v)?, &lv.inv(&lv.phi_inv(&BigUint::from(n))?));
        *hist.entry(lv.phi(&need)?).or_insert(0) += 1;
    }
    Ok((hi - lo, hist))
}

fn triple_ok(t: &Tower, m: usize, size: usize, hist: &HashMap<BigUint, usize>, tr: &Triple) -> Result<bool> {
    let lv = t.level(m)?;
    let key = lv.phi(&lv.gen_elem(&tr.gen())?)?;
    let agree = hist.get(&key).copied().unwrap_or(0);
    Ok(size - agree <= 3)
}

fn extensions(space: &TripleSpace, cur: &[Triple], m: usize) -> Vec<Triple> {
    match space {
        TripleSpace::Full => {
            let mut out = Vec::with_capacity(cur.len() * 8);
            for tr in cur {
                for b in 0..8u8 {
                    let mut n = tr.clone();
                    n.x.push(b & 1 == 1);
                    n.d0.push(b & 2 == 2);
                    n.d1.push(b & 4 == 4);
                    out.push(n);
                }
            }
            out
        }
        TripleSpace::Restricted(a) => {
            let prev: HashSet<&Triple> = cur.iter().collect();
            let mut out: Vec<Triple> = Vec::new();
            for x in a {
                for d0 in a {
                    for d1 in a {
                        let tr = Triple { x: x.restrict(m), d0: d0.restrict(m), d1: d1.restrict(m) };
                        if prev.contains(&tr.restrict(m - 1)) {
                            out.push(tr);
                        }
                    }
                }
            }
            out.sort();
            out.dedup();
            out
        }
    }
}

/// All triples recovered from `p`, in increasing order.
pub fn recover(t: &Tower, p: &Prefix, space: &TripleSpace) -> Result<Vec<Triple>> {
    let empty = Triple { x: Bits::new(), d0: Bits::new(), d1: Bits::new() };
    let (size, hist) = needed_histogram(t, p, 0)?;
    if !triple_ok(t, 0, size, &hist, &empty)? {
        return Ok(Vec::new());
    }
    let mut cur = vec![empty];
    for m in 1..=p.k {
        let (size, hist) = needed_histogram(t, p, m)?;
        let mut next = Vec::new();
        for tr in extensions(space, &cur, m) {
            if triple_ok(t, m, size, &hist, &tr)? {
                next.push(tr);
            }
        }
        if next.is_empty() {
            return Ok(next);
        }
        cur = next;
    }
    cur.sort();
    Ok(cur)
}

/// `x̄ = χ(χ†(x̄))⌢0ⁿ` gives `Some(n)`; a repeated gap gives `None`.
fn trailing_zeros_form(x: &Bits) -> Option<usize> {
    let c = chi(&chi_dagger(x));
    let rest = &x.0[c.len()..];
    rest.iter().all(|b| !b).then_some(rest.len())
}

/// `ḡ` is `x̄`-compatible.
pub fn is_compatible(x: &Bits, gbar: &[u64]) -> bool {
    let base = chi_dagger(x);
    if gbar.len() > x.len() || gbar.len() < base.len() || gbar[..base.len()] != base[..] {
        return false;
    }
    let mut seen = HashSet::new();
    if !gbar.iter().all(|v| seen.insert(v)) {
        return false;
    }
    match trailing_zeros_form(x) {
        None => gbar.len() == base.len(),
        Some(n) => gbar.len() == base.len() || gbar[base.len()] >= n as u64,
    }
}

/// `ḡ` candidates: `χ†(x̄)` and its canonical fills with fresh values.
pub fn gbar_candidates(p: &Prefix, x: &Bits) -> Result<Vec<Vec<u64>>> {
    let base = chi_dagger(x);
    let mut out = vec![base.clone()];
    let Some(n) = trailing_zeros_form(x) else { return Ok(out) };
    let top = p.values.iter().max().cloned().unwrap_or_default() + BigUint::from(p.k) + 1u32;
    let fresh = top.to_u64().ok_or_else(|| Error::capacity("prefix values too large for a ḡ fill"))?.max(n as u64);
    for len in base.len() + 1..=x.len() {
        let mut g = base.clone();
        g.extend((0..(len - base.len()) as u64).map(|i| fresh + i));
        out.push(g);
    }
    Ok(out)
}

/// The clause evaluator for one `(f̄, x̄, d̄⁰, d̄¹, ḡ)`.
pub struct Matcher<'a, 'b> {
    pub tower: &'a Tower,
    pub sem: &'b Semaphore<'a>,
    pub universe: &'b Universe,
}

impl<'a, 'b> Matcher<'a, 'b> {
    pub fn new(sem: &'b Semaphore<'a>, universe: &'b Universe) -> Self {
        Matcher { tower: sem.tower, sem, universe }
    }

    fn e(&self, tr: &Triple, p: &BigUint) -> Result<BigUint> {
        self.tower.eval_triple(&tr.gen(), Sign::Pos, p)
    }

    /// `φ(n)`.
    pub fn phi(&self, tr: &Triple, gbar: &[u64], n: usize) -> Result<bool> {
        let g = Injection::finite(gbar[..(n + 1).min(gbar.len())].to_vec())?;
        let c0 = BitSeq::Finite(tr.d0.restrict(n + 1));
        let c1 = BitSeq::Finite(tr.d1.restrict(n + 1));
        let nb = BigUint::from(n);
        if !crate::coding::is_good(&tr.d0.restrict(n + 1)) || !crate::coding::is_good(&tr.d1.restrict(n + 1)) {
            return Ok(false);
        }
        let level = self.tower.interval_of(&nb)?;
        let b0: Vec<BigUint> = b0_upto(self.tower, &g, &c0, &c1, level)?.into_iter().map(|b| b.anchor.point).collect();
        if !b0.contains(&nb) {
            return Ok(false);
        }
        let ord = OrderContext::new(self.tower, &g);
        let below: Vec<&BigUint> = b0.iter().filter(|p| **p < nb).collect();
        for a in &below {
            for c in &below {
                if ord.less0(a, c)? {
                    return Ok(false);
                }
            }
        }
        self.sem.in_b(self.universe, &g, &c0, &c1, &nb)
    }

    /// Clauses (i)–(iv) for every `n < k`, plus compatibility.
    pub fn is_matching(&self, p: &Prefix, w: &RecoveryWitness) -> Result<bool> {
        let tr = &w.triple;
        if tr.x.len() != p.k || tr.d0.len() != p.k || tr.d1.len() != p.k || !is_compatible(&tr.x, &w.gbar) {
            return Ok(false);
        }
        let mut phis: HashMap<usize, bool> = HashMap::new();
        let mut phi = |j: usize| -> Result<bool> {
            if let Some(&v) = phis.get(&j) {
                return Ok(v);
            }
            let v = self.phi(tr, &w.gbar, j)?;
            phis.insert(j, v);
            Ok(v)
        };
        let ginv = |v: &BigUint| -> Option<usize> { v.to_u64().and_then(|v| w.gbar.iter().position(|&x| x == v)) };
        for n in 0..p.k {
            let nb = BigUint::from(n);
            let fv = &p.values[n];
            let en = self.e(tr, &nb)?;
            let mut fired = false;
            if phi(n)? {
                fired = true;
                if n >= w.gbar.len() || *fv != BigUint::from(w.gbar[n]) {
                    return Ok(false);
                }
            }
            if let Some(j) = ginv(&nb) {
                if j < p.len() && phi(j)? {
                    fired = true;
                    if *fv != self.e(tr, &BigUint::from(j))? {
                        return Ok(false);
                    }
                }
            }
            if let Some(j) = ginv(&en) {
                if j < p.len() && phi(j)? {
                    fired = true;
                    if *fv != self.e(tr, &en)? {
                        return Ok(false);
                    }
                }
            }
            if !fired && *fv != en {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn witness_for(&self, p: &Prefix, tr: &Triple) -> Result<(Option<RecoveryWitness>, usize)> {
        let cands = gbar_candidates(p, &tr.x)?;
        let n = cands.len();
        for gbar in cands {
            let w = RecoveryWitness { triple: tr.clone(), gbar };
            if self.is_matching(p, &w)? {
                return Ok((Some(w), n));
            }
        }
        Ok((None, n))
    }
}

#[derive(Clone, Debug)]
pub struct UVerdict {
    pub accepted: bool,
    pub witness: Option<RecoveryWitness>,
    pub recovered: usize,
    /// Number of `ḡ` candidates tried.
    pub gbar_bound: usize,
}

/// `f̄ ∈ U`.
pub fn in_u(m: &Matcher, p: &Prefix, space: &TripleSpace) -> Result<UVerdict> {
    let rec = recover(m.tower, p, space)?;
    let mut tried = 0;
    for tr in &rec {
        let (w, n) = m.witness_for(p, tr)?;
        tried += n;
        if w.is_some() {
            return Ok(UVerdict { accepted: true, witness: w, recovered: rec.len(), gbar_bound: tried });
        }
    }
    Ok(UVerdict { accepted: false, witness: None, recovered: rec.len(), gbar_bound: tried })
}

/// `f̄ ∈ U` by enumerating every triple of the alphabet and comparing pointwise.
pub fn brute_force_in_u(m: &Matcher, p: &Prefix, alphabet: &[BitStream]) -> Result<bool> {
    let k = p.k;
    let mut triples = Vec::new();
    for x in alphabet {
        for d0 in alphabet {
            for d1 in alphabet {
                triples.push(Triple { x: x.restrict(k), d0: d0.restrict(k), d1: d1.restrict(k) });
            }
        }
    }
    triples.sort();
    triples.dedup();
    'triple: for tr in triples {
        for lvl in 0..=k {
            let lv = m.tower.level(lvl)?;
            let (lo, hi) = (lv.start.to_u64().expect("small"), lv.end().to_u64().expect("small"));
            let mut bad = 0;
            for n in lo..hi {
                if m.e(&tr, &BigUint::from(n))? != p.values[n as usize] {
                    bad += 1;
                }
            }
            if bad > 3 {
                continue 'triple;
            }
        }
        if m.witness_for(p, &tr)?.0.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A word over seeds that agrees with `h` on its domain below `horizon`.
#[derive(Clone, Debug)]
pub struct MemberWitness {
    pub seeds: Vec<GeneratorSeed>,
    /// `(seed index, sign)`, applied first to last.
    pub word: Vec<(usize, Sign)>,
}

pub enum MemberOutcome {
    Witness(MemberWitness),
    Inconclusive { words_tried: usize },
}

/// The seed `(x̄⌢0^ω, d̄⁰⌢0^ω, d̄¹⌢0^ω)`.
pub fn seed_of_triple(tr: &Triple) -> Result<GeneratorSeed> {
    GeneratorSeed::from_parts(
        BitStream::EventuallyZero(tr.x.clone()),
        BitStream::EventuallyZero(tr.d0.clone()),
        BitStream::EventuallyZero(tr.d1.clone()),
    )
}

/// Applies `word` left to right, letter 0 first.
pub fn eval_word(eds: &[Edot], word: &[(usize, Sign)], p: &BigUint) -> Result<BigUint> {
    let mut v = p.clone();
    for &(i, s) in word {
        v = match s {
            Sign::Pos => eds[i].value(&v)?,
            Sign::Neg => eds[i].eval_inverse(&v)?,
        };
    }
    Ok(v)
}

/// Reduced words over `n` letters of length `≤ bound`, shortest first.
pub fn reduced_words(n: usize, bound: usize) -> Vec<Vec<(usize, Sign)>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<(usize, Sign)>> = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..n {
                for s in [Sign::Pos, Sign::Neg] {
                    if w.last().is_some_and(|&(j, s2)| j == i && s2 != s) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push((i, s));
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Searches words of length `≤ word_bound` over `pool` plus seeds recovered from `h`.
pub fn membership_search(
    t: &Tower,
    h: &Injection,
    pool: &[GeneratorSeed],
    word_bound: usize,
    horizon: u64,
) -> Result<MemberOutcome> {
    let mut seeds: Vec<GeneratorSeed> = pool.to_vec();
    let mut k = 0;
    while t.end(k + 1)? <= BigUint::from(horizon) && h.len().is_none_or(|l| t.end(k + 1).map(|e| &e <= l).unwrap_or(false)) {
        k += 1;
    }
    let end = t.end(k)?.to_u64().ok_or_else(|| Error::capacity("horizon too large"))?;
    if h.len().is_none_or(|l| *l >= BigUint::from(end)) {
        let vals = (0..end).map(|p| h.get_u64(p).expect("in dom")).collect();
        let p = Prefix::new(t, vals)?;
        for tr in recover(t, &p, &TripleSpace::Full)?.into_iter().take(8) {
            let s = seed_of_triple(&tr)?;
            if !seeds.contains(&s) {
                seeds.push(s);
            }
        }
    }
    let eds: Vec<Edot> = seeds.iter().map(|s| Edot::plain(t, s.clone())).collect();
    let points: Vec<u64> = (0..horizon).filter(|&p| h.in_dom(&BigUint::from(p))).collect();
    let mut tried = 0;
    for w in reduced_words(seeds.len(), word_bound) {
        tried += 1;
        let mut ok = true;
        for &p in &points {
            let pb = BigUint::from(p);
            if eval_word(&eds, &w, &pb)? != h.get(&pb).expect("in dom") {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(MemberOutcome::Witness(MemberWitness { seeds, word: w }));
        }
    }
    Ok(MemberOutcome::Inconclusive { words_tried: tried })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet() -> Vec<BitStream> {
        ["zero", "ones: 0", "ones: 1", "ones: 0 1 3"].iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn compatibility_clauses() {
        let b = |s: &str| Bits::from_str01(s).unwrap();
        assert!(is_compatible(&b("101"), &[0, 1]));
        assert!(!is_compatible(&b("101"), &[0]));
        // repeated gap: ḡ must equal χ†(x̄)
        assert!(is_compatible(&b("1111"), &[0]));
        assert!(!is_compatible(&b("1111"), &[0, 5]));
        // trailing zeros: the next entry is bounded below
        assert!(is_compatible(&b("1000"), &[0, 3]));
        assert!(!is_compatible(&b("1000"), &[0, 2]));
        assert!(!is_compatible(&b("10"), &[0, 1, 2]));
    }

    #[test]
    fn e_prefixes_recover_their_triple() {
        let t = Tower::scaled();
        let sem = Semaphore::new(&t);
        let u = Universe::empty();
        let m = Matcher::new(&sem, &u);
        let a = alphabet();
        let seed = GeneratorSeed::from_parts(a[1].clone(), a[2].clone(), a[3].clone()).unwrap();
        let ed = Edot::plain(&t, seed.clone());
        for k in 0..=4 {
            let p = Prefix::of_fn(&t, k, |q| ed.value(q)).unwrap();
            let rec = recover(&t, &p, &TripleSpace::Full).unwrap();
            let own = Triple { x: a[1].restrict(k), d0: a[2].restrict(k), d1: a[3].restrict(k) };
            assert!(rec.contains(&own));
            assert!(in_u(&m, &p, &TripleSpace::Full).unwrap().accepted);
            assert!(brute_force_in_u(&m, &p, &a).unwrap());
        }
    }

    #[test]
    fn heavy_perturbation_is_rejected() {
        let t = Tower::scaled();
        let sem = Semaphore::new(&t);
        let u = Universe::empty();
        let m = Matcher::new(&sem, &u);
        let mut vals: Vec<BigUint> = (0u32..49).map(BigUint::from).collect();
        // a 5-cycle inside I_2
        let cyc = [21usize, 22, 23, 24, 25];
        let first = vals[cyc[0]].clone();
        for i in 0..4 {
            vals[cyc[i]] = vals[cyc[i + 1]].clone();
        }
        vals[cyc[4]] = first;
        let p = Prefix::new(&t, vals).unwrap();
        assert!(!in_u(&m, &p, &TripleSpace::Restricted(alphabet())).unwrap().accepted);
        assert!(!brute_force_in_u(&m, &p, &alphabet()).unwrap());
    }

    #[test]
    fn k0_needs_three_or_fewer_moves() {
        let t = Tower::scaled();
        let sem = Semaphore::new(&t);
        let u = Universe::empty();
        let m = Matcher::new(&sem, &u);
        let ok = Prefix::new(&t, [1u32, 0, 2, 3, 4, 5, 6].map(BigUint::from).to_vec()).unwrap();
        assert_eq!(ok.k, 0);
        assert!(in_u(&m, &ok, &TripleSpace::Full).unwrap().accepted);
        let bad = Prefix::new(&t, [1u32, 2, 3, 0, 4, 5, 6].map(BigUint::from).to_vec()).unwrap();
        assert!(!in_u(&m, &bad, &TripleSpace::Full).unwrap().accepted);
    }

    #[test]
    fn membership_finds_single_generator() {
        let t = Tower::scaled();
        let a = alphabet();
        let seed = GeneratorSeed::from_parts(a[1].clone(), a[3].clone(), a[2].clone()).unwrap();
        let ed = Edot::plain(&t, seed.clone());
        let vals: Vec<BigUint> = (0u32..105).map(|p| ed.value(&BigUint::from(p)).unwrap()).collect();
        let h = Injection::finite(vals).unwrap();
        match membership_search(&t, &h, &[seed], 1, 105).unwrap() {
            MemberOutcome::Witness(w) => assert_eq!(w.word.len(), 1),
            MemberOutcome::Inconclusive { .. } => panic!("expected a witness"),
        }
    }
}
