//! The tree `T`, the marker `ψ`, and the refinement `B ⊆ B₀`.
//!
//! The existential over `T` in the definition of `B` ranges over a [`Universe`]: nodes
//! whose `s` is a truncation of a target injection and whose letters are restrictions of
//! seed triples.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::coding::{chi_dagger, BitSeq, BitStream, Bits};
use crate::error::{Error, Result};
use crate::inj::Injection;
use crate::sparse::{b0_upto, theta_state, B0Member};
use crate::tower::Tower;
use crate::words::{GenTriple, Letter, SeedTriple, Sign, Word};

/// A node `(s, i⃗, x⃗, d⃗⁰, d⃗¹) ∈ T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PsiNode {
    pub s: Injection,
    pub k: usize,
    pub signs: Vec<Sign>,
    pub x: Vec<Bits>,
    pub d0: Vec<Bits>,
    pub d1: Vec<Bits>,
}

/// `k` with `lh(s) = Σ_{m ≤ k} |I_m|`, if any.
pub fn interval_length(t: &Tower, len: &BigUint) -> Result<Option<usize>> {
    if len == &BigUint::from(0u32) {
        return Ok(None);
    }
    let k = t.interval_of(&(len - 1u32))?;
    Ok((t.end(k)? == *len).then_some(k))
}

impl PsiNode {
    pub fn new(t: &Tower, s: Injection, signs: Vec<Sign>, x: Vec<Bits>, d0: Vec<Bits>, d1: Vec<Bits>) -> Result<Self> {
        let len = s.len().cloned().ok_or_else(|| Error::domain("node sequences are finite"))?;
        let k = interval_length(t, &len)?.ok_or_else(|| Error::domain(format!("lh(s) = {len} is not an interval length")))?;
        let n = signs.len();
        if x.len() != n || d0.len() != n || d1.len() != n {
            return Err(Error::domain("lh(i⃗) = lh(x⃗) = lh(d⃗⁰) = lh(d⃗¹) fails"));
        }
        if x.iter().chain(&d0).chain(&d1).any(|b| b.len() != k) {
            return Err(Error::domain(format!("letter components must have length k = {k}")));
        }
        Ok(PsiNode { s, k, signs, x, d0, d1 })
    }

    /// The node built from a function, seeds, and a level.
    pub fn from_seeds(t: &Tower, target: &Injection, k: usize, letters: &[(Arc<SeedTriple>, Sign)]) -> Result<Self> {
        let s = target.truncate(&t.end(k)?);
        let signs = letters.iter().map(|(_, s)| *s).collect();
        let x = letters.iter().map(|(q, _)| q.x.restrict(k)).collect();
        let d0 = letters.iter().map(|(q, _)| q.d0.restrict(k)).collect();
        let d1 = letters.iter().map(|(q, _)| q.d1.restrict(k)).collect();
        PsiNode::new(t, s, signs, x, d0, d1)
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.len())
            .map(|j| {
                let t = GenTriple { x: self.x[j].clone(), d0: self.d0[j].clone(), d1: self.d1[j].clone() };
                Letter::new(t, self.signs[j])
            })
            .collect()
    }

    /// `w(i⃗, x⃗, d⃗⁰, d⃗¹)` reduced, and whether reduction removed letters.
    pub fn word(&self) -> (Word, bool) {
        let w = Word::reduce(self.k, self.letters()).expect("letters share level k");
        let reduced = w.len() != self.len();
        (w, reduced)
    }

    /// `t` restricted to level `k2 ≤ k`.
    pub fn restrict(&self, t: &Tower, k2: usize) -> Result<PsiNode> {
        if k2 > self.k {
            return Err(Error::domain("cannot restrict a node upwards"));
        }
        let r = |v: &Vec<Bits>| v.iter().map(|b| b.restrict(k2)).collect();
        Ok(PsiNode {
            s: self.s.truncate(&t.end(k2)?),
            k: k2,
            signs: self.signs.clone(),
            x: r(&self.x),
            d0: r(&self.d0),
            d1: r(&self.d1),
        })
    }

    /// The strict predecessor `t_*`, absent at `k = 0`.
    pub fn predecessor(&self, t: &Tower) -> Result<Option<PsiNode>> {
        if self.k == 0 {
            return Ok(None);
        }
        self.restrict(t, self.k - 1).map(Some)
    }

    fn g(&self, j: usize) -> Injection {
        Injection::finite(chi_dagger(&self.x[j])).expect("χ† yields injective sequences")
    }
}

/// The tree order: `s₀ ⊏ s₁`, equal signs, and letterwise `r^{k₁}_{k₀}(w₁) = w₀`.
pub fn tree_less(a: &PsiNode, b: &PsiNode) -> bool {
    let (Some(la), Some(lb)) = (a.s.len(), b.s.len()) else { return false };
    if la >= lb || !b.s.extends(&a.s) || a.signs != b.signs {
        return false;
    }
    (0..a.len()).all(|j| b.x[j].restrict(a.k) == a.x[j] && b.d0[j].restrict(a.k) == a.d0[j] && b.d1[j].restrict(a.k) == a.d1[j])
}

/// Bounded stand-in for `T` in the definition of `B`.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    pub targets: Vec<Injection>,
    pub seeds: Vec<Arc<SeedTriple>>,
    pub max_word_len: usize,
    /// Highest node level visited by the exhaustive search.
    pub max_k: usize,
}

impl Universe {
    pub fn empty() -> Self {
        Universe::default()
    }

    /// Letter sequences of length `1..=max_word_len` over seed indices.
    pub fn words(&self) -> Vec<Vec<(usize, Sign)>> {
        let letters: Vec<(usize, Sign)> = (0..self.seeds.len()).flat_map(|i| [(i, Sign::Pos), (i, Sign::Neg)]).collect();
        let mut out = Vec::new();
        let mut layer: Vec<Vec<(usize, Sign)>> = vec![Vec::new()];
        for _ in 0..self.max_word_len {
            let mut next = Vec::new();
            for w in &layer {
                for &l in &letters {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    fn letters(&self, w: &[(usize, Sign)]) -> Vec<(Arc<SeedTriple>, Sign)> {
        w.iter().map(|&(i, s)| (self.seeds[i].clone(), s)).collect()
    }
}

/// A point of `B₀ ∖ B` with the node that removes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub m: BigUint,
    pub target: usize,
    pub word: Vec<(usize, Sign)>,
    pub j: usize,
    pub k: usize,
}

#[derive(Clone, Debug)]
pub struct BSet {
    pub b0: Vec<BigUint>,
    pub kept: Vec<BigUint>,
    pub removals: Vec<Removal>,
    /// Largest node level the search inspected.
    pub bound: usize,
}

/// Memoized `ψ` and the `B` searches over one tower.
pub struct Semaphore<'a> {
    pub tower: &'a Tower,
    memo: Mutex<HashMap<PsiNode, Vec<bool>>>,
}

/// Number of complete distinct gaps decoded from the first `k` bits.
fn decoded_len(x: &Bits) -> usize {
    chi_dagger(x).len()
}

/// The least `k` with `m ∈ dom χ†(x↾k)`, scanning at most `limit` bits.
pub fn first_entry_level(x: &BitStream, m: usize, limit: usize) -> Option<usize> {
    let mut seen = std::collections::HashSet::new();
    let mut next = 0usize;
    for (entries, pos) in x.ones_positions().enumerate() {
        let pos = pos.to_usize().filter(|&p| p < limit)?;
        if !seen.insert(pos - next) {
            return None;
        }
        next = pos + 1;
        if entries == m {
            return Some(next);
        }
    }
    None
}

fn image_levels(t: &Tower, g: &Injection, b0: &[B0Member]) -> Result<Vec<usize>> {
    b0.iter()
        .map(|b| {
            let v = g.get(&b.anchor.point).expect("anchor in domain");
            t.interval_of(&v)
        })
        .collect()
}

impl<'a> Semaphore<'a> {
    pub fn new(tower: &'a Tower) -> Self {
        Semaphore { tower, memo: Mutex::new(HashMap::new()) }
    }

    /// Interval indices met by `g_j[B₀(g_j, d⃗⁰(j), d⃗¹(j))]` up to level `k`.
    fn b0_image_levels(&self, node: &PsiNode, j: usize) -> Result<Vec<usize>> {
        let g = node.g(j);
        let c0 = BitSeq::Finite(node.d0[j].clone());
        let c1 = BitSeq::Finite(node.d1[j].clone());
        let b0 = b0_upto(self.tower, &g, &c0, &c1, node.k)?;
        image_levels(self.tower, &g, &b0)
    }

    /// Anchors `l ∈ D(s)` with `δ(s, l) = r^k_m(w)`, returned by interval index `m`.
    fn matched_levels(&self, node: &PsiNode) -> Result<Vec<(usize, BigUint)>> {
        let st = theta_state(self.tower, &node.s, node.k)?;
        let (w, _) = node.word();
        let mut out = Vec::new();
        for a in st.anchors {
            if !node.s.in_dom(&a.point) {
                continue;
            }
            let v = node.s.get(&a.point).expect("in domain");
            if self.tower.interval_of(&v)? != a.level {
                continue;
            }
            if let Some(d) = self.tower.delta_n(&a.point, &v)? {
                if d == w.restrict(a.level)? {
                    out.push((a.level, a.point));
                }
            }
        }
        Ok(out)
    }

    /// The existential guard of the first case of `ψ`, without the `ψ(t_*)(j) = 0` conjunct.
    fn raw_guard(&self, node: &PsiNode, pred: Option<&PsiNode>, matched: &[(usize, BigUint)], j: usize) -> Result<bool> {
        if matched.is_empty() {
            return Ok(false);
        }
        let hits = self.b0_image_levels(node, j)?;
        if hits.is_empty() {
            return Ok(false);
        }
        let prev_hits = match pred {
            Some(p) => self.b0_image_levels(p, j)?,
            None => Vec::new(),
        };
        Ok(matched.iter().any(|(m, _)| hits.contains(m) && !prev_hits.contains(m)))
    }

    /// `ψ(t)`.
    pub fn psi(&self, node: &PsiNode) -> Result<Vec<bool>> {
        if let Some(v) = self.memo.lock().expect("memo").get(node) {
            return Ok(v.clone());
        }
        let n = node.len();
        let pred = node.predecessor(self.tower)?;
        let matched = self.matched_levels(node)?;
        let mut raw = vec![false; n];
        for (j, r) in raw.iter_mut().enumerate() {
            *r = self.raw_guard(node, pred.as_ref(), &matched, j)?;
        }
        let out = if raw.iter().any(|&r| r) {
            let prev = match &pred {
                Some(p) => self.psi(p)?,
                None => vec![false; n],
            };
            let fire: Vec<bool> = (0..n).map(|j| raw[j] && !prev[j]).collect();
            if fire.iter().any(|&f| f) {
                (0..n).map(|j| fire[j] || prev[j]).collect()
            } else {
                vec![false; n]
            }
        } else {
            vec![false; n]
        };
        self.memo.lock().expect("memo").insert(node.clone(), out.clone());
        Ok(out)
    }

    /// Everything in the definition of `B` except `ψ` and the predecessor clause, at a given node.
    #[allow(clippy::too_many_arguments)]
    fn node_removes(&self, node: &PsiNode, j: usize, f: &Injection, p0: &BitSeq, p1: &BitSeq, m: &BigUint, nfm: usize) -> Result<bool> {
        let k = node.k;
        if p0.len().is_some_and(|l| l < k) {
            return Ok(false);
        }
        if node.d0[j] != p0.restrict(k) || node.d1[j] != p1.restrict(k) {
            return Ok(false);
        }
        let g = node.g(j);
        if !g.in_dom(m) || !f.extends(&g) || nfm > k {
            return Ok(false);
        }
        let matched = self.matched_levels(node)?;
        if !matched.iter().any(|(lvl, _)| *lvl == nfm) {
            return Ok(false);
        }
        Ok(!self.psi(node)?[j])
    }

    fn b0_points(&self, f: &Injection, p0: &BitSeq, p1: &BitSeq, upto_level: usize) -> Result<Vec<BigUint>> {
        Ok(b0_upto(self.tower, f, p0, p1, upto_level)?.into_iter().map(|b| b.anchor.point).collect())
    }

    /// `B(f, p⁰, p¹)` up to `upto_level`, using the pinned node level.
    pub fn b_targeted(&self, u: &Universe, f: &Injection, p0: &BitSeq, p1: &BitSeq, upto_level: usize) -> Result<BSet> {
        let b0 = self.b0_points(f, p0, p1, upto_level)?;
        let words = u.words();
        let mut removals = Vec::new();
        let mut bound = 0;
        for m in &b0 {
            let fm = f.get(m).expect("B₀ ⊆ dom f");
            let nfm = self.tower.interval_of(&fm)?;
            let mu = m.to_usize().ok_or_else(|| Error::capacity("B₀ point too large to index χ†"))?;
            'outer: for (ti, target) in u.targets.iter().enumerate() {
                for w in &words {
                    for (j, &(si, _)) in w.iter().enumerate() {
                        let seed = &u.seeds[si];
                        let limit = self.tower.max_level().min(1 << 16);
                        let Some(entry) = first_entry_level(&seed.x, mu, limit) else { continue };
                        let k = entry.max(nfm);
                        bound = bound.max(k);
                        let node = PsiNode::from_seeds(self.tower, target, k, &u.letters(w))?;
                        if self.node_removes(&node, j, f, p0, p1, m, nfm)? {
                            removals.push(Removal { m: m.clone(), target: ti, word: w.clone(), j, k });
                            break 'outer;
                        }
                    }
                }
            }
        }
        let kept = b0.iter().filter(|p| !removals.iter().any(|r| &r.m == *p)).cloned().collect();
        Ok(BSet { b0, kept, removals, bound })
    }

    /// `B(f, p⁰, p¹)` up to `upto_level` by enumerating every universe node with `k ≤ max_k`
    /// and checking the predecessor clause level by level.
    pub fn b_exhaustive(&self, u: &Universe, f: &Injection, p0: &BitSeq, p1: &BitSeq, upto_level: usize) -> Result<BSet> {
        let b0 = self.b0_points(f, p0, p1, upto_level)?;
        let words = u.words();
        // dom χ†(x↾k) lengths per seed, from direct decoding
        let dom_len: Vec<Vec<usize>> =
            u.seeds.iter().map(|s| (0..=u.max_k).map(|k| decoded_len(&s.x.restrict(k))).collect()).collect();
        let mut removals = Vec::new();
        for m in &b0 {
            let fm = f.get(m).expect("B₀ ⊆ dom f");
            let nfm = self.tower.interval_of(&fm)?;
            let mu = m.to_usize().ok_or_else(|| Error::capacity("B₀ point too large to index χ†"))?;
            let mut found = None;
            'search: for (ti, target) in u.targets.iter().enumerate() {
                for w in &words {
                    for k in 0..=u.max_k {
                        for (j, &(si, _)) in w.iter().enumerate() {
                            let in_dom_now = dom_len[si][k] > mu;
                            if !in_dom_now {
                                continue;
                            }
                            let preds_ok = (0..k).all(|k2| dom_len[si][k2] <= mu || k2 < nfm);
                            if !preds_ok {
                                continue;
                            }
                            let node = PsiNode::from_seeds(self.tower, target, k, &u.letters(w))?;
                            if self.node_removes(&node, j, f, p0, p1, m, nfm)? {
                                found = Some(Removal { m: m.clone(), target: ti, word: w.clone(), j, k });
                                break 'search;
                            }
                        }
                    }
                }
            }
            removals.extend(found);
        }
        let kept = b0.iter().filter(|p| !removals.iter().any(|r| &r.m == *p)).cloned().collect();
        Ok(BSet { b0, kept, removals, bound: u.max_k })
    }

    /// `p ∈ B(f, p⁰, p¹)`.
    pub fn in_b(&self, u: &Universe, f: &Injection, p0: &BitSeq, p1: &BitSeq, p: &BigUint) -> Result<bool> {
        let lvl = self.tower.interval_of(p)?;
        Ok(self.b_targeted(u, f, p0, p1, lvl)?.kept.contains(p))
    }
}

/// Finite-horizon audit of superspacedness for one `g` and word.
#[derive(Clone, Debug)]
pub struct SuperspacedReport {
    /// The agreement set `I` inside the horizon.
    pub agreement: Vec<BigUint>,
    /// Indices `j ∈ J`.
    pub j_set: Vec<usize>,
    /// Members of `I` whose interval avoids every `χ†(x_j)[B(…)]`.
    pub qualifying: Vec<BigUint>,
}

impl SuperspacedReport {
    pub fn stalled(&self) -> bool {
        !self.agreement.is_empty() && self.qualifying.is_empty()
    }
}

pub fn check_superspaced(
    sem: &Semaphore,
    u: &Universe,
    g: &Injection,
    word: &[(Arc<SeedTriple>, Sign)],
    upto_level: usize,
) -> Result<SuperspacedReport> {
    let t = sem.tower;
    let w = crate::words::OmegaWord::new(word.to_vec());
    let mut agreement = Vec::new();
    for a in theta_state(t, g, upto_level)?.anchors {
        if let Some(v) = g.get(&a.point) {
            if v == t.eval_e(&w, &a.point)? {
                agreement.push(a.point);
            }
        }
    }
    let mut j_set = Vec::new();
    let mut hit_levels: Vec<usize> = Vec::new();
    for (j, (seed, _)) in word.iter().enumerate() {
        let in_range = matches!(seed.x.in_range_chi(), Ok(true));
        if !in_range {
            continue;
        }
        let gj = crate::coding::chi_dagger_stream(&seed.x)?;
        if &gj == g {
            continue;
        }
        if !matches!(seed.d0.is_good(), Ok(true)) || !matches!(seed.d1.is_good(), Ok(true)) {
            continue;
        }
        j_set.push(j);
        let c0 = BitSeq::Infinite(seed.d0.clone());
        let c1 = BitSeq::Infinite(seed.d1.clone());
        let b = sem.b_targeted(u, &gj, &c0, &c1, upto_level)?;
        for p in &b.kept {
            let v = gj.get(p).expect("B ⊆ dom");
            hit_levels.push(t.interval_of(&v)?);
        }
    }
    let mut qualifying = Vec::new();
    for m in &agreement {
        if !hit_levels.contains(&t.interval_of(m)?) {
            qualifying.push(m.clone());
        }
    }
    Ok(SuperspacedReport { agreement, j_set, qualifying })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(s: &str) -> Arc<SeedTriple> {
        Arc::new(s.parse().unwrap())
    }

    #[test]
    fn node_validation_and_words() {
        let t = Tower::scaled();
        let s = Injection::finite((0u64..21).collect()).unwrap();
        let b = |v: &str| Bits::from_str01(v).unwrap();
        let node = PsiNode::new(&t, s.clone(), vec![], vec![], vec![], vec![]).unwrap();
        assert_eq!(node.k, 1);
        assert!(node.word().0.is_empty());
        let one = PsiNode::new(&t, s.clone(), vec![Sign::Neg], vec![b("1")], vec![b("0")], vec![b("1")]).unwrap();
        assert_eq!(one.word().0.letters()[0].sign, Sign::Neg);
        let pair = PsiNode::new(
            &t,
            s.clone(),
            vec![Sign::Pos, Sign::Neg],
            vec![b("1"), b("1")],
            vec![b("0"), b("0")],
            vec![b("1"), b("1")],
        )
        .unwrap();
        let (w, reduced) = pair.word();
        assert!(w.is_empty() && reduced);
        assert!(PsiNode::new(&t, Injection::finite((0u64..20).collect()).unwrap(), vec![], vec![], vec![], vec![]).is_err());
        assert!(PsiNode::new(&t, s, vec![Sign::Pos], vec![b("10")], vec![b("00")], vec![b("11")]).is_err());
    }

    #[test]
    fn tree_order_and_predecessors() {
        let t = Tower::scaled();
        let target = Injection::identity();
        let q = seed("[ones: 0 2 ; ones: 1 ; zero]");
        let letters = vec![(q.clone(), Sign::Pos)];
        let nodes: Vec<PsiNode> = (0..4).map(|k| PsiNode::from_seeds(&t, &target, k, &letters).unwrap()).collect();
        for a in &nodes {
            assert!(!tree_less(a, a));
        }
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(tree_less(&nodes[i], &nodes[j]), i < j);
            }
        }
        assert_eq!(nodes[3].predecessor(&t).unwrap().unwrap(), nodes[2]);
        assert!(nodes[0].predecessor(&t).unwrap().is_none());
        let other = PsiNode::from_seeds(&t, &target, 3, &[(q, Sign::Neg)]).unwrap();
        assert!(!tree_less(&nodes[1], &other));
    }

    #[test]
    fn psi_all_zero_without_b0() {
        let t = Tower::scaled();
        let sem = Semaphore::new(&t);
        let n = PsiNode::from_seeds(&t, &Injection::identity(), 5, &[(t.config.alphabet[0].clone(), Sign::Pos)]).unwrap();
        assert_eq!(sem.psi(&n).unwrap(), vec![false]);
        assert_eq!(sem.psi(&n).unwrap(), vec![false]);
    }

    #[test]
    fn first_entry_matches_decoding() {
        let x: BitStream = "chi: 0 1 2 3 4 5 +0".parse().unwrap();
        for m in 0..6 {
            let k = first_entry_level(&x, m, 1000).unwrap();
            assert!(decoded_len(&x.restrict(k)) > m);
            assert!(decoded_len(&x.restrict(k - 1)) <= m);
        }
        assert_eq!(first_entry_level(&x, 21, 1000), Some(253));
    }

    #[test]
    fn empty_universe_keeps_b0() {
        let t = Tower::scaled();
        let sem = Semaphore::new(&t);
        let f = Injection::identity();
        let ones = BitSeq::Infinite("periodic: ∅ / 1".parse().unwrap());
        let b = sem.b_targeted(&Universe::empty(), &f, &ones, &ones, 100).unwrap();
        assert_eq!(b.b0, b.kept);
        assert!(!b.b0.is_empty());
    }
}
