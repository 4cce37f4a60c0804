//! Permutations on `{0, …, n−1}`, Lehmer ranking, stabilizer chains and giant recognition.
//!
//! Products compose right to left: `(g * h)(i) = g(h(i))`.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::domain("image list is not a permutation"));
            }
            seen[v] = true;
        }
        Ok(Perm(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.cycle_lengths().iter().filter(|&&l| l % 2 == 0).count() % 2 == 0
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn full(n: usize) -> Self {
        let mut t = vec![0u32; n + 1];
        for i in 1..=n {
            t[i] += 1;
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                t[j] += t[i];
            }
        }
        Fenwick(t)
    }

    fn remove(&mut self, idx: usize) {
        let mut i = idx + 1;
        while i < self.0.len() {
            self.0[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of live entries with index `< idx`.
    fn prefix(&self, idx: usize) -> u32 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Index of the `k`-th live entry (0-based).
    fn kth(&self, mut k: u32) -> usize {
        let n = self.0.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let nxt = pos + step;
            if nxt <= n && self.0[nxt] <= k {
                pos = nxt;
                k -= self.0[nxt];
            }
            step >>= 1;
        }
        pos
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// Lexicographic rank of a permutation among all `n!`.
pub fn lehmer_rank(p: &Perm) -> BigUint {
    let n = p.degree();
    let mut fw = Fenwick::full(n);
    let mut r = BigUint::zero();
    for i in 0..n {
        let v = p.0[i] as usize;
        let d = fw.prefix(v);
        fw.remove(v);
        r = r * ((n - i) as u32) + d;
    }
    r
}

pub fn lehmer_unrank(n: usize, rank: &BigUint) -> Result<Perm> {
    if rank >= &factorial(n) {
        return Err(Error::domain("rank exceeds n!"));
    }
    let mut digits = vec![0u32; n];
    let mut r = rank.clone();
    for i in (0..n).rev() {
        let (q, d) = r.div_rem(&BigUint::from((n - i) as u32));
        digits[i] = d.to_u32().expect("digit below degree");
        r = q;
    }
    let mut fw = Fenwick::full(n);
    let mut out = Vec::with_capacity(n);
    for &d in &digits {
        let v = fw.kth(d);
        fw.remove(v);
        out.push(v as u32);
    }
    Ok(Perm(out))
}

#[derive(Clone, Debug)]
struct ChainLevel {
    point: usize,
    gens: Vec<Perm>,
    /// sorted orbit of `point`
    orbit: Vec<usize>,
    /// `trans[β]` maps `point` to `β`
    trans: Vec<Option<Perm>>,
}

impl ChainLevel {
    fn new(point: usize, n: usize) -> Self {
        let mut trans = vec![None; n];
        trans[point] = Some(Perm::identity(n));
        ChainLevel { point, gens: Vec::new(), orbit: vec![point], trans }
    }

    fn rebuild(&mut self) {
        let n = self.trans.len();
        let mut trans: Vec<Option<Perm>> = vec![None; n];
        trans[self.point] = Some(Perm::identity(n));
        let mut queue = VecDeque::from([self.point]);
        while let Some(x) = queue.pop_front() {
            let ux = trans[x].clone().expect("visited");
            for s in &self.gens {
                let y = s.apply(x);
                if trans[y].is_none() {
                    trans[y] = Some(s.compose(&ux));
                    queue.push_back(y);
                }
            }
        }
        self.orbit = (0..n).filter(|&i| trans[i].is_some()).collect();
        self.trans = trans;
    }
}

/// Stabilizer chain built by Schreier–Sims.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Perm]) -> Self {
        let mut chain = StabChain { degree, levels: Vec::new() };
        for g in gens {
            if !g.is_identity() && !chain.contains(g) {
                chain.insert(g.clone(), 0);
                chain.complete();
            }
        }
        chain
    }

    /// Strips `g` through the chain from `level`; returns the residue and the level reached.
    fn sift(&self, g: &Perm, from: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for i in from..self.levels.len() {
            let lvl = &self.levels[i];
            let b = h.apply(lvl.point);
            match &lvl.trans[b] {
                Some(u) => h = u.inverse().compose(&h),
                None => return (h, i),
            }
        }
        (h, self.levels.len())
    }

    fn insert(&mut self, g: Perm, from: usize) {
        let (h, reached) = self.sift(&g, from);
        let upto = reached.min(self.levels.len());
        if reached == self.levels.len() {
            let moved = (0..self.degree).find(|&i| h.apply(i) != i).expect("nonidentity residue");
            self.levels.push(ChainLevel::new(moved, self.degree));
        }
        for lvl in &mut self.levels[from..=upto] {
            lvl.gens.push(h.clone());
            lvl.rebuild();
        }
    }

    /// Runs Schreier generator tests until every level is closed.
    fn complete(&mut self) {
        let mut i = self.levels.len();
        while i > 0 {
            let lvl = i - 1;
            let mut added = None;
            'search: for &x in &self.levels[lvl].orbit.clone() {
                let ux = self.levels[lvl].trans[x].clone().expect("orbit point");
                for s in &self.levels[lvl].gens.clone() {
                    let y = s.apply(x);
                    let uy = self.levels[lvl].trans[y].clone().expect("orbit closed");
                    let schreier = uy.inverse().compose(&s.compose(&ux));
                    let (h, _) = self.sift(&schreier, lvl + 1);
                    if !h.is_identity() {
                        added = Some(h);
                        break 'search;
                    }
                }
            }
            match added {
                Some(h) => {
                    self.insert(h, lvl + 1);
                    i = self.levels.len();
                }
                None => i -= 1,
            }
        }
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (h, _) = self.sift(g, 0);
        h.is_identity()
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * l.orbit.len())
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Mixed-radix rank from transversal digits.
    pub fn rank(&self, g: &Perm) -> Result<BigUint> {
        let mut h = g.clone();
        let mut r = BigUint::zero();
        for lvl in &self.levels {
            let b = h.apply(lvl.point);
            let idx = lvl.orbit.binary_search(&b).map_err(|_| Error::domain("element not in group"))?;
            r = r * lvl.orbit.len() + idx;
            h = lvl.trans[b].as_ref().expect("orbit point").inverse().compose(&h);
        }
        if !h.is_identity() {
            return Err(Error::domain("element not in group"));
        }
        Ok(r)
    }

    pub fn unrank(&self, rank: &BigUint) -> Result<Perm> {
        if rank >= &self.order() {
            return Err(Error::domain("rank exceeds group order"));
        }
        let mut digits = vec![0usize; self.levels.len()];
        let mut r = rank.clone();
        for (i, lvl) in self.levels.iter().enumerate().rev() {
            let (q, d) = r.div_rem(&BigUint::from(lvl.orbit.len()));
            digits[i] = d.to_usize().expect("digit");
            r = q;
        }
        let mut g = Perm::identity(self.degree);
        for (lvl, &d) in self.levels.iter().zip(&digits) {
            let b = lvl.orbit[d];
            g = g.compose(lvl.trans[b].as_ref().expect("orbit point"));
        }
        Ok(g)
    }
}

pub fn is_transitive(n: usize, gens: &[Perm]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0usize];
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Outcome of the giant test: the group is `A_n` or `S_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Giant {
    Alternating,
    Symmetric,
}

/// Evidence that the group generated by `gens` contains `A_n`.
#[derive(Clone, Debug)]
pub struct GiantCertificate {
    pub kind: Giant,
    pub prime: usize,
    pub tries: usize,
}

/// Jordan's criterion: a transitive group containing an element with a prime cycle
/// length `p`, `n/2 < p ≤ n − 3`, contains `A_n`.  Random elements come from product
/// replacement.
pub fn recognize_giant(n: usize, gens: &[Perm], rng: &mut ChaCha8Rng, max_tries: usize) -> Result<GiantCertificate> {
    if n < 8 {
        return Err(Error::capacity("giant test needs degree at least 8"));
    }
    if !is_transitive(n, gens) {
        return Err(Error::capacity("group is intransitive, not a giant"));
    }
    let kind = if gens.iter().all(Perm::is_even) { Giant::Alternating } else { Giant::Symmetric };
    let mut slots: Vec<Perm> = gens.to_vec();
    while slots.len() < 10 {
        slots.push(gens[slots.len() % gens.len()].clone());
    }
    let mut acc = Perm::identity(n);
    for _ in 0..50 {
        step_replacement(&mut slots, &mut acc, rng);
    }
    for t in 0..max_tries {
        step_replacement(&mut slots, &mut acc, rng);
        let lens = acc.cycle_lengths();
        if let Some(&p) = lens.iter().find(|&&l| 2 * l > n && l + 3 <= n && is_prime(l)) {
            return Ok(GiantCertificate { kind, prime: p, tries: t + 1 });
        }
    }
    Err(Error::capacity(format!("no Jordan cycle found in {max_tries} random elements")))
}

fn step_replacement(slots: &mut [Perm], acc: &mut Perm, rng: &mut ChaCha8Rng) {
    let k = slots.len();
    let i = rng.gen_range(0..k);
    let mut j = rng.gen_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    slots[i] = if rng.gen_bool(0.5) { slots[i].compose(&slots[j]) } else { slots[j].compose(&slots[i]) };
    *acc = acc.compose(&slots[i]);
}

/// A permutation group with rank/unrank onto `[0, |G|)`.
#[derive(Clone, Debug)]
pub enum PermGroup {
    Chain(StabChain),
    Symmetric(usize),
    Alternating(usize),
}

impl PermGroup {
    pub fn degree(&self) -> usize {
        match self {
            PermGroup::Chain(c) => c.degree,
            PermGroup::Symmetric(n) | PermGroup::Alternating(n) => *n,
        }
    }

    pub fn order(&self) -> BigUint {
        match self {
            PermGroup::Chain(c) => c.order(),
            PermGroup::Symmetric(n) => factorial(*n),
            PermGroup::Alternating(n) => {
                let f = factorial(*n);
                if *n >= 2 {
                    f / 2u32
                } else {
                    f
                }
            }
        }
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree() {
            return false;
        }
        match self {
            PermGroup::Chain(c) => c.contains(g),
            PermGroup::Symmetric(_) => true,
            PermGroup::Alternating(_) => g.is_even(),
        }
    }

    pub fn rank(&self, g: &Perm) -> Result<BigUint> {
        match self {
            PermGroup::Chain(c) => c.rank(g),
            PermGroup::Symmetric(_) => Ok(lehmer_rank(g)),
            PermGroup::Alternating(n) => {
                if !g.is_even() {
                    return Err(Error::domain("odd permutation is not in A_n"));
                }
                // lexicographic neighbours 2r, 2r+1 differ by a transposition of the last two
                Ok(if *n >= 2 { lehmer_rank(g) >> 1u32 } else { BigUint::zero() })
            }
        }
    }

    pub fn unrank(&self, r: &BigUint) -> Result<Perm> {
        match self {
            PermGroup::Chain(c) => c.unrank(r),
            PermGroup::Symmetric(n) => lehmer_unrank(*n, r),
            PermGroup::Alternating(n) => {
                if *n < 2 {
                    return lehmer_unrank(*n, r);
                }
                let p = lehmer_unrank(*n, &(r << 1u32))?;
                if p.is_even() {
                    Ok(p)
                } else {
                    lehmer_unrank(*n, &((r << 1u32) + 1u32))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cyc(n: usize, cycle: &[u32]) -> Perm {
        let mut v: Vec<u32> = (0..n as u32).collect();
        for w in 0..cycle.len() {
            v[cycle[w] as usize] = cycle[(w + 1) % cycle.len()];
        }
        Perm(v)
    }

    /// All permutations generated by `gens`, by closure.  Test oracle only.
    fn closure(n: usize, gens: &[Perm]) -> std::collections::BTreeSet<Perm> {
        let mut set = std::collections::BTreeSet::from([Perm::identity(n)]);
        let mut frontier = vec![Perm::identity(n)];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = g.compose(&x);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    #[test]
    fn lehmer_round_trip_and_order() {
        let n = 5;
        for r in 0..120u32 {
            let p = lehmer_unrank(n, &BigUint::from(r)).unwrap();
            assert_eq!(lehmer_rank(&p), BigUint::from(r));
            if r > 0 {
                let q = lehmer_unrank(n, &BigUint::from(r - 1)).unwrap();
                assert!(q < p, "lexicographic order");
            }
        }
    }

    #[test]
    fn chain_order_matches_closure() {
        let cases: Vec<(usize, Vec<Perm>)> = vec![
            (4, vec![cyc(4, &[0, 1, 2, 3]), cyc(4, &[0, 1])]),
            (5, vec![cyc(5, &[0, 1, 2]), cyc(5, &[2, 3, 4])]),
            (6, vec![cyc(6, &[0, 1, 2, 3, 4, 5]), cyc(6, &[0, 5]).compose(&cyc(6, &[1, 4])).compose(&cyc(6, &[2, 3]))]),
            (6, vec![cyc(6, &[0, 1]), cyc(6, &[2, 3]), cyc(6, &[4, 5])]),
            (7, vec![cyc(7, &[0, 1, 2, 3, 4, 5, 6]), cyc(7, &[1, 2, 4]).compose(&cyc(7, &[3, 6, 5]))]),
        ];
        for (n, gens) in cases {
            let chain = StabChain::new(n, &gens);
            let all = closure(n, &gens);
            assert_eq!(chain.order(), BigUint::from(all.len()));
            let mut ranks = std::collections::BTreeSet::new();
            for g in &all {
                assert!(chain.contains(g));
                let r = chain.rank(g).unwrap();
                assert_eq!(&chain.unrank(&r).unwrap(), g);
                ranks.insert(r);
            }
            assert_eq!(ranks.len(), all.len());
            assert!(ranks.iter().all(|r| r < &chain.order()));
        }
    }

    #[test]
    fn alternating_rank_is_a_bijection() {
        let g = PermGroup::Alternating(5);
        assert_eq!(g.order(), BigUint::from(60u32));
        let mut seen = std::collections::BTreeSet::new();
        for r in 0..60u32 {
            let p = g.unrank(&BigUint::from(r)).unwrap();
            assert!(p.is_even());
            assert_eq!(g.rank(&p).unwrap(), BigUint::from(r));
            seen.insert(p);
        }
        assert_eq!(seen.len(), 60);
    }

    #[test]
    fn giant_test_agrees_with_schreier_sims() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let full = vec![cyc(n, &(0..n as u32).collect::<Vec<_>>()), cyc(n, &[0, 1])];
        let even = vec![cyc(n, &[0, 1, 2]), cyc(n, &(1..n as u32).collect::<Vec<_>>())];
        let c = recognize_giant(n, &full, &mut rng, 2000).unwrap();
        assert_eq!(c.kind, Giant::Symmetric);
        assert_eq!(StabChain::new(n, &full).order(), factorial(n));
        let c = recognize_giant(n, &even, &mut rng, 2000).unwrap();
        assert_eq!(c.kind, Giant::Alternating);
        assert_eq!(StabChain::new(n, &even).order(), factorial(n) / 2u32);
        // an imprimitive group never yields a certificate
        let blocks = vec![cyc(n, &(0..n as u32).collect::<Vec<_>>()), cyc(n, &[0, 2]).compose(&cyc(n, &[1, 3]))];
        let order = StabChain::new(n, &blocks).order();
        assert!(order < factorial(n) / 2u32);
        assert!(recognize_giant(n, &blocks, &mut rng, 300).is_err());
    }
}
