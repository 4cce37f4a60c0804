//! Words over `A ∪ {x}`, substitution of a finite partial injection for `x`,
//! and the orbit-gluing construction of a permutation that joins orbits.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::surgery::Edot;
use crate::words::Sign;

/// A finite partial injection on the naturals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialInj {
    fwd: BTreeMap<u64, u64>,
    inv: BTreeMap<u64, u64>,
}

impl PartialInj {
    pub fn new() -> Self {
        PartialInj::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut h = PartialInj::new();
        for (a, b) in pairs {
            h.insert(a, b)?;
        }
        Ok(h)
    }

    pub fn insert(&mut self, a: u64, b: u64) -> Result<()> {
        if self.fwd.contains_key(&a) || self.inv.contains_key(&b) {
            return Err(Error::domain(format!("({a}, {b}) breaks injectivity")));
        }
        self.fwd.insert(a, b);
        self.inv.insert(b, a);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn get(&self, a: u64) -> Option<u64> {
        self.fwd.get(&a).copied()
    }

    pub fn inv(&self, b: u64) -> Option<u64> {
        self.inv.get(&b).copied()
    }

    pub fn in_dom(&self, a: u64) -> bool {
        self.fwd.contains_key(&a)
    }

    pub fn in_range(&self, b: u64) -> bool {
        self.inv.contains_key(&b)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.fwd.iter().map(|(&a, &b)| (a, b))
    }

    /// `dom ∪ range`.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.fwd.keys().chain(self.inv.keys()).copied()
    }

    fn first_gap(keys: &BTreeMap<u64, u64>) -> u64 {
        let mut next = 0;
        for &k in keys.keys() {
            if k != next {
                break;
            }
            next += 1;
        }
        next
    }

    /// `min((ω ∖ dom) ∪ (ω ∖ range))`.
    pub fn min_missing(&self) -> u64 {
        PartialInj::first_gap(&self.fwd).min(PartialInj::first_gap(&self.inv))
    }

    /// Whether `[0, m) ⊆ dom ∩ range`.
    pub fn covers(&self, m: u64) -> bool {
        self.min_missing() >= m
    }

    /// One `a b` pair per line.
    pub fn to_text(&self) -> String {
        self.pairs().map(|(a, b)| format!("{a} {b}\n")).collect()
    }
}

impl fmt::Display for PartialInj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(a, b)| format!("({a},{b})")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// An enumeration `O_0, O_1, …` of the orbits of a group, ordered by orbit minimum.
pub trait OrbitSource {
    /// The minimum of the orbit containing `p`.
    fn orbit_min(&mut self, p: u64) -> Result<u64>;

    /// All members of the orbit with minimum `min`, when the orbit is finite.
    fn members(&mut self, min: u64) -> Result<Vec<u64>>;

    fn name(&self) -> String;
}

/// The trivial group: every orbit is a singleton.
#[derive(Clone, Copy, Debug, Default)]
pub struct Singletons;

impl OrbitSource for Singletons {
    fn orbit_min(&mut self, p: u64) -> Result<u64> {
        Ok(p)
    }

    fn members(&mut self, min: u64) -> Result<Vec<u64>> {
        Ok(vec![min])
    }

    fn name(&self) -> String {
        "singletons".into()
    }
}

/// A user-supplied partition; points not listed are singletons.
#[derive(Clone, Debug, Default)]
pub struct FilePartition {
    owner: HashMap<u64, u64>,
    blocks: HashMap<u64, Vec<u64>>,
}

impl FilePartition {
    /// One block per non-empty line of space-separated naturals; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut part = FilePartition::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut block = Vec::new();
            for tok in line.split_whitespace() {
                let v: u64 = tok.parse().map_err(|_| Error::parse(format!("line {}: bad natural {tok:?}", lineno + 1)))?;
                block.push(v);
            }
            block.sort_unstable();
            block.dedup();
            let min = block[0];
            for &v in &block {
                if part.owner.insert(v, min).is_some() {
                    return Err(Error::parse(format!("line {}: {v} already belongs to another block", lineno + 1)));
                }
            }
            part.blocks.insert(min, block);
        }
        Ok(part)
    }
}

impl OrbitSource for FilePartition {
    fn orbit_min(&mut self, p: u64) -> Result<u64> {
        Ok(self.owner.get(&p).copied().unwrap_or(p))
    }

    fn members(&mut self, min: u64) -> Result<Vec<u64>> {
        Ok(self.blocks.get(&min).cloned().unwrap_or_else(|| vec![min]))
    }

    fn name(&self) -> String {
        format!("file partition ({} blocks)", self.blocks.len())
    }
}

/// Orbits of `⟨ė_0, …, ė_r⟩`, computed by closure under the generators and
/// their inverses. Orbits larger than `cap` are a capacity error.
pub struct EdotOrbits<'a> {
    gens: Vec<Edot<'a>>,
    cap: usize,
    owner: HashMap<u64, u64>,
    blocks: HashMap<u64, Vec<u64>>,
}

impl<'a> EdotOrbits<'a> {
    pub fn new(gens: Vec<Edot<'a>>, cap: usize) -> Self {
        EdotOrbits { gens, cap, owner: HashMap::new(), blocks: HashMap::new() }
    }

    fn close(&mut self, p: u64) -> Result<u64> {
        if let Some(&m) = self.owner.get(&p) {
            return Ok(m);
        }
        let mut seen = HashSet::from([p]);
        let mut queue = VecDeque::from([p]);
        while let Some(q) = queue.pop_front() {
            let qb = BigUint::from(q);
            for ed in &self.gens {
                for v in [ed.value(&qb)?, ed.eval_inverse(&qb)?] {
                    let v = u64::try_from(&v).map_err(|_| Error::capacity("orbit leaves u64"))?;
                    if seen.insert(v) {
                        if seen.len() > self.cap {
                            return Err(Error::capacity(format!("orbit of {p} exceeds {} points", self.cap)));
                        }
                        queue.push_back(v);
                    }
                }
            }
        }
        let mut block: Vec<u64> = seen.into_iter().collect();
        block.sort_unstable();
        let min = block[0];
        for &v in &block {
            self.owner.insert(v, min);
        }
        self.blocks.insert(min, block);
        Ok(min)
    }
}

impl OrbitSource for EdotOrbits<'_> {
    fn orbit_min(&mut self, p: u64) -> Result<u64> {
        self.close(p)
    }

    fn members(&mut self, min: u64) -> Result<Vec<u64>> {
        self.close(min)?;
        Ok(self.blocks[&min].clone())
    }

    fn name(&self) -> String {
        format!("ė-subgroup on {} generators", self.gens.len())
    }
}

/// What one gluing step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueStep {
    pub n: u64,
    /// Minimum of the chosen orbit.
    pub m: u64,
    pub pair: (u64, u64),
}

/// Least `m` that is the minimum of an orbit disjoint from `touched`, scanning from `from`.
fn least_fresh_orbit(src: &mut dyn OrbitSource, touched: &HashSet<u64>, from: u64, limit: u64) -> Result<u64> {
    let mut c = from;
    while c < limit {
        if src.orbit_min(c)? == c && !touched.contains(&c) {
            return Ok(c);
        }
        c += 1;
    }
    Err(Error::capacity(format!("no untouched orbit with minimum below {limit}")))
}

fn touched_orbits(h: &PartialInj, n: u64, src: &mut dyn OrbitSource) -> Result<HashSet<u64>> {
    let mut out = HashSet::new();
    for p in h.support().chain([n]) {
        out.insert(src.orbit_min(p)?);
    }
    Ok(out)
}

fn apply_step(h: &mut PartialInj, n: u64, m: u64) -> Result<GlueStep> {
    let pair = if !h.in_dom(n) { (n, m) } else { (m, n) };
    h.insert(pair.0, pair.1)?;
    Ok(GlueStep { n, m, pair })
}

/// One step: `n` is the least point missing from dom or range, `O_j` the first
/// orbit avoiding `dom ∪ range ∪ {n}`, `m = min O_j`; add `(n, m)` if
/// `n ∉ dom`, else `(m, n)`.
pub fn glue_step(h: &PartialInj, src: &mut dyn OrbitSource, limit: u64) -> Result<(PartialInj, GlueStep)> {
    let n = h.min_missing();
    let touched = touched_orbits(h, n, src)?;
    let m = least_fresh_orbit(src, &touched, 0, limit)?;
    let mut next = h.clone();
    let step = apply_step(&mut next, n, m)?;
    Ok((next, step))
}

/// Iterated gluing. Touched orbits only accumulate, so the scan for the next
/// fresh orbit resumes where the last one stopped.
pub struct Glue<'s> {
    pub h: PartialInj,
    src: &'s mut dyn OrbitSource,
    touched: HashSet<u64>,
    cursor: u64,
    limit: u64,
}

impl<'s> Glue<'s> {
    pub fn new(src: &'s mut dyn OrbitSource, limit: u64) -> Self {
        Glue { h: PartialInj::new(), src, touched: HashSet::new(), cursor: 0, limit }
    }

    pub fn step(&mut self) -> Result<GlueStep> {
        let n = self.h.min_missing();
        let on = self.src.orbit_min(n)?;
        self.touched.insert(on);
        let m = least_fresh_orbit(self.src, &self.touched, self.cursor, self.limit)?;
        self.cursor = m;
        self.touched.insert(m);
        apply_step(&mut self.h, n, m)
    }

    pub fn source(&mut self) -> &mut dyn OrbitSource {
        self.src
    }
}

/// Checks gathered over an iterated gluing run.
#[derive(Clone, Debug, Default)]
pub struct GlueReport {
    pub steps: usize,
    pub injective: bool,
    pub size_matches: bool,
    pub n_nondecreasing: bool,
    /// Steps whose chosen orbit met the support before the step.
    pub overlapping_steps: Vec<usize>,
    /// Pairs of `h` joining two distinct orbits.
    pub mixing_pairs: usize,
    pub min_missing: u64,
}

impl GlueReport {
    pub fn ok(&self) -> bool {
        self.injective && self.size_matches && self.n_nondecreasing && self.overlapping_steps.is_empty()
    }
}

/// Runs `steps` gluing steps, checking each chosen orbit against the support
/// by listing the orbit's members.
pub fn run_glue(src: &mut dyn OrbitSource, steps: usize, limit: u64) -> Result<(PartialInj, GlueReport)> {
    let mut g = Glue::new(src, limit);
    let mut rep = GlueReport { injective: true, size_matches: true, n_nondecreasing: true, ..GlueReport::default() };
    let mut last_n = 0;
    let mut support: HashSet<u64> = HashSet::new();
    for i in 0..steps {
        let step = g.step()?;
        if step.n < last_n {
            rep.n_nondecreasing = false;
        }
        last_n = step.n;
        let members = g.source().members(step.m)?;
        if members.iter().any(|v| support.contains(v) || *v == step.n) {
            rep.overlapping_steps.push(i);
        }
        support.insert(step.pair.0);
        support.insert(step.pair.1);
        if g.h.len() != i + 1 {
            rep.size_matches = false;
        }
        rep.steps = i + 1;
    }
    let h = g.h.clone();
    let pairs: Vec<(u64, u64)> = h.pairs().collect();
    let inv: HashSet<u64> = pairs.iter().map(|p| p.1).collect();
    rep.injective = inv.len() == pairs.len();
    let src = g.source();
    for (a, b) in pairs {
        if src.orbit_min(a)? != src.orbit_min(b)? {
            rep.mixing_pairs += 1;
        }
    }
    rep.min_missing = h.min_missing();
    Ok((h, rep))
}

/// A permutation from `A`, as something we can evaluate pointwise.
pub enum APerm<'a> {
    Identity,
    Edot(&'a Edot<'a>),
    /// A permutation of `[0, len)`; undefined outside it.
    Window(Vec<u64>),
}

impl APerm<'_> {
    pub fn window(images: Vec<u64>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &v in &images {
            let i = usize::try_from(v).ok().filter(|&i| i < images.len()).ok_or_else(|| Error::domain("window image out of range"))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain("window is not injective"));
            }
        }
        Ok(APerm::Window(images))
    }

    pub fn apply(&self, p: u64, sign: Sign) -> Result<Option<u64>> {
        match self {
            APerm::Identity => Ok(Some(p)),
            APerm::Edot(ed) => {
                let pb = BigUint::from(p);
                let v = match sign {
                    Sign::Pos => ed.value(&pb)?,
                    Sign::Neg => ed.eval_inverse(&pb)?,
                };
                Ok(u64::try_from(&v).ok())
            }
            APerm::Window(img) => {
                let Ok(i) = usize::try_from(p) else { return Ok(None) };
                if i >= img.len() {
                    return Ok(None);
                }
                Ok(match sign {
                    Sign::Pos => Some(img[i]),
                    Sign::Neg => img.iter().position(|&v| v == p).map(|j| j as u64),
                })
            }
        }
    }
}

/// One factor of a word in `W_A(x)`: `a_i^{±1}` or `x^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    A(usize, Sign),
    X(i64),
}

/// A word over `A ∪ {x}`; factor 0 is applied first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WaWord(pub Vec<Factor>);

impl WaWord {
    /// Free reduction: cancels `a a⁻¹`, merges powers of `x` and drops `x⁰`.
    pub fn reduce(&self) -> WaWord {
        let mut out: Vec<Factor> = Vec::new();
        for &f in &self.0 {
            match (out.last().copied(), f) {
                (_, Factor::X(0)) => {}
                (Some(Factor::X(a)), Factor::X(b)) => {
                    out.pop();
                    if a + b != 0 {
                        out.push(Factor::X(a + b));
                    }
                }
                (Some(Factor::A(i, s)), Factor::A(j, t)) if i == j && s != t => {
                    out.pop();
                }
                _ => out.push(f),
            }
        }
        WaWord(out)
    }

    pub fn inverse(&self) -> WaWord {
        WaWord(
            self.0
                .iter()
                .rev()
                .map(|f| match *f {
                    Factor::A(i, s) => Factor::A(i, s.flip()),
                    Factor::X(e) => Factor::X(-e),
                })
                .collect(),
        )
    }

    pub fn x_count(&self) -> usize {
        self.0.iter().filter(|f| matches!(f, Factor::X(_))).count()
    }
}

impl fmt::Display for WaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|x| match *x {
                Factor::A(i, Sign::Pos) => format!("a{i}"),
                Factor::A(i, Sign::Neg) => format!("a{i}^-1"),
                Factor::X(e) => format!("x^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `w(h)(point)`, or `None` when some step leaves the domain of `h` (or of a
/// window factor) or an intermediate value reaches `window`.
pub fn substitute(word: &WaWord, a: &[APerm], h: &PartialInj, point: u64, window: u64) -> Result<Option<u64>> {
    let mut p = point;
    if p >= window {
        return Ok(None);
    }
    for f in &word.0 {
        match *f {
            Factor::A(i, s) => {
                let g = a.get(i).ok_or_else(|| Error::domain(format!("no element a{i}")))?;
                match g.apply(p, s)? {
                    Some(v) => p = v,
                    None => return Ok(None),
                }
            }
            Factor::X(e) => {
                for _ in 0..e.unsigned_abs() {
                    let next = if e > 0 { h.get(p) } else { h.inv(p) };
                    match next {
                        Some(v) => p = v,
                        None => return Ok(None),
                    }
                    if p >= window {
                        return Ok(None);
                    }
                }
            }
        }
        if p >= window {
            return Ok(None);
        }
    }
    Ok(Some(p))
}

/// A random word in `W_A(x)` with `pieces` alternating blocks.
pub fn random_word(rng: &mut impl Rng, a_len: usize, pieces: usize, max_exp: i64) -> WaWord {
    let mut out = Vec::new();
    for _ in 0..pieces {
        out.push(Factor::A(rng.gen_range(0..a_len), if rng.gen() { Sign::Pos } else { Sign::Neg }));
        let mut e = rng.gen_range(1..=max_exp);
        if rng.gen() {
            e = -e;
        }
        out.push(Factor::X(e));
    }
    out.push(Factor::A(rng.gen_range(0..a_len), Sign::Pos));
    WaWord(out)
}

/// A word equal to `w` in the free product: inserts cancelling pairs and splits powers of `x`.
pub fn random_equal_word(rng: &mut impl Rng, w: &WaWord, a_len: usize, edits: usize, max_exp: i64) -> WaWord {
    let mut f = w.0.clone();
    for _ in 0..edits {
        let pos = rng.gen_range(0..=f.len());
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..a_len);
                let s = if rng.gen() { Sign::Pos } else { Sign::Neg };
                f.splice(pos..pos, [Factor::A(i, s), Factor::A(i, s.flip())]);
            }
            1 => {
                let e = rng.gen_range(1..=max_exp);
                f.splice(pos..pos, [Factor::X(e), Factor::X(-e)]);
            }
            _ => {
                if let Some(Factor::X(e)) = f.get(pos).copied() {
                    let k = rng.gen_range(-max_exp..=max_exp);
                    f.splice(pos..=pos, [Factor::X(k), Factor::X(e - k)]);
                }
            }
        }
    }
    WaWord(f)
}

/// Number of cycles of a windowed partial permutation (`images[i]` is the
/// image of `i`) that lie entirely in `[0, bound)`.
pub fn finite_orbit_census(images: &[u64], bound: u64) -> usize {
    let get = |p: u64| usize::try_from(p).ok().and_then(|i| images.get(i).copied());
    let mut seen = HashSet::new();
    let mut count = 0;
    for start in 0..bound.min(images.len() as u64) {
        if seen.contains(&start) {
            continue;
        }
        let mut p = start;
        let mut path = vec![start];
        let closed = loop {
            match get(p) {
                Some(v) if v < bound => {
                    if v == start {
                        break true;
                    }
                    if seen.contains(&v) || path.contains(&v) {
                        break false;
                    }
                    path.push(v);
                    p = v;
                }
                _ => break false,
            }
        };
        if closed {
            count += 1;
        }
        seen.extend(path);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::BitStream;
    use crate::surgery::GeneratorSeed;
    use crate::tower::Tower;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_steps_from_singletons() {
        let mut s = Singletons;
        let (h1, st) = glue_step(&PartialInj::new(), &mut s, 100).unwrap();
        assert_eq!((st.n, st.m), (0, 1));
        assert_eq!(h1.to_string(), "{(0,1)}");
        // 0 is missing from the range, so n = 0 ∈ dom and the pair is reversed
        let (h2, st) = glue_step(&h1, &mut s, 100).unwrap();
        assert_eq!((st.n, st.m), (0, 2));
        assert_eq!(h2.to_string(), "{(0,1),(2,0)}");
        let (h3, _) = glue_step(&h2, &mut s, 100).unwrap();
        assert_eq!(h3.to_string(), "{(0,1),(1,3),(2,0)}");
    }

    #[test]
    fn total_below_n_extends_at_n() {
        let n = 12;
        let h = PartialInj::from_pairs((0..n).map(|i| (i, (i + 1) % n))).unwrap();
        assert_eq!(h.min_missing(), n);
        let (h2, st) = glue_step(&h, &mut Singletons, 100).unwrap();
        assert_eq!(st.n, n);
        assert_eq!(st.pair, (n, n + 1));
        assert_eq!(h2.len(), h.len() + 1);
    }

    #[test]
    fn iterator_matches_free_function() {
        let text = "0 5 9\n2 3\n# comment\n7 11 13 17\n";
        let mut a = FilePartition::parse(text).unwrap();
        let mut b = FilePartition::parse(text).unwrap();
        let mut glue = Glue::new(&mut a, 10_000);
        let mut h = PartialInj::new();
        for _ in 0..60 {
            let s1 = glue.step().unwrap();
            let (next, s2) = glue_step(&h, &mut b, 10_000).unwrap();
            assert_eq!(s1, s2);
            h = next;
        }
        assert_eq!(glue.h, h);
    }

    #[test]
    fn exhaustion_is_capacity() {
        let mut s = Singletons;
        let err = run_glue(&mut s, 50, 20).unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn duplicate_block_member_rejected() {
        assert!(FilePartition::parse("1 2\n2 3\n").is_err());
        assert!(FilePartition::parse("1 x\n").is_err());
    }

    #[test]
    fn edot_orbits_stay_in_intervals() {
        let t = Tower::scaled();
        let zero: BitStream = "zero".parse().unwrap();
        let c: BitStream = "good: 11".parse().unwrap();
        let seed = GeneratorSeed::from_parts(zero, c.clone(), c).unwrap();
        let ed = Edot::plain(&t, seed);
        let mut src = EdotOrbits::new(vec![ed], 64);
        for p in 0..100u64 {
            let min = src.orbit_min(p).unwrap();
            let m = src.members(min).unwrap();
            assert!(m.contains(&p));
            let lv = t.interval_of(&BigUint::from(p)).unwrap();
            assert!(m.iter().all(|&v| t.interval_of(&BigUint::from(v)).unwrap() == lv));
        }
    }

    #[test]
    fn substitute_basics() {
        let h = PartialInj::from_pairs([(0, 1)]).unwrap();
        let a = [APerm::Identity, APerm::window(vec![2, 0, 1]).unwrap()];
        let g0 = WaWord(vec![Factor::A(1, Sign::Pos)]);
        assert_eq!(substitute(&g0, &a, &h, 0, 10).unwrap(), Some(2));
        let x = WaWord(vec![Factor::X(1)]);
        assert_eq!(substitute(&x, &a, &h, 0, 10).unwrap(), Some(1));
        assert_eq!(substitute(&x, &a, &h, 1, 10).unwrap(), None);
        let xx = WaWord(vec![Factor::X(1), Factor::X(-1)]);
        assert_eq!(substitute(&xx, &a, &h, 0, 10).unwrap(), Some(0));
        assert_eq!(substitute(&x, &a, &h, 0, 1).unwrap(), None);
    }

    #[test]
    fn census_examples() {
        let id: Vec<u64> = (0..10).collect();
        assert_eq!(finite_orbit_census(&id, 10), 10);
        let cyc: Vec<u64> = (0..10).map(|i| (i + 1) % 10).collect();
        assert_eq!(finite_orbit_census(&cyc, 10), 1);
        let shift: Vec<u64> = (0..10).map(|i| i + 1).collect();
        assert_eq!(finite_orbit_census(&shift, 10), 0);
        assert_eq!(finite_orbit_census(&cyc, 9), 0);
    }

    #[test]
    fn reduce_is_idempotent_and_inverse_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w = random_word(&mut rng, 3, 3, 3);
            let r = w.reduce();
            assert_eq!(r.reduce(), r);
            let mut both = w.0.clone();
            both.extend(w.inverse().0);
            assert!(WaWord(both).reduce().0.is_empty());
        }
    }
}
