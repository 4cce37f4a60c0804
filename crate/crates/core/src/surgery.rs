//! `ė(x, c⁰, c¹)`: `e` with orbit surgery at the sites of `B(χ†(x), c⁰, c¹)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use rand::Rng;

use crate::coding::{chi, chi_dagger_stream, BitSeq, BitStream, Bits, GoodStream};
use crate::error::{Error, Result};
use crate::inj::Injection;
use crate::orders::OrderContext;
use crate::semaphore::{Semaphore, Universe};
use crate::tower::Tower;
use crate::words::{SeedTriple, Sign};

/// `(x, c⁰, c¹)` with `g = χ†(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSeed {
    pub triple: Arc<SeedTriple>,
    pub g: Injection,
}

impl GeneratorSeed {
    pub fn new(triple: SeedTriple) -> Result<Self> {
        let g = chi_dagger_stream(&triple.x)?;
        Ok(GeneratorSeed { triple: Arc::new(triple), g })
    }

    pub fn from_parts(x: BitStream, c0: BitStream, c1: BitStream) -> Result<Self> {
        GeneratorSeed::new(SeedTriple::new(x, c0, c1))
    }

    pub fn x_in_range(&self) -> Result<bool> {
        self.triple.x.in_range_chi()
    }

    fn c0(&self) -> BitSeq {
        BitSeq::Infinite(self.triple.d0.clone())
    }

    fn c1(&self) -> BitSeq {
        BitSeq::Infinite(self.triple.d1.clone())
    }
}

impl fmt::Display for GeneratorSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.triple)
    }
}

/// Either `[x ; c0 ; c1]` or three non-comment lines.
impl FromStr for GeneratorSeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('[') {
            return GeneratorSeed::new(t.parse()?);
        }
        let lines: Vec<&str> = t.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        if lines.len() != 3 {
            return Err(Error::parse(format!("a seed needs three bit-sequence lines, got {}", lines.len())));
        }
        GeneratorSeed::from_parts(lines[0].parse()?, lines[1].parse()?, lines[2].parse()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    /// `g(n)`.
    Site,
    /// `e(m)` for `m = g⁻¹(n)`.
    Rejoin,
    /// `e²(n)` for `m = g⁻¹(e(n))`.
    Bypass,
    Plain,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::Site => 1,
            Case::Rejoin => 2,
            Case::Bypass => 3,
            Case::Plain => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdotValue {
    pub value: BigUint,
    pub case: Case,
    /// Which of the guards of cases 1–3 hold.
    pub guards: [bool; 3],
    /// Two guards hold only because `g` fixes the site (1, 2) or `e` fixes `g(m)` (2, 3);
    /// the earlier case is taken.
    pub coincidence: bool,
}

impl EdotValue {
    pub fn exclusive(&self) -> bool {
        self.guards.iter().filter(|&&b| b).count() <= 1 || self.coincidence
    }
}

/// Evaluator for one seed; memoizes the surgery sites.
pub struct Edot<'a> {
    pub tower: &'a Tower,
    pub seed: GeneratorSeed,
    pub universe: Universe,
    sem: Semaphore<'a>,
    sites: Mutex<Option<(usize, Arc<Vec<BigUint>>)>>,
    cache: Mutex<HashMap<BigUint, EdotValue>>,
}

impl<'a> Edot<'a> {
    pub fn new(tower: &'a Tower, seed: GeneratorSeed, universe: Universe) -> Self {
        Edot {
            tower,
            seed,
            universe,
            sem: Semaphore::new(tower),
            sites: Mutex::new(None),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn plain(tower: &'a Tower, seed: GeneratorSeed) -> Self {
        Edot::new(tower, seed, Universe::empty())
    }

    pub fn e(&self, p: &BigUint) -> Result<BigUint> {
        self.tower.eval_seed(&self.seed.triple, Sign::Pos, p)
    }

    pub fn e_inv(&self, p: &BigUint) -> Result<BigUint> {
        self.tower.eval_seed(&self.seed.triple, Sign::Neg, p)
    }

    /// Points `m` meeting every condition of case 1, in intervals up to `level`.
    pub fn sites_upto(&self, level: usize) -> Result<Arc<Vec<BigUint>>> {
        {
            let guard = self.sites.lock().expect("sites lock");
            if let Some((lv, s)) = &*guard {
                if *lv >= level {
                    let s = s.clone();
                    drop(guard);
                    return self.filter_level(&s, level);
                }
            }
        }
        let g = &self.seed.g;
        let (c0, c1) = (self.seed.c0(), self.seed.c1());
        let b = self.sem.b_targeted(&self.universe, g, &c0, &c1, level)?;
        let ord = OrderContext::new(self.tower, g);
        let mut out = Vec::new();
        for m in &b.kept {
            let len = m + 1u32;
            if !c0.prefix_is_good(&len)? || !c1.prefix_is_good(&len)? {
                continue;
            }
            let below: Vec<&BigUint> = b.b0.iter().filter(|p| *p < m).collect();
            let mut comparable = false;
            'pairs: for a in &below {
                for c in &below {
                    if ord.less0(a, c)? {
                        comparable = true;
                        break 'pairs;
                    }
                }
            }
            if !comparable {
                out.push(m.clone());
            }
        }
        let out = Arc::new(out);
        *self.sites.lock().expect("sites lock") = Some((level, out.clone()));
        Ok(out)
    }

    fn filter_level(&self, s: &[BigUint], level: usize) -> Result<Arc<Vec<BigUint>>> {
        let mut out = Vec::new();
        for m in s {
            if self.tower.interval_of(m)? <= level {
                out.push(m.clone());
            }
        }
        Ok(Arc::new(out))
    }

    /// `ė(x, c⁰, c¹)(n)`.
    pub fn eval(&self, n: &BigUint) -> Result<EdotValue> {
        if let Some(v) = self.cache.lock().expect("cache").get(n) {
            return Ok(v.clone());
        }
        let level = self.tower.interval_of(n)?;
        let sites = self.sites_upto(level)?;
        let site: HashSet<&BigUint> = sites.iter().collect();
        let g = &self.seed.g;
        let en = self.e(n)?;
        let m2 = g.inv(n).filter(|m| site.contains(m));
        let m3 = g.inv(&en).filter(|m| site.contains(m));
        let guards = [site.contains(n), m2.is_some(), m3.is_some()];
        let coincidence = (guards[0] && guards[1] && m2.as_ref() == Some(n)) || (guards[1] && guards[2] && en == *n);
        let (value, case) = if guards[0] {
            (g.get(n).expect("sites lie in dom g"), Case::Site)
        } else if let Some(m) = m2 {
            (self.e(&m)?, Case::Rejoin)
        } else if m3.is_some() {
            (self.e(&en)?, Case::Bypass)
        } else {
            (en, Case::Plain)
        };
        let out = EdotValue { value, case, guards, coincidence };
        self.cache.lock().expect("cache").insert(n.clone(), out.clone());
        Ok(out)
    }

    pub fn value(&self, n: &BigUint) -> Result<BigUint> {
        Ok(self.eval(n)?.value)
    }

    /// `ė⁻¹(v)` from the four inverted branches, confirmed by forward evaluation.
    pub fn eval_inverse(&self, v: &BigUint) -> Result<BigUint> {
        let g = &self.seed.g;
        let ev = self.e_inv(v)?;
        let mut cands = vec![ev.clone(), self.e_inv(&ev)?];
        cands.extend(g.inv(v));
        cands.extend(g.get(&ev));
        cands.sort();
        cands.dedup();
        let mut hits = Vec::new();
        for c in cands {
            if self.tower.interval_of(&c).is_ok() && self.value(&c)? == *v {
                hits.push(c);
            }
        }
        match hits.len() {
            1 => Ok(hits.pop().expect("one hit")),
            0 => Err(Error::domain(format!("no preimage of {v} among the surgery branches"))),
            _ => Err(Error::domain(format!("{v} has several preimages {hits:?}"))),
        }
    }

    /// For finite `g`: a bound beyond which `ė = e`. `None` when `g` is infinite.
    pub fn surgery_bound(&self) -> Result<Option<BigUint>> {
        let g = &self.seed.g;
        let Some(len) = g.len() else { return Ok(None) };
        // No anchor lives in an interval ending past lh(g).
        let top = self.tower.interval_of(&(len + 1u32))?;
        let sites = self.sites_upto(top)?;
        let mut bound = BigUint::from(0u32);
        for m in sites.iter() {
            let gm = g.get(m).expect("site in dom g");
            let back = self.e_inv(&gm)?;
            for p in [m.clone(), gm, back] {
                if p >= bound {
                    bound = p + 1u32;
                }
            }
        }
        Ok(Some(bound))
    }
}

#[derive(Clone, Debug, Default)]
pub struct PermReport {
    pub window_end: BigUint,
    /// Points below this were evaluated to look for preimages.
    pub slack_end: BigUint,
    pub injective: bool,
    pub collision: Option<(BigUint, BigUint)>,
    pub unhit: Vec<BigUint>,
    /// Intervals past the one holding `window_end - 1` that a needed preimage came from.
    pub slack_used: usize,
    pub exclusivity_violations: Vec<BigUint>,
    pub coincidences: usize,
    pub case_counts: [usize; 4],
}

impl PermReport {
    pub fn ok(&self) -> bool {
        self.injective && self.unhit.is_empty() && self.exclusivity_violations.is_empty()
    }
}

/// Injectivity on `[0, window_end)`, exclusivity of the cases, and surjectivity onto
/// `[0, window_end)` from points below the end of the following interval.
pub fn verify_local_permutation(ed: &Edot, window_end: u64) -> Result<PermReport> {
    let t = ed.tower;
    if window_end == 0 {
        return Ok(PermReport { injective: true, ..Default::default() });
    }
    let last = t.interval_of(&BigUint::from(window_end - 1))?;
    let slack_end = t.end(last + 1)?;
    let slack_u = u64::try_from(&slack_end).map_err(|_| Error::capacity("slack window too large"))?;
    let mut rep = PermReport {
        window_end: BigUint::from(window_end),
        slack_end: slack_end.clone(),
        injective: true,
        ..Default::default()
    };
    let mut seen: HashMap<BigUint, BigUint> = HashMap::new();
    let mut max_pre = 0u64;
    for p in 0..slack_u {
        let pb = BigUint::from(p);
        let v = ed.eval(&pb)?;
        rep.case_counts[(v.case.number() - 1) as usize] += 1;
        if !v.exclusive() {
            rep.exclusivity_violations.push(pb.clone());
        }
        if v.coincidence {
            rep.coincidences += 1;
        }
        if let Some(prev) = seen.insert(v.value.clone(), pb.clone()) {
            if rep.collision.is_none() {
                rep.collision = Some((prev, pb.clone()));
            }
            rep.injective = false;
        }
        if v.value < rep.window_end {
            max_pre = max_pre.max(p);
        }
    }
    for q in 0..window_end {
        if !seen.contains_key(&BigUint::from(q)) {
            rep.unhit.push(BigUint::from(q));
        }
    }
    rep.slack_used = t.interval_of(&BigUint::from(max_pre))?.saturating_sub(last);
    Ok(rep)
}

/// Points in `[from, to)` where `ė ≠ e`.
pub fn disagreements_with_e(ed: &Edot, from: u64, to: u64) -> Result<Vec<BigUint>> {
    let mut out = Vec::new();
    for p in from..to {
        let pb = BigUint::from(p);
        if ed.value(&pb)? != ed.e(&pb)? {
            out.push(pb);
        }
    }
    Ok(out)
}

/// A good stream with a random short start and skip pattern.
pub fn random_good(rng: &mut impl Rng) -> BitStream {
    const STARTS: [&str; 5] = ["1", "11", "01", "1101", "111"];
    let start = Bits::from_str01(STARTS[rng.gen_range(0..STARTS.len())]).expect("literal");
    let skips = (0..rng.gen_range(1..3)).map(|_| rng.gen_range(0..2)).collect();
    match GoodStream::new(start, skips) {
        Ok(s) => BitStream::Good(s),
        Err(_) => BitStream::Periodic { prefix: Bits::new(), period: Bits::from_str01("1").expect("literal") },
    }
}

/// A near-identity injection: a shuffled short prefix followed by the identity.
pub fn random_near_identity(rng: &mut impl Rng, max_prefix: usize) -> Injection {
    let r = rng.gen_range(1..=max_prefix);
    let mut vals: Vec<u64> = (0..r as u64).collect();
    for i in (1..r).rev() {
        let j = rng.gen_range(0..=i);
        vals.swap(i, j);
    }
    Injection::affine(vals, BigUint::from(0u32)).expect("permutation prefix")
}

/// A seed whose `x` codes a near-identity `g`; with `finite_x`, `x` codes a
/// `len`-entry prefix of it and is zero afterwards.
pub fn sample_seed(rng: &mut impl Rng, finite_x: Option<usize>) -> GeneratorSeed {
    let g = random_near_identity(rng, 4);
    let x = match finite_x {
        None => BitStream::Chi(g),
        Some(len) => {
            let vals: Vec<u64> = (0..len as u64).map(|i| u64::try_from(&g.get_u64(i).expect("total")).expect("small")).collect();
            BitStream::EventuallyZero(chi(&vals))
        }
    };
    GeneratorSeed::from_parts(x, random_good(rng), random_good(rng)).expect("valid seed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones() -> BitStream {
        "periodic: ∅ / 1".parse().unwrap()
    }

    fn good() -> BitStream {
        "good: 11".parse().unwrap()
    }

    #[test]
    fn no_sites_means_e() {
        let t = Tower::scaled();
        let seed = GeneratorSeed::from_parts("ones: 0 3".parse().unwrap(), ones(), ones()).unwrap();
        assert!(seed.g.is_finite());
        let ed = Edot::plain(&t, seed);
        assert!(disagreements_with_e(&ed, 0, 400).unwrap().is_empty());
        assert_eq!(ed.surgery_bound().unwrap(), Some(BigUint::from(0u32)));
        let rep = verify_local_permutation(&ed, 300).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.slack_used, 0);
        assert_eq!(rep.case_counts[3] as u64, u64::try_from(&rep.slack_end).unwrap());
    }

    #[test]
    fn identity_code_performs_surgery_at_first_anchor() {
        let t = Tower::scaled();
        let seed = GeneratorSeed::from_parts(BitStream::Chi(Injection::identity()), good(), good()).unwrap();
        let ed = Edot::plain(&t, seed);
        let sites = ed.sites_upto(8).unwrap();
        assert_eq!(sites[0], BigUint::from(21u32));
        let v = ed.eval(&BigUint::from(21u32)).unwrap();
        assert_eq!(v.case, Case::Site);
        assert_eq!(v.value, BigUint::from(21u32));
        assert!(v.coincidence);
        let rep = verify_local_permutation(&ed, 1000).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert!(rep.case_counts[0] >= 1 && rep.case_counts[2] >= 1);
        assert!(rep.slack_used <= 1);
        // all-ones selectors are not good past two bits
        let bad = GeneratorSeed::from_parts(BitStream::Chi(Injection::identity()), ones(), ones()).unwrap();
        assert!(Edot::plain(&t, bad).sites_upto(8).unwrap().is_empty());
        for p in [20u32, 21, 22, 40, 500] {
            let v = ed.value(&BigUint::from(p)).unwrap();
            assert_eq!(ed.eval_inverse(&v).unwrap(), BigUint::from(p));
        }
    }

    #[test]
    fn parse_seed_file() {
        let s: GeneratorSeed = "# seed\nchi: 1 0 +0\nones: 0 1\nperiodic: ∅ / 1\n".parse().unwrap();
        assert_eq!(s.g.get_u64(0), Some(BigUint::from(1u32)));
        assert!(s.x_in_range().unwrap());
        assert!("ones: 0\n".parse::<GeneratorSeed>().is_err());
    }

    #[test]
    fn sampled_seeds_are_local_permutations() {
        let t = Tower::scaled();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let ed = Edot::plain(&t, sample_seed(&mut rng, None));
            let rep = verify_local_permutation(&ed, 200).unwrap();
            assert!(rep.ok(), "{} {rep:?}", ed.seed);
        }
    }
}
