//! Invariant suites with line-delimited JSON reports.
//!
//! Every suite is deterministic given its seed. A check that hits a capacity
//! limit is reported as skipped with the reason, never as a pass.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coding::{chi, chi_dagger, good_extend, hat, in_c, is_good, BitSeq, BitStream, Bits};
use crate::error::{Error, Result};
use crate::explorer::{dichotomy_search, maximality_probe, DichotomyKind, ProbeOutcome, SubCase};
use crate::inj::Injection;
use crate::orders::{check_strict_order, OrderContext};
use crate::periodic::{
    random_equal_word, random_word, run_glue, substitute, APerm, EdotOrbits, FilePartition, Glue, OrbitSource, Singletons,
};
use crate::recognizer::{brute_force_in_u, eval_word, in_u, reduced_words, Matcher, Prefix, TripleSpace};
use crate::semaphore::{Semaphore, Universe};
use crate::sparse::{b0_upto, in_b0, theta_state};
use crate::surgery::{disagreements_with_e, random_good, random_near_identity, sample_seed, verify_local_permutation, Edot, GeneratorSeed};
use crate::tower::{Mode, Tower, TowerConfig};
use crate::words::{count_w, OmegaWord, SeedTriple, Sign};

pub const SUITES: &[&str] =
    &["tower", "regularity", "coding", "theta", "blayer", "surgery", "recognizer", "orders", "explorer", "periodic"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// Bound or horizon the check ran with.
    pub bound: String,
    pub detail: String,
    /// Inputs reproducing a failure, together with the report seed.
    pub counterexample: Option<String>,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub suite: String,
    pub seed: u64,
    pub mode: String,
    pub checks: Vec<CheckRecord>,
    pub elapsed_ms: u128,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// One JSON object per check, then a summary object.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let line = serde_json::json!({
                "suite": self.suite,
                "seed": self.seed,
                "mode": self.mode,
                "check": c,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let summary = serde_json::json!({
            "suite": self.suite,
            "seed": self.seed,
            "mode": self.mode,
            "passed": self.checks.iter().filter(|c| c.status == Status::Pass).count(),
            "failed": self.checks.iter().filter(|c| c.status == Status::Fail).count(),
            "skipped": self.checks.iter().filter(|c| c.status == Status::Skipped).count(),
            "ok": self.ok(),
            "elapsed_ms": self.elapsed_ms,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub seed: u64,
    /// Tower for suites whose criterion does not fix the mode.
    pub mode: Mode,
    /// Multiplies every sample count; 1.0 gives the full criteria.
    pub scale: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { seed: 0x5eed, mode: Mode::Scaled, scale: 1.0 }
    }
}

impl AuditConfig {
    fn n(&self, full: usize) -> usize {
        ((full as f64 * self.scale).ceil() as usize).max(1)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

/// Outcome of one check body: `Ok(detail)` passes, `Err(counterexample)` fails.
type Verdict = std::result::Result<String, String>;

struct Suite {
    report: AuditReport,
    start: Instant,
}

impl Suite {
    fn new(name: &str, cfg: &AuditConfig, mode: &str) -> Self {
        Suite {
            report: AuditReport { suite: name.into(), seed: cfg.seed, mode: mode.into(), checks: vec![], elapsed_ms: 0 },
            start: Instant::now(),
        }
    }

    fn check(&mut self, name: &str, bound: impl Into<String>, body: impl FnOnce() -> Result<Verdict>) {
        let t0 = Instant::now();
        let (status, detail, counterexample) = match body() {
            Ok(Ok(d)) => (Status::Pass, d, None),
            Ok(Err(c)) => (Status::Fail, String::new(), Some(c)),
            Err(Error::Capacity(m)) => (Status::Skipped, format!("capacity: {m}"), None),
            Err(e) => (Status::Fail, String::new(), Some(format!("error: {e}"))),
        };
        self.report.checks.push(CheckRecord {
            name: name.into(),
            status,
            bound: bound.into(),
            detail,
            counterexample,
            elapsed_ms: t0.elapsed().as_millis(),
        });
    }

    fn runtime(&mut self, limit_s: u64) {
        let el = self.start.elapsed();
        let ok = el.as_secs() <= limit_s;
        self.report.checks.push(CheckRecord {
            name: "runtime".into(),
            status: if ok { Status::Pass } else { Status::Fail },
            bound: format!("{limit_s}s"),
            detail: format!("{:.1}s", el.as_secs_f64()),
            counterexample: (!ok).then(|| format!("took {:.1}s", el.as_secs_f64())),
            elapsed_ms: 0,
        });
    }

    fn finish(mut self) -> AuditReport {
        self.report.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.report.elapsed_ms = self.start.elapsed().as_millis();
        self.report
    }
}

/// Runs a named suite. Unknown names are a parse error.
pub fn run_suite(name: &str, cfg: &AuditConfig) -> Result<AuditReport> {
    match name {
        "tower" => Ok(tower_suite(cfg)),
        "regularity" => Ok(regularity_suite(cfg)),
        "coding" => Ok(coding_suite(cfg)),
        "theta" => Ok(theta_suite(cfg)),
        "blayer" => Ok(blayer_suite(cfg)),
        "surgery" => Ok(surgery_suite(cfg)),
        "recognizer" => Ok(recognizer_suite(cfg)),
        "orders" => Ok(orders_suite(cfg)),
        "explorer" => Ok(explorer_suite(cfg)),
        "periodic" => Ok(periodic_suite(cfg)),
        other => Err(Error::parse(format!("unknown suite `{other}`; known: {}", SUITES.join(", ")))),
    }
}

fn tower_for(cfg: &AuditConfig, mode: Mode) -> Tower {
    let mut c = match mode {
        Mode::Faithful => TowerConfig::faithful(),
        Mode::Scaled => TowerConfig::scaled(),
    };
    c.rng_seed = cfg.seed;
    Tower::new(c)
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Uniform below `n` by rejection on `bits(n)` random bits.
fn random_below(rng: &mut impl Rng, n: &BigUint) -> BigUint {
    let bits = n.bits();
    loop {
        let mut v = BigUint::zero();
        let mut left = bits;
        while left > 0 {
            let take = left.min(32);
            v = (v << take) | BigUint::from(rng.gen::<u32>() >> (32 - take));
            left -= take;
        }
        if &v < n {
            return v;
        }
    }
}

fn random_bits(rng: &mut impl Rng, len: usize) -> Bits {
    Bits((0..len).map(|_| rng.gen()).collect())
}

// ---------------------------------------------------------------- tower

fn level_conditions(s: &mut Suite, t: &Tower, label: &str, levels: std::ops::RangeInclusive<usize>) {
    s.check(&format!("{label}.I0_at_least_7"), "n=0", || {
        let l0 = t.level(0)?;
        Ok(if l0.size >= big(7) && l0.start.is_zero() { Ok(format!("|I_0| = {}", l0.size)) } else { Err(format!("|I_0| = {}", l0.size)) })
    });
    let hi = *levels.end();
    s.check(&format!("{label}.partition_and_partial_sums"), format!("n<={hi}"), || {
        let mut sum = BigUint::zero();
        for n in levels.clone() {
            let lv = t.level(n)?;
            if lv.start != sum {
                return Ok(Err(format!("m_{n} = {} but Σ_(m<{n}) |I_m| = {sum}", lv.start)));
            }
            if n > 0 && sum >= lv.size {
                return Ok(Err(format!("condition (1) fails at n={n}: {sum} ≥ {}", lv.size)));
            }
            sum += &lv.size;
        }
        let digits = sum.to_string().len();
        Ok(Ok(if digits > 30 { format!("m_{} has {digits} digits", hi + 1) } else { format!("m_{} = {sum}", hi + 1) }))
    });
}

fn tower_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("tower", cfg, "faithful+scaled");
    let f = tower_for(cfg, Mode::Faithful);
    level_conditions(&mut s, &f, "faithful", 0..=2);
    for n in 0..=2 {
        s.check(&format!("faithful.injective_on_W{n}"), format!("|W_{n}| = {}", count_w(n)), || {
            let distinct = f.check_injective_on_w(n)?;
            let expected = count_w(n);
            Ok(if big(distinct as u64) == expected {
                Ok(format!("{distinct} pairwise distinct images"))
            } else {
                Err(format!("{distinct} distinct images, |W_{n}| = {expected}"))
            })
        });
    }
    let sc = tower_for(cfg, Mode::Scaled);
    level_conditions(&mut s, &sc, "scaled", 0..=12);
    s.check("scaled.dictionary_injective", "n<=12", || {
        let mut served = vec![];
        for n in 0..=12 {
            // the level-0 dictionary holds only ∅
            if n.min(sc.config.dict_len) == 0 || !sc.dictionary_available(n)? {
                continue;
            }
            served.push(n);
            let p = sc.start(n)?;
            for seed in &sc.config.alphabet {
                for sign in [Sign::Pos, Sign::Neg] {
                    let w = OmegaWord::single(seed.clone(), sign);
                    let v = sc.eval_e(&w, &p)?;
                    let want = w.restrict(n);
                    if sc.delta_n(&p, &v)? != Some(want.clone()) {
                        return Ok(Err(format!("δ_{n}({p}, e({w})({p})) is not {want}")));
                    }
                }
            }
        }
        Ok(Ok(format!("dictionary served and inverted at levels {served:?}")))
    });
    s.runtime(300);
    s.finish()
}

// ---------------------------------------------------------------- regularity

fn random_finite_seed(rng: &mut impl Rng) -> Arc<SeedTriple> {
    let mut part = || BitStream::EventuallyZero(random_bits(rng, 6));
    Arc::new(SeedTriple::new(part(), part(), part()))
}

/// A random nonempty word with no adjacent `s s⁻¹`.
fn random_reduced_word(rng: &mut impl Rng, pool: &[Arc<SeedTriple>], max_len: usize) -> OmegaWord {
    let len = rng.gen_range(1..=max_len);
    let mut letters: Vec<(Arc<SeedTriple>, Sign)> = Vec::new();
    while letters.len() < len {
        let s = pool[rng.gen_range(0..pool.len())].clone();
        let sign = if rng.gen() { Sign::Pos } else { Sign::Neg };
        if let Some((ps, psg)) = letters.last() {
            if Arc::ptr_eq(ps, &s) && *psg == sign.flip() {
                continue;
            }
        }
        letters.push((s, sign));
    }
    OmegaWord::new(letters)
}

fn regularity_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("regularity", cfg, "faithful");
    let t = tower_for(cfg, Mode::Faithful);
    let words = cfg.n(100);
    let points = cfg.n(200);
    s.check("fixed_point_free_I0_I1", format!("{words} words × (I_0 + {points} points of I_1)"), || {
        let mut rng = cfg.rng(2);
        let l0 = t.level(0)?;
        let l1 = t.level(1)?;
        let pool: Vec<Arc<SeedTriple>> = (0..4).map(|_| random_finite_seed(&mut rng)).collect();
        let mut accepted = 0;
        let mut nontrivial0 = 0;
        let mut attempts = 0;
        while accepted < words {
            attempts += 1;
            if attempts > 100 * words {
                return Err(Error::capacity("too few words with nontrivial level-1 restriction"));
            }
            let w = random_reduced_word(&mut rng, &pool, 4);
            let e1 = l1.word_elem(&w.restrict(1))?;
            if l1.is_identity(&e1) {
                continue;
            }
            accepted += 1;
            let e0 = l0.word_elem(&w.restrict(0))?;
            if !l0.is_identity(&e0) {
                nontrivial0 += 1;
                for p in 0..7u64 {
                    if t.eval_e(&w, &big(p))? == big(p) {
                        return Ok(Err(format!("word {w} fixes {p} ∈ I_0")));
                    }
                }
            }
            for _ in 0..points {
                let r = random_below(&mut rng, &l1.size);
                let p = &l1.start + &r;
                let g = l1.phi_inv(&p)?;
                if l1.phi(&g)? != p {
                    return Ok(Err(format!("Φ round trip fails at {p}")));
                }
                if t.eval_e(&w, &p)? == p {
                    return Ok(Err(format!("word {w} fixes {p} ∈ I_1")));
                }
            }
        }
        Ok(Ok(format!("{accepted} words; level-0 restriction nontrivial for {nontrivial0} (I_0 has the trivial triple only)")))
    });
    s.runtime(60);
    s.finish()
}

// ---------------------------------------------------------------- coding

fn coding_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("coding", cfg, "n/a");
    let samples = cfg.n(1000);
    s.check("chi_dagger_left_inverse", format!("{samples} sequences"), || {
        let mut rng = cfg.rng(3);
        for _ in 0..samples {
            let len = rng.gen_range(0..10);
            let mut pool: Vec<u64> = (0..24).collect();
            pool.shuffle(&mut rng);
            let h: Vec<u64> = pool[..len].to_vec();
            let x = chi(&h);
            if chi_dagger(&x) != h {
                return Ok(Err(format!("χ†(χ({h:?})) = {:?}", chi_dagger(&x))));
            }
            let ones = hat(&x);
            let mut gaps: Vec<usize> = ones.iter().scan(None, |prev, &p| {
                let g = p - prev.map_or(0, |q: usize| q + 1);
                *prev = Some(p);
                Some(g)
            }).collect();
            let n = gaps.len();
            gaps.sort_unstable();
            gaps.dedup();
            if gaps.len() != n {
                return Ok(Err(format!("χ({h:?}) has a repeated gap")));
            }
        }
        Ok(Ok(format!("{samples} round trips")))
    });
    s.check("good_extend_unique", "lh <= 16", || {
        let mut cs: Vec<Bits> = vec![];
        for len in 0..=16usize {
            for v in 0..(1u64 << len) {
                let b = Bits::from_u64(v, len);
                if in_c(&b) {
                    cs.push(b);
                }
            }
        }
        let set: HashSet<Bits> = cs.iter().cloned().collect();
        let mut checked = 0;
        for c in &cs {
            for l in c.len() + 1..=16 {
                // the only candidate c⌢0ⁿ1 of length l, decided by brute-force membership
                let mut cand = c.clone();
                cand.0.resize(l - 1, false);
                cand.0.push(true);
                let brute = set.contains(&cand);
                let got = good_extend(c, l)?;
                checked += 1;
                match got {
                    Some(ref g) if !brute || g != &cand => return Ok(Err(format!("good_extend({c}, {l}) = {g}"))),
                    None if brute => return Ok(Err(format!("good_extend({c}, {l}) missed {cand}"))),
                    Some(ref g) if !(is_good(g) && g.get(l - 1) && c.is_prefix_of(g)) => {
                        return Ok(Err(format!("good_extend({c}, {l}) = {g} is not a good end-extension")))
                    }
                    _ => {}
                }
            }
        }
        Ok(Ok(format!("{} elements of 𝒞, {checked} (c, length) pairs", cs.len())))
    });
    s.finish()
}

// ---------------------------------------------------------------- theta

/// Pairwise spacedness by brute force over interval indices.
fn spaced_brute(t: &Tower, g: &Injection, pts: &[BigUint]) -> Result<bool> {
    for a in pts {
        let mut own = vec![t.interval_of(a)?];
        if let Some(v) = g.get(a) {
            own.push(t.interval_of(&v)?);
        }
        if let Some(v) = g.inv(a) {
            own.push(t.interval_of(&v)?);
        }
        for b in pts {
            if a != b && own.contains(&t.interval_of(b)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn theta_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("theta", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let count = cfg.n(20);
    let top = 12usize;
    let sample = |rng: &mut ChaCha8Rng| -> Result<Injection> { Ok(random_near_identity(rng, 4).truncate(&t.end(top)?)) };
    s.check("properties_i_iii_iv", format!("{count} finite g, levels <= {top}"), || {
        let mut rng = cfg.rng(4);
        let mut anchors = 0;
        for _ in 0..count {
            let g = sample(&mut rng)?;
            let st = theta_state(&t, &g, top)?;
            let pts: Vec<BigUint> = st.points().cloned().collect();
            anchors += pts.len();
            for cut in [t.end(2)?, t.end(8)?] {
                let sub = theta_state(&t, &g.truncate(&cut), top)?;
                if sub.anchors.len() > st.anchors.len() || sub.anchors.iter().zip(&st.anchors).any(|(a, b)| a != b) {
                    return Ok(Err(format!("(i): ϑ of {g} cut at {cut} is not an initial segment")));
                }
            }
            for a in &st.anchors {
                let img = g.get(&a.point).ok_or_else(|| Error::domain("anchor outside dom g"))?;
                if t.interval_of(&img)? < a.level {
                    return Ok(Err(format!("(iii): g = {g}, anchor {} maps to {img}", a.point)));
                }
            }
            if !spaced_brute(&t, &g, &pts)? || !crate::sparse::is_spaced(&t, &g, &pts)? {
                return Ok(Err(format!("(iv): anchors {pts:?} of {g} are not g-spaced")));
            }
        }
        Ok(Ok(format!("{anchors} anchors checked")))
    });
    s.check("almost_disjoint_pairs", format!("{count} pairs"), || {
        let mut rng = cfg.rng(5);
        let mut shared = 0;
        let mut pairs = 0;
        let mut tries = 0;
        while pairs < count {
            tries += 1;
            if tries > 50 * count {
                return Err(Error::capacity("too few distinct pairs"));
            }
            let g = random_near_identity(&mut rng, 4);
            let h = random_near_identity(&mut rng, 4);
            let Some(d) = (0..8u64).find(|&i| g.get_u64(i) != h.get_u64(i)) else { continue };
            pairs += 1;
            let end = t.end(top)?;
            let (g, h) = (g.truncate(&end), h.truncate(&end));
            let ga = theta_state(&t, &g, top)?.anchors;
            let ha = theta_state(&t, &h, top)?.anchors;
            for a in &ga {
                for b in &ha {
                    if a.level == b.level {
                        shared += 1;
                        if a.n as u64 >= d || b.n as u64 >= d {
                            return Ok(Err(format!("{g} and {h} diverge at {d} but share level {} (args {}, {})", a.level, a.n, b.n)));
                        }
                    }
                }
            }
        }
        Ok(Ok(format!("{pairs} pairs, {shared} shared intervals, all before divergence")))
    });
    s.runtime(120);
    s.finish()
}

// ---------------------------------------------------------------- B layer

fn ones() -> BitSeq {
    BitSeq::Infinite(BitStream::Periodic { prefix: Bits::new(), period: Bits(vec![true]) })
}

fn good11() -> BitSeq {
    BitSeq::Infinite("good: 11".parse().expect("literal"))
}

/// Identity with every computable anchor of the identity moved by `plant(i)`.
fn planted_identity(t: &Tower, plant: impl Fn(usize, &BigUint) -> Result<Option<BigUint>>, upto: usize) -> Result<Injection> {
    let id = Injection::identity();
    let anchors: Vec<BigUint> = theta_state(t, &id, upto)?.anchors.into_iter().map(|a| a.point).collect();
    let mut g = id;
    for (i, a) in anchors.iter().enumerate() {
        if let Some(v) = plant(i, a)? {
            g = g.with_value_swap(a, &v);
        }
    }
    Ok(g)
}

/// `χ(f)` with all-ones selectors.
fn own_seed(f: &Injection) -> Arc<SeedTriple> {
    let one = BitStream::Periodic { prefix: Bits::new(), period: Bits(vec![true]) };
    Arc::new(SeedTriple { x: BitStream::Chi(f.clone()), d0: one.clone(), d1: one })
}

/// The default alphabet with its first letter replaced by `q`.
fn tower_with_letter(cfg: &AuditConfig, q: &Arc<SeedTriple>) -> Tower {
    let mut c = TowerConfig::scaled();
    c.rng_seed = cfg.seed;
    c.alphabet[0] = q.clone();
    Tower::new(c)
}

fn blayer_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("blayer", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let sem = Semaphore::new(&t);
    let upto = 8usize;
    let triples = cfg.n(50);
    s.check("b_subset_b0", format!("{triples} triples, levels <= {upto}"), || {
        let mut rng = cfg.rng(6);
        let mut queried = 0;
        let mut removed = 0;
        let q = own_seed(&Injection::identity());
        let tq = tower_with_letter(cfg, &q);
        let semq = Semaphore::new(&tq);
        for i in 0..triples {
            let p0 = BitSeq::Infinite(random_good(&mut rng));
            let p1 = BitSeq::Infinite(random_good(&mut rng));
            // every third triple is the identity with a target aligned to its own seed, where removals occur
            let (t, sem, f, u) = if i % 3 == 2 {
                let sign = if rng.gen() { Sign::Pos } else { Sign::Neg };
                let v = tq.eval_e(&OmegaWord::single(q.clone(), sign), &big(21))?;
                let aligned = Injection::identity().with_value_swap(&big(21), &v);
                let mut seeds = vec![q.clone()];
                seeds.extend(tq.config.alphabet[1..].iter().cloned());
                let u = Universe { targets: vec![Injection::identity(), aligned], seeds, max_word_len: rng.gen_range(1..=2), max_k: 0 };
                (&tq, &semq, Injection::identity(), u)
            } else {
                let base = random_near_identity(&mut rng, 3);
                let a = t.config.alphabet.clone();
                let mut g = base.clone();
                for st in theta_state(&t, &base, upto)?.anchors {
                    if rng.gen_bool(0.6) {
                        let sign = if rng.gen() { Sign::Pos } else { Sign::Neg };
                        let w = OmegaWord::single(a[rng.gen_range(0..a.len())].clone(), sign);
                        let v = t.eval_e(&w, &st.point)?;
                        g = g.with_value_swap(&st.point, &v);
                    }
                }
                let mut seeds = a;
                seeds.push(own_seed(&g));
                let u = Universe { targets: vec![Injection::identity(), g.clone()], seeds, max_word_len: 1, max_k: 0 };
                (&t, &sem, g, u)
            };
            let b = sem.b_targeted(&u, &f, &p0, &p1, upto)?;
            removed += b.removals.len();
            let mut probes: Vec<BigUint> = b.b0.clone();
            let end = t.end(upto)?.to_u64().ok_or_else(|| Error::capacity("level end"))?;
            probes.extend((0..4).map(|_| big(rng.gen_range(0..end))));
            for p in &probes {
                queried += 1;
                let in_kept = b.kept.contains(p);
                if in_kept && !in_b0(t, &f, &p0, &p1, p)? {
                    return Ok(Err(format!("{p} ∈ B but ∉ B₀ for f = {f}, p0 = {p0}, p1 = {p1}")));
                }
                if in_kept != sem.in_b(&u, &f, &p0, &p1, p)? {
                    return Ok(Err(format!("in_b({p}) disagrees with the prefix computation for f = {f}")));
                }
            }
        }
        Ok(Ok(format!("{queried} points queried, {removed} removals")))
    });
    let cases = cfg.n(5);
    s.check("case_b_equals_b0", format!("{cases} instances"), || {
        let a = t.config.alphabet.clone();
        let ord_words: Vec<OmegaWord> = a
            .iter()
            .flat_map(|q| [Sign::Pos, Sign::Neg].map(|sg| OmegaWord::single(q.clone(), sg)))
            .collect();
        let mut built = 0;
        let mut points = 0;
        'cand: for i in 0..ord_words.len() {
            for j in 0..ord_words.len() {
                if built >= cases {
                    break 'cand;
                }
                let f = planted_identity(
                    &t,
                    |k, p| match k {
                        0 => t.eval_e(&ord_words[i], p).map(Some),
                        1 => t.eval_e(&ord_words[j], p).map(Some),
                        _ => Ok(None),
                    },
                    upto,
                )?;
                let b0: Vec<BigUint> = b0_upto(&t, &f, &good11(), &good11(), upto)?.into_iter().map(|m| m.anchor.point).collect();
                if b0.len() < 2 {
                    continue;
                }
                let ord = OrderContext::new(&t, &f);
                let mut clean = true;
                for x in &b0 {
                    for y in &b0 {
                        if ord.less0(x, y)? || ord.less1(x, y)? {
                            clean = false;
                        }
                    }
                }
                if !clean {
                    continue;
                }
                built += 1;
                let mut seeds = a.clone();
                seeds.push(own_seed(&f));
                let u = Universe { targets: vec![Injection::identity(), f.clone()], seeds, max_word_len: 1, max_k: 0 };
                let b = sem.b_targeted(&u, &f, &good11(), &good11(), upto)?;
                points += b.b0.len();
                if b.kept != b.b0 {
                    return Ok(Err(format!("B ≠ B₀ for f planted with ({}, {}): removals {:?}", ord_words[i], ord_words[j], b.removals)));
                }
            }
        }
        if built < cases {
            return Ok(Err(format!("constructed only {built} case-(b) instances")));
        }
        Ok(Ok(format!("{built} instances, {points} B₀ points kept")))
    });
    let removal_cases = cfg.n(3).min(3);
    s.check("removals_match_exhaustive", format!("{removal_cases} instances, exhaustive k <= 260"), || {
        let f = Injection::identity();
        let q = own_seed(&f);
        let tq = tower_with_letter(cfg, &q);
        let semq = Semaphore::new(&tq);
        let variants = [(Sign::Pos, 1usize), (Sign::Neg, 1), (Sign::Pos, 2)];
        let mut removals = 0;
        for &(sign, extra) in variants.iter().take(removal_cases) {
            let w = OmegaWord::single(q.clone(), sign);
            let v = tq.eval_e(&w, &big(21))?;
            let aligned = Injection::identity().with_value_swap(&big(21), &v);
            let u = Universe {
                targets: vec![Injection::identity(), aligned],
                seeds: vec![q.clone(), tq.config.alphabet[extra].clone()],
                max_word_len: 1,
                max_k: 260,
            };
            let fast = semq.b_targeted(&u, &f, &ones(), &ones(), upto)?;
            let slow = semq.b_exhaustive(&u, &f, &ones(), &ones(), upto)?;
            if fast.removals.is_empty() {
                return Ok(Err(format!("instance ({sign:?}, {extra}) removes nothing")));
            }
            if fast.kept != slow.kept {
                return Ok(Err(format!("targeted kept {:?}, exhaustive kept {:?}", fast.kept, slow.kept)));
            }
            for r in &fast.removals {
                if !slow.removals.iter().any(|x| x.m == r.m && x.k == r.k) {
                    return Ok(Err(format!("removal of {} at k = {} not reproduced", r.m, r.k)));
                }
            }
            removals += fast.removals.len();
        }
        Ok(Ok(format!("{removals} removals reproduced")))
    });
    s.finish()
}

// ---------------------------------------------------------------- surgery

fn surgery_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("surgery", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let seeds = cfg.n(30);
    let window = 2000u64;
    s.check("local_permutation", format!("{seeds} seeds, window {window}"), || {
        let mut rng = cfg.rng(7);
        let mut sites = 0;
        let mut coincidences = 0;
        for i in 0..seeds {
            let finite = [None, Some(64), Some(8)][i % 3];
            let seed = sample_seed(&mut rng, finite);
            let u = Universe { targets: vec![Injection::identity()], seeds: t.config.alphabet.clone(), max_word_len: 1, max_k: 0 };
            let ed = Edot::new(&t, seed.clone(), u);
            let rep = verify_local_permutation(&ed, window)?;
            sites += rep.case_counts[0];
            coincidences += rep.coincidences;
            if !rep.ok() || rep.slack_used > 1 {
                return Ok(Err(format!("seed {seed}: {rep:?}")));
            }
        }
        Ok(Ok(format!("{sites} surgery sites, {coincidences} case coincidences")))
    });
    s.check("finite_x_agrees_beyond_bound", format!("{seeds} seeds, 1000 points past the bound"), || {
        let mut rng = cfg.rng(8);
        let mut nontrivial = 0;
        for i in 0..seeds {
            let seed = sample_seed(&mut rng, Some([64, 200, 8][i % 3]));
            if seed.x_in_range()? {
                return Ok(Err(format!("seed {seed} has x in range(χ)")));
            }
            let ed = Edot::plain(&t, seed.clone());
            let bound = ed.surgery_bound()?.ok_or_else(|| Error::domain("finite x gave infinite g"))?;
            let b = bound.to_u64().ok_or_else(|| Error::capacity("bound too large"))?;
            if b > 0 {
                nontrivial += 1;
            }
            let bad = disagreements_with_e(&ed, b, b + 1000)?;
            if !bad.is_empty() {
                return Ok(Err(format!("seed {seed}: ė ≠ e at {:?} beyond bound {b}", &bad[..bad.len().min(5)])));
            }
        }
        Ok(Ok(format!("{seeds} seeds, {nontrivial} with a positive bound")))
    });
    s.runtime(300);
    s.finish()
}

// ---------------------------------------------------------------- recognizer

fn restricted_alphabet() -> Vec<BitStream> {
    ["zero", "ones: 0", "ones: 1", "ones: 0 1 3"].iter().map(|s| s.parse().expect("literal")).collect()
}

/// Moves at least four points of one interval below the prefix by a random cycle.
fn perturb(rng: &mut impl Rng, t: &Tower, p: &Prefix) -> Result<Prefix> {
    let lvl = rng.gen_range(1..=p.k);
    let lv = t.level(lvl)?;
    let (lo, hi) = (lv.start.to_usize().expect("small"), lv.end().to_usize().expect("small"));
    let len = rng.gen_range(4..=(hi - lo).min(8));
    let mut idx: Vec<usize> = (lo..hi).collect();
    idx.shuffle(rng);
    idx.truncate(len);
    let mut vals = p.values.clone();
    let first = vals[idx[0]].clone();
    for i in 0..len - 1 {
        vals[idx[i]] = vals[idx[i + 1]].clone();
    }
    vals[idx[len - 1]] = first;
    Prefix::new(t, vals)
}

fn recognizer_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("recognizer", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let sem = Semaphore::new(&t);
    let u = Universe::empty();
    let m = Matcher::new(&sem, &u);
    let images = cfg.n(30);
    s.check("soundness", format!("{images} ė images, k <= 6"), || {
        let mut rng = cfg.rng(9);
        let mut prefixes = 0;
        for _ in 0..images {
            let seed = sample_seed(&mut rng, None);
            let ed = Edot::plain(&t, seed.clone());
            for k in 0..=6 {
                let p = Prefix::of_fn(&t, k, |q| ed.value(q))?;
                prefixes += 1;
                if !in_u(&m, &p, &TripleSpace::Full)?.accepted {
                    return Ok(Err(format!("prefix k = {k} of ė({seed}) rejected")));
                }
            }
        }
        Ok(Ok(format!("{prefixes} prefixes accepted")))
    });
    let pairs = cfg.n(200);
    s.check("oracle_equivalence", format!("{pairs} accepted + {pairs} perturbed, restricted alphabet, k <= 4"), || {
        let mut rng = cfg.rng(10);
        let a = restricted_alphabet();
        let space = TripleSpace::Restricted(a.clone());
        let mut agree_acc = 0;
        let mut agree_rej = 0;
        let mut rejected = 0;
        for i in 0..2 * pairs {
            let pick = |rng: &mut ChaCha8Rng| a[rng.gen_range(0..a.len())].clone();
            let seed = GeneratorSeed::from_parts(pick(&mut rng), pick(&mut rng), pick(&mut rng))?;
            let ed = Edot::plain(&t, seed.clone());
            let k = rng.gen_range(1..=4);
            let base = Prefix::of_fn(&t, k, |q| ed.value(q))?;
            let p = if i < pairs { base } else { perturb(&mut rng, &t, &base)? };
            let fast = in_u(&m, &p, &space)?.accepted;
            let slow = brute_force_in_u(&m, &p, &a)?;
            if fast != slow {
                return Ok(Err(format!("in_U = {fast}, brute force = {slow} on {} prefix k = {k} of ė({seed})", if i < pairs { "plain" } else { "perturbed" })));
            }
            if i < pairs {
                if !fast {
                    return Ok(Err(format!("unperturbed prefix k = {k} of ė({seed}) rejected")));
                }
                agree_acc += 1;
            } else {
                agree_rej += 1;
                rejected += usize::from(!fast);
            }
        }
        Ok(Ok(format!("{agree_acc} accepted agree, {agree_rej} perturbed agree ({rejected} rejected)")))
    });
    s.runtime(600);
    s.finish()
}

// ---------------------------------------------------------------- orders

fn orders_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("orders", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let contexts = cfg.n(100);
    let upto = 8usize;
    s.check("strict_partial_orders", format!("{contexts} contexts × 20 points"), || {
        let mut rng = cfg.rng(11);
        let a = t.config.alphabet.clone();
        let dict_levels: Vec<usize> = (1..=upto).filter(|&n| t.dictionary_available(n).unwrap_or(false)).collect();
        let mut true0 = 0;
        let mut true1 = 0;
        for _ in 0..contexts {
            let base = random_near_identity(&mut rng, 3);
            let mut pool: Vec<BigUint> = theta_state(&t, &base, upto)?.points().cloned().collect();
            for _ in 0..2 {
                let other = random_near_identity(&mut rng, 4);
                pool.extend(theta_state(&t, &other, upto)?.points().cloned());
            }
            while pool.len() < 20 {
                let n = dict_levels[rng.gen_range(0..dict_levels.len())];
                let lv = t.level(n)?;
                pool.push(&lv.start + random_below(&mut rng, &lv.size));
            }
            pool.sort();
            pool.dedup();
            pool.shuffle(&mut rng);
            pool.truncate(20);
            let mut f = base;
            for p in &pool {
                if rng.gen_bool(0.5) && f.get(p).as_ref() == Some(p) {
                    let sign = if rng.gen() { Sign::Pos } else { Sign::Neg };
                    let w = OmegaWord::single(a[rng.gen_range(0..a.len())].clone(), sign);
                    let v = t.eval_e(&w, p)?;
                    if f.get(&v).as_ref() == Some(&v) {
                        f = f.with_value_swap(p, &v);
                    }
                }
            }
            let ord = OrderContext::new(&t, &f);
            if let Some(v) = check_strict_order(&pool, |x, y| ord.less0(x, y))? {
                return Ok(Err(format!("<0 on f = {f}: {v}")));
            }
            if let Some(v) = check_strict_order(&pool, |x, y| ord.less1(x, y))? {
                return Ok(Err(format!("<1 on f = {f}: {v}")));
            }
            for x in &pool {
                for y in &pool {
                    true0 += usize::from(ord.less0(x, y)?);
                    true1 += usize::from(ord.less1(x, y)?);
                }
            }
        }
        Ok(Ok(format!("{true0} related pairs under <0, {true1} under <1")))
    });
    s.finish()
}

// ---------------------------------------------------------------- explorer

fn explorer_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("explorer", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let count = cfg.n(20);
    s.check("dichotomy_outcomes_verify", format!("{count} g, depth <= 3"), || {
        let mut rng = cfg.rng(12);
        let a = t.config.alphabet.clone();
        let mut kinds = [0usize; 3];
        for _ in 0..count {
            let word = OmegaWord::single(a[rng.gen_range(0..a.len())].clone(), Sign::Pos);
            let mode = rng.gen_range(0..3);
            let g = planted_identity(
                &t,
                |i, p| match mode {
                    0 => t.eval_e(&word, p).map(Some),
                    1 if i % 2 == 0 => t.eval_e(&word, p).map(Some),
                    _ => Ok(rng_free_shift(p)),
                },
                t.max_level(),
            )?;
            let depth = 1 + (kinds.iter().sum::<usize>() % 3);
            let out = dichotomy_search(&t, &g, depth)?;
            let ord = OrderContext::new(&t, &g);
            match out.kind {
                DichotomyKind::Chain => {
                    kinds[0] += 1;
                    for i in 0..out.chain.len() {
                        for j in i + 1..out.chain.len() {
                            if !ord.less0(&out.chain[i], &out.chain[j])? {
                                return Ok(Err(format!("chain {:?} of {g} not <0-increasing at ({i}, {j})", out.chain)));
                            }
                        }
                    }
                    if out.chain.len() < 2 {
                        return Ok(Err("chain shorter than 2".into()));
                    }
                }
                DichotomyKind::GoodPair => {
                    kinds[1] += 1;
                    let (d0, d1) = (out.d0.clone().expect("d0"), out.d1.clone().expect("d1"));
                    if !in_c(&d0) || !in_c(&d1) {
                        return Ok(Err(format!("d0 = {d0}, d1 = {d1} not both in 𝒞")));
                    }
                    let pad = |b: &Bits| BitSeq::Infinite(BitStream::EventuallyZero(b.clone()));
                    let b0: Vec<BigUint> = b0_upto(&t, &g, &pad(&d0), &pad(&d1), t.max_level())?.into_iter().map(|m| m.anchor.point).collect();
                    for x in &b0 {
                        for y in &b0 {
                            if ord.less0(x, y)? {
                                return Ok(Err(format!("B₀ points {x} <0 {y} for {g}")));
                            }
                            if out.sub_case == SubCase::B && ord.less1(x, y)? {
                                return Ok(Err(format!("sub-case (b) claimed but {x} <1 {y}")));
                            }
                        }
                    }
                    if out.sub_case == SubCase::A {
                        for (i, x) in b0.iter().enumerate() {
                            for y in &b0[i + 1..] {
                                if !(ord.less1(x, y)? || ord.less1(y, x)?) {
                                    return Ok(Err(format!("sub-case (a) claimed but {x}, {y} incomparable")));
                                }
                            }
                        }
                    }
                }
                DichotomyKind::Inconclusive => kinds[2] += 1,
            }
        }
        Ok(Ok(format!("chains {}, good pairs {}, inconclusive {}", kinds[0], kinds[1], kinds[2])))
    });
    let plants = cfg.n(5);
    s.check("planted_probes_recovered", format!("{plants} plants, word bound 2, horizon 1000"), || {
        let mut rng = cfg.rng(13);
        let pool: Vec<GeneratorSeed> =
            ["[ones: 0 ; ones: 1 ; ones: 0 1 3]", "[ones: 1 ; ones: 0 ; ones: 1]"].iter().map(|x| x.parse().expect("literal")).collect();
        let eds: Vec<Edot> = pool.iter().map(|sd| Edot::plain(&t, sd.clone())).collect();
        let words: Vec<Vec<(usize, Sign)>> = reduced_words(pool.len(), 2).into_iter().filter(|w| !w.is_empty()).collect();
        let mut literal = 0;
        for _ in 0..plants {
            let w = words[rng.gen_range(0..words.len())].clone();
            let vals = (0..1000u64).map(|p| eval_word(&eds, &w, &big(p))).collect::<Result<Vec<_>>>()?;
            let g = Injection::finite(vals)?;
            match maximality_probe(&t, &g, &pool, 2, 1000, 1000)? {
                ProbeOutcome::Found { word, agreements } => {
                    if agreements < 1000 {
                        return Ok(Err(format!("plant {w:?}: found {word:?} with {agreements} agreements")));
                    }
                    literal += usize::from(word == w);
                }
                ProbeOutcome::Inconclusive { best, .. } => return Ok(Err(format!("plant {w:?} not recovered (best {best})"))),
            }
        }
        Ok(Ok(format!("{plants} plants recovered, {literal} as the literal word")))
    });
    s.finish()
}

/// An off-dictionary move: the next point of the interval.
fn rng_free_shift(p: &BigUint) -> Option<BigUint> {
    Some(p + BigUint::one())
}

// ---------------------------------------------------------------- periodic

fn partition_text(rng: &mut impl Rng, upto: u64) -> String {
    let mut pts: Vec<u64> = (0..upto).collect();
    pts.shuffle(rng);
    let mut out = String::new();
    let mut i = 0;
    while i < pts.len() {
        let len = rng.gen_range(1..=5).min(pts.len() - i);
        let line: Vec<String> = pts[i..i + len].iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
        i += len;
    }
    out
}

fn zero_x_seed(c0: &str, c1: &str) -> Result<GeneratorSeed> {
    GeneratorSeed::from_parts("zero".parse()?, c0.parse()?, c1.parse()?)
}

fn orbit_source<'a>(name: &str, t: &'a Tower, cfg: &AuditConfig) -> Result<Box<dyn OrbitSource + 'a>> {
    Ok(match name {
        "singletons" => Box::new(Singletons),
        "edot_subgroup" => {
            let gens = vec![Edot::plain(t, zero_x_seed("ones: 0", "ones: 1")?), Edot::plain(t, zero_x_seed("ones: 1", "ones: 0 1 3")?)];
            Box::new(EdotOrbits::new(gens, 1 << 12))
        }
        _ => Box::new(FilePartition::parse(&partition_text(&mut cfg.rng(14), 4000))?),
    })
}

fn periodic_suite(cfg: &AuditConfig) -> AuditReport {
    let mut s = Suite::new("periodic", cfg, "scaled");
    let t = tower_for(cfg, Mode::Scaled);
    let steps = cfg.n(1000);
    let limit = 1u64 << 40;
    for name in ["singletons", "edot_subgroup", "file_partition"] {
        s.check(&format!("glue.{name}"), format!("{steps} steps"), || {
            let mut src = orbit_source(name, &t, cfg)?;
            let (h, rep) = run_glue(src.as_mut(), steps, limit)?;
            if !rep.ok() {
                return Ok(Err(format!("{}: {rep:?}", src.name())));
            }
            let cover = 200.min(steps as u64 / 5);
            if !h.covers(cover) {
                return Ok(Err(format!("[0,{cover}) not inside dom ∩ range; least missing {}", h.min_missing())));
            }
            Ok(Ok(format!("|h| = {}, least missing {}, {} orbit-joining pairs", h.len(), rep.min_missing, rep.mixing_pairs)))
        });
    }
    let pairs = cfg.n(100);
    s.check("substitute_respects_equality", format!("{pairs} word pairs"), || {
        let mut rng = cfg.rng(15);
        let mut glue = Singletons;
        let mut g = Glue::new(&mut glue, limit);
        for _ in 0..600 {
            g.step()?;
        }
        let h = g.h.clone();
        let ed = Edot::plain(&t, zero_x_seed("ones: 0", "ones: 1")?);
        let mut win: Vec<u64> = (0..300).collect();
        win.shuffle(&mut rng);
        let a = [APerm::Identity, APerm::Edot(&ed), APerm::window(win)?];
        let mut defined = 0;
        for _ in 0..pairs {
            let pieces = rng.gen_range(1..=3);
            let w = random_word(&mut rng, a.len(), pieces, 3);
            let w2 = random_equal_word(&mut rng, &w, a.len(), 4, 3);
            if w.reduce() != w2.reduce() {
                return Ok(Err(format!("{w} and {w2} reduce differently")));
            }
            for p in 0..40u64 {
                let x = substitute(&w, &a, &h, p, 5000)?;
                let y = substitute(&w2, &a, &h, p, 5000)?;
                if let (Some(x), Some(y)) = (x, y) {
                    defined += 1;
                    if x != y {
                        return Ok(Err(format!("{w} ↦ {x} but {w2} ↦ {y} at {p}")));
                    }
                }
            }
        }
        if defined == 0 {
            return Ok(Err("no point where both sides are defined".into()));
        }
        Ok(Ok(format!("{defined} points where both sides are defined")))
    });
    s.runtime(60);
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_parse_error() {
        let err = run_suite("nope", &AuditConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn coding_suite_passes_and_serializes() {
        let cfg = AuditConfig { scale: 0.1, ..AuditConfig::default() };
        let rep = run_suite("coding", &cfg).unwrap();
        assert!(rep.ok(), "{rep:?}");
        let lines = rep.to_json_lines();
        assert_eq!(lines.lines().count(), rep.checks.len() + 1);
        for l in lines.lines() {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            assert_eq!(v["seed"], cfg.seed);
        }
    }

    #[test]
    fn random_below_stays_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = BigUint::from(1000u32) << 70;
        for _ in 0..100 {
            assert!(random_below(&mut rng, &n) < n);
        }
        assert_eq!(random_below(&mut rng, &BigUint::one()), BigUint::zero());
    }
}
