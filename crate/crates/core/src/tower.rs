//! The interval-partition tower `(G_n, e_n, I_n, σ_n)` and the global map `e`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::{self, factorial, lehmer_rank, lehmer_unrank, GiantCertificate, Perm, PermGroup, StabChain};
use crate::words::{GenTriple, Letter, OmegaWord, SeedTriple, Sign, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Faithful,
    Scaled,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "faithful" => Ok(Mode::Faithful),
            "scaled" => Ok(Mode::Scaled),
            other => Err(Error::parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Faithful => "faithful",
            Mode::Scaled => "scaled",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TowerConfig {
    pub mode: Mode,
    /// Highest faithful level that may be built.
    pub level_cap: usize,
    /// Highest `n` for which `W_n` may be enumerated.
    pub enum_cap: usize,
    /// Scaled schedule `|I_n| = base · 2ⁿ`.
    pub scaled_base: u64,
    /// Highest scaled interval index whose boundaries we materialize.
    pub interval_cap: usize,
    /// Seeds spanning the scaled δ dictionary and the brute-force recognizer.
    pub alphabet: Vec<Arc<SeedTriple>>,
    /// Maximal word length in the scaled dictionary.
    pub dict_len: usize,
    pub giant_tries: usize,
    pub rng_seed: u64,
}

pub fn default_alphabet() -> Vec<Arc<SeedTriple>> {
    ["[ones: 0 ; zero ; ones: 1]", "[ones: 1 ; ones: 0 ; zero]", "[ones: 0 2 ; ones: 1 ; ones: 0]"]
        .iter()
        .map(|s| Arc::new(s.parse().expect("default alphabet parses")))
        .collect()
}

impl Default for TowerConfig {
    fn default() -> Self {
        TowerConfig {
            mode: Mode::Scaled,
            level_cap: 2,
            enum_cap: 2,
            scaled_base: 7,
            interval_cap: 1 << 20,
            alphabet: default_alphabet(),
            dict_len: 1,
            giant_tries: 5000,
            rng_seed: 0x5eed,
        }
    }
}

impl TowerConfig {
    pub fn scaled() -> Self {
        TowerConfig::default()
    }

    pub fn faithful() -> Self {
        TowerConfig { mode: Mode::Faithful, ..TowerConfig::default() }
    }

    /// `key = value` lines; `#` starts a comment; each `seed = ...` line adds an alphabet entry
    /// and the first one replaces the default alphabet.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TowerConfig::default();
        let mut alphabet = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<usize>().map_err(|e| Error::parse(format!("line {}: {e}", lineno + 1)));
            match key {
                "mode" => cfg.mode = value.parse()?,
                "level_cap" => cfg.level_cap = num(value)?,
                "enum_cap" => cfg.enum_cap = num(value)?,
                "scaled_base" => cfg.scaled_base = num(value)? as u64,
                "interval_cap" => cfg.interval_cap = num(value)?,
                "dict_len" => cfg.dict_len = num(value)?,
                "giant_tries" => cfg.giant_tries = num(value)?,
                "rng_seed" => cfg.rng_seed = num(value)? as u64,
                "seed" => alphabet.push(Arc::new(value.parse()?)),
                other => return Err(Error::parse(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        if !alphabet.is_empty() {
            cfg.alphabet = alphabet;
        }
        if cfg.scaled_base < 7 {
            return Err(Error::domain("scaled_base below 7 violates |I_0| ≥ 7"));
        }
        Ok(cfg)
    }
}

/// An element of some `G_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    /// Residue in a cyclic group.
    Cyc(BigUint),
    /// `(g⁰, π) ∈ G⁰_n × S_k`.
    Pair(Perm, Perm),
}

#[derive(Debug)]
pub struct PermLevel {
    pub g0: PermGroup,
    pub k: usize,
    kfact: BigUint,
    /// `e¹_n` on triples, indexed by `GenTriple::index`.
    pub gens: Vec<Perm>,
    gens_inv: Vec<Perm>,
    /// The enumeration of `W_n` as signed-letter codes, written order.
    codes: Vec<Vec<usize>>,
    pub certificate: Option<GiantCertificate>,
}

#[derive(Debug)]
pub enum LevelGroup {
    Cyclic,
    Perm(PermLevel),
}

/// One stage `(G_n, e_n, I_n, σ_n)`.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: usize,
    pub start: BigUint,
    pub size: BigUint,
    pub group: Arc<LevelGroup>,
}

/// Signed letter code `2·index + [sign = −1]`.
fn letter_code(l: &Letter) -> usize {
    2 * l.triple.index() + (l.sign == Sign::Neg) as usize
}

fn code_letter(level: usize, code: usize) -> Letter {
    Letter::new(GenTriple::from_index(level, code >> 1), if code & 1 == 0 { Sign::Pos } else { Sign::Neg })
}

/// Position of a written code sequence in the enumeration of `W_n` built by `words::enumerate_w`.
fn word_position(n: usize, written: &[usize]) -> usize {
    let signed = 2usize << (3 * n);
    let len = written.len();
    let mut offset = 1usize;
    let mut layer = signed;
    for _ in 1..len {
        offset += layer;
        layer *= signed - 1;
    }
    if len == 0 {
        return 0;
    }
    let mut idx = written[0];
    for i in 1..len {
        let forbidden = written[i - 1] ^ 1;
        let r = written[i] - (written[i] > forbidden) as usize;
        idx = idx * (signed - 1) + r;
    }
    offset + idx
}

fn enumerate_codes(n: usize) -> Vec<Vec<usize>> {
    let signed = 2usize << (3 * n);
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for s in 0..signed {
                if w.last().is_some_and(|&p| p == s ^ 1) {
                    continue;
                }
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

impl PermLevel {
    fn letter_perm(&self, code: usize) -> &Perm {
        if code & 1 == 0 {
            &self.gens[code >> 1]
        } else {
            &self.gens_inv[code >> 1]
        }
    }

    fn word_perm(&self, w: &Word) -> Perm {
        let mut acc = Perm::identity(self.g0.degree());
        for l in w.letters() {
            acc = self.letter_perm(letter_code(l)).compose(&acc);
        }
        acc
    }

    /// `e¹(w)(p)` evaluated letter by letter.
    fn word_apply_written(&self, written: &[usize], p: usize) -> usize {
        written.iter().rev().fold(p, |q, &c| self.letter_perm(c).apply(q))
    }

    pub fn degree(&self) -> usize {
        self.g0.degree()
    }

    pub fn words_len(&self) -> usize {
        self.codes.len()
    }
}

impl Level {
    pub fn end(&self) -> BigUint {
        &self.start + &self.size
    }

    pub fn contains(&self, p: &BigUint) -> bool {
        *p >= self.start && *p < self.end()
    }

    pub fn identity(&self) -> Elem {
        match &*self.group {
            LevelGroup::Cyclic => Elem::Cyc(BigUint::zero()),
            LevelGroup::Perm(pl) => Elem::Pair(Perm::identity(pl.degree()), Perm::identity(pl.k)),
        }
    }

    pub fn is_identity(&self, g: &Elem) -> bool {
        match g {
            Elem::Cyc(r) => r.is_zero(),
            Elem::Pair(a, b) => a.is_identity() && b.is_identity(),
        }
    }

    /// `g · h`, with `h` acting first.
    pub fn mul(&self, g: &Elem, h: &Elem) -> Elem {
        match (g, h) {
            (Elem::Cyc(a), Elem::Cyc(b)) => Elem::Cyc((a + b) % &self.size),
            (Elem::Pair(a0, a1), Elem::Pair(b0, b1)) => Elem::Pair(a0.compose(b0), a1.compose(b1)),
            _ => panic!("elements of different levels"),
        }
    }

    pub fn inv(&self, g: &Elem) -> Elem {
        match g {
            Elem::Cyc(a) => Elem::Cyc((&self.size - a) % &self.size),
            Elem::Pair(a, b) => Elem::Pair(a.inverse(), b.inverse()),
        }
    }

    /// `e_n` on a triple of this level.
    pub fn gen_elem(&self, t: &GenTriple) -> Result<Elem> {
        if t.level() != self.n {
            return Err(Error::LevelMismatch { expected: self.n, found: t.level() });
        }
        Ok(match &*self.group {
            LevelGroup::Cyclic => Elem::Cyc(t.value() % &self.size),
            LevelGroup::Perm(pl) => Elem::Pair(pl.gens[t.index()].clone(), Perm::identity(pl.k)),
        })
    }

    /// `e_n(w)` for a word of this level.
    pub fn word_elem(&self, w: &Word) -> Result<Elem> {
        if w.level() != self.n {
            return Err(Error::LevelMismatch { expected: self.n, found: w.level() });
        }
        Ok(match &*self.group {
            LevelGroup::Cyclic => {
                let mut acc = BigUint::zero();
                for l in w.letters() {
                    let v = l.triple.value() % &self.size;
                    acc = match l.sign {
                        Sign::Pos => (acc + v) % &self.size,
                        Sign::Neg => (acc + &self.size - v) % &self.size,
                    };
                }
                Elem::Cyc(acc)
            }
            LevelGroup::Perm(pl) => Elem::Pair(pl.word_perm(w), Perm::identity(pl.k)),
        })
    }

    /// `Φ_n`.
    pub fn phi(&self, g: &Elem) -> Result<BigUint> {
        let r = match (g, &*self.group) {
            (Elem::Cyc(a), LevelGroup::Cyclic) => a.clone(),
            (Elem::Pair(a, b), LevelGroup::Perm(pl)) => pl.g0.rank(a)? * &pl.kfact + lehmer_rank(b),
            _ => return Err(Error::domain("element does not belong to this level")),
        };
        Ok(&self.start + r)
    }

    /// `Φ_n⁻¹`.
    pub fn phi_inv(&self, p: &BigUint) -> Result<Elem> {
        if !self.contains(p) {
            return Err(Error::domain(format!("{p} is not in I_{}", self.n)));
        }
        let r = p - &self.start;
        Ok(match &*self.group {
            LevelGroup::Cyclic => Elem::Cyc(r),
            LevelGroup::Perm(pl) => {
                let (q, rem) = r.div_rem(&pl.kfact);
                Elem::Pair(pl.g0.unrank(&q)?, lehmer_unrank(pl.k, &rem)?)
            }
        })
    }

    /// `σ_n(g)(p) = Φ(g · Φ⁻¹(p))`.
    pub fn act(&self, g: &Elem, p: &BigUint) -> Result<BigUint> {
        match g {
            Elem::Cyc(a) => {
                if !self.contains(p) {
                    return Err(Error::domain(format!("{p} is not in I_{}", self.n)));
                }
                Ok(&self.start + (p - &self.start + a) % &self.size)
            }
            Elem::Pair(..) => {
                let h = self.phi_inv(p)?;
                self.phi(&self.mul(g, &h))
            }
        }
    }

    pub fn perm_level(&self) -> Option<&PermLevel> {
        match &*self.group {
            LevelGroup::Perm(pl) => Some(pl),
            LevelGroup::Cyclic => None,
        }
    }
}

struct ScaledDict {
    injective: bool,
    by_value: HashMap<BigUint, Word>,
}

pub struct Tower {
    pub config: TowerConfig,
    faithful: Mutex<Vec<Level>>,
    dicts: Mutex<HashMap<usize, Arc<ScaledDict>>>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tower").field("mode", &self.config.mode).finish()
    }
}

fn to_usize(n: &BigUint, cap: usize) -> Result<usize> {
    match n.to_usize() {
        Some(v) if v <= cap => Ok(v),
        _ => Err(Error::capacity(format!("interval index {n} exceeds cap {cap}"))),
    }
}

impl Tower {
    pub fn new(config: TowerConfig) -> Self {
        Tower { config, faithful: Mutex::new(Vec::new()), dicts: Mutex::new(HashMap::new()) }
    }

    pub fn scaled() -> Self {
        Tower::new(TowerConfig::scaled())
    }

    pub fn faithful() -> Self {
        Tower::new(TowerConfig::faithful())
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    /// Largest level index that may be materialized.
    pub fn max_level(&self) -> usize {
        match self.config.mode {
            Mode::Faithful => self.config.level_cap,
            Mode::Scaled => self.config.interval_cap,
        }
    }

    /// Interval index given as a big number, checked against the caps.
    pub fn level_index(&self, n: &BigUint) -> Result<usize> {
        to_usize(n, self.max_level())
    }

    pub fn level(&self, n: usize) -> Result<Level> {
        match self.config.mode {
            Mode::Scaled => {
                if n > self.config.interval_cap {
                    return Err(Error::capacity(format!("scaled level {n} exceeds interval cap")));
                }
                let base = BigUint::from(self.config.scaled_base);
                let pow = BigUint::one() << n;
                Ok(Level {
                    n,
                    start: &base * (&pow - 1u32),
                    size: base * pow,
                    group: Arc::new(LevelGroup::Cyclic),
                })
            }
            Mode::Faithful => {
                if n > self.config.level_cap {
                    return Err(Error::capacity(format!("faithful level {n} exceeds level cap {}", self.config.level_cap)));
                }
                let mut levels = self.faithful.lock().expect("tower lock");
                while levels.len() <= n {
                    let next = self.build_faithful(&levels)?;
                    levels.push(next);
                }
                Ok(levels[n].clone())
            }
        }
    }

    /// `m_n`.
    pub fn start(&self, n: usize) -> Result<BigUint> {
        Ok(self.level(n)?.start)
    }

    /// `m_{n+1}`.
    pub fn end(&self, n: usize) -> Result<BigUint> {
        match self.config.mode {
            Mode::Scaled if n < self.config.interval_cap => self.start(n + 1),
            _ => Ok(self.level(n)?.end()),
        }
    }

    /// `n(p)`, the index with `p ∈ I_n`.
    pub fn interval_of(&self, p: &BigUint) -> Result<usize> {
        match self.config.mode {
            Mode::Scaled => {
                let q = p / self.config.scaled_base + 1u32;
                let n = (q.bits() - 1) as usize;
                if n > self.config.interval_cap {
                    return Err(Error::capacity(format!("point lies beyond interval cap {}", self.config.interval_cap)));
                }
                Ok(n)
            }
            Mode::Faithful => {
                for n in 0..=self.config.level_cap {
                    let lv = self.level(n)?;
                    if *p < lv.end() {
                        return Ok(n);
                    }
                }
                Err(Error::capacity(format!("point lies beyond faithful level {}", self.config.level_cap)))
            }
        }
    }

    pub fn level_of(&self, p: &BigUint) -> Result<Level> {
        self.level(self.interval_of(p)?)
    }

    fn build_faithful(&self, built: &[Level]) -> Result<Level> {
        let n = built.len();
        if n == 0 {
            return Ok(Level { n: 0, start: BigUint::zero(), size: BigUint::from(7u32), group: Arc::new(LevelGroup::Cyclic) });
        }
        if n > self.config.enum_cap {
            return Err(Error::capacity(format!("W_{n} exceeds enumeration cap {}", self.config.enum_cap)));
        }
        let codes = enumerate_codes(n);
        let l = codes.len();
        let triples = 1usize << (3 * n);
        let mut gens = Vec::with_capacity(triples);
        for t in 0..triples {
            let code = 2 * t;
            let mut img: Vec<Option<u32>> = vec![None; l];
            let mut hit = vec![false; l];
            for (i, w) in codes.iter().enumerate() {
                let j = match w.first() {
                    Some(&first) if first == code ^ 1 => Some(word_position(n, &w[1..])),
                    _ if w.len() < n => {
                        let mut v = Vec::with_capacity(w.len() + 1);
                        v.push(code);
                        v.extend_from_slice(w);
                        Some(word_position(n, &v))
                    }
                    _ => None,
                };
                if let Some(j) = j {
                    img[i] = Some(j as u32);
                    hit[j] = true;
                }
            }
            let mut free = (0..l).filter(|&j| !hit[j]);
            let images: Vec<u32> = img
                .into_iter()
                .map(|v| v.unwrap_or_else(|| free.next().expect("completion has a free target") as u32))
                .collect();
            gens.push(Perm::from_images(images)?);
        }
        let gens_inv: Vec<Perm> = gens.iter().map(Perm::inverse).collect();
        let (g0, certificate) = if l <= 64 {
            (PermGroup::Chain(StabChain::new(l, &gens)), None)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed ^ n as u64);
            let cert = perm::recognize_giant(l, &gens, &mut rng, self.config.giant_tries)?;
            let g = match cert.kind {
                perm::Giant::Alternating => PermGroup::Alternating(l),
                perm::Giant::Symmetric => PermGroup::Symmetric(l),
            };
            (g, Some(cert))
        };
        let prev = built.last().expect("previous level");
        let below = prev.end();
        let order0 = g0.order();
        let mut k = 1usize;
        while &order0 * factorial(k) <= below {
            k += 1;
        }
        let kfact = factorial(k);
        let size = &order0 * &kfact;
        Ok(Level {
            n,
            start: below,
            size,
            group: Arc::new(LevelGroup::Perm(PermLevel { g0, k, kfact, gens, gens_inv, codes, certificate })),
        })
    }

    /// `e_n(w)(p)` for `p ∈ I_n` where `w` is restricted from its own level to `n`.
    pub fn eval_word(&self, w: &Word, p: &BigUint) -> Result<BigUint> {
        let lv = self.level_of(p)?;
        if w.level() < lv.n {
            return Err(Error::domain(format!("a level-{} word cannot act on I_{}", w.level(), lv.n)));
        }
        let g = lv.word_elem(&w.restrict(lv.n)?)?;
        lv.act(&g, p)
    }

    /// `e(w)(p)`.
    pub fn eval_e(&self, w: &OmegaWord, p: &BigUint) -> Result<BigUint> {
        let lv = self.level_of(p)?;
        let g = lv.word_elem(&w.restrict(lv.n))?;
        lv.act(&g, p)
    }

    /// `e(x, d⁰, d¹)^{±1}(p)` for a single seed.
    pub fn eval_seed(&self, seed: &SeedTriple, sign: Sign, p: &BigUint) -> Result<BigUint> {
        let lv = self.level_of(p)?;
        let g = lv.gen_elem(&seed.restrict(lv.n))?;
        let g = if sign == Sign::Neg { lv.inv(&g) } else { g };
        lv.act(&g, p)
    }

    /// `e(x̄, d̄⁰, d̄¹)(p)` for a finite triple of level at least `n(p)`.
    pub fn eval_triple(&self, t: &GenTriple, sign: Sign, p: &BigUint) -> Result<BigUint> {
        let lv = self.level_of(p)?;
        if t.level() < lv.n {
            return Err(Error::domain(format!("a level-{} triple cannot act on I_{}", t.level(), lv.n)));
        }
        let g = lv.gen_elem(&t.restrict(lv.n))?;
        let g = if sign == Sign::Neg { lv.inv(&g) } else { g };
        lv.act(&g, p)
    }

    fn scaled_dict(&self, n: usize) -> Result<Arc<ScaledDict>> {
        if let Some(d) = self.dicts.lock().expect("dict lock").get(&n) {
            return Ok(d.clone());
        }
        let lv = self.level(n)?;
        let len = n.min(self.config.dict_len);
        let mut signed: Vec<Letter> = Vec::new();
        for s in &self.config.alphabet {
            let t = s.restrict(n);
            for sign in [Sign::Pos, Sign::Neg] {
                let l = Letter::new(t.clone(), sign);
                if !signed.contains(&l) {
                    signed.push(l);
                }
            }
        }
        let mut words = vec![Word::empty(n)];
        let mut layer = vec![Word::empty(n)];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &layer {
                for l in &signed {
                    let v = Word::single(l.triple.clone(), l.sign).mul(w)?;
                    if v.len() == w.len() + 1 && !words.contains(&v) && !next.contains(&v) {
                        next.push(v);
                    }
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        let mut by_value = HashMap::new();
        let mut injective = true;
        for w in words {
            let Elem::Cyc(v) = lv.word_elem(&w)? else { unreachable!("scaled levels are cyclic") };
            if by_value.insert(v, w).is_some() {
                injective = false;
            }
        }
        let d = Arc::new(ScaledDict { injective, by_value });
        self.dicts.lock().expect("dict lock").insert(n, d.clone());
        Ok(d)
    }

    /// Whether `δ_n` is served at level `n`.
    pub fn dictionary_available(&self, n: usize) -> Result<bool> {
        match self.config.mode {
            Mode::Faithful => Ok(n <= self.config.level_cap.min(self.config.enum_cap)),
            Mode::Scaled => Ok(self.scaled_dict(n)?.injective),
        }
    }

    /// `δ_n(m, m2)`: the dictionary word moving `m` to `m2`.
    pub fn delta_n(&self, m: &BigUint, m2: &BigUint) -> Result<Option<Word>> {
        let n = self.interval_of(m)?;
        if self.interval_of(m2)? != n {
            return Err(Error::domain(format!("{m} and {m2} lie in different intervals")));
        }
        let lv = self.level(n)?;
        let h = lv.phi_inv(m)?;
        let h2 = lv.phi_inv(m2)?;
        let g = lv.mul(&h2, &lv.inv(&h));
        match &*lv.group {
            LevelGroup::Cyclic if self.config.mode == Mode::Faithful => {
                Ok(if lv.is_identity(&g) { Some(Word::empty(0)) } else { None })
            }
            LevelGroup::Cyclic => {
                let d = self.scaled_dict(n)?;
                if !d.injective {
                    return Err(Error::capacity(format!("scaled dictionary at level {n} is not injective")));
                }
                let Elem::Cyc(v) = g else { unreachable!("scaled levels are cyclic") };
                Ok(d.by_value.get(&v).cloned())
            }
            LevelGroup::Perm(pl) => {
                let Elem::Pair(g0, pi) = g else { unreachable!("permutation levels hold pairs") };
                if !pi.is_identity() {
                    return Ok(None);
                }
                let i = g0.apply(0);
                let written = &pl.codes[i];
                let w = Word::reduce(n, written.iter().rev().map(|&c| code_letter(n, c)).collect())?;
                Ok(if pl.word_perm(&w) == g0 { Some(w) } else { None })
            }
        }
    }

    /// Condition (2) at a faithful level: `e_n(w^i)(0) = i` for the whole enumeration, so the
    /// images are pairwise distinct.  Returns the number of distinct images.
    pub fn check_injective_on_w(&self, n: usize) -> Result<usize> {
        let lv = self.level(n)?;
        match (&*lv.group, self.config.mode) {
            (LevelGroup::Perm(pl), _) => {
                let mut seen = vec![false; pl.degree()];
                let mut distinct = 0;
                for (i, w) in pl.codes.iter().enumerate() {
                    let j = pl.word_apply_written(w, 0);
                    if j != i || seen[j] {
                        return Err(Error::domain(format!("e_{n}(w^{i})(0) = {j}")));
                    }
                    seen[j] = true;
                    distinct += 1;
                }
                Ok(distinct)
            }
            (LevelGroup::Cyclic, Mode::Faithful) => Ok(1),
            (LevelGroup::Cyclic, Mode::Scaled) => {
                let words = crate::words::enumerate_w(n, self.config.enum_cap)?;
                let mut seen = std::collections::HashSet::new();
                for w in &words {
                    seen.insert(lv.word_elem(w)?);
                }
                Ok(seen.len())
            }
        }
    }

    /// Materializes `W_n` as words, in enumeration order.
    pub fn words(&self, n: usize) -> Result<Vec<Word>> {
        crate::words::enumerate_w(n, self.config.enum_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::enumerate_w;

    #[test]
    fn word_positions_follow_enumeration() {
        for n in 1..=2 {
            let codes = enumerate_codes(n);
            let words = enumerate_w(n, 2).unwrap();
            assert_eq!(codes.len(), words.len());
            for (i, (c, w)) in codes.iter().zip(&words).enumerate() {
                assert_eq!(word_position(n, c), i);
                let written: Vec<usize> = w.letters().iter().rev().map(letter_code).collect();
                assert_eq!(&written, c);
            }
        }
    }

    #[test]
    fn scaled_boundaries() {
        let t = Tower::scaled();
        assert_eq!(t.start(3).unwrap(), BigUint::from(49u32));
        assert_eq!(t.level(3).unwrap().size, BigUint::from(56u32));
        assert_eq!(t.interval_of(&BigUint::from(49u32)).unwrap(), 3);
        assert_eq!(t.interval_of(&BigUint::from(48u32)).unwrap(), 2);
        assert_eq!(t.interval_of(&BigUint::zero()).unwrap(), 0);
        for p in 0u32..2000 {
            let n = t.interval_of(&BigUint::from(p)).unwrap();
            let lv = t.level(n).unwrap();
            assert!(lv.contains(&BigUint::from(p)));
        }
    }

    #[test]
    fn faithful_low_levels() {
        let t = Tower::faithful();
        let l0 = t.level(0).unwrap();
        assert_eq!((l0.start.clone(), l0.end()), (BigUint::zero(), BigUint::from(7u32)));
        assert_eq!(t.interval_of(&BigUint::from(6u32)).unwrap(), 0);
        let l1 = t.level(1).unwrap();
        let pl = l1.perm_level().unwrap();
        assert_eq!(pl.degree(), 17);
        assert_eq!(l1.start, BigUint::from(7u32));
        assert!(l1.size > BigUint::from(7u32));
        assert_eq!(t.check_injective_on_w(1).unwrap(), 17);
        assert!(t.level(3).is_err());
    }

    #[test]
    fn faithful_level_one_is_regular_on_samples() {
        let t = Tower::faithful();
        let l1 = t.level(1).unwrap();
        let words = enumerate_w(1, 2).unwrap();
        let pts: Vec<BigUint> = (0u32..40).map(|i| &l1.start + BigUint::from(i) * 1_000_003u32 % &l1.size).collect();
        for w in &words {
            let g = l1.word_elem(w).unwrap();
            for p in &pts {
                let q = l1.act(&g, p).unwrap();
                assert!(l1.contains(&q));
                assert_eq!(q == *p, w.is_empty());
                assert_eq!(l1.phi(&l1.phi_inv(p).unwrap()).unwrap(), *p);
            }
        }
    }

    #[test]
    fn delta_lookup() {
        let t = Tower::faithful();
        let l1 = t.level(1).unwrap();
        let p = &l1.start + 12345u32;
        assert_eq!(t.delta_n(&p, &p).unwrap().unwrap(), Word::empty(1));
        for w in enumerate_w(1, 2).unwrap() {
            let q = t.eval_word(&w, &p).unwrap();
            assert_eq!(t.delta_n(&p, &q).unwrap().unwrap(), w);
        }
        let outside = (0u32..200)
            .map(|i| &p + i + 1u32)
            .find(|q| t.delta_n(&p, q).unwrap().is_none());
        assert!(outside.is_some());
        assert!(t.delta_n(&BigUint::from(3u32), &p).is_err());
    }

    #[test]
    fn scaled_delta_and_dictionary() {
        let t = Tower::scaled();
        let seed = t.config.alphabet[0].clone();
        let w = OmegaWord::single(seed, Sign::Pos);
        for n in 1..6 {
            let p = t.start(n).unwrap() + 3u32;
            let q = t.eval_e(&w, &p).unwrap();
            assert!(t.dictionary_available(n).unwrap());
            assert_eq!(t.delta_n(&p, &q).unwrap().unwrap(), w.restrict(n));
        }
        let p = BigUint::from(2u32);
        assert_eq!(t.delta_n(&p, &p).unwrap().unwrap(), Word::empty(0));
        assert_eq!(t.delta_n(&p, &BigUint::from(3u32)).unwrap(), None);
    }

    #[test]
    fn scaled_eval_matches_materialized_permutation() {
        let t = Tower::scaled();
        let seed: SeedTriple = "[ones: 0 ; ones: 1 ; zero]".parse().unwrap();
        let lv = t.level(1).unwrap();
        // brute force: σ_1 of the triple value as an explicit table on I_1
        let v = seed.restrict(1).value().to_u64().unwrap() % 14;
        for i in 0..14u64 {
            let p = BigUint::from(7 + i);
            let expect = BigUint::from(7 + (i + v) % 14);
            assert_eq!(t.eval_seed(&seed, Sign::Pos, &p).unwrap(), expect);
            assert!(lv.contains(&expect));
        }
    }

    #[test]
    fn config_parses() {
        let c = TowerConfig::parse("mode = faithful\nlevel_cap = 1 # low\nseed = [ones: 0 ; zero ; zero]\n").unwrap();
        assert_eq!(c.mode, Mode::Faithful);
        assert_eq!(c.level_cap, 1);
        assert_eq!(c.alphabet.len(), 1);
        assert!(TowerConfig::parse("bogus = 1").is_err());
        assert!(TowerConfig::parse("scaled_base = 5").is_err());
    }
}
