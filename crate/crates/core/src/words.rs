//! Reduced words over generator triples, restriction maps `r^α_m`, and the enumeration of `W_n`.
//!
//! `letters[0]` is applied first; the textual form lists letters the way they are
//! written mathematically, last-applied on the left.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::coding::{BitStream, Bits};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenTriple {
    pub x: Bits,
    pub d0: Bits,
    pub d1: Bits,
}

impl GenTriple {
    pub fn new(x: Bits, d0: Bits, d1: Bits) -> Result<Self> {
        if x.len() != d0.len() || x.len() != d1.len() {
            return Err(Error::domain("triple components differ in length"));
        }
        Ok(GenTriple { x, d0, d1 })
    }

    pub fn empty() -> Self {
        GenTriple { x: Bits::new(), d0: Bits::new(), d1: Bits::new() }
    }

    pub fn level(&self) -> usize {
        self.x.len()
    }

    pub fn restrict(&self, m: usize) -> GenTriple {
        GenTriple { x: self.x.restrict(m), d0: self.d0.restrict(m), d1: self.d1.restrict(m) }
    }

    /// `x‖d0‖d1`.
    pub fn concat(&self) -> Bits {
        let mut v = self.x.0.clone();
        v.extend_from_slice(&self.d0.0);
        v.extend_from_slice(&self.d1.0);
        Bits(v)
    }

    /// Position among the `8^n` triples when ordered lexicographically by `x‖d0‖d1`.
    pub fn index(&self) -> usize {
        self.concat().0.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn from_index(level: usize, idx: usize) -> GenTriple {
        let total = 3 * level;
        let bits: Vec<bool> = (0..total).map(|i| (idx >> (total - 1 - i)) & 1 == 1).collect();
        GenTriple {
            x: Bits(bits[..level].to_vec()),
            d0: Bits(bits[level..2 * level].to_vec()),
            d1: Bits(bits[2 * level..].to_vec()),
        }
    }

    /// The bit-string value `Σ b_i 2^i` of `x‖d0‖d1`.
    pub fn value(&self) -> BigUint {
        self.concat().value()
    }
}

impl fmt::Display for GenTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |b: &Bits| if b.is_empty() { String::new() } else { b.to_string() };
        write!(f, "({}|{}|{})", show(&self.x), show(&self.d0), show(&self.d1))
    }
}

/// Exponent of a letter; `Pos < Neg` is the enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub triple: GenTriple,
    pub sign: Sign,
}

impl Letter {
    pub fn new(triple: GenTriple, sign: Sign) -> Self {
        Letter { triple, sign }
    }

    pub fn inverse(&self) -> Letter {
        Letter { triple: self.triple.clone(), sign: self.sign.flip() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    level: usize,
    letters: Vec<Letter>,
}

fn reduce_in_place<T: PartialEq>(letters: Vec<(T, Sign)>) -> Vec<(T, Sign)> {
    let mut out: Vec<(T, Sign)> = Vec::with_capacity(letters.len());
    for (t, s) in letters {
        if let Some((pt, ps)) = out.last() {
            if *pt == t && *ps == s.flip() {
                out.pop();
                continue;
            }
        }
        out.push((t, s));
    }
    out
}

impl Word {
    pub fn empty(level: usize) -> Self {
        Word { level, letters: Vec::new() }
    }

    /// Free reduction of a letter sequence, `letters[0]` applied first.
    pub fn reduce(level: usize, letters: Vec<Letter>) -> Result<Word> {
        for l in &letters {
            if l.triple.level() != level {
                return Err(Error::LevelMismatch { expected: level, found: l.triple.level() });
            }
        }
        let pairs = reduce_in_place(letters.into_iter().map(|l| (l.triple, l.sign)).collect());
        Ok(Word { level, letters: pairs.into_iter().map(|(t, s)| Letter::new(t, s)).collect() })
    }

    /// Reduces a sequence whose level is taken from its first letter.
    pub fn reduce_letters(letters: Vec<Letter>) -> Result<Word> {
        let level = letters.first().map_or(0, |l| l.triple.level());
        Word::reduce(level, letters)
    }

    pub fn single(triple: GenTriple, sign: Sign) -> Word {
        Word { level: triple.level(), letters: vec![Letter::new(triple, sign)] }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `self · other`: `other` acts first.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        if self.level != other.level {
            return Err(Error::LevelMismatch { expected: self.level, found: other.level });
        }
        let mut letters = other.letters.clone();
        letters.extend(self.letters.iter().cloned());
        Word::reduce(self.level, letters)
    }

    pub fn inverse(&self) -> Word {
        Word { level: self.level, letters: self.letters.iter().rev().map(Letter::inverse).collect() }
    }

    /// `r^α_m`, letterwise then reduced.
    pub fn restrict(&self, m: usize) -> Result<Word> {
        if m > self.level {
            return Err(Error::domain(format!("cannot restrict a level-{} word to level {m}", self.level)));
        }
        let letters = self.letters.iter().map(|l| Letter::new(l.triple.restrict(m), l.sign)).collect();
        Word::reduce(m, letters)
    }

    /// The components `(w₀, w₁, w₂)`: the word read through x, d0 and d1 separately.
    pub fn components(&self) -> [Vec<(Bits, Sign)>; 3] {
        let pick = |f: fn(&GenTriple) -> &Bits| self.letters.iter().map(|l| (f(&l.triple).clone(), l.sign)).collect();
        [pick(|t| &t.x), pick(|t| &t.d0), pick(|t| &t.d1)]
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .rev()
            .map(|l| format!("{}^{}", l.triple, if l.sign == Sign::Pos { "+1" } else { "-1" }))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn parse_letter_tokens(s: &str) -> Result<Vec<(Vec<String>, Sign)>> {
    let s = s.trim();
    if s.is_empty() || s == "∅" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.trim().is_empty() {
        let r = rest.trim_start();
        let r = r.strip_prefix('(').ok_or_else(|| Error::parse(format!("expected `(` in `{r}`")))?;
        let close = r.find(')').ok_or_else(|| Error::parse("unclosed letter"))?;
        let inner = &r[..close];
        let comps: Vec<String> = inner.split('|').map(|c| c.trim().to_string()).collect();
        let after = r[close + 1..].trim_start();
        let (sign, remaining) = if let Some(a) = after.strip_prefix("^+1") {
            (Sign::Pos, a)
        } else if let Some(a) = after.strip_prefix("^-1") {
            (Sign::Neg, a)
        } else if let Some(a) = after.strip_prefix("^1") {
            (Sign::Pos, a)
        } else {
            return Err(Error::parse(format!("letter `({inner})` lacks an exponent ^+1 or ^-1")));
        };
        out.push((comps, sign));
        rest = remaining;
    }
    Ok(out)
}

/// Literal format `(x|d0|d1)^±1 ...`, e.g. `(1|0|1)^-1 (0|0|1)^+1`.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (comps, sign) in parse_letter_tokens(s)? {
            if comps.len() != 3 {
                return Err(Error::parse("a letter needs three components x|d0|d1"));
            }
            let b = |c: &str| if c.is_empty() { Ok(Bits::new()) } else { Bits::from_str01(c) };
            letters.push(Letter::new(GenTriple::new(b(&comps[0])?, b(&comps[1])?, b(&comps[2])?)?, sign));
        }
        letters.reverse();
        Word::reduce_letters(letters)
    }
}

/// `|W_n|` in closed form: reduced words of length ≤ n over `2·8ⁿ` signed letters.
pub fn count_w(n: usize) -> BigUint {
    let signed = BigUint::from(2u32) * BigUint::from(8u32).pow(n as u32);
    let mut total = BigUint::from(1u32);
    let mut layer = signed.clone();
    for _ in 1..=n {
        total += &layer;
        layer *= &signed - 1u32;
    }
    total
}

/// `W_n`, graded by length and lexicographic within a length (written order, leftmost
/// letter most significant; letters ordered by triple index then `+1 < −1`).
pub fn enumerate_w(n: usize, cap: usize) -> Result<Vec<Word>> {
    if n > cap {
        return Err(Error::capacity(format!("enumeration of W_{n} exceeds cap {cap}")));
    }
    let triples: Vec<GenTriple> = (0..1usize << (3 * n)).map(|i| GenTriple::from_index(n, i)).collect();
    let signed: Vec<(usize, Sign)> = (0..triples.len()).flat_map(|i| [(i, Sign::Pos), (i, Sign::Neg)]).collect();
    let mut out = vec![Word::empty(n)];
    let mut layer: Vec<Vec<(usize, Sign)>> = vec![Vec::new()];
    for _ in 1..=n {
        let mut next = Vec::new();
        for w in &layer {
            for &(t, s) in &signed {
                if let Some(&(pt, ps)) = w.last() {
                    if pt == t && ps == s.flip() {
                        continue;
                    }
                }
                let mut v = w.clone();
                v.push((t, s));
                next.push(v);
            }
        }
        for w in &next {
            let letters = w.iter().rev().map(|&(t, s)| Letter::new(triples[t].clone(), s)).collect();
            out.push(Word { level: n, letters });
        }
        layer = next;
    }
    Ok(out)
}

/// A generator of level ω: three infinite bit sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedTriple {
    pub x: BitStream,
    pub d0: BitStream,
    pub d1: BitStream,
}

impl SeedTriple {
    pub fn new(x: BitStream, d0: BitStream, d1: BitStream) -> Self {
        SeedTriple { x, d0, d1 }
    }

    /// `r^ω_n`.
    pub fn restrict(&self, n: usize) -> GenTriple {
        GenTriple { x: self.x.restrict(n), d0: self.d0.restrict(n), d1: self.d1.restrict(n) }
    }
}

impl fmt::Display for SeedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} ; {} ; {}]", self.x, self.d0, self.d1)
    }
}

/// Three descriptions separated by `;`, optionally wrapped in brackets.
impl FromStr for SeedTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::parse("a seed triple needs three `;`-separated descriptions"));
        }
        Ok(SeedTriple::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    }
}

/// A reduced word over level-ω generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaWord {
    letters: Vec<(Arc<SeedTriple>, Sign)>,
}

impl OmegaWord {
    pub fn empty() -> Self {
        OmegaWord { letters: Vec::new() }
    }

    pub fn new(letters: Vec<(Arc<SeedTriple>, Sign)>) -> Self {
        OmegaWord { letters: reduce_in_place(letters) }
    }

    pub fn single(seed: Arc<SeedTriple>, sign: Sign) -> Self {
        OmegaWord { letters: vec![(seed, sign)] }
    }

    pub fn letters(&self) -> &[(Arc<SeedTriple>, Sign)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self · other`: `other` acts first.
    pub fn mul(&self, other: &OmegaWord) -> OmegaWord {
        let mut letters = other.letters.clone();
        letters.extend(self.letters.iter().cloned());
        OmegaWord::new(letters)
    }

    pub fn inverse(&self) -> OmegaWord {
        OmegaWord { letters: self.letters.iter().rev().map(|(t, s)| (t.clone(), s.flip())).collect() }
    }

    /// `r^ω_n(w)`.
    pub fn restrict(&self, n: usize) -> Word {
        let letters = self.letters.iter().map(|(t, s)| Letter::new(t.restrict(n), *s)).collect();
        Word::reduce(n, letters).expect("restrictions share a level")
    }
}

impl fmt::Display for OmegaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .rev()
            .map(|(t, s)| format!("{t}^{}", if *s == Sign::Pos { "+1" } else { "-1" }))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Written order, as [`Display`](fmt::Display) emits it: `[x ; d0 ; d1]^±1 …`, rightmost
/// letter applied first; a missing exponent means `+1`.
impl FromStr for OmegaWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rest = s.trim();
        if rest.is_empty() || rest == "∅" {
            return Ok(OmegaWord::empty());
        }
        let mut letters = Vec::new();
        while !rest.is_empty() {
            if !rest.starts_with('[') {
                return Err(Error::parse(format!("expected `[` at `{rest}`")));
            }
            let close = rest.find(']').ok_or_else(|| Error::parse("unclosed `[`"))?;
            let seed: SeedTriple = rest[..=close].parse()?;
            rest = rest[close + 1..].trim_start();
            let sign = if let Some(r) = rest.strip_prefix("^-1") {
                rest = r;
                Sign::Neg
            } else if let Some(r) = rest.strip_prefix("^+1").or_else(|| rest.strip_prefix("^1")) {
                rest = r;
                Sign::Pos
            } else {
                Sign::Pos
            };
            rest = rest.trim_start();
            letters.push((Arc::new(seed), sign));
        }
        letters.reverse();
        Ok(OmegaWord::new(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> GenTriple {
        let p: Vec<&str> = s.split('|').collect();
        GenTriple::new(p[0].parse().unwrap(), p[1].parse().unwrap(), p[2].parse().unwrap()).unwrap()
    }

    #[test]
    fn reduction_examples() {
        let a = t("1|0|1");
        let b = t("0|0|1");
        assert!(Word::reduce(1, vec![]).unwrap().is_empty());
        let w = Word::reduce(1, vec![Letter::new(a.clone(), Sign::Pos), Letter::new(a.clone(), Sign::Neg)]).unwrap();
        assert!(w.is_empty());
        let w = Word::reduce(
            1,
            vec![
                Letter::new(a.clone(), Sign::Pos),
                Letter::new(b.clone(), Sign::Pos),
                Letter::new(b.clone(), Sign::Neg),
                Letter::new(a.clone(), Sign::Pos),
            ],
        )
        .unwrap();
        assert_eq!(w.letters(), &[Letter::new(a.clone(), Sign::Pos), Letter::new(a, Sign::Pos)]);
        let mixed = Word::reduce(1, vec![Letter::new(t("10|00|01"), Sign::Pos)]);
        assert!(matches!(mixed, Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn restriction_examples() {
        assert!(Word::empty(0).restrict(0).unwrap().is_empty());
        let u = t("10|01|11");
        let v = t("11|01|11");
        let w = Word::reduce(2, vec![Letter::new(v, Sign::Neg), Letter::new(u.clone(), Sign::Pos)]).unwrap();
        assert_eq!(w.restrict(2).unwrap(), w);
        assert!(w.restrict(1).unwrap().is_empty());
        assert!(w.restrict(3).is_err());
    }

    #[test]
    fn literal_round_trip() {
        let w: Word = "(1|0|1)^-1 (0|0|1)^+1".parse().unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.letters()[0], Letter::new(t("0|0|1"), Sign::Pos));
        assert_eq!(w.to_string(), "(1|0|1)^-1 (0|0|1)^+1");
        let e: Word = "∅".parse().unwrap();
        assert!(e.is_empty());
        let o: OmegaWord = "[ones: 1 ; zero ; zero]^-1 [ones: 0 ; zero ; ones: 1]".parse().unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o.letters()[0].1, Sign::Pos);
        let again: OmegaWord = o.to_string().parse().unwrap();
        assert_eq!(again.to_string(), o.to_string());
    }

    #[test]
    fn enumeration_sizes_and_order() {
        assert_eq!(enumerate_w(0, 2).unwrap().len(), 1);
        let w1 = enumerate_w(1, 2).unwrap();
        assert_eq!(w1.len(), 17);
        assert!(w1[0].is_empty());
        let w2 = enumerate_w(2, 2).unwrap();
        assert_eq!(w2.len(), 16385);
        assert!(enumerate_w(3, 2).is_err());
        for n in 0..=2 {
            assert_eq!(count_w(n), BigUint::from(enumerate_w(n, 2).unwrap().len()));
        }
        let set: std::collections::HashSet<&Word> = w2.iter().collect();
        assert_eq!(set.len(), w2.len());
        assert!(w2.iter().all(|w| w.len() <= 2 && Word::reduce(2, w.letters().to_vec()).unwrap() == *w));
    }

    fn arb_word(level: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
        let bits = move || proptest::collection::vec(any::<bool>(), level).prop_map(Bits);
        let letter = (bits(), bits(), bits(), any::<bool>()).prop_map(|(x, d0, d1, s)| {
            Letter::new(GenTriple { x, d0, d1 }, if s { Sign::Pos } else { Sign::Neg })
        });
        proptest::collection::vec(letter, 0..max_len)
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent_and_associative(a in arb_word(1, 8), b in arb_word(1, 8), c in arb_word(1, 8)) {
            let (a, b, c) = (Word::reduce(1, a).unwrap(), Word::reduce(1, b).unwrap(), Word::reduce(1, c).unwrap());
            prop_assert_eq!(Word::reduce(1, a.letters().to_vec()).unwrap(), a.clone());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert!(a.mul(&a.inverse()).unwrap().is_empty());
        }

        #[test]
        fn restriction_is_a_homomorphism(v in arb_word(3, 8), w in arb_word(3, 8), m in 0usize..=3) {
            let (v, w) = (Word::reduce(3, v).unwrap(), Word::reduce(3, w).unwrap());
            let lhs = v.mul(&w).unwrap().restrict(m).unwrap();
            let rhs = v.restrict(m).unwrap().mul(&w.restrict(m).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
