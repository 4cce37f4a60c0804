//! Binary sequences, the coding `χ`/`χ†` of injections, good sequences and `◁`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::inj::Injection;

/// A finite binary sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    pub fn from_str01(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::parse(format!("`{c}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }

    pub fn from_u64(value: u64, len: usize) -> Self {
        Bits((0..len).map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    /// `s↾n`; positions past the end read as zero.
    pub fn restrict(&self, n: usize) -> Bits {
        Bits((0..n).map(|i| self.0.get(i).copied().unwrap_or(false)).collect())
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// `Σ b_i 2^i`.
    pub fn value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                v.set_bit(i as u64, true);
            }
        }
        v
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Parses the binary-format literal: `01001_2`, `0^3 1 0^2 1_2`, plain `0101`, or `∅`.
impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_suffix("_2").unwrap_or(s);
        let mut out = Bits::new();
        for tok in s.split_whitespace() {
            if tok == "∅" {
                continue;
            }
            match tok.split_once('^') {
                Some((body, rep)) => {
                    let rep: usize =
                        rep.parse().map_err(|_| Error::parse(format!("bad repeat count in `{tok}`")))?;
                    let body = Bits::from_str01(body)?;
                    for _ in 0..rep {
                        out.0.extend_from_slice(&body.0);
                    }
                }
                None => out.0.extend(Bits::from_str01(tok)?.0),
            }
        }
        Ok(out)
    }
}

/// `ŝ`: the increasing enumeration of one-positions.
pub fn hat(s: &Bits) -> Vec<usize> {
    s.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// `χ(h)` for a finite injective sequence: `h(i)` zeros before the `(i+1)`-st one.
pub fn chi(h: &[u64]) -> Bits {
    let mut out = Bits::new();
    for &v in h {
        out.0.extend(std::iter::repeat_n(false, v as usize));
        out.0.push(true);
    }
    out
}

/// Decodes gap lengths until either the bits run out or a gap repeats.
/// Returns the longest preimage together with the number of bits it consumed.
fn decode_prefix(bits: impl Iterator<Item = bool>) -> (Vec<u64>, usize) {
    let mut out: Vec<u64> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut zeros = 0u64;
    let mut pos = 0usize;
    let mut consumed = 0usize;
    for b in bits {
        pos += 1;
        if b {
            if !seen.insert(zeros) {
                break;
            }
            out.push(zeros);
            consumed = pos;
            zeros = 0;
        } else {
            zeros += 1;
        }
    }
    (out, consumed)
}

/// `χ†(x)`: the preimage of the longest prefix of `x` lying in `range(χ)`.
pub fn chi_dagger(x: &Bits) -> Vec<u64> {
    decode_prefix(x.0.iter().copied()).0
}

/// An infinite binary sequence given by a finite description.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitStream {
    /// The prefix, then zeros forever.
    EventuallyZero(Bits),
    /// The prefix, then the period repeated forever (period nonempty).
    Periodic { prefix: Bits, period: Bits },
    /// `χ(h)`, followed by zeros when `h` is finite.
    Chi(Injection),
    Good(GoodStream),
}

/// A good sequence generated from a starting element of `𝒞`: each further one is placed
/// at the admissible position selected by cycling through `skips` (skip `t` chooses the
/// `(t+1)`-st admissible position).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoodStream {
    pub start: Bits,
    pub skips: Vec<u64>,
}

/// Positions above this many bits are not materialized; every query this crate makes is
/// far below it.
const POSITION_BIT_CAP: u64 = 1 << 22;

impl GoodStream {
    pub fn new(start: Bits, skips: Vec<u64>) -> Result<Self> {
        if !in_c(&start) {
            return Err(Error::domain(format!("{start} is not in 𝒞")));
        }
        Ok(GoodStream { start, skips })
    }

    /// One-positions in increasing order, as long as they stay representable.
    fn positions(&self) -> impl Iterator<Item = BigUint> + '_ {
        let start_ones: Vec<BigUint> = hat(&self.start).into_iter().map(BigUint::from).collect();
        let mut sum = self.start.value();
        let mut last = start_ones.last().cloned();
        let mut step = 0usize;
        let initial = start_ones.into_iter();
        let generated = std::iter::from_fn(move || {
            let skip = if self.skips.is_empty() { 0 } else { self.skips[step % self.skips.len()] };
            step += 1;
            let next = match &last {
                None => BigUint::from(skip),
                Some(n0) => {
                    let n0u = n0.to_u64()?;
                    if n0u >= POSITION_BIT_CAP {
                        return None;
                    }
                    // sum ∈ [2^{n0}, 2^{n0+1}) so the least admissible position is sum itself.
                    let modulus = BigUint::one() << (n0u + 1);
                    &sum + modulus * BigUint::from(skip)
                }
            };
            if next.bits() > POSITION_BIT_CAP {
                return None;
            }
            let nu = next.to_u64()?;
            sum.set_bit(nu, true);
            last = Some(next.clone());
            Some(next)
        });
        initial.chain(generated)
    }
}

impl BitStream {
    pub fn zeros() -> Self {
        BitStream::EventuallyZero(Bits::new())
    }

    /// Finitely supported stream with ones exactly at `ones`.
    pub fn from_ones(ones: &[usize]) -> Self {
        let len = ones.iter().max().map_or(0, |m| m + 1);
        let mut b = Bits::zeros(len);
        for &i in ones {
            b.0[i] = true;
        }
        BitStream::EventuallyZero(b)
    }

    pub fn chi_of(h: Injection) -> Self {
        BitStream::Chi(h)
    }

    /// One-positions in increasing order; infinite for infinitely many ones, but stops
    /// (rather than looping) once positions become unrepresentable.
    pub fn ones_positions(&self) -> Box<dyn Iterator<Item = BigUint> + '_> {
        match self {
            BitStream::EventuallyZero(b) => Box::new(hat(b).into_iter().map(BigUint::from)),
            BitStream::Periodic { prefix, period } => {
                let pre = hat(prefix).into_iter().map(BigUint::from);
                let per = hat(period);
                if per.is_empty() {
                    return Box::new(pre);
                }
                let (pl, ql) = (prefix.len(), period.len());
                let rep = (0u64..).flat_map(move |r| {
                    let base = pl as u64 + r * ql as u64;
                    per.clone().into_iter().map(move |i| BigUint::from(base + i as u64))
                });
                Box::new(pre.chain(rep))
            }
            BitStream::Chi(h) => {
                let mut i = 0u64;
                let mut acc = BigUint::zero();
                Box::new(std::iter::from_fn(move || {
                    let v = h.get_u64(i)?;
                    i += 1;
                    acc += v + 1u32;
                    Some(&acc - 1u32)
                }))
            }
            BitStream::Good(g) => Box::new(g.positions()),
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        match self {
            BitStream::EventuallyZero(b) => i < b.len() && b.get(i),
            BitStream::Periodic { prefix, period } => {
                if i < prefix.len() {
                    prefix.get(i)
                } else {
                    period.get((i - prefix.len()) % period.len())
                }
            }
            _ => {
                let target = BigUint::from(i);
                for p in self.ones_positions() {
                    if p == target {
                        return true;
                    }
                    if p > target {
                        return false;
                    }
                }
                false
            }
        }
    }

    /// `x↾n`.
    pub fn restrict(&self, n: usize) -> Bits {
        match self {
            BitStream::EventuallyZero(b) => b.restrict(n),
            BitStream::Periodic { .. } => Bits((0..n).map(|i| self.bit(i)).collect()),
            _ => {
                let mut out = Bits::zeros(n);
                for p in self.ones_positions() {
                    match p.to_usize() {
                        Some(k) if k < n => out.0[k] = true,
                        _ => break,
                    }
                }
                out
            }
        }
    }

    /// `c↾len` is good, for arbitrary-precision `len`.
    pub fn prefix_is_good(&self, len: &BigUint) -> Result<bool> {
        Ok(match self.first_bad_len()? {
            None => true,
            Some(bad) => len < &bad,
        })
    }

    /// The least `L` such that `c↾L` is not good, or `None` if every prefix is good.
    pub fn first_bad_len(&self) -> Result<Option<BigUint>> {
        if let BitStream::Good(_) = self {
            return Ok(None);
        }
        let scan_limit = match self {
            BitStream::Periodic { prefix, period } => Some(prefix.len() + 2 * period.len() + 160),
            _ => None,
        };
        let mut sum = BigUint::zero();
        let mut prev: Option<BigUint> = None;
        for (idx, p) in self.ones_positions().enumerate() {
            if let Some(n0) = &prev {
                if !congruent_next(n0, &p, &sum)? {
                    return Ok(Some(p + 1u32));
                }
            }
            let pu = p.to_u64().filter(|&v| v < POSITION_BIT_CAP);
            match pu {
                Some(v) => sum.set_bit(v, true),
                None => {
                    // the next congruence check would need a sum with more bits than any
                    // representable position; the following position must fail it
                    return match self.ones_positions().nth(idx + 1) {
                        Some(q) => Ok(Some(q + 1u32)),
                        None => Ok(None),
                    };
                }
            }
            prev = Some(p);
            if let Some(lim) = scan_limit {
                if prev.as_ref().and_then(|x| x.to_usize()).is_some_and(|x| x > lim) {
                    return Err(Error::capacity("periodic stream kept satisfying the congruence"));
                }
            }
        }
        Ok(None)
    }

    /// Whether the stream has only finitely many ones.
    pub fn finitely_many_ones(&self) -> bool {
        match self {
            BitStream::EventuallyZero(_) => true,
            BitStream::Periodic { period, .. } => period.ones() == 0,
            BitStream::Chi(h) => h.is_finite(),
            BitStream::Good(_) => false,
        }
    }

    /// Goodness of the infinite sequence.
    pub fn is_good(&self) -> Result<bool> {
        if self.finitely_many_ones() {
            // an infinite sequence with finitely many ones violates the finiteness clause
            return Ok(false);
        }
        match self {
            BitStream::Good(_) => Ok(true),
            _ => match self.first_bad_len()? {
                Some(_) => Ok(false),
                None => Err(Error::capacity("could not decide goodness of the description")),
            },
        }
    }

    /// `x ∈ range(χ)` for the infinite sequence.
    pub fn in_range_chi(&self) -> Result<bool> {
        match self {
            BitStream::Chi(h) => Ok(!h.is_finite()),
            BitStream::EventuallyZero(_) => Ok(false),
            BitStream::Periodic { period, .. } => {
                // with ones in the period some gap repeats
                let _ = period;
                Ok(false)
            }
            BitStream::Good(_) => Err(Error::capacity("range(χ) membership of a generated good stream")),
        }
    }
}

/// `n1 ≡ Σ_{i ≤ n0} c(i) 2^i (mod 2^{n0+1})` where `sum_upto_n0` already includes bit n0.
fn congruent_next(n0: &BigUint, n1: &BigUint, sum_upto_n0: &BigUint) -> Result<bool> {
    let n0u = n0.to_u64().ok_or_else(|| Error::capacity("one-position too large"))?;
    if n1.bits() <= n0u {
        // n1 < 2^{n0} ≤ sum and sum < 2^{n0+1}
        return Ok(false);
    }
    let modulus = BigUint::one() << (n0u + 1);
    Ok(n1 % &modulus == sum_upto_n0 % &modulus)
}

/// Goodness of a finite sequence.
pub fn is_good(c: &Bits) -> bool {
    let ones = hat(c);
    let mut sum = BigUint::zero();
    let mut prev: Option<usize> = None;
    for p in ones {
        if let Some(n0) = prev {
            let ok = congruent_next(&BigUint::from(n0), &BigUint::from(p), &sum).unwrap_or(false);
            if !ok {
                return false;
            }
        }
        sum.set_bit(p as u64, true);
        prev = Some(p);
    }
    true
}

/// Membership in `𝒞`: finite, good, and empty or ending in 1.
pub fn in_c(c: &Bits) -> bool {
    (c.is_empty() || c.0[c.len() - 1]) && is_good(c)
}

/// The unique `c′ ∈ 𝒞` with `lh(c′) = target_len` and `c ◁ c′`, if any.
pub fn good_extend(c: &Bits, target_len: usize) -> Result<Option<Bits>> {
    if !in_c(c) {
        return Err(Error::domain(format!("{c} is not in 𝒞")));
    }
    if target_len <= c.len() {
        return Ok(None);
    }
    let mut out = c.clone();
    out.0.resize(target_len - 1, false);
    out.0.push(true);
    Ok(is_good(&out).then_some(out))
}

/// `c ◁ c′`.
pub fn extends_c(c: &Bits, c2: &Bits) -> bool {
    in_c(c) && in_c(c2) && matches!(good_extend(c, c2.len()), Ok(Some(ref x)) if x == c2)
}

/// `χ†` for an infinite description.
pub fn chi_dagger_stream(x: &BitStream) -> Result<Injection> {
    match x {
        BitStream::Chi(h) => Ok(h.clone()),
        BitStream::EventuallyZero(b) => Injection::finite(chi_dagger(b)),
        BitStream::Periodic { prefix, period } => {
            // each distinct gap can appear once, so by then at most (ones + 1) periods are read
            let reps = prefix.ones() + period.ones() + 2;
            let total = prefix.len() + reps * period.len();
            let bits = (0..total).map(|i| x.bit(i));
            Injection::finite(decode_prefix(bits).0)
        }
        BitStream::Good(_) => Err(Error::capacity("χ† of a generated good stream")),
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitStream::EventuallyZero(b) => {
                let ones: Vec<String> = hat(b).iter().map(|i| i.to_string()).collect();
                write!(f, "ones: {}", ones.join(" "))
            }
            BitStream::Periodic { prefix, period } => write!(f, "periodic: {} / {}", prefix, period),
            BitStream::Chi(h) => write!(f, "chi: {h}"),
            BitStream::Good(g) => {
                let skips: Vec<String> = g.skips.iter().map(|i| i.to_string()).collect();
                if skips.is_empty() {
                    write!(f, "good: {}", g.start)
                } else {
                    write!(f, "good: {} skip {}", g.start, skips.join(" "))
                }
            }
        }
    }
}

/// Descriptions: `ones: 0 2 5`, `bits: 0101`, `periodic: 01 / 001`, `chi: <injection>`,
/// `good: <literal in 𝒞> [skip t0 t1 ...]`, `zero`.
impl FromStr for BitStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" || s == "0^ω" {
            return Ok(BitStream::zeros());
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("bit stream `{s}` lacks a `kind:` tag")))?;
        let rest = rest.trim();
        match kind.trim() {
            "ones" => {
                let ones = rest
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| Error::parse(format!("bad position `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BitStream::from_ones(&ones))
            }
            "bits" => Ok(BitStream::EventuallyZero(rest.parse()?)),
            "periodic" => {
                let (a, b) = rest.split_once('/').ok_or_else(|| Error::parse("periodic needs `prefix / period`"))?;
                let prefix: Bits = a.parse()?;
                let period: Bits = b.parse()?;
                if period.is_empty() {
                    return Err(Error::parse("empty period"));
                }
                Ok(BitStream::Periodic { prefix, period })
            }
            "chi" => Ok(BitStream::Chi(rest.parse()?)),
            "good" => {
                let (lit, skips) = match rest.split_once("skip") {
                    Some((a, b)) => (a, b),
                    None => (rest, ""),
                };
                let skips = skips
                    .split_whitespace()
                    .map(|t| t.parse::<u64>().map_err(|_| Error::parse(format!("bad skip `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BitStream::Good(GoodStream::new(lit.parse()?, skips)?))
            }
            other => Err(Error::parse(format!("unknown bit stream kind `{other}`"))),
        }
    }
}

/// Either a finite sequence or an infinite description; the two shapes `B₀` accepts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitSeq {
    Finite(Bits),
    Infinite(BitStream),
}

impl BitSeq {
    pub fn len(&self) -> Option<usize> {
        match self {
            BitSeq::Finite(b) => Some(b.len()),
            BitSeq::Infinite(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Bit `i`, or `None` past the end of a finite sequence.
    pub fn bit(&self, i: usize) -> Option<bool> {
        match self {
            BitSeq::Finite(b) => (i < b.len()).then(|| b.get(i)),
            BitSeq::Infinite(s) => Some(s.bit(i)),
        }
    }

    /// `x↾n`, reading zeros past the end of a finite sequence.
    pub fn restrict(&self, n: usize) -> Bits {
        match self {
            BitSeq::Finite(b) => b.restrict(n),
            BitSeq::Infinite(s) => s.restrict(n),
        }
    }

    pub fn ones_positions(&self) -> Box<dyn Iterator<Item = BigUint> + '_> {
        match self {
            BitSeq::Finite(b) => Box::new(hat(b).into_iter().map(BigUint::from)),
            BitSeq::Infinite(s) => s.ones_positions(),
        }
    }

    /// `c↾len` is good (`len` capped at the length of a finite sequence).
    pub fn prefix_is_good(&self, len: &BigUint) -> Result<bool> {
        match self {
            BitSeq::Finite(b) => {
                let n = len.to_usize().map_or(b.len(), |n| n.min(b.len()));
                Ok(is_good(&b.restrict(n)))
            }
            BitSeq::Infinite(s) => s.prefix_is_good(len),
        }
    }

    pub fn is_good(&self) -> Result<bool> {
        match self {
            BitSeq::Finite(b) => Ok(is_good(b)),
            BitSeq::Infinite(s) => s.is_good(),
        }
    }
}

impl From<Bits> for BitSeq {
    fn from(b: Bits) -> Self {
        BitSeq::Finite(b)
    }
}

impl From<BitStream> for BitSeq {
    fn from(s: BitStream) -> Self {
        BitSeq::Infinite(s)
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitSeq::Finite(b) => write!(f, "{b}"),
            BitSeq::Infinite(s) => write!(f, "{s}"),
        }
    }
}

/// A finite literal parses as finite, a `kind:` description as infinite.
impl FromStr for BitSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains(':') || s.trim() == "zero" {
            Ok(BitSeq::Infinite(s.parse()?))
        } else {
            Ok(BitSeq::Finite(s.parse()?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(&[]), Bits::new());
        assert_eq!(chi(&[0, 1]), bits("101"));
        assert_eq!(chi(&[2, 0]), bits("0011"));
    }

    #[test]
    fn chi_dagger_examples() {
        assert_eq!(chi_dagger(&chi(&[3, 1])), vec![3, 1]);
        assert_eq!(chi_dagger(&bits("0101")), vec![1]);
        assert_eq!(chi_dagger(&bits("000")), Vec::<u64>::new());
        assert!(chi_dagger_stream(&BitStream::zeros()).unwrap().is_empty());
        let periodic: BitStream = "periodic: ∅ / 01".parse().unwrap();
        assert_eq!(chi_dagger_stream(&periodic).unwrap(), Injection::finite(vec![1u64]).unwrap());
    }

    #[test]
    fn goodness_examples() {
        assert!(is_good(&Bits::new()));
        assert!(is_good(&bits("11")));
        assert!(!is_good(&bits("101")));
        assert!(is_good(&bits("1101")));
        assert!(!is_good(&bits("1110")));
    }

    #[test]
    fn good_extend_examples() {
        assert_eq!(good_extend(&Bits::new(), 1).unwrap(), Some(bits("1")));
        assert_eq!(good_extend(&bits("1"), 2).unwrap(), Some(bits("11")));
        assert_eq!(good_extend(&bits("1"), 3).unwrap(), None);
        assert!(good_extend(&bits("10"), 3).is_err());
    }

    #[test]
    fn literal_formats() {
        assert_eq!(bits("0^3 1 0^2 1_2"), bits("000100 1"));
        assert_eq!(bits("01001_2"), Bits(vec![false, true, false, false, true]));
        assert_eq!(hat(&bits("01001_2")), vec![1, 4]);
        assert_eq!(hat(&bits("0101")), vec![1, 3]);
        assert!(hat(&bits("0000")).is_empty());
    }

    #[test]
    fn good_stream_positions_follow_congruence() {
        let g: BitStream = "good: 1".parse().unwrap();
        let first: Vec<u64> = g.ones_positions().take(4).map(|p| p.to_u64().unwrap()).collect();
        assert_eq!(first, vec![0, 1, 3, 11]);
        assert!(g.is_good().unwrap());
        assert!(is_good(&g.restrict(3000)));
        let skipped: BitStream = "good: 1 skip 1".parse().unwrap();
        let first: Vec<u64> = skipped.ones_positions().take(3).map(|p| p.to_u64().unwrap()).collect();
        // 1 ≡ 1 mod 2 skipped once gives 3, then 1+8 = 9 mod 16 skipped once gives 25
        assert_eq!(first, vec![0, 3, 25]);
        assert!(is_good(&skipped.restrict(40)));
    }

    #[test]
    fn stream_goodness_decisions() {
        assert!(!BitStream::zeros().is_good().unwrap());
        assert!(!"ones: 0 1".parse::<BitStream>().unwrap().is_good().unwrap());
        assert!(!"periodic: ∅ / 1".parse::<BitStream>().unwrap().is_good().unwrap());
        let chi_stream = BitStream::Chi("+0".parse().unwrap());
        assert!(!chi_stream.is_good().unwrap());
        let bad = chi_stream.first_bad_len().unwrap().unwrap();
        assert!(!is_good(&chi_stream.restrict(bad.to_usize().unwrap())));
        assert!(is_good(&chi_stream.restrict(bad.to_usize().unwrap() - 1)));
    }

    #[test]
    fn stream_restriction_matches_bitwise_reads() {
        let streams: Vec<BitStream> = vec![
            "ones: 1 4 9".parse().unwrap(),
            "periodic: 1 / 001".parse().unwrap(),
            "chi: 2 0 +3".parse().unwrap(),
            "good: 11".parse().unwrap(),
        ];
        for s in &streams {
            let r = s.restrict(40);
            for i in 0..40 {
                assert_eq!(r.get(i), s.bit(i), "{s} at {i}");
            }
            let again: BitStream = s.to_string().parse().unwrap();
            assert_eq!(again.restrict(40), r);
        }
    }

    #[test]
    fn chi_stream_decodes_back() {
        let h: Injection = "2 0 +3".parse().unwrap();
        let x = BitStream::chi_of(h.clone());
        let prefix = x.restrict(200);
        let decoded = chi_dagger(&prefix);
        for (i, v) in decoded.iter().enumerate() {
            assert_eq!(h.get_u64(i as u64).unwrap(), BigUint::from(*v));
        }
    }
}
