//! Lazily evaluated injections `ω ⊇ dom → ω`.
//!
//! An [`Injection`] is an explicit prefix, an optional affine tail `i ↦ i + shift`,
//! an optional finite length, and a finite permutation of values applied on top.
//! This family is closed under truncation and inversion queries and answers the
//! interval-wise maxima that the anchor construction needs in closed form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection {
    prefix: Vec<BigUint>,
    shift: Option<BigUint>,
    len: Option<BigUint>,
    perm: BTreeMap<BigUint, BigUint>,
    perm_inv: BTreeMap<BigUint, BigUint>,
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

impl Injection {
    pub fn empty() -> Self {
        Self::finite(Vec::<u64>::new()).expect("empty sequence is injective")
    }

    pub fn finite<T: Into<BigUint>>(values: Vec<T>) -> Result<Self> {
        let prefix: Vec<BigUint> = values.into_iter().map(Into::into).collect();
        let len = Some(big(prefix.len() as u64));
        Self::build(prefix, None, len)
    }

    /// `prefix` followed by `i ↦ i + shift` for every `i ≥ prefix.len()`.
    pub fn affine<T: Into<BigUint>>(prefix: Vec<T>, shift: BigUint) -> Result<Self> {
        let prefix: Vec<BigUint> = prefix.into_iter().map(Into::into).collect();
        Self::build(prefix, Some(shift), None)
    }

    pub fn identity() -> Self {
        Self::affine(Vec::<u64>::new(), BigUint::zero()).expect("identity is injective")
    }

    fn build(prefix: Vec<BigUint>, shift: Option<BigUint>, len: Option<BigUint>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &prefix {
            if !seen.insert(v.clone()) {
                return Err(Error::domain(format!("value {v} repeated in injective prefix")));
            }
        }
        if let Some(s) = &shift {
            let first_tail = big(prefix.len() as u64) + s;
            if let Some(max) = prefix.iter().max() {
                if &first_tail <= max {
                    return Err(Error::domain(format!(
                        "affine tail starting at {first_tail} collides with prefix value {max}"
                    )));
                }
            }
        }
        let inj = Injection { prefix, shift, len, perm: BTreeMap::new(), perm_inv: BTreeMap::new() };
        if let Some(l) = &inj.len {
            if l < &inj.p() {
                return Err(Error::domain("length shorter than explicit prefix"));
            }
        }
        Ok(inj)
    }

    /// Post-compose with the transposition of values `a` and `b`.
    pub fn with_value_swap(&self, a: &BigUint, b: &BigUint) -> Self {
        let mut out = self.clone();
        if a == b {
            return out;
        }
        let ia = out.perm_inv.get(a).cloned().unwrap_or_else(|| a.clone());
        let ib = out.perm_inv.get(b).cloned().unwrap_or_else(|| b.clone());
        // π' = (a b) ∘ π, so π'(ia) = b and π'(ib) = a.
        out.set_perm(ia, b.clone());
        out.set_perm(ib, a.clone());
        out
    }

    fn set_perm(&mut self, from: BigUint, to: BigUint) {
        if from == to {
            self.perm.remove(&from);
            self.perm_inv.remove(&to);
        } else {
            self.perm.insert(from.clone(), to.clone());
            self.perm_inv.insert(to, from);
        }
    }

    fn p(&self) -> BigUint {
        big(self.prefix.len() as u64)
    }

    pub fn len(&self) -> Option<&BigUint> {
        match (&self.len, &self.shift) {
            (Some(l), _) => Some(l),
            (None, _) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.len.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.len.as_ref().is_some_and(|l| l.is_zero())
    }

    /// Length as a machine integer, if finite and small.
    pub fn len_usize(&self) -> Option<usize> {
        self.len.as_ref().and_then(|l| l.to_usize())
    }

    pub fn in_dom(&self, i: &BigUint) -> bool {
        match &self.len {
            Some(l) => i < l,
            None => true,
        }
    }

    fn base(&self, i: &BigUint) -> Option<BigUint> {
        if !self.in_dom(i) {
            return None;
        }
        if let Some(idx) = i.to_usize().filter(|&k| k < self.prefix.len()) {
            return Some(self.prefix[idx].clone());
        }
        self.shift.as_ref().map(|s| i + s)
    }

    fn base_inv(&self, v: &BigUint) -> Option<BigUint> {
        if let Some(s) = &self.shift {
            let lo = self.p() + s;
            if v >= &lo {
                let i = v - s;
                return self.in_dom(&i).then_some(i);
            }
        }
        self.prefix.iter().position(|x| x == v).map(|k| big(k as u64))
    }

    fn pi(&self, v: BigUint) -> BigUint {
        self.perm.get(&v).cloned().unwrap_or(v)
    }

    fn pi_inv(&self, v: &BigUint) -> BigUint {
        self.perm_inv.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    pub fn get(&self, i: &BigUint) -> Option<BigUint> {
        self.base(i).map(|v| self.pi(v))
    }

    pub fn get_u64(&self, i: u64) -> Option<BigUint> {
        self.get(&big(i))
    }

    pub fn inv(&self, v: &BigUint) -> Option<BigUint> {
        self.base_inv(&self.pi_inv(v))
    }

    pub fn in_range(&self, v: &BigUint) -> bool {
        self.inv(v).is_some()
    }

    /// `g↾n`.
    pub fn truncate(&self, n: &BigUint) -> Self {
        let mut out = self.clone();
        let new_len = match &self.len {
            Some(l) if l <= n => l.clone(),
            _ => n.clone(),
        };
        if let Some(k) = new_len.to_usize().filter(|&k| k <= out.prefix.len()) {
            out.prefix.truncate(k);
            out.shift = None;
        }
        out.len = Some(new_len);
        out
    }

    /// The first `n` values, or `None` if `n` exceeds the domain.
    pub fn values_upto(&self, n: usize) -> Option<Vec<BigUint>> {
        (0..n as u64).map(|i| self.get_u64(i)).collect()
    }

    /// The first `n` values as machine integers, `None` if outside the domain or too large.
    pub fn small_values_upto(&self, n: usize) -> Option<Vec<u64>> {
        (0..n as u64).map(|i| self.get_u64(i).and_then(|v| v.to_u64())).collect()
    }

    /// `s ⊑ self` for a finite `s`.
    pub fn extends(&self, s: &Injection) -> bool {
        let Some(n) = s.len() else {
            return self == s;
        };
        if let Some(l) = self.len() {
            if l < n {
                return false;
            }
        }
        match s.len_usize() {
            Some(k) if k <= 1 << 20 => (0..k as u64).all(|i| s.get_u64(i) == self.get_u64(i)),
            // Long finite sequences from this family only arise as truncations.
            _ => self.truncate(n) == *s || s.structurally_prefix_of(self),
        }
    }

    fn structurally_prefix_of(&self, other: &Injection) -> bool {
        let mut a = other.truncate(self.len().expect("finite"));
        a.normalise();
        let mut b = self.clone();
        b.normalise();
        a == b
    }

    fn normalise(&mut self) {
        if self.shift.is_some() {
            if let Some(l) = &self.len {
                if l == &self.p() {
                    self.shift = None;
                }
            }
        }
    }

    fn tail_range(&self) -> Option<(BigUint, Option<BigUint>)> {
        let s = self.shift.as_ref()?;
        let lo = self.p() + s;
        let hi = self.len.as_ref().map(|l| l + s);
        match &hi {
            Some(h) if h <= &lo => None,
            _ => Some((lo, hi)),
        }
    }

    /// max g(i) over `i ∈ [a, b) ∩ dom(g)`.
    pub fn max_image(&self, a: &BigUint, b: &BigUint) -> Option<BigUint> {
        let mut best: Option<BigUint> = None;
        let mut consider = |v: BigUint| {
            if best.as_ref().is_none_or(|x| &v > x) {
                best = Some(v);
            }
        };
        let p = self.p();
        let hi = match &self.len {
            Some(l) if l < b => l.clone(),
            _ => b.clone(),
        };
        // explicit prefix
        let mut i = a.clone();
        while i < hi && i < p {
            let v = self.prefix[i.to_usize().expect("prefix index")].clone();
            consider(self.pi(v));
            i += 1u32;
        }
        // affine tail: base values are the contiguous block [lo+s, hi+s).
        if let Some(s) = &self.shift {
            let lo = if a > &p { a.clone() } else { p.clone() };
            if lo < hi {
                let (vlo, vhi) = (&lo + s, &hi + s);
                if let Some(v) = self.top_value_outside_perm(&vlo, &vhi) {
                    consider(v);
                }
                for (_, to) in self.perm.range(vlo..vhi) {
                    consider(to.clone());
                }
            }
        }
        best
    }

    fn top_value_outside_perm(&self, lo: &BigUint, hi: &BigUint) -> Option<BigUint> {
        let mut v = hi.clone();
        while &v > lo {
            v -= 1u32;
            if !self.perm.contains_key(&v) {
                return Some(v);
            }
        }
        None
    }

    /// max g⁻¹(v) over `v ∈ [a, b) ∩ range(g)`.
    pub fn max_preimage(&self, a: &BigUint, b: &BigUint) -> Option<BigUint> {
        let mut best: Option<BigUint> = None;
        let mut consider = |v: BigUint| {
            if best.as_ref().is_none_or(|x| &v > x) {
                best = Some(v);
            }
        };
        // values moved by π: go through the base preimage of π⁻¹(v).
        for (_, from) in self.perm_inv.range(a.clone()..b.clone()) {
            if let Some(i) = self.base_inv(from) {
                consider(i);
            }
        }
        // values fixed by π: base preimage.
        for (k, v) in self.prefix.iter().enumerate() {
            if v >= a && v < b && !self.perm.contains_key(v) && !self.perm_inv.contains_key(v) {
                consider(big(k as u64));
            }
        }
        if let (Some(s), Some((tlo, thi))) = (&self.shift, self.tail_range()) {
            let lo = if a > &tlo { a.clone() } else { tlo };
            let hi = match thi {
                Some(h) if &h < b => h,
                _ => b.clone(),
            };
            if lo < hi {
                let mut v = hi.clone();
                while v > lo {
                    v -= 1u32;
                    if !self.perm_inv.contains_key(&v) && !self.perm.contains_key(&v) {
                        consider(&v - s);
                        break;
                    }
                }
            }
        }
        best
    }

    /// `[a, b) ⊆ dom(g) ∪ range(g)`.
    pub fn covers(&self, a: &BigUint, b: &BigUint) -> bool {
        let start = match &self.len {
            None => return true,
            Some(l) => {
                if l >= b {
                    return true;
                }
                if l > a {
                    l.clone()
                } else {
                    a.clone()
                }
            }
        };
        // [start, b) must lie in the range.
        let mut gaps: Vec<(BigUint, BigUint)> = Vec::new();
        match self.tail_range() {
            Some((tlo, thi)) => {
                if start < tlo {
                    let e = if &tlo < b { tlo.clone() } else { b.clone() };
                    gaps.push((start.clone(), e));
                }
                if let Some(h) = thi {
                    let s2 = if h > start { h } else { start.clone() };
                    if &s2 < b {
                        gaps.push((s2, b.clone()));
                    }
                }
            }
            None => gaps.push((start.clone(), b.clone())),
        }
        let budget = big((self.prefix.len() + self.perm.len()) as u64);
        let total: BigUint = gaps.iter().map(|(x, y)| y - x).sum();
        if total > budget {
            return false;
        }
        for (x, y) in &gaps {
            let mut v = x.clone();
            while &v < y {
                if !self.in_range(&v) {
                    return false;
                }
                v += 1u32;
            }
        }
        // moved values inside the tail block need their own check
        for v in self.perm_inv.range(start.clone()..b.clone()).map(|(k, _)| k) {
            if !self.in_range(v) {
                return false;
            }
        }
        true
    }

    /// `min { l ∈ [a, b) : l ∉ dom(g) ∨ g(l) ≥ bound }`.
    pub fn first_not_below(&self, a: &BigUint, b: &BigUint, bound: &BigUint) -> Option<BigUint> {
        let p = self.p();
        let mut l = a.clone();
        while &l < b && l < p {
            match self.get(&l) {
                Some(v) if &v < bound => l += 1u32,
                _ => return Some(l),
            }
        }
        if &l >= b {
            return None;
        }
        if !self.in_dom(&l) {
            return Some(l);
        }
        let s = self.shift.as_ref().expect("finite injections end at their prefix");
        let lstart = l;
        let mut best: Option<BigUint> = None;
        let mut consider = |i: BigUint| {
            if best.as_ref().is_none_or(|x| &i < x) {
                best = Some(i);
            }
        };
        if let Some(len) = &self.len {
            if len >= &lstart && len < b {
                consider(len.clone());
            }
        }
        let tail_lo = &p + s;
        for (v, to) in &self.perm {
            if v >= &tail_lo {
                let i = v - s;
                if i >= lstart && &i < b && self.in_dom(&i) && to >= bound {
                    consider(i);
                }
            }
        }
        let mut i = if bound > s { bound - s } else { BigUint::zero() };
        if i < lstart {
            i = lstart;
        }
        while &i < b && self.in_dom(&i) {
            if !self.perm.contains_key(&(&i + s)) {
                consider(i);
                break;
            }
            i += 1u32;
        }
        best
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.prefix.iter().map(|v| v.to_string()).collect();
        if let Some(s) = &self.shift {
            parts.push(format!("+{s}"));
            if let Some(l) = &self.len {
                parts.push(format!("len={l}"));
            }
        }
        for (a, b) in &self.perm {
            parts.push(format!("map={a}>{b}"));
        }
        if parts.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// Grammar: whitespace/comma separated tokens.  Bare numbers form the explicit prefix,
/// `+S` starts the affine tail `i ↦ i + S`, `len=N` bounds the domain, `swap=A,B`
/// post-composes a transposition of values and `map=A>B` sets one entry of the value
/// permutation directly (the form [`Display`](fmt::Display) emits).  `∅` or an empty string is the empty function.
impl FromStr for Injection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut prefix: Vec<BigUint> = Vec::new();
        let mut shift: Option<BigUint> = None;
        let mut len: Option<BigUint> = None;
        let mut swaps: Vec<(BigUint, BigUint)> = Vec::new();
        let mut maps: Vec<(BigUint, BigUint)> = Vec::new();
        let num = |t: &str| -> Result<BigUint> {
            t.parse::<BigUint>().map_err(|_| Error::parse(format!("bad number `{t}` in injection")))
        };
        let cleaned = s.replace(['(', ')'], " ");
        let mut tokens: Vec<&str> = Vec::new();
        for t in cleaned.split_whitespace() {
            if t.starts_with("swap=") || t.starts_with("map=") {
                tokens.push(t);
            } else {
                tokens.extend(t.split(',').filter(|x| !x.is_empty()));
            }
        }
        for t in tokens {
            if t == "∅" {
                continue;
            } else if let Some(rest) = t.strip_prefix('+') {
                shift = Some(num(rest)?);
            } else if let Some(rest) = t.strip_prefix("len=") {
                len = Some(num(rest)?);
            } else if let Some(rest) = t.strip_prefix("swap=") {
                let (a, b) = rest.split_once(',').ok_or_else(|| Error::parse("swap needs A,B"))?;
                swaps.push((num(a)?, num(b)?));
            } else if let Some(rest) = t.strip_prefix("map=") {
                let (a, b) = rest.split_once('>').ok_or_else(|| Error::parse("map needs A>B"))?;
                maps.push((num(a)?, num(b)?));
            } else {
                if shift.is_some() {
                    return Err(Error::parse("explicit values after the affine tail"));
                }
                prefix.push(num(t)?);
            }
        }
        let mut inj = match shift {
            None => {
                if len.is_some() {
                    return Err(Error::parse("len= requires an affine tail"));
                }
                let n = big(prefix.len() as u64);
                Injection::build(prefix, None, Some(n))?
            }
            Some(sh) => Injection::build(prefix, Some(sh), len)?,
        };
        if !maps.is_empty() {
            let keys: BTreeSet<&BigUint> = maps.iter().map(|(a, _)| a).collect();
            let vals: BTreeSet<&BigUint> = maps.iter().map(|(_, b)| b).collect();
            if keys != vals || keys.len() != maps.len() {
                return Err(Error::parse("map= entries must form a permutation"));
            }
            for (a, b) in maps {
                inj.set_perm(a, b);
            }
        }
        for (a, b) in swaps {
            inj = inj.with_value_swap(&a, &b);
        }
        Ok(inj)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn affine_tail_evaluates_and_inverts() {
        let g = Injection::affine(vec![3u64, 0, 1], b(2)).unwrap();
        assert_eq!(g.get_u64(0), Some(b(3)));
        assert_eq!(g.get_u64(3), Some(b(5)));
        assert_eq!(g.inv(&b(5)), Some(b(3)));
        assert_eq!(g.inv(&b(2)), None);
        assert_eq!(g.inv(&b(4)), None);
        assert!(Injection::affine(vec![9u64], b(2)).is_err());
    }

    #[test]
    fn swaps_compose_as_value_permutation() {
        let g = Injection::identity().with_value_swap(&b(21), &b(30));
        assert_eq!(g.get_u64(21), Some(b(30)));
        assert_eq!(g.get_u64(30), Some(b(21)));
        assert_eq!(g.inv(&b(30)), Some(b(21)));
        let h = g.with_value_swap(&b(30), &b(40));
        assert_eq!(h.get_u64(21), Some(b(40)));
        assert_eq!(h.get_u64(40), Some(b(30)));
        assert_eq!(h.get_u64(30), Some(b(21)));
    }

    fn brute_max_image(g: &Injection, a: u64, b_: u64) -> Option<BigUint> {
        (a..b_).filter_map(|i| g.get_u64(i)).max()
    }

    fn brute_max_pre(g: &Injection, a: u64, b_: u64) -> Option<BigUint> {
        (a..b_).filter_map(|v| g.inv(&b(v))).max()
    }

    fn brute_covers(g: &Injection, a: u64, b_: u64) -> bool {
        (a..b_).all(|v| g.in_dom(&b(v)) || g.in_range(&b(v)))
    }

    #[test]
    fn interval_queries_match_brute_force() {
        let gs: Vec<Injection> = vec![
            "3 0 1 +2".parse().unwrap(),
            "5 0 +4 len=9".parse().unwrap(),
            "+0 swap=4,11 swap=2,7".parse().unwrap(),
            "2 1 0 4".parse().unwrap(),
            "1 0 +1 len=6 swap=3,20".parse().unwrap(),
        ];
        for g in &gs {
            for a in 0..15u64 {
                for e in a..25u64 {
                    assert_eq!(g.max_image(&b(a), &b(e)), brute_max_image(g, a, e), "{g} [{a},{e})");
                    assert_eq!(g.max_preimage(&b(a), &b(e)), brute_max_pre(g, a, e), "{g} pre [{a},{e})");
                    assert_eq!(g.covers(&b(a), &b(e)), brute_covers(g, a, e), "{g} covers [{a},{e})");
                    for bound in [0u64, 3, 8, 30] {
                        let brute = (a..e).find(|&l| match g.get_u64(l) {
                            Some(v) => v >= b(bound),
                            None => true,
                        });
                        assert_eq!(g.first_not_below(&b(a), &b(e), &b(bound)), brute.map(b));
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_and_extension() {
        let g: Injection = "3 0 1 +2".parse().unwrap();
        let t = g.truncate(&b(5));
        assert_eq!(t.len(), Some(&b(5)));
        assert_eq!(t.get_u64(4), Some(b(6)));
        assert_eq!(t.get_u64(5), None);
        assert!(g.extends(&t));
        assert!(g.extends(&Injection::finite(vec![3u64, 0]).unwrap()));
        assert!(!g.extends(&Injection::finite(vec![3u64, 1]).unwrap()));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3 0 1 +2", "∅", "4 2", "+5 len=20", "+0 swap=4,11"] {
            let g: Injection = s.parse().unwrap();
            let again: Injection = g.to_string().parse().unwrap();
            for i in 0..30u64 {
                assert_eq!(g.get_u64(i), again.get_u64(i), "{s}");
            }
        }
    }
}
