//! The bijection `#`, the injection `F`, the anchors `ϑ_g`, and the sets `D(g)` and `B₀`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::coding::{BitSeq, BitStream};
use crate::error::{Error, Result};
use crate::inj::Injection;
use crate::tower::Tower;
use crate::words::{SeedTriple, Sign};

/// Grades above this have `#` far beyond any interval cap.
const MAX_GRADE: u64 = 24;

fn falling(a: u64, r: u64) -> BigUint {
    if r > a {
        return BigUint::zero();
    }
    (a - r + 1..=a).fold(BigUint::one(), |acc, x| acc * x)
}

/// Completions of length `r` from `a` remaining values (the top value among them) that
/// avoid the top value.
fn falling_without_top(a: u64, r: u64) -> BigUint {
    if a == 0 {
        return if r == 0 { BigUint::one() } else { BigUint::zero() };
    }
    falling(a - 1, r)
}

/// Number of injective sequences of grade at most `g`.
fn upto_grade(g: u64) -> BigUint {
    (0..=g).map(|j| falling(g, j)).sum()
}

fn count_in_grade_len(g: u64, j: u64) -> BigUint {
    if j == g {
        falling(g, g)
    } else {
        falling(g, j) - falling(g - 1, j)
    }
}

pub fn grade(s: &[u64]) -> u64 {
    let m = s.iter().max().map_or(0, |&m| m + 1);
    m.max(s.len() as u64)
}

fn check_injective(s: &[u64]) -> Result<()> {
    let mut v = s.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("sequence is not injective"));
    }
    Ok(())
}

/// Completions counted at position `i` of a length-`len` sequence in grade `g`.
fn completions(g: u64, len: u64, i: u64, has_top: bool) -> BigUint {
    let a = g - i - 1;
    let r = len - i - 1;
    if has_top || len == g {
        falling(a, r)
    } else {
        falling(a, r) - falling_without_top(a, r)
    }
}

/// `#(s)`: graded by `max(lh, 1 + max)`, shortlex inside a grade.
pub fn rank_injseq(s: &[u64]) -> Result<BigUint> {
    check_injective(s)?;
    if s.is_empty() {
        return Ok(BigUint::zero());
    }
    let g = grade(s);
    let len = s.len() as u64;
    let mut r = upto_grade(g - 1);
    for j in 1..len {
        r += count_in_grade_len(g, j);
    }
    let mut used = vec![false; g as usize];
    let mut has_top = false;
    for (i, &x) in s.iter().enumerate() {
        for v in 0..x {
            if !used[v as usize] {
                r += completions(g, len, i as u64, has_top || v == g - 1);
            }
        }
        used[x as usize] = true;
        has_top |= x == g - 1;
    }
    Ok(r)
}

/// `#⁻¹`.
pub fn unrank_injseq(r: &BigUint) -> Result<Vec<u64>> {
    if r.is_zero() {
        return Ok(Vec::new());
    }
    let mut g = 1u64;
    while upto_grade(g) <= *r {
        g += 1;
        if g > 64 {
            return Err(Error::capacity("rank too large to unrank"));
        }
    }
    let mut rem = r - upto_grade(g - 1);
    let mut len = 1u64;
    loop {
        let c = count_in_grade_len(g, len);
        if rem < c {
            break;
        }
        rem -= c;
        len += 1;
    }
    let mut used = vec![false; g as usize];
    let mut has_top = false;
    let mut out = Vec::with_capacity(len as usize);
    for i in 0..len {
        for v in 0..g {
            if used[v as usize] {
                continue;
            }
            let c = completions(g, len, i, has_top || v == g - 1);
            if rem < c {
                out.push(v);
                used[v as usize] = true;
                has_top |= v == g - 1;
                break;
            }
            rem -= c;
        }
    }
    Ok(out)
}

/// `F(s, k) = 2^{#s} · 3^k`.
pub fn f_value(s: &[u64], k: u64) -> Result<BigUint> {
    let r = rank_injseq(s)?;
    let e = r.to_u64().ok_or_else(|| Error::capacity("2^#(s) is too large"))?;
    Ok((BigUint::one() << e) * BigUint::from(3u32).pow(k as u32))
}

/// `F(s, k)` if it is at most `cap`.
pub fn f_level(s: &[u64], k: u64, cap: usize) -> Result<Option<usize>> {
    if grade(s) > MAX_GRADE {
        return Ok(None);
    }
    let r = rank_injseq(s)?;
    match r.to_u32() {
        Some(e) if e < usize::BITS => {
            let v = (BigUint::one() << e) * BigUint::from(3u32).pow(k.min(64) as u32);
            Ok(v.to_usize().filter(|&x| x <= cap))
        }
        _ => Ok(None),
    }
}

/// `m = 2^a · 3^b`, if it has that form.
pub fn factor_f(m: &BigUint) -> Option<(u64, u64)> {
    if m.is_zero() {
        return None;
    }
    let a = m.trailing_zeros().unwrap_or(0);
    let mut rest = m >> a;
    let three = BigUint::from(3u32);
    let mut b = 0u64;
    while !rest.is_one() {
        if (&rest % &three).is_zero() {
            rest /= &three;
            b += 1;
        } else {
            return None;
        }
    }
    Some((a, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    /// The argument `n` of `ϑ_g`.
    pub n: usize,
    pub xi: u64,
    /// `F(g↾(n+1), ξ_g(n))`, the interval holding the anchor.
    pub level: usize,
    pub point: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThetaStop {
    /// `ϑ_g` is undefined from here on.
    Undefined(&'static str),
    /// The next anchor lies beyond the requested level.
    Beyond,
    /// The next anchor lies beyond the caps.
    Capacity(String),
}

#[derive(Clone, Debug)]
pub struct ThetaState {
    pub anchors: Vec<Anchor>,
    pub stop: ThetaStop,
}

impl ThetaState {
    pub fn points(&self) -> impl Iterator<Item = &BigUint> {
        self.anchors.iter().map(|a| &a.point)
    }

    pub fn get(&self, n: usize) -> Result<Option<&BigUint>> {
        if let Some(a) = self.anchors.get(n) {
            return Ok(Some(&a.point));
        }
        match &self.stop {
            ThetaStop::Undefined(_) => Ok(None),
            ThetaStop::Beyond => Err(Error::capacity("anchor beyond the requested level")),
            ThetaStop::Capacity(m) => Err(Error::capacity(m.clone())),
        }
    }
}

fn finite_len_below(g: &Injection, bound: &BigUint) -> bool {
    g.len().is_some_and(|l| l < bound)
}

/// Anchors `ϑ_g(0), ϑ_g(1), …` in intervals up to `upto_level`.
pub fn theta_state(t: &Tower, g: &Injection, upto_level: usize) -> Result<ThetaState> {
    let mut anchors: Vec<Anchor> = Vec::new();
    let stop = loop {
        let n = anchors.len();
        if let Some(prev) = anchors.last() {
            let lv = t.level(prev.level)?;
            if !g.covers(&lv.start, &lv.end()) {
                break ThetaStop::Undefined("continuation");
            }
        }
        if !g.in_dom(&BigUint::from(n)) {
            break ThetaStop::Undefined("domain shorter than n+1");
        }
        let Some(prefix) = g.small_values_upto(n + 1) else {
            break ThetaStop::Capacity("prefix values too large for #".into());
        };
        let mut bound: Option<BigUint> = None;
        for a in &anchors {
            let lv = t.level(a.level)?;
            let (lo, hi) = (lv.start.clone(), lv.end());
            let mut cands = vec![&hi - 1u32];
            cands.extend(g.max_image(&lo, &hi));
            cands.extend(g.max_preimage(&lo, &hi));
            let m = cands.into_iter().max().expect("nonempty");
            if bound.as_ref().is_none_or(|b| &m > b) {
                bound = Some(m);
            }
        }
        let mut xi = 0u64;
        let level = loop {
            match f_level(&prefix, xi, t.max_level())? {
                None => break None,
                Some(lvl) => {
                    let ok = match &bound {
                        None => true,
                        Some(b) => t.start(lvl)? > *b,
                    };
                    if ok {
                        break Some(lvl);
                    }
                }
            }
            xi += 1;
        };
        let Some(level) = level else {
            // F exceeds the cap; m_{F+1} > F, so short finite g fail the guard outright
            let cap = BigUint::from(t.max_level());
            if finite_len_below(g, &cap) {
                break ThetaStop::Undefined("domain guard");
            }
            break ThetaStop::Capacity(format!("F(g↾{}, ξ) beyond interval cap", n + 1));
        };
        if level > upto_level {
            break ThetaStop::Beyond;
        }
        let lv = t.level(level)?;
        let end = lv.end();
        if finite_len_below(g, &end) {
            break ThetaStop::Undefined("domain guard");
        }
        let point = g
            .first_not_below(&lv.start, &end, &lv.start)
            .ok_or_else(|| Error::domain("anchor interval maps entirely below itself"))?;
        anchors.push(Anchor { n, xi, level, point });
    };
    Ok(ThetaState { anchors, stop })
}

/// `ϑ_g(n)`; `None` when undefined.
pub fn theta(t: &Tower, g: &Injection, n: usize) -> Result<Option<BigUint>> {
    let st = theta_state(t, g, t.max_level())?;
    st.get(n).map(|v| v.cloned())
}

/// `p ∈ D(g)`.
pub fn in_d(t: &Tower, g: &Injection, p: &BigUint) -> Result<bool> {
    let m = t.interval_of(p)?;
    let st = theta_state(t, g, m)?;
    Ok(g.in_dom(p) && st.anchors.iter().any(|a| a.level == m && &a.point == p))
}

/// `D(g)` inside the intervals up to `upto_level`.
pub fn d_upto(t: &Tower, g: &Injection, upto_level: usize) -> Result<Vec<BigUint>> {
    let st = theta_state(t, g, upto_level)?;
    Ok(st.anchors.into_iter().map(|a| a.point).filter(|p| g.in_dom(p)).collect())
}

fn as_stream(c: &BitSeq) -> BitStream {
    match c {
        BitSeq::Finite(b) => BitStream::EventuallyZero(b.clone()),
        BitSeq::Infinite(s) => s.clone(),
    }
}

/// The seed `(χ(g), c⁰, c¹)`, finite sequences padded by zeros.
pub fn chi_seed(g: &Injection, c0: &BitSeq, c1: &BitSeq) -> SeedTriple {
    SeedTriple::new(BitStream::chi_of(g.clone()), as_stream(c0), as_stream(c1))
}

fn check_b0_lengths(g: &Injection, c0: &BitSeq, c1: &BitSeq) -> Result<()> {
    if c0.len() != c1.len() {
        return Err(Error::domain("B₀ needs lh(c⁰) = lh(c¹)"));
    }
    if let Some(l) = c0.len() {
        match g.len() {
            Some(gl) if gl <= &BigUint::from(l) => {}
            _ => return Err(Error::domain("B₀ needs lh(g) ≤ lh(c⁰)")),
        }
    }
    Ok(())
}

/// Whether anchor argument `a` is picked: `a = ĉ⁰(j)` with `c¹(j) = 1`.
fn picked(c0: &BitSeq, c1: &BitSeq, a: usize) -> bool {
    if c0.bit(a) != Some(true) {
        return false;
    }
    let j = (0..a).filter(|&i| c0.bit(i) == Some(true)).count();
    c1.bit(j) == Some(true)
}

/// A member of `B₀` together with the anchor it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct B0Member {
    pub anchor: Anchor,
}

/// `B₀` inside the intervals up to `upto_level`, with `e(g, ·, ·)` read as `e(χ(g), ·, ·)`.
pub fn b0_upto(t: &Tower, g: &Injection, c0: &BitSeq, c1: &BitSeq, upto_level: usize) -> Result<Vec<B0Member>> {
    check_b0_lengths(g, c0, c1)?;
    let st = theta_state(t, g, upto_level)?;
    let seed = chi_seed(g, c0, c1);
    let mut out = Vec::new();
    for a in st.anchors {
        if !picked(c0, c1, a.n) || !g.in_dom(&a.point) {
            continue;
        }
        let gv = g.get(&a.point).expect("anchor in domain");
        if gv != t.eval_seed(&seed, Sign::Pos, &a.point)? {
            out.push(B0Member { anchor: a });
        }
    }
    Ok(out)
}

/// `p ∈ B₀(g, c⁰, c¹)`.
pub fn in_b0(t: &Tower, g: &Injection, c0: &BitSeq, c1: &BitSeq, p: &BigUint) -> Result<bool> {
    let m = t.interval_of(p)?;
    Ok(b0_upto(t, g, c0, c1, m)?.iter().any(|b| &b.anchor.point == p))
}

/// `g`-spacedness of a finite set.
pub fn is_spaced(t: &Tower, g: &Injection, points: &[BigUint]) -> Result<bool> {
    let mut zones: Vec<Vec<usize>> = Vec::with_capacity(points.len());
    for n in points {
        let mut z = vec![t.interval_of(n)?];
        if let Some(v) = g.get(n) {
            z.push(t.interval_of(&v)?);
        }
        if let Some(v) = g.inv(n) {
            z.push(t.interval_of(&v)?);
        }
        zones.push(z);
    }
    for (i, n) in points.iter().enumerate() {
        for (j, n2) in points.iter().enumerate() {
            if i == j || n == n2 {
                continue;
            }
            let own = t.interval_of(n2)?;
            if zones[i].contains(&own) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::Bits;
    use proptest::prelude::*;

    fn brute_list(max_grade: u64) -> Vec<Vec<u64>> {
        let mut all: Vec<Vec<u64>> = vec![Vec::new()];
        let mut layer: Vec<Vec<u64>> = vec![Vec::new()];
        for _ in 0..max_grade {
            let mut next = Vec::new();
            for s in &layer {
                for v in 0..max_grade {
                    if !s.contains(&v) {
                        let mut t = s.clone();
                        t.push(v);
                        next.push(t);
                    }
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all.sort_by(|a, b| (grade(a), a.len(), a).cmp(&(grade(b), b.len(), b)));
        all
    }

    #[test]
    fn rank_examples() {
        let cases: &[(&[u64], u32)] =
            &[(&[], 0), (&[0], 1), (&[1], 2), (&[0, 1], 3), (&[1, 0], 4), (&[2], 5), (&[0, 2], 6), (&[0, 1, 2], 10), (&[3], 16), (&[0, 1, 2, 3], 41)];
        for (s, r) in cases {
            assert_eq!(rank_injseq(s).unwrap(), BigUint::from(*r), "{s:?}");
        }
        assert!(rank_injseq(&[1, 1]).is_err());
    }

    #[test]
    fn rank_matches_sorted_enumeration() {
        let list = brute_list(5);
        for (i, s) in list.iter().enumerate() {
            assert_eq!(rank_injseq(s).unwrap(), BigUint::from(i), "{s:?}");
            assert_eq!(&unrank_injseq(&BigUint::from(i)).unwrap(), s);
        }
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_value(&[], 0).unwrap(), BigUint::one());
        assert_eq!(f_value(&[], 1).unwrap(), BigUint::from(3u32));
        assert_eq!(f_value(&[0, 1], 2).unwrap(), BigUint::from(72u32));
        assert_eq!(factor_f(&BigUint::from(72u32)), Some((3, 2)));
        assert_eq!(factor_f(&BigUint::from(10u32)), None);
    }

    proptest! {
        #[test]
        fn rank_round_trip(v in proptest::collection::btree_set(0u64..12, 0..8), perm_seed in any::<u64>()) {
            let mut s: Vec<u64> = v.into_iter().collect();
            let n = s.len();
            for i in (1..n).rev() {
                s.swap(i, (perm_seed as usize).wrapping_mul(i + 7) % (i + 1));
            }
            let r = rank_injseq(&s).unwrap();
            prop_assert_eq!(unrank_injseq(&r).unwrap(), s);
        }
    }

    /// The displayed set difference, materialized.
    fn theta_brute(t: &Tower, g: &Injection, level: usize) -> BigUint {
        let lv = t.level(level).unwrap();
        let mut l = lv.start.clone();
        loop {
            match g.get(&l) {
                Some(v) if t.interval_of(&v).unwrap() < level => l += 1u32,
                _ => return l,
            }
        }
    }

    fn near_identity(len: usize, swaps: &[(u64, u64)]) -> Injection {
        let mut v: Vec<u64> = (0..len as u64).collect();
        for &(a, b) in swaps {
            v.swap(a as usize, b as usize);
        }
        Injection::finite(v).unwrap()
    }

    #[test]
    fn theta_undefined_cases() {
        let t = Tower::scaled();
        assert_eq!(theta(&t, &Injection::empty(), 0).unwrap(), None);
        let short = Injection::finite(vec![0u64, 1, 2]).unwrap();
        assert_eq!(theta(&t, &short, 0).unwrap(), None);
    }

    #[test]
    fn theta_matches_brute_force() {
        let t = Tower::scaled();
        // I_2 = [21, 49): send its first points below 21
        let g = near_identity(3600, &[(21, 3), (22, 5), (23, 40)]);
        let st = theta_state(&t, &g, t.max_level()).unwrap();
        assert_eq!(st.anchors[0].level, 2);
        for a in &st.anchors {
            assert_eq!(a.point, theta_brute(&t, &g, a.level));
        }
        assert_eq!(st.anchors[0].point, BigUint::from(23u32));
        assert_eq!(st.anchors.len(), 2);
        assert!(matches!(st.stop, ThetaStop::Undefined(_)));
    }

    #[test]
    fn d_and_b0() {
        let t = Tower::scaled();
        let g = Injection::affine(vec![0u64, 1, 2], BigUint::zero()).unwrap();
        let d = d_upto(&t, &g, 2000).unwrap();
        assert_eq!(d.len(), 3);
        for p in &d {
            assert!(in_d(&t, &g, p).unwrap());
            assert!(!in_d(&t, &g, &(p + 1u32)).unwrap());
        }
        assert!(is_spaced(&t, &g, &d).unwrap());
        let zero = BitSeq::Infinite(BitStream::zeros());
        let ones = BitSeq::Infinite("periodic: / 1".parse().unwrap());
        assert!(b0_upto(&t, &g, &ones, &zero, 2000).unwrap().is_empty());
        // g is the identity and e(χ(g), c⁰, c¹) moves the anchors
        let b0 = b0_upto(&t, &g, &ones, &ones, 2000).unwrap();
        assert!(b0.iter().all(|b| d.contains(&b.anchor.point)));
        assert!(!b0.is_empty());
        let fin = BitSeq::Finite(Bits::from_str01("11").unwrap());
        assert!(b0_upto(&t, &g, &fin, &fin, 10).is_err());
    }

    #[test]
    fn spacedness_basics() {
        let t = Tower::scaled();
        let g = Injection::identity();
        assert!(is_spaced(&t, &g, &[BigUint::from(50u32)]).unwrap());
        assert!(!is_spaced(&t, &g, &[BigUint::from(50u32), BigUint::from(51u32)]).unwrap());
    }
}
