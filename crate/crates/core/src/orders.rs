//! `δ(f, m)` and the relations `<ᶠ₀`, `<ᶠ₁`.

use num_bigint::BigUint;

use crate::error::Result;
use crate::inj::Injection;
use crate::sparse::{factor_f, in_d, unrank_injseq};
use crate::tower::Tower;
use crate::words::Word;

#[derive(Debug, Clone, Copy)]
pub struct OrderContext<'a> {
    pub tower: &'a Tower,
    pub f: &'a Injection,
}

impl<'a> OrderContext<'a> {
    pub fn new(tower: &'a Tower, f: &'a Injection) -> Self {
        OrderContext { tower, f }
    }

    /// `δ(f, m) = δ_n(m, f(m))`.
    pub fn delta(&self, m: &BigUint) -> Result<Option<Word>> {
        let Some(v) = self.f.get(m) else { return Ok(None) };
        let n = self.tower.interval_of(m)?;
        let Ok(nv) = self.tower.interval_of(&v) else { return Ok(None) };
        if n != nv {
            return Ok(None);
        }
        self.tower.delta_n(m, &v)
    }

    /// `m <ᶠ₀ m2`, restricting between the interval levels of the two points.
    pub fn less0(&self, m: &BigUint, m2: &BigUint) -> Result<bool> {
        if m >= m2 || !self.f.in_dom(m2) {
            return Ok(false);
        }
        let (Some(d), Some(d2)) = (self.delta(m)?, self.delta(m2)?) else { return Ok(false) };
        Ok(d2.restrict(d.level())? == d)
    }

    /// `m <ᶠ₁ m2`.
    pub fn less1(&self, m: &BigUint, m2: &BigUint) -> Result<bool> {
        Ok(self.less1_witness(m, m2)?.is_some())
    }

    pub fn less1_witness(&self, m: &BigUint, m2: &BigUint) -> Result<Option<Injection>> {
        if m >= m2 {
            return Ok(None);
        }
        let (Some(v), Some(v2)) = (self.f.get(m), self.f.get(m2)) else { return Ok(None) };
        if v >= v2 {
            return Ok(None);
        }
        common_d_witness(self.tower, &v, &v2)
    }
}

/// The g-prefix an anchor interval index encodes: `2^a · 3^b ↦ #⁻¹(a)`.
pub fn prefix_of_level(level: usize) -> Option<Vec<u64>> {
    let (a, _) = factor_f(&BigUint::from(level))?;
    let s = unrank_injseq(&BigUint::from(a)).ok()?;
    (!s.is_empty()).then_some(s)
}

/// `s` followed by the unused values in increasing order, then the identity.
pub fn canonical_completion(s: &[u64]) -> Injection {
    let k = s.iter().max().map_or(0, |m| m + 1).max(s.len() as u64);
    let mut vals: Vec<u64> = s.to_vec();
    vals.extend((0..k).filter(|v| !s.contains(v)));
    Injection::affine(vals, BigUint::from(0u32)).expect("a permutation of [0, k)")
}

/// A finite `g` with `{p, p2} ⊆ D(g)`, searched among canonical completions of the
/// prefixes the two interval indices encode.
pub fn common_d_witness(t: &Tower, p: &BigUint, p2: &BigUint) -> Result<Option<Injection>> {
    let (n1, n2) = (t.interval_of(p)?, t.interval_of(p2)?);
    let (Some(s1), Some(s2)) = (prefix_of_level(n1), prefix_of_level(n2)) else { return Ok(None) };
    let long = if s1.len() >= s2.len() { &s1 } else { &s2 };
    let short = if s1.len() >= s2.len() { &s2 } else { &s1 };
    if long[..short.len()] != short[..] {
        return Ok(None);
    }
    let end = t.end(n1.max(n2))?;
    let g = canonical_completion(long).truncate(&end);
    let ok = in_d(t, &g, p)? && in_d(t, &g, p2)?;
    Ok(ok.then_some(g))
}

/// Checks irreflexivity, asymmetry and transitivity of a relation on `points`.
pub fn check_strict_order(points: &[BigUint], rel: impl Fn(&BigUint, &BigUint) -> Result<bool>) -> Result<Option<String>> {
    let n = points.len();
    let mut table = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = rel(&points[i], &points[j])?;
        }
    }
    for i in 0..n {
        if table[i][i] {
            return Ok(Some(format!("reflexive at {}", points[i])));
        }
        for j in 0..n {
            if table[i][j] && table[j][i] {
                return Ok(Some(format!("symmetric pair {} {}", points[i], points[j])));
            }
            for k in 0..n {
                if table[i][j] && table[j][k] && !table[i][k] {
                    return Ok(Some(format!("intransitive {} {} {}", points[i], points[j], points[k])));
                }
            }
        }
    }
    Ok(None)
}

/// Small helper for tests and reports.
pub fn to_points(v: &[u64]) -> Vec<BigUint> {
    v.iter().map(|&x| BigUint::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::d_upto;
    use crate::words::{OmegaWord, Sign};

    /// `f` realizing `e(w)` on `[0, len)`.
    fn f_of_word(t: &Tower, w: &OmegaWord, len: u64) -> Injection {
        let vals: Vec<BigUint> = (0..len).map(|p| t.eval_e(w, &BigUint::from(p)).unwrap()).collect();
        Injection::finite(vals).unwrap()
    }

    #[test]
    fn delta_basics() {
        let t = Tower::scaled();
        let id = Injection::identity();
        let ctx = OrderContext::new(&t, &id);
        for m in 0u32..7 {
            assert_eq!(ctx.delta(&BigUint::from(m)).unwrap(), Some(Word::empty(0)));
        }
        let cross = Injection::finite(vec![7u64]).unwrap();
        assert_eq!(OrderContext::new(&t, &cross).delta(&BigUint::from(0u32)).unwrap(), None);
        let w = OmegaWord::single(t.config.alphabet[1].clone(), Sign::Pos);
        let f = f_of_word(&t, &w, 49);
        let ctx = OrderContext::new(&t, &f);
        assert_eq!(ctx.delta(&BigUint::from(9u32)).unwrap(), Some(w.restrict(1)));
    }

    #[test]
    fn less0_examples() {
        let t = Tower::scaled();
        let w = OmegaWord::single(t.config.alphabet[0].clone(), Sign::Neg);
        let f = f_of_word(&t, &w, 105);
        let ctx = OrderContext::new(&t, &f);
        let (a, b) = (BigUint::from(10u32), BigUint::from(30u32));
        assert!(!ctx.less0(&a, &a).unwrap());
        assert!(ctx.less0(&a, &b).unwrap());
        // r_0 of a generator is the generator of F(1), never the W_0 element ∅
        assert!(!ctx.less0(&BigUint::from(3u32), &b).unwrap());
        assert!(!ctx.less0(&b, &a).unwrap());
        assert!(!ctx.less0(&a, &BigUint::from(500u32)).unwrap());
    }

    #[test]
    fn less1_examples() {
        let t = Tower::scaled();
        let g = canonical_completion(&[0, 1]);
        let d = d_upto(&t, &g, 100).unwrap();
        assert_eq!(d.len(), 2);
        // f sends 0 and 1 to the two anchors
        let f = Injection::finite(vec![d[0].clone(), d[1].clone()]).unwrap();
        let ctx = OrderContext::new(&t, &f);
        let (z, o) = (BigUint::from(0u32), BigUint::from(1u32));
        assert!(ctx.less1(&z, &o).unwrap());
        assert!(!ctx.less1(&z, &z).unwrap());
        assert!(!ctx.less1(&o, &z).unwrap());
        assert!(!ctx.less1(&z, &BigUint::from(2u32)).unwrap());
        let w = ctx.less1_witness(&z, &o).unwrap().unwrap();
        assert!(w.is_finite());
    }

    #[test]
    fn strict_order_checker_finds_cycles() {
        let pts = to_points(&[0, 1, 2]);
        let bad = check_strict_order(&pts, |a, b| Ok(a != b)).unwrap();
        assert!(bad.is_some());
        assert!(check_strict_order(&pts, |a, b| Ok(a < b)).unwrap().is_none());
    }
}
