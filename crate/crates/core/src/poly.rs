//! Sparse multivariate polynomials over a [`Coefficient`] ring.

use std::cmp::Ordering;
use std::fmt;

use dashu_int::IBig;
use dashu_ratio::RBig;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Coefficient;

const LANES: usize = 4;
const LANE_BITS: u32 = 16;
const LANE_MASK: u64 = 0xFFFF;

/// Exponent vector packed as 16-bit lanes, four per word.
///
/// Addition of packed words is lane-wise as long as no lane overflows, which
/// callers guarantee by checking total degrees beforehand.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    words: SmallVec<[u64; 2]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            words: SmallVec::from_elem(0, nvars.div_ceil(LANES).max(1)),
        }
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Self> {
        let degree: u64 = exps.iter().map(|&e| e as u64).sum();
        if degree > u16::MAX as u64 {
            return Err(Error::ExponentOverflow { degree });
        }
        let mut m = Monomial::one(exps.len());
        for (i, &e) in exps.iter().enumerate() {
            m.words[i / LANES] |= (e as u64) << (LANE_BITS * (i % LANES) as u32);
        }
        Ok(m)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        ((self.words[i / LANES] >> (LANE_BITS * (i % LANES) as u32)) & LANE_MASK) as u32
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.words
            .iter()
            .map(|w| {
                (w & LANE_MASK) + ((w >> 16) & LANE_MASK) + ((w >> 32) & LANE_MASK) + (w >> 48)
            })
            .sum::<u64>() as u32
    }

    /// Lane-wise sum; the caller ensures the combined degree fits in 16 bits.
    fn add_unchecked(&self, other: &Self) -> Self {
        Monomial {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Graded-lex order: lower degree first, then larger leading exponents first.
    pub fn grlex_cmp(&self, other: &Self, nvars: usize) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for i in 0..nvars {
                match other.exponent(i).cmp(&self.exponent(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

/// Sparse polynomial in `nvars` variables.
///
/// Invariant: no stored coefficient is zero.
#[derive(Clone, Debug)]
pub struct MultiPoly<C> {
    nvars: usize,
    terms: FxHashMap<Monomial, C>,
}

impl<C: Coefficient> PartialEq for MultiPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl<C: Coefficient> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: FxHashMap::default(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self::monomial(&exps, C::one()).expect("degree 1")
    }

    pub fn monomial(exps: &[u32], c: C) -> Result<Self> {
        let mut p = Self::zero(exps.len());
        if !c.is_zero() {
            p.terms.insert(Monomial::from_exponents(exps)?, c);
        }
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: exps.len(),
                });
            }
            p.add_term(Monomial::from_exponents(&exps)?, &c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let v = e.get().add_ref(c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree; 0 for the zero polynomial (see [`Self::is_zero`]).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        Monomial::from_exponents(exps)
            .ok()
            .and_then(|m| self.terms.get(&m).cloned())
            .unwrap_or_else(C::zero)
    }

    /// Unordered term iterator, for hot paths that do not need determinism.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// Terms in graded-lex order.
    pub fn sorted_terms(&self) -> Vec<(Vec<u32>, &C)> {
        let mut v: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.grlex_cmp(b.0, self.nvars));
        v.into_iter()
            .map(|(m, c)| (m.exponents(self.nvars), c))
            .collect()
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &c.neg_ref());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg_ref())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = self.map_coeffs(|c| c.mul_ref(s));
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let degree = self.degree() as u64 + other.degree() as u64;
        if degree > u16::MAX as u64 {
            return Err(Error::ExponentOverflow { degree });
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut terms: FxHashMap<Monomial, C> = FxHashMap::default();
        terms.reserve(self.len().saturating_mul(other.len()).min(1 << 20));
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                terms
                    .entry(ma.add_unchecked(mb))
                    .or_insert_with(C::zero)
                    .add_mul_assign(ca, cb);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(MultiPoly {
            nvars: self.nvars,
            terms,
        })
    }

    /// `self^k`; repeated squaring for `k > 3`, iterated products below.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let degree = self.degree() as u64 * k as u64;
        if degree > u16::MAX as u64 {
            return Err(Error::ExponentOverflow { degree });
        }
        if k <= 3 {
            let mut acc = Self::one(self.nvars);
            for _ in 0..k {
                acc = acc.checked_mul(self)?;
            }
            return Ok(acc);
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.checked_mul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.checked_mul(&base)?;
        }
        Ok(result.unwrap_or_else(|| Self::one(self.nvars)))
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the length check; `point.len()` must equal `nvars`.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e != 0 {
                    t *= x.powi(e as i32);
                }
            }
            s += t;
        }
        s
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut terms = FxHashMap::default();
        for (m, c) in &self.terms {
            let d = f(c);
            if !d.is_zero() {
                terms.insert(m.clone(), d);
            }
        }
        MultiPoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn to_f64(&self) -> MultiPoly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Substitutes `x_i -> s * x_i` for every variable.
    pub fn substitute_scaled(&self, s: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            for _ in 0..m.degree() {
                coef = coef.mul_ref(s);
            }
            out.add_term(m.clone(), &coef);
        }
        out
    }
}

impl MultiPoly<RBig> {
    /// Splits `p = scale * P` with `P` integer and primitive and `scale > 0`.
    ///
    /// The zero polynomial yields `(0, 1)`.
    pub fn integer_part(&self) -> (MultiPoly<IBig>, RBig) {
        use dashu_base::{Gcd, UnsignedAbs};
        use dashu_int::UBig;
        if self.is_zero() {
            return (MultiPoly::zero(self.nvars), RBig::ONE);
        }
        let mut lcm = UBig::ONE;
        let mut gcd = UBig::ZERO;
        for c in self.terms.values() {
            let d = c.denominator();
            let g = (&lcm).gcd(d);
            lcm = &lcm / &g * d;
        }
        for c in self.terms.values() {
            let scaled = c.numerator() * IBig::from(&lcm / c.denominator());
            gcd = (&gcd).gcd(scaled.unsigned_abs());
        }
        let ints = self.map_coeffs(|c| {
            c.numerator() * IBig::from(&lcm / c.denominator()) / IBig::from(gcd.clone())
        });
        let scale = RBig::from_parts(IBig::from(gcd), lcm);
        (ints, scale)
    }
}

impl<C: Coefficient> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (exps, c)) in self.sorted_terms().into_iter().enumerate() {
            let (neg, mag) = if c.is_negative() {
                (true, c.neg_ref())
            } else {
                (false, c.clone())
            };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", mag.fmt_coef())?;
            } else {
                write!(f, "{} * {}", mag.fmt_coef(), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Builds an exact polynomial from integer-coefficient terms; convenient in tests.
pub fn rpoly(nvars: usize, terms: &[(i64, &[u32])]) -> MultiPoly<RBig> {
    MultiPoly::from_terms(
        nvars,
        terms.iter().map(|(c, e)| (e.to_vec(), RBig::from(*c))),
    )
    .expect("valid terms")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(terms: &[(i64, &[u32])]) -> MultiPoly<RBig> {
        rpoly(2, terms)
    }

    #[test]
    fn add_examples() {
        let a = p(&[(1, &[1, 0]), (1, &[0, 0])]);
        let b = p(&[(-1, &[1, 0])]);
        assert_eq!(a.checked_add(&b).unwrap(), p(&[(1, &[0, 0])]));
        assert_eq!(a.checked_add(&MultiPoly::zero(2)).unwrap(), a);
        let sq = p(&[(1, &[2, 0])]);
        assert_eq!(sq.checked_add(&sq).unwrap(), p(&[(2, &[2, 0])]));
    }

    #[test]
    fn mul_examples() {
        let a = p(&[(1, &[1, 0]), (1, &[0, 1])]);
        let b = p(&[(1, &[1, 0]), (-1, &[0, 1])]);
        assert_eq!(
            a.checked_mul(&b).unwrap(),
            p(&[(1, &[2, 0]), (-1, &[0, 2])])
        );
        assert_eq!(a.checked_mul(&MultiPoly::one(2)).unwrap(), a);
        let m = p(&[(1, &[2, 2])]);
        assert_eq!(m.checked_mul(&m).unwrap(), p(&[(1, &[4, 4])]));
    }

    #[test]
    fn pow_examples() {
        let a = p(&[(1, &[1, 0]), (1, &[0, 1])]);
        assert_eq!(a.pow(0).unwrap(), MultiPoly::one(2));
        assert_eq!(
            a.pow(2).unwrap(),
            p(&[(1, &[2, 0]), (2, &[1, 1]), (1, &[0, 2])])
        );
        let m = p(&[(1, &[2, 2])]);
        assert_eq!(m.pow(3).unwrap(), p(&[(1, &[6, 6])]));
    }

    #[test]
    fn eval_examples() {
        let a = p(&[(1, &[2, 0]), (1, &[0, 2])]);
        assert_eq!(a.eval(&[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(p(&[(5, &[0, 0])]).eval(&[0.3, -7.0]).unwrap(), 5.0);
        let q = p(&[(1, &[4, 0]), (1, &[0, 4])]);
        assert_eq!(q.eval(&[0.5, 0.5]).unwrap(), 0.125);
        assert!(q.eval(&[0.5]).is_err());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(p(&[(1, &[2, 2])]).degree(), 4);
        assert_eq!(p(&[(1, &[0, 0])]).degree(), 0);
        assert_eq!(p(&[(1, &[4, 0]), (1, &[0, 1])]).degree(), 4);
        let z = MultiPoly::<RBig>::zero(2);
        assert_eq!(z.degree(), 0);
        assert!(z.is_zero());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = rpoly(2, &[(1, &[1, 0])]);
        let b = rpoly(3, &[(1, &[1, 0, 0])]);
        assert!(a.checked_add(&b).is_err());
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn exponent_overflow_is_detected() {
        let a = rpoly(1, &[(1, &[40000])]);
        assert!(matches!(
            a.checked_mul(&a),
            Err(Error::ExponentOverflow { .. })
        ));
        assert!(Monomial::from_exponents(&[70000]).is_err());
    }

    #[test]
    fn text_form_is_graded_lex() {
        let a = p(&[(1, &[0, 2]), (-3, &[1, 0]), (7, &[0, 0]), (1, &[2, 0])]);
        assert_eq!(a.to_string(), "7 - 3 * x1 + 1 * x1^2 + 1 * x2^2");
        let h = MultiPoly::constant(1, RBig::from(1) / RBig::from(3));
        assert_eq!(h.to_string(), "1/3");
        assert_eq!(MultiPoly::<RBig>::zero(3).to_string(), "0");
    }

    #[test]
    fn many_variables_pack_across_words() {
        let mut e = vec![0u32; 9];
        e[8] = 3;
        e[0] = 1;
        let m = Monomial::from_exponents(&e).unwrap();
        assert_eq!(m.exponents(9), e);
        assert_eq!(m.degree(), 4);
    }

    #[test]
    fn integer_part_roundtrip() {
        let a = MultiPoly::from_terms(
            1,
            vec![
                (vec![2], RBig::from(2) / RBig::from(3)),
                (vec![0], RBig::from(-4) / RBig::from(9)),
            ],
        )
        .unwrap();
        let (ip, s) = a.integer_part();
        assert_eq!(s, RBig::from(2) / RBig::from(9));
        let back = ip.map_coeffs(|c| RBig::from(c.clone())).scale(&s);
        assert_eq!(back, a);
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = MultiPoly<RBig>> {
        prop::collection::vec(
            (
                prop::collection::vec(0u32..=3, nvars),
                -5i64..=5,
                1i64..=4,
            ),
            0..6,
        )
        .prop_map(move |ts| {
            MultiPoly::from_terms(
                nvars,
                ts.into_iter()
                    .map(|(e, n, d)| (e, RBig::from(n) / RBig::from(d))),
            )
            .unwrap()
        })
    }

    fn arb_triple() -> impl Strategy<Value = (MultiPoly<RBig>, MultiPoly<RBig>, MultiPoly<RBig>)> {
        (1usize..=4).prop_flat_map(|n| (arb_poly(n), arb_poly(n), arb_poly(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms((a, b, c) in arb_triple()) {
            prop_assert_eq!(a.checked_mul(&b).unwrap(), b.checked_mul(&a).unwrap());
            prop_assert_eq!(a.checked_add(&b).unwrap(), b.checked_add(&a).unwrap());
            prop_assert_eq!(
                a.checked_mul(&b).unwrap().checked_mul(&c).unwrap(),
                a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.checked_mul(&b.checked_add(&c).unwrap()).unwrap(),
                a.checked_mul(&b).unwrap().checked_add(&a.checked_mul(&c).unwrap()).unwrap()
            );
            prop_assert!(a.checked_sub(&a).unwrap().is_zero());
        }

        #[test]
        fn pow_matches_iterated_mul((a, _, _) in arb_triple(), k in 0u32..=6) {
            let mut acc = MultiPoly::one(a.nvars());
            for _ in 0..k {
                acc = acc.checked_mul(&a).unwrap();
            }
            prop_assert_eq!(a.pow(k).unwrap(), acc);
        }

        #[test]
        fn eval_is_multiplicative(
            (a, b, _) in arb_triple(),
            pt in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let x = &pt[..a.nvars()];
            let lhs = a.checked_mul(&b).unwrap().eval(x).unwrap();
            let rhs = a.eval(x).unwrap() * b.eval(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn printing_is_structural((a, b, _) in arb_triple()) {
            let ab = a.checked_add(&b).unwrap();
            let ba = b.checked_add(&a).unwrap();
            prop_assert_eq!(ab.to_string(), ba.to_string());
        }
    }
}
