//! Coefficient fields shared by polynomials, moment tables and matrices.

use std::fmt::Debug;

use dashu_float::FBig;
use dashu_int::IBig;
use dashu_ratio::RBig;

/// Binary multiprecision float with round-half-even.
pub type Mp = FBig;

/// Ring element usable as a polynomial coefficient.
///
/// Methods take references so big-number types avoid needless clones.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `self += a * b`.
    fn add_mul_assign(&mut self, a: &Self, b: &Self);
    fn to_f64(&self) -> f64;
    /// Text form used in polynomial output; exact types print `num/den`.
    fn fmt_coef(&self) -> String;
    fn is_negative(&self) -> bool;
}

/// Coefficient field (division available) that can be lifted to multiprecision.
pub trait Field: Coefficient {
    fn div_ref(&self, other: &Self) -> Self;
    /// Rounded to `prec` bits; exact for rationals representable in `prec` bits.
    fn to_mp(&self, prec: usize) -> Mp;
    fn from_rbig(r: &RBig) -> Self;
    /// True when values are exact (no rounding in field operations).
    const EXACT: bool;
}

impl Coefficient for RBig {
    fn zero() -> Self {
        RBig::ZERO
    }
    fn one() -> Self {
        RBig::ONE
    }
    fn from_i64(v: i64) -> Self {
        RBig::from(v)
    }
    fn is_zero(&self) -> bool {
        RBig::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn to_f64(&self) -> f64 {
        RBig::to_f64(self).value()
    }
    fn fmt_coef(&self) -> String {
        if self.denominator().is_one() {
            format!("{}", self.numerator())
        } else {
            format!("{}/{}", self.numerator(), self.denominator())
        }
    }
    fn is_negative(&self) -> bool {
        self.numerator() < &IBig::ZERO
    }
}

impl Field for RBig {
    const EXACT: bool = true;
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn from_rbig(r: &RBig) -> Self {
        r.clone()
    }
    fn to_mp(&self, prec: usize) -> Mp {
        let num = Mp::from(self.numerator().clone()).with_precision(prec).value();
        let den = Mp::from(IBig::from(self.denominator().clone()))
            .with_precision(prec)
            .value();
        num / den
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn fmt_coef(&self) -> String {
        format!("{self:?}")
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
}

impl Field for f64 {
    const EXACT: bool = false;
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn from_rbig(r: &RBig) -> Self {
        RBig::to_f64(r).value()
    }
    fn to_mp(&self, prec: usize) -> Mp {
        Mp::try_from(*self)
            .expect("finite float")
            .with_precision(prec.max(53))
            .value()
    }
}

impl Coefficient for IBig {
    fn zero() -> Self {
        IBig::ZERO
    }
    fn one() -> Self {
        IBig::ONE
    }
    fn from_i64(v: i64) -> Self {
        IBig::from(v)
    }
    fn is_zero(&self) -> bool {
        *self == IBig::ZERO
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn to_f64(&self) -> f64 {
        IBig::to_f64(self).value()
    }
    fn fmt_coef(&self) -> String {
        format!("{self}")
    }
    fn is_negative(&self) -> bool {
        *self < IBig::ZERO
    }
}

/// Parses `p/q`, an integer, or a finite decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<RBig> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: IBig = num.trim().parse().ok()?;
        let den: IBig = den.trim().parse().ok()?;
        if den == IBig::ZERO {
            return None;
        }
        return Some(RBig::from(num) / RBig::from(den));
    }
    if let Ok(i) = s.parse::<IBig>() {
        return Some(RBig::from(i));
    }
    // Decimal literals are read exactly, not through binary floating point.
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: IBig = format!("{int_part}{frac_part}0").parse::<IBig>().ok()? / IBig::from(10);
    let scale = exp10 - frac_part.len() as i32;
    let ten = RBig::from(10);
    let mut v = RBig::from(all);
    if scale >= 0 {
        v *= ten.pow(scale as usize);
    } else {
        v /= ten.pow((-scale) as usize);
    }
    Some(if neg { -v } else { v })
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<RBig> {
    RBig::try_from(x).ok()
}
