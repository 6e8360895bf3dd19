//! Exact rational arithmetic in the CSIT-quality parameter α.
//!
//! Power exponents, payloads and DoF values are affine in α
//! ([`AffineAlpha`]); region coefficients go up to degree two
//! ([`PolyAlpha`]). Everything is backed by arbitrary-precision rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `3`, `-1/2` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let frac = Rational::new(frac, scale);
        let whole = Rational::from_integer(whole);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Always prints `p/q`, including integers (`3/1`).
pub fn format_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub(crate) fn de_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(serde::de::Error::custom)
}

pub(crate) mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|r| r.to_string()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `c0 + c1·α` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineAlpha {
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub c0: Rational,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub c1: Rational,
}

impl AffineAlpha {
    pub fn new(c0: Rational, c1: Rational) -> Self {
        AffineAlpha { c0, c1 }
    }

    pub fn from_ints(c0: i64, c1: i64) -> Self {
        AffineAlpha::new(int(c0), int(c1))
    }

    pub fn constant(c0: Rational) -> Self {
        AffineAlpha::new(c0, Rational::zero())
    }

    pub fn zero() -> Self {
        AffineAlpha::from_ints(0, 0)
    }

    pub fn one() -> Self {
        AffineAlpha::from_ints(1, 0)
    }

    /// α
    pub fn alpha() -> Self {
        AffineAlpha::from_ints(0, 1)
    }

    /// 1 − α
    pub fn one_minus_alpha() -> Self {
        AffineAlpha::from_ints(1, -1)
    }

    pub fn eval(&self, alpha: &Rational) -> Rational {
        &self.c0 + &self.c1 * alpha
    }

    pub fn eval_f64(&self, alpha: f64) -> f64 {
        to_f64(&self.c0) + to_f64(&self.c1) * alpha
    }

    pub fn scale(&self, k: &Rational) -> Self {
        AffineAlpha::new(&self.c0 * k, &self.c1 * k)
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    /// True when the value is ≥ 0 on the whole interval α ∈ [0, 1].
    pub fn nonnegative_on_unit(&self) -> bool {
        !self.eval(&int(0)).is_negative() && !self.eval(&int(1)).is_negative()
    }

    /// Within [lo, hi] on the whole unit interval.
    pub fn bounded_on_unit(&self, lo: &Rational, hi: &Rational) -> bool {
        [int(0), int(1)].iter().all(|a| {
            let v = self.eval(a);
            &v >= lo && &v <= hi
        })
    }

    /// Pure-MAT variant of a payload: α set to zero.
    pub fn at_zero_alpha(&self) -> Self {
        AffineAlpha::constant(self.c0.clone())
    }

    /// Writes the value over a common integer denominator, e.g. `(6+5α)/11`.
    pub fn pretty(&self) -> String {
        let d = self.c0.denom().lcm(self.c1.denom());
        let dr = Rational::from_integer(d.clone());
        let n0 = (&self.c0 * &dr).to_integer();
        let n1 = (&self.c1 * &dr).to_integer();
        let num = match (n0.is_zero(), n1.is_zero()) {
            (true, true) => "0".to_string(),
            (false, true) => n0.to_string(),
            (true, false) => alpha_term(&n1, true),
            (false, false) => format!("{}{}", n0, alpha_term(&n1, false)),
        };
        if d.is_one() {
            num
        } else if n0.is_zero() || n1.is_zero() {
            format!("{num}/{d}")
        } else {
            format!("({num})/{d}")
        }
    }
}

fn alpha_term(n1: &BigInt, leading: bool) -> String {
    let sign = if n1.is_negative() {
        "-"
    } else if leading {
        ""
    } else {
        "+"
    };
    let mag = n1.abs();
    if mag.is_one() {
        format!("{sign}α")
    } else {
        format!("{sign}{mag}α")
    }
}

impl fmt::Display for AffineAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Add for &AffineAlpha {
    type Output = AffineAlpha;
    fn add(self, rhs: &AffineAlpha) -> AffineAlpha {
        AffineAlpha::new(&self.c0 + &rhs.c0, &self.c1 + &rhs.c1)
    }
}

impl Add for AffineAlpha {
    type Output = AffineAlpha;
    fn add(self, rhs: AffineAlpha) -> AffineAlpha {
        &self + &rhs
    }
}

impl Sub for &AffineAlpha {
    type Output = AffineAlpha;
    fn sub(self, rhs: &AffineAlpha) -> AffineAlpha {
        AffineAlpha::new(&self.c0 - &rhs.c0, &self.c1 - &rhs.c1)
    }
}

impl Sub for AffineAlpha {
    type Output = AffineAlpha;
    fn sub(self, rhs: AffineAlpha) -> AffineAlpha {
        &self - &rhs
    }
}

impl Neg for AffineAlpha {
    type Output = AffineAlpha;
    fn neg(self) -> AffineAlpha {
        AffineAlpha::new(-self.c0, -self.c1)
    }
}

impl std::iter::Sum for AffineAlpha {
    fn sum<I: Iterator<Item = AffineAlpha>>(iter: I) -> AffineAlpha {
        iter.fold(AffineAlpha::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a AffineAlpha> for AffineAlpha {
    fn sum<I: Iterator<Item = &'a AffineAlpha>>(iter: I) -> AffineAlpha {
        iter.fold(AffineAlpha::zero(), |acc, x| &acc + x)
    }
}

/// Polynomial in α with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyAlpha {
    #[serde(with = "rational_vec")]
    pub coeffs: Vec<Rational>,
}

pub const MAX_POLY_DEGREE: usize = 2;

impl PolyAlpha {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rational::zero());
        }
        PolyAlpha { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        PolyAlpha::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn constant(c: Rational) -> Self {
        PolyAlpha::new(vec![c])
    }

    pub fn zero() -> Self {
        PolyAlpha::new(vec![])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, alpha: &Rational) -> Rational {
        // Horner
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * alpha + c)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        PolyAlpha::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl From<&AffineAlpha> for PolyAlpha {
    fn from(a: &AffineAlpha) -> Self {
        PolyAlpha::new(vec![a.c0.clone(), a.c1.clone()])
    }
}

impl Add for &PolyAlpha {
    type Output = PolyAlpha;
    fn add(self, rhs: &PolyAlpha) -> PolyAlpha {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = Rational::zero();
        PolyAlpha::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + rhs.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Mul for &PolyAlpha {
    type Output = PolyAlpha;
    fn mul(self, rhs: &PolyAlpha) -> PolyAlpha {
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyAlpha::new(out)
    }
}

impl fmt::Display for PolyAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && !(self.coeffs.len() == 1) {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if i == 1 {
                        f.write_str("α")?;
                    } else {
                        write!(f, "α^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Piecewise-linear expression in α built from affine leaves with max/min.
///
/// Between consecutive crossing points of its leaves every expression is
/// affine, so inequalities are decided exactly by checking those points and
/// the interval midpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Pwl {
    Leaf(AffineAlpha),
    Max(Vec<Pwl>),
    Min(Vec<Pwl>),
    Sum(Vec<Pwl>),
    Diff(Box<Pwl>, Box<Pwl>),
}

impl Pwl {
    pub fn eval(&self, a: &Rational) -> Rational {
        match self {
            Pwl::Leaf(x) => x.eval(a),
            Pwl::Max(v) => v
                .iter()
                .map(|p| p.eval(a))
                .max()
                .unwrap_or_else(Rational::zero),
            Pwl::Min(v) => v
                .iter()
                .map(|p| p.eval(a))
                .min()
                .unwrap_or_else(Rational::zero),
            Pwl::Sum(v) => v
                .iter()
                .map(|p| p.eval(a))
                .fold(Rational::zero(), |s, x| s + x),
            Pwl::Diff(l, r) => l.eval(a) - r.eval(a),
        }
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a AffineAlpha>) {
        match self {
            Pwl::Leaf(x) => out.push(x),
            Pwl::Max(v) | Pwl::Min(v) | Pwl::Sum(v) => v.iter().for_each(|p| p.leaves(out)),
            Pwl::Diff(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }
}

/// Leaf crossing points inside (0, 1) plus both endpoints, sorted. Every
/// kink of a [`Pwl`] built from these leaves is among them.
fn candidate_points(lhs: &Pwl, rhs: &Pwl) -> Vec<Rational> {
    let mut leaves = Vec::new();
    lhs.leaves(&mut leaves);
    rhs.leaves(&mut leaves);
    let leaves: Vec<&AffineAlpha> = leaves
        .into_iter()
        .collect::<std::collections::HashSet<_>>()
        .into_iter()
        .collect();
    let zero = int(0);
    let one = int(1);
    let mut points = vec![zero.clone(), one.clone()];
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            let dc1 = &a.c1 - &b.c1;
            if dc1.is_zero() {
                continue;
            }
            let x = (&b.c0 - &a.c0) / dc1;
            if x > zero && x < one {
                points.push(x);
            }
        }
    }
    points.sort();
    points.dedup();
    points
}

/// Returns an α witness in [0, 1] where `lhs > rhs`, or `None` when
/// `lhs ≤ rhs` holds on the whole interval. Midpoints of elementary
/// intervals are preferred as witnesses.
pub(crate) fn find_violation(lhs: &Pwl, rhs: &Pwl) -> Option<Rational> {
    // schemes repeat the same few inequalities thousands of times
    thread_local! {
        static CACHE: std::cell::RefCell<std::collections::HashMap<(Pwl, Pwl), Option<Rational>>> =
            Default::default();
    }
    let key = (lhs.clone(), rhs.clone());
    if let Some(hit) = CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let result = find_violation_uncached(lhs, rhs);
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 4096 {
            c.clear();
        }
        c.insert(key, result.clone());
    });
    result
}

fn find_violation_uncached(lhs: &Pwl, rhs: &Pwl) -> Option<Rational> {
    let points = candidate_points(lhs, rhs);
    let violates = |x: &Rational| lhs.eval(x) > rhs.eval(x);
    for w in points.windows(2) {
        let mid = (&w[0] + &w[1]) / int(2);
        if violates(&mid) {
            return Some(mid);
        }
        if violates(&w[0]) {
            return Some(w[0].clone());
        }
        if violates(&w[1]) {
            return Some(w[1].clone());
        }
    }
    None
}

/// Returns some α in [0, 1] with `lhs ≥ rhs`, if any.
pub(crate) fn find_touch(lhs: &Pwl, rhs: &Pwl) -> Option<Rational> {
    candidate_points(lhs, rhs)
        .into_iter()
        .find(|x| lhs.eval(x) >= rhs.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("4/8").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn pq_format_keeps_denominator() {
        assert_eq!(format_pq(&int(3)), "3/1");
        assert_eq!(format_pq(&rat(17, 22)), "17/22");
        assert_eq!(format_pq(&int(0)), "0/1");
    }

    #[test]
    fn affine_pretty() {
        let x1 = AffineAlpha::new(rat(6, 11), rat(5, 11));
        assert_eq!(x1.pretty(), "(6+5α)/11");
        assert_eq!(AffineAlpha::one_minus_alpha().pretty(), "1-α");
        assert_eq!(AffineAlpha::alpha().pretty(), "α");
        assert_eq!(AffineAlpha::constant(rat(1, 3)).pretty(), "1/3");
        assert_eq!(AffineAlpha::zero().pretty(), "0");
        assert_eq!(AffineAlpha::new(int(0), rat(3, 2)).pretty(), "3α/2");
    }

    #[test]
    fn poly_eval_and_mul() {
        // (2+α)(3+α) = 6 + 5α + α²
        let p = &PolyAlpha::from_ints(&[2, 1]) * &PolyAlpha::from_ints(&[3, 1]);
        assert_eq!(p, PolyAlpha::from_ints(&[6, 5, 1]));
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(&rat(1, 2)), rat(35, 4));
        assert_eq!(PolyAlpha::from_ints(&[1, 0, 0]).degree(), 0);
    }

    #[test]
    fn violation_witness_prefers_midpoint() {
        // 1 ≤ α fails on [0,1), witness at the midpoint
        let w = find_violation(
            &Pwl::Leaf(AffineAlpha::one()),
            &Pwl::Leaf(AffineAlpha::alpha()),
        );
        assert_eq!(w, Some(rat(1, 2)));
        // 1-α ≤ 1 always
        assert!(find_violation(
            &Pwl::Leaf(AffineAlpha::one_minus_alpha()),
            &Pwl::Leaf(AffineAlpha::one())
        )
        .is_none());
    }

    #[test]
    fn violation_detects_kink() {
        // α/2 + 1/4 ≤ max(1-2α, 2α-1) is violated near α=1/2 only
        let lhs = Pwl::Leaf(AffineAlpha::new(rat(1, 4), rat(1, 2)));
        let rhs = Pwl::Max(vec![
            Pwl::Leaf(AffineAlpha::from_ints(1, -2)),
            Pwl::Leaf(AffineAlpha::from_ints(-1, 2)),
        ]);
        let w = find_violation(&lhs, &rhs).unwrap();
        assert!(lhs.eval(&w) > rhs.eval(&w));
    }

    #[test]
    fn touch_point_on_equality() {
        let a = Pwl::Leaf(AffineAlpha::alpha());
        let b = Pwl::Max(vec![
            Pwl::Leaf(AffineAlpha::alpha()),
            Pwl::Leaf(AffineAlpha::constant(rat(1, 2))),
        ]);
        assert!(find_touch(&a, &b).is_some());
        let c = Pwl::Leaf(AffineAlpha::new(rat(1, 10), int(1)));
        assert!(find_touch(&a, &c).is_none());
    }

    #[test]
    fn serde_roundtrip_affine() {
        let a = AffineAlpha::new(rat(6, 11), rat(-5, 11));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"c0":"6/11","c1":"-5/11"}"#);
        let b: AffineAlpha = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
