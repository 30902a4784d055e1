//! Laurent polynomials and fractions in `q = y^{1/2}` with exact rational
//! coefficients, plus the bracket and end multiplicities.

use crate::error::{Error, Result};
use crate::rational::{big, big_to_string, parse_big};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Laurent polynomial in `q`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QLaurent {
    coeffs: BTreeMap<i64, BigRational>,
}

impl QLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: i64, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// `q^exp`
    pub fn q_pow(exp: i64) -> Self {
        Self::monomial(exp, BigRational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn from_int_terms(terms: &[(i64, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(e, c)| (e, big(c))))
    }

    fn add_term(&mut self, exp: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_monomial(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Value at `q = 1`.
    pub fn eval_q1(&self) -> BigRational {
        self.coeffs.values().fold(BigRational::zero(), |a, c| a + c)
    }

    /// Value at `q = -1`.
    pub fn eval_q_minus1(&self) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |a, (e, c)| {
            if e.rem_euclid(2) == 0 {
                a + c
            } else {
                a - c
            }
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(e, c)| self.coeff(-e) == *c)
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &QLaurent) -> Option<QLaurent> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (amin, bmin) = (self.min_exp()?, other.min_exp()?);
        // polynomial division of a·q^{-amin} by b·q^{-bmin}
        let mut rem: BTreeMap<i64, BigRational> =
            self.coeffs.iter().map(|(e, c)| (e - amin, c.clone())).collect();
        let b: Vec<(i64, BigRational)> =
            other.coeffs.iter().map(|(e, c)| (e - bmin, c.clone())).collect();
        let (bdeg, blead) = b.last().cloned()?;
        let mut quot = Self::zero();
        while let Some((&rdeg, rlead)) = rem.iter().next_back() {
            if rdeg < bdeg {
                return None;
            }
            let factor = rlead / &blead;
            let shift = rdeg - bdeg;
            for (be, bc) in &b {
                let e = be + shift;
                let slot = rem.entry(e).or_insert_with(BigRational::zero);
                *slot -= &factor * bc;
                if slot.is_zero() {
                    rem.remove(&e);
                }
            }
            quot.add_term(shift, factor);
        }
        Some(quot.shift(amin - bmin))
    }

    fn serialize_terms(&self) -> Vec<(i64, String)> {
        self.coeffs.iter().map(|(e, c)| (*e, big_to_string(c))).collect()
    }

    fn parse_terms(terms: Vec<(i64, String)>) -> Result<Self> {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, parse_big(&c)?);
        }
        Ok(p)
    }
}

/// `q + q^{-1}`
pub fn q_plus() -> QLaurent {
    QLaurent::from_int_terms(&[(1, 1), (-1, 1)])
}

/// `q - q^{-1}`
pub fn q_minus() -> QLaurent {
    QLaurent::from_int_terms(&[(1, 1), (-1, -1)])
}

impl Add for &QLaurent {
    type Output = QLaurent;
    fn add(self, rhs: &QLaurent) -> QLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &QLaurent {
    type Output = QLaurent;
    fn sub(self, rhs: &QLaurent) -> QLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &QLaurent {
    type Output = QLaurent;
    fn mul(self, rhs: &QLaurent) -> QLaurent {
        let mut out = QLaurent::zero();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        QLaurent {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(QLaurent, Add add, Sub sub, Mul mul);

impl Neg for QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        -&self
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, var: &str, coeffs: &BTreeMap<i64, BigRational>) -> fmt::Result {
    if coeffs.is_empty() {
        return write!(f, "0");
    }
    for (i, (e, c)) in coeffs.iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { '-' } else { '+' })?;
        }
        let unit = abs.is_one();
        if *e == 0 {
            write!(f, "{}", big_to_string(&abs))?;
            continue;
        }
        if !unit {
            write!(f, "{} ", big_to_string(&abs))?;
        }
        if *e == 1 {
            write!(f, "{var}")?;
        } else {
            write!(f, "{var}^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for QLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, "q", &self.coeffs)
    }
}

#[derive(Serialize, Deserialize)]
struct QLaurentJson {
    exponents_q: Vec<(i64, String)>,
}

impl Serialize for QLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QLaurentJson { exponents_q: self.serialize_terms() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QLaurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = QLaurentJson::deserialize(d)?;
        QLaurent::parse_terms(j.exponents_q).map_err(serde::de::Error::custom)
    }
}

/// `num / den` with `den` normalized: lowest exponent 0, lowest coefficient 1.
#[derive(Clone, Debug)]
pub struct QFraction {
    num: QLaurent,
    den: QLaurent,
}

impl QFraction {
    pub fn new(num: QLaurent, den: QLaurent) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let shift = -den.min_exp().unwrap_or(0);
        let lead = den.coeff(-shift);
        let inv = BigRational::one() / lead;
        Ok(Self {
            num: num.shift(shift).scale(&inv),
            den: den.shift(shift).scale(&inv),
        })
    }

    pub fn from_laurent(p: QLaurent) -> Self {
        Self { num: p, den: QLaurent::one() }
    }

    pub fn one() -> Self {
        Self::from_laurent(QLaurent::one())
    }

    pub fn zero() -> Self {
        Self::from_laurent(QLaurent::zero())
    }

    pub fn num(&self) -> &QLaurent {
        &self.num
    }

    pub fn den(&self) -> &QLaurent {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn mul(&self, other: &QFraction) -> QFraction {
        // den products of normalized dens stay normalized
        Self { num: &self.num * &other.num, den: &self.den * &other.den }
    }

    pub fn add(&self, other: &QFraction) -> QFraction {
        if self.den == other.den {
            return Self { num: &self.num + &other.num, den: self.den.clone() };
        }
        Self {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    pub fn neg(&self) -> QFraction {
        Self { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, other: &QFraction) -> QFraction {
        self.add(&other.neg())
    }

    pub fn inv(&self) -> Result<QFraction> {
        QFraction::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &BigRational) -> QFraction {
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Exact reduction to a Laurent polynomial.
    pub fn to_laurent(&self) -> Result<QLaurent> {
        self.num.div_exact(&self.den).ok_or(Error::NotLaurent)
    }

    pub fn eval_q1(&self) -> Result<BigRational> {
        let d = self.den.eval_q1();
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval_q1() / d)
    }
}

impl PartialEq for QFraction {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for QFraction {}

impl From<QLaurent> for QFraction {
    fn from(p: QLaurent) -> Self {
        QFraction::from_laurent(p)
    }
}

impl fmt::Display for QFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == QLaurent::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// `[a]_-` expanded: `q^{a-1} + q^{a-3} + ... + q^{-(a-1)}`, antisymmetric in `a`.
pub fn bracket_minus(a: i64) -> QLaurent {
    let n = a.abs();
    let sign = if a < 0 { big(-1) } else { big(1) };
    QLaurent::from_terms((0..n).map(|k| (n - 1 - 2 * k, sign.clone())))
}

/// `[a]_+ = (q^a + q^{-a}) / (q + q^{-1})`, reduced when it is a polynomial.
pub fn bracket_plus(a: i64) -> Result<QFraction> {
    if a == 0 {
        return Err(Error::Degenerate("bracket_plus(0)".into()));
    }
    let num = QLaurent::from_int_terms(&[(a, 1), (-a, 1)]);
    Ok(reduce_if_possible(num, q_plus()))
}

fn reduce_if_possible(num: QLaurent, den: QLaurent) -> QFraction {
    match num.div_exact(&den) {
        Some(p) => QFraction::from_laurent(p),
        None => QFraction::new(num, den).expect("nonzero denominator"),
    }
}

fn sign_pow(w: u32) -> i64 {
    if w % 2 == 0 {
        1
    } else {
        -1
    }
}

/// End multiplicity for an end of weight `w`.
pub fn end_mult(w: u32, fixed: bool) -> QFraction {
    assert!(w >= 1, "end weight must be positive");
    let e = w as i64;
    let s = sign_pow(w);
    if fixed {
        reduce_if_possible(
            QLaurent::from_int_terms(&[(e, 1), (-e, s)]),
            QLaurent::from_int_terms(&[(1, 1), (-1, s)]),
        )
    } else {
        let num = QLaurent::from_int_terms(&[(e, 1), (-e, -s)]);
        let den = QLaurent::from_int_terms(&[(1, 1), (-1, -s)]).scale(&big(e));
        reduce_if_possible(num, den)
    }
}

/// The simpler end multiplicity without the parity signs.
pub fn end_mult_simple(w: u32, fixed: bool) -> QFraction {
    assert!(w >= 1, "end weight must be positive");
    let e = w as i64;
    if fixed {
        reduce_if_possible(QLaurent::from_int_terms(&[(e, 1), (-e, 1)]), q_plus())
    } else {
        reduce_if_possible(
            QLaurent::from_int_terms(&[(e, 1), (-e, -1)]),
            q_minus().scale(&big(e)),
        )
    }
}

/// Largest `k` with `(q + q^{-1})^k` dividing `p`.
pub fn plus_divisibility_order(p: &QLaurent) -> Result<u32> {
    if p.is_zero() {
        return Err(Error::Precondition("plus_divisibility_order of 0".into()));
    }
    let d = q_plus();
    let mut k = 0;
    let mut cur = p.clone();
    while let Some(next) = cur.div_exact(&d) {
        cur = next;
        k += 1;
    }
    Ok(k)
}

pub fn is_symmetric(p: &QLaurent) -> bool {
    p.is_symmetric()
}

/// Laurent polynomial in `y`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct YLaurent {
    coeffs: BTreeMap<i64, BigRational>,
}

impl YLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_q(&QLaurent::one()).expect("even")
    }

    pub fn from_int_terms(terms: &[(i64, i64)]) -> Self {
        let q = QLaurent::from_terms(terms.iter().map(|&(e, c)| (2 * e, big(c))));
        Self::from_q(&q).expect("even")
    }

    pub fn from_q(p: &QLaurent) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (e, c) in p.terms() {
            if e.rem_euclid(2) != 0 {
                return Err(Error::NotYPolynomial(e));
            }
            coeffs.insert(e / 2, c.clone());
        }
        Ok(Self { coeffs })
    }

    pub fn to_q(&self) -> QLaurent {
        QLaurent::from_terms(self.coeffs.iter().map(|(e, c)| (2 * e, c.clone())))
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &YLaurent) -> YLaurent {
        Self::from_q(&(&self.to_q() + &other.to_q())).expect("even")
    }

    pub fn mul(&self, other: &YLaurent) -> YLaurent {
        Self::from_q(&(&self.to_q() * &other.to_q())).expect("even")
    }

    pub fn scale(&self, c: &BigRational) -> YLaurent {
        Self::from_q(&self.to_q().scale(c)).expect("even")
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(e, c)| self.coeff(-e) == *c)
    }
}

impl fmt::Display for YLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, "y", &self.coeffs)
    }
}

#[derive(Serialize, Deserialize)]
struct YLaurentJson {
    variable: String,
    exponents_q: Vec<(i64, String)>,
    text: String,
}

impl Serialize for YLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        YLaurentJson {
            variable: "y".into(),
            exponents_q: self.to_q().serialize_terms(),
            text: self.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for YLaurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = YLaurentJson::deserialize(d)?;
        if j.variable != "y" {
            return Err(serde::de::Error::custom("expected variable \"y\""));
        }
        let q = QLaurent::parse_terms(j.exponents_q).map_err(serde::de::Error::custom)?;
        YLaurent::from_q(&q).map_err(serde::de::Error::custom)
    }
}

pub fn to_y(p: &QLaurent) -> Result<YLaurent> {
    YLaurent::from_q(p)
}

/// Substitute an exact nonzero rational for `y`.
pub fn eval_y(p: &YLaurent, v: &BigRational) -> Result<BigRational> {
    if v.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let mut acc = BigRational::zero();
    for (e, c) in p.terms() {
        let pw = if e >= 0 {
            num_traits::pow(v.clone(), e as usize)
        } else {
            num_traits::pow(v.recip(), (-e) as usize)
        };
        acc += c * pw;
    }
    Ok(acc)
}

/// Convenience: integer `BigRational`.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
