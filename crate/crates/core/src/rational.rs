//! Rational helpers: `"num/den"` string form and the small fixed-width rational
//! used by the geometry.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use std::fmt::Display;
use std::str::FromStr;

/// Exact rational with i128 parts. Arithmetic through the `checked_*` helpers.
pub type Rat = Ratio<i128>;

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

pub fn to_big(r: &Rat) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn fmt_ratio<T: Display + One + PartialEq>(numer: &T, denom: &T) -> String {
    if *denom == T::one() {
        format!("{numer}")
    } else {
        format!("{numer}/{denom}")
    }
}

pub fn big_to_string(r: &BigRational) -> String {
    fmt_ratio(r.numer(), r.denom())
}

pub fn rat_to_string(r: &Rat) -> String {
    fmt_ratio(r.numer(), r.denom())
}

fn split(s: &str) -> (&str, Option<&str>) {
    match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s.trim(), None),
    }
}

pub fn parse_big(s: &str) -> Result<BigRational> {
    let (n, d) = split(s);
    let n = BigInt::from_str(n).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let d = match d {
        Some(d) => BigInt::from_str(d).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let (n, d) = split(s);
    let n = i128::from_str(n).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let d = match d {
        Some(d) => i128::from_str(d).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?,
        None => 1,
    };
    if d == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

pub fn checked_add(a: &Rat, b: &Rat) -> Result<Rat> {
    a.checked_add(b).ok_or(Error::Overflow("rational add"))
}

pub fn checked_sub(a: &Rat, b: &Rat) -> Result<Rat> {
    a.checked_sub(b).ok_or(Error::Overflow("rational sub"))
}

pub fn checked_mul(a: &Rat, b: &Rat) -> Result<Rat> {
    a.checked_mul(b).ok_or(Error::Overflow("rational mul"))
}

pub fn checked_div(a: &Rat, b: &Rat) -> Result<Rat> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    a.checked_div(b).ok_or(Error::Overflow("rational div"))
}

/// serde adapter for `Rat` as a string.
pub mod rat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// serde adapter for `BigRational` as a string.
pub mod big_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&big_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_big(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rat_pair_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &[Rat; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
        [rat_to_string(&p[0]), rat_to_string(&p[1])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[Rat; 2], D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        Ok([
            parse_rat(&a).map_err(serde::de::Error::custom)?,
            parse_rat(&b).map_err(serde::de::Error::custom)?,
        ])
    }
}
