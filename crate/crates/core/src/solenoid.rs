//! Solenoid descriptions and exact arithmetic on the character group.
//!
//! A solenoid is described by its Steinitz data: for every prime, how many
//! of the numbers `a_j` it divides (counted with multiplicity), possibly
//! infinitely often. The character group `Y` is the group of rationals whose
//! `p`-adic valuation is at least `-mult(p)` for every prime `p`, and the
//! topological automorphisms are the rationals built only from primes of
//! infinite multiplicity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::{self, format_rational, parse_rational, strip_prime, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Finite(u32),
    Infinite,
}

impl Multiplicity {
    pub fn is_infinite(self) -> bool {
        matches!(self, Multiplicity::Infinite)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(k) => write!(f, "{k}"),
            Multiplicity::Infinite => f.write_str("inf"),
        }
    }
}

/// Steinitz data of a solenoid: prime -> multiplicity. The empty map is the
/// circle group, whose character group is `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SteinitzSpec {
    mult: BTreeMap<u64, Multiplicity>,
}

/// Which characterization regime a solenoid falls into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", content = "primes")]
pub enum SolenoidClass {
    UniqueInfinitePrime(u64),
    MultipleInfinitePrimes(Vec<u64>),
    NoInfinitePrime,
}

impl SteinitzSpec {
    pub fn new(entries: impl IntoIterator<Item = (u64, Multiplicity)>) -> Result<Self> {
        let mut mult = BTreeMap::new();
        for (p, m) in entries {
            if !rat::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if m == Multiplicity::Finite(0) {
                return Err(Error::BadMultiplicity(p));
            }
            mult.insert(p, m);
        }
        Ok(Self { mult })
    }

    /// The circle group: no primes at all.
    pub fn circle() -> Self {
        Self::default()
    }

    /// The solenoid of the constant sequence `(p, p, p, ...)`.
    pub fn p_adic(p: u64) -> Result<Self> {
        Self::new([(p, Multiplicity::Infinite)])
    }

    /// Solenoid where every listed prime has infinite multiplicity.
    pub fn infinite_primes_of(primes: &[u64]) -> Result<Self> {
        Self::new(primes.iter().map(|&p| (p, Multiplicity::Infinite)))
    }

    pub fn multiplicity(&self, p: u64) -> Multiplicity {
        self.mult.get(&p).copied().unwrap_or(Multiplicity::Finite(0))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, Multiplicity)> + '_ {
        self.mult.iter().map(|(&p, &m)| (p, m))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.mult.keys().copied()
    }

    pub fn infinite_primes(&self) -> Vec<u64> {
        self.entries().filter(|(_, m)| m.is_infinite()).map(|(p, _)| p).collect()
    }

    pub fn is_circle(&self) -> bool {
        self.mult.is_empty()
    }

    /// Lower bound on `v_p` over `Y`, `None` when unbounded.
    pub fn valuation_floor(&self, p: u64) -> Option<i64> {
        match self.multiplicity(p) {
            Multiplicity::Finite(k) => Some(-(k as i64)),
            Multiplicity::Infinite => None,
        }
    }

    /// First `n` terms of the canonical sequence `a_0, a_1, ...`: primes are
    /// visited round-robin in increasing order, each emitted while its
    /// multiplicity lasts. Once every finite multiplicity is used up the
    /// sequence continues with 1, so `A_N` saturates.
    pub fn tower_factors(&self, n: usize) -> Vec<u64> {
        let mut remaining: Vec<(u64, Option<u32>)> = self
            .entries()
            .map(|(p, m)| match m {
                Multiplicity::Finite(k) => (p, Some(k)),
                Multiplicity::Infinite => (p, None),
            })
            .collect();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut emitted = false;
            for (p, rem) in remaining.iter_mut() {
                if out.len() == n {
                    break;
                }
                match rem {
                    None => {
                        out.push(*p);
                        emitted = true;
                    }
                    Some(0) => {}
                    Some(k) => {
                        *k -= 1;
                        out.push(*p);
                        emitted = true;
                    }
                }
            }
            if !emitted {
                out.resize(n, 1);
            }
        }
        out
    }

    pub fn tower_factor(&self, j: usize) -> u64 {
        self.tower_factors(j + 1)[j]
    }

    /// `A_N = a_0 a_1 ... a_{N-1}`, with `A_0 = 1`.
    pub fn tower_product(&self, n: usize) -> BigInt {
        self.tower_factors(n)
            .into_iter()
            .fold(BigInt::one(), |acc, a| acc * BigInt::from(a))
    }

    /// Number of nontrivial tower levels, `None` when the tower is infinite.
    pub fn tower_length(&self) -> Option<usize> {
        let mut total = 0usize;
        for (_, m) in self.entries() {
            match m {
                Multiplicity::Finite(k) => total += k as usize,
                Multiplicity::Infinite => return None,
            }
        }
        Some(total)
    }

    /// For a spec without infinite primes, `Y = (1/M) Z` with `M` returned here.
    pub fn finite_modulus(&self) -> Option<BigInt> {
        self.tower_length().map(|len| self.tower_product(len))
    }

    /// Smallest `N` with `d | A_N`, or `None` if no such depth exists.
    pub fn depth_for_denominator(&self, d: &BigInt) -> Option<usize> {
        let d = d.abs();
        if d.is_zero() {
            return None;
        }
        let mut rest = d.clone();
        for (p, m) in self.entries() {
            let k = strip_prime(&mut rest, p);
            if let Multiplicity::Finite(cap) = m {
                if k > cap as i64 {
                    return None;
                }
            }
        }
        if !rest.is_one() {
            return None;
        }
        let mut acc = BigInt::one();
        let mut n = 0usize;
        loop {
            if acc.is_multiple_of(&d) {
                return Some(n);
            }
            acc *= BigInt::from(self.tower_factor(n));
            n += 1;
        }
    }

    /// Depth at which the character `y` first becomes visible.
    pub fn depth_of(&self, y: &RationalChar) -> Option<usize> {
        self.depth_for_denominator(y.value().denom())
    }

    /// Membership in the character group.
    pub fn contains(&self, y: &BigRational) -> bool {
        if y.is_zero() {
            return true;
        }
        let mut den = y.denom().clone();
        for (p, m) in self.entries() {
            let k = strip_prime(&mut den, p);
            if let Multiplicity::Finite(cap) = m {
                if k > cap as i64 {
                    return false;
                }
            }
        }
        den.is_one()
    }

    pub fn is_automorphism(&self, alpha: &AutRat) -> bool {
        let strip_all = |n: &BigInt| {
            let mut n = n.abs();
            for p in self.infinite_primes() {
                strip_prime(&mut n, p);
            }
            n.is_one()
        };
        strip_all(alpha.value().numer()) && strip_all(alpha.value().denom())
    }

    pub fn classify(&self) -> SolenoidClass {
        let inf = self.infinite_primes();
        match inf.len() {
            0 => SolenoidClass::NoInfinitePrime,
            1 => SolenoidClass::UniqueInfinitePrime(inf[0]),
            _ => SolenoidClass::MultipleInfinitePrimes(inf),
        }
    }

    /// Human-readable description of `Aut(X)` under the identification with rationals.
    pub fn automorphism_group_description(&self) -> String {
        let inf = self.infinite_primes();
        if inf.is_empty() {
            "{+I, -I}".to_string()
        } else {
            let primes: Vec<String> = inf.iter().map(|p| p.to_string()).collect();
            format!("{{±u/v : u, v products of {{{}}}}}", primes.join(", "))
        }
    }

    pub fn check_automorphism(&self, alpha: &AutRat) -> Result<()> {
        if self.is_automorphism(alpha) {
            Ok(())
        } else {
            Err(Error::NotAnAutomorphism(alpha.to_string()))
        }
    }

    pub fn check_character(&self, y: &RationalChar) -> Result<()> {
        if self.contains(y.value()) {
            Ok(())
        } else {
            Err(Error::CharacterOutsideGroup(y.to_string()))
        }
    }
}

impl fmt::Display for SteinitzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, m)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}: {m}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SteinitzSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serde_json::Map::new();
        for (p, m) in self.entries() {
            let v = match m {
                Multiplicity::Finite(k) => serde_json::Value::from(k),
                Multiplicity::Infinite => serde_json::Value::from("inf"),
            };
            map.insert(p.to_string(), v);
        }
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SteinitzSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let map = BTreeMap::<String, serde_json::Value>::deserialize(d)?;
        let mut entries = Vec::new();
        for (k, v) in map {
            let p: u64 = k
                .trim()
                .parse()
                .map_err(|_| D::Error::custom(format!("bad prime key {k:?}")))?;
            let m = match &v {
                serde_json::Value::String(s) if s == "inf" || s == "∞" => Multiplicity::Infinite,
                serde_json::Value::Number(n) => {
                    let k = n
                        .as_u64()
                        .and_then(|k| u32::try_from(k).ok())
                        .ok_or_else(|| D::Error::custom(format!("bad multiplicity {n}")))?;
                    Multiplicity::Finite(k)
                }
                serde_json::Value::String(s) => {
                    let k: u32 = s
                        .parse()
                        .map_err(|_| D::Error::custom(format!("bad multiplicity {s:?}")))?;
                    Multiplicity::Finite(k)
                }
                other => return Err(D::Error::custom(format!("bad multiplicity {other}"))),
            };
            entries.push((p, m));
        }
        SteinitzSpec::new(entries).map_err(D::Error::custom)
    }
}

/// An element of the character group, an exact rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalChar(BigRational);

impl RationalChar {
    pub fn new(value: BigRational) -> Self {
        Self(value)
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self(rat::rat(n, d))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn valuation(&self, p: u64) -> Valuation {
        rat::valuation_rat(&self.0, p)
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_rational(s).map(Self)
    }
}

impl fmt::Display for RationalChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl From<BigRational> for RationalChar {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl Serialize for RationalChar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rat::serde_rational::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for RationalChar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        rat::serde_rational::deserialize(d).map(Self)
    }
}

/// A nonzero rational `u/v` standing for the automorphism `f_u f_v^{-1}`
/// (and its adjoint, which is the same rational).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AutRat(BigRational);

impl AutRat {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::NotAnAutomorphism("0".into()));
        }
        Ok(Self(value))
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self> {
        Self::new(rat::rat(n, d))
    }

    pub fn identity() -> Self {
        Self(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// The adjoint automorphism of the character group; numerically equal.
    pub fn adjoint(&self) -> AutRat {
        self.clone()
    }

    pub fn compose(&self, other: &AutRat) -> AutRat {
        Self(&self.0 * &other.0)
    }

    pub fn inverse(&self) -> AutRat {
        Self(self.0.recip())
    }

    pub fn apply(&self, y: &RationalChar) -> RationalChar {
        RationalChar(&self.0 * y.value())
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_rational(s)?)
    }
}

impl fmt::Display for AutRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl Serialize for AutRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rat::serde_rational::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for AutRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = rat::serde_rational::deserialize(d)?;
        AutRat::new(r).map_err(D::Error::custom)
    }
}

/// Coefficients `alpha_1, ..., alpha_n` of a linear form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffVector(Vec<AutRat>);

impl CoeffVector {
    pub fn new(coeffs: Vec<AutRat>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        Ok(Self(coeffs))
    }

    pub fn from_ratios(ratios: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            ratios
                .iter()
                .map(|&(n, d)| AutRat::from_ratio(n, d))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `count` copies of `n/d`.
    pub fn repeated(n: i64, d: i64, count: usize) -> Result<Self> {
        Self::new(vec![AutRat::from_ratio(n, d)?; count])
    }

    pub fn parse_list(items: &[&str]) -> Result<Self> {
        Self::new(items.iter().map(|s| AutRat::parse(s)).collect::<Result<Vec<_>>>()?)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AutRat> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[AutRat] {
        &self.0
    }

    /// A single coefficient: allowed, but outside the `n >= 2` regime of the
    /// characterization results.
    pub fn is_degenerate(&self) -> bool {
        self.0.len() < 2
    }

    pub fn sum_of_squares(&self) -> BigRational {
        self.0.iter().map(|a| a.value() * a.value()).sum()
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().map(|a| a.value().clone()).sum()
    }

    pub fn validate(&self, spec: &SteinitzSpec) -> Result<()> {
        self.0.iter().try_for_each(|a| spec.check_automorphism(a))
    }

    /// Distinct coefficients with their multiplicities, in first-seen order.
    pub fn grouped(&self) -> Vec<(AutRat, usize)> {
        let mut out: Vec<(AutRat, usize)> = Vec::new();
        for a in &self.0 {
            match out.iter_mut().find(|(b, _)| b == a) {
                Some((_, k)) => *k += 1,
                None => out.push((a.clone(), 1)),
            }
        }
        out
    }
}

pub fn valuation(y: &RationalChar, p: u64) -> Valuation {
    y.valuation(p)
}

pub fn member_of_y(spec: &SteinitzSpec, y: &RationalChar) -> bool {
    spec.contains(y.value())
}

pub fn is_automorphism(spec: &SteinitzSpec, alpha: &AutRat) -> bool {
    spec.is_automorphism(alpha)
}

pub fn classify_solenoid(spec: &SteinitzSpec) -> SolenoidClass {
    spec.classify()
}

pub fn check_sum_squares_one(coeffs: &CoeffVector) -> bool {
    coeffs.sum_of_squares().is_one()
}

/// All nonnegative integer vectors `(k_1, ..., k_l)` with
/// `sum_j k_j / p^(2j) = 1`, in lexicographic order.
///
/// Equivalently `sum_j k_j p^(2(l-j)) = p^(2l)`; the search walks the
/// residual left to right, so it is exhaustive and exact.
pub fn solve_k_vector(p: u64, l: usize) -> Result<Vec<Vec<u64>>> {
    if !rat::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if l == 0 {
        return Err(Error::PreconditionViolated("l must be at least 1".into()));
    }
    let p2 = (p as u128).checked_mul(p as u128).ok_or_else(|| Error::Overflow(format!("{p}^2")))?;
    let mut weights = vec![1u128; l];
    for j in (0..l - 1).rev() {
        weights[j] = weights[j + 1]
            .checked_mul(p2)
            .ok_or_else(|| Error::Overflow(format!("{p}^(2*{l})")))?;
    }
    let target = weights[0]
        .checked_mul(p2)
        .filter(|t| *t <= u64::MAX as u128)
        .ok_or_else(|| Error::Overflow(format!("{p}^(2*{l})")))?;

    fn walk(j: usize, residual: u128, weights: &[u128], current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j == weights.len() {
            if residual == 0 {
                out.push(current.clone());
            }
            return;
        }
        if j + 1 == weights.len() {
            current.push(residual as u64);
            out.push(current.clone());
            current.pop();
            return;
        }
        for k in 0..=residual / weights[j] {
            current.push(k as u64);
            walk(j + 1, residual - k * weights[j], weights, current, out);
            current.pop();
        }
    }

    let mut out = Vec::new();
    walk(0, target, &weights, &mut Vec::with_capacity(l), &mut out);
    debug_assert!(out.iter().all(|k| has_dominant_entry(p, k)));
    Ok(out)
}

/// Whether some `k_j > p^j` (1-based `j`); every solution of the sum
/// condition has this property.
pub fn has_dominant_entry(p: u64, k: &[u64]) -> bool {
    k.iter().enumerate().any(|(i, &kj)| {
        let bound = (p as u128).checked_pow(i as u32 + 1).unwrap_or(u128::MAX);
        (kj as u128) > bound
    })
}

/// Coefficients of the multiple-prime counterexample:
/// `q^(2a) = p^2 b + 1`, `b` copies of `p/q^a` followed by `1/q^a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleCoeffs {
    pub a: u32,
    #[serde(serialize_with = "serialize_bigint")]
    pub b: BigInt,
    pub coeffs: CoeffVector,
}

fn serialize_bigint<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// Upper limit on `b`; the coefficient vector is materialised in full.
pub const MAX_COUNTEREXAMPLE_LEN: u64 = 1 << 20;

pub fn counterexample_coeffs(p: u64, q: u64) -> Result<CounterexampleCoeffs> {
    for x in [p, q] {
        if !rat::is_prime(x) {
            return Err(Error::NotPrime(x));
        }
    }
    if p == q {
        return Err(Error::PreconditionViolated("p and q must be distinct primes".into()));
    }
    let p2 = BigInt::from(p) * BigInt::from(p);
    let q2 = BigInt::from(q) * BigInt::from(q);
    let step = &q2 % &p2;
    let mut acc = step.clone();
    let mut a = 1u32;
    while !acc.is_one() {
        acc = (&acc * &step) % &p2;
        a += 1;
    }
    let qa = num_traits::pow(BigInt::from(q), a as usize);
    let b = (&qa * &qa - BigInt::one()) / &p2;
    let len = b
        .to_u64()
        .filter(|&b| b < MAX_COUNTEREXAMPLE_LEN)
        .ok_or_else(|| Error::Overflow(format!("b = {b} coefficients")))?;
    let mut coeffs = vec![AutRat::new(BigRational::new(BigInt::from(p), qa.clone()))?; len as usize];
    coeffs.push(AutRat::new(BigRational::new(BigInt::one(), qa))?);
    Ok(CounterexampleCoeffs { a, b, coeffs: CoeffVector::new(coeffs)? })
}

/// Primes dividing a nonzero integer, by trial division.
pub(crate) fn prime_factors(n: &BigInt) -> BTreeSet<u64> {
    let mut n = n.abs();
    let mut out = BTreeSet::new();
    let mut d = 2u64;
    while !n.is_one() && !n.is_zero() {
        let db = BigInt::from(d);
        if &db * &db > n {
            if let Some(last) = n.to_u64() {
                out.insert(last);
            }
            break;
        }
        if strip_prime(&mut n, d) > 0 {
            out.insert(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    out
}
