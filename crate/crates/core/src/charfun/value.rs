//! Exact values of characteristic functions.
//!
//! A value is a finite sum `Σ c · exp(-r) · exp(2πi θ)` with rational `c`,
//! `r` and `θ`. Since `exp(r)` for distinct rationals `r` are linearly
//! independent over the algebraic numbers, the sum vanishes iff every group
//! of equal `r` vanishes, and each group is a rational combination of roots
//! of unity, decided by reduction modulo a cyclotomic polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::rat::{format_rational, frac, to_f64};

/// Root-of-unity orders above this are not reduced exactly.
pub const MAX_EXACT_ORDER: u64 = 4096;

/// Exact symbolic value of a characteristic function at one character.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CfValue {
    // exponent r -> angle θ in [0, 1) -> weight c
    groups: BTreeMap<BigRational, BTreeMap<BigRational, BigRational>>,
}

impl CfValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut v = Self::zero();
        v.push(BigRational::from_integer(1.into()), BigRational::zero(), BigRational::zero());
        v
    }

    /// Add `c · exp(-r) · exp(2πi θ)`.
    pub fn push(&mut self, c: BigRational, r: BigRational, theta: BigRational) {
        if c.is_zero() {
            return;
        }
        let group = self.groups.entry(r.clone()).or_default();
        let slot = group.entry(frac(&theta)).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            group.remove(&frac(&theta));
            if group.is_empty() {
                self.groups.remove(&r);
            }
        }
    }

    pub fn sub(&self, other: &CfValue) -> CfValue {
        let mut out = self.clone();
        for (r, group) in &other.groups {
            for (theta, c) in group {
                out.push(-c.clone(), r.clone(), theta.clone());
            }
        }
        out
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (r, group) in &self.groups {
            let mag = (-to_f64(r)).exp();
            let mut inner = Complex64::new(0.0, 0.0);
            for (theta, c) in group {
                let a = 2.0 * std::f64::consts::PI * to_f64(theta);
                inner += Complex64::new(a.cos(), a.sin()) * to_f64(c);
            }
            total += inner * mag;
        }
        total
    }

    /// Exact zero test; `None` when a root-of-unity order is too large.
    pub fn is_zero(&self) -> Option<bool> {
        let mut undecided = false;
        for group in self.groups.values() {
            match roots_of_unity_sum_is_zero(group) {
                Some(false) => return Some(false),
                Some(true) => {}
                None => undecided = true,
            }
        }
        if undecided {
            None
        } else {
            Some(true)
        }
    }

    pub fn exact_eq(&self, other: &CfValue) -> Option<bool> {
        self.sub(other).is_zero()
    }

    /// The value as an exact rational, when it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.groups.is_empty() {
            return Some(BigRational::zero());
        }
        if self.groups.len() != 1 {
            return None;
        }
        let (r, group) = self.groups.iter().next()?;
        if !r.is_zero() || group.len() != 1 {
            return None;
        }
        let (theta, c) = group.iter().next()?;
        if theta.is_zero() {
            Some(c.clone())
        } else if theta == &BigRational::new(1.into(), 2.into()) {
            Some(-c.clone())
        } else {
            None
        }
    }

    pub fn is_exactly_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r == BigRational::from_integer(1.into()))
    }
}

impl fmt::Display for CfValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        for (r, group) in &self.groups {
            for (theta, c) in group {
                let mut s = format_rational(c);
                if !r.is_zero() {
                    s.push_str(&format!("·exp(-{})", format_rational(r)));
                }
                if !theta.is_zero() {
                    s.push_str(&format!("·exp(2πi·{})", format_rational(theta)));
                }
                parts.push(s);
            }
        }
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for CfValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let z = self.to_complex();
        let mut st = s.serialize_struct("CfValue", 3)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("re", &z.re)?;
        st.serialize_field("im", &z.im)?;
        st.end()
    }
}

fn roots_of_unity_sum_is_zero(group: &BTreeMap<BigRational, BigRational>) -> Option<bool> {
    if group.is_empty() {
        return Some(true);
    }
    // a clear numerical gap settles it without algebra
    let mut z = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (theta, c) in group {
        let a = 2.0 * std::f64::consts::PI * to_f64(theta);
        let cf = to_f64(c);
        z += Complex64::new(a.cos(), a.sin()) * cf;
        scale += cf.abs();
    }
    if z.norm() > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Some(false);
    }
    let n = group
        .keys()
        .fold(BigInt::from(1), |acc, t| acc.lcm(t.denom()));
    let n = n.to_u64().filter(|&n| n <= MAX_EXACT_ORDER)?;
    let n_us = n as usize;
    let mut poly = vec![BigRational::zero(); n_us];
    for (theta, c) in group {
        let k = (theta * BigRational::from_integer(BigInt::from(n))).to_integer();
        let k = k.to_usize().expect("angle in [0, 1)");
        poly[k] += c;
    }
    let phi = cyclotomic(n);
    let deg = phi.len() - 1;
    for i in (deg..n_us).rev() {
        if poly[i].is_zero() {
            continue;
        }
        let lead = poly[i].clone();
        for (j, &a) in phi.iter().enumerate() {
            if a != 0 {
                poly[i - deg + j] -= &lead * BigRational::from_integer(BigInt::from(a));
            }
        }
    }
    Some(poly.iter().all(|c| c.is_zero()))
}

fn mobius(mut n: u64) -> i8 {
    let mut sign = 1i8;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic(n: u64) -> Vec<i64> {
    let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    let mut poly = vec![1i64];
    for &d in &divisors {
        if mobius(n / d) == 1 {
            // multiply by x^d - 1
            let mut next = vec![0i64; poly.len() + d as usize];
            for (i, &c) in poly.iter().enumerate() {
                next[i + d as usize] += c;
                next[i] -= c;
            }
            poly = next;
        }
    }
    for &d in &divisors {
        if mobius(n / d) == -1 {
            // exact division by x^d - 1
            let d = d as usize;
            let qdeg = poly.len() - 1 - d;
            let mut q = vec![0i64; qdeg + 1];
            for i in (0..=qdeg).rev() {
                q[i] = poly[i + d] + if i + d <= qdeg { q[i + d] } else { 0 };
            }
            poly = q;
        }
    }
    poly
}

/// `exp(-r)` magnitude as a float, for reporting.
pub fn decay(r: &BigRational) -> f64 {
    if r.is_negative() {
        f64::INFINITY
    } else {
        (-to_f64(r)).exp()
    }
}
