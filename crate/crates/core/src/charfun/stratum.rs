//! Valuation-defined subsets of the character group.
//!
//! A [`Stratum`] is a conjunction of per-prime conditions `v_p(y) ∈ S_p`,
//! intersected with `Y`. Each `S_p` is a [`ValSet`]: an interval of finite
//! valuations, optionally together with `+∞` (the valuation of zero).
//! These sets are closed under intersection, and complements are finite
//! disjoint unions of them, which is all the piecewise algebra needs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rat::{prime_power, valuation_rat, Valuation};
use crate::solenoid::SteinitzSpec;

/// A set of valuations: `{v ∈ Z : lo <= v <= hi}` plus `+∞` when `zero`.
///
/// Invariant: `zero` implies the finite part is empty or unbounded above.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValSet {
    finite: Option<(Option<i64>, Option<i64>)>,
    zero: bool,
}

impl ValSet {
    pub fn full() -> Self {
        Self { finite: Some((None, None)), zero: true }
    }

    pub fn at_least(k: i64) -> Self {
        Self { finite: Some((Some(k), None)), zero: true }
    }

    pub fn at_most(k: i64) -> Self {
        Self { finite: Some((None, Some(k))), zero: false }
    }

    pub fn exactly(k: i64) -> Self {
        Self { finite: Some((Some(k), Some(k))), zero: false }
    }

    pub fn only_zero() -> Self {
        Self { finite: None, zero: true }
    }

    pub fn nonzero() -> Self {
        Self { finite: Some((None, None)), zero: false }
    }

    pub fn bounds(&self) -> Option<(Option<i64>, Option<i64>)> {
        self.finite
    }

    pub fn includes_zero(&self) -> bool {
        self.zero
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_none() && !self.zero
    }

    pub fn contains(&self, v: Valuation) -> bool {
        match v {
            Valuation::Infinite => self.zero,
            Valuation::Finite(v) => match self.finite {
                None => false,
                Some((lo, hi)) => lo.is_none_or(|lo| v >= lo) && hi.is_none_or(|hi| v <= hi),
            },
        }
    }

    fn from_parts(finite: Option<(Option<i64>, Option<i64>)>, zero: bool) -> Self {
        let finite = match finite {
            Some((Some(lo), Some(hi))) if lo > hi => None,
            other => other,
        };
        Self { finite, zero }
    }

    pub fn intersect(&self, other: &ValSet) -> ValSet {
        let finite = match (self.finite, other.finite) {
            (Some((l1, h1)), Some((l2, h2))) => {
                let lo = match (l1, l2) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, None) => a,
                    (None, b) => b,
                };
                let hi = match (h1, h2) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, None) => a,
                    (None, b) => b,
                };
                Some((lo, hi))
            }
            _ => None,
        };
        Self::from_parts(finite, self.zero && other.zero)
    }

    /// Disjoint pieces whose union is the complement in `Z ∪ {+∞}`.
    pub fn complement(&self) -> Vec<ValSet> {
        let mut pieces = Vec::new();
        match self.finite {
            None => pieces.push(Self { finite: Some((None, None)), zero: !self.zero }),
            Some((lo, hi)) => {
                if let Some(lo) = lo {
                    pieces.push(Self::from_parts(Some((None, Some(lo - 1))), false));
                }
                match hi {
                    Some(hi) => pieces.push(Self::from_parts(Some((Some(hi + 1), None)), !self.zero)),
                    None if !self.zero => pieces.push(Self::only_zero()),
                    None => {}
                }
            }
        }
        pieces.retain(|p| !p.is_empty());
        pieces
    }

    /// `{v + d : v ∈ self}`.
    pub fn shifted(&self, d: i64) -> ValSet {
        let finite = self.finite.map(|(lo, hi)| (lo.map(|l| l + d), hi.map(|h| h + d)));
        Self { finite, zero: self.zero }
    }

    /// Clamp to the valuation floor of `Y` at this prime.
    fn clamp_to_floor(&self, floor: Option<i64>) -> ValSet {
        let finite = self.finite.map(|(lo, hi)| {
            let lo = match (lo, floor) {
                (Some(l), Some(f)) => Some(l.max(f)),
                (None, f) => f,
                (l, None) => l,
            };
            (lo, hi)
        });
        Self::from_parts(finite, self.zero)
    }

    fn is_full_for(&self, floor: Option<i64>) -> bool {
        self.zero && self.finite == Some((floor, None))
    }

    /// Union when it is again a `ValSet`.
    fn union(&self, other: &ValSet) -> Option<ValSet> {
        let zero = self.zero || other.zero;
        let finite = match (self.finite, other.finite) {
            (None, f) | (f, None) => f,
            (Some((l1, h1)), Some((l2, h2))) => {
                // order by lower end, require overlap or adjacency
                let ((la, ha), (lb, hb)) = if l1.map_or(i64::MIN, |x| x) <= l2.map_or(i64::MIN, |x| x) {
                    ((l1, h1), (l2, h2))
                } else {
                    ((l2, h2), (l1, h1))
                };
                let touches = match (ha, lb) {
                    (None, _) | (_, None) => true,
                    (Some(h), Some(l)) => l <= h + 1,
                };
                if !touches {
                    return None;
                }
                let hi = match (ha, hb) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
                Some((la, hi))
            }
        };
        let merged = Self::from_parts(finite, zero);
        if merged.zero && matches!(merged.finite, Some((_, Some(_)))) {
            return None;
        }
        Some(merged)
    }

    /// Conditions in the `{prime, op, k}` grammar.
    pub(crate) fn constraints(&self, prime: u64) -> Vec<Constraint> {
        let mut out = Vec::new();
        match self.finite {
            None => {
                if self.zero {
                    out.push(Constraint { prime, op: ConstraintOp::Eq, k: ConstraintBound::Inf });
                }
            }
            Some((lo, hi)) => {
                match (lo, hi) {
                    (Some(l), Some(h)) if l == h => {
                        out.push(Constraint { prime, op: ConstraintOp::Eq, k: ConstraintBound::Int(l) })
                    }
                    _ => {
                        if let Some(l) = lo {
                            out.push(Constraint { prime, op: ConstraintOp::Ge, k: ConstraintBound::Int(l) });
                        }
                        if let Some(h) = hi {
                            out.push(Constraint { prime, op: ConstraintOp::Le, k: ConstraintBound::Int(h) });
                        }
                    }
                }
                if hi.is_none() && !self.zero {
                    out.push(Constraint { prime, op: ConstraintOp::Ne, k: ConstraintBound::Inf });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintOp {
    #[serde(rename = ">=", alias = "≥")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=", alias = "≤")]
    Le,
    #[serde(rename = "!=", alias = "≠")]
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintBound {
    Int(i64),
    Inf,
}

impl Serialize for ConstraintBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ConstraintBound::Int(k) => s.serialize_i64(*k),
            ConstraintBound::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ConstraintBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(ConstraintBound::Int)
                .ok_or_else(|| D::Error::custom(format!("bad valuation bound {n}"))),
            serde_json::Value::String(s) if s == "inf" || s == "∞" => Ok(ConstraintBound::Inf),
            serde_json::Value::String(s) => s
                .parse()
                .map(ConstraintBound::Int)
                .map_err(|_| D::Error::custom(format!("bad valuation bound {s:?}"))),
            other => Err(D::Error::custom(format!("bad valuation bound {other}"))),
        }
    }
}

/// One condition `v_prime(y) op k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub prime: u64,
    pub op: ConstraintOp,
    pub k: ConstraintBound,
}

impl Constraint {
    pub(crate) fn to_valset(self) -> Option<ValSet> {
        use ConstraintBound::*;
        use ConstraintOp::*;
        Some(match (self.op, self.k) {
            (Ge, Int(k)) => ValSet::at_least(k),
            (Ge, Inf) | (Eq, Inf) => ValSet::only_zero(),
            (Eq, Int(k)) => ValSet::exactly(k),
            (Le, Int(k)) => ValSet::at_most(k),
            (Le, Inf) => ValSet::full(),
            (Ne, Inf) => ValSet::nonzero(),
            (Ne, Int(_)) => return None,
        })
    }
}

/// A conjunction of valuation conditions, always normalized against a spec:
/// bounds looser than those of `Y` itself are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Stratum {
    cons: BTreeMap<u64, ValSet>,
}

impl Stratum {
    /// All of `Y`.
    pub fn whole() -> Self {
        Self::default()
    }

    /// `{0}`.
    pub fn zero_only() -> Self {
        Self { cons: [(2, ValSet::only_zero())].into_iter().collect() }
    }

    /// Build and normalize; `None` if the set is empty.
    pub fn from_conditions(
        spec: &SteinitzSpec,
        conditions: impl IntoIterator<Item = (u64, ValSet)>,
    ) -> Option<Stratum> {
        let mut cons: BTreeMap<u64, ValSet> = BTreeMap::new();
        for (p, set) in conditions {
            let merged = match cons.get(&p) {
                Some(prev) => prev.intersect(&set),
                None => set,
            };
            cons.insert(p, merged);
        }
        Self { cons }.normalized(spec)
    }

    pub fn conditions(&self) -> impl Iterator<Item = (u64, &ValSet)> {
        self.cons.iter().map(|(&p, s)| (p, s))
    }

    pub fn condition(&self, p: u64) -> Option<&ValSet> {
        self.cons.get(&p)
    }

    fn normalized(mut self, spec: &SteinitzSpec) -> Option<Stratum> {
        let mut only_zero = false;
        let mut all_zero = true;
        for (p, set) in self.cons.iter_mut() {
            *set = set.clamp_to_floor(spec.valuation_floor(*p));
            if set.is_empty() {
                return None;
            }
            only_zero |= set.finite.is_none();
            all_zero &= set.zero;
        }
        if only_zero {
            return if all_zero { Some(Self::zero_only()) } else { None };
        }
        self.cons.retain(|&p, set| !set.is_full_for(spec.valuation_floor(p)));
        Some(self)
    }

    pub fn is_zero_only(&self) -> bool {
        self.cons.values().any(|s| s.finite.is_none())
    }

    pub fn is_whole(&self) -> bool {
        self.cons.is_empty()
    }

    pub fn includes_zero(&self) -> bool {
        self.cons.values().all(|s| s.zero)
    }

    /// Membership for an element already known to lie in `Y`.
    pub fn contains(&self, y: &BigRational) -> bool {
        self.cons.iter().all(|(&p, set)| set.contains(valuation_rat(y, p)))
    }

    pub fn intersect(&self, other: &Stratum, spec: &SteinitzSpec) -> Option<Stratum> {
        let conds = self
            .cons
            .iter()
            .chain(other.cons.iter())
            .map(|(&p, s)| (p, s.clone()));
        Self::from_conditions(spec, conds)
    }

    /// Disjoint strata covering `Y` minus this stratum.
    pub fn complement(&self, spec: &SteinitzSpec) -> Vec<Stratum> {
        let mut out = Vec::new();
        let mut prefix: Vec<(u64, ValSet)> = Vec::new();
        for (&p, set) in &self.cons {
            for piece in set.complement() {
                let mut conds = prefix.clone();
                conds.push((p, piece));
                if let Some(s) = Self::from_conditions(spec, conds) {
                    out.push(s);
                }
            }
            prefix.push((p, set.clone()));
        }
        out
    }

    /// Disjoint strata covering `self` minus `other`.
    pub fn subtract(&self, other: &Stratum, spec: &SteinitzSpec) -> Vec<Stratum> {
        if self.intersect(other, spec).is_none() {
            return vec![self.clone()];
        }
        other
            .complement(spec)
            .iter()
            .filter_map(|c| self.intersect(c, spec))
            .collect()
    }

    /// Image under `y -> y / alpha`: the set of `y` with `alpha y` in `self`.
    pub fn pullback(&self, alpha: &BigRational, spec: &SteinitzSpec) -> Option<Stratum> {
        let conds = self.cons.iter().map(|(&p, set)| {
            let shift = match valuation_rat(alpha, p) {
                Valuation::Finite(v) => v,
                Valuation::Infinite => 0,
            };
            (p, set.shifted(-shift))
        });
        Self::from_conditions(spec, conds)
    }

    /// Try to merge two disjoint strata into one.
    pub fn union(&self, other: &Stratum, spec: &SteinitzSpec) -> Option<Stratum> {
        let full = ValSet::full();
        let primes: std::collections::BTreeSet<u64> =
            self.cons.keys().chain(other.cons.keys()).copied().collect();
        let mut differing = None;
        for &p in &primes {
            let a = self.cons.get(&p).unwrap_or(&full).clamp_to_floor(spec.valuation_floor(p));
            let b = other.cons.get(&p).unwrap_or(&full).clamp_to_floor(spec.valuation_floor(p));
            if a != b {
                if differing.is_some() {
                    return None;
                }
                differing = Some((p, a, b));
            }
        }
        let (p, a, b) = differing?;
        let merged = a.union(&b)?;
        let conds = self
            .cons
            .iter()
            .filter(|(&q, _)| q != p)
            .map(|(&q, s)| (q, s.clone()))
            .chain(std::iter::once((p, merged)));
        Self::from_conditions(spec, conds)
    }

    /// Thresholds of the subgroup generated by this stratum.
    pub fn generated_subgroup(&self, spec: &SteinitzSpec) -> SubgroupSpec {
        if self.is_zero_only() {
            return SubgroupSpec::trivial();
        }
        let thresholds = self
            .cons
            .iter()
            .filter_map(|(&p, set)| match set.finite {
                Some((Some(lo), _)) => Some((p, lo)),
                _ => None,
            });
        SubgroupSpec::new(spec, thresholds)
    }

    /// Serializable condition list.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.cons.iter().flat_map(|(&p, s)| s.constraints(p)).collect()
    }

    pub fn from_constraints(spec: &SteinitzSpec, cons: &[Constraint]) -> Result<Option<Stratum>, String> {
        let mut conds = Vec::new();
        for c in cons {
            if !crate::rat::is_prime(c.prime) {
                return Err(format!("{} is not prime", c.prime));
            }
            let set = c
                .to_valset()
                .ok_or_else(|| format!("unsupported condition on prime {}", c.prime))?;
            conds.push((c.prime, set));
        }
        Ok(Self::from_conditions(spec, conds))
    }

    /// Deterministic sample of elements, simplest first.
    ///
    /// Exponents are drawn near the ends of each constrained interval; spec
    /// primes without a constraint contribute small denominators, and a few
    /// units coprime to the constrained primes are mixed in.
    pub fn sample_points(&self, spec: &SteinitzSpec, budget: usize) -> Vec<BigRational> {
        if self.is_zero_only() {
            return vec![BigRational::zero()];
        }
        let mut axes: Vec<(u64, Vec<i64>)> = Vec::new();
        for (&p, set) in &self.cons {
            let (lo, hi) = set.finite.expect("nonempty finite part");
            let lo_eff = lo.unwrap_or_else(|| hi.map_or(-2, |h| h - 2));
            let hi_eff = hi.unwrap_or(lo_eff + 2);
            let mut opts = vec![lo_eff];
            for cand in [lo_eff + 1, hi_eff, lo_eff + 2] {
                if cand <= hi_eff && !opts.contains(&cand) {
                    opts.push(cand);
                }
            }
            axes.push((p, opts));
        }
        for (p, _) in spec.entries() {
            if self.cons.contains_key(&p) {
                continue;
            }
            let floor = spec.valuation_floor(p).unwrap_or(-3).max(-3);
            let opts: Vec<i64> = [0, -1, -2, -3, 1].into_iter().filter(|&e| e >= floor).collect();
            axes.push((p, opts));
        }
        let constrained: Vec<u64> = self.cons.keys().copied().collect();
        let units: Vec<i64> = [1i64, -1, 3, -5, 7, 11, -13, 5, -7, 17]
            .into_iter()
            .filter(|u| constrained.iter().all(|&p| u.unsigned_abs() % p != 0))
            .collect();

        let mut out = Vec::new();
        let combos: usize = axes.iter().map(|(_, o)| o.len()).product();
        'outer: for &u in &units {
            for idx in 0..combos {
                let mut rem = idx;
                let mut y = BigRational::from_integer(BigInt::from(u));
                for (p, opts) in &axes {
                    let e = opts[rem % opts.len()];
                    rem /= opts.len();
                    y *= prime_power(*p, e);
                }
                if spec.contains(&y) && self.contains(&y) && !out.contains(&y) {
                    out.push(y);
                    if out.len() >= budget {
                        break 'outer;
                    }
                }
            }
        }
        if self.includes_zero() && out.len() < budget {
            out.push(BigRational::zero());
        }
        out
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cons.is_empty() {
            return f.write_str("Y");
        }
        let parts: Vec<String> = self
            .constraints()
            .iter()
            .map(|c| {
                let op = match c.op {
                    ConstraintOp::Ge => ">=",
                    ConstraintOp::Eq => "=",
                    ConstraintOp::Le => "<=",
                    ConstraintOp::Ne => "!=",
                };
                let k = match c.k {
                    ConstraintBound::Int(k) => k.to_string(),
                    ConstraintBound::Inf => "inf".into(),
                };
                format!("v_{}{op}{k}", c.prime)
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A subgroup `E = {y ∈ Y : v_p(y) >= t_p}` of the character group, or the
/// trivial subgroup `{0}`. Its annihilator `K = A(X, E)` is the compact
/// subgroup carrying the corresponding Haar distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    #[serde(default, with = "threshold_map")]
    thresholds: BTreeMap<u64, i64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    trivial: bool,
}

mod threshold_map {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &BTreeMap<u64, i64>, s: S) -> Result<S::Ok, S::Error> {
        let as_str: BTreeMap<String, i64> = m.iter().map(|(p, t)| (p.to_string(), *t)).collect();
        as_str.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, i64>, D::Error> {
        use serde::de::Error as _;
        let raw = BTreeMap::<String, i64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let p: u64 = k.parse().map_err(|_| D::Error::custom(format!("bad prime {k:?}")))?;
                if !crate::rat::is_prime(p) {
                    return Err(D::Error::custom(format!("{p} is not prime")));
                }
                Ok((p, v))
            })
            .collect()
    }
}

impl SubgroupSpec {
    /// `E = Y`, so `K = {0}`.
    pub fn whole() -> Self {
        Self::default()
    }

    /// `E = {0}`, so `K = X`.
    pub fn trivial() -> Self {
        Self { thresholds: BTreeMap::new(), trivial: true }
    }

    /// Thresholds no stronger than `Y`'s own floor are dropped.
    pub fn new(spec: &SteinitzSpec, thresholds: impl IntoIterator<Item = (u64, i64)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, t) in thresholds {
            let t = match map.get(&p) {
                Some(&prev) if prev > t => prev,
                _ => t,
            };
            map.insert(p, t);
        }
        map.retain(|&p, t| spec.valuation_floor(p).is_none_or(|f| *t > f));
        Self { thresholds: map, trivial: false }
    }

    pub fn normalized(&self, spec: &SteinitzSpec) -> Self {
        if self.trivial {
            Self::trivial()
        } else {
            Self::new(spec, self.thresholds.iter().map(|(&p, &t)| (p, t)))
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn is_whole(&self) -> bool {
        !self.trivial && self.thresholds.is_empty()
    }

    pub fn threshold(&self, p: u64) -> Option<i64> {
        self.thresholds.get(&p).copied()
    }

    pub fn thresholds(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.thresholds.iter().map(|(&p, &t)| (p, t))
    }

    pub fn contains(&self, y: &BigRational) -> bool {
        if self.trivial {
            return y.is_zero();
        }
        self.thresholds
            .iter()
            .all(|(&p, &t)| valuation_rat(y, p) >= Valuation::Finite(t))
    }

    pub fn to_stratum(&self, spec: &SteinitzSpec) -> Stratum {
        if self.trivial {
            return Stratum::zero_only();
        }
        Stratum::from_conditions(spec, self.thresholds.iter().map(|(&p, &t)| (p, ValSet::at_least(t))))
            .expect("valuation lower bounds define a nonempty set")
    }

    /// Is `E` closed under division by `p` (no finite threshold at `p`)?
    pub fn divisible_by(&self, p: u64) -> bool {
        self.trivial || !self.thresholds.contains_key(&p)
    }

    /// If `E = gZ` is cyclic, its generator `g > 0`.
    pub fn cyclic_generator(&self, spec: &SteinitzSpec) -> Option<BigRational> {
        if self.trivial {
            return None;
        }
        let mut g = BigRational::one();
        for (p, m) in spec.entries() {
            match (self.thresholds.get(&p), m) {
                (Some(&t), _) => g *= prime_power(p, t),
                (None, crate::solenoid::Multiplicity::Infinite) => return None,
                (None, crate::solenoid::Multiplicity::Finite(k)) => g *= prime_power(p, -(k as i64)),
            }
        }
        for (&p, &t) in &self.thresholds {
            if spec.multiplicity(p) == crate::solenoid::Multiplicity::Finite(0) {
                g *= prime_power(p, t);
            }
        }
        Some(g)
    }

    /// `d_N`: least `m > 0` with `m / A_N ∈ E`.
    pub fn fiber_order(&self, spec: &SteinitzSpec, depth: usize) -> Option<BigInt> {
        if self.trivial {
            return None;
        }
        let a_n = BigRational::from_integer(spec.tower_product(depth));
        // {m : m/A_N ∈ E} = dZ where v_p(d) = max(0, t_p + v_p(A_N))
        let mut d = BigRational::one();
        for (&p, &t) in &self.thresholds {
            let va = match valuation_rat(&a_n, p) {
                Valuation::Finite(v) => v,
                Valuation::Infinite => 0,
            };
            d *= prime_power(p, (t + va).max(0));
        }
        Some(d.to_integer())
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trivial {
            return f.write_str("{0}");
        }
        if self.thresholds.is_empty() {
            return f.write_str("Y");
        }
        let parts: Vec<String> = self.thresholds.iter().map(|(p, t)| format!("v_{p}>={t}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
