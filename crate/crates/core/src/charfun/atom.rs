//! Finite sums of terms `c · exp(-σ y²) · exp(2πi s y)`.
//!
//! The shift `s` is a rational point of the one-parameter subgroup, so the
//! character of a term is `y -> exp(2πi s y)` for every `y ∈ Y` and shifts
//! add and scale exactly.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::value::CfValue;
use crate::error::{Error, Result};
use crate::rat::{rem_euclid, serde_rational};

/// Default cap on the number of terms in one atom.
pub const DEFAULT_TERM_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "c", with = "serde_rational")]
    pub weight: BigRational,
    #[serde(with = "serde_rational")]
    pub sigma: BigRational,
    #[serde(with = "serde_rational")]
    pub shift: BigRational,
}

impl Term {
    pub fn new(weight: BigRational, sigma: BigRational, shift: BigRational) -> Self {
        Self { weight, sigma, shift }
    }

    pub fn constant(weight: BigRational) -> Self {
        Self::new(weight, BigRational::zero(), BigRational::zero())
    }
}

/// Canonical form: shifts reduced modulo a period, equal `(σ, s)` merged,
/// zero weights dropped, terms sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Atom {
    terms: Vec<Term>,
}

impl Atom {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>, period: Option<&BigRational>) -> Self {
        let mut raw: Vec<Term> = terms
            .into_iter()
            .filter(|t| !t.weight.is_zero())
            .map(|mut t| {
                if let Some(m) = period {
                    t.shift = rem_euclid(&t.shift, m);
                }
                t
            })
            .collect();
        raw.sort_by(|a, b| (&a.sigma, &a.shift).cmp(&(&b.sigma, &b.shift)));
        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.last_mut() {
                Some(last) if last.sigma == t.sigma && last.shift == t.shift => last.weight += t.weight,
                _ => terms.push(t),
            }
        }
        terms.retain(|t| !t.weight.is_zero());
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_weight(&self) -> BigRational {
        self.terms.iter().map(|t| &t.weight).sum()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.terms.iter().any(|t| t.weight.is_negative())
    }

    pub fn eval(&self, y: &BigRational) -> CfValue {
        let mut v = CfValue::zero();
        let y2 = y * y;
        for t in &self.terms {
            v.push(t.weight.clone(), &t.sigma * &y2, &t.shift * y);
        }
        v
    }

    pub fn mul(&self, other: &Atom, period: Option<&BigRational>, budget: usize) -> Result<Atom> {
        if self.terms.len().saturating_mul(other.terms.len()) > budget * budget {
            return Err(Error::TooManyTerms(budget));
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                prods.push(Term::new(&a.weight * &b.weight, &a.sigma + &b.sigma, &a.shift + &b.shift));
            }
        }
        Self::from_terms(prods, period).within(budget)
    }

    pub fn plus(&self, other: &Atom, period: Option<&BigRational>, budget: usize) -> Result<Atom> {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).cloned(), period).within(budget)
    }

    pub fn scaled(&self, w: &BigRational) -> Atom {
        Self::from_terms(
            self.terms.iter().map(|t| Term::new(&t.weight * w, t.sigma.clone(), t.shift.clone())),
            None,
        )
    }

    pub fn conj(&self, period: Option<&BigRational>) -> Atom {
        Self::from_terms(
            self.terms.iter().map(|t| Term::new(t.weight.clone(), t.sigma.clone(), -&t.shift)),
            period,
        )
    }

    /// The atom of `y -> g(alpha y)`.
    pub fn precompose(&self, alpha: &BigRational, period: Option<&BigRational>) -> Atom {
        let a2 = alpha * alpha;
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term::new(t.weight.clone(), &t.sigma * &a2, &t.shift * alpha)),
            period,
        )
    }

    /// Re-canonicalize with a coarser period.
    pub fn reduced(&self, period: Option<&BigRational>) -> Atom {
        Self::from_terms(self.terms.iter().cloned(), period)
    }

    fn within(self, budget: usize) -> Result<Atom> {
        if self.terms.len() > budget {
            Err(Error::TooManyTerms(budget))
        } else {
            Ok(self)
        }
    }

    /// Every shift in the same class modulo `period` (or equal, without one).
    pub fn shifts_agree(&self, period: Option<&BigRational>) -> bool {
        let mut classes = self.terms.iter().map(|t| match period {
            Some(m) => rem_euclid(&t.shift, m),
            None => t.shift.clone(),
        });
        match classes.next() {
            None => true,
            Some(first) => classes.all(|c| c == first),
        }
    }
}
