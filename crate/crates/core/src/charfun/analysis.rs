//! Exact comparison, the equidistribution equation, supports and
//! Gaussian-times-Haar decomposition.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::atom::Atom;
use super::cf::{cf_power, cf_precompose, cf_product, global_period, stratum_period, StratifiedCF};
use super::stratum::{Stratum, SubgroupSpec};
use super::value::CfValue;
use crate::error::{Error, Result};
use crate::rat::{format_rational, rem_euclid};
use crate::solenoid::{CoeffVector, RationalChar};

/// Probe budget per stratum when hunting for a witness.
const PROBES_PER_CELL: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CfComparison {
    Equal,
    Differs { witness: RationalChar, lhs: String, rhs: String },
    Unknown { reason: String },
}

fn canonical_on(stratum: &Stratum, atom: Option<&Atom>, period: Option<&BigRational>) -> Atom {
    let atom = atom.cloned().unwrap_or_default();
    if stratum.is_zero_only() {
        return Atom::from_terms([super::atom::Term::constant(atom.total_weight())], None);
    }
    atom.reduced(period)
}

/// Decide `f = g` on all of `Y`.
pub fn cf_equal(f: &StratifiedCF, g: &StratifiedCF) -> Result<CfComparison> {
    if f.spec() != g.spec() {
        return Err(Error::SpecMismatch);
    }
    let spec = f.spec();
    let mut unknown = None;
    for (s, a, b) in f.overlay(g) {
        let period = stratum_period(spec, &s);
        if canonical_on(&s, a, period.as_ref()) == canonical_on(&s, b, period.as_ref()) {
            continue;
        }
        let zero = Atom::zero();
        let (a, b) = (a.unwrap_or(&zero), b.unwrap_or(&zero));
        let mut all_equal = true;
        for y in s.sample_points(spec, PROBES_PER_CELL) {
            let (va, vb) = (a.eval(&y), b.eval(&y));
            match va.exact_eq(&vb) {
                Some(false) => {
                    return Ok(CfComparison::Differs {
                        witness: RationalChar::new(y),
                        lhs: va.to_string(),
                        rhs: vb.to_string(),
                    })
                }
                Some(true) => {}
                None => all_equal = false,
            }
        }
        let why = if all_equal {
            format!("atoms differ symbolically on {s} but agree at every probe")
        } else {
            format!("root-of-unity order too large to compare on {s}")
        };
        unknown.get_or_insert(why);
    }
    Ok(match unknown {
        None => CfComparison::Equal,
        Some(reason) => CfComparison::Unknown { reason },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum EquationVerdict {
    Holds,
    Fails { witness: RationalChar, lhs: String, rhs: String },
    Unknown { reason: String },
}

impl EquationVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, EquationVerdict::Holds)
    }
}

/// The right-hand side `y -> Π_j f(α_j y)`.
pub fn equation_rhs(f: &StratifiedCF, coeffs: &CoeffVector) -> Result<StratifiedCF> {
    coeffs.validate(f.spec())?;
    let mut g = super::cf::cf_constant(f.spec(), BigRational::one());
    for (alpha, k) in coeffs.grouped() {
        let part = cf_power(&cf_precompose(f, &alpha)?, k)?;
        g = cf_product(&g, &part)?;
    }
    Ok(g)
}

/// Decide `f(y) = Π_j f(α_j y)` for all `y`, which holds iff the linear
/// form `Σ α_j ξ_j` of i.i.d. copies is distributed as `ξ_1`.
pub fn check_functional_equation(f: &StratifiedCF, coeffs: &CoeffVector) -> Result<EquationVerdict> {
    let g = match equation_rhs(f, coeffs) {
        Ok(g) => g,
        Err(Error::TooManyTerms(n)) => {
            return Ok(EquationVerdict::Unknown { reason: format!("right-hand side exceeds {n} terms") })
        }
        Err(e) => return Err(e),
    };
    Ok(match cf_equal(f, &g)? {
        CfComparison::Equal => EquationVerdict::Holds,
        CfComparison::Differs { witness, lhs, rhs } => EquationVerdict::Fails { witness, lhs, rhs },
        CfComparison::Unknown { reason } => EquationVerdict::Unknown { reason },
    })
}

/// `{y : f(y) != 0}` as a union of strata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub strata: Vec<Stratum>,
    /// False when some atom may vanish inside its stratum.
    pub exact: bool,
}

fn nowhere_zero(atom: &Atom, period: Option<&BigRational>) -> bool {
    match atom.terms() {
        [] => false,
        [_] => true,
        terms => !atom.has_negative_weight() && terms.len() > 1 && atom.shifts_agree(period),
    }
}

pub fn cf_support(f: &StratifiedCF) -> Support {
    let spec = f.spec();
    let mut exact = true;
    let strata = f
        .cells()
        .iter()
        .map(|c| {
            let period = if c.stratum.is_zero_only() { None } else { stratum_period(spec, &c.stratum) };
            if !c.stratum.is_zero_only() && !nowhere_zero(&c.atom, period.as_ref()) {
                exact = false;
            }
            c.stratum.clone()
        })
        .collect();
    Support { strata, exact }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SubgroupDecision {
    Yes { subgroup: SubgroupSpec },
    No { witness: Option<(RationalChar, RationalChar)>, reason: String },
    Unknown { reason: String },
}

/// Is the support a subgroup of `Y`? Every subgroup reachable here has
/// valuation-threshold form, so the support is compared with the smallest
/// such group containing it.
pub fn support_is_subgroup(f: &StratifiedCF) -> SubgroupDecision {
    let spec = f.spec();
    let support = cf_support(f);
    if !support.exact {
        return SubgroupDecision::Unknown { reason: "an atom may vanish inside its stratum".into() };
    }
    let strata = &support.strata;
    if strata.is_empty() {
        return SubgroupDecision::No { witness: None, reason: "function vanishes identically".into() };
    }
    let contains = |y: &BigRational| strata.iter().any(|s| s.contains(y));
    let samples: Vec<BigRational> = strata.iter().flat_map(|s| s.sample_points(spec, 16)).collect();
    if !contains(&BigRational::zero()) {
        let y = samples.iter().find(|y| !y.is_zero()).cloned();
        return SubgroupDecision::No {
            witness: y.map(|y| (RationalChar::new(y.clone()), RationalChar::new(-y))),
            reason: "0 is outside the support".into(),
        };
    }
    let hull = threshold_hull(f, strata);
    let mut rest = vec![hull.to_stratum(spec)];
    for s in strata {
        rest = rest.iter().flat_map(|r| r.subtract(s, spec)).collect();
    }
    if rest.is_empty() {
        return SubgroupDecision::Yes { subgroup: hull };
    }
    let witness = samples.iter().find_map(|a| {
        samples
            .iter()
            .find(|b| !contains(&(a + *b)))
            .map(|b| (RationalChar::new(a.clone()), RationalChar::new(b.clone())))
    });
    SubgroupDecision::No { witness, reason: format!("support misses {} of its generated subgroup", rest[0]) }
}

/// Smallest threshold subgroup containing every stratum.
fn threshold_hull(f: &StratifiedCF, strata: &[Stratum]) -> SubgroupSpec {
    let spec = f.spec();
    let live: Vec<&Stratum> = strata.iter().filter(|s| !s.is_zero_only()).collect();
    if live.is_empty() {
        return SubgroupSpec::trivial();
    }
    let primes: std::collections::BTreeSet<u64> =
        live.iter().flat_map(|s| s.conditions().map(|(p, _)| p)).collect();
    let mut thresholds = Vec::new();
    'prime: for p in primes {
        let mut t = i64::MAX;
        for s in &live {
            match s.condition(p).and_then(|set| set.bounds()).and_then(|(lo, _)| lo) {
                Some(lo) => t = t.min(lo),
                None => continue 'prime,
            }
        }
        thresholds.push((p, t));
    }
    SubgroupSpec::new(spec, thresholds)
}

/// `f = (x, ·) exp(-σ ·²) 1_E`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Shift as a point of the one-parameter subgroup, reduced modulo the
    /// period seen by `E` when `E` is cyclic.
    #[serde(with = "crate::rat::serde_rational")]
    pub shift: BigRational,
    #[serde(with = "crate::rat::serde_rational")]
    pub sigma: BigRational,
    pub subgroup: SubgroupSpec,
    /// `E` is divisible by every infinite prime, i.e. `f_p(K) = K` for all
    /// automorphisms `f_p`.
    pub p_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Extraction {
    Decomposition(Decomposition),
    NotOfForm { reason: String },
    Unknown { reason: String },
}

pub fn extract_gaussian_haar(f: &StratifiedCF) -> Extraction {
    let spec = f.spec();
    let e = match support_is_subgroup(f) {
        SubgroupDecision::Yes { subgroup } => subgroup,
        SubgroupDecision::No { reason, .. } => {
            return Extraction::NotOfForm { reason: format!("support is not a subgroup: {reason}") }
        }
        SubgroupDecision::Unknown { reason } => return Extraction::Unknown { reason },
    };
    let p_invariant = spec.infinite_primes().iter().all(|&p| e.divisible_by(p));
    let mut weights = Vec::new();
    let mut sigma: Option<BigRational> = None;
    let mut shift: Option<(BigRational, Option<BigRational>)> = None;
    for c in f.cells() {
        if c.stratum.is_zero_only() {
            weights.push(c.atom.total_weight());
            continue;
        }
        let period = stratum_period(spec, &c.stratum);
        let atom = c.atom.reduced(period.as_ref());
        let [term] = atom.terms() else {
            return Extraction::NotOfForm {
                reason: format!("{} terms on {}", atom.terms().len(), c.stratum),
            };
        };
        weights.push(term.weight.clone());
        match &sigma {
            None => sigma = Some(term.sigma.clone()),
            Some(s) if *s != term.sigma => {
                return Extraction::NotOfForm {
                    reason: format!("nonuniform sigma {} and {}", format_rational(s), format_rational(&term.sigma)),
                }
            }
            _ => {}
        }
        match &shift {
            None => shift = Some((term.shift.clone(), period)),
            Some((s0, _)) => {
                let d = &term.shift - s0;
                let agrees = match &period {
                    Some(m) => rem_euclid(&d, m).is_zero(),
                    None => d.is_zero(),
                };
                if !agrees {
                    return Extraction::NotOfForm { reason: format!("shift changes on {}", c.stratum) };
                }
            }
        }
    }
    if weights.iter().any(|w| !w.is_one()) {
        let mut listed: Vec<String> = weights.iter().map(format_rational).collect();
        listed.dedup();
        return Extraction::NotOfForm { reason: format!("nonconstant piecewise weights {}", listed.join(", ")) };
    }
    let e_period = e
        .cyclic_generator(spec)
        .map(|g| g.recip())
        .or_else(|| global_period(spec));
    let (s, _) = shift.unwrap_or((BigRational::zero(), None));
    let s = match &e_period {
        Some(m) if !e.is_trivial() => rem_euclid(&s, m),
        _ if e.is_trivial() => BigRational::zero(),
        _ => s,
    };
    Extraction::Decomposition(Decomposition {
        shift: s,
        sigma: sigma.unwrap_or_else(BigRational::zero),
        subgroup: e,
        p_invariant,
    })
}

/// Exact value at a character; convenience wrapper returning the symbolic form.
pub fn value_at(f: &StratifiedCF, y: &BigRational) -> CfValue {
    f.cell_at(y).map(|c| c.atom.eval(y)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::cf::*;
    use crate::charfun::stratum::ValSet;
    use crate::rat::{int, rat};
    use crate::solenoid::SteinitzSpec;

    fn dyadic() -> SteinitzSpec {
        SteinitzSpec::p_adic(2).unwrap()
    }

    #[test]
    fn gaussians_compare() {
        let s = dyadic();
        let g1 = cf_gaussian_line(&s, &int(1), &int(0)).unwrap();
        let g2 = cf_gaussian_line(&s, &int(2), &int(0)).unwrap();
        assert_eq!(cf_equal(&g1, &g1).unwrap(), CfComparison::Equal);
        match cf_equal(&g1, &g2).unwrap() {
            CfComparison::Differs { witness, .. } => assert_eq!(witness, RationalChar::from_ratio(1, 1)),
            other => panic!("{other:?}"),
        }
        let h = cf_haar(&s, &SubgroupSpec::new(&s, [(2, 0)]));
        let a = cf_product(&h, &g1).unwrap();
        let b = cf_product(&g1, &h).unwrap();
        assert_eq!(cf_equal(&a, &b).unwrap(), CfComparison::Equal);
    }

    #[test]
    fn equation_for_gaussians() {
        let s = dyadic();
        let g = cf_gaussian_line(&s, &int(3), &int(0)).unwrap();
        let four = CoeffVector::repeated(1, 2, 4).unwrap();
        let three = CoeffVector::repeated(1, 2, 3).unwrap();
        assert!(check_functional_equation(&g, &four).unwrap().holds());
        assert!(matches!(check_functional_equation(&g, &three).unwrap(), EquationVerdict::Fails { .. }));
        let flat = cf_gaussian_line(&s, &int(0), &int(0)).unwrap();
        assert!(check_functional_equation(&flat, &three).unwrap().holds());
    }

    #[test]
    fn haar_on_integers_fails_dyadic_equation() {
        let s = dyadic();
        let h = cf_haar(&s, &SubgroupSpec::new(&s, [(2, 0)]));
        match check_functional_equation(&h, &CoeffVector::repeated(1, 2, 4).unwrap()).unwrap() {
            EquationVerdict::Fails { witness, .. } => assert_eq!(witness, RationalChar::from_ratio(1, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subgroup_decisions() {
        let s = dyadic();
        let g = cf_gaussian_line(&s, &int(1), &int(0)).unwrap();
        assert_eq!(support_is_subgroup(&g), SubgroupDecision::Yes { subgroup: SubgroupSpec::whole() });
        let shells = StratifiedCF::piecewise(
            &s,
            vec![
                (Stratum::from_conditions(&s, [(2, ValSet::at_least(0))]).unwrap(), int(1)),
                (Stratum::from_conditions(&s, [(2, ValSet::exactly(-2))]).unwrap(), rat(1, 2)),
            ],
        )
        .unwrap();
        match support_is_subgroup(&shells) {
            SubgroupDecision::No { witness: Some((a, b)), .. } => {
                let sum = a.value() + b.value();
                assert!(shells.cell_at(&sum).is_none());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extraction_roundtrip() {
        let s = SteinitzSpec::infinite_primes_of(&[2, 3]).unwrap();
        let e = SubgroupSpec::new(&s, [(3, 0)]);
        let f = cf_product(&cf_gaussian_line(&s, &rat(5, 2), &rat(1, 4)).unwrap(), &cf_haar(&s, &e)).unwrap();
        match extract_gaussian_haar(&f) {
            Extraction::Decomposition(d) => {
                assert_eq!(d.sigma, rat(5, 2));
                assert_eq!(d.subgroup, e);
                assert_eq!(d.shift, rat(1, 4));
                assert!(!d.p_invariant);
            }
            other => panic!("{other:?}"),
        }
        let one = cf_constant(&s, int(1));
        assert_eq!(
            extract_gaussian_haar(&one),
            Extraction::Decomposition(Decomposition {
                shift: int(0),
                sigma: int(0),
                subgroup: SubgroupSpec::whole(),
                p_invariant: true
            })
        );
    }
}
