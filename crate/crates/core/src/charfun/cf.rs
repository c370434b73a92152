//! Piecewise characteristic functions and their algebra.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::atom::{Atom, Term, DEFAULT_TERM_BUDGET};
use super::stratum::{Constraint, Stratum, SubgroupSpec};
use super::value::CfValue;
use crate::error::{Error, Result};
use crate::rat::serde_rational;
use crate::solenoid::{AutRat, RationalChar, SteinitzSpec};
use crate::tower::SolenoidPoint;

/// One piece: the atom is the value of the function on the stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub stratum: Stratum,
    pub atom: Atom,
}

/// A function on `Y` given by pairwise disjoint strata, each carrying an
/// atom, and the value 0 elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedCF {
    spec: SteinitzSpec,
    cells: Vec<Cell>,
}

/// Shifts are meaningful only modulo the lattice of line points killed by
/// all of `Y`; nontrivial exactly when `Y = (1/M) Z`.
pub(crate) fn global_period(spec: &SteinitzSpec) -> Option<BigRational> {
    spec.finite_modulus().map(BigRational::from_integer)
}

/// Period of shifts seen by the characters of a stratum: `1/g` when the
/// stratum generates the cyclic group `gZ`.
pub(crate) fn stratum_period(spec: &SteinitzSpec, s: &Stratum) -> Option<BigRational> {
    s.generated_subgroup(spec).cyclic_generator(spec).map(|g| g.recip())
}

impl StratifiedCF {
    /// Build from raw pieces. Strata must be pairwise disjoint; nothing else
    /// is checked, so functions that are not characteristic functions can
    /// be represented too.
    pub fn from_cells(spec: &SteinitzSpec, cells: Vec<(Stratum, Vec<Term>)>) -> Result<Self> {
        for (i, (a, _)) in cells.iter().enumerate() {
            for (b, _) in &cells[i + 1..] {
                if a.intersect(b, spec).is_some() {
                    return Err(Error::PreconditionViolated(format!("strata {a} and {b} overlap")));
                }
            }
        }
        let period = global_period(spec);
        let cells = cells
            .into_iter()
            .map(|(stratum, terms)| Cell { stratum, atom: Atom::from_terms(terms, period.as_ref()) })
            .collect();
        Ok(Self::assemble(spec, cells))
    }

    /// Constant values on disjoint strata.
    pub fn piecewise(spec: &SteinitzSpec, pieces: Vec<(Stratum, BigRational)>) -> Result<Self> {
        Self::from_cells(
            spec,
            pieces.into_iter().map(|(s, c)| (s, vec![Term::constant(c)])).collect(),
        )
    }

    fn assemble(spec: &SteinitzSpec, cells: Vec<Cell>) -> Self {
        let mut cf = Self { spec: spec.clone(), cells: cells.into_iter().filter(|c| !c.atom.is_zero()).collect() };
        cf.merge_cells();
        cf.cells.sort_by(|a, b| a.stratum.cmp(&b.stratum));
        cf
    }

    /// Merge pieces carrying the same atom whose union is again a stratum.
    fn merge_cells(&mut self) {
        loop {
            let mut merged = false;
            'search: for i in 0..self.cells.len() {
                for j in i + 1..self.cells.len() {
                    if self.cells[i].atom != self.cells[j].atom {
                        continue;
                    }
                    if let Some(u) = self.cells[i].stratum.union(&self.cells[j].stratum, &self.spec) {
                        self.cells[i].stratum = u;
                        self.cells.remove(j);
                        merged = true;
                        break 'search;
                    }
                }
            }
            if !merged {
                return;
            }
        }
    }

    pub fn spec(&self) -> &SteinitzSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub(crate) fn period(&self) -> Option<BigRational> {
        global_period(&self.spec)
    }

    fn same_spec(&self, other: &StratifiedCF) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn cell_at(&self, y: &BigRational) -> Option<&Cell> {
        self.cells.iter().find(|c| c.stratum.contains(y))
    }

    /// Pieces of the common refinement of two functions' supports, with the
    /// atom of each side (absent meaning zero).
    pub(crate) fn overlay<'a>(
        &'a self,
        other: &'a StratifiedCF,
    ) -> Vec<(Stratum, Option<&'a Atom>, Option<&'a Atom>)> {
        let spec = &self.spec;
        let mut out = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if let Some(s) = a.stratum.intersect(&b.stratum, spec) {
                    out.push((s, Some(&a.atom), Some(&b.atom)));
                }
            }
        }
        let only = |cells: &[Cell], against: &[Cell]| -> Vec<(Stratum, usize)> {
            let mut res = Vec::new();
            for (i, c) in cells.iter().enumerate() {
                let mut pieces = vec![c.stratum.clone()];
                for d in against {
                    pieces = pieces.iter().flat_map(|p| p.subtract(&d.stratum, spec)).collect();
                }
                res.extend(pieces.into_iter().map(|p| (p, i)));
            }
            res
        };
        for (s, i) in only(&self.cells, &other.cells) {
            out.push((s, Some(&self.cells[i].atom), None));
        }
        for (s, j) in only(&other.cells, &self.cells) {
            out.push((s, None, Some(&other.cells[j].atom)));
        }
        out
    }

    fn map_atoms(&self, f: impl Fn(&Atom) -> Atom) -> StratifiedCF {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell { stratum: c.stratum.clone(), atom: f(&c.atom) })
            .collect();
        Self::assemble(&self.spec, cells)
    }

    /// `wf · self + wg · other`.
    pub(crate) fn combine(&self, wf: &BigRational, other: &StratifiedCF, wg: &BigRational) -> Result<StratifiedCF> {
        self.same_spec(other)?;
        let period = self.period();
        let mut cells = Vec::new();
        for (s, a, b) in self.overlay(other) {
            let a = a.map(|a| a.scaled(wf)).unwrap_or_default();
            let b = b.map(|b| b.scaled(wg)).unwrap_or_default();
            cells.push(Cell { stratum: s, atom: a.plus(&b, period.as_ref(), DEFAULT_TERM_BUDGET)? });
        }
        Ok(Self::assemble(&self.spec, cells))
    }
}

/// The constant function `c`.
pub fn cf_constant(spec: &SteinitzSpec, c: BigRational) -> StratifiedCF {
    StratifiedCF::piecewise(spec, vec![(Stratum::whole(), c)]).expect("one stratum")
}

/// `y -> exp(-σ y²) (x, y)`.
pub fn cf_gaussian(spec: &SteinitzSpec, sigma: &BigRational, shift: &SolenoidPoint) -> Result<StratifiedCF> {
    cf_gaussian_line(spec, sigma, &shift.line_value(spec))
}

/// Gaussian whose shift is the image of the real number `s`.
pub fn cf_gaussian_line(spec: &SteinitzSpec, sigma: &BigRational, s: &BigRational) -> Result<StratifiedCF> {
    if sigma.is_negative() {
        return Err(Error::PreconditionViolated(format!("sigma = {sigma} is negative")));
    }
    StratifiedCF::from_cells(
        spec,
        vec![(Stratum::whole(), vec![Term::new(BigRational::one(), sigma.clone(), s.clone())])],
    )
}

/// Characteristic function of the point mass at `x`.
pub fn cf_degenerate(spec: &SteinitzSpec, x: &SolenoidPoint) -> StratifiedCF {
    cf_gaussian(spec, &BigRational::zero(), x).expect("zero sigma")
}

/// Haar distribution of `K = A(X, E)`: the indicator of `E`.
pub fn cf_haar(spec: &SteinitzSpec, e: &SubgroupSpec) -> StratifiedCF {
    let e = e.normalized(spec);
    StratifiedCF::piecewise(spec, vec![(e.to_stratum(spec), BigRational::one())]).expect("one stratum")
}

/// Pointwise product (convolution of the distributions).
pub fn cf_product(f: &StratifiedCF, g: &StratifiedCF) -> Result<StratifiedCF> {
    f.same_spec(g)?;
    let period = f.period();
    let mut cells = Vec::new();
    for a in &f.cells {
        for b in &g.cells {
            if let Some(s) = a.stratum.intersect(&b.stratum, &f.spec) {
                cells.push(Cell { stratum: s, atom: a.atom.mul(&b.atom, period.as_ref(), DEFAULT_TERM_BUDGET)? });
            }
        }
    }
    Ok(StratifiedCF::assemble(&f.spec, cells))
}

/// Convex combination; weights must be nonnegative and sum to exactly 1.
pub fn cf_mixture(weights: &[BigRational], cfs: &[StratifiedCF]) -> Result<StratifiedCF> {
    if weights.is_empty()
        || weights.len() != cfs.len()
        || weights.iter().any(|w| w.is_negative())
        || weights.iter().sum::<BigRational>() != BigRational::one()
    {
        return Err(Error::BadWeights);
    }
    let spec = cfs[0].spec();
    let mut acc = cf_constant(spec, BigRational::zero());
    for (w, f) in weights.iter().zip(cfs) {
        acc = acc.combine(&BigRational::one(), f, w)?;
    }
    Ok(acc)
}

/// `y -> f(alpha y)`.
pub fn cf_precompose(f: &StratifiedCF, alpha: &AutRat) -> Result<StratifiedCF> {
    f.spec.check_automorphism(alpha)?;
    let a = alpha.value();
    let period = f.period();
    let mut cells = Vec::new();
    for c in &f.cells {
        if let Some(s) = c.stratum.pullback(a, &f.spec) {
            cells.push(Cell { stratum: s, atom: c.atom.precompose(a, period.as_ref()) });
        }
    }
    Ok(StratifiedCF::assemble(&f.spec, cells))
}

/// Complex conjugate, the characteristic function of the reflected law.
pub fn cf_conj(f: &StratifiedCF) -> StratifiedCF {
    let period = f.period();
    f.map_atoms(|a| a.conj(period.as_ref()))
}

/// `|f|²`, the characteristic function of `μ * μ̄`.
pub fn cf_mod_square(f: &StratifiedCF) -> Result<StratifiedCF> {
    cf_product(f, &cf_conj(f))
}

pub fn cf_power(f: &StratifiedCF, k: usize) -> Result<StratifiedCF> {
    let mut result = cf_constant(f.spec(), BigRational::one());
    let mut base = f.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = cf_product(&result, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = cf_product(&base, &base)?;
        }
    }
    Ok(result)
}

pub fn cf_eval(f: &StratifiedCF, y: &RationalChar) -> Result<CfValue> {
    f.spec.check_character(y)?;
    Ok(f.cell_at(y.value()).map(|c| c.atom.eval(y.value())).unwrap_or_default())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    stratum: Vec<Constraint>,
    terms: Vec<RawTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(with = "serde_rational")]
    c: BigRational,
    #[serde(default = "BigRational::zero", with = "serde_rational")]
    sigma: BigRational,
    #[serde(default)]
    shift: Option<serde_json::Value>,
}

impl Serialize for StratifiedCF {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl StratifiedCF {
    /// `[{stratum: [{prime, op, k}], terms: [{c, sigma, shift}]}]`.
    pub fn to_json(&self) -> serde_json::Value {
        let raw: Vec<RawCell> = self
            .cells
            .iter()
            .map(|c| RawCell {
                stratum: c.stratum.constraints(),
                terms: c
                    .atom
                    .terms()
                    .iter()
                    .map(|t| RawTerm {
                        c: t.weight.clone(),
                        sigma: t.sigma.clone(),
                        shift: Some(serde_json::Value::String(crate::rat::format_rational(&t.shift))),
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_value(raw).expect("plain data")
    }

    /// Inverse of [`to_json`](Self::to_json). A shift may be a rational
    /// (a point of the one-parameter subgroup) or a `{depth, coord}` point.
    pub fn from_json(spec: &SteinitzSpec, value: &serde_json::Value) -> Result<Self> {
        let raw: Vec<RawCell> =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut cells = Vec::new();
        for rc in raw {
            let stratum = match Stratum::from_constraints(spec, &rc.stratum).map_err(Error::Parse)? {
                Some(s) => s,
                None => continue,
            };
            let mut terms = Vec::new();
            for t in rc.terms {
                if t.c.is_negative() || t.sigma.is_negative() {
                    return Err(Error::Parse("term weights and sigma must be nonnegative".into()));
                }
                let shift = match t.shift {
                    None => BigRational::zero(),
                    Some(v @ serde_json::Value::Object(_)) => serde_json::from_value::<SolenoidPoint>(v)
                        .map_err(|e| Error::Parse(e.to_string()))?
                        .line_value(spec),
                    Some(v) => serde_rational::from_json(&v)?,
                };
                terms.push(Term::new(t.c, t.sigma, shift));
            }
            cells.push((stratum, terms));
        }
        Self::from_cells(spec, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::stratum::ValSet;
    use crate::rat::{int, rat};
    use crate::tower::embed_real;

    fn dyadic() -> SteinitzSpec {
        SteinitzSpec::p_adic(2).unwrap()
    }

    fn ev(f: &StratifiedCF, n: i64, d: i64) -> CfValue {
        cf_eval(f, &RationalChar::from_ratio(n, d)).unwrap()
    }

    #[test]
    fn gaussian_values() {
        let s = dyadic();
        let g = cf_gaussian(&s, &int(1), &embed_real(&s, &rat(1, 2), 0)).unwrap();
        let v = ev(&g, 1, 1).to_complex();
        assert!((v.re + (-1f64).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!(ev(&g, 0, 1).is_exactly_one());
        let g1 = cf_gaussian_line(&s, &int(1), &int(0)).unwrap();
        assert!((ev(&g1, 2, 1).to_complex().re - (-4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn haar_indicator() {
        let s = SteinitzSpec::infinite_primes_of(&[2, 3]).unwrap();
        let h = cf_haar(&s, &SubgroupSpec::new(&s, [(3, 0)]));
        assert!(ev(&h, 1, 2).is_exactly_one());
        assert_eq!(ev(&h, 1, 3).as_rational(), Some(int(0)));
        let whole_group = cf_haar(&s, &SubgroupSpec::trivial());
        assert!(ev(&whole_group, 0, 1).is_exactly_one());
        assert_eq!(ev(&whole_group, 1, 1).as_rational(), Some(int(0)));
    }

    #[test]
    fn mixture_of_haars_is_piecewise() {
        let s = dyadic();
        let c = rat(1, 3);
        let l = cf_haar(&s, &SubgroupSpec::new(&s, [(2, -1)]));
        let h = cf_haar(&s, &SubgroupSpec::new(&s, [(2, 0)]));
        let f = cf_mixture(&[c.clone(), int(1) - &c], &[l, h]).unwrap();
        assert_eq!(f.cells().len(), 2);
        assert!(ev(&f, 3, 1).is_exactly_one());
        assert_eq!(ev(&f, 1, 2).as_rational(), Some(c));
        assert_eq!(ev(&f, 1, 4).as_rational(), Some(int(0)));
        assert!(cf_mixture(&[rat(1, 2), rat(1, 3)], &[f.clone(), f]).is_err());
    }

    #[test]
    fn precompose_shifts_strata() {
        let s = dyadic();
        let h = cf_haar(&s, &SubgroupSpec::new(&s, [(2, 0)]));
        let half = AutRat::from_ratio(1, 2).unwrap();
        assert_eq!(cf_precompose(&h, &half).unwrap(), cf_haar(&s, &SubgroupSpec::new(&s, [(2, 1)])));
        let g = cf_gaussian_line(&s, &int(3), &int(0)).unwrap();
        assert_eq!(cf_precompose(&g, &half).unwrap(), cf_gaussian_line(&s, &rat(3, 4), &int(0)).unwrap());
    }

    #[test]
    fn mod_square_of_shift_is_one() {
        let s = dyadic();
        let x = cf_degenerate(&s, &SolenoidPoint::new(3, rat(5, 8)));
        assert_eq!(cf_mod_square(&x).unwrap(), cf_constant(&s, int(1)));
    }

    #[test]
    fn json_roundtrip() {
        let s = dyadic();
        let l = Stratum::from_conditions(&s, [(2, ValSet::exactly(-1))]).unwrap();
        let f = StratifiedCF::from_cells(
            &s,
            vec![(l, vec![Term::new(rat(1, 2), int(2), rat(1, 3)), Term::constant(rat(1, 4))])],
        )
        .unwrap();
        let back = StratifiedCF::from_json(&s, &f.to_json()).unwrap();
        assert_eq!(back, f);
        let pointy = serde_json::json!([
            {"stratum": [], "terms": [{"c": "1", "sigma": "0", "shift": {"depth": 1, "coord": "1/2"}}]}
        ]);
        let p = StratifiedCF::from_json(&s, &pointy).unwrap();
        assert_eq!(ev(&p, 1, 2).as_rational(), Some(int(-1)));
    }

    #[test]
    fn overlapping_strata_rejected() {
        let s = dyadic();
        let a = Stratum::from_conditions(&s, [(2, ValSet::at_least(0))]).unwrap();
        let b = Stratum::from_conditions(&s, [(2, ValSet::at_least(-1))]).unwrap();
        assert!(StratifiedCF::piecewise(&s, vec![(a, int(1)), (b, int(1))]).is_err());
    }
}
