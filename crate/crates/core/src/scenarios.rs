//! Self-checking scenarios: the positive Gaussian-times-Haar statement, the
//! two-prime counterexample and its Gaussian strengthening, the full
//! classification pipeline, and the circle case.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::charfun::{
    cf_equal, cf_gaussian, cf_gaussian_line, cf_haar, cf_product, check_functional_equation, equation_rhs,
    extract_gaussian_haar, psd_spot_check, support_is_subgroup, CfComparison, CfValue, EquationVerdict,
    Extraction, PsdReport, StratifiedCF, Stratum, SubgroupDecision, SubgroupSpec, Term, ValSet,
};
use crate::charfun::analysis::value_at;
use crate::error::{Error, Result};
use crate::rat::{format_rational, prime_power, valuation_int};
use crate::sampler::{exact_cf_of, monte_carlo_equidist, EquidistReport, SamplerSpec, Verdict};
use crate::solenoid::{counterexample_coeffs, prime_factors, CoeffVector, Multiplicity, SolenoidClass, SteinitzSpec};
use crate::tower::SolenoidPoint;

/// Seed of the positive-definiteness spot checks run inside scenarios.
pub const PSD_SEED: u64 = 0x5eed;
pub const PSD_TRIALS: usize = 100;
pub const PSD_SIZE: usize = 8;
pub const PSD_TOL: f64 = 1e-9;

/// One named assertion inside a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// What the pipeline concludes about a law whose linear form is
/// equidistributed with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// Some coefficient is not an automorphism of the solenoid.
    InvalidCoefficients,
    /// Fewer than two coefficients: nothing is characterized.
    DegenerateCoefficients,
    /// `Σ α_j² ≠ 1`; the characterization does not apply.
    SumOfSquaresNotOne,
    EquationFails,
    EquationUndetermined,
    /// Unique infinite prime: the law is a shifted Gaussian times the Haar
    /// law of a compact subgroup invariant under the prime.
    GaussianTimesHaar,
    /// As above with a nowhere-vanishing cf, so the Haar factor is trivial.
    NonVanishingGaussian,
    /// Several infinite primes and the law happens to be Gaussian times Haar.
    DecompositionNotForced,
    /// Several infinite primes and the law is not Gaussian times Haar.
    MultiplePrimeCounterexample,
    DecompositionUndetermined,
    /// Unique infinite prime, equation holds, but no decomposition: an
    /// internal inconsistency.
    SoundnessViolation,
}

impl Conclusion {
    pub fn statement(self) -> &'static str {
        match self {
            Conclusion::InvalidCoefficients => "coefficients are not automorphisms of this solenoid",
            Conclusion::DegenerateCoefficients => "a single coefficient characterizes nothing",
            Conclusion::SumOfSquaresNotOne => "sum of squared coefficients is not 1; no characterization applies",
            Conclusion::EquationFails => "the law is not equidistributed with the linear form",
            Conclusion::EquationUndetermined => "exact equation check was inconclusive",
            Conclusion::GaussianTimesHaar => {
                "no elements of order p: the law is a Gaussian times the Haar law of a p-invariant compact subgroup"
            }
            Conclusion::NonVanishingGaussian => "nowhere-vanishing cf: the law is Gaussian",
            Conclusion::DecompositionNotForced => {
                "several infinite primes: this law is Gaussian times Haar, but such laws are not the only solutions"
            }
            Conclusion::MultiplePrimeCounterexample => {
                "several infinite primes: an equidistributed law that is not Gaussian times Haar"
            }
            Conclusion::DecompositionUndetermined => "equation holds but the decomposition check was inconclusive",
            Conclusion::SoundnessViolation => "equation holds with a unique infinite prime yet no decomposition exists",
        }
    }

    /// Exit category: `Some(true)` positive, `Some(false)` negative, `None` unknown.
    pub fn is_positive(self) -> Option<bool> {
        match self {
            Conclusion::GaussianTimesHaar
            | Conclusion::NonVanishingGaussian
            | Conclusion::DecompositionNotForced
            | Conclusion::MultiplePrimeCounterexample => Some(true),
            Conclusion::EquationUndetermined | Conclusion::DecompositionUndetermined => None,
            _ => Some(false),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremVerdict {
    pub class: SolenoidClass,
    pub coefficients: Vec<String>,
    pub coefficients_valid: bool,
    pub sum_of_squares_one: bool,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<EquationVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Extraction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nowhere_zero: Option<bool>,
    pub conclusion: Conclusion,
    pub statement: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<EquidistReport>,
}

impl TheoremVerdict {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks) && self.cross_check().is_empty()
    }

    /// Contradictions between the conclusion and the component results.
    pub fn cross_check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let holds = matches!(self.equation, Some(EquationVerdict::Holds));
        let decomposed = matches!(self.decomposition, Some(Extraction::Decomposition(_)));
        let not_of_form = matches!(self.decomposition, Some(Extraction::NotOfForm { .. }));
        let unique = matches!(self.class, SolenoidClass::UniqueInfinitePrime(_));
        let multiple = matches!(self.class, SolenoidClass::MultipleInfinitePrimes(_));
        let mut need = |ok: bool, what: &str| {
            if !ok {
                out.push(format!("{:?} but {what}", self.conclusion));
            }
        };
        match self.conclusion {
            Conclusion::InvalidCoefficients => need(!self.coefficients_valid, "coefficients are valid"),
            Conclusion::DegenerateCoefficients => need(self.degenerate, "coefficients are not degenerate"),
            Conclusion::SumOfSquaresNotOne => need(!self.sum_of_squares_one, "sum of squares is 1"),
            Conclusion::EquationFails => need(matches!(self.equation, Some(EquationVerdict::Fails { .. })), "no failure"),
            Conclusion::EquationUndetermined => {
                need(matches!(self.equation, Some(EquationVerdict::Unknown { .. })), "equation was decided")
            }
            Conclusion::GaussianTimesHaar => {
                need(unique && holds && decomposed, "class, equation or decomposition disagree");
                if let Some(Extraction::Decomposition(d)) = &self.decomposition {
                    need(d.p_invariant, "subgroup is not invariant");
                }
            }
            Conclusion::NonVanishingGaussian => {
                need(unique && holds && self.nowhere_zero == Some(true), "class, equation or support disagree");
                if let Some(Extraction::Decomposition(d)) = &self.decomposition {
                    need(d.subgroup.is_whole(), "Haar factor is not trivial");
                } else {
                    need(false, "no decomposition");
                }
            }
            Conclusion::DecompositionNotForced => need(multiple && holds && decomposed, "class or results disagree"),
            Conclusion::MultiplePrimeCounterexample => {
                need(multiple && holds && not_of_form, "class or results disagree")
            }
            Conclusion::DecompositionUndetermined => {
                need(holds && matches!(self.decomposition, Some(Extraction::Unknown { .. })), "decomposition decided")
            }
            Conclusion::SoundnessViolation => need(unique && holds && not_of_form, "class or results disagree"),
        }
        if let Some(sim) = &self.simulation {
            if holds && sim.verdict != Verdict::Consistent {
                out.push("equation holds but simulation is inconsistent".into());
            }
        }
        out
    }
}

/// Simulation settings attached to a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationOptions {
    pub n: usize,
    pub depth: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { n: 100_000, depth: 6, seed: 2024, alpha: 0.01 }
    }
}

/// Validity, the sum-of-squares condition, the exact equation and the
/// decomposition, combined into one conclusion.
pub fn classify_and_conclude(spec: &SteinitzSpec, coeffs: &CoeffVector, f: &StratifiedCF) -> Result<TheoremVerdict> {
    if f.spec() != spec {
        return Err(Error::SpecMismatch);
    }
    let class = spec.classify();
    let coefficients = coeffs.iter().map(|a| format_rational(a.value())).collect();
    let coefficients_valid = coeffs.validate(spec).is_ok();
    let sum_of_squares_one = coeffs.sum_of_squares().is_one();
    let degenerate = coeffs.is_degenerate();
    let mut v = TheoremVerdict {
        class: class.clone(),
        coefficients,
        coefficients_valid,
        sum_of_squares_one,
        degenerate,
        equation: None,
        decomposition: None,
        nowhere_zero: None,
        conclusion: Conclusion::InvalidCoefficients,
        statement: String::new(),
        checks: Vec::new(),
        simulation: None,
    };
    if !coefficients_valid {
        v.statement = Conclusion::InvalidCoefficients.statement().into();
        return Ok(v);
    }
    let equation = check_functional_equation(f, coeffs)?;
    let extraction = extract_gaussian_haar(f);
    let nowhere_zero = match support_is_subgroup(f) {
        SubgroupDecision::Yes { subgroup } => Some(subgroup.is_whole()),
        SubgroupDecision::No { .. } => Some(false),
        SubgroupDecision::Unknown { .. } => None,
    };
    let conclusion = if degenerate {
        Conclusion::DegenerateCoefficients
    } else if !sum_of_squares_one {
        Conclusion::SumOfSquaresNotOne
    } else {
        match &equation {
            EquationVerdict::Fails { .. } => Conclusion::EquationFails,
            EquationVerdict::Unknown { .. } => Conclusion::EquationUndetermined,
            EquationVerdict::Holds => match (&class, &extraction) {
                (_, Extraction::Unknown { .. }) => Conclusion::DecompositionUndetermined,
                (SolenoidClass::UniqueInfinitePrime(_), Extraction::Decomposition(_)) => {
                    if nowhere_zero == Some(true) {
                        Conclusion::NonVanishingGaussian
                    } else {
                        Conclusion::GaussianTimesHaar
                    }
                }
                (SolenoidClass::UniqueInfinitePrime(_), Extraction::NotOfForm { .. }) => {
                    Conclusion::SoundnessViolation
                }
                (_, Extraction::Decomposition(_)) => Conclusion::DecompositionNotForced,
                (_, Extraction::NotOfForm { .. }) => Conclusion::MultiplePrimeCounterexample,
            },
        }
    };
    v.checks.push(Check::new(
        "soundness",
        conclusion != Conclusion::SoundnessViolation,
        "a unique infinite prime forces a decomposition",
    ));
    if let (Some(true), Extraction::Decomposition(d)) = (nowhere_zero, &extraction) {
        v.checks.push(Check::new(
            "nonvanishing_means_gaussian",
            d.subgroup.is_whole(),
            format!("subgroup {}", d.subgroup),
        ));
    }
    v.equation = Some(equation);
    v.decomposition = Some(extraction);
    v.nowhere_zero = nowhere_zero;
    v.conclusion = conclusion;
    v.statement = conclusion.statement().into();
    Ok(v)
}

/// `|α| = p^(-k)` with `k >= 1`.
fn is_inverse_prime_power(alpha: &BigRational, p: u64) -> bool {
    let a = alpha.abs();
    if !a.numer().is_one() {
        return false;
    }
    let mut d = a.denom().clone();
    let pb = BigInt::from(p);
    if d.is_one() {
        return false;
    }
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    d.is_one()
}

/// The Gaussian-times-Haar law with a prime-invariant subgroup, checked
/// against coefficients `±p^(-k_j)`.
pub fn scenario_remark_r1(
    spec: &SteinitzSpec,
    sigma: &BigRational,
    e: &SubgroupSpec,
    shift: &SolenoidPoint,
    coeffs: &CoeffVector,
    simulation: Option<&SimulationOptions>,
) -> Result<TheoremVerdict> {
    let bad = |s: String| Err(Error::PreconditionViolated(s));
    let SolenoidClass::UniqueInfinitePrime(p) = spec.classify() else {
        return bad(format!("{spec} does not have exactly one infinite prime"));
    };
    if sigma.is_negative() {
        return bad(format!("sigma = {} is negative", format_rational(sigma)));
    }
    if let Some(a) = coeffs.iter().find(|a| !is_inverse_prime_power(a.value(), p)) {
        return bad(format!("coefficient {a} is not of the form ±{p}^-k with k >= 1"));
    }
    if coeffs.is_degenerate() {
        return bad("at least two coefficients are required".into());
    }
    if !coeffs.sum_of_squares().is_one() {
        return bad("coefficients do not have unit sum of squares".into());
    }
    let e = e.normalized(spec);
    if !e.divisible_by(p) {
        return bad(format!("subgroup {e} has a finite {p}-adic threshold"));
    }
    let s = shift.line_value(spec);
    // the shift survives the linear form only if (Σα - 1) s pairs trivially with E
    let drift = (coeffs.sum() - BigRational::one()) * &s;
    if !e.is_trivial() && !drift.is_zero() {
        return bad(format!("shift {} is not preserved by the linear form", format_rational(&s)));
    }

    let f = cf_product(&cf_gaussian(spec, sigma, shift)?, &cf_haar(spec, &e))?;
    let mut v = classify_and_conclude(spec, coeffs, &f)?;
    let holds = matches!(v.equation, Some(EquationVerdict::Holds));
    v.checks.push(Check::new("equation_holds", holds, format!("{:?}", v.equation)));
    match &v.decomposition {
        Some(Extraction::Decomposition(d)) => {
            v.checks.push(Check::new("p_invariant", d.p_invariant, format!("subgroup {}", d.subgroup)));
            v.checks.push(Check::new(
                "round_trip",
                // sigma is invisible when E = {0}
                (e.is_trivial() || d.sigma == *sigma) && d.subgroup == e,
                format!("sigma {} subgroup {}", format_rational(&d.sigma), d.subgroup),
            ));
            let rebuilt = cf_product(&cf_gaussian_line(spec, &d.sigma, &d.shift)?, &cf_haar(spec, &d.subgroup))?;
            let cmp = cf_equal(&rebuilt, &f)?;
            v.checks.push(Check::new("rebuilt_equal", cmp == CfComparison::Equal, format!("{cmp:?}")));
        }
        other => v.checks.push(Check::new("decomposition_found", false, format!("{other:?}"))),
    }
    if let Some(opts) = simulation {
        let law = SamplerSpec::ConvolutionOf {
            parts: vec![
                SamplerSpec::GaussianLine { sigma: sigma.clone(), mean: s },
                SamplerSpec::HaarAnnihilator { subgroup: e },
            ],
        };
        let rep = monte_carlo_equidist(spec, &law, coeffs, opts.n, opts.depth, None, opts.seed, opts.alpha)?;
        v.checks.push(Check::new(
            "simulation_consistent",
            rep.verdict == Verdict::Consistent,
            format!("min p-value {:.3e} at threshold {:.3e}", rep.min_p_value, rep.threshold),
        ));
        v.simulation = Some(rep);
    }
    Ok(v)
}

/// Value of both sides of the equation at one character.
#[derive(Debug, Clone, Serialize)]
pub struct CaseValue {
    pub region: String,
    pub y: String,
    pub lhs: CfValue,
    pub rhs: CfValue,
    pub expected: CfValue,
    pub passed: bool,
}

/// The two-prime counterexample: `c` on the ring `{v_p = -1}`, 1 on `{v_p >= 0}`.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleBundle {
    pub p: u64,
    pub q: u64,
    #[serde(with = "crate::rat::serde_rational")]
    pub c: BigRational,
    pub a: u32,
    pub b: String,
    pub coeffs: CoeffVector,
    pub f: StratifiedCF,
    pub sampler: SamplerSpec,
    pub cases: Vec<CaseValue>,
    pub psd: PsdReport,
    pub verdict: TheoremVerdict,
    pub checks: Vec<Check>,
}

impl CounterexampleBundle {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks) && self.cross_check_ok()
    }

    fn cross_check_ok(&self) -> bool {
        self.verdict.cross_check().is_empty()
    }
}

struct Rings {
    h: SubgroupSpec,
    l: SubgroupSpec,
    /// `{v_p >= 0}`, `{v_p = -1}`, `{v_p < -1}`
    strata: [Stratum; 3],
}

fn check_pair(spec: &SteinitzSpec, p: u64, q: u64, c: &BigRational) -> Result<Rings> {
    for x in [p, q] {
        if spec.multiplicity(x) != Multiplicity::Infinite {
            return Err(Error::PreconditionViolated(format!("{x} is not an infinite prime of {spec}")));
        }
    }
    if p == q {
        return Err(Error::PreconditionViolated("p and q must be distinct".into()));
    }
    if !c.is_positive() || *c >= BigRational::one() {
        return Err(Error::PreconditionViolated(format!("c = {} is not in (0, 1)", format_rational(c))));
    }
    let stratum = |v: ValSet| Stratum::from_conditions(spec, [(p, v)]).expect("nonempty");
    Ok(Rings {
        h: SubgroupSpec::new(spec, [(p, 0)]),
        l: SubgroupSpec::new(spec, [(p, -1)]),
        strata: [stratum(ValSet::at_least(0)), stratum(ValSet::exactly(-1)), stratum(ValSet::at_most(-2))],
    })
}

fn value_str(v: &CfValue) -> String {
    v.to_string()
}

/// Both sides of the equation on each ring, at the simplest probe and at
/// further sample points, against the expected constant.
fn three_cases(
    spec: &SteinitzSpec,
    p: u64,
    f: &StratifiedCF,
    g: &StratifiedCF,
    rings: &Rings,
    expected: [&dyn Fn(&BigRational) -> CfValue; 3],
) -> (Vec<CaseValue>, Vec<Check>) {
    let names = ["v_p >= 0", "v_p = -1", "v_p < -1"];
    let mut cases = Vec::new();
    let mut checks = Vec::new();
    for (k, stratum) in rings.strata.iter().enumerate() {
        let probe = prime_power(p, -(k as i64));
        let mut ys = vec![probe];
        ys.extend(stratum.sample_points(spec, 12));
        let mut ok = true;
        for (i, y) in ys.iter().enumerate() {
            let lhs = value_at(f, y);
            let rhs = value_at(g, y);
            let exp = expected[k](y);
            let passed = lhs.exact_eq(&exp) == Some(true) && rhs.exact_eq(&exp) == Some(true);
            ok &= passed;
            if i == 0 {
                cases.push(CaseValue {
                    region: names[k].to_string(),
                    y: format_rational(y),
                    lhs,
                    rhs,
                    expected: exp,
                    passed,
                });
            }
        }
        checks.push(Check::new(
            &format!("case_{k}"),
            ok,
            format!("{} on {} sample points of {}", value_str(&expected[k](&ys[0])), ys.len(), names[k]),
        ));
    }
    (cases, checks)
}

pub fn counterexample_pr1(spec: &SteinitzSpec, p: u64, q: u64, c: &BigRational) -> Result<CounterexampleBundle> {
    let rings = check_pair(spec, p, q, c)?;
    let ce = counterexample_coeffs(p, q)?;
    let sampler = SamplerSpec::Mixture {
        weights: vec![c.clone(), BigRational::one() - c],
        parts: vec![
            SamplerSpec::HaarAnnihilator { subgroup: rings.l.clone() },
            SamplerSpec::HaarAnnihilator { subgroup: rings.h.clone() },
        ],
    };
    let f = exact_cf_of(spec, &sampler)?;
    let direct = StratifiedCF::piecewise(
        spec,
        vec![(rings.strata[0].clone(), BigRational::one()), (rings.strata[1].clone(), c.clone())],
    )?;
    let mut checks = Vec::new();
    let cmp = cf_equal(&f, &direct)?;
    checks.push(Check::new("mixture_equals_piecewise", cmp == CfComparison::Equal, format!("{cmp:?}")));
    checks.push(Check::new(
        "sum_of_squares_one",
        ce.coeffs.sum_of_squares().is_one(),
        format_rational(&ce.coeffs.sum_of_squares()),
    ));

    let g = equation_rhs(&f, &ce.coeffs)?;
    let one = |_: &BigRational| CfValue::one();
    let cc = |_: &BigRational| {
        let mut v = CfValue::zero();
        v.push(c.clone(), BigRational::zero(), BigRational::zero());
        v
    };
    let zero = |_: &BigRational| CfValue::zero();
    let (cases, case_checks) = three_cases(spec, p, &f, &g, &rings, [&one, &cc, &zero]);
    checks.extend(case_checks);

    let verdict = classify_and_conclude(spec, &ce.coeffs, &f)?;
    checks.push(Check::new(
        "equation_holds",
        matches!(verdict.equation, Some(EquationVerdict::Holds)),
        format!("{:?}", verdict.equation),
    ));
    checks.push(Check::new(
        "not_gaussian_times_haar",
        matches!(verdict.decomposition, Some(Extraction::NotOfForm { .. })),
        format!("{:?}", verdict.decomposition),
    ));
    checks.push(Check::new(
        "conclusion",
        verdict.conclusion == Conclusion::MultiplePrimeCounterexample,
        format!("{:?}", verdict.conclusion),
    ));
    let psd = psd_spot_check(&f, PSD_SIZE, PSD_TRIALS, PSD_SEED, PSD_TOL);
    checks.push(Check::new("positive_definite", psd.passed, format!("min eigenvalue {:.3e}", psd.min_eigenvalue)));

    Ok(CounterexampleBundle {
        p,
        q,
        c: c.clone(),
        a: ce.a,
        b: ce.b.to_string(),
        coeffs: ce.coeffs,
        f,
        sampler,
        cases,
        psd,
        verdict,
        checks,
    })
}

/// The counterexample convolved with a Gaussian: full support on the
/// circle factor, yet still not Gaussian times Haar.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianCounterexample {
    #[serde(with = "crate::rat::serde_rational")]
    pub sigma: BigRational,
    pub lambda: StratifiedCF,
    pub sampler: SamplerSpec,
    pub cases: Vec<CaseValue>,
    pub support: SubgroupDecision,
    pub gaussian_support: SubgroupDecision,
    pub psd: PsdReport,
    pub verdict: TheoremVerdict,
    pub checks: Vec<Check>,
}

impl GaussianCounterexample {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks) && self.verdict.cross_check().is_empty()
    }
}

pub fn scenario_remark_r3(
    spec: &SteinitzSpec,
    p: u64,
    q: u64,
    c: &BigRational,
    sigma: &BigRational,
) -> Result<GaussianCounterexample> {
    if sigma.is_negative() {
        return Err(Error::PreconditionViolated(format!("sigma = {} is negative", format_rational(sigma))));
    }
    let base = counterexample_pr1(spec, p, q, c)?;
    let rings = check_pair(spec, p, q, c)?;
    let gaussian = cf_gaussian_line(spec, sigma, &BigRational::zero())?;
    let lambda = cf_product(&gaussian, &base.f)?;
    let direct = StratifiedCF::from_cells(
        spec,
        vec![
            (rings.strata[0].clone(), vec![Term::new(BigRational::one(), sigma.clone(), BigRational::zero())]),
            (rings.strata[1].clone(), vec![Term::new(c.clone(), sigma.clone(), BigRational::zero())]),
        ],
    )?;
    let mut checks = Vec::new();
    let cmp = cf_equal(&lambda, &direct)?;
    checks.push(Check::new("three_branch_form", cmp == CfComparison::Equal, format!("{cmp:?}")));

    let g = equation_rhs(&lambda, &base.coeffs)?;
    let gauss = |y: &BigRational| {
        let mut v = CfValue::zero();
        v.push(BigRational::one(), sigma * y * y, BigRational::zero());
        v
    };
    let scaled = |y: &BigRational| {
        let mut v = CfValue::zero();
        v.push(c.clone(), sigma * y * y, BigRational::zero());
        v
    };
    let zero = |_: &BigRational| CfValue::zero();
    let (cases, case_checks) = three_cases(spec, p, &lambda, &g, &rings, [&gauss, &scaled, &zero]);
    checks.extend(case_checks);

    let verdict = classify_and_conclude(spec, &base.coeffs, &lambda)?;
    checks.push(Check::new(
        "equation_holds",
        matches!(verdict.equation, Some(EquationVerdict::Holds)),
        format!("{:?}", verdict.equation),
    ));
    checks.push(Check::new(
        "not_gaussian_times_haar",
        matches!(verdict.decomposition, Some(Extraction::NotOfForm { .. })),
        format!("{:?}", verdict.decomposition),
    ));
    let support = support_is_subgroup(&lambda);
    checks.push(Check::new(
        "support_is_ring",
        matches!(&support, SubgroupDecision::Yes { subgroup } if *subgroup == rings.l),
        format!("{support:?}"),
    ));
    let gaussian_support = support_is_subgroup(&gaussian);
    checks.push(Check::new(
        "gaussian_full_support",
        matches!(&gaussian_support, SubgroupDecision::Yes { subgroup } if subgroup.is_whole()),
        format!("{gaussian_support:?}"),
    ));
    let psd = psd_spot_check(&lambda, PSD_SIZE, PSD_TRIALS, PSD_SEED, PSD_TOL);
    checks.push(Check::new("positive_definite", psd.passed, format!("min eigenvalue {:.3e}", psd.min_eigenvalue)));
    let sampler = SamplerSpec::ConvolutionOf {
        parts: vec![SamplerSpec::GaussianLine { sigma: sigma.clone(), mean: BigRational::zero() }, base.sampler],
    };
    Ok(GaussianCounterexample {
        sigma: sigma.clone(),
        lambda,
        sampler,
        cases,
        support,
        gaussian_support,
        psd,
        verdict,
        checks,
    })
}

/// Outcome of the circle check. `d = 0` stands for `E = {0}`, i.e. Haar
/// measure on the whole circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CircleVerdict {
    ShiftOfHaar {
        #[serde(with = "crate::rat::serde_rational")]
        x: BigRational,
        #[serde(serialize_with = "crate::scenarios::bigint_str")]
        d: BigInt,
    },
    Fails { witness: String, lhs: String, rhs: String },
    Unknown { reason: String },
}

pub(crate) fn bigint_str<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// On the circle, `f(y) = f(y)^m f(-y)^(n-m)` with `m = m_plus` forces `f`
/// to be `(x, y)` on a subgroup `dZ` and zero elsewhere.
pub fn circle_check(m_plus: usize, m_minus: usize, f: &StratifiedCF) -> Result<CircleVerdict> {
    let spec = f.spec();
    if !spec.is_circle() {
        return Err(Error::PreconditionViolated(format!("{spec} is not the circle")));
    }
    if m_plus + m_minus < 2 {
        return Err(Error::PreconditionViolated("m_plus + m_minus must be at least 2".into()));
    }
    let coeffs = CoeffVector::from_ratios(
        &std::iter::repeat_n((1, 1), m_plus).chain(std::iter::repeat_n((-1, 1), m_minus)).collect::<Vec<_>>(),
    )?;
    match check_functional_equation(f, &coeffs)? {
        EquationVerdict::Fails { witness, lhs, rhs } => {
            return Ok(CircleVerdict::Fails { witness: witness.to_string(), lhs, rhs })
        }
        EquationVerdict::Unknown { reason } => return Ok(CircleVerdict::Unknown { reason }),
        EquationVerdict::Holds => {}
    }
    let d = match extract_gaussian_haar(f) {
        Extraction::Decomposition(d) => d,
        Extraction::NotOfForm { reason } | Extraction::Unknown { reason } => {
            return Ok(CircleVerdict::Unknown { reason })
        }
    };
    if !d.sigma.is_zero() {
        return Ok(CircleVerdict::Unknown { reason: "modulus is not 1 on the support".into() });
    }
    let order = match d.subgroup.cyclic_generator(spec) {
        Some(g) if g.is_integer() => g.to_integer(),
        Some(g) => return Ok(CircleVerdict::Unknown { reason: format!("generator {g} is not an integer") }),
        None => BigInt::zero(),
    };
    Ok(CircleVerdict::ShiftOfHaar { x: d.shift, d: order })
}

/// The circle law: Haar measure of the order-`d` subgroup shifted by `x`.
pub fn circle_shift_of_haar(d: u64, x: &BigRational) -> Result<StratifiedCF> {
    let spec = SteinitzSpec::circle();
    let e = if d == 0 {
        SubgroupSpec::trivial()
    } else {
        let d = BigInt::from(d);
        let thresholds = prime_factors(&d).into_iter().filter_map(|p| valuation_int(&d, p).finite().map(|k| (p, k)));
        SubgroupSpec::new(&spec, thresholds)
    };
    cf_product(&cf_gaussian_line(&spec, &BigRational::zero(), x)?, &cf_haar(&spec, &e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn dyadic() -> SteinitzSpec {
        SteinitzSpec::p_adic(2).unwrap()
    }

    #[test]
    fn r1_quarter_sum() {
        let s = dyadic();
        let four = CoeffVector::repeated(1, 2, 4).unwrap();
        let v = scenario_remark_r1(&s, &int(1), &SubgroupSpec::whole(), &SolenoidPoint::zero(), &four, None).unwrap();
        assert!(v.passed(), "{v:#?}");
        assert_eq!(v.conclusion, Conclusion::NonVanishingGaussian);
    }

    #[test]
    fn r1_with_finite_factor() {
        let s = SteinitzSpec::new([(2, Multiplicity::Infinite), (3, Multiplicity::Finite(1))]).unwrap();
        let e = SubgroupSpec::new(&s, [(3, 0)]);
        let four = CoeffVector::repeated(1, 2, 4).unwrap();
        let v = scenario_remark_r1(&s, &int(2), &e, &SolenoidPoint::zero(), &four, None).unwrap();
        assert!(v.passed(), "{v:#?}");
        assert_eq!(v.conclusion, Conclusion::GaussianTimesHaar);
    }

    #[test]
    fn r1_preconditions() {
        let s = dyadic();
        let four = CoeffVector::repeated(1, 2, 4).unwrap();
        let e = SubgroupSpec::new(&s, [(2, 0)]);
        let err = scenario_remark_r1(&s, &int(1), &e, &SolenoidPoint::zero(), &four, None).unwrap_err();
        assert!(err.to_string().contains("threshold"), "{err}");
        let shift = SolenoidPoint::new(0, rat(1, 3));
        assert!(scenario_remark_r1(&s, &int(1), &SubgroupSpec::whole(), &shift, &four, None).is_err());
        let balanced = CoeffVector::from_ratios(&[(1, 2), (1, 2), (1, 2), (-1, 2)]).unwrap();
        let v = scenario_remark_r1(&s, &int(1), &SubgroupSpec::whole(), &shift, &balanced, None).unwrap();
        assert!(v.passed(), "{v:#?}");
    }

    #[test]
    fn pr1_two_three() {
        let s = SteinitzSpec::infinite_primes_of(&[2, 3]).unwrap();
        let b = counterexample_pr1(&s, 2, 3, &rat(1, 2)).unwrap();
        assert!(b.passed(), "{:#?}", b.checks);
        assert_eq!(b.coeffs, CoeffVector::from_ratios(&[(2, 3), (2, 3), (1, 3)]).unwrap());
        let vals: Vec<String> = b.cases.iter().map(|c| c.lhs.to_string()).collect();
        assert_eq!(b.cases[0].y, "1");
        assert_eq!(b.cases[1].y, "1/2");
        assert_eq!(b.cases[2].y, "1/4");
        assert!(b.cases[0].lhs.is_exactly_one());
        assert_eq!(b.cases[1].lhs.as_rational(), Some(rat(1, 2)), "{vals:?}");
        assert_eq!(b.cases[2].lhs.is_zero(), Some(true));
    }

    #[test]
    fn r3_values() {
        let s = SteinitzSpec::infinite_primes_of(&[2, 3]).unwrap();
        let r = scenario_remark_r3(&s, 2, 3, &rat(1, 2), &int(1)).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
        let at = |y: BigRational| value_at(&r.lambda, &y).to_complex();
        assert!((at(int(1)).re - (-1f64).exp()).abs() < 1e-15);
        assert!((at(rat(1, 2)).re - (-0.25f64).exp() / 2.0).abs() < 1e-15);
        assert_eq!(at(rat(1, 4)).norm(), 0.0);
    }

    #[test]
    fn r3_without_gaussian_matches_pr1() {
        let s = SteinitzSpec::infinite_primes_of(&[2, 3]).unwrap();
        let r = scenario_remark_r3(&s, 2, 3, &rat(1, 2), &int(0)).unwrap();
        let b = counterexample_pr1(&s, 2, 3, &rat(1, 2)).unwrap();
        assert_eq!(cf_equal(&r.lambda, &b.f).unwrap(), CfComparison::Equal);
    }

    #[test]
    fn unique_prime_gaussian_is_classified() {
        let s = dyadic();
        let f = cf_gaussian_line(&s, &int(1), &int(0)).unwrap();
        let v = classify_and_conclude(&s, &CoeffVector::repeated(1, 2, 4).unwrap(), &f).unwrap();
        assert_eq!(v.conclusion, Conclusion::NonVanishingGaussian);
        assert!(v.passed());
        let v = classify_and_conclude(&s, &CoeffVector::repeated(1, 2, 3).unwrap(), &f).unwrap();
        assert_eq!(v.conclusion, Conclusion::SumOfSquaresNotOne);
    }

    #[test]
    fn single_coefficient_is_degenerate() {
        let s = SteinitzSpec::new([(2, Multiplicity::Finite(1)), (3, Multiplicity::Finite(1))]).unwrap();
        let f = cf_haar(&s, &SubgroupSpec::whole());
        let v = classify_and_conclude(&s, &CoeffVector::from_ratios(&[(1, 1)]).unwrap(), &f).unwrap();
        assert_eq!(v.conclusion, Conclusion::DegenerateCoefficients);
        assert!(v.cross_check().is_empty());
    }

    #[test]
    fn circle_cases() {
        let one = circle_shift_of_haar(1, &int(0)).unwrap();
        assert_eq!(circle_check(2, 1, &one).unwrap(), CircleVerdict::ShiftOfHaar { x: int(0), d: 1.into() });
        let three = circle_shift_of_haar(3, &int(0)).unwrap();
        assert_eq!(circle_check(3, 0, &three).unwrap(), CircleVerdict::ShiftOfHaar { x: int(0), d: 3.into() });
        let shifted = circle_shift_of_haar(6, &rat(1, 13)).unwrap();
        assert_eq!(
            circle_check(3, 2, &shifted).unwrap(),
            CircleVerdict::ShiftOfHaar { x: rat(1, 13), d: 6.into() }
        );
        let g = cf_gaussian_line(&SteinitzSpec::circle(), &int(1), &int(0)).unwrap();
        assert!(matches!(circle_check(2, 1, &g).unwrap(), CircleVerdict::Fails { .. }));
    }
}
