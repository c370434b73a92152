//! Shared generators and brute-force oracles for the integration suites.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::sample::select;
use solenoid_core::charfun::{
    cf_degenerate, cf_gaussian_line, cf_haar, cf_mixture, cf_product, StratifiedCF, SubgroupSpec,
};
use solenoid_core::{AutRat, Multiplicity, RationalChar, SolenoidPoint, SteinitzSpec};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn specs() -> Vec<SteinitzSpec> {
    use Multiplicity::*;
    vec![
        SteinitzSpec::circle(),
        SteinitzSpec::new([(2, Infinite)]).unwrap(),
        SteinitzSpec::new([(3, Infinite)]).unwrap(),
        SteinitzSpec::new([(2, Infinite), (3, Infinite)]).unwrap(),
        SteinitzSpec::new([(2, Infinite), (3, Finite(2))]).unwrap(),
        SteinitzSpec::new([(2, Finite(2)), (5, Finite(1))]).unwrap(),
        SteinitzSpec::new([(2, Finite(1)), (3, Infinite), (5, Infinite)]).unwrap(),
    ]
}

pub fn any_spec() -> impl Strategy<Value = SteinitzSpec> {
    select(specs())
}

/// `m / A_N`, which is always in `Y`.
pub fn character(spec: &SteinitzSpec) -> impl Strategy<Value = RationalChar> {
    let spec = spec.clone();
    (0usize..6, -60i64..=60)
        .prop_map(move |(n, m)| RationalChar::new(BigRational::new(m.into(), spec.tower_product(n))))
}

pub fn point() -> impl Strategy<Value = SolenoidPoint> {
    (0usize..5, -40i64..40, 1i64..30).prop_map(|(depth, m, d)| SolenoidPoint::new(depth, rat(m, d)))
}

/// `±` a product of powers of the infinite primes.
pub fn automorphism(spec: &SteinitzSpec) -> BoxedStrategy<AutRat> {
    let primes = spec.infinite_primes();
    if primes.is_empty() {
        return select(vec![AutRat::identity(), AutRat::from_ratio(-1, 1).unwrap()]).boxed();
    }
    (any::<bool>(), prop::collection::vec(-2i32..=2, primes.len()))
        .prop_map(move |(neg, ks)| {
            let mut v = int(if neg { -1 } else { 1 });
            for (&p, &k) in primes.iter().zip(&ks) {
                let pk = BigRational::from_integer(num_traits::pow(BigInt::from(p), k.unsigned_abs() as usize));
                if k >= 0 {
                    v *= pk;
                } else {
                    v /= pk;
                }
            }
            AutRat::new(v).unwrap()
        })
        .boxed()
}

pub fn subgroup(spec: &SteinitzSpec) -> BoxedStrategy<SubgroupSpec> {
    let primes: Vec<u64> = spec.entries().map(|(p, _)| p).chain([7]).collect();
    let s = spec.clone();
    prop_oneof![
        1 => Just(SubgroupSpec::whole()),
        1 => Just(SubgroupSpec::trivial()),
        4 => prop::collection::vec((select(primes), -2i64..=2), 1..3)
            .prop_map(move |ts| SubgroupSpec::new(&s, ts)),
    ]
    .boxed()
}

pub fn sigma() -> impl Strategy<Value = BigRational> {
    select(vec![int(0), rat(1, 2), int(1), int(2), rat(7, 3)])
}

/// Laws with real nonnegative cfs: centred Gaussians, Haar laws and their
/// mixtures and convolutions.
pub fn real_cf(spec: &SteinitzSpec) -> BoxedStrategy<StratifiedCF> {
    let s1 = spec.clone();
    let s2 = spec.clone();
    let leaf = prop_oneof![
        sigma().prop_map(move |sg| cf_gaussian_line(&s1, &sg, &int(0)).unwrap()),
        subgroup(spec).prop_map(move |e| cf_haar(&s2, &e)),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| cf_product(&f, &g).unwrap()),
            (inner.clone(), inner, select(vec![rat(1, 4), rat(1, 2), rat(3, 4)]))
                .prop_map(|(f, g, w)| cf_mixture(&[w.clone(), int(1) - w], &[f, g]).unwrap()),
        ]
    })
    .boxed()
}

/// Shifted Gaussians, Haar laws, point masses, mixtures and convolutions.
pub fn any_cf(spec: &SteinitzSpec) -> BoxedStrategy<StratifiedCF> {
    let (s1, s2, s3) = (spec.clone(), spec.clone(), spec.clone());
    let leaf = prop_oneof![
        (sigma(), -12i64..12).prop_map(move |(sg, k)| cf_gaussian_line(&s1, &sg, &rat(k, 12)).unwrap()),
        subgroup(spec).prop_map(move |e| cf_haar(&s2, &e)),
        point().prop_map(move |x| cf_degenerate(&s3, &x)),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| cf_product(&f, &g).unwrap()),
            (inner.clone(), inner, select(vec![rat(1, 3), rat(1, 2)]))
                .prop_map(|(f, g, w)| cf_mixture(&[w.clone(), int(1) - w], &[f, g]).unwrap()),
        ]
    })
    .boxed()
}

/// Coefficient vectors from `k` copies of `p^-j`.
pub fn k_vector_coeffs(p: u64, k: &[u64]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for (j, &kj) in k.iter().enumerate() {
        let den = (p as i64).pow(j as u32 + 1);
        out.extend(std::iter::repeat_n((1, den), kj as usize));
    }
    out
}

/// Sum of squares computed from integer ratios, independently of the library.
pub fn sum_of_squares(ratios: &[(i64, i64)]) -> BigRational {
    ratios.iter().map(|&(n, d)| rat(n * n, d * d)).sum()
}
