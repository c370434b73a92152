use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{wrap, SampleBatch};
use crate::error::{Error, Result};
use crate::solenoid::{CoeffVector, SteinitzSpec};

/// Least `D >= target` such that every coefficient denominator divides
/// `A_D / A_target`, i.e. the depth at which draws must be taken so the
/// linear form is determined at depth `target`.
pub fn required_depth(spec: &SteinitzSpec, coeffs: &CoeffVector, target: usize) -> Result<usize> {
    coeffs.validate(spec)?;
    let lcm = coeffs
        .iter()
        .fold(BigInt::from(1), |acc, a| acc.lcm(a.value().denom()));
    let base = spec.tower_product(target);
    let mut d = target;
    let mut acc = base.clone();
    loop {
        if (&acc / &base).is_multiple_of(&lcm) {
            return Ok(d);
        }
        let a = spec.tower_factor(d);
        if a == 1 {
            return Err(Error::DepthInsufficient { have: d, need: usize::MAX });
        }
        acc *= BigInt::from(a);
        d += 1;
    }
}

/// Integer multiplier taking a depth-`from` coordinate of `x` to the
/// depth-`to` coordinate of `alpha x`.
fn multiplier(spec: &SteinitzSpec, alpha: &BigRational, from: usize, to: usize) -> Option<BigInt> {
    let ratio = BigRational::from_integer(spec.tower_product(from))
        / BigRational::from_integer(spec.tower_product(to));
    let m = alpha * ratio;
    m.is_integer().then(|| m.to_integer())
}

/// Per-draw `Σ α_j ξ_j` at depth `target`, from batches of equal depth
/// and length.
pub fn linear_form(
    spec: &SteinitzSpec,
    batches: &[SampleBatch],
    coeffs: &CoeffVector,
    target: usize,
) -> Result<SampleBatch> {
    if batches.len() != coeffs.len() || batches.is_empty() {
        return Err(Error::PreconditionViolated(format!(
            "{} batches for {} coefficients",
            batches.len(),
            coeffs.len()
        )));
    }
    let depth = batches[0].depth;
    let n = batches[0].len();
    if batches.iter().any(|b| b.depth != depth || b.len() != n) {
        return Err(Error::PreconditionViolated("batches differ in depth or length".into()));
    }
    let need = required_depth(spec, coeffs, target)?;
    if depth < need {
        return Err(Error::DepthInsufficient { have: depth, need });
    }
    let mults: Vec<f64> = coeffs
        .iter()
        .map(|a| {
            let m = multiplier(spec, a.value(), depth, target).expect("depth checked");
            m.to_f64().unwrap_or(f64::INFINITY)
        })
        .collect();
    let coords = (0..n)
        .map(|i| wrap(batches.iter().zip(&mults).map(|(b, m)| wrap(m * b.coords[i])).sum()))
        .collect();
    Ok(SampleBatch { depth: target, coords, seed: batches[0].seed, stream: batches[0].stream })
}

/// Coordinates at a shallower depth: `t_M = (A_N / A_M) t_N mod 1`.
pub fn project_batch(spec: &SteinitzSpec, batch: &SampleBatch, to: usize) -> Result<SampleBatch> {
    if to > batch.depth {
        return Err(Error::DepthInsufficient { have: batch.depth, need: to });
    }
    let m = multiplier(spec, &BigRational::from_integer(1.into()), batch.depth, to)
        .expect("tower products divide")
        .to_f64()
        .unwrap_or(f64::INFINITY);
    Ok(SampleBatch {
        depth: to,
        coords: batch.coords.iter().map(|t| wrap(m * t)).collect(),
        seed: batch.seed,
        stream: batch.stream,
    })
}
