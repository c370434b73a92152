use nalgebra::Matrix2;
use num_rational::BigRational;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::linear::{linear_form, project_batch, required_depth};
use super::stats::{depth_numerator, kuiper_two_sample};
use super::{exact_cf_of, sample_stream, SampleBatch, SamplerSpec, RNG_ALGORITHM};
use crate::charfun::cf_eval;
use crate::error::{Error, Result};
use crate::rat::format_rational;
use crate::solenoid::{CoeffVector, RationalChar, SteinitzSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterGap {
    pub y: RationalChar,
    /// Empirical cf of an independent reference sample of the law.
    pub reference: [f64; 2],
    /// Empirical cf of the linear form.
    pub linear_form: [f64; 2],
    /// Exact cf of the law, for orientation.
    pub exact: [f64; 2],
    pub gap: f64,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthTest {
    pub depth: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistReport {
    pub rng: String,
    pub seed: u64,
    pub n: usize,
    pub depth: usize,
    pub sample_depth: usize,
    pub coefficients: Vec<String>,
    pub alpha: f64,
    /// Bonferroni level `alpha / tests` applied to each p-value.
    pub threshold: f64,
    pub characters: Vec<CharacterGap>,
    pub depths: Vec<DepthTest>,
    pub min_p_value: f64,
    pub verdict: Verdict,
}

/// Characters `1/A_N` and `3/A_N` for `N = 0..=depth`.
pub fn default_charset(spec: &SteinitzSpec, depth: usize) -> Vec<RationalChar> {
    let mut out: Vec<RationalChar> = Vec::new();
    for n in 0..=depth {
        for k in [1, 3] {
            let y = RationalChar::new(BigRational::new(k.into(), spec.tower_product(n)));
            if !out.contains(&y) {
                out.push(y);
            }
        }
    }
    out
}

fn moments(spec: &SteinitzSpec, b: &SampleBatch, y: &RationalChar) -> Result<([f64; 2], Matrix2<f64>)> {
    let m = depth_numerator(spec, b, y)?;
    let n = b.len() as f64;
    let pts: Vec<(f64, f64)> = b
        .coords
        .iter()
        .map(|t| {
            let a = 2.0 * std::f64::consts::PI * (m * t).fract();
            (a.cos(), a.sin())
        })
        .collect();
    let mc = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ms = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut cc, mut cs, mut ss) = (0.0, 0.0, 0.0);
    for (c, s) in &pts {
        cc += (c - mc) * (c - mc);
        cs += (c - mc) * (s - ms);
        ss += (s - ms) * (s - ms);
    }
    let denom = (n - 1.0).max(1.0) * n;
    Ok(([mc, ms], Matrix2::new(cc / denom, cs / denom, cs / denom, ss / denom)))
}

/// Hotelling-type test that two empirical cf values agree; directions with
/// no sampling variance must agree exactly.
fn gap_test(d: [f64; 2], cov: Matrix2<f64>) -> (f64, f64) {
    let eig = cov.symmetric_eigen();
    let scale = cov.trace().abs().max(1e-300);
    let mut stat = 0.0;
    let mut dof = 0u32;
    for k in 0..2 {
        let v = eig.eigenvectors.column(k);
        let proj = d[0] * v[0] + d[1] * v[1];
        let lam = eig.eigenvalues[k];
        if lam > 1e-12 * scale && lam > 1e-300 {
            stat += proj * proj / lam;
            dof += 1;
        } else if proj.abs() > 1e-9 {
            return (f64::INFINITY, 0.0);
        }
    }
    if dof == 0 {
        return (0.0, 1.0);
    }
    let p = ChiSquared::new(dof as f64).map(|c| c.sf(stat)).unwrap_or(0.0);
    (stat, p)
}

/// Sample i.i.d. copies of `law`, form `L = Σ α_j ξ_j`, and compare `L`
/// with an independent sample of the law through cf gaps on `charset` and
/// Kuiper tests at depths `1..=depth`, Bonferroni-corrected at `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_equidist(
    spec: &SteinitzSpec,
    law: &SamplerSpec,
    coeffs: &CoeffVector,
    n: usize,
    depth: usize,
    charset: Option<&[RationalChar]>,
    seed: u64,
    alpha: f64,
) -> Result<EquidistReport> {
    if n < 2 {
        return Err(Error::PreconditionViolated("at least two draws are needed".into()));
    }
    let sample_depth = required_depth(spec, coeffs, depth)?;
    let reference = sample_stream(spec, law, sample_depth, n, seed, 0)?;
    let copies = (0..coeffs.len())
        .map(|j| sample_stream(spec, law, sample_depth, n, seed, j as u64 + 1))
        .collect::<Result<Vec<_>>>()?;
    let l_top = linear_form(spec, &copies, coeffs, depth)?;
    let r_top = project_batch(spec, &reference, depth)?;

    let chars = match charset {
        Some(c) => c.to_vec(),
        None => default_charset(spec, depth),
    };
    let exact = exact_cf_of(spec, law)?;
    let mut characters = Vec::new();
    for y in &chars {
        let (ml, cl) = moments(spec, &l_top, y)?;
        let (mr, cr) = moments(spec, &r_top, y)?;
        let d = [ml[0] - mr[0], ml[1] - mr[1]];
        let (statistic, p_value) = gap_test(d, cl + cr);
        let ex = cf_eval(&exact, y)?.to_complex();
        characters.push(CharacterGap {
            y: y.clone(),
            reference: mr,
            linear_form: ml,
            exact: [ex.re, ex.im],
            gap: d[0].hypot(d[1]),
            statistic,
            p_value,
        });
    }
    let mut depths = Vec::new();
    for k in 1..=depth {
        let l = project_batch(spec, &l_top, k)?;
        let r = project_batch(spec, &r_top, k)?;
        let kt = kuiper_two_sample(&l, &r);
        depths.push(DepthTest { depth: k, statistic: kt.statistic, p_value: kt.p_value });
    }
    let tests = (characters.len() + depths.len()).max(1);
    let threshold = alpha / tests as f64;
    let min_p_value = characters
        .iter()
        .map(|c| c.p_value)
        .chain(depths.iter().map(|d| d.p_value))
        .fold(1.0f64, f64::min);
    let verdict = if min_p_value < threshold { Verdict::Inconsistent } else { Verdict::Consistent };
    Ok(EquidistReport {
        rng: RNG_ALGORITHM.to_string(),
        seed,
        n,
        depth,
        sample_depth,
        coefficients: coeffs.iter().map(|a| format_rational(a.value())).collect(),
        alpha,
        threshold,
        characters,
        depths,
        min_p_value,
        verdict,
    })
}

impl EquidistReport {
    /// Smallest p-value among the cf-gap tests.
    pub fn min_cf_gap_p_value(&self) -> f64 {
        self.characters.iter().map(|c| c.p_value).fold(1.0, f64::min)
    }

    pub fn max_gap(&self) -> f64 {
        self.characters.iter().map(|c| c.gap).fold(0.0, f64::max)
    }
}
