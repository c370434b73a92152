use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::SampleBatch;
use crate::error::{Error, Result};
use crate::rat::format_rational;
use crate::solenoid::{RationalChar, SteinitzSpec};

#[derive(Debug, Clone, Serialize)]
pub struct CfEstimate {
    pub y: RationalChar,
    pub re: f64,
    pub im: f64,
    /// Half-width `3/√n` of the confidence disk.
    pub radius: f64,
}

impl CfEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Integer `m` with `y = m / A_N` at the batch depth.
pub(crate) fn depth_numerator(spec: &SteinitzSpec, batch: &SampleBatch, y: &RationalChar) -> Result<f64> {
    spec.check_character(y)?;
    let m = y.value() * BigRational::from_integer(spec.tower_product(batch.depth));
    if !m.is_integer() {
        return Err(Error::CharacterTooDeep { y: format_rational(y.value()), depth: batch.depth });
    }
    Ok(m.to_integer().to_f64().unwrap_or(f64::INFINITY))
}

/// Mean of `exp(2πi m t_N)` over the batch for each `y = m / A_N`.
pub fn empirical_cf(spec: &SteinitzSpec, batch: &SampleBatch, ys: &[RationalChar]) -> Result<Vec<CfEstimate>> {
    let n = batch.len().max(1) as f64;
    ys.iter()
        .map(|y| {
            let m = depth_numerator(spec, batch, y)?;
            let (c, s) = batch.coords.iter().fold((0.0, 0.0), |(c, s), t| {
                let a = 2.0 * std::f64::consts::PI * (m * t).fract();
                (c + a.cos(), s + a.sin())
            });
            Ok(CfEstimate { y: y.clone(), re: c / n, im: s / n, radius: 3.0 / n.sqrt() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KuiperResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kuiper two-sample test for circle data in `[0, 1)`: `V = D+ + D-` of
/// the empirical distribution functions, with the asymptotic tail
/// `Q(λ) = 2 Σ (4j²λ² - 1) exp(-2j²λ²)`.
pub fn kuiper_two_sample(a: &SampleBatch, b: &SampleBatch) -> KuiperResult {
    let mut x = a.coords.clone();
    let mut y = b.coords.clone();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    if x.is_empty() || y.is_empty() {
        return KuiperResult { statistic: 0.0, p_value: 1.0 };
    }
    let (mut i, mut j) = (0usize, 0usize);
    let (mut d_plus, mut d_minus) = (0.0f64, 0.0f64);
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        let diff = i as f64 / n1 - j as f64 / n2;
        d_plus = d_plus.max(diff);
        d_minus = d_minus.max(-diff);
    }
    let v = d_plus + d_minus;
    let ne = n1 * n2 / (n1 + n2);
    let lambda = (ne.sqrt() + 0.155 + 0.24 / ne.sqrt()) * v;
    KuiperResult { statistic: v, p_value: kuiper_tail(lambda) }
}

fn kuiper_tail(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j2l2 = (j * j) as f64 * lambda * lambda;
        let term = (4.0 * j2l2 - 1.0) * (-2.0 * j2l2).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
