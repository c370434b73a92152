//! Monte Carlo realization of distributions on the solenoid and
//! statistical equidistribution tests.
//!
//! Draws are depth-`N` circle coordinates in double precision. Every batch
//! is one ChaCha8 stream of its seed; the stream is cut into fixed-size
//! chunks at fixed word offsets, so output does not depend on how many
//! worker threads run the chunks.

mod equidist;
mod linear;
mod stats;

pub use equidist::{default_charset, monte_carlo_equidist, CharacterGap, DepthTest, EquidistReport, Verdict};
pub use linear::{linear_form, project_batch, required_depth};
pub use stats::{empirical_cf, kuiper_two_sample, CfEstimate, KuiperResult};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfun::{cf_degenerate, cf_gaussian_line, cf_haar, cf_mixture, cf_product, StratifiedCF, SubgroupSpec};
use crate::error::{Error, Result};
use crate::rat::{serde_rational, serde_rational_vec, to_f64};
use crate::solenoid::SteinitzSpec;
use crate::tower::{at_depth, SolenoidPoint};

/// Name of the generator recorded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), one stream per batch, 4096-draw chunks";

const CHUNK: usize = 4096;
// word offset between chunks; far more than any chunk consumes
const CHUNK_WORDS: u128 = 1 << 40;

/// A generative description of a law on the solenoid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    /// Point mass at `point`.
    Degenerate { point: SolenoidPoint },
    /// Haar distribution of the compact subgroup `K = A(X, E)`.
    HaarAnnihilator { subgroup: SubgroupSpec },
    /// Image of `N(mean, s²)` on the line, with `σ = 2π² s²`.
    GaussianLine {
        #[serde(with = "serde_rational")]
        sigma: BigRational,
        #[serde(default = "BigRational::zero", with = "serde_rational")]
        mean: BigRational,
    },
    Mixture {
        #[serde(with = "serde_rational_vec")]
        weights: Vec<BigRational>,
        parts: Vec<SamplerSpec>,
    },
    Shifted { point: SolenoidPoint, inner: Box<SamplerSpec> },
    ConvolutionOf { parts: Vec<SamplerSpec> },
}

impl SamplerSpec {
    fn validate(&self) -> Result<()> {
        match self {
            SamplerSpec::GaussianLine { sigma, .. } if sigma.is_negative() => {
                Err(Error::PreconditionViolated(format!("sigma = {sigma} is negative")))
            }
            SamplerSpec::Mixture { weights, parts } => {
                if weights.is_empty()
                    || weights.len() != parts.len()
                    || weights.iter().any(|w| w.is_negative())
                    || weights.iter().sum::<BigRational>() != BigRational::from_integer(1.into())
                {
                    return Err(Error::BadWeights);
                }
                parts.iter().try_for_each(SamplerSpec::validate)
            }
            SamplerSpec::Shifted { inner, .. } => inner.validate(),
            SamplerSpec::ConvolutionOf { parts } => parts.iter().try_for_each(SamplerSpec::validate),
            _ => Ok(()),
        }
    }
}

/// The characteristic function of the law described by `s`.
pub fn exact_cf_of(spec: &SteinitzSpec, s: &SamplerSpec) -> Result<StratifiedCF> {
    s.validate()?;
    Ok(match s {
        SamplerSpec::Degenerate { point } => cf_degenerate(spec, point),
        SamplerSpec::HaarAnnihilator { subgroup } => cf_haar(spec, subgroup),
        SamplerSpec::GaussianLine { sigma, mean } => cf_gaussian_line(spec, sigma, mean)?,
        SamplerSpec::Mixture { weights, parts } => {
            let cfs = parts.iter().map(|p| exact_cf_of(spec, p)).collect::<Result<Vec<_>>>()?;
            cf_mixture(weights, &cfs)?
        }
        SamplerSpec::Shifted { point, inner } => cf_product(&cf_degenerate(spec, point), &exact_cf_of(spec, inner)?)?,
        SamplerSpec::ConvolutionOf { parts } => {
            let mut acc = crate::charfun::cf_constant(spec, BigRational::from_integer(1.into()));
            for p in parts {
                acc = cf_product(&acc, &exact_cf_of(spec, p)?)?;
            }
            acc
        }
    })
}

/// Depth-`N` coordinates of i.i.d. draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub depth: usize,
    pub coords: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

pub(crate) fn wrap(x: f64) -> f64 {
    let t = x - x.floor();
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Float form of a spec at a fixed depth.
enum Plan {
    Const(f64),
    Fiber(u64),
    Uniform,
    Gauss { mean: f64, scale: f64 },
    Mixture { cumulative: Vec<f64>, parts: Vec<Plan> },
    Sum(Vec<Plan>),
}

fn plan(spec: &SteinitzSpec, s: &SamplerSpec, depth: usize) -> Result<Plan> {
    let a_n = to_f64(&BigRational::from_integer(spec.tower_product(depth)));
    Ok(match s {
        SamplerSpec::Degenerate { point } => Plan::Const(to_f64(at_depth(spec, point, depth).coord())),
        SamplerSpec::HaarAnnihilator { subgroup } => match subgroup.normalized(spec).fiber_order(spec, depth) {
            None => Plan::Uniform,
            // beyond 2^52 points the fiber is indistinguishable from the circle in f64
            Some(d) => match d.to_u64().filter(|&d| d <= 1 << 52) {
                Some(d) => Plan::Fiber(d),
                None => Plan::Uniform,
            },
        },
        SamplerSpec::GaussianLine { sigma, mean } => {
            let s = (to_f64(sigma) / (2.0 * std::f64::consts::PI.powi(2))).sqrt();
            let a_big = BigRational::from_integer(spec.tower_product(depth));
            Plan::Gauss { mean: to_f64(&crate::rat::frac(&(mean / a_big))), scale: s / a_n }
        }
        SamplerSpec::Mixture { weights, parts } => {
            let mut acc = 0.0;
            let cumulative = weights
                .iter()
                .map(|w| {
                    acc += to_f64(w);
                    acc
                })
                .collect();
            let parts = parts.iter().map(|p| plan(spec, p, depth)).collect::<Result<_>>()?;
            Plan::Mixture { cumulative, parts }
        }
        SamplerSpec::Shifted { point, inner } => Plan::Sum(vec![
            plan(spec, &SamplerSpec::Degenerate { point: point.clone() }, depth)?,
            plan(spec, inner, depth)?,
        ]),
        SamplerSpec::ConvolutionOf { parts } => {
            Plan::Sum(parts.iter().map(|p| plan(spec, p, depth)).collect::<Result<_>>()?)
        }
    })
}

impl Plan {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Plan::Const(c) => *c,
            Plan::Fiber(1) => 0.0,
            Plan::Fiber(d) => rng.random_range(0..*d) as f64 / *d as f64,
            Plan::Uniform => rng.random::<f64>(),
            Plan::Gauss { mean, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                wrap(mean + scale * z)
            }
            Plan::Mixture { cumulative, parts } => {
                let u: f64 = rng.random();
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(parts.len() - 1);
                parts[idx].draw(rng)
            }
            Plan::Sum(parts) => wrap(parts.iter().map(|p| p.draw(rng)).sum()),
        }
    }
}

/// `n` draws at depth `depth` from stream 0 of `seed`.
pub fn sample(spec: &SteinitzSpec, s: &SamplerSpec, depth: usize, n: usize, seed: u64) -> Result<SampleBatch> {
    sample_stream(spec, s, depth, n, seed, 0)
}

/// `n` draws from the given stream of `seed`; distinct streams are
/// independent.
pub fn sample_stream(
    spec: &SteinitzSpec,
    s: &SamplerSpec,
    depth: usize,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleBatch> {
    s.validate()?;
    let plan = plan(spec, s, depth)?;
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            rng.set_word_pos(c as u128 * CHUNK_WORDS);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| plan.draw(&mut rng)).collect()
        })
        .collect();
    Ok(SampleBatch { depth, coords: chunks.concat(), seed, stream })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn degenerate_and_trivial_haar() {
        let s = SteinitzSpec::p_adic(2).unwrap();
        let b = sample(&s, &SamplerSpec::Degenerate { point: SolenoidPoint::zero() }, 3, 100, 1).unwrap();
        assert!(b.coords.iter().all(|&t| t == 0.0));
        let h = SamplerSpec::HaarAnnihilator { subgroup: SubgroupSpec::whole() };
        assert!(sample(&s, &h, 4, 100, 1).unwrap().coords.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn haar_fiber_grid() {
        let s = SteinitzSpec::p_adic(2).unwrap();
        let l = SamplerSpec::HaarAnnihilator { subgroup: SubgroupSpec::new(&s, [(2, -1)]) };
        let b = sample(&s, &l, 5, 2000, 3).unwrap();
        // uniform on j/16
        assert!(b.coords.iter().all(|&t| (t * 16.0).fract() == 0.0));
        let distinct: std::collections::BTreeSet<u64> = b.coords.iter().map(|&t| (t * 16.0) as u64).collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let s = SteinitzSpec::p_adic(3).unwrap();
        let g = SamplerSpec::Mixture {
            weights: vec![rat(1, 3), rat(2, 3)],
            parts: vec![
                SamplerSpec::GaussianLine { sigma: int(2), mean: rat(1, 5) },
                SamplerSpec::HaarAnnihilator { subgroup: SubgroupSpec::trivial() },
            ],
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample(&s, &g, 2, 10_000, 9).unwrap());
        let b = four.install(|| sample(&s, &g, 2, 10_000, 9).unwrap());
        assert_eq!(a, b);
        let c = sample_stream(&s, &g, 2, 10_000, 9, 1).unwrap();
        assert_ne!(a.coords, c.coords);
    }

    #[test]
    fn rejects_bad_weights() {
        let s = SteinitzSpec::p_adic(2).unwrap();
        let m = SamplerSpec::Mixture {
            weights: vec![rat(1, 2)],
            parts: vec![SamplerSpec::Degenerate { point: SolenoidPoint::zero() }],
        };
        assert_eq!(sample(&s, &m, 1, 10, 0), Err(Error::BadWeights));
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"kind": "mixture", "weights": ["1/2", "1/2"], "parts": [
            {"kind": "haar_annihilator", "subgroup": {"thresholds": {"2": -1}}},
            {"kind": "gaussian_line", "sigma": "1"}]}"#;
        let parsed: SamplerSpec = serde_json::from_str(json).unwrap();
        assert!(matches!(parsed, SamplerSpec::Mixture { .. }));
    }
}
