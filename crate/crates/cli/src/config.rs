use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;
use solenoid_core::charfun::StratifiedCF;
use solenoid_core::rat::serde_rational;
use solenoid_core::sampler::{exact_cf_of, SamplerSpec};
use solenoid_core::{CoeffVector, RationalChar, SteinitzSpec};

use crate::CliError;

/// A law given either by its characteristic function or by a sampler.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Cf(serde_json::Value),
    Sampler(SamplerSpec),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub n: Option<usize>,
    pub depth: Option<usize>,
    pub charset: Option<Vec<RationalChar>>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solenoid: Option<SteinitzSpec>,
    pub distribution: Option<Distribution>,
    pub coefficients: Option<CoeffVector>,
    #[serde(default)]
    pub simulation: Simulation,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub l: Option<usize>,
    #[serde(default, with = "opt_rational")]
    pub c: Option<BigRational>,
    #[serde(default, with = "opt_rational")]
    pub sigma: Option<BigRational>,
}

mod opt_rational {
    use super::*;
    use serde::Deserializer;

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "serde_rational")] BigRational);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn solenoid(&self) -> Result<&SteinitzSpec, CliError> {
        self.solenoid.as_ref().ok_or_else(|| missing("solenoid"))
    }

    pub fn coefficients(&self, spec: &SteinitzSpec) -> Result<&CoeffVector, CliError> {
        let c = self.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?;
        c.validate(spec).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn cf(&self, spec: &SteinitzSpec) -> Result<StratifiedCF, CliError> {
        match self.distribution.as_ref().ok_or_else(|| missing("distribution"))? {
            Distribution::Cf(v) => StratifiedCF::from_json(spec, v).map_err(|e| CliError::Config(e.to_string())),
            Distribution::Sampler(s) => exact_cf_of(spec, s).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    pub fn sampler(&self) -> Result<&SamplerSpec, CliError> {
        match self.distribution.as_ref().ok_or_else(|| missing("distribution"))? {
            Distribution::Sampler(s) => Ok(s),
            Distribution::Cf(_) => Err(CliError::Config("simulation needs a sampler distribution".into())),
        }
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}
