//! Exact harmonic analysis on a-adic solenoids: the rational character
//! group, points as inverse-limit coordinates, stratified characteristic
//! functions, Monte Carlo sampling and packaged scenarios.

pub mod charfun;
pub mod error;
pub mod rat;
pub mod scenarios;
pub mod sampler;
pub mod solenoid;
pub mod tower;

pub use error::{Error, Result};
pub use solenoid::{
    AutRat, CoeffVector, Multiplicity, RationalChar, SolenoidClass, SteinitzSpec,
};
pub use tower::{Phase, SolenoidPoint};
