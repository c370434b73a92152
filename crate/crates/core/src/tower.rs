//! Points of the solenoid as inverse-limit circle coordinates.
//!
//! A point is stored at some depth `N` by its coordinate `t_N` in `[0, 1)`;
//! the coordinates at different depths are bound by `t_N = a_N t_{N+1} mod 1`.
//! Coordinates below the stored depth are computed by projection, those
//! above it by the zero-digit lift `t_M = t_N / (A_M / A_N)`. Under that
//! convention a depth-`N` point is the image of the real number `t_N A_N`
//! in the one-parameter subgroup, and pairing with a character `y` is
//! `exp(2 pi i y t_N A_N)`.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{self, frac, serde_rational};
use crate::solenoid::{AutRat, RationalChar, SteinitzSpec};

/// A unit complex number `exp(2 pi i theta)` stored by its exact angle
/// `theta` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(BigRational);

impl Phase {
    pub fn from_turns(theta: BigRational) -> Self {
        Self(frac(&theta))
    }

    pub fn one() -> Self {
        Self(BigRational::zero())
    }

    pub fn turns(&self) -> &BigRational {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_zero()
    }

    pub fn mul(&self, other: &Phase) -> Phase {
        Phase::from_turns(&self.0 + &other.0)
    }

    pub fn conj(&self) -> Phase {
        Phase::from_turns(-&self.0)
    }

    pub fn to_complex(&self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * rat::to_f64(&self.0);
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(2πi·{})", rat::format_rational(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolenoidPoint {
    depth: usize,
    #[serde(with = "serde_rational")]
    coord: BigRational,
}

impl SolenoidPoint {
    pub fn new(depth: usize, coord: BigRational) -> Self {
        Self { depth, coord: frac(&coord) }
    }

    pub fn zero() -> Self {
        Self::new(0, BigRational::zero())
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coord(&self) -> &BigRational {
        &self.coord
    }

    /// The real number `t_N A_N` whose image this point is.
    pub fn line_value(&self, spec: &SteinitzSpec) -> BigRational {
        &self.coord * BigRational::from_integer(spec.tower_product(self.depth))
    }
}

impl fmt::Display for SolenoidPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t_{} = {}", self.depth, rat::format_rational(&self.coord))
    }
}

fn a(spec: &SteinitzSpec, n: usize) -> BigRational {
    BigRational::from_integer(spec.tower_product(n))
}

/// The character pairing `(x, y)`.
pub fn pair(spec: &SteinitzSpec, x: &SolenoidPoint, y: &RationalChar) -> Result<Phase> {
    spec.check_character(y)?;
    Ok(Phase::from_turns(y.value() * x.line_value(spec)))
}

pub fn add(spec: &SteinitzSpec, x1: &SolenoidPoint, x2: &SolenoidPoint) -> SolenoidPoint {
    let depth = x1.depth.max(x2.depth);
    let c1 = lift(spec, x1, depth);
    let c2 = lift(spec, x2, depth);
    SolenoidPoint::new(depth, c1.coord + c2.coord)
}

pub fn neg(x: &SolenoidPoint) -> SolenoidPoint {
    SolenoidPoint::new(x.depth, -&x.coord)
}

pub fn sub(spec: &SteinitzSpec, x1: &SolenoidPoint, x2: &SolenoidPoint) -> SolenoidPoint {
    add(spec, x1, &neg(x2))
}

/// Lift to depth `m >= depth(x)` through the zero-digit section.
pub fn lift(spec: &SteinitzSpec, x: &SolenoidPoint, m: usize) -> SolenoidPoint {
    assert!(m >= x.depth, "lift target {m} is below depth {}", x.depth);
    if m == x.depth {
        return x.clone();
    }
    SolenoidPoint::new(m, &x.coord * a(spec, x.depth) / a(spec, m))
}

/// Coordinate at a shallower depth: `t_M = (A_N / A_M) t_N mod 1`.
pub fn project(spec: &SteinitzSpec, x: &SolenoidPoint, m: usize) -> SolenoidPoint {
    assert!(m <= x.depth, "projection target {m} is above depth {}", x.depth);
    SolenoidPoint::new(m, &x.coord * a(spec, x.depth) / a(spec, m))
}

/// Coordinate at any depth, lifting or projecting as needed.
pub fn at_depth(spec: &SteinitzSpec, x: &SolenoidPoint, m: usize) -> SolenoidPoint {
    if m >= x.depth {
        lift(spec, x, m)
    } else {
        project(spec, x, m)
    }
}

/// `x = t` in the one-parameter subgroup, stored at depth `n`.
pub fn embed_real(spec: &SteinitzSpec, t: &BigRational, n: usize) -> SolenoidPoint {
    SolenoidPoint::new(n, t / a(spec, n))
}

/// The image `alpha x`, characterised by `(alpha x, y) = (x, alpha y)`.
///
/// A depth-`N` point only determines characters of depth `<= N`, so the
/// image is stored at the deepest `D` with `alpha A_N / A_D` an integer:
/// `D > N` is possible for integer `alpha`, `D < N` when `alpha` divides.
pub fn apply_aut(spec: &SteinitzSpec, x: &SolenoidPoint, alpha: &AutRat) -> Result<SolenoidPoint> {
    spec.check_automorphism(alpha)?;
    let scaled = alpha.value() * a(spec, x.depth);
    let determined = |d: usize| (&scaled / a(spec, d)).is_integer();
    if !determined(0) {
        let mut need = x.depth;
        while !(alpha.value() * a(spec, need)).is_integer() {
            need += 1;
        }
        return Err(Error::DepthInsufficient { have: x.depth, need });
    }
    let mut depth = 0;
    while spec.tower_factor(depth) != 1 && determined(depth + 1) {
        depth += 1;
    }
    // coordinate at depth D is the angle of (alpha x, 1/A_D) = (x, alpha/A_D)
    let theta = Phase::from_turns(&scaled / a(spec, depth) * &x.coord);
    Ok(SolenoidPoint::new(depth, theta.0))
}

/// Two points agree on every character both of them determine, i.e. their
/// coordinates match at the shallower of the two depths.
pub fn pairing_equal(spec: &SteinitzSpec, x1: &SolenoidPoint, x2: &SolenoidPoint) -> bool {
    let m = x1.depth.min(x2.depth);
    project(spec, x1, m).coord == project(spec, x2, m).coord
}

impl SolenoidPoint {
    pub fn is_identity(&self) -> bool {
        self.coord.is_zero()
    }
}
