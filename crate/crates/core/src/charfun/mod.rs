//! Characteristic functions on the character group, represented piecewise
//! over p-adic valuation strata with exact parameters.

pub mod analysis;
pub mod atom;
pub mod cf;
pub mod psd;
pub mod stratum;
pub mod value;

pub use analysis::{
    cf_equal, cf_support, check_functional_equation, equation_rhs, extract_gaussian_haar,
    support_is_subgroup, CfComparison, Decomposition, EquationVerdict, Extraction, SubgroupDecision,
    Support,
};
pub use atom::{Atom, Term, DEFAULT_TERM_BUDGET};
pub use cf::{
    cf_conj, cf_constant, cf_degenerate, cf_eval, cf_gaussian, cf_gaussian_line, cf_haar, cf_mixture,
    cf_mod_square, cf_power, cf_precompose, cf_product, Cell, StratifiedCF,
};
pub use psd::{psd_spot_check, random_character, PsdReport};
pub use stratum::{Constraint, ConstraintBound, ConstraintOp, Stratum, SubgroupSpec, ValSet};
pub use value::CfValue;
