//! Foraging mathematics: diet choice over information items, merged
//! Poisson platform description, and patch residence times via the
//! marginal value theorem.

mod diet;
mod patch;

pub use diet::{
    diet_rate, generalized_rate, holling_rate, merge_platform, min_item_size, optimal_diet,
    platform_included, rate_gradient_wrt_prevalence, DietSolution, InfoItem, MinItemSize,
    PlatformParams,
};
pub use patch::{mvt_solve, patches_as_prey, GainFunction, PatchType, ResidenceSolution};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ForagingError {
    #[error("item index {0} out of bounds for {1} items")]
    InvalidIndex(usize, usize),
    #[error("empty item list")]
    EmptyItems,
    #[error("empty diet")]
    EmptyDiet,
    #[error("probability vector length {got} does not match item count {expected}")]
    ProbabilityLength { got: usize, expected: usize },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("index {0} not in diet")]
    NotInDiet(usize),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid item: {0}")]
    InvalidItem(String),
    #[error("empty patch list")]
    EmptyPatches,
    #[error("invalid patch: {0}")]
    InvalidPatch(String),
}
