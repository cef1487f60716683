//! Synthetic reproductions of the two model-driven figures: the
//! diet-selectivity sweep over information prevalence and the minimum
//! viable item-size frontier.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foraging::{self, InfoItem, MinItemSize};

/// Name of the generator recorded in output headers so runs can be
/// reproduced against the same build.
pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Parameters of the diet-selectivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DietSweepConfig {
    /// Prevalence levels to sweep, strictly increasing.
    pub prevalence_grid: Vec<f64>,
    /// Items drawn per unit prevalence (count scale).
    pub items_per_unit_prevalence: f64,
    /// Lower bound of the uniform item utility-rate distribution.
    pub rate_low: f64,
    /// Upper bound of the uniform item utility-rate distribution.
    pub rate_high: f64,
    /// Probability that an ignored item is removed from the output.
    pub removal_prob: f64,
    /// Fixed handling time; item utility is rate times handling time.
    pub handling_time: f64,
    /// Per-item encounter rate; total prevalence scales with item count.
    pub base_encounter_rate: f64,
    pub seed: u64,
}

impl Default for DietSweepConfig {
    fn default() -> Self {
        Self {
            // roughly geometric, chosen so every grid point sits in the
            // selective regime (diet threshold above rate_low) and the
            // threshold increment between neighbours dominates sampling
            // noise; a linear grid's increments shrink like 1/√λ and
            // drown in noise at the top end
            prevalence_grid: vec![
                60.0, 80.0, 105.0, 140.0, 185.0, 240.0, 315.0, 410.0, 535.0, 700.0,
            ],
            items_per_unit_prevalence: 10.0,
            rate_low: 20.0,
            rate_high: 30.0,
            removal_prob: 0.8,
            handling_time: 1.0,
            base_encounter_rate: 0.01,
            seed: 0,
        }
    }
}

impl DietSweepConfig {
    // the negated comparisons deliberately reject NaN parameters as well
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SimError> {
        if self.prevalence_grid.is_empty() {
            return Err(SimError::InvalidConfig("prevalence_grid is empty".into()));
        }
        if self.prevalence_grid.iter().any(|&p| p <= 0.0)
            || self.prevalence_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SimError::InvalidConfig(
                "prevalence_grid must be positive and strictly increasing".into(),
            ));
        }
        if !(self.rate_low < self.rate_high) {
            return Err(SimError::InvalidConfig("rate_low must be < rate_high".into()));
        }
        if !(0.0..=1.0).contains(&self.removal_prob) {
            return Err(SimError::InvalidConfig("removal_prob must be in [0, 1]".into()));
        }
        if !(self.handling_time > 0.0) {
            return Err(SimError::InvalidConfig("handling_time must be > 0".into()));
        }
        if !(self.base_encounter_rate > 0.0) {
            return Err(SimError::InvalidConfig(
                "base_encounter_rate must be > 0".into(),
            ));
        }
        if !(self.items_per_unit_prevalence > 0.0) {
            return Err(SimError::InvalidConfig(
                "items_per_unit_prevalence must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One prevalence level of the sweep: item utility rates split into
/// consumed diet members and surviving ignored items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub prevalence: f64,
    pub consumed: Vec<f64>,
    pub survived_ignored: Vec<f64>,
    pub diet_rate: f64,
    pub diet_min_profitability: f64,
}

/// Run the diet choice model across the prevalence grid. Each grid point
/// draws its own RNG stream from (seed, grid index), so serial and
/// parallel evaluation agree exactly.
pub fn diet_sweep(config: &DietSweepConfig) -> Result<Vec<SweepPoint>, SimError> {
    config.validate()?;
    let points = config
        .prevalence_grid
        .iter()
        .enumerate()
        .map(|(index, &prevalence)| sweep_point(config, index, prevalence))
        .collect();
    Ok(points)
}

fn sweep_point(config: &DietSweepConfig, index: usize, prevalence: f64) -> SweepPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64 + 1);

    let count = (config.items_per_unit_prevalence * prevalence).round() as usize;
    if count == 0 {
        return SweepPoint {
            prevalence,
            consumed: Vec::new(),
            survived_ignored: Vec::new(),
            diet_rate: 0.0,
            diet_min_profitability: 0.0,
        };
    }

    let rates: Vec<f64> = (0..count)
        .map(|_| config.rate_low + rng.random::<f64>() * (config.rate_high - config.rate_low))
        .collect();
    let items: Vec<InfoItem> = rates
        .iter()
        .map(|&r| InfoItem {
            encounter_rate: config.base_encounter_rate,
            utility: r * config.handling_time,
            handling_time: config.handling_time,
        })
        .collect();

    let solution = foraging::optimal_diet(&items).expect("items are valid by construction");
    let consumed: Vec<f64> = solution.included.iter().map(|&i| rates[i]).collect();
    let min_profitability = consumed.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut survived_ignored = Vec::new();
    for (i, &r) in rates.iter().enumerate() {
        if solution.included.contains(&i) {
            continue;
        }
        if rng.random::<f64>() >= config.removal_prob {
            survived_ignored.push(r);
        }
    }

    SweepPoint {
        prevalence,
        consumed,
        survived_ignored,
        diet_rate: solution.rate,
        diet_min_profitability: if min_profitability.is_finite() {
            min_profitability
        } else {
            0.0
        },
    }
}

/// One cell of the viability frontier grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierCell {
    pub merged_rate: f64,
    pub mean_item_rate: f64,
    pub u_min: MinItemSize,
}

/// Evaluate the minimum viable item size over a (λ, r̄) grid. Cells with
/// r̄ ≤ R_env are marked infeasible.
pub fn viability_frontier(
    merged_rate_grid: &[f64],
    mean_item_rate_grid: &[f64],
    env_rate: f64,
) -> Result<Vec<FrontierCell>, SimError> {
    if env_rate <= 0.0 {
        return Err(SimError::InvalidConfig("env_rate must be > 0".into()));
    }
    if merged_rate_grid.iter().any(|&v| v <= 0.0)
        || mean_item_rate_grid.iter().any(|&v| v <= 0.0)
    {
        return Err(SimError::InvalidConfig("grids must be positive".into()));
    }
    let mut cells = Vec::with_capacity(merged_rate_grid.len() * mean_item_rate_grid.len());
    for &merged_rate in merged_rate_grid {
        for &mean_item_rate in mean_item_rate_grid {
            let u_min = foraging::min_item_size(merged_rate, mean_item_rate, env_rate)
                .expect("grid values validated above");
            cells.push(FrontierCell {
                merged_rate,
                mean_item_rate,
                u_min,
            });
        }
    }
    Ok(cells)
}
