//! Optimal information-foraging models and the lexical trend analysis that
//! goes with them.
//!
//! The crate has four parts:
//!
//! - [`foraging`]: diet choice over information items, merged-process
//!   platform rates, and a marginal-value-theorem solver for patch
//!   residence times.
//! - [`lexical`]: corpus cleaning, tokenization, and the three lexical
//!   measures (unigram word entropy, type-token ratio, Zipf exponent).
//! - [`trend`]: timeseries smoothing and the KPSS / Mann-Kendall /
//!   Pearson / ANOVA test battery.
//! - [`sim`]: synthetic diet-selectivity sweeps and the minimum-viable
//!   item-size frontier.
//!
//! The `pipeline` module wires these together behind the `infoforage`
//! command line tool.

pub mod foraging;
pub mod lexical;
pub mod pipeline;
pub mod sim;
pub mod svg;
pub mod trend;
