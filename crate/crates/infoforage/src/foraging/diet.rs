//! Diet choice over information items and the merged-platform rate
//! equations.

use serde::{Deserialize, Serialize};

use super::ForagingError;

/// One information type: encountered at `encounter_rate` while searching,
/// yielding `utility` over a `handling_time` spent not searching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoItem {
    pub encounter_rate: f64,
    pub utility: f64,
    pub handling_time: f64,
}

impl InfoItem {
    pub fn new(encounter_rate: f64, utility: f64, handling_time: f64) -> Result<Self, ForagingError> {
        let item = Self {
            encounter_rate,
            utility,
            handling_time,
        };
        item.validate()?;
        Ok(item)
    }

    pub fn validate(&self) -> Result<(), ForagingError> {
        if !(self.encounter_rate >= 0.0 && self.encounter_rate.is_finite()) {
            return Err(ForagingError::InvalidItem(format!(
                "encounter_rate must be finite and >= 0, got {}",
                self.encounter_rate
            )));
        }
        if !(self.utility >= 0.0 && self.utility.is_finite()) {
            return Err(ForagingError::InvalidItem(format!(
                "utility must be finite and >= 0, got {}",
                self.utility
            )));
        }
        if !(self.handling_time > 0.0 && self.handling_time.is_finite()) {
            return Err(ForagingError::InvalidItem(format!(
                "handling_time must be finite and > 0, got {}",
                self.handling_time
            )));
        }
        Ok(())
    }

    /// Profitability: utility per unit handling time.
    pub fn profitability(&self) -> f64 {
        self.utility / self.handling_time
    }
}

/// The outcome of the greedy diet choice algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DietSolution {
    /// Indices of items in the diet, in the order they were added
    /// (descending profitability, input order on ties).
    pub included: Vec<usize>,
    /// Overall utility rate of the chosen diet.
    pub rate: f64,
    /// For each included item, the diet rate just before it was added.
    pub threshold_trace: Vec<(usize, f64)>,
}

/// Merged-process description of a media platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformParams {
    pub merged_rate: f64,
    pub mean_utility: f64,
    pub mean_handling: f64,
}

impl PlatformParams {
    /// Mean item utility rate: mean utility per unit handling time.
    pub fn mean_item_rate(&self) -> f64 {
        self.mean_utility / self.mean_handling
    }
}

fn check_indices(items: &[InfoItem], diet: &[usize]) -> Result<(), ForagingError> {
    for &i in diet {
        if i >= items.len() {
            return Err(ForagingError::InvalidIndex(i, items.len()));
        }
    }
    Ok(())
}

/// Overall utility rate of a diet: (Σ λᵢuᵢ) / (1 + Σ λᵢtᵢ) over the diet
/// members. The empty diet has rate 0.
pub fn diet_rate(items: &[InfoItem], diet: &[usize]) -> Result<f64, ForagingError> {
    check_indices(items, diet)?;
    for item in items {
        item.validate()?;
    }
    let mut gain = 0.0;
    let mut busy = 0.0;
    for &i in diet {
        gain += items[i].encounter_rate * items[i].utility;
        busy += items[i].encounter_rate * items[i].handling_time;
    }
    Ok(gain / (1.0 + busy))
}

/// Overall utility rate when item `i` is consumed with probability `pᵢ`
/// upon encounter: (Σ pᵢλᵢuᵢ) / (1 + Σ pᵢλᵢtᵢ).
pub fn generalized_rate(items: &[InfoItem], probabilities: &[f64]) -> Result<f64, ForagingError> {
    if probabilities.len() != items.len() {
        return Err(ForagingError::ProbabilityLength {
            got: probabilities.len(),
            expected: items.len(),
        });
    }
    for item in items {
        item.validate()?;
    }
    let mut gain = 0.0;
    let mut busy = 0.0;
    for (item, &p) in items.iter().zip(probabilities) {
        if !(0.0..=1.0).contains(&p) {
            return Err(ForagingError::ProbabilityRange(p));
        }
        gain += p * item.encounter_rate * item.utility;
        busy += p * item.encounter_rate * item.handling_time;
    }
    Ok(gain / (1.0 + busy))
}

/// Greedy diet choice: rank items by profitability, add while
/// rᵢ ≥ rate of the diet so far. Ties in profitability keep input order;
/// equality with the current rate includes the item. Zero-utility items
/// never enter the diet (they cannot raise the rate).
pub fn optimal_diet(items: &[InfoItem]) -> Result<DietSolution, ForagingError> {
    if items.is_empty() {
        return Err(ForagingError::EmptyItems);
    }
    for item in items {
        item.validate()?;
    }

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .profitability()
            .partial_cmp(&items[a].profitability())
            .unwrap()
    });

    let mut included = Vec::new();
    let mut trace = Vec::new();
    let mut gain = 0.0;
    let mut busy = 0.0;
    let mut rate = 0.0;
    for &i in &order {
        let item = &items[i];
        if item.utility == 0.0 {
            continue;
        }
        if item.profitability() >= rate {
            trace.push((i, rate));
            included.push(i);
            gain += item.encounter_rate * item.utility;
            busy += item.encounter_rate * item.handling_time;
            rate = gain / (1.0 + busy);
        } else {
            break;
        }
    }

    Ok(DietSolution {
        included,
        rate,
        threshold_trace: trace,
    })
}

/// Sensitivity of the diet rate to the prevalence of an included item:
/// ∂R/∂λᵢ = (uᵢ(1+Σλt) − tᵢΣλu) / (1+Σλt)².
pub fn rate_gradient_wrt_prevalence(
    items: &[InfoItem],
    diet: &[usize],
    index: usize,
) -> Result<f64, ForagingError> {
    check_indices(items, diet)?;
    if !diet.contains(&index) {
        return Err(ForagingError::NotInDiet(index));
    }
    let mut gain = 0.0;
    let mut busy = 0.0;
    for &i in diet {
        gain += items[i].encounter_rate * items[i].utility;
        busy += items[i].encounter_rate * items[i].handling_time;
    }
    let denom = 1.0 + busy;
    let item = &items[index];
    Ok((item.utility * denom - item.handling_time * gain) / (denom * denom))
}

/// Collapse a diet's independent encounter processes into one merged
/// process with summed rate and rate-weighted mean utility and handling
/// time.
pub fn merge_platform(items: &[InfoItem], diet: &[usize]) -> Result<PlatformParams, ForagingError> {
    check_indices(items, diet)?;
    if diet.is_empty() {
        return Err(ForagingError::EmptyDiet);
    }
    let mut total_rate = 0.0;
    let mut gain = 0.0;
    let mut busy = 0.0;
    for &i in diet {
        total_rate += items[i].encounter_rate;
        gain += items[i].encounter_rate * items[i].utility;
        busy += items[i].encounter_rate * items[i].handling_time;
    }
    Ok(PlatformParams {
        merged_rate: total_rate,
        mean_utility: gain / total_rate,
        mean_handling: busy / total_rate,
    })
}

/// Platform utility rate from the merged process: λū / (1 + λt̄).
pub fn holling_rate(p: &PlatformParams) -> f64 {
    if p.merged_rate == 0.0 {
        return 0.0;
    }
    p.merged_rate * p.mean_utility / (1.0 + p.merged_rate * p.mean_handling)
}

/// Platform diet-inclusion test: 1/(λū) + 1/r̄ ≤ 1/R_env, with equality
/// counting as included. A platform with λū = 0 is never included.
// the negated comparison deliberately rejects NaN along with non-positive values
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn platform_included(p: &PlatformParams, env_rate: f64) -> Result<bool, ForagingError> {
    if !(env_rate > 0.0) {
        return Err(ForagingError::NonPositive {
            name: "env_rate",
            value: env_rate,
        });
    }
    let encounter_gain = p.merged_rate * p.mean_utility;
    if encounter_gain == 0.0 {
        return Ok(false);
    }
    Ok(1.0 / encounter_gain + 1.0 / p.mean_item_rate() <= 1.0 / env_rate)
}

/// Result of [`min_item_size`]: the smallest mean item utility that keeps
/// a platform in the diet, or a marker that no size suffices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "u_min", rename_all = "snake_case")]
pub enum MinItemSize {
    Feasible(f64),
    Infeasible,
}

impl MinItemSize {
    pub fn feasible(&self) -> Option<f64> {
        match self {
            MinItemSize::Feasible(v) => Some(*v),
            MinItemSize::Infeasible => None,
        }
    }
}

/// Smallest mean item utility ū that satisfies the platform inclusion
/// criterion at equality: u_min = 1 / (λ(1/R_env − 1/r̄)). Infeasible when
/// r̄ ≤ R_env.
pub fn min_item_size(
    merged_rate: f64,
    mean_item_rate: f64,
    env_rate: f64,
) -> Result<MinItemSize, ForagingError> {
    for (name, value) in [
        ("merged_rate", merged_rate),
        ("mean_item_rate", mean_item_rate),
        ("env_rate", env_rate),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ForagingError::NonPositive { name, value });
        }
    }
    if mean_item_rate <= env_rate {
        return Ok(MinItemSize::Infeasible);
    }
    let slack = 1.0 / env_rate - 1.0 / mean_item_rate;
    Ok(MinItemSize::Feasible(1.0 / (merged_rate * slack)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn item(rate: f64, utility: f64, handling: f64) -> InfoItem {
        InfoItem::new(rate, utility, handling).unwrap()
    }

    fn random_items(rng: &mut ChaCha8Rng, n: usize) -> Vec<InfoItem> {
        (0..n)
            .map(|_| {
                item(
                    rng.random::<f64>() * 5.0,
                    rng.random::<f64>() * 10.0,
                    0.1 + rng.random::<f64>() * 4.0,
                )
            })
            .collect()
    }

    /// Exhaustive search over all subsets; the independent oracle for the
    /// greedy algorithm.
    fn brute_force_diet(items: &[InfoItem]) -> (Vec<usize>, f64) {
        let n = items.len();
        let mut best_rate = 0.0;
        let mut best: Vec<usize> = Vec::new();
        for mask in 0u32..(1 << n) {
            let diet: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let rate = diet_rate(items, &diet).unwrap();
            if rate > best_rate {
                best_rate = rate;
                best = diet;
            }
        }
        (best, best_rate)
    }

    #[test]
    fn diet_rate_empty_is_zero() {
        let items = vec![item(1.0, 2.0, 1.0)];
        assert_eq!(diet_rate(&items, &[]).unwrap(), 0.0);
    }

    #[test]
    fn diet_rate_direct_values() {
        let items = vec![item(1.0, 2.0, 1.0)];
        assert_eq!(diet_rate(&items, &[0]).unwrap(), 1.0);

        let items = vec![item(2.0, 3.0, 0.5), item(1.0, 1.0, 2.0)];
        assert!((diet_rate(&items, &[0, 1]).unwrap() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn diet_rate_invalid_index() {
        let items = vec![item(1.0, 2.0, 1.0)];
        assert_eq!(
            diet_rate(&items, &[3]),
            Err(ForagingError::InvalidIndex(3, 1))
        );
    }

    #[test]
    fn generalized_rate_reduces_to_diet_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let items = random_items(&mut rng, 6);
            let mask: u32 = rng.random_range(0..64);
            let diet: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
            let p: Vec<f64> = (0..6)
                .map(|i| if diet.contains(&i) { 1.0 } else { 0.0 })
                .collect();
            let a = generalized_rate(&items, &p).unwrap();
            let b = diet_rate(&items, &diet).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_rate_examples_and_errors() {
        let items = vec![item(1.0, 2.0, 1.0)];
        assert_eq!(generalized_rate(&items, &[0.0]).unwrap(), 0.0);
        assert!((generalized_rate(&items, &[0.5]).unwrap() - 1.0 / 1.5).abs() < 1e-12);
        assert!(generalized_rate(&items, &[]).is_err());
        assert!(generalized_rate(&items, &[1.5]).is_err());
    }

    #[test]
    fn optimal_diet_single_item() {
        let sol = optimal_diet(&[item(1.0, 2.0, 1.0)]).unwrap();
        assert_eq!(sol.included, vec![0]);
        assert_eq!(sol.rate, 1.0);
        assert_eq!(sol.threshold_trace, vec![(0, 0.0)]);
    }

    #[test]
    fn optimal_diet_excludes_low_profitability() {
        // A alone gives rate 100/11 > r_B = 1, so B stays out.
        let items = vec![item(10.0, 10.0, 1.0), item(10.0, 1.0, 1.0)];
        let sol = optimal_diet(&items).unwrap();
        assert_eq!(sol.included, vec![0]);
        let (bf_set, bf_rate) = brute_force_diet(&items);
        assert_eq!(sol.included, bf_set);
        assert!((sol.rate - bf_rate).abs() < 1e-12);
    }

    #[test]
    fn optimal_diet_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let items = random_items(&mut rng, n);
            let sol = optimal_diet(&items).unwrap();
            let (_, bf_rate) = brute_force_diet(&items);
            assert!(
                (sol.rate - bf_rate).abs() <= 1e-12,
                "greedy {} vs brute {}",
                sol.rate,
                bf_rate
            );
        }
    }

    #[test]
    fn optimal_diet_all_zero_utilities() {
        let items = vec![item(1.0, 0.0, 1.0), item(2.0, 0.0, 0.5)];
        let sol = optimal_diet(&items).unwrap();
        assert!(sol.included.is_empty());
        assert_eq!(sol.rate, 0.0);
    }

    #[test]
    fn zero_profit_items_never_included() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let mut items = random_items(&mut rng, 5);
            items.push(item(rng.random::<f64>() * 5.0, 0.0, 1.0));
            let sol = optimal_diet(&items).unwrap();
            assert!(!sol.included.contains(&5));
        }
    }

    #[test]
    fn included_items_satisfy_threshold_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let items = random_items(&mut rng, 7);
            let sol = optimal_diet(&items).unwrap();
            for &i in &sol.included {
                let without: Vec<usize> =
                    sol.included.iter().copied().filter(|&j| j != i).collect();
                let rate_without = diet_rate(&items, &without).unwrap();
                assert!(items[i].profitability() >= rate_without - 1e-12);
            }
            for (i, item) in items.iter().enumerate() {
                if !sol.included.contains(&i) && item.utility > 0.0 {
                    assert!(item.profitability() < sol.rate + 1e-12);
                }
            }
            let recomputed = diet_rate(&items, &sol.included).unwrap();
            assert!((recomputed - sol.rate).abs() < 1e-12);
        }
    }

    #[test]
    fn selectivity_monotone_in_prevalence_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let items = random_items(&mut rng, 6);
            let base = optimal_diet(&items).unwrap();
            let scaled: Vec<InfoItem> = items
                .iter()
                .map(|it| item(it.encounter_rate * 3.0, it.utility, it.handling_time))
                .collect();
            let boosted = optimal_diet(&scaled).unwrap();
            assert!(boosted.rate >= base.rate - 1e-12);
            let min_r = |sol: &DietSolution, items: &[InfoItem]| {
                sol.included
                    .iter()
                    .map(|&i| items[i].profitability())
                    .fold(f64::INFINITY, f64::min)
            };
            if !base.included.is_empty() && !boosted.included.is_empty() {
                assert!(min_r(&boosted, &scaled) >= min_r(&base, &items) - 1e-12);
            }
        }
    }

    #[test]
    fn gradient_direct_value() {
        let items = vec![item(1.0, 2.0, 1.0)];
        let g = rate_gradient_wrt_prevalence(&items, &[0], 0).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let items = random_items(&mut rng, 5);
            let diet: Vec<usize> = (0..5).collect();
            let idx = rng.random_range(0..5);
            let g = rate_gradient_wrt_prevalence(&items, &diet, idx).unwrap();

            let h = 1e-6;
            let mut plus = items.clone();
            plus[idx].encounter_rate += h;
            let mut minus = items.clone();
            minus[idx].encounter_rate = (minus[idx].encounter_rate - h).max(0.0);
            let fd = (diet_rate(&plus, &diet).unwrap() - diet_rate(&minus, &diet).unwrap())
                / (plus[idx].encounter_rate - minus[idx].encounter_rate);
            assert!((g - fd).abs() < 1e-4, "analytic {} vs fd {}", g, fd);
        }
    }

    #[test]
    fn gradient_nonnegative_for_optimal_diet_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..50 {
            let items = random_items(&mut rng, 6);
            let sol = optimal_diet(&items).unwrap();
            for &i in &sol.included {
                let g = rate_gradient_wrt_prevalence(&items, &sol.included, i).unwrap();
                assert!(g >= -1e-12);
            }
        }
    }

    #[test]
    fn gradient_requires_diet_membership() {
        let items = vec![item(1.0, 2.0, 1.0), item(1.0, 1.0, 1.0)];
        assert_eq!(
            rate_gradient_wrt_prevalence(&items, &[0], 1),
            Err(ForagingError::NotInDiet(1))
        );
    }

    #[test]
    fn merge_single_item_is_identity() {
        let items = vec![item(1.5, 2.0, 0.7)];
        let p = merge_platform(&items, &[0]).unwrap();
        assert_eq!(p.merged_rate, 1.5);
        // rate-weighted means round-trip through λu/λ, so compare to 1 ulp-ish
        assert!((p.mean_utility - 2.0).abs() < 1e-12);
        assert!((p.mean_handling - 0.7).abs() < 1e-12);
    }

    #[test]
    fn merge_identical_items() {
        let items = vec![item(1.0, 2.0, 1.0), item(1.0, 2.0, 1.0)];
        let p = merge_platform(&items, &[0, 1]).unwrap();
        assert_eq!(p.merged_rate, 2.0);
        assert_eq!(p.mean_utility, 2.0);
        assert_eq!(p.mean_handling, 1.0);
    }

    #[test]
    fn merge_empty_diet_is_error() {
        let items = vec![item(1.0, 2.0, 1.0)];
        assert_eq!(merge_platform(&items, &[]), Err(ForagingError::EmptyDiet));
    }

    #[test]
    fn holling_rate_equals_diet_rate_after_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let items = random_items(&mut rng, n);
            let mask: u32 = rng.random_range(1..(1 << n));
            let diet: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let merged = merge_platform(&items, &diet).unwrap();
            let a = holling_rate(&merged);
            let b = diet_rate(&items, &diet).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn holling_rate_edges() {
        let p = PlatformParams {
            merged_rate: 0.0,
            mean_utility: 5.0,
            mean_handling: 1.0,
        };
        assert_eq!(holling_rate(&p), 0.0);

        let p = PlatformParams {
            merged_rate: 1.0,
            mean_utility: 2.0,
            mean_handling: 1.0,
        };
        assert_eq!(holling_rate(&p), 1.0);

        // handling-limited asymptote
        let p = PlatformParams {
            merged_rate: 1e12,
            mean_utility: 2.0,
            mean_handling: 0.5,
        };
        assert!((holling_rate(&p) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn platform_inclusion_examples() {
        let p = PlatformParams {
            merged_rate: 1.0,
            mean_utility: 2.0,
            mean_handling: 1.0,
        };
        // holling_rate = 1.0 == env_rate: boundary counts as included
        assert!(platform_included(&p, 1.0).unwrap());
        assert!(!platform_included(&p, 2.0).unwrap());

        let p = PlatformParams {
            merged_rate: 10.0,
            mean_utility: 10.0,
            mean_handling: 0.1,
        };
        assert!(platform_included(&p, 1.0).unwrap());

        let dead = PlatformParams {
            merged_rate: 0.0,
            mean_utility: 0.0,
            mean_handling: 1.0,
        };
        assert!(!platform_included(&dead, 1.0).unwrap());
        assert!(platform_included(&p, 0.0).is_err());
    }

    #[test]
    fn min_item_size_direct_value() {
        let u = min_item_size(2.0, 4.0, 2.0).unwrap().feasible().unwrap();
        assert!((u - 2.0).abs() < 1e-12);

        // the boundary value flips platform_included
        for (scale, expect) in [(1.0 + 1e-9, true), (1.0 - 1e-9, false)] {
            let p = PlatformParams {
                merged_rate: 2.0,
                mean_utility: u * scale,
                mean_handling: u * scale / 4.0,
            };
            assert_eq!(platform_included(&p, 2.0).unwrap(), expect);
        }
    }

    #[test]
    fn min_item_size_limits() {
        // r̄ → ∞ limit is R_env / λ
        let u = min_item_size(4.0, 1e12, 2.0).unwrap().feasible().unwrap();
        assert!((u - 0.5).abs() < 1e-9);

        assert_eq!(min_item_size(2.0, 2.0, 2.0).unwrap(), MinItemSize::Infeasible);
        assert_eq!(min_item_size(2.0, 1.0, 2.0).unwrap(), MinItemSize::Infeasible);
        assert!(min_item_size(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bang_bang_never_beats_optimal_diet() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let n = rng.random_range(1..=6);
            let items = random_items(&mut rng, n);
            let best = optimal_diet(&items).unwrap().rate;
            for _ in 0..500 {
                let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                assert!(generalized_rate(&items, &p).unwrap() <= best + 1e-9);
            }
        }
    }
}
