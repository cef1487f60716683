//! Patch residence times via the marginal value theorem, and the greedy
//! patch-selection ("patches as prey") algorithm.

use serde::{Deserialize, Serialize};

use super::ForagingError;

const RATE_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-6;
const MAX_ITERATIONS: usize = 1000;
const DAMPING: f64 = 0.5;

/// Within-patch cumulative gain g(t). Both families are concave with
/// g(0) = 0 and strictly decreasing marginal gain, so the inverse of g'
/// is closed-form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GainFunction {
    /// g(t) = U·(1 − e^(−t/τ))
    ExponentialSaturating { total_utility: f64, timescale: f64 },
    /// g(t) = c·t^β with β in (0, 1)
    PowerDiminishing { coefficient: f64, exponent: f64 },
}

impl GainFunction {
    pub fn validate(&self) -> Result<(), ForagingError> {
        match *self {
            GainFunction::ExponentialSaturating {
                total_utility,
                timescale,
            } => {
                if !(total_utility > 0.0 && total_utility.is_finite()) {
                    return Err(ForagingError::InvalidPatch(format!(
                        "total_utility must be finite and > 0, got {total_utility}"
                    )));
                }
                if !(timescale > 0.0 && timescale.is_finite()) {
                    return Err(ForagingError::InvalidPatch(format!(
                        "timescale must be finite and > 0, got {timescale}"
                    )));
                }
            }
            GainFunction::PowerDiminishing {
                coefficient,
                exponent,
            } => {
                if !(coefficient > 0.0 && coefficient.is_finite()) {
                    return Err(ForagingError::InvalidPatch(format!(
                        "coefficient must be finite and > 0, got {coefficient}"
                    )));
                }
                if !(exponent > 0.0 && exponent < 1.0) {
                    return Err(ForagingError::InvalidPatch(format!(
                        "exponent must lie in (0, 1), got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            GainFunction::ExponentialSaturating {
                total_utility,
                timescale,
            } => total_utility * (1.0 - (-t / timescale).exp()),
            GainFunction::PowerDiminishing {
                coefficient,
                exponent,
            } => coefficient * t.powf(exponent),
        }
    }

    pub fn marginal(&self, t: f64) -> f64 {
        match *self {
            GainFunction::ExponentialSaturating {
                total_utility,
                timescale,
            } => total_utility / timescale * (-t / timescale).exp(),
            GainFunction::PowerDiminishing {
                coefficient,
                exponent,
            } => coefficient * exponent * t.powf(exponent - 1.0),
        }
    }

    /// g'(0⁺); infinite for the power family.
    pub fn marginal_at_zero(&self) -> f64 {
        match *self {
            GainFunction::ExponentialSaturating {
                total_utility,
                timescale,
            } => total_utility / timescale,
            GainFunction::PowerDiminishing { .. } => f64::INFINITY,
        }
    }

    /// (g')⁻¹(rate), valid for 0 < rate < g'(0⁺).
    pub fn inverse_marginal(&self, rate: f64) -> f64 {
        match *self {
            GainFunction::ExponentialSaturating {
                total_utility,
                timescale,
            } => timescale * (total_utility / (timescale * rate)).ln(),
            GainFunction::PowerDiminishing {
                coefficient,
                exponent,
            } => (coefficient * exponent / rate).powf(1.0 / (1.0 - exponent)),
        }
    }

    /// Supremum of g(t)/t over t > 0. With g concave and g(0) = 0 the
    /// profitability is decreasing in t, so the supremum is g'(0⁺).
    pub fn max_profitability(&self) -> f64 {
        self.marginal_at_zero()
    }
}

/// A patch type: encountered at `encounter_rate` while searching, yielding
/// `gain.value(t)` utility over a residence time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchType {
    pub encounter_rate: f64,
    pub gain: GainFunction,
}

impl PatchType {
    pub fn new(encounter_rate: f64, gain: GainFunction) -> Result<Self, ForagingError> {
        if !(encounter_rate >= 0.0 && encounter_rate.is_finite()) {
            return Err(ForagingError::InvalidPatch(format!(
                "encounter_rate must be finite and >= 0, got {encounter_rate}"
            )));
        }
        gain.validate()?;
        Ok(Self {
            encounter_rate,
            gain,
        })
    }
}

/// Converged (or not) residence-time assignment and the implied
/// environment-wide utility rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidenceSolution {
    /// Residence time per patch; zero means the patch is ignored.
    pub residence_times: Vec<f64>,
    pub env_rate: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn overall_rate(patches: &[PatchType], times: &[f64]) -> f64 {
    let mut gain = 0.0;
    let mut busy = 0.0;
    for (patch, &t) in patches.iter().zip(times) {
        gain += patch.encounter_rate * patch.gain.value(t);
        busy += patch.encounter_rate * t;
    }
    gain / (1.0 + busy)
}

fn times_for_rate(patches: &[PatchType], rate: f64) -> Vec<f64> {
    patches
        .iter()
        .map(|p| {
            if p.encounter_rate == 0.0 || p.gain.marginal_at_zero() <= rate {
                0.0
            } else {
                p.gain.inverse_marginal(rate)
            }
        })
        .collect()
}

/// Solve the equal-marginal condition g'_j(t_j) = R_env by damped fixed
/// point on the rate. Patches whose marginal gain never reaches the
/// environmental rate get zero residence time. Non-convergence is
/// reported, never silently returned as an answer.
pub fn mvt_solve(patches: &[PatchType]) -> Result<ResidenceSolution, ForagingError> {
    if patches.is_empty() {
        return Err(ForagingError::EmptyPatches);
    }
    for p in patches {
        p.gain.validate()?;
    }

    if patches.iter().all(|p| p.encounter_rate == 0.0) {
        return Ok(ResidenceSolution {
            residence_times: vec![0.0; patches.len()],
            env_rate: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    // Initial guess: a characteristic time per patch gives a strictly
    // positive starting rate.
    let init: Vec<f64> = patches
        .iter()
        .map(|p| match p.gain {
            GainFunction::ExponentialSaturating { timescale, .. } => timescale,
            GainFunction::PowerDiminishing { .. } => 1.0,
        })
        .collect();
    let mut rate = overall_rate(patches, &init);
    let mut times = init;
    let mut iterations = 0;
    let mut converged = false;

    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        times = times_for_rate(patches, rate);
        let next = overall_rate(patches, &times);
        let delta = next - rate;
        rate += DAMPING * delta;
        if delta.abs() < RATE_TOL {
            converged = true;
            break;
        }
    }

    if converged {
        // Land exactly on the equal-marginal point for the final rate.
        times = times_for_rate(patches, rate);
        for (patch, &t) in patches.iter().zip(&times) {
            if t > 0.0 {
                debug_assert!((patch.gain.marginal(t) - rate).abs() <= RESIDUAL_TOL);
            }
        }
    }

    Ok(ResidenceSolution {
        residence_times: times,
        env_rate: rate,
        iterations,
        converged,
    })
}

/// Greedy patch selection: rank patches by maximum profitability, add one
/// at a time and re-solve the marginal value theorem, stopping when a new
/// patch lowers the environmental rate or solves to zero residence time.
///
/// Returns the selected patch indices (in ranking order) and the solution
/// over the full input list (zero residence time for unselected patches).
pub fn patches_as_prey(
    patches: &[PatchType],
) -> Result<(Vec<usize>, ResidenceSolution), ForagingError> {
    if patches.is_empty() {
        return Err(ForagingError::EmptyPatches);
    }
    for p in patches {
        p.gain.validate()?;
    }

    let mut order: Vec<usize> = (0..patches.len()).collect();
    order.sort_by(|&a, &b| {
        patches[b]
            .gain
            .max_profitability()
            .partial_cmp(&patches[a].gain.max_profitability())
            .unwrap()
    });

    let mut selected: Vec<usize> = Vec::new();
    let mut best: Option<ResidenceSolution> = None;
    for &idx in &order {
        let mut trial = selected.clone();
        trial.push(idx);
        let subset: Vec<PatchType> = trial.iter().map(|&i| patches[i]).collect();
        let sol = mvt_solve(&subset)?;
        if let Some(prev) = &best {
            let new_patch_time = *sol.residence_times.last().unwrap();
            if sol.env_rate < prev.env_rate - RATE_TOL || new_patch_time == 0.0 {
                break;
            }
        }
        selected = trial;
        best = Some(sol);
    }

    let sub = best.expect("at least one patch is always tried");
    let mut times = vec![0.0; patches.len()];
    for (slot, &idx) in sub.residence_times.iter().zip(&selected) {
        times[idx] = *slot;
    }
    let full = ResidenceSolution {
        residence_times: times,
        env_rate: sub.env_rate,
        iterations: sub.iterations,
        converged: sub.converged,
    };
    Ok((selected, full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn exp_patch(rate: f64, total: f64, tau: f64) -> PatchType {
        PatchType::new(
            rate,
            GainFunction::ExponentialSaturating {
                total_utility: total,
                timescale: tau,
            },
        )
        .unwrap()
    }

    fn pow_patch(rate: f64, c: f64, beta: f64) -> PatchType {
        PatchType::new(
            rate,
            GainFunction::PowerDiminishing {
                coefficient: c,
                exponent: beta,
            },
        )
        .unwrap()
    }

    fn random_patches(rng: &mut ChaCha8Rng, n: usize) -> Vec<PatchType> {
        (0..n)
            .map(|_| {
                if rng.random::<bool>() {
                    exp_patch(
                        0.1 + rng.random::<f64>() * 2.0,
                        0.5 + rng.random::<f64>() * 5.0,
                        0.2 + rng.random::<f64>() * 3.0,
                    )
                } else {
                    pow_patch(
                        0.1 + rng.random::<f64>() * 2.0,
                        0.2 + rng.random::<f64>() * 3.0,
                        0.2 + rng.random::<f64>() * 0.6,
                    )
                }
            })
            .collect()
    }

    #[test]
    fn gain_families_basic_shape() {
        let g = GainFunction::ExponentialSaturating {
            total_utility: 3.0,
            timescale: 2.0,
        };
        assert_eq!(g.value(0.0), 0.0);
        assert!((g.marginal(0.0) - 1.5).abs() < 1e-15);
        let t = g.inverse_marginal(0.7);
        assert!((g.marginal(t) - 0.7).abs() < 1e-12);

        let g = GainFunction::PowerDiminishing {
            coefficient: 2.0,
            exponent: 0.5,
        };
        assert_eq!(g.value(0.0), 0.0);
        let t = g.inverse_marginal(0.3);
        assert!((g.marginal(t) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn mvt_single_patch_satisfies_charnov() {
        let patch = exp_patch(100.0, 4.0, 1.0);
        let sol = mvt_solve(&[patch]).unwrap();
        assert!(sol.converged);
        let t = sol.residence_times[0];
        assert!(t > 0.0);
        assert!((patch.gain.marginal(t) - sol.env_rate).abs() <= 1e-6);
        // self-consistency: the rate equation holds at the solution
        let direct = 100.0 * patch.gain.value(t) / (1.0 + 100.0 * t);
        assert!((direct - sol.env_rate).abs() < 1e-7);
    }

    #[test]
    fn mvt_ignores_patch_below_environmental_rate() {
        let rich = exp_patch(10.0, 10.0, 0.5);
        let poor = exp_patch(1.0, 0.01, 10.0); // g'(0) = 0.001
        let sol = mvt_solve(&[rich, poor]).unwrap();
        assert!(sol.converged);
        assert!(sol.residence_times[0] > 0.0);
        assert_eq!(sol.residence_times[1], 0.0);
        assert!(poor.gain.marginal_at_zero() < sol.env_rate);
    }

    #[test]
    fn mvt_residuals_and_local_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let patches = random_patches(&mut rng, n);
            let sol = mvt_solve(&patches).unwrap();
            assert!(sol.converged, "failed to converge on {:?}", patches);
            for (p, &t) in patches.iter().zip(&sol.residence_times) {
                if t > 0.0 {
                    assert!((p.gain.marginal(t) - sol.env_rate).abs() <= 1e-6);
                } else {
                    assert!(p.gain.marginal_at_zero() <= sol.env_rate + 1e-6);
                }
            }
            // perturbing any positive residence time cannot raise the rate
            for j in 0..patches.len() {
                if sol.residence_times[j] == 0.0 {
                    continue;
                }
                for factor in [0.9, 1.1] {
                    let mut times = sol.residence_times.clone();
                    times[j] *= factor;
                    let perturbed = overall_rate(&patches, &times);
                    assert!(perturbed <= sol.env_rate + 1e-9);
                }
            }
        }
    }

    #[test]
    fn mvt_empty_is_error() {
        assert_eq!(mvt_solve(&[]), Err(ForagingError::EmptyPatches));
    }

    #[test]
    fn patches_as_prey_single() {
        let patch = exp_patch(1.0, 3.0, 1.0);
        let (selected, sol) = patches_as_prey(&[patch]).unwrap();
        assert_eq!(selected, vec![0]);
        let direct = mvt_solve(&[patch]).unwrap();
        assert_eq!(sol.residence_times, direct.residence_times);
        assert_eq!(sol.env_rate, direct.env_rate);
    }

    #[test]
    fn patches_as_prey_drops_negligible_patch() {
        let dominant = exp_patch(50.0, 100.0, 0.1);
        let solo = mvt_solve(&[dominant]).unwrap();
        // negligible patch whose marginal gain never reaches the solo rate
        let negligible = exp_patch(1.0, solo.env_rate * 0.01, 1.0);
        let (selected, sol) = patches_as_prey(&[negligible, dominant]).unwrap();
        assert_eq!(selected, vec![1]);
        assert_eq!(sol.residence_times[0], 0.0);
        assert!((sol.env_rate - solo.env_rate).abs() < 1e-9);
    }

    #[test]
    fn patches_as_prey_beats_every_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for _ in 0..30 {
            let n = rng.random_range(1..=6);
            let patches = random_patches(&mut rng, n);
            let (_, sol) = patches_as_prey(&patches).unwrap();

            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                patches[b]
                    .gain
                    .max_profitability()
                    .partial_cmp(&patches[a].gain.max_profitability())
                    .unwrap()
            });
            for len in 1..=n {
                let subset: Vec<PatchType> = order[..len].iter().map(|&i| patches[i]).collect();
                let prefix = mvt_solve(&subset).unwrap();
                assert!(sol.env_rate >= prefix.env_rate - 1e-7);
            }
        }
    }
}
