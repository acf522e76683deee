//! Simulated Boltzmann-rational teachers whose choice sets are shaped by a
//! limitation, and the bound on how often such a teacher shows a
//! minimal-reward trajectory.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environments::{Dynamics, Env, Lavaworld};
use crate::error::{Error, Result};
use crate::inference::{boltzmann_probabilities, Rationality};
use crate::seed::rng_for;
use crate::types::{ChoiceSet, DemonstrationSet, FeatureMap, InputSequence, Provenance, RewardHypothesis};

/// Repulsion gains swept by the visibility-limited planner.
pub const VISIBILITY_GAINS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// What keeps the teacher from producing every feasible trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Limitation {
    /// Lavaworld: the lava is only noticed within `radius` of the current
    /// position.
    Visibility { radius: f64 },
    /// CoffeeWorld: every non-zero input has magnitude at least `u_min`.
    MinInput { u_min: f64 },
    None,
}

impl Limitation {
    fn validate(&self) -> Result<()> {
        match *self {
            Limitation::Visibility { radius } if !(radius > 0.0) => {
                Err(Error::param("radius", "visibility radius must be positive"))
            }
            Limitation::MinInput { u_min } if !(u_min > 0.0) || !u_min.is_finite() => {
                Err(Error::param("u_min", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Whether the teacher can in fact reach every trajectory it wants.
    pub fn is_inactive(&self) -> bool {
        match *self {
            Limitation::None => true,
            // the lava is visible from anywhere in the unit square
            Limitation::Visibility { radius } => radius >= std::f64::consts::SQRT_2,
            Limitation::MinInput { .. } => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherSpec {
    pub true_theta: RewardHypothesis,
    pub beta_h: Rationality,
    pub limitation: Limitation,
    pub choice_set_size: usize,
}

impl TeacherSpec {
    pub fn validate(&self) -> Result<()> {
        self.limitation.validate()?;
        if self.choice_set_size < 2 {
            return Err(Error::param("choice_set_size", "must be >= 2"));
        }
        Ok(())
    }
}

/// The teacher's true choice set `C_H`.
///
/// * visibility: rollouts of a greedy planner that heads for the goal and
///   only steers around the lava once it is within `radius`; gains from
///   [`VISIBILITY_GAINS`], speed, aim point, turning side and an optional
///   early stop vary per member;
/// * min-input: one or two constant-speed pushes, so every step is either
///   idle or moves with magnitude in `[u_min, max_input]`;
/// * none: the planner with unlimited visibility (Lavaworld) or random
///   unconstrained inputs (CoffeeWorld).
///
/// An inactive limitation also contributes the unconstrained optimum for
/// `true_theta` (as found by [`Env::optimize_inputs`] on stream 0).
/// Fails with [`Error::ChoiceSetTooSmall`] when deduplication leaves fewer
/// than `choice_set_size` members after a bounded number of attempts.
pub fn build_human_choice_set(env: &Env, teacher: &TeacherSpec, seed: u64) -> Result<ChoiceSet> {
    teacher.validate()?;
    let size = teacher.choice_set_size;
    let mut set = ChoiceSet::new();
    if teacher.limitation.is_inactive() {
        let best = env.optimize_inputs(&teacher.true_theta, seed, 0)?;
        set.insert(env.rollout_from_start(&best)?, Provenance::Human);
    }
    let mut attempt = 0u64;
    let max_attempts = 50 * size as u64;
    while set.len() < size && attempt < max_attempts {
        let inputs = match (&teacher.limitation, env) {
            (Limitation::Visibility { radius }, Env::Lavaworld(lava)) => {
                visibility_inputs(lava, *radius, seed, attempt)?
            }
            (Limitation::None, Env::Lavaworld(lava)) => visibility_inputs(lava, f64::INFINITY, seed, attempt)?,
            (Limitation::MinInput { u_min }, Env::CoffeeWorld(_)) => {
                min_input_inputs(env, *u_min, seed, attempt)?
            }
            (Limitation::None, Env::CoffeeWorld(_)) => min_input_inputs(env, 0.0, seed, attempt)?,
            (lim, env) => {
                return Err(Error::param(
                    "limitation",
                    format!("{lim:?} does not apply to {}", env.name()),
                ))
            }
        };
        set.insert(env.rollout_from_start(&inputs)?, Provenance::Human);
        attempt += 1;
    }
    if set.len() < size {
        return Err(Error::ChoiceSetTooSmall {
            requested: size,
            achieved: set.len(),
        });
    }
    Ok(set)
}

/// Inputs of the greedy planner for one member of a visibility-limited
/// choice set.
pub fn visibility_inputs(lava: &Lavaworld, radius: f64, seed: u64, member: u64) -> Result<InputSequence> {
    let spec = lava.spec();
    let mut rng = rng_for(seed, &[0x7615, member]);
    let gain = VISIBILITY_GAINS[(member % VISIBILITY_GAINS.len() as u64) as usize];
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let aim = [
        spec.goal[0] + rng.random_range(-0.05..0.05),
        spec.goal[1] + rng.random_range(-0.05..0.05),
    ];
    let straight = ((spec.goal[0] - spec.start[0]).powi(2) + (spec.goal[1] - spec.start[1]).powi(2)).sqrt()
        / spec.horizon as f64;
    let speed = straight * rng.random_range(0.8..1.6);
    // a quarter of the repertoire gives up partway
    let stop_after = if rng.random_bool(0.25) {
        rng.random_range(1..spec.horizon)
    } else {
        spec.horizon
    };
    let u_max = spec.max_input;

    let mut x = spec.start;
    let mut data = Vec::with_capacity(2 * spec.horizon);
    for t in 0..spec.horizon {
        if t >= stop_after {
            data.extend_from_slice(&[0.0, 0.0]);
            continue;
        }
        let to_aim = [aim[0] - x[0], aim[1] - x[1]];
        let dist = (to_aim[0].powi(2) + to_aim[1].powi(2)).sqrt();
        if dist < 1e-9 {
            data.extend_from_slice(&[0.0, 0.0]);
            continue;
        }
        let mut dir = [to_aim[0] / dist, to_aim[1] / dist];
        if gain > 0.0 && lava.lava_gap(&x) <= radius {
            let c = spec.lava_center;
            let away = [x[0] - c[0], x[1] - c[1]];
            let n = (away[0].powi(2) + away[1].powi(2)).sqrt().max(1e-12);
            let away = [away[0] / n, away[1] / n];
            // sideways component breaks the deadlock of heading straight at the centre
            let tangent = [-away[1] * side, away[0] * side];
            dir[0] += gain * (away[0] + tangent[0]);
            dir[1] += gain * (away[1] + tangent[1]);
            let n = (dir[0].powi(2) + dir[1].powi(2)).sqrt().max(1e-12);
            dir = [dir[0] / n, dir[1] / n];
        }
        let step = speed.min(dist);
        let u = [
            (step * dir[0]).clamp(-u_max, u_max),
            (step * dir[1]).clamp(-u_max, u_max),
        ];
        x = [(x[0] + u[0]).clamp(0.0, 1.0), (x[1] + u[1]).clamp(0.0, 1.0)];
        data.extend_from_slice(&u);
    }
    InputSequence::from_flat(2, data)
}

/// Inputs for one member of a min-input choice set: one or two
/// constant-speed forward pushes that together carry the cup to the goal
/// (up to a ±10% landing error), each step idle or moving with magnitude in
/// `[u_min, max_input]`. Falls back to standing still when no such pushes
/// fit in the horizon.
pub fn min_input_inputs(env: &Env, u_min: f64, seed: u64, member: u64) -> Result<InputSequence> {
    let u_max = env.max_input();
    if u_min > u_max {
        return Err(Error::param("u_min", format!("exceeds the input bound {u_max}")));
    }
    let Some(coffee) = env.as_coffeeworld() else {
        return Err(Error::param("limitation", "min-input teachers need coffeeworld"));
    };
    let (start, goal) = (coffee.spec().start_x, coffee.spec().goal_x);
    let mut rng = rng_for(seed, &[0xc0ff, member]);
    let t_len = env.horizon();
    for _ in 0..MIN_INPUT_TRIES {
        let total = (goal - start) * rng.random_range(0.9..=1.1);
        let parts = if rng.random_bool(0.4) {
            let f = rng.random_range(0.3..=0.7);
            vec![total * f, total * (1.0 - f)]
        } else {
            vec![total]
        };
        let wanted = parts.len();
        let mut pushes = Vec::with_capacity(wanted);
        for d in parts {
            let lo = ((d.abs() / u_max) - 1e-9).ceil().max(1.0) as usize;
            let hi = if u_min > 0.0 { ((d.abs() / u_min) + 1e-9).floor() as usize } else { t_len }.min(t_len);
            if lo > hi {
                break;
            }
            let k = rng.random_range(lo..=hi);
            pushes.push((k, d / k as f64));
        }
        let used: usize = pushes.iter().map(|p| p.0).sum();
        if pushes.len() == wanted && used <= t_len {
            let mut data = vec![0.0; t_len];
            let mut slack = t_len - used;
            let mut t = 0;
            for (k, speed) in pushes {
                let gap = rng.random_range(0..=slack);
                slack -= gap;
                t += gap;
                data[t..t + k].iter_mut().for_each(|u| *u = speed);
                t += k;
            }
            return InputSequence::from_flat(env.input_dim(), data);
        }
    }
    InputSequence::from_flat(env.input_dim(), vec![0.0; t_len])
}

const MIN_INPUT_TRIES: usize = 64;

/// Draws `n` i.i.d. demonstrations from the Boltzmann distribution over
/// `C_H` at the teacher's `β_h` and true reward.
pub fn sample_demonstrations<F: FeatureMap + ?Sized>(
    choice_set: &ChoiceSet,
    teacher: &TeacherSpec,
    n: usize,
    features: &F,
    seed: u64,
) -> Result<DemonstrationSet> {
    if choice_set.is_empty() {
        return Err(Error::EmptyChoiceSet);
    }
    let rewards = choice_set
        .iter()
        .map(|t| teacher.true_theta.reward(&features.features(t)))
        .collect::<Result<Vec<_>>>()?;
    let picks = sample_boltzmann(&rewards, teacher.beta_h, n, seed)?;
    DemonstrationSet::new(picks.into_iter().map(|i| choice_set.get(i).clone()).collect())
}

/// `n` i.i.d. indices drawn with probability `∝ exp(β r_i)`.
pub fn sample_boltzmann(rewards: &[f64], beta: Rationality, n: usize, seed: u64) -> Result<Vec<usize>> {
    let probs = boltzmann_probabilities(rewards, beta);
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::param("rewards", e.to_string()))?;
    let mut rng = rng_for(seed, &[0xde40]);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// Affine rescaling of `rewards` onto `[0, 1]`.
pub fn normalize_rewards(rewards: &[f64]) -> Result<Vec<f64>> {
    let lo = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("rewards", "need at least two distinct finite rewards"));
    }
    Ok(rewards.iter().map(|r| (r - lo) / (hi - lo)).collect())
}

/// Upper bound on the probability that `n` Boltzmann draws over
/// `choice_size` options with rewards normalized to `[0, 1]` ever show a
/// minimal-reward option: `1 − [(m − 2 + e^β)/(m − 1 + e^β)]^n`.
pub fn prop4_bound(choice_size: usize, beta: Rationality, n: usize) -> Result<f64> {
    if choice_size < 2 {
        return Err(Error::param("choice_size", "must be >= 2"));
    }
    if n < 1 {
        return Err(Error::param("n", "must be >= 1"));
    }
    let m = choice_size as f64;
    // per-draw probability of the target, 1 / (m − 1 + e^β), written to survive large β
    let q = (-beta.value()).exp();
    let p = q / (1.0 + (m - 1.0) * q);
    Ok(-(n as f64 * (-p).ln_1p()).exp_m1())
}

/// Monte Carlo estimate of the probability in [`prop4_bound`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop4Estimate {
    pub bound: f64,
    pub estimate: f64,
    pub trials: usize,
    /// Binomial standard deviation of the estimate at `p = bound`.
    pub sigma: f64,
}

impl Prop4Estimate {
    /// `|estimate − bound| ≤ k σ`.
    pub fn within(&self, k: f64) -> bool {
        (self.estimate - self.bound).abs() <= k * self.sigma
    }
}

/// Simulates the extremal reward profile (one option with reward 1, the rest
/// 0, target among the zeros): each trial makes `n` Boltzmann draws from its
/// own derived stream and records whether the target appeared.
pub fn prop4_monte_carlo(choice_size: usize, beta: Rationality, n: usize, trials: usize, seed: u64) -> Result<Prop4Estimate> {
    let bound = prop4_bound(choice_size, beta, n)?;
    if trials < 1 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    let mut rewards = vec![0.0; choice_size];
    rewards[0] = 1.0;
    let target = 1;
    let probs = boltzmann_probabilities(&rewards, beta);
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::param("beta", e.to_string()))?;
    let hits: usize = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(seed, &[0x9404, trial]);
            usize::from((0..n).any(|_| dist.sample(&mut rng) == target))
        })
        .sum();
    Ok(Prop4Estimate {
        bound,
        estimate: hits as f64 / trials as f64,
        trials,
        sigma: (bound * (1.0 - bound) / trials as f64).sqrt(),
    })
}
