//! Deterministic benchmark environments.
//!
//! Each environment supplies linear dynamics `g(U)`, a 3-feature map `Φ`, a
//! hand-coded hypothesis set and a bank of feasible trajectories. They are
//! registered by name: `"lavaworld"` and `"coffeeworld"`.

pub mod coffeeworld;
pub mod lavaworld;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::types::{
    ChoiceSet, FeatureMap, FeatureVector, InputSequence, Provenance, RewardHypothesis, Trajectory,
};

pub use coffeeworld::{CoffeeWorld, CoffeeWorldSpec};
pub use lavaworld::{Lavaworld, LavaworldSpec};

pub const ENV_NAMES: [&str; 2] = ["lavaworld", "coffeeworld"];

/// Rollout model that is affine in the input sequence. Counterfactual
/// solvers only see this unclamped form.
pub trait Dynamics {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory>;
}

impl<D: Dynamics + ?Sized> Dynamics for &D {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
        (**self).rollout_linear(x0, inputs)
    }
}

/// Single integrator `x_{t+1} = x_t + u_t` in `dim` dimensions, no bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Integrator {
    pub dim: usize,
}

impl Dynamics for Integrator {
    fn state_dim(&self) -> usize {
        self.dim
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
        if x0.len() != self.dim || inputs.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: if x0.len() != self.dim { x0.len() } else { inputs.dim() },
            });
        }
        let mut x = x0.to_vec();
        let mut data = x.clone();
        for t in 0..inputs.len() {
            x.iter_mut().zip(inputs.input(t)).for_each(|(a, u)| *a += u);
            data.extend_from_slice(&x);
        }
        Trajectory::from_flat(self.dim, data)
    }
}

/// Counts of values clipped during a bounded rollout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RolloutDiagnostics {
    pub clamped_inputs: usize,
    pub clamped_states: usize,
}

impl RolloutDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.clamped_inputs == 0 && self.clamped_states == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Env {
    Lavaworld(Lavaworld),
    CoffeeWorld(CoffeeWorld),
}

/// Serializable environment selection with optional geometry overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnvSpec {
    Lavaworld(#[serde(default)] LavaworldSpec),
    CoffeeWorld(#[serde(default)] CoffeeWorldSpec),
}

impl EnvSpec {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "lavaworld" => Ok(EnvSpec::Lavaworld(LavaworldSpec::default())),
            "coffeeworld" => Ok(EnvSpec::CoffeeWorld(CoffeeWorldSpec::default())),
            other => Err(Error::UnknownName {
                kind: "environment",
                name: other.to_string(),
                valid: ENV_NAMES.join(", "),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Lavaworld(_) => "lavaworld",
            EnvSpec::CoffeeWorld(_) => "coffeeworld",
        }
    }

    pub fn build(&self) -> Result<Env> {
        Ok(match self {
            EnvSpec::Lavaworld(s) => Env::Lavaworld(Lavaworld::new(s.clone())?),
            EnvSpec::CoffeeWorld(s) => Env::CoffeeWorld(CoffeeWorld::new(s.clone())?),
        })
    }
}

impl Env {
    pub fn by_name(name: &str) -> Result<Self> {
        EnvSpec::by_name(name)?.build()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Env::Lavaworld(_) => "lavaworld",
            Env::CoffeeWorld(_) => "coffeeworld",
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Env::Lavaworld(l) => l.spec().horizon,
            Env::CoffeeWorld(c) => c.spec().horizon,
        }
    }

    pub fn start_state(&self) -> Vec<f64> {
        match self {
            Env::Lavaworld(l) => l.spec().start.to_vec(),
            Env::CoffeeWorld(c) => vec![c.spec().start_x, 0.0],
        }
    }

    /// Per-component input bound `‖u‖∞ ≤ max_input`.
    pub fn max_input(&self) -> f64 {
        match self {
            Env::Lavaworld(l) => l.spec().max_input,
            Env::CoffeeWorld(c) => c.spec().max_input,
        }
    }

    /// Bounded rollout: inputs are clipped to the box (and Lavaworld states
    /// to the unit square); clipping is counted in the diagnostics.
    pub fn rollout(&self, x0: &[f64], inputs: &InputSequence) -> Result<(Trajectory, RolloutDiagnostics)> {
        match self {
            Env::Lavaworld(l) => l.rollout(x0, inputs),
            Env::CoffeeWorld(c) => c.rollout(x0, inputs),
        }
    }

    pub fn hypotheses(&self) -> Vec<RewardHypothesis> {
        match self {
            Env::Lavaworld(l) => l.hypotheses(),
            Env::CoffeeWorld(c) => c.hypotheses(),
        }
    }

    /// Index of the default teacher's reward within [`Env::hypotheses`].
    pub fn true_index(&self) -> usize {
        match self {
            Env::Lavaworld(_) => lavaworld::TRUE_HYPOTHESIS,
            Env::CoffeeWorld(_) => coffeeworld::TRUE_HYPOTHESIS,
        }
    }

    /// The default teacher's reward.
    pub fn true_theta(&self) -> RewardHypothesis {
        self.hypotheses().swap_remove(self.true_index())
    }

    pub fn feature_names(&self) -> [&'static str; 3] {
        match self {
            Env::Lavaworld(_) => lavaworld::FEATURE_NAMES,
            Env::CoffeeWorld(_) => coffeeworld::FEATURE_NAMES,
        }
    }

    pub fn as_lavaworld(&self) -> Option<&Lavaworld> {
        match self {
            Env::Lavaworld(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_coffeeworld(&self) -> Option<&CoffeeWorld> {
        match self {
            Env::CoffeeWorld(c) => Some(c),
            _ => None,
        }
    }

    /// Clamped rollout from the start state.
    pub fn rollout_from_start(&self, inputs: &InputSequence) -> Result<Trajectory> {
        Ok(self.rollout(&self.start_state(), inputs)?.0)
    }

    /// Reward of the bounded rollout of `inputs` from the start state.
    pub fn reward_of_inputs(&self, theta: &RewardHypothesis, inputs: &InputSequence) -> Result<f64> {
        theta.reward(&self.features(&self.rollout_from_start(inputs)?))
    }

    /// Feasible trajectories for the overestimating baseline and for
    /// optimal-trajectory search.
    ///
    /// For every hypothesis a random-restart hill climb over in-box inputs
    /// contributes its best rollout; random smooth input sequences fill the
    /// bank up to `size`. Deterministic given `seed`.
    pub fn candidate_bank(
        &self,
        hypotheses: &[RewardHypothesis],
        size: usize,
        seed: u64,
    ) -> Result<ChoiceSet> {
        if size < hypotheses.len() {
            return Err(Error::param(
                "size",
                format!("bank size {size} is smaller than the {} hypotheses", hypotheses.len()),
            ));
        }
        let mut bank = ChoiceSet::new();
        for (h, theta) in hypotheses.iter().enumerate() {
            let inputs = self.optimize_inputs(theta, seed, h as u64)?;
            bank.insert(self.rollout_from_start(&inputs)?, Provenance::Bank);
        }
        let mut rng = rng_for(seed, &[0xba4c, u64::MAX]);
        let mut attempts = 0;
        while bank.len() < size && attempts < 50 * size {
            attempts += 1;
            let inputs = self.random_smooth_inputs(&mut rng)?;
            bank.insert(self.rollout_from_start(&inputs)?, Provenance::Bank);
        }
        Ok(bank)
    }

    /// Random smooth in-box inputs: piecewise-linear interpolation of a few
    /// control points scattered around a random fraction of the straight
    /// start-to-goal velocity.
    pub fn random_smooth_inputs<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<InputSequence> {
        let t_len = self.horizon();
        let m = self.input_dim();
        let u_max = self.max_input();
        let drift = self.goal_drift();
        let knots = 4usize;
        let fraction: f64 = rng.random_range(0.0..1.5);
        let mut ctrl = vec![vec![0.0; m]; knots];
        for c in ctrl.iter_mut() {
            for j in 0..m {
                c[j] = fraction * drift[j] + rng.random_range(-0.6..0.6) * u_max;
            }
        }
        let mut data = Vec::with_capacity(t_len * m);
        for t in 0..t_len {
            let pos = t as f64 * (knots - 1) as f64 / (t_len - 1).max(1) as f64;
            let k = (pos.floor() as usize).min(knots - 2);
            let a = pos - k as f64;
            for (lo, hi) in ctrl[k].iter().zip(&ctrl[k + 1]) {
                data.push(((1.0 - a) * lo + a * hi).clamp(-u_max, u_max));
            }
        }
        InputSequence::from_flat(m, data)
    }

    /// Per-step input that would move straight from start to goal.
    fn goal_drift(&self) -> Vec<f64> {
        let t = self.horizon() as f64;
        match self {
            Env::Lavaworld(l) => {
                let s = l.spec();
                vec![(s.goal[0] - s.start[0]) / t, (s.goal[1] - s.start[1]) / t]
            }
            Env::CoffeeWorld(c) => vec![(c.spec().goal_x - c.spec().start_x) / t],
        }
    }

    /// Random-restart hill climb over in-box inputs maximizing `r_θ` of the
    /// bounded rollout. Each restart starts from the best of a batch of
    /// random smooth sequences; moves are Gaussian nudges or jumps of one
    /// step to a bound or zero (the spill count is piecewise constant).
    /// `stream` selects an independent random stream.
    pub fn optimize_inputs(&self, theta: &RewardHypothesis, seed: u64, stream: u64) -> Result<InputSequence> {
        const RESTARTS: u64 = 4;
        const ITERS: usize = 1500;
        const START_BATCH: usize = 64;
        let u_max = self.max_input();
        let m = self.input_dim();
        let mut best: Option<(f64, InputSequence)> = None;
        for restart in 0..RESTARTS {
            let mut rng = rng_for(seed, &[0xb111, stream, restart]);
            let mut current = self.random_smooth_inputs(&mut rng)?;
            let mut current_r = self.reward_of_inputs(theta, &current)?;
            for _ in 1..START_BATCH {
                let cand = self.random_smooth_inputs(&mut rng)?;
                let r = self.reward_of_inputs(theta, &cand)?;
                if r > current_r {
                    current = cand;
                    current_r = r;
                }
            }
            for it in 0..ITERS {
                let scale = u_max * (0.5 * (1.0 - it as f64 / ITERS as f64) + 0.01);
                let mut cand = current.as_flat().to_vec();
                let kind: f64 = rng.random();
                if kind < 0.15 {
                    let i = rng.random_range(0..cand.len());
                    cand[i] = [-u_max, 0.0, u_max][rng.random_range(0..3)];
                } else if kind < 0.4 {
                    for v in cand.iter_mut() {
                        *v += 0.3 * scale * rng.sample::<f64, _>(StandardNormal);
                    }
                } else {
                    let t = rng.random_range(0..self.horizon());
                    for j in 0..m {
                        cand[t * m + j] += scale * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                cand.iter_mut().for_each(|v| *v = v.clamp(-u_max, u_max));
                let cand = InputSequence::from_flat(m, cand)?;
                let r = self.reward_of_inputs(theta, &cand)?;
                if r > current_r {
                    current = cand;
                    current_r = r;
                }
            }
            if best.as_ref().is_none_or(|(b, _)| current_r > *b) {
                best = Some((current_r, current));
            }
        }
        Ok(best.expect("at least one restart").1)
    }

    /// Hypothesis set plus candidate bank.
    pub fn bundle(&self, bank_size: usize, seed: u64) -> Result<EnvBundle> {
        let hypotheses = self.hypotheses();
        let bank = self.candidate_bank(&hypotheses, bank_size, seed)?;
        Ok(EnvBundle {
            env: self.clone(),
            hypotheses,
            bank,
        })
    }
}

impl Dynamics for Env {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        match self {
            Env::Lavaworld(l) => l.input_dim(),
            Env::CoffeeWorld(c) => c.input_dim(),
        }
    }

    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
        match self {
            Env::Lavaworld(l) => l.rollout_linear(x0, inputs),
            Env::CoffeeWorld(c) => c.rollout_linear(x0, inputs),
        }
    }
}

impl FeatureMap for Env {
    fn num_features(&self) -> usize {
        3
    }

    fn features(&self, xi: &Trajectory) -> FeatureVector {
        match self {
            Env::Lavaworld(l) => l.features(xi),
            Env::CoffeeWorld(c) => c.features(xi),
        }
    }
}

/// An environment with its hypothesis set and candidate bank.
#[derive(Clone, Debug)]
pub struct EnvBundle {
    pub env: Env,
    pub hypotheses: Vec<RewardHypothesis>,
    pub bank: ChoiceSet,
}

impl EnvBundle {
    /// Index into the bank of the trajectory maximizing `r_θ`; ties go to the
    /// earliest member.
    pub fn best_in_bank(&self, theta: &RewardHypothesis) -> Result<usize> {
        argmax_reward(&self.bank, theta, &self.env)
    }
}

/// Index of the member of `set` with the highest `r_θ` (earliest on ties).
pub fn argmax_reward<F: FeatureMap + ?Sized>(
    set: &ChoiceSet,
    theta: &RewardHypothesis,
    features: &F,
) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptyChoiceSet);
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, t) in set.iter().enumerate() {
        let r = theta.reward(&features.features(t))?;
        if r > best.1 {
            best = (i, r);
        }
    }
    Ok(best.0)
}
