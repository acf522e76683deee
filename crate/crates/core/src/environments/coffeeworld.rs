//! Carrying a cup along a table where translation tilts the cup.
//!
//! State `(x, φ)`: position and tilt. Input `u`, `|u| ≤ max_input`:
//!
//! ```text
//! x_{t+1} = x_t + u_t
//! φ_{t+1} = decay · φ_t + coupling · u_t
//! ```
//!
//! Features, all `≤ 0`:
//!
//! | index | feature | range |
//! |-------|---------|-------|
//! | 0 | `−|x_T − goal_x|` | `[−(|goal_x − start_x| + T·max_input), 0]` |
//! | 1 | `−Σ_t |φ_t|` | `[−T·|coupling|·max_input / (1 − decay), 0]` |
//! | 2 | `−Σ_t 1[|φ_t| > spill_threshold]` (spill count) | `[−T, 0]` |

use serde::{Deserialize, Serialize};

use super::{Dynamics, RolloutDiagnostics};
use crate::error::{Error, Result};
use crate::types::{FeatureMap, FeatureVector, InputSequence, RewardHypothesis, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoffeeWorldSpec {
    pub start_x: f64,
    pub goal_x: f64,
    pub coupling: f64,
    pub tilt_decay: f64,
    /// Radians.
    pub spill_threshold: f64,
    pub horizon: usize,
    pub max_input: f64,
}

impl Default for CoffeeWorldSpec {
    fn default() -> Self {
        Self {
            start_x: 0.1,
            goal_x: 0.9,
            coupling: 0.6,
            tilt_decay: 0.85,
            spill_threshold: 0.35,
            horizon: 12,
            max_input: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoffeeWorld {
    spec: CoffeeWorldSpec,
}

pub const FEATURE_NAMES: [&str; 3] = ["goal_distance", "tilt", "spills"];

/// Index of the default teacher's reward in [`CoffeeWorld::hypotheses`].
pub const TRUE_HYPOTHESIS: usize = 4;

impl CoffeeWorld {
    pub fn new(spec: CoffeeWorldSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&spec.start_x) || !(0.0..=1.0).contains(&spec.goal_x) {
            return Err(Error::param("coffeeworld", "start_x and goal_x must lie in [0, 1]"));
        }
        if spec.coupling == 0.0 || !spec.coupling.is_finite() {
            return Err(Error::param("coupling", "must be non-zero"));
        }
        if !(0.0..1.0).contains(&spec.tilt_decay) {
            return Err(Error::param("tilt_decay", "must lie in [0, 1)"));
        }
        if !(spec.spill_threshold > 0.0) || !(spec.max_input > 0.0) {
            return Err(Error::param("coffeeworld", "spill_threshold and max_input must be positive"));
        }
        if spec.horizon < 2 {
            return Err(Error::param("horizon", "must be >= 2"));
        }
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &CoffeeWorldSpec {
        &self.spec
    }

    pub fn rollout(&self, x0: &[f64], inputs: &InputSequence) -> Result<(Trajectory, RolloutDiagnostics)> {
        self.check(x0, inputs)?;
        let mut diag = RolloutDiagnostics::default();
        let clamped: Vec<f64> = inputs
            .as_flat()
            .iter()
            .map(|&u| {
                let c = u.clamp(-self.spec.max_input, self.spec.max_input);
                if c != u {
                    diag.clamped_inputs += 1;
                }
                c
            })
            .collect();
        let traj = self.rollout_linear(x0, &InputSequence::from_flat(1, clamped)?)?;
        Ok((traj, diag))
    }

    fn check(&self, x0: &[f64], inputs: &InputSequence) -> Result<()> {
        if x0.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, actual: x0.len() });
        }
        if inputs.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, actual: inputs.dim() });
        }
        if inputs.len() != self.spec.horizon {
            return Err(Error::InvalidInputs(format!(
                "expected {} inputs, got {}",
                self.spec.horizon,
                inputs.len()
            )));
        }
        Ok(())
    }

    /// Lower bound on `Σ_t |φ_t|` over every in-box input sequence that
    /// starts upright at `start_x` and ends exactly at `goal_x`.
    ///
    /// Unrolling the tilt recurrence gives
    /// `coupling·(x_T − x_0) = (1 − decay)·Σ_{t=1}^{T−1} φ_t + φ_T`, and the
    /// last state obeys `|φ_T| ≤ decay·|φ_{T−1}| + |coupling|·max_input`.
    /// Minimizing `Σ|φ_t|` under those two constraints yields
    /// `|c|·D` when the distance `D` fits in one step and
    /// `|c|·((1 + decay)(D − max_input) + max_input)` otherwise.
    pub fn tilt_lower_bound(&self) -> f64 {
        let s = &self.spec;
        let distance = (s.goal_x - s.start_x).abs();
        let c = s.coupling.abs();
        if distance <= s.max_input {
            c * distance
        } else {
            c * ((1.0 + s.tilt_decay) * (distance - s.max_input) + s.max_input)
        }
    }

    /// Eight reward hypotheses; [`TRUE_HYPOTHESIS`] is the default
    /// teacher's reward (reach the goal, but avoid tilting and above all
    /// spilling).
    pub fn hypotheses(&self) -> Vec<RewardHypothesis> {
        [
            ("goal_only", [1.0, 0.0, 0.0]),
            ("careless", [0.9, 0.1, 0.1]),
            ("tilt_seeking", [0.7, -0.3, 0.2]),
            ("no_spill", [0.7, 0.0, 0.7]),
            ("careful", [0.8, 0.5, 0.3]),
            ("stay_upright", [0.1, 0.9, 0.4]),
            ("spill_seeking", [0.6, 0.1, -0.8]),
            ("stay_put", [-0.6, 0.7, 0.4]),
        ]
        .into_iter()
        .map(|(name, w)| {
            RewardHypothesis::unit(w.to_vec())
                .expect("non-zero weights")
                .with_label(name)
        })
        .collect()
    }
}

impl Dynamics for CoffeeWorld {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
        self.check(x0, inputs)?;
        let (mut x, mut phi) = (x0[0], x0[1]);
        let mut data = Vec::with_capacity(2 * (inputs.len() + 1));
        data.extend_from_slice(&[x, phi]);
        for &u in inputs.as_flat() {
            x += u;
            phi = self.spec.tilt_decay * phi + self.spec.coupling * u;
            data.extend_from_slice(&[x, phi]);
        }
        Trajectory::from_flat(2, data)
    }
}

impl FeatureMap for CoffeeWorld {
    fn num_features(&self) -> usize {
        3
    }

    fn features(&self, xi: &Trajectory) -> FeatureVector {
        let goal = (xi.last()[0] - self.spec.goal_x).abs();
        let tilt: f64 = xi.states().map(|s| s[1].abs()).sum();
        let spills = xi
            .states()
            .filter(|s| s[1].abs() > self.spec.spill_threshold)
            .count() as f64;
        FeatureVector::new(vec![-goal, -tilt, -spills])
    }
}
