//! 2-D point mass driven towards a goal past a disc of lava.
//!
//! State `(x, y)` in the unit square, input `u` with `‖u‖∞ ≤ max_input`,
//! dynamics `x_{t+1} = clamp(x_t + u_t)`.
//!
//! Features, all `≤ 0`:
//!
//! | index | feature | range |
//! |-------|---------|-------|
//! | 0 | `−Σ_t ‖x_{t+1} − x_t‖` (path length) | `[−T·√2·max_input, 0]` |
//! | 1 | `−Σ_{t=1..T} exp(−d_t² / w)`, `d_t` = distance from `x_t` to the lava disc (0 inside) | `[−T, 0]` |
//! | 2 | `−‖x_T − goal‖` | `[−√2, 0]` |

use serde::{Deserialize, Serialize};

use super::{Dynamics, RolloutDiagnostics};
use crate::error::{Error, Result};
use crate::types::{FeatureMap, FeatureVector, InputSequence, RewardHypothesis, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LavaworldSpec {
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub lava_center: [f64; 2],
    pub lava_radius: f64,
    pub horizon: usize,
    /// Width `w` of the lava-proximity kernel.
    pub proximity_width: f64,
    pub max_input: f64,
}

impl Default for LavaworldSpec {
    fn default() -> Self {
        Self {
            start: [0.1, 0.1],
            goal: [0.9, 0.9],
            lava_center: [0.5, 0.5],
            lava_radius: 0.15,
            horizon: 15,
            proximity_width: 0.05,
            max_input: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lavaworld {
    spec: LavaworldSpec,
}

pub const FEATURE_NAMES: [&str; 3] = ["path_length", "lava_proximity", "goal_distance"];

/// Index of the default teacher's reward in [`Lavaworld::hypotheses`].
pub const TRUE_HYPOTHESIS: usize = 4;

impl Lavaworld {
    pub fn new(spec: LavaworldSpec) -> Result<Self> {
        let inside = |p: [f64; 2]| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]);
        if !inside(spec.start) || !inside(spec.goal) {
            return Err(Error::param("lavaworld", "start and goal must lie in the unit square"));
        }
        if !(spec.lava_radius > 0.0) {
            return Err(Error::param("lava_radius", "must be positive"));
        }
        if spec.horizon < 2 {
            return Err(Error::param("horizon", "must be >= 2"));
        }
        if !(spec.proximity_width > 0.0) || !(spec.max_input > 0.0) {
            return Err(Error::param("lavaworld", "proximity_width and max_input must be positive"));
        }
        let lava = Self { spec };
        if lava.lava_gap(&lava.spec.start) <= 0.0 || lava.lava_gap(&lava.spec.goal) <= 0.0 {
            return Err(Error::param("lavaworld", "start and goal must lie outside the lava"));
        }
        Ok(lava)
    }

    pub fn spec(&self) -> &LavaworldSpec {
        &self.spec
    }

    /// Signed distance from `p` to the lava disc's edge (negative inside).
    pub fn lava_gap(&self, p: &[f64]) -> f64 {
        let c = self.spec.lava_center;
        ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() - self.spec.lava_radius
    }

    pub fn proximity(&self, p: &[f64]) -> f64 {
        let d = self.lava_gap(p).max(0.0);
        (-d * d / self.spec.proximity_width).exp()
    }

    pub fn rollout(&self, x0: &[f64], inputs: &InputSequence) -> Result<(Trajectory, RolloutDiagnostics)> {
        self.check(x0, inputs)?;
        let u_max = self.spec.max_input;
        let mut diag = RolloutDiagnostics::default();
        let mut x = [x0[0], x0[1]];
        let mut data = Vec::with_capacity(2 * (inputs.len() + 1));
        data.extend_from_slice(&x);
        for t in 0..inputs.len() {
            let u = inputs.input(t);
            for j in 0..2 {
                let uj = u[j].clamp(-u_max, u_max);
                if uj != u[j] {
                    diag.clamped_inputs += 1;
                }
                let next = x[j] + uj;
                x[j] = next.clamp(0.0, 1.0);
                if x[j] != next {
                    diag.clamped_states += 1;
                }
            }
            data.extend_from_slice(&x);
        }
        Ok((Trajectory::from_flat(2, data)?, diag))
    }

    fn check(&self, x0: &[f64], inputs: &InputSequence) -> Result<()> {
        if x0.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, actual: x0.len() });
        }
        if inputs.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, actual: inputs.dim() });
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

    /// Eight hand-coded reward hypotheses; [`TRUE_HYPOTHESIS`] is the
    /// default teacher's reward (reach the goal, keep well clear of the lava,
    /// mild preference for short paths). Lava weights are small because the
    /// proximity sum spans a range about ten times wider than path length.
    pub fn hypotheses(&self) -> Vec<RewardHypothesis> {
        [
            ("goal_only", [0.0, 0.0, 1.0]),
            ("efficient", [0.6, 0.0, 0.8]),
            ("lava_seeking", [0.3, -0.15, 0.94]),
            ("mild_lava", [0.6, 0.05, 0.8]),
            ("lava_averse", [0.3, 0.15, 0.94]),
            ("lazy", [0.95, 0.05, 0.3]),
            ("lava_only", [0.1, 0.99, 0.1]),
            ("goal_averse", [0.3, 0.15, -0.94]),
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

impl Dynamics for Lavaworld {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        2
    }

    fn rollout_linear(&self, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
        self.check(x0, inputs)?;
        let mut x = [x0[0], x0[1]];
        let mut data = Vec::with_capacity(2 * (inputs.len() + 1));
        data.extend_from_slice(&x);
        for t in 0..inputs.len() {
            let u = inputs.input(t);
            x[0] += u[0];
            x[1] += u[1];
            data.extend_from_slice(&x);
        }
        Trajectory::from_flat(2, data)
    }
}

impl FeatureMap for Lavaworld {
    fn num_features(&self) -> usize {
        3
    }

    fn features(&self, xi: &Trajectory) -> FeatureVector {
        let path: f64 = xi
            .states()
            .zip(xi.states().skip(1))
            .map(|(a, b)| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt())
            .sum();
        let lava: f64 = xi.states().skip(1).map(|s| self.proximity(s)).sum();
        let end = xi.last();
        let g = self.spec.goal;
        let goal = ((end[0] - g[0]).powi(2) + (end[1] - g[1]).powi(2)).sqrt();
        FeatureVector::new(vec![-path, -lava, -goal])
    }
}
