//! Shared domain types: trajectories, inputs, features, reward hypotheses and
//! choice sets.
//!
//! Every value here is immutable once built. Constructors validate shape and
//! finiteness so downstream code can index without re-checking.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of decimals used to decide whether two trajectories are the same
/// member of a [`ChoiceSet`].
pub const DEDUP_DECIMALS: u32 = 9;

/// Fixed-horizon sequence of `T + 1` states of a common dimension, stored
/// row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(states: Vec<Vec<f64>>) -> Result<Self> {
        let dim = states.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(dim * states.len());
        for (t, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::InvalidTrajectory(format!(
                    "state {t} has dimension {}, expected {dim}",
                    s.len()
                )));
            }
            data.extend_from_slice(s);
        }
        Self::from_flat(dim, data)
    }

    /// Build from row-major coordinates.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTrajectory("state dimension is zero".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidTrajectory(format!(
                "{} coordinates do not divide into states of dimension {dim}",
                data.len()
            )));
        }
        if data.len() / dim < 2 {
            return Err(Error::InvalidTrajectory(
                "a trajectory needs at least two states".into(),
            ));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "non-finite coordinate at state {}, component {}",
                i / dim,
                i % dim
            )));
        }
        Ok(Self { dim, data })
    }

    /// Number of states, `T + 1`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `T`, the number of transitions.
    pub fn horizon(&self) -> usize {
        self.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn first(&self) -> &[f64] {
        self.state(0)
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.horizon())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Round every coordinate half-to-even at `decimals` places.
    ///
    /// Values whose scaled magnitude leaves the exactly-representable range
    /// are already coarser than the requested precision and pass through.
    pub fn canonical_round(&self, decimals: u32) -> Trajectory {
        let scale = 10f64.powi(decimals as i32);
        let data = self
            .data
            .iter()
            .map(|&x| {
                let scaled = x * scale;
                if !scaled.is_finite() || scaled.abs() >= 4.5e15 {
                    x
                } else {
                    // normalizes -0.0 so that keys compare equal
                    scaled.round_ties_even() / scale + 0.0
                }
            })
            .collect();
        Trajectory {
            dim: self.dim,
            data,
        }
    }

    /// Identity of this trajectory inside a [`ChoiceSet`].
    pub fn canonical_key(&self) -> TrajectoryKey {
        let rounded = self.canonical_round(DEDUP_DECIMALS);
        TrajectoryKey {
            dim: self.dim,
            bits: rounded.data.iter().map(|x| x.to_bits()).collect(),
        }
    }
}

/// Free-function form of [`Trajectory::canonical_round`].
pub fn canonical_round(traj: &Trajectory, decimals: u32) -> Trajectory {
    traj.canonical_round(decimals)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrajectoryKey {
    dim: usize,
    bits: Vec<u64>,
}

/// Teleoperation inputs `u^0 .. u^{T-1}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSequence {
    dim: usize,
    data: Vec<f64>,
}

impl InputSequence {
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInputs("input dimension is zero".into()));
        }
        if data.len() % dim != 0 || data.is_empty() {
            return Err(Error::InvalidInputs(format!(
                "{} values do not form inputs of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInputs("non-finite input".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn new(inputs: Vec<Vec<f64>>) -> Result<Self> {
        let dim = inputs.first().map_or(0, Vec::len);
        if inputs.iter().any(|u| u.len() != dim) {
            return Err(Error::InvalidInputs("ragged input vectors".into()));
        }
        Self::from_flat(dim, inputs.concat())
    }

    pub fn zeros(steps: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; steps * dim],
        }
    }

    /// Number of input steps `T`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// `Φ(ξ)`: one value per feature dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Linear reward `r_θ(ξ) = θ · Φ(ξ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardHypothesis {
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl RewardHypothesis {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("theta", "weights must be finite and non-empty"));
        }
        Ok(Self {
            weights,
            label: None,
        })
    }

    /// Rescale `weights` onto the unit sphere.
    pub fn unit(weights: Vec<f64>) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::param("theta", "cannot normalize a zero vector"));
        }
        Self::new(weights.into_iter().map(|w| w / norm).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn reward(&self, phi: &FeatureVector) -> Result<f64> {
        reward(self, phi)
    }
}

impl fmt::Display for RewardHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            write!(f, "{label}")?;
        }
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w:.4}")?;
        }
        write!(f, ")")
    }
}

pub fn reward(theta: &RewardHypothesis, phi: &FeatureVector) -> Result<f64> {
    if theta.dim() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            actual: phi.len(),
        });
    }
    Ok(dot(theta.weights(), phi.values()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Known feature map `Φ`.
pub trait FeatureMap {
    fn num_features(&self) -> usize;
    fn features(&self, xi: &Trajectory) -> FeatureVector;
}

impl<F: FeatureMap + ?Sized> FeatureMap for &F {
    fn num_features(&self) -> usize {
        (**self).num_features()
    }
    fn features(&self, xi: &Trajectory) -> FeatureVector {
        (**self).features(xi)
    }
}

/// Where a choice-set member came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Provenance {
    Demo { index: usize },
    Noisy { source: usize, seed: u64, draw: usize },
    Sparse { source: usize, lambda: f64 },
    Consistent { source: usize, lambda: f64 },
    Bank,
    Human,
    External,
}

impl Provenance {
    pub fn generator(&self) -> &'static str {
        match self {
            Provenance::Demo { .. } => "demo",
            Provenance::Noisy { .. } => "noisy",
            Provenance::Sparse { .. } => "sparse",
            Provenance::Consistent { .. } => "consistent",
            Provenance::Bank => "bank",
            Provenance::Human => "human",
            Provenance::External => "external",
        }
    }

    pub fn source(&self) -> Option<usize> {
        match *self {
            Provenance::Demo { index } => Some(index),
            Provenance::Noisy { source, .. }
            | Provenance::Sparse { source, .. }
            | Provenance::Consistent { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Finite, duplicate-free set of trajectories in insertion order.
///
/// Two trajectories are the same member when they agree after rounding to
/// [`DEDUP_DECIMALS`] places. The first inserted copy (and its provenance)
/// is kept.
#[derive(Clone, Debug, Default)]
pub struct ChoiceSet {
    members: Vec<Trajectory>,
    provenance: Vec<Provenance>,
    index: HashMap<TrajectoryKey, usize>,
}

impl ChoiceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_trajectories(trajs: impl IntoIterator<Item = Trajectory>) -> Self {
        let mut set = Self::new();
        for t in trajs {
            set.insert(t, Provenance::External);
        }
        set
    }

    /// Returns `true` when `traj` was not already present.
    pub fn insert(&mut self, traj: Trajectory, provenance: Provenance) -> bool {
        let key = traj.canonical_key();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.members.len());
        self.members.push(traj);
        self.provenance.push(provenance);
        true
    }

    /// Insert every member of `other`, keeping provenance.
    pub fn extend_from(&mut self, other: &ChoiceSet) {
        for (t, p) in other.iter_with_provenance() {
            self.insert(t.clone(), p.clone());
        }
    }

    pub fn position(&self, traj: &Trajectory) -> Option<usize> {
        self.index.get(&traj.canonical_key()).copied()
    }

    pub fn contains(&self, traj: &Trajectory) -> bool {
        self.position(traj).is_some()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, i: usize) -> &Trajectory {
        &self.members[i]
    }

    pub fn provenance(&self, i: usize) -> &Provenance {
        &self.provenance[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.members.iter()
    }

    pub fn iter_with_provenance(&self) -> impl Iterator<Item = (&Trajectory, &Provenance)> {
        self.members.iter().zip(&self.provenance)
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.members
    }

    /// Features of every member, in set order.
    pub fn features<F: FeatureMap + ?Sized>(&self, map: &F) -> Vec<FeatureVector> {
        self.members.iter().map(|t| map.features(t)).collect()
    }

    /// True when both sets hold the same members, regardless of order.
    pub fn same_members(&self, other: &ChoiceSet) -> bool {
        self.len() == other.len() && self.index.keys().all(|k| other.index.contains_key(k))
    }

    pub fn is_subset_of(&self, other: &ChoiceSet) -> bool {
        self.index.keys().all(|k| other.index.contains_key(k))
    }
}

impl<'a> IntoIterator for &'a ChoiceSet {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;
    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// The `N` trajectories the teacher actually showed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemonstrationSet {
    demos: Vec<Trajectory>,
}

impl DemonstrationSet {
    pub fn new(demos: Vec<Trajectory>) -> Result<Self> {
        let Some(first) = demos.first() else {
            return Err(Error::InvalidTrajectory(
                "a demonstration set needs at least one demo".into(),
            ));
        };
        let (dim, len) = (first.dim(), first.len());
        for (i, d) in demos.iter().enumerate() {
            if d.dim() != dim || d.len() != len {
                return Err(Error::InvalidTrajectory(format!(
                    "demo {i} has shape {}x{}, expected {len}x{dim}",
                    d.len(),
                    d.dim()
                )));
            }
        }
        Ok(Self { demos })
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.demos.iter()
    }

    pub fn as_slice(&self) -> &[Trajectory] {
        &self.demos
    }

    /// `C_R = D`, each member tagged with its demo index.
    pub fn to_choice_set(&self) -> ChoiceSet {
        let mut set = ChoiceSet::new();
        for (i, d) in self.demos.iter().enumerate() {
            set.insert(d.clone(), Provenance::Demo { index: i });
        }
        set
    }
}

impl<'a> IntoIterator for &'a DemonstrationSet {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;
    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(rows: &[&[f64]]) -> Trajectory {
        Trajectory::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn reward_examples() {
        let phi = FeatureVector::new(vec![0.5, 9.9]);
        let theta = RewardHypothesis::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(reward(&theta, &phi).unwrap(), 0.5);

        let zero = RewardHypothesis::new(vec![0.0; 3]).unwrap();
        let phi3 = FeatureVector::new(vec![3.0, -1.0, 7.0]);
        assert_eq!(reward(&zero, &phi3).unwrap(), 0.0);

        let theta = RewardHypothesis::new(vec![0.6, 0.8]).unwrap();
        let phi = FeatureVector::new(vec![1.0, -1.0]);
        assert!((reward(&theta, &phi).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn reward_dimension_mismatch() {
        let theta = RewardHypothesis::new(vec![1.0, 0.0]).unwrap();
        let phi = FeatureVector::new(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            reward(&theta, &phi),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn canonical_round_examples() {
        let t = traj(&[&[0.123456, 1.0], &[0.0, 0.0]]);
        assert_eq!(t.canonical_round(3).state(0), &[0.123, 1.0]);

        let once = t.canonical_round(3);
        assert_eq!(once.canonical_round(3), once);

        // 0.0005 * 1000 is exactly 0.5, which rounds to the even neighbour
        let t = traj(&[&[0.0005], &[0.0015]]);
        let r = t.canonical_round(3);
        assert_eq!(r.state(0), &[0.0]);
        assert_eq!(r.state(1), &[0.002]);
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::new(vec![vec![0.0]]).is_err());
        assert!(Trajectory::new(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
        assert!(Trajectory::new(vec![vec![f64::NAN], vec![0.0]]).is_err());
        assert!(Trajectory::new(vec![vec![f64::INFINITY], vec![0.0]]).is_err());
        let t = traj(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 5.0]]);
        assert_eq!(t.horizon(), 2);
        assert_eq!(t.last(), &[4.0, 5.0]);
    }

    #[test]
    fn choice_set_dedups_after_rounding() {
        let mut set = ChoiceSet::new();
        let a = traj(&[&[0.1, 0.2], &[0.3, 0.4]]);
        assert!(set.insert(a.clone(), Provenance::External));
        assert!(!set.insert(a.clone(), Provenance::Bank));
        let nearly = traj(&[&[0.1 + 1e-13, 0.2], &[0.3, 0.4 - 1e-13]]);
        assert!(!set.insert(nearly, Provenance::Bank));
        assert_eq!(set.len(), 1);
        assert_eq!(set.provenance(0), &Provenance::External);
        let b = traj(&[&[0.1, 0.2], &[0.3, 0.400001]]);
        assert!(set.insert(b, Provenance::Bank));
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn negative_zero_is_same_member() {
        let mut set = ChoiceSet::new();
        set.insert(traj(&[&[0.0], &[1.0]]), Provenance::External);
        assert!(set.contains(&traj(&[&[-0.0], &[1.0]])));
        assert!(set.contains(&traj(&[&[-1e-12], &[1.0]])));
    }

    #[test]
    fn demonstration_set_shape_checks() {
        assert!(DemonstrationSet::new(vec![]).is_err());
        let a = traj(&[&[0.0], &[1.0]]);
        let b = traj(&[&[0.0], &[1.0], &[2.0]]);
        assert!(DemonstrationSet::new(vec![a.clone(), b]).is_err());
        let d = DemonstrationSet::new(vec![a.clone(), a]).unwrap();
        assert_eq!(d.to_choice_set().len(), 1);
    }

    proptest! {
        #[test]
        fn reward_is_linear(
            theta in prop::collection::vec(-1.0f64..1.0, 4),
            p1 in prop::collection::vec(-1.0f64..1.0, 4),
            p2 in prop::collection::vec(-1.0f64..1.0, 4),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let theta = RewardHypothesis::new(theta).unwrap();
            let mix: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| a * x + b * y).collect();
            let lhs = reward(&theta, &FeatureVector::new(mix)).unwrap();
            let rhs = a * reward(&theta, &FeatureVector::new(p1)).unwrap()
                + b * reward(&theta, &FeatureVector::new(p2)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn canonical_round_is_idempotent(
            xs in prop::collection::vec(-100.0f64..100.0, 2..20),
            decimals in 0u32..12,
        ) {
            let t = Trajectory::from_flat(1, xs).unwrap();
            let once = t.canonical_round(decimals);
            prop_assert_eq!(once.canonical_round(decimals), once);
        }

        #[test]
        fn duplicate_insert_keeps_cardinality(
            xs in prop::collection::vec(-1.0f64..1.0, 4..12),
        ) {
            let t = Trajectory::from_flat(2, xs[..xs.len() / 2 * 2].to_vec()).unwrap();
            let mut set = ChoiceSet::new();
            set.insert(t.clone(), Provenance::External);
            let before = set.len();
            set.insert(t.canonical_round(DEDUP_DECIMALS), Provenance::Bank);
            prop_assert_eq!(set.len(), before);
        }
    }
}
