//! Boltzmann-rational likelihood, posterior over reward hypotheses, belief
//! entropy, Metropolis–Hastings over unit-norm weights, and the evaluation
//! metrics used by the experiments.
//!
//! All posterior arithmetic happens in log space. A demonstration's log
//! likelihood under weights `θ` and choice set `C` is
//! `β·r_θ(ξ) − logsumexp_{ξ'∈C} β·r_θ(ξ')`, and the unnormalized log posterior
//! is the prior's log plus the sum of those terms over the demos.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::types::{
    dot, ChoiceSet, DemonstrationSet, FeatureMap, FeatureVector, RewardHypothesis, Trajectory,
};

/// Rationality coefficient `β ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rationality(f64);

impl Rationality {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Rationality {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<Rationality> for f64 {
    fn from(b: Rationality) -> f64 {
        b.0
    }
}

/// Discrete distribution over reward hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    hypotheses: Vec<RewardHypothesis>,
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(hypotheses: Vec<RewardHypothesis>, probs: Vec<f64>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::InvalidBelief("no hypotheses".into()));
        }
        if hypotheses.len() != probs.len() {
            return Err(Error::InvalidBelief(format!(
                "{} hypotheses but {} probabilities",
                hypotheses.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidBelief("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBelief(format!("probabilities sum to {total}")));
        }
        Ok(Self { hypotheses, probs })
    }

    pub fn uniform(hypotheses: Vec<RewardHypothesis>) -> Result<Self> {
        let n = hypotheses.len();
        Self::new(hypotheses, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn hypotheses(&self) -> &[RewardHypothesis] {
        &self.hypotheses
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Most probable hypothesis; ties go to the lowest index.
    pub fn map_index(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn map_hypothesis(&self) -> &RewardHypothesis {
        &self.hypotheses[self.map_index()]
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self)
    }

    /// Index of the hypothesis whose weights equal `theta` exactly.
    pub fn index_of(&self, theta: &RewardHypothesis) -> Option<usize> {
        self.hypotheses
            .iter()
            .position(|h| h.weights() == theta.weights())
    }

    fn same_hypotheses(&self, other: &Belief) -> bool {
        self.hypotheses.len() == other.hypotheses.len()
            && self
                .hypotheses
                .iter()
                .zip(&other.hypotheses)
                .all(|(a, b)| a.weights() == b.weights())
    }
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Boltzmann choice probabilities `exp(β r_i) / Σ_j exp(β r_j)`.
pub fn boltzmann_probabilities(rewards: &[f64], beta: Rationality) -> Vec<f64> {
    let scaled: Vec<f64> = rewards.iter().map(|r| beta.0 * r).collect();
    let lse = log_sum_exp(&scaled);
    scaled.iter().map(|s| (s - lse).exp()).collect()
}

/// `P(ξ | r_θ, C)` for a member `ξ` of `choice_set`.
pub fn boltzmann_likelihood<F: FeatureMap + ?Sized>(
    xi: &Trajectory,
    theta: &RewardHypothesis,
    choice_set: &ChoiceSet,
    beta: Rationality,
    features: &F,
) -> Result<f64> {
    if choice_set.is_empty() {
        return Err(Error::EmptyChoiceSet);
    }
    let idx = choice_set.position(xi).ok_or(Error::NotInChoiceSet)?;
    let rewards = choice_set
        .iter()
        .map(|t| theta.reward(&features.features(t)))
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<f64> = rewards.iter().map(|r| beta.0 * r).collect();
    Ok((scaled[idx] - log_sum_exp(&scaled)).exp())
}

/// Log posterior weights of each hypothesis from a reward table.
///
/// `rewards[h][i]` is hypothesis `h`'s reward for choice-set member `i`;
/// `demos` lists the member index of each demonstration.
pub fn log_likelihoods(rewards: &[Vec<f64>], demos: &[usize], beta: Rationality) -> Vec<f64> {
    rewards
        .iter()
        .map(|row| {
            let scaled: Vec<f64> = row.iter().map(|r| beta.0 * r).collect();
            let lse = log_sum_exp(&scaled);
            demos.iter().map(|&d| scaled[d] - lse).sum()
        })
        .collect()
}

/// Normalize `prior · exp(log_lik)` in log space.
pub fn normalize_posterior(prior: &Belief, log_lik: &[f64], beta: Rationality) -> Result<Belief> {
    if log_lik.len() != prior.len() {
        return Err(Error::DimensionMismatch {
            expected: prior.len(),
            actual: log_lik.len(),
        });
    }
    let log_post: Vec<f64> = prior
        .probs
        .iter()
        .zip(log_lik)
        .map(|(&p, &l)| if p > 0.0 { p.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let lse = log_sum_exp(&log_post);
    if !lse.is_finite() {
        return Err(Error::DegeneratePosterior { beta: beta.0 });
    }
    let probs: Vec<f64> = log_post.iter().map(|l| (l - lse).exp()).collect();
    let total: f64 = probs.iter().sum();
    Ok(Belief {
        hypotheses: prior.hypotheses.clone(),
        probs: probs.into_iter().map(|p| p / total).collect(),
    })
}

/// Posterior from a precomputed reward table; see [`log_likelihoods`].
pub fn posterior_from_rewards(
    rewards: &[Vec<f64>],
    demos: &[usize],
    prior: &Belief,
    beta: Rationality,
) -> Result<Belief> {
    if rewards.iter().any(Vec::is_empty) {
        return Err(Error::EmptyChoiceSet);
    }
    normalize_posterior(prior, &log_likelihoods(rewards, demos, beta), beta)
}

/// Belief over `prior`'s hypotheses after observing `demos`, each a member of
/// `choice_set`.
pub fn posterior<F: FeatureMap + ?Sized>(
    demos: &DemonstrationSet,
    choice_set: &ChoiceSet,
    prior: &Belief,
    beta: Rationality,
    features: &F,
) -> Result<Belief> {
    if choice_set.is_empty() {
        return Err(Error::EmptyChoiceSet);
    }
    let demo_idx = demo_indices(demos, choice_set)?;
    let phis = choice_set.features(features);
    let rewards = prior
        .hypotheses
        .iter()
        .map(|h| phis.iter().map(|phi| h.reward(phi)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    posterior_from_rewards(&rewards, &demo_idx, prior, beta)
}

pub(crate) fn demo_indices(demos: &DemonstrationSet, choice_set: &ChoiceSet) -> Result<Vec<usize>> {
    demos
        .iter()
        .map(|d| choice_set.position(d).ok_or(Error::NotInChoiceSet))
        .collect()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(b: &Belief) -> f64 {
    let h: f64 = b
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    h.max(0.0)
}

/// Sampler settings for [`mh_sample_posterior`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MhConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub thin: usize,
    pub step_scale: f64,
    pub seed: u64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            samples: 5000,
            thin: 10,
            step_scale: 0.1,
            seed: 0,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::param("samples", "must be >= 1"));
        }
        if self.thin == 0 {
            return Err(Error::param("thin", "must be >= 1"));
        }
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return Err(Error::param("step_scale", "must be a positive finite number"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MhResult {
    pub samples: Vec<RewardHypothesis>,
    /// Sample mean rescaled to unit norm.
    pub mean: RewardHypothesis,
    pub acceptance_rate: f64,
    pub warnings: Vec<String>,
}

/// Unnormalized log posterior of unit-norm weights under a flat prior on the
/// sphere, from precomputed features.
pub fn log_density(
    theta: &[f64],
    demo_features: &[FeatureVector],
    set_features: &[FeatureVector],
    beta: Rationality,
) -> f64 {
    let scaled: Vec<f64> = set_features
        .iter()
        .map(|phi| beta.0 * dot(theta, phi.values()))
        .collect();
    let lse = log_sum_exp(&scaled);
    demo_features
        .iter()
        .map(|phi| beta.0 * dot(theta, phi.values()) - lse)
        .sum()
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Random-walk Metropolis–Hastings over unit-norm reward weights.
///
/// Proposals perturb the current point with isotropic Gaussian noise of
/// scale `step_scale` and project back onto the sphere. The proposal density
/// depends only on the angle between the two points, so it is symmetric and
/// the acceptance ratio is the plain density ratio.
pub fn mh_sample_posterior<F: FeatureMap + ?Sized>(
    demos: &DemonstrationSet,
    choice_set: &ChoiceSet,
    beta: Rationality,
    features: &F,
    cfg: &MhConfig,
) -> Result<MhResult> {
    cfg.validate()?;
    let k = features.num_features();
    if k < 2 {
        return Err(Error::param("features", "need at least two features on the sphere"));
    }
    if choice_set.is_empty() {
        return Err(Error::EmptyChoiceSet);
    }
    demo_indices(demos, choice_set)?;
    let set_features = choice_set.features(features);
    let demo_features: Vec<FeatureVector> = demos.iter().map(|d| features.features(d)).collect();
    let target = |theta: &[f64]| log_density(theta, &demo_features, &set_features, beta);
    mh_on_sphere(k, target, cfg)
}

/// Sphere random walk against an arbitrary log density.
pub fn mh_on_sphere(
    k: usize,
    log_target: impl Fn(&[f64]) -> f64,
    cfg: &MhConfig,
) -> Result<MhResult> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, &[0x6d68]);

    // start from the best of a handful of uniform draws
    let mut current = random_unit(&mut rng, k);
    let mut current_lp = log_target(&current);
    for _ in 0..31 {
        let cand = random_unit(&mut rng, k);
        let lp = log_target(&cand);
        if lp > current_lp {
            current = cand;
            current_lp = lp;
        }
    }

    let total = cfg.burn_in + cfg.samples * cfg.thin;
    let mut samples = Vec::with_capacity(cfg.samples);
    let mut accepted = 0usize;
    let mut proposal = vec![0.0; k];
    for step in 0..total {
        for (p, c) in proposal.iter_mut().zip(&current) {
            *p = c + cfg.step_scale * rng.sample::<f64, _>(StandardNormal);
        }
        let n = norm(&proposal);
        let u: f64 = rng.random();
        if n > 1e-12 {
            proposal.iter_mut().for_each(|p| *p /= n);
            let lp = log_target(&proposal);
            if lp.is_finite() && (lp >= current_lp || u.ln() < lp - current_lp) {
                current.copy_from_slice(&proposal);
                current_lp = lp;
                accepted += 1;
            }
        }
        if step >= cfg.burn_in && (step - cfg.burn_in + 1) % cfg.thin == 0 {
            samples.push(current.clone());
        }
    }

    let acceptance_rate = accepted as f64 / total as f64;
    let mut warnings = Vec::new();
    if acceptance_rate < 0.01 {
        warnings.push(format!(
            "acceptance rate {acceptance_rate:.4} is below 1%; consider a smaller step_scale"
        ));
    }
    let mut mean = vec![0.0; k];
    for s in &samples {
        mean.iter_mut().zip(s).for_each(|(m, x)| *m += x);
    }
    let mean = if norm(&mean) > 1e-300 {
        RewardHypothesis::unit(mean)?
    } else {
        warnings.push("sample mean vanished; reporting the last sample".into());
        RewardHypothesis::new(current.clone())?
    };
    let samples = samples
        .into_iter()
        .map(RewardHypothesis::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(MhResult {
        samples,
        mean,
        acceptance_rate,
        warnings,
    })
}

/// `r_θ(ξ*) − r_θ(ξ_R)`.
pub fn regret<F: FeatureMap + ?Sized>(
    theta_true: &RewardHypothesis,
    xi_star: &Trajectory,
    xi_robot: &Trajectory,
    features: &F,
) -> Result<f64> {
    Ok(theta_true.reward(&features.features(xi_star))?
        - theta_true.reward(&features.features(xi_robot))?)
}

/// `‖θ − θ̂‖₂`.
pub fn weight_error(theta_true: &RewardHypothesis, theta_hat: &RewardHypothesis) -> Result<f64> {
    if theta_true.dim() != theta_hat.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta_true.dim(),
            actual: theta_hat.dim(),
        });
    }
    Ok(theta_true
        .weights()
        .iter()
        .zip(theta_hat.weights())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `H(b_actual) − H(b_gold)` in nats: negative means overconfident
/// (risk-seeking), positive means overly cautious (risk-averse).
pub fn risk_metric(actual: &Belief, gold: &Belief) -> Result<f64> {
    if !actual.same_hypotheses(gold) {
        return Err(Error::HypothesisMismatch);
    }
    Ok(shannon_entropy(actual) - shannon_entropy(gold))
}
