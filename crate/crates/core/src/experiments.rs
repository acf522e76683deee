//! Baseline choice sets, β sweeps, and the rational-limit proposition suite.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counterfactual::{build_choice_set, CounterfactualBudget};
use crate::environments::{argmax_reward, Env, EnvBundle, EnvSpec};
use crate::error::{Error, Result};
use crate::inference::{
    log_likelihoods, log_sum_exp, mh_sample_posterior, posterior, posterior_from_rewards, regret, shannon_entropy, weight_error, Belief,
    MhConfig, Rationality,
};
use crate::seed::{derive_seed, rng_for};
use crate::simhuman::{build_human_choice_set, sample_demonstrations, Limitation, TeacherSpec};
use crate::types::{ChoiceSet, DemonstrationSet, RewardHypothesis};

pub use crate::inference::risk_metric;

/// Schema version of the records CSV and its JSON sidecar.
pub const SCHEMA_VERSION: u32 = 1;

pub const METHOD_NAMES: [&str; 4] = ["ideal", "birl", "noise", "ours"];

/// How the learner's choice set is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    /// The teacher's true choice set.
    Ideal,
    /// Every feasible trajectory, approximated by the candidate bank.
    Birl,
    /// Demonstrations plus noisy deformations.
    Noise,
    /// Demonstrations plus noisy, sparse-input and consistent-input
    /// counterfactuals.
    Ours,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [MethodId::Ideal, MethodId::Birl, MethodId::Noise, MethodId::Ours];

    pub fn name(self) -> &'static str {
        METHOD_NAMES[self as usize]
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "method",
                name: s.to_string(),
                valid: METHOD_NAMES.join(", "),
            })
    }
}

/// How `θ̂` is extracted from the learner's posterior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// MAP over the discrete hypothesis set.
    Discrete,
    /// Metropolis–Hastings mean over unit-norm `θ`.
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeacherConfig {
    /// `None` picks the environment's default limitation.
    pub limitation: Option<Limitation>,
    pub choice_set_size: usize,
    /// `None` uses the environment's true hypothesis.
    pub true_theta: Option<Vec<f64>>,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        Self {
            limitation: None,
            choice_set_size: 40,
            true_theta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub methods: Vec<MethodId>,
    pub teacher: TeacherConfig,
    /// Teacher rationalities swept.
    pub beta_grid: Vec<f64>,
    /// Learner's rationality; `None` matches the teacher's.
    pub beta_r: Option<f64>,
    pub n_demos: usize,
    pub seeds: Vec<u64>,
    pub budget: CounterfactualBudget,
    pub bank_size: usize,
    pub bank_seed: u64,
    /// `None` picks discrete for Lavaworld and continuous for CoffeeWorld.
    pub suite: Option<Suite>,
    pub mh: MhConfig,
    /// Fill `wall_time_ms`; off by default so reruns are byte-identical.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvSpec::by_name("lavaworld").expect("registered"),
            methods: MethodId::ALL.to_vec(),
            teacher: TeacherConfig::default(),
            beta_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0],
            beta_r: None,
            n_demos: 3,
            seeds: (0..10).collect(),
            budget: CounterfactualBudget::default(),
            bank_size: 500,
            bank_seed: 0,
            suite: None,
            mh: MhConfig::default(),
            record_timing: false,
        }
    }
}

/// Default limitation for each environment.
pub fn default_limitation(env: &EnvSpec) -> Limitation {
    match env {
        EnvSpec::Lavaworld(_) => Limitation::Visibility { radius: 0.1 },
        EnvSpec::CoffeeWorld(_) => Limitation::MinInput { u_min: 0.08 },
    }
}

impl ExperimentConfig {
    pub fn for_env(name: &str) -> Result<Self> {
        Ok(Self {
            env: EnvSpec::by_name(name)?,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let env = self.env.build()?;
        if self.methods.is_empty() {
            return Err(Error::param("methods", "at least one method is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "at least one seed is required"));
        }
        if self.n_demos == 0 {
            return Err(Error::param("n_demos", "must be >= 1"));
        }
        for &b in &self.beta_grid {
            Rationality::new(b)?;
        }
        if let Some(b) = self.beta_r {
            Rationality::new(b)?;
        }
        if self.bank_size < env.hypotheses().len() {
            return Err(Error::param("bank_size", "must be at least the number of hypotheses"));
        }
        self.mh.validate()?;
        self.budget.generators(env.horizon())?;
        self.teacher_spec(&env, 1.0)?.validate()
    }

    pub fn limitation(&self) -> Limitation {
        self.teacher
            .limitation
            .clone()
            .unwrap_or_else(|| default_limitation(&self.env))
    }

    pub fn suite(&self) -> Suite {
        self.suite.unwrap_or(match self.env {
            EnvSpec::Lavaworld(_) => Suite::Discrete,
            EnvSpec::CoffeeWorld(_) => Suite::Continuous,
        })
    }

    pub fn true_theta(&self, env: &Env) -> Result<RewardHypothesis> {
        match &self.teacher.true_theta {
            Some(w) => Ok(RewardHypothesis::unit(w.clone())?.with_label("true")),
            None => Ok(env.true_theta()),
        }
    }

    pub fn teacher_spec(&self, env: &Env, beta_h: f64) -> Result<TeacherSpec> {
        Ok(TeacherSpec {
            true_theta: self.true_theta(env)?,
            beta_h: Rationality::new(beta_h)?,
            limitation: self.limitation(),
            choice_set_size: self.teacher.choice_set_size,
        })
    }
}

/// One row of the records CSV; field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub env: String,
    pub method: MethodId,
    pub beta_h: f64,
    pub beta_r: f64,
    pub seed: u64,
    pub n_demos: usize,
    pub belief_true: f64,
    pub entropy: f64,
    pub entropy_gold: f64,
    pub risk: f64,
    pub regret: f64,
    pub weight_error: f64,
    pub choice_set_size: usize,
    pub wall_time_ms: u64,
}

/// The learner's choice set under `method`.
///
/// * ideal: `C_H` itself;
/// * birl: demos ∪ `C_H` ∪ the candidate bank;
/// * noise: demos plus the budget's noisy deformations;
/// * ours: demos plus every counterfactual in the budget.
///
/// Noise and ours draw deformations from the same streams, so with equal
/// seeds and budgets ours ⊇ noise.
pub fn choice_set_for(
    method: MethodId,
    demos: &DemonstrationSet,
    bundle: &EnvBundle,
    human: &ChoiceSet,
    budget: &CounterfactualBudget,
    seed: u64,
) -> Result<ChoiceSet> {
    let horizon = bundle.env.horizon();
    match method {
        MethodId::Ideal => {
            let mut set = human.clone();
            for d in demos {
                if !set.contains(d) {
                    return Err(Error::NotInChoiceSet);
                }
            }
            set.extend_from(&demos.to_choice_set());
            Ok(set)
        }
        MethodId::Birl => {
            let mut set = demos.to_choice_set();
            set.extend_from(human);
            set.extend_from(&bundle.bank);
            Ok(set)
        }
        MethodId::Noise => build_choice_set(demos, &budget.noisy_generators(horizon)?, &bundle.env, seed),
        MethodId::Ours => build_choice_set(demos, &budget.generators(horizon)?, &bundle.env, seed),
    }
}

/// Everything shared by the methods within one `(β, seed)` cell.
struct Cell<'a> {
    bundle: &'a EnvBundle,
    teacher: TeacherSpec,
    true_index: Option<usize>,
    human: ChoiceSet,
    demos: DemonstrationSet,
    prior: Belief,
    gold: Belief,
    beta_r: Rationality,
    xi_star: usize,
}

fn run_cell(cfg: &ExperimentConfig, bundle: &EnvBundle, beta_h: f64, seed: u64) -> Result<Vec<ExperimentRecord>> {
    let env = &bundle.env;
    let teacher = cfg.teacher_spec(env, beta_h)?;
    let beta_r = Rationality::new(cfg.beta_r.unwrap_or(beta_h))?;
    let human = build_human_choice_set(env, &teacher, derive_seed(seed, &[1]))?;
    let demos = sample_demonstrations(&human, &teacher, cfg.n_demos, env, derive_seed(seed, &[2]))?;
    let prior = Belief::uniform(bundle.hypotheses.clone())?;
    let gold = posterior(&demos, &human, &prior, beta_r, env)?;
    let true_index = prior.index_of(&teacher.true_theta);
    let xi_star = bundle.best_in_bank(&teacher.true_theta)?;
    let cell = Cell {
        bundle,
        teacher,
        true_index,
        human,
        demos,
        prior,
        gold,
        beta_r,
        xi_star,
    };
    cfg.methods
        .iter()
        .map(|&m| evaluate_method(cfg, &cell, m, seed))
        .collect()
}

fn evaluate_method(cfg: &ExperimentConfig, cell: &Cell<'_>, method: MethodId, seed: u64) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let env = &cell.bundle.env;
    let set = choice_set_for(
        method,
        &cell.demos,
        cell.bundle,
        &cell.human,
        &cfg.budget,
        derive_seed(seed, &[3]),
    )?;
    let belief = posterior(&cell.demos, &set, &cell.prior, cell.beta_r, env)?;
    let theta_hat = match cfg.suite() {
        Suite::Discrete => belief.map_hypothesis().clone(),
        Suite::Continuous => {
            let mh = MhConfig {
                seed: derive_seed(seed, &[4, method as u64]),
                ..cfg.mh.clone()
            };
            mh_sample_posterior(&cell.demos, &set, cell.beta_r, env, &mh)?.mean
        }
    };
    let theta = &cell.teacher.true_theta;
    let bank = &cell.bundle.bank;
    let xi_r = argmax_reward(bank, &theta_hat, env)?;
    let entropy = shannon_entropy(&belief);
    let entropy_gold = shannon_entropy(&cell.gold);
    Ok(ExperimentRecord {
        env: env.name().to_string(),
        method,
        beta_h: cell.teacher.beta_h.value(),
        beta_r: cell.beta_r.value(),
        seed,
        n_demos: cell.demos.len(),
        belief_true: cell.true_index.map_or(0.0, |i| belief.probs()[i]),
        entropy,
        entropy_gold,
        risk: entropy - entropy_gold,
        regret: regret(theta, bank.get(cell.xi_star), bank.get(xi_r), env)?,
        weight_error: weight_error(theta, &theta_hat)?,
        choice_set_size: set.len(),
        wall_time_ms: if cfg.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Runs every `(β, seed, method)` cell and returns the records sorted by
/// method, β and seed.
///
/// Within a cell all methods share the teacher's choice set and
/// demonstrations; the candidate bank is built once from `bank_seed`.
pub fn run_sweep(cfg: &ExperimentConfig, beta_grid: &[f64]) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let env = cfg.env.build()?;
    let bundle = env.bundle(cfg.bank_size, cfg.bank_seed)?;
    run_sweep_with_bundle(cfg, beta_grid, &bundle)
}

/// [`run_sweep`] against a prebuilt bundle.
pub fn run_sweep_with_bundle(
    cfg: &ExperimentConfig,
    beta_grid: &[f64],
    bundle: &EnvBundle,
) -> Result<Vec<ExperimentRecord>> {
    let cells: Vec<(f64, u64)> = beta_grid
        .iter()
        .flat_map(|&b| cfg.seeds.iter().map(move |&s| (b, s)))
        .collect();
    let mut records: Vec<ExperimentRecord> = cells
        .par_iter()
        .map(|&(beta, seed)| {
            run_cell(cfg, bundle, beta, seed).map_err(|e| Error::Cell {
                beta,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    sort_records(&mut records);
    Ok(records)
}

/// Canonical record order: environment, method, β_h, β_r, seed.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| {
        a.env
            .cmp(&b.env)
            .then(a.method.cmp(&b.method))
            .then(a.beta_h.total_cmp(&b.beta_h))
            .then(a.beta_r.total_cmp(&b.beta_r))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Outcome of one family of the proposition suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropositionReport {
    pub seed: u64,
    pub families: Vec<FamilyResult>,
}

impl PropositionReport {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(|f| f.passed)
    }
}

impl fmt::Display for PropositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fam in &self.families {
            writeln!(
                f,
                "{} {}: {}",
                if fam.passed { "PASS" } else { "FAIL" },
                fam.name,
                fam.detail
            )?;
        }
        Ok(())
    }
}

/// Rationality used by the proposition suite.
pub const RATIONAL_BETA: f64 = 1e6;

/// Random discrete instance with nested choice sets around one rational demo.
#[derive(Clone, Debug)]
pub struct NestedInstance {
    /// `rewards[h][j]`: reward of trajectory `j` under hypothesis `h`.
    pub rewards: Vec<Vec<f64>>,
    pub under: Vec<usize>,
    pub ideal: Vec<usize>,
    pub over: Vec<usize>,
    pub true_index: usize,
    pub demo: usize,
    pub n_demos: usize,
}

impl NestedInstance {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let k = rng.random_range(2..=6);
        let universe = rng.random_range(4..=12);
        // distinct rewards per hypothesis: a shuffled grid plus jitter smaller than the spacing
        let rewards: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let order = sample_indices(rng, universe, universe).into_vec();
                order
                    .into_iter()
                    .map(|j| (j as f64 + rng.random_range(0.0..0.5)) / universe as f64)
                    .collect()
            })
            .collect();
        let true_index = rng.random_range(0..k);
        let ideal_size = rng.random_range(2..universe);
        let mut ideal = sample_indices(rng, universe, ideal_size).into_vec();
        ideal.sort_unstable();
        let demo = *ideal
            .iter()
            .max_by(|&&a, &&b| rewards[true_index][a].total_cmp(&rewards[true_index][b]))
            .expect("non-empty");
        let mut under: Vec<usize> = ideal.iter().copied().filter(|&j| j == demo || rng.random_bool(0.5)).collect();
        under.sort_unstable();
        let mut over: Vec<usize> = (0..universe)
            .filter(|j| ideal.contains(j) || rng.random_bool(0.5))
            .collect();
        over.sort_unstable();
        Self {
            rewards,
            under,
            ideal,
            over,
            true_index,
            demo,
            n_demos: rng.random_range(1..=3),
        }
    }

    fn table(&self, members: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let table = self
            .rewards
            .iter()
            .map(|row| members.iter().map(|&j| row[j]).collect())
            .collect();
        let pos = members.iter().position(|&j| j == self.demo).ok_or(Error::NotInChoiceSet)?;
        Ok((table, vec![pos; self.n_demos]))
    }

    /// Posterior entropy computed entirely from log-probabilities
    /// (uniform prior), independent of [`Belief`].
    pub fn entropy_log_space(&self, members: &[usize], beta: Rationality) -> Result<f64> {
        let (table, demos) = self.table(members)?;
        let log_post = log_likelihoods(&table, &demos, beta);
        let lse = log_sum_exp(&log_post);
        Ok(log_post
            .iter()
            .map(|l| l - lse)
            .filter(|l| l.is_finite())
            .map(|l| -l.exp() * l)
            .sum::<f64>()
            .max(0.0))
    }

    /// Uniform-prior posterior when the learner's choice set is `members`.
    pub fn posterior(&self, members: &[usize], beta: Rationality) -> Result<Belief> {
        let hyps: Vec<RewardHypothesis> = (0..self.rewards.len())
            .map(|h| {
                let mut w = vec![0.0; self.rewards.len()];
                w[h] = 1.0;
                RewardHypothesis::new(w)
            })
            .collect::<Result<_>>()?;
        let prior = Belief::uniform(hyps)?;
        let (table, demos) = self.table(members)?;
        posterior_from_rewards(&table, &demos, &prior, beta)
    }
}

fn family_p1(seed: u64) -> Result<FamilyResult> {
    let beta = Rationality::new(RATIONAL_BETA)?;
    let mut rng = rng_for(seed, &[0x0001]);
    let mut violations = 0;
    let mut disagreements = 0;
    const INSTANCES: usize = 100;
    for _ in 0..INSTANCES {
        let inst = NestedInstance::random(&mut rng);
        let h = |members: &[usize]| -> Result<(f64, f64)> {
            let b = inst.posterior(members, beta)?;
            Ok((shannon_entropy(&b), inst.entropy_log_space(members, beta)?))
        };
        let (over, over2) = h(&inst.over)?;
        let (ideal, ideal2) = h(&inst.ideal)?;
        let (under, under2) = h(&inst.under)?;
        if over > ideal + 1e-9 || ideal > under + 1e-9 {
            violations += 1;
        }
        if (over - over2).abs() > 1e-9 || (ideal - ideal2).abs() > 1e-9 || (under - under2).abs() > 1e-9 {
            disagreements += 1;
        }
    }
    Ok(FamilyResult {
        name: "P1 over-/under-estimation entropy ordering",
        passed: violations == 0 && disagreements == 0,
        detail: format!("{INSTANCES} instances, {violations} ordering violations, {disagreements} entropy disagreements"),
    })
}

/// The overestimation instance: the demo is the teacher's best in `C_H`
/// under `θ₁`, but the learner's superset contains a better option for
/// `θ₁`, leaving the demo optimal only for `θ₂`.
///
/// Returns the posterior mass on the wrong hypothesis `θ₂`.
pub fn p2_wrong_mass() -> Result<f64> {
    let beta = Rationality::new(RATIONAL_BETA)?;
    let theta = [vec![1.0, 0.0], vec![0.0, 1.0]];
    let phi = [[0.5, 1.0], [0.2, 0.5], [1.0, 0.2]];
    let rewards: Vec<Vec<f64>> = theta
        .iter()
        .map(|t| phi.iter().map(|f| t[0] * f[0] + t[1] * f[1]).collect())
        .collect();
    let prior = Belief::uniform(
        theta
            .iter()
            .map(|w| RewardHypothesis::new(w.clone()))
            .collect::<Result<_>>()?,
    )?;
    // C_H = {a, b}: under θ₁ the teacher shows a; C_R = {a, b, c}
    let teacher_pick = if rewards[0][0] > rewards[0][1] { 0 } else { 1 };
    let b = posterior_from_rewards(&rewards, &[teacher_pick], &prior, beta)?;
    Ok(b.probs()[1])
}

fn family_p2() -> Result<FamilyResult> {
    let mass = p2_wrong_mass()?;
    Ok(FamilyResult {
        name: "P2 overestimation learns the wrong reward",
        passed: mass >= 0.99,
        detail: format!("wrong-hypothesis mass {mass:.6}"),
    })
}

/// Largest absolute deviation between prior and posterior over random
/// singleton-choice-set instances.
pub fn p3_max_deviation(seed: u64, instances: usize) -> Result<f64> {
    let beta = Rationality::new(RATIONAL_BETA)?;
    let mut rng = rng_for(seed, &[0x0003]);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let k = rng.random_range(2..=8);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let hyps = (0..k)
            .map(|_| RewardHypothesis::new(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect::<Result<Vec<_>>>()?;
        let prior = Belief::new(hyps, raw.iter().map(|r| r / total).collect())?;
        let table: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.random_range(-5.0..5.0)]).collect();
        let n = rng.random_range(1..=5);
        let b = posterior_from_rewards(&table, &vec![0; n], &prior, beta)?;
        for (p, q) in b.probs().iter().zip(prior.probs()) {
            worst = worst.max((p - q).abs());
        }
    }
    Ok(worst)
}

fn family_p3(seed: u64) -> Result<FamilyResult> {
    let dev = p3_max_deviation(seed, 100)?;
    Ok(FamilyResult {
        name: "P3 singleton choice set returns the prior",
        passed: dev <= 1e-12,
        detail: format!("max |posterior - prior| = {dev:.3e}"),
    })
}

/// Runs the three rational-limit families; numerical errors become failed
/// entries rather than errors.
pub fn proposition_suite(seed: u64) -> PropositionReport {
    let wrap = |name: &'static str, r: Result<FamilyResult>| {
        r.unwrap_or_else(|e| FamilyResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        })
    };
    PropositionReport {
        seed,
        families: vec![
            wrap("P1", family_p1(seed)),
            wrap("P2", family_p2()),
            wrap("P3", family_p3(seed)),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in MethodId::ALL {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
        }
        let err = "bogus".parse::<MethodId>().unwrap_err().to_string();
        for name in METHOD_NAMES {
            assert!(err.contains(name), "{err}");
        }
    }

    #[test]
    fn suite_passes() {
        for seed in [0, 7, 8] {
            let r = proposition_suite(seed);
            assert!(r.all_passed(), "{r}");
        }
        assert_eq!(proposition_suite(3).to_string(), proposition_suite(3).to_string());
    }

    #[test]
    fn risk_sign_on_nested_instance() {
        let beta = Rationality::new(RATIONAL_BETA).unwrap();
        let mut rng = rng_for(42, &[]);
        let mut checked = 0;
        for _ in 0..200 {
            let inst = NestedInstance::random(&mut rng);
            let over = inst.posterior(&inst.over, beta).unwrap();
            let ideal = inst.posterior(&inst.ideal, beta).unwrap();
            let under = inst.posterior(&inst.under, beta).unwrap();
            assert!(risk_metric(&over, &ideal).unwrap() <= 1e-9);
            assert!(risk_metric(&under, &ideal).unwrap() >= -1e-9);
            checked += 1;
        }
        assert_eq!(checked, 200);
    }

    #[test]
    fn config_defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        ExperimentConfig::for_env("coffeeworld").unwrap().validate().unwrap();
        assert!(ExperimentConfig::for_env("mars").is_err());
        let bad = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
