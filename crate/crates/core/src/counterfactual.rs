//! Counterfactual trajectories that are similar to, or simpler than, a
//! demonstration, and the learner's choice set built from them.
//!
//! Three generators:
//!
//! * **noisy**: `ξ' = ξ + Aσ` with a smoothing deformation shape `A` that
//!   leaves both endpoints fixed;
//! * **sparse**: `ξ' = g(U*)`, `U* = argmin ‖ξ − g(U)‖² + λ‖U‖₁²`, solved
//!   by proximal gradient descent;
//! * **consistent**: `ξ' = g(U*)`, `U* = argmin ‖ξ − g(U)‖² + λ Σ_t ‖u^t − u^{t−1}‖²`,
//!   a linear least-squares problem solved directly.
//!
//! The solvers assume `g` is affine in `U`; they read the model off
//! [`Dynamics::rollout_linear`] by probing it with unit inputs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environments::Dynamics;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::types::{ChoiceSet, DemonstrationSet, InputSequence, Provenance, Trajectory};

/// Deformation shape `A`, noise scale and number of draws per demo.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSpec {
    shape: DMatrix<f64>,
    sigma_scale: f64,
    count: usize,
}

impl DeformationSpec {
    pub fn new(shape: DMatrix<f64>, sigma_scale: f64, count: usize) -> Result<Self> {
        let n = shape.nrows();
        if n < 2 || shape.ncols() != n {
            return Err(Error::param("shape", "must be square with at least two rows"));
        }
        if shape.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("shape", "entries must be finite"));
        }
        if shape.row(0).iter().any(|&a| a != 0.0) || shape.row(n - 1).iter().any(|&a| a != 0.0) {
            return Err(Error::param("shape", "first and last rows must be zero"));
        }
        if !(sigma_scale > 0.0) || !sigma_scale.is_finite() {
            return Err(Error::param("sigma_scale", "must be positive"));
        }
        if count == 0 {
            return Err(Error::param("count", "must be >= 1"));
        }
        Ok(Self {
            shape,
            sigma_scale,
            count,
        })
    }

    /// [`smoothing_shape`] for a trajectory with `horizon` transitions.
    pub fn smoothing(horizon: usize, sigma_scale: f64, count: usize) -> Result<Self> {
        Self::new(smoothing_shape(horizon), sigma_scale, count)
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn sigma_scale(&self) -> f64 {
        self.sigma_scale
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// `(T+1)×(T+1)` deformation shape: the inverse of `RᵀR`, where `R` is the
/// second-difference operator over the interior waypoints with zero
/// displacement at both ends, scaled to unit spectral norm and embedded with
/// zero rows and columns at `t = 0` and `t = T`.
pub fn smoothing_shape(horizon: usize) -> DMatrix<f64> {
    let n = horizon + 1;
    let mut a = DMatrix::zeros(n, n);
    let m = n.saturating_sub(2);
    if m == 0 {
        return a;
    }
    let mut r = DMatrix::zeros(m, m);
    for i in 0..m {
        r[(i, i)] = -2.0;
        if i + 1 < m {
            r[(i, i + 1)] = 1.0;
            r[(i + 1, i)] = 1.0;
        }
    }
    let k = r.transpose() * &r;
    let k_inv = k
        .clone()
        .cholesky()
        .expect("second-difference Gram matrix is positive definite")
        .inverse();
    // K⁻¹ is symmetric positive definite: its spectral norm is its largest eigenvalue
    let top = k_inv.symmetric_eigenvalues().max();
    let scaled = k_inv / top;
    a.view_mut((1, 1), (m, m)).copy_from(&scaled);
    a
}

/// Noisy deformations of `xi`.
///
/// For each of `spec.count()` draws, `σ` is a `(T+1)×d` matrix whose entries
/// are `sigma_scale · N(0, 1)`, drawn in row-major order from a
/// `ChaCha8Rng` seeded with `seed` (draws consume the stream in sequence).
/// The output is `ξ + Aσ`; rows of `A` that are zero leave the corresponding
/// states bit-identical to the input.
pub fn deform_noisy(xi: &Trajectory, spec: &DeformationSpec, seed: u64) -> Result<Vec<Trajectory>> {
    if spec.shape.nrows() != xi.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.shape.nrows(),
            actual: xi.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.count)
        .map(|_| {
            let sigma = DMatrix::from_row_iterator(
                xi.len(),
                xi.dim(),
                (0..xi.len() * xi.dim())
                    .map(|_| spec.sigma_scale * rng.sample::<f64, _>(StandardNormal))
                    .collect::<Vec<_>>(),
            );
            apply_deformation(xi, &spec.shape, &sigma)
        })
        .collect()
}

/// `ξ + Aσ`, skipping rows of `A` that are entirely zero.
pub fn apply_deformation(xi: &Trajectory, shape: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<Trajectory> {
    let (n, d) = (xi.len(), xi.dim());
    if shape.nrows() != n || sigma.nrows() != n || sigma.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: sigma.nrows(),
        });
    }
    let offset = shape * sigma;
    let mut data = xi.as_flat().to_vec();
    for t in 0..n {
        if shape.row(t).iter().all(|&a| a == 0.0) {
            continue;
        }
        for j in 0..d {
            data[t * d + j] += offset[(t, j)];
        }
    }
    Trajectory::from_flat(d, data)
}

/// Settings for the input-space solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Trade-off `λ > 0` between tracking and the input penalty.
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Proximal-gradient step; `None` uses `1/L` with `L` estimated by power
    /// iteration on the dynamics operator.
    pub step: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            max_iters: 5000,
            tol: 1e-8,
            step: None,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", "must be positive and finite"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if let Some(step) = self.step {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::param("step", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub inputs: InputSequence,
    /// Unclamped rollout of `inputs` from the demo's first state.
    pub trajectory: Trajectory,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration (sparse solver only).
    pub history: Vec<f64>,
    /// `‖∇objective‖₂` at the returned inputs (consistent solver only).
    pub gradient_norm: Option<f64>,
}

/// `g(U) = offset + G·vec(U)`, with `b = vec(ξ) − offset`.
struct AffineModel {
    g: DMatrix<f64>,
    b: DVector<f64>,
    steps: usize,
    input_dim: usize,
}

impl AffineModel {
    fn probe<D: Dynamics + ?Sized>(xi: &Trajectory, dynamics: &D) -> Result<Self> {
        if dynamics.state_dim() != xi.dim() {
            return Err(Error::DimensionMismatch {
                expected: dynamics.state_dim(),
                actual: xi.dim(),
            });
        }
        let steps = xi.horizon();
        let m = dynamics.input_dim();
        let x0 = xi.first();
        let zeros = InputSequence::zeros(steps, m);
        let offset = DVector::from_column_slice(dynamics.rollout_linear(x0, &zeros)?.as_flat());
        let mut g = DMatrix::zeros(offset.len(), steps * m);
        let mut unit = vec![0.0; steps * m];
        for i in 0..steps * m {
            unit[i] = 1.0;
            let col = dynamics.rollout_linear(x0, &InputSequence::from_flat(m, unit.clone())?)?;
            for (r, v) in col.as_flat().iter().enumerate() {
                g[(r, i)] = v - offset[r];
            }
            unit[i] = 0.0;
        }
        let b = DVector::from_column_slice(xi.as_flat()) - offset;
        Ok(Self {
            g,
            b,
            steps,
            input_dim: m,
        })
    }

    fn tracking(&self, u: &DVector<f64>) -> f64 {
        (&self.g * u - &self.b).norm_squared()
    }

    fn finish<D: Dynamics + ?Sized>(
        &self,
        xi: &Trajectory,
        dynamics: &D,
        u: &DVector<f64>,
    ) -> Result<(InputSequence, Trajectory)> {
        let inputs = InputSequence::from_flat(self.input_dim, u.as_slice().to_vec())?;
        debug_assert_eq!(inputs.len(), self.steps);
        let traj = dynamics.rollout_linear(xi.first(), &inputs)?;
        Ok((inputs, traj))
    }
}

/// Largest eigenvalue of `GᵀG` by power iteration.
fn gram_spectral_radius(g: &DMatrix<f64>) -> f64 {
    let n = g.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..500 {
        let w = g.transpose() * (g * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - estimate).abs() <= 1e-12 * next.abs() {
            estimate = next;
            break;
        }
        estimate = next;
    }
    estimate
}

/// Proximal operator of `x ↦ weight · ‖x‖₁²`.
///
/// The minimizer soft-thresholds every coordinate by `2·weight·‖x*‖₁`;
/// sorting magnitudes decreasingly, the support is the longest prefix `k`
/// with `a_k > 2w·S_k / (1 + 2w·k)`, `S_k` the prefix sum.
pub fn prox_squared_l1(v: &[f64], weight: f64) -> Vec<f64> {
    let mu = 2.0 * weight;
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut threshold = f64::INFINITY;
    for (k, &a) in mags.iter().enumerate() {
        let s = prefix + a;
        let cand = mu * s / (1.0 + mu * (k + 1) as f64);
        if a > cand {
            prefix = s;
            threshold = cand;
        } else {
            break;
        }
    }
    if !threshold.is_finite() {
        return vec![0.0; v.len()];
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - threshold).max(0.0))
        .collect()
}

/// Sparse-input counterfactual: proximal gradient descent on
/// `‖ξ − g(U)‖² + λ‖U‖₁²`, starting from zero inputs.
///
/// With step `≤ 1/L` every iteration is a descent step. Stops once the
/// iterate moves less than `tol·(1 + ‖U‖)`; otherwise returns the best
/// iterate after `max_iters` with `converged = false`.
pub fn solve_sparse_inputs<D: Dynamics + ?Sized>(
    xi: &Trajectory,
    dynamics: &D,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let model = AffineModel::probe(xi, dynamics)?;
    let objective = |u: &DVector<f64>| model.tracking(u) + cfg.lambda * u.lp_norm(1).powi(2);
    let step = match cfg.step {
        Some(s) => s,
        None => {
            let lipschitz = 2.0 * gram_spectral_radius(&model.g) * 1.01;
            if lipschitz > 0.0 {
                1.0 / lipschitz
            } else {
                1.0
            }
        }
    };
    let gt = model.g.transpose();
    let mut u = DVector::zeros(model.g.ncols());
    let mut best_u = u.clone();
    let mut best = objective(&u);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        let grad = &gt * (&model.g * &u - &model.b) * 2.0;
        let v = &u - grad * step;
        let next = DVector::from_vec(prox_squared_l1(v.as_slice(), step * cfg.lambda));
        let moved = (&next - &u).norm();
        u = next;
        let f = objective(&u);
        history.push(f);
        if f < best {
            best = f;
            best_u = u.clone();
        }
        if moved <= cfg.tol * (1.0 + u.norm()) {
            converged = true;
            break;
        }
    }
    let (inputs, trajectory) = model.finish(xi, dynamics, &best_u)?;
    Ok(SolveOutcome {
        inputs,
        trajectory,
        objective: best,
        iterations,
        converged,
        history,
        gradient_norm: None,
    })
}

/// Consistent-input counterfactual: solves the normal equations
/// `(GᵀG + λDᵀD) u = Gᵀb` of `‖ξ − g(U)‖² + λ Σ_t ‖u^t − u^{t−1}‖²` by
/// Cholesky factorization, with one step of iterative refinement.
pub fn solve_consistent_inputs<D: Dynamics + ?Sized>(
    xi: &Trajectory,
    dynamics: &D,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let model = AffineModel::probe(xi, dynamics)?;
    let (steps, m) = (model.steps, model.input_dim);
    let n = steps * m;
    let mut diff = DMatrix::zeros(steps.saturating_sub(1) * m, n);
    for t in 1..steps {
        for j in 0..m {
            let row = (t - 1) * m + j;
            diff[(row, t * m + j)] = 1.0;
            diff[(row, (t - 1) * m + j)] = -1.0;
        }
    }
    let gt = model.g.transpose();
    let hessian = &gt * &model.g + diff.transpose() * &diff * cfg.lambda;
    let rhs = &gt * &model.b;
    let chol = hessian
        .clone()
        .cholesky()
        .ok_or(Error::SingularSystem { lambda: cfg.lambda })?;
    let mut u = chol.solve(&rhs);
    let residual = &rhs - &hessian * &u;
    u += chol.solve(&residual);
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularSystem { lambda: cfg.lambda });
    }
    let gradient_norm = ((&hessian * &u - &rhs) * 2.0).norm();
    let objective = model.tracking(&u) + cfg.lambda * (&diff * &u).norm_squared();
    let (inputs, trajectory) = model.finish(xi, dynamics, &u)?;
    Ok(SolveOutcome {
        inputs,
        trajectory,
        objective,
        iterations: 1,
        converged: true,
        history: Vec::new(),
        gradient_norm: Some(gradient_norm),
    })
}

/// One way of producing counterfactuals from a demonstration.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Noisy(DeformationSpec),
    Sparse(SolverConfig),
    Consistent(SolverConfig),
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Noisy(_) => "noisy",
            Generator::Sparse(_) => "sparse",
            Generator::Consistent(_) => "consistent",
        }
    }

    /// Counterfactuals of demo `source`, tagged with provenance.
    pub fn generate<D: Dynamics + ?Sized>(
        &self,
        demo: &Trajectory,
        source: usize,
        dynamics: &D,
        seed: u64,
    ) -> Result<Vec<(Trajectory, Provenance)>> {
        Ok(match self {
            Generator::Noisy(spec) => deform_noisy(demo, spec, seed)?
                .into_iter()
                .enumerate()
                .map(|(draw, t)| (t, Provenance::Noisy { source, seed, draw }))
                .collect(),
            Generator::Sparse(cfg) => vec![(
                solve_sparse_inputs(demo, dynamics, cfg)?.trajectory,
                Provenance::Sparse {
                    source,
                    lambda: cfg.lambda,
                },
            )],
            Generator::Consistent(cfg) => vec![(
                solve_consistent_inputs(demo, dynamics, cfg)?.trajectory,
                Provenance::Consistent {
                    source,
                    lambda: cfg.lambda,
                },
            )],
        })
    }
}

/// How many counterfactuals of each kind to generate per demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterfactualBudget {
    pub noisy: usize,
    pub sigma_scale: f64,
    pub sparse_lambdas: Vec<f64>,
    pub consistent_lambdas: Vec<f64>,
}

impl Default for CounterfactualBudget {
    fn default() -> Self {
        Self {
            noisy: 5,
            sigma_scale: 0.05,
            sparse_lambdas: vec![0.1, 1.0, 10.0],
            consistent_lambdas: vec![0.1, 1.0, 10.0],
        }
    }
}

impl CounterfactualBudget {
    /// All three kinds of generator for trajectories with `horizon` steps.
    pub fn generators(&self, horizon: usize) -> Result<Vec<Generator>> {
        let mut gens = self.noisy_generators(horizon)?;
        gens.extend(
            self.sparse_lambdas
                .iter()
                .map(|&l| Generator::Sparse(SolverConfig::with_lambda(l))),
        );
        gens.extend(
            self.consistent_lambdas
                .iter()
                .map(|&l| Generator::Consistent(SolverConfig::with_lambda(l))),
        );
        Ok(gens)
    }

    /// Only the noisy-deformation generator (empty when `noisy == 0`).
    pub fn noisy_generators(&self, horizon: usize) -> Result<Vec<Generator>> {
        if self.noisy == 0 {
            return Ok(Vec::new());
        }
        Ok(vec![Generator::Noisy(DeformationSpec::smoothing(
            horizon,
            self.sigma_scale,
            self.noisy,
        )?)])
    }
}

/// Seed handed to generator `generator` for demo `demo`.
pub fn generator_seed(seed: u64, demo: usize, generator: usize) -> u64 {
    derive_seed(seed, &[0xcf, demo as u64, generator as u64])
}

/// The learner's choice set: start from the demonstrations, then add every
/// generator's counterfactuals of every demo. Members are deduplicated and
/// keep the provenance of their first insertion.
pub fn build_choice_set<D: Dynamics + Sync + ?Sized>(
    demos: &DemonstrationSet,
    generators: &[Generator],
    dynamics: &D,
    seed: u64,
) -> Result<ChoiceSet> {
    let mut set = demos.to_choice_set();
    let generated = demos
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(i, demo)| {
            let mut out = Vec::new();
            for (g, generator) in generators.iter().enumerate() {
                out.extend(generator.generate(demo, i, dynamics, generator_seed(seed, i, g))?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    for (traj, prov) in generated.into_iter().flatten() {
        set.insert(traj, prov);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::Integrator;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Trajectory {
        Trajectory::from_flat(1, values.to_vec()).unwrap()
    }

    const INTEGRATOR: Integrator = Integrator { dim: 1 };

    #[test]
    fn prox_matches_scalar_closed_form() {
        // one coordinate: argmin ½(x − v)² + w x² = v / (1 + 2w)
        let x = prox_squared_l1(&[3.0], 0.25);
        assert!((x[0] - 2.0).abs() < 1e-15);
        assert_eq!(prox_squared_l1(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_is_optimal_against_scan() {
        let v = [1.0, -0.4, 0.3];
        let w = 0.3;
        let x = prox_squared_l1(&v, w);
        let f = |x: &[f64]| {
            let l1: f64 = x.iter().map(|a| a.abs()).sum();
            0.5 * x.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + w * l1 * l1
        };
        let best = f(&x);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20000 {
            let y: Vec<f64> = x.iter().map(|a| a + rand::Rng::random_range(&mut rng, -0.05..0.05)).collect();
            assert!(f(&y) >= best - 1e-12);
        }
    }

    #[test]
    fn smoothing_shape_structure() {
        let a = smoothing_shape(6);
        assert_eq!(a.shape(), (7, 7));
        assert!(a.row(0).iter().all(|&x| x == 0.0));
        assert!(a.row(6).iter().all(|&x| x == 0.0));
        assert!(a.column(0).iter().all(|&x| x == 0.0));
        assert!((a.clone() - a.transpose()).abs().max() < 1e-12);
        let top = a.clone().symmetric_eigenvalues().max();
        assert!((top - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_noise_limit_and_fixed_endpoints() {
        let xi = Trajectory::new(vec![vec![0.0, 1.0], vec![0.3, 0.7], vec![0.6, 0.2], vec![1.0, 0.0]])
            .unwrap();
        let spec = DeformationSpec::smoothing(3, 1e-300, 4).unwrap();
        for d in deform_noisy(&xi, &spec, 5).unwrap() {
            for (a, b) in d.as_flat().iter().zip(xi.as_flat()) {
                assert!((a - b).abs() < 1e-250);
            }
        }
        let spec = DeformationSpec::smoothing(3, 0.5, 10).unwrap();
        for d in deform_noisy(&xi, &spec, 9).unwrap() {
            assert_eq!(d.first(), xi.first());
            assert_eq!(d.last(), xi.last());
            assert_ne!(d.state(1), xi.state(1));
        }
    }

    #[test]
    fn deformation_spec_validation() {
        let mut bad = smoothing_shape(4);
        bad[(0, 1)] = 0.1;
        assert!(DeformationSpec::new(bad, 0.1, 1).is_err());
        assert!(DeformationSpec::smoothing(4, 0.0, 1).is_err());
        assert!(DeformationSpec::smoothing(4, 0.1, 0).is_err());
        let xi = line(&[0.0, 1.0, 2.0]);
        let spec = DeformationSpec::smoothing(4, 0.1, 1).unwrap();
        assert!(deform_noisy(&xi, &spec, 0).is_err());
    }

    #[test]
    fn sparse_solver_limits() {
        let target = line(&[0.0, 1.0, 2.0, 3.0]);
        let tiny = SolverConfig {
            lambda: 1e-12,
            max_iters: 200_000,
            tol: 1e-14,
            step: None,
        };
        let out = solve_sparse_inputs(&target, &INTEGRATOR, &tiny).unwrap();
        for &u in out.inputs.as_flat() {
            assert!((u - 1.0).abs() < 1e-5, "{:?}", out.inputs);
        }
        for (a, b) in out.trajectory.as_flat().iter().zip(target.as_flat()) {
            assert!((a - b).abs() < 1e-5);
        }

        // λ‖U‖₁² is flat at zero, so the minimizer shrinks like 1/λ without vanishing
        let huge = SolverConfig::with_lambda(1e9);
        let out = solve_sparse_inputs(&target, &INTEGRATOR, &huge).unwrap();
        assert!(out.inputs.as_flat().iter().all(|&u| u.abs() < 1e-7), "{:?}", out.inputs);
        assert!(out.trajectory.as_flat().iter().all(|&x| x.abs() < 1e-6));
    }

    #[test]
    fn consistent_solver_examples() {
        let target = line(&[0.0, 1.0, 2.0, 3.0]);
        for lambda in [1e-10, 0.1, 1.0, 10.0, 1e6] {
            let out = solve_consistent_inputs(&target, &INTEGRATOR, &SolverConfig::with_lambda(lambda)).unwrap();
            for &u in out.inputs.as_flat() {
                assert!((u - 1.0).abs() < 1e-9, "lambda {lambda}: {:?}", out.inputs);
            }
        }

        let bumpy = line(&[0.0, 1.0, 1.0, 2.0]);
        let out = solve_consistent_inputs(&bumpy, &INTEGRATOR, &SolverConfig::with_lambda(1e8)).unwrap();
        let u = 9.0 / 14.0;
        for &v in out.inputs.as_flat() {
            assert!((v - u).abs() < 1e-6);
        }
        let expect = [0.0, u, 2.0 * u, 3.0 * u];
        for (a, b) in out.trajectory.as_flat().iter().zip(expect) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!((out.trajectory.state(1)[0] - 0.6429).abs() < 1e-4);
        assert!((out.trajectory.state(3)[0] - 1.9286).abs() < 1e-4);
    }

    #[test]
    fn consistent_solver_gradient_vanishes() {
        let xi = line(&[0.0, 0.4, 0.5, 1.3, 1.1, 2.0]);
        for lambda in [0.01, 0.3, 3.0, 30.0] {
            let cfg = SolverConfig::with_lambda(lambda);
            let out = solve_consistent_inputs(&xi, &INTEGRATOR, &cfg).unwrap();
            assert!(out.gradient_norm.unwrap() <= cfg.tol, "{:?}", out.gradient_norm);
        }
    }

    #[test]
    fn solvers_reject_bad_lambda() {
        let xi = line(&[0.0, 1.0]);
        assert!(solve_sparse_inputs(&xi, &INTEGRATOR, &SolverConfig::with_lambda(0.0)).is_err());
        assert!(solve_consistent_inputs(&xi, &INTEGRATOR, &SolverConfig::with_lambda(-1.0)).is_err());
    }

    #[test]
    fn sparse_objective_never_increases() {
        let xi = line(&[0.0, 0.8, 0.9, 2.1, 2.0, 3.5]);
        for lambda in [0.05, 0.5, 5.0] {
            let out = solve_sparse_inputs(&xi, &INTEGRATOR, &SolverConfig::with_lambda(lambda)).unwrap();
            for w in out.history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
            assert!(out.converged);
        }
    }

    #[test]
    fn tracking_error_grows_with_lambda() {
        let xi = line(&[0.0, 0.8, 0.9, 2.1, 2.0, 3.5]);
        let err = |t: &Trajectory| {
            t.as_flat()
                .iter()
                .zip(xi.as_flat())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let grid = [0.001, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0];
        let mut prev = (0.0, 0.0);
        for lambda in grid {
            let cfg = SolverConfig::with_lambda(lambda);
            let s = err(&solve_sparse_inputs(&xi, &INTEGRATOR, &cfg).unwrap().trajectory);
            let c = err(&solve_consistent_inputs(&xi, &INTEGRATOR, &cfg).unwrap().trajectory);
            assert!(s >= prev.0 - 1e-9, "sparse at {lambda}");
            assert!(c >= prev.1 - 1e-9, "consistent at {lambda}");
            prev = (s, c);
        }
    }

    #[test]
    fn no_generators_gives_demos() {
        let demos = DemonstrationSet::new(vec![line(&[0.0, 1.0, 2.0]), line(&[0.0, 0.5, 2.0])]).unwrap();
        let set = build_choice_set(&demos, &[], &INTEGRATOR, 0).unwrap();
        assert_eq!(set.len(), 2);
        assert!(demos.iter().all(|d| set.contains(d)));
    }

    #[test]
    fn choice_set_counting_bound() {
        let demos = DemonstrationSet::new(vec![line(&[0.0, 1.0, 2.0, 3.0]), line(&[0.0, 0.5, 1.0, 3.0])]).unwrap();
        let gens = vec![
            Generator::Noisy(DeformationSpec::smoothing(3, 0.05, 3).unwrap()),
            Generator::Sparse(SolverConfig::with_lambda(1.0)),
            Generator::Consistent(SolverConfig::with_lambda(1.0)),
        ];
        let set = build_choice_set(&demos, &gens, &INTEGRATOR, 3).unwrap();
        assert!(set.len() >= 2 && set.len() <= 12, "{}", set.len());
        for (i, (t, p)) in set.iter_with_provenance().enumerate() {
            if i < 2 {
                assert_eq!(p, &Provenance::Demo { index: i });
            } else {
                assert_ne!(p.generator(), "demo");
                assert_eq!(t.horizon(), 3);
            }
        }
    }

    proptest! {
        #[test]
        fn deformations_touch_only_interior(
            values in prop::collection::vec(-1.0f64..1.0, 3..10),
            seed in any::<u64>(),
        ) {
            let xi = line(&values);
            let spec = DeformationSpec::smoothing(xi.horizon(), 0.1, 3).unwrap();
            for d in deform_noisy(&xi, &spec, seed).unwrap() {
                prop_assert_eq!(d.first(), xi.first());
                prop_assert_eq!(d.last(), xi.last());
            }
        }
    }
}
