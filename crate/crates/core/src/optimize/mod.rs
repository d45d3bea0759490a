//! Variational training of SSQW coin angles against a target histogram.
//!
//! Each objective evaluation evolves the start state for `t` split-steps,
//! marginalizes the coin and scores the position distribution with
//! `MSE = (1/2^N) Σ (p_target − p_trained)²`. A derivative-free minimizer
//! drives the angles; the evaluation budget counts objective calls.

pub mod cobyla;
pub mod nelder_mead;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::statevector::WalkerState;
use crate::target::TargetDistribution;
use crate::walk::{evolve, CoinParams, SsqwParams, WalkSchedule};

pub use cobyla::Cobyla;
pub use nelder_mead::NelderMead;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeSettings {
    pub max_evals: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Stop as soon as a value at or below this is seen.
    pub f_target: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    BudgetExhausted,
    RadiusCollapsed,
    TargetReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub stop: StopReason,
}

/// A derivative-free local minimizer over `ℝⁿ`.
pub trait Minimizer {
    fn name(&self) -> &'static str;

    fn minimize(
        &self,
        f: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        settings: &MinimizeSettings,
    ) -> MinimizeOutcome;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    Cobyla,
    NelderMead,
}

impl OptimizerKind {
    pub fn minimizer(&self) -> &'static dyn Minimizer {
        match self {
            Self::Cobyla => &Cobyla,
            Self::NelderMead => &NelderMead,
        }
    }
}

/// Mean squared error with the `1/2^N` normalization.
pub fn mse(p_target: &[f64], p_trained: &[f64]) -> Result<f64> {
    if p_target.len() != p_trained.len() || p_target.is_empty() {
        return Err(invalid(format!(
            "distribution lengths differ: {} vs {}",
            p_target.len(),
            p_trained.len()
        )));
    }
    for (name, p) in [("target", p_target), ("trained", p_trained)] {
        let s: f64 = p.iter().sum();
        if !((s - 1.0).abs() <= 1e-6) {
            return Err(invalid(format!("{name} distribution sums to {s}")));
        }
    }
    Ok(mse_raw(p_target, p_trained))
}

fn mse_raw(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// `|↑⟩ ⊗ |x0⟩`, with `x0` defaulting to the ring center `2^{N−1}`.
pub fn start_state(num_position_qubits: u32, start_position: Option<usize>) -> Result<WalkerState> {
    let x0 = start_position.unwrap_or(1usize << num_position_qubits.saturating_sub(1));
    WalkerState::initial(num_position_qubits, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), x0)
}

/// The fixed part of the objective: target, schedule and start state.
#[derive(Clone, Debug)]
pub struct Objective<'a> {
    target: &'a [f64],
    schedule: WalkSchedule,
    init: WalkerState,
}

impl<'a> Objective<'a> {
    pub fn new(target: &'a [f64], schedule: WalkSchedule, init: WalkerState) -> Result<Self> {
        if target.len() != init.num_positions() {
            return Err(invalid(format!(
                "target has {} bins but the register has {} positions",
                target.len(),
                init.num_positions()
            )));
        }
        Ok(Self { target, schedule, init })
    }

    pub fn distribution(&self, params: &SsqwParams) -> Result<Vec<f64>> {
        let mut s = self.init.clone();
        evolve(&mut s, params, self.schedule)?;
        Ok(s.position_distribution())
    }

    pub fn eval(&self, params: &SsqwParams) -> Result<f64> {
        Ok(mse_raw(self.target, &self.distribution(params)?))
    }
}

/// Evolve `init` under `params` and return the MSE against the target.
pub fn objective(
    params: &SsqwParams,
    target: &TargetDistribution,
    schedule: WalkSchedule,
    init: &WalkerState,
) -> Result<f64> {
    Objective::new(&target.probs, schedule, init.clone())?.eval(params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Objective evaluations per restart.
    pub max_iters: usize,
    pub initial_params: SsqwParams,
    pub steps: WalkSchedule,
    pub initial_trust_radius: f64,
    pub final_trust_radius: f64,
    /// Optimize only `θ1, θ2` with all phases pinned to zero.
    pub symmetric_mode: bool,
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    /// Start site of the walker; `None` means the ring center.
    pub start_position: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 800,
            initial_params: SsqwParams::balanced(),
            steps: WalkSchedule::default(),
            initial_trust_radius: 0.5,
            final_trust_radius: 1e-6,
            symmetric_mode: false,
            restarts: 1,
            seed: 0,
            optimizer: OptimizerKind::Cobyla,
            start_position: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("evaluation budget must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(invalid("need at least one restart"));
        }
        let (a, b) = (self.initial_trust_radius, self.final_trust_radius);
        if !(b > 0.0 && b < a && a.is_finite()) {
            return Err(invalid(format!(
                "trust radii need 0 < final < initial, got final={b}, initial={a}"
            )));
        }
        if !self.initial_params.to_array().iter().all(|v| v.is_finite()) {
            return Err(invalid("initial parameters must be finite"));
        }
        Ok(())
    }

    /// Name of the parameter reduction used, for result metadata.
    pub fn mode_name(&self) -> &'static str {
        if self.symmetric_mode {
            "symmetric-2: theta1, theta2 free; phi1 = lambda1 = phi2 = lambda2 = 0"
        } else {
            "full-6"
        }
    }

    fn to_free(&self, p: &SsqwParams) -> Vec<f64> {
        if self.symmetric_mode {
            vec![p.coin1.theta, p.coin2.theta]
        } else {
            p.to_array().to_vec()
        }
    }

    fn from_free(&self, v: &[f64]) -> SsqwParams {
        if self.symmetric_mode {
            SsqwParams::new(
                CoinParams::new(v[0], 0.0, 0.0),
                CoinParams::new(v[1], 0.0, 0.0),
            )
        } else {
            SsqwParams::from_slice(v).expect("six free parameters")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub start: SsqwParams,
    pub best_mse: f64,
    pub evals: usize,
    pub stop: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingResult {
    /// Unwrapped angles as found by the optimizer.
    pub best_params: SsqwParams,
    pub best_mse: f64,
    /// One entry per objective evaluation, restarts concatenated in order.
    pub mse_history: Vec<f64>,
    pub trained_dist: Vec<f64>,
    pub iterations_used: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub optimizer: String,
    pub mode: String,
}

impl TrainingResult {
    /// Running minimum of the history.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.mse_history
            .iter()
            .scan(f64::INFINITY, |m, &v| {
                *m = m.min(v);
                Some(*m)
            })
            .collect()
    }
}

/// Starting points: the configured parameters, then uniform draws on `[0, 2π)`.
fn restart_starts(config: &OptimizerConfig) -> Vec<SsqwParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = vec![config.initial_params];
    for _ in 1..config.restarts {
        let mut v = [0.0; 6];
        for a in v.iter_mut() {
            *a = rng.random_range(0.0..TAU);
        }
        starts.push(SsqwParams::from_slice(&v).expect("six angles"));
    }
    // project onto the free parameters actually optimized
    starts.iter().map(|p| config.from_free(&config.to_free(p))).collect()
}

/// Trains the coin angles so the walk's position distribution approaches
/// `target`. Returns the best result across restarts, ties going to the
/// earlier restart.
pub fn train(target: &TargetDistribution, config: &OptimizerConfig) -> Result<TrainingResult> {
    config.validate()?;
    target.validate()?;
    let n = target.num_position_qubits();
    let init = start_state(n, config.start_position)?;
    let objective = Objective::new(&target.probs, config.steps, init)?;
    let minimizer = config.optimizer.minimizer();
    let settings = MinimizeSettings {
        max_evals: config.max_iters,
        rho_begin: config.initial_trust_radius,
        rho_end: config.final_trust_radius,
        f_target: Some(0.0),
    };

    let mut history = Vec::new();
    let mut summaries = Vec::new();
    let mut best: Option<(f64, usize, SsqwParams)> = None;
    let mut failure: Option<Error> = None;

    for (index, start) in restart_starts(config).into_iter().enumerate() {
        let mut f = |v: &[f64]| -> f64 {
            let p = config.from_free(v);
            match objective.eval(&p) {
                Ok(m) => {
                    history.push(m);
                    m
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            }
        };
        let out = minimizer.minimize(&mut f, &config.to_free(&start), &settings);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if !out.fx.is_finite() {
            return Err(Error::Optimizer(format!(
                "restart {index} ended at a non-finite objective"
            )));
        }
        let params = config.from_free(&out.x);
        summaries.push(RestartSummary {
            index,
            start,
            best_mse: out.fx,
            evals: out.evals,
            stop: out.stop,
        });
        if best.as_ref().is_none_or(|(m, _, _)| out.fx < *m) {
            best = Some((out.fx, index, params));
        }
        if out.fx == 0.0 {
            break;
        }
    }

    let (best_mse, best_restart, best_params) = best.expect("at least one restart ran");
    let trained_dist = objective.distribution(&best_params)?;
    Ok(TrainingResult {
        best_params,
        best_mse,
        iterations_used: history.len(),
        mse_history: history,
        trained_dist,
        best_restart,
        restarts: summaries,
        optimizer: minimizer.name().to_string(),
        mode: config.mode_name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{analytic_histogram, DistributionKind, Domain};

    #[test]
    fn mse_examples() {
        let p = [0.25, 0.25, 0.5, 0.0];
        assert_eq!(mse(&p, &p).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap(), 0.5);
        assert!(mse(&[1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(mse(&[1.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn identity_walk_against_uniform() {
        let target = analytic_histogram(DistributionKind::Uniform, Domain::default(), 16).unwrap();
        let id = SsqwParams::new(CoinParams::identity(), CoinParams::identity());
        let init = start_state(4, Some(3)).unwrap();
        let v = objective(&id, &target, WalkSchedule::new(7).unwrap(), &init).unwrap();
        let expected = ((1.0 - 1.0 / 16.0f64).powi(2) + 15.0 * (1.0 / 16.0f64).powi(2)) / 16.0;
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.0586).abs() < 1e-4);
    }

    #[test]
    fn objective_is_continuous() {
        let target = analytic_histogram(DistributionKind::Normal { mu: 7.5, sigma: 2.0 }, Domain::default(), 16)
            .unwrap();
        let init = start_state(4, None).unwrap();
        let base = SsqwParams::from_slice(&[1.0, 0.3, -0.7, 2.1, 0.4, 1.9]).unwrap();
        let f0 = objective(&base, &target, WalkSchedule::default(), &init).unwrap();
        for k in 0..6 {
            let mut v = base.to_array();
            v[k] += 1e-9;
            let p = SsqwParams::from_slice(&v).unwrap();
            let f1 = objective(&p, &target, WalkSchedule::default(), &init).unwrap();
            assert!((f1 - f0).abs() < 1e-7, "angle {k}");
        }
    }

    #[test]
    fn objective_rejects_size_mismatch() {
        let target = analytic_histogram(DistributionKind::Uniform, Domain::default(), 8).unwrap();
        let init = start_state(4, None).unwrap();
        assert!(objective(&SsqwParams::balanced(), &target, WalkSchedule::default(), &init).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = OptimizerConfig::default();
        ok.validate().unwrap();
        assert!(OptimizerConfig { max_iters: 0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { restarts: 0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { final_trust_radius: 1.0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { final_trust_radius: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn zero_budget_is_invalid_argument() {
        let target = analytic_histogram(DistributionKind::Uniform, Domain::default(), 16).unwrap();
        let cfg = OptimizerConfig { max_iters: 0, ..Default::default() };
        assert!(matches!(train(&target, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn symmetric_mode_ties_phases() {
        let cfg = OptimizerConfig { symmetric_mode: true, restarts: 3, seed: 9, ..Default::default() };
        for p in restart_starts(&cfg) {
            assert_eq!([p.coin1.phi, p.coin1.lambda, p.coin2.phi, p.coin2.lambda], [0.0; 4]);
        }
        assert_eq!(cfg.to_free(&SsqwParams::balanced()).len(), 2);
    }
}
