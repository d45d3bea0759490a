//! Browser bindings for the walk, the trainer and the call payoff.
//!
//! All prices live on the 16-bin grid over (0, 15) used by the CLI defaults.

use ssqw_core::optimize::{start_state, Objective};
use ssqw_core::target::analytic_histogram;
use ssqw_core::{
    expected_payoff, train, DistributionKind, Domain, OptimizerConfig, PriceGrid, SsqwParams, WalkSchedule,
};
use wasm_bindgen::prelude::*;

pub const POSITION_QUBITS: u32 = 4;
pub const BINS: usize = 1 << POSITION_QUBITS;

fn js(e: ssqw_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Position distribution after `steps` walk steps from the center.
pub fn walk(angles: &[f64], steps: usize) -> ssqw_core::Result<Vec<f64>> {
    let params = SsqwParams::from_slice(angles)?;
    let zeros = [0.0; BINS];
    let objective = Objective::new(&zeros, WalkSchedule::new(steps)?, start_state(POSITION_QUBITS, None)?)?;
    objective.distribution(&params)
}

#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Fit {
    target: Vec<f64>,
    trained: Vec<f64>,
    angles: Vec<f64>,
    best_mse: f64,
    evaluations: usize,
}

#[wasm_bindgen]
impl Fit {
    #[wasm_bindgen(getter)]
    pub fn target(&self) -> Vec<f64> {
        self.target.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn trained(&self) -> Vec<f64> {
        self.trained.clone()
    }

    /// theta1, phi1, lambda1, theta2, phi2, lambda2 wrapped to (-pi, pi].
    #[wasm_bindgen(getter)]
    pub fn angles(&self) -> Vec<f64> {
        self.angles.clone()
    }

    #[wasm_bindgen(getter, js_name = bestMse)]
    pub fn best_mse(&self) -> f64 {
        self.best_mse
    }

    #[wasm_bindgen(getter)]
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// Builds an analytic `normal` or `lognormal` target and trains against it.
pub fn fit(kind: &str, mu: f64, sigma: f64, restarts: usize, seed: u64) -> ssqw_core::Result<Fit> {
    let kind = match kind {
        "normal" => DistributionKind::Normal { mu, sigma },
        "lognormal" => DistributionKind::LogNormal { mu, sigma },
        other => return Err(ssqw_core::Error::InvalidArgument(format!("unknown kind {other:?}"))),
    };
    let target = analytic_histogram(kind, Domain::default(), BINS)?;
    let config = OptimizerConfig { restarts, seed, ..Default::default() };
    let result = train(&target, &config)?;
    Ok(Fit {
        angles: result.best_params.wrapped().to_array().to_vec(),
        target: target.probs,
        trained: result.trained_dist,
        best_mse: result.best_mse,
        evaluations: result.iterations_used,
    })
}

/// E[max(S - K, 0)] with bin-center prices.
pub fn payoff(probs: &[f64], strike: f64) -> ssqw_core::Result<f64> {
    expected_payoff(probs, &PriceGrid::new(Domain::default(), probs.len())?, strike)
}

#[wasm_bindgen(js_name = walkDistribution)]
pub fn walk_distribution(angles: Vec<f64>, steps: usize) -> Result<Vec<f64>, JsError> {
    walk(&angles, steps).map_err(js)
}

#[wasm_bindgen(js_name = fitTarget)]
pub fn fit_target(kind: &str, mu: f64, sigma: f64, restarts: usize, seed: u64) -> Result<Fit, JsError> {
    fit(kind, mu, sigma, restarts, seed).map_err(js)
}

#[wasm_bindgen(js_name = callPayoff)]
pub fn call_payoff(probs: Vec<f64>, strike: f64) -> Result<f64, JsError> {
    payoff(&probs, strike).map_err(js)
}
