//! Coin and shift operators and their composition into walk steps.
//!
//! Positions live on a ring of `2^N` sites: increments and decrements wrap
//! modulo `2^N`, like an increment circuit on a qubit register.
//!
//! One split-step applies, in order:
//! `C(coin1)` → `S+` → `C(coin2)` → `S-`, i.e. `W = S- · C2 · S+ · C1`.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::statevector::{CoinMatrix, WalkerState, MAX_POSITION_QUBITS};

/// Angles of the general single-qubit coin
/// `[[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(λ+φ)} cos θ/2]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl CoinParams {
    pub const fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        Self { theta, phi, lambda }
    }

    pub const fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub const fn hadamard() -> Self {
        Self::new(PI / 2.0, 0.0, PI)
    }

    /// Pauli-X: `C(π, 0, π) = [[0, 1], [1, 0]]`.
    pub const fn pauli_x() -> Self {
        Self::new(PI, 0.0, PI)
    }

    /// Pauli-Z: `C(0, 0, π) = diag(1, −1)`.
    pub const fn pauli_z() -> Self {
        Self::new(0.0, 0.0, PI)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.phi.is_finite() && self.lambda.is_finite()
    }

    /// All three angles reduced to `[0, 2π)`. Reporting only; the optimizer
    /// works with unwrapped values.
    pub fn wrapped(&self) -> Self {
        Self::new(wrap_angle(self.theta), wrap_angle(self.phi), wrap_angle(self.lambda))
    }

    pub fn matrix(&self) -> Result<CoinMatrix> {
        coin_matrix(self)
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Coin parameters of one split-step: `coin1` drives the right half-step,
/// `coin2` the left half-step. Six real degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsqwParams {
    pub coin1: CoinParams,
    pub coin2: CoinParams,
}

impl SsqwParams {
    pub const DIM: usize = 6;

    pub const fn new(coin1: CoinParams, coin2: CoinParams) -> Self {
        Self { coin1, coin2 }
    }

    /// Both coins `C(π/2, 0, 0)`.
    pub const fn balanced() -> Self {
        let c = CoinParams::new(PI / 2.0, 0.0, 0.0);
        Self::new(c, c)
    }

    /// `[θ1, φ1, λ1, θ2, φ2, λ2]`.
    pub fn to_array(&self) -> [f64; 6] {
        let (a, b) = (self.coin1, self.coin2);
        [a.theta, a.phi, a.lambda, b.theta, b.phi, b.lambda]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != Self::DIM {
            return Err(invalid(format!("expected 6 coin angles, got {}", v.len())));
        }
        Ok(Self::new(
            CoinParams::new(v[0], v[1], v[2]),
            CoinParams::new(v[3], v[4], v[5]),
        ))
    }

    pub fn wrapped(&self) -> Self {
        Self::new(self.coin1.wrapped(), self.coin2.wrapped())
    }
}

/// Number of walk steps `t ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct WalkSchedule(NonZeroUsize);

impl WalkSchedule {
    pub fn new(steps: usize) -> Result<Self> {
        NonZeroUsize::new(steps)
            .map(Self)
            .ok_or_else(|| invalid("walk schedule needs at least one step"))
    }

    pub fn steps(&self) -> usize {
        self.0.get()
    }
}

impl Default for WalkSchedule {
    fn default() -> Self {
        Self(NonZeroUsize::new(7).unwrap())
    }
}

impl TryFrom<usize> for WalkSchedule {
    type Error = crate::Error;

    fn try_from(v: usize) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WalkSchedule> for usize {
    fn from(s: WalkSchedule) -> usize {
        s.steps()
    }
}

pub fn coin_matrix(p: &CoinParams) -> Result<CoinMatrix> {
    if !p.is_finite() {
        return Err(invalid(format!("coin parameters must be finite: {p:?}")));
    }
    let (s, c) = (p.theta / 2.0).sin_cos();
    let e_phi = Complex64::from_polar(1.0, p.phi);
    let e_lambda = Complex64::from_polar(1.0, p.lambda);
    let e_both = Complex64::from_polar(1.0, p.phi + p.lambda);
    Ok([
        [Complex64::new(c, 0.0), -e_lambda * s],
        [e_phi * s, e_both * c],
    ])
}

/// `S = |↓⟩⟨↓| ⊗ Σ|x−1⟩⟨x| + |↑⟩⟨↑| ⊗ Σ|x+1⟩⟨x|`.
pub fn shift_dtqw(state: &mut WalkerState) {
    let (up, down) = state.coin_halves_mut();
    up.rotate_right(1);
    down.rotate_left(1);
}

/// `S+`: ↑ moves one site right, ↓ stays.
pub fn shift_plus(state: &mut WalkerState) {
    let (up, _) = state.coin_halves_mut();
    up.rotate_right(1);
}

/// `S-`: ↓ moves one site left, ↑ stays.
pub fn shift_minus(state: &mut WalkerState) {
    let (_, down) = state.coin_halves_mut();
    down.rotate_left(1);
}

/// One DTQW step `S (I ⊗ C)`.
pub fn dtqw_step(state: &mut WalkerState, coin: &CoinParams) -> Result<()> {
    let m = coin_matrix(coin)?;
    state.apply_coin_unchecked(&m);
    shift_dtqw(state);
    Ok(())
}

pub fn evolve_dtqw(state: &mut WalkerState, coin: &CoinParams, schedule: WalkSchedule) -> Result<()> {
    let m = coin_matrix(coin)?;
    for _ in 0..schedule.steps() {
        state.apply_coin_unchecked(&m);
        shift_dtqw(state);
    }
    Ok(())
}

/// One split-step `S- C2 S+ C1`.
pub fn ssqw_step(state: &mut WalkerState, params: &SsqwParams) -> Result<()> {
    let c1 = coin_matrix(&params.coin1)?;
    let c2 = coin_matrix(&params.coin2)?;
    ssqw_step_with(state, &c1, &c2);
    Ok(())
}

fn ssqw_step_with(state: &mut WalkerState, c1: &CoinMatrix, c2: &CoinMatrix) {
    state.apply_coin_unchecked(c1);
    shift_plus(state);
    state.apply_coin_unchecked(c2);
    shift_minus(state);
}

/// `W^t |ψ⟩` with the split-step `W`.
pub fn evolve(state: &mut WalkerState, params: &SsqwParams, schedule: WalkSchedule) -> Result<()> {
    let c1 = coin_matrix(&params.coin1)?;
    let c2 = coin_matrix(&params.coin2)?;
    #[cfg(debug_assertions)]
    let norm_before = state.norm_sqr();
    for _ in 0..schedule.steps() {
        ssqw_step_with(state, &c1, &c2);
    }
    #[cfg(debug_assertions)]
    debug_assert!(
        (state.norm_sqr() - norm_before).abs()
            <= 1e-10 * schedule.steps() as f64 * norm_before.max(1.0),
        "norm drifted during evolution"
    );
    Ok(())
}

/// Largest register for which [`operator_matrix`] will materialize a dense
/// matrix.
pub const MAX_DUMP_QUBITS: u32 = 4;

/// Materializes the matrix of a linear operator on the `2^{N+1}`-dimensional
/// walker space by applying it to every basis vector. Row-major; entry
/// `[i][j] = ⟨i| U |j⟩`.
pub fn operator_matrix<F>(num_position_qubits: u32, mut op: F) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(&mut WalkerState) -> Result<()>,
{
    if num_position_qubits > MAX_DUMP_QUBITS.min(MAX_POSITION_QUBITS) {
        return Err(invalid(format!(
            "operator dump limited to N <= {MAX_DUMP_QUBITS}"
        )));
    }
    let dim = 2usize << num_position_qubits;
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for j in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[j] = Complex64::new(1.0, 0.0);
        let mut s = WalkerState::from_amplitudes_unnormalized(num_position_qubits, amps)?;
        op(&mut s)?;
        for (i, a) in s.amplitudes().iter().enumerate() {
            rows[i][j] = *a;
        }
    }
    Ok(rows)
}

/// Operator dump for debugging and golden files: row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub format_version: u32,
    pub num_position_qubits: u32,
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

pub fn dump_operator(num_position_qubits: u32, rows: &[Vec<Complex64>]) -> OperatorDump {
    OperatorDump {
        format_version: crate::io::FORMAT_VERSION,
        num_position_qubits,
        dim: rows.len(),
        rows: rows
            .iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    }
}
