//! Walker state over the coin ⊗ position Hilbert space.
//!
//! Amplitudes are stored coin-major: flat index `c * 2^N + x`, with coin
//! `c = 0` for |↑⟩ (≡ |0⟩) and `c = 1` for |↓⟩ (≡ |1⟩). Each coin application
//! is therefore a 2×2 block acting on the pair `(x, 2^N + x)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported position register.
pub const MAX_POSITION_QUBITS: u32 = 24;

/// Tolerance used when validating caller-supplied normalization.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Row-major 2×2 complex matrix acting on the coin register.
pub type CoinMatrix = [[Complex64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coin {
    Up = 0,
    Down = 1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    num_position_qubits: u32,
    amps: Vec<Complex64>,
}

fn check_qubits(n: u32) -> Result<()> {
    if n == 0 || n > MAX_POSITION_QUBITS {
        return Err(invalid(format!(
            "position register must have 1..={MAX_POSITION_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

impl WalkerState {
    /// `(α|↑⟩ + β|↓⟩) ⊗ |x0⟩`.
    pub fn initial(
        num_position_qubits: u32,
        alpha: Complex64,
        beta: Complex64,
        x0: usize,
    ) -> Result<Self> {
        check_qubits(num_position_qubits)?;
        let len = 1usize << num_position_qubits;
        if x0 >= len {
            return Err(invalid(format!("start position {x0} outside 0..{len}")));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(invalid("coin amplitudes must be finite"));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!(
                "coin amplitudes not normalized: |alpha|^2 + |beta|^2 = {norm}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * len];
        amps[x0] = alpha;
        amps[len + x0] = beta;
        Ok(Self {
            num_position_qubits,
            amps,
        })
    }

    /// Computational basis state `|coin⟩ ⊗ |x⟩`.
    pub fn basis(num_position_qubits: u32, coin: Coin, x: usize) -> Result<Self> {
        let (a, b) = match coin {
            Coin::Up => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Coin::Down => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        };
        Self::initial(num_position_qubits, a, b, x)
    }

    /// Wraps a raw coin-major amplitude vector, validating length, finiteness
    /// and normalization.
    pub fn from_amplitudes(num_position_qubits: u32, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(num_position_qubits)?;
        let expected = 2usize << num_position_qubits;
        if amps.len() != expected {
            return Err(invalid(format!(
                "expected {expected} amplitudes, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(invalid("amplitudes must be finite"));
        }
        let state = Self {
            num_position_qubits,
            amps,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("state not normalized: norm^2 = {norm}")));
        }
        Ok(state)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but skips the norm
    /// check. Used for linear-combination tests and operator extraction.
    pub fn from_amplitudes_unnormalized(
        num_position_qubits: u32,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        check_qubits(num_position_qubits)?;
        let expected = 2usize << num_position_qubits;
        if amps.len() != expected {
            return Err(invalid(format!(
                "expected {expected} amplitudes, got {}",
                amps.len()
            )));
        }
        Ok(Self {
            num_position_qubits,
            amps,
        })
    }

    pub fn num_position_qubits(&self) -> u32 {
        self.num_position_qubits
    }

    /// `2^N`.
    pub fn num_positions(&self) -> usize {
        1 << self.num_position_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amp(&self, coin: Coin, x: usize) -> Complex64 {
        self.amps[coin as usize * self.num_positions() + x]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Mutable views of the ↑ and ↓ halves of the register.
    pub(crate) fn coin_halves_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        let len = self.num_positions();
        self.amps.split_at_mut(len)
    }

    /// Born-rule marginal over position: `p[x] = |ψ↑(x)|² + |ψ↓(x)|²`.
    pub fn position_distribution(&self) -> Vec<f64> {
        let len = self.num_positions();
        let (up, down) = self.amps.split_at(len);
        up.iter()
            .zip(down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }

    /// Applies `I ⊗ C` (the same coin at every position).
    pub fn apply_coin(&mut self, coin: &CoinMatrix) -> Result<()> {
        if !is_unitary(coin, NORM_TOLERANCE) {
            return Err(invalid("coin matrix is not unitary"));
        }
        self.apply_coin_unchecked(coin);
        Ok(())
    }

    pub(crate) fn apply_coin_unchecked(&mut self, coin: &CoinMatrix) {
        let [[c00, c01], [c10, c11]] = *coin;
        let (up, down) = self.coin_halves_mut();
        for (u, d) in up.iter_mut().zip(down.iter_mut()) {
            let (a, b) = (*u, *d);
            *u = c00 * a + c01 * b;
            *d = c10 * a + c11 * b;
        }
        debug_assert!(self.amps.iter().all(|a| a.is_finite()));
    }

    pub fn to_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            format_version: crate::io::FORMAT_VERSION,
            num_position_qubits: self.num_position_qubits,
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// `‖C†C − I‖_max ≤ tol`.
pub fn is_unitary(m: &CoinMatrix, tol: f64) -> bool {
    if m.iter().flatten().any(|z| !z.is_finite()) {
        return false;
    }
    (0..2).all(|i| {
        (0..2).all(|j| {
            let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            (dot - expected).norm() <= tol
        })
    })
}

/// JSON snapshot of a walker state: `[re, im]` pairs in flat-index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub format_version: u32,
    pub num_position_qubits: u32,
    pub amps: Vec<[f64; 2]>,
}

impl TryFrom<StateSnapshot> for WalkerState {
    type Error = Error;

    fn try_from(s: StateSnapshot) -> Result<Self> {
        let amps = s
            .amps
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        WalkerState::from_amplitudes(s.num_position_qubits, amps)
    }
}
