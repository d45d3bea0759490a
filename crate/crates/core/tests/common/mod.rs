//! Reference implementations used as test oracles. Everything here is
//! written from the defining formulas and shares no code paths with the
//! library beyond its public data types.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Dense = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `[[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
pub fn coin(theta: f64, phi: f64, lambda: f64) -> Dense {
    let i = c(0.0, 1.0);
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    DMatrix::from_row_slice(
        2,
        2,
        &[
            c(ct, 0.0),
            -(i * lambda).exp() * st,
            (i * phi).exp() * st,
            (i * (phi + lambda)).exp() * ct,
        ],
    )
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// `C ⊗ I_{2^N}` in the coin-major basis.
pub fn coin_on_walker(n: u32, m: &Dense) -> Dense {
    kron(m, &DMatrix::identity(1 << n, 1 << n))
}

/// Permutation matrix sending `|c, x⟩` to `|c, x + moves[c] mod L⟩`.
fn conditional_shift(n: u32, moves: [i64; 2]) -> Dense {
    let l = 1usize << n;
    let mut m = DMatrix::zeros(2 * l, 2 * l);
    for coin in 0..2 {
        for x in 0..l {
            let y = (x as i64 + moves[coin]).rem_euclid(l as i64) as usize;
            m[(coin * l + y, coin * l + x)] = c(1.0, 0.0);
        }
    }
    m
}

pub fn shift_dtqw(n: u32) -> Dense {
    conditional_shift(n, [1, -1])
}

pub fn shift_plus(n: u32) -> Dense {
    conditional_shift(n, [1, 0])
}

pub fn shift_minus(n: u32) -> Dense {
    conditional_shift(n, [0, -1])
}

/// `S₋ (C₂ ⊗ I) S₊ (C₁ ⊗ I)`.
pub fn ssqw_step(n: u32, c1: [f64; 3], c2: [f64; 3]) -> Dense {
    shift_minus(n)
        * coin_on_walker(n, &coin(c2[0], c2[1], c2[2]))
        * shift_plus(n)
        * coin_on_walker(n, &coin(c1[0], c1[1], c1[2]))
}

pub fn dtqw_step(n: u32, c1: [f64; 3]) -> Dense {
    shift_dtqw(n) * coin_on_walker(n, &coin(c1[0], c1[1], c1[2]))
}

pub fn max_abs(m: &Dense) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_defect(u: &Dense) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::identity(n, n)))
}

pub fn apply(u: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    let x = nalgebra::DVector::from_column_slice(v);
    (u * x).iter().copied().collect()
}

/// Born-rule position marginal of a coin-major vector.
pub fn marginal(v: &[Complex64]) -> Vec<f64> {
    let l = v.len() / 2;
    (0..l).map(|x| v[x].norm_sqr() + v[l + x].norm_sqr()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// SplitMix64. Deliberately unrelated to the library's RNG.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `(0, 1)`.
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Box-Muller.
    pub fn gauss(&mut self) -> f64 {
        let (u1, u2) = (self.open01(), self.open01());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn state(&mut self, n: u32) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..2usize << n).map(|_| c(self.gauss(), self.gauss())).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        v
    }

    pub fn probs(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| self.open01()).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|p| *p /= s);
        v
    }
}

/// Bin by linear scan: `[e_i, e_{i+1})`, last bin closed, `None` outside.
pub fn oracle_bin(value: f64, lo: f64, hi: f64, n_bins: usize) -> Option<usize> {
    if value < lo || value > hi {
        return None;
    }
    let w = (hi - lo) / n_bins as f64;
    for i in 0..n_bins {
        let right = if i + 1 == n_bins { hi } else { lo + w * (i + 1) as f64 };
        if value < right {
            return Some(i);
        }
    }
    Some(n_bins - 1)
}

pub fn oracle_histogram(values: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; n_bins];
    let mut kept = 0.0;
    for &v in values {
        if let Some(i) = oracle_bin(v, lo, hi, n_bins) {
            h[i] += 1.0;
            kept += 1.0;
        }
    }
    h.iter_mut().for_each(|x| *x /= kept);
    h
}

/// Composite Simpson integral of `f` over `[a, b]`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (std::f64::consts::TAU).sqrt())
}

pub fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        normal_pdf(x.ln(), mu, sigma) / x
    }
}

/// Bin masses by quadrature of `pdf`, renormalized over `[lo, hi]`.
pub fn quadrature_histogram(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let w = (hi - lo) / n_bins as f64;
    let mut m: Vec<f64> = (0..n_bins)
        .map(|i| simpson(&pdf, lo + w * i as f64, lo + w * (i + 1) as f64, 4000))
        .collect();
    let s: f64 = m.iter().sum();
    m.iter_mut().for_each(|x| *x /= s);
    m
}

/// `Σ (a−b)² / n`, accumulated in index order with a Kahan sum.
pub fn oracle_mse(a: &[f64], b: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 0..a.len() {
        let d = a[i] - b[i];
        let y = d * d - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum / a.len() as f64
}

/// Monte Carlo `E[max(S − K, 0)]` for `ln S ~ N(alpha, sigma²)` truncated to
/// `(lo, hi)` by rejection. Returns `(mean, standard error)`.
pub fn mc_truncated_call(
    alpha: f64,
    sigma: f64,
    strike: f64,
    lo: f64,
    hi: f64,
    n: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = SplitMix(seed);
    let (mut s1, mut s2, mut k) = (0.0, 0.0, 0usize);
    while k < n {
        let s = (alpha + sigma * rng.gauss()).exp();
        if s > lo && s < hi {
            let p = (s - strike).max(0.0);
            s1 += p;
            s2 += p * p;
            k += 1;
        }
    }
    let mean = s1 / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

/// As [`mc_truncated_call`] but each sample is priced at the center of the
/// bin it lands in.
pub fn mc_binned_call(
    alpha: f64,
    sigma: f64,
    strike: f64,
    lo: f64,
    hi: f64,
    n_bins: usize,
    n: usize,
    seed: u64,
) -> f64 {
    let mut rng = SplitMix(seed);
    let w = (hi - lo) / n_bins as f64;
    let (mut s1, mut k) = (0.0, 0usize);
    while k < n {
        let s = (alpha + sigma * rng.gauss()).exp();
        if s > lo && s < hi {
            let i = oracle_bin(s, lo, hi, n_bins).unwrap();
            s1 += (lo + (i as f64 + 0.5) * w - strike).max(0.0);
            k += 1;
        }
    }
    s1 / n as f64
}
