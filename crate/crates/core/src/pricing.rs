//! European call payoff on a binned maturity-price distribution.
//!
//! Bin `i` of a `2^N`-bin histogram over `(lo, hi)` stands for the price at
//! its center, `lo + (i + ½)·(hi − lo)/2^N`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::target::{bs_lognormal_target, std_normal_cdf, Domain, OptionSpec, TargetDistribution};

pub const PRICE_MAPPING: &str = "bin-center";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceGrid {
    pub domain: Domain,
    pub n_bins: usize,
    pub prices: Vec<f64>,
}

impl PriceGrid {
    pub fn new(domain: Domain, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(invalid("price grid needs at least one bin"));
        }
        Ok(Self {
            domain,
            n_bins,
            prices: domain.bin_centers(n_bins),
        })
    }

    pub fn for_target(target: &TargetDistribution) -> Result<Self> {
        Self::new(target.domain, target.n_bins())
    }

    pub fn call_payoffs(&self, strike: f64) -> Vec<f64> {
        self.prices.iter().map(|s| (s - strike).max(0.0)).collect()
    }
}

/// `Σ dist[i] · max(price_i − K, 0)`, undiscounted.
pub fn expected_payoff(dist: &[f64], grid: &PriceGrid, strike: f64) -> Result<f64> {
    if dist.len() != grid.prices.len() {
        return Err(invalid(format!(
            "distribution has {} bins, grid has {}",
            dist.len(),
            grid.prices.len()
        )));
    }
    let total: f64 = dist.iter().sum();
    if !((total - 1.0).abs() <= 1e-6) {
        return Err(invalid(format!("distribution sums to {total}")));
    }
    Ok(dist
        .iter()
        .zip(&grid.prices)
        .map(|(p, s)| p * (s - strike).max(0.0))
        .sum())
}

/// `E[max(S − K, 0)]` for an untruncated `ln S ~ N(alpha, sigma²)`.
pub fn lognormal_call_expectation(alpha: f64, sigma: f64, strike: f64) -> f64 {
    if strike <= 0.0 {
        return (alpha + sigma * sigma / 2.0).exp() - strike;
    }
    if sigma == 0.0 {
        return (alpha.exp() - strike).max(0.0);
    }
    let d1 = (alpha - strike.ln() + sigma * sigma) / sigma;
    let d2 = d1 - sigma;
    (alpha + sigma * sigma / 2.0).exp() * std_normal_cdf(d1) - strike * std_normal_cdf(d2)
}

/// How far the truncated grid sits from the untruncated log-normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    /// Probability outside the domain.
    pub tail_mass: f64,
    pub untruncated_payoff: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceOptions {
    /// Multiply payoffs by `e^{−rT}`.
    pub discount: bool,
    /// Reference value to compare the target payoff against.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport {
    pub expected_payoff_target: f64,
    pub expected_payoff_trained: f64,
    /// `trained − target`.
    pub gap: f64,
    pub per_bin_payoff: Vec<f64>,
    pub spec: OptionSpec,
    pub grid: PriceGrid,
    pub price_mapping: String,
    pub discount_factor: f64,
    pub truncation: TruncationInfo,
    pub reference_payoff: Option<f64>,
    /// `(target − reference) / reference`.
    pub reference_relative_gap: Option<f64>,
}

pub fn price_report(
    opt: &OptionSpec,
    target: &TargetDistribution,
    trained: &[f64],
    options: PriceOptions,
) -> Result<PayoffReport> {
    opt.validate()?;
    let grid = PriceGrid::for_target(target)?;
    let factor = if options.discount {
        (-opt.rate * opt.maturity).exp()
    } else {
        1.0
    };
    let on_target = factor * expected_payoff(&target.probs, &grid, opt.strike)?;
    let on_trained = factor * expected_payoff(trained, &grid, opt.strike)?;

    let (alpha, sigma) = opt.lognormal_params();
    let kind = crate::target::DistributionKind::LogNormal { mu: alpha, sigma };
    let in_domain = kind.cdf(target.domain.hi, &target.domain) - kind.cdf(target.domain.lo, &target.domain);
    let truncation = TruncationInfo {
        tail_mass: (1.0 - in_domain).max(0.0),
        untruncated_payoff: factor * lognormal_call_expectation(alpha, sigma, opt.strike),
    };

    Ok(PayoffReport {
        expected_payoff_target: on_target,
        expected_payoff_trained: on_trained,
        gap: on_trained - on_target,
        per_bin_payoff: grid.call_payoffs(opt.strike),
        spec: *opt,
        grid,
        price_mapping: PRICE_MAPPING.to_string(),
        discount_factor: factor,
        truncation,
        reference_payoff: options.reference,
        reference_relative_gap: options.reference.map(|r| (on_target - r) / r),
    })
}

/// Solves for the expected return `mu` at which the option's binned target
/// reproduces `reference` as its undiscounted payoff. Bisection over the
/// log-location, bracketed by the first and last bin centers.
pub fn implied_drift(opt: &OptionSpec, domain: Domain, n_bins: usize, reference: f64) -> Result<f64> {
    opt.validate()?;
    let grid = PriceGrid::new(domain, n_bins)?;
    let sigma = opt.sigma_t();
    let payoff_at = |alpha: f64| -> Result<f64> {
        let mu = drift_for_alpha(opt, alpha);
        let t = bs_lognormal_target(&OptionSpec { mu: Some(mu), ..*opt }, domain, n_bins)?;
        expected_payoff(&t.probs, &grid, opt.strike)
    };
    let mut lo = grid.prices[0].ln();
    let mut hi = grid.prices[n_bins - 1].ln();
    let (f_lo, f_hi) = (payoff_at(lo)?, payoff_at(hi)?);
    if !(f_lo <= reference && reference <= f_hi) {
        return Err(invalid(format!(
            "reference {reference} outside attainable payoffs [{f_lo}, {f_hi}] (sigma = {sigma})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if payoff_at(mid)? < reference {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 {
            break;
        }
    }
    Ok(drift_for_alpha(opt, 0.5 * (lo + hi)))
}

fn drift_for_alpha(opt: &OptionSpec, alpha: f64) -> f64 {
    let sigma = opt.sigma_t();
    (alpha - opt.s0.ln()) / opt.maturity + opt.rate + sigma * sigma / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::SigmaReading;

    fn grid16() -> PriceGrid {
        PriceGrid::new(Domain::default(), 16).unwrap()
    }

    #[test]
    fn grid_is_bin_centers() {
        let g = grid16();
        assert_eq!(g.prices[0], 15.0 / 32.0);
        assert!(g.prices.windows(2).all(|w| w[1] > w[0]));
        assert!((g.prices[15] - (15.0 - 15.0 / 32.0)).abs() < 1e-12);
    }

    #[test]
    fn point_mass_payoff() {
        let g = PriceGrid::new(Domain::new(0.0, 4.0).unwrap(), 4).unwrap();
        assert_eq!(g.prices, vec![0.5, 1.5, 2.5, 3.5]);
        let g = PriceGrid::new(Domain::new(1.0, 5.0).unwrap(), 2).unwrap();
        assert_eq!(g.prices, vec![2.0, 4.0]);
        let g = PriceGrid::new(Domain::new(2.5, 3.5).unwrap(), 1).unwrap();
        assert_eq!(expected_payoff(&[1.0], &g, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn strike_above_domain_pays_nothing() {
        let p = vec![1.0 / 16.0; 16];
        assert_eq!(expected_payoff(&p, &grid16(), 15.0).unwrap(), 0.0);
        assert_eq!(expected_payoff(&p, &grid16(), 40.0).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(expected_payoff(&[0.5, 0.5], &grid16(), 1.0).is_err());
    }

    #[test]
    fn untruncated_expectation_limits() {
        assert!((lognormal_call_expectation(1.0, 0.0, 2.0) - (1f64.exp() - 2.0)).abs() < 1e-15);
        assert_eq!(lognormal_call_expectation(0.0, 0.0, 2.0), 0.0);
        let m = lognormal_call_expectation(0.3, 0.5, 0.0);
        assert!((m - (0.3f64 + 0.125).exp()).abs() < 1e-14);
    }

    fn reference_option() -> OptionSpec {
        OptionSpec {
            s0: 2.0,
            strike: 2.0,
            rate: 0.05,
            vol: 0.4,
            mu: None,
            maturity: 40.0,
            sigma_reading: SigmaReading::AsGiven,
        }
    }

    #[test]
    fn identical_distributions_have_zero_gap() {
        let opt = OptionSpec { mu: Some(0.16), ..reference_option() };
        let t = bs_lognormal_target(&opt, Domain::default(), 16).unwrap();
        let r = price_report(&opt, &t, &t.probs, PriceOptions::default()).unwrap();
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.discount_factor, 1.0);
        assert_eq!(r.per_bin_payoff[0], 0.0);
        let d = price_report(&opt, &t, &t.probs, PriceOptions { discount: true, reference: None }).unwrap();
        assert!((d.discount_factor - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn implied_drift_round_trips() {
        let opt = reference_option();
        let mu = implied_drift(&opt, Domain::default(), 16, 5.5342).unwrap();
        let t = bs_lognormal_target(&OptionSpec { mu: Some(mu), ..opt }, Domain::default(), 16).unwrap();
        let p = expected_payoff(&t.probs, &grid16(), 2.0).unwrap();
        assert!((p - 5.5342).abs() < 1e-9);
        assert!(implied_drift(&opt, Domain::default(), 16, 50.0).is_err());
    }
}
