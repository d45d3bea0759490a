//! Target histograms over `2^N` uniform bins.
//!
//! Bins are left-closed and right-open, `[edge_i, edge_{i+1})`, except the
//! last one which also contains `hi`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Uniform};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};

/// Name of the sampling generator, recorded in provenance.
pub const RNG_NAME: &str = "ChaCha8Rng/seed_from_u64";

/// Sampling gives up when the domain holds less probability than this.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

/// Analytic histograms need at least this much in-domain mass.
pub const MIN_ANALYTIC_MASS: f64 = 1e-12;

/// Free-form, ordered metadata attached to every produced artifact.
pub type Provenance = BTreeMap<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("domain needs finite lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn bin_width(&self, n_bins: usize) -> f64 {
        self.width() / n_bins as f64
    }

    /// `n_bins + 1` uniform edges; the last edge is exactly `hi`.
    pub fn edges(&self, n_bins: usize) -> Vec<f64> {
        let mut e: Vec<f64> = (0..=n_bins)
            .map(|i| self.lo + self.width() * (i as f64 / n_bins as f64))
            .collect();
        e[n_bins] = self.hi;
        e
    }

    pub fn bin_centers(&self, n_bins: usize) -> Vec<f64> {
        let w = self.bin_width(n_bins);
        (0..n_bins).map(|i| self.lo + (i as f64 + 0.5) * w).collect()
    }

    /// Bin of `value` against `edges` (as produced by [`Domain::edges`]).
    /// `None` outside `[lo, hi]`.
    pub fn bin_index(&self, value: f64, edges: &[f64]) -> Option<usize> {
        let n = edges.len() - 1;
        if !(value >= self.lo && value <= self.hi) {
            return None;
        }
        let guess = ((value - self.lo) / self.width() * n as f64).floor();
        let mut i = (guess.max(0.0) as usize).min(n - 1);
        // floating-point guess may be off by one near an edge
        while i > 0 && value < edges[i] {
            i -= 1;
        }
        while i + 1 < n && value >= edges[i + 1] {
            i += 1;
        }
        Some(i)
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self { lo: 0.0, hi: 15.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionKind {
    Normal { mu: f64, sigma: f64 },
    /// `ln X ~ Normal(mu, sigma)`.
    LogNormal { mu: f64, sigma: f64 },
    /// Uniform over the histogram domain.
    Uniform,
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `Φ(b) − Φ(a)` for `a ≤ b`, evaluated on the tail that keeps precision.
fn std_normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (libm::erfc(a / SQRT_2) - libm::erfc(b / SQRT_2))
    } else {
        std_normal_cdf(b) - std_normal_cdf(a)
    }
}

impl DistributionKind {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { mu, sigma } | Self::LogNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) {
                    return Err(invalid(format!(
                        "distribution needs finite mu and sigma >= 0, got mu={mu}, sigma={sigma}"
                    )));
                }
                Ok(())
            }
            Self::Uniform => Ok(()),
        }
    }

    /// Standardized coordinate of `x`, `None` for the uniform kind.
    fn z(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Normal { mu, sigma } => Some((x - mu) / sigma),
            Self::LogNormal { mu, sigma } => Some(if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (x.ln() - mu) / sigma
            }),
            Self::Uniform => None,
        }
    }

    /// Probability of `[a, b)`. Point masses (`sigma == 0`) sit at `e^mu`
    /// for the log-normal and `mu` for the normal.
    fn mass(&self, a: f64, b: f64, domain: &Domain) -> f64 {
        match *self {
            Self::Normal { mu, sigma: s } | Self::LogNormal { mu, sigma: s } if s == 0.0 => {
                let at = if matches!(self, Self::Normal { .. }) { mu } else { mu.exp() };
                f64::from(at >= a && at < b)
            }
            Self::Uniform => ((b.min(domain.hi) - a.max(domain.lo)) / domain.width()).max(0.0),
            _ => std_normal_mass(self.z(a).unwrap(), self.z(b).unwrap()),
        }
    }

    pub fn cdf(&self, x: f64, domain: &Domain) -> f64 {
        self.mass(f64::NEG_INFINITY, x, domain)
    }

    fn describe(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    pub probs: Vec<f64>,
    pub domain: Domain,
    pub bin_edges: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

fn check_bins(n_bins: usize) -> Result<()> {
    if n_bins < 2 || !n_bins.is_power_of_two() {
        return Err(invalid(format!("bin count must be a power of two >= 2, got {n_bins}")));
    }
    Ok(())
}

impl TargetDistribution {
    /// Normalizes `weights` into a histogram over `domain`.
    pub fn from_weights(weights: Vec<f64>, domain: Domain, provenance: Provenance) -> Result<Self> {
        check_bins(weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("histogram weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::UnrepresentableTarget("histogram has zero total weight".into()));
        }
        let n = weights.len();
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
            domain,
            bin_edges: domain.edges(n),
            provenance,
        })
    }

    /// Checks the type invariants on a deserialized value.
    pub fn validate(&self) -> Result<()> {
        check_bins(self.probs.len())?;
        Domain::new(self.domain.lo, self.domain.hi)?;
        if self.bin_edges.len() != self.probs.len() + 1 {
            return Err(invalid("bin_edges must have n_bins + 1 entries"));
        }
        if self.probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        let w = self.domain.bin_width(self.probs.len());
        if self.bin_edges.windows(2).any(|e| ((e[1] - e[0]) - w).abs() > 1e-12 * w.max(1.0)) {
            return Err(invalid("bin edges are not uniform"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.probs.len()
    }

    /// Position-register size `N` with `2^N` bins.
    pub fn num_position_qubits(&self) -> u32 {
        self.probs.len().trailing_zeros()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.domain.bin_centers(self.n_bins())
    }

    pub fn mean(&self) -> f64 {
        self.bin_centers().iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var: f64 = self
            .bin_centers()
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * (x - m).powi(2))
            .sum();
        var.sqrt()
    }

    /// First bin with the largest probability.
    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }
}

/// Draws `n_samples` values from `kind`, rejecting (and redrawing) anything
/// outside the open interval `(lo, hi)`, then bins and normalizes.
pub fn sample_histogram(
    kind: DistributionKind,
    n_samples: usize,
    domain: Domain,
    n_bins: usize,
    seed: u64,
) -> Result<TargetDistribution> {
    check_bins(n_bins)?;
    kind.validate()?;
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    if let DistributionKind::Normal { sigma, .. } | DistributionKind::LogNormal { sigma, .. } = kind {
        if sigma <= 0.0 {
            return Err(invalid("sampling needs sigma > 0"));
        }
    }
    let in_domain = kind.mass(domain.lo, domain.hi, &domain);
    if in_domain < MIN_ACCEPTANCE_RATE {
        return Err(Error::UnrepresentableTarget(format!(
            "domain ({}, {}) holds {in_domain:e} of the mass",
            domain.lo, domain.hi
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: Box<dyn FnMut(&mut ChaCha8Rng) -> f64> = match kind {
        DistributionKind::Normal { mu, sigma } => {
            let d = Normal::new(mu, sigma).map_err(|e| invalid(e.to_string()))?;
            Box::new(move |r| d.sample(r))
        }
        DistributionKind::LogNormal { mu, sigma } => {
            let d = LogNormal::new(mu, sigma).map_err(|e| invalid(e.to_string()))?;
            Box::new(move |r| d.sample(r))
        }
        DistributionKind::Uniform => {
            let d = Uniform::new(domain.lo, domain.hi).map_err(|e| invalid(e.to_string()))?;
            Box::new(move |r| d.sample(r))
        }
    };
    let mut draw = draw;

    let edges = domain.edges(n_bins);
    let mut counts = vec![0u64; n_bins];
    let max_draws = (n_samples as f64 / MIN_ACCEPTANCE_RATE).ceil() as u64;
    let (mut accepted, mut draws) = (0usize, 0u64);
    while accepted < n_samples {
        if draws >= max_draws {
            return Err(Error::UnrepresentableTarget(format!(
                "acceptance rate below {MIN_ACCEPTANCE_RATE:e}"
            )));
        }
        draws += 1;
        let v = draw(&mut rng);
        if v > domain.lo && v < domain.hi {
            let i = domain.bin_index(v, &edges).expect("value inside domain");
            counts[i] += 1;
            accepted += 1;
        }
    }

    let mut prov = Provenance::new();
    prov.insert("method".into(), json!("sampled"));
    prov.insert("distribution".into(), kind.describe());
    prov.insert("n_samples".into(), json!(n_samples));
    prov.insert("draws".into(), json!(draws));
    prov.insert("seed".into(), json!(seed));
    prov.insert("rng".into(), json!(RNG_NAME));
    prov.insert("truncation".into(), json!("resample-on-reject"));
    TargetDistribution::from_weights(counts.into_iter().map(|c| c as f64).collect(), domain, prov)
}

/// Exact bin masses `CDF(edge_{i+1}) − CDF(edge_i)`, renormalized over the domain.
pub fn analytic_histogram(
    kind: DistributionKind,
    domain: Domain,
    n_bins: usize,
) -> Result<TargetDistribution> {
    check_bins(n_bins)?;
    kind.validate()?;
    let edges = domain.edges(n_bins);
    let mut masses: Vec<f64> = edges.windows(2).map(|e| kind.mass(e[0], e[1], &domain)).collect();
    // the closed right end of the last bin
    if let DistributionKind::Normal { mu: at, sigma } | DistributionKind::LogNormal { mu: at, sigma } =
        kind
    {
        let point = if matches!(kind, DistributionKind::Normal { .. }) { at } else { at.exp() };
        if sigma == 0.0 && point == domain.hi {
            masses[n_bins - 1] = 1.0;
        }
    }
    let total: f64 = masses.iter().sum();
    if !(total >= MIN_ANALYTIC_MASS) {
        return Err(Error::UnrepresentableTarget(format!(
            "domain ({}, {}) holds {total:e} of the mass",
            domain.lo, domain.hi
        )));
    }
    let mut prov = Provenance::new();
    prov.insert("method".into(), json!("analytic"));
    prov.insert("distribution".into(), kind.describe());
    prov.insert("in_domain_mass".into(), json!(total));
    TargetDistribution::from_weights(masses, domain, prov)
}

/// How the option's volatility figure becomes the log-normal's `sigma`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaReading {
    /// The supplied volatility already is the log-price standard deviation.
    #[default]
    AsGiven,
    /// `sigma = vol * sqrt(T)`.
    VolSqrtT,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    pub vol: f64,
    /// Expected return; `None` means risk-neutral drift (`mu = rate`).
    pub mu: Option<f64>,
    pub maturity: f64,
    #[serde(default)]
    pub sigma_reading: SigmaReading,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.s0, self.strike, self.rate, self.vol, self.maturity]
            .iter()
            .chain(self.mu.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("option parameters must be finite"));
        }
        if self.s0 <= 0.0 || self.strike < 0.0 || self.maturity <= 0.0 || self.vol < 0.0 {
            return Err(invalid(
                "option needs s0 > 0, strike >= 0, maturity > 0 and vol >= 0",
            ));
        }
        Ok(())
    }

    pub fn drift(&self) -> f64 {
        self.mu.unwrap_or(self.rate)
    }

    pub fn sigma_t(&self) -> f64 {
        match self.sigma_reading {
            SigmaReading::AsGiven => self.vol,
            SigmaReading::VolSqrtT => self.vol * self.maturity.sqrt(),
        }
    }

    /// `(alpha, sigma)` of the maturity-price log-normal:
    /// `alpha = ln s0 + (mu − r − sigma²/2)·T`.
    pub fn lognormal_params(&self) -> (f64, f64) {
        let sigma = self.sigma_t();
        let alpha = self.s0.ln() + (self.drift() - self.rate - sigma * sigma / 2.0) * self.maturity;
        (alpha, sigma)
    }
}

pub fn bs_lognormal_target(opt: &OptionSpec, domain: Domain, n_bins: usize) -> Result<TargetDistribution> {
    opt.validate()?;
    let (alpha, sigma) = opt.lognormal_params();
    let mut t = analytic_histogram(DistributionKind::LogNormal { mu: alpha, sigma }, domain, n_bins)?;
    t.provenance.insert("method".into(), json!("black-scholes-lognormal"));
    t.provenance.insert("option".into(), serde_json::to_value(opt).unwrap_or(Value::Null));
    t.provenance.insert("alpha".into(), json!(alpha));
    t.provenance.insert("sigma".into(), json!(sigma));
    t.provenance.insert("drift".into(), json!(opt.drift()));
    t.provenance.insert("drift_assumed_risk_neutral".into(), json!(opt.mu.is_none()));
    Ok(t)
}

/// Inclusive date filter for price series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl DateWindow {
    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start.is_none_or(|s| d >= s) && self.end.is_none_or(|e| d <= e)
    }
}

/// Affine map from percent returns into the histogram domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReturnMapping {
    /// Shift so the smallest return lands one bin width above `lo`.
    #[default]
    MinAnchored,
    Offset { offset: f64 },
}

impl ReturnMapping {
    pub fn offset(&self, returns: &[f64], domain: &Domain, n_bins: usize) -> f64 {
        match *self {
            Self::MinAnchored => {
                let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
                domain.lo + domain.bin_width(n_bins) - min
            }
            Self::Offset { offset } => offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: f64,
}

/// Reads `Date` plus a close column (`close_column`, else `Close`, else
/// `Adj Close`) from a daily-quote CSV. Rows come back sorted by date.
pub fn read_closes<R: Read>(reader: R, close_column: Option<&str>) -> Result<Vec<PriceRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_col = find("Date").ok_or_else(|| Error::Format("missing Date column".into()))?;
    let close_col = match close_column {
        Some(c) => find(c).ok_or_else(|| Error::Format(format!("missing {c} column")))?,
        None => find("Close")
            .or_else(|| find("Adj Close"))
            .ok_or_else(|| Error::Format("missing Close / Adj Close column".into()))?,
    };

    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d").map_err(|e| {
            Error::Format(format!("row {}: bad date {:?}: {e}", line + 2, field(date_col)))
        })?;
        let close: f64 = field(close_col).parse().map_err(|_| {
            Error::Format(format!("row {}: bad close {:?}", line + 2, field(close_col)))
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::Format(format!("row {}: close must be positive", line + 2)));
        }
        rows.push(PriceRow { date, close });
    }
    rows.sort_by_key(|r| r.date);
    Ok(rows)
}

/// Percent day-over-day returns `100·(c_t − c_{t−1}) / c_{t−1}`.
pub fn daily_returns(rows: &[PriceRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| (w[1].close - w[0].close) / w[0].close * 100.0)
        .collect()
}

/// Maps returns into `domain`, drops what falls outside, bins and normalizes.
pub fn returns_histogram(
    returns: &[f64],
    domain: Domain,
    n_bins: usize,
    mapping: ReturnMapping,
) -> Result<TargetDistribution> {
    check_bins(n_bins)?;
    if returns.is_empty() {
        return Err(invalid("no returns to bin"));
    }
    let offset = mapping.offset(returns, &domain, n_bins);
    let edges = domain.edges(n_bins);
    let mut counts = vec![0.0; n_bins];
    let mut dropped = 0usize;
    for r in returns {
        match domain.bin_index(r + offset, &edges) {
            Some(i) => counts[i] += 1.0,
            None => dropped += 1,
        }
    }
    if dropped == returns.len() {
        return Err(Error::UnrepresentableTarget(
            "every mapped return falls outside the domain".into(),
        ));
    }
    let mut prov = Provenance::new();
    prov.insert("method".into(), json!("daily-returns"));
    prov.insert("mapping".into(), serde_json::to_value(mapping).unwrap_or(Value::Null));
    prov.insert("offset".into(), json!(offset));
    prov.insert("n_returns".into(), json!(returns.len()));
    prov.insert("n_truncated".into(), json!(dropped));
    TargetDistribution::from_weights(counts, domain, prov)
}

pub fn ingest_returns(
    csv_path: &Path,
    window: DateWindow,
    domain: Domain,
    n_bins: usize,
    mapping: ReturnMapping,
) -> Result<TargetDistribution> {
    let file = std::fs::File::open(csv_path)?;
    let rows: Vec<PriceRow> = read_closes(file, None)?
        .into_iter()
        .filter(|r| window.contains(r.date))
        .collect();
    if rows.len() < 2 {
        return Err(invalid(format!(
            "window holds {} price rows, need at least 2",
            rows.len()
        )));
    }
    let mut t = returns_histogram(&daily_returns(&rows), domain, n_bins, mapping)?;
    t.provenance.insert("source".into(), json!(csv_path.display().to_string()));
    t.provenance.insert("window".into(), serde_json::to_value(window).unwrap_or(Value::Null));
    t.provenance.insert("first_date".into(), json!(rows[0].date.to_string()));
    t.provenance.insert("last_date".into(), json!(rows[rows.len() - 1].date.to_string()));
    Ok(t)
}
