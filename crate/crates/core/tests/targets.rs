mod common;

use common::*;
use proptest::prelude::*;
use ssqw_core::target::{
    analytic_histogram, daily_returns, ingest_returns, read_closes, returns_histogram, sample_histogram,
    DateWindow, DistributionKind, Domain, ReturnMapping,
};
use ssqw_core::Error;
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn analytic_normal_matches_quadrature() {
    let (mu, sigma) = (7.5, 1.875);
    let t = analytic_histogram(DistributionKind::Normal { mu, sigma }, Domain::default(), 16).unwrap();
    let q = quadrature_histogram(|x| normal_pdf(x, mu, sigma), 0.0, 15.0, 16);
    assert!(max_abs_diff(&t.probs, &q) < 1e-10);
}

#[test]
fn analytic_lognormal_matches_quadrature() {
    for (mu, sigma) in [(1.5, 0.5), (7.5f64.ln(), 0.3), (0.2, 1.2)] {
        let t = analytic_histogram(DistributionKind::LogNormal { mu, sigma }, Domain::default(), 16).unwrap();
        let q = quadrature_histogram(|x| lognormal_pdf(x, mu, sigma), 1e-12, 15.0, 16);
        assert!(max_abs_diff(&t.probs, &q) < 1e-8, "mu={mu} sigma={sigma}");
    }
}

#[test]
fn sampled_normal_matches_independent_monte_carlo() {
    let (mu, sigma, n) = (7.5, 0.5, 100_000);
    let t = sample_histogram(DistributionKind::Normal { mu, sigma }, n, Domain::default(), 16, 1).unwrap();
    let mut rng = SplitMix(99);
    let draws: Vec<f64> = (0..n).map(|_| mu + sigma * rng.gauss()).collect();
    let oracle = oracle_histogram(&draws, 0.0, 15.0, 16);
    // two independent samples: allow 5 combined standard errors per bin
    for i in 0..16 {
        let p = 0.5 * (t.probs[i] + oracle[i]);
        let se = (2.0 * p * (1.0 - p) / n as f64).sqrt();
        assert!((t.probs[i] - oracle[i]).abs() <= 5.0 * se + 1e-12, "bin {i}");
    }
    assert!(t.argmax() == 7 || t.argmax() == 8);
    for i in 0..8 {
        assert!((t.probs[i] - t.probs[15 - i]).abs() < 0.01);
    }
}

#[test]
fn tight_lognormal_concentrates_in_one_bin() {
    let tight = |mu: f64| {
        sample_histogram(DistributionKind::LogNormal { mu, sigma: 0.01 }, 10_000, Domain::default(), 16, 3)
            .unwrap()
    };
    assert_eq!(tight(7.0f64.ln()).probs[7], 1.0);
    // 7.5 is the edge between bins 7 and 8
    let t = tight(7.5f64.ln());
    assert_eq!(t.probs[7] + t.probs[8], 1.0);
    assert!(t.probs[7] > 0.4 && t.probs[8] > 0.4);
}

#[test]
fn lognormal_is_right_skewed() {
    let t = analytic_histogram(DistributionKind::LogNormal { mu: 1.5, sigma: 0.5 }, Domain::default(), 16)
        .unwrap();
    let mean_bin: f64 = t.probs.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
    assert!(mean_bin > t.argmax() as f64);
}

#[test]
fn sampling_error_shrinks_like_inverse_sqrt() {
    let kind = DistributionKind::Normal { mu: 6.0, sigma: 2.5 };
    let exact = analytic_histogram(kind, Domain::default(), 16).unwrap();
    let reps = 12;
    let mut means = Vec::new();
    for n in [4_000usize, 16_000, 64_000] {
        let errs: Vec<f64> = (0..reps)
            .map(|r| {
                let s = sample_histogram(kind, n, Domain::default(), 16, 1000 + r as u64 * 7 + n as u64).unwrap();
                max_abs_diff(&s.probs, &exact.probs)
            })
            .collect();
        let m = errs.iter().sum::<f64>() / reps as f64;
        let sd = (errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        means.push((n, m, sd / (reps as f64).sqrt()));
    }
    // quadrupling n should halve the error, within a 3 sigma band
    for w in means.windows(2) {
        let (_, m0, s0) = w[0];
        let (_, m1, s1) = w[1];
        let ratio = m1 / m0;
        let band = 3.0 * ratio * ((s0 / m0).powi(2) + (s1 / m1).powi(2)).sqrt();
        assert!((ratio - 0.5).abs() <= band, "{means:?}");
    }
}

#[test]
fn sample_converges_to_analytic() {
    let kind = DistributionKind::Normal { mu: 7.5, sigma: 1.875 };
    let exact = analytic_histogram(kind, Domain::default(), 16).unwrap();
    let s = sample_histogram(kind, 10_000_000, Domain::default(), 16, 5).unwrap();
    assert!(max_abs_diff(&s.probs, &exact.probs) < 2e-3);
}

#[test]
fn out_of_domain_target_is_unrepresentable() {
    let kind = DistributionKind::Normal { mu: 100.0, sigma: 1.0 };
    assert!(matches!(
        analytic_histogram(kind, Domain::default(), 16),
        Err(Error::UnrepresentableTarget(_))
    ));
    assert!(matches!(
        sample_histogram(kind, 10, Domain::default(), 16, 0),
        Err(Error::UnrepresentableTarget(_))
    ));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let kind = DistributionKind::LogNormal { mu: 1.5, sigma: 0.5 };
    let a = sample_histogram(kind, 5000, Domain::default(), 16, 11).unwrap();
    let b = sample_histogram(kind, 5000, Domain::default(), 16, 11).unwrap();
    let c = sample_histogram(kind, 5000, Domain::default(), 16, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.probs, c.probs);
}

#[test]
fn edge_values_follow_half_open_bins() {
    let d = Domain::default();
    let e = d.edges(16);
    for (i, &edge) in e.iter().enumerate() {
        let expect = oracle_bin(edge, 0.0, 15.0, 16);
        assert_eq!(d.bin_index(edge, &e), expect, "edge {i}");
    }
    assert_eq!(d.bin_index(15.0, &e), Some(15));
}

#[test]
fn three_row_fixture_gives_two_returns() {
    let rows = read_closes(std::fs::File::open(fixture("three_rows.csv")).unwrap(), None).unwrap();
    let r = daily_returns(&rows);
    assert_eq!(r.len(), 2);
    assert!((r[0] - 5.0).abs() < 1e-12);
    assert!((r[1] + 10.0).abs() < 1e-12);
    let t = ingest_returns(&fixture("three_rows.csv"), DateWindow::default(), Domain::default(), 16, Default::default())
        .unwrap();
    assert_eq!(t.provenance["n_returns"], 2);
    assert!((t.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn fixture_returns_match_oracle_binning() {
    let path = fixture("quotes.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    // independent parse: date,open,high,low,close,adj close,volume
    let mut rows: Vec<(String, f64)> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[4].parse().unwrap())
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let returns: Vec<f64> = rows.windows(2).map(|w| 100.0 * (w[1].1 / w[0].1 - 1.0)).collect();
    let offset = 7.0;
    let mapped: Vec<f64> = returns.iter().map(|r| r + offset).collect();
    let oracle = oracle_histogram(&mapped, 0.0, 15.0, 16);

    let t = ingest_returns(&path, DateWindow::default(), Domain::default(), 16, ReturnMapping::Offset { offset })
        .unwrap();
    assert!(max_abs_diff(&t.probs, &oracle) < 1e-12);

    let anchored = ingest_returns(&path, DateWindow::default(), Domain::default(), 16, ReturnMapping::MinAnchored)
        .unwrap();
    let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(anchored.probs[1] > 0.0);
    assert_eq!(anchored.probs[0], 0.0);
    assert!((anchored.provenance["offset"].as_f64().unwrap() - (15.0 / 16.0 - min)).abs() < 1e-12);
}

#[test]
fn window_excluding_everything_is_rejected() {
    let window = DateWindow {
        start: Some(chrono::NaiveDate::from_ymd_opt(2030, 1, 1).unwrap()),
        end: None,
    };
    let err = ingest_returns(&fixture("quotes.csv"), window, Domain::default(), 16, Default::default());
    assert!(matches!(err, Err(Error::InvalidArgument(_))));
}

#[test]
fn malformed_csv_is_a_format_error() {
    let bad = "Date,Close\n2024-01-02,abc\n";
    assert!(matches!(read_closes(bad.as_bytes(), None), Err(Error::Format(_))));
    let missing = "Day,Close\n2024-01-02,1\n";
    assert!(matches!(read_closes(missing.as_bytes(), None), Err(Error::Format(_))));
}

#[test]
fn adj_close_used_when_close_missing() {
    let csv = "Date,Adj Close\n2024-01-03,110\n2024-01-02,100\n";
    let rows = read_closes(csv.as_bytes(), None).unwrap();
    assert_eq!(rows[0].close, 100.0);
    assert!((daily_returns(&rows)[0] - 10.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn binning_agrees_with_oracle(values in prop::collection::vec(-1.0f64..16.0, 1..400), k in 0u32..6) {
        let n_bins = 1usize << k;
        let d = Domain::default();
        let e = d.edges(n_bins);
        for &v in &values {
            prop_assert_eq!(d.bin_index(v, &e), oracle_bin(v, 0.0, 15.0, n_bins));
        }
    }

    #[test]
    fn returns_histogram_is_a_distribution(returns in prop::collection::vec(-8.0f64..8.0, 1..200)) {
        let t = returns_histogram(&returns, Domain::default(), 16, ReturnMapping::MinAnchored).unwrap();
        prop_assert!((t.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.probs.iter().all(|&p| p >= 0.0));
        t.validate().unwrap();
    }

    #[test]
    fn analytic_targets_are_valid(mu in 0.5f64..14.5, sigma in 0.2f64..6.0, k in 1u32..6) {
        let n_bins = 1usize << k;
        let t = analytic_histogram(DistributionKind::Normal { mu, sigma }, Domain::default(), n_bins).unwrap();
        t.validate().unwrap();
        prop_assert_eq!(t.bin_edges.len(), n_bins + 1);
        prop_assert!((t.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
