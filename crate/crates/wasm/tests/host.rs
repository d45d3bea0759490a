use ssqw_wasm::{fit, payoff, walk, BINS};

#[test]
fn walk_is_a_distribution_inside_the_light_cone() {
    let p = walk(&[1.2, 0.1, 0.4, 0.7, -0.3, 2.2], 3).unwrap();
    assert_eq!(p.len(), BINS);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for (x, q) in p.iter().enumerate() {
        if !(5..=11).contains(&x) {
            assert!(*q < 1e-28, "bin {x} has {q}");
        }
    }
}

#[test]
fn identity_coins_drift_right() {
    // theta = 0 keeps the walker in |up>, so every step moves it one site right
    let p = walk(&[0.0; 6], 2).unwrap();
    assert!((p[10] - 1.0).abs() < 1e-12);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(walk(&[0.0; 5], 7).is_err());
    assert!(walk(&[f64::NAN; 6], 7).is_err());
    assert!(fit("cauchy", 7.5, 1.0, 1, 0).is_err());
    assert!(payoff(&[0.5, 0.5, 0.5], 1.0).is_err());
}

#[test]
fn normal_fit_is_close() {
    let f = fit("normal", 7.5, 1.875, 8, 1).unwrap();
    assert!(f.best_mse() <= 1e-3);
    assert_eq!(f.angles().len(), 6);
    assert_eq!(f.trained().len(), BINS);
    let walked = walk(&f.angles(), 7).unwrap();
    for (a, b) in walked.iter().zip(f.trained()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn payoff_of_a_point_mass() {
    let mut p = vec![0.0; BINS];
    p[10] = 1.0;
    let center = 10.5 * 15.0 / 16.0;
    assert!((payoff(&p, 2.0).unwrap() - (center - 2.0)).abs() < 1e-12);
    assert_eq!(payoff(&p, 20.0).unwrap(), 0.0);
}
