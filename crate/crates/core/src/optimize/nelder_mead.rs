//! Nelder-Mead simplex search with dimension-adaptive coefficients
//! (Gao & Han). Fallback for [`super::cobyla::Cobyla`].

use super::{Minimizer, MinimizeOutcome, MinimizeSettings, StopReason};

#[derive(Clone, Copy, Debug, Default)]
pub struct NelderMead;

impl Minimizer for NelderMead {
    fn name(&self) -> &'static str {
        "nelder-mead"
    }

    fn minimize(
        &self,
        f: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        settings: &MinimizeSettings,
    ) -> MinimizeOutcome {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let done = |v: f64| settings.f_target.is_some_and(|t| v <= t);

        let mut pts = vec![x0.to_vec()];
        let mut vals = vec![eval(x0, &mut evals)];
        let finish = |pts: &[Vec<f64>], vals: &[f64], evals, stop| {
            let b = (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
            MinimizeOutcome { x: pts[b].clone(), fx: vals[b], evals, stop }
        };
        if done(vals[0]) {
            return finish(&pts, &vals, evals, StopReason::TargetReached);
        }
        for k in 0..n {
            if evals >= settings.max_evals {
                return finish(&pts, &vals, evals, StopReason::BudgetExhausted);
            }
            let mut v = x0.to_vec();
            v[k] += settings.rho_begin;
            vals.push(eval(&v, &mut evals));
            pts.push(v);
        }

        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            if done(vals[0]) {
                return finish(&pts, &vals, evals, StopReason::TargetReached);
            }
            let size = pts[1..]
                .iter()
                .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if size <= settings.rho_end {
                return finish(&pts, &vals, evals, StopReason::RadiusCollapsed);
            }
            if evals >= settings.max_evals {
                return finish(&pts, &vals, evals, StopReason::BudgetExhausted);
            }

            let centroid: Vec<f64> = (0..n)
                .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / nf)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < vals[0] {
                if evals >= settings.max_evals {
                    pts[n] = xr;
                    vals[n] = fr;
                    continue;
                }
                let xe = along(beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            if evals >= settings.max_evals {
                continue;
            }
            let (xc, fc) = if fr < vals[n] {
                let xc = along(gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                if evals >= settings.max_evals {
                    break;
                }
                let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + delta * (x - b)).collect();
                vals[i] = eval(&p, &mut evals);
                pts[i] = p;
            }
        }
    }
}
