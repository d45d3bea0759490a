//! Unconstrained COBYLA-style minimizer.
//!
//! Keeps a simplex of `n + 1` evaluated points, fits the linear interpolant
//! through them and steps to the minimizer of that model inside a ball of
//! radius `rho`. The radius only shrinks, and only when a model step makes
//! poor progress while the simplex geometry is acceptable. Poorly shaped
//! simplices are repaired with geometry steps along the direction that
//! restores the smallest vertex-to-face distance.

use nalgebra::{DMatrix, DVector};

use super::{Minimizer, MinimizeOutcome, MinimizeSettings, StopReason};

/// Acceptance bounds for the simplex relative to `rho`.
const MIN_FACE_DISTANCE: f64 = 0.25;
const MAX_EDGE: f64 = 2.1;
/// Geometry step length relative to `rho`.
const GEOMETRY_STEP: f64 = 0.5;
/// Model steps achieving less than this fraction of predicted decrease count as poor.
const POOR_RATIO: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default)]
pub struct Cobyla;

struct Simplex {
    /// `vertices[0]` is always the best point seen so far.
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    fn promote_best(&mut self) {
        let best = (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        if best != 0 {
            self.vertices.swap(0, best);
            self.values.swap(0, best);
        }
    }

    /// Rows are the edge vectors `v_j − v_0`, `j = 1..=n`.
    fn edge_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, k| self.vertices[j + 1][k] - self.vertices[0][k])
    }
}

impl Minimizer for Cobyla {
    fn name(&self) -> &'static str {
        "cobyla"
    }

    fn minimize(
        &self,
        f: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        settings: &MinimizeSettings,
    ) -> MinimizeOutcome {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let done = |v: f64| settings.f_target.is_some_and(|t| v <= t);

        let mut rho = settings.rho_begin;
        let f0 = eval(x0, &mut evals);
        let mut simplex = Simplex {
            vertices: vec![x0.to_vec()],
            values: vec![f0],
        };
        let finish = |s: &Simplex, evals, stop| MinimizeOutcome {
            x: s.vertices[0].clone(),
            fx: s.values[0],
            evals,
            stop,
        };
        if done(f0) {
            return finish(&simplex, evals, StopReason::TargetReached);
        }
        for k in 0..n {
            if evals >= settings.max_evals {
                simplex.promote_best();
                return finish(&simplex, evals, StopReason::BudgetExhausted);
            }
            let mut v = x0.to_vec();
            v[k] += rho;
            let fv = eval(&v, &mut evals);
            simplex.vertices.push(v);
            simplex.values.push(fv);
            if done(fv) {
                simplex.promote_best();
                return finish(&simplex, evals, StopReason::TargetReached);
            }
        }

        let mut needs_repair = false;
        loop {
            if evals >= settings.max_evals {
                simplex.promote_best();
                return finish(&simplex, evals, StopReason::BudgetExhausted);
            }
            simplex.promote_best();
            let edges = simplex.edge_matrix();
            let Some(inv) = edges.clone().try_inverse() else {
                // degenerate simplex: rebuild around the best point
                let base = simplex.vertices[0].clone();
                for k in 0..n {
                    let mut v = base.clone();
                    v[k] += rho;
                    simplex.vertices[k + 1] = v;
                    simplex.values[k + 1] = f64::INFINITY;
                }
                for k in 0..n {
                    if evals >= settings.max_evals {
                        break;
                    }
                    simplex.values[k + 1] = eval(&simplex.vertices[k + 1], &mut evals);
                }
                continue;
            };

            // barycentric coordinate of vertex j+1 is column j of inv (as a
            // linear functional of the displacement from v_0)
            let face_dist: Vec<f64> = (0..n).map(|j| 1.0 / inv.column(j).norm()).collect();
            let edge_len: Vec<f64> = (0..n).map(|j| edges.row(j).norm()).collect();
            let acceptable = face_dist.iter().all(|&s| s >= MIN_FACE_DISTANCE * rho)
                && edge_len.iter().all(|&e| e <= MAX_EDGE * rho);

            let df = DVector::from_fn(n, |j, _| simplex.values[j + 1] - simplex.values[0]);
            let grad = &inv * df;
            let gnorm = grad.norm();

            if needs_repair || !gnorm.is_finite() || gnorm == 0.0 {
                needs_repair = false;
                if acceptable {
                    if rho <= settings.rho_end {
                        return finish(&simplex, evals, StopReason::RadiusCollapsed);
                    }
                    rho = shrink(rho, settings.rho_end);
                    continue;
                }
                // geometry step: replace the worst-shaped vertex
                let (worst_edge, max_edge) = edge_len
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, 0.0), |a, (j, e)| if e > a.1 { (j, e) } else { a });
                let j = if max_edge > MAX_EDGE * rho {
                    worst_edge
                } else {
                    face_dist
                        .iter()
                        .copied()
                        .enumerate()
                        .fold((0, f64::INFINITY), |a, (j, s)| if s < a.1 { (j, s) } else { a })
                        .0
                };
                let col = inv.column(j);
                let mut dir: Vec<f64> = col.iter().map(|c| c / col.norm()).collect();
                let slope: f64 = dir.iter().zip(grad.iter()).map(|(d, g)| d * g).sum();
                if slope.is_finite() && slope > 0.0 {
                    dir.iter_mut().for_each(|d| *d = -*d);
                }
                let trial: Vec<f64> = simplex.vertices[0]
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| x + GEOMETRY_STEP * rho * d)
                    .collect();
                let ft = eval(&trial, &mut evals);
                simplex.vertices[j + 1] = trial;
                simplex.values[j + 1] = ft;
                if done(ft) {
                    simplex.promote_best();
                    return finish(&simplex, evals, StopReason::TargetReached);
                }
                continue;
            }

            // model step to the boundary of the trust region
            let step: Vec<f64> = grad.iter().map(|g| -rho * g / gnorm).collect();
            let trial: Vec<f64> = simplex.vertices[0].iter().zip(&step).map(|(x, d)| x + d).collect();
            let ft = eval(&trial, &mut evals);
            let predicted = rho * gnorm;
            let ratio = (simplex.values[0] - ft) / predicted;

            // choose the vertex whose replacement best preserves volume,
            // favouring vertices far from the best point
            let bary = inv.transpose() * DVector::from_column_slice(&step);
            let improved = ft < simplex.values[0];
            let mut best_j = None;
            let mut best_score = 0.0;
            if improved {
                let lambda0 = 1.0 - bary.sum();
                best_score = lambda0.abs();
                best_j = Some(0);
            }
            for j in 0..n {
                let dist = edge_len[j] / (1.1 * rho);
                let score = bary[j].abs() * dist.max(1.0).powi(3);
                if score > best_score {
                    best_score = score;
                    best_j = Some(j + 1);
                }
            }
            if let Some(slot) = best_j {
                simplex.vertices[slot] = trial;
                simplex.values[slot] = ft;
            }
            if done(ft) {
                simplex.promote_best();
                return finish(&simplex, evals, StopReason::TargetReached);
            }
            if !(ratio >= POOR_RATIO) {
                needs_repair = true;
            }
        }
    }
}

fn shrink(rho: f64, rho_end: f64) -> f64 {
    let next = 0.5 * rho;
    if next <= 1.5 * rho_end {
        rho_end
    } else {
        next
    }
}
