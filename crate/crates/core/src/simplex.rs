//! Deterministic Nelder–Mead minimizer.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            diameter_tol: 1e-6,
            max_evaluations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0`. Ties between vertices keep their previous order,
/// so identical inputs always trace the same path.
pub fn minimize<F, E>(mut f: F, x0: &[f64], options: &SimplexOptions) -> Result<SimplexResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| -> Result<f64, E> {
        *count += 1;
        f(x)
    };

    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evaluations)?;
    vertices.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += options.initial_step;
        let v = eval(&x, &mut evaluations)?;
        vertices.push((x, v));
    }

    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    loop {
        vertices.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        if diameter(&vertices) < options.diameter_tol {
            converged = true;
            break;
        }
        if evaluations >= options.max_evaluations {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &vertices[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = vertices[dim].clone();
        let best_value = vertices[0].1;
        let second_worst = vertices[dim - 1].1;

        along(&centroid, &worst.0, -REFLECT, &mut trial);
        let reflected = eval(&trial, &mut evaluations)?;
        if reflected < best_value {
            let reflected_x = trial.clone();
            along(&centroid, &worst.0, -EXPAND, &mut trial);
            let expanded = eval(&trial, &mut evaluations)?;
            vertices[dim] = if expanded < reflected {
                (trial.clone(), expanded)
            } else {
                (reflected_x, reflected)
            };
            continue;
        }
        if reflected < second_worst {
            vertices[dim] = (trial.clone(), reflected);
            continue;
        }
        // contraction, outside if the reflection beat the worst vertex
        let outside = reflected < worst.1;
        let coef = if outside { -CONTRACT } else { CONTRACT };
        along(&centroid, &worst.0, coef, &mut trial);
        let contracted = eval(&trial, &mut evaluations)?;
        if contracted < if outside { reflected } else { worst.1 } {
            vertices[dim] = (trial.clone(), contracted);
            continue;
        }
        let best = vertices[0].0.clone();
        for (x, v) in vertices.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *v = eval(x, &mut evaluations)?;
        }
    }

    let (x, value) = vertices.swap_remove(0);
    Ok(SimplexResult {
        x,
        value,
        evaluations,
        converged,
    })
}

/// `out = c + t (w − c)`
fn along(c: &[f64], w: &[f64], t: f64, out: &mut [f64]) {
    for ((o, ci), wi) in out.iter_mut().zip(c).zip(w) {
        *o = ci + t * (wi - ci);
    }
}

fn diameter(vertices: &[(Vec<f64>, f64)]) -> f64 {
    let best = &vertices[0].0;
    vertices[1..]
        .iter()
        .map(|(x, _)| {
            x.iter()
                .zip(best)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;

    #[test]
    fn finds_rosenbrock_minimum() {
        let f = |x: &[f64]| -> Result<f64, Infallible> {
            Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2))
        };
        let opts = SimplexOptions {
            diameter_tol: 1e-9,
            ..Default::default()
        };
        let r = minimize(f, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn deterministic_path() {
        let f = |x: &[f64]| -> Result<f64, Infallible> { Ok(x.iter().map(|v| (v - 0.3).powi(2)).sum()) };
        let opts = SimplexOptions::default();
        let a = minimize(f, &[0.0; 4], &opts).unwrap();
        let b = minimize(f, &[0.0; 4], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn propagates_errors() {
        let f = |_: &[f64]| -> Result<f64, &'static str> { Err("boom") };
        assert_eq!(minimize(f, &[0.0], &SimplexOptions::default()), Err("boom"));
    }
}
