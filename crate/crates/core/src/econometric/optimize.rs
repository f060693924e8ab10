//! Derivative-free Nelder-Mead minimization over box-transformed parameters.
//!
//! Each coordinate is mapped to an unconstrained value before the simplex
//! search: `ln` for positive parameters and `logit` for parameters (or sums
//! of parameters) confined to `(0, 1)`. The search uses the dimension-adaptive
//! coefficients of Gao and Han. It draws no random numbers, so identical
//! inputs give bitwise-identical results.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Free,
    Positive,
    Unit,
}

impl Bound {
    pub fn to_unconstrained(self, v: f64) -> f64 {
        match self {
            Bound::Free => v,
            Bound::Positive => v.ln(),
            Bound::Unit => (v / (1.0 - v)).ln(),
        }
    }

    pub fn to_constrained(self, u: f64) -> f64 {
        match self {
            Bound::Free => u,
            Bound::Positive => u.exp(),
            Bound::Unit => {
                let v = if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                };
                // stay strictly inside (0, 1) when the logistic saturates
                v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizeOptions {
    pub max_evaluations: usize,
    /// Convergence threshold on the simplex diameter in unconstrained space.
    pub tolerance: f64,
    /// Edge length of the starting simplex in unconstrained space.
    pub initial_step: f64,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { max_evaluations: 10_000, tolerance: 1e-10, initial_step: 0.1, restarts: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    /// Minimizer in the original (constrained) coordinates.
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    bounds: Vec<Bound>,
    evaluations: usize,
    scratch: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        for ((s, b), ui) in self.scratch.iter_mut().zip(&self.bounds).zip(u) {
            *s = b.to_constrained(*ui);
        }
        let v = (self.f)(&self.scratch);
        if v.is_finite() { v } else { f64::INFINITY }
    }
}

/// Minimizes `objective` starting from `initial` (constrained coordinates).
pub fn minimize<F>(objective: F, initial: &[f64], bounds: &[Bound], options: OptimizeOptions) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = initial.len();
    if dim == 0 || bounds.len() != dim {
        return Err(Error::Shape(format!("{} initial values but {} bounds", dim, bounds.len())));
    }
    let x0: Vec<f64> = initial.iter().zip(bounds).map(|(v, b)| b.to_unconstrained(*v)).collect();
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial point lies outside the parameter bounds"));
    }
    let mut f = Counted { f: objective, bounds: bounds.to_vec(), evaluations: 0, scratch: vec![0.0; dim] };
    let f0 = f.eval(&x0);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective);
    }

    let n = dim as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n);

    let mut best = x0;
    let mut best_value = f0;
    let mut iterations = 0;
    let mut converged = false;
    let mut restarts_left = options.restarts;

    'outer: loop {
        let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
        let mut values = vec![best_value];
        for i in 0..dim {
            let mut v = best.clone();
            v[i] += options.initial_step;
            values.push(f.eval(&v));
            simplex.push(v);
        }
        let mut order: Vec<usize> = (0..=dim).collect();
        let mut centroid = vec![0.0; dim];
        let mut trial = vec![0.0; dim];
        let mut trial2 = vec![0.0; dim];

        let round_converged = loop {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let lo = order[0];
            let hi = order[dim];
            let second = order[dim - 1];

            let diameter = simplex
                .iter()
                .map(|v| v.iter().zip(&simplex[lo]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if diameter < options.tolerance {
                break true;
            }
            if f.evaluations >= options.max_evaluations {
                break false;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in &order[..dim] {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += v;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= n);

            for j in 0..dim {
                trial[j] = centroid[j] + alpha * (centroid[j] - simplex[hi][j]);
            }
            let fr = f.eval(&trial);

            if fr < values[lo] {
                for j in 0..dim {
                    trial2[j] = centroid[j] + beta * (trial[j] - centroid[j]);
                }
                let fe = f.eval(&trial2);
                if fe < fr {
                    simplex[hi].copy_from_slice(&trial2);
                    values[hi] = fe;
                } else {
                    simplex[hi].copy_from_slice(&trial);
                    values[hi] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[hi].copy_from_slice(&trial);
                values[hi] = fr;
                continue;
            }
            // contraction: outside if the reflection beat the worst vertex
            let outside = fr < values[hi];
            for j in 0..dim {
                trial2[j] = if outside {
                    centroid[j] + gamma * (trial[j] - centroid[j])
                } else {
                    centroid[j] - gamma * (centroid[j] - simplex[hi][j])
                };
            }
            let fc = f.eval(&trial2);
            if (outside && fc <= fr) || (!outside && fc < values[hi]) {
                simplex[hi].copy_from_slice(&trial2);
                values[hi] = fc;
                continue;
            }
            for &i in &order[1..] {
                for j in 0..dim {
                    simplex[i][j] = simplex[lo][j] + delta * (simplex[i][j] - simplex[lo][j]);
                }
                values[i] = f.eval(&simplex[i]);
            }
        };

        let lo = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("non-empty simplex");
        let improved = values[lo] < best_value - 1e-12 * (1.0 + best_value.abs());
        if values[lo] <= best_value {
            best_value = values[lo];
            best = simplex[lo].clone();
        }
        if !round_converged {
            break 'outer;
        }
        converged = true;
        if restarts_left == 0 || f.evaluations >= options.max_evaluations {
            break 'outer;
        }
        if !improved && restarts_left < options.restarts {
            break 'outer;
        }
        restarts_left -= 1;
        converged = false;
    }

    let point = best.iter().zip(bounds).map(|(u, b)| b.to_constrained(*u)).collect();
    Ok(OptimizeResult { point, value: best_value, evaluations: f.evaluations, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let r = minimize(|x| (x[0] - 3.0).powi(2), &[0.0], &[Bound::Free], OptimizeOptions::default()).unwrap();
        assert!((r.point[0] - 3.0).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.0, 1.0], &[Bound::Free, Bound::Free], OptimizeOptions::default()).unwrap();
        assert!(r.value < 1e-6);
        assert!((r.point[0] - 1.0).abs() < 1e-3 && (r.point[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nan_at_start_is_an_error() {
        let r = minimize(|_| f64::NAN, &[1.0], &[Bound::Free], OptimizeOptions::default());
        assert!(matches!(r, Err(Error::NonFiniteObjective)));
    }

    #[test]
    fn bounded_coordinates_stay_inside() {
        // unconstrained optimum at -2 and 1.5; bounded optimum hugs the boundary
        let r = minimize(
            |x| (x[0] + 2.0).powi(2) + (x[1] - 1.5).powi(2),
            &[1.0, 0.5],
            &[Bound::Positive, Bound::Unit],
            OptimizeOptions { max_evaluations: 2_000, ..Default::default() },
        )
        .unwrap();
        assert!(r.point[0] > 0.0 && r.point[1] > 0.0 && r.point[1] < 1.0);
        assert!(r.point[0] < 1e-3 && r.point[1] > 0.999);
    }

    #[test]
    fn evaluation_budget_is_respected() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = OptimizeOptions { max_evaluations: 30, ..Default::default() };
        let r = minimize(f, &[-1.0, 1.0], &[Bound::Free, Bound::Free], opts).unwrap();
        assert!(!r.converged);
        assert!(r.evaluations <= 30 + 3);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) * (1.0 + x[1] * x[1]) + (x[1] - 2.0).powi(4);
        let a = minimize(f, &[0.5, 0.5], &[Bound::Unit, Bound::Free], OptimizeOptions::default()).unwrap();
        let b = minimize(f, &[0.5, 0.5], &[Bound::Unit, Bound::Free], OptimizeOptions::default()).unwrap();
        assert_eq!(a.point[0].to_bits(), b.point[0].to_bits());
        assert_eq!(a.point[1].to_bits(), b.point[1].to_bits());
    }
}
