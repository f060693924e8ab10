#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvcast_core::neural::{backprop, batch_loss, make_windows, Architecture, CellKind, RecurrentModel, WindowedDataset};

/// Worst relative error between analytic and central-difference gradients
/// over every parameter; components below 1e-10 are compared absolutely.
pub struct GradCheck {
    pub worst_relative: f64,
    pub worst_absolute_small: f64,
    pub parameters: usize,
}

impl GradCheck {
    pub fn passes(&self) -> bool {
        self.worst_relative < 1e-4 && self.worst_absolute_small < 1e-8
    }
}

pub fn grad_check_model(kind: CellKind, seed: u64) -> (RecurrentModel, WindowedDataset) {
    let mut arch = Architecture::default_for(kind, 2);
    arch.hidden_units = 4;
    arch.dropout_rate = 0.0;
    let model = RecurrentModel::init(arch, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let series: Vec<f64> = (0..12 + 2 + 7).map(|_| rng.random::<f64>()).collect();
    let data = make_windows(&series, 12, 2).unwrap();
    assert_eq!(data.samples(), 8);
    (model, data)
}

pub fn finite_difference_check(model: &RecurrentModel, data: &WindowedDataset, step: f64) -> GradCheck {
    let idx: Vec<usize> = (0..data.samples()).collect();
    let analytic = backprop(model, data, &idx).unwrap().values;
    let mut probe = model.clone();
    let mut worst_relative = 0.0f64;
    let mut worst_absolute_small = 0.0f64;
    for (i, a) in analytic.iter().enumerate() {
        let base = probe.params()[i];
        probe.params_mut()[i] = base + step;
        let up = batch_loss(&probe, data, &idx).unwrap();
        probe.params_mut()[i] = base - step;
        let down = batch_loss(&probe, data, &idx).unwrap();
        probe.params_mut()[i] = base;
        let numeric = (up - down) / (2.0 * step);
        let scale = a.abs().max(numeric.abs());
        if scale < 1e-10 {
            worst_absolute_small = worst_absolute_small.max((a - numeric).abs());
        } else {
            worst_relative = worst_relative.max((a - numeric).abs() / scale);
        }
    }
    GradCheck { worst_relative, worst_absolute_small, parameters: analytic.len() }
}

/// HAR process with additive Gaussian noise whose standard deviation is 10%
/// of the unconditional mean (1e-4), started at that mean.
pub fn synthetic_har_rv(n: usize, seed: u64) -> Vec<f64> {
    use rvcast_core::econometric::{har_simulate, HarParams};
    let truth = HarParams::new(1e-5, 0.35, 0.35, 0.2);
    let mean = 1e-4;
    let warmup = 22;
    let path = har_simulate(&truth, &vec![mean; warmup], n, 0.1 * mean, seed).unwrap();
    path[warmup..].to_vec()
}

/// Solves `(X'X) b = X'y` by Gauss-Jordan elimination with partial pivoting;
/// returns `b` and `(X'X)^-1`. `x` is row-major `n × k`.
pub fn normal_equations(x: &[f64], n: usize, k: usize, y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = vec![vec![0.0; 2 * k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = (0..n).map(|t| x[t * k + i] * x[t * k + j]).sum();
        }
        a[i][k + i] = 1.0;
        a[i][2 * k] = (0..n).map(|t| x[t * k + i] * y[t]).sum();
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|p, q| a[*p][col].abs().total_cmp(&a[*q][col].abs())).unwrap();
        a.swap(col, pivot);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for j in 0..=2 * k {
                        a[row][j] -= f * a[col][j];
                    }
                }
            }
        }
    }
    let beta = a.iter().map(|r| r[2 * k]).collect();
    let inv = a.iter().map(|r| r[k..2 * k].to_vec()).collect();
    (beta, inv)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(got.abs())
    }
}
