//! Dense least squares via Householder QR.

use crate::error::{Error, Result};

/// Column j is declared dependent when its residual norm after projecting out
/// the preceding columns falls below this fraction of its original norm.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// Diagonal of (X'X)^-1.
    pub xtx_inv_diag: Vec<f64>,
}

impl OlsFit {
    /// Centered R² of the response `y` the fit was computed from.
    pub fn r_squared(&self, y: &[f64]) -> f64 {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        if sst == 0.0 {
            return 0.0;
        }
        1.0 - self.ssr / sst
    }

    /// Classical standard error of coefficient `j` with `n - k` degrees of freedom.
    pub fn std_error(&self, j: usize) -> f64 {
        let n = self.residuals.len();
        let k = self.coefficients.len();
        let s2 = self.ssr / (n - k) as f64;
        (s2 * self.xtx_inv_diag[j]).sqrt()
    }
}

/// Ordinary least squares of `y` on the columns of `x` (row-major, `n × k`).
pub fn ols(x: &[f64], n: usize, k: usize, y: &[f64]) -> Result<OlsFit> {
    if x.len() != n * k || y.len() != n {
        return Err(Error::Shape(format!("design {}x{} does not match {} values", n, k, y.len())));
    }
    if n < k {
        return Err(Error::InsufficientData { needed: k, got: n });
    }

    // column-major working copy
    let mut a = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            a[j * n + i] = x[i * k + j];
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| a[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut qty = y.to_vec();
    let mut r = vec![0.0; k * k];

    for j in 0..k {
        let col = &mut a[j * n..(j + 1) * n];
        let tail_norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norms[j] == 0.0 || tail_norm <= RANK_TOL * norms[j] {
            return Err(Error::RankDeficient { column: j });
        }
        let alpha = if col[j] > 0.0 { -tail_norm } else { tail_norm };
        // v = x - alpha e1, stored in place
        col[j] -= alpha;
        let vnorm2: f64 = col[j..].iter().map(|v| v * v).sum();
        let v: Vec<f64> = col[j..].to_vec();
        r[j * k + j] = alpha;

        for c in (j + 1)..k {
            let other = &mut a[c * n..(c + 1) * n];
            let dot: f64 = v.iter().zip(&other[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (o, vi) in other[j..].iter_mut().zip(&v) {
                *o -= f * vi;
            }
            r[j * k + c] = other[j];
        }
        let dot: f64 = v.iter().zip(&qty[j..]).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vnorm2;
        for (o, vi) in qty[j..].iter_mut().zip(&v) {
            *o -= f * vi;
        }
    }

    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in (j + 1)..k {
            s -= r[j * k + c] * beta[c];
        }
        beta[j] = s / r[j * k + j];
    }

    // R^-1 by back substitution, then diag((X'X)^-1) = row norms of R^-1.
    let mut rinv = vec![0.0; k * k];
    for col in 0..k {
        for j in (0..=col).rev() {
            let mut s = if j == col { 1.0 } else { 0.0 };
            for c in (j + 1)..=col {
                s -= r[j * k + c] * rinv[c * k + col];
            }
            rinv[j * k + col] = s / r[j * k + j];
        }
    }
    let xtx_inv_diag = (0..k).map(|j| rinv[j * k..(j + 1) * k].iter().map(|v| v * v).sum()).collect();

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - x[i * k..(i + 1) * k].iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let ssr = residuals.iter().map(|e| e * e).sum();
    Ok(OlsFit { coefficients: beta, residuals, ssr, xtx_inv_diag })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = ols(&x, 4, 2, &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-24);
        assert!((fit.r_squared(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xtx_inverse_diagonal() {
        // X'X = [[4, 6], [6, 14]] -> inverse diag = [14/20, 4/20]
        let x = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let fit = ols(&x, 4, 2, &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((fit.xtx_inv_diag[0] - 0.7).abs() < 1e-12);
        assert!((fit.xtx_inv_diag[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_are_rejected() {
        let x = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert!(matches!(ols(&x, 3, 2, &[1.0, 2.0, 3.0]), Err(Error::RankDeficient { column: 1 })));
        let zero = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert!(matches!(ols(&zero, 3, 2, &[1.0, 2.0, 3.0]), Err(Error::RankDeficient { .. })));
    }
}
