//! Small weighted least-squares fits.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LstsqFit {
    pub coef: Vec<f64>,
    /// `y_i − Σ_c coef_c x_ic`, unweighted.
    pub residuals: Vec<f64>,
}

impl LstsqFit {
    /// `√(Σ w_i r_i²)`.
    pub fn weighted_norm(&self, weights: &[f64]) -> f64 {
        self.residuals.iter().zip(weights).map(|(r, w)| w * r * r).sum::<f64>().sqrt()
    }
}

/// Minimizes `Σ w_i (y_i − row_i·c)²`; unit weights when `weights` is `None`.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64], weights: Option<&[f64]>) -> Result<LstsqFit> {
    let m = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if m != y.len() || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Validation("ragged least-squares design".into()));
    }
    if m < p || p == 0 {
        return Err(Error::Validation(format!("{m} observations cannot fit {p} coefficients")));
    }
    let sw: Vec<f64> = (0..m).map(|i| weights.map_or(1.0, |w| w[i].sqrt())).collect();
    let a = Mat::from_fn(m, p, |i, j| sw[i] * rows[i][j]);
    let b = Mat::from_fn(m, 1, |i, _| sw[i] * y[i]);
    let x = a.col_piv_qr().solve_lstsq(&b);
    let coef: Vec<f64> = (0..p).map(|j| x[(j, 0)]).collect();
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("singular least-squares design".into()));
    }
    let residuals = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| yi - r.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>())
        .collect();
    Ok(LstsqFit { coef, residuals })
}

/// Straight line `y ≈ slope·x + intercept`; returns `(slope, intercept)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![xi, 1.0]).collect();
    let fit = least_squares(&rows, y, None)?;
    Ok((fit.coef[0], fit.coef[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c) = line_fit(&x, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_pull_the_fit() {
        let rows = vec![vec![1.0], vec![1.0]];
        let fit = least_squares(&rows, &[0.0, 1.0], Some(&[1.0, 3.0])).unwrap();
        assert!((fit.coef[0] - 0.75).abs() < 1e-12);
        assert!(least_squares(&rows[..1], &[0.0], None).is_ok());
        assert!(least_squares(&[vec![1.0, 2.0]], &[0.0], None).is_err());
    }
}
