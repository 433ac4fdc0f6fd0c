//! Small least-squares polynomial fits.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients in ascending order of power, in the original x variable
    /// shifted by `x0`: y ≈ Σ cₖ (x − x0)ᵏ.
    pub coeffs: Vec<f64>,
    pub x0: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Largest absolute residual.
    pub max_abs: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.x0;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// Least-squares polynomial of degree `deg` in (x − x0). Returns `None` if the
/// design matrix is rank deficient.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize, x0: f64) -> Option<PolyFit> {
    let n = x.len();
    if n != y.len() || n <= deg {
        return None;
    }
    // Scale the abscissa to [-1, 1] for conditioning, then undo it.
    let scale = x.iter().map(|v| (v - x0).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let a = DMatrix::from_fn(n, deg + 1, |i, k| ((x[i] - x0) / scale).powi(k as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return None;
    }
    let c = svd.solve(&b, 1e-14 * smax).ok()?;
    let resid = &a * &c - &b;
    let coeffs = (0..=deg).map(|k| c[k] / scale.powi(k as i32)).collect();
    Some(PolyFit {
        coeffs,
        x0,
        rms: (resid.norm_squared() / n as f64).sqrt(),
        max_abs: resid.amax(),
    })
}
