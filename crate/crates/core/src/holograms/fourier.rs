use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Cosine-series coefficients of `sgn[cos θ]` from `period_samples` midpoint
/// samples over one period. Entry `n ≥ 1` is `(2/N) Σ f(θ_k) e^{−inθ_k}`,
/// whose real part is the `cos nθ` coefficient; entry 0 is the mean.
pub fn fourier_order_coefficients(period_samples: usize, max_order: usize) -> Result<BTreeMap<usize, Complex64>> {
    if max_order == 0 || period_samples < 4 * max_order {
        return Err(Error::invalid(format!(
            "need at least {} samples for order {max_order}, got {period_samples}",
            4 * max_order.max(1)
        )));
    }
    let n = period_samples as f64;
    let samples: Vec<(f64, f64)> = (0..period_samples)
        .map(|k| {
            let theta = TAU * (k as f64 + 0.5) / n;
            (theta, if theta.cos() >= 0.0 { 1.0 } else { -1.0 })
        })
        .collect();
    Ok((0..=max_order)
        .map(|order| {
            let sum: Complex64 = samples
                .iter()
                .map(|&(theta, f)| Complex64::from_polar(f, -(order as f64) * theta))
                .sum();
            let scale = if order == 0 { 1.0 / n } else { 2.0 / n };
            (order, sum * scale)
        })
        .collect())
}
