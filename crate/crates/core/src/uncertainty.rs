//! Parenthesized one-standard-deviation notation, e.g. `93.6(4.8)` or
//! `2.34(12)`.

/// Decimals used when the uncertainty is zero.
pub const EXACT_DECIMALS: usize = 3;

/// Number of decimals that keeps two significant figures of `sigma`.
pub fn decimals_for(sigma: f64) -> usize {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return EXACT_DECIMALS;
    }
    let lead = sigma.log10().floor() as i64;
    // rounding can carry into the next decade (0.0996 -> 0.10)
    let d = (1 - lead).max(0) as usize;
    let rounded = (sigma * 10f64.powi(d as i32)).round();
    if rounded >= 100.0 && d > 0 {
        d - 1
    } else {
        d
    }
}

/// Formats `value(sigma)` with the uncertainty in units of the last quoted
/// digit when it is below one, and in plain decimals otherwise.
pub fn format_parenthesized(value: f64, sigma: f64) -> String {
    let sigma = sigma.abs();
    let d = decimals_for(sigma);
    if !(sigma > 0.0) || !sigma.is_finite() {
        return format!("{value:.d$}(0)");
    }
    if sigma >= 1.0 || d == 0 {
        format!("{value:.d$}({sigma:.d$})")
    } else {
        let digits = (sigma * 10f64.powi(d as i32)).round() as u64;
        format!("{value:.d$}({digits})")
    }
}

/// Percentage form of a fraction: `0.936 ± 0.048` becomes `93.6(4.8)%`.
pub fn format_percent(value: f64, sigma: f64) -> String {
    format!("{}%", format_parenthesized(100.0 * value, 100.0 * sigma))
}
