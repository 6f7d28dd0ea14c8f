//! Cancellation-free hyperbolic helpers.

/// `log coth x = log(1 + 2/(e^{2x} - 1))`, for `x > 0`.
pub fn logcoth(x: f64) -> f64 {
    (2.0 / (2.0 * x).exp_m1()).ln_1p()
}

/// `arccoth y = log((y + 1)/(y - 1)) / 2`, for `y > 1`.
pub fn arccoth(y: f64) -> f64 {
    0.5 * (2.0 / (y - 1.0)).ln_1p()
}

/// `arccoth(e^t)` without forming `e^t - 1` by subtraction.
pub fn arccoth_exp(t: f64) -> f64 {
    0.5 * (2.0 / t.exp_m1()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((arccoth(3.0) - 0.5 * 2f64.ln()).abs() < 1e-15);
        let x = 0.7f64;
        assert!((logcoth(x) - (x.cosh() / x.sinh()).ln()).abs() < 1e-14);
        assert!((arccoth_exp(1.0) - arccoth(std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn inverse_pair() {
        for &x in &[0.01f64, 0.3, 1.0, 4.0] {
            let y = 1.0 / x.tanh();
            assert!((arccoth(y) - x).abs() < 1e-12 * x.max(1.0));
        }
    }
}
