//! Finite-difference stencils and quadrature shared by the time-domain and
//! spatial-grid code.

/// Weights of the second-order first-derivative stencil at sample `k` of a
/// uniformly spaced sequence of length `len` (unscaled by the spacing).
///
/// Interior samples use the centered stencil; the two end samples use the
/// one-sided second-order stencils. Requires `len >= 3`.
pub fn derivative_stencil(k: usize, len: usize) -> [(usize, f64); 3] {
    debug_assert!(len >= 3 && k < len);
    if k == 0 {
        [(0, -1.5), (1, 2.0), (2, -0.5)]
    } else if k == len - 1 {
        [(k, 1.5), (k - 1, -2.0), (k - 2, 0.5)]
    } else {
        [(k - 1, -0.5), (k + 1, 0.5), (k, 0.0)]
    }
}

/// Running trapezoid integral; the first entry is zero.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * h * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Trapezoid weights for a uniformly sampled function on `n` points.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Observed convergence order from errors at spacing `h` and `h / 2`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_quadratics_exactly() {
        let h = 0.1;
        let f: Vec<f64> = (0..6).map(|k| (k as f64 * h).powi(2)).collect();
        for k in 0..f.len() {
            let d: f64 = derivative_stencil(k, f.len())
                .iter()
                .map(|&(j, w)| w * f[j])
                .sum::<f64>()
                / h;
            assert!((d - 2.0 * k as f64 * h).abs() < 1e-12, "k={k} d={d}");
        }
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let h = 0.25;
        let f: Vec<f64> = (0..9).map(|k| 3.0 * k as f64 * h + 1.0).collect();
        let c = cumulative_trapezoid(&f, h);
        for (k, v) in c.iter().enumerate() {
            let x = k as f64 * h;
            assert!((v - (1.5 * x * x + x)).abs() < 1e-12);
        }
        assert_eq!(c[0], 0.0);
    }
}
