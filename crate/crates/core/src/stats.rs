//! Small shared statistics helpers: least-squares lines and weighted L^p
//! summaries. Kept sequential for reproducibility.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares y = intercept + slope·x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// Weighted empirical L^p norm: (Σ w|v|^p / Σ w)^(1/p).
pub fn weighted_lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let wsum: f64 = weights.iter().sum();
    if wsum == 0.0 {
        return 0.0;
    }
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * v.abs().powf(p))
        .sum();
    (s / wsum).powf(1.0 / p)
}

/// Weights of the Lagrange interpolant through `nodes` evaluated at `at`.
pub fn lagrange_value_weights(nodes: &[f64], at: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..n {
            if j != i {
                num *= at - nodes[j];
                den *= nodes[i] - nodes[j];
            }
        }
        w[i] = num / den;
    }
    w
}

/// Weights of the derivative of the Lagrange interpolant through `nodes`
/// evaluated at `at`.
pub fn lagrange_derivative_weights(nodes: &[f64], at: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut den = 1.0;
        for j in 0..n {
            if j != i {
                den *= nodes[i] - nodes[j];
            }
        }
        // d/dx Π_{j≠i}(x − x_j) = Σ_{k≠i} Π_{j≠i,k}(x − x_j)
        let mut num = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut term = 1.0;
            for j in 0..n {
                if j != i && j != k {
                    term *= at - nodes[j];
                }
            }
            num += term;
        }
        w[i] = num / den;
    }
    w
}

/// Plain empirical quantile (linear interpolation between order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_weights_differentiate_cubics_exactly() {
        let nodes = [0.0, 0.4, 1.1, 2.0];
        let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let df = |t: f64| 1.0 - 4.0 * t + 1.5 * t * t;
        for at in [0.0, 0.7, 2.0] {
            let vw = lagrange_value_weights(&nodes, at);
            let dw = lagrange_derivative_weights(&nodes, at);
            let v: f64 = nodes.iter().zip(&vw).map(|(&t, &w)| w * f(t)).sum();
            let d: f64 = nodes.iter().zip(&dw).map(|(&t, &w)| w * f(t)).sum();
            assert!((v - f(at)).abs() < 1e-12);
            assert!((d - df(at)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
