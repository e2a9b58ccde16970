//! Bernstein polynomials and rational Bezier curves.
//!
//! The deflation stencil comes from a quadratic rational Bezier curve with
//! weights `(1/2, 3/2, 1/2)` sampled at `t = 1/2`: the normalized blending
//! coefficients there are `(1/8, 6/8, 1/8)`.

use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `b_{j,n}(t) = C(n, j) t^j (1 - t)^(n - j)`.
pub fn bernstein(j: usize, n: usize, t: f64) -> f64 {
    if j > n {
        return 0.0;
    }
    binomial(n, j) * t.powi(j as i32) * (1.0 - t).powi((n - j) as i32)
}

/// Normalized weights `w_j b_{j,n}(t) / Σ_i w_i b_{i,n}(t)` of a rational Bezier curve.
pub fn rational_blend(weights: &[f64], t: f64) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("a Bezier curve needs at least one control point".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutsideDomain(format!("{t}")));
    }
    let n = weights.len() - 1;
    let terms: Vec<f64> = weights.iter().enumerate().map(|(j, w)| w * bernstein(j, n, t)).collect();
    let denom: f64 = terms.iter().sum();
    if denom.abs() < 1e-300 {
        return Err(Error::DegenerateDenominator(t));
    }
    Ok(terms.into_iter().map(|v| v / denom).collect())
}

/// Point on the rational Bezier curve with scalar control points.
pub fn rational_bezier_eval(points: &[f64], weights: &[f64], t: f64) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(Error::SizeMismatch { expected: weights.len(), got: points.len() });
    }
    Ok(rational_blend(weights, t)?.iter().zip(points).map(|(b, p)| b * p).sum())
}

/// Weights of the quadratic approximation used by the deflation stencil.
pub const QUADRATIC_WEIGHTS: [f64; 3] = [0.5, 1.5, 0.5];

/// Blending coefficients of the quadratic approximation at `t = 1/2`.
pub fn quadratic_stencil() -> [f64; 3] {
    let b = rational_blend(&QUADRATIC_WEIGHTS, 0.5).expect("fixed positive weights");
    [b[0], b[1], b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weights_give_plain_bezier() {
        let pts = [2.0, -1.0, 4.0, 3.0];
        let w = [1.0; 4];
        assert!((rational_bezier_eval(&pts, &w, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((rational_bezier_eval(&pts, &w, 1.0).unwrap() - 3.0).abs() < 1e-15);
        let t: f64 = 0.3;
        let plain: f64 = (0..4).map(|j| bernstein(j, 3, t) * pts[j]).sum();
        assert!((rational_bezier_eval(&pts, &w, t).unwrap() - plain).abs() < 1e-15);
    }

    #[test]
    fn linear_curve_interpolates() {
        assert!((rational_bezier_eval(&[0.0, 1.0], &[1.0, 1.0], 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quadratic_approximation_coefficients() {
        let s = quadratic_stencil();
        for (a, b) in s.iter().zip([1.0 / 8.0, 6.0 / 8.0, 1.0 / 8.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = [3.0, 5.0, -2.0];
        let v = rational_bezier_eval(&p, &QUADRATIC_WEIGHTS, 0.5).unwrap();
        assert!((v - (p[0] + 6.0 * p[1] + p[2]) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator_is_rejected() {
        assert!(matches!(rational_blend(&[1.0, -1.0], 0.5), Err(Error::DegenerateDenominator(_))));
        assert!(rational_bezier_eval(&[1.0], &[1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn bernstein_partition_of_unity() {
        for n in 0..7 {
            let s: f64 = (0..=n).map(|j| bernstein(j, n, 0.37)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}
