use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Attack-success exponents across blocklengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Least-squares slope of `-log2 P` against `n`, through the origin.
    pub slope: f64,
    /// Slope of the ordinary least-squares line, which absorbs a constant
    /// factor in `P`.
    pub affine_slope: f64,
    pub affine_intercept: f64,
    /// `(n, -(1/n) log2 P)` for every usable point.
    pub points: Vec<(usize, f64)>,
    /// Blocklengths dropped because their probability was zero.
    pub excluded: Vec<usize>,
}

/// Fits `-log2 P(n) ~ slope * n`. Zero probabilities are excluded and
/// listed; at least three usable points are required.
pub fn exponent_fit(points: &[(usize, f64)]) -> Result<ExponentFit> {
    let mut usable = Vec::new();
    let mut excluded = Vec::new();
    for &(n, p) in points {
        if n == 0 || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "invalid point (n = {n}, P = {p})"
            )));
        }
        if p == 0.0 {
            excluded.push(n);
        } else {
            usable.push((n as f64, -p.log2()));
        }
    }
    if usable.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "exponent fit needs at least 3 points with positive probability, got {}",
            usable.len()
        )));
    }
    let sxy: f64 = usable.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| x * x).sum();
    let k = usable.len() as f64;
    let mx = usable.iter().map(|(x, _)| x).sum::<f64>() / k;
    let my = usable.iter().map(|(_, y)| y).sum::<f64>() / k;
    let cov: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = usable.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let affine_slope = if var > 0.0 { cov / var } else { f64::NAN };
    Ok(ExponentFit {
        slope: sxy / sxx,
        affine_slope,
        affine_intercept: my - affine_slope * mx,
        points: usable.iter().map(|&(x, y)| (x as usize, y / x)).collect(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_of_two() {
        let pts: Vec<_> = [4usize, 8, 12, 16]
            .iter()
            .map(|&n| (n, (-(n as f64)).exp2()))
            .collect();
        let fit = exponent_fit(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.affine_slope - 1.0).abs() < 1e-12);
        assert!(fit.points.iter().all(|&(_, e)| (e - 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_factor_biases_origin_fit_only() {
        let pts: Vec<_> = [10usize, 20, 40, 80]
            .iter()
            .map(|&n| (n, 4.0 * (-(n as f64) * 0.5).exp2()))
            .collect();
        let fit = exponent_fit(&pts).unwrap();
        assert!((fit.affine_slope - 0.5).abs() < 1e-12);
        assert!((fit.affine_intercept + 2.0).abs() < 1e-9);
        assert!(fit.slope < 0.5);
    }

    #[test]
    fn zero_points_are_excluded() {
        let fit = exponent_fit(&[(2, 0.25), (3, 0.125), (4, 0.0), (5, 1.0 / 32.0)]).unwrap();
        assert_eq!(fit.excluded, vec![4]);
        assert_eq!(fit.points.len(), 3);
        assert!(exponent_fit(&[(2, 0.25), (3, 0.0), (4, 0.0)]).is_err());
        assert!(exponent_fit(&[(2, 1.5), (3, 0.1), (4, 0.1)]).is_err());
    }
}
