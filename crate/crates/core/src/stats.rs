//! Binomial proportion estimates for Monte Carlo tallies.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A success proportion with a 95% confidence interval.
///
/// Uses the normal approximation. When no successes (or no failures) were
/// observed the interval is one-sided by the rule of three.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ProportionEstimate {
    /// # Panics
    /// If `trials == 0` or `successes > trials`.
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0, "no trials");
        assert!(successes <= trials, "more successes than trials");
        let n = trials as f64;
        let p = successes as f64 / n;
        let (lower, upper, half_width) = if successes == 0 {
            let u = (3.0 / n).min(1.0);
            (0.0, u, u)
        } else if successes == trials {
            let l = (1.0 - 3.0 / n).max(0.0);
            (l, 1.0, 1.0 - l)
        } else {
            let hw = Z_95 * (p * (1.0 - p) / n).sqrt();
            ((p - hw).max(0.0), (p + hw).min(1.0), hw)
        };
        Self {
            successes,
            trials,
            estimate: p,
            half_width,
            lower,
            upper,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_of_three() {
        let e = ProportionEstimate::from_counts(0, 1000);
        assert_eq!(e.estimate, 0.0);
        assert_eq!(e.lower, 0.0);
        assert!((e.upper - 0.003).abs() < 1e-15);
        let f = ProportionEstimate::from_counts(1000, 1000);
        assert!((f.lower - 0.997).abs() < 1e-15);
    }

    #[test]
    fn normal_interval() {
        let e = ProportionEstimate::from_counts(500, 10_000);
        let hw = Z_95 * (0.05f64 * 0.95 / 10_000.0).sqrt();
        assert!((e.half_width - hw).abs() < 1e-15);
        assert!(e.contains(0.05));
        assert!(!e.contains(0.06));
    }
}
