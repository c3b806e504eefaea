//! Converse-side inequalities evaluated on concrete schemes.

use serde::{Deserialize, Serialize};

use crate::prob::{binary_entropy, check_cap, JointPmf, DEFAULT_STATE_CAP};
use crate::{Error, Result};

/// Slack granted to every inequality check.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// First- and second-kind errors of the test that accepts share pairs in a
/// region: `alpha = P_XY(region^c)` and `beta = (P_X x P_Y)(region)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestQuantities {
    pub alpha: f64,
    pub beta: f64,
}

pub fn test_quantities<R>(joint: &JointPmf, region: R) -> Result<TestQuantities>
where
    R: Fn(usize, usize) -> bool,
{
    if joint.ndim() != 2 {
        return Err(Error::InvalidInput("share joint must have two axes".into()));
    }
    let (nx, ny) = (joint.dims()[0], joint.dims()[1]);
    check_cap(
        "test quantities",
        nx as u128 * ny as u128,
        DEFAULT_STATE_CAP,
    )?;
    let p_x = joint.marginal(&[0]);
    let p_y = joint.marginal(&[1]);
    let mut alpha = 0.0;
    let mut beta = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            if region(x, y) {
                beta += p_x.probs()[x] * p_y.probs()[y];
            } else {
                alpha += joint.probs()[x * ny + y];
            }
        }
    }
    Ok(TestQuantities {
        alpha: alpha.clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSumCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `beta = 0`: the right-hand side is infinite and the bound says nothing.
    pub vacuous: bool,
}

/// Checks `I(X;Y) >= -h(alpha) - (1 - alpha) log2 beta` (total bits).
pub fn logsum_bound_check(i_xy: f64, tq: TestQuantities) -> LogSumCheck {
    let alpha = tq.alpha.clamp(0.0, 1.0);
    if tq.beta <= 0.0 {
        return LogSumCheck {
            lhs: i_xy,
            rhs: f64::INFINITY,
            holds: true,
            vacuous: true,
        };
    }
    let h = binary_entropy(alpha).expect("alpha clamped to [0, 1]");
    let tail = if alpha >= 1.0 {
        0.0
    } else {
        (1.0 - alpha) * tq.beta.log2()
    };
    let rhs = -h - tail;
    LogSumCheck {
        lhs: i_xy,
        rhs,
        holds: i_xy >= rhs - BOUND_TOLERANCE,
        vacuous: false,
    }
}

/// Right-hand side `(1/n) h(P_e) + P_e log2 |S|`.
pub fn fano_bound(p_e: f64, n: usize, alphabet_size: usize) -> f64 {
    let p = p_e.clamp(0.0, 1.0);
    binary_entropy(p).expect("clamped") / n as f64 + p * (alphabet_size as f64).log2()
}

/// `(1/n) H(S^n | X Y) <= (1/n) h(P_e) + P_e log2 |S|`, with
/// `h_s_given_xy` in total bits.
pub fn fano_check(p_e: f64, h_s_given_xy: f64, n: usize, alphabet_size: usize) -> bool {
    h_s_given_xy / n as f64 <= fano_bound(p_e, n, alphabet_size) + BOUND_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverseExponentCheck {
    /// `max(-(1/n) log2 P^X, -(1/n) log2 P^Y)`.
    pub max_exponent: f64,
    /// `I/(n(1-alpha)) + h(alpha)/(n(1-alpha))`.
    pub bound: f64,
    pub holds: bool,
}

/// Exponent form of the log-sum bound, using `P^X, P^Y >= beta`:
/// the better of the two attack exponents can not exceed
/// `(I(X;Y) + h(alpha)) / (n (1 - alpha))`. `i_xy` is in total bits.
/// Returns `None` when `alpha = 1`, where the bound is void.
pub fn converse_exponent_check(
    i_xy: f64,
    alpha: f64,
    p_x: f64,
    p_y: f64,
    n: usize,
) -> Option<ConverseExponentCheck> {
    let alpha = alpha.clamp(0.0, 1.0);
    if alpha >= 1.0 {
        return None;
    }
    let nf = n as f64;
    let exponent = |p: f64| -p.log2() / nf;
    let max_exponent = exponent(p_x).max(exponent(p_y));
    let bound = (i_xy + binary_entropy(alpha).expect("clamped")) / (nf * (1.0 - alpha));
    Some(ConverseExponentCheck {
        max_exponent,
        bound,
        holds: max_exponent <= bound + BOUND_TOLERANCE,
    })
}
