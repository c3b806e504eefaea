//! Impersonation attacks and converse-side checks.
//!
//! An impersonator submits a forged share without seeing either legitimate
//! share. Its success probability is linear in the forgery distribution, so
//! the optimum over all distributions is attained at a point mass; exact
//! evaluation therefore scores every candidate forgery (or every class of
//! forgeries that share an acceptance probability) and takes the maximum.

mod bounds;
mod exponent;
mod monte_carlo;

pub use bounds::{
    converse_exponent_check, fano_bound, fano_check, logsum_bound_check, test_quantities,
    ConverseExponentCheck, LogSumCheck, TestQuantities, BOUND_TOLERANCE,
};
pub use exponent::{exponent_fit, ExponentFit};
pub use monte_carlo::{monte_carlo_attack, monte_carlo_decoding_error, ShareSimulator};

use serde::{Deserialize, Serialize};

use crate::prob::{check_cap, JointPmf, DEFAULT_STATE_CAP};
use crate::stats::ProportionEstimate;
use crate::{Error, Result};

/// Relative tolerance under which two acceptance probabilities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Which participant the opponent pretends to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Forge the first share; the decoder pairs it with the real second share.
    X,
    /// Forge the second share.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackMode {
    Exact,
    MonteCarlo { trials: u64, ci_half_width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult<S> {
    pub success_prob: f64,
    /// Lexicographically smallest maximizing forgery (exact mode only).
    pub optimal_forgery: Option<S>,
    pub mode: AttackMode,
    /// Monte Carlo interval, when applicable.
    pub interval: Option<ProportionEstimate>,
}

/// A set of forged shares with a common acceptance probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ForgeryClass<S> {
    /// Smallest member, used as the reported forgery.
    pub representative: S,
    /// `Pr{(forgery, real share) accepted}` for each member.
    pub acceptance: f64,
    /// Total probability the legitimate share of the forged side puts on the
    /// class. Used to form `beta`.
    pub legit_mass: f64,
}

/// An evaluator that can enumerate forged shares exactly.
pub trait ImpersonationModel {
    type Share: Clone + Ord;

    /// All forgeries against `target`, grouped into classes. The classes
    /// must cover the whole forged-share alphabet.
    fn forged_classes(&self, target: Target) -> Result<Vec<ForgeryClass<Self::Share>>>;
}

fn best_class<S: Clone + Ord>(classes: &[ForgeryClass<S>]) -> Result<&ForgeryClass<S>> {
    let max = classes
        .iter()
        .map(|c| c.acceptance)
        .fold(f64::NEG_INFINITY, f64::max);
    classes
        .iter()
        .filter(|c| c.acceptance >= max - TIE_TOLERANCE * max.abs())
        .min_by(|a, b| a.representative.cmp(&b.representative))
        .ok_or_else(|| Error::Invariant("no forgeries to evaluate".into()))
}

/// Exact optimal attack against `target`.
pub fn optimal_attack<M: ImpersonationModel>(
    model: &M,
    target: Target,
) -> Result<AttackResult<M::Share>> {
    let classes = model.forged_classes(target)?;
    let max = classes
        .iter()
        .map(|c| c.acceptance)
        .fold(f64::NEG_INFINITY, f64::max);
    let best = best_class(&classes)?;
    Ok(AttackResult {
        success_prob: max.clamp(0.0, 1.0),
        optimal_forgery: Some(best.representative.clone()),
        mode: AttackMode::Exact,
        interval: None,
    })
}

/// `P^X`: best success probability when forging the first share.
pub fn optimal_attack_x<M: ImpersonationModel>(model: &M) -> Result<AttackResult<M::Share>> {
    optimal_attack(model, Target::X)
}

/// `P^Y`: best success probability when forging the second share.
pub fn optimal_attack_y<M: ImpersonationModel>(model: &M) -> Result<AttackResult<M::Share>> {
    optimal_attack(model, Target::Y)
}

/// `beta = sum over the acceptance region of P_X P_Y`, i.e. the success
/// probability of a forger who draws from the legitimate marginal.
pub fn second_kind_error<M: ImpersonationModel>(model: &M) -> Result<f64> {
    let classes = model.forged_classes(Target::X)?;
    Ok(crate::prob::neumaier_sum(
        classes.iter().map(|c| c.legit_mass * c.acceptance),
    ))
}

/// Success probability of a forger who draws from `weights` over the given
/// classes (weights are per class, not per member).
pub fn mixture_success<S>(classes: &[ForgeryClass<S>], weights: &[f64]) -> f64 {
    classes
        .iter()
        .zip(weights)
        .map(|(c, w)| c.acceptance * w)
        .sum()
}

/// Brute-force model over an explicit share joint and acceptance region.
pub struct DenseModel<R> {
    joint: JointPmf,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
    region: R,
}

impl<R: Fn(usize, usize) -> bool> DenseModel<R> {
    /// `joint` must have exactly two axes `(X, Y)`.
    pub fn new(joint: JointPmf, region: R) -> Result<Self> {
        if joint.ndim() != 2 {
            return Err(Error::InvalidInput("share joint must have two axes".into()));
        }
        let cells = joint.dims()[0] as u128 * joint.dims()[1] as u128;
        check_cap("dense attack", cells, DEFAULT_STATE_CAP)?;
        let p_x = joint.marginal(&[0]).probs().to_vec();
        let p_y = joint.marginal(&[1]).probs().to_vec();
        Ok(Self {
            joint,
            p_x,
            p_y,
            region,
        })
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn accepts(&self, x: usize, y: usize) -> bool {
        (self.region)(x, y)
    }

    /// Success probability of a forgery distribution over the forged axis.
    pub fn success_under(&self, target: Target, forgery: &[f64]) -> f64 {
        let mut total = 0.0;
        match target {
            Target::X => {
                for (x, &w) in forgery.iter().enumerate() {
                    for (y, &py) in self.p_y.iter().enumerate() {
                        if (self.region)(x, y) {
                            total += w * py;
                        }
                    }
                }
            }
            Target::Y => {
                for (y, &w) in forgery.iter().enumerate() {
                    for (x, &px) in self.p_x.iter().enumerate() {
                        if (self.region)(x, y) {
                            total += w * px;
                        }
                    }
                }
            }
        }
        total
    }
}

impl<R: Fn(usize, usize) -> bool> ImpersonationModel for DenseModel<R> {
    type Share = usize;

    fn forged_classes(&self, target: Target) -> Result<Vec<ForgeryClass<usize>>> {
        let (forged, real) = match target {
            Target::X => (&self.p_x, &self.p_y),
            Target::Y => (&self.p_y, &self.p_x),
        };
        Ok((0..forged.len())
            .map(|f| {
                let acceptance = real
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| match target {
                        Target::X => (self.region)(f, r),
                        Target::Y => (self.region)(r, f),
                    })
                    .map(|(_, p)| p)
                    .sum();
                ForgeryClass {
                    representative: f,
                    acceptance,
                    legit_mass: forged[f],
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Pmf;
    use crate::rng::RandomStream;

    fn correlated() -> JointPmf {
        JointPmf::new(
            vec![3, 3],
            vec![0.2, 0.05, 0.0, 0.05, 0.3, 0.05, 0.0, 0.05, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn empty_and_full_regions() {
        let empty = DenseModel::new(correlated(), |_, _| false).unwrap();
        assert_eq!(optimal_attack_x(&empty).unwrap().success_prob, 0.0);
        assert_eq!(optimal_attack_y(&empty).unwrap().success_prob, 0.0);
        let full = DenseModel::new(correlated(), |_, _| true).unwrap();
        assert!((optimal_attack_x(&full).unwrap().success_prob - 1.0).abs() < 1e-15);
        assert!((second_kind_error(&full).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_pick_smallest_forgery() {
        let j = JointPmf::product(&[&Pmf::uniform(3), &Pmf::uniform(3)]).unwrap();
        let m = DenseModel::new(j, |x, y| x != y).unwrap();
        let r = optimal_attack_x(&m).unwrap();
        assert_eq!(r.optimal_forgery, Some(0));
        assert!((r.success_prob - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_region() {
        let m = DenseModel::new(correlated(), |x, y| x == y).unwrap();
        let r = optimal_attack_x(&m).unwrap();
        // P_Y = (0.25, 0.4, 0.35)
        assert!((r.success_prob - 0.4).abs() < 1e-15);
        assert_eq!(r.optimal_forgery, Some(1));
        let beta = second_kind_error(&m).unwrap();
        assert!(beta <= r.success_prob + 1e-15);
    }

    #[test]
    fn point_masses_dominate_mixtures() {
        let m = DenseModel::new(correlated(), |x, y| (x + y) % 2 == 0).unwrap();
        let best = optimal_attack_x(&m).unwrap().success_prob;
        let mut rng = RandomStream::new(8);
        for _ in 0..100 {
            let w = Pmf::from_weights((0..3).map(|_| rng.next_f64()).collect()).unwrap();
            assert!(m.success_under(Target::X, w.probs()) <= best + 1e-12);
        }
    }
}
