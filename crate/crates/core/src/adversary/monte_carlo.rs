use super::{AttackMode, AttackResult, Target};
use crate::rng::{parallel_count, RandomStream};
use crate::stats::ProportionEstimate;
use crate::DecodeOutcome;

/// A scheme that can be simulated end to end.
pub trait ShareSimulator: Sync {
    type Share: Send;

    /// Draws a secret and randomness, returning the secret and both shares.
    fn sample_shares(&self, rng: &mut RandomStream) -> (Vec<usize>, Self::Share, Self::Share);

    fn accepts(&self, x: &Self::Share, y: &Self::Share) -> bool;

    fn decode(&self, x: &Self::Share, y: &Self::Share) -> DecodeOutcome;
}

/// Estimates the success probability of a forger drawing from `forge`.
///
/// Each trial first samples the legitimate shares, then the forgery, from
/// the same stream. Results are identical for any thread count.
pub fn monte_carlo_attack<M, F>(
    model: &M,
    target: Target,
    forge: F,
    trials: u64,
    rng: &RandomStream,
) -> AttackResult<M::Share>
where
    M: ShareSimulator,
    F: Fn(&mut RandomStream) -> M::Share + Sync,
{
    let hits = parallel_count(trials, rng, |r| {
        let (_, x, y) = model.sample_shares(r);
        let forged = forge(r);
        match target {
            Target::X => model.accepts(&forged, &y),
            Target::Y => model.accepts(&x, &forged),
        }
    });
    let est = ProportionEstimate::from_counts(hits, trials);
    AttackResult {
        success_prob: est.estimate,
        optimal_forgery: None,
        mode: AttackMode::MonteCarlo {
            trials,
            ci_half_width: est.half_width,
        },
        interval: Some(est),
    }
}

/// Estimates `Pr{decode(X, Y) != S}` over legitimate shares.
pub fn monte_carlo_decoding_error<M: ShareSimulator>(
    model: &M,
    trials: u64,
    rng: &RandomStream,
) -> ProportionEstimate {
    let hits = parallel_count(trials, rng, |r| {
        let (s, x, y) = model.sample_shares(r);
        model.decode(&x, &y).secret() != Some(&s[..])
    });
    ProportionEstimate::from_counts(hits, trials)
}
