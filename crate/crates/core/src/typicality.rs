//! Typical sets, their lexicographic indexing and the `gamma_n` schedule.

use serde::{Deserialize, Serialize};

use crate::prob::{check_cap, seq_from_index, seq_index, state_count, Pmf, DEFAULT_STATE_CAP};
use crate::rng::{parallel_count, RandomStream};
use crate::stats::ProportionEstimate;
use crate::{Error, Result};

/// Slack added to the membership comparison so that sequences sitting
/// exactly on the boundary are not lost to rounding in the surprisal sum.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// How the typicality width `gamma_n` shrinks with the blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaSchedule {
    /// `gamma_n = n^(-exponent)` with `0 < exponent < 1/2`, so that
    /// `gamma_n -> 0` and `sqrt(n) gamma_n -> infinity`.
    PowerLaw {
        exponent: f64,
    },
    Constant {
        gamma: f64,
    },
}

impl Default for GammaSchedule {
    fn default() -> Self {
        GammaSchedule::PowerLaw {
            exponent: 1.0 / 3.0,
        }
    }
}

impl GammaSchedule {
    pub fn power_law(exponent: f64) -> Result<Self> {
        let s = GammaSchedule::PowerLaw { exponent };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(gamma: f64) -> Result<Self> {
        let s = GammaSchedule::Constant { gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GammaSchedule::PowerLaw { exponent } if !(exponent > 0.0 && exponent < 0.5) => {
                Err(Error::InvalidParameter(format!(
                    "power-law exponent must lie in (0, 0.5), got {exponent}"
                )))
            }
            GammaSchedule::Constant { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(
                Error::InvalidParameter(format!("constant gamma must be positive, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }

    /// # Panics
    /// If `n == 0`.
    pub fn gamma_at(&self, n: usize) -> f64 {
        assert!(n >= 1, "blocklength must be positive");
        match *self {
            GammaSchedule::PowerLaw { exponent } => (n as f64).powf(-exponent),
            GammaSchedule::Constant { gamma } => gamma,
        }
    }
}

/// Membership test for the typical set, evaluated from symbol counts.
///
/// Surprisal is accumulated as `sum_s count_s * (-log2 P(s))` in symbol
/// order, so the verdict depends only on the type of the sequence.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    surprisal: Vec<f64>,
    entropy: f64,
    gamma: f64,
}

impl TypicalityTest {
    pub fn new(source: &Pmf, gamma: f64) -> Self {
        Self {
            surprisal: source
                .probs()
                .iter()
                .map(|&p| if p > 0.0 { -p.log2() } else { f64::INFINITY })
                .collect(),
            entropy: source.entropy(),
            gamma,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `|-(1/n) log2 P(s^n) - H(S)|` for a sequence with the given counts.
    pub fn deviation(&self, counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        let mut total = 0.0;
        for (&c, &h) in counts.iter().zip(&self.surprisal) {
            if c > 0 {
                if h.is_infinite() {
                    return f64::INFINITY;
                }
                total += c as f64 * h;
            }
        }
        (total / n as f64 - self.entropy).abs()
    }

    pub fn accepts_counts(&self, counts: &[usize]) -> bool {
        self.deviation(counts) <= self.gamma + BOUNDARY_SLACK
    }

    /// False for empty sequences and for symbols outside the alphabet.
    pub fn accepts(&self, seq: &[usize]) -> bool {
        if seq.is_empty() {
            return false;
        }
        let mut counts = vec![0usize; self.surprisal.len()];
        for &s in seq {
            match counts.get_mut(s) {
                Some(c) => *c += 1,
                None => return false,
            }
        }
        self.accepts_counts(&counts)
    }
}

/// Whether `seq` lies in the typical set of width `gamma`. Sequences with a
/// zero-probability symbol are never typical.
pub fn is_typical(seq: &[usize], source: &Pmf, gamma: f64) -> bool {
    TypicalityTest::new(source, gamma).accepts(seq)
}

/// Index into `{0, .., M_n}`: the rank of a typical sequence, or `M_n` for
/// every atypical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZIndex(u64);

impl ZIndex {
    pub fn new(value: u64, size: u64) -> Option<Self> {
        (value <= size).then_some(Self(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

/// The typical set of length-`n` sequences, ranked in lexicographic order.
#[derive(Debug, Clone)]
pub struct TypicalIndex {
    n: usize,
    gamma: f64,
    source: Pmf,
    test: TypicalityTest,
    /// Lexicographic indices (see [`seq_index`]) of the members, ascending.
    members: Vec<u64>,
}

impl TypicalIndex {
    pub fn build(source: &Pmf, n: usize, gamma: f64) -> Result<Self> {
        Self::build_with_cap(source, n, gamma, DEFAULT_STATE_CAP)
    }

    pub fn build_with_cap(source: &Pmf, n: usize, gamma: f64, cap: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "blocklength must be positive".into(),
            ));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid gamma {gamma}")));
        }
        let test = TypicalityTest::new(source, gamma);
        let mut members = Vec::new();
        let mut index = 0u64;
        source.iid(n).for_each(cap, |_, counts, _| {
            if test.accepts_counts(counts) {
                members.push(index);
            }
            index += 1;
        })?;
        if members.is_empty() {
            return Err(Error::EmptyTypicalSet { n, gamma });
        }
        Ok(Self {
            n,
            gamma,
            source: source.clone(),
            test,
            members,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn source(&self) -> &Pmf {
        &self.source
    }

    /// `M_n`, the number of typical sequences.
    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    /// Lexicographic indices of the members, ascending.
    pub fn member_indices(&self) -> &[u64] {
        &self.members
    }

    /// `2^(n (H(S) + gamma))`, an upper bound on [`Self::size`].
    pub fn cardinality_bound(&self) -> f64 {
        (self.n as f64 * (self.source.entropy() + self.gamma)).exp2()
    }

    fn valid_sequence(&self, seq: &[usize]) -> bool {
        seq.len() == self.n && seq.iter().all(|&s| s < self.source.support_size())
    }

    pub fn contains(&self, seq: &[usize]) -> bool {
        self.valid_sequence(seq) && self.test.accepts(seq)
    }

    /// Rank of a member among all members in lexicographic order.
    pub fn rank(&self, seq: &[usize]) -> Result<u64> {
        if !self.valid_sequence(seq) {
            return Err(Error::NotTypical(seq.to_vec()));
        }
        let k = self.source.support_size();
        self.members
            .binary_search(&seq_index(seq, k))
            .map(|r| r as u64)
            .map_err(|_| Error::NotTypical(seq.to_vec()))
    }

    pub fn unrank(&self, rank: u64) -> Result<Vec<usize>> {
        let flat = self
            .members
            .get(rank as usize)
            .ok_or(Error::RankOutOfRange {
                rank,
                size: self.size(),
            })?;
        Ok(seq_from_index(*flat, self.source.support_size(), self.n))
    }

    /// Rank if typical, `M_n` otherwise (including malformed sequences).
    pub fn xi_plus(&self, seq: &[usize]) -> ZIndex {
        ZIndex(self.rank(seq).unwrap_or(self.size()))
    }

    /// [`Self::xi_plus`] of the sequence with lexicographic index `flat`.
    pub fn xi_plus_of_index(&self, flat: u64) -> ZIndex {
        ZIndex(
            self.members
                .binary_search(&flat)
                .map(|r| r as u64)
                .unwrap_or(self.size()),
        )
    }
}

/// `Pr{S^n not in T}` by exhaustive enumeration of all `|S|^n` sequences.
pub fn atypical_mass(source: &Pmf, n: usize, gamma: f64) -> Result<f64> {
    atypical_mass_with_cap(source, n, gamma, DEFAULT_STATE_CAP)
}

pub fn atypical_mass_with_cap(source: &Pmf, n: usize, gamma: f64, cap: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "blocklength must be positive".into(),
        ));
    }
    check_cap(
        "atypical mass enumeration",
        state_count(source.support_size(), n),
        cap,
    )?;
    let test = TypicalityTest::new(source, gamma);
    let mut outside = Vec::new();
    source.iid(n).for_each(cap, |_, counts, p| {
        if p > 0.0 && !test.accepts_counts(counts) {
            outside.push(p);
        }
    })?;
    Ok(crate::prob::neumaier_sum(outside))
}

/// Monte Carlo estimate of `Pr{S^n not in T}` with a 95% interval.
pub fn atypical_mass_mc(
    source: &Pmf,
    n: usize,
    gamma: f64,
    trials: u64,
    rng: &RandomStream,
) -> ProportionEstimate {
    let test = TypicalityTest::new(source, gamma);
    let sampler = source.sampler();
    let k = source.support_size();
    let hits = parallel_count(trials, rng, |r| {
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[sampler.sample(r)] += 1;
        }
        !test.accepts_counts(&counts)
    });
    ProportionEstimate::from_counts(hits, trials)
}
