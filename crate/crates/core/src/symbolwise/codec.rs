use crate::adversary::{ForgeryClass, ImpersonationModel, ShareSimulator, Target};
use crate::prob::{check_cap, mutual_information, pushforward, JointPmf, Pmf, Sampler};
use crate::rng::RandomStream;
use crate::{DecodeOutcome, Error, Result};

use super::base::{validate_base, BaseScheme, BaseValidation, ModularScheme};
use super::counting::{
    class_count_distribution, composition_count, for_each_composition, multinomial,
};

/// Per-pair scores closer than this are merged into one class.
const SCORE_MERGE: f64 = 1e-12;

/// Limit on the number of forged type classes enumerated by the generic
/// attack evaluator.
pub const FORGED_TYPE_CAP: u64 = 1 << 20;

/// The base scheme applied symbol by symbol, with a likelihood-ratio test on
/// the share pair.
///
/// A pair `(x^n, y^n)` is accepted when
/// `(1/n) sum_i log2 P_XY(x_i, y_i) / (P_X(x_i) P_Y(y_i)) > I(X;Y) - gamma`.
/// The per-pair log ratios take finitely many values; scores are summed over
/// those classes in a fixed order, so the verdict depends only on the class
/// counts.
#[derive(Debug, Clone)]
pub struct SymbolwiseCodec<B: BaseScheme> {
    base: B,
    source: Pmf,
    n: usize,
    gamma: f64,
    validation: BaseValidation,
    p_xy: JointPmf,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
    i_xy: f64,
    /// Class of each pair `x * |Y| + y`; `None` for zero-probability pairs.
    pair_class: Vec<Option<usize>>,
    class_values: Vec<f64>,
    source_sampler: Sampler,
}

impl<B: BaseScheme> SymbolwiseCodec<B> {
    /// Fails with [`Error::InvalidBaseScheme`] unless the base scheme passes
    /// [`validate_base`] for `source`.
    pub fn new(base: B, source: Pmf, n: usize, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "blocklength must be positive".into(),
            ));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid gamma {gamma}")));
        }
        let validation = validate_base(&base, &source)?;
        if !validation.passed() {
            let names: Vec<&str> = validation.failures.iter().map(|c| c.name()).collect();
            return Err(Error::InvalidBaseScheme(names.join(", ")));
        }
        let src = JointPmf::product(&[&source, &Pmf::uniform(base.key_size())])?;
        let p_xy = pushforward(&src, &[base.x_size(), base.y_size()], |t| {
            let (x, y) = base.encode(t[0], t[1]);
            Some(vec![x, y])
        })?;
        let p_x = p_xy.marginal(&[0]).probs().to_vec();
        let p_y = p_xy.marginal(&[1]).probs().to_vec();
        let i_xy = mutual_information(&p_xy);

        let ny = base.y_size();
        let raw: Vec<Option<f64>> = p_xy
            .probs()
            .iter()
            .enumerate()
            .map(|(flat, &p)| (p > 0.0).then(|| (p / (p_x[flat / ny] * p_y[flat % ny])).log2()))
            .collect();
        let mut sorted: Vec<f64> = raw.iter().flatten().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let mut class_values: Vec<f64> = Vec::new();
        for v in sorted {
            if class_values
                .last()
                .is_none_or(|&last| v - last > SCORE_MERGE)
            {
                class_values.push(v);
            }
        }
        let pair_class = raw
            .iter()
            .map(|v| {
                v.map(|v| {
                    class_values
                        .iter()
                        .rposition(|&c| c <= v + SCORE_MERGE)
                        .expect("every value has a class")
                })
            })
            .collect();
        let source_sampler = source.sampler();
        Ok(Self {
            base,
            source,
            n,
            gamma,
            validation,
            p_xy,
            p_x,
            p_y,
            i_xy,
            pair_class,
            class_values,
            source_sampler,
        })
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn source(&self) -> &Pmf {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn validation(&self) -> &BaseValidation {
        &self.validation
    }

    /// Per-symbol joint of the shares.
    pub fn pair_joint(&self) -> &JointPmf {
        &self.p_xy
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    /// `I(X;Y)` of one symbol, the correlation level.
    pub fn correlation_level(&self) -> f64 {
        self.i_xy
    }

    /// Distinct per-pair log ratios, ascending.
    pub fn class_values(&self) -> &[f64] {
        &self.class_values
    }

    /// Acceptance threshold on the summed score: `n (I(X;Y) - gamma)`.
    pub fn threshold_sum(&self) -> f64 {
        self.n as f64 * (self.i_xy - self.gamma)
    }

    pub fn class_of(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.base.x_size() || y >= self.base.y_size() {
            return None;
        }
        self.pair_class[x * self.base.y_size() + y]
    }

    /// Class counts of a pair of sequences; `None` if some pair has
    /// probability zero or lies outside the alphabets.
    pub fn class_counts(&self, x: &[usize], y: &[usize]) -> Option<Vec<u32>> {
        if x.len() != y.len() {
            return None;
        }
        let mut counts = vec![0u32; self.class_values.len()];
        for (&a, &b) in x.iter().zip(y) {
            counts[self.class_of(a, b)?] += 1;
        }
        Some(counts)
    }

    /// Summed score of a count vector, accumulated in class order.
    pub fn score_sum(&self, counts: &[u32]) -> f64 {
        counts
            .iter()
            .zip(&self.class_values)
            .map(|(&c, &v)| c as f64 * v)
            .sum()
    }

    fn count_accepted(&self, counts: &[u32]) -> bool {
        self.score_sum(counts) > self.threshold_sum()
    }

    pub fn encode_n(&self, secret: &[usize], key: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        if secret.len() != self.n || key.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "secret and key must have length {}",
                self.n
            )));
        }
        if secret.iter().any(|&s| s >= self.base.secret_size())
            || key.iter().any(|&u| u >= self.base.key_size())
        {
            return Err(Error::InvalidInput("symbol outside its alphabet".into()));
        }
        Ok(secret
            .iter()
            .zip(key)
            .map(|(&s, &u)| self.base.encode(s, u))
            .unzip())
    }

    /// Average log-likelihood ratio; minus infinity if any pair is
    /// impossible or the lengths differ from `n`.
    pub fn llr_score(&self, x: &[usize], y: &[usize]) -> f64 {
        if x.len() != self.n {
            return f64::NEG_INFINITY;
        }
        match self.class_counts(x, y) {
            Some(c) => self.score_sum(&c) / self.n as f64,
            None => f64::NEG_INFINITY,
        }
    }

    pub fn accepts_n(&self, x: &[usize], y: &[usize]) -> bool {
        x.len() == self.n
            && self
                .class_counts(x, y)
                .is_some_and(|c| self.count_accepted(&c))
    }

    /// Errors with [`Error::Invariant`] if the base decoder fails on an
    /// accepted pair, which a validated base scheme never does.
    pub fn decode_n(&self, x: &[usize], y: &[usize]) -> Result<DecodeOutcome> {
        if !self.accepts_n(x, y) {
            return Ok(DecodeOutcome::Reject);
        }
        x.iter()
            .zip(y)
            .map(|(&a, &b)| {
                self.base.decode(a, b).ok_or_else(|| {
                    Error::Invariant(format!(
                        "base decoder undefined on accepted pair ({a}, {b})"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(DecodeOutcome::Secret)
    }

    /// Per-position class distribution for a legitimate pair.
    fn legit_class_probs(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.class_values.len()];
        for (flat, &p) in self.p_xy.probs().iter().enumerate() {
            if let Some(c) = self.pair_class[flat] {
                q[c] += p;
            }
        }
        q
    }

    /// `Pr{(X^n, Y^n) accepted}` for legitimate shares.
    pub fn legit_acceptance(&self) -> Result<f64> {
        let q = self.legit_class_probs();
        let dist = class_count_distribution(&[(&q, self.n)], q.len())?;
        Ok(dist
            .iter()
            .filter(|(k, _)| self.count_accepted(k))
            .map(|(_, p)| p)
            .sum::<f64>()
            .min(1.0))
    }

    /// Exact figures. The i.i.d. structure makes every block quantity `n`
    /// times its per-symbol value. For a validated base scheme, accepted
    /// legitimate pairs always decode correctly, so the decoding error
    /// equals the rejection probability.
    pub fn exact_quantities(&self) -> Result<SymbolwiseQuantities> {
        let alpha = (1.0 - self.legit_acceptance()?).max(0.0);
        let nf = self.n as f64;
        let v = &self.validation;
        let log = |k: usize| (k as f64).log2();
        Ok(SymbolwiseQuantities {
            n: self.n,
            p_e: alpha,
            alpha,
            i_xy_per_symbol: self.i_xy,
            i_sx: nf * (v.h_s - v.h_s_given_x).max(0.0),
            i_sy: nf * (v.h_s - v.h_s_given_y).max(0.0),
            h_s: nf * v.h_s,
            h_x: nf * crate::prob::entropy_of(&self.p_x),
            h_y: nf * crate::prob::entropy_of(&self.p_y),
            h_s_given_x: nf * v.h_s_given_x,
            h_s_given_y: nf * v.h_s_given_y,
            h_s_given_xy: nf * v.h_s_given_xy,
            rate_x: log(self.base.x_size()),
            rate_y: log(self.base.y_size()),
            rate_u: log(self.base.key_size()),
        })
    }

    /// Draws a secret and key and returns `(secret, x, y)`.
    pub fn sample_shares(&self, rng: &mut RandomStream) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut s = Vec::with_capacity(self.n);
        let mut x = Vec::with_capacity(self.n);
        let mut y = Vec::with_capacity(self.n);
        let key_size = self.base.key_size() as u64;
        for _ in 0..self.n {
            let si = self.source_sampler.sample(rng);
            let u = rng.below(key_size) as usize;
            let (a, b) = self.base.encode(si, u);
            s.push(si);
            x.push(a);
            y.push(b);
        }
        (s, x, y)
    }

    /// Generic exact attack evaluator (class-count DP per forged type).
    pub fn attack_model(&self) -> SymbolwiseAttack<'_, B> {
        SymbolwiseAttack { codec: self }
    }
}

impl SymbolwiseCodec<ModularScheme> {
    fn secret_type_sum<F>(&self, weight: F) -> f64
    where
        F: Fn(&[usize]) -> f64,
    {
        let ms = self.base.secret_size();
        // pairs (s, 0) represent every pair whose sum is s
        let class: Vec<Option<usize>> = (0..ms).map(|s| self.class_of(s, 0)).collect();
        let mut total = 0.0;
        for_each_composition(self.n, ms, |c| {
            let mut counts = vec![0u32; self.class_values.len()];
            for (s, &cs) in c.iter().enumerate() {
                if cs > 0 {
                    match class[s] {
                        Some(j) => counts[j] += cs as u32,
                        None => return,
                    }
                }
            }
            if self.count_accepted(&counts) {
                total += weight(c);
            }
        });
        total
    }

    /// Acceptance probability of any single forged share, by counting the
    /// accepted types of the decoded secret `x ⊕ y`, which is uniform on
    /// `{0, .., M-1}^n` under a blind forgery.
    pub fn fstar_forgery_acceptance(&self) -> Result<f64> {
        check_cap(
            "secret type enumeration",
            composition_count(self.n, self.base.secret_size()),
            FORGED_TYPE_CAP,
        )?;
        let m = self.base.modulus() as f64;
        let scale = m.powi(-(self.n as i32));
        Ok(self.secret_type_sum(multinomial) * scale)
    }

    /// Legitimate acceptance probability by summing `P_{S^n}` over the
    /// accepted secret types.
    pub fn fstar_legit_acceptance(&self) -> Result<f64> {
        check_cap(
            "secret type enumeration",
            composition_count(self.n, self.base.secret_size()),
            FORGED_TYPE_CAP,
        )?;
        let p = self.source.probs();
        Ok(self.secret_type_sum(|c| {
            multinomial(c)
                * c.iter()
                    .zip(p)
                    .map(|(&k, &q)| q.powi(k as i32))
                    .product::<f64>()
        }))
    }

    /// Attack evaluator using [`Self::fstar_forgery_acceptance`].
    pub fn fstar_attack_model(&self) -> FstarAttack<'_> {
        FstarAttack { codec: self }
    }
}

/// Exact figures of a symbolwise codec. Information quantities are block
/// totals in bits; rates are per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolwiseQuantities {
    pub n: usize,
    pub p_e: f64,
    pub alpha: f64,
    pub i_xy_per_symbol: f64,
    pub i_sx: f64,
    pub i_sy: f64,
    pub h_s: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_s_given_x: f64,
    pub h_s_given_y: f64,
    pub h_s_given_xy: f64,
    pub rate_x: f64,
    pub rate_y: f64,
    pub rate_u: f64,
}

/// Generic evaluator: forged sequences of the same type have the same
/// acceptance probability, which is computed by a class-count DP.
pub struct SymbolwiseAttack<'a, B: BaseScheme> {
    codec: &'a SymbolwiseCodec<B>,
}

impl<B: BaseScheme> ImpersonationModel for SymbolwiseAttack<'_, B> {
    type Share = Vec<usize>;

    fn forged_classes(&self, target: Target) -> Result<Vec<ForgeryClass<Vec<usize>>>> {
        let c = self.codec;
        let (forged_size, forged_p, real_p) = match target {
            Target::X => (c.base.x_size(), &c.p_x, &c.p_y),
            Target::Y => (c.base.y_size(), &c.p_y, &c.p_x),
        };
        check_cap(
            "forged type enumeration",
            composition_count(c.n, forged_size),
            FORGED_TYPE_CAP,
        )?;
        let classes = c.class_values.len();
        // per forged symbol: class distribution against the real share
        let q: Vec<Vec<f64>> = (0..forged_size)
            .map(|a| {
                let mut q = vec![0.0; classes];
                for (r, &pr) in real_p.iter().enumerate() {
                    let cls = match target {
                        Target::X => c.class_of(a, r),
                        Target::Y => c.class_of(r, a),
                    };
                    if let Some(j) = cls {
                        q[j] += pr;
                    }
                }
                q
            })
            .collect();
        let mut out = Vec::new();
        let mut failure = None;
        for_each_composition(c.n, forged_size, |t| {
            if failure.is_some() {
                return;
            }
            let steps: Vec<(&[f64], usize)> = t
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(a, &k)| (q[a].as_slice(), k))
                .collect();
            let dist = match class_count_distribution(&steps, classes) {
                Ok(d) => d,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let acceptance: f64 = dist
                .iter()
                .filter(|(k, _)| c.count_accepted(k))
                .map(|(_, p)| p)
                .sum();
            let representative: Vec<usize> = t
                .iter()
                .enumerate()
                .flat_map(|(a, &k)| std::iter::repeat_n(a, k))
                .collect();
            let legit_mass = multinomial(t)
                * t.iter()
                    .zip(forged_p.iter())
                    .map(|(&k, &p)| p.powi(k as i32))
                    .product::<f64>();
            out.push(ForgeryClass {
                representative,
                acceptance: acceptance.min(1.0),
                legit_mass,
            });
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// Evaluator for the modular scheme: every forgery is equally good.
pub struct FstarAttack<'a> {
    codec: &'a SymbolwiseCodec<ModularScheme>,
}

impl ImpersonationModel for FstarAttack<'_> {
    type Share = Vec<usize>;

    fn forged_classes(&self, _target: Target) -> Result<Vec<ForgeryClass<Vec<usize>>>> {
        Ok(vec![ForgeryClass {
            representative: vec![0; self.codec.n],
            acceptance: self.codec.fstar_forgery_acceptance()?,
            legit_mass: 1.0,
        }])
    }
}

impl<B: BaseScheme> ShareSimulator for SymbolwiseCodec<B> {
    type Share = Vec<usize>;

    fn sample_shares(&self, rng: &mut RandomStream) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        SymbolwiseCodec::sample_shares(self, rng)
    }

    fn accepts(&self, x: &Vec<usize>, y: &Vec<usize>) -> bool {
        self.accepts_n(x, y)
    }

    fn decode(&self, x: &Vec<usize>, y: &Vec<usize>) -> DecodeOutcome {
        // validated base schemes never fail on accepted pairs
        self.decode_n(x, y).unwrap_or(DecodeOutcome::Reject)
    }
}
