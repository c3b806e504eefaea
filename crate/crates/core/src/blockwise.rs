//! Blockwise scheme built on the typical set.
//!
//! A block `s^n` is mapped to `Z = xi_plus(s^n)` in `{0, .., M_n}`. With
//! uniform keys `u_L < L_n` and `u_M <= M_n` the shares are
//!
//! ```text
//! X = (u_L, (Z - u_M) mod (M_n + 1))      Y = (u_L, u_M)
//! ```
//!
//! The decoder accepts when the tags agree and the recovered index is not the
//! sentinel `M_n`. Each share alone is independent of the secret; the tag
//! makes a blind forgery of either share succeed with probability at most
//! `1 / L_n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::{ForgeryClass, ImpersonationModel, ShareSimulator, Target};
use crate::prob::{
    check_cap, chunked_map, entropy_of, mutual_information_from_conditionals, neumaier_sum,
    seq_from_index, Pmf, DEFAULT_STATE_CAP,
};
use crate::rng::RandomStream;
use crate::typicality::TypicalIndex;
use crate::{DecodeOutcome, Error, Result};

/// Largest supported `n * ell`; keeps `L_n` exactly representable.
pub const MAX_TAG_BITS: f64 = 40.0;

/// Work limit for the exact evaluators, in elementary steps.
pub const DEFAULT_WORK_CAP: u64 = 1 << 28;

/// `floor(2^(n * ell))`.
///
/// The integer part of the exponent is applied as an exact shift and only the
/// fractional part goes through `exp2`, so the result is exact whenever
/// `n * ell` is an integer.
pub fn tag_count(n: usize, ell: f64) -> Result<u64> {
    if !(ell >= 0.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "correlation level must be a finite non-negative number, got {ell}"
        )));
    }
    let bits = n as f64 * ell;
    if bits > MAX_TAG_BITS {
        return Err(Error::InvalidParameter(format!(
            "n * ell = {bits} exceeds {MAX_TAG_BITS} bits"
        )));
    }
    let whole = bits.floor();
    let frac = bits - whole;
    let base = 1u64 << whole as u32;
    if frac == 0.0 {
        Ok(base)
    } else {
        Ok((frac.exp2() * base as f64).floor() as u64)
    }
}

#[derive(Debug, Clone)]
pub struct BlockwiseParams {
    ell: f64,
    l_n: u64,
    index: TypicalIndex,
}

impl BlockwiseParams {
    pub fn new(source: &Pmf, n: usize, ell: f64, gamma: f64) -> Result<Self> {
        Self::from_index(TypicalIndex::build(source, n, gamma)?, ell)
    }

    pub fn from_index(index: TypicalIndex, ell: f64) -> Result<Self> {
        let l_n = tag_count(index.n(), ell)?;
        Ok(Self { ell, l_n, index })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn gamma(&self) -> f64 {
        self.index.gamma()
    }

    pub fn source(&self) -> &Pmf {
        self.index.source()
    }

    /// `L_n`, the number of tag values.
    pub fn l_n(&self) -> u64 {
        self.l_n
    }

    /// `M_n`, the typical-set size.
    pub fn m_n(&self) -> u64 {
        self.index.size()
    }

    /// `M_n + 1`, the modulus of the index component.
    pub fn modulus(&self) -> u64 {
        self.m_n() + 1
    }

    pub fn index(&self) -> &TypicalIndex {
        &self.index
    }

    /// `L_n (M_n + 1)`, the size of each share alphabet and of the key space.
    pub fn share_alphabet_size(&self) -> u128 {
        self.l_n as u128 * self.modulus() as u128
    }

    /// `(1/n) log2 (L_n (M_n + 1))`, common to both shares and the key.
    pub fn rate(&self) -> f64 {
        ((self.l_n as f64).log2() + (self.modulus() as f64).log2()) / self.n() as f64
    }

    /// `H(S) + ell + gamma_n + 1/n`.
    pub fn rate_upper_bound(&self) -> f64 {
        self.source().entropy() + self.ell + self.gamma() + 1.0 / self.n() as f64
    }

    fn share_in_range(&self, s: &BlockShare) -> bool {
        s.l_idx < self.l_n && s.m_idx <= self.m_n()
    }

    /// `(z - u) mod (M_n + 1)`.
    fn mask(&self, z: u64, u: u64) -> u64 {
        let m = self.modulus();
        (z + m - u) % m
    }
}

/// A share `(tag, index)` with `tag < L_n` and `index <= M_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockShare {
    pub l_idx: u64,
    pub m_idx: u64,
}

impl BlockShare {
    pub fn new(l_idx: u64, m_idx: u64) -> Self {
        Self { l_idx, m_idx }
    }
}

impl fmt::Display for BlockShare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.l_idx, self.m_idx)
    }
}

impl FromStr for BlockShare {
    type Err = Error;

    /// Parses `tag:index`.
    fn from_str(s: &str) -> Result<Self> {
        let (l, m) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("expected tag:index, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidInput(format!("bad share component {t:?}: {e}")))
        };
        Ok(Self::new(parse(l)?, parse(m)?))
    }
}

/// The key `(u_L, u_M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRandomness {
    pub u_l: u64,
    pub u_m: u64,
}

impl BlockRandomness {
    pub fn new(u_l: u64, u_m: u64) -> Self {
        Self { u_l, u_m }
    }

    /// Uniform key for `params`.
    pub fn sample(params: &BlockwiseParams, rng: &mut RandomStream) -> Self {
        let u_l = rng.below(params.l_n());
        let u_m = rng.below(params.modulus());
        Self { u_l, u_m }
    }
}

/// Splits a secret block into two shares. Atypical blocks are allowed and
/// produce shares that decode to [`DecodeOutcome::Reject`].
pub fn encode(
    params: &BlockwiseParams,
    secret: &[usize],
    key: BlockRandomness,
) -> Result<(BlockShare, BlockShare)> {
    if secret.len() != params.n() {
        return Err(Error::InvalidInput(format!(
            "secret has length {}, expected {}",
            secret.len(),
            params.n()
        )));
    }
    if let Some(&bad) = secret
        .iter()
        .find(|&&s| s >= params.source().support_size())
    {
        return Err(Error::InvalidInput(format!(
            "symbol {bad} outside the source alphabet"
        )));
    }
    if key.u_l >= params.l_n() || key.u_m > params.m_n() {
        return Err(Error::InvalidInput(format!(
            "key ({}, {}) outside [0, {}) x [0, {}]",
            key.u_l,
            key.u_m,
            params.l_n(),
            params.m_n()
        )));
    }
    let z = params.index().xi_plus(secret).value();
    Ok((
        BlockShare::new(key.u_l, params.mask(z, key.u_m)),
        BlockShare::new(key.u_l, key.u_m),
    ))
}

/// Membership in the acceptance region. Shares outside the alphabet are
/// never accepted.
pub fn accepts(params: &BlockwiseParams, x: &BlockShare, y: &BlockShare) -> bool {
    params.share_in_range(x)
        && params.share_in_range(y)
        && x.l_idx == y.l_idx
        && (x.m_idx + y.m_idx) % params.modulus() != params.m_n()
}

pub fn decode(params: &BlockwiseParams, x: &BlockShare, y: &BlockShare) -> DecodeOutcome {
    if !accepts(params, x, y) {
        return DecodeOutcome::Reject;
    }
    let z = (x.m_idx + y.m_idx) % params.modulus();
    match params.index().unrank(z) {
        Ok(s) => DecodeOutcome::Secret(s),
        Err(_) => DecodeOutcome::Reject,
    }
}

/// Exact performance figures of one parameter set. Information quantities
/// are totals over the block, in bits.
#[derive(Debug, Clone)]
pub struct BlockwiseQuantities {
    pub n: usize,
    pub l_n: u64,
    pub m_n: u64,
    /// `Pr{decode(X, Y) != S^n}`.
    pub p_e: f64,
    /// `Pr{(X, Y) not accepted}` for legitimate shares.
    pub alpha: f64,
    pub h_s: f64,
    pub i_sx: f64,
    pub i_sy: f64,
    pub i_xy: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_s_given_x: f64,
    pub h_s_given_y: f64,
    pub h_s_given_xy: f64,
    pub rate_x: f64,
    pub rate_y: f64,
    pub rate_u: f64,
    /// Distribution of the index component of `X` (that of `Y` is uniform).
    pub p_x_index: Vec<f64>,
    pub p_y_index: Vec<f64>,
}

impl BlockwiseQuantities {
    /// Attack evaluator backed by these quantities.
    pub fn attack_model<'a>(&'a self, params: &'a BlockwiseParams) -> BlockwiseAttack<'a> {
        BlockwiseAttack {
            params,
            quantities: self,
        }
    }
}

pub fn exact_quantities(params: &BlockwiseParams) -> Result<BlockwiseQuantities> {
    exact_quantities_with_cap(params, DEFAULT_WORK_CAP)
}

/// Computes every figure from the structure `X = (U_L, Z - U_M)`,
/// `Y = (U_L, U_M)` with `U_L`, `U_M`, `S^n` independent:
///
/// * the tag components are uniform, shared, and independent of everything
///   else, so they add `log2 L_n` to `I(X;Y)` and nothing to the secrecy
///   terms;
/// * `(X, Y)` determines `Z` and vice versa (given the key), so
///   `H(S^n | X, Y) = H(S^n | Z)`.
///
/// Secrecy, correlation and the decoding error are each obtained by a
/// separate enumeration. `work_cap` bounds the largest enumeration.
pub fn exact_quantities_with_cap(
    params: &BlockwiseParams,
    work_cap: u64,
) -> Result<BlockwiseQuantities> {
    let n = params.n();
    let k = params.source().support_size();
    let m = params.modulus();
    let modulus = m as usize;
    let l_n = params.l_n();
    let seqs = crate::prob::state_count(k, n);
    check_cap("secret x key enumeration", seqs * m as u128, work_cap)?;
    check_cap("index pair enumeration", m as u128 * m as u128, work_cap)?;

    let p_s = params.source().iid(n).materialize(DEFAULT_STATE_CAP)?;
    let p_s = p_s.probs();
    let z_of: Vec<u64> = (0..p_s.len() as u64)
        .map(|flat| params.index().xi_plus_of_index(flat).value())
        .collect();
    let mut p_z = vec![0.0; modulus];
    for (p, &z) in p_s.iter().zip(&z_of) {
        p_z[z as usize] += p;
    }

    let key_weight = 1.0 / m as f64;
    // I(S^n; X): the index component of X given S^n = s is Z(s) - U_M
    let sx = mutual_information_from_conditionals(modulus, p_s, |s, out| {
        let z = z_of[s];
        for u in 0..m {
            out[params.mask(z, u) as usize] += key_weight;
        }
    });
    // I(S^n; Y): Y's index component is the key itself
    let sy = mutual_information_from_conditionals(modulus, p_s, |_, out| {
        out.iter_mut().for_each(|v| *v += key_weight);
    });
    // I(X_M; Y_M): given Y_M = u, X_M = Z - u with Z independent of u
    let xy = mutual_information_from_conditionals(modulus, &sy.marginal, |u, out| {
        for (z, &pz) in p_z.iter().enumerate() {
            out[params.mask(z as u64, u as u64) as usize] += pz;
        }
    });
    let log_l = (l_n as f64).log2();

    let h_s = entropy_of(p_s);
    let h_s_given_xy = {
        let terms = p_s
            .iter()
            .zip(&z_of)
            .filter(|(p, _)| **p > 0.0)
            .map(|(&p, &z)| -p * (p / p_z[z as usize]).log2());
        neumaier_sum(terms).max(0.0)
    };

    // Decoding error and acceptance over every (secret, key). The tag key
    // is swept in full when affordable; both legitimate shares carry the
    // same tag, so otherwise u_L = 0 stands in for all values.
    let tag_keys = if seqs * m as u128 * l_n as u128 <= work_cap as u128 {
        l_n
    } else {
        1
    };
    let partial = chunked_map(p_s.len(), 64, |lo, hi| {
        let mut err = 0.0;
        let mut rej = 0.0;
        for flat in lo..hi {
            let p = p_s[flat];
            if p == 0.0 {
                continue;
            }
            let secret = seq_from_index(flat as u64, k, n);
            let mut bad = 0u64;
            let mut rejected = 0u64;
            for u_l in 0..tag_keys {
                for u_m in 0..m {
                    let (x, y) = encode(params, &secret, BlockRandomness::new(u_l, u_m))
                        .expect("enumerated inputs are in range");
                    if !accepts(params, &x, &y) {
                        rejected += 1;
                    }
                    if decode(params, &x, &y).secret() != Some(&secret[..]) {
                        bad += 1;
                    }
                }
            }
            let keys = (tag_keys * m) as f64;
            err += p * bad as f64 / keys;
            rej += p * rejected as f64 / keys;
        }
        (err, rej)
    });
    let p_e = neumaier_sum(partial.iter().map(|t| t.0));
    let alpha = neumaier_sum(partial.iter().map(|t| t.1));

    let rate = params.rate();
    Ok(BlockwiseQuantities {
        n,
        l_n,
        m_n: params.m_n(),
        p_e,
        alpha,
        h_s,
        i_sx: sx.mutual_information,
        i_sy: sy.mutual_information,
        i_xy: log_l + xy.mutual_information,
        h_x: log_l + entropy_of(&sx.marginal),
        h_y: log_l + entropy_of(&sy.marginal),
        h_s_given_x: (h_s - sx.mutual_information).max(0.0),
        h_s_given_y: (h_s - sy.mutual_information).max(0.0),
        h_s_given_xy,
        rate_x: rate,
        rate_y: rate,
        rate_u: rate,
        p_x_index: sx.marginal,
        p_y_index: sy.marginal,
    })
}

/// Exact impersonation evaluator. A forged `(a, b)` against `X` is accepted
/// with probability `Pr{Y_L = a} * Pr{(b + Y_M) mod (M_n + 1) != M_n}`.
pub struct BlockwiseAttack<'a> {
    params: &'a BlockwiseParams,
    quantities: &'a BlockwiseQuantities,
}

impl ImpersonationModel for BlockwiseAttack<'_> {
    type Share = BlockShare;

    fn forged_classes(&self, target: Target) -> Result<Vec<ForgeryClass<BlockShare>>> {
        check_cap(
            "forged share enumeration",
            self.params.share_alphabet_size(),
            DEFAULT_STATE_CAP,
        )?;
        let (forged, real) = match target {
            Target::X => (&self.quantities.p_x_index, &self.quantities.p_y_index),
            Target::Y => (&self.quantities.p_y_index, &self.quantities.p_x_index),
        };
        let l_n = self.params.l_n();
        let m = self.params.modulus();
        let tag_prob = 1.0 / l_n as f64;
        let real_total = neumaier_sum(real.iter().copied());
        let mut out = Vec::with_capacity(self.params.share_alphabet_size() as usize);
        for a in 0..l_n {
            for b in 0..m {
                // the only rejected partner index is (M_n - b) mod (M_n + 1)
                let blocked = ((m - 1) + m - b) % m;
                out.push(ForgeryClass {
                    representative: BlockShare::new(a, b),
                    acceptance: tag_prob * (real_total - real[blocked as usize]),
                    legit_mass: tag_prob * forged[b as usize],
                });
            }
        }
        Ok(out)
    }
}

impl ShareSimulator for BlockwiseParams {
    type Share = BlockShare;

    fn sample_shares(&self, rng: &mut RandomStream) -> (Vec<usize>, BlockShare, BlockShare) {
        let secret = self.source().iid(self.n()).sample(rng);
        let key = BlockRandomness::sample(self, rng);
        let (x, y) = encode(self, &secret, key).expect("sampled inputs are in range");
        (secret, x, y)
    }

    fn accepts(&self, x: &BlockShare, y: &BlockShare) -> bool {
        accepts(self, x, y)
    }

    fn decode(&self, x: &BlockShare, y: &BlockShare) -> DecodeOutcome {
        decode(self, x, y)
    }
}
