//! Finite probability distributions and exact information measures.
//!
//! Everything here is in bits, with `0 log 0 = 0` and `0 log (0/0) = 0`.
//! Distributions are validated once at construction, so the measures
//! themselves are infallible.

pub mod rational;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;
use crate::{Error, Result};

/// Default ceiling on the number of states a dense table may hold.
pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

/// Allowed deviation of a probability vector's total from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Mutual information computed in `(-MI_CLAMP, 0)` is floating-point noise and is reported as 0.
const MI_CLAMP: f64 = 1e-9;

/// Number of outer indices handled per parallel work item. Partial results
/// are combined in index order so results never depend on thread scheduling.
const PAR_CHUNK: usize = 256;

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(
            "empty probability vector".into(),
        ));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is {p}, expected a finite non-negative number"
        )));
    }
    let total = neumaier_sum(probs.iter().copied());
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// A probability mass function on `{0, .., k-1}`.
///
/// Deserializes from a plain list of probabilities and is validated on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_probs(&probs)?;
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total = neumaier_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// # Panics
    /// If `k == 0`.
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution over an empty set");
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// # Panics
    /// If `i >= k`.
    pub fn point_mass(k: usize, i: usize) -> Self {
        assert!(i < k, "point mass at {i} outside alphabet of size {k}");
        let mut probs = vec![0.0; k];
        probs[i] = 1.0;
        Self { probs }
    }

    /// Parses a probability list such as `0.7,0.3`, `0.7 0.3` or `[0.7, 0.3]`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let probs: Vec<f64> = if text.starts_with('[') {
            serde_json::from_str(text)
                .map_err(|e| Error::InvalidDistribution(format!("cannot parse {text:?}: {e}")))?
        } else {
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::InvalidDistribution(format!("cannot parse {t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        Self::new(probs)
    }

    /// Alphabet size, including zero-probability symbols.
    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of symbol `i`, zero outside the alphabet.
    pub fn prob(&self, i: usize) -> f64 {
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    pub fn iid(&self, n: usize) -> IidExtension {
        IidExtension::new(self.clone(), n)
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(&self.probs)
    }

    pub fn sample(&self, rng: &mut RandomStream) -> usize {
        sample(self, rng)
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.entropy()
}

/// `h(q) = -q log q - (1-q) log (1-q)`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(q));
    }
    Ok(entropy_of(&[q, 1.0 - q]))
}

/// Draws one symbol by inverse CDF over the stored symbol order.
pub fn sample(p: &Pmf, rng: &mut RandomStream) -> usize {
    let u = rng.next_f64();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &q) in p.probs.iter().enumerate() {
        if q > 0.0 {
            acc += q;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Precomputed inverse-CDF sampler. Draws the same symbols as [`sample`] for
/// the same stream state.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
    symbols: Vec<usize>,
}

impl Sampler {
    fn new(probs: &[f64]) -> Self {
        let mut cumulative = Vec::new();
        let mut symbols = Vec::new();
        let mut acc = 0.0;
        for (i, &q) in probs.iter().enumerate() {
            if q > 0.0 {
                acc += q;
                cumulative.push(acc);
                symbols.push(i);
            }
        }
        Self {
            cumulative,
            symbols,
        }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> usize {
        let u = rng.next_f64();
        let pos = self.cumulative.partition_point(|&c| c <= u);
        self.symbols[pos.min(self.symbols.len() - 1)]
    }
}

/// Row-major index of `seq` over an alphabet of size `k`; the first symbol is
/// the most significant digit, so index order is lexicographic order.
pub fn seq_index(seq: &[usize], k: usize) -> u64 {
    seq.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
}

/// Inverse of [`seq_index`].
pub fn seq_from_index(mut index: u64, k: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in seq.iter_mut().rev() {
        *slot = (index % k as u64) as usize;
        index /= k as u64;
    }
    seq
}

/// `k^n`, saturating.
pub fn state_count(k: usize, n: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(k as u128);
    }
    total
}

pub(crate) fn check_cap(what: &'static str, required: u128, cap: u64) -> Result<()> {
    if required > cap as u128 {
        Err(Error::CapExceeded {
            what,
            required,
            cap,
        })
    } else {
        Ok(())
    }
}

/// The `n`-fold product `P(s^n) = prod_i P(s_i)`, evaluated lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct IidExtension {
    base: Pmf,
    n: usize,
}

impl IidExtension {
    pub fn new(base: Pmf, n: usize) -> Self {
        Self { base, n }
    }

    pub fn base(&self) -> &Pmf {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> u128 {
        state_count(self.base.support_size(), self.n)
    }

    /// Product of the component probabilities, left to right. Zero for
    /// out-of-alphabet symbols or a length mismatch.
    pub fn prob(&self, seq: &[usize]) -> f64 {
        if seq.len() != self.n {
            return 0.0;
        }
        seq.iter().fold(1.0, |acc, &s| acc * self.base.prob(s))
    }

    /// Visits every sequence in lexicographic order together with its symbol
    /// counts and probability.
    pub fn for_each<F>(&self, cap: u64, mut f: F) -> Result<()>
    where
        F: FnMut(&[usize], &[usize], f64),
    {
        check_cap("i.i.d. enumeration", self.num_states(), cap)?;
        let k = self.base.support_size();
        let n = self.n;
        let p = self.base.probs();
        let mut seq = vec![0usize; n];
        let mut counts = vec![0usize; k];
        counts[0] = n;
        // prefix[i] = p(s_0) * .. * p(s_{i-1})
        let mut prefix = vec![1.0f64; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] * p[0];
        }
        loop {
            f(&seq, &counts, prefix[n]);
            // odometer increment
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                counts[seq[pos]] -= 1;
                if seq[pos] + 1 < k {
                    seq[pos] += 1;
                    counts[seq[pos]] += 1;
                    break;
                }
                seq[pos] = 0;
                counts[0] += 1;
            }
            for i in pos..n {
                prefix[i + 1] = prefix[i] * p[seq[i]];
            }
        }
    }

    /// Dense table of all `k^n` probabilities in lexicographic order.
    pub fn materialize(&self, cap: u64) -> Result<Pmf> {
        let mut probs = Vec::with_capacity(self.num_states().min(cap as u128) as usize);
        self.for_each(cap, |_, _, p| probs.push(p))?;
        Pmf::new(probs)
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Vec<usize> {
        let sampler = self.base.sampler();
        (0..self.n).map(|_| sampler.sample(rng)).collect()
    }
}

/// A dense joint distribution over a product of finite axes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDistribution(format!(
                "invalid axis sizes {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if total != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "axes {dims:?} need {total} entries, got {}",
                probs.len()
            )));
        }
        validate_probs(&probs)?;
        Ok(Self { dims, probs })
    }

    pub fn from_fn<F>(dims: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64,
    {
        let total = dims.iter().map(|&d| d as u128).product();
        check_cap("joint table", total, DEFAULT_STATE_CAP)?;
        let mut probs = Vec::with_capacity(total as usize);
        for_each_tuple(&dims, |t| probs.push(f(t)));
        Self::new(dims, probs)
    }

    /// Independent product of the given distributions.
    pub fn product(parts: &[&Pmf]) -> Result<Self> {
        let dims: Vec<usize> = parts.iter().map(|p| p.support_size()).collect();
        Self::from_fn(dims, |t| {
            t.iter()
                .zip(parts)
                .fold(1.0, |acc, (&i, p)| acc * p.prob(i))
        })
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self {
            dims: vec![p.support_size()],
            probs: p.probs().to_vec(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn flat_index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.dims.len());
        tuple
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&i, &d)| acc * d + i)
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        if tuple.len() != self.dims.len() || tuple.iter().zip(&self.dims).any(|(&i, &d)| i >= d) {
            return 0.0;
        }
        self.probs[self.flat_index(tuple)]
    }

    /// Calls `f` for every tuple with positive probability, in row-major order.
    pub fn for_each_support<F>(&self, mut f: F)
    where
        F: FnMut(&[usize], f64),
    {
        let mut flat = 0;
        for_each_tuple(&self.dims, |t| {
            let p = self.probs[flat];
            flat += 1;
            if p > 0.0 {
                f(t, p);
            }
        });
    }

    /// Marginal over `axes`, keeping them in the order given.
    ///
    /// # Panics
    /// If an axis is repeated or out of range.
    pub fn marginal(&self, axes: &[usize]) -> JointPmf {
        check_axes(self.ndim(), axes);
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut probs = vec![0.0; dims.iter().product()];
        let mut flat = 0;
        for_each_tuple(&self.dims, |t| {
            let out = axes
                .iter()
                .fold(0usize, |acc, &a| acc * self.dims[a] + t[a]);
            probs[out] += self.probs[flat];
            flat += 1;
        });
        JointPmf { dims, probs }
    }

    /// All axes merged into one, in row-major order.
    pub fn flatten(&self) -> Pmf {
        Pmf {
            probs: self.probs.clone(),
        }
    }

    /// Joint entropy of all axes.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }
}

fn check_axes(ndim: usize, axes: &[usize]) {
    for (i, &a) in axes.iter().enumerate() {
        assert!(a < ndim, "axis {a} out of range for {ndim} axes");
        assert!(!axes[..i].contains(&a), "axis {a} repeated");
    }
}

fn for_each_tuple<F: FnMut(&[usize])>(dims: &[usize], mut f: F) {
    let mut t = vec![0usize; dims.len()];
    loop {
        f(&t);
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            t[pos] += 1;
            if t[pos] < dims[pos] {
                break;
            }
            t[pos] = 0;
        }
    }
}

/// Mutual information of a row-major `rows x cols` table.
fn mi_table(rows: usize, cols: usize, probs: &[f64]) -> f64 {
    let mut pr = vec![0.0; rows];
    let mut pc = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            let p = probs[r * cols + c];
            pr[r] += p;
            pc[c] += p;
        }
    }
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let p = probs[r * cols + c];
            if p > 0.0 {
                mi += p * (p / (pr[r] * pc[c])).log2();
            }
        }
    }
    clamp_mi(mi)
}

fn clamp_mi(mi: f64) -> f64 {
    if mi < 0.0 && mi > -MI_CLAMP {
        0.0
    } else {
        mi
    }
}

/// `I(A;B)` for a joint over exactly two axes.
///
/// # Panics
/// If the joint does not have two axes.
pub fn mutual_information(j: &JointPmf) -> f64 {
    assert_eq!(j.ndim(), 2, "mutual_information needs a two-axis joint");
    mi_table(j.dims[0], j.dims[1], &j.probs)
}

/// `I(A;B)` where `A` and `B` are groups of axes of `j`.
pub fn mutual_information_between(j: &JointPmf, a: &[usize], b: &[usize]) -> f64 {
    let axes: Vec<usize> = a.iter().chain(b).copied().collect();
    let m = j.marginal(&axes);
    let rows: usize = a.iter().map(|&x| j.dims[x]).product();
    let cols: usize = b.iter().map(|&x| j.dims[x]).product();
    mi_table(rows, cols, &m.probs)
}

/// `H(target | all other axes)`.
pub fn conditional_entropy(j: &JointPmf, target_axis: usize) -> f64 {
    let given: Vec<usize> = (0..j.ndim()).filter(|&a| a != target_axis).collect();
    conditional_entropy_between(j, &[target_axis], &given)
}

/// `H(target | given)` for disjoint axis groups of `j`.
pub fn conditional_entropy_between(j: &JointPmf, target: &[usize], given: &[usize]) -> f64 {
    let axes: Vec<usize> = given.iter().chain(target).copied().collect();
    let m = j.marginal(&axes);
    let rows: usize = given.iter().map(|&x| j.dims[x]).product();
    let cols: usize = target.iter().map(|&x| j.dims[x]).product();
    let mut h = 0.0;
    for r in 0..rows {
        let row = &m.probs[r * cols..(r + 1) * cols];
        let pr: f64 = row.iter().sum();
        for &p in row.iter().filter(|&&p| p > 0.0) {
            h -= p * (p / pr).log2();
        }
    }
    h.max(0.0)
}

/// Joint of `(inputs, outputs)` where outputs are a deterministic function of
/// the inputs. `map` may return `None` only on zero-probability inputs.
pub fn induce_joint<F>(src: &JointPmf, out_dims: &[usize], map: F) -> Result<JointPmf>
where
    F: Fn(&[usize]) -> Option<Vec<usize>>,
{
    let dims: Vec<usize> = src.dims.iter().chain(out_dims).copied().collect();
    let total = dims.iter().map(|&d| d as u128).product();
    check_cap("induced joint", total, DEFAULT_STATE_CAP)?;
    let out_size: usize = out_dims.iter().product();
    let mut probs = vec![0.0; total as usize];
    let mut failure = None;
    let mut flat_in = 0usize;
    for_each_tuple(&src.dims, |t| {
        let p = src.probs[flat_in];
        let base = flat_in * out_size;
        flat_in += 1;
        if p == 0.0 || failure.is_some() {
            return;
        }
        match map(t).filter(|o| valid_tuple(o, out_dims)) {
            Some(o) => {
                let off = o
                    .iter()
                    .zip(out_dims)
                    .fold(0usize, |acc, (&i, &d)| acc * d + i);
                probs[base + off] += p;
            }
            None => failure = Some(t.to_vec()),
        }
    });
    if let Some(t) = failure {
        return Err(Error::MapUndefined(t));
    }
    JointPmf::new(dims, probs)
}

/// Distribution of the outputs alone (the pushforward of `src` through `map`).
pub fn pushforward<F>(src: &JointPmf, out_dims: &[usize], map: F) -> Result<JointPmf>
where
    F: Fn(&[usize]) -> Option<Vec<usize>>,
{
    let total = out_dims.iter().map(|&d| d as u128).product();
    check_cap("pushforward", total, DEFAULT_STATE_CAP)?;
    let mut probs = vec![0.0; total as usize];
    let mut failure = None;
    src.for_each_support(|t, p| {
        if failure.is_some() {
            return;
        }
        match map(t).filter(|o| valid_tuple(o, out_dims)) {
            Some(o) => {
                let off = o
                    .iter()
                    .zip(out_dims)
                    .fold(0usize, |acc, (&i, &d)| acc * d + i);
                probs[off] += p;
            }
            None => failure = Some(t.to_vec()),
        }
    });
    if let Some(t) = failure {
        return Err(Error::MapUndefined(t));
    }
    JointPmf::new(out_dims.to_vec(), probs)
}

fn valid_tuple(t: &[usize], dims: &[usize]) -> bool {
    t.len() == dims.len() && t.iter().zip(dims).all(|(&i, &d)| i < d)
}

/// Result of [`mutual_information_from_conditionals`].
#[derive(Debug, Clone)]
pub struct StreamedInformation {
    pub mutual_information: f64,
    /// Marginal of the conditioned variable `A`.
    pub marginal: Vec<f64>,
}

/// Exact `I(A;B)` for `P(a, b) = p_b[b] * P(a | b)` without materializing the
/// joint. `conditional(b, out)` receives a zeroed buffer of length `a_size`
/// and must fill it with `P(· | b)`. Memory is `O(a_size)` per worker.
pub fn mutual_information_from_conditionals<F>(
    a_size: usize,
    p_b: &[f64],
    conditional: F,
) -> StreamedInformation
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let chunks: Vec<(usize, usize)> = (0..p_b.len())
        .step_by(PAR_CHUNK)
        .map(|lo| (lo, (lo + PAR_CHUNK).min(p_b.len())))
        .collect();

    let partial_marginals: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = vec![0.0; a_size];
            let mut buf = vec![0.0; a_size];
            for b in lo..hi {
                if p_b[b] == 0.0 {
                    continue;
                }
                buf.iter_mut().for_each(|v| *v = 0.0);
                conditional(b, &mut buf);
                for (m, c) in acc.iter_mut().zip(&buf) {
                    *m += p_b[b] * c;
                }
            }
            acc
        })
        .collect();
    let mut marginal = vec![0.0; a_size];
    for part in &partial_marginals {
        for (m, v) in marginal.iter_mut().zip(part) {
            *m += v;
        }
    }

    let partial_mi: Vec<f64> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut buf = vec![0.0; a_size];
            let mut mi = 0.0;
            for b in lo..hi {
                if p_b[b] == 0.0 {
                    continue;
                }
                buf.iter_mut().for_each(|v| *v = 0.0);
                conditional(b, &mut buf);
                let inner: f64 = buf
                    .iter()
                    .zip(&marginal)
                    .filter(|(c, _)| **c > 0.0)
                    .map(|(&c, &m)| c * (c / m).log2())
                    .sum();
                mi += p_b[b] * inner;
            }
            mi
        })
        .collect();
    StreamedInformation {
        mutual_information: clamp_mi(partial_mi.iter().sum()),
        marginal,
    }
}

/// Runs `f` over `0..len` in fixed-size chunks on the rayon pool and returns
/// the per-chunk results in index order.
pub(crate) fn chunked_map<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> T + Sync,
{
    let bounds: Vec<(usize, usize)> = (0..len)
        .step_by(chunk.max(1))
        .map(|lo| (lo, (lo + chunk).min(len)))
        .collect();
    bounds.par_iter().map(|&(lo, hi)| f(lo, hi)).collect()
}
