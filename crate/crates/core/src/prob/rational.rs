//! Exact-rational joint distributions.
//!
//! Probabilities are arbitrary-precision fractions, so marginals, products and
//! likelihood ratios carry no rounding error. Only the final logarithms are
//! floating point. Tables are limited to [`RATIONAL_STATE_CAP`] states; this
//! mode exists to cross-check the floating-point evaluators on small cases.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{check_cap, JointPmf};
use crate::{Error, Result};

pub const RATIONAL_STATE_CAP: u64 = 1 << 16;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `log2` of a positive big integer, accurate to double precision.
fn log2_int(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("fits in f64").log2() + shift as f64
}

/// `log2` of a positive rational.
///
/// # Panics
/// If `r <= 0`.
pub fn log2_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "log2 of non-positive rational");
    log2_int(r.numer()) - log2_int(r.denom())
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalJoint {
    dims: Vec<usize>,
    probs: Vec<BigRational>,
}

impl RationalJoint {
    pub fn new(dims: Vec<usize>, probs: Vec<BigRational>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDistribution(format!(
                "invalid axis sizes {dims:?}"
            )));
        }
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        check_cap("rational joint", total, RATIONAL_STATE_CAP)?;
        if total as usize != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "axes {dims:?} need {total} entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let sum: BigRational = probs.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { dims, probs })
    }

    /// Independent product of rational marginals.
    pub fn product(parts: &[Vec<BigRational>]) -> Result<Self> {
        let dims: Vec<usize> = parts.iter().map(Vec::len).collect();
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        check_cap("rational joint", total, RATIONAL_STATE_CAP)?;
        let mut probs = Vec::with_capacity(total as usize);
        for_each_tuple(&dims, |t| {
            let p = t
                .iter()
                .zip(parts)
                .fold(BigRational::one(), |acc, (&i, part)| acc * &part[i]);
            probs.push(p);
        });
        Self::new(dims, probs)
    }

    /// Joint of (inputs, outputs) for a deterministic map; see
    /// [`super::induce_joint`].
    pub fn induce<F>(&self, out_dims: &[usize], map: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Option<Vec<usize>>,
    {
        let dims: Vec<usize> = self.dims.iter().chain(out_dims).copied().collect();
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        check_cap("rational joint", total, RATIONAL_STATE_CAP)?;
        let out_size: usize = out_dims.iter().product();
        let mut probs = vec![BigRational::zero(); total as usize];
        let mut failure = None;
        let mut flat = 0usize;
        for_each_tuple(&self.dims, |t| {
            let p = &self.probs[flat];
            let base = flat * out_size;
            flat += 1;
            if p.is_zero() || failure.is_some() {
                return;
            }
            match map(t).filter(|o| {
                o.len() == out_dims.len() && o.iter().zip(out_dims).all(|(&i, &d)| i < d)
            }) {
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
        Self::new(dims, probs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn marginal(&self, axes: &[usize]) -> Self {
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut probs = vec![BigRational::zero(); dims.iter().product()];
        let mut flat = 0;
        for_each_tuple(&self.dims, |t| {
            let out = axes
                .iter()
                .fold(0usize, |acc, &a| acc * self.dims[a] + t[a]);
            probs[out] += &self.probs[flat];
            flat += 1;
        });
        Self { dims, probs }
    }

    pub fn to_f64(&self) -> Result<JointPmf> {
        JointPmf::new(self.dims.clone(), self.probs.iter().map(to_f64).collect())
    }

    /// The distinct values of `P(a,b) / (P(a) P(b))` over the support of a
    /// two-axis joint.
    pub fn information_density_ratios(&self) -> BTreeSet<BigRational> {
        assert_eq!(self.dims.len(), 2, "needs a two-axis joint");
        let (pa, pb) = self.two_marginals();
        let cols = self.dims[1];
        let mut out = BTreeSet::new();
        for (flat, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                out.insert(p / (&pa[flat / cols] * &pb[flat % cols]));
            }
        }
        out
    }

    /// `I(A;B)` of a two-axis joint, with exact likelihood ratios.
    pub fn mutual_information(&self) -> f64 {
        assert_eq!(self.dims.len(), 2, "needs a two-axis joint");
        let (pa, pb) = self.two_marginals();
        let cols = self.dims[1];
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(flat, p)| {
                let r = p / (&pa[flat / cols] * &pb[flat % cols]);
                to_f64(p) * log2_rational(&r)
            })
            .sum::<f64>()
            .max(0.0)
    }

    /// Exact `(alpha, beta)` of an acceptance region over a two-axis joint.
    pub fn test_errors<R>(&self, region: R) -> (BigRational, BigRational)
    where
        R: Fn(usize, usize) -> bool,
    {
        assert_eq!(self.dims.len(), 2, "needs a two-axis joint");
        let (pa, pb) = self.two_marginals();
        let mut alpha = BigRational::zero();
        let mut beta = BigRational::zero();
        for a in 0..self.dims[0] {
            for b in 0..self.dims[1] {
                if region(a, b) {
                    beta += &pa[a] * &pb[b];
                } else {
                    alpha += &self.probs[a * self.dims[1] + b];
                }
            }
        }
        (alpha, beta)
    }

    fn two_marginals(&self) -> (Vec<BigRational>, Vec<BigRational>) {
        (self.marginal(&[0]).probs, self.marginal(&[1]).probs)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::mutual_information;

    #[test]
    fn rejects_bad_totals() {
        assert!(RationalJoint::new(vec![2], vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(RationalJoint::new(vec![2], vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(RationalJoint::new(vec![1 << 9, 1 << 8], vec![]).is_err());
    }

    #[test]
    fn log2_of_large_rationals() {
        let big = BigInt::from(3u8) << 200usize;
        let r = BigRational::new(big, BigInt::from(1));
        assert!((log2_rational(&r) - (200.0 + 3f64.log2())).abs() < 1e-12);
        assert_eq!(log2_rational(&ratio(1, 8)), -3.0);
    }

    #[test]
    fn agrees_with_float_path() {
        let a = vec![ratio(7, 10), ratio(3, 10)];
        let u = vec![ratio(1, 3); 3];
        let src = RationalJoint::product(&[a, u]).unwrap();
        let j = src
            .induce(&[3, 3], |t| Some(vec![(t[0] + 3 - t[1]) % 3, t[1]]))
            .unwrap();
        let xy = j.marginal(&[2, 3]);
        let exact = xy.mutual_information();
        let float = mutual_information(&xy.to_f64().unwrap());
        assert!((exact - float).abs() < 1e-12);
    }
}
