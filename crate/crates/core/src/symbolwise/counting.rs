//! Exact acceptance probabilities for additive scores.
//!
//! The test statistic is a sum of per-position values drawn from a finite
//! set of classes, so it is determined by the vector of class counts. The
//! distributions here are over those count vectors.

use std::collections::BTreeMap;

use crate::prob::check_cap;
use crate::Result;

/// Ceiling on the number of distinct count vectors tracked at once.
pub const COUNT_STATE_CAP: u64 = 1 << 22;

/// Calls `f` on every vector of `parts` non-negative integers summing to
/// `total`, in lexicographic order.
pub fn for_each_composition<F: FnMut(&[usize])>(total: usize, parts: usize, mut f: F) {
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut c = vec![0usize; parts];
    fn rec<F: FnMut(&[usize])>(c: &mut [usize], pos: usize, left: usize, f: &mut F) {
        if pos + 1 == c.len() {
            c[pos] = left;
            f(c);
            return;
        }
        for v in 0..=left {
            c[pos] = v;
            rec(c, pos + 1, left - v, f);
        }
    }
    rec(&mut c, 0, total, &mut f);
}

/// Number of compositions of `total` into `parts` parts, saturating.
pub fn composition_count(total: usize, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    binomial(total + parts - 1, parts - 1)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// `n! / prod(c_i!)` as a float.
pub fn multinomial(counts: &[usize]) -> f64 {
    let mut result = 1.0f64;
    let mut seen = 0usize;
    for &c in counts {
        for i in 1..=c {
            seen += 1;
            result = result * seen as f64 / i as f64;
        }
    }
    result
}

/// Distribution of class-count vectors after a sequence of independent
/// positions. Each step is a per-position class distribution together with
/// how many positions use it. Mass not assigned to any class (a score of
/// minus infinity) is dropped.
pub fn class_count_distribution(
    steps: &[(&[f64], usize)],
    classes: usize,
) -> Result<BTreeMap<Vec<u32>, f64>> {
    let mut dist: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    dist.insert(vec![0; classes], 1.0);
    for &(q, reps) in steps {
        for _ in 0..reps {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (key, &p) in &dist {
                for (j, &qj) in q.iter().enumerate() {
                    if qj > 0.0 {
                        let mut k = key.clone();
                        k[j] += 1;
                        *next.entry(k).or_insert(0.0) += p * qj;
                    }
                }
            }
            check_cap(
                "score distribution states",
                next.len() as u128,
                COUNT_STATE_CAP,
            )?;
            dist = next;
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_composition(2, 3, |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0]
            ]
        );
        assert_eq!(composition_count(2, 3), 6);
        assert_eq!(composition_count(8, 4), 165);
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[2, 1, 1]), 12.0);
        assert_eq!(multinomial(&[5]), 1.0);
        let total: f64 = {
            let mut t = 0.0;
            for_each_composition(6, 3, |c| t += multinomial(c));
            t
        };
        assert_eq!(total, 729.0);
    }

    #[test]
    fn dp_matches_binomial() {
        let q = [0.25, 0.75];
        let d = class_count_distribution(&[(&q, 4)], 2).unwrap();
        for (k, p) in d {
            let expect = multinomial(&[k[0] as usize, k[1] as usize])
                * 0.25f64.powi(k[0] as i32)
                * 0.75f64.powi(k[1] as i32);
            assert!((p - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn dropped_mass() {
        let q = [0.5];
        let d = class_count_distribution(&[(&q, 3)], 1).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[&vec![3]] - 0.125).abs() < 1e-15);
    }
}
