//! Symmetric multi-indices over a fixed set of base directions.
//!
//! A `MultiIndex` is a vector of non-negative counts, one per base direction;
//! it records how often each direction occurs in a repeated derivative.
//! Entries are `u32`, widths match the number of base directions `n` of the
//! chart, and all arithmetic that can overflow a machine word (factorials,
//! multinomials) is done in `BigUint`.
//!
//! Ordering is graded lexicographic: indices compare by total degree first,
//! and inside a degree the index whose leading entries are larger comes
//! first. For two directions the degree-one indices are ordered
//! `(1,0) < (0,1)`, matching the order in which mixed derivatives are
//! conventionally listed.

use num::BigUint;
use num::One;
use std::cmp::Ordering;
use std::fmt;

/// Multi-index `p = (p_1, ..., p_n)`; immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    /// The zero index of width `n`.
    pub fn zero(n: usize) -> Self {
        MultiIndex { entries: vec![0; n] }
    }

    /// The unit index `e_lambda` of width `n`.
    ///
    /// Panics if `lambda >= n`.
    pub fn unit(n: usize, lambda: usize) -> Self {
        MultiIndex::zero(n).raised(lambda)
    }

    pub fn from_entries(entries: Vec<u32>) -> Self {
        MultiIndex { entries }
    }

    /// Width, i.e. the number of base directions the index is written over.
    pub fn width(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, lambda: usize) -> u32 {
        self.check_direction(lambda);
        self.entries[lambda]
    }

    /// Total degree `|p| = p_1 + ... + p_n`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// `p + lambda`: one more derivative in direction `lambda`.
    ///
    /// Panics if `lambda` is out of range.
    pub fn raised(&self, lambda: usize) -> Self {
        self.check_direction(lambda);
        let mut entries = self.entries.clone();
        entries[lambda] += 1;
        MultiIndex { entries }
    }

    /// `p - lambda` when `p_lambda > 0`, `None` otherwise.
    ///
    /// Panics if `lambda` is out of range.
    pub fn lowered(&self, lambda: usize) -> Option<Self> {
        self.check_direction(lambda);
        if self.entries[lambda] == 0 {
            return None;
        }
        let mut entries = self.entries.clone();
        entries[lambda] -= 1;
        Some(MultiIndex { entries })
    }

    /// Entrywise sum `p + q`.
    ///
    /// Panics if the widths differ.
    pub fn plus(&self, other: &Self) -> Self {
        self.check_width(other);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        MultiIndex { entries }
    }

    /// Directions with a nonzero entry, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(lambda, _)| lambda)
    }

    /// `p! = p_1! * ... * p_n!`.
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &e in &self.entries {
            for k in 2..=e {
                acc *= BigUint::from(k);
            }
        }
        acc
    }

    /// The multinomial coefficient `(p+q)! / (p! q!)`, computed as a product
    /// of per-direction binomials so no division is needed.
    ///
    /// Panics if the widths differ.
    pub fn multinomial(&self, other: &Self) -> BigUint {
        self.check_width(other);
        let mut acc = BigUint::one();
        for (&a, &b) in self.entries.iter().zip(&other.entries) {
            acc *= binomial(a + b, b);
        }
        acc
    }

    fn check_direction(&self, lambda: usize) {
        assert!(
            lambda < self.entries.len(),
            "direction {lambda} out of range for width {}",
            self.entries.len()
        );
    }

    fn check_width(&self, other: &Self) {
        assert!(
            self.entries.len() == other.entries.len(),
            "dimension mismatch: width {} vs {}",
            self.entries.len(),
            other.entries.len()
        );
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.entries.cmp(&self.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of width `n` with degree at most `k`, in graded
/// lexicographic order.
pub fn enumerate_upto(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    collect_of_degree(&mut out, &mut current, 0, 0, k);
    out.sort();
    out
}

fn collect_of_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, used: u32, k: u32) {
    if pos == current.len() {
        out.push(MultiIndex::from_entries(current.clone()));
        return;
    }
    for e in 0..=(k - used) {
        current[pos] = e;
        collect_of_degree(out, current, pos + 1, used + e, k);
    }
    current[pos] = 0;
}

/// All ordered pairs `(q, t)` with `q + t = p`, sorted by `q`. There are
/// `(p_1 + 1) * ... * (p_n + 1)` of them.
pub fn splittings(p: &MultiIndex) -> Vec<(MultiIndex, MultiIndex)> {
    let n = p.width();
    let mut qs = vec![MultiIndex::zero(n)];
    for lambda in 0..n {
        let mut next = Vec::with_capacity(qs.len() * (p.entry(lambda) as usize + 1));
        for q in &qs {
            let mut raised = q.clone();
            next.push(raised.clone());
            for _ in 0..p.entry(lambda) {
                raised = raised.raised(lambda);
                next.push(raised.clone());
            }
        }
        qs = next;
    }
    qs.sort();
    qs.into_iter()
        .map(|q| {
            let t = MultiIndex::from_entries(
                p.entries().iter().zip(q.entries()).map(|(a, b)| a - b).collect(),
            );
            (q, t)
        })
        .collect()
}

/// `C(a, b)` in `BigUint`; zero when `b > a`.
pub fn binomial(a: u32, b: u32) -> BigUint {
    if b > a {
        return BigUint::from(0u32);
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for k in 0..b {
        acc = acc * BigUint::from(a - k) / BigUint::from(k + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::from_entries(entries.to_vec())
    }

    #[test]
    fn raising_increments_one_direction() {
        assert_eq!(mi(&[2, 1]).raised(1), mi(&[2, 2]));
        assert_eq!(mi(&[2, 1]).raised(0), mi(&[3, 1]));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn raising_past_the_width_panics() {
        mi(&[2, 1]).raised(2);
    }

    #[test]
    fn factorial_is_per_direction() {
        assert_eq!(mi(&[2, 1]).factorial(), BigUint::from(2u32));
        assert_eq!(mi(&[3, 2]).factorial(), BigUint::from(12u32));
        assert_eq!(MultiIndex::zero(3).factorial(), BigUint::one());
    }

    #[test]
    fn multinomial_of_the_worked_pair() {
        assert_eq!(mi(&[2, 0]).multinomial(&mi(&[1, 1])), BigUint::from(3u32));
        // symmetry
        assert_eq!(mi(&[1, 1]).multinomial(&mi(&[2, 0])), BigUint::from(3u32));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn multinomial_rejects_mixed_widths() {
        mi(&[1]).multinomial(&mi(&[1, 0]));
    }

    #[test]
    fn graded_lex_order_lists_leading_directions_first() {
        let got = enumerate_upto(2, 1);
        assert_eq!(got, vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]);
    }

    #[test]
    fn enumeration_counts_and_sorts() {
        let got = enumerate_upto(2, 2);
        assert_eq!(got.len(), 6);
        assert_eq!(
            got,
            vec![
                mi(&[0, 0]),
                mi(&[1, 0]),
                mi(&[0, 1]),
                mi(&[2, 0]),
                mi(&[1, 1]),
                mi(&[0, 2]),
            ]
        );
        for w in got.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn splittings_cover_the_product_count() {
        let p = mi(&[1, 1]);
        let got = splittings(&p);
        assert_eq!(got.len(), 4);
        for (q, t) in &got {
            assert_eq!(q.plus(t), p);
        }
        let qs: Vec<_> = got.iter().map(|(q, _)| q.clone()).collect();
        assert_eq!(qs, vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1])]);
    }

    #[test]
    fn splittings_of_zero_is_trivial() {
        let p = MultiIndex::zero(2);
        let got = splittings(&p);
        assert_eq!(got.len(), 1);
        assert!(got[0].0.is_zero() && got[0].1.is_zero());
    }

    #[test]
    fn binomial_rows_sum_to_powers_of_two() {
        // single-direction multinomials are plain binomials, and the row over
        // all splittings of (k) must sum to 2^k
        for k in 0u32..8 {
            let p = mi(&[k]);
            let total: BigUint = splittings(&p)
                .iter()
                .map(|(q, t)| q.multinomial(t))
                .sum();
            assert_eq!(total, BigUint::from(1u32) << k);
        }
    }
}
