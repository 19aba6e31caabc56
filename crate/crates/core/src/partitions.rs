//! Integer partitions and the combinatorics the rest of the crate is built on.
//!
//! Besides the usual shape data (conjugate, hooks, containment) this module
//! owns the beta-set encoding and the 2-core/2-quotient decomposition.
//!
//! Quotient ordering: the beta-set of a partition is padded to an even length
//! and split by residue mod 2. Even beads give `alpha`, odd beads give `beta`.
//! Any even padding gives the same pair, so the minimal one is used.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// A partition: weakly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
    size: u32,
}

impl Partition {
    /// Builds a partition, dropping trailing zeros. Parts must be weakly
    /// decreasing.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "parts {parts:?} are not weakly decreasing"
            )));
        }
        Ok(Self::from_sorted(parts))
    }

    pub(crate) fn from_sorted(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&p| p > 0));
        let size = parts.iter().sum();
        Partition { parts, size }
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// The partition `(2, 2, ..., 2)` of `2 * count`.
    pub fn all_twos(count: usize) -> Self {
        Self::from_sorted(vec![2; count])
    }

    /// The partition `(1, 1, ..., 1)` of `count`.
    pub fn all_ones(count: usize) -> Self {
        Self::from_sorted(vec![1; count])
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part `i` (0-based), zero past the end.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.part(0) as usize;
        let parts = (0..width)
            .map(|j| self.parts.iter().take_while(|&&p| p as usize > j).count() as u32)
            .collect();
        Self::from_sorted(parts)
    }

    /// Cell-wise containment of `inner` in `self`.
    pub fn contains(&self, inner: &Partition) -> bool {
        inner.len() <= self.len() && inner.parts.iter().zip(&self.parts).all(|(a, b)| a <= b)
    }

    /// Appends `count` parts equal to 2 (and re-sorts).
    pub fn padded_with_twos(&self, count: usize) -> Partition {
        let mut parts = self.parts.clone();
        parts.extend(std::iter::repeat_n(2, count));
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::from_sorted(parts)
    }

    /// Multiplicity of each part value: `result[v]` counts parts equal to `v`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut mult = vec![0u32; self.part(0) as usize + 1];
        for &p in &self.parts {
            mult[p as usize] += 1;
        }
        mult
    }

    /// Hook lengths in row-major cell order.
    pub fn hook_lengths(&self) -> Vec<u32> {
        let conj = self.conjugate();
        let mut hooks = Vec::with_capacity(self.size as usize);
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row as usize {
                let arm = row - j as u32 - 1;
                let leg = conj.parts[j] - i as u32 - 1;
                hooks.push(arm + leg + 1);
            }
        }
        hooks
    }

    pub fn hook_product(&self) -> BigUint {
        self.hook_lengths()
            .into_iter()
            .fold(BigUint::one(), |acc, h| acc * h)
    }

    pub fn odd_parts_count(&self) -> usize {
        self.parts.iter().filter(|&&p| p % 2 == 1).count()
    }

    /// Beta-set `{ lambda_i + len - i }` of length `len >= len()`.
    pub fn beta_set(&self, len: usize) -> BetaSet {
        assert!(len >= self.len(), "beta-set length shorter than the partition");
        let offsets = (0..len)
            .map(|i| self.part(i) + (len - 1 - i) as u32)
            .collect();
        BetaSet { offsets }
    }

    /// The 2-core together with the ordered 2-quotient.
    pub fn two_core_quotient(&self) -> TwoQuotient {
        let len = self.len() + self.len() % 2;
        let beads = self.beta_set(len);
        let even: Vec<u32> = beads
            .offsets
            .iter()
            .filter(|&&x| x % 2 == 0)
            .map(|&x| x / 2)
            .collect();
        let odd: Vec<u32> = beads
            .offsets
            .iter()
            .filter(|&&x| x % 2 == 1)
            .map(|&x| x / 2)
            .collect();
        let core_beads = {
            let mut v: Vec<u32> = (0..even.len() as u32)
                .map(|k| 2 * k)
                .chain((0..odd.len() as u32).map(|k| 2 * k + 1))
                .collect();
            v.sort_unstable_by(|a, b| b.cmp(a));
            BetaSet { offsets: v }
        };
        TwoQuotient {
            core: core_beads.to_partition(),
            alpha: BetaSet { offsets: even }.to_partition(),
            beta: BetaSet { offsets: odd }.to_partition(),
        }
    }

    /// Inverse of [`Partition::two_core_quotient`].
    pub fn from_core_quotient(q: &TwoQuotient) -> Partition {
        // Charge (#even - #odd beads) of the core is independent of the even
        // padding; grow the padding until both runners have room.
        let mut len = q.core.len() + q.core.len() % 2;
        let (even_count, odd_count) = loop {
            let beads = q.core.beta_set(len);
            let even = beads.offsets.iter().filter(|&&x| x % 2 == 0).count();
            let odd = len - even;
            if even >= q.alpha.len() && odd >= q.beta.len() {
                break (even, odd);
            }
            len += 2;
        };
        let mut offsets: Vec<u32> = q
            .alpha
            .beta_set(even_count)
            .offsets
            .iter()
            .map(|&y| 2 * y)
            .chain(q.beta.beta_set(odd_count).offsets.iter().map(|&y| 2 * y + 1))
            .collect();
        offsets.sort_unstable_by(|a, b| b.cmp(a));
        BetaSet { offsets }.to_partition()
    }

    /// Balanced partitions are those with empty 2-core.
    pub fn is_balanced(&self) -> bool {
        self.size.is_multiple_of(2) && self.two_core_quotient().core.is_empty()
    }

    /// The three combinatorial balance tests, each computed independently.
    /// The fourth (non-vanishing weight) lives in [`crate::weights`].
    pub fn balance_criteria(&self) -> BalanceCriteria {
        BalanceCriteria {
            core_empty: self.two_core_quotient().core.is_empty(),
            domino_tileable: self.domino_strip().is_empty(),
            sign_sum_zero: self.alternating_sign_sum() == 0,
        }
    }

    /// Removes dominoes greedily until none can be removed. The result is the
    /// 2-core regardless of removal order.
    pub fn domino_strip(&self) -> Partition {
        let mut rows = self.parts.clone();
        'outer: loop {
            for i in 0..rows.len() {
                let next = rows.get(i + 1).copied().unwrap_or(0);
                if rows[i] >= next + 2 {
                    rows[i] -= 2;
                    rows.retain(|&r| r > 0);
                    continue 'outer;
                }
                let after = rows.get(i + 2).copied().unwrap_or(0);
                if rows[i] == next && next > after {
                    rows[i] -= 1;
                    rows[i + 1] -= 1;
                    rows.retain(|&r| r > 0);
                    continue 'outer;
                }
            }
            break;
        }
        Self::from_sorted(rows)
    }

    /// `sum_i [(-1)^(lambda_i - i + 1) - (-1)^(-i + 1)]` over 1-based rows.
    pub fn alternating_sign_sum(&self) -> i64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i0, &p)| {
                let i = i0 as i64 + 1;
                let a = if (p as i64 - i + 1).rem_euclid(2) == 0 { 1 } else { -1 };
                let b = if (1 - i).rem_euclid(2) == 0 { 1 } else { -1 };
                a - b
            })
            .sum()
    }

    /// The comma-separated literal used on the command line and in cache keys.
    pub fn literal(&self) -> String {
        self.parts
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.literal())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        if trimmed.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let parts = trimmed
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|e| Error::Parse {
                    what: "partition",
                    input: s.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        if parts.contains(&0) {
            return Err(Error::Parse {
                what: "partition",
                input: s.to_string(),
                reason: "parts must be positive".into(),
            });
        }
        Partition::new(parts).map_err(|e| Error::Parse {
            what: "partition",
            input: s.to_string(),
            reason: e.to_string(),
        })
    }
}

/// Outcome of the independent balance tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalanceCriteria {
    pub core_empty: bool,
    pub domino_tileable: bool,
    pub sign_sum_zero: bool,
}

impl BalanceCriteria {
    pub fn agree(&self) -> bool {
        self.core_empty == self.domino_tileable && self.core_empty == self.sign_sum_zero
    }
}

/// Distinct non-negative integers `lambda_i + n - i`, stored in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BetaSet {
    offsets: Vec<u32>,
}

impl BetaSet {
    pub fn new(mut offsets: Vec<u32>) -> Result<Self> {
        offsets.sort_unstable_by(|a, b| b.cmp(a));
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("beta-set entries must be distinct"));
        }
        Ok(BetaSet { offsets })
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn to_partition(&self) -> Partition {
        let n = self.offsets.len();
        let parts: Vec<u32> = self
            .offsets
            .iter()
            .enumerate()
            .map(|(i, &x)| x - (n - 1 - i) as u32)
            .filter(|&p| p > 0)
            .collect();
        Partition::from_sorted(parts)
    }

    /// Adds a bead at 0 after moving every bead up by one.
    pub fn shift(&self) -> BetaSet {
        let mut offsets: Vec<u32> = self.offsets.iter().map(|x| x + 1).collect();
        offsets.push(0);
        BetaSet { offsets }
    }
}

/// A 2-core and the ordered pair of quotient components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoQuotient {
    pub core: Partition,
    pub alpha: Partition,
    pub beta: Partition,
}

impl TwoQuotient {
    /// Quotient data of a balanced partition.
    pub fn balanced(alpha: Partition, beta: Partition) -> Self {
        TwoQuotient {
            core: Partition::empty(),
            alpha,
            beta,
        }
    }
}

/// Which partitions [`enumerate_partitions`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionFilter {
    All,
    Balanced,
    MaxPart(u32),
}

/// Partitions of `n` with parts at most `max_part`, in reverse lexicographic order.
#[derive(Clone, Debug)]
pub struct Partitions {
    next: Option<Vec<u32>>,
    max_part: u32,
}

impl Partitions {
    pub fn of(n: u32) -> Self {
        Self::with_max_part(n, n)
    }

    pub fn with_max_part(n: u32, max_part: u32) -> Self {
        let next = if n == 0 {
            Some(Vec::new())
        } else if max_part == 0 {
            None
        } else {
            let mut v = vec![max_part.min(n); (n / max_part.min(n)) as usize];
            let rest = n % max_part.min(n);
            if rest > 0 {
                v.push(rest);
            }
            Some(v)
        };
        Partitions { next, max_part }
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.next.take()?;
        // Successor: decrement the last part exceeding 1 and refill greedily.
        let mut parts = current.clone();
        let mut freed = 0u32;
        while parts.last() == Some(&1) {
            parts.pop();
            freed += 1;
        }
        if let Some(last) = parts.last_mut() {
            *last -= 1;
            freed += 1;
            let cap = (*last).min(self.max_part);
            while freed > 0 {
                let take = cap.min(freed);
                parts.push(take);
                freed -= take;
            }
            self.next = Some(parts);
        }
        Some(Partition::from_sorted(current))
    }
}

/// All partitions of `n` passing `filter`, in reverse lexicographic order.
pub fn enumerate_partitions(n: u32, filter: PartitionFilter) -> Vec<Partition> {
    match filter {
        PartitionFilter::All => Partitions::of(n).collect(),
        PartitionFilter::MaxPart(m) => Partitions::with_max_part(n, m).collect(),
        PartitionFilter::Balanced => Partitions::of(n).filter(|p| p.is_balanced()).collect(),
    }
}

/// Number of partitions of `n` (Euler's pentagonal recurrence).
pub fn partition_count(n: u32) -> BigUint {
    let n = n as usize;
    let mut p = vec![num_bigint::BigInt::from(0); n + 1];
    p[0] = num_bigint::BigInt::from(1);
    for i in 1..=n {
        let mut k = 1i64;
        let mut acc = num_bigint::BigInt::from(0);
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += &p[i - g1] * sign;
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= i {
                acc += &p[i - g2] * sign;
            }
            k += 1;
        }
        p[i] = acc;
    }
    p[n].to_biguint().expect("partition numbers are positive")
}
