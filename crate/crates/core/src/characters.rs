//! Characters of symmetric groups.
//!
//! Straight and skew characters are evaluated with the Murnaghan-Nakayama
//! rule on beta-sets. When the remaining cycle type consists only of 2-cycles
//! and both shapes are balanced the recursion is replaced by the closed form
//!
//! ```text
//! chi^{lambda/mu}(2,...,2) = (-1)^{(o + o')/2} C(k, |alpha/a|) dim(alpha/a) dim(beta/b)
//! ```
//!
//! where `o`, `o'` count odd parts, `k = |lambda/mu| / 2` and `(alpha, beta)`,
//! `(a, b)` are the 2-quotients.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::arith::{binomial, factorial, factorial_int};
use crate::error::{Error, Result};
use crate::linalg::det_rational;
use crate::partitions::{enumerate_partitions, Partition, PartitionFilter};
use crate::Rational;

/// A cycle type, i.e. a partition read as a conjugacy class of `S_n`.
pub type CycleType = Partition;

/// Largest degree accepted by [`character_table`] unless overridden.
pub const DEFAULT_TABLE_BOUND: u32 = 12;

/// `dim lambda = |lambda|! / prod hooks`.
pub fn dimension(lambda: &Partition) -> BigUint {
    factorial(lambda.size() as u64) / lambda.hook_product()
}

/// Number of standard tableaux of the skew shape `outer/inner`, by the
/// Aitken determinant `N! det[1 / (outer_i - inner_j - i + j)!]`.
pub fn skew_dimension(outer: &Partition, inner: &Partition) -> BigUint {
    if !outer.contains(inner) {
        return BigUint::zero();
    }
    let n = outer.len();
    let size = (outer.size() - inner.size()) as u64;
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = outer.part(i) as i64 - inner.part(j) as i64 - i as i64 + j as i64;
                    if d < 0 {
                        Rational::zero()
                    } else {
                        Rational::new(BigInt::one(), factorial_int(d as u64))
                    }
                })
                .collect()
        })
        .collect();
    let det = det_rational(matrix) * Rational::from_integer(factorial_int(size));
    debug_assert!(det.is_integer());
    det.to_integer()
        .to_biguint()
        .expect("skew dimensions are non-negative")
}

/// `z(nu) = prod_n n^{m_n} m_n!`.
pub fn centralizer_size(nu: &Partition) -> BigUint {
    nu.multiplicities()
        .iter()
        .enumerate()
        .skip(1)
        .fold(BigUint::one(), |acc, (part, &m)| {
            acc * BigUint::from(part).pow(m) * factorial(m as u64)
        })
}

/// `|C_nu| = |nu|! / z(nu)`.
pub fn class_size(nu: &Partition) -> BigUint {
    factorial(nu.size() as u64) / centralizer_size(nu)
}

/// The skew character `chi^{outer/inner}(rho)`.
pub fn mn_character(outer: &Partition, inner: &Partition, rho: &CycleType) -> Result<BigInt> {
    if !outer.contains(inner) {
        return Err(Error::invalid(format!(
            "({inner}) is not contained in ({outer})"
        )));
    }
    if outer.size() - inner.size() != rho.size() {
        return Err(Error::invalid(format!(
            "skew shape ({outer})/({inner}) has {} cells but the cycle type ({rho}) has size {}",
            outer.size() - inner.size(),
            rho.size()
        )));
    }
    // Non-2 parts first (largest first), so the all-twos tail can be
    // dispatched to the closed form.
    let mut strips: Vec<u32> = rho.parts().iter().copied().filter(|&p| p != 2).collect();
    let twos = rho.len() - strips.len();
    strips.extend(std::iter::repeat_n(2, twos));
    let mut engine = Mn {
        inner,
        inner_balanced: inner.is_balanced(),
        strips: &strips,
        twos_from: strips.len() - twos,
        memo: HashMap::new(),
    };
    Ok(engine.eval(outer.clone(), 0))
}

/// Straight character `chi^lambda(rho)`.
pub fn character(lambda: &Partition, rho: &CycleType) -> Result<BigInt> {
    mn_character(lambda, &Partition::empty(), rho)
}

struct Mn<'a> {
    inner: &'a Partition,
    inner_balanced: bool,
    strips: &'a [u32],
    twos_from: usize,
    memo: HashMap<(Partition, usize), BigInt>,
}

impl Mn<'_> {
    fn eval(&mut self, shape: Partition, step: usize) -> BigInt {
        if step == self.strips.len() {
            return if &shape == self.inner {
                BigInt::one()
            } else {
                BigInt::zero()
            };
        }
        if step >= self.twos_from && self.inner_balanced && shape.is_balanced() {
            return involution_fast_path(&shape, self.inner);
        }
        let key = (shape, step);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let (shape, _) = &key;
        let r = self.strips[step];
        let len = shape.len().max(self.inner.len());
        let beads = shape.beta_set(len);
        let offsets = beads.offsets();
        let mut total = BigInt::zero();
        for (idx, &x) in offsets.iter().enumerate() {
            if x < r {
                continue;
            }
            let target = x - r;
            if offsets.contains(&target) {
                continue;
            }
            // Beads strictly between target and x give the strip height.
            let crossed = offsets[idx + 1..].iter().filter(|&&y| y > target).count();
            let mut moved = offsets.to_vec();
            moved[idx] = target;
            moved.sort_unstable_by(|a, b| b.cmp(a));
            let next = crate::partitions::BetaSet::new(moved)
                .expect("distinct beads")
                .to_partition();
            if !next.contains(self.inner) {
                continue;
            }
            let v = self.eval(next, step + 1);
            if crossed % 2 == 0 {
                total += v;
            } else {
                total -= v;
            }
        }
        self.memo.insert(key, total.clone());
        total
    }
}

fn involution_fast_path(outer: &Partition, inner: &Partition) -> BigInt {
    let q = outer.two_core_quotient();
    let r = inner.two_core_quotient();
    if !q.alpha.contains(&r.alpha) || !q.beta.contains(&r.beta) {
        return BigInt::zero();
    }
    let k = ((outer.size() - inner.size()) / 2) as u64;
    let alpha_cells = (q.alpha.size() - r.alpha.size()) as u64;
    let magnitude = binomial(k, alpha_cells)
        * skew_dimension(&q.alpha, &r.alpha)
        * skew_dimension(&q.beta, &r.beta);
    let odd = outer.odd_parts_count() + inner.odd_parts_count();
    debug_assert!(odd.is_multiple_of(2));
    let value = BigInt::from(magnitude);
    if (odd / 2) % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `chi^{outer/inner}(2,...,2)`.
///
/// Balanced shapes use the 2-quotient closed form; a straight unbalanced
/// shape gives 0. Skew shapes with an unbalanced inner part fall back to the
/// recursion.
pub fn involution_character(outer: &Partition, inner: &Partition) -> Result<BigInt> {
    if !outer.contains(inner) {
        return Err(Error::invalid(format!(
            "({inner}) is not contained in ({outer})"
        )));
    }
    let cells = outer.size() - inner.size();
    if cells % 2 == 1 {
        return Err(Error::invalid(format!(
            "skew shape ({outer})/({inner}) has an odd number of cells"
        )));
    }
    let balanced_outer = outer.is_balanced();
    let balanced_inner = inner.is_balanced();
    if balanced_outer && balanced_inner {
        return Ok(involution_fast_path(outer, inner));
    }
    if inner.is_empty() {
        return Ok(BigInt::zero());
    }
    mn_character(outer, inner, &Partition::all_twos(cells as usize / 2))
}

/// Completes `eta` with 2-cycles up to size `n`; fails on a parity mismatch.
pub fn pad_with_twos(eta: &Partition, n: u32) -> Result<Partition> {
    if eta.size() > n || (n - eta.size()) % 2 == 1 {
        return Err(Error::invalid(format!(
            "cannot pad ({eta}) with 2-cycles to size {n}"
        )));
    }
    Ok(eta.padded_with_twos(((n - eta.size()) / 2) as usize))
}

/// Central character `f_eta(lambda) = |C| chi^lambda(eta') / dim lambda`,
/// where `eta'` is `eta` padded with 2-cycles to `|lambda|`.
pub fn central_character(eta: &Partition, lambda: &Partition) -> Result<Rational> {
    let padded = pad_with_twos(eta, lambda.size())?;
    let chi = character(lambda, &padded)?;
    Ok(Rational::new(
        BigInt::from(class_size(&padded)) * chi,
        BigInt::from(dimension(lambda)),
    ))
}

/// Character table of `S_n`: rows indexed by irreducibles in reverse
/// lexicographic order, columns by classes in increasing lexicographic order.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub n: u32,
    pub irreducibles: Vec<Partition>,
    pub classes: Vec<Partition>,
    pub values: Vec<Vec<BigInt>>,
}

impl CharacterTable {
    pub fn value(&self, irreducible: &Partition, class: &Partition) -> Option<&BigInt> {
        let i = self.irreducibles.iter().position(|p| p == irreducible)?;
        let j = self.classes.iter().position(|p| p == class)?;
        Some(&self.values[i][j])
    }

    /// `sum_nu |C_nu| chi^a(nu) chi^b(nu)` for rows `a`, `b`.
    pub fn row_inner_product(&self, a: usize, b: usize) -> BigInt {
        self.classes
            .iter()
            .enumerate()
            .map(|(j, nu)| {
                BigInt::from(class_size(nu)) * &self.values[a][j] * &self.values[b][j]
            })
            .sum()
    }
}

/// Full character table of `S_n`, for `n <= bound`.
pub fn character_table(n: u32, bound: u32) -> Result<CharacterTable> {
    if n > bound {
        return Err(Error::Resource(format!(
            "character table of S_{n} exceeds the configured bound {bound}"
        )));
    }
    use rayon::prelude::*;
    let irreducibles = enumerate_partitions(n, PartitionFilter::All);
    let mut classes = irreducibles.clone();
    classes.reverse();
    let values = irreducibles
        .par_iter()
        .map(|lambda| {
            classes
                .iter()
                .map(|nu| character(lambda, nu))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterTable {
        n,
        irreducibles,
        classes,
        values,
    })
}

#[cfg(test)]
pub(crate) fn to_i64(x: &BigInt) -> i64 {
    use num_traits::{Signed, ToPrimitive};
    debug_assert!(x.abs() < BigInt::from(i64::MAX));
    x.to_i64().expect("small integer")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn chi(outer: &str, inner: &str, rho: &str) -> i64 {
        to_i64(&mn_character(&p(outer), &p(inner), &p(rho)).unwrap())
    }

    /// Standard tableaux of a skew shape by removing outer corners.
    fn syt_count(outer: &Partition, inner: &Partition, memo: &mut HashMap<Partition, u64>) -> u64 {
        if outer == inner {
            return 1;
        }
        if let Some(&v) = memo.get(outer) {
            return v;
        }
        let mut total = 0;
        for i in 0..outer.len() {
            let row = outer.part(i);
            if row > outer.part(i + 1) && row > inner.part(i) {
                let mut parts = outer.parts().to_vec();
                parts[i] -= 1;
                let smaller = Partition::new(parts).unwrap();
                if smaller.contains(inner) {
                    total += syt_count(&smaller, inner, memo);
                }
            }
        }
        memo.insert(outer.clone(), total);
        total
    }

    #[test]
    fn mn_examples() {
        assert_eq!(chi("2,1", "", "1,1,1"), 2);
        assert_eq!(chi("3,1", "", "2,2"), -1);
        assert_eq!(chi("2,2", "", "2,2"), 2);
        assert!(mn_character(&p("2"), &p("1,1"), &p("")).is_err());
        assert!(mn_character(&p("2"), &p(""), &p("1")).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(&p("2,2")), BigUint::from(2u32));
        assert_eq!(dimension(&p("5")), BigUint::one());
        assert_eq!(dimension(&p("1,1,1")), BigUint::one());
        for n in 0..=10 {
            for lam in enumerate_partitions(n, PartitionFilter::All) {
                let ones = Partition::all_ones(n as usize);
                assert_eq!(
                    BigInt::from(dimension(&lam)),
                    character(&lam, &ones).unwrap(),
                    "{lam:?}"
                );
            }
        }
    }

    #[test]
    fn skew_dimension_matches_tableaux() {
        for n in 0..=8 {
            for outer in enumerate_partitions(n, PartitionFilter::All) {
                for m in 0..=n {
                    for inner in enumerate_partitions(m, PartitionFilter::All) {
                        let expected = if outer.contains(&inner) {
                            syt_count(&outer, &inner, &mut HashMap::new())
                        } else {
                            0
                        };
                        assert_eq!(
                            skew_dimension(&outer, &inner),
                            BigUint::from(expected),
                            "{outer:?}/{inner:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn involution_examples() {
        assert_eq!(involution_character(&p("2,2"), &p("")).unwrap(), BigInt::from(2));
        // Murnaghan-Nakayama gives -1 here; the closed form agrees.
        assert_eq!(involution_character(&p("3,1"), &p("")).unwrap(), BigInt::from(-1));
        assert_eq!(involution_character(&p("2"), &p("")).unwrap(), BigInt::one());
        assert_eq!(involution_character(&p("2,1,1"), &p("")).unwrap(), BigInt::from(-1));
        assert!(involution_character(&p("2"), &p("1")).is_err());
        assert!(involution_character(&p("2"), &p("3")).is_err());
    }

    /// Plain memoized recursion without the involution dispatch.
    fn mn_plain(outer: &Partition, inner: &Partition, rho: &[u32]) -> BigInt {
        mn_plain_memo(outer, inner, rho, &mut HashMap::new())
    }

    fn mn_plain_memo(
        outer: &Partition,
        inner: &Partition,
        rho: &[u32],
        memo: &mut HashMap<(Partition, usize), BigInt>,
    ) -> BigInt {
        if rho.is_empty() {
            return if outer == inner { BigInt::one() } else { BigInt::zero() };
        }
        if let Some(v) = memo.get(&(outer.clone(), rho.len())) {
            return v.clone();
        }
        let r = rho[0];
        let len = outer.len().max(inner.len());
        let beads = outer.beta_set(len);
        let offs = beads.offsets();
        let mut total = BigInt::zero();
        for (idx, &x) in offs.iter().enumerate() {
            if x < r || offs.contains(&(x - r)) {
                continue;
            }
            let crossed = offs.iter().filter(|&&y| y > x - r && y < x).count();
            let mut moved = offs.to_vec();
            moved[idx] = x - r;
            let next = crate::partitions::BetaSet::new(moved).unwrap().to_partition();
            if next.contains(inner) {
                let v = mn_plain_memo(&next, inner, &rho[1..], memo);
                if crossed % 2 == 0 {
                    total += v
                } else {
                    total -= v
                }
            }
        }
        memo.insert((outer.clone(), rho.len()), total.clone());
        total
    }

    #[test]
    fn fast_path_agrees_with_recursion() {
        for n in (0..=16).step_by(2) {
            for outer in enumerate_partitions(n, PartitionFilter::Balanced) {
                for m in (0..=n.min(6)).step_by(2) {
                    for inner in enumerate_partitions(m, PartitionFilter::Balanced) {
                        if !outer.contains(&inner) {
                            continue;
                        }
                        let twos = vec![2u32; ((n - m) / 2) as usize];
                        assert_eq!(
                            involution_character(&outer, &inner).unwrap(),
                            mn_plain(&outer, &inner, &twos),
                            "{outer:?}/{inner:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_types_agree_with_recursion() {
        for n in 0..=9 {
            let all = enumerate_partitions(n, PartitionFilter::All);
            for lam in &all {
                for rho in &all {
                    assert_eq!(
                        character(lam, rho).unwrap(),
                        mn_plain(lam, &Partition::empty(), rho.parts()),
                        "{lam:?} on {rho:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn centralizers() {
        assert_eq!(centralizer_size(&p("2")), BigUint::from(2u32));
        assert_eq!(centralizer_size(&p("2,2")), BigUint::from(8u32));
        assert_eq!(centralizer_size(&p("3,1")), BigUint::from(3u32));
        assert_eq!(centralizer_size(&p("")), BigUint::one());
    }

    #[test]
    fn central_characters() {
        let r = |n, d| Rational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(central_character(&p(""), &p("2")).unwrap(), r(1, 1));
        assert_eq!(central_character(&p(""), &p("1,1")).unwrap(), r(-1, 1));
        assert_eq!(central_character(&p("1,1"), &p("1,1")).unwrap(), r(1, 1));
        assert!(central_character(&p("1"), &p("2")).is_err());
    }

    #[test]
    fn tables() {
        let t2 = character_table(2, DEFAULT_TABLE_BOUND).unwrap();
        let vals: Vec<Vec<i64>> = t2.values.iter().map(|r| r.iter().map(to_i64).collect()).collect();
        assert_eq!(vals, vec![vec![1, 1], vec![1, -1]]);

        let t4 = character_table(4, DEFAULT_TABLE_BOUND).unwrap();
        let row: Vec<i64> = t4.values[1].iter().map(to_i64).collect();
        assert_eq!(t4.irreducibles[1], p("3,1"));
        assert_eq!(row, vec![3, 1, -1, 0, -1]);
        assert_eq!(t4.row_inner_product(1, 2), BigInt::zero());

        assert!(matches!(character_table(13, DEFAULT_TABLE_BOUND), Err(Error::Resource(_))));
    }

    #[test]
    fn orthogonality() {
        for n in 0..=10 {
            let t = character_table(n, DEFAULT_TABLE_BOUND).unwrap();
            let order = BigInt::from(factorial(n as u64));
            for a in 0..t.irreducibles.len() {
                for b in 0..t.irreducibles.len() {
                    let expected = if a == b { order.clone() } else { BigInt::zero() };
                    assert_eq!(t.row_inner_product(a, b), expected);
                }
            }
        }
    }

    #[test]
    fn magnitude_identity() {
        for n in (0..=16).step_by(2) {
            for lam in enumerate_partitions(n, PartitionFilter::Balanced) {
                let q = lam.two_core_quotient();
                let expected = binomial(n as u64 / 2, q.alpha.size() as u64)
                    * dimension(&q.alpha)
                    * dimension(&q.beta);
                let chi = mn_plain(&lam, &Partition::empty(), &vec![2; n as usize / 2]);
                assert_eq!(chi.magnitude(), &expected, "{lam:?}");
            }
        }
    }
}
