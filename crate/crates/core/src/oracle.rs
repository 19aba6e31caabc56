//! Brute-force census of pillowcase covers.
//!
//! Counts tuples `(g1, g2, g3, g4)` in `S_N`, `N = 2d`, with `g1` of cycle
//! type `nu` completed by 2-cycles, `g2, g3, g4` fixed-point-free involutions
//! and `g1 g2 g3 g4 = 1`. The count is compared with its character-sum
//! expression `N! sum_lambda (dim lambda / N!)^2 f_nu(lambda) f_{(2..2)}(lambda)^3`.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::arith::factorial_int;
use crate::characters::{central_character, class_size, dimension, pad_with_twos};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition, PartitionFilter};
use crate::Rational;

/// Largest `N = 2d` the census accepts unless overridden.
pub const DEFAULT_ORACLE_BOUND: u32 = 8;

type Perm = Vec<u8>;

/// Result of one census.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleCensus {
    /// `d`, with `N = 2d` points.
    pub degree: u32,
    pub nu: Partition,
    /// All tuples.
    pub raw_count: BigInt,
    /// Tuples generating a transitive subgroup.
    pub transitive_count: BigInt,
    /// `raw_count / N!`.
    pub normalized: Rational,
}

impl TupleCensus {
    /// `transitive_count / N!`.
    pub fn transitive_normalized(&self) -> Rational {
        Rational::new(
            self.transitive_count.clone(),
            factorial_int(2 * self.degree as u64),
        )
    }
}

fn cycle_type(p: &[u8]) -> Partition {
    let mut seen = vec![false; p.len()];
    let mut parts = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        parts.push(len);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(parts).expect("cycle lengths are positive")
}

fn all_permutations(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut current: Perm = (0..n as u8).collect();
    fn rec(k: usize, current: &mut Perm, out: &mut Vec<Perm>) {
        if k == current.len() {
            out.push(current.clone());
            return;
        }
        for i in k..current.len() {
            current.swap(k, i);
            rec(k + 1, current, out);
            current.swap(k, i);
        }
    }
    rec(0, &mut current, &mut out);
    out
}

fn fpf_involutions(n: usize) -> Vec<Perm> {
    fn rec(p: &mut Vec<Option<u8>>, out: &mut Vec<Perm>) {
        let Some(first) = p.iter().position(Option::is_none) else {
            out.push(p.iter().map(|x| x.expect("filled")).collect());
            return;
        };
        for other in first + 1..p.len() {
            if p[other].is_none() {
                p[first] = Some(other as u8);
                p[other] = Some(first as u8);
                rec(p, out);
                p[first] = None;
                p[other] = None;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![None; n], &mut out);
    out
}

fn find(parent: &mut [u8], x: u8) -> u8 {
    let mut r = x;
    while parent[r as usize] != r {
        r = parent[r as usize];
    }
    let mut y = x;
    while parent[y as usize] != r {
        let next = parent[y as usize];
        parent[y as usize] = r;
        y = next;
    }
    r
}

fn is_transitive(gens: [&[u8]; 3]) -> bool {
    let n = gens[0].len();
    let mut parent: Vec<u8> = (0..n as u8).collect();
    let mut components = n;
    for g in gens {
        for x in 0..n as u8 {
            let (a, b) = (find(&mut parent, x), find(&mut parent, g[x as usize]));
            if a != b {
                parent[a as usize] = b;
                components -= 1;
            }
        }
    }
    components == 1
}

fn check_args(d: u32, nu: &Partition, bound: u32) -> Result<Partition> {
    if d == 0 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    if 2 * d > bound {
        return Err(Error::Resource(format!(
            "census on {} points exceeds the bound {bound}",
            2 * d
        )));
    }
    pad_with_twos(nu, 2 * d)
}

/// Exhaustive census. `g2` is fixed to `(0 1)(2 3)...` by conjugation and the
/// count is multiplied back by the size of its class.
pub fn census(d: u32, nu: &Partition, bound: u32) -> Result<TupleCensus> {
    let target = check_args(d, nu, bound)?;
    let n = 2 * d as usize;
    let g1s: Vec<Perm> = all_permutations(n)
        .into_iter()
        .filter(|p| cycle_type(p) == target)
        .collect();
    let involutions = fpf_involutions(n);
    let g2: Perm = (0..n as u8).map(|x| x ^ 1).collect();
    let (raw, transitive) = g1s
        .par_iter()
        .map(|g1| {
            let g12: Perm = (0..n).map(|x| g1[g2[x] as usize]).collect();
            let mut counts = (0u64, 0u64);
            for g3 in &involutions {
                // g4 = (g1 g2 g3)^{-1} must be a fixed-point-free involution,
                // that is g1 g2 g3 itself must be one.
                let prod: Perm = (0..n).map(|x| g12[g3[x] as usize]).collect();
                let fpf_inv = (0..n).all(|x| {
                    let y = prod[x] as usize;
                    y != x && prod[y] as usize == x
                });
                if fpf_inv {
                    counts.0 += 1;
                    if is_transitive([g1, &g2, g3]) {
                        counts.1 += 1;
                    }
                }
            }
            counts
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let classes = BigInt::from(class_size(&Partition::all_twos(d as usize)));
    let raw_count = BigInt::from(raw) * &classes;
    let transitive_count = BigInt::from(transitive) * &classes;
    let normalized = Rational::new(raw_count.clone(), factorial_int(n as u64));
    Ok(TupleCensus {
        degree: d,
        nu: nu.clone(),
        raw_count,
        transitive_count,
        normalized,
    })
}

/// `sum_lambda (dim lambda / N!)^2 f_nu(lambda) f_{(2..2)}(lambda)^3` over
/// `lambda` of size `N = 2d`.
pub fn character_side(d: u32, nu: &Partition, bound: u32) -> Result<Rational> {
    check_args(d, nu, bound)?;
    let n = 2 * d;
    let nf = factorial_int(n as u64);
    let mut total = Rational::from_integer(BigInt::from(0));
    for lambda in enumerate_partitions(n, PartitionFilter::All) {
        let r = Rational::new(BigInt::from(dimension(&lambda)), nf.clone());
        let f2 = central_character(&Partition::empty(), &lambda)?;
        let f_nu = central_character(nu, &lambda)?;
        total += &r * &r * f_nu * &f2 * &f2 * &f2;
    }
    Ok(total)
}

/// `(normalized census count, character side)`; the two agree exactly.
pub fn burnside_check(census: &TupleCensus, bound: u32) -> Result<(Rational, Rational)> {
    Ok((
        census.normalized.clone(),
        character_side(census.degree, &census.nu, bound)?,
    ))
}

/// CSV rows `d,nu,raw,transitive,normalized,character`.
pub fn census_csv(rows: &[(TupleCensus, Rational)]) -> String {
    let mut out = String::from("d,nu,raw,transitive,normalized,character\n");
    for (c, chi) in rows {
        out.push_str(&format!(
            "{},\"{}\",{},{},{},{}\n",
            c.degree, c.nu, c.raw_count, c.transitive_count, c.normalized, chi
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    /// Unreduced census: every g2 is enumerated.
    fn census_plain(d: u32, nu: &Partition) -> (u64, u64) {
        let n = 2 * d as usize;
        let target = nu.padded_with_twos(((n as u32 - nu.size()) / 2) as usize);
        let inv = fpf_involutions(n);
        let mut counts = (0, 0);
        for g1 in all_permutations(n).into_iter().filter(|g| cycle_type(g) == target) {
            for g2 in &inv {
                for g3 in &inv {
                    for g4 in &inv {
                        let id = (0..n).all(|x| g1[g2[g3[g4[x] as usize] as usize] as usize] as usize == x);
                        if id {
                            counts.0 += 1;
                            if is_transitive([&g1, g2, g3]) {
                                counts.1 += 1;
                            }
                        }
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn small_examples() {
        let c = census(1, &p(""), DEFAULT_ORACLE_BOUND).unwrap();
        assert_eq!(c.raw_count, BigInt::from(1));
        assert_eq!(c.normalized, rat(1, 2));
        let c = census(1, &p("1,1"), DEFAULT_ORACLE_BOUND).unwrap();
        assert_eq!(c.raw_count, BigInt::from(0));
        assert_eq!(c.normalized, rat(0, 1));
        assert!(census(1, &p("1"), DEFAULT_ORACLE_BOUND).is_err());
        assert!(matches!(
            census(5, &p(""), DEFAULT_ORACLE_BOUND),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn reduction_matches_plain_enumeration() {
        for (d, nu) in [(1, ""), (2, ""), (2, "1,1"), (2, "3,1"), (2, "1,1,1,1"), (3, "3,1")] {
            let nu = p(nu);
            let c = census(d, &nu, DEFAULT_ORACLE_BOUND).unwrap();
            let (raw, trans) = census_plain(d, &nu);
            assert_eq!(c.raw_count, BigInt::from(raw), "d={d} nu={nu:?}");
            assert_eq!(c.transitive_count, BigInt::from(trans), "d={d} nu={nu:?}");
        }
    }

    #[test]
    fn counts_match_characters() {
        for d in 1..=3 {
            for k in 0..=d {
                for nu in enumerate_partitions(2 * k, PartitionFilter::All) {
                    let c = census(d, &nu, DEFAULT_ORACLE_BOUND).unwrap();
                    let (lhs, rhs) = burnside_check(&c, DEFAULT_ORACLE_BOUND).unwrap();
                    assert_eq!(lhs, rhs, "d={d} nu={nu:?}");
                    assert!(c.transitive_count <= c.raw_count);
                }
            }
        }
    }
}
