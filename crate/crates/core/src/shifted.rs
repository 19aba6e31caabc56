//! Shifted power sums and shifted Schur functions.
//!
//! ```text
//! p_k(lambda)     = (1 - 2^{-k}) zeta(-k) + sum_i [(lambda_i - i + 1/2)^k - (-i + 1/2)^k]
//! s*_mu(x_1..x_n) = det[(x_i + n - i) falling (mu_j + n - j)] / det[(x_i + n - i) falling (n - j)]
//! ```

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{binomial, factorial_int, falling_factorial, falling_factorial_signed, pow2, rat};
use crate::characters::{character, centralizer_size, dimension};
use crate::error::{Error, Result};
use crate::linalg::det_bareiss;
use crate::partitions::{enumerate_partitions, Partition, PartitionFilter};
use crate::Rational;

/// Values `zeta(-k)` for `1 <= k <= max`, from Bernoulli numbers.
#[derive(Clone, Debug)]
pub struct ZetaTable {
    values: Vec<Rational>,
}

impl ZetaTable {
    pub fn new(max: usize) -> Self {
        let bern = bernoulli(max + 1);
        let values = (0..=max)
            .map(|k| {
                if k == 0 {
                    rat(-1, 2)
                } else {
                    -&bern[k + 1] / Rational::from_integer(BigInt::from(k + 1))
                }
            })
            .collect();
        ZetaTable { values }
    }

    pub fn max(&self) -> usize {
        self.values.len() - 1
    }

    /// `zeta(-k)`.
    pub fn value(&self, k: usize) -> &Rational {
        &self.values[k]
    }
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from_integer(BigInt::from(binomial(m as u64 + 1, k as u64))) * bk;
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// `zeta(-k)` for `k >= 1`.
pub fn zeta_negative(k: usize) -> Rational {
    ZetaTable::new(k).value(k).clone()
}

/// `p_k(lambda)`.
pub fn shifted_power(k: u32, lambda: &Partition) -> Result<Rational> {
    if k == 0 {
        return Err(Error::invalid("shifted power sums start at k = 1"));
    }
    let (scaled, denominator) = shifted_power_scaled(k, lambda, &ZetaTable::new(k as usize));
    Ok(Rational::new(scaled, denominator))
}

/// Integer form of `p_k`: returns `(N, D)` with `p_k(lambda) = N / D`, where
/// `D = 2^k b` and `b` is the denominator of `zeta(-k)`. `D` depends on `k` only.
pub fn shifted_power_scaled(k: u32, lambda: &Partition, zeta: &ZetaTable) -> (BigInt, BigInt) {
    let z = zeta.value(k as usize);
    let (a, b) = (z.numer().clone(), z.denom().clone());
    let two_k = pow2(k);
    let mut sum = BigInt::zero();
    for (i0, &part) in lambda.parts().iter().enumerate() {
        let i = i0 as i64 + 1;
        let shifted = BigInt::from(2 * part as i64 - 2 * i + 1);
        let base = BigInt::from(1 - 2 * i);
        sum += shifted.pow(k) - base.pow(k);
    }
    let numerator = (&two_k - 1) * a + &b * sum;
    (numerator, two_k * b)
}

/// `p_mu(lambda) = prod_k p_{mu_k}(lambda)`.
pub fn shifted_power_product(mu: &Partition, lambda: &Partition) -> Result<Rational> {
    mu.parts()
        .iter()
        .try_fold(Rational::one(), |acc, &k| Ok(acc * shifted_power(k, lambda)?))
}

/// `s*_mu(lambda)` with the minimal padding `max(l(lambda), l(mu)) + 1`.
pub fn shifted_schur(mu: &Partition, lambda: &Partition) -> Rational {
    shifted_schur_padded(mu, lambda, lambda.len().max(mu.len()) + 1)
        .expect("minimal padding is large enough")
}

/// `s*_mu` evaluated at `lambda` padded with zeros to `n` variables.
pub fn shifted_schur_padded(mu: &Partition, lambda: &Partition, n: usize) -> Result<Rational> {
    if n < lambda.len() || n < mu.len() {
        return Err(Error::invalid(format!(
            "padding {n} is shorter than ({lambda}) or ({mu})"
        )));
    }
    if mu.is_empty() {
        return Ok(Rational::one());
    }
    let shifted: Vec<i64> = (0..n)
        .map(|i| lambda.part(i) as i64 + (n - 1 - i) as i64)
        .collect();
    let matrix = |exponent: &dyn Fn(usize) -> u64| -> Vec<Vec<BigInt>> {
        shifted
            .iter()
            .map(|&l| {
                (0..n)
                    .map(|j| falling_factorial_signed(l, exponent(j)))
                    .collect()
            })
            .collect()
    };
    let num = det_bareiss(matrix(&|j| mu.part(j) as u64 + (n - 1 - j) as u64));
    let den = det_bareiss(matrix(&|j| (n - 1 - j) as u64));
    Ok(Rational::new(num, den))
}

/// `dim(lambda/mu) / dim(lambda) = s*_mu(lambda) / (|lambda| falling |mu|)`.
pub fn oo_dim_ratio(lambda: &Partition, mu: &Partition) -> Result<Rational> {
    if mu.size() > lambda.size() {
        return Err(Error::invalid(format!(
            "|{mu}| exceeds |{lambda}|"
        )));
    }
    let fall = falling_factorial(lambda.size() as u64, mu.size() as u64);
    Ok(shifted_schur(mu, lambda) / Rational::from_integer(BigInt::from(fall)))
}

fn two_one_difference(eta: &Partition) -> Rational {
    let two = Partition::from_sorted(vec![2]);
    let one_one = Partition::all_ones(2);
    shifted_schur(&two, eta) - shifted_schur(&one_one, eta)
}

/// `v(eta) = (dim eta / (|eta| - 2)!) (s*_(2)(eta) - s*_(1,1)(eta)) / |eta|!`.
pub fn v_function(eta: &Partition) -> Result<Rational> {
    let n = eta.size() as u64;
    if n < 2 {
        return Err(Error::invalid(format!("v needs |eta| >= 2, got ({eta})")));
    }
    let dim = Rational::from_integer(BigInt::from(dimension(eta)));
    Ok(dim / Rational::from_integer(factorial_int(n - 2)) * two_one_difference(eta)
        / Rational::from_integer(factorial_int(n)))
}

/// `(chi^eta(2,1,...,1), dim eta (s*_(2)(eta) - s*_(1,1)(eta)) / (|eta| (|eta| - 1)))`.
pub fn chi_two_one_identity(eta: &Partition) -> Result<(BigInt, Rational)> {
    let n = eta.size();
    if n < 2 {
        return Err(Error::invalid(format!("needs |eta| >= 2, got ({eta})")));
    }
    let mut class = vec![2];
    class.extend(std::iter::repeat_n(1, n as usize - 2));
    let mn = character(eta, &Partition::from_sorted(class))?;
    let dim = Rational::from_integer(BigInt::from(dimension(eta)));
    let formula = dim * two_one_difference(eta)
        / Rational::from_integer(BigInt::from(n as u64 * (n as u64 - 1)));
    Ok((mn, formula))
}

/// Top-degree part `sum_rho chi^mu(rho) / z(rho) p_rho(lambda)` of `s*_mu`.
pub fn top_degree_part(mu: &Partition, lambda: &Partition) -> Result<Rational> {
    let mut total = Rational::zero();
    for rho in enumerate_partitions(mu.size(), PartitionFilter::All) {
        let chi = character(mu, &rho)?;
        if chi.is_zero() {
            continue;
        }
        total += Rational::new(chi, BigInt::from(centralizer_size(&rho)))
            * shifted_power_product(&rho, lambda)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::skew_dimension;
    use num_traits::ToPrimitive;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn zeta_values() {
        let t = ZetaTable::new(7);
        assert_eq!(t.value(1), &rat(-1, 12));
        assert_eq!(t.value(2), &rat(0, 1));
        assert_eq!(t.value(3), &rat(1, 120));
        assert_eq!(t.value(5), &rat(-1, 252));
        assert_eq!(t.value(7), &rat(1, 240));
        for k in (2..=20).step_by(2) {
            assert!(zeta_negative(k).is_zero());
        }
    }

    #[test]
    fn power_examples() {
        assert_eq!(shifted_power(1, &p("2")).unwrap(), rat(47, 24));
        assert_eq!(shifted_power(2, &p("1")).unwrap(), rat(0, 1));
        assert_eq!(shifted_power(3, &p("")).unwrap(), rat(7, 960));
        assert_eq!(
            shifted_power_product(&p("1,1"), &p("2")).unwrap(),
            rat(47 * 47, 24 * 24)
        );
        assert_eq!(shifted_power_product(&p(""), &p("3,1")).unwrap(), rat(1, 1));
        assert_eq!(shifted_power_product(&p("2"), &p("1")).unwrap(), rat(0, 1));
        assert!(shifted_power(0, &p("1")).is_err());
    }

    #[test]
    fn p1_is_size_minus_constant() {
        for n in 0..=10 {
            for lam in enumerate_partitions(n, PartitionFilter::All) {
                assert_eq!(
                    shifted_power(1, &lam).unwrap(),
                    rat(n as i64, 1) - rat(1, 24)
                );
            }
        }
    }

    #[test]
    fn schur_examples() {
        assert_eq!(shifted_schur(&p(""), &p("3,1")), rat(1, 1));
        assert_eq!(shifted_schur(&p("1"), &p("3,1")), rat(4, 1));
        assert_eq!(shifted_schur(&p("2"), &p("2")), rat(2, 1));
        assert!(shifted_schur_padded(&p("1"), &p("1,1"), 1).is_err());
    }

    #[test]
    fn dim_ratio_examples() {
        assert_eq!(oo_dim_ratio(&p("3,1"), &p("")).unwrap(), rat(1, 1));
        assert_eq!(oo_dim_ratio(&p("3,1"), &p("1")).unwrap(), rat(1, 1));
        assert_eq!(oo_dim_ratio(&p("2"), &p("1,1")).unwrap(), rat(0, 1));
        assert!(oo_dim_ratio(&p("1"), &p("2")).is_err());
    }

    #[test]
    fn stability_under_padding() {
        for m in 0..=5 {
            for mu in enumerate_partitions(m, PartitionFilter::All) {
                for n in 0..=8 {
                    for lam in enumerate_partitions(n, PartitionFilter::All) {
                        let need = lam.len().max(mu.len()) + 1;
                        let base = shifted_schur_padded(&mu, &lam, need).unwrap();
                        for extra in [1, 3] {
                            assert_eq!(
                                shifted_schur_padded(&mu, &lam, need + extra).unwrap(),
                                base,
                                "{mu:?} at {lam:?}"
                            );
                        }
                        assert_eq!(
                            shifted_schur_padded(&mu, &lam, need - 1).unwrap(),
                            base
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn vanishing_outside_containment() {
        for m in 0..=5 {
            for mu in enumerate_partitions(m, PartitionFilter::All) {
                for n in m..=10 {
                    for lam in enumerate_partitions(n, PartitionFilter::All) {
                        if !lam.contains(&mu) {
                            assert!(shifted_schur(&mu, &lam).is_zero(), "{mu:?} at {lam:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dim_ratio_matches_tableaux() {
        for n in 0..=10 {
            for lam in enumerate_partitions(n, PartitionFilter::All) {
                let dim = BigInt::from(dimension(&lam));
                for m in 0..=n.min(6) {
                    for mu in enumerate_partitions(m, PartitionFilter::All) {
                        let skew = BigInt::from(skew_dimension(&lam, &mu));
                        assert_eq!(
                            oo_dim_ratio(&lam, &mu).unwrap(),
                            Rational::new(skew, dim.clone()),
                            "{lam:?}/{mu:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn v_examples() {
        assert_eq!(v_function(&p("2")).unwrap(), rat(1, 1));
        assert_eq!(v_function(&p("1,1")).unwrap(), rat(-1, 1));
        // v(2,2) = (2/2!) * 0 / 4! since chi^(2,2)(2,1,1) = 0.
        assert_eq!(v_function(&p("2,2")).unwrap(), rat(0, 1));
        assert!(v_function(&p("1")).is_err());
    }

    #[test]
    fn chi_two_one() {
        let check = |s: &str, v: i64| {
            let (mn, formula) = chi_two_one_identity(&p(s)).unwrap();
            assert_eq!(mn, BigInt::from(v));
            assert_eq!(formula, Rational::from_integer(BigInt::from(v)));
        };
        check("2", 1);
        check("3,1", 1);
        check("2,2", 0);
        for n in 2..=10 {
            for eta in enumerate_partitions(n, PartitionFilter::All) {
                let (mn, formula) = chi_two_one_identity(&eta).unwrap();
                assert_eq!(Rational::from_integer(mn), formula, "{eta:?}");
            }
        }
    }

    #[test]
    fn top_degree_dominates_along_dilations() {
        for mu in [p("2"), p("1,1"), p("2,1"), p("3,1")] {
            let mut ratios = Vec::new();
            for k in [5u32, 10, 20] {
                let lam = Partition::new(vec![2 * k, k]).unwrap();
                let s = shifted_schur(&mu, &lam);
                let top = top_degree_part(&mu, &lam).unwrap();
                let defect = (&s - &top).to_f64().unwrap().abs();
                ratios.push(defect / top.to_f64().unwrap().abs());
            }
            assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{mu:?}: {ratios:?}");
        }
    }
}
