//! The pillowcase weight
//!
//! ```text
//! w(lambda) = (dim lambda / |lambda|!)^2 f_{(2,...,2)}(lambda)^4
//! ```
//!
//! and its partition function `sum_lambda w(lambda) q^|lambda|`, which is the
//! product `prod_i (1 - q^{2i})^{-1/2}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorial_int, pow2};
use crate::characters::{central_character, dimension};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::qseries::QSeries;
use crate::Rational;

/// A partition together with its weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightRecord {
    pub lambda: Partition,
    pub weight: Rational,
}

impl WeightRecord {
    pub fn new(lambda: Partition) -> Self {
        let weight = pillowcase_weight(&lambda);
        WeightRecord { lambda, weight }
    }
}

/// The weight from its definition via characters. Zero for odd size and for
/// unbalanced partitions.
pub fn pillowcase_weight(lambda: &Partition) -> Rational {
    if lambda.size() % 2 == 1 {
        return Rational::zero();
    }
    let f = central_character(&Partition::empty(), lambda).expect("even size pads with twos");
    if f.is_zero() {
        return Rational::zero();
    }
    let ratio = Rational::new(
        BigInt::from(dimension(lambda)),
        factorial_int(lambda.size() as u64),
    );
    let f2 = &f * &f;
    &ratio * &ratio * &f2 * &f2
}

/// `(prod odd hooks / prod even hooks)^2`, defined for balanced partitions.
pub fn pillowcase_weight_hooks(lambda: &Partition) -> Result<Rational> {
    if !lambda.is_balanced() {
        return Err(Error::invalid(format!(
            "hook formula needs a balanced partition, got ({lambda})"
        )));
    }
    let (mut odd, mut even) = (BigInt::one(), BigInt::one());
    for h in lambda.hook_lengths() {
        if h % 2 == 1 {
            odd *= h;
        } else {
            even *= h;
        }
    }
    let r = Rational::new(odd, even);
    Ok(&r * &r)
}

/// Integers `C_m = 4^m [q^{2m}] prod_i (1 - q^{2i})^{-1/2}` for `m <= max_half`.
///
/// From the logarithmic derivative, `2m C_m = sum_k sigma(k) 4^k C_{m-k}`.
pub fn scaled_partition_function(max_half: usize) -> Vec<BigInt> {
    let sigma = divisor_sums(max_half);
    let mut c = vec![BigInt::one()];
    for m in 1..=max_half {
        let mut acc = BigInt::zero();
        for k in 1..=m {
            acc += (&c[m - k] * sigma[k]) << (2 * k);
        }
        let (quot, rem) = acc.div_rem(&BigInt::from(2 * m));
        assert!(rem.is_zero(), "scaled coefficient {m} is not integral");
        c.push(quot);
    }
    c
}

pub(crate) fn divisor_sums(n: usize) -> Vec<u64> {
    let mut sigma = vec![0u64; n + 1];
    for d in 1..=n {
        for m in (d..=n).step_by(d) {
            sigma[m] += d as u64;
        }
    }
    sigma
}

/// `prod_i (1 - q^{2i})^{-1/2}` truncated at `q^n`.
pub fn weight_partition_function_series(n: usize) -> QSeries {
    let scaled = scaled_partition_function(n / 2);
    let mut coeffs = vec![Rational::zero(); n + 1];
    for (m, c) in scaled.into_iter().enumerate() {
        coeffs[2 * m] = Rational::new(c, pow2(2 * m as u32));
    }
    QSeries::from_coeffs(coeffs)
}

/// Natural logarithm of a positive big integer.
pub(crate) fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive());
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift as usize).to_f64().expect("60-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `Z_n` divided by `e^{pi sqrt(n/6)} / (2^{1/8} 3^{3/8} n^{7/8})`.
pub fn meinardus_ratio(n: u32) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid(format!("meinardus ratio needs even n >= 2, got {n}")));
    }
    let half = n as usize / 2;
    let scaled = scaled_partition_function(half);
    Ok(meinardus_ratio_from(n, &scaled[half]))
}

/// Same as [`meinardus_ratio`] for several sizes sharing one recurrence run.
pub fn meinardus_ratios(ns: &[u32]) -> Result<Vec<f64>> {
    if let Some(&bad) = ns.iter().find(|&&n| n < 2 || n % 2 == 1) {
        return Err(Error::invalid(format!("meinardus ratio needs even n >= 2, got {bad}")));
    }
    let max = ns.iter().copied().max().unwrap_or(0) as usize / 2;
    let scaled = scaled_partition_function(max);
    Ok(ns
        .iter()
        .map(|&n| meinardus_ratio_from(n, &scaled[n as usize / 2]))
        .collect())
}

fn meinardus_ratio_from(n: u32, scaled: &BigInt) -> f64 {
    let nf = n as f64;
    let ln_z = ln_bigint(scaled) - nf * std::f64::consts::LN_2;
    let ln_asym = std::f64::consts::PI * (nf / 6.0).sqrt()
        - (2f64.ln() / 8.0 + 3f64.ln() * 3.0 / 8.0)
        - 7.0 / 8.0 * nf.ln();
    (ln_z - ln_asym).exp()
}
