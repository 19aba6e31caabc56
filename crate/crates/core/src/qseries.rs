//! Truncated q-series with exact rational coefficients, the Eisenstein
//! generators `E2(q^2)`, `E2(q^4)`, `E4(q^4)`, quasimodular fitting and the
//! substitution that turns a fitted combination into its `h -> 0` asymptotics.
//!
//! Asymptotics are written in `H = 1/h`, where `q = e^{-h}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{parse_rational, rat};
use crate::error::{Error, Result};
use crate::linalg::{independent_rows, solve_full_column_rank};
use crate::Rational;

/// A power series in `q` known up to and including `q^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rational>,
}

impl QSeries {
    /// Series from coefficients `c_0, ..., c_N`.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least its constant term");
        QSeries { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        QSeries::from_coeffs(vec![Rational::zero(); n + 1])
    }

    pub fn constant(c: Rational, n: usize) -> Self {
        let mut s = QSeries::zero(n);
        s.coeffs[0] = c;
        s
    }

    pub fn one(n: usize) -> Self {
        QSeries::constant(Rational::one(), n)
    }

    /// Truncation degree `N`.
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `q^k`; zero past the truncation.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Same series cut down to precision `n`.
    pub fn truncate(&self, n: usize) -> QSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Rational::zero());
        QSeries { coeffs }
    }

    /// `f(q) -> f(q^k)`.
    pub fn substitute_power(&self, k: usize) -> QSeries {
        let n = self.precision();
        let mut out = QSeries::zero(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * k > n {
                break;
            }
            out.coeffs[i * k] = c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn common(&self, other: &QSeries) -> usize {
        self.precision().min(other.precision())
    }

    /// Inverse of a series with non-zero constant term.
    pub fn invert(&self) -> Result<QSeries> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::invalid("cannot invert a series with zero constant term"));
        }
        let n = self.precision();
        let inv0 = a0.recip();
        let mut b = vec![Rational::zero(); n + 1];
        b[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() && !b[k - j].is_zero() {
                    acc += &self.coeffs[j] * &b[k - j];
                }
            }
            b[k] = -acc * &inv0;
        }
        Ok(QSeries { coeffs: b })
    }

    /// `self^r` for rational `r` by the binomial series in `self/a0 - 1`.
    ///
    /// The constant term must be 1 unless `r` is an integer.
    pub fn pow_rational(&self, r: &Rational) -> Result<QSeries> {
        let a0 = self.coeffs[0].clone();
        if a0.is_zero() {
            return Err(Error::invalid(
                "rational power of a series with zero constant term",
            ));
        }
        let lead = if a0.is_one() {
            Rational::one()
        } else if r.is_integer() {
            let e = r.to_integer().to_i32().ok_or_else(|| Error::invalid("exponent too large"))?;
            crate::arith::rat_pow(&a0, e)
        } else {
            return Err(Error::invalid(format!(
                "rational power {r} needs constant term 1, got {a0}"
            )));
        };
        let n = self.precision();
        let mut u = self.scale(&a0.recip());
        u.coeffs[0] = Rational::zero();
        let mut result = QSeries::one(n);
        let mut power = QSeries::one(n);
        let mut binom = Rational::one();
        for j in 1..=n {
            power = &power * &u;
            binom = binom * (r - Rational::from_integer(BigInt::from(j - 1)))
                / Rational::from_integer(BigInt::from(j));
            if binom.is_zero() {
                break;
            }
            result = &result + &power.scale(&binom);
        }
        Ok(result.scale(&lead))
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        let n = self.common(rhs);
        QSeries {
            coeffs: (0..=n).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        let n = self.common(rhs);
        QSeries {
            coeffs: (0..=n).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect(),
        }
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        let n = self.common(rhs);
        let mut out = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        QSeries { coeffs: out }
    }
}

/// `prod_{i >= 1} (1 - q^{2i})` truncated at `q^n`.
pub fn even_euler_product(n: usize) -> QSeries {
    let mut acc = QSeries::one(n);
    for i in (2..=n).step_by(2) {
        let mut factor = QSeries::one(n);
        factor.coeffs[i] = -Rational::one();
        acc = &acc * &factor;
    }
    acc
}

/// `E_{2k}(q^scale)` normalised as `-1/24 + sum sigma_1(n) q^n` (k = 1) or
/// `1/240 + sum sigma_3(n) q^n` (k = 2).
pub fn eisenstein(k: u32, scale: usize, n: usize) -> Result<QSeries> {
    let (constant, exponent) = match k {
        1 => (rat(-1, 24), 1u32),
        2 => (rat(1, 240), 3u32),
        _ => return Err(Error::invalid(format!("eisenstein index must be 1 or 2, got {k}"))),
    };
    if scale == 0 {
        return Err(Error::invalid("eisenstein scale must be positive"));
    }
    let mut s = QSeries::constant(constant, n);
    for m in 1..=n / scale {
        let sigma: BigInt = (1..=m)
            .filter(|d| m % d == 0)
            .map(|d| BigInt::from(d).pow(exponent))
            .sum();
        s.coeffs[m * scale] = Rational::from_integer(sigma);
    }
    Ok(s)
}

/// The three generators of the fitting ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    E2Q2,
    E2Q4,
    E4Q4,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::E2Q2, Generator::E2Q4, Generator::E4Q4];

    /// Index 1, 2, 3 used in substitution-table files.
    pub fn index(self) -> u8 {
        match self {
            Generator::E2Q2 => 1,
            Generator::E2Q4 => 2,
            Generator::E4Q4 => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Generator> {
        Generator::ALL.into_iter().find(|g| g.index() == i)
    }

    pub fn weight(self) -> u32 {
        match self {
            Generator::E2Q2 | Generator::E2Q4 => 2,
            Generator::E4Q4 => 4,
        }
    }

    pub fn series(self, n: usize) -> QSeries {
        let (k, scale) = match self {
            Generator::E2Q2 => (1, 2),
            Generator::E2Q4 => (1, 4),
            Generator::E4Q4 => (2, 4),
        };
        eisenstein(k, scale, n).expect("valid generator parameters")
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::E2Q2 => "E2(q^2)",
            Generator::E2Q4 => "E2(q^4)",
            Generator::E4Q4 => "E4(q^4)",
        }
    }
}

/// A product of generators, kept sorted. The empty product is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<Generator>);

impl Monomial {
    pub fn new(mut gens: Vec<Generator>) -> Self {
        gens.sort();
        Monomial(gens)
    }

    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|g| g.weight()).sum()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn series(&self, n: usize) -> QSeries {
        self.0
            .iter()
            .fold(QSeries::one(n), |acc, g| &acc * &g.series(n))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for g in Generator::ALL {
            let e = self.0.iter().filter(|&&x| x == g).count();
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(g.name())?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// All monomials of at most `depth` generators, ordered by generator count
/// and then lexicographically.
fn monomials_up_to(depth: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::unit()];
    let mut layer = vec![Vec::<Generator>::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(Generator::E2Q2);
            for g in Generator::ALL.into_iter().filter(|&g| g >= start) {
                let mut v = m.clone();
                v.push(g);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(Monomial));
        layer = next;
    }
    out
}

/// Generator monomials with their series and the selected pivots.
#[derive(Clone, Debug)]
pub struct QuasimodularBasis {
    pub depth: usize,
    pub precision: usize,
    pub monomials: Vec<Monomial>,
    pub series: Vec<QSeries>,
    /// Indices into `monomials` of an independent subset, chosen greedily
    /// within each weight over the coefficients of `q^2, q^4, ...`.
    pub pivots: Vec<usize>,
}

/// Number of held-out coefficients a fit must reproduce beyond the ones it
/// was solved from.
pub const MIN_HELD_OUT: usize = 4;

/// Builds all monomials of at most `depth` generators, truncated at `q^n`.
///
/// Each homogeneous weight piece must have full rank on the coefficients of
/// `q^2, ..., q^n`; otherwise the error names the precision required.
pub fn build_basis(depth: usize, n: usize) -> Result<QuasimodularBasis> {
    use rayon::prelude::*;
    let monomials = monomials_up_to(depth);
    let series: Vec<QSeries> = monomials.par_iter().map(|m| m.series(n)).collect();
    let mut pivots = vec![0];
    let max_weight = 4 * depth as u32;
    for w in (2..=max_weight).step_by(2) {
        let members: Vec<usize> = (0..monomials.len())
            .filter(|&i| monomials[i].weight() == w)
            .collect();
        if members.is_empty() {
            continue;
        }
        let rows: Vec<Vec<Rational>> = members
            .iter()
            .map(|&i| even_coefficients(&series[i], 1))
            .collect();
        let kept = independent_rows(&rows);
        if kept.len() < members.len() {
            return Err(Error::RankDeficient {
                reason: format!(
                    "weight {w} has {} monomials but rank {} up to q^{n}",
                    members.len(),
                    kept.len()
                ),
                required: 2 * members.len(),
                available: n,
            });
        }
        pivots.extend(kept.into_iter().map(|k| members[k]));
    }
    Ok(QuasimodularBasis {
        depth,
        precision: n,
        monomials,
        series,
        pivots,
    })
}

/// Coefficients of `q^{2 start}, q^{2 start + 2}, ..., q^{2 floor(N/2)}`.
fn even_coefficients(s: &QSeries, start: usize) -> Vec<Rational> {
    (start..=s.precision() / 2).map(|m| s.coeff(2 * m)).collect()
}

/// A fitted linear combination of monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combination {
    pub terms: Vec<(Monomial, Rational)>,
    /// Largest weight among the candidate monomials.
    pub weight: u32,
    /// Whether every candidate monomial had the same weight (the constant
    /// aside).
    pub homogeneous: bool,
    pub equations: usize,
    pub held_out: usize,
}

impl Combination {
    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms
            .iter()
            .find(|(x, _)| x == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl QuasimodularBasis {
    /// Fits `s` by a combination of monomials of a single weight (plus a
    /// constant), trying weights in increasing order and then mixed weights.
    ///
    /// Only even coefficients are used. A candidate is accepted only if the
    /// solution reproduces every available even coefficient, at least
    /// [`MIN_HELD_OUT`] of them not used to determine it.
    pub fn fit(&self, s: &QSeries) -> Result<Combination> {
        let n = self.precision.min(s.precision());
        if let Some(k) = (1..=n).step_by(2).find(|&k| !s.coeff(k).is_zero()) {
            return Err(Error::invalid(format!(
                "series has a non-zero odd coefficient at q^{k}"
            )));
        }
        let target: Vec<Rational> = (0..=n / 2).map(|m| s.coeff(2 * m)).collect();
        let equations = target.len();
        let max_weight = 4 * self.depth as u32;

        let mut candidates: Vec<(Vec<usize>, u32, bool)> = Vec::new();
        for w in (0..=max_weight).step_by(2) {
            let mut cols = vec![0];
            cols.extend((1..self.monomials.len()).filter(|&i| self.monomials[i].weight() == w));
            if w == 0 || cols.len() > 1 {
                candidates.push((cols, w, true));
            }
        }
        for w in (4..=max_weight).step_by(2) {
            let cols = (0..self.monomials.len())
                .filter(|&i| self.monomials[i].weight() <= w)
                .collect();
            candidates.push((cols, w, false));
        }

        let mut shortfall: Option<usize> = None;
        for (cols, weight, homogeneous) in candidates {
            let columns: Vec<Vec<Rational>> = cols
                .iter()
                .map(|&i| (0..equations).map(|m| self.series[i].coeff(2 * m)).collect())
                .collect();
            let independent = independent_rows(&columns);
            let unknowns = independent.len();
            if unknowns + MIN_HELD_OUT > equations {
                let need = unknowns + MIN_HELD_OUT;
                shortfall = Some(shortfall.map_or(need, |s: usize| s.min(need)));
                continue;
            }
            let a: Vec<Vec<Rational>> = (0..equations)
                .map(|m| independent.iter().map(|&c| columns[c][m].clone()).collect())
                .collect();
            if let Some(x) = solve_full_column_rank(&a, &target) {
                let terms = independent
                    .iter()
                    .zip(x)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(&c, v)| (self.monomials[cols[c]].clone(), v))
                    .collect();
                return Ok(Combination {
                    terms,
                    weight,
                    homogeneous,
                    equations,
                    held_out: equations - unknowns,
                });
            }
        }
        match shortfall {
            Some(need) => Err(Error::RankDeficient {
                reason: format!(
                    "no candidate up to weight {max_weight} fits with {MIN_HELD_OUT} held-out coefficients"
                ),
                required: need,
                available: equations,
            }),
            None => Err(Error::NotQuasimodular(format!(
                "no combination of at most {} generators (weight <= {max_weight}) reproduces the {equations} even coefficients",
                self.depth
            ))),
        }
    }
}

/// Free-function form of [`QuasimodularBasis::fit`].
pub fn fit_quasimodular(basis: &QuasimodularBasis, s: &QSeries) -> Result<Combination> {
    basis.fit(s)
}

/// Polynomial in `H` with coefficients in `Q[pi^2]`: key `(j, k)` stands for
/// `pi^{2k} H^j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AsymptoticPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl AsymptoticPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(0, 0, c)
    }

    /// `c pi^{2 k} H^j`.
    pub fn term(h_power: u32, pi2_power: u32, c: Rational) -> Self {
        let mut p = Self::default();
        p.add_term(h_power, pi2_power, c);
        p
    }

    fn add_term(&mut self, h_power: u32, pi2_power: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry((h_power, pi2_power))
            .or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(h_power, pi2_power));
        }
    }

    pub fn coeff(&self, h_power: u32, pi2_power: u32) -> Rational {
        self.terms
            .get(&(h_power, pi2_power))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Terms as `((h_power, pi2_power), coeff)`, descending in `H`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter().rev()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::default();
        for (&(j, k), v) in &self.terms {
            out.add_term(j, k, v * c);
        }
        out
    }

    /// Numeric value at a given `H`.
    pub fn eval(&self, h_inv: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(j, k), c)| {
                c.to_f64().unwrap_or(f64::NAN)
                    * std::f64::consts::PI.powi(2 * k as i32)
                    * h_inv.powi(j as i32)
            })
            .sum()
    }

    /// Numeric coefficient of `H^j` (powers of pi folded in).
    pub fn h_coefficient(&self, j: u32) -> f64 {
        self.terms
            .iter()
            .filter(|(&(jj, _), _)| jj == j)
            .map(|(&(_, k), c)| {
                c.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(2 * k as i32)
            })
            .sum()
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(AsymptoticPoly::constant(Rational::one()), |acc, _| &acc * self)
    }

    pub fn to_json(&self) -> AsymptoticPolyJson {
        AsymptoticPolyJson {
            terms: self
                .terms()
                .map(|(&(j, k), c)| TermJson {
                    h_power: j,
                    pi2_power: k,
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &AsymptoticPolyJson) -> Result<Self> {
        let mut p = Self::default();
        for t in &json.terms {
            p.add_term(t.h_power, t.pi2_power, parse_rational(&t.coeff)?);
        }
        Ok(p)
    }
}

/// Serialized form `{"terms": [{"h_power", "pi2_power", "coeff"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AsymptoticPolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermJson {
    pub h_power: u32,
    pub pi2_power: u32,
    pub coeff: String,
}

impl fmt::Display for AsymptoticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&(j, k), c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mut parts = Vec::new();
            if !mag.is_one() || (j == 0 && k == 0) {
                parts.push(mag.to_string());
            }
            if k > 0 {
                parts.push(format!("pi^{}", 2 * k));
            }
            match j {
                0 => {}
                1 => parts.push("H".to_string()),
                _ => parts.push(format!("H^{j}")),
            }
            f.write_str(&parts.join(" "))?;
        }
        Ok(())
    }
}

impl Add for &AsymptoticPoly {
    type Output = AsymptoticPoly;
    fn add(self, rhs: &AsymptoticPoly) -> AsymptoticPoly {
        let mut out = self.clone();
        for (&(j, k), c) in &rhs.terms {
            out.add_term(j, k, c.clone());
        }
        out
    }
}

impl Sub for &AsymptoticPoly {
    type Output = AsymptoticPoly;
    fn sub(self, rhs: &AsymptoticPoly) -> AsymptoticPoly {
        self + &(-rhs)
    }
}

impl Neg for &AsymptoticPoly {
    type Output = AsymptoticPoly;
    fn neg(self) -> AsymptoticPoly {
        self.scale(&-Rational::one())
    }
}

impl Mul for &AsymptoticPoly {
    type Output = AsymptoticPoly;
    fn mul(self, rhs: &AsymptoticPoly) -> AsymptoticPoly {
        let mut out = AsymptoticPoly::default();
        for (&(j1, k1), c1) in &self.terms {
            for (&(j2, k2), c2) in &rhs.terms {
                out.add_term(j1 + j2, k1 + k2, c1 * c2);
            }
        }
        out
    }
}

/// Asymptotic value of each generator as a polynomial in `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionTable {
    entries: BTreeMap<Generator, AsymptoticPoly>,
}

impl Default for SubstitutionTable {
    /// `E2(q^2) -> pi^2/24 H^2 + H/4`, `E2(q^4) -> pi^2/96 H^2 + H/8`,
    /// `E4(q^4) -> pi^4/3840 H^4`.
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            Generator::E2Q2,
            &AsymptoticPoly::term(2, 1, rat(1, 24)) + &AsymptoticPoly::term(1, 0, rat(1, 4)),
        );
        entries.insert(
            Generator::E2Q4,
            &AsymptoticPoly::term(2, 1, rat(1, 96)) + &AsymptoticPoly::term(1, 0, rat(1, 8)),
        );
        entries.insert(Generator::E4Q4, AsymptoticPoly::term(4, 2, rat(1, 3840)));
        SubstitutionTable { entries }
    }
}

impl SubstitutionTable {
    /// The table as printed in the original program, whose `E2(q^2)` entry
    /// `pi^2/24 H + H/4` is of degree 1.
    pub fn appendix() -> Self {
        let mut table = SubstitutionTable::default();
        table.set(
            Generator::E2Q2,
            &AsymptoticPoly::term(1, 1, rat(1, 24)) + &AsymptoticPoly::term(1, 0, rat(1, 4)),
        );
        table
    }

    pub fn get(&self, g: Generator) -> &AsymptoticPoly {
        &self.entries[&g]
    }

    pub fn set(&mut self, g: Generator, value: AsymptoticPoly) {
        self.entries.insert(g, value);
    }

    /// Parses `{"1": {"terms": [...]}, "2": ..., "3": ...}`. Missing entries
    /// keep their default.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, AsymptoticPolyJson> =
            serde_json::from_str(text).map_err(|e| Error::Parse {
                what: "substitution table",
                input: text.chars().take(80).collect(),
                reason: e.to_string(),
            })?;
        let mut table = SubstitutionTable::default();
        for (key, poly) in raw {
            let g = key
                .parse::<u8>()
                .ok()
                .and_then(Generator::from_index)
                .ok_or_else(|| Error::Parse {
                    what: "substitution table",
                    input: key.clone(),
                    reason: "keys must be \"1\", \"2\" or \"3\"".into(),
                })?;
            table.set(g, AsymptoticPoly::from_json(&poly)?);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::Data {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let map: BTreeMap<String, AsymptoticPolyJson> = self
            .entries
            .iter()
            .map(|(g, p)| (g.index().to_string(), p.to_json()))
            .collect();
        serde_json::to_string_pretty(&map).expect("serializable")
    }
}

/// `sum coeff * prod table[generator]` over the combination.
pub fn asymptotic_value(combination: &Combination, table: &SubstitutionTable) -> AsymptoticPoly {
    combination
        .terms
        .iter()
        .fold(AsymptoticPoly::zero(), |acc, (m, c)| {
            let product = m
                .generators()
                .iter()
                .fold(AsymptoticPoly::constant(Rational::one()), |p, g| {
                    &p * table.get(*g)
                });
            &acc + &product.scale(c)
        })
}

/// Result of running the asymptotic pipeline on one expectation series.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// `<f>_q = Z^{-1} sum w f q^|lambda|`, truncated.
    pub normalized: QSeries,
    pub combination: Combination,
    pub asymptotics: AsymptoticPoly,
}

/// Divides the weighted sums by the partition function, fits the result with
/// `basis` and substitutes `table`.
pub fn analyze_series(
    series: &crate::volumes::ExpectationSeries,
    basis: &QuasimodularBasis,
    table: &SubstitutionTable,
) -> Result<Analysis> {
    let numerator = series.to_qseries();
    let n = numerator.precision();
    let inverse_z = even_euler_product(n).pow_rational(&rat(1, 2))?;
    let normalized = &numerator * &inverse_z;
    let combination = basis.fit(&normalized)?;
    let asymptotics = asymptotic_value(&combination, table);
    Ok(Analysis {
        normalized,
        combination,
        asymptotics,
    })
}

/// Full pipeline: weighted sums to half-size `max_half`, fit with at most
/// `depth` generators, substitution.
pub fn analyze_expectation(
    engine: &crate::volumes::ExpectationEngine,
    f: &crate::volumes::ObservableId,
    max_half: usize,
    depth: usize,
    table: &SubstitutionTable,
) -> Result<AsymptoticPoly> {
    let series = engine.series(f, max_half)?;
    let basis = build_basis(depth, 2 * max_half)?;
    Ok(analyze_series(&series, &basis, table)?.asymptotics)
}

/// Numerically fitted expansion of one generator at `q = e^{-h}`.
#[derive(Clone, Debug)]
pub struct GeneratorFit {
    pub name: String,
    /// Fitted coefficients of `H^0, H^1, ...`.
    pub fitted: Vec<f64>,
    /// The table's coefficients of `H^0, H^1, ...`.
    pub table: Vec<f64>,
    /// Relative deviation on the leading `H` power.
    pub leading_relative_error: f64,
    /// Powers of `H` whose coefficients disagree beyond the tolerance.
    pub mismatched_powers: Vec<u32>,
}

impl GeneratorFit {
    pub fn leading_ok(&self) -> bool {
        self.leading_relative_error <= VALIDATION_TOLERANCE
    }

    pub fn all_ok(&self) -> bool {
        self.mismatched_powers.is_empty()
    }
}

/// Relative tolerance used when comparing fitted and tabulated coefficients.
pub const VALIDATION_TOLERANCE: f64 = 1e-6;

/// Default grid of `h` values for [`validate_substitution_table`].
pub const DEFAULT_H_GRID: [f64; 8] = [0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.12];

/// Evaluates every generator (and the constant) at `q = e^{-h}` on the grid,
/// fits `sum_{j <= 4} c_j H^j` by least squares and compares with `table`.
///
/// The sums are taken to `q^n`; `n` must make `e^{-n h}` negligible on the grid.
pub fn validate_substitution_table(
    table: &SubstitutionTable,
    n: usize,
    h_grid: &[f64],
) -> Result<Vec<GeneratorFit>> {
    const DEGREE: usize = 4;
    if h_grid.len() <= DEGREE {
        return Err(Error::invalid(format!(
            "need more than {DEGREE} grid points, got {}",
            h_grid.len()
        )));
    }
    if h_grid.iter().any(|&h| h <= 0.0) {
        return Err(Error::invalid("grid values must be positive"));
    }
    let hmax = h_grid.iter().cloned().fold(0.0, f64::max);
    let mut reports = Vec::new();

    let mut cases: Vec<(String, Vec<f64>, AsymptoticPoly)> = vec![(
        "1".to_string(),
        {
            let mut c = vec![0.0; n + 1];
            c[0] = 1.0;
            c
        },
        AsymptoticPoly::constant(Rational::one()),
    )];
    for g in Generator::ALL {
        let coeffs = g
            .series(n)
            .coeffs()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        cases.push((g.name().to_string(), coeffs, table.get(g).clone()));
    }

    for (name, coeffs, poly) in cases {
        let values: Vec<f64> = h_grid
            .iter()
            .map(|&h| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * (-(k as f64) * h).exp())
                    .sum()
            })
            .collect();
        // Unknowns are c_j hmax^{-j} so the columns are comparable in size.
        let design = nalgebra::DMatrix::from_fn(h_grid.len(), DEGREE + 1, |r, j| {
            (hmax / h_grid[r]).powi(j as i32)
        });
        let rhs = nalgebra::DVector::from_vec(values);
        let svd = design.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
        let fitted: Vec<f64> = (0..=DEGREE)
            .map(|j| sol[j] * hmax.powi(j as i32))
            .collect();
        let table_coeffs: Vec<f64> = (0..=DEGREE as u32).map(|j| poly.h_coefficient(j)).collect();
        let lead = (0..=DEGREE)
            .rev()
            .find(|&j| fitted[j].abs() > 1e-6 || table_coeffs[j] != 0.0)
            .unwrap_or(0);
        let rel = |a: f64, b: f64| {
            let scale = a.abs().max(b.abs());
            if scale < 1e-9 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        };
        let leading_relative_error = rel(fitted[lead], table_coeffs[lead]);
        // Lower coefficients are fitted less precisely; compare them absolutely
        // against the size of the leading one.
        let mismatched_powers = (0..=DEGREE)
            .filter(|&j| {
                let tol = if j == lead {
                    VALIDATION_TOLERANCE
                } else {
                    1e-4
                };
                rel(fitted[j], table_coeffs[j]) > tol
                    && (fitted[j] - table_coeffs[j]).abs() > 1e-4
            })
            .map(|j| j as u32)
            .collect();
        reports.push(GeneratorFit {
            name,
            fitted,
            table: table_coeffs,
            leading_relative_error,
            mismatched_powers,
        });
    }
    Ok(reports)
}

/// Fourth central moment of `p1` and `3 (variance)^2`, from the expansions of
/// `<p1>`, `<p1^2>`, `<p1^3>`, `<p1^4>`.
pub fn fourth_moment_comparison(
    p1: &AsymptoticPoly,
    p11: &AsymptoticPoly,
    p111: &AsymptoticPoly,
    p1111: &AsymptoticPoly,
) -> (AsymptoticPoly, AsymptoticPoly) {
    let a = p1;
    let r = |n: i64| Rational::from_integer(BigInt::from(n));
    let lhs = &(&(p1111 - &(a * p111).scale(&r(4))) + &(&a.pow(2) * p11).scale(&r(6)))
        - &a.pow(4).scale(&r(3));
    let var = p11 - &a.pow(2);
    let rhs = (&var * &var).scale(&r(3));
    (lhs, rhs)
}

/// `<(p1 - <p1>)^3 (p3 - <p3>)>` and `3 var(p1) cov(p1, p3)`.
#[allow(clippy::too_many_arguments)]
pub fn mixed_moment_comparison(
    p1: &AsymptoticPoly,
    p3: &AsymptoticPoly,
    p11: &AsymptoticPoly,
    p13: &AsymptoticPoly,
    p111: &AsymptoticPoly,
    p113: &AsymptoticPoly,
    p1113: &AsymptoticPoly,
) -> (AsymptoticPoly, AsymptoticPoly) {
    let (a, b) = (p1, p3);
    let r = |n: i64| Rational::from_integer(BigInt::from(n));
    let with_p3 = &(&(p1113 - &(a * p113).scale(&r(3))) + &(&a.pow(2) * p13).scale(&r(3)))
        - &(&a.pow(3) * b);
    let without = &(&(p111 - &(a * p11).scale(&r(3))) + &(&a.pow(2) * p1).scale(&r(3)))
        - &a.pow(3);
    let lhs = &with_p3 - &(b * &without);
    let var = p11 - &a.pow(2);
    let cov = p13 - &(a * b);
    let rhs = (&var * &cov).scale(&r(3));
    (lhs, rhs)
}
