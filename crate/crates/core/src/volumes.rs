//! The functions `g_nu`, their quotient-side expansion, and the engine that
//! computes `sum_{|lambda| = 2m} w(lambda) f(lambda)` for observables `f`.
//!
//! Balanced partitions are enumerated through their 2-quotients: the block
//! `(n1, n2)` collects all `lambda` with `|alpha| = n1`, `|beta| = n2`. Inside
//! a block the even hook lengths of `lambda` are twice the hooks of `alpha`
//! and `beta`, so
//!
//! ```text
//! w(lambda) = (O(lambda) dim alpha dim beta)^2 / (4^m n1!^2 n2!^2)
//! ```
//!
//! with `O` the product of odd hooks and `m = n1 + n2`. The denominator is
//! shared by the whole block, which keeps block sums in integers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::arith::{factorial_int, parse_rational, pow2};
use crate::characters::{
    centralizer_size, character, character_table, dimension, involution_character, pad_with_twos,
};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition, PartitionFilter, TwoQuotient};
use crate::shifted::{shifted_power_scaled, shifted_schur, ZetaTable};
use crate::Rational;

/// Observable index, block sizes and value for one computed block.
type BlockValues = Vec<(usize, u32, u32, Rational)>;

fn check_g_arguments(nu: &Partition, lambda: &Partition) -> Result<()> {
    if nu.size() % 2 == 1 {
        return Err(Error::invalid(format!("|nu| must be even, got ({nu})")));
    }
    if !lambda.is_balanced() {
        return Err(Error::invalid(format!("({lambda}) is not balanced")));
    }
    Ok(())
}

/// `g_nu(lambda)` from the padded character ratio
///
/// ```text
/// 2^{|nu|/2} (|lambda|/2)! / (z(nu) ((|lambda| - |nu|)/2)!) * chi^lambda(nu,2,...,2) / chi^lambda(2,...,2)
/// ```
pub fn g_direct(nu: &Partition, lambda: &Partition) -> Result<Rational> {
    check_g_arguments(nu, lambda)?;
    if nu.size() > lambda.size() {
        return Err(Error::invalid(format!("|{nu}| exceeds |{lambda}|")));
    }
    let half = (lambda.size() / 2) as u64;
    let rest = ((lambda.size() - nu.size()) / 2) as u64;
    let numerator = character(lambda, &pad_with_twos(nu, lambda.size())?)?;
    let denominator = involution_character(lambda, &Partition::empty())?;
    assert!(!denominator.is_zero(), "balanced partitions have non-zero involution character");
    let prefactor = Rational::new(
        pow2(nu.size() / 2) * factorial_int(half),
        BigInt::from(centralizer_size(nu)) * factorial_int(rest),
    );
    Ok(prefactor * Rational::new(numerator, denominator))
}

/// Signed quotient products `h_mu(lambda) = (-1)^{o_mu/2} s*_a(alpha) s*_b(beta)`
/// over balanced `mu` of size `m`.
pub fn h_vector(lambda: &Partition, m: u32) -> Result<BTreeMap<Partition, Rational>> {
    if m % 2 == 1 {
        return Err(Error::invalid(format!("m must be even, got {m}")));
    }
    if !lambda.is_balanced() {
        return Err(Error::invalid(format!("({lambda}) is not balanced")));
    }
    let q = lambda.two_core_quotient();
    Ok(enumerate_partitions(m, PartitionFilter::Balanced)
        .into_iter()
        .map(|mu| {
            let value = h_entry(&mu, &q);
            (mu, value)
        })
        .collect())
}

fn h_entry(mu: &Partition, q: &TwoQuotient) -> Rational {
    let r = mu.two_core_quotient();
    let v = shifted_schur(&r.alpha, &q.alpha) * shifted_schur(&r.beta, &q.beta);
    if (mu.odd_parts_count() / 2) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `g_nu(lambda) = 2^{|nu|/2} / z(nu) sum_mu (-1)^{o_mu/2} chi^mu(nu) s*_a(alpha) s*_b(beta)`,
/// the sum running over balanced `mu` of size `|nu|`.
pub fn g_structural(nu: &Partition, lambda: &Partition) -> Result<Rational> {
    check_g_arguments(nu, lambda)?;
    let q = lambda.two_core_quotient();
    let mut total = Rational::zero();
    for mu in enumerate_partitions(nu.size(), PartitionFilter::Balanced) {
        let chi = character(&mu, nu)?;
        if chi.is_zero() {
            continue;
        }
        total += Rational::from_integer(chi) * h_entry(&mu, &q);
    }
    Ok(total * Rational::new(pow2(nu.size() / 2), BigInt::from(centralizer_size(nu))))
}

/// Checks `V_nu = sum_mu chi^mu(nu) h_mu / z(nu)` and
/// `h_mu = sum_nu chi^mu(nu) V_nu` at `lambda`, where `V_nu = 2^{-|nu|/2} g_nu`
/// is taken from [`g_direct`], `mu` runs over balanced partitions of `m` and
/// `nu` over all partitions of `m`.
pub fn character_transform_check(lambda: &Partition, m: u32) -> Result<bool> {
    let h = h_vector(lambda, m)?;
    if m > lambda.size() {
        return Err(Error::invalid(format!("m = {m} exceeds |{lambda}|")));
    }
    let table = character_table(m, m.max(crate::characters::DEFAULT_TABLE_BOUND))?;
    let mut v = Vec::with_capacity(table.classes.len());
    for nu in &table.classes {
        v.push(g_direct(nu, lambda)? / Rational::from_integer(pow2(m / 2)));
    }
    for (j, nu) in table.classes.iter().enumerate() {
        let z = Rational::from_integer(BigInt::from(centralizer_size(nu)));
        let rhs: Rational = h
            .iter()
            .map(|(mu, hv)| {
                let chi = table.value(mu, nu).expect("table covers all partitions");
                Rational::from_integer(chi.clone()) * hv
            })
            .sum::<Rational>()
            / z;
        if rhs != v[j] {
            return Ok(false);
        }
    }
    for (mu, hv) in &h {
        let lhs: Rational = table
            .classes
            .iter()
            .enumerate()
            .map(|(j, nu)| Rational::from_integer(table.value(mu, nu).unwrap().clone()) * &v[j])
            .sum();
        if &lhs != hv {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `sum_mu chi^mu(nu) chi^mu(2,...,2)` over balanced `mu` of size `|nu|`.
pub fn leading_term_vanishing(nu: &Partition) -> Result<BigInt> {
    if nu.size() % 2 == 1 {
        return Err(Error::invalid(format!("|nu| must be even, got ({nu})")));
    }
    let mut total = BigInt::zero();
    for mu in enumerate_partitions(nu.size(), PartitionFilter::Balanced) {
        total += character(&mu, nu)? * involution_character(&mu, &Partition::empty())?;
    }
    Ok(total)
}

/// One factor of an observable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// Shifted power sum `p_k`.
    P(u32),
    /// `g_nu`.
    G(Partition),
}

/// A product of `p_k` and `g_nu` factors; the empty product is `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObservableId {
    factors: Vec<Factor>,
}

impl ObservableId {
    pub fn one() -> Self {
        ObservableId { factors: vec![] }
    }

    pub fn new(mut factors: Vec<Factor>) -> Self {
        factors.sort();
        ObservableId { factors }
    }

    /// `p_mu = prod p_{mu_i}`.
    pub fn p_monomial(mu: &[u32]) -> Self {
        Self::new(mu.iter().map(|&k| Factor::P(k)).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Canonical text; two observables are equal iff their texts are.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    fn p_parts(&self) -> Option<Vec<u32>> {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::P(k) => Some(*k),
                Factor::G(_) => None,
            })
            .collect()
    }

    /// Value at a balanced partition.
    pub fn evaluate(&self, lambda: &Partition) -> Result<Rational> {
        let zeta = ZetaTable::new(self.max_k() as usize);
        let mut acc = Rational::one();
        for f in &self.factors {
            acc *= match f {
                Factor::P(k) => {
                    let (n, d) = shifted_power_scaled(*k, lambda, &zeta);
                    Rational::new(n, d)
                }
                Factor::G(nu) => g_structural(nu, lambda)?,
            };
        }
        Ok(acc)
    }

    fn max_k(&self) -> u32 {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::P(k) => Some(*k),
                Factor::G(_) => None,
            })
            .max()
            .unwrap_or(1)
    }
}

impl fmt::Display for ObservableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.factors.len() {
            let run = self.factors[i..]
                .iter()
                .take_while(|x| **x == self.factors[i])
                .count();
            if !first {
                f.write_str("*")?;
            }
            first = false;
            match &self.factors[i] {
                Factor::P(k) => write!(f, "p{k}")?,
                Factor::G(nu) => write!(f, "g[{nu}]")?,
            }
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl FromStr for ObservableId {
    type Err = Error;

    /// Grammar: `1`, or factors `p<k>` / `g[<partition>]`, each optionally
    /// followed by `^<e>`, joined by `*`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            what: "observable",
            input: s.to_string(),
            reason,
        };
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut factors = Vec::new();
        for token in split_top_level(&text) {
            let (base, exp) = match token.rfind('^') {
                Some(pos) if !token[pos..].contains(']') => {
                    let e: usize = token[pos + 1..]
                        .parse()
                        .map_err(|_| err(format!("bad exponent in {token:?}")))?;
                    (&token[..pos], e)
                }
                _ => (token, 1),
            };
            if base == "1" {
                continue;
            }
            let factor = if let Some(k) = base.strip_prefix('p') {
                let k: u32 = k
                    .parse()
                    .map_err(|_| err(format!("bad power-sum index in {base:?}")))?;
                if k == 0 {
                    return Err(err("p0 is not an observable".into()));
                }
                Factor::P(k)
            } else if let Some(rest) = base.strip_prefix("g[") {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated {base:?}")))?;
                let nu: Partition = inner.parse().map_err(|e: Error| err(e.to_string()))?;
                if nu.size() % 2 == 1 {
                    return Err(err(format!("g[{nu}] needs |nu| even")));
                }
                Factor::G(nu)
            } else {
                return Err(err(format!("unknown factor {base:?}")));
            };
            factors.extend(std::iter::repeat_n(factor, exp));
        }
        Ok(ObservableId::new(factors))
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// Coefficients `sum_{|lambda| = 2m} w(lambda) f(lambda)` for `m = 0..=M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationSeries {
    pub observable: ObservableId,
    pub coefficients: Vec<Rational>,
}

impl ExpectationSeries {
    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// The series in `q` (odd coefficients zero), truncated at `q^{2M}`.
    pub fn to_qseries(&self) -> crate::qseries::QSeries {
        let mut c = vec![Rational::zero(); 2 * self.truncation() + 1];
        for (m, v) in self.coefficients.iter().enumerate() {
            c[2 * m] = v.clone();
        }
        crate::qseries::QSeries::from_coeffs(c)
    }
}

/// File-backed store of block sums: `<root>/<hash>/<n1>-<n2>.dat`.
#[derive(Clone, Debug)]
pub struct BlockCache {
    root: PathBuf,
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().expect("cache files live in a directory");
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        path.file_name().unwrap().to_string_lossy(),
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

impl BlockCache {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(BlockCache { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn observable_dir(&self, f: &ObservableId) -> PathBuf {
        self.root.join(f.hash())
    }

    pub fn block_path(&self, f: &ObservableId, n1: u32, n2: u32) -> PathBuf {
        self.observable_dir(f).join(format!("{n1}-{n2}.dat"))
    }

    pub fn manifest_path(&self, f: &ObservableId) -> PathBuf {
        self.observable_dir(f).join("manifest.txt")
    }

    fn prepare(&self, f: &ObservableId) -> Result<()> {
        let dir = self.observable_dir(f);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let label = dir.join("observable.txt");
        if !label.exists() {
            write_atomic(&label, &format!("{}\n", f.canonical()))?;
        }
        Ok(())
    }

    /// Stored block value, if present.
    pub fn read(&self, f: &ObservableId, n1: u32, n2: u32) -> Result<Option<Rational>> {
        let path = self.block_path(f, n1, n2);
        match fs::read_to_string(&path) {
            Ok(text) => {
                let line = text.strip_suffix('\n').unwrap_or(&text);
                if line.contains('\n') {
                    return Err(Error::Data {
                        path,
                        reason: "expected a single line".into(),
                    });
                }
                parse_rational(line).map(Some).map_err(|e| Error::Data {
                    path,
                    reason: e.to_string(),
                })
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn write(&self, f: &ObservableId, n1: u32, n2: u32, value: &Rational) -> Result<()> {
        self.prepare(f)?;
        write_atomic(&self.block_path(f, n1, n2), &format!("{value}\n"))
    }

    /// Rewrites the manifest from the blocks present on disk.
    pub fn refresh_manifest(&self, f: &ObservableId) -> Result<Vec<(u32, u32)>> {
        self.prepare(f)?;
        let dir = self.observable_dir(f);
        let mut blocks = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(stem) = name.strip_suffix(".dat") {
                if let Some((a, b)) = stem.split_once('-') {
                    if let (Ok(a), Ok(b)) = (a.parse(), b.parse()) {
                        blocks.push((a, b));
                    }
                }
            }
        }
        blocks.sort_unstable();
        let text: String = blocks.iter().map(|(a, b)| format!("{a}-{b}\n")).collect();
        write_atomic(&self.manifest_path(f), &text)?;
        Ok(blocks)
    }

    /// Writes the series one rational per line; line `m` is half-size `m`.
    pub fn write_aggregate(&self, series: &ExpectationSeries, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_atomic(path, &aggregate_text(series))
    }

    pub fn default_aggregate_path(&self, f: &ObservableId, max_half: usize) -> PathBuf {
        self.observable_dir(f).join(format!("aggregate-{max_half}.txt"))
    }
}

/// One rational per line.
pub fn aggregate_text(series: &ExpectationSeries) -> String {
    series
        .coefficients
        .iter()
        .map(|c| format!("{c}\n"))
        .collect()
}

/// Reads an aggregate file back.
pub fn read_aggregate(path: &Path) -> Result<Vec<Rational>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(|l| {
            parse_rational(l).map_err(|e| Error::Data {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Counts of blocks computed and reused by a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub computed: usize,
    pub reused: usize,
}

/// Observable compiled for repeated evaluation inside a block.
enum Compiled {
    /// `p_mu` with its fixed denominator.
    PMonomial { ks: Vec<u32>, denominator: BigInt },
    General(ObservableId),
}

/// Computes block sums, optionally through a [`BlockCache`].
#[derive(Clone, Debug, Default)]
pub struct ExpectationEngine {
    cache: Option<BlockCache>,
}

impl ExpectationEngine {
    pub fn new(cache: Option<BlockCache>) -> Self {
        ExpectationEngine { cache }
    }

    pub fn cache(&self) -> Option<&BlockCache> {
        self.cache.as_ref()
    }

    /// `sum w(lambda) f(lambda)` over `lambda` with quotient sizes `(n1, n2)`.
    pub fn block(&self, f: &ObservableId, n1: u32, n2: u32) -> Result<Rational> {
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.read(f, n1, n2)? {
                return Ok(v);
            }
        }
        let v = compute_blocks(std::slice::from_ref(f), n1, n2)?.remove(0);
        if let Some(cache) = &self.cache {
            cache.write(f, n1, n2, &v)?;
        }
        Ok(v)
    }

    /// Series for one observable up to half-size `max_half`.
    pub fn series(&self, f: &ObservableId, max_half: usize) -> Result<ExpectationSeries> {
        Ok(self
            .series_many(std::slice::from_ref(f), max_half)?
            .0
            .remove(0))
    }

    /// Series for several observables sharing one enumeration of each block.
    pub fn series_many(
        &self,
        fs_: &[ObservableId],
        max_half: usize,
    ) -> Result<(Vec<ExpectationSeries>, RunStats)> {
        let blocks: Vec<(u32, u32)> = (0..=max_half as u32)
            .flat_map(|m| (0..=m).map(move |n1| (n1, m - n1)))
            .collect();
        let mut stats = RunStats::default();
        // Cached values first; whatever is missing gets computed.
        let mut values: HashMap<(usize, u32, u32), Rational> = HashMap::new();
        let mut todo: Vec<((u32, u32), Vec<usize>)> = Vec::new();
        for &(n1, n2) in &blocks {
            let mut missing = Vec::new();
            for (i, f) in fs_.iter().enumerate() {
                match self.cache.as_ref().map(|c| c.read(f, n1, n2)).transpose()?.flatten() {
                    Some(v) => {
                        values.insert((i, n1, n2), v);
                        stats.reused += 1;
                    }
                    None => missing.push(i),
                }
            }
            if !missing.is_empty() {
                todo.push(((n1, n2), missing));
            }
        }
        // Larger blocks first for better load balance.
        todo.sort_by_key(|((n1, n2), _)| std::cmp::Reverse(block_work(*n1, *n2)));
        let computed: Vec<Result<BlockValues>> = todo
            .par_iter()
            .map(|((n1, n2), which)| {
                let subset: Vec<ObservableId> = which.iter().map(|&i| fs_[i].clone()).collect();
                let vals = compute_blocks(&subset, *n1, *n2)?;
                let mut out = Vec::new();
                for (&i, v) in which.iter().zip(vals) {
                    if let Some(cache) = &self.cache {
                        cache.write(&fs_[i], *n1, *n2, &v)?;
                    }
                    out.push((i, *n1, *n2, v));
                }
                Ok(out)
            })
            .collect();
        for r in computed {
            for (i, n1, n2, v) in r? {
                values.insert((i, n1, n2), v);
                stats.computed += 1;
            }
        }
        let mut series = Vec::with_capacity(fs_.len());
        for (i, f) in fs_.iter().enumerate() {
            let coefficients = (0..=max_half as u32)
                .map(|m| (0..=m).map(|n1| values[&(i, n1, m - n1)].clone()).sum())
                .collect();
            if let Some(cache) = &self.cache {
                cache.refresh_manifest(f)?;
            }
            series.push(ExpectationSeries {
                observable: f.clone(),
                coefficients,
            });
        }
        Ok((series, stats))
    }
}

fn block_work(n1: u32, n2: u32) -> u64 {
    let p = |n| crate::partitions::partition_count(n).to_u64_digits().first().copied().unwrap_or(0);
    p(n1).saturating_mul(p(n2))
}

/// Free-function form of [`ExpectationEngine::block`] without a cache.
pub fn expectation_block(f: &ObservableId, n1: u32, n2: u32) -> Result<Rational> {
    ExpectationEngine::default().block(f, n1, n2)
}

/// Free-function form of [`ExpectationEngine::series`] without a cache.
pub fn expectation_series(f: &ObservableId, max_half: usize) -> Result<ExpectationSeries> {
    ExpectationEngine::default().series(f, max_half)
}

fn odd_hook_product(lambda: &Partition) -> BigInt {
    let conj = lambda.conjugate();
    let mut acc = BigInt::one();
    let mut chunk: u128 = 1;
    for (i, &row) in lambda.parts().iter().enumerate() {
        for j in 0..row as usize {
            let h = (row as usize - j - 1) + (conj.part(j) as usize - i - 1) + 1;
            if h % 2 == 1 {
                chunk *= h as u128;
                if chunk > (1u128 << 100) {
                    acc *= chunk;
                    chunk = 1;
                }
            }
        }
    }
    acc * chunk
}

/// `2^k b p_k(lambda)` as an integer, see [`shifted_power_scaled`]; uses
/// machine integers when they suffice.
fn scaled_power_fast(k: u32, lambda: &Partition, zeta: &ZetaTable, constant: &BigInt) -> BigInt {
    let mut sum: i128 = 0;
    let mut ok = true;
    for (i0, &part) in lambda.parts().iter().enumerate() {
        let i = i0 as i128 + 1;
        let a = (2 * part as i128 - 2 * i + 1).checked_pow(k);
        let b = (1 - 2 * i).checked_pow(k);
        match (a, b) {
            (Some(a), Some(b)) => match sum.checked_add(a - b) {
                Some(s) => sum = s,
                None => {
                    ok = false;
                    break;
                }
            },
            _ => {
                ok = false;
                break;
            }
        }
    }
    if ok {
        let b = zeta.value(k as usize).denom().clone();
        constant + b * BigInt::from(sum)
    } else {
        shifted_power_scaled(k, lambda, zeta).0
    }
}

fn compute_blocks(fs_: &[ObservableId], n1: u32, n2: u32) -> Result<Vec<Rational>> {
    let max_k = fs_.iter().map(|f| f.max_k()).max().unwrap_or(1);
    let zeta = ZetaTable::new(max_k as usize);
    let compiled: Vec<Compiled> = fs_
        .iter()
        .map(|f| match f.p_parts() {
            Some(ks) => {
                let denominator = ks.iter().fold(BigInt::one(), |acc, &k| {
                    acc * pow2(k) * zeta.value(k as usize).denom()
                });
                Compiled::PMonomial { ks, denominator }
            }
            None => Compiled::General(f.clone()),
        })
        .collect();
    let mut ks_needed: Vec<u32> = compiled
        .iter()
        .flat_map(|c| match c {
            Compiled::PMonomial { ks, .. } => ks.clone(),
            Compiled::General(_) => vec![],
        })
        .collect();
    ks_needed.sort_unstable();
    ks_needed.dedup();
    // (2^k - 1) a_k, the lambda-independent part of the scaled power sum.
    let constants: HashMap<u32, BigInt> = ks_needed
        .iter()
        .map(|&k| (k, (pow2(k) - 1) * zeta.value(k as usize).numer()))
        .collect();

    let alphas = enumerate_partitions(n1, PartitionFilter::All);
    let betas = enumerate_partitions(n2, PartitionFilter::All);
    let beta_dims: Vec<BigInt> = betas.iter().map(|b| BigInt::from(dimension(b))).collect();

    let partial: Vec<Result<(Vec<BigInt>, Vec<Rational>)>> = alphas
        .par_iter()
        .map(|alpha| {
            let dim_alpha = BigInt::from(dimension(alpha));
            let mut ints = vec![BigInt::zero(); compiled.len()];
            let mut rats = vec![Rational::zero(); compiled.len()];
            for (beta, dim_beta) in betas.iter().zip(&beta_dims) {
                let lambda = Partition::from_core_quotient(&TwoQuotient::balanced(
                    alpha.clone(),
                    beta.clone(),
                ));
                let root = odd_hook_product(&lambda) * &dim_alpha * dim_beta;
                let base = &root * &root;
                let powers: HashMap<u32, BigInt> = ks_needed
                    .iter()
                    .map(|&k| (k, scaled_power_fast(k, &lambda, &zeta, &constants[&k])))
                    .collect();
                for (idx, c) in compiled.iter().enumerate() {
                    match c {
                        Compiled::PMonomial { ks, .. } => {
                            let v = ks.iter().fold(base.clone(), |acc, k| acc * &powers[k]);
                            ints[idx] += v;
                        }
                        Compiled::General(f) => {
                            rats[idx] += Rational::from_integer(base.clone()) * f.evaluate(&lambda)?;
                        }
                    }
                }
            }
            Ok((ints, rats))
        })
        .collect();

    let mut ints = vec![BigInt::zero(); compiled.len()];
    let mut rats = vec![Rational::zero(); compiled.len()];
    for r in partial {
        let (i, q) = r?;
        for (acc, v) in ints.iter_mut().zip(i) {
            *acc += v;
        }
        for (acc, v) in rats.iter_mut().zip(q) {
            *acc += v;
        }
    }
    let m = n1 + n2;
    let fa = factorial_int(n1 as u64);
    let fb = factorial_int(n2 as u64);
    let common = pow2(2 * m) * &fa * &fa * &fb * &fb;
    Ok(compiled
        .iter()
        .enumerate()
        .map(|(idx, c)| match c {
            Compiled::PMonomial { denominator, .. } => {
                Rational::new(ints[idx].clone(), &common * denominator)
            }
            Compiled::General(_) => rats[idx].clone() / Rational::from_integer(common.clone()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::weights::{pillowcase_weight, weight_partition_function_series};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn obs(s: &str) -> ObservableId {
        s.parse().unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_direct(&p(""), &p("3,1")).unwrap(), rat(1, 1));
        assert_eq!(g_direct(&p("1,1"), &p("2")).unwrap(), rat(1, 1));
        assert_eq!(g_direct(&p("1,1"), &p("1,1")).unwrap(), rat(-1, 1));
        assert_eq!(g_structural(&p("1,1"), &p("2")).unwrap(), rat(1, 1));
        assert_eq!(g_structural(&p("1,1"), &p("1,1")).unwrap(), rat(-1, 1));
        for n in (2..=10).step_by(2) {
            for lam in enumerate_partitions(n, PartitionFilter::Balanced) {
                assert_eq!(g_structural(&p("2"), &lam).unwrap(), rat(n as i64 / 2, 1));
                assert_eq!(g_direct(&p("2"), &lam).unwrap(), rat(n as i64 / 2, 1));
            }
        }
        assert!(g_direct(&p("1"), &p("2")).is_err());
        assert!(g_direct(&p("2"), &p("2,1")).is_err());
        assert!(g_direct(&p("4"), &p("2")).is_err());
    }

    #[test]
    fn g_one_one_is_quotient_size_difference() {
        // With even beads giving alpha, g_(1,1) = |beta| - |alpha|.
        for n in (0..=10).step_by(2) {
            for lam in enumerate_partitions(n, PartitionFilter::Balanced) {
                let q = lam.two_core_quotient();
                let diff = q.beta.size() as i64 - q.alpha.size() as i64;
                assert_eq!(g_structural(&p("1,1"), &lam).unwrap(), rat(diff, 1), "{lam:?}");
            }
        }
    }

    #[test]
    fn structural_matches_direct() {
        for n in (0..=10).step_by(2) {
            for lam in enumerate_partitions(n, PartitionFilter::Balanced) {
                for m in (0..=n.min(6)).step_by(2) {
                    for nu in enumerate_partitions(m, PartitionFilter::All) {
                        assert_eq!(
                            g_structural(&nu, &lam).unwrap(),
                            g_direct(&nu, &lam).unwrap(),
                            "nu = {nu:?}, lambda = {lam:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn h_vector_examples() {
        let h = h_vector(&p("2"), 2).unwrap();
        assert_eq!(h[&p("2")], rat(1, 1));
        assert_eq!(h[&p("1,1")], rat(0, 1));
        let h0 = h_vector(&p("3,1"), 0).unwrap();
        assert_eq!(h0.len(), 1);
        assert_eq!(h0[&p("")], rat(1, 1));
        assert!(h_vector(&p("2"), 1).is_err());
    }

    #[test]
    fn transform_check() {
        assert!(character_transform_check(&p("2,2"), 2).unwrap());
        assert!(character_transform_check(&p("3,1"), 2).unwrap());
        assert!(character_transform_check(&p("3,1"), 0).unwrap());
        for n in (0..=10).step_by(2) {
            for lam in enumerate_partitions(n, PartitionFilter::Balanced) {
                for m in (0..=n.min(6)).step_by(2) {
                    assert!(character_transform_check(&lam, m).unwrap(), "{lam:?}, m = {m}");
                }
            }
        }
    }

    #[test]
    fn vanishing_examples() {
        assert_eq!(leading_term_vanishing(&p("1,1")).unwrap(), BigInt::zero());
        assert_eq!(leading_term_vanishing(&p("3,1")).unwrap(), BigInt::zero());
        assert_eq!(leading_term_vanishing(&p("2,2")).unwrap(), BigInt::from(8));
        assert!(leading_term_vanishing(&p("3")).is_err());
    }

    #[test]
    fn observable_grammar() {
        assert_eq!(obs("1"), ObservableId::one());
        assert_eq!(obs("p3*p1*p1").to_string(), "p1^2*p3");
        assert_eq!(obs("p1^2*p3"), obs("p3*p1*p1"));
        assert_eq!(obs("g[3,1]*p1").to_string(), "p1*g[3,1]");
        assert_eq!(obs("g[]").to_string(), "g[]");
        assert_eq!(obs("1*p2").to_string(), "p2");
        for bad in ["", "q1", "p0", "g[3]", "g[1,3]", "p1^x", "g[2"] {
            assert!(bad.parse::<ObservableId>().is_err(), "{bad}");
        }
        assert_ne!(obs("p1*p1").hash(), obs("p2").hash());
        assert_eq!(obs("p1*p1").hash().len(), 64);
    }

    #[test]
    fn block_examples() {
        assert_eq!(expectation_block(&obs("1"), 0, 0).unwrap(), rat(1, 1));
        assert_eq!(expectation_block(&obs("1"), 1, 0).unwrap(), rat(1, 4));
        let total: Rational = (0..=2).map(|n1| expectation_block(&obs("1"), n1, 2 - n1).unwrap()).sum();
        assert_eq!(total, rat(7, 8));
    }

    #[test]
    fn series_examples() {
        let s = expectation_series(&obs("1"), 2).unwrap();
        assert_eq!(s.coefficients, vec![rat(1, 1), rat(1, 2), rat(7, 8)]);
        let s = expectation_series(&obs("p1"), 1).unwrap();
        assert_eq!(s.coefficients, vec![rat(-1, 24), rat(47, 48)]);
        let s = expectation_series(&obs("g[1,1]"), 1).unwrap();
        assert_eq!(s.coefficients, vec![rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn unit_series_matches_product() {
        let s = expectation_series(&obs("1"), 15).unwrap();
        let z = weight_partition_function_series(30);
        for m in 0..=15 {
            assert_eq!(s.coefficients[m], z.coeff(2 * m));
        }
    }

    #[test]
    fn block_engine_matches_direct_sums() {
        // Independent route: all partitions, weights from characters.
        for f in [obs("p1"), obs("p1^2*p3"), obs("p2*p5"), obs("g[2,2]"), obs("p1*g[1,1]")] {
            let s = expectation_series(&f, 4).unwrap();
            for m in 0..=4u32 {
                let direct: Rational = enumerate_partitions(2 * m, PartitionFilter::Balanced)
                    .iter()
                    .map(|lam| pillowcase_weight(lam) * f.evaluate(lam).unwrap())
                    .sum();
                assert_eq!(s.coefficients[m as usize], direct, "{f} at m = {m}");
            }
        }
    }

    #[test]
    fn cache_round_trip_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BlockCache::new(dir.path().join("cache")).unwrap();
        let engine = ExpectationEngine::new(Some(cache.clone()));
        let f = obs("p1");
        let (first, stats) = engine.series_many(std::slice::from_ref(&f), 3).unwrap();
        assert_eq!(stats, RunStats { computed: 10, reused: 0 });
        let path = cache.block_path(&f, 1, 1);
        let bytes = fs::read(&path).unwrap();
        let (second, stats) = engine.series_many(std::slice::from_ref(&f), 3).unwrap();
        assert_eq!(stats, RunStats { computed: 0, reused: 10 });
        assert_eq!(first, second);
        assert_eq!(fs::read(&path).unwrap(), bytes);
        let manifest = fs::read_to_string(cache.manifest_path(&f)).unwrap();
        assert_eq!(manifest.lines().count(), 10);

        let agg = dir.path().join("agg.txt");
        cache.write_aggregate(&first[0], &agg).unwrap();
        assert_eq!(read_aggregate(&agg).unwrap(), first[0].coefficients);

        fs::write(&path, "not a number\n").unwrap();
        match engine.series(&f, 3) {
            Err(Error::Data { path: bad, .. }) => assert_eq!(bad, path),
            other => panic!("expected a data error, got {other:?}"),
        }
    }
}
