//! Rescaled contours of Young diagrams, the Sobolev norm on their
//! differences, the limit curve `e^{-pi x/sqrt6} + e^{-pi y/sqrt6} = 1` and
//! the finite-size diagnostics built on them.
//!
//! Contours live in rotated coordinates `u = (y - x)/sqrt(2n)`,
//! `v = (x + y)/sqrt(2n)` for a French diagram with `n` cells; they are
//! stored with integer vertices and the scale `1/sqrt(2n)` kept apart.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::factorial_int;
use crate::characters::dimension;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition, PartitionFilter, TwoQuotient};
use crate::weights::ln_bigint;
use crate::Rational;

/// Largest size accepted by the exhaustive sweeps unless overridden.
pub const DEFAULT_SWEEP_BOUND: u32 = 40;

/// `c = sqrt(6)/pi`, the length scale of the limit curve.
fn curve_scale() -> f64 {
    6f64.sqrt() / std::f64::consts::PI
}

/// A contour `L(u) = s V(u / s)`, where `V` is the piecewise-linear function
/// through integer vertices and `s = 1/sqrt(scale_sq_inv)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    /// `(u, v)` vertices ordered by `u`; `V(u) = |u|` outside their range.
    vertices: Vec<(i64, i64)>,
    scale_sq_inv: u64,
}

impl Contour {
    /// Contour of `lambda` rescaled by `1/sqrt(2 n)` for a given `n`. With
    /// `n = |lambda|` this is the area-normalized contour; the empty
    /// partition gives `|u|`.
    pub fn at_scale(lambda: &Partition, n: u32) -> Result<Contour> {
        if n == 0 {
            return Err(Error::invalid("contour scale needs n >= 1"));
        }
        let len = lambda.len() as i64;
        let mut path = vec![(0i64, len)];
        for r in (0..lambda.len()).rev() {
            let row = lambda.part(r) as i64;
            path.push((row, r as i64 + 1));
            path.push((row, r as i64));
        }
        let mut vertices: Vec<(i64, i64)> = path.into_iter().map(|(x, y)| (y - x, x + y)).collect();
        vertices.reverse();
        vertices.dedup();
        Ok(Contour {
            vertices,
            scale_sq_inv: 2 * n as u64,
        })
    }

    pub fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }

    /// `1/s^2`.
    pub fn scale_sq_inv(&self) -> u64 {
        self.scale_sq_inv
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.scale_sq_inv as f64).sqrt()
    }

    /// Unscaled value at unscaled abscissa.
    pub fn raw_value(&self, u: f64) -> f64 {
        let first = self.vertices[0];
        let last = self.vertices[self.vertices.len() - 1];
        if u <= first.0 as f64 || u >= last.0 as f64 {
            return u.abs();
        }
        let idx = self.vertices.partition_point(|&(x, _)| (x as f64) <= u);
        let (u0, v0) = self.vertices[idx - 1];
        let (u1, v1) = self.vertices[idx];
        v0 as f64 + (v1 - v0) as f64 * (u - u0 as f64) / (u1 - u0) as f64
    }

    /// `L(u)`.
    pub fn value(&self, u: f64) -> f64 {
        let s = self.scale();
        s * self.raw_value(u / s)
    }

    /// `int (L - |u|) du`, exact.
    pub fn area(&self) -> Rational {
        // V - |u| is linear between consecutive integers.
        let lo = self.vertices[0].0;
        let hi = self.vertices[self.vertices.len() - 1].0;
        let gap = |u: i64| self.raw_value(u as f64) as i64 - u.abs();
        let twice: i64 = (lo..hi).map(|u| gap(u) + gap(u + 1)).sum();
        Rational::new(BigInt::from(twice), BigInt::from(2 * self.scale_sq_inv))
    }
}

/// Area-normalized contour of a non-empty partition.
pub fn rescaled_contour(lambda: &Partition) -> Result<Contour> {
    if lambda.is_empty() {
        return Err(Error::invalid("the empty partition has no rescaled contour"));
    }
    Contour::at_scale(lambda, lambda.size())
}

/// A compactly supported piecewise-linear function given by knots and the
/// slope on each gap.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if knots.len() != slopes.len() + 1 && !(knots.is_empty() && slopes.is_empty()) {
            return Err(Error::invalid("need one slope per gap between knots"));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        let total: f64 = slopes
            .iter()
            .zip(knots.windows(2))
            .map(|(s, w)| s * (w[1] - w[0]))
            .sum();
        let scale: f64 = slopes
            .iter()
            .zip(knots.windows(2))
            .map(|(s, w)| (s * (w[1] - w[0])).abs())
            .sum::<f64>()
            .max(1.0);
        if total.abs() > 1e-9 * scale {
            return Err(Error::invalid(
                "function does not return to zero: support is unbounded",
            ));
        }
        Ok(PiecewiseLinear { knots, slopes })
    }

    pub fn value(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (s, w) in self.slopes.iter().zip(self.knots.windows(2)) {
            if x <= w[0] {
                break;
            }
            acc += s * (x.min(w[1]) - w[0]);
        }
        acc
    }

    /// Right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        self.slopes
            .iter()
            .zip(self.knots.windows(2))
            .find(|(_, w)| w[0] <= x && x < w[1])
            .map_or(0.0, |(s, _)| *s)
    }

    /// Multiplies values by `c`.
    pub fn scale_values(&self, c: f64) -> Self {
        PiecewiseLinear {
            knots: self.knots.clone(),
            slopes: self.slopes.iter().map(|s| s * c).collect(),
        }
    }
}

/// `L_a - L_b` for two contours at the same scale.
pub fn contour_difference(a: &Contour, b: &Contour) -> Result<PiecewiseLinear> {
    if a.scale_sq_inv != b.scale_sq_inv {
        return Err(Error::invalid("contours must share a scale"));
    }
    let knots_raw: BTreeSet<i64> = a
        .vertices
        .iter()
        .chain(&b.vertices)
        .map(|&(u, _)| u)
        .collect();
    let knots_raw: Vec<i64> = knots_raw.into_iter().collect();
    let diff = |u: i64| a.raw_value(u as f64) - b.raw_value(u as f64);
    let s = a.scale();
    let mut knots = Vec::new();
    let mut slopes = Vec::new();
    for w in knots_raw.windows(2) {
        let slope = (diff(w[1]) - diff(w[0])) / (w[1] - w[0]) as f64;
        if knots.is_empty() {
            knots.push(w[0] as f64 * s);
        }
        knots.push(w[1] as f64 * s);
        slopes.push(slope);
    }
    PiecewiseLinear::new(knots, slopes)
}

/// Second antiderivative of `log|x|`.
fn log_kernel(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * x.abs().ln() / 2.0 - 0.75 * x * x
    }
}

/// `int int ((f(s) - f(t)) / (s - t))^2 ds dt`.
///
/// For compactly supported `f` this equals `-2 int int f'(s) f'(t) log|s - t|`,
/// which is evaluated in closed form over pairs of linear pieces.
pub fn sobolev_norm_sq(f: &PiecewiseLinear) -> f64 {
    let pieces: Vec<(f64, f64, f64)> = f
        .slopes
        .iter()
        .zip(f.knots.windows(2))
        .filter(|(s, _)| **s != 0.0)
        .map(|(&s, w)| (w[0], w[1], s))
        .collect();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut add = |x: f64| {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    };
    for &(a, b, si) in &pieces {
        for &(c, d, sj) in &pieces {
            let g = log_kernel(b - d) - log_kernel(b - c) - log_kernel(a - d) + log_kernel(a - c);
            add(2.0 * si * sj * g);
        }
    }
    sum + comp
}

/// `||L_a - L_b||^2` in the Sobolev sense.
pub fn contour_distance_sq(a: &Contour, b: &Contour) -> Result<f64> {
    Ok(sobolev_norm_sq(&contour_difference(a, b)?))
}

/// `y(x) = -(sqrt6/pi) log(1 - e^{-pi x/sqrt6})`.
pub fn omega_curve(x: f64) -> Result<f64> {
    if x <= 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("the limit curve needs x > 0, got {x}")));
    }
    let c = curve_scale();
    Ok(-c * (-(-x / c).exp()).ln_1p())
}

/// The limit curve in rotated coordinates:
/// `Omega(u) = |u| - sqrt2 c log(logistic(sqrt2 |u| / c))`.
pub fn omega_rot(u: f64) -> f64 {
    let c = curve_scale();
    let z = std::f64::consts::SQRT_2 * u.abs() / c;
    // -log(logistic(z)) = log(1 + e^{-z})
    u.abs() + std::f64::consts::SQRT_2 * c * (-z).exp().ln_1p()
}

/// Gauss-Legendre nodes and weights of order 8 on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Composite order-8 Gauss-Legendre rule over the given mesh.
pub(crate) fn integrate_mesh(mesh: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for w in mesh.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        total += half * GL8.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>();
    }
    total
}

fn uniform_mesh(a: f64, b: f64, pieces: usize) -> Vec<f64> {
    (0..=pieces)
        .map(|i| a + (b - a) * i as f64 / pieces as f64)
        .collect()
}

/// `mu_k = int u^k (Omega(u) - |u|) du`.
///
/// With `1 - t = e^{-s}` parametrizing the curve (`e^{-x/c} = t`), the
/// half `u >= 0` becomes `2 c^2 int_{log 2}^inf u^k (-log t) / t ds`.
pub fn limit_moments(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let c = curve_scale();
    let sqrt2 = std::f64::consts::SQRT_2;
    let integrand = |s: f64| {
        let one_minus_t = (-s).exp();
        let t = -(-s).exp_m1();
        let u = c * (t.ln() + s) / sqrt2;
        // -log t / t, accurate for t close to 1.
        let g = -(-one_minus_t).ln_1p() / t;
        u.powi(k as i32) * g
    };
    let mut mesh = uniform_mesh(std::f64::consts::LN_2, 8.0, 64);
    mesh.extend(uniform_mesh(8.0, 80.0, 144).into_iter().skip(1));
    2.0 * c * c * integrate_mesh(&mesh, integrand)
}

/// `c(x) = 1/2 sum_k 1 / (k (k+1) (2k+1) x^{2k})`, summed until terms drop
/// below `1e-15`.
pub fn c_correction(x: f64) -> Result<f64> {
    if x < 1.0 || x.is_nan() {
        return Err(Error::Domain(format!("c(x) needs x >= 1, got {x}")));
    }
    let inv2 = 1.0 / (x * x);
    let mut power = 1.0;
    let mut sum = 0.0;
    let mut k = 1u64;
    loop {
        power *= inv2;
        let kf = k as f64;
        let term = power / (kf * (kf + 1.0) * (2.0 * kf + 1.0));
        sum += term;
        if term < 1e-15 {
            break;
        }
        k += 1;
    }
    Ok(sum / 2.0)
}

/// `(log h, n int_R log(sqrt(n) h_F) dx dy + c(h))` for the cell in row `i`,
/// column `j` (0-based) of `lambda`.
///
/// In cell-local coordinates `(s, t)` the rescaled hook is
/// `sqrt(n) h_F = h + 1 - s - t` and the factor `n` cancels the cell area, so
/// the integral is `int_0^2 min(r, 2 - r) log(h + 1 - r) dr`, evaluated by
/// Gauss-Legendre on a mesh graded towards `r = 2`.
pub fn hook_integral_check(lambda: &Partition, i: usize, j: usize) -> Result<(f64, f64)> {
    if j >= lambda.part(i) as usize {
        return Err(Error::invalid(format!("({i}, {j}) is not a cell of ({lambda})")));
    }
    let conj = lambda.conjugate();
    let h = (lambda.part(i) as usize - j - 1) + (conj.part(j) as usize - i - 1) + 1;
    let hf = h as f64;
    let mut mesh = uniform_mesh(0.0, 1.0, 4);
    let mut x = 1.0;
    let mut step = 0.5;
    while step > 1e-14 {
        x += step;
        mesh.push(x);
        step /= 2.0;
    }
    mesh.push(2.0);
    let integral = integrate_mesh(&mesh, |r| r.min(2.0 - r) * (hf + 1.0 - r).ln());
    Ok((hf.ln(), integral + c_correction(hf)?))
}

/// Every balanced partition of `n` with its quotient and exact weight data.
struct Sweep {
    entries: Vec<SweepEntry>,
    /// `sum w`, exact.
    total: Rational,
}

struct SweepEntry {
    lambda: Partition,
    alpha: Partition,
    beta: Partition,
    weight: Rational,
}

fn sweep(n: u32, bound: u32) -> Result<Sweep> {
    if n > bound {
        return Err(Error::Resource(format!(
            "size {n} exceeds the exhaustive bound {bound}"
        )));
    }
    if n % 2 == 1 {
        return Err(Error::invalid(format!("size must be even, got {n}")));
    }
    let m = n / 2;
    let entries: Vec<SweepEntry> = (0..=m)
        .into_par_iter()
        .flat_map_iter(|n1| {
            let alphas = enumerate_partitions(n1, PartitionFilter::All);
            let betas = enumerate_partitions(m - n1, PartitionFilter::All);
            let denom = crate::arith::pow2(2 * m)
                * factorial_int(n1 as u64).pow(2)
                * factorial_int((m - n1) as u64).pow(2);
            let mut out = Vec::with_capacity(alphas.len() * betas.len());
            for alpha in &alphas {
                let da = BigInt::from(dimension(alpha));
                for beta in &betas {
                    let lambda = Partition::from_core_quotient(&TwoQuotient::balanced(
                        alpha.clone(),
                        beta.clone(),
                    ));
                    let mut odd = BigInt::from(1);
                    for h in lambda.hook_lengths() {
                        if h % 2 == 1 {
                            odd *= h;
                        }
                    }
                    let root = odd * &da * BigInt::from(dimension(beta));
                    out.push(SweepEntry {
                        lambda,
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        weight: Rational::new(&root * &root, denom.clone()),
                    });
                }
            }
            out
        })
        .collect();
    let total = entries.iter().map(|e| e.weight.clone()).sum();
    Ok(Sweep { entries, total })
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `||L_alpha - L_beta||^2` with both quotient contours at the scale of `lambda`.
pub fn quotient_distance_sq(lambda: &Partition) -> Result<f64> {
    let q = lambda.two_core_quotient();
    quotient_distance_sq_of(&q.alpha, &q.beta, lambda.size())
}

fn quotient_distance_sq_of(alpha: &Partition, beta: &Partition, n: u32) -> Result<f64> {
    let n = n.max(1);
    contour_distance_sq(&Contour::at_scale(alpha, n)?, &Contour::at_scale(beta, n)?)
}

/// w-probability that `||L_alpha - L_beta|| > eps` among balanced partitions of `n`.
pub fn concentration_profile(n: u32, eps: f64, bound: u32) -> Result<f64> {
    Ok(concentration_profiles(n, &[eps], bound)?[0])
}

/// [`concentration_profile`] for several thresholds at once.
pub fn concentration_profiles(n: u32, eps: &[f64], bound: u32) -> Result<Vec<f64>> {
    let sw = sweep(n, bound)?;
    let dists: Vec<f64> = sw
        .entries
        .par_iter()
        .map(|e| quotient_distance_sq_of(&e.alpha, &e.beta, n).map(f64::sqrt))
        .collect::<Result<_>>()?;
    Ok(eps
        .iter()
        .map(|&eps| {
            let mass: Rational = sw
                .entries
                .iter()
                .zip(&dists)
                .filter(|(_, &d)| d > eps)
                .map(|(e, _)| e.weight.clone())
                .sum();
            to_f64(&(mass / &sw.total))
        })
        .collect())
}

/// The w-weighted mean contour of balanced partitions of `n`, sampled at
/// the breakpoints `u = k/sqrt(2n)`, `|k| <= n`.
pub fn mean_contour(n: u32, bound: u32) -> Result<Vec<(f64, f64)>> {
    let sw = sweep(n, bound)?;
    let span = n as i64;
    let mut acc = vec![Rational::zero(); (2 * span + 1) as usize];
    for e in &sw.entries {
        let c = Contour::at_scale(&e.lambda, n.max(1))?;
        for (idx, slot) in acc.iter_mut().enumerate() {
            let u = idx as i64 - span;
            let v = c.raw_value(u as f64) as i64;
            *slot += &e.weight * BigInt::from(v);
        }
    }
    let s = 1.0 / (2.0 * n.max(1) as f64).sqrt();
    Ok(acc
        .iter()
        .enumerate()
        .map(|(idx, v)| ((idx as i64 - span) as f64 * s, to_f64(&(v / &sw.total)) * s))
        .collect())
}

/// `sup_u |mean contour(u) - Omega(u)|`.
pub fn mean_contour_distance(n: u32, bound: u32) -> Result<f64> {
    let curve = mean_contour(n, bound)?;
    let mut best: f64 = 0.0;
    for w in curve.windows(2) {
        let ((u0, v0), (u1, v1)) = (w[0], w[1]);
        // The mean is linear and Omega convex on each gap: sample densely.
        for k in 0..=64 {
            let t = k as f64 / 64.0;
            let u = u0 + (u1 - u0) * t;
            let v = v0 + (v1 - v0) * t;
            best = best.max((v - omega_rot(u)).abs());
        }
    }
    // Beyond the sampled window both sides are within e^{-large} of |u|.
    Ok(best)
}

/// One row of a `p_k` trend report.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendPoint {
    pub n: u32,
    /// `<p_k>_n`, exact.
    pub mean: Rational,
    /// `<p_k>_n / n^{(k+1)/2}`.
    pub normalized: f64,
    /// Distance of `normalized` to the limit value.
    pub gap: f64,
}

/// Limit of `<p_k>_n / n^{(k+1)/2}`: `k 2^{(k-1)/2} mu_{k-1}`.
///
/// The power of 2 comes from measuring contents `lambda_i - i` along the
/// unrotated axis while the moments use the rotated one.
pub fn p_k_limit(k: u32) -> f64 {
    k as f64 * 2f64.powf((k as f64 - 1.0) / 2.0) * limit_moments(k - 1)
}

/// `<p_k>_n / n^{(k+1)/2}` over the given sizes, with its gap to [`p_k_limit`].
pub fn p_k_trend(k: u32, ns: &[u32], bound: u32) -> Result<Vec<TrendPoint>> {
    if k == 0 {
        return Err(Error::invalid("p_k needs k >= 1"));
    }
    let target = p_k_limit(k);
    ns.iter()
        .map(|&n| {
            let sw = sweep(n, bound)?;
            let mut acc = Rational::zero();
            for e in &sw.entries {
                acc += &e.weight * crate::shifted::shifted_power(k, &e.lambda)?;
            }
            let mean = acc / &sw.total;
            let normalized = to_f64(&mean) / (n as f64).powf((k as f64 + 1.0) / 2.0);
            Ok(TrendPoint {
                n,
                mean,
                normalized,
                gap: (normalized - target).abs(),
            })
        })
        .collect()
}

/// Summary of `|log w(lambda) + (n/2) ||L_alpha - L_beta||^2| / sqrt(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightEstimate {
    pub n: u32,
    pub max: f64,
    /// Partition attaining the maximum.
    pub argmax: Partition,
    /// w-weighted mean of the same quantity.
    pub weighted_mean: f64,
}

/// Log-weight diagnostic over all balanced partitions of `n`.
pub fn weight_estimate(n: u32, bound: u32) -> Result<WeightEstimate> {
    let sw = sweep(n, bound)?;
    let root_n = (n.max(1) as f64).sqrt();
    let values: Vec<f64> = sw
        .entries
        .par_iter()
        .map(|e| {
            let d = quotient_distance_sq_of(&e.alpha, &e.beta, n)?;
            let ln_w = ln_bigint(e.weight.numer()) - ln_bigint(e.weight.denom());
            Ok((ln_w + n as f64 / 2.0 * d).abs() / root_n)
        })
        .collect::<Result<_>>()?;
    let (imax, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let total = to_f64(&sw.total);
    let weighted_mean = sw
        .entries
        .iter()
        .zip(&values)
        .map(|(e, v)| to_f64(&e.weight) * v)
        .sum::<f64>()
        / total;
    Ok(WeightEstimate {
        n,
        max,
        argmax: sw.entries[imax].lambda.clone(),
        weighted_mean,
    })
}

/// CSV rows `n,eps,probability`.
pub fn concentration_csv(ns: &[u32], eps: &[f64], bound: u32) -> Result<String> {
    let mut out = String::from("n,eps,probability\n");
    for &n in ns {
        for (e, p) in eps.iter().zip(concentration_profiles(n, eps, bound)?) {
            out.push_str(&format!("{n},{},{}\n", fmt12(*e), fmt12(p)));
        }
    }
    Ok(out)
}

/// CSV rows `x,mean,omega` for the mean contour of size `n`.
pub fn curve_csv(n: u32, bound: u32) -> Result<String> {
    let mut out = String::from("x,mean,omega\n");
    for (u, v) in mean_contour(n, bound)? {
        out.push_str(&format!("{},{},{}\n", fmt12(u), fmt12(v), fmt12(omega_rot(u))));
    }
    Ok(out)
}

/// Twelve significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}
