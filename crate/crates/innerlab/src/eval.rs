//! Log-space evaluation of inner functions and the numerical diagnostics
//! built on it: eta profiles, condition-(2) divergence sums, Carleson-type
//! hit sums, and scale-invariant Poisson level sums.
//!
//! All diagnostics are certificates about explicit finite sample sets;
//! nothing here extrapolates to the true infimum over the disk.

use crate::disk::{uniform_points, z_of, DiskPoint, DyadicArc};
use crate::measure::AtomicMeasure;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Eta values above this threshold count as positive when estimating the
/// critical exclusion radius; below it they are indistinguishable from
/// underflow.
pub const DELTA_THRESHOLD: f64 = 1e-6;

/// A finitely truncated inner function `I = B * S`: a Blaschke factor over
/// `zeros` and a singular factor driven by `measure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSpec {
    pub zeros: Vec<DiskPoint>,
    pub measure: AtomicMeasure,
    /// Provenance of the truncation (builder, depths, parameter choices).
    pub meta: BTreeMap<String, String>,
}

impl InnerSpec {
    pub fn new(zeros: Vec<DiskPoint>, measure: AtomicMeasure) -> Self {
        InnerSpec { zeros, measure, meta: BTreeMap::new() }
    }

    pub fn blaschke_only(zeros: Vec<DiskPoint>) -> Self {
        Self::new(zeros, AtomicMeasure::new(Vec::new(), "empty", 0))
    }

    pub fn measure_only(measure: AtomicMeasure) -> Self {
        Self::new(Vec::new(), measure)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_owned(), value.to_string());
        self
    }

    /// `sum (1 - |z_n|)`; finiteness of the truncation made visible.
    pub fn blaschke_sum(&self) -> f64 {
        self.zeros.iter().map(|z| 1.0 - z.abs()).sum()
    }

    pub fn log_abs(&self, z: DiskPoint) -> f64 {
        log_abs_inner(self, z)
    }
}

#[inline]
fn rho_parts(z: DiskPoint, w: DiskPoint) -> (f64, f64) {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    let dot = w.re * z.re + w.im * z.im;
    let cross = w.re * z.im - w.im * z.re;
    let ux = 1.0 - dot;
    (dx * dx + dy * dy, ux * ux + cross * cross)
}

/// `exp` with the documented clamp: log values below -700 are treated as
/// -infinity for magnitude purposes.
#[inline]
pub fn exp_clamped(log: f64) -> f64 {
    if log < -700.0 {
        0.0
    } else {
        log.exp()
    }
}

/// `sum_n ln rho(z, z_n)`, or -infinity when `z` coincides with a zero.
///
/// Squared factors are accumulated as block products of eight and logged
/// once per block: numerators sit in [0, 4] and denominators in
/// (2^-40, 4] for the zero sets produced here, so eight-factor products
/// stay in normal f64 range while the logarithm count drops eightfold.
pub fn log_abs_blaschke(zeros: &[DiskPoint], z: DiskPoint) -> f64 {
    let mut acc = 0.0f64;
    let mut pnum = 1.0f64;
    let mut pden = 1.0f64;
    let mut in_block = 0u32;
    for w in zeros {
        let (num2, den2) = rho_parts(z, *w);
        if num2 == 0.0 {
            return f64::NEG_INFINITY;
        }
        pnum *= num2;
        pden *= den2;
        in_block += 1;
        if in_block == 8 {
            acc += (pnum / pden).ln();
            pnum = 1.0;
            pden = 1.0;
            in_block = 0;
        }
    }
    if in_block > 0 {
        acc += (pnum / pden).ln();
    }
    0.5 * acc
}

/// `log |I(z)| = log |B(z)| - P[mu](z)`.
pub fn log_abs_inner(spec: &InnerSpec, z: DiskPoint) -> f64 {
    log_abs_blaschke(&spec.zeros, z) - spec.measure.poisson(z)
}

/// `sum_n (1 - |z_n|^2)(1 - |z|^2) / |1 - conj(z_n) z|^2`.
pub fn wep_sum(zeros: &[DiskPoint], z: DiskPoint) -> f64 {
    let zfac = 1.0 - z.abs2();
    zeros
        .iter()
        .map(|w| {
            let (_, den2) = rho_parts(z, *w);
            (1.0 - w.abs2()) * zfac / den2
        })
        .sum()
}

#[inline]
fn poisson_at(pts: &[(f64, f64, f64)], z: DiskPoint) -> f64 {
    let num = 1.0 - z.abs2();
    pts.iter()
        .map(|&(cx, cy, mass)| {
            let (dx, dy) = (cx - z.re, cy - z.im);
            mass * num / (dx * dx + dy * dy)
        })
        .sum()
}

/// Admissibility sweep for one sample: the least squared distance to the
/// zero set together with `log |B|`, or `None` once the sample is within
/// the smallest exclusion radius (its value can never be consulted).
fn admissible_eval(zeros: &[DiskPoint], z: DiskPoint, min_excl2: f64) -> Option<(f64, f64)> {
    let mut min_rho2 = f64::INFINITY;
    let mut acc = 0.0f64;
    let mut pnum = 1.0f64;
    let mut pden = 1.0f64;
    let mut in_block = 0u32;
    for w in zeros {
        let (num2, den2) = rho_parts(z, *w);
        if num2 == 0.0 {
            return None;
        }
        let rho2 = num2 / den2;
        if rho2 < min_rho2 {
            if rho2 <= min_excl2 {
                return None;
            }
            min_rho2 = rho2;
        }
        pnum *= num2;
        pden *= den2;
        in_block += 1;
        if in_block == 8 {
            acc += (pnum / pden).ln();
            pnum = 1.0;
            pden = 1.0;
            in_block = 0;
        }
    }
    if in_block > 0 {
        acc += (pnum / pden).ln();
    }
    Some((min_rho2, 0.5 * acc))
}

/// Sampled eta profile: for each exclusion radius, the smallest sampled
/// modulus among samples farther than that radius from the zero set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaProfile {
    pub eps_grid: Vec<f64>,
    /// `None` marks an empty admissible sample set at that radius.
    pub eta_hat: Vec<Option<f64>>,
    /// Number of admissible samples per grid entry.
    pub admissible: Vec<u64>,
    pub sample_depth: u32,
    pub sample_count: u64,
    pub threshold: f64,
    /// Smallest grid radius whose eta value exceeds the threshold.
    pub delta_tilde_hat: Option<f64>,
}

/// Lattice size inside `T(J)`: grows toward the root so coarse boxes are
/// sampled densely enough for the profile to tighten as `depth` grows.
pub fn lattice_size(depth: u32, level: u32) -> usize {
    2 * (depth - level + 1) as usize
}

/// Evaluates the inner function on the dyadic sample set (box anchors plus
/// a uniform lattice in every top half) and minimizes over samples outside
/// each exclusion radius.
///
/// `eta_hat` is monotone in the radius by construction: shrinking the
/// admissible set can only raise its minimum. A running maximum enforces
/// the invariant against floating-point ties.
pub fn eta_profile(spec: &InnerSpec, eps_grid: &[f64], depth: u32) -> Result<EtaProfile> {
    let mut eps: Vec<f64> = eps_grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.is_empty() {
        return Err(Error::InvalidInput("empty eps grid".into()));
    }
    if eps[0] <= 0.0 || *eps.last().unwrap() >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "eps grid must lie in (0, 1), got [{}, {}]",
            eps[0],
            eps.last().unwrap()
        )));
    }
    let min_excl2 = eps[0] * eps[0];
    let pts = spec.measure.unit_points();
    // (distance to zero set, log |I|) per admissible sample.
    let mut evals: Vec<(f64, f64)> = Vec::new();
    let mut sample_count = 0u64;
    for level in 0..=depth {
        let k = lattice_size(depth, level);
        for j in DyadicArc::level_iter(level) {
            let anchor = z_of(j);
            let lattice = uniform_points(j, k);
            for z in std::iter::once(anchor).chain(lattice) {
                sample_count += 1;
                if let Some((min_rho2, logb)) = admissible_eval(&spec.zeros, z, min_excl2) {
                    let log_abs = logb - poisson_at(&pts, z);
                    evals.push((min_rho2.sqrt(), log_abs));
                }
            }
        }
    }
    evals.sort_by(|a, b| a.0.total_cmp(&b.0));
    // suffix_min[i] = least log value among samples with distance >= i-th.
    let mut suffix_min = vec![f64::INFINITY; evals.len() + 1];
    for i in (0..evals.len()).rev() {
        suffix_min[i] = suffix_min[i + 1].min(evals[i].1);
    }
    let mut eta_hat = Vec::with_capacity(eps.len());
    let mut admissible = Vec::with_capacity(eps.len());
    let mut running = f64::NEG_INFINITY;
    for &e in &eps {
        let idx = evals.partition_point(|&(d, _)| d <= e);
        let count = (evals.len() - idx) as u64;
        admissible.push(count);
        if count == 0 {
            eta_hat.push(None);
        } else {
            running = running.max(suffix_min[idx]);
            eta_hat.push(Some(exp_clamped(running)));
        }
    }
    let delta_tilde_hat = eps
        .iter()
        .zip(&eta_hat)
        .find(|(_, v)| v.is_some_and(|x| x > DELTA_THRESHOLD))
        .map(|(e, _)| *e);
    Ok(EtaProfile {
        eps_grid: eps,
        eta_hat,
        admissible,
        sample_depth: depth,
        sample_count,
        threshold: DELTA_THRESHOLD,
        delta_tilde_hat,
    })
}

/// Partial sums `S_n` of `|J|` over dyadic arcs whose anchor modulus falls
/// below `eps`, levels `0..=n`. The comparison runs in log space:
/// `exp(log|I|) < eps` iff `log|I| < ln eps`, with no underflow cliff.
pub fn condition2_sums(spec: &InnerSpec, eps: f64, n: u32) -> Result<Vec<f64>> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must be in (0, 1), got {eps}")));
    }
    let log_eps = eps.ln();
    let pts = spec.measure.unit_points();
    let mut sums = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    for level in 0..=n {
        let len = 1.0 / (1u64 << level) as f64;
        for j in DyadicArc::level_iter(level) {
            let z = z_of(j);
            let log_abs = log_abs_blaschke(&spec.zeros, z) - poisson_at(&pts, z);
            if log_abs < log_eps {
                acc += len;
            }
        }
        sums.push(acc);
    }
    Ok(sums)
}

/// `sum |I| |J| / |1 - conj(z(I)) z(J)|^2` over dyadic `I` of level at most
/// `n` whose anchor Poisson value reaches `a`.
pub fn poisson_level_sum(mu: &AtomicMeasure, a: f64, j: DyadicArc, n: u32) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("level threshold must be positive, got {a}")));
    }
    let pts = mu.unit_points();
    let zj = z_of(j);
    let jlen = j.len();
    let mut sum = 0.0;
    for level in 0..=n {
        let ilen = 1.0 / (1u64 << level) as f64;
        for i in DyadicArc::level_iter(level) {
            let zi = z_of(i);
            if poisson_at(&pts, zi) >= a {
                let (_, den2) = rho_parts(zj, zi);
                sum += ilen * jlen / den2;
            }
        }
    }
    Ok(sum)
}

/// Partial sums `S_n` of `|J|` over dyadic arcs whose anchor Poisson value
/// reaches `c`, levels `0..=n`.
pub fn carleson_hit_sum_lemma1c(mu: &AtomicMeasure, c: f64, n: u32) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {c}")));
    }
    let pts = mu.unit_points();
    let mut sums = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    for level in 0..=n {
        let len = 1.0 / (1u64 << level) as f64;
        for j in DyadicArc::level_iter(level) {
            if poisson_at(&pts, z_of(j)) >= c {
                acc += len;
            }
        }
        sums.push(acc);
    }
    Ok(sums)
}
