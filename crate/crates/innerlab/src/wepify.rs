//! Zero-placement constructions that upgrade a singular inner function to
//! the weak embedding property, together with the counterexample gadgets
//! showing when no placement can work and the bound checks that certify a
//! finished placement.
//!
//! Three builders cover the three input classes: `wepify_finite_entropy`
//! corrects any measure carried by a finite-entropy set, `easy_wepify_porous`
//! handles porous supports with zeros confined to the region where the
//! singular factor is already small, and `easy_wepify_atomic` does the same
//! for atomic measures with regular mass decay. `anti_wepable_atomic` and
//! `anti_wepable_nonporous` build the measures witnessing that the
//! regularity and porosity hypotheses are sharp.

use serde::{Deserialize, Serialize};

use crate::disk::{
    region_membership, uniform_points, z_of, DiskPoint, DyadicArc, Region,
};
use crate::eval::wep_sum;
use crate::measure::{
    gadget_columns, gadget_slots, tail_ratio_kl5, AtomicMeasure, GadgetParams,
};
use crate::sets::CircleSet;
use crate::{Error, Result};

/// Smallest free fraction a support may exhibit before the porous
/// construction refuses.
pub const POROSITY_FLOOR: f64 = 0.03125;

/// Largest tail-to-term ratio the atomic construction accepts.
pub const TAIL_RATIO_BOUND: f64 = 8.0;

/// Four-level decay factor separating Cauchy hit sums from divergent ones
/// at a finite depth: increments must shrink by better than this factor
/// over four levels.
pub const HIT_SUM_DECAY: f64 = 0.27;

/// Increasing subadditive gauge: identity below 1, logarithmic above.
pub fn phi(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gauge argument must be positive, got {x}"
        )));
    }
    Ok(if x <= 1.0 { x } else { 1.0 + x.ln() })
}

/// `phi` extended by continuity with `phi(0) = 0`, for kernel sums where
/// a vanishing Poisson value contributes nothing.
fn phi_or_zero(x: f64) -> f64 {
    if x > 1.0 {
        1.0 + x.ln()
    } else if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Poisson integral against precomputed `(cos, sin, mass)` atom triples.
/// Matches `AtomicMeasure::poisson` term for term, so values agree exactly.
fn kernel_at(pts: &[(f64, f64, f64)], z: DiskPoint) -> f64 {
    let num = 1.0 - z.abs2();
    pts.iter()
        .map(|&(x, y, m)| {
            let (dx, dy) = (x - z.re, y - z.im);
            m * num / (dx * dx + dy * dy)
        })
        .sum()
}

/// `|1 - conj(z) w|^2`.
fn den2(z: DiskPoint, w: DiskPoint) -> f64 {
    let re = 1.0 - (z.re * w.re + z.im * w.im);
    let im = z.re * w.im - z.im * w.re;
    re * re + im * im
}

/// Region a block of zeros was assigned to: the top half of an arc, or
/// the horizontal band `2^(band-1) |J|^2 < 1 - |z| <= 2^band |J|^2` of its
/// Carleson box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRegion {
    Top { arc: DyadicArc },
    Strip { arc: DyadicArc, band: u32 },
}

/// One placement decision: `count` consecutive zeros in `region`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementEntry {
    pub region: PlacementRegion,
    pub count: u32,
}

/// The per-level and per-band multiplier tables a construction chose.
/// `k_j[j]` counts zeros per family arc of level `j`; `t_k[i]` is the
/// density multiplier for band `i + 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sequences {
    pub k_j: Vec<u32>,
    pub t_k: Vec<u32>,
}

/// A finished placement: the zeros, the log saying which region each
/// block went to, the multiplier tables, and the Blaschke sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WepifyResult {
    pub zeros: Vec<DiskPoint>,
    pub placement_log: Vec<PlacementEntry>,
    pub sequences: Sequences,
    pub blaschke_sum: f64,
}

impl WepifyResult {
    /// The empty placement: nothing to correct.
    pub fn trivial() -> Self {
        WepifyResult {
            zeros: Vec::new(),
            placement_log: Vec::new(),
            sequences: Sequences::default(),
            blaschke_sum: 0.0,
        }
    }

    fn assemble(
        zeros: Vec<DiskPoint>,
        placement_log: Vec<PlacementEntry>,
        sequences: Sequences,
    ) -> Self {
        let blaschke_sum = zeros.iter().map(|z| 1.0 - z.abs()).sum();
        WepifyResult { zeros, placement_log, sequences, blaschke_sum }
    }

    /// Re-checks that every stored zero lies in the region its log entry
    /// names and that the log accounts for every zero exactly once.
    pub fn verify_placements(&self) -> Result<()> {
        let mut i = 0usize;
        for entry in &self.placement_log {
            let n = entry.count as usize;
            if i + n > self.zeros.len() {
                return Err(Error::InvalidInput(
                    "placement log claims more zeros than stored".into(),
                ));
            }
            for z in &self.zeros[i..i + n] {
                let ok = match entry.region {
                    PlacementRegion::Top { arc } => {
                        matches!(region_membership(*z, arc), Region::InT)
                    }
                    PlacementRegion::Strip { arc, band } => {
                        let w = arc.len();
                        let h = 1.0 - z.abs();
                        let base = w * w * f64::exp2(f64::from(band));
                        arc.contains_turn_closed(z.turn())
                            && h > 0.5 * base
                            && h <= base
                    }
                };
                if !ok {
                    return Err(Error::InvalidInput(format!(
                        "zero {z:?} escapes its logged region {:?}",
                        entry.region
                    )));
                }
            }
            i += n;
        }
        if i != self.zeros.len() {
            return Err(Error::InvalidInput(
                "zeros outside any placement entry".into(),
            ));
        }
        Ok(())
    }
}

/// Finite-depth Cauchy verdict on the dyadic hit sums of `e`, at the
/// set's own resolution. Refuses when the last four-level increment
/// window fails to decay against the previous one.
fn entropy_verdict(e: &CircleSet) -> Result<()> {
    let d = e.depth as usize;
    if d < 8 {
        return Err(Error::Refused(format!(
            "set resolution {d} is too shallow to certify Cauchy hit sums \
             (need eight levels)"
        )));
    }
    let s = e.dyadic_hit_sum(e.depth);
    let late = s[d] - s[d - 4];
    let early = s[d - 4] - s[d - 8];
    if late > HIT_SUM_DECAY * early {
        return Err(Error::Refused(format!(
            "lemma1-b dyadic hit sums do not look Cauchy at depth {d}: the \
             last four-level increment {late:.3e} is {:.2} times the \
             previous one {early:.3e} (threshold {HIT_SUM_DECAY}); the set \
             reads as infinite entropy",
            late / early
        )));
    }
    Ok(())
}

/// Corrects a measure on a finite-entropy set: `k_j` zeros in the top half
/// of every level-`j` arc not swallowed by the maximal gap family, plus
/// `t_k 2^(M-k)` zeros in each band of every maximal arc's box.
///
/// The multiplier tables are fixed by the family masses: with
/// `R_j = sum_{i >= j} |F ∩ D_i|`, `k_j = max(1, min(j, floor(log2(1/(R_j
/// + 2^-n)))))`, and `t_k` grows by at most one per band toward
/// `floor(V_k^{-1/2})` where `V_k` is the tail mass of bands `>= k`. Both
/// tables are capped so each side costs at most `budget`.
pub fn wepify_finite_entropy(
    mu: &AtomicMeasure,
    e: &CircleSet,
    n: u32,
    budget: f64,
) -> Result<WepifyResult> {
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!(
            "placement budget must be positive, got {budget}"
        )));
    }
    if n > e.depth {
        return Err(Error::InvalidInput(format!(
            "construction depth {n} exceeds the set resolution {}",
            e.depth
        )));
    }
    if n > 22 {
        return Err(Error::InvalidInput(
            "construction depth above 22 puts band heights at f64 resolution"
                .into(),
        ));
    }
    if mu.total_mass() == 0.0 {
        return Ok(WepifyResult::trivial());
    }
    for atom in &mu.atoms {
        if e.closed_interval_clear(atom.pos, 0.0) {
            return Err(Error::InvalidInput(format!(
                "atom at {} lies off the set",
                atom.pos
            )));
        }
    }
    entropy_verdict(e)?;

    let f = e.family_f(n);
    let mut level_arcs: Vec<Vec<DyadicArc>> = vec![Vec::new(); n as usize + 1];
    for &arc in &f.arcs {
        level_arcs[arc.level as usize].push(arc);
    }
    let t_mass: Vec<f64> = level_arcs
        .iter()
        .enumerate()
        .map(|(j, v)| v.len() as f64 / (1u64 << j) as f64)
        .collect();
    let mut r_tail = vec![0.0; n as usize + 2];
    for j in (0..=n as usize).rev() {
        r_tail[j] = r_tail[j + 1] + t_mass[j];
    }
    let eps = 1.0 / (1u64 << n) as f64;
    let k_raw: Vec<u32> = (0..=n)
        .map(|j| {
            let cap = (1.0 / (r_tail[j as usize] + eps)).log2().floor();
            let cap = cap.clamp(0.0, 64.0) as u32;
            j.min(cap).max(1)
        })
        .collect();
    let k_cost = |cap: u32| -> f64 {
        k_raw
            .iter()
            .zip(&t_mass)
            .map(|(&k, &tj)| f64::from(k.min(cap)) * tj)
            .sum()
    };
    let mut k_cap = *k_raw.iter().max().unwrap();
    while k_cap > 1 && k_cost(k_cap) > budget {
        k_cap -= 1;
    }
    if k_cost(k_cap) > budget {
        return Err(Error::Refused(format!(
            "budget {budget} cannot cover the correction family: one zero \
             per arc already costs {:.3}",
            k_cost(1)
        )));
    }
    let k_table: Vec<u32> = k_raw.iter().map(|&k| k.min(k_cap)).collect();

    let mut zeros = Vec::new();
    let mut log = Vec::new();
    for (j, arcs) in level_arcs.iter().enumerate() {
        let k = k_table[j];
        for &arc in arcs {
            zeros.extend(uniform_points(arc, k as usize));
            log.push(PlacementEntry {
                region: PlacementRegion::Top { arc },
                count: k,
            });
        }
    }

    let g = e.maximal_family_g(n);
    let max_m = g.arcs.iter().map(|a| a.level).max().unwrap_or(0) as usize;
    let mut t_table: Vec<u32> = Vec::new();
    if max_m >= 1 {
        let mut band_mass = vec![0.0; max_m + 1];
        for arc in &g.arcs {
            band_mass[arc.level as usize] += arc.len();
        }
        // u_k = mass of members deep enough to own band k; V_k its tail.
        let mut u = vec![0.0; max_m + 2];
        for k in (1..=max_m).rev() {
            u[k] = u[k + 1] + band_mass[k];
        }
        let mut v = vec![0.0; max_m + 2];
        for k in (1..=max_m).rev() {
            v[k] = v[k + 1] + u[k];
        }
        let mut prev = 0u32;
        for k in 1..=max_m {
            let target = (1.0 / v[k].sqrt()).floor();
            let next = if target >= f64::from(prev + 1) {
                prev + 1
            } else {
                (target as u32).max(1)
            };
            t_table.push(next);
            prev = next;
        }
        let t_cost = |cap: u32| -> f64 {
            g.arcs
                .iter()
                .map(|arc| {
                    let m = arc.level as usize;
                    let bands: u32 =
                        t_table[..m].iter().map(|&t| t.min(cap)).sum();
                    arc.len() * f64::from(bands)
                })
                .sum()
        };
        let mut t_cap = *t_table.iter().max().unwrap();
        while t_cap > 1 && t_cost(t_cap) > budget {
            t_cap -= 1;
        }
        if t_cost(t_cap) > budget {
            return Err(Error::Refused(format!(
                "budget {budget} cannot cover the box bands: one point per \
                 band already costs {:.3}",
                t_cost(1)
            )));
        }
        for t in &mut t_table {
            *t = (*t).min(t_cap);
        }

        for &arc in &g.arcs {
            let m = arc.level;
            let w = arc.len();
            for k in 1..=m {
                let s_k = u64::from(t_table[k as usize - 1]) << (m - k);
                let h = 0.75 * w * w * f64::exp2(f64::from(k));
                let r = 1.0 - h;
                for i in 0..s_k {
                    let turn = arc.start() + (i as f64 + 0.5) * w / s_k as f64;
                    zeros.push(DiskPoint::from_polar(r, turn));
                }
                log.push(PlacementEntry {
                    region: PlacementRegion::Strip { arc, band: k },
                    count: s_k as u32,
                });
            }
        }
    }

    Ok(WepifyResult::assemble(
        zeros,
        log,
        Sequences { k_j: k_table, t_k: t_table },
    ))
}

/// Places `k` zeros in the top half of every arc whose anchor Poisson
/// value falls in the class `k^2 < u <= (k+1)^2`. Zeros therefore stay
/// where the singular factor is already small. Refuses supports whose
/// free fraction drops below `POROSITY_FLOOR`.
pub fn easy_wepify_porous(mu: &AtomicMeasure, n: u32) -> Result<WepifyResult> {
    if mu.total_mass() == 0.0 {
        return Ok(WepifyResult::trivial());
    }
    let positions: Vec<f64> = mu.atoms.iter().map(|a| a.pos).collect();
    let e = CircleSet::finite_points(&positions, mu.meta.depth.max(n));
    let rep = e.porosity(n);
    if rep.c_n < POROSITY_FLOOR {
        return Err(Error::Refused(format!(
            "support is not porous at depth {n}: free fraction {:.4} at \
             {:?} is below the floor {POROSITY_FLOOR}",
            rep.c_n, rep.c_n_arc
        )));
    }
    let pts = mu.unit_points();
    let mut zeros = Vec::new();
    let mut log = Vec::new();
    for level in 0..=n {
        for arc in DyadicArc::level_iter(level) {
            let u = kernel_at(&pts, z_of(arc));
            if u > 1.0 {
                let k = u.sqrt().ceil() as u32 - 1;
                zeros.extend(uniform_points(arc, k as usize));
                log.push(PlacementEntry {
                    region: PlacementRegion::Top { arc },
                    count: k,
                });
            }
        }
    }
    Ok(WepifyResult::assemble(zeros, log, Sequences::default()))
}

/// Places `floor(phi(lambda))` zeros in the top half of every arc whose
/// anchor Poisson value `lambda` exceeds 1. Refuses mass sequences whose
/// tail-to-term ratio exceeds `TAIL_RATIO_BOUND`.
pub fn easy_wepify_atomic(
    b: &[f64],
    positions: &[f64],
    n: u32,
) -> Result<WepifyResult> {
    if b.len() != positions.len() {
        return Err(Error::InvalidInput(format!(
            "{} masses against {} positions",
            b.len(),
            positions.len()
        )));
    }
    let ratio = tail_ratio_kl5(b)?;
    if ratio > TAIL_RATIO_BOUND {
        return Err(Error::Refused(format!(
            "tail-to-term ratio {ratio:.3} exceeds {TAIL_RATIO_BOUND}; \
             masses this irregular feed the counterexample gadget instead"
        )));
    }
    let mu = AtomicMeasure::new(
        positions.iter().copied().zip(b.iter().copied()).collect(),
        "atomic",
        n,
    );
    let pts = mu.unit_points();
    let mut zeros = Vec::new();
    let mut log = Vec::new();
    for level in 0..=n {
        for arc in DyadicArc::level_iter(level) {
            let lam = kernel_at(&pts, z_of(arc));
            if lam > 1.0 {
                let k = (1.0 + lam.ln()).floor() as u32;
                zeros.extend(uniform_points(arc, k as usize));
                log.push(PlacementEntry {
                    region: PlacementRegion::Top { arc },
                    count: k,
                });
            }
        }
    }
    Ok(WepifyResult::assemble(zeros, log, Sequences::default()))
}

/// One counterexample gadget: the arc it occupies, its column shape, the
/// Poisson threshold its columns clear, and the depth a hitting set must
/// reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GadgetWitness {
    pub arc: DyadicArc,
    pub params: GadgetParams,
    pub threshold: f64,
    pub hitting_depth: u32,
}

impl GadgetWitness {
    /// Every dyadic arc between the column level and the slot level lying
    /// inside a gadget column. Any zero set certifying the embedding
    /// property must put a zero in each of their top halves.
    pub fn mandated_arcs(&self) -> Vec<DyadicArc> {
        let mut arcs = Vec::new();
        for col in gadget_columns(self.arc, &self.params) {
            for off in 0..=self.params.n {
                for i in 0..(1u64 << off) {
                    arcs.push(DyadicArc::new(
                        col.level + off,
                        (col.index << off) + i,
                    ));
                }
            }
        }
        arcs
    }

    /// One zero at each mandated anchor: no hitting set can be smaller
    /// because the top halves are pairwise disjoint.
    pub fn minimal_hitting_set(&self) -> Vec<DiskPoint> {
        self.mandated_arcs().into_iter().map(z_of).collect()
    }

    /// Lower bound for `log(1/|B(z(J))|)` over Blaschke products holding
    /// a hitting set, from the per-factor bound
    /// `log(1/|b_w(z)|) >= (1 - rho(z, w)^2) / 2`.
    pub fn hitting_floor(&self) -> f64 {
        wep_sum(&self.minimal_hitting_set(), z_of(self.arc)) / 2.0
    }
}

/// A counterexample measure with the gadget witnesses certifying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiWepable {
    pub measure: AtomicMeasure,
    pub witnesses: Vec<GadgetWitness>,
}

/// Assembles gadget groups from a mass sequence with unbounded
/// tail-to-term ratios. Group `nu` takes the first factor-2 run of
/// `4^(nu+1)` consecutive masses, lays them over the gadget slots of an
/// arc starting at `2^(-2 nu)`, and records the witness; what remains of
/// the sequence sits in a single residual atom at the antipode. Stops
/// when the run or the depth budget `n` runs out.
pub fn anti_wepable_atomic(b: &[f64], n: u32) -> Result<AntiWepable> {
    let full = tail_ratio_kl5(b)?;
    if b.len() < 64 {
        return Err(Error::InvalidInput(format!(
            "need at least 64 masses to hunt for gadget groups, got {}",
            b.len()
        )));
    }
    let half = tail_ratio_kl5(&b[..b.len() / 2])?;
    if full < 1.15 * half {
        return Err(Error::Refused(format!(
            "tail-to-term ratios stay put under truncation ({half:.3} over \
             half the terms, {full:.3} over all of them); the regularity \
             condition holds and no gadget group exists"
        )));
    }
    struct Group {
        nu: u32,
        side: u32,
        m: u32,
        k: u32,
        s0: usize,
    }
    let mut groups: Vec<Group> = Vec::new();
    for nu in 1u32.. {
        let side = nu + 1;
        let len = 1usize << (2 * side);
        if len > b.len() {
            break;
        }
        // First factor-2 flat run of `len` consecutive masses.
        let Some(s0) = (0..=b.len() - len).find(|&s| b[s] <= 2.0 * b[s + len - 1])
        else {
            break;
        };
        let spread = u64::from(side) << (2 * side);
        let m = 64 - spread.leading_zeros();
        let b_end = b[s0 + len - 1];
        let k_min = (20.0 / (b_end * f64::exp2(f64::from(m)))).log2().ceil();
        let k = (k_min as i64).max(i64::from(2 * nu)) as u32;
        if k + m > n {
            break;
        }
        groups.push(Group { nu, side, m, k, s0 });
    }
    if groups.is_empty() {
        return Err(Error::Refused(
            "no factor-2 run of 16 consecutive masses fits inside the given \
             truncation"
                .into(),
        ));
    }
    let total: f64 = b.iter().sum();
    let assemble = |groups: &[Group]| -> (AtomicMeasure, Vec<GadgetWitness>) {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut witnesses = Vec::new();
        let mut used = 0.0;
        for g in groups {
            let arc = DyadicArc::new(g.k, 1u64 << (g.k - 2 * g.nu));
            let len = 1usize << (2 * g.side);
            let b_end = b[g.s0 + len - 1];
            let params = GadgetParams::desk(u64::from(g.side), g.side, g.m);
            for (slot, &mass) in
                gadget_slots(arc, &params).iter().zip(&b[g.s0..])
            {
                atoms.push((slot.mid(), mass));
                used += mass;
            }
            witnesses.push(GadgetWitness {
                arc,
                params,
                threshold: b_end * f64::exp2(f64::from(g.k + g.m)) / 10.0,
                hitting_depth: g.k + g.m,
            });
        }
        atoms.push((0.5, total - used));
        let depth = witnesses.iter().map(|w| w.hitting_depth).max().unwrap();
        (AtomicMeasure::new(atoms, "anti-atomic", depth), witnesses)
    };
    // The obstruction needs the anchor Poisson values to decrease along
    // the groups. Deepening a group raises its own anchor value (the
    // masses stay while the arc shrinks), so the profile is enforced by
    // deepening earlier groups until each dominates its successor.
    loop {
        let (measure, witnesses) = assemble(&groups);
        let pts = measure.unit_points();
        let p: Vec<f64> = witnesses
            .iter()
            .map(|w| kernel_at(&pts, z_of(w.arc)))
            .collect();
        let Some(v) = (0..p.len() - 1).rev().find(|&v| p[v] <= p[v + 1])
        else {
            return Ok(AntiWepable { measure, witnesses });
        };
        groups[v].k += 1;
        if groups[v].k + groups[v].m > n {
            return Err(Error::Refused(format!(
                "depth budget {n} cannot hold a decreasing anchor profile \
                 across {} groups",
                groups.len()
            )));
        }
    }
}

/// Levels a fully covered window may span before the scan stops caring.
const WINDOW_CAP: u32 = 6;

/// Depth below `j` through which every dyadic descendant still meets the
/// set, capped at `cap`.
fn coverage(e: &CircleSet, j: DyadicArc, cap: u32) -> u32 {
    let mut frontier = vec![j];
    let mut m = 0;
    while m < cap {
        let next: Vec<DyadicArc> =
            frontier.iter().flat_map(|a| a.children()).collect();
        if next.iter().any(|a| !e.hits(*a)) {
            break;
        }
        frontier = next;
        m += 1;
    }
    m
}

/// A point of the set inside `j`, found by descending toward hit children
/// down to the set's resolution. The returned turn is within one
/// resolution arc of the set.
fn point_in_set(e: &CircleSet, j: DyadicArc) -> f64 {
    let mut a = j;
    while a.level < e.depth {
        let [l, r] = a.children();
        a = if e.hits(l) { l } else { r };
    }
    a.mid()
}

/// Builds gadget measures inside the deepest fully covered dyadic window
/// of a non-porous set, with every atom sitting on the set. Refuses sets
/// that free up a subarc within three levels everywhere.
pub fn anti_wepable_nonporous(e: &CircleSet, n: u32) -> Result<AntiWepable> {
    let n = n.min(e.depth);
    let mut best: Option<(u32, DyadicArc)> = None;
    for k in 0..=n.saturating_sub(3) {
        let reach = (n - k).min(WINDOW_CAP);
        if best.is_some_and(|(m, _)| m >= reach) {
            break;
        }
        for arc in DyadicArc::level_iter(k) {
            if !e.hits(arc) {
                continue;
            }
            let m = coverage(e, arc, reach);
            if best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, arc));
                if m == reach {
                    break;
                }
            }
        }
    }
    let Some((m_star, j_star)) = best.filter(|&(m, _)| m >= 3) else {
        let got = best
            .map(|(m, a)| format!("largest window spans {m} levels at {a:?}"))
            .unwrap_or_else(|| "no arc meets the set".into());
        return Err(Error::Refused(format!(
            "set is porous at depth {n}: every dyadic arc frees a subarc \
             within three levels ({got})"
        )));
    };
    // Two separated gadgets fit whenever the window is deep enough to
    // descend two levels and still hold a three-level window.
    let mut picks: Vec<(DyadicArc, u32)> = Vec::new();
    if m_star >= 5 {
        let base = DyadicArc::new(j_star.level + 2, j_star.index << 2);
        let twin = DyadicArc::new(base.level, base.index + 2);
        for arc in [base, twin] {
            let m = coverage(e, arc, (n - arc.level).min(WINDOW_CAP));
            picks.push((arc, m));
        }
    } else {
        picks.push((j_star, m_star));
    }
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut witnesses = Vec::new();
    for (arc, m) in picks {
        let gn = (m - 1) / 2;
        let q = 1u64 << (m - 1 - 2 * gn);
        let params = GadgetParams::desk(q, gn, m);
        let threshold = 2.0;
        let mass = 10.0 * threshold * f64::exp2(-f64::from(arc.level + m));
        for slot in gadget_slots(arc, &params) {
            atoms.push((point_in_set(e, slot), mass));
        }
        witnesses.push(GadgetWitness {
            arc,
            params,
            threshold,
            hitting_depth: arc.level + m,
        });
    }
    Ok(AntiWepable {
        measure: AtomicMeasure::new(atoms, "anti-nonporous", e.depth),
        witnesses,
    })
}

/// Largest value over dyadic `J` of the weighted class sum
/// `sum_k k sum_{I placed with count k} |I||J| / |1 - conj(z(J)) z(I)|^2`
/// divided by the Poisson value at `z(J)`, with the arc attaining it.
/// Finite values certify the Blaschke side of the porous construction.
pub fn mainest_check(
    mu: &AtomicMeasure,
    result: &WepifyResult,
    n: u32,
) -> Result<(f64, DyadicArc)> {
    let mut placed: Vec<(DiskPoint, f64, f64)> = Vec::new();
    for entry in &result.placement_log {
        match entry.region {
            PlacementRegion::Top { arc } => {
                placed.push((z_of(arc), arc.len(), f64::from(entry.count)));
            }
            PlacementRegion::Strip { .. } => {
                return Err(Error::InvalidInput(
                    "class-sum check applies to top-half placements only"
                        .into(),
                ));
            }
        }
    }
    let pts = mu.unit_points();
    if pts.is_empty() {
        return Ok((0.0, DyadicArc::ROOT));
    }
    let mut best = (0.0, DyadicArc::ROOT);
    for level in 0..=n {
        for j in DyadicArc::level_iter(level) {
            let zj = z_of(j);
            let u = kernel_at(&pts, zj);
            let num: f64 = placed
                .iter()
                .map(|&(zi, li, k)| k * li * j.len() / den2(zj, zi))
                .sum();
            let ratio = num / u;
            if ratio > best.0 {
                best = (ratio, j);
            }
        }
    }
    Ok(best)
}

/// Largest value over dyadic `J` of
/// `sum_{I != J} (1 - rho(z(J), z(I))) phi(lambda(I)) / max(lambda(J), 1)`
/// over all dyadic arcs of level at most `n`, with the arc attaining it.
/// Verifies on the way in that the placement counts match the class rule
/// `floor(phi(lambda))`.
pub fn kl2_check(
    mu: &AtomicMeasure,
    result: &WepifyResult,
    n: u32,
) -> Result<(f64, DyadicArc)> {
    let pts = mu.unit_points();
    for entry in &result.placement_log {
        let PlacementRegion::Top { arc } = entry.region else {
            return Err(Error::InvalidInput(
                "pair-sum check applies to top-half placements only".into(),
            ));
        };
        let lam = kernel_at(&pts, z_of(arc));
        let expected =
            if lam > 1.0 { (1.0 + lam.ln()).floor() as u32 } else { 0 };
        if entry.count != expected {
            return Err(Error::InvalidInput(format!(
                "placement count {} at {arc:?} differs from the class rule \
                 value {expected}",
                entry.count
            )));
        }
    }
    let count: usize = (0..=n).map(|l| 1usize << l).sum();
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    let mut lam = Vec::with_capacity(count);
    let mut ph = Vec::with_capacity(count);
    let mut arcs = Vec::with_capacity(count);
    for level in 0..=n {
        for j in DyadicArc::level_iter(level) {
            let z = z_of(j);
            let l = kernel_at(&pts, z);
            xs.push(z.re);
            ys.push(z.im);
            lam.push(l);
            ph.push(phi_or_zero(l));
            arcs.push(j);
        }
    }
    let mut best = (0.0, DyadicArc::ROOT);
    for a in 0..arcs.len() {
        let mut s = 0.0;
        for b in 0..arcs.len() {
            if b == a {
                continue;
            }
            let (dx, dy) = (xs[a] - xs[b], ys[a] - ys[b]);
            let num2 = dx * dx + dy * dy;
            let re = 1.0 - (xs[a] * xs[b] + ys[a] * ys[b]);
            let im = xs[a] * ys[b] - ys[a] * xs[b];
            let d2 = re * re + im * im;
            s += (1.0 - (num2 / d2).sqrt()) * ph[b];
        }
        let ratio = s / lam[a].max(1.0);
        if ratio > best.0 {
            best = (ratio, arcs[a]);
        }
    }
    Ok(best)
}
