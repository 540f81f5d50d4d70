//! Geometry of the unit disk and the dyadic decomposition of its boundary.
//!
//! Angles are measured in turn units: the full circle has length 1 and the
//! point at turn `t` is `e^{2 pi i t}`. Dyadic endpoints `k/2^n` are exact in
//! binary floating point, so deep trees do not drift; radians appear only
//! inside kernel evaluations.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A point of the unit disk. Boundary points (|z| = 1) are allowed as atom
/// positions; evaluation kernels require |z| < 1 at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub const ZERO: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        DiskPoint { re, im }
    }

    /// Point at radius `r` and angle `turn` turns.
    pub fn from_polar(r: f64, turn: f64) -> Self {
        let th = TAU * turn;
        DiskPoint {
            re: r * th.cos(),
            im: r * th.sin(),
        }
    }

    /// Boundary point at angle `turn` turns.
    pub fn on_circle(turn: f64) -> Self {
        Self::from_polar(1.0, turn)
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.abs2().sqrt()
    }

    /// Angle in turns, normalized to [0, 1).
    pub fn turn(self) -> f64 {
        let t = self.im.atan2(self.re) / TAU;
        let t = if t < 0.0 { t + 1.0 } else { t };
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }
}

/// An arc of the circle given by its start and length in turns. Complement
/// gaps of boundary sets are treated as open arcs; the half-open dyadic grid
/// is [`DyadicArc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    #[serde(rename = "length")]
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Self {
        Arc { start, len }
    }

    /// Offset of `turn` from the arc start, wrapped into [0, 1).
    fn offset(&self, turn: f64) -> f64 {
        (turn - self.start).rem_euclid(1.0)
    }

    /// Membership in the open arc (endpoints excluded).
    pub fn contains_open(&self, turn: f64) -> bool {
        if self.len >= 1.0 {
            return true;
        }
        let d = self.offset(turn);
        d > 0.0 && d < self.len
    }

    /// Membership in the closed arc (endpoints included).
    pub fn contains_closed(&self, turn: f64) -> bool {
        if self.len >= 1.0 {
            return true;
        }
        self.offset(turn) <= self.len
    }
}

/// Half-open dyadic arc `[index / 2^level, (index + 1) / 2^level)` in turns.
/// Every circle point belongs to exactly one arc per level.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct DyadicArc {
    pub level: u32,
    pub index: u64,
}

impl DyadicArc {
    pub const ROOT: DyadicArc = DyadicArc { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Self {
        debug_assert!(level < 53, "dyadic level {level} exceeds f64 exactness");
        debug_assert!(index < (1u64 << level.min(63)) || level == 0);
        DyadicArc { level, index }
    }

    /// Arc length `2^-level` in turns.
    pub fn len(self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn start(self) -> f64 {
        self.index as f64 * self.len()
    }

    /// Midpoint angle in turns.
    pub fn mid(self) -> f64 {
        (self.index as f64 + 0.5) * self.len()
    }

    /// The unique level-`level` arc containing the (wrapped) turn.
    pub fn containing(level: u32, turn: f64) -> Self {
        let cells = 1u64 << level;
        let t = turn.rem_euclid(1.0);
        let index = ((t * cells as f64) as u64).min(cells - 1);
        DyadicArc { level, index }
    }

    pub fn parent(self) -> Option<DyadicArc> {
        if self.level == 0 {
            None
        } else {
            Some(DyadicArc {
                level: self.level - 1,
                index: self.index >> 1,
            })
        }
    }

    pub fn children(self) -> [DyadicArc; 2] {
        let level = self.level + 1;
        [
            DyadicArc { level, index: self.index << 1 },
            DyadicArc { level, index: (self.index << 1) | 1 },
        ]
    }

    /// Half-open membership test with wrap.
    pub fn contains_turn(self, turn: f64) -> bool {
        let t = turn.rem_euclid(1.0);
        let d = t - self.start();
        d >= 0.0 && d < self.len()
    }

    /// Membership in the closure [start, start + len].
    pub fn contains_turn_closed(self, turn: f64) -> bool {
        Arc::new(self.start(), self.len()).contains_closed(turn)
    }

    /// True when `self` is contained in `other` (as dyadic arcs: equal or a
    /// descendant).
    pub fn is_subarc_of(self, other: DyadicArc) -> bool {
        self.level >= other.level && (self.index >> (self.level - other.level)) == other.index
    }

    /// The dilated arc `2J`: same center, twice the length, wrapped modulo
    /// the circle. For levels 0 and 1 this is the whole circle.
    pub fn doubled(self) -> Arc {
        let len = self.len();
        if 2.0 * len >= 1.0 {
            Arc::new(0.0, 1.0)
        } else {
            Arc::new((self.start() - 0.5 * len).rem_euclid(1.0), 2.0 * len)
        }
    }

    /// All `2^level` arcs of one level, in index order.
    pub fn level_iter(level: u32) -> impl Iterator<Item = DyadicArc> {
        (0..(1u64 << level)).map(move |index| DyadicArc { level, index })
    }
}

/// Position of a point relative to the Carleson box of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Outside,
    /// In the box Q(J): angle over the closure of J, `1 - |J| <= |z| < 1`.
    InQ,
    /// In the top half T(J): additionally `|z| <= 1 - |J|/2`.
    InT,
}

/// Pseudohyperbolic distance `rho(z, w) = |z - w| / |1 - conj(w) z|`.
pub fn rho(z: DiskPoint, w: DiskPoint) -> f64 {
    (rho2(z, w)).sqrt()
}

/// Squared pseudohyperbolic distance, the division-free core of [`rho`].
#[inline]
pub fn rho2(z: DiskPoint, w: DiskPoint) -> f64 {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    let num = dx * dx + dy * dy;
    // conj(w) * z = dot + i * cross
    let dot = w.re * z.re + w.im * z.im;
    let cross = w.re * z.im - w.im * z.re;
    let ux = 1.0 - dot;
    let den = ux * ux + cross * cross;
    num / den
}

/// Hyperbolic separation exponent `beta(z, w) = log2(1 / (1 - rho(z, w)))`.
pub fn beta(z: DiskPoint, w: DiskPoint) -> f64 {
    -(1.0 - rho(z, w)).log2()
}

/// Box anchor `z(J) = (1 - (3/4)|J|) xi_J`, with `xi_J` the midpoint of `J`
/// on the circle. Lies in T(J).
pub fn z_of(j: DyadicArc) -> DiskPoint {
    DiskPoint::from_polar(1.0 - 0.75 * j.len(), j.mid())
}

/// Classifies `z` against the Carleson box `Q(J)` and its top half `T(J)`.
pub fn region_membership(z: DiskPoint, j: DyadicArc) -> Region {
    let r = z.abs();
    let w = j.len();
    if !(r >= 1.0 - w && r < 1.0) {
        return Region::Outside;
    }
    if !j.contains_turn_closed(z.turn()) {
        return Region::Outside;
    }
    if r <= 1.0 - 0.5 * w {
        Region::InT
    } else {
        Region::InQ
    }
}

/// Deterministic lattice of `k` points inside `T(J)`.
///
/// Layout: `rows = ceil(sqrt(k/2))` radial rows at radii interpolating
/// `[1 - |J|, 1 - |J|/2]` with half-cell margins, `cols = ceil(k / rows)`
/// angular columns with half-cell margins, emitted row-major and truncated
/// to `k`. Nearest-neighbor spacing, covering radius, and distance to the
/// boundary of `T(J)` are all comparable to `|J| / sqrt(k)` within a fixed
/// factor. `k = 1` degenerates to the box anchor.
pub fn uniform_points(j: DyadicArc, k: usize) -> Vec<DiskPoint> {
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![z_of(j)];
    }
    let rows = ((k as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let cols = k.div_ceil(rows);
    let w = j.len();
    let start = j.start();
    let mut pts = Vec::with_capacity(k);
    'grid: for i in 0..rows {
        let r = (1.0 - w) + 0.5 * w * ((i as f64 + 0.5) / rows as f64);
        for c in 0..cols {
            if pts.len() == k {
                break 'grid;
            }
            let t = start + w * ((c as f64 + 0.5) / cols as f64);
            pts.push(DiskPoint::from_polar(r, t));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im)
    }

    fn random_disk_point(rng: &mut ChaCha8Rng, max_r: f64) -> DiskPoint {
        let r = max_r * rng.gen::<f64>().sqrt();
        DiskPoint::from_polar(r, rng.gen::<f64>())
    }

    #[test]
    fn rho_basic_values() {
        assert_eq!(rho(pt(0.3, 0.4), pt(0.3, 0.4)), 0.0);
        // |0.5 - (-0.5)| / |1 - (-0.5)(0.5)| = 1 / 1.25
        let r = rho(pt(0.5, 0.0), pt(-0.5, 0.0));
        assert!((r - 0.8).abs() < 1e-15);
        // rho(z, 0) = |z|
        let z = pt(0.3, -0.4);
        assert!((rho(z, DiskPoint::ZERO) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rho_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let z = random_disk_point(&mut rng, 0.999);
            let w = random_disk_point(&mut rng, 0.999);
            let a = rho(z, w);
            let b = rho(w, z);
            assert!((a - b).abs() < 1e-13);
            assert!((0.0..1.0).contains(&a));
        }
    }

    #[test]
    fn rho_triangle_inequality_on_sampled_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let a = random_disk_point(&mut rng, 0.999);
            let b = random_disk_point(&mut rng, 0.999);
            let c = random_disk_point(&mut rng, 0.999);
            assert!(rho(a, c) <= rho(a, b) + rho(b, c) + 1e-12);
        }
    }

    #[test]
    fn beta_reference_values() {
        assert_eq!(beta(DiskPoint::ZERO, DiskPoint::ZERO), 0.0);
        assert!((beta(DiskPoint::ZERO, pt(0.5, 0.0)) - 1.0).abs() < 1e-12);
        assert!((beta(DiskPoint::ZERO, pt(0.75, 0.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beta_between_same_level_anchors_tracks_index_gap() {
        // For anchors of level-n arcs with circular index gap t, beta is
        // 2*log2(t+1) up to a bounded correction. The bound 5.5 was measured
        // exhaustively at level 10 (max deviation 5.07, attained at the
        // antipodal gap).
        let n = 10u32;
        let cells = 1u64 << n;
        let z0 = z_of(DyadicArc::new(n, 0));
        for t in 1..cells {
            let gap = t.min(cells - t);
            let b = beta(z0, z_of(DyadicArc::new(n, t)));
            let predicted = 2.0 * ((gap + 1) as f64).log2();
            assert!(
                (b - predicted).abs() <= 5.5,
                "gap {gap}: beta {b} vs predicted {predicted}"
            );
        }
    }

    #[test]
    fn anchor_of_root_arc() {
        let z = z_of(DyadicArc::ROOT);
        assert!((z.re + 0.25).abs() < 1e-15);
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn anchor_of_first_half_arc() {
        // [0, 1/2) has midpoint at a quarter turn; anchor radius 1 - 3/8.
        let z = z_of(DyadicArc::new(1, 0));
        assert!(z.re.abs() < 1e-15);
        assert!((z.im - 0.625).abs() < 1e-15);
    }

    #[test]
    fn anchor_radius_formula() {
        for level in 0..20 {
            let j = DyadicArc::new(level, 0);
            let expected = 1.0 - 0.75 * j.len();
            assert!((z_of(j).abs() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn dyadic_partition_at_every_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for level in 0..=12u32 {
            let total: f64 = DyadicArc::level_iter(level).map(|j| j.len()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for _ in 0..200 {
                let t: f64 = rng.gen();
                let hits = DyadicArc::level_iter(level)
                    .filter(|j| j.contains_turn(t))
                    .count();
                assert_eq!(hits, 1, "turn {t} at level {level}");
                let j = DyadicArc::containing(level, t);
                assert!(j.contains_turn(t));
            }
        }
    }

    #[test]
    fn parent_child_consistency() {
        for level in 1..=10u32 {
            for j in DyadicArc::level_iter(level) {
                let p = j.parent().unwrap();
                assert!(j.is_subarc_of(p));
                assert!(p.children().contains(&j));
            }
        }
        assert_eq!(DyadicArc::ROOT.parent(), None);
    }

    #[test]
    fn doubled_arc_wraps_and_covers() {
        // 2J of [0, 1/4) covers turns slightly below 1 (wrap across 0).
        let d = DyadicArc::new(2, 0).doubled();
        assert!(d.contains_open(0.99));
        assert!(d.contains_open(0.1));
        assert!(!d.contains_open(0.5));
        // Levels 0 and 1 dilate to the whole circle.
        assert_eq!(DyadicArc::new(1, 0).doubled().len, 1.0);
        assert_eq!(DyadicArc::ROOT.doubled().len, 1.0);
    }

    #[test]
    fn region_membership_of_anchor_and_center() {
        for level in 0..=8u32 {
            for index in [0u64, (1u64 << level) - 1] {
                let j = DyadicArc::new(level, index);
                assert_eq!(region_membership(z_of(j), j), Region::InT);
            }
        }
        for level in 1..=8u32 {
            let j = DyadicArc::new(level, 0);
            assert_eq!(region_membership(DiskPoint::ZERO, j), Region::Outside);
        }
    }

    #[test]
    fn region_membership_radius_bands() {
        let j = DyadicArc::new(3, 5);
        let mid = j.mid();
        let w = j.len();
        let in_q = DiskPoint::from_polar(1.0 - 0.25 * w, mid);
        assert_eq!(region_membership(in_q, j), Region::InQ);
        let in_t = DiskPoint::from_polar(1.0 - 0.75 * w, mid);
        assert_eq!(region_membership(in_t, j), Region::InT);
        let below = DiskPoint::from_polar(1.0 - 1.5 * w, mid);
        assert_eq!(region_membership(below, j), Region::Outside);
        let sideways = DiskPoint::from_polar(1.0 - 0.25 * w, mid + 2.0 * w);
        assert_eq!(region_membership(sideways, j), Region::Outside);
    }

    #[test]
    fn uniform_points_edge_counts() {
        let j = DyadicArc::new(4, 7);
        assert!(uniform_points(j, 0).is_empty());
        let single = uniform_points(j, 1);
        assert_eq!(single.len(), 1);
        let anchor = z_of(j);
        assert!((single[0].re - anchor.re).abs() < 1e-15);
        assert!((single[0].im - anchor.im).abs() < 1e-15);
    }

    #[test]
    fn uniform_points_lattice_properties() {
        for level in [0u32, 3, 7] {
            let j = DyadicArc::new(level, if level == 0 { 0 } else { 3 });
            let pts = uniform_points(j, 8);
            assert_eq!(pts.len(), 8);
            for &p in &pts {
                assert_eq!(region_membership(p, j), Region::InT);
            }
            let spacing_floor = j.len() / (2.0 * 3.0 * 4.0);
            for a in 0..pts.len() {
                for b in (a + 1)..pts.len() {
                    let dx = pts[a].re - pts[b].re;
                    let dy = pts[a].im - pts[b].im;
                    let d = (dx * dx + dy * dy).sqrt();
                    assert!(d >= spacing_floor, "level {level}: pair {a},{b} at {d}");
                }
            }
        }
    }

    #[test]
    fn uniform_points_deterministic_and_rotation_equivariant() {
        let j = DyadicArc::new(5, 9);
        let a = uniform_points(j, 13);
        let b = uniform_points(j, 13);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.re, q.re);
            assert_eq!(p.im, q.im);
        }
        // The lattice of [5, 9] is the lattice of [5, 0] rotated by 9 cells.
        let base = uniform_points(DyadicArc::new(5, 0), 13);
        let shift = TAU * 9.0 * DyadicArc::new(5, 0).len();
        let (s, c) = shift.sin_cos();
        for (p, q) in a.iter().zip(&base) {
            let rx = q.re * c - q.im * s;
            let ry = q.re * s + q.im * c;
            assert!((p.re - rx).abs() < 1e-12);
            assert!((p.im - ry).abs() < 1e-12);
        }
    }

    #[test]
    fn turn_normalization_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let z = random_disk_point(&mut rng, 0.999);
            let t = z.turn();
            assert!((0.0..1.0).contains(&t), "turn {t}");
        }
        // A tiny negative angle must wrap to a value strictly below 1.
        let z = DiskPoint::new(1.0, -1e-18);
        assert!((0.0..1.0).contains(&z.turn()));
    }
}
