//! Interval enclosures of the unknown velocity trajectory.
//!
//! A [`VelocityTube`] is a sequence of time slices `[t_k, t_{k+1}]`, each
//! carrying a box that encloses the velocity over the whole slice. The lower
//! and upper bound functions of the tube are therefore step functions, and
//! their primitives are continuous piecewise-linear functions. Both
//! primitives are stored at the slice boundaries as interval enclosures, so
//! the integral between interval time bounds reduces to range queries over
//! those nodes plus the two partial-slice end terms.

use crate::error::{Error, Result};
use crate::interval::{Box2, Interval};
use crate::rmq::{Extreme, SparseTable};

/// Multiplier applied to sigma when inflating the interpolant (95% policy).
pub const DEFAULT_SIGMA_MULTIPLIER: f64 = 2.0;

/// Default slice width in units of the median sample spacing.
pub const DEFAULT_SAMPLES_PER_SLICE: f64 = 10.0;

/// One world-frame velocity measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySample {
    pub t: f64,
    pub v: [f64; 2],
    /// Standard deviation of the measurement error, in m/s.
    pub sigma: f64,
}

/// Validated measurement sequence: finite values, strictly increasing
/// timestamps, non-negative sigma.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySamples {
    samples: Vec<VelocitySample>,
}

impl VelocitySamples {
    pub fn new(samples: Vec<VelocitySample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.v[0].is_finite() && s.v[1].is_finite()) {
                return Err(Error::Input(format!("sample {i} has a non-finite value")));
            }
            if !(s.sigma >= 0.0 && s.sigma.is_finite()) {
                return Err(Error::Input(format!(
                    "sample {i} has invalid sigma {}",
                    s.sigma
                )));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::Input(format!(
                    "timestamps not strictly increasing at sample {i} (t = {})",
                    s.t
                )));
            }
        }
        Ok(VelocitySamples { samples })
    }

    pub fn as_slice(&self) -> &[VelocitySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn median_spacing(&self) -> Option<f64> {
        if self.samples.len() < 2 {
            return None;
        }
        let mut gaps: Vec<f64> = self.samples.windows(2).map(|w| w[1].t - w[0].t).collect();
        gaps.sort_by(f64::total_cmp);
        Some(gaps[gaps.len() / 2])
    }

    /// Time-weighted mean speed of the piecewise-linear interpolant,
    /// approximated by the trapezoid rule on the speeds.
    pub fn mean_speed(&self) -> f64 {
        let d = self.duration();
        if d <= 0.0 {
            return self.samples.first().map_or(0.0, |s| s.v[0].hypot(s.v[1]));
        }
        let total: f64 = self
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].v[0].hypot(w[0].v[1]) + w[1].v[0].hypot(w[1].v[1])))
            .sum();
        total / d
    }
}

/// A time slice and its velocity enclosure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slice {
    pub t: Interval,
    pub v: Box2,
}

/// Enclosures of the primitives of the tube's lower and upper bound
/// functions at one slice boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveNode {
    pub t: f64,
    pub lower: [Interval; 2],
    pub upper: [Interval; 2],
}

#[derive(Clone)]
struct ComponentTables {
    lower_min: SparseTable,
    lower_max: SparseTable,
    upper_min: SparseTable,
    upper_max: SparseTable,
    vel_min: SparseTable,
    vel_max: SparseTable,
}

/// Sliced velocity tube with its precomputed primitive. Immutable once built.
#[derive(Clone)]
pub struct VelocityTube {
    bounds: Vec<f64>,
    boxes: Vec<Box2>,
    lower: [Vec<Interval>; 2],
    upper: [Vec<Interval>; 2],
    tables: [ComponentTables; 2],
}

impl std::fmt::Debug for VelocityTube {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VelocityTube")
            .field("t0", &self.t0())
            .field("tf", &self.tf())
            .field("slices", &self.boxes.len())
            .finish()
    }
}

fn component(b: &Box2, c: usize) -> Interval {
    if c == 0 {
        b.x
    } else {
        b.y
    }
}

/// Enclosure of the linear interpolant through `(ta, va)` and `(tb, vb)` at `t`.
fn interpolate(ta: f64, va: f64, tb: f64, vb: f64, t: f64) -> Interval {
    if t <= ta {
        return Interval::point(va);
    }
    if t >= tb {
        return Interval::point(vb);
    }
    let lambda = (t - ta) / (tb - ta);
    // Three roundings in the ratio; 4 eps brackets the exact weight.
    let slack = 4.0 * f64::EPSILON;
    let weight = Interval::new(
        (lambda * (1.0 - slack)).max(0.0),
        (lambda * (1.0 + slack)).min(1.0),
    );
    let r = Interval::point(va) + (Interval::point(vb) - Interval::point(va)) * weight;
    r.intersect(&Interval::spanning(va, vb))
}

impl VelocityTube {
    /// Builds a tube directly from slice boundaries and boxes.
    pub fn from_slices(bounds: Vec<f64>, boxes: Vec<Box2>) -> Result<Self> {
        if boxes.is_empty() || bounds.len() != boxes.len() + 1 {
            return Err(Error::Construction(format!(
                "{} boundaries for {} slices",
                bounds.len(),
                boxes.len()
            )));
        }
        if bounds.iter().any(|t| !t.is_finite()) || bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Construction(
                "slice boundaries must be finite and strictly increasing".into(),
            ));
        }
        if boxes.iter().any(|b| b.is_empty() || !b.x.mag().is_finite() || !b.y.mag().is_finite()) {
            return Err(Error::Construction("slice boxes must be bounded and non-empty".into()));
        }
        let n = boxes.len();
        let mut lower = [vec![Interval::ZERO; n + 1], vec![Interval::ZERO; n + 1]];
        let mut upper = lower.clone();
        for k in 0..n {
            let dt = Interval::point(bounds[k + 1]) - Interval::point(bounds[k]);
            for c in 0..2 {
                let v = component(&boxes[k], c);
                lower[c][k + 1] = lower[c][k] + dt * Interval::point(v.lo());
                upper[c][k + 1] = upper[c][k] + dt * Interval::point(v.hi());
            }
        }
        let tables = [0, 1].map(|c| {
            let lo: Vec<f64> = boxes.iter().map(|b| component(b, c).lo()).collect();
            let hi: Vec<f64> = boxes.iter().map(|b| component(b, c).hi()).collect();
            ComponentTables {
                lower_min: SparseTable::new(&lower[c].iter().map(|y| y.lo()).collect::<Vec<_>>(), Extreme::Min),
                lower_max: SparseTable::new(&lower[c].iter().map(|y| y.hi()).collect::<Vec<_>>(), Extreme::Max),
                upper_min: SparseTable::new(&upper[c].iter().map(|y| y.lo()).collect::<Vec<_>>(), Extreme::Min),
                upper_max: SparseTable::new(&upper[c].iter().map(|y| y.hi()).collect::<Vec<_>>(), Extreme::Max),
                vel_min: SparseTable::new(&lo, Extreme::Min),
                vel_max: SparseTable::new(&hi, Extreme::Max),
            }
        });
        Ok(VelocityTube {
            bounds,
            boxes,
            lower,
            upper,
            tables,
        })
    }

    pub fn t0(&self) -> f64 {
        self.bounds[0]
    }

    pub fn tf(&self) -> f64 {
        *self.bounds.last().unwrap()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.t0(), self.tf())
    }

    pub fn slice_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn slices(&self) -> impl Iterator<Item = Slice> + '_ {
        self.boxes.iter().enumerate().map(|(k, b)| Slice {
            t: Interval::new(self.bounds[k], self.bounds[k + 1]),
            v: *b,
        })
    }

    pub fn primitive(&self) -> Vec<PrimitiveNode> {
        (0..self.bounds.len())
            .map(|k| PrimitiveNode {
                t: self.bounds[k],
                lower: [self.lower[0][k], self.lower[1][k]],
                upper: [self.upper[0][k], self.upper[1][k]],
            })
            .collect()
    }

    fn check_domain(&self, t: &Interval) -> Result<()> {
        if t.is_empty() || t.lo() < self.t0() || t.hi() > self.tf() {
            return Err(Error::Domain {
                query: format!("{t:?}"),
                t0: self.t0(),
                tf: self.tf(),
            });
        }
        Ok(())
    }

    /// Index of a slice containing `t` (either neighbour at a boundary).
    fn slice_at(&self, t: f64) -> usize {
        self.bounds[1..]
            .partition_point(|&b| b < t)
            .min(self.boxes.len() - 1)
    }

    /// Hull of the slice boxes intersecting `t`.
    pub fn eval(&self, t: Interval) -> Result<Box2> {
        self.check_domain(&t)?;
        let n = self.boxes.len();
        let first = self.bounds[1..].partition_point(|&b| b < t.lo()).min(n - 1);
        let last = self.bounds[..n].partition_point(|&b| b <= t.hi()).max(1) - 1;
        let last = last.max(first);
        let comp = |c: usize| {
            let tb = &self.tables[c];
            Interval::new(tb.vel_min.query(first, last), tb.vel_max.query(first, last))
        };
        Ok(Box2::new(comp(0), comp(1)))
    }

    /// Enclosure of a primitive at a point time, given the nodes and the
    /// slope selector.
    fn primitive_at(&self, nodes: &[Interval], c: usize, upper: bool, t: f64) -> Interval {
        let k = self.slice_at(t);
        let v = component(&self.boxes[k], c);
        let slope = if upper { v.hi() } else { v.lo() };
        if t == self.bounds[k] {
            return nodes[k];
        }
        if t == self.bounds[k + 1] {
            return nodes[k + 1];
        }
        nodes[k] + (Interval::point(t) - Interval::point(self.bounds[k])) * Interval::point(slope)
    }

    /// Guaranteed (min, max) of one primitive over the time interval `t`.
    fn primitive_range(&self, c: usize, upper: bool, t: &Interval) -> (f64, f64) {
        let nodes = if upper { &self.upper[c] } else { &self.lower[c] };
        let ya = self.primitive_at(nodes, c, upper, t.lo());
        let yb = self.primitive_at(nodes, c, upper, t.hi());
        let mut lo = ya.lo().min(yb.lo());
        let mut hi = ya.hi().max(yb.hi());
        // Interior nodes strictly inside t.
        let j_lo = self.bounds.partition_point(|&x| x <= t.lo());
        let j_hi = self.bounds.partition_point(|&x| x < t.hi());
        if j_lo < j_hi {
            let tb = &self.tables[c];
            let (mn, mx) = if upper {
                (&tb.upper_min, &tb.upper_max)
            } else {
                (&tb.lower_min, &tb.lower_max)
            };
            lo = lo.min(mn.query(j_lo, j_hi - 1));
            hi = hi.max(mx.query(j_lo, j_hi - 1));
        }
        (lo, hi)
    }

    /// Integral of the tube between interval bounds:
    /// `[lb(y_lo([t2]) - y_lo([t1])), ub(y_hi([t2]) - y_hi([t1]))]` per
    /// component, where `y_lo`, `y_hi` are the primitives of the lower and
    /// upper bound functions. It encloses `int_{t1}^{t2} v` for every
    /// selection `v` of the tube and every `t1 <= t2` in the box.
    pub fn integral_bounded(&self, t1: Interval, t2: Interval) -> Result<Box2> {
        self.check_domain(&t1)?;
        self.check_domain(&t2)?;
        if t1.is_point() && t1 == t2 {
            return Ok(Box2::point(0.0, 0.0));
        }
        let comp = |c: usize| {
            let (l2_min, _) = self.primitive_range(c, false, &t2);
            let (_, l1_max) = self.primitive_range(c, false, &t1);
            let (_, u2_max) = self.primitive_range(c, true, &t2);
            let (u1_min, _) = self.primitive_range(c, true, &t1);
            let lo = (Interval::point(l2_min) - Interval::point(l1_max)).lo();
            let hi = (Interval::point(u2_max) - Interval::point(u1_min)).hi();
            Interval::new(lo, hi)
        };
        Ok(Box2::new(comp(0), comp(1)))
    }
}

/// Builds the tube `v_PL(t) + [-m sigma, m sigma]^2` sliced at `slice_width`.
///
/// Each slice box is the hull of the piecewise-linear interpolant over the
/// slice, inflated by `sigma_multiplier` times the largest sigma over the
/// slice (sigma itself is interpolated linearly between samples).
pub fn build_tube(samples: &VelocitySamples, slice_width: f64, sigma_multiplier: f64) -> Result<VelocityTube> {
    let s = samples.as_slice();
    if s.len() < 2 {
        return Err(Error::Construction(format!(
            "need at least 2 samples, got {}",
            s.len()
        )));
    }
    if !(slice_width > 0.0 && slice_width.is_finite()) {
        return Err(Error::Construction(format!("slice width must be positive, got {slice_width}")));
    }
    if !(sigma_multiplier >= 0.0 && sigma_multiplier.is_finite()) {
        return Err(Error::Construction(format!(
            "sigma multiplier must be non-negative, got {sigma_multiplier}"
        )));
    }
    let t0 = s[0].t;
    let tf = s[s.len() - 1].t;
    let n = ((tf - t0) / slice_width).ceil().max(1.0) as usize;
    let mut bounds: Vec<f64> = (0..n).map(|k| t0 + k as f64 * slice_width).collect();
    while bounds.len() > 1 && tf - bounds[bounds.len() - 1] < 1e-9 * slice_width {
        bounds.pop();
    }
    bounds.push(tf);

    let interp_at = |i: usize, t: f64| -> (Interval, Interval, f64) {
        // Interpolant at t in [s[i].t, s[i+1].t].
        let (a, b) = (&s[i], &s[i + 1]);
        let vx = interpolate(a.t, a.v[0], b.t, b.v[0], t);
        let vy = interpolate(a.t, a.v[1], b.t, b.v[1], t);
        let sig = interpolate(a.t, a.sigma, b.t, b.sigma, t).hi();
        (vx, vy, sig)
    };

    let mut boxes = Vec::with_capacity(bounds.len() - 1);
    // Index of the sample interval containing the current slice start.
    let mut i = 0usize;
    for k in 0..bounds.len() - 1 {
        let (a, b) = (bounds[k], bounds[k + 1]);
        while i + 2 < s.len() && s[i + 1].t <= a {
            i += 1;
        }
        let (mut vx, mut vy, mut sig) = interp_at(i, a);
        let mut j = i + 1;
        while j < s.len() && s[j].t < b {
            vx = vx.hull(&Interval::point(s[j].v[0]));
            vy = vy.hull(&Interval::point(s[j].v[1]));
            sig = sig.max(s[j].sigma);
            j += 1;
        }
        let jb = (j - 1).min(s.len() - 2);
        let (bx, by, bsig) = interp_at(jb, b);
        vx = vx.hull(&bx);
        vy = vy.hull(&by);
        sig = sig.max(bsig);
        let r = (Interval::point(sigma_multiplier) * Interval::point(sig)).hi();
        boxes.push(Box2::new(vx.inflate(r), vy.inflate(r)));
    }
    VelocityTube::from_slices(bounds, boxes)
}

/// Slice width used when none is configured: ten median sample spacings.
pub fn default_slice_width(samples: &VelocitySamples) -> Option<f64> {
    samples
        .median_spacing()
        .map(|h| h * DEFAULT_SAMPLES_PER_SLICE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    fn samples(pts: &[(f64, [f64; 2], f64)]) -> VelocitySamples {
        VelocitySamples::new(
            pts.iter()
                .map(|&(t, v, sigma)| VelocitySample { t, v, sigma })
                .collect(),
        )
        .unwrap()
    }

    fn constant_tube(vx: Interval, vy: Interval, t0: f64, tf: f64, n: usize) -> VelocityTube {
        let bounds: Vec<f64> = (0..=n).map(|k| t0 + (tf - t0) * k as f64 / n as f64).collect();
        VelocityTube::from_slices(bounds, vec![Box2::new(vx, vy); n]).unwrap()
    }

    #[test]
    fn constant_interpolant_inflated() {
        let s = samples(&[(0.0, [1.0, 0.0], 0.5), (10.0, [1.0, 0.0], 0.5)]);
        let tube = build_tube(&s, 1.0, 2.0).unwrap();
        assert_eq!(tube.slice_count(), 10);
        for slice in tube.slices() {
            assert_eq!(slice.v, Box2::new(iv(0.0, 2.0), iv(-1.0, 1.0)));
        }
    }

    #[test]
    fn ramp_hull() {
        let s = samples(&[(0.0, [0.0, 0.0], 0.0), (1.0, [2.0, 0.0], 0.0)]);
        let tube = build_tube(&s, 1.0, 2.0).unwrap();
        assert_eq!(tube.slice_count(), 1);
        assert_eq!(tube.slices().next().unwrap().v.x, iv(0.0, 2.0));
    }

    #[test]
    fn varying_sigma_uses_slice_maximum() {
        // sigma ramps 0.1 -> 0.3 -> 0.1 over [0, 2]; slice [0.5, 1.5] peaks at 0.3.
        let s = samples(&[
            (0.0, [0.0, 0.0], 0.1),
            (1.0, [0.0, 0.0], 0.3),
            (2.0, [0.0, 0.0], 0.1),
        ]);
        let tube = build_tube(&s, 0.5, 2.0).unwrap();
        let radii: Vec<f64> = tube.slices().map(|sl| sl.v.x.hi()).collect();
        // Slices [0,.5] [.5,1] [1,1.5] [1.5,2]: max sigma .2 .3 .3 .2
        let expected = [0.4, 0.6, 0.6, 0.4];
        for (r, e) in radii.iter().zip(expected) {
            assert!((r - e).abs() < 1e-12, "{radii:?}");
            assert!(*r >= e - 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let one = samples(&[(0.0, [0.0, 0.0], 0.0)]);
        assert!(matches!(build_tube(&one, 1.0, 2.0), Err(Error::Construction(_))));
        let bad = VelocitySamples::new(vec![
            VelocitySample { t: 1.0, v: [0.0, 0.0], sigma: 0.0 },
            VelocitySample { t: 1.0, v: [0.0, 0.0], sigma: 0.0 },
        ]);
        assert!(matches!(bad, Err(Error::Input(_))));
        let two = samples(&[(0.0, [0.0, 0.0], 0.0), (1.0, [0.0, 0.0], 0.0)]);
        assert!(build_tube(&two, 0.0, 2.0).is_err());
    }

    #[test]
    fn eval_examples() {
        let tube = constant_tube(iv(1.0, 2.0), iv(3.0, 4.0), 0.0, 10.0, 5);
        assert_eq!(tube.eval(iv(3.3, 7.1)).unwrap(), Box2::new(iv(1.0, 2.0), iv(3.0, 4.0)));

        let tube = VelocityTube::from_slices(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![
                Box2::new(iv(0.0, 1.0), iv(0.0, 0.0)),
                Box2::new(iv(2.0, 3.0), iv(0.0, 0.0)),
                Box2::new(iv(5.0, 6.0), iv(0.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(tube.eval(iv(0.5, 1.5)).unwrap().x, iv(0.0, 3.0));
        assert_eq!(tube.eval(Interval::point(1.5)).unwrap().x, iv(2.0, 3.0));
        // A boundary point belongs to both neighbours.
        assert_eq!(tube.eval(Interval::point(2.0)).unwrap().x, iv(2.0, 6.0));
        assert!(matches!(tube.eval(iv(2.5, 3.5)), Err(Error::Domain { .. })));
    }

    #[test]
    fn integral_examples() {
        let tube = constant_tube(iv(1.0, 2.0), iv(0.0, 0.0), 0.0, 4.0, 4);
        let r = tube.integral_bounded(Interval::point(0.0), Interval::point(3.0)).unwrap();
        assert_eq!(r.x, iv(3.0, 6.0));
        let r = tube.integral_bounded(iv(0.0, 1.0), iv(2.0, 3.0)).unwrap();
        assert_eq!(r.x, iv(1.0, 6.0));
        let r = tube.integral_bounded(Interval::point(1.7), Interval::point(1.7)).unwrap();
        assert_eq!(r, Box2::point(0.0, 0.0));
        assert!(tube.integral_bounded(iv(-1.0, 0.0), iv(1.0, 2.0)).is_err());
    }

    #[test]
    fn primitive_differences_match_slice_bounds() {
        let s = samples(&[
            (0.0, [1.0, -0.5], 0.1),
            (0.7, [0.2, 0.5], 0.1),
            (1.9, [-0.4, 1.5], 0.2),
            (3.0, [0.3, 0.0], 0.1),
        ]);
        let tube = build_tube(&s, 0.4, 2.0).unwrap();
        let nodes = tube.primitive();
        for (k, slice) in tube.slices().enumerate() {
            let w = slice.t.hi() - slice.t.lo();
            let dl = nodes[k + 1].lower[0].mid() - nodes[k].lower[0].mid();
            let du = nodes[k + 1].upper[1].mid() - nodes[k].upper[1].mid();
            assert!((dl - w * slice.v.x.lo()).abs() < 1e-12);
            assert!((du - w * slice.v.y.hi()).abs() < 1e-12);
        }
    }

    /// A random tube together with a continuous piecewise-linear selection
    /// that stays inside it.
    fn random_tube_and_selection(rng: &mut ChaCha8Rng) -> (VelocityTube, Vec<(f64, [f64; 2])>) {
        let n = rng.gen_range(3..40);
        let t0 = rng.gen_range(-50.0..50.0);
        let mut ts = vec![t0];
        for _ in 0..n {
            let last = *ts.last().unwrap();
            ts.push(last + rng.gen_range(0.05..2.0));
        }
        let pts: Vec<VelocitySample> = ts
            .iter()
            .map(|&t| VelocitySample {
                t,
                v: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                sigma: rng.gen_range(0.0..0.3),
            })
            .collect();
        let s = VelocitySamples::new(pts).unwrap();
        let width = rng.gen_range(0.1..3.0);
        let tube = build_tube(&s, width, 2.0).unwrap();
        let slices: Vec<Slice> = tube.slices().collect();
        let mut knots = Vec::new();
        for (k, sl) in slices.iter().enumerate() {
            // Value at the slice start lies in both neighbouring boxes.
            let start_box = if k == 0 { sl.v } else { sl.v.intersect(&slices[k - 1].v) };
            let pick = |rng: &mut ChaCha8Rng, b: &Box2| {
                [rng.gen_range(b.x.lo()..=b.x.hi()), rng.gen_range(b.y.lo()..=b.y.hi())]
            };
            knots.push((sl.t.lo(), pick(rng, &start_box)));
            for _ in 0..rng.gen_range(0..3) {
                let t = rng.gen_range(sl.t.lo()..sl.t.hi());
                knots.push((t, pick(rng, &sl.v)));
            }
            if k + 1 == slices.len() {
                knots.push((sl.t.hi(), pick(rng, &sl.v)));
            }
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        knots.dedup_by(|a, b| a.0 == b.0);
        (tube, knots)
    }

    fn selection_integral(knots: &[(f64, [f64; 2])], a: f64, b: f64) -> [f64; 2] {
        let value = |t: f64| -> [f64; 2] {
            let i = knots.partition_point(|k| k.0 <= t).clamp(1, knots.len() - 1) - 1;
            let (ta, va) = knots[i];
            let (tb, vb) = knots[i + 1];
            let l = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            [va[0] + (vb[0] - va[0]) * l, va[1] + (vb[1] - va[1]) * l]
        };
        let mut cuts = vec![a];
        cuts.extend(knots.iter().map(|k| k.0).filter(|&t| t > a && t < b));
        cuts.push(b);
        let mut acc = [0.0; 2];
        for w in cuts.windows(2) {
            let (p, q) = (value(w[0]), value(w[1]));
            for c in 0..2 {
                acc[c] += 0.5 * (w[1] - w[0]) * (p[c] + q[c]);
            }
        }
        acc
    }

    #[test]
    fn random_selections_are_enclosed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let (tube, knots) = random_tube_and_selection(&mut rng);
            let (t0, tf) = (tube.t0(), tube.tf());
            for _ in 0..20 {
                let a = rng.gen_range(t0..tf);
                let b = rng.gen_range(a..=tf);
                let exact = selection_integral(&knots, a, b);
                let r = tube.integral_bounded(Interval::point(a), Interval::point(b)).unwrap();
                let slack = 1e-9 * (1.0 + exact[0].abs() + exact[1].abs());
                assert!(r.x.inflate(slack).contains(exact[0]), "{r:?} vs {exact:?}");
                assert!(r.y.inflate(slack).contains(exact[1]), "{r:?} vs {exact:?}");
            }
        }
    }

    #[test]
    fn chasles_at_point_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (tube, _) = random_tube_and_selection(&mut rng);
            let mut ts = [0.0; 3].map(|_| rng.gen_range(tube.t0()..tube.tf()));
            ts.sort_by(f64::total_cmp);
            let p = |t: f64| Interval::point(t);
            let ab = tube.integral_bounded(p(ts[0]), p(ts[1])).unwrap();
            let bc = tube.integral_bounded(p(ts[1]), p(ts[2])).unwrap();
            let ac = tube.integral_bounded(p(ts[0]), p(ts[2])).unwrap();
            let sum = ab + bc;
            let tol = 1e-9 * (1.0 + ac.x.mag() + ac.y.mag());
            assert!((sum.x.lo() - ac.x.lo()).abs() < tol && (sum.x.hi() - ac.x.hi()).abs() < tol);
            assert!((sum.y.lo() - ac.y.lo()).abs() < tol && (sum.y.hi() - ac.y.hi()).abs() < tol);
        }
    }

    proptest! {
        #[test]
        fn sigma_monotone(seed in 0u64..500, extra in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<VelocitySample> = (0..12).map(|i| VelocitySample {
                t: i as f64 * 0.7,
                v: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                sigma: rng.gen_range(0.0..0.2),
            }).collect();
            let wider: Vec<VelocitySample> = pts.iter().map(|s| VelocitySample { sigma: s.sigma + extra, ..*s }).collect();
            let a = build_tube(&VelocitySamples::new(pts).unwrap(), 1.3, 2.0).unwrap();
            let b = build_tube(&VelocitySamples::new(wider).unwrap(), 1.3, 2.0).unwrap();
            for (sa, sb) in a.slices().zip(b.slices()) {
                prop_assert!(sa.v.is_subset(&sb.v));
            }
            let t1 = Interval::new(0.5, 2.0);
            let t2 = Interval::new(4.0, 6.5);
            prop_assert!(a.integral_bounded(t1, t2).unwrap().is_subset(&b.integral_bounded(t1, t2).unwrap()));
        }
    }
}
