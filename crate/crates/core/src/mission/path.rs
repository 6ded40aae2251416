//! Analytic planar trajectories.

use std::f64::consts::{PI, TAU};

/// A smooth trajectory on `[0, duration]`; `velocity` is the exact
/// derivative of `position`.
pub trait Trajectory: Send + Sync {
    fn duration(&self) -> f64;
    fn position(&self, t: f64) -> [f64; 2];
    fn velocity(&self, t: f64) -> [f64; 2];
}

/// Circle of radius `r` at angular speed `omega`, starting at `(r, 0)`.
#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub radius: f64,
    pub omega: f64,
    pub duration: f64,
}

impl Trajectory for Circle {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn position(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.omega * t).sin_cos();
        [self.radius * c, self.radius * s]
    }

    fn velocity(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.omega * t).sin_cos();
        let k = self.radius * self.omega;
        [-k * s, k * c]
    }
}

/// `x = a sin(p theta)`, `y = b sin(q theta)` with `theta = omega t + phase`.
#[derive(Clone, Copy, Debug)]
pub struct Lissajous {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub phase: f64,
    pub duration: f64,
}

impl Trajectory for Lissajous {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn position(&self, t: f64) -> [f64; 2] {
        let th = self.omega * t + self.phase;
        [self.a * (self.p * th).sin(), self.b * (self.q * th).sin()]
    }

    fn velocity(&self, t: f64) -> [f64; 2] {
        let th = self.omega * t + self.phase;
        [
            self.a * self.p * self.omega * (self.p * th).cos(),
            self.b * self.q * self.omega * (self.q * th).cos(),
        ]
    }
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Line { heading: f64 },
    /// Signed curvature: positive turns left.
    Arc { radius: f64, sign: f64 },
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    piece: Piece,
    start: [f64; 2],
    heading: f64,
    length: f64,
}

impl Segment {
    fn at(&self, s: f64) -> ([f64; 2], f64) {
        match self.piece {
            Piece::Line { heading } => {
                let (sn, cs) = heading.sin_cos();
                ([self.start[0] + s * cs, self.start[1] + s * sn], heading)
            }
            Piece::Arc { radius, sign } => {
                let h0 = self.heading;
                let h = h0 + sign * s / radius;
                // Position relative to the start through the chord formula.
                let dx = sign * radius * (h.sin() - h0.sin());
                let dy = -sign * radius * (h.cos() - h0.cos());
                ([self.start[0] + dx, self.start[1] + dy], h)
            }
        }
    }
}

/// Constant-speed path made of straight lines and circular arcs.
#[derive(Clone, Debug)]
pub struct SegmentPath {
    segments: Vec<Segment>,
    /// Arc length at the start of each segment.
    offsets: Vec<f64>,
    speed: f64,
    total: f64,
}

impl SegmentPath {
    pub fn builder(start: [f64; 2], heading: f64, speed: f64) -> PathBuilder {
        PathBuilder {
            pos: start,
            heading,
            speed,
            segments: Vec::new(),
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn length(&self) -> f64 {
        self.total
    }

    fn locate(&self, t: f64) -> ([f64; 2], f64) {
        let s = (t * self.speed).clamp(0.0, self.total);
        let k = self.offsets.partition_point(|&o| o <= s).max(1) - 1;
        self.segments[k].at(s - self.offsets[k])
    }

    /// Times at which segments start (excluding 0).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.offsets[1..].iter().map(|o| o / self.speed).collect()
    }
}

impl Trajectory for SegmentPath {
    fn duration(&self) -> f64 {
        self.total / self.speed
    }

    fn position(&self, t: f64) -> [f64; 2] {
        self.locate(t).0
    }

    fn velocity(&self, t: f64) -> [f64; 2] {
        let (sn, cs) = self.locate(t).1.sin_cos();
        [self.speed * cs, self.speed * sn]
    }
}

pub struct PathBuilder {
    pos: [f64; 2],
    heading: f64,
    speed: f64,
    segments: Vec<Segment>,
}

impl PathBuilder {
    fn push(mut self, piece: Piece, length: f64) -> Self {
        let seg = Segment {
            piece,
            start: self.pos,
            heading: self.heading,
            length,
        };
        let (p, h) = seg.at(length);
        self.pos = p;
        self.heading = h;
        self.segments.push(seg);
        self
    }

    pub fn line(self, length: f64) -> Self {
        let h = self.heading;
        self.push(Piece::Line { heading: h }, length)
    }

    /// Arc of `radius` turning by `angle` radians; positive turns left.
    pub fn arc(self, radius: f64, angle: f64) -> Self {
        self.push(
            Piece::Arc {
                radius,
                sign: angle.signum(),
            },
            radius * angle.abs(),
        )
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn build(self) -> SegmentPath {
        let mut offsets = Vec::with_capacity(self.segments.len());
        let mut acc = 0.0;
        for s in &self.segments {
            offsets.push(acc);
            acc += s.length;
        }
        SegmentPath {
            segments: self.segments,
            offsets,
            speed: self.speed,
            total: acc,
        }
    }
}

/// Angle wrapped to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Mean speed over a dense sampling.
pub fn mean_speed(traj: &dyn Trajectory) -> f64 {
    let n = 10_000;
    let d = traj.duration();
    (0..=n)
        .map(|k| {
            let v = traj.velocity(d * k as f64 / n as f64);
            v[0].hypot(v[1])
        })
        .sum::<f64>()
        / (n + 1) as f64
}
