//! Synthetic missions with known loop closures.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mission::path::{mean_speed, Circle, Lissajous, PathBuilder, SegmentPath, Trajectory};
use crate::tube::{VelocitySample, VelocitySamples};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissionKind {
    Circle,
    FigureEight,
    Lissajous,
    Lawnmower,
    /// Two straight legs crossing at a very small angle.
    Tangent,
    /// A return leg passing close to the outbound leg without crossing it.
    NearMiss,
}

impl MissionKind {
    pub const ALL: [MissionKind; 6] = [
        MissionKind::Circle,
        MissionKind::FigureEight,
        MissionKind::Lissajous,
        MissionKind::Lawnmower,
        MissionKind::Tangent,
        MissionKind::NearMiss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MissionKind::Circle => "circle",
            MissionKind::FigureEight => "figure-eight",
            MissionKind::Lissajous => "lissajous",
            MissionKind::Lawnmower => "lawnmower",
            MissionKind::Tangent => "tangent",
            MissionKind::NearMiss => "near-miss",
        }
    }
}

impl fmt::Display for MissionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MissionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        MissionKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                Error::Param(format!(
                    "unknown mission kind `{s}` (expected one of: {})",
                    MissionKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub kind: MissionKind,
    pub seed: u64,
    /// Noise standard deviation relative to the mean speed.
    pub sigma_rel: f64,
    /// Sampling rate in Hz.
    pub rate: f64,
    /// Number of lawnmower rows.
    pub rows: usize,
    /// Plain Gaussian noise instead of noise truncated at two sigma.
    pub untruncated: bool,
    /// Closest approach for `near-miss` (m); drawn from the seed when unset.
    pub gap: Option<f64>,
}

impl SynthParams {
    pub fn new(kind: MissionKind) -> Self {
        SynthParams {
            kind,
            seed: 0,
            sigma_rel: if kind == MissionKind::NearMiss { 0.001 } else { 0.01 },
            rate: match kind {
                MissionKind::Tangent | MissionKind::NearMiss => 10.0,
                _ => 2.0,
            },
            rows: 5,
            untruncated: false,
            gap: None,
        }
    }
}

/// One loop pair of the true trajectory: `p(t1) = p(t2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopPair {
    pub t1: f64,
    pub t2: f64,
    pub position: [f64; 2],
}

/// Serializable description of the true loops of a mission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: SynthParams,
    pub duration: f64,
    pub mean_speed: f64,
    /// Absolute noise standard deviation (m/s).
    pub sigma: f64,
    /// For missions whose loops form families `(t1, t1 + period)`.
    pub loop_family_period: Option<f64>,
    /// Isolated loop pairs, or a sampling of the family.
    pub loops: Vec<LoopPair>,
}

pub struct SyntheticMission {
    pub truth: GroundTruth,
    pub trajectory: Box<dyn Trajectory>,
}

impl SyntheticMission {
    /// True when `(t1, t2)` is a loop of the mission within `tol` seconds.
    pub fn family_contains(&self, t1: f64, t2: f64, tol: f64) -> bool {
        self.truth
            .loop_family_period
            .is_some_and(|p| ((t2 - t1) / p - ((t2 - t1) / p).round()).abs() * p < tol && t2 > t1)
    }
}

fn figure_eight() -> Lissajous {
    Lissajous {
        a: 100.0,
        b: 50.0,
        p: 1.0,
        q: 2.0,
        omega: TAU / 600.0,
        phase: FRAC_PI_2,
        duration: 600.0,
    }
}

fn lissajous_3_2() -> Lissajous {
    let omega = 1.0 / 300.0;
    Lissajous {
        a: 100.0,
        b: 100.0,
        p: 3.0,
        q: 2.0,
        omega,
        phase: 0.1,
        duration: TAU / omega,
    }
}

/// Rows of length `len` spaced `spacing` apart, joined by turns that
/// first swing 270 degrees away from the next row, crossing the row just
/// flown, then join the next row with a 90 degree arc.
pub fn lawnmower(rows: usize, len: f64, spacing: f64, r_loop: f64, r_join: f64) -> Result<SegmentPath> {
    if rows < 1 || 2.0 * r_loop >= spacing || r_join >= spacing - r_loop || r_loop + r_join >= len - r_loop {
        return Err(Error::Param(format!(
            "invalid lawnmower geometry: rows={rows} len={len} spacing={spacing} r_loop={r_loop} r_join={r_join}"
        )));
    }
    let mut b = SegmentPath::builder([0.0, 0.0], 0.0, 1.0).line(len);
    for k in 1..rows {
        // Heading east on even rows: the far side of the next row is a right turn.
        let side = if k % 2 == 1 { -1.0 } else { 1.0 };
        b = b
            .arc(r_loop, side * 1.5 * PI)
            .line(spacing - r_join + r_loop)
            .arc(r_join, -side * FRAC_PI_2);
        let x = b.position()[0];
        let remaining = if k % 2 == 1 { x } else { len - x };
        b = b.line(remaining);
    }
    Ok(b.build())
}

/// Lead-in from the south-west, outbound leg along `y = 0`, two left
/// U-turns, and the start of a return leg `height` above the outbound leg
/// heading east, tilted down by `angle`.
fn outbound_and_return(leg: f64, u_radius: f64, height: f64, angle: f64) -> PathBuilder {
    let b = SegmentPath::builder([-20.0, -60.0], FRAC_PI_2, 1.0)
        .line(40.0)
        .arc(20.0, -FRAC_PI_2)
        .line(2.0 * leg)
        .arc(u_radius, PI)
        .line(2.0 * leg)
        .arc(u_radius - height / 2.0, PI);
    if angle != 0.0 {
        b.arc(10.0, -angle)
    } else {
        b
    }
}

/// The return leg crosses the outbound leg mid-way at angle `alpha`, then
/// turns away south.
fn tangent_path() -> SegmentPath {
    let (leg, alpha): (f64, f64) = (300.0, 0.002);
    let h = (leg - 10.0 * alpha.sin()) * alpha.tan() + 10.0 * (1.0 - alpha.cos());
    let b = outbound_and_return(leg, 40.0, h, alpha);
    let x = b.position()[0];
    b.line((2.0 * leg - x) / alpha.cos())
        .arc(20.0, -FRAC_PI_2)
        .line(60.0)
        .build()
}

/// The return leg stays above the outbound leg (closest approach `gap`)
/// and ends inside the loop formed by the legs and the U-turns.
fn near_miss_path(rng: &mut ChaCha8Rng, gap: Option<f64>) -> SegmentPath {
    let gap = gap.unwrap_or_else(|| rng.gen_range(0.05..3.0));
    let leg = rng.gen_range(200.0..350.0);
    // Descend by at most half the gap over the whole leg.
    let alpha = rng.gen_range(0.0..0.5) * gap / (2.0 * leg);
    let b = outbound_and_return(leg, 40.0, gap, alpha);
    let x = b.position()[0];
    b.line((2.0 * leg - 60.0 - x) / alpha.cos())
        .arc(20.0, FRAC_PI_2)
        .line(20.0)
        .build()
}

fn trajectory(params: &SynthParams, rng: &mut ChaCha8Rng) -> Result<(Box<dyn Trajectory>, Option<f64>)> {
    Ok(match params.kind {
        MissionKind::Circle => {
            let c = Circle {
                radius: 50.0,
                omega: 1.0 / 50.0,
                duration: 2.0 * TAU * 50.0,
            };
            (Box::new(c), Some(TAU / c.omega))
        }
        MissionKind::FigureEight => (Box::new(figure_eight()), None),
        MissionKind::Lissajous => (Box::new(lissajous_3_2()), None),
        MissionKind::Lawnmower => (Box::new(lawnmower(params.rows, 200.0, 80.0, 30.0, 20.0)?), None),
        MissionKind::Tangent => (Box::new(tangent_path()), None),
        MissionKind::NearMiss => (Box::new(near_miss_path(rng, params.gap)), None),
    })
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Newton iterations on `p(t2) - p(t1) = 0` from a polyline estimate.
fn refine(traj: &dyn Trajectory, t1: f64, t2: f64, reach: f64) -> (f64, f64) {
    let (mut a, mut b) = (t1, t2);
    for _ in 0..30 {
        let f = sub(traj.position(b), traj.position(a));
        let (va, vb) = (traj.velocity(a), traj.velocity(b));
        // J = [-va | vb]
        let det = -va[0] * vb[1] + va[1] * vb[0];
        if det.abs() < 1e-12 {
            return (t1, t2);
        }
        let da = (f[0] * vb[1] - f[1] * vb[0]) / det;
        let db = (-va[0] * f[1] + va[1] * f[0]) / det;
        a -= da;
        b -= db;
        if (a - t1).abs() > reach || (b - t2).abs() > reach {
            return (t1, t2);
        }
        if da.abs() + db.abs() < 1e-13 * (1.0 + b.abs()) {
            break;
        }
    }
    (a, b)
}

/// Self-crossings of the trajectory from a dense polyline with a spatial
/// hash, each refined by Newton. Pairs closer than `min_delay` in time are
/// ignored. A closed trajectory also reports `(0, duration)`.
pub fn find_crossings(traj: &dyn Trajectory, dt: f64, min_delay: f64) -> Vec<LoopPair> {
    let d = traj.duration();
    let n = (d / dt).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).min(d)).collect();
    let pts: Vec<[f64; 2]> = times.iter().map(|&t| traj.position(t)).collect();
    let cell = pts
        .windows(2)
        .map(|w| sub(w[1], w[0]))
        .map(|v| v[0].hypot(v[1]))
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 2.0;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..n {
        let (a, b) = (pts[k], pts[k + 1]);
        let lo = [(a[0].min(b[0]) / cell).floor() as i64, (a[1].min(b[1]) / cell).floor() as i64];
        let hi = [(a[0].max(b[0]) / cell).floor() as i64, (a[1].max(b[1]) / cell).floor() as i64];
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                grid.entry((i, j)).or_default().push(k);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut found: Vec<LoopPair> = Vec::new();
    for bucket in grid.values() {
        for (x, &i) in bucket.iter().enumerate() {
            for &j in &bucket[x + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j <= i + 1 || times[j] - times[i + 1] < min_delay || !seen.insert((i, j)) {
                    continue;
                }
                let (p, r) = (pts[i], sub(pts[i + 1], pts[i]));
                let (q, s) = (pts[j], sub(pts[j + 1], pts[j]));
                let den = cross(r, s);
                if den == 0.0 {
                    continue;
                }
                let u = cross(sub(q, p), s) / den;
                let v = cross(sub(q, p), r) / den;
                if !((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v)) {
                    continue;
                }
                let t1 = times[i] + u * (times[i + 1] - times[i]);
                let t2 = times[j] + v * (times[j + 1] - times[j]);
                let (t1, t2) = refine(traj, t1, t2, 2.0 * dt);
                found.push(LoopPair {
                    t1,
                    t2,
                    position: traj.position(t1),
                });
            }
        }
    }
    let closed = sub(traj.position(d), traj.position(0.0));
    if closed[0].hypot(closed[1]) < 1e-9 {
        found.push(LoopPair {
            t1: 0.0,
            t2: d,
            position: traj.position(0.0),
        });
    }
    found.sort_by(|a, b| a.t1.total_cmp(&b.t1).then(a.t2.total_cmp(&b.t2)));
    found.dedup_by(|a, b| (a.t1 - b.t1).abs() < 1e-6 && (a.t2 - b.t2).abs() < 1e-6);
    found
}

fn noise(rng: &mut ChaCha8Rng, sigma: f64, untruncated: bool) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    loop {
        let x = normal.sample(rng);
        if untruncated || x.abs() <= 2.0 * sigma {
            return x;
        }
    }
}

/// Largest deviation between the velocity and its linear interpolant on
/// `[a, b]`, from a dense sub-sampling.
fn interpolation_error(traj: &dyn Trajectory, a: f64, b: f64) -> f64 {
    const SUB: usize = 16;
    let (va, vb) = (traj.velocity(a), traj.velocity(b));
    (1..SUB)
        .map(|k| {
            let l = k as f64 / SUB as f64;
            let v = traj.velocity(a + (b - a) * l);
            let e0 = (v[0] - (va[0] + (vb[0] - va[0]) * l)).abs();
            let e1 = (v[1] - (va[1] + (vb[1] - va[1]) * l)).abs();
            e0.max(e1)
        })
        .fold(0.0, f64::max)
}

/// Samples the mission velocity with noise. The `sigma` of each sample is
/// the noise sigma plus half a bound on the interpolation error of the
/// adjacent sample intervals, so the two-sigma tube contains the true
/// velocity.
pub fn synthesize_mission(params: &SynthParams) -> Result<(VelocitySamples, SyntheticMission)> {
    if !(params.rate > 0.0 && params.rate.is_finite()) {
        return Err(Error::Param(format!("sample rate must be positive, got {}", params.rate)));
    }
    if !(params.sigma_rel >= 0.0 && params.sigma_rel.is_finite()) {
        return Err(Error::Param(format!("sigma_rel must be non-negative, got {}", params.sigma_rel)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (traj, period) = trajectory(params, &mut rng)?;
    let duration = traj.duration();
    let speed = mean_speed(traj.as_ref());
    let sigma = params.sigma_rel * speed;

    let n = (duration * params.rate + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 / params.rate).collect();
    // The last sample always lands on the end of the trajectory.
    let last = times.len() - 1;
    if duration - times[last] > 1e-6 / params.rate {
        times.push(duration);
    } else {
        times[last] = duration;
    }
    if times.len() < 2 {
        return Err(Error::Param("mission shorter than one sample interval".into()));
    }
    let interp: Vec<f64> = times
        .windows(2)
        .map(|w| 1.25 * interpolation_error(traj.as_ref(), w[0], w[1]) + 1e-9)
        .collect();
    let mut samples = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let v = traj.velocity(t);
        let left = if k > 0 { interp[k - 1] } else { 0.0 };
        let right = interp.get(k).copied().unwrap_or(0.0);
        samples.push(VelocitySample {
            t,
            v: [
                v[0] + noise(&mut rng, sigma, params.untruncated),
                v[1] + noise(&mut rng, sigma, params.untruncated),
            ],
            sigma: sigma + 0.5 * left.max(right),
        });
    }
    let samples = VelocitySamples::new(samples)?;

    let loops = match period {
        Some(p) => (0..=200)
            .map(|k| {
                let t1 = (duration - p) * k as f64 / 200.0;
                LoopPair {
                    t1,
                    t2: t1 + p,
                    position: traj.position(t1),
                }
            })
            .collect(),
        None => find_crossings(traj.as_ref(), 0.25, 1.0),
    };
    let truth = GroundTruth {
        params: params.clone(),
        duration,
        mean_speed: speed,
        sigma,
        loop_family_period: period,
        loops,
    };
    Ok((samples, SyntheticMission { truth, trajectory: traj }))
}
