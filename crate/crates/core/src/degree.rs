//! Edge tagging, topological degree and the loop-existence test.

use serde::{Deserialize, Serialize};

use crate::contour::{get_contour, Contour, Cycle, OrientedEdge, Sign, Tag};
use crate::detector::{InclusionFunction, Subpaving};
use crate::error::{Error, Result};
use crate::interval::Box2;

/// Default number of edge bisection levels before giving up on a tag.
pub const DEFAULT_MAX_DEPTH: u32 = 12;

const PLUS_1: Tag = Tag::new(1, Sign::Plus);
const PLUS_2: Tag = Tag::new(2, Sign::Plus);

/// Sign tag of an enclosure: first component with constant sign wins.
pub fn tag_of(value: &Box2) -> Option<Tag> {
    let sign = |x: &crate::interval::Interval| {
        if x.is_positive() {
            Some(Sign::Plus)
        } else if x.is_negative() {
            Some(Sign::Minus)
        } else {
            None
        }
    };
    if value.is_empty() {
        return None;
    }
    sign(&value.x)
        .map(|s| Tag::new(1, s))
        .or_else(|| sign(&value.y).map(|s| Tag::new(2, s)))
}

/// Evaluates `[f]` on the edge and tags it; `None` when both components
/// contain zero.
pub fn tag_edge<F: InclusionFunction + ?Sized>(edge: &OrientedEdge, f: &F) -> Result<Option<Tag>> {
    let b = edge.as_box();
    Ok(tag_of(&f.eval(b.x, b.y)?))
}

fn refine_edge<F: InclusionFunction + ?Sized>(
    edge: &OrientedEdge,
    f: &F,
    depth: u32,
    out: &mut Vec<OrientedEdge>,
) -> Result<bool> {
    if let Some(tag) = tag_edge(edge, f)? {
        out.push(OrientedEdge { tag: Some(tag), ..*edge });
        return Ok(true);
    }
    if depth == 0 {
        return Ok(false);
    }
    let Some((a, b)) = edge.bisect() else {
        return Ok(false);
    };
    Ok(refine_edge(&a, f, depth - 1, out)? && refine_edge(&b, f, depth - 1, out)?)
}

/// Tags every edge, bisecting untaggable ones up to `max_depth` times.
/// Children replace their parent in chain order. Returns `None` if some
/// leaf edge stays untaggable.
pub fn refine_and_tag<F: InclusionFunction + ?Sized>(
    contour: &Contour,
    f: &F,
    max_depth: u32,
) -> Result<Option<Contour>> {
    let mut cycles = Vec::with_capacity(contour.cycles.len());
    for cycle in &contour.cycles {
        let mut edges = Vec::with_capacity(cycle.edges.len());
        for e in &cycle.edges {
            if !refine_edge(e, f, max_depth, &mut edges)? {
                return Ok(None);
            }
        }
        cycles.push(Cycle { edges });
    }
    Ok(Some(Contour { cycles }))
}

fn cycle_degree(cycle: &Cycle, offset: usize) -> Result<i64> {
    let tags = cycle
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| e.tag.ok_or(Error::UntaggedEdge { index: offset + i }))
        .collect::<Result<Vec<Tag>>>()?;
    let p = tags.len();
    let mut d = 0;
    for i in 0..p {
        if tags[i] == PLUS_1 {
            if tags[(i + 1) % p] == PLUS_2 {
                d += 1;
            }
            if tags[(i + p - 1) % p] == PLUS_2 {
                d -= 1;
            }
        }
    }
    Ok(d)
}

/// Degree of a fully tagged contour: each cycle is walked cyclically, a
/// `(1,+)` edge adds one when followed by `(2,+)` and subtracts one when
/// preceded by `(2,+)`. Cycle degrees are summed.
pub fn two_d_topo_degree(contour: &Contour) -> Result<i64> {
    let mut total = 0;
    let mut offset = 0;
    for cycle in &contour.cycles {
        total += cycle_degree(cycle, offset)?;
        offset += cycle.edges.len();
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Existence {
    /// Nonzero degree: every displacement enclosed by `[f]` vanishes in the subpaving.
    Proven { degree: i64 },
    /// Degree zero (`Some(0)`) or the boundary could not be tagged (`None`).
    Inconclusive { degree: Option<i64> },
}

impl Existence {
    pub fn is_proven(&self) -> bool {
        matches!(self, Existence::Proven { .. })
    }

    pub fn degree(&self) -> Option<i64> {
        match *self {
            Existence::Proven { degree } => Some(degree),
            Existence::Inconclusive { degree } => degree,
        }
    }
}

/// Existence test for one detection set.
pub fn existence_test<F: InclusionFunction + ?Sized>(sp: &Subpaving, f: &F, max_depth: u32) -> Result<Existence> {
    let contour = get_contour(sp)?;
    existence_on_contour(&contour, f, max_depth)
}

pub fn existence_on_contour<F: InclusionFunction + ?Sized>(
    contour: &Contour,
    f: &F,
    max_depth: u32,
) -> Result<Existence> {
    match refine_and_tag(contour, f, max_depth)? {
        None => Ok(Existence::Inconclusive { degree: None }),
        Some(tagged) => {
            let degree = two_d_topo_degree(&tagged)?;
            Ok(if degree != 0 {
                Existence::Proven { degree }
            } else {
                Existence::Inconclusive { degree: Some(0) }
            })
        }
    }
}

const ORACLE_MIN_NORM: f64 = 1e-12;
const ORACLE_MAX_STEP: f64 = std::f64::consts::PI / 8.0;

fn oracle_angle(
    field: &dyn Fn([f64; 2]) -> [f64; 2],
    p: [f64; 2],
    q: [f64; 2],
    fp: [f64; 2],
    fq: [f64; 2],
    depth: u32,
) -> Result<f64> {
    let d = (fp[0] * fq[1] - fp[1] * fq[0]).atan2(fp[0] * fq[0] + fp[1] * fq[1]);
    if d.abs() <= ORACLE_MAX_STEP || depth == 0 {
        return Ok(d);
    }
    let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let fm = sample(field, m)?;
    Ok(oracle_angle(field, p, m, fp, fm, depth - 1)? + oracle_angle(field, m, q, fm, fq, depth - 1)?)
}

fn sample(field: &dyn Fn([f64; 2]) -> [f64; 2], p: [f64; 2]) -> Result<[f64; 2]> {
    let v = field(p);
    let norm = v[0].hypot(v[1]);
    if !(norm > ORACLE_MIN_NORM) {
        return Err(Error::OracleNearZero {
            t1: p[0],
            t2: p[1],
            norm,
        });
    }
    Ok(v)
}

/// Winding number of `field` along the contour, from the total angle swept
/// over an adaptive dense sampling. Refuses when a sample is near zero.
pub fn winding_oracle(contour: &Contour, field: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<i64> {
    const BASE: usize = 16;
    let mut total = 0.0;
    for e in contour.edges() {
        let at = |k: usize| {
            let r = k as f64 / BASE as f64;
            [
                e.start[0] + (e.end[0] - e.start[0]) * r,
                e.start[1] + (e.end[1] - e.start[1]) * r,
            ]
        };
        let mut p = e.start;
        let mut fp = sample(field, p)?;
        for k in 1..=BASE {
            let q = if k == BASE { e.end } else { at(k) };
            let fq = sample(field, q)?;
            total += oracle_angle(field, p, q, fp, fq, 40)?;
            p = q;
            fp = fq;
        }
    }
    let turns = total / std::f64::consts::TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(Error::Param(format!("winding oracle did not close: {turns} turns")));
    }
    Ok(rounded as i64)
}
