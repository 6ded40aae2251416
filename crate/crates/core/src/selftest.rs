//! Randomized agreement check between the tag-based degree and a dense
//! winding-number oracle.
//!
//! Cases are edge-connected unions of grid cells (optionally ring-shaped and
//! with some cells split into quarters) paired with fields
//! `f(z) = c * prod g_k(z)`, `z = t1 + i t2`, where each factor is
//! `z - a_k` (winding +1) or its conjugate (winding -1). Zeros are kept away
//! from the boundary, so the expected degree is also known exactly.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contour::get_contour;
use crate::degree::{refine_and_tag, two_d_topo_degree, winding_oracle};
use crate::detector::{BoxStatus, InclusionFunction, Subpaving, TPlaneBox};
use crate::error::Result;
use crate::interval::{Box2, Interval};

const GRID: i32 = 10;
const ZERO_MARGIN: f64 = 0.08;

/// A zero of the field with its local winding (+1 or -1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub at: [f64; 2],
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexProductField {
    pub scale: [f64; 2],
    pub zeros: Vec<Zero>,
}

fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn icmul(a: [Interval; 2], b: [Interval; 2]) -> [Interval; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

impl ComplexProductField {
    pub fn at(&self, p: [f64; 2]) -> [f64; 2] {
        self.zeros.iter().fold(self.scale, |acc, z| {
            let d = [p[0] - z.at[0], p[1] - z.at[1]];
            cmul(acc, if z.winding > 0 { d } else { [d[0], -d[1]] })
        })
    }

    /// Sum of the windings of the zeros lying in the union of `boxes`.
    pub fn expected_degree(&self, boxes: &[TPlaneBox]) -> i64 {
        self.zeros
            .iter()
            .filter(|z| boxes.iter().any(|b| b.as_box().contains(z.at[0], z.at[1])))
            .map(|z| z.winding)
            .sum()
    }
}

impl InclusionFunction for ComplexProductField {
    fn domain(&self) -> Interval {
        Interval::new(-1.0, GRID as f64 + 1.0)
    }

    fn eval(&self, t1: Interval, t2: Interval) -> Result<Box2> {
        let s = [Interval::point(self.scale[0]), Interval::point(self.scale[1])];
        let v = self.zeros.iter().fold(s, |acc, z| {
            let d = [t1 - Interval::point(z.at[0]), t2 - Interval::point(z.at[1])];
            icmul(acc, if z.winding > 0 { d } else { [d[0], -d[1]] })
        });
        Ok(Box2::new(v[0], v[1]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestCase {
    pub subpaving: Subpaving,
    pub field: ComplexProductField,
    pub has_hole: bool,
}

fn neighbours(c: (i32, i32)) -> [(i32, i32); 4] {
    [(c.0 + 1, c.1), (c.0 - 1, c.1), (c.0, c.1 + 1), (c.0, c.1 - 1)]
}

fn inside(c: (i32, i32)) -> bool {
    (0..GRID).contains(&c.0) && (0..GRID).contains(&c.1)
}

/// Grows an edge-connected cell set of `target` cells, optionally around a
/// rectangular hole that is never filled.
fn grow(rng: &mut ChaCha8Rng, target: usize, hole: bool) -> BTreeSet<(i32, i32)> {
    let mut cells = BTreeSet::new();
    let mut forbidden = BTreeSet::new();
    if hole {
        let (w, h) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (x0, y0) = (rng.gen_range(1..GRID - w), rng.gen_range(1..GRID - h));
        for x in x0 - 1..=x0 + w {
            for y in y0 - 1..=y0 + h {
                if (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y) {
                    forbidden.insert((x, y));
                } else {
                    cells.insert((x, y));
                }
            }
        }
    } else {
        cells.insert((rng.gen_range(0..GRID), rng.gen_range(0..GRID)));
    }
    while cells.len() < target {
        let frontier: Vec<(i32, i32)> = cells
            .iter()
            .flat_map(|&c| neighbours(c))
            .filter(|n| inside(*n) && !cells.contains(n) && !forbidden.contains(n))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        match frontier.choose(rng) {
            Some(&n) => {
                cells.insert(n);
            }
            None => break,
        }
    }
    cells
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - s * dx).hypot(p[1] - a[1] - s * dy)
}

fn near_any_edge(p: [f64; 2], boxes: &[TPlaneBox]) -> bool {
    boxes.iter().any(|b| {
        let (x0, x1, y0, y1) = (b.t1.lo(), b.t1.hi(), b.t2.lo(), b.t2.hi());
        let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        (0..4).any(|k| point_segment_distance(p, corners[k], corners[(k + 1) % 4]) < ZERO_MARGIN)
    })
}

/// Draws one random case: 5 to 60 boxes, with or without a hole.
pub fn random_case(rng: &mut ChaCha8Rng) -> SelftestCase {
    let has_hole = rng.gen_bool(0.5);
    let target = rng.gen_range(if has_hole { 8 } else { 5 }..=40);
    let cells = grow(rng, target, has_hole);
    let mut boxes = Vec::new();
    let split_p = if rng.gen_bool(0.5) { 0.25 } else { 0.0 };
    let mut budget = 60usize.saturating_sub(cells.len());
    for &(x, y) in &cells {
        let (x, y) = (x as f64, y as f64);
        if budget >= 3 && rng.gen_bool(split_p) {
            budget -= 3;
            for (dx, dy) in [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)] {
                boxes.push(TPlaneBox::new(
                    Interval::new(x + dx, x + dx + 0.5),
                    Interval::new(y + dy, y + dy + 0.5),
                    BoxStatus::Possible,
                ));
            }
        } else {
            boxes.push(TPlaneBox::new(
                Interval::new(x, x + 1.0),
                Interval::new(y, y + 1.0),
                BoxStatus::Possible,
            ));
        }
    }
    let n_zeros = rng.gen_range(0..=4);
    let mut zeros = Vec::new();
    while zeros.len() < n_zeros {
        let at = [rng.gen_range(-0.5..GRID as f64 + 0.5), rng.gen_range(-0.5..GRID as f64 + 0.5)];
        if near_any_edge(at, &boxes) {
            continue;
        }
        let winding = if rng.gen_bool(0.5) { 1 } else { -1 };
        zeros.push(Zero { at, winding });
    }
    // Bias zeros into the subpaving so that nonzero degrees are common.
    if !zeros.is_empty() && rng.gen_bool(0.7) {
        let b = boxes.choose(rng).expect("non-empty").as_box();
        let at = [b.x.mid() + rng.gen_range(-0.1..0.1) * b.x.width(), b.y.mid() + rng.gen_range(-0.1..0.1) * b.y.width()];
        if !near_any_edge(at, &boxes) {
            zeros[0].at = at;
        }
    }
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = rng.gen_range(0.5..2.0);
    SelftestCase {
        subpaving: Subpaving { boxes, partial: false },
        field: ComplexProductField {
            scale: [r * angle.cos(), r * angle.sin()],
            zeros,
        },
        has_hole,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    /// Tag-based degree, `None` when some edge could not be tagged.
    pub degree: Option<i64>,
    pub oracle: i64,
    pub expected: i64,
}

impl CaseOutcome {
    pub fn agrees(&self) -> bool {
        self.degree == Some(self.oracle) && self.oracle == self.expected
    }
}

pub fn run_case(case: &SelftestCase, max_depth: u32) -> Result<CaseOutcome> {
    let contour = get_contour(&case.subpaving)?;
    let degree = match refine_and_tag(&contour, &case.field, max_depth)? {
        Some(tagged) => Some(two_d_topo_degree(&tagged)?),
        None => None,
    };
    let oracle = winding_oracle(&contour, &|p| case.field.at(p))?;
    Ok(CaseOutcome {
        degree,
        oracle,
        expected: case.field.expected_degree(&case.subpaving.boxes),
    })
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub cases: usize,
    pub with_hole: usize,
    pub nonzero: usize,
    /// Index, case and outcome of every disagreement.
    pub failures: Vec<(usize, SelftestCase, CaseOutcome)>,
    pub elapsed: Duration,
}

/// Runs `cases` random cases from `seed`.
pub fn run_selftest(cases: usize, seed: u64, max_depth: u32) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport {
        cases,
        with_hole: 0,
        nonzero: 0,
        failures: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for k in 0..cases {
        let case = random_case(&mut rng);
        let outcome = run_case(&case, max_depth)?;
        report.with_hole += case.has_hole as usize;
        report.nonzero += (outcome.expected != 0) as usize;
        if !outcome.agrees() {
            report.failures.push((k, case, outcome));
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}
