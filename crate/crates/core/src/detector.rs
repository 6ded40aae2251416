//! Outer approximation of the loop set in the t-plane.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Box2, Interval};
use crate::tube::VelocityTube;

/// An inclusion function for the displacement `f(t1, t2) = p(t2) - p(t1)`.
pub trait InclusionFunction: Sync {
    /// Time domain on which `eval` may be called.
    fn domain(&self) -> Interval;

    fn eval(&self, t1: Interval, t2: Interval) -> Result<Box2>;

    /// Enclosure of the velocity over `t`, when available. Used to discard
    /// boxes that touch the diagonal but hold no loop with `t1 < t2`.
    fn velocity(&self, _t: Interval) -> Result<Option<Box2>> {
        Ok(None)
    }
}

impl InclusionFunction for VelocityTube {
    fn domain(&self) -> Interval {
        VelocityTube::domain(self)
    }

    fn eval(&self, t1: Interval, t2: Interval) -> Result<Box2> {
        self.integral_bounded(t1, t2)
    }

    fn velocity(&self, t: Interval) -> Result<Option<Box2>> {
        VelocityTube::eval(self, t).map(Some)
    }
}

impl<F: InclusionFunction + ?Sized> InclusionFunction for &F {
    fn domain(&self) -> Interval {
        (**self).domain()
    }

    fn eval(&self, t1: Interval, t2: Interval) -> Result<Box2> {
        (**self).eval(t1, t2)
    }

    fn velocity(&self, t: Interval) -> Result<Option<Box2>> {
        (**self).velocity(t)
    }
}

/// `[f](t1, t2)`: enclosure of the displacement between any two times of the box.
pub fn f_inclusion(tube: &VelocityTube, t1: Interval, t2: Interval) -> Result<Box2> {
    tube.integral_bounded(t1, t2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxStatus {
    NoLoop,
    Possible,
    Partial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TPlaneBox {
    pub t1: Interval,
    pub t2: Interval,
    pub status: BoxStatus,
}

impl TPlaneBox {
    pub fn new(t1: Interval, t2: Interval, status: BoxStatus) -> Self {
        TPlaneBox { t1, t2, status }
    }

    /// The full square `t x t`, used as a SIVIA domain.
    pub fn square(t: Interval) -> Self {
        TPlaneBox::new(t, t, BoxStatus::Possible)
    }

    pub fn as_box(&self) -> Box2 {
        Box2::new(self.t1, self.t2)
    }

    /// Canonical order: by lower-left corner, t1 first.
    pub fn canonical_cmp(&self, other: &TPlaneBox) -> std::cmp::Ordering {
        self.t1
            .lo()
            .total_cmp(&other.t1.lo())
            .then(self.t2.lo().total_cmp(&other.t2.lo()))
            .then(self.t1.hi().total_cmp(&other.t1.hi()))
            .then(self.t2.hi().total_cmp(&other.t2.hi()))
    }
}

/// One connected detection set.
#[derive(Clone, Debug, PartialEq)]
pub struct Subpaving {
    pub boxes: Vec<TPlaneBox>,
    pub partial: bool,
}

impl Subpaving {
    pub fn hull(&self) -> Box2 {
        self.boxes
            .iter()
            .fold(Box2::EMPTY, |acc, b| acc.hull(&b.as_box()))
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

const GRID_BITS: u32 = 48;
const GRID_N: u64 = 1 << GRID_BITS;

/// Box on the dyadic grid of the domain; integer corners keep shared faces
/// bit-identical after any sequence of bisections.
#[derive(Clone, Copy, Debug)]
struct Cell {
    i: [u64; 2],
    j: [u64; 2],
}

struct Grid {
    t1: Interval,
    t2: Interval,
}

impl Grid {
    fn coord(axis: &Interval, k: u64) -> f64 {
        if k == 0 {
            axis.lo()
        } else if k == GRID_N {
            axis.hi()
        } else {
            let r = k as f64 / GRID_N as f64;
            (axis.lo() + (axis.hi() - axis.lo()) * r).clamp(axis.lo(), axis.hi())
        }
    }

    fn boxes(&self, c: &Cell) -> (Interval, Interval) {
        (
            Interval::new(Self::coord(&self.t1, c.i[0]), Self::coord(&self.t1, c.i[1])),
            Interval::new(Self::coord(&self.t2, c.j[0]), Self::coord(&self.t2, c.j[1])),
        )
    }
}

enum Outcome {
    Leaf(TPlaneBox),
    Split(Cell, Cell),
}

fn classify<F: InclusionFunction + ?Sized>(f: &F, grid: &Grid, c: Cell, eps: f64) -> Result<Outcome> {
    let (t1, t2) = grid.boxes(&c);
    if t2.hi() < t1.lo() {
        return Ok(Outcome::Leaf(TPlaneBox::new(t1, t2, BoxStatus::NoLoop)));
    }
    if !f.eval(t1, t2)?.contains_zero() {
        return Ok(Outcome::Leaf(TPlaneBox::new(t1, t2, BoxStatus::NoLoop)));
    }
    // A component of constant sign over [t1.lo, t2.hi] makes the
    // displacement strictly monotone there: only t1 = t2 pairs vanish.
    if let Some(v) = f.velocity(Interval::new(t1.lo(), t2.hi()))? {
        if !v.x.contains_zero() || !v.y.contains_zero() {
            return Ok(Outcome::Leaf(TPlaneBox::new(t1, t2, BoxStatus::NoLoop)));
        }
    }
    let (w1, w2) = (t1.hi() - t1.lo(), t2.hi() - t2.lo());
    let possible = Outcome::Leaf(TPlaneBox::new(t1, t2, BoxStatus::Possible));
    if w1.max(w2) <= eps {
        return Ok(possible);
    }
    if w1 >= w2 {
        if c.i[1] - c.i[0] < 2 {
            return Ok(possible);
        }
        let m = c.i[0] + (c.i[1] - c.i[0]) / 2;
        Ok(Outcome::Split(Cell { i: [c.i[0], m], ..c }, Cell { i: [m, c.i[1]], ..c }))
    } else {
        if c.j[1] - c.j[0] < 2 {
            return Ok(possible);
        }
        let m = c.j[0] + (c.j[1] - c.j[0]) / 2;
        Ok(Outcome::Split(Cell { j: [c.j[0], m], ..c }, Cell { j: [m, c.j[1]], ..c }))
    }
}

/// SIVIA over `domain`: returns every leaf (status `no_loop` or `possible`),
/// sorted canonically. The union of possible boxes contains every loop pair
/// `t1 < t2` of any trajectory whose displacement is enclosed by `f`.
pub fn sivia<F: InclusionFunction + ?Sized>(f: &F, domain: &TPlaneBox, eps: f64) -> Result<Vec<TPlaneBox>> {
    sivia_parallel(f, domain, eps, 1)
}

/// [`sivia`] evaluated level by level on a pool of `jobs` threads. The
/// output does not depend on `jobs`.
pub fn sivia_parallel<F: InclusionFunction + ?Sized>(
    f: &F,
    domain: &TPlaneBox,
    eps: f64,
    jobs: usize,
) -> Result<Vec<TPlaneBox>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Param(format!("eps must be positive, got {eps}")));
    }
    let dom = f.domain();
    if !domain.t1.is_subset(&dom) || !domain.t2.is_subset(&dom) {
        return Err(Error::Domain {
            query: format!("{:?}", domain.as_box()),
            t0: dom.lo(),
            tf: dom.hi(),
        });
    }
    let grid = Grid {
        t1: domain.t1,
        t2: domain.t2,
    };
    let mut frontier = vec![Cell {
        i: [0, GRID_N],
        j: [0, GRID_N],
    }];
    let mut leaves = Vec::new();
    let step = |frontier: &[Cell], leaves: &mut Vec<TPlaneBox>, parallel: bool| -> Result<Vec<Cell>> {
        let outcomes: Vec<Result<Outcome>> = if parallel {
            frontier.par_iter().map(|c| classify(f, &grid, *c, eps)).collect()
        } else {
            frontier.iter().map(|c| classify(f, &grid, *c, eps)).collect()
        };
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for o in outcomes {
            match o? {
                Outcome::Leaf(b) => leaves.push(b),
                Outcome::Split(a, b) => {
                    next.push(a);
                    next.push(b);
                }
            }
        }
        Ok(next)
    };
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Param(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| -> Result<()> {
            while !frontier.is_empty() {
                frontier = step(&frontier, &mut leaves, true)?;
            }
            Ok(())
        })?;
    } else {
        while !frontier.is_empty() {
            frontier = step(&frontier, &mut leaves, false)?;
        }
    }
    leaves.sort_by(|a, b| a.canonical_cmp(b));
    Ok(leaves)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

/// Pairs `(i, j)` of boxes sharing a face segment of positive length.
pub(crate) fn adjacent_pairs(boxes: &[Box2]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for axis in 0..2 {
        // Faces orthogonal to `axis`, keyed by their coordinate on that axis.
        let mut lines: HashMap<u64, (Vec<usize>, Vec<usize>)> = HashMap::new();
        for (k, b) in boxes.iter().enumerate() {
            let across = if axis == 0 { b.x } else { b.y };
            lines.entry(across.hi().to_bits()).or_default().0.push(k);
            lines.entry(across.lo().to_bits()).or_default().1.push(k);
        }
        let along = |k: usize| if axis == 0 { boxes[k].y } else { boxes[k].x };
        for (_, (mut before, mut after)) in lines {
            if before.is_empty() || after.is_empty() {
                continue;
            }
            before.sort_by(|&a, &b| along(a).lo().total_cmp(&along(b).lo()));
            after.sort_by(|&a, &b| along(a).lo().total_cmp(&along(b).lo()));
            let (mut p, mut q) = (0, 0);
            while p < before.len() && q < after.len() {
                let (a, b) = (along(before[p]), along(after[q]));
                if a.hi().min(b.hi()) > a.lo().max(b.lo()) {
                    pairs.push((before[p], after[q]));
                }
                if a.hi() <= b.hi() {
                    p += 1;
                } else {
                    q += 1;
                }
            }
        }
    }
    pairs
}

/// Groups the possible (or partial) boxes into edge-connected components.
/// A component is partial when it touches the border of `domain` or comes
/// within `delta_diag` of the diagonal; its boxes are then relabelled
/// `partial`. Components are returned in canonical order.
pub fn cluster(boxes: &[TPlaneBox], domain: &TPlaneBox, delta_diag: f64) -> Vec<Subpaving> {
    let mut kept: Vec<TPlaneBox> = boxes
        .iter()
        .filter(|b| b.status != BoxStatus::NoLoop)
        .copied()
        .collect();
    kept.sort_by(|a, b| a.canonical_cmp(b));
    let plain: Vec<Box2> = kept.iter().map(|b| b.as_box()).collect();
    let mut uf = UnionFind::new(kept.len());
    for (a, b) in adjacent_pairs(&plain) {
        uf.union(a, b);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for k in 0..kept.len() {
        let root = uf.find(k);
        let g = *slot.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(k);
    }
    let touches = |b: &TPlaneBox| {
        b.t1.lo() <= domain.t1.lo()
            || b.t1.hi() >= domain.t1.hi()
            || b.t2.lo() <= domain.t2.lo()
            || b.t2.hi() >= domain.t2.hi()
            || b.t2.lo() - b.t1.hi() <= delta_diag
    };
    groups
        .into_iter()
        .map(|g| {
            let partial = g.iter().any(|&k| touches(&kept[k]));
            let status = if partial { BoxStatus::Partial } else { BoxStatus::Possible };
            Subpaving {
                boxes: g.iter().map(|&k| TPlaneBox { status, ..kept[k] }).collect(),
                partial,
            }
        })
        .collect()
}
