//! Oriented boundary cycles of a subpaving.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::detector::Subpaving;
use crate::error::{Error, Result};
use crate::interval::{Box2, Interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// `(c, s)`: component `c` (1 or 2) of `[f]` has constant sign `s` on an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub c: u8,
    pub s: Sign,
}

impl Tag {
    pub const fn new(c: u8, s: Sign) -> Self {
        Tag { c, s }
    }
}

/// Axis-aligned boundary segment in the t-plane, `(t1, t2)` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub tag: Option<Tag>,
}

impl OrientedEdge {
    pub fn new(start: [f64; 2], end: [f64; 2]) -> Self {
        OrientedEdge { start, end, tag: None }
    }

    /// The edge as a degenerate t-plane box `t1 x t2`.
    pub fn as_box(&self) -> Box2 {
        Box2::new(
            Interval::spanning(self.start[0], self.end[0]),
            Interval::spanning(self.start[1], self.end[1]),
        )
    }

    pub fn reversed(&self) -> Self {
        OrientedEdge {
            start: self.end,
            end: self.start,
            tag: self.tag,
        }
    }

    /// Splits at the midpoint of the varying coordinate; `None` when the
    /// edge is too short to hold a representable midpoint.
    pub fn bisect(&self) -> Option<(OrientedEdge, OrientedEdge)> {
        let axis = if self.start[0] != self.end[0] { 0 } else { 1 };
        let (a, b) = (self.start[axis], self.end[axis]);
        let m = 0.5 * a + 0.5 * b;
        if m == a || m == b || !m.is_finite() {
            return None;
        }
        let mut mid = self.start;
        mid[axis] = m;
        Some((OrientedEdge::new(self.start, mid), OrientedEdge::new(mid, self.end)))
    }
}

/// A closed chain: the end of each edge is the start of the next, cyclically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub edges: Vec<OrientedEdge>,
}

impl Cycle {
    /// Shoelace area; positive for counter-clockwise cycles.
    pub fn signed_area(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.start[0] * e.end[1] - e.end[0] * e.start[1])
            .sum::<f64>()
            * 0.5
    }

    pub fn is_closed(&self) -> bool {
        !self.edges.is_empty()
            && (0..self.edges.len()).all(|i| self.edges[i].end == self.edges[(i + 1) % self.edges.len()].start)
    }

    pub fn reversed(&self) -> Cycle {
        Cycle {
            edges: self.edges.iter().rev().map(OrientedEdge::reversed).collect(),
        }
    }
}

/// Boundary of a subpaving: outer cycles counter-clockwise, holes clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub cycles: Vec<Cycle>,
}

impl Contour {
    pub fn edge_count(&self) -> usize {
        self.cycles.iter().map(|c| c.edges.len()).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = &OrientedEdge> {
        self.cycles.iter().flat_map(|c| c.edges.iter())
    }

    pub fn reversed(&self) -> Contour {
        Contour {
            cycles: self.cycles.iter().map(Cycle::reversed).collect(),
        }
    }
}

/// Unshared pieces of the box faces lying on one line. `first` faces have
/// the interior on the increasing side of the line, `second` on the
/// decreasing side. Returns `(box, lo, hi, interior_increasing)`.
fn unshared(first: &[(usize, Interval)], second: &[(usize, Interval)]) -> Vec<(usize, f64, f64, bool)> {
    let mut cuts: Vec<f64> = first
        .iter()
        .chain(second)
        .flat_map(|(_, s)| [s.lo(), s.hi()])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let owner = |faces: &[(usize, Interval)], a: f64, b: f64| {
        faces
            .iter()
            .find(|(_, s)| s.lo() <= a && b <= s.hi())
            .map(|(k, _)| *k)
    };
    let mut pieces: Vec<(usize, f64, f64, bool)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = match (owner(first, a, b), owner(second, a, b)) {
            (Some(k), None) => (k, true),
            (None, Some(k)) => (k, false),
            _ => continue,
        };
        match pieces.last_mut() {
            Some(last) if last.0 == piece.0 && last.3 == piece.1 && last.2 == a => last.2 = b,
            _ => pieces.push((piece.0, a, b, piece.1)),
        }
    }
    pieces
}

fn key(p: [f64; 2]) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Turn preference at a vertex: left turn first, then straight, then right.
fn turn_rank(incoming: &OrientedEdge, outgoing: &OrientedEdge) -> u8 {
    let d_in = [incoming.end[0] - incoming.start[0], incoming.end[1] - incoming.start[1]];
    let d_out = [outgoing.end[0] - outgoing.start[0], outgoing.end[1] - outgoing.start[1]];
    let cross = d_in[0] * d_out[1] - d_in[1] * d_out[0];
    if cross > 0.0 {
        0
    } else if cross == 0.0 {
        1
    } else {
        2
    }
}

/// Oriented boundary of a non-partial subpaving.
///
/// Edges are the pieces of box faces not shared with another box of the
/// subpaving, each oriented so that the subpaving lies on its left. They
/// are chained into closed cycles, each starting at its lowest vertex
/// (smallest t2, then smallest t1), with larger signed area first.
pub fn get_contour(sp: &Subpaving) -> Result<Contour> {
    if sp.partial {
        return Err(Error::BoundaryNotClosed);
    }
    if sp.boxes.is_empty() {
        return Err(Error::EmptySubpaving);
    }
    let mut edges: Vec<OrientedEdge> = Vec::new();
    for axis in 0..2 {
        // Lines orthogonal to `axis`; BTreeMap keeps edge generation ordered.
        let mut lines: BTreeMap<u64, (f64, Vec<(usize, Interval)>, Vec<(usize, Interval)>)> = BTreeMap::new();
        for (k, b) in sp.boxes.iter().enumerate() {
            let (across, along) = if axis == 0 { (b.t1, b.t2) } else { (b.t2, b.t1) };
            let lo = lines
                .entry(across.lo().to_bits())
                .or_insert_with(|| (across.lo(), Vec::new(), Vec::new()));
            lo.1.push((k, along));
            let hi = lines
                .entry(across.hi().to_bits())
                .or_insert_with(|| (across.hi(), Vec::new(), Vec::new()));
            hi.2.push((k, along));
        }
        for (_, (c, first, second)) in lines {
            for (_, a, b, interior_increasing) in unshared(&first, &second) {
                let e = match (axis, interior_increasing) {
                    // Vertical line t1 = c, interior to the right: go down.
                    (0, true) => OrientedEdge::new([c, b], [c, a]),
                    (0, false) => OrientedEdge::new([c, a], [c, b]),
                    // Horizontal line t2 = c, interior above: go right.
                    (_, true) => OrientedEdge::new([a, c], [b, c]),
                    (_, false) => OrientedEdge::new([b, c], [a, c]),
                };
                edges.push(e);
            }
        }
    }

    let mut outgoing: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        outgoing.entry(key(e.start)).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (edges[a].start, edges[b].start);
        p[1].total_cmp(&q[1]).then(p[0].total_cmp(&q[0]))
    });
    let mut cycles = Vec::new();
    for &seed in &order {
        if used[seed] {
            continue;
        }
        let mut chain = vec![seed];
        used[seed] = true;
        let origin = key(edges[seed].start);
        let mut cur = seed;
        while key(edges[cur].end) != origin {
            let candidates = outgoing
                .get(&key(edges[cur].end))
                .ok_or(Error::BoundaryNotClosed)?;
            let next = candidates
                .iter()
                .copied()
                .filter(|&i| !used[i])
                .min_by_key(|&i| turn_rank(&edges[cur], &edges[i]))
                .ok_or(Error::BoundaryNotClosed)?;
            used[next] = true;
            chain.push(next);
            cur = next;
        }
        cycles.push(Cycle {
            edges: chain.iter().map(|&i| edges[i]).collect(),
        });
    }
    cycles.sort_by(|a, b| {
        b.signed_area()
            .total_cmp(&a.signed_area())
            .then(a.edges[0].start[1].total_cmp(&b.edges[0].start[1]))
            .then(a.edges[0].start[0].total_cmp(&b.edges[0].start[0]))
    });
    Ok(Contour { cycles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{BoxStatus, TPlaneBox};

    fn sp(cells: &[(f64, f64, f64, f64)]) -> Subpaving {
        Subpaving {
            boxes: cells
                .iter()
                .map(|&(a, b, c, d)| TPlaneBox::new(Interval::new(a, b), Interval::new(c, d), BoxStatus::Possible))
                .collect(),
            partial: false,
        }
    }

    fn ends(c: &Cycle) -> Vec<([f64; 2], [f64; 2])> {
        c.edges.iter().map(|e| (e.start, e.end)).collect()
    }

    #[test]
    fn single_box() {
        let c = get_contour(&sp(&[(0.0, 1.0, 0.0, 1.0)])).unwrap();
        assert_eq!(c.cycles.len(), 1);
        assert_eq!(
            ends(&c.cycles[0]),
            vec![
                ([0.0, 0.0], [1.0, 0.0]),
                ([1.0, 0.0], [1.0, 1.0]),
                ([1.0, 1.0], [0.0, 1.0]),
                ([0.0, 1.0], [0.0, 0.0]),
            ]
        );
        assert_eq!(c.cycles[0].signed_area(), 1.0);
    }

    #[test]
    fn shared_face_removed() {
        let c = get_contour(&sp(&[(0.0, 1.0, 0.0, 1.0), (1.0, 2.0, 0.0, 1.0)])).unwrap();
        assert_eq!(c.cycles.len(), 1);
        assert_eq!(c.cycles[0].edges.len(), 6);
        assert!(c.cycles[0].is_closed());
        assert_eq!(c.cycles[0].signed_area(), 2.0);
        assert!(c.edges().all(|e| !(e.start[0] == 1.0 && e.end[0] == 1.0)));
    }

    #[test]
    fn ring_has_outer_and_hole() {
        let mut cells = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (1, 1) {
                    cells.push((i as f64, i as f64 + 1.0, j as f64, j as f64 + 1.0));
                }
            }
        }
        let c = get_contour(&sp(&cells)).unwrap();
        assert_eq!(c.cycles.len(), 2);
        assert_eq!(c.cycles[0].signed_area(), 9.0);
        assert_eq!(c.cycles[1].signed_area(), -1.0);
        assert_eq!(c.cycles[0].edges.len(), 12);
        assert_eq!(c.cycles[1].edges.len(), 4);
        assert!(c.cycles.iter().all(Cycle::is_closed));
    }

    #[test]
    fn partial_face_sharing() {
        // Big box on the left, two small ones on its right covering part of the face.
        let c = get_contour(&sp(&[
            (0.0, 2.0, 0.0, 2.0),
            (2.0, 3.0, 0.0, 0.5),
            (2.0, 3.0, 0.5, 1.0),
        ]))
        .unwrap();
        assert_eq!(c.cycles.len(), 1);
        let cyc = &c.cycles[0];
        assert!(cyc.is_closed());
        assert_eq!(cyc.signed_area(), 5.0);
        // Leftover of the big box's right face.
        assert!(cyc.edges.iter().any(|e| e.start == [2.0, 1.0] && e.end == [2.0, 2.0]));
    }

    #[test]
    fn pinch_vertex_splits_into_closed_cycles() {
        // L-shaped pair plus a box touching only at a corner, joined through a third box.
        let c = get_contour(&sp(&[
            (0.0, 1.0, 0.0, 1.0),
            (1.0, 2.0, 1.0, 2.0),
            (0.0, 1.0, 1.0, 2.0),
            (1.0, 2.0, -1.0, 0.0),
            (2.0, 3.0, -1.0, 0.0),
            (2.0, 3.0, 0.0, 1.0),
        ]))
        .unwrap();
        assert!(c.cycles.iter().all(Cycle::is_closed));
        let area: f64 = c.cycles.iter().map(Cycle::signed_area).sum();
        assert_eq!(area, 6.0);
    }

    #[test]
    fn errors() {
        let mut s = sp(&[(0.0, 1.0, 0.0, 1.0)]);
        s.partial = true;
        assert!(matches!(get_contour(&s), Err(Error::BoundaryNotClosed)));
        assert!(matches!(get_contour(&sp(&[])), Err(Error::EmptySubpaving)));
    }
}
