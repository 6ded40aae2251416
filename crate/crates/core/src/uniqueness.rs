//! Certified loop counts from Jacobian non-singularity.

use crate::degree::{existence_test, DEFAULT_MAX_DEPTH};
use crate::detector::{Subpaving, TPlaneBox};
use crate::error::{Error, Result};
use crate::interval::{det2, Interval};
use crate::tube::VelocityTube;

/// Default number of bisection levels for boxes whose determinant contains zero.
pub const DEFAULT_MAX_BISECT: u32 = 8;

/// Enclosure of the Jacobian of `f(t1, t2) = p(t2) - p(t1)`:
/// `[[-v1(t1), v1(t2)], [-v2(t1), v2(t2)]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalJacobian {
    pub j11: Interval,
    pub j12: Interval,
    pub j21: Interval,
    pub j22: Interval,
}

impl IntervalJacobian {
    pub fn det(&self) -> Interval {
        det2(self.j11, self.j12, self.j21, self.j22)
    }
}

pub fn jacobian_inclusion(tube: &VelocityTube, t: &TPlaneBox) -> Result<IntervalJacobian> {
    let a = tube.eval(t.t1)?;
    let b = tube.eval(t.t2)?;
    Ok(IntervalJacobian {
        j11: -a.x,
        j12: b.x,
        j21: -a.y,
        j22: b.y,
    })
}

fn nonsingular_box(tube: &VelocityTube, t: &TPlaneBox, depth: u32) -> Result<bool> {
    if !jacobian_inclusion(tube, t)?.det().contains_zero() {
        return Ok(true);
    }
    if depth == 0 {
        return Ok(false);
    }
    let (a, b) = if t.t1.width() >= t.t2.width() {
        let (l, r) = t.t1.bisect();
        (TPlaneBox { t1: l, ..*t }, TPlaneBox { t1: r, ..*t })
    } else {
        let (l, r) = t.t2.bisect();
        (TPlaneBox { t2: l, ..*t }, TPlaneBox { t2: r, ..*t })
    };
    Ok(nonsingular_box(tube, &a, depth - 1)? && nonsingular_box(tube, &b, depth - 1)?)
}

/// True when `0 ∉ det [J_f]` on every box of the subpaving, after up to
/// `max_bisect` bisections of the boxes that fail at first.
pub fn jacobian_nonsingular(sp: &Subpaving, tube: &VelocityTube, max_bisect: u32) -> Result<bool> {
    for b in &sp.boxes {
        if !nonsingular_box(tube, b, max_bisect)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact number of loops in the subpaving, or `None` when it cannot be
/// certified. The degree is computed with the default tagging depth.
pub fn loops_number(sp: &Subpaving, tube: &VelocityTube, max_bisect: u32) -> Result<Option<u64>> {
    if sp.partial {
        return Err(Error::BoundaryNotClosed);
    }
    let degree = existence_test(sp, tube, DEFAULT_MAX_DEPTH)?.degree();
    loops_number_with_degree(sp, tube, degree, max_bisect)
}

/// As [`loops_number`], reusing a degree already computed for `sp`
/// (`None` when its boundary could not be tagged).
pub fn loops_number_with_degree(
    sp: &Subpaving,
    tube: &VelocityTube,
    degree: Option<i64>,
    max_bisect: u32,
) -> Result<Option<u64>> {
    if sp.partial {
        return Err(Error::BoundaryNotClosed);
    }
    let Some(d) = degree else {
        return Ok(None);
    };
    if jacobian_nonsingular(sp, tube, max_bisect)? {
        Ok(Some(d.unsigned_abs()))
    } else {
        Ok(None)
    }
}
