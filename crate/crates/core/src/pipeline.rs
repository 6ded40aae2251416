//! End-to-end detection: tube, SIVIA, clustering, existence and uniqueness.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{existence_test, Existence, DEFAULT_MAX_DEPTH};
use crate::detector::{cluster, sivia_parallel, BoxStatus, Subpaving, TPlaneBox};
use crate::error::{Error, Result};
use crate::tube::{build_tube, default_slice_width, VelocitySamples, VelocityTube, DEFAULT_SIGMA_MULTIPLIER};
use crate::uniqueness::{loops_number_with_degree, DEFAULT_MAX_BISECT};

/// Tunables of [`detect`]. `None` fields take mission-dependent defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionConfig {
    /// SIVIA precision in seconds; defaults to duration / 500.
    pub eps: Option<f64>,
    /// Defaults to ten median sample spacings.
    pub slice_width: Option<f64>,
    pub sigma_multiplier: f64,
    /// Diagonal margin for partial detections; defaults to `eps`.
    pub delta_diag: Option<f64>,
    pub max_depth: u32,
    pub max_bisect: u32,
    pub jobs: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            eps: None,
            slice_width: None,
            sigma_multiplier: DEFAULT_SIGMA_MULTIPLIER,
            delta_diag: None,
            max_depth: DEFAULT_MAX_DEPTH,
            max_bisect: DEFAULT_MAX_BISECT,
            jobs: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proven,
    Inconclusive,
    Partial,
}

/// One connected detection set with its proofs.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub id: usize,
    pub subpaving: Subpaving,
    /// `None` for partial detections, whose boundary is not closed.
    pub existence: Option<Existence>,
    /// Certified loop count; only computed for proven detections.
    pub loops: Option<u64>,
    pub elapsed: Duration,
}

impl Detection {
    pub fn verdict(&self) -> Verdict {
        match self.existence {
            None => Verdict::Partial,
            Some(e) if e.is_proven() => Verdict::Proven,
            Some(_) => Verdict::Inconclusive,
        }
    }

    pub fn degree(&self) -> Option<i64> {
        self.existence.and_then(|e| e.degree())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub tube: Duration,
    pub sivia: Duration,
    pub cluster: Duration,
    pub proofs: Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub subpavings: usize,
    pub proven: usize,
    pub inconclusive: usize,
    pub partial: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub tube: VelocityTube,
    pub eps: f64,
    pub slice_width: f64,
    pub delta_diag: f64,
    /// All SIVIA leaves; boxes of partial detections carry `partial`.
    pub leaves: Vec<TPlaneBox>,
    pub detections: Vec<Detection>,
    pub timings: Timings,
}

impl PipelineOutput {
    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            subpavings: self.detections.len(),
            ..Summary::default()
        };
        for d in &self.detections {
            match d.verdict() {
                Verdict::Proven => s.proven += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
                Verdict::Partial => s.partial += 1,
            }
        }
        s
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Param(format!("{name} must be positive and finite, got {x}")))
    }
}

fn resolve(samples: &VelocitySamples, cfg: &DetectionConfig) -> Result<(f64, f64, f64)> {
    let duration = samples.duration();
    if !(duration > 0.0) {
        return Err(Error::Input("need at least two samples spanning a positive duration".into()));
    }
    let eps = positive("eps", cfg.eps.unwrap_or(duration / 500.0))?;
    if eps > duration / 10.0 {
        return Err(Error::Param(format!(
            "eps = {eps} exceeds a tenth of the mission duration ({duration})"
        )));
    }
    let slice_width = match cfg.slice_width {
        Some(w) => positive("slice width", w)?,
        None => default_slice_width(samples).ok_or_else(|| Error::Input("cannot infer a slice width".into()))?,
    };
    let delta_diag = cfg.delta_diag.unwrap_or(eps);
    if !(delta_diag >= 0.0 && delta_diag.is_finite()) {
        return Err(Error::Param(format!("delta_diag must be non-negative, got {delta_diag}")));
    }
    if !(cfg.sigma_multiplier >= 0.0 && cfg.sigma_multiplier.is_finite()) {
        return Err(Error::Param(format!(
            "sigma multiplier must be non-negative, got {}",
            cfg.sigma_multiplier
        )));
    }
    if cfg.jobs == 0 {
        return Err(Error::Param("jobs must be at least 1".into()));
    }
    Ok((eps, slice_width, delta_diag))
}

fn prove(sp: &Subpaving, tube: &VelocityTube, cfg: &DetectionConfig) -> Result<(Option<Existence>, Option<u64>)> {
    if sp.partial {
        return Ok((None, None));
    }
    let existence = existence_test(sp, tube, cfg.max_depth).map_err(|e| e.in_stage("degree"))?;
    let loops = if existence.is_proven() {
        loops_number_with_degree(sp, tube, existence.degree(), cfg.max_bisect).map_err(|e| e.in_stage("uniqueness"))?
    } else {
        None
    };
    Ok((Some(existence), loops))
}

/// Runs the whole pipeline on a set of measurements. Output (apart from
/// timings) is independent of `cfg.jobs`.
pub fn detect(samples: &VelocitySamples, cfg: &DetectionConfig) -> Result<PipelineOutput> {
    let (eps, slice_width, delta_diag) = resolve(samples, cfg).map_err(|e| e.in_stage("config"))?;
    let mut timings = Timings::default();

    let clock = Instant::now();
    let tube = build_tube(samples, slice_width, cfg.sigma_multiplier).map_err(|e| e.in_stage("tube"))?;
    timings.tube = clock.elapsed();

    let clock = Instant::now();
    let domain = TPlaneBox::square(tube.domain());
    let mut leaves = sivia_parallel(&tube, &domain, eps, cfg.jobs).map_err(|e| e.in_stage("sivia"))?;
    timings.sivia = clock.elapsed();

    let clock = Instant::now();
    let subpavings = cluster(&leaves, &domain, delta_diag);
    let partial_boxes: std::collections::HashSet<[u64; 4]> = subpavings
        .iter()
        .filter(|s| s.partial)
        .flat_map(|s| s.boxes.iter().map(box_key))
        .collect();
    for b in &mut leaves {
        if partial_boxes.contains(&box_key(b)) {
            b.status = BoxStatus::Partial;
        }
    }
    timings.cluster = clock.elapsed();

    let clock = Instant::now();
    let run = |(id, sp): (usize, Subpaving)| -> Result<Detection> {
        let start = Instant::now();
        let (existence, loops) = prove(&sp, &tube, cfg)?;
        Ok(Detection {
            id,
            subpaving: sp,
            existence,
            loops,
            elapsed: start.elapsed(),
        })
    };
    let detections: Vec<Detection> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Param(format!("cannot start {} worker threads: {e}", cfg.jobs)).in_stage("degree"))?;
        pool.install(|| subpavings.into_par_iter().enumerate().map(run).collect::<Result<_>>())?
    } else {
        subpavings.into_iter().enumerate().map(run).collect::<Result<_>>()?
    };
    timings.proofs = clock.elapsed();
    log::debug!(
        "eps {eps}, slice width {slice_width}, {} leaves, {} detections, {timings:?}",
        leaves.len(),
        detections.len()
    );

    Ok(PipelineOutput {
        tube,
        eps,
        slice_width,
        delta_diag,
        leaves,
        detections,
        timings,
    })
}

fn box_key(b: &TPlaneBox) -> [u64; 4] {
    [b.t1.lo(), b.t1.hi(), b.t2.lo(), b.t2.hi()].map(f64::to_bits)
}
