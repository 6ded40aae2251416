//! JSON and SVG outputs of a detection run.
//!
//! `tplane.json`: `{t0, tf, boxes: [{t1: [lo, hi], t2: [lo, hi], status}]}`
//! with status one of `no_loop`, `possible`, `partial`.
//!
//! `results.json`: run parameters, a summary and one entry per detection:
//! `{id, t1, t2, boxes, partial, degree, verdict, loops}` where `t1`/`t2`
//! bound the detection hull, `degree` and `loops` may be null and verdict is
//! `proven`, `inconclusive` or `partial`. Timings (milliseconds) appear only
//! when requested, so that outputs are otherwise reproducible byte for byte.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::detector::{BoxStatus, TPlaneBox};
use crate::error::{Error, Result};
use crate::interval::{Box2, Interval};
use crate::pipeline::{PipelineOutput, Summary, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TPlaneFile {
    pub t0: f64,
    pub tf: f64,
    pub boxes: Vec<TPlaneBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub id: usize,
    pub t1: Interval,
    pub t2: Interval,
    pub boxes: usize,
    pub partial: bool,
    pub degree: Option<i64>,
    pub verdict: Verdict,
    pub loops: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub tube_ms: f64,
    pub sivia_ms: f64,
    pub cluster_ms: f64,
    pub proofs_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub t0: f64,
    pub tf: f64,
    pub eps: f64,
    pub slice_width: f64,
    pub delta_diag: f64,
    pub summary: Summary,
    pub detections: Vec<DetectionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<StageTimes>,
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn tplane_file(out: &PipelineOutput) -> TPlaneFile {
    TPlaneFile {
        t0: out.tube.t0(),
        tf: out.tube.tf(),
        boxes: out.leaves.clone(),
    }
}

pub fn results_file(out: &PipelineOutput, timing: bool) -> ResultsFile {
    let detections = out
        .detections
        .iter()
        .map(|d| {
            let h = d.subpaving.hull();
            DetectionEntry {
                id: d.id,
                t1: h.x,
                t2: h.y,
                boxes: d.subpaving.len(),
                partial: d.subpaving.partial,
                degree: d.degree(),
                verdict: d.verdict(),
                loops: d.loops,
                time_ms: timing.then(|| ms(d.elapsed)),
            }
        })
        .collect();
    ResultsFile {
        t0: out.tube.t0(),
        tf: out.tube.tf(),
        eps: out.eps,
        slice_width: out.slice_width,
        delta_diag: out.delta_diag,
        summary: out.summary(),
        detections,
        timing: timing.then(|| StageTimes {
            tube_ms: ms(out.timings.tube),
            sivia_ms: ms(out.timings.sivia),
            cluster_ms: ms(out.timings.cluster),
            proofs_ms: ms(out.timings.proofs),
        }),
    }
}

/// Pretty-printed JSON. Floats use the shortest decimal form that parses
/// back to the same bits.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

pub fn load_tplane(path: &Path) -> Result<TPlaneFile> {
    read_json(path)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExportOptions {
    pub svg: bool,
    pub timing: bool,
}

/// Writes every output file into `dir` (created if needed) and returns
/// their paths.
pub fn export_results(out: &PipelineOutput, dir: &Path, opts: ExportOptions) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let path = dir.join("tplane.json");
    write_json(&path, &tplane_file(out))?;
    written.push(path);
    let path = dir.join("results.json");
    write_json(&path, &results_file(out, opts.timing))?;
    written.push(path);
    if opts.svg {
        let path = dir.join("tplane.svg");
        write_text(&path, &tplane_svg(out))?;
        written.push(path);
        let path = dir.join("trajectory.svg");
        write_text(&path, &trajectory_svg(out)?)?;
        written.push(path);
    }
    Ok(written)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
const PROVEN: &str = "#2ca02c";
const INCONCLUSIVE: &str = "#000000";
const PARTIAL: &str = "#9e9e9e";

/// Maps a world rectangle onto the square canvas, y pointing up.
struct View {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl View {
    fn fit(b: &Box2) -> View {
        let span = b.x.width().max(b.y.width()).max(f64::MIN_POSITIVE);
        View {
            x0: b.x.lo(),
            y1: b.y.hi(),
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.scale, MARGIN + (self.y1 - y) * self.scale)
    }

    fn rect(&self, s: &mut String, b: &Box2, fill: &str, stroke: &str) {
        let (x, y) = self.px(b.x.lo(), b.y.hi());
        let (w, h) = (b.x.width() * self.scale, b.y.width() * self.scale);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{fill}" stroke="{stroke}" stroke-width="0.2"/>"#
        );
    }
}

fn svg_open(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn verdict_color(v: Verdict) -> &'static str {
    match v {
        Verdict::Proven => PROVEN,
        Verdict::Inconclusive => INCONCLUSIVE,
        Verdict::Partial => PARTIAL,
    }
}

/// The t-plane: no_loop boxes outlined, detections filled by verdict.
pub fn tplane_svg(out: &PipelineOutput) -> String {
    let dom = out.tube.domain();
    let view = View::fit(&Box2::new(dom, dom));
    let mut s = String::new();
    svg_open(&mut s);
    for b in out.leaves.iter().filter(|b| b.status == BoxStatus::NoLoop) {
        view.rect(&mut s, &b.as_box(), "none", "#d0d0d0");
    }
    for d in &out.detections {
        let color = verdict_color(d.verdict());
        for b in &d.subpaving.boxes {
            view.rect(&mut s, &b.as_box(), color, color);
        }
    }
    let (a, b) = (view.px(dom.lo(), dom.lo()), view.px(dom.hi(), dom.hi()));
    let _ = writeln!(
        s,
        r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#606060" stroke-dasharray="4 3"/>"##,
        a.0, a.1, b.0, b.1
    );
    s.push_str("</svg>\n");
    s
}

/// Position envelope: the box enclosing `p(t) - p(t0)` at every slice
/// boundary, with the boxes of each detection's time ranges highlighted.
pub fn trajectory_svg(out: &PipelineOutput) -> Result<String> {
    let tube = &out.tube;
    let t0 = Interval::point(tube.t0());
    let times: Vec<f64> = tube.primitive().iter().map(|n| n.t).collect();
    let env = times
        .iter()
        .map(|&t| tube.integral_bounded(t0, Interval::point(t)))
        .collect::<Result<Vec<Box2>>>()?;
    let bbox = env.iter().fold(Box2::EMPTY, |a, b| a.hull(b));
    let view = View::fit(&bbox);
    let mut s = String::new();
    svg_open(&mut s);
    for b in &env {
        view.rect(&mut s, b, "#cfe3f7", "#7fa9d6");
    }
    let mut marked: Vec<Option<Verdict>> = vec![None; env.len()];
    for d in &out.detections {
        let v = d.verdict();
        let h = d.subpaving.hull();
        for (k, &t) in times.iter().enumerate() {
            if h.x.contains(t) || h.y.contains(t) {
                // Proven wins over inconclusive, which wins over partial.
                let rank = |v: Verdict| match v {
                    Verdict::Proven => 2,
                    Verdict::Inconclusive => 1,
                    Verdict::Partial => 0,
                };
                if marked[k].is_none_or(|m| rank(v) > rank(m)) {
                    marked[k] = Some(v);
                }
            }
        }
    }
    for (b, m) in env.iter().zip(&marked) {
        if let Some(v) = m {
            let c = verdict_color(*v);
            view.rect(&mut s, b, "none", c);
        }
    }
    let mut path = String::new();
    for (k, b) in env.iter().enumerate() {
        let (x, y) = view.px(b.x.mid(), b.y.mid());
        let _ = write!(path, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
    }
    let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#1f4e79" stroke-width="1"/>"##, path.trim_end());
    s.push_str("</svg>\n");
    Ok(s)
}
