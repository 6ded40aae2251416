//! CSV measurement files.
//!
//! World frame: `t,vx,vy[,sigma]`. Body frame: `t,vr1,vr2,vr3,phi,theta,psi[,sigma]`,
//! angles in radians. Without a `sigma` column a global sigma must be supplied.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mission::frame::{body_to_world, BodyFrameSample};
use crate::tube::{VelocitySample, VelocitySamples};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    WorldCsv,
    BodyCsv,
}

impl Format {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Format::WorldCsv => &["t", "vx", "vy"],
            Format::BodyCsv => &["t", "vr1", "vr2", "vr3", "phi", "theta", "psi"],
        }
    }
}

pub fn load_measurements(path: &Path, format: Format, global_sigma: Option<f64>) -> Result<VelocitySamples> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_measurements(file, format, global_sigma, &path.display().to_string())
}

/// Parses measurements from any reader; `source` names it in error messages.
pub fn parse_measurements<R: Read>(
    reader: R,
    format: Format,
    global_sigma: Option<f64>,
    source: &str,
) -> Result<VelocitySamples> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.into(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut idx = Vec::new();
    for name in format.columns() {
        idx.push(find(name).ok_or_else(|| parse_err(1, format!("missing column `{name}`")))?);
    }
    let sigma_col = find("sigma");
    if sigma_col.is_none() {
        match global_sigma {
            Some(s) if s >= 0.0 && s.is_finite() => {}
            Some(s) => return Err(Error::Input(format!("invalid sigma {s}"))),
            None => {
                return Err(Error::Input(format!(
                    "{source}: no `sigma` column and no global sigma given"
                )))
            }
        }
    }

    let mut samples: Vec<VelocitySample> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record
                .get(i)
                .ok_or_else(|| parse_err(line, format!("missing value for `{name}`")))?;
            let x: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("`{name}`: cannot parse `{raw}` as a number")))?;
            if !x.is_finite() {
                return Err(parse_err(line, format!("`{name}`: non-finite value `{raw}`")));
            }
            Ok(x)
        };
        let cols = format.columns();
        let vals = idx
            .iter()
            .zip(cols)
            .map(|(&i, name)| field(i, name))
            .collect::<Result<Vec<f64>>>()?;
        let sigma = match sigma_col {
            Some(i) => {
                let s = field(i, "sigma")?;
                if s < 0.0 {
                    return Err(parse_err(line, format!("negative sigma {s}")));
                }
                s
            }
            None => global_sigma.unwrap_or(0.0),
        };
        let (t, v) = match format {
            Format::WorldCsv => (vals[0], [vals[1], vals[2]]),
            Format::BodyCsv => body_to_world(&BodyFrameSample {
                t: vals[0],
                vr: [vals[1], vals[2], vals[3]],
                phi: vals[4],
                theta: vals[5],
                psi: vals[6],
            }),
        };
        if let Some(prev) = samples.last() {
            if t <= prev.t {
                return Err(Error::Input(format!(
                    "{source}:{line}: timestamp {t} does not increase (previous {})",
                    prev.t
                )));
            }
        }
        samples.push(VelocitySample { t, v, sigma });
    }
    VelocitySamples::new(samples)
}

/// Writes world-frame samples with a per-sample sigma column.
pub fn write_world_csv(path: &Path, samples: &VelocitySamples) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["t", "vx", "vy", "sigma"]).map_err(|e| csv_io(path, e))?;
    for s in samples.as_slice() {
        w.write_record([s.t, s.v[0], s.v[1], s.sigma].map(|x| x.to_string()))
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}
