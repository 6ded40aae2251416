use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use loopdeg::degree::DEFAULT_MAX_DEPTH;
use loopdeg::mission::export::{export_results, write_json, ExportOptions};
use loopdeg::mission::io::{load_measurements, write_world_csv, Format};
use loopdeg::mission::synth::{synthesize_mission, MissionKind, SynthParams};
use loopdeg::pipeline::{detect, DetectionConfig};
use loopdeg::selftest::run_selftest;
use loopdeg::tube::DEFAULT_SIGMA_MULTIPLIER;
use loopdeg::uniqueness::DEFAULT_MAX_BISECT;
use loopdeg::Error;

#[derive(Parser)]
#[command(name = "loopdeg", version, about = "Guaranteed loop-closure detection for planar robot trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    WorldCsv,
    BodyCsv,
}

#[derive(Subcommand)]
enum Command {
    /// Detect loops in a measurement file and try to prove them.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "world-csv")]
        format: FormatArg,
        /// Velocity standard deviation (m/s), used when the file has no sigma column.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SIGMA_MULTIPLIER)]
        sigma_multiplier: f64,
        /// Tube slice width (s); defaults to ten median sample spacings.
        #[arg(long)]
        slice_width: Option<f64>,
        /// SIVIA precision (s); defaults to duration / 500.
        #[arg(long)]
        eps: Option<f64>,
        /// Diagonal margin for partial detections (s); defaults to eps.
        #[arg(long)]
        delta_diag: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: u32,
        #[arg(long, default_value_t = DEFAULT_MAX_BISECT)]
        max_bisect: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write tplane.svg and trajectory.svg.
        #[arg(long)]
        svg: bool,
        /// Include timings in results.json.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a synthetic mission: measurements.csv and truth.json.
    Synth {
        #[arg(value_parser = parse_kind)]
        kind: MissionKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noise sigma relative to the mean speed.
        #[arg(long)]
        sigma_rel: Option<f64>,
        /// Sampling rate (Hz).
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        rows: Option<usize>,
        /// Closest approach of the near-miss mission (m).
        #[arg(long)]
        gap: Option<f64>,
        /// Plain Gaussian noise, not truncated at two sigma.
        #[arg(long)]
        untruncated: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare the degree computation with a winding-number oracle on random cases.
    DegreeSelftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: u32,
    },
}

fn parse_kind(s: &str) -> Result<MissionKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failures reported with an exit code.
enum Failure {
    Error(Error),
    Selftest(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Detect {
            input,
            format,
            sigma,
            sigma_multiplier,
            slice_width,
            eps,
            delta_diag,
            max_depth,
            max_bisect,
            out,
            jobs,
            svg,
            timing,
        } => {
            let start = Instant::now();
            let format = match format {
                FormatArg::WorldCsv => Format::WorldCsv,
                FormatArg::BodyCsv => Format::BodyCsv,
            };
            let samples = load_measurements(&input, format, sigma).map_err(|e| e.in_stage("load"))?;
            info!("loaded {} samples from {}", samples.len(), input.display());
            let cfg = DetectionConfig {
                eps,
                slice_width,
                sigma_multiplier,
                delta_diag,
                max_depth,
                max_bisect,
                jobs,
            };
            let result = detect(&samples, &cfg)?;
            let files = export_results(&result, &out, ExportOptions { svg, timing }).map_err(|e| e.in_stage("export"))?;
            for f in &files {
                info!("wrote {}", f.display());
            }
            let s = result.summary();
            println!("{:>10} {:>7} {:>13} {:>8} {:>12}", "subpavings", "proven", "inconclusive", "partial", "wall time");
            println!(
                "{:>10} {:>7} {:>13} {:>8} {:>10.3} s",
                s.subpavings,
                s.proven,
                s.inconclusive,
                s.partial,
                start.elapsed().as_secs_f64()
            );
            println!("{} subpavings", s.subpavings);
            for d in result.detections.iter().filter(|d| d.existence.is_some()) {
                let h = d.subpaving.hull();
                println!(
                    "  #{:<4} t1 [{:.3}, {:.3}]  t2 [{:.3}, {:.3}]  {:?}  degree {}  loops {}",
                    d.id,
                    h.x.lo(),
                    h.x.hi(),
                    h.y.lo(),
                    h.y.hi(),
                    d.verdict(),
                    d.degree().map_or("-".into(), |x| x.to_string()),
                    d.loops.map_or("-".into(), |x| x.to_string()),
                );
            }
            Ok(())
        }
        Command::Synth {
            kind,
            seed,
            sigma_rel,
            rate,
            rows,
            gap,
            untruncated,
            out,
        } => {
            let mut params = SynthParams::new(kind);
            params.seed = seed;
            params.untruncated = untruncated;
            params.gap = gap;
            if let Some(s) = sigma_rel {
                params.sigma_rel = s;
            }
            if let Some(r) = rate {
                params.rate = r;
            }
            if let Some(r) = rows {
                params.rows = r;
            }
            let (samples, mission) = synthesize_mission(&params).map_err(|e| e.in_stage("synth"))?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e }.in_stage("export"))?;
            let csv = out.join("measurements.csv");
            let truth = out.join("truth.json");
            write_world_csv(&csv, &samples).map_err(|e| e.in_stage("export"))?;
            write_json(&truth, &mission.truth).map_err(|e| e.in_stage("export"))?;
            println!(
                "{}: {} samples over {:.1} s, {} loop pairs -> {}, {}",
                kind,
                samples.len(),
                mission.truth.duration,
                mission.truth.loops.len(),
                csv.display(),
                truth.display()
            );
            Ok(())
        }
        Command::DegreeSelftest { cases, seed, max_depth } => {
            let r = run_selftest(cases, seed, max_depth)?;
            println!(
                "{} cases ({} with holes, {} nonzero degree): {} agree, {} disagree in {:.3} s",
                r.cases,
                r.with_hole,
                r.nonzero,
                r.cases - r.failures.len(),
                r.failures.len(),
                r.elapsed.as_secs_f64()
            );
            for (k, _, o) in &r.failures {
                println!("  case {k}: degree {:?}, oracle {}, expected {}", o.degree, o.oracle, o.expected);
            }
            if r.failures.is_empty() {
                Ok(())
            } else {
                Err(Failure::Selftest(r.failures.len()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LOOPDEG_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                if !msg.contains(&s.to_string()) {
                    msg.push_str(&format!(": {s}"));
                }
                src = s.source();
            }
            eprintln!("{msg}");
            ExitCode::from(if e.is_invariant_violation() { 3 } else { 2 })
        }
        Err(Failure::Selftest(n)) => {
            eprintln!("error: degree self-test: {n} disagreements");
            ExitCode::from(3)
        }
    }
}
