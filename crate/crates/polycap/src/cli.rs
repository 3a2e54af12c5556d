//! Command-line front end.
//!
//! Subcommands: `coeffs` (symbol coefficient tables), `fundsol` (closed-form
//! fundamental solutions and sampled grids), `capacity` (per-mode and
//! aggregate capacities of radial obstacles), `wiener` (dyadic capacity
//! series with classification), `verify` (the invariant suite). All output
//! is deterministic; exit codes are 0 (success), 2 (usage), 3 (invalid
//! input), 4 (computation or I/O failure). `POLYCAP_THREADS` caps the
//! engine's thread pool.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::capacity::{
    cap_inf, cap_inf_sweep, radial_compactum, Annulus, CapacityResult, Discretization, Kind,
    RadialCompactum,
};
use crate::dims::Dims;
use crate::emit;
use crate::fundsol::{eval_fundsol, fundsol};
use crate::symbol::{coeff_table, dirichlet_symbol_table};
use crate::wiener::{classify, wiener_terms, DomainModel};
use crate::Error;

#[derive(Parser)]
#[command(name = "polycap", version, about = "Polyharmonic capacities and Wiener-type series")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Phi,
    Dirichlet,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Phi => Kind::Phi,
            KindArg::Dirichlet => Kind::Dirichlet,
        }
    }
}

#[derive(Args)]
struct DimArgs {
    /// Operator order m of (-Δ)^m.
    #[arg(long)]
    m: u32,
    /// Space dimension n, 2 <= n <= 2m+1.
    #[arg(long)]
    n: u32,
}

impl DimArgs {
    fn dims(&self) -> Result<Dims, Error> {
        Dims::new(self.m, self.n)
    }
}

#[derive(Args)]
struct DiscArgs {
    /// Target element length on the t-axis (default chosen per m).
    #[arg(long)]
    target_h: Option<f64>,
    /// Disable Richardson extrapolation.
    #[arg(long)]
    no_richardson: bool,
}

impl DiscArgs {
    fn disc(&self, m: u32) -> Discretization {
        let mut d = Discretization::for_order(m);
        if let Some(h) = self.target_h {
            d.target_h = h;
        }
        if self.no_richardson {
            d.richardson = false;
        }
        d
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output path, or "-" for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the symbol coefficient table c_kp.
    Coeffs {
        #[command(flatten)]
        dims: DimArgs,
        /// Largest spherical-harmonic degree.
        #[arg(long, default_value_t = 10)]
        pmax: u32,
        /// Which conjugation: the weighted form (phi) or the Dirichlet energy.
        #[arg(long, value_enum, default_value = "phi")]
        kind: KindArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Emit the fundamental solution of the mode-zero operator.
    Fundsol {
        #[command(flatten)]
        dims: DimArgs,
        /// Sample h on a grid "t0:t1:step" (CSV output).
        #[arg(long)]
        emit_grid: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Capacity of a radial obstacle in an annulus.
    Capacity {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long, value_enum, default_value = "dirichlet")]
        kind: KindArg,
        /// Obstacle JSON file: {"shells": [[a1,b1], ...]}.
        #[arg(long)]
        obstacle: String,
        /// Ambient annulus "rin,rout".
        #[arg(long)]
        ambient: String,
        /// Convergence sweep: number of ambient-doubling steps.
        #[arg(long)]
        sweep: Option<u32>,
        #[command(flatten)]
        disc: DiscArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Dyadic capacity series and classification verdict.
    Wiener {
        #[command(flatten)]
        dims: DimArgs,
        /// Domain model JSON file, e.g. {"kind":"sphere","cap_scale":"2^-j^3"}.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        jmin: u32,
        #[arg(long)]
        jmax: u32,
        #[command(flatten)]
        disc: DiscArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the invariant suite; nonzero exit on any failing check.
    Verify {
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Deserialize)]
struct ObstacleFile {
    shells: Vec<(f64, f64)>,
}

fn read_obstacle(path: &str) -> Result<RadialCompactum, Error> {
    let text = std::fs::read_to_string(path)?;
    let file: ObstacleFile = emit::from_json(&text)?;
    radial_compactum(file.shells)
}

fn read_model(path: &str) -> Result<DomainModel, Error> {
    let text = std::fs::read_to_string(path)?;
    emit::from_json(&text)
}

fn parse_ambient(s: &str) -> Result<Annulus, Error> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::validation(format!("ambient must be \"rin,rout\", got {s:?}")))?;
    let rin: f64 = a
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("bad ambient radius {a:?}")))?;
    let rout: f64 = b
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("bad ambient radius {b:?}")))?;
    Annulus::new(rin, rout)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let err = || Error::validation(format!("grid must be \"t0:t1:step\", got {s:?}"));
    if parts.len() != 3 {
        return Err(err());
    }
    let t0: f64 = parts[0].parse().map_err(|_| err())?;
    let t1: f64 = parts[1].parse().map_err(|_| err())?;
    let step: f64 = parts[2].parse().map_err(|_| err())?;
    if !(step > 0.0 && t1 >= t0) {
        return Err(err());
    }
    let count = ((t1 - t0) / step).round() as usize;
    Ok((0..=count).map(|i| t0 + step * i as f64).collect())
}

#[derive(Serialize)]
struct SweepEntry {
    widening: f64,
    result: CapacityResult,
}

#[derive(Serialize)]
struct WienerReport {
    series: crate::wiener::WienerSeries,
    verdict: Option<crate::wiener::Verdict>,
}

fn run(cmd: Cmd) -> Result<i32, Error> {
    match cmd {
        Cmd::Coeffs {
            dims,
            pmax,
            kind,
            out,
        } => {
            let d = dims.dims()?;
            let table = match kind {
                KindArg::Phi => coeff_table(&d, pmax),
                KindArg::Dirichlet => dirichlet_symbol_table(&d, pmax),
            };
            let text = match out.format {
                Format::Json => emit::to_json(&table)?,
                Format::Csv => emit::coeff_table_csv(&table),
            };
            emit::write_output(&out.out, &text)?;
            Ok(0)
        }
        Cmd::Fundsol {
            dims,
            emit_grid,
            out,
        } => {
            let d = dims.dims()?;
            let h = fundsol(&d)?;
            let text = match (&emit_grid, out.format) {
                (Some(spec), _) => {
                    let ts = parse_grid(spec)?;
                    let samples: Result<Vec<(f64, f64)>, Error> = ts
                        .into_iter()
                        .map(|t| eval_fundsol(&h, t, 0).map(|v| (t, v)))
                        .collect();
                    emit::grid_csv(&samples?)
                }
                (None, Format::Json) => emit::to_json(&h)?,
                (None, Format::Csv) => {
                    return Err(Error::validation(
                        "csv output of fundsol requires --emit-grid",
                    ))
                }
            };
            emit::write_output(&out.out, &text)?;
            Ok(0)
        }
        Cmd::Capacity {
            dims,
            kind,
            obstacle,
            ambient,
            sweep,
            disc,
            out,
        } => {
            let d = dims.dims()?;
            let k = read_obstacle(&obstacle)?;
            let amb = parse_ambient(&ambient)?;
            let disc = disc.disc(d.m);
            let text = match sweep {
                Some(steps) => {
                    let entries: Vec<SweepEntry> =
                        cap_inf_sweep(&d, kind.into(), &k, &amb, &disc, steps)?
                            .into_iter()
                            .map(|(widening, result)| SweepEntry { widening, result })
                            .collect();
                    if out.format == Format::Csv {
                        return Err(Error::validation("sweep output is JSON only"));
                    }
                    emit::to_json(&entries)?
                }
                None => {
                    let result = cap_inf(&d, kind.into(), &k, &amb, &disc)?;
                    match out.format {
                        Format::Json => emit::to_json(&result)?,
                        Format::Csv => emit::per_mode_csv(&result),
                    }
                }
            };
            emit::write_output(&out.out, &text)?;
            Ok(0)
        }
        Cmd::Wiener {
            dims,
            model,
            jmin,
            jmax,
            disc,
            out,
        } => {
            let d = dims.dims()?;
            let model = read_model(&model)?;
            let disc = disc.disc(d.m);
            let series = wiener_terms(&d, &model, jmin, jmax, &disc)?;
            let text = match out.format {
                Format::Csv => emit::wiener_csv(&series),
                Format::Json => {
                    let verdict = classify(&series, &model).ok();
                    emit::to_json(&WienerReport { series, verdict })?
                }
            };
            emit::write_output(&out.out, &text)?;
            Ok(0)
        }
        Cmd::Verify { dims, out } => {
            let d = dims.dims()?;
            let report = crate::verify::run_suite(&d)?;
            let text = match out.format {
                Format::Json => emit::to_json(&report)?,
                Format::Csv => {
                    let mut s = String::from("status,name,detail\n");
                    for c in &report.checks {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            if c.passed { "pass" } else { "fail" },
                            c.name,
                            c.detail.replace(',', ";")
                        ));
                    }
                    s
                }
            };
            emit::write_output(&out.out, &text)?;
            if report.passed() {
                Ok(0)
            } else {
                eprintln!(
                    "verification failed: {}",
                    report
                        .failures()
                        .iter()
                        .map(|c| c.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                Ok(4)
            }
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("POLYCAP_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// Parses arguments from the process environment and runs; returns the
/// process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) => 3,
                Error::Computation(_) | Error::Io(_) => 4,
            }
        }
    }
}
