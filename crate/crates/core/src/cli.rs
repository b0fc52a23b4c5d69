//! Command-line front end.
//!
//! Exit codes: 0 success, 1 malformed arguments or I/O, 2 structure-file parse
//! error, 3 numerical non-convergence, 4 `check` found a failed invariant.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::green::{green_eval, resolvent_bound_scan, ScanSide};
use crate::io::{fmt_f64, write_report_json, write_scan_csv, write_spectrum_csv, write_trace_csv};
use crate::ode::ode_oracle_matrix;
use crate::scattering::{pt_check, scattering_coefficients, transmission_scan};
use crate::spectrum::{classify_spectrum_with, threshold_lambda_c, trace_zeros, ClassifyOptions, EntrySelection};
use crate::structure::{StructureFamily, StructureSpec};
use crate::transfer::structure_matrix;
use crate::zeros::{SearchOptions, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "dirac-dfb",
    version,
    about = "Spectral analysis of non-Hermitian Dirac / DFB structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct StructureArgs {
    /// Structure file (`dirac-dfb-structure v1`).
    #[arg(long, conflicts_with = "family")]
    structure: Option<PathBuf>,
    /// Built-in family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long = "m0L", default_value_t = 1.0, allow_negative_numbers = true)]
    m0_l: f64,
    #[arg(long = "lambdaL", default_value_t = 0.0, allow_negative_numbers = true)]
    lambda_l: f64,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    UniformGain,
    UniformLoss,
    PtPair,
}

impl From<FamilyArg> for StructureFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::UniformGain => StructureFamily::UniformGain,
            FamilyArg::UniformLoss => StructureFamily::UniformLoss,
            FamilyArg::PtPair => StructureFamily::PtPair,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EntryArg {
    M11,
    M22,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Above,
    Below,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Real-axis transmission/reflection table (CSV).
    Spectrum {
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(long, allow_negative_numbers = true)]
        emin: f64,
        #[arg(long, allow_negative_numbers = true)]
        emax: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classified zeros of M11/M22 (JSON).
    Zeros {
        #[command(flatten)]
        structure: StructureArgs,
        /// re_min,re_max,im_min,im_max in E L units.
        #[arg(long, default_value = "-20,20,-10,10", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = EntryArg::Both)]
        entry: EntryArg,
        #[arg(long = "real-axis-tol", default_value_t = 1e-6)]
        real_axis_tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical gain lambda_c L of a built-in family.
    Threshold {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long = "m0L", default_value_t = 1.0)]
        m0_l: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value = "-20,20,-10,10", allow_hyphen_values = true)]
        window: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Zero trajectories over a lambda L grid (CSV).
    Trace {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long = "m0L", default_value_t = 1.0)]
        m0_l: f64,
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
        #[arg(long, default_value = "-20,20,-10,10", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Green kernel at one energy and/or its growth next to a real energy.
    Green {
        #[command(flatten)]
        structure: StructureArgs,
        /// re,im in E L units.
        #[arg(long = "E", allow_hyphen_values = true)]
        energy: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        y: f64,
        /// Real E0 L next to which the kernel norm is scanned.
        #[arg(long = "scan-singularity", allow_negative_numbers = true)]
        scan_singularity: Option<f64>,
        #[arg(long, value_enum, default_value_t = SideArg::Above)]
        side: SideArg,
        #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4")]
        offsets: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Invariant self-check of a structure.
    Check {
        #[command(flatten)]
        structure: StructureArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Where the structure of a run comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum StructureSource {
    File(PathBuf),
    Family {
        family: StructureFamily,
        m0_l: f64,
        lambda_l: f64,
    },
}

/// Effective configuration of one invocation, echoed as the output header.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub structure_source: Option<StructureSource>,
    pub window: Option<Window>,
    pub tolerances: Vec<(&'static str, f64)>,
    pub extra: Vec<(&'static str, String)>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn new(subcommand: &'static str, output: Option<PathBuf>) -> Self {
        Self {
            subcommand,
            structure_source: None,
            window: None,
            tolerances: Vec::new(),
            extra: Vec::new(),
            output,
        }
    }

    /// One-line `#` header with tool version and every effective setting.
    pub fn header(&self) -> String {
        let mut parts = vec![format!("# dirac-dfb {} {}", env!("CARGO_PKG_VERSION"), self.subcommand)];
        match &self.structure_source {
            Some(StructureSource::File(p)) => parts.push(format!("structure={}", p.display())),
            Some(StructureSource::Family { family, m0_l, lambda_l }) => {
                parts.push(format!("family={family}"));
                parts.push(format!("m0L={}", fmt_f64(*m0_l)));
                parts.push(format!("lambdaL={}", fmt_f64(*lambda_l)));
            }
            None => {}
        }
        if let Some(w) = &self.window {
            parts.push(format!(
                "window={},{},{},{}",
                fmt_f64(w.re_min),
                fmt_f64(w.re_max),
                fmt_f64(w.im_min),
                fmt_f64(w.im_max)
            ));
        }
        for (k, v) in &self.tolerances {
            parts.push(format!("{k}={}", fmt_f64(*v)));
        }
        for (k, v) in &self.extra {
            parts.push(format!("{k}={v}"));
        }
        parts.join(" ")
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::NonConvergence(_)
        | Error::EscapingZero { .. }
        | Error::ThresholdNotFound { .. }
        | Error::SpectralSingularityHit { .. }
        | Error::PoleProximity { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid number '{t}' in {what}")))
        })
        .collect()
}

fn parse_window(s: &str) -> Result<Window, Error> {
    let v = parse_list(s, "--window")?;
    if v.len() != 4 {
        return Err(usage("--window needs four values re_min,re_max,im_min,im_max"));
    }
    Window::new(v[0], v[1], v[2], v[3])
}

fn resolve_structure(args: &StructureArgs, cfg: &mut RunConfig) -> Result<StructureSpec, Error> {
    match (&args.structure, args.family) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            cfg.structure_source = Some(StructureSource::File(path.clone()));
            crate::io::parse_structure(&text)
        }
        (None, Some(family)) => {
            let family = StructureFamily::from(family);
            cfg.structure_source = Some(StructureSource::Family {
                family,
                m0_l: args.m0_l,
                lambda_l: args.lambda_l,
            });
            family.build(args.m0_l, args.lambda_l)
        }
        (None, None) => Err(usage("one of --structure or --family is required")),
        (Some(_), Some(_)) => Err(usage("--structure and --family are mutually exclusive")),
    }
}

fn emit(cfg: &RunConfig, body: &[u8]) -> Result<(), Error> {
    let mut buf = Vec::with_capacity(body.len() + 128);
    writeln!(buf, "{}", cfg.header())?;
    buf.extend_from_slice(body);
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(&buf)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&buf)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Runs the tool on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Spectrum {
            structure,
            emin,
            emax,
            points,
            out,
        } => {
            let mut cfg = RunConfig::new("spectrum", out.out);
            let spec = resolve_structure(&structure, &mut cfg)?;
            cfg.extra.push(("emin", fmt_f64(emin)));
            cfg.extra.push(("emax", fmt_f64(emax)));
            cfg.extra.push(("points", points.to_string()));
            let l = spec.total_length();
            let rows = transmission_scan(&spec, emin / l, emax / l, points)?;
            let mut body = Vec::new();
            write_spectrum_csv(&mut body, &rows)?;
            emit(&cfg, &body)?;
            Ok(EXIT_OK)
        }
        Command::Zeros {
            structure,
            window,
            tol,
            entry,
            real_axis_tol,
            out,
        } => {
            let mut cfg = RunConfig::new("zeros", out.out);
            let spec = resolve_structure(&structure, &mut cfg)?;
            let window = parse_window(&window)?;
            cfg.window = Some(window);
            cfg.tolerances.push(("tol", tol));
            cfg.tolerances.push(("real_axis_tol", real_axis_tol));
            let entries = match entry {
                EntryArg::M11 => EntrySelection::M11,
                EntryArg::M22 => EntrySelection::M22,
                EntryArg::Both => EntrySelection::Both,
            };
            cfg.extra.push(("entry", format!("{entry:?}").to_lowercase()));
            let l = spec.total_length();
            let opts = ClassifyOptions {
                search: SearchOptions::with_tol(tol),
                real_axis_tol: real_axis_tol / l,
                entries,
            };
            let report = classify_spectrum_with(&spec, &window.scaled(1.0 / l), &opts)?;
            for (entry, cell) in &report.unresolved {
                eprintln!(
                    "warning: unresolved {entry} cell [{}, {}] x [{}, {}] with winding {}: {}",
                    cell.window.re_min,
                    cell.window.re_max,
                    cell.window.im_min,
                    cell.window.im_max,
                    cell.winding,
                    cell.reason
                );
            }
            let mut body = Vec::new();
            write_report_json(&mut body, &report, l)?;
            emit(&cfg, &body)?;
            Ok(if report.unresolved.is_empty() {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            })
        }
        Command::Threshold {
            family,
            m0_l,
            tol,
            window,
            out,
        } => {
            let mut cfg = RunConfig::new("threshold", out.out);
            let family = StructureFamily::from(family);
            let window = parse_window(&window)?;
            cfg.extra.push(("family", family.to_string()));
            cfg.extra.push(("m0L", fmt_f64(m0_l)));
            cfg.window = Some(window);
            cfg.tolerances.push(("tol", tol));
            let r = threshold_lambda_c(family, m0_l, &window, tol)?;
            let mut body = Vec::new();
            writeln!(body, "lambda_c_L = {}", fmt_f64(r.lambda_c_l))?;
            writeln!(body, "crossing_entry = {}", r.entry)?;
            for z in &r.crossing_zeros {
                writeln!(body, "crossing_zero_EL = {},{}", fmt_f64(z.re), fmt_f64(z.im))?;
            }
            emit(&cfg, &body)?;
            Ok(EXIT_OK)
        }
        Command::Trace {
            family,
            m0_l,
            lambda_grid,
            window,
            tol,
            out,
        } => {
            let mut cfg = RunConfig::new("trace", out.out);
            let family = StructureFamily::from(family);
            let grid = parse_list(&lambda_grid, "--lambda-grid")?;
            let window = parse_window(&window)?;
            cfg.extra.push(("family", family.to_string()));
            cfg.extra.push(("m0L", fmt_f64(m0_l)));
            cfg.extra.push((
                "lambda_grid",
                grid.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
            ));
            cfg.window = Some(window);
            cfg.tolerances.push(("tol", tol));
            let opts = ClassifyOptions {
                search: SearchOptions::with_tol(tol),
                ..ClassifyOptions::default()
            };
            let steps = trace_zeros(family, m0_l, &grid, &window, &opts)?;
            for step in &steps {
                if step.links.iter().any(|l| l.ambiguous) {
                    eprintln!("warning: ambiguous trajectory matching at lambdaL = {}", step.lambda_l);
                }
            }
            let mut body = Vec::new();
            write_trace_csv(&mut body, &steps, 1.0)?;
            emit(&cfg, &body)?;
            Ok(EXIT_OK)
        }
        Command::Green {
            structure,
            energy,
            x,
            y,
            scan_singularity,
            side,
            offsets,
            out,
        } => {
            let mut cfg = RunConfig::new("green", out.out);
            let spec = resolve_structure(&structure, &mut cfg)?;
            if energy.is_none() && scan_singularity.is_none() {
                return Err(usage("green needs --E and/or --scan-singularity"));
            }
            let l = spec.total_length();
            let mut body = Vec::new();
            if let Some(energy) = &energy {
                let v = parse_list(energy, "--E")?;
                if v.len() != 2 {
                    return Err(usage("--E needs re,im"));
                }
                cfg.extra.push(("E", format!("{},{}", fmt_f64(v[0]), fmt_f64(v[1]))));
                cfg.extra.push(("x", fmt_f64(x)));
                cfg.extra.push(("y", fmt_f64(y)));
                let g = green_eval(&spec, Complex64::new(v[0] / l, v[1] / l), x, y)?;
                writeln!(body, "element,re,im")?;
                for (name, z) in [
                    ("G11", g.matrix[0][0]),
                    ("G12", g.matrix[0][1]),
                    ("G21", g.matrix[1][0]),
                    ("G22", g.matrix[1][1]),
                ] {
                    writeln!(body, "{name},{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
                }
            }
            if let Some(e0) = scan_singularity {
                let offs = parse_list(&offsets, "--offsets")?;
                let side = match side {
                    SideArg::Above => ScanSide::Above,
                    SideArg::Below => ScanSide::Below,
                };
                cfg.extra.push(("scan_singularity", fmt_f64(e0)));
                cfg.extra.push(("side", format!("{side:?}").to_lowercase()));
                cfg.extra.push((
                    "offsets",
                    offs.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
                ));
                let offs_e: Vec<f64> = offs.iter().map(|d| d / l).collect();
                let rows = resolvent_bound_scan(&spec, e0 / l, side, &offs_e)?;
                let rows: Vec<(f64, f64)> = rows.into_iter().map(|(d, s)| (d * l, s)).collect();
                if energy.is_some() {
                    writeln!(body)?;
                }
                write_scan_csv(&mut body, &rows)?;
            }
            emit(&cfg, &body)?;
            Ok(EXIT_OK)
        }
        Command::Check { structure, out } => {
            let mut cfg = RunConfig::new("check", out.out);
            let spec = resolve_structure(&structure, &mut cfg)?;
            let (body, ok) = check_report(&spec)?;
            emit(&cfg, body.as_bytes())?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Thresholds used by `check`.
pub const CHECK_DET_TOL: f64 = 1e-10;
pub const CHECK_UNITARITY_TOL: f64 = 1e-10;
pub const CHECK_PT_TOL: f64 = 1e-10;
pub const CHECK_ORACLE_TOL: f64 = 1e-7;
pub const CHECK_ORACLE_STEPS: usize = 2000;

/// Invariant report over 10 deterministic pseudo-random energies.
pub fn check_report(spec: &StructureSpec) -> Result<(String, bool), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let l = spec.total_length();
    let energies: Vec<Complex64> = (0..10)
        .map(|_| Complex64::new(rng.gen_range(-10.0..10.0) / l, rng.gen_range(-2.0..2.0) / l))
        .collect();
    let mut det_max = 0.0f64;
    let mut oracle_max = 0.0f64;
    for &e in &energies {
        let m = structure_matrix(spec, e);
        det_max = det_max.max(m.det_residual());
        oracle_max = oracle_max.max(m.rel_diff(&ode_oracle_matrix(spec, e, CHECK_ORACLE_STEPS)?));
    }
    let pt = pt_check(spec);
    let mut out = String::new();
    let mut ok = true;
    let mut line = |name: &str, value: String, pass: Option<bool>| -> bool {
        let verdict = match pass {
            Some(true) => " PASS",
            Some(false) => " FAIL",
            None => "",
        };
        out.push_str(&format!("{name} = {value}{verdict}\n"));
        pass != Some(false)
    };
    ok &= line("det_residual_max", fmt_f64(det_max), Some(det_max <= CHECK_DET_TOL));
    line("pt_symmetric", pt.symmetric.to_string(), None);
    if let Some((a, b, reason)) = &pt.violation {
        line("pt_violation", format!("segments {a} and {b}: {reason}"), None);
    }
    if pt.symmetric {
        let mut worst = 0.0f64;
        for &e in &energies {
            let a = structure_matrix(spec, e).to_plain()[0][0];
            let b = structure_matrix(spec, e.conj()).to_plain()[1][1].conj();
            worst = worst.max((a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE));
        }
        ok &= line("pt_conjugation_defect", fmt_f64(worst), Some(worst <= CHECK_PT_TOL));
    }
    if spec.is_hermitian() {
        let mut worst = 0.0f64;
        for &e in &energies {
            if let Ok(c) = scattering_coefficients(spec, e.re) {
                worst = worst.max((c.t.norm_sqr() + c.r_left.norm_sqr() - 1.0).abs());
            }
        }
        ok &= line("unitarity_defect", fmt_f64(worst), Some(worst <= CHECK_UNITARITY_TOL));
    }
    ok &= line(
        "oracle_rel_diff_max",
        fmt_f64(oracle_max),
        Some(oracle_max <= CHECK_ORACLE_TOL),
    );
    out.push_str(&format!("all_pass = {ok}\n"));
    Ok((out, ok))
}
