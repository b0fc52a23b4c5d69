//! File formats: structure files, CSV tables and the JSON zero report.
//!
//! Structure files are line oriented UTF-8; `#` starts a comment:
//!
//! ```text
//! dirac-dfb-structure v1
//! segment length=0.5 mass=1 gain=-4.46 detuning=0
//! segment length=0.5 mass=1 gain=4.46 detuning=0
//! ```

use std::io::Write;

use crate::error::{Error, Result};
use crate::scattering::SpectrumRow;
use crate::spectrum::{SpectrumReport, TraceStep};
use crate::structure::{Segment, StructureSpec};

pub const STRUCTURE_HEADER: &str = "dirac-dfb-structure v1";
pub const SPECTRUM_CSV_HEADER: &str = "EL,abs_t,arg_t,abs_r_left,abs_r_right";
pub const TRACE_CSV_HEADER: &str = "lambdaL,trajectory_id,re_EL,im_EL,entry,kind";
pub const SCAN_CSV_HEADER: &str = "offset,sup_norm";

/// Fixed float formatting: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_structure(text: &str) -> Result<StructureSpec> {
    let mut header_seen = false;
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != STRUCTURE_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header '{STRUCTURE_HEADER}', found '{line}'"),
                });
            }
            header_seen = true;
            continue;
        }
        segments.push(parse_segment_line(line, line_no)?);
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header '{STRUCTURE_HEADER}'"),
        });
    }
    if segments.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no segments".into(),
        });
    }
    StructureSpec::new(segments).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })
}

fn parse_segment_line(line: &str, line_no: usize) -> Result<Segment> {
    let err = |message: String| Error::Parse { line: line_no, message };
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some("segment") => {}
        Some(other) => return Err(err(format!("expected 'segment', found '{other}'"))),
        None => return Err(err("empty line".into())),
    }
    let mut values: [Option<f64>; 4] = [None; 4];
    const KEYS: [&str; 4] = ["length", "mass", "gain", "detuning"];
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, found '{tok}'")))?;
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| err(format!("unknown field '{key}'")))?;
        if values[slot].is_some() {
            return Err(err(format!("duplicate field '{key}'")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| err(format!("invalid number '{value}' for '{key}'")))?;
        values[slot] = Some(v);
    }
    let get = |i: usize| values[i].ok_or_else(|| err(format!("missing field '{}'", KEYS[i])));
    Segment::new(get(0)?, get(1)?, get(2)?, get(3)?).map_err(|e| err(e.to_string()))
}

pub fn format_structure(spec: &StructureSpec) -> String {
    let mut out = String::from(STRUCTURE_HEADER);
    out.push('\n');
    for s in spec.segments() {
        out.push_str(&format!(
            "segment length={} mass={} gain={} detuning={}\n",
            fmt_f64(s.length),
            fmt_f64(s.mass),
            fmt_f64(s.gain),
            fmt_f64(s.detuning)
        ));
    }
    out
}

pub fn write_spectrum_csv(w: &mut impl Write, rows: &[SpectrumRow]) -> std::io::Result<()> {
    writeln!(w, "{SPECTRUM_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.el),
            fmt_f64(r.abs_t),
            fmt_f64(r.arg_t),
            fmt_f64(r.abs_r_left),
            fmt_f64(r.abs_r_right)
        )?;
    }
    Ok(())
}

/// JSON array of `{re_EL, im_EL, entry, kind, subtype, residual}`; energies
/// are multiplied by `length` to give `E L`.
pub fn write_report_json(w: &mut impl Write, report: &SpectrumReport, length: f64) -> std::io::Result<()> {
    writeln!(w, "[")?;
    for (i, p) in report.points.iter().enumerate() {
        let subtype = p
            .singularity_subtype
            .map_or_else(|| "null".to_string(), |s| format!("\"{}\"", s.name()));
        let sep = if i + 1 == report.points.len() { "" } else { "," };
        let m21 = p.m21.map_or_else(String::new, |z| {
            format!(", \"m21_re\": {}, \"m21_im\": {}", json_num(z.re), json_num(z.im))
        });
        writeln!(
            w,
            "  {{\"re_EL\": {}, \"im_EL\": {}, \"entry\": \"{}\", \"kind\": \"{}\", \"subtype\": {}, \"residual\": {}{m21}}}{sep}",
            json_num(p.energy.re * length),
            json_num(p.energy.im * length),
            p.which_entry,
            p.kind,
            subtype,
            json_num(p.residual),
        )?;
    }
    writeln!(w, "]")
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".into()
    }
}

pub fn write_trace_csv(w: &mut impl Write, steps: &[TraceStep], length: f64) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for step in steps {
        for (p, link) in step.report.points.iter().zip(&step.links) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(step.lambda_l),
                link.trajectory_id,
                fmt_f64(p.energy.re * length),
                fmt_f64(p.energy.im * length),
                p.which_entry,
                p.kind
            )?;
        }
    }
    Ok(())
}

pub fn write_scan_csv(w: &mut impl Write, rows: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "{SCAN_CSV_HEADER}")?;
    for (offset, sup) in rows {
        writeln!(w, "{},{}", fmt_f64(*offset), fmt_f64(*sup))?;
    }
    Ok(())
}
