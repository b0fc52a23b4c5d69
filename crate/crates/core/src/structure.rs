//! Piecewise-uniform structures and the built-in families.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One uniform slab of the grating.
///
/// `mass` holds `m = m0 + S` (the normalized grating amplitude), `gain` is the
/// dimensionless absorption `gamma` (negative for gain, positive for loss) and
/// `detuning` is the constant phase slope `theta'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub length: f64,
    pub mass: f64,
    pub gain: f64,
    pub detuning: f64,
}

impl Segment {
    pub fn new(length: f64, mass: f64, gain: f64, detuning: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidSegment(format!(
                "length must be finite and > 0, got {length}"
            )));
        }
        for (name, v) in [("mass", mass), ("gain", gain), ("detuning", detuning)] {
            if !v.is_finite() {
                return Err(Error::InvalidSegment(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self {
            length,
            mass,
            gain,
            detuning,
        })
    }

    /// Complex vector potential `V = theta' - i gamma`.
    pub fn potential(&self) -> Complex64 {
        Complex64::new(self.detuning, -self.gain)
    }

    pub fn is_hermitian(&self) -> bool {
        self.gain == 0.0
    }
}

/// Ordered segments filling `[-L/2, L/2]`, leftmost first.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureSpec {
    segments: Vec<Segment>,
    total_length: f64,
}

impl StructureSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidStructure("at least one segment is required".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            Segment::new(s.length, s.mass, s.gain, s.detuning)
                .map_err(|e| Error::InvalidStructure(format!("segment {i}: {e}")))?;
        }
        let total_length = segments.iter().map(|s| s.length).sum();
        Ok(Self { segments, total_length })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn left_edge(&self) -> f64 {
        -0.5 * self.total_length
    }

    pub fn right_edge(&self) -> f64 {
        0.5 * self.total_length
    }

    /// Interface positions including both outer edges (`len + 1` values).
    pub fn interfaces(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut x = self.left_edge();
        out.push(x);
        for (i, s) in self.segments.iter().enumerate() {
            x = if i + 1 == self.segments.len() {
                self.right_edge()
            } else {
                x + s.length
            };
            out.push(x);
        }
        out
    }

    /// Segment containing `x` (closed on the left, open on the right), or
    /// `None` outside the structure.
    pub fn segment_at(&self, x: f64) -> Option<&Segment> {
        let edges = self.interfaces();
        if x < edges[0] || x >= edges[edges.len() - 1] {
            return None;
        }
        let i = edges.partition_point(|&e| e <= x) - 1;
        self.segments.get(i)
    }

    /// `(m(x), V(x))`; zero outside the structure.
    pub fn profile_at(&self, x: f64) -> (f64, Complex64) {
        match self.segment_at(x) {
            Some(s) => (s.mass, s.potential()),
            None => (0.0, Complex64::new(0.0, 0.0)),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.segments.iter().all(Segment::is_hermitian)
    }

    /// Stable content hash (hex SHA-256 over the segment bit patterns).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.segments {
            for v in [s.length, s.mass, s.gain, s.detuning] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same profile with `mass`, `gain` and `detuning` merged across equal
    /// neighbours.
    pub fn merged(&self, tol: f64) -> StructureSpec {
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            match out.last_mut() {
                Some(last)
                    if (last.mass - s.mass).abs() <= tol
                        && (last.gain - s.gain).abs() <= tol
                        && (last.detuning - s.detuning).abs() <= tol =>
                {
                    last.length += s.length;
                }
                _ => out.push(*s),
            }
        }
        StructureSpec {
            segments: out,
            total_length: self.total_length,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainSign {
    Gain,
    Loss,
}

/// Uniform grating of length 1 with homogeneous gain (`gamma = -lambdaL`) or
/// loss (`gamma = +lambdaL`).
pub fn make_uniform_gain_structure(m0_l: f64, lambda_l: f64, sign: GainSign) -> Result<StructureSpec> {
    check_family_params(m0_l, lambda_l)?;
    let gain = match sign {
        GainSign::Gain => -lambda_l,
        GainSign::Loss => lambda_l,
    };
    StructureSpec::new(vec![Segment::new(1.0, m0_l, gain, 0.0)?])
}

/// Gain half on `-1/2 < x < 0`, equal loss on `0 < x < 1/2`.
pub fn make_pt_pair_structure(m0_l: f64, lambda_l: f64) -> Result<StructureSpec> {
    check_family_params(m0_l, lambda_l)?;
    StructureSpec::new(vec![
        Segment::new(0.5, m0_l, -lambda_l, 0.0)?,
        Segment::new(0.5, m0_l, lambda_l, 0.0)?,
    ])
}

fn check_family_params(m0_l: f64, lambda_l: f64) -> Result<()> {
    if !(m0_l.is_finite() && m0_l >= 0.0) {
        return Err(Error::InvalidArgument(format!("m0L must be >= 0, got {m0_l}")));
    }
    if !(lambda_l.is_finite() && lambda_l >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambdaL must be >= 0, got {lambda_l}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructureFamily {
    UniformGain,
    UniformLoss,
    PtPair,
}

impl StructureFamily {
    pub const ALL: [StructureFamily; 3] = [Self::UniformGain, Self::UniformLoss, Self::PtPair];

    pub fn build(self, m0_l: f64, lambda_l: f64) -> Result<StructureSpec> {
        match self {
            Self::UniformGain => make_uniform_gain_structure(m0_l, lambda_l, GainSign::Gain),
            Self::UniformLoss => make_uniform_gain_structure(m0_l, lambda_l, GainSign::Loss),
            Self::PtPair => make_pt_pair_structure(m0_l, lambda_l),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::UniformGain => "uniform-gain",
            Self::UniformLoss => "uniform-loss",
            Self::PtPair => "pt-pair",
        }
    }
}

impl fmt::Display for StructureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-gain" | "uniform_gain" => Ok(Self::UniformGain),
            "uniform-loss" | "uniform_loss" => Ok(Self::UniformLoss),
            "pt-pair" | "pt_pair" => Ok(Self::PtPair),
            other => Err(Error::InvalidArgument(format!(
                "unknown family '{other}' (expected uniform-gain, uniform-loss or pt-pair)"
            ))),
        }
    }
}
