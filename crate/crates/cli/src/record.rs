//! Configuration records and their JSON / CSV encodings.

use std::io::{self, Write};

use ckc::closure::{verify, ResidualReport};
use ckc::{JointAngles, LinkLengths};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::pipeline::Sample;

/// One closed configuration as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub links: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub joints: Vec<[f64; 3]>,
    pub diagonals: Vec<f64>,
    pub residual: f64,
    pub cases: Vec<String>,
    pub seed: u64,
}

impl Record {
    pub fn from_sample(links: &LinkLengths, s: &Sample) -> Self {
        Record {
            links: links.as_slice().to_vec(),
            alpha: s.closed.angles.alpha().to_vec(),
            beta: s.closed.angles.beta().to_vec(),
            joints: s.closed.joints.iter().map(|p| p.to_array()).collect(),
            diagonals: s.diagonals.as_slice().to_vec(),
            residual: s.closed.residual,
            cases: s.cases.iter().map(|c| c.as_str().to_owned()).collect(),
            seed: s.seed,
        }
    }

    /// Recomputes the closure residual from `links`, `alpha` and `beta`.
    pub fn check(&self) -> CliResult<ResidualReport> {
        let links = LinkLengths::new(self.links.clone())?;
        let angles = JointAngles::new(self.alpha.clone(), self.beta.clone())?;
        Ok(verify(&links, &angles)?)
    }
}

/// Writes floats with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value as f64))
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| CliError::Input(e.to_string()))
}

/// A JSON array with one compact element per line.
pub fn write_json_lines<W: Write + ?Sized, T: Serialize>(
    out: &mut W,
    items: &[T],
) -> CliResult<()> {
    writeln!(out, "[")?;
    for (i, item) in items.iter().enumerate() {
        let sep = if i + 1 < items.len() { "," } else { "" };
        writeln!(out, "{}{sep}", to_json(item)?)?;
    }
    writeln!(out, "]")?;
    Ok(())
}

/// Accepts a single record or an array of records.
pub fn parse_records(text: &str) -> CliResult<Vec<Record>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<Record>),
        One(Box<Record>),
    }
    match serde_json::from_str::<OneOrMany>(text)? {
        OneOrMany::Many(v) => Ok(v),
        OneOrMany::One(r) => Ok(vec![*r]),
    }
}

/// One row per joint: position, angles of the outgoing link, diagonal and
/// solution case. The closing link is the last row.
pub fn write_records_csv<W: Write>(out: W, records: &[Record]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sample", "index", "x", "y", "z", "alpha", "beta", "diagonal", "case",
    ])?;
    for (s, r) in records.iter().enumerate() {
        let n = r.links.len();
        for j in 0..n {
            let p = r.joints.get(j).copied().unwrap_or([f64::NAN; 3]);
            let (alpha, beta) = if j + 1 < n {
                (fmt_f64(r.alpha[j]), fmt_f64(r.beta[j]))
            } else {
                let (a, b) = closing_angles(&p);
                (fmt_f64(a), fmt_f64(b))
            };
            let diag = r.diagonals.get(j).map(|&d| fmt_f64(d)).unwrap_or_default();
            let case = if j >= 1 {
                r.cases.get(j - 1).cloned().unwrap_or_default()
            } else {
                String::new()
            };
            w.write_record([
                s.to_string(),
                (j + 1).to_string(),
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2]),
                alpha,
                beta,
                diag,
                case,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn closing_angles(p: &[f64; 3]) -> (f64, f64) {
    ckc::spherical_angles(-ckc::Point3::from(*p))
}
