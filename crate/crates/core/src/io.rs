//! JSON and CSV formats shared by the command-line tool and the examples.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::central_config::CentralConfigResult;
use crate::error::{invalid, Result};
use crate::harmonics::{SpectrumRow, TrigLoop};
use crate::kronecker::KroneckerHit;
use crate::mechanics::{Configuration, MassVector};
use crate::variational::{FourierLoop, TrajectorySample};

/// `{"masses": [...], "dim": 2, "positions": [[x, y], ...]}`. Positions may
/// be omitted where only the masses matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
}

impl ConfigFile {
    pub fn from_configuration(m: &MassVector, q: &Configuration) -> Self {
        Self {
            masses: m.as_slice().to_vec(),
            dim: Some(q.dim()),
            positions: Some(q.points()),
        }
    }

    pub fn mass_vector(&self) -> Result<MassVector> {
        MassVector::new(self.masses.clone())
    }

    pub fn configuration(&self) -> Result<(MassVector, Configuration)> {
        let m = self.mass_vector()?;
        let points = self
            .positions
            .as_ref()
            .ok_or_else(|| invalid("positions are missing"))?;
        let dim = self
            .dim
            .or_else(|| points.first().map(Vec::len))
            .ok_or_else(|| invalid("cannot infer the dimension"))?;
        let q = Configuration::from_points(dim, points)?;
        if q.len() != m.len() {
            return Err(invalid(format!(
                "{} masses but {} positions",
                m.len(),
                q.len()
            )));
        }
        Ok((m, q))
    }
}

/// Serialized [`CentralConfigResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralFile {
    pub value: f64,
    pub lambda: f64,
    pub residual: f64,
    pub positions: Vec<Vec<f64>>,
    pub starts_used: usize,
    pub masses: Vec<f64>,
    pub dim: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub seed: u64,
}

impl From<&CentralConfigResult> for CentralFile {
    fn from(r: &CentralConfigResult) -> Self {
        Self {
            value: r.value,
            lambda: r.lambda,
            residual: r.residual,
            positions: r.q.points(),
            starts_used: r.starts_used,
            masses: r.masses.as_slice().to_vec(),
            dim: r.q.dim(),
            converged: r.converged,
            grad_norm: r.grad_norm,
            seed: r.seed,
        }
    }
}

/// `{"masses", "dim", "T", "a", "b"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigLoopFile {
    pub masses: Vec<f64>,
    pub dim: usize,
    #[serde(rename = "T")]
    pub period: f64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl From<&TrigLoop> for TrigLoopFile {
    fn from(lp: &TrigLoop) -> Self {
        Self {
            masses: lp.masses().as_slice().to_vec(),
            dim: lp.dim(),
            period: lp.period(),
            a: lp.a().points(),
            b: lp.b().points(),
        }
    }
}

impl TryFrom<TrigLoopFile> for TrigLoop {
    type Error = crate::Error;

    fn try_from(f: TrigLoopFile) -> Result<Self> {
        let m = MassVector::new(f.masses)?;
        let a = Configuration::from_points(f.dim, &f.a)?;
        let b = Configuration::from_points(f.dim, &f.b)?;
        TrigLoop::new(m, f.period, a, b)
    }
}

/// `{"masses", "T", "order", "cos", "sin"}` with `cos[i][h−1] = α_{i,h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLoopFile {
    pub masses: Vec<f64>,
    #[serde(rename = "T")]
    pub period: f64,
    pub order: usize,
    pub cos: Vec<Vec<[f64; 2]>>,
    pub sin: Vec<Vec<[f64; 2]>>,
}

impl From<&FourierLoop> for FourierLoopFile {
    fn from(lp: &FourierLoop) -> Self {
        let table = |f: &dyn Fn(usize, usize) -> [f64; 2]| -> Vec<Vec<[f64; 2]>> {
            (0..lp.len())
                .map(|i| (1..=lp.order()).map(|h| f(i, h)).collect())
                .collect()
        };
        Self {
            masses: lp.masses().as_slice().to_vec(),
            period: lp.period(),
            order: lp.order(),
            cos: table(&|i, h| lp.cos_coefficient(i, h)),
            sin: table(&|i, h| lp.sin_coefficient(i, h)),
        }
    }
}

impl TryFrom<FourierLoopFile> for FourierLoop {
    type Error = crate::Error;

    fn try_from(f: FourierLoopFile) -> Result<Self> {
        let m = MassVector::new(f.masses)?;
        let ok =
            |t: &Vec<Vec<[f64; 2]>>| t.len() == m.len() && t.iter().all(|r| r.len() == f.order);
        if !ok(&f.cos) || !ok(&f.sin) {
            return Err(invalid("coefficient tables must be bodies × order × 2"));
        }
        let flat = |t: Vec<Vec<[f64; 2]>>| t.into_iter().flatten().flatten().collect();
        FourierLoop::new(m, f.period, f.order, flat(f.cos), flat(f.sin))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn csv_error(e: impl std::fmt::Display) -> crate::Error {
    invalid(format!("writing CSV: {e}"))
}

fn write_rows<W: Write>(
    out: W,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Columns `n, re, im, series_value, quadrature_value`.
pub fn write_spectrum_csv<W: Write>(out: W, rows: &[SpectrumRow]) -> Result<()> {
    write_rows(
        out,
        &headers(&["n", "re", "im", "series_value", "quadrature_value"]),
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                num(r.re),
                num(r.im),
                num(r.series_value),
                num(r.quadrature_value),
            ]
        }),
    )
}

/// Columns `k, dev_1, …, dev_n`.
pub fn write_hits_csv<W: Write>(out: W, dims: usize, hits: &[KroneckerHit]) -> Result<()> {
    let mut header = vec!["k".to_string()];
    header.extend((1..=dims).map(|i| format!("dev_{i}")));
    write_rows(
        out,
        &header,
        hits.iter().map(|h| {
            std::iter::once(h.k.to_string())
                .chain(h.deviations.iter().map(|d| num(*d)))
                .collect()
        }),
    )
}

/// Columns `t, x_1, y_1, …, x_N, y_N, U, I, K`.
pub fn write_trajectory_csv<W: Write>(out: W, samples: &[TrajectorySample]) -> Result<()> {
    let n = samples.first().map_or(0, |s| s.positions.len());
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x_{i}"));
        header.push(format!("y_{i}"));
    }
    header.extend(headers(&["U", "I", "K"]));
    write_rows(
        out,
        &header,
        samples.iter().map(|s| {
            std::iter::once(s.t)
                .chain(s.positions.coords().iter().copied())
                .chain([s.potential, s.inertia, s.kinetic])
                .map(num)
                .collect()
        }),
    )
}

/// Columns `t, U, I`.
pub fn write_time_series_csv<W: Write>(
    out: W,
    samples: &[crate::harmonics::LoopSample],
) -> Result<()> {
    write_rows(
        out,
        &headers(&["t", "U", "I"]),
        samples
            .iter()
            .map(|s| vec![num(s.t), num(s.potential), num(s.inertia)]),
    )
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}
