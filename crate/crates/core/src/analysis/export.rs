use std::fmt::Display;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};

use super::report::Report;
use crate::error::ReportError;
use crate::grid::Matrix;

/// Role of a cell in the placement map of one NBS type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum Category {
    Unused = 0,
    Forbidden = 1,
    PreExisting = 2,
    New = 3,
}

/// Range mapped onto gray levels 0..=255.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> ReportError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One CSV record per matrix row, no header.
pub fn write_csv_matrix<T: Display>(m: &Matrix<T>, path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for i in 0..m.rows() {
        w.write_record((0..m.cols()).map(|j| m[(i, j)].to_string()))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv_matrix(path: &Path) -> Result<Matrix<f64>, ReportError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(path)(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        rows.push(row);
    }
    Matrix::from_rows(rows)
        .map_err(|e| io_err(path)(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
}

/// Binary PGM with matrix rows as image rows.
fn write_pgm(pixels: &Matrix<u8>, path: &Path) -> Result<(), ReportError> {
    let file = BufWriter::new(File::create(path).map_err(io_err(path))?);
    PnmEncoder::new(file)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            pixels.as_slice(),
            pixels.cols() as u32,
            pixels.rows() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| ReportError::Image(format!("{}: {e}", path.display())))
}

fn scale_of(m: &Matrix<f64>) -> Scale {
    Scale {
        min: m.min().unwrap_or(0.0),
        max: m.max().unwrap_or(0.0),
    }
}

fn gray(m: &Matrix<f64>, s: Scale) -> Matrix<u8> {
    let span = s.max - s.min;
    m.map(|&v| {
        if span > 0.0 {
            ((v - s.min) / span * 255.0).round() as u8
        } else {
            0
        }
    })
}

/// Writes, per measure, `delta_<id>.csv`, a min-max scaled
/// `delta_<id>.pgm` and its `delta_<id>.scale.json`; per NBS type,
/// `placement_<id>.csv` with [`Category`] codes and `placement_<id>.pgm`
/// with the codes spread over the gray range. Returns the written paths.
pub fn export_heatmaps(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for m in &report.measures {
        let csv = dir.join(format!("delta_{}.csv", m.id));
        write_csv_matrix(&m.delta, &csv)?;
        let scale = scale_of(&m.delta);
        let pgm = dir.join(format!("delta_{}.pgm", m.id));
        write_pgm(&gray(&m.delta, scale), &pgm)?;
        let sidecar = dir.join(format!("delta_{}.scale.json", m.id));
        let text = serde_json::to_string_pretty(&scale).expect("scale serializes") + "\n";
        fs::write(&sidecar, text).map_err(io_err(&sidecar))?;
        written.extend([csv, pgm, sidecar]);
    }
    for n in &report.nbs {
        let csv = dir.join(format!("placement_{}.csv", n.id));
        write_csv_matrix(&n.categories, &csv)?;
        let pgm = dir.join(format!("placement_{}.pgm", n.id));
        write_pgm(&n.categories.map(|&c| c * 85), &pgm)?;
        written.extend([csv, pgm]);
    }
    Ok(written)
}
