//! File formats: sampling sets, matrices, mode tables and measurement vectors.
//!
//! Angles are radians written with 17 significant digits, so a write/read
//! round trip is exact. Every sampling CSV can carry a JSON sidecar with the
//! same stem that records where the set came from.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{ModeKind, ModeTable, ModeTableExport};
use crate::sampling::{Provenance, SamplingSet};
use crate::sensing::SensingMatrix;
use crate::C64;

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

/// Writes rows of preformatted fields under `header`.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar describing a sampling CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesSidecar {
    pub provenance: Provenance,
    pub count: usize,
    /// Generator parameters (sampler name, seed, chi policy, ...).
    #[serde(default)]
    pub details: serde_json::Value,
}

/// `samples.csv` → `samples.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `theta,phi,chi` rows and the JSON sidecar.
pub fn write_samples(path: &Path, samples: &SamplingSet<f64>, details: serde_json::Value) -> Result<()> {
    let rows = (0..samples.len()).map(|i| {
        let (t, p, c) = samples.sample(i);
        vec![fmt_f64(t), fmt_f64(p), fmt_f64(c)]
    });
    write_table(path, &["theta", "phi", "chi"], rows)?;
    let meta = SamplesSidecar { provenance: samples.provenance(), count: samples.len(), details };
    write_json(&sidecar_path(path), &meta)
}

/// Reads a sampling CSV; the provenance comes from the sidecar when present.
pub fn read_samples(path: &Path) -> Result<SamplingSet<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["theta", "phi", "chi"] {
        return Err(Error::Parse(format!("{}: expected header theta,phi,chi, found {}", path.display(), header.join(","))));
    }
    let (mut theta, mut phi, mut chi) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = parse_fields(&rec, 3, path, line)?;
        theta.push(vals[0]);
        phi.push(vals[1]);
        chi.push(vals[2]);
    }
    let provenance = match read_json::<SamplesSidecar>(&sidecar_path(path)) {
        Ok(meta) => meta.provenance,
        Err(_) => Provenance::File,
    };
    if theta.iter().any(|t| !(0.0..=std::f64::consts::PI).contains(t)) {
        return Err(Error::domain(format!("{}: theta outside [0, pi]", path.display())));
    }
    SamplingSet::new_keep_chi(theta, phi, chi, provenance)
}

fn parse_fields(rec: &csv::StringRecord, n: usize, path: &Path, line: usize) -> Result<Vec<f64>> {
    if rec.len() != n {
        return Err(Error::Parse(format!("{}: row {} has {} fields, expected {n}", path.display(), line + 1, rec.len())));
    }
    rec.iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{}: row {}: bad number '{f}'", path.display(), line + 1)))
        })
        .collect()
}

/// JSON form of a sensing matrix; `data` interleaves real and imaginary
/// parts row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub kind: ModeKind,
    pub degree: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixExport {
    pub fn from_matrix(a: &SensingMatrix<f64>) -> Self {
        let data = a.data().iter().flat_map(|z| [z.re, z.im]).collect();
        Self { kind: a.kind(), degree: a.degree(), rows: a.rows(), cols: a.cols(), data }
    }

    pub fn to_matrix(&self) -> Result<SensingMatrix<f64>> {
        if self.data.len() != 2 * self.rows * self.cols {
            return Err(Error::dims(format!("{} values for a {}x{} matrix", self.data.len(), self.rows, self.cols)));
        }
        let vals: Vec<C64> = self.data.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let arr = Array2::from_shape_vec((self.rows, self.cols), vals).map_err(|e| Error::dims(e.to_string()))?;
        SensingMatrix::from_parts(self.kind, self.degree, arr)
    }
}

/// Writes the matrix as CSV with header `re_0,im_0,...,re_{L-1},im_{L-1}`.
pub fn write_matrix_csv(path: &Path, a: &SensingMatrix<f64>) -> Result<()> {
    let header: Vec<String> = (0..a.cols()).flat_map(|q| [format!("re_{q}"), format!("im_{q}")]).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = a.data().rows().into_iter().map(|r| r.iter().flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)]).collect::<Vec<_>>());
    write_table(path, &header, rows.collect::<Vec<_>>())
}

pub fn write_matrix_json(path: &Path, a: &SensingMatrix<f64>) -> Result<()> {
    write_json(path, &MatrixExport::from_matrix(a))
}

pub fn read_matrix_json(path: &Path) -> Result<SensingMatrix<f64>> {
    read_json::<MatrixExport>(path)?.to_matrix()
}

pub fn write_mode_table(path: &Path, table: &ModeTable) -> Result<()> {
    write_json::<ModeTableExport>(path, &table.to_export())
}

/// Complex vector as `re,im` rows.
pub fn write_vector_csv(path: &Path, v: &[C64]) -> Result<()> {
    write_table(path, &["re", "im"], v.iter().map(|z| vec![fmt_f64(z.re), fmt_f64(z.im)]))
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<C64>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["re", "im"] {
        return Err(Error::Parse(format!("{}: expected header re,im", path.display())));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let v = parse_fields(&rec?, 2, path, line)?;
        out.push(C64::new(v[0], v[1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::mode_table;
    use crate::sampling::random_uniform;
    use crate::sensing::build_matrix;

    #[test]
    fn samples_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = random_uniform::<f64>(17, 4).unwrap();
        write_samples(&p, &s, serde_json::json!({"sampler": "random"})).unwrap();
        let back = read_samples(&p).unwrap();
        assert_eq!(back, s);
        let meta: SamplesSidecar = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!(meta.count, 17);
        assert_eq!(meta.provenance, Provenance::Random);
    }

    #[test]
    fn bad_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_samples(&p), Err(Error::Parse(_))));
        std::fs::write(&p, "theta,phi,chi\n1,2\n").unwrap();
        assert!(read_samples(&p).is_err());
    }

    #[test]
    fn matrix_and_vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = random_uniform::<f64>(5, 1).unwrap();
        let a = build_matrix(ModeKind::SphericalHarmonics, 2, &s).unwrap();
        let p = dir.path().join("a.json");
        write_matrix_json(&p, &a).unwrap();
        assert_eq!(read_matrix_json(&p).unwrap(), a);
        write_matrix_csv(&dir.path().join("a.csv"), &a).unwrap();
        let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert!(text.starts_with("re_0,im_0,re_1,im_1"));
        assert_eq!(text.lines().count(), 6);

        let v: Vec<C64> = a.data().column(3).to_vec();
        let pv = dir.path().join("y.csv");
        write_vector_csv(&pv, &v).unwrap();
        assert_eq!(read_vector_csv(&pv).unwrap(), v);

        let pt = dir.path().join("modes.json");
        let t = mode_table(ModeKind::SnfMuPm1, 2).unwrap();
        write_mode_table(&pt, &t).unwrap();
        let e: ModeTableExport = read_json(&pt).unwrap();
        assert_eq!(e, t.to_export());
    }
}
