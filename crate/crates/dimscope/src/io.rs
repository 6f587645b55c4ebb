//! Dataset and result file formats.
//!
//! Datasets travel either as CSV (one sample per line, optional header,
//! shortest round-trip decimal formatting) or as the raw little-endian
//! binary format: magic `DSET`, u32 version 1, u64 N, u64 D, then N*D f64
//! values row-major. All writers go through a temp-file-and-rename step, so
//! readers never observe partial files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::baselines::{MpcaProfile, PcaSpectrum};
use crate::corr::EcdfCurve;
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::model::{fci_model_value, FciParams};
use crate::multiscale::ScaleProfile;

const DSET_MAGIC: &[u8; 4] = b"DSET";
const DSET_VERSION: u32 = 1;

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut std::fs::File>) -> Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    {
        let mut writer = BufWriter::new(tmp.as_file_mut());
        write(&mut writer)?;
        writer.flush()?;
    }
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes a dataset as CSV without a header row.
pub fn write_dataset_csv(path: &Path, data: &DataSet) -> Result<()> {
    write_atomic(path, |w| {
        let mut line = String::new();
        for row in data.rows() {
            line.clear();
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    })
}

/// Reads a CSV dataset, skipping one header row if the first line does not
/// parse as numbers.
pub fn read_dataset_csv(path: &Path) -> Result<DataSet> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            trimmed.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                match dim {
                    None => dim = Some(values.len()),
                    Some(d) if d != values.len() => {
                        return Err(Error::Parse(format!(
                            "line {}: expected {d} fields, got {}",
                            lineno + 1,
                            values.len()
                        )));
                    }
                    _ => {}
                }
                rows.push(values);
            }
            Err(_) if lineno == 0 => {} // header row
            Err(e) => {
                return Err(Error::Parse(format!("line {}: {e}", lineno + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    DataSet::from_rows(&rows)
}

/// Writes a dataset in the binary DSET format.
pub fn write_dataset_dset(path: &Path, data: &DataSet) -> Result<()> {
    write_atomic(path, |w| {
        w.write_all(DSET_MAGIC)?;
        w.write_all(&DSET_VERSION.to_le_bytes())?;
        w.write_all(&(data.n_samples() as u64).to_le_bytes())?;
        w.write_all(&(data.ambient_dim() as u64).to_le_bytes())?;
        for v in data.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })
}

/// Reads a binary DSET dataset.
pub fn read_dataset_dset(path: &Path) -> Result<DataSet> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != DSET_MAGIC {
        return Err(Error::Parse("missing DSET magic".into()));
    }
    let mut word = [0u8; 4];
    reader.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != DSET_VERSION {
        return Err(Error::Parse(format!("unsupported DSET version {version}")));
    }
    let mut long = [0u8; 8];
    reader.read_exact(&mut long)?;
    let n = u64::from_le_bytes(long) as usize;
    reader.read_exact(&mut long)?;
    let dim = u64::from_le_bytes(long) as usize;
    let mut values = Vec::with_capacity(n * dim);
    let mut buf = [0u8; 8];
    for _ in 0..n * dim {
        reader.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    DataSet::new(values, n, dim)
}

/// Reads a dataset, sniffing the binary magic and falling back to CSV.
pub fn read_dataset(path: &Path) -> Result<DataSet> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 4];
    let is_dset = file.read_exact(&mut magic).is_ok() && &magic == DSET_MAGIC;
    drop(file);
    if is_dset {
        read_dataset_dset(path)
    } else {
        read_dataset_csv(path)
    }
}

/// Writes a dataset, picking the binary format for a `.dset` extension and
/// CSV otherwise.
pub fn write_dataset(path: &Path, data: &DataSet) -> Result<()> {
    let binary = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("dset"))
        .unwrap_or(false);
    if binary {
        write_dataset_dset(path, data)
    } else {
        write_dataset_csv(path, data)
    }
}

/// Writes a curve as `r,rho` CSV.
pub fn write_curve_csv(path: &Path, curve: &EcdfCurve) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "r,rho")?;
        for (r, rho) in curve.points() {
            writeln!(w, "{r},{rho}")?;
        }
        Ok(())
    })
}

/// Writes a curve with the analytic model overlaid:
/// `r,rho_empirical,rho_model`.
pub fn write_curve_with_model_csv(
    path: &Path,
    curve: &EcdfCurve,
    params: &FciParams,
) -> Result<()> {
    let model: Vec<f64> = curve
        .radii()
        .iter()
        .map(|&r| fci_model_value(r, params))
        .collect::<Result<Vec<_>>>()?;
    write_atomic(path, |w| {
        writeln!(w, "r,rho_empirical,rho_model")?;
        for ((r, rho), m) in curve.points().zip(&model) {
            writeln!(w, "{r},{rho},{m}")?;
        }
        Ok(())
    })
}

/// Writes the analytic model alone on a radius grid: `r,rho_model`.
pub fn write_model_curve_csv(path: &Path, params: &FciParams, radii: &[f64]) -> Result<()> {
    let model: Vec<f64> = radii
        .iter()
        .map(|&r| fci_model_value(r, params))
        .collect::<Result<Vec<_>>>()?;
    write_atomic(path, |w| {
        writeln!(w, "r,rho_model")?;
        for (r, m) in radii.iter().zip(&model) {
            writeln!(w, "{r},{m}")?;
        }
        Ok(())
    })
}

/// Writes multiscale profiles:
/// `center,scale_kind,scale,n_neighbors,d_est,reliable`.
pub fn write_profiles_csv(path: &Path, profiles: &[ScaleProfile]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "center,scale_kind,scale,n_neighbors,d_est,reliable")?;
        for profile in profiles {
            for entry in &profile.entries {
                let d_est = entry.d_est.map(|d| format!("{d}")).unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    profile.center_index,
                    entry.scale.kind(),
                    entry.scale.value(),
                    entry.n_neighbors,
                    d_est,
                    entry.reliable
                )?;
            }
        }
        Ok(())
    })
}

/// Writes a PCA spectrum as `index,eigenvalue` (1-based index).
pub fn write_spectrum_csv(path: &Path, spectrum: &PcaSpectrum) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "index,eigenvalue")?;
        for (i, v) in spectrum.eigenvalues().iter().enumerate() {
            writeln!(w, "{},{v}", i + 1)?;
        }
        Ok(())
    })
}

/// Writes averaged multiscale PCA spectra as `radius,eig_index,avg_eigenvalue`.
pub fn write_mpca_csv(path: &Path, profile: &MpcaProfile) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "radius,eig_index,avg_eigenvalue")?;
        for (radius, spectrum) in profile.radii.iter().zip(&profile.avg_spectra) {
            for (i, v) in spectrum.iter().enumerate() {
                writeln!(w, "{radius},{},{v}", i + 1)?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngHandle;
    use crate::datasets;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let data = datasets::gen_gaussian(3, 7, 40, &RngHandle::new(5)).unwrap();
        write_dataset_csv(&path, &data).unwrap();
        let back = read_dataset_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn csv_header_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "x,y\n0.5,1.25\n-3,4e-2\n").unwrap();
        let data = read_dataset_csv(&path).unwrap();
        assert_eq!(data.n_samples(), 2);
        assert_eq!(data.row(0), &[0.5, 1.25]);
        assert_eq!(data.row(1), &[-3.0, 0.04]);
    }

    #[test]
    fn dset_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.dset");
        let data = datasets::gen_hypercube(4, 9, 25, &RngHandle::new(8)).unwrap();
        write_dataset_dset(&path, &data).unwrap();
        let back = read_dataset_dset(&path).unwrap();
        assert_eq!(data, back);
        // Sniffing picks the right reader either way.
        let sniffed = read_dataset(&path).unwrap();
        assert_eq!(data, sniffed);
    }

    #[test]
    fn extension_selects_format() {
        let dir = tempfile::tempdir().unwrap();
        let data = datasets::gen_gaussian(2, 3, 10, &RngHandle::new(1)).unwrap();
        let bin = dir.path().join("a.dset");
        let csv = dir.path().join("a.csv");
        write_dataset(&bin, &data).unwrap();
        write_dataset(&csv, &data).unwrap();
        assert_eq!(read_dataset(&bin).unwrap(), data);
        assert_eq!(read_dataset(&csv).unwrap(), data);
        let head = std::fs::read(&bin).unwrap();
        assert_eq!(&head[..4], b"DSET");
    }

    #[test]
    fn curve_csv_has_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let curve = EcdfCurve::from_points(&[(0.5, 0.0), (1.0, 0.5), (1.5, 0.75)]).unwrap();
        write_curve_csv(&path, &curve).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,rho"));
        assert_eq!(lines.next(), Some("0.5,0"));
        let params = FciParams::new(2.0, 1.0).unwrap();
        let overlay = dir.path().join("overlay.csv");
        write_curve_with_model_csv(&overlay, &curve, &params).unwrap();
        let text = std::fs::read_to_string(&overlay).unwrap();
        assert!(text.starts_with("r,rho_empirical,rho_model\n"));
        // d = 2 closed form: rho_model(1) = 0.25.
        assert!(text.lines().nth(2).unwrap().ends_with("0.25"));
    }

    #[test]
    fn bad_csv_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2\n3,oops\n").unwrap();
        match read_dataset_csv(&path) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line 2")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
