//! CSV artifacts. Every file has a mandatory header row; floats are written
//! in shortest round-trip form so identical runs give identical bytes.

use std::path::Path;

use crate::error::{LabError, Result};
use crate::evolver::Trajectory;

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["tau", "hsk_lightcone", "sup_lightcone", "origin_psi1", "gauge_proj"];
pub const SPECTRUM_COLUMNS: [&str; 5] = ["n", "re_lambda", "im_lambda", "mismatch_abs", "residual"];
pub const REPORT_COLUMNS: [&str; 2] = ["key", "value"];
pub const SPECTRUM_MAP_COLUMNS: [&str; 4] = ["n", "re_lambda", "im_lambda", "mismatch_abs"];
pub const EXTRACTION_COLUMNS: [&str; 5] = ["stage", "tau_f", "t_trial", "d", "saturated"];
pub const SNAPSHOT_COLUMNS: [&str; 3] = ["r", "v", "v_t"];
pub const RATIO_COLUMNS: [&str; 4] = ["harness", "alpha", "member", "ratio"];

fn csv_err(e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::Io(io),
        other => LabError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}"))),
    }
}

/// Writes `header` and `rows` to `path`, creating parent directories.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(LabError::Contract(format!("row of {} fields for {} columns", row.len(), header.len())));
        }
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV file, checking that its header equals `expected`.
pub fn read_csv(path: &Path, expected: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(LabError::Contract(format!("{}: header {header:?}, expected {expected:?}", path.display())));
    }
    r.records().map(|rec| Ok(rec.map_err(csv_err)?.iter().map(str::to_string).collect())).collect()
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.times
        .iter()
        .zip(&traj.diagnostics)
        .map(|(t, d)| {
            vec![
                num(*t),
                d.hsk_lightcone.map_or_else(String::new, num),
                num(d.sup_lightcone),
                num(d.origin_psi1),
                num(d.gauge_proj),
            ]
        })
        .collect()
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_csv(path, &TRAJECTORY_COLUMNS, &trajectory_rows(traj))
}

pub fn write_report(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let rows: Vec<Vec<String>> = entries.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    write_csv(path, &REPORT_COLUMNS, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_header_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/x.csv");
        let rows = vec![vec![num(0.1), num(-2.5e-300)], vec![num(1.0 / 3.0), num(f64::MAX)]];
        write_csv(&path, &["a", "b"], &rows).unwrap();
        let back = read_csv(&path, &["a", "b"]).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[1][0].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert!(read_csv(&path, &["a", "c"]).is_err());
        assert!(write_csv(&path, &["a"], &rows).is_err());
    }
}
