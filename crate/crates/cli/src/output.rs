//! CSV rendering and file output.
//!
//! Floats are written with 17 significant digits so every value
//! round-trips; lines end in LF.

use std::path::{Path, PathBuf};

use mprk_core::{Linear2x2Pds, RegionRaster, StateVector, Trajectory};

use crate::error::{CliError, Result};

pub const TRAJECTORY_HEADER: [&str; 7] = ["step", "t", "y1", "y2", "mass", "err1", "err2"];
pub const REGION_HEADER: [&str; 3] = ["z_a", "z_b", "stable"];
pub const CONVERGENCE_HEADER: [&str; 3] = ["dt", "error", "observed_order"];

/// A named file and its full contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds a CSV document from a header and rows of preformatted fields.
pub fn csv_document<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("fields are ASCII")
}

/// Trajectory rows with absolute errors against the analytic solution.
pub fn trajectory_csv(problem: &Linear2x2Pds, traj: &Trajectory) -> Result<String> {
    let y0 = &traj.states[0];
    let mut rows = Vec::with_capacity(traj.len());
    for (step, (t, y)) in traj.times.iter().zip(&traj.states).enumerate() {
        let exact = problem.exact_solution(y0, *t)?;
        rows.push(vec![
            step.to_string(),
            fmt_f64(*t),
            fmt_f64(y[0]),
            fmt_f64(y[1]),
            fmt_f64(y.total_mass()),
            fmt_f64((y[0] - exact[0]).abs()),
            fmt_f64((y[1] - exact[1]).abs()),
        ]);
    }
    Ok(csv_document(&TRAJECTORY_HEADER, rows))
}

pub fn region_csv(raster: &RegionRaster) -> String {
    csv_document(
        &REGION_HEADER,
        raster.iter().map(|(z_a, z_b, stable)| {
            vec![fmt_f64(z_a), fmt_f64(z_b), u8::from(stable).to_string()]
        }),
    )
}

/// Samples of the analytic solution at the given times.
pub fn exact_solution_csv(
    problem: &Linear2x2Pds,
    y0: &StateVector,
    times: &[f64],
) -> Result<String> {
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let y = problem.exact_solution(y0, t)?;
        rows.push(vec![fmt_f64(t), fmt_f64(y[0]), fmt_f64(y[1])]);
    }
    Ok(csv_document(&["t", "y1", "y2"], rows))
}

fn refuse_existing(path: &Path, overwrite: bool) -> Result<()> {
    if !overwrite && path.exists() {
        return Err(CliError::WouldOverwrite(path.to_path_buf()));
    }
    Ok(())
}

/// Writes one file, creating its parent directory if needed.
pub fn write_file(path: &Path, contents: &str, overwrite: bool) -> Result<()> {
    refuse_existing(path, overwrite)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes every file into `dir`. Nothing is written if any target exists
/// and `overwrite` is off.
pub fn write_files(dir: &Path, files: &[OutputFile], overwrite: bool) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = files.iter().map(|f| dir.join(&f.name)).collect();
    for p in &paths {
        refuse_existing(p, overwrite)?;
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (path, file) in paths.iter().zip(files) {
        std::fs::write(path, &file.contents).map_err(|e| CliError::io(path, e))?;
    }
    Ok(paths)
}
