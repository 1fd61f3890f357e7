#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn mprk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mprk"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

/// Header and rows of a CSV file, all fields as strings.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader =
        csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

pub fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

/// Largest `|y1 - 0.5|` in a trajectory CSV of the symmetric test problem.
pub fn max_deviation(rows: &[Vec<String>], from: usize, to: usize) -> f64 {
    column(rows, 2)[from..to]
        .iter()
        .map(|y| (y - 0.5).abs())
        .fold(0.0, f64::max)
}
