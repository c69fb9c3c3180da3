//! CSV, JSON and gnuplot output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scan::ScanGrid;
use super::table2::Table2Entry;
use crate::propagate::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub const TRAJECTORY_HEADER: &str = "t,P1,P2,P3,norm,P1r,P2r,P3r";
pub const GRID_HEADER: &str = "axis1,axis2,quantity,value";

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else {
        "nan".to_string()
    }
}

/// One line per sample after the header.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(110 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, o) in traj.times.iter().zip(&traj.observables) {
        let row = [*t, o.p1, o.p2, o.p3, o.norm, o.p1r, o.p2r, o.p3r].map(num);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Long format: one line per cell and quantity, `nan` where undefined.
pub fn grid_csv(grid: &ScanGrid) -> String {
    let mut out = String::new();
    out.push_str(GRID_HEADER);
    out.push('\n');
    for c in &grid.cells {
        for (q, v) in grid.quantities.iter().zip(&c.values) {
            let _ = writeln!(out, "{},{},{},{}", num(c.x), num(c.y), q.name(), num(v.unwrap_or(f64::NAN)));
        }
    }
    out
}

pub const TABLE2_HEADER: &str = "d_omega_pct,d_tau_pct,d_delta0_pct,d_omega_fit_pct,P3r,P3,P3r_ref,P3_ref";

pub fn table2_csv(entries: &[Table2Entry]) -> String {
    let mut out = String::from(TABLE2_HEADER);
    out.push('\n');
    for e in entries {
        let r = &e.reference;
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{},{}",
            r.d_omega_pct, r.d_tau_pct, r.d_delta0_pct, r.d_omega_fit_pct, e.p3r, e.p3, r.p3r, r.p3
        );
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, ExportError> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Plots populations and relative populations from a trajectory CSV.
pub fn trajectory_gnuplot(csv_path: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 't/T'\n\
         set ylabel 'population'\n\
         set multiplot layout 2,1\n\
         plot '{csv_path}' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines, '' using 1:5 with lines\n\
         plot '{csv_path}' using 1:6 with lines, '' using 1:7 with lines, '' using 1:8 with lines\n\
         unset multiplot\n"
    )
}

/// Heat map of one quantity from a long-format grid CSV.
pub fn grid_gnuplot(csv_path: &str, grid: &ScanGrid, quantity: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel '{x}'\n\
         set ylabel '{y}'\n\
         set title '{quantity}'\n\
         set view map\n\
         set dgrid3d {nx},{ny}\n\
         splot '{csv_path}' using 1:2:(stringcolumn(3) eq '{quantity}' ? $4 : NaN) with pm3d notitle\n",
        x = grid.axis1.parameter,
        y = grid.axis2.parameter,
        nx = grid.axis2.values.len(),
        ny = grid.axis1.values.len(),
    )
}

/// Computed and reference `P3` and `P3r` per row of a deviation table CSV.
pub fn table2_gnuplot(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'row'\n\
         set multiplot layout 2,1\n\
         plot '{csv_path}' using 0:6 with linespoints, '' using 0:8 with points\n\
         plot '{csv_path}' using 0:5 with linespoints, '' using 0:7 with points\n\
         unset multiplot\n"
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), ExportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| ExportError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{presets, run_scenario, Summary};

    #[test]
    fn csv_has_header_and_one_line_per_sample() {
        let run = run_scenario(&presets::scenario("traditional_stirap").unwrap()).unwrap();
        let csv = trajectory_csv(&run.trajectory);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines.len(), 3001);
        let last: Vec<f64> = lines[3000].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last.len(), 8);
        assert!((last[3] - run.summary.final_p3).abs() < 1e-11);
    }

    #[test]
    fn summary_json_round_trips() {
        let run = run_scenario(&presets::scenario("traditional_stirap").unwrap()).unwrap();
        let text = to_json(&run.summary).unwrap();
        let back: Summary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, run.summary);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_file(&blocker.join("out.csv"), "y").unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
