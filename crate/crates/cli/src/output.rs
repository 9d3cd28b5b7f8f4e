//! Deterministic artifact rendering.

use std::fs;
use std::path::Path;

use parity_photons::analysis::{density_export, ReducedState};
use parity_photons::dynamics::Trajectory;
use parity_photons::units::to_ns;

use crate::CliError;

/// Files of one run, rendered in memory and written only when the run succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn trajectory_csv(traj: &Trajectory, offset: f64) -> String {
    let mut header = vec!["t_ns", "t"];
    header.extend(traj.names.iter().map(String::as_str));
    let rows = traj.times.iter().enumerate().map(|(i, &t)| {
        let mut row = vec![num(to_ns(t + offset)), num(t + offset)];
        row.extend(traj.series.iter().map(|s| num(s[i])));
        row
    });
    csv_table(&header, rows)
}

pub fn density_csv(state: &ReducedState) -> String {
    let rows = density_export(state).into_iter().map(|e| vec![e.row_label, e.col_label, num(e.re), num(e.im)]);
    csv_table(&["row_label", "col_label", "re", "im"], rows)
}

pub fn summary_csv(entries: &[(&str, f64)]) -> String {
    csv_table(&["quantity", "value"], entries.iter().map(|(k, v)| vec![k.to_string(), num(*v)]))
}
