use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MomentReport;
use crate::error::Result;

/// One line of the flat CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub n: u64,
    pub p: u32,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    pub z: f64,
    pub ks: f64,
    pub ks_critical: f64,
}

pub fn csv_rows(report: &MomentReport) -> Vec<CsvRow> {
    report
        .per_n
        .iter()
        .flat_map(|r| {
            r.moments.iter().map(move |m| CsvRow {
                n: r.n,
                p: m.p,
                empirical: m.empirical,
                se: m.se,
                predicted: m.predicted,
                z: m.z,
                ks: r.ks.ks,
                ks_critical: r.ks.critical_1pct,
            })
        })
        .collect()
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

/// Writes the CSV export. `header` becomes the first line, prefixed by `#`.
pub fn write_csv(report: &MomentReport, header: &str, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut file = fs::File::create(path)?;
    writeln!(file, "# {header}")?;
    let mut w = csv::Writer::from_writer(file);
    for row in csv_rows(report) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `{"header": header, "report": report}` as pretty JSON.
pub fn write_json<H: Serialize>(report: &MomentReport, header: &H, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, H> {
        header: &'a H,
        report: &'a MomentReport,
    }
    ensure_parent(path)?;
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &Doc { header, report })?;
    writeln!(file)?;
    Ok(())
}
