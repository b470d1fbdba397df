use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::output::{parse_csv, RunRecord};
use crate::error::{Error, Result};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_PLOT: &str = "report.gp";

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub plot: PathBuf,
    pub runs: usize,
}

enum Problem {
    Missing(String),
    Corrupt(String),
}

fn load_runs(dir: &Path) -> Result<Vec<RunRecord>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Missing(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != REPORT_JSON))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Missing(format!("no run records in {}", dir.display())));
    }
    let mut runs = Vec::new();
    let mut problems = Vec::new();
    for p in &paths {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let rec: RunRecord = match fs::read_to_string(p).map_err(|e| e.to_string()).and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string())) {
            Ok(r) => r,
            Err(e) => {
                problems.push(Problem::Corrupt(format!("{name}: {e}")));
                continue;
            }
        };
        for t in &rec.tables {
            match fs::read(dir.join(&t.file)) {
                Err(_) => problems.push(Problem::Missing(format!("{name}: table file {} not found", t.file))),
                Ok(bytes) => match parse_csv(&bytes) {
                    Ok((header, _)) if header.len() == t.columns.len() => {}
                    Ok((header, _)) => problems.push(Problem::Corrupt(format!(
                        "{}: {} columns, record lists {}",
                        t.file,
                        header.len(),
                        t.columns.len()
                    ))),
                    Err(e) => problems.push(Problem::Corrupt(format!("{}: {e}", t.file))),
                },
            }
        }
        runs.push(rec);
    }
    if problems.is_empty() {
        return Ok(runs);
    }
    let missing = problems.iter().any(|p| matches!(p, Problem::Missing(_)));
    let list: Vec<String> = problems
        .into_iter()
        .map(|p| match p {
            Problem::Missing(s) => format!("missing: {s}"),
            Problem::Corrupt(s) => format!("corrupt: {s}"),
        })
        .collect();
    let text = list.join("; ");
    Err(if missing { Error::Missing(text) } else { Error::Config(text) })
}

/// Gnuplot script with one page per table; fit tables get logarithmic axes.
pub fn plot_script(runs: &[RunRecord]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\nset datafile commentschars \"#\"\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    for r in runs {
        for t in &r.tables {
            let stem = t.file.trim_end_matches(".csv");
            let _ = writeln!(s, "\nset output \"{stem}.png\"");
            let _ = writeln!(s, "set title \"{} / {}\"", r.run_id, t.name);
            let x = &t.columns[0];
            let _ = writeln!(s, "set xlabel \"{} [{}]\"", x.name, x.unit);
            s.push_str(if t.loglog { "set logscale xy\n" } else { "unset logscale\n" });
            let curves: Vec<String> = (2..=t.columns.len())
                .map(|j| format!("\"{}\" using 1:{j} with linespoints", t.file))
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
    }
    s
}

/// Collects every run record in `dir` into `report.json` and `report.gp`. Output bytes
/// depend only on the directory contents.
pub fn emit_report(dir: &Path) -> Result<ReportFiles> {
    let runs = load_runs(dir)?;
    let summary = ReportSummary { runs };
    let mut json = serde_json::to_string_pretty(&summary).expect("report serializes");
    json.push('\n');
    let summary_path = dir.join(REPORT_JSON);
    fs::write(&summary_path, json)?;
    let plot = dir.join(REPORT_PLOT);
    fs::write(&plot, plot_script(&summary.runs))?;
    Ok(ReportFiles { summary: summary_path, plot, runs: summary.runs.len() })
}
