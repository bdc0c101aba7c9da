use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::data::write_text;
use super::{CellKey, CellRecord, ExperimentConfig, SweepOutput, SweepResult};
use crate::error::{Error, Result};

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub files: Vec<PathBuf>,
}

fn num(v: f64) -> String {
    // Avoid printing negative zero.
    format!("{:.6}", if v == 0.0 { 0.0 } else { v })
}

/// Column label inside the profit table (everything but beta).
fn table_column(key: &CellKey, cfg: &ExperimentConfig) -> String {
    let mut parts = Vec::new();
    if cfg.alpha_grid.len() > 1 || cfg.e_max_grid.is_empty() {
        parts.push(format!("alpha_{}", key.alpha));
    }
    if let Some(e) = key.e_max {
        parts.push(format!("emax_{e}"));
    }
    parts.join("_")
}

/// Series label that names only the dimensions actually swept besides beta.
fn series_label(key: &CellKey, cfg: &ExperimentConfig) -> String {
    let mut s = format!("beta_{}", key.beta);
    if cfg.alpha_grid.len() > 1 {
        s.push_str(&format!("_alpha_{}", key.alpha));
    }
    if cfg.e_max_grid.len() > 1 {
        if let Some(e) = key.e_max {
            s.push_str(&format!("_emax_{e}"));
        }
    }
    s
}

fn pivot_table(
    records: &[CellRecord],
    cfg: &ExperimentConfig,
    value: impl Fn(&CellRecord) -> f64,
) -> String {
    let per_beta = records.len() / cfg.beta_grid.len();
    let mut out = String::from("beta");
    for r in &records[..per_beta] {
        out.push(',');
        out.push_str(&table_column(&r.key, cfg));
    }
    out.push('\n');
    for chunk in records.chunks(per_beta) {
        out.push_str(&chunk[0].key.beta.to_string());
        for r in chunk {
            out.push(',');
            out.push_str(&num(value(r)));
        }
        out.push('\n');
    }
    out
}

fn summary(records: &[CellRecord]) -> String {
    let mut out = String::from(
        "beta,alpha,e_max,expected_profit,cvar_cost,objective,realized_settlement,nodes\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.key.beta,
            r.key.alpha,
            r.key.e_max.map(|e| e.to_string()).unwrap_or_default(),
            num(r.expected_profit),
            num(r.cvar_cost),
            num(r.objective),
            r.realized_settlement.map(num).unwrap_or_default(),
            r.nodes
        );
    }
    out
}

fn net_discharge(result: &SweepResult) -> String {
    let series = result.net_discharge();
    let mut out = String::from("period");
    for (key, _) in &series {
        out.push(',');
        out.push_str(&series_label(key, &result.config));
    }
    out.push('\n');
    for k in 0..result.grid.horizon() {
        out.push_str(&(k + 1).to_string());
        for (_, s) in &series {
            out.push(',');
            out.push_str(&num(s[k]));
        }
        out.push('\n');
    }
    out
}

/// Writes the profit table(s), per-cell summary, net-discharge series,
/// rolling traces and a replayable manifest into `out_dir`.
pub fn emit_report(result: &SweepResult, out_dir: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = ReportFiles::default();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = out_dir.join(name);
        write_text(&path, &text)?;
        files.files.push(path);
        Ok(())
    };
    let cfg = &result.config;
    let records = result.records();
    put(
        "profit_table.csv",
        pivot_table(&records, cfg, |r| r.expected_profit),
    )?;
    put("summary.csv", summary(&records))?;
    put("netdischarge.csv", net_discharge(result))?;
    if let SweepOutput::Rolling(cells) = &result.output {
        put(
            "realized_table.csv",
            pivot_table(&records, cfg, |r| r.realized_settlement.unwrap_or(0.0)),
        )?;
        let dir = out_dir.join("traces");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for c in cells {
            put(
                &format!("traces/trace_{}.csv", c.key.label()),
                c.trace.to_csv(),
            )?;
        }
    }
    let manifest = serde_json::to_string_pretty(&cfg.manifest())
        .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
    put("manifest.json", manifest + "\n")?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::super::{run_static, Mode};
    use super::*;

    fn cfg(e_max: &[f64]) -> ExperimentConfig {
        let mut c: ExperimentConfig = serde_json::from_str(
            r#"{
                "kappa_minutes": 30, "horizon": 6,
                "storage": {"p_c_max": 2, "p_d_max": 2, "eta": 0.85, "e_min": 0, "e_max": 2},
                "synthetic": {"observations": 30, "sigma0": 3.0, "gamma": 0.5, "seed": 8},
                "beta_grid": [0, 0.2], "alpha_grid": [0.95],
                "n_scenarios": 10, "seed": 4
            }"#,
        )
        .unwrap();
        c.e_max_grid = e_max.to_vec();
        c.mode = Mode::Static;
        c
    }

    #[test]
    fn profit_table_keyed_by_alpha_without_capacity_grid() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_static(&cfg(&[])).unwrap();
        emit_report(&res, dir.path()).unwrap();
        let table = std::fs::read_to_string(dir.path().join("profit_table.csv")).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "beta,alpha_0.95");
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].starts_with("0.2,"));
        let nd = std::fs::read_to_string(dir.path().join("netdischarge.csv")).unwrap();
        assert_eq!(nd.lines().next().unwrap(), "period,beta_0,beta_0.2");
        assert_eq!(nd.lines().count(), 7);
    }

    #[test]
    fn capacity_grid_adds_columns() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_static(&cfg(&[4.0, 8.0, 12.0])).unwrap();
        emit_report(&res, dir.path()).unwrap();
        let table = std::fs::read_to_string(dir.path().join("profit_table.csv")).unwrap();
        assert_eq!(table.lines().next().unwrap(), "beta,emax_4,emax_8,emax_12");
        assert_eq!(table.lines().count(), 3);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&manifest).unwrap();
        assert_eq!(back.e_max_grid, vec![4.0, 8.0, 12.0]);
        assert!(back.rass_version.is_some());
    }
}
