use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use super::instance::MilpInstance;
use super::lp_format::{lp_name, write_lp};
use super::{MilpSolution, SolveStatus, SolverConfig, SolverError};

static SEQ: AtomicU64 = AtomicU64::new(0);

/// Adapter for a command-line MILP solver.
///
/// The instance is written in CPLEX LP format to a temporary file whose
/// path replaces `{lp}` in the command; the solver must write a solution
/// file to the path that replaces `{sol}`. Solution lines of the form
/// `<column> <value>` are read back; a line mentioning `infeasible` marks
/// the instance infeasible. Returned points are re-checked against the
/// instance before they are accepted.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    command: Vec<String>,
}

impl ExternalSolver {
    pub fn new(command: Vec<String>) -> Self {
        Self { command }
    }

    pub fn solve(
        &self,
        instance: &MilpInstance,
        config: &SolverConfig,
    ) -> Result<MilpSolution, SolverError> {
        instance.validate()?;
        config.validate()?;
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| SolverError::External("empty command".into()))?;
        let dir = std::env::temp_dir().join(format!(
            "rass-ext-{}-{}",
            std::process::id(),
            SEQ.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::create_dir_all(&dir).map_err(|e| SolverError::External(e.to_string()))?;
        let result = self.run(instance, config, &dir, program, args);
        let _ = std::fs::remove_dir_all(&dir);
        result
    }

    fn run(
        &self,
        instance: &MilpInstance,
        config: &SolverConfig,
        dir: &std::path::Path,
        program: &str,
        args: &[String],
    ) -> Result<MilpSolution, SolverError> {
        let lp_path: PathBuf = dir.join("instance.lp");
        let sol_path: PathBuf = dir.join("solution.txt");
        std::fs::write(&lp_path, write_lp(instance))
            .map_err(|e| SolverError::External(e.to_string()))?;
        let expand = |a: &String| {
            a.replace("{lp}", &lp_path.to_string_lossy())
                .replace("{sol}", &sol_path.to_string_lossy())
        };
        let output = Command::new(expand(&program.to_string()))
            .args(args.iter().map(expand))
            .output()
            .map_err(|e| SolverError::External(format!("cannot run {program}: {e}")))?;
        if !output.status.success() {
            return Err(SolverError::External(format!(
                "{program} exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&sol_path)
            .map_err(|e| SolverError::External(format!("no solution file: {e}")))?;
        parse_solution(instance, config, &text)
    }
}

fn parse_solution(
    instance: &MilpInstance,
    config: &SolverConfig,
    text: &str,
) -> Result<MilpSolution, SolverError> {
    if text.to_ascii_lowercase().contains("infeasible") {
        return Ok(MilpSolution::infeasible(0));
    }
    let index: HashMap<String, usize> = instance
        .vars()
        .iter()
        .enumerate()
        .map(|(j, v)| (lp_name(&v.name), j))
        .collect();
    let mut values = vec![0.0; instance.num_cols()];
    let mut seen = 0usize;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let (Some(name), Some(val), None) = (it.next(), it.next(), it.next()) else {
            continue;
        };
        if let (Some(&j), Ok(v)) = (index.get(name), val.parse::<f64>()) {
            values[j] = v;
            seen += 1;
        }
    }
    if seen == 0 && instance.num_cols() > 0 {
        return Err(SolverError::External(
            "solution file lists no known columns".into(),
        ));
    }
    for j in instance.integer_cols() {
        let r = values[j].round();
        if (values[j] - r).abs() <= config.int_tol {
            values[j] = r;
        }
    }
    let scale = instance
        .vars()
        .iter()
        .flat_map(|v| [v.lower, v.upper])
        .filter(|b| b.is_finite())
        .fold(1.0f64, |acc, b| acc.max(b.abs()));
    let viol = instance.max_violation(&values);
    if viol > 1e-6 * scale {
        return Err(SolverError::External(format!(
            "returned point violates the instance by {viol:.3e}"
        )));
    }
    let objective = instance.objective_value(&values);
    Ok(MilpSolution {
        status: SolveStatus::Optimal,
        values,
        objective,
        bound: objective,
        nodes: 0,
    })
}
