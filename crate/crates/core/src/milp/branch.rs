use std::rc::Rc;
use std::time::Instant;

use super::instance::MilpInstance;
use super::simplex::{Basis, LpModel, LpOutcome};
use super::{MilpSolution, SolveStatus, SolverConfig, SolverError};

/// Largest number of binary columns [`enumerate_oracle`] accepts.
pub const MAX_ORACLE_BINARIES: usize = 20;

fn bounds(instance: &MilpInstance) -> (Vec<f64>, Vec<f64>) {
    instance.vars().iter().map(|v| (v.lower, v.upper)).unzip()
}

/// Solves the LP relaxation of `instance` (integrality ignored).
pub fn solve_lp(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    instance.validate()?;
    config.validate()?;
    let model = LpModel::new(instance);
    let (lo, hi) = bounds(instance);
    Ok(match model.solve(&lo, &hi, config.feas_tol)? {
        LpOutcome::Optimal { x, objective, .. } => MilpSolution {
            status: SolveStatus::Optimal,
            values: x,
            objective,
            bound: objective,
            nodes: 1,
        },
        LpOutcome::Infeasible => MilpSolution::infeasible(1),
    })
}

struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Relaxation objective of the parent.
    bound: f64,
    /// Optimal basis of the parent relaxation.
    start: Option<Rc<Basis>>,
}

/// Most fractional integer column, ties to the lowest index.
fn branching_column(ints: &[usize], x: &[f64], int_tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut best_frac = int_tol;
    for &j in ints {
        let f = x[j] - x[j].floor();
        let dist = f.min(1.0 - f);
        if dist > best_frac {
            best_frac = dist;
            best = Some((j, x[j]));
        }
    }
    best
}

/// Depth-first branch-and-bound over the integer columns, floor branch
/// first. Deterministic for identical input and configuration.
pub fn solve_milp_native(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    instance.validate()?;
    config.validate()?;
    let started = Instant::now();
    let model = LpModel::new(instance);
    let ints: Vec<usize> = instance.integer_cols().collect();
    let (lo, hi) = bounds(instance);

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut pruned_bound = f64::INFINITY;
    let mut nodes = 0u64;
    let mut stack = vec![Node {
        lo,
        hi,
        bound: f64::NEG_INFINITY,
        start: None,
    }];
    let mut limit: Option<SolveStatus> = None;

    while let Some(node) = stack.pop() {
        if nodes >= config.node_limit {
            limit = Some(SolveStatus::NodeLimit);
            stack.push(node);
            break;
        }
        if let Some(t) = config.time_limit {
            if started.elapsed().as_secs_f64() > t {
                limit = Some(SolveStatus::TimeLimit);
                stack.push(node);
                break;
            }
        }
        if let Some((_, inc)) = &incumbent {
            if node.bound >= inc - config.gap_tolerance(*inc) {
                pruned_bound = pruned_bound.min(node.bound);
                continue;
            }
        }
        nodes += 1;
        let outcome = match &node.start {
            Some(start) => model.solve_warm(&node.lo, &node.hi, config.feas_tol, start)?,
            None => model.solve(&node.lo, &node.hi, config.feas_tol)?,
        };
        let (x, obj, basis) = match outcome {
            LpOutcome::Infeasible => continue,
            LpOutcome::Optimal {
                x,
                objective,
                basis,
            } => (x, objective, Rc::new(basis)),
        };
        if let Some((_, inc)) = &incumbent {
            if obj >= inc - config.gap_tolerance(*inc) {
                pruned_bound = pruned_bound.min(obj);
                continue;
            }
        }
        match branching_column(&ints, &x, config.int_tol) {
            Some((j, v)) => {
                let mut up = Node {
                    lo: node.lo.clone(),
                    hi: node.hi.clone(),
                    bound: obj,
                    start: Some(Rc::clone(&basis)),
                };
                up.lo[j] = v.ceil();
                let mut down = Node {
                    lo: node.lo,
                    hi: node.hi,
                    bound: obj,
                    start: Some(basis),
                };
                down.hi[j] = v.floor();
                stack.push(up);
                stack.push(down);
            }
            None => {
                let (x, obj) = snap_integers(&model, &ints, &node, x, obj, &basis, config)?;
                incumbent = Some((x, obj));
            }
        }
    }

    let open_bound = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    Ok(match incumbent {
        Some((values, objective)) => MilpSolution {
            status: limit.unwrap_or(SolveStatus::Optimal),
            bound: objective.min(pruned_bound).min(open_bound),
            values,
            objective,
            nodes,
        },
        None => match limit {
            Some(status) => MilpSolution {
                status,
                values: Vec::new(),
                objective: f64::INFINITY,
                bound: pruned_bound.min(open_bound),
                nodes,
            },
            None => MilpSolution::infeasible(nodes),
        },
    })
}

/// Re-solves an integral node with every integer column fixed at its
/// rounded value so the returned point is exactly integral.
fn snap_integers(
    model: &LpModel,
    ints: &[usize],
    node: &Node,
    x: Vec<f64>,
    obj: f64,
    basis: &Basis,
    config: &SolverConfig,
) -> Result<(Vec<f64>, f64), SolverError> {
    if ints.iter().all(|&j| x[j] == x[j].round()) {
        return Ok((x, obj));
    }
    let mut lo = node.lo.clone();
    let mut hi = node.hi.clone();
    for &j in ints {
        let r = x[j].round();
        lo[j] = r;
        hi[j] = r;
    }
    match model.solve_warm(&lo, &hi, config.feas_tol, basis)? {
        LpOutcome::Optimal { x, objective, .. } => Ok((x, objective)),
        LpOutcome::Infeasible => Ok((x, obj)),
    }
}

/// Exhaustive oracle: solves the LP for every assignment of the binary
/// columns and keeps the best. Intended for tests on small instances.
pub fn enumerate_oracle(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    instance.validate()?;
    config.validate()?;
    let ints: Vec<usize> = instance.integer_cols().collect();
    if ints.len() > MAX_ORACLE_BINARIES {
        return Err(SolverError::TooManyBinaries(ints.len()));
    }
    for &j in &ints {
        let v = &instance.vars()[j];
        if v.lower < 0.0 || v.upper > 1.0 {
            return Err(SolverError::Malformed(format!(
                "oracle column {} is not binary",
                v.name
            )));
        }
    }
    let model = LpModel::new(instance);
    let (lo0, hi0) = bounds(instance);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let patterns = 1u64 << ints.len();
    for mask in 0..patterns {
        let mut lo = lo0.clone();
        let mut hi = hi0.clone();
        for (bit, &j) in ints.iter().enumerate() {
            let v = ((mask >> bit) & 1) as f64;
            lo[j] = v;
            hi[j] = v;
        }
        if let LpOutcome::Optimal { x, objective, .. } = model.solve(&lo, &hi, config.feas_tol)? {
            if best.as_ref().is_none_or(|(_, b)| objective < *b) {
                best = Some((x, objective));
            }
        }
    }
    Ok(match best {
        Some((values, objective)) => MilpSolution {
            status: SolveStatus::Optimal,
            values,
            objective,
            bound: objective,
            nodes: patterns,
        },
        None => MilpSolution::infeasible(patterns),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn one_variable_box() {
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", f64::NEG_INFINITY, 5.0, 1.0, false);
        inst.add_row("lb", vec![(x, 1.0)], Sense::Ge, 3.0);
        let sol = solve_lp(&inst, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", 0.0, f64::INFINITY, -3.0, false);
        let y = inst.add_var("y", 0.0, f64::INFINITY, -5.0, false);
        inst.add_row("a", vec![(x, 1.0)], Sense::Le, 4.0);
        inst.add_row("b", vec![(y, 2.0)], Sense::Le, 12.0);
        inst.add_row("c", vec![(x, 3.0), (y, 2.0)], Sense::Le, 18.0);
        let sol = solve_lp(&inst, &cfg()).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-9);
        assert!((sol.values[0] - 2.0).abs() < 1e-9 && (sol.values[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_columns() {
        // min x - y, x + y = 4, x - y free-signed via z = x - y, z >= -10
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", 0.0, 10.0, 1.0, false);
        let y = inst.add_var("y", 0.0, 3.0, -1.0, false);
        let z = inst.add_var("z", f64::NEG_INFINITY, f64::INFINITY, 0.0, false);
        inst.add_row("sum", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 4.0);
        inst.add_row("diff", vec![(z, 1.0), (x, -1.0), (y, 1.0)], Sense::Eq, 0.0);
        let sol = solve_lp(&inst, &cfg()).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-9, "{}", sol.objective);
        assert!((sol.values[2] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_row_is_infeasible() {
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", 0.0, 1.0, 0.0, false);
        let u = inst.add_binary("u", 0.0);
        inst.add_row("need", vec![(x, 1.0), (u, 1.0)], Sense::Ge, 3.0);
        assert_eq!(
            solve_lp(&inst, &cfg()).unwrap().status,
            SolveStatus::Infeasible
        );
        assert_eq!(
            solve_milp_native(&inst, &cfg()).unwrap().status,
            SolveStatus::Infeasible
        );
        assert_eq!(
            enumerate_oracle(&inst, &cfg()).unwrap().status,
            SolveStatus::Infeasible
        );
    }

    #[test]
    fn unbounded_is_an_error() {
        let mut inst = MilpInstance::new();
        inst.add_var("x", 0.0, f64::INFINITY, -1.0, false);
        assert_eq!(solve_lp(&inst, &cfg()), Err(SolverError::Unbounded));
    }

    #[test]
    fn small_knapsack_matches_enumeration() {
        // max 5a + 4b + 3c st 2a + 3b + c <= 5, 4a + b + 2c <= 11 (binaries)
        let mut inst = MilpInstance::new();
        let a = inst.add_binary("a", -5.0);
        let b = inst.add_binary("b", -4.0);
        let c = inst.add_binary("c", -3.0);
        inst.add_row("w1", vec![(a, 2.0), (b, 3.0), (c, 1.0)], Sense::Le, 5.0);
        inst.add_row("w2", vec![(a, 4.0), (b, 1.0), (c, 2.0)], Sense::Le, 11.0);
        inst.add_row("w3", vec![(a, 3.0), (b, 4.0), (c, 2.0)], Sense::Le, 8.0);
        let bb = solve_milp_native(&inst, &cfg()).unwrap();
        let ex = enumerate_oracle(&inst, &cfg()).unwrap();
        assert_eq!(bb.status, SolveStatus::Optimal);
        assert!((bb.objective - ex.objective).abs() < 1e-9);
        assert!((bb.objective + 9.0).abs() < 1e-9);
        assert!(bb.bound <= bb.objective + 1e-12);
    }

    #[test]
    fn oracle_without_binaries_equals_lp() {
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", 0.0, 4.0, -1.0, false);
        inst.add_row("r", vec![(x, 2.0)], Sense::Le, 5.0);
        let lp = solve_lp(&inst, &cfg()).unwrap();
        let ex = enumerate_oracle(&inst, &cfg()).unwrap();
        assert_eq!(lp.values, ex.values);
        assert_eq!(ex.nodes, 1);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let mut inst = MilpInstance::new();
        for i in 0..=MAX_ORACLE_BINARIES {
            inst.add_binary(format!("u{i}"), 1.0);
        }
        assert_eq!(
            enumerate_oracle(&inst, &cfg()),
            Err(SolverError::TooManyBinaries(MAX_ORACLE_BINARIES + 1))
        );
    }

    #[test]
    fn node_limit_is_reported() {
        let mut inst = MilpInstance::new();
        let a = inst.add_binary("a", -1.0);
        let b = inst.add_binary("b", -1.0);
        inst.add_row("r", vec![(a, 2.0), (b, 2.0)], Sense::Le, 3.0);
        let config = SolverConfig {
            node_limit: 1,
            ..cfg()
        };
        let sol = solve_milp_native(&inst, &config).unwrap();
        assert_eq!(sol.status, SolveStatus::NodeLimit);
        assert_eq!(sol.nodes, 1);
    }
}
