use std::fmt::Write as _;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization problem over bounded (or explicitly free) columns with
/// sparse linear rows. Integer columns are branched on by
/// [`solve_milp`](super::solve_milp).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpInstance {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl MilpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        cost: f64,
        integer: bool,
    ) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            integer,
        });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_var(name, 0.0, 1.0, cost, true)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn integer_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.integer)
            .map(|(j, _)| j)
    }

    /// Copy with every integrality flag cleared.
    pub fn relaxed(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.integer = false;
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.cost * x).sum()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let gap = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::Malformed(msg));
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return bad(format!(
                    "column {} has NaN bounds or non-finite cost",
                    v.name
                ));
            }
            if v.lower > v.upper {
                return bad(format!(
                    "column {} has lower bound above upper bound",
                    v.name
                ));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return bad(format!(
                    "column {} has an infinite bound on the wrong side",
                    v.name
                ));
            }
            if v.integer && !(v.lower.is_finite() && v.upper.is_finite()) {
                return bad(format!("integer column {} must be boxed", v.name));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return bad(format!("row {} has a non-finite right-hand side", r.name));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.vars.len() {
                    return bad(format!("row {} references column {j}", r.name));
                }
                if !a.is_finite() {
                    return bad(format!("row {} has a non-finite coefficient", r.name));
                }
            }
        }
        Ok(())
    }

    /// Fixed-format listing of columns, bounds, costs and rows. Two equal
    /// instances produce byte-identical dumps.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "COLUMNS {}", self.vars.len());
        for (j, v) in self.vars.iter().enumerate() {
            let _ = writeln!(
                out,
                "{j:>6} {:<16} {} [{}, {}] cost {}",
                v.name,
                if v.integer { 'I' } else { 'C' },
                fmt_num(v.lower),
                fmt_num(v.upper),
                fmt_num(v.cost),
            );
        }
        let _ = writeln!(out, "ROWS {}", self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(out, "{i:>6} {:<16}", r.name);
            for &(j, a) in &r.coeffs {
                let _ = write!(out, " {}*{}", fmt_num(a), self.vars[j].name);
            }
            let _ = writeln!(out, " {} {}", r.sense.symbol(), fmt_num(r.rhs));
        }
        out
    }
}

/// 12 significant digits in scientific notation, with explicit infinities.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:+.11e}")
    }
}
