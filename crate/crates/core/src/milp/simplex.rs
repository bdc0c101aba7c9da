//! Bounded-variable revised simplex, primal and dual, with an explicit dense
//! basis inverse.
//!
//! Every row gets a slack column so that `A x + s = b`; the slack bounds
//! encode the row sense. A cold start begins from the slack basis, adds an
//! artificial column on each row whose slack cannot start feasible, and runs
//! the primal method on slightly widened bounds so that degenerate ties are
//! rare. Once the true bounds are restored the dual method removes the small
//! infeasibilities the widening leaves behind. A warm start reuses an optimal
//! basis of a related problem and runs the dual method directly.

use super::instance::{MilpInstance, Sense};
use super::SolverError;

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
/// Bound relaxation of the first Harris pass.
const HARRIS_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;
/// Consecutive degenerate pivots before switching to least-index rules.
const STALL_LIMIT: usize = 40;
/// Relative size of the bound widening on cold starts.
const PERTURB: f64 = 5e-7;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic column held at zero.
    Free,
}

/// Optimal basis of a solve, reusable as the start of a related solve that
/// differs only in column bounds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    basis: Vec<usize>,
    state: Vec<State>,
    artificials: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        basis: Basis,
    },
    Infeasible,
}

/// Column-major copy of an instance, built once and solved under many
/// bound vectors.
#[derive(Debug, Clone)]
pub(crate) struct LpModel {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    slack_lo: Vec<f64>,
    slack_hi: Vec<f64>,
    cost: Vec<f64>,
}

/// Deterministic value in `[0, 1)` for column `j`.
fn jitter(j: usize) -> f64 {
    let mut z = (j as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

impl LpModel {
    pub(crate) fn new(instance: &MilpInstance) -> Self {
        let n = instance.num_cols();
        let m = instance.num_rows();
        let mut cols = vec![Vec::new(); n];
        let mut rhs = Vec::with_capacity(m);
        let mut slack_lo = Vec::with_capacity(m);
        let mut slack_hi = Vec::with_capacity(m);
        for (i, row) in instance.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
            rhs.push(row.rhs);
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            slack_lo.push(lo);
            slack_hi.push(hi);
        }
        // Merge duplicate entries so each column has one coefficient per row.
        for col in &mut cols {
            col.sort_by_key(|&(i, _)| i);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|&(_, a)| a != 0.0);
        }
        let cost = instance.vars().iter().map(|v| v.cost).collect();
        Self {
            m,
            n,
            cols,
            rhs,
            slack_lo,
            slack_hi,
            cost,
        }
    }

    fn full_bounds(&self, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        lo.extend_from_slice(&self.slack_lo);
        hi.extend_from_slice(&self.slack_hi);
        (lo, hi)
    }

    /// Solves from the slack basis.
    pub(crate) fn solve(
        &self,
        lower: &[f64],
        upper: &[f64],
        feas_tol: f64,
    ) -> Result<LpOutcome, SolverError> {
        debug_assert_eq!(lower.len(), self.n);
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Ok(LpOutcome::Infeasible);
        }
        let (lo, hi) = self.full_bounds(lower, upper);
        let widen = |b: f64, j: usize| PERTURB * (1.0 + b.abs()) * (1.0 + jitter(j));
        let plo: Vec<f64> = lo
            .iter()
            .enumerate()
            .map(|(j, &b)| b - widen(b, j))
            .collect();
        let phi: Vec<f64> = hi
            .iter()
            .enumerate()
            .map(|(j, &b)| b + widen(b, j + lo.len()))
            .collect();

        let mut t = Tableau::cold(self, plo, phi, feas_tol);
        if !t.artificials.is_empty() {
            t.set_phase_one_costs();
            t.primal()?;
            let first = self.n + self.m;
            let worst = (first..t.num_vars()).map(|j| t.x[j]).fold(0.0, f64::max);
            if worst > feas_tol {
                return Ok(LpOutcome::Infeasible);
            }
            t.close_artificials();
        }
        t.set_phase_two_costs();
        t.primal()?;
        t.restore_bounds(&lo, &hi);
        t.recompute_basics();
        if !t.make_dual_feasible() {
            // Widening never changes reduced costs, so this only happens
            // when the primal pass stopped on a tolerance boundary.
            t.primal_repair()?;
        }
        t.finish(lower, upper)
    }

    /// Solves starting from `start`, an optimal basis of this model under
    /// other column bounds. Falls back to a cold start when the basis cannot
    /// be reused.
    pub(crate) fn solve_warm(
        &self,
        lower: &[f64],
        upper: &[f64],
        feas_tol: f64,
        start: &Basis,
    ) -> Result<LpOutcome, SolverError> {
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Ok(LpOutcome::Infeasible);
        }
        let (lo, hi) = self.full_bounds(lower, upper);
        let Some(mut t) = Tableau::warm(self, lo, hi, start, feas_tol) else {
            return self.solve(lower, upper, feas_tol);
        };
        if !t.make_dual_feasible() {
            return self.solve(lower, upper, feas_tol);
        }
        match t.finish(lower, upper) {
            Err(SolverError::SingularBasis) | Err(SolverError::IterationLimit(_)) => {
                self.solve(lower, upper, feas_tol)
            }
            other => other,
        }
    }
}

struct Tableau<'a> {
    model: &'a LpModel,
    m: usize,
    feas_tol: f64,
    /// (row, sign) of each artificial column.
    artificials: Vec<(usize, f64)>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    /// Row-major `m x m` inverse of the basis matrix.
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    y: Vec<f64>,
    alpha: Vec<f64>,
    entries: Vec<(usize, f64)>,
}

impl<'a> Tableau<'a> {
    fn empty(model: &'a LpModel, lo: Vec<f64>, hi: Vec<f64>, feas_tol: f64) -> Self {
        let m = model.m;
        let total = lo.len();
        Self {
            model,
            m,
            feas_tol,
            artificials: Vec::new(),
            lo,
            hi,
            cost: vec![0.0; total],
            x: vec![0.0; total],
            state: vec![State::Basic; total],
            basis: vec![0; m],
            binv: vec![0.0; m * m],
            since_refactor: 0,
            iterations: 0,
            max_iterations: 50 * (total + m) + 1000,
            y: vec![0.0; m],
            alpha: vec![0.0; m],
            entries: Vec::new(),
        }
    }

    /// Slack basis, with artificials where a slack would start outside its
    /// bounds.
    fn cold(model: &'a LpModel, lo: Vec<f64>, hi: Vec<f64>, feas_tol: f64) -> Self {
        let (n, m) = (model.n, model.m);
        let mut t = Self::empty(model, lo, hi, feas_tol);
        for j in 0..n {
            t.park(j);
        }

        // Row activity of the nonbasic structural start point.
        let mut activity = vec![0.0; m];
        for (j, col) in model.cols.iter().enumerate() {
            if t.x[j] != 0.0 {
                for &(i, a) in col {
                    activity[i] += a * t.x[j];
                }
            }
        }

        for i in 0..m {
            let slack = n + i;
            let r = model.rhs[i] - activity[i];
            if r >= t.lo[slack] && r <= t.hi[slack] {
                t.basis[i] = slack;
                t.state[slack] = State::Basic;
                t.x[slack] = r;
                t.binv[i * m + i] = 1.0;
            } else {
                // Slack parks at the bound nearest to the residual; an
                // artificial absorbs the rest.
                let (s, v) = if r < t.lo[slack] {
                    (State::AtLower, t.lo[slack])
                } else {
                    (State::AtUpper, t.hi[slack])
                };
                t.state[slack] = s;
                t.x[slack] = v;
                let rest = r - v;
                let sign = if rest < 0.0 { -1.0 } else { 1.0 };
                t.artificials.push((i, sign));
                t.basis[i] = n + m + t.artificials.len() - 1;
                t.x.push(rest.abs());
                t.state.push(State::Basic);
                t.lo.push(0.0);
                t.hi.push(f64::INFINITY);
                t.cost.push(0.0);
                t.binv[i * m + i] = sign;
            }
        }
        t.max_iterations = 50 * (t.num_vars() + m) + 1000;
        t
    }

    fn warm(
        model: &'a LpModel,
        mut lo: Vec<f64>,
        mut hi: Vec<f64>,
        start: &Basis,
        feas_tol: f64,
    ) -> Option<Self> {
        let m = model.m;
        if start.basis.len() != m || start.state.len() != lo.len() + start.artificials.len() {
            return None;
        }
        for _ in &start.artificials {
            lo.push(0.0);
            hi.push(0.0);
        }
        let mut t = Self::empty(model, lo, hi, feas_tol);
        t.artificials = start.artificials.clone();
        t.basis = start.basis.clone();
        t.state = start.state.clone();
        for j in 0..t.num_vars() {
            match t.state[j] {
                State::Basic => {}
                State::AtLower if t.lo[j].is_finite() => t.x[j] = t.lo[j],
                State::AtUpper if t.hi[j].is_finite() => t.x[j] = t.hi[j],
                _ => t.park(j),
            }
        }
        t.set_phase_two_costs();
        t.refactor().ok()?;
        Some(t)
    }

    /// Makes column `j` nonbasic at its lower bound, else its upper bound,
    /// else free at zero.
    fn park(&mut self, j: usize) {
        let (s, v) = if self.lo[j].is_finite() {
            (State::AtLower, self.lo[j])
        } else if self.hi[j].is_finite() {
            (State::AtUpper, self.hi[j])
        } else {
            (State::Free, 0.0)
        };
        self.state[j] = s;
        self.x[j] = v;
    }

    fn num_vars(&self) -> usize {
        self.x.len()
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    fn set_phase_one_costs(&mut self) {
        let first = self.model.n + self.m;
        for (j, c) in self.cost.iter_mut().enumerate() {
            *c = if j >= first { 1.0 } else { 0.0 };
        }
    }

    fn set_phase_two_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.model.n].copy_from_slice(&self.model.cost);
    }

    /// Pins every artificial to zero. Basic artificials stay in the basis at
    /// a fixed zero level and leave on the next pivot that touches their row.
    fn close_artificials(&mut self) {
        let first = self.model.n + self.m;
        for j in first..self.num_vars() {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if self.state[j] != State::Basic {
                self.state[j] = State::AtLower;
                self.x[j] = 0.0;
            }
        }
    }

    /// Replaces the structural and slack bounds and moves nonbasic columns
    /// onto them. Basic values are left for the caller to recompute.
    fn restore_bounds(&mut self, lo: &[f64], hi: &[f64]) {
        self.lo[..lo.len()].copy_from_slice(lo);
        self.hi[..hi.len()].copy_from_slice(hi);
        for j in 0..lo.len() {
            match self.state[j] {
                State::Basic => {}
                State::AtLower if self.lo[j].is_finite() => self.x[j] = self.lo[j],
                State::AtUpper if self.hi[j].is_finite() => self.x[j] = self.hi[j],
                _ => self.park(j),
            }
        }
    }

    /// Calls `f(row, coefficient)` for every nonzero of column `j`.
    #[inline]
    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        let (n, m) = (self.model.n, self.m);
        if j < n {
            for &(i, a) in &self.model.cols[j] {
                f(i, a);
            }
        } else if j < n + m {
            f(j - n, 1.0);
        } else {
            let (i, s) = self.artificials[j - n - m];
            f(i, s);
        }
    }

    fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each_entry(j, |i, a| acc += a * v[i]);
        acc
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting and recomputes the basic values from scratch.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for k in 0..m {
            self.for_each_entry(self.basis[k], |i, v| a[i * m + k] = v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut p = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < SINGULAR_TOL {
                return Err(SolverError::SingularBasis);
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            let (above, rest) = a.split_at_mut(c * m);
            let (arow, below) = rest.split_at_mut(m);
            let (iabove, irest) = inv.split_at_mut(c * m);
            let (irow, ibelow) = irest.split_at_mut(m);
            let rows = above
                .chunks_exact_mut(m)
                .zip(iabove.chunks_exact_mut(m))
                .chain(below.chunks_exact_mut(m).zip(ibelow.chunks_exact_mut(m)));
            for (ar, ir) in rows {
                let f = ar[c];
                if f == 0.0 {
                    continue;
                }
                for (v, p) in ar[c..].iter_mut().zip(&arow[c..]) {
                    *v -= f * p;
                }
                for (v, p) in ir.iter_mut().zip(irow.iter()) {
                    if *p != 0.0 {
                        *v -= f * p;
                    }
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = self.model.rhs.clone();
        for j in 0..self.num_vars() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_each_entry(j, |i, a| r[i] -= a * xj);
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.basis[i]] = row.iter().zip(&r).map(|(b, v)| b * v).sum();
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, b) in self.y.iter_mut().zip(row) {
                    *yk += cb * b;
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        self.cost[j] - self.column_dot(j, &self.y)
    }

    /// alpha = B^-1 a_q
    fn load_column(&mut self, q: usize) {
        let m = self.m;
        let mut entries = std::mem::take(&mut self.entries);
        entries.clear();
        self.for_each_entry(q, |k, a| entries.push((k, a)));
        for (i, ai) in self.alpha.iter_mut().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            *ai = entries.iter().map(|&(k, a)| row[k] * a).sum();
        }
        self.entries = entries;
    }

    /// Flips boxed nonbasic columns whose reduced cost has the wrong sign.
    /// Returns false when a column without a finite opposite bound is dual
    /// infeasible.
    fn make_dual_feasible(&mut self) -> bool {
        self.compute_duals();
        let mut flipped = false;
        for j in 0..self.num_vars() {
            if self.state[j] == State::Basic || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            match self.state[j] {
                State::AtLower if d < -DUAL_TOL => {
                    if !self.hi[j].is_finite() {
                        return false;
                    }
                    self.state[j] = State::AtUpper;
                    self.x[j] = self.hi[j];
                    flipped = true;
                }
                State::AtUpper if d > DUAL_TOL => {
                    if !self.lo[j].is_finite() {
                        return false;
                    }
                    self.state[j] = State::AtLower;
                    self.x[j] = self.lo[j];
                    flipped = true;
                }
                State::Free if d.abs() > DUAL_TOL => return false,
                _ => {}
            }
        }
        if flipped {
            self.recompute_basics();
        }
        true
    }

    /// Dual simplex, then a primal polish. Extracts the structural point.
    fn finish(mut self, lower: &[f64], upper: &[f64]) -> Result<LpOutcome, SolverError> {
        if !self.dual()? {
            return Ok(LpOutcome::Infeasible);
        }
        self.primal()?;
        let n = self.model.n;
        let x: Vec<f64> = (0..n)
            .map(|j| self.x[j].clamp(lower[j], upper[j]))
            .collect();
        let objective = x.iter().zip(&self.model.cost).map(|(x, c)| x * c).sum();
        Ok(LpOutcome::Optimal {
            x,
            objective,
            basis: Basis {
                basis: self.basis,
                state: self.state,
                artificials: self.artificials,
            },
        })
    }

    /// Fallback when the restored basis is neither primal nor dual feasible:
    /// a fresh phase one with true bounds from the current basis values.
    fn primal_repair(&mut self) -> Result<(), SolverError> {
        let (lo, hi): (Vec<f64>, Vec<f64>) = {
            let k = self.model.n + self.model.m;
            (self.lo[..k].to_vec(), self.hi[..k].to_vec())
        };
        let mut fresh = Tableau::cold(self.model, lo.clone(), hi.clone(), self.feas_tol);
        if !fresh.artificials.is_empty() {
            fresh.set_phase_one_costs();
            fresh.primal()?;
            fresh.close_artificials();
        }
        fresh.set_phase_two_costs();
        fresh.primal()?;
        fresh.restore_bounds(&lo, &hi);
        std::mem::swap(self, &mut fresh);
        self.recompute_basics();
        Ok(())
    }

    /// Entering column and its direction of motion, or `None` at optimality.
    /// Dantzig pricing by default; least index when `least_index` is set.
    fn price(&self, least_index: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.num_vars() {
            if self.state[j] == State::Basic || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            let improving = match self.state[j] {
                State::AtLower => d < -DUAL_TOL,
                State::AtUpper => d > DUAL_TOL,
                _ => d.abs() > DUAL_TOL,
            };
            if !improving {
                continue;
            }
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            if least_index {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Primal simplex from a primal feasible basis.
    fn primal(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        let mut degenerate_run = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            self.compute_duals();
            let Some((q, dir)) = self.price(degenerate_run >= STALL_LIMIT) else {
                if self.since_refactor > 0 {
                    // Confirm optimality on a fresh factorization.
                    self.refactor()?;
                    self.compute_duals();
                    if self.price(false).is_some() {
                        continue;
                    }
                }
                return Ok(());
            };
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(SolverError::IterationLimit(self.max_iterations));
            }
            self.load_column(q);

            let bland = degenerate_run >= STALL_LIMIT;
            let span = self.hi[q] - self.lo[q];
            let (leave, theta) = self.ratio_test(dir, span, bland);
            if leave.is_none() && theta == f64::INFINITY {
                return Err(SolverError::Unbounded);
            }

            if theta > 0.0 {
                self.x[q] += dir * theta;
                for i in 0..m {
                    let a = self.alpha[i];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * theta * a;
                    }
                }
            }
            if theta > RATIO_TIE {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }

            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.state[q] = State::AtUpper;
                        self.x[q] = self.hi[q];
                    } else {
                        self.state[q] = State::AtLower;
                        self.x[q] = self.lo[q];
                    }
                }
                Some(r) => {
                    let b = self.basis[r];
                    let g = dir * self.alpha[r];
                    if g > 0.0 {
                        self.state[b] = State::AtLower;
                        self.x[b] = self.lo[b];
                    } else {
                        self.state[b] = State::AtUpper;
                        self.x[b] = self.hi[b];
                    }
                    self.basis[r] = q;
                    self.state[q] = State::Basic;
                    self.pivot(r);
                }
            }
        }
    }

    /// Leaving row (or `None` for a bound flip) and step length of a primal
    /// iteration.
    ///
    /// Harris two-pass rule: the first pass finds the largest step that keeps
    /// every basic variable within its bounds relaxed by `HARRIS_TOL`, the
    /// second picks the largest pivot among rows that block within that step.
    /// Under least-index mode the textbook minimum ratio with lowest basic
    /// index wins instead.
    fn ratio_test(&self, dir: f64, span: f64, bland: bool) -> (Option<usize>, f64) {
        let m = self.m;
        let amax = self.alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = PIVOT_TOL * amax.max(1.0);
        let limit = |i: usize, relax: f64| -> Option<(f64, f64)> {
            let g = dir * self.alpha[i];
            if g.abs() <= tol {
                return None;
            }
            let b = self.basis[i];
            let t = if g > 0.0 {
                if self.lo[b] == f64::NEG_INFINITY {
                    return None;
                }
                (self.x[b] - self.lo[b] + relax) / g
            } else {
                if self.hi[b] == f64::INFINITY {
                    return None;
                }
                (self.hi[b] - self.x[b] + relax) / -g
            };
            Some((t.max(0.0), g.abs()))
        };

        if bland {
            let mut theta = span;
            let mut leave: Option<usize> = None;
            for i in 0..m {
                let Some((t, _)) = limit(i, 0.0) else {
                    continue;
                };
                let take = match leave {
                    None => t < theta,
                    Some(l) => {
                        t < theta - RATIO_TIE
                            || (t <= theta + RATIO_TIE && self.basis[i] < self.basis[l])
                    }
                };
                if take {
                    theta = t;
                    leave = Some(i);
                }
            }
            return (leave, theta);
        }

        let mut relaxed = f64::INFINITY;
        for i in 0..m {
            if let Some((t, _)) = limit(i, HARRIS_TOL) {
                relaxed = relaxed.min(t);
            }
        }
        if span <= relaxed {
            return (None, span);
        }
        let mut leave: Option<usize> = None;
        let mut best = 0.0;
        let mut theta = f64::INFINITY;
        for i in 0..m {
            let Some((t, g)) = limit(i, 0.0) else {
                continue;
            };
            if t <= relaxed && g > best {
                best = g;
                theta = t;
                leave = Some(i);
            }
        }
        (leave, theta)
    }

    /// Most infeasible basic row, if any exceeds the feasibility tolerance.
    fn dual_leaving_row(&self) -> Option<usize> {
        let mut worst = self.feas_tol;
        let mut row = None;
        for (i, &b) in self.basis.iter().enumerate() {
            let v = if self.x[b] < self.lo[b] {
                self.lo[b] - self.x[b]
            } else if self.x[b] > self.hi[b] {
                self.x[b] - self.hi[b]
            } else {
                continue;
            };
            if v > worst {
                worst = v;
                row = Some(i);
            }
        }
        row
    }

    /// Dual simplex from a dual feasible basis. Returns false when a row
    /// proves the problem infeasible.
    fn dual(&mut self) -> Result<bool, SolverError> {
        let m = self.m;
        let mut rho = vec![0.0; m];
        let mut cand: Vec<(usize, f64, f64)> = Vec::new();
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let Some(r) = self.dual_leaving_row() else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(true);
            };
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(SolverError::IterationLimit(self.max_iterations));
            }
            self.compute_duals();
            let b = self.basis[r];
            let target = if self.x[b] < self.lo[b] {
                self.lo[b]
            } else {
                self.hi[b]
            };
            let delta = self.x[b] - target;
            let sign = delta.signum();
            rho.copy_from_slice(&self.binv[r * m..(r + 1) * m]);

            // Columns whose motion pushes the leaving variable toward its
            // violated bound: (column, |alpha_rj|, dual ratio numerator).
            cand.clear();
            for j in 0..self.num_vars() {
                if self.state[j] == State::Basic || self.is_fixed(j) {
                    continue;
                }
                let g = sign * self.column_dot(j, &rho);
                if g.abs() <= PIVOT_TOL {
                    continue;
                }
                let d = self.reduced_cost(j);
                let slack = match self.state[j] {
                    State::AtLower if g > 0.0 => d,
                    State::AtUpper if g < 0.0 => -d,
                    State::Free => d.abs(),
                    _ => continue,
                };
                cand.push((j, g.abs(), slack.max(0.0)));
            }
            if cand.is_empty() {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(false);
            }
            let relaxed = cand
                .iter()
                .map(|&(_, g, s)| (s + HARRIS_TOL) / g)
                .fold(f64::INFINITY, f64::min);
            let mut q = cand[0].0;
            let mut best = 0.0;
            for &(j, g, s) in &cand {
                if s / g <= relaxed && g > best {
                    best = g;
                    q = j;
                }
            }

            self.load_column(q);
            let piv = self.alpha[r];
            if piv.abs() <= PIVOT_TOL {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Err(SolverError::SingularBasis);
            }
            let theta = delta / piv;
            self.x[q] += theta;
            for i in 0..m {
                let a = self.alpha[i];
                if a != 0.0 {
                    self.x[self.basis[i]] -= theta * a;
                }
            }
            self.x[b] = target;
            self.state[b] = if target == self.lo[b] {
                State::AtLower
            } else {
                State::AtUpper
            };
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.pivot(r);
        }
    }

    /// Updates the basis inverse after column `alpha` replaced row `r`.
    fn pivot(&mut self, r: usize) {
        let m = self.m;
        let piv = self.alpha[r];
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (i, chunk) in head.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[i];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (k, chunk) in tail.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[r + 1 + k];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.since_refactor += 1;
    }
}
