//! Dense bounded-variable simplex.
//!
//! Both stage-game solvers sit on this kernel. Problems here are small (tens
//! to a few hundred columns), so a dense tableau with explicit basic values is
//! enough. Variables carry their own bounds: a nonbasic variable rests at its
//! lower or upper bound, and the ratio test includes bound flips, so `[0, 1]`
//! boxes and fixed binaries cost no extra rows.
//!
//! Pricing is Dantzig's largest-coefficient rule; after a run of degenerate
//! pivots the solver switches to Bland's rule for the rest of the phase.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("iteration limit of {0} pivots exceeded")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point in the caller's variables; empty unless optimal.
    pub x: Vec<f64>,
    /// Objective at `x` in the caller's sense; NaN unless optimal.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coeffs: Vec<f64>,
    kind: RowKind,
    rhs: f64,
}

/// `optimize c.x` subject to `A_le x <= b_le`, `A_eq x = b_eq`, `lo <= x <= hi`.
///
/// Variables default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { sense, objective, rows: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.rows.push(Row { coeffs, kind: RowKind::Le, rhs });
        self
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.rows.push(Row { coeffs: coeffs.into_iter().map(|c| -c).collect(), kind: RowKind::Le, rhs: -rhs });
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.rows.push(Row { coeffs, kind: RowKind::Eq, rhs });
        self
    }

    /// Evaluate the objective at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.kind {
                RowKind::Le => lhs - row.rhs,
                RowKind::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Malformed(format!("row {k} has {} coefficients, expected {n}", row.coeffs.len())));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {k} has a non-finite entry")));
            }
        }
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable {k} has invalid bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + x'
    Shift { col: usize, lo: f64 },
    /// x = hi - x'
    Reflect { col: usize, hi: f64 },
    /// x = x+ - x-
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m x n`, always `B^-1 A`.
    t: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    /// Reduced costs for maximisation.
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.n + j]
    }

    fn value_of(&self, j: usize) -> f64 {
        if self.is_basic[j] {
            let r = self.basis.iter().position(|&b| b == j).expect("basic column has a row");
            self.beta[r]
        } else if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn set_costs(&mut self, c: &[f64]) {
        let n = self.n;
        let mut d = c.to_vec();
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * n..(i + 1) * n];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.d = d;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let p = self.t[r * n + q];
        for v in &mut self.t[r * n..(r + 1) * n] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        for row in before.chunks_exact_mut(n).chain(after.chunks_exact_mut(n)) {
            let f = row[q];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, &pv) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * pv;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    /// Run primal simplex on the current costs; `allowed[j]` gates entering columns.
    fn optimize(&mut self, allowed: &[bool]) -> Result<Phase, LpError> {
        let mut bland = false;
        let mut degenerate_run = 0usize;
        loop {
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.is_basic[j] || !allowed[j] {
                    continue;
                }
                let score = if self.at_upper[j] { -self.d[j] } else { self.d[j] };
                if score > COST_TOL {
                    match entering {
                        None => entering = Some((j, score)),
                        Some((_, best)) if !bland && score > best => entering = Some((j, score)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(Phase::Optimal);
            };

            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }

            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let a = dir * self.at(i, q);
                let b = self.basis[i];
                let limit = if a > PIVOT_TOL {
                    self.beta[i].max(0.0) / a
                } else if a < -PIVOT_TOL && self.upper[b].is_finite() {
                    (self.upper[b] - self.beta[i]).max(0.0) / -a
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < theta - 1e-12 => true,
                    Some((r, _)) if bland && limit <= theta + 1e-12 => b < self.basis[r],
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((i, a < 0.0));
                }
            }
            if theta == f64::INFINITY {
                return Ok(Phase::Unbounded);
            }

            for i in 0..self.m {
                let a = self.at(i, q);
                if a != 0.0 {
                    self.beta[i] -= dir * a * theta;
                }
            }
            match leave {
                None => self.at_upper[q] = !self.at_upper[q],
                Some((r, to_upper)) => {
                    let entering_value = if self.at_upper[q] { self.upper[q] } else { 0.0 } + dir * theta;
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper;
                    self.pivot(r, q);
                    self.beta[r] = entering_value;
                    self.at_upper[q] = false;
                }
            }
            for (i, v) in self.beta.iter_mut().enumerate() {
                let ub = self.upper[self.basis[i]];
                if *v < 0.0 && *v > -FEAS_TOL {
                    *v = 0.0;
                } else if *v > ub && *v < ub + FEAS_TOL {
                    *v = ub;
                }
            }

            if theta < 1e-12 {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
        }
    }
}

/// Solve `p`. Infeasible and unbounded programs are reported through
/// [`LpStatus`]; only malformed input and pivot-limit exhaustion are errors.
pub fn lp_solve(p: &LinearProgram) -> Result<LpSolution, LpError> {
    p.validate()?;

    // Columns for the original variables.
    let mut maps = Vec::with_capacity(p.num_vars());
    let mut upper = Vec::new();
    for &(lo, hi) in &p.bounds {
        let map = if lo.is_finite() {
            upper.push(hi - lo);
            VarMap::Shift { col: upper.len() - 1, lo }
        } else if hi.is_finite() {
            upper.push(f64::INFINITY);
            VarMap::Reflect { col: upper.len() - 1, hi }
        } else {
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            VarMap::Split { pos: upper.len() - 2, neg: upper.len() - 1 }
        };
        maps.push(map);
    }
    let structural = upper.len();
    let m = p.rows.len();

    // Rows rewritten over the structural columns, rhs adjusted for shifts.
    let mut rows: Vec<(Vec<f64>, RowKind, f64)> = Vec::with_capacity(m);
    for row in &p.rows {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = row.rhs;
        for (k, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[k] {
                VarMap::Shift { col, lo } => {
                    coeffs[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Reflect { col, hi } => {
                    coeffs[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, row.kind, rhs));
    }

    let slack_count = rows.iter().filter(|r| r.1 == RowKind::Le).count();
    // An artificial is needed unless the row has a +1 slack and a nonnegative rhs.
    let needs_art: Vec<bool> = rows.iter().map(|(_, kind, rhs)| *kind == RowKind::Eq || *rhs < 0.0).collect();
    let art_count = needs_art.iter().filter(|&&b| b).count();
    let n = structural + slack_count + art_count;

    let mut t = vec![0.0; m * n];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0; m];
    upper.resize(structural + slack_count, f64::INFINITY);
    upper.resize(n, f64::INFINITY);
    let mut slack_col = structural;
    let mut art_col = structural + slack_count;
    for (i, (coeffs, kind, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * n..(i + 1) * n];
        for (dst, &a) in row.iter_mut().zip(coeffs) {
            *dst = sign * a;
        }
        beta[i] = sign * rhs;
        if *kind == RowKind::Le {
            row[slack_col] = sign;
            if !needs_art[i] {
                basis[i] = slack_col;
            }
            slack_col += 1;
        }
        if needs_art[i] {
            row[art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        }
    }

    let mut is_basic = vec![false; n];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        beta,
        basis,
        upper,
        at_upper: vec![false; n],
        is_basic,
        d: vec![0.0; n],
        iterations: 0,
        max_iterations: 50_000 + 100 * (m + n),
    };
    let first_art = structural + slack_count;

    if art_count > 0 {
        let phase1: Vec<f64> = (0..n).map(|j| if j >= first_art { -1.0 } else { 0.0 }).collect();
        tab.set_costs(&phase1);
        let allowed: Vec<bool> = (0..n).map(|j| j < first_art).collect();
        tab.optimize(&allowed)?;
        let infeasibility: f64 = (0..m).filter(|&i| tab.basis[i] >= first_art).map(|i| tab.beta[i]).sum();
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::NAN });
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < first_art {
                continue;
            }
            let candidate = (0..first_art)
                .filter(|&j| !tab.is_basic[j])
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()))
                .filter(|&j| tab.at(r, j).abs() > PIVOT_TOL);
            if let Some(q) = candidate {
                let value = if tab.at_upper[q] { tab.upper[q] } else { 0.0 };
                let leaving = tab.basis[r];
                tab.at_upper[leaving] = false;
                tab.pivot(r, q);
                tab.beta[r] = value;
                tab.at_upper[q] = false;
            }
        }
        for j in first_art..n {
            tab.upper[j] = 0.0;
        }
    }

    let sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut costs = vec![0.0; n];
    for (k, &c) in p.objective.iter().enumerate() {
        let c = sign * c;
        match maps[k] {
            VarMap::Shift { col, .. } => costs[col] += c,
            VarMap::Reflect { col, .. } => costs[col] -= c,
            VarMap::Split { pos, neg } => {
                costs[pos] += c;
                costs[neg] -= c;
            }
        }
    }
    tab.set_costs(&costs);
    let allowed: Vec<bool> = (0..n).map(|j| j < first_art).collect();
    if let Phase::Unbounded = tab.optimize(&allowed)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: Vec::new(), objective: f64::NAN });
    }

    let col_values: Vec<f64> = (0..structural).map(|j| tab.value_of(j)).collect();
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lo } => lo + col_values[col],
            VarMap::Reflect { col, hi } => hi - col_values[col],
            VarMap::Split { pos, neg } => col_values[pos] - col_values[neg],
        })
        .collect();
    let objective = p.evaluate(&x);
    Ok(LpSolution { status: LpStatus::Optimal, x, objective })
}

/// Outcome of [`branch_and_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub nodes: usize,
}

/// Depth-first branch-and-bound over the 0/1 variables `binaries` of `p`.
///
/// Each node is the LP relaxation with some binaries fixed through their
/// bounds. The most fractional-looking binary (largest value) is branched on,
/// up-branch first. Returns `None` when no integral point exists.
pub fn branch_and_bound(p: &LinearProgram, binaries: &[usize]) -> Result<Option<MilpSolution>, LpError> {
    const INTEGRALITY_TOL: f64 = 1e-7;
    let sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut best: Option<MilpSolution> = None;
    let mut nodes = 0usize;
    let mut stack = vec![p.clone()];
    while let Some(node) = stack.pop() {
        nodes += 1;
        let relaxed = lp_solve(&node)?;
        match relaxed.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(LpError::Malformed("relaxation is unbounded".into()));
            }
            LpStatus::Optimal => {}
        }
        if let Some(inc) = &best {
            if sign * relaxed.objective <= sign * inc.objective + 1e-9 {
                continue;
            }
        }
        let branch_var = binaries
            .iter()
            .copied()
            .filter(|&k| {
                let v = relaxed.x[k];
                (v - v.round()).abs() > INTEGRALITY_TOL
            })
            .max_by(|&a, &b| relaxed.x[a].total_cmp(&relaxed.x[b]).then(b.cmp(&a)));
        match branch_var {
            None => {
                best = Some(MilpSolution { x: relaxed.x, objective: relaxed.objective, nodes });
            }
            Some(k) => {
                let mut down = node.clone();
                down.set_bounds(k, 0.0, 0.0);
                let mut up = node;
                up.set_bounds(k, 1.0, 1.0);
                stack.push(down);
                stack.push(up);
            }
        }
    }
    Ok(best.map(|mut s| {
        s.nodes = nodes;
        s
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn single_bounded_variable() {
        let mut p = LinearProgram::maximize(vec![1.0]);
        p.add_le(vec![1.0], 5.0);
        let s = lp_solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_close(s.x[0], 5.0);
        assert_close(s.objective, 5.0);
    }

    #[test]
    fn unbounded_ray() {
        let p = LinearProgram::maximize(vec![1.0]);
        assert_eq!(lp_solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn degenerate_optimal_face() {
        let mut p = LinearProgram::maximize(vec![1.0, 1.0]);
        p.add_le(vec![1.0, 1.0], 1.0);
        let s = lp_solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_close(s.objective, 1.0);
        // a vertex of the face: one coordinate is 0
        assert!(s.x.iter().any(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn infeasible_system() {
        let mut p = LinearProgram::maximize(vec![1.0, 0.0]);
        p.add_le(vec![1.0, 1.0], 1.0);
        p.add_ge(vec![1.0, 1.0], 2.0);
        assert_eq!(lp_solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_free_variable() {
        // min y s.t. y >= x - 3, y >= 1 - x, x in [0, 10], y free  -> x = 2, y = -1
        let mut p = LinearProgram::minimize(vec![0.0, 1.0]);
        p.set_bounds(0, 0.0, 10.0).set_free(1);
        p.add_le(vec![1.0, -1.0], 3.0);
        p.add_le(vec![-1.0, -1.0], -1.0);
        let s = lp_solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_close(s.x[0], 2.0);
        assert_close(s.objective, -1.0);

        let mut q = LinearProgram::maximize(vec![3.0, 2.0, 1.0]);
        q.add_eq(vec![1.0, 1.0, 1.0], 1.0);
        q.set_bounds(0, 0.0, 0.25);
        let s = lp_solve(&q).unwrap();
        assert_close(s.objective, 0.75 + 1.5);
        assert_close(s.x[0], 0.25);
    }

    #[test]
    fn negative_lower_and_upper_only_bounds() {
        // max -x - y, x in [-2, 4], y <= 3 (no lower) with x + y >= -5
        let mut p = LinearProgram::maximize(vec![-1.0, -1.0]);
        p.set_bounds(0, -2.0, 4.0).set_bounds(1, f64::NEG_INFINITY, 3.0);
        p.add_ge(vec![1.0, 1.0], -5.0);
        let s = lp_solve(&p).unwrap();
        assert_close(s.objective, 5.0);
        assert!(p.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn fixed_variables_through_bounds() {
        let mut p = LinearProgram::maximize(vec![1.0, 1.0]);
        p.set_bounds(0, 1.0, 1.0).set_bounds(1, 0.0, 1.0);
        p.add_le(vec![1.0, 1.0], 1.5);
        let s = lp_solve(&p).unwrap();
        assert_close(s.x[0], 1.0);
        assert_close(s.x[1], 0.5);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut p = LinearProgram::maximize(vec![1.0, 1.0]);
        p.add_le(vec![1.0], 1.0);
        assert!(matches!(lp_solve(&p), Err(LpError::Malformed(_))));
        let mut p = LinearProgram::maximize(vec![1.0]);
        p.set_bounds(0, 2.0, 1.0);
        assert!(matches!(lp_solve(&p), Err(LpError::Malformed(_))));
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LinearProgram::maximize(vec![1.0, 2.0]);
        p.add_eq(vec![1.0, 1.0], 1.0);
        p.add_eq(vec![2.0, 2.0], 2.0);
        p.set_bounds(0, 0.0, 1.0).set_bounds(1, 0.0, 1.0);
        let s = lp_solve(&p).unwrap();
        assert_close(s.objective, 2.0);
    }

    #[test]
    fn knapsack_branch_and_bound() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8, binaries
        let mut p = LinearProgram::maximize(vec![5.0, 4.0, 3.0]);
        p.add_le(vec![2.0, 3.0, 1.0], 5.0);
        p.add_le(vec![4.0, 1.0, 2.0], 11.0);
        p.add_le(vec![3.0, 4.0, 2.0], 8.0);
        for k in 0..3 {
            p.set_bounds(k, 0.0, 1.0);
        }
        let s = branch_and_bound(&p, &[0, 1, 2]).unwrap().unwrap();
        // (1,1,0) is feasible with 9; (1,1,1) breaks the first row
        assert_close(s.objective, 9.0);
        assert_close(s.x[0], 1.0);
        assert_close(s.x[1], 1.0);

        let mut q = LinearProgram::maximize(vec![1.0]);
        q.set_bounds(0, 0.0, 1.0);
        q.add_le(vec![2.0], 1.5);
        q.add_ge(vec![2.0], 0.5);
        assert!(branch_and_bound(&q, &[0]).unwrap().is_none());
    }

    #[test]
    fn klee_minty_cube() {
        // max sum 2^(n-j) x_j  s.t. 2 sum_{j<i} 2^(i-j) x_j + x_i <= 5^i
        let n = 6;
        let obj: Vec<f64> = (0..n).map(|j| 2f64.powi((n - 1 - j) as i32)).collect();
        let mut p = LinearProgram::maximize(obj);
        for i in 0..n {
            let mut row = vec![0.0; n];
            for (j, r) in row.iter_mut().enumerate().take(i) {
                *r = 2f64.powi((i - j + 1) as i32);
            }
            row[i] = 1.0;
            p.add_le(row, 5f64.powi(i as i32 + 1));
        }
        let s = lp_solve(&p).unwrap();
        assert_close(s.objective, 5f64.powi(n as i32));
    }
}
