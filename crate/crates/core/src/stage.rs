//! One-stage Stackelberg games: the leader commits to a mixed strategy over
//! rows, the follower answers with a pure column.
//!
//! Three routes compute the same equilibrium:
//!
//! * [`solve_stackelberg_milp`]: the big-M MILP in which the follower's LP is
//!   replaced by its KKT conditions and the bilinear leader objective is
//!   linearised through the joint variable `z[i][j] = pi_A[i] * pi_B[j]`.
//!   The one-hot follower binaries are enumerated; every leaf is the MILP with
//!   `pi_B` fixed, presolved to the column it selects.
//! * [`solve_stackelberg_milp_branch_and_bound`]: the same MILP, unreduced,
//!   handed to LP-relaxation branch-and-bound.
//! * [`solve_stackelberg_multilp`]: one LP per follower column, no duals and
//!   no big-M. This is the oracle the MILP is checked against.
//!
//! Ties among follower best responses resolve in the leader's favour.

use std::fmt::Write as _;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{expected_stage_value, Matrix, MixedPolicy, PurePolicy, StochasticGame, ValueTable};
use crate::lp::{branch_and_bound, lp_solve, LinearProgram, LpStatus};

/// Tolerance used to detect follower ties.
pub const BEST_RESPONSE_TOLERANCE: f64 = 1e-9;

/// Improvement a later follower column needs to displace an earlier one.
const COLUMN_TIE_TOLERANCE: f64 = 1e-9;

/// Leader and follower payoff-plus-continuation matrices of one stage game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMatrices {
    leader: Matrix,
    follower: Matrix,
}

impl StageMatrices {
    pub fn new(leader: Matrix, follower: Matrix) -> Result<Self> {
        if leader.rows() != follower.rows() || leader.cols() != follower.cols() {
            return Err(Error::contract(format!(
                "stage matrices disagree: {}x{} vs {}x{}",
                leader.rows(),
                leader.cols(),
                follower.rows(),
                follower.cols()
            )));
        }
        if !leader.is_finite() || !follower.is_finite() {
            return Err(Error::contract("stage matrix has a non-finite entry"));
        }
        Ok(StageMatrices { leader, follower })
    }

    pub fn from_rows(leader: Vec<Vec<f64>>, follower: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(leader)?, Matrix::from_rows(follower)?)
    }

    pub fn leader(&self) -> &Matrix {
        &self.leader
    }

    pub fn follower(&self) -> &Matrix {
        &self.follower
    }

    pub fn leader_actions(&self) -> usize {
        self.leader.rows()
    }

    pub fn follower_actions(&self) -> usize {
        self.leader.cols()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.leader_actions() == 0 || self.follower_actions() == 0 {
            return Err(Error::contract("stage game has an empty action set"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSolution {
    pub leader_policy: MixedPolicy,
    pub follower_action: PurePolicy,
    pub leader_value: f64,
    pub follower_value: f64,
}

impl StageSolution {
    fn evaluate(m: &StageMatrices, leader_policy: MixedPolicy, follower_action: PurePolicy) -> Result<Self> {
        let leader_value = expected_stage_value(&m.leader, &leader_policy, follower_action)?;
        let follower_value = expected_stage_value(&m.follower, &leader_policy, follower_action)?;
        Ok(StageSolution { leader_policy, follower_action, leader_value, follower_value })
    }

    /// True when the follower had more than one best response to the committed policy.
    pub fn follower_tie(&self, m: &StageMatrices) -> bool {
        follower_best_response_set(m.follower(), &self.leader_policy)
            .map(|set| set.len() > 1)
            .unwrap_or(false)
    }
}

/// Fold stage utilities and discounted continuation values into stage matrices.
///
/// With `v_next = None` the continuation is the terminal utility of each successor.
pub fn build_stage_matrices<G: StochasticGame>(
    s: &G::State,
    game: &G,
    v_next: Option<&ValueTable<G::State>>,
) -> Result<StageMatrices>
where
    G::State: Hash + Eq,
{
    let leader_actions = game.leader_actions(s);
    let follower_actions = game.follower_actions(s);
    let gamma = game.discount();
    let mut ua = Matrix::zeros(leader_actions.len(), follower_actions.len());
    let mut ub = ua.clone();
    for (i, a) in leader_actions.iter().enumerate() {
        for (j, b) in follower_actions.iter().enumerate() {
            let u = game.stage_utility(s, a, b);
            let (mut ca, mut cb) = (0.0, 0.0);
            for (succ, p) in game.transition(s, a, b).iter() {
                let v = match v_next {
                    Some(table) => table.require(succ)?,
                    None => game.terminal_utility(succ),
                };
                ca += p * v.leader;
                cb += p * v.follower;
            }
            ua.set(i, j, u.leader + gamma * ca);
            ub.set(i, j, u.follower + gamma * cb);
        }
    }
    StageMatrices::new(ua, ub)
}

/// All follower columns within [`BEST_RESPONSE_TOLERANCE`] of the best reply to `pi_a`.
pub fn follower_best_response_set(u_b: &Matrix, pi_a: &MixedPolicy) -> Result<Vec<usize>> {
    let payoffs = (0..u_b.cols())
        .map(|j| expected_stage_value(u_b, pi_a, PurePolicy(j)))
        .collect::<Result<Vec<f64>>>()?;
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(payoffs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - BEST_RESPONSE_TOLERANCE)
        .map(|(j, _)| j)
        .collect())
}

/// Per-stage big-M: `2 max|U_B| + 2 spread(U_B) + 1`.
pub fn default_big_m(m: &StageMatrices) -> f64 {
    2.0 * m.follower.max_abs() + 2.0 * m.follower.spread() + 1.0
}

fn check_big_m(m: &StageMatrices, big_m: f64) -> Result<()> {
    // The slack lambda - (U_B^T pi)_k never exceeds the spread of U_B.
    if !big_m.is_finite() || big_m < m.follower.spread() {
        return Err(Error::contract(format!(
            "big-M {big_m} is below the follower payoff spread {}",
            m.follower.spread()
        )));
    }
    Ok(())
}

/// Variable layout of the full stage MILP.
#[derive(Debug, Clone)]
pub struct StageMilp {
    pub program: LinearProgram,
    rows: usize,
    cols: usize,
}

impl StageMilp {
    /// Index of `z[i][j]`.
    pub fn z(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    /// Index of the follower binary for column `j`.
    pub fn follower_binary(&self, j: usize) -> usize {
        self.rows * self.cols + j
    }

    pub fn lambda(&self) -> usize {
        self.rows * self.cols + self.cols
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.cols).map(|j| self.follower_binary(j)).collect()
    }

    /// Leader policy as the row sums of `z`.
    pub fn leader_policy(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| x[self.z(i, j)]).sum()).collect()
    }
}

/// The complete stage MILP with the follower binaries relaxed to `[0, 1]`.
///
/// ```text
/// max  sum U_A (.) z
/// s.t. sum_j pi_B[j] = 1,  sum_ij z = 1,  z 1 <= 1,
///      pi_B <= z^T 1 <= 1,
///      0 <= lambda 1 - U_B^T (z 1) <= M (1 - pi_B),
///      0 <= z <= 1,  pi_B binary,  lambda free
/// ```
pub fn stage_milp(m: &StageMatrices, big_m: f64) -> Result<StageMilp> {
    m.require_nonempty()?;
    check_big_m(m, big_m)?;
    let (rows, cols) = (m.leader_actions(), m.follower_actions());
    let n = rows * cols + cols + 1;
    let layout = StageMilp { program: LinearProgram::maximize(vec![0.0; n]), rows, cols };
    let mut obj = vec![0.0; n];
    for i in 0..rows {
        for j in 0..cols {
            obj[layout.z(i, j)] = m.leader.get(i, j);
        }
    }
    let mut p = LinearProgram::maximize(obj);
    for i in 0..rows {
        for j in 0..cols {
            p.set_bounds(layout.z(i, j), 0.0, 1.0);
        }
    }
    for j in 0..cols {
        p.set_bounds(layout.follower_binary(j), 0.0, 1.0);
    }
    p.set_free(layout.lambda());

    let mut row = vec![0.0; n];
    for j in 0..cols {
        row[layout.follower_binary(j)] = 1.0;
    }
    p.add_eq(row, 1.0);

    let mut row = vec![0.0; n];
    for i in 0..rows {
        for j in 0..cols {
            row[layout.z(i, j)] = 1.0;
        }
    }
    p.add_eq(row, 1.0);

    for i in 0..rows {
        let mut row = vec![0.0; n];
        for j in 0..cols {
            row[layout.z(i, j)] = 1.0;
        }
        p.add_le(row, 1.0);
    }

    for j in 0..cols {
        let mut lower = vec![0.0; n];
        lower[layout.follower_binary(j)] = 1.0;
        for i in 0..rows {
            lower[layout.z(i, j)] = -1.0;
        }
        p.add_le(lower, 0.0);
        let mut upper = vec![0.0; n];
        for i in 0..rows {
            upper[layout.z(i, j)] = 1.0;
        }
        p.add_le(upper, 1.0);
    }

    // (U_B^T (z 1))_k = sum_i U_B[i][k] sum_j z[i][j]
    for k in 0..cols {
        let mut payoff = vec![0.0; n];
        for i in 0..rows {
            for j in 0..cols {
                payoff[layout.z(i, j)] = m.follower.get(i, k);
            }
        }
        let mut dual_feasible: Vec<f64> = payoff.clone();
        dual_feasible[layout.lambda()] = -1.0;
        p.add_le(dual_feasible, 0.0);
        let mut complementarity: Vec<f64> = payoff.iter().map(|v| -v).collect();
        complementarity[layout.lambda()] = 1.0;
        complementarity[layout.follower_binary(k)] = big_m;
        p.add_le(complementarity, big_m);
    }
    Ok(StageMilp { program: p, rows, cols })
}

/// Leaf of the MILP with `pi_B = e_col`.
///
/// Fixing the binary forces every column of `z` other than `col` to zero
/// (its sum must reach 1 in `col` and the total mass is 1), which leaves
/// `z[:, col]` (the leader policy itself) and `lambda`:
///
/// ```text
/// max  U_A[:, col] . pi
/// s.t. sum pi = 1,  0 <= pi <= 1,
///      0 <= lambda - (U_B^T pi)_k <= M   for k != col,
///      lambda - (U_B^T pi)_col = 0
/// ```
pub fn milp_leaf(m: &StageMatrices, col: usize, big_m: f64) -> Result<LinearProgram> {
    m.require_nonempty()?;
    check_big_m(m, big_m)?;
    let (rows, cols) = (m.leader_actions(), m.follower_actions());
    if col >= cols {
        return Err(Error::contract(format!("column {col} out of range")));
    }
    let lambda = rows;
    let mut obj = vec![0.0; rows + 1];
    for (i, o) in obj.iter_mut().enumerate().take(rows) {
        *o = m.leader.get(i, col);
    }
    let mut p = LinearProgram::maximize(obj);
    for i in 0..rows {
        p.set_bounds(i, 0.0, 1.0);
    }
    p.set_free(lambda);
    let mut simplex = vec![1.0; rows + 1];
    simplex[lambda] = 0.0;
    p.add_eq(simplex, 1.0);
    for k in 0..cols {
        let mut slack: Vec<f64> = (0..rows).map(|i| -m.follower.get(i, k)).collect();
        slack.push(1.0);
        let cap = if k == col { 0.0 } else { big_m };
        p.add_le(slack.clone(), cap);
        p.add_ge(slack, 0.0);
    }
    Ok(p)
}

/// Solve the stage MILP by enumerating the one-hot follower vector.
///
/// A leaf is skipped when even the best entry of its column cannot beat the
/// incumbent. Equal leaves keep the lowest column.
pub fn solve_stackelberg_milp(m: &StageMatrices, big_m: f64) -> Result<StageSolution> {
    m.require_nonempty()?;
    check_big_m(m, big_m)?;
    if let Some((row, col)) = pure_commitment_certificate(m) {
        return StageSolution::evaluate(m, MixedPolicy::pure(m.leader_actions(), row), PurePolicy(col));
    }
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for col in 0..m.follower_actions() {
        let bound = (0..m.leader_actions()).map(|i| m.leader.get(i, col)).fold(f64::NEG_INFINITY, f64::max);
        if matches!(&best, Some((v, _, _)) if bound <= v + COLUMN_TIE_TOLERANCE) {
            continue;
        }
        let leaf = milp_leaf(m, col, big_m)?;
        let sol = lp_solve(&leaf)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Internal(format!("MILP leaf {col} is unbounded"))),
            LpStatus::Optimal => {}
        }
        if best.as_ref().is_none_or(|(v, _, _)| sol.objective > v + COLUMN_TIE_TOLERANCE) {
            best = Some((sol.objective, col, sol.x[..m.leader_actions()].to_vec()));
        }
    }
    let (_, col, pi) = best.ok_or_else(|| Error::Internal("stage MILP is infeasible; is big-M too small?".into()))?;
    StageSolution::evaluate(m, MixedPolicy::from_solver_output(&pi)?, PurePolicy(col))
}

/// A global maximum of `U_A` at `(row, col)` where `col` best-responds to the
/// pure commitment `row`; no leader policy can beat it.
///
/// Only the lowest column holding the maximum is considered, so the answer
/// agrees with the column order of the leaf enumeration.
fn pure_commitment_certificate(m: &StageMatrices) -> Option<(usize, usize)> {
    let top = m.leader.iter().fold(f64::NEG_INFINITY, f64::max);
    let col = (0..m.follower_actions()).find(|&j| (0..m.leader_actions()).any(|i| m.leader.get(i, j) == top))?;
    (0..m.leader_actions()).filter(|&i| m.leader.get(i, col) == top).find(|&i| {
        let best = m.follower.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m.follower.get(i, col) >= best - BEST_RESPONSE_TOLERANCE
    }).map(|i| (i, col))
}

/// Solve the unreduced stage MILP with LP-relaxation branch-and-bound.
pub fn solve_stackelberg_milp_branch_and_bound(m: &StageMatrices, big_m: f64) -> Result<StageSolution> {
    let milp = stage_milp(m, big_m)?;
    let sol = branch_and_bound(&milp.program, &milp.binaries())?
        .ok_or_else(|| Error::Internal("stage MILP is infeasible; is big-M too small?".into()))?;
    let col = (0..m.follower_actions())
        .max_by(|&a, &b| sol.x[milp.follower_binary(a)].total_cmp(&sol.x[milp.follower_binary(b)]).then(b.cmp(&a)))
        .expect("nonempty");
    let pi = milp.leader_policy(&sol.x);
    StageSolution::evaluate(m, MixedPolicy::from_solver_output(&pi)?, PurePolicy(col))
}

/// LP for "follower plays `col`": maximise the leader's column payoff over
/// the simplex, subject to `col` being a follower best response.
pub fn commitment_lp(m: &StageMatrices, col: usize) -> LinearProgram {
    let rows = m.leader_actions();
    let mut p = LinearProgram::maximize((0..rows).map(|i| m.leader.get(i, col)).collect());
    p.add_eq(vec![1.0; rows], 1.0);
    for k in (0..m.follower_actions()).filter(|&k| k != col) {
        p.add_le((0..rows).map(|i| m.follower.get(i, k) - m.follower.get(i, col)).collect(), 0.0);
    }
    p
}

/// Multiple-LP solution: best of one commitment LP per follower column.
pub fn solve_stackelberg_multilp(m: &StageMatrices) -> Result<StageSolution> {
    m.require_nonempty()?;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for col in 0..m.follower_actions() {
        let sol = lp_solve(&commitment_lp(m, col))?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Internal(format!("commitment LP {col} is unbounded"))),
            LpStatus::Optimal => {}
        }
        if best.as_ref().is_none_or(|(v, _, _)| sol.objective > v + COLUMN_TIE_TOLERANCE) {
            best = Some((sol.objective, col, sol.x));
        }
    }
    let (_, col, pi) = best.ok_or_else(|| Error::Internal("every commitment LP is infeasible".into()))?;
    StageSolution::evaluate(m, MixedPolicy::from_solver_output(&pi)?, PurePolicy(col))
}

/// Which stage solver the planner calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageSolverKind {
    /// Big-M MILP, follower binaries enumerated, default per-stage big-M.
    #[default]
    Milp,
    /// Big-M MILP through branch-and-bound on the full formulation.
    MilpBranchAndBound,
    MultiLp,
}

impl StageSolverKind {
    pub fn solve(self, m: &StageMatrices) -> Result<StageSolution> {
        match self {
            StageSolverKind::Milp => solve_stackelberg_milp(m, default_big_m(m)),
            StageSolverKind::MilpBranchAndBound => solve_stackelberg_milp_branch_and_bound(m, default_big_m(m)),
            StageSolverKind::MultiLp => solve_stackelberg_multilp(m),
        }
    }
}

/// Render a stage game as two labelled blocks of space-separated reals.
pub fn format_stage_game(m: &StageMatrices) -> String {
    let mut out = String::new();
    for (label, mat) in [("U_A", &m.leader), ("U_B", &m.follower)] {
        out.push_str(label);
        out.push('\n');
        for i in 0..mat.rows() {
            let line: Vec<String> = mat.row(i).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

/// Parse the format written by [`format_stage_game`]. Blank lines and lines
/// starting with `#` are ignored; labels are `U_A` and `U_B` in any order.
pub fn parse_stage_game(text: &str) -> Result<StageMatrices> {
    let parse_err = |message: String| Error::Parse { what: "stage game".into(), message };
    let mut leader: Option<Vec<Vec<f64>>> = None;
    let mut follower: Option<Vec<Vec<f64>>> = None;
    let mut current: Option<&mut Vec<Vec<f64>>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.trim_end_matches(':') {
            "U_A" => {
                if leader.is_some() {
                    return Err(parse_err(format!("line {}: duplicate U_A block", lineno + 1)));
                }
                current = Some(leader.insert(Vec::new()));
                continue;
            }
            "U_B" => {
                if follower.is_some() {
                    return Err(parse_err(format!("line {}: duplicate U_B block", lineno + 1)));
                }
                current = Some(follower.insert(Vec::new()));
                continue;
            }
            _ => {}
        }
        let Some(block) = current.as_mut() else {
            return Err(parse_err(format!("line {}: numbers before a U_A/U_B label", lineno + 1)));
        };
        let row = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|e| parse_err(format!("line {}: {tok:?}: {e}", lineno + 1))))
            .collect::<Result<Vec<f64>>>()?;
        block.push(row);
    }
    let leader = leader.ok_or_else(|| parse_err("missing U_A block".into()))?;
    let follower = follower.ok_or_else(|| parse_err("missing U_B block".into()))?;
    let m = StageMatrices::from_rows(leader, follower).map_err(|e| parse_err(e.to_string()))?;
    m.require_nonempty().map_err(|e| parse_err(e.to_string()))?;
    Ok(m)
}
