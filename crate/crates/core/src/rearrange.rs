//! Grid rearrangement game.
//!
//! Typed objects sit in the cells of a `rows x cols` workspace and each type
//! has one goal cell. A state is the count of every type in every cell, so
//! objects of one type are interchangeable. The leader moves one object per
//! stage to any of the 8 neighbouring cells; the follower only has the 4
//! axis neighbours. Both robots are paid the same utility: the reward of the
//! current state minus the cost of the moves actually executed.
//!
//! Within a stage the leader acts first. A follower move whose object the
//! leader has just taken away degrades to a no-op. Each robot's action fails
//! independently with its own probability, which leaves four outcome branches
//! per joint action.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Distribution, PlayerValues, StochasticGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl From<[usize; 2]> for Cell {
    fn from([row, col]: [usize; 2]) -> Self {
        Cell { row, col }
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.row, c.col]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.row, self.col)
    }
}

/// A count of one object type in one cell, addressed by type name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    #[serde(rename = "type")]
    pub obj_type: String,
    pub cell: Cell,
    pub count: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Robot {
    Leader,
    Follower,
}

/// Moving one object of `obj_type` between neighbouring cells, or doing nothing.
///
/// The derived order is lexicographic on `(obj_type, from, to)` with the no-op last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveAction {
    Move { obj_type: usize, from: Cell, to: Cell },
    NoOp,
}

impl MoveAction {
    pub fn is_noop(&self) -> bool {
        matches!(self, MoveAction::NoOp)
    }

    pub fn is_diagonal(&self) -> bool {
        match *self {
            MoveAction::Move { from, to, .. } => from.row != to.row && from.col != to.col,
            MoveAction::NoOp => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Manhattan,
    Chebyshev,
}

impl DistanceMetric {
    pub fn between(self, a: Cell, b: Cell) -> usize {
        let dr = a.row.abs_diff(b.row);
        let dc = a.col.abs_diff(b.col);
        match self {
            DistanceMetric::Manhattan => dr + dc,
            DistanceMetric::Chebyshev => dr.max(dc),
        }
    }
}

/// Grid dimensions, object types and their goal cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    rows: usize,
    cols: usize,
    types: Vec<String>,
    goals: Vec<Cell>,
}

impl Workspace {
    pub fn new(rows: usize, cols: usize, types: Vec<String>, goals: Vec<Cell>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Validation("grid dimensions must be positive".into()));
        }
        if types.is_empty() || types.len() != goals.len() {
            return Err(Error::Validation("every object type needs exactly one goal cell".into()));
        }
        for (i, (name, g)) in types.iter().zip(&goals).enumerate() {
            if g.row >= rows || g.col >= cols {
                return Err(Error::Validation(format!("goal of {name} at {g} is outside the {rows}x{cols} grid")));
            }
            if goals[..i].contains(g) {
                return Err(Error::Validation(format!("goal cell {g} is shared by two types")));
            }
            if types[..i].contains(name) {
                return Err(Error::Validation(format!("object type {name} is listed twice")));
            }
        }
        Ok(Workspace { rows, cols, types, goals })
    }

    /// 3x3 grid; red, green and blue go to the bottom-left, bottom-middle and
    /// bottom-right cells.
    pub fn default_3x3() -> Self {
        Workspace::new(
            3,
            3,
            vec!["red".into(), "green".into(), "blue".into()],
            vec![Cell::new(2, 0), Cell::new(2, 1), Cell::new(2, 2)],
        )
        .expect("default workspace is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn goals(&self) -> &[Cell] {
        &self.goals
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t == name)
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.rows && c.col < self.cols
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| Cell::new(r, c)))
    }

    fn slot(&self, cell: Cell, obj_type: usize) -> usize {
        (cell.row * self.cols + cell.col) * self.types.len() + obj_type
    }

    pub fn empty_state(&self) -> GridState {
        GridState { counts: vec![0; self.num_cells() * self.num_types()] }
    }

    /// State from `(cell, type, count)` triples; counts for a slot accumulate.
    pub fn state_from_placements(&self, placements: &[(Cell, usize, u32)]) -> Result<GridState> {
        let mut s = self.empty_state();
        for &(cell, t, n) in placements {
            if !self.contains(cell) {
                return Err(Error::Validation(format!("cell {cell} is outside the grid")));
            }
            if t >= self.num_types() {
                return Err(Error::Validation(format!("unknown object type index {t}")));
            }
            let slot = self.slot(cell, t);
            let total = u32::from(s.counts[slot]) + n;
            s.counts[slot] = u8::try_from(total)
                .map_err(|_| Error::Validation(format!("more than 255 objects of one type in cell {cell}")))?;
        }
        Ok(s)
    }

    /// State from named placements; rejects unknown types, cells off the grid and negative counts.
    pub fn state_from_named(&self, placements: &[Placement]) -> Result<GridState> {
        let mut triples = Vec::with_capacity(placements.len());
        for p in placements {
            let t = self
                .type_index(&p.obj_type)
                .ok_or_else(|| Error::Validation(format!("unknown object type {:?} in cell {}", p.obj_type, p.cell)))?;
            if p.count < 0 {
                return Err(Error::Validation(format!(
                    "negative count {} of {} in cell {}",
                    p.count, p.obj_type, p.cell
                )));
            }
            let n = u32::try_from(p.count)
                .map_err(|_| Error::Validation(format!("count {} in cell {} is too large", p.count, p.cell)))?;
            triples.push((p.cell, t, n));
        }
        self.state_from_placements(&triples)
    }

    pub fn named_placements(&self, s: &GridState) -> Vec<Placement> {
        self.placements(s)
            .into_iter()
            .map(|(cell, t, n)| Placement { obj_type: self.types[t].clone(), cell, count: i64::from(n) })
            .collect()
    }

    pub fn goal_state_for(&self, s: &GridState) -> GridState {
        let mut g = self.empty_state();
        for t in 0..self.num_types() {
            let n: u32 = self.cells().map(|c| u32::from(self.count(s, c, t))).sum();
            g.counts[self.slot(self.goals[t], t)] = n as u8;
        }
        g
    }

    pub fn count(&self, s: &GridState, cell: Cell, obj_type: usize) -> u8 {
        s.counts[self.slot(cell, obj_type)]
    }

    pub fn cell_total(&self, s: &GridState, cell: Cell) -> u32 {
        (0..self.num_types()).map(|t| u32::from(self.count(s, cell, t))).sum()
    }

    pub fn type_totals(&self, s: &GridState) -> Vec<u32> {
        (0..self.num_types()).map(|t| self.cells().map(|c| u32::from(self.count(s, c, t))).sum()).collect()
    }

    /// `(cell, type, count)` for every nonzero slot, in canonical order.
    pub fn placements(&self, s: &GridState) -> Vec<(Cell, usize, u32)> {
        let mut out = Vec::new();
        for cell in self.cells() {
            for t in 0..self.num_types() {
                let n = self.count(s, cell, t);
                if n > 0 {
                    out.push((cell, t, u32::from(n)));
                }
            }
        }
        out
    }

    pub fn describe_action(&self, a: &MoveAction) -> String {
        match a {
            MoveAction::NoOp => "noop".to_string(),
            MoveAction::Move { obj_type, from, to } => format!("{}:{from}>{to}", self.types[*obj_type]),
        }
    }

    /// One line per grid row, cells separated by `|`, each cell listing `type x count`.
    pub fn render(&self, s: &GridState) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let cells: Vec<String> = (0..self.cols)
                .map(|c| {
                    let cell = Cell::new(r, c);
                    let items: Vec<String> = (0..self.num_types())
                        .filter(|&t| self.count(s, cell, t) > 0)
                        .map(|t| format!("{}x{}", self.types[t], self.count(s, cell, t)))
                        .collect();
                    if items.is_empty() {
                        ".".to_string()
                    } else {
                        items.join(",")
                    }
                })
                .collect();
            out.push_str(&cells.join(" | "));
            out.push('\n');
        }
        out
    }

    pub fn feasible_actions(&self, s: &GridState, robot: Robot) -> Vec<MoveAction> {
        const AXIS: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const ALL: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        let dirs: &[(isize, isize)] = match robot {
            Robot::Leader => &ALL,
            Robot::Follower => &AXIS,
        };
        let mut out = vec![MoveAction::NoOp];
        for t in 0..self.num_types() {
            for from in self.cells() {
                if self.count(s, from, t) == 0 {
                    continue;
                }
                for &(dr, dc) in dirs {
                    let (r, c) = (from.row as isize + dr, from.col as isize + dc);
                    if r < 0 || c < 0 {
                        continue;
                    }
                    let to = Cell::new(r as usize, c as usize);
                    if self.contains(to) {
                        out.push(MoveAction::Move { obj_type: t, from, to });
                    }
                }
            }
        }
        out
    }

    /// Whether `a` can be applied in `s` (the no-op always can).
    pub fn is_applicable(&self, s: &GridState, a: &MoveAction) -> bool {
        match *a {
            MoveAction::NoOp => true,
            MoveAction::Move { obj_type, from, to } => {
                obj_type < self.num_types()
                    && self.contains(from)
                    && self.contains(to)
                    && from != to
                    && from.row.abs_diff(to.row) <= 1
                    && from.col.abs_diff(to.col) <= 1
                    && self.count(s, from, obj_type) > 0
            }
        }
    }

    /// `s` after `a`, or `None` when the source cell lacks the object.
    pub fn apply(&self, s: &GridState, a: &MoveAction) -> Option<GridState> {
        if !self.is_applicable(s, a) {
            return None;
        }
        let mut next = s.clone();
        if let MoveAction::Move { obj_type, from, to } = *a {
            next.counts[self.slot(from, obj_type)] -= 1;
            next.counts[self.slot(to, obj_type)] += 1;
        }
        Some(next)
    }
}

/// Per-cell, per-type object counts.
///
/// Stored row-major over cells, type-major within a cell; the derived
/// `Eq`/`Ord`/`Hash` act on exactly that encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridState {
    counts: Vec<u8>,
}

impl GridState {
    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn total_objects(&self) -> u32 {
        self.counts.iter().map(|&c| u32::from(c)).sum()
    }

    /// 64-bit FNV-1a of the canonical encoding.
    pub fn stable_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in &self.counts {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Cost, reward and failure parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostRewardConfig {
    pub base_cost_axis: f64,
    pub base_cost_diagonal: f64,
    /// Moves out of a cell holding at least this many objects cost double.
    pub crowding_threshold: u32,
    pub reward_weight: f64,
    pub reward_offset: f64,
    pub p_fail_leader: f64,
    pub p_fail_follower: f64,
    pub distance: DistanceMetric,
}

impl Default for CostRewardConfig {
    fn default() -> Self {
        CostRewardConfig {
            base_cost_axis: 1.0,
            base_cost_diagonal: 1.0,
            crowding_threshold: 2,
            reward_weight: 2.0,
            reward_offset: 50.0,
            p_fail_leader: 0.1,
            p_fail_follower: 0.1,
            distance: DistanceMetric::Manhattan,
        }
    }
}

impl CostRewardConfig {
    pub fn validate(&self) -> Result<()> {
        let costs = [self.base_cost_axis, self.base_cost_diagonal];
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Validation("move costs must be finite and nonnegative".into()));
        }
        if !self.reward_weight.is_finite() || !self.reward_offset.is_finite() {
            return Err(Error::Validation("reward constants must be finite".into()));
        }
        for (name, p) in [("p_fail_leader", self.p_fail_leader), ("p_fail_follower", self.p_fail_follower)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Most decimals for which failure probabilities are handled as exact decimals.
const MAX_DECIMALS: u32 = 7;

/// `p` as `n / 10^k` when its shortest decimal form has at most [`MAX_DECIMALS`] digits.
fn short_decimal(p: f64) -> Option<(u64, u32)> {
    let text = p.to_string();
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let k = u32::try_from(frac.len()).ok().filter(|&k| k <= MAX_DECIMALS)?;
    let n: u64 = format!("{int}{frac}").parse().ok()?;
    Some((n, k))
}

/// Probabilities of (both succeed, follower fails, leader fails, both fail).
///
/// Short decimal inputs give the exact products rounded once, so 0.1 and 0.1
/// yield exactly 0.81, 0.09, 0.09 and 0.01.
pub fn branch_probabilities(p_fail_leader: f64, p_fail_follower: f64) -> [f64; 4] {
    if let (Some((na, ka)), Some((nb, kb))) = (short_decimal(p_fail_leader), short_decimal(p_fail_follower)) {
        let (sa, sb) = (10u64.pow(ka) - na, 10u64.pow(kb) - nb);
        // numerators stay below 2^53 and the denominator is an exact power of ten
        let d = 10f64.powi((ka + kb) as i32);
        return [sa * sb, sa * nb, na * sb, na * nb].map(|n| n as f64 / d);
    }
    let (pa, pb) = (p_fail_leader, p_fail_follower);
    [(1.0 - pa) * (1.0 - pb), (1.0 - pa) * pb, pa * (1.0 - pb), pa * pb]
}

/// The rearrangement environment: workspace geometry plus cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub workspace: Workspace,
    pub config: CostRewardConfig,
}

impl Rearrangement {
    pub fn new(workspace: Workspace, config: CostRewardConfig) -> Result<Self> {
        config.validate()?;
        Ok(Rearrangement { workspace, config })
    }

    pub fn feasible_actions(&self, s: &GridState, robot: Robot) -> Vec<MoveAction> {
        self.workspace.feasible_actions(s, robot)
    }

    pub fn distance_to_goal(&self, s: &GridState) -> usize {
        let ws = &self.workspace;
        let mut total = 0;
        for cell in ws.cells() {
            for t in 0..ws.num_types() {
                let n = usize::from(ws.count(s, cell, t));
                if n > 0 {
                    total += n * self.config.distance.between(cell, ws.goals[t]);
                }
            }
        }
        total
    }

    pub fn state_reward(&self, s: &GridState) -> f64 {
        self.config.reward_offset - self.config.reward_weight * self.distance_to_goal(s) as f64
    }

    pub fn is_goal(&self, s: &GridState) -> bool {
        self.distance_to_goal(s) == 0
    }

    pub fn action_cost(&self, s: &GridState, a: &MoveAction) -> Result<f64> {
        match *a {
            MoveAction::NoOp => Ok(0.0),
            MoveAction::Move { from, .. } => {
                if !self.workspace.is_applicable(s, a) {
                    return Err(Error::contract(format!(
                        "action {} is not feasible here",
                        self.workspace.describe_action(a)
                    )));
                }
                let base = if a.is_diagonal() { self.config.base_cost_diagonal } else { self.config.base_cost_axis };
                let crowded = self.workspace.cell_total(s, from) >= self.config.crowding_threshold;
                Ok(if crowded { 2.0 * base } else { base })
            }
        }
    }

    /// Apply the leader's executed action, then the follower's intended one.
    /// Returns the final state and what the follower actually did.
    pub fn apply_joint(
        &self,
        s: &GridState,
        leader_executed: &MoveAction,
        follower_intended: &MoveAction,
    ) -> Result<(GridState, MoveAction)> {
        let mid = self.workspace.apply(s, leader_executed).ok_or_else(|| {
            Error::contract(format!(
                "leader action {} is not feasible here",
                self.workspace.describe_action(leader_executed)
            ))
        })?;
        match self.workspace.apply(&mid, follower_intended) {
            Some(next) => Ok((next, *follower_intended)),
            None => Ok((mid, MoveAction::NoOp)),
        }
    }

    /// The four failure branches of a joint action, merged by successor state.
    pub fn transition_distribution(
        &self,
        s: &GridState,
        leader: &MoveAction,
        follower: &MoveAction,
    ) -> Result<Vec<(GridState, f64)>> {
        let mut merged: Vec<(GridState, f64)> = Vec::with_capacity(4);
        for (a, b, p) in self.branches(leader, follower) {
            if p == 0.0 {
                continue;
            }
            let (next, _) = self.apply_joint(s, &a, &b)?;
            match merged.iter_mut().find(|(t, _)| *t == next) {
                Some((_, q)) => *q += p,
                None => merged.push((next, p)),
            }
        }
        // merging can round a certain outcome just above 1
        for (_, p) in &mut merged {
            *p = p.min(1.0);
        }
        Ok(merged)
    }

    /// `(leader executed, follower intended, probability)` for each failure outcome.
    fn branches(&self, leader: &MoveAction, follower: &MoveAction) -> [(MoveAction, MoveAction, f64); 4] {
        let [both, follower_fails, leader_fails, neither] =
            branch_probabilities(self.config.p_fail_leader, self.config.p_fail_follower);
        [
            (*leader, *follower, both),
            (*leader, MoveAction::NoOp, follower_fails),
            (MoveAction::NoOp, *follower, leader_fails),
            (MoveAction::NoOp, MoveAction::NoOp, neither),
        ]
    }

    /// Utility of a stage with the given executed actions (identical for both robots).
    ///
    /// The follower's cost is assessed on the state left by the leader.
    pub fn stage_utility(
        &self,
        s: &GridState,
        leader_executed: &MoveAction,
        follower_executed: &MoveAction,
    ) -> Result<PlayerValues> {
        let leader_cost = self.action_cost(s, leader_executed)?;
        let mid = self.workspace.apply(s, leader_executed).expect("checked by action_cost");
        let follower_cost = self.action_cost(&mid, follower_executed)?;
        let u = self.state_reward(s) - leader_cost - follower_cost;
        Ok(PlayerValues::new(u, u))
    }

    /// Stage utility averaged over the four failure branches of intended actions.
    pub fn expected_stage_utility(
        &self,
        s: &GridState,
        leader: &MoveAction,
        follower: &MoveAction,
    ) -> Result<PlayerValues> {
        let mut total = 0.0;
        for (a, b, p) in self.branches(leader, follower) {
            if p == 0.0 {
                continue;
            }
            let (_, b_exec) = self.apply_joint(s, &a, &b)?;
            total += p * self.stage_utility(s, &a, &b_exec)?.leader;
        }
        Ok(PlayerValues::new(total, total))
    }

    pub fn terminal_utility(&self, s: &GridState) -> PlayerValues {
        let r = self.state_reward(s);
        PlayerValues::new(r, r)
    }
}

/// The rearrangement environment seen as a finite-horizon planning problem.
#[derive(Debug, Clone)]
pub struct RearrangementGame<'a> {
    pub env: &'a Rearrangement,
    pub horizon: usize,
    pub discount: f64,
}

impl<'a> RearrangementGame<'a> {
    pub fn new(env: &'a Rearrangement, horizon: usize, discount: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(Error::Validation(format!("discount {discount} is outside (0, 1]")));
        }
        Ok(RearrangementGame { env, horizon, discount })
    }
}

impl StochasticGame for RearrangementGame<'_> {
    type State = GridState;
    type LeaderAction = MoveAction;
    type FollowerAction = MoveAction;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn leader_actions(&self, s: &GridState) -> Vec<MoveAction> {
        self.env.feasible_actions(s, Robot::Leader)
    }

    fn follower_actions(&self, s: &GridState) -> Vec<MoveAction> {
        self.env.feasible_actions(s, Robot::Follower)
    }

    fn transition(&self, s: &GridState, a: &MoveAction, b: &MoveAction) -> Distribution<GridState> {
        let outcomes = self.env.transition_distribution(s, a, b).expect("actions come from feasible_actions");
        Distribution::normalized(outcomes).expect("failure branches form a distribution")
    }

    fn stage_utility(&self, s: &GridState, a: &MoveAction, b: &MoveAction) -> PlayerValues {
        self.env.expected_stage_utility(s, a, b).expect("actions come from feasible_actions")
    }

    fn terminal_utility(&self, s: &GridState) -> PlayerValues {
        self.env.terminal_utility(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Rearrangement {
        Rearrangement::new(Workspace::default_3x3(), CostRewardConfig::default()).unwrap()
    }

    const RED: usize = 0;
    const BLUE: usize = 2;

    fn mv(t: usize, from: (usize, usize), to: (usize, usize)) -> MoveAction {
        MoveAction::Move { obj_type: t, from: Cell::new(from.0, from.1), to: Cell::new(to.0, to.1) }
    }

    #[test]
    fn feasible_action_counts() {
        let e = env();
        let ws = &e.workspace;
        let empty = ws.empty_state();
        assert_eq!(e.feasible_actions(&empty, Robot::Leader), vec![MoveAction::NoOp]);
        assert_eq!(e.feasible_actions(&empty, Robot::Follower), vec![MoveAction::NoOp]);

        let corner = ws.state_from_placements(&[(Cell::new(0, 0), RED, 1)]).unwrap();
        assert_eq!(e.feasible_actions(&corner, Robot::Follower).len(), 1 + 2);
        assert_eq!(e.feasible_actions(&corner, Robot::Leader).len(), 1 + 3);

        let center = ws.state_from_placements(&[(Cell::new(1, 1), RED, 1)]).unwrap();
        assert_eq!(e.feasible_actions(&center, Robot::Follower).len(), 1 + 4);
        assert_eq!(e.feasible_actions(&center, Robot::Leader).len(), 1 + 8);
    }

    #[test]
    fn distance_and_reward() {
        let e = env();
        let ws = &e.workspace;
        let goal = ws.state_from_placements(&[(Cell::new(2, 0), RED, 2), (Cell::new(2, 2), BLUE, 1)]).unwrap();
        assert_eq!(e.distance_to_goal(&goal), 0);
        assert!(e.is_goal(&goal));
        assert_eq!(e.state_reward(&goal), 50.0);

        let near = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1)]).unwrap();
        assert_eq!(e.distance_to_goal(&near), 1);
        assert!(!e.is_goal(&near));

        // blues at Manhattan 2 (r1c1) and 3 (r0c1)
        let blues = ws.state_from_placements(&[(Cell::new(1, 1), BLUE, 1), (Cell::new(0, 1), BLUE, 1)]).unwrap();
        assert_eq!(e.distance_to_goal(&blues), 5);
        assert_eq!(e.state_reward(&blues), 40.0);
        assert_eq!(e.terminal_utility(&blues), PlayerValues::new(40.0, 40.0));

        let d3 = ws.state_from_placements(&[(Cell::new(0, 1), BLUE, 1)]).unwrap();
        assert_eq!(e.terminal_utility(&d3), PlayerValues::new(44.0, 44.0));

        let flat = Rearrangement::new(ws.clone(), CostRewardConfig { reward_weight: 0.0, ..Default::default() })
            .unwrap();
        assert_eq!(flat.state_reward(&blues), 50.0);
        assert!(e.is_goal(&ws.empty_state()));
    }

    #[test]
    fn chebyshev_switch() {
        let cfg = CostRewardConfig { distance: DistanceMetric::Chebyshev, ..Default::default() };
        let e = Rearrangement::new(Workspace::default_3x3(), cfg).unwrap();
        let s = e.workspace.state_from_placements(&[(Cell::new(0, 2), RED, 1)]).unwrap();
        assert_eq!(e.distance_to_goal(&s), 2);
    }

    #[test]
    fn costs_and_crowding() {
        let e = env();
        let ws = &e.workspace;
        let single = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1)]).unwrap();
        assert_eq!(e.action_cost(&single, &MoveAction::NoOp).unwrap(), 0.0);
        assert_eq!(e.action_cost(&single, &mv(RED, (1, 0), (2, 0))).unwrap(), 1.0);

        let cfg = CostRewardConfig { base_cost_diagonal: 1.5, ..Default::default() };
        let e2 = Rearrangement::new(ws.clone(), cfg).unwrap();
        let crowded = ws.state_from_placements(&[(Cell::new(1, 1), RED, 2), (Cell::new(1, 1), BLUE, 1)]).unwrap();
        assert_eq!(e2.action_cost(&crowded, &mv(RED, (1, 1), (2, 0))).unwrap(), 3.0);
        assert!(e.action_cost(&single, &mv(BLUE, (1, 0), (2, 0))).is_err());
    }

    #[test]
    fn joint_application() {
        let e = env();
        let ws = &e.workspace;
        let s = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1), (Cell::new(1, 2), BLUE, 1)]).unwrap();
        let (same, b) = e.apply_joint(&s, &MoveAction::NoOp, &MoveAction::NoOp).unwrap();
        assert_eq!((same, b), (s.clone(), MoveAction::NoOp));

        let a = mv(RED, (1, 0), (2, 0));
        let f = mv(BLUE, (1, 2), (2, 2));
        let (both, b) = e.apply_joint(&s, &a, &f).unwrap();
        assert_eq!(b, f);
        assert!(e.is_goal(&both));
        assert_eq!(ws.type_totals(&both), ws.type_totals(&s));

        // both robots grab the only red: the follower degrades
        let f_red = mv(RED, (1, 0), (0, 0));
        let (next, b) = e.apply_joint(&s, &a, &f_red).unwrap();
        assert_eq!(b, MoveAction::NoOp);
        assert_eq!(next, ws.apply(&s, &a).unwrap());
    }

    #[test]
    fn failure_branches() {
        let e = env();
        let ws = &e.workspace;
        let s = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1), (Cell::new(1, 2), BLUE, 1)]).unwrap();
        let d = e.transition_distribution(&s, &mv(RED, (1, 0), (2, 0)), &mv(BLUE, (1, 2), (2, 2))).unwrap();
        let probs: Vec<f64> = d.iter().map(|(_, p)| *p).collect();
        assert_eq!(probs.len(), 4);
        assert_eq!(probs, vec![0.81, 0.09, 0.09, 0.01]);

        let d = e.transition_distribution(&s, &MoveAction::NoOp, &MoveAction::NoOp).unwrap();
        assert_eq!(d, vec![(s.clone(), 1.0)]);

        let cfg = CostRewardConfig { p_fail_leader: 0.0, p_fail_follower: 0.25, ..Default::default() };
        let e0 = Rearrangement::new(ws.clone(), cfg).unwrap();
        let d = e0.transition_distribution(&s, &mv(RED, (1, 0), (2, 0)), &mv(BLUE, (1, 2), (2, 2))).unwrap();
        assert_eq!(d.iter().map(|(_, p)| *p).collect::<Vec<_>>(), vec![0.75, 0.25]);
    }

    #[test]
    fn stage_utilities() {
        let e = env();
        let ws = &e.workspace;
        let goal = ws.state_from_placements(&[(Cell::new(2, 0), RED, 1)]).unwrap();
        assert_eq!(e.stage_utility(&goal, &MoveAction::NoOp, &MoveAction::NoOp).unwrap(), PlayerValues::new(50.0, 50.0));

        // distance 5 -> reward 40; two uncrowded axis moves
        let s = ws.state_from_placements(&[(Cell::new(1, 1), BLUE, 1), (Cell::new(0, 1), BLUE, 1)]).unwrap();
        let u = e.stage_utility(&s, &mv(BLUE, (1, 1), (1, 2)), &mv(BLUE, (0, 1), (0, 2))).unwrap();
        assert_eq!(u, PlayerValues::new(38.0, 38.0));
    }

    #[test]
    fn follower_cost_uses_post_leader_state() {
        let e = env();
        let ws = &e.workspace;
        // two reds share r1c0: crowded until the leader takes one away
        let s = ws.state_from_placements(&[(Cell::new(1, 0), RED, 2)]).unwrap();
        let lead = mv(RED, (1, 0), (2, 0));
        let follow = mv(RED, (1, 0), (2, 0));
        let u = e.stage_utility(&s, &lead, &follow).unwrap();
        // reward 46, leader pays 2 (crowded), follower pays 1 (alone after the leader's move)
        assert_eq!(u.leader, 46.0 - 2.0 - 1.0);
    }

    #[test]
    fn canonical_encoding_and_hash() {
        let ws = Workspace::default_3x3();
        let a = ws.state_from_placements(&[(Cell::new(0, 0), RED, 1), (Cell::new(0, 0), RED, 1)]).unwrap();
        let b = ws.state_from_placements(&[(Cell::new(0, 0), RED, 2)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stable_hash(), b.stable_hash());
        assert_eq!(a.counts()[0], 2);
        let c = ws.state_from_placements(&[(Cell::new(0, 0), BLUE, 2)]).unwrap();
        assert_ne!(a.stable_hash(), c.stable_hash());
    }

    #[test]
    fn workspace_validation() {
        let t = || vec!["red".to_string(), "blue".to_string()];
        assert!(Workspace::new(2, 2, t(), vec![Cell::new(0, 0), Cell::new(0, 0)]).is_err());
        assert!(Workspace::new(2, 2, t(), vec![Cell::new(0, 0), Cell::new(2, 0)]).is_err());
        assert!(Workspace::new(0, 2, t(), vec![Cell::new(0, 0), Cell::new(0, 1)]).is_err());
        assert!(Workspace::new(2, 2, t(), vec![Cell::new(0, 0)]).is_err());
        let bad = CostRewardConfig { p_fail_leader: 1.5, ..Default::default() };
        assert!(Rearrangement::new(Workspace::default_3x3(), bad).is_err());
    }

    #[test]
    fn named_placements_round_trip() {
        let ws = Workspace::default_3x3();
        let named = vec![
            Placement { obj_type: "red".into(), cell: Cell::new(0, 0), count: 2 },
            Placement { obj_type: "blue".into(), cell: Cell::new(1, 2), count: 1 },
        ];
        let s = ws.state_from_named(&named).unwrap();
        assert_eq!(ws.named_placements(&s), named);
        let neg = vec![Placement { obj_type: "red".into(), cell: Cell::new(1, 2), count: -1 }];
        let err = ws.state_from_named(&neg).unwrap_err().to_string();
        assert!(err.contains("r1c2"), "{err}");
        let unknown = vec![Placement { obj_type: "pink".into(), cell: Cell::new(0, 0), count: 1 }];
        assert!(ws.state_from_named(&unknown).is_err());
    }

    #[test]
    fn action_descriptions() {
        let ws = Workspace::default_3x3();
        assert_eq!(ws.describe_action(&MoveAction::NoOp), "noop");
        assert_eq!(ws.describe_action(&mv(RED, (1, 0), (2, 0))), "red:r1c0>r2c0");
    }

    #[test]
    fn decimal_branch_probabilities_are_exact() {
        assert_eq!(branch_probabilities(0.1, 0.1), [0.81, 0.09, 0.09, 0.01]);
        assert_eq!(branch_probabilities(0.0, 0.25), [0.75, 0.25, 0.0, 0.0]);
        assert_eq!(branch_probabilities(1.0, 0.0), [0.0, 0.0, 1.0, 0.0]);
        let p = branch_probabilities(1.0 / 3.0, 0.2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[3] - 0.2 / 3.0).abs() < 1e-15);
    }
}
