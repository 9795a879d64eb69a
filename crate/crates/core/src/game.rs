//! Finite-horizon two-player stochastic games with a committing leader.
//!
//! The [`StochasticGame`] trait is the only thing the planner needs to know
//! about a concrete game. States play the role of opaque identifiers: their
//! `Eq`/`Hash`/`Ord` implementations must act on a canonical encoding so that
//! equal physical states compare equal.

use std::fmt::{self, Debug};
use std::hash::Hash;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities below this are treated as floating-point dust and dropped.
pub const PROBABILITY_DUST: f64 = 1e-15;

/// Tolerance on `sum(p) == 1` for transition distributions.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Tolerance on `sum(pi) == 1` for mixed policies.
pub const POLICY_TOLERANCE: f64 = 1e-9;

/// Dense row-major real matrix. Rows index leader actions, columns follower actions.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::contract("ragged matrix rows"));
        }
        let n = rows.len();
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry minus smallest entry (0 for an empty matrix).
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Leader mixed strategy over the action list of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPolicy(Vec<f64>);

impl MixedPolicy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::contract("mixed policy over an empty action list"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::contract(format!("policy entry outside [0, 1]: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > POLICY_TOLERANCE {
            return Err(Error::contract(format!("policy sums to {total}, not 1")));
        }
        Ok(MixedPolicy(probs))
    }

    pub fn pure(len: usize, index: usize) -> Self {
        let mut v = vec![0.0; len];
        v[index] = 1.0;
        MixedPolicy(v)
    }

    /// Clamp solver noise into a valid distribution: negatives and dust go to
    /// zero, then the vector is renormalised.
    pub fn from_solver_output(raw: &[f64]) -> Result<Self> {
        let mut v: Vec<f64> = raw.iter().map(|&p| if p < 1e-12 { 0.0 } else { p.min(1.0) }).collect();
        let total: f64 = v.iter().sum();
        if !(total > 0.5 && total < 1.5) {
            return Err(Error::Internal(format!("solver produced a non-distribution {raw:?}")));
        }
        v.iter_mut().for_each(|p| *p /= total);
        Ok(MixedPolicy(v))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Index chosen by inverse-CDF sampling with `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}

/// Follower pure strategy: an index into the follower action list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PurePolicy(pub usize);

impl PurePolicy {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Pair of per-player values (leader first).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlayerValues {
    pub leader: f64,
    pub follower: f64,
}

impl PlayerValues {
    pub fn new(leader: f64, follower: f64) -> Self {
        PlayerValues { leader, follower }
    }
}

impl From<(f64, f64)> for PlayerValues {
    fn from((leader, follower): (f64, f64)) -> Self {
        PlayerValues { leader, follower }
    }
}

/// Finite distribution over successor states.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    outcomes: Vec<(S, f64)>,
}

impl<S: Clone + Eq + Hash> Distribution<S> {
    /// Merge duplicate outcomes, drop dust below [`PROBABILITY_DUST`] and
    /// renormalise. Fails if any probability is negative or the mass is not 1.
    pub fn normalized(outcomes: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let mut merged: IndexMap<S, f64> = IndexMap::new();
        for (s, p) in outcomes {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::contract(format!("invalid transition probability {p}")));
            }
            *merged.entry(s).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::contract(format!("transition probabilities sum to {total}")));
        }
        merged.retain(|_, p| *p >= PROBABILITY_DUST);
        let kept: f64 = merged.values().sum();
        Ok(Distribution { outcomes: merged.into_iter().map(|(s, p)| (s, p / kept)).collect() })
    }

    pub fn certain(state: S) -> Self {
        Distribution { outcomes: vec![(state, 1.0)] }
    }
}

impl<S> Distribution<S> {
    pub fn outcomes(&self) -> &[(S, f64)] {
        &self.outcomes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.outcomes.iter().map(|(s, p)| (s, *p))
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }
}

/// A finite-horizon two-player stochastic game.
///
/// Action lists are state dependent and must be non-empty; by convention the
/// no-op is always present. All methods must be pure.
pub trait StochasticGame: Sync {
    type State: Clone + Eq + Hash + Ord + Debug + Send + Sync;
    type LeaderAction: Clone + Debug + Send + Sync;
    type FollowerAction: Clone + Debug + Send + Sync;

    /// Number of stages T (at least 1).
    fn horizon(&self) -> usize;

    /// Discount factor in (0, 1].
    fn discount(&self) -> f64;

    fn leader_actions(&self, s: &Self::State) -> Vec<Self::LeaderAction>;

    fn follower_actions(&self, s: &Self::State) -> Vec<Self::FollowerAction>;

    fn transition(
        &self,
        s: &Self::State,
        a: &Self::LeaderAction,
        b: &Self::FollowerAction,
    ) -> Distribution<Self::State>;

    fn stage_utility(&self, s: &Self::State, a: &Self::LeaderAction, b: &Self::FollowerAction) -> PlayerValues;

    fn terminal_utility(&self, s: &Self::State) -> PlayerValues;
}

/// Per-stage values, defined exactly on the reachable set it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<S: Hash + Eq> {
    values: IndexMap<S, PlayerValues>,
}

impl<S: Hash + Eq + Debug> ValueTable<S> {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (S, PlayerValues)>) -> Self {
        ValueTable { values: pairs.into_iter().collect() }
    }

    pub fn get(&self, s: &S) -> Option<PlayerValues> {
        self.values.get(s).copied()
    }

    pub fn require(&self, s: &S) -> Result<PlayerValues> {
        self.get(s).ok_or_else(|| Error::MissingValue { state: format!("{s:?}") })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, PlayerValues)> {
        self.values.iter().map(|(s, v)| (s, *v))
    }
}

/// `sum_i pi_A[i] * U[i][b]`.
pub fn expected_stage_value(u: &Matrix, pi_a: &MixedPolicy, b: PurePolicy) -> Result<f64> {
    if pi_a.len() != u.rows() {
        return Err(Error::contract(format!(
            "policy has {} entries but the matrix has {} rows",
            pi_a.len(),
            u.rows()
        )));
    }
    if b.0 >= u.cols() {
        return Err(Error::contract(format!("follower column {} out of range ({} columns)", b.0, u.cols())));
    }
    Ok(pi_a.probs().iter().enumerate().map(|(i, p)| p * u.get(i, b.0)).sum())
}

/// `gamma^T * terminal + sum_t gamma^t * stage[t]`.
pub fn discounted_return(stage_utilities: &[f64], terminal: f64, gamma: f64, horizon: usize) -> Result<f64> {
    if stage_utilities.len() != horizon {
        return Err(Error::contract(format!(
            "expected {horizon} stage utilities, got {}",
            stage_utilities.len()
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::contract(format!("discount {gamma} outside (0, 1]")));
    }
    let mut total = 0.0;
    let mut weight = 1.0;
    for &u in stage_utilities {
        total += weight * u;
        weight *= gamma;
    }
    Ok(total + weight * terminal)
}

/// Explicit game given by tables, with states and actions as plain indices.
///
/// Useful for small hand-built examples and randomised testing.
#[derive(Debug, Clone)]
pub struct TabularGame {
    pub horizon: usize,
    pub discount: f64,
    /// `leader_counts[s]` actions for the leader in state `s`.
    pub leader_counts: Vec<usize>,
    pub follower_counts: Vec<usize>,
    /// `transitions[s][a][b]` = list of `(successor, probability)`.
    pub transitions: Vec<Vec<Vec<Vec<(usize, f64)>>>>,
    /// `utilities[s][a][b]` = stage utility pair.
    pub utilities: Vec<Vec<Vec<PlayerValues>>>,
    pub terminal: Vec<PlayerValues>,
}

impl TabularGame {
    pub fn num_states(&self) -> usize {
        self.leader_counts.len()
    }

    /// Check every table shape and every transition distribution.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        if self.horizon == 0 {
            return Err(Error::contract("horizon must be at least 1"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::contract("discount outside (0, 1]"));
        }
        if self.follower_counts.len() != n
            || self.transitions.len() != n
            || self.utilities.len() != n
            || self.terminal.len() != n
        {
            return Err(Error::contract("table lengths disagree on the number of states"));
        }
        for s in 0..n {
            let (la, fa) = (self.leader_counts[s], self.follower_counts[s]);
            if la == 0 || fa == 0 {
                return Err(Error::contract(format!("state {s} has an empty action list")));
            }
            if self.transitions[s].len() != la || self.utilities[s].len() != la {
                return Err(Error::contract(format!("state {s}: leader dimension mismatch")));
            }
            for a in 0..la {
                if self.transitions[s][a].len() != fa || self.utilities[s][a].len() != fa {
                    return Err(Error::contract(format!("state {s}: follower dimension mismatch")));
                }
                for b in 0..fa {
                    let d = &self.transitions[s][a][b];
                    if d.iter().any(|&(t, _)| t >= n) {
                        return Err(Error::contract(format!("state {s}: successor out of range")));
                    }
                    Distribution::normalized(d.iter().copied())?;
                }
            }
        }
        Ok(())
    }
}

impl StochasticGame for TabularGame {
    type State = usize;
    type LeaderAction = usize;
    type FollowerAction = usize;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn leader_actions(&self, s: &usize) -> Vec<usize> {
        (0..self.leader_counts[*s]).collect()
    }

    fn follower_actions(&self, s: &usize) -> Vec<usize> {
        (0..self.follower_counts[*s]).collect()
    }

    fn transition(&self, s: &usize, a: &usize, b: &usize) -> Distribution<usize> {
        Distribution::normalized(self.transitions[*s][*a][*b].iter().copied())
            .expect("tabular transitions are validated at construction")
    }

    fn stage_utility(&self, s: &usize, a: &usize, b: &usize) -> PlayerValues {
        self.utilities[*s][*a][*b]
    }

    fn terminal_utility(&self, s: &usize) -> PlayerValues {
        self.terminal[*s]
    }
}
