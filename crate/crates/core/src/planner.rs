//! Feedback Stackelberg planning over a finite horizon.
//!
//! Planning happens in two sweeps. The forward sweep enumerates the states
//! reachable at each stage from the current state, over every joint action and
//! every execution-failure branch. The backward sweep starts from terminal
//! utilities, solves one stage game per reachable state, and stores the values
//! the equilibrium yields.
//!
//! [`forward_reachability`] and [`backward_induction`] are the reference
//! sweeps and work on states only. [`plan_step`] fuses them: the forward sweep
//! caches utilities and successor indices so the backward sweep never
//! re-evaluates the game. Any explorer that yields a [`ReachableSets`] (for
//! instance a sampled one) can feed [`backward_induction`] directly.

use std::fmt::Debug;

use indexmap::{IndexMap, IndexSet};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Matrix, MixedPolicy, PlayerValues, PurePolicy, StochasticGame, ValueTable};
use crate::stage::{build_stage_matrices, StageMatrices, StageSolution, StageSolverKind};

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub solver: StageSolverKind,
    /// Limit on the number of states summed over all levels.
    pub state_cap: usize,
    /// Solve the states of one level on the rayon pool.
    pub parallel: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { solver: StageSolverKind::default(), state_cap: DEFAULT_STATE_CAP, parallel: true }
    }
}

/// `levels[t]` is the set of states that can occur at stage `t`; `levels[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachableSets<S: std::hash::Hash + Eq> {
    levels: Vec<IndexSet<S>>,
}

impl<S: std::hash::Hash + Eq + Clone> ReachableSets<S> {
    pub fn levels(&self) -> &[IndexSet<S>] {
        &self.levels
    }

    pub fn level(&self, t: usize) -> &IndexSet<S> {
        &self.levels[t]
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(IndexSet::len).collect()
    }

    pub fn total(&self) -> usize {
        self.levels.iter().map(IndexSet::len).sum()
    }
}

fn maybe_par<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Cached one-stage model of a state: utilities and successor indices per joint action.
struct StateModel {
    cols: usize,
    utilities: Vec<PlayerValues>,
    successors: Vec<Vec<(usize, f64)>>,
}

struct Expansion<S: std::hash::Hash + Eq> {
    sets: ReachableSets<S>,
    /// `models[t][k]` belongs to `sets.levels[t][k]`, for `t < T`.
    models: Vec<Vec<StateModel>>,
}

fn expand<G: StochasticGame>(root: &G::State, game: &G, config: &PlannerConfig) -> Result<Expansion<G::State>> {
    let horizon = game.horizon();
    if horizon == 0 {
        return Err(Error::contract("horizon must be at least 1"));
    }
    let mut levels: Vec<IndexSet<G::State>> = vec![IndexSet::from([root.clone()])];
    let mut models = Vec::with_capacity(horizon);
    let mut total = 1usize;
    for t in 0..horizon {
        let current: Vec<G::State> = levels[t].iter().cloned().collect();
        let raw: Vec<(Vec<PlayerValues>, Vec<Vec<(G::State, f64)>>, usize)> =
            maybe_par(&current, config.parallel, |s| {
                let leader = game.leader_actions(s);
                let follower = game.follower_actions(s);
                let mut utilities = Vec::with_capacity(leader.len() * follower.len());
                let mut successors = Vec::with_capacity(leader.len() * follower.len());
                for a in &leader {
                    for b in &follower {
                        utilities.push(game.stage_utility(s, a, b));
                        successors.push(game.transition(s, a, b).outcomes().to_vec());
                    }
                }
                (utilities, successors, follower.len())
            });
        let mut next: IndexSet<G::State> = IndexSet::new();
        let mut level_models = Vec::with_capacity(raw.len());
        for (utilities, successors, cols) in raw {
            let successors = successors
                .into_iter()
                .map(|dist| dist.into_iter().map(|(s, p)| (next.insert_full(s).0, p)).collect())
                .collect();
            level_models.push(StateModel { cols, utilities, successors });
        }
        total += next.len();
        if total > config.state_cap {
            return Err(Error::StateCap { cap: config.state_cap, reached: total });
        }
        levels.push(next);
        models.push(level_models);
    }
    Ok(Expansion { sets: ReachableSets { levels }, models })
}

/// Enumerate `S_0 = {s0}, S_1, ..., S_T` with the default state cap.
pub fn forward_reachability<G: StochasticGame>(s0: &G::State, game: &G) -> Result<ReachableSets<G::State>> {
    forward_reachability_with(s0, game, &PlannerConfig::default())
}

pub fn forward_reachability_with<G: StochasticGame>(
    s0: &G::State,
    game: &G,
    config: &PlannerConfig,
) -> Result<ReachableSets<G::State>> {
    expand(s0, game, config).map(|e| e.sets)
}

/// Stage equilibrium recorded for one `(t, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    pub solution: StageSolution,
    /// The follower had several best responses; the leader-preferred one was kept.
    pub follower_tie: bool,
}

/// Feedback Stackelberg equilibrium over the reachable sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPlan<S: std::hash::Hash + Eq> {
    /// `stages[t][s]` for `t < T`.
    stages: Vec<IndexMap<S, PlanEntry>>,
    /// `values[t]` for `t <= T`; `values[T]` holds terminal utilities.
    values: Vec<ValueTable<S>>,
}

impl<S: std::hash::Hash + Eq + Clone + Debug> PolicyPlan<S> {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn entry(&self, t: usize, s: &S) -> Option<&PlanEntry> {
        self.stages.get(t)?.get(s)
    }

    pub fn stage(&self, t: usize) -> &IndexMap<S, PlanEntry> {
        &self.stages[t]
    }

    pub fn values(&self, t: usize) -> &ValueTable<S> {
        &self.values[t]
    }

    pub fn value(&self, t: usize, s: &S) -> Option<PlayerValues> {
        self.values.get(t)?.get(s)
    }

    pub fn ties(&self) -> usize {
        self.stages.iter().flat_map(|st| st.values()).filter(|e| e.follower_tie).count()
    }

    fn from_stages(stages: Vec<IndexMap<S, PlanEntry>>, terminal: ValueTable<S>) -> Self {
        let mut values: Vec<ValueTable<S>> = stages
            .iter()
            .map(|st| {
                ValueTable::from_pairs(st.iter().map(|(s, e)| {
                    (s.clone(), PlayerValues::new(e.solution.leader_value, e.solution.follower_value))
                }))
            })
            .collect();
        values.push(terminal);
        PolicyPlan { stages, values }
    }
}

fn solve_entry(m: &StageMatrices, solver: StageSolverKind) -> Result<PlanEntry> {
    let solution = solver.solve(m)?;
    let follower_tie = solution.follower_tie(m);
    Ok(PlanEntry { solution, follower_tie })
}

/// Backward sweep with the default planner configuration.
pub fn backward_induction<G: StochasticGame>(
    sets: &ReachableSets<G::State>,
    game: &G,
) -> Result<PolicyPlan<G::State>> {
    backward_induction_with(sets, game, &PlannerConfig::default())
}

/// Backward sweep that rebuilds every stage game from the game definition.
pub fn backward_induction_with<G: StochasticGame>(
    sets: &ReachableSets<G::State>,
    game: &G,
    config: &PlannerConfig,
) -> Result<PolicyPlan<G::State>> {
    let horizon = sets.horizon();
    if horizon != game.horizon() {
        return Err(Error::contract(format!(
            "reachable sets cover {horizon} stages but the game horizon is {}",
            game.horizon()
        )));
    }
    let terminal = ValueTable::from_pairs(sets.level(horizon).iter().map(|s| (s.clone(), game.terminal_utility(s))));
    let mut next = terminal.clone();
    let mut stages = Vec::with_capacity(horizon);
    for t in (0..horizon).rev() {
        let states: Vec<G::State> = sets.level(t).iter().cloned().collect();
        let continuation = &next;
        let entries = maybe_par(&states, config.parallel, |s| {
            let m = build_stage_matrices(s, game, Some(continuation))?;
            solve_entry(&m, config.solver)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let stage: IndexMap<G::State, PlanEntry> = states.into_iter().zip(entries).collect();
        next = ValueTable::from_pairs(stage.iter().map(|(s, e)| {
            (s.clone(), PlayerValues::new(e.solution.leader_value, e.solution.follower_value))
        }));
        stages.push(stage);
    }
    stages.reverse();
    Ok(PolicyPlan::from_stages(stages, terminal))
}

fn backward_cached<G: StochasticGame>(
    exp: &Expansion<G::State>,
    game: &G,
    config: &PlannerConfig,
) -> Result<PolicyPlan<G::State>> {
    let horizon = exp.sets.horizon();
    let gamma = game.discount();
    let terminal_values: Vec<PlayerValues> = exp.sets.level(horizon).iter().map(|s| game.terminal_utility(s)).collect();
    let terminal =
        ValueTable::from_pairs(exp.sets.level(horizon).iter().cloned().zip(terminal_values.iter().copied()));
    let mut next = terminal_values;
    let mut stages = Vec::with_capacity(horizon);
    for t in (0..horizon).rev() {
        let continuation = &next;
        let entries = maybe_par(&exp.models[t], config.parallel, |model| {
            let rows = model.utilities.len() / model.cols;
            let mut ua = Matrix::zeros(rows, model.cols);
            let mut ub = Matrix::zeros(rows, model.cols);
            for (k, (u, succ)) in model.utilities.iter().zip(&model.successors).enumerate() {
                let (mut ca, mut cb) = (0.0, 0.0);
                for &(idx, p) in succ {
                    ca += p * continuation[idx].leader;
                    cb += p * continuation[idx].follower;
                }
                ua.set(k / model.cols, k % model.cols, u.leader + gamma * ca);
                ub.set(k / model.cols, k % model.cols, u.follower + gamma * cb);
            }
            solve_entry(&StageMatrices::new(ua, ub)?, config.solver)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        next = entries
            .iter()
            .map(|e| PlayerValues::new(e.solution.leader_value, e.solution.follower_value))
            .collect();
        stages.push(exp.sets.level(t).iter().cloned().zip(entries).collect());
    }
    stages.reverse();
    Ok(PolicyPlan::from_stages(stages, terminal))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanDiagnostics {
    /// `|S_t|` for `t = 0..=T`.
    pub reachable_sizes: Vec<usize>,
    /// Stage games solved at each `t < T`.
    pub solves_per_stage: Vec<usize>,
    /// Follower ties met anywhere in the plan.
    pub ties: usize,
    /// Whether the root decision itself had a follower tie.
    pub root_tie: bool,
    pub leader_value: f64,
    pub follower_value: f64,
}

/// First-stage decision at the current state.
#[derive(Debug, Clone)]
pub struct PlanStep<G: StochasticGame> {
    pub leader_actions: Vec<G::LeaderAction>,
    pub follower_actions: Vec<G::FollowerAction>,
    pub leader_policy: MixedPolicy,
    pub follower_action: PurePolicy,
    pub diagnostics: PlanDiagnostics,
}

impl<G: StochasticGame> PlanStep<G> {
    pub fn recommended_follower_action(&self) -> &G::FollowerAction {
        &self.follower_actions[self.follower_action.index()]
    }
}

/// Full plan from `s` (cached forward sweep followed by the backward sweep).
pub fn plan<G: StochasticGame>(s: &G::State, game: &G, config: &PlannerConfig) -> Result<PolicyPlan<G::State>> {
    let exp = expand(s, game, config)?;
    backward_cached(&exp, game, config)
}

/// Plan from `s` and return the stage-0 leader policy and follower recommendation.
pub fn plan_step<G: StochasticGame>(s: &G::State, game: &G, config: &PlannerConfig) -> Result<PlanStep<G>> {
    let exp = expand(s, game, config)?;
    let plan = backward_cached(&exp, game, config)?;
    let root = plan.entry(0, s).expect("root is planned").clone();
    Ok(PlanStep {
        leader_actions: game.leader_actions(s),
        follower_actions: game.follower_actions(s),
        leader_policy: root.solution.leader_policy.clone(),
        follower_action: root.solution.follower_action,
        diagnostics: PlanDiagnostics {
            reachable_sizes: exp.sets.sizes(),
            solves_per_stage: plan.stages.iter().map(IndexMap::len).collect(),
            ties: plan.ties(),
            root_tie: root.follower_tie,
            leader_value: root.solution.leader_value,
            follower_value: root.solution.follower_value,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TabularGame;

    fn absorbing(horizon: usize) -> TabularGame {
        TabularGame {
            horizon,
            discount: 1.0,
            leader_counts: vec![1],
            follower_counts: vec![1],
            transitions: vec![vec![vec![vec![(0, 1.0)]]]],
            utilities: vec![vec![vec![PlayerValues::default()]]],
            terminal: vec![PlayerValues::default()],
        }
    }

    #[test]
    fn absorbing_state_is_a_fixed_point() {
        let g = absorbing(2);
        let sets = forward_reachability(&0, &g).unwrap();
        assert_eq!(sets.sizes(), vec![1, 1, 1]);
        let plan = backward_induction(&sets, &g).unwrap();
        assert_eq!(plan.value(0, &0), Some(PlayerValues::default()));
    }

    #[test]
    fn deterministic_chain() {
        let mut g = absorbing(2);
        g.leader_counts = vec![1; 3];
        g.follower_counts = vec![1; 3];
        g.transitions = vec![
            vec![vec![vec![(1, 1.0)]]],
            vec![vec![vec![(2, 1.0)]]],
            vec![vec![vec![(2, 1.0)]]],
        ];
        g.utilities = vec![vec![vec![PlayerValues::new(1.0, 2.0)]]; 3];
        g.terminal = vec![PlayerValues::new(0.0, 0.0), PlayerValues::new(0.0, 0.0), PlayerValues::new(5.0, 1.0)];
        g.validate().unwrap();
        let sets = forward_reachability(&0, &g).unwrap();
        let levels: Vec<Vec<usize>> = sets.levels().iter().map(|l| l.iter().copied().collect()).collect();
        assert_eq!(levels, vec![vec![0], vec![1], vec![2]]);
        let plan = backward_induction(&sets, &g).unwrap();
        assert_eq!(plan.value(0, &0), Some(PlayerValues::new(7.0, 5.0)));
        assert_eq!(plan.value(2, &2), Some(PlayerValues::new(5.0, 1.0)));
    }

    #[test]
    fn state_cap_is_enforced() {
        let mut g = absorbing(3);
        g.leader_counts = vec![2; 4];
        g.follower_counts = vec![1; 4];
        g.transitions = (0..4).map(|s| vec![vec![vec![((s + 1) % 4, 1.0)]], vec![vec![((s + 2) % 4, 1.0)]]]).collect();
        g.utilities = vec![vec![vec![PlayerValues::default()]; 2]; 4];
        g.terminal = vec![PlayerValues::default(); 4];
        g.validate().unwrap();
        let config = PlannerConfig { state_cap: 3, ..PlannerConfig::default() };
        match forward_reachability_with(&0, &g, &config) {
            Err(Error::StateCap { cap: 3, .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn horizon_mismatch_is_a_contract_error() {
        let g = absorbing(2);
        let sets = forward_reachability(&0, &g).unwrap();
        let g3 = absorbing(3);
        assert!(matches!(backward_induction(&sets, &g3), Err(Error::Contract(_))));
    }
}
