//! Greedy baseline and follower deviation models.
//!
//! A greedy robot scores each feasible action by the reward of the state it
//! would produce minus the action's cost, ignoring its partner, and moves only
//! when that strictly beats standing still.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::episode::{finish_report, play_round, EpisodeReport, EpisodeStatus, FollowerChoice, PlannerKind};
use crate::error::{Error, Result};
use crate::rearrange::{GridState, MoveAction, Rearrangement, Robot};

/// A move must beat the no-op by more than this to be chosen.
pub const GREEDY_TOLERANCE: f64 = 1e-9;

/// Longest state cycle the livelock detector looks for.
pub const MAX_CYCLE_PERIOD: usize = 4;
/// Consecutive repetitions of a cycle needed to call it a livelock.
pub const CYCLE_REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FollowerModel {
    #[default]
    Obedient,
    /// Deviates uniformly at random in the listed rounds (1-based).
    RandomAtRounds { rounds: BTreeSet<usize> },
    /// Deviates uniformly at random with probability `p` each round.
    RandomWithProb { p: f64 },
    /// Ignores the recommendation and acts greedily.
    ZeroTrust,
}

impl FollowerModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FollowerModel::RandomAtRounds { rounds } if rounds.contains(&0) => {
                Err(Error::Validation("disturbance rounds are 1-based".into()))
            }
            FollowerModel::RandomWithProb { p } if !(0.0..=1.0).contains(p) => {
                Err(Error::Validation(format!("disturbance probability {p} is not in [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// One-step greedy value of `a`: reward after the move minus its cost.
pub fn greedy_value(env: &Rearrangement, s: &GridState, a: &MoveAction) -> Option<f64> {
    let next = env.workspace.apply(s, a)?;
    Some(env.state_reward(&next) - env.action_cost(s, a).ok()?)
}

fn greedy_step(env: &Rearrangement, s: &GridState, robot: Robot) -> MoveAction {
    let idle = env.state_reward(s);
    let mut moves = env.feasible_actions(s, robot);
    moves.retain(|a| !a.is_noop());
    moves.sort();
    let mut best = MoveAction::NoOp;
    let mut best_value = idle;
    for a in moves {
        let v = greedy_value(env, s, &a).expect("feasible by construction");
        if v > best_value + GREEDY_TOLERANCE {
            best = a;
            best_value = v;
        }
    }
    best
}

pub fn greedy_leader_step(env: &Rearrangement, s: &GridState) -> MoveAction {
    greedy_step(env, s, Robot::Leader)
}

pub fn greedy_follower_step(env: &Rearrangement, s_after_leader: &GridState) -> MoveAction {
    greedy_step(env, s_after_leader, Robot::Follower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FollowerDecision {
    pub action: MoveAction,
    /// The model overrode the recommendation.
    pub disturbed: bool,
    /// The recommendation was infeasible and was replaced by the no-op.
    pub degraded: bool,
}

/// The follower's intended action for `round` given the leader's recommendation.
///
/// Random deviations draw uniformly from the follower's feasible actions,
/// excluding the recommendation whenever something else is available.
pub fn follower_execute<R: Rng>(
    model: &FollowerModel,
    recommended: &MoveAction,
    s_after_leader: &GridState,
    round: usize,
    env: &Rearrangement,
    rng: &mut R,
) -> FollowerDecision {
    let feasible = env.workspace.is_applicable(s_after_leader, recommended);
    let rec = if feasible { *recommended } else { MoveAction::NoOp };
    let degraded = !feasible;
    let random_now = match model {
        FollowerModel::Obedient => false,
        FollowerModel::RandomAtRounds { rounds } => rounds.contains(&round),
        FollowerModel::RandomWithProb { p } => rng.gen::<f64>() < *p,
        FollowerModel::ZeroTrust => {
            let action = greedy_follower_step(env, s_after_leader);
            return FollowerDecision { action, disturbed: true, degraded };
        }
    };
    if !random_now {
        return FollowerDecision { action: rec, disturbed: false, degraded };
    }
    let mut options = env.feasible_actions(s_after_leader, Robot::Follower);
    if options.len() > 1 {
        options.retain(|a| *a != rec);
    }
    let action = options[rng.gen_range(0..options.len())];
    FollowerDecision { action, disturbed: true, degraded }
}

/// True when the tail of `states` repeats a cycle of period 2..=4 three times.
fn in_cycle(states: &[GridState]) -> bool {
    (2..=MAX_CYCLE_PERIOD).any(|p| {
        let span = p * CYCLE_REPETITIONS;
        if states.len() < span {
            return false;
        }
        let tail = &states[states.len() - span..];
        let periodic = (p..span).all(|i| tail[i] == tail[i - p]);
        let constant = tail[..p].iter().all(|x| *x == tail[0]);
        periodic && !constant
    })
}

/// Leader then follower act greedily each round, with the same failure draws
/// as the rolling-horizon planner under the same seed.
///
/// Stops as `stuck` when the same state and idle intents repeat in
/// consecutive rounds, or the state sequence cycles.
pub fn greedy_run(env: &Rearrangement, s0: &GridState, max_rounds: usize, seed: u64) -> Result<EpisodeReport> {
    if max_rounds == 0 {
        return Err(Error::Validation("max_rounds must be at least 1".into()));
    }
    let mut s = s0.clone();
    let mut records = Vec::new();
    let mut states = vec![s.clone()];
    let mut previous: Option<(GridState, MoveAction, MoveAction)> = None;
    let mut stuck = false;
    for round in 1..=max_rounds {
        if env.is_goal(&s) {
            break;
        }
        let leader = greedy_leader_step(env, &s);
        let mut follower = MoveAction::NoOp;
        let (record, next) = play_round(env, &s, round, seed, leader, None, |mid| {
            follower = greedy_follower_step(env, mid);
            Ok(FollowerChoice {
                recommended: follower,
                decision: FollowerDecision { action: follower, disturbed: false, degraded: false },
            })
        })?;
        records.push(record);
        let triple = (s.clone(), leader, follower);
        let idle_repeat = leader.is_noop() && follower.is_noop() && previous.as_ref() == Some(&triple);
        previous = Some(triple);
        s = next;
        states.push(s.clone());
        if idle_repeat || in_cycle(&states) {
            stuck = true;
            break;
        }
    }
    let status = if env.is_goal(&s) {
        EpisodeStatus::Complete
    } else if stuck {
        EpisodeStatus::Stuck
    } else {
        EpisodeStatus::Incomplete
    };
    Ok(finish_report(env, PlannerKind::Greedy, seed, status, &s, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::{Cell, CostRewardConfig, Workspace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RED: usize = 0;
    const BLUE: usize = 2;

    fn env_with(p_fail: f64) -> Rearrangement {
        let cfg = CostRewardConfig { p_fail_leader: p_fail, p_fail_follower: p_fail, ..Default::default() };
        Rearrangement::new(Workspace::default_3x3(), cfg).unwrap()
    }

    fn mv(t: usize, from: (usize, usize), to: (usize, usize)) -> MoveAction {
        MoveAction::Move { obj_type: t, from: Cell::new(from.0, from.1), to: Cell::new(to.0, to.1) }
    }

    /// Exhaustive argmax with the documented tie order, as an oracle.
    fn oracle_step(env: &Rearrangement, s: &GridState, robot: Robot) -> MoveAction {
        let mut scored: Vec<(f64, MoveAction)> = env
            .feasible_actions(s, robot)
            .into_iter()
            .map(|a| {
                let next = env.workspace.apply(s, &a).unwrap();
                let cost = env.action_cost(s, &a).unwrap();
                (env.state_reward(&next) - cost, a)
            })
            .collect();
        let idle = env.state_reward(s);
        let best = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        if best <= idle + GREEDY_TOLERANCE {
            return MoveAction::NoOp;
        }
        scored.retain(|x| x.0 >= best - GREEDY_TOLERANCE && !x.1.is_noop());
        scored.iter().map(|x| x.1).min().unwrap()
    }

    #[test]
    fn greedy_at_goal_idles() {
        let env = env_with(0.1);
        let s = env.workspace.state_from_placements(&[(Cell::new(2, 0), RED, 2)]).unwrap();
        assert_eq!(greedy_leader_step(&env, &s), MoveAction::NoOp);
        assert_eq!(greedy_follower_step(&env, &s), MoveAction::NoOp);
    }

    #[test]
    fn greedy_takes_the_completing_move() {
        let env = env_with(0.1);
        let s = env.workspace.state_from_placements(&[(Cell::new(1, 0), RED, 1)]).unwrap();
        assert_eq!(greedy_leader_step(&env, &s), mv(RED, (1, 0), (2, 0)));
        assert_eq!(greedy_follower_step(&env, &s), mv(RED, (1, 0), (2, 0)));
        assert_eq!(oracle_step(&env, &s, Robot::Leader), mv(RED, (1, 0), (2, 0)));
    }

    #[test]
    fn greedy_idles_when_moves_do_not_pay() {
        // crowded: one-step gain 2 equals the doubled axis cost
        let env = env_with(0.1);
        let s = env.workspace.state_from_placements(&[(Cell::new(1, 0), RED, 2)]).unwrap();
        assert_eq!(oracle_step(&env, &s, Robot::Follower), MoveAction::NoOp);
        assert_eq!(greedy_follower_step(&env, &s), MoveAction::NoOp);
        assert_eq!(greedy_leader_step(&env, &s), MoveAction::NoOp);

        // expensive moves never pay
        let cfg = CostRewardConfig { base_cost_axis: 5.0, base_cost_diagonal: 5.0, ..Default::default() };
        let pricey = Rearrangement::new(Workspace::default_3x3(), cfg).unwrap();
        let s = pricey.workspace.state_from_placements(&[(Cell::new(0, 2), BLUE, 1)]).unwrap();
        assert_eq!(greedy_leader_step(&pricey, &s), MoveAction::NoOp);
    }

    #[test]
    fn greedy_matches_oracle_on_assorted_states() {
        let env = env_with(0.1);
        let ws = &env.workspace;
        let states = [
            vec![(Cell::new(0, 0), RED, 1), (Cell::new(0, 2), BLUE, 1)],
            vec![(Cell::new(1, 1), RED, 1), (Cell::new(1, 1), BLUE, 1)],
            vec![(Cell::new(0, 1), 1, 3)],
            vec![(Cell::new(0, 0), RED, 1), (Cell::new(1, 1), 1, 1), (Cell::new(2, 0), BLUE, 1)],
        ];
        for placements in states {
            let s = ws.state_from_placements(&placements).unwrap();
            assert_eq!(greedy_leader_step(&env, &s), oracle_step(&env, &s, Robot::Leader));
            assert_eq!(greedy_follower_step(&env, &s), oracle_step(&env, &s, Robot::Follower));
        }
    }

    #[test]
    fn follower_models() {
        let env = env_with(0.1);
        let ws = &env.workspace;
        let s = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1), (Cell::new(1, 1), BLUE, 1)]).unwrap();
        let rec = mv(BLUE, (1, 1), (0, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);

        let d = follower_execute(&FollowerModel::Obedient, &rec, &s, 1, &env, &mut rng);
        assert_eq!((d.action, d.disturbed, d.degraded), (rec, false, false));

        let at2 = FollowerModel::RandomAtRounds { rounds: BTreeSet::from([2]) };
        assert_eq!(follower_execute(&at2, &rec, &s, 1, &env, &mut rng).action, rec);
        let d = follower_execute(&at2, &rec, &s, 2, &env, &mut rng);
        assert!(d.disturbed);
        assert_ne!(d.action, rec);
        assert!(ws.is_applicable(&s, &d.action));

        // the only red move that reduces distance; blue moves are ruled out by position
        let d = follower_execute(&FollowerModel::ZeroTrust, &rec, &s, 1, &env, &mut rng);
        assert_eq!(d.action, greedy_follower_step(&env, &s));

        let always = FollowerModel::RandomWithProb { p: 1.0 };
        let d = follower_execute(&always, &rec, &s, 5, &env, &mut rng);
        assert!(d.disturbed && d.action != rec);
        let never = FollowerModel::RandomWithProb { p: 0.0 };
        assert_eq!(follower_execute(&never, &rec, &s, 5, &env, &mut rng).action, rec);
    }

    #[test]
    fn zero_trust_picks_unique_improving_move() {
        let env = env_with(0.1);
        let s = env.workspace.state_from_placements(&[(Cell::new(1, 0), RED, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = follower_execute(&FollowerModel::ZeroTrust, &MoveAction::NoOp, &s, 1, &env, &mut rng);
        assert_eq!(d.action, mv(RED, (1, 0), (2, 0)));
    }

    #[test]
    fn infeasible_recommendation_degrades() {
        let env = env_with(0.1);
        let s = env.workspace.state_from_placements(&[(Cell::new(2, 0), RED, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = follower_execute(&FollowerModel::Obedient, &mv(RED, (1, 0), (2, 0)), &s, 1, &env, &mut rng);
        assert_eq!(d.action, MoveAction::NoOp);
        assert!(d.degraded);
    }

    #[test]
    fn random_draw_with_single_option_keeps_it() {
        let env = env_with(0.1);
        let s = env.workspace.empty_state();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = FollowerModel::RandomWithProb { p: 1.0 };
        assert_eq!(follower_execute(&model, &MoveAction::NoOp, &s, 1, &env, &mut rng).action, MoveAction::NoOp);
    }

    #[test]
    fn model_validation() {
        assert!(FollowerModel::RandomAtRounds { rounds: BTreeSet::from([0]) }.validate().is_err());
        assert!(FollowerModel::RandomWithProb { p: 1.2 }.validate().is_err());
        assert!(FollowerModel::ZeroTrust.validate().is_ok());
    }

    #[test]
    fn greedy_run_outcomes() {
        let env = env_with(0.0);
        let ws = &env.workspace;
        let goal = ws.state_from_placements(&[(Cell::new(2, 0), RED, 1)]).unwrap();
        let r = greedy_run(&env, &goal, 20, 0).unwrap();
        assert_eq!((r.status, r.rounds), (EpisodeStatus::Complete, 0));

        let one = ws.state_from_placements(&[(Cell::new(1, 0), RED, 1)]).unwrap();
        let r = greedy_run(&env, &one, 20, 0).unwrap();
        assert_eq!((r.status, r.rounds), (EpisodeStatus::Complete, 1));
        assert_eq!(r.records[0].leader_exec, "red:r1c0>r2c0");
        assert_eq!(r.records[0].follower_exec, "noop");

        let crowded = ws.state_from_placements(&[(Cell::new(1, 0), RED, 2)]).unwrap();
        let r = greedy_run(&env, &crowded, 20, 0).unwrap();
        assert_eq!(r.status, EpisodeStatus::Stuck);
        assert_eq!(r.rounds, 2);
    }

    #[test]
    fn cycle_detector() {
        let ws = Workspace::default_3x3();
        let a = ws.state_from_placements(&[(Cell::new(0, 0), RED, 1)]).unwrap();
        let b = ws.state_from_placements(&[(Cell::new(0, 1), RED, 1)]).unwrap();
        let abab = vec![a.clone(), b.clone(), a.clone(), b.clone(), a.clone(), b.clone()];
        assert!(in_cycle(&abab));
        assert!(!in_cycle(&abab[..5]));
        assert!(!in_cycle(&[a.clone(), a.clone(), a.clone(), a.clone(), a.clone(), a]));
    }
}
