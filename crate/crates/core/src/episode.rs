//! Episode execution: the rolling-horizon loop and the per-round log.
//!
//! Every round draws its randomness from independent ChaCha streams keyed by
//! `(seed, round, purpose)`. Failure draws therefore line up across planners
//! run with the same seed, whatever else each planner samples.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{follower_execute, FollowerDecision, FollowerModel};
use crate::error::{Error, Result};
use crate::planner::{plan_step, PlannerConfig};
use crate::rearrange::{GridState, MoveAction, Placement, Rearrangement, RearrangementGame};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const STREAM_FAILURE: u64 = 0;
const STREAM_LEADER: u64 = 1;
const STREAM_FOLLOWER: u64 = 2;

pub(crate) fn round_rng(seed: u64, round: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((round as u64) << 8) | stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    #[default]
    Sgcm,
    Greedy,
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlannerKind::Sgcm => "sgcm",
            PlannerKind::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Complete,
    Incomplete,
    Stuck,
}

impl std::fmt::Display for EpisodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EpisodeStatus::Complete => "complete",
            EpisodeStatus::Incomplete => "incomplete",
            EpisodeStatus::Stuck => "stuck",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMass {
    pub action: String,
    pub probability: f64,
}

/// What the planner saw when choosing the round's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundPlanInfo {
    pub reachable_sizes: Vec<usize>,
    /// Stage games anywhere in the plan where the follower was indifferent.
    pub stage_ties: usize,
    /// The follower was indifferent at the root stage game.
    pub root_tie: bool,
    pub leader_value: f64,
    pub follower_value: f64,
    /// Leader actions with positive probability.
    pub leader_policy: Vec<PolicyMass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub state_before: Vec<Placement>,
    pub state_hash: String,
    pub dist_to_goal: usize,
    pub leader_intent: String,
    pub leader_exec: String,
    pub leader_success: bool,
    pub follower_rec: String,
    pub follower_intent: String,
    pub follower_exec: String,
    pub follower_success: bool,
    /// The follower did not act on the recommendation by choice of its model.
    pub follower_disturbed: bool,
    /// The recommendation was infeasible after the leader moved and became a no-op.
    pub recommendation_degraded: bool,
    pub u_a: f64,
    pub u_b: f64,
    pub state_after: Vec<Placement>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plan: Option<RoundPlanInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub schema_version: u32,
    pub planner: PlannerKind,
    pub seed: u64,
    pub status: EpisodeStatus,
    pub rounds: usize,
    pub total_utility_a: f64,
    pub total_utility_b: f64,
    pub final_state: Vec<Placement>,
    /// Stage utility of idling in the final state.
    pub final_state_reward: f64,
    pub records: Vec<RoundRecord>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    round: usize,
    state_hash: &'a str,
    leader_intent: &'a str,
    leader_exec: &'a str,
    follower_rec: &'a str,
    follower_exec: &'a str,
    #[serde(rename = "u_A")]
    u_a: f64,
    #[serde(rename = "u_B")]
    u_b: f64,
    dist_to_goal: usize,
}

impl EpisodeReport {
    pub fn leader_utilities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.u_a).collect()
    }

    pub fn disturbed_rounds(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.follower_disturbed).map(|r| r.round).collect()
    }

    /// Leader utility summed over exactly `rounds` rounds; rounds after the
    /// episode ended count as idling in the final state.
    pub fn utility_over_rounds(&self, rounds: usize) -> f64 {
        let played: f64 = self.records.iter().take(rounds).map(|r| r.u_a).sum();
        let idle = rounds.saturating_sub(self.records.len());
        played + idle as f64 * self.final_state_reward
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: EpisodeReport = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported report schema_version {} (expected {REPORT_SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(CsvRow {
                round: r.round,
                state_hash: &r.state_hash,
                leader_intent: &r.leader_intent,
                leader_exec: &r.leader_exec,
                follower_rec: &r.follower_rec,
                follower_exec: &r.follower_exec,
                u_a: r.u_a,
                u_b: r.u_b,
                dist_to_goal: r.dist_to_goal,
            })?;
        }
        if self.records.is_empty() {
            w.write_record([
                "round",
                "state_hash",
                "leader_intent",
                "leader_exec",
                "follower_rec",
                "follower_exec",
                "u_A",
                "u_B",
                "dist_to_goal",
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// The follower's side of a round, chosen after seeing the leader's executed move.
pub(crate) struct FollowerChoice {
    pub recommended: MoveAction,
    pub decision: FollowerDecision,
}

/// Plays one round from `s`: failure draws, leader execution, follower choice,
/// follower failure, joint application. Returns the record and the next state.
pub(crate) fn play_round(
    env: &Rearrangement,
    s: &GridState,
    round: usize,
    seed: u64,
    leader_intent: MoveAction,
    plan: Option<RoundPlanInfo>,
    choose_follower: impl FnOnce(&GridState) -> Result<FollowerChoice>,
) -> Result<(RoundRecord, GridState)> {
    let ws = &env.workspace;
    let mut fail_rng = round_rng(seed, round, STREAM_FAILURE);
    let leader_draw: f64 = fail_rng.gen();
    let follower_draw: f64 = fail_rng.gen();
    let leader_success = leader_draw >= env.config.p_fail_leader;
    let follower_success = follower_draw >= env.config.p_fail_follower;

    let leader_exec = if leader_success { leader_intent } else { MoveAction::NoOp };
    let mid = ws.apply(s, &leader_exec).ok_or_else(|| {
        Error::Internal(format!("leader chose infeasible action {}", ws.describe_action(&leader_exec)))
    })?;
    let choice = choose_follower(&mid)?;
    let follower_attempt = if follower_success { choice.decision.action } else { MoveAction::NoOp };
    let (next, follower_exec) = env.apply_joint(s, &leader_exec, &follower_attempt)?;
    let u = env.stage_utility(s, &leader_exec, &follower_exec)?;

    let record = RoundRecord {
        round,
        state_before: ws.named_placements(s),
        state_hash: format!("{:016x}", s.stable_hash()),
        dist_to_goal: env.distance_to_goal(s),
        leader_intent: ws.describe_action(&leader_intent),
        leader_exec: ws.describe_action(&leader_exec),
        leader_success,
        follower_rec: ws.describe_action(&choice.recommended),
        follower_intent: ws.describe_action(&choice.decision.action),
        follower_exec: ws.describe_action(&follower_exec),
        follower_success,
        follower_disturbed: choice.decision.disturbed,
        recommendation_degraded: choice.decision.degraded,
        u_a: u.leader,
        u_b: u.follower,
        state_after: ws.named_placements(&next),
        plan,
    };
    Ok((record, next))
}

pub(crate) fn finish_report(
    env: &Rearrangement,
    planner: PlannerKind,
    seed: u64,
    status: EpisodeStatus,
    final_state: &GridState,
    records: Vec<RoundRecord>,
) -> EpisodeReport {
    EpisodeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        planner,
        seed,
        status,
        rounds: records.len(),
        total_utility_a: records.iter().map(|r| r.u_a).sum(),
        total_utility_b: records.iter().map(|r| r.u_b).sum(),
        final_state: env.workspace.named_placements(final_state),
        final_state_reward: env.state_reward(final_state),
        records,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSettings {
    pub horizon: usize,
    pub discount: f64,
    pub max_rounds: usize,
    pub seed: u64,
    pub planner: PlannerConfig,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        EpisodeSettings { horizon: 2, discount: 1.0, max_rounds: 20, seed: 0, planner: PlannerConfig::default() }
    }
}

/// Replans from the observed state every round and executes the first stage.
pub fn rolling_horizon_run(
    env: &Rearrangement,
    s0: &GridState,
    follower_model: &FollowerModel,
    settings: &EpisodeSettings,
) -> Result<EpisodeReport> {
    if settings.max_rounds == 0 {
        return Err(Error::Validation("max_rounds must be at least 1".into()));
    }
    follower_model.validate()?;
    let game = RearrangementGame::new(env, settings.horizon, settings.discount)?;
    let ws = &env.workspace;
    let mut s = s0.clone();
    let mut records = Vec::new();
    for round in 1..=settings.max_rounds {
        if env.is_goal(&s) {
            break;
        }
        let step = plan_step(&s, &game, &settings.planner)?;
        let u: f64 = round_rng(settings.seed, round, STREAM_LEADER).gen();
        let leader_intent = step.leader_actions[step.leader_policy.sample_with(u)];
        let recommended = *step.recommended_follower_action();
        let info = RoundPlanInfo {
            reachable_sizes: step.diagnostics.reachable_sizes.clone(),
            stage_ties: step.diagnostics.ties,
            root_tie: step.diagnostics.root_tie,
            leader_value: step.diagnostics.leader_value,
            follower_value: step.diagnostics.follower_value,
            leader_policy: step
                .leader_actions
                .iter()
                .zip(step.leader_policy.probs())
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| PolicyMass { action: ws.describe_action(a), probability: p })
                .collect(),
        };
        let mut follower_rng = round_rng(settings.seed, round, STREAM_FOLLOWER);
        let (record, next) = play_round(env, &s, round, settings.seed, leader_intent, Some(info), |mid| {
            let decision = follower_execute(follower_model, &recommended, mid, round, env, &mut follower_rng);
            Ok(FollowerChoice { recommended, decision })
        })?;
        records.push(record);
        s = next;
    }
    let status = if env.is_goal(&s) { EpisodeStatus::Complete } else { EpisodeStatus::Incomplete };
    Ok(finish_report(env, PlannerKind::Sgcm, settings.seed, status, &s, records))
}
