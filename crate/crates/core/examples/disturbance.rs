//! Follower deviations: a random move in round 2, and a follower that never
//! trusts the leader. The leader replans every round, so both still finish.

use std::collections::BTreeSet;

use stackplan::baselines::FollowerModel;
use stackplan::episode::{rolling_horizon_run, EpisodeReport};
use stackplan::harness::bundled_suite;

pub fn run() -> stackplan::Result<Vec<(String, EpisodeReport)>> {
    let (name, config) = bundled_suite().into_iter().nth(3).expect("suite has ten cases");
    let (env, s0) = config.build()?;
    let models = [
        ("obedient", FollowerModel::Obedient),
        ("random at round 2", FollowerModel::RandomAtRounds { rounds: BTreeSet::from([2]) }),
        ("zero trust", FollowerModel::ZeroTrust),
    ];
    let mut out = Vec::new();
    for (label, model) in models {
        let report = rolling_horizon_run(&env, &s0, &model, &config.episode_settings())?;
        let deviations: Vec<String> = report
            .records
            .iter()
            .filter(|r| r.follower_disturbed && r.follower_intent != r.follower_rec)
            .map(|r| format!("round {}: {} instead of {}", r.round, r.follower_intent, r.follower_rec))
            .collect();
        println!(
            "{name} / {label}: {} in {} rounds, utility {} {:?}",
            report.status, report.rounds, report.total_utility_a, deviations
        );
        out.push((label.to_string(), report));
    }
    Ok(out)
}

fn main() -> stackplan::Result<()> {
    run().map(|_| ())
}
