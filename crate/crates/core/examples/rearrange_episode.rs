//! One rolling-horizon episode on a bundled case, printed round by round.

use stackplan::baselines::FollowerModel;
use stackplan::episode::{rolling_horizon_run, EpisodeReport};
use stackplan::harness::bundled_suite;

pub fn run() -> stackplan::Result<EpisodeReport> {
    let (name, config) = bundled_suite().into_iter().next().expect("suite is not empty");
    let (env, s0) = config.build()?;
    println!("{name}, initial layout:\n{}", env.workspace.render(&s0));
    let report = rolling_horizon_run(&env, &s0, &FollowerModel::Obedient, &config.episode_settings())?;
    for r in &report.records {
        println!(
            "round {}: dist {} | leader {} -> {} | follower rec {} -> {} | u = {}",
            r.round, r.dist_to_goal, r.leader_intent, r.leader_exec, r.follower_rec, r.follower_exec, r.u_a
        );
    }
    println!("{} after {} rounds, total utility {}", report.status, report.rounds, report.total_utility_a);
    Ok(report)
}

fn main() -> stackplan::Result<()> {
    run().map(|_| ())
}
