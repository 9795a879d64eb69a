//! Stage-wise utility of the planner, the greedy baseline and a disturbed
//! run on one case, written as an SVG with its data CSV.
//!
//! Usage: `cargo run --example utility_plot [OUT.svg]`

use std::collections::BTreeSet;
use std::path::PathBuf;

use stackplan::baselines::{greedy_run, FollowerModel};
use stackplan::episode::rolling_horizon_run;
use stackplan::harness::{bundled_suite, emit_utility_plot, PlotSeries};

pub fn run(out: PathBuf) -> stackplan::Result<PathBuf> {
    let (name, config) = bundled_suite().into_iter().next().expect("suite is not empty");
    let (env, s0) = config.build()?;
    let settings = config.episode_settings();
    let sgcm = rolling_horizon_run(&env, &s0, &FollowerModel::Obedient, &settings)?;
    let greedy = greedy_run(&env, &s0, config.max_rounds, config.seed)?;
    let disturbed =
        rolling_horizon_run(&env, &s0, &FollowerModel::RandomAtRounds { rounds: BTreeSet::from([2]) }, &settings)?;
    let series = [
        PlotSeries::from_report(format!("{name} sgcm"), &sgcm),
        PlotSeries::from_report(format!("{name} greedy"), &greedy),
        PlotSeries::from_report(format!("{name} deviation"), &disturbed),
    ];
    let csv = emit_utility_plot(&series, &out)?;
    println!("wrote {} and {}", out.display(), csv.display());
    Ok(out)
}

fn main() -> stackplan::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("utility.svg"));
    run(out).map(|_| ())
}
