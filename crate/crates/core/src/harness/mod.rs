//! Experiment plumbing: scenario files, runs, comparisons and plots.

pub mod compare;
pub mod config;
pub mod plot;

use std::path::{Path, PathBuf};

use crate::baselines::greedy_run;
use crate::episode::{rolling_horizon_run, EpisodeReport, PlannerKind};
use crate::error::Result;

pub use compare::{compare_case, compare_cases, load_cases, write_comparison_csv, CaseOutcome, CaseStatus, ComparisonRow};
pub use config::{load_scenario, RunOverrides, ScenarioConfig, WorkspaceSpec};
pub use plot::{emit_utility_plot, PlotSeries};

/// Run the scenario with its configured planner.
pub fn run_experiment(config: &ScenarioConfig) -> Result<EpisodeReport> {
    config.validate()?;
    let (env, s0) = config.build()?;
    match config.planner {
        PlannerKind::Sgcm => rolling_horizon_run(&env, &s0, &config.follower_model, &config.episode_settings()),
        PlannerKind::Greedy => greedy_run(&env, &s0, config.max_rounds, config.seed),
    }
}

/// Write `<stem>.json` and `<stem>.csv` into `dir`, creating it if needed.
pub fn write_report(report: &EpisodeReport, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&json, report.to_json()?)?;
    std::fs::write(&csv, report.csv_string()?)?;
    Ok((json, csv))
}

const BUNDLED: [(&str, &str); 10] = [
    ("case01", include_str!("../../scenarios/case01.json")),
    ("case02", include_str!("../../scenarios/case02.json")),
    ("case03", include_str!("../../scenarios/case03.json")),
    ("case04", include_str!("../../scenarios/case04.json")),
    ("case05", include_str!("../../scenarios/case05.json")),
    ("case06", include_str!("../../scenarios/case06.json")),
    ("case07", include_str!("../../scenarios/case07.json")),
    ("case08", include_str!("../../scenarios/case08.json")),
    ("case09", include_str!("../../scenarios/case09.json")),
    ("case10", include_str!("../../scenarios/case10.json")),
];

/// The ten bundled cases on the default 3x3 workspace, in name order.
pub fn bundled_suite() -> Vec<(String, ScenarioConfig)> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            let config = ScenarioConfig::from_json(text, name).expect("bundled scenarios are valid");
            (name.to_string(), config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::EpisodeStatus;
    use crate::rearrange::{Cell, Placement};

    #[test]
    fn bundled_suite_loads() {
        let suite = bundled_suite();
        assert_eq!(suite.len(), 10);
        for (name, c) in &suite {
            assert_eq!(&c.name, name);
            assert_eq!(c.horizon, 2);
            assert_eq!(c.costs.p_fail_leader, 0.1);
        }
    }

    #[test]
    fn goal_start_gives_empty_report() {
        let config = ScenarioConfig::with_objects(vec![Placement { obj_type: "green".into(), cell: Cell::new(2, 1), count: 2 }]);
        let r = run_experiment(&config).unwrap();
        assert_eq!((r.status, r.rounds), (EpisodeStatus::Complete, 0));
    }
}
