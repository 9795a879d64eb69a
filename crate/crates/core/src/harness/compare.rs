//! Side-by-side runs of the planner and the greedy baseline.
//!
//! Both planners of a case share the case seed, hence the same failure draws.
//! Utilities are summed over the planner's round count: a greedy episode that
//! stopped earlier keeps collecting the idle utility of its final state, and
//! one that ran longer is cut off.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::greedy_run;
use crate::episode::{rolling_horizon_run, EpisodeReport, EpisodeStatus};
use crate::error::Result;
use crate::harness::config::{load_scenario, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Complete,
    Incomplete,
    Stuck,
    Error,
}

impl From<EpisodeStatus> for CaseStatus {
    fn from(s: EpisodeStatus) -> Self {
        match s {
            EpisodeStatus::Complete => CaseStatus::Complete,
            EpisodeStatus::Incomplete => CaseStatus::Incomplete,
            EpisodeStatus::Stuck => CaseStatus::Stuck,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub case: String,
    pub greedy_status: CaseStatus,
    pub greedy_rounds: usize,
    pub greedy_utility: f64,
    pub sgcm_status: CaseStatus,
    pub sgcm_rounds: usize,
    pub sgcm_utility: f64,
}

/// Both episodes of one case, kept for inspection and plotting.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub row: ComparisonRow,
    pub greedy: Option<EpisodeReport>,
    pub sgcm: Option<EpisodeReport>,
    /// Messages of whatever failed in this case.
    pub errors: Vec<String>,
}

fn cell(report: &Option<EpisodeReport>, rounds: usize) -> (CaseStatus, usize, f64) {
    match report {
        Some(r) => (r.status.into(), r.rounds, r.utility_over_rounds(rounds)),
        None => (CaseStatus::Error, 0, f64::NAN),
    }
}

/// Run both planners on one case.
pub fn compare_case(case: &str, config: &ScenarioConfig) -> CaseOutcome {
    let mut errors = Vec::new();
    let mut keep = |r: Result<EpisodeReport>, who: &str| match r {
        Ok(report) => Some(report),
        Err(e) => {
            errors.push(format!("{who}: {e}"));
            None
        }
    };
    let (greedy, sgcm) = match config.build() {
        Ok((env, s0)) => (
            keep(greedy_run(&env, &s0, config.max_rounds, config.seed), "greedy"),
            keep(rolling_horizon_run(&env, &s0, &config.follower_model, &config.episode_settings()), "sgcm"),
        ),
        Err(e) => (keep(Err(e), "config"), None),
    };
    let rounds = match (&sgcm, &greedy) {
        (Some(s), _) => s.rounds.min(config.max_rounds),
        (None, Some(g)) => g.rounds,
        (None, None) => 0,
    };
    let (greedy_status, greedy_rounds, greedy_utility) = cell(&greedy, rounds);
    let (sgcm_status, sgcm_rounds, sgcm_utility) = cell(&sgcm, rounds);
    CaseOutcome {
        row: ComparisonRow {
            case: case.to_string(),
            greedy_status,
            greedy_rounds,
            greedy_utility,
            sgcm_status,
            sgcm_rounds,
            sgcm_utility,
        },
        greedy,
        sgcm,
        errors,
    }
}

/// Compare every case; a failing case is reported with status `error` and
/// does not stop the others.
pub fn compare_cases(cases: &[(String, ScenarioConfig)]) -> Vec<CaseOutcome> {
    cases.par_iter().map(|(name, config)| compare_case(name, config)).collect()
}

/// Scenario files (`*.json`) in `dir`, sorted by file name.
pub fn scenario_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "json"));
    files.sort();
    Ok(files)
}

/// Load every scenario in `dir`, naming each case after its file stem.
pub fn load_cases(dir: impl AsRef<Path>) -> Result<Vec<(String, ScenarioConfig)>> {
    scenario_files(dir)?
        .into_iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, load_scenario(&p)?))
        })
        .collect()
}

pub fn write_comparison_csv<W: std::io::Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "case",
            "greedy_status",
            "greedy_rounds",
            "greedy_utility",
            "sgcm_status",
            "sgcm_rounds",
            "sgcm_utility",
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::{Cell, Placement};

    #[test]
    fn single_trivial_case_gives_one_row() {
        let config = ScenarioConfig::with_objects(vec![Placement {
            obj_type: "red".into(),
            cell: Cell::new(1, 0),
            count: 1,
        }]);
        let out = compare_cases(&[("trivial".to_string(), config)]);
        assert_eq!(out.len(), 1);
        let row = &out[0].row;
        assert_eq!(row.sgcm_status, CaseStatus::Complete);
        assert_eq!(row.greedy_status, CaseStatus::Complete);
        assert_eq!(row.sgcm_rounds, row.greedy_rounds);
        assert_eq!(row.sgcm_utility, row.greedy_utility);

        let mut buf = Vec::new();
        write_comparison_csv(std::slice::from_ref(row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "case,greedy_status,greedy_rounds,greedy_utility,sgcm_status,sgcm_rounds,sgcm_utility");
        assert!(lines[1].starts_with("trivial,complete,"));
    }
}
