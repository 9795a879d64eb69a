//! Scenario files: JSON documents describing one rearrangement experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::FollowerModel;
use crate::episode::{EpisodeSettings, PlannerKind};
use crate::error::{Error, Result};
use crate::planner::PlannerConfig;
use crate::rearrange::{Cell, CostRewardConfig, GridState, Placement, Rearrangement, Workspace};
use crate::stage::StageSolverKind;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}
fn default_horizon() -> usize {
    2
}
fn default_discount() -> f64 {
    1.0
}
fn default_max_rounds() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub rows: usize,
    pub cols: usize,
    pub types: Vec<String>,
    pub goals: Vec<Cell>,
}

impl Default for WorkspaceSpec {
    fn default() -> Self {
        let ws = Workspace::default_3x3();
        WorkspaceSpec { rows: ws.rows(), cols: ws.cols(), types: ws.types().to_vec(), goals: ws.goals().to_vec() }
    }
}

impl WorkspaceSpec {
    pub fn build(&self) -> Result<Workspace> {
        Workspace::new(self.rows, self.cols, self.types.clone(), self.goals.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub workspace: WorkspaceSpec,
    pub objects: Vec<Placement>,
    #[serde(default)]
    pub costs: CostRewardConfig,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_discount")]
    pub discount: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub planner: PlannerKind,
    #[serde(default)]
    pub follower_model: FollowerModel,
    #[serde(default)]
    pub solver: StageSolverKind,
}

impl ScenarioConfig {
    /// Scenario on the default workspace with every other field at its default.
    pub fn with_objects(objects: Vec<Placement>) -> Self {
        ScenarioConfig {
            schema_version: SCENARIO_SCHEMA_VERSION,
            name: String::new(),
            workspace: WorkspaceSpec::default(),
            objects,
            costs: CostRewardConfig::default(),
            horizon: default_horizon(),
            discount: default_discount(),
            max_rounds: default_max_rounds(),
            seed: 0,
            planner: PlannerKind::default(),
            follower_model: FollowerModel::default(),
            solver: StageSolverKind::default(),
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: origin.to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {} (expected {SCENARIO_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Validation("max_rounds must be at least 1".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Validation(format!("discount {} is outside (0, 1]", self.discount)));
        }
        self.follower_model.validate()?;
        self.build().map(|_| ())
    }

    /// The environment and initial state this scenario describes.
    pub fn build(&self) -> Result<(Rearrangement, GridState)> {
        let env = Rearrangement::new(self.workspace.build()?, self.costs)?;
        let s0 = env.workspace.state_from_named(&self.objects)?;
        Ok((env, s0))
    }

    pub fn episode_settings(&self) -> EpisodeSettings {
        EpisodeSettings {
            horizon: self.horizon,
            discount: self.discount,
            max_rounds: self.max_rounds,
            seed: self.seed,
            planner: PlannerConfig { solver: self.solver, ..PlannerConfig::default() },
        }
    }
}

/// Command-line adjustments applied on top of a loaded scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub planner: Option<PlannerKind>,
    pub horizon: Option<usize>,
    pub p_fail_leader: Option<f64>,
    pub p_fail_follower: Option<f64>,
    pub seed: Option<u64>,
    pub max_rounds: Option<usize>,
    pub follower_model: Option<FollowerModel>,
}

impl RunOverrides {
    /// Apply the overrides and re-validate.
    pub fn apply(&self, config: &mut ScenarioConfig) -> Result<()> {
        if let Some(p) = self.planner {
            config.planner = p;
        }
        if let Some(t) = self.horizon {
            config.horizon = t;
        }
        if let Some(p) = self.p_fail_leader {
            config.costs.p_fail_leader = p;
        }
        if let Some(p) = self.p_fail_follower {
            config.costs.p_fail_follower = p;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(n) = self.max_rounds {
            config.max_rounds = n;
        }
        if let Some(m) = &self.follower_model {
            config.follower_model = m.clone();
        }
        config.validate()
    }
}

/// Read, parse and validate a scenario file; missing fields take their defaults.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_json(&text, &path.display().to_string())
}
