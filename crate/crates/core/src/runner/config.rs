use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::agent::{Agent, AgentConfig, ChatClient, ScriptedPolicy};
use crate::bargaining::{BargainingVariant, StrategyKind};
use crate::tasks::{PromptVariant, TaskVariant};

/// A JSON experiment description, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Tasks(TaskExperimentConfig),
    Bargaining(BargainingExperimentConfig),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
        // relative paths inside a config are resolved against its directory
        let base = path.parent().unwrap_or(Path::new(""));
        match &mut config {
            ExperimentConfig::Tasks(c) => c.resolve_paths(base),
            ExperimentConfig::Bargaining(c) => c.resolve_paths(base),
        }
        Ok(config)
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() && !base.as_os_str().is_empty() {
        *p = base.join(&*p);
    }
}

/// How an agent answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentSpec {
    Llm(AgentConfig),
    Scripted(ScriptedPolicy),
}

impl AgentSpec {
    pub fn build(&self) -> Result<Agent, RunnerError> {
        Ok(match self {
            AgentSpec::Llm(c) => Agent::Remote(ChatClient::new(c.clone())?),
            AgentSpec::Scripted(p) => {
                p.validate()?;
                Agent::Scripted(p.clone())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBinding {
    pub id: String,
    #[serde(flatten)]
    pub spec: AgentSpec,
}

fn default_trials() -> u32 {
    30
}

fn default_permutations() -> u32 {
    3
}

fn default_tasks() -> Vec<TaskVariant> {
    TaskVariant::ALL.to_vec()
}

fn default_prompt_variants() -> Vec<PromptVariant> {
    PromptVariant::ALL.to_vec()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskExperimentConfig {
    pub question_set: PathBuf,
    pub agents: Vec<AgentBinding>,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<TaskVariant>,
    #[serde(default = "default_prompt_variants")]
    pub prompt_variants: Vec<PromptVariant>,
    #[serde(default = "default_trials")]
    pub trials_per_permutation: u32,
    #[serde(default = "default_permutations")]
    pub permutations: u32,
    /// Explicit shuffle seeds, one per permutation index; seed 0 is the
    /// file order. Derived from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_tallies: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focality_labels: Option<PathBuf>,
}

impl TaskExperimentConfig {
    pub fn validate(&self) -> Result<(), RunnerError> {
        let fail = |m: String| Err(RunnerError::Config(m));
        if self.agents.is_empty() {
            return fail("no agents configured".into());
        }
        let mut ids = std::collections::HashSet::new();
        for a in &self.agents {
            if a.id.trim().is_empty() || !ids.insert(a.id.as_str()) {
                return fail(format!("agent id {:?} is empty or repeated", a.id));
            }
        }
        if self.trials_per_permutation == 0 {
            return fail("trials_per_permutation must be at least 1".into());
        }
        if self.permutations == 0 {
            return fail("permutations must be at least 1".into());
        }
        if self.tasks.is_empty() || self.prompt_variants.is_empty() {
            return fail("task and prompt variant lists must be non-empty".into());
        }
        if let Some(seeds) = &self.permutation_seeds {
            if seeds.len() != self.permutations as usize {
                return fail(format!(
                    "{} permutation seeds for {} permutations",
                    seeds.len(),
                    self.permutations
                ));
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.question_set);
        resolve(base, &mut self.output);
        for p in [&mut self.human_tallies, &mut self.focality_labels]
            .into_iter()
            .flatten()
        {
            resolve(base, p);
        }
    }
}

/// Who fills a seat at the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoleBinding {
    Strategy(StrategyKind),
    Scripted(ScriptedPolicy),
    Llm(AgentConfig),
    /// Recorded assignments in the human-history format.
    Human(PathBuf),
}

impl RoleBinding {
    pub fn label(&self) -> String {
        match self {
            RoleBinding::Strategy(k) => k.label(),
            RoleBinding::Scripted(p) => format!("scripted:{}", p.label()),
            RoleBinding::Llm(c) => format!("llm:{}", c.model_name),
            RoleBinding::Human(_) => "human".to_string(),
        }
    }
}

fn default_iterations() -> u32 {
    100
}

fn default_bargaining_variants() -> Vec<BargainingVariant> {
    vec![BargainingVariant::Vanilla]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainingExperimentConfig {
    pub boards: PathBuf,
    pub blue: RoleBinding,
    #[serde(alias = "yellow")]
    pub orange: RoleBinding,
    #[serde(default = "default_iterations")]
    pub iterations: u32,
    #[serde(default = "default_bargaining_variants")]
    pub variants: Vec<BargainingVariant>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl BargainingExperimentConfig {
    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.iterations == 0 {
            return Err(RunnerError::Config("iterations must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(RunnerError::Config("variant list is empty".into()));
        }
        for (seat, role) in [("blue", &self.blue), ("orange", &self.orange)] {
            if let RoleBinding::Strategy(StrategyKind::Scripted | StrategyKind::Llm) = role {
                return Err(RunnerError::Config(format!(
                    "{seat}: bind agent seats with a `scripted` or `llm` role, not a strategy"
                )));
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.boards);
        resolve(base, &mut self.output);
        for role in [&mut self.blue, &mut self.orange] {
            if let RoleBinding::Human(p) = role {
                resolve(base, p);
            }
        }
    }
}
