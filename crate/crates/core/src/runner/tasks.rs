use std::collections::HashSet;

use chrono::Utc;

use super::persist::{recover_records, OrderedWriter, Record};
use super::report::{task_report, write_report, ReportOptions};
use super::{derive_seed, RunOptions, RunSummary, RunnerError, TaskExperimentConfig};
use crate::agent::{run_bounded, Agent, PromptContext};
use crate::focal::load_focality_labels;
use crate::tasks::{
    load_human_tallies, load_question_set, parse_answer, permute_options, render_prompt,
    PromptVariant, Question, TaskVariant, TrialRecord,
};

/// Identity of a trial; resuming skips identities already on disk.
type TrialKey = (String, String, TaskVariant, PromptVariant, u32, u32);

fn key_of(r: &TrialRecord) -> TrialKey {
    (
        r.agent_id.clone(),
        r.question_id.clone(),
        r.task,
        r.prompt_variant,
        r.permutation_index,
        r.trial_index,
    )
}

struct Job<'a> {
    question: &'a Question,
    task: TaskVariant,
    variant: PromptVariant,
    permutation_index: u32,
    permutation_seed: u64,
    trial_index: u32,
}

/// Issues every (question, task, variant, permutation, trial) prompt to every
/// agent, appending one record per answered prompt to `trials.jsonl` under
/// the output directory, then writes the report next to it.
///
/// Records already present are kept and their trials are not re-issued. An
/// agent error stops the run; finished trials stay on disk.
pub fn run_task_experiment(
    config: &TaskExperimentConfig,
    options: RunOptions,
) -> Result<RunSummary, RunnerError> {
    config.validate()?;
    let questions = load_question_set(&config.question_set)?;
    if questions.is_empty() {
        return Err(RunnerError::Config("question set is empty".into()));
    }
    let agents: Vec<(String, Agent)> = config
        .agents
        .iter()
        .map(|b| Ok((b.id.clone(), b.spec.build()?)))
        .collect::<Result<_, RunnerError>>()?;
    let report_options = ReportOptions {
        human_tallies: config
            .human_tallies
            .as_deref()
            .map(load_human_tallies)
            .transpose()?,
        focality_labels: config
            .focality_labels
            .as_deref()
            .map(load_focality_labels)
            .transpose()?,
        ..ReportOptions::default()
    };

    std::fs::create_dir_all(&config.output).map_err(|e| RunnerError::io(&config.output, e))?;
    let trials_path = config.output.join("trials.jsonl");
    let existing = recover_records(&trials_path)?;
    let mut done: HashSet<TrialKey> = HashSet::new();
    for r in &existing {
        match r {
            Record::Trial(t) => {
                done.insert(key_of(t));
            }
            Record::Iteration(_) => {
                return Err(RunnerError::Config(format!(
                    "{} holds bargaining records",
                    trials_path.display()
                )))
            }
        }
    }

    let mut summary = RunSummary {
        resumed: existing.len(),
        ..RunSummary::default()
    };
    let mut writer = OrderedWriter::open(&trials_path, options.stop_after)?;
    let mut base = 0;
    'agents: for (agent_id, agent) in &agents {
        let jobs: Vec<Job> = jobs_for(config, &questions)
            .into_iter()
            .filter(|j| {
                !done.contains(&(
                    agent_id.clone(),
                    j.question.id.clone(),
                    j.task,
                    j.variant,
                    j.permutation_index,
                    j.trial_index,
                ))
            })
            .collect();
        let mut error: Option<RunnerError> = None;
        let started = run_bounded(
            &jobs,
            agent.parallelism(),
            |_, job| run_trial(config.seed, agent_id, agent, job),
            |i, result| {
                if error.is_some() {
                    return false;
                }
                let record = match result {
                    Ok(r) => Some(Record::Trial(r)),
                    Err(e) => {
                        summary.failures.push(format!("{agent_id}: {e}"));
                        None
                    }
                };
                let failed = record.is_none();
                if let Err(e) = writer.submit(base + i, record) {
                    error = Some(e);
                    return false;
                }
                !failed && !writer.limit_reached()
            },
        );
        summary.issued += started;
        if let Some(e) = error {
            return Err(e);
        }
        base += jobs.len();
        if started < jobs.len() || !summary.failures.is_empty() || writer.limit_reached() {
            summary.incomplete = true;
            break 'agents;
        }
    }
    summary.persisted = writer.finish()?;
    if summary.incomplete {
        tracing::warn!(
            persisted = summary.persisted,
            failures = summary.failures.len(),
            "task run stopped early"
        );
        return Ok(summary);
    }

    let records = super::read_records(&trials_path)?;
    let bundle = task_report(&records, &report_options)?;
    write_report(&bundle, &config.output)?;
    Ok(summary)
}

fn jobs_for<'a>(config: &TaskExperimentConfig, questions: &'a [Question]) -> Vec<Job<'a>> {
    let mut jobs = Vec::new();
    for question in questions {
        for task in &config.tasks {
            for variant in &config.prompt_variants {
                for p in 0..config.permutations {
                    let permutation_seed = match &config.permutation_seeds {
                        Some(seeds) => seeds[p as usize],
                        None => derive_seed(config.seed, &["permutation", &question.id, &p.to_string()]),
                    };
                    for t in 0..config.trials_per_permutation {
                        jobs.push(Job {
                            question,
                            task: *task,
                            variant: *variant,
                            permutation_index: p,
                            permutation_seed,
                            trial_index: t,
                        });
                    }
                }
            }
        }
    }
    jobs
}

fn run_trial(
    seed: u64,
    agent_id: &str,
    agent: &Agent,
    job: &Job<'_>,
) -> Result<TrialRecord, RunnerError> {
    let permutation = permute_options(job.question, job.permutation_seed);
    let displayed: Vec<String> = permutation.iter().map(|o| o.label.clone()).collect();
    let prompt = render_prompt(job.question, job.task, job.variant, &permutation)?;
    let trial_seed = derive_seed(
        seed,
        &[
            &job.question.id,
            job.task.as_str(),
            job.variant.as_str(),
            &job.permutation_index.to_string(),
            &job.trial_index.to_string(),
        ],
    );
    let raw = agent.respond(&prompt, PromptContext::Options(&displayed), trial_seed)?;
    let parsed = parse_answer(&raw, job.question);
    Ok(TrialRecord {
        agent_id: agent_id.to_string(),
        question_id: job.question.id.clone(),
        task: job.task,
        prompt_variant: job.variant,
        permutation_index: job.permutation_index,
        permutation_seed: job.permutation_seed,
        trial_index: job.trial_index,
        trial_seed,
        displayed_options: displayed,
        rendered_prompt: prompt,
        raw_response: raw,
        parsed_choice: parsed,
        timestamp: agent.is_remote().then(Utc::now),
    })
}
