use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ingest::{load_human_history, HumanHistory};
use super::persist::{recover_records, OrderedWriter, Record};
use super::report::{bargaining_report, write_report, ReportOptions};
use super::{
    derive_seed, BargainingExperimentConfig, RoleBinding, RunOptions, RunSummary, RunnerError,
};
use crate::agent::{run_bounded, Agent, ChatClient, PromptContext};
use crate::bargaining::{
    load_board_set, parse_assignment_json, render_bargaining_prompt, score_joint, Assignment,
    BargainingBoard, BargainingVariant, JointOutcome, Player,
};

/// One seat's side of an iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatRecord {
    pub binding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
    /// Prompt shown to an agent seat.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    /// Every raw answer received, including ones that failed to parse.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One played board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub variant: BargainingVariant,
    pub iteration: u32,
    pub board_index: usize,
    pub board: BargainingBoard,
    pub blue: SeatRecord,
    pub orange: SeatRecord,
    /// `None` when a seat produced no valid assignment; such iterations are
    /// excluded from metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<JointOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl IterationRecord {
    pub fn is_failed(&self) -> bool {
        self.outcome.is_none()
    }

    pub fn seat(&self, player: Player) -> &SeatRecord {
        match player {
            Player::Blue => &self.blue,
            Player::Orange => &self.orange,
        }
    }
}

enum Seat {
    Strategy(crate::bargaining::StrategyKind),
    Agent(Box<Agent>, u32),
    Human(HumanHistory),
}

impl Seat {
    fn build(role: &RoleBinding, boards: &[BargainingBoard]) -> Result<Self, RunnerError> {
        Ok(match role {
            RoleBinding::Strategy(k) => Seat::Strategy(k.clone()),
            RoleBinding::Scripted(p) => {
                p.validate()?;
                Seat::Agent(Box::new(Agent::Scripted(p.clone())), 0)
            }
            RoleBinding::Llm(c) => Seat::Agent(Box::new(Agent::Remote(ChatClient::new(c.clone())?)), c.max_retries),
            RoleBinding::Human(path) => Seat::Human(load_human_history(path, boards)?),
        })
    }

    fn parallelism(&self) -> usize {
        match self {
            Seat::Agent(a, _) => a.parallelism(),
            _ => 1,
        }
    }

    fn is_remote(&self) -> bool {
        matches!(self, Seat::Agent(a, _) if a.is_remote())
    }
}

struct Slot {
    variant: BargainingVariant,
    iteration: u32,
}

/// Plays `iterations` boards per variant (cycling the board set), scoring
/// each pair of assignments and appending one record per iteration to
/// `outcomes.jsonl` under the output directory, then writes the report.
pub fn run_bargaining_experiment(
    config: &BargainingExperimentConfig,
    options: RunOptions,
) -> Result<RunSummary, RunnerError> {
    config.validate()?;
    let boards = load_board_set(&config.boards)?;
    if boards.is_empty() {
        return Err(RunnerError::Config("board set is empty".into()));
    }
    let blue = Seat::build(&config.blue, &boards)?;
    let orange = Seat::build(&config.orange, &boards)?;
    for (seat, player) in [(&blue, Player::Blue), (&orange, Player::Orange)] {
        if let Seat::Human(h) = seat {
            h.check_covers(player, boards.len(), config.iterations)?;
        }
    }
    let labels = (config.blue.label(), config.orange.label());

    std::fs::create_dir_all(&config.output).map_err(|e| RunnerError::io(&config.output, e))?;
    let path = config.output.join("outcomes.jsonl");
    let existing = recover_records(&path)?;
    let mut done = HashSet::new();
    for r in &existing {
        match r {
            Record::Iteration(it) => {
                done.insert((it.variant, it.iteration));
            }
            Record::Trial(_) => {
                return Err(RunnerError::Config(format!("{} holds task trials", path.display())))
            }
        }
    }
    let slots: Vec<Slot> = config
        .variants
        .iter()
        .flat_map(|&variant| (0..config.iterations).map(move |iteration| Slot { variant, iteration }))
        .filter(|s| !done.contains(&(s.variant, s.iteration)))
        .collect();

    let mut summary = RunSummary {
        resumed: existing.len(),
        ..RunSummary::default()
    };
    let mut writer = OrderedWriter::open(&path, options.stop_after)?;
    let mut error: Option<RunnerError> = None;
    let parallelism = blue.parallelism().max(orange.parallelism());
    let started = run_bounded(
        &slots,
        parallelism,
        |_, slot| play(config, &boards, [&blue, &orange], &labels, slot),
        |i, result| {
            if error.is_some() {
                return false;
            }
            let record = match result {
                Ok(r) => {
                    if r.is_failed() {
                        summary.failed_records += 1;
                    }
                    Some(Record::Iteration(r))
                }
                Err(e) => {
                    summary.failures.push(e.to_string());
                    None
                }
            };
            let aborted = record.is_none();
            if let Err(e) = writer.submit(i, record) {
                error = Some(e);
                return false;
            }
            !aborted && !writer.limit_reached()
        },
    );
    summary.issued = started;
    if let Some(e) = error {
        return Err(e);
    }
    summary.incomplete =
        started < slots.len() || !summary.failures.is_empty() || writer.limit_reached();
    summary.persisted = writer.finish()?;
    if summary.incomplete {
        return Ok(summary);
    }
    let records = super::read_records(&path)?;
    let bundle = bargaining_report(&records, &ReportOptions::default())?;
    write_report(&bundle, &config.output)?;
    Ok(summary)
}

/// Plays one iteration. Transport and provider errors abort the run; an
/// agent that never produces a parseable answer fails only this iteration.
fn play(
    config: &BargainingExperimentConfig,
    boards: &[BargainingBoard],
    seats: [&Seat; 2],
    labels: &(String, String),
    slot: &Slot,
) -> Result<IterationRecord, RunnerError> {
    let board_index = slot.iteration as usize % boards.len();
    let board = &boards[board_index];
    let occurrence = slot.iteration as usize / boards.len();
    let mut records = Vec::with_capacity(2);
    for (seat, (player, label)) in seats
        .into_iter()
        .zip([(Player::Blue, &labels.0), (Player::Orange, &labels.1)])
    {
        let mut rec = SeatRecord {
            binding: label.clone(),
            assignment: None,
            prompt: None,
            responses: Vec::new(),
            error: None,
        };
        match seat {
            Seat::Strategy(kind) => {
                rec.assignment = kind.assign(board, player);
            }
            Seat::Human(history) => {
                rec.assignment = Some(history.assignment(player, board_index, occurrence)?.clone());
            }
            Seat::Agent(agent, retries) => {
                let prompt = render_bargaining_prompt(board, player, slot.variant);
                let seed = derive_seed(
                    config.seed,
                    &["bargaining", slot.variant.as_str(), &slot.iteration.to_string(), player.as_str()],
                );
                for attempt in 0..=*retries {
                    let attempt_seed = derive_seed(seed, &[&attempt.to_string()]);
                    let raw = agent
                        .respond(&prompt, PromptContext::Board { board, me: player }, attempt_seed)?;
                    let parsed = parse_assignment_json(&raw, board);
                    rec.responses.push(raw);
                    match parsed {
                        Ok(a) => {
                            rec.assignment = Some(a);
                            rec.error = None;
                            break;
                        }
                        Err(e) => rec.error = Some(e.to_string()),
                    }
                }
                rec.prompt = Some(prompt);
            }
        }
        records.push(rec);
    }
    let orange = records.pop().expect("two seats");
    let blue = records.pop().expect("two seats");
    let outcome = match (&blue.assignment, &orange.assignment) {
        (Some(b), Some(o)) => Some(score_joint(board, b, o)?),
        _ => None,
    };
    let remote = seats.iter().any(|s| s.is_remote());
    Ok(IterationRecord {
        variant: slot.variant,
        iteration: slot.iteration,
        board_index,
        board: board.clone(),
        blue,
        orange,
        outcome,
        timestamp: remote.then(Utc::now),
    })
}
