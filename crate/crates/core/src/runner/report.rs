use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::bargaining::IterationRecord;
use super::persist::Record;
use super::RunnerError;
use crate::bargaining::{session_metrics, BargainingVariant, PayoffLostMode};
use crate::focal::{focality_distribution, FocalityLabel, FocalityLabels};
use crate::game::ChoiceTally;
use crate::stats::{mean, median};
use crate::tasks::{
    aggregate_question_stats, Locale, PromptVariant, Question, QuestionOption, TaskError,
    TaskVariant, TrialRecord,
};

type FocalKey = (String, TaskVariant, PromptVariant);

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub payoff_lost: PayoffLostMode,
    /// Human tallies keyed by question id; adds a human NCI column.
    pub human_tallies: Option<BTreeMap<String, ChoiceTally>>,
    /// Focality principles keyed by option label; adds a focality-share table.
    pub focality_labels: Option<FocalityLabels>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(Option<f64>),
}

impl Cell {
    fn num(x: f64) -> Self {
        Cell::Num(Some(x))
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Num(Some(x)) => format!("{}", if *x == 0.0 { 0.0 } else { *x }),
            Cell::Num(None) => "NA".to_string(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(Some(x)) => format!("{:.4}", if *x == 0.0 { 0.0 } else { *x }),
            other => other.csv(),
        }
    }

    fn right_aligned(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem of the CSV rendering.
    pub name: String,
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, title: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            title: title.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    pub fn to_csv(&self) -> Result<String, RunnerError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| RunnerError::Io {
            path: self.name.clone(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.headers[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        let line = |vals: Vec<(&str, bool)>| {
            let parts: Vec<String> = vals
                .iter()
                .zip(&widths)
                .map(|((v, right), w)| {
                    if *right {
                        format!("{v:>w$}")
                    } else {
                        format!("{v:<w$}")
                    }
                })
                .collect();
            format!("{}\n", parts.join("  ").trim_end())
        };
        out += &line(self.headers.iter().map(|h| (h.as_str(), false)).collect());
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out += &format!("{}\n", rule.join("  "));
        for (r, row) in cells.iter().zip(&self.rows) {
            out += &line(
                r.iter()
                    .zip(row)
                    .map(|(s, c)| (s.as_str(), c.right_aligned()))
                    .collect(),
            );
        }
        out
    }
}

/// The tables derived from one persisted run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportBundle {
    pub tables: Vec<Table>,
}

impl ReportBundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out += &t.to_text();
        }
        out
    }
}

/// Writes `report.txt` plus one CSV per table into `dir`.
pub fn write_report(bundle: &ReportBundle, dir: &Path) -> Result<(), RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| RunnerError::io(&path, e))
    };
    write("report.txt", bundle.to_text())?;
    for t in &bundle.tables {
        write(&format!("{}.csv", t.name), t.to_csv()?)?;
    }
    Ok(())
}

/// Builds the report for a file of task trials or bargaining iterations.
pub fn emit_report(records: &[Record], options: &ReportOptions) -> Result<ReportBundle, RunnerError> {
    match records.first() {
        None => Err(RunnerError::EmptyInput),
        Some(Record::Trial(_)) => task_report(records, options),
        Some(Record::Iteration(_)) => bargaining_report(records, options),
    }
}

type CellKey = (String, String, TaskVariant, PromptVariant);

fn split_trials(records: &[Record]) -> Result<Vec<&TrialRecord>, RunnerError> {
    records
        .iter()
        .map(|r| match r {
            Record::Trial(t) => Ok(t),
            Record::Iteration(_) => Err(RunnerError::Ingest(
                "file mixes task trials and bargaining iterations".into(),
            )),
        })
        .collect()
}

/// Offered options recovered from the trials themselves, in label order.
fn offered_question(id: &str, trials: &[&TrialRecord]) -> Question {
    let labels: BTreeSet<&String> = trials.iter().flat_map(|t| &t.displayed_options).collect();
    Question {
        id: id.to_string(),
        locale: Locale::Nottingham,
        options: labels
            .into_iter()
            .map(|l| QuestionOption {
                label: l.clone(),
                score: 1.0,
            })
            .collect(),
    }
}

/// NCI per (agent, question, task, variant), its summary over questions, and
/// focality shares when labels are supplied.
pub fn task_report(records: &[Record], options: &ReportOptions) -> Result<ReportBundle, RunnerError> {
    let trials = split_trials(records)?;
    if trials.is_empty() {
        return Err(RunnerError::EmptyInput);
    }
    let mut cells: BTreeMap<CellKey, Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        cells
            .entry((t.agent_id.clone(), t.question_id.clone(), t.task, t.prompt_variant))
            .or_default()
            .push(t);
    }

    let human = options.human_tallies.as_ref();
    let mut headers = vec![
        "agent", "question", "task", "variant", "trials", "valid", "invalid", "ci", "nci",
    ];
    if human.is_some() {
        headers.push("human_nci");
    }
    let mut nci = Table::new("nci", "Normalised coordination index per question", &headers);
    let mut per_summary: BTreeMap<(String, TaskVariant, PromptVariant), Vec<f64>> = BTreeMap::new();
    let mut focal_mass: BTreeMap<FocalKey, (BTreeMap<FocalityLabel, f64>, u64)> =
        BTreeMap::new();

    for ((agent, question, task, variant), group) in &cells {
        let q = offered_question(question, group);
        let mut row: Vec<Cell> = vec![
            agent.as_str().into(),
            question.as_str().into(),
            task.as_str().into(),
            variant.as_str().into(),
            group.len().into(),
        ];
        let summary_key = (agent.clone(), *task, *variant);
        match aggregate_question_stats(group.iter().copied(), &q) {
            Ok(stats) => {
                row.extend([
                    stats.valid_count.into(),
                    stats.invalid_count.into(),
                    Cell::num(stats.ci),
                    Cell::num(stats.nci),
                ]);
                per_summary.entry(summary_key.clone()).or_default().push(stats.nci);
                if let Some(labels) = &options.focality_labels {
                    let shares = focality_distribution(&stats.tally, labels)?;
                    let entry = focal_mass.entry(summary_key).or_default();
                    for (l, s) in shares {
                        *entry.0.entry(l).or_default() += s * stats.valid_count as f64;
                    }
                    entry.1 += stats.valid_count;
                }
            }
            Err(TaskError::TooFewValid { valid, .. }) => {
                let total = group.len() as u64;
                row.extend([valid.into(), (total - valid).into(), Cell::Num(None), Cell::Num(None)]);
                per_summary.entry(summary_key).or_default();
            }
            Err(e) => return Err(e.into()),
        }
        if let Some(h) = human {
            let value = h.get(question).and_then(|t| t.normalized_ci().ok());
            row.push(Cell::Num(value));
        }
        nci.rows.push(row);
    }

    let mut summary = Table::new(
        "nci_summary",
        "NCI over questions",
        &["agent", "task", "variant", "questions", "mean_nci", "median_nci"],
    );
    for ((agent, task, variant), values) in &per_summary {
        summary.rows.push(vec![
            agent.as_str().into(),
            task.as_str().into(),
            variant.as_str().into(),
            values.len().into(),
            Cell::Num(mean(values)),
            Cell::Num(median(values)),
        ]);
    }

    let mut tables = vec![nci, summary];
    if options.focality_labels.is_some() {
        let mut headers = vec!["agent", "task", "variant", "valid"];
        headers.extend(FocalityLabel::ALL.iter().map(|l| l.as_str()));
        let mut focal = Table::new("focality", "Share of valid choices per focality principle", &headers);
        for ((agent, task, variant), (mass, n)) in &focal_mass {
            let mut row: Vec<Cell> = vec![
                agent.as_str().into(),
                task.as_str().into(),
                variant.as_str().into(),
                (*n).into(),
            ];
            row.extend(FocalityLabel::ALL.iter().map(|l| {
                Cell::Num((*n > 0).then(|| mass.get(l).copied().unwrap_or(0.0) / *n as f64))
            }));
            focal.rows.push(row);
        }
        tables.push(focal);
    }
    Ok(ReportBundle { tables })
}

/// Per-variant payoff summary, per-iteration welfare and the cumulative
/// missed-Nash / payoff-lost series.
pub fn bargaining_report(
    records: &[Record],
    options: &ReportOptions,
) -> Result<ReportBundle, RunnerError> {
    let mut by_variant: BTreeMap<BargainingVariant, Vec<&IterationRecord>> = BTreeMap::new();
    for r in records {
        match r {
            Record::Iteration(it) => by_variant.entry(it.variant).or_default().push(it),
            Record::Trial(_) => {
                return Err(RunnerError::Ingest(
                    "file mixes task trials and bargaining iterations".into(),
                ))
            }
        }
    }
    if by_variant.is_empty() {
        return Err(RunnerError::EmptyInput);
    }
    let mode = options.payoff_lost;
    let mut payoffs = Table::new(
        "payoffs",
        &format!("Payoffs per variant (payoff lost: {mode})"),
        &[
            "variant", "blue", "orange", "iterations", "failed", "blue_mean", "blue_median",
            "blue_total", "orange_mean", "orange_median", "orange_total", "welfare", "missed_nash",
            "conflicted_discs", "payoff_lost",
        ],
    );
    let mut welfare = Table::new(
        "welfare",
        "Welfare per iteration",
        &["variant", "iteration", "board", "blue_payoff", "orange_payoff", "welfare", "agreement"],
    );
    let mut series = Table::new(
        "series",
        "Cumulative missed Nash and payoff lost",
        &["variant", "step", "iteration", "missed_nash", "payoff_lost_penalty", "payoff_lost_shortfall"],
    );

    for (variant, mut its) in by_variant {
        its.sort_by_key(|it| it.iteration);
        let ok: Vec<&IterationRecord> = its.iter().copied().filter(|it| !it.is_failed()).collect();
        let failed = its.len() - ok.len();
        let history: Vec<_> = ok
            .iter()
            .map(|it| {
                (
                    &it.board,
                    it.blue.assignment.as_ref().expect("scored iteration has assignments"),
                    it.orange.assignment.as_ref().expect("scored iteration has assignments"),
                )
            })
            .collect();
        let (blue_binding, orange_binding) = (its[0].blue.binding.as_str(), its[0].orange.binding.as_str());
        if history.is_empty() {
            let mut row: Vec<Cell> = vec![
                variant.as_str().into(),
                blue_binding.into(),
                orange_binding.into(),
                0usize.into(),
                failed.into(),
            ];
            row.extend((0..10).map(|_| Cell::Num(None)));
            payoffs.rows.push(row);
            continue;
        }
        let m = session_metrics(history)?;
        payoffs.rows.push(vec![
            variant.as_str().into(),
            blue_binding.into(),
            orange_binding.into(),
            m.iterations.into(),
            failed.into(),
            Cell::num(m.blue.mean),
            Cell::num(m.blue.median),
            Cell::num(m.blue.total),
            Cell::num(m.orange.mean),
            Cell::num(m.orange.median),
            Cell::num(m.orange.total),
            Cell::num(m.welfare),
            m.missed_nash_iterations.into(),
            m.conflicted_disc_count.into(),
            Cell::num(m.payoff_lost(mode)),
        ]);
        for it in &ok {
            let o = it.outcome.as_ref().expect("scored iteration has an outcome");
            welfare.rows.push(vec![
                variant.as_str().into(),
                (it.iteration as u64).into(),
                it.board_index.into(),
                Cell::num(o.blue_payoff),
                Cell::num(o.orange_payoff),
                Cell::num(o.welfare()),
                (if o.is_agreement() { "yes" } else { "no" }).into(),
            ]);
        }
        for (point, it) in m.series.iter().zip(&ok) {
            series.rows.push(vec![
                variant.as_str().into(),
                point.iteration.into(),
                (it.iteration as u64).into(),
                point.missed_nash.into(),
                Cell::num(point.payoff_lost_penalty),
                Cell::num(point.payoff_lost_shortfall),
            ]);
        }
    }
    Ok(ReportBundle {
        tables: vec![payoffs, welfare, series],
    })
}
