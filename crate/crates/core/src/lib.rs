//! Tacit-coordination games and an experiment harness for scripted and
//! language-model agents.
//!
//! - [`game`]: normal-form games, pure Nash enumeration, coordination indices
//! - [`focal`]: salience, softmax choice, noisy focal selection, symmetry orbits
//! - [`bargaining`]: the Bargaining Table board, scoring, strategies, prompts
//! - [`tasks`]: multi-answer question sets, prompt templates, answer parsing
//! - [`agent`]: chat-completion client and scripted agents
//! - [`runner`]: experiment configs, resumable batch runs, ingestion, reports

pub mod agent;
pub mod answer;
pub mod bargaining;
pub mod focal;
pub mod game;
pub mod runner;
pub mod stats;
pub mod tasks;
