//! Finite normal-form games, pure-Nash enumeration, and coordination indices.
//!
//! Payoffs are stored as a dense table indexed by the mixed-radix encoding of
//! a joint profile, with player 0 as the most significant digit.

use std::collections::HashMap;

use thiserror::Error;

/// Default cap on the number of joint profiles `enumerate_pure_nash` visits.
pub const DEFAULT_PROFILE_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game must have at least one player")]
    NoPlayers,
    #[error("player {0} has an empty strategy list")]
    EmptyStrategies(usize),
    #[error("player {player} lists strategy {strategy:?} more than once")]
    DuplicateStrategy { player: usize, strategy: String },
    #[error("payoff table has {got} entries, expected {expected}")]
    PayoffTableSize { expected: usize, got: usize },
    #[error("payoff vector at profile {index} has {got} entries, expected {expected}")]
    PayoffArity { index: usize, expected: usize, got: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("game has {profiles} joint profiles, above the enumeration cap of {cap}")]
    Capacity { profiles: u128, cap: usize },
    #[error("coordination index needs at least 2 respondents, got {0}")]
    TooFewRespondents(u64),
    #[error("normalised coordination index needs at least 2 options, got {0}")]
    TooFewOptions(usize),
    #[error("tally has {ids} option ids but {counts} counts")]
    TallyShape { ids: usize, counts: usize },
}

/// A joint pure-strategy profile: one strategy identifier per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    pub choices: Vec<String>,
}

impl StrategyProfile {
    pub fn new<I, S>(choices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            choices: choices.into_iter().map(Into::into).collect(),
        }
    }
}

/// A finite game in normal form with an explicit payoff table.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    strategies: Vec<Vec<String>>,
    lookup: Vec<HashMap<String, usize>>,
    payoffs: Vec<Vec<f64>>,
}

impl NormalFormGame {
    /// Builds a game by evaluating `payoff` on every joint profile.
    ///
    /// The closure receives per-player strategy indices.
    pub fn from_fn<F>(strategies: Vec<Vec<String>>, mut payoff: F) -> Result<Self, GameError>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let lookup = Self::validate_strategies(&strategies)?;
        let radices: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let total = checked_product(&radices).ok_or(GameError::Capacity {
            profiles: u128::MAX,
            cap: usize::MAX,
        })?;
        let mut payoffs = Vec::with_capacity(total);
        let mut digits = vec![0usize; radices.len()];
        for index in 0..total {
            let row = payoff(&digits);
            if row.len() != radices.len() {
                return Err(GameError::PayoffArity {
                    index,
                    expected: radices.len(),
                    got: row.len(),
                });
            }
            payoffs.push(row);
            increment(&mut digits, &radices);
        }
        Ok(Self {
            strategies,
            lookup,
            payoffs,
        })
    }

    /// Builds a game from a dense payoff table in mixed-radix profile order.
    pub fn from_table(
        strategies: Vec<Vec<String>>,
        payoffs: Vec<Vec<f64>>,
    ) -> Result<Self, GameError> {
        let lookup = Self::validate_strategies(&strategies)?;
        let radices: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let expected = checked_product(&radices).unwrap_or(usize::MAX);
        if payoffs.len() != expected {
            return Err(GameError::PayoffTableSize {
                expected,
                got: payoffs.len(),
            });
        }
        if let Some((index, row)) = payoffs
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != radices.len())
        {
            return Err(GameError::PayoffArity {
                index,
                expected: radices.len(),
                got: row.len(),
            });
        }
        Ok(Self {
            strategies,
            lookup,
            payoffs,
        })
    }

    fn validate_strategies(
        strategies: &[Vec<String>],
    ) -> Result<Vec<HashMap<String, usize>>, GameError> {
        if strategies.is_empty() {
            return Err(GameError::NoPlayers);
        }
        strategies
            .iter()
            .enumerate()
            .map(|(player, list)| {
                if list.is_empty() {
                    return Err(GameError::EmptyStrategies(player));
                }
                let mut map = HashMap::with_capacity(list.len());
                for (i, s) in list.iter().enumerate() {
                    if map.insert(s.clone(), i).is_some() {
                        return Err(GameError::DuplicateStrategy {
                            player,
                            strategy: s.clone(),
                        });
                    }
                }
                Ok(map)
            })
            .collect()
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategies(&self, player: usize) -> &[String] {
        &self.strategies[player]
    }

    /// Number of joint pure profiles.
    pub fn num_profiles(&self) -> usize {
        self.payoffs.len()
    }

    fn profile_indices(&self, profile: &StrategyProfile) -> Result<Vec<usize>, GameError> {
        if profile.choices.len() != self.num_players() {
            return Err(GameError::InvalidProfile(format!(
                "profile has {} choices for a {}-player game",
                profile.choices.len(),
                self.num_players()
            )));
        }
        profile
            .choices
            .iter()
            .enumerate()
            .map(|(player, choice)| {
                self.lookup[player].get(choice).copied().ok_or_else(|| {
                    GameError::InvalidProfile(format!(
                        "player {player} has no strategy {choice:?}"
                    ))
                })
            })
            .collect()
    }

    fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.strategies)
            .fold(0, |acc, (&d, list)| acc * list.len() + d)
    }

    fn profile_from_digits(&self, digits: &[usize]) -> StrategyProfile {
        StrategyProfile {
            choices: digits
                .iter()
                .zip(&self.strategies)
                .map(|(&d, list)| list[d].clone())
                .collect(),
        }
    }

    /// Returns the stored payoff vector for `profile`.
    pub fn payoff_of_profile(&self, profile: &StrategyProfile) -> Result<&[f64], GameError> {
        let digits = self.profile_indices(profile)?;
        Ok(&self.payoffs[self.flat_index(&digits)])
    }

    /// Enumerates every pure Nash equilibrium using [`DEFAULT_PROFILE_CAP`].
    pub fn enumerate_pure_nash(&self) -> Result<Vec<StrategyProfile>, GameError> {
        self.enumerate_pure_nash_capped(DEFAULT_PROFILE_CAP)
    }

    /// Enumerates profiles where no player has a strictly improving unilateral
    /// deviation. Output is in mixed-radix profile order.
    pub fn enumerate_pure_nash_capped(
        &self,
        cap: usize,
    ) -> Result<Vec<StrategyProfile>, GameError> {
        let total = self.num_profiles();
        if total > cap {
            return Err(GameError::Capacity {
                profiles: total as u128,
                cap,
            });
        }
        let radices: Vec<usize> = self.strategies.iter().map(Vec::len).collect();
        // stride[p] = flat-index distance between adjacent strategies of player p
        let mut strides = vec![1usize; radices.len()];
        for p in (0..radices.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * radices[p + 1];
        }

        let mut out = Vec::new();
        let mut digits = vec![0usize; radices.len()];
        for index in 0..total {
            let stable = (0..radices.len()).all(|p| {
                let current = self.payoffs[index][p];
                let base = index - digits[p] * strides[p];
                (0..radices[p]).all(|alt| self.payoffs[base + alt * strides[p]][p] <= current)
            });
            if stable {
                out.push(self.profile_from_digits(&digits));
            }
            increment(&mut digits, &radices);
        }
        Ok(out)
    }
}

fn checked_product(radices: &[usize]) -> Option<usize> {
    radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))
}

/// Advances a mixed-radix counter, last digit fastest.
fn increment(digits: &mut [usize], radices: &[usize]) {
    for p in (0..digits.len()).rev() {
        digits[p] += 1;
        if digits[p] < radices[p] {
            return;
        }
        digits[p] = 0;
    }
}

/// Counts of respondents per offered option.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ChoiceTally {
    option_ids: Vec<String>,
    counts: Vec<u64>,
}

impl ChoiceTally {
    pub fn new(option_ids: Vec<String>, counts: Vec<u64>) -> Result<Self, GameError> {
        if option_ids.len() != counts.len() {
            return Err(GameError::TallyShape {
                ids: option_ids.len(),
                counts: counts.len(),
            });
        }
        Ok(Self { option_ids, counts })
    }

    /// Tally with synthetic option ids `o0, o1, …`.
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let option_ids = (0..counts.len()).map(|i| format!("o{i}")).collect();
        Self { option_ids, counts }
    }

    pub fn option_ids(&self) -> &[String] {
        &self.option_ids
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_of(&self, option: &str) -> Option<u64> {
        self.option_ids
            .iter()
            .position(|id| id == option)
            .map(|i| self.counts[i])
    }

    /// Number of offered options, zero-count ones included.
    pub fn num_options(&self) -> usize {
        self.counts.len()
    }

    /// Total respondents.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Probability that two respondents drawn without replacement chose the
    /// same option: `Σ m_j (m_j − 1) / (n (n − 1))`.
    pub fn coordination_index(&self) -> Result<f64, GameError> {
        let n = self.total();
        if n < 2 {
            return Err(GameError::TooFewRespondents(n));
        }
        let same: u128 = self
            .counts
            .iter()
            .map(|&c| c as u128 * (c as u128).saturating_sub(1))
            .sum();
        let pairs = n as u128 * (n as u128 - 1);
        Ok(same as f64 / pairs as f64)
    }

    /// `m × CI`, with `m` the number of offered options.
    pub fn normalized_ci(&self) -> Result<f64, GameError> {
        if self.num_options() < 2 {
            return Err(GameError::TooFewOptions(self.num_options()));
        }
        Ok(self.num_options() as f64 * self.coordination_index()?)
    }
}

pub fn coordination_index(tally: &ChoiceTally) -> Result<f64, GameError> {
    tally.coordination_index()
}

pub fn normalized_ci(tally: &ChoiceTally) -> Result<f64, GameError> {
    tally.normalized_ci()
}
