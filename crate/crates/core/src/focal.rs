//! Salience over equilibria and the focal-point machinery built on it.
//!
//! Equilibrium identifiers are generic (`E: Ord + Clone`), so the same code
//! serves numbered equilibria, option labels, or strategy profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::ChoiceTally;

pub const DEFAULT_BETA: f64 = 1.0;

#[derive(Debug, Error)]
pub enum FocalError {
    #[error("salience assignment has no equilibria")]
    EmptyDomain,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{count} equilibria tie for the maximum salience and no noise was requested")]
    AmbiguousFocal { count: usize },
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("invalid salience: {0}")]
    InvalidSalience(String),
    #[error("chosen option {0:?} has no focality labels")]
    MissingLabel(String),
    #[error("tally has no respondents")]
    EmptyTally,
    #[error("reading focality labels: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing focality labels: {0}")]
    Json(#[from] serde_json::Error),
}

/// Salience scores S(e) of one player over an equilibrium set.
#[derive(Debug, Clone, PartialEq)]
pub struct SalienceAssignment<E: Ord> {
    owner: usize,
    scores: BTreeMap<E, f64>,
}

impl<E: Ord + Clone> SalienceAssignment<E> {
    pub fn new<I>(owner: usize, scores: I) -> Result<Self, FocalError>
    where
        I: IntoIterator<Item = (E, f64)>,
    {
        let mut map = BTreeMap::new();
        for (e, s) in scores {
            if !(s.is_finite() && s >= 0.0) {
                return Err(FocalError::InvalidSalience(format!(
                    "score {s} is not a finite non-negative number"
                )));
            }
            if map.insert(e, s).is_some() {
                return Err(FocalError::InvalidSalience(
                    "equilibrium scored twice".to_string(),
                ));
            }
        }
        Ok(Self { owner, scores: map })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn scores(&self) -> &BTreeMap<E, f64> {
        &self.scores
    }

    pub fn score(&self, e: &E) -> Option<f64> {
        self.scores.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Applies `f` to every score, keeping the owner.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self, FocalError> {
        Self::new(self.owner, self.scores.iter().map(|(e, &s)| (e.clone(), f(s))))
    }

    fn max_score(&self) -> Option<f64> {
        self.scores.values().copied().reduce(f64::max)
    }
}

/// Softmax choice distribution over equilibria.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalDistribution<E: Ord> {
    pub probabilities: BTreeMap<E, f64>,
    pub beta: f64,
}

impl<E: Ord> FocalDistribution<E> {
    pub fn probability(&self, e: &E) -> f64 {
        self.probabilities.get(e).copied().unwrap_or(0.0)
    }
}

/// `P(e) = exp(β S(e)) / Σ exp(β S(e'))`, evaluated after subtracting the
/// maximum score.
pub fn softmax_distribution<E: Ord + Clone>(
    scores: &SalienceAssignment<E>,
    beta: f64,
) -> Result<FocalDistribution<E>, FocalError> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(FocalError::InvalidParameter(format!(
            "beta must be finite and non-negative, got {beta}"
        )));
    }
    let max = scores.max_score().ok_or(FocalError::EmptyDomain)?;
    let weights: Vec<(E, f64)> = scores
        .scores
        .iter()
        .map(|(e, &s)| (e.clone(), (beta * (s - max)).exp()))
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    Ok(FocalDistribution {
        probabilities: weights.into_iter().map(|(e, w)| (e, w / total)).collect(),
        beta,
    })
}

/// Argmax of `S(e) + η(e)` with `η ~ U(0, noise_scale)` i.i.d. per equilibrium.
///
/// Noise is drawn in ascending equilibrium order from a ChaCha8 stream seeded
/// with `seed`. An exact tie at the top is reported, never broken silently.
pub fn select_focal<E: Ord + Clone>(
    scores: &SalienceAssignment<E>,
    noise_scale: f64,
    seed: u64,
) -> Result<E, FocalError> {
    if !(noise_scale.is_finite() && noise_scale >= 0.0) {
        return Err(FocalError::InvalidParameter(format!(
            "noise scale must be finite and non-negative, got {noise_scale}"
        )));
    }
    if scores.is_empty() {
        return Err(FocalError::EmptyDomain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed: Vec<(&E, f64)> = scores
        .scores
        .iter()
        .map(|(e, &s)| {
            let eta = if noise_scale > 0.0 {
                rng.random::<f64>() * noise_scale
            } else {
                0.0
            };
            (e, s + eta)
        })
        .collect();
    let best = perturbed
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut winners = perturbed.iter().filter(|(_, v)| *v == best);
    let first = winners.next().map(|(e, _)| (*e).clone());
    let extra = winners.count();
    if extra > 0 {
        return Err(FocalError::AmbiguousFocal { count: extra + 1 });
    }
    first.ok_or(FocalError::EmptyDomain)
}

/// A permutation of an equilibrium set. Elements not listed are fixed points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation<E: Ord> {
    map: BTreeMap<E, E>,
}

impl<E: Ord + Clone> Permutation<E> {
    pub fn identity() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (E, E)>>(pairs: I) -> Self {
        Self {
            map: pairs.into_iter().collect(),
        }
    }

    /// Cycle notation: `(a b c)` maps a→b, b→c, c→a.
    pub fn cycle<I: IntoIterator<Item = E>>(elements: I) -> Self {
        let elements: Vec<E> = elements.into_iter().collect();
        let n = elements.len();
        Self::from_pairs(
            (0..n).map(|i| (elements[i].clone(), elements[(i + 1) % n].clone())),
        )
    }

    /// Tabulates `f` over `domain`.
    pub fn from_fn<'a, I>(domain: I, f: impl Fn(&E) -> E) -> Self
    where
        I: IntoIterator<Item = &'a E>,
        E: 'a,
    {
        Self::from_pairs(domain.into_iter().map(|e| (e.clone(), f(e))))
    }

    pub fn apply<'a>(&'a self, e: &'a E) -> &'a E {
        self.map.get(e).unwrap_or(e)
    }
}

/// Disjoint orbits covering an equilibrium set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition<E: Ord> {
    orbits: Vec<BTreeSet<E>>,
}

impl<E: Ord + Clone> OrbitPartition<E> {
    /// Wraps explicit orbits after checking they are non-empty and disjoint.
    pub fn from_orbits(orbits: Vec<BTreeSet<E>>) -> Result<Self, FocalError> {
        if orbits.is_empty() {
            return Err(FocalError::InvalidSymmetry("no orbits".to_string()));
        }
        let mut seen = BTreeSet::new();
        for orbit in &orbits {
            if orbit.is_empty() {
                return Err(FocalError::InvalidSymmetry("empty orbit".to_string()));
            }
            for e in orbit {
                if !seen.insert(e) {
                    return Err(FocalError::InvalidSymmetry(
                        "orbits overlap".to_string(),
                    ));
                }
            }
        }
        Ok(Self { orbits })
    }

    pub fn orbits(&self) -> &[BTreeSet<E>] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &E> {
        self.orbits.iter().flatten()
    }

    pub fn singletons(&self) -> impl Iterator<Item = &E> {
        self.orbits
            .iter()
            .filter(|o| o.len() == 1)
            .filter_map(|o| o.iter().next())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Orbits of the group generated by `generators` acting on `equilibria`.
///
/// The orbit of `e` is its connected component in the graph with an edge
/// between `x` and `g(x)` for every generator `g`.
pub fn orbit_partition<E: Ord + Clone>(
    equilibria: &BTreeSet<E>,
    generators: &[Permutation<E>],
) -> Result<OrbitPartition<E>, FocalError> {
    if equilibria.is_empty() {
        return Err(FocalError::EmptyDomain);
    }
    let elements: Vec<&E> = equilibria.iter().collect();
    let index_of = |e: &E| elements.binary_search(&e).ok();

    let mut sets = DisjointSets::new(elements.len());
    for (g_idx, g) in generators.iter().enumerate() {
        if g.map.keys().any(|k| !equilibria.contains(k)) {
            return Err(FocalError::InvalidSymmetry(format!(
                "generator {g_idx} moves an element outside the equilibrium set"
            )));
        }
        let mut hit = vec![false; elements.len()];
        for (i, e) in elements.iter().enumerate() {
            let j = index_of(g.apply(e)).ok_or_else(|| {
                FocalError::InvalidSymmetry(format!(
                    "generator {g_idx} maps into an element outside the equilibrium set"
                ))
            })?;
            if std::mem::replace(&mut hit[j], true) {
                return Err(FocalError::InvalidSymmetry(format!(
                    "generator {g_idx} is not injective"
                )));
            }
            sets.union(i, j);
        }
    }

    let mut grouped: BTreeMap<usize, BTreeSet<E>> = BTreeMap::new();
    for (i, e) in elements.iter().enumerate() {
        let root = sets.find(i);
        grouped.entry(root).or_default().insert((*e).clone());
    }
    let mut orbits: Vec<BTreeSet<E>> = grouped.into_values().collect();
    orbits.sort_by(|a, b| a.first().cmp(&b.first()));
    Ok(OrbitPartition { orbits })
}

/// Which structural condition, if any, singles out a unique focal equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FocalClass<E> {
    /// Exactly one orbit is a singleton.
    SymmetryInvariant(E),
    /// A single singleton orbit maximises every player's salience.
    CommonOrdering(E),
    None,
}

pub fn classify_unique_focal<E: Ord + Clone>(
    partition: &OrbitPartition<E>,
    salience_per_player: &[SalienceAssignment<E>],
) -> Result<FocalClass<E>, FocalError> {
    for sal in salience_per_player {
        if sal.len() != partition.elements().count() {
            return Err(FocalError::InvalidSalience(format!(
                "player {} scores {} equilibria, partition has {}",
                sal.owner,
                sal.len(),
                partition.elements().count()
            )));
        }
        for orbit in partition.orbits() {
            let mut values = orbit.iter().map(|e| sal.score(e));
            let first = values.next().flatten().ok_or_else(|| {
                FocalError::InvalidSalience(format!(
                    "player {} leaves an equilibrium unscored",
                    sal.owner
                ))
            })?;
            for v in values {
                match v {
                    Some(v) if v == first => {}
                    Some(_) => {
                        return Err(FocalError::InvalidSalience(format!(
                            "player {} salience is not constant on an orbit",
                            sal.owner
                        )))
                    }
                    None => {
                        return Err(FocalError::InvalidSalience(format!(
                            "player {} leaves an equilibrium unscored",
                            sal.owner
                        )))
                    }
                }
            }
        }
    }

    let singletons: Vec<&E> = partition.singletons().collect();
    if let [only] = singletons.as_slice() {
        return Ok(FocalClass::SymmetryInvariant((*only).clone()));
    }

    if salience_per_player.is_empty() {
        return Ok(FocalClass::None);
    }
    let maxima: Vec<f64> = salience_per_player
        .iter()
        .map(|s| s.max_score().unwrap_or(f64::NEG_INFINITY))
        .collect();
    let common: Vec<&E> = singletons
        .into_iter()
        .filter(|e| {
            salience_per_player
                .iter()
                .zip(&maxima)
                .all(|(s, &m)| s.score(e) == Some(m))
        })
        .collect();
    Ok(match common.as_slice() {
        [only] => FocalClass::CommonOrdering((*only).clone()),
        _ => FocalClass::None,
    })
}

/// The four focality principles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FocalityLabel {
    Uniqueness,
    UniquenessComplement,
    Centrality,
    Extremeness,
}

impl FocalityLabel {
    pub const ALL: [FocalityLabel; 4] = [
        FocalityLabel::Uniqueness,
        FocalityLabel::UniquenessComplement,
        FocalityLabel::Centrality,
        FocalityLabel::Extremeness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FocalityLabel::Uniqueness => "uniqueness",
            FocalityLabel::UniquenessComplement => "uniqueness-complement",
            FocalityLabel::Centrality => "centrality",
            FocalityLabel::Extremeness => "extremeness",
        }
    }
}

impl fmt::Display for FocalityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type FocalityLabels = BTreeMap<String, BTreeSet<FocalityLabel>>;

/// Reads a JSON object mapping option id to an array of principle names.
pub fn load_focality_labels(path: &Path) -> Result<FocalityLabels, FocalError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Share of respondents whose choice carries each principle.
///
/// A multi-label option counts fully toward every label it carries, so the
/// shares can sum above one.
pub fn focality_distribution(
    choices: &ChoiceTally,
    labels: &FocalityLabels,
) -> Result<BTreeMap<FocalityLabel, f64>, FocalError> {
    let n = choices.total();
    if n == 0 {
        return Err(FocalError::EmptyTally);
    }
    let mut sums: BTreeMap<FocalityLabel, u64> =
        FocalityLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for (option, &count) in choices.option_ids().iter().zip(choices.counts()) {
        if count == 0 {
            continue;
        }
        let carried = labels
            .get(option)
            .ok_or_else(|| FocalError::MissingLabel(option.clone()))?;
        for label in carried {
            *sums.entry(*label).or_default() += count;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(l, c)| (l, c as f64 / n as f64))
        .collect())
}
