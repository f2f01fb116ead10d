//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;

use proptest::prelude::*;
use tacit::bargaining::{Assignment, BargainingBoard, Coord, Disc, Player};
use tacit::focal::Permutation;
use tacit::game::{NormalFormGame, StrategyProfile};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// The first board of the bundled set: blue at (6,2), orange at (6,9).
pub fn game_one() -> BargainingBoard {
    let c = |r, c| Coord { row: r, col: c };
    let d = |v: f64, r, col| Disc { value: v, pos: c(r, col) };
    BargainingBoard::new(
        c(6, 2),
        c(6, 9),
        vec![d(3.0, 8, 1), d(3.0, 4, 4), d(3.0, 1, 7), d(1.0, 1, 8), d(2.0, 9, 8)],
    )
    .unwrap()
}

/// CI by enumerating every unordered pair of respondents.
pub fn ci_by_pairs(counts: &[u64]) -> f64 {
    let respondents: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
        .collect();
    let n = respondents.len();
    let mut same = 0u64;
    let mut pairs = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            pairs += 1;
            if respondents[a] == respondents[b] {
                same += 1;
            }
        }
    }
    same as f64 / pairs as f64
}

/// Pure Nash profiles by checking every unilateral deviation through the
/// public payoff lookup.
pub fn brute_force_nash(game: &NormalFormGame) -> BTreeSet<StrategyProfile> {
    let players = game.num_players();
    let sizes: Vec<usize> = (0..players).map(|p| game.strategies(p).len()).collect();
    let mut out = BTreeSet::new();
    let mut digits = vec![0usize; players];
    loop {
        let profile = StrategyProfile::new(
            digits.iter().enumerate().map(|(p, &d)| game.strategies(p)[d].clone()),
        );
        let base = game.payoff_of_profile(&profile).unwrap().to_vec();
        let stable = (0..players).all(|p| {
            game.strategies(p).iter().all(|alt| {
                let mut dev = profile.clone();
                dev.choices[p] = alt.clone();
                game.payoff_of_profile(&dev).unwrap()[p] <= base[p]
            })
        });
        if stable {
            out.insert(profile);
        }
        let mut i = players;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < sizes[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Payoffs scored directly from the rules: agreement pays the receiver, a
/// conflict costs both players a fifth of the disc's value.
pub fn rule_payoffs(board: &BargainingBoard, blue: &[Player], orange: &[Player]) -> (f64, f64) {
    let (mut b, mut o, mut conflict) = (0.0, 0.0, 0.0);
    for (i, d) in board.discs().iter().enumerate() {
        match (blue[i], orange[i]) {
            (Player::Blue, Player::Blue) => b += d.value,
            (Player::Orange, Player::Orange) => o += d.value,
            _ => conflict += d.value,
        }
    }
    (b - conflict / 5.0, o - conflict / 5.0)
}

pub fn all_assignments(k: usize) -> Vec<Vec<Player>> {
    (0..1u32 << k)
        .map(|m| {
            (0..k)
                .map(|i| if m >> i & 1 == 1 { Player::Orange } else { Player::Blue })
                .collect()
        })
        .collect()
}

/// Nash pairs of a board by exhaustive deviation checks on the rule payoffs.
pub fn brute_force_board_nash(board: &BargainingBoard) -> BTreeSet<(Vec<Player>, Vec<Player>)> {
    let all = all_assignments(board.num_discs());
    let mut out = BTreeSet::new();
    for b in &all {
        for o in &all {
            let (pb, po) = rule_payoffs(board, b, o);
            let blue_ok = all.iter().all(|alt| rule_payoffs(board, alt, o).0 <= pb);
            let orange_ok = all.iter().all(|alt| rule_payoffs(board, b, alt).1 <= po);
            if blue_ok && orange_ok {
                out.insert((b.clone(), o.clone()));
            }
        }
    }
    out
}

pub fn players_of(a: &Assignment) -> Vec<Player> {
    a.as_slice().to_vec()
}

/// Connected components of the generator graph, by breadth-first search.
pub fn orbits_by_search(elements: &BTreeSet<u32>, generators: &[Permutation<u32>]) -> Vec<BTreeSet<u32>> {
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for &start in elements {
        if seen.contains(&start) {
            continue;
        }
        let mut orbit = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let mut neighbours: Vec<u32> = generators.iter().map(|g| *g.apply(&x)).collect();
            // inverse edges: y with g(y) = x
            for g in generators {
                neighbours.extend(elements.iter().filter(|y| *g.apply(y) == x));
            }
            for y in neighbours {
                if orbit.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.extend(orbit.iter().copied());
        orbits.push(orbit);
    }
    orbits
}

/// Boards with `min..=max` discs of integer value 1..=9 on distinct squares.
pub fn board_strategy(min: usize, max: usize) -> impl Strategy<Value = BargainingBoard> {
    (
        Just((0u8..81).collect::<Vec<u8>>()).prop_shuffle(),
        prop::collection::vec(1u8..=9, max),
        min..=max,
    )
        .prop_map(|(cells, values, k)| {
            let at = |i: u8| Coord { row: i / 9 + 1, col: i % 9 + 1 };
            let discs = (0..k)
                .map(|i| Disc { value: f64::from(values[i]), pos: at(cells[2 + i]) })
                .collect();
            BargainingBoard::new(at(cells[0]), at(cells[1]), discs).unwrap()
        })
}

pub fn assignment_strategy(k: usize) -> impl Strategy<Value = Assignment> {
    prop::collection::vec(prop::bool::ANY, k).prop_map(|bits| {
        Assignment::new(
            bits.into_iter()
                .map(|o| if o { Player::Orange } else { Player::Blue })
                .collect(),
        )
    })
}
