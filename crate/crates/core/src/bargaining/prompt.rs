use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BargainingBoard, Player};

/// Behavioural directive appended to the board prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BargainingVariant {
    Vanilla,
    Greedy,
    Cooperative,
    AllFeatures,
    Saliency,
}

impl BargainingVariant {
    pub const ALL: [BargainingVariant; 5] = [
        BargainingVariant::Vanilla,
        BargainingVariant::Greedy,
        BargainingVariant::Cooperative,
        BargainingVariant::AllFeatures,
        BargainingVariant::Saliency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BargainingVariant::Vanilla => "vanilla",
            BargainingVariant::Greedy => "greedy",
            BargainingVariant::Cooperative => "cooperative",
            BargainingVariant::AllFeatures => "all-features",
            BargainingVariant::Saliency => "saliency",
        }
    }

    fn directive(self) -> &'static str {
        match self {
            BargainingVariant::Vanilla => "",
            BargainingVariant::Greedy => "Try to maximize your own payoff.",
            BargainingVariant::Cooperative => {
                "Try to be cooperative: aim to maximize the total payoff of both players \
                 (joint outcome), not just your own."
            }
            BargainingVariant::AllFeatures => ALL_FEATURES,
            BargainingVariant::Saliency => {
                "Anticipate the other player's moves and prefer discs he is unlikely to pick \
                 for himself."
            }
        }
    }
}

impl fmt::Display for BargainingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const RULES: &str = "Bargaining Table is a tacit coordination game played on a 9×9 board with two \
special squares, one representing each player (e.g., a blue square and a yellow square). Several \
discs are scattered on the board, and each disc has a numeric value. Without communicating and \
without knowing the other player's choices, each player must decide, for every disc, which of the \
two player-squares the disc should be assigned to. A disc's value is awarded only if both players \
assign that disc to the same player: if both assign it to Blue, Blue receives the disc's value (and \
Yellow receives nothing for that disc), and if both assign it to Yellow, Yellow receives the disc's \
value (and Blue receives nothing for that disc). If the two players assign the same disc to \
different players, then both players are penalized by losing 20% of that disc's value. The total \
score for each player is the sum of outcomes over all discs.\n\
The coordinates are written as (row, column) on a 9×9 grid, where row 1 is the top row and column \
1 is the leftmost column. You will have to play that game in the following state:\n";

const OUTPUT_FORMAT: &str = "\nInside <answer></answer> tags, output only a JSON object where each \
key is a disc coordinate in the form \"(row,col)\" and each value is either \"blue\" or \"yellow\", \
indicating which player you assign that disc to. Include every disc exactly once and no extra \
text. For example: <answer>{\"(row,col)\":\"blue\",\"(row,col)\":\"yellow\"}</answer> ";

const CLOSING: &str = "Start the solution below.";

const ALL_FEATURES: &str = "There are four intuitive properties that make a choice desirable:\n\
- uniqueness: it is the only object with a given property.\n\
- uniqueness complement: it is the only object *without* a given property.\n\
- centrality: it is a central point around which a domain is symmetric.\n\
- extremeness: it is an object that has the largest or the smallest property among all the others.\n\
Now, you have to prioritise the selection of your discs based on the mentioned properties.";

/// Natural-language description of the board from `me`'s seat.
pub fn describe_state(board: &BargainingBoard, me: Player) -> String {
    let other = me.other();
    let discs: Vec<String> = board
        .discs()
        .iter()
        .map(|d| format!("a value-{} disc at {}", d.value, d.pos))
        .collect();
    let listed = match discs.as_slice() {
        [only] => only.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
        [] => String::new(),
    };
    let count = match discs.len() {
        1 => "There is 1 disc on the board".to_string(),
        n => format!("There are {n} discs on the board"),
    };
    format!(
        "You are the {} player, and your square is located at {}. The other player's square ({}) \
         is located at {}. {count}: {listed}.",
        me.prompt_name(),
        board.square_of(me),
        other.prompt_name(),
        board.square_of(other),
    )
}

/// The full one-shot prompt for seat `me`.
pub fn render_bargaining_prompt(
    board: &BargainingBoard,
    me: Player,
    variant: BargainingVariant,
) -> String {
    let directive = variant.directive();
    let mut out = String::with_capacity(2048);
    out.push_str(RULES);
    out.push_str(&describe_state(board, me));
    out.push_str(OUTPUT_FORMAT);
    if !directive.is_empty() {
        out.push_str(directive);
        out.push(' ');
    }
    out.push_str(CLOSING);
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::game_one;
    use super::super::{Coord, Disc};
    use super::*;

    #[test]
    fn blue_state_description() {
        assert_eq!(
            describe_state(&game_one(), Player::Blue),
            "You are the Blue player, and your square is located at (6, 2). The other player's \
             square (Yellow) is located at (6, 9). There are 5 discs on the board: a value-3 disc \
             at (8, 1), a value-3 disc at (4, 4), a value-3 disc at (1, 7), a value-1 disc at \
             (1, 8), and a value-2 disc at (9, 8)."
        );
    }

    #[test]
    fn yellow_state_and_small_boards() {
        let b = BargainingBoard::new(
            Coord::new(1, 1),
            Coord::new(9, 9),
            vec![Disc { value: 2.5, pos: Coord::new(3, 4) }],
        )
        .unwrap();
        assert_eq!(
            describe_state(&b, Player::Orange),
            "You are the Yellow player, and your square is located at (9, 9). The other player's \
             square (Blue) is located at (1, 1). There is 1 disc on the board: a value-2.5 disc at \
             (3, 4)."
        );
    }

    #[test]
    fn prompt_layout() {
        let vanilla = render_bargaining_prompt(&game_one(), Player::Blue, BargainingVariant::Vanilla);
        assert!(vanilla.starts_with("Bargaining Table is a tacit coordination game played on a 9×9"));
        assert!(vanilla.contains("following state:\nYou are the Blue player"));
        assert!(vanilla.contains("(9, 8).\nInside <answer></answer> tags"));
        assert!(vanilla.ends_with(
            "<answer>{\"(row,col)\":\"blue\",\"(row,col)\":\"yellow\"}</answer> Start the solution below."
        ));
        let greedy = render_bargaining_prompt(&game_one(), Player::Blue, BargainingVariant::Greedy);
        assert!(greedy.ends_with("</answer> Try to maximize your own payoff. Start the solution below."));
        let af = render_bargaining_prompt(&game_one(), Player::Blue, BargainingVariant::AllFeatures);
        assert!(af.contains("\n- uniqueness complement: it is the only object *without* a given property.\n"));
    }
}
