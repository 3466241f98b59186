//! Rank shared-task submissions by weighted F1.
//!
//! Ranks compare scores rounded to two decimals, so near-ties share a
//! dense rank; names break remaining order alphabetically.

use kanglid::evaluation::RankedLeaderboard;

fn main() {
    let submissions = [
        ("CIC", 0.64),
        ("TeamX", 0.66),
        ("HashLSTM", 0.841),
        ("SubwordNet", 0.838),
        ("TrigramBase", 0.71),
    ];
    let board = RankedLeaderboard::from_scores(&submissions);
    print!("{}", board.render());
}
