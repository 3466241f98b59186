//! Scoring: confusion matrices, per-class precision/recall/F1, weighted and
//! macro aggregates, and leaderboard-style ranking of named runs.
//!
//! Conventions, stated once and enforced everywhere:
//! - a class with a zero denominator (no predictions, or no gold items, or
//!   P + R = 0) scores 0 rather than NaN;
//! - macro averages run over a declared label set, by default the tags that
//!   actually occur in the gold sequence;
//! - weighted averages weight per-class scores by gold support.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Tag;
use crate::error::{Error, Result};

/// Gold-by-predicted count grid in canonical tag order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    cells: [[usize; Tag::COUNT]; Tag::COUNT],
    total: usize,
}

impl ConfusionMatrix {
    /// Count (gold, predicted) pairs. Sequences must align one-to-one.
    pub fn from_pairs(gold: &[Tag], pred: &[Tag]) -> Result<ConfusionMatrix> {
        if gold.len() != pred.len() {
            return Err(Error::LengthMismatch {
                gold: gold.len(),
                pred: pred.len(),
            });
        }
        if gold.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let mut cells = [[0usize; Tag::COUNT]; Tag::COUNT];
        for (&g, &p) in gold.iter().zip(pred) {
            cells[g.index()][p.index()] += 1;
        }
        Ok(ConfusionMatrix {
            cells,
            total: gold.len(),
        })
    }

    /// Count of items with gold tag `gold` predicted as `pred`.
    pub fn cell(&self, gold: Tag, pred: Tag) -> usize {
        self.cells[gold.index()][pred.index()]
    }

    /// Number of evaluated tokens.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Gold occurrences of `tag` (row sum).
    pub fn support(&self, tag: Tag) -> usize {
        self.cells[tag.index()].iter().sum()
    }

    /// Predicted occurrences of `tag` (column sum).
    pub fn predicted(&self, tag: Tag) -> usize {
        self.cells.iter().map(|row| row[tag.index()]).sum()
    }

    pub fn true_positives(&self, tag: Tag) -> usize {
        self.cell(tag, tag)
    }
}

/// Precision, recall, F1 and gold support for one tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-tag scores under the zero-denominator convention.
pub fn per_class_scores(m: &ConfusionMatrix, tag: Tag) -> ClassScores {
    let tp = m.true_positives(tag);
    let precision = ratio(tp, m.predicted(tag));
    let recall = ratio(tp, m.support(tag));
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassScores {
        precision,
        recall,
        f1,
        support: m.support(tag),
    }
}

/// How per-class scores are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Gold-support-weighted mean.
    Weighted,
    /// Unweighted mean over the label set.
    Macro,
}

/// Which tags participate in macro averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSet {
    /// Tags with at least one gold occurrence.
    #[default]
    PresentInGold,
    /// The full six-tag scheme, zero-support tags included.
    AllSix,
}

impl LabelSet {
    fn members(self, m: &ConfusionMatrix) -> Vec<Tag> {
        Tag::CANONICAL
            .iter()
            .copied()
            .filter(|&t| match self {
                LabelSet::PresentInGold => m.support(t) > 0,
                LabelSet::AllSix => true,
            })
            .collect()
    }
}

/// An aggregated (precision, recall, F1) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Combine per-class scores over `label_set` according to `mode`.
pub fn aggregate_scores(
    m: &ConfusionMatrix,
    mode: Averaging,
    label_set: LabelSet,
) -> Result<AggregateScores> {
    if m.total() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let members = label_set.members(m);
    let scores: Vec<(ClassScores, f64)> = members
        .iter()
        .map(|&t| {
            let s = per_class_scores(m, t);
            let weight = match mode {
                Averaging::Weighted => s.support as f64,
                Averaging::Macro => 1.0,
            };
            (s, weight)
        })
        .collect();
    let total_weight: f64 = scores.iter().map(|(_, w)| w).sum();
    if total_weight == 0.0 {
        // all-six macro over an empty gold cannot happen (total > 0); weighted
        // weights sum to the token count, also > 0
        return Err(Error::EmptyMatrix);
    }
    let mean = |pick: fn(&ClassScores) -> f64| -> f64 {
        scores.iter().map(|(s, w)| pick(s) * w).sum::<f64>() / total_weight
    };
    Ok(AggregateScores {
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
    })
}

/// Full scoring summary for one (gold, predictions) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub matrix: ConfusionMatrix,
    /// All six tags in canonical order, regardless of label set.
    pub per_class: Vec<(Tag, ClassScores)>,
    pub weighted: AggregateScores,
    pub macro_avg: AggregateScores,
    pub label_set: LabelSet,
}

impl EvaluationReport {
    pub fn from_matrix(matrix: ConfusionMatrix, label_set: LabelSet) -> Result<EvaluationReport> {
        let per_class = Tag::CANONICAL
            .iter()
            .map(|&t| (t, per_class_scores(&matrix, t)))
            .collect();
        let weighted = aggregate_scores(&matrix, Averaging::Weighted, label_set)?;
        let macro_avg = aggregate_scores(&matrix, Averaging::Macro, label_set)?;
        Ok(EvaluationReport {
            matrix,
            per_class,
            weighted,
            macro_avg,
            label_set,
        })
    }

    pub fn from_pairs(gold: &[Tag], pred: &[Tag], label_set: LabelSet) -> Result<EvaluationReport> {
        EvaluationReport::from_matrix(ConfusionMatrix::from_pairs(gold, pred)?, label_set)
    }

    /// Scores for one tag.
    pub fn class(&self, tag: Tag) -> ClassScores {
        self.per_class[tag.index()].1
    }

    /// Plain-text table: per-class rows for the label set, then the weighted
    /// and macro rows, then the conventions in force.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>9} {:>9} {:>9}",
            "label", "precision", "recall", "f1-score", "support"
        );
        let _ = writeln!(out);
        for &(tag, s) in &self.per_class {
            let in_set = match self.label_set {
                LabelSet::PresentInGold => s.support > 0,
                LabelSet::AllSix => true,
            };
            if in_set {
                let _ = writeln!(
                    out,
                    "{:<10} {:>9.2} {:>9.2} {:>9.2} {:>9}",
                    tag.name(),
                    s.precision,
                    s.recall,
                    s.f1,
                    s.support
                );
            }
        }
        let _ = writeln!(out);
        for (label, agg) in [("weighted", self.weighted), ("macro", self.macro_avg)] {
            let _ = writeln!(
                out,
                "{:<10} {:>9.2} {:>9.2} {:>9.2} {:>9}",
                label,
                agg.precision,
                agg.recall,
                agg.f1,
                self.matrix.total()
            );
        }
        let _ = writeln!(out);
        let set_name = match self.label_set {
            LabelSet::PresentInGold => "present-in-gold",
            LabelSet::AllSix => "all-six",
        };
        let _ = writeln!(out, "label set: {set_name}");
        let _ = writeln!(out, "zero-denominator classes score 0 by convention");
        out
    }
}

/// One leaderboard entry. Tied runs share a rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub name: String,
    pub weighted_f1: f64,
}

/// Named runs ordered by weighted F1.
///
/// Scores are compared at two-decimal precision, so runs that display
/// identically share a rank; ranks are dense (1, 2, 2, 3). Tied runs are
/// listed alphabetically, and insertion order never affects ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLeaderboard {
    rows: Vec<LeaderboardRow>,
}

fn rank_key(f1: f64) -> i64 {
    (f1 * 100.0).round() as i64
}

impl RankedLeaderboard {
    /// Rank named weighted-F1 scores directly.
    pub fn from_scores<S: AsRef<str>>(named: &[(S, f64)]) -> RankedLeaderboard {
        let mut sorted: Vec<(&str, f64)> = named.iter().map(|(n, f1)| (n.as_ref(), *f1)).collect();
        sorted.sort_by(|a, b| rank_key(b.1).cmp(&rank_key(a.1)).then_with(|| a.0.cmp(b.0)));
        let mut rows = Vec::with_capacity(sorted.len());
        let mut rank = 0;
        let mut prev_key = None;
        for (name, f1) in sorted {
            let key = rank_key(f1);
            if prev_key != Some(key) {
                rank += 1;
                prev_key = Some(key);
            }
            rows.push(LeaderboardRow {
                rank,
                name: name.to_string(),
                weighted_f1: f1,
            });
        }
        RankedLeaderboard { rows }
    }

    /// Rank full reports by their weighted F1.
    pub fn from_reports(reports: &[(String, EvaluationReport)]) -> RankedLeaderboard {
        let scores: Vec<(&str, f64)> = reports
            .iter()
            .map(|(n, r)| (n.as_str(), r.weighted.f1))
            .collect();
        RankedLeaderboard::from_scores(&scores)
    }

    pub fn rows(&self) -> &[LeaderboardRow] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<5} {:<32} {:>11}", "rank", "name", "weighted-f1");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<5} {:<32} {:>11.2}",
                row.rank, row.name, row.weighted_f1
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::IndexedRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Direct-from-pairs recomputation, sharing no code with the module above.
    fn oracle(
        gold: &[Tag],
        pred: &[Tag],
        label_set: LabelSet,
    ) -> (AggregateScores, AggregateScores) {
        let members: Vec<Tag> = Tag::CANONICAL
            .iter()
            .copied()
            .filter(|&t| match label_set {
                LabelSet::PresentInGold => gold.contains(&t),
                LabelSet::AllSix => true,
            })
            .collect();
        let mut per_class = Vec::new();
        for &t in &members {
            let tp = gold
                .iter()
                .zip(pred)
                .filter(|(&g, &p)| g == t && p == t)
                .count() as f64;
            let fp = gold
                .iter()
                .zip(pred)
                .filter(|(&g, &p)| g != t && p == t)
                .count() as f64;
            let fn_ = gold
                .iter()
                .zip(pred)
                .filter(|(&g, &p)| g == t && p != t)
                .count() as f64;
            let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
            let recall = if tp + fn_ == 0.0 {
                0.0
            } else {
                tp / (tp + fn_)
            };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            let support = gold.iter().filter(|&&g| g == t).count() as f64;
            per_class.push((precision, recall, f1, support));
        }
        let total_support: f64 = per_class.iter().map(|x| x.3).sum();
        let weighted = AggregateScores {
            precision: per_class.iter().map(|x| x.0 * x.3).sum::<f64>() / total_support,
            recall: per_class.iter().map(|x| x.1 * x.3).sum::<f64>() / total_support,
            f1: per_class.iter().map(|x| x.2 * x.3).sum::<f64>() / total_support,
        };
        let n = members.len() as f64;
        let macro_avg = AggregateScores {
            precision: per_class.iter().map(|x| x.0).sum::<f64>() / n,
            recall: per_class.iter().map(|x| x.1).sum::<f64>() / n,
            f1: per_class.iter().map(|x| x.2).sum::<f64>() / n,
        };
        (weighted, macro_avg)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn single_correct_item() {
        let m = ConfusionMatrix::from_pairs(&[Tag::Kn], &[Tag::Kn]).unwrap();
        assert_eq!(m.cell(Tag::Kn, Tag::Kn), 1);
        assert_eq!(m.total(), 1);
        for g in Tag::CANONICAL {
            for p in Tag::CANONICAL {
                if (g, p) != (Tag::Kn, Tag::Kn) {
                    assert_eq!(m.cell(g, p), 0);
                }
            }
        }
    }

    #[test]
    fn three_token_matrix() {
        let gold = [Tag::Kn, Tag::Kn, Tag::En];
        let pred = [Tag::Kn, Tag::En, Tag::En];
        let m = ConfusionMatrix::from_pairs(&gold, &pred).unwrap();
        assert_eq!(m.cell(Tag::Kn, Tag::Kn), 1);
        assert_eq!(m.cell(Tag::Kn, Tag::En), 1);
        assert_eq!(m.cell(Tag::En, Tag::En), 1);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn three_token_per_class_scores() {
        let gold = [Tag::Kn, Tag::Kn, Tag::En];
        let pred = [Tag::Kn, Tag::En, Tag::En];
        let m = ConfusionMatrix::from_pairs(&gold, &pred).unwrap();
        let kn = per_class_scores(&m, Tag::Kn);
        assert!(close(kn.precision, 1.0));
        assert!(close(kn.recall, 0.5));
        assert!(close(kn.f1, 2.0 / 3.0));
        assert_eq!(kn.support, 2);
        let en = per_class_scores(&m, Tag::En);
        assert!(close(en.precision, 0.5));
        assert!(close(en.recall, 1.0));
        assert!(close(en.f1, 2.0 / 3.0));
        assert_eq!(en.support, 1);
    }

    #[test]
    fn absent_class_scores_zero() {
        let m = ConfusionMatrix::from_pairs(&[Tag::Kn], &[Tag::Kn]).unwrap();
        let s = per_class_scores(&m, Tag::Location);
        assert_eq!((s.precision, s.recall, s.f1, s.support), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn three_token_weighted_f1() {
        let gold = [Tag::Kn, Tag::Kn, Tag::En];
        let pred = [Tag::Kn, Tag::En, Tag::En];
        let m = ConfusionMatrix::from_pairs(&gold, &pred).unwrap();
        let agg = aggregate_scores(&m, Averaging::Weighted, LabelSet::PresentInGold).unwrap();
        assert!(close(agg.f1, 2.0 / 3.0));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let gold = [Tag::Kn, Tag::En, Tag::Other, Tag::Name, Tag::Kn];
        let m = ConfusionMatrix::from_pairs(&gold, &gold).unwrap();
        for mode in [Averaging::Weighted, Averaging::Macro] {
            let agg = aggregate_scores(&m, mode, LabelSet::PresentInGold).unwrap();
            assert!(close(agg.precision, 1.0));
            assert!(close(agg.recall, 1.0));
            assert!(close(agg.f1, 1.0));
        }
        // diagonal matrix
        for g in Tag::CANONICAL {
            for p in Tag::CANONICAL {
                if g != p {
                    assert_eq!(m.cell(g, p), 0);
                }
            }
        }
    }

    #[test]
    fn all_six_macro_counts_absent_classes() {
        let gold = [Tag::Kn, Tag::En];
        let m = ConfusionMatrix::from_pairs(&gold, &gold).unwrap();
        let present = aggregate_scores(&m, Averaging::Macro, LabelSet::PresentInGold).unwrap();
        let all = aggregate_scores(&m, Averaging::Macro, LabelSet::AllSix).unwrap();
        assert!(close(present.f1, 1.0));
        // 2 perfect classes, 4 zero classes
        assert!(close(all.f1, 2.0 / 6.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = ConfusionMatrix::from_pairs(&[Tag::Kn], &[Tag::Kn, Tag::En]).unwrap_err();
        match err {
            Error::LengthMismatch { gold, pred } => {
                assert_eq!(gold, 1);
                assert_eq!(pred, 2);
            }
            other => panic!("expected LengthMismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            ConfusionMatrix::from_pairs(&[], &[]),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn random_pairs_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..500 {
            let n = 1 + (case % 50);
            let gold: Vec<Tag> = (0..n)
                .map(|_| *Tag::CANONICAL.choose(&mut rng).unwrap())
                .collect();
            let pred: Vec<Tag> = (0..n)
                .map(|_| *Tag::CANONICAL.choose(&mut rng).unwrap())
                .collect();
            let m = ConfusionMatrix::from_pairs(&gold, &pred).unwrap();
            // recount totals
            assert_eq!(m.total(), n);
            for t in Tag::CANONICAL {
                assert_eq!(m.support(t), gold.iter().filter(|&&g| g == t).count());
            }
            for set in [LabelSet::PresentInGold, LabelSet::AllSix] {
                let (want_w, want_m) = oracle(&gold, &pred, set);
                let got_w = aggregate_scores(&m, Averaging::Weighted, set).unwrap();
                let got_m = aggregate_scores(&m, Averaging::Macro, set).unwrap();
                assert!(close(got_w.precision, want_w.precision), "case {case}");
                assert!(close(got_w.recall, want_w.recall), "case {case}");
                assert!(close(got_w.f1, want_w.f1), "case {case}");
                assert!(close(got_m.precision, want_m.precision), "case {case}");
                assert!(close(got_m.recall, want_m.recall), "case {case}");
                assert!(close(got_m.f1, want_m.f1), "case {case}");
            }
        }
    }

    #[test]
    fn report_renders_table_layout() {
        let gold = [Tag::Kn, Tag::Kn, Tag::En];
        let pred = [Tag::Kn, Tag::En, Tag::En];
        let report = EvaluationReport::from_pairs(&gold, &pred, LabelSet::default()).unwrap();
        let text = report.render();
        assert!(text.contains("label"));
        assert!(text.contains("precision"));
        assert!(text.contains("kn"));
        assert!(text.contains("weighted"));
        assert!(text.contains("macro"));
        assert!(text.contains("0.67"));
        assert!(text.contains("present-in-gold"));
        // absent tags stay out of the per-class table under the default set
        assert!(!text.contains("location"));
    }

    #[test]
    fn leaderboard_dense_ranks_with_ties() {
        let board = RankedLeaderboard::from_scores(&[
            ("delta", 0.83),
            ("alpha", 0.86),
            ("bravo", 0.84),
            ("charlie", 0.84),
        ]);
        let got: Vec<(usize, &str)> = board
            .rows()
            .iter()
            .map(|r| (r.rank, r.name.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![(1, "alpha"), (2, "bravo"), (2, "charlie"), (3, "delta")]
        );
    }

    #[test]
    fn leaderboard_singleton_and_full_tie() {
        let single = RankedLeaderboard::from_scores(&[("only", 0.5)]);
        assert_eq!(single.rows()[0].rank, 1);
        let tie = RankedLeaderboard::from_scores(&[("b", 0.7), ("a", 0.7), ("c", 0.7)]);
        assert!(tie.rows().iter().all(|r| r.rank == 1));
        let names: Vec<&str> = tie.rows().iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b", "c"]);
    }

    #[test]
    fn leaderboard_ties_at_display_precision() {
        // distinct raw values equal after rounding to 2 decimals
        let board = RankedLeaderboard::from_scores(&[("a", 0.8449), ("b", 0.8351)]);
        assert_eq!(board.rows()[0].rank, 1);
        assert_eq!(board.rows()[1].rank, 1);
    }

    #[test]
    fn leaderboard_insertion_order_irrelevant() {
        let forward = RankedLeaderboard::from_scores(&[("a", 0.9), ("b", 0.8)]);
        let backward = RankedLeaderboard::from_scores(&[("b", 0.8), ("a", 0.9)]);
        assert_eq!(forward, backward);
    }

    fn arb_tag() -> impl Strategy<Value = Tag> {
        (0..Tag::COUNT).prop_map(|i| Tag::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn scores_bounded_and_permutation_invariant(
            pairs in proptest::collection::vec((arb_tag(), arb_tag()), 1..60),
            seed in any::<u64>(),
        ) {
            let gold: Vec<Tag> = pairs.iter().map(|p| p.0).collect();
            let pred: Vec<Tag> = pairs.iter().map(|p| p.1).collect();
            let m = ConfusionMatrix::from_pairs(&gold, &pred).unwrap();
            let report = EvaluationReport::from_matrix(m, LabelSet::PresentInGold).unwrap();
            for (_, s) in &report.per_class {
                prop_assert!((0.0..=1.0).contains(&s.precision));
                prop_assert!((0.0..=1.0).contains(&s.recall));
                prop_assert!((0.0..=1.0).contains(&s.f1));
            }
            for agg in [report.weighted, report.macro_avg] {
                prop_assert!((0.0..=1.0).contains(&agg.precision));
                prop_assert!((0.0..=1.0).contains(&agg.recall));
                prop_assert!((0.0..=1.0).contains(&agg.f1));
            }
            // weighted F1 sits inside the per-class F1 envelope
            let f1s: Vec<f64> = report.per_class.iter()
                .filter(|(_, s)| s.support > 0)
                .map(|(_, s)| s.f1)
                .collect();
            let lo = f1s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = f1s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(report.weighted.f1 >= lo - 1e-12);
            prop_assert!(report.weighted.f1 <= hi + 1e-12);

            // joint shuffle leaves every score unchanged
            let mut shuffled = pairs.clone();
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let gold2: Vec<Tag> = shuffled.iter().map(|p| p.0).collect();
            let pred2: Vec<Tag> = shuffled.iter().map(|p| p.1).collect();
            let report2 = EvaluationReport::from_pairs(&gold2, &pred2, LabelSet::PresentInGold).unwrap();
            prop_assert_eq!(report.weighted, report2.weighted);
            prop_assert_eq!(report.macro_avg, report2.macro_avg);
            prop_assert_eq!(&report.per_class, &report2.per_class);
        }

        #[test]
        fn self_evaluation_is_perfect(gold in proptest::collection::vec(arb_tag(), 1..40)) {
            let report = EvaluationReport::from_pairs(&gold, &gold, LabelSet::PresentInGold).unwrap();
            prop_assert!((report.weighted.f1 - 1.0).abs() < 1e-12);
            prop_assert!((report.macro_avg.f1 - 1.0).abs() < 1e-12);
            for g in Tag::CANONICAL {
                for p in Tag::CANONICAL {
                    if g != p {
                        prop_assert_eq!(report.matrix.cell(g, p), 0);
                    }
                }
            }
        }
    }
}
