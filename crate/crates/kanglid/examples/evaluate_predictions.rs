//! Score predictions with per-class and averaged precision/recall/F1.

use kanglid::corpus::Tag;
use kanglid::evaluation::{EvaluationReport, LabelSet};

fn main() -> kanglid::Result<()> {
    // One mislabeled Kannada word out of three.
    let gold = [Tag::Kn, Tag::Kn, Tag::En];
    let pred = [Tag::Kn, Tag::En, Tag::En];
    let report = EvaluationReport::from_pairs(&gold, &pred, LabelSet::PresentInGold)?;
    print!("{}", report.render());
    println!("weighted F1 = {:.4} (expected 2/3)", report.weighted.f1);

    // Averaging over all six labels counts the absent classes as zero.
    let strict = EvaluationReport::from_pairs(&gold, &pred, LabelSet::AllSix)?;
    println!("\nmacro F1 over present labels: {:.4}", report.macro_avg.f1);
    println!("macro F1 over all six labels: {:.4}", strict.macro_avg.f1);
    Ok(())
}
