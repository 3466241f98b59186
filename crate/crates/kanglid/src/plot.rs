//! SVG charts: loss/accuracy curves from a training history and tag
//! distribution bars from corpus statistics.

use std::path::Path;

use plotters::prelude::*;

use crate::classifier::TrainingHistory;
use crate::corpus::DistributionStats;
use crate::error::{Error, Result};

const TRAIN_COLOR: RGBColor = RGBColor(203, 75, 22);
const VAL_COLOR: RGBColor = RGBColor(38, 139, 210);
const BAR_COLOR: RGBColor = RGBColor(38, 139, 210);
const WIDTH: u32 = 800;
const HEIGHT: u32 = 500;

fn render_err(e: impl std::fmt::Display) -> Error {
    Error::Render {
        reason: e.to_string(),
    }
}

/// Loss per epoch, train and validation series.
pub fn plot_loss_curve(history: &TrainingHistory, path: &Path) -> Result<()> {
    let train: Vec<f64> = history.records.iter().map(|r| r.train_loss).collect();
    let val: Vec<f64> = history.records.iter().map(|r| r.val_loss).collect();
    plot_curves(path, "Loss per epoch", "loss", &train, &val)
}

/// Accuracy per epoch, train and validation series.
pub fn plot_accuracy_curve(history: &TrainingHistory, path: &Path) -> Result<()> {
    let train: Vec<f64> = history.records.iter().map(|r| r.train_accuracy).collect();
    let val: Vec<f64> = history.records.iter().map(|r| r.val_accuracy).collect();
    plot_curves(path, "Accuracy per epoch", "accuracy", &train, &val)
}

fn plot_curves(path: &Path, title: &str, y_desc: &str, train: &[f64], val: &[f64]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::MalformedHistory {
            reason: "history has no epochs".into(),
        });
    }
    let n = train.len();
    // A lone epoch still needs a nonzero x span to map onto pixels.
    let (x_min, x_max) = if n >= 2 { (1, n as i32) } else { (0, 2) };
    let all = train.iter().chain(val.iter());
    let lo = all.clone().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.08).max(0.02);
    let (y_min, y_max) = (lo - pad, hi + pad);

    let root = SVGBackend::new(path, (WIDTH, HEIGHT)).into_drawing_area();
    root.fill(&WHITE).map_err(render_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x_min..x_max, y_min..y_max)
        .map_err(render_err)?;
    chart
        .configure_mesh()
        .x_desc("epoch")
        .y_desc(y_desc)
        .x_labels(n.max(2))
        .x_label_formatter(&|v| v.to_string())
        .draw()
        .map_err(render_err)?;

    let epochs = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| (i as i32 + 1, v))
            .collect::<Vec<_>>()
    };
    chart
        .draw_series(LineSeries::new(epochs(train), TRAIN_COLOR.stroke_width(2)).point_size(3))
        .map_err(render_err)?
        .label("train")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], TRAIN_COLOR.stroke_width(2)));
    chart
        .draw_series(LineSeries::new(epochs(val), VAL_COLOR.stroke_width(2)).point_size(3))
        .map_err(render_err)?
        .label("validation")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], VAL_COLOR.stroke_width(2)));

    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.85))
        .draw()
        .map_err(render_err)?;
    root.present().map_err(render_err)?;
    Ok(())
}

/// Per-tag share of the corpus as a bar chart, bars in canonical tag order.
pub fn plot_distribution(stats: &DistributionStats, path: &Path) -> Result<()> {
    let rows: Vec<(String, f64)> = stats
        .rows()
        .map(|(tag, _, pct)| (tag.name().to_string(), pct))
        .collect();
    let y_max = rows.iter().map(|(_, p)| *p).fold(0.0, f64::max).max(1.0) * 1.15;

    let root = SVGBackend::new(path, (WIDTH, HEIGHT)).into_drawing_area();
    root.fill(&WHITE).map_err(render_err)?;
    let last = rows.len() as i32 - 1;
    let mut chart = ChartBuilder::on(&root)
        .caption("Tag distribution", ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d((0..last).into_segmented(), 0f64..y_max)
        .map_err(render_err)?;
    let labels = rows.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    chart
        .configure_mesh()
        .x_desc("tag")
        .y_desc("percent")
        .x_labels(rows.len())
        .x_label_formatter(&move |v| match v {
            SegmentValue::CenterOf(i) | SegmentValue::Exact(i) => {
                labels.get(*i as usize).cloned().unwrap_or_default()
            }
            SegmentValue::Last => String::new(),
        })
        .draw()
        .map_err(render_err)?;
    chart
        .draw_series(rows.iter().enumerate().map(|(i, (_, pct))| {
            let i = i as i32;
            let mut bar = Rectangle::new(
                [
                    (SegmentValue::Exact(i), 0.0),
                    (SegmentValue::Exact(i + 1), *pct),
                ],
                BAR_COLOR.filled(),
            );
            bar.set_margin(0, 0, 10, 10);
            bar
        }))
        .map_err(render_err)?;
    root.present().map_err(render_err)?;
    Ok(())
}
