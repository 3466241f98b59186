//! Render loss and accuracy curves from a training-history file.

use std::fs;

use kanglid::classifier::{EpochRecord, TrainingHistory};
use kanglid::cli;

fn main() -> kanglid::Result<()> {
    let dir = std::env::temp_dir().join("kanglid-examples");
    fs::create_dir_all(&dir)?;

    // A plausible 12-epoch run: training loss keeps falling while
    // validation loss bottoms out at epoch 9 and drifts back up.
    let val_losses = [
        1.52, 1.18, 0.93, 0.76, 0.64, 0.57, 0.53, 0.51, 0.50, 0.52, 0.55, 0.59,
    ];
    let records = val_losses
        .iter()
        .enumerate()
        .map(|(i, &val_loss)| {
            let epoch = i + 1;
            let train_loss = 1.6 * (-0.28 * epoch as f64).exp() + 0.08;
            EpochRecord {
                epoch,
                train_loss,
                train_accuracy: 1.0 - train_loss / 2.0,
                val_loss,
                val_accuracy: 1.0 - val_loss / 2.0,
            }
        })
        .collect();
    let history = TrainingHistory {
        records,
        best_epoch: 9,
        stopped_epoch: 12,
    };
    let path = dir.join("history.json");
    fs::write(&path, history.to_json())?;

    let loss = dir.join(cli::LOSS_CHART_FILE);
    let accuracy = dir.join(cli::ACCURACY_CHART_FILE);
    cli::cmd_plot(&path, &loss, &accuracy)?;
    println!("wrote {}", loss.display());
    println!("wrote {}", accuracy.display());
    Ok(())
}
