//! Training loop with early stopping, and the geometry grid search.

use super::{init_mlp, loss_mae, MlpConfig, MlpModel, NnError, Sample};
use crate::parallel::par_map;
use rand::Rng;

/// Per-epoch loss trace of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// `(train L1, validation L1)` per completed epoch.
    pub epoch_losses: Vec<(f64, f64)>,
    /// 1-based epoch at which training stopped.
    pub stopped_epoch: usize,
    /// 1-based epoch with the best validation loss.
    pub best_epoch: usize,
}

fn validation_loss(model: &MlpModel, set: &[Sample]) -> Result<f64, NnError> {
    let mut acc = 0.0;
    for s in set {
        acc += loss_mae(model.predict_scaled(&s.input)?, s.target);
    }
    Ok(acc / set.len() as f64)
}

/// Trains in shuffled mini-batches with early stopping on validation L1.
///
/// The model is left at the parameters of the best validation epoch. Both
/// sample sets must already be scaled.
pub fn train(
    model: &mut MlpModel,
    train_set: &[Sample],
    validation_set: &[Sample],
) -> Result<TrainHistory, NnError> {
    if train_set.is_empty() || validation_set.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let batch_size = model.config.batch_size;
    let mut indices: Vec<usize> = (0..train_set.len()).collect();

    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_layers = model.layers.clone();
    let mut since_best = 0usize;
    let mut history = Vec::new();
    let mut stopped_epoch = 0usize;

    for epoch in 1..=model.config.max_epochs {
        stopped_epoch = epoch;
        // Fisher-Yates driven by the model generator keeps runs replayable.
        for i in (1..indices.len()).rev() {
            let j = model.rng.gen_range(0..=i);
            indices.swap(i, j);
        }

        let mut train_loss = 0.0;
        let mut batches = 0usize;
        let mut batch = Vec::with_capacity(batch_size);
        for &idx in &indices {
            batch.push(train_set[idx].clone());
            if batch.len() == batch_size {
                train_loss += model.train_step(&batch)?;
                batches += 1;
                batch.clear();
            }
        }
        if !batch.is_empty() {
            train_loss += model.train_step(&batch)?;
            batches += 1;
        }
        train_loss /= batches as f64;

        let val_loss = validation_loss(model, validation_set)?;
        history.push((train_loss, val_loss));

        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_layers = model.layers.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > model.config.patience {
                break;
            }
        }
    }

    model.layers = best_layers;
    Ok(TrainHistory {
        epoch_losses: history,
        stopped_epoch,
        best_epoch,
    })
}

/// Scaled train/validation samples for one price channel.
#[derive(Debug, Clone)]
pub struct ChannelSamples {
    pub label: String,
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
}

/// The four per-channel sample sets a grid candidate is scored on.
#[derive(Debug, Clone)]
pub struct GridDataset {
    pub channels: Vec<ChannelSamples>,
}

/// Score of one geometry candidate.
#[derive(Debug, Clone)]
pub struct GridScore {
    pub hidden_sizes: Vec<usize>,
    /// Best validation MAE per channel, in dataset order.
    pub channel_maes: Vec<f64>,
    /// Sum across channels; the selection criterion.
    pub total_mae: f64,
}

/// Trains every geometry on every channel under an identical protocol and
/// returns the configuration with the lowest summed validation MAE,
/// together with the full score table.
pub fn grid_search(
    geometries: &[Vec<usize>],
    dataset: &GridDataset,
    base: &MlpConfig,
) -> Result<(MlpConfig, Vec<GridScore>), NnError> {
    if geometries.is_empty() {
        return Err(NnError::EmptyGrid);
    }
    if dataset.channels.is_empty() {
        return Err(NnError::EmptyDataset);
    }

    let scores = par_map(geometries.to_vec(), |hidden_sizes| {
        let mut channel_maes = Vec::with_capacity(dataset.channels.len());
        for channel in &dataset.channels {
            let config = MlpConfig {
                hidden_sizes: hidden_sizes.clone(),
                ..base.clone()
            };
            let result = init_mlp(config).and_then(|mut model| {
                train(&mut model, &channel.train, &channel.validation)?;
                validation_loss(&model, &channel.validation)
            });
            match result {
                Ok(mae) => channel_maes.push(mae),
                Err(_) => channel_maes.push(f64::INFINITY),
            }
        }
        let total_mae = channel_maes.iter().sum();
        GridScore {
            hidden_sizes,
            channel_maes,
            total_mae,
        }
    });

    let best = scores
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_mae.partial_cmp(&b.total_mae).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let winner = MlpConfig {
        hidden_sizes: scores[best].hidden_sizes.clone(),
        ..base.clone()
    };
    Ok((winner, scores))
}
