use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{build_schedule, train_with_generation, GanConfig, GenerationMode};
use crate::error::{Error, Result};
use crate::table::DataTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneCell {
    pub epochs: usize,
    pub first_item: f64,
    pub score: f64,
}

/// Scores over the `epoch_grid x first_item_grid` grid, row per epoch count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub epoch_grid: Vec<usize>,
    pub first_item_grid: Vec<f64>,
    pub scores: Vec<Vec<f64>>,
    pub best: TuneCell,
}

impl TuneResult {
    /// Picks the highest score; ties go to fewer epochs, then to the smaller
    /// first item. NaN scores never win.
    pub fn from_scores(epoch_grid: Vec<usize>, first_item_grid: Vec<f64>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if scores.len() != epoch_grid.len() || scores.iter().any(|r| r.len() != first_item_grid.len()) {
            return Err(Error::Argument(format!(
                "score matrix does not match a {}x{} grid",
                epoch_grid.len(),
                first_item_grid.len()
            )));
        }
        let mut best: Option<TuneCell> = None;
        for (i, &epochs) in epoch_grid.iter().enumerate() {
            for (j, &first_item) in first_item_grid.iter().enumerate() {
                let score = scores[i][j];
                if score.is_nan() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        score > b.score
                            || (score == b.score
                                && (epochs < b.epochs || (epochs == b.epochs && first_item < b.first_item)))
                    }
                };
                if better {
                    best = Some(TuneCell {
                        epochs,
                        first_item,
                        score,
                    });
                }
            }
        }
        let best = best.ok_or_else(|| Error::Evaluation("no grid cell produced a score".into()))?;
        Ok(Self {
            epoch_grid,
            first_item_grid,
            scores,
            best,
        })
    }
}

fn check_grids(epoch_grid: &[usize], first_item_grid: &[f64]) -> Result<()> {
    if epoch_grid.is_empty() || first_item_grid.is_empty() {
        return Err(Error::Argument("tuning grids must be non-empty".into()));
    }
    Ok(())
}

/// Trains one geometric-schedule run with `epochs` and `first_item` and
/// returns its synthetic table.
pub fn run_tune_cell(
    table: &DataTable,
    config: &GanConfig,
    epochs: usize,
    first_item: f64,
    total: f64,
    n_target: usize,
) -> Result<DataTable> {
    let config = GanConfig {
        epochs,
        ..config.clone()
    };
    let schedule = build_schedule(GenerationMode::Geometric, n_target, epochs, first_item, total)?;
    Ok(train_with_generation(table, &config, &schedule)?.synthetic)
}

/// Serial grid search. Every cell is an independent run seeded from
/// `config.seed`, so cells can also be run in any order or in parallel via
/// [`run_tune_cell`] and [`TuneResult::from_scores`].
pub fn tune_schedule(
    table: &DataTable,
    config: &GanConfig,
    epoch_grid: &[usize],
    first_item_grid: &[f64],
    total: f64,
    n_target: usize,
    mut evaluator: impl FnMut(&DataTable, &DataTable) -> Result<f64>,
) -> Result<TuneResult> {
    check_grids(epoch_grid, first_item_grid)?;
    let mut scores = Vec::with_capacity(epoch_grid.len());
    for &epochs in epoch_grid {
        let mut row = Vec::with_capacity(first_item_grid.len());
        for &a in first_item_grid {
            let synth = run_tune_cell(table, config, epochs, a, total, n_target)?;
            row.push(evaluator(table, &synth)?);
        }
        scores.push(row);
    }
    TuneResult::from_scores(epoch_grid.to_vec(), first_item_grid.to_vec(), scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{ColumnData, ColumnSpec};
    use alloc::vec;

    #[test]
    fn ties_prefer_fewer_epochs_then_smaller_first_item() {
        let r = TuneResult::from_scores(
            vec![100, 50],
            vec![0.3, 0.2],
            vec![vec![0.9, 0.9], vec![0.9, 0.9]],
        )
        .unwrap();
        assert_eq!((r.best.epochs, r.best.first_item), (50, 0.2));
    }

    #[test]
    fn nan_never_wins() {
        let r = TuneResult::from_scores(vec![1, 2], vec![0.1], vec![vec![f64::NAN], vec![0.2]]).unwrap();
        assert_eq!(r.best.epochs, 2);
        assert!(TuneResult::from_scores(vec![1], vec![0.1], vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn single_cell_grid() {
        let t = DataTable::new(
            vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])],
            vec![
                ColumnData::Continuous((0..30).map(|i| Some(i as f64)).collect()),
                ColumnData::Categorical((0..30).map(|i| Some(i % 2)).collect()),
            ],
        )
        .unwrap();
        let config = GanConfig {
            noise_dim: 3,
            gen_hidden: 4,
            disc_hidden: 4,
            batch_size: 8,
            ..GanConfig::default()
        };
        let mut calls = 0;
        let r = tune_schedule(&t, &config, &[2], &[50.0], 100.0, 10, |real, synth| {
            calls += 1;
            assert_eq!(real.n_rows(), 30);
            assert_eq!(synth.n_rows(), 10);
            Ok(0.5)
        })
        .unwrap();
        assert_eq!(calls, 1);
        assert_eq!(r.scores, vec![vec![0.5]]);
        assert_eq!((r.best.epochs, r.best.first_item, r.best.score), (2, 50.0, 0.5));
        assert!(tune_schedule(&t, &config, &[], &[1.0], 100.0, 10, |_, _| Ok(0.0)).is_err());
    }
}
