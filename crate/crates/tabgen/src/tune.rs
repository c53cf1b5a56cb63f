//! Grid search over geometric schedules with one thread per cell.

use rayon::prelude::*;
use tabgen_core::gan::{run_tune_cell, GanConfig, TuneResult};
use tabgen_core::metrics::{evaluate_all, EvalOptions};
use tabgen_core::table::DataTable;

/// Parallel counterpart of `tabgen_core::gan::tune_schedule` scored by the
/// overall fidelity. Cells are independent runs, so the result equals the
/// serial search.
pub fn tune_parallel(
    table: &DataTable,
    config: &GanConfig,
    epoch_grid: &[usize],
    first_item_grid: &[f64],
    total: f64,
    n_target: usize,
    eval: &EvalOptions,
) -> tabgen_core::Result<TuneResult> {
    if epoch_grid.is_empty() || first_item_grid.is_empty() {
        return Err(tabgen_core::Error::Argument("tuning grids must not be empty".into()));
    }
    let cells: Vec<(usize, f64)> = epoch_grid
        .iter()
        .flat_map(|&e| first_item_grid.iter().map(move |&a| (e, a)))
        .collect();
    let flat: Vec<f64> = cells
        .par_iter()
        .map(|&(e, a)| {
            let synth = run_tune_cell(table, config, e, a, total, n_target)?;
            Ok(evaluate_all(table, &synth, eval)?.overall())
        })
        .collect::<tabgen_core::Result<_>>()?;
    let scores = flat.chunks(first_item_grid.len()).map(<[f64]>::to_vec).collect();
    TuneResult::from_scores(epoch_grid.to_vec(), first_item_grid.to_vec(), scores)
}
