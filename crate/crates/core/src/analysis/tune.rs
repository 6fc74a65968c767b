use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuzzy::{broadcast, edges_at, pair_scores, unique_forms};
use crate::model::{gold_partition, partition_stats, Corpus, Partition};
use crate::scorer::score_all;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunePoint {
    pub theta: f64,
    pub conll_f1: f64,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub best_theta: f64,
    pub best_f1: f64,
    pub curve: Vec<TunePoint>,
}

/// `0, step, 2*step, ...` up to and including 1. Values are rounded to 1e-9
/// so `0.01 * 83` prints as `0.83`.
pub fn theta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidConfig(format!("grid step {step} outside (0, 1]")));
    }
    let steps = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|k| (k as f64 * step * 1e9).round() / 1e9).collect();
    if *grid.last().expect("grid has 0") < 1.0 {
        grid.push(1.0);
    }
    Ok(grid)
}

/// Grid-search the fuzzy threshold against the corpus's gold clustering.
pub fn tune_theta(corpus: &Corpus, grid_step: f64) -> Result<TuneResult> {
    let gold = gold_partition(corpus)?;
    tune_theta_with(corpus, &gold, grid_step)
}

/// Grid search against an explicit key. Form-pair similarities are computed
/// once and thresholded per grid point. Ties go to the smallest theta.
pub fn tune_theta_with(corpus: &Corpus, key: &Partition, grid_step: f64) -> Result<TuneResult> {
    let grid = theta_grid(grid_step)?;
    let forms = unique_forms(corpus);
    let scores = pair_scores(&forms);
    let curve = grid
        .par_iter()
        .map(|&theta| {
            let response = broadcast(corpus, &forms, &edges_at(&scores, theta));
            let report = score_all(key, &response)?;
            Ok(TunePoint {
                theta,
                conll_f1: report.conll_f1,
                clusters: partition_stats(&response).cluster_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    assert!(
        curve.windows(2).all(|w| w[0].clusters <= w[1].clusters),
        "cluster count must not grow as theta decreases"
    );

    let mut best = curve[0];
    for p in &curve[1..] {
        if p.conll_f1 > best.conll_f1 {
            best = *p;
        }
    }
    Ok(TuneResult {
        best_theta: best.theta,
        best_f1: best.conll_f1,
        curve,
    })
}

/// Two-column CSV (`theta,conll_f1`).
pub fn write_curve_csv(path: impl AsRef<Path>, result: &TuneResult) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta", "conll_f1"])?;
    for p in &result.curve {
        w.write_record([format!("{:.2}", p.theta), format!("{:.6}", p.conll_f1)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
