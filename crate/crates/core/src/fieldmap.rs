//! Power maps over the measurement grid.
//!
//! Target sweep: the receiver stays put and the surface is re-optimized for
//! every grid point in turn. The value stored at grid point `p` is the power
//! at the *fixed receiver* under the configuration aimed at `p`, not the
//! power at `p`.
//!
//! Receiver sweep: the configuration stays put and the receiver visits every
//! grid point (the beam footprint).

use std::fmt;

use thiserror::Error;

use crate::channel::{self, ChannelError, ComplexCoeff, RisConfig, POWER_FLOOR_DBM};
use crate::geometry::{GridSpec, Vec3};
use crate::optimizer::{self, OptimizerError};
use crate::scenario::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    TargetSweep,
    RxSweep,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::TargetSweep => "target-sweep",
            SweepMode::RxSweep => "rx-sweep",
        }
    }
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("grid cell ({i}, {j}) (index {index}): {source}")]
    Cell {
        index: usize,
        i: usize,
        j: usize,
        source: OptimizerError,
    },
    #[error("receiver: {0}")]
    Receiver(ChannelError),
    #[error("configuration has {got} states, surface has {expected} elements")]
    ConfigLength { got: usize, expected: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// Received power in dBm on every grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub grid: GridSpec,
    /// Indexed by [`GridSpec::index`], i.e. `i * count_v + j`.
    pub values: Vec<f64>,
    pub mode: SweepMode,
    pub scenario_digest: String,
    /// Cells whose channel vanished and hold [`POWER_FLOOR_DBM`].
    pub sentinel: Vec<bool>,
}

impl PowerMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_sentinel(&self, i: usize, j: usize) -> bool {
        self.sentinel[self.grid.index(i, j)]
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, bool)> + '_ {
        (0..self.values.len()).map(|k| {
            let (i, j) = self.grid.cell(k);
            (i, j, self.values[k], self.sentinel[k])
        })
    }

    /// Largest non-sentinel value with its cell; ties go to the
    /// lexicographically smallest `(i, j)`.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, j, v, floor) in self.cells() {
            if !floor && best.is_none_or(|b| v > b.2) {
                best = Some((i, j, v));
            }
        }
        best
    }
}

fn power_of(h: ComplexCoeff, scene: &Scene) -> (f64, bool) {
    let dbm = channel::received_power_dbm(h, scene.rf());
    (dbm, h.norm() == 0.0 || dbm <= POWER_FLOOR_DBM)
}

/// Evaluates `f` on every grid cell using `workers` threads (0 = one per
/// core). Each cell is written by index, so the result does not depend on
/// the number of workers.
fn map_cells<F>(grid: &GridSpec, workers: usize, f: F) -> Result<Vec<(f64, bool)>, SweepError>
where
    F: Fn(usize, Vec3) -> Result<(f64, bool), SweepError> + Sync + Send,
{
    let run = |k: usize| {
        let (i, j) = grid.cell(k);
        f(k, grid.point(i, j))
    };
    #[cfg(feature = "parallel")]
    if workers != 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?;
        return pool.install(|| (0..grid.len()).into_par_iter().map(run).collect());
    }
    let _ = workers;
    (0..grid.len()).map(run).collect()
}

fn assemble(scene: &Scene, mode: SweepMode, cells: Vec<(f64, bool)>) -> PowerMap {
    let (values, sentinel) = cells.into_iter().unzip();
    PowerMap {
        grid: scene.scenario.grid,
        values,
        mode,
        scenario_digest: scene.digest.clone(),
        sentinel,
    }
}

/// Power at the fixed receiver, with the surface optimized for each grid
/// point in turn.
pub fn sweep_targets(scene: &Scene, workers: usize) -> Result<PowerMap, SweepError> {
    let grid = scene.scenario.grid;
    let casc_rx = scene
        .cascade_to(scene.scenario.rx)
        .map_err(SweepError::Receiver)?;
    let cells = map_cells(&grid, workers, |k, p| {
        let cell_err = |source: OptimizerError| {
            let (i, j) = grid.cell(k);
            SweepError::Cell {
                index: k,
                i,
                j,
                source,
            }
        };
        let config = optimizer::optimize_config(scene, p).map_err(cell_err)?;
        let h = channel::effective_channel(&casc_rx, &config.states, scene.rf(), scene.amplitude())
            .map_err(|e| cell_err(e.into()))?;
        Ok(power_of(h, scene))
    })?;
    Ok(assemble(scene, SweepMode::TargetSweep, cells))
}

/// Power at every grid point with the surface held at `config`.
pub fn sweep_receivers(
    scene: &Scene,
    config: &RisConfig,
    workers: usize,
) -> Result<PowerMap, SweepError> {
    if config.len() != scene.len() {
        return Err(SweepError::ConfigLength {
            got: config.len(),
            expected: scene.len(),
        });
    }
    let grid = scene.scenario.grid;
    let cells = map_cells(&grid, workers, |k, p| {
        let cell_err = |source: OptimizerError| {
            let (i, j) = grid.cell(k);
            SweepError::Cell {
                index: k,
                i,
                j,
                source,
            }
        };
        let casc = scene.cascade_to(p).map_err(|e| cell_err(e.into()))?;
        let h = channel::effective_channel(&casc, &config.states, scene.rf(), scene.amplitude())
            .map_err(|e| cell_err(e.into()))?;
        Ok(power_of(h, scene))
    })?;
    Ok(assemble(scene, SweepMode::RxSweep, cells))
}
