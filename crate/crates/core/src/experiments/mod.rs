//! Seeded Monte Carlo drivers for the figure-scale experiments.
//!
//! Every driver is a pure function of its [`ExperimentConfig`]: trial `t` of
//! sweep point `s` draws from its own ChaCha stream keyed by
//! `(seed, s, t)`, trials run in parallel, and results are collected in trial
//! order before any reduction, so the output bytes do not depend on the number
//! of threads.

pub mod bound_chain;
pub mod cdf;
pub mod config;
pub mod gain_map;
pub mod maxload;
pub mod output;
pub mod plot;
pub mod power_sweep;
pub mod stats;

use rayon::prelude::*;

use crate::channel::{ArrayKind, Footprint, UserDrop};
use crate::error::Result;

pub use bound_chain::run_bound_chain;
pub use cdf::run_cdf;
pub use config::{Driver, ExperimentConfig};
pub use gain_map::run_gain_map;
pub use maxload::run_maxload_study;
pub use output::{Cell, ResultTable};
pub use power_sweep::{run_power_sweep, run_tune_alpha};

/// Tables produced by one driver run plus human-readable summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<ResultTable>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Runs `f` for every trial index in parallel and returns results in trial order.
pub(crate) fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..trials as u64).into_par_iter().map(&f).collect()
}

/// Users dropped on a line (ULA) or a square (UPA) of half-width `r_cell_km`.
pub(crate) fn user_drop(cfg: &ExperimentConfig, users: usize, r_cell_km: f64) -> UserDrop {
    UserDrop {
        users,
        r_cell_km,
        altitude_km: cfg.altitude_km,
        footprint: match cfg.array {
            ArrayKind::Ula => Footprint::Line,
            ArrayKind::Upa => Footprint::Square,
        },
        gain: cfg.gain_model(),
    }
}

/// Run `driver` with `cfg`.
pub fn run(driver: Driver, cfg: &ExperimentConfig) -> Result<Report> {
    match driver {
        Driver::Cdf => run_cdf(cfg),
        Driver::BoundChain => run_bound_chain(cfg),
        Driver::GainMap => run_gain_map(cfg),
        Driver::PowerSweep => run_power_sweep(cfg),
        Driver::Maxload => run_maxload_study(cfg),
        Driver::TuneAlpha => run_tune_alpha(cfg),
    }
}
