//! Empirical maximum bin load against the balls-and-bins prediction.

use crate::channel::UserState;
use crate::crowding::{
    bin_count, classify_regime, max_load_of_users, predicted_max_load, snapshot_count, user_count, Axis, BinAxis, BinGrid,
};
use crate::error::Result;
use crate::experiments::config::{Driver, ExperimentConfig};
use crate::experiments::output::ResultTable;
use crate::experiments::stats::{log_log_slope, quantile, summarize};
use crate::experiments::{par_trials, Report};
use crate::rng::trial_rng;
use rand::Rng;

/// For each `M`, throws `K = ⌊M^p⌋` users uniformly over the support of the
/// spatial bins (width `1/M`) and, when `q > 0`, uniformly in Doppler over
/// `L` bins of width `1/L`, then records the maximum load.
pub fn run_maxload_study(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(Driver::Maxload)?;
    let point = cfg.scaling_point()?;
    let class = classify_regime(&point)?;
    let mut table = ResultTable::new(
        "maxload",
        &[
            "m",
            "k_users",
            "bins",
            "trials",
            "mean_max_load",
            "std_error",
            "median_max_load",
            "q90_max_load",
            "largest_max_load",
            "pigeonhole",
            "predicted",
            "predicted_is_proxy",
        ],
    );
    let mut means = Vec::with_capacity(cfg.m_list.len());
    for (mi, &m) in cfg.m_list.iter().enumerate() {
        let k = user_count(point.p, m);
        let l = if point.uses_stab() { snapshot_count(point.q, m) } else { 1 };
        let total = bin_count(&point, m)?;
        let spatial = total / l;
        let mut axes = vec![BinAxis::centered(Axis::Ux, spatial, 1.0 / m as f64)];
        if l > 1 {
            axes.push(BinAxis::centered(Axis::Omega, l, 1.0 / l as f64));
        }
        let grid = BinGrid::new(axes)?;
        let half = spatial as f64 / (2.0 * m as f64);
        let loads = par_trials(cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, mi as u64, t);
            let users: Vec<UserState> = (0..k)
                .map(|_| {
                    let u = rng.random_range(-half..half);
                    let omega = if l > 1 { rng.random_range(-0.5..0.5) } else { 0.0 };
                    UserState::at(u, 0.0, omega)
                })
                .collect();
            Ok(max_load_of_users(&grid, &users))
        })?;
        let values: Vec<f64> = loads.iter().map(|s| s.max_load as f64).collect();
        let s = summarize(&values);
        let prediction = predicted_max_load(&point, m)?;
        table.push(vec![
            m.into(),
            k.into(),
            total.into(),
            cfg.trials.into(),
            s.mean.into(),
            s.std_error.into(),
            quantile(&values, 0.5).into(),
            quantile(&values, 0.9).into(),
            values.iter().copied().fold(0.0, f64::max).into(),
            loads[0].pigeonhole().into(),
            prediction.value.into(),
            prediction.proxy.into(),
        ]);
        means.push(s.mean);
    }
    let ms: Vec<f64> = cfg.m_list.iter().map(|&m| m as f64).collect();
    let slope = log_log_slope(&ms, &means);
    let predicted_exponent = point.load_exponent().max(0.0);
    let mut fit = ResultTable::new("maxload_fit", &["p", "q", "r", "regime", "fitted_slope", "predicted_exponent"]);
    fit.push(vec![
        point.p.into(),
        point.q.into(),
        point.r.into(),
        class.regime.to_string().into(),
        slope.into(),
        predicted_exponent.into(),
    ]);
    Ok(Report {
        tables: vec![table, fit],
        notes: vec![format!(
            "{} regime: fitted log-log slope {slope:.4}, predicted exponent {predicted_exponent:.4}",
            class.regime
        )],
    })
}
