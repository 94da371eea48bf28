//! Mean STAB gain over spatial ZF across the `(p, q)` exponent plane.

use crate::crowding::{classify_regime, snapshot_count, user_count, ScalingPoint};
use crate::error::Result;
use crate::experiments::config::{Driver, ExperimentConfig};
use crate::experiments::output::ResultTable;
use crate::experiments::stats::summarize;
use crate::experiments::{par_trials, user_drop, Report};
use crate::precoding::{zf_rate, GramMatrix};
use crate::rng::trial_rng;

/// For every `(p, q)` cell: `K = ⌊M^p⌋` users on a ULA, `L = max(1, ⌊M^q⌋)`
/// snapshots and cell half-width `R = H M^{-r}`, so the users span about
/// `M^{1-r}` resolution bins. Reports the mean of `R_STAB - R_ZF` per drop.
pub fn run_gain_map(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(Driver::GainMap)?;
    let array = cfg.array_config()?;
    let m = array.elements();
    let rho = cfg.rho(cfg.tx_power_dbm[0]);
    let r_cell = cfg.altitude_km * (m as f64).powf(-cfg.r);
    let mut table = ResultTable::new(
        "gain_map",
        &[
            "p",
            "q",
            "k_users",
            "l_snapshots",
            "zf_mean",
            "stab_mean",
            "gain_mean",
            "gain_std_error",
            "gain_half_width",
            "zf_collapse_fraction",
            "stab_collapse_fraction",
            "spatial_regime",
            "stab_regime",
        ],
    );
    let mut notes = vec![format!("M = {m}, r = {}, R = {r_cell:.3} km, P = {} dBm", cfg.r, cfg.tx_power_dbm[0])];
    let mut cell = 0u64;
    for &p in &cfg.p_grid {
        for &q in &cfg.q_grid {
            let k = user_count(p, m);
            let l = snapshot_count(q, m);
            let drop = user_drop(cfg, k, r_cell);
            let purpose = cell;
            let rows = par_trials(cfg.trials, |t| {
                let users = drop.sample(&mut trial_rng(cfg.seed, purpose, t))?;
                let zf = zf_rate(&GramMatrix::structured(&users, &array, 1)?, rho, 1.0);
                let stab = zf_rate(&GramMatrix::structured(&users, &array, l)?, rho, 1.0 / l as f64);
                Ok((zf, stab))
            })?;
            cell += 1;
            let n = rows.len() as f64;
            let zf_mean = rows.iter().map(|r| r.0.sum_rate).sum::<f64>() / n;
            let stab_mean = rows.iter().map(|r| r.1.sum_rate).sum::<f64>() / n;
            let gains: Vec<f64> = rows.iter().map(|r| r.1.sum_rate - r.0.sum_rate).collect();
            let s = summarize(&gains);
            let spatial = classify_regime(&ScalingPoint::new(p, 0.0, cfg.r, cfg.array)?)?;
            let joint = classify_regime(&ScalingPoint::new(p, q, cfg.r, cfg.array)?)?;
            table.push(vec![
                p.into(),
                q.into(),
                k.into(),
                l.into(),
                zf_mean.into(),
                stab_mean.into(),
                s.mean.into(),
                s.std_error.into(),
                s.half_width.into(),
                (rows.iter().filter(|r| r.0.collapsed).count() as f64 / n).into(),
                (rows.iter().filter(|r| r.1.collapsed).count() as f64 / n).into(),
                spatial.regime.to_string().into(),
                joint.regime.to_string().into(),
            ]);
            notes.push(format!("p = {p:.2}, q = {q:.2} (K = {k}, L = {l}): gain {:.3} ± {:.3}", s.mean, s.half_width));
        }
    }
    Ok(Report {
        tables: vec![table],
        notes,
    })
}
