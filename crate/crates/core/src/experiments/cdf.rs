//! Distribution of the ZF and STAB sum rates over random drops, per cell size.

use crate::error::Result;
use crate::experiments::config::{Driver, ExperimentConfig};
use crate::experiments::output::ResultTable;
use crate::experiments::stats::{ecdf, summarize};
use crate::experiments::{par_trials, user_drop, Report};
use crate::precoding::{zf_rate, GramMatrix};
use crate::rng::trial_rng;

struct Trial {
    zf: Vec<(f64, bool)>,
    stab: Vec<(f64, bool)>,
}

/// Per-trial ZF and STAB rates for every `(R, P)` pair, their summaries and
/// empirical CDFs. The same drops are reused across transmit powers.
pub fn run_cdf(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(Driver::Cdf)?;
    let array = cfg.array_config()?;
    let l = cfg.l_snapshots;
    let rhos: Vec<f64> = cfg.tx_power_dbm.iter().map(|&p| cfg.rho(p)).collect();

    let mut trials_tab = ResultTable::new(
        "cdf_trials",
        &["r_cell_km", "tx_power_dbm", "trial", "zf_rate", "stab_rate", "zf_collapsed", "stab_collapsed"],
    );
    let mut summary = ResultTable::new(
        "cdf_summary",
        &["r_cell_km", "tx_power_dbm", "scheme", "mean_rate", "std_error", "half_width", "collapse_fraction"],
    );
    let mut curve = ResultTable::new("cdf_curve", &["r_cell_km", "tx_power_dbm", "scheme", "rate", "probability"]);
    let mut notes = Vec::new();

    for (ri, &r_cell) in cfg.r_cell_km.iter().enumerate() {
        let drop = user_drop(cfg, cfg.k_users, r_cell);
        let rows = par_trials(cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, ri as u64, t);
            let users = drop.sample(&mut rng)?;
            let gs = GramMatrix::structured(&users, &array, 1)?;
            let gst = GramMatrix::structured(&users, &array, l)?;
            let zf = rhos.iter().map(|&rho| zf_rate(&gs, rho, 1.0)).map(|r| (r.sum_rate, r.collapsed)).collect();
            let stab = rhos
                .iter()
                .map(|&rho| zf_rate(&gst, rho, 1.0 / l as f64))
                .map(|r| (r.sum_rate, r.collapsed))
                .collect();
            Ok(Trial { zf, stab })
        })?;
        for (pi, &power) in cfg.tx_power_dbm.iter().enumerate() {
            for (t, row) in rows.iter().enumerate() {
                trials_tab.push(vec![
                    r_cell.into(),
                    power.into(),
                    t.into(),
                    row.zf[pi].0.into(),
                    row.stab[pi].0.into(),
                    row.zf[pi].1.into(),
                    row.stab[pi].1.into(),
                ]);
            }
            for (scheme, pick) in [("zf", 0usize), ("stab", 1)] {
                let rates: Vec<(f64, bool)> = rows.iter().map(|r| if pick == 0 { r.zf[pi] } else { r.stab[pi] }).collect();
                let values: Vec<f64> = rates.iter().map(|r| r.0).collect();
                let s = summarize(&values);
                let collapse = rates.iter().filter(|r| r.1).count() as f64 / rates.len() as f64;
                summary.push(vec![
                    r_cell.into(),
                    power.into(),
                    scheme.into(),
                    s.mean.into(),
                    s.std_error.into(),
                    s.half_width.into(),
                    collapse.into(),
                ]);
                for (x, f) in ecdf(&values) {
                    curve.push(vec![r_cell.into(), power.into(), scheme.into(), x.into(), f.into()]);
                }
                notes.push(format!(
                    "R = {r_cell} km, P = {power} dBm, {scheme}: mean {:.3} ± {:.3} bit/s/Hz, collapse fraction {collapse:.3}",
                    s.mean, s.half_width
                ));
            }
        }
    }
    Ok(Report {
        tables: vec![trials_tab, summary, curve],
        notes,
    })
}
