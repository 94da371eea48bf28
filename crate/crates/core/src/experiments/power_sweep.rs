//! Scheduled sum rates against transmit power: STAB with space-Doppler
//! selection versus spatial ZF with semi-orthogonal selection, MRT and TDMA.
//!
//! Each scheme is scheduled on its own terms: SDS picks the STAB users, SUS
//! picks the ZF and MRT users, and TDMA serves the `K` strongest users. Both
//! selection thresholds are grid-tuned per transmit power on drops that are
//! independent of the evaluation drops.

use rand::Rng;

use crate::error::Result;
use crate::experiments::config::{Driver, ExperimentConfig};
use crate::experiments::output::ResultTable;
use crate::experiments::stats::{paired_greater, summarize};
use crate::experiments::{par_trials, user_drop, Report};
use crate::precoding::{mrt_rate, tdma_rate, zf_rate, GramMatrix, RateReport};
use crate::rng::trial_rng;
use crate::scheduler::{random_select, select_from_gram, strongest_select, tune_thresholds, TuningResult};

/// RNG purpose tag of the evaluation drops.
const SWEEP_STREAM: u64 = 0x7377_6565;

/// Spatial and space-time Grams of one candidate pool.
pub struct Pool {
    pub spatial: GramMatrix,
    pub space_time: GramMatrix,
}

fn draw_pool<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<Pool> {
    let array = cfg.array_config()?;
    let users = user_drop(cfg, cfg.u_candidates, cfg.r_cell_km[0]).sample(rng)?;
    Ok(Pool {
        spatial: GramMatrix::structured(&users, &array, 1)?,
        space_time: GramMatrix::structured(&users, &array, cfg.l_snapshots)?,
    })
}

/// STAB rate of the SDS selection at threshold `alpha`.
pub fn sds_stab_rate(pool: &Pool, k: usize, alpha: f64, rho: f64) -> Result<RateReport> {
    let sel = select_from_gram(&pool.space_time, k, alpha)?;
    let l = pool.space_time.normalization() / pool.spatial.normalization();
    Ok(zf_rate(&pool.space_time.submatrix(&sel), rho, 1.0 / l))
}

/// Spatial ZF rate of the SUS selection at threshold `alpha`.
pub fn sus_zf_rate(pool: &Pool, k: usize, alpha: f64, rho: f64) -> Result<RateReport> {
    let sel = select_from_gram(&pool.spatial, k, alpha)?;
    Ok(zf_rate(&pool.spatial.submatrix(&sel), rho, 1.0))
}

/// Tuned `(SDS, SUS)` thresholds per transmit power.
pub struct Tuning {
    pub sds: Vec<TuningResult>,
    pub sus: Vec<TuningResult>,
}

pub fn tune(cfg: &ExperimentConfig) -> Result<Tuning> {
    let rhos: Vec<f64> = cfg.tx_power_dbm.iter().map(|&p| cfg.rho(p)).collect();
    let k = cfg.k_users;
    let results = tune_thresholds(
        &cfg.alpha_grid,
        cfg.tuning_trials,
        cfg.seed,
        |rng| draw_pool(cfg, rng),
        |pool, alpha| {
            let l = cfg.l_snapshots as f64;
            let sds = select_from_gram(&pool.space_time, k, alpha)?;
            let sus = select_from_gram(&pool.spatial, k, alpha)?;
            let gst = pool.space_time.submatrix(&sds);
            let gs = pool.spatial.submatrix(&sus);
            let mut scores: Vec<f64> = rhos.iter().map(|&rho| zf_rate(&gst, rho, 1.0 / l).sum_rate).collect();
            scores.extend(rhos.iter().map(|&rho| zf_rate(&gs, rho, 1.0).sum_rate));
            Ok(scores)
        },
    )?;
    let (sds, sus) = results.split_at(rhos.len());
    Ok(Tuning {
        sds: sds.to_vec(),
        sus: sus.to_vec(),
    })
}

fn tuning_table(cfg: &ExperimentConfig, tuning: &Tuning) -> ResultTable {
    let mut t = ResultTable::new("alpha_tuning", &["tx_power_dbm", "scheme", "alpha", "mean_rate", "best"]);
    for (pi, &power) in cfg.tx_power_dbm.iter().enumerate() {
        for (scheme, res) in [("stab_sds", &tuning.sds[pi]), ("zf_sus", &tuning.sus[pi])] {
            for &(alpha, mean) in &res.means {
                t.push(vec![power.into(), scheme.into(), alpha.into(), mean.into(), (alpha == res.best_alpha).into()]);
            }
        }
    }
    t
}

/// Grid search for the SDS and SUS thresholds at every configured power.
pub fn run_tune_alpha(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(Driver::TuneAlpha)?;
    let tuning = tune(cfg)?;
    let notes = cfg
        .tx_power_dbm
        .iter()
        .enumerate()
        .map(|(pi, p)| format!("P = {p} dBm: SDS alpha {}, SUS alpha {}", tuning.sds[pi].best_alpha, tuning.sus[pi].best_alpha))
        .collect();
    Ok(Report {
        tables: vec![tuning_table(cfg, &tuning)],
        notes,
    })
}

/// Scheme names in table order.
pub const SCHEMES: [&str; 5] = ["stab_sds", "zf_sus", "mrt_sus", "tdma", "stab_random"];

/// Per-power rates of every scheme on one drop.
struct TrialRates {
    /// `rates[power][scheme]`.
    rates: Vec<[RateReport; 5]>,
    selected: Vec<[usize; 5]>,
}

pub fn run_power_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(Driver::PowerSweep)?;
    let tuning = tune(cfg)?;
    let k = cfg.k_users;
    let l = cfg.l_snapshots as f64;
    let rows = par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, SWEEP_STREAM, t);
        let pool = draw_pool(cfg, &mut rng)?;
        let random = random_select(cfg.u_candidates, k, &mut rng);
        let strongest = strongest_select(&pool.spatial, k);
        let mut out = TrialRates {
            rates: Vec::new(),
            selected: Vec::new(),
        };
        for (pi, &power) in cfg.tx_power_dbm.iter().enumerate() {
            let rho = cfg.rho(power);
            let sds = select_from_gram(&pool.space_time, k, tuning.sds[pi].best_alpha)?;
            let sus = select_from_gram(&pool.spatial, k, tuning.sus[pi].best_alpha)?;
            let gs_sus = pool.spatial.submatrix(&sus);
            out.rates.push([
                zf_rate(&pool.space_time.submatrix(&sds), rho, 1.0 / l),
                zf_rate(&gs_sus, rho, 1.0),
                mrt_rate(&gs_sus, rho),
                tdma_rate(&pool.spatial.submatrix(&strongest), rho),
                zf_rate(&pool.space_time.submatrix(&random), rho, 1.0 / l),
            ]);
            out.selected.push([sds.len(), sus.len(), sus.len(), strongest.len(), random.len()]);
        }
        Ok(out)
    })?;

    let mut per_trial = ResultTable::new("power_sweep_trials", &["tx_power_dbm", "trial", "scheme", "sum_rate", "collapsed", "selected"]);
    let mut summary = ResultTable::new(
        "power_sweep",
        &["tx_power_dbm", "scheme", "alpha", "mean_rate", "std_error", "half_width", "collapse_fraction", "mean_selected"],
    );
    let mut tests = ResultTable::new(
        "power_sweep_tests",
        &["tx_power_dbm", "baseline", "mean_difference", "std_error", "z", "significant"],
    );
    let mut notes = Vec::new();
    for (pi, &power) in cfg.tx_power_dbm.iter().enumerate() {
        let series: Vec<Vec<f64>> = (0..SCHEMES.len())
            .map(|s| rows.iter().map(|r| r.rates[pi][s].sum_rate).collect())
            .collect();
        for (t, r) in rows.iter().enumerate() {
            for (s, name) in SCHEMES.iter().enumerate() {
                per_trial.push(vec![
                    power.into(),
                    t.into(),
                    (*name).into(),
                    r.rates[pi][s].sum_rate.into(),
                    r.rates[pi][s].collapsed.into(),
                    r.selected[pi][s].into(),
                ]);
            }
        }
        for (s, name) in SCHEMES.iter().enumerate() {
            let stats = summarize(&series[s]);
            let alpha = match s {
                0 => tuning.sds[pi].best_alpha,
                1 | 2 => tuning.sus[pi].best_alpha,
                _ => f64::NAN,
            };
            let n = rows.len() as f64;
            summary.push(vec![
                power.into(),
                (*name).into(),
                alpha.into(),
                stats.mean.into(),
                stats.std_error.into(),
                stats.half_width.into(),
                (rows.iter().filter(|r| r.rates[pi][s].collapsed).count() as f64 / n).into(),
                (rows.iter().map(|r| r.selected[pi][s] as f64).sum::<f64>() / n).into(),
            ]);
        }
        let mut line = format!("P = {power} dBm: stab_sds {:.3}", summarize(&series[0]).mean);
        for (s, name) in SCHEMES.iter().enumerate().skip(1) {
            let test = paired_greater(&series[0], &series[s]);
            tests.push(vec![
                power.into(),
                (*name).into(),
                test.mean_difference.into(),
                test.std_error.into(),
                test.z.into(),
                test.significant.into(),
            ]);
            line.push_str(&format!(", {name} {:.3}", summarize(&series[s]).mean));
        }
        notes.push(line);
    }
    Ok(Report {
        tables: vec![summary, tests, tuning_table(cfg, &tuning), per_trial],
        notes,
    })
}
