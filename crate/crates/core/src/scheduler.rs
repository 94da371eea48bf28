//! Greedy semi-orthogonal user selection in space (SUS) and space-Doppler (SDS).
//!
//! Each round picks the candidate whose channel has the most energy left after
//! projection onto the orthogonal complement of the users already chosen, then
//! drops every remaining candidate whose normalized correlation with the newly
//! chosen user reaches the threshold `α`.
//!
//! The loop runs entirely on the Gram matrix `HᴴH`: projections of candidate
//! `k` onto the orthonormal basis are updated through
//! `q_iᴴ h_k = (h_πᴴ h_k - Σ_j conj(q_jᴴ h_π) q_jᴴ h_k) / √e_π`,
//! which costs `O(U)` per round instead of `O(U · ML)`. The orthonormal basis
//! is recovered at the end as `Q = H_S T` from the triangular coefficients `T`.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{Channel, ChannelMatrix, SpaceTimeChannel};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::precoding::{GramMatrix, SINGULARITY_FLOOR};
use crate::rng::trial_rng;

/// Outcome of a greedy selection pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected users in the order they were picked.
    pub selected: Vec<usize>,
    /// Orthonormal columns spanning the selected channels, one per pick.
    pub basis: CMatrix,
    pub threshold: f64,
}

fn check_threshold(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("selection threshold must lie in (0, 1], got {alpha}")))
    }
}

/// Selection order plus the coefficients `T` with `Q = H_S T`.
struct GreedyPass {
    selected: Vec<usize>,
    coefficients: CMatrix,
}

fn greedy_pass(g: &CMatrix, k_target: usize, alpha: f64) -> GreedyPass {
    let u = g.nrows();
    let diag: Vec<f64> = (0..u).map(|k| g[(k, k)].re).collect();
    let mut candidates: Vec<usize> = (0..u).filter(|&k| diag[k] > 0.0).collect();
    let mut residual = diag.clone();
    let mut proj: Vec<Vec<Complex64>> = vec![Vec::new(); u];
    let mut selected = Vec::new();
    let mut columns: Vec<Vec<Complex64>> = Vec::new();

    while selected.len() < k_target && !candidates.is_empty() {
        let mut pi = candidates[0];
        for &k in &candidates[1..] {
            if residual[k] > residual[pi] {
                pi = k;
            }
        }
        let e = residual[pi];
        if e <= SINGULARITY_FLOOR * diag[pi] {
            break;
        }
        let scale = e.sqrt().recip();
        let i = selected.len();
        let mut t = vec![Complex64::new(0.0, 0.0); i + 1];
        t[i] = Complex64::new(1.0, 0.0);
        for (j, col) in columns.iter().enumerate() {
            let c = proj[pi][j];
            for (ts, cs) in t.iter_mut().zip(col) {
                *ts -= c * cs;
            }
        }
        for ts in t.iter_mut() {
            *ts *= scale;
        }
        columns.push(t);
        selected.push(pi);

        let pi_proj = proj[pi].clone();
        candidates.retain(|&k| k != pi);
        for &k in &candidates {
            let overlap: Complex64 = pi_proj.iter().zip(&proj[k]).map(|(a, b)| a.conj() * b).sum();
            let p = (g[(pi, k)] - overlap) * scale;
            residual[k] -= p.norm_sqr();
            proj[k].push(p);
        }
        candidates.retain(|&k| g[(k, pi)].norm() / (diag[k] * diag[pi]).sqrt() < alpha);
    }

    let n = selected.len();
    let coefficients = CMatrix::from_fn(n, n, |r, c| if r < columns[c].len() { columns[c][r] } else { Complex64::new(0.0, 0.0) });
    GreedyPass { selected, coefficients }
}

fn select_channels(entries: &CMatrix, k_target: usize, alpha: f64) -> Result<SelectionResult> {
    check_threshold(alpha)?;
    let g = entries.ad_mul(entries);
    let pass = greedy_pass(&g, k_target, alpha);
    let h_sel = entries.select_columns(&pass.selected);
    Ok(SelectionResult {
        basis: h_sel * pass.coefficients,
        selected: pass.selected,
        threshold: alpha,
    })
}

/// Space-Doppler selection on the space-time channels of all candidates.
pub fn sds_select(channels: &SpaceTimeChannel, k_target: usize, alpha: f64) -> Result<SelectionResult> {
    select_channels(channels.entries(), k_target, alpha)
}

/// Spatial-only selection on the array channels of all candidates.
pub fn sus_select(channels: &ChannelMatrix, k_target: usize, alpha: f64) -> Result<SelectionResult> {
    select_channels(channels.entries(), k_target, alpha)
}

/// The same greedy selection driven by a precomputed Gram matrix. The
/// normalization does not affect the outcome. Returns the selected indices in
/// pick order.
pub fn select_from_gram(g: &GramMatrix, k_target: usize, alpha: f64) -> Result<Vec<usize>> {
    check_threshold(alpha)?;
    Ok(greedy_pass(g.entries(), k_target, alpha).selected)
}

/// `k` distinct users drawn uniformly from `u` candidates, in ascending order.
pub fn random_select<R: Rng + ?Sized>(u: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx = sample(rng, u, k.min(u)).into_vec();
    idx.sort_unstable();
    idx
}

/// The `k` candidates with the largest channel norms (lowest index on ties),
/// in ascending index order.
pub fn strongest_select(g: &GramMatrix, k: usize) -> Vec<usize> {
    let e = g.entries();
    let mut idx: Vec<usize> = (0..g.dim()).collect();
    idx.sort_by(|&a, &b| e[(b, b)].re.total_cmp(&e[(a, a)].re).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Mean objective per threshold and the winner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningResult {
    pub best_alpha: f64,
    /// `(α, mean objective)` in ascending `α`.
    pub means: Vec<(f64, f64)>,
}

/// Grid search for the selection threshold.
///
/// Every trial draws one instance from `sample` with its own RNG stream and
/// scores all thresholds on that same instance, so differences between
/// thresholds are not blurred by drop-to-drop variation. The threshold with
/// the highest mean score wins; ties go to the smaller threshold.
pub fn tune_threshold<I, S, E>(grid: &[f64], trials: usize, seed: u64, sample: S, evaluate: E) -> Result<TuningResult>
where
    I: Send,
    S: Fn(&mut ChaCha8Rng) -> Result<I> + Sync,
    E: Fn(&I, f64) -> Result<f64> + Sync,
{
    let mut all = tune_thresholds(grid, trials, seed, sample, |inst, a| Ok(vec![evaluate(inst, a)?]))?;
    Ok(all.remove(0))
}

/// [`tune_threshold`] for several objectives scored on the same draws, e.g.
/// one per transmit power. `evaluate` must return the same number of scores
/// for every call; one [`TuningResult`] is returned per score.
pub fn tune_thresholds<I, S, E>(grid: &[f64], trials: usize, seed: u64, sample: S, evaluate: E) -> Result<Vec<TuningResult>>
where
    I: Send,
    S: Fn(&mut ChaCha8Rng) -> Result<I> + Sync,
    E: Fn(&I, f64) -> Result<Vec<f64>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::Config("threshold grid is empty".into()));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    for &a in grid {
        check_threshold(a)?;
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    // scores[trial][alpha][objective]
    let scores: Vec<Vec<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let instance = sample(&mut trial_rng(seed, TUNING_STREAM, t as u64))?;
            sorted.iter().map(|&a| evaluate(&instance, a)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let objectives = scores[0][0].len();
    if scores.iter().flatten().any(|s| s.len() != objectives) {
        return Err(Error::Numerical("tuning objective changed length between calls".into()));
    }
    Ok((0..objectives)
        .map(|o| {
            let means: Vec<(f64, f64)> = sorted
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, scores.iter().map(|row| row[i][o]).sum::<f64>() / trials as f64))
                .collect();
            let mut best = means[0];
            for &m in &means[1..] {
                if m.1 > best.1 {
                    best = m;
                }
            }
            TuningResult { best_alpha: best.0, means }
        })
        .collect())
}

/// RNG purpose tag for threshold tuning draws.
const TUNING_STREAM: u64 = 0x7475_6e65;
