//! Minimum-eigenvalue machinery for crowded Vandermonde Gram matrices.
//!
//! When `n` users share one resolution cell, `λ_min` of their Gram matrix
//! decays super-exponentially in `n`. This module provides:
//!
//! * equispaced cluster generators in one (space), two (space × Doppler) and
//!   three (space² × Doppler) dimensions;
//! * closed-form upper bounds from the alternating-binomial Rayleigh test
//!   vector, and their Kronecker products for grid clusters;
//! * a closed-form lower bound for the one-dimensional equispaced cluster;
//! * [`verify_bound_chain`], which checks the rate bound chain on random
//!   drops conditioned on their maximum load.
//!
//! Factorials and binomials are evaluated in the log domain so the bounds stay
//! finite up to cluster sizes of about 50.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{users_on_line, ArrayConfig, Footprint, GainModel, UserDrop, UserState};
use crate::crowding::{Axis, BinAxis, BinGrid};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues};
use crate::precoding::{zf_rate, GramMatrix};
use crate::rng::trial_rng;

/// Relative Hermitian tolerance accepted by [`min_eigenvalue`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Negative eigenvalues down to this value are round-off and clamp to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-10;

/// Smallest eigenvalue of a Hermitian PSD matrix, clamped at zero.
pub fn min_eigenvalue(g: &GramMatrix) -> Result<f64> {
    let a = g.entries();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian(dev));
    }
    let lo = hermitian_eigenvalues(a)[0];
    if lo >= 0.0 {
        Ok(lo)
    } else if lo >= NEGATIVE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("matrix is not positive semidefinite: λ_min = {lo:e}")))
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn exact_root(n: usize, power: u32) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / power as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|s| s.pow(power) == n)
}

/// Cluster layout: how the `n` users and the per-axis resolutions are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClusterGeometry {
    /// `n` users on a line, spacing `1/(M(n-1))`.
    Line { m: usize },
    /// `√n × √n` grid over space and Doppler, spacings `1/(M(√n-1))` and `1/(L(√n-1))`.
    SpaceDoppler { m: usize, l: usize },
    /// `∛n` points per axis over `(u_x, u_y, omega)` on an `m_x × m_y` UPA.
    Volume { m_x: usize, m_y: usize, l: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterSpec {
    pub n: usize,
    pub geometry: ClusterGeometry,
    /// Corner of the cluster as `[u_x, u_y, omega]`.
    pub base_offset: [f64; 3],
}

impl ClusterSpec {
    pub fn line(n: usize, m: usize) -> Self {
        Self {
            n,
            geometry: ClusterGeometry::Line { m },
            base_offset: [0.0; 3],
        }
    }

    pub fn space_doppler(n: usize, m: usize, l: usize) -> Self {
        Self {
            n,
            geometry: ClusterGeometry::SpaceDoppler { m, l },
            base_offset: [0.0; 3],
        }
    }

    pub fn volume(n: usize, m_x: usize, m_y: usize, l: usize) -> Self {
        Self {
            n,
            geometry: ClusterGeometry::Volume { m_x, m_y, l },
            base_offset: [0.0; 3],
        }
    }

    pub fn dims(&self) -> usize {
        match self.geometry {
            ClusterGeometry::Line { .. } => 1,
            ClusterGeometry::SpaceDoppler { .. } => 2,
            ClusterGeometry::Volume { .. } => 3,
        }
    }

    /// Points per axis: `n`, `√n` or `∛n`.
    pub fn side(&self) -> Result<usize> {
        let side = match self.dims() {
            1 => Some(self.n),
            2 => exact_root(self.n, 2),
            _ => exact_root(self.n, 3),
        };
        match side {
            Some(s) if s >= 2 => Ok(s),
            Some(_) => Err(Error::InvalidDimension(format!("cluster needs at least 2 points per axis, got n = {}", self.n))),
            None => Err(Error::InvalidDimension(format!(
                "a {}-dimensional cluster needs a perfect {} user count, got {}",
                self.dims(),
                if self.dims() == 2 { "square" } else { "cube" },
                self.n
            ))),
        }
    }

    /// Array and snapshot count on which the cluster Gram is evaluated.
    pub fn array(&self) -> Result<(ArrayConfig, usize)> {
        match self.geometry {
            ClusterGeometry::Line { m } => Ok((ArrayConfig::ula(m)?, 1)),
            ClusterGeometry::SpaceDoppler { m, l } => Ok((ArrayConfig::ula(m)?, l)),
            ClusterGeometry::Volume { m_x, m_y, l } => Ok((ArrayConfig::upa(m_x, m_y)?, l)),
        }
    }
}

/// Unit-gain users on the equispaced grid of `spec`. Users are ordered with
/// the Doppler axis outermost and `u_x` innermost, so the cluster Gram is the
/// Kronecker product `G_omega ⊗ (G_y ⊗) G_x`.
pub fn cluster_users(spec: &ClusterSpec) -> Result<Vec<UserState>> {
    let s = spec.side()?;
    let step = |res: usize| 1.0 / (res as f64 * (s - 1) as f64);
    let [bx, by, bw] = spec.base_offset;
    let users = match spec.geometry {
        ClusterGeometry::Line { m } => (0..s).map(|i| UserState::at(bx + i as f64 * step(m), by, bw)).collect(),
        ClusterGeometry::SpaceDoppler { m, l } => {
            let mut v = Vec::with_capacity(s * s);
            for j in 0..s {
                for i in 0..s {
                    v.push(UserState::at(bx + i as f64 * step(m), by, bw + j as f64 * step(l)));
                }
            }
            v
        }
        ClusterGeometry::Volume { m_x, m_y, l } => {
            let mut v = Vec::with_capacity(s * s * s);
            for k in 0..s {
                for j in 0..s {
                    for i in 0..s {
                        v.push(UserState::at(
                            bx + i as f64 * step(m_x),
                            by + j as f64 * step(m_y),
                            bw + k as f64 * step(l),
                        ));
                    }
                }
            }
            v
        }
    };
    Ok(users)
}

/// Gram matrix of the equispaced cluster.
pub fn cluster_gram(spec: &ClusterSpec) -> Result<GramMatrix> {
    let users = cluster_users(spec)?;
    let (array, l) = spec.array()?;
    GramMatrix::structured(&users, &array, l)
}

/// `ln C(n)` with `C(n) = 1 / ((2n-1) binom(2n-2, n-1))`.
fn ln_c_factor(n: usize) -> f64 {
    -((2 * n - 1) as f64).ln() - ln_binomial(2 * n - 2, n - 1)
}

fn ln_single_cluster_bound(n: usize) -> f64 {
    ln_c_factor(n) + (2 * n - 2) as f64 * (2.0 * PI / (n - 1) as f64).ln()
}

/// Upper bound `C(n) (2π/(n-1))^{2n-2}` on `λ_min` of an equispaced
/// one-dimensional cluster of `n` users.
pub fn single_cluster_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("cluster bound needs n >= 2, got {n}")));
    }
    Ok(ln_single_cluster_bound(n).exp())
}

/// `C(√n)² (2π/(√n-1))^{4√n-4}` for a `√n × √n` space-Doppler grid.
pub fn grid_cluster_bound(n: usize) -> Result<f64> {
    let s = ClusterSpec::space_doppler(n, 1, 1).side()?;
    Ok((2.0 * ln_single_cluster_bound(s)).exp())
}

/// `C(m)³ (2π/(m-1))^{6m-6}` with `m = ∛n`, the triple Kronecker extension
/// for a space² × Doppler cluster.
pub fn volume_cluster_bound(n: usize) -> Result<f64> {
    let s = ClusterSpec::volume(n, 1, 1, 1).side()?;
    Ok((3.0 * ln_single_cluster_bound(s)).exp())
}

/// Eigenvalue surrogate `((n-1)/π)^{-2(n-1)}`, which dominates
/// [`single_cluster_bound`] because `C(n) <= 4^{-(n-1)}`.
pub fn surrogate_eigenvalue(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("surrogate needs n >= 2, got {n}")));
    }
    let k = (n - 1) as f64;
    Ok((-2.0 * k * (k / PI).ln()).exp())
}

/// Lower bound `C_n (1/(n-1))^{2(n-1)}` on `λ_min` of the equispaced
/// one-dimensional cluster on an `m`-element array, with
/// `C_n = M/(M+1) ((n-1)!)^4 / (B_n² (n/π)^{2n-2} (2n-2)!)` and
/// `B_n = (20√2/19) (1 - π²/(3n²))^{-(n-1)/2} (M/n)^{n-1} ⌊M/n⌋^{-(n-1)}`.
pub fn cluster_lower_bound(n: usize, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("lower bound needs n >= 2, got {n}")));
    }
    if m < n {
        return Err(Error::Domain(format!("lower bound needs m >= n, got m = {m}, n = {n}")));
    }
    let (nf, mf, k) = (n as f64, m as f64, (n - 1) as f64);
    let ln_b = (20.0 * 2f64.sqrt() / 19.0).ln() - k / 2.0 * (1.0 - PI * PI / (3.0 * nf * nf)).ln()
        + k * ((mf / nf).ln() - ((m / n) as f64).ln());
    let ln_c = (mf / (mf + 1.0)).ln() + 4.0 * ln_factorial(n - 1)
        - 2.0 * ln_b
        - 2.0 * k * (nf / PI).ln()
        - ln_factorial(2 * n - 2);
    Ok((ln_c - 2.0 * k * k.ln()).exp())
}

/// Alternating binomial test vector `c_i = (-1)^i binom(n-1, i)`.
pub fn rayleigh_test_vector(n: usize) -> Result<Vec<i64>> {
    if n < 2 {
        return Err(Error::Domain(format!("test vector needs n >= 2, got {n}")));
    }
    let mut out = Vec::with_capacity(n);
    let mut c: i64 = 1;
    for i in 0..n {
        out.push(if i % 2 == 0 { c } else { -c });
        if i + 1 < n {
            c = c
                .checked_mul((n - 1 - i) as i64)
                .map(|v| v / (i + 1) as i64)
                .ok_or_else(|| Error::Domain(format!("binomial coefficients overflow for n = {n}")))?;
        }
    }
    Ok(out)
}

/// Exact `||c||² = binom(2n-2, n-1)` for the test vector.
pub fn test_vector_norm_sq(n: usize) -> Result<u128> {
    rayleigh_test_vector(n)?
        .iter()
        .try_fold(0u128, |acc, &c| acc.checked_add((c as i128 * c as i128) as u128))
        .ok_or_else(|| Error::Domain(format!("norm overflows for n = {n}")))
}

/// Rayleigh quotient of `g` at the binomial test vector (Kronecker-extended
/// for grid clusters).
pub fn cluster_rayleigh_quotient(spec: &ClusterSpec, g: &GramMatrix) -> Result<f64> {
    let s = spec.side()?;
    let base: Vec<f64> = rayleigh_test_vector(s)?.into_iter().map(|c| c as f64).collect();
    let mut c = base.clone();
    for _ in 1..spec.dims() {
        c = c.iter().flat_map(|&outer| base.iter().map(move |&inner| outer * inner)).collect();
    }
    crate::linalg::rayleigh_quotient(g.entries(), &c)
}

/// Numeric eigenvalue against its bounds for one equispaced cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub lambda_min_numeric: f64,
    pub upper_bound: f64,
    pub lower_bound: Option<f64>,
    pub rayleigh_value: Option<f64>,
}

impl BoundReport {
    /// `lower <= λ_min <= rayleigh` and `λ_min <= upper`, each with a
    /// relative slack `rel_tol`.
    pub fn is_ordered(&self, rel_tol: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + rel_tol * b.abs().max(a.abs());
        let lam = self.lambda_min_numeric;
        self.lower_bound.is_none_or(|lo| le(lo, lam))
            && self.rayleigh_value.is_none_or(|rq| le(lam, rq))
            && le(lam, self.upper_bound)
            && self.rayleigh_value.is_none_or(|rq| le(rq, self.upper_bound))
    }
}

pub fn bound_report(spec: &ClusterSpec) -> Result<BoundReport> {
    let g = cluster_gram(spec)?;
    let lambda = min_eigenvalue(&g)?;
    let rayleigh = cluster_rayleigh_quotient(spec, &g)?;
    let (upper, lower) = match spec.geometry {
        ClusterGeometry::Line { m } => (single_cluster_bound(spec.n)?, Some(cluster_lower_bound(spec.n, m)?)),
        ClusterGeometry::SpaceDoppler { .. } => (grid_cluster_bound(spec.n)?, None),
        ClusterGeometry::Volume { .. } => (volume_cluster_bound(spec.n)?, None),
    };
    Ok(BoundReport {
        n: spec.n,
        lambda_min_numeric: lambda,
        upper_bound: upper,
        lower_bound: lower,
        rayleigh_value: Some(rayleigh),
    })
}

/// Geometry and link parameters shared by every trial of a bound-chain run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSetup {
    /// ULA size `M`.
    pub m: usize,
    /// Users per drop `K`.
    pub k: usize,
    /// Resolution bins spanned by the user support (width `bins / M`).
    pub bins: usize,
    /// Linear transmit SNR `P / σ²`.
    pub rho: f64,
    pub altitude_km: f64,
    pub gain: GainModel,
}

/// Rejection cap per accepted drop.
pub const MAX_REJECTION_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainTrial {
    /// Instantaneous ZF sum rate.
    pub rate: f64,
    /// `K log2(1 + ρ M λ_min(G))`.
    pub full_gram_bound: f64,
    /// `K log2(1 + ρ M λ_min(G_S))` on the most-loaded cell.
    pub submatrix_bound: f64,
    pub collapsed: bool,
    /// Drops drawn before one with maximum load `n` was accepted.
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundChain {
    pub n: usize,
    pub trials: Vec<ChainTrial>,
    pub mean_rate: f64,
    pub mean_full_gram_bound: f64,
    pub mean_submatrix_bound: f64,
    /// `K log2(1 + ρ_eff M λ_min(G'_S))` with `G'_S` the equispaced cluster.
    pub equispaced_bound: f64,
    /// Same with `λ_min` replaced by [`single_cluster_bound`].
    pub cluster_bound: f64,
    /// Same with `λ_min` replaced by [`surrogate_eigenvalue`].
    pub surrogate_bound: f64,
    /// Rate at the eigenvalue lower bound, for reference.
    pub lower_bound_rate: f64,
    /// `ρ |β_nadir|²`: the largest per-user SNR any drop can reach.
    pub effective_rho: f64,
}

impl ChainSetup {
    fn validate(&self, n: usize) -> Result<()> {
        if self.m == 0 || self.bins == 0 || self.bins > self.m {
            return Err(Error::Config(format!("need 1 <= bins <= M, got bins = {}, M = {}", self.bins, self.m)));
        }
        if self.k > self.m {
            return Err(Error::Config(format!("need K <= M, got K = {}, M = {}", self.k, self.m)));
        }
        if n < 2 || n > self.k {
            return Err(Error::Config(format!("max load n must lie in 2..=K, got n = {n}, K = {}", self.k)));
        }
        if n * self.bins < self.k {
            return Err(Error::Config(format!(
                "max load {n} is impossible: {} users over {} bins force a load of at least {}",
                self.k,
                self.bins,
                self.k.div_ceil(self.bins)
            )));
        }
        Ok(())
    }

    fn drop(&self) -> UserDrop {
        UserDrop {
            users: self.k,
            r_cell_km: self.altitude_km * self.bins as f64 / self.m as f64,
            altitude_km: self.altitude_km,
            footprint: Footprint::Line,
            gain: self.gain,
        }
    }

    fn grid(&self) -> Result<BinGrid> {
        BinGrid::new(vec![BinAxis::centered(Axis::Ux, self.bins, 1.0 / self.m as f64)])
    }

    fn rate_at(&self, rho: f64, lambda: f64) -> f64 {
        self.k as f64 * (1.0 + rho * self.m as f64 * lambda.max(0.0)).log2()
    }
}

fn conditioned_trial<R: Rng>(setup: &ChainSetup, n: usize, rng: &mut R) -> Result<ChainTrial> {
    let drop = setup.drop();
    let grid = setup.grid()?;
    let r = drop.r_cell_km;
    let to_u = 1.0 / (2.0 * setup.altitude_km);
    let mut xs = vec![0.0; setup.k];
    for attempt in 1..=MAX_REJECTION_ATTEMPTS {
        for x in xs.iter_mut() {
            *x = rng.random_range(-r..r);
        }
        let (counts, _) = grid.loads(xs.iter().map(|&x| [x * to_u, 0.0, 0.0]));
        if counts.iter().copied().max() != Some(n) {
            continue;
        }
        let users = users_on_line(&drop, &xs, rng)?;
        let array = ArrayConfig::ula(setup.m)?;
        let g = GramMatrix::structured(&users, &array, 1)?;
        let report = zf_rate(&g, setup.rho, 1.0);
        let lambda_full = min_eigenvalue(&g)?;
        let cluster = grid.fullest_bin_members(&users);
        let lambda_sub = min_eigenvalue(&g.submatrix(&cluster))?;
        return Ok(ChainTrial {
            rate: report.sum_rate,
            full_gram_bound: setup.rate_at(setup.rho, lambda_full),
            submatrix_bound: setup.rate_at(setup.rho, lambda_sub),
            collapsed: report.collapsed,
            attempts: attempt,
        });
    }
    Err(Error::Config(format!(
        "no drop with maximum load {n} in {MAX_REJECTION_ATTEMPTS} attempts; choose a different n"
    )))
}

/// Monte Carlo check of the rate bound chain at maximum load `n`.
///
/// Drops of `K` users over `bins` resolution cells are rejection-sampled until
/// the most loaded cell holds exactly `n` users. Each accepted drop yields the
/// ZF rate and the bounds from `λ_min(G)` and from the most-loaded principal
/// submatrix; the equispaced surrogates use the nadir gain, which no user can
/// exceed.
pub fn verify_bound_chain(setup: &ChainSetup, n: usize, trials: usize, seed: u64) -> Result<BoundChain> {
    setup.validate(n)?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let rows: Vec<ChainTrial> = (0..trials)
        .into_par_iter()
        .map(|t| conditioned_trial(setup, n, &mut trial_rng(seed, n as u64, t as u64)))
        .collect::<Result<_>>()?;
    let mean = |f: fn(&ChainTrial) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let beta_nadir = setup.gain.gain(setup.altitude_km)?;
    let rho_eff = setup.rho * beta_nadir * beta_nadir;
    let equispaced = min_eigenvalue(&cluster_gram(&ClusterSpec::line(n, setup.m))?)?;
    Ok(BoundChain {
        n,
        mean_rate: mean(|t| t.rate),
        mean_full_gram_bound: mean(|t| t.full_gram_bound),
        mean_submatrix_bound: mean(|t| t.submatrix_bound),
        equispaced_bound: setup.rate_at(rho_eff, equispaced),
        cluster_bound: setup.rate_at(rho_eff, single_cluster_bound(n)?),
        surrogate_bound: setup.rate_at(rho_eff, surrogate_eigenvalue(n)?),
        lower_bound_rate: setup.rate_at(rho_eff, cluster_lower_bound(n, setup.m)?),
        effective_rho: rho_eff,
        trials: rows,
    })
}
