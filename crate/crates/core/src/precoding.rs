//! Zero-forcing and space-time (STAB) zero-forcing rates, closed-form two-user
//! expressions, and the MRT / TDMA baselines.
//!
//! All rate functions operate on a [`GramMatrix`]. The un-normalized inner
//! products `H^H H` are recovered as `entries * normalization`, so every
//! baseline can be evaluated without materializing the channel itself.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{dirichlet_inner, dirichlet_magnitude, ArrayConfig, ArrayKind, Channel, ChannelMatrix, SpaceTimeChannel, UserState};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, principal_submatrix, symmetrize, trace_of_inverse, CMatrix};

/// Relative eigenvalue floor: a Gram with `λ_min < SINGULARITY_FLOOR · λ_max`
/// is treated as singular and its ZF rate collapses to zero.
pub const SINGULARITY_FLOOR: f64 = 1e-14;

/// `H^H H / n` for a spatial (`n = M`) or space-time (`n = ML`) channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    normalization: f64,
}

impl GramMatrix {
    /// Wraps an existing matrix. Only squareness is checked here; Hermitian
    /// structure is checked by the consumers that need it.
    pub fn from_entries(entries: CMatrix, normalization: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidDimension(format!(
                "Gram matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if !(normalization > 0.0) {
            return Err(Error::Domain(format!("normalization must be positive, got {normalization}")));
        }
        Ok(Self { entries, normalization })
    }

    /// Closed-form Gram of users on `array` over `snapshots` slow-time samples,
    /// built from products of Dirichlet kernels instead of the `ML × K`
    /// channel. `snapshots = 1` gives the spatial Gram.
    pub fn structured(users: &[UserState], array: &ArrayConfig, snapshots: usize) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::InvalidDimension("Gram needs at least one user".into()));
        }
        if snapshots == 0 {
            return Err(Error::InvalidDimension("snapshot count must be >= 1".into()));
        }
        let k = users.len();
        let mut entries = CMatrix::zeros(k, k);
        for i in 0..k {
            let ui = &users[i];
            entries[(i, i)] = Complex64::new(ui.beta.norm_sqr(), 0.0);
            for j in (i + 1)..k {
                let uj = &users[j];
                let mut z = ui.beta.conj() * uj.beta * dirichlet_inner(uj.u_x - ui.u_x, array.m_x);
                if array.kind == ArrayKind::Upa {
                    z *= dirichlet_inner(uj.u_y - ui.u_y, array.m_y);
                }
                if snapshots > 1 {
                    z *= dirichlet_inner(uj.omega - ui.omega, snapshots);
                }
                entries[(i, j)] = z;
                entries[(j, i)] = z.conj();
            }
        }
        Ok(Self {
            entries,
            normalization: (array.elements() * snapshots) as f64,
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Number of users `K`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Un-normalized inner products `h_i^H h_j`.
    pub fn inner_products(&self) -> CMatrix {
        &self.entries * Complex64::new(self.normalization, 0.0)
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self {
            entries: principal_submatrix(&self.entries, idx),
            normalization: self.normalization,
        }
    }
}

/// `H^H H / n`, symmetrized to suppress round-off.
pub fn gram<C: Channel + ?Sized>(channel: &C) -> GramMatrix {
    let h = channel.entries();
    let n = channel.normalization();
    let mut entries = h.adjoint() * h / Complex64::new(n, 0.0);
    symmetrize(&mut entries);
    GramMatrix { entries, normalization: n }
}

/// Checks the relative eigenvalue floor, returning `(λ_min, λ_max)`.
fn check_invertible(g: &GramMatrix) -> Result<(f64, f64)> {
    let ev = g.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if !(hi > 0.0) || lo < SINGULARITY_FLOOR * hi {
        return Err(Error::Singular {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok((lo, hi))
}

/// Common ZF SINR `ρ m_eff / tr(G^{-1})`.
pub fn zf_sinr(g: &GramMatrix, rho: f64, m_eff: f64) -> Result<f64> {
    let (lo, hi) = check_invertible(g)?;
    let tr = trace_of_inverse(g.entries()).ok_or(Error::Singular {
        min_eigenvalue: lo,
        max_eigenvalue: hi,
    })?;
    Ok(rho * m_eff / tr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// Common per-user SINR for ZF, unused (0) for the baselines.
    pub sinr: f64,
    /// bits/s/Hz.
    pub sum_rate: f64,
    pub per_user_rates: Option<Vec<f64>>,
    pub prelog: f64,
    /// Set when the Gram failed the singularity floor and the rate was zeroed.
    pub collapsed: bool,
}

impl RateReport {
    fn collapsed(prelog: f64) -> Self {
        Self {
            sinr: 0.0,
            sum_rate: 0.0,
            per_user_rates: None,
            prelog,
            collapsed: true,
        }
    }
}

/// ZF sum rate `prelog · K · log2(1 + ρ n / tr(G^{-1}))` with `n` the Gram
/// normalization. Singular Grams yield a flagged zero rate.
pub fn zf_rate(g: &GramMatrix, rho: f64, prelog: f64) -> RateReport {
    match zf_sinr(g, rho, g.normalization()) {
        Ok(sinr) => RateReport {
            sinr,
            sum_rate: prelog * g.dim() as f64 * (1.0 + sinr).log2(),
            per_user_rates: None,
            prelog,
            collapsed: false,
        },
        Err(_) => RateReport::collapsed(prelog),
    }
}

pub fn zf_sum_rate(channel: &ChannelMatrix, rho: f64) -> RateReport {
    zf_rate(&gram(channel), rho, 1.0)
}

/// STAB rate: ZF on the stacked channel with the `1/L` pre-log.
pub fn stab_sum_rate(channel: &SpaceTimeChannel, rho: f64) -> RateReport {
    zf_rate(&gram(channel), rho, channel.prelog())
}

/// Two-user correlation `|g_x| |g_y|` from the Dirichlet kernels.
pub fn two_user_correlation(delta_ux: f64, delta_uy: f64, m_x: usize, m_y: usize) -> f64 {
    dirichlet_magnitude(delta_ux, m_x) * dirichlet_magnitude(delta_uy, m_y)
}

/// Two-user ZF sum rate `2 log2(1 + ρ m (1 - |g|²) / 2)` for `|g| ∈ [0, 1]`.
pub fn two_user_rate(g_mag: f64, rho: f64, m: f64) -> f64 {
    2.0 * (1.0 + rho * m / 2.0 * (1.0 - g_mag * g_mag)).log2()
}

/// Maximum ratio transmission with `F = H / ||H||_F`.
pub fn mrt_rate(g: &GramMatrix, rho: f64) -> RateReport {
    let raw = g.inner_products();
    let k = g.dim();
    let frob_sq: f64 = (0..k).map(|i| raw[(i, i)].re).sum();
    let per_user: Vec<f64> = (0..k)
        .map(|i| {
            let signal = raw[(i, i)].norm_sqr() / frob_sq;
            let interference: f64 = (0..k)
                .filter(|&j| j != i)
                .map(|j| raw[(i, j)].norm_sqr() / frob_sq)
                .sum();
            (1.0 + rho * signal / (rho * interference + 1.0)).log2()
        })
        .collect();
    RateReport {
        sinr: 0.0,
        sum_rate: per_user.iter().sum(),
        per_user_rates: Some(per_user),
        prelog: 1.0,
        collapsed: false,
    }
}

/// Round-robin TDMA: each user alone at full power for a `1/K` share.
pub fn tdma_rate(g: &GramMatrix, rho: f64) -> RateReport {
    let raw = g.inner_products();
    let k = g.dim();
    let per_user: Vec<f64> = (0..k)
        .map(|i| (1.0 + rho * raw[(i, i)].re).log2() / k as f64)
        .collect();
    RateReport {
        sinr: 0.0,
        sum_rate: per_user.iter().sum(),
        per_user_rates: Some(per_user),
        prelog: 1.0 / k as f64,
        collapsed: false,
    }
}

pub fn mrt_sum_rate(channel: &ChannelMatrix, rho: f64) -> RateReport {
    mrt_rate(&gram(channel), rho)
}

pub fn tdma_sum_rate(channel: &ChannelMatrix, rho: f64) -> RateReport {
    tdma_rate(&gram(channel), rho)
}
