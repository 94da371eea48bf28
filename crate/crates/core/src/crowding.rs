//! Balls-and-bins view of user crowding.
//!
//! Users are balls and resolution cells are bins: width `1/M` per spatial axis
//! (`1/M_x`, `1/M_y` for a UPA) and `1/L` along Doppler. The maximum load
//! `n_max` controls how badly the Gram matrix is conditioned, and the power-law
//! exponents `(p, q, r)` decide whether `n_max` stays bounded, grows like
//! `log M / log log M`, or grows polynomially.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayKind, UserState};
use crate::error::{Error, Result};

/// Tolerance for deciding that two exponents are equal (the critical line).
pub const EXPONENT_TOLERANCE: f64 = 1e-9;

/// `⌊m^e⌋`, nudged up by a relative `1e-12` so exact powers such as
/// `256^0.5` do not floor to 15.
pub fn floor_pow(m: usize, exponent: f64) -> usize {
    ((m as f64).powf(exponent) * (1.0 + 1e-12)).floor() as usize
}

/// `K = ⌊M^p⌋`.
pub fn user_count(p: f64, m: usize) -> usize {
    floor_pow(m, p).max(1)
}

/// `L = max(1, ⌊M^q⌋)`.
pub fn snapshot_count(q: f64, m: usize) -> usize {
    floor_pow(m, q).max(1)
}

/// Exponent triple with `K = M^p`, `L = M^q`, `R/H = M^{-r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub array: ArrayKind,
}

impl ScalingPoint {
    pub fn new(p: f64, q: f64, r: f64, array: ArrayKind) -> Result<Self> {
        let point = Self { p, q, r, array };
        point.validate()?;
        Ok(point)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Domain(format!("user exponent p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.q >= 0.0) {
            return Err(Error::Domain(format!("snapshot exponent q must be >= 0, got {}", self.q)));
        }
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::Domain(format!("cell exponent r must lie in [0, 1), got {}", self.r)));
        }
        if self.array == ArrayKind::Upa && self.r >= 0.5 {
            return Err(Error::Domain(format!("UPA analysis needs r < 1/2, got {}", self.r)));
        }
        Ok(())
    }

    /// Whether slow-time stacking is active (`q > 0`).
    pub fn uses_stab(&self) -> bool {
        self.q > 0.0
    }

    /// Spatial crowding threshold: `p + r - 1` (ULA) or `p + 2r - 1` (UPA).
    pub fn threshold(&self) -> f64 {
        match self.array {
            ArrayKind::Ula => self.p + self.r - 1.0,
            ArrayKind::Upa => self.p + 2.0 * self.r - 1.0,
        }
    }

    /// Exponent of the mean load `K / B`, i.e. the threshold minus `q`.
    pub fn load_exponent(&self) -> f64 {
        self.threshold() - self.q
    }
}

/// Number of resolution bins covering the user support.
pub fn bin_count(point: &ScalingPoint, m: usize) -> Result<usize> {
    point.validate()?;
    let spatial = match point.array {
        ArrayKind::Ula => floor_pow(m, 1.0 - point.r),
        ArrayKind::Upa => floor_pow(m, 1.0 - 2.0 * point.r),
    };
    let temporal = if point.uses_stab() { snapshot_count(point.q, m) } else { 1 };
    Ok(spatial.max(1) * temporal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Sparse,
    Critical,
    Dense,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Sparse => "sparse",
            Regime::Critical => "critical",
            Regime::Dense => "dense",
        };
        f.write_str(s)
    }
}

/// Regime plus the predicted upper scaling of the mean sum rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeClass {
    pub regime: Regime,
    pub stab: bool,
    /// Crowding threshold (`p + r - 1` or `p + 2r - 1`).
    pub threshold: f64,
    /// Symbolic rate scaling, e.g. `M^p log M`.
    pub rate_scaling: &'static str,
    /// Power of `M` in `rate_scaling` (log factors and `o(1)` dropped);
    /// `None` when the rate vanishes.
    pub rate_exponent: Option<f64>,
}

pub fn classify_regime(point: &ScalingPoint) -> Result<RegimeClass> {
    point.validate()?;
    let excess = point.load_exponent();
    let regime = if excess.abs() <= EXPONENT_TOLERANCE {
        Regime::Critical
    } else if excess < 0.0 {
        Regime::Sparse
    } else {
        Regime::Dense
    };
    let stab = point.uses_stab();
    let (rate_scaling, rate_exponent) = match (regime, stab, point.array) {
        (Regime::Dense, _, _) => ("→ 0", None),
        (_, true, _) => ("M^{p-q} log M", Some(point.p - point.q)),
        (Regime::Sparse, false, _) | (Regime::Critical, false, ArrayKind::Upa) => ("M^p log M", Some(point.p)),
        (Regime::Critical, false, ArrayKind::Ula) => {
            let r = point.r;
            if (r - 0.5).abs() <= EXPONENT_TOLERANCE {
                ("M^{1/2+o(1)}", Some(0.5))
            } else if r < 0.5 {
                ("M^{r+o(1)}", Some(r))
            } else {
                ("M^{1-r+o(1)} log M", Some(1.0 - r))
            }
        }
    };
    Ok(RegimeClass {
        regime,
        stab,
        threshold: point.threshold(),
        rate_scaling,
        rate_exponent,
    })
}

/// Max-load prediction used as an overlay on empirical load curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxLoadPrediction {
    pub value: f64,
    /// Set in the sparse regime, where only `O(1)` is known and the value 1 is
    /// a placeholder constant.
    pub proxy: bool,
}

pub fn predicted_max_load(point: &ScalingPoint, m: usize) -> Result<MaxLoadPrediction> {
    let class = classify_regime(point)?;
    let mf = m as f64;
    Ok(match class.regime {
        Regime::Sparse => MaxLoadPrediction { value: 1.0, proxy: true },
        Regime::Critical => MaxLoadPrediction {
            value: mf.ln() / mf.ln().ln(),
            proxy: false,
        },
        Regime::Dense => MaxLoadPrediction {
            value: mf.powf(point.load_exponent()),
            proxy: false,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Ux,
    Uy,
    Omega,
}

impl Axis {
    fn component(self) -> usize {
        match self {
            Axis::Ux => 0,
            Axis::Uy => 1,
            Axis::Omega => 2,
        }
    }
}

/// Equal-width half-open bins along one frequency axis; the last bin is
/// closed on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinAxis {
    pub axis: Axis,
    pub lower: f64,
    pub width: f64,
    pub count: usize,
}

impl BinAxis {
    /// `count` bins of `width` centred on zero.
    pub fn centered(axis: Axis, count: usize, width: f64) -> Self {
        Self {
            axis,
            lower: -(count as f64) * width / 2.0,
            width,
            count,
        }
    }

    pub fn upper(&self) -> f64 {
        self.lower + self.count as f64 * self.width
    }

    /// Bin index and whether the value fell outside the support.
    pub fn index(&self, value: f64) -> (usize, bool) {
        let t = (value - self.lower) / self.width;
        if !(t >= 0.0) {
            return (0, true);
        }
        let idx = t.floor() as usize;
        if idx < self.count {
            (idx, false)
        } else {
            (self.count - 1, value > self.upper())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub axes: Vec<BinAxis>,
}

impl BinGrid {
    pub fn new(axes: Vec<BinAxis>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.count == 0 || !(a.width > 0.0)) {
            return Err(Error::InvalidDimension("bin grid needs non-empty axes with positive width".into()));
        }
        Ok(Self { axes })
    }

    pub fn total_bins(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Flat bin index of a `[u_x, u_y, omega]` point, plus the clamp flag.
    pub fn bin_of(&self, point: [f64; 3]) -> (usize, bool) {
        let mut flat = 0;
        let mut clamped = false;
        for axis in &self.axes {
            let (i, c) = axis.index(point[axis.axis.component()]);
            flat = flat * axis.count + i;
            clamped |= c;
        }
        (flat, clamped)
    }

    /// Per-bin counts and the number of clamped points.
    pub fn loads<I: IntoIterator<Item = [f64; 3]>>(&self, points: I) -> (Vec<usize>, usize) {
        let mut counts = vec![0usize; self.total_bins()];
        let mut clamped = 0;
        for p in points {
            let (b, c) = self.bin_of(p);
            counts[b] += 1;
            clamped += c as usize;
        }
        (counts, clamped)
    }

    /// Indices of the users in the most loaded bin (lowest bin index on ties).
    pub fn fullest_bin_members(&self, users: &[UserState]) -> Vec<usize> {
        let bins: Vec<usize> = users.iter().map(|u| self.bin_of(u.frequencies()).0).collect();
        let mut counts = vec![0usize; self.total_bins()];
        for &b in &bins {
            counts[b] += 1;
        }
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        bins.iter().enumerate().filter(|(_, &b)| b == best).map(|(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadSample {
    pub k_users: usize,
    pub n_bins: usize,
    pub max_load: usize,
    /// Mean load `K / B`.
    pub lambda_m: f64,
    /// Points that fell outside the grid and were counted in an edge bin.
    pub clamped: usize,
}

impl LoadSample {
    /// Pigeonhole floor `⌈K / B⌉`.
    pub fn pigeonhole(&self) -> usize {
        self.k_users.div_ceil(self.n_bins)
    }
}

pub fn max_load<I: IntoIterator<Item = [f64; 3]>>(grid: &BinGrid, points: I) -> LoadSample {
    let (counts, clamped) = grid.loads(points);
    let k: usize = counts.iter().sum();
    LoadSample {
        k_users: k,
        n_bins: counts.len(),
        max_load: counts.iter().copied().max().unwrap_or(0),
        lambda_m: k as f64 / counts.len() as f64,
        clamped,
    }
}

pub fn max_load_of_users(grid: &BinGrid, users: &[UserState]) -> LoadSample {
    max_load(grid, users.iter().map(UserState::frequencies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ula(p: f64, q: f64, r: f64) -> ScalingPoint {
        ScalingPoint::new(p, q, r, ArrayKind::Ula).unwrap()
    }

    #[test]
    fn bin_count_examples() {
        assert_eq!(bin_count(&ula(0.5, 0.0, 0.5), 256).unwrap(), 16);
        let upa = ScalingPoint::new(0.5, 0.0, 0.25, ArrayKind::Upa).unwrap();
        assert_eq!(bin_count(&upa, 256).unwrap(), 16);
        assert_eq!(bin_count(&ula(0.5, 0.0, 0.0), 256).unwrap(), 256);
    }

    #[test]
    fn stab_inflates_bins_exactly() {
        for &q in &[0.1, 0.25, 0.5, 0.8] {
            for &m in &[64usize, 256, 1000] {
                let base = bin_count(&ula(0.7, 0.0, 0.6), m).unwrap();
                let stab = bin_count(&ula(0.7, q, 0.6), m).unwrap();
                assert_eq!(stab, base * snapshot_count(q, m));
            }
        }
    }

    #[test]
    fn upa_requires_small_r() {
        assert!(ScalingPoint::new(0.5, 0.0, 0.5, ArrayKind::Upa).is_err());
        assert!(ScalingPoint::new(1.2, 0.0, 0.1, ArrayKind::Ula).is_err());
        assert!(ScalingPoint::new(0.5, -0.1, 0.1, ArrayKind::Ula).is_err());
        assert!(ScalingPoint::new(0.5, 0.0, 1.0, ArrayKind::Ula).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = classify_regime(&ula(0.5, 0.0, 0.3)).unwrap();
        assert_eq!((c.regime, c.rate_scaling), (Regime::Sparse, "M^p log M"));
        let c = classify_regime(&ula(0.6, 0.0, 0.6)).unwrap();
        assert_eq!((c.regime, c.rate_exponent), (Regime::Dense, None));
        let c = classify_regime(&ula(0.6, 0.3, 0.6)).unwrap();
        assert_ne!(c.regime, Regime::Dense);
        assert_eq!(c.rate_scaling, "M^{p-q} log M");
        assert!((c.threshold - 0.2).abs() < 1e-12);
    }

    #[test]
    fn classify_critical_subcases() {
        assert_eq!(classify_regime(&ula(0.7, 0.0, 0.3)).unwrap().rate_scaling, "M^{r+o(1)}");
        assert_eq!(classify_regime(&ula(0.5, 0.0, 0.5)).unwrap().rate_scaling, "M^{1/2+o(1)}");
        let c = classify_regime(&ula(0.3, 0.0, 0.7)).unwrap();
        assert_eq!((c.regime, c.rate_scaling), (Regime::Critical, "M^{1-r+o(1)} log M"));
        let upa = ScalingPoint::new(0.5, 0.0, 0.25, ArrayKind::Upa).unwrap();
        assert_eq!(classify_regime(&upa).unwrap().regime, Regime::Critical);
        let upa = ScalingPoint::new(0.5, 0.2, 0.4, ArrayKind::Upa).unwrap();
        // δ_UPA = 0.3 > q = 0.2
        assert_eq!(classify_regime(&upa).unwrap().regime, Regime::Dense);
    }

    #[test]
    fn predicted_loads() {
        let pred = predicted_max_load(&ula(0.9, 0.0, 0.5), 10_000).unwrap();
        assert!((pred.value - 10_000f64.powf(0.4)).abs() < 1e-9);
        assert!((pred.value - 39.81).abs() < 0.01);
        let pred = predicted_max_load(&ula(0.5, 0.0, 0.5), 1_000_000).unwrap();
        assert!((pred.value - 5.261).abs() < 1e-3);
        let pred = predicted_max_load(&ula(0.2, 0.0, 0.2), 1024).unwrap();
        assert_eq!(pred, MaxLoadPrediction { value: 1.0, proxy: true });
    }

    #[test]
    fn bin_axis_edges() {
        let a = BinAxis::centered(Axis::Ux, 4, 0.25);
        assert_eq!(a.index(-0.5), (0, false));
        assert_eq!(a.index(-0.25), (1, false));
        assert_eq!(a.index(0.5), (3, false));
        assert_eq!(a.index(0.6), (3, true));
        assert_eq!(a.index(-0.6), (0, true));
    }

    #[test]
    fn pigeonhole_and_identical_users() {
        let grid = BinGrid::new(vec![BinAxis::centered(Axis::Ux, 3, 1.0 / 3.0)]).unwrap();
        let points: Vec<[f64; 3]> = (0..10).map(|i| [-0.5 + i as f64 / 10.0, 0.0, 0.0]).collect();
        let s = max_load(&grid, points);
        assert!(s.max_load >= 4 && s.pigeonhole() == 4);
        let same = vec![[0.1, 0.0, 0.0]; 7];
        assert_eq!(max_load(&grid, same).max_load, 7);
    }

    #[test]
    fn grid_flat_index_is_row_major() {
        let grid = BinGrid::new(vec![
            BinAxis::centered(Axis::Ux, 2, 0.5),
            BinAxis::centered(Axis::Omega, 3, 1.0 / 3.0),
        ])
        .unwrap();
        assert_eq!(grid.total_bins(), 6);
        assert_eq!(grid.bin_of([0.1, 9.0, 0.4]), (5, false));
        assert_eq!(grid.bin_of([-0.1, 9.0, -0.4]), (0, false));
    }

    #[test]
    fn fullest_bin_members_tie_breaks_low() {
        let grid = BinGrid::new(vec![BinAxis::centered(Axis::Ux, 4, 0.25)]).unwrap();
        let users: Vec<_> = [0.3, -0.4, 0.35, -0.45, 0.1]
            .iter()
            .map(|&u| UserState::at(u, 0.0, 0.0))
            .collect();
        assert_eq!(grid.fullest_bin_members(&users), vec![1, 3]);
    }

    #[test]
    fn dense_load_within_chernoff_band() {
        // M = 4096, p = 0.9, r = 0.5: K = 1765, B = 64, mean load ~27.6;
        // the union/Chernoff band [λ, 2λ] holds in the vast majority of trials.
        let m = 4096;
        let k = user_count(0.9, m);
        let b = floor_pow(m, 0.5);
        let grid = BinGrid::new(vec![BinAxis::centered(Axis::Ux, b, 1.0 / m as f64)]).unwrap();
        let half = b as f64 / (2.0 * m as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut inside = 0;
        for _ in 0..500 {
            let pts: Vec<[f64; 3]> = (0..k).map(|_| [rng.random_range(-half..half), 0.0, 0.0]).collect();
            let s = max_load(&grid, pts);
            assert!(s.max_load >= s.pigeonhole());
            if (s.max_load as f64) >= s.lambda_m && (s.max_load as f64) <= 2.0 * s.lambda_m {
                inside += 1;
            }
        }
        assert!(inside >= 450, "{inside}");
    }
}
