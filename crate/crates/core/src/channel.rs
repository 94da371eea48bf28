//! User geometry, steering vectors, and the spatial / space-time channel matrices.
//!
//! Spatial frequencies are dimensionless and live on the unit circle: a
//! half-wavelength array aliases every frequency onto `[-1/2, 1/2)`. The
//! same holds for the normalized residual Doppler `omega`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, CMatrix, CVector};

/// Speed of light used by the free-space gain model (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ula,
    Upa,
}

/// Antenna geometry. A ULA is stored as `m_x × 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub kind: ArrayKind,
    pub m_x: usize,
    pub m_y: usize,
}

impl ArrayConfig {
    pub fn ula(m: usize) -> Result<Self> {
        Self::new(ArrayKind::Ula, m, 1)
    }

    pub fn upa(m_x: usize, m_y: usize) -> Result<Self> {
        Self::new(ArrayKind::Upa, m_x, m_y)
    }

    pub fn new(kind: ArrayKind, m_x: usize, m_y: usize) -> Result<Self> {
        if m_x == 0 || m_y == 0 {
            return Err(Error::InvalidDimension(format!(
                "array needs at least one element per axis, got {m_x}x{m_y}"
            )));
        }
        if kind == ArrayKind::Ula && m_y != 1 {
            return Err(Error::InvalidDimension(format!("a ULA has m_y = 1, got {m_y}")));
        }
        Ok(Self { kind, m_x, m_y })
    }

    /// Total element count `M = m_x * m_y`.
    pub fn elements(&self) -> usize {
        self.m_x * self.m_y
    }
}

/// One ground user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    /// Horizontal position in km, absent for synthetic users placed directly
    /// in frequency space.
    pub position_km: Option<(f64, f64)>,
    /// Normalized residual Doppler on `[-1/2, 1/2)`.
    pub omega: f64,
    /// LoS gain. Real and positive for drawn users.
    pub beta: Complex64,
    pub u_x: f64,
    pub u_y: f64,
}

impl UserState {
    /// A unit-gain user placed directly at the given frequencies.
    pub fn at(u_x: f64, u_y: f64, omega: f64) -> Self {
        Self {
            position_km: None,
            omega,
            beta: Complex64::new(1.0, 0.0),
            u_x,
            u_y,
        }
    }

    pub fn with_gain(mut self, beta: f64) -> Self {
        self.beta = Complex64::new(beta, 0.0);
        self
    }

    /// `[u_x, u_y, omega]`.
    pub fn frequencies(&self) -> [f64; 3] {
        [self.u_x, self.u_y, self.omega]
    }
}

/// Array response `a(x; m)` with entries `e^{j2π i x} / √m`.
pub fn steering_vector(x: f64, m: usize) -> Result<CVector> {
    if m == 0 {
        return Err(Error::InvalidDimension("steering vector length must be >= 1".into()));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("spatial frequency must be finite, got {x}")));
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok(CVector::from_iterator(
        m,
        (0..m).map(|i| Complex64::from_polar(scale, 2.0 * PI * i as f64 * x)),
    ))
}

/// UPA response `a(u_y; m_y) ⊗ a(u_x; m_x)`, so element `iy * m_x + ix`.
pub fn upa_steering(u_x: f64, u_y: f64, m_x: usize, m_y: usize) -> Result<CVector> {
    let ax = steering_vector(u_x, m_x)?;
    let ay = steering_vector(u_y, m_y)?;
    Ok(kron_vec(&ay, &ax))
}

/// Slow-time response `b(omega; l)`.
pub fn temporal_steering(omega: f64, l: usize) -> Result<CVector> {
    if l == 0 {
        return Err(Error::InvalidDimension("snapshot count must be >= 1".into()));
    }
    steering_vector(omega, l)
}

/// Normalized inner product `a(u_1; m)^H a(u_2; m)` as a function of
/// `delta = u_2 - u_1`, i.e. the phase-carrying Dirichlet kernel
/// `(1/m) Σ_i e^{j2π i delta}`.
pub fn dirichlet_inner(delta: f64, m: usize) -> Complex64 {
    let d = delta - delta.round();
    if d == 0.0 || m == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let mf = m as f64;
    let mag = (PI * mf * d).sin() / (mf * (PI * d).sin());
    Complex64::from_polar(1.0, PI * (mf - 1.0) * d) * mag
}

/// Magnitude `|sin(π m Δ) / (m sin(π Δ))|`, equal to 1 at integer `Δ`.
pub fn dirichlet_magnitude(delta: f64, m: usize) -> f64 {
    dirichlet_inner(delta, m).norm()
}

/// Free-space LoS amplitude `sqrt((c / (4π f_c d))^alpha)` for a slant
/// distance `d_km` in kilometres.
pub fn friis_gain(d_km: f64, carrier_hz: f64, alpha: f64) -> Result<f64> {
    if !(d_km > 0.0) {
        return Err(Error::Domain(format!("slant distance must be positive, got {d_km} km")));
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::Domain(format!("carrier frequency must be positive, got {carrier_hz}")));
    }
    let d_m = d_km * 1.0e3;
    Ok((SPEED_OF_LIGHT / (4.0 * PI * carrier_hz * d_m)).powf(alpha).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Footprint {
    /// `x ∈ [-R, R)`, `y = 0`.
    Line,
    /// `(x, y) ∈ [-R, R)²`.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GainModel {
    Unit,
    Friis { carrier_hz: f64, exponent: f64 },
}

impl GainModel {
    pub fn gain(&self, slant_km: f64) -> Result<f64> {
        match *self {
            GainModel::Unit => Ok(1.0),
            GainModel::Friis { carrier_hz, exponent } => friis_gain(slant_km, carrier_hz, exponent),
        }
    }
}

/// Parameters of a random user drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub users: usize,
    pub r_cell_km: f64,
    pub altitude_km: f64,
    pub footprint: Footprint,
    pub gain: GainModel,
}

impl UserDrop {
    fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::InvalidDimension("user drop needs at least one user".into()));
        }
        if !(self.r_cell_km > 0.0) || !(self.altitude_km > 0.0) {
            return Err(Error::Domain(format!(
                "cell half-width and altitude must be positive, got R={} H={}",
                self.r_cell_km, self.altitude_km
            )));
        }
        Ok(())
    }

    /// Places one user at `(x, y)` km with a uniform Doppler draw.
    fn place<R: Rng + ?Sized>(&self, x: f64, y: f64, rng: &mut R) -> Result<UserState> {
        let omega = rng.random_range(-0.5..0.5);
        let slant = (x * x + y * y + self.altitude_km * self.altitude_km).sqrt();
        Ok(UserState {
            position_km: Some((x, y)),
            omega,
            beta: Complex64::new(self.gain.gain(slant)?, 0.0),
            u_x: x / (2.0 * self.altitude_km),
            u_y: y / (2.0 * self.altitude_km),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<UserState>> {
        self.validate()?;
        let r = self.r_cell_km;
        (0..self.users)
            .map(|_| {
                let x = rng.random_range(-r..r);
                let y = match self.footprint {
                    Footprint::Line => 0.0,
                    Footprint::Square => rng.random_range(-r..r),
                };
                self.place(x, y, rng)
            })
            .collect()
    }

    /// Half-width of the spatial-frequency support, `R / (2H)`.
    pub fn frequency_half_width(&self) -> f64 {
        self.r_cell_km / (2.0 * self.altitude_km)
    }
}

/// Draws users deterministically from `seed`.
pub fn draw_users(drop: &UserDrop, seed: u64) -> Result<Vec<UserState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    drop.sample(&mut rng)
}

/// Places users at given line positions (km) with Doppler drawn from `rng`.
pub(crate) fn users_on_line<R: Rng + ?Sized>(
    drop: &UserDrop,
    xs: &[f64],
    rng: &mut R,
) -> Result<Vec<UserState>> {
    drop.validate()?;
    xs.iter().map(|&x| drop.place(x, 0.0, rng)).collect()
}

/// Common view over spatial and space-time channels.
pub trait Channel {
    fn entries(&self) -> &CMatrix;
    /// Gram normalization: `M` for spatial channels, `M L` for space-time.
    fn normalization(&self) -> f64;
    fn users(&self) -> &[UserState];
    /// Pre-log factor of the rate expression (1, or `1/L` for STAB).
    fn prelog(&self) -> f64;
}

/// `M × K` spatial channel; column `k` is `√M β_k a_k`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub array: ArrayConfig,
    pub users: Vec<UserState>,
}

/// `ML × K` space-time channel; column `k` is `√(ML) β_k (b_k ⊗ a_k)`.
#[derive(Debug, Clone)]
pub struct SpaceTimeChannel {
    pub entries: CMatrix,
    pub array: ArrayConfig,
    pub snapshots: usize,
    pub users: Vec<UserState>,
}

impl Channel for ChannelMatrix {
    fn entries(&self) -> &CMatrix {
        &self.entries
    }
    fn normalization(&self) -> f64 {
        self.array.elements() as f64
    }
    fn users(&self) -> &[UserState] {
        &self.users
    }
    fn prelog(&self) -> f64 {
        1.0
    }
}

impl Channel for SpaceTimeChannel {
    fn entries(&self) -> &CMatrix {
        &self.entries
    }
    fn normalization(&self) -> f64 {
        (self.array.elements() * self.snapshots) as f64
    }
    fn users(&self) -> &[UserState] {
        &self.users
    }
    fn prelog(&self) -> f64 {
        1.0 / self.snapshots as f64
    }
}

/// Unit-norm spatial signature of one user on the given array.
pub fn spatial_signature(user: &UserState, array: &ArrayConfig) -> Result<CVector> {
    match array.kind {
        ArrayKind::Ula => steering_vector(user.u_x, array.m_x),
        ArrayKind::Upa => upa_steering(user.u_x, user.u_y, array.m_x, array.m_y),
    }
}

pub fn build_channel(users: &[UserState], array: &ArrayConfig) -> Result<ChannelMatrix> {
    if users.is_empty() {
        return Err(Error::InvalidDimension("channel needs at least one user".into()));
    }
    let m = array.elements();
    let scale = (m as f64).sqrt();
    let mut entries = CMatrix::zeros(m, users.len());
    for (k, user) in users.iter().enumerate() {
        let a = spatial_signature(user, array)?;
        entries.set_column(k, &(a * (user.beta * scale)));
    }
    Ok(ChannelMatrix {
        entries,
        array: *array,
        users: users.to_vec(),
    })
}

pub fn build_spacetime_channel(
    users: &[UserState],
    array: &ArrayConfig,
    snapshots: usize,
) -> Result<SpaceTimeChannel> {
    if users.is_empty() {
        return Err(Error::InvalidDimension("channel needs at least one user".into()));
    }
    if snapshots == 0 {
        return Err(Error::InvalidDimension("snapshot count must be >= 1".into()));
    }
    let m = array.elements();
    let scale = ((m * snapshots) as f64).sqrt();
    let mut entries = CMatrix::zeros(m * snapshots, users.len());
    for (k, user) in users.iter().enumerate() {
        let a = spatial_signature(user, array)?;
        let b = temporal_steering(user.omega, snapshots)?;
        entries.set_column(k, &(kron_vec(&b, &a) * (user.beta * scale)));
    }
    Ok(SpaceTimeChannel {
        entries,
        array: *array,
        snapshots,
        users: users.to_vec(),
    })
}
