//! Phase/radius diffusions of the eigenvalue equation `y'' = (ξ - λ) y`.
//!
//! In the coordinates of scale `E` (`E = 1` is the original equation), with
//! `b = E^{3/2}`, `a = √E λ`, `s = sin θ`, `c = cos θ`:
//!
//! ```text
//! dθ = (b c² + a s² + s³c) dt - s² dB
//! dρ = (2(b - a) s c - 2 s²c² + s²) dt + 2 s c dB
//! ```
//!
//! These are the polar coordinates `(q, p) = e^{ρ/2} (sin θ, cos θ)` of the
//! linear system `dq = b p dt`, `dp = -a q dt + q dB`. The phase is stored as
//! a winding count plus an angle in `[0, π)`, so crossings of `πZ` are
//! counted exactly.
//!
//! Two schemes are available:
//!
//! - [`Scheme::EulerRiccati`]: Euler–Maruyama on `(θ, ρ)` away from `πZ`;
//!   within `band_width` of `πZ`, where `cot θ` explodes, the exact
//!   deterministic linear flow followed by the noise kick `p += q ΔB`.
//! - [`Scheme::CellExact`]: exact propagation of the linear system with the
//!   white noise replaced by its cell averages. Crossings only happen forward
//!   and the winding count is exactly monotone in `λ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::closed_form::InvariantTable;
use crate::measure::GridMeasure;
use crate::noise::{NoisePath, TICK};
use crate::rng::standard_normal;
use crate::scale::Scale;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Driven by the path as given.
    Forward,
    /// Driven by the path reversed around the midpoint of its interval.
    Backward,
    /// Time reversal of the forward diffusion with respect to its invariant law.
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerRiccati,
    CellExact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub lambda: f64,
    pub scale: Scale,
    pub flavor: Flavor,
    pub step: f64,
    pub band_width: f64,
    pub scheme: Scheme,
    /// Record every `stride`-th step in trajectories.
    pub stride: usize,
    pub track_z: bool,
}

impl FlowParams {
    pub fn new(lambda: f64, scale: Scale) -> Self {
        Self {
            lambda,
            scale,
            flavor: Flavor::Forward,
            step: 0.01 / scale.rotation(),
            band_width: 0.1,
            scheme: Scheme::EulerRiccati,
            stride: 1,
            track_z: false,
        }
    }

    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn with_flavor(self, flavor: Flavor) -> Self {
        Self { flavor, ..self }
    }

    pub fn with_stride(self, stride: usize) -> Self {
        Self { stride, ..self }
    }

    pub fn tracking_z(self) -> Self {
        Self { track_z: true, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter("step must be positive"));
        }
        if !(self.band_width > 0.0 && self.band_width < PI / 2.0) {
            return Err(Error::InvalidParameter("band width must lie in (0, π/2)"));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be at least 1"));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite"));
        }
        Ok(())
    }
}

/// Phase `θ = turns π + angle` with `angle ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub turns: i64,
    pub angle: f64,
}

impl Phase {
    pub const ZERO: Phase = Phase { turns: 0, angle: 0.0 };

    pub fn from_theta(theta: f64) -> Self {
        let turns = (theta / PI).floor();
        let mut angle = theta - turns * PI;
        let mut turns = turns as i64;
        if angle >= PI {
            angle -= PI;
            turns += 1;
        }
        if angle < 0.0 {
            angle = 0.0;
        }
        Self { turns, angle }
    }

    pub fn theta(&self) -> f64 {
        self.turns as f64 * PI + self.angle
    }

    /// `⌊θ⌋_π`, the number of completed half-turns.
    pub fn winding(&self) -> i64 {
        self.turns
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub phase: Phase,
    pub rho: f64,
    /// `∂_λ θ`, when tracked.
    pub z: Option<f64>,
}

impl PhaseState {
    pub fn new(t: f64, theta: f64) -> Self {
        Self { t, phase: Phase::from_theta(theta), rho: 0.0, z: None }
    }

    pub fn theta(&self) -> f64 {
        self.phase.theta()
    }

    /// `e^{ρ/2} sin θ`.
    pub fn y(&self) -> f64 {
        (0.5 * self.rho).exp() * self.phase.angle.sin() * if self.phase.turns % 2 == 0 { 1.0 } else { -1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: FlowParams,
    pub samples: Vec<PhaseState>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectories hold at least the initial state")
    }
}

// ---------------------------------------------------------------------------
// linear propagation

#[inline]
fn cos_series(x: f64) -> f64 {
    // Σ (-x)^k / (2k)!
    1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0 * (1.0 - x / 56.0 * (1.0 - x / 90.0 * (1.0 - x / 132.0 * (1.0 - x / 182.0 * (1.0 - x / 240.0)))))))
}

#[inline]
fn sinc_series(x: f64) -> f64 {
    // Σ (-x)^k / (2k+1)!
    1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0 * (1.0 - x / 72.0 * (1.0 - x / 110.0 * (1.0 - x / 156.0 * (1.0 - x / 210.0 * (1.0 - x / 272.0)))))))
}

/// Propagator `(C, dt·Sc)` of `q' = b p, p' = -a q` over `dt`, with `x = a b dt²`.
#[inline]
fn propagator(a: f64, b: f64, dt: f64) -> (f64, f64, f64) {
    let x = a * b * dt * dt;
    let (c, sc) = if x.abs() < 0.5 {
        (cos_series(x), sinc_series(x))
    } else if x > 0.0 {
        let w = x.sqrt();
        (w.cos(), w.sin() / w)
    } else {
        let w = (-x).sqrt();
        (w.cosh(), w.sinh() / w)
    };
    (c, sc * dt, x)
}

/// Exact linear flow from the unit vector at `angle ∈ [0, π)` followed by the
/// kick `p += q kick`. Returns the new angle, the number of crossings of
/// `q = 0`, and `ln r²`.
#[inline]
fn linear_step(angle: f64, a: f64, b: f64, dt: f64, kick: f64) -> (f64, i64, f64) {
    let (q0, p0) = angle.sin_cos();
    let (c, sdt, x) = propagator(a, b, dt);
    let mut q = c * q0 + b * sdt * p0;
    let mut p = -a * sdt * q0 + c * p0 + kick * (c * q0 + b * sdt * p0);
    let negative = q < 0.0 || (q == 0.0 && p < 0.0);
    let mut crossings = i64::from(negative);
    if x >= PI * PI {
        // several half-periods fit in the step; count them from the scaled phase
        let w = x.sqrt();
        let omega_over_b = w / (b * dt);
        let phi0 = q0.atan2(p0 / omega_over_b);
        let mut n = ((phi0 + w) / PI).floor() as i64;
        if (n % 2 != 0) != negative {
            n += if (phi0 + w) / PI - n as f64 > 0.5 { 1 } else { -1 };
        }
        crossings = n.max(0);
    }
    if negative {
        q = -q;
        p = -p;
    }
    let r2 = q * q + p * p;
    (q.abs().atan2(p), crossings, r2.ln())
}

#[derive(Debug, Clone, Copy)]
struct Working {
    turns: i64,
    angle: f64,
    rho: f64,
    z: f64,
}

impl Working {
    fn from_state(s: &PhaseState) -> Self {
        Self { turns: s.phase.turns, angle: s.phase.angle, rho: s.rho, z: s.z.unwrap_or(0.0) }
    }

    fn theta(&self) -> f64 {
        self.turns as f64 * PI + self.angle
    }

    fn state(&self, t: f64, track_z: bool) -> PhaseState {
        PhaseState { t, phase: Phase { turns: self.turns, angle: self.angle }, rho: self.rho, z: track_z.then_some(self.z) }
    }

    #[inline]
    fn set_angle(&mut self, angle: f64, crossings: i64) {
        self.turns += crossings;
        if angle >= PI {
            self.angle = angle - PI;
            self.turns += 1;
        } else {
            self.angle = angle.max(0.0);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Engine<'t> {
    a: f64,
    b: f64,
    root_e: f64,
    band: f64,
    scheme: Scheme,
    track_z: bool,
    table: Option<&'t InvariantTable>,
}

impl<'t> Engine<'t> {
    fn new(params: &FlowParams, table: Option<&'t InvariantTable>) -> Self {
        Self {
            a: params.scale.potential(params.lambda),
            b: params.scale.rotation(),
            root_e: params.scale.get().sqrt(),
            band: params.band_width,
            scheme: params.scheme,
            track_z: params.track_z,
            table,
        }
    }

    #[inline]
    fn update_z(&self, w: &mut Working, s0: f64, drho: f64, dt: f64) {
        if self.track_z {
            let s1 = w.angle.sin();
            let decay = (-drho).exp();
            w.z = w.z * decay + self.root_e * dt * 0.5 * (s0 * s0 * decay + s1 * s1);
        }
    }

    #[inline]
    fn forward(&self, w: &mut Working, dt: f64, db: f64) {
        let s0 = w.angle.sin();
        match self.scheme {
            Scheme::CellExact => {
                let (angle, n, lr2) = linear_step(w.angle, self.a - db / dt, self.b, dt, 0.0);
                w.set_angle(angle, n);
                w.rho += lr2;
                self.update_z(w, s0, lr2, dt);
            }
            Scheme::EulerRiccati => {
                let in_band = w.angle < self.band || w.angle > PI - self.band;
                if !in_band {
                    let c = w.angle.cos();
                    let (s2, sc) = (s0 * s0, s0 * c);
                    let angle = w.angle + (self.b * c * c + self.a * s2 + s2 * sc) * dt - s2 * db;
                    if angle > 0.0 && angle < PI {
                        let drho = (2.0 * (self.b - self.a) * sc - 2.0 * sc * sc + s2) * dt + 2.0 * sc * db;
                        w.angle = angle;
                        w.rho += drho;
                        self.update_z(w, s0, drho, dt);
                        return;
                    }
                }
                let (angle, n, lr2) = linear_step(w.angle, self.a, self.b, dt, db);
                w.set_angle(angle, n);
                w.rho += lr2;
                self.update_z(w, s0, lr2, dt);
            }
        }
    }

    #[inline]
    fn adjoint(&self, w: &mut Working, dt: f64, db: f64) {
        let table = self.table.expect("adjoint engine carries a table");
        let (s, c) = w.angle.sin_cos();
        let (s2, sc) = (s * s, s * c);
        let l = table.log_derivative_at(w.angle);
        let drift = -(self.b * c * c + self.a * s2) + 3.0 * s2 * sc + s2 * s2 * l;
        let drho = (2.0 * (self.a - self.b) * sc + 2.0 * sc * sc + s2 - 8.0 * sc * sc - 2.0 * s2 * sc * l) * dt
            + 2.0 * sc * db;
        let theta = w.angle + drift * dt - s2 * db;
        let shift = (theta / PI).floor();
        w.turns += shift as i64;
        w.set_angle(theta - shift * PI, 0);
        w.rho += drho;
    }
}

// ---------------------------------------------------------------------------
// driving the engine over a path

/// Cells of `path` between two grid times, grouped into integration steps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Drive<'p> {
    ticks: &'p [i64],
    unit: f64,
    cell: f64,
    per_step: usize,
    t0: f64,
}

impl<'p> Drive<'p> {
    pub(crate) fn new(path: &'p NoisePath, t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        let i0 = path.node_index(t_start)?;
        let i1 = path.node_index(t_end)?;
        if i1 <= i0 {
            return Err(Error::InvalidInterval { t0: t_start, t1: t_end });
        }
        Self::cells(path, i0, i1, step)
    }

    pub(crate) fn cells(path: &'p NoisePath, i0: usize, i1: usize, step: f64) -> Result<Self> {
        let cell = path.cell_width();
        if step < cell * (1.0 - 1e-9) {
            return Err(Error::PathTooCoarse { dt: cell, step });
        }
        let per_step = ((step / cell) * (1.0 + 1e-9)).floor().max(1.0) as usize;
        Ok(Self { ticks: &path.ticks()[i0..i1], unit: TICK * path.amplitude(), cell, per_step, t0: path.node_time(i0) })
    }

    pub(crate) fn steps(&self) -> usize {
        self.ticks.len().div_ceil(self.per_step)
    }

    #[inline]
    pub(crate) fn for_each<F: FnMut(usize, f64, f64)>(&self, mut f: F) {
        for (k, chunk) in self.ticks.chunks(self.per_step).enumerate() {
            let db = chunk.iter().sum::<i64>() as f64 * self.unit;
            f(k, chunk.len() as f64 * self.cell, db);
        }
    }

    pub(crate) fn time_after(&self, k: usize) -> f64 {
        let cells = ((k + 1) * self.per_step).min(self.ticks.len());
        self.t0 + cells as f64 * self.cell
    }
}

fn drive_for<'p>(path: &'p NoisePath, params: &FlowParams, init: &PhaseState, t_end: f64) -> Result<Drive<'p>> {
    params.validate()?;
    Drive::new(path, init.t, t_end, params.step)
}

fn record(engine: Engine<'_>, drive: &Drive<'_>, params: &FlowParams, init: &PhaseState, adjoint: bool) -> Trajectory {
    let mut w = Working::from_state(init);
    let mut samples = Vec::with_capacity(drive.steps() / params.stride + 2);
    samples.push(w.state(init.t, params.track_z));
    let last = drive.steps() - 1;
    drive.for_each(|k, dt, db| {
        if adjoint {
            engine.adjoint(&mut w, dt, db);
        } else {
            engine.forward(&mut w, dt, db);
        }
        if (k + 1) % params.stride == 0 || k == last {
            samples.push(w.state(drive.time_after(k), params.track_z));
        }
    });
    Trajectory { params: *params, samples }
}

fn oriented(path: &NoisePath, flavor: Flavor) -> Result<Option<NoisePath>> {
    match flavor {
        Flavor::Forward => Ok(None),
        Flavor::Backward => {
            let (t0, t1) = path.interval();
            path.time_reverse(0.5 * (t0 + t1)).map(Some)
        }
        Flavor::Adjoint => Err(Error::MissingInvariantTable),
    }
}

/// Integrates the forward or backward diffusion from `init` to `t_end`
/// (both grid times of the driving path).
pub fn evolve(path: &NoisePath, params: &FlowParams, init: &PhaseState, t_end: f64) -> Result<Trajectory> {
    let reversed = oriented(path, params.flavor)?;
    let drive = drive_for(reversed.as_ref().unwrap_or(path), params, init, t_end)?;
    Ok(record(Engine::new(params, None), &drive, params, init, false))
}

/// As [`evolve`] keeping only the final state.
pub fn evolve_final(path: &NoisePath, params: &FlowParams, init: &PhaseState, t_end: f64) -> Result<PhaseState> {
    let reversed = oriented(path, params.flavor)?;
    let drive = drive_for(reversed.as_ref().unwrap_or(path), params, init, t_end)?;
    let engine = Engine::new(params, None);
    let mut w = Working::from_state(init);
    drive.for_each(|_, dt, db| engine.forward(&mut w, dt, db));
    Ok(w.state(t_end, params.track_z))
}

/// Forward dynamics over cells `[i0, i1)` recording every `stride` steps.
pub(crate) fn trajectory_cells(
    path: &NoisePath,
    params: &FlowParams,
    i0: usize,
    i1: usize,
    init: &PhaseState,
) -> Result<Trajectory> {
    let drive = Drive::cells(path, i0, i1, params.step)?;
    Ok(record(Engine::new(params, None), &drive, params, init, false))
}

/// Winding `⌊θ⌋_π` at the end of cells `[i0, i1)` for the cell-exact
/// dynamics started from θ = 0. Keeps the unit vector `(q, p)` with `q ≥ 0`
/// instead of the angle, which avoids trigonometric calls per cell.
pub(crate) fn winding_cells(path: &NoisePath, lambda: f64, scale: Scale, i0: usize, i1: usize) -> i64 {
    let a = scale.potential(lambda);
    let b = scale.rotation();
    let dt = path.cell_width();
    let unit = TICK * path.amplitude();
    let (mut q, mut p) = (0.0f64, 1.0f64);
    let mut turns = 0i64;
    for &tick in &path.ticks()[i0..i1] {
        let a_eff = a - tick as f64 * unit / dt;
        let (c, sdt, x) = propagator(a_eff, b, dt);
        if x >= 0.25 * PI * PI {
            let angle = q.atan2(p);
            let (next, n, _) = linear_step(angle, a_eff, b, dt, 0.0);
            turns += n;
            (q, p) = next.sin_cos();
            continue;
        }
        let q1 = c * q + b * sdt * p;
        let p1 = -a_eff * sdt * q + c * p;
        if q1 < 0.0 || (q1 == 0.0 && p1 < 0.0) {
            turns += 1;
            q = -q1;
            p = -p1;
        } else {
            q = q1;
            p = p1;
        }
        let r2 = q * q + p * p;
        if !(1e-100..=1e100).contains(&r2) {
            let r = r2.sqrt();
            q /= r;
            p /= r;
        }
    }
    turns
}

/// Integrates the adjoint diffusion, whose drift involves `∂_θ log μ` from `table`.
pub fn evolve_adjoint(
    path: &NoisePath,
    params: &FlowParams,
    table: &InvariantTable,
    init: &PhaseState,
    t_end: f64,
) -> Result<Trajectory> {
    if table.lambda() != params.lambda || table.scale() != params.scale {
        return Err(Error::InvalidParameter("invariant table does not match the flow parameters"));
    }
    let drive = drive_for(path, params, init, t_end)?;
    Ok(record(Engine::new(params, Some(table)), &drive, params, init, true))
}

/// Duration of one half-turn of the phase and the gain of `ρ` over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSample {
    pub duration: f64,
    pub rho_gain: f64,
}

// Runs from `init` until θ has gained π, interpolating linearly inside the crossing step.
fn next_rotation(engine: &Engine<'_>, drive: &Drive<'_>, from_step: usize, w: &mut Working) -> Option<(usize, f64, f64)> {
    let target = w.theta() + PI;
    let rho0 = w.rho;
    let mut elapsed = 0.0;
    let mut k = from_step;
    let steps = drive.steps();
    while k < steps {
        let i = k * drive.per_step;
        let chunk = &drive.ticks[i..(i + drive.per_step).min(drive.ticks.len())];
        let db = chunk.iter().sum::<i64>() as f64 * drive.unit;
        let dt = chunk.len() as f64 * drive.cell;
        let (th0, r0) = (w.theta(), w.rho);
        engine.forward(w, dt, db);
        k += 1;
        let th1 = w.theta();
        if th1 >= target {
            let frac = if th1 > th0 { ((target - th0) / (th1 - th0)).clamp(0.0, 1.0) } else { 1.0 };
            return Some((k, elapsed + frac * dt, r0 + frac * (w.rho - r0) - rho0));
        }
        elapsed += dt;
    }
    None
}

/// First time the phase started at `theta0` (at the start of the path) gains π.
pub fn sample_rotation_time(path: &NoisePath, params: &FlowParams, theta0: f64) -> Result<RotationSample> {
    let (t0, t1) = path.interval();
    let init = PhaseState::new(t0, theta0);
    let drive = drive_for(path, params, &init, t1)?;
    let engine = Engine::new(params, None);
    let mut w = Working::from_state(&init);
    next_rotation(&engine, &drive, 0, &mut w)
        .map(|(_, duration, rho_gain)| RotationSample { duration, rho_gain })
        .ok_or(Error::PathExhausted { t: t1 })
}

/// `count` consecutive rotations from θ = 0; by the strong Markov property at
/// the hitting times of `πZ` they are independent draws of the rotation time.
pub fn rotation_times(path: &NoisePath, params: &FlowParams, count: usize) -> Result<Vec<RotationSample>> {
    let (t0, t1) = path.interval();
    let init = PhaseState::new(t0, 0.0);
    let drive = drive_for(path, params, &init, t1)?;
    let engine = Engine::new(params, None);
    let mut w = Working::from_state(&init);
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let (next, duration, rho_gain) = next_rotation(&engine, &drive, k, &mut w).ok_or(Error::PathExhausted { t: t1 })?;
        out.push(RotationSample { duration, rho_gain });
        k = next;
        // restart exactly on πZ so that each cycle has the same law
        w.angle = 0.0;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTrajectory {
    pub lower: Trajectory,
    pub upper: Trajectory,
    /// `θ_upper - θ_lower` at the recorded times.
    pub alpha: Vec<f64>,
}

/// Two forward phases at `lambda_lo ≤ lambda_hi` driven by the same noise.
pub fn evolve_pair(
    path: &NoisePath,
    params: &FlowParams,
    lambda_lo: f64,
    lambda_hi: f64,
    init: &PhaseState,
    t_end: f64,
) -> Result<PairTrajectory> {
    if !(lambda_lo <= lambda_hi) {
        return Err(Error::InvalidParameter("pair needs lambda_lo <= lambda_hi"));
    }
    let lower = evolve(path, &FlowParams { lambda: lambda_lo, ..*params }, init, t_end)?;
    let upper = evolve(path, &FlowParams { lambda: lambda_hi, ..*params }, init, t_end)?;
    let alpha = lower.samples.iter().zip(&upper.samples).map(|(l, u)| u.theta() - l.theta()).collect();
    Ok(PairTrajectory { lower, upper, alpha })
}

// ---------------------------------------------------------------------------
// limit shapes

/// A sampled positive profile on a uniform grid and its recentered shape measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitShape {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `∫ t Y² / ∫ Y²`.
    pub center: f64,
    pub shape: GridMeasure,
}

impl LimitShape {
    /// Builds the profile from `log Y` on a grid, normalizing in log space.
    pub fn from_log_values(origin: f64, spacing: f64, log_values: Vec<f64>) -> Result<Self> {
        let top = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = log_values.iter().map(|l| (2.0 * (l - top)).exp()).collect();
        let measure = GridMeasure::new(origin, spacing, weights)?;
        let center = measure.mean();
        let times = (0..log_values.len()).map(|j| origin + j as f64 * spacing).collect();
        let values = log_values.into_iter().map(f64::exp).collect();
        Ok(Self { times, values, center, shape: measure.recentered() })
    }
}

/// `Y_∞(t) = exp(-|t|/8 + B(t)/(2√2))` for a two-sided Brownian motion, on
/// the grid of `spacing` over `[-t_max, t_max]`.
pub fn sample_y_infinity(seed: u64, t_max: f64, spacing: f64) -> Result<LimitShape> {
    if !(t_max > 0.0 && spacing > 0.0 && spacing <= t_max) {
        return Err(Error::InvalidParameter("need 0 < spacing <= t_max"));
    }
    let half = (t_max / spacing).round() as usize;
    let sd = spacing.sqrt();
    let mut log = alloc::vec![0.0; 2 * half + 1];
    for side in 0..2u64 {
        let mut b = 0.0;
        for j in 1..=half {
            b += sd * standard_normal(seed, side, j as u64);
            let idx = if side == 0 { half + j } else { half - j };
            log[idx] = -(j as f64 * spacing) / 8.0 + b / (2.0 * 2f64.sqrt());
        }
    }
    LimitShape::from_log_values(-(half as f64) * spacing, spacing, log)
}

/// Bulk limit profile: `θ` from the law `μ(θ)μ(π-θ) sin²θ / n`, two
/// independent adjoint diffusions from `θ` and `π - θ` with `ρ̄(0) = 0`,
/// glued as `ȳ⁻(t)` for `t ≥ 0` and `ȳ⁺(-t)` for `t ≤ 0`.
pub fn sample_y_e(seed: u64, table: &InvariantTable, t_max: f64, step: f64, stride: usize) -> Result<LimitShape> {
    if !(t_max > 0.0 && step > 0.0 && stride > 0) {
        return Err(Error::InvalidParameter("need positive t_max, step and stride"));
    }
    let params = FlowParams { stride, ..FlowParams::new(table.lambda(), table.scale()).with_step(step) };
    let level = (t_max / step).log2().ceil().max(0.0) as u32;
    let u = crate::rng::unit_closed_open(crate::rng::block(seed, u64::MAX, 0).0);
    let theta = table.sample_mixture(u);
    let mut sides: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2);
    for (k, start) in [(1u64, theta), (2u64, PI - theta)] {
        let path = NoisePath::generate(crate::rng::derive_seed(seed, k), 0.0, t_max, level)?;
        let traj = evolve_adjoint(&path, &params, table, &PhaseState::new(0.0, start), t_max)?;
        let logs: Vec<f64> = traj
            .samples
            .iter()
            .map(|s| 0.5 * s.rho + s.phase.angle.sin().abs().max(f64::MIN_POSITIVE).ln())
            .collect();
        let spacing = traj.samples[1].t - traj.samples[0].t;
        sides.push((logs, spacing));
    }
    for (logs, spacing) in sides.iter_mut() {
        // the final record may sit off the stride grid
        let n = logs.len();
        if n > 2 && (n - 1) as f64 * *spacing > t_max + 1e-9 * t_max {
            logs.pop();
        }
    }
    let (plus, spacing) = &sides[0];
    let (minus, _) = &sides[1];
    let mut log = Vec::with_capacity(plus.len() + minus.len() - 1);
    log.extend(plus.iter().rev());
    log.extend(minus.iter().skip(1));
    LimitShape::from_log_values(-((plus.len() - 1) as f64) * spacing, *spacing, log)
}
