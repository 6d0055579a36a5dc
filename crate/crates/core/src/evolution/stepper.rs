use serde::{Deserialize, Serialize};

use super::hamiltonian::{from_c4, time_derivative, to_c4};
use super::{DerivativeKind, Differentiator, EvolutionError, Grid, PotentialField, SpinorField};
use crate::clifford::{Paravector, C64};
use crate::spinor::{Mode, PhysicsParams, SpinorError, DEFAULT_NODE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    StrangSplit,
    Rk4,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_growth_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// Defaults to `0.25 × min spacing`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub derivative: DerivativeKind,
    pub t_end: f64,
    #[serde(default)]
    pub mode: Mode,
    /// Warn when `dt > c_cfl × min spacing`.
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
    #[serde(default = "default_growth_tol")]
    pub growth_tol: f64,
}

impl SchemeConfig {
    pub fn new(t_end: f64, mode: Mode) -> Self {
        Self {
            dt: None,
            method: Method::StrangSplit,
            derivative: DerivativeKind::Spectral,
            t_end,
            mode,
            c_cfl: default_cfl(),
            growth_tol: default_growth_tol(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn dt_for(&self, grid: &Grid) -> f64 {
        self.dt.unwrap_or(0.25 * grid.min_spacing())
    }

    /// Number of steps and the step that lands exactly on `t_end`.
    pub fn steps_for(&self, grid: &Grid) -> (usize, f64) {
        let dt = self.dt_for(grid);
        if self.t_end == 0.0 {
            return (0, dt);
        }
        let n = (self.t_end / dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }

    pub fn validate(&self, grid: &Grid) -> Result<Vec<String>, EvolutionError> {
        let dt = self.dt_for(grid);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvolutionError::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(EvolutionError::InvalidConfig(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.growth_tol >= 0.0) {
            return Err(EvolutionError::InvalidConfig("growth_tol must be >= 0".into()));
        }
        let mut warnings = vec![];
        if dt > self.c_cfl * grid.min_spacing() {
            warnings.push(format!(
                "dt = {dt} exceeds c_cfl * min_spacing = {}",
                self.c_cfl * grid.min_spacing()
            ));
        }
        Ok(warnings)
    }
}

const I: C64 = C64::new(0.0, 1.0);

/// Advances a [`SpinorField`] by one step of the configured scheme.
pub struct Stepper {
    diff: Differentiator,
    pot: PotentialField,
    params: PhysicsParams,
    mode: Mode,
    method: Method,
}

impl Stepper {
    pub fn new(
        grid: Grid,
        pot: PotentialField,
        params: PhysicsParams,
        scheme: &SchemeConfig,
    ) -> Result<Self, EvolutionError> {
        grid.validate()?;
        pot.validate(&grid)?;
        params.validate(scheme.mode).map_err(EvolutionError::Spinor)?;
        Ok(Self {
            diff: Differentiator::new(grid, scheme.derivative),
            pot,
            params,
            mode: scheme.mode,
            method: scheme.method,
        })
    }

    pub fn differentiator(&self) -> &Differentiator {
        &self.diff
    }

    pub fn potential(&self) -> &PotentialField {
        &self.pot
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `∂_0 φ` of the full equation.
    pub fn time_derivative(&self, phi: &[Paravector]) -> Result<Vec<Paravector>, SpinorError> {
        time_derivative(&self.diff, phi, &self.pot, &self.params, self.mode, false)
    }

    fn spectral_linear(&self) -> bool {
        self.diff.kind == DerivativeKind::Spectral && self.pot.constant_value().is_some()
    }

    pub fn step(&self, field: &mut SpinorField, dt: f64) -> Result<(), EvolutionError> {
        let t = field.t;
        match self.method {
            Method::StrangSplit => {
                self.nonlinear_substep(&mut field.data, dt / 2.0)?;
                if self.spectral_linear() {
                    self.linear_exact(&mut field.data, dt);
                } else {
                    self.rk4(&mut field.data, dt, true)?;
                }
                self.nonlinear_substep(&mut field.data, dt / 2.0)?;
            }
            Method::Rk4 => self.rk4(&mut field.data, dt, false)?,
        }
        field.t = t + dt;
        if !field.is_finite() {
            return Err(EvolutionError::BlowUp { t: field.t });
        }
        Ok(())
    }

    fn source_z(&self, v: &[C64; 4]) -> Result<Option<C64>, EvolutionError> {
        // det φ = <η, ξ>, ‖φ‖² = |ξ|² + |η|²
        let det = v[2].conj() * v[0] + v[3].conj() * v[1];
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        match self.mode {
            Mode::Linear => Ok(None),
            Mode::Regularized => {
                let denom = det.norm() + self.params.lambda * n2;
                Ok(Some(if denom == 0.0 { C64::new(0.0, 0.0) } else { det.conj() / denom }))
            }
            Mode::Exact => {
                let threshold = DEFAULT_NODE_EPS * n2;
                if !(det.norm() > threshold) {
                    return Err(EvolutionError::Spinor(SpinorError::NodalPoint { n: det.norm(), threshold }));
                }
                Ok(Some(det.conj() / det.norm()))
            }
        }
    }

    /// `exp(-i B τ)` with `B = [[0, w*], [w, 0]]` acting on `(ξ, η)`.
    fn apply_block(v: &[C64; 4], w: C64, tau: f64) -> [C64; 4] {
        let a = w.norm();
        let c = (a * tau).cos();
        let s = if a == 0.0 { tau } else { (a * tau).sin() / a };
        let mi_s = -I * s;
        [
            v[0] * c + mi_s * w.conj() * v[2],
            v[1] * c + mi_s * w.conj() * v[3],
            v[2] * c + mi_s * w * v[0],
            v[3] * c + mi_s * w * v[1],
        ]
    }

    /// Pointwise flow of `i ∂_0 φ̂ = m (z - 1) φ e3` with `z` frozen at its
    /// midpoint value, which keeps the substep second order and unitary.
    fn nonlinear_substep(&self, data: &mut [Paravector], tau: f64) -> Result<(), EvolutionError> {
        if self.mode == Mode::Linear || self.params.m == 0.0 {
            return Ok(());
        }
        let m = self.params.m;
        for p in data.iter_mut() {
            let v = to_c4(p);
            let Some(z0) = self.source_z(&v)? else { return Ok(()) };
            let half = Self::apply_block(&v, (z0 - 1.0) * m, tau / 2.0);
            let z_mid = self.source_z(&half)?.unwrap_or(z0);
            *p = from_c4(&Self::apply_block(&v, (z_mid - 1.0) * m, tau));
        }
        Ok(())
    }

    /// Exact Fourier-space propagator of the linear part for constant `A`.
    fn linear_exact(&self, data: &mut [Paravector], dt: f64) {
        let grid = self.diff.grid;
        let a = self.pot.constant_value().unwrap_or(Paravector::ZERO).re_coeffs();
        let q = self.params.q;
        let m = self.params.m;
        let mut comps: [Vec<C64>; 4] = [0, 1, 2, 3].map(|_| Vec::with_capacity(data.len()));
        for p in data.iter() {
            let v = to_c4(p);
            for c in 0..4 {
                comps[c].push(v[c]);
            }
        }
        let fft = self.diff.fft();
        for c in comps.iter_mut() {
            fft.forward(c);
        }
        let kv = self.diff.wavenumbers();
        let phase = C64::from_polar(1.0, -q * a[0] * dt);
        for idx in 0..data.len() {
            let i = grid.unravel(idx);
            let kx = kv[0][i[0]] - q * a[1];
            let ky = kv[1][i[1]] - q * a[2];
            let kz = kv[2][i[2]] - q * a[3];
            let omega = (m * m + kx * kx + ky * ky + kz * kz).sqrt();
            let c = (omega * dt).cos();
            let s = if omega == 0.0 { dt } else { (omega * dt).sin() / omega };
            let (x1, x2, e1, e2) = (comps[0][idx], comps[1][idx], comps[2][idx], comps[3][idx]);
            let kp = C64::new(kx, ky);
            let km = C64::new(kx, -ky);
            // H' = [[σ·K, m], [m, -σ·K]]
            let h = [
                x1 * kz + km * x2 + e1 * m,
                kp * x1 - x2 * kz + e2 * m,
                x1 * m - (e1 * kz + km * e2),
                x2 * m - (kp * e1 - e2 * kz),
            ];
            let old = [x1, x2, e1, e2];
            for c4 in 0..4 {
                comps[c4][idx] = phase * (old[c4] * c - I * s * h[c4]);
            }
        }
        for c in comps.iter_mut() {
            fft.inverse(c);
        }
        for (idx, p) in data.iter_mut().enumerate() {
            *p = from_c4(&[comps[0][idx], comps[1][idx], comps[2][idx], comps[3][idx]]);
        }
    }

    fn rk4(&self, data: &mut [Paravector], dt: f64, linear_only: bool) -> Result<(), EvolutionError> {
        let f = |y: &[Paravector]| {
            time_derivative(&self.diff, y, &self.pot, &self.params, self.mode, linear_only)
                .map_err(EvolutionError::Spinor)
        };
        let axpy = |y: &[Paravector], k: &[Paravector], h: f64| -> Vec<Paravector> {
            y.iter().zip(k).map(|(a, b)| *a + b.scale(h)).collect()
        };
        let k1 = f(data)?;
        let k2 = f(&axpy(data, &k1, dt / 2.0))?;
        let k3 = f(&axpy(data, &k2, dt / 2.0))?;
        let k4 = f(&axpy(data, &k3, dt))?;
        for i in 0..data.len() {
            data[i] += (k1[i] + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i]).scale(dt / 6.0);
        }
        Ok(())
    }
}
