//! Time stepping of `i ∂_0 φ̂ = H φ̂ + m F(φ) e3` on a periodic grid.
//!
//! The default scheme is Strang splitting: half a pointwise nonlinear step,
//! a full linear step (exact in Fourier space for constant `A` and the
//! spectral derivative, RK4 otherwise), then another half nonlinear step.

mod deriv;
mod grid;
mod hamiltonian;
mod stepper;

pub use deriv::{wavenumbers, DerivativeKind, Differentiator, Fft3};
pub use grid::{Grid, SpinorField};
pub use hamiltonian::{from_c4, hamiltonian_apply, source_factor, time_derivative, to_c4, PotentialField};
pub use stepper::{Method, SchemeConfig, Stepper};

use thiserror::Error;

use crate::clifford::Paravector;
use crate::spinor::{Mode, PhysicsParams, SpinorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("non-finite coefficient after step at t = {t}")]
    BlowUp { t: f64 },
    #[error("growth bound violated at t = {t}: ‖φ‖ / (‖φ0‖ e^(2mt)) = {ratio}")]
    GrowthViolation { t: f64, ratio: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spinor(#[from] SpinorError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
}

pub fn l2_norm(field: &SpinorField) -> f64 {
    l2_of(&field.data, field.grid.cell_volume())
}

fn l2_of(data: &[Paravector], dv: f64) -> f64 {
    (data.iter().map(Paravector::norm_sq).sum::<f64>() * dv).sqrt()
}

/// Discrete `L²` and `H¹` norms with the spectral derivative.
pub fn norms(field: &SpinorField) -> Norms {
    norms_with(field, &Differentiator::new(field.grid, DerivativeKind::Spectral))
}

pub fn norms_with(field: &SpinorField, diff: &Differentiator) -> Norms {
    let dv = field.grid.cell_volume();
    let l2 = l2_of(&field.data, dv);
    let grad = diff.gradient(&field.data);
    let g2: f64 = grad.iter().map(|g| l2_of(g, dv).powi(2)).sum();
    Norms { l2, h1: (l2 * l2 + g2).sqrt() }
}

/// One line of the structured progress log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub step: usize,
    pub t: f64,
    pub l2: f64,
    /// Only computed on snapshot steps.
    pub h1: Option<f64>,
    /// `‖φ(t)‖ / (‖φ0‖ e^{2mt})`.
    pub envelope_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSummary {
    pub steps: usize,
    pub dt: f64,
    pub l2_initial: f64,
    pub l2_final: f64,
    pub max_envelope_ratio: f64,
    pub logs: Vec<StepLog>,
    pub warnings: Vec<String>,
}

/// Runs the scheme to `t_end`. `observer` sees the field at step 0, every
/// `stride` steps and at the final step.
pub fn evolve(
    field0: SpinorField,
    pot: PotentialField,
    params: PhysicsParams,
    scheme: &SchemeConfig,
    stride: usize,
    mut observer: impl FnMut(&SpinorField, &StepLog),
) -> Result<(SpinorField, EvolveSummary), EvolutionError> {
    let grid = field0.grid;
    let warnings = scheme.validate(&grid)?;
    if field0.data.len() != grid.len() || !field0.is_finite() {
        return Err(EvolutionError::InvalidConfig("initial field is malformed or non-finite".into()));
    }
    let stride = stride.max(1);
    let stepper = Stepper::new(grid, pot, params, scheme)?;
    let (steps, dt) = scheme.steps_for(&grid);
    let t0 = field0.t;
    let l2_0 = l2_norm(&field0);
    let mut field = field0;
    let mut logs = vec![];
    let mut max_ratio: f64 = 0.0;

    let record = |field: &SpinorField, step: usize, snap: bool| {
        let l2 = l2_norm(field);
        let envelope = l2_0 * (2.0 * params.m * (field.t - t0)).exp();
        let ratio = if envelope > 0.0 { l2 / envelope } else if l2 == 0.0 { 0.0 } else { f64::INFINITY };
        let h1 = snap.then(|| norms_with(field, stepper.differentiator()).h1);
        StepLog { step, t: field.t, l2, h1, envelope_ratio: ratio }
    };

    let log = record(&field, 0, true);
    observer(&field, &log);
    max_ratio = max_ratio.max(log.envelope_ratio);
    logs.push(log);
    for step in 1..=steps {
        stepper.step(&mut field, dt)?;
        if step == steps {
            // Land exactly on t_end regardless of accumulated rounding.
            field.t = t0 + scheme.t_end;
        }
        let snap = step % stride == 0 || step == steps;
        let log = record(&field, step, snap);
        max_ratio = max_ratio.max(log.envelope_ratio);
        if log.envelope_ratio > 1.0 + scheme.growth_tol {
            return Err(EvolutionError::GrowthViolation { t: field.t, ratio: log.envelope_ratio });
        }
        if snap {
            observer(&field, &log);
        }
        logs.push(log);
    }
    let summary = EvolveSummary {
        steps,
        dt,
        l2_initial: l2_0,
        l2_final: l2_norm(&field),
        max_envelope_ratio: max_ratio,
        logs,
        warnings,
    };
    Ok((field, summary))
}

/// [`evolve`] keeping every emitted snapshot.
pub fn evolve_collect(
    field0: SpinorField,
    pot: PotentialField,
    params: PhysicsParams,
    scheme: &SchemeConfig,
    stride: usize,
) -> Result<(Vec<SpinorField>, EvolveSummary), EvolutionError> {
    let mut snaps = vec![];
    let (_, summary) = evolve(field0, pot, params, scheme, stride, |f, _| snaps.push(f.clone()))?;
    Ok((snaps, summary))
}

/// Periodic bump `exp(-(L²/(2π²σ²))(1 - cos(2π(x - c)/L)))` per axis, which
/// matches a Gaussian of width `σ` near its centre.
pub fn periodic_gaussian(grid: &Grid, center: [f64; 3], sigma: f64, x: [f64; 3]) -> f64 {
    let mut e = 0.0;
    for a in 0..3 {
        let l = grid.extent[a];
        let k = 2.0 * std::f64::consts::PI / l;
        e += (1.0 - (k * (x[a] - center[a])).cos()) / (k * k * sigma * sigma);
    }
    (-e).exp()
}

/// Plane-wave field sampled on the grid at time `t`.
pub fn plane_wave_field(
    grid: Grid,
    spec: &crate::spinor::PlaneWaveSpec,
    params: &PhysicsParams,
    mode: Mode,
    t: f64,
) -> Result<SpinorField, SpinorError> {
    let mw = spec.phase_mass(params, mode);
    spec.v()?;
    Ok(SpinorField::from_fn(grid, t, |x| {
        crate::spinor::plane_wave_eval(spec, mw, [t, x[0], x[1], x[2]]).expect("V checked above")
    }))
}

#[cfg(test)]
mod tests;
