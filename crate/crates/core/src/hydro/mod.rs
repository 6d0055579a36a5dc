//! Currents, the Tétrode energy-momentum tensor, chiral hydrodynamic fields
//! and residuals of the balance laws they satisfy.
//!
//! Sectors: the right sector uses the projector `Q = P` with current
//! `j = φ bar(P) φ†` and coupling sign `s = +1`; the left sector uses
//! `Q = bar(P)`, `j = φ P φ†`, `s = -1`. In both cases
//!
//! ```text
//! T_ν^μ = Re( Q bar(φ) e^μ (-i ∂_ν φ̂ + s Γ_ν φ̂) Q )_0
//! ```
//!
//! Index conventions are those of [`crate::clifford`]: Γ_ν and p_n carry
//! lower indices, currents and `v` upper ones.

mod flow;
mod laws;
mod study;

pub use study::{refinement_study, LevelResult, OrderRow, RefinementReport, RefinementSpec, ROUNDOFF_FLOOR};
pub use flow::{integrate_flowline, Congruence, FlowPoint, Flowlines, VelocityGrid};
pub use laws::{
    conservation_residuals, current_evolution_residual, em_divergence_residual, hydro_residuals,
    quantization_residual, quantization_residual_fields, structural_residuals, t_expression_check, window_residuals,
    Law, LawResidual, Stencil, WindowData,
};

use thiserror::Error;

use crate::clifford::{levi_civita_raised, projector_p, projector_p_bar, Paravector, C64};
use crate::evolution::{hamiltonian_apply, DerivativeKind, Differentiator, EvolutionError, Grid, PotentialField, SpinorField};
use crate::spinor::{dirac_current, nonlinearity_n, Mode, PhysicsParams, DEFAULT_NODE_EPS};

/// Default relative density threshold below which hydro fields are masked.
pub const DEFAULT_MASK_REL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HydroError {
    #[error("need at least {need} snapshots, got {got}")]
    InsufficientSnapshots { need: usize, got: usize },
    #[error("snapshot window is not uniformly spaced in time")]
    NonUniformWindow,
    #[error("snapshots do not share one grid")]
    GridMismatch,
    #[error("hydrodynamic diagnostics need a nonlinear mode; linear mode has no real Γ")]
    UnsupportedMode,
    #[error("flowline left the unmasked region at t = {t}, x = {x:?}")]
    LeftDomain { t: f64, x: [f64; 3] },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Right,
    Left,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Right, Sector::Left];

    pub fn sign(self) -> f64 {
        match self {
            Sector::Right => 1.0,
            Sector::Left => -1.0,
        }
    }

    /// The projector `Q` sandwiching the tensor.
    pub fn projector(self) -> Paravector {
        match self {
            Sector::Right => projector_p(),
            Sector::Left => projector_p_bar(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sector::Right => "R",
            Sector::Left => "L",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sector::Right => 0,
            Sector::Left => 1,
        }
    }
}

/// `D_κ = φ e_κ φ†`, as upper coefficients `D[κ][μ]`.
pub fn currents(phi: &Paravector) -> [[f64; 4]; 4] {
    let pd = phi.dagger();
    [0, 1, 2, 3].map(|k| (*phi * Paravector::basis(k) * pd).re_coeffs())
}

/// Chiral current of a sector, `φ bar(Q) φ†`.
pub fn chiral_current(phi: &Paravector, sector: Sector) -> [f64; 4] {
    (*phi * sector.projector().bar() * phi.dagger()).re_coeffs()
}

/// `|j_μ j^μ| / (j^0)²`, or `None` when `j^0 = 0`.
pub fn lightlike_residual(j: &[f64; 4]) -> Option<f64> {
    if j[0] <= 0.0 {
        return None;
    }
    let s = j[0] * j[0] - j[1] * j[1] - j[2] * j[2] - j[3] * j[3];
    Some(s.abs() / (j[0] * j[0]))
}

/// Minkowski product of two upper-index 4-vectors.
pub fn minkowski(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// Effective coupling `Γ` (upper coefficients) of the nonlinear equation in
/// `mode`: `qA + m J / (N + λ‖φ‖²)` when regularized, `qA + m J / N` when
/// exact. `None` at nodal points in exact mode or in linear mode.
pub fn gamma_eff(phi: &Paravector, a: &Paravector, params: &PhysicsParams, mode: Mode) -> Option<[f64; 4]> {
    let j = dirac_current(phi);
    let n = nonlinearity_n(phi);
    let denom = match mode {
        Mode::Linear => return None,
        Mode::Regularized => n + params.lambda * phi.norm_sq(),
        Mode::Exact => {
            if !(n > DEFAULT_NODE_EPS * phi.norm_sq()) {
                return None;
            }
            n
        }
    };
    let v = if denom > 0.0 { j.scale(1.0 / denom) } else { Paravector::ZERO };
    let g = a.scale(params.q) + v.scale(params.m);
    Some(g.re_coeffs())
}

/// Lower the index of a 4-vector.
pub fn lower(v: [f64; 4]) -> [f64; 4] {
    [v[0], -v[1], -v[2], -v[3]]
}

/// `T[ν][μ] = T_ν^μ` at one point from `φ`, its partials `∂_ν φ` and the
/// lowered coupling `Γ_ν`.
pub fn tetrode_point(phi: &Paravector, dphi: &[Paravector; 4], gamma_low: &[f64; 4], sector: Sector) -> [[f64; 4]; 4] {
    let q = sector.projector();
    let s = sector.sign();
    let phi_hat = phi.hat();
    let left = q * phi.bar();
    let mut t = [[0.0; 4]; 4];
    for nu in 0..4 {
        let inner = dphi[nu].hat().scale_c(C64::new(0.0, -1.0)) + phi_hat.scale(s * gamma_low[nu]);
        let right = inner * q;
        for mu in 0..4 {
            t[nu][mu] = (left * Paravector::dual_basis(mu) * right).c[0].re;
        }
    }
    t
}

/// The same tensor through the form
/// `-(i/2)(e^μ((∂_ν φ̂) Q bar(φ) - φ̂ Q ∂_ν bar(φ)))_0 + s Γ_ν j^μ`.
/// Returns the tensor and the largest imaginary part encountered.
pub fn tetrode_point_alt(
    phi: &Paravector,
    dphi: &[Paravector; 4],
    gamma_low: &[f64; 4],
    sector: Sector,
) -> ([[f64; 4]; 4], f64) {
    let q = sector.projector();
    let s = sector.sign();
    let j = chiral_current(phi, sector);
    let phi_hat = phi.hat();
    let qb = q * phi.bar();
    let mut t = [[0.0; 4]; 4];
    let mut max_im: f64 = 0.0;
    for nu in 0..4 {
        let y = dphi[nu].hat() * qb - phi_hat * q * dphi[nu].bar();
        for mu in 0..4 {
            let z = (Paravector::dual_basis(mu) * y).c[0] * C64::new(0.0, -0.5);
            max_im = max_im.max(z.im.abs());
            t[nu][mu] = z.re + s * gamma_low[nu] * j[mu];
        }
    }
    (t, max_im)
}

/// Trace `T_μ^μ`.
pub fn trace(t: &[[f64; 4]; 4]) -> f64 {
    t[0][0] + t[1][1] + t[2][2] + t[3][3]
}

/// Pointwise hydrodynamic variables of one sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroPoint {
    pub rho: f64,
    /// `v^k = j^k / j^0`.
    pub v: [f64; 3],
    /// `p_n = T_n^0` (lower index).
    pub p: [f64; 3],
    /// `u_n = p_n / ρ`.
    pub u: [f64; 3],
}

pub fn hydro_point(j: &[f64; 4], t: &[[f64; 4]; 4]) -> Option<HydroPoint> {
    let rho = j[0];
    if !(rho > 0.0) {
        return None;
    }
    let v = [j[1] / rho, j[2] / rho, j[3] / rho];
    let p = [t[1][0], t[2][0], t[3][0]];
    Some(HydroPoint { rho, v, p, u: p.map(|x| x / rho) })
}

/// `∂_n v^o` from the product rule, `out[n-1][o-1]`.
pub fn velocity_gradient(phi: &Paravector, dphi: &[Paravector; 4], sector: Sector) -> Option<[[f64; 3]; 3]> {
    let qb = sector.projector().bar();
    let j = chiral_current(phi, sector);
    if !(j[0] > 0.0) {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for n in 1..4 {
        let dj = (dphi[n] * qb * phi.dagger() + *phi * qb * dphi[n].dagger()).re_coeffs();
        for o in 1..4 {
            out[n - 1][o - 1] = (dj[o] * j[0] - j[o] * dj[0]) / (j[0] * j[0]);
        }
    }
    Some(out)
}

/// Largest component of `T_n^l - p_n v^l + ½ ρ ε^{lk}_o v_k ∂_n v^o` at one
/// point, relative to `max |T_ν^μ|`.
pub fn stress_expression_point(
    phi: &Paravector,
    dphi: &[Paravector; 4],
    gamma_low: &[f64; 4],
    sector: Sector,
) -> Option<f64> {
    let t = tetrode_point(phi, dphi, gamma_low, sector);
    let h = hydro_point(&chiral_current(phi, sector), &t)?;
    let dv = velocity_gradient(phi, dphi, sector)?;
    let v_low = h.v.map(|x| -x);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in 1..4 {
        for l in 1..4 {
            let mut e = 0.0;
            for k in 1..4 {
                for o in 1..4 {
                    e += levi_civita_raised(2, l, k, o) * v_low[k - 1] * dv[n - 1][o - 1];
                }
            }
            let r = t[n][l] - h.p[n - 1] * h.v[l - 1] + 0.5 * h.rho * e;
            worst = worst.max(r.abs());
        }
    }
    for row in &t {
        for x in row {
            scale = scale.max(x.abs());
        }
    }
    Some(if scale > 0.0 { worst / scale } else { worst })
}

/// `φ` together with its spacetime partials on every grid point.
#[derive(Debug, Clone)]
pub struct Jets {
    pub phi: Vec<Paravector>,
    pub dphi: [Vec<Paravector>; 4],
    /// True where the equation (and hence `∂_0 φ` and `Γ`) is undefined.
    pub nodal: Vec<bool>,
}

/// Per-sector fields of one snapshot.
#[derive(Debug, Clone)]
pub struct SectorFields {
    pub sector: Sector,
    pub j: Vec<[f64; 4]>,
    pub t: Vec<[[f64; 4]; 4]>,
}

/// Everything the balance laws need from one snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotDiag {
    pub t: f64,
    /// Lowered `Γ_ν`.
    pub gamma: Vec<[f64; 4]>,
    pub nodal: Vec<bool>,
    /// `D[κ][μ]`.
    pub d: Vec<[[f64; 4]; 4]>,
    pub n: Vec<f64>,
    pub sectors: [SectorFields; 2],
}

/// Shared setup for field-level diagnostics.
pub struct HydroContext {
    pub diff: Differentiator,
    pub pot: PotentialField,
    pub params: PhysicsParams,
    pub mode: Mode,
    pub mask_rel: f64,
}

impl HydroContext {
    pub fn new(
        grid: Grid,
        pot: PotentialField,
        params: PhysicsParams,
        mode: Mode,
        derivative: DerivativeKind,
    ) -> Result<Self, HydroError> {
        if mode == Mode::Linear {
            return Err(HydroError::UnsupportedMode);
        }
        pot.validate(&grid)?;
        params.validate(mode).map_err(EvolutionError::Spinor)?;
        Ok(Self { diff: Differentiator::new(grid, derivative), pot, params, mode, mask_rel: DEFAULT_MASK_REL })
    }

    pub fn grid(&self) -> Grid {
        self.diff.grid
    }

    /// Spatial partials from the derivative operator and `∂_0 φ` from the
    /// equation itself.
    pub fn jets(&self, field: &SpinorField) -> Result<Jets, HydroError> {
        if field.grid != self.grid() {
            return Err(HydroError::GridMismatch);
        }
        let phi = field.data.clone();
        let [dx, dy, dz] = self.diff.gradient(&phi);
        let phi_hat: Vec<Paravector> = phi.iter().map(Paravector::hat).collect();
        let h = hamiltonian_apply(&self.diff, &phi_hat, &self.pot, &self.params);
        let m = self.params.m;
        let e3 = Paravector::basis(3);
        let mut nodal = vec![false; phi.len()];
        let dt: Vec<Paravector> = phi
            .iter()
            .zip(h)
            .enumerate()
            .map(|(i, (p, hx))| {
                let det = p.det();
                let z = match self.mode {
                    Mode::Regularized => {
                        let denom = det.norm() + self.params.lambda * p.norm_sq();
                        if denom > 0.0 {
                            det.conj() / denom
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }
                    _ => {
                        if det.norm() > DEFAULT_NODE_EPS * p.norm_sq() {
                            det.conj() / det.norm()
                        } else {
                            nodal[i] = true;
                            C64::new(0.0, 0.0)
                        }
                    }
                };
                let x = hx + (*p * e3).scale_c((z - 1.0) * m);
                x.scale_c(C64::new(0.0, -1.0)).hat()
            })
            .collect();
        Ok(Jets { phi, dphi: [dt, dx, dy, dz], nodal })
    }

    pub fn snapshot(&self, field: &SpinorField) -> Result<SnapshotDiag, HydroError> {
        let jets = self.jets(field)?;
        Ok(self.snapshot_from_jets(field.t, &jets))
    }

    pub fn snapshot_from_jets(&self, t: f64, jets: &Jets) -> SnapshotDiag {
        let len = jets.phi.len();
        let mut nodal = jets.nodal.clone();
        let mut gamma = Vec::with_capacity(len);
        let mut d = Vec::with_capacity(len);
        let mut n = Vec::with_capacity(len);
        let mut sectors = Sector::BOTH.map(|s| SectorFields { sector: s, j: Vec::with_capacity(len), t: Vec::with_capacity(len) });
        for i in 0..len {
            let phi = &jets.phi[i];
            let g = match gamma_eff(phi, &self.pot.at(i), &self.params, self.mode) {
                Some(g) => lower(g),
                None => {
                    nodal[i] = true;
                    [0.0; 4]
                }
            };
            gamma.push(g);
            d.push(currents(phi));
            n.push(nonlinearity_n(phi));
            let dphi = [jets.dphi[0][i], jets.dphi[1][i], jets.dphi[2][i], jets.dphi[3][i]];
            for sf in sectors.iter_mut() {
                sf.j.push(chiral_current(phi, sf.sector));
                sf.t.push(tetrode_point(phi, &dphi, &g, sf.sector));
            }
        }
        SnapshotDiag { t, gamma, nodal, d, n, sectors }
    }

    /// Hydro variables of one sector with the density mask applied.
    pub fn hydro_fields(&self, diag: &SnapshotDiag, sector: Sector) -> Vec<Option<HydroPoint>> {
        let sf = &diag.sectors[sector.index()];
        let mean = sf.j.iter().map(|j| j[0]).sum::<f64>() / sf.j.len() as f64;
        let eps = self.mask_rel * mean;
        sf.j
            .iter()
            .zip(&sf.t)
            .zip(&diag.nodal)
            .map(|((j, t), &nodal)| if nodal || !(j[0] > eps) { None } else { hydro_point(j, t) })
            .collect()
    }
}
