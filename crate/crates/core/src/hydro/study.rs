use std::time::Instant;

use super::{window_residuals, HydroContext, HydroError, Law, LawResidual, Sector, Stencil};
use crate::clifford::Paravector;
use crate::evolution::{evolve, DerivativeKind, Grid, PotentialField, SchemeConfig, SpinorField};
use crate::spinor::{Mode, PhysicsParams};

/// Residuals at or below this are treated as converged to round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Simultaneous space-time refinement: at each `n` the time step is
/// `cfl · dx`, rounded so that `t_center` is an exact step count.
#[derive(Debug, Clone)]
pub struct RefinementSpec {
    pub extent: [f64; 3],
    pub ns: Vec<usize>,
    pub params: PhysicsParams,
    pub mode: Mode,
    pub derivative: DerivativeKind,
    pub potential: Paravector,
    pub cfl: f64,
    /// Centre of the time window the laws are evaluated on.
    pub t_center: f64,
    pub stencil: Stencil,
    pub laws: Vec<Law>,
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub residuals: Vec<LawResidual>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub law: Law,
    pub sector: Option<Sector>,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub coarse: f64,
    pub fine: f64,
    pub order: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RefinementReport {
    pub nominal: f64,
    pub levels: Vec<LevelResult>,
    pub rows: Vec<OrderRow>,
}

impl RefinementReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

impl OrderRow {
    pub fn sector_label(&self) -> &'static str {
        self.sector.map_or("-", Sector::label)
    }
}

/// Evolves `init(grid)` on each level and compares relative `L²` residuals
/// of consecutive levels. A pair passes when the measured order is at least
/// `nominal - 0.3`, or when the fine residual is already at round-off.
pub fn refinement_study(
    spec: &RefinementSpec,
    init: impl Fn(Grid) -> SpinorField,
) -> Result<RefinementReport, HydroError> {
    let half = spec.stencil.points() / 2;
    if !(spec.t_center > 0.0 && spec.cfl > 0.0) {
        return Err(HydroError::Evolution(crate::evolution::EvolutionError::InvalidConfig(
            "refinement needs t_center > 0 and cfl > 0".into(),
        )));
    }
    let mut levels = vec![];
    for &n in &spec.ns {
        let clock = Instant::now();
        let grid = Grid::new([n; 3], spec.extent)?;
        let k0 = ((spec.t_center / (spec.cfl * grid.min_spacing())).round() as usize).max(half);
        let dt = spec.t_center / k0 as f64;
        let steps = k0 + half;
        let scheme = SchemeConfig { derivative: spec.derivative, ..SchemeConfig::new(dt * steps as f64, spec.mode) }
            .with_dt(dt);
        let pot = PotentialField::Constant(spec.potential);
        let mut window = vec![];
        evolve(init(grid), pot.clone(), spec.params, &scheme, 1, |f, log| {
            if log.step + half >= k0 {
                window.push(f.clone());
            }
        })?;
        let ctx = HydroContext::new(grid, pot, spec.params, spec.mode, spec.derivative)?;
        let residuals = window_residuals(&ctx, &window, spec.stencil, &spec.laws)?;
        levels.push(LevelResult { n, dt, steps, residuals, seconds: clock.elapsed().as_secs_f64() });
    }
    let nominal = spec.stencil.order().min(2.0);
    let mut rows = vec![];
    for pair in levels.windows(2) {
        let (c, f) = (&pair[0], &pair[1]);
        let ratio = c.dt / f.dt;
        for (rc, rf) in c.residuals.iter().zip(&f.residuals) {
            let (coarse, fine) = (rc.l2_rel(), rf.l2_rel());
            let order = (coarse / fine).ln() / ratio.ln();
            let pass = fine <= ROUNDOFF_FLOOR || order >= nominal - 0.3;
            rows.push(OrderRow {
                law: rc.law,
                sector: rc.sector,
                n_coarse: c.n,
                n_fine: f.n,
                coarse,
                fine,
                order,
                pass,
            });
        }
    }
    Ok(RefinementReport { nominal, levels, rows })
}
