use serde::{Deserialize, Serialize};

use super::{minkowski, tetrode_point_alt, HydroContext, HydroError, HydroPoint, Sector, SnapshotDiag};
use crate::clifford::{levi_civita_raised, ETA};
use crate::evolution::{Grid, SpinorField};

/// Central time-difference stencil over a window of snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    #[default]
    Three,
    Five,
}

impl Stencil {
    pub fn points(self) -> usize {
        match self {
            Stencil::Three => 3,
            Stencil::Five => 5,
        }
    }

    fn weights(self) -> &'static [f64] {
        match self {
            Stencil::Three => &[-0.5, 0.0, 0.5],
            Stencil::Five => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        }
    }

    /// Order of accuracy.
    pub fn order(self) -> f64 {
        match self {
            Stencil::Three => 2.0,
            Stencil::Five => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// `∂_μ D_κ^μ` against its coupling source.
    CurrentConservation,
    /// Divergence of the Tétrode tensor against the field strength of `Γ`.
    EmBalance,
    /// Evolution of the chiral current through the antisymmetric stress.
    ChiralCurrentEvolution,
    /// Spatial stress in terms of `ρ`, `v` and `p`.
    StressExpression,
    Continuity,
    MomentumDirection,
    MomentumBalance,
    Quantization,
    Lightlike,
    TetrodeTrace,
    TetrodeForms,
    MomentumProjection,
    Orthogonality,
}

impl Law {
    pub const ALL: [Law; 13] = [
        Law::CurrentConservation,
        Law::EmBalance,
        Law::ChiralCurrentEvolution,
        Law::StressExpression,
        Law::Continuity,
        Law::MomentumDirection,
        Law::MomentumBalance,
        Law::Quantization,
        Law::Lightlike,
        Law::TetrodeTrace,
        Law::TetrodeForms,
        Law::MomentumProjection,
        Law::Orthogonality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::CurrentConservation => "current_conservation",
            Law::EmBalance => "em_balance",
            Law::ChiralCurrentEvolution => "chiral_current_evolution",
            Law::StressExpression => "stress_expression",
            Law::Continuity => "continuity",
            Law::MomentumDirection => "momentum_direction",
            Law::MomentumBalance => "momentum_balance",
            Law::Quantization => "quantization",
            Law::Lightlike => "lightlike",
            Law::TetrodeTrace => "tetrode_trace",
            Law::TetrodeForms => "tetrode_forms",
            Law::MomentumProjection => "momentum_projection",
            Law::Orthogonality => "orthogonality",
        }
    }

    /// Whether the law involves a time derivative across snapshots.
    pub fn needs_window(self) -> bool {
        matches!(
            self,
            Law::CurrentConservation
                | Law::EmBalance
                | Law::ChiralCurrentEvolution
                | Law::Continuity
                | Law::MomentumDirection
                | Law::MomentumBalance
        )
    }
}

/// Norms of one law's residual over the unmasked grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawResidual {
    pub law: Law,
    pub sector: Option<Sector>,
    /// Discrete `L²` norm of the pointwise Euclidean residual.
    pub l2: f64,
    pub linf: f64,
    /// `L²` norm of the stacked individual terms, floored by a reference
    /// magnitude so that laws whose terms all vanish are not divided by zero.
    pub scale: f64,
    pub linf_scale: f64,
    pub masked_fraction: f64,
}

impl LawResidual {
    pub fn l2_rel(&self) -> f64 {
        if self.scale > 0.0 { self.l2 / self.scale } else { self.l2 }
    }

    pub fn linf_rel(&self) -> f64 {
        if self.linf_scale > 0.0 { self.linf / self.linf_scale } else { self.linf }
    }

    pub fn sector_label(&self) -> &'static str {
        self.sector.map_or("-", Sector::label)
    }
}

/// Per-point accumulator: residual components and the squared terms.
struct Terms {
    r: [f64; 16],
    s2: f64,
    smax: f64,
}

impl Terms {
    fn new() -> Self {
        Self { r: [0.0; 16], s2: 0.0, smax: 0.0 }
    }

    fn add(&mut self, comp: usize, x: f64) {
        self.r[comp] += x;
        self.s2 += x * x;
        self.smax = self.smax.max(x.abs());
    }
}

/// Reference magnitudes used to floor the scale.
#[derive(Debug, Clone, Copy)]
struct Reference {
    l2: f64,
    linf: f64,
}

fn reduce(
    law: Law,
    sector: Option<Sector>,
    grid: &Grid,
    reference: Reference,
    mut f: impl FnMut(usize, &mut Terms) -> bool,
) -> LawResidual {
    let dv = grid.cell_volume();
    let (mut r2, mut s2, mut linf, mut smax, mut masked) = (0.0, 0.0, 0.0f64, 0.0f64, 0usize);
    for i in 0..grid.len() {
        let mut t = Terms::new();
        if !f(i, &mut t) {
            masked += 1;
            continue;
        }
        let rr: f64 = t.r.iter().map(|x| x * x).sum();
        r2 += rr;
        s2 += t.s2;
        linf = linf.max(rr.sqrt());
        smax = smax.max(t.smax);
    }
    LawResidual {
        law,
        sector,
        l2: (r2 * dv).sqrt(),
        linf,
        scale: (s2 * dv).sqrt().max(reference.l2),
        linf_scale: smax.max(reference.linf),
        masked_fraction: masked as f64 / grid.len() as f64,
    }
}

fn density_reference(grid: &Grid, d: &[[[f64; 4]; 4]], power: i32) -> Reference {
    let dv = grid.cell_volume();
    let vals = d.iter().map(|x| x[0][0].abs().powi(power));
    let (mut s, mut m) = (0.0, 0.0f64);
    for v in vals {
        s += v * v;
        m = m.max(v);
    }
    Reference { l2: (s * dv).sqrt(), linf: m }
}

/// Time derivatives at the centre of a window plus the full centre snapshot.
pub struct WindowData {
    pub center: SnapshotDiag,
    pub dtau: f64,
    /// `∂_0 D_κ^0`.
    pub dt_d0: Vec<[f64; 4]>,
    /// `∂_0 Γ_ν`.
    pub dt_gamma: Vec<[f64; 4]>,
    /// `∂_0 j^μ` per sector.
    pub dt_j: [Vec<[f64; 4]>; 2],
    /// `∂_0 T_ν^0` per sector.
    pub dt_t0: [Vec<[f64; 4]>; 2],
    /// Nodal anywhere in the window.
    pub nodal: Vec<bool>,
}

impl WindowData {
    /// Uses the `stencil.points()` snapshots centred on the middle of
    /// `snapshots`, which must be uniformly spaced in time.
    pub fn build(ctx: &HydroContext, snapshots: &[SpinorField], stencil: Stencil) -> Result<Self, HydroError> {
        let k = stencil.points();
        if snapshots.len() < k {
            return Err(HydroError::InsufficientSnapshots { need: k, got: snapshots.len() });
        }
        let mid = snapshots.len() / 2;
        let lo = mid.min(snapshots.len() - 1 - k / 2) - k / 2;
        let win = &snapshots[lo..lo + k];
        let grid = ctx.grid();
        if win.iter().any(|s| s.grid != grid) {
            return Err(HydroError::GridMismatch);
        }
        let dtau = win[1].t - win[0].t;
        if !(dtau > 0.0) || win.windows(2).any(|w| ((w[1].t - w[0].t) - dtau).abs() > 1e-9 * dtau) {
            return Err(HydroError::NonUniformWindow);
        }
        let n = grid.len();
        let zero = || vec![[0.0; 4]; n];
        let mut out = WindowData {
            center: ctx.snapshot(&win[k / 2])?,
            dtau,
            dt_d0: zero(),
            dt_gamma: zero(),
            dt_j: [zero(), zero()],
            dt_t0: [zero(), zero()],
            nodal: vec![false; n],
        };
        out.nodal.clone_from(&out.center.nodal);
        for (snap, &w) in win.iter().zip(stencil.weights()) {
            if w == 0.0 {
                continue;
            }
            let c = w / dtau;
            let diag = ctx.snapshot(snap)?;
            for i in 0..n {
                out.nodal[i] |= diag.nodal[i];
                for mu in 0..4 {
                    out.dt_d0[i][mu] += c * diag.d[i][mu][0];
                    out.dt_gamma[i][mu] += c * diag.gamma[i][mu];
                    for s in 0..2 {
                        out.dt_j[s][i][mu] += c * diag.sectors[s].j[i][mu];
                        out.dt_t0[s][i][mu] += c * diag.sectors[s].t[i][mu][0];
                    }
                }
            }
        }
        Ok(out)
    }
}

fn div_of(ctx: &HydroContext, f: impl Fn(usize) -> [f64; 3]) -> Vec<f64> {
    let v: Vec<[f64; 3]> = (0..ctx.grid().len()).map(f).collect();
    ctx.diff.divergence(&v)
}

/// `∂_k f_ν` for four scalar fields: `out[k][i][ν]`.
fn grad4(ctx: &HydroContext, f: &[[f64; 4]]) -> [Vec<[f64; 4]>; 3] {
    let n = f.len();
    let mut out = [0, 1, 2].map(|_| vec![[0.0; 4]; n]);
    for nu in 0..4 {
        let comp: Vec<f64> = f.iter().map(|x| x[nu]).collect();
        let g = ctx.diff.gradient_real(&comp);
        for k in 0..3 {
            for i in 0..n {
                out[k][i][nu] = g[k][i];
            }
        }
    }
    out
}

/// `∂_k f^o` for a 3-vector field: `out[k][i][o]`.
fn grad3(ctx: &HydroContext, f: &[[f64; 3]]) -> [Vec<[f64; 3]>; 3] {
    let n = f.len();
    let mut out = [0, 1, 2].map(|_| vec![[0.0; 3]; n]);
    for o in 0..3 {
        let comp: Vec<f64> = f.iter().map(|x| x[o]).collect();
        let g = ctx.diff.gradient_real(&comp);
        for k in 0..3 {
            for i in 0..n {
                out[k][i][o] = g[k][i];
            }
        }
    }
    out
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `G_μν = ∂_μ Γ_ν - ∂_ν Γ_μ` at one point.
fn field_strength(dt_gamma: &[f64; 4], dgamma: [&[f64; 4]; 3]) -> [[f64; 4]; 4] {
    let d = |mu: usize, nu: usize| if mu == 0 { dt_gamma[nu] } else { dgamma[mu - 1][nu] };
    let mut g = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            g[mu][nu] = d(mu, nu) - d(nu, mu);
        }
    }
    g
}

struct Hydro {
    pts: Vec<Option<HydroPoint>>,
    rho: Vec<f64>,
    v: Vec<[f64; 3]>,
}

fn hydro(ctx: &HydroContext, diag: &SnapshotDiag, sector: Sector) -> Hydro {
    let pts = ctx.hydro_fields(diag, sector);
    let rho = pts.iter().map(|p| p.map_or(0.0, |h| h.rho)).collect();
    let v = pts.iter().map(|p| p.map_or([0.0; 3], |h| h.v)).collect();
    Hydro { pts, rho, v }
}

fn law_current_conservation(ctx: &HydroContext, w: &WindowData) -> LawResidual {
    let c = &w.center;
    let grid = ctx.grid();
    let div: Vec<Vec<f64>> = (0..4).map(|k| div_of(ctx, |i| [c.d[i][k][1], c.d[i][k][2], c.d[i][k][3]])).collect();
    reduce(Law::CurrentConservation, None, &grid, density_reference(&grid, &c.d, 1), |i, t| {
        if w.nodal[i] {
            return false;
        }
        let g = &c.gamma[i];
        let gd = |k: usize| (0..4).map(|mu| g[mu] * c.d[i][k][mu]).sum::<f64>();
        for k in 0..4 {
            t.add(k, w.dt_d0[i][k]);
            t.add(k, div[k][i]);
        }
        t.add(1, -2.0 * gd(2));
        t.add(2, 2.0 * gd(1));
        true
    })
}

fn law_em_balance(ctx: &HydroContext, w: &WindowData, sector: Sector) -> LawResidual {
    let c = &w.center;
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    let s = sector.sign();
    let dgamma = grad4(ctx, &c.gamma);
    let div: Vec<Vec<f64>> = (0..4).map(|nu| div_of(ctx, |i| [sf.t[i][nu][1], sf.t[i][nu][2], sf.t[i][nu][3]])).collect();
    reduce(Law::EmBalance, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        if w.nodal[i] {
            return false;
        }
        let g = field_strength(&w.dt_gamma[i], [&dgamma[0][i], &dgamma[1][i], &dgamma[2][i]]);
        for nu in 0..4 {
            t.add(nu, w.dt_t0[sector.index()][i][nu]);
            t.add(nu, div[nu][i]);
            let src: f64 = (0..4).map(|mu| g[mu][nu] * sf.j[i][mu]).sum();
            t.add(nu, -s * src);
        }
        true
    })
}

fn law_chiral_current(ctx: &HydroContext, w: &WindowData, sector: Sector) -> LawResidual {
    let c = &w.center;
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    let j0: Vec<f64> = sf.j.iter().map(|j| j[0]).collect();
    let gj0 = ctx.diff.gradient_real(&j0);
    reduce(Law::ChiralCurrentEvolution, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        for k in 1..4 {
            t.add(k, w.dt_j[sector.index()][i][k]);
            t.add(k, gj0[k - 1][i]);
            let mut e = 0.0;
            for l in 1..4 {
                for n in 1..4 {
                    e += levi_civita_raised(2, k, l, n) * sf.t[i][l][n];
                }
            }
            t.add(k, 2.0 * e);
        }
        true
    })
}

fn law_stress_expression(ctx: &HydroContext, c: &SnapshotDiag, sector: Sector) -> LawResidual {
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    let h = hydro(ctx, c, sector);
    let dv = grad3(ctx, &h.v);
    reduce(Law::StressExpression, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        let Some(hp) = h.pts[i] else { return false };
        let v_low = hp.v.map(|x| -x);
        for n in 1..4 {
            for l in 1..4 {
                let comp = 3 * (n - 1) + (l - 1);
                t.add(comp, sf.t[i][n][l]);
                t.add(comp, -hp.p[n - 1] * hp.v[l - 1]);
                let mut e = 0.0;
                for k in 1..4 {
                    for o in 1..4 {
                        e += levi_civita_raised(2, l, k, o) * v_low[k - 1] * dv[n - 1][i][o - 1];
                    }
                }
                t.add(comp, 0.5 * hp.rho * e);
            }
        }
        true
    })
}

fn law_continuity(ctx: &HydroContext, w: &WindowData, sector: Sector) -> LawResidual {
    let c = &w.center;
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    let div = div_of(ctx, |i| [sf.j[i][1], sf.j[i][2], sf.j[i][3]]);
    reduce(Law::Continuity, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        t.add(0, w.dt_j[sector.index()][i][0]);
        t.add(0, div[i]);
        true
    })
}

fn law_momentum_direction(ctx: &HydroContext, w: &WindowData, sector: Sector) -> LawResidual {
    let c = &w.center;
    let grid = ctx.grid();
    let h = hydro(ctx, c, sector);
    let grad_rho = ctx.diff.gradient_real(&h.rho);
    let dv = grad3(ctx, &h.v);
    let flux: Vec<Vec<f64>> = (0..3).map(|k| div_of(ctx, |i| h.v[i].map(|vl| h.rho[i] * h.v[i][k] * vl))).collect();
    reduce(Law::MomentumDirection, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        let Some(hp) = h.pts[i] else { return false };
        let v = hp.v;
        let gr = [grad_rho[0][i], grad_rho[1][i], grad_rho[2][i]];
        // curl v
        let curl = [dv[1][i][2] - dv[2][i][1], dv[2][i][0] - dv[0][i][2], dv[0][i][1] - dv[1][i][0]];
        let p_bold = hp.p.map(|x| -x);
        let a = cross(v, cross(v, gr));
        let b = cross(p_bold, v);
        let cc = cross(curl, v);
        for k in 0..3 {
            t.add(k, w.dt_j[sector.index()][i][k + 1]);
            t.add(k, flux[k][i]);
            t.add(k, -a[k]);
            t.add(k, -2.0 * b[k]);
            t.add(k, -2.0 * hp.rho * cc[k]);
        }
        true
    })
}

fn law_momentum_balance(ctx: &HydroContext, w: &WindowData, sector: Sector) -> LawResidual {
    let c = &w.center;
    let grid = ctx.grid();
    let s = sector.sign();
    let h = hydro(ctx, c, sector);
    let dv = grad3(ctx, &h.v);
    let dgamma = grad4(ctx, &c.gamma);
    let mut adv = vec![];
    let mut twist = vec![];
    for n in 0..3 {
        adv.push(div_of(ctx, |i| {
            let pb = h.pts[i].map_or(0.0, |hp| -hp.p[n]);
            h.v[i].map(|vl| pb * vl)
        }));
        twist.push(div_of(ctx, |i| cross(h.v[i], dv[n][i]).map(|x| h.rho[i] * x)));
    }
    reduce(Law::MomentumBalance, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        let Some(hp) = h.pts[i] else { return false };
        if w.nodal[i] {
            return false;
        }
        let g = field_strength(&w.dt_gamma[i], [&dgamma[0][i], &dgamma[1][i], &dgamma[2][i]]);
        let v4 = [1.0, hp.v[0], hp.v[1], hp.v[2]];
        for n in 1..4 {
            t.add(n - 1, -w.dt_t0[sector.index()][i][n]);
            t.add(n - 1, adv[n - 1][i]);
            t.add(n - 1, -0.5 * twist[n - 1][i]);
            let src: f64 = (0..4).map(|k| g[n][k] * v4[k]).sum();
            t.add(n - 1, -s * hp.rho * src);
        }
        true
    })
}

fn quantization_core(
    grid: &Grid,
    mass: f64,
    sector: Sector,
    w: &[Option<[f64; 3]>],
    v: &[[f64; 3]],
    dw: impl Fn(usize, usize) -> [f64; 3],
    dv: impl Fn(usize, usize) -> [f64; 3],
) -> LawResidual {
    // Terms are gradients of a wavenumber-like field; size them by
    // (|w| + |m| + k_box) k_box so a field with w = 0 is not divided by zero.
    let kmin = 2.0 * std::f64::consts::PI / grid.extent.iter().cloned().fold(0.0, f64::max);
    let wn = |x: &Option<[f64; 3]>| x.map_or(0.0, |x| (dot(x, x).sqrt() + mass.abs() + kmin) * kmin);
    let reference = Reference {
        l2: (w.iter().map(|x| wn(x).powi(2)).sum::<f64>() * grid.cell_volume()).sqrt(),
        linf: w.iter().map(wn).fold(0.0, f64::max),
    };
    reduce(Law::Quantization, Some(sector), grid, reference, |i, t| {
        if w[i].is_none() {
            return false;
        }
        let dvi = [dv(0, i), dv(1, i), dv(2, i)];
        let dwi = [dw(0, i), dw(1, i), dw(2, i)];
        for a in 1..4 {
            for m in 1..4 {
                for n in 1..4 {
                    let e = levi_civita_raised(3, a, m, n);
                    if e == 0.0 {
                        continue;
                    }
                    t.add(a - 1, e * dwi[m - 1][n - 1]);
                    t.add(a - 1, e * 0.25 * dot(v[i], cross(dvi[m - 1], dvi[n - 1])));
                }
            }
        }
        true
    })
}

/// Quantization residual from raw hydro fields: lowered `u_n`, `v^k` and
/// the spatial lowered `Γ_n`, all on `grid`; `None` marks masked points.
pub fn quantization_residual_fields(
    ctx: &HydroContext,
    u: &[Option<[f64; 3]>],
    v: &[[f64; 3]],
    gamma: &[[f64; 3]],
    sector: Sector,
) -> LawResidual {
    let s = sector.sign();
    let w: Vec<Option<[f64; 3]>> =
        u.iter().zip(gamma).map(|(u, g)| u.map(|u| [0, 1, 2].map(|n| u[n] - s * g[n]))).collect();
    let dw = grad3(ctx, &w.iter().map(|x| x.unwrap_or([0.0; 3])).collect::<Vec<_>>());
    let dv = grad3(ctx, v);
    quantization_core(&ctx.grid(), ctx.params.m, sector, &w, v, |m, i| dw[m][i], |m, i| dv[m][i])
}

/// On spinor data the derivatives are taken of the smooth products `ρ w`
/// and `j` and divided by `ρ` pointwise, which avoids spreading round-off
/// from low-density regions through the spectral derivative.
fn law_quantization(ctx: &HydroContext, c: &SnapshotDiag, sector: Sector) -> LawResidual {
    let sf = &c.sectors[sector.index()];
    let s = sector.sign();
    let h = hydro(ctx, c, sector);
    let rw: Vec<[f64; 3]> = (0..sf.j.len())
        .map(|i| [1, 2, 3].map(|n| sf.t[i][n][0] - s * c.gamma[i][n] * sf.j[i][0]))
        .collect();
    let drw = grad3(ctx, &rw);
    let dj = grad4(ctx, &sf.j);
    let w: Vec<Option<[f64; 3]>> = h.pts.iter().zip(&rw).map(|(p, x)| p.map(|hp| x.map(|y| y / hp.rho))).collect();
    let dw = |m: usize, i: usize| {
        let (Some(wi), rho) = (w[i], h.rho[i]) else { return [0.0; 3] };
        [0, 1, 2].map(|n| (drw[m][i][n] - wi[n] * dj[m][i][0]) / rho)
    };
    let dv = |m: usize, i: usize| {
        let rho = h.rho[i];
        if rho == 0.0 {
            return [0.0; 3];
        }
        [0, 1, 2].map(|o| (dj[m][i][o + 1] - h.v[i][o] * dj[m][i][0]) / rho)
    };
    quantization_core(&ctx.grid(), ctx.params.m, sector, &w, &h.v, dw, dv)
}

fn law_lightlike(ctx: &HydroContext, c: &SnapshotDiag, sector: Sector) -> LawResidual {
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    reduce(Law::Lightlike, Some(sector), &grid, density_reference(&grid, &c.d, 2), |i, t| {
        let j = &sf.j[i];
        t.add(0, j[0] * j[0]);
        for k in 1..4 {
            t.add(0, -j[k] * j[k]);
        }
        true
    })
}

fn law_trace(ctx: &HydroContext, c: &SnapshotDiag, sector: Sector) -> LawResidual {
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    reduce(Law::TetrodeTrace, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        if c.nodal[i] {
            return false;
        }
        for mu in 0..4 {
            t.add(0, sf.t[i][mu][mu]);
        }
        true
    })
}

fn law_projection(ctx: &HydroContext, c: &SnapshotDiag, sector: Sector) -> LawResidual {
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    let h = hydro(ctx, c, sector);
    reduce(Law::MomentumProjection, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        let Some(hp) = h.pts[i] else { return false };
        for n in 1..4 {
            t.add(n - 1, hp.p[n - 1]);
            for k in 1..4 {
                t.add(n - 1, -hp.v[k - 1] * sf.t[i][n][k]);
            }
        }
        true
    })
}

fn law_orthogonality(ctx: &HydroContext, c: &SnapshotDiag) -> LawResidual {
    let grid = ctx.grid();
    reduce(Law::Orthogonality, None, &grid, density_reference(&grid, &c.d, 2), |i, t| {
        let n2 = c.n[i] * c.n[i];
        for mu in 0..4 {
            for nu in 0..4 {
                t.add(4 * mu + nu, minkowski(&c.d[i][mu], &c.d[i][nu]));
                if mu == nu {
                    t.add(4 * mu + nu, -n2 * ETA[mu]);
                }
            }
        }
        true
    })
}

fn law_tetrode_forms(ctx: &HydroContext, field: &SpinorField, sector: Sector) -> Result<LawResidual, HydroError> {
    let jets = ctx.jets(field)?;
    let c = ctx.snapshot_from_jets(field.t, &jets);
    let sf = &c.sectors[sector.index()];
    let grid = ctx.grid();
    Ok(reduce(Law::TetrodeForms, Some(sector), &grid, density_reference(&grid, &c.d, 1), |i, t| {
        if c.nodal[i] {
            return false;
        }
        let dphi = [jets.dphi[0][i], jets.dphi[1][i], jets.dphi[2][i], jets.dphi[3][i]];
        let (alt, _) = tetrode_point_alt(&jets.phi[i], &dphi, &c.gamma[i], sector);
        for nu in 0..4 {
            for mu in 0..4 {
                t.add(4 * nu + mu, sf.t[i][nu][mu]);
                t.add(4 * nu + mu, -alt[nu][mu]);
            }
        }
        true
    }))
}

fn single_snapshot(ctx: &HydroContext, c: &SnapshotDiag, law: Law) -> Vec<LawResidual> {
    match law {
        Law::Orthogonality => vec![law_orthogonality(ctx, c)],
        _ => Sector::BOTH
            .iter()
            .map(|&s| match law {
                Law::StressExpression => law_stress_expression(ctx, c, s),
                Law::Quantization => law_quantization(ctx, c, s),
                Law::Lightlike => law_lightlike(ctx, c, s),
                Law::TetrodeTrace => law_trace(ctx, c, s),
                Law::MomentumProjection => law_projection(ctx, c, s),
                _ => unreachable!("not a single-snapshot law"),
            })
            .collect(),
    }
}

fn windowed(ctx: &HydroContext, w: &WindowData, law: Law) -> Vec<LawResidual> {
    if law == Law::CurrentConservation {
        return vec![law_current_conservation(ctx, w)];
    }
    Sector::BOTH
        .iter()
        .map(|&s| match law {
            Law::EmBalance => law_em_balance(ctx, w, s),
            Law::ChiralCurrentEvolution => law_chiral_current(ctx, w, s),
            Law::Continuity => law_continuity(ctx, w, s),
            Law::MomentumDirection => law_momentum_direction(ctx, w, s),
            Law::MomentumBalance => law_momentum_balance(ctx, w, s),
            _ => unreachable!("not a windowed law"),
        })
        .collect()
}

/// Residuals of `laws` at the centre of a snapshot window. Laws without a
/// time derivative are evaluated on the centre snapshot alone.
pub fn window_residuals(
    ctx: &HydroContext,
    snapshots: &[SpinorField],
    stencil: Stencil,
    laws: &[Law],
) -> Result<Vec<LawResidual>, HydroError> {
    let need_window = laws.iter().any(|l| l.needs_window());
    let mut out = vec![];
    if need_window {
        let w = WindowData::build(ctx, snapshots, stencil)?;
        for &law in laws {
            match law {
                Law::TetrodeForms => {}
                l if l.needs_window() => out.extend(windowed(ctx, &w, l)),
                l => out.extend(single_snapshot(ctx, &w.center, l)),
            }
        }
    } else {
        if snapshots.is_empty() {
            return Err(HydroError::InsufficientSnapshots { need: 1, got: 0 });
        }
        let c = ctx.snapshot(&snapshots[snapshots.len() / 2])?;
        for &law in laws {
            if law != Law::TetrodeForms {
                out.extend(single_snapshot(ctx, &c, law));
            }
        }
    }
    if laws.contains(&Law::TetrodeForms) {
        let f = &snapshots[snapshots.len() / 2];
        for s in Sector::BOTH {
            out.push(law_tetrode_forms(ctx, f, s)?);
        }
    }
    Ok(out)
}

/// Conservation of the four currents `D_κ`.
pub fn conservation_residuals(
    ctx: &HydroContext,
    snapshots: &[SpinorField],
    stencil: Stencil,
) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, snapshots, stencil, &[Law::CurrentConservation])
}

pub fn em_divergence_residual(
    ctx: &HydroContext,
    snapshots: &[SpinorField],
    stencil: Stencil,
) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, snapshots, stencil, &[Law::EmBalance])
}

pub fn current_evolution_residual(
    ctx: &HydroContext,
    snapshots: &[SpinorField],
    stencil: Stencil,
) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, snapshots, stencil, &[Law::ChiralCurrentEvolution])
}

pub fn t_expression_check(ctx: &HydroContext, field: &SpinorField) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, std::slice::from_ref(field), Stencil::Three, &[Law::StressExpression])
}

/// Continuity, momentum-direction and momentum-balance equations.
pub fn hydro_residuals(
    ctx: &HydroContext,
    snapshots: &[SpinorField],
    stencil: Stencil,
) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, snapshots, stencil, &[Law::Continuity, Law::MomentumDirection, Law::MomentumBalance])
}

pub fn quantization_residual(ctx: &HydroContext, field: &SpinorField) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(ctx, std::slice::from_ref(field), Stencil::Three, &[Law::Quantization])
}

/// Lightlike currents, Tétrode trace and both tensor forms, the projection
/// `-p_n = v_k T_n^k` and orthogonality of the `D_κ`.
pub fn structural_residuals(ctx: &HydroContext, field: &SpinorField) -> Result<Vec<LawResidual>, HydroError> {
    window_residuals(
        ctx,
        std::slice::from_ref(field),
        Stencil::Three,
        &[Law::Lightlike, Law::TetrodeTrace, Law::TetrodeForms, Law::MomentumProjection, Law::Orthogonality],
    )
}
