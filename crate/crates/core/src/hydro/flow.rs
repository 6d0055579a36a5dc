use super::{HydroContext, HydroError, Sector};
use crate::evolution::{Grid, SpinorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint {
    /// Curve parameter; the coordinate time for grid-based congruences.
    pub s: f64,
    /// Unwrapped position.
    pub x: [f64; 3],
}

/// Classical RK4 for `dx/ds = f(s, x)`. `f` returns `None` outside its
/// domain, which ends the integration with [`HydroError::LeftDomain`].
pub fn integrate_flowline(
    f: impl Fn(f64, [f64; 3]) -> Option<[f64; 3]>,
    x0: [f64; 3],
    s0: f64,
    h: f64,
    steps: usize,
) -> Result<Vec<FlowPoint>, HydroError> {
    let eval = |s: f64, x: [f64; 3]| f(s, x).ok_or(HydroError::LeftDomain { t: s, x });
    let add = |x: [f64; 3], k: [f64; 3], c: f64| [x[0] + c * k[0], x[1] + c * k[1], x[2] + c * k[2]];
    let mut x = x0;
    let mut out = vec![FlowPoint { s: s0, x }];
    for i in 0..steps {
        let s = s0 + i as f64 * h;
        let k1 = eval(s, x)?;
        let k2 = eval(s + h / 2.0, add(x, k1, h / 2.0))?;
        let k3 = eval(s + h / 2.0, add(x, k2, h / 2.0))?;
        let k4 = eval(s + h, add(x, k3, h))?;
        for a in 0..3 {
            x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        out.push(FlowPoint { s: s0 + (i + 1) as f64 * h, x });
    }
    Ok(out)
}

fn lagrange4(f: f64) -> [f64; 4] {
    [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ]
}

/// Velocity samples on a grid at a sequence of times, interpolated
/// tricubically (periodic) in space and linearly in time. A single sample
/// is treated as stationary.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    grid: Grid,
    times: Vec<f64>,
    fields: Vec<Vec<Option<[f64; 3]>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Congruence {
    /// `dx/dt = v` of a chiral sector.
    Chiral(Sector),
    /// `dx/dt = J^k / J^0`.
    Pilot,
}

impl Congruence {
    pub fn label(self) -> &'static str {
        match self {
            Congruence::Chiral(s) => s.label(),
            Congruence::Pilot => "P",
        }
    }
}

impl VelocityGrid {
    pub fn new(grid: Grid, times: Vec<f64>, fields: Vec<Vec<Option<[f64; 3]>>>) -> Result<Self, HydroError> {
        if times.is_empty() {
            return Err(HydroError::InsufficientSnapshots { need: 1, got: 0 });
        }
        if times.len() != fields.len() || fields.iter().any(|f| f.len() != grid.len()) {
            return Err(HydroError::GridMismatch);
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HydroError::NonUniformWindow);
        }
        Ok(Self { grid, times, fields })
    }

    pub fn from_snapshots(
        ctx: &HydroContext,
        snapshots: &[SpinorField],
        congruence: Congruence,
    ) -> Result<Self, HydroError> {
        let mut times = vec![];
        let mut fields = vec![];
        for snap in snapshots {
            let diag = ctx.snapshot(snap)?;
            let field = match congruence {
                Congruence::Chiral(s) => ctx.hydro_fields(&diag, s).into_iter().map(|h| h.map(|h| h.v)).collect(),
                Congruence::Pilot => {
                    let mean = diag.d.iter().map(|d| d[0][0]).sum::<f64>() / diag.d.len() as f64;
                    let eps = ctx.mask_rel * mean;
                    diag.d
                        .iter()
                        .map(|d| {
                            let j = d[0];
                            (j[0] > eps).then(|| [j[1] / j[0], j[2] / j[0], j[3] / j[0]])
                        })
                        .collect()
                }
            };
            times.push(snap.t);
            fields.push(field);
        }
        Self::new(ctx.grid(), times, fields)
    }

    pub fn time_span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn spatial(&self, f: &[Option<[f64; 3]>], x: [f64; 3]) -> Option<[f64; 3]> {
        let h = self.grid.spacing();
        let mut base = [0isize; 3];
        let mut w = [[0.0; 4]; 3];
        for a in 0..3 {
            let u = x[a] / h[a];
            let fl = u.floor();
            base[a] = fl as isize - 1;
            w[a] = lagrange4(u - fl);
        }
        let n = self.grid.n.map(|k| k as isize);
        let wrap = |i: isize, a: usize| (((i % n[a]) + n[a]) % n[a]) as usize;
        let mut out = [0.0; 3];
        for i in 0..4 {
            let ix = wrap(base[0] + i as isize, 0);
            for j in 0..4 {
                let iy = wrap(base[1] + j as isize, 1);
                let wij = w[0][i] * w[1][j];
                for k in 0..4 {
                    let iz = wrap(base[2] + k as isize, 2);
                    let v = f[self.grid.idx(ix, iy, iz)]?;
                    let c = wij * w[2][k];
                    for a in 0..3 {
                        out[a] += c * v[a];
                    }
                }
            }
        }
        Some(out)
    }

    /// `None` if any stencil point is masked or `t` lies outside the
    /// sampled time span.
    pub fn sample(&self, t: f64, x: [f64; 3]) -> Option<[f64; 3]> {
        if self.times.len() == 1 {
            return self.spatial(&self.fields[0], x);
        }
        let (t0, t1) = self.time_span();
        let tol = 1e-12 * (t1 - t0);
        if t < t0 - tol || t > t1 + tol {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        let r = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let a = self.spatial(&self.fields[k - 1], x)?;
        let b = self.spatial(&self.fields[k], x)?;
        Some([0, 1, 2].map(|i| (1.0 - r) * a[i] + r * b[i]))
    }
}

#[derive(Debug, Clone)]
pub struct Flowlines {
    pub congruence: Congruence,
    pub lines: Vec<Vec<FlowPoint>>,
}

impl Flowlines {
    /// Integrates one line from each seed over `[t0, t1]` using `steps`
    /// RK4 steps.
    pub fn trace(
        vel: &VelocityGrid,
        congruence: Congruence,
        seeds: &[[f64; 3]],
        (t0, t1): (f64, f64),
        steps: usize,
    ) -> Result<Self, HydroError> {
        let steps = steps.max(1);
        let h = (t1 - t0) / steps as f64;
        let lines = seeds
            .iter()
            .map(|&x0| integrate_flowline(|t, x| vel.sample(t, x), x0, t0, h, steps))
            .collect::<Result<_, _>>()?;
        Ok(Self { congruence, lines })
    }
}
