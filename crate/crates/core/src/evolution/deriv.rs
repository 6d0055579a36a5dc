use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::clifford::{Paravector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeKind {
    #[default]
    Spectral,
    Central4,
}

/// Separable 3D FFT over a [`Grid`].
pub struct Fft3 {
    n: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n;
        Self {
            n,
            fwd: n.map(|k| planner.plan_fft_forward(k)),
            inv: n.map(|k| planner.plan_fft_inverse(k)),
        }
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, true);
    }

    /// Normalized inverse.
    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, false);
        let s = 1.0 / data.len() as f64;
        for x in data.iter_mut() {
            *x *= s;
        }
    }

    fn run(&self, data: &mut [C64], forward: bool) {
        let [nx, ny, nz] = self.n;
        let plans = if forward { &self.fwd } else { &self.inv };
        plans[2].process(data);
        let mut buf = vec![C64::new(0.0, 0.0); data.len()];
        // y lines
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    buf[(ix * nz + iz) * ny + iy] = data[(ix * ny + iy) * nz + iz];
                }
            }
        }
        plans[1].process(&mut buf);
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    data[(ix * ny + iy) * nz + iz] = buf[(ix * nz + iz) * ny + iy];
                }
            }
        }
        // x lines
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    buf[(iy * nz + iz) * nx + ix] = data[(ix * ny + iy) * nz + iz];
                }
            }
        }
        plans[0].process(&mut buf);
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    data[(ix * ny + iy) * nz + iz] = buf[(iy * nz + iz) * nx + ix];
                }
            }
        }
    }
}

/// Angular wavenumbers of one axis in FFT order, Nyquist set to zero.
pub fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if n % 2 == 0 && i == n / 2 {
                0.0
            } else if i <= n / 2 {
                2.0 * PI * i as f64 / l
            } else {
                2.0 * PI * (i as f64 - n as f64) / l
            }
        })
        .collect()
}

/// Spatial partial derivatives on a periodic grid.
pub struct Differentiator {
    pub grid: Grid,
    pub kind: DerivativeKind,
    fft: Fft3,
    k: [Vec<f64>; 3],
}

impl Differentiator {
    pub fn new(grid: Grid, kind: DerivativeKind) -> Self {
        Self {
            grid,
            kind,
            fft: Fft3::new(&grid),
            k: [0, 1, 2].map(|a| wavenumbers(grid.n[a], grid.extent[a])),
        }
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn wavenumbers(&self) -> &[Vec<f64>; 3] {
        &self.k
    }

    /// `[∂_x f, ∂_y f, ∂_z f]` of a complex scalar field.
    pub fn gradient_c(&self, f: &[C64]) -> [Vec<C64>; 3] {
        match self.kind {
            DerivativeKind::Spectral => {
                let mut hat = f.to_vec();
                self.fft.forward(&mut hat);
                let g = self.grid;
                [0, 1, 2].map(|axis| {
                    let mut d = hat.clone();
                    for (idx, x) in d.iter_mut().enumerate() {
                        let i = g.unravel(idx);
                        *x *= C64::new(0.0, self.k[axis][i[axis]]);
                    }
                    self.fft.inverse(&mut d);
                    d
                })
            }
            DerivativeKind::Central4 => [0, 1, 2].map(|axis| self.central4(f, axis)),
        }
    }

    fn central4<T>(&self, f: &[T], axis: usize) -> Vec<T>
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let g = self.grid;
        let h = g.spacing()[axis];
        (0..f.len())
            .map(|i| {
                let p1 = f[g.shift(i, axis, 1)];
                let p2 = f[g.shift(i, axis, 2)];
                let m1 = f[g.shift(i, axis, -1)];
                let m2 = f[g.shift(i, axis, -2)];
                ((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * h))
            })
            .collect()
    }

    pub fn gradient_real(&self, f: &[f64]) -> [Vec<f64>; 3] {
        match self.kind {
            DerivativeKind::Spectral => {
                let c: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
                self.gradient_c(&c).map(|v| v.into_iter().map(|z| z.re).collect())
            }
            DerivativeKind::Central4 => [0, 1, 2].map(|axis| self.central4(f, axis)),
        }
    }

    /// One partial derivative of a real field.
    pub fn partial_real(&self, f: &[f64], axis: usize) -> Vec<f64> {
        match self.kind {
            DerivativeKind::Spectral => {
                let mut d: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
                self.fft.forward(&mut d);
                let g = self.grid;
                for (idx, x) in d.iter_mut().enumerate() {
                    *x *= C64::new(0.0, self.k[axis][g.unravel(idx)[axis]]);
                }
                self.fft.inverse(&mut d);
                d.into_iter().map(|z| z.re).collect()
            }
            DerivativeKind::Central4 => self.central4(f, axis),
        }
    }

    /// `Σ_k ∂_k f_k`.
    pub fn divergence(&self, f: &[[f64; 3]]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for axis in 0..3 {
            let comp: Vec<f64> = f.iter().map(|v| v[axis]).collect();
            for (o, d) in out.iter_mut().zip(self.partial_real(&comp, axis)) {
                *o += d;
            }
        }
        out
    }

    /// `[∂_x φ, ∂_y φ, ∂_z φ]` of a paravector field.
    pub fn gradient(&self, f: &[Paravector]) -> [Vec<Paravector>; 3] {
        let n = f.len();
        let mut out = [0, 1, 2].map(|_| vec![Paravector::ZERO; n]);
        for mu in 0..4 {
            let comp: Vec<C64> = f.iter().map(|p| p.c[mu]).collect();
            let g = self.gradient_c(&comp);
            for axis in 0..3 {
                for (o, v) in out[axis].iter_mut().zip(&g[axis]) {
                    o.c[mu] = *v;
                }
            }
        }
        out
    }
}
