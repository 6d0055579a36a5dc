use serde::{Deserialize, Serialize};

use super::EvolutionError;
use crate::clifford::Paravector;

/// Periodic box `[0, L_x) × [0, L_y) × [0, L_z)` sampled at `n` points per
/// axis. Linear index is row-major with `z` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: [usize; 3],
    pub extent: [f64; 3],
}

impl Grid {
    pub fn new(n: [usize; 3], extent: [f64; 3]) -> Result<Self, EvolutionError> {
        let g = Self { n, extent };
        g.validate()?;
        Ok(g)
    }

    /// Cube with `n` points and side `l`.
    pub fn cube(n: usize, l: f64) -> Result<Self, EvolutionError> {
        Self::new([n; 3], [l; 3])
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        for a in 0..3 {
            if self.n[a] < 4 {
                return Err(EvolutionError::InvalidConfig(format!("grid needs n >= 4 per axis, got {:?}", self.n)));
            }
            if !(self.extent[a] > 0.0 && self.extent[a].is_finite()) {
                return Err(EvolutionError::InvalidConfig(format!("extent must be positive, got {:?}", self.extent)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.extent[a] / self.n[a] as f64)
    }

    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        h[0].min(h[1]).min(h[2])
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn volume(&self) -> f64 {
        self.extent[0] * self.extent[1] * self.extent[2]
    }

    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n[1] + iy) * self.n[2] + iz
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], iz]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        let h = self.spacing();
        [i[0] as f64 * h[0], i[1] as f64 * h[1], i[2] as f64 * h[2]]
    }

    /// Index of the neighbour shifted by `d` along `axis` (periodic).
    pub fn shift(&self, idx: usize, axis: usize, d: isize) -> usize {
        let mut i = self.unravel(idx);
        let n = self.n[axis] as isize;
        i[axis] = (((i[axis] as isize + d) % n + n) % n) as usize;
        self.idx(i[0], i[1], i[2])
    }
}

/// Samples of `φ` on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid,
    pub data: Vec<Paravector>,
    pub t: f64,
}

impl SpinorField {
    pub fn zeros(grid: Grid, t: f64) -> Self {
        Self { grid, data: vec![Paravector::ZERO; grid.len()], t }
    }

    pub fn from_fn(grid: Grid, t: f64, f: impl Fn([f64; 3]) -> Paravector) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, data, t }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Paravector::is_finite)
    }

    pub fn max_abs_diff(&self, o: &SpinorField) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Grid::new([4, 5, 6], [1.0, 2.0, 3.0]).unwrap();
        for i in 0..g.len() {
            let [a, b, c] = g.unravel(i);
            assert_eq!(g.idx(a, b, c), i);
        }
        assert_eq!(g.idx(0, 0, 1), 1);
        assert_eq!(g.idx(0, 1, 0), 6);
        assert_eq!(g.shift(g.idx(3, 0, 0), 0, 1), g.idx(0, 0, 0));
        assert_eq!(g.shift(g.idx(0, 0, 0), 2, -2), g.idx(0, 0, 4));
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid::new([3, 8, 8], [1.0; 3]).is_err());
        assert!(Grid::new([8, 8, 8], [1.0, 0.0, 1.0]).is_err());
    }
}
