//! 2×2 complex matrix representation, used as an independent oracle for
//! the paravector product and involutions.

use std::ops::Mul;

use super::{Paravector, C64, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2C {
    /// Row-major `[[a, b], [c, d]]`.
    pub m: [[C64; 2]; 2],
}

impl Matrix2C {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    /// `e_0 ↦ 1`, `e_k ↦ σ_k`.
    pub fn from_paravector(p: &Paravector) -> Self {
        let [c0, c1, c2, c3] = p.c;
        Self::new(c0 + c3, c1 - I * c2, c1 + I * c2, c0 - c3)
    }

    pub fn to_paravector(&self) -> Paravector {
        let [[a, b], [c, d]] = self.m;
        Paravector::new((a + d) * 0.5, (c + b) * 0.5, (c - b) / (I * 2.0), (a - d) * 0.5)
    }

    pub fn matmul(&self, o: &Matrix2C) -> Matrix2C {
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        Matrix2C { m: r }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix2C {
        let [[a, b], [c, d]] = self.m;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    /// Adjugate; equals `bar` in the paravector picture.
    pub fn adjugate(&self) -> Matrix2C {
        let [[a, b], [c, d]] = self.m;
        Self::new(d, -b, -c, a)
    }

    pub fn det(&self) -> C64 {
        let [[a, b], [c, d]] = self.m;
        a * d - b * c
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }
}

impl Mul for Matrix2C {
    type Output = Matrix2C;
    fn mul(self, o: Matrix2C) -> Matrix2C {
        self.matmul(&o)
    }
}
