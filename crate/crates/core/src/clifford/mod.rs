//! The space algebra Cl(3) in the paravector basis `{e_0, e_1, e_2, e_3}`
//! over the complex numbers, where the pseudoscalar `e_1 e_2 e_3` plays the
//! role of the imaginary unit.
//!
//! Coefficients are stored with upper indices, `p = p^μ e_μ`. Lowered
//! coefficients follow the Minkowski metric `η = diag(1, -1, -1, -1)`, so
//! `p_0 = p^0` and `p_k = -p^k`.
//!
//! # Index convention for ε
//!
//! Every tensor formula in this crate uses one rule for the Levi-Civita
//! symbol: `ε_{klm}` (all indices down) is the ordinary permutation sign, and
//! raising *any* single index flips the sign. Hence `ε^{kl}_m = ε_{klm}`,
//! `ε^{k}_{lm} = -ε_{klm}` and `ε^{klm} = -ε_{klm}`. The cross product keeps
//! the textbook form `(a × b)^i = ε_{ijk} a^j b^k`. Use [`levi_civita`] and
//! [`levi_civita_raised`]; do not re-derive signs locally.

mod lorentz;
mod matrix;

pub use lorentz::{boost, factor_boost_rotation, lorentz_apply, rotation, LorentzFactor};
pub use matrix::Matrix2C;

use lorentz::exp;

pub mod suite;

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Minkowski metric diagonal.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Default relative threshold for invertibility: `|det p| > ε · ‖p‖²`.
pub const DEFAULT_INV_EPS: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("element is not invertible: |det| = {det_abs:e} below threshold {threshold:e}")]
    NullElement { det_abs: f64, threshold: f64 },
    #[error("boost/rotation factorization is degenerate (l·l† numerically singular)")]
    DegenerateFactor,
    #[error("Lorentz factor must satisfy l·bar(l) = 1, got |det(l) - 1| = {0:e}")]
    NotUnimodular(f64),
}

/// `ε_{klm}` for spatial indices `k, l, m ∈ {1, 2, 3}`.
pub fn levi_civita(k: usize, l: usize, m: usize) -> f64 {
    debug_assert!((1..=3).contains(&k) && (1..=3).contains(&l) && (1..=3).contains(&m));
    match (k, l, m) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// Levi-Civita symbol with `raised` of its three indices raised; each raised
/// index contributes a factor `-1`.
pub fn levi_civita_raised(raised: usize, k: usize, l: usize, m: usize) -> f64 {
    let sign = if raised % 2 == 0 { 1.0 } else { -1.0 };
    sign * levi_civita(k, l, m)
}

/// One element of Cl(3): `c[0] e_0 + c[1] e_1 + c[2] e_2 + c[3] e_3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Paravector {
    pub c: [C64; 4],
}

/// The decompositions of [`Paravector::parts`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parts {
    pub re: Paravector,
    pub im: Paravector,
    pub even: Paravector,
    pub odd: Paravector,
    pub scalar: Paravector,
    pub vector: Paravector,
}

impl Paravector {
    pub const ZERO: Paravector = Paravector { c: [ZERO; 4] };
    pub const ONE: Paravector = Paravector { c: [ONE, ZERO, ZERO, ZERO] };

    pub const fn new(c0: C64, c1: C64, c2: C64, c3: C64) -> Self {
        Self { c: [c0, c1, c2, c3] }
    }

    /// Spacetime vector (all coefficients real).
    pub fn real(c: [f64; 4]) -> Self {
        Self { c: c.map(|x| C64::new(x, 0.0)) }
    }

    /// Basis element `e_μ`.
    pub fn basis(mu: usize) -> Self {
        let mut p = Self::ZERO;
        p.c[mu] = ONE;
        p
    }

    /// Dual basis element `e^μ = η^{μμ} e_μ`.
    pub fn dual_basis(mu: usize) -> Self {
        Self::basis(mu).scale(ETA[mu])
    }

    pub fn scalar(z: C64) -> Self {
        Self { c: [z, ZERO, ZERO, ZERO] }
    }

    /// From the 8 real components `[re c0, im c0, re c1, im c1, ...]`.
    pub fn from_reals(r: [f64; 8]) -> Self {
        Self {
            c: [
                C64::new(r[0], r[1]),
                C64::new(r[2], r[3]),
                C64::new(r[4], r[5]),
                C64::new(r[6], r[7]),
            ],
        }
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let c = &self.c;
        [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im, c[3].re, c[3].im]
    }

    /// Lowered coefficient `p_μ = η_{μμ} p^μ`.
    pub fn lower(&self, mu: usize) -> C64 {
        self.c[mu] * ETA[mu]
    }

    /// Real parts of the coefficients, `[Re p^0, .., Re p^3]`.
    pub fn re_coeffs(&self) -> [f64; 4] {
        self.c.map(|z| z.re)
    }

    /// Real parts of the lowered coefficients.
    pub fn re_lower(&self) -> [f64; 4] {
        let r = self.re_coeffs();
        [r[0], -r[1], -r[2], -r[3]]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.map(|z| z * s) }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { c: self.c.map(|z| z * s) }
    }

    /// Clifford product, from `e_k e_l = δ_{kl} + i ε_{klm} e_m`.
    pub fn prod(&self, q: &Paravector) -> Paravector {
        let [a0, a1, a2, a3] = self.c;
        let [b0, b1, b2, b3] = q.c;
        let s = a0 * b0 + a1 * b1 + a2 * b2 + a3 * b3;
        let x1 = I * (a2 * b3 - a3 * b2);
        let x2 = I * (a3 * b1 - a1 * b3);
        let x3 = I * (a1 * b2 - a2 * b1);
        Paravector::new(
            s,
            a0 * b1 + b0 * a1 + x1,
            a0 * b2 + b0 * a2 + x2,
            a0 * b3 + b0 * a3 + x3,
        )
    }

    /// Complex conjugation `p†`.
    pub fn dagger(&self) -> Self {
        Self { c: self.c.map(|z| z.conj()) }
    }

    /// Spatial reversal `bar(p)`: flips the vector part.
    pub fn bar(&self) -> Self {
        let [c0, c1, c2, c3] = self.c;
        Self::new(c0, -c1, -c2, -c3)
    }

    /// Grade automorphism `hat(p) = bar(p)†`.
    pub fn hat(&self) -> Self {
        let [c0, c1, c2, c3] = self.c;
        Self::new(c0.conj(), -c1.conj(), -c2.conj(), -c3.conj())
    }

    pub fn re(&self) -> Self {
        Self { c: self.c.map(|z| C64::new(z.re, 0.0)) }
    }

    pub fn im(&self) -> Self {
        Self { c: self.c.map(|z| C64::new(z.im, 0.0)) }
    }

    pub fn even(&self) -> Self {
        (*self + self.hat()).scale(0.5)
    }

    pub fn odd(&self) -> Self {
        (*self - self.hat()).scale(0.5)
    }

    /// Scalar part `p_0 = (p + bar(p)) / 2`, which is the coefficient of `e_0`.
    pub fn scalar_part(&self) -> C64 {
        self.c[0]
    }

    pub fn vector_part(&self) -> Self {
        let mut v = *self;
        v.c[0] = ZERO;
        v
    }

    pub fn parts(&self) -> Parts {
        Parts {
            re: self.re(),
            im: self.im(),
            even: self.even(),
            odd: self.odd(),
            scalar: Paravector::scalar(self.scalar_part()),
            vector: self.vector_part(),
        }
    }

    /// `⟨p, q⟩ = (p bar(q))_0`, symmetric and bilinear.
    pub fn scalar_product(&self, q: &Paravector) -> C64 {
        self.c[0] * q.c[0] - self.c[1] * q.c[1] - self.c[2] * q.c[2] - self.c[3] * q.c[3]
    }

    /// `det(p)`, the scalar value of `p bar(p)`.
    pub fn det(&self) -> C64 {
        self.scalar_product(self)
    }

    /// Squared Frobenius norm of the matrix representation, `2 Σ |c_μ|²`.
    pub fn norm_sq(&self) -> f64 {
        2.0 * self.c.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Frobenius norm of the matrix representation.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `p^{-1} = det(p)^{-1} bar(p)` with the default relative threshold.
    pub fn inverse(&self) -> Result<Paravector, AlgebraError> {
        self.inverse_with(DEFAULT_INV_EPS)
    }

    pub fn inverse_with(&self, rel_eps: f64) -> Result<Paravector, AlgebraError> {
        let det = self.det();
        let threshold = rel_eps * self.norm_sq();
        if !(det.norm() > threshold) {
            return Err(AlgebraError::NullElement { det_abs: det.norm(), threshold });
        }
        Ok(self.bar().scale_c(det.inv()))
    }

    /// `-½ Σ_μ e^μ bar(p) e_μ`; reproduces `p`.
    pub fn fierz_expand(&self) -> Paravector {
        let pb = self.bar();
        let mut acc = Paravector::ZERO;
        for mu in 0..4 {
            acc += Paravector::dual_basis(mu).prod(&pb).prod(&Paravector::basis(mu));
        }
        acc.scale(-0.5)
    }

    pub fn to_matrix(&self) -> Matrix2C {
        Matrix2C::from_paravector(self)
    }

    pub fn from_matrix(m: &Matrix2C) -> Paravector {
        m.to_paravector()
    }

    /// Coefficient-wise distance in the Frobenius norm.
    pub fn dist(&self, q: &Paravector) -> f64 {
        (*self - *q).norm()
    }
}

/// The projector `P = ½(1 + e_3)`.
pub fn projector_p() -> Paravector {
    Paravector::real([0.5, 0.0, 0.0, 0.5])
}

/// `bar(P) = ½(1 - e_3)`.
pub fn projector_p_bar() -> Paravector {
    Paravector::real([0.5, 0.0, 0.0, -0.5])
}

/// Coordinates of `p P` in the basis `{P, e_1 P}` of the left ideal.
pub fn ideal_coeffs(p: &Paravector) -> (C64, C64) {
    let [c0, c1, c2, c3] = p.c;
    ((c0 + c3) * 0.5, (c1 + I * c2) * 0.5)
}

impl Add for Paravector {
    type Output = Paravector;
    fn add(self, o: Paravector) -> Paravector {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a += b;
        }
        Paravector { c }
    }
}

impl Sub for Paravector {
    type Output = Paravector;
    fn sub(self, o: Paravector) -> Paravector {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a -= b;
        }
        Paravector { c }
    }
}

impl Neg for Paravector {
    type Output = Paravector;
    fn neg(self) -> Paravector {
        Paravector { c: self.c.map(|z| -z) }
    }
}

impl AddAssign for Paravector {
    fn add_assign(&mut self, o: Paravector) {
        *self = *self + o;
    }
}

impl SubAssign for Paravector {
    fn sub_assign(&mut self, o: Paravector) {
        *self = *self - o;
    }
}

impl Mul for Paravector {
    type Output = Paravector;
    fn mul(self, o: Paravector) -> Paravector {
        Paravector::prod(&self, &o)
    }
}

impl Mul<C64> for Paravector {
    type Output = Paravector;
    fn mul(self, s: C64) -> Paravector {
        self.scale_c(s)
    }
}

impl Mul<f64> for Paravector {
    type Output = Paravector;
    fn mul(self, s: f64) -> Paravector {
        self.scale(s)
    }
}

impl MulAssign<f64> for Paravector {
    fn mul_assign(&mut self, s: f64) {
        *self = self.scale(s);
    }
}

impl serde::Serialize for Paravector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_reals().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Paravector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = <[f64; 8]>::deserialize(d)?;
        Ok(Paravector::from_reals(r))
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(mu: usize) -> Paravector {
        Paravector::basis(mu)
    }

    fn close(a: &Paravector, b: &Paravector, tol: f64) -> bool {
        a.dist(b) <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn e1_e2_is_i_e3() {
        assert_eq!(e(1) * e(2), Paravector::new(ZERO, ZERO, ZERO, I));
        assert_eq!(e(2) * e(1), Paravector::new(ZERO, ZERO, ZERO, -I));
    }

    #[test]
    fn structure_equations_exact() {
        for k in 1..4 {
            for l in 1..4 {
                let anti = e(k) * e(l) + e(l) * e(k);
                let expect = if k == l { Paravector::real([2.0, 0.0, 0.0, 0.0]) } else { Paravector::ZERO };
                assert_eq!(anti, expect, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn pseudoscalar_is_central_imaginary_unit() {
        let i3 = e(1) * e(2) * e(3);
        assert_eq!(i3, Paravector::scalar(I));
        assert_eq!(i3 * i3, Paravector::scalar(-ONE));
        for mu in 0..4 {
            assert_eq!(i3 * e(mu), e(mu) * i3);
        }
    }

    #[test]
    fn identity_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_p(&mut rng);
            assert_eq!(Paravector::ONE * p, p);
            assert_eq!(p * Paravector::ONE, p);
        }
    }

    #[test]
    fn involutions_on_basis() {
        assert_eq!(e(0).bar(), e(0));
        for k in 1..4 {
            assert_eq!(e(k).bar(), -e(k));
            assert_eq!(e(k).hat(), -e(k));
            assert_eq!(e(k).dagger(), e(k));
        }
    }

    #[test]
    fn parts_examples() {
        // p = 1 + e1 + i e2 + i
        let p = Paravector::new(C64::new(1.0, 1.0), ONE, I, ZERO);
        assert_eq!(p.re(), Paravector::real([1.0, 1.0, 0.0, 0.0]));
        for k in 1..4 {
            assert_eq!(e(k).scalar_part(), ZERO);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_p(&mut rng);
            let parts = p.parts();
            assert_eq!(parts.re + parts.im.scale_c(I), p);
            assert_eq!(parts.scalar + parts.vector, p);
            assert!(close(&(parts.even + parts.odd), &p, 1e-15));
            assert_eq!(Paravector::scalar(p.scalar_part()).re(), Paravector::scalar(p.re().scalar_part()));
            assert!(close(&p.hat(), &p.bar().dagger(), 0.0));
        }
    }

    #[test]
    fn scalar_product_metric() {
        for mu in 0..4 {
            for nu in 0..4 {
                let expect = if mu == nu { ETA[mu] } else { 0.0 };
                assert_eq!(e(mu).scalar_product(&e(nu)), C64::new(expect, 0.0));
                let dual = if mu == nu { 1.0 } else { 0.0 };
                assert_eq!(Paravector::dual_basis(mu).scalar_product(&e(nu)), C64::new(dual, 0.0));
            }
        }
        let p = Paravector::real([1.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.scalar_product(&p), ZERO);
    }

    #[test]
    fn det_examples() {
        assert_eq!(e(0).det(), ONE);
        for k in 1..4 {
            assert_eq!(e(k).det(), -ONE);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(e(1).inverse().unwrap(), e(1));
        let lightlike = Paravector::real([1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(lightlike.inverse(), Err(AlgebraError::NullElement { .. })));
        assert!(matches!(Paravector::ZERO.inverse(), Err(AlgebraError::NullElement { .. })));
    }

    #[test]
    fn fierz_examples() {
        assert!(close(&e(2).fierz_expand(), &e(2), 1e-15));
        assert_eq!(Paravector::ZERO.fierz_expand(), Paravector::ZERO);
    }

    #[test]
    fn projector_relations() {
        let p = projector_p();
        let pb = projector_p_bar();
        assert_eq!(p.bar(), pb);
        assert_eq!(p * p, p);
        assert_eq!(p.hat(), pb);
        assert_eq!(p * pb, Paravector::ZERO);
        assert_eq!(pb * p, Paravector::ZERO);
        assert_eq!(p + pb, Paravector::ONE);
        assert_eq!(ideal_coeffs(&e(0)), (C64::new(0.5, 0.0), ZERO));
    }

    #[test]
    fn ideal_coeffs_reproduce_left_ideal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p_proj = projector_p();
        for _ in 0..100 {
            let p = random_p(&mut rng);
            let (a, b) = ideal_coeffs(&p);
            let recon = p_proj.scale_c(a * 2.0) + (e(1) * p_proj).scale_c(b * 2.0);
            assert!(close(&(p * p_proj), &recon, 1e-15));
            // P p P = 2 p0-like coefficient times P
            let ppp = p_proj * p * p_proj;
            assert!(close(&ppp, &p_proj.scale_c(p.c[0] + p.c[3]), 1e-15));
        }
    }

    #[test]
    fn levi_civita_conventions() {
        assert_eq!(levi_civita(1, 2, 3), 1.0);
        assert_eq!(levi_civita(2, 1, 3), -1.0);
        assert_eq!(levi_civita(1, 1, 3), 0.0);
        assert_eq!(levi_civita_raised(3, 1, 2, 3), -1.0);
        assert_eq!(levi_civita_raised(2, 1, 2, 3), 1.0);
    }

    proptest! {
        #[test]
        fn involutions_are_involutive(r in proptest::array::uniform8(-10.0f64..10.0)) {
            let p = Paravector::from_reals(r);
            prop_assert_eq!(p.bar().bar(), p);
            prop_assert_eq!(p.hat().hat(), p);
            prop_assert_eq!(p.dagger().dagger(), p);
            prop_assert_eq!(Paravector::from_reals(p.to_reals()), p);
        }

        #[test]
        fn p_bar_p_is_scalar(r in proptest::array::uniform8(-10.0f64..10.0)) {
            let p = Paravector::from_reals(r);
            let pp = p * p.bar();
            prop_assert!(pp.vector_part().max_abs() <= 1e-13 * p.norm_sq().max(1.0));
            prop_assert!((pp.c[0] - p.det()).norm() <= 1e-13 * p.norm_sq().max(1.0));
        }

        #[test]
        fn inverse_is_two_sided(r in proptest::array::uniform8(-10.0f64..10.0)) {
            let p = Paravector::from_reals(r);
            if let Ok(inv) = p.inverse() {
                let cond = p.norm_sq() / p.det().norm();
                let tol = 1e-13 * cond.max(1.0);
                prop_assert!((p * inv).dist(&Paravector::ONE) <= tol);
                prop_assert!((inv * p).dist(&Paravector::ONE) <= tol);
            }
        }
    }
}
