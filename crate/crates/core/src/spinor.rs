//! Pointwise physics of the nonlinear Dirac equation in Cl(3) form:
//! invariants `N`, `J`, `V`, the regularized nonlinearity, plane waves and
//! the prefactor reconstruction from `(N, J)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{Paravector, C64};

/// Relative threshold for nodal points: `N ≤ ε · ‖φ‖²`.
pub const DEFAULT_NODE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error("nodal point: N = {n:e} is below threshold {threshold:e}")]
    NodalPoint { n: f64, threshold: f64 },
    #[error("inconsistent (N, J) pair: {0}")]
    InconsistentPair(String),
    #[error("degenerate current: J0 + N = 0 but J is nonzero")]
    DegenerateJ,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Which right-hand side the equation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `∇φ̂ + i(qAφ̂ + mφ)e3 = 0`.
    Linear,
    /// `∇φ̂ + i(qAφ̂ + m V_λ(φ) φ)e3 = 0`.
    #[default]
    Regularized,
    /// `∇φ̂ + i(qA + mV)φ̂ e3 = 0`, undefined at nodes.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    pub m: f64,
    pub q: f64,
    pub lambda: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { m: 1.0, q: 0.0, lambda: 0.1 }
    }
}

impl PhysicsParams {
    pub fn validate(&self, mode: Mode) -> Result<(), SpinorError> {
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(SpinorError::InvalidParams(format!("m must be finite and >= 0, got {}", self.m)));
        }
        if !self.q.is_finite() {
            return Err(SpinorError::InvalidParams(format!("q must be finite, got {}", self.q)));
        }
        if mode == Mode::Regularized && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SpinorError::InvalidParams(format!(
                "lambda must be > 0 in regularized mode, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// `N = |det φ|`.
pub fn nonlinearity_n(phi: &Paravector) -> f64 {
    phi.det().norm()
}

/// `J = φ φ†`.
pub fn dirac_current(phi: &Paravector) -> Paravector {
    // φφ† is Hermitian; drop the rounding residue in the imaginary parts.
    (*phi * phi.dagger()).re()
}

/// `V = J / N`.
pub fn pilot_velocity(phi: &Paravector) -> Result<Paravector, SpinorError> {
    pilot_velocity_with(phi, DEFAULT_NODE_EPS)
}

pub fn pilot_velocity_with(phi: &Paravector, node_eps: f64) -> Result<Paravector, SpinorError> {
    let n = nonlinearity_n(phi);
    let threshold = node_eps * phi.norm_sq();
    if !(n > threshold) {
        return Err(SpinorError::NodalPoint { n, threshold });
    }
    Ok(dirac_current(phi).scale(1.0 / n))
}

/// `Γ = qA + mV`.
pub fn gamma(a: &Paravector, v: &Paravector, params: &PhysicsParams) -> Paravector {
    a.scale(params.q) + v.scale(params.m)
}

/// `V_λ(φ) = det(φ)* / (N + λ‖φ‖²)`, with `V_λ(0) = 0`.
pub fn reg_velocity(phi: &Paravector, lambda: f64) -> C64 {
    let det = phi.det();
    let denom = det.norm() + lambda * phi.norm_sq();
    if denom == 0.0 {
        return C64::new(0.0, 0.0);
    }
    det.conj() / denom
}

/// `F_λ(φ) = (V_λ(φ) - 1) φ`.
pub fn reg_source(phi: &Paravector, lambda: f64) -> Paravector {
    phi.scale_c(reg_velocity(phi, lambda) - 1.0)
}

/// `∇φ̂ = Σ e^μ ∂_μ φ̂` from the four partials of `φ̂`.
pub fn nabla(grad_hat: &[Paravector; 4]) -> Paravector {
    let mut acc = Paravector::ZERO;
    for (mu, g) in grad_hat.iter().enumerate() {
        acc += Paravector::dual_basis(mu) * *g;
    }
    acc
}

/// The mass/potential term `X` in `∇φ̂ + i X e3 = 0` for the given mode.
pub fn coupling_term(
    phi: &Paravector,
    a: &Paravector,
    params: &PhysicsParams,
    mode: Mode,
) -> Result<Paravector, SpinorError> {
    let phi_hat = phi.hat();
    Ok(match mode {
        Mode::Linear => *a * phi_hat * params.q + phi.scale(params.m),
        Mode::Regularized => {
            *a * phi_hat * params.q + phi.scale_c(reg_velocity(phi, params.lambda) * params.m)
        }
        Mode::Exact => gamma(a, &pilot_velocity(phi)?, params) * phi_hat,
    })
}

/// Pointwise residual of the equation in the chosen mode, given `φ` and the
/// spacetime partials `∂_μ φ̂`.
pub fn nonlinear_residual(
    phi: &Paravector,
    grad_hat: &[Paravector; 4],
    a: &Paravector,
    params: &PhysicsParams,
    mode: Mode,
) -> Result<Paravector, SpinorError> {
    let x = coupling_term(phi, a, params, mode)?;
    let e3 = Paravector::basis(3);
    Ok(nabla(grad_hat) + (x * e3).scale_c(C64::new(0.0, 1.0)))
}

/// A plane wave `φ(x) = M e^{-iθ(x) e3}` with `θ = m_w V_μ x^μ + φ0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveSpec {
    pub m: Paravector,
    pub phi0: f64,
}

impl PlaneWaveSpec {
    /// Builds the wave from `(N, J)` via [`reconstruct_m`].
    pub fn from_n_j(n: f64, j: &Paravector, phi0: f64) -> Result<Self, SpinorError> {
        Ok(Self { m: reconstruct_m(n, j)?, phi0 })
    }

    pub fn n(&self) -> f64 {
        nonlinearity_n(&self.m)
    }

    pub fn j(&self) -> Paravector {
        dirac_current(&self.m)
    }

    pub fn v(&self) -> Result<Paravector, SpinorError> {
        pilot_velocity(&self.m)
    }

    /// The mass that enters the phase so that the wave solves the equation
    /// in `mode`. The regularized equation sees an effective mass reduced by
    /// `N / (N + λ‖M‖²)`.
    pub fn phase_mass(&self, params: &PhysicsParams, mode: Mode) -> f64 {
        match mode {
            Mode::Exact => params.m,
            Mode::Regularized => {
                let n = self.n();
                params.m * n / (n + params.lambda * self.m.norm_sq())
            }
            Mode::Linear => params.m,
        }
    }
}

/// `θ(x) = m V_μ x^μ + φ0`.
pub fn plane_wave_phase(v: &Paravector, m: f64, phi0: f64, x: [f64; 4]) -> f64 {
    let vl = v.re_lower();
    m * (vl[0] * x[0] + vl[1] * x[1] + vl[2] * x[2] + vl[3] * x[3]) + phi0
}

/// `e^{-iθ e3} = cos θ - i sin θ e3`.
pub fn phase_factor(theta: f64) -> Paravector {
    let (s, c) = theta.sin_cos();
    Paravector::new(C64::new(c, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -s))
}

pub fn plane_wave_eval(spec: &PlaneWaveSpec, phase_mass: f64, x: [f64; 4]) -> Result<Paravector, SpinorError> {
    let v = spec.v()?;
    Ok(spec.m * phase_factor(plane_wave_phase(&v, phase_mass, spec.phi0, x)))
}

/// Analytic partials `∂_μ φ̂` of the plane wave: `-i (m V_μ) φ̂ e3`.
pub fn plane_wave_grad_hat(
    spec: &PlaneWaveSpec,
    phase_mass: f64,
    x: [f64; 4],
) -> Result<[Paravector; 4], SpinorError> {
    let v = spec.v()?;
    let phi_hat = plane_wave_eval(spec, phase_mass, x)?.hat();
    let base = (phi_hat * Paravector::basis(3)).scale_c(C64::new(0.0, -1.0));
    let vl = v.re_lower();
    Ok([0, 1, 2, 3].map(|mu| base.scale(phase_mass * vl[mu])))
}

/// Hermitian positive prefactor `M` with `M M† = J` and `det M = N`:
/// `M⁰ = sqrt((J⁰ + N)/2)`, `M^k = J^k / (2M⁰)`.
pub fn reconstruct_m(n: f64, j: &Paravector) -> Result<Paravector, SpinorError> {
    if !(n >= 0.0 && n.is_finite()) || !j.is_finite() {
        return Err(SpinorError::InconsistentPair(format!("N = {n} must be finite and >= 0")));
    }
    let j0 = j.c[0].re;
    let scale = j.max_abs().max(n);
    if j.im().max_abs() > 1e-12 * scale {
        return Err(SpinorError::InconsistentPair("J must have real coefficients".into()));
    }
    let jr = j.re_coeffs();
    let det_j = jr[0] * jr[0] - jr[1] * jr[1] - jr[2] * jr[2] - jr[3] * jr[3];
    if j0 < n * (1.0 - 1e-12) {
        return Err(SpinorError::InconsistentPair(format!("need J0 >= N, got J0 = {j0}, N = {n}")));
    }
    let s = j0 + n;
    if s <= 0.0 {
        if j.max_abs() == 0.0 {
            return Ok(Paravector::ZERO);
        }
        return Err(SpinorError::DegenerateJ);
    }
    if (det_j - n * n).abs() > 1e-10 * j0 * j0 {
        return Err(SpinorError::InconsistentPair(format!(
            "det(J) = {det_j} differs from N^2 = {}",
            n * n
        )));
    }
    let m0 = (s / 2.0).sqrt();
    let k = 1.0 / (2.0 * m0);
    Ok(Paravector::real([m0, jr[1] * k, jr[2] * k, jr[3] * k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{boost, projector_p, rotation};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_p<R: Rng>(rng: &mut R) -> Paravector {
        let mut r = [0.0; 8];
        for x in r.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        Paravector::from_reals(r)
    }

    fn params() -> PhysicsParams {
        PhysicsParams { m: 1.3, q: 0.7, lambda: 0.2 }
    }

    #[test]
    fn n_examples() {
        assert_eq!(nonlinearity_n(&Paravector::ONE), 1.0);
        assert_eq!(nonlinearity_n(&projector_p()), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let phi = random_p(&mut rng);
            let n = nonlinearity_n(&phi);
            let det_j = dirac_current(&phi).det().re;
            assert!((n * n - det_j).abs() < 1e-13);
        }
    }

    #[test]
    fn current_examples() {
        assert_eq!(dirac_current(&Paravector::ONE), Paravector::ONE);
        let b = *boost([0.2, -0.5, 0.9]).as_paravector();
        assert!(dirac_current(&b).dist(&(b * b)) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..1000 {
            let j = dirac_current(&random_p(&mut rng)).re_coeffs();
            let jv = (j[1] * j[1] + j[2] * j[2] + j[3] * j[3]).sqrt();
            assert!(j[0] + 1e-14 >= jv);
        }
    }

    #[test]
    fn pilot_velocity_examples() {
        assert_eq!(pilot_velocity(&Paravector::ONE).unwrap(), Paravector::ONE);
        let v = pilot_velocity(&Paravector::scalar(c(0.3, -2.0))).unwrap();
        assert!(v.dist(&Paravector::ONE) < 1e-15);
        assert!(matches!(pilot_velocity(&projector_p()), Err(SpinorError::NodalPoint { .. })));
        assert!(matches!(pilot_velocity(&Paravector::ZERO), Err(SpinorError::NodalPoint { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..1000 {
            let phi = random_p(&mut rng);
            let v = pilot_velocity(&phi).unwrap();
            let cond = phi.norm_sq() / nonlinearity_n(&phi);
            assert!((v.det() - 1.0).norm() < 1e-13 * cond * cond);
            assert!(v.c[0].re >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn gamma_examples() {
        let p = PhysicsParams { m: 1.0, q: 0.5, lambda: 1.0 };
        assert_eq!(gamma(&Paravector::ZERO, &Paravector::ONE, &p), Paravector::ONE);
        let a = Paravector::real([0.1, 0.2, 0.3, 0.4]);
        let v = Paravector::real([2.0, 1.0, 1.0, 1.0]);
        let g = gamma(&a, &v, &p);
        assert_eq!(g, Paravector::real([2.05, 1.1, 1.15, 1.2]));
        let p0 = PhysicsParams { q: 0.0, ..p };
        assert_eq!(gamma(&a, &v, &p0), v);
    }

    #[test]
    fn reg_velocity_examples() {
        assert!((reg_velocity(&Paravector::ONE, 1.0) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(reg_velocity(&Paravector::ZERO, 0.1), c(0.0, 0.0));
        assert_eq!(reg_source(&Paravector::ZERO, 0.1), Paravector::ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let phi = random_p(&mut rng);
        for k in 0..40 {
            let r = 10f64.powi(-k);
            assert!(reg_velocity(&phi.scale(r), 0.01).norm() <= 1.0);
        }
    }

    #[test]
    fn reg_velocity_small_lambda_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..100 {
            let phi = random_p(&mut rng);
            let det = phi.det();
            let n = det.norm();
            let limit = det.conj() / n;
            assert!((reg_velocity(&phi, 1e-12) - limit).norm() < 1e-9 * phi.norm_sq() / n);
            // e^{-iβ}φ = V φ̂
            let v = pilot_velocity(&phi).unwrap();
            assert!((phi.scale_c(limit)).dist(&(v * phi.hat())) < 1e-11 * phi.norm_sq() / n);
        }
    }

    #[test]
    fn u1_and_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..500 {
            let phi = random_p(&mut rng);
            let beta: f64 = rng.gen_range(0.0..6.3);
            let r: f64 = rng.gen_range(0.1..10.0);
            let rot = phi.scale_c(C64::from_polar(1.0, beta / 2.0));
            assert!((nonlinearity_n(&rot) - nonlinearity_n(&phi)).abs() < 1e-13);
            assert!((nonlinearity_n(&phi.scale(r)) - r * r * nonlinearity_n(&phi)).abs() < 1e-12 * r * r);
            let v = pilot_velocity(&phi).unwrap();
            let cond = phi.norm_sq() / nonlinearity_n(&phi);
            assert!(pilot_velocity(&rot).unwrap().dist(&v) < 1e-13 * cond);
            assert!(pilot_velocity(&phi.scale(r)).unwrap().dist(&v) < 1e-13 * cond);
        }
    }

    #[test]
    fn dagger_hat_is_conjugate_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..1000 {
            let phi = random_p(&mut rng);
            let lhs = phi.dagger() * phi.hat();
            assert!(lhs.dist(&Paravector::scalar(phi.det().conj())) < 1e-14);
        }
    }

    #[test]
    fn source_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..10_000 {
            let phi = random_p(&mut rng).scale(rng.gen_range(1e-6..1e3));
            let lambda = rng.gen_range(1e-3..10.0);
            assert!(reg_source(&phi, lambda).norm() <= 2.0 * phi.norm() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn reg_velocity_gradient_bound() {
        // |∇V_λ| ≲ C (1 + λ) ‖φ‖ / (N + λ‖φ‖²) sampled by finite differences.
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let phi = random_p(&mut rng);
            let lambda = [1.0, 0.1, 0.01][rng.gen_range(0..3)];
            let h = 1e-6;
            let mut g2 = 0.0;
            for k in 0..8 {
                let mut e = [0.0; 8];
                e[k] = h;
                let d = (reg_velocity(&(phi + Paravector::from_reals(e)), lambda)
                    - reg_velocity(&(phi - Paravector::from_reals(e)), lambda))
                    / (2.0 * h);
                g2 += d.norm_sqr();
            }
            let bound = (1.0 + lambda) * phi.norm() / (nonlinearity_n(&phi) + lambda * phi.norm_sq());
            worst = worst.max(g2.sqrt() / bound);
        }
        assert!(worst < 8.0, "fitted constant {worst}");
    }

    #[test]
    fn residual_trivial_cases() {
        let p = PhysicsParams { m: 0.0, q: 0.0, lambda: 0.1 };
        let phi = Paravector::from_reals([0.3, 0.1, -0.2, 0.5, 0.7, 0.0, 0.1, 0.2]);
        for mode in [Mode::Linear, Mode::Regularized, Mode::Exact] {
            let r = nonlinear_residual(&phi, &[Paravector::ZERO; 4], &Paravector::ZERO, &p, mode).unwrap();
            assert_eq!(r, Paravector::ZERO);
        }
        let err = nonlinear_residual(&projector_p(), &[Paravector::ZERO; 4], &Paravector::ZERO, &p, Mode::Exact);
        assert!(matches!(err, Err(SpinorError::NodalPoint { .. })));
    }

    fn random_hermitian_psd<R: Rng>(rng: &mut R) -> Paravector {
        let w = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        boost(w).as_paravector().scale(rng.gen_range(0.2..3.0))
    }

    #[test]
    fn plane_wave_solves_exact_and_regularized() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let p = params();
        for _ in 0..100 {
            let spec = PlaneWaveSpec { m: random_hermitian_psd(&mut rng), phi0: rng.gen_range(-3.0..3.0) };
            let a = Paravector::real([0.0; 4]);
            let p0 = PhysicsParams { q: 0.0, ..p };
            for mode in [Mode::Exact, Mode::Regularized] {
                let mw = spec.phase_mass(&p0, mode);
                let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.3];
                let phi = plane_wave_eval(&spec, mw, x).unwrap();
                let g = plane_wave_grad_hat(&spec, mw, x).unwrap();
                let r = nonlinear_residual(&phi, &g, &a, &p0, mode).unwrap();
                assert!(r.max_abs() < 1e-12 * (1.0 + phi.norm_sq()), "{mode:?} {}", r.max_abs());
                assert!((nonlinearity_n(&phi) - spec.n()).abs() < 1e-12 * phi.norm_sq());
                assert!(dirac_current(&phi).dist(&spec.j()) < 1e-12 * phi.norm_sq());
            }
        }
    }

    #[test]
    fn plane_wave_with_constant_potential() {
        // A constant potential shifts the phase gradient: θ = (m V + q A)_μ x^μ.
        let p = params();
        let spec = PlaneWaveSpec { m: *boost([0.3, 0.1, -0.4]).as_paravector(), phi0: 0.5 };
        let a = Paravector::real([0.2, -0.1, 0.3, 0.05]);
        let v = spec.v().unwrap();
        let k = gamma(&a, &v, &p);
        let x = [0.7, -1.1, 2.0, 0.4];
        let theta = plane_wave_phase(&k, 1.0, spec.phi0, x);
        let phi = spec.m * phase_factor(theta);
        let base = (phi.hat() * Paravector::basis(3)).scale_c(C64::new(0.0, -1.0));
        let kl = k.re_lower();
        let g = [0, 1, 2, 3].map(|mu| base.scale(kl[mu]));
        let r = nonlinear_residual(&phi, &g, &a, &p, Mode::Exact).unwrap();
        assert!(r.max_abs() < 1e-13);
    }

    #[test]
    fn linear_plane_wave() {
        // M = b X with b a boost and X even solves k hat(M) = m M for k = m b².
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let p = PhysicsParams { m: 0.8, q: 0.0, lambda: 0.0 };
        for _ in 0..50 {
            let b = *boost([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .as_paravector();
            let x_even = *rotation([rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.4]).as_paravector();
            let m = b * x_even.scale(rng.gen_range(0.5..2.0));
            let k = (b * b).re().scale(p.m);
            let x = [0.3, rng.gen_range(-2.0..2.0), 1.0, -0.5];
            let theta = plane_wave_phase(&k, 1.0, 0.0, x);
            let phi = m * phase_factor(theta);
            let base = (phi.hat() * Paravector::basis(3)).scale_c(C64::new(0.0, -1.0));
            let kl = k.re_lower();
            let g = [0, 1, 2, 3].map(|mu| base.scale(kl[mu]));
            let r = nonlinear_residual(&phi, &g, &Paravector::ZERO, &p, Mode::Linear).unwrap();
            assert!(r.max_abs() < 1e-13 * (1.0 + m.norm_sq()));
        }
    }

    #[test]
    fn phase_examples() {
        let v = Paravector::ONE;
        assert_eq!(plane_wave_phase(&v, 1.0, 0.7, [0.0; 4]), 0.7);
        assert_eq!(plane_wave_phase(&v, 1.0, 0.0, [2.5, 0.0, 0.0, 0.0]), 2.5);
        let spec = PlaneWaveSpec { m: *boost([0.5, 0.0, 0.0]).as_paravector(), phi0: 0.0 };
        assert_eq!(plane_wave_eval(&spec, 1.0, [0.0; 4]).unwrap(), spec.m);
        let spec_pi = PlaneWaveSpec { phi0: std::f64::consts::PI, ..spec };
        assert!(plane_wave_eval(&spec_pi, 1.0, [0.0; 4]).unwrap().dist(&-spec.m) < 1e-15);
    }

    #[test]
    fn reconstruct_examples() {
        assert_eq!(reconstruct_m(1.0, &Paravector::ONE).unwrap(), Paravector::ONE);
        let m = reconstruct_m(4.0, &Paravector::real([4.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(m, Paravector::real([2.0, 0.0, 0.0, 0.0]));
        assert_eq!(reconstruct_m(0.0, &Paravector::ZERO).unwrap(), Paravector::ZERO);
        assert!(matches!(
            reconstruct_m(1.0, &Paravector::real([2.0, 0.0, 0.0, 0.0])),
            Err(SpinorError::InconsistentPair(_))
        ));
        assert!(matches!(
            reconstruct_m(0.0, &Paravector::real([-1.0, 0.0, 0.0, 1.0])),
            Err(SpinorError::InconsistentPair(_))
        ));
        // Only J3 nonzero: J = (J0, 0, 0, J3), N = sqrt(J0² - J3²).
        let j = Paravector::real([5.0, 0.0, 0.0, 3.0]);
        let m = reconstruct_m(4.0, &j).unwrap();
        assert!(dirac_current(&m).dist(&j) < 1e-13);
        assert!(m.im().max_abs() == 0.0);
        assert!((m.det().re - 4.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_j() {
        let j = Paravector::real([0.0, 1.0, 0.0, 0.0]);
        assert_eq!(reconstruct_m(0.0, &j), Err(SpinorError::DegenerateJ));
    }

    proptest! {
        #[test]
        fn reconstruct_round_trip(w in proptest::array::uniform3(-2.0f64..2.0), s in 0.1f64..5.0) {
            let m0 = boost(w).as_paravector().scale(s);
            let n = nonlinearity_n(&m0);
            let j = dirac_current(&m0);
            let m = reconstruct_m(n, &j).unwrap();
            let j0 = j.c[0].re;
            prop_assert!(dirac_current(&m).dist(&j) <= 1e-10 * j0);
            prop_assert!((nonlinearity_n(&m) - n).abs() <= 1e-10 * j0);
            prop_assert!(m.im().max_abs() == 0.0);
        }

        #[test]
        fn reg_velocity_bounded(r in proptest::array::uniform8(-1.0f64..1.0), scale in -30i32..30, lambda in 1e-4f64..10.0) {
            let phi = Paravector::from_reals(r).scale(10f64.powi(scale));
            prop_assert!(reg_velocity(&phi, lambda).norm() <= 1.0);
        }
    }
}
