use super::{AlgebraError, Paravector, C64, ONE};

/// Unimodular element `l` with `l bar(l) = 1`, acting on paravectors as
/// `p ↦ l p l†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFactor {
    l: Paravector,
}

impl LorentzFactor {
    pub const IDENTITY: LorentzFactor = LorentzFactor { l: Paravector::ONE };

    pub fn new(l: Paravector) -> Result<Self, AlgebraError> {
        let dev = (l.det() - ONE).norm();
        if !(dev <= 1e-12) {
            return Err(AlgebraError::NotUnimodular(dev));
        }
        Ok(Self { l })
    }

    pub(crate) fn new_unchecked(l: Paravector) -> Self {
        Self { l }
    }

    pub fn as_paravector(&self) -> &Paravector {
        &self.l
    }

    pub fn compose(&self, o: &LorentzFactor) -> LorentzFactor {
        LorentzFactor { l: self.l * o.l }
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Boost with rapidity vector `w`: `cosh(|w|/2) + ŵ sinh(|w|/2)`.
pub fn boost(w: [f64; 3]) -> LorentzFactor {
    let r = norm3(w);
    if r == 0.0 {
        return LorentzFactor::IDENTITY;
    }
    let (c, s) = ((r / 2.0).cosh(), (r / 2.0).sinh() / r);
    LorentzFactor::new_unchecked(Paravector::real([c, w[0] * s, w[1] * s, w[2] * s]))
}

/// Rotation by angle `|θ|` about `θ̂`: `cos(|θ|/2) - i θ̂ sin(|θ|/2)`.
pub fn rotation(theta: [f64; 3]) -> LorentzFactor {
    let r = norm3(theta);
    if r == 0.0 {
        return LorentzFactor::IDENTITY;
    }
    let (c, s) = ((r / 2.0).cos(), (r / 2.0).sin() / r);
    let k = |x: f64| C64::new(0.0, -x * s);
    LorentzFactor::new_unchecked(Paravector::new(C64::new(c, 0.0), k(theta[0]), k(theta[1]), k(theta[2])))
}

pub fn lorentz_apply(l: &LorentzFactor, p: &Paravector) -> Paravector {
    l.l * *p * l.l.dagger()
}

/// Polar split `l = b r` with `b = (l l†)^{1/2}` real and `r = bar(b) l`.
pub fn factor_boost_rotation(l: &LorentzFactor) -> Result<(LorentzFactor, LorentzFactor), AlgebraError> {
    let h = l.l * l.l.dagger();
    // h is Hermitian: real coefficients, h0 > |h|.
    let [h0, h1, h2, h3] = h.c.map(|z| z.re);
    let det = h0 * h0 - h1 * h1 - h2 * h2 - h3 * h3;
    let scale = h.norm_sq();
    if !(h0 > 0.0) || !(det > 1e-12 * scale) {
        return Err(AlgebraError::DegenerateFactor);
    }
    let s = det.sqrt();
    let denom = (2.0 * (h0 + s)).sqrt();
    let b = Paravector::real([(h0 + s) / denom, h1 / denom, h2 / denom, h3 / denom]);
    let bdet = b.det().re;
    let r = (b.bar() * l.l).scale(1.0 / bdet);
    Ok((LorentzFactor::new_unchecked(b), LorentzFactor::new_unchecked(r)))
}

/// `exp(p)` for a general element, via `e^{p_0}(cosh s + v sinh(s)/s)` with
/// `s² = v·v` (complex).
pub(crate) fn exp(p: &Paravector) -> Paravector {
    let v = p.vector_part();
    let s2 = v.c[1] * v.c[1] + v.c[2] * v.c[2] + v.c[3] * v.c[3];
    let s = s2.sqrt();
    let (ch, shs) = if s.norm() < 1e-6 {
        // Series to fourth order avoids 0/0.
        (ONE + s2 / 2.0 + s2 * s2 / 24.0, ONE + s2 / 6.0 + s2 * s2 / 120.0)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    let e0 = p.c[0].exp();
    (Paravector::scalar(ch) + v.scale_c(shs)).scale_c(e0)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{I, ZERO};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand3<R: Rng>(rng: &mut R, a: f64) -> [f64; 3] {
        [rng.gen_range(-a..a), rng.gen_range(-a..a), rng.gen_range(-a..a)]
    }

    #[test]
    fn identities() {
        assert_eq!(boost([0.0; 3]), LorentzFactor::IDENTITY);
        assert_eq!(rotation([0.0; 3]), LorentzFactor::IDENTITY);
        let r = rotation([0.0, 0.0, 2.0 * std::f64::consts::PI]);
        assert!(r.as_paravector().dist(&-Paravector::ONE) < 1e-15);
    }

    #[test]
    fn unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let b = boost(rand3(&mut rng, 3.0));
            let r = rotation(rand3(&mut rng, 6.0));
            assert!((b.as_paravector().det() - ONE).norm() < 1e-12);
            assert!((r.as_paravector().det() - ONE).norm() < 1e-12);
            assert!(LorentzFactor::new(*b.as_paravector()).is_ok());
        }
        assert!(matches!(
            LorentzFactor::new(Paravector::real([2.0, 0.0, 0.0, 0.0])),
            Err(AlgebraError::NotUnimodular(_))
        ));
    }

    #[test]
    fn boost_on_e0() {
        let w: [f64; 3] = [0.3, -1.2, 0.5];
        let r = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let out = lorentz_apply(&boost(w), &Paravector::ONE);
        let expect = Paravector::real([r.cosh(), w[0] / r * r.sinh(), w[1] / r * r.sinh(), w[2] / r * r.sinh()]);
        assert!(out.dist(&expect) < 1e-13);
    }

    #[test]
    fn rotation_is_right_handed() {
        let r = rotation([0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let out = lorentz_apply(&r, &Paravector::basis(1));
        assert!(out.dist(&Paravector::basis(2)) < 1e-15);
    }

    #[test]
    fn exp_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let w = rand3(&mut rng, 2.0);
            let th = rand3(&mut rng, 3.0);
            let eb = exp(&Paravector::real([0.0, w[0] / 2.0, w[1] / 2.0, w[2] / 2.0]));
            assert!(eb.dist(boost(w).as_paravector()) < 1e-13);
            let gen = Paravector::new(ZERO, I * (-th[0] / 2.0), I * (-th[1] / 2.0), I * (-th[2] / 2.0));
            assert!(exp(&gen).dist(rotation(th).as_paravector()) < 1e-13);
        }
        assert_eq!(exp(&Paravector::ZERO), Paravector::ONE);
        let p = random_p(&mut rng);
        let ep = exp(&p);
        let em = exp(&-p);
        assert!((ep * em).dist(&Paravector::ONE) < 1e-12);
    }

    #[test]
    fn lorentz_preserves_det_and_reality() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let l = boost(rand3(&mut rng, 2.0)).compose(&rotation(rand3(&mut rng, 6.0)));
            let p = random_real(&mut rng);
            let q = lorentz_apply(&l, &p);
            assert!((q.det() - p.det()).norm() < 1e-11);
            assert!(q.im().max_abs() < 1e-12);
        }
        let p = random_real(&mut rng);
        assert_eq!(lorentz_apply(&LorentzFactor::IDENTITY, &p), p);
    }

    #[test]
    fn factorization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..1000 {
            let b0 = boost(rand3(&mut rng, 2.0));
            let r0 = rotation(rand3(&mut rng, 3.0));
            let l = b0.compose(&r0);
            let (b, r) = factor_boost_rotation(&l).unwrap();
            assert!(b.as_paravector().dist(b0.as_paravector()) < 1e-10);
            assert!(r.as_paravector().dist(r0.as_paravector()) < 1e-10);
            assert!(b.compose(&r).as_paravector().dist(l.as_paravector()) < 1e-11);
            assert!(b.as_paravector().im().max_abs() < 1e-14);
            assert!(r.as_paravector().odd().max_abs() < 1e-11);
        }
    }

    #[test]
    fn factorization_pure_cases() {
        let b = boost([0.4, 0.1, -0.7]);
        let (fb, fr) = factor_boost_rotation(&b).unwrap();
        assert!(fb.as_paravector().dist(b.as_paravector()) < 1e-14);
        assert!(fr.as_paravector().dist(&Paravector::ONE) < 1e-14);
        let r = rotation([1.0, 2.0, -0.5]);
        let (fb, fr) = factor_boost_rotation(&r).unwrap();
        assert!(fb.as_paravector().dist(&Paravector::ONE) < 1e-14);
        assert!(fr.as_paravector().dist(r.as_paravector()) < 1e-14);
    }

    #[test]
    fn degenerate_factor() {
        let l = LorentzFactor::new_unchecked(Paravector::real([0.5, 0.0, 0.0, 0.5]));
        assert_eq!(factor_boost_rotation(&l), Err(AlgebraError::DegenerateFactor));
    }
}
