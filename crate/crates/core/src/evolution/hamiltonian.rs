use super::{Differentiator, EvolutionError, Grid};
use crate::clifford::{Paravector, C64};
use crate::spinor::{reg_velocity, Mode, PhysicsParams, SpinorError, DEFAULT_NODE_EPS};

/// Time-independent external potential `A = A^0 + A^k e_k` (real).
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialField {
    Zero,
    Constant(Paravector),
    Sampled(Vec<Paravector>),
}

impl PotentialField {
    pub fn at(&self, idx: usize) -> Paravector {
        match self {
            PotentialField::Zero => Paravector::ZERO,
            PotentialField::Constant(a) => *a,
            PotentialField::Sampled(v) => v[idx],
        }
    }

    pub fn constant_value(&self) -> Option<Paravector> {
        match self {
            PotentialField::Zero => Some(Paravector::ZERO),
            PotentialField::Constant(a) => Some(*a),
            PotentialField::Sampled(_) => None,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), EvolutionError> {
        let check = |a: &Paravector| a.is_finite() && a.im().max_abs() == 0.0;
        let ok = match self {
            PotentialField::Zero => true,
            PotentialField::Constant(a) => check(a),
            PotentialField::Sampled(v) => {
                if v.len() != grid.len() {
                    return Err(EvolutionError::InvalidConfig(format!(
                        "sampled potential has {} points, grid has {}",
                        v.len(),
                        grid.len()
                    )));
                }
                v.iter().all(check)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(EvolutionError::InvalidConfig("potential must be finite with real coefficients".into()))
        }
    }

    /// Largest `|A^0|` over the grid.
    pub fn max_a0(&self) -> f64 {
        match self {
            PotentialField::Zero => 0.0,
            PotentialField::Constant(a) => a.c[0].re.abs(),
            PotentialField::Sampled(v) => v.iter().map(|a| a.c[0].re.abs()).fold(0.0, f64::max),
        }
    }
}

fn e3() -> Paravector {
    Paravector::basis(3)
}

const I: C64 = C64::new(0.0, 1.0);

/// `Hψ = -i Σ_k e^k ∂_k ψ + q A ψ e3 + m hat(ψ) e3` where `ψ` stands for `φ̂`.
pub fn hamiltonian_apply(
    diff: &Differentiator,
    psi: &[Paravector],
    pot: &PotentialField,
    params: &PhysicsParams,
) -> Vec<Paravector> {
    let grad = diff.gradient(psi);
    (0..psi.len())
        .map(|i| {
            let mut kin = Paravector::ZERO;
            for k in 0..3 {
                kin += Paravector::dual_basis(k + 1) * grad[k][i];
            }
            kin.scale_c(-I) + (pot.at(i) * psi[i] * e3()).scale(params.q) + (psi[i].hat() * e3()).scale(params.m)
        })
        .collect()
}

/// The scalar `z` with nonlinear source `m (z - 1) φ e3`, or `None` in
/// linear mode.
pub fn source_factor(phi: &Paravector, params: &PhysicsParams, mode: Mode) -> Result<Option<C64>, SpinorError> {
    match mode {
        Mode::Linear => Ok(None),
        Mode::Regularized => Ok(Some(reg_velocity(phi, params.lambda))),
        Mode::Exact => {
            let det = phi.det();
            let threshold = DEFAULT_NODE_EPS * phi.norm_sq();
            if !(det.norm() > threshold) {
                return Err(SpinorError::NodalPoint { n: det.norm(), threshold });
            }
            Ok(Some(det.conj() / det.norm()))
        }
    }
}

/// `∂_0 φ` from `i ∂_0 φ̂ = H φ̂ + m F e3`; with `linear_only` the source is
/// dropped.
pub fn time_derivative(
    diff: &Differentiator,
    phi: &[Paravector],
    pot: &PotentialField,
    params: &PhysicsParams,
    mode: Mode,
    linear_only: bool,
) -> Result<Vec<Paravector>, SpinorError> {
    let phi_hat: Vec<Paravector> = phi.iter().map(Paravector::hat).collect();
    let mut x = hamiltonian_apply(diff, &phi_hat, pot, params);
    if !linear_only {
        for (xi, p) in x.iter_mut().zip(phi) {
            if let Some(z) = source_factor(p, params, mode)? {
                *xi += (*p * e3()).scale_c((z - 1.0) * params.m);
            }
        }
    }
    Ok(x.into_iter().map(|xi| xi.scale_c(-I).hat()).collect())
}

/// Complex-linear coordinates `(ξ1, ξ2, η1, η2)` in which the equation is a
/// Weyl-basis Dirac system. With `φ = [[a, b], [c, d]]`:
/// `ξ = (a, c)`, `η = (d*, -b*)`.
pub fn to_c4(p: &Paravector) -> [C64; 4] {
    let [c0, c1, c2, c3] = p.c;
    let a = c0 + c3;
    let b = c1 - I * c2;
    let c = c1 + I * c2;
    let d = c0 - c3;
    [a, c, d.conj(), -b.conj()]
}

pub fn from_c4(v: &[C64; 4]) -> Paravector {
    let (a, c, d, b) = (v[0], v[1], v[2].conj(), -v[3].conj());
    Paravector::new((a + d) * 0.5, (b + c) * 0.5, (c - b) / (I * 2.0), (a - d) * 0.5)
}
