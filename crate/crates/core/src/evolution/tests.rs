use std::f64::consts::PI;

use super::*;
use crate::clifford::{boost, C64};
use crate::spinor::{Mode, PhysicsParams, PlaneWaveSpec, SpinorError};

fn generic_spinor() -> Paravector {
    Paravector::from_reals([0.9, 0.1, 0.3, -0.2, -0.1, 0.25, 0.2, 0.05])
}

fn bump(grid: Grid) -> SpinorField {
    let c = [grid.extent[0] / 2.0, grid.extent[1] / 2.0, grid.extent[2] / 2.0];
    let p = generic_spinor();
    SpinorField::from_fn(grid, 0.0, |x| p.scale(periodic_gaussian(&grid, c, 0.8, x)))
}

fn mode_field(grid: Grid, k: [i32; 3], amp: Paravector) -> SpinorField {
    SpinorField::from_fn(grid, 0.0, |x| {
        let ph: f64 = (0..3).map(|a| 2.0 * PI * k[a] as f64 * x[a] / grid.extent[a]).sum();
        amp.scale_c(C64::from_polar(1.0, ph))
    })
}

#[test]
fn constant_field_massless_is_static() {
    let g = Grid::cube(8, 1.0).unwrap();
    let f0 = SpinorField::from_fn(g, 0.0, |_| generic_spinor());
    let p = PhysicsParams { m: 0.0, q: 0.0, lambda: 0.1 };
    for method in [Method::StrangSplit, Method::Rk4] {
        let mut s = SchemeConfig::new(0.5, Mode::Regularized).with_dt(0.05);
        s.method = method;
        let (f, _) = evolve(f0.clone(), PotentialField::Zero, p, &s, 1, |_, _| {}).unwrap();
        assert!(f.max_abs_diff(&f0) < 1e-13);
        assert!((f.t - 0.5).abs() < 1e-15);
    }
}

#[test]
fn t_end_zero_emits_initial_only() {
    let g = Grid::cube(4, 1.0).unwrap();
    let f0 = bump(g);
    let s = SchemeConfig::new(0.0, Mode::Regularized);
    let (snaps, summary) = evolve_collect(f0.clone(), PotentialField::Zero, PhysicsParams::default(), &s, 1).unwrap();
    assert_eq!(snaps.len(), 1);
    assert_eq!(snaps[0], f0);
    assert_eq!(summary.steps, 0);
}

#[test]
fn spectral_propagator_matches_rk4() {
    // The Fourier propagator works in the (ξ, η) coordinates; RK4 works on
    // the Clifford form. Agreement checks the coordinate change.
    let g = Grid::new([8, 8, 8], [2.0 * PI, 4.0, 3.0]).unwrap();
    let f0 = SpinorField {
        data: mode_field(g, [1, -1, 2], generic_spinor())
            .data
            .iter()
            .zip(&mode_field(g, [0, 2, -1], Paravector::from_reals([0.1, 0.4, -0.3, 0.2, 0.5, -0.6, 0.0, 0.3])).data)
            .map(|(a, b)| *a + *b)
            .collect(),
        ..mode_field(g, [0, 0, 0], Paravector::ZERO)
    };
    let p = PhysicsParams { m: 1.1, q: 0.6, lambda: 0.1 };
    let pot = PotentialField::Constant(Paravector::real([0.4, -0.3, 0.2, 0.7]));
    let mut s = SchemeConfig::new(0.4, Mode::Linear).with_dt(0.4);
    let (exact, _) = evolve(f0.clone(), pot.clone(), p, &s, 1, |_, _| {}).unwrap();
    s.method = Method::Rk4;
    s.dt = Some(0.002);
    let (rk, _) = evolve(f0, pot, p, &s, 1000, |_, _| {}).unwrap();
    assert!(exact.max_abs_diff(&rk) < 1e-9, "{}", exact.max_abs_diff(&rk));
}

#[test]
fn nonlinear_split_matches_rk4() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let p = PhysicsParams { m: 1.0, q: 0.0, lambda: 0.1 };
    let mut s = SchemeConfig::new(0.2, Mode::Regularized).with_dt(0.01);
    let (split, _) = evolve(f0.clone(), PotentialField::Zero, p, &s, 100, |_, _| {}).unwrap();
    s.method = Method::Rk4;
    s.dt = Some(0.001);
    let (rk, _) = evolve(f0, PotentialField::Zero, p, &s, 1000, |_, _| {}).unwrap();
    assert!(split.max_abs_diff(&rk) < 1e-4, "{}", split.max_abs_diff(&rk));
}

#[test]
fn sampled_potential_uses_rk4_substep() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let pot = PotentialField::Sampled(
        (0..g.len())
            .map(|i| {
                let x = g.position(i);
                Paravector::real([0.3 * x[0].cos(), 0.1 * x[1].sin(), 0.0, 0.2])
            })
            .collect(),
    );
    let p = PhysicsParams { m: 1.0, q: 0.5, lambda: 0.1 };
    let mut s = SchemeConfig::new(0.2, Mode::Regularized).with_dt(0.01);
    let (split, _) = evolve(f0.clone(), pot.clone(), p, &s, 100, |_, _| {}).unwrap();
    s.method = Method::Rk4;
    s.dt = Some(0.001);
    let (rk, _) = evolve(f0, pot, p, &s, 1000, |_, _| {}).unwrap();
    assert!(split.max_abs_diff(&rk) < 1e-4);
}

fn planewave_spec() -> PlaneWaveSpec {
    // V = (√3, -1, -1, 0), unit mass phase gives integer wavenumbers on a 2π box.
    let w = (3f64.sqrt()).acosh();
    let dir = [-1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let b = boost([w * dir[0], w * dir[1], w * dir[2]]);
    PlaneWaveSpec { m: *b.as_paravector(), phi0: 0.3 }
}

#[test]
fn planewave_evolution_small_grid() {
    let spec = planewave_spec();
    let v = spec.v().unwrap();
    assert!(v.dist(&Paravector::real([3f64.sqrt(), -1.0, -1.0, 0.0])) < 1e-12);
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let lambda = 0.1;
    let p = PhysicsParams { m: 1.0 + 2.0 * lambda * v.c[0].re, q: 0.0, lambda };
    assert!((spec.phase_mass(&p, Mode::Regularized) - 1.0).abs() < 1e-12);
    let f0 = plane_wave_field(g, &spec, &p, Mode::Regularized, 0.0).unwrap();
    let s = SchemeConfig::new(0.5, Mode::Regularized).with_dt(0.01);
    let (f, _) = evolve(f0, PotentialField::Zero, p, &s, 1000, |_, _| {}).unwrap();
    let exact = plane_wave_field(g, &spec, &p, Mode::Regularized, 0.5).unwrap();
    assert!(f.max_abs_diff(&exact) < 1e-4, "{}", f.max_abs_diff(&exact));
    let n: Vec<f64> = f.data.iter().map(crate::spinor::nonlinearity_n).collect();
    let mean = n.iter().sum::<f64>() / n.len() as f64;
    let std = (n.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n.len() as f64).sqrt();
    assert!(std / mean < 1e-8);
}

#[test]
fn linear_mode_is_unitary() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let s = SchemeConfig::new(5.0, Mode::Linear).with_dt(0.05);
    let p = PhysicsParams { m: 1.0, q: 0.0, lambda: 0.1 };
    let (_, summary) = evolve(f0, PotentialField::Zero, p, &s, 10, |_, _| {}).unwrap();
    let drift = (summary.l2_final - summary.l2_initial).abs() / summary.l2_initial;
    assert!(drift < 1e-12, "{drift}");
}

#[test]
fn regularized_mode_within_growth_envelope() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let s = SchemeConfig::new(1.0, Mode::Regularized);
    let p = PhysicsParams { m: 1.0, q: 0.0, lambda: 0.1 };
    let (_, summary) = evolve(f0, PotentialField::Zero, p, &s, 1, |_, _| {}).unwrap();
    assert!(summary.max_envelope_ratio <= 1.0 + 1e-6);
    for l in &summary.logs {
        assert!(l.h1.is_some());
    }
}

#[test]
fn growth_violation_is_reported() {
    let g = Grid::cube(4, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let mut s = SchemeConfig::new(0.5, Mode::Linear).with_dt(0.1);
    // m = 0 makes the envelope flat, so any round-off growth with a
    // negative tolerance must trip.
    s.growth_tol = 0.0;
    let p = PhysicsParams { m: 0.0, q: 0.0, lambda: 0.1 };
    let r = evolve(f0.clone(), PotentialField::Zero, p, &s, 1, |_, _| {});
    match r {
        Ok((_, sum)) => assert!(sum.max_envelope_ratio <= 1.0),
        Err(e) => assert!(matches!(e, EvolutionError::GrowthViolation { .. })),
    }
    let bad = SchemeConfig { growth_tol: -1.0, ..s };
    assert!(matches!(
        evolve(f0, PotentialField::Zero, p, &bad, 1, |_, _| {}),
        Err(EvolutionError::InvalidConfig(_))
    ));
}

#[test]
fn blow_up_detected() {
    let g = Grid::cube(4, 1.0).unwrap();
    let mut f = bump(g);
    f.data[3].c[1] = C64::new(f64::NAN, 0.0);
    let s = SchemeConfig::new(0.1, Mode::Linear);
    let st = Stepper::new(g, PotentialField::Zero, PhysicsParams::default(), &s).unwrap();
    assert!(matches!(st.step(&mut f, 0.01), Err(EvolutionError::BlowUp { .. })));
}

#[test]
fn exact_mode_refuses_nodes() {
    let g = Grid::cube(4, 1.0).unwrap();
    let f0 = SpinorField::zeros(g, 0.0);
    let s = SchemeConfig::new(0.1, Mode::Exact);
    let p = PhysicsParams { m: 1.0, q: 0.0, lambda: 0.0 };
    assert!(matches!(
        evolve(f0, PotentialField::Zero, p, &s, 1, |_, _| {}),
        Err(EvolutionError::Spinor(SpinorError::NodalPoint { .. }))
    ));
}

// The equation is covariant under φ ↦ e^{iβ/2}φ but the split pieces are
// not separately, so the defect is a splitting error of order dt².
#[test]
fn global_phase_covariance() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f0 = bump(g);
    let beta: f64 = 1.3;
    let ph = C64::from_polar(1.0, beta / 2.0);
    let f0r = SpinorField { data: f0.data.iter().map(|p| p.scale_c(ph)).collect(), ..f0.clone() };
    let p = PhysicsParams { m: 1.0, q: 0.0, lambda: 0.1 };
    let defect = |dt: f64| {
        let s = SchemeConfig::new(0.5, Mode::Regularized).with_dt(dt);
        let (a, _) = evolve(f0.clone(), PotentialField::Zero, p, &s, 1000, |_, _| {}).unwrap();
        let (b, _) = evolve(f0r.clone(), PotentialField::Zero, p, &s, 1000, |_, _| {}).unwrap();
        a.data.iter().zip(&b.data).map(|(x, y)| (x.scale_c(ph) - *y).max_abs()).fold(0.0, f64::max)
    };
    let (d1, d2) = (defect(0.05), defect(0.025));
    assert!(d1 < 2e-3, "{d1}");
    let order = (d1 / d2).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn evolution_is_deterministic() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let s = SchemeConfig::new(0.3, Mode::Regularized);
    let p = PhysicsParams::default();
    let (a, _) = evolve(bump(g), PotentialField::Zero, p, &s, 1, |_, _| {}).unwrap();
    let (b, _) = evolve(bump(g), PotentialField::Zero, p, &s, 1, |_, _| {}).unwrap();
    assert_eq!(a, b);
}

#[test]
fn source_norm_bounded_along_trajectory() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let s = SchemeConfig::new(0.5, Mode::Regularized);
    let p = PhysicsParams::default();
    let dv = g.cell_volume();
    evolve(bump(g), PotentialField::Zero, p, &s, 1, |f, _| {
        let fl: f64 = f.data.iter().map(|x| crate::spinor::reg_source(x, p.lambda).norm_sq()).sum::<f64>() * dv;
        assert!(fl.sqrt() <= 2.0 * l2_norm(f));
    })
    .unwrap();
}

#[test]
fn norm_examples() {
    let g = Grid::new([8, 6, 4], [1.0, 2.0, 3.0]).unwrap();
    let z = norms(&SpinorField::zeros(g, 0.0));
    assert_eq!((z.l2, z.h1), (0.0, 0.0));
    let c = C64::new(0.6, -0.8) * 2.0;
    let f = SpinorField::from_fn(g, 0.0, |_| Paravector::scalar(c));
    let n = norms(&f);
    let expect = c.norm() * (2.0 * g.volume()).sqrt();
    assert!((n.l2 - expect).abs() < 1e-13 * expect);
    assert!((n.h1 - n.l2).abs() < 1e-13 * expect);
    let f = mode_field(g, [1, 2, -1], generic_spinor());
    let n = norms(&f);
    let k2: f64 = [1.0 / 1.0, 2.0 / 2.0, -1.0 / 3.0].iter().map(|x: &f64| (2.0 * PI * x).powi(2)).sum();
    assert!((n.h1 * n.h1 - (1.0 + k2) * n.l2 * n.l2).abs() < 1e-10 * n.h1 * n.h1);
}

#[test]
fn steps_land_on_t_end() {
    let g = Grid::cube(8, 1.0).unwrap();
    let s = SchemeConfig::new(1.0, Mode::Linear).with_dt(0.3);
    let (n, dt) = s.steps_for(&g);
    assert_eq!(n, 4);
    assert!((dt * n as f64 - 1.0).abs() < 1e-15);
    let warn = SchemeConfig::new(1.0, Mode::Linear).with_dt(1.0).validate(&g).unwrap();
    assert_eq!(warn.len(), 1);
}
