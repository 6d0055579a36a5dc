//! Randomized invariant suite for the algebra, checked against the 2×2
//! matrix representation where an oracle exists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    boost, exp, factor_boost_rotation, lorentz_apply, projector_p, projector_p_bar, rotation, Matrix2C, Paravector,
    C64, I,
};

/// Deliberate defects used to show that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Product with `e_k e_l = δ_{kl} - i ε_{klm} e_m`.
    ProductSign,
    /// `bar` that also conjugates.
    BarConjugates,
}

impl std::str::FromStr for Mutation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Mutation::None),
            "product-sign" => Ok(Mutation::ProductSign),
            "bar-conjugates" => Ok(Mutation::BarConjugates),
            _ => Err(format!("unknown mutation {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_err: f64,
    pub tol: f64,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.max_err <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub cases: usize,
    pub laws: Vec<LawReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(LawReport::passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawReport> {
        self.laws.iter().find(|l| l.name == name)
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "seed={} cases={}", self.seed, self.cases)?;
        for l in &self.laws {
            let status = if l.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "law={} cases={} max_err={:e} tol={:e} status={status}", l.name, l.cases, l.max_err, l.tol)?;
        }
        write!(f, "result={}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

struct Ops {
    mutation: Mutation,
}

impl Ops {
    fn mul(&self, p: &Paravector, q: &Paravector) -> Paravector {
        match self.mutation {
            // Reversed order flips only the ε term.
            Mutation::ProductSign => q.prod(p),
            _ => p.prod(q),
        }
    }

    fn bar(&self, p: &Paravector) -> Paravector {
        match self.mutation {
            Mutation::BarConjugates => p.bar().dagger(),
            _ => p.bar(),
        }
    }

    fn hat(&self, p: &Paravector) -> Paravector {
        self.bar(p).dagger()
    }
}

struct Acc {
    name: &'static str,
    tol: f64,
    cases: usize,
    max_err: f64,
}

impl Acc {
    fn new(name: &'static str, tol: f64) -> Self {
        Self { name, tol, cases: 0, max_err: 0.0 }
    }

    fn push(&mut self, err: f64) {
        self.cases += 1;
        // NaN counts as failure.
        self.max_err = if err.is_nan() { f64::INFINITY } else { self.max_err.max(err) };
    }

    fn report(self) -> LawReport {
        LawReport { name: self.name, cases: self.cases, max_err: self.max_err, tol: self.tol }
    }
}

fn random_c(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_p(rng: &mut impl Rng) -> Paravector {
    Paravector::new(random_c(rng), random_c(rng), random_c(rng), random_c(rng))
}

fn random_vec3(rng: &mut impl Rng, r: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(-r..r))
}

fn mat_dist(a: &Matrix2C, b: &Matrix2C) -> f64 {
    a.to_paravector().dist(&b.to_paravector())
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

/// Runs every invariant over `cases` random inputs drawn from `seed`.
/// `cases = 0` yields an empty (passing) report.
pub fn run_algebra_suite(cases: usize, seed: u64, mutation: Mutation) -> SuiteReport {
    let mut laws = vec![];
    if cases == 0 {
        return SuiteReport { seed, cases, laws };
    }
    let ops = Ops { mutation };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = Paravector::basis;

    let mut structure = Acc::new("structure_equations", 0.0);
    for k in 1..4 {
        for l in 1..4 {
            let s = ops.mul(&e(k), &e(l)) + ops.mul(&e(l), &e(k));
            let want = if k == l { Paravector::ONE.scale(2.0) } else { Paravector::ZERO };
            structure.push((s - want).max_abs());
        }
    }
    laws.push(structure.report());

    let mut pseudo = Acc::new("pseudoscalar", 1e-15);
    let i3 = ops.mul(&ops.mul(&e(1), &e(2)), &e(3));
    pseudo.push((ops.mul(&i3, &i3) + Paravector::ONE).max_abs());
    pseudo.push((i3 - Paravector::scalar(I)).max_abs());
    for mu in 0..4 {
        pseudo.push((ops.mul(&i3, &e(mu)) - ops.mul(&e(mu), &i3)).max_abs());
    }
    laws.push(pseudo.report());

    let mut quaternion = Acc::new("even_subalgebra", 1e-12);
    for k in 1..4 {
        let q = e(k).scale_c(I);
        quaternion.push((ops.mul(&q, &q) + Paravector::ONE).max_abs());
    }

    let p_proj = projector_p();
    let p_bar = projector_p_bar();
    let mut projector = Acc::new("projector", 1e-12);
    projector.push((ops.mul(&p_proj, &p_proj) - p_proj).max_abs());
    projector.push(ops.mul(&p_proj, &p_bar).max_abs());
    projector.push(ops.mul(&p_bar, &p_proj).max_abs());

    let mut oracle_prod = Acc::new("oracle_product", 1e-12);
    let mut oracle_inv = Acc::new("oracle_involutions", 1e-12);
    let mut oracle_det = Acc::new("oracle_det", 1e-12);
    let mut oracle_inverse = Acc::new("oracle_inverse", 1e-12);
    let mut oracle_sp = Acc::new("oracle_scalar_product", 1e-12);
    let mut matrix_trip = Acc::new("matrix_round_trip", 1e-15);
    let mut hom = Acc::new("involution_laws", 1e-12);
    let mut pp_scalar = Acc::new("p_bar_p_scalar", 1e-13);
    let mut cyclic = Acc::new("cyclic_scalar", 1e-12);
    let mut fierz = Acc::new("fierz", 1e-12);
    let mut coeffs = Acc::new("coefficient_identity", 1e-12);
    let mut lift = Acc::new("current_lift", 1e-12);

    for _ in 0..cases {
        let p = random_p(&mut rng);
        let q = random_p(&mut rng);
        let (np, nq) = (p.norm(), q.norm());
        let (mp, mq) = (p.to_matrix(), q.to_matrix());

        let pq = ops.mul(&p, &q);
        oracle_prod.push(rel(mat_dist(&pq.to_matrix(), &mp.matmul(&mq)), np * nq));
        let inv_err = [
            mat_dist(&p.dagger().to_matrix(), &mp.adjoint()),
            mat_dist(&ops.bar(&p).to_matrix(), &mp.adjugate()),
            mat_dist(&ops.hat(&p).to_matrix(), &mp.adjugate().adjoint()),
        ];
        oracle_inv.push(rel(inv_err.into_iter().fold(0.0, f64::max), np));
        oracle_det.push(rel((p.det() - mp.det()).norm(), np * np));
        if let Ok(pinv) = p.inverse() {
            let d = mp.det();
            let adj = mp.adjugate();
            let [[a, b], [c, dd]] = adj.m;
            let m_inv = Matrix2C::new(a / d, b / d, c / d, dd / d);
            oracle_inverse.push(rel(mat_dist(&pinv.to_matrix(), &m_inv), m_inv.to_paravector().norm()));
            let one = ops.mul(&p, &pinv);
            oracle_inverse.push((one - Paravector::ONE).max_abs() / (np * pinv.norm()));
        }
        let sp_matrix = mp.matmul(&mq.adjugate()).trace() * 0.5;
        oracle_sp.push(rel((p.scalar_product(&q) - sp_matrix).norm(), np * nq));
        matrix_trip.push(rel(Paravector::from_matrix(&mp).dist(&p), np));

        let scale2 = np * nq;
        let laws_err = [
            ops.mul(&p, &q).dagger().dist(&ops.mul(&q.dagger(), &p.dagger())),
            ops.bar(&pq).dist(&ops.mul(&ops.bar(&q), &ops.bar(&p))),
            ops.hat(&pq).dist(&ops.mul(&ops.hat(&p), &ops.hat(&q))),
        ];
        hom.push(rel(laws_err.into_iter().fold(0.0, f64::max), scale2));
        let twice = [ops.bar(&ops.bar(&p)).dist(&p), ops.hat(&ops.hat(&p)).dist(&p), p.dagger().dagger().dist(&p)];
        hom.push(rel(twice.into_iter().fold(0.0, f64::max), np));

        pp_scalar.push(rel(ops.mul(&p, &ops.bar(&p)).vector_part().norm(), np * np));
        cyclic.push(rel((pq.scalar_part() - ops.mul(&q, &p).scalar_part()).norm(), scale2));

        let (ep, eq) = (p.even(), q.even());
        quaternion.push(rel(ops.mul(&ep, &eq).odd().norm(), ep.norm() * eq.norm()));

        let pb = ops.bar(&p);
        let mut fz = Paravector::ZERO;
        for mu in 0..4 {
            fz += ops.mul(&ops.mul(&Paravector::dual_basis(mu), &pb), &e(mu));
        }
        fierz.push(rel(fz.scale(-0.5).dist(&p), np));

        let ph = ops.hat(&p);
        let pd = p.dagger();
        let lifted = ops.mul(&ops.mul(&p, &p_bar), &pd);
        for mu in 0..4 {
            let left = ops.mul(&ops.mul(&pb, &Paravector::dual_basis(mu)), &ph);
            for nu in 0..4 {
                let right = ops.mul(&ops.mul(&p, &e(nu)), &pd);
                coeffs.push(rel((left.lower(nu) - right.c[mu]).norm(), np * np));
            }
            let sandwich = ops.mul(&ops.mul(&p_proj, &left), &p_proj);
            lift.push(rel((sandwich.scalar_part() - lifted.c[mu]).norm(), np * np));
        }

        let ppp = ops.mul(&ops.mul(&p_proj, &p), &p_proj);
        projector.push(rel(ppp.dist(&p_proj.scale_c(p.c[0] + p.c[3])), np));
    }

    let mut det_keep = Acc::new("lorentz_det", 1e-11);
    let mut real_keep = Acc::new("lorentz_realness", 1e-11);
    let mut factor = Acc::new("boost_rotation_factor", 1e-10);
    let mut exp_form = Acc::new("exp_generators", 1e-12);
    for _ in 0..cases.div_ceil(10) {
        let w = random_vec3(&mut rng, 1.5);
        let th = random_vec3(&mut rng, 3.0);
        let (b, r) = (boost(w), rotation(th));
        let l = b.compose(&r);
        let x = Paravector::real([0; 4].map(|_| rng.gen_range(-1.0..1.0)));
        let y = lorentz_apply(&l, &x);
        let scale = l.as_paravector().norm_sq() * x.norm_sq();
        det_keep.push(rel((y.det() - x.det()).norm(), scale));
        real_keep.push(rel(y.im().norm(), l.as_paravector().norm_sq() * x.norm()));
        match factor_boost_rotation(&l) {
            Ok((b2, r2)) => {
                let err = b2.as_paravector().dist(b.as_paravector()).max(r2.as_paravector().dist(r.as_paravector()));
                factor.push(err.max(b2.as_paravector().im().norm()));
            }
            Err(_) => factor.push(f64::INFINITY),
        }
        let half_w = Paravector::real([0.0, w[0] / 2.0, w[1] / 2.0, w[2] / 2.0]);
        let half_th = Paravector::real([0.0, th[0] / 2.0, th[1] / 2.0, th[2] / 2.0]).scale_c(-I);
        exp_form.push(exp(&half_w).dist(b.as_paravector()));
        exp_form.push(exp(&half_th).dist(r.as_paravector()));
    }

    laws.extend([
        quaternion.report(),
        projector.report(),
        oracle_prod.report(),
        oracle_inv.report(),
        oracle_det.report(),
        oracle_inverse.report(),
        oracle_sp.report(),
        matrix_trip.report(),
        hom.report(),
        pp_scalar.report(),
        cyclic.report(),
        fierz.report(),
        coeffs.report(),
        lift.report(),
        det_keep.report(),
        real_keep.report(),
        factor.report(),
        exp_form.report(),
    ]);
    SuiteReport { seed, cases, laws }
}
