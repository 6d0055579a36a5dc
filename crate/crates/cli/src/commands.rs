use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cl3_dirac::clifford::suite::{run_algebra_suite, Mutation};
use cl3_dirac::clifford::Paravector;
use cl3_dirac::evolution::{evolve as run_evolution, EvolutionError, Grid};
use cl3_dirac::hydro::{
    refinement_study, window_residuals, Congruence, FlowPoint, Flowlines, HydroContext, HydroError, Law,
    LawResidual, RefinementSpec, Sector, VelocityGrid,
};
use cl3_dirac::io::{
    list_snapshots, read_snapshot, snapshot_name, step_log_line, write_flowline_csv, write_residual_csv,
    write_snapshot, InitialSpec, IoError, PotentialSpec, RunConfig,
};
use cl3_dirac::spinor::{
    nonlinear_residual, plane_wave_eval, plane_wave_grad_hat, reconstruct_m, Mode, PhysicsParams, PlaneWaveSpec,
    SpinorError,
};

use crate::Common;

/// Default `--strict` threshold on relative residuals.
const STRICT_DEFAULT: f64 = 1e-10;
const PLANEWAVE_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    Check(String),
    Validation(String),
    Numerical(String),
    Breach(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Breach(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(m) | Failure::Validation(m) | Failure::Numerical(m) | Failure::Breach(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SpinorError> for Failure {
    fn from(e: SpinorError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<EvolutionError> for Failure {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::BlowUp { .. } | EvolutionError::GrowthViolation { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<HydroError> for Failure {
    fn from(e: HydroError) -> Self {
        match e {
            HydroError::Evolution(e) => e.into(),
            HydroError::LeftDomain { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Validation(format!("{}: {e}", path.display()))
}

struct Loaded {
    cfg: RunConfig,
    base: PathBuf,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let path = common.config.as_ref().ok_or_else(|| Failure::Validation("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(s) = common.stride {
        cfg.output.stride = s;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    for w in cfg.validate()? {
        println!("event=warning msg={w:?}");
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { cfg, base })
}

fn out_dir(common: &Common, fallback: PathBuf) -> Result<PathBuf, Failure> {
    let dir = common.out.clone().unwrap_or(fallback);
    fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path).map_err(|e| io_fail(path, e))?))
}

pub fn algebra_test(common: &Common, cases: usize, mutation: Mutation) -> Result<(), Failure> {
    let seed = match (&common.seed, &common.config) {
        (Some(s), _) => *s,
        (None, Some(_)) => load(common)?.cfg.seed,
        (None, None) => 0,
    };
    let report = run_algebra_suite(cases, seed, mutation);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report.laws.iter().filter(|l| !l.passed()).map(|l| l.name).collect();
        Err(Failure::Check(format!("algebra invariants failed: {}", failed.join(", "))))
    }
}

pub struct PlanewaveArgs {
    pub m: Option<Vec<f64>>,
    pub n: Option<f64>,
    pub j: Option<Vec<f64>>,
    pub phi0: f64,
    pub steps: usize,
    pub dt: f64,
}

pub fn planewave(common: &Common, args: PlanewaveArgs) -> Result<(), Failure> {
    let PlanewaveArgs { m, n, j, phi0, steps, dt } = args;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Failure::Validation(format!("--dt must be positive, got {dt}")));
    }
    let from_flags = m.is_some() || n.is_some() || j.is_some();
    let (spec, grid, params, mode) = if from_flags {
        let m = match (m, n, j) {
            (Some(m), None, None) => Paravector::from_reals(
                m.try_into().map_err(|_| Failure::Validation("--m takes 8 comma-separated reals".into()))?,
            ),
            (None, Some(n), Some(j)) => {
                let j: [f64; 4] =
                    j.try_into().map_err(|_| Failure::Validation("--j takes 4 comma-separated reals".into()))?;
                reconstruct_m(n, &Paravector::real(j))?
            }
            _ => return Err(Failure::Validation("give either --m, or both --n and --j".into())),
        };
        let grid = Grid::cube(16, 2.0 * std::f64::consts::PI)?;
        (PlaneWaveSpec { m, phi0 }, grid, PhysicsParams::default(), Mode::Regularized)
    } else {
        let Loaded { cfg, .. } = load(common)?;
        let spec = cfg
            .plane_wave_spec()?
            .ok_or_else(|| Failure::Validation("config initial data is not a plane wave".into()))?;
        (spec, cfg.grid, cfg.physics, cfg.scheme.mode)
    };
    let v = spec.v()?;
    let vr = v.re_coeffs();
    let det_v = (v.det() - Paravector::ONE.c[0]).norm();
    let v0_err = (vr[0] - (1.0 + vr[1] * vr[1] + vr[2] * vr[2] + vr[3] * vr[3]).sqrt()).abs();
    let jm = spec.m * spec.m.dagger();
    println!(
        "event=planewave n={:e} j=[{:e},{:e},{:e},{:e}] m=[{}]",
        spec.n(),
        jm.c[0].re,
        jm.c[1].re,
        jm.c[2].re,
        jm.c[3].re,
        spec.m.to_reals().map(|x| format!("{x:e}")).join(",")
    );
    let mass = spec.phase_mass(&params, mode);
    let mut residual: f64 = 0.0;
    for idx in 0..grid.len() {
        let x = grid.position(idx);
        let xt = [0.0, x[0], x[1], x[2]];
        let phi = plane_wave_eval(&spec, mass, xt)?;
        let grad = plane_wave_grad_hat(&spec, mass, xt)?;
        let r = nonlinear_residual(&phi, &grad, &Paravector::ZERO, &params, mode)?;
        residual = residual.max(r.max_abs() / spec.m.max_abs().max(f64::MIN_POSITIVE));
    }
    println!("event=check residual={residual:e} det_v_err={det_v:e} v0_err={v0_err:e}");
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
        let format = common.format.unwrap_or_default();
        for k in 0..=steps {
            let field = cl3_dirac::evolution::plane_wave_field(grid, &spec, &params, mode, k as f64 * dt)?;
            let path = dir.join(snapshot_name(k, format));
            write_snapshot(&path, &field, format)?;
            println!("event=write path={}", path.display());
        }
    }
    let worst = residual.max(det_v).max(v0_err);
    if common.strict && worst > PLANEWAVE_TOL {
        return Err(Failure::Breach(format!("plane-wave check {worst:e} exceeds {PLANEWAVE_TOL:e}")));
    }
    Ok(())
}

pub fn evolve(common: &Common) -> Result<(), Failure> {
    let Loaded { cfg, base } = load(common)?;
    let dir = out_dir(common, cfg.output.dir.clone())?;
    cfg.save(&dir.join("config.toml"))?;
    let field0 = cfg.initial_field(&base)?;
    let pot = cfg.potential_field(&base)?;
    let format = cfg.output.format;
    let clock = Instant::now();
    let mut write_err = None;
    let (_, summary) = run_evolution(field0, pot, cfg.physics, &cfg.scheme, cfg.output.stride, |f, log| {
        if write_err.is_some() {
            return;
        }
        let path = dir.join(snapshot_name(log.step, format));
        if let Err(e) = write_snapshot(&path, f, format) {
            write_err = Some(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    for log in &summary.logs {
        println!("{}", step_log_line(log));
    }
    let drift = (summary.l2_final - summary.l2_initial).abs() / summary.l2_initial.max(f64::MIN_POSITIVE);
    let line = format!(
        "event=summary steps={} dt={:e} l2_initial={:e} l2_final={:e} l2_drift={drift:e} max_envelope_ratio={:e} growth=ok wall_s={:.3}",
        summary.steps,
        summary.dt,
        summary.l2_initial,
        summary.l2_final,
        summary.max_envelope_ratio,
        clock.elapsed().as_secs_f64()
    );
    println!("{line}");
    let path = dir.join("summary.txt");
    fs::write(&path, line + "\n").map_err(|e| io_fail(&path, e))?;
    Ok(())
}

fn strict_check(rows: &[LawResidual], threshold: f64) -> Result<(), Failure> {
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !(r.l2_rel() <= threshold))
        .map(|r| format!("{}[{}]={:e}", r.law.name(), r.sector_label(), r.l2_rel()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Breach(format!("residuals above {threshold:e}: {}", bad.join(" "))))
    }
}

pub fn hydro(common: &Common, snapshots: Option<PathBuf>) -> Result<(), Failure> {
    let Loaded { cfg, base } = load(common)?;
    let snap_dir = snapshots.unwrap_or_else(|| cfg.output.dir.clone());
    let files = list_snapshots(&snap_dir)?;
    let snaps = files.iter().map(|p| read_snapshot(p)).collect::<Result<Vec<_>, _>>()?;
    let stencil = cfg.diagnostics.stencil;
    if snaps.len() < stencil.points() {
        return Err(HydroError::InsufficientSnapshots { need: stencil.points(), got: snaps.len() }.into());
    }
    if snaps.iter().any(|s| s.grid != cfg.grid) {
        return Err(HydroError::GridMismatch.into());
    }
    let dir = out_dir(common, snap_dir.join("hydro"))?;
    let ctx = HydroContext::new(cfg.grid, cfg.potential_field(&base)?, cfg.physics, cfg.scheme.mode, cfg.scheme.derivative)?;
    let rows = window_residuals(&ctx, &snaps, stencil, &Law::ALL)?;
    for law in Law::ALL {
        let mine: Vec<LawResidual> = rows.iter().filter(|r| r.law == law).cloned().collect();
        let path = dir.join(format!("residuals_{}.csv", law.name()));
        write_residual_csv(create(&path)?, &mine)?;
    }
    for r in &rows {
        println!(
            "event=residual law={} sector={} l2_rel={:e} linf_rel={:e} masked_fraction={}",
            r.law.name(),
            r.sector_label(),
            r.l2_rel(),
            r.linf_rel(),
            r.masked_fraction
        );
    }

    let seeds = &cfg.diagnostics.seeds;
    if !seeds.is_empty() {
        let span = (snaps[0].t, snaps[snaps.len() - 1].t);
        let mut traced: Vec<(String, Vec<FlowPoint>)> = vec![];
        for cong in [Congruence::Chiral(Sector::Right), Congruence::Chiral(Sector::Left), Congruence::Pilot] {
            let vel = VelocityGrid::from_snapshots(&ctx, &snaps, cong)?;
            for (i, seed) in seeds.iter().enumerate() {
                let id = format!("{}-{i}", cong.label());
                match Flowlines::trace(&vel, cong, &[*seed], span, cfg.diagnostics.flow_steps) {
                    Ok(mut f) => traced.push((id, f.lines.remove(0))),
                    Err(e) => println!("event=warning line={id} msg={:?}", e.to_string()),
                }
            }
        }
        let path = dir.join("flowlines.csv");
        write_flowline_csv(create(&path)?, traced.iter().map(|(id, l)| (id.clone(), l.as_slice())))?;
        println!("event=write path={} lines={}", path.display(), traced.len());
    }
    if common.strict {
        strict_check(&rows, cfg.diagnostics.threshold.unwrap_or(STRICT_DEFAULT))?;
    }
    Ok(())
}

pub fn convergence(common: &Common, levels: &[usize], t_center: f64, cfl: f64) -> Result<(), Failure> {
    let Loaded { cfg, base } = load(common)?;
    let potential = match &cfg.potential {
        PotentialSpec::Zero => Paravector::ZERO,
        PotentialSpec::Constant { a } => Paravector::real(*a),
        PotentialSpec::Sampled { .. } => {
            return Err(Failure::Validation("convergence needs a zero or constant potential".into()))
        }
    };
    if matches!(cfg.initial, InitialSpec::File { .. }) {
        return Err(Failure::Validation("convergence needs analytic initial data".into()));
    }
    if levels.len() < 2 {
        return Err(Failure::Validation("convergence needs at least two levels".into()));
    }
    let dir = out_dir(common, cfg.output.dir.clone())?;
    let spec = RefinementSpec {
        extent: cfg.grid.extent,
        ns: levels.to_vec(),
        params: cfg.physics,
        mode: cfg.scheme.mode,
        derivative: cfg.scheme.derivative,
        potential,
        cfl,
        t_center,
        stencil: cfg.diagnostics.stencil,
        laws: Law::ALL.to_vec(),
    };
    // Grids are validated by the study; the initial data only depends on them.
    let init_err = std::cell::RefCell::new(None);
    let report = refinement_study(&spec, |grid| {
        let mut c = cfg.clone();
        c.grid = grid;
        c.initial_field(&base).unwrap_or_else(|e| {
            *init_err.borrow_mut() = Some(e);
            cl3_dirac::evolution::SpinorField::zeros(grid, 0.0)
        })
    });
    if let Some(e) = init_err.into_inner() {
        return Err(e.into());
    }
    let report = report?;
    for l in &report.levels {
        println!("event=level n={} dt={:e} steps={} wall_s={:.3}", l.n, l.dt, l.steps, l.seconds);
    }
    let path = dir.join("convergence.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let csv_err = |e: csv::Error| Failure::Validation(format!("{}: {e}", path.display()));
    w.write_record(["law", "sector", "n_coarse", "n_fine", "coarse_l2_rel", "fine_l2_rel", "order", "pass"])
        .map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.law.name().to_string(),
            r.sector_label().to_string(),
            r.n_coarse.to_string(),
            r.n_fine.to_string(),
            format!("{:e}", r.coarse),
            format!("{:e}", r.fine),
            format!("{:.3}", r.order),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
        println!(
            "event=order law={} sector={} n={}->{} coarse={:e} fine={:e} order={:.3} pass={}",
            r.law.name(),
            r.sector_label(),
            r.n_coarse,
            r.n_fine,
            r.coarse,
            r.fine,
            r.order,
            r.pass
        );
    }
    w.flush().map_err(|e| io_fail(&path, e))?;
    if common.strict && !report.passed() {
        return Err(Failure::Breach(format!("refinement orders below {} - 0.3", report.nominal)));
    }
    Ok(())
}
