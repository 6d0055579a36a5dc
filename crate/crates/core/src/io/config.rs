use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_snapshot, IoError};
use crate::clifford::Paravector;
use crate::evolution::{periodic_gaussian, plane_wave_field, Grid, PotentialField, SchemeConfig, SpinorField};
use crate::hydro::Stencil;
use crate::spinor::{reconstruct_m, PhysicsParams, PlaneWaveSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { a: [f64; 4] },
    /// A snapshot file whose real coefficient parts hold `A`.
    Sampled { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Either `m` (8 reals: re/im of each coefficient) or the pair `(n, j)`.
    Planewave {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<[f64; 8]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        j: Option<[f64; 4]>,
        #[serde(default)]
        phi0: f64,
    },
    /// `spinor · bump(x)`, with the periodic Gaussian bump.
    Gaussian { center: [f64; 3], sigma: f64, spinor: [f64; 8] },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Bin,
    Csv,
}

fn default_stride() -> usize {
    1
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), stride: 1, format: Format::Bin }
    }
}

fn default_flow_steps() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    #[serde(default)]
    pub stencil: Stencil,
    /// Flowline seeds; none means no flowlines.
    #[serde(default)]
    pub seeds: Vec<[f64; 3]>,
    #[serde(default = "default_flow_steps")]
    pub flow_steps: usize,
    /// Relative residual above which `--strict` fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self { stencil: Stencil::Three, seeds: vec![], flow_steps: default_flow_steps(), threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub physics: PhysicsParams,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| IoError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let s = std::fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> Result<String, IoError> {
        toml::to_string(self).map_err(|e| IoError::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_toml()?).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))
    }

    /// Checks every sub-invariant; returns scheme warnings.
    pub fn validate(&self) -> Result<Vec<String>, IoError> {
        let bad = |m: String| Err(IoError::Config(m));
        self.grid.validate().map_err(|e| IoError::Config(e.to_string()))?;
        self.physics.validate(self.scheme.mode).map_err(|e| IoError::Config(e.to_string()))?;
        let warnings = self.scheme.validate(&self.grid).map_err(|e| IoError::Config(e.to_string()))?;
        if self.output.stride == 0 {
            return bad("output.stride must be >= 1".into());
        }
        match &self.potential {
            PotentialSpec::Constant { a } if !finite(a) => return bad("potential.a must be finite".into()),
            _ => {}
        }
        match &self.initial {
            InitialSpec::Planewave { m, n, j, phi0 } => {
                if !phi0.is_finite() {
                    return bad("initial.phi0 must be finite".into());
                }
                match (m, n, j) {
                    (Some(m), None, None) if finite(m) => {}
                    (None, Some(n), Some(j)) if n.is_finite() && finite(j) => {}
                    _ => return bad("initial planewave needs either m, or both n and j".into()),
                }
            }
            InitialSpec::Gaussian { center, sigma, spinor } => {
                if !(*sigma > 0.0 && sigma.is_finite()) || !finite(center) || !finite(spinor) {
                    return bad("initial gaussian needs finite center/spinor and sigma > 0".into());
                }
            }
            InitialSpec::File { .. } => {}
        }
        Ok(warnings)
    }

    /// Relative paths resolve against `base`.
    pub fn potential_field(&self, base: &Path) -> Result<PotentialField, IoError> {
        Ok(match &self.potential {
            PotentialSpec::Zero => PotentialField::Zero,
            PotentialSpec::Constant { a } => PotentialField::Constant(Paravector::real(*a)),
            PotentialSpec::Sampled { path } => {
                let snap = read_snapshot(&base.join(path))?;
                if snap.grid != self.grid {
                    return Err(IoError::Config("sampled potential grid differs from run grid".into()));
                }
                let pot = PotentialField::Sampled(snap.data);
                pot.validate(&self.grid).map_err(|e| IoError::Config(e.to_string()))?;
                pot
            }
        })
    }

    pub fn plane_wave_spec(&self) -> Result<Option<PlaneWaveSpec>, IoError> {
        let InitialSpec::Planewave { m, n, j, phi0 } = &self.initial else { return Ok(None) };
        let m = match (m, n, j) {
            (Some(m), _, _) => Paravector::from_reals(*m),
            (None, Some(n), Some(j)) => {
                reconstruct_m(*n, &Paravector::real(*j)).map_err(|e| IoError::Config(e.to_string()))?
            }
            _ => return Err(IoError::Config("initial planewave needs either m, or both n and j".into())),
        };
        let spec = PlaneWaveSpec { m, phi0: *phi0 };
        spec.v().map_err(|e| IoError::Config(e.to_string()))?;
        Ok(Some(spec))
    }

    pub fn initial_field(&self, base: &Path) -> Result<SpinorField, IoError> {
        let grid = self.grid;
        match &self.initial {
            InitialSpec::Planewave { .. } => {
                let spec = self.plane_wave_spec()?.expect("planewave variant");
                plane_wave_field(grid, &spec, &self.physics, self.scheme.mode, 0.0)
                    .map_err(|e| IoError::Config(e.to_string()))
            }
            InitialSpec::Gaussian { center, sigma, spinor } => {
                let p = Paravector::from_reals(*spinor);
                Ok(SpinorField::from_fn(grid, 0.0, |x| p.scale(periodic_gaussian(&grid, *center, *sigma, x))))
            }
            InitialSpec::File { path } => {
                let snap = read_snapshot(&base.join(path))?;
                if snap.grid != grid {
                    return Err(IoError::Config("initial file grid differs from run grid".into()));
                }
                Ok(snap)
            }
        }
    }
}
