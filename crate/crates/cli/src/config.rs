//! Experiment configuration in TOML and its translation into core objects.

use std::path::{Path, PathBuf};

use neurohom::io::{read_field, FieldData};
use neurohom::micro::{CellSampled, LimitAtInfinity, TrigPoly};
use neurohom::{
    Activation, CellGrid, FiringRate, Integrator, KernelSpec, KernelTerm, MacroGrid, MicroFunction, PicardConfig,
    Profile, TestFunction, TimeFactor, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The configuration shipped as the default experiment.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

/// Control experiment without microstructure.
pub const DEGENERATE_CONFIG: &str = include_str!("../../../configs/degenerate.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SolveHetero,
    SolveHomog,
    Sweep,
    Verify,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorChoice {
    Picard,
    Rk4,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub dimension: usize,
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorChoice,
    pub schedule: Vec<f64>,
    pub kernel: KernelConfig,
    pub firing: FiringConfig,
    pub initial: Profile,
    pub tests: TestFamilyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_mode() -> Mode {
    Mode::Sweep
}

fn default_integrator() -> IntegratorChoice {
    IntegratorChoice::Rk4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
    pub cell_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub step: f64,
    #[serde(default = "one_usize")]
    pub stride: usize,
}

fn one_usize() -> usize {
    1
}

/// Picard settings; `rho` defaults to `0.9 / (2 (k1 + 1))`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    pub rho: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Normalize the overall scale so the largest mass over the schedule equals this value.
    pub mass: Option<f64>,
    /// Explicit overall scale, used when `mass` is absent.
    pub scale: Option<f64>,
    pub terms: Vec<KernelTermConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTermConfig {
    pub profile: Profile,
    pub micro: MicroSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ActivationSpec {
    Sigmoid { gain: f64, threshold: f64 },
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiringConfig {
    pub activation: ActivationSpec,
    pub g: MicroSpec,
}

/// Literal microstructure. Each value names exactly one algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MicroSpec {
    Constant {
        value: f64,
    },
    /// `sum amp cos(2 pi k.y + phase)`; `k` is an integer index over the
    /// generators, which default to the unit vectors.
    Trig {
        #[serde(default)]
        generators: Option<Vec<Vec<f64>>>,
        terms: Vec<TrigTerm>,
    },
    /// Cell samples read from a macro-only field file whose nodes are taken as `y_j = j / M`.
    CellFile {
        path: PathBuf,
    },
    LimitAtInfinity {
        core: Profile,
        limit: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub k: Vec<i64>,
    pub amp: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFamilyConfig {
    /// Macro factors `phi_i`.
    pub macro_factors: Vec<Profile>,
    /// Micro factors `1, cos(2 pi k.y), sin(2 pi k.y)` for `|k|_inf <= max_harmonic`, one of each `+-k` pair.
    pub max_harmonic: i64,
    #[serde(default)]
    pub time: TimeFactor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Dump every output state of single solves instead of only the first and last.
    #[serde(default)]
    pub trajectory_dumps: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            trajectory_dumps: false,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl MicroSpec {
    /// Builds the function in dimension `dim`; relative file paths resolve against `base`.
    pub fn build(&self, dim: usize, base: &Path) -> Result<MicroFunction, CliError> {
        Ok(match self {
            MicroSpec::Constant { value } => MicroFunction::constant(dim, *value),
            MicroSpec::Trig { generators, terms } => {
                let gens = generators.clone().unwrap_or_else(|| {
                    (0..dim)
                        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                        .collect()
                });
                let t: Vec<(Vec<i64>, f64, f64)> = terms.iter().map(|t| (t.k.clone(), t.amp, t.phase)).collect();
                let poly = TrigPoly::from_cosines(gens, &t)?;
                if poly.dim() != dim {
                    return Err(CliError::Config(format!(
                        "trig microstructure has dimension {}, experiment has {dim}",
                        poly.dim()
                    )));
                }
                MicroFunction::TrigPoly(poly)
            }
            MicroSpec::CellFile { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                match read_field(&full)? {
                    FieldData::Macro(f) => {
                        let g = f.grid();
                        if g.dim() != dim {
                            return Err(CliError::Config(format!(
                                "{} has dimension {}",
                                full.display(),
                                g.dim()
                            )));
                        }
                        MicroFunction::CellSampled(CellSampled::new(dim, g.points_per_axis(), f.into_values())?)
                    }
                    FieldData::TwoScale(_) => {
                        return Err(CliError::Config(format!(
                            "{} holds a two-scale field, expected cell samples",
                            full.display()
                        )))
                    }
                }
            }
            MicroSpec::LimitAtInfinity { core, limit } => {
                MicroFunction::LimitAtInfinity(LimitAtInfinity::new(dim, core.clone(), *limit)?)
            }
        })
    }
}

impl ActivationSpec {
    pub fn build(&self) -> Activation {
        match *self {
            ActivationSpec::Sigmoid { gain, threshold } => Activation::sigmoid(gain, threshold),
            ActivationSpec::Linear => Activation::Linear,
        }
    }
}

/// A validated configuration with every object constructed.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub grid: MacroGrid,
    pub cell: CellGrid,
    pub time: TimeGrid,
    pub kernel: KernelSpec,
    pub firing: FiringRate,
    pub picard: PicardConfig,
    pub family: Vec<TestFunction>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn default_experiment() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("shipped default config parses")
    }

    pub fn degenerate_experiment() -> Self {
        Self::parse(DEGENERATE_CONFIG).expect("shipped degenerate config parses")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |m: &mut MicroSpec| {
            if let MicroSpec::CellFile { path } = m {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        for t in &mut self.kernel.terms {
            fix(&mut t.micro);
        }
        fix(&mut self.firing.g);
    }

    pub fn macro_grid(&self) -> Result<MacroGrid, CliError> {
        Ok(MacroGrid::new(self.dimension, self.grid.half_width, self.grid.points)?)
    }

    pub fn cell_grid(&self) -> Result<CellGrid, CliError> {
        Ok(CellGrid::new(self.dimension, self.grid.cell_points)?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.time.horizon, self.time.step, self.time.stride)?)
    }

    pub fn firing_rate(&self) -> Result<FiringRate, CliError> {
        let g = self.firing.g.build(self.dimension, Path::new("."))?;
        Ok(FiringRate::new(g, self.firing.activation.build())?)
    }

    pub fn kernel_terms(&self) -> Result<Vec<KernelTerm>, CliError> {
        self.kernel
            .terms
            .iter()
            .map(|t| {
                Ok(KernelTerm {
                    profile: t.profile.clone(),
                    micro: t.micro.build(self.dimension, Path::new("."))?,
                })
            })
            .collect()
    }

    pub fn kernel_spec(&self, grid: &MacroGrid) -> Result<KernelSpec, CliError> {
        let terms = self.kernel_terms()?;
        match (self.kernel.mass, self.kernel.scale) {
            (Some(m), None) => Ok(KernelSpec::normalized(terms, m, grid, &self.schedule)?),
            (None, Some(s)) => Ok(KernelSpec::new(terms, s)?),
            _ => Err(CliError::Config(
                "kernel needs exactly one of `mass` and `scale`".into(),
            )),
        }
    }

    pub fn picard_config(&self, k1: f64) -> PicardConfig {
        let mut pc = PicardConfig::default_for(k1);
        if let Some(r) = self.picard.rho {
            pc.rho = r;
        }
        if let Some(s) = self.picard.max_sweeps {
            pc.max_sweeps = s;
        }
        if let Some(t) = self.picard.tolerance {
            pc.tolerance = t;
        }
        pc
    }

    pub fn integrators(&self, k1: f64) -> Vec<Integrator> {
        let picard = Integrator::Picard(self.picard_config(k1));
        match self.integrator {
            IntegratorChoice::Picard => vec![picard],
            IntegratorChoice::Rk4 => vec![Integrator::Rk4],
            IntegratorChoice::Both => vec![picard, Integrator::Rk4],
        }
    }

    /// The tensor-product test family `phi_i x {1, cos, sin}`.
    pub fn test_family(&self) -> Result<Vec<TestFunction>, CliError> {
        let dim = self.dimension;
        let kmax = self.tests.max_harmonic;
        if kmax < 0 {
            return Err(CliError::Config("max_harmonic must be nonnegative".into()));
        }
        let mut waves: Vec<Vec<i64>> = Vec::new();
        let range: Vec<i64> = (-kmax..=kmax).collect();
        let all: Vec<Vec<i64>> = if dim == 1 {
            range.iter().map(|a| vec![*a]).collect()
        } else {
            range
                .iter()
                .flat_map(|a| range.iter().map(move |b| vec![*a, *b]))
                .collect()
        };
        for k in all {
            // one representative of each +-k pair: first nonzero component positive
            if k.iter().find(|c| **c != 0).is_some_and(|c| *c > 0) {
                waves.push(k);
            }
        }
        let mut micro = vec![("1".to_string(), MicroFunction::constant(dim, 1.0))];
        for k in &waves {
            let tag = k.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_");
            micro.push((
                format!("cos{tag}"),
                MicroFunction::periodic_cosines(dim, &[(k.clone(), 1.0, 0.0)])?,
            ));
            micro.push((
                format!("sin{tag}"),
                MicroFunction::periodic_cosines(dim, &[(k.clone(), 1.0, -std::f64::consts::FRAC_PI_2)])?,
            ));
        }
        let mut family = Vec::new();
        for (i, phi) in self.tests.macro_factors.iter().enumerate() {
            for (tag, w) in &micro {
                family.push(
                    TestFunction::new(format!("phi{i}_{tag}"), phi.clone(), w.clone())
                        .with_time(self.tests.time.clone()),
                );
            }
        }
        Ok(family)
    }

    /// Constructs every object, failing on the first construction error.
    pub fn build(&self) -> Result<Experiment, CliError> {
        let grid = self.macro_grid()?;
        let firing = self.firing_rate()?;
        Ok(Experiment {
            config: self.clone(),
            grid,
            cell: self.cell_grid()?,
            time: self.time_grid()?,
            kernel: self.kernel_spec(&grid)?,
            picard: self.picard_config(firing.k1()),
            family: self.test_family()?,
            firing,
        })
    }
}
