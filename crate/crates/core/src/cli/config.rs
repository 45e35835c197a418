//! Problem configuration files (JSON, schema 1).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cauchy::{CauchyStructure, Entourage, EntourageBase};
use crate::error::{Error, Result};
use crate::limspace::LimOperator;
use crate::maps::Builtin;
use crate::seqcore::{EqRule, MapRef, Point};
use crate::solver::{Mode, SolveConfig};
use crate::spaces::{DistanceSpec, LambdaMap, PointPsi, PsiRule, Value};
use crate::table::DistanceTable;
use crate::verdict::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_PREFIX_ENV: &str = "LIMFIX_MAX_PREFIX";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Real { dim: usize },
    Finite { size: usize },
}

/// A start point: a label index on finite spaces, coordinates on real ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartConfig {
    Label(usize),
    Real(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistanceConfig {
    Euclidean {},
    Sup {},
    PartialMetricMax {},
    DislocatedSum {},
    Cone {
        dim: usize,
    },
    /// Either `path` to a `{points, values}` file or the two fields inline.
    Table {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        points: Option<serde_json::Value>,
        #[serde(default)]
        values: Option<serde_json::Value>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointPsiKind {
    StepSum,
    NormSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiKind {
    Sum,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureConfig {
    Uniform {
        radii: Vec<f64>,
        #[serde(default)]
        diagonal: bool,
    },
    Distance {
        distance: DistanceConfig,
    },
    Psi {
        rule: PointPsiKind,
        #[serde(default)]
        distance: Option<DistanceConfig>,
        #[serde(default)]
        cap: Option<f64>,
    },
    PsiD {
        psi: PsiKind,
        distance: DistanceConfig,
        #[serde(default)]
        cap: Option<Value>,
    },
    Orbit {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitConfig {
    PartialLimits {
        #[serde(default)]
        anchors: Vec<StartConfig>,
    },
    Discrete {},
    CLim {
        #[serde(default)]
        pool: Vec<StartConfig>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaConfig {
    Scale { c: f64 },
    ComponentScale { c: Vec<f64> },
    Shift { c: f64 },
    Zero {},
    Identity {},
}

impl LambdaConfig {
    pub fn build(&self) -> LambdaMap {
        match self {
            LambdaConfig::Scale { c } => LambdaMap::Scale(*c),
            LambdaConfig::ComponentScale { c } => LambdaMap::ComponentScale(c.clone()),
            LambdaConfig::Shift { c } => LambdaMap::Shift(*c),
            LambdaConfig::Zero {} => LambdaMap::Zero,
            LambdaConfig::Identity {} => LambdaMap::Identity,
        }
    }
}

/// Parameters of the specialized solvers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionConfig {
    /// `λ₂` for the sandwich, `λ` for the ψ,d condition.
    pub lambda: Option<LambdaConfig>,
    /// `λ₁` for the sandwich; defaults to the zero map.
    pub lambda_lower: Option<LambdaConfig>,
    /// Orbit bound for the ψ,d condition.
    pub alpha: Option<Value>,
    /// Coefficient `c` of the potential `φ(x) = c·‖x‖∞`.
    pub potential: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_iter: Option<usize>,
    pub residual_bound: Option<f64>,
    pub sandwich_levels: Option<usize>,
    pub lambda_iters: Option<usize>,
    pub point_eq: Option<EqRule>,
    pub cycle_eq: Option<EqRule>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema: u32,
    pub space: SpaceConfig,
    pub function: Builtin,
    pub start: StartConfig,
    pub structure: StructureConfig,
    #[serde(default)]
    pub limit: Option<LimitConfig>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub contraction: ContractionConfig,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub uniqueness_probe: Vec<(StartConfig, StartConfig)>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated configuration with every component built.
pub struct Problem {
    pub config: ProblemConfig,
    pub map: MapRef,
    pub start: Point,
    pub structure: CauchyStructure,
    pub limit: LimOperator,
    pub solve: SolveConfig,
    /// Distance of the structure, when it has one.
    pub distance: Option<DistanceSpec>,
    pub base_dir: PathBuf,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<ProblemConfig> {
        let cfg: ProblemConfig =
            serde_json::from_str(text).map_err(|e| config_err(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn point(&self, s: &StartConfig) -> Result<Point> {
        match (&self.space, s) {
            (SpaceConfig::Finite { size }, StartConfig::Label(i)) => {
                Point::label(*i, *size).map_err(|e| config_err(e.to_string()))
            }
            (SpaceConfig::Real { dim }, StartConfig::Real(v)) if v.len() == *dim => {
                Point::real(v.clone()).map_err(|e| config_err(e.to_string()))
            }
            (SpaceConfig::Real { dim: 1 }, StartConfig::Label(i)) => Ok(Point::scalar(*i as f64)),
            (space, s) => Err(config_err(format!("point {s:?} does not belong to {space:?}"))),
        }
    }

    pub fn build(self, base_dir: &Path) -> Result<Problem> {
        match &self.space {
            SpaceConfig::Real { dim } if *dim == 0 => return Err(config_err("space.dim must be at least 1")),
            SpaceConfig::Finite { size } if *size == 0 => return Err(config_err("space.size must be at least 1")),
            _ => {}
        }
        self.function.validate()?;
        match (&self.space, self.function.finite_size(), self.function.dim()) {
            (SpaceConfig::Finite { size }, Some(n), _) if n == *size => {}
            (SpaceConfig::Real { dim }, _, Some(d)) if d == *dim => {}
            _ => {
                return Err(config_err(format!(
                    "function `{}` does not act on {:?}",
                    self.function.name(),
                    self.space
                )))
            }
        }
        let map = self.function.build()?;
        let start = self.point(&self.start)?;
        let (structure, distance) = structure_for(&self.structure, &map, base_dir)?;
        let limit = match &self.limit {
            Some(LimitConfig::PartialLimits { anchors }) => LimOperator::MetricPartialLimits {
                anchors: anchors.iter().map(|a| self.point(a)).collect::<Result<_>>()?,
            },
            Some(LimitConfig::Discrete {}) => LimOperator::discrete(),
            Some(LimitConfig::CLim { pool }) => LimOperator::c_lim(
                structure.clone(),
                pool.iter().map(|a| self.point(a)).collect::<Result<_>>()?,
            ),
            None => match self.space {
                SpaceConfig::Finite { .. } => LimOperator::discrete(),
                SpaceConfig::Real { .. } => LimOperator::partial_limits(),
            },
        };
        let mut tolerances = self.tolerances.clone();
        if let Ok(v) = std::env::var(MAX_PREFIX_ENV) {
            tolerances.max_prefix = v
                .trim()
                .parse()
                .map_err(|_| config_err(format!("{MAX_PREFIX_ENV} must be a positive integer, got `{v}`")))?;
        }
        let d = SolveConfig::default();
        let o = &self.solver;
        let solve = SolveConfig {
            max_iter: o.max_iter.unwrap_or(d.max_iter),
            tolerances,
            residual_bound: o.residual_bound.unwrap_or(d.residual_bound),
            uniqueness_probe: self
                .uniqueness_probe
                .iter()
                .map(|(a, b)| Ok((self.point(a)?, self.point(b)?)))
                .collect::<Result<_>>()?,
            mode: self.mode,
            point_eq: o.point_eq.unwrap_or(d.point_eq),
            cycle_eq: o.cycle_eq.unwrap_or(d.cycle_eq),
            sandwich_levels: o.sandwich_levels.unwrap_or(d.sandwich_levels),
            lambda_iters: o.lambda_iters.unwrap_or(d.lambda_iters),
        };
        solve.validate().map_err(|e| config_err(e.to_string()))?;
        self.check_mode(&structure)?;
        Ok(Problem {
            config: self,
            map,
            start,
            structure,
            limit,
            solve,
            distance,
            base_dir: base_dir.to_path_buf(),
        })
    }

    fn check_mode(&self, c: &CauchyStructure) -> Result<()> {
        let k = &self.contraction;
        match self.mode {
            Mode::General => Ok(()),
            Mode::CiricDistance => match (c, &k.lambda) {
                (CauchyStructure::DistanceInduced { .. }, Some(_)) => Ok(()),
                _ => Err(config_err("ciric_distance mode needs a `distance` structure and contraction.lambda")),
            },
            Mode::Caristi => match (&self.structure, k.potential) {
                (StructureConfig::Psi { rule: PointPsiKind::StepSum, .. }, Some(_)) => Ok(()),
                _ => Err(config_err(
                    "caristi mode needs a `psi` structure with rule step_sum and contraction.potential",
                )),
            },
            Mode::CiricPsiD => match (c, &k.lambda, &k.alpha) {
                (CauchyStructure::PsiDistanceInduced { .. }, Some(_), Some(_)) => Ok(()),
                _ => Err(config_err("ciric_psi_d mode needs a `psi_d` structure, contraction.lambda and contraction.alpha")),
            },
        }
    }
}

pub fn build_distance(d: &DistanceConfig, base_dir: &Path) -> Result<DistanceSpec> {
    Ok(match d {
        DistanceConfig::Euclidean {} => DistanceSpec::Euclidean,
        DistanceConfig::Sup {} => DistanceSpec::Sup,
        DistanceConfig::PartialMetricMax {} => DistanceSpec::PartialMetricMax,
        DistanceConfig::DislocatedSum {} => DistanceSpec::DislocatedSum,
        DistanceConfig::Cone { dim } => DistanceSpec::ConeComponentwise(*dim),
        DistanceConfig::Table { path, points, values } => {
            let table = match (path, points, values) {
                (Some(p), None, None) => DistanceTable::load(&base_dir.join(p))?,
                (None, Some(p), Some(v)) => {
                    let text = serde_json::json!({ "points": p, "values": v }).to_string();
                    DistanceTable::from_json(&text)?
                }
                _ => return Err(config_err("table distance needs either `path` or inline `points` and `values`")),
            };
            DistanceSpec::Table(Arc::new(table))
        }
    })
}

fn build_structure(s: &StructureConfig, base_dir: &Path) -> Result<(CauchyStructure, Option<DistanceSpec>)> {
    Ok(match s {
        StructureConfig::Uniform { radii, diagonal } => {
            let mut es: Vec<Entourage> = radii.iter().map(|&r| Entourage::SupBall(r)).collect();
            if *diagonal {
                es.push(Entourage::Diagonal(EqRule::Exact));
            }
            (CauchyStructure::UniformBase(EntourageBase::new(es)?), None)
        }
        StructureConfig::Distance { distance } => {
            let d = build_distance(distance, base_dir)?;
            (CauchyStructure::distance(d.clone()), Some(d))
        }
        StructureConfig::Psi { rule, distance, cap } => {
            let d = distance.as_ref().map(|d| build_distance(d, base_dir)).transpose()?;
            let psi = match (rule, &d) {
                (PointPsiKind::StepSum, Some(d)) => PointPsi::StepSum(d.clone()),
                (PointPsiKind::StepSum, None) => return Err(config_err("step_sum needs a distance")),
                (PointPsiKind::NormSum, _) => PointPsi::NormSum,
            };
            (CauchyStructure::psi(psi, cap.map(Value::Scalar)), d)
        }
        StructureConfig::PsiD { psi, distance, cap } => {
            let d = build_distance(distance, base_dir)?;
            let rule = match psi {
                PsiKind::Sum => PsiRule::Sum,
                PsiKind::Max => PsiRule::Max,
            };
            (CauchyStructure::psi_d(rule, d.clone(), cap.clone()), Some(d))
        }
        StructureConfig::Orbit {} => unreachable!("orbit structures are built with their map"),
    })
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem> {
        let text = std::fs::read_to_string(path)?;
        let cfg = ProblemConfig::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.build(&base)
    }
}

/// Orbit structures need the map, which is only known after parsing.
pub(crate) fn structure_for(cfg: &StructureConfig, map: &MapRef, base_dir: &Path) -> Result<(CauchyStructure, Option<DistanceSpec>)> {
    match cfg {
        StructureConfig::Orbit {} => Ok((CauchyStructure::orbit(map.clone(), EqRule::Exact), None)),
        other => build_structure(other, base_dir),
    }
}
