//! The TOML run configuration and the instance it describes.

use std::path::Path;
use std::sync::Arc;

use nonlocal_obstacle::geometry::{Domain, Grid};
use nonlocal_obstacle::kernel::{frac_kernel, EllipticityParams};
use nonlocal_obstacle::nonlocal_op::{DiscreteOperator, OperatorSpec};
use nonlocal_obstacle::obstacles::{
    blend, preset_constant_obstacles, preset_distance_obstacles, preset_smoothed_distance_obstacles, BlendedObstacles, Collars,
    MollifiedObstacles, ObstacleSet,
};
use nonlocal_obstacle::presets::{bracketing_params, infsup_families};
use nonlocal_obstacle::solver::{Problem, SolveConfig};
use nonlocal_obstacle::ScalarFn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Complementarity solve on the raw (or mollified/blended) obstacles.
    #[default]
    Direct,
    /// One penalized solve at `delta`.
    Penalized,
    /// δ-continuation on the configured obstacles.
    ContinuationDelta,
    /// ε- and δ-continuation from the raw obstacles.
    ContinuationEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    Linear,
    PucciPlus,
    PucciMinus,
    PucciStarPlus,
    PucciStarMinus,
    InfSup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default)]
    pub kind: OperatorKind,
    /// Ellipticity bounds; both default to the bracket around the fractional Laplacian.
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub big_lambda: Option<f64>,
    #[serde(default = "default_sectors")]
    pub sectors: usize,
}

fn default_sectors() -> usize {
    16
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig { kind: OperatorKind::Linear, lambda: None, big_lambda: None, sectors: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    #[default]
    Distance,
    SmoothedDistance,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleConfig {
    pub kind: ObstacleKind,
    /// Collar width of the smoothed distance.
    pub width: f64,
    /// Level of the constant obstacles ±value.
    pub value: f64,
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        ObstacleConfig { kind: ObstacleKind::Distance, width: 0.1, value: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub complementarity_tol: f64,
    /// Run a δ-continuation and check overshoot ≤ δ(C̃₀+1).
    pub decay: bool,
    pub regularity: bool,
    pub regularity_margin: f64,
    pub alphas: Vec<f64>,
    pub boundary: bool,
    pub boundary_r: f64,
    pub boundary_x0: Option<[f64; 2]>,
    /// Sup-error bound against the closed-form profile (constant f, inactive obstacles).
    pub getoor_bound: Option<f64>,
    /// Sup-error bound against the classical s → 1 limit (1D only).
    pub limit_bound: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            complementarity_tol: 1e-7,
            decay: false,
            regularity: true,
            regularity_margin: 0.3,
            alphas: vec![0.25, 0.5, 0.75],
            boundary: false,
            boundary_r: 0.05,
            boundary_x0: None,
            getoor_bound: None,
            limit_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub s: Vec<f64>,
    pub delta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Order of the operator, in (0, 1).
    pub s: f64,
    pub domain: DomainKind,
    #[serde(default = "default_bounds")]
    pub bounds: [f64; 2],
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub radius: f64,
    pub h: f64,
    /// Truncation radius; defaults to the domain diameter.
    pub r_cut: Option<f64>,
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default)]
    pub mode: Mode,
    /// Penalty parameter for `mode = "penalized"`.
    pub delta: Option<f64>,
    /// Solve on mollified obstacles of this radius.
    pub mollify_eps: Option<f64>,
    /// Collars (w, w1, w2) blending raw and mollified obstacles; needs `mollify_eps`.
    pub blend: Option<[f64; 3]>,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub obstacles: ObstacleConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_bounds() -> [f64; 2] {
    [-1.0, 1.0]
}
fn one() -> f64 {
    1.0
}
fn default_f() -> String {
    "0".into()
}

/// A fully built instance.
pub struct Instance {
    pub grid: Arc<Grid>,
    pub obstacles: ObstacleSet,
    pub mollified: Option<MollifiedObstacles>,
    pub blended: Option<BlendedObstacles>,
    pub rhs: ScalarFn,
    pub operator: Arc<DiscreteOperator>,
    pub problem: Problem,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s must lie in (0, 1), got {}", self.s));
        }
        if !(self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if self.mode == Mode::Penalized && self.delta.is_none() {
            return bad("mode = \"penalized\" needs `delta`".into());
        }
        if self.blend.is_some() && self.mollify_eps.is_none() {
            return bad("`blend` needs `mollify_eps`".into());
        }
        self.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))
    }

    pub fn dim(&self) -> usize {
        match self.domain {
            DomainKind::Interval => 1,
            DomainKind::Disk => 2,
        }
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Ok(match self.domain {
            DomainKind::Interval => Domain::interval(self.bounds[0], self.bounds[1])?,
            DomainKind::Disk => Domain::disk(self.center, self.radius)?,
        })
    }

    /// SHA-256 of the resolved configuration in canonical JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn params(&self) -> Result<EllipticityParams, CliError> {
        let base = bracketing_params(self.dim(), self.s)?;
        let lambda = self.operator.lambda.unwrap_or(base.lambda);
        let big = self.operator.big_lambda.unwrap_or(base.big_lambda);
        Ok(EllipticityParams::new(lambda, big, self.s, base.s0)?)
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec, CliError> {
        let n = self.dim();
        let p = self.params()?;
        let sectors = self.operator.sectors;
        Ok(match self.operator.kind {
            OperatorKind::Linear => OperatorSpec::Linear { kernel: frac_kernel(n, self.s)? },
            OperatorKind::PucciPlus => OperatorSpec::PucciPlus { p },
            OperatorKind::PucciMinus => OperatorSpec::PucciMinus { p },
            OperatorKind::PucciStarPlus => OperatorSpec::PucciStarPlus { p, sectors },
            OperatorKind::PucciStarMinus => OperatorSpec::PucciStarMinus { p, sectors },
            OperatorKind::InfSup => OperatorSpec::InfSup { p, families: infsup_families(n, self.s)? },
        })
    }

    pub fn obstacle_set(&self) -> Result<ObstacleSet, CliError> {
        let d = self.domain()?;
        Ok(match self.obstacles.kind {
            ObstacleKind::Distance => preset_distance_obstacles(d),
            ObstacleKind::SmoothedDistance => preset_smoothed_distance_obstacles(d, self.obstacles.width)?,
            ObstacleKind::Constant => preset_constant_obstacles(d, self.obstacles.value),
        })
    }

    pub fn build(&self) -> Result<Instance, CliError> {
        let domain = self.domain()?;
        let grid = Arc::new(Grid::new(domain, self.h, self.r_cut.unwrap_or(domain.diameter()))?);
        let operator = Arc::new(DiscreteOperator::new(&self.operator_spec()?, grid.clone())?);
        let obstacles = self.obstacle_set()?;
        let rhs = expr::parse(&self.f, self.dim())?;
        let mollified = self.mollify_eps.map(|e| MollifiedObstacles::new(&obstacles, e, &grid)).transpose()?;
        let blended = match (self.blend, &mollified) {
            (Some([w, w1, w2]), Some(m)) => Some(blend(&obstacles, m, Collars::new(w, w1, w2)?, &grid)?),
            _ => None,
        };
        let problem = match (&blended, &mollified) {
            (Some(b), _) => Problem::from_blended(operator.clone(), &rhs, b)?,
            (None, Some(m)) => Problem::from_mollified(operator.clone(), &rhs, m)?,
            _ => Problem::from_obstacles(operator.clone(), &rhs, &obstacles)?,
        };
        Ok(Instance { grid, obstacles, mollified, blended, rhs, operator, problem })
    }
}

impl Instance {
    /// Exterior data of the problem actually solved.
    pub fn phi(&self) -> ScalarFn {
        match (&self.blended, &self.mollified) {
            (Some(b), _) => b.phi.clone(),
            (None, Some(m)) => m.phi.clone(),
            _ => self.obstacles.phi.clone(),
        }
    }

    /// Whether the right-hand side is constant on the active set.
    pub fn constant_rhs(&self) -> Option<f64> {
        let f = self.problem.rhs();
        let c = *f.first()?;
        f.iter().all(|&v| v == c).then_some(c)
    }
}
