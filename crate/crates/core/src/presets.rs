//! Shipped problem instances.

use std::sync::Arc;

use crate::error::Result;
use crate::field::{constant_fn, ScalarFn};
use crate::geometry::{Domain, Grid};
use crate::kernel::{frac_constant, frac_kernel, EllipticityParams, KernelSpec};
use crate::nonlocal_op::{DiscreteOperator, OperatorSpec};
use crate::obstacles::{preset_constant_obstacles, preset_distance_obstacles, preset_smoothed_distance_obstacles, ObstacleSet};
use crate::solver::Problem;

/// A named instance: domain, grid spacing, operator, obstacles and right-hand side.
#[derive(Clone)]
pub struct Preset {
    pub name: &'static str,
    pub domain: Domain,
    pub h: f64,
    pub r_cut: f64,
    pub operator: OperatorSpec,
    pub obstacles: ObstacleSet,
    pub rhs: ScalarFn,
}

impl std::fmt::Debug for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Preset").field("name", &self.name).field("h", &self.h).finish()
    }
}

impl Preset {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.domain, self.h, self.r_cut)?))
    }

    pub fn discrete_operator(&self) -> Result<Arc<DiscreteOperator>> {
        Ok(Arc::new(DiscreteOperator::new(&self.operator, self.grid()?)?))
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::from_obstacles(self.discrete_operator()?, &self.rhs, &self.obstacles)
    }
}

/// Ellipticity bounds bracketing the fractional Laplacian: λ, Λ = c_{n,s}/(1−s) · (1/2, 2).
pub fn bracketing_params(n: usize, s: f64) -> Result<EllipticityParams> {
    let m = frac_constant(n, s) / (1.0 - s);
    EllipticityParams::new(0.5 * m, 2.0 * m, s, s.min(0.1).min(s / 2.0))
}

/// Four constant-profile kernels in two families, all within the bracketing bounds.
pub fn infsup_families(n: usize, s: f64) -> Result<Vec<Vec<KernelSpec>>> {
    let c = frac_constant(n, s);
    let k = |f: f64| KernelSpec::homogeneous(n, s, vec![f * c]);
    Ok(vec![vec![k(0.6)?, k(1.8)?], vec![k(0.9)?, k(1.4)?]])
}

fn linear(n: usize, s: f64) -> Result<OperatorSpec> {
    Ok(OperatorSpec::Linear { kernel: frac_kernel(n, s)? })
}

/// Every shipped preset.
pub fn all() -> Result<Vec<Preset>> {
    let iv = Domain::interval(-1.0, 1.0)?;
    let disk = Domain::disk([0.0, 0.0], 1.0)?;
    let f8 = constant_fn(8.0);
    Ok(vec![
        Preset { name: "interval_trivial", domain: iv, h: 1.0 / 100.0, r_cut: 2.0, operator: linear(1, 0.5)?, obstacles: preset_distance_obstacles(iv), rhs: constant_fn(0.0) },
        Preset { name: "interval_distance_s05", domain: iv, h: 1.0 / 200.0, r_cut: 2.0, operator: linear(1, 0.5)?, obstacles: preset_distance_obstacles(iv), rhs: f8.clone() },
        Preset { name: "interval_distance_s09", domain: iv, h: 1.0 / 200.0, r_cut: 2.0, operator: linear(1, 0.9)?, obstacles: preset_distance_obstacles(iv), rhs: f8.clone() },
        Preset { name: "interval_smoothed_s05", domain: iv, h: 1.0 / 200.0, r_cut: 2.0, operator: linear(1, 0.5)?, obstacles: preset_smoothed_distance_obstacles(iv, 0.1)?, rhs: f8.clone() },
        Preset { name: "interval_getoor", domain: iv, h: 1.0 / 200.0, r_cut: 2.0, operator: linear(1, 0.5)?, obstacles: preset_constant_obstacles(iv, 10.0), rhs: constant_fn(1.0) },
        Preset { name: "interval_pucci_plus", domain: iv, h: 1.0 / 100.0, r_cut: 2.0, operator: OperatorSpec::PucciPlus { p: bracketing_params(1, 0.5)? }, obstacles: preset_distance_obstacles(iv), rhs: f8.clone() },
        Preset { name: "interval_pucci_minus", domain: iv, h: 1.0 / 100.0, r_cut: 2.0, operator: OperatorSpec::PucciMinus { p: bracketing_params(1, 0.5)? }, obstacles: preset_distance_obstacles(iv), rhs: f8.clone() },
        Preset { name: "interval_infsup", domain: iv, h: 1.0 / 100.0, r_cut: 2.0, operator: OperatorSpec::InfSup { p: bracketing_params(1, 0.5)?, families: infsup_families(1, 0.5)? }, obstacles: preset_distance_obstacles(iv), rhs: f8.clone() },
        Preset { name: "disk_distance_s05", domain: disk, h: 1.0 / 16.0, r_cut: 2.0, operator: linear(2, 0.5)?, obstacles: preset_distance_obstacles(disk), rhs: f8.clone() },
        Preset { name: "disk_pucci_star_plus", domain: disk, h: 1.0 / 12.0, r_cut: 2.0, operator: OperatorSpec::PucciStarPlus { p: bracketing_params(2, 0.5)?, sectors: 16 }, obstacles: preset_distance_obstacles(disk), rhs: f8 },
    ])
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Result<Preset> {
    all()?.into_iter().find(|p| p.name == name).ok_or_else(|| crate::error::Error::InvalidParameter(format!("unknown preset {name}")))
}
