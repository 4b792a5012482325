//! Grid functions with an analytic extension to all of R^n.

use std::fmt;
use std::sync::Arc;

use crate::geometry::{Grid, Point};

/// A callable x ↦ value defined on all of R^n.
pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Wraps a closure as a [`ScalarFn`].
pub fn scalar_fn(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

/// The constant function.
pub fn constant_fn(c: f64) -> ScalarFn {
    Arc::new(move |_| c)
}

/// Values at every stored node plus optional exterior data used beyond the box.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    exterior: Option<ScalarFn>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("nodes", &self.values.len())
            .field("has_exterior", &self.exterior.is_some())
            .finish()
    }
}

impl Field {
    /// Samples `f` at every stored node and keeps it as exterior data.
    pub fn from_fn(grid: Arc<Grid>, f: ScalarFn) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field { grid, values, exterior: Some(f) }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        Field { grid, values, exterior: Some(constant_fn(0.0)) }
    }

    /// Wraps explicit node values. Panics if the length does not match the grid.
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>, exterior: Option<ScalarFn>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match grid");
        Field { grid, values, exterior }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn exterior(&self) -> Option<&ScalarFn> {
        self.exterior.as_ref()
    }
    pub fn set_exterior(&mut self, f: Option<ScalarFn>) {
        self.exterior = f;
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Value at a lattice site: stored if inside the box, else exterior data.
    pub fn at_lattice(&self, l: [i64; 2]) -> Option<f64> {
        match self.grid.index_of(l) {
            Some(i) => Some(self.values[i]),
            None => self.exterior.as_ref().map(|f| f(self.grid.lattice_point(l))),
        }
    }

    /// Value at an arbitrary point: exterior data if present, else nearest stored node.
    pub fn at_point(&self, x: Point) -> Option<f64> {
        match &self.exterior {
            Some(f) if self.grid.nearest(x).is_none() => Some(f(x)),
            _ => {
                let l = [(x[0] / self.grid.h()).round() as i64, (x[1] / self.grid.h()).round() as i64];
                let on_lattice = (l[0] as f64 * self.grid.h() - x[0]).abs() < 1e-12
                    && (l[1] as f64 * self.grid.h() - x[1]).abs() < 1e-12;
                if on_lattice {
                    self.at_lattice(l)
                } else {
                    self.exterior.as_ref().map(|f| f(x))
                }
            }
        }
    }

    /// sup |values| over stored nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// sup |values| over the listed nodes.
    pub fn sup_on(&self, nodes: &[usize]) -> f64 {
        nodes.iter().fold(0.0f64, |m, &i| m.max(self.values[i].abs()))
    }

    /// Nodewise difference self − other, with differenced exterior data.
    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let exterior = match (&self.exterior, &other.exterior) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(scalar_fn(move |x| f(x) - g(x)))
            }
            _ => None,
        };
        Field { grid: self.grid.clone(), values, exterior }
    }

    /// Nodewise sum self + other, with summed exterior data.
    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let exterior = match (&self.exterior, &other.exterior) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(scalar_fn(move |x| f(x) + g(x)))
            }
            _ => None,
        };
        Field { grid: self.grid.clone(), values, exterior }
    }
}
