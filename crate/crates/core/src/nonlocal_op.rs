//! Discrete nonlocal operators on the lattice.
//!
//! Every operator is written as Σ_y w_y g(δu(x,y)) over half-space lattice offsets
//! |y| ≤ R plus a far-field term. The pair weight of offset y is the product rule
//!
//! ```text
//! W_y = 2 ∫_{cell(y)} |z|^{2−n−2s} dz / |y|²,
//! ```
//!
//! i.e. δu is taken to scale like |z|² across the cell of y. The cell of the
//! origin is handled through the discrete Laplacian on the axis neighbours.
//! Beyond the truncation radius the exterior data is replaced by its mean on
//! the truncation sphere, which is exact for constant far fields.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::field::Field;
use crate::geometry::{Grid, Point};
use crate::kernel::{l0_check, sector_of, sphere_area, EllipticityParams, KernelSpec};
use crate::quadrature::{gauss_legendre, integrate};

/// A nonlocal operator family member.
#[derive(Debug, Clone)]
pub enum OperatorSpec {
    Linear { kernel: KernelSpec },
    PucciPlus { p: EllipticityParams },
    PucciMinus { p: EllipticityParams },
    PucciStarPlus { p: EllipticityParams, sectors: usize },
    PucciStarMinus { p: EllipticityParams, sectors: usize },
    /// inf over families of sup over the kernels in each family.
    InfSup { p: EllipticityParams, families: Vec<Vec<KernelSpec>> },
}

impl OperatorSpec {
    pub fn order(&self) -> f64 {
        match self {
            OperatorSpec::Linear { kernel } => kernel.order(),
            OperatorSpec::PucciPlus { p }
            | OperatorSpec::PucciMinus { p }
            | OperatorSpec::PucciStarPlus { p, .. }
            | OperatorSpec::PucciStarMinus { p, .. }
            | OperatorSpec::InfSup { p, .. } => p.s,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::Linear { .. } => "linear",
            OperatorSpec::PucciPlus { .. } => "pucci_plus",
            OperatorSpec::PucciMinus { .. } => "pucci_minus",
            OperatorSpec::PucciStarPlus { .. } => "pucci_star_plus",
            OperatorSpec::PucciStarMinus { .. } => "pucci_star_minus",
            OperatorSpec::InfSup { .. } => "infsup",
        }
    }

    pub fn params(&self) -> Option<EllipticityParams> {
        match self {
            OperatorSpec::Linear { .. } => None,
            OperatorSpec::PucciPlus { p }
            | OperatorSpec::PucciMinus { p }
            | OperatorSpec::PucciStarPlus { p, .. }
            | OperatorSpec::PucciStarMinus { p, .. }
            | OperatorSpec::InfSup { p, .. } => Some(*p),
        }
    }
}

/// Half-space lattice offsets with their pair weights for the pure power kernel.
#[derive(Debug, Clone)]
pub struct Stencil {
    dim: usize,
    h: f64,
    s: f64,
    offsets: Vec<[i64; 2]>,
    weights: Vec<f64>,
    tail: f64,
    r_eff: f64,
    tail_dirs: Vec<Point>,
}

/// ∫ over the square [c−h/2, c+h/2]² of |z|^{−2s}.
fn cell_integral_2d(c: Point, h: f64, s: f64, q: usize) -> f64 {
    let (x, w) = gauss_legendre(q);
    let mut sum = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (xj, wj) in x.iter().zip(&w) {
            let z = [c[0] + 0.5 * h * xi, c[1] + 0.5 * h * xj];
            sum += wi * wj * (z[0] * z[0] + z[1] * z[1]).powf(-s);
        }
    }
    sum * 0.25 * h * h
}

impl Stencil {
    /// Builds offsets 0 < |y| ≤ `radius` on the lattice hZ^n.
    pub fn new(dim: usize, h: f64, s: f64, radius: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return invalid(format!("order s must lie in (0, 1), got {s}"));
        }
        let m = (radius / h + 1e-9).floor() as i64;
        if m < 1 {
            return invalid("stencil radius smaller than the grid spacing");
        }
        let p = 2.0 - 2.0 * s;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let tail;
        let r_eff;
        let tail_dirs;
        if dim == 1 {
            for k in 1..=m {
                let (a, b) = ((k as f64 - 0.5) * h, (k as f64 + 0.5) * h);
                let yk = k as f64 * h;
                offsets.push([k, 0]);
                weights.push(2.0 * (b.powf(p) - a.powf(p)) / (p * yk * yk));
            }
            let central = 2.0 * (0.5 * h).powf(p) / p;
            weights[0] += central / (h * h);
            r_eff = (m as f64 + 0.5) * h;
            tail = sphere_area(1) * r_eff.powf(-2.0 * s) / (2.0 * s);
            tail_dirs = vec![[1.0, 0.0], [-1.0, 0.0]];
        } else {
            let m2 = m * m;
            for j in 0..=m {
                for i in -m..=m {
                    if (j == 0 && i <= 0) || i * i + j * j > m2 {
                        continue;
                    }
                    let c = [i as f64 * h, j as f64 * h];
                    let q = if i.abs().max(j) <= 4 { 10 } else { 4 };
                    let r2 = c[0] * c[0] + c[1] * c[1];
                    offsets.push([i, j]);
                    weights.push(2.0 * cell_integral_2d(c, h, s, q) / r2);
                }
            }
            // ∫ over the origin cell of |z|^{−2s}, by symmetry 8 triangles in polar form.
            let central = 8.0
                * integrate(|t| (0.5 * h / t.cos()).powf(p) / p, 0.0, PI / 4.0, 24);
            // δu ≈ (zᵀD²u z) on the cell; its integral is Δu/2 · central.
            for (k, o) in offsets.iter().enumerate() {
                if *o == [1, 0] || *o == [0, 1] {
                    weights[k] += central / (2.0 * h * h);
                }
            }
            let cells = 2 * offsets.len() + 1;
            r_eff = h * (cells as f64 / PI).sqrt();
            tail = sphere_area(2) * r_eff.powf(-2.0 * s) / (2.0 * s);
            tail_dirs = (0..16)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 16.0;
                    [t.cos(), t.sin()]
                })
                .collect();
        }
        Ok(Stencil { dim, h, s, offsets, weights, tail, r_eff, tail_dirs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn order(&self) -> f64 {
        self.s
    }
    pub fn offsets(&self) -> &[[i64; 2]] {
        &self.offsets
    }
    /// Pair weights for the kernel |y|^{−n−2s}; all strictly positive.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// ∫_{|y|>r_eff} |y|^{−n−2s} dy.
    pub fn tail(&self) -> f64 {
        self.tail
    }
    /// Radius of the ball whose volume equals the cells covered by the stencil.
    pub fn r_eff(&self) -> f64 {
        self.r_eff
    }
    pub fn len(&self) -> usize {
        self.offsets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
    pub fn offset_point(&self, k: usize) -> Point {
        let o = self.offsets[k];
        [o[0] as f64 * self.h, o[1] as f64 * self.h]
    }
    /// Total pair weight plus tail: the diagonal of −L₀ divided by 2.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.tail
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Linear,
    InfSup { families: Vec<Vec<usize>> },
    Pucci { plus: bool },
    PucciStar { plus: bool, m: usize },
}

/// An operator specialised to a grid: stencil, coefficient tables and neighbour offsets.
#[derive(Clone)]
pub struct DiscreteOperator {
    spec: OperatorSpec,
    grid: Arc<Grid>,
    stencil: Arc<Stencil>,
    kind: Kind,
    /// Per kernel: weight × multiplier per offset.
    coef: Vec<Vec<f64>>,
    /// Per kernel: tail mass × mean multiplier.
    tail_coef: Vec<f64>,
    sector: Vec<usize>,
    flat: Vec<usize>,
    safe: Vec<bool>,
    lo_mult: f64,
    hi_mult: f64,
    tol_tail: f64,
}

impl std::fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("spec", &self.spec)
            .field("offsets", &self.stencil.len())
            .finish()
    }
}

/// Per-node buffers reused across evaluations.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    pub(crate) pairs: Vec<f64>,
    pub(crate) eff: Vec<f64>,
    pub(crate) sec: Vec<f64>,
}

fn kernel_tables(k: &KernelSpec, st: &Stencil) -> (Vec<f64>, f64) {
    let coef = (0..st.len()).map(|i| st.weights[i] * k.multiplier(st.offset_point(i))).collect();
    let tail_mult = match k.angular_mass() {
        Ok(a) => a / sphere_area(st.dim),
        Err(_) => {
            let d = &st.tail_dirs;
            d.iter().map(|t| k.multiplier([t[0] * st.r_eff, t[1] * st.r_eff])).sum::<f64>()
                / d.len() as f64
        }
    };
    (coef, st.tail * tail_mult)
}

impl DiscreteOperator {
    /// Specialises `spec` to `grid` with truncation radius R_cut.
    pub fn new(spec: &OperatorSpec, grid: Arc<Grid>) -> Result<Self> {
        Self::with_tolerance(spec, grid, 1e-6)
    }

    pub fn with_tolerance(spec: &OperatorSpec, grid: Arc<Grid>, tol_tail: f64) -> Result<Self> {
        let dim = grid.dim();
        let s = spec.order();
        let stencil = Arc::new(Stencil::new(dim, grid.h(), s, grid.r_cut())?);
        let mut coef = Vec::new();
        let mut tail_coef = Vec::new();
        let mut sector = Vec::new();
        let (mut lo_mult, mut hi_mult) = (f64::INFINITY, 0.0f64);
        let kind = match spec {
            OperatorSpec::Linear { kernel } => {
                if kernel.dim() != dim {
                    return invalid("kernel dimension differs from grid dimension");
                }
                let (c, t) = kernel_tables(kernel, &stencil);
                for (i, ci) in c.iter().enumerate() {
                    let m = ci / stencil.weights[i];
                    lo_mult = lo_mult.min(m);
                    hi_mult = hi_mult.max(m);
                }
                coef.push(c);
                tail_coef.push(t);
                Kind::Linear
            }
            OperatorSpec::PucciPlus { p } | OperatorSpec::PucciMinus { p } => {
                lo_mult = p.lower();
                hi_mult = p.upper();
                Kind::Pucci { plus: matches!(spec, OperatorSpec::PucciPlus { .. }) }
            }
            OperatorSpec::PucciStarPlus { p, sectors } | OperatorSpec::PucciStarMinus { p, sectors } => {
                if *sectors == 0 {
                    return invalid("sector count must be at least 1");
                }
                let m = if dim == 1 { 1 } else { *sectors };
                sector = (0..stencil.len()).map(|k| sector_of(stencil.offset_point(k), m)).collect();
                lo_mult = p.lower();
                hi_mult = p.upper();
                Kind::PucciStar { plus: matches!(spec, OperatorSpec::PucciStarPlus { .. }), m }
            }
            OperatorSpec::InfSup { p, families } => {
                if families.is_empty() || families.iter().any(|f| f.is_empty()) {
                    return invalid("inf-sup families must be nonempty");
                }
                let samples: Vec<Point> = (0..stencil.len()).map(|k| stencil.offset_point(k)).collect();
                let mut idx = Vec::new();
                for fam in families {
                    let mut ids = Vec::new();
                    for k in fam {
                        if k.dim() != dim || (k.order() - p.s).abs() > 1e-14 {
                            return invalid("inf-sup kernel order or dimension mismatch");
                        }
                        let rep = l0_check(k, p, &samples);
                        if !rep.pass {
                            return invalid(format!(
                                "inf-sup kernel violates the ellipticity bounds at {} samples",
                                rep.violations.len()
                            ));
                        }
                        let (c, t) = kernel_tables(k, &stencil);
                        ids.push(coef.len());
                        coef.push(c);
                        tail_coef.push(t);
                    }
                    idx.push(ids);
                }
                lo_mult = p.lower();
                hi_mult = p.upper();
                Kind::InfSup { families: idx }
            }
        };
        let nx = grid.shape()[0];
        let flat = stencil.offsets.iter().map(|o| (o[0] + o[1] * nx as i64) as usize).collect();
        let reach = stencil.offsets.iter().fold([0i64; 2], |r, o| [r[0].max(o[0].abs()), r[1].max(o[1].abs())]);
        let safe = (0..grid.len())
            .map(|i| {
                let l = grid.lattice(i);
                grid.index_of([l[0] - reach[0], l[1] - reach[1]]).is_some()
                    && grid.index_of([l[0] + reach[0], l[1] + reach[1]]).is_some()
            })
            .collect();
        Ok(DiscreteOperator {
            spec: spec.clone(),
            grid,
            stencil,
            kind,
            coef,
            tail_coef,
            sector,
            flat,
            safe,
            lo_mult,
            hi_mult,
            tol_tail,
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Linear)
    }

    /// Bounds on the diagonal coefficient of −I at any node.
    pub fn diag_bounds(&self) -> (f64, f64) {
        let full = 2.0 * self.stencil.total_weight();
        match &self.kind {
            Kind::Linear | Kind::InfSup { .. } => {
                let d: Vec<f64> = self
                    .coef
                    .iter()
                    .zip(&self.tail_coef)
                    .map(|(c, t)| 2.0 * (c.iter().sum::<f64>() + t))
                    .collect();
                (d.iter().cloned().fold(f64::INFINITY, f64::min), d.iter().cloned().fold(0.0, f64::max))
            }
            _ => (self.lo_mult * full, self.hi_mult * full),
        }
    }

    /// Stored index of x_node ± y_k, if inside the box.
    #[inline]
    pub fn neighbor(&self, node: usize, k: usize, plus: bool) -> Option<usize> {
        if self.safe[node] {
            return Some(if plus { node + self.flat[k] } else { node - self.flat[k] });
        }
        let l = self.grid.lattice(node);
        let o = self.stencil.offsets[k];
        let t = if plus { [l[0] + o[0], l[1] + o[1]] } else { [l[0] - o[0], l[1] - o[1]] };
        self.grid.index_of(t)
    }

    /// Fills `pairs[k] = u(x+y_k) + u(x−y_k)` and returns the far-field pair sum 2φ̄.
    pub(crate) fn pair_sums(&self, u: &Field, node: usize, pairs: &mut Vec<f64>) -> Result<f64> {
        let m = self.stencil.len();
        pairs.resize(m, 0.0);
        let v = u.values();
        if self.safe[node] {
            for k in 0..m {
                let f = self.flat[k];
                pairs[k] = v[node + f] + v[node - f];
            }
        } else {
            let l = self.grid.lattice(node);
            for (k, o) in self.stencil.offsets.iter().enumerate() {
                let a = u.at_lattice([l[0] + o[0], l[1] + o[1]]);
                let b = u.at_lattice([l[0] - o[0], l[1] - o[1]]);
                match (a, b) {
                    (Some(a), Some(b)) => pairs[k] = a + b,
                    _ => {
                        return Err(Error::TailUnachievable { tol: self.tol_tail, bound: f64::INFINITY })
                    }
                }
            }
        }
        Ok(match u.exterior() {
            Some(f) => {
                let x = self.grid.point(node);
                let r = self.stencil.r_eff;
                let d = &self.stencil.tail_dirs;
                2.0 * d.iter().map(|t| f([x[0] + r * t[0], x[1] + r * t[1]])).sum::<f64>() / d.len() as f64
            }
            None => 0.0,
        })
    }

    /// Evaluates the operator from pair sums with centre value `t`.
    pub(crate) fn reduce(&self, pairs: &[f64], tail_pair: f64, t: f64, sec: &mut Vec<f64>) -> f64 {
        let w = &self.stencil.weights;
        let dt = tail_pair - 2.0 * t;
        let lin = |c: &[f64], tc: f64| -> f64 {
            let mut acc = 0.0;
            for k in 0..c.len() {
                acc += c[k] * (pairs[k] - 2.0 * t);
            }
            acc + tc * dt
        };
        match &self.kind {
            Kind::Linear => lin(&self.coef[0], self.tail_coef[0]),
            Kind::InfSup { families } => families
                .iter()
                .map(|f| f.iter().map(|&k| lin(&self.coef[k], self.tail_coef[k])).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min),
            Kind::Pucci { plus } => {
                let (up, down) = if *plus { (self.hi_mult, self.lo_mult) } else { (self.lo_mult, self.hi_mult) };
                let (mut pos, mut neg) = (0.0, 0.0);
                for k in 0..w.len() {
                    let d = w[k] * (pairs[k] - 2.0 * t);
                    if d > 0.0 {
                        pos += d;
                    } else {
                        neg += d;
                    }
                }
                let d = self.stencil.tail * dt;
                if d > 0.0 {
                    pos += d;
                } else {
                    neg += d;
                }
                up * pos + down * neg
            }
            Kind::PucciStar { plus, m } => {
                let (up, down) = if *plus { (self.hi_mult, self.lo_mult) } else { (self.lo_mult, self.hi_mult) };
                sec.clear();
                sec.resize(*m, self.stencil.tail * dt / *m as f64);
                for k in 0..w.len() {
                    sec[self.sector[k]] += w[k] * (pairs[k] - 2.0 * t);
                }
                sec.iter().map(|&i| if i > 0.0 { up * i } else { down * i }).sum()
            }
        }
    }

    /// Coefficients of the active linear operator at centre value `t`: fills `eff`
    /// (per offset) and returns the tail coefficient.
    pub(crate) fn linearize(&self, pairs: &[f64], tail_pair: f64, t: f64, eff: &mut Vec<f64>, sec: &mut Vec<f64>) -> f64 {
        let w = &self.stencil.weights;
        let n = w.len();
        eff.resize(n, 0.0);
        let dt = tail_pair - 2.0 * t;
        match &self.kind {
            Kind::Linear => {
                eff.copy_from_slice(&self.coef[0]);
                self.tail_coef[0]
            }
            Kind::InfSup { families } => {
                let lin = |k: usize| -> f64 {
                    let c = &self.coef[k];
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += c[i] * (pairs[i] - 2.0 * t);
                    }
                    acc + self.tail_coef[k] * dt
                };
                let mut best = (f64::INFINITY, 0usize);
                for f in families {
                    let mut inner = (f64::NEG_INFINITY, 0usize);
                    for &k in f {
                        let v = lin(k);
                        if v > inner.0 {
                            inner = (v, k);
                        }
                    }
                    if inner.0 < best.0 {
                        best = inner;
                    }
                }
                eff.copy_from_slice(&self.coef[best.1]);
                self.tail_coef[best.1]
            }
            Kind::Pucci { plus } => {
                let (up, down) = if *plus { (self.hi_mult, self.lo_mult) } else { (self.lo_mult, self.hi_mult) };
                for k in 0..n {
                    eff[k] = w[k] * if pairs[k] - 2.0 * t > 0.0 { up } else { down };
                }
                self.stencil.tail * if dt > 0.0 { up } else { down }
            }
            Kind::PucciStar { plus, m } => {
                let (up, down) = if *plus { (self.hi_mult, self.lo_mult) } else { (self.lo_mult, self.hi_mult) };
                let tm = self.stencil.tail / *m as f64;
                sec.clear();
                sec.resize(*m, tm * dt);
                for k in 0..n {
                    sec[self.sector[k]] += w[k] * (pairs[k] - 2.0 * t);
                }
                for k in 0..n {
                    eff[k] = w[k] * if sec[self.sector[k]] > 0.0 { up } else { down };
                }
                sec.iter().map(|&i| tm * if i > 0.0 { up } else { down }).sum()
            }
        }
    }

    /// I u at one stored node.
    pub fn eval_node(&self, u: &Field, node: usize, scratch: &mut Scratch) -> Result<f64> {
        let tp = self.pair_sums(u, node, &mut scratch.pairs)?;
        Ok(self.reduce(&scratch.pairs, tp, u.get(node), &mut scratch.sec))
    }

    /// I u at the listed nodes.
    pub fn apply(&self, u: &Field, nodes: &[usize], exec: Execution) -> Result<Vec<f64>> {
        self.check_tail(u)?;
        exec.map_with(nodes.len(), Scratch::default, |s, i| self.eval_node(u, nodes[i], s))
            .into_iter()
            .collect()
    }

    /// I u at every interior node of the grid, zero elsewhere.
    pub fn apply_interior(&self, u: &Field, exec: Execution) -> Result<Field> {
        let nodes = self.grid.interior();
        let vals = self.apply(u, nodes, exec)?;
        let mut out = vec![0.0; self.grid.len()];
        for (&i, v) in nodes.iter().zip(vals) {
            out[i] = v;
        }
        Ok(Field::from_values(self.grid.clone(), out, None))
    }

    /// Conservative far-field bound 4·sup|u|·(1−s)Λ-type tail mass.
    pub fn tail_bound(&self, u: &Field) -> f64 {
        4.0 * u.sup_norm() * self.hi_mult.max(1e-300) * self.stencil.tail
    }

    fn check_tail(&self, u: &Field) -> Result<()> {
        if u.exterior().is_none() {
            let bound = self.tail_bound(u);
            if bound > self.tol_tail {
                return Err(Error::TailUnachievable { tol: self.tol_tail, bound });
            }
        }
        Ok(())
    }

    /// Solves −I u(x) = f at `node` for the centre value, other values frozen.
    ///
    /// `t0` seeds a safeguarded Newton iteration on the monotone scalar map.
    pub fn solve_node(&self, u: &Field, node: usize, f: f64, t0: f64, scratch: &mut Scratch) -> Result<f64> {
        let tp = self.pair_sums(u, node, &mut scratch.pairs)?;
        let pairs = std::mem::take(&mut scratch.pairs);
        let r = self.solve_scalar(&pairs, tp, f, t0, scratch);
        scratch.pairs = pairs;
        Ok(r)
    }

    fn solve_scalar(&self, pairs: &[f64], tp: f64, f: f64, t0: f64, s: &mut Scratch) -> f64 {
        let g = |t: f64, s: &mut Scratch| -self.reduce(pairs, tp, t, &mut s.sec) - f;
        if self.is_linear() {
            let c = &self.coef[0];
            let tc = self.tail_coef[0];
            let num: f64 = c.iter().zip(pairs).map(|(a, b)| a * b).sum::<f64>() + tc * tp + f;
            let den = 2.0 * (c.iter().sum::<f64>() + tc);
            return num / den;
        }
        let (dmin, dmax) = self.diag_bounds();
        let g0 = g(t0, s);
        if g0 == 0.0 {
            return t0;
        }
        let (mut lo, mut hi) = if g0 > 0.0 { (t0 - g0 / dmin, t0) } else { (t0, t0 - g0 / dmin) };
        let _ = dmax;
        let mut t = t0;
        let mut gt = g0;
        for _ in 0..200 {
            let et = self.linearize(pairs, tp, t, &mut s.eff, &mut s.sec);
            let slope = 2.0 * (s.eff.iter().sum::<f64>() + et);
            let mut next = t - gt / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let gn = g(next, s);
            if gn > 0.0 {
                hi = next;
            } else if gn < 0.0 {
                lo = next;
            } else {
                return next;
            }
            let done = (next - t).abs() <= 1e-13 * (1.0 + next.abs()) || hi - lo <= 1e-12 * (1.0 + next.abs());
            t = next;
            gt = gn;
            if done {
                break;
            }
        }
        t
    }
}

/// δu(x, y) = u(x+y) + u(x−y) − 2u(x) at a stored node and lattice offset.
pub fn second_diff(u: &Field, node: usize, offset: [i64; 2]) -> Option<f64> {
    let l = u.grid().lattice(node);
    let a = u.at_lattice([l[0] + offset[0], l[1] + offset[1]])?;
    let b = u.at_lattice([l[0] - offset[0], l[1] - offset[1]])?;
    Some(a + b - 2.0 * u.get(node))
}

fn apply_spec(u: &Field, spec: OperatorSpec, tol_tail: f64) -> Result<Field> {
    DiscreteOperator::with_tolerance(&spec, u.grid().clone(), tol_tail)?.apply_interior(u, Execution::default())
}

/// L u with kernel K at every interior node.
pub fn apply_linear(u: &Field, k: &KernelSpec, tol_tail: f64) -> Result<Field> {
    apply_spec(u, OperatorSpec::Linear { kernel: k.clone() }, tol_tail)
}

/// M⁺u (plus = true) or M⁻u at every interior node.
pub fn apply_pucci(u: &Field, p: &EllipticityParams, plus: bool, tol_tail: f64) -> Result<Field> {
    let spec = if plus { OperatorSpec::PucciPlus { p: *p } } else { OperatorSpec::PucciMinus { p: *p } };
    apply_spec(u, spec, tol_tail)
}

/// M∗⁺u (plus = true) or M∗⁻u at every interior node, with `sectors` angular bins.
pub fn apply_pucci_star(u: &Field, p: &EllipticityParams, plus: bool, sectors: usize, tol_tail: f64) -> Result<Field> {
    let spec = if plus {
        OperatorSpec::PucciStarPlus { p: *p, sectors }
    } else {
        OperatorSpec::PucciStarMinus { p: *p, sectors }
    };
    apply_spec(u, spec, tol_tail)
}

/// Outcome of the ellipticity sandwich M⁻(u−v) ≤ Iu − Iv ≤ M⁺(u−v).
#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub nodes: usize,
    /// (node, M⁻(u−v), Iu−Iv, M⁺(u−v)) at each violation.
    pub violations: Vec<(usize, f64, f64, f64)>,
    pub max_excess: f64,
    pub pass: bool,
}

/// Checks the ellipticity sandwich of `op` against the Pucci operators for `p`.
pub fn ellipticity_test(op: &DiscreteOperator, p: &EllipticityParams, u: &Field, v: &Field, tol: f64) -> Result<EllipticityReport> {
    let grid = op.grid().clone();
    let nodes = grid.interior();
    let exec = Execution::default();
    let w = u.sub(v);
    let iu = op.apply(u, nodes, exec)?;
    let iv = op.apply(v, nodes, exec)?;
    let mp = DiscreteOperator::new(&OperatorSpec::PucciPlus { p: *p }, grid.clone())?.apply(&w, nodes, exec)?;
    let mm = DiscreteOperator::new(&OperatorSpec::PucciMinus { p: *p }, grid.clone())?.apply(&w, nodes, exec)?;
    let mut violations = Vec::new();
    let mut max_excess = 0.0f64;
    for i in 0..nodes.len() {
        let d = iu[i] - iv[i];
        let excess = (mm[i] - d).max(d - mp[i]);
        max_excess = max_excess.max(excess);
        if excess > tol {
            violations.push((nodes[i], mm[i], d, mp[i]));
        }
    }
    Ok(EllipticityReport { nodes: nodes.len(), pass: violations.is_empty(), violations, max_excess })
}
