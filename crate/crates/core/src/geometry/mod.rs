//! Closed convex bodies: membership, nearest-point projection, distance and
//! bounds, plus sampling-based hypothesis checkers.

mod checks;
pub mod ellipsoid;
pub mod polytope;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub(crate) use checks::uniform_in_ball;
pub use checks::{is_projection_closed, is_symmetric, sample_uniform_in_body, ACCEPTANCE_FLOOR};
pub use polytope::Halfspace;

use crate::error::{Error, Result};
use crate::interp::Pchip;

/// Convergence tolerance of iterative projections (iterate-change norm).
pub const PROJ_TOL: f64 = 1e-9;

pub type Point = Vec<f64>;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Strictly increasing `f : R+ -> R+` with `f(0) = 0`, tabulated on a grid.
/// Beyond the last node it continues linearly with the last secant slope.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneComponent {
    grid: Pchip,
    tail_slope: f64,
}

impl MonotoneComponent {
    pub fn new(grid_t: Vec<f64>, grid_f: Vec<f64>) -> Result<Self> {
        if grid_t.first() != Some(&0.0) || grid_f.first() != Some(&0.0) {
            return Err(Error::InvalidBody(
                "generalized-ball component grids must start at t = 0 with f(0) = 0".into(),
            ));
        }
        let grid = Pchip::new(grid_t, grid_f).map_err(|e| Error::InvalidBody(e.to_string()))?;
        if !grid.is_strictly_increasing() {
            return Err(Error::InvalidBody(
                "generalized-ball component must be strictly increasing".into(),
            ));
        }
        let (t, f) = (grid.nodes(), grid.values());
        let n = t.len();
        let tail_slope = (f[n - 1] - f[n - 2]) / (t[n - 1] - t[n - 2]);
        Ok(Self { grid, tail_slope })
    }

    /// `f(t) = t^exponent`, tabulated at `nodes + 1` points with equally
    /// spaced values up to `f_max`, so node values are exact.
    pub fn power(exponent: f64, f_max: f64, nodes: usize) -> Result<Self> {
        if !(exponent > 0.0) || !(f_max > 0.0) || nodes < 2 {
            return Err(Error::InvalidBody("power component needs positive exponent and range".into()));
        }
        let f: Vec<f64> = (0..=nodes).map(|k| k as f64 / nodes as f64 * f_max).collect();
        let t = f.iter().map(|v| v.powf(1.0 / exponent)).collect();
        Self::new(t, f)
    }

    pub fn grid(&self) -> &Pchip {
        &self.grid
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (_, t_end) = self.grid.domain();
        if t > t_end {
            let f_end = self.grid.values()[self.grid.values().len() - 1];
            f_end + self.tail_slope * (t - t_end)
        } else {
            self.grid.eval(t)
        }
    }

    /// Smallest `t >= 0` with `f(t) = s`, for `s >= 0`.
    pub fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let (_, t_end) = self.grid.domain();
        let f_end = self.grid.values()[self.grid.values().len() - 1];
        if s > f_end {
            t_end + (s - f_end) / self.tail_slope
        } else {
            self.grid.inverse(s).unwrap_or(t_end)
        }
    }
}

/// `{x : <M x, x> <= 1}` for symmetric positive-definite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEllipsoid {
    matrix: DMatrix<f64>,
    /// Eigenvectors of `M` as columns.
    rotation: DMatrix<f64>,
    /// Semi-axes `1 / sqrt(eigenvalue)` in eigenvector order.
    semi_axes: Vec<f64>,
}

impl QuadraticEllipsoid {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidBody("quadratic form matrix must be square and nonempty".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |r, c| rows[r][c]);
        for r in 0..d {
            for c in 0..r {
                let (a, b) = (matrix[(r, c)], matrix[(c, r)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidBody("quadratic form matrix must be symmetric".into()));
                }
            }
        }
        if matrix.clone().cholesky().is_none() {
            return Err(Error::InvalidBody("quadratic form matrix must be positive definite".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidBody("quadratic form matrix must be positive definite".into()));
        }
        let semi_axes = eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
        Ok(Self { matrix, rotation: eig.eigenvectors, semi_axes })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| self.matrix[(r, c)]).collect()).collect()
    }

    /// Eigenvalues of the form, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.semi_axes.iter().map(|a| 1.0 / (a * a)).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn dim(&self) -> usize {
        self.semi_axes.len()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for r in 0..d {
            let mut row = 0.0;
            for c in 0..d {
                row += self.matrix[(r, c)] * x[c];
            }
            s += row * x[r];
        }
        s
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let local: Vec<f64> = (0..d)
            .map(|k| (0..d).map(|r| self.rotation[(r, k)] * x[r]).sum())
            .collect();
        let p = ellipsoid::project_axis_aligned(&self.semi_axes, &local);
        (0..d)
            .map(|r| (0..d).map(|k| self.rotation[(r, k)] * p[k]).sum())
            .collect()
    }
}

/// Closed convex bodies used as theorem inputs.
///
/// `GeneralizedBall` sets `{sum f_i(|x_i|) <= 1}` need not be convex; they
/// support membership only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyDef", into = "BodyDef")]
pub enum ConvexBody {
    /// Centered ball, valid in any dimension.
    Ball { radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    QuadraticEllipsoid(QuadraticEllipsoid),
    HPolytope {
        halfspaces: Vec<Halfspace>,
        /// Caller-supplied bounding radius; required for bounds when d > 3.
        radius_hint: Option<f64>,
    },
    GeneralizedBall { components: Vec<MonotoneComponent> },
    Intersection(Vec<ConvexBody>),
}

impl ConvexBody {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody("ball radius must be positive".into()));
        }
        Ok(Self::Ball { radius })
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.is_empty() || semi_axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidBody("ellipsoid semi-axes must be positive".into()));
        }
        Ok(Self::Ellipsoid { semi_axes })
    }

    pub fn quadratic_ellipsoid(rows: Vec<Vec<f64>>) -> Result<Self> {
        QuadraticEllipsoid::new(rows).map(Self::QuadraticEllipsoid)
    }

    pub fn hpolytope(halfspaces: Vec<Halfspace>, radius_hint: Option<f64>) -> Result<Self> {
        let d = halfspaces
            .first()
            .map(|h| h.normal.len())
            .ok_or_else(|| Error::InvalidBody("polytope needs at least one halfspace".into()))?;
        if d == 0 || halfspaces.iter().any(|h| h.normal.len() != d) {
            return Err(Error::InvalidBody("halfspace normals must share one dimension".into()));
        }
        if let Some(r) = radius_hint {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidBody("radius hint must be positive".into()));
            }
        }
        Ok(Self::HPolytope { halfspaces, radius_hint })
    }

    /// Convenience constructor from `(normal, offset)` pairs.
    pub fn polytope_from(rows: &[(Vec<f64>, f64)], radius_hint: Option<f64>) -> Result<Self> {
        let hs = rows
            .iter()
            .map(|(n, b)| Halfspace::new(n.clone(), *b))
            .collect::<Result<Vec<_>>>()?;
        Self::hpolytope(hs, radius_hint)
    }

    /// Axis-aligned box `prod [lo_i, hi_i]`.
    pub fn aabb(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        let mut rows = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            rows.push((e.clone(), hi[i]));
            e[i] = -1.0;
            rows.push((e, -lo[i]));
        }
        Self::polytope_from(&rows, None)
    }

    /// Standard simplex `{x_i >= 0, sum x_i <= 1}`.
    pub fn simplex(d: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(d + 1);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = -1.0;
            rows.push((e, 0.0));
        }
        rows.push((vec![1.0; d], 1.0));
        Self::polytope_from(&rows, None)
    }

    pub fn generalized_ball(components: Vec<MonotoneComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidBody("generalized ball needs at least one component".into()));
        }
        Ok(Self::GeneralizedBall { components })
    }

    pub fn intersection(bodies: Vec<ConvexBody>) -> Result<Self> {
        if bodies.is_empty() {
            return Err(Error::InvalidBody("intersection needs at least one body".into()));
        }
        let dims: Vec<usize> = bodies.iter().filter_map(|b| b.dim()).collect();
        if dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidBody("intersected bodies differ in dimension".into()));
        }
        Ok(Self::Intersection(bodies))
    }

    /// Intrinsic dimension; `None` for dimension-free bodies (balls).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Ball { .. } => None,
            Self::Ellipsoid { semi_axes } => Some(semi_axes.len()),
            Self::QuadraticEllipsoid(q) => Some(q.dim()),
            Self::HPolytope { halfspaces, .. } => Some(halfspaces[0].normal.len()),
            Self::GeneralizedBall { components } => Some(components.len()),
            Self::Intersection(bodies) => bodies.iter().find_map(|b| b.dim()),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(e) if e != d => Err(Error::DimensionMismatch { expected: e, got: d }),
            _ => Ok(()),
        }
    }

    /// Closed-set membership, boundary included, no tolerance.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Self::Ball { radius } => dot(x, x) <= radius * radius,
            Self::Ellipsoid { semi_axes } => {
                semi_axes.iter().zip(x).map(|(a, v)| (v / a) * (v / a)).sum::<f64>() <= 1.0
            }
            Self::QuadraticEllipsoid(q) => q.quadratic_form(x) <= 1.0,
            Self::HPolytope { halfspaces, .. } => halfspaces.iter().all(|h| h.value(x) <= 0.0),
            Self::GeneralizedBall { components } => {
                components.iter().zip(x).map(|(f, v)| f.eval(v.abs())).sum::<f64>() <= 1.0
            }
            Self::Intersection(bodies) => bodies.iter().all(|b| b.contains_unchecked(x)),
        }
    }

    pub fn contains_origin(&self, d: usize) -> Result<bool> {
        self.contains(&vec![0.0; d])
    }

    /// Lower bound on `distance(x)` that needs no projection.
    pub fn distance_lower_bound(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ball { radius } => (norm(x) - radius).max(0.0),
            Self::HPolytope { halfspaces, .. } => polytope::max_violation(halfspaces, x).max(0.0),
            Self::Intersection(bodies) => bodies
                .iter()
                .map(|b| b.distance_lower_bound(x))
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// Nearest point of the body to `x`; `x` itself when inside.
    pub fn project(&self, x: &[f64]) -> Result<Point> {
        self.check_dim(x.len())?;
        if self.contains_unchecked(x) {
            return Ok(x.to_vec());
        }
        match self {
            Self::Ball { radius } => {
                let r = norm(x);
                Ok(x.iter().map(|v| v * radius / r).collect())
            }
            Self::Ellipsoid { semi_axes } => Ok(ellipsoid::project_axis_aligned(semi_axes, x)),
            Self::QuadraticEllipsoid(q) => Ok(q.project(x)),
            Self::HPolytope { halfspaces, .. } => polytope::project(halfspaces, x),
            Self::GeneralizedBall { .. } => Err(Error::Unsupported("projection")),
            Self::Intersection(bodies) => project_intersection(bodies, x),
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    /// Per-coordinate enclosing intervals in dimension `d`.
    pub fn coordinate_bounds(&self, d: usize) -> Result<Vec<(f64, f64)>> {
        self.check_dim(d)?;
        match self {
            Self::Ball { radius } => Ok(vec![(-radius, *radius); d]),
            Self::Ellipsoid { semi_axes } => Ok(semi_axes.iter().map(|a| (-a, *a)).collect()),
            Self::QuadraticEllipsoid(q) => {
                let inv = q
                    .matrix
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidBody("singular quadratic form".into()))?;
                Ok((0..d).map(|i| inv[(i, i)].sqrt()).map(|w| (-w, w)).collect())
            }
            Self::HPolytope { halfspaces, radius_hint } => match radius_hint {
                Some(r) => Ok(vec![(-r, *r); d]),
                None if d <= 3 => polytope::vertex_bounds(halfspaces, d).map(|(b, _)| b),
                None => Err(Error::InvalidBody(
                    "polytope bounds in dimension > 3 need a radius_hint".into(),
                )),
            },
            Self::GeneralizedBall { components } => Ok(components
                .iter()
                .map(|f| f.inverse(1.0))
                .map(|w| (-w, w))
                .collect()),
            Self::Intersection(bodies) => {
                let mut out = vec![(f64::NEG_INFINITY, f64::INFINITY); d];
                let mut any = false;
                let mut last_err = None;
                for b in bodies {
                    match b.coordinate_bounds(d) {
                        Ok(bd) => {
                            any = true;
                            for (o, n) in out.iter_mut().zip(bd) {
                                o.0 = o.0.max(n.0);
                                o.1 = o.1.min(n.1);
                            }
                        }
                        Err(e) => last_err = Some(e),
                    }
                }
                if !any {
                    return Err(last_err.unwrap_or(Error::Unbounded("no bounded member".into())));
                }
                Ok(out)
            }
        }
    }

    /// Radius of a centered ball containing the body (never an underestimate).
    pub fn bounding_radius(&self, d: usize) -> Result<f64> {
        self.check_dim(d)?;
        let pad = 1.0 + 1e-12;
        match self {
            Self::Ball { radius } => Ok(*radius),
            Self::Ellipsoid { semi_axes } => Ok(semi_axes.iter().cloned().fold(0.0, f64::max)),
            Self::QuadraticEllipsoid(q) => Ok(q.semi_axes.iter().cloned().fold(0.0, f64::max) * pad),
            Self::HPolytope { halfspaces, radius_hint } => match radius_hint {
                Some(r) => Ok(*r),
                None if d <= 3 => polytope::vertex_bounds(halfspaces, d).map(|(_, r)| r * pad),
                None => Err(Error::InvalidBody(
                    "polytope bounds in dimension > 3 need a radius_hint".into(),
                )),
            },
            Self::GeneralizedBall { .. } | Self::Intersection(_) => {
                let box_r = self
                    .coordinate_bounds(d)?
                    .iter()
                    .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let member_r = match self {
                    Self::Intersection(bodies) => bodies
                        .iter()
                        .filter_map(|b| b.bounding_radius(d).ok())
                        .fold(f64::INFINITY, f64::min),
                    _ => f64::INFINITY,
                };
                Ok(box_r.min(member_r) * pad)
            }
        }
    }
}

fn project_intersection(bodies: &[ConvexBody], x0: &[f64]) -> Result<Point> {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut incr = vec![vec![0.0; d]; bodies.len()];
    let mut residual = f64::INFINITY;
    for sweep in 0..polytope::MAX_SWEEPS {
        let start = x.clone();
        let mut incr_change = 0.0;
        for (body, p) in bodies.iter().zip(incr.iter_mut()) {
            let y: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let next = body.project(&y)?;
            for k in 0..d {
                let np = y[k] - next[k];
                incr_change += (np - p[k]) * (np - p[k]);
                p[k] = np;
            }
            x = next;
        }
        let change = start.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        residual = change.max(incr_change.sqrt());
        if residual < PROJ_TOL && sweep > 0 {
            break;
        }
    }
    let outside = bodies.iter().map(|b| b.distance_lower_bound(&x)).fold(0.0, f64::max);
    if outside > 1e-6 {
        return Err(Error::EmptyBody("intersection members do not overlap".into()));
    }
    if residual >= PROJ_TOL {
        return Err(Error::NonConvergence {
            iterations: polytope::MAX_SWEEPS,
            residual,
            last_iterate: x,
        });
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// JSON exchange format

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceDef {
    pub n: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentDef {
    pub grid_t: Vec<f64>,
    pub grid_f: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyDef {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    QuadraticEllipsoid {
        matrix: Vec<Vec<f64>>,
    },
    Hpolytope {
        halfspaces: Vec<HalfspaceDef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius_hint: Option<f64>,
    },
    GeneralizedBall {
        components: Vec<ComponentDef>,
    },
    Intersection {
        bodies: Vec<BodyDef>,
    },
}

impl TryFrom<BodyDef> for ConvexBody {
    type Error = Error;

    fn try_from(def: BodyDef) -> Result<Self> {
        match def {
            BodyDef::Ball { radius } => Self::ball(radius),
            BodyDef::Ellipsoid { semi_axes } => Self::ellipsoid(semi_axes),
            BodyDef::QuadraticEllipsoid { matrix } => Self::quadratic_ellipsoid(matrix),
            BodyDef::Hpolytope { halfspaces, radius_hint } => {
                let hs = halfspaces
                    .into_iter()
                    .map(|h| Halfspace::new(h.n, h.b))
                    .collect::<Result<Vec<_>>>()?;
                Self::hpolytope(hs, radius_hint)
            }
            BodyDef::GeneralizedBall { components } => {
                let cs = components
                    .into_iter()
                    .map(|c| MonotoneComponent::new(c.grid_t, c.grid_f))
                    .collect::<Result<Vec<_>>>()?;
                Self::generalized_ball(cs)
            }
            BodyDef::Intersection { bodies } => {
                let bs = bodies
                    .into_iter()
                    .map(ConvexBody::try_from)
                    .collect::<Result<Vec<_>>>()?;
                Self::intersection(bs)
            }
        }
    }
}

impl From<ConvexBody> for BodyDef {
    fn from(body: ConvexBody) -> Self {
        match body {
            ConvexBody::Ball { radius } => BodyDef::Ball { radius },
            ConvexBody::Ellipsoid { semi_axes } => BodyDef::Ellipsoid { semi_axes },
            ConvexBody::QuadraticEllipsoid(q) => {
BodyDef::QuadraticEllipsoid { matrix: q.rows() }
            }
            ConvexBody::HPolytope { halfspaces, radius_hint } => BodyDef::Hpolytope {
                halfspaces: halfspaces
                    .into_iter()
                    .map(|h| HalfspaceDef { n: h.normal, b: h.offset })
                    .collect(),
                radius_hint,
            },
            ConvexBody::GeneralizedBall { components } => BodyDef::GeneralizedBall {
                components: components
                    .into_iter()
                    .map(|c| ComponentDef {
                        grid_t: c.grid.nodes().to_vec(),
                        grid_f: c.grid.values().to_vec(),
                    })
                    .collect(),
            },
            ConvexBody::Intersection(bodies) => BodyDef::Intersection {
                bodies: bodies.into_iter().map(BodyDef::from).collect(),
            },
        }
    }
}
