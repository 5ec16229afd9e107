//! Estimators: Monte Carlo with common random numbers, sphere averages and
//! the `Phi'` formula, nested slice quadrature, and a 2D grid oracle.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{ConvexBody, MonotoneComponent};
use crate::measures::{sphere_area, Measure, MeasureEstimate, Method, ProductDensity, RadialDensity, Univariate};
use crate::quadrature::GaussLegendre;
use crate::rng::{map_chunks, map_items, substream};

/// Gauss-Legendre nodes per level of [`sliced_measure`].
pub const SLICE_NODES: usize = 64;

/// Running means and co-moments of a vector of functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    n: usize,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Self { n: 0, mean: vec![0.0; k], comoment: vec![0.0; k * k] }
    }

    fn k(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, v: &[f64]) {
        let k = self.k();
        self.n += 1;
        let nf = self.n as f64;
        let mut delta = [0.0; 16];
        for i in 0..k {
            delta[i] = v[i] - self.mean[i];
            self.mean[i] += delta[i] / nf;
        }
        for i in 0..k {
            let after = v[i] - self.mean[i];
            for j in 0..k {
                self.comoment[i * k + j] += delta[j] * after;
            }
        }
    }

    /// Chan's pairwise update; the result depends only on merge order.
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let k = self.k();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            for j in 0..k {
                self.comoment[i * k + j] += other.comoment[i * k + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..k {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Unbiased sample covariance.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.comoment[i * self.k() + j] / (self.n - 1) as f64
    }

    pub fn estimate(&self, i: usize) -> MeasureEstimate {
        MeasureEstimate {
            value: self.mean[i],
            std_error: (self.cov(i, i).max(0.0) / self.n as f64).sqrt(),
            n_samples: self.n,
            method: Method::Mc,
        }
    }

    /// Standard error of `sum_i grad_i * mean_i`.
    pub fn linear_se(&self, grad: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, gi) in grad.iter().enumerate() {
            for (j, gj) in grad.iter().enumerate() {
                v += gi * gj * self.cov(i, j);
            }
        }
        (v.max(0.0) / self.n as f64).sqrt()
    }

    /// Gap `m0 - m1 m2` with its delta-method standard error.
    pub fn product_gap(&self) -> (f64, f64) {
        let (m0, m1, m2) = (self.mean[0], self.mean[1], self.mean[2]);
        (m0 - m1 * m2, self.linear_se(&[1.0, -m2, -m1]))
    }
}

/// Sample means and co-moments of `k <= 16` functionals evaluated on one
/// stream of draws from `measure`. The result is independent of the thread
/// count.
pub fn mc_moments<F>(measure: &Measure, n: usize, seed: u64, k: usize, eval: F) -> Result<Moments>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync + Send,
{
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    assert!(k <= 16, "at most 16 functionals");
    let d = measure.dim();
    let chunks = map_chunks(n, seed, |_, len, rng| -> Result<Moments> {
        let mut m = Moments::new(k);
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; k];
        for _ in 0..len {
            measure.sample_into(rng, &mut x);
            eval(&x, &mut v)?;
            m.push(&v);
        }
        Ok(m)
    });
    let mut total = Moments::new(k);
    for c in chunks {
        total.merge(&c?);
    }
    Ok(total)
}

/// `mu(f)` by plain Monte Carlo.
pub fn mc_integral(measure: &Measure, field: &ScalarField, n: usize, seed: u64) -> Result<MeasureEstimate> {
    field.check_dim(measure.dim())?;
    let m = mc_moments(measure, n, seed, 1, |x, v| {
        v[0] = field.eval(x)?;
        Ok(())
    })?;
    Ok(m.estimate(0))
}

/// `mu(f g)`, `mu(f)`, `mu(g)` from one sample stream, and the gap
/// `mu(f g) - mu(f) mu(g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEstimate {
    pub both: MeasureEstimate,
    pub a: MeasureEstimate,
    pub b: MeasureEstimate,
    pub gap: f64,
    pub gap_se: f64,
}

impl JointEstimate {
    fn from_moments(m: &Moments) -> Self {
        let (gap, gap_se) = m.product_gap();
        Self { both: m.estimate(0), a: m.estimate(1), b: m.estimate(2), gap, gap_se }
    }
}

pub fn mc_joint(measure: &Measure, a: &ConvexBody, b: &ConvexBody, n: usize, seed: u64) -> Result<JointEstimate> {
    let d = measure.dim();
    a.check_dim(d)?;
    b.check_dim(d)?;
    let m = mc_moments(measure, n, seed, 3, |x, v| {
        let ia = a.contains(x)?;
        let ib = b.contains(x)?;
        v[0] = if ia && ib { 1.0 } else { 0.0 };
        v[1] = if ia { 1.0 } else { 0.0 };
        v[2] = if ib { 1.0 } else { 0.0 };
        Ok(())
    })?;
    Ok(JointEstimate::from_moments(&m))
}

/// Field version of [`mc_joint`]: estimates `mu(f g)`, `mu(f)`, `mu(g)`.
pub fn mc_joint_fields(measure: &Measure, f: &ScalarField, g: &ScalarField, n: usize, seed: u64) -> Result<JointEstimate> {
    let d = measure.dim();
    f.check_dim(d)?;
    g.check_dim(d)?;
    let m = mc_moments(measure, n, seed, 3, |x, v| {
        let fv = f.eval(x)?;
        let gv = g.eval(x)?;
        v[0] = fv * gv;
        v[1] = fv;
        v[2] = gv;
        Ok(())
    })?;
    Ok(JointEstimate::from_moments(&m))
}

/// Normalized average of `f(t theta)` over the unit sphere of R^d.
pub fn sphere_average(field: &ScalarField, d: usize, t: f64, m_dirs: usize, seed: u64) -> Result<MeasureEstimate> {
    if m_dirs < 2 {
        return Err(Error::InvalidArgument("sphere average needs at least 2 directions".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("radius must be nonnegative".into()));
    }
    field.check_dim(d)?;
    match d {
        0 => Err(Error::InvalidArgument("dimension must be positive".into())),
        1 => {
            let v = 0.5 * (field.eval(&[t])? + field.eval(&[-t])?);
            Ok(MeasureEstimate { value: v, std_error: 0.0, n_samples: 2, method: Method::RadialQuadrature })
        }
        2 => {
            let mut s = 0.0;
            for k in 0..m_dirs {
                let a = 2.0 * PI * k as f64 / m_dirs as f64;
                s += field.eval(&[t * a.cos(), t * a.sin()])?;
            }
            Ok(MeasureEstimate {
                value: s / m_dirs as f64,
                std_error: 0.0,
                n_samples: m_dirs,
                method: Method::RadialQuadrature,
            })
        }
        _ => {
            let mut rng = substream(seed, 0);
            let mut m = Moments::new(1);
            let mut x = vec![0.0; d];
            for _ in 0..m_dirs {
                let mut n2: f64 = 0.0;
                for v in x.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    n2 += *v * *v;
                }
                let s = t / n2.sqrt();
                x.iter_mut().for_each(|v| *v *= s);
                m.push(&[field.eval(&x)?]);
            }
            Ok(m.estimate(0))
        }
    }
}

/// `Phi'(t) = rho(t) t^{d-1} sigma(S^{d-1}) (avg_{S^{d-1}} f(t .) - mu(f))`.
pub fn phi_derivative(
    field: &ScalarField,
    measure: &RadialDensity,
    t: f64,
    m_dirs: usize,
    mu_f: f64,
    seed: u64,
) -> Result<MeasureEstimate> {
    let d = measure.dim();
    let avg = sphere_average(field, d, t, m_dirs, seed)?;
    let factor = measure.rho(t) * t.powi(d as i32 - 1) * sphere_area(d);
    Ok(MeasureEstimate {
        value: factor * (avg.value - mu_f),
        std_error: factor * avg.std_error,
        ..avg
    })
}

/// `int_a^b sigma rho(r) r^{d-1} avg_{S^{d-1}} f(r .) dr` for d <= 2, by
/// Gauss-Legendre on `panels` equal panels.
pub fn radial_quadrature(
    field: &ScalarField,
    measure: &RadialDensity,
    a: f64,
    b: f64,
    m_dirs: usize,
    panels: usize,
) -> Result<f64> {
    let d = measure.dim();
    if d > 2 {
        return Err(Error::Unsupported("deterministic radial quadrature in dimension > 2"));
    }
    if b <= a {
        return Ok(0.0);
    }
    let gl = GaussLegendre::new(16);
    let area = sphere_area(d);
    let h = (b - a) / panels.max(1) as f64;
    let mut total = 0.0;
    let mut err = None;
    for p in 0..panels.max(1) {
        let lo = a + h * p as f64;
        total += gl.integrate(lo, lo + h, |r| {
            match sphere_average(field, d, r, m_dirs, 0) {
                Ok(avg) => area * measure.rho(r) * r.powi(d as i32 - 1) * avg.value,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

// ---------------------------------------------------------------------------
// Nested slice quadrature

#[derive(Clone, Copy)]
enum Component<'a> {
    /// `t^2 / a^2`.
    Quadratic(f64),
    Monotone(&'a MonotoneComponent),
}

impl Component<'_> {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Component::Quadratic(a) => (t / a) * (t / a),
            Component::Monotone(m) => m.eval(t),
        }
    }

    fn inverse(&self, s: f64) -> f64 {
        match self {
            Component::Quadratic(a) => a * s.max(0.0).sqrt(),
            Component::Monotone(m) => m.inverse(s),
        }
    }
}

fn separable_components(body: &ConvexBody, d: usize) -> Result<Vec<Component<'_>>> {
    body.check_dim(d)?;
    match body {
        ConvexBody::Ball { radius } => Ok(vec![Component::Quadratic(*radius); d]),
        ConvexBody::Ellipsoid { semi_axes } => Ok(semi_axes.iter().map(|a| Component::Quadratic(*a)).collect()),
        ConvexBody::GeneralizedBall { components } => Ok(components.iter().map(Component::Monotone).collect()),
        _ => Err(Error::Unsupported("slice quadrature (needs a coordinate-separable body)")),
    }
}

/// `mu_1 x ... x mu_k ({x : sum_i f_i(|x_i|) <= s})`.
fn level_mass(comps: &[Component], margs: &[RadialDensity], s: f64, gl: &GaussLegendre) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let k = comps.len() - 1;
    let w = comps[k].inverse(s);
    let m = &margs[k];
    if k == 0 {
        return m.radius_table().cdf(w);
    }
    // x = w sin^2(theta) smooths the square-root behavior at both ends.
    2.0 * gl.integrate(0.0, PI / 2.0, |th| {
        let (sn, cs) = th.sin_cos();
        let x = w * sn * sn;
        let inner = level_mass(&comps[..k], &margs[..k], s - comps[k].eval(x), gl);
        Univariate::pdf(m, x) * inner * 2.0 * w * sn * cs
    })
}

/// Deterministic `mu(B)` with the refinement difference as error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicedMeasure {
    pub estimate: MeasureEstimate,
    pub discretization: f64,
}

/// `mu(B)` for a separable body under a product measure, by nested
/// Gauss-Legendre over slices. Runs at `nodes` and `2 nodes` per level and
/// returns the finer value.
pub fn sliced_measure(product: &ProductDensity, body: &ConvexBody, nodes: usize) -> Result<SlicedMeasure> {
    let d = product.dim();
    if d > 4 {
        return Err(Error::Unsupported("slice quadrature in dimension > 4; use mc_joint"));
    }
    let comps = separable_components(body, d)?;
    let coarse = level_mass(&comps, product.marginals(), 1.0, &GaussLegendre::new(nodes));
    let fine = level_mass(&comps, product.marginals(), 1.0, &GaussLegendre::new(2 * nodes));
    Ok(SlicedMeasure {
        estimate: MeasureEstimate {
            value: fine,
            std_error: 0.0,
            n_samples: 0,
            method: Method::NestedQuadrature,
        },
        discretization: (fine - coarse).abs(),
    })
}

/// Mass of the slice `{x : x_axis = v}` of a separable body under the
/// product of the remaining marginals.
pub fn slice_mass(product: &ProductDensity, body: &ConvexBody, axis: usize, v: f64, nodes: usize) -> Result<f64> {
    let d = product.dim();
    if axis >= d || d < 2 {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {d}")));
    }
    if d > 5 {
        return Err(Error::Unsupported("slice quadrature in dimension > 4; use mc_joint"));
    }
    let mut comps = separable_components(body, d)?;
    let mut margs = product.marginals().to_vec();
    let c = comps.remove(axis);
    margs.remove(axis);
    let s = 1.0 - c.eval(v.abs());
    Ok(level_mass(&comps, &margs, s, &GaussLegendre::new(nodes)))
}

// ---------------------------------------------------------------------------
// Grid oracle

/// Midpoint rule for `mu(f)` in d = 2 over the truncation box, clipped to the
/// field's support box when it has one.
pub fn grid_oracle_2d(measure: &Measure, field: &ScalarField, cells: usize) -> Result<MeasureEstimate> {
    if measure.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: measure.dim() });
    }
    field.check_dim(2)?;
    if cells == 0 {
        return Err(Error::InvalidArgument("grid needs at least one cell".into()));
    }
    let half = measure.truncation_box();
    let mut bx: Vec<(f64, f64)> = half.iter().map(|r| (-r, *r)).collect();
    if let Some(sb) = field.support_box(2) {
        for (b, s) in bx.iter_mut().zip(sb) {
            b.0 = b.0.max(s.0);
            b.1 = b.1.min(s.1);
        }
    }
    if bx.iter().any(|(lo, hi)| hi <= lo) {
        return Ok(MeasureEstimate::exact(0.0, Method::GridOracle));
    }
    let hx = (bx[0].1 - bx[0].0) / cells as f64;
    let hy = (bx[1].1 - bx[1].0) / cells as f64;
    let rows: Vec<usize> = (0..cells).collect();
    let sums = map_items(&rows, |_, &i| -> Result<f64> {
        let y = bx[1].0 + (i as f64 + 0.5) * hy;
        let mut s = 0.0;
        for j in 0..cells {
            let x = [bx[0].0 + (j as f64 + 0.5) * hx, y];
            let p = measure.pdf(&x);
            if p > 0.0 {
                s += p * field.eval(&x)?;
            }
        }
        Ok(s)
    });
    let mut total = 0.0;
    for s in sums {
        total += s?;
    }
    Ok(MeasureEstimate {
        value: total * hx * hy,
        std_error: 0.0,
        n_samples: cells * cells,
        method: Method::GridOracle,
    })
}

/// `mu(A)` for a 1D interval or ball under a symmetric 1D marginal.
pub fn interval_mass<D: Univariate>(density: &D, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if hi <= 0.0 {
        density.cdf(hi) - density.cdf(lo)
    } else if lo >= 0.0 {
        density.sf(lo) - density.sf(hi)
    } else {
        1.0 - density.cdf(lo) - density.sf(hi)
    }
}
