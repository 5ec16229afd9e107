//! Function classes, the `f_n` approximants, the ball-correlation profile
//! `Phi`, the FKG inequality, slice monotonicity, and verifiers for the
//! radial-ball and product-ellipsoid correlation inequalities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::field::FnApproximant;
use crate::field::ScalarField;
use crate::geometry::{is_projection_closed, uniform_in_ball, ConvexBody};
use crate::integration::{
    mc_integral, mc_joint, mc_joint_fields, mc_moments, phi_derivative, radial_quadrature, slice_mass,
    sliced_measure, JointEstimate, Moments, SLICE_NODES,
};
use crate::measures::{sphere_area, Measure, MeasureEstimate, Method, ProductDensity, RadialDensity};
use crate::report::{ApproximationStep, CheckReport, Provenance, Theorem, Verdict, VerificationReport};
use crate::rng::{map_chunks, mix_seed, substream};

/// Slack for pointwise class-membership comparisons.
pub const CLASS_TOL: f64 = 1e-9;

/// Approximant indices of the monotone-convergence ladder.
pub const LADDER: [u32; 5] = [2, 4, 8, 16, 32];

/// Largest grid for which the O(N^2) FKG double sum is evaluated.
pub const FKG_DOUBLE_SUM_MAX: usize = 8192;

/// Sample budgets of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: usize,
    pub m_dirs: usize,
    /// Points (or pairs) per hypothesis check.
    pub check_samples: usize,
    pub ladder_samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { samples: 1_000_000, m_dirs: 256, check_samples: 2048, ladder_samples: 100_000 }
    }
}

impl Budget {
    pub fn with_samples(samples: usize) -> Self {
        Self { samples, ladder_samples: samples.min(100_000), ..Self::default() }
    }

    fn class(&self) -> ClassCheckBudget {
        ClassCheckBudget {
            points: self.check_samples,
            rays: (self.check_samples / 16).max(8),
            radii: 64,
            mc_samples: self.samples.clamp(1, 100_000),
        }
    }
}

pub fn fn_eval(approx: &FnApproximant, x: &[f64]) -> Result<f64> {
    approx.eval(x)
}

// ---------------------------------------------------------------------------
// Class checks

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassCheckBudget {
    pub points: usize,
    pub rays: usize,
    pub radii: usize,
    pub mc_samples: usize,
}

impl Default for ClassCheckBudget {
    fn default() -> Self {
        Self { points: 2048, rays: 128, radii: 64, mc_samples: 100_000 }
    }
}

fn probe_radius(field: &ScalarField, measure: &Measure, d: usize) -> f64 {
    let box_r = measure.truncation_box().iter().map(|r| r * r).sum::<f64>().sqrt();
    field
        .support_radius(d)
        .unwrap_or(3.0 * measure.typical_radius())
        .min(box_r)
}

fn first_failure<F>(name: &str, trials: usize, mut probe: F) -> Result<CheckReport>
where
    F: FnMut() -> Result<Option<(Vec<f64>, String)>>,
{
    for _ in 0..trials {
        if let Some((w, detail)) = probe()? {
            return Ok(CheckReport::fail(name, trials, w, detail));
        }
    }
    Ok(CheckReport::pass(name, trials))
}

/// Probabilistic membership test for the class of continuous functions with
/// convex superlevel sets and maximum at the origin: (a) maximum at the
/// origin, (b) quasiconcavity on random pairs, (c) decrease along random
/// rays, (d) `f(0) >= mu(f) - 3 SE`.
pub fn check_class_cd(
    field: &ScalarField,
    measure: &Measure,
    budget: &ClassCheckBudget,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let d = measure.dim();
    field.check_dim(d)?;
    let r = probe_radius(field, measure, d);
    let f0 = field.eval(&vec![0.0; d])?;

    let mut rng = substream(seed, 0);
    let max_at_origin = first_failure("max-at-origin", budget.points, || {
        let x = uniform_in_ball(&mut rng, d, r);
        let v = field.eval(&x)?;
        Ok((v > f0 + CLASS_TOL).then(|| (x, format!("f(x) = {v:.6e} exceeds f(0) = {f0:.6e}"))))
    })?;

    let mut rng = substream(seed, 1);
    let convexity = first_failure("superlevel-convexity", budget.points, || {
        let x = uniform_in_ball(&mut rng, d, r);
        let y = uniform_in_ball(&mut rng, d, r);
        let lam: f64 = rng.random();
        let c = field.eval(&x)?.min(field.eval(&y)?);
        if c <= CLASS_TOL {
            return Ok(None);
        }
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let v = field.eval(&z)?;
        Ok((v < c - CLASS_TOL).then(|| (z, format!("f = {v:.6e} on a segment whose endpoints have f >= {c:.6e}"))))
    })?;

    let mut rng = substream(seed, 2);
    let rays = first_failure("ray-monotonicity", budget.rays, || {
        let theta = uniform_in_ball(&mut rng, d, 1.0);
        let n = theta.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut prev = f0;
        for k in 1..=budget.radii {
            let t = r * k as f64 / budget.radii as f64;
            let x: Vec<f64> = theta.iter().map(|v| v / n * t).collect();
            let v = field.eval(&x)?;
            if v > prev + CLASS_TOL {
                return Ok(Some((x, format!("f increases from {prev:.6e} to {v:.6e} along a ray"))));
            }
            prev = v;
        }
        Ok(None)
    })?;

    let mu = mc_integral(measure, field, budget.mc_samples, mix_seed(seed, 3))?;
    let bound = mu.value - 3.0 * mu.std_error;
    let peak = if f0 >= bound {
        CheckReport::pass("peak-above-mean", budget.mc_samples)
    } else {
        CheckReport::fail(
            "peak-above-mean",
            budget.mc_samples,
            vec![0.0; d],
            format!("f(0) = {f0:.6e} below mu(f) - 3 SE = {bound:.6e}"),
        )
    };
    Ok(vec![max_at_origin, convexity, rays, peak])
}

/// The same checks along random axis-parallel lines: every restriction
/// `x_i -> f(x)` must have its maximum at `x_i = 0`, be quasiconcave, and be
/// monotone on each half-line.
pub fn check_class_cd_bar(
    field: &ScalarField,
    measure: &Measure,
    budget: &ClassCheckBudget,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let d = measure.dim();
    field.check_dim(d)?;
    let r = probe_radius(field, measure, d);
    let lines = (budget.points / 16).max(8);
    let k = budget.radii.max(4);
    let mut rng = substream(seed, 0);

    let mut reports = vec![
        CheckReport::pass("axis-max-at-origin", lines),
        CheckReport::pass("axis-superlevel-convexity", lines),
        CheckReport::pass("axis-ray-monotonicity", lines),
    ];
    for _ in 0..lines {
        let base = uniform_in_ball(&mut rng, d, r);
        let axis = rng.random_range(0..d);
        let at = |s: f64| {
            let mut x = base.clone();
            x[axis] = s;
            x
        };
        let g0 = field.eval(&at(0.0))?;
        if reports[0].passed || reports[2].passed {
            for sign in [1.0, -1.0] {
                let mut prev = g0;
                for j in 1..=k {
                    let x = at(sign * r * j as f64 / k as f64);
                    let v = field.eval(&x)?;
                    if reports[0].passed && v > g0 + CLASS_TOL {
                        reports[0] = CheckReport::fail(
                            "axis-max-at-origin",
                            lines,
                            x.clone(),
                            format!("restriction along axis {axis} exceeds its value at 0"),
                        );
                    }
                    if reports[2].passed && v > prev + CLASS_TOL {
                        reports[2] = CheckReport::fail(
                            "axis-ray-monotonicity",
                            lines,
                            x.clone(),
                            format!("restriction along axis {axis} increases away from 0"),
                        );
                    }
                    prev = v;
                }
            }
        }
        if reports[1].passed {
            for _ in 0..k {
                let (s1, s2): (f64, f64) = (rng.random_range(-r..=r), rng.random_range(-r..=r));
                let lam: f64 = rng.random();
                let c = field.eval(&at(s1))?.min(field.eval(&at(s2))?);
                if c <= CLASS_TOL {
                    continue;
                }
                let z = at(lam * s1 + (1.0 - lam) * s2);
                let v = field.eval(&z)?;
                if v < c - CLASS_TOL {
                    reports[1] = CheckReport::fail(
                        "axis-superlevel-convexity",
                        lines,
                        z,
                        format!("restriction along axis {axis} is not quasiconcave"),
                    );
                    break;
                }
            }
        }
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Phi profile

/// `Phi(t) = mu(f 1_{B_t}) - mu(f) mu(B_t)` and `Phi'(t)` on a radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiProfile {
    pub t_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_se: Vec<f64>,
    pub dphi: Vec<f64>,
    pub dphi_se: Vec<f64>,
    pub mu_f: MeasureEstimate,
    /// First sign change of `Phi'` from positive to negative.
    pub t1_estimate: Option<f64>,
    pub unimodal: bool,
    pub unimodal_detail: String,
    pub method: Method,
}

/// Panel width of the deterministic radial quadrature.
const RADIAL_PANEL: f64 = 0.01;

fn radial_panels(a: f64, b: f64) -> usize {
    ((b - a) / RADIAL_PANEL).ceil().max(1.0) as usize
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty radius grid".into()));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radius grid must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

/// Estimates the profile by radial quadrature for d <= 2 and by common
/// random numbers for d >= 3.
pub fn phi_profile(
    field: &ScalarField,
    measure: &RadialDensity,
    t_grid: &[f64],
    n: usize,
    m_dirs: usize,
    seed: u64,
) -> Result<PhiProfile> {
    validate_grid(t_grid)?;
    let d = measure.dim();
    field.check_dim(d)?;
    let k = t_grid.len();
    if let ScalarField::Constant(c) = field {
        return Ok(PhiProfile {
            t_grid: t_grid.to_vec(),
            phi: vec![0.0; k],
            phi_se: vec![0.0; k],
            dphi: vec![0.0; k],
            dphi_se: vec![0.0; k],
            mu_f: MeasureEstimate::exact(*c, Method::RadialQuadrature),
            t1_estimate: None,
            unimodal: true,
            unimodal_detail: "constant field: Phi vanishes identically".into(),
            method: Method::RadialQuadrature,
        });
    }
    if d <= 2 {
        deterministic_profile(field, measure, t_grid, m_dirs)
    } else {
        mc_profile(field, measure, t_grid, n, m_dirs, seed)
    }
}

fn deterministic_profile(
    field: &ScalarField,
    measure: &RadialDensity,
    t_grid: &[f64],
    m_dirs: usize,
) -> Result<PhiProfile> {
    let d = measure.dim();
    let r_f = field
        .support_radius(d)
        .map(|r| r.min(measure.r_max()))
        .unwrap_or(measure.r_max());
    let one = ScalarField::Constant(1.0);
    let mu_f = radial_quadrature(field, measure, 0.0, r_f, m_dirs, radial_panels(0.0, r_f))?;

    let mut phi = Vec::with_capacity(t_grid.len());
    let (mut acc_f, mut acc_b, mut prev) = (0.0, 0.0, 0.0f64);
    for &t in t_grid {
        let hi_f = t.min(r_f);
        if hi_f > prev.min(r_f) {
            let lo = prev.min(r_f);
            acc_f += radial_quadrature(field, measure, lo, hi_f, m_dirs, radial_panels(lo, hi_f))?;
        }
        let hi_b = t.min(measure.r_max());
        if hi_b > prev.min(measure.r_max()) {
            let lo = prev.min(measure.r_max());
            acc_b += radial_quadrature(&one, measure, lo, hi_b, 2, radial_panels(lo, hi_b))?;
        }
        prev = t;
        phi.push(acc_f - mu_f * acc_b);
    }
    let dphi = t_grid
        .iter()
        .map(|&t| phi_derivative(field, measure, t, m_dirs, mu_f, 0).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let scale = dphi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = vec![1e-6 * scale + 1e-14; t_grid.len()];
    let shape = classify_signs(&dphi, &tol);
    let t1_estimate = shape.bracket.map(|(i, j)| {
        let g = |t: f64| phi_derivative(field, measure, t, m_dirs, mu_f, 0).map(|e| e.value);
        bisect_root(g, t_grid[i], t_grid[j])
    });
    let t1_estimate = t1_estimate.transpose()?;
    Ok(PhiProfile {
        t_grid: t_grid.to_vec(),
        phi,
        phi_se: vec![0.0; t_grid.len()],
        dphi,
        dphi_se: vec![0.0; t_grid.len()],
        mu_f: MeasureEstimate::exact(mu_f, Method::RadialQuadrature),
        t1_estimate,
        unimodal: shape.unimodal,
        unimodal_detail: shape.detail,
        method: Method::RadialQuadrature,
    })
}

fn bisect_root<G: Fn(f64) -> Result<f64>>(g: G, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn mc_profile(
    field: &ScalarField,
    measure: &RadialDensity,
    t_grid: &[f64],
    n: usize,
    m_dirs: usize,
    seed: u64,
) -> Result<PhiProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let d = measure.dim();
    let k = t_grid.len();
    let chunks = map_chunks(n, seed, |_, len, rng| -> Result<Vec<Moments>> {
        let mut ms = vec![Moments::new(3); k];
        let mut x = vec![0.0; d];
        for _ in 0..len {
            measure.sample_into(rng, &mut x);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let f = field.eval(&x)?;
            for (m, &t) in ms.iter_mut().zip(t_grid) {
                let ib = if r <= t { 1.0 } else { 0.0 };
                m.push(&[f * ib, f, ib]);
            }
        }
        Ok(ms)
    });
    let mut total = vec![Moments::new(3); k];
    for c in chunks {
        for (t, m) in total.iter_mut().zip(c?) {
            t.merge(&m);
        }
    }
    let (phi, phi_se): (Vec<f64>, Vec<f64>) = total.iter().map(|m| m.product_gap()).unzip();
    let mu_f = total[0].estimate(1);
    let mut dphi = Vec::with_capacity(k);
    let mut dphi_se = Vec::with_capacity(k);
    for (i, &t) in t_grid.iter().enumerate() {
        let e = phi_derivative(field, measure, t, m_dirs, mu_f.value, mix_seed(seed, 1000 + i as u64))?;
        let c = measure.rho(t) * t.powi(d as i32 - 1) * sphere_area(d);
        dphi.push(e.value);
        dphi_se.push(e.std_error.hypot(c * mu_f.std_error));
    }
    let tol: Vec<f64> = dphi_se.iter().map(|s| 3.0 * s + 1e-14).collect();
    let shape = classify_signs(&dphi, &tol);
    let t1_estimate = shape.bracket.map(|(i, j)| {
        let (a, b) = (dphi[i], dphi[j]);
        t_grid[i] + (t_grid[j] - t_grid[i]) * a / (a - b)
    });
    Ok(PhiProfile {
        t_grid: t_grid.to_vec(),
        phi,
        phi_se,
        dphi,
        dphi_se,
        mu_f,
        t1_estimate,
        unimodal: shape.unimodal,
        unimodal_detail: shape.detail,
        method: Method::Mc,
    })
}

struct SignShape {
    unimodal: bool,
    /// Last significantly positive and first significantly negative index.
    bracket: Option<(usize, usize)>,
    detail: String,
}

/// Reads the significant signs of `v` (beyond `tol`) and checks the pattern
/// `+* -*`.
fn classify_signs(v: &[f64], tol: &[f64]) -> SignShape {
    let mut last_pos = None;
    let mut first_neg: Option<usize> = None;
    let mut changes = 0;
    let mut prev = 0i8;
    let mut violation = None;
    for (i, (&x, &t)) in v.iter().zip(tol).enumerate() {
        let s = if x > t {
            1
        } else if x < -t {
            -1
        } else {
            0
        };
        if s == 0 {
            continue;
        }
        if s != prev && prev != 0 {
            changes += 1;
        }
        if s > 0 {
            if first_neg.is_some() && violation.is_none() {
                violation = Some(i);
            }
            if first_neg.is_none() {
                last_pos = Some(i);
            }
        } else if first_neg.is_none() {
            first_neg = Some(i);
        }
        prev = s;
    }
    let bracket = match (last_pos, first_neg) {
        (Some(p), Some(n)) if p < n => Some((p, n)),
        _ => None,
    };
    let detail = match violation {
        Some(i) => format!("Phi' turns positive again at grid index {i} ({changes} sign changes)"),
        None => format!("{changes} significant sign change(s) of Phi'"),
    };
    SignShape { unimodal: violation.is_none(), bracket, detail }
}

// ---------------------------------------------------------------------------
// FKG

/// Probability weights on an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl GridMeasure1D {
    /// Point masses, normalized to total mass one.
    pub fn discrete(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(Error::InvalidArgument("points and masses must be nonempty and of equal length".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("points must be strictly increasing".into()));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidArgument("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("measure has zero mass".into()));
        }
        Ok(Self { points, weights: masses.iter().map(|m| m / total).collect() })
    }

    /// Trapezoid weights of a density sampled on `points`.
    pub fn from_density(points: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n < 2 || rho.len() != n {
            return Err(Error::InvalidArgument("density grid needs at least two matching nodes".into()));
        }
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = points[i + 1] - points[i];
            w[i] += 0.5 * h * rho[i];
            w[i + 1] += 0.5 * h * rho[i + 1];
        }
        Self::discrete(points, w)
    }

    /// Uniform density on `[a, b]` with `n` nodes.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        let pts = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64).collect();
        Self::from_density(pts, vec![1.0; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FkgResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `sum w (f - E f)(g - E g)`, equal to `lhs - rhs` up to rounding.
    pub gap: f64,
    /// `1/2 sum_ij (f_i - f_j)(g_i - g_j) w_i w_j`, when the grid is small enough.
    pub double_sum: Option<f64>,
}

fn direction(v: &[f64]) -> (bool, bool) {
    let up = v.windows(2).all(|w| w[1] >= w[0]);
    let down = v.windows(2).all(|w| w[1] <= w[0]);
    (up, down)
}

/// `int f g dnu >= (int f dnu)(int g dnu)` for comonotone grid functions.
pub fn fkg_check(nu: &GridMeasure1D, f: &[f64], g: &[f64]) -> Result<FkgResult> {
    let n = nu.points.len();
    if f.len() != n || g.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len().min(g.len()) });
    }
    let (fu, fd) = direction(f);
    let (gu, gd) = direction(g);
    if !((fu && gu) || (fd && gd)) {
        return Err(Error::NotComonotone);
    }
    let w = &nu.weights;
    let ef: f64 = w.iter().zip(f).map(|(w, f)| w * f).sum();
    let eg: f64 = w.iter().zip(g).map(|(w, g)| w * g).sum();
    let efg: f64 = w.iter().zip(f).zip(g).map(|((w, f), g)| w * f * g).sum();
    let gap: f64 = w.iter().zip(f).zip(g).map(|((w, f), g)| w * (f - ef) * (g - eg)).sum();
    let double_sum = (n <= FKG_DOUBLE_SUM_MAX).then(|| {
        let mut s = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..i {
                row += (f[i] - f[j]) * (g[i] - g[j]) * w[j];
            }
            s += row * w[i];
        }
        s
    });
    Ok(FkgResult { lhs: efg, rhs: ef * eg, gap, double_sum })
}

// ---------------------------------------------------------------------------
// Slice monotonicity

#[derive(Debug, Clone, PartialEq)]
pub struct SliceCheck {
    pub grid: Vec<f64>,
    /// Slice masses at `grid`.
    pub values: Vec<f64>,
    pub report: CheckReport,
}

/// Checks that `v -> mu_(d-1)(slice of B at x_axis = v)` is even and
/// nonincreasing on `[0, inf)` over the nonnegative, increasing `grid`.
pub fn slice_monotonicity_check(
    product: &ProductDensity,
    body: &ConvexBody,
    axis: usize,
    grid: &[f64],
) -> Result<SliceCheck> {
    const NAME: &str = "slice-monotonicity";
    const TOL: f64 = 1e-9;
    validate_grid(grid)?;
    let d = product.dim();
    let values = grid
        .iter()
        .map(|&v| slice_mass(product, body, axis, v, SLICE_NODES))
        .collect::<Result<Vec<_>>>()?;
    let point = |v: f64| {
        let mut x = vec![0.0; d];
        x[axis] = v;
        x
    };
    let mut report = CheckReport::pass(NAME, 2 * grid.len());
    for (i, &v) in grid.iter().enumerate() {
        let mirror = slice_mass(product, body, axis, -v, SLICE_NODES)?;
        if (mirror - values[i]).abs() > TOL {
            report = CheckReport::fail(NAME, 2 * grid.len(), point(v), format!("slice mass not even at {v}"));
            break;
        }
        if i > 0 && values[i] > values[i - 1] + TOL {
            report = CheckReport::fail(
                NAME,
                2 * grid.len(),
                point(v),
                format!("slice mass increases from {:.6e} to {:.6e}", values[i - 1], values[i]),
            );
            break;
        }
    }
    Ok(SliceCheck { grid: grid.to_vec(), values, report })
}

// ---------------------------------------------------------------------------
// Verifiers

fn joint_report(theorem: Theorem, hypotheses: Vec<CheckReport>, j: &JointEstimate, provenance: Provenance) -> VerificationReport {
    VerificationReport {
        theorem,
        hypotheses,
        lhs: Some(j.both),
        rhs_factors: Some((j.a, j.b)),
        gap: j.gap,
        se: j.gap_se,
        verdict: Verdict::from_gap(j.gap, j.gap_se),
        approximation: Vec::new(),
        cross_checks: Default::default(),
        provenance,
    }
}

fn body_hypotheses(a: &ConvexBody, d: usize, need_origin: bool) -> Result<Vec<CheckReport>> {
    a.check_dim(d)?;
    let mut out = Vec::new();
    out.push(if matches!(a, ConvexBody::GeneralizedBall { .. }) {
        CheckReport::rejected("convex", "generalized balls need not be convex")
    } else {
        CheckReport::pass("convex", 0)
    });
    out.push(match a.bounding_radius(d) {
        Ok(_) => CheckReport::pass("bounded", 0),
        Err(Error::Unbounded(msg)) => CheckReport::rejected("bounded", msg),
        Err(e) => return Err(e),
    });
    if need_origin {
        out.push(if a.contains_origin(d)? {
            CheckReport::pass("origin-in-A", 1)
        } else {
            CheckReport::fail("origin-in-A", 1, vec![0.0; d], "the origin is not in A")
        });
    }
    Ok(out)
}

fn separable_hypothesis(b: &ConvexBody) -> CheckReport {
    match b {
        ConvexBody::Ball { .. } | ConvexBody::Ellipsoid { .. } | ConvexBody::GeneralizedBall { .. } => {
            CheckReport::pass("B-coordinate-separable", 0)
        }
        _ => CheckReport::rejected(
            "B-coordinate-separable",
            "B must be an axis-aligned ellipsoid or a generalized ball",
        ),
    }
}

fn any_failed(h: &[CheckReport]) -> bool {
    h.iter().any(|c| !c.passed)
}

/// `mu(f 1_B) >= mu(f) mu(B)` for a centered ball and `f` in the class.
pub fn verify_theorem_2_1(
    field: &ScalarField,
    measure: &RadialDensity,
    radius: f64,
    budget: &Budget,
    seed: u64,
) -> Result<VerificationReport> {
    let d = measure.dim();
    let mu: Measure = measure.clone().into();
    let ball = ConvexBody::ball(radius)?;
    let hyps = check_class_cd(field, &mu, &budget.class(), mix_seed(seed, 0xC1A5))?;
    let mut prov = Provenance::new(seed, budget.samples, &["mc"]);
    if any_failed(&hyps) {
        return Ok(VerificationReport::inapplicable(Theorem::FunctionalBall, hyps, prov));
    }
    let j = mc_joint_fields(&mu, field, &ScalarField::indicator(ball), budget.samples, seed)?;
    if d <= 2 && !matches!(field, ScalarField::Constant(_)) {
        let p = phi_profile(field, measure, &[radius], 0, budget.m_dirs, seed)?;
        prov.methods.push("radial-quadrature".into());
        let mut report = joint_report(Theorem::FunctionalBall, hyps, &j, prov);
        report.cross_checks.insert("phi_radial_quadrature".into(), p.phi[0]);
        return Ok(report);
    }
    Ok(joint_report(Theorem::FunctionalBall, hyps, &j, prov))
}

/// Theorem 2.1 on `f_n` for each `n` in [`LADDER`], from one sample stream.
/// The excess `mu(f_n) - mu(A)` is nonincreasing in `n` on that stream.
pub fn approximation_ladder(
    measure: &Measure,
    a: &ConvexBody,
    b: &ConvexBody,
    n: usize,
    seed: u64,
) -> Result<Vec<ApproximationStep>> {
    let k = 2 + 2 * LADDER.len();
    let reach = 1.0 / LADDER[0] as f64;
    let m = mc_moments(measure, n, seed, k, |x, v| {
        let ib = if b.contains(x)? { 1.0 } else { 0.0 };
        let lb = a.distance_lower_bound(x);
        let (ia, dist) = if lb >= reach {
            (0.0, lb)
        } else if a.contains(x)? {
            (1.0, 0.0)
        } else {
            (0.0, a.distance(x)?)
        };
        v[0] = ib;
        v[1] = ia;
        for (r, &nn) in LADDER.iter().enumerate() {
            let f = (1.0 - nn as f64 * dist).max(0.0);
            v[2 + 2 * r] = f;
            v[3 + 2 * r] = f * ib;
        }
        Ok(())
    })?;
    let mb = m.mean(0);
    Ok(LADDER
        .iter()
        .enumerate()
        .map(|(r, &nn)| {
            let (fi, fbi) = (2 + 2 * r, 3 + 2 * r);
            let mf = m.mean(fi);
            let lhs = m.mean(fbi);
            let mut grad = vec![0.0; k];
            grad[fbi] = 1.0;
            grad[fi] = -mb;
            grad[0] = -mf;
            let se = m.linear_se(&grad);
            let gap = lhs - mf * mb;
            ApproximationStep {
                index: nn,
                lhs,
                rhs: mf * mb,
                gap,
                se,
                excess: mf - m.mean(1),
                verdict: Verdict::from_gap(gap, se),
            }
        })
        .collect())
}

fn ladder_monotone(steps: &[ApproximationStep]) -> bool {
    steps.windows(2).all(|w| w[1].excess <= w[0].excess) && steps.iter().all(|s| s.excess >= 0.0)
}

/// `mu(A cap B) >= mu(A) mu(B)` for convex `A` containing the origin, a
/// centered ball `B` and a radial measure.
pub fn verify_theorem_1_1(
    a: &ConvexBody,
    measure: &RadialDensity,
    radius: f64,
    budget: &Budget,
    seed: u64,
) -> Result<VerificationReport> {
    let d = measure.dim();
    let hyps = body_hypotheses(a, d, true)?;
    let prov = Provenance::new(seed, budget.samples, &["mc"]);
    if any_failed(&hyps) {
        return Ok(VerificationReport::inapplicable(Theorem::BallRadial, hyps, prov));
    }
    let mu: Measure = measure.clone().into();
    let b = ConvexBody::ball(radius)?;
    let j = mc_joint(&mu, a, &b, budget.samples, seed)?;
    let mut report = joint_report(Theorem::BallRadial, hyps, &j, prov);
    if budget.ladder_samples > 0 {
        let steps = approximation_ladder(&mu, a, &b, budget.ladder_samples, mix_seed(seed, 0x1ADD))?;
        report
            .cross_checks
            .insert("ladder_monotone".into(), if ladder_monotone(&steps) { 1.0 } else { 0.0 });
        report.approximation = steps;
    }
    Ok(report)
}

/// `mu(A cap B) >= mu(A) mu(B)` for projection-closed convex `A`, a
/// separable `B` and a product measure.
pub fn verify_theorem_1_2(
    a: &ConvexBody,
    product: &ProductDensity,
    b: &ConvexBody,
    budget: &Budget,
    seed: u64,
) -> Result<VerificationReport> {
    let d = product.dim();
    b.check_dim(d)?;
    let mut hyps = body_hypotheses(a, d, false)?;
    hyps.push(separable_hypothesis(b));
    if !any_failed(&hyps) {
        hyps.push(is_projection_closed(a, d, budget.check_samples, mix_seed(seed, 0x9C))?);
    }
    let mut prov = Provenance::new(seed, budget.samples, &["mc"]);
    if any_failed(&hyps) {
        return Ok(VerificationReport::inapplicable(Theorem::EllipsoidProduct, hyps, prov));
    }
    let mu: Measure = product.clone().into();
    let j = mc_joint(&mu, a, b, budget.samples, seed)?;
    let sliced = if d <= 4 { Some(sliced_measure(product, b, SLICE_NODES)?) } else { None };
    if sliced.is_some() {
        prov.methods.push("nested-quadrature".into());
    }
    let mut report = joint_report(Theorem::EllipsoidProduct, hyps, &j, prov);
    if let Some(s) = sliced {
        report.cross_checks.insert("mu_B_sliced".into(), s.estimate.value);
        if j.b.std_error > 0.0 {
            report
                .cross_checks
                .insert("mu_B_sliced_z".into(), (j.b.value - s.estimate.value) / j.b.std_error);
        }
    }
    if budget.ladder_samples > 0 {
        let steps = approximation_ladder(&mu, a, b, budget.ladder_samples, mix_seed(seed, 0x1ADD))?;
        report
            .cross_checks
            .insert("ladder_monotone".into(), if ladder_monotone(&steps) { 1.0 } else { 0.0 });
        report.approximation = steps;
    }
    Ok(report)
}

/// `mu(f 1_B) >= mu(f) mu(B)` for `f` unimodal along every axis, a separable
/// `B` and a product measure.
pub fn verify_theorem_3_1(
    field: &ScalarField,
    product: &ProductDensity,
    b: &ConvexBody,
    budget: &Budget,
    seed: u64,
) -> Result<VerificationReport> {
    let d = product.dim();
    b.check_dim(d)?;
    let mu: Measure = product.clone().into();
    let mut hyps = vec![separable_hypothesis(b)];
    hyps.extend(check_class_cd_bar(field, &mu, &budget.class(), mix_seed(seed, 0xCBA5))?);
    let prov = Provenance::new(seed, budget.samples, &["mc"]);
    if any_failed(&hyps) {
        return Ok(VerificationReport::inapplicable(Theorem::FunctionalEllipsoid, hyps, prov));
    }
    let j = mc_joint_fields(&mu, field, &ScalarField::indicator(b.clone()), budget.samples, seed)?;
    Ok(joint_report(Theorem::FunctionalEllipsoid, hyps, &j, prov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MonotoneComponent;
    use crate::integration::grid_oracle_2d;
    use libm::erf;

    fn gauss(d: usize) -> RadialDensity {
        RadialDensity::gaussian(d).unwrap()
    }

    fn erf_mass(a: f64) -> f64 {
        erf(a / 2f64.sqrt())
    }

    fn small_budget(samples: usize) -> Budget {
        Budget { samples, m_dirs: 256, check_samples: 1024, ladder_samples: 20_000 }
    }

    #[test]
    fn fn_eval_examples() {
        let a = ConvexBody::simplex(2).unwrap();
        let f = FnApproximant::new(a, 8).unwrap();
        assert_eq!(fn_eval(&f, &[0.2, 0.2]).unwrap(), 1.0);
        assert!((fn_eval(&f, &[-1.0 / 16.0, 0.3]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fn_eval(&f, &[-0.125, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn class_check_examples() {
        let mu: Measure = gauss(2).into();
        let cb = ClassCheckBudget::default();
        let fs = ScalarField::approximant(ConvexBody::simplex(2).unwrap(), 8).unwrap();
        let rep = check_class_cd(&fs, &mu, &cb, 1).unwrap();
        assert!(rep.iter().all(|r| r.passed), "{rep:?}");

        let off = ScalarField::gaussian_at(vec![1.0, 0.0], 1.0);
        let rep = check_class_cd(&off, &mu, &cb, 2).unwrap();
        assert!(!rep[0].passed);

        let bump = ScalarField::Max(vec![
            ScalarField::gaussian_at(vec![1.0, 0.0], 1.0),
            ScalarField::gaussian_at(vec![-1.0, 0.0], 1.0),
        ]);
        let rep = check_class_cd(&bump, &mu, &cb, 3).unwrap();
        assert!(!rep[1].passed, "{rep:?}");
    }

    #[test]
    fn class_check_constant_is_accepted() {
        let mu: Measure = gauss(2).into();
        let rep = check_class_cd(&ScalarField::Constant(1.0), &mu, &ClassCheckBudget::default(), 4).unwrap();
        assert!(rep.iter().all(|r| r.passed));
    }

    #[test]
    fn axis_class_check() {
        let mu: Measure = ProductDensity::gaussian(2).unwrap().into();
        let cb = ClassCheckBudget::default();
        let f = ScalarField::approximant(ConvexBody::simplex(2).unwrap(), 4).unwrap();
        assert!(check_class_cd_bar(&f, &mu, &cb, 1).unwrap().iter().all(|r| r.passed));
        // A shifted box is convex but its restrictions peak away from zero.
        let shifted = ScalarField::approximant(ConvexBody::aabb(&[1.0, -1.0], &[2.0, 1.0]).unwrap(), 4).unwrap();
        assert!(check_class_cd_bar(&shifted, &mu, &cb, 2).unwrap().iter().any(|r| !r.passed));
    }

    #[test]
    fn phi_turning_point_closed_form() {
        let grid: Vec<f64> = (0..33).map(|i| i as f64 * 0.125).collect();
        let p = phi_profile(&ScalarField::gaussian(0.5), &gauss(2), &grid, 0, 256, 0).unwrap();
        let t1 = p.t1_estimate.unwrap();
        assert!((t1 - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-9, "t1 = {t1}");
        assert!(p.unimodal);
        for (t, phi) in grid.iter().zip(&p.phi) {
            let closed = 0.5 * (1.0 - (-t * t).exp()) - 0.5 * (1.0 - (-t * t / 2.0).exp());
            assert!((phi - closed).abs() < 1e-10, "t={t}");
        }
        assert!((p.mu_f.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn phi_of_constant_vanishes() {
        let p = phi_profile(&ScalarField::Constant(2.0), &gauss(2), &[0.5, 1.0], 0, 64, 0).unwrap();
        assert!(p.phi.iter().all(|v| *v == 0.0));
        assert!(p.t1_estimate.is_none() && p.unimodal);
        assert!(phi_profile(&ScalarField::Constant(2.0), &gauss(2), &[], 0, 64, 0).is_err());
    }

    #[test]
    fn phi_of_ball_approximant_positive_and_matches_grid_oracle() {
        let f = ScalarField::approximant(ConvexBody::ball(0.8).unwrap(), 8).unwrap();
        let grid: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
        let p = phi_profile(&f, &gauss(2), &grid, 0, 256, 0).unwrap();
        assert!(p.unimodal);
        assert!(p.phi.iter().all(|v| *v > 0.0), "{:?}", p.phi);
        let mu: Measure = gauss(2).into();
        let mu_f = grid_oracle_2d(&mu, &f, 2048).unwrap().value;
        for (&t, &phi) in grid.iter().zip(&p.phi).step_by(3) {
            let fb = ScalarField::Product(vec![f.clone(), ScalarField::indicator(ConvexBody::ball(t).unwrap())]);
            let lhs = grid_oracle_2d(&mu, &fb, 2048).unwrap().value;
            let mb = 1.0 - (-t * t / 2.0).exp();
            assert!((phi - (lhs - mu_f * mb)).abs() < 2e-4, "t={t}");
        }
    }

    #[test]
    fn phi_profile_mc_path_in_3d() {
        let grid: Vec<f64> = (1..=16).map(|i| i as f64 * 0.25).collect();
        let p = phi_profile(&ScalarField::gaussian(0.5), &gauss(3), &grid, 200_000, 512, 7).unwrap();
        assert_eq!(p.method, Method::Mc);
        // Closed form in d = 3: mu(f) = 2^{-3/2}.
        assert!(p.mu_f.agrees_with(2f64.powf(-1.5), 4.0, 0.0));
        assert!(p.unimodal, "{}", p.unimodal_detail);
        assert!(p.phi[0] > -3.0 * p.phi_se[0]);
        assert!(p.phi.last().unwrap() > &(-3.0 * p.phi_se.last().unwrap()));
    }

    #[test]
    fn sign_classification() {
        let s = classify_signs(&[0.0, 1.0, 2.0, 0.5, -1.0, -2.0], &[0.1; 6]);
        assert!(s.unimodal);
        assert_eq!(s.bracket, Some((3, 4)));
        let s = classify_signs(&[1.0, -1.0, 1.0], &[0.1; 3]);
        assert!(!s.unimodal);
    }

    #[test]
    fn fkg_closed_forms() {
        let nu = GridMeasure1D::uniform(0.0, 1.0, 65_537).unwrap();
        let t = nu.points().to_vec();
        let r = fkg_check(&nu, &t, &t).unwrap();
        assert!((r.gap - 1.0 / 12.0).abs() < 1e-10, "{r:?}");
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-10 && (r.rhs - 0.25).abs() < 1e-10);
        assert!(r.double_sum.is_none());

        let c = vec![3.0; t.len()];
        assert!(fkg_check(&nu, &c, &t).unwrap().gap.abs() < 1e-15);

        let two = GridMeasure1D::discrete(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let ind = [0.0, 1.0];
        let r = fkg_check(&two, &ind, &ind).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.5, 0.25));
        assert_eq!(r.double_sum, Some(0.25));

        let down = [1.0, 0.0];
        assert!(matches!(fkg_check(&two, &ind, &down), Err(Error::NotComonotone)));
    }

    #[test]
    fn slice_checks() {
        let p2 = ProductDensity::gaussian(2).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let e = ConvexBody::ellipsoid(vec![1.0, 2.0]).unwrap();
        let s = slice_monotonicity_check(&p2, &e, 1, &grid).unwrap();
        assert!(s.report.passed);
        assert_eq!(*s.values.last().unwrap(), 0.0);

        let ball = ConvexBody::ball(1.0).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let s = slice_monotonicity_check(&p2, &ball, 0, &grid).unwrap();
        assert!(s.report.passed);
        for (v, m) in grid.iter().zip(&s.values) {
            assert!((m - erf_mass((1.0 - v * v).max(0.0).sqrt())).abs() < 1e-8);
        }

        let sq = MonotoneComponent::power(0.5, 1.2, 400).unwrap();
        let gb = ConvexBody::generalized_ball(vec![sq.clone(), sq]).unwrap();
        let s = slice_monotonicity_check(&p2, &gb, 1, &grid).unwrap();
        assert!(s.report.passed);
        for (v, m) in grid.iter().zip(&s.values) {
            let w = (1.0 - v.sqrt()).powi(2);
            assert!((m - erf_mass(w)).abs() < 1e-5, "v={v} {m} {}", erf_mass(w));
        }
    }

    #[test]
    fn theorem_2_1_closed_form() {
        let f = ScalarField::gaussian(0.5);
        let rep = verify_theorem_2_1(&f, &gauss(2), 1.0, &small_budget(200_000), 11).unwrap();
        let exact = 0.5 * (1.0 - (-1.0f64).exp()) - 0.5 * (1.0 - (-0.5f64).exp());
        assert!((exact - 0.119325).abs() < 1e-6);
        assert_eq!(rep.verdict, Verdict::Confirmed);
        assert!((rep.gap - exact).abs() < 4.0 * rep.se, "{} vs {exact}", rep.gap);
        assert!((rep.cross_checks["phi_radial_quadrature"] - exact).abs() < 1e-10);

        let one = verify_theorem_2_1(&ScalarField::Constant(1.0), &gauss(2), 1.0, &small_budget(50_000), 1).unwrap();
        assert!(one.gap.abs() <= 1e-15 && one.verdict != Verdict::Violated);

        let off = ScalarField::gaussian_at(vec![1.0, 0.0], 1.0);
        let rep = verify_theorem_2_1(&off, &gauss(2), 1.0, &small_budget(10_000), 1).unwrap();
        assert_eq!(rep.verdict, Verdict::InapplicableHypothesis);
    }

    #[test]
    fn theorem_1_1_examples() {
        let g1 = gauss(1);
        let a = ConvexBody::aabb(&[-1.0], &[2.0]).unwrap();
        let rep = verify_theorem_1_1(&a, &g1, 1.0, &small_budget(400_000), 5).unwrap();
        let ma = 0.5 * (erf(2.0 / 2f64.sqrt()) + erf(1.0 / 2f64.sqrt()));
        let mb = erf_mass(1.0);
        let exact = mb - ma * mb;
        assert!((exact - 0.123843).abs() < 1e-6);
        assert!((rep.gap - exact).abs() < 4.0 * rep.se, "{} vs {exact}", rep.gap);
        assert_eq!(rep.verdict, Verdict::Confirmed);
        assert_eq!(rep.cross_checks["ladder_monotone"], 1.0);
        assert_eq!(rep.approximation.len(), LADDER.len());

        let shifted = ConvexBody::aabb(&[2.0], &[3.0]).unwrap();
        let rep = verify_theorem_1_1(&shifted, &g1, 1.0, &small_budget(1000), 5).unwrap();
        assert_eq!(rep.verdict, Verdict::InapplicableHypothesis);
    }

    #[test]
    fn theorem_1_2_examples() {
        let p2 = ProductDensity::gaussian(2).unwrap();
        let e = ConvexBody::ellipsoid(vec![1.0, 2.0]).unwrap();
        let rep = verify_theorem_1_2(&ConvexBody::simplex(2).unwrap(), &p2, &e, &small_budget(200_000), 3).unwrap();
        assert_eq!(rep.verdict, Verdict::Confirmed, "{rep:?}");
        assert!(rep.cross_checks["mu_B_sliced_z"].abs() < 4.0);

        let big = ConvexBody::ball(2.0).unwrap();
        let unit = ConvexBody::ellipsoid(vec![1.0, 1.0]).unwrap();
        let rep = verify_theorem_1_2(&big, &p2, &unit, &small_budget(200_000), 4).unwrap();
        let (ma, mb) = (1.0 - (-2.0f64).exp(), 1.0 - (-0.5f64).exp());
        assert!((rep.gap - mb * (1.0 - ma)).abs() < 4.0 * rep.se);

        let shifted = ConvexBody::aabb(&[1.0, -1.0], &[2.0, 1.0]).unwrap();
        let rep = verify_theorem_1_2(&shifted, &p2, &e, &small_budget(1000), 4).unwrap();
        assert_eq!(rep.verdict, Verdict::InapplicableHypothesis);
    }
}
