//! One-dimensional monotone transport and the quadratic-form correlation
//! inequality.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correlation::Budget;
use crate::error::{Error, Result};
use crate::field::{phi_n, Profile1D, ScalarField};
use crate::geometry::{is_symmetric, uniform_in_ball, ConvexBody};
use crate::integration::{mc_integral, mc_moments, Moments};
use crate::measures::{CdfTable, Measure, MeasureEstimate, Method, RadialDensity, Univariate, TABLE_NODES};
use crate::quadrature::GaussLegendre;
use crate::report::{ApproximationStep, CheckReport, Provenance, Theorem, Verdict, VerificationReport};
use crate::rng::{map_chunks, mix_seed, substream, StreamRng};

/// Transport grid size.
pub const MAP_NODES: usize = 2049;
/// Source quantile at the ends of the transport grid.
pub const MAP_TAIL: f64 = 1e-8;
/// Half-width of density tables, in standard deviations.
const TABLE_SDS: f64 = 10.0;
/// Pointwise tolerance of the contraction, oddness and push-forward checks.
pub const MAP_TOL: f64 = 1e-6;
/// Approximation indices `(m, n)` used for the ellipsoid corollary.
pub const COROLLARY_LADDER: [u32; 3] = [4, 16, 64];
/// Floor on eigenvalues of `Sigma` when forming `Sigma^{-1/2}`.
pub const EIGEN_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Densities

/// A density on a bounded interval, held as a CDF table.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1D {
    table: CdfTable,
    symmetric: bool,
}

impl Density1D {
    /// Tabulates `f` on `TABLE_NODES` nodes of `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidMeasure(format!("invalid support [{lo}, {hi}]")));
        }
        let n = TABLE_NODES;
        let h = (hi - lo) / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| f(lo + h * i as f64)).collect();
        let peak = values.iter().cloned().fold(0.0, f64::max);
        let symmetric = (lo + hi).abs() <= 1e-12 * (hi - lo)
            && (0..n / 2).all(|i| (values[i] - values[n - 1 - i]).abs() <= 1e-12 * peak);
        let table = CdfTable::new(lo, hi, values)?;
        Ok(Self { table, symmetric })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        check_sd(sd)?;
        Self::from_fn(mean - TABLE_SDS * sd, mean + TABLE_SDS * sd, |x| {
            let z = (x - mean) / sd;
            (-0.5 * z * z).exp()
        })
    }

    /// `N(0, sd^2)` reweighted by `tilt`, restricted to where the tilt lives.
    pub fn tilted_normal(sd: f64, tilt: &Tilt) -> Result<Self> {
        check_sd(sd)?;
        let (mut lo, mut hi) = (-TABLE_SDS * sd, TABLE_SDS * sd);
        if let Some((a, b)) = tilt.support() {
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if !(hi > lo) {
            return Err(Error::InvalidMeasure("tilt vanishes on the Gaussian range".into()));
        }
        Self::from_fn(lo, hi, |x| {
            let z = x / sd;
            tilt.eval(x) * (-0.5 * z * z).exp()
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn table(&self) -> &CdfTable {
        &self.table
    }

    /// Inverse-CDF draw, from the nearer tail table.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        let x = if u < 0.5 { self.table.quantile(u) } else { self.table.isf(1.0 - u) };
        x.expect("u lies in [0, 1)")
    }
}

fn check_sd(sd: f64) -> Result<()> {
    if sd > 0.0 && sd.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(format!("standard deviation must be positive, got {sd}")))
    }
}

impl Univariate for Density1D {
    fn pdf(&self, x: f64) -> f64 {
        self.table.density(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.table.cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.table.sf(x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        self.table.quantile(p)
    }
    fn isf(&self, q: f64) -> Result<f64> {
        self.table.isf(q)
    }
    fn support(&self) -> (f64, f64) {
        self.table.support()
    }
}

/// Multiplicative reweighting of a one-dimensional Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tilt {
    /// `exp(-a |x - center|^p)`.
    ExpPower {
        a: f64,
        p: f64,
        #[serde(default)]
        center: f64,
    },
    Field { field: ScalarField },
}

impl Tilt {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Tilt::ExpPower { a, p, center } => (-a * (x - center).abs().powf(*p)).exp(),
            Tilt::Field { field } => field.eval(&[x]).unwrap_or(0.0),
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        match self {
            Tilt::ExpPower { .. } => None,
            Tilt::Field { field } => field.support_box(1).map(|b| b[0]),
        }
    }

    /// Log-concave iff `a >= 0` and `p >= 1` (or `a = 0`).
    pub fn is_logconcave(&self) -> Option<bool> {
        match self {
            Tilt::ExpPower { a, p, .. } => Some(*a == 0.0 || (*a > 0.0 && *p >= 1.0)),
            Tilt::Field { .. } => None,
        }
    }
}

fn unit() -> f64 {
    1.0
}

/// JSON form of a one-dimensional density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityDef {
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "unit")]
        sd: f64,
    },
    Tilted {
        #[serde(default = "unit")]
        sd: f64,
        tilt: Tilt,
    },
    /// Density values on a uniform grid of `[lo, hi]`, linearly interpolated.
    Grid { lo: f64, hi: f64, pdf: Vec<f64> },
}

impl DensityDef {
    pub fn build(&self) -> Result<Density1D> {
        match self {
            DensityDef::Normal { mean, sd } => Density1D::normal(*mean, *sd),
            DensityDef::Tilted { sd, tilt } => Density1D::tilted_normal(*sd, tilt),
            DensityDef::Grid { lo, hi, pdf } => {
                if pdf.len() < 2 {
                    return Err(Error::InvalidMeasure("grid density needs at least two values".into()));
                }
                let h = (hi - lo) / (pdf.len() - 1) as f64;
                Density1D::from_fn(*lo, *hi, |x| {
                    let t = ((x - lo) / h).clamp(0.0, (pdf.len() - 1) as f64);
                    let i = (t.floor() as usize).min(pdf.len() - 2);
                    let s = t - i as f64;
                    pdf[i] + s * (pdf[i + 1] - pdf[i])
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Monotone transport

/// Grid values of `T = F_target^{-1} o F_source`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap1D {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    source: Density1D,
    target: Density1D,
}

/// Monotone rearrangement of `source` onto `target` on `MAP_NODES` points
/// spanning the source quantiles `MAP_TAIL` and `1 - MAP_TAIL`.
pub fn monotone_map(source: &Density1D, target: &Density1D) -> Result<TransportMap1D> {
    let mut lo = source.quantile(MAP_TAIL)?;
    let mut hi = source.isf(MAP_TAIL)?;
    if source.is_symmetric() {
        let r = 0.5 * (hi - lo);
        lo = -r;
        hi = r;
    }
    let n = MAP_NODES;
    let grid: Vec<f64> = (0..n)
        .map(|i| if 2 * i + 1 == n && source.is_symmetric() { 0.0 } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let values = grid
        .iter()
        .map(|&x| map_point(source, target, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportMap1D { grid, values, source: source.clone(), target: target.clone() })
}

fn map_point(source: &Density1D, target: &Density1D, x: f64) -> Result<f64> {
    let p = source.cdf(x);
    if p <= 0.5 {
        target.quantile(p)
    } else {
        target.isf(source.sf(x))
    }
}

impl TransportMap1D {
    pub fn source(&self) -> &Density1D {
        &self.source
    }

    pub fn target(&self) -> &Density1D {
        &self.target
    }

    /// Exact map at any point of the source support.
    pub fn eval(&self, x: f64) -> Result<f64> {
        map_point(&self.source, &self.target, x)
    }

    /// `max_i |F_target(T(x_i)) - F_source(x_i)|`, tails compared on the
    /// survival side.
    pub fn pushforward_error(&self) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &t)| {
                let p = self.source.cdf(x);
                if p <= 0.5 {
                    (self.target.cdf(t) - p).abs()
                } else {
                    (self.target.sf(t) - self.source.sf(x)).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// `(x, T(x))` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub max_increment_ratio: f64,
    /// `max (|T(x)| - |x|)`, reported when the target is symmetric.
    pub max_norm_excess: Option<f64>,
    pub passed: bool,
}

/// Largest difference quotient of `T`, and `|T(x)| <= |x|` for symmetric
/// targets.
pub fn contraction_check(map: &TransportMap1D) -> ContractionReport {
    contraction_check_with(map, MAP_TOL)
}

pub fn contraction_check_with(map: &TransportMap1D, tol: f64) -> ContractionReport {
    let ratio = map
        .grid
        .windows(2)
        .zip(map.values.windows(2))
        .map(|(x, t)| (t[1] - t[0]) / (x[1] - x[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let excess = (map.source.is_symmetric() && map.target.is_symmetric()).then(|| {
        map.rows()
            .map(|(x, t)| t.abs() - x.abs())
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let passed = ratio <= 1.0 + tol && excess.is_none_or(|e| e <= tol);
    ContractionReport { max_increment_ratio: ratio, max_norm_excess: excess, passed }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddnessReport {
    /// `max |T(-x) + T(x)|` over mirrored grid pairs.
    pub max_defect: f64,
    pub t_at_zero: f64,
    pub passed: bool,
}

pub fn oddness_check(map: &TransportMap1D) -> Result<OddnessReport> {
    let n = map.grid.len();
    let mirrored = (0..n / 2).all(|i| (map.grid[i] + map.grid[n - 1 - i]).abs() <= 1e-12 * map.grid[n - 1].abs().max(1.0));
    if !mirrored {
        return Err(Error::InvalidArgument("oddness needs a grid symmetric about 0".into()));
    }
    let max_defect = (0..n)
        .map(|i| (map.values[i] + map.values[n - 1 - i]).abs())
        .fold(0.0, f64::max);
    let t_at_zero = map.eval(0.0)?;
    Ok(OddnessReport { max_defect, t_at_zero, passed: max_defect <= MAP_TOL })
}

/// `int phi(T(x)^2) dsource` and `int phi(x^2) dsource` from one stream;
/// returns the two estimates, their difference and its standard error.
pub fn transfer_check(map: &TransportMap1D, phi: &Profile1D, n: usize, seed: u64) -> Result<(MeasureEstimate, MeasureEstimate, f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidArgument("transfer check needs at least two samples".into()));
    }
    let parts = map_chunks(n, seed, |_, len, rng| -> Result<Moments> {
        let mut m = Moments::new(2);
        for _ in 0..len {
            let x = map.source.sample(rng);
            let t = map.eval(x)?;
            m.push(&[phi.eval(t * t), phi.eval(x * x)]);
        }
        Ok(m)
    });
    let mut m = Moments::new(2);
    for p in parts {
        m.merge(&p?);
    }
    let gap = m.mean(0) - m.mean(1);
    let se = m.linear_se(&[1.0, -1.0]);
    Ok((m.estimate(0), m.estimate(1), gap, se))
}

// ---------------------------------------------------------------------------
// Field checks

fn field_probe_radius(field: &ScalarField, d: usize) -> f64 {
    field.support_radius(d).unwrap_or(4.0 + 2.0 * (d as f64).sqrt())
}

/// Random-pair test of `f(l x + (1 - l) y) >= f(x)^l f(y)^(1 - l)`.
pub fn logconcavity_check(field: &ScalarField, d: usize, n_pairs: usize, seed: u64) -> Result<CheckReport> {
    const NAME: &str = "log-concave";
    field.check_dim(d)?;
    let r = field_probe_radius(field, d);
    let mut rng = substream(seed, 0);
    for _ in 0..n_pairs {
        let x = uniform_in_ball(&mut rng, d, r);
        let y = uniform_in_ball(&mut rng, d, r);
        let lam: f64 = rng.random();
        let (fx, fy) = (field.eval(&x)?, field.eval(&y)?);
        if fx < 0.0 || fy < 0.0 {
            return Ok(CheckReport::fail(NAME, n_pairs, x, "field takes negative values"));
        }
        if fx == 0.0 || fy == 0.0 {
            continue;
        }
        let bound = fx.powf(lam) * fy.powf(1.0 - lam);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let fz = field.eval(&z)?;
        if fz < bound * (1.0 - 1e-9) - 1e-300 {
            return Ok(CheckReport::fail(
                NAME,
                n_pairs,
                z,
                format!("f = {fz:.6e} below the geometric mean {bound:.6e} of the endpoint values"),
            ));
        }
    }
    Ok(CheckReport::pass(NAME, n_pairs))
}

/// Random-point test of `f(-x) = f(x)`.
pub fn field_symmetry_check(field: &ScalarField, d: usize, n: usize, seed: u64) -> Result<CheckReport> {
    const NAME: &str = "symmetric";
    field.check_dim(d)?;
    let r = field_probe_radius(field, d);
    let mut rng = substream(seed, 0);
    for _ in 0..n {
        let x = uniform_in_ball(&mut rng, d, r);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (a, b) = (field.eval(&x)?, field.eval(&neg)?);
        if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
            return Ok(CheckReport::fail(NAME, n, x, format!("f(x) = {a:.6e} but f(-x) = {b:.6e}")));
        }
    }
    Ok(CheckReport::pass(NAME, n))
}

// ---------------------------------------------------------------------------
// Tilted Gaussian

/// `Sigma^{1/2}` and `Sigma^{-1/2}` of a symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtPd {
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
    pub log_det: f64,
}

pub fn sqrt_pd(rows: &[Vec<f64>]) -> Result<SqrtPd> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("Sigma must be a nonempty square matrix".into()));
    }
    let m = DMatrix::from_fn(d, d, |r, c| rows[r][c]);
    if (&m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
        return Err(Error::InvalidArgument("Sigma must be symmetric".into()));
    }
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("Sigma must be positive definite".into()));
    }
    let v = &eig.eigenvectors;
    let diag = |f: &dyn Fn(f64) -> f64| {
        let s = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| f(l.max(EIGEN_FLOOR))));
        v * s * v.transpose()
    };
    Ok(SqrtPd {
        sqrt: diag(&|l| l.sqrt()),
        inv_sqrt: diag(&|l| 1.0 / l.sqrt()),
        log_det: eig.eigenvalues.iter().map(|l| l.max(EIGEN_FLOOR).ln()).sum(),
    })
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..x.len()).map(|c| m[(r, c)] * x[c]).sum();
    }
}

/// `dmu_f = f(Sigma^{-1/2} y) dmu(y) / C_f` with `mu = N(0, Sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedMeasure {
    field: ScalarField,
    root: SqrtPd,
    c_f: MeasureEstimate,
}

impl TiltedMeasure {
    /// `C_f` equals `int f dgamma_d`; it is computed by Gauss-Legendre in
    /// d = 1 and by Monte Carlo with `n` samples otherwise.
    pub fn new(field: ScalarField, sigma: &[Vec<f64>], n: usize, seed: u64) -> Result<Self> {
        let root = sqrt_pd(sigma)?;
        let d = sigma.len();
        field.check_dim(d)?;
        let c_f = if d == 1 {
            let gl = GaussLegendre::new(16);
            let mut s = 0.0;
            let panels = 400;
            let h = 2.0 * TABLE_SDS / panels as f64;
            for k in 0..panels {
                let a = -TABLE_SDS + h * k as f64;
                s += gl.integrate(a, a + h, |z| {
                    field.eval(&[z]).unwrap_or(0.0) * (-0.5 * z * z).exp()
                });
            }
            MeasureEstimate::exact(s / (2.0 * std::f64::consts::PI).sqrt(), Method::NestedQuadrature)
        } else {
            let mu: Measure = RadialDensity::gaussian(d)?.into();
            mc_integral(&mu, &field, n, seed)?
        };
        if !(c_f.value > 0.0) || !c_f.value.is_finite() {
            return Err(Error::InvalidMeasure("tilt has zero or infinite Gaussian mass".into()));
        }
        Ok(Self { field, root, c_f })
    }

    pub fn dim(&self) -> usize {
        self.root.sqrt.nrows()
    }

    pub fn normalizer(&self) -> MeasureEstimate {
        self.c_f
    }

    pub fn sqrt_sigma(&self) -> &DMatrix<f64> {
        &self.root.sqrt
    }

    /// `N(0, Sigma)` density, with normalization `(2 pi)^{d/2} sqrt(det Sigma)`.
    pub fn base_pdf(&self, y: &[f64]) -> f64 {
        let d = self.dim();
        let mut z = vec![0.0; d];
        mat_vec(&self.root.inv_sqrt, y, &mut z);
        let q: f64 = z.iter().map(|v| v * v).sum();
        let log_norm = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() + 0.5 * self.root.log_det;
        (-0.5 * q - log_norm).exp()
    }

    pub fn pdf(&self, y: &[f64]) -> Result<f64> {
        let d = self.dim();
        let mut z = vec![0.0; d];
        mat_vec(&self.root.inv_sqrt, y, &mut z);
        Ok(self.field.eval(&z)? * self.base_pdf(y) / self.c_f.value)
    }
}

fn sigma_hypothesis(sigma: &[Vec<f64>]) -> (CheckReport, Option<SqrtPd>) {
    match sqrt_pd(sigma) {
        Ok(r) => (CheckReport::pass("sigma-positive-definite", 0), Some(r)),
        Err(e) => (CheckReport::rejected("sigma-positive-definite", e.to_string()), None),
    }
}

/// `int f phi(<Sigma x, x>) dgamma_d >= int f dgamma_d * int phi(<Sigma x, x>) dgamma_d`
/// for symmetric log-concave `f` and nonincreasing `phi`.
pub fn verify_theorem_4_1(
    field: &ScalarField,
    sigma: &[Vec<f64>],
    phi: &Profile1D,
    budget: &Budget,
    seed: u64,
) -> Result<VerificationReport> {
    let d = sigma.len();
    field.check_dim(d)?;
    let (sig, root) = sigma_hypothesis(sigma);
    let pairs = 10 * budget.check_samples;
    let hyps = vec![
        sig,
        logconcavity_check(field, d, pairs, mix_seed(seed, 0x10C))?,
        field_symmetry_check(field, d, budget.check_samples, mix_seed(seed, 0x5E))?,
        if phi.is_nonincreasing() {
            CheckReport::pass("phi-nonincreasing", 0)
        } else {
            CheckReport::rejected("phi-nonincreasing", "phi increases somewhere on its domain")
        },
    ];
    let prov = Provenance::new(seed, budget.samples, &["mc"]);
    let Some(root) = root.filter(|_| hyps.iter().all(|h| h.passed)) else {
        return Ok(VerificationReport::inapplicable(Theorem::QuadraticForm, hyps, prov));
    };
    let m = quadratic_form_moments(field, &root, phi, d, budget.samples, seed)?;
    let (gap, se) = m.product_gap();
    let (m0, m1, m2) = (m.mean(0), m.mean(1), m.mean(2));
    let mut report = VerificationReport {
        theorem: Theorem::QuadraticForm,
        hypotheses: hyps,
        lhs: Some(m.estimate(0)),
        rhs_factors: Some((m.estimate(1), m.estimate(2))),
        gap,
        se,
        verdict: Verdict::from_gap(gap, se),
        approximation: Vec::new(),
        cross_checks: Default::default(),
        provenance: prov,
    };
    if m1 > 0.0 {
        let reduced = m0 / m1 - m2;
        let reduced_se = m.linear_se(&[1.0 / m1, -m0 / (m1 * m1), -1.0]);
        let cc = &mut report.cross_checks;
        cc.insert("reduced_lhs".into(), m0 / m1);
        cc.insert("reduced_rhs".into(), m2);
        cc.insert("reduced_gap".into(), reduced);
        cc.insert("reduced_gap_se".into(), reduced_se);
        cc.insert("normalizer_c_f".into(), m1);
    }
    Ok(report)
}

/// Moments of `(f phi(q), f, phi(q))` with `q = |Sigma^{1/2} x|^2`, `x ~ gamma_d`.
pub(crate) fn quadratic_form_moments(
    field: &ScalarField,
    root: &SqrtPd,
    phi: &Profile1D,
    d: usize,
    n: usize,
    seed: u64,
) -> Result<Moments> {
    let mu: Measure = RadialDensity::gaussian(d)?.into();
    mc_moments(&mu, n, seed, 3, |x, v| {
        let mut y = vec![0.0; d];
        mat_vec(&root.sqrt, x, &mut y);
        let q: f64 = y.iter().map(|t| t * t).sum();
        let f = field.eval(x)?;
        let p = phi.eval(q);
        v[0] = f * p;
        v[1] = f;
        v[2] = p;
        Ok(())
    })
}

/// The piecewise-linear approximation of `1_[0, 1]`.
pub fn phi_n_eval(t: f64, n: u32) -> f64 {
    phi_n(t, n)
}

/// `gamma_d(A cap B) >= gamma_d(A) gamma_d(B)` for symmetric convex `A` and
/// `B = {<Sigma x, x> <= 1}`, with the `(f_m, phi_n)` approximation ladder.
pub fn verify_corollary(a: &ConvexBody, sigma: &[Vec<f64>], budget: &Budget, seed: u64) -> Result<VerificationReport> {
    let d = sigma.len();
    a.check_dim(d)?;
    let (sig, root) = sigma_hypothesis(sigma);
    let mut hyps = vec![
        sig,
        if matches!(a, ConvexBody::GeneralizedBall { .. }) {
            CheckReport::rejected("convex", "generalized balls need not be convex")
        } else {
            CheckReport::pass("convex", 0)
        },
    ];
    if hyps.iter().all(|h| h.passed) {
        hyps.push(is_symmetric(a, d, budget.check_samples, mix_seed(seed, 0x5E))?);
    }
    let mut prov = Provenance::new(seed, budget.samples, &["mc"]);
    let Some(root) = root.filter(|_| hyps.iter().all(|h| h.passed)) else {
        return Ok(VerificationReport::inapplicable(Theorem::SymmetricEllipsoid, hyps, prov));
    };
    let mu: Measure = RadialDensity::gaussian(d)?.into();
    let r = COROLLARY_LADDER.len();
    let reach = 1.0 / COROLLARY_LADDER[0] as f64;
    let m = mc_moments(&mu, budget.samples, seed, 3 + 3 * r, |x, v| {
        let mut y = vec![0.0; d];
        mat_vec(&root.sqrt, x, &mut y);
        let q: f64 = y.iter().map(|t| t * t).sum();
        let ib = if q <= 1.0 { 1.0 } else { 0.0 };
        let lb = a.distance_lower_bound(x);
        let (ia, dist) = if lb >= reach {
            (0.0, lb)
        } else if a.contains(x)? {
            (1.0, 0.0)
        } else {
            (0.0, a.distance(x)?)
        };
        v[0] = ia * ib;
        v[1] = ia;
        v[2] = ib;
        for (k, &n) in COROLLARY_LADDER.iter().enumerate() {
            let f = (1.0 - n as f64 * dist).max(0.0);
            let p = phi_n(q, n);
            v[3 + 3 * k] = f * p;
            v[4 + 3 * k] = f;
            v[5 + 3 * k] = p;
        }
        Ok(())
    })?;
    let k = 3 + 3 * r;
    let steps: Vec<ApproximationStep> = COROLLARY_LADDER
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let (i0, i1, i2) = (3 + 3 * j, 4 + 3 * j, 5 + 3 * j);
            let (mf, mp) = (m.mean(i1), m.mean(i2));
            let mut grad = vec![0.0; k];
            grad[i0] = 1.0;
            grad[i1] = -mp;
            grad[i2] = -mf;
            let gap = m.mean(i0) - mf * mp;
            let se = m.linear_se(&grad);
            ApproximationStep {
                index: n,
                lhs: m.mean(i0),
                rhs: mf * mp,
                gap,
                se,
                excess: (mf - m.mean(1)) + (mp - m.mean(2)),
                verdict: Verdict::from_gap(gap, se),
            }
        })
        .collect();
    let monotone = steps.windows(2).all(|w| w[1].excess <= w[0].excess);
    let (gap, se) = {
        let (m0, m1, m2) = (m.mean(0), m.mean(1), m.mean(2));
        let mut grad = vec![0.0; k];
        grad[0] = 1.0;
        grad[1] = -m2;
        grad[2] = -m1;
        (m0 - m1 * m2, m.linear_se(&grad))
    };
    prov.methods.push("approximation-ladder".into());
    let mut report = VerificationReport {
        theorem: Theorem::SymmetricEllipsoid,
        hypotheses: hyps,
        lhs: Some(m.estimate(0)),
        rhs_factors: Some((m.estimate(1), m.estimate(2))),
        gap,
        se,
        verdict: Verdict::from_gap(gap, se),
        approximation: steps,
        cross_checks: Default::default(),
        provenance: prov,
    };
    report.cross_checks.insert("ladder_monotone".into(), if monotone { 1.0 } else { 0.0 });
    Ok(report)
}
