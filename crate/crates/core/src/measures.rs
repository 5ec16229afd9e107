//! Rotationally invariant densities `rho(|x|) dx`, product densities
//! `prod rho_i(|x_i|) dx_i`, their samplers and 1D CDF/quantile tables.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quadrature::simpson;
use crate::rng::StreamRng;

/// Tail mass allowed beyond the truncation radius.
pub const TAIL_EPS: f64 = 1e-10;

/// Nodes of every 1D tabulation (2^16 + 1).
pub const TABLE_NODES: usize = 65_537;

/// Surface area of the unit sphere `S^{d-1}`: `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    RadialQuadrature,
    NestedQuadrature,
    GridOracle,
}

/// A measure (or integral) estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub method: Method,
}

impl MeasureEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self { value, std_error: 0.0, n_samples: 0, method }
    }

    /// Whether `value` lies within `k` standard errors (plus `slack`) of `target`.
    pub fn agrees_with(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }

    pub fn is_probability(&self) -> bool {
        (0.0..=1.0).contains(&self.value)
    }
}

// ---------------------------------------------------------------------------
// CDF tables

/// CDF of a density tabulated on a uniform grid, treating the density as
/// piecewise linear. The CDF is then piecewise quadratic and is inverted
/// exactly cell by cell. Lower and upper tails are accumulated separately so
/// small tail probabilities keep relative precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    lo: f64,
    h: f64,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    sf: Vec<f64>,
}

impl CdfTable {
    /// `values[i]` is the (unnormalized, nonnegative) density at `lo + i h`.
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidMeasure("CDF table needs two nodes and a nonempty interval".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidMeasure("density values must be finite and nonnegative".into()));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
        }
        let mut sf = vec![0.0; n];
        for i in (0..n - 1).rev() {
            sf[i] = sf[i + 1] + 0.5 * h * (values[i] + values[i + 1]);
        }
        let total = cdf[n - 1];
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("density has zero mass".into()));
        }
        let pdf = values.iter().map(|v| v / total).collect();
        cdf.iter_mut().for_each(|c| *c /= total);
        sf.iter_mut().for_each(|c| *c /= total);
        cdf[n - 1] = 1.0;
        sf[0] = 1.0;
        Ok(Self { lo, h, pdf, cdf, sf })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.lo + self.h * (self.pdf.len() - 1) as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.pdf.len()).map(move |i| self.lo + self.h * i as f64)
    }

    /// Cell index and fraction for `x` inside the support.
    fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.lo) / self.h;
        let last = self.pdf.len() - 2;
        let i = (t.floor() as usize).min(last);
        (i, (t - i as f64).clamp(0.0, 1.0))
    }

    /// Piecewise-linear normalized density.
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let (i, s) = self.locate(x);
        self.pdf[i] + s * (self.pdf[i + 1] - self.pdf[i])
    }

    fn partial(&self, i: usize, s: f64) -> f64 {
        self.h * s * (self.pdf[i] + 0.5 * s * (self.pdf[i + 1] - self.pdf[i]))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let (i, s) = self.locate(x);
        (self.cdf[i] + self.partial(i, s)).min(1.0)
    }

    /// Upper tail `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        let (i, s) = self.locate(x);
        (self.sf[i + 1] + (self.partial(i, 1.0) - self.partial(i, s))).clamp(0.0, 1.0)
    }

    /// Solves `partial(i, s) = c` for `s` in [0, 1].
    fn invert_cell(&self, i: usize, c: f64) -> f64 {
        let g = self.pdf[i];
        let a = self.pdf[i + 1] - g;
        let c = c / self.h;
        if c <= 0.0 {
            return 0.0;
        }
        let disc = (g * g + 2.0 * a * c).max(0.0);
        let denom = g + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * c / denom } else { 0.5 };
        s.clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let n = self.pdf.len();
        let i = self.cdf.partition_point(|&c| c < p).clamp(1, n - 1) - 1;
        let s = self.invert_cell(i, p - self.cdf[i]);
        Ok(self.lo + self.h * (i as f64 + s))
    }

    /// Inverse of the upper tail: `x` with `P(X > x) = q`.
    pub fn isf(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("probability {q} outside [0, 1]")));
        }
        let n = self.pdf.len();
        // sf is nonincreasing; find the last node with sf >= q.
        let j = self.sf.partition_point(|&v| v >= q).clamp(1, n - 1);
        let i = j - 1;
        // Mass of cell i to the left of x equals cell mass - (q - sf[i+1]).
        let cell = self.partial(i, 1.0);
        let s = self.invert_cell(i, cell - (q - self.sf[i + 1]));
        Ok(self.lo + self.h * (i as f64 + s))
    }
}

/// Common interface of one-dimensional distributions.
pub trait Univariate {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn sf(&self, x: f64) -> f64;
    fn quantile(&self, p: f64) -> Result<f64>;
    fn isf(&self, q: f64) -> Result<f64>;
    fn support(&self) -> (f64, f64);
}

pub fn cdf_1d<D: Univariate + ?Sized>(density: &D, x: f64) -> f64 {
    density.cdf(x)
}

pub fn quantile_1d<D: Univariate + ?Sized>(density: &D, p: f64) -> Result<f64> {
    density.quantile(p)
}

// ---------------------------------------------------------------------------
// Radial densities

#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `exp(-r^2 / (2 sd^2))`.
    Gaussian { sd: f64 },
    /// `exp(-(r / scale)^power)`.
    ExponentialPower { scale: f64, power: f64 },
    /// User grid over `[0, t_max]`, monotone-cubic between nodes; zero beyond.
    Grid(Pchip),
}

impl RadialProfile {
    fn raw(&self, r: f64) -> f64 {
        match self {
            Self::Gaussian { sd } => (-(r * r) / (2.0 * sd * sd)).exp(),
            Self::ExponentialPower { scale, power } => (-(r / scale).powf(*power)).exp(),
            Self::Grid(p) => {
                if r > p.domain().1 {
                    0.0
                } else {
                    p.eval(r)
                }
            }
        }
    }

    fn tail(&self, d: usize, r: f64) -> f64 {
        let h = d as f64;
        match self {
            Self::Gaussian { sd } => gamma_ur(h / 2.0, r * r / (2.0 * sd * sd)),
            Self::ExponentialPower { scale, power } => gamma_ur(h / power, (r / scale).powf(*power)),
            Self::Grid(_) => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Gaussian { sd } => *sd > 0.0 && sd.is_finite(),
            Self::ExponentialPower { scale, power } => {
                *scale > 0.0 && *power > 0.0 && scale.is_finite() && power.is_finite()
            }
            Self::Grid(p) => {
                if p.nodes()[0] != 0.0 {
                    return Err(Error::InvalidMeasure("radial grid must start at t = 0".into()));
                }
                p.values().iter().all(|v| *v > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMeasure("profile must be strictly positive with positive parameters".into()))
        }
    }
}

/// Probability measure `rho(|x|) dx` on R^d, truncated at `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    dim: usize,
    profile: RadialProfile,
    norm_const: f64,
    r_max: f64,
    radius: CdfTable,
}

impl RadialDensity {
    pub fn new(dim: usize, profile: RadialProfile) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be at least 1".into()));
        }
        profile.validate()?;
        let area = sphere_area(dim);
        let r_max = match &profile {
            RadialProfile::Grid(p) => p.domain().1,
            _ => tail_radius(&profile, dim),
        };
        let h = r_max / (TABLE_NODES - 1) as f64;
        let rpow = |r: f64| if dim == 1 { 1.0 } else { r.powi(dim as i32 - 1) };
        let raw: Vec<f64> = (0..TABLE_NODES)
            .map(|i| {
                let r = h * i as f64;
                area * profile.raw(r) * rpow(r)
            })
            .collect();
        let norm_const = match &profile {
            RadialProfile::Gaussian { sd } => (2.0 * PI * sd * sd).powf(-(dim as f64) / 2.0),
            RadialProfile::ExponentialPower { scale, power } => {
                let h = dim as f64;
                power / (area * scale.powf(h) * gamma(h / power))
            }
            RadialProfile::Grid(_) => 1.0 / simpson(&raw, h),
        };
        let radius = CdfTable::new(0.0, r_max, raw)?;
        Ok(Self { dim, profile, norm_const, r_max, radius })
    }

    /// Standard Gaussian measure on R^d.
    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(dim, RadialProfile::Gaussian { sd: 1.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Normalized profile `rho(r)`.
    pub fn rho(&self, r: f64) -> f64 {
        self.norm_const * self.profile.raw(r)
    }

    /// Joint density at `x`.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.r_max {
            return 0.0;
        }
        self.rho(r)
    }

    /// Mass outside the truncation radius of the untruncated measure.
    pub fn tail_mass(&self) -> f64 {
        self.profile.tail(self.dim, self.r_max)
    }

    /// `sigma(S^{d-1}) * int_0^{r_max} rho(r) r^{d-1} dr` by Simpson.
    pub fn total_mass(&self) -> f64 {
        let h = self.r_max / (TABLE_NODES - 1) as f64;
        let area = sphere_area(self.dim);
        let v: Vec<f64> = (0..TABLE_NODES)
            .map(|i| {
                let r = h * i as f64;
                area * self.rho(r) * r.powi(self.dim as i32 - 1)
            })
            .collect();
        simpson(&v, h)
    }

    /// `mu(B_t)` by radial quadrature.
    pub fn ball_mass(&self, t: f64) -> f64 {
        self.radius.cdf(t)
    }

    /// Distribution of `|X|`.
    pub fn radius_table(&self) -> &CdfTable {
        &self.radius
    }

    pub fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            n2 += *v * *v;
        }
        if n2 == 0.0 {
            out[0] = 1.0;
            n2 = 1.0;
        }
        let r = self
            .radius
            .quantile(rng.random::<f64>())
            .expect("uniform draw lies in [0, 1)");
        let scale = r / n2.sqrt();
        out.iter_mut().for_each(|v| *v *= scale);
    }

    /// The same measure as a product of 1D marginals, when it is one
    /// (only Gaussian profiles are both radial and product).
    pub fn as_product(&self) -> Option<ProductDensity> {
        match self.profile {
            RadialProfile::Gaussian { sd } => {
                let m = RadialDensity::new(1, RadialProfile::Gaussian { sd }).ok()?;
                Some(ProductDensity { marginals: vec![m; self.dim] })
            }
            _ => None,
        }
    }
}

/// Symmetric 1D marginals are one-dimensional radial densities.
impl Univariate for RadialDensity {
    fn pdf(&self, x: f64) -> f64 {
        if x.abs() > self.r_max {
            0.0
        } else {
            self.rho(x.abs())
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            0.5 + 0.5 * self.radius.cdf(x)
        } else {
            0.5 * self.radius.sf(-x)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        self.cdf(-x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        if p < 0.5 {
            Ok(-self.radius.isf(2.0 * p)?)
        } else {
            self.radius.isf(2.0 * (1.0 - p))
        }
    }

    fn isf(&self, q: f64) -> Result<f64> {
        Ok(-self.quantile(q)?)
    }

    fn support(&self) -> (f64, f64) {
        (-self.r_max, self.r_max)
    }
}

fn tail_radius(profile: &RadialProfile, d: usize) -> f64 {
    let mut hi = match profile {
        RadialProfile::Gaussian { sd } => *sd,
        RadialProfile::ExponentialPower { scale, .. } => *scale,
        RadialProfile::Grid(p) => return p.domain().1,
    };
    while profile.tail(d, hi) > TAIL_EPS {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if profile.tail(d, mid) > TAIL_EPS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

// ---------------------------------------------------------------------------
// Product densities

/// `prod_i rho_i(|x_i|) dx_i` with each marginal a 1D radial density.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDensity {
    marginals: Vec<RadialDensity>,
}

impl ProductDensity {
    pub fn new(marginals: Vec<RadialDensity>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidMeasure("product measure needs at least one marginal".into()));
        }
        if marginals.iter().any(|m| m.dim() != 1) {
            return Err(Error::InvalidMeasure("product marginals must be one-dimensional".into()));
        }
        Ok(Self { marginals })
    }

    pub fn gaussian(d: usize) -> Result<Self> {
        RadialDensity::gaussian(d)?
            .as_product()
            .ok_or_else(|| Error::InvalidMeasure("gaussian product".into()))
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[RadialDensity] {
        &self.marginals
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.marginals.iter().zip(x).map(|(m, v)| Univariate::pdf(m, *v)).product()
    }

    pub fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        for (m, v) in self.marginals.iter().zip(out.iter_mut()) {
            *v = m.quantile(rng.random::<f64>()).expect("uniform draw lies in [0, 1)");
        }
    }
}

// ---------------------------------------------------------------------------
// Either kind

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDef", into = "MeasureDef")]
pub enum Measure {
    Radial(RadialDensity),
    Product(ProductDensity),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Radial(m) => m.dim(),
            Measure::Product(m) => m.dim(),
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        match self {
            Measure::Radial(m) => m.pdf(x),
            Measure::Product(m) => m.pdf(x),
        }
    }

    pub fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        match self {
            Measure::Radial(m) => m.sample_into(rng, out),
            Measure::Product(m) => m.sample_into(rng, out),
        }
    }

    /// Half-widths of the truncation box.
    pub fn truncation_box(&self) -> Vec<f64> {
        match self {
            Measure::Radial(m) => vec![m.r_max(); m.dim()],
            Measure::Product(m) => m.marginals().iter().map(|g| g.r_max()).collect(),
        }
    }

    pub fn as_radial(&self) -> Option<&RadialDensity> {
        match self {
            Measure::Radial(m) => Some(m),
            Measure::Product(_) => None,
        }
    }

    pub fn as_product(&self) -> Option<ProductDensity> {
        match self {
            Measure::Radial(m) => m.as_product(),
            Measure::Product(m) => Some(m.clone()),
        }
    }

    /// Radial median-ish scale, used to size random instances.
    pub fn typical_radius(&self) -> f64 {
        match self {
            Measure::Radial(m) => m.radius_table().quantile(0.5).unwrap_or(1.0),
            Measure::Product(m) => m
                .marginals()
                .iter()
                .map(|g| g.radius_table().quantile(0.5).unwrap_or(1.0).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

impl From<RadialDensity> for Measure {
    fn from(m: RadialDensity) -> Self {
        Measure::Radial(m)
    }
}

impl From<ProductDensity> for Measure {
    fn from(m: ProductDensity) -> Self {
        Measure::Product(m)
    }
}

// ---------------------------------------------------------------------------
// JSON exchange format

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalDef {
    Gaussian {
        #[serde(default = "one")]
        sd: f64,
    },
    ExponentialPower {
        scale: f64,
        power: f64,
    },
    Grid {
        t: Vec<f64>,
        rho: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDef {
    Gaussian {
        d: usize,
        #[serde(default = "one")]
        sd: f64,
    },
    ExponentialPower {
        d: usize,
        scale: f64,
        power: f64,
    },
    RadialGrid {
        d: usize,
        t: Vec<f64>,
        rho: Vec<f64>,
    },
    Product {
        marginals: Vec<MarginalDef>,
    },
}

fn profile_from(def: MarginalDef) -> Result<RadialProfile> {
    Ok(match def {
        MarginalDef::Gaussian { sd } => RadialProfile::Gaussian { sd },
        MarginalDef::ExponentialPower { scale, power } => RadialProfile::ExponentialPower { scale, power },
        MarginalDef::Grid { t, rho } => {
            RadialProfile::Grid(Pchip::new(t, rho).map_err(|e| Error::InvalidMeasure(e.to_string()))?)
        }
    })
}

fn profile_def(p: &RadialProfile) -> MarginalDef {
    match p {
        RadialProfile::Gaussian { sd } => MarginalDef::Gaussian { sd: *sd },
        RadialProfile::ExponentialPower { scale, power } => MarginalDef::ExponentialPower {
            scale: *scale,
            power: *power,
        },
        RadialProfile::Grid(g) => MarginalDef::Grid {
            t: g.nodes().to_vec(),
            rho: g.values().to_vec(),
        },
    }
}

impl TryFrom<MeasureDef> for Measure {
    type Error = Error;

    fn try_from(def: MeasureDef) -> Result<Self> {
        Ok(match def {
            MeasureDef::Gaussian { d, sd } => RadialDensity::new(d, RadialProfile::Gaussian { sd })?.into(),
            MeasureDef::ExponentialPower { d, scale, power } => {
                RadialDensity::new(d, RadialProfile::ExponentialPower { scale, power })?.into()
            }
            MeasureDef::RadialGrid { d, t, rho } => {
                RadialDensity::new(d, profile_from(MarginalDef::Grid { t, rho })?)?.into()
            }
            MeasureDef::Product { marginals } => ProductDensity::new(
                marginals
                    .into_iter()
                    .map(|m| RadialDensity::new(1, profile_from(m)?))
                    .collect::<Result<Vec<_>>>()?,
            )?
            .into(),
        })
    }
}

impl From<Measure> for MeasureDef {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Radial(r) => match profile_def(&r.profile) {
                MarginalDef::Gaussian { sd } => MeasureDef::Gaussian { d: r.dim, sd },
                MarginalDef::ExponentialPower { scale, power } => MeasureDef::ExponentialPower {
                    d: r.dim,
                    scale,
                    power,
                },
                MarginalDef::Grid { t, rho } => MeasureDef::RadialGrid { d: r.dim, t, rho },
            },
            Measure::Product(p) => MeasureDef::Product {
                marginals: p.marginals.iter().map(|m| profile_def(&m.profile)).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use libm::erf;

    fn std_normal_cdf(x: f64) -> f64 {
        0.5 * (1.0 + erf(x / 2f64.sqrt()))
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_density_and_mass() {
        let g1 = RadialDensity::gaussian(1).unwrap();
        assert!((g1.rho(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        for d in [1, 2, 3, 5, 10] {
            let g = RadialDensity::gaussian(d).unwrap();
            assert!((g.total_mass() - 1.0).abs() < 1e-8, "d={d}");
            assert!(g.tail_mass() <= TAIL_EPS * 1.0001);
            assert!(g.r_max() < 12.0);
        }
        let g2 = RadialDensity::gaussian(2).unwrap();
        assert!((g2.ball_mass(1.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn exponential_power_normalizes() {
        let m = RadialDensity::new(3, RadialProfile::ExponentialPower { scale: 1.5, power: 1.3 }).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_profile_normalizes() {
        let t: Vec<f64> = (0..=200).map(|i| i as f64 * 0.04).collect();
        let rho: Vec<f64> = t.iter().map(|r| (1.0 + (3.0 * r).sin().powi(2)) * (-r * r).exp() + 1e-6).collect();
        let m = RadialDensity::new(2, RadialProfile::Grid(Pchip::new(t, rho).unwrap())).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-8);
        assert_eq!(m.r_max(), 8.0);
    }

    #[test]
    fn rejects_nonpositive_profiles() {
        let p = Pchip::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(RadialDensity::new(1, RadialProfile::Grid(p)).is_err());
        let p = Pchip::new(vec![0.5, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(RadialDensity::new(1, RadialProfile::Grid(p)).is_err());
        assert!(RadialDensity::new(0, RadialProfile::Gaussian { sd: 1.0 }).is_err());
    }

    #[test]
    fn cdf_and_quantile_examples() {
        let g = RadialDensity::gaussian(1).unwrap();
        assert_eq!(cdf_1d(&g, 0.0), 0.5);
        assert!((cdf_1d(&g, 1.0) - 0.841_344_746_068_543).abs() < 1e-6);
        assert!((quantile_1d(&g, 0.841345).unwrap() - 1.0).abs() < 1e-4);
        assert!(quantile_1d(&g, 1.5).is_err());
        assert!(quantile_1d(&g, -0.1).is_err());
    }

    #[test]
    fn cdf_matches_erf_across_range() {
        let g = RadialDensity::gaussian(1).unwrap();
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            assert!((g.cdf(x) - std_normal_cdf(x)).abs() < 1e-8, "x={x}");
        }
        // Deep tail keeps relative precision, relative to the truncated measure.
        let tail = 0.5 * libm::erfc(5.0 / 2f64.sqrt());
        let truncated = (tail - 0.5 * g.tail_mass()) / (1.0 - g.tail_mass());
        assert!((g.sf(5.0) / truncated - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quantile_inverts_cdf_on_interior() {
        let g = RadialDensity::gaussian(1).unwrap();
        for i in -50..=50 {
            let x = i as f64 * 0.11;
            let back = g.quantile(g.cdf(x)).unwrap();
            assert!((back - x).abs() < 1e-6, "x={x} back={back}");
        }
    }

    #[test]
    fn isf_inverts_sf() {
        let t = CdfTable::new(-1.0, 2.0, (0..101).map(|i| 1.0 + (i as f64 * 0.1).sin().abs()).collect()).unwrap();
        for q in [1e-9, 1e-4, 0.2, 0.5, 0.9, 1.0 - 1e-9] {
            let x = t.isf(q).unwrap();
            assert!((t.sf(x) - q).abs() < 1e-12, "q={q}");
            let y = t.quantile(q).unwrap();
            assert!((t.cdf(y) - q).abs() < 1e-12, "q={q}");
        }
    }

    #[test]
    fn sampler_mean_square_norm() {
        let g = RadialDensity::gaussian(2).unwrap();
        let mut rng = substream(11, 0);
        let n = 200_000;
        let mut buf = [0.0; 2];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            g.sample_into(&mut rng, &mut buf);
            let r2 = buf[0] * buf[0] + buf[1] * buf[1];
            s += r2;
            s2 += r2 * r2;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn json_defs() {
        let m: Measure = serde_json::from_str(r#"{"type":"gaussian","d":2}"#).unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.as_radial().is_some());
        let p: Measure = serde_json::from_str(
            r#"{"type":"product","marginals":[{"type":"gaussian"},{"type":"grid","t":[0,1,2,3],"rho":[1,0.6,0.2,0.05]}]}"#,
        )
        .unwrap();
        assert_eq!(p.dim(), 2);
        let back: Measure = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Measure>(r#"{"type":"gaussian","d":0}"#).is_err());
    }
}
