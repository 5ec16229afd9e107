//! Nonnegative scalar fields on R^d and nonincreasing 1D profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BodyDef, ConvexBody, QuadraticEllipsoid};
use crate::interp::Pchip;

/// `f_n(x) = 1 - n min(1/n, dist(x, A))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FnApproximant {
    body: ConvexBody,
    n: u32,
}

impl FnApproximant {
    pub fn new(body: ConvexBody, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("approximant index must be positive".into()));
        }
        if matches!(body, ConvexBody::GeneralizedBall { .. }) {
            return Err(Error::Unsupported("distance"));
        }
        Ok(Self { body, n })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let n = self.n as f64;
        if self.body.distance_lower_bound(x) * n >= 1.0 {
            return Ok(0.0);
        }
        if self.body.contains(x)? {
            return Ok(1.0);
        }
        let dist = self.body.distance(x)?;
        Ok(1.0 - n * dist.min(1.0 / n))
    }
}

/// Functions `phi : [0, inf) -> [0, inf)` composed with quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile1D {
    /// `exp(-rate t)`.
    Exp { rate: f64 },
    /// `1` on `[0, 1]`, `1 - n (t - 1)` on `(1, 1 + 1/n)`, `0` after.
    Ramp { n: u32 },
    Constant { value: f64 },
    /// `intercept + slope t`.
    Linear { slope: f64, intercept: f64 },
    /// Monotone-cubic interpolant, held constant outside its nodes.
    Grid(Pchip),
}

/// The ramp `phi_n`.
pub fn phi_n(t: f64, n: u32) -> f64 {
    let n = n as f64;
    if t <= 1.0 {
        1.0
    } else if t < 1.0 + 1.0 / n {
        1.0 - n * (t - 1.0)
    } else {
        0.0
    }
}

impl Profile1D {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Exp { rate } => (-rate * t).exp(),
            Self::Ramp { n } => phi_n(t, *n),
            Self::Constant { value } => *value,
            Self::Linear { slope, intercept } => intercept + slope * t,
            Self::Grid(p) => p.eval(t),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Self::Exp { rate } => *rate >= 0.0,
            Self::Ramp { .. } | Self::Constant { .. } => true,
            Self::Linear { slope, .. } => *slope <= 0.0,
            Self::Grid(p) => p.is_nonincreasing(),
        }
    }
}

/// `x -> phi(<S x, x>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedQuadratic {
    pub form: QuadraticEllipsoid,
    pub phi: Profile1D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldDef", into = "FieldDef")]
pub enum ScalarField {
    Constant(f64),
    Indicator(ConvexBody),
    Approximant(FnApproximant),
    /// `scale * exp(-a |x - center|^2)`; `a < 0` gives a log-convex tilt.
    Gaussian { center: Option<Vec<f64>>, a: f64, scale: f64 },
    Max(Vec<ScalarField>),
    Sum(Vec<ScalarField>),
    Product(Vec<ScalarField>),
    Quadratic(ComposedQuadratic),
}

impl ScalarField {
    pub fn indicator(body: ConvexBody) -> Self {
        Self::Indicator(body)
    }

    pub fn approximant(body: ConvexBody, n: u32) -> Result<Self> {
        Ok(Self::Approximant(FnApproximant::new(body, n)?))
    }

    /// `exp(-a |x|^2)`.
    pub fn gaussian(a: f64) -> Self {
        Self::Gaussian { center: None, a, scale: 1.0 }
    }

    pub fn gaussian_at(center: Vec<f64>, a: f64) -> Self {
        Self::Gaussian { center: Some(center), a, scale: 1.0 }
    }

    pub fn quadratic(rows: Vec<Vec<f64>>, phi: Profile1D) -> Result<Self> {
        Ok(Self::Quadratic(ComposedQuadratic {
            form: QuadraticEllipsoid::new(rows)?,
            phi,
        }))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Indicator(_) => "indicator-of-body",
            Self::Approximant(_) => "fn-approximant",
            Self::Gaussian { .. } => "log-concave-closed-form",
            Self::Max(_) | Self::Sum(_) | Self::Product(_) => "composite",
            Self::Quadratic(_) => "composed-quadratic",
        }
    }

    /// Fixed dimension, when the field has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Constant(_) => None,
            Self::Indicator(b) => b.dim(),
            Self::Approximant(f) => f.body().dim(),
            Self::Gaussian { center, .. } => center.as_ref().map(|c| c.len()),
            Self::Max(fs) | Self::Sum(fs) | Self::Product(fs) => fs.iter().find_map(|f| f.dim()),
            Self::Quadratic(q) => Some(q.form.dim()),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(e) if e != d => Err(Error::DimensionMismatch { expected: e, got: d }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Self::Constant(c) => *c,
            Self::Indicator(b) => {
                if b.contains(x)? {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Approximant(f) => f.eval(x)?,
            Self::Gaussian { center, a, scale } => {
                let r2: f64 = match center {
                    Some(c) => {
                        if c.len() != x.len() {
                            return Err(Error::DimensionMismatch { expected: c.len(), got: x.len() });
                        }
                        c.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum()
                    }
                    None => x.iter().map(|v| v * v).sum(),
                };
                scale * (-a * r2).exp()
            }
            Self::Max(fs) => {
                let mut m = f64::NEG_INFINITY;
                for f in fs {
                    m = m.max(f.eval(x)?);
                }
                m
            }
            Self::Sum(fs) => {
                let mut s = 0.0;
                for f in fs {
                    s += f.eval(x)?;
                }
                s
            }
            Self::Product(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= f.eval(x)?;
                }
                p
            }
            Self::Quadratic(q) => {
                if q.form.dim() != x.len() {
                    return Err(Error::DimensionMismatch { expected: q.form.dim(), got: x.len() });
                }
                q.phi.eval(q.form.quadratic_form(x))
            }
        })
    }

    /// Box outside of which the field vanishes, if it has compact support.
    pub fn support_box(&self, d: usize) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Indicator(b) => b.coordinate_bounds(d).ok(),
            Self::Approximant(f) => {
                let pad = 1.0 / f.n() as f64;
                f.body()
                    .coordinate_bounds(d)
                    .ok()
                    .map(|bx| bx.into_iter().map(|(lo, hi)| (lo - pad, hi + pad)).collect())
            }
            Self::Max(fs) | Self::Sum(fs) => {
                let boxes: Option<Vec<_>> = fs.iter().map(|f| f.support_box(d)).collect();
                boxes.map(|bs| {
                    (0..d)
                        .map(|i| {
                            bs.iter()
                                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, b| {
                                    (acc.0.min(b[i].0), acc.1.max(b[i].1))
                                })
                        })
                        .collect()
                })
            }
            Self::Product(fs) => {
                let boxes: Vec<_> = fs.iter().filter_map(|f| f.support_box(d)).collect();
                if boxes.is_empty() {
                    return None;
                }
                Some(
                    (0..d)
                        .map(|i| {
                            boxes.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |acc, b| {
                                (acc.0.max(b[i].0), acc.1.min(b[i].1))
                            })
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Radius of a centered ball outside of which the field vanishes.
    pub fn support_radius(&self, d: usize) -> Option<f64> {
        self.support_box(d).map(|bx| {
            bx.iter()
                .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
                .sum::<f64>()
                .sqrt()
        })
    }
}

// ---------------------------------------------------------------------------
// JSON exchange format

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileDef {
    Exp { rate: f64 },
    Ramp { n: u32 },
    Constant { value: f64 },
    Linear { slope: f64, #[serde(default)] intercept: f64 },
    Grid { t: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<ProfileDef> for Profile1D {
    type Error = Error;

    fn try_from(def: ProfileDef) -> Result<Self> {
        Ok(match def {
            ProfileDef::Exp { rate } => Profile1D::Exp { rate },
            ProfileDef::Ramp { n } if n > 0 => Profile1D::Ramp { n },
            ProfileDef::Ramp { .. } => return Err(Error::InvalidArgument("ramp index must be positive".into())),
            ProfileDef::Constant { value } => Profile1D::Constant { value },
            ProfileDef::Linear { slope, intercept } => Profile1D::Linear { slope, intercept },
            ProfileDef::Grid { t, values } => Profile1D::Grid(Pchip::new(t, values)?),
        })
    }
}

impl From<&Profile1D> for ProfileDef {
    fn from(p: &Profile1D) -> Self {
        match p {
            Profile1D::Exp { rate } => ProfileDef::Exp { rate: *rate },
            Profile1D::Ramp { n } => ProfileDef::Ramp { n: *n },
            Profile1D::Constant { value } => ProfileDef::Constant { value: *value },
            Profile1D::Linear { slope, intercept } => ProfileDef::Linear {
                slope: *slope,
                intercept: *intercept,
            },
            Profile1D::Grid(g) => ProfileDef::Grid {
                t: g.nodes().to_vec(),
                values: g.values().to_vec(),
            },
        }
    }
}

impl Serialize for Profile1D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileDef::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Profile1D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Profile1D::try_from(ProfileDef::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldDef {
    Constant {
        value: f64,
    },
    Indicator {
        body: BodyDef,
    },
    Approximant {
        body: BodyDef,
        n: u32,
    },
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        a: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Max {
        fields: Vec<FieldDef>,
    },
    Sum {
        fields: Vec<FieldDef>,
    },
    Product {
        fields: Vec<FieldDef>,
    },
    Quadratic {
        sigma: Vec<Vec<f64>>,
        phi: ProfileDef,
    },
}

impl TryFrom<FieldDef> for ScalarField {
    type Error = Error;

    fn try_from(def: FieldDef) -> Result<Self> {
        let many = |fs: Vec<FieldDef>| -> Result<Vec<ScalarField>> {
            if fs.is_empty() {
                return Err(Error::InvalidArgument("composite field needs at least one member".into()));
            }
            fs.into_iter().map(ScalarField::try_from).collect()
        };
        Ok(match def {
            FieldDef::Constant { value } => {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::InvalidArgument("constant field must be finite and nonnegative".into()));
                }
                ScalarField::Constant(value)
            }
            FieldDef::Indicator { body } => ScalarField::Indicator(body.try_into()?),
            FieldDef::Approximant { body, n } => ScalarField::approximant(body.try_into()?, n)?,
            FieldDef::Gaussian { center, a, scale } => {
                if !a.is_finite() || !(scale > 0.0) {
                    return Err(Error::InvalidArgument("gaussian field needs finite a and positive scale".into()));
                }
                ScalarField::Gaussian { center, a, scale }
            }
            FieldDef::Max { fields } => ScalarField::Max(many(fields)?),
            FieldDef::Sum { fields } => ScalarField::Sum(many(fields)?),
            FieldDef::Product { fields } => ScalarField::Product(many(fields)?),
            FieldDef::Quadratic { sigma, phi } => ScalarField::quadratic(sigma, phi.try_into()?)?,
        })
    }
}

impl From<ScalarField> for FieldDef {
    fn from(f: ScalarField) -> Self {
        let many = |fs: Vec<ScalarField>| fs.into_iter().map(FieldDef::from).collect();
        match f {
            ScalarField::Constant(value) => FieldDef::Constant { value },
            ScalarField::Indicator(b) => FieldDef::Indicator { body: b.into() },
            ScalarField::Approximant(a) => FieldDef::Approximant {
                n: a.n,
                body: a.body.into(),
            },
            ScalarField::Gaussian { center, a, scale } => FieldDef::Gaussian { center, a, scale },
            ScalarField::Max(fs) => FieldDef::Max { fields: many(fs) },
            ScalarField::Sum(fs) => FieldDef::Sum { fields: many(fs) },
            ScalarField::Product(fs) => FieldDef::Product { fields: many(fs) },
            ScalarField::Quadratic(q) => FieldDef::Quadratic {
                sigma: q.form.rows(),
                phi: ProfileDef::from(&q.phi),
            },
        }
    }
}
