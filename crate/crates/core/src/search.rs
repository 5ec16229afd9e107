//! Random instances, batch verification and hypothesis-necessity scans.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlation::{verify_theorem_1_1, verify_theorem_1_2, verify_theorem_2_1, verify_theorem_3_1, Budget};
use crate::error::{Error, Result};
use crate::field::{Profile1D, ScalarField};
use crate::geometry::{is_projection_closed, ConvexBody};
use crate::integration::mc_joint;
use crate::interp::Pchip;
use crate::measures::{Measure, ProductDensity, RadialDensity, RadialProfile};
use crate::report::{short_hash, Theorem, Verdict, VerificationReport};
use crate::rng::{map_items, mix_seed, substream, StreamRng};
use crate::transport::{
    contraction_check, monotone_map, quadratic_form_moments, sqrt_pd, transfer_check, verify_corollary,
    verify_theorem_4_1, Density1D,
};

// ---------------------------------------------------------------------------
// Instances

/// A complete theorem input. Which fields are required depends on `theorem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ConvexBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ConvexBody>,
    /// Radius of the centered ball `B` (1.1, 2.1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<ScalarField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Profile1D>,
}

impl Instance {
    fn empty(theorem: Theorem) -> Self {
        Self { theorem, a: None, b: None, radius: None, field: None, measure: None, sigma: None, phi: None }
    }

    pub fn dim(&self) -> Option<usize> {
        self.measure
            .as_ref()
            .map(Measure::dim)
            .or_else(|| self.sigma.as_ref().map(Vec::len))
    }

    /// Hash of the canonical JSON form.
    pub fn descriptor_hash(&self) -> String {
        short_hash(&serde_json::to_vec(self).expect("instance serializes"))
    }
}

fn need<T: Clone>(v: &Option<T>, what: &str, theorem: Theorem) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::InvalidArgument(format!("theorem {} needs `{what}`", theorem.tag())))
}

fn radial(m: &Measure, theorem: Theorem) -> Result<RadialDensity> {
    m.as_radial()
        .cloned()
        .ok_or_else(|| Error::InvalidArgument(format!("theorem {} needs a radial measure", theorem.tag())))
}

fn product(m: &Measure, theorem: Theorem) -> Result<ProductDensity> {
    m.as_product()
        .ok_or_else(|| Error::InvalidArgument(format!("theorem {} needs a product measure", theorem.tag())))
}

/// Runs the verifier that matches `instance.theorem`.
pub fn verify_instance(instance: &Instance, budget: &Budget, seed: u64) -> Result<VerificationReport> {
    let t = instance.theorem;
    match t {
        Theorem::BallRadial => {
            let mu = radial(&need(&instance.measure, "measure", t)?, t)?;
            verify_theorem_1_1(&need(&instance.a, "a", t)?, &mu, need(&instance.radius, "radius", t)?, budget, seed)
        }
        Theorem::EllipsoidProduct => {
            let mu = product(&need(&instance.measure, "measure", t)?, t)?;
            verify_theorem_1_2(&need(&instance.a, "a", t)?, &mu, &need(&instance.b, "b", t)?, budget, seed)
        }
        Theorem::FunctionalBall => {
            let mu = radial(&need(&instance.measure, "measure", t)?, t)?;
            verify_theorem_2_1(&need(&instance.field, "field", t)?, &mu, need(&instance.radius, "radius", t)?, budget, seed)
        }
        Theorem::FunctionalEllipsoid => {
            let mu = product(&need(&instance.measure, "measure", t)?, t)?;
            verify_theorem_3_1(&need(&instance.field, "field", t)?, &mu, &need(&instance.b, "b", t)?, budget, seed)
        }
        Theorem::QuadraticForm => verify_theorem_4_1(
            &need(&instance.field, "field", t)?,
            &need(&instance.sigma, "sigma", t)?,
            &need(&instance.phi, "phi", t)?,
            budget,
            seed,
        ),
        Theorem::SymmetricEllipsoid => {
            verify_corollary(&need(&instance.a, "a", t)?, &need(&instance.sigma, "sigma", t)?, budget, seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Polytope,
    Ellipsoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Gaussian,
    RadialGrid,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    Ball,
    Ellipsoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub d: usize,
    pub body: BodyKind,
    pub measure: MeasureKind,
    pub b: BallKind,
    /// Require `0 in A` (true) or `0 not in A` (false).
    pub origin: bool,
}

/// Random `(A, mu, B)` following `spec`; deterministic in `seed`.
pub fn random_instance(spec: &InstanceSpec, seed: u64) -> Result<(ConvexBody, Measure, ConvexBody)> {
    if spec.d == 0 || spec.d > 10 {
        return Err(Error::InvalidArgument("dimension must be between 1 and 10".into()));
    }
    if spec.body == BodyKind::Ellipsoid && !spec.origin {
        return Err(Error::InvalidArgument("centered ellipsoids always contain the origin".into()));
    }
    let d = spec.d;
    let mut rng = substream(seed, 0);
    let a = match (spec.body, spec.origin) {
        (BodyKind::Polytope, true) => random_polytope(&mut rng, d)?,
        (BodyKind::Polytope, false) => random_offset_box(&mut rng, d)?,
        (BodyKind::Ellipsoid, _) => ConvexBody::quadratic_ellipsoid(random_pd(&mut rng, d, 0.3, 2.0))?,
    };
    let measure = match spec.measure {
        MeasureKind::Gaussian => RadialDensity::new(d, RadialProfile::Gaussian { sd: rng.random_range(0.7..1.3) })?.into(),
        MeasureKind::RadialGrid => random_radial_grid(&mut rng, d)?.into(),
        MeasureKind::Product => random_product(&mut rng, d)?.into(),
    };
    let b = match spec.b {
        BallKind::Ball => ConvexBody::ball(rng.random_range(0.3..1.5) * typical(&measure))?,
        BallKind::Ellipsoid => random_axis_ellipsoid(&mut rng, d)?,
    };
    Ok((a, measure, b))
}

fn typical(m: &Measure) -> f64 {
    m.typical_radius()
}

fn unit_vector(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn box_rows(d: usize, half: f64) -> Vec<(Vec<f64>, f64)> {
    let mut rows = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            rows.push((e, half));
        }
    }
    rows
}

/// Between `2d` and `6d` halfspaces with unit normals and positive offsets,
/// clipped to a box.
fn random_polytope(rng: &mut StreamRng, d: usize) -> Result<ConvexBody> {
    let m = rng.random_range(2 * d..=6 * d);
    let half = rng.random_range(1.5..3.0);
    let mut rows = box_rows(d, half);
    for _ in 0..m {
        rows.push((unit_vector(rng, d), rng.random_range(0.3..1.5)));
    }
    ConvexBody::polytope_from(&rows, Some(half * (d as f64).sqrt() * (1.0 + 1e-9)))
}

/// Halfspaces in `+-` pairs, so the polytope is symmetric.
fn random_symmetric_polytope(rng: &mut StreamRng, d: usize) -> Result<ConvexBody> {
    let m = rng.random_range(d..=3 * d);
    let half = rng.random_range(1.0..2.5);
    let mut rows = box_rows(d, half);
    for _ in 0..m {
        let n = unit_vector(rng, d);
        let c = rng.random_range(0.4..1.5);
        rows.push((n.iter().map(|v| -v).collect(), c));
        rows.push((n, c));
    }
    ConvexBody::polytope_from(&rows, Some(half * (d as f64).sqrt() * (1.0 + 1e-9)))
}

/// A box whose first coordinate interval excludes 0.
fn random_offset_box(rng: &mut StreamRng, d: usize) -> Result<ConvexBody> {
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let s = rng.random_range(0.2..2.5);
    let w = rng.random_range(0.5..2.0);
    if rng.random::<bool>() {
        lo[0] = s;
        hi[0] = s + w;
    } else {
        lo[0] = -s - w;
        hi[0] = -s;
    }
    for i in 1..d {
        lo[i] = -rng.random_range(0.5..2.0);
        hi[i] = rng.random_range(0.5..2.0);
    }
    ConvexBody::aabb(&lo, &hi)
}

/// `{sum_i max(p_i x_i, -q_i x_i) <= 1}` clipped to a box containing 0:
/// both are closed under zeroing coordinates, hence so is the intersection.
fn random_projection_closed(rng: &mut StreamRng, d: usize) -> Result<ConvexBody> {
    let p: Vec<f64> = (0..d).map(|_| rng.random_range(0.4..2.0)).collect();
    let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.4..2.0)).collect();
    let mut rows = Vec::new();
    for mask in 0..(1usize << d) {
        let n = (0..d).map(|i| if mask >> i & 1 == 1 { p[i] } else { -q[i] }).collect();
        rows.push((n, 1.0));
    }
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        rows.push((e.clone(), rng.random_range(0.3..2.0)));
        e[i] = -1.0;
        rows.push((e, rng.random_range(0.3..2.0)));
    }
    ConvexBody::polytope_from(&rows, None)
}

/// `L L^T` with a random lower-triangular `L` whose diagonal lies in `[lo, hi]`.
fn random_pd(rng: &mut StreamRng, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; d]; d];
    for (i, row) in l.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate().take(i + 1) {
            *v = if i == j { rng.random_range(lo..hi) } else { 0.3 * rng.sample::<f64, _>(StandardNormal) };
        }
    }
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| l[i][k] * l[j][k]).sum()).collect())
        .collect()
}

fn random_axis_ellipsoid(rng: &mut StreamRng, d: usize) -> Result<ConvexBody> {
    ConvexBody::ellipsoid((0..d).map(|_| rng.random_range(0.4..2.0)).collect())
}

fn random_radial_grid(rng: &mut StreamRng, d: usize) -> Result<RadialDensity> {
    let s = rng.random_range(0.7..1.3);
    let t_max = 4.0 * s + (d as f64).sqrt() * s;
    let nodes = 17;
    let t: Vec<f64> = (0..nodes).map(|k| t_max * k as f64 / (nodes - 1) as f64).collect();
    let rho: Vec<f64> = t
        .iter()
        .map(|&r| (-(r * r) / (2.0 * s * s)).exp().max(1e-8) * rng.random_range(0.5..1.5))
        .collect();
    RadialDensity::new(d, RadialProfile::Grid(Pchip::new(t, rho)?))
}

fn random_marginal(rng: &mut StreamRng) -> Result<RadialDensity> {
    let profile = if rng.random::<bool>() {
        RadialProfile::Gaussian { sd: rng.random_range(0.6..1.5) }
    } else {
        RadialProfile::ExponentialPower { scale: rng.random_range(0.7..1.5), power: rng.random_range(1.0..3.0) }
    };
    RadialDensity::new(1, profile)
}

fn random_product(rng: &mut StreamRng, d: usize) -> Result<ProductDensity> {
    ProductDensity::new((0..d).map(|_| random_marginal(rng)).collect::<Result<Vec<_>>>()?)
}

fn random_radial(rng: &mut StreamRng, d: usize) -> Result<RadialDensity> {
    match rng.random_range(0..3) {
        0 => RadialDensity::gaussian(d),
        1 => random_radial_grid(rng, d),
        _ => RadialDensity::new(
            d,
            RadialProfile::ExponentialPower { scale: rng.random_range(0.7..1.5), power: rng.random_range(1.0..3.0) },
        ),
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// A random instance satisfying the hypotheses of `theorem` in dimension `d`.
pub fn random_theorem_instance(theorem: Theorem, d: usize, seed: u64) -> Result<Instance> {
    if d == 0 || d > 10 {
        return Err(Error::InvalidArgument("dimension must be between 1 and 10".into()));
    }
    let mut rng = substream(seed, 0);
    let mut inst = Instance::empty(theorem);
    match theorem {
        Theorem::BallRadial | Theorem::FunctionalBall => {
            let mu = random_radial(&mut rng, d)?;
            let a = if rng.random_range(0..5) == 0 {
                ConvexBody::quadratic_ellipsoid(random_pd(&mut rng, d, 0.4, 1.5))?
            } else {
                random_polytope(&mut rng, d)?
            };
            inst.radius = Some(rng.random_range(0.3..1.5) * mu_typical(&mu));
            if theorem == Theorem::BallRadial {
                inst.a = Some(a);
            } else {
                inst.field = Some(ScalarField::approximant(a, [2, 4, 8][rng.random_range(0..3)])?);
            }
            inst.measure = Some(mu.into());
        }
        Theorem::EllipsoidProduct => {
            inst.a = Some(random_projection_closed(&mut rng, d)?);
            inst.b = Some(random_axis_ellipsoid(&mut rng, d)?);
            inst.measure = Some(random_product(&mut rng, d)?.into());
        }
        Theorem::FunctionalEllipsoid => {
            let lo: Vec<f64> = (0..d).map(|_| -rng.random_range(0.2..1.5)).collect();
            let hi: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.5)).collect();
            inst.field = Some(ScalarField::approximant(ConvexBody::aabb(&lo, &hi)?, [2, 4, 8][rng.random_range(0..3)])?);
            inst.b = Some(random_axis_ellipsoid(&mut rng, d)?);
            inst.measure = Some(random_product(&mut rng, d)?.into());
        }
        Theorem::QuadraticForm => {
            let rate = rng.random_range(0.2..1.0);
            inst.field = Some(ScalarField::quadratic(random_pd(&mut rng, d, 0.5, 1.2), Profile1D::Exp { rate })?);
            inst.sigma = Some(random_pd(&mut rng, d, 0.5, 1.5));
            inst.phi = Some(if rng.random::<bool>() {
                Profile1D::Exp { rate: rng.random_range(0.2..1.0) }
            } else {
                Profile1D::Ramp { n: [2, 4, 8][rng.random_range(0..3)] }
            });
        }
        Theorem::SymmetricEllipsoid => {
            inst.a = Some(random_symmetric_polytope(&mut rng, d)?);
            inst.sigma = Some(random_pd(&mut rng, d, 0.5, 1.5));
        }
    }
    Ok(inst)
}

fn mu_typical(mu: &RadialDensity) -> f64 {
    Measure::from(mu.clone()).typical_radius()
}

// ---------------------------------------------------------------------------
// Batches

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub instance_id: usize,
    pub theorem: String,
    pub d: usize,
    pub body_descriptor_hash: String,
    pub gap: f64,
    pub se: f64,
    pub verdict: Verdict,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub theorem: Theorem,
    pub rows: Vec<BatchRow>,
    pub confirmed: usize,
    pub inconclusive: usize,
    pub violated: usize,
    pub inapplicable: usize,
}

impl BatchReport {
    pub fn has_violation(&self) -> bool {
        self.violated > 0
    }
}

/// Verifies `n_instances` random instances, cycling through `dims`.
/// Instance `i` uses seed `mix_seed(seed, i)`; rows come back in index order.
pub fn batch_verify(theorem: Theorem, n_instances: usize, dims: &[usize], budget: &Budget, seed: u64) -> Result<BatchReport> {
    if dims.is_empty() && n_instances > 0 {
        return Err(Error::InvalidArgument("no dimensions given".into()));
    }
    let ids: Vec<usize> = (0..n_instances).collect();
    let rows = map_items(&ids, |_, &i| -> Result<BatchRow> {
        let s = mix_seed(seed, i as u64);
        let d = dims[i % dims.len()];
        let inst = random_theorem_instance(theorem, d, s)?;
        let rep = verify_instance(&inst, budget, mix_seed(s, 1))?;
        Ok(BatchRow {
            instance_id: i,
            theorem: theorem.tag().to_string(),
            d,
            body_descriptor_hash: inst.descriptor_hash(),
            gap: rep.gap,
            se: rep.se,
            verdict: rep.verdict,
            seed: s,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    let report = BatchReport {
        theorem,
        confirmed: count(Verdict::Confirmed),
        inconclusive: count(Verdict::Inconclusive),
        violated: count(Verdict::Violated),
        inapplicable: count(Verdict::InapplicableHypothesis),
        rows,
    };
    for r in report.rows.iter().filter(|r| r.verdict == Verdict::Violated) {
        log::error!(
            "theorem {} violated on instance {} (seed {}): gap {:.3e}, se {:.3e}",
            r.theorem,
            r.instance_id,
            r.seed,
            r.gap,
            r.se
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Necessity scans

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrokenHypothesis {
    OriginNotInA,
    ANotProjectionClosed,
    PhiNotDecreasing,
    TiltNotLogconcave,
}

impl BrokenHypothesis {
    pub const ALL: [BrokenHypothesis; 4] = [
        Self::OriginNotInA,
        Self::ANotProjectionClosed,
        Self::PhiNotDecreasing,
        Self::TiltNotLogconcave,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::OriginNotInA => "origin-not-in-A",
            Self::ANotProjectionClosed => "A-not-projection-closed",
            Self::PhiNotDecreasing => "phi-not-decreasing",
            Self::TiltNotLogconcave => "tilt-not-logconcave",
        }
    }
}

impl fmt::Display for BrokenHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BrokenHypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|h| h.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let tags: Vec<_> = Self::ALL.iter().map(|h| h.tag()).collect();
                Error::InvalidArgument(format!("unknown hypothesis `{s}`; expected one of {}", tags.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub instance_id: usize,
    pub hypothesis: BrokenHypothesis,
    pub d: usize,
    pub gap: f64,
    pub se: f64,
    /// `gap / se`, the ranking key.
    pub z: f64,
    /// `gap < -5 se`.
    pub counterexample: bool,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub hypothesis: BrokenHypothesis,
    /// Most negative `z` first.
    pub rows: Vec<ScanRow>,
    pub counterexamples: usize,
}

/// Instances that break exactly `broken` and keep the other hypotheses,
/// ranked by signal-to-noise of the (unhypothesized) correlation gap.
pub fn necessity_scan(broken: BrokenHypothesis, n_instances: usize, d: usize, budget: &Budget, seed: u64) -> Result<ScanReport> {
    if d == 0 || d > 10 {
        return Err(Error::InvalidArgument("dimension must be between 1 and 10".into()));
    }
    let ids: Vec<usize> = (0..n_instances).collect();
    let mut rows = map_items(&ids, |_, &i| -> Result<ScanRow> {
        let s = mix_seed(seed, i as u64);
        let (gap, se, detail) = scan_instance(broken, d, budget, s)?;
        let z = if se > 0.0 { gap / se } else if gap < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        Ok(ScanRow {
            instance_id: i,
            hypothesis: broken,
            d,
            gap,
            se,
            z,
            counterexample: gap < -5.0 * se,
            seed: s,
            detail,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.z.total_cmp(&b.z).then(a.instance_id.cmp(&b.instance_id)));
    let counterexamples = rows.iter().filter(|r| r.counterexample).count();
    Ok(ScanReport { hypothesis: broken, rows, counterexamples })
}

fn scan_instance(broken: BrokenHypothesis, d: usize, budget: &Budget, seed: u64) -> Result<(f64, f64, String)> {
    let mut rng = substream(seed, 0);
    let n = budget.samples;
    match broken {
        BrokenHypothesis::OriginNotInA => {
            let a = random_offset_box(&mut rng, d)?;
            let mu: Measure = RadialDensity::gaussian(d)?.into();
            let r = rng.random_range(0.5..1.5);
            let j = mc_joint(&mu, &a, &ConvexBody::ball(r)?, n, mix_seed(seed, 1))?;
            let (lo, hi) = a.coordinate_bounds(d)?[0];
            Ok((j.gap, j.gap_se, format!("A first coordinate [{lo:.4}, {hi:.4}], ball radius {r:.4}")))
        }
        BrokenHypothesis::ANotProjectionClosed => {
            let mu = ProductDensity::gaussian(d)?;
            let mut tries = 0;
            let a = loop {
                let a = random_polytope(&mut rng, d)?;
                tries += 1;
                if !is_projection_closed(&a, d, budget.check_samples, mix_seed(seed, tries))?.passed || tries >= 16 {
                    break a;
                }
            };
            let b = random_axis_ellipsoid(&mut rng, d)?;
            let j = mc_joint(&mu.into(), &a, &b, n, mix_seed(seed, 1))?;
            Ok((j.gap, j.gap_se, format!("random polytope containing 0, ellipsoid B ({tries} draws)")))
        }
        BrokenHypothesis::PhiNotDecreasing => {
            let a = rng.random_range(0.25..1.0);
            let slope = rng.random_range(0.5..2.0);
            let field = ScalarField::gaussian(a);
            let root = sqrt_pd(&identity(d))?;
            let m = quadratic_form_moments(&field, &root, &Profile1D::Linear { slope, intercept: 0.0 }, d, n, mix_seed(seed, 1))?;
            let (gap, se) = m.product_gap();
            Ok((gap, se, format!("f = exp(-{a:.4} |x|^2), phi(t) = {slope:.4} t")))
        }
        BrokenHypothesis::TiltNotLogconcave => {
            if d != 1 {
                return Err(Error::InvalidArgument("the transport scan is one-dimensional".into()));
            }
            let s = rng.random_range(0.3..0.9);
            let map = monotone_map(&Density1D::normal(0.0, s)?, &Density1D::normal(0.0, 1.0)?)?;
            let c = contraction_check(&map);
            let (_, _, gap, se) = transfer_check(&map, &Profile1D::Exp { rate: 0.5 }, n, mix_seed(seed, 1))?;
            Ok((
                gap,
                se,
                format!("N(0, {s:.4}^2) -> N(0, 1), increment ratio {:.4}", c.max_increment_ratio),
            ))
        }
    }
}
