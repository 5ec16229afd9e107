//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the plain functions below them are usable from native code.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gcorr_core::correlation::{phi_profile, verify_theorem_1_1, Budget};
use gcorr_core::integration::mc_joint;
use gcorr_core::transport::{contraction_check, monotone_map, Density1D, Tilt};
use gcorr_core::{ConvexBody, Measure, RadialDensity, ScalarField};

const MAX_SAMPLES: usize = 2_000_000;

#[derive(Debug, Serialize)]
pub struct ProfileView {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub t1: Option<f64>,
    /// `sqrt(ln(1 + 2a) / a)`, where `Phi'` changes sign.
    pub t1_exact: f64,
}

/// Ball-correlation profile of `exp(-a |x|^2)` under the standard Gaussian on the plane.
pub fn gaussian_profile(a: f64, t_max: f64, steps: usize) -> Result<ProfileView, String> {
    if !(a > 0.0) || !(t_max > 0.0) || !(2..=400).contains(&steps) {
        return Err("need a > 0, t_max > 0 and 2 to 400 steps".into());
    }
    let grid: Vec<f64> = (1..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
    let mu = RadialDensity::gaussian(2).map_err(|e| e.to_string())?;
    let p = phi_profile(&ScalarField::gaussian(a), &mu, &grid, 0, 128, 0).map_err(|e| e.to_string())?;
    Ok(ProfileView { t: p.t_grid, phi: p.phi, dphi: p.dphi, t1: p.t1_estimate, t1_exact: ((1.0 + 2.0 * a).ln() / a).sqrt() })
}

#[derive(Debug, Serialize)]
pub struct TransportView {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub max_increment_ratio: f64,
    pub contraction: bool,
    pub logconcave_tilt: Option<bool>,
}

/// Monotone map from the standard normal onto `N(0, sd^2)` tilted by `exp(-a |x|^p)`.
pub fn tilt_transport(sd: f64, a: f64, p: f64) -> Result<TransportView, String> {
    let tilt = Tilt::ExpPower { a, p, center: 0.0 };
    let target = Density1D::tilted_normal(sd, &tilt).map_err(|e| e.to_string())?;
    let source = Density1D::normal(0.0, 1.0).map_err(|e| e.to_string())?;
    let map = monotone_map(&source, &target).map_err(|e| e.to_string())?;
    let c = contraction_check(&map);
    let (x, t): (Vec<f64>, Vec<f64>) = map.rows().filter(|(x, _)| x.abs() <= 4.0).step_by(8).unzip();
    Ok(TransportView {
        x,
        t,
        max_increment_ratio: c.max_increment_ratio,
        contraction: c.passed,
        logconcave_tilt: tilt.is_logconcave(),
    })
}

#[derive(Debug, Serialize)]
pub struct GapView {
    pub verdict: String,
    pub failed_hypotheses: Vec<String>,
    pub mu_a_and_b: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    /// `mu(A n B) - mu(A) mu(B)` whether or not the hypotheses hold.
    pub gap: f64,
    pub se: f64,
}

/// Box `[cx - w, cx + w] x [-h, h]` against the centered disk of radius `r`
/// under the standard Gaussian on the plane.
pub fn box_disk_gap(cx: f64, w: f64, h: f64, r: f64, samples: usize, seed: u64) -> Result<GapView, String> {
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(format!("samples must be between 1 and {MAX_SAMPLES}"));
    }
    let rows = vec![
        (vec![1.0, 0.0], cx + w),
        (vec![-1.0, 0.0], w - cx),
        (vec![0.0, 1.0], h),
        (vec![0.0, -1.0], h),
    ];
    let a = ConvexBody::polytope_from(&rows, None).map_err(|e| e.to_string())?;
    let b = ConvexBody::ball(r).map_err(|e| e.to_string())?;
    let mu = RadialDensity::gaussian(2).map_err(|e| e.to_string())?;
    let budget = Budget { samples, ladder_samples: 0, ..Budget::default() };
    let report = verify_theorem_1_1(&a, &mu, r, &budget, seed).map_err(|e| e.to_string())?;
    let joint = mc_joint(&Measure::from(mu), &a, &b, samples, seed).map_err(|e| e.to_string())?;
    Ok(GapView {
        verdict: report.verdict.to_string(),
        failed_hypotheses: report.failed_hypotheses().map(|h| h.name.clone()).collect(),
        mu_a_and_b: joint.both.value,
        mu_a: joint.a.value,
        mu_b: joint.b.value,
        gap: joint.gap,
        se: joint.gap_se,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())))
}

#[wasm_bindgen(js_name = gaussianProfile)]
pub fn gaussian_profile_js(a: f64, t_max: f64, steps: usize) -> Result<String, JsError> {
    to_js(gaussian_profile(a, t_max, steps))
}

#[wasm_bindgen(js_name = tiltTransport)]
pub fn tilt_transport_js(sd: f64, a: f64, p: f64) -> Result<String, JsError> {
    to_js(tilt_transport(sd, a, p))
}

#[wasm_bindgen(js_name = boxDiskGap)]
pub fn box_disk_gap_js(cx: f64, w: f64, h: f64, r: f64, samples: usize, seed: u32) -> Result<String, JsError> {
    to_js(box_disk_gap(cx, w, h, r, samples, u64::from(seed)))
}
