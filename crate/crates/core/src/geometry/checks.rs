use rand::Rng;
use rand_distr::StandardNormal;

use super::{ConvexBody, Point};
use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::rng::{substream, StreamRng};

/// Lowest rejection-sampling acceptance rate tolerated.
pub const ACCEPTANCE_FLOOR: f64 = 1e-4;

pub(crate) fn uniform_in_ball(rng: &mut StreamRng, d: usize, radius: f64) -> Point {
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = super::norm(&v);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    for x in &mut v {
        *x *= r / n;
    }
    v
}

/// `n` points uniform in the body, by rejection inside its bounding ball.
pub fn sample_uniform_in_body(body: &ConvexBody, d: usize, n: usize, seed: u64) -> Result<Vec<Point>> {
    let radius = body.bounding_radius(d)?;
    let mut rng = substream(seed, 0);
    let max_attempts = ((n.max(1) as f64) / ACCEPTANCE_FLOOR) as usize;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        if attempts >= max_attempts {
            return Err(Error::LowAcceptance { accepted: out.len(), attempts });
        }
        attempts += 1;
        let x = uniform_in_ball(&mut rng, d, radius);
        if body.contains_unchecked(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Probabilistic check that zeroing any coordinate of a point of the body
/// keeps it in the body. Passing is evidence; a failure is a proof.
pub fn is_projection_closed(body: &ConvexBody, d: usize, n_samples: usize, seed: u64) -> Result<CheckReport> {
    const NAME: &str = "projection-closed";
    body.check_dim(d)?;
    for x in &sample_uniform_in_body(body, d, n_samples, seed)? {
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            let mut z = x.clone();
            z[i] = 0.0;
            if !body.contains_unchecked(&z) {
                return Ok(CheckReport::fail(NAME, n_samples, x.clone(), format!("zeroing coordinate {i} leaves the body"))
                    .with_image(z));
            }
        }
    }
    Ok(CheckReport::pass(NAME, n_samples))
}

/// Probabilistic check of `x in A => -x in A`.
pub fn is_symmetric(body: &ConvexBody, d: usize, n_samples: usize, seed: u64) -> Result<CheckReport> {
    const NAME: &str = "symmetric";
    body.check_dim(d)?;
    for x in sample_uniform_in_body(body, d, n_samples, seed)? {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if !body.contains_unchecked(&neg) {
            return Ok(CheckReport::fail(NAME, n_samples, x, "reflection through the origin leaves the body")
                .with_image(neg));
        }
    }
    Ok(CheckReport::pass(NAME, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_closed_examples() {
        let simplex = ConvexBody::simplex(2).unwrap();
        assert!(is_projection_closed(&simplex, 2, 2000, 1).unwrap().passed);
        let ball = ConvexBody::ball(1.0).unwrap();
        assert!(is_projection_closed(&ball, 3, 2000, 2).unwrap().passed);

        let shifted = ConvexBody::aabb(&[1.0, -1.0], &[2.0, 1.0]).unwrap();
        let rep = is_projection_closed(&shifted, 2, 500, 3).unwrap();
        assert!(!rep.passed);
        let w = rep.witness.unwrap();
        let img = rep.image.unwrap();
        assert!(shifted.contains(&w).unwrap());
        assert!(!shifted.contains(&img).unwrap());
    }

    #[test]
    fn symmetry_examples() {
        assert!(is_symmetric(&ConvexBody::ball(1.0).unwrap(), 2, 1000, 4).unwrap().passed);
        assert!(!is_symmetric(&ConvexBody::simplex(2).unwrap(), 2, 1000, 5).unwrap().passed);
        let e = ConvexBody::ellipsoid(vec![1.0, 2.0]).unwrap();
        assert!(is_symmetric(&e, 2, 1000, 6).unwrap().passed);
    }

    #[test]
    fn checkers_are_deterministic() {
        let shifted = ConvexBody::aabb(&[1.0, -1.0], &[2.0, 1.0]).unwrap();
        let a = is_projection_closed(&shifted, 2, 100, 9).unwrap();
        let b = is_projection_closed(&shifted, 2, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thin_body_reports_low_acceptance() {
        let sliver = ConvexBody::intersection(vec![
            ConvexBody::ball(1.0).unwrap(),
            ConvexBody::aabb(&[-1.0, -1e-7, -1e-7], &[1.0, 1e-7, 1e-7]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            sample_uniform_in_body(&sliver, 3, 5, 1),
            Err(Error::LowAcceptance { .. })
        ));
    }
}
