//! H-polytopes: Dykstra projection and small-dimension vertex enumeration.

use nalgebra::{DMatrix, DVector};

use super::{dot, norm, PROJ_TOL};
use crate::error::{Error, Result};

/// Maximum number of full Dykstra sweeps.
pub const MAX_SWEEPS: usize = 10_000;

/// Closed halfspace `<normal, x> <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    norm: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let n = norm(&normal);
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidBody(
                "halfspace normal must be finite and nonzero".into(),
            ));
        }
        Ok(Self { normal, offset, norm: n })
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    /// Signed Euclidean distance to the bounding hyperplane (positive outside).
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.value(x) / self.norm
    }

    fn project_into(&self, y: &[f64], out: &mut [f64]) {
        let v = self.value(y);
        if v <= 0.0 {
            out.copy_from_slice(y);
        } else {
            let s = v / (self.norm * self.norm);
            for ((o, yi), ni) in out.iter_mut().zip(y).zip(&self.normal) {
                *o = yi - s * ni;
            }
        }
    }
}

/// Worst signed distance over all halfspaces.
pub fn max_violation(halfspaces: &[Halfspace], x: &[f64]) -> f64 {
    halfspaces
        .iter()
        .map(|h| h.signed_distance(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Nearest point of the polytope to `x` (assumed outside).
pub fn project(halfspaces: &[Halfspace], x: &[f64]) -> Result<Vec<f64>> {
    // A single violated face whose projection lands in the polytope is exact.
    let mut buf = vec![0.0; x.len()];
    for h in halfspaces.iter().filter(|h| h.value(x) > 0.0) {
        h.project_into(x, &mut buf);
        if max_violation(halfspaces, &buf) <= 1e-13 {
            return Ok(buf);
        }
    }

    match dykstra(halfspaces, x) {
        Ok(approx) => Ok(polish(halfspaces, x, &approx).unwrap_or(approx)),
        // Slow sweeps near sharp vertices: settle the active set exactly.
        Err(err) => {
            let stalled = match &err {
                Error::NonConvergence { last_iterate, .. } => polish(halfspaces, x, last_iterate),
                _ => None,
            };
            stalled.or_else(|| exact_active_set(halfspaces, x)).ok_or(err)
        }
    }
}

/// Projection from the face subsets of size at most `d` (for `d <= 3`);
/// the KKT point is unique, so the first admissible subset gives it.
fn exact_active_set(halfspaces: &[Halfspace], x0: &[f64]) -> Option<Vec<f64>> {
    let d = x0.len();
    if d > 3 {
        return None;
    }
    let m = halfspaces.len();
    for k in 1..=d.min(m) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let faces: Vec<&Halfspace> = idx.iter().map(|&i| &halfspaces[i]).collect();
            if let Some(y) = kkt_point(&faces, x0) {
                if max_violation(halfspaces, &y) <= 1e-12 {
                    return Some(y);
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    None
}

/// Projection of `x0` onto the affine hull of `faces` when all multipliers
/// are nonnegative.
fn kkt_point(faces: &[&Halfspace], x0: &[f64]) -> Option<Vec<f64>> {
    let d = x0.len();
    let k = faces.len();
    let n = DMatrix::from_fn(k, d, |r, c| faces[r].normal[c]);
    let rhs = DVector::from_fn(k, |r, _| faces[r].value(x0));
    let lambda = (&n * n.transpose()).cholesky()?.solve(&rhs);
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    let shift = n.transpose() * lambda;
    Some(x0.iter().zip(shift.iter()).map(|(a, s)| a - s).collect())
}

fn dykstra(halfspaces: &[Halfspace], x0: &[f64]) -> Result<Vec<f64>> {
    let d = x0.len();
    let m = halfspaces.len();
    let mut x = x0.to_vec();
    let mut incr = vec![0.0; m * d];
    let mut y = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut residual = f64::INFINITY;

    for sweep in 0..MAX_SWEEPS {
        let start = x.clone();
        let mut incr_change = 0.0;
        for (i, h) in halfspaces.iter().enumerate() {
            let p = &mut incr[i * d..(i + 1) * d];
            for k in 0..d {
                y[k] = x[k] + p[k];
            }
            h.project_into(&y, &mut next);
            for k in 0..d {
                let np = y[k] - next[k];
                incr_change += (np - p[k]) * (np - p[k]);
                p[k] = np;
            }
            std::mem::swap(&mut x, &mut next);
        }
        let change: f64 = start.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        residual = change.max(incr_change.sqrt());
        if residual < PROJ_TOL && sweep > 0 {
            break;
        }
    }

    let violation = max_violation(halfspaces, &x);
    if violation > 1e-6 {
        return Err(Error::EmptyBody(format!(
            "alternating projections stalled {violation:.3e} outside a halfspace"
        )));
    }
    if residual >= PROJ_TOL {
        return Err(Error::NonConvergence {
            iterations: MAX_SWEEPS,
            residual,
            last_iterate: x,
        });
    }
    Ok(x)
}

/// Exact projection onto the affine hull of the faces active at the Dykstra
/// point, accepted only when it satisfies the KKT conditions.
fn polish(halfspaces: &[Halfspace], x0: &[f64], approx: &[f64]) -> Option<Vec<f64>> {
    let d = x0.len();
    let active: Vec<&Halfspace> = halfspaces
        .iter()
        .filter(|h| h.signed_distance(approx) > -1e-7)
        .collect();
    if active.is_empty() || active.len() > d {
        return None;
    }
    let y = kkt_point(&active, x0)?;
    let drift: f64 = y.iter().zip(approx).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    (max_violation(halfspaces, &y) <= 1e-12 && drift < 1e-6).then_some(y)
}

/// Per-coordinate bounds from vertex enumeration (d <= 3).
///
/// A large box is added to the system; any vertex lying on the box shows
/// that the polytope is unbounded.
pub fn vertex_bounds(halfspaces: &[Halfspace], d: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    const BIG: f64 = 1e6;
    let mut rows: Vec<(Vec<f64>, f64)> = halfspaces
        .iter()
        .map(|h| (h.normal.clone(), h.offset))
        .collect();
    let n_real = rows.len();
    for axis in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[axis] = sign;
            rows.push((e, BIG));
        }
    }

    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    let mut max_norm: f64 = 0.0;
    let mut found = false;
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, c| rows[idx[r]].0[c]);
        let b = DVector::from_fn(d, |r, _| rows[idx[r]].1);
        let lu = a.lu();
        let det = lu.determinant();
        if det.abs() > 1e-12 {
            if let Some(v) = lu.solve(&b) {
                let feasible = rows
                    .iter()
                    .all(|(n, off)| dot(n, v.as_slice()) <= off + 1e-9 * (1.0 + off.abs()));
                if feasible {
                    found = true;
                    let on_box = idx.iter().any(|&i| i >= n_real);
                    if on_box {
                        return Err(Error::Unbounded(
                            "polytope has a vertex on the auxiliary bounding box".into(),
                        ));
                    }
                    for (c, bd) in bounds.iter_mut().enumerate() {
                        bd.0 = bd.0.min(v[c]);
                        bd.1 = bd.1.max(v[c]);
                    }
                    max_norm = max_norm.max(v.norm());
                }
            }
        }
        if !next_combination(&mut idx, rows.len()) {
            break;
        }
    }
    if !found {
        return Err(Error::EmptyBody("halfspaces have no common point".into()));
    }
    Ok((bounds, max_norm))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Halfspace> {
        [([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0), ([0.0, 1.0], 1.0), ([0.0, -1.0], 1.0)]
            .iter()
            .map(|(n, b)| Halfspace::new(n.to_vec(), *b).unwrap())
            .collect()
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let mut idx = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut idx, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }

    #[test]
    fn dykstra_reaches_corner() {
        let p = dykstra(&square(), &[2.0, 3.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-8 && (p[1] - 1.0).abs() < 1e-8);
        let q = project(&square(), &[2.0, 3.0]).unwrap();
        assert_eq!(q, vec![1.0, 1.0]);
    }

    #[test]
    fn acute_wedge_projection_is_polished() {
        // Wedge between x2 <= 0.1 x1 and x2 >= -0.1 x1, cut at x1 <= 1.
        let hs = vec![
            Halfspace::new(vec![-0.1, 1.0], 0.0).unwrap(),
            Halfspace::new(vec![-0.1, -1.0], 0.0).unwrap(),
            Halfspace::new(vec![1.0, 0.0], 1.0).unwrap(),
        ];
        let p = project(&hs, &[-1.0, 0.0]).unwrap();
        assert!(p.iter().all(|v| v.abs() < 1e-12), "{p:?}");
    }

    #[test]
    fn needle_apex_projection_is_exact() {
        let hs = vec![
            Halfspace::new(vec![1e-3, 1.0], 1e-3).unwrap(),
            Halfspace::new(vec![1e-3, -1.0], 1e-3).unwrap(),
            Halfspace::new(vec![-1.0, 0.0], 1.0).unwrap(),
        ];
        let p = project(&hs, &[3.0, 1e-7]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-10 && p[1].abs() < 1e-10, "{p:?}");
    }

    #[test]
    fn empty_polytope_is_reported() {
        let hs = vec![
            Halfspace::new(vec![1.0], 0.0).unwrap(),
            Halfspace::new(vec![-1.0], -1.0).unwrap(),
        ];
        assert!(matches!(dykstra(&hs, &[0.5]), Err(Error::EmptyBody(_))));
        assert!(matches!(vertex_bounds(&hs, 1), Err(Error::EmptyBody(_))));
    }

    #[test]
    fn unbounded_polytope_is_detected() {
        let hs = vec![Halfspace::new(vec![1.0, 0.0], 1.0).unwrap()];
        assert!(matches!(vertex_bounds(&hs, 2), Err(Error::Unbounded(_))));
    }
}
