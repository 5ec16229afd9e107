//! Euclidean projection onto axis-aligned ellipsoids.

/// Nearest point of `{y : sum y_i^2 / a_i^2 <= 1}` to `x`, assumed outside.
///
/// The minimizer is `y_i = a_i^2 x_i / (a_i^2 + lambda)` where `lambda >= 0`
/// solves `sum (a_i x_i / (a_i^2 + lambda))^2 = 1`; the left side decreases
/// in `lambda`, so bisection brackets the root.
pub fn project_axis_aligned(semi_axes: &[f64], x: &[f64]) -> Vec<f64> {
    let secular = |lambda: f64| -> f64 {
        semi_axes
            .iter()
            .zip(x)
            .map(|(a, xi)| {
                let r = a * xi / (a * a + lambda);
                r * r
            })
            .sum()
    };
    let mut lo = 0.0;
    let mut hi = semi_axes
        .iter()
        .zip(x)
        .map(|(a, xi)| (a * xi) * (a * xi))
        .sum::<f64>()
        .sqrt();
    for _ in 0..400 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if secular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    semi_axes
        .iter()
        .zip(x)
        .map(|(a, xi)| a * a * xi / (a * a + lambda))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_point_projects_to_vertex() {
        let p = project_axis_aligned(&[2.0, 1.0], &[4.0, 0.0]);
        assert!((p[0] - 2.0).abs() < 1e-11 && p[1].abs() < 1e-15);
    }

    #[test]
    fn circle_case_is_radial() {
        let p = project_axis_aligned(&[1.0, 1.0], &[3.0, 4.0]);
        assert!((p[0] - 0.6).abs() < 1e-11 && (p[1] - 0.8).abs() < 1e-11);
    }

    #[test]
    fn result_is_on_boundary_with_normal_residual() {
        let a = [1.0, 3.0, 0.5];
        let x = [2.0, -1.0, 4.0];
        let p = project_axis_aligned(&a, &x);
        let level: f64 = p.iter().zip(&a).map(|(pi, ai)| (pi / ai).powi(2)).sum();
        assert!((level - 1.0).abs() < 1e-10);
        // x - p is parallel to the gradient p_i / a_i^2.
        let g: Vec<f64> = p.iter().zip(&a).map(|(pi, ai)| pi / (ai * ai)).collect();
        let r: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi - pi).collect();
        let cross01 = r[0] * g[1] - r[1] * g[0];
        let cross02 = r[0] * g[2] - r[2] * g[0];
        assert!(cross01.abs() < 1e-9 && cross02.abs() < 1e-9);
    }
}
