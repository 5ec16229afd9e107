use gcorr_core::geometry::{ConvexBody, PROJ_TOL};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Fixed so every run draws the same cases.
const SEED: u64 = 0x5eed;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v).max(1e-9);
    v.into_iter().map(|x| x / n).collect()
}

/// Random bounded polytope in R^2 or R^3 containing a small ball around 0.
fn polytope(d: usize) -> impl Strategy<Value = ConvexBody> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, d), 0.2f64..1.5), d + 1..4 * d).prop_map(move |rows| {
        let mut hs: Vec<(Vec<f64>, f64)> = rows.into_iter().map(|(n, b)| (unit(n), b)).collect();
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[i] = s;
                hs.push((e, 2.0));
            }
        }
        ConvexBody::polytope_from(&hs, None).unwrap()
    })
}

fn body(d: usize) -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        polytope(d),
        prop::collection::vec(0.3f64..2.0, d).prop_map(|a| ConvexBody::ellipsoid(a).unwrap()),
        (0.2f64..2.0).prop_map(|r| ConvexBody::ball(r).unwrap()),
    ]
}

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_seed: RngSeed::Fixed(SEED), ..ProptestConfig::default() })]

    #[test]
    fn distance_zero_iff_contained(b in body(2), x in point(2)) {
        let inside = b.contains(&x).unwrap();
        let dist = b.distance(&x).unwrap();
        prop_assert_eq!(inside, dist == 0.0, "dist = {}", dist);
    }

    #[test]
    fn projection_is_idempotent(b in body(3), x in point(3)) {
        let p = b.project(&x).unwrap();
        let q = b.project(&p).unwrap();
        let diff: Vec<f64> = p.iter().zip(&q).map(|(a, c)| a - c).collect();
        prop_assert!(norm(&diff) <= 2.0 * PROJ_TOL);
    }

    #[test]
    fn distance_is_one_lipschitz(b in body(2), x in point(2), y in point(2)) {
        let dx = b.distance(&x).unwrap();
        let dy = b.distance(&y).unwrap();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, c)| a - c).collect();
        prop_assert!((dx - dy).abs() <= norm(&diff) + 2.0 * PROJ_TOL);
    }

    #[test]
    fn distance_is_convex_along_segments(b in body(3), x in point(3), y in point(3), lam in 0.0f64..1.0) {
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, c)| lam * a + (1.0 - lam) * c).collect();
        let lhs = b.distance(&z).unwrap();
        let rhs = lam * b.distance(&x).unwrap() + (1.0 - lam) * b.distance(&y).unwrap();
        prop_assert!(lhs <= rhs + 2.0 * PROJ_TOL, "{} > {}", lhs, rhs);
    }

    #[test]
    fn intersection_membership_is_conjunction(p in polytope(2), r in 0.3f64..2.5, x in point(2)) {
        let ball = ConvexBody::ball(r).unwrap();
        let both = ConvexBody::intersection(vec![p.clone(), ball.clone()]).unwrap();
        prop_assert_eq!(both.contains(&x).unwrap(), p.contains(&x).unwrap() && ball.contains(&x).unwrap());
    }

    #[test]
    fn lower_bound_never_exceeds_distance(b in body(2), x in point(2)) {
        prop_assert!(b.distance_lower_bound(&x) <= b.distance(&x).unwrap() + PROJ_TOL);
    }
}
