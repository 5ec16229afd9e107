//! Shape-preserving (monotone) cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant with Fritsch–Butland slopes.
///
/// Monotone data gives a monotone interpolant, and positive data stays
/// positive between nodes. The interpolant reproduces node values exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "grid has {} abscissae but {} values",
                t.len(),
                y.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least two nodes".into()));
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid contains non-finite values".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid abscissae must be strictly increasing".into()));
        }
        let m = slopes(&t, &y);
        Ok(Self { t, y, m })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    /// Value at `x`, clamped to the end values outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.y[0];
        }
        if x >= self.t[n - 1] {
            return self.y[n - 1];
        }
        let k = self.t.partition_point(|&ti| ti <= x) - 1;
        self.hermite(k, x)
    }

    fn hermite(&self, k: usize, x: f64) -> f64 {
        let h = self.t[k + 1] - self.t[k];
        let s = (x - self.t[k]) / h;
        let one_s = 1.0 - s;
        let h00 = (1.0 + 2.0 * s) * one_s * one_s;
        let h10 = s * one_s * one_s;
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[k] + h10 * h * self.m[k] + h01 * self.y[k + 1] + h11 * h * self.m[k + 1]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] > w[0])
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] <= w[0])
    }

    /// Inverse of a strictly increasing interpolant. Returns `None` when `v`
    /// lies outside the value range.
    pub fn inverse(&self, v: f64) -> Option<f64> {
        let n = self.y.len();
        if v < self.y[0] || v > self.y[n - 1] {
            return None;
        }
        let k = (self.y.partition_point(|&yi| yi <= v)).clamp(1, n - 1) - 1;
        if v == self.y[k] {
            return Some(self.t[k]);
        }
        let (mut lo, mut hi) = (self.t[k], self.t[k + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.hermite(k, mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

fn slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_exactly() {
        let t = vec![0.0, 0.25, 1.0, 2.0];
        let y = vec![0.0, 0.5, 1.0, 1.5];
        let p = Pchip::new(t.clone(), y.clone()).unwrap();
        for (ti, yi) in t.iter().zip(&y) {
            assert_eq!(p.eval(*ti), *yi);
        }
    }

    #[test]
    fn linear_data_is_reproduced() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|v| 3.0 * v + 1.0).collect();
        let p = Pchip::new(t, y).unwrap();
        assert!((p.eval(0.537) - (3.0 * 0.537 + 1.0)).abs() < 1e-12);
        assert!((p.inverse(2.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Pchip::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            rng_seed: proptest::test_runner::RngSeed::Fixed(7),
            ..ProptestConfig::default()
        })]

        #[test]
        fn monotone_data_gives_monotone_interpolant(
            incs in proptest::collection::vec(0.01f64..2.0, 3..12),
            xs in proptest::collection::vec(0.0f64..1.0, 20),
        ) {
            let t: Vec<f64> = (0..incs.len()).map(|i| i as f64).collect();
            let y: Vec<f64> = incs.iter().scan(0.0, |acc, d| { *acc += d; Some(*acc) }).collect();
            let p = Pchip::new(t.clone(), y).unwrap();
            let span = t[t.len() - 1];
            let mut pts: Vec<f64> = xs.iter().map(|x| x * span).collect();
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                prop_assert!(p.eval(w[1]) >= p.eval(w[0]) - 1e-12);
            }
            for &x in &pts {
                let back = p.inverse(p.eval(x)).unwrap();
                prop_assert!((back - x).abs() < 1e-9);
            }
        }
    }
}
