//! Shape-preserving cubic Hermite interpolation on a uniform grid.
//!
//! Node slopes come from fourth-order finite differences and are then passed
//! through Hyman's monotonicity filter: wherever the data is locally monotone,
//! the slope is clipped so the interpolant stays monotone between nodes. At
//! data extrema the high-order slope is kept, which keeps the scheme fourth
//! order for smooth data. On a periodic grid the data wraps with period one.

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    periodic: bool,
}

impl MonotoneCubic {
    /// `xs` must be uniformly spaced with at least 5 nodes. With `periodic`,
    /// `xs` covers `[x0, x0 + 1)`.
    pub fn new(xs: &[f64], ys: &[f64], periodic: bool) -> Self {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        assert!(n >= 5, "need at least 5 nodes");
        let h = if periodic {
            1.0 / n as f64
        } else {
            (xs[n - 1] - xs[0]) / (n - 1) as f64
        };

        // wrapped or clamped access
        let y = |k: isize| -> f64 {
            if periodic {
                ys[k.rem_euclid(n as isize) as usize]
            } else {
                ys[k as usize]
            }
        };
        let secant = |k: isize| (y(k + 1) - y(k)) / h;

        let mut slopes = vec![0.0; n];
        for (k, s) in slopes.iter_mut().enumerate() {
            let k = k as isize;
            let last = n as isize - 1;
            *s = if periodic || (k >= 2 && k <= last - 2) {
                (-y(k + 2) + 8.0 * y(k + 1) - 8.0 * y(k - 1) + y(k - 2)) / (12.0 * h)
            } else if k == 0 {
                (-25.0 * y(0) + 48.0 * y(1) - 36.0 * y(2) + 16.0 * y(3) - 3.0 * y(4)) / (12.0 * h)
            } else if k == 1 {
                (-3.0 * y(0) - 10.0 * y(1) + 18.0 * y(2) - 6.0 * y(3) + y(4)) / (12.0 * h)
            } else if k == last {
                (25.0 * y(k) - 48.0 * y(k - 1) + 36.0 * y(k - 2) - 16.0 * y(k - 3) + 3.0 * y(k - 4)) / (12.0 * h)
            } else {
                (3.0 * y(k + 1) + 10.0 * y(k) - 18.0 * y(k - 1) + 6.0 * y(k - 2) - y(k - 3)) / (12.0 * h)
            };
        }

        // Hyman filter
        for (k, s) in slopes.iter_mut().enumerate() {
            let k = k as isize;
            let (left, right) = if periodic {
                (secant(k - 1), secant(k))
            } else if k == 0 {
                (secant(0), secant(0))
            } else if k == n as isize - 1 {
                (secant(k - 1), secant(k - 1))
            } else {
                (secant(k - 1), secant(k))
            };
            if left * right > 0.0 {
                let sign = right.signum();
                let bound = 3.0 * left.abs().min(right.abs());
                *s = sign * (sign * *s).clamp(0.0, bound);
            } else if left == 0.0 || right == 0.0 {
                *s = 0.0;
            }
        }

        Self {
            x0: xs[0],
            h,
            ys: ys.to_vec(),
            slopes,
            periodic,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ys.len();
        let (k, s) = if self.periodic {
            let u = (x - self.x0).rem_euclid(1.0) / self.h;
            let k = (u.floor() as usize).min(n - 1);
            (k, u - k as f64)
        } else {
            let u = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
            let k = (u.floor() as usize).min(n - 2);
            (k, u - k as f64)
        };
        let k1 = if k + 1 == n { 0 } else { k + 1 };
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[k] + h10 * self.h * self.slopes[k] + h01 * self.ys[k1] + h11 * self.h * self.slopes[k1]
    }
}
