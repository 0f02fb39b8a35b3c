//! Classical fixed-step Runge–Kutta for small autonomous systems.

/// One RK4 step of size `h` for `y' = f(y)`.
pub fn rk4_step<const N: usize>(f: &mut impl FnMut(&[f64; N]) -> [f64; N], y: &[f64; N], h: f64) -> [f64; N] {
    let axpy = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&axpy(y, &k1, 0.5 * h));
    let k3 = f(&axpy(y, &k2, 0.5 * h));
    let k4 = f(&axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}
