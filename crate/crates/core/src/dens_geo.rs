//! Closed-form geodesics of the L^p-Fisher-Rao metric on positive densities.
//!
//! In root coordinates these are straight lines, so both the boundary-value
//! and the initial-value problem are solved node by node. The same curves are
//! the geodesics of the α-connection with `α = 1 − 2/p`.

use crate::error::{check_p, Error, Result};
use crate::grid::{exponents_from_alpha, fp_norm, same_grid, DensityField, PathGrid, TangentField};
use crate::p_root::{forward, push_tangent};

/// Output of the initial-value solver.
#[derive(Debug, Clone)]
pub struct DensGeodesicResult {
    pub path: PathGrid,
    /// First time at which some node reaches zero; `None` if the geodesic
    /// exists for all time.
    pub blowup_time: Option<f64>,
    /// Whether a requested time lay at or beyond `blowup_time`. The path then
    /// stops before that time.
    pub left_space: bool,
}

/// `μ(t) = (t (μ1/λ)^{1/p} + (1 − t)(μ0/λ)^{1/p})^p λ`.
pub fn geodesic_bvp_dens(mu0: &DensityField, mu1: &DensityField, p: f64, times: &[f64]) -> Result<PathGrid> {
    check_p(p)?;
    same_grid(mu0.grid(), mu1.grid())?;
    let g0 = forward(mu0, p)?;
    let g1 = forward(mu1, p)?;
    let frames = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(mu0.clone());
            }
            if t == 1.0 {
                return Ok(mu1.clone());
            }
            let values = g0
                .values()
                .iter()
                .zip(g1.values())
                .map(|(a, b)| (t * b + (1.0 - t) * a).powf(p))
                .collect();
            DensityField::new(mu0.grid().clone(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    PathGrid::new(times.to_vec(), frames)
}

/// Time at which the root-space line `g0 + t D_μΦ_p(a)` first reaches zero:
/// `p · min_{a_i < 0} f_i / (−a_i)`.
pub fn dens_blowup_time(mu0: &DensityField, a: &TangentField, p: f64) -> Result<Option<f64>> {
    check_p(p)?;
    mu0.require_positive()?;
    same_grid(mu0.grid(), a.grid())?;
    let t = mu0
        .values()
        .iter()
        .zip(a.values())
        .filter(|(_, a)| **a < 0.0)
        .map(|(f, a)| p * f / (-a))
        .fold(f64::INFINITY, f64::min);
    Ok(t.is_finite().then_some(t))
}

/// Exponential map: the geodesic with `μ(0) = μ0`, `μ_t(0) = a`.
pub fn geodesic_ivp_dens(mu0: &DensityField, a: &TangentField, p: f64, times: &[f64]) -> Result<DensGeodesicResult> {
    let blowup_time = dens_blowup_time(mu0, a, p)?;
    let g0 = forward(mu0, p)?;
    let xi = push_tangent(mu0, a, p)?;
    let limit = blowup_time.unwrap_or(f64::INFINITY);

    let mut kept_times = Vec::with_capacity(times.len());
    let mut frames = Vec::with_capacity(times.len());
    let mut left_space = false;
    for &t in times {
        if t >= limit {
            left_space = true;
            break;
        }
        let values: Vec<f64> = g0.values().iter().zip(&xi).map(|(g, x)| (g + t * x).powf(p)).collect();
        frames.push(DensityField::flagged(mu0.grid().clone(), values, false)?);
        kept_times.push(t);
    }
    Ok(DensGeodesicResult {
        path: PathGrid::new(kept_times, frames)?,
        blowup_time,
        left_space,
    })
}

/// Geodesic distance `p · ‖Φ_p(μ1) − Φ_p(μ0)‖_{L^p}`.
pub fn distance_dens(mu0: &DensityField, mu1: &DensityField, p: f64) -> Result<f64> {
    check_p(p)?;
    same_grid(mu0.grid(), mu1.grid())?;
    let g0 = forward(mu0, p)?;
    let g1 = forward(mu1, p)?;
    let diff: Vec<f64> = g1.values().iter().zip(g0.values()).map(|(b, a)| b - a).collect();
    Ok(p * mu0.grid().lp_norm(&diff, p))
}

/// L^p-Fisher-Rao length of a discrete path, using the midpoint density and
/// the forward difference on each time interval.
pub fn path_length(path: &PathGrid, p: f64) -> Result<f64> {
    check_p(p)?;
    if path.len() < 2 {
        return Err(Error::TooFewFrames {
            need: 2,
            got: path.len(),
        });
    }
    let mut length = 0.0;
    for k in 0..path.len() - 1 {
        let (a, b) = (&path.frames()[k], &path.frames()[k + 1]);
        let dt = path.times()[k + 1] - path.times()[k];
        let mid: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect();
        let vel: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (y - x) / dt).collect();
        let mid = DensityField::new(a.grid().clone(), mid)?;
        let vel = TangentField::new(a.grid().clone(), vel)?;
        length += fp_norm(&mid, &vel, p)? * dt;
    }
    Ok(length)
}

/// Frame index with the central first and second time differences there.
pub(crate) type Derivatives = Vec<(usize, Vec<f64>, Vec<f64>)>;

pub(crate) fn interior_derivatives(path: &PathGrid) -> Result<(f64, Derivatives)> {
    if path.len() < 3 {
        return Err(Error::TooFewFrames {
            need: 3,
            got: path.len(),
        });
    }
    let dt = path.uniform_step()?;
    for f in path.frames() {
        f.require_positive()?;
    }
    let frames = path.frames();
    let out = (1..path.len() - 1)
        .map(|k| {
            let (prev, cur, next) = (frames[k - 1].values(), frames[k].values(), frames[k + 1].values());
            let first = prev.iter().zip(next).map(|(a, b)| (b - a) / (2.0 * dt)).collect();
            let second = prev
                .iter()
                .zip(cur.iter().zip(next))
                .map(|(a, (c, b))| (b - 2.0 * c + a) / (dt * dt))
                .collect();
            (k, first, second)
        })
        .collect();
    Ok((dt, out))
}

/// Sup over interior times and nodes of `|d/dt(μ_t/μ) + (1/p)(μ_t/μ)²|`,
/// with time derivatives by central differences.
pub fn dens_geodesic_residual(path: &PathGrid, p: f64) -> Result<f64> {
    check_p(p)?;
    let (_, derivs) = interior_derivatives(path)?;
    let mut worst: f64 = 0.0;
    for (k, first, second) in derivs {
        let f = path.frames()[k].values();
        for i in 0..f.len() {
            let u = first[i] / f[i];
            // d/dt(μ_t/μ) = μ_tt/μ − (μ_t/μ)²
            let r = second[i] / f[i] - u * u + u * u / p;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// `∇^{(α)}_a b = Db.a − (1/p*) (a/μ) b` with `p* = 2/(1+α)`; the directional
/// derivative `Db.a` is supplied by the caller.
pub fn alpha_connection_dens(
    mu: &DensityField,
    a: &TangentField,
    b: &TangentField,
    dba: &TangentField,
    alpha: f64,
) -> Result<TangentField> {
    let (_, q) = exponents_from_alpha(alpha)?;
    mu.require_positive()?;
    for t in [a, b, dba] {
        same_grid(mu.grid(), t.grid())?;
    }
    let values = (0..mu.grid().n())
        .map(|i| dba.values()[i] - a.values()[i] / mu.values()[i] * b.values()[i] / q)
        .collect();
    TangentField::new(mu.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::sync::Arc;

    fn bump(grid: &Arc<crate::grid::GridSpec>, m: f64, s: f64) -> DensityField {
        let v = grid.sample(|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp() + 0.05);
        DensityField::new(grid.clone(), v).unwrap().normalized().0
    }

    fn uniform_times(steps: usize) -> Vec<f64> {
        (0..=steps).map(|k| k as f64 / steps as f64).collect()
    }

    #[test]
    fn bvp_constant_and_endpoints() {
        let g = GridSpec::interval(50).unwrap();
        let mu0 = bump(&g, 0.3, 0.1);
        let mu1 = bump(&g, 0.7, 0.2);
        let same = geodesic_bvp_dens(&mu0, &mu0, 3.0, &uniform_times(8)).unwrap();
        for f in same.frames() {
            for (a, b) in f.values().iter().zip(mu0.values()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        let path = geodesic_bvp_dens(&mu0, &mu1, 3.0, &uniform_times(8)).unwrap();
        assert_eq!(path.frames()[0].values(), mu0.values());
        assert_eq!(path.frames()[8].values(), mu1.values());
    }

    #[test]
    fn bvp_midpoint_p2() {
        let g = GridSpec::interval(64).unwrap();
        let mu0 = DensityField::reference(g.clone());
        let f1 = DensityField::new(g.clone(), g.sample(|x| 2.0 * x + 0.01))
            .unwrap()
            .normalized()
            .0;
        let path = geodesic_bvp_dens(&mu0, &f1, 2.0, &[0.0, 0.5, 1.0]).unwrap();
        for (v, f) in path.frames()[1].values().iter().zip(f1.values()) {
            let expected = ((f.sqrt() + 1.0) / 2.0).powi(2);
            assert!((v - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn ivp_examples() {
        let g = GridSpec::interval(40).unwrap();
        let mu0 = DensityField::reference(g.clone());
        let zero = TangentField::zeros(g.clone());
        let r = geodesic_ivp_dens(&mu0, &zero, 2.5, &uniform_times(4)).unwrap();
        assert_eq!(r.blowup_time, None);
        assert!(!r.left_space);
        assert!(r.path.frames().iter().all(|f| f.values().iter().all(|v| *v == 1.0)));

        // min a = -2, p = 3: blow-up at 3 * 1 / 2
        let a = TangentField::new(g.clone(), g.sample(|x| -2.0 + 3.0 * x)).unwrap();
        let r = geodesic_ivp_dens(&mu0, &a, 3.0, &[0.0, 1.0, 1.4, 1.5, 2.0]).unwrap();
        assert!((r.blowup_time.unwrap() - 1.5).abs() < 1e-14);
        assert!(r.left_space);
        assert_eq!(r.path.times(), &[0.0, 1.0, 1.4]);
    }

    #[test]
    fn ivp_initial_velocity() {
        let g = GridSpec::interval(40).unwrap();
        let mu0 = bump(&g, 0.4, 0.2);
        let a = TangentField::new(g.clone(), g.sample(|x| (6.0 * x).sin())).unwrap();
        let p = 3.0;
        let err = |h: f64| {
            let r = geodesic_ivp_dens(&mu0, &a, p, &[-h, 0.0, h]).unwrap();
            let fr = r.path.frames();
            fr[2]
                .values()
                .iter()
                .zip(fr[0].values())
                .zip(a.values())
                .map(|((x, y), a)| ((x - y) / (2.0 * h) - a).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-3);
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
    }

    #[test]
    fn distance_axioms() {
        let g = GridSpec::interval(80).unwrap();
        let a = bump(&g, 0.2, 0.1);
        let b = bump(&g, 0.5, 0.15);
        let c = bump(&g, 0.8, 0.3);
        for p in [1.5, 2.0, 4.0] {
            assert_eq!(distance_dens(&a, &a, p).unwrap(), 0.0);
            let ab = distance_dens(&a, &b, p).unwrap();
            assert!((ab - distance_dens(&b, &a, p).unwrap()).abs() < 1e-14);
            let bc = distance_dens(&b, &c, p).unwrap();
            let ac = distance_dens(&a, &c, p).unwrap();
            assert!(ac <= ab + bc + 1e-14);
        }
    }

    #[test]
    fn distance_matches_path_length() {
        let g = GridSpec::interval(100).unwrap();
        let a = bump(&g, 0.25, 0.1);
        let b = bump(&g, 0.7, 0.2);
        for p in [1.5, 2.0, 3.0, 6.0] {
            let path = geodesic_bvp_dens(&a, &b, p, &uniform_times(200)).unwrap();
            let len = path_length(&path, p).unwrap();
            let d = distance_dens(&a, &b, p).unwrap();
            assert!((len - d).abs() / d < 5e-3, "p={p}: {len} vs {d}");
        }
    }

    #[test]
    fn residual_second_order() {
        let g = GridSpec::interval(60).unwrap();
        let a = bump(&g, 0.25, 0.1);
        let b = bump(&g, 0.7, 0.2);
        let p = 3.0;
        let r64 = dens_geodesic_residual(&geodesic_bvp_dens(&a, &b, p, &uniform_times(64)).unwrap(), p).unwrap();
        let r128 = dens_geodesic_residual(&geodesic_bvp_dens(&a, &b, p, &uniform_times(128)).unwrap(), p).unwrap();
        assert!((r64 / r128 - 4.0).abs() < 0.3, "{}", r64 / r128);

        let constant = geodesic_bvp_dens(&a, &a, p, &uniform_times(10)).unwrap();
        assert!(dens_geodesic_residual(&constant, p).unwrap() < 1e-9);

        // straight-line interpolation of densities is not a geodesic
        let times = uniform_times(64);
        let frames = times
            .iter()
            .map(|t| {
                let v = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect();
                DensityField::new(g.clone(), v).unwrap()
            })
            .collect();
        let line = PathGrid::new(times, frames).unwrap();
        assert!(dens_geodesic_residual(&line, p).unwrap() > 0.1);
    }

    #[test]
    fn too_few_frames() {
        let g = GridSpec::interval(10).unwrap();
        let mu = DensityField::reference(g);
        let path = geodesic_bvp_dens(&mu, &mu, 2.0, &[0.0, 1.0]).unwrap();
        assert_eq!(
            dens_geodesic_residual(&path, 2.0),
            Err(Error::TooFewFrames { need: 3, got: 2 })
        );
    }

    #[test]
    fn alpha_connection_vanishes_along_geodesic() {
        let g = GridSpec::interval(40).unwrap();
        let a0 = bump(&g, 0.3, 0.1);
        let b0 = bump(&g, 0.6, 0.25);
        let p = 4.0;
        let alpha = 1.0 - 2.0 / p;
        let h = 1e-3;
        let path = geodesic_bvp_dens(&a0, &b0, p, &[0.5 - h, 0.5, 0.5 + h]).unwrap();
        let fr = path.frames();
        let mu = &fr[1];
        let vel: Vec<f64> = (0..40)
            .map(|i| (fr[2].values()[i] - fr[0].values()[i]) / (2.0 * h))
            .collect();
        let acc: Vec<f64> = (0..40)
            .map(|i| (fr[2].values()[i] - 2.0 * fr[1].values()[i] + fr[0].values()[i]) / (h * h))
            .collect();
        let v = TangentField::new(g.clone(), vel).unwrap();
        let dv = TangentField::new(g.clone(), acc).unwrap();
        let out = alpha_connection_dens(mu, &v, &v, &dv, alpha).unwrap();
        let scale = dv.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(out.values().iter().all(|x| x.abs() < 1e-5 * scale.max(1.0)));

        let zero = TangentField::zeros(g.clone());
        let out = alpha_connection_dens(mu, &v, &zero, &zero, alpha).unwrap();
        assert!(out.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn alpha_connection_coefficient() {
        let g = GridSpec::interval(8).unwrap();
        let mu = DensityField::new(g.clone(), vec![2.0; 8]).unwrap();
        let a = TangentField::new(g.clone(), vec![3.0; 8]).unwrap();
        let b = TangentField::new(g.clone(), vec![5.0; 8]).unwrap();
        let d = TangentField::new(g.clone(), vec![1.0; 8]).unwrap();
        let p = 4.0;
        let out = alpha_connection_dens(&mu, &a, &b, &d, 1.0 - 2.0 / p).unwrap();
        let expected = 1.0 - (p - 1.0) / p * (3.0 / 2.0) * 5.0;
        assert!((out.values()[0] - expected).abs() < 1e-14);
    }
}
