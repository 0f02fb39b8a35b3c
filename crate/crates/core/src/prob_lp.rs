//! L^p-Fisher-Rao geodesics between probability densities by discrete energy
//! minimization.
//!
//! A path of root points `g_0, …, g_{T−1}` on the unit sphere `S_p` carries the
//! discrete p-energy `(1/p) Σ_t Δt^{1−p} ‖g_{t+1} − g_t‖_p^p`. Minimizers with
//! fixed endpoints approximate L^p-Fisher-Rao geodesics. The solver runs
//! projected gradient descent: a gradient step on the interior frames followed
//! by radial projection `g ↦ g/‖g‖_p` of each frame.

use std::sync::Arc;

use crate::error::{check_p, Error, Result};
use crate::grid::{fp_norm, same_grid, DensityField, GridSpec, PathGrid, TangentField};
use crate::p_root::forward;

/// Tolerance on `‖g_t‖_p^p − 1` for every frame of a [`SpherePath`].
pub const SPHERE_TOL: f64 = 1e-10;

/// A discrete path on `S_p` over uniform times on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePath {
    grid: Arc<GridSpec>,
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    p: f64,
}

fn uniform_times(t_steps: usize) -> Vec<f64> {
    let m = (t_steps - 1) as f64;
    (0..t_steps).map(|k| k as f64 / m).collect()
}

fn pth_power_norm(weights: &[f64], g: &[f64], p: f64) -> f64 {
    weights.iter().zip(g).map(|(w, v)| w * pow_abs(*v, p)).sum()
}

/// `|x|^p`, with an integer fast path.
#[inline]
fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == p.trunc() && p <= 16.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

fn project(weights: &[f64], g: &mut [f64], p: f64) {
    let norm = pth_power_norm(weights, g, p).powf(1.0 / p);
    for v in g.iter_mut() {
        *v /= norm;
    }
}

impl SpherePath {
    /// `points[t]` holds the node values of frame `t`; times are uniform on
    /// `[0, 1]`.
    pub fn new(grid: Arc<GridSpec>, points: Vec<Vec<f64>>, p: f64) -> Result<Self> {
        check_p(p)?;
        if points.len() < 2 {
            return Err(Error::TooFewFrames {
                need: 2,
                got: points.len(),
            });
        }
        for g in &points {
            grid.check_len(g)?;
            let defect = pth_power_norm(grid.weights(), g, p) - 1.0;
            if !(defect.abs() <= SPHERE_TOL) {
                return Err(Error::Format(format!("frame is off the unit L^p sphere by {defect:e}")));
            }
        }
        Ok(Self {
            times: uniform_times(points.len()),
            grid,
            points,
            p,
        })
    }

    /// The radially projected chord `(f + t(g − f))/‖f + t(g − f)‖_p`.
    pub fn chord(mu0: &DensityField, mu1: &DensityField, p: f64, t_steps: usize) -> Result<Self> {
        check_p(p)?;
        same_grid(mu0.grid(), mu1.grid())?;
        if t_steps < 2 {
            return Err(Error::TooFewFrames { need: 2, got: t_steps });
        }
        let f = forward(mu0, p)?;
        let g = forward(mu1, p)?;
        let grid = mu0.grid().clone();
        let times = uniform_times(t_steps);
        let points = times
            .iter()
            .map(|&t| {
                let mut h: Vec<f64> = f
                    .values()
                    .iter()
                    .zip(g.values())
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                project(grid.weights(), &mut h, p);
                h
            })
            .collect();
        Self::new(grid, points, p)
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pullback `|g|^p λ` frame by frame; nonpositive root values are flagged.
    pub fn to_path(&self) -> Result<PathGrid> {
        let frames = self
            .points
            .iter()
            .map(|g| {
                let values = g.iter().map(|v| pow_abs(*v, self.p)).collect();
                let nonpositive = g
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !(**v > 0.0))
                    .map(|(i, _)| i)
                    .collect();
                DensityField::with_flags(self.grid.clone(), values, true, nonpositive)
            })
            .collect();
        PathGrid::new(self.times.clone(), frames)
    }

    fn dt(&self) -> f64 {
        1.0 / (self.points.len() - 1) as f64
    }
}

fn energy_raw(weights: &[f64], points: &[Vec<f64>], dt: f64, p: f64) -> f64 {
    let scale = dt.powf(1.0 - p) / p;
    let total: f64 = points
        .windows(2)
        .map(|w| {
            weights
                .iter()
                .zip(w[0].iter().zip(&w[1]))
                .map(|(wt, (a, b))| wt * pow_abs(b - a, p))
                .sum::<f64>()
        })
        .sum();
    scale * total
}

#[inline]
fn signed_pow(x: f64, q: f64) -> f64 {
    // |x|^q sign(x), with q = p − 1 > 0
    if x == 0.0 {
        0.0
    } else {
        pow_abs(x, q) * x.signum()
    }
}

fn gradient_raw(weights: &[f64], points: &[Vec<f64>], dt: f64, p: f64) -> Vec<Vec<f64>> {
    let t_len = points.len();
    let n = weights.len();
    let scale = dt.powf(1.0 - p);
    let mut grad = vec![vec![0.0; n]; t_len];
    for t in 1..t_len.saturating_sub(1) {
        let (prev, cur, next) = (&points[t - 1], &points[t], &points[t + 1]);
        for i in 0..n {
            grad[t][i] =
                weights[i] * scale * (signed_pow(cur[i] - prev[i], p - 1.0) - signed_pow(next[i] - cur[i], p - 1.0));
        }
    }
    grad
}

/// L²(λ) representer of the energy gradient with its component along
/// `|g|^{p−2} g` removed, so that it is tangent to `S_p` at each frame.
fn descent_direction(weights: &[f64], points: &[Vec<f64>], dt: f64, p: f64) -> Vec<Vec<f64>> {
    let mut dir = gradient_raw(weights, points, dt, p);
    for (d, g) in dir.iter_mut().zip(points).skip(1) {
        for (v, w) in d.iter_mut().zip(weights) {
            *v /= w;
        }
        let along: f64 = weights
            .iter()
            .zip(d.iter().zip(g))
            .map(|(w, (v, x))| w * v * signed_pow(*x, p - 1.0))
            .sum();
        for (v, x) in d.iter_mut().zip(g) {
            *v -= along * x;
        }
    }
    dir
}

/// `(1/p) Σ_t Δt^{1−p} Σ_i w_i |g_{t+1,i} − g_{t,i}|^p`.
pub fn discrete_p_energy(path: &SpherePath) -> f64 {
    energy_raw(path.grid.weights(), &path.points, path.dt(), path.p)
}

/// Gradient of [`discrete_p_energy`] with respect to the node values; the
/// rows of the two endpoint frames are zero.
pub fn energy_gradient(path: &SpherePath) -> Result<Vec<Vec<f64>>> {
    if path.len() < 3 {
        return Err(Error::TooFewFrames {
            need: 3,
            got: path.len(),
        });
    }
    Ok(gradient_raw(path.grid.weights(), &path.points, path.dt(), path.p))
}

/// Settings for [`lp_geodesic_prob_bvp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBvpOptions {
    /// Number of time frames including both endpoints.
    pub t_steps: usize,
    pub max_iter: usize,
    /// Stop once the relative energy decrease of an accepted step drops below this.
    pub tol: f64,
    /// Initial gradient step.
    pub eta0: f64,
}

impl Default for LpBvpOptions {
    fn default() -> Self {
        Self {
            t_steps: 30,
            max_iter: 20_000,
            tol: 1e-8,
            eta0: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerStatus {
    Converged,
    MaxIter,
    /// No energy decrease even at the smallest step; the last iterate is returned.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct LpGeodesicResult {
    pub sphere: SpherePath,
    /// Pullback of `sphere` to densities.
    pub path: PathGrid,
    /// Energy of the initial chord followed by the energy after each accepted step.
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
    pub status: MinimizerStatus,
}

const MAX_HALVINGS: usize = 200;

/// Minimizes the discrete p-energy among paths on `S_p` from `Φ_p(μ0)` to
/// `Φ_p(μ1)`, starting from the projected chord.
pub fn lp_geodesic_prob_bvp(
    mu0: &DensityField,
    mu1: &DensityField,
    p: f64,
    options: &LpBvpOptions,
) -> Result<LpGeodesicResult> {
    if !mu0.is_probability() || !mu1.is_probability() {
        return Err(Error::NotProbability);
    }
    if !(options.eta0 > 0.0) {
        return Err(Error::InvalidStep(options.eta0));
    }
    let mut sphere = SpherePath::chord(mu0, mu1, p, options.t_steps)?;
    let weights = sphere.grid.weights().to_vec();
    let dt = sphere.dt();
    let mut energy = discrete_p_energy(&sphere);
    let mut trace = vec![energy];

    if energy == 0.0 || sphere.len() < 3 {
        let path = endpoint_exact(&sphere, mu0, mu1)?;
        return Ok(LpGeodesicResult {
            sphere,
            path,
            energy_trace: trace,
            iterations: 0,
            status: MinimizerStatus::Converged,
        });
    }

    let mut eta = options.eta0;
    let mut status = MinimizerStatus::MaxIter;
    let mut iterations = 0;
    let mut trial = sphere.points.clone();
    while iterations < options.max_iter {
        let grad = descent_direction(&weights, &sphere.points, dt, p);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for t in 1..trial.len() - 1 {
                for (i, v) in trial[t].iter_mut().enumerate() {
                    *v = sphere.points[t][i] - eta * grad[t][i];
                }
                project(&weights, &mut trial[t], p);
            }
            let e = energy_raw(&weights, &trial, dt, p);
            if e < energy {
                accepted = Some(e);
                break;
            }
            eta *= 0.5;
        }
        let Some(e) = accepted else {
            status = MinimizerStatus::Stalled;
            break;
        };
        std::mem::swap(&mut sphere.points, &mut trial);
        iterations += 1;
        trace.push(e);
        let decrease = (energy - e) / energy;
        energy = e;
        if decrease < options.tol {
            status = MinimizerStatus::Converged;
            break;
        }
        eta *= 2.0;
    }

    let path = endpoint_exact(&sphere, mu0, mu1)?;
    Ok(LpGeodesicResult {
        sphere,
        path,
        energy_trace: trace,
        iterations,
        status,
    })
}

/// Pullback whose end frames are exactly `μ0` and `μ1`.
fn endpoint_exact(sphere: &SpherePath, mu0: &DensityField, mu1: &DensityField) -> Result<PathGrid> {
    let mut frames = sphere.to_path()?.frames().to_vec();
    let last = frames.len() - 1;
    frames[0] = mu0.clone();
    frames[last] = mu1.clone();
    PathGrid::new(sphere.times.clone(), frames)
}

/// `F_p(μ(t), μ_t(t))` at every interior time, with central differences.
pub fn speed_profile(path: &PathGrid, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    let (_, derivs) = crate::dens_geo::interior_derivatives(path)?;
    derivs
        .into_iter()
        .map(|(k, first, _)| {
            let frame = &path.frames()[k];
            let a = TangentField::new(frame.grid().clone(), first)?;
            fp_norm(frame, &a, p)
        })
        .collect()
}
