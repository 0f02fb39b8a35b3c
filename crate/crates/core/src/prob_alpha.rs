//! α-connection geodesics on probability densities.
//!
//! In root coordinates a geodesic of the p-connection on the unit sphere `S_p`
//! is the radial projection of a straight line, `γ(t) = (f + τ(t)ξ)/‖f + τ(t)ξ‖_p`,
//! run with a time change `τ` that solves
//!
//! ```text
//! τ'' = 2 (∫ |f+τξ|^{p−2}(f+τξ) ξ λ / ∫ |f+τξ|^p λ) τ'²,   τ(0) = 0.
//! ```
//!
//! Pulling `γ` back through the p-root transform gives the α-geodesic with
//! `α = 1 − 2/p`. The curve leaves the probability densities once `f + τξ`
//! touches zero somewhere.

use crate::dens_geo::{interior_derivatives, DensGeodesicResult};
use crate::error::{check_p, Error, Result};
use crate::grid::{same_grid, DensityField, GridSpec, PathGrid, TangentField};
use crate::ode::rk4_step;
use crate::p_root::{forward, push_tangent, RootPoint};

/// Default RK4 step for the τ equation.
pub const DEFAULT_TAU_STEP: f64 = 1e-3;

const SHOOT_TOL: f64 = 1e-10;
const EXIT_TIME_TOL: f64 = 1e-10;

/// A sampled solution of the τ equation.
#[derive(Debug, Clone, PartialEq)]
pub struct TauTrajectory {
    pub times: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_dot: Vec<f64>,
    pub p: f64,
    /// Time at which `f + τξ` first lost positivity, if it did.
    pub exit_time: Option<f64>,
}

struct TauProblem<'a> {
    weights: &'a [f64],
    f: &'a [f64],
    xi: &'a [f64],
    p: f64,
    /// `τ` at which the line first touches zero.
    crossing: f64,
}

impl<'a> TauProblem<'a> {
    fn new(grid: &'a GridSpec, f: &'a [f64], xi: &'a [f64], p: f64) -> Self {
        let crossing = f
            .iter()
            .zip(xi)
            .filter(|(_, x)| **x < 0.0)
            .map(|(f, x)| -f / x)
            .fold(f64::INFINITY, f64::min);
        Self {
            weights: grid.weights(),
            f,
            xi,
            p,
            crossing,
        }
    }

    fn accel(&self, tau: f64, tau_dot: f64) -> Result<f64> {
        let p = self.p;
        let (mut num, mut den) = (0.0, 0.0);
        for ((w, f), x) in self.weights.iter().zip(self.f).zip(self.xi) {
            let h = f + tau * x;
            let a = h.abs();
            let ap2 = a.powf(p - 2.0);
            // |h|^{p−2} h with the p < 2 singularity at h = 0 removed
            let sgn_pow = if a == 0.0 { 0.0 } else { ap2 * h };
            num += w * sgn_pow * x;
            den += w * ap2 * a * a;
        }
        if !(den >= 1e-14) {
            return Err(Error::DegenerateDenominator(den));
        }
        Ok(2.0 * num / den * tau_dot * tau_dot)
    }

    fn step(&self, y: &[f64; 2], h: f64) -> Result<[f64; 2]> {
        let mut failure = None;
        let mut rhs = |y: &[f64; 2]| match self.accel(y[0], y[1]) {
            Ok(a) => [y[1], a],
            Err(e) => {
                failure.get_or_insert(e);
                [f64::NAN, f64::NAN]
            }
        };
        let next = rk4_step(&mut rhs, y, h);
        match failure {
            Some(e) => Err(e),
            None => Ok(next),
        }
    }

    /// Integrates from `τ(0) = 0`, `τ'(0) = tau_dot0`, recording the state at
    /// each of the increasing `outputs`. With `stop_at_exit`, integration ends
    /// at the first loss of positivity and the exit time is returned.
    fn integrate(
        &self,
        tau_dot0: f64,
        outputs: &[f64],
        dt: f64,
        stop_at_exit: bool,
    ) -> Result<(Vec<[f64; 2]>, Option<f64>)> {
        let mut t = 0.0;
        let mut y = [0.0, tau_dot0];
        let mut states = Vec::with_capacity(outputs.len());
        for &target in outputs {
            while t < target {
                let h = dt.min(target - t);
                let next = self.step(&y, h)?;
                if !next[0].is_finite() || !next[1].is_finite() {
                    return Ok((states, None));
                }
                if stop_at_exit && next[0] >= self.crossing {
                    let s = self.locate_exit(&y, h)?;
                    return Ok((states, Some(t + s)));
                }
                y = next;
                // avoid creeping drift on exact output times
                t = if h == target - t { target } else { t + h };
            }
            states.push(y);
        }
        Ok((states, None))
    }

    /// Sub-step length `s ∈ (0, h]` at which `τ` reaches the crossing value.
    fn locate_exit(&self, y: &[f64; 2], h: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > EXIT_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if self.step(y, mid)?[0] >= self.crossing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Right-hand side `τ''` of the τ equation at `(τ, τ')`.
pub fn tau_rhs(f: &RootPoint, xi: &[f64], tau: f64, tau_dot: f64) -> Result<f64> {
    f.grid().check_len(xi)?;
    TauProblem::new(f.grid(), f.values(), xi, f.p()).accel(tau, tau_dot)
}

/// `∫ ξ |f|^{p−2} f λ`, which vanishes when `ξ` is tangent to `S_p` at `f`.
pub fn sphere_tangency_defect(f: &RootPoint, xi: &[f64]) -> Result<f64> {
    f.grid().check_len(xi)?;
    let p = f.p();
    Ok(f.grid()
        .weights()
        .iter()
        .zip(f.values().iter().zip(xi))
        .map(|(w, (g, x))| w * x * g.abs().powf(p - 2.0) * g)
        .sum())
}

fn check_tangent(f: &RootPoint, xi: &[f64]) -> Result<()> {
    let defect = sphere_tangency_defect(f, xi)?;
    let scale = f.grid().lp_norm(xi, f.p()).max(1.0);
    if defect.abs() > 1e-8 * scale {
        Err(Error::NotTangent(defect))
    } else {
        Ok(())
    }
}

fn step_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut out: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).min(t_end)).collect();
    out.dedup();
    out
}

/// Initial-value problem `τ(0) = 0`, `τ'(0) = 1`, fixed RK4 step `dt`, up to
/// `t_end` or the first loss of positivity of `f + τξ`.
pub fn tau_ivp(f: &RootPoint, xi: &[f64], t_end: f64, dt: f64) -> Result<TauTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidStep(dt));
    }
    check_tangent(f, xi)?;
    let problem = TauProblem::new(f.grid(), f.values(), xi, f.p());
    let outputs = step_grid(t_end, dt);
    let (states, exit_time) = problem.integrate(1.0, &outputs, dt, true)?;
    let kept = states.len();
    Ok(TauTrajectory {
        times: outputs[..kept].to_vec(),
        tau: states.iter().map(|s| s[0]).collect(),
        tau_dot: states.iter().map(|s| s[1]).collect(),
        p: f.p(),
        exit_time,
    })
}

/// Result of the shooting solve for `τ'(0)`.
#[derive(Debug, Clone, Copy)]
struct Shot {
    tau_dot0: f64,
}

fn shoot(problem: &TauProblem, dt: f64) -> Result<Shot> {
    let miss = |c: f64| -> Result<f64> {
        let (states, _) = problem.integrate(c, &[1.0], dt, false)?;
        Ok(match states.first() {
            Some(s) if s[0].is_finite() => s[0] - 1.0,
            // blew up before t = 1: overshoot
            _ => f64::INFINITY,
        })
    };

    let (mut a, mut b) = (0.5, 1.5);
    let (mut fa, mut fb) = (miss(a)?, miss(b)?);
    // τ(1) increases with τ'(0); widen until the root is bracketed
    let mut widen = 0;
    while fa > 0.0 && widen < 60 {
        b = a;
        fb = fa;
        a *= 0.5;
        fa = miss(a)?;
        widen += 1;
    }
    while fb < 0.0 && widen < 60 {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = miss(b)?;
        widen += 1;
    }
    if !(fa <= 0.0 && fb >= 0.0) {
        return Err(Error::ShootingFailed(format!(
            "no bracket for tau'(0): last bracket [{a}, {b}] with misses [{fa}, {fb}]"
        )));
    }
    if fa.abs() <= SHOOT_TOL {
        return Ok(Shot { tau_dot0: a });
    }
    if fb.abs() <= SHOOT_TOL {
        return Ok(Shot { tau_dot0: b });
    }

    // secant steps, falling back to bisection when they leave the bracket
    let (mut lo, mut hi, mut flo, mut fhi) = (a, b, fa, fb);
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    for _ in 0..200 {
        let mut x = if f1.is_finite() && f0.is_finite() && f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            f64::NAN
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = miss(x)?;
        if fx.abs() <= SHOOT_TOL {
            return Ok(Shot { tau_dot0: x });
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Err(Error::ShootingFailed(format!(
        "no convergence: bracket [{lo}, {hi}] with misses [{flo}, {fhi}]"
    )))
}

fn uniform_times(t_steps: usize) -> Vec<f64> {
    let m = t_steps.max(2) - 1;
    (0..=m).map(|k| k as f64 / m as f64).collect()
}

/// Boundary-value problem `τ(0) = 0`, `τ(1) = 1` for `ξ = g − f`, solved by
/// shooting on `τ'(0)`. Returns the trajectory at `t_steps` uniform times.
pub fn tau_bvp(f: &RootPoint, g: &RootPoint, t_steps: usize) -> Result<TauTrajectory> {
    same_grid(f.grid(), g.grid())?;
    let times = uniform_times(t_steps);
    let xi: Vec<f64> = g.values().iter().zip(f.values()).map(|(b, a)| b - a).collect();
    if xi.iter().all(|x| *x == 0.0) {
        return Ok(TauTrajectory {
            tau: times.clone(),
            tau_dot: vec![1.0; times.len()],
            times,
            p: f.p(),
            exit_time: None,
        });
    }
    let problem = TauProblem::new(f.grid(), f.values(), &xi, f.p());
    let shot = shoot(&problem, DEFAULT_TAU_STEP)?;
    let (states, _) = problem.integrate(shot.tau_dot0, &times, DEFAULT_TAU_STEP, false)?;
    Ok(TauTrajectory {
        times,
        tau: states.iter().map(|s| s[0]).collect(),
        tau_dot: states.iter().map(|s| s[1]).collect(),
        p: f.p(),
        exit_time: None,
    })
}

/// What determines an α-geodesic on the probability densities.
#[derive(Debug, Clone)]
pub enum AlphaTarget {
    /// Boundary-value problem towards this probability density.
    Endpoint(DensityField),
    /// Initial-value problem with this mean-zero velocity.
    Velocity(TangentField),
}

fn sphere_frame(grid: &std::sync::Arc<GridSpec>, f: &[f64], xi: &[f64], tau: f64, p: f64) -> DensityField {
    let h: Vec<f64> = f.iter().zip(xi).map(|(a, b)| a + tau * b).collect();
    let norm = grid.lp_norm(&h, p);
    let nonpositive = h
        .iter()
        .enumerate()
        .filter(|(_, v)| !(**v > 0.0))
        .map(|(i, _)| i)
        .collect();
    let values = h.iter().map(|v| (v.abs() / norm).powf(p)).collect();
    DensityField::with_flags(grid.clone(), values, true, nonpositive)
}

/// α-geodesic (`α = 1 − 2/p`) on the probability densities, as the pullback
/// of a τ-reparametrized projected line on `S_p`.
pub fn alpha_geodesic_prob(
    mu0: &DensityField,
    target: &AlphaTarget,
    p: f64,
    times: &[f64],
) -> Result<DensGeodesicResult> {
    check_p(p)?;
    if !mu0.is_probability() {
        return Err(Error::NotProbability);
    }
    if times.iter().any(|t| *t < 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Format("times must be nonnegative and increasing".into()));
    }
    let grid = mu0.grid();
    let f = forward(mu0, p)?;

    match target {
        AlphaTarget::Endpoint(mu1) => {
            if !mu1.is_probability() {
                return Err(Error::NotProbability);
            }
            same_grid(grid, mu1.grid())?;
            let g = forward(mu1, p)?;
            let xi: Vec<f64> = g.values().iter().zip(f.values()).map(|(b, a)| b - a).collect();
            let problem = TauProblem::new(grid, f.values(), &xi, p);
            let tau_dot0 = if xi.iter().all(|x| *x == 0.0) {
                1.0
            } else {
                shoot(&problem, DEFAULT_TAU_STEP)?.tau_dot0
            };
            let (states, _) = problem.integrate(tau_dot0, times, DEFAULT_TAU_STEP, false)?;
            if states.len() != times.len() {
                return Err(Error::ShootingFailed("tau diverged on the requested times".into()));
            }
            let frames = states
                .iter()
                .zip(times)
                .map(|(s, &t)| {
                    // the endpoints are reproduced exactly
                    if t == 0.0 {
                        mu0.clone()
                    } else if t == 1.0 {
                        mu1.clone()
                    } else {
                        sphere_frame(grid, f.values(), &xi, s[0], p)
                    }
                })
                .collect();
            let path = PathGrid::new(times.to_vec(), frames)?;
            let left_space = path.frames().iter().any(|fr| !fr.is_positive());
            Ok(DensGeodesicResult {
                path,
                blowup_time: None,
                left_space,
            })
        }
        AlphaTarget::Velocity(a) => {
            same_grid(grid, a.grid())?;
            let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if a.integral().abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::NotTangent(a.integral()));
            }
            let xi = push_tangent(mu0, a, p)?;
            check_tangent(&f, &xi)?;
            let problem = TauProblem::new(grid, f.values(), &xi, p);
            // τ ≥ t, so the exit happens before the line's own crossing time
            let horizon = problem.crossing;
            let mut outputs: Vec<f64> = times.iter().copied().filter(|t| *t < horizon).collect();
            let last_requested = outputs.last().copied().unwrap_or(0.0);
            if horizon.is_finite() && horizon > last_requested {
                outputs.push(horizon);
            }
            let (states, exit_time) = problem.integrate(1.0, &outputs, DEFAULT_TAU_STEP, true)?;
            let n_frames = states
                .len()
                .min(times.len())
                .min(times.iter().take_while(|t| exit_time.is_none_or(|e| **t < e)).count());
            let frames = (0..n_frames)
                .map(|k| sphere_frame(grid, f.values(), &xi, states[k][0], p))
                .collect();
            let path = PathGrid::new(times[..n_frames].to_vec(), frames)?;
            Ok(DensGeodesicResult {
                path,
                blowup_time: exit_time,
                left_space: n_frames < times.len(),
            })
        }
    }
}

/// Upper bound `p / (−min a/λ)` for the exit time of the α-geodesic from the
/// reference density with initial velocity `a`.
pub fn blowup_estimate(a: &TangentField, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.values().iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroTangent);
    }
    let min = a.values().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if min < 0.0 { p / (-min) } else { f64::INFINITY })
}

/// Sup-norm defect of `μ_tt − (1/p*) μ_t²/μ + (1/p*)(∫ (μ_t/μ)² μ) μ` with
/// central differences in time.
pub fn prob_alpha_residual(path: &PathGrid, p: f64) -> Result<f64> {
    check_p(p)?;
    let (_, derivs) = interior_derivatives(path)?;
    let c = (p - 1.0) / p;
    let mut worst: f64 = 0.0;
    for (k, first, second) in derivs {
        let frame = &path.frames()[k];
        let f = frame.values();
        let energy = frame.grid().sum(first.iter().zip(f).map(|(v, m)| v * v / m));
        for i in 0..f.len() {
            let r = second[i] - c * first[i] * first[i] / f[i] + c * energy * f[i];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn bump(grid: &Arc<GridSpec>, m: f64, s: f64) -> DensityField {
        let v = grid.sample(|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp() + 0.05);
        DensityField::new(grid.clone(), v).unwrap().normalized().0
    }

    /// A mean-zero direction with unit L² norm.
    fn unit_sine(grid: &Arc<GridSpec>) -> Vec<f64> {
        let v = TangentField::new(grid.clone(), grid.sample(|x| (2.0 * PI * x).sin()))
            .unwrap()
            .mean_free();
        let norm = grid.lp_norm(v.values(), 2.0);
        v.values().iter().map(|x| x / norm).collect()
    }

    #[test]
    fn rhs_examples() {
        let g = GridSpec::interval(100).unwrap();
        let f = forward(&DensityField::reference(g.clone()), 2.0).unwrap();
        let zero = vec![0.0; 100];
        assert_eq!(tau_rhs(&f, &zero, 0.3, 1.2).unwrap(), 0.0);
        let xi = unit_sine(&g);
        assert!(tau_rhs(&f, &xi, 0.0, 1.0).unwrap().abs() < 1e-14);
        for (tau, td) in [(0.3, 1.0), (1.2, 0.7), (-0.4, 2.0)] {
            let expected = 2.0 * tau / (1.0 + tau * tau) * td * td;
            assert!((tau_rhs(&f, &xi, tau, td).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_degenerate_denominator() {
        let g = GridSpec::interval(10).unwrap();
        let f = RootPoint::new(g.clone(), vec![1.0; 10], 2.0, true).unwrap();
        let xi = vec![-1.0; 10];
        assert!(matches!(
            tau_rhs(&f, &xi, 1.0, 1.0),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn tan_solution_at_p2() {
        let g = GridSpec::interval(100).unwrap();
        let f = forward(&DensityField::reference(g.clone()), 2.0).unwrap();
        // unit sine reaches zero at τ = 1/max|ξ| ≈ 0.707, beyond tan(1)
        let xi: Vec<f64> = unit_sine(&g).iter().map(|x| 0.5 * x).collect();
        let norm = g.lp_norm(&xi, 2.0);
        let xi: Vec<f64> = xi.iter().map(|x| x / norm).collect();
        let traj = tau_ivp(&f, &xi, 1.0, 1e-3).unwrap();
        if traj.exit_time.is_none() {
            let last = *traj.times.last().unwrap();
            assert!((last - 1.0).abs() < 1e-12);
        }
        let err = traj
            .times
            .iter()
            .zip(&traj.tau)
            .map(|(t, tau)| (tau - t.tan()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn zero_direction_gives_identity() {
        let g = GridSpec::interval(20).unwrap();
        let f = forward(&DensityField::reference(g.clone()), 3.0).unwrap();
        let traj = tau_ivp(&f, &[0.0; 20], 0.5, 0.01).unwrap();
        for (t, tau) in traj.times.iter().zip(&traj.tau) {
            assert!((t - tau).abs() < 1e-15);
        }
    }

    #[test]
    fn ivp_rejects_bad_inputs() {
        let g = GridSpec::interval(20).unwrap();
        let f = forward(&DensityField::reference(g.clone()), 3.0).unwrap();
        assert_eq!(tau_ivp(&f, &[0.0; 20], 0.5, 0.0), Err(Error::InvalidStep(0.0)));
        assert!(matches!(tau_ivp(&f, &[1.0; 20], 0.5, 0.01), Err(Error::NotTangent(_))));
    }

    /// Independent oracle: the τ equation integrates to `τ' = c N(τ)²/N(0)²`
    /// with `N(τ) = ‖f + τξ‖_p`, so `t(τ) = (N(0)²/c) ∫_0^τ N(s)^{-2} ds`.
    fn time_to_reach(grid: &GridSpec, f: &[f64], xi: &[f64], p: f64, c: f64, tau: f64) -> f64 {
        let norm = |s: f64| {
            let h: Vec<f64> = f.iter().zip(xi).map(|(a, b)| a + s * b).collect();
            grid.lp_norm(&h, p)
        };
        let m = 4000;
        let h = tau / m as f64;
        let integrand = |s: f64| norm(s).powi(-2);
        let mut acc = integrand(0.0) + integrand(tau);
        for k in 1..m {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(k as f64 * h);
        }
        norm(0.0).powi(2) / c * acc * h / 3.0
    }

    #[test]
    fn ivp_matches_first_integral() {
        let g = GridSpec::interval(80).unwrap();
        let mu = bump(&g, 0.4, 0.15);
        let p = 3.0;
        let f = forward(&mu, p).unwrap();
        let a = TangentField::new(g.clone(), g.sample(|x| (3.0 * x).cos()))
            .unwrap()
            .mean_free();
        let xi = push_tangent(&mu, &a, p).unwrap();
        let traj = tau_ivp(&f, &xi, 0.6, 1e-3).unwrap();
        for k in (50..traj.times.len()).step_by(100) {
            let t = time_to_reach(&g, f.values(), &xi, p, 1.0, traj.tau[k]);
            assert!((t - traj.times[k]).abs() < 1e-8, "{t} vs {}", traj.times[k]);
        }
        // τ ≥ t and τ increasing
        assert!(traj.times.iter().zip(&traj.tau).all(|(t, tau)| *tau >= *t - 1e-14));
        assert!(traj.tau.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bvp_identity_and_monotone() {
        let g = GridSpec::interval(60).unwrap();
        let mu = bump(&g, 0.4, 0.15);
        let f = forward(&mu, 3.0).unwrap();
        let same = tau_bvp(&f, &f, 11).unwrap();
        assert!(same.times.iter().zip(&same.tau).all(|(t, tau)| t == tau));

        let nu = bump(&g, 0.7, 0.1);
        let gr = forward(&nu, 3.0).unwrap();
        let traj = tau_bvp(&f, &gr, 31).unwrap();
        assert!(traj.tau.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.tau[30] - 1.0).abs() < 1e-10);
        assert_eq!(traj.tau[0], 0.0);
    }

    #[test]
    fn bvp_matches_great_circle_at_p2() {
        let g = GridSpec::interval(100).unwrap();
        let mu0 = DensityField::reference(g.clone());
        let mu1 = DensityField::new(g.clone(), g.sample(|x| 1.0 + 0.3 * (2.0 * PI * x).sin()))
            .unwrap()
            .normalized()
            .0;
        let f = forward(&mu0, 2.0).unwrap();
        let gr = forward(&mu1, 2.0).unwrap();
        let theta = g.sum(f.values().iter().zip(gr.values()).map(|(a, b)| a * b)).acos();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let r = alpha_geodesic_prob(&mu0, &AlphaTarget::Endpoint(mu1.clone()), 2.0, &times).unwrap();
        for (t, frame) in times.iter().zip(r.path.frames()) {
            for i in 0..100 {
                let circle =
                    (((1.0 - t) * theta).sin() * f.values()[i] + (t * theta).sin() * gr.values()[i]) / theta.sin();
                assert!((frame.values()[i] - circle * circle).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn frames_have_unit_mass() {
        let g = GridSpec::interval(100).unwrap();
        let mu0 = bump(&g, 0.3, 0.1);
        let mu1 = bump(&g, 0.7, 0.12);
        let times: Vec<f64> = (0..=30).map(|k| k as f64 / 30.0).collect();
        for p in [1.5, 3.0, 10.0] {
            let r = alpha_geodesic_prob(&mu0, &AlphaTarget::Endpoint(mu1.clone()), p, &times).unwrap();
            assert!(!r.left_space);
            for fr in r.path.frames() {
                assert!((fr.mass() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ivp_leaves_before_estimate() {
        let g = GridSpec::interval(100).unwrap();
        let mu0 = DensityField::reference(g.clone());
        let a = TangentField::new(g.clone(), g.sample(|x| (2.0 * PI * x).cos() + 0.5 * x))
            .unwrap()
            .mean_free();
        for p in [1.5, 2.0, 4.0] {
            let times: Vec<f64> = (0..=400).map(|k| k as f64 / 100.0).collect();
            let r = alpha_geodesic_prob(&mu0, &AlphaTarget::Velocity(a.clone()), p, &times).unwrap();
            let exit = r.blowup_time.expect("all α-geodesics on Prob leave");
            let bound = blowup_estimate(&a, p).unwrap();
            assert!(exit < bound, "p={p}: {exit} vs {bound}");
            assert_eq!(r.left_space, exit <= 4.0);
            assert!(r.path.frames().iter().all(|f| f.is_positive()));
            assert!(r.path.times().iter().all(|t| *t < exit));
        }
    }

    #[test]
    fn ivp_velocity_matches() {
        let g = GridSpec::interval(50).unwrap();
        let mu0 = bump(&g, 0.5, 0.2);
        let a = TangentField::new(g.clone(), g.sample(|x| (4.0 * x).sin()))
            .unwrap()
            .mean_free();
        let p = 3.0;
        let h = 1e-3;
        let r = alpha_geodesic_prob(&mu0, &AlphaTarget::Velocity(a.clone()), p, &[0.0, h, 2.0 * h]).unwrap();
        let fr = r.path.frames();
        for i in 0..50 {
            // second-order one-sided difference
            let d = (-3.0 * fr[0].values()[i] + 4.0 * fr[1].values()[i] - fr[2].values()[i]) / (2.0 * h);
            assert!((d - a.values()[i]).abs() < 1e-4, "{d} vs {}", a.values()[i]);
        }
    }

    #[test]
    fn blowup_estimate_arithmetic() {
        let g = GridSpec::interval(10).unwrap();
        let mut v = vec![0.5; 10];
        v[4] = -2.0;
        let a = TangentField::new(g.clone(), v).unwrap();
        assert_eq!(blowup_estimate(&a, 4.0).unwrap(), 2.0);
        assert_eq!(blowup_estimate(&a.scaled(2.0), 4.0).unwrap(), 1.0);
        assert_eq!(blowup_estimate(&TangentField::zeros(g), 4.0), Err(Error::ZeroTangent));
    }

    #[test]
    fn residual_checks() {
        let g = GridSpec::interval(60).unwrap();
        let mu0 = bump(&g, 0.3, 0.1);
        let mu1 = bump(&g, 0.7, 0.15);
        let p = 3.0;
        let residual = |steps: usize| {
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
            let r = alpha_geodesic_prob(&mu0, &AlphaTarget::Endpoint(mu1.clone()), p, &times).unwrap();
            prob_alpha_residual(&r.path, p).unwrap()
        };
        let ratio = residual(32) / residual(64);
        assert!((ratio - 4.0).abs() < 0.4, "{ratio}");

        let constant = PathGrid::new(vec![0.0, 0.5, 1.0], vec![mu0.clone(); 3]).unwrap();
        assert_eq!(prob_alpha_residual(&constant, p).unwrap(), 0.0);

        let times: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let dens = crate::dens_geo::geodesic_bvp_dens(&mu0, &mu1, p, &times).unwrap();
        assert!(prob_alpha_residual(&dens, p).unwrap() > 1e-2);
    }

    #[test]
    fn non_probability_rejected() {
        let g = GridSpec::interval(10).unwrap();
        let mu = DensityField::new(g.clone(), vec![2.0; 10]).unwrap();
        let r = alpha_geodesic_prob(&mu, &AlphaTarget::Velocity(TangentField::zeros(g)), 2.0, &[0.0]);
        assert!(matches!(r, Err(Error::NotProbability)));
    }
}
