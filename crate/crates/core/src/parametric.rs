//! The univariate normal family `N(m, σ²)` with the L^p-Fisher-Rao Finsler
//! metric induced on its parameter space, and geodesics between two members.
//!
//! All expectations are over `z = (x − m)/σ ~ N(0, 1)` and use Gauss–Hermite
//! quadrature. With the log-likelihood `ℓ`, `∂_m ℓ = z/σ` and
//! `∂_σ ℓ = (z² − 1)/σ`.

use crate::error::{Error, Result};
use crate::ode::rk4_step;

pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// Gauss–Hermite nodes and weights for the standard normal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for NormalModel {
    fn default() -> Self {
        Self::new(DEFAULT_QUADRATURE_NODES).expect("default node count is valid")
    }
}

impl NormalModel {
    /// Requires `2 ≤ count ≤ 300`. Even counts avoid a node at `z = 0`.
    pub fn new(count: usize) -> Result<Self> {
        if !(2..=300).contains(&count) {
            return Err(Error::Format(format!("quadrature node count {count} out of range")));
        }
        let (x, w) = gauss_hermite_physicists(count)?;
        let nodes = x.iter().map(|x| std::f64::consts::SQRT_2 * x).collect();
        let weights = w.iter().map(|w| w / std::f64::consts::PI.sqrt()).collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(z)]` for `z ~ N(0, 1)`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }
}

/// Nodes and weights for `∫ f(x) e^{−x²} dx`, by Newton iteration on the
/// orthonormal Hermite recurrence.
fn gauss_hermite_physicists(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Format("Gauss-Hermite root finding did not converge".into()));
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

/// A point `(m, σ)` of the upper half-plane with a velocity `(ṁ, σ̇)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaState {
    pub m: f64,
    pub sigma: f64,
    pub m_dot: f64,
    pub sigma_dot: f64,
}

impl ThetaState {
    pub fn new(m: f64, sigma: f64, m_dot: f64, sigma_dot: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self {
            m,
            sigma,
            m_dot,
            sigma_dot,
        })
    }

    pub fn position(&self) -> [f64; 2] {
        [self.m, self.sigma]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.m_dot, self.sigma_dot]
    }

    fn to_array(self) -> [f64; 4] {
        [self.m, self.sigma, self.m_dot, self.sigma_dot]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self {
            m: y[0],
            sigma: y[1],
            m_dot: y[2],
            sigma_dot: y[3],
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveSigma(sigma))
    }
}

/// `(∂ℓ·v)` as a function of `z`, times `σ`.
#[inline]
fn score(v: [f64; 2], z: f64) -> f64 {
    v[0] * z + v[1] * (z * z - 1.0)
}

/// A polynomial in `z` of degree at most 4, lowest coefficient first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZPoly(pub [f64; 5]);

impl ZPoly {
    pub fn eval(&self, z: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }
}

/// `G(θ) = E[∇ℓ ∇ℓᵀ]`.
pub fn fisher_matrix(model: &NormalModel, theta: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    check_sigma(theta[1])?;
    let s2 = theta[1] * theta[1];
    let mm = model.expect(|z| z * z) / s2;
    let ms = model.expect(|z| z * (z * z - 1.0)) / s2;
    let ss = model.expect(|z| (z * z - 1.0) * (z * z - 1.0)) / s2;
    Ok([[mm, ms], [ms, ss]])
}

/// `F_p(θ, v) = (E |⟨∇ℓ, v⟩|^p)^{1/p}`.
pub fn fp_theta(model: &NormalModel, theta: [f64; 2], v: [f64; 2], p: f64) -> Result<f64> {
    crate::error::check_p(p)?;
    check_sigma(theta[1])?;
    Ok(model.expect(|z| score(v, z).abs().powf(p)).powf(1.0 / p) / theta[1])
}

/// `ω(u, v)/μ = ∂²ℓ(u, v) + (1/p)(∂ℓ·u)(∂ℓ·v)` as a polynomial in `z`.
pub fn omega(theta: [f64; 2], u: [f64; 2], v: [f64; 2], p: f64) -> Result<ZPoly> {
    crate::error::check_p(p)?;
    check_sigma(theta[1])?;
    let s2 = theta[1] * theta[1];
    // ∂_mm ℓ = −1/σ², ∂_mσ ℓ = −2z/σ², ∂_σσ ℓ = (1 − 3z²)/σ²
    let mut c = [0.0; 5];
    c[0] += -u[0] * v[0] + u[1] * v[1];
    c[1] += -2.0 * (u[0] * v[1] + u[1] * v[0]);
    c[2] += -3.0 * u[1] * v[1];
    // (u0 z + u1 z² − u1)(v0 z + v1 z² − v1)/p
    let a = [-u[1], u[0], u[1]];
    let b = [-v[1], v[0], v[1]];
    for i in 0..3 {
        for j in 0..3 {
            c[i + j] += a[i] * b[j] / p;
        }
    }
    Ok(ZPoly(c.map(|x| x / s2)))
}

/// `I(a, b) = E[|n|^{p−2} a b]` for functions of `z`, with `n = ν/μ`.
fn i_functional(
    model: &NormalModel,
    n: &impl Fn(f64) -> f64,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    p: f64,
) -> f64 {
    model.expect(|z| {
        let nz = n(z);
        nz.abs().powf(p - 2.0) * a(z) * b(z)
    })
}

fn metric_at(
    model: &NormalModel,
    theta: [f64; 2],
    v: [f64; 2],
    p: f64,
    a: impl Fn(f64) -> f64 + Copy,
    b: impl Fn(f64) -> f64 + Copy,
) -> f64 {
    let s = theta[1];
    let n = |z: f64| score(v, z) / s;
    let phi = i_functional(model, &n, n, n, p);
    let ab = i_functional(model, &n, a, b, p);
    let na = i_functional(model, &n, n, a, p);
    let nb = i_functional(model, &n, n, b, p);
    (p - 1.0) * phi.powf(2.0 / p - 1.0) * ab - (p - 2.0) * phi.powf(2.0 / p - 2.0) * na * nb
}

fn basis(theta: [f64; 2], k: usize) -> impl Fn(f64) -> f64 + Copy {
    let s = theta[1];
    move |z: f64| if k == 0 { z / s } else { (z * z - 1.0) / s }
}

/// `(g^v)_{ij} = g^{φ_* v}(e_i, e_j)`.
pub fn g_matrix(model: &NormalModel, theta: [f64; 2], v: [f64; 2], p: f64) -> Result<[[f64; 2]; 2]> {
    crate::error::check_p(p)?;
    check_sigma(theta[1])?;
    if v == [0.0, 0.0] {
        return Err(Error::ZeroVelocity);
    }
    let mut g = [[0.0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = metric_at(model, theta, v, p, basis(theta, i), basis(theta, j));
        }
    }
    Ok(g)
}

fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::DegenerateDenominator(det));
    }
    Ok([
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

/// Geodesic spray of the L^p-Fisher-Rao metric:
/// `θ̈ = −(g^v)^{−1} b` with `b_k = g^v(ω(v, v), e_k)`.
pub fn lp_geodesic_rhs(model: &NormalModel, state: &ThetaState, p: f64) -> Result<[f64; 2]> {
    let theta = state.position();
    let v = state.velocity();
    let g = g_matrix(model, theta, v, p)?;
    let w = omega(theta, v, v, p)?;
    let wf = move |z: f64| w.eval(z);
    let b = [
        metric_at(model, theta, v, p, wf, basis(theta, 0)),
        metric_at(model, theta, v, p, wf, basis(theta, 1)),
    ];
    let x = solve2(g, b)?;
    Ok([-x[0], -x[1]])
}

/// Geodesic equation of the α-connection on the normal family.
pub fn alpha_normal_rhs(state: &ThetaState, alpha: f64) -> Result<[f64; 2]> {
    check_sigma(state.sigma)?;
    let (s, md, sd) = (state.sigma, state.m_dot, state.sigma_dot);
    Ok([
        2.0 * (1.0 + alpha) * md * sd / s,
        -(1.0 - alpha) * md * md / (2.0 * s) + (1.0 + 2.0 * alpha) * sd * sd / s,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ThetaState>,
    pub newton_iterations: usize,
    /// Euclidean distance between the final state and the target.
    pub miss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Number of RK4 output intervals on `[0, 1]`.
    pub steps: usize,
    /// RK4 substeps per output interval.
    pub substeps: usize,
    pub tol: f64,
    pub max_newton: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            steps: 50,
            substeps: 8,
            tol: 1e-10,
            max_newton: 50,
        }
    }
}

fn integrate(
    rhs: &impl Fn(&ThetaState) -> Result<[f64; 2]>,
    start: ThetaState,
    opts: &ShootOptions,
) -> Result<Vec<ThetaState>> {
    let h = 1.0 / (opts.steps * opts.substeps) as f64;
    let mut y = start.to_array();
    let mut out = Vec::with_capacity(opts.steps + 1);
    out.push(start);
    let failure = std::cell::RefCell::new(None);
    let mut f = |y: &[f64; 4]| {
        let s = ThetaState::from_array(*y);
        match check_sigma(s.sigma).and_then(|_| rhs(&s)) {
            Ok(a) => [y[2], y[3], a[0], a[1]],
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [f64::NAN; 4]
            }
        }
    };
    for _ in 0..opts.steps {
        for _ in 0..opts.substeps {
            y = rk4_step(&mut f, &y, h);
        }
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let s = ThetaState::from_array(y);
        check_sigma(s.sigma)?;
        out.push(s);
    }
    Ok(out)
}

fn endpoint_miss(
    rhs: &impl Fn(&ThetaState) -> Result<[f64; 2]>,
    theta0: [f64; 2],
    theta1: [f64; 2],
    v: [f64; 2],
    opts: &ShootOptions,
) -> Option<([f64; 2], Vec<ThetaState>)> {
    let start = ThetaState::from_array([theta0[0], theta0[1], v[0], v[1]]);
    let path = integrate(rhs, start, opts).ok()?;
    let end = path.last()?;
    let r = [end.m - theta1[0], end.sigma - theta1[1]];
    r.iter().all(|x| x.is_finite()).then_some((r, path))
}

/// Solves the two-point problem `θ(0) = theta0`, `θ(1) = theta1` for the
/// geodesic equation `θ̈ = rhs(θ, θ̇)` by damped Newton on `θ̇(0)`, starting
/// from `theta1 − theta0`.
pub fn shoot_bvp(
    rhs: impl Fn(&ThetaState) -> Result<[f64; 2]>,
    theta0: [f64; 2],
    theta1: [f64; 2],
    opts: &ShootOptions,
) -> Result<NormalTrajectory> {
    check_sigma(theta0[1])?;
    check_sigma(theta1[1])?;
    if opts.steps == 0 || opts.substeps == 0 {
        return Err(Error::Format("shooting needs at least one step".into()));
    }
    let times: Vec<f64> = (0..=opts.steps).map(|k| k as f64 / opts.steps as f64).collect();
    if theta0 == theta1 {
        let s = ThetaState::from_array([theta0[0], theta0[1], 0.0, 0.0]);
        return Ok(NormalTrajectory {
            states: vec![s; times.len()],
            times,
            newton_iterations: 0,
            miss: 0.0,
        });
    }

    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut v = [theta1[0] - theta0[0], theta1[1] - theta0[1]];
    // shrink the chord guess until the trajectory survives to t = 1
    let mut first = None;
    for _ in 0..20 {
        if let Some(found) = endpoint_miss(&rhs, theta0, theta1, v, opts) {
            first = Some(found);
            break;
        }
        v = [0.5 * v[0], 0.5 * v[1]];
    }
    let (mut r, mut path) = first.ok_or_else(|| Error::ShootingFailed("no initial guess reaches t = 1".into()))?;
    for iter in 0..=opts.max_newton {
        if norm(r) <= opts.tol {
            return Ok(NormalTrajectory {
                times,
                states: path,
                newton_iterations: iter,
                miss: norm(r),
            });
        }
        if iter == opts.max_newton {
            break;
        }
        // forward-difference Jacobian of the endpoint map
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * v[k].abs().max(1.0);
            let mut vk = v;
            vk[k] += h;
            let (rk, _) = endpoint_miss(&rhs, theta0, theta1, vk, opts)
                .ok_or_else(|| Error::ShootingFailed(format!("Jacobian probe failed, best miss {:e}", norm(r))))?;
            jac[0][k] = (rk[0] - r[0]) / h;
            jac[1][k] = (rk[1] - r[1]) / h;
        }
        let delta =
            solve2(jac, r).map_err(|_| Error::ShootingFailed(format!("singular Jacobian, best miss {:e}", norm(r))))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let trial = [v[0] - lambda * delta[0], v[1] - lambda * delta[1]];
            if let Some((rt, pt)) = endpoint_miss(&rhs, theta0, theta1, trial, opts) {
                if norm(rt) < norm(r) {
                    v = trial;
                    r = rt;
                    path = pt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::ShootingFailed(format!(
        "Newton stagnated, best miss {:e}",
        norm(r)
    )))
}
