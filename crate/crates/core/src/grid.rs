//! Discretized densities on `[0,1]` (or the circle) and the basic functionals
//! built from them.
//!
//! The reference probability measure `λ` is the quadrature measure of the
//! grid: trapezoid weights on the interval, uniform weights on the circle.
//! Densities and tangent vectors are stored through their Radon–Nikodym
//! derivatives with respect to `λ`, so every integral `∫ h λ` is the weighted
//! sum `Σ w_i h_i`.

use std::sync::Arc;

use crate::error::{check_p, check_positive, Error, Result};
use crate::interp::MonotoneCubic;

/// Default node count.
pub const DEFAULT_NODES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    periodic: bool,
}

impl GridSpec {
    /// Trapezoid grid with `n` nodes on `[0,1]`, endpoints included.
    pub fn interval(n: usize) -> Result<Arc<Self>> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes, got {n}")));
        }
        let h = 1.0 / (n - 1) as f64;
        let nodes = (0..n).map(|i| i as f64 * h).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Arc::new(Self {
            nodes,
            weights,
            periodic: false,
        }))
    }

    /// Uniform grid with `n` nodes on the circle `[0,1)`.
    pub fn periodic(n: usize) -> Result<Arc<Self>> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes, got {n}")));
        }
        let h = 1.0 / n as f64;
        Ok(Arc::new(Self {
            nodes: (0..n).map(|i| i as f64 * h).collect(),
            weights: vec![h; n],
            periodic: true,
        }))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n(),
                got: values.len(),
            })
        }
    }

    /// `Σ w_i h_i` without the length check.
    pub(crate) fn sum(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `(Σ w_i |v_i|^p)^{1/p}`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        self.sum(values.iter().map(|v| v.abs().powf(p))).powf(1.0 / p)
    }
}

pub(crate) fn same_grid(a: &Arc<GridSpec>, b: &Arc<GridSpec>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Node values of `μ/λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
    probability: bool,
    nonpositive: Vec<usize>,
}

impl DensityField {
    /// A strictly positive density.
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values)?;
        check_positive(&values)?;
        Ok(Self {
            grid,
            values,
            probability: false,
            nonpositive: Vec::new(),
        })
    }

    /// The reference measure itself, `μ/λ ≡ 1`.
    pub fn reference(grid: Arc<GridSpec>) -> Self {
        let values = vec![1.0; grid.n()];
        Self {
            grid,
            values,
            probability: true,
            nonpositive: Vec::new(),
        }
    }

    /// A positive density with unit mass (checked to `1e-10`).
    pub fn probability(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        let mut d = Self::new(grid, values)?;
        let mass = d.mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Format(format!(
                "probability density has mass {mass}, expected 1"
            )));
        }
        d.probability = true;
        Ok(d)
    }

    /// Values that may touch or cross zero, e.g. a path that left the space.
    /// Offending nodes are recorded instead of rejected.
    pub fn flagged(grid: Arc<GridSpec>, values: Vec<f64>, probability: bool) -> Result<Self> {
        grid.check_len(&values)?;
        let nonpositive = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !(**v > 0.0))
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            grid,
            values,
            probability,
            nonpositive,
        })
    }

    pub(crate) fn with_flags(
        grid: Arc<GridSpec>,
        values: Vec<f64>,
        probability: bool,
        nonpositive: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(grid.n(), values.len());
        Self {
            grid,
            values,
            probability,
            nonpositive,
        }
    }

    /// Rescales to unit mass; returns the field and the mass before scaling.
    pub fn normalized(&self) -> (Self, f64) {
        let mass = self.mass();
        let values = self.values.iter().map(|v| v / mass).collect();
        (
            Self {
                grid: self.grid.clone(),
                values,
                probability: true,
                nonpositive: self.nonpositive.clone(),
            },
            mass,
        )
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    /// Nodes at which the value is not strictly positive.
    pub fn nonpositive_nodes(&self) -> &[usize] {
        &self.nonpositive
    }

    pub fn is_positive(&self) -> bool {
        self.nonpositive.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.grid.sum(self.values.iter().copied())
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        match self.nonpositive.first() {
            Some(&index) => Err(Error::NonPositiveDensity {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }
}

/// Node values of `a/λ` for a tangent vector `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl TangentField {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let values = vec![0.0; grid.n()];
        Self { grid, values }
    }

    /// Removes the mean so that the field is tangent to the probability
    /// densities.
    pub fn mean_free(&self) -> Self {
        let mean = self.integral();
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v - mean).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.sum(self.values.iter().copied())
    }

    /// Whether `∫ a = 0` to `tol`.
    pub fn is_prob_tangent(&self, tol: f64) -> bool {
        self.integral().abs() <= tol
    }
}

/// A time-indexed family of densities sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    times: Vec<f64>,
    frames: Vec<DensityField>,
}

impl PathGrid {
    pub fn new(times: Vec<f64>, frames: Vec<DensityField>) -> Result<Self> {
        if times.len() != frames.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: frames.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("path times must be strictly increasing".into()));
        }
        if let Some(first) = frames.first() {
            for f in &frames[1..] {
                same_grid(first.grid(), f.grid())?;
            }
        }
        Ok(Self { times, frames })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[DensityField] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> Option<&Arc<GridSpec>> {
        self.frames.first().map(|f| f.grid())
    }

    /// Sup-norm distance between two paths over all frames and nodes.
    pub fn sup_distance(&self, other: &PathGrid) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.frames.iter().zip(&other.frames) {
            same_grid(a.grid(), b.grid())?;
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    }

    /// Uniform time step, if the times are uniform.
    pub(crate) fn uniform_step(&self) -> Result<f64> {
        let dt = (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));
        if uniform && dt > 0.0 {
            Ok(dt)
        } else {
            Err(Error::NonUniformTimes)
        }
    }
}

/// `Σ w_i h_i`.
pub fn integrate(field: &[f64], grid: &GridSpec) -> Result<f64> {
    grid.check_len(field)?;
    Ok(grid.sum(field.iter().copied()))
}

/// The L^p-Fisher-Rao norm `F_p(μ, a) = (∫ |a/μ|^p μ)^{1/p}`.
pub fn fp_norm(mu: &DensityField, a: &TangentField, p: f64) -> Result<f64> {
    check_p(p)?;
    mu.require_positive()?;
    same_grid(mu.grid(), a.grid())?;
    let g = mu.grid();
    let s = g.sum(
        mu.values()
            .iter()
            .zip(a.values())
            .map(|(f, a)| (a / f).abs().powf(p) * f),
    );
    Ok(s.powf(1.0 / p))
}

/// The Fisher–Rao inner product `∫ (a/μ)(b/μ) μ`.
pub fn fisher_rao_inner(mu: &DensityField, a: &TangentField, b: &TangentField) -> Result<f64> {
    mu.require_positive()?;
    same_grid(mu.grid(), a.grid())?;
    same_grid(mu.grid(), b.grid())?;
    Ok(mu.grid().sum(
        mu.values()
            .iter()
            .zip(a.values().iter().zip(b.values()))
            .map(|(f, (a, b))| a * b / f),
    ))
}

/// The exponent pair `(p, p*)` belonging to `α`: `p = 2/(1-α)`, `p* = 2/(1+α)`.
pub fn exponents_from_alpha(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok((2.0 / (1.0 - alpha), 2.0 / (1.0 + alpha)))
}

/// `α = 1 - 2/p`.
pub fn alpha_from_p(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(1.0 - 2.0 / p)
}

/// The α-divergence
/// `D(μ‖ν) = p ∫ν + p* ∫μ − p p* ∫ (μ/λ)^{1/p} (ν/λ)^{1/p*} λ`.
pub fn alpha_divergence(mu: &DensityField, nu: &DensityField, alpha: f64) -> Result<f64> {
    let (p, q) = exponents_from_alpha(alpha)?;
    mu.require_positive()?;
    nu.require_positive()?;
    same_grid(mu.grid(), nu.grid())?;
    let g = mu.grid();
    let cross = g.sum(
        mu.values()
            .iter()
            .zip(nu.values())
            .map(|(m, n)| m.powf(1.0 / p) * n.powf(1.0 / q)),
    );
    Ok(p * nu.mass() + q * mu.mass() - p * q * cross)
}

/// A strictly increasing diffeomorphism of `[0,1]` with its derivative.
pub trait MonotoneMap {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;

    /// Solves `φ(x) = y` by safeguarded Newton iteration on `[0,1]`.
    fn inverse(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = y.clamp(0.0, 1.0);
        for _ in 0..200 {
            let r = self.eval(x) - y;
            if r.abs() <= 1e-15 {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / self.deriv(x);
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-16 {
                break;
            }
        }
        x
    }
}

/// `x ↦ x + ε sin(2πx)`, a diffeomorphism whenever `2π|ε| < 1`.
#[derive(Debug, Clone, Copy)]
pub struct SineWarp {
    pub amplitude: f64,
}

impl MonotoneMap for SineWarp {
    fn eval(&self, x: f64) -> f64 {
        x + self.amplitude * (2.0 * std::f64::consts::PI * x).sin()
    }

    fn deriv(&self, x: f64) -> f64 {
        1.0 + 2.0 * std::f64::consts::PI * self.amplitude * (2.0 * std::f64::consts::PI * x).cos()
    }
}

/// A monotone map given by a pair of closures.
pub struct ClosureMap<F, D> {
    pub map: F,
    pub deriv: D,
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> MonotoneMap for ClosureMap<F, D> {
    fn eval(&self, x: f64) -> f64 {
        (self.map)(x)
    }

    fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

fn check_monotone(phi: &dyn MonotoneMap, grid: &GridSpec) -> Result<()> {
    let ends = [(0.0, phi.eval(0.0)), (1.0, phi.eval(1.0))];
    for (x, y) in ends {
        if (x - y).abs() > 1e-12 {
            return Err(Error::NonMonotoneMap(format!("φ({x}) = {y}")));
        }
    }
    // derivative sampled at nodes and midpoints
    let m = 4 * grid.n();
    for k in 0..=m {
        let x = k as f64 / m as f64;
        let d = phi.deriv(x);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NonMonotoneMap(format!("φ'({x}) = {d}")));
        }
    }
    Ok(())
}

/// Node values of the push-forward `φ_* h` of a density-like field `h/λ`:
/// `(φ_* h)/λ (y) = (h/λ)(φ⁻¹ y) / φ'(φ⁻¹ y)`, resampled by monotone cubic
/// interpolation.
pub fn pushforward_values(phi: &dyn MonotoneMap, values: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    grid.check_len(values)?;
    check_monotone(phi, grid)?;
    let interp = MonotoneCubic::new(grid.nodes(), values, grid.is_periodic());
    Ok(grid
        .nodes()
        .iter()
        .map(|&y| {
            let x = phi.inverse(y);
            interp.eval(x) / phi.deriv(x)
        })
        .collect())
}

/// Push-forward of a density under a monotone grid map.
pub fn pushforward(phi: &dyn MonotoneMap, mu: &DensityField) -> Result<DensityField> {
    let values = pushforward_values(phi, mu.values(), mu.grid())?;
    let mut out = DensityField::flagged(mu.grid().clone(), values, false)?;
    out.probability = mu.probability;
    Ok(out)
}

/// Push-forward of a tangent vector, transported like a density.
pub fn pushforward_tangent(phi: &dyn MonotoneMap, a: &TangentField) -> Result<TangentField> {
    let values = pushforward_values(phi, a.values(), a.grid())?;
    TangentField::new(a.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(grid: &Arc<GridSpec>, m: f64, s: f64) -> DensityField {
        let v = grid.sample(|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp() + 1e-3);
        DensityField::new(grid.clone(), v).unwrap().normalized().0
    }

    fn von_mises(grid: &Arc<GridSpec>, m: f64, kappa: f64) -> DensityField {
        let v = grid.sample(|x| (kappa * (2.0 * PI * (x - m)).cos()).exp());
        DensityField::new(grid.clone(), v).unwrap().normalized().0
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [8, 9, 100, 1001] {
            for g in [GridSpec::interval(n).unwrap(), GridSpec::periodic(n).unwrap()] {
                let s: f64 = g.weights().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            }
        }
        assert!(GridSpec::interval(7).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = GridSpec::interval(37).unwrap();
        assert!((integrate(&vec![1.0; 37], &g).unwrap() - 1.0).abs() < 1e-14);

        let g = GridSpec::interval(101).unwrap();
        let f = g.sample(|x| 2.0 * x);
        assert!((integrate(&f, &g).unwrap() - 1.0).abs() < 1e-14);

        let g = GridSpec::interval(200).unwrap();
        let f = g.sample(|x| 2.0 * (2.0 * PI * x).sin().powi(2));
        assert!((integrate(&f, &g).unwrap() - 1.0).abs() < 1e-8);

        assert_eq!(
            integrate(&[1.0; 3], &g),
            Err(Error::LengthMismatch { expected: 200, got: 3 })
        );
    }

    #[test]
    fn fp_norm_examples() {
        let g = GridSpec::interval(64).unwrap();
        let mu = DensityField::reference(g.clone());
        let a = TangentField::new(g.clone(), vec![-0.7; 64]).unwrap();
        for p in [1.1, 2.0, 3.5, 10.0] {
            assert!((fp_norm(&mu, &a, p).unwrap() - 0.7).abs() < 1e-13);
        }

        let g = GridSpec::interval(2001).unwrap();
        let mu = DensityField::reference(g.clone());
        let a = TangentField::new(g.clone(), g.sample(|x| (2.0 * PI * x).sin())).unwrap();
        assert!((fp_norm(&mu, &a, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-6);

        assert_eq!(fp_norm(&mu, &a, 1.0), Err(Error::InvalidExponent(1.0)));
    }

    #[test]
    fn fisher_rao_orthogonality() {
        let g = GridSpec::interval(256).unwrap();
        let mu = DensityField::reference(g.clone());
        let a = TangentField::new(g.clone(), g.sample(|x| (2.0 * PI * x).sin())).unwrap();
        let b = TangentField::new(g.clone(), g.sample(|x| (2.0 * PI * x).cos())).unwrap();
        assert!(fisher_rao_inner(&mu, &a, &b).unwrap().abs() < 1e-8);
        let n2 = fp_norm(&mu, &a, 2.0).unwrap().powi(2);
        assert!((fisher_rao_inner(&mu, &a, &a).unwrap() - n2).abs() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g1 = GridSpec::interval(16).unwrap();
        let g2 = GridSpec::periodic(16).unwrap();
        let mu = DensityField::reference(g1);
        let a = TangentField::zeros(g2);
        assert_eq!(fisher_rao_inner(&mu, &a, &a), Err(Error::GridMismatch));
    }

    #[test]
    fn divergence_basics() {
        let g = GridSpec::interval(100).unwrap();
        let mu = bump(&g, 0.3, 0.1);
        let nu = bump(&g, 0.6, 0.2);
        for alpha in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            assert!(alpha_divergence(&mu, &mu, alpha).unwrap().abs() < 1e-12);
            assert!(alpha_divergence(&mu, &nu, alpha).unwrap() > 0.0);
            let d1 = alpha_divergence(&mu, &nu, alpha).unwrap();
            let d2 = alpha_divergence(&nu, &mu, -alpha).unwrap();
            assert!((d1 - d2).abs() < 1e-12);
        }
        assert_eq!(alpha_divergence(&mu, &nu, 1.0), Err(Error::InvalidAlpha(1.0)));
    }

    #[test]
    fn pushforward_identity_and_mass() {
        let g = GridSpec::periodic(400).unwrap();
        let mu = von_mises(&g, 0.45, 4.0);
        let id = ClosureMap {
            map: |x: f64| x,
            deriv: |_x: f64| 1.0,
        };
        let same = pushforward(&id, &mu).unwrap();
        for (a, b) in same.values().iter().zip(mu.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        let warp = SineWarp { amplitude: 0.1 };
        let pushed = pushforward(&warp, &mu).unwrap();
        assert!((pushed.mass() - mu.mass()).abs() < 1e-8);
    }

    #[test]
    fn pushforward_rejects_non_monotone() {
        let g = GridSpec::interval(50).unwrap();
        let mu = DensityField::reference(g);
        let bad = SineWarp { amplitude: 0.3 };
        assert!(matches!(pushforward(&bad, &mu), Err(Error::NonMonotoneMap(_))));
    }

    #[test]
    fn fp_norm_is_diffeo_invariant() {
        // circle grid: the trapezoid rule is spectrally accurate there
        let g = GridSpec::periodic(400).unwrap();
        let mu = von_mises(&g, 0.4, 3.0);
        let a = TangentField::new(
            g.clone(),
            g.sample(|x| (2.0 * PI * x).cos() + 0.3 * (4.0 * PI * x).sin()),
        )
        .unwrap();
        let warp = SineWarp { amplitude: 0.1 };
        let mu2 = pushforward(&warp, &mu).unwrap();
        let a2 = pushforward_tangent(&warp, &a).unwrap();
        for p in [1.5, 2.0, 3.0, 5.0] {
            let before = fp_norm(&mu, &a, p).unwrap();
            let after = fp_norm(&mu2, &a2, p).unwrap();
            assert!((before - after).abs() < 1e-6, "p={p}: {before} vs {after}");
        }
    }
}
