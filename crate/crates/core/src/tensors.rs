//! Hessian metric, Cartan tensor and Chern-connection correction of the
//! L^p-Fisher-Rao Finsler norm at a reference direction `ν`.
//!
//! With `u = ν/μ` the integral functionals are
//!
//! ```text
//! I(a,b)     = ∫ |u|^{p−2} (a/μ)(b/μ) μ
//! K(a,b,c)   = ∫ |u|^{p−2} (a/μ)(b/μ)(c/μ) μ
//! J(a,b,c,d) = ∫ |u|^{p−4} (a/μ)(b/μ)(c/μ)(d/μ) μ
//! ```
//!
//! and `g^ν = ½ D²F_p²(ν)`, `C^ν = ¼ D³F_p²(ν)`.

use crate::error::{check_p, Error, Result};
use crate::grid::{same_grid, DensityField, TangentField};

/// Relative threshold below which a node value of `ν` counts as vanishing.
pub const VANISHING_THRESHOLD: f64 = 1e-8;

/// The footpoint `μ`, the reference direction `ν` and the exponent `p`.
#[derive(Debug, Clone)]
pub struct TensorContext {
    mu: DensityField,
    nu: TangentField,
    p: f64,
    /// `ν/μ` at each node.
    u: Vec<f64>,
}

impl TensorContext {
    /// Requires `min |ν_i| ≥ 1e-8 · max |ν_i|` and a positive `μ`.
    pub fn new(mu: DensityField, nu: TangentField, p: f64) -> Result<Self> {
        check_p(p)?;
        mu.require_positive()?;
        same_grid(mu.grid(), nu.grid())?;
        let max = nu.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = VANISHING_THRESHOLD * max;
        if let Some((index, v)) = nu
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.abs() >= floor) || **v == 0.0)
        {
            return Err(Error::VanishingDirection { index, value: v.abs() });
        }
        let u = nu.values().iter().zip(mu.values()).map(|(n, m)| n / m).collect();
        Ok(Self { mu, nu, p, u })
    }

    pub fn mu(&self) -> &DensityField {
        &self.mu
    }

    pub fn nu(&self) -> &TangentField {
        &self.nu
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn check(&self, fields: &[&TangentField]) -> Result<()> {
        fields.iter().try_for_each(|f| same_grid(self.mu.grid(), f.grid()))
    }

    /// `∫ |u|^e Π_k (x_k/μ) μ` over the given fields.
    fn moment(&self, exponent: f64, fields: &[&TangentField]) -> f64 {
        let m = self.mu.values();
        let grid = self.mu.grid();
        grid.sum((0..m.len()).map(|i| {
            let prod: f64 = fields.iter().map(|f| f.values()[i] / m[i]).product();
            self.u[i].abs().powf(exponent) * prod * m[i]
        }))
    }

    fn phi(&self) -> f64 {
        self.moment(self.p - 2.0, &[&self.nu, &self.nu])
    }
}

pub fn functional_i(ctx: &TensorContext, a: &TangentField, b: &TangentField) -> Result<f64> {
    ctx.check(&[a, b])?;
    Ok(ctx.moment(ctx.p - 2.0, &[a, b]))
}

pub fn functional_k(ctx: &TensorContext, a: &TangentField, b: &TangentField, c: &TangentField) -> Result<f64> {
    ctx.check(&[a, b, c])?;
    Ok(ctx.moment(ctx.p - 2.0, &[a, b, c]))
}

pub fn functional_j4(
    ctx: &TensorContext,
    a: &TangentField,
    b: &TangentField,
    c: &TangentField,
    d: &TangentField,
) -> Result<f64> {
    ctx.check(&[a, b, c, d])?;
    Ok(ctx.moment(ctx.p - 4.0, &[a, b, c, d]))
}

/// `g^ν(a,b) = (p−1) I(ν,ν)^{2/p−1} I(a,b) − (p−2) I(ν,ν)^{2/p−2} I(ν,a) I(ν,b)`.
pub fn hessian_g(ctx: &TensorContext, a: &TangentField, b: &TangentField) -> Result<f64> {
    ctx.check(&[a, b])?;
    let p = ctx.p;
    let nu = &ctx.nu;
    let phi = ctx.phi();
    let e = p - 2.0;
    Ok((p - 1.0) * phi.powf(2.0 / p - 1.0) * ctx.moment(e, &[a, b])
        - (p - 2.0) * phi.powf(2.0 / p - 2.0) * ctx.moment(e, &[nu, a]) * ctx.moment(e, &[nu, b]))
}

/// `C^ν(a,b,c) = ½(p−1)(p−2) I(ν,ν)^{2/p−3} (2 I(ν,a)I(ν,b)I(ν,c)
///   − I(ν,ν)[I(a,b)I(ν,c) + I(a,c)I(ν,b) + I(b,c)I(ν,a)] + I(ν,ν)² J(ν,a,b,c))`.
pub fn cartan_c(ctx: &TensorContext, a: &TangentField, b: &TangentField, c: &TangentField) -> Result<f64> {
    ctx.check(&[a, b, c])?;
    let p = ctx.p;
    let nu = &ctx.nu;
    let e = p - 2.0;
    let phi = ctx.phi();
    let (na, nb, nc) = (
        ctx.moment(e, &[nu, a]),
        ctx.moment(e, &[nu, b]),
        ctx.moment(e, &[nu, c]),
    );
    let (ab, ac, bc) = (ctx.moment(e, &[a, b]), ctx.moment(e, &[a, c]), ctx.moment(e, &[b, c]));
    let j = ctx.moment(p - 4.0, &[nu, a, b, c]);
    Ok(0.5
        * (p - 1.0)
        * (p - 2.0)
        * phi.powf(2.0 / p - 3.0)
        * (2.0 * na * nb * nc - phi * (ab * nc + ac * nb + bc * na) + phi * phi * j))
}

/// Chern connection on the probability densities applied to `a`:
/// `Dν.a − ((p−1)/p)(a/μ)(ν/μ)μ + k₁|ν/μ|^{−p}(a/μ)ν + k₂|ν/μ|^{2−p}μ`,
/// with the derivative `Dν.a` supplied by the caller.
pub fn chern_prob_apply(ctx: &TensorContext, a: &TangentField, dnu_a: &TangentField) -> Result<TangentField> {
    ctx.check(&[a, dnu_a])?;
    let p = ctx.p;
    let m = ctx.mu.values();
    let nu = ctx.nu.values();
    let grid = ctx.mu.grid();
    let u = &ctx.u;

    let av: Vec<f64> = a.values().iter().zip(m).map(|(a, m)| a / m).collect();
    let cross = grid.sum((0..m.len()).map(|i| av[i] * u[i] * m[i]));
    let b = grid.sum((0..m.len()).map(|i| u[i].abs().powf(2.0 - p) * m[i]));
    let c = grid.sum((0..m.len()).map(|i| u[i].abs().powf(-p) * av[i] * nu[i]));
    let d = grid.sum((0..m.len()).map(|i| u[i] * u[i] * m[i]));

    let s = (p - 1.0) * (p - 2.0) / (2.0 * p);
    let k1 = -s * d / b;
    let k2 = (p - 1.0) / p * cross / b + s * c * d / (b * b);

    let values = (0..m.len())
        .map(|i| {
            dnu_a.values()[i] - (p - 1.0) / p * av[i] * u[i] * m[i]
                + k1 * u[i].abs().powf(-p) * av[i] * nu[i]
                + k2 * u[i].abs().powf(2.0 - p) * m[i]
        })
        .collect();
    TangentField::new(grid.clone(), values)
}

/// `F_p(μ, ν + x)²` for a perturbation `x` of the reference direction.
fn finsler_sq(ctx: &TensorContext, x: &[f64]) -> f64 {
    let m = ctx.mu.values();
    let p = ctx.p;
    let s = ctx
        .mu
        .grid()
        .sum((0..m.len()).map(|i| ((ctx.nu.values()[i] + x[i]) / m[i]).abs().powf(p) * m[i]));
    s.powf(2.0 / p)
}

fn combo(fields: &[&TangentField], coeffs: &[f64]) -> Vec<f64> {
    let n = fields[0].values().len();
    (0..n)
        .map(|i| fields.iter().zip(coeffs).map(|(f, c)| c * f.values()[i]).sum())
        .collect()
}

/// `½ ∂²/∂s∂t F_p²(μ, ν + sa + tb)` at zero by central differences of step `h`.
pub fn fd_hessian_g(ctx: &TensorContext, a: &TangentField, b: &TangentField, h: f64) -> Result<f64> {
    ctx.check(&[a, b])?;
    let mut acc = 0.0;
    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        acc += sa * sb * finsler_sq(ctx, &combo(&[a, b], &[sa * h, sb * h]));
    }
    Ok(0.5 * acc / (4.0 * h * h))
}

/// `¼ ∂³/∂r∂s∂t F_p²(μ, ν + ra + sb + tc)` at zero by central differences of
/// step `h`.
pub fn fd_cartan_c(ctx: &TensorContext, a: &TangentField, b: &TangentField, c: &TangentField, h: f64) -> Result<f64> {
    ctx.check(&[a, b, c])?;
    let mut acc = 0.0;
    for sa in [1.0, -1.0] {
        for sb in [1.0, -1.0] {
            for sc in [1.0, -1.0] {
                acc += sa * sb * sc * finsler_sq(ctx, &combo(&[a, b, c], &[sa * h, sb * h, sc * h]));
            }
        }
    }
    Ok(0.25 * acc / (8.0 * h * h * h))
}
