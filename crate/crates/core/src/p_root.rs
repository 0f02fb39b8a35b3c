//! The p-root transform `Φ_p(μ) = (μ/λ)^{1/p}`.
//!
//! `Φ_p` maps positive densities onto positive functions and probability
//! densities onto the positive part of the unit sphere of `L^p(λ)`. Its tangent
//! map scales lengths by `1/p`, so every length measured in root coordinates is
//! multiplied by `p` before it is reported as an L^p-Fisher-Rao quantity.

use std::sync::Arc;

use crate::error::{check_p, Result};
use crate::grid::{same_grid, DensityField, GridSpec, TangentField};

/// A point in root coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPoint {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
    p: f64,
    on_sphere: bool,
}

impl RootPoint {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>, p: f64, on_sphere: bool) -> Result<Self> {
        check_p(p)?;
        grid.check_len(&values)?;
        Ok(Self {
            grid,
            values,
            p,
            on_sphere,
        })
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn on_sphere(&self) -> bool {
        self.on_sphere
    }

    /// `‖g‖_{L^p(λ)}`.
    pub fn lp_norm(&self) -> f64 {
        self.grid.lp_norm(&self.values, self.p)
    }
}

pub fn forward(mu: &DensityField, p: f64) -> Result<RootPoint> {
    check_p(p)?;
    mu.require_positive()?;
    let values = mu.values().iter().map(|f| f.powf(1.0 / p)).collect();
    Ok(RootPoint {
        grid: mu.grid().clone(),
        values,
        p,
        on_sphere: mu.is_probability(),
    })
}

/// `f = |g|^p`; nodes with `g ≤ 0` are flagged on the result.
pub fn inverse(g: &RootPoint) -> DensityField {
    let values = g.values.iter().map(|v| v.abs().powf(g.p)).collect();
    let nonpositive = g
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| !(**v > 0.0))
        .map(|(i, _)| i)
        .collect();
    DensityField::with_flags(g.grid.clone(), values, g.on_sphere, nonpositive)
}

/// `D_μΦ_p(a) = (1/p) (a/λ) (μ/λ)^{1/p − 1}`.
pub fn push_tangent(mu: &DensityField, a: &TangentField, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    mu.require_positive()?;
    same_grid(mu.grid(), a.grid())?;
    Ok(mu
        .values()
        .iter()
        .zip(a.values())
        .map(|(f, a)| a * f.powf(1.0 / p - 1.0) / p)
        .collect())
}

/// Inverse of [`push_tangent`]: `a/λ = p ξ (μ/λ)^{1 − 1/p}`.
pub fn pull_tangent(mu: &DensityField, xi: &[f64], p: f64) -> Result<TangentField> {
    check_p(p)?;
    mu.require_positive()?;
    mu.grid().check_len(xi)?;
    let values = mu
        .values()
        .iter()
        .zip(xi)
        .map(|(f, x)| p * x * f.powf(1.0 - 1.0 / p))
        .collect();
    TangentField::new(mu.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fp_norm;

    fn bump(grid: &Arc<GridSpec>, m: f64, s: f64) -> DensityField {
        let v = grid.sample(|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp());
        DensityField::new(grid.clone(), v).unwrap().normalized().0
    }

    #[test]
    fn reference_maps_to_one() {
        let g = GridSpec::interval(32).unwrap();
        let r = forward(&DensityField::reference(g.clone()), 3.0).unwrap();
        assert!(r.on_sphere());
        assert!(r.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let back = inverse(&r);
        assert!(back.is_positive());
        assert!(back.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn roundtrip() {
        let g = GridSpec::interval(100).unwrap();
        let mu = bump(&g, 0.5, 0.1);
        for p in [1.5, 2.0, 3.0, 7.0] {
            let back = inverse(&forward(&mu, p).unwrap());
            for (a, b) in back.values().iter().zip(mu.values()) {
                assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn normalization_survives_transform() {
        let g = GridSpec::interval(100).unwrap();
        let mu = bump(&g, 0.5, 0.1);
        let r = forward(&mu, 3.0).unwrap();
        let s: f64 = g.weights().iter().zip(r.values()).map(|(w, v)| w * v.powi(3)).sum();
        assert!((s - 1.0).abs() < 1e-10);
        assert!((r.lp_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn negative_node_is_flagged() {
        let g = GridSpec::interval(10).unwrap();
        let mut v = vec![1.0; 10];
        v[3] = -0.5;
        v[7] = 0.0;
        let d = inverse(&RootPoint::new(g, v, 2.0, true).unwrap());
        assert_eq!(d.nonpositive_nodes(), &[3, 7]);
        assert!((d.values()[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn push_tangent_at_reference() {
        let g = GridSpec::interval(16).unwrap();
        let mu = DensityField::reference(g.clone());
        let a = TangentField::new(g.clone(), g.sample(|x| x - 0.5)).unwrap();
        let xi = push_tangent(&mu, &a, 4.0).unwrap();
        for (x, a) in xi.iter().zip(a.values()) {
            assert!((x - a / 4.0).abs() < 1e-16);
        }
    }

    #[test]
    fn isometry_with_factor_p() {
        let g = GridSpec::interval(120).unwrap();
        let mu = bump(&g, 0.35, 0.2);
        let a = TangentField::new(g.clone(), g.sample(|x| (7.0 * x).sin() - 0.2)).unwrap();
        for p in [1.5, 2.0, 3.0, 5.0] {
            let xi = push_tangent(&mu, &a, p).unwrap();
            let lhs = fp_norm(&mu, &a, p).unwrap();
            let rhs = p * g.lp_norm(&xi, p);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }
    }

    #[test]
    fn prob_tangent_maps_to_sphere_tangent() {
        let g = GridSpec::interval(100).unwrap();
        let mu = bump(&g, 0.5, 0.15);
        let a = TangentField::new(g.clone(), g.sample(|x| (5.0 * x).cos()))
            .unwrap()
            .mean_free();
        let p = 3.0;
        let r = forward(&mu, p).unwrap();
        let xi = push_tangent(&mu, &a, p).unwrap();
        let defect: f64 = g
            .weights()
            .iter()
            .zip(xi.iter().zip(r.values()))
            .map(|(w, (x, gv))| w * x * gv.powf(p - 1.0))
            .sum();
        assert!(defect.abs() < 1e-10);
        let pulled = pull_tangent(&mu, &xi, p).unwrap();
        for (x, y) in pulled.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
