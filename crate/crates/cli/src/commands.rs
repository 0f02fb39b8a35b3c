use std::io::Write;

use lpfr_core::dens_geo::{distance_dens, geodesic_bvp_dens, geodesic_ivp_dens};
use lpfr_core::grid::{DensityField, GridSpec, TangentField};
use lpfr_core::io;
use lpfr_core::p_root::{forward, push_tangent};
use lpfr_core::parametric::{alpha_normal_rhs, lp_geodesic_rhs, shoot_bvp, NormalModel, ShootOptions};
use lpfr_core::prob_alpha::{alpha_geodesic_prob, tau_bvp, tau_ivp, AlphaTarget, DEFAULT_TAU_STEP};
use lpfr_core::prob_lp::{lp_geodesic_prob_bvp, LpBvpOptions, MinimizerStatus};
use lpfr_core::tensors::{cartan_c, chern_prob_apply, fd_cartan_c, fd_hessian_g, hessian_g, TensorContext};

use crate::inputs::{density, grid, sink, times, velocity};
use crate::{CliError, Command, Connection};

fn io_failure(e: std::io::Error) -> CliError {
    CliError::Usage(format!("write failed: {e}"))
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::DensGeodesic {
            exponent,
            grid: g,
            mu0,
            mu1,
            steps,
            out,
        } => {
            let p = exponent.resolve()?;
            let g = grid(g.grid_n)?;
            let (mu0, mu1) = (density(&mu0, &g)?, density(&mu1, &g)?);
            let path = geodesic_bvp_dens(&mu0, &mu1, p, &times(steps, 1.0)?)?;
            io::write_path_csv(sink(out.out.as_deref())?, &path, p)?;
            Ok(())
        }
        Command::DensExp {
            exponent,
            grid: g,
            mu0,
            velocity: v,
            steps,
            t_max,
            out,
        } => {
            let p = exponent.resolve()?;
            let g = grid(g.grid_n)?;
            let mu0 = density(&mu0, &g)?;
            let a = velocity(&v, &g)?;
            let r = geodesic_ivp_dens(&mu0, &a, p, &times(steps, t_max)?)?;
            io::write_path_csv(sink(out.out.as_deref())?, &r.path, p)?;
            left_space(r.left_space, r.blowup_time)
        }
        Command::Distance {
            exponent,
            grid: g,
            mu0,
            mu1,
            out,
        } => {
            let p = exponent.resolve()?;
            let g = grid(g.grid_n)?;
            let d = distance_dens(&density(&mu0, &g)?, &density(&mu1, &g)?, p)?;
            let mut w = sink(out.out.as_deref())?;
            writeln!(w, "{d:e}").map_err(io_failure)?;
            w.flush().map_err(io_failure)
        }
        Command::ProbAlphaGeodesic {
            exponent,
            grid: g,
            mu0,
            mu1,
            velocity: v,
            steps,
            t_max,
            tau_out,
            out,
        } => {
            let p = exponent.resolve()?;
            let g = grid(g.grid_n)?;
            let mu0 = density(&mu0, &g)?;
            let (target, t_end) = match (mu1, v) {
                (Some(mu1), None) => (AlphaTarget::Endpoint(density(&mu1, &g)?), 1.0),
                (None, Some(v)) => (AlphaTarget::Velocity(velocity(&v, &g)?), t_max),
                _ => return Err(CliError::Usage("give exactly one of --mu1 and --velocity".into())),
            };
            let ts = times(steps, t_end)?;
            let r = alpha_geodesic_prob(&mu0, &target, p, &ts)?;
            io::write_path_csv(sink(out.out.as_deref())?, &r.path, p)?;
            if let Some(path) = tau_out {
                write_tau(&path, &mu0, &target, p, steps, t_end)?;
            }
            left_space(r.left_space, r.blowup_time)
        }
        Command::ProbLpGeodesic {
            exponent,
            grid: g,
            mu0,
            mu1,
            steps,
            tol,
            max_iter,
            eta0,
            energy_out,
            out,
        } => {
            let p = exponent.resolve()?;
            let g = grid(g.grid_n)?;
            let (mu0, mu1) = (density(&mu0, &g)?, density(&mu1, &g)?);
            let opts = LpBvpOptions {
                t_steps: steps,
                max_iter,
                tol,
                eta0,
            };
            let r = lp_geodesic_prob_bvp(&mu0, &mu1, p, &opts)?;
            io::write_path_csv(sink(out.out.as_deref())?, &r.path, p)?;
            if let Some(path) = energy_out {
                io::write_energy_csv(sink(Some(&path))?, &r.energy_trace)?;
            }
            report_minimizer(&r.status, r.iterations, &r.path)
        }
        Command::NormalGeodesic {
            exponent,
            connection,
            theta0,
            theta1,
            steps,
            tol,
            max_iter,
            quadrature,
            out,
        } => {
            let p = exponent.resolve()?;
            let connection = connection.unwrap_or(if exponent.alpha.is_some() {
                Connection::Alpha
            } else {
                Connection::Lp
            });
            let opts = ShootOptions {
                steps,
                tol,
                max_newton: max_iter,
                ..Default::default()
            };
            let traj = match connection {
                Connection::Lp => {
                    let model = NormalModel::new(quadrature)?;
                    shoot_bvp(|s| lp_geodesic_rhs(&model, s, p), theta0, theta1, &opts)?
                }
                Connection::Alpha => {
                    let alpha = 1.0 - 2.0 / p;
                    shoot_bvp(|s| alpha_normal_rhs(s, alpha), theta0, theta1, &opts)?
                }
            };
            io::write_normal_csv(sink(out.out.as_deref())?, p, &traj)?;
            Ok(())
        }
        Command::CheckTensors { grid: g, out } => check_tensors(g.grid_n, out.out.as_deref()),
    }
}

fn left_space(left: bool, blowup: Option<f64>) -> Result<(), CliError> {
    if left {
        let at = blowup.map(|t| format!(" at t = {t:.6}")).unwrap_or_default();
        Err(CliError::LeftSpace(format!(
            "positivity lost{at}; partial path written"
        )))
    } else {
        Ok(())
    }
}

pub fn report_minimizer(
    status: &MinimizerStatus,
    iterations: usize,
    path: &lpfr_core::PathGrid,
) -> Result<(), CliError> {
    let flagged = path.frames().iter().filter(|f| !f.is_positive()).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} frame(s) have nonpositive nodes");
    }
    match status {
        MinimizerStatus::Converged => Ok(()),
        MinimizerStatus::MaxIter => {
            eprintln!("warning: iteration limit reached after {iterations} steps");
            Ok(())
        }
        MinimizerStatus::Stalled => Err(CliError::Solver(format!(
            "energy stopped decreasing after {iterations} steps; last path written"
        ))),
    }
}

fn write_tau(
    path: &std::path::Path,
    mu0: &DensityField,
    target: &AlphaTarget,
    p: f64,
    steps: usize,
    t_end: f64,
) -> Result<(), CliError> {
    let f = forward(mu0, p)?;
    let traj = match target {
        AlphaTarget::Endpoint(mu1) => tau_bvp(&f, &forward(mu1, p)?, steps)?,
        AlphaTarget::Velocity(a) => {
            let xi = push_tangent(mu0, a, p)?;
            tau_ivp(&f, &xi, t_end, DEFAULT_TAU_STEP)?
        }
    };
    io::write_tau_csv(sink(Some(path))?, p, &traj.times, &traj.tau, &traj.tau_dot)?;
    Ok(())
}

/// Finite-difference steps for the second- and third-order oracles.
const H_SECOND: f64 = 1e-4;
const H_THIRD: f64 = 1e-3;
const TOL_HESSIAN: f64 = 1e-5;
const TOL_CARTAN: f64 = 1e-3;

fn fields(g: &std::sync::Arc<GridSpec>) -> Result<Vec<TangentField>, CliError> {
    use std::f64::consts::PI;
    let shapes: [&dyn Fn(f64) -> f64; 4] = [
        &|x| (2.0 * PI * x).sin() + 0.3,
        &|x| (3.0 * x).cos() - 0.5 * x,
        &|x| x * x - 0.4,
        &|x| (5.0 * x).sin() * 0.7 + 0.1,
    ];
    shapes
        .iter()
        .map(|f| TangentField::new(g.clone(), g.sample(f)).map_err(CliError::from))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn check_tensors(n: usize, out: Option<&std::path::Path>) -> Result<(), CliError> {
    use std::f64::consts::PI;
    let g = grid(n)?;
    let mu = DensityField::new(g.clone(), g.sample(|x| 1.0 + 0.4 * (2.0 * PI * x).sin()))?;
    let nu = TangentField::new(g.clone(), g.sample(|x| 0.8 + 0.5 * (3.0 * x).cos()))?;
    let f = fields(&g)?;
    let mut w = sink(out)?;
    writeln!(w, "tensor,p,max_rel_error").map_err(io_failure)?;
    let mut failed = Vec::new();
    for p in [1.5, 2.0, 3.0, 5.0] {
        let ctx = TensorContext::new(mu.clone(), nu.clone(), p)?;
        let mut g_err: f64 = 0.0;
        let mut c_err: f64 = 0.0;
        let mut c_nu: f64 = 0.0;
        for i in 0..f.len() {
            for j in i..f.len() {
                g_err = g_err.max(rel(
                    fd_hessian_g(&ctx, &f[i], &f[j], H_SECOND)?,
                    hessian_g(&ctx, &f[i], &f[j])?,
                ));
                c_nu = c_nu.max(cartan_c(&ctx, ctx.nu(), &f[i], &f[j])?.abs());
                for k in j..f.len() {
                    let exact = cartan_c(&ctx, &f[i], &f[j], &f[k])?;
                    let fd = fd_cartan_c(&ctx, &f[i], &f[j], &f[k], H_THIRD)?;
                    // the Cartan tensor vanishes identically at p = 2
                    c_err = c_err.max(if p == 2.0 { (fd - exact).abs() } else { rel(fd, exact) });
                }
            }
        }
        writeln!(w, "hessian_g,{p},{g_err:.3e}").map_err(io_failure)?;
        writeln!(w, "cartan_C,{p},{c_err:.3e}").map_err(io_failure)?;
        writeln!(w, "cartan_C(nu;.,.),{p},{c_nu:.3e}").map_err(io_failure)?;
        if g_err > TOL_HESSIAN {
            failed.push(format!("hessian_g at p={p}"));
        }
        if c_err > TOL_CARTAN {
            failed.push(format!("cartan_C at p={p}"));
        }
    }

    // the Chern connection on probability densities preserves unit mass
    let gp = GridSpec::periodic(n)?;
    let mu = DensityField::new(gp.clone(), gp.sample(|x| 1.0 + 0.3 * (2.0 * PI * x).cos()))?
        .normalized()
        .0;
    let shift = 0.3 / n as f64;
    let nu = TangentField::new(gp.clone(), gp.sample(|x| (2.0 * PI * (x + shift)).sin()))?.mean_free();
    let a = TangentField::new(gp.clone(), gp.sample(|x| (4.0 * PI * x).cos() + x))?.mean_free();
    let dnu = TangentField::new(gp.clone(), gp.sample(|x| (6.0 * PI * x).sin() * x))?.mean_free();
    for p in [1.5, 2.0, 3.0, 5.0] {
        let ctx = TensorContext::new(mu.clone(), nu.clone(), p)?;
        let mass = chern_prob_apply(&ctx, &a, &dnu)?.integral().abs();
        writeln!(w, "chern_prob_mass,{p},{mass:.3e}").map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(format!("oracle mismatch: {}", failed.join(", "))))
    }
}
