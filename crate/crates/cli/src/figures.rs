//! Figure presets. Every run is deterministic, so repeated invocations write
//! byte-identical files.

use std::path::Path;

use lpfr_core::dens_geo::geodesic_bvp_dens;
use lpfr_core::io;
use lpfr_core::parametric::{alpha_normal_rhs, lp_geodesic_rhs, shoot_bvp, NormalModel, ShootOptions};
use lpfr_core::prob_alpha::{alpha_geodesic_prob, AlphaTarget};
use lpfr_core::prob_lp::{lp_geodesic_prob_bvp, LpBvpOptions};

use crate::inputs::{density, grid, sink, times};
use crate::CliError;

const EXPONENTS: [f64; 4] = [2.0, 3.0, 5.0, 10.0];
const FIGURE2_MU0: &str = "bump(0.3,0.1)";
const FIGURE2_MU1: &str = "bump(0.7,0.1)";
const FIGURE2_TIMES: usize = 30;
const FIGURE2_NODES: usize = 100;
const FIGURE3_THETA0: [f64; 2] = [-2.0, 1.0];
const FIGURE3_THETA1: [f64; 2] = [2.0, 1.0];
const FIGURE3_STEPS: usize = 50;

fn prepare(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

/// For each exponent: the density-space geodesic, the α-geodesic and the
/// L^p-Fisher-Rao geodesic between two bumps on [0,1].
pub fn figure2(dir: &Path) -> Result<(), CliError> {
    prepare(dir)?;
    let g = grid(FIGURE2_NODES)?;
    let mu0 = density(FIGURE2_MU0, &g)?;
    let mu1 = density(FIGURE2_MU1, &g)?;
    let ts = times(FIGURE2_TIMES, 1.0)?;
    for p in EXPONENTS {
        let tag = format!("p{p}");
        let dens = geodesic_bvp_dens(&mu0, &mu1, p, &ts)?;
        io::write_path_csv(sink(Some(&dir.join(format!("fig2_{tag}_dens.csv"))))?, &dens, p)?;

        let alpha = alpha_geodesic_prob(&mu0, &AlphaTarget::Endpoint(mu1.clone()), p, &ts)?;
        io::write_path_csv(sink(Some(&dir.join(format!("fig2_{tag}_alpha.csv"))))?, &alpha.path, p)?;

        let opts = LpBvpOptions {
            t_steps: FIGURE2_TIMES,
            ..Default::default()
        };
        let lp = lp_geodesic_prob_bvp(&mu0, &mu1, p, &opts)?;
        io::write_path_csv(sink(Some(&dir.join(format!("fig2_{tag}_lp.csv"))))?, &lp.path, p)?;
        io::write_energy_csv(
            sink(Some(&dir.join(format!("fig2_{tag}_lp_energy.csv"))))?,
            &lp.energy_trace,
        )?;
        crate::commands::report_minimizer(&lp.status, lp.iterations, &lp.path)?;
        eprintln!(
            "p={p}: alpha vs L^p sup difference {:.3e} ({} iterations)",
            lp.path.sup_distance(&alpha.path)?,
            lp.iterations
        );
    }
    Ok(())
}

/// For each exponent: the L^p-Fisher-Rao and the α-connection geodesic
/// between two normal distributions.
pub fn figure3(dir: &Path) -> Result<(), CliError> {
    prepare(dir)?;
    let model = NormalModel::default();
    let opts = ShootOptions {
        steps: FIGURE3_STEPS,
        ..Default::default()
    };
    for p in EXPONENTS {
        let tag = format!("p{p}");
        let lp = shoot_bvp(|s| lp_geodesic_rhs(&model, s, p), FIGURE3_THETA0, FIGURE3_THETA1, &opts)?;
        io::write_normal_csv(sink(Some(&dir.join(format!("fig3_{tag}_lp.csv"))))?, p, &lp)?;
        let alpha = 1.0 - 2.0 / p;
        let al = shoot_bvp(|s| alpha_normal_rhs(s, alpha), FIGURE3_THETA0, FIGURE3_THETA1, &opts)?;
        io::write_normal_csv(sink(Some(&dir.join(format!("fig3_{tag}_alpha.csv"))))?, p, &al)?;
    }
    Ok(())
}
