use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use lpfr_core::grid::{DensityField, GridSpec, TangentField};
use lpfr_core::io;

use crate::CliError;

/// Relative mass change above which loading a density prints a warning.
const MASS_WARNING: f64 = 1e-6;

pub fn grid(n: usize) -> Result<Arc<GridSpec>, CliError> {
    Ok(GridSpec::interval(n)?)
}

fn open(path: &str) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

/// A named family or a one-column file `f`, normalized to unit mass.
pub fn density(source: &str, grid: &Arc<GridSpec>) -> Result<DensityField, CliError> {
    let (mu, change) = if io::is_named(source) {
        io::named_density(source, grid)?
    } else {
        let values = io::read_column(open(source)?, "f").map_err(|e| CliError::Usage(format!("{source}: {e}")))?;
        let (mu, mass) = DensityField::new(grid.clone(), values)
            .map_err(|e| CliError::Usage(format!("{source}: {e}")))?
            .normalized();
        (mu, (mass - 1.0).abs())
    };
    if change > MASS_WARNING {
        eprintln!("warning: {source}: renormalization changed the mass by {change:.3e}");
    }
    Ok(mu)
}

/// `sin(k,amp)`, `cos(k,amp)` or a one-column file `a`.
pub fn velocity(source: &str, grid: &Arc<GridSpec>) -> Result<TangentField, CliError> {
    if io::is_named(source) {
        return Ok(io::named_velocity(source, grid)?);
    }
    let values = io::read_column(open(source)?, "a").map_err(|e| CliError::Usage(format!("{source}: {e}")))?;
    TangentField::new(grid.clone(), values).map_err(|e| CliError::Usage(format!("{source}: {e}")))
}

/// Buffered writer to a file, or to standard output.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// `n` uniform times on `[0, t_end]`.
pub fn times(n: usize, t_end: f64) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("need at least 2 time points, got {n}")));
    }
    if t_end.is_nan() || t_end <= 0.0 || !t_end.is_finite() {
        return Err(CliError::Usage(format!("end time must be positive, got {t_end}")));
    }
    let m = (n - 1) as f64;
    Ok((0..n).map(|k| t_end * k as f64 / m).collect())
}
