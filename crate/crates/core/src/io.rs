//! CSV input and output, plus the named density and velocity families.
//!
//! Densities and velocities are single-column files (`f` or `a`) with one row
//! per grid node. Paths are written one frame per row under a `t,f0,…` header,
//! preceded by a `# p=…,alpha=…` comment line.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{alpha_from_p, DensityField, GridSpec, PathGrid, TangentField};
use crate::parametric::NormalTrajectory;

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

fn io_error(e: std::io::Error) -> Error {
    Error::Format(format!("io: {e}"))
}

/// Reads a single named column of floats.
pub fn read_column<R: Read>(reader: R, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Format(format!("missing column `{column}`")))?;
    rdr.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec.map_err(csv_error)?;
            let field = rec
                .get(idx)
                .ok_or_else(|| Error::Format(format!("row {}: missing value", row + 1)))?;
            field
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("row {}: `{field}` is not a number", row + 1)))
        })
        .collect()
}

/// Writes a single named column of floats.
pub fn write_column<W: Write>(writer: W, column: &str, values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([column]).map_err(csv_error)?;
    for v in values {
        wtr.write_record([fmt(*v)]).map_err(csv_error)?;
    }
    wtr.flush().map_err(io_error)
}

/// Shortest decimal representation that round-trips.
fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Rescales to unit mass and reports the relative mass change.
fn to_probability(grid: &Arc<GridSpec>, values: Vec<f64>) -> Result<(DensityField, f64)> {
    let (d, mass) = DensityField::new(grid.clone(), values)?.normalized();
    Ok((d, (mass - 1.0).abs()))
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Gaussian density restricted to `[0, 1]` and normalized there.
fn truncated_gaussian(m: f64, s: f64) -> Result<impl Fn(f64) -> f64> {
    if !(s > 0.0) || !s.is_finite() || !m.is_finite() {
        return Err(Error::Format(format!(
            "bump needs a finite mean and positive width, got ({m}, {s})"
        )));
    }
    let z = std_normal_cdf((1.0 - m) / s) - std_normal_cdf(-m / s);
    if !(z > 0.0) {
        return Err(Error::Format(format!("bump({m},{s}) has no mass on [0,1]")));
    }
    let c = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt() * z);
    Ok(move |x: f64| c * (-0.5 * ((x - m) / s).powi(2)).exp())
}

/// `name(arg, …)` → `(name, args)`; a bare name has no arguments.
fn parse_call(source: &str) -> Option<(String, Vec<f64>)> {
    let source = source.trim();
    let (name, rest) = match source.find('(') {
        Some(i) => (&source[..i], &source[i..]),
        None => (source, ""),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let args = if rest.is_empty() {
        Vec::new()
    } else {
        let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
        if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| a.trim().parse::<f64>().ok())
                .collect::<Option<Vec<_>>>()?
        }
    };
    Some((name.to_ascii_lowercase(), args))
}

fn arity(name: &str, args: &[f64], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(Error::Format(format!("{name} takes {n} arguments, got {}", args.len())))
    }
}

/// Whether `source` looks like a named family rather than a file path.
pub fn is_named(source: &str) -> bool {
    matches!(parse_call(source), Some((name, _)) if ["uniform", "bump", "mixture", "sin", "cos"].contains(&name.as_str()))
}

/// `uniform`, `bump(m,s)` or `mixture(m1,s1,m2,s2,w)` sampled on the grid and
/// normalized to unit mass. Returns the density and the relative change of
/// mass caused by the quadrature renormalization.
pub fn named_density(source: &str, grid: &Arc<GridSpec>) -> Result<(DensityField, f64)> {
    let (name, args) = parse_call(source).ok_or_else(|| Error::Format(format!("cannot parse density `{source}`")))?;
    match name.as_str() {
        "uniform" => {
            arity("uniform", &args, 0)?;
            Ok((DensityField::reference(grid.clone()), 0.0))
        }
        "bump" => {
            arity("bump", &args, 2)?;
            let f = truncated_gaussian(args[0], args[1])?;
            to_probability(grid, grid.sample(f))
        }
        "mixture" => {
            arity("mixture", &args, 5)?;
            let w = args[4];
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Format(format!("mixture weight must lie in [0,1], got {w}")));
            }
            let f1 = truncated_gaussian(args[0], args[1])?;
            let f2 = truncated_gaussian(args[2], args[3])?;
            to_probability(grid, grid.sample(|x| w * f1(x) + (1.0 - w) * f2(x)))
        }
        _ => Err(Error::Format(format!("unknown density family `{name}`"))),
    }
}

/// `sin(k,amp)` or `cos(k,amp)`: `amp · sin(2πkx)` made mean-free on the grid.
pub fn named_velocity(source: &str, grid: &Arc<GridSpec>) -> Result<TangentField> {
    let (name, args) = parse_call(source).ok_or_else(|| Error::Format(format!("cannot parse velocity `{source}`")))?;
    arity(&name, &args, 2)?;
    let (k, amp) = (args[0], args[1]);
    let two_pi = 2.0 * std::f64::consts::PI;
    let values = match name.as_str() {
        "sin" => grid.sample(|x| amp * (two_pi * k * x).sin()),
        "cos" => grid.sample(|x| amp * (two_pi * k * x).cos()),
        _ => return Err(Error::Format(format!("unknown velocity family `{name}`"))),
    };
    Ok(TangentField::new(grid.clone(), values)?.mean_free())
}

/// Writes the path with a `# p=…,alpha=…` line and a `t,f0,…` header.
pub fn write_path_csv<W: Write>(mut writer: W, path: &PathGrid, p: f64) -> Result<()> {
    write_exponent_comment(&mut writer, p)?;
    let mut wtr = csv::Writer::from_writer(writer);
    let n = path.grid().map(|g| g.n()).unwrap_or(0);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|i| format!("f{i}")))
        .collect();
    wtr.write_record(&header).map_err(csv_error)?;
    for (t, frame) in path.times().iter().zip(path.frames()) {
        let row: Vec<String> = std::iter::once(fmt(*t))
            .chain(frame.values().iter().map(|v| fmt(*v)))
            .collect();
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush().map_err(io_error)
}

/// Reads a file written by [`write_path_csv`] on the given grid.
pub fn read_path_csv<R: Read>(reader: R, grid: &Arc<GridSpec>, probability: bool) -> Result<PathGrid> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut times = Vec::new();
    let mut frames = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let nums = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        let (t, values) = nums.split_first().ok_or_else(|| Error::Format("empty row".into()))?;
        times.push(*t);
        frames.push(DensityField::flagged(grid.clone(), values.to_vec(), probability)?);
    }
    PathGrid::new(times, frames)
}

fn write_exponent_comment<W: Write>(writer: &mut W, p: f64) -> Result<()> {
    let alpha = alpha_from_p(p)?;
    writeln!(writer, "# p={},alpha={}", fmt(p), fmt(alpha)).map_err(io_error)
}

/// Generic table writer: a header and rows of numbers.
pub fn write_table<W: Write>(writer: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header).map_err(csv_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::LengthMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        wtr.write_record(row.iter().map(|v| fmt(*v))).map_err(csv_error)?;
    }
    wtr.flush().map_err(io_error)
}

/// Columns `t,tau,tau_dot` after a `# p=…,alpha=…` line.
pub fn write_tau_csv<W: Write>(mut writer: W, p: f64, times: &[f64], tau: &[f64], tau_dot: &[f64]) -> Result<()> {
    write_exponent_comment(&mut writer, p)?;
    write_table(
        writer,
        &["t", "tau", "tau_dot"],
        (0..times.len().min(tau.len()).min(tau_dot.len())).map(|k| vec![times[k], tau[k], tau_dot[k]]),
    )
}

/// Columns `iteration,energy`.
pub fn write_energy_csv<W: Write>(writer: W, trace: &[f64]) -> Result<()> {
    write_table(
        writer,
        &["iteration", "energy"],
        trace.iter().enumerate().map(|(k, e)| vec![k as f64, *e]),
    )
}

/// Columns `t,m,sigma,m_dot,sigma_dot` after a `# p=…,alpha=…` line.
pub fn write_normal_csv<W: Write>(mut writer: W, p: f64, traj: &NormalTrajectory) -> Result<()> {
    write_exponent_comment(&mut writer, p)?;
    write_table(
        writer,
        &["t", "m", "sigma", "m_dot", "sigma_dot"],
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| vec![*t, s.m, s.sigma, s.m_dot, s.sigma_dot]),
    )
}
