//! Text formats and CSV reports.
//!
//! Ensemble files: a header line `n d`, then one line per state with `2d`
//! reals interleaved as `re₀ im₀ re₁ im₁ …`. Operator files: a header line
//! `n d`, then `d^n` rows of `2d^n` reals, row-major, same interleaving.
//! Lines starting with `#` and blank lines are ignored. Reals are written
//! with 17 significant digits so that parsing recovers them bit for bit.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::nogo::{DecayCurve, SpanningCertificate};
use crate::povm::{composite_dim, CompositeOperator, ValidationReport};
use crate::states::{PureState, StateEnsemble};

pub const CERTIFICATE_HEADER: &str = "n,d,A,epsilon,sigma_min,rank,verdict,residual";
pub const CURVE_HEADER: &str = "sample_count,nullspace_dim";
pub const VALIDATION_HEADER: &str = "element_label,min_eigenvalue,hermiticity_residue,completeness_residue";

/// 17 significant digits, scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(line: usize, text: &str) -> Result<(usize, usize)> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("expected a nonnegative integer, found {s:?}"),
        })
    };
    match fields.as_slice() {
        [n, d] => Ok((parse(n)?, parse(d)?)),
        _ => Err(Error::Parse {
            line,
            message: format!("header must be two integers `n d`, found {} fields", fields.len()),
        }),
    }
}

fn parse_complex_row(line: usize, text: &str, count: usize) -> Result<Vec<C64>> {
    let reals = text
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("not a real number: {s:?}") })
        })
        .collect::<Result<Vec<f64>>>()?;
    if reals.len() != 2 * count {
        return Err(Error::Parse {
            line,
            message: format!("expected {} reals, found {}", 2 * count, reals.len()),
        });
    }
    if let Some(bad) = reals.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parse { line, message: format!("non-finite value {bad}") });
    }
    Ok(reals.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

fn write_complex_row(out: &mut String, values: impl Iterator<Item = C64>) {
    let row: Vec<String> = values.flat_map(|z| [format_real(z.re), format_real(z.im)]).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

/// Reads rows after the header, reporting the last line seen on truncation.
fn take_rows<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    header_line: usize,
    rows: usize,
    width: usize,
    what: &str,
) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(rows);
    let mut last = header_line;
    for k in 0..rows {
        let Some((line, text)) = lines.next() else {
            return Err(Error::Parse {
                line: last,
                message: format!("header declares {rows} {what} but the file ends after {k}"),
            });
        };
        out.push(parse_complex_row(line, text, width)?);
        last = line;
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, message: format!("unexpected data after {rows} {what}") });
    }
    Ok(out)
}

pub fn parse_ensemble(text: &str) -> Result<StateEnsemble> {
    let mut lines = content_lines(text);
    let (header_line, header) =
        lines.next().ok_or(Error::Parse { line: 1, message: "missing header `n d`".into() })?;
    let (n, d) = parse_header(header_line, header)?;
    if n < 2 || d < 2 {
        return Err(Error::Parse {
            line: header_line,
            message: format!("need n >= 2 and d >= 2, found n={n}, d={d}"),
        });
    }
    let rows = take_rows(&mut lines, header_line, n, d, "states")?;
    let states = rows.into_iter().map(|row| PureState::from_slice(&row)).collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(states)
}

pub fn write_ensemble(e: &StateEnsemble) -> String {
    let mut out = format!("{} {}\n", e.n(), e.dim());
    for s in e.states() {
        write_complex_row(&mut out, s.amplitudes().iter().copied());
    }
    out
}

pub fn parse_operator(text: &str) -> Result<CompositeOperator> {
    let mut lines = content_lines(text);
    let (header_line, header) =
        lines.next().ok_or(Error::Parse { line: 1, message: "missing header `n d`".into() })?;
    let (n, d) = parse_header(header_line, header)?;
    let total =
        composite_dim(n, d).map_err(|e| Error::Parse { line: header_line, message: e.to_string() })?;
    let rows = take_rows(&mut lines, header_line, total, total, "rows")?;
    let matrix = CMatrix::from_fn(total, total, |r, c| rows[r][c]);
    CompositeOperator::new(n, d, matrix)
}

pub fn write_operator(m: &CompositeOperator) -> String {
    let mut out = format!("{} {}\n", m.n(), m.dim());
    for row in m.matrix().row_iter() {
        write_complex_row(&mut out, row.iter().copied());
    }
    out
}

pub fn certificate_csv(c: &SpanningCertificate) -> String {
    let residual = c.residual.map(format_real).unwrap_or_default();
    format!(
        "{CERTIFICATE_HEADER}\n{},{},{},{},{},{},{},{}\n",
        c.n,
        c.d,
        format_real(c.threshold),
        format_real(c.epsilon),
        format_real(c.sigma_min),
        c.rank,
        c.verdict,
        residual
    )
}

pub fn curve_csv(curve: &DecayCurve) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for (count, dim) in &curve.samples {
        out.push_str(&format!("{count},{dim}\n"));
    }
    out
}

/// One row per element; the completeness residue is repeated on each.
pub fn validation_csv(r: &ValidationReport) -> String {
    let mut out = format!("{VALIDATION_HEADER}\n");
    for e in &r.elements {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&e.label),
            format_real(e.min_eigenvalue),
            format_real(e.hermiticity_residue),
            format_real(r.completeness_residue)
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
