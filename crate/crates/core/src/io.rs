//! Matrix Market exchange and trace export.
//!
//! Floats are written as `{:.16e}`, i.e. 17 significant digits, which is
//! enough for every `f64` to survive a write/read round trip bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{AnyMatrix, ComplexMatrix, Matrix, RealMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{IterationRecord, Method, SolveReport, SolverConfig, StopReason};
use num_complex::Complex64;

/// Column header of the CSV trace.
pub const TRACE_CSV_HEADER: &str = "k,alpha,beta,res_norm,fallback,wall_ns";
/// Column header of the comparison table CSV.
pub const COMPARISON_CSV_HEADER: &str = "method,n,iterations,matmul_count,final_res,converged,wall_ns";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

struct Header {
    layout: Layout,
    field: Field,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(Error::parse(
            1,
            "expected `%%MatrixMarket matrix <array|coordinate> <real|complex> <general|symmetric>`",
        ));
    }
    let layout = match toks[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(Error::parse(1, format!("unsupported format `{other}`"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(Error::parse(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" if field == Field::Complex => Symmetry::Hermitian,
        other => return Err(Error::parse(1, format!("unsupported symmetry `{other}`"))),
    };
    Ok(Header {
        layout,
        field,
        symmetry,
    })
}

fn parse_num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

fn parse_value(toks: &[&str], field: Field, line: usize) -> Result<Complex64> {
    let want = match field {
        Field::Real => 1,
        Field::Complex => 2,
    };
    if toks.len() != want {
        return Err(Error::parse(
            line,
            format!("expected {want} value token(s), found {}", toks.len()),
        ));
    }
    let re: f64 = parse_num(toks[0], line, "number")?;
    let im: f64 = if want == 2 {
        parse_num(toks[1], line, "number")?
    } else {
        0.0
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::parse(line, "non-finite entry"));
    }
    Ok(Complex64::new(re, im))
}

/// Parse Matrix Market text. Real fields produce [`AnyMatrix::Real`],
/// complex fields [`AnyMatrix::Complex`].
pub fn parse_matrix_market(text: &str) -> Result<AnyMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = match lines.next() {
        Some((_, l)) => parse_header(l)?,
        None => return Err(Error::parse(1, "empty input")),
    };
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = data
        .next()
        .ok_or_else(|| Error::parse(text.lines().count().max(1), "missing size line"))?;
    let size_toks: Vec<&str> = size.split_whitespace().collect();
    let want = match header.layout {
        Layout::Array => 2,
        Layout::Coordinate => 3,
    };
    if size_toks.len() != want {
        return Err(Error::parse(
            size_line,
            format!("size line needs {want} integers, found {}", size_toks.len()),
        ));
    }
    let rows: usize = parse_num(size_toks[0], size_line, "row count")?;
    let cols: usize = parse_num(size_toks[1], size_line, "column count")?;
    if header.symmetry != Symmetry::General && rows != cols {
        return Err(Error::parse(size_line, "symmetric matrix must be square"));
    }

    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut set = |i: usize, j: usize, v: Complex64| {
        out[i * cols + j] = v;
        if i != j {
            match header.symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => out[j * cols + i] = v,
                Symmetry::Hermitian => out[j * cols + i] = v.conj(),
            }
        }
    };

    let mut last_line = size_line;
    match header.layout {
        Layout::Array => {
            // column-major; symmetric files list the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if header.symmetry == Symmetry::General { 0 } else { j };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            for &(i, j) in &positions {
                let (ln, l) = data.next().ok_or_else(|| {
                    Error::parse(last_line, format!("expected {} entries", positions.len()))
                })?;
                let toks: Vec<&str> = l.split_whitespace().collect();
                set(i, j, parse_value(&toks, header.field, ln)?);
                last_line = ln;
            }
        }
        Layout::Coordinate => {
            let nnz: usize = parse_num(size_toks[2], size_line, "entry count")?;
            for _ in 0..nnz {
                let (ln, l) = data
                    .next()
                    .ok_or_else(|| Error::parse(last_line, format!("expected {nnz} entries")))?;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(Error::parse(ln, "expected `row col value`"));
                }
                let i: usize = parse_num(toks[0], ln, "row index")?;
                let j: usize = parse_num(toks[1], ln, "column index")?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(Error::parse(
                        ln,
                        format!("index ({i}, {j}) outside {rows}x{cols}"),
                    ));
                }
                if header.symmetry != Symmetry::General && j > i {
                    return Err(Error::parse(ln, "symmetric file lists an upper-triangle entry"));
                }
                set(i - 1, j - 1, parse_value(&toks[2..], header.field, ln)?);
                last_line = ln;
            }
        }
    }
    if let Some((ln, _)) = data.next() {
        return Err(Error::parse(ln, "unexpected data after the last entry"));
    }

    Ok(match header.field {
        Field::Real => AnyMatrix::Real(RealMatrix::from_vec(
            rows,
            cols,
            out.into_iter().map(|z| z.re).collect(),
        )?),
        Field::Complex => AnyMatrix::Complex(ComplexMatrix::from_vec(rows, cols, out)?),
    })
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text).map_err(|e| match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            line,
            msg,
        },
        other => other,
    })
}

/// Dense `array general` Matrix Market text.
pub fn format_matrix_market<T: Scalar>(m: &Matrix<T>) -> String {
    let field = if T::IS_COMPLEX { "complex" } else { "real" };
    let mut s = format!("%%MatrixMarket matrix array {field} general\n{} {}\n", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let v = m[(i, j)];
            if T::IS_COMPLEX {
                let _ = writeln!(s, "{:.16e} {:.16e}", v.re(), v.im());
            } else {
                let _ = writeln!(s, "{:.16e}", v.re());
            }
        }
    }
    s
}

pub fn write_matrix_market<T: Scalar>(m: &Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

pub fn write_any_matrix_market(m: &AnyMatrix, path: impl AsRef<Path>) -> Result<()> {
    match m {
        AnyMatrix::Real(m) => write_matrix_market(m, path),
        AnyMatrix::Complex(m) => write_matrix_market(m, path),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TraceFormat::Json,
            _ => TraceFormat::Csv,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown trace format `{other}`"))),
        }
    }
}

/// Extra context stored alongside a JSON trace.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceMeta {
    /// Generator seed, when the matrix was generated.
    pub seed: Option<u64>,
}

/// JSON trace document: the solve report without the inverse, plus metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub method: Method,
    pub n: usize,
    pub epsilon: f64,
    pub seed: Option<u64>,
    pub final_res: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub matmul_count: usize,
    pub wall_ns: u64,
    pub denom_tol: f64,
    pub config: SolverConfig,
    pub trace: Vec<IterationRecord>,
}

impl TraceFile {
    pub fn from_report<T: Scalar>(report: &SolveReport<T>, meta: &TraceMeta) -> Self {
        TraceFile {
            method: report.method,
            n: report.n(),
            epsilon: report.config.epsilon,
            seed: meta.seed,
            final_res: report.final_res,
            iterations: report.iterations,
            converged: report.converged,
            stop_reason: report.stop_reason,
            matmul_count: report.matmul_count,
            wall_ns: report.wall_ns,
            denom_tol: report.denom_tol,
            config: report.config.clone(),
            trace: report.trace.clone(),
        }
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(trace: &[IterationRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{:.16e},{},{}",
            r.k,
            opt_float(r.alpha),
            opt_float(r.beta),
            r.res_norm,
            r.fallback,
            r.wall_ns
        )?;
    }
    Ok(())
}

/// Parse CSV written by [`write_trace_csv`].
pub fn parse_trace_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == TRACE_CSV_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header `{TRACE_CSV_HEADER}`"))),
    }
    let opt = |tok: &str, ln: usize| -> Result<Option<f64>> {
        if tok.is_empty() {
            Ok(None)
        } else {
            parse_num(tok, ln, "number").map(Some)
        }
    };
    let mut out = Vec::new();
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse(ln, format!("expected 6 columns, found {}", f.len())));
        }
        out.push(IterationRecord {
            k: parse_num(f[0], ln, "k")?,
            alpha: opt(f[1], ln)?,
            beta: opt(f[2], ln)?,
            res_norm: parse_num(f[3], ln, "res_norm")?,
            fallback: parse_num(f[4], ln, "fallback")?,
            wall_ns: parse_num(f[5], ln, "wall_ns")?,
        });
    }
    Ok(out)
}

/// serde_json formatter printing every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn trace_json_string(file: &TraceFile) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    file.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

pub fn export_trace<T: Scalar>(
    report: &SolveReport<T>,
    format: TraceFormat,
    path: impl AsRef<Path>,
    meta: &TraceMeta,
) -> Result<()> {
    let path = path.as_ref();
    match format {
        TraceFormat::Csv => {
            let mut buf = Vec::new();
            write_trace_csv(&report.trace, &mut buf)?;
            fs::write(path, buf)?;
        }
        TraceFormat::Json => {
            fs::write(path, trace_json_string(&TraceFile::from_report(report, meta))?)?;
        }
    }
    Ok(())
}

pub fn read_trace_json(path: impl AsRef<Path>) -> Result<TraceFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One row of a method comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub n: usize,
    pub iterations: usize,
    pub matmul_count: usize,
    pub final_res: f64,
    pub converged: bool,
    pub wall_ns: u64,
}

impl ComparisonRow {
    pub fn from_report<T: Scalar>(r: &SolveReport<T>) -> Self {
        ComparisonRow {
            method: r.method,
            n: r.n(),
            iterations: r.iterations,
            matmul_count: r.matmul_count,
            final_res: r.final_res,
            converged: r.converged,
            wall_ns: r.wall_ns,
        }
    }
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{COMPARISON_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.16e},{},{}",
            r.method, r.n, r.iterations, r.matmul_count, r.final_res, r.converged, r.wall_ns
        )?;
    }
    Ok(())
}
