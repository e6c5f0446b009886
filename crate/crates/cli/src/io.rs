//! CSV readers and writers for every file the tool consumes or emits.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back yields bit-identical values. Lines starting with `#` are comments.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use krigeweight::geometry::{Bounds, Location};
use krigeweight::pointprocess::{GridSpec, IntensitySurface};

use crate::error::{CliError, CliResult};

pub const DATA_REQUIRED: [&str; 4] = ["id", "x", "y", "value"];
pub const DATA_OPTIONAL: [&str; 3] = ["inclusion_prob", "stratum", "covariate"];
pub const PARAMS_HEADER: [&str; 7] = ["scheme", "tau2", "sigma2", "range", "objective", "converged", "iterations"];
pub const PREDICTIONS_HEADER: [&str; 8] = ["id", "x", "y", "mean", "variance", "scheme", "effective_n", "seed"];
pub const INTENSITY_HEADER: [&str; 3] = ["x", "y", "intensity"];

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub inclusion_prob: Option<f64>,
    pub stratum: Option<String>,
    pub covariate: Option<f64>,
}

impl DataRow {
    pub fn location(&self) -> Location {
        Location::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsRow {
    pub scheme: String,
    pub tau2: f64,
    pub sigma2: f64,
    pub range: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub mean: f64,
    pub variance: f64,
    pub scheme: String,
    pub effective_n: usize,
    pub seed: u64,
}

fn open_reader(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })
}

struct Table {
    header: Vec<String>,
    header_line: u64,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let mut rdr = open_reader(path)?;
    let header_record = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let header_line = header_record.position().map_or(1, |p| p.line());
    let header: Vec<String> = header_record.iter().map(str::to_string).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(CliError::schema(path, header_line, "missing header"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Table { header, header_line, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::File { path: path.to_path_buf(), message: e.to_string() },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            CliError::schema(path, line, format!("expected {expected_len} fields, found {len}"))
        }
        _ => CliError::schema(path, line, e.to_string()),
    }
}

fn parse_f64(path: &Path, line: u64, col: &str, raw: &str) -> CliResult<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| CliError::schema(path, line, format!("column `{col}`: `{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::schema(path, line, format!("column `{col}`: `{raw}` is not finite")));
    }
    Ok(v)
}

fn non_empty<'a>(path: &Path, line: u64, col: &str, raw: &'a str) -> CliResult<&'a str> {
    if raw.is_empty() {
        return Err(CliError::schema(path, line, format!("column `{col}` is empty")));
    }
    Ok(raw)
}

/// Column index of each name in `header`, requiring `required` as the leading
/// columns and allowing only `optional` afterwards.
fn layout(path: &Path, t: &Table, required: &[&str], optional: &[&str]) -> CliResult<Vec<Option<usize>>> {
    for (k, want) in required.iter().enumerate() {
        match t.header.get(k) {
            Some(h) if h == want => {}
            Some(h) => {
                return Err(CliError::schema(
                    path,
                    t.header_line,
                    format!("header column {} must be `{want}`, found `{h}`", k + 1),
                ))
            }
            None => return Err(CliError::schema(path, t.header_line, format!("header is missing `{want}`"))),
        }
    }
    let mut seen = HashSet::new();
    let mut idx = vec![None; optional.len()];
    for (k, h) in t.header.iter().enumerate().skip(required.len()) {
        let Some(pos) = optional.iter().position(|o| o == h) else {
            return Err(CliError::schema(path, t.header_line, format!("unknown column `{h}`")));
        };
        if !seen.insert(h.clone()) {
            return Err(CliError::schema(path, t.header_line, format!("duplicate column `{h}`")));
        }
        idx[pos] = Some(k);
    }
    Ok(idx)
}

fn require_rows(path: &Path, t: &Table) -> CliResult<()> {
    if t.rows.is_empty() {
        return Err(CliError::schema(path, t.header_line, "file has a header but no data rows"));
    }
    Ok(())
}

fn check_unique_id(path: &Path, line: u64, id: &str, seen: &mut HashSet<String>) -> CliResult<()> {
    if !seen.insert(id.to_string()) {
        return Err(CliError::schema(path, line, format!("duplicate id `{id}`")));
    }
    Ok(())
}

/// Reads `id,x,y,value[,inclusion_prob][,stratum][,covariate]`.
pub fn read_data(path: &Path) -> CliResult<Vec<DataRow>> {
    let t = read_table(path)?;
    let opt = layout(path, &t, &DATA_REQUIRED, &DATA_OPTIONAL)?;
    require_rows(path, &t)?;
    let mut ids = HashSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let id = non_empty(path, line, "id", &rec[0])?.to_string();
        check_unique_id(path, line, &id, &mut ids)?;
        let inclusion_prob = match opt[0] {
            Some(k) => {
                let p = parse_f64(path, line, "inclusion_prob", &rec[k])?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(CliError::schema(path, line, format!("inclusion_prob {p} outside (0, 1]")));
                }
                Some(p)
            }
            None => None,
        };
        let stratum = match opt[1] {
            Some(k) => Some(non_empty(path, line, "stratum", &rec[k])?.to_string()),
            None => None,
        };
        let covariate = match opt[2] {
            Some(k) => Some(parse_f64(path, line, "covariate", &rec[k])?),
            None => None,
        };
        out.push(DataRow {
            id,
            x: parse_f64(path, line, "x", &rec[1])?,
            y: parse_f64(path, line, "y", &rec[2])?,
            value: parse_f64(path, line, "value", &rec[3])?,
            inclusion_prob,
            stratum,
            covariate,
        });
    }
    Ok(out)
}

/// Reads `id,x,y`; a data file is also accepted and its extra columns ignored.
pub fn read_points(path: &Path) -> CliResult<Vec<PointRow>> {
    let t = read_table(path)?;
    let optional: Vec<&str> = std::iter::once("value").chain(DATA_OPTIONAL).collect();
    layout(path, &t, &["id", "x", "y"], &optional)?;
    require_rows(path, &t)?;
    let mut ids = HashSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let id = non_empty(path, *line, "id", &rec[0])?.to_string();
        check_unique_id(path, *line, &id, &mut ids)?;
        out.push(PointRow {
            id,
            x: parse_f64(path, *line, "x", &rec[1])?,
            y: parse_f64(path, *line, "y", &rec[2])?,
        });
    }
    Ok(out)
}

pub fn read_params(path: &Path) -> CliResult<Vec<ParamsRow>> {
    let t = read_table(path)?;
    layout(path, &t, &PARAMS_HEADER, &[])?;
    require_rows(path, &t)?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let converged = match &rec[5] {
                "true" => true,
                "false" => false,
                other => return Err(CliError::schema(path, line, format!("converged must be true or false, found `{other}`"))),
            };
            let iterations = rec[6]
                .parse()
                .map_err(|_| CliError::schema(path, line, format!("iterations `{}` is not a count", &rec[6])))?;
            Ok(ParamsRow {
                scheme: non_empty(path, line, "scheme", &rec[0])?.to_string(),
                tau2: parse_f64(path, line, "tau2", &rec[1])?,
                sigma2: parse_f64(path, line, "sigma2", &rec[2])?,
                range: parse_f64(path, line, "range", &rec[3])?,
                objective: parse_f64(path, line, "objective", &rec[4])?,
                converged,
                iterations,
            })
        })
        .collect()
}

pub fn read_predictions(path: &Path) -> CliResult<Vec<PredictionRow>> {
    let t = read_table(path)?;
    layout(path, &t, &PREDICTIONS_HEADER, &[])?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let count = |col: &str, raw: &str| -> CliResult<u64> {
                raw.parse().map_err(|_| CliError::schema(path, line, format!("column `{col}`: `{raw}` is not an integer")))
            };
            Ok(PredictionRow {
                id: rec[0].to_string(),
                x: parse_f64(path, line, "x", &rec[1])?,
                y: parse_f64(path, line, "y", &rec[2])?,
                mean: parse_f64(path, line, "mean", &rec[3])?,
                variance: parse_f64(path, line, "variance", &rec[4])?,
                scheme: rec[5].to_string(),
                effective_n: count("effective_n", &rec[6])? as usize,
                seed: count("seed", &rec[7])?,
            })
        })
        .collect()
}

/// Reads a row-major `x,y,intensity` grid (x varying fastest).
pub fn read_intensity(path: &Path) -> CliResult<IntensitySurface> {
    let t = read_table(path)?;
    layout(path, &t, &INTENSITY_HEADER, &[])?;
    require_rows(path, &t)?;
    let mut xs = Vec::with_capacity(t.rows.len());
    let mut ys = Vec::with_capacity(t.rows.len());
    let mut vals = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        xs.push(parse_f64(path, *line, "x", &rec[0])?);
        ys.push(parse_f64(path, *line, "y", &rec[1])?);
        vals.push(parse_f64(path, *line, "intensity", &rec[2])?);
    }
    let nx = ys.iter().take_while(|y| **y == ys[0]).count();
    if nx < 2 || xs.len() % nx != 0 || xs.len() / nx < 2 {
        return Err(CliError::File {
            path: path.to_path_buf(),
            message: "intensity rows do not form a regular grid of at least 2×2 nodes".into(),
        });
    }
    let ny = xs.len() / nx;
    let bounds = Bounds::new(xs[0], xs[nx - 1], ys[0], ys[xs.len() - 1])
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
    let grid = GridSpec::new(bounds, nx, ny)?;
    let tol = 1e-9 * bounds.diameter();
    for (k, (line, _)) in t.rows.iter().enumerate() {
        let (ix, iy) = (k % nx, k / nx);
        if (xs[k] - grid.x(ix)).abs() > tol || (ys[k] - grid.y(iy)).abs() > tol {
            return Err(CliError::schema(path, *line, "node is off the regular row-major grid"));
        }
    }
    IntensitySurface::new(grid, vals).map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })
}

/// CSV writer over a file, with an optional leading `#` comment line.
pub struct CsvOut {
    path: std::path::PathBuf,
    w: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, comment: Option<&str>, header: &[&str]) -> CliResult<Self> {
        let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
        let mut file = File::create(path).map_err(io_err)?;
        if let Some(c) = comment {
            writeln!(file, "# {c}").map_err(io_err)?;
        }
        let mut out = Self { path: path.to_path_buf(), w: csv::Writer::from_writer(file) };
        out.row(header.iter().copied())?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(|e| CliError::File { path: self.path.clone(), message: e.to_string() })
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.w.flush().map_err(|source| CliError::Io { path: self.path.clone(), source })
    }
}

pub fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_data(path: &Path, rows: &[DataRow]) -> CliResult<()> {
    let with_prob = rows.iter().any(|r| r.inclusion_prob.is_some());
    let with_stratum = rows.iter().any(|r| r.stratum.is_some());
    let with_cov = rows.iter().any(|r| r.covariate.is_some());
    let mut header: Vec<&str> = DATA_REQUIRED.to_vec();
    for (flag, name) in [(with_prob, "inclusion_prob"), (with_stratum, "stratum"), (with_cov, "covariate")] {
        if flag {
            header.push(name);
        }
    }
    let mut out = CsvOut::create(path, None, &header)?;
    for r in rows {
        let mut rec = vec![r.id.clone(), fmt(r.x), fmt(r.y), fmt(r.value)];
        if with_prob {
            rec.push(r.inclusion_prob.map(fmt).unwrap_or_default());
        }
        if with_stratum {
            rec.push(r.stratum.clone().unwrap_or_default());
        }
        if with_cov {
            rec.push(r.covariate.map(fmt).unwrap_or_default());
        }
        out.row(&rec)?;
    }
    out.finish()
}

pub fn write_points(path: &Path, rows: &[PointRow]) -> CliResult<()> {
    let mut out = CsvOut::create(path, None, &["id", "x", "y"])?;
    for r in rows {
        out.row([r.id.clone(), fmt(r.x), fmt(r.y)])?;
    }
    out.finish()
}

pub fn write_params(path: &Path, rows: &[ParamsRow]) -> CliResult<()> {
    let mut out = CsvOut::create(path, None, &PARAMS_HEADER)?;
    for r in rows {
        out.row([
            r.scheme.clone(),
            fmt(r.tau2),
            fmt(r.sigma2),
            fmt(r.range),
            fmt(r.objective),
            r.converged.to_string(),
            r.iterations.to_string(),
        ])?;
    }
    out.finish()
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> CliResult<()> {
    let mut out = CsvOut::create(path, None, &PREDICTIONS_HEADER)?;
    for r in rows {
        out.row([
            r.id.clone(),
            fmt(r.x),
            fmt(r.y),
            fmt(r.mean),
            fmt(r.variance),
            r.scheme.clone(),
            r.effective_n.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.finish()
}

pub fn write_intensity(path: &Path, surface: &IntensitySurface) -> CliResult<()> {
    let mut out = CsvOut::create(path, None, &INTENSITY_HEADER)?;
    for (p, v) in surface.grid().nodes().iter().zip(surface.values()) {
        out.row([fmt(p.x), fmt(p.y), fmt(*v)])?;
    }
    out.finish()
}
