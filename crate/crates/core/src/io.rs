//! Reading and writing distributions, joints, channels and result records.
//!
//! JSON uses the serde representations of the distribution types
//! (`{"p": [...]}`, `{"m": [[...]]}`, `{"t": [[[...]]]}`, `{"w": [[...]]}`).
//!
//! CSV layout, one line per row, `.` as decimal separator:
//!
//! | Object | Layout |
//! |--------|--------|
//! | distribution | a single row of probabilities |
//! | two-variable joint, channel | `# rows=n cols=m` then one row per `x` (per output for channels) |
//! | three-variable joint | `# shape=nx,ny,nz` then `nx*ny` rows of `nz` values, `(x, y)` row-major |
//! | result record | a header row of field names and one row of values; vectors expand to `name_0, name_1, ...` |
//!
//! Floats are written in the shortest form that parses back to the same `f64`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::distributions::{Channel, Distribution, JointDistribution2, JointDistribution3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format '{other}', expected json or csv"))),
        }
    }
}

/// Shortest round-trip representation of a float.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        let mut s = format!("{x:?}");
        if let Some(stripped) = s.strip_suffix(".0") {
            s = stripped.to_string();
        }
        s
    } else {
        format!("{x}")
    }
}

fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Validation(format!("CSV: {e}")))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Validation(format!("CSV row {}: '{f}' is not a number", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation("CSV input has no data rows".into()));
    }
    Ok(rows)
}

fn csv_shape3(text: &str) -> Result<(usize, usize, usize)> {
    let line = text
        .lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix('#').and_then(|c| c.trim().strip_prefix("shape=")))
        .ok_or_else(|| Error::Validation("three-variable CSV needs a '# shape=nx,ny,nz' line".into()))?;
    let dims = line
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| Error::Validation(format!("bad shape '{line}'"))))
        .collect::<Result<Vec<usize>>>()?;
    match dims[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Error::Validation(format!("shape needs three sizes, got '{line}'"))),
    }
}

/// Checks an optional `# rows=n cols=m` line against the parsed body.
fn check_rows_cols(text: &str, rows: &[Vec<f64>]) -> Result<()> {
    let Some(line) = text.lines().map(str::trim).find_map(|l| l.strip_prefix('#').map(str::trim)) else {
        return Ok(());
    };
    let mut dims = (None, None);
    for field in line.split_whitespace() {
        let parse = |v: &str| v.parse::<usize>().map_err(|_| Error::Validation(format!("bad header '{line}'")));
        if let Some(v) = field.strip_prefix("rows=") {
            dims.0 = Some(parse(v)?);
        } else if let Some(v) = field.strip_prefix("cols=") {
            dims.1 = Some(parse(v)?);
        }
    }
    if let Some(n) = dims.0 {
        if rows.len() != n {
            return Err(Error::Validation(format!("header declares {n} rows, body has {}", rows.len())));
        }
    }
    if let Some(m) = dims.1 {
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::Validation(format!("header declares {m} columns, a row has {}", bad.len())));
        }
    }
    Ok(())
}

fn write_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn from_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("{what} JSON: {e}")))
}

/// Reads a distribution; with `normalize` the entries may be any non-negative weights.
pub fn read_distribution(text: &str, format: Format, normalize: bool) -> Result<Distribution> {
    let weights = match format {
        Format::Json => {
            #[derive(serde::Deserialize)]
            struct Raw {
                p: Vec<f64>,
            }
            from_json::<Raw>(text, "distribution")?.p
        }
        Format::Csv => {
            let rows = csv_rows(text)?;
            if rows.len() != 1 {
                return Err(Error::Validation(format!("distribution CSV needs one row, got {}", rows.len())));
            }
            rows.into_iter().next().unwrap_or_default()
        }
    };
    Distribution::from_weights(weights, normalize)
}

pub fn read_joint2(text: &str, format: Format, normalize: bool) -> Result<JointDistribution2> {
    let rows = match format {
        Format::Json => {
            #[derive(serde::Deserialize)]
            struct Raw {
                m: Vec<Vec<f64>>,
            }
            from_json::<Raw>(text, "joint")?.m
        }
        Format::Csv => {
            let rows = csv_rows(text)?;
            check_rows_cols(text, &rows)?;
            rows
        }
    };
    let rows = if normalize { normalized_rows(rows)? } else { rows };
    JointDistribution2::from_rows(rows)
}

pub fn read_joint3(text: &str, format: Format, normalize: bool) -> Result<JointDistribution3> {
    let nested = match format {
        Format::Json => {
            #[derive(serde::Deserialize)]
            struct Raw {
                t: Vec<Vec<Vec<f64>>>,
            }
            from_json::<Raw>(text, "three-variable joint")?.t
        }
        Format::Csv => {
            let (nx, ny, nz) = csv_shape3(text)?;
            let rows = csv_rows(text)?;
            if rows.len() != nx * ny || rows.iter().any(|r| r.len() != nz) {
                return Err(Error::Validation(format!("CSV body does not match shape {nx},{ny},{nz}")));
            }
            rows.chunks(ny.max(1)).map(|c| c.to_vec()).collect()
        }
    };
    if normalize {
        let flat: Vec<f64> = nested.iter().flatten().flatten().copied().collect();
        let total = positive_total(&flat)?;
        let scaled = nested
            .into_iter()
            .map(|a| a.into_iter().map(|b| b.into_iter().map(|v| v / total).collect()).collect())
            .collect();
        JointDistribution3::from_nested(scaled)
    } else {
        JointDistribution3::from_nested(nested)
    }
}

pub fn read_channel(text: &str, format: Format) -> Result<Channel> {
    let rows = match format {
        Format::Json => {
            #[derive(serde::Deserialize)]
            struct Raw {
                w: Vec<Vec<f64>>,
            }
            from_json::<Raw>(text, "channel")?.w
        }
        Format::Csv => {
            let rows = csv_rows(text)?;
            check_rows_cols(text, &rows)?;
            rows
        }
    };
    Channel::from_rows(rows)
}

fn positive_total(values: &[f64]) -> Result<f64> {
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Validation(format!("weights must be finite and non-negative, got {bad}")));
    }
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::Validation("weights sum to zero".into()))
    }
}

fn normalized_rows(rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let total = positive_total(&flat)?;
    Ok(rows.into_iter().map(|r| r.into_iter().map(|v| v / total).collect()).collect())
}

pub fn write_distribution(p: &Distribution, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(p),
        Format::Csv => Ok(write_rows(std::iter::once(p.probs()))),
    }
}

pub fn write_joint2(j: &JointDistribution2, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(j),
        Format::Csv => {
            let (nx, ny) = j.shape();
            Ok(format!("# rows={nx} cols={ny}\n{}", write_rows(j.flat().chunks(ny))))
        }
    }
}

pub fn write_joint3(j: &JointDistribution3, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(j),
        Format::Csv => {
            let (nx, ny, nz) = j.shape();
            let mut out = format!("# shape={nx},{ny},{nz}\n");
            out.push_str(&write_rows(j.flat().chunks(nz)));
            Ok(out)
        }
    }
}

pub fn write_channel(w: &Channel, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(w),
        Format::Csv => {
            let (m, n) = w.shape();
            let rows = w.rows();
            Ok(format!("# rows={m} cols={n}\n{}", write_rows(rows.iter().map(Vec::as_slice))))
        }
    }
}

/// Compact JSON of any serializable value.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Validation(format!("JSON encoding: {e}")))
}

fn flatten_field(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_field(&format!("{prefix}_{i}"), v, out);
            }
        }
        Value::Object(map) => {
            for (k, v) in map {
                flatten_field(&format!("{prefix}_{k}"), v, out);
            }
        }
        Value::Number(n) => {
            let text = n.as_f64().map(format_f64).unwrap_or_else(|| n.to_string());
            out.push((prefix.to_string(), text));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

/// Writes a JSON object as a two-line CSV record (header, values).
pub fn record_to_csv(record: &Map<String, Value>) -> Result<String> {
    let mut fields = Vec::new();
    for (k, v) in record {
        flatten_field(k, v, &mut fields);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Validation(format!("CSV encoding: {e}"));
    writer.write_record(fields.iter().map(|(k, _)| k)).map_err(io_err)?;
    writer.write_record(fields.iter().map(|(_, v)| v)).map_err(io_err)?;
    let bytes = writer.into_inner().map_err(|e| Error::Validation(format!("CSV encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(format!("CSV encoding: {e}")))
}

/// Reads a record written by [`record_to_csv`] back as `(field, text)` pairs.
pub fn record_from_csv(text: &str) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Validation(format!("CSV: {e}")))?.clone();
    let mut records = reader.records();
    let row = records
        .next()
        .ok_or_else(|| Error::Validation("CSV record has no value row".into()))?
        .map_err(|e| Error::Validation(format!("CSV: {e}")))?;
    let mut out = Vec::with_capacity(header.len());
    for (k, v) in header.iter().zip(row.iter()) {
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Renders a record in the requested format, newline-terminated.
pub fn render_record(record: &Map<String, Value>, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = to_json(record)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => record_to_csv(record),
    }
}
