//! Minimal CSV reading and writing for the fixed dialect used throughout:
//! comma separator, `.` decimal point, UTF-8, mandatory header row, no
//! quoting, reals rendered with 17 significant digits.

use crate::error::{Error, Result};
use crate::geometry::Coords;
use nalgebra::DMatrix;

/// Renders a real with 17 significant digits (scientific notation), the
/// fixed precision for every real written to a CSV or metadata file.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// A parsed `x,y,<name1>,...,<namem>` table: coordinates plus one value
/// column per name.
#[derive(Debug, Clone)]
pub struct XyData {
    pub coords: Coords,
    /// n×m value matrix, columns in header order.
    pub values: DMatrix<f64>,
    /// Value column names from the header (everything after `x,y`).
    pub names: Vec<String>,
}

/// Parses a CSV with header `x,y,<name1>,...,<namem>`. Rows and columns in
/// error reports are 1-based file positions (the header is row 1). Blank
/// lines are skipped; fields may carry surrounding whitespace.
pub fn parse_xy_csv(text: &str) -> Result<XyData> {
    let bad = |row: usize, col: usize, reason: String| Error::CsvFormat { row, col, reason };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (header_row, header) = lines
        .next()
        .ok_or_else(|| bad(1, 1, "file is empty".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() < 3 {
        return Err(bad(
            header_row,
            fields.len(),
            format!("expected header `x,y,<name1>,...`, got {} columns", fields.len()),
        ));
    }
    if fields[0] != "x" || fields[1] != "y" {
        return Err(bad(
            header_row,
            1,
            format!("header must start with `x,y`, got `{},{}`", fields[0], fields[1]),
        ));
    }
    let names: Vec<String> = fields[2..].iter().map(|s| s.to_string()).collect();
    for (j, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(bad(header_row, j + 3, "empty column name".into()));
        }
    }
    let m = names.len();

    let mut pts = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 2 {
            return Err(bad(
                line_no,
                fields.len(),
                format!("expected {} fields, got {}", m + 2, fields.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(m + 2);
        for (j, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| bad(line_no, j + 1, format!("`{}` is not a number", f.trim())))?;
            if !v.is_finite() {
                return Err(bad(line_no, j + 1, format!("non-finite value `{}`", f.trim())));
            }
            parsed.push(v);
        }
        pts.push([parsed[0], parsed[1]]);
        rows.extend_from_slice(&parsed[2..]);
    }
    let n = pts.len();
    if n == 0 {
        return Err(bad(header_row, 1, "no data rows".into()));
    }
    let coords = Coords::new(pts)?;
    let values = DMatrix::from_row_slice(n, m, &rows);
    Ok(XyData {
        coords,
        values,
        names,
    })
}

/// Renders a coordinate+values table as CSV with header `x,y,<names...>`.
pub fn render_xy_csv(coords: &Coords, values: &DMatrix<f64>, names: &[String]) -> Result<String> {
    if values.nrows() != coords.len() {
        return Err(Error::DimensionMismatch {
            what: "value rows per coordinate".into(),
            expected: coords.len(),
            got: values.nrows(),
        });
    }
    if values.ncols() != names.len() {
        return Err(Error::DimensionMismatch {
            what: "value columns per name".into(),
            expected: names.len(),
            got: values.ncols(),
        });
    }
    let mut out = String::from("x,y");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, p) in coords.iter().enumerate() {
        out.push_str(&fmt_real(p[0]));
        out.push(',');
        out.push_str(&fmt_real(p[1]));
        for j in 0..values.ncols() {
            out.push(',');
            out.push_str(&fmt_real(values[(i, j)]));
        }
        out.push('\n');
    }
    Ok(out)
}
