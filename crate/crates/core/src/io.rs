//! Grade-matrix CSV files.
//!
//! A matrix file has `m` data rows of `m` comma-separated decimals in
//! `[0, 1]`. Row `i` holds the grades agent `i` received; column `j` the
//! grades agent `j` gave. An optional first row is treated as a header when
//! any of its cells is not a number.
//!
//! A mask file has the same shape with cells `1` (graded) or `0` (not
//! graded). Cells the mask marks `0` may be left empty in the matrix file.

use std::fs;
use std::path::Path;

use crate::error::{PeerRankError, Result};
use crate::model::GradeMatrix;

struct Table<T> {
    /// One-based file line of the first data row.
    first_line: usize,
    rows: Vec<Vec<T>>,
}

fn read_table<T>(
    text: &str,
    source_name: &str,
    parse: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Table<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut first_line = None;
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| PeerRankError::Parse {
            source_name: source_name.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            col: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<T, String>> = record.iter().map(&parse).collect();
        if rows.is_empty() && first_line.is_none() && parsed.iter().any(|c| c.is_err()) && looks_like_header(&record) {
            // Header row: remember we saw it and move on.
            first_line = Some(line + 1);
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, cell) in parsed.into_iter().enumerate() {
            row.push(cell.map_err(|message| PeerRankError::Parse {
                source_name: source_name.to_string(),
                line,
                col: col + 1,
                message,
            })?);
        }
        if rows.is_empty() {
            first_line = Some(line);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(PeerRankError::Empty);
    }
    Ok(Table {
        first_line: first_line.unwrap_or(1),
        rows,
    })
}

/// A header has at least one cell that starts with a letter.
fn looks_like_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|c| {
        c.chars()
            .next()
            .is_some_and(|ch| ch.is_alphabetic() && !is_float_word(c))
    })
}

fn is_float_word(s: &str) -> bool {
    matches!(s.to_ascii_lowercase().as_str(), "nan" | "inf" | "infinity")
}

fn parse_grade(cell: &str) -> std::result::Result<Option<f64>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("`{cell}` is not a number"))
}

fn parse_flag(cell: &str) -> std::result::Result<bool, String> {
    match cell {
        "1" => Ok(true),
        "0" => Ok(false),
        _ => Err(format!("mask cell `{cell}` is not 0 or 1")),
    }
}

/// Parses matrix and optional mask CSV text. Errors name the file line and
/// column (both one-based) of the offending cell.
pub fn grade_matrix_from_csv(matrix_text: &str, mask_text: Option<&str>) -> Result<GradeMatrix> {
    grade_matrix_from_named_csv(("matrix", matrix_text), mask_text.map(|t| ("mask", t)))
}

fn grade_matrix_from_named_csv(matrix: (&str, &str), mask: Option<(&str, &str)>) -> Result<GradeMatrix> {
    let (matrix_name, matrix_text) = matrix;
    let grades = read_table(matrix_text, matrix_name, parse_grade)?;
    let m = grades.rows.len();
    let shape_error = |name: &str, line: usize, found: usize| PeerRankError::Parse {
        source_name: name.to_string(),
        line,
        col: found.min(m) + 1,
        message: format!("row has {found} cells, expected {m} (matrix must be square)"),
    };
    for (k, row) in grades.rows.iter().enumerate() {
        if row.len() != m {
            return Err(shape_error(matrix_name, grades.first_line + k, row.len()));
        }
    }

    let mask_rows = match mask {
        Some((mask_name, mask_text)) => {
            let table = read_table(mask_text, mask_name, parse_flag)?;
            if table.rows.len() != m {
                return Err(PeerRankError::Parse {
                    source_name: mask_name.to_string(),
                    line: table.first_line + table.rows.len().min(m),
                    col: 1,
                    message: format!("mask has {} rows, matrix has {m}", table.rows.len()),
                });
            }
            for (k, row) in table.rows.iter().enumerate() {
                if row.len() != m {
                    return Err(shape_error(mask_name, table.first_line + k, row.len()));
                }
            }
            Some(table.rows)
        }
        None => None,
    };

    let mut raw = Vec::with_capacity(m);
    for (i, row) in grades.rows.iter().enumerate() {
        let mut out = Vec::with_capacity(m);
        for (j, cell) in row.iter().enumerate() {
            let present = mask_rows.as_ref().is_none_or(|mk| mk[i][j]);
            match (cell, present) {
                (Some(v), _) => out.push(*v),
                (None, false) => out.push(0.0),
                (None, true) => {
                    return Err(PeerRankError::Parse {
                        source_name: matrix_name.to_string(),
                        line: grades.first_line + i,
                        col: j + 1,
                        message: "empty cell for a grade that is marked present".to_string(),
                    })
                }
            }
        }
        raw.push(out);
    }

    GradeMatrix::new(raw, mask_rows).map_err(|e| match e {
        PeerRankError::OutOfRange { row, col, value } => PeerRankError::Parse {
            source_name: matrix_name.to_string(),
            line: grades.first_line + row,
            col: col + 1,
            message: format!("entry out of range: {value} is not in [0, 1]"),
        },
        other => other,
    })
}

/// Loads a matrix file and optional mask file from disk.
pub fn load_grade_matrix(matrix_path: &Path, mask_path: Option<&Path>) -> Result<GradeMatrix> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| PeerRankError::Io(format!("{}: {e}", p.display())));
    let matrix_text = read(matrix_path)?;
    let mask_text = mask_path.map(read).transpose()?;
    let matrix_name = matrix_path.display().to_string();
    let mask_name = mask_path.map(|p| p.display().to_string());
    grade_matrix_from_named_csv(
        (&matrix_name, &matrix_text),
        mask_name.as_deref().zip(mask_text.as_deref()),
    )
}

/// Writes the matrix without a header; absent cells are left empty.
pub fn grade_matrix_to_csv(matrix: &GradeMatrix) -> String {
    let m = matrix.m();
    let mut out = String::new();
    for i in 0..m {
        let cells: Vec<String> = (0..m)
            .map(|j| {
                if matrix.is_present(i, j) {
                    matrix.get(i, j).to_string()
                } else {
                    String::new()
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Mask as 0/1 rows, or `None` in full mode.
pub fn mask_to_csv(matrix: &GradeMatrix) -> Option<String> {
    matrix.mask_rows().map(|rows| {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&p| if p { "1" } else { "0" })
                    .collect::<Vec<_>>()
                    .join(",")
                    + "\n"
            })
            .collect()
    })
}
