//! Matrix Market reader and writer.
//!
//! Supported banners are `%%MatrixMarket matrix {coordinate|array}
//! {real|integer|pattern} {general|symmetric|skew-symmetric}`. Symmetric
//! and skew-symmetric storage is expanded to explicit CSR on load; pattern
//! entries load as `1.0`; duplicate coordinates are summed.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::linalg::{CsrMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum MmioError {
    #[error("line {line}: malformed Matrix Market banner: {reason}")]
    MalformedBanner { line: usize, reason: String },
    #[error("line {line}: unsupported field `{field}`")]
    UnsupportedField { line: usize, field: String },
    #[error("line {line}: unsupported {what} `{value}`")]
    Unsupported {
        line: usize,
        what: &'static str,
        value: String,
    },
    #[error("line {line}: malformed size line")]
    MalformedSize { line: usize },
    #[error("line {line}: malformed entry: {reason}")]
    MalformedEntry { line: usize, reason: String },
    #[error("line {line}: index ({row}, {col}) outside {rows}x{cols}")]
    IndexOutOfRange {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("line {line}: expected {expected} entries, found {found}")]
    EntryCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("entries must be finite to be written (entry {index})")]
    NonFinite { index: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parsed banner. The object is always `matrix`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmHeader {
    pub format: MmFormat,
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

impl MmHeader {
    pub fn parse(line: &str, line_no: usize) -> Result<Self, MmioError> {
        let banner = |reason: &str| MmioError::MalformedBanner {
            line: line_no,
            reason: reason.to_string(),
        };
        let mut toks = line.split_whitespace();
        let tag = toks.next().ok_or_else(|| banner("empty first line"))?;
        if !tag.eq_ignore_ascii_case("%%MatrixMarket") {
            return Err(banner("first line must start with %%MatrixMarket"));
        }
        let object = toks.next().ok_or_else(|| banner("missing object"))?;
        if !object.eq_ignore_ascii_case("matrix") {
            return Err(MmioError::Unsupported {
                line: line_no,
                what: "object",
                value: object.to_string(),
            });
        }
        let format = toks.next().ok_or_else(|| banner("missing format"))?;
        let format = match format.to_ascii_lowercase().as_str() {
            "coordinate" => MmFormat::Coordinate,
            "array" => MmFormat::Array,
            other => {
                return Err(MmioError::Unsupported {
                    line: line_no,
                    what: "format",
                    value: other.to_string(),
                })
            }
        };
        let field = toks.next().ok_or_else(|| banner("missing field"))?;
        let field = match field.to_ascii_lowercase().as_str() {
            "real" | "double" => MmField::Real,
            "integer" => MmField::Integer,
            "pattern" => MmField::Pattern,
            other => {
                return Err(MmioError::UnsupportedField {
                    line: line_no,
                    field: other.to_string(),
                })
            }
        };
        let symmetry = toks.next().ok_or_else(|| banner("missing symmetry"))?;
        let symmetry = match symmetry.to_ascii_lowercase().as_str() {
            "general" => MmSymmetry::General,
            "symmetric" => MmSymmetry::Symmetric,
            "skew-symmetric" => MmSymmetry::SkewSymmetric,
            other => {
                return Err(MmioError::Unsupported {
                    line: line_no,
                    what: "symmetry",
                    value: other.to_string(),
                })
            }
        };
        if toks.next().is_some() {
            return Err(banner("trailing tokens"));
        }
        if format == MmFormat::Array && field == MmField::Pattern {
            return Err(MmioError::Unsupported {
                line: line_no,
                what: "array field",
                value: "pattern".into(),
            });
        }
        Ok(Self {
            format,
            field,
            symmetry,
        })
    }
}

/// Data lines with their 1-based line numbers, skipping comments and blanks.
struct DataLines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Iterator for DataLines<R> {
    type Item = Result<(usize, String), MmioError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.inner.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Some(Ok((self.line_no, t.to_string())));
        }
    }
}

fn parse_value(tok: Option<&str>, line: usize) -> Result<f64, MmioError> {
    let tok = tok.ok_or_else(|| MmioError::MalformedEntry {
        line,
        reason: "missing value".into(),
    })?;
    tok.parse::<f64>().map_err(|_| MmioError::MalformedEntry {
        line,
        reason: format!("bad number `{tok}`"),
    })
}

fn parse_index(tok: Option<&str>, line: usize) -> Result<usize, MmioError> {
    let tok = tok.ok_or_else(|| MmioError::MalformedEntry {
        line,
        reason: "missing index".into(),
    })?;
    tok.parse::<usize>().map_err(|_| MmioError::MalformedEntry {
        line,
        reason: format!("bad index `{tok}`"),
    })
}

/// Reads a Matrix Market stream into fully expanded CSR.
pub fn read_matrix_market<R: BufRead>(source: R) -> Result<CsrMatrix, MmioError> {
    let mut lines = source.lines();
    let first = match lines.next() {
        Some(l) => l?,
        None => {
            return Err(MmioError::MalformedBanner {
                line: 1,
                reason: "empty input".into(),
            })
        }
    };
    let header = MmHeader::parse(&first, 1)?;
    let mut data = DataLines {
        inner: lines,
        line_no: 1,
    };

    let (size_line, size) = match data.next() {
        Some(r) => r?,
        None => return Err(MmioError::MalformedSize { line: 2 }),
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| MmioError::MalformedSize { line: size_line })?;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let (rows, cols) = match header.format {
        MmFormat::Coordinate => {
            let [rows, cols, nnz] = dims[..] else {
                return Err(MmioError::MalformedSize { line: size_line });
            };
            check_shape(rows, cols, header.symmetry, size_line)?;
            triplets.reserve(nnz * if header.symmetry == MmSymmetry::General { 1 } else { 2 });
            let mut found = 0;
            let mut last_line = size_line;
            for item in data.by_ref() {
                let (line, text) = item?;
                last_line = line;
                if found == nnz {
                    return Err(MmioError::EntryCountMismatch {
                        line,
                        expected: nnz,
                        found: found + 1,
                    });
                }
                let mut toks = text.split_whitespace();
                let i = parse_index(toks.next(), line)?;
                let j = parse_index(toks.next(), line)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(MmioError::IndexOutOfRange {
                        line,
                        row: i,
                        col: j,
                        rows,
                        cols,
                    });
                }
                let v = match header.field {
                    MmField::Pattern => 1.0,
                    _ => parse_value(toks.next(), line)?,
                };
                if toks.next().is_some() {
                    return Err(MmioError::MalformedEntry {
                        line,
                        reason: "trailing tokens".into(),
                    });
                }
                push_entry(&mut triplets, header.symmetry, i - 1, j - 1, v, line)?;
                found += 1;
            }
            if found != nnz {
                return Err(MmioError::EntryCountMismatch {
                    line: last_line,
                    expected: nnz,
                    found,
                });
            }
            (rows, cols)
        }
        MmFormat::Array => {
            let [rows, cols] = dims[..] else {
                return Err(MmioError::MalformedSize { line: size_line });
            };
            check_shape(rows, cols, header.symmetry, size_line)?;
            // Column-major; symmetric variants list only the lower triangle
            // (strictly lower for skew-symmetric).
            let mut positions = Vec::new();
            for j in 0..cols {
                let start = match header.symmetry {
                    MmSymmetry::General => 0,
                    MmSymmetry::Symmetric => j,
                    MmSymmetry::SkewSymmetric => j + 1,
                };
                for i in start..rows {
                    positions.push((i, j));
                }
            }
            let expected = positions.len();
            let mut found = 0;
            let mut last_line = size_line;
            for item in data.by_ref() {
                let (line, text) = item?;
                last_line = line;
                for tok in text.split_whitespace() {
                    if found == expected {
                        return Err(MmioError::EntryCountMismatch {
                            line,
                            expected,
                            found: found + 1,
                        });
                    }
                    let v = parse_value(Some(tok), line)?;
                    let (i, j) = positions[found];
                    if v != 0.0 {
                        push_entry(&mut triplets, header.symmetry, i, j, v, line)?;
                    }
                    found += 1;
                }
            }
            if found != expected {
                return Err(MmioError::EntryCountMismatch {
                    line: last_line,
                    expected,
                    found,
                });
            }
            (rows, cols)
        }
    };
    Ok(CsrMatrix::from_triplets(rows, cols, &triplets)?)
}

fn check_shape(rows: usize, cols: usize, sym: MmSymmetry, line: usize) -> Result<(), MmioError> {
    if rows == 0 || cols == 0 || (sym != MmSymmetry::General && rows != cols) {
        return Err(MmioError::MalformedSize { line });
    }
    Ok(())
}

fn push_entry(
    triplets: &mut Vec<(usize, usize, f64)>,
    sym: MmSymmetry,
    i: usize,
    j: usize,
    v: f64,
    line: usize,
) -> Result<(), MmioError> {
    triplets.push((i, j, v));
    if i != j {
        match sym {
            MmSymmetry::General => {}
            MmSymmetry::Symmetric => triplets.push((j, i, v)),
            MmSymmetry::SkewSymmetric => triplets.push((j, i, -v)),
        }
    } else if sym == MmSymmetry::SkewSymmetric {
        return Err(MmioError::MalformedEntry {
            line,
            reason: "skew-symmetric matrix with a diagonal entry".into(),
        });
    }
    Ok(())
}

/// Writes `m` as `coordinate real general` with 17 significant digits, which
/// reads back bit-for-bit.
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut sink: W) -> Result<(), MmioError> {
    if let Some(index) = m.values().iter().position(|v| !v.is_finite()) {
        return Err(MmioError::NonFinite { index });
    }
    writeln!(sink, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(sink, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, j, v) in m.iter() {
        writeln!(sink, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    sink.flush()?;
    Ok(())
}
