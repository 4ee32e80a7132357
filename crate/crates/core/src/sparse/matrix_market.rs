use std::io::{BufRead, Write};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Writes `a` in Matrix Market coordinate format. With `symmetric` only the
/// lower triangle is stored and the header says so; the caller is responsible
/// for `a` actually being symmetric.
pub fn write_matrix_market<W: Write>(mut w: W, a: &CsrMatrix, symmetric: bool) -> Result<()> {
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let entries: Vec<(usize, usize, f64)> = (0..a.n_rows())
        .flat_map(|r| {
            let (cols, vals) = a.row(r);
            cols.iter()
                .zip(vals)
                .filter(move |(&c, _)| !symmetric || c <= r)
                .map(move |(&c, &v)| (r, c, v))
        })
        .collect();
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Reads a real coordinate Matrix Market file (general or symmetric).
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines().enumerate();
    let parse_err = |line: usize, msg: &str| Error::MatrixMarket { line: line + 1, msg: msg.to_string() };

    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let header = header?.to_lowercase();
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(parse_err(hline, "expected '%%MatrixMarket matrix coordinate' header"));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(hline, "only real or integer fields are supported"));
    }
    let symmetric = match tokens[4] {
        "general" => false,
        "symmetric" => true,
        _ => return Err(parse_err(hline, "only general or symmetric storage is supported")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(parse_err(ln, "size line needs rows, cols, nnz"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, "bad integer"));
                let s = (p(f[0])?, p(f[1])?, p(f[2])?);
                triplets.reserve(if symmetric { 2 * s.2 } else { s.2 });
                size = Some(s);
            }
            Some((nr, nc, _)) => {
                if f.len() != 3 {
                    return Err(parse_err(ln, "entry needs row, col, value"));
                }
                let i: usize = f[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let j: usize = f[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
                let v: f64 = f[2].parse().map_err(|_| parse_err(ln, "bad value"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err(ln, "index out of range"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    let stored = if symmetric {
        triplets.iter().filter(|(i, j, _)| i >= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(parse_err(0, &format!("expected {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(nr, nc, &triplets)
}

/// One value per line.
pub fn write_vector<W: Write>(mut w: W, v: &[f64]) -> Result<()> {
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}
