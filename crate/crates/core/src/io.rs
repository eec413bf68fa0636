//! Plain-text matrix files.
//!
//! The first line holds the shape `rows cols`; each following line holds
//! one row of whitespace-separated decimals with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub fn write_matrix<W: Write>(m: &Matrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<Matrix> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
        other => Some((i + 1, other)),
    });
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let header = header.map_err(|e| Error::Parse(e.to_string()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("bad shape header `{header}`")))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("shape header needs two integers, got `{header}`")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        for token in line.split_whitespace() {
            let v = token
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad number `{token}`")))?;
            data.push(v);
        }
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries for a {rows}x{cols} matrix, found {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(file).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_matrix_file(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix(m, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = Matrix::from_rows(&[[0.1, -1.0 / 3.0, 1e-300], [f64::MAX, 2.0, -0.0]]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 3\n"));
        let back = read_matrix(&buf[..]).unwrap();
        assert_eq!(back.as_slice(), m.as_slice());
    }

    #[test]
    fn rejects_wrong_count() {
        assert!(read_matrix("2 2\n1 2 3\n".as_bytes()).is_err());
        assert!(read_matrix("2\n1 2\n".as_bytes()).is_err());
        assert!(read_matrix("".as_bytes()).is_err());
    }
}
