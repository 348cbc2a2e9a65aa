//! Plain-text matrix files and the on-disk problem-instance layout.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{OperatorMeta, ProblemInstance, SensingOperator};

/// Writes `# rows cols` followed by one row per line, 17 significant digits.
pub fn write_matrix<W: Write>(mut out: W, m: &DMatrix<f64>) -> Result<()> {
    writeln!(out, "# {} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    let dims: Vec<usize> = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("bad matrix header {header:?}")))?
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("bad dimension {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("bad matrix header {header:?}")));
    };
    let mut values = Vec::with_capacity(rows * cols);
    for line in lines {
        for tok in line?.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {tok:?}")))?,
            );
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn save_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    write_matrix(&mut out, m)?;
    out.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix(fs::File::open(path)?)
}

/// Vectors use the matrix format as a single column.
pub fn save_vector(path: impl AsRef<Path>, v: &DVector<f64>) -> Result<()> {
    save_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let m = load_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::Parse(format!(
            "expected a column vector, got {} columns",
            m.ncols()
        )));
    }
    Ok(DVector::from_column_slice(m.as_slice()))
}

/// Writes an instance directory; the operator is stored by its seed.
pub fn save_instance(dir: impl AsRef<Path>, inst: &ProblemInstance) -> Result<()> {
    let dir = dir.as_ref();
    let meta = inst.operator.meta();
    if meta.seed.is_none() {
        return Err(Error::config("only seeded operators can be saved"));
    }
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("operator.meta"),
        serde_json::to_string_pretty(&meta)?,
    )?;
    save_matrix(dir.join("xstar.mat"), &inst.xstar)?;
    save_matrix(dir.join("ustar.mat"), &inst.ustar)?;
    if let Some(v) = &inst.vstar {
        save_matrix(dir.join("vstar.mat"), v)?;
    }
    save_vector(dir.join("y.vec"), &inst.y)?;
    save_vector(dir.join("sstar.vec"), &inst.outliers)?;
    let mut idx = String::new();
    for i in &inst.support {
        idx.push_str(&format!("{}\n", i + 1));
    }
    fs::write(dir.join("omega.idx"), idx)?;
    Ok(())
}

pub fn load_instance(dir: impl AsRef<Path>) -> Result<ProblemInstance> {
    let dir = dir.as_ref();
    let meta: OperatorMeta = serde_json::from_str(&fs::read_to_string(dir.join("operator.meta"))?)?;
    let operator = SensingOperator::from_meta(&meta)?;
    let ustar = load_matrix(dir.join("ustar.mat"))?;
    let vpath = dir.join("vstar.mat");
    let vstar = if vpath.exists() {
        Some(load_matrix(vpath)?)
    } else {
        None
    };
    let xstar = load_matrix(dir.join("xstar.mat"))?;
    let y = load_vector(dir.join("y.vec"))?;
    let outliers = load_vector(dir.join("sstar.vec"))?;
    let mut support = Vec::new();
    for line in fs::read_to_string(dir.join("omega.idx"))?.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let i: usize = line
            .parse()
            .map_err(|_| Error::Parse(format!("bad index {line:?}")))?;
        if i == 0 || i > meta.m {
            return Err(Error::Parse(format!("index {i} outside 1..={}", meta.m)));
        }
        support.push(i - 1);
    }
    if y.len() != meta.m || outliers.len() != meta.m {
        return Err(Error::Parse(
            "measurement length disagrees with operator.meta".into(),
        ));
    }
    Ok(ProblemInstance {
        r: ustar.ncols(),
        p: support.len() as f64 / meta.m as f64,
        operator,
        ustar,
        vstar,
        xstar,
        outliers,
        support,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{generate_problem, ProblemConfig};

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1).powf(j as f64 + 0.3) / 7.0);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# 3 2\n"));
        assert_eq!(read_matrix(&buf[..]).unwrap(), m);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_matrix(&b"3 2\n1 2\n"[..]).is_err());
        assert!(read_matrix(&b"# 2 2\n1 2 3\n"[..]).is_err());
        assert!(read_matrix(&b"# 1 1\nx\n"[..]).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let inst = generate_problem(&ProblemConfig::general(4, 3, 2, 0.2, 20, 6)).unwrap();
        save_instance(dir.path(), &inst).unwrap();
        let back = load_instance(dir.path()).unwrap();
        assert_eq!(back.y, inst.y);
        assert_eq!(back.support, inst.support);
        assert_eq!(back.vstar, inst.vstar);
        assert_eq!(back.operator.matrix(7), inst.operator.matrix(7));
        let first = std::fs::read_to_string(dir.path().join("omega.idx")).unwrap();
        assert_eq!(
            first.lines().next().unwrap(),
            (inst.support[0] + 1).to_string()
        );
    }
}
