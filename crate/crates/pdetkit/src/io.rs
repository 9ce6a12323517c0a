//! Matrix and vector file formats.
//!
//! `dmx`: ASCII header line `dmx <rows> <cols>\n` followed by row-major
//! little-endian raw 64-bit floats. `dvx`: header `dvx <n>\n` followed by
//! raw 64-bit floats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub fn write_dmx(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "dmx {} {}\n", m.rows(), m.cols())?;
    for v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dmx(path: &Path) -> Result<DenseMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let (tag, dims) = read_header(&mut r)?;
    if tag != "dmx" || dims.len() != 2 {
        return Err(Error::BadFormat(format!(
            "expected `dmx <rows> <cols>` header in {}",
            path.display()
        )));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let data = read_f64s(&mut r, rows * cols, path)?;
    DenseMatrix::new(rows, cols, data)
}

pub fn write_dvx(path: &Path, v: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "dvx {}\n", v.len())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dvx(path: &Path) -> Result<Vec<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let (tag, dims) = read_header(&mut r)?;
    if tag != "dvx" || dims.len() != 1 {
        return Err(Error::BadFormat(format!(
            "expected `dvx <n>` header in {}",
            path.display()
        )));
    }
    read_f64s(&mut r, dims[0], path)
}

fn read_header(r: &mut impl Read) -> Result<(String, Vec<usize>)> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r.read(&mut byte)?;
        if n == 0 {
            return Err(Error::BadFormat("unterminated header line".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        if line.len() > 128 {
            return Err(Error::BadFormat("header line too long".into()));
        }
        line.push(byte[0]);
    }
    let text = String::from_utf8(line).map_err(|_| Error::BadFormat("non-UTF8 header".into()))?;
    let mut parts = text.split_whitespace();
    let tag = parts
        .next()
        .ok_or_else(|| Error::BadFormat("empty header".into()))?
        .to_string();
    let dims = parts
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::BadFormat(format!("bad dimension `{p}`")))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok((tag, dims))
}

fn read_f64s(r: &mut impl Read, count: usize, path: &Path) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf).map_err(|_| {
        Error::BadFormat(format!(
            "truncated payload in {} (expected {count} values)",
            path.display()
        ))
    })?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::random::gaussian_matrix;

    #[test]
    fn dmx_roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("pdetkit-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.dmx");
        let a = gaussian_matrix(7, 3, 1);
        write_dmx(&path, &a).unwrap();
        let b = read_dmx(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dvx_roundtrip() {
        let dir = std::env::temp_dir().join("pdetkit-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.dvx");
        let v = vec![1.5, -2.25, 1e-300, 0.0];
        write_dvx(&path, &v).unwrap();
        assert_eq!(read_dvx(&path).unwrap(), v);
    }

    #[test]
    fn rejects_wrong_tag_and_truncation() {
        let dir = std::env::temp_dir().join("pdetkit-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.dmx");
        std::fs::write(&path, b"dvx 4\n").unwrap();
        assert!(read_dmx(&path).is_err());
        std::fs::write(&path, b"dmx 2 2\n\x00\x00").unwrap();
        assert!(read_dmx(&path).is_err());
    }
}
