//! Binary snapshot container.
//!
//! Layout (all little-endian): `n: u64`, `S: u64`, then `n·S` complex values in
//! column-major order, each stored as two `f64` (real part, imaginary part).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use mri_core::{CMat, C64};

use crate::error::{CliError, CliResult};

const HEADER: usize = 16;

pub fn encode(snapshots: &CMat) -> Vec<u8> {
    let (n, s) = snapshots.shape();
    let mut out = Vec::with_capacity(HEADER + 16 * n * s);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(s as u64).to_le_bytes());
    // nalgebra storage is column-major already
    for z in snapshots.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<CMat, String> {
    if bytes.len() < HEADER {
        return Err(format!("snapshot file too short ({} bytes)", bytes.len()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let (n, s) = (word(0), word(1));
    let expected = n
        .checked_mul(s)
        .and_then(|v| v.checked_mul(16))
        .and_then(|v| v.checked_add(HEADER as u64))
        .ok_or("snapshot header overflows")?;
    if bytes.len() as u64 != expected {
        return Err(format!("snapshot file holds {} bytes, header n={n}, S={s} needs {expected}", bytes.len()));
    }
    let (n, s) = (n as usize, s as usize);
    let body = &bytes[HEADER..];
    let values = body.chunks_exact(16).map(|ch| {
        let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
        C64::new(re, im)
    });
    Ok(CMat::from_iterator(n, s, values))
}

pub fn write(path: &Path, snapshots: &CMat) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&encode(snapshots)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> CliResult<CMat> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|msg| CliError::config(format!("{}: {msg}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_column_major_little_endian() {
        let m = CMat::from_fn(2, 3, |i, j| C64::new((10 * i + j) as f64, -(j as f64)));
        let b = encode(&m);
        assert_eq!(&b[..8], &2u64.to_le_bytes());
        assert_eq!(&b[8..16], &3u64.to_le_bytes());
        // second stored value is entry (1, 0)
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 10.0);
        assert_eq!(decode(&b).unwrap(), m);
    }

    #[test]
    fn rejects_truncated_files() {
        let m = CMat::from_element(2, 2, C64::new(1.0, 2.0));
        let b = encode(&m);
        assert!(decode(&b[..b.len() - 1]).is_err());
        assert!(decode(&b[..10]).is_err());
    }
}
