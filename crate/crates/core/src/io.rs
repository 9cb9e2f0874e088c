//! Field dump format
//!
//! A dump is one text header line
//!
//!   CHQ1 n=<n> L=<half_length> order=row-major endian=little dtype=f64
//!
//! terminated by a newline, followed by n^3 raw IEEE-754 little-endian
//! doubles in row-major (z-fastest) order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::{CoreError, Result};

const MAGIC: &str = "CHQ1";

fn io_err(e: std::io::Error) -> CoreError {
    CoreError::DumpIo(e.to_string())
}

/// Write `u` to `path` in dump format.
pub fn write_field(path: &Path, u: &ScalarField) -> Result<()> {
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_field_to(&mut w, u)?;
    w.flush().map_err(io_err)
}

/// Write `u` to any byte sink in dump format.
pub fn write_field_to<W: Write>(w: &mut W, u: &ScalarField) -> Result<()> {
    let grid = u.grid();
    let header = format!(
        "{MAGIC} n={} L={:?} order=row-major endian=little dtype=f64\n",
        grid.n(),
        grid.half_length()
    );
    w.write_all(header.as_bytes()).map_err(io_err)?;
    for &v in u.data() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

/// Read a dump from `path`.
pub fn read_field(path: &Path) -> Result<ScalarField> {
    let file = File::open(path).map_err(io_err)?;
    read_field_from(&mut BufReader::new(file))
}

/// Read a dump from any byte source.
pub fn read_field_from<R: Read>(r: &mut R) -> Result<ScalarField> {
    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let got = r.read(&mut byte).map_err(io_err)?;
        if got == 0 {
            return Err(CoreError::DumpHeader(
                "unterminated header line".into(),
            ));
        }
        if byte[0] == b'\n' {
            break;
        }
        if header.len() > 256 {
            return Err(CoreError::DumpHeader(
                "header longer than 256 bytes".into(),
            ));
        }
        header.push(byte[0]);
    }
    let header = String::from_utf8(header)
        .map_err(|_| CoreError::DumpHeader("header is not utf-8".into()))?;
    let grid = parse_header(&header)?;
    let count = grid.len();
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|e| {
        CoreError::DumpIo(format!("payload truncated: {e}"))
    })?;
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(io_err)? != 0 {
        return Err(CoreError::DumpIo(
            "trailing bytes after the field payload".into(),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarField::from_vec(grid, data)
}

fn parse_header(header: &str) -> Result<GridSpec> {
    let mut parts = header.split_whitespace();
    match parts.next() {
        Some(MAGIC) => {}
        other => {
            return Err(CoreError::DumpHeader(format!(
                "bad magic: expected {MAGIC}, got {other:?}"
            )))
        }
    }
    let mut n: Option<usize> = None;
    let mut l: Option<f64> = None;
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            CoreError::DumpHeader(format!("malformed token {part:?}"))
        })?;
        match key {
            "n" => {
                n = Some(value.parse().map_err(|_| {
                    CoreError::DumpHeader(format!("bad n value {value:?}"))
                })?)
            }
            "L" => {
                l = Some(value.parse().map_err(|_| {
                    CoreError::DumpHeader(format!("bad L value {value:?}"))
                })?)
            }
            "order" => {
                if value != "row-major" {
                    return Err(CoreError::DumpHeader(format!(
                        "unsupported order {value:?}"
                    )));
                }
            }
            "endian" => {
                if value != "little" {
                    return Err(CoreError::DumpHeader(format!(
                        "unsupported endianness {value:?}"
                    )));
                }
            }
            "dtype" => {
                if value != "f64" {
                    return Err(CoreError::DumpHeader(format!(
                        "unsupported dtype {value:?}"
                    )));
                }
            }
            other => {
                return Err(CoreError::DumpHeader(format!(
                    "unknown header key {other:?}"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| CoreError::DumpHeader("missing n".into()))?;
    let l = l.ok_or_else(|| CoreError::DumpHeader("missing L".into()))?;
    GridSpec::new(n, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, l: f64, seed: u64) -> ScalarField {
        let grid = GridSpec::new(n, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..grid.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        ScalarField::from_vec(grid, data).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let u = random_field(16, 12.5, 99);
        let mut buf = Vec::new();
        write_field_to(&mut buf, &u).unwrap();
        let v = read_field_from(&mut buf.as_slice()).unwrap();
        assert_eq!(u.grid().n(), v.grid().n());
        assert_eq!(u.grid().half_length(), v.grid().half_length());
        assert_eq!(u.data(), v.data());
    }

    #[test]
    fn header_is_the_documented_line() {
        let u = ScalarField::zeros(GridSpec::new(8, 16.0).unwrap());
        let mut buf = Vec::new();
        write_field_to(&mut buf, &u).unwrap();
        let nl = buf.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&buf[..nl]).unwrap();
        assert_eq!(
            header,
            "CHQ1 n=8 L=16.0 order=row-major endian=little dtype=f64"
        );
        assert_eq!(buf.len(), nl + 1 + 8 * 8 * 8 * 8);
    }

    #[test]
    fn half_length_roundtrips_exactly_through_the_header() {
        // {:?} prints f64 with enough digits to reparse bit-exactly.
        for &l in &[16.0, 12.3456789012345678, 1.0 / 3.0, 46.0] {
            let u = ScalarField::zeros(GridSpec::new(8, l).unwrap());
            let mut buf = Vec::new();
            write_field_to(&mut buf, &u).unwrap();
            let v = read_field_from(&mut buf.as_slice()).unwrap();
            assert_eq!(v.grid().half_length().to_bits(), l.to_bits());
        }
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join("chq-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.chq");
        let u = random_field(8, 5.0, 3);
        write_field(&path, &u).unwrap();
        let v = read_field(&path).unwrap();
        assert_eq!(u.data(), v.data());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn special_values_survive() {
        let grid = GridSpec::new(8, 4.0).unwrap();
        let mut u = ScalarField::zeros(grid);
        u.data_mut()[0] = f64::MIN_POSITIVE;
        u.data_mut()[1] = -0.0;
        u.data_mut()[2] = 1e300;
        u.data_mut()[3] = -1e-300;
        let mut buf = Vec::new();
        write_field_to(&mut buf, &u).unwrap();
        let v = read_field_from(&mut buf.as_slice()).unwrap();
        for (a, b) in u.data().iter().zip(v.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_headers_are_rejected() {
        let cases: Vec<Vec<u8>> = vec![
            b"XHQ1 n=8 L=4 order=row-major endian=little dtype=f64\n".to_vec(),
            b"CHQ1 n=7 L=4 order=row-major endian=little dtype=f64\n".to_vec(),
            b"CHQ1 L=4 order=row-major endian=little dtype=f64\n".to_vec(),
            b"CHQ1 n=8 L=4 order=column-major endian=little dtype=f64\n".to_vec(),
            b"CHQ1 n=8 L=4 order=row-major endian=big dtype=f64\n".to_vec(),
            b"CHQ1 n=8 L=4 order=row-major endian=little dtype=f32\n".to_vec(),
            b"CHQ1 n=8 L=oops order=row-major endian=little dtype=f64\n".to_vec(),
            b"CHQ1 n=8".to_vec(),
        ];
        for bytes in cases {
            assert!(
                read_field_from(&mut bytes.as_slice()).is_err(),
                "accepted {:?}",
                String::from_utf8_lossy(&bytes)
            );
        }
    }

    #[test]
    fn truncated_and_padded_payloads_are_rejected() {
        let u = random_field(8, 4.0, 5);
        let mut buf = Vec::new();
        write_field_to(&mut buf, &u).unwrap();
        let short = &buf[..buf.len() - 4];
        assert!(read_field_from(&mut &short[..]).is_err());
        let mut long = buf.clone();
        long.extend_from_slice(&[0u8; 8]);
        assert!(read_field_from(&mut long.as_slice()).is_err());
    }
}
