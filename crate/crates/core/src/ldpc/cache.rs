//! On-disk cache of PEG matrices.
//!
//! Byte layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"RNNAPEG\0"
//! 8       4     format version (u32, currently 1)
//! 12      4     n      columns (u32)
//! 16      4     m      rows (u32)
//! 20      4     d_v    (u32)
//! 24      4     d_c    (u32)
//! 28      8     seed   (u64)
//! 36      ...   m row records: weight (u32) then `weight` ascending
//!               column indices (u32 each)
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{peg_construct, ParityCheckMatrix};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RNNAPEG\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PegHeader {
    pub n: u32,
    pub m: u32,
    pub d_v: u32,
    pub d_c: u32,
    pub seed: u64,
}

pub fn write_matrix<W: Write>(mut w: W, header: &PegHeader, h: &ParityCheckMatrix) -> Result<()> {
    if h.n() != header.n as usize || h.m() != header.m as usize {
        return Err(Error::LengthMismatch {
            what: "matrix vs cache header",
            left: h.n() * h.m(),
            right: (header.n * header.m) as usize,
        });
    }
    let mut buf = Vec::with_capacity(36 + 4 * (h.m() + h.edges()));
    buf.extend_from_slice(MAGIC);
    for v in [VERSION, header.n, header.m, header.d_v, header.d_c] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&header.seed.to_le_bytes());
    for row in h.rows() {
        buf.extend_from_slice(&(row.len() as u32).to_le_bytes());
        for &c in row {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn malformed(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "PEG cache file",
        detail: detail.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.pos..self.pos + len)
            .ok_or_else(|| malformed(format!("truncated at byte {}", self.pos)))?;
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<(PegHeader, ParityCheckMatrix)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let n = cur.u32()?;
    let m = cur.u32()?;
    let d_v = cur.u32()?;
    let d_c = cur.u32()?;
    let seed = cur.u64()?;
    let mut rows = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let w = cur.u32()? as usize;
        let mut row = Vec::with_capacity(w);
        for _ in 0..w {
            row.push(cur.u32()?);
        }
        rows.push(row);
    }
    if cur.pos != bytes.len() {
        return Err(malformed("trailing bytes"));
    }
    let h = ParityCheckMatrix::from_rows(n as usize, rows)?;
    Ok((PegHeader { n, m, d_v, d_c, seed }, h))
}

pub fn cache_file_name(n: usize, d_v: usize, d_c: usize, seed: u64) -> String {
    format!("peg_n{n}_dv{d_v}_dc{d_c}_s{seed}.bin")
}

/// Loads a cached matrix from `dir`, constructing and storing it on a miss.
pub fn load_or_construct(
    dir: impl AsRef<Path>,
    n: usize,
    d_v: usize,
    d_c: usize,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    let path: PathBuf = dir.as_ref().join(cache_file_name(n, d_v, d_c, seed));
    if let Ok(file) = fs::File::open(&path) {
        let (header, h) = read_matrix(std::io::BufReader::new(file))
            .map_err(|e| e.context(format!("reading {}", path.display())))?;
        let want = (n as u32, d_v as u32, d_c as u32, seed);
        if (header.n, header.d_v, header.d_c, header.seed) == want {
            return Ok(h);
        }
        return Err(malformed(format!("{} header does not match its name", path.display())));
    }
    let h = peg_construct(n, d_v, d_c, seed)?;
    fs::create_dir_all(dir.as_ref())?;
    let header = PegHeader {
        n: n as u32,
        m: h.m() as u32,
        d_v: d_v as u32,
        d_c: d_c as u32,
        seed,
    };
    let tmp = path.with_extension("tmp");
    write_matrix(fs::File::create(&tmp)?, &header, &h)?;
    fs::rename(&tmp, &path)?;
    Ok(h)
}
