//! Binary table files and CSV export.
//!
//! Layout (little-endian): magic `GEOS`, version `u32`, model digest
//! (32 bytes), `cutoff_L` `f64`, `complete_below` `f64`, record count `u64`,
//! then per record: word length `u16`, one byte per letter, length `f64`,
//! primitive length `f64`, power `u32`, homology as `rank × i64`. The rank is
//! not stored; it is the largest generator index seen, or supplied by the
//! reader through the model.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::word::{Letter, Word};
use super::{GeodesicRecord, GeodesicTable, GeodesicsError};

pub const MAGIC: &[u8; 4] = b"GEOS";
pub const VERSION: u32 = 1;

pub fn to_bytes(table: &GeodesicTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + table.len() * (40 + 8 * table.rank));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&table.model_digest);
    out.extend_from_slice(&table.cutoff_l.to_le_bytes());
    out.extend_from_slice(&table.complete_below.to_le_bytes());
    out.extend_from_slice(&(table.len() as u64).to_le_bytes());
    for r in &table.records {
        let bytes = r.canon.to_bytes();
        out.extend_from_slice(&(bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(&bytes);
        out.extend_from_slice(&r.length.to_le_bytes());
        out.extend_from_slice(&r.primitive_length.to_le_bytes());
        out.extend_from_slice(&r.power.to_le_bytes());
        for h in &r.homology {
            out.extend_from_slice(&h.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], GeodesicsError> {
        if self.buf.len() - self.pos < n {
            return Err(GeodesicsError::Truncated(format!("{what} at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], GeodesicsError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }
}

/// Parses a table image. `rank` is the homology dimension of the model.
pub fn from_bytes(buf: &[u8], rank: usize) -> Result<GeodesicTable, GeodesicsError> {
    let mut c = Cursor { buf, pos: 0 };
    let magic = c.take(4, "magic").map_err(|_| GeodesicsError::Version("file shorter than magic".into()))?;
    if magic != MAGIC {
        return Err(GeodesicsError::Version(format!("bad magic {magic:02x?}")));
    }
    let version = u32::from_le_bytes(c.array("version")?);
    if version != VERSION {
        return Err(GeodesicsError::Version(format!("unsupported format version {version}")));
    }
    let model_digest: [u8; 32] = c.array("digest")?;
    let cutoff_l = f64::from_le_bytes(c.array("cutoff")?);
    let complete_below = f64::from_le_bytes(c.array("complete_below")?);
    let count = u64::from_le_bytes(c.array("record count")?);
    let mut records = Vec::with_capacity(count.min(1 << 24) as usize);
    for i in 0..count {
        let what = format!("record {i}");
        let n = u16::from_le_bytes(c.array(&what)?) as usize;
        let letters = c
            .take(n, &what)?
            .iter()
            .map(|&b| Letter::from_byte(b).ok_or_else(|| GeodesicsError::Corrupt(format!("{what}: bad letter {b}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let length = f64::from_le_bytes(c.array(&what)?);
        let primitive_length = f64::from_le_bytes(c.array(&what)?);
        let power = u32::from_le_bytes(c.array(&what)?);
        let homology = (0..rank).map(|_| Ok(i64::from_le_bytes(c.array(&what)?))).collect::<Result<Vec<_>, GeodesicsError>>()?;
        records.push(GeodesicRecord { canon: Word::from_letters_unreduced(letters), length, primitive_length, power, homology });
    }
    if c.pos != buf.len() {
        return Err(GeodesicsError::Corrupt(format!("{} trailing bytes", buf.len() - c.pos)));
    }
    Ok(GeodesicTable { model_digest, cutoff_l, complete_below, rank, records })
}

pub fn save(table: &GeodesicTable, path: &Path) -> Result<(), GeodesicsError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&to_bytes(table))?;
    w.flush()?;
    Ok(())
}

/// Loads a table, rejecting it unless it was built for the model with the
/// given digest.
pub fn load(path: &Path, expected_digest: &[u8; 32], rank: usize) -> Result<GeodesicTable, GeodesicsError> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    let table = from_bytes(&buf, rank)?;
    if &table.model_digest != expected_digest {
        return Err(GeodesicsError::DigestMismatch);
    }
    Ok(table)
}

/// CSV mirror: `word,length,primitive_length,power,h1,…`.
pub fn write_csv<W: Write>(table: &GeodesicTable, mut out: W) -> std::io::Result<()> {
    write!(out, "word,length,primitive_length,power")?;
    for i in 0..table.rank {
        write!(out, ",h{}", i + 1)?;
    }
    writeln!(out)?;
    for r in &table.records {
        write!(out, "{},{:?},{:?},{}", r.canon, r.length, r.primitive_length, r.power)?;
        for h in &r.homology {
            write!(out, ",{h}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
