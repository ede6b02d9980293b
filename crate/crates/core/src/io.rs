//! File formats: binary sheet snapshots and numeric CSV tables.
//!
//! A snapshot is a 32-byte header (`VSHT`, format version `u32`, node count
//! `u64`, `eps`, `time`) followed by the little-endian `f64` arrays alphas,
//! weights, x and y, each one node count long.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evolve::InvariantRecord;
use crate::sheet::VortexSheet;
use crate::vec2::Vec2;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"VSHT";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Fixed-point time label, zero padded so that names sort in time order.
pub fn time_label(time: f64) -> String {
    format!("{time:09.4}")
}

pub fn snapshot_file_name(time: f64) -> String {
    format!("snap_t{}.bin", time_label(time))
}

pub fn encode_snapshot(sheet: &VortexSheet) -> Vec<u8> {
    let n = sheet.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * n);
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&sheet.eps().to_le_bytes());
    out.extend_from_slice(&sheet.time().to_le_bytes());
    let put = |out: &mut Vec<u8>, xs: &mut dyn Iterator<Item = f64>| {
        for x in xs {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    put(&mut out, &mut sheet.alphas().iter().copied());
    put(&mut out, &mut sheet.weights().iter().copied());
    put(&mut out, &mut sheet.positions().iter().map(|p| p.x));
    put(&mut out, &mut sheet.positions().iter().map(|p| p.y));
    out
}

/// Parses snapshot bytes; `path` only labels errors.
pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<VortexSheet> {
    let corrupt = |reason: String| Error::CorruptSnapshot {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != SNAPSHOT_MAGIC {
        return Err(corrupt("bad magic".into()));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(corrupt(format!("unsupported format version {version}")));
    }
    let n = u64::from_le_bytes(word(8));
    let eps = f64::from_le_bytes(word(16));
    let time = f64::from_le_bytes(word(24));
    let expected = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(32))
        .and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(corrupt(format!(
            "{} bytes does not match {n} nodes",
            bytes.len()
        )));
    }
    let n = n as usize;
    let array = |k: usize| -> Vec<f64> {
        let start = HEADER_LEN + 8 * n * k;
        (0..n)
            .map(|j| f64::from_le_bytes(word(start + 8 * j)))
            .collect()
    };
    let alphas = array(0);
    let weights = array(1);
    let positions = array(2)
        .into_iter()
        .zip(array(3))
        .map(|(x, y)| Vec2::new(x, y))
        .collect();
    VortexSheet::new(alphas, positions, weights, eps, time).map_err(|e| match e {
        Error::InvalidSheet(reason) => corrupt(reason),
        other => other,
    })
}

pub fn write_snapshot(path: &Path, sheet: &VortexSheet) -> Result<()> {
    fs::write(path, encode_snapshot(sheet)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<VortexSheet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes, path)
}

/// Writes a snapshot named after its time into `dir` and returns the path.
pub fn write_snapshot_in(dir: &Path, sheet: &VortexSheet) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(sheet.time()));
    write_snapshot(&path, sheet)?;
    Ok(path)
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header line and one comma-separated line per row.
pub fn write_csv<R>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator,
    R::Item: AsRef<[f64]>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.as_ref().iter().map(|&x| format_real(x)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Parses a numeric CSV written by [`write_csv`] into its header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, what: String| {
        Error::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {line}: {what}"),
            ),
        )
    };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "missing header".into()))?
        .split(',')
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(i + 2, format!("{c:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(bad(
                i + 2,
                format!("{} fields, header has {}", row.len(), header.len()),
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub const INVARIANT_COLUMNS: [&str; 6] = ["t", "H", "Wx", "Wy", "rel_drift_H", "rel_drift_W"];

pub fn invariant_row(r: &InvariantRecord) -> [f64; 6] {
    [
        r.time,
        r.hamiltonian,
        r.impulse.x,
        r.impulse.y,
        r.rel_drift_h,
        r.rel_drift_w,
    ]
}
