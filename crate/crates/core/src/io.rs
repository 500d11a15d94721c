//! Binary field dumps.
//!
//! Layout, all little-endian: magic `NFH1`, `u32` dimension, one `u32` point
//! count per macro axis, `f64` half width, `u32` cell points per axis (0 for
//! macro-only fields), then the `f64` values in row-major order with axis
//! order `(x_1, .., x_N, y_1, .., y_N)`. A sidecar `<file>.meta` holds
//! `key=value` lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{CellGrid, MacroField, MacroGrid, TwoScaleField};

const MAGIC: &[u8; 4] = b"NFH1";

/// A decoded dump: either a macroscopic or a two-scale field.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Macro(MacroField),
    TwoScale(TwoScaleField),
}

impl From<MacroField> for FieldData {
    fn from(f: MacroField) -> Self {
        FieldData::Macro(f)
    }
}

impl From<TwoScaleField> for FieldData {
    fn from(f: TwoScaleField) -> Self {
        FieldData::TwoScale(f)
    }
}

fn header(grid: &MacroGrid, cell_points: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for _ in 0..grid.dim() {
        out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&cell_points.to_le_bytes());
    out
}

fn push_values(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode(field: &FieldData) -> Vec<u8> {
    match field {
        FieldData::Macro(f) => {
            let mut out = header(f.grid(), 0);
            push_values(&mut out, f.values());
            out
        }
        FieldData::TwoScale(f) => {
            let mut out = header(f.macro_grid(), f.cell().points_per_axis() as u32);
            push_values(&mut out, f.values());
            out
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated field dump".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FieldData> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = r.u32()? as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(r.u32()? as usize);
    }
    if points.iter().any(|p| *p != points[0]) {
        return Err(Error::Format("anisotropic grids are not supported".into()));
    }
    let half_width = r.f64()?;
    let cell_points = r.u32()? as usize;
    let grid = MacroGrid::new(dim, half_width, points[0]).map_err(|e| Error::Format(e.to_string()))?;
    let cell = match cell_points {
        0 => None,
        m => Some(CellGrid::new(dim, m).map_err(|e| Error::Format(e.to_string()))?),
    };
    let count = grid.len() * cell.map_or(1, |c| c.len());
    let raw = r.take(count * 8)?;
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after field values".into()));
    }
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let bad = |e: Error| Error::Format(e.to_string());
    Ok(match cell {
        None => FieldData::Macro(MacroField::new(grid, values).map_err(bad)?),
        Some(c) => FieldData::TwoScale(TwoScaleField::new(grid, c, values).map_err(bad)?),
    })
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the dump and its sidecar metadata, both atomically.
pub fn write_field(path: &Path, field: &FieldData, meta: &[(String, String)]) -> Result<()> {
    atomic_write(path, &encode(field))?;
    let mut text = String::new();
    for (k, v) in meta {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::InvalidInput(format!(
                "metadata entry {k:?} is not a single key=value line"
            )));
        }
        text.push_str(k);
        text.push('=');
        text.push_str(v);
        text.push('\n');
    }
    atomic_write(&meta_path(path), text.as_bytes())
}

pub fn read_field(path: &Path) -> Result<FieldData> {
    decode(&fs::read(path)?)
}

pub fn read_meta(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(meta_path(path))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Format(format!("metadata line without '=': {l}")))
        })
        .collect()
}
