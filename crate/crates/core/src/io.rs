//! File formats: binary fields (`OAMFLD01`) and index maps (`OAMIDX01`),
//! PGM images, CSV tables, all written atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::holography::PhaseMask;
use crate::quantum::CountImage;
use crate::waveguide::IndexProfile;

pub const FIELD_MAGIC: &[u8; 8] = b"OAMFLD01";
pub const INDEX_MAGIC: &[u8; 8] = b"OAMIDX01";
const HEADER_LEN: usize = 8 + 4 + 4 + 8 * 3;

/// Writes through a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header(magic: &[u8; 8], g: &Grid, extra: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + extra);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    out.extend_from_slice(&g.dx.to_le_bytes());
    out.extend_from_slice(&g.dy.to_le_bytes());
    out.extend_from_slice(&g.wavelength.to_le_bytes());
    out
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

fn read_header(magic: &[u8; 8], b: &[u8], value_bytes: usize) -> Result<Grid> {
    if b.len() < HEADER_LEN || &b[..8] != magic {
        return Err(Error::Format(format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let nx = u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(b[12..16].try_into().expect("4 bytes")) as usize;
    let grid = Grid::new(nx, ny, f64_at(b, 16), f64_at(b, 24), f64_at(b, 32))?;
    let want = HEADER_LEN + nx * ny * value_bytes;
    if b.len() != want {
        return Err(Error::Format(format!("expected {want} bytes, found {}", b.len())));
    }
    Ok(grid)
}

pub fn encode_field(field: &ComplexField) -> Vec<u8> {
    let g = field.grid();
    let mut out = header(FIELD_MAGIC, g, 16 * g.len());
    for c in field.samples() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ComplexField> {
    let grid = read_header(FIELD_MAGIC, bytes, 16)?;
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    ComplexField::from_samples(grid, samples)
}

pub fn write_field(path: &Path, field: &ComplexField) -> Result<()> {
    atomic_write(path, &encode_field(field))
}

pub fn read_field(path: &Path) -> Result<ComplexField> {
    decode_field(&fs::read(path)?)
}

pub fn encode_index(profile: &IndexProfile) -> Vec<u8> {
    let g = profile.grid();
    let mut out = header(INDEX_MAGIC, g, 8 * g.len());
    for v in profile.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Background and contrast are taken from the sample range.
pub fn decode_index(bytes: &[u8]) -> Result<IndexProfile> {
    let grid = read_header(INDEX_MAGIC, bytes, 8)?;
    let n = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64_at(c, 0)).collect();
    IndexProfile::from_samples(grid, n)
}

pub fn write_index(path: &Path, profile: &IndexProfile) -> Result<()> {
    atomic_write(path, &encode_index(profile))
}

pub fn read_index(path: &Path) -> Result<IndexProfile> {
    decode_index(&fs::read(path)?)
}

/// 8-bit binary PGM of a phase mask, `phase / 2 pi` scaled to 0..255. Rows are
/// written top (largest y) first.
pub fn mask_pgm(mask: &PhaseMask) -> Vec<u8> {
    let g = mask.grid();
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            let v = mask.values()[g.index(i, j)] / (2.0 * std::f64::consts::PI);
            out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// 16-bit binary PGM (big-endian samples) of a real map scaled so that its
/// maximum is 65535. Returns the bytes and the scale (value per level).
pub fn map_pgm16(grid: &Grid, values: &[f64]) -> (Vec<u8>, f64) {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { max / 65535.0 } else { 0.0 };
    let mut out = format!("P5\n{} {}\n65535\n", grid.nx, grid.ny).into_bytes();
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let v = values[grid.index(i, j)];
            let level = if scale > 0.0 { (v / scale).round().clamp(0.0, 65535.0) as u16 } else { 0 };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    (out, scale)
}

/// 16-bit intensity image and its sidecar text (normalization constant).
pub fn intensity_pgm(grid: &Grid, values: &[f64]) -> (Vec<u8>, String) {
    let (bytes, scale) = map_pgm16(grid, values);
    let side = format!(
        "max_value = {}\nvalue_per_level = {}\ndx_um = {}\ndy_um = {}\n",
        values.iter().cloned().fold(0.0, f64::max),
        scale,
        grid.dx,
        grid.dy
    );
    (bytes, side)
}

pub fn write_intensity_pgm(path: &Path, grid: &Grid, values: &[f64]) -> Result<()> {
    let (bytes, side) = intensity_pgm(grid, values);
    atomic_write(path, &bytes)?;
    atomic_write(&sidecar_path(path), side.as_bytes())
}

/// `image.pgm` -> `image.pgm.txt`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    s.into()
}

/// Raw counts as a 16-bit PGM (saturating at 65535) and a sidecar holding the
/// seed and budgets.
pub fn count_pgm(img: &CountImage) -> (Vec<u8>, String) {
    let g = img.grid;
    let mut out = format!("P5\n{} {}\n65535\n", g.nx, g.ny).into_bytes();
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            let c = img.counts[g.index(i, j)].min(65535) as u16;
            out.extend_from_slice(&c.to_be_bytes());
        }
    }
    let side = format!(
        "seed = {}\nn_photons = {}\ndark_rate = {}\ndark_counts = {}\ntotal_counts = {}\n",
        img.seed,
        img.n_photons,
        img.dark_rate,
        img.dark_counts,
        img.total()
    );
    (out, side)
}

pub fn write_count_pgm(path: &Path, img: &CountImage) -> Result<()> {
    let (bytes, side) = count_pgm(img);
    atomic_write(path, &bytes)?;
    atomic_write(&sidecar_path(path), side.as_bytes())
}

/// CSV text with a header line; values use the shortest round-trip form.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
