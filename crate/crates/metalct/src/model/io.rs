//! File formats.
//!
//! `MARGRID1`: eight ASCII header lines followed by row-major little-endian `f32` samples.
//!
//! ```text
//! MARGRID1
//! kind image|sinogram
//! rows <count>
//! cols <count>
//! axis0 <name> <min> <max>
//! axis1 <name> <min> <max>
//! layout row-major f32-le
//! end
//! ```
//!
//! Images use `axis0 y -extent extent` and `axis1 x -extent extent` (pixel centers at
//! cell midpoints, row 0 at the bottom). Sinograms use `axis0 phi 0 π` (samples jπ/rows)
//! and `axis1 s s_min s_max` (cell midpoints).
//!
//! PGM output is binary P5 with 16-bit samples, top row = largest y, window-normalized;
//! the window is written to a sidecar `<file>.txt` as `min <v>` / `max <v>`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{Error, ImageGrid, ImageSpec, Result, SinoSpec, SinogramGrid};

const MAGIC: &str = "MARGRID1";

fn header(kind: &str, rows: usize, cols: usize, a0: (&str, f64, f64), a1: (&str, f64, f64)) -> String {
    format!(
        "{MAGIC}\nkind {kind}\nrows {rows}\ncols {cols}\naxis0 {} {:?} {:?}\naxis1 {} {:?} {:?}\nlayout row-major f32-le\nend\n",
        a0.0, a0.1, a0.2, a1.0, a1.1, a1.2
    )
}

fn encode(head: String, values: &Array2<f64>) -> Vec<u8> {
    let mut bytes = head.into_bytes();
    bytes.reserve(values.len() * 4);
    for v in values.iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    bytes
}

pub fn encode_image(img: &ImageGrid) -> Vec<u8> {
    let e = img.spec.extent;
    encode(header("image", img.spec.n, img.spec.n, ("y", -e, e), ("x", -e, e)), &img.values)
}

pub fn encode_sinogram(sino: &SinogramGrid) -> Vec<u8> {
    let sp = &sino.spec;
    encode(
        header("sinogram", sp.n_phi, sp.n_s, ("phi", 0.0, std::f64::consts::PI), ("s", sp.s_min, sp.s_max)),
        &sino.values,
    )
}

pub fn write_image(path: &Path, img: &ImageGrid) -> Result<()> {
    fs::write(path, encode_image(img))?;
    Ok(())
}

pub fn write_sinogram(path: &Path, sino: &SinogramGrid) -> Result<()> {
    fs::write(path, encode_sinogram(sino))?;
    Ok(())
}

/// Decoded `MARGRID1` file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawGrid {
    pub kind: String,
    pub axis0: (String, f64, f64),
    pub axis1: (String, f64, f64),
    pub values: Array2<f64>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn decode(bytes: &[u8]) -> Result<RawGrid> {
    let mut pos = 0;
    let mut lines = Vec::with_capacity(8);
    while lines.len() < 8 {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err("truncated MARGRID1 header"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| format_err("header is not ASCII"))?;
        lines.push(line.to_string());
        pos += end + 1;
    }
    if lines[0] != MAGIC {
        return Err(format_err(format!("bad magic {:?}", lines[0])));
    }
    let field = |i: usize, key: &str| -> Result<Vec<String>> {
        let mut parts = lines[i].split_whitespace().map(str::to_string);
        match parts.next() {
            Some(k) if k == key => Ok(parts.collect()),
            _ => Err(format_err(format!("header line {} should start with {key:?}", i + 1))),
        }
    };
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| format_err(format!("bad number {s:?}"))) };
    let count = |s: &str| -> Result<usize> { s.parse().map_err(|_| format_err(format!("bad count {s:?}"))) };
    let kind = field(1, "kind")?.join(" ");
    let rows = count(&field(2, "rows")?.concat())?;
    let cols = count(&field(3, "cols")?.concat())?;
    let axis = |i: usize, key: &str| -> Result<(String, f64, f64)> {
        let f = field(i, key)?;
        if f.len() != 3 {
            return Err(format_err(format!("{key} needs name min max")));
        }
        Ok((f[0].clone(), num(&f[1])?, num(&f[2])?))
    };
    let axis0 = axis(4, "axis0")?;
    let axis1 = axis(5, "axis1")?;
    if lines[6] != "layout row-major f32-le" || lines[7] != "end" {
        return Err(format_err("unsupported layout"));
    }
    let body = &bytes[pos..];
    if body.len() != rows * cols * 4 {
        return Err(format_err(format!("expected {} data bytes, found {}", rows * cols * 4, body.len())));
    }
    let data: Vec<f64> =
        body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
    let values = Array2::from_shape_vec((rows, cols), data).map_err(|e| format_err(e.to_string()))?;
    Ok(RawGrid { kind, axis0, axis1, values })
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let raw = decode(&fs::read(path)?)?;
    if raw.kind != "image" || raw.values.nrows() != raw.values.ncols() {
        return Err(format_err("not a square image grid"));
    }
    let spec = ImageSpec::new(raw.values.nrows(), raw.axis1.2)?;
    ImageGrid::from_values(spec, raw.values)
}

pub fn read_sinogram(path: &Path) -> Result<SinogramGrid> {
    let raw = decode(&fs::read(path)?)?;
    if raw.kind != "sinogram" {
        return Err(format_err("not a sinogram grid"));
    }
    let spec = SinoSpec::new(raw.values.ncols(), raw.values.nrows(), raw.axis1.1, raw.axis1.2)?;
    SinogramGrid::from_values(spec, raw.values)
}

/// Display window: explicit, or the value range of the image.
pub fn value_range(values: &Array2<f64>) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// 16-bit P5 bytes with the top row at the largest y.
pub fn encode_pgm(values: &Array2<f64>, window: (f64, f64)) -> Vec<u8> {
    let (rows, cols) = values.dim();
    let (lo, hi) = window;
    let scale = if hi > lo { 65535.0 / (hi - lo) } else { 0.0 };
    let mut bytes = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    for r in (0..rows).rev() {
        for c in 0..cols {
            let q = ((values[[r, c]] - lo) * scale).round().clamp(0.0, 65535.0) as u16;
            bytes.extend_from_slice(&q.to_be_bytes());
        }
    }
    bytes
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

/// Writes the PGM and its window sidecar; returns the window used.
pub fn write_pgm(path: &Path, values: &Array2<f64>, window: Option<(f64, f64)>) -> Result<(f64, f64)> {
    let window = window.unwrap_or_else(|| value_range(values));
    fs::write(path, encode_pgm(values, window))?;
    let mut f = fs::File::create(sidecar_path(path))?;
    writeln!(f, "min {:?}\nmax {:?}", window.0, window.1)?;
    Ok(window)
}

/// Reads a 16-bit P5 file back into rows with row 0 at the bottom, as integer levels.
pub fn read_pgm16(path: &Path) -> Result<Array2<u16>> {
    let bytes = fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(format_err("expected 16-bit P5"));
    }
    let cols: usize = fields[1].parse().map_err(|_| format_err("bad PGM width"))?;
    let rows: usize = fields[2].parse().map_err(|_| format_err("bad PGM height"))?;
    let body = &bytes[pos..];
    if body.len() != rows * cols * 2 {
        return Err(format_err("PGM size mismatch"));
    }
    let mut out = Array2::zeros((rows, cols));
    for (k, c) in body.chunks_exact(2).enumerate() {
        out[[rows - 1 - k / cols, k % cols]] = u16::from_be_bytes([c[0], c[1]]);
    }
    Ok(out)
}
