//! Binary portable graymap (P5) reading and writing.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Encodes a P5 graymap; samples are one byte when `maxval < 256`, else two
/// bytes big-endian.
pub fn encode_pgm(grid: &Grid<u16>, maxval: u16) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", grid.cols(), grid.rows(), maxval).into_bytes();
    if maxval < 256 {
        out.extend(grid.data().iter().map(|&v| v.min(maxval) as u8));
    } else {
        for &v in grid.data() {
            out.extend_from_slice(&v.min(maxval).to_be_bytes());
        }
    }
    out
}

pub fn write_pgm(path: &Path, grid: &Grid<u16>, maxval: u16) -> Result<()> {
    std::fs::write(path, encode_pgm(grid, maxval)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<(u16, Grid<u16>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|msg| Error::parse(path, 0, msg))
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<(u16, Grid<u16>), String> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(format!("not a binary graymap (magic {:?})", fields[0]));
    }
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| format!("bad {what} {s:?}"));
    let cols = num(&fields[1], "width")?;
    let rows = num(&fields[2], "height")?;
    let maxval = num(&fields[3], "maxval")?;
    if maxval == 0 || maxval > u16::MAX as usize {
        return Err(format!("maxval {maxval} out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let wide = maxval >= 256;
    let need = rows * cols * if wide { 2 } else { 1 };
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != need {
        return Err(format!(
            "raster has {} bytes, expected {need}",
            raster.len()
        ));
    }
    let data: Vec<u16> = if wide {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        raster.iter().map(|&b| b as u16).collect()
    };
    if data.iter().any(|&v| v as usize > maxval) {
        return Err("sample exceeds maxval".into());
    }
    Ok((maxval as u16, Grid::from_vec(rows, cols, data)))
}
