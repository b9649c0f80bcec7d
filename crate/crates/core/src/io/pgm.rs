//! Binary (`P5`) and ASCII (`P2`) greymaps.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BitMask;
use crate::heatmap::Heatmap;
use crate::scalar::Scalar;

/// Reads a PGM as a mask; any nonzero sample is set.
pub fn parse_pgm(bytes: &[u8]) -> Result<BitMask> {
    let mut pos = 0;
    let mut header = [0usize; 3];
    let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::parse(1, "missing PGM magic"))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(Error::parse(1, "not a P2/P5 greymap")),
    };
    for (slot, what) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok =
            next_token(bytes, &mut pos).ok_or_else(|| Error::parse(line_of(bytes, pos), format!("missing {what}")))?;
        *slot = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(line_of(bytes, pos), format!("bad {what}")))?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(
            line_of(bytes, pos),
            format!("maxval {maxval} out of range"),
        ));
    }
    let n = width * height;
    let mut bits = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let data = bytes
            .get(pos..pos + n * bpp)
            .ok_or_else(|| Error::parse(line_of(bytes, pos), "truncated raster"))?;
        bits.extend(data.chunks(bpp).map(|c| c.iter().any(|&b| b != 0)));
    } else {
        for _ in 0..n {
            let tok =
                next_token(bytes, &mut pos).ok_or_else(|| Error::parse(line_of(bytes, pos), "truncated raster"))?;
            let v: usize = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(line_of(bytes, pos), "bad sample"))?;
            bits.push(v != 0);
        }
    }
    BitMask::from_bits(width, height, bits)
}

pub fn read_pgm(path: &Path) -> Result<BitMask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

/// One channel of a heatmap as an 8-bit `P5` image, values clamped to
/// `[0, 1]`.
pub fn heatmap_to_pgm<T: Scalar>(hm: &Heatmap<T>, channel: usize) -> Result<Vec<u8>> {
    if channel >= hm.channels() {
        return Err(Error::invalid(format!("channel {channel} out of range")));
    }
    let mut out = format!("P5\n{} {}\n255\n", hm.width(), hm.height()).into_bytes();
    for y in 0..hm.height() {
        for x in 0..hm.width() {
            let v = hm.get(channel, x, y).to_f64_lossy().clamp(0.0, 1.0);
            out.push((v * 255.0).round() as u8);
        }
    }
    Ok(out)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

fn line_of(bytes: &[u8], pos: usize) -> usize {
    bytes[..pos.min(bytes.len())].iter().filter(|&&b| b == b'\n').count() + 1
}
