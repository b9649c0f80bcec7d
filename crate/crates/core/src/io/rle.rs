//! COCO-style compressed run-length encoding.
//!
//! Runs are taken in column-major order and start with a run of zeros.
//! From the fourth run on, each count is stored as the difference to the
//! count two positions earlier. Every value is written as little-endian
//! 5-bit groups with a continuation bit (0x20), sign-extended from bit 0x10
//! of the last group, each group offset by ASCII `'0'`.

use crate::error::{Error, Result};
use crate::geometry::BitMask;

/// Alternating zero/one run lengths in column-major order.
pub fn mask_to_runs(mask: &BitMask) -> Vec<u64> {
    let (w, h) = (mask.width(), mask.height());
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u64;
    for x in 0..w {
        for y in 0..h {
            let b = mask.get(x, y);
            if b != current {
                runs.push(len);
                len = 0;
                current = b;
            }
            len += 1;
        }
    }
    runs.push(len);
    runs
}

pub fn encode_rle(mask: &BitMask) -> String {
    let runs = mask_to_runs(mask);
    let mut s = String::with_capacity(runs.len() * 2);
    for (i, &r) in runs.iter().enumerate() {
        let mut x = r as i64;
        if i > 2 {
            x -= runs[i - 2] as i64;
        }
        loop {
            let mut c = (x & 0x1f) as u8;
            x >>= 5;
            let more = if c & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                c |= 0x20;
            }
            s.push((c + 48) as char);
            if !more {
                break;
            }
        }
    }
    s
}

pub fn decode_rle(s: &str, height: usize, width: usize) -> Result<BitMask> {
    let bytes = s.as_bytes();
    let mut runs: Vec<i64> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let mut x: i64 = 0;
        let mut shift = 0u32;
        loop {
            let Some(&b) = bytes.get(i) else {
                return Err(Error::parse(0, "truncated rle string"));
            };
            if !(48..48 + 64).contains(&b) {
                return Err(Error::parse(0, format!("invalid rle character {:?}", b as char)));
            }
            if shift > 55 {
                return Err(Error::parse(0, "rle value overflows"));
            }
            let c = (b - 48) as i64;
            i += 1;
            x |= (c & 0x1f) << shift;
            shift += 5;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << shift;
                }
                break;
            }
        }
        if runs.len() > 2 {
            x += runs[runs.len() - 2];
        }
        if x < 0 {
            return Err(Error::parse(0, "negative run length in rle"));
        }
        runs.push(x);
    }
    let total: i64 = runs.iter().sum();
    if total as usize != width * height {
        return Err(Error::parse(
            0,
            format!("rle covers {total} pixels, expected {height}x{width}"),
        ));
    }
    let mut mask = BitMask::new(width, height);
    let mut p = 0usize;
    for (k, &r) in runs.iter().enumerate() {
        let value = k % 2 == 1;
        for q in p..p + r as usize {
            if value {
                mask.set(q / height, q % height, true);
            }
        }
        p += r as usize;
    }
    Ok(mask)
}
