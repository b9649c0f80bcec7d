use std::fmt::Write as _;

use super::rle::decode_rle;
use super::text::ResultRecord;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, DEFAULT_VERTICES};
use crate::tracker::Detection;

const PALETTE: [&str; 8] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324",
];

/// SVG overlay of the tracks present in `frame`: one `<polygon>` per track
/// (its mask polygonized) labelled with the track id. Detections, when
/// given, are drawn as a center dot plus a line to the previous-frame
/// position predicted by the offset.
pub fn render_svg(records: &[ResultRecord], frame: u64, detections: Option<&[Detection<f64>]>) -> Result<String> {
    let in_frame: Vec<&ResultRecord> = records.iter().filter(|r| r.frame == frame).collect();
    let (width, height) = records.first().map_or((0, 0), |r| (r.width, r.height));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#202020"/>"##);
    for r in in_frame {
        let mask = decode_rle(&r.rle, r.height, r.width)?;
        if mask.is_empty() {
            continue;
        }
        let poly: Polygon<f64> = mask.polygonize(DEFAULT_VERTICES)?;
        let color = PALETTE[(r.track_id as usize) % PALETTE.len()];
        let pts: Vec<String> = poly
            .vertices()
            .iter()
            .map(|v| format!("{:.2},{:.2}", v.x, v.y))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.35" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        let c = poly.centroid();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="white" font-size="10" text-anchor="middle">{}</text>"#,
            c.x, c.y, r.track_id
        );
    }
    for d in detections.unwrap_or(&[]).iter().filter(|d| d.frame == frame) {
        if !d.center.is_finite() {
            return Err(Error::invalid("detection center is not finite"));
        }
        let p = d.previous_position();
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="yellow"/>"#,
            d.center.x, d.center.y
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="yellow" stroke-width="1"/>"#,
            d.center.x, d.center.y, p.x, p.y
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
