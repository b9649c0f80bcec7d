use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::rle::{decode_rle, encode_rle};
use super::{read_to_string, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon, DEFAULT_VERTICES};
use crate::metrics::{flatten, LayeredInstance, MaskInstance, MaskSequence};
use crate::simulator::GroundTruth;
use crate::tracker::{Detection, Track};

const HEADER_FIELDS: usize = 8;
const RECORD_FIELDS: usize = HEADER_FIELDS + 2 * DEFAULT_VERTICES;
const SIZE_PRAGMA: &str = "image_size";

/// Parsed detection file; `frames[k]` holds the detections of frame `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionFile {
    /// From a `# image_size <width> <height>` comment, when present.
    pub image_size: Option<(usize, usize)>,
    pub frames: Vec<Vec<Detection<f64>>>,
}

fn parse_num<N: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<N> {
    tok.parse::<N>()
        .map_err(|_| Error::parse(line, format!("bad {what} '{tok}'")))
}

fn parse_size_pragma(comment: &str, line: usize) -> Result<Option<(usize, usize)>> {
    let mut toks = comment.split_whitespace();
    if toks.next() != Some(SIZE_PRAGMA) {
        return Ok(None);
    }
    let w = parse_num(toks.next().unwrap_or(""), line, "image width")?;
    let h = parse_num(toks.next().unwrap_or(""), line, "image height")?;
    Ok(Some((w, h)))
}

pub fn parse_detections_str(text: &str) -> Result<DetectionFile> {
    let mut out = DetectionFile::default();
    let mut last_frame: Option<u64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if let Some(size) = parse_size_pragma(c, line)? {
                out.image_size = Some(size);
            }
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != RECORD_FIELDS {
            return Err(Error::parse(
                line,
                format!("expected {RECORD_FIELDS} fields, found {}", toks.len()),
            ));
        }
        let frame: u64 = parse_num(toks[0], line, "frame")?;
        if last_frame.is_some_and(|f| frame < f) {
            return Err(Error::parse(line, format!("frame {frame} comes after a later frame")));
        }
        last_frame = Some(frame);
        let class_id: u32 = parse_num(toks[1], line, "class id")?;
        let mut nums = [0.0f64; RECORD_FIELDS];
        for (k, tok) in toks.iter().enumerate().skip(2) {
            let v: f64 = parse_num(tok, line, "number")?;
            if !v.is_finite() {
                return Err(Error::parse(line, format!("non-finite value '{tok}'")));
            }
            nums[k] = v;
        }
        let score = nums[2];
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::parse(line, format!("score {score} outside [0, 1]")));
        }
        let polygon = Polygon::from_flat(&nums[HEADER_FIELDS..]).map_err(|e| Error::parse(line, e.to_string()))?;
        let det = Detection {
            frame,
            class_id,
            score,
            center: Point2::new(nums[3], nums[4]),
            depth: nums[5],
            offset: Point2::new(nums[6], nums[7]),
            polygon,
        };
        let k = frame as usize;
        if out.frames.len() <= k {
            out.frames.resize_with(k + 1, Vec::new);
        }
        out.frames[k].push(det);
    }
    Ok(out)
}

pub fn parse_detections(path: &Path) -> Result<DetectionFile> {
    parse_detections_str(&read_to_string(path)?)
}

pub fn format_detections(frames: &[Vec<Detection<f64>>], image_size: Option<(usize, usize)>) -> Result<String> {
    let mut s = String::new();
    s.push_str("# frame class score cx cy depth off_x off_y x1 y1 ... x32 y32\n");
    if let Some((w, h)) = image_size {
        let _ = writeln!(s, "# {SIZE_PRAGMA} {w} {h}");
    }
    for (k, dets) in frames.iter().enumerate() {
        for d in dets {
            if d.polygon.len() != DEFAULT_VERTICES {
                return Err(Error::invalid(format!(
                    "detection in frame {k} has {} vertices, the format needs {DEFAULT_VERTICES}",
                    d.polygon.len()
                )));
            }
            let _ = write!(
                s,
                "{} {} {} {} {} {} {} {}",
                d.frame, d.class_id, d.score, d.center.x, d.center.y, d.depth, d.offset.x, d.offset.y
            );
            for v in d.polygon.vertices() {
                let _ = write!(s, " {} {}", v.x, v.y);
            }
            s.push('\n');
        }
    }
    Ok(s)
}

pub fn write_detections(frames: &[Vec<Detection<f64>>], image_size: Option<(usize, usize)>, path: &Path) -> Result<()> {
    write_atomic(path, format_detections(frames, image_size)?.as_bytes())
}

/// One KITTI-MOTS line: `frame track_id class_id height width rle`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRecord {
    pub frame: u64,
    pub track_id: u64,
    pub class_id: u32,
    pub height: usize,
    pub width: usize,
    pub rle: String,
}

pub fn parse_results_str(text: &str) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 6 {
            return Err(Error::parse(line, format!("expected 6 fields, found {}", toks.len())));
        }
        let rec = ResultRecord {
            frame: parse_num(toks[0], line, "frame")?,
            track_id: parse_num(toks[1], line, "track id")?,
            class_id: parse_num(toks[2], line, "class id")?,
            height: parse_num(toks[3], line, "image height")?,
            width: parse_num(toks[4], line, "image width")?,
            rle: toks[5].to_string(),
        };
        decode_rle(&rec.rle, rec.height, rec.width).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(line, msg),
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_results(path: &Path) -> Result<Vec<ResultRecord>> {
    parse_results_str(&read_to_string(path)?)
}

pub fn format_results(records: &[ResultRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            r.frame, r.track_id, r.class_id, r.height, r.width, r.rle
        );
    }
    s
}

/// Decodes records into a mask sequence. `fallback_size` (`width, height`)
/// is used when there are no records.
pub fn records_to_sequence(records: &[ResultRecord], fallback_size: Option<(usize, usize)>) -> Result<MaskSequence> {
    let (width, height) = match records.first() {
        Some(r) => (r.width, r.height),
        None => fallback_size.unwrap_or((0, 0)),
    };
    let mut seq = MaskSequence::new(width, height);
    for (k, r) in records.iter().enumerate() {
        if r.width != width || r.height != height {
            return Err(Error::invalid(format!(
                "record {} is {}x{}, the sequence is {width}x{height}",
                k + 1,
                r.width,
                r.height
            )));
        }
        let f = r.frame as usize;
        if seq.frames.len() <= f {
            seq.frames.resize_with(f + 1, Vec::new);
        }
        seq.frames[f].push(MaskInstance {
            id: r.track_id,
            class_id: r.class_id,
            mask: decode_rle(&r.rle, r.height, r.width)?,
        });
    }
    Ok(seq)
}

/// Records for every non-empty mask of a sequence, ordered by frame then id.
pub fn sequence_records(seq: &MaskSequence) -> Vec<ResultRecord> {
    let mut out = Vec::new();
    for (f, masks) in seq.frames.iter().enumerate() {
        let mut sorted: Vec<&MaskInstance> = masks.iter().filter(|m| !m.mask.is_empty()).collect();
        sorted.sort_by_key(|m| m.id);
        for m in sorted {
            out.push(ResultRecord {
                frame: f as u64,
                track_id: m.id,
                class_id: m.class_id,
                height: seq.height,
                width: seq.width,
                rle: encode_rle(&m.mask),
            });
        }
    }
    out
}

/// Tracker output as result records. Only frames in which a track was
/// matched to a detection produce a mask; masks of one frame are made
/// disjoint by pseudo-depth.
pub fn track_records(tracks: &[Track<f64>], width: usize, height: usize) -> Result<Vec<ResultRecord>> {
    let mut per_frame: BTreeMap<u64, Vec<LayeredInstance<f64>>> = BTreeMap::new();
    for t in tracks {
        for (frame, det) in t.detections() {
            per_frame.entry(frame).or_default().push(LayeredInstance {
                id: t.id,
                class_id: t.class_id,
                polygon: det.polygon.clone(),
                depth: Some(det.depth),
            });
        }
    }
    let n = per_frame.keys().next_back().map_or(0, |&f| f as usize + 1);
    let mut seq = MaskSequence::new(width, height);
    seq.frames.resize_with(n, Vec::new);
    for (frame, instances) in per_frame {
        seq.frames[frame as usize] = flatten(&instances, width, height)?;
    }
    Ok(sequence_records(&seq))
}

pub fn ground_truth_records(gt: &GroundTruth) -> Result<Vec<ResultRecord>> {
    Ok(sequence_records(&gt.to_masks()?))
}

pub fn write_results(tracks: &[Track<f64>], width: usize, height: usize, path: &Path) -> Result<()> {
    let records = track_records(tracks, width, height)?;
    write_atomic(path, format_results(&records).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BitMask;

    fn det_line(frame: u64, score: f64) -> String {
        let mut s = format!("{frame} 1 {score} 10 10 0.5 -1 0");
        for k in 0..32 {
            let t = std::f64::consts::TAU * k as f64 / 32.0;
            s.push_str(&format!(" {} {}", 10.0 + 3.0 * t.cos(), 10.0 + 3.0 * t.sin()));
        }
        s
    }

    #[test]
    fn empty_file() {
        let f = parse_detections_str("").unwrap();
        assert!(f.frames.is_empty() && f.image_size.is_none());
        assert!(parse_results_str("# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn pragma_and_gaps() {
        let text = format!("# image_size 64 48\n{}\n{}\n", det_line(0, 0.9), det_line(2, 0.8));
        let f = parse_detections_str(&text).unwrap();
        assert_eq!(f.image_size, Some((64, 48)));
        assert_eq!(f.frames.len(), 3);
        assert!(f.frames[1].is_empty());
        assert_eq!(f.frames[2][0].offset, Point2::new(-1.0, 0.0));
    }

    #[test]
    fn error_names_line() {
        let mut lines: Vec<String> = (0..16).map(|k| det_line(k, 0.9)).collect();
        lines.push("16 1 0.9 1 2 3".to_string());
        let err = parse_detections_str(&lines.join("\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 17),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_line(&format!("{}\n{}", det_line(3, 0.9), det_line(1, 0.9))) == 2);
        assert!(err_line(&det_line(0, 1.5)) == 1);
        assert!(err_line("1 2 3 x 4 5 6") == 1);
    }

    fn err_line(text: &str) -> usize {
        match parse_detections_str(text).unwrap_err() {
            Error::Parse { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detection_round_trip() {
        let text = format!("{}\n{}\n{}\n", det_line(0, 0.9), det_line(0, 0.7), det_line(1, 0.35));
        let parsed = parse_detections_str(&text).unwrap();
        let again = parse_detections_str(&format_detections(&parsed.frames, Some((32, 32))).unwrap()).unwrap();
        assert_eq!(again.frames.len(), parsed.frames.len());
        for (a, b) in again.frames.iter().flatten().zip(parsed.frames.iter().flatten()) {
            assert!(a.center.distance(b.center) < 1e-4);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn result_records_round_trip() {
        let mut m = BitMask::new(5, 4);
        m.set(1, 1, true);
        m.set(2, 1, true);
        let seq = MaskSequence {
            width: 5,
            height: 4,
            frames: vec![
                vec![],
                vec![MaskInstance {
                    id: 3,
                    class_id: 2,
                    mask: m,
                }],
            ],
        };
        let records = sequence_records(&seq);
        let text = format_results(&records);
        let parsed = parse_results_str(&text).unwrap();
        assert_eq!(parsed, records);
        assert_eq!(records_to_sequence(&parsed, None).unwrap(), seq);
    }

    #[test]
    fn bad_result_line() {
        match parse_results_str("0 1 1 4 5 6\n0 2 1 4 5 zz\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_results_str("0 1 1 4 5").is_err());
    }
}
