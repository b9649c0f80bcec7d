//! Mask-based MOTS evaluation: per-frame IoU matching and the CLEAR-style
//! aggregate scores (sMOTSA, MOTSA, MOTSP, MODSA, recall, precision, IDSW).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{BitMask, GridSize, Polygon};
use crate::scalar::Scalar;

/// A polygon instance to be layered into disjoint masks.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredInstance<T> {
    pub id: u64,
    pub class_id: u32,
    pub polygon: Polygon<T>,
    /// Pseudo-depth; smaller is nearer the camera.
    pub depth: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskInstance {
    pub id: u64,
    pub class_id: u32,
    pub mask: BitMask,
}

/// Per-frame instance masks of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSequence {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<MaskInstance>>,
}

impl MaskSequence {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            frames: Vec::new(),
        }
    }

    /// Instances of a single class.
    pub fn filter_class(&self, class_id: u32) -> MaskSequence {
        MaskSequence {
            width: self.width,
            height: self.height,
            frames: self
                .frames
                .iter()
                .map(|f| f.iter().filter(|m| m.class_id == class_id).cloned().collect())
                .collect(),
        }
    }

    pub fn classes(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.frames.iter().flatten().map(|m| m.class_id).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

struct LabelGrid {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl GridSize for LabelGrid {
    fn grid_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Rasterizes instances farthest-first so nearer ones overwrite farther
/// ones. The returned masks are pixel-disjoint and keep the input order; an
/// instance hidden entirely behind others gets an empty mask.
pub fn flatten<T: Scalar>(instances: &[LayeredInstance<T>], width: usize, height: usize) -> Result<Vec<MaskInstance>> {
    let mut order = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        match inst.depth {
            Some(d) if d.is_finite() => order.push((i, d)),
            _ => return Err(Error::invalid(format!("instance {} has no usable depth", inst.id))),
        }
    }
    // Farthest (largest depth) first; equal depths fall back to id order so the
    // higher id ends up on top.
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(instances[a.0].id.cmp(&instances[b.0].id))
    });

    let mut grid = LabelGrid {
        width,
        height,
        labels: vec![0; width * height],
    };
    for &(i, _) in &order {
        let label = i as u32 + 1;
        instances[i]
            .polygon
            .rasterize_into(&mut grid, |g, x, y| g.labels[y * g.width + x] = label);
    }

    let mut bits: Vec<Vec<bool>> = vec![vec![false; width * height]; instances.len()];
    for (p, &l) in grid.labels.iter().enumerate() {
        if l > 0 {
            bits[l as usize - 1][p] = true;
        }
    }
    instances
        .iter()
        .zip(bits)
        .map(|(inst, b)| {
            Ok(MaskInstance {
                id: inst.id,
                class_id: inst.class_id,
                mask: BitMask::from_bits(width, height, b)?,
            })
        })
        .collect()
}

/// Matching of one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMatch {
    /// `(gt id, hypothesis id, iou)`, every iou above 0.5.
    pub pairs: Vec<(u64, u64, f64)>,
    /// Unmatched hypothesis ids.
    pub fp_ids: Vec<u64>,
    /// Unmatched ground-truth ids.
    pub fn_ids: Vec<u64>,
}

fn label_side(masks: &[MaskInstance], width: usize, height: usize, side: &str) -> Result<(Vec<u32>, Vec<usize>)> {
    let mut labels = vec![0u32; width * height];
    let mut areas = vec![0usize; masks.len()];
    for (k, m) in masks.iter().enumerate() {
        if m.mask.width() != width || m.mask.height() != height {
            return Err(Error::invalid(format!(
                "{side} mask {} is {}x{}, expected {width}x{height}",
                m.id,
                m.mask.width(),
                m.mask.height()
            )));
        }
        for (p, &b) in m.mask.bits().iter().enumerate() {
            if b {
                if labels[p] != 0 {
                    let other = &masks[labels[p] as usize - 1];
                    return Err(Error::invalid(format!(
                        "{side} masks {} and {} overlap",
                        other.id, m.id
                    )));
                }
                labels[p] = k as u32 + 1;
                areas[k] += 1;
            }
        }
    }
    Ok((labels, areas))
}

/// Matches pixel-disjoint ground-truth and hypothesis masks at IoU > 0.5.
pub fn match_frame(gt: &[MaskInstance], hyp: &[MaskInstance]) -> Result<FrameMatch> {
    let Some(first) = gt.first().or(hyp.first()) else {
        return Ok(FrameMatch::default());
    };
    let (width, height) = (first.mask.width(), first.mask.height());
    let (gt_labels, gt_area) = label_side(gt, width, height, "ground-truth")?;
    let (hyp_labels, hyp_area) = label_side(hyp, width, height, "hypothesis")?;

    let mut inter: HashMap<(u32, u32), usize> = HashMap::new();
    for (&g, &h) in gt_labels.iter().zip(&hyp_labels) {
        if g != 0 && h != 0 {
            *inter.entry((g, h)).or_default() += 1;
        }
    }
    let mut candidates: Vec<(usize, usize, f64)> = inter
        .into_iter()
        .map(|((g, h), n)| {
            let (g, h) = (g as usize - 1, h as usize - 1);
            let union = gt_area[g] + hyp_area[h] - n;
            (g, h, n as f64 / union as f64)
        })
        .filter(|&(_, _, iou)| iou > 0.5)
        .collect();
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(gt[a.0].id.cmp(&gt[b.0].id))
            .then(hyp[a.1].id.cmp(&hyp[b.1].id))
    });

    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];
    let mut out = FrameMatch::default();
    for (g, h, iou) in candidates {
        if gt_used[g] || hyp_used[h] {
            continue;
        }
        gt_used[g] = true;
        hyp_used[h] = true;
        out.pairs.push((gt[g].id, hyp[h].id, iou));
    }
    out.fn_ids = gt
        .iter()
        .zip(&gt_used)
        .filter(|(_, &u)| !u)
        .map(|(m, _)| m.id)
        .collect();
    out.fp_ids = hyp
        .iter()
        .zip(&hyp_used)
        .filter(|(_, &u)| !u)
        .map(|(m, _)| m.id)
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub idsw: u64,
    /// Total ground-truth masks (`tp + fn_`).
    pub gt_count: u64,
    /// Sum of IoUs of matched pairs.
    pub soft_tp: f64,
    pub smotsa: f64,
    pub motsa: f64,
    pub motsp: f64,
    pub modsa: f64,
    pub recall: f64,
    pub precision: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl MetricsReport {
    /// Derives every score from the raw counts.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, idsw: u64, soft_tp: f64) -> Self {
        let g = (tp + fn_) as f64;
        let (tpf, fpf, idf) = (tp as f64, fp as f64, idsw as f64);
        Self {
            tp,
            fp,
            fn_,
            idsw,
            gt_count: tp + fn_,
            soft_tp,
            smotsa: ratio(soft_tp - fpf - idf, g),
            motsa: ratio(tpf - fpf - idf, g),
            motsp: ratio(soft_tp, tpf),
            modsa: ratio(tpf - fpf, g),
            recall: ratio(tpf, tpf + fn_ as f64),
            precision: ratio(tpf, tpf + fpf),
        }
    }

    /// Human-readable table, scores in percent.
    pub fn to_aligned_text(&self, title: &str) -> String {
        let mut s = String::new();
        let header = [
            "sMOTSA", "MOTSA", "MOTSP", "MODSA", "TP", "FP", "FN", "Rcll", "Prcn", "IDSW",
        ];
        let pct = |v: f64| format!("{:.2}", v * 100.0);
        let row = [
            pct(self.smotsa),
            pct(self.motsa),
            pct(self.motsp),
            pct(self.modsa),
            self.tp.to_string(),
            self.fp.to_string(),
            self.fn_.to_string(),
            pct(self.recall),
            pct(self.precision),
            self.idsw.to_string(),
        ];
        let _ = write!(s, "{:<10}", "");
        for h in header {
            let _ = write!(s, "{h:>9}");
        }
        s.push('\n');
        let _ = write!(s, "{title:<10}");
        for v in row {
            let _ = write!(s, "{v:>9}");
        }
        s.push('\n');
        s
    }

    /// `key=value` lines with unscaled scores.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{prefix}{k}={v}");
        };
        kv("smotsa", format!("{}", self.smotsa));
        kv("motsa", format!("{}", self.motsa));
        kv("motsp", format!("{}", self.motsp));
        kv("modsa", format!("{}", self.modsa));
        kv("tp", self.tp.to_string());
        kv("fp", self.fp.to_string());
        kv("fn", self.fn_.to_string());
        kv("gt", self.gt_count.to_string());
        kv("idsw", self.idsw.to_string());
        kv("soft_tp", format!("{}", self.soft_tp));
        kv("recall", format!("{}", self.recall));
        kv("precision", format!("{}", self.precision));
        s
    }
}

/// Evaluates a hypothesis sequence against ground truth.
///
/// Frames missing from the shorter sequence count as empty. Instances with
/// empty masks are ignored on both sides. An identity switch is counted when
/// a ground-truth object is matched to a hypothesis id different from the
/// one it was last matched to.
pub fn evaluate(gt: &MaskSequence, hyp: &MaskSequence) -> Result<MetricsReport> {
    if gt.width != hyp.width || gt.height != hyp.height {
        return Err(Error::invalid(format!(
            "sequence sizes differ: {}x{} vs {}x{}",
            gt.width, gt.height, hyp.width, hyp.height
        )));
    }
    let n = gt.frames.len().max(hyp.frames.len());
    let empty: Vec<MaskInstance> = Vec::new();
    let (mut tp, mut fp, mut fn_, mut idsw) = (0u64, 0u64, 0u64, 0u64);
    let mut soft_tp = 0.0;
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    for k in 0..n {
        let g: Vec<MaskInstance> = gt
            .frames
            .get(k)
            .unwrap_or(&empty)
            .iter()
            .filter(|m| !m.mask.is_empty())
            .cloned()
            .collect();
        let h: Vec<MaskInstance> = hyp
            .frames
            .get(k)
            .unwrap_or(&empty)
            .iter()
            .filter(|m| !m.mask.is_empty())
            .cloned()
            .collect();
        let fm = match_frame(&g, &h).map_err(|e| Error::invalid(format!("frame {k}: {e}")))?;
        tp += fm.pairs.len() as u64;
        fp += fm.fp_ids.len() as u64;
        fn_ += fm.fn_ids.len() as u64;
        for &(gid, hid, iou) in &fm.pairs {
            soft_tp += iou;
            if let Some(prev) = last_match.insert(gid, hid) {
                if prev != hid {
                    idsw += 1;
                }
            }
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, fn_, idsw, soft_tp))
}
