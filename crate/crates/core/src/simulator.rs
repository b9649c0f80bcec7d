//! Seeded synthetic scenes and a detector noise model.
//!
//! [`generate`] moves analytic shapes (rectangles, ellipses) through the
//! image and turns each visible object into a 32-vertex polygon by
//! polygonizing its rendered mask. [`perturb`] turns that ground truth into
//! detections: objects are dropped, centers jittered, false positives added
//! and tracking offsets derived from the ground-truth motion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{BitMask, Point2, Polygon, DEFAULT_VERTICES};
use crate::losses::offset_target;
use crate::metrics::{flatten, LayeredInstance, MaskSequence};
use crate::tracker::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Linear,
    Crossing,
    Occlusion,
    BoundaryExitEnter,
    RandomWalk,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Linear,
        ScenarioKind::Crossing,
        ScenarioKind::Occlusion,
        ScenarioKind::BoundaryExitEnter,
        ScenarioKind::RandomWalk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Linear => "linear",
            ScenarioKind::Crossing => "crossing",
            ScenarioKind::Occlusion => "occlusion",
            ScenarioKind::BoundaryExitEnter => "boundary_exit_enter",
            ScenarioKind::RandomWalk => "random_walk",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scenario kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub class_id: u32,
    pub shape: ShapeKind,
    /// Full width and height in pixels.
    pub size: (f64, f64),
    /// Frame at which the object enters the scene.
    pub start_frame: u32,
    /// Center at `start_frame`; must lie inside the image.
    pub start: Point2<f64>,
    /// px/frame.
    pub velocity: Point2<f64>,
    /// px/frame².
    pub acceleration: Point2<f64>,
    /// Half-open frame ranges during which the object is fully occluded.
    pub hidden: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n_frames: u32,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Standard deviation of the per-frame velocity kick, px/frame. Only used
    /// by random-walk scenarios.
    pub walk_sigma: f64,
    pub objects: Vec<ObjectSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtObject {
    pub id: u64,
    pub class_id: u32,
    /// Mean of the polygon vertices.
    pub center: Point2<f64>,
    pub polygon: Polygon<f64>,
    /// Smaller is nearer; objects lower in the image are nearer.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<GtObject>>,
}

impl GroundTruth {
    pub fn find(&self, frame: usize, id: u64) -> Option<&GtObject> {
        self.frames.get(frame)?.iter().find(|o| o.id == id)
    }

    /// Depth-ordered, pixel-disjoint masks. Fully occluded objects are dropped.
    pub fn to_masks(&self) -> Result<MaskSequence> {
        let mut seq = MaskSequence::new(self.width, self.height);
        for objs in &self.frames {
            let layered: Vec<LayeredInstance<f64>> = objs
                .iter()
                .map(|o| LayeredInstance {
                    id: o.id,
                    class_id: o.class_id,
                    polygon: o.polygon.clone(),
                    depth: Some(o.depth),
                })
                .collect();
            let mut masks = flatten(&layered, self.width, self.height)?;
            masks.retain(|m| !m.mask.is_empty());
            seq.frames.push(masks);
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Probability that a ground-truth object is not detected.
    pub drop_prob: f64,
    /// Per-frame probability of one false positive.
    pub fp_prob: f64,
    /// Isotropic Gaussian jitter of detected objects, px.
    pub center_jitter_sigma: f64,
    /// Gaussian noise on each offset component, px.
    pub offset_noise_sigma: f64,
    /// Offsets point at the object's center this many frames back, drawn
    /// uniformly from `1..=prev_frame_lookback` per detection.
    pub prev_frame_lookback: u32,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            drop_prob: 0.4,
            fp_prob: 0.1,
            center_jitter_sigma: 1.0,
            offset_noise_sigma: 0.5,
            prev_frame_lookback: 1,
        }
    }
}

impl NoiseParams {
    /// No drops, no false positives, no jitter.
    pub fn identity() -> Self {
        Self {
            drop_prob: 0.0,
            fp_prob: 0.0,
            center_jitter_sigma: 0.0,
            offset_noise_sigma: 0.0,
            prev_frame_lookback: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("drop_prob", self.drop_prob), ("fp_prob", self.fp_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.center_jitter_sigma >= 0.0) || !(self.offset_noise_sigma >= 0.0) {
            return Err(Error::invalid("noise sigmas must be non-negative"));
        }
        if !(1..=3).contains(&self.prev_frame_lookback) {
            return Err(Error::invalid("prev_frame_lookback must be 1, 2 or 3"));
        }
        Ok(())
    }
}

impl Scenario {
    /// Builds a scenario of the given kind with seeded object layouts.
    ///
    /// * `Linear`: objects in separate lanes at constant velocity.
    /// * `Crossing`: pairs of objects with mirrored velocities whose centers
    ///   meet at the middle frame.
    /// * `Occlusion`: lane objects, each fully hidden for 4..=10 frames.
    /// * `BoundaryExitEnter`: one object leaves through the right edge, a
    ///   second of the same class enters from the same place a few frames
    ///   later, moving the other way.
    /// * `RandomWalk`: lane objects with random velocity kicks.
    pub fn preset(
        kind: ScenarioKind,
        n_objects: usize,
        n_frames: u32,
        width: usize,
        height: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_frames < 2 {
            return Err(Error::invalid("a scenario needs at least 2 frames"));
        }
        if n_objects == 0 {
            return Err(Error::invalid("a scenario needs at least one object"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5ce7_a710);
        let (w, h) = (width as f64, height as f64);
        let lanes = n_objects.max(1);
        let lane_h = h / lanes as f64;
        let shape_for = |rng: &mut ChaCha8Rng, max_h: f64| {
            let shape = if rng.gen_bool(0.5) {
                ShapeKind::Rectangle
            } else {
                ShapeKind::Ellipse
            };
            let sh = rng.gen_range(16.0..32.0f64).min(max_h * 0.8).max(6.0);
            let sw = rng.gen_range(16.0..36.0f64);
            (shape, (sw, sh))
        };
        let n = n_frames as f64;
        let mut objects = Vec::new();
        match kind {
            ScenarioKind::Linear | ScenarioKind::RandomWalk | ScenarioKind::Occlusion => {
                for k in 0..n_objects {
                    let (shape, size) = shape_for(&mut rng, lane_h);
                    let margin = size.0 / 2.0 + 2.0;
                    let span = (w - 2.0 * margin).max(1.0);
                    let speed = rng.gen_range(3.0..7.0f64).min(0.9 * span / n);
                    let rightward = rng.gen_bool(0.5);
                    let travel = speed * n;
                    let x0 = if rightward {
                        margin + rng.gen_range(0.0..(span - travel).max(1e-3))
                    } else {
                        w - margin - rng.gen_range(0.0..(span - travel).max(1e-3))
                    };
                    let vy = if kind == ScenarioKind::Linear {
                        rng.gen_range(-0.3..0.3)
                    } else {
                        0.0
                    };
                    let y0 = lane_h * (k as f64 + 0.5);
                    let mut hidden = Vec::new();
                    if kind == ScenarioKind::Occlusion {
                        let len = rng.gen_range(4..=10u32).min(n_frames.saturating_sub(4).max(1));
                        let lo = (n_frames / 4).max(1);
                        let hi = (n_frames - len).saturating_sub(2).max(lo + 1);
                        let start = rng.gen_range(lo..hi);
                        hidden.push((start, start + len));
                    }
                    objects.push(ObjectSpec {
                        class_id: 1,
                        shape,
                        size,
                        start_frame: 0,
                        start: Point2::new(x0, y0),
                        velocity: Point2::new(if rightward { speed } else { -speed }, vy),
                        acceleration: Point2::new(0.0, 0.0),
                        hidden,
                    });
                }
            }
            ScenarioKind::Crossing => {
                let pairs = n_objects.div_ceil(2);
                let pair_h = h / pairs as f64;
                let tc = n_frames / 2;
                for k in 0..pairs {
                    let (shape, size) = shape_for(&mut rng, pair_h);
                    let margin = size.0 / 2.0 + 2.0;
                    let speed = rng.gen_range(2.0..5.0f64).min((w / 2.0 - margin) / tc as f64);
                    let cx = w / 2.0 + rng.gen_range(-0.1..0.1) * w;
                    let y = pair_h * (k as f64 + 0.5);
                    for dir in [1.0, -1.0] {
                        if objects.len() == n_objects {
                            break;
                        }
                        objects.push(ObjectSpec {
                            class_id: 1,
                            shape,
                            size,
                            start_frame: 0,
                            start: Point2::new(cx - dir * speed * tc as f64, y),
                            velocity: Point2::new(dir * speed, 0.0),
                            acceleration: Point2::new(0.0, 0.0),
                            hidden: Vec::new(),
                        });
                    }
                }
            }
            ScenarioKind::BoundaryExitEnter => {
                let pairs = n_objects.div_ceil(2);
                let pair_h = h / pairs as f64;
                for k in 0..pairs {
                    let (shape, size) = shape_for(&mut rng, pair_h);
                    let speed = rng.gen_range(3.0..6.0f64);
                    let y = pair_h * (k as f64 + 0.5);
                    // Leaves around a third of the way through.
                    let exit = (n_frames / 3).max(1) as f64;
                    let x0 = (w - speed * exit).max(size.0 / 2.0 + 1.0);
                    let exit_frame = ((w - x0) / speed).ceil() as u32;
                    objects.push(ObjectSpec {
                        class_id: 1,
                        shape,
                        size,
                        start_frame: 0,
                        start: Point2::new(x0, y),
                        velocity: Point2::new(speed, 0.0),
                        acceleration: Point2::new(0.0, 0.0),
                        hidden: Vec::new(),
                    });
                    if objects.len() < n_objects {
                        let delay = rng.gen_range(2..=8u32);
                        objects.push(ObjectSpec {
                            class_id: 1,
                            shape,
                            size,
                            start_frame: (exit_frame + delay).min(n_frames - 1),
                            start: Point2::new(w - 1.0, y),
                            velocity: Point2::new(-speed, 0.0),
                            acceleration: Point2::new(0.0, 0.0),
                            hidden: Vec::new(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            kind,
            n_frames,
            width,
            height,
            seed,
            walk_sigma: if kind == ScenarioKind::RandomWalk { 0.3 } else { 0.0 },
            objects,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames < 2 {
            return Err(Error::invalid("a scenario needs at least 2 frames"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if !(self.walk_sigma >= 0.0) {
            return Err(Error::invalid("walk_sigma must be non-negative"));
        }
        for (k, o) in self.objects.iter().enumerate() {
            if !(o.size.0 > 0.0 && o.size.1 > 0.0) {
                return Err(Error::invalid(format!("object {k} has non-positive size")));
            }
            if !inside(o.start, self.width, self.height) {
                return Err(Error::invalid(format!(
                    "object {k} starts at ({}, {}), outside the {}x{} image",
                    o.start.x, o.start.y, self.width, self.height
                )));
            }
            if o.start_frame >= self.n_frames {
                return Err(Error::invalid(format!("object {k} starts after the last frame")));
            }
        }
        Ok(())
    }
}

fn inside(p: Point2<f64>, width: usize, height: usize) -> bool {
    p.x >= 0.0 && p.y >= 0.0 && p.x < width as f64 && p.y < height as f64
}

/// Renders the shape centered at `c` and approximates it with a polygon in
/// image coordinates. `None` when no pixel of the shape lies in the image.
fn shape_polygon(
    shape: ShapeKind,
    size: (f64, f64),
    c: Point2<f64>,
    width: usize,
    height: usize,
) -> Result<Option<Polygon<f64>>> {
    let (hw, hh) = (size.0 / 2.0, size.1 / 2.0);
    let x0 = ((c.x - hw).floor().max(0.0)) as usize;
    let y0 = ((c.y - hh).floor().max(0.0)) as usize;
    let x1 = ((c.x + hw).ceil().max(0.0) as usize).min(width);
    let y1 = ((c.y + hh).ceil().max(0.0) as usize).min(height);
    if x0 >= x1 || y0 >= y1 {
        return Ok(None);
    }
    let local = BitMask::from_fn(x1 - x0, y1 - y0, |i, j| {
        let px = (x0 + i) as f64 + 0.5 - c.x;
        let py = (y0 + j) as f64 + 0.5 - c.y;
        match shape {
            ShapeKind::Rectangle => px.abs() <= hw && py.abs() <= hh,
            ShapeKind::Ellipse => (px / hw).powi(2) + (py / hh).powi(2) <= 1.0,
        }
    });
    if local.is_empty() {
        return Ok(None);
    }
    let poly: Polygon<f64> = local.polygonize(DEFAULT_VERTICES)?;
    Ok(Some(poly.translate(Point2::new(x0 as f64, y0 as f64))))
}

/// Ground truth for a scenario. Object `k` gets id `k + 1`; an object is
/// present in a frame when it has started, is not hidden, its analytic
/// center lies inside the image and at least one of its pixels does.
pub fn generate(sc: &Scenario) -> Result<GroundTruth> {
    sc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let kick = Normal::new(0.0, sc.walk_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let n = sc.n_frames as usize;
    let mut frames: Vec<Vec<GtObject>> = vec![Vec::new(); n];

    for (k, obj) in sc.objects.iter().enumerate() {
        let mut pos = obj.start;
        let mut vel = obj.velocity;
        for t in obj.start_frame as usize..n {
            if t > obj.start_frame as usize {
                pos = pos.add(vel).add(obj.acceleration.scale(0.5));
                vel = vel.add(obj.acceleration);
                if sc.walk_sigma > 0.0 {
                    vel = vel.add(Point2::new(kick.sample(&mut rng), kick.sample(&mut rng)));
                }
            }
            let hidden = obj.hidden.iter().any(|&(a, b)| (a as usize..b as usize).contains(&t));
            if hidden || !inside(pos, sc.width, sc.height) {
                continue;
            }
            let Some(polygon) = shape_polygon(obj.shape, obj.size, pos, sc.width, sc.height)? else {
                continue;
            };
            let center = polygon.centroid();
            frames[t].push(GtObject {
                id: k as u64 + 1,
                class_id: obj.class_id,
                center,
                polygon,
                depth: (sc.height as f64 - center.y) / sc.height as f64 + 1e-6 * k as f64,
            });
        }
    }
    Ok(GroundTruth {
        width: sc.width,
        height: sc.height,
        frames,
    })
}

fn ellipse_polygon(c: Point2<f64>, rx: f64, ry: f64, n: usize) -> Polygon<f64> {
    let vertices = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            Point2::new(c.x + rx * t.cos(), c.y + ry * t.sin())
        })
        .collect();
    Polygon::new(vertices).expect("finite ellipse")
}

/// Detector emulation over a ground-truth sequence.
pub fn perturb(gt: &GroundTruth, noise: &NoiseParams, seed: u64) -> Result<Vec<Vec<Detection<f64>>>> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut classes: Vec<u32> = gt.frames.iter().flatten().map(|o| o.class_id).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        classes.push(1);
    }

    let mut out = Vec::with_capacity(gt.frames.len());
    for (t, objs) in gt.frames.iter().enumerate() {
        let mut dets = Vec::new();
        for o in objs {
            if rng.gen_bool(noise.drop_prob) {
                continue;
            }
            let jitter = Point2::new(
                noise.center_jitter_sigma * std_normal.sample(&mut rng),
                noise.center_jitter_sigma * std_normal.sample(&mut rng),
            );
            let lookback = rng.gen_range(1..=noise.prev_frame_lookback) as usize;
            let offset_noise = Point2::new(
                noise.offset_noise_sigma * std_normal.sample(&mut rng),
                noise.offset_noise_sigma * std_normal.sample(&mut rng),
            );
            let score = rng.gen_range(0.7..=1.0);
            let offset = match t.checked_sub(lookback).and_then(|p| gt.find(p, o.id)) {
                Some(prev) => offset_target(o.center, prev.center).add(offset_noise),
                None => Point2::new(0.0, 0.0),
            };
            dets.push(Detection {
                frame: t as u64,
                class_id: o.class_id,
                score,
                center: o.center.add(jitter),
                polygon: o.polygon.translate(jitter),
                depth: o.depth,
                offset,
            });
        }
        if rng.gen_bool(noise.fp_prob) {
            let c = Point2::new(
                rng.gen_range(0.0..gt.width as f64),
                rng.gen_range(0.0..gt.height as f64),
            );
            let rx = rng.gen_range(3.0..8.0);
            let ry = rng.gen_range(3.0..8.0);
            let class_id = classes[rng.gen_range(0..classes.len())];
            let score = rng.gen_range(0.3..0.6);
            let depth = rng.gen_range(0.0..1.0);
            let polygon = ellipse_polygon(c, rx, ry, DEFAULT_VERTICES);
            dets.push(Detection {
                frame: t as u64,
                class_id,
                score,
                center: polygon.centroid(),
                polygon,
                depth,
                offset: Point2::new(0.0, 0.0),
            });
        }
        out.push(dets);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_linear(v: Point2<f64>, n: u32) -> Scenario {
        Scenario {
            kind: ScenarioKind::Linear,
            n_frames: n,
            width: 200,
            height: 100,
            seed: 1,
            walk_sigma: 0.0,
            objects: vec![ObjectSpec {
                class_id: 1,
                shape: ShapeKind::Rectangle,
                size: (20.0, 12.0),
                start_frame: 0,
                start: Point2::new(30.0, 50.0),
                velocity: v,
                acceleration: Point2::new(0.0, 0.0),
                hidden: vec![],
            }],
        }
    }

    #[test]
    fn linear_centers_step_by_velocity() {
        let gt = generate(&single_linear(Point2::new(2.0, 0.0), 10)).unwrap();
        let xs: Vec<f64> = gt.frames.iter().map(|f| f[0].center.x).collect();
        assert_eq!(xs.len(), 10);
        for pair in xs.windows(2) {
            assert!((pair[1] - pair[0] - 2.0).abs() < 1e-9, "{pair:?}");
        }
        for f in &gt.frames {
            assert_eq!(f[0].polygon.len(), 32);
        }
    }

    #[test]
    fn crossing_meets_once() {
        let sc = Scenario::preset(ScenarioKind::Crossing, 2, 30, 320, 120, 9).unwrap();
        let gt = generate(&sc).unwrap();
        let close: Vec<usize> = (0..30)
            .filter(|&t| match (gt.find(t, 1), gt.find(t, 2)) {
                (Some(a), Some(b)) => a.center.distance(b.center) <= 1.0,
                _ => false,
            })
            .collect();
        assert_eq!(close, vec![15]);
    }

    #[test]
    fn same_seed_same_output() {
        for kind in ScenarioKind::ALL {
            let sc = Scenario::preset(kind, 3, 25, 320, 240, 77).unwrap();
            let a = generate(&sc).unwrap();
            let b = generate(&sc).unwrap();
            assert_eq!(a, b);
            let da = perturb(&a, &NoiseParams::default(), 5).unwrap();
            let db = perturb(&b, &NoiseParams::default(), 5).unwrap();
            assert_eq!(da, db);
        }
    }

    #[test]
    fn object_outside_rejected() {
        let mut sc = single_linear(Point2::new(1.0, 0.0), 5);
        sc.objects[0].start = Point2::new(-3.0, 10.0);
        assert!(matches!(generate(&sc), Err(Error::InvalidInput(_))));
        let mut sc = single_linear(Point2::new(1.0, 0.0), 1);
        sc.n_frames = 1;
        assert!(generate(&sc).is_err());
    }

    #[test]
    fn identity_noise_reproduces_ground_truth() {
        let gt = generate(&single_linear(Point2::new(3.0, 1.0), 8)).unwrap();
        let dets = perturb(&gt, &NoiseParams::identity(), 3).unwrap();
        for (t, (frame, objs)) in dets.iter().zip(&gt.frames).enumerate() {
            assert_eq!(frame.len(), objs.len());
            for (d, o) in frame.iter().zip(objs) {
                assert_eq!(d.center, o.center);
                assert_eq!(d.polygon, o.polygon);
                let expected = if t == 0 {
                    Point2::new(0.0, 0.0)
                } else {
                    offset_target(o.center, gt.frames[t - 1][0].center)
                };
                assert_eq!(d.offset, expected);
                assert!(d.score >= 0.7);
            }
        }
    }

    #[test]
    fn drop_all_leaves_only_false_positives() {
        let sc = Scenario::preset(ScenarioKind::Linear, 3, 50, 320, 240, 4).unwrap();
        let gt = generate(&sc).unwrap();
        let noise = NoiseParams {
            drop_prob: 1.0,
            ..NoiseParams::default()
        };
        let dets = perturb(&gt, &noise, 8).unwrap();
        assert!(dets.iter().all(|f| f.len() <= 1));
        assert!(dets.iter().flatten().all(|d| d.score < 0.6));
        assert!(dets.iter().any(|f| !f.is_empty()));
    }

    #[test]
    fn lookback_offsets_reach_back() {
        let gt = generate(&single_linear(Point2::new(2.0, 0.0), 12)).unwrap();
        let noise = NoiseParams {
            prev_frame_lookback: 3,
            ..NoiseParams::identity()
        };
        let dets = perturb(&gt, &noise, 11).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for f in dets.iter().skip(3) {
            let back = (-f[0].offset.x / 2.0).round() as i64;
            seen.insert(back);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn invalid_noise() {
        let gt = generate(&single_linear(Point2::new(2.0, 0.0), 3)).unwrap();
        assert!(perturb(
            &gt,
            &NoiseParams {
                drop_prob: 1.5,
                ..NoiseParams::default()
            },
            0
        )
        .is_err());
        assert!(perturb(
            &gt,
            &NoiseParams {
                prev_frame_lookback: 4,
                ..NoiseParams::default()
            },
            0
        )
        .is_err());
    }

    #[test]
    fn detections_are_consistent() {
        for kind in ScenarioKind::ALL {
            let sc = Scenario::preset(kind, 4, 40, 320, 240, 21).unwrap();
            let gt = generate(&sc).unwrap();
            for d in perturb(&gt, &NoiseParams::default(), 2).unwrap().iter().flatten() {
                d.validate().unwrap();
            }
        }
    }

    #[test]
    fn boundary_second_object_enters_after_first_leaves() {
        let sc = Scenario::preset(ScenarioKind::BoundaryExitEnter, 2, 60, 320, 120, 3).unwrap();
        let gt = generate(&sc).unwrap();
        let last_a = (0..60).filter(|&t| gt.find(t, 1).is_some()).max().unwrap();
        let first_b = (0..60).find(|&t| gt.find(t, 2).is_some()).unwrap();
        assert!(first_b > last_a + 1);
    }
}
