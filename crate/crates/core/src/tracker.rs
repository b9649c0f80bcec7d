//! Track lifecycle and greedy offset-based association.
//!
//! Every detection carries a tracking offset pointing from its current center
//! to where the object was in the previous frame. Adding the offset to the
//! center gives a predicted previous position, which is compared against the
//! reference center each live track had in that frame.
//!
//! Lifecycle per frame:
//! * matched tracks become `Active` and take the detection's center, polygon
//!   and depth; their filter absorbs the new center;
//! * unmatched detections start new tracks;
//! * unmatched tracks become `Frozen`, their age grows by one and (with the
//!   filter enabled) their reference center follows the filter prediction.
//!   Past `max_age` frozen frames the track is terminated for good.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon};
use crate::scalar::Scalar;
use crate::ukf::{self, FilterState, UkfParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub frame: u64,
    pub class_id: u32,
    pub score: T,
    pub center: Point2<T>,
    pub polygon: Polygon<T>,
    pub depth: T,
    /// Displacement from the current center to the previous-frame center.
    pub offset: Point2<T>,
}

impl<T: Scalar> Detection<T> {
    /// Where the detector thinks this object was one frame earlier.
    pub fn previous_position(&self) -> Point2<T> {
        self.center.add(self.offset)
    }

    /// Checks score range, finiteness and that the center agrees with the
    /// polygon centroid to within `max(2 px, 5% of the bbox diagonal)`.
    pub fn validate(&self) -> Result<()> {
        if !(self.score >= T::zero() && self.score <= T::one()) {
            return Err(Error::invalid(format!("detection score {} outside [0, 1]", self.score)));
        }
        if !self.center.is_finite() || !self.offset.is_finite() || !self.depth.is_finite() {
            return Err(Error::invalid("detection has non-finite fields"));
        }
        let tolerance = T::lit(2.0).max(T::lit(0.05) * self.polygon.bbox().diagonal());
        let gap = self.polygon.centroid().distance(self.center);
        if gap > tolerance {
            return Err(Error::invalid(format!(
                "detection center is {gap} px from its polygon centroid (tolerance {tolerance})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Active,
    /// Unmatched for `age` consecutive frames, `1 <= age <= max_age`.
    Frozen {
        age: u32,
    },
    Terminated,
}

/// What a track recorded for one frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation<T> {
    Detected(Detection<T>),
    /// Reference center carried while frozen.
    Predicted(Point2<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track<T> {
    pub id: u64,
    pub class_id: u32,
    pub state: TrackState,
    pub ref_center: Point2<T>,
    pub polygon: Polygon<T>,
    pub depth: T,
    /// Kinematic filter. Left at its birth state when the filter is disabled.
    pub filter: FilterState<T>,
    pub history: Vec<(u64, Observation<T>)>,
}

impl<T: Scalar> Track<T> {
    pub fn is_live(&self) -> bool {
        !matches!(self.state, TrackState::Terminated)
    }

    /// Frames in which the track was matched, with the matched detection.
    pub fn detections(&self) -> impl Iterator<Item = (u64, &Detection<T>)> {
        self.history.iter().filter_map(|(f, o)| match o {
            Observation::Detected(d) => Some((*f, d)),
            Observation::Predicted(_) => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig<T> {
    /// Frozen frames tolerated before a track is terminated.
    pub max_age: u32,
    /// Match gate scale: a pair is accepted iff its distance is at most
    /// `match_kappa * sqrt(area(detection polygon))`.
    pub match_kappa: T,
    pub use_ukf: bool,
    /// Detections scoring below this are ignored.
    pub score_min: T,
    pub ukf: UkfParams<T>,
}

impl<T: Scalar> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            max_age: 32,
            match_kappa: T::one(),
            use_ukf: true,
            score_min: T::lit(0.3),
            ukf: UkfParams::default(),
        }
    }
}

impl<T: Scalar> TrackerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_age < 1 {
            return Err(Error::invalid("max_age must be at least 1"));
        }
        if !(self.match_kappa > T::zero()) {
            return Err(Error::invalid("match_kappa must be positive"));
        }
        if !(self.score_min >= T::zero() && self.score_min <= T::one()) {
            return Err(Error::invalid("score_min must lie in [0, 1]"));
        }
        self.ukf.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    /// `(detection index, track id)` pairs.
    pub matches: Vec<(usize, u64)>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_tracks: Vec<u64>,
}

/// Greedy same-class association.
///
/// Detections are visited by descending score (ties: lower index first);
/// each takes the nearest still-free track of its class (ties: lower id) if
/// that track lies within the size-relative gate. Terminated tracks are
/// ignored.
pub fn associate<T: Scalar>(dets: &[Detection<T>], tracks: &[Track<T>], match_kappa: T) -> Association {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut taken: Vec<bool> = tracks.iter().map(|t| !t.is_live()).collect();
    let mut det_matched = vec![false; dets.len()];
    let mut out = Association::default();
    for di in order {
        let det = &dets[di];
        let probe = det.previous_position();
        let gate = match_kappa * det.polygon.area().sqrt();
        let mut best: Option<(usize, T)> = None;
        for (ti, track) in tracks.iter().enumerate() {
            if taken[ti] || track.class_id != det.class_id {
                continue;
            }
            let cost = probe.distance(track.ref_center);
            let better = match best {
                None => true,
                Some((bi, bc)) => cost < bc || (cost == bc && track.id < tracks[bi].id),
            };
            if better {
                best = Some((ti, cost));
            }
        }
        if let Some((ti, cost)) = best {
            if cost <= gate {
                taken[ti] = true;
                det_matched[di] = true;
                out.matches.push((di, tracks[ti].id));
            }
        }
    }
    out.unmatched_detections = (0..dets.len()).filter(|&i| !det_matched[i]).collect();
    out.unmatched_tracks = tracks
        .iter()
        .zip(&taken)
        .filter(|(t, &used)| t.is_live() && !used)
        .map(|(t, _)| t.id)
        .collect();
    out
}

/// Tracker state for one sequence. Frames must be submitted in strictly
/// increasing order.
#[derive(Debug, Clone)]
pub struct Tracker<T> {
    config: TrackerConfig<T>,
    live: Vec<Track<T>>,
    finished: Vec<Track<T>>,
    next_id: u64,
    last_frame: Option<u64>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(config: TrackerConfig<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            live: Vec::new(),
            finished: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig<T> {
        &self.config
    }

    /// Active and frozen tracks.
    pub fn live_tracks(&self) -> &[Track<T>] {
        &self.live
    }

    pub fn terminated_tracks(&self) -> &[Track<T>] {
        &self.finished
    }

    /// Processes one frame. Returns, per input detection, the track id it was
    /// assigned, or `None` when the detection fell below `score_min`.
    pub fn step(&mut self, frame: u64, dets: &[Detection<T>]) -> Result<Vec<Option<u64>>> {
        if let Some(last) = self.last_frame {
            if frame <= last {
                return Err(Error::invalid(format!("frame {frame} submitted after frame {last}")));
            }
        }
        for (i, d) in dets.iter().enumerate() {
            if d.frame != frame {
                return Err(Error::invalid(format!(
                    "detection {i} belongs to frame {}, not {frame}",
                    d.frame
                )));
            }
            d.validate()
                .map_err(|e| Error::invalid(format!("detection {i}: {e}")))?;
        }

        let kept: Vec<usize> = (0..dets.len())
            .filter(|&i| dets[i].score >= self.config.score_min)
            .collect();
        let candidates: Vec<Detection<T>> = kept.iter().map(|&i| dets[i].clone()).collect();
        let assoc = associate(&candidates, &self.live, self.config.match_kappa);

        let mut assigned: Vec<Option<u64>> = vec![None; dets.len()];
        let mut match_of: Vec<Option<usize>> = vec![None; self.live.len()];
        for &(ci, id) in &assoc.matches {
            let ti = self
                .live
                .iter()
                .position(|t| t.id == id)
                .expect("associated track is live");
            match_of[ti] = Some(ci);
            assigned[kept[ci]] = Some(id);
        }

        let cfg = self.config;
        for (track, matched) in self.live.iter_mut().zip(&match_of) {
            let predicted = if cfg.use_ukf {
                Some(ukf::predict(&track.filter, &cfg.ukf, T::one())?)
            } else {
                None
            };
            match matched {
                Some(ci) => {
                    let det = &candidates[*ci];
                    if let Some(p) = predicted {
                        track.filter = ukf::update(&p, det.center, &cfg.ukf)?;
                    }
                    track.state = TrackState::Active;
                    track.ref_center = det.center;
                    track.polygon = det.polygon.clone();
                    track.depth = det.depth;
                    track.history.push((frame, Observation::Detected(det.clone())));
                }
                None => {
                    let age = match track.state {
                        TrackState::Frozen { age } => age + 1,
                        _ => 1,
                    };
                    if let Some(p) = predicted {
                        track.filter = p;
                        track.ref_center = p.position();
                    }
                    track.state = if age > cfg.max_age {
                        TrackState::Terminated
                    } else {
                        TrackState::Frozen { age }
                    };
                    track.history.push((frame, Observation::Predicted(track.ref_center)));
                }
            }
        }

        let (live, done): (Vec<_>, Vec<_>) = std::mem::take(&mut self.live).into_iter().partition(|t| t.is_live());
        self.live = live;
        self.finished.extend(done);

        for &ci in &assoc.unmatched_detections {
            let det = &candidates[ci];
            let id = self.next_id;
            self.next_id += 1;
            self.live.push(Track {
                id,
                class_id: det.class_id,
                state: TrackState::Active,
                ref_center: det.center,
                polygon: det.polygon.clone(),
                depth: det.depth,
                filter: ukf::birth(det.center, &cfg.ukf),
                history: vec![(frame, Observation::Detected(det.clone()))],
            });
            assigned[kept[ci]] = Some(id);
        }
        self.last_frame = Some(frame);
        Ok(assigned)
    }

    /// Every track ever created, ordered by id.
    pub fn into_tracks(self) -> Vec<Track<T>> {
        let mut all = self.finished;
        all.extend(self.live);
        all.sort_by_key(|t| t.id);
        all
    }
}

/// Runs a whole sequence; `frames[k]` holds the detections of frame `k`.
pub fn run_sequence<T: Scalar>(frames: &[Vec<Detection<T>>], config: &TrackerConfig<T>) -> Result<Vec<Track<T>>> {
    let mut tracker = Tracker::new(*config)?;
    for (k, dets) in frames.iter().enumerate() {
        tracker.step(k as u64, dets)?;
    }
    Ok(tracker.into_tracks())
}
