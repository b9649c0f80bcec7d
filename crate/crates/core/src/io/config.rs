//! TOML configuration for the tracker pipeline and for scenarios.
//!
//! Pipeline file sections, all optional: `[tracker]` (`max_age`,
//! `match_kappa`, `use_ukf`, `score_min`), `[ukf]` (`alpha`, `beta`, `kappa`,
//! `q_accel`, `r_pos`, `p_vel0`, `p_acc0`) and `[noise]` (`drop_prob`,
//! `fp_prob`, `center_jitter_sigma`, `offset_noise_sigma`,
//! `prev_frame_lookback`). Scenario files take `kind`, `n_frames`, `width`,
//! `height`, `seed`, `n_objects`, optionally `walk_sigma`, an `[[objects]]`
//! list replacing the preset layout, and a `[noise]` section.

use std::path::Path;

use serde::Deserialize;

use super::read_to_string;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::simulator::{NoiseParams, ObjectSpec, Scenario, ScenarioKind, ShapeKind};
use crate::tracker::TrackerConfig;
use crate::ukf::UkfParams;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub tracker: TrackerConfig<f64>,
    pub noise: NoiseParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    #[serde(default)]
    tracker: RawTracker,
    #[serde(default)]
    ukf: RawUkf,
    #[serde(default)]
    noise: RawNoise,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTracker {
    max_age: Option<u32>,
    match_kappa: Option<f64>,
    use_ukf: Option<bool>,
    score_min: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawUkf {
    alpha: Option<f64>,
    beta: Option<f64>,
    kappa: Option<f64>,
    q_accel: Option<f64>,
    r_pos: Option<f64>,
    p_vel0: Option<f64>,
    p_acc0: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    drop_prob: Option<f64>,
    fp_prob: Option<f64>,
    center_jitter_sigma: Option<f64>,
    offset_noise_sigma: Option<f64>,
    prev_frame_lookback: Option<u32>,
}

impl RawNoise {
    fn resolve(self) -> Result<NoiseParams> {
        let d = NoiseParams::default();
        let n = NoiseParams {
            drop_prob: self.drop_prob.unwrap_or(d.drop_prob),
            fp_prob: self.fp_prob.unwrap_or(d.fp_prob),
            center_jitter_sigma: self.center_jitter_sigma.unwrap_or(d.center_jitter_sigma),
            offset_noise_sigma: self.offset_noise_sigma.unwrap_or(d.offset_noise_sigma),
            prev_frame_lookback: self.prev_frame_lookback.unwrap_or(d.prev_frame_lookback),
        };
        n.validate()?;
        Ok(n)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    n_frames: u32,
    width: usize,
    height: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one")]
    n_objects: usize,
    walk_sigma: Option<f64>,
    objects: Option<Vec<RawObject>>,
    #[serde(default)]
    noise: RawNoise,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    #[serde(default = "one_u32")]
    class_id: u32,
    #[serde(default = "rect")]
    shape: String,
    size: [f64; 2],
    start: [f64; 2],
    #[serde(default)]
    velocity: [f64; 2],
    #[serde(default)]
    acceleration: [f64; 2],
    #[serde(default)]
    start_frame: u32,
    #[serde(default)]
    hidden: Vec<[u32; 2]>,
}

fn one_u32() -> u32 {
    1
}

fn rect() -> String {
    "rectangle".to_string()
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::parse(line, e.message().to_string())
}

pub fn parse_pipeline_config(text: &str) -> Result<PipelineConfig> {
    let raw: RawPipeline = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let dt = TrackerConfig::<f64>::default();
    let du = UkfParams::<f64>::default();
    let tracker = TrackerConfig {
        max_age: raw.tracker.max_age.unwrap_or(dt.max_age),
        match_kappa: raw.tracker.match_kappa.unwrap_or(dt.match_kappa),
        use_ukf: raw.tracker.use_ukf.unwrap_or(dt.use_ukf),
        score_min: raw.tracker.score_min.unwrap_or(dt.score_min),
        ukf: UkfParams {
            alpha: raw.ukf.alpha.unwrap_or(du.alpha),
            beta: raw.ukf.beta.unwrap_or(du.beta),
            kappa: raw.ukf.kappa.unwrap_or(du.kappa),
            q_accel: raw.ukf.q_accel.unwrap_or(du.q_accel),
            r_pos: raw.ukf.r_pos.unwrap_or(du.r_pos),
            p_vel0: raw.ukf.p_vel0.unwrap_or(du.p_vel0),
            p_acc0: raw.ukf.p_acc0.unwrap_or(du.p_acc0),
        },
    };
    tracker.validate()?;
    Ok(PipelineConfig {
        tracker,
        noise: raw.noise.resolve()?,
    })
}

pub fn load_pipeline_config(path: &Path) -> Result<PipelineConfig> {
    parse_pipeline_config(&read_to_string(path)?)
}

/// Parses a scenario file into the scenario and its noise settings
/// (defaults when the file has no `[noise]` section). `seed`, when given,
/// replaces the file's seed.
pub fn parse_scenario(text: &str, seed: Option<u64>) -> Result<(Scenario, NoiseParams)> {
    let mut raw: RawScenario = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    if let Some(seed) = seed {
        raw.seed = seed;
    }
    let kind = ScenarioKind::parse(&raw.kind)?;
    let mut sc = match raw.objects {
        Some(objs) => Scenario {
            kind,
            n_frames: raw.n_frames,
            width: raw.width,
            height: raw.height,
            seed: raw.seed,
            walk_sigma: 0.0,
            objects: objs.into_iter().map(RawObject::resolve).collect::<Result<_>>()?,
        },
        None => Scenario::preset(kind, raw.n_objects, raw.n_frames, raw.width, raw.height, raw.seed)?,
    };
    if let Some(s) = raw.walk_sigma {
        sc.walk_sigma = s;
    }
    sc.validate()?;
    Ok((sc, raw.noise.resolve()?))
}

impl RawObject {
    fn resolve(self) -> Result<ObjectSpec> {
        let shape = match self.shape.as_str() {
            "rectangle" => ShapeKind::Rectangle,
            "ellipse" => ShapeKind::Ellipse,
            other => return Err(Error::invalid(format!("unknown shape '{other}'"))),
        };
        let pt = |a: [f64; 2]| Point2::new(a[0], a[1]);
        Ok(ObjectSpec {
            class_id: self.class_id,
            shape,
            size: (self.size[0], self.size[1]),
            start_frame: self.start_frame,
            start: pt(self.start),
            velocity: pt(self.velocity),
            acceleration: pt(self.acceleration),
            hidden: self.hidden.into_iter().map(|h| (h[0], h[1])).collect(),
        })
    }
}

pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<(Scenario, NoiseParams)> {
    parse_scenario(&read_to_string(path)?, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_pipeline_config("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn overrides() {
        let cfg = parse_pipeline_config(
            "[tracker]\nuse_ukf = false\nmax_age = 5\n[ukf]\nalpha = 1.0\n[noise]\ndrop_prob = 0.0\n",
        )
        .unwrap();
        assert!(!cfg.tracker.use_ukf);
        assert_eq!(cfg.tracker.max_age, 5);
        assert_eq!(cfg.tracker.ukf.alpha, 1.0);
        assert_eq!(cfg.noise.drop_prob, 0.0);
        assert_eq!(cfg.noise.fp_prob, 0.1);
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_pipeline_config("[tracker]\nmax_age = 3\nbogus = 1\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_pipeline_config("[noise]\ndrop_prob = 1.5\n").is_err());
        assert!(parse_pipeline_config("[ukf]\nalpha = 0.0\n").is_err());
        assert!(parse_pipeline_config("[tracker]\nmax_age = 0\n").is_err());
    }

    #[test]
    fn preset_scenario() {
        let (sc, noise) = parse_scenario(
            "kind = \"occlusion\"\nn_frames = 40\nwidth = 320\nheight = 240\nseed = 7\nn_objects = 3\n",
            None,
        )
        .unwrap();
        assert_eq!(
            sc,
            Scenario::preset(ScenarioKind::Occlusion, 3, 40, 320, 240, 7).unwrap()
        );
        assert_eq!(noise, NoiseParams::default());
    }

    #[test]
    fn explicit_objects() {
        let text = r#"
kind = "linear"
n_frames = 10
width = 100
height = 80
[[objects]]
shape = "ellipse"
size = [10.0, 8.0]
start = [20.0, 40.0]
velocity = [2.0, 0.0]
hidden = [[3, 5]]
[noise]
fp_prob = 0.0
"#;
        let (sc, noise) = parse_scenario(text, None).unwrap();
        assert_eq!(parse_scenario(text, Some(9)).unwrap().0.seed, 9);
        assert_eq!(sc.objects.len(), 1);
        assert_eq!(sc.objects[0].shape, ShapeKind::Ellipse);
        assert_eq!(sc.objects[0].hidden, vec![(3, 5)]);
        assert_eq!(noise.fp_prob, 0.0);
        assert!(parse_scenario("kind = \"spiral\"\nn_frames = 10\nwidth = 10\nheight = 10\n", None).is_err());
    }
}
