//! Center-point heatmaps built from elliptical Gaussians.
//!
//! Heatmap cell `(i, j)` has its center at `(i + 0.5, j + 0.5)` in heatmap
//! coordinates; image pixel coordinates map to heatmap coordinates by
//! dividing by the downsample factor.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon};
use crate::losses::DenseMap;
use crate::scalar::Scalar;
use crate::tracker::Track;

pub const DEFAULT_DOWNSAMPLE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap<T> {
    map: DenseMap<T>,
    downsample: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec<T> {
    /// Peak location in heatmap coordinates.
    pub center: Point2<T>,
    pub sigma_x: T,
    pub sigma_y: T,
}

impl<T: Scalar> Heatmap<T> {
    /// Zeroed heatmap for an `image_width x image_height` input.
    pub fn new(channels: usize, image_width: usize, image_height: usize, downsample: usize) -> Result<Self> {
        if downsample == 0 {
            return Err(Error::invalid("downsample factor must be at least 1"));
        }
        Ok(Self {
            map: DenseMap::zeros(
                channels,
                image_width.div_ceil(downsample),
                image_height.div_ceil(downsample),
            ),
            downsample,
        })
    }

    pub fn channels(&self) -> usize {
        self.map.channels()
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }

    pub fn downsample(&self) -> usize {
        self.downsample
    }

    pub fn get(&self, channel: usize, x: usize, y: usize) -> T {
        self.map.get(channel, x, y)
    }

    pub fn as_dense(&self) -> &DenseMap<T> {
        &self.map
    }

    pub fn into_dense(self) -> DenseMap<T> {
        self.map
    }

    /// Max-composites one Gaussian into `channel`.
    pub fn splat(&mut self, channel: usize, g: &GaussianSpec<T>) -> Result<()> {
        if channel >= self.channels() {
            return Err(Error::invalid(format!(
                "channel {channel} out of range ({} channels)",
                self.channels()
            )));
        }
        if !(g.sigma_x > T::zero() && g.sigma_y > T::zero()) {
            return Err(Error::invalid("gaussian sigmas must be positive"));
        }
        let (w, h) = (self.width(), self.height());
        let inside = g.center.x >= T::zero()
            && g.center.y >= T::zero()
            && g.center.x < T::from_usize_lossy(w)
            && g.center.y < T::from_usize_lossy(h);
        if !inside {
            return Err(Error::invalid(format!(
                "gaussian center ({}, {}) outside the {w}x{h} heatmap",
                g.center.x, g.center.y
            )));
        }
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let kx = two * g.sigma_x * g.sigma_x;
        let ky = two * g.sigma_y * g.sigma_y;
        for y in 0..h {
            let dy = T::from_usize_lossy(y) + half - g.center.y;
            let ey = dy * dy / ky;
            for x in 0..w {
                let dx = T::from_usize_lossy(x) + half - g.center.x;
                let v = (-(dx * dx / kx + ey)).exp();
                let cur = self.map.get(channel, x, y);
                if v > cur {
                    self.map.set(channel, x, y, v);
                }
            }
        }
        Ok(())
    }
}

/// Gaussian spread for an object box: `dim / (6R)` per axis, floored at half
/// a cell.
pub fn object_sigmas<T: Scalar>(box_w: T, box_h: T, downsample: usize) -> Result<(T, T)> {
    if !(box_w > T::zero() && box_h > T::zero()) {
        return Err(Error::invalid(format!(
            "object dimensions must be positive, got {box_w}x{box_h}"
        )));
    }
    if downsample == 0 {
        return Err(Error::invalid("downsample factor must be at least 1"));
    }
    let denom = T::lit(6.0) * T::from_usize_lossy(downsample);
    let floor = T::lit(0.5);
    Ok(((box_w / denom).max(floor), (box_h / denom).max(floor)))
}

/// Gaussian for an object given its center and polygon in image pixels.
pub fn object_gaussian<T: Scalar>(
    center: Point2<T>,
    polygon: &Polygon<T>,
    downsample: usize,
) -> Result<GaussianSpec<T>> {
    let bb = polygon.bbox();
    // Degenerate polygons still get the floor sigma.
    let tiny = T::lit(1e-6);
    let (sigma_x, sigma_y) = object_sigmas(bb.width().max(tiny), bb.height().max(tiny), downsample)?;
    let r = T::from_usize_lossy(downsample);
    Ok(GaussianSpec {
        center: Point2::new(center.x / r, center.y / r),
        sigma_x,
        sigma_y,
    })
}

/// Single-channel prior heatmap of the live (active or frozen) tracks.
///
/// Frozen tracks whose predicted center has left the image contribute
/// nothing.
pub fn render_prior<'a, T: Scalar>(
    tracks: impl IntoIterator<Item = &'a Track<T>>,
    image_width: usize,
    image_height: usize,
    downsample: usize,
) -> Result<Heatmap<T>> {
    let mut hm = Heatmap::new(1, image_width, image_height, downsample)?;
    let (w, h) = (T::from_usize_lossy(image_width), T::from_usize_lossy(image_height));
    for track in tracks.into_iter().filter(|t| t.is_live()) {
        let c = track.ref_center;
        if !(c.x >= T::zero() && c.y >= T::zero() && c.x < w && c.y < h) {
            continue;
        }
        let g = object_gaussian(c, &track.polygon, downsample)?;
        hm.splat(0, &g)?;
    }
    Ok(hm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::{Track, TrackState};
    use crate::ukf::{birth, UkfParams};

    fn rect(cx: f64, cy: f64, w: f64, h: f64) -> Polygon<f64> {
        Polygon::from_flat(&[
            cx - w / 2.0,
            cy - h / 2.0,
            cx + w / 2.0,
            cy - h / 2.0,
            cx + w / 2.0,
            cy + h / 2.0,
            cx - w / 2.0,
            cy + h / 2.0,
        ])
        .unwrap()
    }

    fn track(id: u64, cx: f64, cy: f64, state: TrackState) -> Track<f64> {
        let center = Point2::new(cx, cy);
        Track {
            id,
            class_id: 1,
            state,
            ref_center: center,
            polygon: rect(cx, cy, 24.0, 48.0),
            depth: 0.0,
            filter: birth(center, &UkfParams::default()),
            history: Vec::new(),
        }
    }

    #[test]
    fn sigma_rule() {
        assert_eq!(object_sigmas(48.0, 24.0, 4).unwrap(), (2.0, 1.0));
        assert_eq!(object_sigmas(1.0, 1.0, 4).unwrap(), (0.5, 0.5));
        let (a, b) = object_sigmas(240.0, 120.0, 4).unwrap();
        let (c, d) = object_sigmas(120.0, 60.0, 4).unwrap();
        assert_eq!((a, b), (2.0 * c, 2.0 * d));
        assert!(object_sigmas(0.0, 3.0, 4).is_err());
        assert!(object_sigmas(3.0, -1.0, 4).is_err());
    }

    #[test]
    fn dimensions_round_up() {
        let hm = Heatmap::<f64>::new(3, 37, 16, 4).unwrap();
        assert_eq!((hm.channels(), hm.width(), hm.height()), (3, 10, 4));
    }

    #[test]
    fn splat_values() {
        let mut hm = Heatmap::<f64>::new(1, 64, 64, 4).unwrap();
        let g = GaussianSpec {
            center: Point2::new(5.5, 7.5),
            sigma_x: 2.0,
            sigma_y: 1.0,
        };
        hm.splat(0, &g).unwrap();
        assert_eq!(hm.get(0, 5, 7), 1.0);
        assert!((hm.get(0, 7, 7) - (-0.5f64).exp()).abs() < 1e-12);
        assert!((hm.get(0, 7, 7) - 0.6065).abs() < 1e-4);
        assert!(hm.as_dense().values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn splat_errors() {
        let mut hm = Heatmap::<f64>::new(1, 16, 16, 4).unwrap();
        let g = GaussianSpec {
            center: Point2::new(4.0, 1.0),
            sigma_x: 1.0,
            sigma_y: 1.0,
        };
        assert!(hm.splat(0, &g).is_err());
        assert!(hm
            .splat(
                1,
                &GaussianSpec {
                    center: Point2::new(1.0, 1.0),
                    ..g
                }
            )
            .is_err());
    }

    #[test]
    fn overlapping_splats_are_cellwise_max() {
        let a = GaussianSpec {
            center: Point2::new(6.2, 5.0),
            sigma_x: 2.0,
            sigma_y: 1.5,
        };
        let b = GaussianSpec {
            center: Point2::new(8.0, 6.3),
            sigma_x: 1.0,
            sigma_y: 3.0,
        };
        let mut both = Heatmap::<f64>::new(1, 64, 48, 4).unwrap();
        both.splat(0, &a).unwrap();
        both.splat(0, &b).unwrap();
        let mut reversed = Heatmap::<f64>::new(1, 64, 48, 4).unwrap();
        reversed.splat(0, &b).unwrap();
        reversed.splat(0, &a).unwrap();
        assert_eq!(both, reversed);

        // Independent per-splat renders straight from the formula.
        let eval = |g: &GaussianSpec<f64>, x: usize, y: usize| {
            let dx = x as f64 + 0.5 - g.center.x;
            let dy = y as f64 + 0.5 - g.center.y;
            (-(dx * dx / (2.0 * g.sigma_x * g.sigma_x) + dy * dy / (2.0 * g.sigma_y * g.sigma_y))).exp()
        };
        for y in 0..both.height() {
            for x in 0..both.width() {
                assert_eq!(both.get(0, x, y), eval(&a, x, y).max(eval(&b, x, y)));
            }
        }
    }

    #[test]
    fn prior_empty_single_and_many() {
        let empty: Vec<Track<f64>> = Vec::new();
        let hm = render_prior(&empty, 128, 96, 4).unwrap();
        assert!(hm.as_dense().values().iter().all(|&v| v == 0.0));

        let one = vec![track(1, 50.0, 40.0, TrackState::Active)];
        let hm = render_prior(&one, 128, 96, 4).unwrap();
        let mut single = Heatmap::new(1, 128, 96, 4).unwrap();
        single
            .splat(
                0,
                &object_gaussian(Point2::new(50.0, 40.0), &one[0].polygon, 4).unwrap(),
            )
            .unwrap();
        assert_eq!(hm, single);

        let many = vec![
            track(1, 50.0, 40.0, TrackState::Active),
            track(2, 70.0, 44.0, TrackState::Frozen { age: 3 }),
            track(3, 20.0, 80.0, TrackState::Terminated),
            track(4, 300.0, 40.0, TrackState::Frozen { age: 1 }),
        ];
        let hm = render_prior(&many, 128, 96, 4).unwrap();
        let per_track: Vec<_> = many[..2]
            .iter()
            .map(|t| render_prior(std::iter::once(t), 128, 96, 4).unwrap())
            .collect();
        for (i, v) in hm.as_dense().values().iter().enumerate() {
            let expected = per_track.iter().map(|h| h.as_dense().values()[i]).fold(0.0, f64::max);
            assert_eq!(*v, expected);
        }
    }
}
