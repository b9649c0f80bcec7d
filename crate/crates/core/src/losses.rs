//! Reference training objective: penalty-reduced focal loss on the center
//! heatmap, sparse L1 losses on the regression heads, their weighted sum, and
//! the tracking-offset target.
//!
//! Every loss returns its analytic gradient alongside the value.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Channel-major dense map at heatmap resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMap<T> {
    channels: usize,
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> DenseMap<T> {
    pub fn zeros(channels: usize, width: usize, height: usize) -> Self {
        Self::filled(channels, width, height, T::zero())
    }

    pub fn filled(channels: usize, width: usize, height: usize, value: T) -> Self {
        Self {
            channels,
            width,
            height,
            values: vec![value; channels * width * height],
        }
    }

    pub fn from_values(channels: usize, width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != channels * width * height {
            return Err(Error::invalid(format!(
                "dense map needs {} values, got {}",
                channels * width * height,
                values.len()
            )));
        }
        Ok(Self {
            channels,
            width,
            height,
            values,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn index(&self, channel: usize, x: usize, y: usize) -> usize {
        (channel * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, channel: usize, x: usize, y: usize) -> T {
        self.values[self.index(channel, x, y)]
    }

    #[inline]
    pub fn set(&mut self, channel: usize, x: usize, y: usize, v: T) {
        let i = self.index(channel, x, y);
        self.values[i] = v;
    }

    pub fn channel(&self, channel: usize) -> &[T] {
        let n = self.width * self.height;
        &self.values[channel * n..(channel + 1) * n]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.channels == other.channels && self.width == other.width && self.height == other.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalParams<T> {
    pub alpha: T,
    pub beta: T,
    /// Predictions are clamped to `[clamp, 1 - clamp]`.
    pub clamp: T,
}

impl<T: Scalar> Default for FocalParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(2.0),
            beta: T::lit(4.0),
            clamp: T::lit(1e-4),
        }
    }
}

/// Penalty-reduced pixelwise focal loss, normalized by the number of
/// positive (`gt == 1`) cells with a floor of one.
///
/// The gradient is taken with respect to the clamped prediction.
pub fn focal_loss<T: Scalar>(pred: &DenseMap<T>, gt: &DenseMap<T>) -> Result<(T, DenseMap<T>)> {
    focal_loss_with(pred, gt, &FocalParams::default())
}

pub fn focal_loss_with<T: Scalar>(
    pred: &DenseMap<T>,
    gt: &DenseMap<T>,
    params: &FocalParams<T>,
) -> Result<(T, DenseMap<T>)> {
    if !pred.same_shape(gt) {
        return Err(Error::invalid(format!(
            "focal loss shapes differ: {}x{}x{} vs {}x{}x{}",
            pred.channels, pred.width, pred.height, gt.channels, gt.width, gt.height
        )));
    }
    let one = T::one();
    let (alpha, beta) = (params.alpha, params.beta);
    let lo = params.clamp;
    let hi = one - params.clamp;

    let positives = gt.values.iter().filter(|&&g| g == one).count();
    let norm = T::from_usize_lossy(positives.max(1));

    let mut total = T::zero();
    let mut grad = DenseMap::zeros(pred.channels, pred.width, pred.height);
    for ((&p, &g), dg) in pred.values.iter().zip(&gt.values).zip(grad.values.iter_mut()) {
        let p = p.max(lo).min(hi);
        let (loss, d) = if g == one {
            let omp = one - p;
            let lp = p.ln();
            (
                -omp.powf(alpha) * lp,
                alpha * omp.powf(alpha - one) * lp - omp.powf(alpha) / p,
            )
        } else {
            let reduce = (one - g).powf(beta);
            let l1mp = (one - p).ln();
            (
                -reduce * p.powf(alpha) * l1mp,
                -reduce * (alpha * p.powf(alpha - one) * l1mp - p.powf(alpha) / (one - p)),
            )
        };
        total = total + loss;
        *dg = d / norm;
    }
    Ok((total / norm, grad))
}

/// Regression target at one object center.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterTarget<T> {
    pub x: usize,
    pub y: usize,
    /// One value per channel of the prediction map.
    pub values: Vec<T>,
}

/// Sparse gradient: `(flat index into the map, value)`, sorted by index.
pub type SparseGrad<T> = Vec<(usize, T)>;

/// Mean absolute error over the listed centers and all channels. Cells not
/// listed contribute neither loss nor gradient.
pub fn l1_at_centers<T: Scalar>(pred: &DenseMap<T>, targets: &[CenterTarget<T>]) -> Result<(T, SparseGrad<T>)> {
    for (k, t) in targets.iter().enumerate() {
        if t.x >= pred.width || t.y >= pred.height {
            return Err(Error::invalid(format!(
                "target {k} at ({}, {}) lies outside the {}x{} map",
                t.x, t.y, pred.width, pred.height
            )));
        }
        if t.values.len() != pred.channels {
            return Err(Error::invalid(format!(
                "target {k} has {} values, map has {} channels",
                t.values.len(),
                pred.channels
            )));
        }
    }
    if targets.is_empty() {
        return Ok((T::zero(), Vec::new()));
    }
    let count = T::from_usize_lossy(targets.len() * pred.channels);
    let mut total = T::zero();
    let mut grad: Vec<(usize, T)> = Vec::with_capacity(targets.len() * pred.channels);
    for t in targets {
        for (c, &target) in t.values.iter().enumerate() {
            let idx = pred.index(c, t.x, t.y);
            let diff = pred.values[idx] - target;
            total = total + diff.abs();
            let sign = if diff > T::zero() {
                T::one()
            } else if diff < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
            grad.push((idx, sign / count));
        }
    }
    grad.sort_by_key(|&(i, _)| i);
    grad.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 = a.1 + b.1;
            true
        } else {
            false
        }
    });
    Ok((total / count, grad))
}

/// Per-head loss values entering the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts<T> {
    pub hm: T,
    pub poly: T,
    pub depth: T,
    pub track: T,
    pub off: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    pub hm: T,
    pub poly: T,
    pub depth: T,
    pub track: T,
    pub off: T,
}

impl<T: Scalar> Default for LossWeights<T> {
    /// Training weights: 1 for every head except depth, which gets 0.1.
    fn default() -> Self {
        Self {
            hm: T::one(),
            poly: T::one(),
            depth: T::lit(0.1),
            track: T::one(),
            off: T::one(),
        }
    }
}

impl<T: Scalar> LossWeights<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.hm, self.poly, self.depth, self.track, self.off];
        if all.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::invalid("loss weights must be non-negative"));
        }
        Ok(())
    }
}

pub fn total_loss<T: Scalar>(parts: &LossParts<T>, w: &LossWeights<T>) -> T {
    w.hm * parts.hm + w.poly * parts.poly + w.depth * parts.depth + w.track * parts.track + w.off * parts.off
}

/// Tracking-offset target: previous center minus current center.
pub fn offset_target<T: Scalar>(center_t: Point2<T>, center_prev: Point2<T>) -> Point2<T> {
    center_prev.sub(center_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_positive(w: usize, h: usize, x: usize, y: usize) -> DenseMap<f64> {
        let mut gt = DenseMap::zeros(1, w, h);
        gt.set(0, x, y, 1.0);
        gt
    }

    #[test]
    fn focal_near_perfect() {
        let gt = single_positive(5, 4, 2, 1);
        let pred = DenseMap::from_values(
            1,
            5,
            4,
            gt.values()
                .iter()
                .map(|&g| if g == 1.0 { 1.0 - 1e-4 } else { 1e-4 })
                .collect(),
        )
        .unwrap();
        let (loss, _) = focal_loss(&pred, &gt).unwrap();
        assert!(loss < 1e-3, "loss {loss}");
    }

    #[test]
    fn focal_half_at_single_positive() {
        let gt = single_positive(1, 1, 0, 0);
        let pred = DenseMap::filled(1, 1, 1, 0.5);
        let (loss, _) = focal_loss(&pred, &gt).unwrap();
        let expected = -(0.5f64).powi(2) * 0.5f64.ln();
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 0.1733).abs() < 1e-4);
    }

    #[test]
    fn focal_shape_mismatch() {
        let a = DenseMap::<f64>::zeros(1, 3, 3);
        let b = DenseMap::<f64>::zeros(2, 3, 3);
        assert!(matches!(focal_loss(&a, &b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn focal_empty_frame_normalizes_by_one() {
        let gt = DenseMap::zeros(1, 2, 2);
        let pred = DenseMap::filled(1, 2, 2, 0.25);
        let (loss, _) = focal_loss(&pred, &gt).unwrap();
        let per_cell = -(0.25f64).powi(2) * 0.75f64.ln();
        assert!((loss - 4.0 * per_cell).abs() < 1e-12);
    }

    #[test]
    fn focal_decreases_toward_gt() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gt = DenseMap::from_values(
            1,
            6,
            6,
            (0..36)
                .map(|i| if i == 14 { 1.0 } else { rng.gen_range(0.0..0.9) })
                .collect(),
        )
        .unwrap();
        let start = DenseMap::from_values(1, 6, 6, (0..36).map(|_| rng.gen_range(0.05..0.95)).collect()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let values = start
                .values()
                .iter()
                .zip(gt.values())
                .map(|(&p, &g)| {
                    // Move toward the target of each term: 1 at positives, 0 elsewhere.
                    let goal = if g == 1.0 { 1.0 } else { 0.0 };
                    p + t * (goal - p)
                })
                .collect();
            let pred = DenseMap::from_values(1, 6, 6, values).unwrap();
            let (loss, _) = focal_loss(&pred, &gt).unwrap();
            assert!(loss <= prev + 1e-12, "step {k}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn l1_examples() {
        let pred = DenseMap::from_values(1, 3, 3, (0..9).map(|v| v as f64).collect()).unwrap();
        let (zero, _) = l1_at_centers(
            &pred,
            &[CenterTarget {
                x: 1,
                y: 1,
                values: vec![4.0],
            }],
        )
        .unwrap();
        assert_eq!(zero, 0.0);

        let mut pred = DenseMap::zeros(1, 4, 4);
        pred.set(0, 2, 3, 3.0);
        let (loss, grad) = l1_at_centers(
            &pred,
            &[CenterTarget {
                x: 2,
                y: 3,
                values: vec![5.0],
            }],
        )
        .unwrap();
        assert_eq!(loss, 2.0);
        assert_eq!(grad, vec![(pred.index(0, 2, 3), -1.0)]);
    }

    #[test]
    fn l1_errors() {
        let pred = DenseMap::<f64>::zeros(2, 4, 4);
        assert!(l1_at_centers(
            &pred,
            &[CenterTarget {
                x: 4,
                y: 0,
                values: vec![0.0, 0.0]
            }]
        )
        .is_err());
        assert!(l1_at_centers(
            &pred,
            &[CenterTarget {
                x: 0,
                y: 0,
                values: vec![0.0]
            }]
        )
        .is_err());
        assert_eq!(l1_at_centers(&pred, &[]).unwrap().0, 0.0);
    }

    #[test]
    fn l1_gradient_magnitude() {
        let pred = DenseMap::from_values(2, 3, 3, (0..18).map(|v| v as f64 * 0.5).collect()).unwrap();
        let targets = vec![
            CenterTarget {
                x: 0,
                y: 0,
                values: vec![10.0, -10.0],
            },
            CenterTarget {
                x: 2,
                y: 1,
                values: vec![10.0, -10.0],
            },
        ];
        let (_, grad) = l1_at_centers(&pred, &targets).unwrap();
        assert_eq!(grad.len(), 4);
        for &(_, g) in &grad {
            assert_eq!(g.abs(), 1.0 / 4.0);
        }
    }

    #[test]
    fn total_loss_examples() {
        let ones = LossParts {
            hm: 1.0,
            poly: 1.0,
            depth: 1.0,
            track: 1.0,
            off: 1.0,
        };
        assert_eq!(total_loss(&ones, &LossWeights::default()), 4.1);
        assert_eq!(total_loss::<f64>(&LossParts::default(), &LossWeights::default()), 0.0);
        let parts = LossParts {
            hm: 0.3,
            poly: 2.0,
            depth: 7.0,
            track: 0.1,
            off: 1.5,
        };
        let w: LossWeights<f64> = LossWeights::default();
        let w2 = LossWeights {
            hm: 2.0,
            poly: 2.0,
            depth: 0.2,
            track: 2.0,
            off: 2.0,
        };
        assert!((total_loss(&parts, &w2) - 2.0 * total_loss(&parts, &w)).abs() < 1e-12);
        assert!(LossWeights { depth: -0.1, ..w }.validate().is_err());
    }

    #[test]
    fn offset_target_examples() {
        let off = offset_target(Point2::new(10.0, 10.0), Point2::new(8.0, 9.0));
        assert_eq!(off, Point2::new(-2.0, -1.0));
        let p = Point2::new(3.5, -1.0);
        assert_eq!(offset_target(p, p), Point2::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn offset_antisymmetric(ax in -1e3f64..1e3, ay in -1e3f64..1e3, bx in -1e3f64..1e3, by in -1e3f64..1e3) {
            let a = Point2::new(ax, ay);
            let b = Point2::new(bx, by);
            let f = offset_target(a, b);
            let r = offset_target(b, a);
            prop_assert_eq!(f, Point2::new(-r.x, -r.y));
        }

        #[test]
        fn losses_non_negative(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gt = DenseMap::from_values(2, 4, 3, (0..24).map(|_| if rng.gen_bool(0.1) { 1.0 } else { rng.gen_range(0.0..1.0) }).collect()).unwrap();
            let pred = DenseMap::from_values(2, 4, 3, (0..24).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
            prop_assert!(focal_loss(&pred, &gt).unwrap().0 >= 0.0);
            let targets = vec![CenterTarget { x: 1, y: 2, values: vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)] }];
            prop_assert!(l1_at_centers(&pred, &targets).unwrap().0 >= 0.0);
        }
    }
}
