//! Unscented Kalman Filter over a per-axis constant-acceleration model.
//!
//! State layout is `[px, vx, ax, py, vy, ay]` (pixels, px/frame, px/frame²).
//! The measurement is the object center `(px, py)`.
//!
//! The dynamics are linear, so the unscented transform reproduces the linear
//! Kalman filter exactly (up to rounding). Sigma-point statistics are
//! accumulated relative to the center point to keep that true for small
//! `alpha`, where the center weight is of order `-1/alpha²`.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

pub const STATE_DIM: usize = 6;
pub const SIGMA_COUNT: usize = 2 * STATE_DIM + 1;

pub type Vector6<T> = [T; STATE_DIM];
pub type Matrix6<T> = [[T; STATE_DIM]; STATE_DIM];

const PX: usize = 0;
const PY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UkfParams<T> {
    /// Sigma-point spread, in `(0, 1]`. The default 1e-3 places sigma points
    /// about 2e-3 standard deviations from the mean, which single precision
    /// cannot resolve at image-scale coordinates; use 1.0 with `f32`.
    pub alpha: T,
    pub beta: T,
    pub kappa: T,
    /// Process-noise intensity, (px/frame²)².
    pub q_accel: T,
    /// Measurement-noise variance, px².
    pub r_pos: T,
    /// Initial velocity variance at birth.
    pub p_vel0: T,
    /// Initial acceleration variance at birth.
    pub p_acc0: T,
}

impl<T: Scalar> Default for UkfParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(1e-3),
            beta: T::lit(2.0),
            kappa: T::zero(),
            q_accel: T::one(),
            r_pos: T::one(),
            p_vel0: T::lit(100.0),
            p_acc0: T::lit(10.0),
        }
    }
}

impl<T: Scalar> UkfParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha <= T::one()) {
            return Err(Error::invalid(format!(
                "ukf alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.q_accel > T::zero()) || !(self.r_pos > T::zero()) {
            return Err(Error::invalid("ukf q_accel and r_pos must be positive"));
        }
        if !(self.p_vel0 > T::zero()) || !(self.p_acc0 > T::zero()) {
            return Err(Error::invalid("ukf initial variances must be positive"));
        }
        let n = T::from_usize_lossy(STATE_DIM);
        if !(n + self.lambda() > T::zero()) {
            return Err(Error::invalid("ukf scaling gives n + lambda <= 0"));
        }
        Ok(())
    }

    /// `lambda = alpha² (n + kappa) - n`.
    pub fn lambda(&self) -> T {
        let n = T::from_usize_lossy(STATE_DIM);
        self.alpha * self.alpha * (n + self.kappa) - n
    }
}

/// Mean and covariance of one track's kinematic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState<T> {
    pub mean: Vector6<T>,
    pub covariance: Matrix6<T>,
}

impl<T: Scalar> FilterState<T> {
    pub fn position(&self) -> Point2<T> {
        Point2::new(self.mean[PX], self.mean[PY])
    }

    pub fn velocity(&self) -> Point2<T> {
        Point2::new(self.mean[PX + 1], self.mean[PY + 1])
    }

    pub fn acceleration(&self) -> Point2<T> {
        Point2::new(self.mean[PX + 2], self.mean[PY + 2])
    }
}

/// Merwe scaled sigma points with their mean and covariance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPoints<T> {
    pub points: [Vector6<T>; SIGMA_COUNT],
    pub mean_weights: [T; SIGMA_COUNT],
    pub cov_weights: [T; SIGMA_COUNT],
}

/// State at track birth: the detected center with zero velocity and
/// acceleration.
pub fn birth<T: Scalar>(center: Point2<T>, params: &UkfParams<T>) -> FilterState<T> {
    let mut mean = [T::zero(); STATE_DIM];
    mean[PX] = center.x;
    mean[PY] = center.y;
    let mut covariance = [[T::zero(); STATE_DIM]; STATE_DIM];
    for axis in [PX, PY] {
        covariance[axis][axis] = params.r_pos;
        covariance[axis + 1][axis + 1] = params.p_vel0;
        covariance[axis + 2][axis + 2] = params.p_acc0;
    }
    FilterState { mean, covariance }
}

pub fn sigma_points<T: Scalar>(state: &FilterState<T>, params: &UkfParams<T>) -> Result<SigmaPoints<T>> {
    let n = T::from_usize_lossy(STATE_DIM);
    let lambda = params.lambda();
    let scale = n + lambda;
    let mut scaled = state.covariance;
    for row in scaled.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * scale;
        }
    }
    let l = cholesky(&scaled)?;

    let mut points = [state.mean; SIGMA_COUNT];
    for i in 0..STATE_DIM {
        for r in 0..STATE_DIM {
            // Column i of the lower-triangular factor.
            points[1 + i][r] = state.mean[r] + l[r][i];
            points[1 + STATE_DIM + i][r] = state.mean[r] - l[r][i];
        }
    }

    let w = T::one() / (T::lit(2.0) * scale);
    let mut mean_weights = [w; SIGMA_COUNT];
    let mut cov_weights = [w; SIGMA_COUNT];
    mean_weights[0] = lambda / scale;
    cov_weights[0] = lambda / scale + (T::one() - params.alpha * params.alpha + params.beta);
    Ok(SigmaPoints {
        points,
        mean_weights,
        cov_weights,
    })
}

/// Weighted mean of `N`-vectors, accumulated as offsets from `points[0]`.
fn weighted_mean<T: Scalar, const N: usize>(points: &[[T; N]; SIGMA_COUNT], weights: &[T; SIGMA_COUNT]) -> [T; N] {
    let base = points[0];
    let mut acc = [T::zero(); N];
    for (p, &w) in points.iter().zip(weights).skip(1) {
        for k in 0..N {
            acc[k] = acc[k] + w * (p[k] - base[k]);
        }
    }
    // The center offset is zero, and the weights sum to one.
    let mut out = base;
    for k in 0..N {
        out[k] = out[k] + acc[k];
    }
    out
}

/// Weighted cross-covariance of two sigma-point sets.
///
/// With deviations `d_i = x_i - x_0` from the center point and their
/// weighted mean `m`, the covariance equals
/// `sum_{i>0} Wc_i d_i e_i^T + (beta - alpha^2) m_d m_e^T`. That form avoids
/// the large negative center weight of small `alpha`, which otherwise
/// cancels catastrophically (fatal in single precision).
fn weighted_cov<T: Scalar, const A: usize, const B: usize>(
    a: &[[T; A]; SIGMA_COUNT],
    b: &[[T; B]; SIGMA_COUNT],
    sp: &SigmaPoints<T>,
    params: &UkfParams<T>,
) -> [[T; B]; A] {
    let mut out = [[T::zero(); B]; A];
    let mut ma = [T::zero(); A];
    let mut mb = [T::zero(); B];
    for i in 1..SIGMA_COUNT {
        let da: [T; A] = std::array::from_fn(|r| a[i][r] - a[0][r]);
        let db: [T; B] = std::array::from_fn(|c| b[i][c] - b[0][c]);
        let (wc, wm) = (sp.cov_weights[i], sp.mean_weights[i]);
        for r in 0..A {
            ma[r] = ma[r] + wm * da[r];
            for c in 0..B {
                out[r][c] = out[r][c] + wc * da[r] * db[c];
            }
        }
        for c in 0..B {
            mb[c] = mb[c] + wm * db[c];
        }
    }
    let excess = params.beta - params.alpha * params.alpha;
    for r in 0..A {
        for c in 0..B {
            out[r][c] = out[r][c] + excess * ma[r] * mb[c];
        }
    }
    out
}

/// Advances the state by `dt` frames under constant acceleration and adds
/// the matching white-jerk process noise.
pub fn predict<T: Scalar>(state: &FilterState<T>, params: &UkfParams<T>, dt: T) -> Result<FilterState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::invalid(format!("predict needs dt > 0, got {dt}")));
    }
    let sp = sigma_points(state, params)?;
    let mut propagated = sp.points;
    for p in propagated.iter_mut() {
        *p = transition(p, dt);
    }
    let mean = weighted_mean(&propagated, &sp.mean_weights);
    let mut covariance = weighted_cov(&propagated, &propagated, &sp, params);
    let q = process_noise(params.q_accel, dt);
    for r in 0..STATE_DIM {
        for c in 0..STATE_DIM {
            covariance[r][c] = covariance[r][c] + q[r][c];
        }
    }
    symmetrize(&mut covariance);
    Ok(FilterState { mean, covariance })
}

/// Measurement update with the detected center `z`.
pub fn update<T: Scalar>(state: &FilterState<T>, z: Point2<T>, params: &UkfParams<T>) -> Result<FilterState<T>> {
    if !z.is_finite() {
        return Err(Error::invalid("measurement is not finite"));
    }
    let sp = sigma_points(state, params)?;
    let mut projected = [[T::zero(); 2]; SIGMA_COUNT];
    for (zi, p) in projected.iter_mut().zip(&sp.points) {
        *zi = [p[PX], p[PY]];
    }
    let z_mean = weighted_mean(&projected, &sp.mean_weights);
    let mut s = weighted_cov(&projected, &projected, &sp, params);
    let cross = weighted_cov(&sp.points, &projected, &sp, params);
    s[0][0] = s[0][0] + params.r_pos;
    s[1][1] = s[1][1] + params.r_pos;
    let s_inv = inverse2(&s)?;

    let mut gain = [[T::zero(); 2]; STATE_DIM];
    for r in 0..STATE_DIM {
        for b in 0..2 {
            gain[r][b] = cross[r][0] * s_inv[0][b] + cross[r][1] * s_inv[1][b];
        }
    }
    let innovation = [z.x - z_mean[0], z.y - z_mean[1]];
    let mut mean = state.mean;
    for r in 0..STATE_DIM {
        mean[r] = mean[r] + gain[r][0] * innovation[0] + gain[r][1] * innovation[1];
    }
    // P - K S K^T, with K S = Pxz.
    let mut covariance = state.covariance;
    for r in 0..STATE_DIM {
        for c in 0..STATE_DIM {
            let ksk = cross[r][0] * gain[c][0] + cross[r][1] * gain[c][1];
            covariance[r][c] = covariance[r][c] - ksk;
        }
    }
    symmetrize(&mut covariance);
    cholesky(&covariance)
        .map_err(|_| Error::NumericalDegeneracy("posterior covariance is not positive-definite".into()))?;
    Ok(FilterState { mean, covariance })
}

/// Per-axis constant-acceleration transition.
pub fn transition<T: Scalar>(x: &Vector6<T>, dt: T) -> Vector6<T> {
    let half = T::lit(0.5);
    let mut out = *x;
    for axis in [PX, PY] {
        let (p, v, a) = (x[axis], x[axis + 1], x[axis + 2]);
        out[axis] = p + v * dt + half * a * dt * dt;
        out[axis + 1] = v + a * dt;
        out[axis + 2] = a;
    }
    out
}

/// `q_accel * blockdiag(G)` with `G = [[dt⁴/4, dt³/2, dt²/2], [dt³/2, dt², dt], [dt²/2, dt, 1]]`.
pub fn process_noise<T: Scalar>(q_accel: T, dt: T) -> Matrix6<T> {
    let dt2 = dt * dt;
    let dt3 = dt2 * dt;
    let dt4 = dt3 * dt;
    let half = T::lit(0.5);
    let block = [
        [dt4 * T::lit(0.25), dt3 * half, dt2 * half],
        [dt3 * half, dt2, dt],
        [dt2 * half, dt, T::one()],
    ];
    let mut q = [[T::zero(); STATE_DIM]; STATE_DIM];
    for axis in [PX, PY] {
        for r in 0..3 {
            for c in 0..3 {
                q[axis + r][axis + c] = q_accel * block[r][c];
            }
        }
    }
    q
}

fn symmetrize<T: Scalar>(m: &mut Matrix6<T>) {
    let half = T::lit(0.5);
    for r in 0..STATE_DIM {
        for c in (r + 1)..STATE_DIM {
            let v = (m[r][c] + m[c][r]) * half;
            m[r][c] = v;
            m[c][r] = v;
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Scalar>(m: &Matrix6<T>) -> Result<Matrix6<T>> {
    let mut l = [[T::zero(); STATE_DIM]; STATE_DIM];
    for j in 0..STATE_DIM {
        let mut d = m[j][j];
        for k in 0..j {
            d = d - l[j][k] * l[j][k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "cholesky failed at pivot {j} (value {d})"
            )));
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in (j + 1)..STATE_DIM {
            let mut s = m[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    Ok(l)
}

fn inverse2<T: Scalar>(m: &[[T; 2]; 2]) -> Result<[[T; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > T::zero()) || !det.is_finite() {
        return Err(Error::NumericalDegeneracy("innovation covariance is singular".into()));
    }
    Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}
