//! Polygons, binary masks and the conversions between them.
//!
//! Pixel `(i, j)` covers the unit square `[i, i+1) x [j, j+1)`; its center is
//! `(i + 0.5, j + 0.5)`. Rasterization samples pixel centers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of polygon vertices used throughout a run unless configured otherwise.
pub const DEFAULT_VERTICES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        self.sub(other).norm()
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

/// Axis-aligned box in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> BBox<T> {
    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point2<T> {
        let half = T::lit(0.5);
        Point2::new((self.min.x + self.max.x) * half, (self.min.y + self.max.y) * half)
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }
}

/// Closed ring of vertices approximating an instance mask. The last vertex
/// implicitly connects to the first; self-intersections are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("polygon has no vertices"));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("polygon vertex {i} is not finite")));
        }
        Ok(Self { vertices })
    }

    /// Builds a polygon from a flat `[x0, y0, x1, y1, ...]` slice.
    pub fn from_flat(coords: &[T]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::invalid("odd number of polygon coordinates"));
        }
        Self::new(coords.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect())
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Center of gravity of the polygon: the arithmetic mean of its vertices.
    pub fn centroid(&self) -> Point2<T> {
        let n = T::from_usize_lossy(self.vertices.len());
        let sx: T = self.vertices.iter().map(|p| p.x).sum();
        let sy: T = self.vertices.iter().map(|p| p.y).sum();
        Point2::new(sx / n, sy / n)
    }

    /// Absolute shoelace area.
    pub fn area(&self) -> T {
        let n = self.vertices.len();
        let mut acc = T::zero();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc = acc + (a.x * b.y - b.x * a.y);
        }
        (acc * T::lit(0.5)).abs()
    }

    pub fn bbox(&self) -> BBox<T> {
        let first = self.vertices[0];
        let (mut min, mut max) = (first, first);
        for p in &self.vertices[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn translate(&self, d: Point2<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p.add(d)).collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Polygon<U> {
        Polygon {
            vertices: self.vertices.iter().map(|p| p.cast()).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.vertices.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Scanline fill with the even-odd rule, sampling pixel centers. Pixels
    /// outside the grid are clipped.
    pub fn rasterize(&self, width: usize, height: usize) -> BitMask {
        let mut mask = BitMask::new(width, height);
        self.rasterize_into(&mut mask, |m, i, j| m.set(i, j, true));
        mask
    }

    /// Calls `fill(target, col, row)` for every pixel whose center lies inside
    /// the polygon under the even-odd rule, restricted to `target`'s grid.
    pub(crate) fn rasterize_into<M: GridSize>(&self, target: &mut M, mut fill: impl FnMut(&mut M, usize, usize)) {
        let (width, height) = target.grid_size();
        if width == 0 || height == 0 {
            return;
        }
        let bb = self.bbox();
        let half = T::lit(0.5);
        // Rows whose centers can fall inside the vertical extent.
        let row_lo = (bb.min.y - half).ceil().max(T::zero());
        let row_hi = (bb.max.y - half).floor();
        if row_hi < T::zero() || row_lo.to_f64_lossy() >= height as f64 {
            return;
        }
        let row_lo = row_lo.to_usize().unwrap_or(0);
        let row_hi = row_hi.to_usize().unwrap_or(0).min(height - 1);

        let n = self.vertices.len();
        let mut xs: Vec<T> = Vec::with_capacity(n);
        for j in row_lo..=row_hi {
            let y = T::from_usize_lossy(j) + half;
            xs.clear();
            let mut prev = self.vertices[n - 1];
            for &cur in &self.vertices {
                // Half-open crossing rule; the same arithmetic as a
                // per-point crossing test, so results agree bit for bit.
                if (cur.y > y) != (prev.y > y) {
                    xs.push((prev.x - cur.x) * (y - cur.y) / (prev.y - cur.y) + cur.x);
                }
                prev = cur;
            }
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite crossings"));
            for span in xs.chunks_exact(2) {
                // Pixel centers px with span[0] <= px < span[1].
                let start = (span[0] - half).ceil().max(T::zero());
                if start.to_f64_lossy() >= width as f64 {
                    continue;
                }
                let mut i = start.to_usize().unwrap_or(0).saturating_sub(1);
                while i < width {
                    let px = T::from_usize_lossy(i) + half;
                    if px >= span[1] {
                        break;
                    }
                    if px >= span[0] {
                        fill(target, i, j);
                    }
                    i += 1;
                }
            }
        }
    }
}

/// Anything with a pixel grid that a polygon can be rasterized into.
pub(crate) trait GridSize {
    fn grid_size(&self) -> (usize, usize);
}

impl GridSize for BitMask {
    fn grid_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Row-major binary occupancy grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::invalid(format!(
                "mask has {} bits, expected {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                bits.push(f(i, j));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        self.bits[row * self.width + col] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Occupancy of the continuous point `(x, y)`; false outside the grid.
    fn occupied_at<T: Scalar>(&self, p: Point2<T>) -> bool {
        if p.x < T::zero() || p.y < T::zero() {
            return false;
        }
        match (p.x.floor().to_usize(), p.y.floor().to_usize()) {
            (Some(i), Some(j)) if i < self.width && j < self.height => self.get(i, j),
            _ => false,
        }
    }

    /// Tight pixel bounding box as inclusive `(min_col, min_row, max_col, max_row)`.
    pub fn pixel_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut out: Option<(usize, usize, usize, usize)> = None;
        for j in 0..self.height {
            let row = &self.bits[j * self.width..(j + 1) * self.width];
            let Some(first) = row.iter().position(|&b| b) else {
                continue;
            };
            let last = row.iter().rposition(|&b| b).unwrap_or(first);
            out = Some(match out {
                None => (first, j, last, j),
                Some((x0, y0, x1, _)) => (x0.min(first), y0, x1.max(last), j),
            });
        }
        out
    }

    /// Intersection-over-union of two equally sized masks; 0 when both are empty.
    pub fn iou(&self, other: &BitMask) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::invalid(format!(
                "mask dimensions differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
    }

    /// Approximates the mask with an `n_vertices` polygon.
    ///
    /// Ray origins are spaced at equal arc length along the perimeter of the
    /// mask's tight bounding box, starting at its top-left corner and running
    /// clockwise (screen coordinates). Each ray marches toward the box center
    /// in steps of at most [`POLYGONIZE_STEP`] px and the first occupied
    /// sample becomes the vertex. A ray that never hits yields the box center.
    pub fn polygonize<T: Scalar>(&self, n_vertices: usize) -> Result<Polygon<T>> {
        if n_vertices < 3 {
            return Err(Error::invalid(format!(
                "polygonize needs at least 3 vertices, got {n_vertices}"
            )));
        }
        let (x0, y0, x1, y1) = self
            .pixel_bbox()
            .ok_or_else(|| Error::invalid("cannot polygonize an empty mask"))?;
        let left = T::from_usize_lossy(x0);
        let top = T::from_usize_lossy(y0);
        let right = T::from_usize_lossy(x1 + 1);
        let bottom = T::from_usize_lossy(y1 + 1);
        let w = right - left;
        let h = bottom - top;
        let center = Point2::new((left + right) * T::lit(0.5), (top + bottom) * T::lit(0.5));
        let perimeter = (w + h) * T::lit(2.0);
        let step = T::lit(POLYGONIZE_STEP);

        let mut vertices = Vec::with_capacity(n_vertices);
        for k in 0..n_vertices {
            let s = perimeter * T::from_usize_lossy(k) / T::from_usize_lossy(n_vertices);
            let origin = if s < w {
                Point2::new(left + s, top)
            } else if s < w + h {
                Point2::new(right, top + (s - w))
            } else if s < w + w + h {
                Point2::new(right - (s - w - h), bottom)
            } else {
                Point2::new(left, bottom - (s - w - w - h))
            };
            let ray = center.sub(origin);
            let len = ray.norm();
            let steps = (len / step).ceil().to_usize().unwrap_or(0).max(1);
            let inc = ray.scale(T::one() / T::from_usize_lossy(steps));
            let hit = (0..=steps)
                .map(|t| origin.add(inc.scale(T::from_usize_lossy(t))))
                .find(|&p| self.occupied_at(p));
            vertices.push(hit.unwrap_or(center));
        }
        Polygon::new(vertices)
    }
}

/// Ray-marching step used by [`BitMask::polygonize`], in pixels.
pub const POLYGONIZE_STEP: f64 = 0.25;

/// Intersection-over-union of two masks.
pub fn mask_iou(a: &BitMask, b: &BitMask) -> Result<f64> {
    a.iou(b)
}
