//! Rasterized straight paths between a pixel and a cluster barycenter.
//!
//! Paths are generated along the driving (largest-extent) axis: step `i`
//! advances the driving axis by one and places every other axis at
//! `i * delta / len` rounded half down, so an exact half keeps the minor
//! coordinate and only the driving axis moves. Ties for the driving axis go
//! to x, then y, then z. Rasterization always starts from the
//! lexicographically smaller endpoint, which makes `path(a, b)` the exact
//! reverse of `path(b, a)`.

/// Ordered pixel (or voxel) coordinates, both endpoints included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPath<const D: usize> {
    points: Vec<[usize; D]>,
}

impl<const D: usize> PixelPath<D> {
    pub fn points(&self) -> &[[usize; D]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> [usize; D] {
        self.points[0]
    }

    pub fn last(&self) -> [usize; D] {
        self.points[self.points.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize; D]> {
        self.points.iter()
    }
}

/// Path between two pixels of a planar grid.
pub fn linear_path(from: [usize; 2], to: [usize; 2]) -> PixelPath<2> {
    PixelPath {
        points: LineIter::new(from, to).collect(),
    }
}

/// Path between two voxels.
pub fn linear_path_3d(from: [usize; 3], to: [usize; 3]) -> PixelPath<3> {
    PixelPath {
        points: LineIter::new(from, to).collect(),
    }
}

/// Lazily walks the path from `from` to `to` without allocating.
#[derive(Debug, Clone)]
pub struct LineIter<const D: usize> {
    origin: [i64; D],
    sign: [i64; D],
    delta: [i64; D],
    major: usize,
    steps: i64,
    next: i64,
    remaining: usize,
    forward: bool,
}

/// `round(num / den)` with exact halves rounded down; `den > 0`, `num >= 0`.
#[inline]
fn round_half_down(num: i64, den: i64) -> i64 {
    (2 * num + den - 1).div_euclid(2 * den)
}

impl<const D: usize> LineIter<D> {
    pub fn new(from: [usize; D], to: [usize; D]) -> Self {
        let forward = from <= to;
        let (a, b) = if forward { (from, to) } else { (to, from) };
        let mut origin = [0i64; D];
        let mut sign = [0i64; D];
        let mut delta = [0i64; D];
        let mut major = 0;
        for axis in 0..D {
            let d = b[axis] as i64 - a[axis] as i64;
            origin[axis] = a[axis] as i64;
            sign[axis] = d.signum();
            delta[axis] = d.abs();
            if delta[axis] > delta[major] {
                major = axis;
            }
        }
        let steps = delta[major];
        LineIter {
            origin,
            sign,
            delta,
            major,
            steps,
            next: if forward { 0 } else { steps },
            remaining: steps as usize + 1,
            forward,
        }
    }

    #[inline]
    fn point_at(&self, i: i64) -> [usize; D] {
        let mut p = [0usize; D];
        for (axis, coord) in p.iter_mut().enumerate() {
            let offset = if axis == self.major {
                i
            } else if self.delta[axis] == 0 {
                0
            } else {
                round_half_down(i * self.delta[axis], self.steps)
            };
            *coord = (self.origin[axis] + self.sign[axis] * offset) as usize;
        }
        p
    }
}

impl<const D: usize> Iterator for LineIter<D> {
    type Item = [usize; D];

    #[inline]
    fn next(&mut self) -> Option<[usize; D]> {
        if self.remaining == 0 {
            return None;
        }
        let p = self.point_at(self.next);
        self.remaining -= 1;
        if self.forward {
            self.next += 1;
        } else {
            self.next -= 1;
        }
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl<const D: usize> ExactSizeIterator for LineIter<D> {}
