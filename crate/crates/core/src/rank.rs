//! Rank-space reduction. Every axis is replaced by the rank of each point
//! in a total order on `(coordinate, original index)`, so duplicates get
//! distinct ranks while closed-range semantics are preserved.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::{cmp_coord, BoxQuery, ColorId, ColoredPoint, Weight};

/// Sorted `(coordinate, point index)` pairs for one axis.
#[derive(Debug, Clone, Default)]
pub struct RankMap {
    sorted: Vec<(f64, u32)>,
    rank_of: Vec<u32>,
}

impl RankMap {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted: Vec<(f64, u32)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        sorted.sort_by(|a, b| cmp_coord(a.0, b.0).then(a.1.cmp(&b.1)));
        let mut rank_of = vec![0u32; values.len()];
        for (r, &(_, i)) in sorted.iter().enumerate() {
            rank_of[i as usize] = r as u32;
        }
        RankMap { sorted, rank_of }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Rank of the point with original index `i`.
    #[inline]
    pub fn rank(&self, i: usize) -> u32 {
        self.rank_of[i]
    }

    /// Number of points with coordinate `<= v`.
    pub fn count_le(&self, v: f64) -> usize {
        self.sorted
            .partition_point(|&(x, _)| cmp_coord(x, v) != Ordering::Greater)
    }

    /// Number of points with coordinate `< v`.
    pub fn count_lt(&self, v: f64) -> usize {
        self.sorted
            .partition_point(|&(x, _)| cmp_coord(x, v) == Ordering::Less)
    }

    /// Coordinate of the point at rank `r`.
    pub fn value_at(&self, r: usize) -> f64 {
        self.sorted[r].0
    }

    pub fn entries(&self) -> &[(f64, u32)] {
        &self.sorted
    }
}

/// Builds the rank map of one axis.
pub fn rank_reduce<W>(points: &[ColoredPoint<W>], axis: usize) -> RankMap {
    let values: Vec<f64> = points.iter().map(|p| p.coords[axis]).collect();
    RankMap::from_values(&values)
}

/// Inclusive rank range on one axis. `lo > hi` means empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRange {
    pub lo: i64,
    pub hi: i64,
}

impl RankRange {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// All axes of a dataset in rank space.
#[derive(Debug, Clone, Default)]
pub struct RankSpace {
    maps: Vec<RankMap>,
    n: usize,
}

impl RankSpace {
    pub fn new<W>(points: &[ColoredPoint<W>], dims: usize) -> Self {
        RankSpace {
            maps: (0..dims).map(|a| rank_reduce(points, a)).collect(),
            n: points.len(),
        }
    }

    pub fn dims(&self) -> usize {
        self.maps.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn axis(&self, a: usize) -> &RankMap {
        &self.maps[a]
    }

    /// Converts a real query box into per-axis inclusive rank ranges.
    pub fn query_ranges(&self, q: &BoxQuery) -> Result<Vec<RankRange>> {
        q.validate()?;
        if q.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: q.dims(),
            });
        }
        Ok(q.bounds
            .iter()
            .zip(&self.maps)
            .map(|(b, m)| {
                let lo = if b.has_lo() { m.count_lt(b.lo) as i64 } else { 0 };
                let hi = if b.has_hi() {
                    m.count_le(b.hi) as i64 - 1
                } else {
                    self.n as i64 - 1
                };
                RankRange { lo, hi }
            })
            .collect())
    }

    /// Rank-space copy of the points.
    pub(crate) fn block<W: Weight>(&self, points: &[ColoredPoint<W>]) -> PointBlock<W> {
        let dims = self.dims();
        let mut block = PointBlock::with_capacity(dims, points.len());
        let mut row = vec![0u32; dims];
        for (i, p) in points.iter().enumerate() {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = self.maps[a].rank(i);
            }
            block.push(&row, p.color, p.weight, i as u32);
        }
        block
    }
}

/// Column-friendly storage of rank-space points: `dims` coordinates per row
/// plus color, weight and original point id.
#[derive(Debug, Clone)]
pub(crate) struct PointBlock<W> {
    dims: usize,
    coords: Vec<u32>,
    colors: Vec<ColorId>,
    weights: Vec<W>,
    ids: Vec<u32>,
}

impl<W: Weight> PointBlock<W> {
    pub fn with_capacity(dims: usize, n: usize) -> Self {
        PointBlock {
            dims,
            coords: Vec::with_capacity(dims * n),
            colors: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            ids: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, row: &[u32], color: ColorId, weight: W, id: u32) {
        debug_assert_eq!(row.len(), self.dims);
        self.coords.extend_from_slice(row);
        self.colors.push(color);
        self.weights.push(weight);
        self.ids.push(id);
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn coord(&self, i: usize, axis: usize) -> u32 {
        self.coords[i * self.dims + axis]
    }

    #[inline]
    pub fn color(&self, i: usize) -> ColorId {
        self.colors[i]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> W {
        self.weights[i]
    }

    #[inline]
    pub fn id(&self, i: usize) -> u32 {
        self.ids[i]
    }

    /// Reorders rows by the coordinate on `axis`, counting comparisons.
    pub fn sorted_by_axis(&self, axis: usize, ops: &mut u64) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut cmps = 0u64;
        order.sort_by(|&a, &b| {
            cmps += 1;
            self.coord(a, axis)
                .cmp(&self.coord(b, axis))
                .then(self.ids[a].cmp(&self.ids[b]))
        });
        *ops += cmps;
        self.gather(order.into_iter())
    }

    /// Copy of rows `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        self.gather(range)
    }

    /// Rows `range` with the first axis dropped.
    pub fn project_tail(&self, range: std::ops::Range<usize>) -> Self {
        assert!(self.dims > 1, "cannot drop the only axis");
        let mut out = PointBlock::with_capacity(self.dims - 1, range.len());
        for i in range {
            out.push(&self.row(i)[1..], self.colors[i], self.weights[i], self.ids[i]);
        }
        out
    }

    /// Every row rewritten by `f` into a row of `dims` coordinates.
    pub fn map_rows(&self, dims: usize, mut f: impl FnMut(&[u32], &mut [u32])) -> Self {
        let mut out = PointBlock::with_capacity(dims, self.len());
        let mut buf = vec![0u32; dims];
        for i in 0..self.len() {
            f(self.row(i), &mut buf);
            out.push(&buf, self.colors[i], self.weights[i], self.ids[i]);
        }
        out
    }

    fn gather(&self, rows: impl ExactSizeIterator<Item = usize>) -> Self {
        let mut out = PointBlock::with_capacity(self.dims, rows.len());
        for i in rows {
            out.push(self.row(i), self.colors[i], self.weights[i], self.ids[i]);
        }
        out
    }
}
