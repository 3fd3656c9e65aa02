//! One-dimensional color frequency reporting.
//!
//! The i-th point `x_i` of every color is mapped to `(x_i, x_{i+1})`
//! carrying the combined weight of the first `i` points of that color. The
//! quadrant `x <= q < succ` then holds exactly one mapped point per color
//! present in `(-inf, q]`, namely the rightmost one, whose prefix weight is
//! the answer for that color. Mapped points sit in a priority search tree
//! keyed on x with the successor as priority.
//!
//! Two-sided intervals use a second tree over the leftmost-point transform
//! `(x_i, x_{i-1})` and report prefix differences, which needs a group.

mod pst;

use std::collections::HashMap;

use crate::accumulator::QuerySession;
use crate::error::{Error, Operation, Result};
use crate::rank::{PointBlock, RankMap};
use crate::types::{ColorId, FrequencyList, Weight};

pub(crate) use pst::PrioritySearchTree;

/// The successor transform of one input point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint<W> {
    /// Local rank of the point.
    pub x: u32,
    /// Local rank of the next point of the same color, or `len` if none.
    pub succ: u32,
    pub color: ColorId,
    /// Weight of this point alone.
    pub weight: W,
    /// Combined weight of this point and its predecessors of the same color.
    pub prefix: W,
}

/// Frequency structure over integer keys (ranks in some enclosing space).
#[derive(Debug, Clone)]
pub struct Freq1D<W> {
    keys: Vec<u32>,
    mapped: Vec<MappedPoint<W>>,
    by_successor: PrioritySearchTree,
    by_predecessor: Option<PrioritySearchTree>,
    build_ops: u64,
}

impl<W: Weight> Freq1D<W> {
    pub(crate) fn from_block(block: &PointBlock<W>, with_intervals: bool) -> Self {
        assert_eq!(block.dims(), 1);
        let n = block.len();
        let mut ops = 0u64;
        let sorted = block.sorted_by_axis(0, &mut ops);
        let keys: Vec<u32> = (0..n).map(|i| sorted.coord(i, 0)).collect();

        let mut last_of_color: HashMap<ColorId, u32> = HashMap::new();
        let mut mapped: Vec<MappedPoint<W>> = Vec::with_capacity(n);
        let mut pred = vec![-1i64; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let color = sorted.color(i);
            let weight = sorted.weight(i);
            let prefix = match last_of_color.insert(color, i as u32) {
                Some(prev) => {
                    mapped[prev as usize].succ = i as u32;
                    pred[i] = prev as i64;
                    mapped[prev as usize].prefix.combine(weight)
                }
                None => weight,
            };
            mapped.push(MappedPoint {
                x: i as u32,
                succ: n as u32,
                color,
                weight,
                prefix,
            });
        }
        ops += n as u64;

        let succ_prio: Vec<i64> = mapped.iter().map(|m| m.succ as i64).collect();
        let by_successor = PrioritySearchTree::build(&succ_prio, &mut ops);
        let by_predecessor = with_intervals.then(|| {
            let prio: Vec<i64> = pred.iter().map(|&p| -p).collect();
            PrioritySearchTree::build(&prio, &mut ops)
        });
        Freq1D {
            keys,
            mapped,
            by_successor,
            by_predecessor,
            build_ops: ops,
        }
    }

    pub fn len(&self) -> usize {
        self.mapped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapped.is_empty()
    }

    /// Mapped points in key order.
    pub fn mapped(&self) -> &[MappedPoint<W>] {
        &self.mapped
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    /// Comparisons and scan steps spent building.
    pub fn build_ops(&self) -> u64 {
        self.build_ops
    }

    pub fn supports_intervals(&self) -> bool {
        self.by_predecessor.is_some() && W::invertible()
    }

    /// Adds the per-color totals of keys `<= q` to the session accumulator.
    pub(crate) fn report_prefix(&self, q: i64, session: &mut QuerySession<W>) {
        session.probes.line_queries += 1;
        session.acc.begin_source();
        let t = self.keys.partition_point(|&k| (k as i64) <= q);
        if t == 0 {
            return;
        }
        let QuerySession { acc, probes } = session;
        self.by_successor
            .query(0, t as u32 - 1, t as i64, &mut probes.index_probes, &mut |x| {
                let m = &self.mapped[x as usize];
                acc.add(m.color, m.prefix);
            });
    }

    /// Adds the per-color totals of keys in `[lo, hi]`.
    pub(crate) fn report_interval(
        &self,
        lo: i64,
        hi: i64,
        session: &mut QuerySession<W>,
    ) -> Result<()> {
        let by_pred = match &self.by_predecessor {
            Some(p) if W::invertible() => p,
            _ => return Err(Error::Unsupported(Operation::IntervalWithoutInverse)),
        };
        session.probes.line_queries += 1;
        session.acc.begin_source();
        let a = self.keys.partition_point(|&k| (k as i64) < lo);
        let end = self.keys.partition_point(|&k| (k as i64) <= hi);
        if a >= end {
            return Ok(());
        }
        let (a, b) = (a as u32, end as u32 - 1);
        let QuerySession { acc, probes } = session;
        // rightmost point of each color in range: prefix at hi
        self.by_successor
            .query(a, b, end as i64, &mut probes.index_probes, &mut |x| {
                let m = &self.mapped[x as usize];
                acc.add(m.color, m.prefix);
            });
        // leftmost point of each color in range: subtract what lies before it
        by_pred.query(a, b, 1 - a as i64, &mut probes.index_probes, &mut |x| {
            let m = &self.mapped[x as usize];
            let before = m
                .prefix
                .difference(m.weight)
                .expect("group weights have differences");
            if !before.is_identity() {
                acc.subtract(m.color, before);
            }
        });
        Ok(())
    }
}

/// A one-dimensional index over real coordinates.
#[derive(Debug, Clone)]
pub struct LineIndex<W> {
    ranks: RankMap,
    inner: Freq1D<W>,
    colors: usize,
}

/// Builds the one-dimensional structure. The interval index is added when
/// the weights are invertible.
pub fn build_1d<W: Weight>(points: &[(f64, ColorId, W)]) -> Result<LineIndex<W>> {
    if let Some((i, _)) = points.iter().enumerate().find(|(_, p)| !p.0.is_finite()) {
        return Err(Error::MalformedInput(format!("point {i} has a non-finite coordinate")));
    }
    let values: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ranks = RankMap::from_values(&values);
    let mut block = PointBlock::with_capacity(1, points.len());
    for (i, &(_, c, w)) in points.iter().enumerate() {
        block.push(&[ranks.rank(i)], c, w, i as u32);
    }
    let colors = points.iter().map(|p| p.1.index() + 1).max().unwrap_or(0);
    Ok(LineIndex {
        inner: Freq1D::from_block(&block, W::invertible()),
        ranks,
        colors,
    })
}

impl<W: Weight> LineIndex<W> {
    pub fn structure(&self) -> &Freq1D<W> {
        &self.inner
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn session(&self) -> QuerySession<W> {
        QuerySession::new(self.colors)
    }

    /// Per color, the chain `(x_i, x_{i+1})` with prefix weights, in real
    /// coordinates; `None` marks the missing successor.
    pub fn chains(&self) -> Vec<Vec<(f64, Option<f64>, W)>> {
        let mut out = vec![Vec::new(); self.colors];
        let n = self.inner.len() as u32;
        for m in self.inner.mapped() {
            let x = self.ranks.value_at(self.inner.keys[m.x as usize] as usize);
            let succ = (m.succ < n)
                .then(|| self.ranks.value_at(self.inner.keys[m.succ as usize] as usize));
            out[m.color.index()].push((x, succ, m.prefix));
        }
        out
    }

    pub fn query_prefix(&self, q: f64) -> FrequencyList<W> {
        let mut session = self.session();
        self.query_prefix_with(q, &mut session)
    }

    pub fn query_prefix_with(&self, q: f64, session: &mut QuerySession<W>) -> FrequencyList<W> {
        let key = self.ranks.count_le(q) as i64 - 1;
        self.inner.report_prefix(key, session);
        session.acc.drain_and_reset()
    }

    pub fn query_interval(&self, lo: f64, hi: f64) -> Result<FrequencyList<W>> {
        let mut session = self.session();
        self.query_interval_with(lo, hi, &mut session)
    }

    pub fn query_interval_with(
        &self,
        lo: f64,
        hi: f64,
        session: &mut QuerySession<W>,
    ) -> Result<FrequencyList<W>> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::MalformedQuery(format!("interval [{lo}, {hi}]")));
        }
        let a = self.ranks.count_lt(lo) as i64;
        let b = self.ranks.count_le(hi) as i64 - 1;
        self.inner.report_interval(a, b, session)?;
        Ok(session.acc.drain_and_reset())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Count, MaxWeight};

    const RED: ColorId = ColorId(0);
    const BLUE: ColorId = ColorId(1);

    fn sample() -> LineIndex<Count> {
        let pts = [(1.0, RED), (2.0, BLUE), (3.0, RED), (5.0, RED), (7.0, BLUE)];
        build_1d(&pts.map(|(x, c)| (x, c, Count(1)))).unwrap()
    }

    fn fl(e: &[(ColorId, u64)]) -> FrequencyList<Count> {
        e.iter().map(|&(c, w)| (c, Count(w))).collect()
    }

    #[test]
    fn chains_follow_the_successor_transform() {
        let pts = [(1.0, RED), (3.0, RED), (5.0, RED), (2.0, BLUE), (7.0, BLUE)];
        let line = build_1d(&pts.map(|(x, c)| (x, c, Count(1)))).unwrap();
        let chains = line.chains();
        assert_eq!(
            chains[0],
            vec![
                (1.0, Some(3.0), Count(1)),
                (3.0, Some(5.0), Count(2)),
                (5.0, None, Count(3))
            ]
        );
        assert_eq!(
            chains[1],
            vec![(2.0, Some(7.0), Count(1)), (7.0, None, Count(2))]
        );
    }

    #[test]
    fn singleton_chain() {
        let line = build_1d(&[(4.0, RED, Count(1))]).unwrap();
        assert_eq!(line.chains()[0], vec![(4.0, None, Count(1))]);
        let m = line.structure().mapped()[0];
        assert_eq!((m.x, m.succ), (0, 1));
    }

    #[test]
    fn empty_structure() {
        let line = build_1d::<Count>(&[]).unwrap();
        assert!(line.structure().is_empty());
        assert!(line.query_prefix(3.0).is_empty());
        assert!(line.query_interval(0.0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn prefix_queries() {
        let line = sample();
        assert_eq!(line.query_prefix(5.0), fl(&[(RED, 3), (BLUE, 1)]));
        assert!(line.query_prefix(0.0).is_empty());
        assert_eq!(line.query_prefix(7.0), fl(&[(RED, 3), (BLUE, 2)]));
    }

    #[test]
    fn interval_queries() {
        let line = sample();
        assert_eq!(line.query_interval(2.0, 6.0).unwrap(), fl(&[(RED, 2), (BLUE, 1)]));
        assert!(line.query_interval(4.0, 4.0).unwrap().is_empty());
        assert_eq!(
            line.query_interval(-10.0, 10.0).unwrap(),
            fl(&[(RED, 3), (BLUE, 2)])
        );
    }

    #[test]
    fn interval_rejected_without_inverse() {
        let line = build_1d(&[(1.0, RED, MaxWeight(4))]).unwrap();
        assert_eq!(
            line.query_interval(0.0, 2.0),
            Err(Error::Unsupported(Operation::IntervalWithoutInverse))
        );
        assert_eq!(line.query_prefix(2.0).get(RED), Some(MaxWeight(4)));
    }

    #[test]
    fn inverted_interval_is_malformed() {
        assert!(matches!(
            sample().query_interval(3.0, 1.0),
            Err(Error::MalformedQuery(_))
        ));
    }

    #[test]
    fn duplicates_are_closed() {
        let pts = [(2.0, RED), (2.0, RED), (2.0, BLUE), (5.0, RED)];
        let line = build_1d(&pts.map(|(x, c)| (x, c, Count(1)))).unwrap();
        assert_eq!(line.query_prefix(2.0), fl(&[(RED, 2), (BLUE, 1)]));
        assert_eq!(line.query_interval(2.0, 2.0).unwrap(), fl(&[(RED, 2), (BLUE, 1)]));
        assert_eq!(line.query_interval(2.5, 5.0).unwrap(), fl(&[(RED, 1)]));
    }
}
