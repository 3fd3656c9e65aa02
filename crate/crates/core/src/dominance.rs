//! d-dimensional dominance frequency reporting with an s-ary strip tree.
//!
//! The tree partitions its points by the first coordinate into `s` strips
//! per node. For strip `i` the node keeps a (d-1)-dimensional structure over
//! `L_i`, the node's points left of strip `i`, with the first coordinate
//! dropped. A query walks the root-to-leaf path towards its first
//! coordinate, asking each `L_i` on the way with the remaining coordinates
//! and merging the partial answers in the session accumulator. In one
//! dimension the structure is a single [`Freq1D`].

use crate::accumulator::QuerySession;
use crate::error::{Error, Result};
use crate::freq1d::Freq1D;
use crate::par;
use crate::rank::{PointBlock, RankSpace};
use crate::types::{color_count, validate_points, BoxQuery, ColoredPoint, FrequencyList, Weight};

/// Leaves hold at most `max(fanout, DEFAULT_MIN_LEAF)` points unless a leaf
/// size is given explicitly.
pub const DEFAULT_MIN_LEAF: usize = 32;

/// Build parameters shared by the tree structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub fanout: usize,
    pub leaf_size: Option<usize>,
}

impl TreeParams {
    pub fn new(fanout: usize) -> Self {
        TreeParams {
            fanout,
            leaf_size: None,
        }
    }

    pub fn with_leaf_size(mut self, leaf_size: usize) -> Self {
        self.leaf_size = Some(leaf_size);
        self
    }

    /// Largest point count stored as a flat leaf.
    pub fn leaf_threshold(&self) -> usize {
        self.leaf_size
            .unwrap_or_else(|| self.fanout.max(DEFAULT_MIN_LEAF))
            .max(1)
    }

    /// `fanout` must lie in `[2, max(n, 2)]`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.fanout < 2 || self.fanout > n.max(2) {
            return Err(Error::InvalidParameter(format!(
                "fanout {} outside [2, {}]",
                self.fanout,
                n.max(2)
            )));
        }
        if self.leaf_size == Some(0) {
            return Err(Error::InvalidParameter("leaf size must be positive".into()));
        }
        Ok(())
    }
}

/// Instrumentation snapshot of a built tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeStats {
    /// Mapped points held by all nested one-dimensional structures.
    pub stored_entries: u64,
    /// Node levels of the outermost strip tree.
    pub height: usize,
    /// Nodes of the outermost strip tree.
    pub node_count: usize,
    /// Comparisons and scan steps spent building, nested structures included.
    pub build_ops: u64,
    /// Points kept in flat leaf lists, nested structures included.
    pub leaf_points: u64,
}

#[derive(Debug, Clone)]
enum NodeKind<W> {
    Leaf(PointBlock<W>),
    Internal {
        // last first-axis key of each child strip
        child_last: Vec<u32>,
        children: Vec<StripNode<W>>,
        // prefixes[i - 1] is built over the points of children[..i]
        prefixes: Vec<DominanceTree<W>>,
    },
}

#[derive(Debug, Clone)]
struct StripNode<W> {
    first: u32,
    kind: NodeKind<W>,
}

#[derive(Debug, Clone)]
enum Root<W> {
    Empty,
    Line(Freq1D<W>),
    Strips(StripNode<W>),
}

/// Dominance structure over rank-space coordinates.
#[derive(Debug, Clone)]
pub struct DominanceTree<W> {
    dims: usize,
    root: Root<W>,
    stats: TreeStats,
}

/// The part of an answer contributed by one node of the query path.
#[derive(Debug, Clone)]
pub struct PathPart<W> {
    pub depth: usize,
    /// Strip index queried at an internal node, `None` for the leaf scan.
    pub strip: Option<usize>,
    pub answer: FrequencyList<W>,
}

impl<W: Weight> DominanceTree<W> {
    pub(crate) fn build_block(block: PointBlock<W>, params: &TreeParams) -> Self {
        let dims = block.dims();
        let n = block.len();
        if n == 0 {
            return DominanceTree {
                dims,
                root: Root::Empty,
                stats: TreeStats::default(),
            };
        }
        if dims == 1 {
            let line = Freq1D::from_block(&block, false);
            let stats = TreeStats {
                stored_entries: line.len() as u64,
                build_ops: line.build_ops(),
                ..TreeStats::default()
            };
            return DominanceTree {
                dims,
                root: Root::Line(line),
                stats,
            };
        }
        let mut ops = 0u64;
        let sorted = block.sorted_by_axis(0, &mut ops);
        let (root, mut stats) = build_node(&sorted, 0, n, params);
        stats.build_ops += ops;
        DominanceTree {
            dims,
            root: Root::Strips(root),
            stats,
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn stats(&self) -> TreeStats {
        self.stats
    }

    /// Adds the answer for corner `q` (rank space, `-1` allowed) to the
    /// session accumulator.
    pub(crate) fn report(&self, q: &[i64], session: &mut QuerySession<W>) {
        debug_assert_eq!(q.len(), self.dims);
        match &self.root {
            Root::Empty => {}
            Root::Line(line) => line.report_prefix(q[0], session),
            Root::Strips(node) => node.report(q, session),
        }
    }

    fn explain(&self, q: &[i64], colors: usize) -> Vec<PathPart<W>> {
        let mut parts = Vec::new();
        let mut session = QuerySession::new(colors);
        let mut node = match &self.root {
            Root::Empty => return parts,
            Root::Line(line) => {
                line.report_prefix(q[0], &mut session);
                parts.push(PathPart {
                    depth: 0,
                    strip: None,
                    answer: session.acc.drain_and_reset(),
                });
                return parts;
            }
            Root::Strips(node) => node,
        };
        let mut depth = 0;
        loop {
            if (q[0]) < node.first as i64 {
                return parts;
            }
            match &node.kind {
                NodeKind::Leaf(block) => {
                    scan_leaf(block, q, &mut session);
                    parts.push(PathPart {
                        depth,
                        strip: None,
                        answer: session.acc.drain_and_reset(),
                    });
                    return parts;
                }
                NodeKind::Internal {
                    child_last,
                    children,
                    prefixes,
                } => {
                    let i = strip_of(child_last, q[0]);
                    if i > 0 {
                        prefixes[i - 1].report(&q[1..], &mut session);
                        parts.push(PathPart {
                            depth,
                            strip: Some(i),
                            answer: session.acc.drain_and_reset(),
                        });
                    }
                    node = &children[i];
                    depth += 1;
                }
            }
        }
    }
}

/// Index of the child strip containing first-axis key `x`.
#[inline]
pub(crate) fn strip_of(child_last: &[u32], x: i64) -> usize {
    child_last
        .partition_point(|&l| (l as i64) < x)
        .min(child_last.len() - 1)
}

pub(crate) fn scan_leaf<W: Weight>(block: &PointBlock<W>, q: &[i64], session: &mut QuerySession<W>) {
    session.probes.leaf_scans += 1;
    session.probes.leaf_points += block.len() as u64;
    session.acc.begin_source();
    for i in 0..block.len() {
        if block.row(i).iter().zip(q).all(|(&c, &b)| (c as i64) <= b) {
            session.acc.add(block.color(i), block.weight(i));
        }
    }
}

impl<W: Weight> StripNode<W> {
    fn report(&self, q: &[i64], session: &mut QuerySession<W>) {
        let mut node = self;
        loop {
            session.probes.path_nodes += 1;
            if q[0] < node.first as i64 {
                return;
            }
            match &node.kind {
                NodeKind::Leaf(block) => {
                    scan_leaf(block, q, session);
                    return;
                }
                NodeKind::Internal {
                    child_last,
                    children,
                    prefixes,
                } => {
                    let i = strip_of(child_last, q[0]);
                    if i > 0 {
                        prefixes[i - 1].report(&q[1..], session);
                    }
                    node = &children[i];
                }
            }
        }
    }
}

/// Start offsets of `k` near-equal chunks of `start..end`, plus `end`.
pub(crate) fn chunk_starts(start: usize, end: usize, k: usize) -> Vec<usize> {
    let len = end - start;
    let (base, rem) = (len / k, len % k);
    (0..=k).map(|i| start + i * base + i.min(rem)).collect()
}

fn build_node<W: Weight>(
    sorted: &PointBlock<W>,
    start: usize,
    end: usize,
    params: &TreeParams,
) -> (StripNode<W>, TreeStats) {
    let len = end - start;
    let first = sorted.coord(start, 0);
    if len <= params.leaf_threshold() {
        let stats = TreeStats {
            height: 1,
            node_count: 1,
            leaf_points: len as u64,
            ..TreeStats::default()
        };
        return (
            StripNode {
                first,
                kind: NodeKind::Leaf(sorted.slice(start..end)),
            },
            stats,
        );
    }
    let k = params.fanout.min(len);
    let starts = chunk_starts(start, end, k);
    let (children, prefixes) = par::join(
        || par::map_range(k, |i| build_node(sorted, starts[i], starts[i + 1], params)),
        || {
            par::map_range(k - 1, |i| {
                DominanceTree::build_block(sorted.project_tail(start..starts[i + 1]), params)
            })
        },
    );
    let child_last = (0..k).map(|i| sorted.coord(starts[i + 1] - 1, 0)).collect();

    let mut stats = TreeStats {
        node_count: 1,
        build_ops: len as u64,
        ..TreeStats::default()
    };
    let mut child_nodes = Vec::with_capacity(k);
    for (child, cs) in children {
        stats.height = stats.height.max(cs.height);
        stats.node_count += cs.node_count;
        stats.stored_entries += cs.stored_entries;
        stats.build_ops += cs.build_ops;
        stats.leaf_points += cs.leaf_points;
        child_nodes.push(child);
    }
    stats.height += 1;
    for p in &prefixes {
        stats.stored_entries += p.stats.stored_entries;
        stats.build_ops += p.stats.build_ops;
        stats.leaf_points += p.stats.leaf_points;
    }
    (
        StripNode {
            first,
            kind: NodeKind::Internal {
                child_last,
                children: child_nodes,
                prefixes,
            },
        },
        stats,
    )
}

/// Dominance index over real coordinates.
#[derive(Debug, Clone)]
pub struct DominanceIndex<W> {
    ranks: RankSpace,
    tree: DominanceTree<W>,
    colors: usize,
    params: TreeParams,
}

/// Builds the strip tree over `points`.
pub fn build_dominance<W: Weight>(
    points: &[ColoredPoint<W>],
    dims: usize,
    params: TreeParams,
) -> Result<DominanceIndex<W>> {
    if dims == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    params.validate(points.len())?;
    validate_points(points, dims)?;
    let ranks = RankSpace::new(points, dims);
    let tree = DominanceTree::build_block(ranks.block(points), &params);
    Ok(DominanceIndex {
        ranks,
        tree,
        colors: color_count(points),
        params,
    })
}

impl<W: Weight> DominanceIndex<W> {
    pub fn tree(&self) -> &DominanceTree<W> {
        &self.tree
    }

    pub fn stats(&self) -> TreeStats {
        self.tree.stats()
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn dims(&self) -> usize {
        self.ranks.dims()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn session(&self) -> QuerySession<W> {
        QuerySession::new(self.colors)
    }

    fn corner(&self, q: &BoxQuery) -> Result<Option<Vec<i64>>> {
        if !q.is_dominance() {
            return Err(Error::UnsupportedShape(
                "dominance index answers (-inf, x] bounds only".into(),
            ));
        }
        let ranges = self.ranks.query_ranges(q)?;
        if ranges.iter().any(|r| r.is_empty()) {
            return Ok(None);
        }
        Ok(Some(ranges.iter().map(|r| r.hi).collect()))
    }

    pub fn query(&self, q: &BoxQuery) -> Result<FrequencyList<W>> {
        let mut session = self.session();
        self.query_with(q, &mut session)
    }

    pub fn query_with(&self, q: &BoxQuery, session: &mut QuerySession<W>) -> Result<FrequencyList<W>> {
        if let Some(corner) = self.corner(q)? {
            self.tree.report(&corner, session);
        }
        Ok(session.acc.drain_and_reset())
    }

    /// Partial answers of every node on the query path, outermost tree only.
    pub fn explain(&self, q: &BoxQuery) -> Result<Vec<PathPart<W>>> {
        Ok(match self.corner(q)? {
            Some(corner) => self.tree.explain(&corner, self.colors),
            None => Vec::new(),
        })
    }
}

/// `ceil(log_s n)`, at least 1 for `n >= 2`.
pub fn ceil_log(s: usize, n: usize) -> usize {
    let mut levels = 0;
    let mut reach = 1usize;
    while reach < n {
        reach = reach.saturating_mul(s);
        levels += 1;
    }
    levels
}

/// `n ((s-1)(ceil(log_s n) + 1))^(d-1)`: stored entry bound of a d-dimensional tree.
pub fn stored_entries_bound(n: usize, s: usize, d: usize) -> u64 {
    let per_dim = ((s - 1) * (ceil_log(s, n) + 1)) as u64;
    n as u64 * per_dim.pow(d.saturating_sub(1) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ColorId, Count};

    fn grid(n: usize, dims: usize) -> Vec<ColoredPoint<Count>> {
        (0..n)
            .map(|i| {
                let coords = (0..dims).map(|a| ((i * (a + 3) * 7919) % 1009) as f64).collect();
                ColoredPoint::counted(coords, (i % 5) as u32)
            })
            .collect()
    }

    #[test]
    fn sixteen_points_fanout_four() {
        let pts = grid(16, 2);
        let idx = build_dominance(&pts, 2, TreeParams::new(4).with_leaf_size(4)).unwrap();
        let st = idx.stats();
        assert_eq!(st.height, 2);
        assert_eq!(st.node_count, 5);
        // L_2, L_3, L_4 at the root hold 4 + 8 + 12 points
        assert_eq!(st.stored_entries, 24);
        assert!(st.stored_entries <= stored_entries_bound(16, 4, 2));
        assert_eq!(stored_entries_bound(16, 4, 2), 144);
    }

    #[test]
    fn singleton_is_a_leaf() {
        for d in 1..=3 {
            let pts = grid(1, d);
            let idx = build_dominance(&pts, d, TreeParams::new(2)).unwrap();
            let st = idx.stats();
            if d == 1 {
                assert_eq!(st.stored_entries, 1);
            } else {
                assert_eq!((st.height, st.node_count, st.stored_entries), (1, 1, 0));
            }
            let all = idx.query(&BoxQuery::dominance(&vec![2000.0; d])).unwrap();
            assert_eq!(all.total(), 1);
        }
    }

    #[test]
    fn one_dimension_is_a_line() {
        let pts = grid(50, 1);
        let idx = build_dominance(&pts, 1, TreeParams::new(4)).unwrap();
        assert_eq!(idx.stats().stored_entries, 50);
        assert_eq!(idx.stats().height, 0);
    }

    #[test]
    fn empty_tree_stats_are_zero() {
        let idx = build_dominance::<Count>(&[], 2, TreeParams::new(2)).unwrap();
        assert_eq!(idx.stats(), TreeStats::default());
        assert!(idx.query(&BoxQuery::dominance(&[1.0, 1.0])).unwrap().is_empty());
    }

    #[test]
    fn fanout_out_of_range() {
        let pts = grid(10, 2);
        assert!(matches!(
            build_dominance(&pts, 2, TreeParams::new(1)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            build_dominance(&pts, 2, TreeParams::new(11)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(build_dominance(&pts, 2, TreeParams::new(10)).is_ok());
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let pts = vec![
            ColoredPoint::counted(vec![1.0, 2.0], 0),
            ColoredPoint::counted(vec![1.0], 0),
        ];
        assert!(matches!(
            build_dominance(&pts, 2, TreeParams::new(2)),
            Err(Error::MalformedInput(_))
        ));
    }

    #[test]
    fn query_dimension_mismatch() {
        let idx = build_dominance(&grid(10, 2), 2, TreeParams::new(2)).unwrap();
        assert!(matches!(
            idx.query(&BoxQuery::dominance(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn corner_below_everything() {
        let idx = build_dominance(&grid(100, 2), 2, TreeParams::new(3).with_leaf_size(2)).unwrap();
        assert!(idx.query(&BoxQuery::dominance(&[-1.0, 5000.0])).unwrap().is_empty());
        assert!(idx.query(&BoxQuery::dominance(&[5000.0, -1.0])).unwrap().is_empty());
    }

    #[test]
    fn figure_one_instance() {
        // 4 red and 3 blue inside (-inf, 10] x (-inf, 10], green and purple outside
        let (red, blue, green, purple) = (0, 1, 2, 3);
        let pts = vec![
            ColoredPoint::counted(vec![1.0, 2.0], red),
            ColoredPoint::counted(vec![3.0, 7.0], red),
            ColoredPoint::counted(vec![6.0, 1.0], red),
            ColoredPoint::counted(vec![9.0, 9.0], red),
            ColoredPoint::counted(vec![2.0, 5.0], blue),
            ColoredPoint::counted(vec![5.0, 4.0], blue),
            ColoredPoint::counted(vec![8.0, 3.0], blue),
            ColoredPoint::counted(vec![12.0, 2.0], green),
            ColoredPoint::counted(vec![4.0, 14.0], purple),
        ];
        let want: FrequencyList<Count> =
            [(ColorId(red), Count(4)), (ColorId(blue), Count(3))].into_iter().collect();
        for s in [2, 3, 9] {
            let idx = build_dominance(&pts, 2, TreeParams::new(s).with_leaf_size(1)).unwrap();
            assert_eq!(idx.query(&BoxQuery::dominance(&[10.0, 10.0])).unwrap(), want);
        }
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(4, 16), 2);
        assert_eq!(ceil_log(4, 17), 3);
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 2), 1);
        assert_eq!(ceil_log(45, 2000), 2);
    }

    #[test]
    fn chunks_are_near_equal() {
        assert_eq!(chunk_starts(0, 10, 4), vec![0, 3, 6, 8, 10]);
        assert_eq!(chunk_starts(5, 9, 4), vec![5, 6, 7, 8, 9]);
    }
}
