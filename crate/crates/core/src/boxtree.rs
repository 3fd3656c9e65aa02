//! General box queries by adding second bounds one axis at a time.
//!
//! For an axis that must be bounded on both sides, a balanced binary tree is
//! built on that axis. Each internal node `u` with split key `x_u` keeps two
//! structures of one fewer two-sided axis: one over the left child's points
//! queried with `[x1, +inf)` and one over the right child's points queried
//! with `(-inf, x2]`. A query `[x1, x2]` is answered at the highest node whose
//! split lies in the range, by combining the two one-sided answers in the
//! shared accumulator. No answers are ever subtracted, so semigroup weights
//! work on every shape.
//!
//! Once every two-sided axis has been layered, the innermost structures are
//! dominance trees over coordinates reflected on the lower-bounded axes.

use crate::accumulator::{AccumulatorCounters, ProbeCounters, QuerySession};
use crate::dominance::{DominanceTree, TreeParams};
use crate::error::{Error, Result};
use crate::par;
use crate::rank::{PointBlock, RankRange, RankSpace};
use crate::types::{color_count, validate_points, BoxQuery, ColoredPoint, FrequencyList, Side, Weight};

/// Binary split skeleton over points sorted by one axis. Leaves hold at most
/// `leaf` points; every internal node has two non-empty children.
#[derive(Debug, Clone)]
pub(crate) struct SplitSkeleton {
    pub nodes: Vec<SplitNode>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitNode {
    pub start: usize,
    pub end: usize,
    /// Last key of the left child.
    pub split: u32,
    pub children: Option<(usize, usize)>,
}

/// Where a two-sided range `[a, b]` resolves in the skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Located {
    Leaf(usize),
    Split(usize),
}

impl SplitSkeleton {
    /// `keys` are the sorted keys of the points; node 0 is the root.
    pub fn build(keys: &[u32], leaf: usize) -> Self {
        let mut nodes = Vec::new();
        if !keys.is_empty() {
            Self::build_rec(keys, 0, keys.len(), leaf.max(1), &mut nodes);
        }
        SplitSkeleton { nodes }
    }

    fn build_rec(keys: &[u32], start: usize, end: usize, leaf: usize, nodes: &mut Vec<SplitNode>) -> usize {
        let idx = nodes.len();
        nodes.push(SplitNode {
            start,
            end,
            split: keys[end - 1],
            children: None,
        });
        if end - start > leaf {
            let mid = start + (end - start).div_ceil(2);
            nodes[idx].split = keys[mid - 1];
            let l = Self::build_rec(keys, start, mid, leaf, nodes);
            let r = Self::build_rec(keys, mid, end, leaf, nodes);
            nodes[idx].children = Some((l, r));
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Internal node levels below and including the root.
    #[cfg(test)]
    pub fn internal_levels(&self) -> usize {
        fn h(s: &SplitSkeleton, n: usize) -> usize {
            match s.nodes[n].children {
                None => 0,
                Some((l, r)) => 1 + h(s, l).max(h(s, r)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            h(self, 0)
        }
    }

    /// Highest node whose split separates `a` from `b`, or the leaf the
    /// whole range falls into.
    pub fn locate(&self, a: i64, b: i64) -> Located {
        let mut n = 0;
        loop {
            let node = &self.nodes[n];
            match node.children {
                None => return Located::Leaf(n),
                Some((l, r)) => {
                    let split = node.split as i64;
                    if b <= split {
                        n = l;
                    } else if a > split {
                        n = r;
                    } else {
                        return Located::Split(n);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum LayerNode<W> {
    Leaf(PointBlock<W>),
    Split {
        // left child's points, queried [x1, +inf)
        below: BoxNode<W>,
        // right child's points, queried (-inf, x2]
        above: BoxNode<W>,
    },
}

#[derive(Debug, Clone)]
struct Layer<W> {
    axis: usize,
    skeleton: SplitSkeleton,
    nodes: Vec<LayerNode<W>>,
    // whole-set structures for queries one-sided on this axis
    full_upper: Option<BoxNode<W>>,
    full_lower: Option<BoxNode<W>>,
}

#[derive(Debug, Clone)]
enum BoxNode<W> {
    Dominance {
        tree: DominanceTree<W>,
        orient: Vec<Side>,
    },
    Layer(Box<Layer<W>>),
}

/// Instrumentation snapshot of a box structure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoxStats {
    /// Mapped points over all nested dominance trees.
    pub stored_entries: u64,
    /// Flat leaf points, in layer leaves and nested trees.
    pub leaf_points: u64,
    /// Number of two-sided axes.
    pub layers: usize,
    /// Dominance trees built.
    pub dominance_structures: u64,
    pub build_ops: u64,
}

impl std::ops::AddAssign for BoxStats {
    fn add_assign(&mut self, o: Self) {
        self.stored_entries += o.stored_entries;
        self.leaf_points += o.leaf_points;
        self.dominance_structures += o.dominance_structures;
        self.build_ops += o.build_ops;
        self.layers = self.layers.max(o.layers);
    }
}

/// Context shared by every nested build.
struct BuildCtx<'a> {
    params: &'a TreeParams,
    // global point count; reflection maps rank r to universe - 1 - r
    universe: u32,
}

impl<W: Weight> BoxNode<W> {
    fn build(block: PointBlock<W>, sides: &[Side], ctx: &BuildCtx<'_>) -> (Self, BoxStats) {
        match sides.iter().position(|&s| s == Side::Both) {
            None => {
                let top = ctx.universe - 1;
                let oriented = block.map_rows(block.dims(), |row, out| {
                    for ((o, &c), side) in out.iter_mut().zip(row).zip(sides) {
                        *o = if *side == Side::Lower { top - c } else { c };
                    }
                });
                let tree = DominanceTree::build_block(oriented, ctx.params);
                let ts = tree.stats();
                let stats = BoxStats {
                    stored_entries: ts.stored_entries,
                    leaf_points: ts.leaf_points,
                    layers: 0,
                    dominance_structures: 1,
                    build_ops: ts.build_ops,
                };
                (
                    BoxNode::Dominance {
                        tree,
                        orient: sides.to_vec(),
                    },
                    stats,
                )
            }
            Some(axis) => {
                let (layer, stats) = Layer::build(block, axis, sides, ctx);
                (BoxNode::Layer(Box::new(layer)), stats)
            }
        }
    }

    fn report(&self, ranges: &[RankRange], top: i64, session: &mut QuerySession<W>) {
        match self {
            BoxNode::Dominance { tree, orient } => {
                session.probes.dominance_queries += 1;
                let corner: Vec<i64> = ranges
                    .iter()
                    .zip(orient)
                    .map(|(r, side)| match side {
                        Side::Lower => top - r.lo,
                        _ => r.hi,
                    })
                    .collect();
                tree.report(&corner, session);
            }
            BoxNode::Layer(layer) => layer.report(ranges, top, session),
        }
    }
}

fn with_side(sides: &[Side], axis: usize, side: Side) -> Vec<Side> {
    let mut s = sides.to_vec();
    s[axis] = side;
    s
}

fn with_range(ranges: &[RankRange], axis: usize, r: RankRange) -> Vec<RankRange> {
    let mut v = ranges.to_vec();
    v[axis] = r;
    v
}

impl<W: Weight> Layer<W> {
    fn build(block: PointBlock<W>, axis: usize, sides: &[Side], ctx: &BuildCtx<'_>) -> (Self, BoxStats) {
        let mut ops = 0u64;
        let sorted = block.sorted_by_axis(axis, &mut ops);
        let keys: Vec<u32> = (0..sorted.len()).map(|i| sorted.coord(i, axis)).collect();
        let skeleton = SplitSkeleton::build(&keys, ctx.params.leaf_threshold());
        let lower = with_side(sides, axis, Side::Lower);
        let upper = with_side(sides, axis, Side::Upper);

        let built = par::map_range(skeleton.len(), |n| {
            let node = skeleton.nodes[n];
            match node.children {
                None => {
                    let leaf = sorted.slice(node.start..node.end);
                    let stats = BoxStats {
                        leaf_points: leaf.len() as u64,
                        ..BoxStats::default()
                    };
                    (LayerNode::Leaf(leaf), stats)
                }
                Some((l, r)) => {
                    let (ln, rn) = (skeleton.nodes[l], skeleton.nodes[r]);
                    let ((below, bs), (above, us)) = par::join(
                        || BoxNode::build(sorted.slice(ln.start..ln.end), &lower, ctx),
                        || BoxNode::build(sorted.slice(rn.start..rn.end), &upper, ctx),
                    );
                    let mut stats = bs;
                    stats += us;
                    (LayerNode::Split { below, above }, stats)
                }
            }
        });
        let mut stats = BoxStats {
            build_ops: ops,
            ..BoxStats::default()
        };
        let mut nodes = Vec::with_capacity(built.len());
        for (node, s) in built {
            stats += s;
            nodes.push(node);
        }

        let root_is_leaf = skeleton.nodes.first().is_none_or(|n| n.children.is_none());
        let (full_upper, full_lower) = if root_is_leaf {
            (None, None)
        } else {
            let ((fu, fus), (fl, fls)) = par::join(
                || BoxNode::build(sorted.clone(), &upper, ctx),
                || BoxNode::build(sorted.clone(), &lower, ctx),
            );
            stats += fus;
            stats += fls;
            (Some(fu), Some(fl))
        };
        stats.layers = sides.iter().filter(|&&s| s == Side::Both).count();
        (
            Layer {
                axis,
                skeleton,
                nodes,
                full_upper,
                full_lower,
            },
            stats,
        )
    }

    fn report(&self, ranges: &[RankRange], top: i64, session: &mut QuerySession<W>) {
        let r = ranges[self.axis];
        if let (Some(full), true) = (&self.full_upper, r.lo <= 0) {
            return full.report(ranges, top, session);
        }
        if let (Some(full), true) = (&self.full_lower, r.hi >= top) {
            return full.report(ranges, top, session);
        }
        if self.skeleton.len() == 0 {
            return;
        }
        match self.skeleton.locate(r.lo, r.hi) {
            Located::Leaf(n) => {
                if let LayerNode::Leaf(block) = &self.nodes[n] {
                    scan_box(block, ranges, session);
                }
            }
            Located::Split(n) => {
                if let LayerNode::Split { below, above } = &self.nodes[n] {
                    below.report(
                        &with_range(ranges, self.axis, RankRange { lo: r.lo, hi: top }),
                        top,
                        session,
                    );
                    above.report(
                        &with_range(ranges, self.axis, RankRange { lo: 0, hi: r.hi }),
                        top,
                        session,
                    );
                }
            }
        }
    }
}

fn scan_box<W: Weight>(block: &PointBlock<W>, ranges: &[RankRange], session: &mut QuerySession<W>) {
    session.probes.leaf_scans += 1;
    session.probes.leaf_points += block.len() as u64;
    session.acc.begin_source();
    for i in 0..block.len() {
        let inside = block
            .row(i)
            .iter()
            .zip(ranges)
            .all(|(&c, r)| r.lo <= c as i64 && c as i64 <= r.hi);
        if inside {
            session.acc.add(block.color(i), block.weight(i));
        }
    }
}

/// Work done by one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCost {
    pub probes: ProbeCounters,
    pub acc: AccumulatorCounters,
}

/// Which part of the outermost layer produced a partial answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartRole {
    /// Left child of the split node, queried `[x1, +inf)`.
    Below,
    /// Right child of the split node, queried `(-inf, x2]`.
    Above,
    /// Whole-set structure for a one-sided range.
    Full,
    /// Flat scan of a leaf.
    Leaf,
    /// No layers: the dominance tree itself.
    Dominance,
}

#[derive(Debug, Clone)]
pub struct BoxPart<W> {
    pub role: PartRole,
    pub answer: FrequencyList<W>,
}

/// Color frequency index for boxes over real coordinates. Each axis
/// supports the bounds named by its [`Side`].
#[derive(Debug, Clone)]
pub struct ColorIndex<W> {
    ranks: RankSpace,
    root: Option<BoxNode<W>>,
    sides: Vec<Side>,
    colors: usize,
    params: TreeParams,
    stats: BoxStats,
}

/// Builds a box index whose axes support the given sides.
pub fn build_box<W: Weight>(
    points: &[ColoredPoint<W>],
    dims: usize,
    params: TreeParams,
    sides: &[Side],
) -> Result<ColorIndex<W>> {
    if dims == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if sides.len() != dims {
        return Err(Error::InvalidParameter(format!(
            "{} sides given for {dims} dimensions",
            sides.len()
        )));
    }
    params.validate(points.len())?;
    validate_points(points, dims)?;
    let ranks = RankSpace::new(points, dims);
    let (root, stats) = if points.is_empty() {
        (None, BoxStats::default())
    } else {
        let ctx = BuildCtx {
            params: &params,
            universe: points.len() as u32,
        };
        let (root, stats) = BoxNode::build(ranks.block(points), sides, &ctx);
        (Some(root), stats)
    };
    Ok(ColorIndex {
        ranks,
        root,
        sides: sides.to_vec(),
        colors: color_count(points),
        params,
        stats: BoxStats {
            layers: sides.iter().filter(|&&s| s == Side::Both).count(),
            ..stats
        },
    })
}

/// Box index with two-sided bounds on `bounded_axes` and `(-inf, x]` on the
/// remaining axes.
pub fn build_box_bounded<W: Weight>(
    points: &[ColoredPoint<W>],
    dims: usize,
    params: TreeParams,
    bounded_axes: &[usize],
) -> Result<ColorIndex<W>> {
    if let Some(&a) = bounded_axes.iter().find(|&&a| a >= dims) {
        return Err(Error::InvalidParameter(format!(
            "bounded axis {a} outside {dims} dimensions"
        )));
    }
    let sides: Vec<Side> = (0..dims)
        .map(|a| if bounded_axes.contains(&a) { Side::Both } else { Side::Upper })
        .collect();
    build_box(points, dims, params, &sides)
}

impl<W: Weight> ColorIndex<W> {
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

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn stats(&self) -> BoxStats {
        self.stats
    }

    pub fn session(&self) -> QuerySession<W> {
        QuerySession::new(self.colors)
    }

    fn ranges(&self, q: &BoxQuery) -> Result<Option<Vec<RankRange>>> {
        let ranges = self.ranks.query_ranges(q)?;
        for (axis, (b, side)) in q.bounds.iter().zip(&self.sides).enumerate() {
            if !side.supports(b) {
                return Err(Error::UnsupportedShape(format!(
                    "axis {axis} is built for {side:?} bounds but the query bounds it as [{}, {}]",
                    b.lo, b.hi
                )));
            }
        }
        if ranges.iter().any(|r| r.is_empty()) {
            return Ok(None);
        }
        Ok(Some(ranges))
    }

    pub fn query(&self, q: &BoxQuery) -> Result<FrequencyList<W>> {
        let mut session = self.session();
        self.query_with(q, &mut session)
    }

    pub fn query_with(&self, q: &BoxQuery, session: &mut QuerySession<W>) -> Result<FrequencyList<W>> {
        if let (Some(ranges), Some(root)) = (self.ranges(q)?, &self.root) {
            root.report(&ranges, self.ranks.len() as i64 - 1, session);
        }
        Ok(session.acc.drain_and_reset())
    }

    /// Answer plus the counters it consumed.
    pub fn query_traced(
        &self,
        q: &BoxQuery,
        session: &mut QuerySession<W>,
    ) -> Result<(FrequencyList<W>, QueryCost)> {
        session.reset_counters();
        let answer = self.query_with(q, session)?;
        Ok((
            answer,
            QueryCost {
                probes: session.probes,
                acc: session.acc.counters(),
            },
        ))
    }

    /// Answers a batch, one session per worker; parallel when enabled.
    pub fn query_batch(&self, queries: &[BoxQuery]) -> Vec<Result<FrequencyList<W>>> {
        par::map_with(queries, || self.session(), |s, q| self.query_with(q, s))
    }

    /// Same as [`query_batch`](Self::query_batch) on the calling thread.
    pub fn query_batch_sequential(&self, queries: &[BoxQuery]) -> Vec<Result<FrequencyList<W>>> {
        par::map_with_sequential(queries, || self.session(), |s, q| self.query_with(q, s))
    }

    pub fn query_batch_traced(
        &self,
        queries: &[BoxQuery],
    ) -> Vec<Result<(FrequencyList<W>, QueryCost)>> {
        par::map_with(queries, || self.session(), |s, q| self.query_traced(q, s))
    }

    /// Partial answers at the outermost layer.
    pub fn explain(&self, q: &BoxQuery) -> Result<Vec<BoxPart<W>>> {
        let (ranges, root) = match (self.ranges(q)?, &self.root) {
            (Some(r), Some(root)) => (r, root),
            _ => return Ok(Vec::new()),
        };
        let top = self.ranks.len() as i64 - 1;
        let mut session = self.session();
        let mut part = |role, node: &BoxNode<W>, ranges: &[RankRange]| {
            node.report(ranges, top, &mut session);
            BoxPart {
                role,
                answer: session.acc.drain_and_reset(),
            }
        };
        let layer = match root {
            BoxNode::Dominance { .. } => return Ok(vec![part(PartRole::Dominance, root, &ranges)]),
            BoxNode::Layer(layer) => layer,
        };
        let r = ranges[layer.axis];
        if let (Some(full), true) = (&layer.full_upper, r.lo <= 0) {
            return Ok(vec![part(PartRole::Full, full, &ranges)]);
        }
        if let (Some(full), true) = (&layer.full_lower, r.hi >= top) {
            return Ok(vec![part(PartRole::Full, full, &ranges)]);
        }
        Ok(match layer.skeleton.locate(r.lo, r.hi) {
            Located::Leaf(n) => match &layer.nodes[n] {
                LayerNode::Leaf(block) => {
                    scan_box(block, &ranges, &mut session);
                    vec![BoxPart {
                        role: PartRole::Leaf,
                        answer: session.acc.drain_and_reset(),
                    }]
                }
                LayerNode::Split { .. } => unreachable!("skeleton leaf holds a split"),
            },
            Located::Split(n) => match &layer.nodes[n] {
                LayerNode::Split { below, above } => vec![
                    part(
                        PartRole::Below,
                        below,
                        &with_range(&ranges, layer.axis, RankRange { lo: r.lo, hi: top }),
                    ),
                    part(
                        PartRole::Above,
                        above,
                        &with_range(&ranges, layer.axis, RankRange { lo: 0, hi: r.hi }),
                    ),
                ],
                LayerNode::Leaf(_) => unreachable!("skeleton split holds a leaf"),
            },
        })
    }
}

/// `ceil(log2 n)`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
