//! Lazy strip-tree sweep over rank-space points.
//!
//! Only the skeleton of the strip tree (ranges and strip boundaries) is kept
//! for the whole run. While the sweep is inside child `i` of a node, the
//! node's structure over `L_i` is alive; it is built on entry and dropped
//! when the sweep moves on. A point lies in `L_i` only at the node where its
//! strip and the sweep position part ways, so it sits in at most one live
//! structure at a time.

use crate::accumulator::QuerySession;
use crate::dominance::{chunk_starts, strip_of, DominanceTree, TreeParams};
use crate::rank::PointBlock;
use crate::types::{FrequencyList, Weight};

#[derive(Debug, Clone)]
enum Shape {
    Leaf,
    Internal {
        // offsets of the child ranges, k + 1 entries
        starts: Vec<usize>,
        child_last: Vec<u32>,
        children: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
struct SkeletonNode {
    start: usize,
    end: usize,
    shape: Shape,
}

/// Points sorted on the sweep axis (axis 0 of the block) plus the strip tree
/// skeleton over them.
#[derive(Debug, Clone)]
pub(crate) struct SweepPlan<W> {
    sorted: PointBlock<W>,
    nodes: Vec<SkeletonNode>,
    params: TreeParams,
}

impl<W: Weight> SweepPlan<W> {
    /// `block` needs at least two axes.
    pub fn new(block: &PointBlock<W>, params: TreeParams) -> Self {
        debug_assert!(block.dims() >= 2);
        let sorted = block.sorted_by_axis(0, &mut 0);
        let mut nodes = Vec::new();
        if sorted.len() > 0 {
            build_skeleton(&sorted, 0, sorted.len(), &params, &mut nodes);
        }
        SweepPlan {
            sorted,
            nodes,
            params,
        }
    }

    pub fn skeleton_nodes(&self) -> usize {
        self.nodes.len()
    }
}

fn build_skeleton<W: Weight>(
    sorted: &PointBlock<W>,
    start: usize,
    end: usize,
    params: &TreeParams,
    nodes: &mut Vec<SkeletonNode>,
) -> usize {
    let idx = nodes.len();
    nodes.push(SkeletonNode {
        start,
        end,
        shape: Shape::Leaf,
    });
    let len = end - start;
    if len > params.leaf_threshold() {
        let k = params.fanout.min(len);
        let starts = chunk_starts(start, end, k);
        let child_last = (0..k).map(|i| sorted.coord(starts[i + 1] - 1, 0)).collect();
        let children = (0..k)
            .map(|i| build_skeleton(sorted, starts[i], starts[i + 1], params, nodes))
            .collect();
        nodes[idx].shape = Shape::Internal {
            starts,
            child_last,
            children,
        };
    }
    idx
}

/// Query for the sweep; corner in the block's rank space, `-1` allowed.
#[derive(Debug, Clone)]
pub(crate) struct SweepQuery {
    pub corner: Vec<i64>,
    pub tag: u32,
}

/// Counters gathered by one sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct SweepCounters {
    pub built: u64,
    pub destroyed: u64,
    pub built_entries: u64,
    pub live_entries: u64,
    pub peak_live_entries: u64,
    pub live_points: u64,
    pub peak_live_points: u64,
    /// Largest number of live structures holding one point.
    pub max_live_copies: u32,
    pub build_ops: u64,
}

struct Live<W> {
    tree: DominanceTree<W>,
    lo: usize,
    hi: usize,
}

struct Frame<W> {
    node: usize,
    // query cursor and end within the sorted query list
    cursor: usize,
    end: usize,
    next_child: usize,
    live: Option<Live<W>>,
}

struct LeafRun {
    node: usize,
    cursor: usize,
    end: usize,
}

/// Iterator yielding `(tag, answer)` in sweep order.
pub(crate) struct Sweep<'a, W> {
    plan: &'a SweepPlan<W>,
    queries: Vec<SweepQuery>,
    stack: Vec<Frame<W>>,
    leaf: Option<LeafRun>,
    session: QuerySession<W>,
    // live structure count per point id
    copies: Vec<u32>,
    pub counters: SweepCounters,
}

impl<'a, W: Weight> Sweep<'a, W> {
    /// `universe` bounds the point ids; `colors` sizes the accumulator.
    pub fn new(plan: &'a SweepPlan<W>, mut queries: Vec<SweepQuery>, colors: usize, universe: usize) -> Self {
        queries.sort_by_key(|q| (q.corner[0], q.tag));
        let mut sweep = Sweep {
            plan,
            stack: Vec::new(),
            leaf: None,
            session: QuerySession::new(colors),
            copies: vec![0; universe],
            counters: SweepCounters::default(),
            queries,
        };
        let m = sweep.queries.len();
        if m > 0 && !plan.nodes.is_empty() {
            sweep.enter(0, 0, m);
        }
        sweep
    }

    pub fn session(&self) -> &QuerySession<W> {
        &self.session
    }

    fn enter(&mut self, node: usize, cursor: usize, end: usize) {
        match self.plan.nodes[node].shape {
            Shape::Leaf => self.leaf = Some(LeafRun { node, cursor, end }),
            Shape::Internal { .. } => self.stack.push(Frame {
                node,
                cursor,
                end,
                next_child: 0,
                live: None,
            }),
        }
    }

    fn build_live(&mut self, lo: usize, hi: usize) -> Live<W> {
        let block = self.plan.sorted.project_tail(lo..hi);
        let tree = DominanceTree::build_block(block, &self.plan.params);
        let entries = tree.stats().stored_entries;
        let c = &mut self.counters;
        c.built += 1;
        c.built_entries += entries;
        c.build_ops += tree.stats().build_ops;
        c.live_entries += entries;
        c.peak_live_entries = c.peak_live_entries.max(c.live_entries);
        c.live_points += (hi - lo) as u64;
        c.peak_live_points = c.peak_live_points.max(c.live_points);
        for i in lo..hi {
            let slot = &mut self.copies[self.plan.sorted.id(i) as usize];
            *slot += 1;
            c.max_live_copies = c.max_live_copies.max(*slot);
        }
        Live { tree, lo, hi }
    }

    fn destroy(&mut self, live: Live<W>) {
        let c = &mut self.counters;
        c.destroyed += 1;
        c.live_entries -= live.tree.stats().stored_entries;
        c.live_points -= (live.hi - live.lo) as u64;
        for i in live.lo..live.hi {
            self.copies[self.plan.sorted.id(i) as usize] -= 1;
        }
        drop(live);
    }

    fn answer(&mut self, node: usize, q: usize) -> FrequencyList<W> {
        let corner = &self.queries[q].corner;
        for frame in &self.stack {
            if let Some(live) = &frame.live {
                live.tree.report(&corner[1..], &mut self.session);
            }
        }
        let n = &self.plan.nodes[node];
        let points = &self.plan.sorted;
        let session = &mut self.session;
        session.probes.leaf_scans += 1;
        session.probes.leaf_points += (n.end - n.start) as u64;
        session.acc.begin_source();
        for i in n.start..n.end {
            if points.row(i).iter().zip(corner).all(|(&c, &b)| (c as i64) <= b) {
                session.acc.add(points.color(i), points.weight(i));
            }
        }
        session.acc.drain_and_reset()
    }
}

impl<W: Weight> Iterator for Sweep<'_, W> {
    type Item = (u32, FrequencyList<W>);

    fn next(&mut self) -> Option<Self::Item> {
        let plan = self.plan;
        loop {
            if let Some(run) = &mut self.leaf {
                if run.cursor < run.end {
                    let (node, q) = (run.node, run.cursor);
                    run.cursor += 1;
                    let answer = self.answer(node, q);
                    return Some((self.queries[q].tag, answer));
                }
                self.leaf = None;
            }
            let frame = self.stack.last_mut()?;
            let Shape::Internal {
                starts,
                child_last,
                children,
            } = &plan.nodes[frame.node].shape
            else {
                unreachable!("leaf on the frame stack");
            };
            let k = children.len();
            // next child strip holding queries
            let mut found = None;
            while frame.next_child < k {
                let i = frame.next_child;
                frame.next_child += 1;
                let pending = &self.queries[frame.cursor..frame.end];
                let take = if i + 1 == k {
                    pending.len()
                } else {
                    pending.partition_point(|q| strip_of(child_last, q.corner[0]) <= i)
                };
                if take > 0 {
                    found = Some((i, frame.cursor, frame.cursor + take));
                    frame.cursor += take;
                    break;
                }
            }
            let old = frame.live.take();
            if let Some(old) = old {
                self.destroy(old);
            }
            match found {
                None => {
                    self.stack.pop();
                }
                Some((i, lo, hi)) => {
                    if i > 0 {
                        let start = plan.nodes[self.stack.last().unwrap().node].start;
                        let live = self.build_live(start, starts[i]);
                        self.stack.last_mut().unwrap().live = Some(live);
                    }
                    self.enter(children[i], lo, hi);
                }
            }
        }
    }
}
