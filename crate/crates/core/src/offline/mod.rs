//! Batched queries answered by a sweep, streaming each answer as soon as it
//! is known and keeping only a small part of the structure alive.
//!
//! [`answer_offline_dominance`] sweeps one axis through a strip tree whose
//! per-strip structures exist only while the sweep is inside the strip.
//! [`answer_offline_three_sided`] places each `[x1, x2] x (-inf, y]` query at
//! the highest binary node splitting its x-range, runs two y-sweeps per node
//! and merges their streams in lockstep.

mod sweep;
mod three_sided;

pub use three_sided::{answer_offline_three_sided, ThreeSidedSummary};

use crate::accumulator::ProbeCounters;
use crate::dominance::TreeParams;
use crate::error::{Error, Result};
use crate::rank::{RankSpace, PointBlock};
use crate::types::{color_count, validate_points, BoxQuery, ColoredPoint, FrequencyList, Weight};

use sweep::{Sweep, SweepPlan, SweepQuery};

/// Parameters of a dominance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfflineParams {
    pub tree: TreeParams,
    pub sweep_axis: usize,
}

impl OfflineParams {
    pub fn new(fanout: usize) -> Self {
        OfflineParams {
            tree: TreeParams::new(fanout),
            sweep_axis: 0,
        }
    }

    pub fn with_sweep_axis(mut self, axis: usize) -> Self {
        self.sweep_axis = axis;
        self
    }

    pub fn with_leaf_size(mut self, leaf_size: usize) -> Self {
        self.tree = self.tree.with_leaf_size(leaf_size);
        self
    }
}

/// Counters of a finished sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub queries: usize,
    pub emitted: usize,
    /// Skeleton nodes kept for the whole run.
    pub skeleton_nodes: usize,
    /// Largest number of mapped points alive at once.
    pub peak_live_entries: u64,
    /// Largest number of points held by live structures at once.
    pub peak_live_points: u64,
    pub total_built: u64,
    pub total_destroyed: u64,
    /// Mapped points over all structures built.
    pub built_entries: u64,
    pub build_ops: u64,
    /// Most live structures a single point was in simultaneously.
    pub max_live_copies: u32,
    pub emit_order_violations: u64,
    pub probes: ProbeCounters,
}

/// The working-space figures of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceReport {
    pub peak_live_entries: u64,
    pub total_built: u64,
    pub total_destroyed: u64,
    pub emit_order_violations: u64,
}

pub fn peak_space_report(summary: &SweepSummary) -> SpaceReport {
    SpaceReport {
        peak_live_entries: summary.peak_live_entries,
        total_built: summary.total_built,
        total_destroyed: summary.total_destroyed,
        emit_order_violations: summary.emit_order_violations,
    }
}

/// Answers every `(queryId, dominance query)` pair through `sink`, once per
/// pair, in non-decreasing order of the corner on the sweep axis.
pub fn answer_offline_dominance<W: Weight>(
    points: &[ColoredPoint<W>],
    dims: usize,
    queries: &[(u32, BoxQuery)],
    params: OfflineParams,
    mut sink: impl FnMut(u32, FrequencyList<W>),
) -> Result<SweepSummary> {
    if dims == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if params.sweep_axis >= dims {
        return Err(Error::InvalidParameter(format!(
            "sweep axis {} outside {dims} dimensions",
            params.sweep_axis
        )));
    }
    params.tree.validate(points.len())?;
    validate_points(points, dims)?;
    let ranks = RankSpace::new(points, dims);
    for (_, q) in queries {
        ranks.query_ranges(q)?;
        if !q.is_dominance() {
            return Err(Error::UnsupportedShape(
                "offline sweep answers (-inf, x] bounds only".into(),
            ));
        }
    }

    // sweep axis first, the others in their original order
    let axis = params.sweep_axis;
    let order: Vec<usize> = std::iter::once(axis).chain((0..dims).filter(|&a| a != axis)).collect();
    // tags follow the real sweep coordinate so that rank ties keep it ordered
    let mut perm: Vec<usize> = (0..queries.len()).collect();
    perm.sort_by(|&a, &b| {
        let key = |i: usize| queries[i].1.bounds[axis].hi;
        key(a).total_cmp(&key(b)).then(a.cmp(&b))
    });
    let sweep_queries: Vec<SweepQuery> = perm
        .iter()
        .enumerate()
        .map(|(tag, &i)| {
            let ranges = ranks.query_ranges(&queries[i].1).expect("validated above");
            SweepQuery {
                corner: order.iter().map(|&a| ranges[a].hi).collect(),
                tag: tag as u32,
            }
        })
        .collect();

    let mut summary = SweepSummary {
        queries: queries.len(),
        ..SweepSummary::default()
    };
    let mut last_key = f64::NEG_INFINITY;
    let mut emit = |tag: u32, answer: FrequencyList<W>, summary: &mut SweepSummary| {
        let (id, q) = &queries[perm[tag as usize]];
        let key = q.bounds[axis].hi;
        if key < last_key {
            summary.emit_order_violations += 1;
        }
        last_key = last_key.max(key);
        summary.emitted += 1;
        sink(*id, answer);
    };

    let colors = color_count(points);
    let block = ranks.block(points);
    if dims == 1 {
        line_sweep(&block, sweep_queries, colors, &mut summary, &mut emit);
        return Ok(summary);
    }
    let block = block.map_rows(dims, |row, out| {
        for (o, &a) in out.iter_mut().zip(&order) {
            *o = row[a];
        }
    });
    let plan = SweepPlan::new(&block, params.tree);
    summary.skeleton_nodes = plan.skeleton_nodes();
    let mut sweep = Sweep::new(&plan, sweep_queries.clone(), colors.max(1), points.len());
    for (tag, answer) in sweep.by_ref() {
        emit(tag, answer, &mut summary);
    }
    // no points: nothing reached the skeleton
    if plan.skeleton_nodes() == 0 {
        let mut tags: Vec<&SweepQuery> = sweep_queries.iter().collect();
        tags.sort_by_key(|q| (q.corner[0], q.tag));
        for q in tags {
            emit(q.tag, FrequencyList::new(), &mut summary);
        }
    }
    let c = sweep.counters;
    summary.peak_live_entries = c.peak_live_entries;
    summary.peak_live_points = c.peak_live_points;
    summary.total_built = c.built;
    summary.total_destroyed = c.destroyed;
    summary.built_entries = c.built_entries;
    summary.build_ops = c.build_ops;
    summary.max_live_copies = c.max_live_copies;
    summary.probes = sweep.session().probes;
    Ok(summary)
}

/// One dimension: a running per-color total while walking the sorted points.
/// Every color seen so far is in the answer, so copying the table costs
/// exactly the answer size.
fn line_sweep<W: Weight>(
    block: &PointBlock<W>,
    mut queries: Vec<SweepQuery>,
    colors: usize,
    summary: &mut SweepSummary,
    emit: &mut impl FnMut(u32, FrequencyList<W>, &mut SweepSummary),
) {
    queries.sort_by_key(|q| (q.corner[0], q.tag));
    let sorted = block.sorted_by_axis(0, &mut 0);
    let mut totals = vec![W::identity(); colors];
    let mut seen = Vec::new();
    let mut next = 0;
    for q in &queries {
        while next < sorted.len() && sorted.coord(next, 0) as i64 <= q.corner[0] {
            let c = sorted.color(next);
            let slot = &mut totals[c.index()];
            if slot.is_identity() {
                seen.push(c);
            }
            *slot = slot.combine(sorted.weight(next));
            next += 1;
        }
        summary.peak_live_entries = summary.peak_live_entries.max(seen.len() as u64);
        let answer = seen.iter().map(|&c| (c, totals[c.index()])).collect();
        emit(q.tag, answer, summary);
    }
    summary.peak_live_points = next as u64;
}
