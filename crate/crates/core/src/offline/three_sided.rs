use crate::accumulator::QuerySession;
use crate::boxtree::{Located, SplitSkeleton};
use crate::dominance::TreeParams;
use crate::error::{Error, Result};
use crate::rank::RankSpace;
use crate::types::{color_count, validate_points, BoxQuery, ColoredPoint, FrequencyList, Side, Weight};

use super::sweep::{Sweep, SweepPlan, SweepQuery};

/// Counters of a finished 3-sided batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThreeSidedSummary {
    pub queries: usize,
    pub emitted: usize,
    /// Binary nodes that ran a pair of sweeps.
    pub swept_nodes: usize,
    /// Queries answered by scanning a leaf.
    pub leaf_queries: usize,
    /// Queries with an empty rank range, answered without any search.
    pub empty_queries: usize,
    /// Entries combined while merging the two partial answers, all queries.
    pub merge_touches: u64,
    /// Entries in the two partial answers, all queries.
    pub partial_entries: u64,
    /// Queries whose merge combined more entries than its partials hold.
    pub merge_violations: u64,
    /// Emissions out of y-order within one node's stream.
    pub emit_order_violations: u64,
    /// Largest live working set of a single sweep.
    pub peak_live_entries: u64,
    pub total_built: u64,
    pub total_destroyed: u64,
    pub max_live_copies: u32,
    /// Slot subtractions in any accumulator of the run.
    pub subtractions: u64,
}

/// Answers `[x1, x2] x (-inf, y]` queries in two dimensions through `sink`.
///
/// Each query goes to the highest node of a binary tree on x whose split
/// lies in `[x1, x2]`. There it becomes a dominance query over the left
/// child with x reflected and one over the right child; both run as y-sweeps
/// over the same query order, so their answer streams line up and each pair
/// is merged once.
pub fn answer_offline_three_sided<W: Weight>(
    points: &[ColoredPoint<W>],
    queries: &[(u32, BoxQuery)],
    params: TreeParams,
    mut sink: impl FnMut(u32, FrequencyList<W>),
) -> Result<ThreeSidedSummary> {
    params.validate(points.len())?;
    validate_points(points, 2)?;
    let ranks = RankSpace::new(points, 2);
    let mut ranges = Vec::with_capacity(queries.len());
    for (_, q) in queries {
        let r = ranks.query_ranges(q)?;
        if !Side::Upper.supports(&q.bounds[1]) {
            return Err(Error::UnsupportedShape(
                "3-sided batch needs (-inf, y] on the second axis".into(),
            ));
        }
        ranges.push(r);
    }
    let mut summary = ThreeSidedSummary {
        queries: queries.len(),
        ..ThreeSidedSummary::default()
    };
    let colors = color_count(points).max(1);
    let n = points.len();
    let top = n as i64 - 1;

    let mut live = Vec::new();
    for (i, r) in ranges.iter().enumerate() {
        if n == 0 || r.iter().any(|r| r.is_empty()) {
            summary.empty_queries += 1;
            summary.emitted += 1;
            sink(queries[i].0, FrequencyList::new());
        } else {
            live.push(i);
        }
    }
    if live.is_empty() {
        return Ok(summary);
    }

    let sorted = ranks.block(points).sorted_by_axis(0, &mut 0);
    let keys: Vec<u32> = (0..n).map(|i| sorted.coord(i, 0)).collect();
    let skeleton = SplitSkeleton::build(&keys, params.leaf_threshold());
    let mut at_node: Vec<Vec<usize>> = vec![Vec::new(); skeleton.len()];
    let mut at_leaf: Vec<Vec<usize>> = vec![Vec::new(); skeleton.len()];
    for &i in &live {
        let x = ranges[i][0];
        match skeleton.locate(x.lo, x.hi) {
            Located::Split(u) => at_node[u].push(i),
            Located::Leaf(u) => at_leaf[u].push(i),
        }
    }

    let mut session = QuerySession::<W>::new(colors);
    for (u, qs) in at_leaf.iter().enumerate() {
        let node = skeleton.nodes[u];
        for &i in qs {
            let r = &ranges[i];
            session.acc.begin_source();
            for p in node.start..node.end {
                let (x, y) = (sorted.coord(p, 0) as i64, sorted.coord(p, 1) as i64);
                if r[0].lo <= x && x <= r[0].hi && y <= r[1].hi {
                    session.acc.add(sorted.color(p), sorted.weight(p));
                }
            }
            summary.leaf_queries += 1;
            summary.emitted += 1;
            sink(queries[i].0, session.acc.drain_and_reset());
        }
    }

    for (u, qs) in at_node.iter().enumerate() {
        if qs.is_empty() {
            continue;
        }
        let Some((l, r)) = skeleton.nodes[u].children else {
            unreachable!("split query located at a leaf");
        };
        let (ln, rn) = (skeleton.nodes[l], skeleton.nodes[r]);
        // y first so that both sweeps run along y
        let left = sorted
            .slice(ln.start..ln.end)
            .map_rows(2, |row, out| {
                out[0] = row[1];
                out[1] = top as u32 - row[0];
            });
        let right = sorted.slice(rn.start..rn.end).map_rows(2, |row, out| {
            out[0] = row[1];
            out[1] = row[0];
        });
        let corners = |f: &dyn Fn(usize) -> i64| -> Vec<SweepQuery> {
            qs.iter()
                .enumerate()
                .map(|(tag, &i)| SweepQuery {
                    corner: vec![ranges[i][1].hi, f(i)],
                    tag: tag as u32,
                })
                .collect()
        };
        let above_lo = corners(&|i| top - ranges[i][0].lo);
        let below_hi = corners(&|i| ranges[i][0].hi);
        let (lplan, rplan) = (SweepPlan::new(&left, params), SweepPlan::new(&right, params));
        let mut lsweep = Sweep::new(&lplan, above_lo, colors, n);
        let mut rsweep = Sweep::new(&rplan, below_hi, colors, n);
        summary.swept_nodes += 1;
        let mut last_y = i64::MIN;
        loop {
            let (a, b) = match (lsweep.next(), rsweep.next()) {
                (None, None) => break,
                (Some(a), Some(b)) => (a, b),
                _ => unreachable!("sweeps over one query set end together"),
            };
            assert_eq!(a.0, b.0, "sweep streams out of step");
            let i = qs[a.0 as usize];
            let y = ranges[i][1].hi;
            if y < last_y {
                summary.emit_order_violations += 1;
            }
            last_y = y;
            let before = session.acc.counters().combines;
            session.acc.accumulate(&a.1);
            session.acc.accumulate(&b.1);
            let touches = session.acc.counters().combines - before;
            let partial = (a.1.len() + b.1.len()) as u64;
            summary.merge_touches += touches;
            summary.partial_entries += partial;
            if touches > partial {
                summary.merge_violations += 1;
            }
            summary.emitted += 1;
            sink(queries[i].0, session.acc.drain_and_reset());
        }
        for s in [&lsweep, &rsweep] {
            let c = s.counters;
            summary.peak_live_entries = summary.peak_live_entries.max(c.peak_live_entries);
            summary.total_built += c.built;
            summary.total_destroyed += c.destroyed;
            summary.max_live_copies = summary.max_live_copies.max(c.max_live_copies);
            summary.subtractions += s.session().acc.counters().subtractions;
        }
    }
    summary.subtractions += session.acc.counters().subtractions;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::build_dominance;
    use crate::oracle::brute_force;
    use crate::types::{ColorId, Count, Interval, MaxWeight};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run<W: Weight>(
        pts: &[ColoredPoint<W>],
        qs: &[(u32, BoxQuery)],
        params: TreeParams,
    ) -> (Vec<(u32, FrequencyList<W>)>, ThreeSidedSummary) {
        let mut out = Vec::new();
        let s = answer_offline_three_sided(pts, qs, params, |id, a| out.push((id, a))).unwrap();
        (out, s)
    }

    fn three_sided(x1: f64, x2: f64, y: f64) -> BoxQuery {
        BoxQuery::new(vec![Interval::new(x1, x2), Interval::at_most(y)])
    }

    #[test]
    fn random_batch_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pts: Vec<ColoredPoint<Count>> = (0..800)
            .map(|_| {
                ColoredPoint::counted(
                    vec![rng.gen_range(0..800) as f64, rng.gen_range(0..800) as f64],
                    rng.gen_range(0..40),
                )
            })
            .collect();
        let qs: Vec<(u32, BoxQuery)> = (0..200)
            .map(|i| {
                let a = rng.gen_range(-5..805) as f64;
                let b = rng.gen_range(-5..805) as f64;
                (i, three_sided(a.min(b), a.max(b), rng.gen_range(-5..805) as f64))
            })
            .collect();
        let (out, s) = run(&pts, &qs, TreeParams::new(4).with_leaf_size(8));
        assert_eq!(out.len(), 200);
        let mut seen = [false; 200];
        for (id, ans) in &out {
            assert!(!std::mem::replace(&mut seen[*id as usize], true));
            assert_eq!(ans, &brute_force(&pts, &qs[*id as usize].1));
        }
        assert_eq!(s.merge_violations, 0);
        assert_eq!(s.subtractions, 0);
        assert!(s.merge_touches <= s.partial_entries);
        assert_eq!(s.emit_order_violations, 0);
        assert_eq!(s.total_built, s.total_destroyed);
        assert!(s.swept_nodes > 0);
    }

    #[test]
    fn full_x_span_equals_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let pts: Vec<ColoredPoint<Count>> = (0..300)
            .map(|_| {
                ColoredPoint::counted(
                    vec![rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64],
                    rng.gen_range(0..10),
                )
            })
            .collect();
        let dom = build_dominance(&pts, 2, TreeParams::new(4)).unwrap();
        let qs: Vec<(u32, BoxQuery)> = (0..30)
            .map(|i| (i, three_sided(-1.0, 1000.0, (i * 4) as f64)))
            .collect();
        let (out, _) = run(&pts, &qs, TreeParams::new(4));
        for (id, ans) in &out {
            let y = (id * 4) as f64;
            assert_eq!(ans, &dom.query(&BoxQuery::dominance(&[1000.0, y])).unwrap());
        }
    }

    #[test]
    fn slab_between_points_is_empty() {
        let pts: Vec<ColoredPoint<Count>> =
            (0..50).map(|i| ColoredPoint::counted(vec![i as f64, 0.0], i % 3)).collect();
        let (out, s) = run(&pts, &[(7, three_sided(10.2, 10.8, 5.0))], TreeParams::new(2));
        assert_eq!(out, vec![(7, FrequencyList::new())]);
        assert_eq!(s.empty_queries, 1);
    }

    #[test]
    fn max_weights_without_subtraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let pts: Vec<ColoredPoint<MaxWeight>> = (0..400)
            .map(|_| {
                ColoredPoint::new(
                    vec![rng.gen_range(0..200) as f64, rng.gen_range(0..200) as f64],
                    ColorId(rng.gen_range(0..12)),
                    MaxWeight(rng.gen_range(-30..30)),
                )
            })
            .collect();
        let qs: Vec<(u32, BoxQuery)> = (0..100)
            .map(|i| {
                let a = rng.gen_range(0..200) as f64;
                (i, three_sided(a, a + rng.gen_range(0..120) as f64, rng.gen_range(0..200) as f64))
            })
            .collect();
        let (out, s) = run(&pts, &qs, TreeParams::new(3).with_leaf_size(4));
        for (id, ans) in &out {
            assert_eq!(ans, &brute_force(&pts, &qs[*id as usize].1));
        }
        assert_eq!(s.merge_violations, 0);
    }

    #[test]
    fn rejects_other_shapes() {
        let pts = vec![ColoredPoint::counted(vec![0.0, 0.0], 0)];
        let q = BoxQuery::new(vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)]);
        let r = answer_offline_three_sided(&pts, &[(0, q)], TreeParams::new(2), |_, _| {});
        assert!(matches!(r, Err(Error::UnsupportedShape(_))));
        let q3 = BoxQuery::dominance(&[1.0, 1.0, 1.0]);
        let r = answer_offline_three_sided(&pts, &[(0, q3)], TreeParams::new(2), |_, _| {});
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
