//! Brute-force reference answers by a full scan. Shares nothing with the
//! index structures beyond the domain types.

use std::collections::BTreeMap;

use crate::par;
use crate::types::{BoxQuery, ColorId, ColoredPoint, FrequencyList, Weight};

/// Every color with points in `q`, with the combined weight of those points.
pub fn brute_force<W: Weight>(points: &[ColoredPoint<W>], q: &BoxQuery) -> FrequencyList<W> {
    let mut totals: BTreeMap<ColorId, W> = BTreeMap::new();
    for p in points.iter().filter(|p| q.contains(&p.coords)) {
        let slot = totals.entry(p.color).or_insert_with(W::identity);
        *slot = slot.combine(p.weight);
    }
    totals.into_iter().filter(|(_, w)| !w.is_identity()).collect()
}

/// Element-wise [`brute_force`], parallel across queries when enabled.
pub fn brute_force_batch<W: Weight>(
    points: &[ColoredPoint<W>],
    queries: &[BoxQuery],
) -> Vec<FrequencyList<W>> {
    par::map_with(queries, || (), |_, q| brute_force(points, q))
}

/// Number of points inside `q`.
pub fn count_inside<W>(points: &[ColoredPoint<W>], q: &BoxQuery) -> usize {
    points.iter().filter(|p| q.contains(&p.coords)).count()
}
