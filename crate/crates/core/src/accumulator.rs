//! Per-color tally with a touched list: O(1) merge per reported entry and
//! a drain whose cost depends on the number of touched colors only.

use crate::types::{ColorId, FrequencyList, Weight};

/// Operation counters kept by the accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccumulatorCounters {
    /// Calls that combined a weight into a slot.
    pub combines: u64,
    /// Distinct (color, source) pairs: a cell touched several times by the
    /// same partial answer counts once.
    pub cell_touches: u64,
    /// Slots visited while draining.
    pub drain_visits: u64,
    /// Weights removed from a slot; only the group interval path does this.
    pub subtractions: u64,
}

/// φ weight cells plus the list of colors currently holding a value.
#[derive(Debug, Clone)]
pub struct ColorAccumulator<W> {
    slots: Vec<W>,
    stamps: Vec<u32>,
    touched: Vec<ColorId>,
    source: u32,
    counters: AccumulatorCounters,
}

impl<W: Weight> ColorAccumulator<W> {
    pub fn new(colors: usize) -> Self {
        ColorAccumulator {
            slots: vec![W::identity(); colors],
            stamps: vec![0; colors],
            touched: Vec::new(),
            source: 1,
            counters: AccumulatorCounters::default(),
        }
    }

    pub fn colors(&self) -> usize {
        self.slots.len()
    }

    pub fn counters(&self) -> AccumulatorCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = AccumulatorCounters::default();
    }

    pub fn touched(&self) -> &[ColorId] {
        &self.touched
    }

    /// Marks the start of a new partial answer.
    #[inline]
    pub fn begin_source(&mut self) {
        self.source = self.source.wrapping_add(1);
        if self.source == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.source = 1;
        }
    }

    /// Combines `w` into the slot of `color`.
    ///
    /// Panics if `color` is outside `[0, φ)`.
    #[inline]
    pub fn add(&mut self, color: ColorId, w: W) {
        if w.is_identity() {
            return;
        }
        let c = color.index();
        assert!(c < self.slots.len(), "color {c} outside accumulator of {} slots", self.slots.len());
        let slot = &mut self.slots[c];
        if slot.is_identity() {
            self.touched.push(color);
        }
        *slot = slot.combine(w);
        self.counters.combines += 1;
        if self.stamps[c] != self.source {
            self.stamps[c] = self.source;
            self.counters.cell_touches += 1;
        }
    }

    /// Removes `w` from the slot of `color`. Only meaningful for group
    /// weights; the caller guarantees the slot already holds at least `w`.
    #[inline]
    pub(crate) fn subtract(&mut self, color: ColorId, w: W) {
        let c = color.index();
        assert!(c < self.slots.len(), "color {c} outside accumulator of {} slots", self.slots.len());
        let slot = &mut self.slots[c];
        *slot = slot
            .difference(w)
            .expect("subtract requires an invertible weight covering the removed amount");
        self.counters.combines += 1;
        self.counters.subtractions += 1;
        if self.stamps[c] != self.source {
            self.stamps[c] = self.source;
            self.counters.cell_touches += 1;
        }
    }

    /// Merges a whole partial answer as one source.
    pub fn accumulate(&mut self, partial: &FrequencyList<W>) {
        self.begin_source();
        for &(c, w) in partial.iter() {
            self.add(c, w);
        }
    }

    /// Returns the touched colors with their totals and clears them. Cost is
    /// proportional to the number of touched colors.
    pub fn drain_and_reset(&mut self) -> FrequencyList<W> {
        let mut out = Vec::with_capacity(self.touched.len());
        for &c in &self.touched {
            let slot = &mut self.slots[c.index()];
            if !slot.is_identity() {
                out.push((c, *slot));
            }
            *slot = W::identity();
        }
        self.counters.drain_visits += self.touched.len() as u64;
        self.touched.clear();
        FrequencyList::from_entries(out)
    }

    /// Full O(φ) scan; for tests only.
    pub fn is_clear(&self) -> bool {
        self.touched.is_empty() && self.slots.iter().all(|s| s.is_identity())
    }
}

/// Counters describing the work done by queries in a session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeCounters {
    /// One-dimensional structure queries.
    pub line_queries: u64,
    /// Nodes of one-dimensional indexes visited.
    pub index_probes: u64,
    /// Strip-tree path nodes visited.
    pub path_nodes: u64,
    /// Dominance structures queried by box queries.
    pub dominance_queries: u64,
    /// Flat leaf lists scanned.
    pub leaf_scans: u64,
    /// Points looked at by leaf scans.
    pub leaf_points: u64,
}

impl std::ops::AddAssign for ProbeCounters {
    fn add_assign(&mut self, o: Self) {
        self.line_queries += o.line_queries;
        self.index_probes += o.index_probes;
        self.path_nodes += o.path_nodes;
        self.dominance_queries += o.dominance_queries;
        self.leaf_scans += o.leaf_scans;
        self.leaf_points += o.leaf_points;
    }
}

/// Private per-reader query state: one accumulator sized to φ and the probe
/// counters. Structures stay immutable; each concurrent reader owns one.
#[derive(Debug, Clone)]
pub struct QuerySession<W> {
    pub acc: ColorAccumulator<W>,
    pub probes: ProbeCounters,
}

impl<W: Weight> QuerySession<W> {
    pub fn new(colors: usize) -> Self {
        QuerySession {
            acc: ColorAccumulator::new(colors),
            probes: ProbeCounters::default(),
        }
    }

    /// Clears the counters of both the probes and the accumulator.
    pub fn reset_counters(&mut self) {
        self.probes = ProbeCounters::default();
        self.acc.reset_counters();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Count;

    fn fl(e: &[(u32, u64)]) -> FrequencyList<Count> {
        e.iter().map(|&(c, w)| (ColorId(c), Count(w))).collect()
    }

    #[test]
    fn additive_merge() {
        let mut acc = ColorAccumulator::new(8);
        acc.accumulate(&fl(&[(2, 3)]));
        acc.accumulate(&fl(&[(2, 1), (5, 2)]));
        assert_eq!(acc.drain_and_reset(), fl(&[(2, 4), (5, 2)]));
        assert!(acc.is_clear());
    }

    #[test]
    fn empty_partial_is_identity() {
        let mut acc = ColorAccumulator::<Count>::new(4);
        acc.accumulate(&fl(&[]));
        assert!(acc.drain_and_reset().is_empty());
    }

    #[test]
    fn drain_single_then_empty() {
        let mut acc = ColorAccumulator::new(8);
        acc.accumulate(&fl(&[(7, 2)]));
        assert_eq!(acc.drain_and_reset(), fl(&[(7, 2)]));
        assert!(acc.drain_and_reset().is_empty());
        assert!(acc.is_clear());
    }

    #[test]
    fn disjoint_partials_union() {
        let mut acc = ColorAccumulator::new(10);
        acc.accumulate(&fl(&[(0, 1), (1, 2)]));
        acc.accumulate(&fl(&[(4, 5)]));
        acc.accumulate(&fl(&[(9, 1), (3, 3)]));
        assert_eq!(
            acc.drain_and_reset(),
            fl(&[(0, 1), (1, 2), (4, 5), (9, 1), (3, 3)])
        );
    }

    #[test]
    fn touches_count_once_per_source() {
        let mut acc = ColorAccumulator::new(4);
        acc.begin_source();
        acc.add(ColorId(1), Count(1));
        acc.add(ColorId(1), Count(1));
        acc.begin_source();
        acc.add(ColorId(1), Count(1));
        assert_eq!(acc.counters().cell_touches, 2);
        assert_eq!(acc.counters().combines, 3);
    }

    #[test]
    #[should_panic]
    fn color_out_of_range_panics() {
        let mut acc = ColorAccumulator::new(2);
        acc.add(ColorId(2), Count(1));
    }

    #[test]
    fn drain_cost_independent_of_phi() {
        let mut visits = Vec::new();
        for phi in [8usize, 1 << 10, 1 << 16] {
            let mut acc = ColorAccumulator::new(phi);
            acc.accumulate(&fl(&[(1, 1), (3, 2), (5, 7)]));
            acc.drain_and_reset();
            visits.push(acc.counters().drain_visits);
        }
        assert!(visits.iter().all(|&v| v == 3));
    }
}
