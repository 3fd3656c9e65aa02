//! Output-sensitive color frequency reporting.
//!
//! Given colored, optionally weighted points in ℝᵈ, the structures here
//! report every color present in a query box together with its count (or
//! combined weight) in time linear in the number of reported colors plus a
//! polylogarithmic search term:
//!
//! - [`freq1d`]: the one-dimensional successor-transform structure,
//! - [`dominance`]: s-ary strip trees for d-dimensional dominance queries,
//! - [`boxtree`]: binary layering that adds second bounds per axis,
//! - [`offline`]: batched sweeps with low working space,
//! - [`oracle`]: brute-force reference answers,
//! - [`dataset`] and [`gen`]: text formats and seeded random instances.

pub mod accumulator;
pub mod boxtree;
pub mod dataset;
pub mod dominance;
pub mod error;
pub mod freq1d;
pub mod gen;
pub mod offline;
pub mod oracle;
pub mod par;
pub mod rank;
pub mod types;

pub use accumulator::{AccumulatorCounters, ColorAccumulator, ProbeCounters, QuerySession};
pub use boxtree::{build_box, build_box_bounded, BoxPart, BoxStats, ColorIndex, PartRole, QueryCost};
pub use dataset::{format_answer_with, format_query, parse_answer_line, parse_queries, queries_to_text, Dataset};
pub use dominance::{build_dominance, DominanceIndex, DominanceTree, TreeParams, TreeStats};
pub use error::{Error, Operation, Result};
pub use offline::{
    answer_offline_dominance, answer_offline_three_sided, peak_space_report, OfflineParams, SpaceReport,
    SweepSummary, ThreeSidedSummary,
};
pub use freq1d::{build_1d, Freq1D, LineIndex, MappedPoint};
pub use gen::{gen_dataset, gen_queries, GenConfig, SampleWeight};
pub use types::{
    normalize_query, BoxQuery, ColorId, ColoredPoint, Count, FrequencyList, Interval, MaxWeight,
    parse_sides, Side, TextWeight, Weight,
};
