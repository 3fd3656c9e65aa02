use std::collections::BTreeMap;

use colorfreq::oracle::{brute_force, count_inside};
use colorfreq::{
    build_box, build_dominance, normalize_query, BoxQuery, ColorAccumulator, ColorId, ColoredPoint,
    Count, FrequencyList, Interval, MaxWeight, Side, TreeParams, Weight,
};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Upper), Just(Side::Lower), Just(Side::Both)]
}

fn one_sided() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Upper), Just(Side::Lower)]
}

fn points(d: usize, max_n: usize) -> impl Strategy<Value = Vec<ColoredPoint<Count>>> {
    prop::collection::vec((prop::collection::vec(0i32..20, d), 0u32..6), 0..max_n).prop_map(|raw| {
        raw.into_iter()
            .map(|(c, col)| ColoredPoint::counted(c.into_iter().map(f64::from).collect(), col))
            .collect()
    })
}

fn bound(side: Side, a: i32, b: i32) -> Interval {
    let (a, b) = (f64::from(a), f64::from(b));
    match side {
        Side::Upper => Interval::at_most(a),
        Side::Lower => Interval::at_least(a),
        Side::Both => Interval::new(a.min(b), a.max(b)),
    }
}

fn query(sides: &[Side], ends: &[(i32, i32)]) -> BoxQuery {
    BoxQuery::new(sides.iter().zip(ends).map(|(&s, &(a, b))| bound(s, a, b)).collect())
}

fn dims_and_shape() -> impl Strategy<Value = (usize, Vec<Side>)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), prop::collection::vec(side(), d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reflection_is_sound(
        (d, sides, pts) in (1usize..=3)
            .prop_flat_map(|d| (Just(d), prop::collection::vec(one_sided(), d), points(d, 40))),
        ends in prop::collection::vec((-2i32..22, 0i32..1), 3),
    ) {
        let q = query(&sides, &ends[..d]);
        let reflect: Vec<bool> = sides.iter().map(|&s| s == Side::Lower).collect();
        let flipped: Vec<ColoredPoint<Count>> = pts
            .iter()
            .map(|p| {
                let coords = p.coords.iter().zip(&reflect).map(|(&c, &r)| if r { -c } else { c }).collect();
                ColoredPoint::new(coords, p.color, p.weight)
            })
            .collect();
        let nq = normalize_query(&q, &reflect).unwrap();
        prop_assert!(nq.is_dominance());
        prop_assert_eq!(brute_force(&flipped, &nq), brute_force(&pts, &q));
        if !pts.is_empty() {
            let idx = build_dominance(&flipped, d, TreeParams::new(2).with_leaf_size(1)).unwrap();
            prop_assert_eq!(idx.query(&nq).unwrap(), brute_force(&pts, &q));
        }
    }

    #[test]
    fn box_index_matches_oracle(
        (d, sides) in dims_and_shape(),
        seed_pts in prop::collection::vec((prop::collection::vec(0i32..20, 3), 0u32..6), 1..60),
        ends in prop::collection::vec(prop::collection::vec((-2i32..22, -2i32..22), 3), 1..8),
        s in 2usize..6,
        leaf in 1usize..5,
    ) {
        let pts: Vec<ColoredPoint<Count>> = seed_pts
            .iter()
            .map(|(c, col)| ColoredPoint::counted(c[..d].iter().map(|&v| f64::from(v)).collect(), *col))
            .collect();
        let s = s.min(pts.len().max(2));
        let idx = build_box(&pts, d, TreeParams::new(s).with_leaf_size(leaf), &sides).unwrap();
        let layers = sides.iter().filter(|&&s| s == Side::Both).count() as u32;
        let mut session = idx.session();
        for e in &ends {
            let q = query(&sides, &e[..d]);
            let (ans, cost) = idx.query_traced(&q, &mut session).unwrap();
            prop_assert_eq!(&ans, &brute_force(&pts, &q));
            prop_assert_eq!(ans.total() as usize, count_inside(&pts, &q));
            prop_assert!(cost.probes.dominance_queries <= 1 << layers);
            prop_assert_eq!(cost.acc.subtractions, 0);
            prop_assert!(session.acc.is_clear());
        }
    }

    #[test]
    fn accumulator_merge_is_multiset_sum(
        lists in prop::collection::vec(prop::collection::btree_map(0u32..30, 1u64..9, 0..10), 0..8),
    ) {
        let mut acc = ColorAccumulator::<Count>::new(30);
        let mut want = BTreeMap::<u32, u64>::new();
        for l in &lists {
            let f: FrequencyList<Count> = l.iter().map(|(&c, &w)| (ColorId(c), Count(w))).collect();
            acc.accumulate(&f);
            for (&c, &w) in l {
                *want.entry(c).or_default() += w;
            }
        }
        let touched = acc.touched().len();
        let got = acc.drain_and_reset();
        let want: FrequencyList<Count> = want.into_iter().map(|(c, w)| (ColorId(c), Count(w))).collect();
        prop_assert_eq!(got, want);
        prop_assert_eq!(acc.counters().drain_visits, touched as u64);
        prop_assert!(acc.is_clear());
    }

    #[test]
    fn weight_laws(a in any::<u32>(), b in any::<u32>(), c in any::<u32>(), x in -100i64..100, y in -100i64..100, z in -100i64..100) {
        let (a, b, c) = (Count(a.into()), Count(b.into()), Count(c.into()));
        prop_assert_eq!(a.combine(b).combine(c), a.combine(b.combine(c)));
        prop_assert_eq!(a.combine(b), b.combine(a));
        prop_assert_eq!(a.combine(Count::identity()), a);
        let (x, y, z) = (MaxWeight(x), MaxWeight(y), MaxWeight(z));
        prop_assert_eq!(x.combine(y).combine(z), x.combine(y.combine(z)));
        prop_assert_eq!(x.combine(y), y.combine(x));
        prop_assert_eq!(x.combine(MaxWeight::identity()), x);
    }

    #[test]
    fn frequency_list_equality_ignores_order(entries in prop::collection::btree_map(0u32..50, 1u64..9, 0..20)) {
        let v: Vec<(ColorId, Count)> = entries.iter().map(|(&c, &w)| (ColorId(c), Count(w))).collect();
        let mut r = v.clone();
        r.reverse();
        prop_assert_eq!(FrequencyList::from_entries(v), FrequencyList::from_entries(r));
    }
}
