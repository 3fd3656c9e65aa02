use colorfreq::oracle::brute_force_batch;
use colorfreq::{
    build_box, build_box_bounded, gen_dataset, gen_queries, ColorId, ColoredPoint, Count, Dataset, GenConfig,
    MaxWeight, PartRole, Side, TreeParams,
};

#[test]
fn three_hundred_rectangles() {
    let mut cfg = GenConfig::new(1000, 2, 20);
    cfg.queries = 300;
    cfg.seed = 11;
    cfg.sides = vec![Side::Both, Side::Both];
    let ds: Dataset<Count> = gen_dataset(&cfg);
    let queries = gen_queries(&cfg);
    let idx = build_box_bounded(&ds.points, 2, TreeParams::new(8), &[0, 1]).unwrap();
    let want = brute_force_batch(&ds.points, &queries);
    for (got, want) in idx.query_batch(&queries).into_iter().zip(&want) {
        assert_eq!(&got.unwrap(), want);
    }
}

#[test]
fn every_shape_up_to_three_dimensions() {
    let mut seed = 100;
    for d in 1..=3usize {
        for mask in 0..3usize.pow(d as u32) {
            let sides: Vec<Side> = (0..d)
                .map(|a| [Side::Upper, Side::Lower, Side::Both][(mask / 3usize.pow(a as u32)) % 3])
                .collect();
            seed += 1;
            let mut cfg = GenConfig::new(150, d, 9);
            cfg.queries = 40;
            cfg.seed = seed;
            cfg.sides = sides.clone();
            let ds: Dataset<Count> = gen_dataset(&cfg);
            let queries = gen_queries(&cfg);
            let idx = build_box(&ds.points, d, TreeParams::new(3).with_leaf_size(2), &sides).unwrap();
            let want = brute_force_batch(&ds.points, &queries);
            let got = idx.query_batch_sequential(&queries);
            for ((g, w), q) in got.into_iter().zip(&want).zip(&queries) {
                assert_eq!(&g.unwrap(), w, "sides {sides:?} query {q:?}");
            }
        }
    }
}

#[test]
fn rectangles_with_max_weights() {
    let mut cfg = GenConfig::new(600, 2, 15);
    cfg.queries = 200;
    cfg.seed = 12;
    cfg.sides = vec![Side::Both, Side::Both];
    let ds: Dataset<MaxWeight> = gen_dataset(&cfg);
    let queries = gen_queries(&cfg);
    let idx = build_box_bounded(&ds.points, 2, TreeParams::new(4), &[0, 1]).unwrap();
    let want = brute_force_batch(&ds.points, &queries);
    let mut session = idx.session();
    for (q, w) in queries.iter().zip(&want) {
        let (got, cost) = idx.query_traced(q, &mut session).unwrap();
        assert_eq!(&got, w);
        assert_eq!(cost.acc.subtractions, 0);
        assert!(cost.probes.dominance_queries <= 4);
    }
}

#[test]
fn split_sides_materialized() {
    // small enough to list both halves by hand from the points
    let pts: Vec<ColoredPoint<Count>> = (0..12)
        .map(|i| ColoredPoint::counted(vec![i as f64, (i * 7 % 12) as f64], i % 3))
        .collect();
    let idx = build_box_bounded(&pts, 2, TreeParams::new(2).with_leaf_size(1), &[0]).unwrap();
    let q = colorfreq::BoxQuery::new(vec![
        colorfreq::Interval::new(2.0, 9.0),
        colorfreq::Interval::at_most(6.0),
    ]);
    let parts = idx.explain(&q).unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[0].role, PartRole::Below);
    assert_eq!(parts[1].role, PartRole::Above);
    // the root splits 0..=5 | 6..=11
    let half = |lo: i32, hi: i32| {
        let mut by_color = [0u64; 3];
        for p in &pts {
            let (x, y) = (p.coords[0] as i32, p.coords[1]);
            if lo <= x && x <= hi && (2..=9).contains(&x) && y <= 6.0 {
                by_color[p.color.index()] += 1;
            }
        }
        by_color
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (ColorId(i as u32), Count(c)))
            .collect::<colorfreq::FrequencyList<Count>>()
    };
    assert_eq!(parts[0].answer, half(0, 5));
    assert_eq!(parts[1].answer, half(6, 11));
}
