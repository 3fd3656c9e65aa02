use colorfreq::oracle::brute_force;
use colorfreq::{
    answer_offline_dominance, answer_offline_three_sided, build_box_bounded, build_dominance, gen_dataset,
    gen_queries, peak_space_report, BoxQuery, Count, Dataset, GenConfig, OfflineParams, Side, TreeParams,
};

fn job(n: usize, m: usize, seed: u64, sides: Vec<Side>) -> (Dataset<Count>, Vec<(u32, BoxQuery)>) {
    let mut cfg = GenConfig::new(n, sides.len(), (n / 10).max(1));
    cfg.queries = m;
    cfg.seed = seed;
    cfg.sides = sides;
    let ds = gen_dataset(&cfg);
    let qs = gen_queries(&cfg).into_iter().enumerate().map(|(i, q)| (i as u32, q)).collect();
    (ds, qs)
}

#[test]
fn space_report_at_two_thousand_points() {
    let (ds, qs) = job(2000, 400, 41, vec![Side::Upper; 2]);
    let params = OfflineParams::new(4);
    let online = build_dominance(&ds.points, 2, params.tree).unwrap();
    let mut emitted = 0;
    let summary = answer_offline_dominance(&ds.points, 2, &qs, params, |id, ans| {
        emitted += 1;
        assert_eq!(ans, online.query(&qs[id as usize].1).unwrap());
    })
    .unwrap();
    assert_eq!(emitted, 400);
    let report = peak_space_report(&summary);
    assert!(report.peak_live_entries <= 2000);
    assert_eq!(report.total_built, report.total_destroyed);
    assert_eq!(report.emit_order_violations, 0);
    assert_eq!(summary.max_live_copies, 1);
    // the offline run never holds more than the online structure
    assert!(summary.peak_live_entries <= online.stats().stored_entries);
}

#[test]
fn sweep_along_second_axis_streams_in_y_order() {
    let (ds, qs) = job(800, 150, 42, vec![Side::Upper; 2]);
    let mut last = f64::NEG_INFINITY;
    let summary = answer_offline_dominance(
        &ds.points,
        2,
        &qs,
        OfflineParams::new(3).with_sweep_axis(1),
        |id, ans| {
            let q = &qs[id as usize].1;
            assert!(q.bounds[1].hi >= last);
            last = q.bounds[1].hi;
            assert_eq!(ans, brute_force(&ds.points, q));
        },
    )
    .unwrap();
    assert_eq!(summary.emitted, 150);
}

#[test]
fn three_sided_offline_equals_online_box() {
    let (ds, qs) = job(1000, 300, 43, vec![Side::Both, Side::Upper]);
    let online = build_box_bounded(&ds.points, 2, TreeParams::new(4), &[0]).unwrap();
    let mut seen = vec![0; qs.len()];
    let summary = answer_offline_three_sided(&ds.points, &qs, TreeParams::new(4), |id, ans| {
        seen[id as usize] += 1;
        assert_eq!(ans, online.query(&qs[id as usize].1).unwrap());
    })
    .unwrap();
    assert!(seen.iter().all(|&c| c == 1));
    assert_eq!(summary.merge_violations, 0);
    assert_eq!(summary.subtractions, 0);
    assert_eq!(summary.max_live_copies.max(1), 1);
}
