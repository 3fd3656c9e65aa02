use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use colorfreq::dominance::{ceil_log, stored_entries_bound};
use colorfreq::oracle::brute_force_batch;
use colorfreq::{
    answer_offline_dominance, answer_offline_three_sided, build_box, gen_dataset, gen_queries, parse_queries,
    parse_sides, queries_to_text, BoxQuery, ColorId, ColorIndex, Count, Dataset, FrequencyList, GenConfig,
    MaxWeight, OfflineParams, SampleWeight, Side, TreeParams,
};

#[derive(Parser)]
#[command(name = "colorfreq", version, about = "Color frequency reporting over colored point sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random dataset and query file
    Gen(GenArgs),
    /// Build the online index and answer every query
    BuildQuery(RunArgs),
    /// Answer the batch with the offline sweep
    Offline(RunArgs),
    /// Compare the index against brute force and check counter bounds
    Verify(RunArgs),
    /// One CSV row of timings and counters per fan-out
    Bench(RunArgs),
    /// Structure counters per fan-out
    Stats(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightMode {
    /// Each point counts one
    Count,
    /// Integer weights combined by max
    Semigroup,
}

#[derive(Args, Clone)]
struct Instance {
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    colors: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give every color the same number of points
    #[arg(long)]
    equal_classes: bool,
    #[arg(long, value_enum, default_value_t = WeightMode::Count)]
    weights: WeightMode,
    /// Per-axis shape, e.g. `both,upper`; each of upper, lower, both
    #[arg(long)]
    sides: Option<String>,
    /// Dataset file; generated from the flags above when absent
    #[arg(long)]
    data: Option<PathBuf>,
    /// Query file; generated when absent
    #[arg(long)]
    query_file: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: Instance,
    /// Directory receiving points.txt and queries.txt
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inst: Instance,
    /// Strip tree fan-out; a comma separated list runs each
    #[arg(long, value_delimiter = ',')]
    fanout: Vec<usize>,
    #[arg(long)]
    leaf_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sweep_axis: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    corrupt_first: bool,
}

trait CliWeight: SampleWeight + Send + Sync
where
    <Self as FromStr>::Err: Display,
{
}

impl CliWeight for Count {}
impl CliWeight for MaxWeight {}

struct Loaded<W> {
    data: Dataset<W>,
    queries: Vec<BoxQuery>,
    sides: Vec<Side>,
}

impl Instance {
    fn sides(&self) -> Result<Option<Vec<Side>>> {
        let Some(list) = &self.sides else { return Ok(None) };
        let sides = parse_sides(list).map_err(anyhow::Error::msg)?;
        if sides.len() != self.dims {
            bail!("--sides names {} axes but --dims is {}", sides.len(), self.dims);
        }
        Ok(Some(sides))
    }

    fn config(&self, points: usize) -> Result<GenConfig> {
        let mut cfg = GenConfig::new(points, self.dims, self.colors);
        cfg.queries = self.queries;
        cfg.seed = self.seed;
        cfg.equal_classes = self.equal_classes;
        cfg.sides = self.sides()?.unwrap_or_else(|| vec![Side::Upper; self.dims]);
        Ok(cfg)
    }

    fn load<W: CliWeight>(&self) -> Result<Loaded<W>>
    where
        <W as FromStr>::Err: Display,
    {
        if self.dims == 0 {
            bail!("--dims must be at least 1");
        }
        let data = match &self.data {
            Some(path) => Dataset::parse(&read(path)?, self.dims).with_context(|| format!("in {}", path.display()))?,
            None => gen_dataset(&self.config(self.points)?),
        };
        let queries = match &self.query_file {
            Some(path) => parse_queries(&read(path)?, self.dims).with_context(|| format!("in {}", path.display()))?,
            None => gen_queries(&self.config(data.points.len())?),
        };
        let sides = match self.sides()? {
            Some(s) => s,
            None => infer_sides(self.dims, &queries),
        };
        Ok(Loaded { data, queries, sides })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// The narrowest shape that accepts every query.
fn infer_sides(dims: usize, queries: &[BoxQuery]) -> Vec<Side> {
    (0..dims)
        .map(|a| {
            let lo = queries.iter().any(|q| q.bounds[a].has_lo());
            let hi = queries.iter().any(|q| q.bounds[a].has_hi());
            match (lo, hi) {
                (true, true) => Side::Both,
                (true, false) => Side::Lower,
                _ => Side::Upper,
            }
        })
        .collect()
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Upper => "upper",
        Side::Lower => "lower",
        Side::Both => "both",
    }
}

fn sides_text(sides: &[Side]) -> String {
    sides.iter().map(|&s| side_name(s)).collect::<Vec<_>>().join(",")
}

impl RunArgs {
    fn fanouts(&self, n: usize) -> Vec<usize> {
        if self.fanout.is_empty() {
            vec![4.min(n.max(2))]
        } else {
            self.fanout.clone()
        }
    }

    fn params(&self, s: usize) -> TreeParams {
        match self.leaf_size {
            Some(l) => TreeParams::new(s).with_leaf_size(l),
            None => TreeParams::new(s),
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(io::BufWriter::new(
                fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(io::BufWriter::new(io::stdout().lock())),
        })
    }
}

/// Offline route that fits the batch, if any.
enum OfflineShape {
    Dominance,
    ThreeSided,
}

fn offline_shape(dims: usize, queries: &[BoxQuery]) -> Option<OfflineShape> {
    if queries.iter().all(BoxQuery::is_dominance) {
        Some(OfflineShape::Dominance)
    } else if dims == 2 && queries.iter().all(|q| !q.bounds[1].has_lo()) {
        Some(OfflineShape::ThreeSided)
    } else {
        None
    }
}

struct OfflineRun<W> {
    /// Answers in emission order.
    stream: Vec<(u32, FrequencyList<W>)>,
    peak_live_entries: u64,
    built: u64,
    destroyed: u64,
    order_violations: u64,
    merge_violations: u64,
}

fn run_offline<W: CliWeight>(
    loaded: &Loaded<W>,
    params: TreeParams,
    sweep_axis: usize,
) -> Result<Option<OfflineRun<W>>>
where
    <W as FromStr>::Err: Display,
{
    let Some(shape) = offline_shape(loaded.data.dims, &loaded.queries) else {
        return Ok(None);
    };
    let batch: Vec<(u32, BoxQuery)> = loaded.queries.iter().cloned().enumerate().map(|(i, q)| (i as u32, q)).collect();
    let mut stream = Vec::with_capacity(batch.len());
    let sink = |id, ans| stream.push((id, ans));
    let mut run = OfflineRun {
        stream: Vec::new(),
        peak_live_entries: 0,
        built: 0,
        destroyed: 0,
        order_violations: 0,
        merge_violations: 0,
    };
    match shape {
        OfflineShape::Dominance => {
            let offline = OfflineParams {
                tree: params,
                sweep_axis,
            };
            let s = answer_offline_dominance(&loaded.data.points, loaded.data.dims, &batch, offline, sink)?;
            run.peak_live_entries = s.peak_live_entries;
            run.built = s.total_built;
            run.destroyed = s.total_destroyed;
            run.order_violations = s.emit_order_violations;
        }
        OfflineShape::ThreeSided => {
            let s = answer_offline_three_sided(&loaded.data.points, &batch, params, sink)?;
            run.peak_live_entries = s.peak_live_entries;
            run.built = s.total_built;
            run.destroyed = s.total_destroyed;
            run.order_violations = s.emit_order_violations;
            run.merge_violations = s.merge_violations;
        }
    }
    run.stream = stream;
    Ok(Some(run))
}

fn build_index<W: CliWeight>(loaded: &Loaded<W>, params: TreeParams) -> Result<ColorIndex<W>>
where
    <W as FromStr>::Err: Display,
{
    Ok(build_box(&loaded.data.points, loaded.data.dims, params, &loaded.sides)?)
}

fn gen<W: CliWeight>(args: &GenArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let cfg = args.inst.config(args.inst.points)?;
    if cfg.dims == 0 {
        bail!("--dims must be at least 1");
    }
    let data: Dataset<W> = gen_dataset(&cfg);
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let points = args.out.join("points.txt");
    let queries = args.out.join("queries.txt");
    fs::write(&points, data.to_text()).with_context(|| format!("cannot write {}", points.display()))?;
    fs::write(&queries, queries_to_text(&gen_queries(&cfg))).with_context(|| format!("cannot write {}", queries.display()))?;
    println!("{}\n{}", points.display(), queries.display());
    Ok(ExitCode::SUCCESS)
}

fn build_query<W: CliWeight>(args: &RunArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let loaded = args.inst.load::<W>()?;
    let s = args.fanouts(loaded.data.points.len())[0];
    let idx = build_index(&loaded, args.params(s))?;
    let mut out = args.sink()?;
    for (i, ans) in idx.query_batch(&loaded.queries).into_iter().enumerate() {
        writeln!(out, "{}", loaded.data.format_answer(i as u32, &ans?))?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn offline<W: CliWeight>(args: &RunArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let loaded = args.inst.load::<W>()?;
    let s = args.fanouts(loaded.data.points.len())[0];
    let Some(run) = run_offline(&loaded, args.params(s), args.sweep_axis)? else {
        bail!("the offline sweep takes dominance queries, or [x1, x2] x (-inf, y] queries in two dimensions");
    };
    let mut out = args.sink()?;
    for (id, ans) in &run.stream {
        writeln!(out, "{}", loaded.data.format_answer(*id, ans))?;
    }
    out.flush()?;
    eprintln!(
        "peak_live_entries={} built={} destroyed={} order_violations={}",
        run.peak_live_entries, run.built, run.destroyed, run.order_violations
    );
    Ok(ExitCode::SUCCESS)
}

fn corrupt<W: CliWeight>(ans: &mut FrequencyList<W>)
where
    <W as FromStr>::Err: Display,
{
    *ans = if ans.is_empty() {
        FrequencyList::from_entries(vec![(ColorId(0), W::default_point())])
    } else {
        FrequencyList::new()
    };
}

fn verify<W: CliWeight>(args: &RunArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let loaded = args.inst.load::<W>()?;
    let n = loaded.data.points.len();
    let d = loaded.data.dims;
    let want = brute_force_batch(&loaded.data.points, &loaded.queries);
    let layers = loaded.sides.iter().filter(|&&s| s == Side::Both).count();
    let mut out = args.sink()?;
    writeln!(
        out,
        "n={n} d={d} colors={} queries={} sides={}",
        loaded.data.labels.len(),
        loaded.queries.len(),
        sides_text(&loaded.sides)
    )?;
    let mut mismatches = 0usize;
    let mut violations = 0usize;
    let mut first: Option<String> = None;
    let note = |first: &mut Option<String>, what: &str, i: usize, got: &FrequencyList<W>| {
        first.get_or_insert_with(|| {
            format!(
                "first mismatch ({what}) at query {i}: {}\n  expected: {}\n  got:      {}",
                colorfreq::format_query(&loaded.queries[i]),
                loaded.data.format_answer(i as u32, &want[i]),
                loaded.data.format_answer(i as u32, got)
            )
        });
    };
    for s in args.fanouts(n) {
        let params = args.params(s);
        let idx = build_index(&loaded, params)?;
        let levels = ceil_log(s, n) as u64 + 1;
        let sub_bound = (1u64 << layers) * levels.pow(d as u32 - 1);
        let mut online_bad = 0;
        let (mut max_sub, mut max_inner, mut bound_bad) = (0, 0, 0);
        for (i, res) in idx.query_batch_traced(&loaded.queries).into_iter().enumerate() {
            let (mut got, cost) = res?;
            let k = got.len() as u64;
            if args.corrupt_first && i == 0 {
                corrupt(&mut got);
            }
            if got != want[i] {
                online_bad += 1;
                note(&mut first, &format!("online, s={s}"), i, &got);
            }
            let sub = cost.probes.line_queries + cost.probes.leaf_scans;
            max_sub = max_sub.max(sub);
            max_inner = max_inner.max(cost.probes.dominance_queries);
            if sub > sub_bound
                || cost.probes.dominance_queries > 1 << layers
                || cost.acc.cell_touches > k * sub_bound
                || cost.acc.subtractions > 0
            {
                bound_bad += 1;
            }
        }
        let stats = idx.stats();
        let space = if layers == 0 && d >= 2 {
            let bound = stored_entries_bound(n, s, d);
            if stats.stored_entries > bound {
                bound_bad += 1;
            }
            format!("stored_entries={} (bound {bound})", stats.stored_entries)
        } else {
            format!("stored_entries={}", stats.stored_entries)
        };
        writeln!(
            out,
            "s={s}: online {online_bad} mismatches; substructure queries max {max_sub} (bound {sub_bound}); \
             inner queries max {max_inner} (bound {}); {space}; {bound_bad} bound violations",
            1u64 << layers
        )?;
        mismatches += online_bad;
        violations += bound_bad;
        match run_offline(&loaded, params, args.sweep_axis)? {
            Some(run) => {
                let mut offline_bad = 0;
                let mut seen = vec![0u32; loaded.queries.len()];
                for (id, got) in &run.stream {
                    let i = *id as usize;
                    seen[i] += 1;
                    if *got != want[i] {
                        offline_bad += 1;
                        note(&mut first, &format!("offline, s={s}"), i, got);
                    }
                }
                offline_bad += seen.iter().filter(|&&c| c != 1).count();
                let bad = usize::from(
                    run.peak_live_entries > n as u64
                        || run.built != run.destroyed
                        || run.order_violations > 0
                        || run.merge_violations > 0,
                );
                writeln!(
                    out,
                    "s={s}: offline {offline_bad} mismatches; peak_live_entries={} built={} destroyed={} \
                     order_violations={} merge_violations={}",
                    run.peak_live_entries, run.built, run.destroyed, run.order_violations, run.merge_violations
                )?;
                mismatches += offline_bad;
                violations += bad;
            }
            None => writeln!(out, "s={s}: offline skipped for this query shape")?,
        }
    }
    writeln!(out, "{mismatches} mismatches")?;
    writeln!(out, "{violations} bound violations")?;
    out.flush()?;
    if let Some(f) = first {
        eprintln!("{f}");
    }
    Ok(if mismatches == 0 && violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

const BENCH_HEADER: &str =
    "n,m,d,s,phi,build_ms,query_us_p50,query_us_p99,k_total,stored_entries,peak_live_entries,probes";

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn bench<W: CliWeight>(args: &RunArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let loaded = args.inst.load::<W>()?;
    let n = loaded.data.points.len();
    let mut out = args.sink()?;
    writeln!(out, "{BENCH_HEADER}")?;
    for s in args.fanouts(n) {
        let params = args.params(s);
        let t = Instant::now();
        let idx = build_index(&loaded, params)?;
        let build_ms = t.elapsed().as_secs_f64() * 1e3;
        let mut session = idx.session();
        let mut times = Vec::with_capacity(loaded.queries.len());
        let (mut k_total, mut probes) = (0u64, 0u64);
        for q in &loaded.queries {
            let t = Instant::now();
            let (ans, cost) = idx.query_traced(q, &mut session)?;
            times.push(t.elapsed().as_secs_f64() * 1e6);
            k_total += ans.len() as u64;
            probes += cost.probes.line_queries + cost.probes.leaf_scans;
        }
        times.sort_by(f64::total_cmp);
        let peak = run_offline(&loaded, params, args.sweep_axis)?.map_or(0, |r| r.peak_live_entries);
        writeln!(
            out,
            "{n},{},{},{s},{},{build_ms:.3},{:.3},{:.3},{k_total},{},{peak},{probes}",
            loaded.queries.len(),
            loaded.data.dims,
            loaded.data.labels.len(),
            percentile(&times, 0.5),
            percentile(&times, 0.99),
            idx.stats().stored_entries,
        )?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn stats<W: CliWeight>(args: &RunArgs) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    let loaded = args.inst.load::<W>()?;
    let n = loaded.data.points.len();
    let d = loaded.data.dims;
    let mut out = args.sink()?;
    writeln!(out, "n={n} d={d} colors={} sides={}", loaded.data.labels.len(), sides_text(&loaded.sides))?;
    for s in args.fanouts(n) {
        let params = args.params(s);
        let st = build_index(&loaded, params)?.stats();
        write!(
            out,
            "s={s} leaf_size={} layers={} stored_entries={} leaf_points={} dominance_structures={} build_ops={}",
            params.leaf_threshold(),
            st.layers,
            st.stored_entries,
            st.leaf_points,
            st.dominance_structures,
            st.build_ops
        )?;
        if st.layers == 0 && d >= 2 {
            write!(out, " entry_bound={}", stored_entries_bound(n, s, d))?;
        }
        writeln!(out, " levels={}", ceil_log(s, n) + 1)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch<W: CliWeight>(cmd: &Cmd) -> Result<ExitCode>
where
    <W as FromStr>::Err: Display,
{
    match cmd {
        Cmd::Gen(a) => gen::<W>(a),
        Cmd::BuildQuery(a) => build_query::<W>(a),
        Cmd::Offline(a) => offline::<W>(a),
        Cmd::Verify(a) => verify::<W>(a),
        Cmd::Bench(a) => bench::<W>(a),
        Cmd::Stats(a) => stats::<W>(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let weights = match &cli.cmd {
        Cmd::Gen(a) => a.inst.weights,
        Cmd::BuildQuery(a) | Cmd::Offline(a) | Cmd::Verify(a) | Cmd::Bench(a) | Cmd::Stats(a) => a.inst.weights,
    };
    let res = match weights {
        WeightMode::Count => dispatch::<Count>(&cli.cmd),
        WeightMode::Semigroup => dispatch::<MaxWeight>(&cli.cmd),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
