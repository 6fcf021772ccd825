use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use odaq_core::artifacts::batch::{self, BatchConfig, BatchError, PreparedItem};
use odaq_core::bench::{self, BenchError, BenchmarkOptions, ColumnMapping, GroupBy, LoadedScores, ScoreRecord};
use odaq_core::metrics::{self, MetricError, MetricScore, NativeMetric};
use odaq_core::session::{self, PlanConfig, SessionError, Store};
use odaq_core::signal::SignalError;
use odaq_core::stimuli::StimulusIndex;
use odaq_core::Cohort;
use odaq_service::{ServiceConfig, ServiceError};

use crate::{BenchArgs, Common, GenerateArgs, MeasureArgs, ReportArgs, ServeArgs};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 3,
            Self::Io(_) => 4,
            Self::Partial { .. } => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "invalid input: {m}"),
            Self::Io(m) => write!(f, "i/o failure: {m}"),
            Self::Partial { failed, total } => write!(f, "{failed} of {total} units failed; the rest completed"),
        }
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        if e.is_io() {
            Self::Io(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Io { .. } | MetricError::Signal(SignalError::Io(_)) => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<ServiceError> for CliError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Session(s) => s.into(),
            ServiceError::Io { .. } => Self::Io(e.to_string()),
        }
    }
}

type Result<T = ()> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn pool(common: &Common) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.jobs {
        if n == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(format!("starting worker threads: {e}")))
}

/// Summarise per-unit failures: full success, a partial batch, or the
/// first failure when nothing succeeded.
fn settle(mut failures: Vec<CliError>, total: usize) -> Result {
    match failures.len() {
        0 => Ok(()),
        n if n == total => Err(failures.swap_remove(0)),
        failed => Err(CliError::Partial { failed, total }),
    }
}

pub fn generate(args: GenerateArgs) -> Result {
    let entries = batch::read_manifest(&args.manifest)?;
    let mut config = BatchConfig::new(&args.out, args.seed);
    config.target_lufs = args.loudness_target;
    config.methods = (!args.method.is_empty()).then_some(args.method);
    config.levels = (!args.level.is_empty()).then_some(args.level);

    if args.common.dry_run {
        let mut out = io::stdout().lock();
        for job in batch::plan(&entries, &config) {
            writeln!(out, "{}\t{}\t{}\t{}\t{}", job.output.display(), job.item_id, job.method, job.condition, job.seed)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        return Ok(());
    }

    std::fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let pool = pool(&args.common)?;
    let failures: Vec<CliError> = pool.install(|| {
        let prepared: Vec<(String, std::result::Result<PreparedItem, BatchError>)> =
            entries.par_iter().map(|e| (e.item_id.clone(), batch::prepare_item(e, &config))).collect();
        let mut failed_items: BTreeMap<String, CliError> = BTreeMap::new();
        let mut ready = Vec::new();
        for (id, p) in prepared {
            match p {
                Ok(item) => ready.push(item),
                Err(e) => {
                    log::error!("{e}");
                    failed_items.insert(id, e.into());
                }
            }
        }
        let jobs: Vec<(&PreparedItem, batch::Job)> =
            ready.iter().flat_map(|item| batch::plan_item(&item.entry, &config).into_iter().map(move |j| (item, j))).collect();
        let results: Vec<(String, std::result::Result<PathBuf, BatchError>)> =
            jobs.par_iter().map(|(item, job)| (job.item_id.clone(), batch::run_job(item, job, &config))).collect();
        let mut written = 0usize;
        for (id, r) in results {
            match r {
                Ok(_) => written += 1,
                Err(e) => {
                    log::error!("{e}");
                    failed_items.entry(id).or_insert_with(|| e.into());
                }
            }
        }
        log::info!("wrote {written} stimuli to {}", config.out_dir.display());
        failed_items.into_values().collect()
    });
    settle(failures, entries.len())
}

pub fn measure(args: MeasureArgs) -> Result {
    let metric: NativeMetric = args.metric.parse().map_err(|e: MetricError| CliError::Validation(e.to_string()))?;
    let index = StimulusIndex::scan(&args.stimuli).map_err(io_err(&args.stimuli))?;
    let jobs = metrics::plan_measurements(&index)?;

    if args.common.dry_run {
        let mut out = io::stdout().lock();
        for job in &jobs {
            let conditions: Vec<String> = job.slots.iter().map(|(m, c)| format!("{m}/{c}")).collect();
            writeln!(out, "{}\t{}\t{}", job.test.display(), metric.name(), conditions.join(","))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        return Ok(());
    }

    let pool = pool(&args.common)?;
    let results: Vec<metrics::Result<Vec<MetricScore>>> =
        pool.install(|| jobs.par_iter().map(|job| metrics::measure_job(job, metric)).collect());
    let mut scores = Vec::new();
    let mut failures = Vec::new();
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(s) => scores.extend(s),
            Err(e) => {
                log::error!("{}: {e}", job.test.display());
                failures.push(e.into());
            }
        }
    }
    let mut out = create(&args.out)?;
    metrics::write_scores(&mut out, &scores)?;
    out.flush().map_err(io_err(&args.out))?;
    log::info!("{} {} scores written to {}", scores.len(), metric.name(), args.out.display());
    settle(failures, jobs.len())
}

fn load_subjective(paths: &[PathBuf], mapping: Option<&Path>) -> Result<LoadedScores> {
    let mapping = match mapping {
        Some(p) => ColumnMapping::load(p)?,
        None => ColumnMapping::default(),
    };
    let loaded = bench::load_scores(paths, &mapping)?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    Ok(loaded)
}

fn screen(records: Vec<ScoreRecord>, enabled: bool) -> Vec<ScoreRecord> {
    if !enabled {
        return records;
    }
    let screening = bench::post_screen(&records);
    for l in screening.listeners.iter().filter(|l| l.excluded) {
        log::info!(
            "excluding listener {}: {} of {} hidden references below threshold",
            l.listener_id,
            l.failures,
            l.reference_trials
        );
    }
    screening.kept
}

pub fn bench(args: BenchArgs) -> Result {
    let loaded = load_subjective(&args.scores, args.mapping.as_deref())?;
    let mut metric_scores = Vec::new();
    for p in &args.metric {
        metric_scores.extend(metrics::ingest_external_scores(p)?);
    }
    let records = screen(loaded.records, !args.no_screening);
    let reports = bench::benchmark_all(&metric_scores, &records, &BenchmarkOptions::default())?;
    for report in &reports {
        for w in &report.warnings {
            log::warn!("{}: {w}", report.metric);
        }
    }

    if args.common.dry_run {
        let mut out = io::stdout().lock();
        bench::write_report_csv(&mut out, &reports)?;
        return Ok(());
    }

    let mut out = create(&args.out)?;
    bench::write_report_csv(&mut out, &reports)?;
    out.flush().map_err(io_err(&args.out))?;
    if let Some(path) = &args.audit {
        let mut w = create(path)?;
        bench::write_audit_csv(&mut w, &reports)?;
        w.flush().map_err(io_err(path))?;
    }
    if let Some(path) = &args.heatmap {
        let mut w = create(path)?;
        w.write_all(bench::render_heatmap_svg(&reports).as_bytes()).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))?;
    }
    log::info!("correlation report for {} metric(s) written to {}", reports.len(), args.out.display());
    Ok(())
}

#[derive(serde::Deserialize)]
struct RosterRow {
    listener_id: String,
    cohort: String,
}

fn read_roster(path: &Path) -> Result<BTreeMap<String, Cohort>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
        _ => CliError::Validation(format!("{}: {e}", path.display())),
    })?;
    let mut roster = BTreeMap::new();
    for (i, row) in reader.deserialize::<RosterRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CliError::Validation(format!("{}, line {line}: {e}", path.display())))?;
        let cohort: Cohort = row
            .cohort
            .parse()
            .map_err(|e| CliError::Validation(format!("{}, line {line}: {e}", path.display())))?;
        if roster.insert(row.listener_id.clone(), cohort).is_some() {
            return Err(CliError::Validation(format!("{}, line {line}: duplicate listener {}", path.display(), row.listener_id)));
        }
    }
    Ok(roster)
}

pub fn serve(args: ServeArgs) -> Result {
    let roster = args.listeners.as_deref().map(read_roster).transpose()?;
    let config = ServiceConfig {
        stimuli_dir: args.stimuli,
        results_path: args.results,
        addr: (args.bind, args.port).into(),
        master_seed: args.seed,
        plan: PlanConfig { training_items: args.training_items, ..PlanConfig::default() },
        roster,
    };

    if args.common.dry_run {
        let index = StimulusIndex::scan(&config.stimuli_dir).map_err(io_err(&config.stimuli_dir))?;
        session::check_stimuli(&index, &config.plan)?;
        println!("stimuli\t{}", config.stimuli_dir.display());
        println!("results\t{}", config.results_path.display());
        println!("address\t{}", config.addr);
        println!("items\t{}", index.items.len());
        match &config.roster {
            Some(r) => println!("listeners\t{}", r.len()),
            None => println!("listeners\topen"),
        }
        return Ok(());
    }

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(format!("starting the runtime: {e}")))?;
    runtime.block_on(odaq_service::run(config, odaq_service::ctrl_c()))?;
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> bench::Result<()>) -> Result {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(io_err(path))
}

pub fn report(args: ReportArgs) -> Result {
    if args.results.is_none() && args.scores.is_empty() {
        return Err(CliError::Validation("give --results and/or --scores".into()));
    }
    let mut records = Vec::new();
    let mut exported = None;
    if let Some(path) = &args.results {
        let contents = Store::new(path).load()?;
        for q in &contents.quarantined {
            log::warn!("{}, line {}: quarantined: {}", path.display(), q.line, q.reason);
        }
        let export = session::export_scores(&contents);
        records.extend(export.iter().cloned());
        exported = Some(export);
    }
    if !args.scores.is_empty() {
        records.extend(load_subjective(&args.scores, args.mapping.as_deref())?.records);
    }
    let loaded = bench::from_records(records)?;
    for c in loaded.completeness.iter().filter(|c| !c.is_complete()) {
        log::warn!("listener {} is incomplete", c.listener_id);
    }

    let outputs = [
        "scores.csv",
        "screening.csv",
        "stats_method_level.csv",
        "stats_method_level_item.csv",
        "stats_cohort.csv",
        "anchor_context.csv",
    ];
    if args.common.dry_run {
        for name in outputs.iter().skip(usize::from(exported.is_none())) {
            println!("{}", args.out.join(name).display());
        }
        return Ok(());
    }

    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    if let Some(export) = &exported {
        write_with(&args.out.join("scores.csv"), |w| bench::write_score_records(w, export))?;
    }
    let screening = bench::post_screen(&loaded.records);
    let screening_path = args.out.join("screening.csv");
    let mut w = csv::Writer::from_writer(create(&screening_path)?);
    let csv_err = |e: csv::Error| CliError::Io(format!("{}: {e}", screening_path.display()));
    w.write_record(["listener_id", "reference_trials", "failures", "failure_rate", "excluded"]).map_err(csv_err)?;
    for l in &screening.listeners {
        w.write_record([
            l.listener_id.clone(),
            l.reference_trials.to_string(),
            l.failures.to_string(),
            format!("{:.4}", l.failure_rate),
            l.excluded.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&screening_path))?;

    let kept = &screening.kept;
    write_with(&args.out.join("stats_method_level.csv"), |w| {
        bench::write_stats_csv(w, &bench::mean_ci(kept, GroupBy::METHOD_LEVEL))
    })?;
    write_with(&args.out.join("stats_method_level_item.csv"), |w| {
        bench::write_stats_csv(w, &bench::mean_ci(kept, GroupBy::METHOD_LEVEL_ITEM))
    })?;
    let cohorts = bench::cohort_compare(kept);
    write_with(&args.out.join("stats_cohort.csv"), |w| bench::write_stats_csv(w, &cohorts.by_cohort))?;
    write_with(&args.out.join("anchor_context.csv"), |w| bench::write_anchor_context_csv(w, &cohorts.anchor_context))?;
    log::info!(
        "report for {} listener(s), {} excluded, written to {}",
        screening.listeners.len(),
        screening.excluded.len(),
        args.out.display()
    );
    Ok(())
}
