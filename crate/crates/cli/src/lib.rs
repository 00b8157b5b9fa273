//! Command implementations for the `ctgt` binary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ctgt::bnb::{analyze_collection, iterative_shortcut, BatchConfig, NamedSet, RowOutcome};
use ctgt::driver::{full_closed_test, globaltest, LocalTester};
use ctgt::io::{self, LoadedDataset, Normalization, RawTable, ResultRecord, RunMetadata};
use ctgt::shortcut::{alpha0_survey, export_curves, Alpha0Survey};
use ctgt::sim::{simulate, SimConfig};
use ctgt::{Decision, Error, Model, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_UNSURE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "ctgt", version, about = "Closed testing with Globaltest for feature sets under a logistic model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed testing of one set against all features.
    Test(SetCommand),
    /// Closed testing of every pathway in a collection.
    Analyze(AnalyzeArgs),
    /// Tabulate the g_min and c_max curves of one set.
    Curves(CurvesArgs),
    /// Compare the shortcut with full enumeration for one set.
    Oracle(SetCommand),
    /// Empirical FWER and power on simulated logistic data.
    Simulate(SimulateArgs),
    /// Survey alpha0 over random supersets.
    #[command(name = "alpha0-check")]
    Alpha0Check(Alpha0Args),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited data file (comma or tab), samples as rows.
    #[arg(long)]
    pub data: PathBuf,
    /// Binary response column.
    #[arg(long)]
    pub response: String,
    /// Confounder columns, comma separated; an intercept is always added.
    #[arg(long, value_delimiter = ',')]
    pub confounders: Vec<String>,
    #[arg(long, default_value = "none")]
    pub normalize: Normalization,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = ctgt::shortcut::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Single-step budget per set.
    #[arg(long = "max-iter", default_value_t = ctgt::bnb::DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    #[arg(long = "trunc-tol", default_value_t = ctgt::wchi2::DEFAULT_TRUNC_TOL)]
    pub trunc_tol: f64,
    /// Largest complement size enumerated by the oracle.
    #[arg(long = "oracle-cap", default_value_t = ctgt::driver::DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidInput(format!("--alpha must lie in (0, 0.5), got {}", self.alpha)));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidInput(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("--max-iter must be at least 1".into()));
        }
        if !(self.trunc_tol > 0.0 && self.trunc_tol < 1.0) {
            return Err(Error::InvalidInput(format!("--trunc-tol must lie in (0, 1), got {}", self.trunc_tol)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("--workers must be at least 1".into()));
        }
        Ok(())
    }

    fn batch(&self) -> BatchConfig {
        BatchConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
            max_iterations: self.max_iter,
            trunc_tol: self.trunc_tol,
            workers: self.workers,
        }
    }

    fn echo(&self, w: &mut dyn Write, prefix: &str) -> Result<()> {
        writeln!(w, "{prefix}alpha: {}", self.alpha)?;
        writeln!(w, "{prefix}epsilon: {}", self.epsilon)?;
        writeln!(w, "{prefix}max_iter: {}", self.max_iter)?;
        writeln!(w, "{prefix}trunc_tol: {}", self.trunc_tol)?;
        writeln!(w, "{prefix}oracle_cap: {}", self.oracle_cap)?;
        writeln!(w, "{prefix}seed: {}", self.seed)?;
        let workers = self.workers.map_or("auto".to_string(), |k| k.to_string());
        writeln!(w, "{prefix}workers: {workers}")?;
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SetCommand {
    #[command(flatten)]
    pub data: DataArgs,
    /// Set members, comma separated feature names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub set: Vec<String>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also survey alpha0 over K random supersets.
    #[arg(long = "alpha0-check", value_name = "K", num_args = 0..=1, default_missing_value = "100")]
    pub alpha0_check: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Pathway file: name, description, members; tab separated.
    #[arg(long)]
    pub pathways: PathBuf,
    /// Also test every single feature.
    #[arg(long)]
    pub singletons: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: Format,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long = "alpha0-check", value_name = "K", num_args = 0..=1, default_missing_value = "100")]
    pub alpha0_check: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub set: SetCommand,
    /// Evenly spaced levels, in addition to the breakpoints.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    /// Random pathways per replicate.
    #[arg(long = "n-pathways", default_value_t = 30)]
    pub n_pathways: usize,
    #[arg(long = "min-size", default_value_t = 2)]
    pub min_size: usize,
    #[arg(long = "max-size", default_value_t = 6)]
    pub max_size: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Log-odds per unit of each signal feature; 0 is the global null.
    #[arg(long, default_value_t = 0.0)]
    pub effect: f64,
    /// Number of signal features (the first ones).
    #[arg(long, default_value_t = 3)]
    pub signal: usize,
    #[arg(long)]
    pub singletons: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct Alpha0Args {
    #[command(flatten)]
    pub data: DataArgs,
    /// Base set; random single features when omitted.
    #[arg(long, value_delimiter = ',')]
    pub set: Vec<String>,
    /// Random supersets to draw.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

const CAVEAT: &str = "critical-value bounds hold for alpha <= alpha0; audit with --alpha0-check [K] or `ctgt alpha0-check`";

/// Runs a parsed command. Reports go to `out` unless `--out` names a file.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Test(args) => cmd_test(&args, out),
        Command::Analyze(args) => cmd_analyze(&args, out),
        Command::Curves(args) => cmd_curves(&args, out),
        Command::Oracle(args) => cmd_oracle(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Alpha0Check(args) => cmd_alpha0(&args, out),
    }
}

struct Loaded {
    data: LoadedDataset,
    model: Model,
}

fn load(args: &DataArgs) -> Result<Loaded> {
    let table = RawTable::read(&args.data)?;
    let data = io::load_dataset(&table, &args.response, &args.confounders, args.normalize)?;
    let model = Model::fit(&data.dataset)?;
    if model.null().clamped > 0 {
        log::warn!("{} fitted means were clamped (possible separation)", model.null().clamped);
    }
    Ok(Loaded { data, model })
}

fn echo_data(w: &mut dyn Write, args: &DataArgs, loaded: &Loaded, prefix: &str) -> Result<()> {
    let ds = &loaded.data.dataset;
    writeln!(w, "{prefix}data: {}", args.data.display())?;
    writeln!(w, "{prefix}response: {}", loaded.data.mapping)?;
    writeln!(w, "{prefix}confounders: intercept{}", args.confounders.iter().map(|c| format!(",{c}")).collect::<String>())?;
    writeln!(w, "{prefix}normalize: {}", args.normalize)?;
    let active = loaded.model.stats().active_indices().len();
    writeln!(w, "{prefix}samples: {}", ds.n_samples())?;
    writeln!(w, "{prefix}features: {} ({active} active)", ds.n_features())?;
    Ok(())
}

/// Feature names to active indices; unknown names are errors.
fn resolve_set(loaded: &Loaded, names: &[String]) -> Result<Vec<usize>> {
    let ds = &loaded.data.dataset;
    let stats = loaded.model.stats();
    let mut set = Vec::with_capacity(names.len());
    for name in names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let i = ds.feature_index(name).ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        if stats.active[i] {
            set.push(i);
        } else {
            log::warn!("feature `{name}` is constant after adjustment and is dropped");
        }
    }
    let set = ctgt::sets::normalize(set);
    if set.is_empty() {
        return Err(Error::InvalidInput("the set has no active member".into()));
    }
    Ok(set)
}

fn names(loaded: &Loaded, set: &[usize]) -> String {
    let names = loaded.data.dataset.feature_names();
    set.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(",")
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_survey(w: &mut dyn Write, survey: &Alpha0Survey, alpha: f64, prefix: &str) -> Result<()> {
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| v.to_string());
    writeln!(w, "{prefix}alpha0_samples: {}", survey.values.len())?;
    writeln!(w, "{prefix}alpha0_failures: {}", survey.failures)?;
    writeln!(w, "{prefix}alpha0_min: {}", fmt(survey.min()))?;
    writeln!(w, "{prefix}alpha0_median: {}", fmt(survey.median()))?;
    let ok = survey.min().is_some_and(|a| alpha <= a);
    writeln!(w, "{prefix}alpha_within_alpha0: {}", if ok { "yes" } else { "no" })?;
    Ok(())
}

fn cmd_test(args: &SetCommand, out: &mut dyn Write) -> Result<u8> {
    args.run.validate()?;
    let loaded = load(&args.data)?;
    let set = resolve_set(&loaded, &args.set)?;
    let stats = loaded.model.stats();
    let universe = stats.active_indices();
    let mut tester = LocalTester::new(stats, &loaded.model, args.run.alpha)?.with_trunc_tol(args.run.trunc_tol);
    let result = iterative_shortcut(&mut tester, &set, &universe, args.run.epsilon, args.run.max_iter)?;
    let gt = globaltest(stats, &loaded.model, &set, args.run.alpha)?;

    echo_data(out, &args.data, &loaded, "# ")?;
    args.run.echo(out, "# ")?;
    writeln!(out, "# note: {CAVEAT}")?;
    writeln!(out, "set: {}", names(&loaded, &set))?;
    writeln!(out, "size: {}", set.len())?;
    writeln!(out, "level: {}", stats.level(&set))?;
    writeln!(out, "statistic: {}", gt.statistic)?;
    writeln!(out, "critical_value: {}", gt.critical_value)?;
    writeln!(out, "p_value: {}", gt.p_value)?;
    writeln!(out, "decision: {}", result.decision)?;
    writeln!(out, "iterations_used: {}", result.iterations_used)?;
    writeln!(out, "frontier_size: {}", result.frontier_size)?;
    writeln!(out, "witness: {}", result.witness.as_ref().map(|w| names(&loaded, w)).unwrap_or_default())?;
    if let Some(k) = args.alpha0_check {
        let mut rng = ChaCha8Rng::seed_from_u64(args.run.seed);
        let survey = alpha0_survey(&mut tester, &set, &universe, k, &mut rng)?;
        write_survey(out, &survey, args.run.alpha, "")?;
    }
    Ok(if result.decision == Decision::Unsure { EXIT_UNSURE } else { EXIT_OK })
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<u8> {
    args.run.validate()?;
    let loaded = load(&args.data)?;
    let ds = &loaded.data.dataset;
    let collection = io::load_pathways(&args.pathways)?;
    let mut sets = collection.to_named_sets(ds);
    for r in collection.resolution(ds.feature_names()) {
        if !r.missing.is_empty() {
            log::info!("pathway `{}`: {} of {} members not in the data", r.name, r.missing.len(), r.found.len() + r.missing.len());
        }
    }
    if args.singletons {
        sets.extend(loaded.model.stats().active_indices().into_iter().map(|i| NamedSet {
            name: ds.feature_names()[i].clone(),
            size: 1,
            members: vec![i],
        }));
    }
    let rows = analyze_collection(loaded.model.stats(), &loaded.model, &sets, &args.run.batch())?;
    let records: Vec<ResultRecord> = rows.iter().map(|r| ResultRecord::from_row(r, ds.feature_names())).collect();

    let meta = RunMetadata {
        alpha: args.run.alpha,
        epsilon: args.run.epsilon,
        max_iterations: args.run.max_iter,
        trunc_tol: args.run.trunc_tol,
        seed: None,
        normalization: args.data.normalize,
        response_mapping: Some(loaded.data.mapping.clone()),
    };
    let mut stderr = std::io::stderr();
    let (table_out, report): (Box<dyn Write + '_>, &mut dyn Write) = match &args.run.out {
        Some(path) => (Box::new(open_out(path)?), out),
        None => (Box::new(&mut *out), &mut stderr),
    };
    let mut table_out = table_out;
    match args.format {
        Format::Tsv => io::write_results_tsv(&records, &mut table_out)?,
        Format::Json => io::write_results_json(&meta, &records, &mut table_out)?,
    }
    table_out.flush()?;
    drop(table_out);

    echo_data(report, &args.data, &loaded, "# ")?;
    writeln!(report, "# pathways: {} ({} tested in total)", collection.len(), sets.len())?;
    args.run.echo(report, "# ")?;
    writeln!(report, "# note: {CAVEAT}")?;
    let count = |d: Decision| rows.iter().filter(|r| r.decision() == Some(d)).count();
    let skipped = rows.iter().filter(|r| matches!(r.outcome, RowOutcome::Skipped(_))).count();
    let failed = rows.iter().filter(|r| matches!(r.outcome, RowOutcome::Failed(_))).count();
    writeln!(
        report,
        "# summary: rejected={} not_rejected={} unsure={} skipped={skipped} errors={failed}",
        count(Decision::Reject),
        count(Decision::NotReject),
        count(Decision::Unsure)
    )?;
    if let Some(k) = args.alpha0_check {
        let tested: Vec<&[usize]> = rows.iter().filter(|r| !r.resolved.is_empty()).map(|r| r.resolved.as_slice()).collect();
        if !tested.is_empty() {
            let survey = collection_survey(&loaded, &tested, k, &args.run)?;
            write_survey(report, &survey, args.run.alpha, "# ")?;
        }
    }
    Ok(EXIT_OK)
}

/// Spreads `k` superset draws over the given base sets.
fn collection_survey(loaded: &Loaded, bases: &[&[usize]], k: usize, run: &RunArgs) -> Result<Alpha0Survey> {
    let stats = loaded.model.stats();
    let universe = stats.active_indices();
    let mut tester = LocalTester::new(stats, &loaded.model, run.alpha)?.with_trunc_tol(run.trunc_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut total = Alpha0Survey { values: Vec::with_capacity(k), failures: 0 };
    for _ in 0..k {
        let base = if bases.len() == 1 {
            bases[0]
        } else {
            bases[rand::Rng::random_range(&mut rng, 0..bases.len())]
        };
        let s = alpha0_survey(&mut tester, base, &universe, 1, &mut rng)?;
        total.values.extend(s.values);
        total.failures += s.failures;
    }
    Ok(total)
}

fn cmd_curves(args: &CurvesArgs, out: &mut dyn Write) -> Result<u8> {
    let cmd = &args.set;
    cmd.run.validate()?;
    let loaded = load(&cmd.data)?;
    let set = resolve_set(&loaded, &cmd.set)?;
    let stats = loaded.model.stats();
    let universe = stats.active_indices();
    let mut tester = LocalTester::new(stats, &loaded.model, cmd.run.alpha)?.with_trunc_tol(cmd.run.trunc_tol);
    let export = export_curves(&mut tester, &set, &universe, args.samples)?;

    let mut stderr = std::io::stderr();
    let (mut table_out, report): (Box<dyn Write + '_>, &mut dyn Write) = match &cmd.run.out {
        Some(path) => (Box::new(open_out(path)?), out),
        None => (Box::new(&mut *out), &mut stderr),
    };
    writeln!(table_out, "kind\tlevel\tg\tc\tset")?;
    for r in &export.rows {
        let kind = if r.breakpoint { "breakpoint" } else { "sample" };
        writeln!(table_out, "{kind}\t{}\t{}\t{}\t", r.level, r.gmin, r.cmax)?;
    }
    for p in &export.staircase {
        writeln!(table_out, "staircase\t{}\t{}\t{}\t{}", p.level, p.statistic, p.critical_value, names(&loaded, &p.set))?;
    }
    table_out.flush()?;
    drop(table_out);

    echo_data(report, &cmd.data, &loaded, "# ")?;
    args.set.run.echo(report, "# ")?;
    writeln!(report, "# samples: {}", args.samples)?;
    writeln!(report, "# set: {}", names(&loaded, &set))?;
    writeln!(report, "# note: {CAVEAT}")?;
    if let Some(k) = cmd.alpha0_check {
        let mut rng = ChaCha8Rng::seed_from_u64(cmd.run.seed);
        let survey = alpha0_survey(&mut tester, &set, &universe, k, &mut rng)?;
        write_survey(report, &survey, cmd.run.alpha, "# ")?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(args: &SetCommand, out: &mut dyn Write) -> Result<u8> {
    args.run.validate()?;
    let loaded = load(&args.data)?;
    let set = resolve_set(&loaded, &args.set)?;
    let stats = loaded.model.stats();
    let universe = stats.active_indices();
    let model = &loaded.model;

    let started = Instant::now();
    let mut oracle_tester = LocalTester::new(stats, model, args.run.alpha)?.with_trunc_tol(args.run.trunc_tol);
    let oracle = full_closed_test(&mut oracle_tester, &set, &universe, args.run.oracle_cap)?;
    let oracle_time = started.elapsed();

    let started = Instant::now();
    let mut tester = LocalTester::new(stats, model, args.run.alpha)?.with_trunc_tol(args.run.trunc_tol);
    let shortcut = iterative_shortcut(&mut tester, &set, &universe, args.run.epsilon, args.run.max_iter)?;
    let shortcut_time = started.elapsed();

    let oracle_decision = if oracle.rejects() { Decision::Reject } else { Decision::NotReject };
    echo_data(out, &args.data, &loaded, "# ")?;
    args.run.echo(out, "# ")?;
    writeln!(out, "# note: {CAVEAT}")?;
    writeln!(out, "set: {}", names(&loaded, &set))?;
    writeln!(out, "oracle_decision: {oracle_decision}")?;
    writeln!(out, "oracle_tests: {}", oracle.n_tests)?;
    writeln!(out, "oracle_first_failure: {}", oracle.first_failure.as_ref().map(|s| names(&loaded, s)).unwrap_or_default())?;
    writeln!(out, "shortcut_decision: {}", shortcut.decision)?;
    writeln!(out, "shortcut_iterations: {}", shortcut.iterations_used)?;
    writeln!(out, "shortcut_exact_tests: {}", tester.evaluations())?;
    writeln!(out, "shortcut_witness: {}", shortcut.witness.as_ref().map(|s| names(&loaded, s)).unwrap_or_default())?;
    writeln!(out, "agree: {}", shortcut.decision == oracle_decision)?;
    writeln!(out, "oracle_seconds: {:.6}", oracle_time.as_secs_f64())?;
    writeln!(out, "shortcut_seconds: {:.6}", shortcut_time.as_secs_f64())?;
    Ok(if shortcut.decision == Decision::Unsure { EXIT_UNSURE } else { EXIT_OK })
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<u8> {
    args.run.validate()?;
    let config = SimConfig {
        n: args.n,
        m: args.m,
        n_pathways: args.n_pathways,
        pathway_size: (args.min_size, args.max_size),
        signal: args.signal,
        effect: args.effect,
        include_singletons: args.singletons,
    };
    let summary = simulate(&config, &args.run.batch(), args.run.seed, args.replicates)?;
    let alpha = args.run.alpha;
    let bound = alpha + 2.6 * (alpha * (1.0 - alpha) / args.replicates as f64).sqrt();

    writeln!(out, "# n: {}", args.n)?;
    writeln!(out, "# m: {}", args.m)?;
    writeln!(out, "# n_pathways: {}", args.n_pathways)?;
    writeln!(out, "# pathway_size: {}..={}", args.min_size, args.max_size)?;
    writeln!(out, "# singletons: {}", args.singletons)?;
    writeln!(out, "# replicates: {}", args.replicates)?;
    writeln!(out, "# effect: {}", args.effect)?;
    writeln!(out, "# signal: {}", args.signal)?;
    args.run.echo(out, "# ")?;
    writeln!(out, "# note: {CAVEAT}")?;
    writeln!(out, "sets_per_replicate: {}", summary.sets_per_replicate)?;
    writeln!(out, "fwer: {}", summary.fwer)?;
    writeln!(out, "fwer_replicates: {}", summary.fwer_count)?;
    writeln!(out, "fwer_bound: {bound}")?;
    writeln!(out, "mean_true_rejections: {}", summary.mean_true_rejections)?;
    writeln!(out, "mean_false_rejections: {}", summary.mean_false_rejections)?;
    writeln!(out, "mean_unsure: {}", summary.mean_unsure)?;
    writeln!(out, "errors: {}", summary.errors)?;
    if let Some(path) = &args.run.out {
        let mut f = open_out(path)?;
        let doc = serde_json::json!({ "config": config, "alpha": alpha, "seed": args.run.seed, "summary": summary });
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(EXIT_OK)
}

fn cmd_alpha0(args: &Alpha0Args, out: &mut dyn Write) -> Result<u8> {
    args.run.validate()?;
    let loaded = load(&args.data)?;
    let universe = loaded.model.stats().active_indices();
    let survey = if args.set.is_empty() {
        let singletons: Vec<Vec<usize>> = universe.iter().map(|&i| vec![i]).collect();
        let bases: Vec<&[usize]> = singletons.iter().map(Vec::as_slice).collect();
        collection_survey(&loaded, &bases, args.samples, &args.run)?
    } else {
        let set = resolve_set(&loaded, &args.set)?;
        collection_survey(&loaded, &[&set], args.samples, &args.run)?
    };
    echo_data(out, &args.data, &loaded, "# ")?;
    args.run.echo(out, "# ")?;
    let base = if args.set.is_empty() { "random single features".to_string() } else { args.set.join(",") };
    writeln!(out, "# base: {base}")?;
    write_survey(out, &survey, args.run.alpha, "")?;
    Ok(EXIT_OK)
}
