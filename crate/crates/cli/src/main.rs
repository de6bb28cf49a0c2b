//! `synthpriv`: privacy metrics for synthetic tabular data, plus a rubric
//! engine for scoring the metrics themselves.
//!
//! Subcommands:
//!
//! * `privacy run` — run the six privacy metrics over a real/synthetic
//!   table pair and emit one report per metric.
//! * `cair aggregate` — combine evaluator score sheets into an assessment
//!   with propagated uncertainty.
//! * `cair radar` — render an assessment as an SVG radar chart.
//! * `bench` — time the nearest-neighbour kernels on generated data.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, malformed files), 2
//! invalid inputs or configuration. Logging goes to stderr and is
//! controlled by `SYNTHPRIV_LOG` (e.g. `SYNTHPRIV_LOG=info`).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use synthpriv::{
    aggregate, attribute_disclosure, canonical_json, dcr, domias, epsilon_identifiability,
    granularity_views, idr, inverse_entropy_weights, load_csv, load_labels_csv, nn_between,
    radar_svg, random_mixed_table, threshold_mia, Assessment, AttrDisclosureConfig, BandwidthRule,
    DcrAggregate, DistanceSpec, EpsIdOrientation, IdrConfig, MetricReport, MiaConfig,
    PopulationModel, RawScoreSheet, Schema, Table, TauRule, ValueBounds, DEFAULT_ENTROPY_BINS,
};

/// The metrics `privacy run` knows, in the order their reports are emitted.
const ALL_METRICS: [&str; 6] = ["dcr", "eps_id", "t_mia", "attr_disclosure", "domias", "idr"];

#[derive(Parser)]
#[command(
    name = "synthpriv",
    version,
    about = "Privacy metrics for synthetic tabular data, plus a rubric for assessing the metrics themselves"
)]
struct Cli {
    /// Worker threads for parallel distance scans (default: one per CPU).
    /// Results are identical at any thread count.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privacy metrics over real/synthetic table pairs.
    #[command(subcommand)]
    Privacy(PrivacyCommand),
    /// Rubric assessments: aggregate evaluator sheets, render radar charts.
    #[command(subcommand)]
    Cair(CairCommand),
    /// Time nearest-neighbour scans on generated mixed-type data.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum PrivacyCommand {
    /// Run privacy metrics and emit one report per metric.
    Run(Box<RunArgs>),
}

#[derive(Args)]
struct RunArgs {
    /// CSV of real records the synthetic data derives from.
    #[arg(long, value_name = "CSV")]
    real: PathBuf,

    /// CSV of synthetic records under evaluation.
    #[arg(long, value_name = "CSV")]
    synthetic: PathBuf,

    /// CSV of held-out records from the same source as the real table.
    /// Enables the membership attacks: its rows serve as non-member
    /// candidates and as the density reference.
    #[arg(long, value_name = "CSV")]
    reference: Option<PathBuf>,

    /// CSV of the full population, for exact identity-disclosure
    /// frequencies (defaults to a scaled estimate from the real table).
    #[arg(long, value_name = "CSV")]
    population: Option<PathBuf>,

    /// JSON schema sidecar fixing column names, kinds and quasi/sensitive
    /// flags for every table (default: kinds inferred per file).
    #[arg(long, value_name = "JSON")]
    schema: Option<PathBuf>,

    /// JSON configuration with per-metric parameters; command-line flags
    /// take precedence over it.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,

    /// Comma-separated metrics to run (default: every metric whose inputs
    /// are available). Known: dcr, eps_id, t_mia, attr_disclosure, domias,
    /// idr.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    metrics: Vec<String>,

    /// Seed recorded in the reports, for metrics that draw random numbers.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Write the reports here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Output format: canonical JSON or human-readable text.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum CairCommand {
    /// Aggregate evaluator score sheets for one metric and print the
    /// assessment coarse to fine.
    Aggregate(AggregateArgs),
    /// Render an aggregated assessment as an SVG radar chart.
    Radar(RadarArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Score-sheet JSON files, one per evaluator, all for the same metric.
    #[arg(required = true, value_name = "SHEET")]
    sheets: Vec<PathBuf>,

    /// Write the aggregated assessment as canonical JSON here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RadarArgs {
    /// Assessment JSON produced by `cair aggregate --out`.
    #[arg(value_name = "ASSESSMENT")]
    assessment: PathBuf,

    /// Where to write the SVG.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated row counts to probe.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000", value_name = "LIST")]
    sizes: Vec<usize>,

    /// Total column count; half numeric, half categorical.
    #[arg(long, default_value_t = 10, value_name = "N")]
    columns: usize,

    /// Seed for the generated tables.
    #[arg(long, default_value_t = 42, value_name = "U64")]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SYNTHPRIV_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: failed to size the thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", render_error(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Renders the error chain, skipping causes whose text the outer message
/// already embeds.
fn render_error(err: &anyhow::Error) -> String {
    let mut text = err.to_string();
    for cause in err.chain().skip(1) {
        let cause = cause.to_string();
        if !text.contains(&cause) {
            text.push_str(": ");
            text.push_str(&cause);
        }
    }
    text
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Privacy(PrivacyCommand::Run(args)) => privacy_run(*args),
        Command::Cair(CairCommand::Aggregate(args)) => cair_aggregate(args),
        Command::Cair(CairCommand::Radar(args)) => cair_radar(args),
        Command::Bench(args) => bench(args),
    }
}

/// 2 for invalid inputs or configuration, 1 for runtime failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    use synthpriv::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Io { .. } | E::Csv { .. } | E::Report(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

// ---------------------------------------------------------------------------
// privacy run
// ---------------------------------------------------------------------------

/// Configuration-file shape for `privacy run`. Every field is optional;
/// flags override the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    metrics: Option<Vec<String>>,
    seed: Option<u64>,
    /// CSV of candidate records for the membership attacks, paired with
    /// `labels`. Defaults to real rows (members) plus reference rows
    /// (non-members).
    candidates: Option<PathBuf>,
    /// CSV with a single `member` column of 0/1 values, one per candidate.
    labels: Option<PathBuf>,
    #[serde(default)]
    dcr: DcrParams,
    #[serde(default)]
    eps_id: EpsIdParams,
    #[serde(default)]
    t_mia: TMiaParams,
    #[serde(default)]
    attr_disclosure: AttrParams,
    #[serde(default)]
    domias: DomiasParams,
    #[serde(default)]
    idr: IdrParams,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DcrParams {
    /// "median" (default) or "mean".
    aggregate: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsIdParams {
    /// Bins for the entropy-based column weights (default 10).
    entropy_bins: Option<usize>,
    /// "per_true_record" (default) or "per_synthetic_record".
    orientation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TMiaParams {
    tau: Option<TauParam>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TauParam {
    /// "median_synth_nn" (default) or "fixed".
    rule: String,
    /// The distance for rule "fixed".
    value: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttrParams {
    /// Voting neighbours (default 5).
    k: Option<usize>,
    /// Sensitive column (default: the schema's first sensitive-flagged
    /// column).
    sensitive: Option<String>,
    /// Adversary knowledge levels as lists of column names (default:
    /// growing prefixes of the quasi-identifier columns).
    levels: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomiasParams {
    bandwidth: Option<BandwidthParam>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandwidthParam {
    /// "silverman" (default) or "fixed".
    rule: String,
    /// The bandwidth for rule "fixed".
    value: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdrParams {
    lambda: Option<f64>,
    /// Fraction of the population the real table samples, for the scaled
    /// frequency estimate (default 1.0; ignored when a population table is
    /// given).
    sampling_fraction: Option<f64>,
    /// Quasi-identifier columns (default: the schema's quasi-flagged
    /// columns).
    quasi: Option<Vec<String>>,
    /// Sensitive columns (default: the schema's sensitive-flagged columns).
    sensitive: Option<Vec<String>>,
}

fn invalid(message: String) -> anyhow::Error {
    synthpriv::Error::Config(message).into()
}

/// Everything `privacy run` loaded, resolved once before metrics execute.
struct RunInputs {
    real: Table,
    synth: Table,
    reference: Option<Table>,
    population: Option<Table>,
    candidates: Option<(Table, Vec<bool>)>,
    seed: Option<u64>,
}

fn privacy_run(args: RunArgs) -> anyhow::Result<()> {
    let config: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading configuration {}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| invalid(format!("configuration {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let schema_hint = args.schema.as_ref().map(Schema::load).transpose()?;
    let real = load_csv(&args.real, schema_hint.as_ref())?;
    let synth = load_csv(&args.synthetic, schema_hint.as_ref())?;
    let reference =
        args.reference.as_ref().map(|p| load_csv(p, schema_hint.as_ref())).transpose()?;
    let population =
        args.population.as_ref().map(|p| load_csv(p, schema_hint.as_ref())).transpose()?;

    let candidates = resolve_candidates(&config, &real, reference.as_ref(), schema_hint.as_ref())?;

    let inputs = RunInputs {
        real,
        synth,
        reference,
        population,
        candidates,
        seed: args.seed.or(config.seed),
    };

    // Which metrics run: an explicit list must be fully runnable; the
    // default is every metric whose inputs are present.
    let requested = if args.metrics.is_empty() { config.metrics.clone() } else { Some(args.metrics.clone()) };
    if let Some(names) = &requested {
        for name in names {
            if !ALL_METRICS.contains(&name.as_str()) {
                return Err(invalid(format!(
                    "unknown metric {name:?}; known metrics: {}",
                    ALL_METRICS.join(", ")
                )));
            }
        }
    }
    let selected: Vec<&str> = match &requested {
        Some(names) => {
            let mut chosen = Vec::new();
            for metric in ALL_METRICS {
                if names.iter().any(|n| n == metric) {
                    if let Err(reason) = runnable(metric, &inputs, &config) {
                        return Err(invalid(format!("metric {metric} cannot run: {reason}")));
                    }
                    chosen.push(metric);
                }
            }
            chosen
        }
        None => {
            let mut chosen = Vec::new();
            for metric in ALL_METRICS {
                match runnable(metric, &inputs, &config) {
                    Ok(()) => chosen.push(metric),
                    Err(reason) => log::info!("skipping {metric}: {reason}"),
                }
            }
            chosen
        }
    };
    if selected.is_empty() {
        return Err(invalid("no metric is runnable with the given inputs".into()));
    }

    let mut reports = Vec::with_capacity(selected.len());
    for metric in selected {
        log::info!("running {metric}");
        reports.push(run_metric(metric, &inputs, &config)?);
    }

    let rendered = match args.format {
        OutputFormat::Json => {
            let value = serde_json::to_value(&reports).expect("reports always serialize");
            format!("{}\n", canonical_json(&value))
        }
        OutputFormat::Text => {
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!("{}\n", r.metric));
                for (name, rv) in &r.values {
                    text.push_str(&format!("  {name} = {}\n", rv.value));
                }
            }
            text
        }
    };
    match &args.out {
        Some(path) => fs::write(path, rendered)
            .with_context(|| format!("writing reports to {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

/// Builds the membership-attack candidate set: explicit files when the
/// configuration names them, otherwise real rows (members) stacked on
/// reference rows (non-members).
fn resolve_candidates(
    config: &FileConfig,
    real: &Table,
    reference: Option<&Table>,
    schema_hint: Option<&Schema>,
) -> anyhow::Result<Option<(Table, Vec<bool>)>> {
    match (&config.candidates, &config.labels) {
        (Some(c), Some(l)) => {
            let table = load_csv(c, schema_hint)?;
            let labels = load_labels_csv(l)?;
            Ok(Some((table, labels)))
        }
        (Some(_), None) | (None, Some(_)) => {
            Err(invalid("candidates and labels must be configured together".into()))
        }
        (None, None) => match reference {
            Some(reference) => {
                if reference.schema() != real.schema() {
                    return Err(synthpriv::Error::SpecMismatch(
                        "real and reference schemas differ".into(),
                    )
                    .into());
                }
                let rows: Vec<Vec<synthpriv::Value>> =
                    real.rows().chain(reference.rows()).map(|r| r.to_vec()).collect();
                let table = Table::new(real.schema().clone(), rows)?;
                let mut labels = vec![true; real.len()];
                labels.extend(std::iter::repeat(false).take(reference.len()));
                Ok(Some((table, labels)))
            }
            None => Ok(None),
        },
    }
}

/// Checks whether a metric's inputs are present, without running it.
fn runnable(metric: &str, inputs: &RunInputs, config: &FileConfig) -> Result<(), String> {
    let schema = inputs.real.schema();
    match metric {
        "dcr" | "eps_id" => Ok(()),
        "t_mia" => {
            if inputs.candidates.is_some() {
                Ok(())
            } else {
                Err("needs --reference, or candidates and labels in the configuration".into())
            }
        }
        "domias" => {
            if inputs.reference.is_none() {
                Err("needs --reference for the density baseline".into())
            } else {
                Ok(())
            }
        }
        "attr_disclosure" => {
            let has_sensitive = config.attr_disclosure.sensitive.is_some()
                || !schema.sensitive_indices().is_empty();
            if !has_sensitive {
                return Err(
                    "needs a sensitive column (schema flag or attr_disclosure.sensitive)".into()
                );
            }
            if schema.len() < 2 {
                return Err("needs at least one non-sensitive column for the adversary".into());
            }
            Ok(())
        }
        "idr" => {
            let has_quasi =
                config.idr.quasi.is_some() || !schema.quasi_indices().is_empty();
            let has_sensitive =
                config.idr.sensitive.is_some() || !schema.sensitive_indices().is_empty();
            if has_quasi && has_sensitive {
                Ok(())
            } else {
                Err("needs quasi and sensitive columns (schema flags or idr configuration)".into())
            }
        }
        other => Err(format!("unknown metric {other:?}")),
    }
}

fn run_metric(metric: &str, inputs: &RunInputs, config: &FileConfig) -> anyhow::Result<MetricReport> {
    match metric {
        "dcr" => run_dcr(inputs, &config.dcr),
        "eps_id" => run_eps_id(inputs, &config.eps_id),
        "t_mia" => run_t_mia(inputs, &config.t_mia),
        "attr_disclosure" => run_attr_disclosure(inputs, &config.attr_disclosure),
        "domias" => run_domias(inputs, &config.domias),
        "idr" => run_idr(inputs, &config.idr),
        other => Err(invalid(format!("unknown metric {other:?}"))),
    }
}

fn run_dcr(inputs: &RunInputs, params: &DcrParams) -> anyhow::Result<MetricReport> {
    let aggregate = match params.aggregate.as_deref() {
        None | Some("median") => DcrAggregate::Median,
        Some("mean") => DcrAggregate::Mean,
        Some(other) => {
            return Err(invalid(format!("dcr.aggregate must be \"mean\" or \"median\", got {other:?}")))
        }
    };
    let spec = DistanceSpec::gower(&inputs.real);
    let report = dcr(&inputs.real, &inputs.synth, &spec, aggregate)?;
    let config = serde_json::json!({
        "metric": "dcr",
        "aggregate": aggregate,
        "distance": spec,
    });
    Ok(MetricReport::new(
        "dcr",
        vec![("value", report.value, ValueBounds::NON_NEGATIVE)],
        config,
        inputs.seed,
    )?)
}

fn run_eps_id(inputs: &RunInputs, params: &EpsIdParams) -> anyhow::Result<MetricReport> {
    let bins = params.entropy_bins.unwrap_or(DEFAULT_ENTROPY_BINS);
    let orientation = match params.orientation.as_deref() {
        None | Some("per_true_record") => EpsIdOrientation::PerTrueRecord,
        Some("per_synthetic_record") => EpsIdOrientation::PerSyntheticRecord,
        Some(other) => {
            return Err(invalid(format!(
                "eps_id.orientation must be \"per_true_record\" or \"per_synthetic_record\", got {other:?}"
            )))
        }
    };
    let weights = inverse_entropy_weights(&inputs.real, bins)?;
    let report = epsilon_identifiability(&inputs.real, &inputs.synth, &weights, orientation)?;
    let config = serde_json::json!({
        "metric": "eps_id",
        "entropy_bins": bins,
        "orientation": report.orientation,
        "weights": report.weights,
    });
    Ok(MetricReport::new(
        "eps_id",
        vec![
            ("value", report.value, ValueBounds::UNIT),
            ("identifiable", report.identifiable as f64, ValueBounds::NON_NEGATIVE),
            ("total", report.total as f64, ValueBounds::NON_NEGATIVE),
        ],
        config,
        inputs.seed,
    )?)
}

fn run_t_mia(inputs: &RunInputs, params: &TMiaParams) -> anyhow::Result<MetricReport> {
    let tau = match &params.tau {
        None => TauRule::MedianSynthNn,
        Some(p) => match (p.rule.as_str(), p.value) {
            ("median_synth_nn", None) => TauRule::MedianSynthNn,
            ("median_synth_nn", Some(_)) => {
                return Err(invalid("t_mia.tau rule \"median_synth_nn\" takes no value".into()))
            }
            ("fixed", Some(v)) => TauRule::Fixed(v),
            ("fixed", None) => {
                return Err(invalid("t_mia.tau rule \"fixed\" needs a value".into()))
            }
            (other, _) => {
                return Err(invalid(format!(
                    "t_mia.tau.rule must be \"fixed\" or \"median_synth_nn\", got {other:?}"
                )))
            }
        },
    };
    let (candidates, labels) =
        inputs.candidates.as_ref().expect("runnability established candidates");
    let cfg = MiaConfig { distance: DistanceSpec::gower(&inputs.real), tau };
    let report = threshold_mia(&inputs.synth, candidates, labels, &cfg)?;
    let config = serde_json::json!({ "metric": "t_mia", "distance": cfg.distance, "tau": cfg.tau });
    let mut values = vec![
        ("recall", report.recall, ValueBounds::UNIT),
        ("accuracy", report.accuracy, ValueBounds::UNIT),
        ("threshold", report.threshold, ValueBounds::NON_NEGATIVE),
        ("tp", report.tp as f64, ValueBounds::NON_NEGATIVE),
        ("fp", report.fp as f64, ValueBounds::NON_NEGATIVE),
        ("tn", report.tn as f64, ValueBounds::NON_NEGATIVE),
        ("fn", report.fn_count as f64, ValueBounds::NON_NEGATIVE),
    ];
    if let Some(p) = report.precision {
        values.push(("precision", p, ValueBounds::UNIT));
    }
    Ok(MetricReport::new("t_mia", values, config, inputs.seed)?)
}

fn run_attr_disclosure(inputs: &RunInputs, params: &AttrParams) -> anyhow::Result<MetricReport> {
    let schema = inputs.real.schema();
    let sensitive = match &params.sensitive {
        Some(name) => name.clone(),
        None => {
            let idx = *schema
                .sensitive_indices()
                .first()
                .expect("runnability established a sensitive column");
            schema.column(idx).name.clone()
        }
    };
    let levels = match &params.levels {
        Some(levels) => levels.clone(),
        None => default_levels(schema, &sensitive)?,
    };
    let cfg = AttrDisclosureConfig {
        k: params.k.unwrap_or(5),
        levels,
        distance: DistanceSpec::gower(&inputs.synth),
    };
    let report = attribute_disclosure(&inputs.synth, &inputs.real, &sensitive, &cfg)?;
    let config = serde_json::json!({
        "metric": "attr_disclosure",
        "sensitive": sensitive,
        "k": cfg.k,
        "levels": cfg.levels,
        "distance": cfg.distance,
    });
    let mut values = vec![
        ("mean_precision", report.mean_precision, ValueBounds::UNIT),
        ("mean_recall", report.mean_recall, ValueBounds::UNIT),
    ];
    let names: Vec<(String, String)> = report
        .levels
        .iter()
        .enumerate()
        .map(|(i, _)| (format!("level{}_precision", i + 1), format!("level{}_recall", i + 1)))
        .collect();
    for (level, (p_name, r_name)) in report.levels.iter().zip(&names) {
        values.push((p_name.as_str(), level.precision, ValueBounds::UNIT));
        values.push((r_name.as_str(), level.recall, ValueBounds::UNIT));
    }
    Ok(MetricReport::new("attr_disclosure", values, config, inputs.seed)?)
}

/// Default adversary knowledge: growing prefixes of the quasi-identifier
/// columns (all non-sensitive columns when none are flagged), leaving at
/// least one column unknown; a single one-column level when only one
/// column is available.
fn default_levels(schema: &Schema, sensitive: &str) -> anyhow::Result<Vec<Vec<String>>> {
    let flagged = schema.quasi_indices();
    let pool: Vec<String> = if flagged.is_empty() {
        (0..schema.len())
            .map(|i| schema.column(i).name.clone())
            .filter(|name| name != sensitive)
            .collect()
    } else {
        flagged
            .into_iter()
            .map(|i| schema.column(i).name.clone())
            .filter(|name| name != sensitive)
            .collect()
    };
    if pool.is_empty() {
        return Err(invalid(
            "attr_disclosure has no usable adversary columns besides the sensitive one".into(),
        ));
    }
    if pool.len() == 1 {
        Ok(vec![pool])
    } else {
        Ok((1..pool.len()).map(|m| pool[..m].to_vec()).collect())
    }
}

fn run_domias(inputs: &RunInputs, params: &DomiasParams) -> anyhow::Result<MetricReport> {
    let rule = match &params.bandwidth {
        None => BandwidthRule::Silverman,
        Some(p) => match (p.rule.as_str(), p.value) {
            ("silverman", None) => BandwidthRule::Silverman,
            ("silverman", Some(_)) => {
                return Err(invalid("domias.bandwidth rule \"silverman\" takes no value".into()))
            }
            ("fixed", Some(v)) => BandwidthRule::Fixed(v),
            ("fixed", None) => {
                return Err(invalid("domias.bandwidth rule \"fixed\" needs a value".into()))
            }
            (other, _) => {
                return Err(invalid(format!(
                    "domias.bandwidth.rule must be \"fixed\" or \"silverman\", got {other:?}"
                )))
            }
        },
    };
    let reference = inputs.reference.as_ref().expect("runnability established a reference");
    let (candidates, labels) =
        inputs.candidates.as_ref().expect("a reference always yields candidates");
    let report = domias(&inputs.synth, reference, candidates, labels, rule)?;
    let config = serde_json::json!({
        "metric": "domias",
        "bandwidth": rule,
        "normalization": "minmax_of_reference",
    });
    let mut values = vec![
        ("auroc", report.auroc.expect("the density-ratio attack always scores"), ValueBounds::UNIT),
        ("accuracy", report.accuracy, ValueBounds::UNIT),
        ("recall", report.recall, ValueBounds::UNIT),
        ("tp", report.tp as f64, ValueBounds::NON_NEGATIVE),
        ("fp", report.fp as f64, ValueBounds::NON_NEGATIVE),
        ("tn", report.tn as f64, ValueBounds::NON_NEGATIVE),
        ("fn", report.fn_count as f64, ValueBounds::NON_NEGATIVE),
    ];
    if let Some(p) = report.precision {
        values.push(("precision", p, ValueBounds::UNIT));
    }
    Ok(MetricReport::new("domias", values, config, inputs.seed)?)
}

fn run_idr(inputs: &RunInputs, params: &IdrParams) -> anyhow::Result<MetricReport> {
    let schema = inputs.real.schema();
    let names_of = |indices: Vec<usize>| -> Vec<String> {
        indices.into_iter().map(|i| schema.column(i).name.clone()).collect()
    };
    let quasi = params.quasi.clone().unwrap_or_else(|| names_of(schema.quasi_indices()));
    let sensitive = params.sensitive.clone().unwrap_or_else(|| names_of(schema.sensitive_indices()));
    let lambda = params.lambda.unwrap_or(1.0);
    let population = match &inputs.population {
        Some(table) => {
            if params.sampling_fraction.is_some() {
                return Err(invalid(
                    "idr.sampling_fraction conflicts with --population; give one or the other".into(),
                ));
            }
            PopulationModel::Table(table.clone())
        }
        None => PopulationModel::ScaledEstimate {
            sampling_fraction: params.sampling_fraction.unwrap_or(1.0),
        },
    };
    let population_config = match &population {
        PopulationModel::Table(t) => serde_json::json!({ "mode": "table", "rows": t.len() }),
        PopulationModel::ScaledEstimate { sampling_fraction } => {
            serde_json::json!({ "mode": "scaled_estimate", "sampling_fraction": sampling_fraction })
        }
    };
    let cfg = IdrConfig { quasi, sensitive, lambda, population };
    let report = idr(&inputs.real, &inputs.synth, &cfg)?;
    let config = serde_json::json!({
        "metric": "idr",
        "quasi": cfg.quasi,
        "sensitive": cfg.sensitive,
        "lambda": cfg.lambda,
        "population": population_config,
    });
    Ok(MetricReport::new(
        "idr",
        vec![
            ("value", report.value, ValueBounds { lo: 0.0, hi: Some(lambda.max(1.0)) }),
            ("matched", report.matched as f64, ValueBounds::NON_NEGATIVE),
            ("revealed", report.revealed as f64, ValueBounds::NON_NEGATIVE),
        ],
        config,
        inputs.seed,
    )?)
}

// ---------------------------------------------------------------------------
// cair
// ---------------------------------------------------------------------------

fn cair_aggregate(args: AggregateArgs) -> anyhow::Result<()> {
    let mut sheets = Vec::with_capacity(args.sheets.len());
    for path in &args.sheets {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading score sheet {}", path.display()))?;
        let raw: RawScoreSheet = serde_json::from_str(&text)
            .map_err(|e| synthpriv::Error::Sheet(format!("{}: {e}", path.display())))?;
        sheets.push(raw.validate()?);
    }
    let assessment = aggregate(&sheets)?;
    let views = granularity_views(&assessment);

    println!("{}: {}", views.metric, views.overall);
    println!();
    for (name, score) in &views.per_principle {
        println!("  {name:<20} {score}");
    }
    println!();
    for (name, score) in &views.per_dimension {
        println!("  {name:<30} {score}");
    }

    if let Some(out) = &args.out {
        let value = serde_json::to_value(&assessment).expect("assessments always serialize");
        fs::write(out, format!("{}\n", canonical_json(&value)))
            .with_context(|| format!("writing assessment to {}", out.display()))?;
        log::info!("wrote assessment to {}", out.display());
    }
    Ok(())
}

fn cair_radar(args: RadarArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.assessment)
        .with_context(|| format!("reading assessment {}", args.assessment.display()))?;
    let assessment: Assessment = serde_json::from_str(&text)
        .map_err(|e| synthpriv::Error::Sheet(format!("{}: {e}", args.assessment.display())))?;
    let svg = radar_svg(&assessment);
    fs::write(&args.out, svg)
        .with_context(|| format!("writing radar chart to {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    if args.columns == 0 {
        return Err(invalid("--columns must be at least 1".into()));
    }
    let numeric = args.columns - args.columns / 2;
    let categorical = args.columns / 2;
    println!("nearest-neighbour scan, {numeric} numeric + {categorical} categorical columns");
    for &rows in &args.sizes {
        if rows == 0 {
            return Err(invalid("--sizes entries must be at least 1".into()));
        }
        let real = random_mixed_table(rows, numeric, categorical, args.seed)?;
        let synth = random_mixed_table(rows, numeric, categorical, args.seed.wrapping_add(1))?;
        let spec = DistanceSpec::gower(&real);
        let start = Instant::now();
        let nn = nn_between(&synth, &real, &spec)?;
        let elapsed = start.elapsed().as_secs_f64();
        // Folding the distances into the printout keeps the scan observable.
        let checksum: f64 = nn.distances().iter().sum();
        println!(
            "rows={rows:<8} elapsed={elapsed:>8.3}s pairs_per_s={:>12.3e} checksum={checksum:.6}",
            (rows as f64) * (rows as f64) / elapsed,
        );
    }
    Ok(())
}
