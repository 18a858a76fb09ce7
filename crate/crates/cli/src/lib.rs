//! Command-line front end: argument parsing, file plumbing and exit codes.
//!
//! Exit status is 0 for a fair verdict, passed verification or a found
//! cover, 2 for unfair findings, oracle disagreement or no cover, and 1 for
//! usage or data errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairaudit_core::dataset::{load_csv, write_csv};
use fairaudit_core::oracle::{brute_force_search, extract_cover, reduce_msc_to_udsc, MscInstance};
use fairaudit_core::ratio::{format_ratio, parse_ratio};
use fairaudit_core::synth::{synth_population, MarginalSpec};
use fairaudit_core::{
    auto_gamma, enumerate_with_findings, udsc_search, AuditConfig, AuditMode, AuditReport,
    Comparison, CountConfig, CountThresholds, Dataset, Direction, ExclusionMode, Exclusions,
    Finding, PairObjective, PairwiseConfig, Ratio, StopReason, UtilityBounds, UtilityConfig,
    Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fairaudit",
    version,
    about = "Exact fairness audits over combinations of protected status variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate unfair PSV combinations and write a JSON report.
    #[command(subcommand)]
    Audit(ModeCommand),
    /// Generate a synthetic population CSV from a marginal spec.
    Synth(SynthArgs),
    /// Cross-check the search against exhaustive enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Solve problems through their reduction to a count audit.
    #[command(subcommand)]
    Reduce(ReduceCommand),
}

#[derive(Debug, Subcommand)]
enum ModeCommand {
    /// Count audit with representation thresholds alpha < beta.
    Count(CountArgs),
    /// Utility-weighted audit against the uniform random allocation.
    Utility(UtilityArgs),
    /// Pairwise audit between two disjoint PSV combinations.
    Pairwise(PairwiseArgs),
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Replay an enumeration against brute force; fails on any mismatch.
    #[command(subcommand)]
    Verify(ModeCommand),
}

#[derive(Debug, Subcommand)]
enum ReduceCommand {
    /// Minimum Set Cover file: header `n m r`, then one subset per line.
    Msc { path: PathBuf },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Population CSV with a header row.
    data: PathBuf,
    #[arg(long, default_value = "class")]
    class_col: String,
    /// Column holding instance ids; excluded from the PSVs.
    #[arg(long)]
    id_col: Option<String>,
    /// Maximum number of findings.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    limit: u64,
    #[arg(long, value_enum, default_value_t = ExclusionArg::Disjoint)]
    exclusion: ExclusionArg,
    /// Never combine two one-hot values of the same attribute.
    #[arg(long)]
    forbid_same_attribute: bool,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Lower threshold, e.g. `0.2` or `1/5`.
    #[arg(long)]
    alpha: Option<String>,
    /// Upper threshold.
    #[arg(long)]
    beta: Option<String>,
    /// Gap beta - alpha, or `auto`; replaces whichever threshold is omitted.
    #[arg(long)]
    gamma: Option<String>,
    /// Largest selector order used by `--gamma auto`.
    #[arg(long, default_value_t = 1)]
    auto_order: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Fractional)]
    threshold_mode: ScaleArg,
    /// Compare against the pooled complement instead of every other class.
    #[arg(long)]
    pooled: bool,
    #[arg(long, value_enum, default_value_t = DirectionArg::Under)]
    direction: DirectionArg,
    #[arg(long)]
    max_selector_size: Option<usize>,
}

#[derive(Debug, Args)]
struct UtilityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    gamma: f64,
    /// One line per class: `a_k b_k`.
    #[arg(long)]
    bounds: PathBuf,
    #[arg(long)]
    max_selector_size: Option<usize>,
}

#[derive(Debug, Args)]
struct PairwiseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    gamma: f64,
    /// One line per class: `a_k b_k`.
    #[arg(long)]
    bounds: PathBuf,
    /// Largest combined size of the two combinations.
    #[arg(long, default_value_t = 2)]
    max_pair_size: usize,
    /// Prefer the longest qualifying pair over the shortest.
    #[arg(long)]
    longest: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Marginal spec in TOML.
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "class")]
    class_col: String,
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExclusionArg {
    Disjoint,
    NotEqual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Fractional,
    Absolute,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Under,
    Over,
}

/// A failure reported on standard error with exit status 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Audit(mode) => audit(mode),
        Command::Synth(args) => synth(args),
        Command::Oracle(OracleCommand::Verify(mode)) => verify(mode),
        Command::Reduce(ReduceCommand::Msc { path }) => reduce_msc(&path),
    };
    outcome.unwrap_or_else(|Failure(msg)| {
        eprintln!("error: {msg}");
        EXIT_ERROR
    })
}

/// Dataset, audit configuration and output target for one mode command.
struct Prepared {
    data: Dataset,
    config: AuditConfig,
    id_column: Option<String>,
    output: Option<PathBuf>,
}

fn prepare(mode: ModeCommand) -> Result<Prepared, Failure> {
    match mode {
        ModeCommand::Count(a) => {
            let data = load(&a.data)?;
            let (thresholds, auto) = count_thresholds(
                &data,
                a.alpha,
                a.beta,
                a.gamma,
                a.auto_order,
                a.threshold_mode,
            )?;
            let mut cfg = CountConfig::new(thresholds)
                .direction(match a.direction {
                    DirectionArg::Under => Direction::Under,
                    DirectionArg::Over => Direction::Over,
                })
                .comparison(if a.pooled {
                    Comparison::PooledComplement
                } else {
                    Comparison::EveryOther
                })
                .forbid_same_attribute(a.data.forbid_same_attribute);
            if let Some(s) = a.max_selector_size {
                cfg = cfg.max_size(s);
            }
            Ok(finish(a.data, data, AuditMode::Count(cfg), auto))
        }
        ModeCommand::Utility(a) => {
            let bounds = read_bounds(&a.bounds)?;
            let data = load(&a.data)?;
            check_bounds_len(&bounds, &data)?;
            let mut cfg = UtilityConfig::new(bounds, a.gamma)?
                .forbid_same_attribute(a.data.forbid_same_attribute);
            if let Some(s) = a.max_selector_size {
                cfg = cfg.max_size(s);
            }
            Ok(finish(a.data, data, AuditMode::Utility(cfg), None))
        }
        ModeCommand::Pairwise(a) => {
            let bounds = read_bounds(&a.bounds)?;
            let data = load(&a.data)?;
            check_bounds_len(&bounds, &data)?;
            let mut cfg = PairwiseConfig::new(bounds, a.gamma, a.max_pair_size)?
                .forbid_same_attribute(a.data.forbid_same_attribute);
            if a.longest {
                cfg = cfg.objective(PairObjective::Longest);
            }
            Ok(finish(a.data, data, AuditMode::Pairwise(cfg), None))
        }
    }
}

fn load(common: &DataArgs) -> Result<Dataset, Failure> {
    Ok(load_csv(
        &common.data,
        &common.class_col,
        common.id_col.as_deref(),
    )?)
}

fn finish(common: DataArgs, data: Dataset, mode: AuditMode, auto: Option<Ratio>) -> Prepared {
    let mut config =
        AuditConfig::new(mode, common.limit as usize).exclusion(match common.exclusion {
            ExclusionArg::Disjoint => ExclusionMode::Disjoint,
            ExclusionArg::NotEqual => ExclusionMode::NotEqual,
        });
    config.auto_gamma = auto;
    Prepared {
        data,
        config,
        id_column: common.id_col,
        output: common.output,
    }
}

/// Thresholds from `alpha`/`beta`, or one of them plus a gap.
fn count_thresholds(
    data: &Dataset,
    alpha: Option<String>,
    beta: Option<String>,
    gamma: Option<String>,
    auto_order: usize,
    scale: ScaleArg,
) -> Result<(CountThresholds, Option<Ratio>), Failure> {
    let alpha = alpha.as_deref().map(parse_ratio).transpose()?;
    let beta = beta.as_deref().map(parse_ratio).transpose()?;
    let (gap, auto) = match gamma.as_deref() {
        None => (None, None),
        Some("auto") => {
            if matches!(scale, ScaleArg::Absolute) {
                return Err(Failure("--gamma auto needs fractional thresholds".into()));
            }
            let g = auto_gamma(data, auto_order)?;
            (Some(g), Some(g))
        }
        Some(text) => (Some(parse_ratio(text)?), None),
    };
    let (alpha, beta) = match (alpha, beta, gap) {
        (Some(a), Some(b), None) => (a, b),
        (Some(a), None, Some(g)) => (a, a + g),
        (None, Some(b), Some(g)) => (b - g, b),
        (Some(_), Some(_), Some(_)) => {
            return Err(Failure(
                "give two of --alpha, --beta and --gamma, not all three".into(),
            ))
        }
        _ => {
            return Err(Failure(
                "count audit needs two of --alpha, --beta and --gamma".into(),
            ))
        }
    };
    let thresholds = match scale {
        ScaleArg::Fractional => CountThresholds::fractional(alpha, beta)?,
        ScaleArg::Absolute => {
            let whole = |r: Ratio, name: &str| -> Result<u64, Failure> {
                if r.is_integer() && *r.numer() >= 0 {
                    Ok(*r.numer() as u64)
                } else {
                    Err(Failure(format!(
                        "absolute {name} must be a non-negative integer, got {}",
                        format_ratio(&r)
                    )))
                }
            };
            CountThresholds::absolute(whole(alpha, "alpha")?, whole(beta, "beta")?)?
        }
    };
    Ok((thresholds, auto))
}

/// Bounds file: one `a_k b_k` line per class; blank lines and `#`
/// comments are skipped.
fn read_bounds(path: &Path) -> Result<UtilityBounds, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    parse_bounds(&text).map_err(|Failure(msg)| Failure(format!("{}: {msg}", path.display())))
}

fn parse_bounds(text: &str) -> Result<UtilityBounds, Failure> {
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Failure(format!("line {}: not a number: {t:?}", no + 1)))
            })
            .collect::<Result<_, _>>()?;
        let [a, b] = nums[..] else {
            return Err(Failure(format!("line {}: expected `a_k b_k`", no + 1)));
        };
        lower.push(a);
        upper.push(b);
    }
    Ok(UtilityBounds::new(lower, upper)?)
}

fn check_bounds_len(bounds: &UtilityBounds, data: &Dataset) -> Result<(), Failure> {
    if bounds.k() != data.k() {
        return Err(Failure(format!(
            "bounds file has {} lines, dataset has {} classes",
            bounds.k(),
            data.k()
        )));
    }
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn audit(mode: ModeCommand) -> Outcome {
    let p = prepare(mode)?;
    let (mut report, _) = enumerate_with_findings(&p.data, &p.config)?;
    report.dataset.id_column = p.id_column;
    let text = render_report(&report)?;
    write_out(p.output.as_deref(), &text)?;
    if p.output.is_some() {
        println!(
            "{}: {} finding(s), stopped: {}",
            verdict_word(report.verdict),
            report.findings.len(),
            match report.stop_reason {
                StopReason::Exhausted => "exhausted",
                StopReason::LimitReached => "limit-reached",
            }
        );
    }
    Ok(match report.verdict {
        Verdict::Fair => EXIT_OK,
        Verdict::Unfair => EXIT_FLAGGED,
    })
}

/// Pretty JSON followed by a newline. The text re-parses to `report`.
pub fn render_report(report: &AuditReport) -> Result<String, serde_json::Error> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Fair => "fair",
        Verdict::Unfair => "unfair",
    }
}

fn synth(args: SynthArgs) -> Outcome {
    let spec = MarginalSpec::load(&args.spec)?;
    let data = synth_population(&spec, args.seed)?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf, &args.class_col)?;
    write_out(args.output.as_deref(), std::str::from_utf8(&buf)?)?;
    Ok(EXIT_OK)
}

/// Replays each enumeration step: the search result must equal the brute
/// force result under the same exclusions, including the final absence.
fn verify(mode: ModeCommand) -> Outcome {
    let p = prepare(mode)?;
    let (report, findings) = enumerate_with_findings(&p.data, &p.config)?;
    let mut excl = Exclusions::new(p.config.exclusion, Vec::new());
    let mut lines = Vec::new();
    let mut agree = true;
    let mut steps: Vec<Option<&Finding>> = findings.iter().map(Some).collect();
    if findings.len() < p.config.limit {
        steps.push(None);
    }
    for (i, searched) in steps.into_iter().enumerate() {
        let brute = brute_force_search(&p.data, &p.config.mode, &excl)?;
        let ok = matches_brute(searched, brute.as_ref());
        agree &= ok;
        lines.push(format!(
            "step {}: search {}, brute force {}: {}",
            i + 1,
            describe(&p.data, searched),
            describe(&p.data, brute.as_ref()),
            if ok { "agree" } else { "DISAGREE" }
        ));
        if let Some(f) = searched {
            for s in f.selectors() {
                excl.push(s.clone());
            }
        }
    }
    let mut text = lines.join("\n");
    text.push_str(&format!(
        "\n{}: {} step(s), verdict {}\n",
        if agree { "verified" } else { "MISMATCH" },
        lines.len(),
        verdict_word(report.verdict)
    ));
    write_out(p.output.as_deref(), &text)?;
    Ok(if agree { EXIT_OK } else { EXIT_FLAGGED })
}

fn matches_brute(searched: Option<&Finding>, brute: Option<&Finding>) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    match (searched, brute) {
        (None, None) => true,
        (Some(Finding::Count(a)), Some(Finding::Count(b))) => a == b,
        (Some(Finding::Utility(a)), Some(Finding::Utility(b))) => {
            a.selector == b.selector && a.target == b.target && close(a.margin, b.margin)
        }
        (Some(Finding::Pairwise(a)), Some(Finding::Pairwise(b))) => {
            a.under == b.under && a.over == b.over && close(a.gap, b.gap)
        }
        _ => false,
    }
}

fn describe(data: &Dataset, f: Option<&Finding>) -> String {
    let Some(f) = f else {
        return "none".into();
    };
    let groups: Vec<String> = f
        .selectors()
        .iter()
        .map(|s| format!("{{{}}}", s.names(data).join(", ")))
        .collect();
    match f.target() {
        Some(k) => format!("{} against {}", groups.join(" vs "), data.class_names()[k]),
        None => groups.join(" vs "),
    }
}

fn reduce_msc(path: &Path) -> Outcome {
    let inst = MscInstance::read(path)?;
    let red = reduce_msc_to_udsc(&inst)?;
    let found = udsc_search(
        &red.data,
        red.target,
        &CountConfig::new(red.thresholds.clone()),
        &Exclusions::none(),
    )?;
    match found {
        Some(f) => {
            let cover = extract_cover(&f, &inst)?;
            let labels: Vec<String> = cover.iter().map(|j| (j + 1).to_string()).collect();
            println!(
                "cover {{{}}} ({} of at most {} sets)",
                labels.join(","),
                cover.len(),
                inst.r()
            );
            Ok(EXIT_OK)
        }
        None => {
            println!("no cover with at most {} sets", inst.r());
            Ok(EXIT_FLAGGED)
        }
    }
}
