//! Command-line front end: wires generators, schedulers, the oracle, the
//! stability checker and the harness into reproducible experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algorithms::{min_valid_m, poly_q, run_online, traces_to_jsonl, AlgConfig, HRule, SchedulerRegistry};
use crate::error::{Error, Result};
use crate::generators::{Dist, Family, GenSpec};
use crate::harness::{ratio_report, tail_probability, RomMode, RomStats, TailStats};
use crate::manifest::{
    ExperimentManifest, InputSpec, OutputFormat, OutputSpec, RunModeSpec, CSV_HEADER,
    SCHEMA_VERSION,
};
use crate::model::JobSequence;
use crate::opt_oracle::OracleLimits;
use crate::stability::{
    check_stable, estimate_stability_probability, sample_load_deviations, verify_analysis_constants,
    StabilityParams, StabilityReport,
};

#[derive(Debug, Parser)]
#[command(name = "romsched", version, about = "Random-order scheduling experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a random-order experiment, or verify the derived constants.
    Run(RunArgs),
    /// Stability-probability and load-deviation sweeps over machine counts.
    Stability(StabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// 4m-4 unit jobs plus one of size 4.
    Lb43,
    /// 2m-2 unit jobs plus one of size 2.
    Lb32,
    /// r*m unit jobs.
    Uniform,
    /// m(m-1) unit jobs plus one of size m.
    GreedyAdv,
    /// n i.i.d. draws, redrawn until proper.
    RandomProper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scheduler names, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "greedy,alg")]
    pub scheduler: Vec<String>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Machine count for generated inputs.
    #[arg(long)]
    pub m: Option<usize>,
    /// Job count (random-proper family).
    #[arg(long)]
    pub n: Option<usize>,
    /// Rounds of unit jobs (uniform family).
    #[arg(long)]
    pub r: Option<usize>,
    /// Distribution, e.g. "uniform:1,2", "two-point:1,20,0.001",
    /// "pareto:1.5,1,100".
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the probability of reaching this ratio times OPT.
    #[arg(long)]
    pub tail_threshold: Option<f64>,
    /// Exact-oracle size cap.
    #[arg(long, default_value_t = 24)]
    pub max_n: usize,
    /// Exact-oracle node budget.
    #[arg(long, default_value_t = 50_000_000)]
    pub node_budget: u64,
    /// Explicit reluctance parameter h (default: floor(cbrt(m))).
    #[arg(long)]
    pub h: Option<usize>,
    /// Worker pool size (default: logical cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Load the job sequence from a .json or .csv file instead of --family.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Load the whole experiment from a manifest file (other flags ignored).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory (default: $ROMSCHED_OUT_DIR, then ".").
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub format: FormatArg,
    /// Also write the identity-order run as JSON-lines step traces.
    #[arg(long)]
    pub emit_traces: bool,
    /// Experiment label for outputs (default: family name).
    #[arg(long)]
    pub experiment: Option<String>,
    /// Print the derived constants and analysis checks, then exit.
    #[arg(long)]
    pub verify_constants: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Machine counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    pub m: Vec<usize>,
    /// Job count as a multiple of m (n = ceil(ratio * m)).
    #[arg(long, default_value_t = 4.0 / 3.0)]
    pub n_ratio: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Distribution for the generated proper family (default uniform:1,2).
    #[arg(long)]
    pub dist: Option<String>,
    /// Deviation sweep fractions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub dev_trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value = "stability")]
    pub experiment: String,
}

/// Map an error to the documented exit codes: 2 for invalid manifests and
/// inputs, 3 for exhausted budgets or caps, 4 for internal invariants.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InstanceTooLarge { .. }
        | Error::EnumerationTooLarge { .. }
        | Error::TooManyArrangements { .. } => 3,
        Error::RankOutOfRange { .. } | Error::BadPermutation => 4,
        _ => 2,
    }
}

pub fn dispatch(cli: Cli) -> ExitCode {
    let outcome = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Stability(args) => stability_command(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn parse_dist(spec: &str) -> Result<Dist> {
    Dist::parse(spec)
}

fn run_command(args: RunArgs) -> Result<()> {
    if args.verify_constants {
        let report = verify_constants_text(args.m.unwrap_or(100), args.h)?;
        print!("{report}");
        return Ok(());
    }
    let manifest = match &args.manifest {
        Some(path) => ExperimentManifest::from_json_str(&std::fs::read_to_string(path)?)?,
        None => manifest_from_flags(&args)?,
    };
    let artifacts = cmd_run(&manifest)?;
    print!("{}", artifacts.summary);
    for path in &artifacts.files {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn manifest_from_flags(args: &RunArgs) -> Result<ExperimentManifest> {
    let input = match (&args.input, args.family) {
        (Some(path), None) => InputSpec::File { path: path.clone() },
        (None, Some(family)) => {
            let m = args
                .m
                .ok_or_else(|| Error::InvalidManifest("--family needs --m".into()))?;
            let dist = args.dist.as_deref().map(parse_dist).transpose()?;
            let family = match family {
                FamilyArg::Lb43 => Family::LbFourThirds,
                FamilyArg::Lb32 => Family::LbThreeHalves,
                FamilyArg::Uniform => Family::UniformR {
                    r: args.r.ok_or_else(|| {
                        Error::InvalidManifest("--family uniform needs --r".into())
                    })?,
                },
                FamilyArg::GreedyAdv => Family::GreedyAdversarial,
                FamilyArg::RandomProper => Family::RandomProper {
                    n: args.n.ok_or_else(|| {
                        Error::InvalidManifest("--family random-proper needs --n".into())
                    })?,
                    dist,
                },
            };
            InputSpec::Gen(GenSpec { family, m })
        }
        (Some(_), Some(_)) => {
            return Err(Error::InvalidManifest(
                "--input and --family are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidManifest(
                "one of --family, --input or --manifest is required".into(),
            ))
        }
    };
    let mode = match args.mode {
        ModeArg::Exact => RunModeSpec::Exact,
        ModeArg::Mc => RunModeSpec::Mc {
            trials: args.trials,
        },
    };
    let manifest = ExperimentManifest {
        schema_version: SCHEMA_VERSION,
        experiment: args.experiment.clone(),
        schedulers: args.scheduler.clone(),
        input,
        mode,
        seed: args.seed,
        oracle: OracleLimits {
            max_n: args.max_n,
            node_budget: args.node_budget,
        },
        tail_threshold: args.tail_threshold,
        h: args.h,
        threads: args.threads,
        output: OutputSpec {
            dir: args.out_dir.clone(),
            format: match args.format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Both => OutputFormat::Both,
            },
            emit_traces: args.emit_traces,
        },
    };
    manifest.validate()?;
    Ok(manifest)
}

#[derive(Debug, Serialize)]
pub struct SchedulerReport {
    pub scheduler: String,
    pub rom: RomStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_detail: Option<TailStats>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub manifest: ExperimentManifest,
    pub m: usize,
    pub n: usize,
    pub results: Vec<SchedulerReport>,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub csv: String,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn load_sequence(path: &Path) -> Result<JobSequence> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => JobSequence::from_json_str(&text),
        Some("csv") => JobSequence::from_csv_str(&text),
        _ => {
            if text.trim_start().starts_with('{') {
                JobSequence::from_json_str(&text)
            } else {
                JobSequence::from_csv_str(&text)
            }
        }
    }
}

fn resolve_sequence(manifest: &ExperimentManifest) -> Result<JobSequence> {
    match &manifest.input {
        InputSpec::Gen(spec) => {
            if matches!(spec.family, Family::LbFourThirds) && spec.m < 8 {
                eprintln!(
                    "note: the 4/3 lower-bound family is designed for m >= 8 (got m={})",
                    spec.m
                );
            }
            crate::generators::generate(spec, manifest.seed)
        }
        InputSpec::File { path } => load_sequence(path),
    }
}

fn out_dir(spec: &OutputSpec) -> PathBuf {
    if let Some(dir) = &spec.dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("ROMSCHED_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidManifest(format!("cannot build worker pool: {e}")))?
            .install(f),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Execute a run manifest: measure every scheduler, write CSV/JSON (and
/// optionally identity-order traces), and render a summary table.
pub fn cmd_run(manifest: &ExperimentManifest) -> Result<RunArtifacts> {
    manifest.validate()?;
    let seq = resolve_sequence(manifest)?;
    let rule = manifest.h.map(HRule::Explicit).unwrap_or_default();
    let registry = SchedulerRegistry::with_defaults(rule);
    let label = manifest.label();

    let mode = match manifest.mode {
        RunModeSpec::Exact => RomMode::exact(),
        RunModeSpec::Mc { trials } => RomMode::mc(trials, manifest.seed),
    };

    let mut results = Vec::new();
    let mut traces = Vec::new();
    for name in &manifest.schedulers {
        let scheduler = registry.build(name, &seq)?;
        let (mut rom, tail_detail) = with_pool(manifest.threads, || {
            let rom = ratio_report(scheduler.as_ref(), &seq, mode, &manifest.oracle)?;
            let tail_detail = match manifest.tail_threshold {
                Some(threshold) => {
                    let opt = rom.opt.expect("ratio_report always attaches bounds");
                    Some(tail_probability(
                        scheduler.as_ref(),
                        &seq,
                        threshold,
                        mode,
                        &opt,
                    )?)
                }
                None => None,
            };
            Ok((rom, tail_detail))
        })?;
        rom.tail = tail_detail.map(|t| t.hi);
        if manifest.output.emit_traces {
            let run = run_online(scheduler.as_ref(), &seq)?;
            traces.push((name.clone(), traces_to_jsonl(&run.traces)));
        }
        results.push(SchedulerReport {
            scheduler: name.clone(),
            rom,
            tail_detail,
        });
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &results {
        let opt = r.rom.opt.expect("bounds attached");
        let ratio = r.rom.ratio.expect("ratio attached");
        let kind = if opt.is_exact() { "exact" } else { "interval" };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            label,
            r.scheduler,
            seq.m(),
            seq.n(),
            manifest.seed,
            manifest.mode.label(),
            r.rom.mean,
            r.rom.std_error,
            opt.lo,
            kind,
            ratio.lo,
            ratio.hi,
            fmt_opt(r.rom.tail),
        )
        .expect("writing to a string cannot fail");
    }

    let mut summary = format!(
        "experiment {label}: m={} n={} seed={} mode={}\n",
        seq.m(),
        seq.n(),
        manifest.seed,
        manifest.mode.label()
    );
    summary.push_str(&format!(
        "{:<10} {:>14} {:>12} {:>22} {:>10}\n",
        "scheduler", "rom", "stderr", "ratio [lo, hi]", "tail"
    ));
    for r in &results {
        let ratio = r.rom.ratio.expect("ratio attached");
        summary.push_str(&format!(
            "{:<10} {:>14.6} {:>12.6} {:>10.6} {:>10.6} {:>10}\n",
            r.scheduler,
            r.rom.mean,
            r.rom.std_error,
            ratio.lo,
            ratio.hi,
            r.rom.tail.map(|t| format!("{t:.6}")).unwrap_or_default(),
        ));
    }

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        manifest: manifest.clone(),
        m: seq.m(),
        n: seq.n(),
        results,
    };

    let dir = out_dir(&manifest.output);
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let format = manifest.output.format;
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join(format!("{label}.csv"));
        std::fs::write(&path, &csv)?;
        files.push(path);
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join(format!("{label}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
        files.push(path);
    }
    for (name, jsonl) in traces {
        let path = dir.join(format!("{label}_{name}_traces.jsonl"));
        std::fs::write(&path, jsonl)?;
        files.push(path);
    }

    Ok(RunArtifacts {
        report,
        csv,
        summary,
        files,
    })
}

fn verify_constants_text(m: usize, h: Option<usize>) -> Result<String> {
    let rule = h.map(HRule::Explicit).unwrap_or_default();
    let cfg = AlgConfig::derive(m, rule)?;
    let analysis = verify_analysis_constants(&cfg, 10_000, 1_000);
    let pass = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut out = String::new();
    writeln!(out, "c                       = {:.16}", cfg.c).unwrap();
    writeln!(out, "|Q(c)|                  = {:.3e}", poly_q(cfg.c).abs()).unwrap();
    writeln!(out, "m                       = {}", cfg.m).unwrap();
    writeln!(out, "h                       = {}", cfg.h).unwrap();
    writeln!(out, "i                       = {} (i/m = {:.6})", cfg.i, cfg.i as f64 / m as f64).unwrap();
    writeln!(out, "k                       = {} (k/m = {:.6})", cfg.k, cfg.k as f64 / m as f64).unwrap();
    writeln!(out, "alpha                   = {:.16}", cfg.alpha).unwrap();
    writeln!(out, "lambda_start            = {:.16}", analysis.lambda_start).unwrap();
    writeln!(out, "lambda_end (eps -> 0)   = {:.16}", analysis.lambda_end_limit).unwrap();
    writeln!(
        out,
        "g(f(lambda)) > lambda on ({:.4}, 2], {} points: {}",
        analysis.lambda_start,
        analysis.lambda_grid,
        pass(analysis.composition_exceeds_identity)
    )
    .unwrap();
    writeln!(
        out,
        "g(1-eps) > lambda_end(eps) on (0, 1], {} points: {}",
        analysis.eps_grid,
        pass(analysis.g_clears_lambda_end)
    )
    .unwrap();
    writeln!(
        out,
        "F(lambda_start)         = {:.16} > 0: {}",
        analysis.f_at_lambda_start,
        pass(analysis.f_at_lambda_start > 0.0)
    )
    .unwrap();
    writeln!(
        out,
        "F linear form max err   = {:.3e}: {}",
        analysis.linear_form_max_err,
        pass(analysis.linear_form_max_err <= 1e-12)
    )
    .unwrap();
    writeln!(
        out,
        "lambda_start < lambda_end(eps) for eps < {:.6}",
        analysis.lambda_order_eps_max
    )
    .unwrap();
    writeln!(out, "smallest valid m for this h rule: {}", min_valid_m(rule)).unwrap();
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct StabilityRow {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub exact: bool,
    pub identity_order: StabilityReport,
}

#[derive(Debug, Serialize)]
pub struct DeviationRow {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub phi: f64,
    pub trials: u64,
    pub mean_deviation: f64,
    pub max_deviation: f64,
    pub frac_above_5pct: f64,
}

#[derive(Debug, Serialize)]
pub struct StabilitySweepReport {
    pub schema_version: u32,
    pub epsilon: f64,
    pub seed: u64,
    pub stability: Vec<StabilityRow>,
    pub deviations: Vec<DeviationRow>,
}

fn stability_command(args: StabilityArgs) -> Result<()> {
    let dist = args.dist.as_deref().map(parse_dist).transpose()?;
    let report = with_pool(args.threads, || {
        cmd_stability(
            &args.m,
            args.n_ratio,
            args.epsilon,
            args.trials,
            dist,
            &args.phi,
            args.dev_trials,
            args.seed,
            args.h,
        )
    })?;

    let dir = args.out_dir.clone().unwrap_or_else(|| {
        std::env::var("ROMSCHED_OUT_DIR")
            .ok()
            .filter(|s| !s.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    std::fs::create_dir_all(&dir)?;

    let mut csv = String::from("m,n,seed,epsilon,trials,estimate,ci_lo,ci_hi,exact\n");
    for row in &report.stability {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            row.m,
            row.n,
            row.seed,
            row.epsilon,
            row.trials,
            row.estimate,
            row.ci_lo,
            row.ci_hi,
            row.exact
        )
        .unwrap();
    }
    let path = dir.join(format!("{}_estimates.csv", args.experiment));
    std::fs::write(&path, &csv)?;
    println!("wrote {}", path.display());

    let mut csv = String::from("m,n,seed,phi,trials,mean_deviation,max_deviation,frac_above_5pct\n");
    for row in &report.deviations {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.m,
            row.n,
            row.seed,
            row.phi,
            row.trials,
            row.mean_deviation,
            row.max_deviation,
            row.frac_above_5pct
        )
        .unwrap();
    }
    let path = dir.join(format!("{}_deviations.csv", args.experiment));
    std::fs::write(&path, &csv)?;
    println!("wrote {}", path.display());

    let path = dir.join(format!("{}.json", args.experiment));
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    println!("wrote {}", path.display());

    for row in &report.stability {
        println!(
            "m={:<6} n={:<7} stable permutations: {:.4} [{:.4}, {:.4}]{}",
            row.m,
            row.n,
            row.estimate,
            row.ci_lo,
            row.ci_hi,
            if row.exact { " (exact)" } else { "" }
        );
    }
    Ok(())
}

/// Sweep machine counts: estimate the stable-permutation probability and
/// sample load deviations for each m on a freshly generated proper input.
#[allow(clippy::too_many_arguments)]
pub fn cmd_stability(
    machine_counts: &[usize],
    n_ratio: f64,
    epsilon: f64,
    trials: u64,
    dist: Option<Dist>,
    phis: &[f64],
    dev_trials: u64,
    seed: u64,
    h: Option<usize>,
) -> Result<StabilitySweepReport> {
    if machine_counts.is_empty() {
        return Err(Error::InvalidManifest("no machine counts given".into()));
    }
    if !(n_ratio > 1.0 && n_ratio.is_finite()) {
        return Err(Error::InvalidManifest(format!(
            "n ratio must exceed 1, got {n_ratio}"
        )));
    }
    let rule = h.map(HRule::Explicit).unwrap_or_default();
    let dist = dist.unwrap_or(Dist::Uniform { lo: 1.0, hi: 2.0 });
    let mut stability = Vec::new();
    let mut deviations = Vec::new();
    for &m in machine_counts {
        let cfg = AlgConfig::derive(m, rule)?;
        let params = StabilityParams::new(epsilon, cfg)?;
        let n = (n_ratio * m as f64).ceil() as usize;
        let seq = crate::generators::random_proper(m, n, Some(dist), seed)?;
        let estimate = estimate_stability_probability(&seq, &params, trials, seed)?;
        stability.push(StabilityRow {
            m,
            n,
            seed,
            epsilon,
            trials: estimate.trials,
            estimate: estimate.estimate,
            ci_lo: estimate.ci_lo,
            ci_hi: estimate.ci_hi,
            exact: estimate.exact,
            identity_order: check_stable(&seq, &params),
        });
        for &phi in phis {
            let devs = sample_load_deviations(&seq, phi, dev_trials, seed)?;
            let mean = crate::harness::pairwise_sum(&devs) / devs.len() as f64;
            let max = devs.iter().cloned().fold(0.0, f64::max);
            let above = devs.iter().filter(|&&d| d > 0.05).count() as f64 / devs.len() as f64;
            deviations.push(DeviationRow {
                m,
                n,
                seed,
                phi,
                trials: dev_trials,
                mean_deviation: mean,
                max_deviation: max,
                frac_above_5pct: above,
            });
        }
    }
    Ok(StabilitySweepReport {
        schema_version: SCHEMA_VERSION,
        epsilon,
        seed,
        stability,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_parsing() {
        assert_eq!(
            parse_dist("uniform:1,2").unwrap(),
            Dist::Uniform { lo: 1.0, hi: 2.0 }
        );
        assert_eq!(
            parse_dist("two-point:1,20,0.001").unwrap(),
            Dist::TwoPoint {
                lo: 1.0,
                hi: 20.0,
                prob_hi: 0.001
            }
        );
        assert!(parse_dist("uniform:2,1").is_err());
        assert!(parse_dist("nope:1").is_err());
        assert!(parse_dist("pareto:0,1,10").is_err());
    }

    #[test]
    fn exit_codes_map_error_classes() {
        assert_eq!(exit_code_for(&Error::InvalidManifest("x".into())), 2);
        assert_eq!(
            exit_code_for(&Error::InstanceTooLarge { n: 30, max_n: 24 }),
            3
        );
        assert_eq!(
            exit_code_for(&Error::TooManyArrangements { count: 9, cap: 2 }),
            3
        );
        assert_eq!(exit_code_for(&Error::BadPermutation), 4);
    }

    #[test]
    fn verify_constants_renders() {
        let text = verify_constants_text(100, None).unwrap();
        assert!(text.contains("PASS"));
        assert!(!text.contains("FAIL"));
        assert!(text.contains("alpha"));
    }
}
