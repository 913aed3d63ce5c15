//! `equidist`: generate sequences, run uniform-distribution tests and
//! seeded experiments, and write JSON (optionally CSV) reports.
//!
//! Exit status: 0 on success/pass, 1 when a test or experiment fails,
//! 2 on usage, configuration or input errors.

mod args;
mod report;
mod seqfile;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use equidist::{
    diagonal_spoiler, iid_uniform, kronecker, lift_to_tag, qmc_integrate, run_experiment,
    sample_tagged, star_discrepancy, tagged_integrate, tagged_weyl_check, ud_verdict,
    van_der_corput, Alpha, Endpoints, ExperimentConfig, IntegrandSpec, Materialized,
    PartitionConfig, PointSource, Probe,
};
use serde_json::{json, Value};

use crate::report::{object, to_rows, Outputs, Report, RunManifest, TOOL, VERSION};

#[derive(Parser, Debug)]
#[command(
    name = "equidist",
    version,
    about = "Tagged uniform distribution toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct OutputArgs {
    /// JSON report path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the report rows as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sequence prefix
    Generate(GenerateArgs),
    /// Move every term of a sequence onto one tag class
    Lift(LiftArgs),
    /// Give every term of a sequence its own tag class
    Spoil(SpoilArgs),
    /// Plain or tagged counting verdict over an interval grid
    Test(TestArgs),
    /// Star discrepancy along a schedule
    Discrepancy(DiscrepancyArgs),
    /// Tagged Weyl check against reference integrals
    Weyl(WeylArgs),
    /// QMC (or tagged) integration of one integrand
    Integrate(IntegrateArgs),
    /// Seeded Monte-Carlo experiment
    Experiment(ExperimentArgs),
    /// Re-run a report from its embedded manifest
    Rerun(RerunArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Kronecker,
    #[value(alias = "vdc")]
    VanDerCorput,
    Iid,
    SampleTagged,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Rotation number: sqrt2, sqrt3, golden, e, pi or a decimal literal
    #[arg(long, default_value = "sqrt2")]
    alpha: String,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = args::parse_count)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    p: u32,
    /// Number of tag classes (sample-tagged)
    #[arg(long)]
    m: Option<u64>,
    /// Tag class to sample from (sample-tagged)
    #[arg(long)]
    tag: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct LiftArgs {
    #[arg(long)]
    seq: PathBuf,
    #[arg(long)]
    tag: u64,
    #[arg(long)]
    m: u64,
    /// Grid precision of the partition (defaults to the input's)
    #[arg(long)]
    p: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SpoilArgs {
    #[arg(long)]
    seq: PathBuf,
    /// Number of tag classes, at least the sequence length
    #[arg(long)]
    m: u64,
    #[arg(long)]
    p: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Tag class for tagged counting
    #[arg(long)]
    tag: Option<u64>,
    /// Number of tag classes (defaults to the sequence's partition)
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    p: Option<u32>,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long)]
    seq: PathBuf,
    /// dyadicK or explicit intervals c:d,c:d
    #[arg(long, default_value = "dyadic8")]
    grid: String,
    /// Use [c,d) instead of [c,d]
    #[arg(long)]
    half_open: bool,
    /// Comma-separated N values (default 100,1000,10000,100000 up to the length)
    #[arg(long, value_parser = args::parse_schedule)]
    schedule: Option<args::Schedule>,
    #[arg(long, default_value_t = equidist::ud_tests::DEFAULT_TOLERANCE)]
    tol: f64,
    #[command(flatten)]
    partition: PartitionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DiscrepancyArgs {
    #[arg(long)]
    seq: PathBuf,
    /// Comma-separated N values (default: full length)
    #[arg(long, value_parser = args::parse_schedule)]
    schedule: Option<args::Schedule>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct WeylArgs {
    #[arg(long)]
    seq: PathBuf,
    #[arg(long)]
    tag: u64,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    p: Option<u32>,
    /// Integrand (repeatable); default x, x^2, sin:1, cos:1
    #[arg(long = "integrand", value_parser = args::parse_integrand)]
    integrands: Vec<IntegrandSpec>,
    #[arg(long, value_parser = args::parse_count)]
    n: Option<usize>,
    #[arg(long, default_value_t = equidist::ud_tests::DEFAULT_TOLERANCE)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long)]
    seq: PathBuf,
    #[arg(long, value_parser = args::parse_integrand)]
    integrand: IntegrandSpec,
    #[arg(long, value_parser = args::parse_count)]
    n: Option<usize>,
    /// Fail (exit 1) when |estimate - reference| exceeds this
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    partition: PartitionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ExperimentKind {
    Slln,
    Hlawka,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// Read the whole configuration from a JSON file instead of flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    m: u64,
    #[arg(long, default_value_t = 32)]
    p: u32,
    #[arg(long, default_value_t = 0)]
    tag: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_parser = args::parse_count, default_value = "10000")]
    n: usize,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = equidist::integrate::DEFAULT_DELTA)]
    delta: f64,
    /// Integrand for slln
    #[arg(long, value_parser = args::parse_integrand, default_value = "x")]
    integrand: IntegrandSpec,
    /// Interval grid for hlawka
    #[arg(long, default_value = "dyadic8")]
    grid: String,
    #[arg(long)]
    half_open: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RerunArgs {
    /// Report whose manifest is replayed
    #[arg(long)]
    report: PathBuf,
    /// Exit 1 unless the replayed rows equal the stored ones
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    output: OutputArgs,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Lift(_) => "lift",
            Command::Spoil(_) => "spoil",
            Command::Test(_) => "test",
            Command::Discrepancy(_) => "discrepancy",
            Command::Weyl(_) => "weyl",
            Command::Integrate(_) => "integrate",
            Command::Experiment(_) => "experiment",
            Command::Rerun(_) => "rerun",
        }
    }

    fn output(&self) -> &OutputArgs {
        match self {
            Command::Generate(a) => &a.output,
            Command::Lift(a) => &a.output,
            Command::Spoil(a) => &a.output,
            Command::Test(a) => &a.output,
            Command::Discrepancy(a) => &a.output,
            Command::Weyl(a) => &a.output,
            Command::Integrate(a) => &a.output,
            Command::Experiment(a) => &a.output,
            Command::Rerun(a) => &a.output,
        }
    }
}

struct Ctx {
    subcommand: String,
    argv: Vec<String>,
    outputs: Outputs,
}

impl Ctx {
    fn finish(
        &self,
        kind: &str,
        resolved: Value,
        rows: Vec<Value>,
        pass: bool,
        summary: Value,
    ) -> Result<Report> {
        let report = Report {
            kind: kind.into(),
            config: RunManifest {
                tool: TOOL.into(),
                version: VERSION.into(),
                subcommand: self.subcommand.clone(),
                argv: self.argv.clone(),
                resolved,
                outputs: self.outputs.clone(),
            },
            rows,
            pass,
            summary,
        };
        Ok(report)
    }
}

fn partition_for(m: Option<u64>, p: Option<u32>, seq: &Materialized) -> Result<PartitionConfig> {
    let own = seq.as_tagged().map(|t| *t.partition());
    match (m, own) {
        (Some(m), _) => {
            let p = p
                .or(own.map(|c| c.p()))
                .unwrap_or(seq.sequence().descriptor().p);
            Ok(PartitionConfig::new(m, p)?)
        }
        (None, Some(cfg)) => match p {
            Some(p) if p != cfg.p() => Ok(PartitionConfig::new(cfg.m(), p)?),
            _ => Ok(cfg),
        },
        (None, None) => bail!("--m is required: the sequence carries no partition"),
    }
}

fn sequence_report(ctx: &Ctx, seq: Materialized) -> Result<Report> {
    let resolved = seqfile::summary(&seq)?;
    ctx.finish(
        "sequence",
        resolved.clone(),
        seqfile::rows(&seq)?,
        true,
        resolved,
    )
}

fn execute(cmd: &Command, ctx: &Ctx) -> Result<Report> {
    match cmd {
        Command::Generate(a) => {
            let seq = match a.kind {
                Kind::Kronecker => {
                    let alpha: Alpha = a.alpha.parse()?;
                    Materialized::Plain(kronecker(&alpha, a.n, a.p)?)
                }
                Kind::VanDerCorput => Materialized::Plain(van_der_corput(a.base, a.n, a.p)?),
                Kind::Iid => {
                    let seed = a
                        .seed
                        .ok_or_else(|| anyhow!("--seed is required for iid"))?;
                    Materialized::Plain(iid_uniform(seed, a.n, a.p)?)
                }
                Kind::SampleTagged => {
                    let seed = a
                        .seed
                        .ok_or_else(|| anyhow!("--seed is required for sample-tagged"))?;
                    let m =
                        a.m.ok_or_else(|| anyhow!("--m is required for sample-tagged"))?;
                    let tag = a
                        .tag
                        .ok_or_else(|| anyhow!("--tag is required for sample-tagged"))?;
                    let cfg = PartitionConfig::new(m, a.p)?;
                    Materialized::Tagged(sample_tagged(seed, cfg.tag(tag)?, a.n, &cfg)?)
                }
            };
            sequence_report(ctx, seq)
        }
        Command::Lift(a) => {
            let x = seqfile::load(&a.seq)?.into_sequence();
            let cfg = PartitionConfig::new(a.m, a.p.unwrap_or(x.descriptor().p))?;
            sequence_report(
                ctx,
                Materialized::Tagged(lift_to_tag(&x, cfg.tag(a.tag)?, &cfg)?),
            )
        }
        Command::Spoil(a) => {
            let x = seqfile::load(&a.seq)?.into_sequence();
            let cfg = PartitionConfig::new(a.m, a.p.unwrap_or(x.descriptor().p))?;
            sequence_report(ctx, Materialized::Tagged(diagonal_spoiler(&x, &cfg)?))
        }
        Command::Test(a) => {
            let seq = seqfile::load(&a.seq)?;
            let endpoints = if a.half_open {
                Endpoints::HalfOpen
            } else {
                Endpoints::Closed
            };
            let grid = args::parse_grid(&a.grid, endpoints)?;
            let schedule = a
                .schedule
                .clone()
                .map(|s| s.0)
                .unwrap_or_else(|| default_schedule(seq.len()));
            let cfg = match a.partition.tag {
                Some(_) => Some(partition_for(a.partition.m, a.partition.p, &seq)?),
                None => None,
            };
            let tag = match (a.partition.tag, &cfg) {
                (Some(t), Some(c)) => Some((c.tag(t)?, c)),
                _ => None,
            };
            let verdict = ud_verdict(&seq, &grid, &schedule, a.tol, tag)?;
            let resolved = json!({
                "sequence": seq.sequence().descriptor(),
                "grid": grid,
                "schedule": schedule,
                "tolerance": a.tol,
                "tag": a.partition.tag,
                "partition": cfg,
            });
            let summary = object(vec![
                ("failing", serde_json::to_value(&verdict.failing)?),
                ("max_abs_deviation", json!(verdict.report.max_abs_deviation)),
                (
                    "final_max_abs_deviation",
                    json!(verdict.report.final_max_abs_deviation),
                ),
            ]);
            ctx.finish(
                "verdict",
                resolved,
                to_rows(&verdict.report.rows)?,
                verdict.pass,
                summary,
            )
        }
        Command::Discrepancy(a) => {
            let seq = seqfile::load(&a.seq)?;
            let schedule = a
                .schedule
                .clone()
                .map(|s| s.0)
                .unwrap_or_else(|| vec![seq.len()]);
            let rows = schedule
                .iter()
                .map(|&n| Ok(json!({"N": n, "discrepancy": star_discrepancy(&seq, n)?})))
                .collect::<Result<Vec<_>>>()?;
            let resolved = json!({"sequence": seq.sequence().descriptor(), "schedule": schedule});
            ctx.finish("discrepancy", resolved, rows, true, Value::Null)
        }
        Command::Weyl(a) => {
            let seq = seqfile::load(&a.seq)?;
            let cfg = partition_for(a.m, a.p, &seq)?;
            let integrands = if a.integrands.is_empty() {
                vec![
                    IntegrandSpec::monomial(1),
                    IntegrandSpec::monomial(2),
                    IntegrandSpec::sin(1),
                    IntegrandSpec::cos(1),
                ]
            } else {
                a.integrands.clone()
            };
            let n = a.n.unwrap_or(seq.len());
            let report = tagged_weyl_check(&seq, cfg.tag(a.tag)?, &integrands, n, a.tol, &cfg)?;
            let resolved = json!({
                "sequence": seq.sequence().descriptor(),
                "tag": a.tag,
                "partition": cfg,
                "integrands": integrands,
                "N": n,
                "tolerance": a.tol,
            });
            ctx.finish(
                "weyl",
                resolved,
                to_rows(&report.rows)?,
                report.pass,
                Value::Null,
            )
        }
        Command::Integrate(a) => {
            let seq = seqfile::load(&a.seq)?;
            let n = a.n.unwrap_or(seq.len());
            let (estimate, cfg) = match a.partition.tag {
                Some(t) => {
                    let cfg = partition_for(a.partition.m, a.partition.p, &seq)?;
                    (
                        tagged_integrate(&a.integrand, cfg.tag(t)?, &seq, n, &cfg)?,
                        Some(cfg),
                    )
                }
                None => (qmc_integrate(&a.integrand, &seq, n)?, None),
            };
            let pass = a.tol.is_none_or(|tol| estimate.deviation.abs() <= tol);
            let mut row = serde_json::to_value(estimate)?;
            row["integrand"] = json!(a.integrand.label());
            let resolved = json!({
                "sequence": seq.sequence().descriptor(),
                "integrand": a.integrand,
                "N": n,
                "tag": a.partition.tag,
                "partition": cfg,
                "tolerance": a.tol,
            });
            ctx.finish("integrate", resolved, vec![row], pass, Value::Null)
        }
        Command::Experiment(a) => {
            let cfg = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let cfg: ExperimentConfig = serde_json::from_str(&text)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    let matches = matches!(
                        (&cfg.probe, a.kind),
                        (Probe::Slln { .. }, ExperimentKind::Slln)
                            | (Probe::Hlawka { .. }, ExperimentKind::Hlawka)
                    );
                    if !matches {
                        bail!("{} describes a different experiment", path.display());
                    }
                    cfg
                }
                None => {
                    let probe = match a.kind {
                        ExperimentKind::Slln => Probe::Slln {
                            integrand: a.integrand.clone(),
                        },
                        ExperimentKind::Hlawka => {
                            let endpoints = if a.half_open {
                                Endpoints::HalfOpen
                            } else {
                                Endpoints::Closed
                            };
                            Probe::Hlawka {
                                grid: args::parse_grid(&a.grid, endpoints)?,
                            }
                        }
                    };
                    ExperimentConfig {
                        probe,
                        trials: a.trials,
                        n: a.n,
                        eps: a.eps,
                        tag: a.tag,
                        partition: PartitionConfig::new(a.m, a.p)?,
                        master_seed: a.seed,
                        delta: a.delta,
                    }
                }
            };
            let report = run_experiment(&cfg)?;
            let summary = json!({
                "rng": report.rng,
                "passed": report.passed,
                "pass_fraction": report.pass_fraction,
                "required_fraction": 1.0 - cfg.delta,
            });
            ctx.finish(
                "experiment",
                serde_json::to_value(&cfg)?,
                to_rows(&report.rows)?,
                report.pass,
                summary,
            )
        }
        Command::Rerun(a) => {
            let original = Report::read(&a.report)?;
            let mut argv = original.config.argv.clone();
            strip_flag(&mut argv, "--out");
            strip_flag(&mut argv, "--csv");
            if let Some(out) = &a.output.out {
                argv.extend(["--out".into(), out.display().to_string()]);
            }
            if let Some(csv) = &a.output.csv {
                argv.extend(["--csv".into(), csv.display().to_string()]);
            }
            let cli =
                Cli::try_parse_from(std::iter::once(TOOL.to_string()).chain(argv.iter().cloned()))
                    .map_err(|e| anyhow!("stored manifest no longer parses: {e}"))?;
            if matches!(cli.command, Command::Rerun(_)) {
                bail!("refusing to replay a rerun manifest");
            }
            let mut replay = build_report(&cli.command, argv)?;
            if a.check && replay.rows != original.rows {
                replay.pass = false;
            }
            Ok(replay)
        }
    }
}

fn default_schedule(len: usize) -> Vec<usize> {
    let s: Vec<usize> = equidist::ud_tests::DEFAULT_SCHEDULE
        .into_iter()
        .filter(|&n| n <= len)
        .collect();
    if s.is_empty() {
        vec![len]
    } else {
        s
    }
}

/// Removes `--flag value` and `--flag=value` occurrences.
fn strip_flag(argv: &mut Vec<String>, flag: &str) {
    let prefix = format!("{flag}=");
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == flag {
            argv.drain(i..(i + 2).min(argv.len()));
        } else if argv[i].starts_with(&prefix) {
            argv.remove(i);
        } else {
            i += 1;
        }
    }
}

fn run_command(cmd: &Command, argv: Vec<String>) -> Result<Report> {
    let report = build_report(cmd, argv)?;
    report.write()?;
    Ok(report)
}

fn build_report(cmd: &Command, argv: Vec<String>) -> Result<Report> {
    let output = cmd.output();
    let ctx = Ctx {
        subcommand: cmd.name().into(),
        argv,
        outputs: Outputs {
            json: output.out.clone(),
            csv: output.csv.clone(),
        },
    };
    execute(cmd, &ctx)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EQUIDIST_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("EQUIDIST_THREADS must be a non-negative integer, got {v:?}"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli =
        match Cli::try_parse_from(std::iter::once(TOOL.to_string()).chain(argv.iter().cloned())) {
            Ok(cli) => cli,
            Err(e) => {
                let _ = e.print();
                return if e.use_stderr() {
                    ExitCode::from(2)
                } else {
                    ExitCode::SUCCESS
                };
            }
        };
    let result = configure_threads().and_then(|_| run_command(&cli.command, argv));
    match result {
        Ok(report) => {
            if report.config.outputs.json.is_none() {
                match serde_json::to_string_pretty(&report) {
                    Ok(text) => println!("{text}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                eprintln!(
                    "{}: {} ({} rows)",
                    report.kind,
                    if report.pass { "pass" } else { "FAIL" },
                    report.rows.len()
                );
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_flag_forms() {
        let mut v: Vec<String> = ["test", "--out", "a.json", "--tol", "0.1", "--csv=b.csv"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        strip_flag(&mut v, "--out");
        strip_flag(&mut v, "--csv");
        assert_eq!(v, vec!["test", "--tol", "0.1"]);
    }

    #[test]
    fn default_schedule_clips_to_length() {
        assert_eq!(default_schedule(5_000), vec![100, 1_000]);
        assert_eq!(default_schedule(50), vec![50]);
        assert_eq!(default_schedule(100_000).len(), 4);
    }
}
