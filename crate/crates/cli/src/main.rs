use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use perispec::campaign::{self, CampaignConfig, Generator};
use perispec::format::{operator_to_json, parse_operator};
use perispec::gallery::{self, Overrides};
use perispec::operators::Operator;
use perispec::spectral::{self, DEFAULT_EIG_TOL, DEFAULT_UNIMODULAR_TOL};
use perispec::verdicts::{analyze, EngineOptions, Report};

/// Exit code reserved for soundness violations.
const EXIT_VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(name = "perispec", version, about = "Spectral analysis of positive operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Tuning {
    /// Relative eigenvalue clustering tolerance.
    #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
    tol_eig: f64,
    /// Entries at or below this value count as zero in support computations.
    #[arg(long, default_value_t = 0.0)]
    tol_support: f64,
    /// Tolerance for unimodularity and peripheral decisions.
    #[arg(long, default_value_t = DEFAULT_UNIMODULAR_TOL)]
    tol: f64,
    /// Expansion and power-bound horizon [default: 2·dim].
    #[arg(long)]
    horizon: Option<usize>,
    /// Largest power used by the convergence and mean ergodic tests.
    #[arg(long, default_value_t = 5000)]
    kmax: u64,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random vectors used to cross-check support expansion.
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

impl Tuning {
    fn options(&self) -> EngineOptions {
        EngineOptions {
            horizon: self.horizon,
            samples: self.samples,
            seed: self.seed,
            tau: self.tol_support,
            tol: self.tol,
            eig_tol: self.tol_eig,
            k_max: self.kmax,
            ..EngineOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyse an operator file and print the JSON report.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Directory for reproduction files of soundness violations.
        #[arg(long, default_value = "perispec-repro")]
        repro_dir: PathBuf,
    },
    /// Print the eigenvalues of an operator file.
    Spectrum {
        path: PathBuf,
        /// CSV with header `re,im,mult,residual` (default).
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol_eig: f64,
    },
    /// Named reproductions of the worked examples.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Seeded random campaign over a hypothesis class.
    Campaign(CampaignArgs),
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// List scenario names.
    List,
    /// Build a scenario, analyse it and check its golden assertions.
    Run {
        name: String,
        /// Print the full JSON run instead of one line per assertion.
        #[arg(long)]
        json: bool,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long, default_value = "perispec-repro")]
        repro_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    StochasticPositiveDiag,
    IrreducibleOneDiag,
    DominatesId,
    PowerDomination,
    Unconstrained,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, value_enum)]
    generator: GeneratorArg,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    min_dim: usize,
    #[arg(long, default_value_t = 12)]
    max_dim: usize,
    /// ε for the dominates-id and power-domination generators.
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    /// Power n for the power-domination generator.
    #[arg(long, default_value_t = 2)]
    power_n: usize,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long, default_value = "perispec-repro")]
    repro_dir: PathBuf,
}

fn read_operator(path: &Path) -> Result<Operator> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let op = parse_operator(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(if op.label().is_empty() { op.with_label(label) } else { op })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_repro(dir: &Path, op: &Operator, report: &Report) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name: String = op
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let path = dir.join(format!("violation-{name}.json"));
    let body = serde_json::json!({ "operator": operator_to_json(op), "report": report });
    std::fs::write(&path, serde_json::to_string_pretty(&body)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn report_violations(op: &Operator, report: &Report, repro_dir: &Path) -> Result<ExitCode> {
    if report.violations().is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    let path = write_repro(repro_dir, op, report)?;
    eprintln!(
        "soundness violation in {:?}; reproduction written to {}",
        report.violations().iter().map(|v| v.report.theorem_id).collect::<Vec<_>>(),
        path.display()
    );
    Ok(ExitCode::from(EXIT_VIOLATION))
}

fn cmd_analyze(path: &Path, tuning: &Tuning, repro_dir: &Path) -> Result<ExitCode> {
    let op = read_operator(path)?;
    let report = analyze(&op, &tuning.options())?;
    print_json(&report)?;
    report_violations(&op, &report, repro_dir)
}

fn cmd_spectrum(path: &Path, json: bool, tol_eig: f64) -> Result<ExitCode> {
    let op = read_operator(path)?;
    let spectrum = spectral::eigenvalues(&op, tol_eig)?;
    if json {
        print_json(&spectrum.points)?;
    } else {
        let mut w = csv::Writer::from_writer(std::io::stdout().lock());
        w.write_record(["re", "im", "mult", "residual"])?;
        for p in &spectrum.points {
            w.write_record([
                p.value.re.to_string(),
                p.value.im.to_string(),
                p.multiplicity.to_string(),
                p.residual.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_overrides(set: &[String]) -> Result<Overrides> {
    let mut overrides = BTreeMap::new();
    for item in set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("override {item:?} is not of the form key=value"))?;
        let value: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("override {item:?} has a non-numeric value"))?;
        overrides.insert(key.trim().to_string(), value);
    }
    Ok(overrides)
}

fn cmd_gallery_run(
    name: &str,
    json: bool,
    set: &[String],
    tuning: &Tuning,
    repro_dir: &Path,
) -> Result<ExitCode> {
    let scenario = gallery::build_scenario(name, &parse_overrides(set)?)?;
    let run = gallery::run_scenario(&scenario, &tuning.options())?;
    if json {
        print_json(&run)?;
    } else {
        let mut out = std::io::stdout().lock();
        writeln!(out, "{} ({})", run.name, scenario.operator.label())?;
        for a in &run.assertions {
            let status = if a.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {} measured={}", a.name, a.measured)?;
        }
    }
    let code = report_violations(&scenario.operator, &run.report, repro_dir)?;
    if code != ExitCode::SUCCESS {
        return Ok(code);
    }
    if !run.passed {
        bail!("golden assertions failed for scenario {name}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_campaign(args: &CampaignArgs) -> Result<ExitCode> {
    let generator = match args.generator {
        GeneratorArg::StochasticPositiveDiag => Generator::StochasticPositiveDiag,
        GeneratorArg::IrreducibleOneDiag => Generator::IrreducibleOneDiag,
        GeneratorArg::DominatesId => Generator::DominatesId {
            epsilon: args.epsilon,
        },
        GeneratorArg::PowerDomination => Generator::PowerDomination {
            n: args.power_n,
            epsilon: args.epsilon,
        },
        GeneratorArg::Unconstrained => Generator::Unconstrained,
    };
    let config = CampaignConfig {
        count: args.count,
        min_dim: args.min_dim,
        max_dim: args.max_dim,
        generator,
        seed: args.tuning.seed,
        options: args.tuning.options(),
    };
    let run = campaign::run_campaign(&config, args.jobs)?;
    print_json(&run.summary)?;
    if run.summary.violations.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    let paths = campaign::write_reproductions(&run, &args.repro_dir)?;
    eprintln!(
        "{} soundness violation(s); {} reproduction file(s) in {}",
        run.summary.violations.len(),
        paths.len(),
        args.repro_dir.display()
    );
    Ok(ExitCode::from(EXIT_VIOLATION))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze {
            path,
            tuning,
            repro_dir,
        } => cmd_analyze(&path, &tuning, &repro_dir),
        Command::Spectrum {
            path,
            csv: _,
            json,
            tol_eig,
        } => cmd_spectrum(&path, json, tol_eig),
        Command::Gallery { command } => match command {
            GalleryCommand::List => {
                let mut out = std::io::stdout().lock();
                for name in gallery::list() {
                    writeln!(out, "{name}")?;
                }
                Ok(ExitCode::SUCCESS)
            }
            GalleryCommand::Run {
                name,
                json,
                set,
                tuning,
                repro_dir,
            } => cmd_gallery_run(&name, json, &set, &tuning, &repro_dir),
        },
        Command::Campaign(args) => cmd_campaign(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
