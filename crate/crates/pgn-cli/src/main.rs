//! `pgn` — command-line front end for template construction, validation,
//! scoring, lattice-flow simulation, trace comparison, occupation profiles,
//! and singularity probes.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or precondition error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pgn_core::builders::TemplateFamily;
use pgn_core::io::{
    self, linked_to_json, score_report_to_json, LatticeJson, Provenance, TemplateJson,
};
use pgn_core::lattice::random_unimodular;
use pgn_core::minima::DEFAULT_BUDGET;
use pgn_core::rational::{fmt_rat, parse_rat};
use pgn_core::singular::{singularity_probe, theta_from_partial_quotients};
use pgn_core::template::Template;
use pgn_core::trace::{compare_trace_to_template, log_minima_trace, occupation_fraction, time_grid};
use pgn_core::{Dims, Lattice};

#[derive(Parser)]
#[command(name = "pgn", version, about = "Template calculus and lattice-flow toolkit")]
struct Cli {
    /// Seed for any randomized input (e.g. `simulate --random`).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format where more than one is supported.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build, validate, or score templates.
    Template {
        #[command(subcommand)]
        command: TemplateCommand,
    },
    /// Sample the log-minima trace of a flowed lattice into a CSV.
    Simulate(SimulateArgs),
    /// Compare a trace CSV against a template JSON.
    Compare(CompareArgs),
    /// Fraction of time the first log-minimum stays above a threshold.
    Occupation(OccupationArgs),
    /// Sample S(Q) = Q^(1/m) * min_{q<=Q} <q theta>.
    ProbeSingular(ProbeArgs),
}

#[derive(Subcommand)]
enum TemplateCommand {
    /// Emit the k-th iterate template as canonical JSON.
    Build(BuildArgs),
    /// Check the template axioms of a JSON file and report violations.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a template JSON over [0, T].
    Score {
        #[arg(long)]
        input: PathBuf,
        /// Horizon T as a rational like `3` or `22/7`.
        #[arg(long)]
        t: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    /// Number of interval-replay iterations; 0 is the base linked template.
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Horizon as a rational like `18` or `55/2`.
    #[arg(long)]
    horizon: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the breakpoints as a plottable CSV.
    #[arg(long)]
    emit_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Lattice JSON path ({m, n, basis row-major}).
    #[arg(long, conflicts_with_all = ["theta", "theta_cf", "random"])]
    lattice: Option<PathBuf>,
    /// Comma-separated target vector for an x_theta lattice (needs n = 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    /// Comma-separated continued-fraction partial quotients for theta
    /// (implies m = 1).
    #[arg(long, value_delimiter = ',', conflicts_with = "theta")]
    theta_cf: Option<Vec<u64>>,
    /// Seeded random integer unimodular lattice.
    #[arg(long)]
    random: bool,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Shear count for --random.
    #[arg(long, default_value_t = 6)]
    shears: usize,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// Enumeration budget per sample.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    template: PathBuf,
    /// Width of the reporting windows in flow time.
    #[arg(long, default_value_t = 5.0)]
    window: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OccupationArgs {
    #[arg(long, conflicts_with_all = ["theta", "theta_cf"])]
    lattice: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "theta")]
    theta_cf: Option<Vec<u64>>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    t_max: f64,
    /// Threshold M on log lambda_1.
    #[arg(long, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "theta")]
    theta_cf: Option<Vec<u64>>,
    #[arg(long)]
    q_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<pgn_core::Error>() {
                Some(pgn_core::Error::Domain(_))
                | Some(pgn_core::Error::Parse(_))
                | Some(pgn_core::Error::FlowRange { .. }) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Template { command } => match command {
            TemplateCommand::Build(args) => cmd_template_build(args),
            TemplateCommand::Validate { input, out } => {
                cmd_template_validate(&input, out.as_deref())
            }
            TemplateCommand::Score { input, t, out } => cmd_score(&input, &t, out.as_deref()),
        },
        Command::Simulate(args) => cmd_simulate(args, cli.seed),
        Command::Compare(args) => cmd_compare(args),
        Command::Occupation(args) => cmd_occupation(args),
        Command::ProbeSingular(args) => cmd_probe(args, cli.format),
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout();
            stdout.write_all(contents.as_bytes())?;
            if !contents.ends_with('\n') {
                writeln!(stdout)?;
            }
        }
    }
    Ok(())
}

fn to_json_line<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn cmd_template_build(args: BuildArgs) -> anyhow::Result<()> {
    let dims = Dims::new(args.m, args.n)?;
    let horizon = parse_rat(&args.horizon)?;
    let lt = TemplateFamily::fk(dims, args.k).materialize(&horizon)?;
    if !lt.template().is_valid() {
        return Err(anyhow!("internal error: builder emitted an invalid template"));
    }
    let doc = linked_to_json(
        &lt,
        Some(Provenance {
            m: args.m,
            n: args.n,
            k: args.k,
            horizon: fmt_rat(&horizon),
        }),
    );
    write_output(args.out.as_deref(), &to_json_line(&doc)?)?;
    if let Some(csv_path) = args.emit_csv {
        let mut buf = Vec::new();
        io::write_breakpoints_csv(lt.path(), &mut buf)?;
        fs::write(&csv_path, buf).with_context(|| format!("writing {}", csv_path.display()))?;
    }
    Ok(())
}

fn load_template_file(path: &Path) -> anyhow::Result<(Template, Option<Vec<pgn_core::Rat>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: TemplateJson = serde_json::from_str(&text)
        .map_err(|e| anyhow!(pgn_core::Error::Parse(format!("{}: {e}", path.display()))))?;
    let (template, anchors) = io::json_to_template(&doc)?;
    Ok((template, anchors))
}

#[derive(serde::Serialize)]
struct ValidateOutput {
    valid: bool,
    violations: Vec<pgn_core::template::Violation>,
}

fn cmd_template_validate(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let (template, _anchors) = load_template_file(input)?;
    let report = template.report();
    let output = ValidateOutput {
        valid: report.is_valid(),
        violations: report.violations.clone(),
    };
    write_output(out, &to_json_line(&output)?)
}

fn cmd_score(input: &Path, t: &str, out: Option<&Path>) -> anyhow::Result<()> {
    let (template, _anchors) = load_template_file(input)?;
    let horizon = parse_rat(t)?;
    let report = pgn_core::score_report(&template, &horizon)?;
    write_output(out, &to_json_line(&score_report_to_json(&report))?)
}

fn resolve_dims(m: Option<u32>, n: Option<u32>) -> anyhow::Result<Dims> {
    let m = m.ok_or_else(|| anyhow!(pgn_core::Error::Domain("--m is required".into())))?;
    let n = n.ok_or_else(|| anyhow!(pgn_core::Error::Domain("--n is required".into())))?;
    Ok(Dims::new(m, n)?)
}

fn load_lattice_file(path: &Path) -> anyhow::Result<Lattice> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: LatticeJson = serde_json::from_str(&text)
        .map_err(|e| anyhow!(pgn_core::Error::Parse(format!("{}: {e}", path.display()))))?;
    let dims = Dims::new(doc.m, doc.n)?;
    Ok(Lattice::from_basis_row_major(dims, &doc.basis)?)
}

fn theta_from_args(
    theta: &Option<Vec<f64>>,
    theta_cf: &Option<Vec<u64>>,
) -> anyhow::Result<Option<Vec<f64>>> {
    if let Some(t) = theta {
        return Ok(Some(t.clone()));
    }
    if let Some(cf) = theta_cf {
        return Ok(Some(vec![theta_from_partial_quotients(cf)?]));
    }
    Ok(None)
}

fn lattice_from_common(
    lattice: &Option<PathBuf>,
    theta: &Option<Vec<f64>>,
    theta_cf: &Option<Vec<u64>>,
    m: Option<u32>,
    n: Option<u32>,
) -> anyhow::Result<Option<Lattice>> {
    if let Some(path) = lattice {
        return Ok(Some(load_lattice_file(path)?));
    }
    if let Some(theta) = theta_from_args(theta, theta_cf)? {
        let dims = Dims::new(m.unwrap_or(theta.len() as u32), n.unwrap_or(1))?;
        return Ok(Some(Lattice::from_theta(dims, &theta)?));
    }
    Ok(None)
}

fn cmd_simulate(args: SimulateArgs, seed: u64) -> anyhow::Result<()> {
    let x = match lattice_from_common(&args.lattice, &args.theta, &args.theta_cf, args.m, args.n)? {
        Some(x) => x,
        None if args.random => {
            use rand::SeedableRng;
            let dims = resolve_dims(args.m, args.n)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            random_unimodular(dims, args.shears, 3, &mut rng)
        }
        None => {
            return Err(anyhow!(pgn_core::Error::Domain(
                "one of --lattice, --theta, --theta-cf, or --random is required".into()
            )))
        }
    };
    let grid = time_grid(args.t_max, args.dt)?;
    let trace = log_minima_trace(&x, &grid, args.budget)?;
    let mut buf = Vec::new();
    io::write_trace_csv(&trace, &mut buf)?;
    match args.out.as_deref() {
        Some(path) => {
            fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let trace = io::read_trace_csv(&text)?;
    let (template, _anchors) = load_template_file(&args.template)?;
    let cmp = compare_trace_to_template(&trace, template.path(), args.window)?;
    write_output(args.out.as_deref(), &to_json_line(&cmp)?)
}

fn cmd_occupation(args: OccupationArgs) -> anyhow::Result<()> {
    let x = lattice_from_common(&args.lattice, &args.theta, &args.theta_cf, args.m, args.n)?
        .ok_or_else(|| {
            anyhow!(pgn_core::Error::Domain(
                "one of --lattice, --theta, or --theta-cf is required".into()
            ))
        })?;
    let profile = occupation_fraction(&x, args.t_max, args.threshold, args.dt)?;
    write_output(args.out.as_deref(), &to_json_line(&profile)?)
}

fn cmd_probe(args: ProbeArgs, format: Format) -> anyhow::Result<()> {
    let theta = theta_from_args(&args.theta, &args.theta_cf)?.ok_or_else(|| {
        anyhow!(pgn_core::Error::Domain(
            "one of --theta or --theta-cf is required".into()
        ))
    })?;
    let probe = singularity_probe(&theta, args.q_max)?;
    let contents = match format {
        Format::Json => to_json_line(&probe)?,
        Format::Csv => {
            let mut s = String::from("q,min_dist,s\n");
            for sample in &probe.samples {
                s.push_str(&format!(
                    "{},{},{}\n",
                    sample.q,
                    io::fmt_f64(sample.min_dist),
                    io::fmt_f64(sample.s)
                ));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &contents)
}
