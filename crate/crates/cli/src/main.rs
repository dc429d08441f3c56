use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use randpre::experiment::{
    self, check, policy_sweep, render_table, Experiment, ExperimentSpec, Policy, Report,
};
use randpre::matgen::ClassTag;
use randpre::randmats::KindTag;

#[derive(Parser, Debug)]
#[command(
    name = "randpre",
    version,
    about = "Seeded Monte-Carlo experiments for randomized preprocessing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trailing singular spaces through augmentation and additive preprocessing
    Table1(RunArgs),
    /// Leading singular spaces and low-rank error
    Table2(RunArgs),
    /// Trailing spaces as complements of leading sketches
    Table3(RunArgs),
    /// Preconditioning of the ill-conditioned test classes
    Table4(RunArgs),
    /// Gaussian norm and pseudo-inverse bounds
    Bounds(RunArgs),
    /// SRFT support condition
    Srft(RunArgs),
    /// Elimination without pivoting on adversarial inputs
    Genp(RunArgs),
    /// Maximal-volume skeletons against exhaustive search
    Cur(RunArgs),
    /// Condition growth under scaled additive updates
    Scaling(RunArgs),
    /// Multiplier selection policies
    Policy(RunArgs),
}

impl Command {
    fn split(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::Table1(a) => (Experiment::Table1, a),
            Command::Table2(a) => (Experiment::Table2, a),
            Command::Table3(a) => (Experiment::Table3, a),
            Command::Table4(a) => (Experiment::Table4, a),
            Command::Bounds(a) => (Experiment::Bounds, a),
            Command::Srft(a) => (Experiment::Srft, a),
            Command::Genp(a) => (Experiment::Genp, a),
            Command::Cur(a) => (Experiment::Cur, a),
            Command::Scaling(a) => (Experiment::Scaling, a),
            Command::Policy(a) => (Experiment::Policy, a),
        }
    }
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Matrix sizes (comma separated)
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Nullities or preprocessor widths (comma separated)
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Leading ranks (comma separated); takes precedence over --r
    #[arg(long, value_delimiter = ',')]
    rho: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// gaussian | srft | circulant | subcirculant | signed (comma separated)
    #[arg(long, value_delimiter = ',')]
    kind: Vec<String>,
    /// Test classes for table4/scaling, e.g. 1n,3s
    #[arg(long, value_delimiter = ',')]
    class: Vec<String>,
    /// Monitor threshold
    #[arg(long)]
    tau: Option<f64>,
    /// Experiment tolerance (genp success residual, cur dominance tolerance)
    #[arg(long)]
    tol: Option<f64>,
    /// Power-transform exponent
    #[arg(long)]
    power: Option<usize>,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Policy as kinds joined by '>', e.g. signed>gaussian (repeatable)
    #[arg(long)]
    policy: Vec<String>,
    /// Exit with status 2 if an acceptance check fails
    #[arg(long)]
    check: bool,
    /// TOML file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Do not print the summary table
    #[arg(long)]
    quiet: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<Vec<usize>>,
    r: Option<Vec<usize>>,
    rho: Option<Vec<usize>>,
    sizes: Option<Vec<[usize; 2]>>,
    trials: Option<usize>,
    seed: Option<u64>,
    kind: Option<Vec<String>>,
    class: Option<Vec<String>>,
    tau: Option<f64>,
    tol: Option<f64>,
    power: Option<usize>,
    out: Option<PathBuf>,
    policy: Option<Vec<String>>,
    check: Option<bool>,
}

fn load_config(path: &Path) -> anyhow::Result<FileConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pick<T: Clone>(flag: &[T], file: &Option<Vec<T>>) -> Option<Vec<T>> {
    if !flag.is_empty() {
        Some(flag.to_vec())
    } else {
        file.clone()
    }
}

fn distinct(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn parse_kinds(names: &[String]) -> anyhow::Result<Vec<KindTag>> {
    names
        .iter()
        .map(|s| {
            s.trim()
                .parse::<KindTag>()
                .map_err(|e| anyhow!("--kind: {e}"))
        })
        .collect()
}

fn parse_policy(s: &str) -> anyhow::Result<Policy> {
    let kinds = s
        .split('>')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<KindTag>()
                .map_err(|e| anyhow!("--policy {s:?}: {e}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Policy { kinds })
}

/// Defaults, then the config file, then flags.
fn build_spec(
    experiment: Experiment,
    args: &RunArgs,
    file: &FileConfig,
) -> anyhow::Result<(ExperimentSpec, bool, Vec<Policy>)> {
    let mut spec = ExperimentSpec::defaults(experiment);
    let ns = pick(&args.n, &file.n);
    let second = pick(&args.rho, &file.rho).or_else(|| pick(&args.r, &file.r));
    if ns.is_some() || second.is_some() {
        let ns = ns.unwrap_or_else(|| distinct(spec.sizes.iter().map(|s| s.0)));
        let rs = second.unwrap_or_else(|| distinct(spec.sizes.iter().map(|s| s.1)));
        spec.sizes = ns
            .iter()
            .flat_map(|&n| rs.iter().map(move |&r| (n, r)))
            .collect();
    } else if let Some(sizes) = &file.sizes {
        spec.sizes = sizes.iter().map(|s| (s[0], s[1])).collect();
    }
    if let Some(t) = args.trials.or(file.trials) {
        spec.trials = t;
    }
    if let Some(s) = args.seed.or(file.seed) {
        spec.seed = s;
    }
    if let Some(k) = pick(&args.kind, &file.kind) {
        spec.kinds = parse_kinds(&k)?;
    }
    if let Some(c) = pick(&args.class, &file.class) {
        spec.classes = c
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<ClassTag>()
                    .map_err(|e| anyhow!("--class: {e}"))
            })
            .collect::<anyhow::Result<_>>()?;
    }
    if let Some(t) = args.tau.or(file.tau) {
        spec.tau = t;
    }
    if let Some(t) = args.tol.or(file.tol) {
        spec.tol = t;
    }
    if let Some(p) = args.power.or(file.power) {
        spec.power = p;
    }
    spec.output_path = args.out.clone().or_else(|| file.out.clone());
    let policies = match pick(&args.policy, &file.policy) {
        Some(list) => list
            .iter()
            .map(|s| parse_policy(s))
            .collect::<anyhow::Result<Vec<_>>>()?,
        None => Policy::defaults(),
    };
    let check = args.check || file.check.unwrap_or(false);
    Ok((spec, check, policies))
}

fn execute(spec: &ExperimentSpec, policies: &[Policy]) -> anyhow::Result<Report> {
    if spec.experiment != Experiment::Policy {
        return Ok(experiment::run(spec)?);
    }
    let start = std::time::Instant::now();
    let rows = policy_sweep(spec, policies)?;
    let report = Report {
        spec: spec.clone(),
        rows,
        elapsed: start.elapsed(),
    };
    if let Some(path) = &spec.output_path {
        std::fs::write(path, report.csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, args) = cli.command.split();
    let outcome = (|| {
        let file = match &args.config {
            Some(path) => load_config(path)?,
            None => FileConfig::default(),
        };
        let (spec, check_mode, policies) = build_spec(experiment, args, &file)?;
        let report = execute(&spec, &policies)?;
        log::info!("{} done in {:.2?}", experiment, report.elapsed);
        if spec.output_path.is_some() {
            if !args.quiet {
                print!("{}", render_table(&report.rows));
            }
        } else {
            print!("{}", report.csv());
        }
        let mut failed = false;
        if check_mode {
            for c in check(&report) {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let tag = if c.informational { " (info)" } else { "" };
                eprintln!("{status} {}{tag}: {}", c.name, c.detail);
                failed |= !c.passed && !c.informational;
            }
        }
        anyhow::Ok(failed)
    })();
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig =
            toml::from_str("trials = 7\nseed = 3\nn = [64]\nr = [2, 4]").unwrap();
        let args = RunArgs {
            trials: Some(9),
            ..RunArgs::default()
        };
        let (spec, _, _) = build_spec(Experiment::Table1, &args, &file).unwrap();
        assert_eq!(spec.trials, 9);
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.sizes, vec![(64, 2), (64, 4)]);
    }

    #[test]
    fn rho_fills_missing_n_from_defaults() {
        let args = RunArgs {
            rho: vec![8],
            ..RunArgs::default()
        };
        let (spec, _, _) = build_spec(Experiment::Table2, &args, &FileConfig::default()).unwrap();
        assert_eq!(spec.sizes, vec![(64, 8), (128, 8), (256, 8)]);
    }

    #[test]
    fn policy_strings() {
        let p = parse_policy("signed>gaussian").unwrap();
        assert_eq!(p.kinds, vec![KindTag::SignedSparse, KindTag::Gaussian]);
        assert!(parse_policy("nope").is_err());
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        assert!(toml::from_str::<FileConfig>("trails = 3").is_err());
    }
}
