//! Command-line front end: fits, pmf and density grids, and samplers with
//! deterministic seeds and machine-readable output.
//!
//! Exit codes: 0 on success, 2 for argument or validation problems, 3 for
//! numerical, solver or propriety failures.

mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dpprior::kn::{kn_pmf_given_alpha, kn_pmf_mixed};
use dpprior::samplers::{
    sample_crp_kn, sample_jeffreys_ar_chain, sample_jeffreys_mh, sample_jeffreys_slice, Chain,
    FAlphaCache, FAlphaCacheConfig, MhProposal, RngStream,
};
use dpprior::ssd::{doro_fit, scal_approx, scal_fit, uniform_target, DoroFit, ScalFit};
use dpprior::ssi::{
    elicit, weights_grid, ElicitFamily, ElicitationProblem, WeightsGiven, WeightsMode,
};
use dpprior::{Error, PriorSpec, StirlingTable};

use output::{fmt_f64, metadata, write_csv, write_json, writer_for};

#[derive(Parser)]
#[command(name = "dpprior", version, about = "Priors for the Dirichlet process precision parameter")]
struct Cli {
    /// Seed for every stochastic operation (DPPRIOR_SEED overrides the
    /// default when the flag is absent).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KL-optimal Ga(a,b) against a target cluster-count pmf.
    Doro(DoroArgs),
    /// Ga(a,b) pinning p(K_n = 1) and an upper-tail probability.
    Scal(ScalArgs),
    /// Hyperparameters from partition probabilities on the precision.
    Elicit(ElicitArgs),
    /// Cluster-count pmf, conditional on alpha or mixed over a prior.
    Kn(KnArgs),
    /// Joint density grid of the two leading stick weights.
    WeightsGrid(WeightsGridArgs),
    /// Chains from the Jeffreys prior with diagnostics.
    Sample(SampleArgs),
    /// Simulated cluster-count frequencies against the exact pmf.
    Crp(CrpArgs),
}

#[derive(Args)]
struct DoroArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// `uniform` or a CSV file of `k,p` rows covering 1..=n.
    #[arg(long, default_value = "uniform")]
    target: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ScalArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Pinned p(K_n = 1).
    #[arg(long, default_value_t = 0.34)]
    p1: f64,
    /// Pinned p(K_n in {c..=n}).
    #[arg(long, default_value_t = 0.15)]
    tail: f64,
    /// Tail cutoff factor: c = ceil(c0 log n).
    #[arg(long, default_value_t = 2.0)]
    c0: f64,
    /// Emit the closed-form approximation instead of solving.
    #[arg(long)]
    approx: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ElicitArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Comma-separated thresholds, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    thresholds: Vec<f64>,
    /// Comma-separated cell probabilities (fractions like 1/3 accepted).
    #[arg(long, value_delimiter = ',', required = true)]
    probs: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gamma,
    Lognormal,
    Exponential,
    HalfCauchy,
}

impl From<FamilyArg> for ElicitFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gamma => ElicitFamily::Gamma,
            FamilyArg::Lognormal => ElicitFamily::Lognormal,
            FamilyArg::Exponential => ElicitFamily::Exponential,
            FamilyArg::HalfCauchy => ElicitFamily::HalfCauchy,
        }
    }
}

#[derive(Args)]
struct KnArgs {
    #[arg(long)]
    n: usize,
    /// Condition on a fixed precision value.
    #[arg(long, conflicts_with = "prior")]
    alpha: Option<f64>,
    /// Mix over a prior: `jeffreys`, `improper_reciprocal`, `improper_flat`
    /// or inline JSON like `{"family":"gamma","params":[1.0,1.0]}`.
    #[arg(long)]
    prior: Option<String>,
}

#[derive(Args)]
struct WeightsGridArgs {
    /// Size-biased or ranked weight order.
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, conflicts_with = "prior")]
    alpha: Option<f64>,
    /// Prior JSON, as for `kn --prior`.
    #[arg(long)]
    prior: Option<String>,
    /// Lattice resolution: densities at the midpoints of a grid x grid mesh.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// Simulation draws per node of the ranked-weight CDF cache.
    #[arg(long, default_value_t = 100_000)]
    cache_draws: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sb,
    Ranked,
}

#[derive(Args)]
struct SampleArgs {
    /// Target distribution; only the Jeffreys prior is available.
    #[arg(long)]
    target: TargetArg,
    /// Sample size indexing the Jeffreys prior.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Proposal for the Metropolis-Hastings method.
    #[arg(long, value_enum, default_value_t = ProposalArg::IndependenceJeffreys2)]
    proposal: ProposalArg,
    /// Random-walk proposal scale.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    draws: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Jeffreys,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ar,
    Slice,
    Mh,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum ProposalArg {
    IndependenceJeffreys2,
    RwHalfCauchy,
    RwNormal,
}

#[derive(Args)]
struct CrpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    draws: usize,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var("DPPRIOR_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    });
    if let Err(e) = run(cli, seed) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => 2,
        CliError::Io(_) => 3,
        CliError::Lib(inner) => match inner {
            Error::InvalidArgument(_) | Error::Domain(_) => 2,
            Error::UnsupportedPrior(_)
            | Error::InfeasibleTargets(_)
            | Error::NoConvergence { .. } => 3,
        },
    }
}

enum CliError {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<(), CliError>;

fn run(cli: Cli, seed: u64) -> CliResult {
    match cli.command {
        Command::Doro(args) => cmd_doro(args, seed, &cli.output),
        Command::Scal(args) => cmd_scal(args, seed, &cli.output),
        Command::Elicit(args) => cmd_elicit(args, seed, &cli.output),
        Command::Kn(args) => cmd_kn(args, seed, &cli.output),
        Command::WeightsGrid(args) => cmd_weights_grid(args, seed, &cli.output),
        Command::Sample(args) => cmd_sample(args, seed, &cli.output),
        Command::Crp(args) => cmd_crp(args, seed, &cli.output),
    }
}

fn parse_prior(spec: &str, n_hint: Option<usize>) -> Result<PriorSpec, CliError> {
    match spec {
        "jeffreys" => {
            let n = n_hint.ok_or_else(|| {
                CliError::Usage("--prior jeffreys needs --n to fix the sample size".to_string())
            })?;
            Ok(PriorSpec::jeffreys(n)?)
        }
        "improper_reciprocal" => Ok(PriorSpec::ImproperReciprocal),
        "improper_flat" => Ok(PriorSpec::ImproperFlat),
        s if s.trim_start().starts_with('{') => serde_json::from_str::<PriorSpec>(s)
            .map_err(|e| CliError::Usage(format!("could not parse prior JSON: {e}"))),
        other => Err(CliError::Usage(format!(
            "unknown prior '{other}' (expected a family shortcut or JSON)"
        ))),
    }
}

/// Accept plain decimals and `p/q` fractions.
fn parse_prob(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let p: f64 = num
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad fraction '{s}'")))?;
        let q: f64 = den
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad fraction '{s}'")))?;
        if q == 0.0 {
            return Err(CliError::Usage(format!("zero denominator in '{s}'")));
        }
        Ok(p / q)
    } else {
        s.parse()
            .map_err(|_| CliError::Usage(format!("bad probability '{s}'")))
    }
}

fn cmd_doro(args: DoroArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    for &n in &args.n {
        if n < 2 {
            return Err(CliError::Usage(format!(
                "doro: no fit is defined for n={n}; need n >= 2"
            )));
        }
    }
    let n_max = *args.n.iter().max().expect("clap requires at least one n");
    let table = StirlingTable::build(n_max)?;
    let mut fits: Vec<DoroFit> = Vec::new();
    for &n in &args.n {
        let target = match args.target.as_str() {
            "uniform" => uniform_target(n),
            path => read_target_file(path, n)?,
        };
        fits.push(doro_fit(n, &target, &table)?);
    }
    let config = json!({
        "command": "doro", "n": args.n, "target": args.target, "seed": seed,
    });
    let meta = metadata(config, Some(n_max));
    let mut out = writer_for(out_path)?;
    match args.format {
        Format::Csv => write_csv(
            &mut out,
            &meta,
            &["n", "a", "b", "kl"],
            fits.iter()
                .map(|f| vec![f.n.to_string(), fmt_f64(f.a), fmt_f64(f.b), fmt_f64(f.kl)]),
        )?,
        Format::Json => {
            let rows: Vec<_> = fits
                .iter()
                .map(|f| {
                    json!({
                        "n": f.n, "a": f.a, "b": f.b, "objective": f.kl,
                        "targets": f.target, "solver_iters": f.solver_iters,
                    })
                })
                .collect();
            write_json(&mut out, &json!({"meta": meta, "fits": rows}))?
        }
    }
    Ok(())
}

fn read_target_file(path: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let body = std::fs::read_to_string(path)?;
    let mut target = vec![f64::NAN; n];
    for line in body.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('k') {
            continue;
        }
        let (k_str, p_str) = line
            .split_once(',')
            .ok_or_else(|| CliError::Usage(format!("target file: bad line '{line}'")))?;
        let k: usize = k_str
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("target file: bad k '{k_str}'")))?;
        if k == 0 || k > n {
            return Err(CliError::Usage(format!(
                "target file: k={k} outside 1..={n}"
            )));
        }
        target[k - 1] = p_str
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("target file: bad p '{p_str}'")))?;
    }
    if target.iter().any(|p| p.is_nan()) {
        return Err(CliError::Usage(format!(
            "target file must cover every k in 1..={n}"
        )));
    }
    Ok(target)
}

fn cmd_scal(args: ScalArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    let n_max = *args.n.iter().max().expect("clap requires at least one n");
    for &n in &args.n {
        if n < 3 {
            return Err(CliError::Usage(format!("scal: need n >= 3, got {n}")));
        }
        let c = (args.c0 * (n as f64).ln()).ceil() as usize;
        if c < 2 || c > n {
            return Err(CliError::Usage(format!(
                "scal: cutoff c={c} is outside 2..={n} for n={n}"
            )));
        }
    }
    let config = json!({
        "command": "scal", "n": args.n, "p1": args.p1, "tail": args.tail,
        "c0": args.c0, "approx": args.approx, "seed": seed,
    });
    let mut out = writer_for(out_path)?;
    if args.approx {
        let meta = metadata(config, None);
        match args.format {
            Format::Csv => write_csv(
                &mut out,
                &meta,
                &["n", "a", "b"],
                args.n.iter().map(|&n| {
                    let (a, b) = scal_approx(n);
                    vec![n.to_string(), fmt_f64(a), fmt_f64(b)]
                }),
            )?,
            Format::Json => {
                let fits: Vec<_> = args
                    .n
                    .iter()
                    .map(|&n| {
                        let (a, b) = scal_approx(n);
                        json!({"n": n, "a": a, "b": b})
                    })
                    .collect();
                write_json(&mut out, &json!({"meta": meta, "fits": fits}))?
            }
        }
        return Ok(());
    }
    let table = StirlingTable::build(n_max)?;
    let fits: Vec<ScalFit> = args
        .n
        .iter()
        .map(|&n| scal_fit(n, args.p1, args.tail, args.c0, &table))
        .collect::<Result<_, _>>()?;
    let meta = metadata(config, Some(n_max));
    match args.format {
        Format::Csv => write_csv(
            &mut out,
            &meta,
            &["n", "a", "b", "c", "p1_achieved", "tail_achieved"],
            fits.iter().map(|f| {
                vec![
                    f.n.to_string(),
                    fmt_f64(f.a),
                    fmt_f64(f.b),
                    f.c.to_string(),
                    fmt_f64(f.p1_achieved),
                    fmt_f64(f.tail_achieved),
                ]
            }),
        )?,
        Format::Json => {
            let rows: Vec<_> = fits
                .iter()
                .map(|f| {
                    json!({
                        "n": f.n, "a": f.a, "b": f.b,
                        "objective": [f.p1_achieved, f.tail_achieved],
                        "targets": [f.p1_target, f.tail_target], "c": f.c,
                        "solver_iters": f.solver_iters,
                    })
                })
                .collect();
            write_json(&mut out, &json!({"meta": meta, "fits": rows}))?
        }
    }
    Ok(())
}

fn cmd_elicit(args: ElicitArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    let probs: Vec<f64> = args
        .probs
        .iter()
        .map(|s| parse_prob(s))
        .collect::<Result<_, _>>()?;
    let problem = ElicitationProblem::new(args.family.into(), args.thresholds.clone(), probs)?;
    let result = elicit(&problem)?;
    let config = json!({
        "command": "elicit", "family": problem.family,
        "thresholds": problem.thresholds, "probabilities": problem.probabilities,
        "seed": seed,
    });
    let meta = metadata(config, None);
    let mut out = writer_for(out_path)?;
    write_json(
        &mut out,
        &json!({
            "meta": meta,
            "family": result.family,
            "eta": result.eta,
            "residuals": result.residuals,
            "solver_iters": result.solver_iters,
        }),
    )?;
    Ok(())
}

fn cmd_kn(args: KnArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    if args.n == 0 {
        return Err(CliError::Usage("kn: need n >= 1".to_string()));
    }
    let table = StirlingTable::build(args.n)?;
    let (pmf, source) = match (args.alpha, &args.prior) {
        (Some(alpha), None) => (
            kn_pmf_given_alpha(args.n, alpha, &table)?,
            json!({"alpha": alpha}),
        ),
        (None, Some(spec)) => {
            let prior = parse_prior(spec, Some(args.n))?;
            let mixed = kn_pmf_mixed(args.n, &prior, &table)?;
            (
                mixed.pmf,
                json!({"prior": prior, "quadrature_deficit": mixed.deficit}),
            )
        }
        _ => {
            return Err(CliError::Usage(
                "kn: pass exactly one of --alpha and --prior".to_string(),
            ))
        }
    };
    let config = json!({
        "command": "kn", "n": args.n, "source": source, "seed": seed,
    });
    let meta = metadata(config, Some(args.n));
    let mut out = writer_for(out_path)?;
    write_csv(
        &mut out,
        &meta,
        &["k", "p"],
        (1..=args.n).map(|k| vec![k.to_string(), fmt_f64(pmf.prob(k))]),
    )?;
    Ok(())
}

fn cmd_weights_grid(args: WeightsGridArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    if args.grid < 2 {
        return Err(CliError::Usage("weights-grid: need --grid >= 2".to_string()));
    }
    let given = match (args.alpha, &args.prior) {
        (Some(alpha), None) => WeightsGiven::Alpha(alpha),
        (None, Some(spec)) => WeightsGiven::Prior(parse_prior(spec, None)?),
        _ => {
            return Err(CliError::Usage(
                "weights-grid: pass exactly one of --alpha and --prior".to_string(),
            ))
        }
    };
    let (mode, cache) = match args.mode {
        ModeArg::Sb => (WeightsMode::SizeBiased, None),
        ModeArg::Ranked => {
            let config = FAlphaCacheConfig {
                draws_per_node: args.cache_draws,
                ..FAlphaCacheConfig::default()
            };
            (
                WeightsMode::Ranked,
                Some(FAlphaCache::build(config, &RngStream::new(seed))?),
            )
        }
    };
    let grid = weights_grid(mode, &given, args.grid, cache.as_ref())?;
    let config = json!({
        "command": "weights-grid",
        "mode": match args.mode { ModeArg::Sb => "sb", ModeArg::Ranked => "ranked" },
        "given": match &given {
            WeightsGiven::Alpha(a) => json!({"alpha": a}),
            WeightsGiven::Prior(p) => json!({"prior": p}),
        },
        "grid": args.grid, "cache_draws": args.cache_draws, "seed": seed,
    });
    let meta = metadata(config, None);
    let mut out = writer_for(out_path)?;
    write_csv(
        &mut out,
        &meta,
        &["w1", "w2", "density"],
        grid.iter()
            .map(|p| vec![fmt_f64(p.w1), fmt_f64(p.w2), fmt_f64(p.density)]),
    )?;
    Ok(())
}

fn cmd_sample(args: SampleArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    let TargetArg::Jeffreys = args.target;
    if args.draws == 0 {
        return Err(CliError::Usage("sample: need --draws >= 1".to_string()));
    }
    let mut rng = RngStream::new(seed);
    let (chain, method_label): (Chain, String) = match args.method {
        MethodArg::Ar => (
            sample_jeffreys_ar_chain(args.n, args.draws, &mut rng)?,
            "ar".to_string(),
        ),
        MethodArg::Slice => (
            sample_jeffreys_slice(args.n, &mut rng, args.draws)?,
            "slice".to_string(),
        ),
        MethodArg::Mh => {
            let proposal = match args.proposal {
                ProposalArg::IndependenceJeffreys2 => MhProposal::IndependenceJeffreys2,
                ProposalArg::RwHalfCauchy => MhProposal::RwHalfCauchy { scale: args.scale },
                ProposalArg::RwNormal => MhProposal::RwNormal { scale: args.scale },
            };
            (
                sample_jeffreys_mh(args.n, &mut rng, proposal, args.draws)?,
                format!("mh:{:?}", args.proposal),
            )
        }
    };
    let config = json!({
        "command": "sample", "target": "jeffreys", "n": args.n,
        "method": method_label, "scale": args.scale, "draws": args.draws, "seed": seed,
    });
    let meta = metadata(config.clone(), None);
    let mut out = writer_for(out_path)?;
    write_csv(
        &mut out,
        &meta,
        &["iter", "alpha"],
        chain
            .draws
            .iter()
            .enumerate()
            .map(|(i, &a)| vec![i.to_string(), fmt_f64(a)]),
    )?;
    let diagnostics = json!({
        "meta": meta,
        "acceptance_rate": chain.acceptance_rate,
        "autocorr_time": chain.autocorr_time,
    });
    // diagnostics go to stdout when the chain went to a file, to stderr
    // otherwise, so the two outputs never interleave
    if out_path.is_some() {
        write_json(&mut std::io::stdout(), &diagnostics)?;
    } else {
        write_json(&mut std::io::stderr(), &diagnostics)?;
    }
    Ok(())
}

fn cmd_crp(args: CrpArgs, seed: u64, out_path: &Option<PathBuf>) -> CliResult {
    if args.n == 0 {
        return Err(CliError::Usage("crp: need n >= 1".to_string()));
    }
    if args.draws == 0 {
        return Err(CliError::Usage("crp: need --draws >= 1".to_string()));
    }
    let table = StirlingTable::build(args.n)?;
    let pmf = kn_pmf_given_alpha(args.n, args.alpha, &table)?;
    let mut rng = RngStream::new(seed);
    let mut counts = vec![0usize; args.n];
    for _ in 0..args.draws {
        counts[sample_crp_kn(args.n, args.alpha, &mut rng)? - 1] += 1;
    }
    let config = json!({
        "command": "crp", "n": args.n, "alpha": args.alpha,
        "draws": args.draws, "seed": seed,
    });
    let meta = metadata(config, Some(args.n));
    let mut out = writer_for(out_path)?;
    write_csv(
        &mut out,
        &meta,
        &["k", "count", "frequency", "exact_p", "std_error"],
        (1..=args.n).map(|k| {
            let freq = counts[k - 1] as f64 / args.draws as f64;
            let p = pmf.prob(k);
            let se = (p * (1.0 - p) / args.draws as f64).sqrt();
            vec![
                k.to_string(),
                counts[k - 1].to_string(),
                fmt_f64(freq),
                fmt_f64(p),
                fmt_f64(se),
            ]
        }),
    )?;
    Ok(())
}
