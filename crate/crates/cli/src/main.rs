//! Command line driver. Subcommands map one to one onto the library
//! entry points; every run prints a result file on stdout and a short
//! human summary on stderr. Exit codes: 0 when the verdict holds or
//! the artifact was built, 1 when a check fails (the result carries
//! the witness), 2 when an equivalence run finds a disagreement, 64
//! for usage errors, 65 for unparsable input.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ftap_core::arbitrage::{check_na, evaluate_strategy, Component, NaReport};
use ftap_core::bidask::{backward_modify, BidAskProcess};
use ftap_core::cone_market::{
    backward_modify_cones, check_efficient_friction, check_na2, check_nas, ConeMarket, EfReport,
    Na2Report, NasReport,
};
use ftap_core::cps::{construct_cps, verify_cps, verify_iiprime};
use ftap_core::gen::gen_instance;
use ftap_core::harness::{params_for, run_equivalence};
use ftap_core::io::{self, CertificateSpec, Instance, InstanceFile, Mode, ResultFile};
use ftap_core::rational::{format_rational, Rational};
use ftap_core::scps::{construct_scps, verify_scps};
use ftap_core::tree::{NodeId, ScenarioTree, TreeMeasure};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_FAILS: u8 = 1;
const EXIT_DISAGREEMENT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser)]
#[command(
    name = "ftap",
    version,
    about = "Arbitrage checkers and price system builders on finite scenario trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-sure arbitrage check for a two-asset quote instance
    CheckNa(InArgs),
    /// Backward interval tightening; flags nodes with crossed intervals
    Modify(InArgs),
    /// Build a consistent price system for a reference model
    BuildCps(BuildArgs),
    /// Re-verify a consistent price system certificate
    VerifyCps(VerifyArgs),
    /// No-arbitrage of the second kind, node by node
    CheckNa2(InArgs),
    /// Efficient friction: full dimensional dual cones off polar branches
    CheckEf(InArgs),
    /// Strict no-arbitrage via per-horizon programs
    CheckNas(InArgs),
    /// Backward cone tightening; prints the modified cones and duals
    ModifyCones(InArgs),
    /// Build a strictly consistent price system for a reference model
    BuildScps(BuildArgs),
    /// Re-verify a strictly consistent price system certificate
    VerifyScps(VerifyArgs),
    /// Generate a seeded random instance
    Gen(GenArgs),
    /// Checker-builder equivalence run over a seed range
    Equiv(EquivArgs),
}

#[derive(Args)]
struct InArgs {
    /// Instance file
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Also write the output file here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    io: InArgs,
    /// Reference model: kernel indices per interior node ("0" or
    /// "0,1,0") or a measure file; defaults to the instance's measure
    /// or the first listed kernels
    #[arg(long, value_name = "INDEX|FILE")]
    measure: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    io: InArgs,
    /// Result file holding the certificate to check
    #[arg(long, value_name = "FILE")]
    cert: PathBuf,
    #[arg(long, value_name = "INDEX|FILE")]
    measure: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Bidask2d)]
    mode: ModeArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivArgs {
    /// First seed of the range
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds to run
    #[arg(long, default_value_t = 200)]
    count: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Bidask2d)]
    mode: ModeArg,
    /// Fault-injection hook: tamper with every certificate after the
    /// build; a healthy run must then report disagreements
    #[arg(long)]
    corrupt_builder: bool,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bidask2d,
    Cones,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bidask2d => Mode::Bidask2d,
            ModeArg::Cones => Mode::Cones,
        }
    }
}

struct CliError {
    message: String,
    code: u8,
}

fn parse_err(message: impl Into<String>) -> CliError {
    CliError { message: message.into(), code: EXIT_PARSE }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        parse_err(e.to_string())
    }
}

/// What a handler produced, before timing and serialization.
struct Outcome {
    verdict: &'static str,
    diagnostics: Vec<String>,
    certificate: Option<CertificateSpec>,
    exit: u8,
}

impl Outcome {
    fn verdict(verdict: &'static str, exit: u8) -> Self {
        Outcome { verdict, diagnostics: Vec::new(), certificate: None, exit }
    }

    fn diagnose(mut self, lines: Vec<String>) -> Self {
        self.diagnostics = lines;
        self
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Command::Gen(args) = &cli.command {
        return match cmd_gen(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}", e.message);
                ExitCode::from(e.code)
            }
        };
    }
    let started = Instant::now();
    match dispatch(&cli.command) {
        Ok((result, exit)) => {
            let result = ResultFile { elapsed_ms: started.elapsed().as_millis() as u64, ..result };
            let text = result.to_json();
            print!("{text}");
            if let Err(e) = write_out(out_path(&cli.command), &text) {
                eprintln!("error: {}", e.message);
                return ExitCode::from(e.code);
            }
            eprintln!("{}: {}", result.command, result.verdict);
            for line in &result.diagnostics {
                eprintln!("  {line}");
            }
            ExitCode::from(exit)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    let args = match command {
        Command::CheckNa(a)
        | Command::Modify(a)
        | Command::CheckNa2(a)
        | Command::CheckEf(a)
        | Command::CheckNas(a)
        | Command::ModifyCones(a) => a,
        Command::BuildCps(a) | Command::BuildScps(a) => &a.io,
        Command::VerifyCps(a) | Command::VerifyScps(a) => &a.io,
        Command::Gen(a) => return a.out.as_deref(),
        Command::Equiv(a) => return a.out.as_deref(),
    };
    args.out.as_deref()
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    if let Some(path) = path {
        std::fs::write(path, text)
            .map_err(|e| parse_err(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn dispatch(command: &Command) -> Result<(ResultFile, u8), CliError> {
    let (name, outcome): (&str, Outcome) = match command {
        Command::CheckNa(args) => ("check-na", cmd_check_na(args)?),
        Command::Modify(args) => ("modify", cmd_modify(args)?),
        Command::BuildCps(args) => ("build-cps", cmd_build_cps(args)?),
        Command::VerifyCps(args) => ("verify-cps", cmd_verify_cps(args)?),
        Command::CheckNa2(args) => ("check-na2", cmd_check_na2(args)?),
        Command::CheckEf(args) => ("check-ef", cmd_check_ef(args)?),
        Command::CheckNas(args) => ("check-nas", cmd_check_nas(args)?),
        Command::ModifyCones(args) => ("modify-cones", cmd_modify_cones(args)?),
        Command::BuildScps(args) => ("build-scps", cmd_build_scps(args)?),
        Command::VerifyScps(args) => ("verify-scps", cmd_verify_scps(args)?),
        Command::Gen(_) => unreachable!("handled before dispatch"),
        Command::Equiv(args) => ("equiv", cmd_equiv(args)?),
    };
    let result = ResultFile {
        command: name.into(),
        verdict: outcome.verdict.into(),
        diagnostics: outcome.diagnostics,
        certificate: outcome.certificate,
        elapsed_ms: 0,
    };
    Ok((result, outcome.exit))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| parse_err(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = read_file(path)?;
    Ok(InstanceFile::from_json(&text)?.build()?)
}

fn bidask_view(instance: &Instance) -> Result<(&ScenarioTree, &BidAskProcess), CliError> {
    match instance {
        Instance::Bidask { tree, market, .. } => Ok((tree, market)),
        Instance::Cones { .. } => {
            Err(parse_err("this command needs a two-asset quote instance (mode bidask2d)"))
        }
    }
}

/// Cone commands accept both modes; quotes are turned into their
/// solvency cones on the fly.
fn cone_view(instance: &Instance) -> (ScenarioTree, ConeMarket) {
    match instance {
        Instance::Cones { tree, market, .. } => (tree.clone(), market.clone()),
        Instance::Bidask { tree, market, .. } => {
            (tree.clone(), ConeMarket::from_bidask(tree, market))
        }
    }
}

fn resolve_measure(
    tree: &ScenarioTree,
    embedded: Option<&TreeMeasure>,
    flag: Option<&str>,
) -> Result<TreeMeasure, CliError> {
    let measure = match flag {
        None => match embedded {
            Some(m) => m.clone(),
            None => TreeMeasure::from_selector(tree, |_| 0)
                .map_err(|e| parse_err(format!("measure: {e}")))?,
        },
        Some(spec) if !spec.is_empty() && spec.chars().all(|c| c.is_ascii_digit() || c == ',') => {
            let picks: Vec<usize> = spec
                .split(',')
                .map(|part| {
                    part.parse().map_err(|_| parse_err(format!("measure: bad index {part:?}")))
                })
                .collect::<Result<_, _>>()?;
            let interior = tree.interior_nodes();
            let picks = if picks.len() == 1 {
                vec![picks[0]; interior.len()]
            } else if picks.len() == interior.len() {
                picks
            } else {
                return Err(parse_err(format!(
                    "measure: {} indices for {} interior nodes",
                    picks.len(),
                    interior.len()
                )));
            };
            let index: BTreeMap<&NodeId, usize> = interior.iter().zip(picks).collect();
            TreeMeasure::from_selector(tree, |n| index[n])
                .map_err(|e| parse_err(format!("measure: {e}")))?
        }
        Some(path) => io::parse_measure_json(&read_file(Path::new(path))?)?,
    };
    tree.validate_measure(&measure).map_err(|e| parse_err(format!("measure: {e}")))?;
    Ok(measure)
}

fn fmt_vec(x: &[Rational]) -> String {
    let parts: Vec<String> = x.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

fn fmt_gens(gens: &[Vec<Rational>]) -> String {
    let parts: Vec<String> = gens.iter().map(|g| fmt_vec(g)).collect();
    parts.join(" ")
}

fn cmd_check_na(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = bidask_view(&instance)?;
    match check_na(tree, market) {
        NaReport::Holds => Ok(Outcome::verdict("holds", 0)),
        NaReport::Fails(witness) => {
            let component = match witness.component {
                Component::Money => "money",
                Component::Stock => "stock",
            };
            let mut diag = vec![format!("strictly positive {component} claim at {}", witness.leaf)];
            let claims = evaluate_strategy(tree, market, &witness.strategy)
                .expect("witness strategies evaluate on their own tree");
            for (leaf, (money, stock)) in claims {
                diag.push(format!(
                    "claim at {leaf}: ({}, {})",
                    format_rational(&money),
                    format_rational(&stock)
                ));
            }
            for (node, trade) in witness.strategy.trades() {
                diag.push(format!(
                    "trade at {node}: buy {} sell {} money {}",
                    format_rational(&trade.buy),
                    format_rational(&trade.sell),
                    format_rational(&trade.money)
                ));
            }
            Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(diag))
        }
    }
}

fn cmd_modify(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = bidask_view(&instance)?;
    let modified = backward_modify(tree, market);
    let mut diag = Vec::new();
    for node in tree.all_nodes() {
        diag.push(format!(
            "interval at {node}: [{}, {}]",
            format_rational(modified.lower(&node)),
            format_rational(modified.upper(&node))
        ));
    }
    for node in modified.violations() {
        diag.push(format!(
            "crossed at {node}: lower {} exceeds upper {}",
            format_rational(modified.lower(node)),
            format_rational(modified.upper(node))
        ));
    }
    if modified.is_viable() {
        Ok(Outcome::verdict("holds", 0).diagnose(diag))
    } else {
        Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(diag))
    }
}

fn cmd_build_cps(args: &BuildArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.io.input)?;
    let (tree, market) = bidask_view(&instance)?;
    let p = resolve_measure(tree, instance.measure(), args.measure.as_deref())?;
    match construct_cps(tree, market, &p) {
        Ok(cert) => Ok(Outcome {
            verdict: "built",
            diagnostics: Vec::new(),
            certificate: Some(CertificateSpec::from_cps(&cert)),
            exit: 0,
        }),
        Err(e) => Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(vec![e.to_string()])),
    }
}

fn load_certificate(path: &Path) -> Result<CertificateSpec, CliError> {
    let result = ResultFile::from_json(&read_file(path)?)?;
    result
        .certificate
        .ok_or_else(|| parse_err(format!("{}: no certificate in result file", path.display())))
}

fn cmd_verify_cps(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.io.input)?;
    let (tree, market) = bidask_view(&instance)?;
    let p = resolve_measure(tree, instance.measure(), args.measure.as_deref())?;
    let cert = load_certificate(&args.cert)?.to_cps()?;
    let mut violations = verify_cps(tree, market, &cert, &p).violations().to_vec();
    if violations.is_empty() {
        let modified = backward_modify(tree, market);
        violations.extend_from_slice(verify_iiprime(tree, &modified, &cert).violations());
    }
    if violations.is_empty() {
        Ok(Outcome::verdict("verified", 0))
    } else {
        Ok(Outcome::verdict("violated", EXIT_FAILS).diagnose(violations))
    }
}

fn cmd_check_na2(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = cone_view(&instance);
    match check_na2(&tree, market.cones()) {
        Na2Report::Holds => Ok(Outcome::verdict("holds", 0)),
        Na2Report::Fails(witnesses) => {
            let diag = witnesses
                .iter()
                .map(|w| format!("escape at {}: ray {}", w.node, fmt_vec(&w.ray)))
                .collect();
            Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(diag))
        }
    }
}

fn cmd_check_ef(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = cone_view(&instance);
    match check_efficient_friction(&tree, market.cones()) {
        EfReport::Holds => Ok(Outcome::verdict("holds", 0)),
        EfReport::Fails(nodes) => {
            let diag = nodes.iter().map(|n| format!("flat dual cone at {n}")).collect();
            Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(diag))
        }
    }
}

fn cmd_check_nas(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = cone_view(&instance);
    match check_nas(&tree, &market) {
        NasReport::Holds => Ok(Outcome::verdict("holds", 0)),
        NasReport::Fails(witness) => {
            let mut diag = vec![format!(
                "solvent but nontrivial position at horizon {}, node {}",
                witness.time, witness.node
            )];
            for (node, transfer) in &witness.transfers {
                diag.push(format!("transfer at {node}: {}", fmt_vec(transfer)));
            }
            for (node, position) in &witness.positions {
                diag.push(format!("position at {node}: {}", fmt_vec(position)));
            }
            Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(diag))
        }
    }
}

fn cmd_modify_cones(args: &InArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.input)?;
    let (tree, market) = cone_view(&instance);
    let modified = backward_modify_cones(&tree, &market);
    let mut diag = Vec::new();
    for node in tree.all_nodes() {
        diag.push(format!(
            "cone at {node}: generators {}",
            fmt_gens(modified.cone(&node).generators())
        ));
        diag.push(format!(
            "dual at {node}: generators {}",
            fmt_gens(modified.dual(&node).generators())
        ));
    }
    Ok(Outcome::verdict("built", 0).diagnose(diag))
}

fn cmd_build_scps(args: &BuildArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.io.input)?;
    let (tree, market) = cone_view(&instance);
    let p = resolve_measure(&tree, instance.measure(), args.measure.as_deref())?;
    match construct_scps(&tree, &market, &p) {
        Ok(cert) => Ok(Outcome {
            verdict: "built",
            diagnostics: Vec::new(),
            certificate: Some(CertificateSpec::from_scps(&cert)),
            exit: 0,
        }),
        Err(e) => Ok(Outcome::verdict("fails", EXIT_FAILS).diagnose(vec![e.to_string()])),
    }
}

fn cmd_verify_scps(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let instance = load_instance(&args.io.input)?;
    let (tree, market) = cone_view(&instance);
    let p = resolve_measure(&tree, instance.measure(), args.measure.as_deref())?;
    let cert = load_certificate(&args.cert)?.to_scps()?;
    let violations = verify_scps(&tree, &market, &cert, &p).violations().to_vec();
    if violations.is_empty() {
        Ok(Outcome::verdict("verified", 0))
    } else {
        Ok(Outcome::verdict("violated", EXIT_FAILS).diagnose(violations))
    }
}

/// Unlike the checks, gen writes an instance file, not a result file,
/// so it bypasses the shared result plumbing.
fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let mode = Mode::from(args.mode);
    let instance = gen_instance(args.seed, &params_for(mode, args.seed));
    let text = instance.to_file().to_json();
    print!("{text}");
    write_out(args.out.as_deref(), &text)?;
    eprintln!("gen: seed {} ({})", args.seed, mode_name(mode));
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Bidask2d => "bidask2d",
        Mode::Cones => "cones",
    }
}

fn cmd_equiv(args: &EquivArgs) -> Result<Outcome, CliError> {
    let mode = Mode::from(args.mode);
    let summary = run_equivalence(args.seed..args.seed + args.count, mode, args.corrupt_builder);
    let mut diag = vec![format!(
        "mode {}: {} of {} seeds agree",
        mode_name(mode),
        summary.agreements,
        summary.total()
    )];
    for d in &summary.disagreements {
        diag.push(format!("seed {}: {}", d.seed, d.detail));
    }
    if let Some(first) = summary.disagreements.first() {
        eprintln!("offending instance (seed {}):", first.seed);
        eprint!("{}", first.instance.to_json());
    }
    if summary.ok() {
        Ok(Outcome::verdict("holds", 0).diagnose(diag))
    } else {
        Ok(Outcome::verdict("violated", EXIT_DISAGREEMENT).diagnose(diag))
    }
}
