use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qp_spectral::construct::{
    canonical_spectrum, canonical_tiling_complement, verify_spectral_pair, verify_tiling_pair, LatticeJson,
    LatticePeriodicSet,
};
use qp_spectral::cyclic_group::{classify, enumerate_tij, DigitSet, Verdict};
use qp_spectral::measures::{verify_truncation_spectrum, SingularMeasureSpec, SpecJson};
use qp_spectral::padic::Prime;
use qp_spectral::set_model::{CompactOpenSet, PTree};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

mod suites;

/// Spectral sets and tiles in Q_p.
#[derive(Parser, Debug)]
#[command(name = "qpspec", version)]
struct Cli {
    /// Worker threads for classify, enumerate and oracle (0 = all cores).
    #[arg(long, global = true, env = "QPSPEC_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a compact open set and report its structure, spectrum and complement.
    Analyze(InputArgs),
    /// Decide spectrality, tiling and homogeneity of digit sets in Z/p^γZ.
    Classify(ClassifyArgs),
    /// Stream verdicts for T_{I,J} sets, or for every nonempty subset with --all.
    Enumerate(EnumerateArgs),
    /// Check a candidate spectrum or tiling complement exactly.
    Verify(VerifyArgs),
    /// Print the p-adic tree of a set.
    Tree(TreeArgs),
    /// Truncate a singular measure and optionally certify its partial spectrum.
    Measure(MeasureArgs),
    /// Run a seeded randomized cross-check suite.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Set in the form `p=2; {1 + 2^3 Z, 4 + 2^3 Z}`.
    input: Option<String>,
    /// Read the set from a file instead.
    #[arg(long, conflicts_with = "input")]
    file: Option<PathBuf>,
}

impl InputArgs {
    fn read(&self) -> Result<String, Failure> {
        match (&self.input, &self.file) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {}", path.display(), e))),
            (None, None) => read_stdin(),
        }
    }

    fn set(&self) -> Result<CompactOpenSet, Failure> {
        Ok(CompactOpenSet::parse(&self.read()?)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LineFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    gamma: u32,
    /// Comma-separated residues; repeat for several sets, or pass one set per line on stdin.
    #[arg(long)]
    set: Vec<String>,
    /// Also run the brute-force tile and spectrum searches.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = LineFormat::Json)]
    format: LineFormat,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    gamma: u32,
    /// Branching levels, comma-separated (may be empty).
    #[arg(long = "I", conflicts_with = "all")]
    i_levels: Option<String>,
    /// Every nonempty subset of Z/p^γZ, in increasing bitmask order.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    oracle: bool,
    /// Stop after this many sets.
    #[arg(long)]
    limit: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `{"level": g, "finite": ["0", "1/2"]}`, or `canonical`.
    #[arg(long, required_unless_present = "complement")]
    spectrum: Option<String>,
    /// `{"level": g, "finite": ["0", "2"]}`, or `canonical`.
    #[arg(long)]
    complement: Option<String>,
    /// Print the full certificate even when the check passes.
    #[arg(long)]
    certificate: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = TreeFormat::Dot)]
    format: TreeFormat,
    /// Draw the tree down to this level instead of the minimal one.
    #[arg(long)]
    depth: Option<u32>,
    /// Raw digit set in Z/p^γZ (with --p and --gamma) instead of a set expression.
    #[arg(long, requires_all = ["p", "gamma"])]
    set: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    gamma: Option<u32>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// `{"p": 2, "preperiod": "", "period": "101", "choice": "repeat"}`.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    spec: Option<String>,
    #[arg(long, value_parser = ["example1", "example2"])]
    preset: Option<String>,
    #[arg(long)]
    gamma: u32,
    /// Certify the partial spectrum of level γ₀ against the truncation.
    #[arg(long)]
    verify: Option<u32>,
    #[arg(long)]
    certificate: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    suite: suites::Suite,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prime for the classify suite.
    #[arg(long, default_value_t = 3)]
    p: u64,
    /// Level for the classify suite.
    #[arg(long, default_value_t = 3)]
    gamma: u32,
}

#[derive(Debug)]
struct Failure {
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { message: message.into() }
    }
}

impl From<qp_spectral::Error> for Failure {
    fn from(e: qp_spectral::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("invalid JSON at line {}, column {}: {}", e.line(), e.column(), e))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn read_stdin() -> Result<String, Failure> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

fn emit<T: Serialize, W: Write + ?Sized>(out: &mut W, value: &T) -> Result<(), Failure> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Ok(Prime::new(p)?)
}

fn analyze(args: &InputArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let omega = args.set()?;
    let mut value = serde_json::to_value(omega.analyze())?;
    let spectrum = canonical_spectrum(&omega).ok().map(|l| l.to_json());
    let complement = canonical_tiling_complement(&omega).ok().map(|t| t.to_json());
    value["spectrum"] = serde_json::to_value(spectrum)?;
    value["complement"] = serde_json::to_value(complement)?;
    emit(out, &value)?;
    Ok(ExitCode::SUCCESS)
}

fn verdict_line(v: &Verdict, format: LineFormat, out: &mut impl Write) -> Result<(), Failure> {
    match format {
        LineFormat::Json => emit(out, v),
        LineFormat::Text => {
            writeln!(
                out,
                "{{{}}} spectral={} tile={} homogeneous={} consistent={}",
                v.set, v.spectral, v.tile, v.homogeneous, v.consistent
            )?;
            Ok(())
        }
    }
}

fn classify_cmd(args: &ClassifyArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let p = prime(args.p)?;
    let texts: Vec<String> = if args.set.is_empty() {
        read_stdin()?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
    } else {
        args.set.clone()
    };
    if texts.is_empty() {
        return Err(Failure::usage("no digit sets given"));
    }
    let sets = texts.iter().map(|t| DigitSet::parse(p, args.gamma, t)).collect::<Result<Vec<_>, _>>()?;
    let verdicts: Vec<Verdict> = sets.par_iter().map(|c| classify(c, args.oracle)).collect();
    let mut ok = true;
    for v in &verdicts {
        verdict_line(v, args.format, out)?;
        if !v.consistent {
            eprintln!("characterizations disagree on {{{}}}", v.set);
        }
        ok &= v.spectral && v.consistent;
    }
    Ok(status(ok))
}

const BATCH: usize = 4096;

fn enumerate_cmd(args: &EnumerateArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let p = prime(args.p)?;
    let limit = args.limit.unwrap_or(u64::MAX);
    let mut consistent = true;
    let mut flush = |batch: &mut Vec<DigitSet>, out: &mut dyn Write| -> Result<(), Failure> {
        let verdicts: Vec<Verdict> = batch.par_iter().map(|c| classify(c, args.oracle)).collect();
        for v in &verdicts {
            consistent &= v.consistent;
            emit(&mut *out, v)?;
        }
        batch.clear();
        Ok(())
    };
    let mut batch = Vec::with_capacity(BATCH);
    if args.all {
        let n = p.checked_pow(args.gamma).filter(|&n| n <= 30).ok_or_else(|| {
            Failure::usage("--all needs p^γ ≤ 30")
        })?;
        for mask in (1u64..1 << n).take(limit as usize) {
            batch.push(DigitSet::new(p, args.gamma, (0..n).filter(|i| mask >> i & 1 == 1))?);
            if batch.len() == BATCH {
                flush(&mut batch, out)?;
            }
        }
    } else {
        let levels = parse_levels(args.i_levels.as_deref().unwrap_or(""))?;
        if levels.iter().any(|&i| i >= args.gamma) {
            return Err(Failure::usage("branching levels must be below γ"));
        }
        for c in enumerate_tij(p, args.gamma, &levels)?.take(limit as usize) {
            batch.push(c);
            if batch.len() == BATCH {
                flush(&mut batch, out)?;
            }
        }
    }
    flush(&mut batch, out)?;
    if !consistent {
        eprintln!("characterizations disagree on at least one set");
    }
    Ok(status(consistent))
}

fn parse_levels(text: &str) -> Result<std::collections::BTreeSet<u32>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| Failure::usage(format!("bad level `{}`", s))))
        .collect()
}

fn lattice_arg(
    omega: &CompactOpenSet,
    text: &str,
    canonical: fn(&CompactOpenSet) -> qp_spectral::Result<LatticePeriodicSet>,
) -> Result<LatticePeriodicSet, Failure> {
    if text.trim() == "canonical" {
        return Ok(canonical(omega)?);
    }
    let json: LatticeJson = serde_json::from_str(text)?;
    Ok(LatticePeriodicSet::from_json(omega.prime(), &json)?)
}

fn verify_cmd(args: &VerifyArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let omega = args.input.set()?;
    let mut report = serde_json::Map::new();
    let mut ok = true;
    if let Some(text) = &args.spectrum {
        let lambda = lattice_arg(&omega, text, canonical_spectrum)?;
        let cert = verify_spectral_pair(&omega, &lambda)?;
        ok &= cert.verified;
        report.insert("spectral".into(), certificate_value(cert.verified, &cert, args.certificate)?);
    }
    if let Some(text) = &args.complement {
        let t = lattice_arg(&omega, text, canonical_tiling_complement)?;
        let cert = verify_tiling_pair(&omega, &t)?;
        ok &= cert.verified;
        report.insert("tiling".into(), certificate_value(cert.verified, &cert, args.certificate)?);
    }
    report.insert("verified".into(), Value::Bool(ok));
    emit(out, &report)?;
    Ok(status(ok))
}

fn certificate_value<T: Serialize>(verified: bool, cert: &T, full: bool) -> Result<Value, Failure> {
    if full || !verified {
        Ok(serde_json::to_value(cert)?)
    } else {
        Ok(json!({ "verified": verified }))
    }
}

fn refine(p: Prime, gamma: u32, digits: &[u64], depth: u32) -> Result<Vec<u64>, Failure> {
    if depth < gamma {
        let m = p.pow(depth);
        let mut out: Vec<u64> = digits.iter().map(|d| d % m).collect();
        out.sort_unstable();
        out.dedup();
        return Ok(out);
    }
    let step = p.pow(gamma);
    let lifts = p
        .checked_pow(depth - gamma)
        .filter(|&k| k.saturating_mul(digits.len() as u64) <= 1 << 22)
        .ok_or_else(|| Failure::usage("tree depth too large"))?;
    let mut out: Vec<u64> = digits.iter().flat_map(|&d| (0..lifts).map(move |t| d + t * step)).collect();
    out.sort_unstable();
    Ok(out)
}

fn tree_cmd(args: &TreeArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let tree = if let Some(text) = &args.set {
        let (p, gamma) = (prime(args.p.unwrap_or(0))?, args.gamma.unwrap_or(0));
        let c = DigitSet::parse(p, gamma, text)?;
        let depth = args.depth.unwrap_or(gamma);
        PTree::from_digits(p, depth, &refine(p, gamma, &c.elements(), depth)?)
    } else {
        let omega = args.input.set()?;
        let (p, gamma) = (omega.prime(), omega.gamma());
        let depth = args.depth.unwrap_or(gamma);
        PTree::from_digits(p, depth, &refine(p, gamma, omega.digits(), depth)?)
    };
    match args.format {
        TreeFormat::Dot => out.write_all(tree.to_dot().as_bytes())?,
        TreeFormat::Json => {
            let levels: Vec<&[u64]> = (0..=tree.gamma()).map(|n| tree.level(n)).collect();
            emit(
                out,
                &json!({
                    "p": tree.prime().get(),
                    "gamma": tree.gamma(),
                    "level_sizes": tree.level_sizes(),
                    "levels": levels,
                    "homogeneity": tree.homogeneity(),
                }),
            )?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn measure_cmd(args: &MeasureArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let spec = match (&args.spec, &args.preset) {
        (Some(text), _) => SingularMeasureSpec::from_json(&serde_json::from_str::<SpecJson>(text)?)?,
        (None, Some(name)) => SingularMeasureSpec::preset(name).ok_or_else(|| Failure::usage("unknown preset"))?,
        (None, None) => return Err(Failure::usage("give --spec or --preset")),
    };
    let (c, omega) = spec.truncate(args.gamma)?;
    let mut report = json!({
        "spec": spec.to_json(),
        "gamma": args.gamma,
        "I": spec.i_levels(args.gamma),
        "size": c.len(),
        "digits": c,
        "analysis": omega.analyze(),
    });
    let mut ok = true;
    if let Some(gamma0) = args.verify {
        let cert = verify_truncation_spectrum(&spec, gamma0, args.gamma)?;
        ok = cert.verified;
        report["certificate"] = certificate_value(cert.verified, &cert, args.certificate)?;
        report["verified"] = Value::Bool(ok);
    }
    emit(out, &report)?;
    Ok(status(ok))
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Classify(a) => classify_cmd(a, out),
        Command::Enumerate(a) => enumerate_cmd(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Tree(a) => tree_cmd(a, out),
        Command::Measure(a) => measure_cmd(a, out),
        Command::Oracle(a) => {
            let report = suites::run(a.suite, a.count, a.seed, prime(a.p)?, a.gamma)?;
            emit(out, &report)?;
            Ok(status(report.disagreements == 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match run(&cli, &mut out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(2)
        }
    };
    if out.flush().is_err() {
        return ExitCode::from(2);
    }
    code
}
