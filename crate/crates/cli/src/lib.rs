//! Command-line front end: argument types, run manifests and the command
//! runners behind the `tropref` binary.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tropical_refined::curve::{CombType, Degree};
use tropical_refined::enumeration::{enumerate_through, random_config, Config, EnumOptions, EnumerationReport, FoundCurve};
use tropical_refined::invariants::{broccoli_index, mikhalkin_mult, refined_mult_y, result_from, InvariantKind, InvariantResult};
use tropical_refined::laurent::{eval_y, YLaurent};
use tropical_refined::parallel::{with_threads, Parallelism};
use tropical_refined::rational::{big, big_to_string};
use tropical_refined::verification::{
    check_properties, fuzz_relations, invariance_harness, kontsevich_numbers, welschinger_total, InvarianceReport,
    PropertyReport, RelationsSummary,
};
use tropical_refined::{Error, ENGINE_VERSION};

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "tropref", version, about = "Refined counts of rational tropical plane curves")]
pub struct Cli {
    /// Seed for configuration sampling and fuzzing
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Also write the JSON result document here
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0: one per core, 1: sequential)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Print the JSON document instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Record wall-clock duration in the manifest
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Compute an invariant through a generic configuration
    Compute(ComputeArgs),
    /// Enumerate the curves through a configuration
    Enumerate(EnumerateArgs),
    #[command(subcommand)]
    Verify(VerifyCommand),
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyCommand {
    /// Fuzz the local wall-crossing relations
    Relations {
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 10)]
        max_entry: i64,
    },
    /// Compare the refined invariant across seeds
    Invariance {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
    },
    /// Check per-curve properties of the enumeration
    Properties {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCommand {
    /// Kontsevich numbers N_1..N_D
    Kontsevich {
        #[arg(long)]
        max_degree: u64,
    },
    /// Signed real count against the refined invariant at y = -1
    Welschinger {
        #[command(flatten)]
        problem: ProblemArgs,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProblemArgs {
    /// Degree d of the plane: d copies of (-1,0), (0,-1), (1,1)
    #[arg(long, conflicts_with = "degree_file", required_unless_present = "degree_file")]
    pub p2_degree: Option<usize>,
    /// JSON file {"ends": [[a,b],...], "fixed": [...]}
    #[arg(long)]
    pub degree_file: Option<PathBuf>,
    /// Fixed end labels (1-based); overrides the degree file
    #[arg(long, value_delimiter = ',')]
    pub fixed: Option<Vec<usize>>,
    /// Real markings; defaults to filling up the count
    #[arg(long, visible_alias = "r")]
    pub real: Option<usize>,
    /// Complex markings
    #[arg(long, visible_alias = "s", default_value_t = 0)]
    pub complex: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "rb")]
    pub invariant: Invariant,
    /// Use this configuration instead of sampling one
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub list_curves: bool,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    Rb,
    Desc,
    DescStar,
}

impl Invariant {
    fn kind(self) -> InvariantKind {
        match self {
            Invariant::Rb => InvariantKind::RefinedBroccoli,
            Invariant::Desc => InvariantKind::Descendant,
            Invariant::DescStar => InvariantKind::DescendantStar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: serde_json::Value,
    pub seeds: Vec<u64>,
    pub engine_version: String,
    /// sha256 of each input file, by path
    pub input_hashes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document<T> {
    pub manifest: RunManifest,
    pub result: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub key: String,
    pub automorphisms: u64,
    pub refined: YLaurent,
    pub mikhalkin: u64,
    pub broccoli_index: i64,
    pub curve: tropical_refined::curve::PlacedCurve,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateResult {
    pub degree: Degree,
    pub config: Config,
    pub degenerate: bool,
    pub orbits: usize,
    pub labeled_curves: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<CurveEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertiesResult {
    pub degree: Degree,
    pub r: usize,
    pub s: usize,
    pub seeds: Vec<u64>,
    pub report: PropertyReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KontsevichResult {
    pub numbers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WelschingerResult {
    pub degree: Degree,
    pub r: usize,
    pub seed: u64,
    pub welschinger: String,
    pub refined_at_minus_one: String,
    pub agree: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// inconsistent flags or inputs
    Usage(String),
    /// the computation failed
    Engine(Error),
    Io(String),
    /// a checked contract does not hold
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Engine(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidDegree(_) | Error::Parse(_) => CliError::Usage(e.to_string()),
            e => CliError::Engine(e),
        }
    }
}

/// Text for stdout, the JSON document, and a violation if a check failed.
/// The document is written even when the check fails.
pub struct Outcome {
    pub text: String,
    pub json: String,
    pub violation: Option<String>,
}

struct Ctx {
    hashes: BTreeMap<String, String>,
    par: Parallelism,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.hashes.insert(path.display().to_string(), format!("{:x}", Sha256::digest(&bytes)));
        Ok(bytes)
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    fn opts(&self) -> EnumOptions {
        EnumOptions { parallelism: self.par, ..EnumOptions::default() }
    }
}

/// Degree and marking counts, with the count identity checked.
fn problem(ctx: &mut Ctx, p: &ProblemArgs) -> Result<(Degree, usize, usize), CliError> {
    let mut degree = match (&p.p2_degree, &p.degree_file) {
        (Some(d), None) if *d > 0 => Degree::p2(*d),
        (Some(_), None) => return Err(CliError::Usage("--p2-degree must be positive".into())),
        (None, Some(path)) => ctx.read_json::<Degree>(path)?,
        _ => return Err(CliError::Usage("give exactly one of --p2-degree and --degree-file".into())),
    };
    if let Some(f) = &p.fixed {
        if f.iter().collect::<std::collections::BTreeSet<_>>().len() != f.len() {
            return Err(CliError::Usage("repeated label in --fixed".into()));
        }
        degree = degree.with_fixed(f)?;
    }
    degree.validate()?;
    let s = p.complex;
    let r = match p.real {
        Some(r) => r,
        None => (degree.n() - 1)
            .checked_sub(2 * s + degree.fixed.len())
            .ok_or_else(|| CliError::Usage("too many complex markings and fixed ends".into()))?,
    };
    degree.check_counts(r, s)?;
    Ok((degree, r, s))
}

fn config_for(ctx: &mut Ctx, degree: &Degree, r: usize, s: usize, path: &Option<PathBuf>, seed: u64) -> Result<(Config, EnumerationReport), CliError> {
    match path {
        Some(path) => {
            let cfg: Config = ctx.read_json(path)?;
            if (cfg.r, cfg.s) != (r, s) {
                return Err(CliError::Usage(format!("config has (r,s) = ({},{}) but flags give ({r},{s})", cfg.r, cfg.s)));
            }
            let report = enumerate_through(degree, &cfg, ctx.par)?;
            Ok((cfg, report))
        }
        None => Ok(random_config(degree, r, s, seed, &ctx.opts())?),
    }
}

fn plural(n: u64, word: &str) -> String {
    if n == 1 {
        word.to_string()
    } else {
        format!("{word}s")
    }
}

fn fixed_text(d: &Degree) -> String {
    let v: Vec<String> = d.fixed.iter().map(|j| j.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn endpoints(v: &YLaurent) -> Result<String, CliError> {
    let one = big_to_string(&eval_y(v, &big(1))?);
    let minus = big_to_string(&eval_y(v, &big(-1))?);
    Ok(format!("y=1: {one}  y=-1: {minus}"))
}

fn entry(degree: &Degree, c: &FoundCurve) -> Result<CurveEntry, CliError> {
    let comb: &CombType = &c.curve.comb;
    Ok(CurveEntry {
        key: comb.canonical_key(degree, true),
        automorphisms: c.automorphisms,
        refined: refined_mult_y(comb, degree)?,
        mikhalkin: mikhalkin_mult(comb),
        broccoli_index: broccoli_index(comb, degree),
        curve: c.curve.clone(),
    })
}

fn to_json<T: Serialize>(manifest: RunManifest, result: T) -> String {
    let mut s = serde_json::to_string_pretty(&Document { manifest, result }).expect("serializable");
    s.push('\n');
    s
}

/// Runs one command. Thread pool setup happens here.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let par = if cli.threads == 1 { Parallelism::Sequential } else { Parallelism::Parallel };
    let mut ctx = Ctx { hashes: BTreeMap::new(), par };
    let (name, seeds, out) = with_threads(cli.threads, || dispatch(cli, &mut ctx))?;
    let manifest = RunManifest {
        command: name.to_string(),
        flags: serde_json::to_value(cli).expect("serializable"),
        seeds,
        engine_version: ENGINE_VERSION.to_string(),
        input_hashes: ctx.hashes,
        duration_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    };
    Ok(Outcome { text: out.text, json: (out.render)(manifest), violation: out.violation })
}

/// Command output before the manifest is known.
struct Partial {
    text: String,
    render: Box<dyn FnOnce(RunManifest) -> String + Send>,
    violation: Option<String>,
}

fn partial<T: Serialize + Send + 'static>(text: String, result: T, violation: Option<String>) -> Partial {
    Partial { text, render: Box::new(move |m| to_json(m, result)), violation }
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<(&'static str, Vec<u64>, Partial), CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Compute(a) => {
            let (degree, r, s) = problem(ctx, &a.problem)?;
            let (_, report) = config_for(ctx, &degree, r, s, &a.config, seed)?;
            if report.degenerate {
                return Err(CliError::Engine(Error::Degenerate("configuration is not in general position".into())));
            }
            let seeds = if a.config.is_some() { vec![] } else { vec![seed] };
            let res: InvariantResult = result_from(a.invariant.kind(), &degree, r, s, seeds.clone(), &report, ctx.par)?;
            let mut text = format!("{}\n", res.value);
            let _ = writeln!(
                text,
                "  {}  |Δ| = {}  (r,s) = ({r},{s})  F = {}  {} labeled {}, |G| = {}",
                serde_json::to_value(res.invariant).expect("serializable").as_str().unwrap_or_default(),
                degree.n(),
                fixed_text(&degree),
                res.curves,
                plural(res.curves, "curve"),
                res.g_order
            );
            let _ = writeln!(text, "  {}", endpoints(&res.value)?);
            Ok(("compute", seeds, partial(text, res, None)))
        }
        Command::Enumerate(a) => {
            let (degree, r, s) = problem(ctx, &a.problem)?;
            let (config, report) = config_for(ctx, &degree, r, s, &a.config, seed)?;
            let labeled = report.labeled_count(&degree);
            let n = report.curves.len();
            let mut text = format!("{n} {} ({labeled} labeled){}\n", plural(n as u64, "curve"), if report.degenerate {
                ", configuration is degenerate"
            } else {
                ""
            });
            let curves = if a.list_curves {
                let list = report.curves.iter().map(|c| entry(&degree, c)).collect::<Result<Vec<_>, _>>()?;
                for (i, e) in list.iter().enumerate() {
                    let _ = writeln!(
                        text,
                        "[{}] aut {}  m = {}  mult {}  i_B {}  {}",
                        i + 1,
                        e.automorphisms,
                        e.refined,
                        e.mikhalkin,
                        e.broccoli_index,
                        e.key
                    );
                }
                Some(list)
            } else {
                None
            };
            let seeds = if a.config.is_some() { vec![] } else { vec![seed] };
            let res = EnumerateResult {
                degree,
                config,
                degenerate: report.degenerate,
                orbits: report.curves.len(),
                labeled_curves: labeled,
                curves,
            };
            Ok(("enumerate", seeds, partial(text, res, None)))
        }
        Command::Verify(VerifyCommand::Relations { samples, max_entry }) => {
            if *max_entry < 1 {
                return Err(CliError::Usage("--max-entry must be at least 1".into()));
            }
            let sum: RelationsSummary = fuzz_relations(*samples, *max_entry, seed, ctx.par);
            let mut text = format!("{samples} samples, {} violations, {} skipped-degenerate\n", sum.violations(), sum.skipped());
            for (name, rep) in [("A", &sum.a), ("B", &sum.b), ("C", &sum.c)] {
                let _ = writeln!(
                    text,
                    "  {name}: {} checked, {} skipped, {} violations",
                    rep.checked,
                    rep.skipped_degenerate,
                    rep.violations.len()
                );
                for v in rep.violations.iter().take(5) {
                    let _ = writeln!(text, "    {v}");
                }
            }
            let violation = (sum.violations() > 0).then(|| format!("{} relation violations", sum.violations()));
            Ok(("verify relations", vec![seed], partial(text, sum, violation)))
        }
        Command::Verify(VerifyCommand::Invariance { problem: p, seeds }) => {
            let (degree, r, s) = problem(ctx, p)?;
            let rep: InvarianceReport = invariance_harness(&degree, r, s, seeds, &ctx.opts())?;
            let mut text = String::new();
            for run in &rep.runs {
                let _ = writeln!(text, "seed {}: {}  ({} {})", run.seed, run.value, run.orbits, plural(run.orbits as u64, "orbit"));
            }
            let violation = match (&rep.common, rep.mismatch) {
                (Some(v), _) => {
                    let _ = writeln!(text, "invariant across {} seeds: {v}", rep.runs.len());
                    None
                }
                (None, Some((a, b))) => {
                    let _ = writeln!(text, "MISMATCH between seeds {a} and {b}");
                    Some(format!("seeds {a} and {b} disagree"))
                }
                (None, None) => Some("no common value".into()),
            };
            Ok(("verify invariance", seeds.clone(), partial(text, rep, violation)))
        }
        Command::Verify(VerifyCommand::Properties { problem: p, seeds }) => {
            let (degree, r, s) = problem(ctx, p)?;
            let mut total = PropertyReport::default();
            for &sd in seeds {
                let (_, report) = random_config(&degree, r, s, sd, &ctx.opts())?;
                total.merge(check_properties(&degree, &report));
            }
            let mut text = format!(
                "{} curves, {} old, {} surgeries, {} failures\n",
                total.curves,
                total.old,
                total.surgeries,
                total.failures.len()
            );
            for f in total.failures.iter().take(10) {
                let _ = writeln!(text, "  {f}");
            }
            let violation = (!total.failures.is_empty()).then(|| format!("{} property failures", total.failures.len()));
            let res = PropertiesResult { degree, r, s, seeds: seeds.clone(), report: total };
            Ok(("verify properties", seeds.clone(), partial(text, res, violation)))
        }
        Command::Oracle(OracleCommand::Kontsevich { max_degree }) => {
            if *max_degree == 0 {
                return Err(CliError::Usage("--max-degree must be positive".into()));
            }
            let numbers: Vec<String> = kontsevich_numbers(*max_degree).iter().map(|n| n.to_string()).collect();
            let text = format!("{}\n", numbers.join(","));
            Ok(("oracle kontsevich", vec![], partial(text, KontsevichResult { numbers }, None)))
        }
        Command::Oracle(OracleCommand::Welschinger { problem: p }) => {
            let (degree, r, s) = problem(ctx, p)?;
            if s != 0 {
                return Err(CliError::Usage("the signed real count needs --complex 0".into()));
            }
            let (cfg, report) = random_config(&degree, r, s, seed, &ctx.opts())?;
            let w = welschinger_total(&degree, &cfg, &report)?;
            let res = result_from(InvariantKind::RefinedBroccoli, &degree, r, s, vec![seed], &report, ctx.par)?;
            let at = eval_y(&res.value, &big(-1))?;
            let agree = at == w;
            let text = format!(
                "welschinger {}  refined at y=-1 {}  {}\n",
                big_to_string(&w),
                big_to_string(&at),
                if agree { "agree" } else { "DIFFER" }
            );
            let violation = (!agree).then(|| "signed real count differs from the refined value at y=-1".to_string());
            let res = WelschingerResult {
                degree,
                r,
                seed,
                welschinger: big_to_string(&w),
                refined_at_minus_one: big_to_string(&at),
                agree,
            };
            Ok(("oracle welschinger", vec![seed], partial(text, res, violation)))
        }
    }
}
