//! Command-line front end. Exit codes: 0 certified, 1 verification failure or error,
//! 2 inconclusive.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::catalog;
use crate::cert::Certificate;
use crate::certify::{
    classify, lift_gram, refute_search, sos_search, verify_membership, ChartHint, ClassifyConfig, Lift, RefuteOutcome,
    RefuteStrategy, SearchBudget, SosConfig, SosOutcome,
};
use crate::forms::{parse_rat, Dims, Exponent, Form, Rat};
use crate::gram::{kernel_relations, Basis, SymMatrix};
use crate::reproduce::{mu_line, parse_case, reproduce};
use crate::variety::filtration_relations;

pub const SEED_ENV: &str = "CONE_CERT_SEED";

#[derive(Parser, Debug)]
#[command(name = "cone-cert", version, about = "Exact membership and refutation certificates for the Gram-matrix cone filtration")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Search seed; CONE_CERT_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Point budget for the sampled refutation strategies.
    #[arg(long, global = true, default_value_t = 2000)]
    pub points: usize,
    /// default, catalog, oracle, signed-units or random.
    #[arg(long, global = true, default_value = "default")]
    pub strategy: String,
    /// Directory for certificate JSON files.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Largest k accepted by `reproduce`.
    #[arg(long, global = true, default_value_t = 20)]
    pub max_k: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Basis, filtration relations, kernel dimension and expected chain for (n, d).
    Inspect { n: usize, d: u32 },
    /// Brackets the smallest level containing a form.
    Classify(FormArg),
    /// Membership certificate at a level.
    Certify {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        level: usize,
        /// Gram matrix JSON file; defaults to the catalog matrix or an SOS search.
        #[arg(long)]
        gram: Option<PathBuf>,
    },
    /// Refutation certificate at a level.
    Refute {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        level: usize,
        /// JSON list of chart points, each a list of "p/q" strings.
        #[arg(long)]
        points_file: Option<PathBuf>,
    },
    /// Certifies every strict inclusion of a case given as `nvars,degree`, e.g. `4,4`.
    Reproduce { case: String },
    /// Substitutes a form into more variables or multiplies it by x0^2, carrying its Gram matrix.
    Embed {
        #[command(flatten)]
        form: FormArg,
        /// Comma-separated increasing variable indices.
        #[arg(long, value_delimiter = ',')]
        injection: Option<Vec<usize>>,
        #[arg(long)]
        nvars: Option<usize>,
        /// Multiply by x<VAR>^2 instead of substituting.
        #[arg(long)]
        square_of: Option<usize>,
    },
    /// Re-checks a certificate file with exact arithmetic.
    VerifyCert { file: PathBuf },
}

#[derive(Args, Debug, Clone)]
pub struct FormArg {
    /// Form text such as "x0^4 + x1^4".
    pub form: Option<String>,
    /// Catalog entry name instead of a form.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Variable count when the highest variable is absent from the text.
    #[arg(long)]
    pub vars: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Inconclusive(String),
    Error(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn seed(global: &Global) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Error(format!("{SEED_ENV}={v} is not an integer"))),
        Err(_) => Ok(global.seed),
    }
}

fn budget(global: &Global) -> SearchBudget {
    SearchBudget { signed_cap: global.points, random_points: global.points, ..SearchBudget::default() }
}

fn strategy(global: &Global, explicit: Option<Vec<Vec<Rat>>>) -> Result<RefuteStrategy, Failure> {
    match explicit {
        Some(p) => Ok(RefuteStrategy::Explicit(p)),
        None => global.strategy.parse().map_err(Failure::Error),
    }
}

fn load_form(arg: &FormArg) -> Result<(Form, Option<SymMatrix>, String), Failure> {
    match (&arg.form, &arg.catalog) {
        (_, Some(name)) => {
            let e = catalog::get(name)?;
            Ok((e.form, e.gram, name.clone()))
        }
        (Some(text), None) => {
            let f = match arg.vars {
                Some(v) => Form::parse_with_vars(text, v)?,
                None => Form::parse(text)?,
            };
            let gram = catalog::find_by_form(&f).and_then(|e| e.gram);
            Ok((f, gram, "form".to_string()))
        }
        (None, None) => Err(Failure::Error("give a form or --catalog NAME".into())),
    }
}

fn emit(global: &Global, cert: &Certificate, stem: &str) -> Result<Option<PathBuf>, Failure> {
    cert.verify()?;
    let Some(dir) = &global.json_out else { return Ok(None) };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.{}.{}.json", cert.kind(), cert.level()));
    cert.write(&path)?;
    Ok(Some(path))
}

fn shown(p: Option<PathBuf>) -> String {
    p.map(|p| format!(" -> {}", p.display())).unwrap_or_default()
}

fn inspect(n: usize, d: u32) -> CmdResult {
    let dims = Dims::new(n, d)?;
    let basis = Basis::new(dims);
    println!("dims {dims}: {} variables, degree {}, k = {}, top level {}", dims.nvars(), 2 * d, dims.k(), dims.top_level());
    println!("basis (descending lex):");
    for (i, e) in basis.exponents().iter().enumerate() {
        println!("  m_{i} = X^{e}");
    }
    println!("filtration relations:");
    for r in filtration_relations(dims) {
        println!("  {r}");
    }
    println!("kernel dimension: {}", kernel_relations(dims).len());
    match catalog::expected_chain(dims) {
        Ok(c) => {
            println!("expected chain: {c}");
            if c.equal_through > 0 {
                println!("C_0 = … = C_{}: asserted by theory, not machine-proved", c.equal_through);
            }
            print!("{}", mu_line(dims, c.strict.len()).replace("certified", "expected"));
        }
        Err(_) => {
            println!("expected chain: none known for this case");
            print!("{}", mu_line(dims, 0).replace("0 certified strict inclusions", "strict inclusions not determined"));
        }
    }
    Ok(())
}

fn cmd_classify(global: &Global, arg: &FormArg) -> CmdResult {
    let (f, _, stem) = load_form(arg)?;
    let cfg = ClassifyConfig { seed: seed(global)?, budget: budget(global), sos: SosConfig::default(), strategy: Some(strategy(global, None)?) };
    let c = classify(&f, &cfg)?;
    c.replay()?;
    println!("{f}: {} (Gram matrix from {})", c.interval(), c.gram_source);
    if let Some(m) = &c.membership {
        println!("member of C_{}{}", m.level, shown(emit(global, &Certificate::Membership(m.clone()), &stem)?));
    }
    if let Some(r) = &c.refutation {
        println!("not in C_{}{}", r.level, shown(emit(global, &Certificate::Refutation(r.clone()), &stem)?));
    }
    if c.is_exact() {
        Ok(())
    } else {
        Err(Failure::Inconclusive(format!("interval {} not closed", c.interval())))
    }
}

fn read_gram(path: &Path) -> Result<SymMatrix, Failure> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn cmd_certify(global: &Global, arg: &FormArg, level: usize, gram: &Option<PathBuf>) -> CmdResult {
    let (f, stored, stem) = load_form(arg)?;
    let a = match (gram, stored) {
        (Some(p), _) => read_gram(p)?,
        (None, Some(g)) => g,
        (None, None) => match sos_search(&f, &SosConfig::default())? {
            SosOutcome::Found(c) => c.gram,
            SosOutcome::NotFound { residual } => {
                return Err(Failure::Inconclusive(format!("no Gram matrix supplied and SOS search stalled (residual {residual:.2e})")))
            }
        },
    };
    match verify_membership(&f, level, &a, ChartHint::Auto) {
        Ok(m) => {
            println!("{f} ∈ C_{level}{}", shown(emit(global, &Certificate::Membership(m), &stem)?));
            Ok(())
        }
        Err(e) => Err(Failure::Inconclusive(format!("membership not certified at level {level}: {e}"))),
    }
}

fn read_points(path: &Path) -> Result<Vec<Vec<Rat>>, Failure> {
    let raw: Vec<Vec<String>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    raw.iter()
        .map(|p| p.iter().map(|s| parse_rat(s).ok_or_else(|| Failure::Error(format!("bad rational {s:?}")))).collect())
        .collect()
}

fn cmd_refute(global: &Global, arg: &FormArg, level: usize, points_file: &Option<PathBuf>) -> CmdResult {
    let (f, _, stem) = load_form(arg)?;
    let explicit = points_file.as_deref().map(read_points).transpose()?;
    let strat = strategy(global, explicit)?;
    match refute_search(&f, level, &strat, seed(global)?, &budget(global))? {
        RefuteOutcome::Refuted(c) => {
            let n = c.points.len();
            let path = emit(global, &Certificate::Refutation(c), &stem)?;
            println!("{f} ∉ C_{level} ({n} points){}", shown(path));
            Ok(())
        }
        RefuteOutcome::Inconclusive { points_tried, .. } => {
            Err(Failure::Inconclusive(format!("no refutation at level {level} after {points_tried} points")))
        }
    }
}

fn cmd_reproduce(global: &Global, case: &str) -> CmdResult {
    let (nvars, degree) = parse_case(case)?;
    let seed = seed(global)?;
    let mut emitted: Result<(), Failure> = Ok(());
    let report = reproduce(nvars, degree, seed, &budget(global), global.max_k, |r| {
        log::info!("{} done in {:.1}s", r.step.label, r.elapsed.as_secs_f64());
        let stem = format!("{}x{}.L{}", nvars, degree, r.step.target);
        for cert in r.membership.iter().cloned().map(Certificate::Membership).chain(r.refutation.iter().cloned().map(Certificate::Refutation)) {
            if let Err(e) = emit(global, &cert, &stem) {
                if emitted.is_ok() {
                    emitted = Err(e);
                }
            }
        }
    })?;
    print!("{}", report.render());
    emitted?;
    if report.all_certified() {
        println!("all {} strict inclusions certified", report.chain.strict.len());
        Ok(())
    } else {
        Err(Failure::Inconclusive("some strict inclusions are not certified".into()))
    }
}

fn cmd_embed(arg: &FormArg, injection: &Option<Vec<usize>>, nvars: Option<usize>, square_of: Option<usize>) -> CmdResult {
    let (f, gram, _) = load_form(arg)?;
    let lift = match (injection, square_of) {
        (Some(inj), None) => Lift::Substitute { injection: inj.clone(), nvars: nvars.unwrap_or(f.nvars() + 1) },
        (None, Some(v)) => {
            if v >= f.nvars() {
                return Err(Failure::Error(format!("variable x{v} out of range")));
            }
            Lift::Multiply(Exponent::unit(f.nvars(), v, 1))
        }
        _ => return Err(Failure::Error("give exactly one of --injection or --square-of".into())),
    };
    println!("{}", lift.describe());
    match gram {
        Some(a) => {
            let (g, b) = lift_gram(&f, &a, &lift)?;
            println!("form: {g}");
            println!("gram: {}", serde_json::to_string(&b)?);
        }
        None => println!("form: {}", lift.apply(&f)?),
    }
    Ok(())
}

fn cmd_verify(file: &Path) -> CmdResult {
    let cert = Certificate::read(file)?;
    cert.verify()?;
    println!("{} certificate for {} at level {}: valid", cert.kind(), cert.form(), cert.level());
    Ok(())
}

pub fn run(cli: Cli) -> ExitCode {
    let g = &cli.global;
    let out = match &cli.command {
        Command::Inspect { n, d } => inspect(*n, *d),
        Command::Classify(arg) => cmd_classify(g, arg),
        Command::Certify { form, level, gram } => cmd_certify(g, form, *level, gram),
        Command::Refute { form, level, points_file } => cmd_refute(g, form, *level, points_file),
        Command::Reproduce { case } => cmd_reproduce(g, case),
        Command::Embed { form, injection, nvars, square_of } => cmd_embed(form, injection, *nvars, *square_of),
        Command::VerifyCert { file } => cmd_verify(file),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Inconclusive(m)) => {
            eprintln!("inconclusive: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Error(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(Cli::parse())
}
