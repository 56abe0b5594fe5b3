//! `hdoubling`: field data, operators on q-expansions, and doubling runs.
//!
//! Exit codes: 0 everything verified, 1 a job failed for another reason,
//! 2 precision exhausted, 3 an invariant was falsified, 64 usage error.
//! A grid of several jobs reports failures inline and exits nonzero only
//! when some job falsifies an invariant.

mod parse;

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hilbert_doubling::doubling::DEFAULT_MAX_PRECISION;
use hilbert_doubling::operators::{apply_diamond, apply_t, apply_vp_direct, apply_vp_recursive, hasse_lift};
use hilbert_doubling::{
    constant_form, eisenstein, run_experiment, verify_eigenform, AdelicQExpansion, Character, ConstantMode,
    DoublingReport, EigenCheck, Error, ExperimentConfig, GfContext, IdealHnf, NarrowClassGroup, QuadraticField,
    RootChoice,
};

use parse::{parse_form, parse_ops, FormSpec, IdealSpec, OpSpec};

const EXIT_OTHER: u8 = 1;
const EXIT_PRECISION: u8 = 2;
const EXIT_FALSIFIED: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "hdoubling", version, about = "Mod-p q-expansions of Hilbert modular forms over real quadratic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Discriminant, fundamental unit, narrow class group and characters.
    FieldInfo {
        #[arg(long = "D")]
        d: i64,
        /// Also tabulate character values in F_{p^m}.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Build a form and apply a chain of operators to it.
    Apply(ApplyArgs),
    /// Run doubling experiments from flags, a config file or a grid.
    Doubling(DoublingArgs),
}

#[derive(Args)]
struct FormArgs {
    #[arg(long = "D")]
    d: i64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long = "B", default_value_t = 500)]
    precision: u64,
    #[arg(long, default_value_t = 0)]
    phi1: usize,
    #[arg(long, default_value_t = 0)]
    phi2: usize,
    #[arg(long, default_value = "zero")]
    constant_mode: ConstantMode,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    form: FormArgs,
    /// Form spec, e.g. "eisenstein phi1=0 phi2=1 mode=zero", "constant phi=1 eps=0", "random seed=3".
    #[arg(long)]
    form_spec: Option<String>,
    /// Operators applied left to right, e.g. "VP P=[11,6,1]; T q=[11,5,1] k=11".
    #[arg(long)]
    op: String,
    /// Seed for random forms.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print at most this many coefficients.
    #[arg(long)]
    max_coeffs: Option<usize>,
}

#[derive(Args)]
struct DoublingArgs {
    #[arg(long = "D")]
    d: Option<i64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long = "B", default_value_t = 500)]
    precision: u64,
    #[arg(long, default_value_t = 0)]
    phi1: usize,
    #[arg(long, default_value_t = 0)]
    phi2: usize,
    #[arg(long, default_value = "zero")]
    constant_mode: ConstantMode,
    #[arg(long, default_value = "first")]
    roots: RootChoice,
    #[arg(long, default_value_t = DEFAULT_MAX_PRECISION)]
    max_b: u64,
    /// Accepted for interface symmetry; doubling runs are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON config, a JSON array of configs, or JSON lines (one per job).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_falsified() {
        EXIT_FALSIFIED
    } else if e.is_precision() {
        EXIT_PRECISION
    } else {
        match e.root() {
            Error::InvalidDiscriminant(_) | Error::NotPrime(_) | Error::Parse { .. } => EXIT_USAGE,
            _ => EXIT_OTHER,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => match std::fs::File::create(path) {
            Ok(f) => Box::new(io::BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::from(EXIT_OTHER);
            }
        },
        None => Box::new(io::BufWriter::new(io::stdout())),
    };
    let result = match cli.command {
        Command::FieldInfo { d, p, m } => field_info(d, p, m).map(|v| vec![v]),
        Command::Apply(args) => apply(&args).map(|v| vec![v]),
        Command::Doubling(args) => return doubling(&args, &mut out),
    };
    match result {
        Ok(lines) => {
            for line in lines {
                if writeln!(out, "{line}").and_then(|_| out.flush()).is_err() {
                    return ExitCode::from(EXIT_OTHER);
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn gf_json(gf: &GfContext) -> Value {
    json!({ "p": gf.characteristic(), "m": gf.degree(), "modulus": gf.modulus() })
}

fn field_info(d: i64, p: Option<u64>, m: Option<u32>) -> Result<Value, Failure> {
    let field = QuadraticField::new(d)?;
    let group = NarrowClassGroup::of_field(field.clone())?;
    let (t, n) = field.omega_poly();
    let u = field.fundamental_unit();
    let e = group.exponent();
    let chars: Vec<Value> = (0..group.order())
        .map(|i| {
            // exponent labels enumerate the character group in the same
            // order as NarrowClassGroup::characters
            let mut label = vec![0u64; group.basis().len()];
            let mut rest = i as u64;
            for k in (0..label.len()).rev() {
                let ord = group.basis()[k].1;
                label[k] = rest % ord;
                rest /= ord;
            }
            let exps: Vec<u64> = (0..group.order())
                .map(|cls| {
                    group
                        .coords(cls)
                        .iter()
                        .zip(&label)
                        .zip(group.basis())
                        .map(|((&k, &j), &(_, ord))| k * j * (e / ord))
                        .sum::<u64>()
                        % e
                })
                .collect();
            json!({ "index": i, "label": label, "zeta_exponents": exps })
        })
        .collect();
    let mut v = json!({
        "D": d,
        "discriminant": field.discriminant(),
        "omega": format!("{:?}", field.omega_kind()),
        "omega_minimal_polynomial": { "t": t, "n": n },
        "fundamental_unit": { "x": u.x().to_string(), "y": u.y().to_string(), "text": field.display(u) },
        "unit_norm": field.unit_norm(),
        "narrow_class_number": group.order(),
        "structure": group.structure(),
        "exponent": e,
        "representatives": group.reps(),
        "characters": chars,
    });
    if let Some(p) = p {
        let m = match m {
            Some(m) => m,
            None => group.minimal_degree(p)?,
        };
        let gf = GfContext::new(p, m)?;
        let cs = group.characters(&gf)?;
        v["coefficient_field"] = gf_json(&gf);
        v["character_values"] =
            cs.iter().map(|c| c.values().iter().map(|x| gf.coeffs(*x)).collect::<Vec<_>>()).collect();
    }
    Ok(v)
}

struct Context {
    field: QuadraticField,
    gf: Arc<GfContext>,
    chars: Vec<Character>,
}

fn context(d: i64, p: u64, m: Option<u32>) -> Result<Context, Failure> {
    if !hilbert_doubling::arith::is_prime(p) {
        return Err(Failure::usage(format!("p = {p} is not prime")));
    }
    let field = QuadraticField::new(d)?;
    let group = NarrowClassGroup::of_field(field.clone())?;
    let m = match m {
        Some(m) => m,
        None => group.minimal_degree(p)?,
    };
    let gf = GfContext::new(p, m)?;
    let chars = group.characters(&gf)?;
    Ok(Context { field, gf, chars })
}

fn character(ctx: &Context, i: usize) -> Result<&Character, Failure> {
    ctx.chars
        .get(i)
        .ok_or_else(|| Failure::usage(format!("character index {i} out of range (0..{})", ctx.chars.len())))
}

fn resolve_ideal(field: &QuadraticField, spec: &IdealSpec) -> Result<IdealHnf, Failure> {
    match *spec {
        IdealSpec::Hnf(a, b, c) => Ok(field.ideal_from_hnf(a, b, c)?),
        IdealSpec::Rational(n) if n > 0 => Ok(field.rational_ideal(n)),
        IdealSpec::Rational(n) => Err(Failure::usage(format!("({n}) is not a nonzero integral ideal"))),
    }
}

fn build_form(args: &ApplyArgs, ctx: &Context) -> Result<AdelicQExpansion, Failure> {
    let fa = &args.form;
    let spec = match &args.form_spec {
        Some(s) => parse_form(s).map_err(|e| Failure { code: EXIT_USAGE, message: format!("--form-spec: {e}") })?,
        None => FormSpec::Eisenstein { phi1: None, phi2: None, mode: None },
    };
    Ok(match spec {
        FormSpec::Eisenstein { phi1, phi2, mode } => eisenstein(
            character(ctx, phi1.unwrap_or(fa.phi1))?,
            character(ctx, phi2.unwrap_or(fa.phi2))?,
            fa.precision,
            mode.unwrap_or(fa.constant_mode),
        )?,
        FormSpec::Constant { phi, eps } => constant_form(character(ctx, phi)?, character(ctx, eps)?, fa.precision)?,
        FormSpec::Random { eps, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(args.seed));
            let ideals = ctx.field.enumerate_ideals(fa.precision);
            AdelicQExpansion::random(&mut rng, 1, character(ctx, eps)?, fa.precision, &ideals)
        }
    })
}

fn qexp_json(f: &AdelicQExpansion, max_coeffs: Option<usize>) -> Value {
    let mut j = serde_json::to_value(f.to_json()).expect("expansion serializes");
    if let Some(limit) = max_coeffs {
        if let Some(arr) = j["coeffs"].as_array_mut() {
            arr.truncate(limit);
        }
    }
    j
}

fn apply(args: &ApplyArgs) -> Result<Value, Failure> {
    let ctx = context(args.form.d, args.form.p, args.form.m)?;
    let ops = parse_ops(&args.op).map_err(|e| Failure { code: EXIT_USAGE, message: format!("--op: {e}") })?;
    let input = build_form(args, &ctx)?;
    let mut f = input.clone();
    let mut steps = Vec::new();
    for op in &ops {
        let before = f.precision();
        let (name, next) = match op {
            OpSpec::T { q, k } => {
                let ideal = resolve_ideal(&ctx.field, q)?;
                let fact = ctx.field.factor_ideal(&ideal);
                let [(prime, 1)] = fact.as_slice() else {
                    return Err(Failure::usage(format!("T needs a prime ideal, {ideal} is not prime")));
                };
                (format!("T {ideal}"), apply_t(&f, prime, *k)?)
            }
            OpSpec::Diamond { q } => {
                let ideal = resolve_ideal(&ctx.field, q)?;
                (format!("diamond {ideal}"), apply_diamond(&f, &ideal)?)
            }
            OpSpec::VpDirect { big_p } => {
                let ideal = resolve_ideal(&ctx.field, big_p)?;
                (format!("VP {ideal}"), apply_vp_direct(&f, &ideal)?)
            }
            OpSpec::VpRecursive { big_p } => {
                let ideal = resolve_ideal(&ctx.field, big_p)?;
                (format!("VPrec {ideal}"), apply_vp_recursive(&f, &ideal)?)
            }
            OpSpec::Hasse => ("hasse".to_string(), hasse_lift(&f)),
        };
        steps.push(json!({
            "op": name,
            "precision_in": before,
            "precision_out": next.precision(),
            "weight_out": next.weight(),
        }));
        f = next;
    }
    // report proportionality to the input when the chain is a single T
    let eigenvalue = match ops.as_slice() {
        [OpSpec::T { q, k: None }] => {
            let ideal = resolve_ideal(&ctx.field, q)?;
            let prime = ctx.field.factor_ideal(&ideal)[0].0;
            match verify_eigenform(&input, &[prime]) {
                Ok(EigenCheck::Eigen(t)) => json!(ctx.gf.coeffs(t[0].1)),
                _ => Value::Null,
            }
        }
        _ => Value::Null,
    };
    Ok(json!({
        "coefficient_field": gf_json(&ctx.gf),
        "steps": steps,
        "eigenvalue": eigenvalue,
        "result": qexp_json(&f, args.max_coeffs),
    }))
}

fn parse_configs(path: &PathBuf) -> Result<Vec<ExperimentConfig>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    let bad = |line: usize, e: serde_json::Error| {
        Failure::usage(format!("{}:{}:{}: {e}", path.display(), line + e.line(), e.column()))
    };
    if trimmed.starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| bad(0, e));
    }
    // one object per line, or a single (possibly multi-line) object
    if let Ok(one) = serde_json::from_str::<ExperimentConfig>(&text) {
        return Ok(vec![one]);
    }
    let mut out = Vec::new();
    for (i, line) in io::Cursor::new(&text).lines().enumerate() {
        let line = line.expect("in-memory read");
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| bad(i, e))?);
    }
    Ok(out)
}

fn job_line(index: usize, config: &ExperimentConfig, result: &Result<Vec<DoublingReport>, Error>) -> (String, u8) {
    let cfg = serde_json::to_value(config).expect("config serializes");
    let (value, code) = match result {
        Ok(reports) => (json!({ "job": index, "status": "ok", "config": cfg, "reports": reports }), 0),
        Err(e) => {
            let code = exit_code(e);
            let status = match code {
                EXIT_FALSIFIED => "falsified",
                EXIT_PRECISION => "precision_exhausted",
                _ => "error",
            };
            (
                json!({ "job": index, "status": status, "config": cfg, "stage": e.stage(), "witness": e.root().to_string() }),
                code,
            )
        }
    };
    (value.to_string(), code)
}

fn doubling(args: &DoublingArgs, out: &mut Box<dyn Write>) -> ExitCode {
    let grid = args.config.is_some();
    let configs = match &args.config {
        Some(path) => match parse_configs(path) {
            Ok(c) => c,
            Err(f) => {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
        },
        None => {
            let (Some(d), Some(p)) = (args.d, args.p) else {
                eprintln!("error: give --D and --p, or --config");
                return ExitCode::from(EXIT_USAGE);
            };
            if !hilbert_doubling::arith::is_prime(p) {
                eprintln!("error: p = {p} is not prime");
                return ExitCode::from(EXIT_USAGE);
            }
            vec![ExperimentConfig {
                d,
                p,
                m: args.m,
                precision: args.precision,
                phi1: args.phi1,
                phi2: args.phi2,
                constant_mode: args.constant_mode,
                roots: args.roots,
                max_precision: args.max_b,
            }]
        }
    };
    let jobs = args.jobs.max(1).min(configs.len().max(1));
    let results: Mutex<Vec<Option<Result<Vec<DoublingReport>, Error>>>> = Mutex::new(vec![None; configs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(config) = configs.get(i) else { break };
                let r = if hilbert_doubling::arith::is_prime(config.p) {
                    run_experiment(config)
                } else {
                    Err(Error::NotPrime(config.p).in_stage("config"))
                };
                results.lock().expect("no poisoned jobs")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("no poisoned jobs");
    let mut worst = 0u8;
    for (i, (config, r)) in configs.iter().zip(results).enumerate() {
        let r = r.expect("every job ran");
        let (line, code) = job_line(i, config, &r);
        worst = match (worst, code) {
            (EXIT_FALSIFIED, _) | (_, EXIT_FALSIFIED) => EXIT_FALSIFIED,
            (EXIT_PRECISION, _) | (_, EXIT_PRECISION) => EXIT_PRECISION,
            (a, b) => a.max(b),
        };
        if writeln!(out, "{line}").is_err() {
            return ExitCode::from(EXIT_OTHER);
        }
    }
    if out.flush().is_err() {
        return ExitCode::from(EXIT_OTHER);
    }
    if worst == EXIT_USAGE {
        worst = EXIT_OTHER;
    }
    // a grid reports per-job failures inline and only fails on falsification
    if grid && configs.len() > 1 && worst != EXIT_FALSIFIED {
        worst = 0;
    }
    ExitCode::from(worst)
}
