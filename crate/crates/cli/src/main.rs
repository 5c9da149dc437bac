use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use milnor_core::corpus;
use milnor_core::{
    analyze, assemble, check_witness, counterexample, decide_single_class, gl_conjugate, invariant_from_specs, is_isometric, o_conjugate,
    parse_rat, rat_to_string, verify_structure, Analysis, BlockSpec, Error, IsometryPair, Mat, PadicContext, PolyQ,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const DEFAULT_PRECISION: u32 = 40;

#[derive(Parser)]
#[command(name = "milnor", version, about = "Conjugacy invariants of isometries of p-adic quadratic spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    prime: u64,
    /// p-adic digits; defaults to $MILNOR_PRECISION, then 40
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long)]
    iso: PathBuf,
    #[command(flatten)]
    common: Common,
    /// JSON {"factors": [[coeffs], ...]}: p-adic factors for non-regular characteristic polynomials
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the invariant report
    Analyze(PairArgs),
    /// Print the report; exit 3 unless the orthogonal class is the whole GL class
    Decide(PairArgs),
    /// Compare two pairs: exit 0 if O-conjugate, 3 if only GL-conjugate, 4 otherwise
    Compare {
        #[arg(long)]
        a_gram: PathBuf,
        #[arg(long)]
        a_iso: PathBuf,
        #[arg(long)]
        b_gram: PathBuf,
        #[arg(long)]
        b_iso: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build gram.json and iso.json from a block list
    Realize {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write a witness pair and its recipe; exit 5 when the class is single
    Counterexample {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the embedded corpus of property checks
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// instances per prime
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
}

/// Failure carrying its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let bad_input = matches!(
            e,
            Error::ZeroInput
                | Error::NotPrime(_)
                | Error::ZeroPrecision
                | Error::BadRational(_)
                | Error::NotPRegular(..)
                | Error::BadCertificate(_)
                | Error::PrimeMismatch
                | Error::SizeMismatch(_)
                | Error::NotSymmetric
                | Error::NotAnIsometry
                | Error::Singular
                | Error::DegenerateForm
                | Error::InvalidSpec(_)
                | Error::EmptySpec
                | Error::ZeroEntry
                | Error::OddLevelForPM1
                | Error::OddRankForEvenLevel
                | Error::EvenLevel
                | Error::NotSelfReciprocal
                | Error::NotIrreducible
                | Error::NotMonic
                | Error::ZeroConstantTerm
                | Error::Malformed(_)
        );
        let mut msg = e.to_string();
        if matches!(e, Error::NotPRegular(..)) {
            msg.push_str("\nhint: pass --certificate FILE with the p-adic factors");
        }
        Fail { code: if bad_input { 2 } else { 1 }, msg }
    }
}

fn bad(msg: impl Into<String>) -> Fail {
    Fail { code: 2, msg: msg.into() }
}

type Out = Result<u8, Fail>;

fn precision(flag: Option<u32>) -> Result<u32, Fail> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("MILNOR_PRECISION") {
        Ok(v) => v.trim().parse().map_err(|_| bad(format!("MILNOR_PRECISION={v:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn context(c: &Common) -> Result<PadicContext, Fail> {
    Ok(PadicContext::new(c.prime, precision(c.precision)?)?)
}

fn read(path: &Path) -> Result<(Vec<u8>, Value), Fail> {
    let bytes = std::fs::read(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let v = serde_json::from_slice(&bytes).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    Ok((bytes, v))
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn matrix_from_json(v: &Value, what: &str) -> Result<Mat, Fail> {
    let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad(format!("{what}: missing integer \"n\"")))? as usize;
    let rows = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad(format!("{what}: missing \"entries\"")))?;
    if n == 0 || rows.len() != n {
        return Err(bad(format!("{what}: expected {n} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n);
    for row in rows {
        let row = row.as_array().filter(|r| r.len() == n).ok_or_else(|| bad(format!("{what}: every row needs {n} entries")))?;
        let parsed = row
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(parse_rat(s)?),
                Value::Number(k) if k.is_i64() => Ok(milnor_core::rat(k.as_i64().unwrap())),
                _ => Err(bad(format!("{what}: entries are \"num/den\" strings"))),
            })
            .collect::<Result<Vec<_>, Fail>>()?;
        out.push(parsed);
    }
    Ok(Mat::from_rows(out)?)
}

fn matrix_to_json(m: &Mat) -> Value {
    let rows: Vec<Vec<String>> = m.to_rows().iter().map(|r| r.iter().map(rat_to_string).collect()).collect();
    json!({ "n": m.rows(), "entries": rows })
}

fn write_json(path: &Path, v: &Value) -> Result<(), Fail> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Fail { code: 1, msg: format!("{}: {e}", path.display()) })
}

fn print_json(v: &Value) {
    use std::io::Write;
    // a closed pipe is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

struct Loaded {
    pair: IsometryPair,
    hashes: Value,
    certificate: Option<Vec<PolyQ>>,
}

fn load_pair(gram: &Path, iso: &Path, ctx: PadicContext) -> Result<(IsometryPair, String, String), Fail> {
    let (gb, gv) = read(gram)?;
    let (ib, iv) = read(iso)?;
    let g = matrix_from_json(&gv, "gram")?;
    let s = matrix_from_json(&iv, "iso")?;
    Ok((IsometryPair::from_matrices(g, s, ctx)?, sha256(&gb), sha256(&ib)))
}

fn load(a: &PairArgs) -> Result<Loaded, Fail> {
    let ctx = context(&a.common)?;
    let (pair, gh, ih) = load_pair(&a.gram, &a.iso, ctx)?;
    let mut hashes = json!({ "gram_sha256": gh, "iso_sha256": ih });
    let certificate = match &a.certificate {
        None => None,
        Some(path) => {
            let (bytes, v) = read(path)?;
            hashes["certificate_sha256"] = json!(sha256(&bytes));
            let factors = v.get("factors").cloned().ok_or_else(|| bad("certificate: missing \"factors\""))?;
            Some(serde_json::from_value::<Vec<PolyQ>>(factors).map_err(|e| bad(format!("certificate: {e}")))?)
        }
    };
    Ok(Loaded { pair, hashes, certificate })
}

fn report(l: &Loaded, a: &Analysis) -> Result<Value, Fail> {
    let inv = &a.invariant;
    let verdict = decide_single_class(inv)?;
    Ok(json!({
        "inputs": l.hashes,
        "prime": inv.p,
        "precision": inv.factorization.precision,
        "dimension": l.pair.dim(),
        "char_poly": inv.char_poly,
        "factorization": inv.factorization.factors,
        "blocks": inv.records,
        "m_plus": inv.m_plus,
        "m_minus": inv.m_minus,
        "m_0": inv.m_0,
        "m_1": inv.m_1,
        "m_2": inv.m_2,
        "verdict": verdict,
    }))
}

fn cmd_analyze(a: &PairArgs, exit_on_verdict: bool) -> Out {
    let l = load(a)?;
    let analysis = analyze(&l.pair, l.certificate.as_deref())?;
    let r = report(&l, &analysis)?;
    print_json(&r);
    let single = r["verdict"]["single_class"].as_bool().unwrap_or(false);
    Ok(if exit_on_verdict && !single { 3 } else { 0 })
}

fn cmd_compare(a: (&Path, &Path), b: (&Path, &Path), common: &Common) -> Out {
    let ctx = context(common)?;
    let (pa, ga, ia) = load_pair(a.0, a.1, ctx)?;
    let (pb, gb, ib) = load_pair(b.0, b.1, ctx)?;
    let gl = gl_conjugate(&pa, &pb);
    let ambient = pa.dim() == pb.dim() && is_isometric(pa.space(), pb.space())?;
    let o = match o_conjugate(&pa, &pb) {
        Ok(x) => x,
        Err(Error::AmbientNotIsometric) => false,
        Err(e) => return Err(e.into()),
    };
    print_json(&json!({
        "inputs": { "a_gram_sha256": ga, "a_iso_sha256": ia, "b_gram_sha256": gb, "b_iso_sha256": ib },
        "prime": ctx.p(),
        "gl_conjugate": gl,
        "o_conjugate": o,
        "ambient_isometric": ambient,
    }));
    Ok(match (gl, o) {
        (true, true) => 0,
        (true, false) => 3,
        _ => 4,
    })
}

fn cmd_realize(spec: &Path, common: &Common, out_dir: &Path) -> Out {
    let ctx = context(common)?;
    let (bytes, v) = read(spec)?;
    let blocks = v.get("blocks").cloned().ok_or_else(|| bad("spec: missing \"blocks\""))?;
    let specs: Vec<BlockSpec> = serde_json::from_value(blocks).map_err(|e| bad(format!("spec: {e}")))?;
    let pair = assemble(&specs, &ctx)?;
    let predicted = invariant_from_specs(&specs, &ctx, None)?;
    let (gp, ip) = (out_dir.join("gram.json"), out_dir.join("iso.json"));
    write_json(&gp, &matrix_to_json(pair.gram()))?;
    write_json(&ip, &matrix_to_json(pair.iso()))?;
    print_json(&json!({
        "inputs": { "spec_sha256": sha256(&bytes) },
        "prime": ctx.p(),
        "dimension": pair.dim(),
        "gram": gp.display().to_string(),
        "iso": ip.display().to_string(),
        "blocks": predicted.records,
    }));
    Ok(0)
}

fn cmd_counterexample(a: &PairArgs, out_dir: &Path) -> Out {
    let l = load(a)?;
    let Some((w, recipe)) = counterexample(&l.pair, l.certificate.as_deref())? else {
        eprintln!("single class: no witness exists");
        return Ok(5);
    };
    let check = check_witness(&l.pair, &w)?;
    let (gp, ip, rp) = (out_dir.join("witness.gram.json"), out_dir.join("witness.iso.json"), out_dir.join("recipe.json"));
    write_json(&gp, &matrix_to_json(w.gram()))?;
    write_json(&ip, &matrix_to_json(w.iso()))?;
    let recipe = serde_json::to_value(&recipe).expect("recipes serialize");
    write_json(&rp, &recipe)?;
    print_json(&json!({
        "inputs": l.hashes,
        "prime": l.pair.ctx().p(),
        "recipe": recipe,
        "check": check,
        "witness": { "gram": gp.display().to_string(), "iso": ip.display().to_string(), "recipe": rp.display().to_string() },
    }));
    Ok(0)
}

/// Per prime: round trip, basis independence, structure, and the
/// verdict/witness equivalence on random block lists.
fn selftest_prime(p: u64, seed: u64, count: usize) -> Vec<String> {
    let mut failures = Vec::new();
    let ctx = PadicContext::new(p, DEFAULT_PRECISION).expect("listed primes are prime");
    let mut rng = corpus::rng(seed ^ p.wrapping_mul(0x9e37_79b9));
    for i in 0..count {
        let label = format!("p={p} #{i}");
        let specs = corpus::random_specs(&mut rng, &ctx, 10);
        let run = || -> milnor_core::Result<Option<String>> {
            let pair = assemble(&specs, &ctx)?;
            let moved = corpus::scramble(&mut corpus::rng(seed ^ i as u64), &pair)?;
            let a = analyze(&moved, None)?;
            if a.invariant != invariant_from_specs(&specs, &ctx, None)? {
                return Ok(Some("round trip".into()));
            }
            if let Err(e) = verify_structure(&moved, &a) {
                return Ok(Some(e));
            }
            let single = decide_single_class(&a.invariant)?.single_class;
            match counterexample(&moved, None)? {
                None if single => {}
                Some((w, _)) if !single => {
                    if !check_witness(&moved, &w)?.holds() {
                        return Ok(Some("witness contract".into()));
                    }
                }
                _ => return Ok(Some("verdict and witness disagree".into())),
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(why)) => failures.push(format!("{label}: {why}")),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    failures
}

fn cmd_selftest(seed: u64, count: usize) -> Out {
    let primes = [2u64, 3, 5, 7, 11, 13];
    let failures: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = primes.iter().map(|&p| s.spawn(move || selftest_prime(p, seed, count))).collect();
        handles.into_iter().flat_map(|h| h.join().unwrap_or_else(|_| vec!["worker panicked".into()])).collect()
    });
    for f in &failures {
        eprintln!("{f}");
    }
    print_json(&json!({ "seed": seed, "instances": count * primes.len(), "failures": failures.len() }));
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn run(cli: Cli) -> Out {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, false),
        Command::Decide(a) => cmd_analyze(a, true),
        Command::Compare { a_gram, a_iso, b_gram, b_iso, common } => cmd_compare((a_gram, a_iso), (b_gram, b_iso), common),
        Command::Realize { spec, common, out_dir } => cmd_realize(spec, common, out_dir),
        Command::Counterexample { pair, out_dir } => cmd_counterexample(pair, out_dir),
        Command::Selftest { seed, count } => cmd_selftest(*seed, *count),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
