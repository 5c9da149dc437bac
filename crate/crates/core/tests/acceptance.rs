//! Acceptance run: eight criteria, one PASS/FAIL line each. Runs sequentially
//! (no libtest harness) so the timings are honest.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use milnor_core::arith::{hilbert_symbol, rat, PadicContext, SquareClass};
use milnor_core::corpus::{self, herm_entry, random_base_change, random_specs, scalar, scramble, CorpusRng};
use milnor_core::decision::{decide_single_class, Condition, FailingClause};
use milnor_core::hermitian::HermCase;
use milnor_core::linalg::Mat;
use milnor_core::milnor::{analyze, invariant_from_specs, milnor_invariant, verify_structure, IsometryPair, ResidualClass};
use milnor_core::padic_ext::conic_solve_qp;
use milnor_core::poly::PolyQ;
use milnor_core::quadspace::{form_from_invariant, quad_invariant, QuadInvariant, QuadSpace};
use milnor_core::realize::{assemble, check_witness, counterexample, BlockKind, BlockSpec, RecipeCase};
use num_traits::Zero;
use rand::Rng;

const PRECISION: u32 = 40;

fn ctx(p: u64) -> PadicContext {
    PadicContext::new(p, PRECISION).unwrap()
}

/// Structural checks accumulated over criteria 3 to 7.
#[derive(Default)]
struct Structure {
    checked: usize,
    failures: Vec<String>,
}

impl Structure {
    fn check(&mut self, pair: &IsometryPair, label: &str) {
        self.checked += 1;
        match analyze(pair, None) {
            Ok(a) => {
                if let Err(e) = verify_structure(pair, &a) {
                    self.failures.push(format!("{label}: {e}"));
                }
            }
            Err(e) => self.failures.push(format!("{label}: analysis failed: {e}")),
        }
    }
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    match failures.first() {
        None => Outcome { ok: true, detail },
        Some(f) => Outcome { ok: false, detail: format!("{detail}; {} failures, first: {f}", failures.len()) },
    }
}

fn hilbert_oracle() -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for p in [2u64, 3, 5, 7, 11] {
        let c = ctx(p);
        let mut vals: Vec<i64> = (1..=20).collect();
        vals.extend([p as i64, 2 * p as i64]);
        let vals: Vec<i64> = vals.iter().flat_map(|&v| [v, -v]).collect();
        for &a in &vals {
            for &b in &vals {
                pairs += 1;
                let closed = hilbert_symbol(&rat(a), &rat(b), &c).unwrap();
                let brute = match conic_solve_qp(&rat(a), &rat(b), &rat(-1), &c) {
                    Ok(s) => s.is_some(),
                    Err(e) => {
                        failures.push(format!("p={p} ({a},{b}): {e}"));
                        continue;
                    }
                };
                if (closed == 1) != brute {
                    failures.push(format!("p={p} ({a},{b}): symbol {closed}, conic solvable {brute}"));
                }
            }
        }
    }
    outcome(&failures, format!("{pairs} pairs"))
}

fn random_form(rng: &mut CorpusRng, c: &PadicContext) -> QuadSpace {
    loop {
        let n = rng.gen_range(1..=6);
        let mut g = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = if i == j || rng.gen_bool(0.4) { scalar(rng, c) } else { rat(0) };
                g[(i, j)] = v.clone();
                g[(j, i)] = v;
            }
        }
        if !g.det().is_zero() {
            return QuadSpace::new(g, *c).unwrap();
        }
    }
}

fn quadratic_soundness() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = corpus::rng(2);
    let mut forms = 0;
    let mut triples = 0;
    for p in [2u64, 3, 5, 7, 11, 13] {
        let c = ctx(p);
        for _ in 0..500 {
            forms += 1;
            let v = random_form(&mut rng, &c);
            let inv = quad_invariant(&v).unwrap();
            for _ in 0..10 {
                let t = random_base_change(&mut rng, v.dim());
                let w = QuadSpace::new(v.gram().congruence(&t), c).unwrap();
                let winv = quad_invariant(&w).unwrap();
                if winv != inv {
                    failures.push(format!("p={p}: {inv:?} became {winv:?}"));
                }
            }
        }
        for dim in 1..=6 {
            for d in SquareClass::all(&c) {
                for hasse in [1i8, -1] {
                    let inv = QuadInvariant { dim, det_class: d, hasse };
                    if !inv.is_admissible(&c).unwrap() {
                        continue;
                    }
                    triples += 1;
                    let back = form_from_invariant(&inv, &c).and_then(|v| quad_invariant(&v));
                    if back.as_ref() != Ok(&inv) {
                        failures.push(format!("p={p}: {inv:?} round-tripped to {back:?}"));
                    }
                }
            }
        }
    }
    outcome(&failures, format!("{forms} forms x 10 congruences, {triples} admissible triples"))
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn congruence_invariance(st: &mut Structure) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = corpus::rng(3);
    for i in 0..200 {
        let c = ctx(PRIMES[i % PRIMES.len()]);
        let specs = random_specs(&mut rng, &c, 12);
        let pair = assemble(&specs, &c).unwrap();
        let moved = scramble(&mut rng, &pair).unwrap();
        st.check(&pair, "c3");
        st.check(&moved, "c3");
        match (milnor_invariant(&pair), milnor_invariant(&moved)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => failures.push(format!("instance {i} (p={}): invariant changed", c.p())),
            (a, b) => failures.push(format!("instance {i}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    outcome(&failures, "200 pairs".into())
}

/// Fixed realization corpus: every block type, levels 1 to 4, both norm classes.
fn realization_corpus() -> Vec<(u64, BlockSpec)> {
    let mut out = Vec::new();
    let plus = PolyQ::from_i64(&[1, 1]);
    let minus = PolyQ::from_i64(&[-1, 1]);
    for p in [2u64, 3, 5] {
        for kind in [BlockKind::PlusOne, BlockKind::MinusOne] {
            for level in [1, 3] {
                out.push((p, BlockSpec::unipotent(kind, level, &[rat(1)])));
                out.push((p, BlockSpec::unipotent(kind, level, &[rat(p as i64), rat(-3)])));
            }
            let f = if kind == BlockKind::PlusOne { plus.clone() } else { minus.clone() };
            for level in [2, 4] {
                out.push((p, BlockSpec::hyperbolic(kind, f.clone(), level, 2)));
            }
        }
    }
    let twists = [rat(1), rat(2), rat(3), rat(5), rat(7), rat(-1)];
    for (p, q) in [(3u64, PolyQ::from_i64(&[1, 0, 1])), (5, PolyQ::from_i64(&[1, 1, 1])), (3, PolyQ::from_i64(&[1, -3, 1])), (7, PolyQ::from_i64(&[1, 0, 1]))] {
        for level in 1..=4 {
            for t in &twists {
                out.push((p, BlockSpec::symmetric(q.clone(), level, vec![PolyQ::constant(t.clone())])));
            }
        }
    }
    for p in [3u64, 7] {
        for f in corpus::paired_pool() {
            for level in 1..=4 {
                out.push((p, BlockSpec::hyperbolic(BlockKind::Paired, f.clone(), level, 1)));
            }
        }
    }
    out
}

fn realization_round_trip(st: &mut Structure) -> Outcome {
    let mut failures = Vec::new();
    let corpus = realization_corpus();
    let mut norm_classes = BTreeMap::new();
    let mut kinds = BTreeMap::new();
    for (i, (p, spec)) in corpus.iter().enumerate() {
        let c = ctx(*p);
        *kinds.entry(format!("{:?}", spec.kind)).or_insert(0) += 1;
        let specs = std::slice::from_ref(spec);
        let pair = match assemble(specs, &c) {
            Ok(x) => x,
            Err(e) => {
                failures.push(format!("spec {i}: realize failed: {e}"));
                continue;
            }
        };
        st.check(&pair, "c4");
        let (got, want) = (milnor_invariant(&pair), invariant_from_specs(specs, &c, None));
        match (&got, &want) {
            (Ok(a), Ok(b)) if a == b => {
                for r in &a.records {
                    if let ResidualClass::Hermitian { invariant } = &r.residual {
                        if invariant.case == HermCase::Field {
                            *norm_classes.entry(invariant.det_is_norm).or_insert(0) += 1;
                        }
                    }
                }
            }
            _ => failures.push(format!("spec {i} at p={p}: round trip mismatch")),
        }
    }
    if corpus.len() < 60 {
        failures.push(format!("corpus has only {} specs", corpus.len()));
    }
    if norm_classes.len() < 2 {
        failures.push(format!("norm classes seen: {norm_classes:?}"));
    }
    outcome(&failures, format!("{} specs, kinds {kinds:?}, field norm classes {norm_classes:?}", corpus.len()))
}

/// Same shapes, fresh residual data.
fn perturb(rng: &mut CorpusRng, specs: &[BlockSpec], c: &PadicContext) -> Vec<BlockSpec> {
    specs
        .iter()
        .map(|s| {
            let mut s = s.clone();
            match s.kind {
                BlockKind::PlusOne | BlockKind::MinusOne if s.level % 2 == 1 => {
                    s.residual = (0..s.rank).map(|_| PolyQ::constant(scalar(rng, c))).collect();
                }
                BlockKind::SelfReciprocal => {
                    s.residual = (0..s.rank).map(|_| herm_entry(rng, &s.factor, c)).collect();
                }
                _ => {}
            }
            s
        })
        .collect()
}

fn sufficiency(st: &mut Structure) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = corpus::rng(5);
    let mut found: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut attempts = 0;
    while [Condition::I, Condition::II, Condition::III].iter().any(|c| found.get(c.label()).copied().unwrap_or(0) < 10) {
        attempts += 1;
        if attempts > 2000 {
            failures.push(format!("instance search exhausted: {found:?}"));
            break;
        }
        let c = ctx(PRIMES[attempts % PRIMES.len()]);
        let specs = random_specs(&mut rng, &c, 10);
        let pair = scramble(&mut rng, &assemble(&specs, &c).unwrap()).unwrap();
        let a = analyze(&pair, None).unwrap();
        let v = decide_single_class(&a.invariant).unwrap();
        if !v.single_class || found.get(v.condition.label()).copied().unwrap_or(0) >= 10 {
            continue;
        }
        *found.entry(v.condition.label()).or_insert(0) += 1;
        st.check(&pair, "c5");
        for k in 0..20 {
            let other = perturb(&mut rng, &a.specs, &c);
            let Ok(w) = assemble(&other, &c) else { continue };
            match check_witness(&pair, &w) {
                Ok(chk) if chk.holds() => failures.push(format!("{} instance at p={}: perturbation {k} is a witness", v.condition.label(), c.p())),
                Ok(_) => {}
                Err(e) => failures.push(format!("perturbation check failed: {e}")),
            }
        }
    }
    outcome(&failures, format!("instances {found:?}, 20 perturbations each"))
}

fn sr(c: &[i64]) -> PolyQ {
    PolyQ::from_i64(c)
}

fn uni(kind: BlockKind, level: usize, d: &[i64]) -> BlockSpec {
    BlockSpec::unipotent(kind, level, &d.iter().map(|&x| rat(x)).collect::<Vec<_>>())
}

fn herm(q: &PolyQ, level: usize, d: &[i64]) -> BlockSpec {
    BlockSpec::symmetric(q.clone(), level, d.iter().map(|&x| PolyQ::constant(rat(x))).collect())
}

/// Targeted failure instances: (expected clause, expected recipe, prime, blocks).
fn failure_instances() -> Vec<(FailingClause, RecipeCase, u64, Vec<BlockSpec>)> {
    use BlockKind::{MinusOne as M, PlusOne as P};
    use FailingClause as F;
    use RecipeCase as R;
    let i3 = sr(&[1, 0, 1]); // inert at 3, 7, 11
    let g5 = sr(&[1, 1, 1]); // inert at 5, 11
    let h3 = sr(&[1, -3, 1]); // inert at 3, 7
    let mut out = Vec::new();
    for (p, q) in [(3u64, &i3), (5, &g5), (7, &h3)] {
        out.push((F::EvenLevelSelfReciprocal, R::EvenHermTwist, p, vec![herm(q, 2, &[1])]));
        out.push((F::MultipleOddLevels, R::TwoOddHermTwist, p, vec![herm(q, 1, &[1]), herm(q, 3, &[1])]));
        out.push((F::ResidualTooBig, R::M0M1ResidualBig, p, vec![uni(M, 1, &[1, 2, 3]), herm(q, 1, &[1])]));
    }
    out.push((F::Mixed, R::TwoOddHermTwist, 3, vec![herm(&i3, 1, &[1]), herm(&h3, 1, &[1])]));
    out.push((F::Mixed, R::TwoOddHermTwist, 7, vec![herm(&i3, 1, &[1]), herm(&h3, 1, &[1])]));
    out.push((F::Mixed, R::TwoOddHermTwist, 11, vec![herm(&i3, 1, &[1]), herm(&g5, 1, &[1])]));
    for p in [3u64, 5, 7] {
        let np = p as i64;
        out.push((F::M0TooBig, R::M0TwoDimsAtLeastTwo, p, vec![uni(M, 1, &[1, np]), uni(P, 1, &[1, np])]));
        out.push((F::M0TooBig, R::HyperbolicVsNot, p, vec![uni(M, 1, &[1, -1]), uni(P, 1, &[1, np])]));
        out.push((F::M0TooBig, R::BothHyperbolic, p, vec![uni(M, 1, &[1, -1]), uni(P, 3, &[2, -2])]));
        out.push((F::M0TooBig, R::BothOneDim, p, vec![uni(M, 1, &[1]), uni(P, 1, &[np])]));
        out.push((F::M0TooBig, R::Mixed12, p, vec![uni(M, 1, &[1]), uni(M, 3, &[1, np])]));
    }
    out
}

fn necessity(st: &mut Structure) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = corpus::rng(6);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (clause, case, p, specs) in failure_instances() {
        let c = ctx(p);
        let label = format!("{}/{case:?}", clause.tag());
        let pair = scramble(&mut rng, &assemble(&specs, &c).unwrap()).unwrap();
        st.check(&pair, "c6");
        let v = decide_single_class(&milnor_invariant(&pair).unwrap()).unwrap();
        if v.failing_clause != Some(clause) {
            failures.push(format!("{label} at p={p}: verdict {:?}", v.failing_clause));
            continue;
        }
        match counterexample(&pair, None) {
            Ok(Some((w, recipe))) => {
                st.check(&w, "c6 witness");
                if recipe.case != case {
                    failures.push(format!("{label} at p={p}: recipe {:?}", recipe.case));
                }
                match check_witness(&pair, &w) {
                    Ok(chk) if chk.holds() => *seen.entry(label).or_insert(0) += 1,
                    other => failures.push(format!("{label} at p={p}: contract {other:?}")),
                }
            }
            other => failures.push(format!("{label} at p={p}: {:?}", other.map(|o| o.is_some()))),
        }
    }
    for (k, n) in &seen {
        if *n < 3 {
            failures.push(format!("{k}: only {n} verified witnesses"));
        }
    }
    outcome(&failures, format!("verified {seen:?}"))
}

fn bidirectional(st: &mut Structure) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = corpus::rng(7);
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for i in 0..300 {
        let c = ctx(PRIMES[i % PRIMES.len()]);
        let specs = random_specs(&mut rng, &c, 12);
        let pair = scramble(&mut rng, &assemble(&specs, &c).unwrap()).unwrap();
        st.check(&pair, "c7");
        let v = match milnor_invariant(&pair).and_then(|inv| decide_single_class(&inv)) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        match counterexample(&pair, None) {
            Ok(None) if v.single_class => *tally.entry("single".into()).or_insert(0) += 1,
            Ok(Some((w, r))) if !v.single_class => {
                st.check(&w, "c7 witness");
                if !check_witness(&pair, &w).map(|c| c.holds()).unwrap_or(false) {
                    failures.push(format!("instance {i}: witness fails the contract"));
                }
                *tally.entry(format!("{:?}", r.case)).or_insert(0) += 1;
            }
            other => failures.push(format!("instance {i} (p={}): single {} but {:?}", c.p(), v.single_class, other.map(|o| o.is_some()))),
        }
    }
    outcome(&failures, format!("300 instances {tally:?}"))
}

fn main() -> ExitCode {
    let mut st = Structure::default();
    let mut all_ok = true;
    // ACCEPTANCE_ONLY=N runs a single criterion
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut report = |n: usize, name: &str, limit: Duration, run: &mut dyn FnMut(&mut Structure) -> Outcome, st: &mut Structure| {
        if only.is_some_and(|k| k != n) {
            return;
        }
        let t = Instant::now();
        let o = run(st);
        let dt = t.elapsed();
        let ok = o.ok && dt <= limit;
        all_ok &= ok;
        println!("criterion {n} {name}: {} ({}; {:.1}s of {}s)", if ok { "PASS" } else { "FAIL" }, o.detail, dt.as_secs_f64(), limit.as_secs());
    };
    report(1, "hilbert-oracle", Duration::from_secs(60), &mut |_| hilbert_oracle(), &mut st);
    report(2, "quadratic-soundness", Duration::from_secs(120), &mut |_| quadratic_soundness(), &mut st);
    report(3, "congruence-invariance", Duration::from_secs(300), &mut congruence_invariance, &mut st);
    report(4, "realization-round-trip", Duration::from_secs(300), &mut realization_round_trip, &mut st);
    report(5, "sufficiency", Duration::from_secs(300), &mut sufficiency, &mut st);
    report(6, "necessity", Duration::from_secs(300), &mut necessity, &mut st);
    report(7, "bidirectional", Duration::from_secs(600), &mut bidirectional, &mut st);
    let o = outcome(&st.failures, format!("{} analyses", st.checked));
    all_ok &= o.ok;
    println!("criterion 8 structural-invariants: {} ({})", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
