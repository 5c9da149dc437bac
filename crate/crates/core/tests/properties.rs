use milnor_core::arith::{hilbert_symbol, is_square, rat, ratio, PadicContext};
use milnor_core::corpus::{self, random_specs, scramble};
use milnor_core::decision::{decide_single_class, Condition};
use milnor_core::linalg::Mat;
use milnor_core::milnor::{analyze, invariant_from_specs, milnor_invariant, residual_form, IsometryPair, LevelBlock, Residual};
use milnor_core::poly::PolyQ;
use milnor_core::quadspace::{quad_invariant, QuadSpace};
use milnor_core::realize::{assemble, BlockKind, BlockSpec};
use num_traits::Zero;
use proptest::prelude::*;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn ctx(i: usize) -> PadicContext {
    PadicContext::new(PRIMES[i % PRIMES.len()], 40).unwrap()
}

fn nonzero() -> impl Strategy<Value = i64> {
    prop_oneof![-60i64..=-1, 1i64..=60]
}

fn symmetric(n: usize, entries: &[i64]) -> Mat {
    let mut g = Mat::zeros(n, n);
    let mut it = entries.iter();
    for i in 0..n {
        for j in i..n {
            let v = rat(*it.next().unwrap());
            g[(i, j)] = v.clone();
            g[(j, i)] = v;
        }
    }
    g
}

fn pair_from_seed(seed: u64, prime: usize, max_dim: usize) -> (PadicContext, Vec<BlockSpec>, IsometryPair) {
    let c = ctx(prime);
    let mut rng = corpus::rng(seed);
    let specs = random_specs(&mut rng, &c, max_dim);
    let pair = assemble(&specs, &c).unwrap();
    (c, specs, pair)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hilbert_symmetric_and_bimultiplicative(a in nonzero(), b in nonzero(), c in nonzero(), p in 0usize..6) {
        let k = ctx(p);
        let (a, b, c) = (rat(a), rat(b), rat(c));
        let ab = hilbert_symbol(&a, &b, &k).unwrap();
        prop_assert_eq!(ab, hilbert_symbol(&b, &a, &k).unwrap());
        let ac = hilbert_symbol(&a, &c, &k).unwrap();
        prop_assert_eq!(hilbert_symbol(&a, &(&b * &c), &k).unwrap(), ab * ac);
        prop_assert_eq!(hilbert_symbol(&a, &-a.clone(), &k).unwrap(), 1);
        if a != rat(1) {
            prop_assert_eq!(hilbert_symbol(&a, &(rat(1) - &a), &k).unwrap(), 1);
        }
        // squares pair trivially with everything
        prop_assert_eq!(hilbert_symbol(&(&a * &a), &b, &k).unwrap(), 1);
    }

    #[test]
    fn hilbert_nondegenerate_on_nonsquares(num in nonzero(), den in 1i64..30, p in 0usize..6) {
        let k = ctx(p);
        let a = ratio(num, den);
        if !is_square(&a, &k).unwrap() {
            let witnesses = milnor_core::arith::SquareClass::all(&k);
            prop_assert!(witnesses.iter().any(|w| hilbert_symbol(&a, &w.to_rat(), &k).unwrap() == -1));
        }
    }

    #[test]
    fn quad_invariant_is_congruence_invariant(
        n in 1usize..=5,
        entries in prop::collection::vec(-9i64..=9, 15),
        seed in any::<u64>(),
        p in 0usize..6,
    ) {
        let g = symmetric(n, &entries);
        prop_assume!(!g.det().is_zero());
        let k = ctx(p);
        let v = QuadSpace::new(g.clone(), k).unwrap();
        let t = corpus::random_base_change(&mut corpus::rng(seed), n);
        let w = QuadSpace::new(g.congruence(&t), k).unwrap();
        prop_assert_eq!(quad_invariant(&v).unwrap(), quad_invariant(&w).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn milnor_invariant_survives_base_change(seed in any::<u64>(), p in 0usize..6) {
        let (_, _, pair) = pair_from_seed(seed, p, 10);
        let moved = scramble(&mut corpus::rng(seed ^ 1), &pair).unwrap();
        prop_assert_eq!(milnor_invariant(&pair).unwrap(), milnor_invariant(&moved).unwrap());
    }

    #[test]
    fn realize_then_analyze_round_trips(seed in any::<u64>(), p in 0usize..6) {
        let (c, specs, pair) = pair_from_seed(seed, p, 10);
        prop_assert_eq!(milnor_invariant(&pair).unwrap(), invariant_from_specs(&specs, &c, None).unwrap());
    }

    #[test]
    fn residual_ignores_generator_shifts(seed in any::<u64>(), p in 0usize..6, shift in prop::collection::vec(-3i64..=3, 12)) {
        let (_, _, pair) = pair_from_seed(seed, p, 10);
        let a = analyze(&pair, None).unwrap();
        for ab in &a.blocks {
            let b = &ab.block;
            let q = b.factor.eval_mat(pair.iso());
            let w = b.basis.mul_vec(&shift.iter().cycle().take(b.basis.cols()).map(|&x| rat(x)).collect::<Vec<_>>());
            let dw = q.mul_vec(&w);
            let mut moved: LevelBlock = b.clone();
            moved.generators[0] = moved.generators[0].iter().zip(&dw).map(|(x, y)| x + y).collect();
            match (&ab.residual, residual_form(&pair, &moved).unwrap()) {
                (Residual::Quadratic { gram: x }, Residual::Quadratic { gram: y })
                | (Residual::Alternating { gram: x }, Residual::Alternating { gram: y })
                | (Residual::Hermitian { bilinear: x, .. }, Residual::Hermitian { bilinear: y, .. }) => prop_assert_eq!(x, &y),
                (Residual::Paired, Residual::Paired) => {}
                (x, y) => prop_assert!(false, "residual kind changed: {:?} vs {:?}", x, y),
            }
        }
    }

    #[test]
    fn verdict_is_exhaustive(seed in any::<u64>(), p in 0usize..6) {
        let (_, _, pair) = pair_from_seed(seed, p, 12);
        let v = decide_single_class(&milnor_invariant(&pair).unwrap()).unwrap();
        prop_assert_eq!(v.single_class, v.condition != Condition::None);
        prop_assert_eq!(v.single_class, v.failing_clause.is_none());
    }

    #[test]
    fn paired_blocks_never_flip_the_verdict(seed in any::<u64>(), p in 0usize..6, pick in 0usize..4, level in 1usize..=2) {
        let (c, mut specs, pair) = pair_from_seed(seed, p, 8);
        let before = decide_single_class(&milnor_invariant(&pair).unwrap()).unwrap();
        let f: PolyQ = corpus::paired_pool()[pick].clone();
        specs.push(BlockSpec::hyperbolic(BlockKind::Paired, f, level, 1));
        let Ok(bigger) = assemble(&specs, &c) else { return Ok(()) };
        // factors that are not p-regular are outside scope
        let Ok(inv) = milnor_invariant(&bigger) else { return Ok(()) };
        let after = decide_single_class(&inv).unwrap();
        if inv.m_1 == before.m_1 {
            prop_assert_eq!(before.single_class, after.single_class);
        }
    }
}
