//! Seeded generators for block lists, base changes and worked instances. Used by
//! the test suites, the benchmarks and the `selftest` command.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{rat, PadicContext, Rat};
use crate::error::Result;
use crate::linalg::Mat;
use crate::milnor::{analyze, IsometryPair};
use crate::padic_ext::InvolutiveAlgebra;
use crate::poly::PolyQ;
use crate::realize::{assemble, BlockKind, BlockSpec};

pub use rand::SeedableRng;
pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Irreducible self-reciprocal polynomials used for hermitian blocks.
pub fn self_reciprocal_pool() -> Vec<PolyQ> {
    vec![
        PolyQ::from_i64(&[1, 0, 1]),
        PolyQ::from_i64(&[1, -3, 1]),
        PolyQ::from_i64(&[1, 1, 1]),
        PolyQ::from_i64(&[1, -1, 1]),
        PolyQ::from_i64(&[1, 3, 1]),
        PolyQ::from_i64(&[1, -4, 1]),
        PolyQ::from_i64(&[1, 5, 1]),
    ]
}

/// Irreducible polynomials with `F ≠ F*`.
pub fn paired_pool() -> Vec<PolyQ> {
    vec![PolyQ::from_i64(&[-2, 1]), PolyQ::from_i64(&[3, 1]), PolyQ::from_i64(&[-5, 1]), PolyQ::from_i64(&[2, 1, 1])]
}

/// A nonzero rational: a small integer times an optional power of `p`.
pub fn scalar<R: Rng>(rng: &mut R, ctx: &PadicContext) -> Rat {
    let base = [1i64, -1, 2, -2, 3, -3, 5, -5, 6, 7, -7, 10, 11, -13][rng.gen_range(0..14)];
    let pk = if rng.gen_bool(0.3) { ctx.p() as i64 } else { 1 };
    rat(base * pk)
}

/// A nonzero ι-fixed element of `Q[x]/(q)`: a scalar or a scalar times `(y + c)`.
pub fn herm_entry<R: Rng>(rng: &mut R, q: &PolyQ, ctx: &PadicContext) -> PolyQ {
    let s = PolyQ::constant(scalar(rng, ctx));
    if rng.gen_bool(0.6) {
        return s;
    }
    let alg = InvolutiveAlgebra::field(q).expect("self-reciprocal");
    let xinv = alg.iota(&PolyQ::x());
    loop {
        let c = rat(rng.gen_range(-3..=3));
        let y = alg.reduce(&(&(&PolyQ::x() + &xinv) + &PolyQ::constant(c)));
        if !y.is_zero() {
            return alg.mul(&y, &s);
        }
    }
}

pub fn spec_dim(s: &BlockSpec) -> usize {
    let d = s.factor.degree() * s.level * s.rank;
    if s.kind == BlockKind::Paired && !s.factor.is_self_reciprocal() {
        2 * d
    } else {
        d
    }
}

/// One random block of dimension at most `room` (None if nothing fits).
pub fn random_block<R: Rng>(rng: &mut R, ctx: &PadicContext, room: usize) -> Option<BlockSpec> {
    for _ in 0..20 {
        let spec = match rng.gen_range(0..6) {
            0 | 1 => {
                let kind = if rng.gen_bool(0.5) { BlockKind::PlusOne } else { BlockKind::MinusOne };
                let level = [1, 1, 3, 5][rng.gen_range(0..4)];
                let rank = rng.gen_range(1..=3);
                let diag: Vec<Rat> = (0..rank).map(|_| scalar(rng, ctx)).collect();
                BlockSpec::unipotent(kind, level, &diag)
            }
            2 => {
                let kind = if rng.gen_bool(0.5) { BlockKind::PlusOne } else { BlockKind::MinusOne };
                let factor = if kind == BlockKind::PlusOne { PolyQ::from_i64(&[1, 1]) } else { PolyQ::from_i64(&[-1, 1]) };
                BlockSpec::hyperbolic(kind, factor, [2, 4][rng.gen_range(0..2)], 2)
            }
            3 | 4 => {
                let q = self_reciprocal_pool().choose(rng).expect("nonempty").clone();
                let level = rng.gen_range(1..=3);
                let rank = rng.gen_range(1..=2);
                let diag = (0..rank).map(|_| herm_entry(rng, &q, ctx)).collect();
                BlockSpec::symmetric(q, level, diag)
            }
            _ => {
                let f = paired_pool().choose(rng).expect("nonempty").clone();
                BlockSpec::hyperbolic(BlockKind::Paired, f, rng.gen_range(1..=2), 1)
            }
        };
        if spec_dim(&spec) <= room {
            return Some(spec);
        }
    }
    None
}

/// Random block list of total dimension at most `max_dim`, realizable and
/// analyzable at the given prime (non-regular factors are resampled).
pub fn random_specs<R: Rng>(rng: &mut R, ctx: &PadicContext, max_dim: usize) -> Vec<BlockSpec> {
    loop {
        let count = rng.gen_range(1..=3);
        let mut specs = Vec::new();
        let mut room = max_dim;
        for _ in 0..count {
            if let Some(s) = random_block(rng, ctx, room) {
                room -= spec_dim(&s);
                specs.push(s);
            }
        }
        if specs.is_empty() {
            continue;
        }
        if let Ok(pair) = assemble(&specs, ctx) {
            if analyze(&pair, None).is_ok() {
                return specs;
            }
        }
    }
}

/// Random invertible integer matrix: a shuffled product of unit triangular
/// factors with small entries, with a few diagonal scalings.
pub fn random_base_change<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let mut lower = Mat::identity(n);
    let mut upper = Mat::identity(n);
    for i in 0..n {
        for j in 0..i {
            lower[(i, j)] = rat(rng.gen_range(-1..=1));
            upper[(j, i)] = rat(rng.gen_range(-1..=1));
        }
        if rng.gen_bool(0.2) {
            upper[(i, i)] = rat([2, -1, 3][rng.gen_range(0..3)]);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let p = Mat::identity(n).select_columns(&perm);
    &(&lower * &upper) * &p
}

/// The pair in a random basis.
pub fn scramble<R: Rng>(rng: &mut R, pair: &IsometryPair) -> Result<IsometryPair> {
    pair.change_basis(&random_base_change(rng, pair.dim()))
}
