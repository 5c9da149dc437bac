//! Fixed inputs shared by the benchmarks.

use milnor_core::corpus::{self, random_specs, scramble};
use milnor_core::realize::assemble;
use milnor_core::{IsometryPair, PadicContext};

/// The first scrambled random pair, from `seed` onwards, whose dimension is at least `dim - 2`.
pub fn instance(prime: u64, dim: usize, seed: u64) -> (PadicContext, IsometryPair) {
    let ctx = PadicContext::new(prime, 40).unwrap();
    (seed..)
        .find_map(|s| {
            let mut rng = corpus::rng(s);
            let specs = random_specs(&mut rng, &ctx, dim);
            let pair = assemble(&specs, &ctx).ok()?;
            (pair.dim() + 2 >= dim).then(|| scramble(&mut rng, &pair).unwrap())
        })
        .map(|pair| (ctx, pair))
        .unwrap()
}
