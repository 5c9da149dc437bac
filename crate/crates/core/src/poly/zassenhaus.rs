//! Factorization over `Q` (Zassenhaus: factor modulo a small prime, lift, recombine).

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::modp::{berlekamp, hensel_lift, zmul, zsymmetric, FpPoly, ZPoly};
use super::PolyQ;
use crate::arith::{is_prime, Rat};

/// Monic irreducible factors over `Q` with multiplicities, sorted by degree then coefficients.
pub fn factor_over_q(f: &PolyQ) -> Vec<(PolyQ, usize)> {
    let mut out = Vec::new();
    for (part, e) in f.squarefree_decomposition() {
        for g in factor_squarefree(&part) {
            out.push((g, e));
        }
    }
    out.sort_by(|a, b| sort_key(&a.0).cmp(&sort_key(&b.0)));
    out
}

pub(crate) fn sort_key(f: &PolyQ) -> (usize, Vec<String>) {
    (f.degree(), f.to_strings())
}

fn factor_squarefree(f: &PolyQ) -> Vec<PolyQ> {
    let f = f.monic();
    let n = f.degree();
    if n <= 1 {
        return vec![f];
    }
    let prim = f.primitive_integer();
    let lc = prim[n].clone();
    // M(x) = lc^{n-1} F(x / lc) is monic with integer coefficients
    let mut m: ZPoly = Vec::with_capacity(n + 1);
    let mut pw = BigInt::one();
    let mut pows = vec![BigInt::one(); n];
    for i in (0..n).rev() {
        pows[i] = pw.clone();
        pw *= &lc;
    }
    for i in 0..n {
        m.push(&prim[i] * &pows[i]);
    }
    m.push(BigInt::one());

    let ell = (3u64..)
        .filter(|&q| is_prime(q))
        .find(|&q| FpPoly::from_bigints(&m, q).is_squarefree())
        .expect("a squarefree reduction exists for a squarefree polynomial");
    let modular = berlekamp(&FpPoly::from_bigints(&m, ell));
    let factors_m = if modular.len() == 1 {
        vec![m.clone()]
    } else {
        let norm1: BigInt = m.iter().map(|c| c.abs()).sum();
        let bound = (BigInt::one() << n) * norm1 * 2 + 1;
        let mut k = 1u32;
        let mut pk = BigInt::from(ell);
        while pk <= bound {
            pk *= ell;
            k += 1;
        }
        let lifted = hensel_lift(&m, &modular, k);
        recombine(m.clone(), lifted, &pk)
    };
    let mut out: Vec<PolyQ> = factors_m
        .into_iter()
        .map(|g| {
            // undo the scaling: g(lc·x)
            let scaled: Vec<Rat> = g
                .iter()
                .enumerate()
                .map(|(i, c)| Rat::from_integer(c * lc.pow(i as u32)))
                .collect();
            PolyQ::new(scaled).monic()
        })
        .collect();
    out.sort_by_key(sort_key);
    out
}

fn recombine(mut target: ZPoly, mut pool: Vec<ZPoly>, pk: &BigInt) -> Vec<ZPoly> {
    let mut found = Vec::new();
    let mut s = 1;
    while 2 * s <= pool.len() {
        let mut hit = None;
        for subset in combinations(pool.len(), s) {
            let mut g = vec![BigInt::one()];
            for &i in &subset {
                g = zmul(&g, &pool[i]);
            }
            let g = zsymmetric(&g, pk);
            if let Some(q) = exact_int_div(&target, &g) {
                hit = Some((subset, g, q));
                break;
            }
        }
        match hit {
            Some((subset, g, q)) => {
                found.push(g);
                target = q;
                pool = pool.into_iter().enumerate().filter(|(i, _)| !subset.contains(i)).map(|(_, x)| x).collect();
            }
            None => s += 1,
        }
    }
    found.push(target);
    found
}

fn exact_int_div(a: &[BigInt], b: &[BigInt]) -> Option<ZPoly> {
    let pa = PolyQ::from_bigints(a);
    let pb = PolyQ::from_bigints(b);
    let q = pa.exact_div(&pb)?;
    q.coeffs().iter().all(|c| c.is_integer()).then(|| q.coeffs().iter().map(|c| c.to_integer()).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_stays_irreducible() {
        let f = PolyQ::from_i64(&[1, 1, 1, 1, 1]);
        assert_eq!(factor_over_q(&f), vec![(f, 1)]);
    }

    #[test]
    fn splits_product() {
        // (x^2 - 2)(x^2 + x + 1)(x - 1/2)^2
        let a = PolyQ::from_i64(&[-2, 0, 1]);
        let b = PolyQ::from_i64(&[1, 1, 1]);
        let c = PolyQ::new(vec![Rat::new((-1).into(), 2.into()), Rat::one()]);
        let f = &(&a * &b) * &c.pow(2);
        let fs = factor_over_q(&f);
        assert_eq!(fs, vec![(c, 2), (a, 1), (b, 1)]);
    }

    #[test]
    fn swinnerton_dyer_like() {
        // x^4 - 10x^2 + 1 is irreducible but splits mod every prime
        let f = PolyQ::from_i64(&[1, 0, -10, 0, 1]);
        assert_eq!(factor_over_q(&f).len(), 1);
    }
}
