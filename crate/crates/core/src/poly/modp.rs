//! Polynomials over `F_p`, Berlekamp factorization, and Hensel lifting over `Z/p^k`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

/// Polynomial over `F_p`, lowest degree first, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub(crate) fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

impl FpPoly {
    pub fn new(mut c: Vec<u64>, p: u64) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn from_bigints(c: &[BigInt], p: u64) -> Self {
        let pb = BigInt::from(p);
        FpPoly::new(c.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap()).collect(), p)
    }

    pub fn to_bigints(&self) -> Vec<BigInt> {
        self.c.iter().map(|&x| BigInt::from(x)).collect()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(vec![1], p)
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(vec![0, 1], p)
    }

    pub fn constant(a: u64, p: u64) -> Self {
        FpPoly::new(vec![a], p)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(invmod(self.lead(), self.p))
    }

    pub fn scale(&self, a: u64) -> FpPoly {
        FpPoly::new(self.c.iter().map(|&x| mulmod(x, a, self.p)).collect(), self.p)
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        FpPoly::new((0..n).map(|i| (self.coeff(i) + o.coeff(i)) % self.p).collect(), self.p)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        FpPoly::new((0..n).map(|i| (self.coeff(i) + self.p - o.coeff(i)) % self.p).collect(), self.p)
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(vec![], self.p);
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(a, b, self.p)) % self.p;
            }
        }
        FpPoly::new(out, self.p)
    }

    pub fn div_rem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!d.is_zero());
        let p = self.p;
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (FpPoly::new(vec![], p), self.clone());
        }
        let inv = invmod(d.lead(), p);
        let mut r = self.c.clone();
        let mut q = vec![0u64; self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = mulmod(r[k + dd], inv, p);
            if c != 0 {
                for (j, &dc) in d.c.iter().enumerate() {
                    r[k + j] = (r[k + j] + p - mulmod(c, dc, p)) % p;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (FpPoly::new(q, p), FpPoly::new(r, p))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g` monic.
    pub fn ext_gcd(&self, o: &FpPoly) -> (FpPoly, FpPoly, FpPoly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (FpPoly::one(p), FpPoly::new(vec![], p));
        let (mut t0, mut t1) = (FpPoly::new(vec![], p), FpPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let l = invmod(r0.lead(), p);
        (r0.scale(l), s0.scale(l), t0.scale(l))
    }

    pub fn derivative(&self) -> FpPoly {
        FpPoly::new(
            self.c.iter().enumerate().skip(1).map(|(i, &c)| mulmod(c, i as u64 % self.p, self.p)).collect(),
            self.p,
        )
    }

    pub fn pow_mod(&self, mut e: u64, m: &FpPoly) -> FpPoly {
        let mut acc = FpPoly::one(self.p).rem(m);
        let mut base = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == 0
    }

    /// Roots in `F_p` by exhaustive evaluation (small `p` only).
    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &c| (mulmod(acc, x, self.p) + c) % self.p)
    }

    /// Reciprocal `x^deg f(1/x)` normalized to be monic; `None` if `f(0) = 0`.
    pub fn star(&self) -> Option<FpPoly> {
        if self.coeff(0) == 0 {
            return None;
        }
        let rev = FpPoly::new(self.c.iter().rev().copied().collect(), self.p);
        Some(rev.monic())
    }

    /// Factors `self` mod p into powers of distinct monic irreducibles.
    pub fn factor(&self) -> Vec<(FpPoly, usize)> {
        let mut out = Vec::new();
        self.factor_into(1, &mut out);
        out.sort_by(|a, b| (a.0.degree(), &a.0.c).cmp(&(b.0.degree(), &b.0.c)));
        // merge equal irreducibles reached through different branches
        let mut merged: Vec<(FpPoly, usize)> = Vec::new();
        for (g, e) in out {
            match merged.last_mut() {
                Some(last) if last.0 == g => last.1 += e,
                _ => merged.push((g, e)),
            }
        }
        merged
    }

    fn factor_into(&self, mult: usize, out: &mut Vec<(FpPoly, usize)>) {
        let f = self.monic();
        if f.degree() == 0 {
            return;
        }
        let p = self.p;
        let mut c = f.gcd(&f.derivative());
        let mut w = f.div_rem(&c).0;
        let mut i = 1;
        while w.degree() > 0 {
            let y = w.gcd(&c);
            let fac = w.div_rem(&y).0;
            if fac.degree() > 0 {
                for h in berlekamp(&fac) {
                    out.push((h, mult * i));
                }
            }
            w = y;
            c = c.div_rem(&w).0;
            i += 1;
        }
        if c.degree() > 0 {
            // c = g(x^p) = g(x)^p over F_p
            let root = FpPoly::new(c.c.iter().step_by(p as usize).copied().collect(), p);
            root.factor_into(mult * p as usize, out);
        }
    }
}

/// Nullspace mod p of the matrix given as rows (each of length `cols`).
fn nullspace_mod(mut rows: Vec<Vec<u64>>, cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = invmod(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = mulmod(*x, inv, p);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..cols {
                    let sub = mulmod(f, rows[r][j], p);
                    rows[i][j] = (rows[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[f] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - rows[row][f]) % p;
        }
        basis.push(v);
    }
    basis
}

/// Berlekamp factorization of a squarefree polynomial into monic irreducibles.
pub fn berlekamp(f: &FpPoly) -> Vec<FpPoly> {
    let f = f.monic();
    let p = f.p;
    let n = f.degree();
    if n <= 1 {
        return if n == 1 { vec![f] } else { vec![] };
    }
    // column i of (Q - I) holds x^{ip} mod f - x^i
    let xp = FpPoly::x(p).pow_mod(p, &f);
    let mut cur = FpPoly::one(p);
    let mut rows = vec![vec![0u64; n]; n];
    for i in 0..n {
        for (r, row) in rows.iter_mut().enumerate() {
            row[i] = cur.coeff(r);
        }
        rows[i][i] = (rows[i][i] + p - 1) % p;
        cur = cur.mul(&xp).rem(&f);
    }
    let basis = nullspace_mod(rows, n, p);
    let r = basis.len();
    let mut factors = vec![f.clone()];
    for v in basis {
        if factors.len() == r {
            break;
        }
        let vp = FpPoly::new(v, p);
        if vp.degree() == 0 {
            continue;
        }
        let mut next = Vec::new();
        for g in factors {
            if g.degree() == 1 {
                next.push(g);
                continue;
            }
            let mut remaining = g;
            for s in 0..p {
                if remaining.degree() <= 1 {
                    break;
                }
                let h = remaining.gcd(&vp.sub(&FpPoly::constant(s, p)));
                if h.degree() > 0 && h.degree() < remaining.degree() {
                    remaining = remaining.div_rem(&h).0.monic();
                    next.push(h);
                }
            }
            next.push(remaining);
        }
        factors = next;
    }
    factors.sort_by(|a, b| (a.degree(), &a.c).cmp(&(b.degree(), &b.c)));
    factors
}

pub(crate) type ZPoly = Vec<BigInt>;

pub(crate) fn ztrim(mut a: ZPoly) -> ZPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

pub(crate) fn zmul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ztrim(out)
}

pub(crate) fn zmod(a: &[BigInt], m: &BigInt) -> ZPoly {
    ztrim(a.iter().map(|c| c.mod_floor(m)).collect())
}

pub(crate) fn zsymmetric(a: &[BigInt], m: &BigInt) -> ZPoly {
    let half = m / 2;
    ztrim(
        a.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

fn zsub(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ztrim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn zadd_scaled(a: &[BigInt], b: &FpPoly, scale: &BigInt) -> ZPoly {
    let n = a.len().max(b.c.len());
    let z = BigInt::zero();
    ztrim((0..n).map(|i| a.get(i).unwrap_or(&z) + BigInt::from(b.coeff(i)) * scale).collect())
}

/// Lifts `f ≡ g·h (mod p)` to `mod p^k`; `g`, `h` monic and coprime mod p, `f` monic.
fn hensel_two(f: &[BigInt], g: &FpPoly, h: &FpPoly, k: u32) -> (ZPoly, ZPoly) {
    let p = g.p;
    let pb = BigInt::from(p);
    let (one, s, t) = g.ext_gcd(h);
    debug_assert_eq!(one.degree(), 0);
    let mut gz = g.to_bigints();
    let mut hz = h.to_bigints();
    let mut pj = pb.clone();
    for _ in 1..k {
        let diff = zsub(f, &zmul(&gz, &hz));
        let e: ZPoly = diff.iter().map(|c| c / &pj).collect();
        let ebar = FpPoly::from_bigints(&e, p);
        let dg = t.mul(&ebar).rem(g);
        let dh = s.mul(&ebar).rem(h);
        gz = zadd_scaled(&gz, &dg, &pj);
        hz = zadd_scaled(&hz, &dh, &pj);
        pj *= &pb;
    }
    (zmod(&gz, &pj), zmod(&hz, &pj))
}

/// Lifts a factorization `f ≡ ∏ factors (mod p)` into pairwise coprime monic
/// factors to `mod p^k`. Output coefficients lie in `[0, p^k)`.
pub(crate) fn hensel_lift(f: &[BigInt], factors: &[FpPoly], k: u32) -> Vec<ZPoly> {
    let p = factors[0].p;
    let m = BigInt::from(p).pow(k);
    if factors.len() == 1 {
        return vec![zmod(f, &m)];
    }
    let mid = factors.len() / 2;
    let g0 = factors[..mid].iter().fold(FpPoly::one(p), |a, b| a.mul(b));
    let h0 = factors[mid..].iter().fold(FpPoly::one(p), |a, b| a.mul(b));
    let (g, h) = hensel_two(f, &g0, &h0, k);
    let mut out = hensel_lift(&g, &factors[..mid], k);
    out.extend(hensel_lift(&h, &factors[mid..], k));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berlekamp_splits_cyclotomic() {
        // x^4 + x^3 + x^2 + x + 1 mod 11 splits into linear factors
        let f = FpPoly::new(vec![1, 1, 1, 1, 1], 11);
        let fs = berlekamp(&f);
        assert_eq!(fs.len(), 4);
        assert!(fs.iter().all(|g| g.degree() == 1));
        // mod 2 it stays irreducible
        assert_eq!(berlekamp(&FpPoly::new(vec![1, 1, 1, 1, 1], 2)).len(), 1);
    }

    #[test]
    fn factor_with_multiplicity() {
        // (x+1)^2 (x^2+1) mod 3
        let f = FpPoly::new(vec![1, 1], 3).mul(&FpPoly::new(vec![1, 1], 3)).mul(&FpPoly::new(vec![1, 0, 1], 3));
        let fs = f.factor();
        assert_eq!(fs, vec![(FpPoly::new(vec![1, 1], 3), 2), (FpPoly::new(vec![1, 0, 1], 3), 1)]);
        // (x+1)^5 mod 5 = x^5 + 1
        let g = FpPoly::new(vec![1, 0, 0, 0, 0, 1], 5);
        assert_eq!(g.factor(), vec![(FpPoly::new(vec![1, 1], 5), 5)]);
    }

    #[test]
    fn hensel_reproduces_product() {
        // x^2 - 3x + 1 mod 11 has roots 9 and 5
        let f: ZPoly = [1, -3, 1].iter().map(|&c| BigInt::from(c)).collect();
        let fs = berlekamp(&FpPoly::from_bigints(&f, 11));
        let lifted = hensel_lift(&f, &fs, 10);
        let m = BigInt::from(11).pow(10);
        let prod = zmod(&zmul(&lifted[0], &lifted[1]), &m);
        assert_eq!(prod, zmod(&f, &m));
    }
}
