//! Finite extensions of `Q_p` modelled by polynomial residues, involutive étale
//! algebras `Q_p[x]/(q)` with `x ↦ x⁻¹`, traces, and quadratic norm tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{hilbert_symbol, rat, valuation, PadicContext, Rat};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::{trace_descent, FpPoly, PolyQ};
use crate::quadspace::gram_invariant;

/// `K = Q_p[x]/(m)` for a monic `m` certified irreducible over `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalField {
    modulus: PolyQ,
    ctx: PadicContext,
    /// `(e, f)` when the irreducibility certificate determines them.
    ramification: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtElem {
    pub residue: PolyQ,
}

impl ExtElem {
    pub fn new(residue: PolyQ) -> Self {
        ExtElem { residue }
    }

    pub fn constant(c: Rat) -> Self {
        ExtElem { residue: PolyQ::constant(c) }
    }
}

impl LocalField {
    /// `Q_p` itself.
    pub fn base(ctx: PadicContext) -> Self {
        LocalField { modulus: PolyQ::x(), ctx, ramification: Some((1, 1)) }
    }

    /// Requires an irreducibility certificate: irreducible reduction mod p, or a
    /// shifted Eisenstein-type Newton polygon.
    pub fn new(modulus: PolyQ, ctx: PadicContext) -> Result<Self> {
        if !modulus.is_monic() {
            return Err(Error::NotMonic);
        }
        let n = modulus.degree();
        if n == 1 {
            return Ok(LocalField { modulus, ctx, ramification: Some((1, 1)) });
        }
        let p = ctx.p();
        let m = BigInt::from(p).pow(ctx.precision());
        let ints: Option<Vec<BigInt>> = modulus.coeffs().iter().map(|c| crate::arith::rat_mod(c, &m)).collect();
        let ints = ints.ok_or(Error::NotIrreducible)?;
        let fs = FpPoly::from_bigints(&ints, p).factor();
        let ramification = match fs.as_slice() {
            [(g, 1)] if g.degree() == n => (1, n),
            [(g, e)] if g.degree() == 1 && *e == n && eisenstein_shift(&modulus, g, p) => (n, 1),
            _ => return Err(Error::NotIrreducible),
        };
        Ok(LocalField { modulus, ctx, ramification: Some(ramification) })
    }

    pub fn modulus(&self) -> &PolyQ {
        &self.modulus
    }

    pub fn ctx(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree()
    }

    pub fn ramification_index(&self) -> Option<usize> {
        self.ramification.map(|r| r.0)
    }

    pub fn residue_degree(&self) -> Option<usize> {
        self.ramification.map(|r| r.1)
    }

    pub fn reduce(&self, a: &ExtElem) -> ExtElem {
        ExtElem::new(a.residue.rem(&self.modulus))
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem::new(a.residue.mul_mod(&b.residue, &self.modulus))
    }

    pub fn trace(&self, a: &ExtElem) -> Rat {
        etale_trace(&self.modulus, &a.residue)
    }

    /// Gram matrix of `z ↦ Tr(a·z²)` on the power basis.
    pub fn trace_form(&self, a: &ExtElem) -> Mat {
        trace_form(&self.modulus, &a.residue)
    }
}

fn eisenstein_shift(m: &PolyQ, g: &FpPoly, p: u64) -> bool {
    let n = m.degree() as i64;
    let c = ((p - g.coeff(0)) % p) as i64;
    let shifted = m.compose(&PolyQ::from_i64(&[c, 1]));
    let Some(v0) = valuation(&shifted.coeff(0), p) else {
        return false;
    };
    v0.gcd(&n) == 1
        && (1..n as usize).all(|k| valuation(&shifted.coeff(k), p).is_none_or(|vk| n * vk >= v0 * (n - k as i64)))
}

/// Power sums `s_k = Σ r^k` over the roots of monic `m`, for `k < count`.
pub fn power_sums(m: &PolyQ, count: usize) -> Vec<Rat> {
    let n = m.degree();
    let c = |i: isize| if i < 0 { Rat::zero() } else { m.coeff(i as usize) };
    let mut s = Vec::with_capacity(count);
    for k in 0..count {
        if k == 0 {
            s.push(rat(n as i64));
            continue;
        }
        let mut acc = if k <= n { rat(k as i64) * c(n as isize - k as isize) } else { Rat::zero() };
        for i in 1..k.min(n + 1) {
            acc += c(n as isize - i as isize) * &s[k - i];
        }
        s.push(-acc);
    }
    s
}

/// Trace of multiplication by `a` on `Q[x]/(m)`.
pub fn etale_trace(m: &PolyQ, a: &PolyQ) -> Rat {
    let a = a.rem(m);
    let s = power_sums(m, m.degree().max(1));
    a.coeffs().iter().zip(&s).map(|(x, y)| x * y).sum()
}

/// Gram matrix `Tr(a·x^{i+j})`.
pub fn trace_form(m: &PolyQ, a: &PolyQ) -> Mat {
    let n = m.degree();
    let mut g = Mat::zeros(n, n);
    let mut pows = Vec::with_capacity(2 * n);
    let mut cur = a.rem(m);
    for _ in 0..2 * n - 1 {
        pows.push(etale_trace(m, &cur));
        cur = cur.mul_mod(&PolyQ::x(), m);
    }
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = pows[i + j].clone();
        }
    }
    g
}

/// Whether `d` is a norm from `F(√δ)`.
///
/// Over `Q_p` this is the Hilbert symbol. Over a proper extension `F`, `d` is a
/// norm iff `⟨1, −δ⟩ ≅ ⟨d, −dδ⟩` over `F`; both binary forms share a
/// determinant, and corestriction on 2-torsion Brauer classes of local fields is
/// injective, so the comparison survives transfer to `Q_p` via `Tr_{F/Q_p}`.
/// The transfer route is used for every residue characteristic.
pub fn norm_test(d: &ExtElem, delta: &ExtElem, field: &LocalField) -> Result<bool> {
    let d = field.reduce(d);
    let delta = field.reduce(delta);
    if d.residue.is_zero() || delta.residue.is_zero() {
        return Err(Error::ZeroInput);
    }
    if field.degree() == 1 {
        let at = |e: &ExtElem| e.residue.eval(&-field.modulus.coeff(0));
        return Ok(hilbert_symbol(&at(&d), &at(&delta), &field.ctx)? == 1);
    }
    let m = &field.modulus;
    let minus = |a: &PolyQ| a.scale(&rat(-1));
    let base = Mat::block_diag(&[trace_form(m, &PolyQ::one()), trace_form(m, &minus(&delta.residue))]);
    let dd = d.residue.mul_mod(&delta.residue, m);
    let twisted = Mat::block_diag(&[trace_form(m, &d.residue), trace_form(m, &minus(&dd))]);
    Ok(gram_invariant(&base, &field.ctx)?.hasse == gram_invariant(&twisted, &field.ctx)?.hasse)
}

/// The involutive algebra `E = Q_p[x]/(q)` with `ι(x) = x⁻¹`: a field when `q` is a
/// self-reciprocal irreducible, split when `q = p·p*` with `p ≠ p*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutiveAlgebra {
    modulus: PolyQ,
    split_factor: Option<PolyQ>,
    descent: Option<(PolyQ, PolyQ)>,
    iota: Mat,
}

impl InvolutiveAlgebra {
    /// Field case from a self-reciprocal `q` (made exactly palindromic first).
    pub fn field(q: &PolyQ) -> Result<Self> {
        let q = symmetrize(q)?;
        let descent = trace_descent(&q)?;
        Self::build(q, None, Some(descent))
    }

    /// Split case `q = p · p*`.
    pub fn split(p: &PolyQ) -> Result<Self> {
        let p = p.monic();
        let ps = p.star()?;
        if ps == p {
            return Err(Error::Malformed("split algebra needs p ≠ p*".into()));
        }
        Self::build(&p * &ps, Some(p), None)
    }

    fn build(modulus: PolyQ, split_factor: Option<PolyQ>, descent: Option<(PolyQ, PolyQ)>) -> Result<Self> {
        if !modulus.is_self_reciprocal() {
            return Err(Error::NotSelfReciprocal);
        }
        let n = modulus.degree();
        let xinv = PolyQ::x().inv_mod(&modulus).ok_or(Error::ZeroConstantTerm)?;
        let mut iota = Mat::zeros(n, n);
        let mut cur = PolyQ::one();
        for j in 0..n {
            for i in 0..n {
                iota[(i, j)] = cur.coeff(i);
            }
            cur = cur.mul_mod(&xinv, &modulus);
        }
        Ok(InvolutiveAlgebra { modulus, split_factor, descent, iota })
    }

    pub fn modulus(&self) -> &PolyQ {
        &self.modulus
    }

    pub fn is_split(&self) -> bool {
        self.split_factor.is_some()
    }

    pub fn split_factor(&self) -> Option<&PolyQ> {
        self.split_factor.as_ref()
    }

    /// `(g, δ)` of the fixed field, in the field case.
    pub fn descent(&self) -> Option<&(PolyQ, PolyQ)> {
        self.descent.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree()
    }

    pub fn iota_matrix(&self) -> &Mat {
        &self.iota
    }

    pub fn reduce(&self, a: &PolyQ) -> PolyQ {
        a.rem(&self.modulus)
    }

    pub fn mul(&self, a: &PolyQ, b: &PolyQ) -> PolyQ {
        a.mul_mod(b, &self.modulus)
    }

    pub fn inv(&self, a: &PolyQ) -> Option<PolyQ> {
        a.inv_mod(&self.modulus)
    }

    pub fn is_invertible(&self, a: &PolyQ) -> bool {
        let a = a.rem(&self.modulus);
        !a.is_zero() && a.gcd(&self.modulus).degree() == 0
    }

    pub fn iota(&self, a: &PolyQ) -> PolyQ {
        let a = a.rem(&self.modulus);
        let v: Vec<Rat> = (0..self.degree()).map(|i| a.coeff(i)).collect();
        PolyQ::new(self.iota.mul_vec(&v))
    }

    pub fn trace(&self, a: &PolyQ) -> Rat {
        etale_trace(&self.modulus, a)
    }

    /// Idempotents `(e₁, e₂)` for the components `p` and `p*` (split case).
    pub fn idempotents(&self) -> Option<(PolyQ, PolyQ)> {
        let p = self.split_factor.as_ref()?;
        let ps = p.star().ok()?;
        // s·p + t·p* = 1: e₁ = t·p* is 1 mod p and 0 mod p*
        let (_, s, t) = p.ext_gcd(&ps);
        let e1 = (&t * &ps).rem(&self.modulus);
        let e2 = (&s * p).rem(&self.modulus);
        Some((e1, e2))
    }

    /// Element with the given residues in the two components (split case).
    pub fn from_components(&self, a: &PolyQ, b: &PolyQ) -> Option<PolyQ> {
        let (e1, e2) = self.idempotents()?;
        Some((&(a * &e1) + &(b * &e2)).rem(&self.modulus))
    }

    pub fn components(&self, a: &PolyQ) -> Option<(PolyQ, PolyQ)> {
        let p = self.split_factor.as_ref()?;
        Some((a.rem(p), a.rem(&p.star().ok()?)))
    }
}

/// Makes a numerically self-reciprocal monic polynomial exactly palindromic.
pub fn symmetrize(q: &PolyQ) -> Result<PolyQ> {
    if q.is_self_reciprocal() {
        return Ok(q.clone());
    }
    let avg = (&q.monic() + &q.monic().reverse()).scale(&Rat::new(1.into(), 2.into()));
    if avg.is_zero() || avg.degree() != q.degree() {
        return Err(Error::NotSelfReciprocal);
    }
    let out = avg.monic();
    if out.is_self_reciprocal() {
        Ok(out)
    } else {
        Err(Error::NotSelfReciprocal)
    }
}

/// Primitive solution of `a·X² + b·Y² + c·Z² = 0` over `Z_p`, found by digit-by-digit
/// search mod `p^m` and accepted once the Hensel bound `k > 2·v(∂Q)` certifies a
/// true `Q_p` solution. Only `F = Q_p` is supported.
pub fn conic_solve(a: &ExtElem, b: &ExtElem, c: &ExtElem, field: &LocalField) -> Result<Option<[Rat; 3]>> {
    if field.degree() != 1 {
        return Err(Error::Malformed("conic search is implemented over Q_p only".into()));
    }
    let root = -field.modulus.coeff(0);
    conic_solve_qp(&a.residue.eval(&root), &b.residue.eval(&root), &c.residue.eval(&root), &field.ctx)
}

pub fn conic_solve_qp(a: &Rat, b: &Rat, c: &Rat, ctx: &PadicContext) -> Result<Option<[Rat; 3]>> {
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = ctx.p();
    // X ↦ p^k X scales a coefficient by p^{2k}: bring each to valuation 0 or 1
    let reduce = |x: &Rat| {
        let v = valuation(x, p).unwrap();
        let k = v.div_euclid(2);
        let pk = Rat::from_integer(BigInt::from(p).pow(2 * k.unsigned_abs() as u32));
        if k >= 0 {
            x / pk
        } else {
            x * pk
        }
    };
    let (a, b, c) = (&reduce(a), &reduce(b), &reduce(c));
    let den = a.denom().lcm(b.denom()).lcm(c.denom());
    let to_int = |x: &Rat| (x * Rat::from_integer(den.clone())).to_integer();
    let coeffs = [to_int(a), to_int(b), to_int(c)];
    let v2 = if p == 2 { 1 } else { 0 };
    let vabc: i64 = coeffs.iter().map(|x| valuation(&Rat::from_integer(x.clone()), p).unwrap()).sum();
    let depth = (2 * v2 + vabc + 2 * v2 + 3) as u32;
    let modulus = BigInt::from(p).pow(depth);
    if modulus.bits() > 62 {
        return Err(Error::Malformed("conic search modulus exceeds 62 bits".into()));
    }
    let m = modulus.to_u64().unwrap();
    let cm: Vec<u64> = coeffs.iter().map(|x| x.mod_floor(&modulus).to_u64().unwrap()).collect();
    let search = ConicSearch { p, depth, m, coeffs: cm };
    for pattern in 0..3 {
        if let Some(sol) = search.run(pattern) {
            return Ok(Some(sol.map(|x| rat(x as i64))));
        }
    }
    Ok(None)
}

struct ConicSearch {
    p: u64,
    depth: u32,
    m: u64,
    coeffs: Vec<u64>,
}

impl ConicSearch {
    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    fn eval(&self, v: &[u64; 3]) -> u64 {
        let mut s = 0u64;
        for i in 0..3 {
            let t = self.mulm(self.coeffs[i], self.mulm(v[i], v[i]));
            s = ((s as u128 + t as u128) % self.m as u128) as u64;
        }
        s
    }

    fn val(&self, x: u64, cap: u32) -> u32 {
        if x == 0 {
            return cap;
        }
        let mut x = x;
        let mut v = 0;
        while x % self.p == 0 && v < cap {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// Pattern `i`: coordinate `i` is 1, earlier coordinates divisible by p.
    fn run(&self, pattern: usize) -> Option<[u64; 3]> {
        let mut v = [0u64; 3];
        v[pattern] = 1;
        self.dfs(pattern, 0, 1, &mut v)
    }

    fn dfs(&self, pattern: usize, k: u32, pk: u64, v: &mut [u64; 3]) -> Option<[u64; 3]> {
        let q = self.eval(v);
        if k > 0 {
            if q % pk != 0 {
                return None;
            }
            let j = (0..3)
                .map(|i| self.val(self.mulm(2 * self.coeffs[i] % self.m, v[i]) % pk, k))
                .min()
                .unwrap();
            if k > 2 * j {
                return Some(*v);
            }
        }
        if k == self.depth {
            return None;
        }
        let free: Vec<usize> = (0..3).filter(|&i| i != pattern).collect();
        let digits = |i: usize| if k == 0 && i < pattern { 1 } else { self.p };
        for d0 in 0..digits(free[0]) {
            for d1 in 0..digits(free[1]) {
                let (s0, s1) = (v[free[0]], v[free[1]]);
                v[free[0]] = s0 + d0 * pk;
                v[free[1]] = s1 + d1 * pk;
                if let Some(sol) = self.dfs(pattern, k + 1, pk * self.p, v) {
                    return Some(sol);
                }
                v[free[0]] = s0;
                v[free[1]] = s1;
            }
        }
        None
    }
}
