//! Polynomials over `Q`, the reciprocal involution, and factorization.

mod modp;
mod padic;
mod zassenhaus;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{parse_rat, rat, rat_to_string, Rat};
use crate::error::{Error, Result};
use crate::linalg::Mat;

pub use modp::{berlekamp, FpPoly};
pub use padic::{factor_padic, FactorType, PadicFactor, PadicFactorization};
pub use zassenhaus::factor_over_q;

/// Dense polynomial with rational coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyQ {
    coeffs: Vec<Rat>,
}

impl PolyQ {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQ { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        PolyQ::new(c.iter().map(|&x| rat(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        PolyQ::new(c.iter().map(|x| Rat::from_integer(x.clone())).collect())
    }

    pub fn zero() -> Self {
        PolyQ { coeffs: vec![] }
    }

    pub fn one() -> Self {
        PolyQ::constant(Rat::one())
    }

    pub fn x() -> Self {
        PolyQ::from_i64(&[0, 1])
    }

    pub fn constant(c: Rat) -> Self {
        PolyQ::new(vec![c])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Rat::zero(); k + 1];
        c[k] = Rat::one();
        PolyQ { coeffs: c }
    }

    /// `x - a`
    pub fn linear(a: Rat) -> Self {
        PolyQ::new(vec![-a, Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn monic(&self) -> PolyQ {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        self.scale(&(Rat::one() / l))
    }

    pub fn scale(&self, c: &Rat) -> PolyQ {
        PolyQ::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    /// `self(A)` for a square matrix `A`.
    pub fn eval_mat(&self, a: &Mat) -> Mat {
        let n = a.rows();
        let mut acc = Mat::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * a;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn derivative(&self) -> PolyQ {
        PolyQ::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect(),
        )
    }

    pub fn pow(&self, e: usize) -> PolyQ {
        let mut acc = PolyQ::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `self(g(x))`
    pub fn compose(&self, g: &PolyQ) -> PolyQ {
        self.coeffs.iter().rev().fold(PolyQ::zero(), |acc, c| &(&acc * g) + &PolyQ::constant(c.clone()))
    }

    /// Coefficients reversed: `x^deg · f(1/x)`.
    pub fn reverse(&self) -> PolyQ {
        PolyQ::new(self.coeffs.iter().rev().cloned().collect())
    }

    pub fn div_rem(&self, d: &PolyQ) -> (PolyQ, PolyQ) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (PolyQ::zero(), self.clone());
        }
        let inv = Rat::one() / d.lead();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rat::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (PolyQ::new(q), PolyQ::new(r))
    }

    pub fn rem(&self, d: &PolyQ) -> PolyQ {
        self.div_rem(d).1
    }

    /// Exact quotient, if `d` divides `self`.
    pub fn exact_div(&self, d: &PolyQ) -> Option<PolyQ> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &PolyQ) -> PolyQ {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·other = g` monic.
    pub fn ext_gcd(&self, other: &PolyQ) -> (PolyQ, PolyQ, PolyQ) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (PolyQ::one(), PolyQ::zero());
        let (mut t0, mut t1) = (PolyQ::zero(), PolyQ::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        let l = Rat::one() / r0.lead();
        (r0.scale(&l), s0.scale(&l), t0.scale(&l))
    }

    /// Inverse of `self` modulo `m`, when coprime.
    pub fn inv_mod(&self, m: &PolyQ) -> Option<PolyQ> {
        let (g, s, _) = self.rem(m).ext_gcd(m);
        (g.degree() == 0 && !g.is_zero()).then(|| s.rem(m))
    }

    pub fn mul_mod(&self, other: &PolyQ, m: &PolyQ) -> PolyQ {
        (self * other).rem(m)
    }

    /// `f^* = f(0)^{-1} x^{deg f} f(1/x)`.
    pub fn star(&self) -> Result<PolyQ> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        Ok(self.reverse().scale(&(Rat::one() / c0)))
    }

    /// Whether `self` is monic and equals its own star.
    pub fn is_self_reciprocal(&self) -> bool {
        self.is_monic() && self.star().is_ok_and(|s| &s == self)
    }

    /// Yun's squarefree decomposition of a monic polynomial:
    /// pairs `(part, multiplicity)` with pairwise coprime squarefree parts.
    pub fn squarefree_decomposition(&self) -> Vec<(PolyQ, usize)> {
        let f = self.monic();
        if f.degree() == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.exact_div(&a0).expect("gcd divides");
        let mut c = df.exact_div(&a0).expect("gcd divides");
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a).expect("gcd divides");
            c = d.exact_div(&a).expect("gcd divides");
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Whether all coefficients are p-integral.
    pub fn is_p_integral(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.coeffs.iter().all(|c| !c.denom().is_multiple_of(&pb))
    }

    /// Scales to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return vec![];
        }
        let l = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| c / &g * &sign).collect()
    }

    /// Companion matrix (acting on the power basis `1, x, …, x^{n-1}`).
    pub fn companion(&self) -> Mat {
        let f = self.monic();
        let n = f.degree();
        let mut c = Mat::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = Rat::one();
        }
        for i in 0..n {
            c[(i, n - 1)] = -f.coeff(i);
        }
        c
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rat_to_string).collect()
    }

    pub fn from_strings<S: AsRef<str>>(c: &[S]) -> Result<PolyQ> {
        Ok(PolyQ::new(c.iter().map(|s| parse_rat(s.as_ref())).collect::<Result<_>>()?))
    }
}

/// `(g, δ)` with `q(x) = x^d · g(x + 1/x)` and `δ = y² − 4 mod g`.
pub fn trace_descent(q: &PolyQ) -> Result<(PolyQ, PolyQ)> {
    if q.degree() % 2 == 1 {
        return Err(Error::OddDegree);
    }
    if !q.is_self_reciprocal() {
        return Err(Error::NotSelfReciprocal);
    }
    let d = q.degree() / 2;
    // Laurent coefficients c[d + k] of x^k, k in -d..=d
    let mut laurent = q.coeffs.clone();
    let mut g = vec![Rat::zero(); d + 1];
    for k in (0..=d).rev() {
        let c = laurent[d + k].clone();
        if c.is_zero() {
            continue;
        }
        // subtract c·(x + 1/x)^k
        let mut binom = BigInt::one();
        for j in 0..=k {
            let e = 2 * j as isize - k as isize;
            let idx = (d as isize + e) as usize;
            laurent[idx] -= &c * Rat::from_integer(binom.clone());
            binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
        }
        g[k] = c;
    }
    if laurent.iter().any(|c| !c.is_zero()) {
        return Err(Error::NotSelfReciprocal);
    }
    let g = PolyQ::new(g);
    let delta = PolyQ::from_i64(&[-4, 0, 1]).rem(&g);
    Ok((g, delta))
}

impl fmt::Debug for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", rat_to_string(&a).trim_end_matches("/1"))?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for PolyQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        PolyQ::from_strings(&v).map_err(serde::de::Error::custom)
    }
}

impl Add for &PolyQ {
    type Output = PolyQ;
    fn add(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &PolyQ {
    type Output = PolyQ;
    fn sub(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &PolyQ {
    type Output = PolyQ;
    fn neg(self) -> PolyQ {
        PolyQ::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Mul for &PolyQ {
    type Output = PolyQ;
    fn mul(self, rhs: &PolyQ) -> PolyQ {
        if self.is_zero() || rhs.is_zero() {
            return PolyQ::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        PolyQ::new(out)
    }
}

/// Product of a list of polynomials.
pub fn product<'a>(it: impl IntoIterator<Item = &'a PolyQ>) -> PolyQ {
    it.into_iter().fold(PolyQ::one(), |acc, f| &acc * f)
}
