//! Exact rationals viewed p-adically: valuations, square classes and the
//! Hilbert symbol of `Q_p`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Formats as `"num/den"`; integers keep the `/1` so files stay uniform.
pub fn rat_to_string(a: &Rat) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::BadRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

/// The base field `Q_p` together with the working p-adic precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicContext {
    p: u64,
    precision: u32,
}

impl PadicContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        Ok(PadicContext { p, precision })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        PadicContext { p: self.p, precision: precision.max(1) }
    }

    pub fn p_big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// `p^precision`
    pub fn modulus(&self) -> BigInt {
        num_traits::pow(self.p_big(), self.precision as usize)
    }

    /// Least positive quadratic non-residue mod p (odd p only).
    pub fn least_nonresidue(&self) -> u64 {
        (2..self.p).find(|&a| legendre_u64(a, self.p) == -1).unwrap_or(2)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation; `None` for zero.
pub fn valuation(a: &Rat, p: u64) -> Option<i64> {
    if a.is_zero() {
        return None;
    }
    Some(int_valuation(a.numer(), p) - int_valuation(a.denom(), p))
}

/// Valuation with zero mapped to `cap`.
pub fn valuation_capped(a: &Rat, p: u64, cap: i64) -> i64 {
    valuation(a, p).map_or(cap, |v| v.min(cap))
}

pub fn legendre_u64(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let e = (p - 1) / 2;
    let mut base = a as u128;
    let m = p as u128;
    let mut acc = 1u128;
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        k >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

pub fn legendre_big(a: &BigInt, p: u64) -> i8 {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    legendre_u64(r, p)
}

/// Square-class representative of a nonzero rational in `Q_p^× / (Q_p^×)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SquareClass(i64);

impl SquareClass {
    pub fn rep(&self) -> i64 {
        self.0
    }

    pub fn to_rat(&self) -> Rat {
        rat(self.0)
    }

    /// All representatives in the documented order.
    pub fn all(ctx: &PadicContext) -> Vec<SquareClass> {
        if ctx.p() == 2 {
            [1, -1, 2, -2, 5, -5, 10, -10].into_iter().map(SquareClass).collect()
        } else {
            let u = ctx.least_nonresidue() as i64;
            let p = ctx.p() as i64;
            vec![SquareClass(1), SquareClass(u), SquareClass(p), SquareClass(u * p)]
        }
    }

    /// Unit classes only.
    pub fn units(ctx: &PadicContext) -> Vec<SquareClass> {
        Self::all(ctx)
            .into_iter()
            .filter(|c| c.0 % ctx.p() as i64 != 0)
            .collect()
    }

    pub fn mul(&self, other: &SquareClass, ctx: &PadicContext) -> SquareClass {
        square_class(&(self.to_rat() * other.to_rat()), ctx).expect("nonzero")
    }

    pub fn is_one(&self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of [`padic_profile`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicProfile {
    pub valuation: i64,
    pub unit_part: Rat,
    pub class: SquareClass,
}

fn split_unit(a: &Rat, p: u64) -> (i64, Rat) {
    let v = valuation(a, p).expect("nonzero");
    let pp = Rat::from_integer(BigInt::from(p));
    let unit = if v >= 0 {
        a / num_traits::pow(pp, v as usize)
    } else {
        a * num_traits::pow(pp, (-v) as usize)
    };
    (v, unit)
}

/// Unit residue mod 8 of a 2-adic unit rational.
fn unit_mod8(u: &Rat) -> i64 {
    let n = u.numer().mod_floor(&BigInt::from(8)).to_i64().unwrap();
    let d = u.denom().mod_floor(&BigInt::from(8)).to_i64().unwrap();
    // odd d is its own inverse mod 8
    (n * d).rem_euclid(8)
}

pub fn padic_profile(a: &Rat, ctx: &PadicContext) -> Result<PadicProfile> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = ctx.p();
    let (v, unit) = split_unit(a, p);
    let odd = v.rem_euclid(2) == 1;
    let rep = if p == 2 {
        let base = match unit_mod8(&unit) {
            1 => 1,
            3 => -5,
            5 => 5,
            7 => -1,
            _ => unreachable!("unit is odd"),
        };
        if odd {
            base * 2
        } else {
            base
        }
    } else {
        let residue = legendre_big(unit.numer(), p) * legendre_big(unit.denom(), p);
        let base = if residue == 1 { 1 } else { ctx.least_nonresidue() as i64 };
        if odd {
            base * p as i64
        } else {
            base
        }
    };
    Ok(PadicProfile { valuation: v, unit_part: unit, class: SquareClass(rep) })
}

pub fn square_class(a: &Rat, ctx: &PadicContext) -> Result<SquareClass> {
    padic_profile(a, ctx).map(|pr| pr.class)
}

pub fn is_square(a: &Rat, ctx: &PadicContext) -> Result<bool> {
    square_class(a, ctx).map(|c| c.is_one())
}

/// Hilbert symbol `(a, b)_p` via the closed-form valuation/Legendre formula
/// (odd p) or the two-adic epsilon/omega formula.
pub fn hilbert_symbol(a: &Rat, b: &Rat, ctx: &PadicContext) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = ctx.p();
    let (alpha, u) = split_unit(a, p);
    let (beta, v) = split_unit(b, p);
    if p == 2 {
        let u8 = unit_mod8(&u);
        let v8 = unit_mod8(&v);
        let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
        let omega = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
        let e = eps(u8) * eps(v8) + alpha * omega(v8) + beta * omega(u8);
        return Ok(if e.rem_euclid(2) == 0 { 1 } else { -1 });
    }
    let leg = |x: &Rat| legendre_big(x.numer(), p) * legendre_big(x.denom(), p);
    let mut s: i8 = 1;
    if (alpha * beta).rem_euclid(2) == 1 && ((p - 1) / 2) % 2 == 1 {
        s = -s;
    }
    if beta.rem_euclid(2) == 1 {
        s *= leg(&u);
    }
    if alpha.rem_euclid(2) == 1 {
        s *= leg(&v);
    }
    Ok(s)
}

/// Symmetric residue of an integer modulo `m` (in `(-m/2, m/2]`).
pub fn symmetric_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a.mod_floor(m);
    let half: BigInt = m / 2;
    if r > half {
        r - m
    } else {
        r
    }
}

/// Reduces a p-integral rational to a symmetric integer residue mod `m = p^k`.
pub fn rat_mod(a: &Rat, m: &BigInt) -> Option<BigInt> {
    let inv = a.denom().modinv(m)?;
    Some(symmetric_mod(&(a.numer() * inv), m))
}

pub fn abs_rat(a: &Rat) -> Rat {
    a.abs()
}

pub fn is_p_integral(a: &Rat, p: u64) -> bool {
    a.is_zero() || int_valuation(a.denom(), p) == 0
}

pub fn one() -> Rat {
    Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PadicContext {
        PadicContext::new(p, 20).unwrap()
    }

    #[test]
    fn profile_examples() {
        let c5 = ctx(5);
        let pr = padic_profile(&rat(50), &c5).unwrap();
        assert_eq!(pr.valuation, 2);
        assert_eq!(pr.unit_part, rat(2));
        // 2 is a non-residue mod 5: squares mod 5 are {1, 4}
        assert_eq!(pr.class, square_class(&rat(2), &c5).unwrap());
        assert_eq!(pr.class.rep(), 2);

        let pr = padic_profile(&rat(1), &ctx(7)).unwrap();
        assert_eq!((pr.valuation, pr.unit_part.clone(), pr.class.rep()), (0, rat(1), 1));

        let pr = padic_profile(&ratio(3, 5), &c5).unwrap();
        assert_eq!(pr.valuation, -1);
        assert_eq!(pr.unit_part, rat(3));
        assert_eq!(pr.class.rep(), 10); // u*p with u = 2
    }

    #[test]
    fn zero_rejected() {
        assert_eq!(padic_profile(&rat(0), &ctx(3)), Err(Error::ZeroInput));
        assert_eq!(hilbert_symbol(&rat(0), &rat(1), &ctx(3)), Err(Error::ZeroInput));
    }

    #[test]
    fn context_validation() {
        assert_eq!(PadicContext::new(9, 4), Err(Error::NotPrime(9)));
        assert_eq!(PadicContext::new(7, 0), Err(Error::ZeroPrecision));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(&rat(2), &rat(5), &ctx(5)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&rat(-1), &rat(-1), &ctx(2)).unwrap(), -1);
        for p in [2, 3, 5, 7] {
            for a in [-6, -1, 3, 10] {
                assert_eq!(hilbert_symbol(&rat(1), &rat(a), &ctx(p)).unwrap(), 1);
            }
        }
    }

    #[test]
    fn two_adic_classes() {
        let c2 = ctx(2);
        let reps: Vec<i64> = [1, 3, 5, 7, 2, 6, 10, 14]
            .iter()
            .map(|&a| square_class(&rat(a), &c2).unwrap().rep())
            .collect();
        assert_eq!(reps, vec![1, -5, 5, -1, 2, -10, 10, -2]);
        assert!(is_square(&rat(17), &c2).unwrap());
        assert!(is_square(&ratio(1, 4), &c2).unwrap());
    }

    #[test]
    fn rational_round_trip() {
        let a = ratio(-6, 4);
        assert_eq!(rat_to_string(&a), "-3/2");
        assert_eq!(parse_rat("-3/2").unwrap(), a);
        assert_eq!(parse_rat("7").unwrap(), rat(7));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
