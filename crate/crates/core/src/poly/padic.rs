//! Typed factorization of a characteristic polynomial over `Q_p`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::modp::{hensel_lift, zsymmetric, FpPoly, ZPoly};
use super::zassenhaus::{factor_over_q, sort_key};
use super::PolyQ;
use crate::arith::{valuation, PadicContext};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorType {
    PlusOne,
    MinusOne,
    SelfReciprocal,
    Paired(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicFactor {
    /// Monic factor; coefficients are exact lifts mod `p^precision`.
    pub poly: PolyQ,
    pub multiplicity: usize,
    #[serde(rename = "type")]
    pub factor_type: FactorType,
    /// The irreducible factor over `Q` this one divides.
    pub rational_factor: PolyQ,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicFactorization {
    pub factors: Vec<PadicFactor>,
    pub m_plus: usize,
    pub m_minus: usize,
    pub precision: u32,
    pub p: u64,
}

impl PadicFactorization {
    /// `∏ poly^multiplicity`.
    pub fn expand(&self) -> PolyQ {
        self.factors.iter().fold(PolyQ::one(), |acc, f| &acc * &f.poly.pow(f.multiplicity))
    }

    /// Indices of the p-adic factors lying over a rational factor.
    pub fn over(&self, rational: &PolyQ) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| &self.factors[i].rational_factor == rational).collect()
    }
}

/// Whether `a ≡ b` coefficientwise modulo `p^n`.
pub fn congruent_mod(a: &PolyQ, b: &PolyQ, p: u64, n: u32) -> bool {
    let d = a - b;
    d.coeffs().iter().all(|c| valuation(c, p).is_none_or(|v| v >= n as i64))
}

fn to_int_poly(f: &PolyQ, m: &BigInt) -> Option<ZPoly> {
    f.coeffs().iter().map(|c| crate::arith::rat_mod(c, m)).collect()
}

fn from_int_poly(z: &[BigInt], m: &BigInt) -> PolyQ {
    PolyQ::from_bigints(&zsymmetric(z, m))
}

/// Factors `f` over `Q_p` and types each factor by the reciprocal involution.
pub fn factor_padic(f: &PolyQ, ctx: &PadicContext, certificate: Option<&[PolyQ]>) -> Result<PadicFactorization> {
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if f.coeff(0).is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let base = ctx.precision();
    let mut last = Error::PrecisionExhausted(base);
    for mult in [1u32, 2, 4, 8] {
        match factor_at(f, ctx.p(), base * mult, certificate) {
            Err(Error::PrecisionExhausted(_)) => last = Error::PrecisionExhausted(base * mult),
            other => return other,
        }
    }
    Err(last)
}

fn factor_at(f: &PolyQ, p: u64, n: u32, certificate: Option<&[PolyQ]>) -> Result<PadicFactorization> {
    let plus = PolyQ::from_i64(&[1, 1]);
    let minus = PolyQ::from_i64(&[-1, 1]);
    let mut entries: Vec<(PolyQ, usize, PolyQ)> = Vec::new();
    let (mut m_plus, mut m_minus) = (0, 0);
    let mut fixed: Vec<(usize, FactorType)> = Vec::new();
    for (big_f, e) in factor_over_q(f) {
        if big_f == plus {
            m_plus = e;
            fixed.push((entries.len(), FactorType::PlusOne));
            entries.push((big_f.clone(), e, big_f));
            continue;
        }
        if big_f == minus {
            m_minus = e;
            fixed.push((entries.len(), FactorType::MinusOne));
            entries.push((big_f.clone(), e, big_f));
            continue;
        }
        for q in split_rational(&big_f, p, n, certificate)? {
            entries.push((q, e, big_f.clone()));
        }
    }
    let mut factors = Vec::with_capacity(entries.len());
    for (i, (q, e, parent)) in entries.iter().enumerate() {
        let factor_type = match fixed.iter().find(|(j, _)| *j == i) {
            Some((_, t)) => *t,
            None => type_factor(i, q, parent, &entries, p, n)?,
        };
        factors.push(PadicFactor { poly: q.clone(), multiplicity: *e, factor_type, rational_factor: parent.clone() });
    }
    Ok(PadicFactorization { factors, m_plus, m_minus, precision: n, p })
}

fn agreement(a: &PolyQ, b: &PolyQ, p: u64, cap: i64) -> i64 {
    if a.degree() != b.degree() {
        return i64::MIN;
    }
    (a - b).coeffs().iter().map(|c| valuation(c, p).unwrap_or(cap).min(cap)).min().unwrap_or(cap)
}

fn type_factor(
    i: usize,
    q: &PolyQ,
    parent: &PolyQ,
    entries: &[(PolyQ, usize, PolyQ)],
    p: u64,
    n: u32,
) -> Result<FactorType> {
    let qs = q.star().map_err(|_| Error::PrecisionExhausted(n))?;
    let partner_parent = parent.star()?;
    let mut best: Option<(i64, usize)> = None;
    for (j, (cand, _, par)) in entries.iter().enumerate() {
        if *par != partner_parent {
            continue;
        }
        let a = agreement(&qs, cand, p, n as i64);
        if best.is_none_or(|(b, _)| a > b) {
            best = Some((a, j));
        }
    }
    match best {
        Some((a, j)) if a >= (n as i64) / 2 => Ok(if j == i { FactorType::SelfReciprocal } else { FactorType::Paired(j) }),
        Some(_) => Err(Error::PrecisionExhausted(n)),
        None => Err(Error::Malformed(format!("factor {parent} has no reciprocal partner"))),
    }
}

/// Monic p-adic factors of a rational irreducible `big_f`, at precision `n`.
fn split_rational(big_f: &PolyQ, p: u64, n: u32, certificate: Option<&[PolyQ]>) -> Result<Vec<PolyQ>> {
    let regular = if big_f.is_p_integral(p) {
        split_integral(big_f, p, n)
    } else {
        let s = big_f.star()?;
        if s.is_p_integral(p) {
            split_integral(&s, p, n).and_then(|fs| fs.iter().map(|g| g.star()).collect::<Result<Vec<_>>>())
        } else {
            Err(Error::NotPRegular(big_f.to_string(), p))
        }
    };
    let mut out = match regular {
        Err(Error::NotPRegular(s, q)) => match certificate {
            Some(cert) => use_certificate(big_f, cert, p, n)?,
            None => return Err(Error::NotPRegular(s, q)),
        },
        other => other?,
    };
    out.sort_by_key(sort_key);
    Ok(out)
}

fn split_integral(big_f: &PolyQ, p: u64, n: u32) -> Result<Vec<PolyQ>> {
    let m = BigInt::from(p).pow(n);
    let fz = to_int_poly(big_f, &m).expect("p-integral");
    let fbar = FpPoly::from_bigints(&fz, p);
    let clusters = fbar.factor();
    let cluster_polys: Vec<FpPoly> = clusters
        .iter()
        .map(|(g, e)| (0..*e).fold(FpPoly::one(p), |acc, _| acc.mul(g)))
        .collect();
    let lifted = hensel_lift(&fz, &cluster_polys, n);
    let mut out = Vec::new();
    for ((g, e), big_g) in clusters.iter().zip(lifted) {
        let q = from_int_poly(&big_g, &m);
        if *e > 1 && !shifted_eisenstein(&q, g, *e, p, n)? {
            return Err(Error::NotPRegular(big_f.to_string(), p));
        }
        out.push(q);
    }
    Ok(out)
}

/// For `q ≡ (x - c)^e (mod p)`: tests that `q(x + c)` has a one-segment Newton
/// polygon whose slope has denominator `e` (which forces irreducibility).
fn shifted_eisenstein(q: &PolyQ, gbar: &FpPoly, e: usize, p: u64, n: u32) -> Result<bool> {
    if gbar.degree() != 1 {
        return Ok(false);
    }
    let c = (p - gbar.coeff(0)) % p;
    let shifted = q.compose(&PolyQ::from_i64(&[c as i64, 1]));
    let v = |k: usize| valuation(&shifted.coeff(k), p).map(|x| x.min(n as i64));
    let Some(v0) = v(0).filter(|&x| x < n as i64) else {
        return Err(Error::PrecisionExhausted(n));
    };
    if v0.gcd(&(e as i64)) != 1 {
        return Ok(false);
    }
    for k in 1..e {
        let vk = v(k).unwrap_or(n as i64);
        if (e as i64) * vk < v0 * (e - k) as i64 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn certified_irreducible(q: &PolyQ, p: u64, n: u32) -> Result<bool> {
    let m = BigInt::from(p).pow(n);
    let Some(z) = to_int_poly(q, &m) else {
        return Ok(false);
    };
    let qbar = FpPoly::from_bigints(&z, p);
    if qbar.degree() != q.degree() {
        return Ok(false);
    }
    let fs = qbar.factor();
    if fs.len() == 1 && fs[0].1 == 1 {
        return Ok(true);
    }
    if fs.len() == 1 {
        return shifted_eisenstein(q, &fs[0].0, fs[0].1, p, n);
    }
    Ok(false)
}

fn use_certificate(big_f: &PolyQ, cert: &[PolyQ], p: u64, n: u32) -> Result<Vec<PolyQ>> {
    let bad = |why: &str| Error::BadCertificate(format!("{why} for {big_f}"));
    let mut chosen = Vec::new();
    for q in cert {
        if !q.is_monic() || !q.is_p_integral(p) || q.degree() == 0 {
            continue;
        }
        let r = big_f.rem(q);
        if congruent_mod(&r, &PolyQ::zero(), p, n) {
            chosen.push(q.clone());
        }
    }
    if chosen.is_empty() {
        return Err(bad("no certified factor divides"));
    }
    for q in &chosen {
        if !certified_irreducible(q, p, n)? {
            return Err(bad(&format!("cannot certify irreducibility of {q}")));
        }
    }
    let prod = chosen.iter().fold(PolyQ::one(), |a, b| &a * b);
    if prod.degree() != big_f.degree() || !congruent_mod(&prod, big_f, p, n) {
        return Err(bad("product check failed"));
    }
    Ok(chosen)
}
