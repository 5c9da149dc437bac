//! Explicit pairs `(G, S)` with prescribed level blocks and residual forms,
//! and the counterexample generator.
//!
//! Every block is a free module over `A = Q[x]/(P)` with `σ` acting by `x`.
//! A form `⟨a, b⟩ = φ(a·ι(b)·c)` is used, where `ι(x) = x⁻¹`, `c` is ι-fixed and
//! `φ` is an ι-invariant functional that reads off the top coefficient of the
//! expansion in powers of `s`, traced down to `Q`. With that choice the level
//! residual of the block is exactly `Tr(ū·ι(v̄)·c̄)`.

mod witness;

pub use witness::{check_witness, counterexample, CounterexampleRecipe, RecipeCase, WitnessCheck};

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{rat, PadicContext, Rat};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::milnor::IsometryPair;
use crate::padic_ext::power_sums;
use crate::poly::{factor_over_q, factor_padic, FactorType, PolyQ};
use crate::quadspace::QuadSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    PlusOne,
    MinusOne,
    SelfReciprocal,
    /// Hyperbolic over `Q_p`: either `F ≠ F*` (the block carries both), or a
    /// self-reciprocal `F` all of whose p-adic factors are paired.
    Paired,
}

/// One level block to build.
///
/// `residual` holds the diagonal of the level form: nonzero rationals for odd
/// levels of `x ± 1`, ι-fixed elements of `Q[x]/(F)` for self-reciprocal `F`,
/// nothing otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub factor: PolyQ,
    #[serde(rename = "type")]
    pub kind: BlockKind,
    pub level: usize,
    pub rank: usize,
    #[serde(default, serialize_with = "ser_entries", deserialize_with = "de_entries")]
    pub residual: Vec<PolyQ>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Scalar(String),
    Poly(Vec<String>),
}

fn ser_entries<S: Serializer>(v: &[PolyQ], s: S) -> std::result::Result<S::Ok, S::Error> {
    let out: Vec<Entry> = v
        .iter()
        .map(|p| if p.degree() == 0 { Entry::Scalar(crate::arith::rat_to_string(&p.coeff(0))) } else { Entry::Poly(p.to_strings()) })
        .collect();
    out.serialize(s)
}

fn de_entries<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<PolyQ>, D::Error> {
    let raw = Vec::<Entry>::deserialize(d)?;
    raw.into_iter()
        .map(|e| match e {
            Entry::Scalar(s) => crate::arith::parse_rat(&s).map(PolyQ::constant),
            Entry::Poly(v) => PolyQ::from_strings(&v),
        })
        .collect::<Result<Vec<_>>>()
        .map_err(serde::de::Error::custom)
}

fn plus_one() -> PolyQ {
    PolyQ::from_i64(&[1, 1])
}

fn minus_one() -> PolyQ {
    PolyQ::from_i64(&[-1, 1])
}

fn is_q_irreducible(f: &PolyQ) -> bool {
    f.is_monic() && factor_over_q(f) == vec![(f.clone(), 1)]
}

impl BlockSpec {
    pub fn unipotent(kind: BlockKind, level: usize, diag: &[Rat]) -> Self {
        let factor = if kind == BlockKind::PlusOne { plus_one() } else { minus_one() };
        BlockSpec { factor, kind, level, rank: diag.len(), residual: diag.iter().cloned().map(PolyQ::constant).collect() }
    }

    pub fn hyperbolic(kind: BlockKind, factor: PolyQ, level: usize, rank: usize) -> Self {
        BlockSpec { factor, kind, level, rank, residual: Vec::new() }
    }

    pub fn symmetric(factor: PolyQ, level: usize, diag: Vec<PolyQ>) -> Self {
        BlockSpec { factor, kind: BlockKind::SelfReciprocal, level, rank: diag.len(), residual: diag }
    }

    /// Shape checks that do not depend on the prime.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.level == 0 || self.rank == 0 {
            return bad("level and rank must be positive");
        }
        match self.kind {
            BlockKind::PlusOne | BlockKind::MinusOne => {
                let want = if self.kind == BlockKind::PlusOne { plus_one() } else { minus_one() };
                if self.factor != want {
                    return bad("factor does not match the block type");
                }
                if self.level % 2 == 1 {
                    if self.residual.len() != self.rank || self.residual.iter().any(|a| a.degree() > 0) {
                        return bad("odd level needs one rational residual entry per rank");
                    }
                    if self.residual.iter().any(|a| a.is_zero()) {
                        return Err(Error::ZeroEntry);
                    }
                } else {
                    if !self.residual.is_empty() {
                        return bad("even level takes no residual data");
                    }
                    if self.rank % 2 == 1 {
                        return Err(Error::OddRankForEvenLevel);
                    }
                }
            }
            BlockKind::SelfReciprocal => {
                let f = &self.factor;
                if f.degree() < 2 || !f.is_self_reciprocal() || !is_q_irreducible(f) {
                    return bad("factor must be self-reciprocal and irreducible of degree at least 2");
                }
                if self.residual.len() != self.rank {
                    return bad("one hermitian residual entry per rank is required");
                }
                let xinv = PolyQ::x().inv_mod(f).ok_or(Error::ZeroConstantTerm)?;
                for a in &self.residual {
                    let a = a.rem(f);
                    if a.is_zero() {
                        return Err(Error::ZeroEntry);
                    }
                    if iota(&a, &xinv, f) != a {
                        return bad("hermitian residual entries must be fixed by x -> 1/x");
                    }
                }
            }
            BlockKind::Paired => {
                if self.factor.degree() < 1 || !is_q_irreducible(&self.factor) || self.factor.coeff(0).is_zero() {
                    return bad("paired factor must be irreducible with nonzero constant term");
                }
                if self.factor == plus_one() || self.factor == minus_one() {
                    return bad("x +- 1 blocks use the plus_one/minus_one types");
                }
                if !self.residual.is_empty() {
                    return bad("paired blocks take no residual data");
                }
            }
        }
        Ok(())
    }
}

/// `a(x⁻¹)` reduced modulo `m`, given `xinv = x⁻¹ mod m`.
fn iota(a: &PolyQ, xinv: &PolyQ, m: &PolyQ) -> PolyQ {
    let mut out = PolyQ::zero();
    for c in a.coeffs().iter().rev() {
        out = &out.mul_mod(xinv, m) + &PolyQ::constant(c.clone());
    }
    out.rem(m)
}

fn coords(a: &PolyQ, n: usize) -> Vec<Rat> {
    (0..n).map(|i| a.coeff(i)).collect()
}

fn dot(w: &[Rat], a: &PolyQ) -> Rat {
    w.iter().enumerate().fold(Rat::zero(), |acc, (i, c)| acc + c * a.coeff(i))
}

/// Gram of `⟨a, b⟩ = φ(a·ι(b)·c)` on the power basis of `Q[x]/(m)`.
fn cyclic_gram(m: &PolyQ, phi: &[Rat], c: &PolyQ) -> Mat {
    let n = m.degree();
    let xinv = PolyQ::x().inv_mod(m).expect("unit");
    let mut xp = vec![c.rem(m)];
    for i in 1..n {
        xp.push(xp[i - 1].mul_mod(&PolyQ::x(), m));
    }
    let mut xi = vec![PolyQ::one()];
    for j in 1..n {
        xi.push(xi[j - 1].mul_mod(&xinv, m));
    }
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = dot(phi, &xp[i].mul_mod(&xi[j], m));
        }
    }
    g
}

/// `φ + φ∘ι` halved, as a coefficient vector on the power basis.
fn symmetrized(m: &PolyQ, phi: &[Rat]) -> Vec<Rat> {
    let n = m.degree();
    let xinv = PolyQ::x().inv_mod(m).expect("unit");
    let half = Rat::new(1.into(), 2.into());
    let mut cur = PolyQ::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push((&phi[k] + dot(phi, &cur)) * &half);
        cur = cur.mul_mod(&xinv, m);
    }
    out
}

/// The functional `a ↦ Tr_{Q[x]/(q)}(a_{l-1})` where `a = Σ a_j(x)·s^j`,
/// `deg a_j < deg q`, on `Q[x]/(q^l)`.
fn top_functional(q: &PolyQ, s: &PolyQ, l: usize) -> Result<Vec<Rat>> {
    let m = q.pow(l);
    let n = m.degree();
    let deg = q.degree();
    let mut cols = Vec::with_capacity(n);
    let mut sj = PolyQ::one();
    for _ in 0..l {
        for i in 0..deg {
            cols.push(coords(&PolyQ::monomial(i).mul_mod(&sj, &m), n));
        }
        sj = sj.mul_mod(s, &m);
    }
    let inv = Mat::from_columns(&cols, n).inverse()?;
    let traces = power_sums(q, deg);
    let mut phi = vec![Rat::zero(); n];
    for (i, t) in traces.iter().enumerate() {
        let row = inv.row((l - 1) * deg + i);
        for k in 0..n {
            phi[k] += t * &row[k];
        }
    }
    Ok(phi)
}

fn assemble_copies(m: &PolyQ, phi: &[Rat], entries: &[PolyQ], ctx: &PadicContext) -> Result<IsometryPair> {
    let grams: Vec<Mat> = entries.iter().map(|c| cyclic_gram(m, phi, c)).collect();
    let isos: Vec<Mat> = entries.iter().map(|_| m.companion()).collect();
    IsometryPair::from_matrices(Mat::block_diag(&grams), Mat::block_diag(&isos), *ctx)
}

/// Odd-level block for `x - 1` (`eigen = 1`) or `x + 1` (`eigen = -1`) whose
/// level residual has diagonal gram `diag`.
pub fn realize_unipotent_block(eigen: i8, level: usize, diag: &[Rat], ctx: &PadicContext) -> Result<IsometryPair> {
    if level % 2 == 0 {
        return Err(Error::EvenLevel);
    }
    if diag.iter().any(|a| a.is_zero()) {
        return Err(Error::ZeroEntry);
    }
    if diag.is_empty() {
        return Err(Error::EmptySpec);
    }
    let q = if eigen > 0 { minus_one() } else { plus_one() };
    let m = q.pow(level);
    let xinv = PolyQ::x().inv_mod(&m).expect("unit");
    let s = &PolyQ::x() - &xinv;
    let phi = symmetrized(&m, &top_functional(&q, &s, level)?);
    let entries: Vec<PolyQ> = diag.iter().cloned().map(PolyQ::constant).collect();
    assemble_copies(&m, &phi, &entries, ctx)
}

/// Level-`level` block for a self-reciprocal irreducible `q` whose hermitian
/// residual is `diag(herm_diag)` (entries ι-fixed in `Q[x]/(q)`).
pub fn realize_symmetric_block(q: &PolyQ, level: usize, herm_diag: &[PolyQ], ctx: &PadicContext) -> Result<IsometryPair> {
    BlockSpec::symmetric(q.clone(), level, herm_diag.to_vec()).validate()?;
    let d = q.degree() / 2;
    let m = q.pow(level);
    let xinv = PolyQ::x().inv_mod(&m).expect("unit");
    let s = xinv.pow(d).rem(&m).mul_mod(q, &m);
    let phi = symmetrized(&m, &top_functional(q, &s, level)?);
    let half = Rat::new(1.into(), 2.into());
    let lifts: Vec<PolyQ> = herm_diag.iter().map(|a| (a + &iota(a, &xinv, &m)).scale(&half)).collect();
    assemble_copies(&m, &phi, &lifts, ctx)
}

/// `R ⊕ R'` with `R = Q[x]/(p^l)`, `R' = Q[x]/(p'^l)`, both isotropic and paired
/// by `(a, b) ↦ top coefficient of a·ι(b)`.
fn hyperbolic_pair(p: &PolyQ, partner: &PolyQ, level: usize) -> Result<(Mat, Mat)> {
    let m = p.pow(level);
    let m2 = partner.pow(level);
    let n = m.degree();
    let xinv = PolyQ::x().inv_mod(&m).ok_or(Error::ZeroConstantTerm)?;
    let mut h = Mat::zeros(n, n);
    let mut xi = PolyQ::one();
    for j in 0..n {
        let mut a = xi.clone();
        for i in 0..n {
            h[(i, j)] = a.coeff(n - 1);
            a = a.mul_mod(&PolyQ::x(), &m);
        }
        xi = xi.mul_mod(&xinv, &m);
    }
    let mut g = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            g[(i, n + j)] = h[(i, j)].clone();
            g[(n + j, i)] = h[(i, j)].clone();
        }
    }
    Ok((g, Mat::block_diag(&[m.companion(), m2.companion()])))
}

/// Even-level `x ± 1` blocks (rank must be even) or blocks of a paired factor.
pub fn realize_hyperbolic_block(kind: BlockKind, factor: &PolyQ, level: usize, rank: usize, ctx: &PadicContext) -> Result<IsometryPair> {
    match kind {
        BlockKind::PlusOne | BlockKind::MinusOne => {
            if level % 2 == 1 {
                return Err(Error::OddLevelForPM1);
            }
        }
        BlockKind::Paired => {}
        BlockKind::SelfReciprocal => return Err(Error::InvalidSpec("self-reciprocal blocks are not hyperbolic".into())),
    }
    let spec = BlockSpec::hyperbolic(kind, factor.clone(), level, rank);
    spec.validate()?;
    if kind == BlockKind::Paired && factor.is_self_reciprocal() {
        let fac = factor_padic(factor, ctx, None)?;
        if fac.factors.iter().any(|f| f.factor_type == FactorType::SelfReciprocal) {
            return Err(Error::InvalidSpec(format!("{factor} has self-reciprocal factors over Q_{}", ctx.p())));
        }
        return realize_symmetric_block(factor, level, &vec![PolyQ::one(); rank], ctx);
    }
    let (copies, partner) = match kind {
        BlockKind::Paired => (rank, factor.star()?),
        _ => (rank / 2, factor.clone()),
    };
    let (g, s) = hyperbolic_pair(factor, &partner, level)?;
    let grams = vec![g; copies];
    let isos = vec![s; copies];
    IsometryPair::from_matrices(Mat::block_diag(&grams), Mat::block_diag(&isos), *ctx)
}

pub fn realize_block(spec: &BlockSpec, ctx: &PadicContext) -> Result<IsometryPair> {
    spec.validate()?;
    match spec.kind {
        BlockKind::PlusOne | BlockKind::MinusOne if spec.level % 2 == 1 => {
            let eigen = if spec.kind == BlockKind::MinusOne { 1 } else { -1 };
            let diag: Vec<Rat> = spec.residual.iter().map(|a| a.coeff(0)).collect();
            realize_unipotent_block(eigen, spec.level, &diag, ctx)
        }
        BlockKind::SelfReciprocal => realize_symmetric_block(&spec.factor, spec.level, &spec.residual, ctx),
        kind => realize_hyperbolic_block(kind, &spec.factor, spec.level, spec.rank, ctx),
    }
}

/// Orthogonal sum of the realized blocks.
pub fn assemble(specs: &[BlockSpec], ctx: &PadicContext) -> Result<IsometryPair> {
    let (first, rest) = specs.split_first().ok_or(Error::EmptySpec)?;
    rest.iter().try_fold(realize_block(first, ctx)?, |acc, s| acc.orthogonal_sum(&realize_block(s, ctx)?))
}

/// A quadratic space with the given diagonal, as a convenience for callers.
pub fn diagonal_space(entries: &[i64], ctx: &PadicContext) -> Result<QuadSpace> {
    QuadSpace::diagonal(&entries.iter().map(|&a| rat(a)).collect::<Vec<_>>(), *ctx)
}
