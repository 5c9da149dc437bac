//! Decomposition of an isometry `σ` of a quadratic space: primary components,
//! orthogonal level splitting, residual forms and the complete invariant.
//!
//! Everything here is exact over `Q`. Components and levels are computed for the
//! irreducible factors over `Q`; the p-adic factors only enter when records are
//! produced, since a rational level block splits over `Q_p` into blocks of the
//! same level and rank for every p-adic factor dividing it.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{PadicContext, Rat};
use crate::error::{Error, Result};
use crate::hermitian::{det_norm_class, herm_from_bilinear, herm_orthogonalize, HermCase, HermInvariant};
use crate::linalg::Mat;
use crate::padic_ext::InvolutiveAlgebra;
use crate::poly::{factor_over_q, factor_padic, FactorType, PadicFactorization, PolyQ};
use crate::quadspace::{diagonalize, invariant_of_diagonal, is_isometric, QuadInvariant, QuadSpace};
use crate::realize::{BlockKind, BlockSpec};

/// A quadratic space together with an isometry of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryPair {
    space: QuadSpace,
    iso: Mat,
}

impl IsometryPair {
    pub fn new(space: QuadSpace, iso: Mat) -> Result<Self> {
        if !check_isometry(space.gram(), &iso)? {
            return Err(Error::NotAnIsometry);
        }
        Ok(IsometryPair { space, iso })
    }

    pub fn from_matrices(gram: Mat, iso: Mat, ctx: PadicContext) -> Result<Self> {
        IsometryPair::new(QuadSpace::new(gram, ctx)?, iso)
    }

    pub fn space(&self) -> &QuadSpace {
        &self.space
    }

    pub fn gram(&self) -> &Mat {
        self.space.gram()
    }

    pub fn iso(&self) -> &Mat {
        &self.iso
    }

    pub fn ctx(&self) -> &PadicContext {
        self.space.ctx()
    }

    pub fn dim(&self) -> usize {
        self.iso.rows()
    }

    pub fn char_poly(&self) -> PolyQ {
        PolyQ::new(self.iso.char_poly_coeffs())
    }

    /// The same pair in the basis given by the columns of `t`: `(tᵀGt, t⁻¹St)`.
    pub fn change_basis(&self, t: &Mat) -> Result<Self> {
        let inv = t.inverse()?;
        IsometryPair::from_matrices(self.gram().congruence(t), &(&inv * &self.iso) * t, *self.ctx())
    }

    pub fn orthogonal_sum(&self, other: &IsometryPair) -> Result<Self> {
        let space = self.space.orthogonal_sum(&other.space)?;
        IsometryPair::new(space, Mat::block_diag(&[self.iso.clone(), other.iso.clone()]))
    }

    pub fn with_ctx(&self, ctx: PadicContext) -> Result<Self> {
        IsometryPair::from_matrices(self.gram().clone(), self.iso.clone(), ctx)
    }
}

/// Whether `isoᵀ·gram·iso = gram` with `iso` invertible.
pub fn check_isometry(gram: &Mat, iso: &Mat) -> Result<bool> {
    if !gram.is_square() || !iso.is_square() || gram.rows() != iso.rows() {
        return Err(Error::SizeMismatch(format!(
            "gram is {}x{}, isometry is {}x{}",
            gram.rows(),
            gram.cols(),
            iso.rows(),
            iso.cols()
        )));
    }
    Ok(&gram.congruence(iso) == gram && !iso.det().is_zero())
}

/// How an irreducible factor over `Q` sits under `f ↦ f*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentKind {
    PlusOne,
    MinusOne,
    SelfReciprocal,
    Paired { partner: PolyQ },
}

/// `ker F(σ)^e` for an irreducible factor `F` of multiplicity `e`.
#[derive(Debug, Clone)]
pub struct PrimaryComponent {
    pub factor: PolyQ,
    pub multiplicity: usize,
    pub kind: ComponentKind,
    pub basis: Mat,
}

pub(crate) fn kind_of(f: &PolyQ) -> Result<ComponentKind> {
    if *f == PolyQ::from_i64(&[1, 1]) {
        return Ok(ComponentKind::PlusOne);
    }
    if *f == PolyQ::from_i64(&[-1, 1]) {
        return Ok(ComponentKind::MinusOne);
    }
    let s = f.star()?;
    Ok(if s == *f { ComponentKind::SelfReciprocal } else { ComponentKind::Paired { partner: s } })
}

pub fn primary_decomposition(pair: &IsometryPair) -> Result<Vec<PrimaryComponent>> {
    let n = pair.dim();
    let mut out = Vec::new();
    let mut total = 0;
    for (f, e) in factor_over_q(&pair.char_poly()) {
        let basis = f.pow(e).eval_mat(pair.iso()).kernel();
        if basis.cols() != e * f.degree() {
            return Err(Error::ProjectorInconsistency);
        }
        total += basis.cols();
        out.push(PrimaryComponent { kind: kind_of(&f)?, factor: f, multiplicity: e, basis });
    }
    if total != n {
        return Err(Error::ProjectorInconsistency);
    }
    Ok(out)
}

/// A free `Q[x]/(F^level)`-summand of rank `rank`, spanned by the chains
/// `σ^i F(σ)^j u_k` (columns ordered by k, then j, then i).
#[derive(Debug, Clone)]
pub struct LevelBlock {
    pub factor: PolyQ,
    pub level: usize,
    pub rank: usize,
    pub basis: Mat,
    pub generators: Vec<Vec<Rat>>,
}

fn nilpotency(op: &Mat, space: &Mat) -> usize {
    let mut cur = space.clone();
    let mut j = 0;
    while !cur.is_zero() {
        cur = op * &cur;
        j += 1;
    }
    j
}

fn orbit(s: &Mat, u: &[Rat], len: usize) -> Vec<Vec<Rat>> {
    let mut out = Vec::with_capacity(len);
    let mut v = u.to_vec();
    for _ in 0..len {
        out.push(v.clone());
        v = s.mul_vec(&v);
    }
    out
}

/// Generators of the top-level quotient `U / (ker op^{top-1} + op·U)` chosen in
/// column order, and the chain basis they span.
fn top_generators(s: &Mat, op: &Mat, space: &Mat, deg: usize, top: usize) -> Result<(Vec<Vec<Rat>>, Mat)> {
    let n = s.rows();
    let lower = space * &(&op.pow(top - 1) * space).kernel();
    let image = op * space;
    let mut sub = lower.hstack(&image).column_basis();
    let free = space.cols() - sub.cols();
    if free == 0 || free % deg != 0 {
        return Err(Error::RankMismatch);
    }
    let mut gens = Vec::new();
    for c in space.columns() {
        if gens.len() * deg == free {
            break;
        }
        let trial = sub.hstack(&Mat::from_columns(&orbit(s, &c, deg), n));
        if trial.rank() == sub.cols() + deg {
            sub = trial;
            gens.push(c);
        }
    }
    if gens.len() * deg != free {
        return Err(Error::RankMismatch);
    }
    let mut cols = Vec::with_capacity(gens.len() * deg * top);
    for u in &gens {
        let mut head = u.clone();
        for _ in 0..top {
            cols.extend(orbit(s, &head, deg));
            head = op.mul_vec(&head);
        }
    }
    let chain = Mat::from_columns(&cols, n);
    if chain.rank() != cols.len() {
        return Err(Error::RankMismatch);
    }
    Ok((gens, chain))
}

/// Orthogonal level splitting of one component, or of a component and its
/// reciprocal partner split jointly.
pub fn block_splitting(pair: &IsometryPair, group: &[&PrimaryComponent]) -> Result<Vec<LevelBlock>> {
    let s = pair.iso();
    let g = pair.gram();
    let ops: Vec<Mat> = group.iter().map(|c| c.factor.eval_mat(s)).collect();
    let mut spaces: Vec<Mat> = group.iter().map(|c| c.basis.clone()).collect();
    let mut out = Vec::new();
    while spaces.iter().any(|u| u.cols() > 0) {
        let tops: Vec<usize> = ops.iter().zip(&spaces).map(|(op, u)| nilpotency(op, u)).collect();
        if tops.iter().any(|&t| t != tops[0]) || tops[0] == 0 {
            return Err(Error::RankMismatch);
        }
        let top = tops[0];
        let mut chains = Vec::new();
        for (i, c) in group.iter().enumerate() {
            let deg = c.factor.degree();
            let (gens, chain) = top_generators(s, &ops[i], &spaces[i], deg, top)?;
            out.push(LevelBlock { factor: c.factor.clone(), level: top, rank: gens.len(), basis: chain.clone(), generators: gens });
            chains.push(chain);
        }
        let m = chains.iter().skip(1).fold(chains[0].clone(), |acc, c| acc.hstack(c));
        if g.congruence(&m).det().is_zero() {
            return Err(Error::DegenerateResidual);
        }
        let mt_g = &m.transpose() * g;
        for u in spaces.iter_mut() {
            let k = (&mt_g * &*u).kernel();
            *u = &*u * &k;
        }
    }
    Ok(out)
}

/// Exact residual data of a level block.
#[derive(Debug, Clone)]
pub enum Residual {
    /// `±1`, odd level: gram of `⟨(σ-σ⁻¹)^{l-1}u, v⟩` on the generators.
    Quadratic { gram: Mat },
    /// `±1`, even level: the same pairing, alternating.
    Alternating { gram: Mat },
    /// Self-reciprocal `F`: the pairing `⟨s(σ)^{l-1}u, v⟩`, `s(x) = x^{-d}F(x)`,
    /// on the `Q`-basis `σ^i u_k`, and a diagonalization of its hermitian lift
    /// over `Q[x]/(F)` (entries are ι-fixed).
    Hermitian { bilinear: Mat, diagonal: Vec<PolyQ> },
    Paired,
}

pub fn residual_form(pair: &IsometryPair, block: &LevelBlock) -> Result<Residual> {
    let s = pair.iso();
    let g = pair.gram();
    let n = pair.dim();
    let l = block.level;
    match kind_of(&block.factor)? {
        ComponentKind::PlusOne | ComponentKind::MinusOne => {
            let delta = s - &s.inverse()?;
            let lead = delta.pow(l - 1);
            let gens = Mat::from_columns(&block.generators, n);
            let b = &(&lead * &gens).transpose() * &(g * &gens);
            if b.det().is_zero() {
                return Err(Error::DegenerateResidual);
            }
            if l % 2 == 1 {
                if !b.is_symmetric() {
                    return Err(Error::DegenerateResidual);
                }
                Ok(Residual::Quadratic { gram: b })
            } else {
                if !b.is_alternating() {
                    return Err(Error::DegenerateResidual);
                }
                Ok(Residual::Alternating { gram: b })
            }
        }
        ComponentKind::SelfReciprocal => {
            let f = &block.factor;
            let deg = f.degree();
            let d = deg / 2;
            let shift = f.eval_mat(s);
            let s_f = &s.inverse()?.pow(d) * &shift;
            let lead = s_f.pow(l - 1);
            let cols: Vec<Vec<Rat>> = block.generators.iter().flat_map(|u| orbit(s, u, deg)).collect();
            let w = Mat::from_columns(&cols, n);
            let b = &(&lead * &w).transpose() * &(g * &w);
            if !b.is_symmetric() || b.det().is_zero() {
                return Err(Error::DegenerateResidual);
            }
            let comp = f.companion();
            let action = Mat::block_diag(&vec![comp; block.rank]);
            let alg = InvolutiveAlgebra::field(f)?;
            let lift = herm_from_bilinear(&b, &action, &alg)?;
            let diagonal = herm_orthogonalize(&lift.space)?.diag;
            Ok(Residual::Hermitian { bilinear: b, diagonal })
        }
        ComponentKind::Paired { .. } => Ok(Residual::Paired),
    }
}

/// The residual class attached to one (p-adic factor, level).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidualClass {
    Quadratic { invariant: QuadInvariant },
    Alternating,
    Hermitian { invariant: HermInvariant },
    Paired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub factor: PolyQ,
    #[serde(rename = "type")]
    pub factor_type: FactorType,
    pub level: usize,
    pub rank: usize,
    pub residual: ResidualClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MilnorInvariant {
    pub p: u64,
    pub char_poly: PolyQ,
    pub factorization: PadicFactorization,
    pub records: Vec<LevelRecord>,
    pub m_plus: usize,
    pub m_minus: usize,
    pub m_0: usize,
    pub m_1: usize,
    pub m_2: usize,
}

impl MilnorInvariant {
    /// Levels carrying a nonzero block of the given p-adic factor.
    pub fn levels_of(&self, factor_index: usize) -> Vec<usize> {
        let poly = &self.factorization.factors[factor_index].poly;
        self.records.iter().filter(|r| &r.factor == poly).map(|r| r.level).collect()
    }
}

/// One analyzed block: the splitting data and its residual.
#[derive(Debug, Clone)]
pub struct AnalyzedBlock {
    pub block: LevelBlock,
    pub residual: Residual,
}

/// Full output of [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    pub components: Vec<PrimaryComponent>,
    pub blocks: Vec<AnalyzedBlock>,
    /// The blocks aggregated per (factor, level), in realizable form.
    pub specs: Vec<BlockSpec>,
    pub invariant: MilnorInvariant,
}

fn sort_key(f: &PolyQ) -> (usize, Vec<String>) {
    (f.degree(), f.to_strings())
}

pub fn analyze(pair: &IsometryPair, certificate: Option<&[PolyQ]>) -> Result<Analysis> {
    let components = primary_decomposition(pair)?;
    let mut blocks = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let group: Vec<&PrimaryComponent> = match &c.kind {
            ComponentKind::Paired { partner } => {
                if sort_key(partner) < sort_key(&c.factor) {
                    continue;
                }
                let j = components.iter().position(|d| &d.factor == partner).ok_or(Error::ProjectorInconsistency)?;
                vec![&components[i], &components[j]]
            }
            _ => vec![c],
        };
        for block in block_splitting(pair, &group)? {
            let residual = residual_form(pair, &block)?;
            blocks.push(AnalyzedBlock { block, residual });
        }
    }
    let mut specs = Vec::new();
    for ab in &blocks {
        let b = &ab.block;
        let (kind, residual) = match &ab.residual {
            Residual::Quadratic { gram } => {
                let kind = if kind_of(&b.factor)? == ComponentKind::PlusOne { BlockKind::PlusOne } else { BlockKind::MinusOne };
                let diag = diagonalize(&QuadSpace::new(gram.clone(), *pair.ctx())?)?.0;
                (kind, diag.into_iter().map(PolyQ::constant).collect())
            }
            Residual::Alternating { .. } => {
                let kind = if kind_of(&b.factor)? == ComponentKind::PlusOne { BlockKind::PlusOne } else { BlockKind::MinusOne };
                (kind, Vec::new())
            }
            Residual::Hermitian { diagonal, .. } => (BlockKind::SelfReciprocal, diagonal.clone()),
            Residual::Paired => {
                // the partner's block is implied by this one
                let partner = b.factor.star()?;
                if sort_key(&partner) < sort_key(&b.factor) {
                    continue;
                }
                (BlockKind::Paired, Vec::new())
            }
        };
        specs.push(BlockSpec { factor: b.factor.clone(), kind, level: b.level, rank: b.rank, residual });
    }
    let invariant = invariant_from_specs(&specs, pair.ctx(), certificate)?;
    if invariant.char_poly != pair.char_poly() {
        return Err(Error::ProjectorInconsistency);
    }
    Ok(Analysis { components, blocks, specs, invariant })
}

pub fn milnor_invariant(pair: &IsometryPair) -> Result<MilnorInvariant> {
    Ok(analyze(pair, None)?.invariant)
}

/// Characteristic polynomial of the block a spec describes.
pub fn spec_char_poly(spec: &BlockSpec) -> Result<PolyQ> {
    let e = spec.level * spec.rank;
    Ok(match spec.kind {
        BlockKind::Paired if !spec.factor.is_self_reciprocal() => (&spec.factor * &spec.factor.star()?).pow(e),
        _ => spec.factor.pow(e),
    })
}

/// The invariant a list of block specs predicts: blocks with equal factor and
/// level are merged, then records are produced per p-adic factor.
pub fn invariant_from_specs(specs: &[BlockSpec], ctx: &PadicContext, certificate: Option<&[PolyQ]>) -> Result<MilnorInvariant> {
    if specs.is_empty() {
        return Err(Error::EmptySpec);
    }
    let char_poly = specs.iter().try_fold(PolyQ::one(), |acc, s| Ok::<_, Error>(&acc * &spec_char_poly(s)?))?;
    let fac = factor_padic(&char_poly, ctx, certificate)?;

    // (factor, level) -> (rank, kind, residual entries)
    let mut merged: Vec<(PolyQ, usize, usize, BlockKind, Vec<PolyQ>)> = Vec::new();
    let mut add = |f: PolyQ, level: usize, rank: usize, kind: BlockKind, res: &[PolyQ]| {
        match merged.iter_mut().find(|m| m.0 == f && m.1 == level) {
            Some(m) => {
                m.2 += rank;
                m.4.extend_from_slice(res);
            }
            None => merged.push((f, level, rank, kind, res.to_vec())),
        }
    };
    for s in specs {
        if s.kind == BlockKind::Paired && !s.factor.is_self_reciprocal() {
            add(s.factor.clone(), s.level, s.rank, BlockKind::Paired, &[]);
            add(s.factor.star()?, s.level, s.rank, BlockKind::Paired, &[]);
        } else if s.kind == BlockKind::Paired {
            let ones = vec![PolyQ::one(); s.rank];
            add(s.factor.clone(), s.level, s.rank, BlockKind::SelfReciprocal, &ones);
        } else {
            add(s.factor.clone(), s.level, s.rank, s.kind, &s.residual);
        }
    }

    let mut records = Vec::new();
    for (f, level, rank, kind, res) in merged {
        let over = fac.over(&f);
        if over.is_empty() {
            return Err(Error::ProjectorInconsistency);
        }
        match kind {
            BlockKind::PlusOne | BlockKind::MinusOne => {
                let residual = if level % 2 == 1 {
                    let diag: Vec<Rat> = res.iter().map(|a| a.coeff(0)).collect();
                    ResidualClass::Quadratic { invariant: invariant_of_diagonal(&diag, ctx)? }
                } else {
                    ResidualClass::Alternating
                };
                let i = over[0];
                records.push(LevelRecord { factor: fac.factors[i].poly.clone(), factor_type: fac.factors[i].factor_type, level, rank, residual });
            }
            BlockKind::SelfReciprocal => {
                let alg = InvolutiveAlgebra::field(&f)?;
                let det = res.iter().fold(PolyQ::one(), |acc, a| alg.mul(&acc, a));
                for i in over {
                    let pf = &fac.factors[i];
                    let residual = match pf.factor_type {
                        FactorType::SelfReciprocal => ResidualClass::Hermitian {
                            invariant: HermInvariant { case: HermCase::Field, rank, det_is_norm: Some(det_norm_class(&det, &pf.poly, ctx)?) },
                        },
                        _ => ResidualClass::Paired,
                    };
                    records.push(LevelRecord { factor: pf.poly.clone(), factor_type: pf.factor_type, level, rank, residual });
                }
            }
            BlockKind::Paired => {
                for i in over {
                    let pf = &fac.factors[i];
                    records.push(LevelRecord { factor: pf.poly.clone(), factor_type: pf.factor_type, level, rank, residual: ResidualClass::Paired });
                }
            }
        }
    }
    records.sort_by(|a, b| (sort_key(&a.factor), a.level).cmp(&(sort_key(&b.factor), b.level)));

    let odd_levels = |t: FactorType| records.iter().filter(|r| r.factor_type == t && r.level % 2 == 1).count();
    let m_0 = odd_levels(FactorType::PlusOne) + odd_levels(FactorType::MinusOne);
    let m_1 = fac.factors.iter().filter(|f| f.factor_type == FactorType::SelfReciprocal).count();
    let m_2 = fac.factors.iter().filter(|f| matches!(f.factor_type, FactorType::Paired(_))).count() / 2;
    Ok(MilnorInvariant { p: ctx.p(), char_poly, m_plus: fac.m_plus, m_minus: fac.m_minus, factorization: fac, records, m_0, m_1, m_2 })
}

/// Elementary-divisor profile: for each rational factor `F`, the sequence
/// `dim ker F(σ)^j`.
fn gl_profile(pair: &IsometryPair) -> Vec<(PolyQ, Vec<usize>)> {
    factor_over_q(&pair.char_poly())
        .into_iter()
        .map(|(f, e)| {
            let op = f.eval_mat(pair.iso());
            let dims = (1..=e).map(|j| pair.dim() - op.pow(j).rank()).collect();
            (f, dims)
        })
        .collect()
}

/// Whether the two isometries are conjugate in `GL(V)`.
pub fn gl_conjugate(a: &IsometryPair, b: &IsometryPair) -> bool {
    a.dim() == b.dim() && a.char_poly() == b.char_poly() && gl_profile(a) == gl_profile(b)
}

/// Whether the two isometries are conjugate by an isometry between the spaces.
pub fn o_conjugate(a: &IsometryPair, b: &IsometryPair) -> Result<bool> {
    if a.ctx().p() != b.ctx().p() {
        return Err(Error::PrimeMismatch);
    }
    if a.dim() != b.dim() || !is_isometric(a.space(), b.space())? {
        return Err(Error::AmbientNotIsometric);
    }
    if !gl_conjugate(a, b) {
        return Ok(false);
    }
    Ok(milnor_invariant(a)?.records == milnor_invariant(b)?.records)
}

/// Structural checks on an analysis: exact orthogonality of distinct blocks
/// (paired blocks meet only their partner at the same level), dimension count,
/// symmetric or alternating residuals, even unipotent blocks of Witt index
/// `dim/2`, and odd unipotent blocks isometric to the scaled residual plus
/// hyperbolic planes. Returns the first violation.
pub fn verify_structure(pair: &IsometryPair, a: &Analysis) -> std::result::Result<(), String> {
    let g = pair.gram();
    let ctx = pair.ctx();
    let total: usize = a.blocks.iter().map(|b| b.block.basis.cols()).sum();
    if total != pair.dim() {
        return Err(format!("blocks span {total} of {} dimensions", pair.dim()));
    }
    for (i, x) in a.blocks.iter().enumerate() {
        let bx = &x.block;
        if bx.basis.cols() != bx.level * bx.factor.degree() * bx.rank {
            return Err(format!("block {i} has the wrong dimension"));
        }
        for (j, y) in a.blocks.iter().enumerate().skip(i + 1) {
            let by = &y.block;
            let partners = bx.level == by.level && bx.factor.star().ok().as_ref() == Some(&by.factor) && bx.factor != by.factor;
            let cross = &bx.basis.transpose() * &(g * &by.basis);
            if !partners && !cross.is_zero() {
                return Err(format!("blocks {i} and {j} are not orthogonal"));
            }
        }
        let sub = g.congruence(&bx.basis);
        match &x.residual {
            Residual::Quadratic { gram } => {
                if !gram.is_symmetric() {
                    return Err(format!("odd residual of block {i} is not symmetric"));
                }
                let scale = if (bx.level / 2) % 2 == 0 { Rat::one() } else { -Rat::one() };
                let mut diag: Vec<Rat> = diagonalize(&QuadSpace::new(gram.clone(), *ctx).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?
                    .0
                    .into_iter()
                    .map(|d| d * &scale)
                    .collect();
                for _ in 0..(bx.level / 2) * bx.rank {
                    diag.push(Rat::one());
                    diag.push(-Rat::one());
                }
                let want = invariant_of_diagonal(&diag, ctx).map_err(|e| e.to_string())?;
                let got = crate::quadspace::gram_invariant(&sub, ctx).map_err(|e| e.to_string())?;
                if want != got {
                    return Err(format!("odd unipotent block {i} is not residual plus hyperbolic"));
                }
            }
            Residual::Alternating { gram } => {
                if !gram.is_alternating() {
                    return Err(format!("even residual of block {i} is not alternating"));
                }
                let inv = crate::quadspace::gram_invariant(&sub, ctx).map_err(|e| e.to_string())?;
                if inv.witt_index(ctx).map_err(|e| e.to_string())? * 2 != inv.dim {
                    return Err(format!("even unipotent block {i} is not hyperbolic"));
                }
            }
            Residual::Hermitian { bilinear, .. } => {
                if !bilinear.is_symmetric() {
                    return Err(format!("hermitian residual of block {i} is not symmetric"));
                }
            }
            Residual::Paired => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn ctx(p: u64) -> PadicContext {
        PadicContext::new(p, 40).unwrap()
    }

    fn pair(g: &[&[i64]], s: &[&[i64]], p: u64) -> IsometryPair {
        IsometryPair::from_matrices(Mat::from_i64(g), Mat::from_i64(s), ctx(p)).unwrap()
    }

    #[test]
    fn isometry_check() {
        let g = Mat::identity(2);
        assert!(check_isometry(&g, &Mat::from_i64(&[&[0, -1], &[1, 0]])).unwrap());
        assert!(!check_isometry(&g, &Mat::from_i64(&[&[2, 0], &[0, 1]])).unwrap());
        let h = Mat::from_i64(&[&[0, 1], &[1, 0]]);
        assert!(check_isometry(&h, &Mat::diag(&[rat(3), Rat::new(1.into(), 3.into())])).unwrap());
        assert!(matches!(check_isometry(&g, &Mat::identity(3)), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn identity_on_line() {
        let inv = milnor_invariant(&pair(&[&[1]], &[&[1]], 5)).unwrap();
        assert_eq!((inv.m_0, inv.m_1, inv.m_2), (1, 0, 0));
        assert_eq!(inv.records.len(), 1);
        assert_eq!(inv.records[0].factor_type, FactorType::MinusOne);
        assert_eq!(inv.records[0].residual, ResidualClass::Quadratic { invariant: invariant_of_diagonal(&[rat(1)], &ctx(5)).unwrap() });
    }

    #[test]
    fn reflection_pair() {
        let inv = milnor_invariant(&pair(&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, -1]], 5)).unwrap();
        assert_eq!(inv.m_0, 2);
        assert_eq!(inv.records.len(), 2);
        assert!(inv.records.iter().all(|r| r.level == 1 && r.rank == 1));
    }

    #[test]
    fn companion_on_trace_form() {
        let p = pair(&[&[2, 3], &[3, 2]], &[&[0, -1], &[1, 3]], 5);
        let inv = milnor_invariant(&p).unwrap();
        assert_eq!((inv.m_0, inv.m_1, inv.m_2), (0, 1, 0));
        assert_eq!(
            inv.records[0].residual,
            ResidualClass::Hermitian { invariant: HermInvariant { case: HermCase::Field, rank: 1, det_is_norm: Some(true) } }
        );
        let inv11 = milnor_invariant(&p.with_ctx(ctx(11)).unwrap()).unwrap();
        assert_eq!((inv11.m_1, inv11.m_2), (0, 1));
    }

    #[test]
    fn gl_and_o() {
        let a = pair(&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, -1]], 5);
        let b = pair(&[&[5, 0], &[0, 5]], &[&[1, 0], &[0, -1]], 5);
        assert!(gl_conjugate(&a, &b));
        assert!(!o_conjugate(&a, &b).unwrap());
        assert!(o_conjugate(&a, &a).unwrap());
        let c = pair(&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 1]], 5);
        assert!(!gl_conjugate(&a, &c));
    }
}
