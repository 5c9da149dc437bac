//! Whether the orthogonal conjugacy class of `σ` is all of its `GL(V)` class.

use serde::Serialize;

use crate::arith::{square_class, rat, PadicContext};
use crate::error::Result;
use crate::milnor::{LevelRecord, MilnorInvariant, ResidualClass};
use crate::poly::FactorType;
use crate::quadspace::QuadInvariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    #[serde(rename = "(i)")]
    I,
    #[serde(rename = "(ii)")]
    II,
    #[serde(rename = "(iii)")]
    III,
    #[serde(rename = "none")]
    None,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::I => "(i)",
            Condition::II => "(ii)",
            Condition::III => "(iii)",
            Condition::None => "none",
        }
    }
}

/// Why a class splits into several orthogonal classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailingClause {
    /// A self-reciprocal factor has a nonzero even level.
    EvenLevelSelfReciprocal,
    /// A self-reciprocal factor lives in two different odd levels.
    MultipleOddLevels,
    /// Two or more odd `x ± 1` levels.
    M0TooBig,
    /// Two or more self-reciprocal factors.
    Mixed,
    /// One odd `x ± 1` level next to a self-reciprocal factor, with a residual
    /// that is neither a line nor a hyperbolic plane.
    ResidualTooBig,
}

impl FailingClause {
    pub fn tag(&self) -> &'static str {
        match self {
            FailingClause::EvenLevelSelfReciprocal => "even-level-self-reciprocal",
            FailingClause::MultipleOddLevels => "multiple-odd-levels",
            FailingClause::M0TooBig => "m0-too-big",
            FailingClause::Mixed => "mixed",
            FailingClause::ResidualTooBig => "residual-too-big",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub single_class: bool,
    pub condition: Condition,
    pub m_0: usize,
    pub m_1: usize,
    pub m_2: usize,
    /// The odd level `2l+1` carrying the self-reciprocal factor, for (ii) and (iii).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    /// The odd-level `x ± 1` residual, for (iii).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<QuadInvariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_clause: Option<FailingClause>,
}

pub(crate) fn is_plane(inv: &QuadInvariant, ctx: &PadicContext) -> Result<bool> {
    Ok(inv.dim == 2 && inv.det_class == square_class(&rat(-1), ctx)?)
}

fn self_reciprocal_levels(inv: &MilnorInvariant) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (i, f) in inv.factorization.factors.iter().enumerate() {
        if f.factor_type == FactorType::SelfReciprocal {
            out.push(inv.levels_of(i));
        }
    }
    out
}

pub(crate) fn odd_unipotent_records(inv: &MilnorInvariant) -> Vec<&LevelRecord> {
    inv.records
        .iter()
        .filter(|r| matches!(r.factor_type, FactorType::PlusOne | FactorType::MinusOne) && r.level % 2 == 1)
        .collect()
}

pub fn decide_single_class(inv: &MilnorInvariant) -> Result<Verdict> {
    let ctx = PadicContext::new(inv.p, inv.factorization.precision)?;
    let mut v = Verdict {
        single_class: false,
        condition: Condition::None,
        m_0: inv.m_0,
        m_1: inv.m_1,
        m_2: inv.m_2,
        level: None,
        residual: None,
        failing_clause: None,
    };
    let fail = |mut v: Verdict, c: FailingClause| {
        v.failing_clause = Some(c);
        Ok(v)
    };
    let sr = self_reciprocal_levels(inv);
    if sr.iter().flatten().any(|l| l % 2 == 0) {
        return fail(v, FailingClause::EvenLevelSelfReciprocal);
    }
    if sr.iter().any(|ls| ls.len() > 1) {
        return fail(v, FailingClause::MultipleOddLevels);
    }
    if inv.m_0 >= 2 {
        return fail(v, FailingClause::M0TooBig);
    }
    if inv.m_1 == 0 {
        v.single_class = true;
        v.condition = Condition::I;
        return Ok(v);
    }
    if inv.m_1 >= 2 {
        return fail(v, FailingClause::Mixed);
    }
    v.level = sr[0].first().copied();
    if inv.m_0 == 0 {
        v.single_class = true;
        v.condition = Condition::II;
        return Ok(v);
    }
    let res = match &odd_unipotent_records(inv)[0].residual {
        ResidualClass::Quadratic { invariant } => invariant.clone(),
        _ => unreachable!("odd unipotent levels carry quadratic residuals"),
    };
    let small = res.dim == 1 || is_plane(&res, &ctx)?;
    v.residual = Some(res);
    if small {
        v.single_class = true;
        v.condition = Condition::III;
        Ok(v)
    } else {
        v.level = None;
        fail(v, FailingClause::ResidualTooBig)
    }
}
