//! Counterexamples: a second isometry, GL-conjugate to the input and living on an
//! isometric space, whose invariant differs.
//!
//! Work happens on the block list of the analysis. A recipe picks one or two
//! blocks ("slots") and proposes replacement residuals for each; a combination
//! is accepted when the realized ambient space keeps its invariant while at
//! least one residual class changes. The winner is rebuilt and checked in full.

use num_traits::One;
use serde::{Serialize, Serializer};

use crate::arith::{hilbert_symbol, is_square, rat, rat_to_string, PadicContext, Rat, SquareClass};
use crate::decision::{decide_single_class, is_plane, FailingClause};
use crate::error::{Error, Result};
use crate::hermitian::det_norm_class;
use crate::milnor::{analyze, gl_conjugate, Analysis, IsometryPair};
use crate::poly::{FactorType, PolyQ};
use crate::quadspace::{diagonal_from_invariant, gram_invariant, invariant_of_diagonal, is_isometric, QuadInvariant};

use super::{assemble, realize_block, BlockKind, BlockSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecipeCase {
    #[serde(rename = "even-herm-twist")]
    EvenHermTwist,
    #[serde(rename = "two-odd-herm-twist")]
    TwoOddHermTwist,
    #[serde(rename = "m0-two-dims≥2")]
    M0TwoDimsAtLeastTwo,
    #[serde(rename = "hyperbolic-vs-not")]
    HyperbolicVsNot,
    #[serde(rename = "both-hyperbolic")]
    BothHyperbolic,
    #[serde(rename = "both-one-dim")]
    BothOneDim,
    #[serde(rename = "mixed-1-2")]
    Mixed12,
    #[serde(rename = "m0-m1-residual-big")]
    M0M1ResidualBig,
    /// Two odd unipotent levels whose dimensions fall outside the named cases.
    #[serde(rename = "m0-generic")]
    M0Generic,
}

fn ser_opt_rat<S: Serializer>(v: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(rat_to_string).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleRecipe {
    pub case: RecipeCase,
    #[serde(serialize_with = "ser_opt_rat", skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat", skip_serializing_if = "Option::is_none")]
    pub xi: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat", skip_serializing_if = "Option::is_none")]
    pub eta: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat", skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rat>,
    /// Multipliers applied to hermitian determinants, one per twisted block.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub twists: Vec<PolyQ>,
    /// Block list of the witness.
    pub specs: Vec<BlockSpec>,
}

impl CounterexampleRecipe {
    fn new(case: RecipeCase) -> Self {
        CounterexampleRecipe { case, gamma: None, delta: None, xi: None, eta: None, alpha: None, twists: Vec::new(), specs: Vec::new() }
    }
}

/// The three-part witness contract, evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub gl_conjugate: bool,
    pub ambient_isometric: bool,
    pub o_conjugate: bool,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.gl_conjugate && self.ambient_isometric && !self.o_conjugate
    }
}

pub fn check_witness(pair: &IsometryPair, witness: &IsometryPair) -> Result<WitnessCheck> {
    let gl = gl_conjugate(pair, witness);
    let ambient = pair.dim() == witness.dim() && is_isometric(pair.space(), witness.space())?;
    let o = gl && ambient && analyze(pair, None)?.invariant.records == analyze(witness, None)?.invariant.records;
    Ok(WitnessCheck { gl_conjugate: gl, ambient_isometric: ambient, o_conjugate: o })
}

struct SlotOption {
    spec: BlockSpec,
    ambient: QuadInvariant,
    changes: bool,
    twist: Option<PolyQ>,
}

fn block_ambient(spec: &BlockSpec, ctx: &PadicContext) -> Result<QuadInvariant> {
    gram_invariant(realize_block(spec, ctx)?.gram(), ctx)
}

fn sum_all(invs: &[QuadInvariant], ctx: &PadicContext) -> Result<Option<QuadInvariant>> {
    let mut acc: Option<QuadInvariant> = None;
    for i in invs {
        acc = Some(match acc {
            None => i.clone(),
            Some(a) => a.sum(i, ctx)?,
        });
    }
    Ok(acc)
}

/// First combination (one option per slot, odometer order) preserving the ambient
/// invariant and changing at least one slot (all slots if `all_changed`).
fn search(
    specs: &[BlockSpec],
    slots: &[usize],
    options: &[Vec<SlotOption>],
    all_changed: bool,
    ctx: &PadicContext,
) -> Result<Option<Vec<usize>>> {
    let fixed: Vec<QuadInvariant> = specs
        .iter()
        .enumerate()
        .filter(|(i, _)| !slots.contains(i))
        .map(|(_, s)| block_ambient(s, ctx))
        .collect::<Result<_>>()?;
    let target = sum_all(&specs.iter().map(|s| block_ambient(s, ctx)).collect::<Result<Vec<_>>>()?, ctx)?;
    if options.iter().any(|o| o.is_empty()) {
        return Ok(None);
    }
    let mut idx = vec![0usize; slots.len()];
    loop {
        let chosen: Vec<&SlotOption> = idx.iter().zip(options).map(|(&i, o)| &o[i]).collect();
        let ok_change = if all_changed { chosen.iter().all(|o| o.changes) } else { chosen.iter().any(|o| o.changes) };
        if ok_change {
            let mut parts = fixed.clone();
            parts.extend(chosen.iter().map(|o| o.ambient.clone()));
            if sum_all(&parts, ctx)? == target {
                return Ok(Some(idx));
            }
        }
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return Ok(None);
        }
    }
}

/// ι-fixed multipliers in `Q[x]/(F)`: square-class representatives, then
/// `r·(y + c)` with `y = x + x⁻¹`.
fn twist_candidates(f: &PolyQ, ctx: &PadicContext) -> Vec<PolyQ> {
    let reps: Vec<Rat> = SquareClass::all(ctx).iter().map(|c| c.to_rat()).collect();
    let xinv = PolyQ::x().inv_mod(f).expect("nonzero constant term");
    let y = (&PolyQ::x() + &xinv).rem(f);
    let mut out: Vec<PolyQ> = reps.iter().filter(|r| !r.is_one()).cloned().map(PolyQ::constant).collect();
    for c in [0i64, 1, -1, 2, -2, 3, -3] {
        let base = (&y + &PolyQ::constant(rat(c))).rem(f);
        if base.is_zero() {
            continue;
        }
        for r in &reps {
            let t = base.scale(r);
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

fn self_reciprocal_components<'a>(a: &'a Analysis, f: &PolyQ) -> Vec<&'a PolyQ> {
    let fac = &a.invariant.factorization;
    fac.over(f).into_iter().filter(|&i| fac.factors[i].factor_type == FactorType::SelfReciprocal).map(|i| &fac.factors[i].poly).collect()
}

/// Twist options for a self-reciprocal slot: multiply the first hermitian entry
/// by `t`; `must_flip` lists components where `t` has to be a non-norm.
fn twist_options(a: &Analysis, slot: usize, must_flip: &[&PolyQ], ctx: &PadicContext) -> Result<Vec<SlotOption>> {
    let spec = &a.specs[slot];
    let f = &spec.factor;
    let comps = self_reciprocal_components(a, f);
    let mut out = Vec::new();
    for t in twist_candidates(f, ctx) {
        let mut flips = Vec::with_capacity(comps.len());
        for q in &comps {
            flips.push(!det_norm_class(&t, q, ctx)?);
        }
        if !flips.iter().any(|&b| b) {
            continue;
        }
        if must_flip.iter().any(|q| comps.iter().zip(&flips).any(|(c, &fl)| c == q && !fl)) {
            continue;
        }
        let mut s = spec.clone();
        s.residual[0] = s.residual[0].mul_mod(&t, f);
        out.push(SlotOption { ambient: block_ambient(&s, ctx)?, spec: s, changes: true, twist: Some(t) });
    }
    Ok(out)
}

fn unipotent_option(spec: &BlockSpec, diag: Vec<Rat>, original: &QuadInvariant, ctx: &PadicContext) -> Result<SlotOption> {
    let inv = invariant_of_diagonal(&diag, ctx)?;
    let s = BlockSpec::unipotent(spec.kind, spec.level, &diag);
    Ok(SlotOption { ambient: block_ambient(&s, ctx)?, spec: s, changes: &inv != original, twist: None })
}

fn diag_of(spec: &BlockSpec) -> Vec<Rat> {
    spec.residual.iter().map(|a| a.coeff(0)).collect()
}

fn sign(half_level: usize) -> Rat {
    if half_level % 2 == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

fn scaled(d: &[Rat], c: &Rat) -> Vec<Rat> {
    d.iter().map(|a| a * c).collect()
}

fn gamma_scan(ctx: &PadicContext) -> Vec<Rat> {
    if ctx.p() == 2 {
        [2, -1, -2, 5, -5, 10, -10].into_iter().map(rat).collect()
    } else {
        let p = ctx.p() as i64;
        let u = ctx.least_nonresidue() as i64;
        vec![rat(p), rat(u), rat(u * p)]
    }
}

/// Slot index of the block holding `(rational factor of component, level)`.
fn slot_of(a: &Analysis, comp: usize, level: usize) -> Result<usize> {
    let f = &a.invariant.factorization.factors[comp].rational_factor;
    a.specs
        .iter()
        .position(|s| &s.factor == f && s.level == level)
        .ok_or_else(|| Error::ConstantSearchFailed("block for a recorded level is missing".into()))
}

fn self_reciprocal_slots(a: &Analysis) -> Vec<(usize, Vec<usize>)> {
    let fac = &a.invariant.factorization;
    (0..fac.factors.len())
        .filter(|&i| fac.factors[i].factor_type == FactorType::SelfReciprocal)
        .map(|i| (i, a.invariant.levels_of(i)))
        .collect()
}

fn odd_unipotent_slots(a: &Analysis) -> Vec<usize> {
    let mut out: Vec<usize> = (0..a.specs.len())
        .filter(|&i| matches!(a.specs[i].kind, BlockKind::PlusOne | BlockKind::MinusOne) && a.specs[i].level % 2 == 1)
        .collect();
    out.sort_by_key(|&i| (a.specs[i].factor.to_strings(), a.specs[i].level));
    out
}

fn finish(a: &Analysis, slots: &[usize], options: Vec<Vec<SlotOption>>, all_changed: bool, mut recipe: CounterexampleRecipe, ctx: &PadicContext) -> Result<CounterexampleRecipe> {
    let pick = search(&a.specs, slots, &options, all_changed, ctx)?
        .ok_or_else(|| Error::ConstantSearchFailed(format!("{:?}", recipe.case)))?;
    let mut specs = a.specs.clone();
    for (k, (&slot, &i)) in slots.iter().zip(&pick).enumerate() {
        let opt = &options[k][i];
        specs[slot] = opt.spec.clone();
        if let Some(t) = &opt.twist {
            recipe.twists.push(t.clone());
        }
    }
    recipe.specs = specs;
    Ok(recipe)
}

fn herm_recipe(a: &Analysis, clause: FailingClause, ctx: &PadicContext) -> Result<CounterexampleRecipe> {
    let sr = self_reciprocal_slots(a);
    let fac = &a.invariant.factorization;
    match clause {
        FailingClause::EvenLevelSelfReciprocal => {
            let (comp, levels) = sr.iter().find(|(_, ls)| ls.iter().any(|l| l % 2 == 0)).expect("clause guarantees an even level");
            let level = *levels.iter().find(|l| *l % 2 == 0).expect("even level");
            let slot = slot_of(a, *comp, level)?;
            let q = &fac.factors[*comp].poly;
            let opts = twist_options(a, slot, &[q], ctx)?;
            finish(a, &[slot], vec![opts], true, CounterexampleRecipe::new(RecipeCase::EvenHermTwist), ctx)
        }
        FailingClause::MultipleOddLevels => {
            let (comp, levels) = sr.iter().find(|(_, ls)| ls.len() > 1).expect("clause guarantees two levels");
            let q = &fac.factors[*comp].poly;
            let s1 = slot_of(a, *comp, levels[0])?;
            let s2 = slot_of(a, *comp, levels[1])?;
            let opts = vec![twist_options(a, s1, &[q], ctx)?, twist_options(a, s2, &[q], ctx)?];
            finish(a, &[s1, s2], opts, true, CounterexampleRecipe::new(RecipeCase::TwoOddHermTwist), ctx)
        }
        FailingClause::Mixed => {
            let (c1, l1) = (&sr[0].0, sr[0].1[0]);
            let (c2, l2) = (&sr[1].0, sr[1].1[0]);
            let (q1, q2) = (&fac.factors[*c1].poly, &fac.factors[*c2].poly);
            let s1 = slot_of(a, *c1, l1)?;
            let s2 = slot_of(a, *c2, l2)?;
            let recipe = CounterexampleRecipe::new(RecipeCase::TwoOddHermTwist);
            if s1 == s2 {
                let opts = twist_options(a, s1, &[q1, q2], ctx)?;
                finish(a, &[s1], vec![opts], true, recipe, ctx)
            } else {
                let opts = vec![twist_options(a, s1, &[q1], ctx)?, twist_options(a, s2, &[q2], ctx)?];
                finish(a, &[s1, s2], opts, true, recipe, ctx)
            }
        }
        FailingClause::ResidualTooBig => {
            let u = odd_unipotent_slots(a)[0];
            let spec = &a.specs[u];
            let inv = invariant_of_diagonal(&diag_of(spec), ctx)?;
            let flipped = QuadInvariant { hasse: -inv.hasse, ..inv.clone() };
            let uopt = unipotent_option(spec, diagonal_from_invariant(&flipped, ctx)?, &inv, ctx)?;
            let (comp, levels) = &sr[0];
            let slot = slot_of(a, *comp, levels[0])?;
            let q = &fac.factors[*comp].poly;
            let opts = vec![vec![uopt], twist_options(a, slot, &[q], ctx)?];
            finish(a, &[u, slot], opts, true, CounterexampleRecipe::new(RecipeCase::M0M1ResidualBig), ctx)
        }
        FailingClause::M0TooBig => unreachable!("handled by the unipotent recipes"),
    }
}

fn unipotent_recipe(a: &Analysis, ctx: &PadicContext) -> Result<CounterexampleRecipe> {
    let slots = odd_unipotent_slots(a);
    let (mut sa, mut sb) = (slots[0], slots[1]);
    let inv_of = |s: usize| invariant_of_diagonal(&diag_of(&a.specs[s]), ctx);
    let (mut ia, mut ib) = (inv_of(sa)?, inv_of(sb)?);
    let plane_a = is_plane(&ia, ctx)?;
    let plane_b = is_plane(&ib, ctx)?;
    let one_opt = |s: usize, d: Vec<Rat>, orig: &QuadInvariant| unipotent_option(&a.specs[s], d, orig, ctx);

    // put the hyperbolic plane, or the line, in slot a
    if (ia.dim == 2 && ib.dim == 2 && plane_b && !plane_a) || (ia.dim == 2 && ib.dim == 1) {
        std::mem::swap(&mut sa, &mut sb);
        std::mem::swap(&mut ia, &mut ib);
    }
    let (plane_a, plane_b) = (is_plane(&ia, ctx)?, is_plane(&ib, ctx)?);
    let (da, db) = (diag_of(&a.specs[sa]), diag_of(&a.specs[sb]));
    let (la, lb) = ((a.specs[sa].level - 1) / 2, (a.specs[sb].level - 1) / 2);

    if ia.dim >= 2 && ib.dim >= 2 && !plane_a && !plane_b {
        let fa = diagonal_from_invariant(&QuadInvariant { hasse: -ia.hasse, ..ia.clone() }, ctx)?;
        let fb = diagonal_from_invariant(&QuadInvariant { hasse: -ib.hasse, ..ib.clone() }, ctx)?;
        let opts = vec![vec![one_opt(sa, fa, &ia)?], vec![one_opt(sb, fb, &ib)?]];
        return finish(a, &[sa, sb], opts, true, CounterexampleRecipe::new(RecipeCase::M0TwoDimsAtLeastTwo), ctx);
    }
    if ia.dim == 2 && ib.dim == 2 && plane_a && !plane_b {
        let na = scaled(&db, &sign(lb + la));
        let nb = vec![rat(1), rat(-1)];
        let opts = vec![vec![one_opt(sa, na, &ia)?], vec![one_opt(sb, nb, &ib)?]];
        return finish(a, &[sa, sb], opts, true, CounterexampleRecipe::new(RecipeCase::HyperbolicVsNot), ctx);
    }
    if plane_a && plane_b {
        let units: Vec<Rat> = SquareClass::units(ctx).iter().map(|c| c.to_rat()).collect();
        let mut found = None;
        'outer: for c in SquareClass::all(ctx) {
            for h in [1i8, -1] {
                let n = QuadInvariant { dim: 2, det_class: c, hasse: h };
                if !n.is_admissible(ctx)? || is_plane(&n, ctx)? {
                    continue;
                }
                let mut all = true;
                for u in &units {
                    all &= n.represents(u, ctx)?;
                }
                if all {
                    found = Some(diagonal_from_invariant(&n, ctx)?);
                    break 'outer;
                }
            }
        }
        let n = found.ok_or_else(|| Error::ConstantSearchFailed("no binary form represents all units".into()))?;
        let opts = vec![vec![one_opt(sa, scaled(&n, &sign(la)), &ia)?], vec![one_opt(sb, scaled(&n, &sign(lb)), &ib)?]];
        return finish(a, &[sa, sb], opts, true, CounterexampleRecipe::new(RecipeCase::BothHyperbolic), ctx);
    }
    if ia.dim == 1 && ib.dim == 1 {
        let delta = &da[0] * &db[0] * sign(la) * sign(lb);
        let mut gamma = None;
        for g in gamma_scan(ctx) {
            if !is_square(&g, ctx)? && hilbert_symbol(&g, &-delta.clone(), ctx)? == 1 {
                gamma = Some(g);
                break;
            }
        }
        let g = gamma.ok_or_else(|| Error::ConstantSearchFailed("gamma".into()))?;
        let opts = vec![vec![one_opt(sa, scaled(&da, &g), &ia)?], vec![one_opt(sb, scaled(&db, &g), &ib)?]];
        let mut recipe = CounterexampleRecipe::new(RecipeCase::BothOneDim);
        recipe.gamma = Some(g);
        recipe.delta = Some(delta);
        return finish(a, &[sa, sb], opts, true, recipe, ctx);
    }
    if ia.dim == 1 && ib.dim == 2 {
        let eps = sign(la + lb);
        let alpha = da[0].clone();
        let wb = invariant_of_diagonal(&scaled(&db, &eps), ctx)?;
        let mut xi = None;
        for c in SquareClass::all(ctx) {
            let x = c.to_rat();
            if wb.represents(&x, ctx)? && !is_square(&(&x / &alpha), ctx)? {
                xi = Some(x);
                break;
            }
        }
        let xi = xi.ok_or_else(|| Error::ConstantSearchFailed("xi".into()))?;
        let eta = &db[0] * &db[1] / &xi;
        let nb = vec![&eps * &alpha, &eps * &eta];
        let opts = vec![vec![one_opt(sa, vec![xi.clone()], &ia)?], vec![one_opt(sb, nb, &ib)?]];
        let mut recipe = CounterexampleRecipe::new(RecipeCase::Mixed12);
        recipe.xi = Some(xi);
        recipe.eta = Some(eta);
        recipe.alpha = Some(alpha);
        return finish(a, &[sa, sb], opts, true, recipe, ctx);
    }
    // remaining dimension patterns: search all admissible residual pairs
    let all_of = |s: usize, inv: &QuadInvariant| -> Result<Vec<SlotOption>> {
        let mut out = Vec::new();
        for c in SquareClass::all(ctx) {
            for h in [1i8, -1] {
                let cand = QuadInvariant { dim: inv.dim, det_class: c, hasse: h };
                if cand.is_admissible(ctx)? {
                    out.push(one_opt(s, diagonal_from_invariant(&cand, ctx)?, inv)?);
                }
            }
        }
        Ok(out)
    };
    let opts = vec![all_of(sa, &ia)?, all_of(sb, &ib)?];
    finish(a, &[sa, sb], opts, false, CounterexampleRecipe::new(RecipeCase::M0Generic), ctx)
}

/// A witness pair that is GL-conjugate but not orthogonally conjugate to `pair`,
/// or `None` when the orthogonal class is the whole GL class.
pub fn counterexample(pair: &IsometryPair, certificate: Option<&[PolyQ]>) -> Result<Option<(IsometryPair, CounterexampleRecipe)>> {
    let ctx = *pair.ctx();
    let a = analyze(pair, certificate)?;
    let verdict = decide_single_class(&a.invariant)?;
    let clause = match verdict.failing_clause {
        None => return Ok(None),
        Some(c) => c,
    };
    let recipe = match clause {
        FailingClause::M0TooBig => unipotent_recipe(&a, &ctx)?,
        other => herm_recipe(&a, other, &ctx)?,
    };
    let witness = assemble(&recipe.specs, &ctx)?;
    let wa = analyze(&witness, certificate)?;
    let ok = gl_conjugate(pair, &witness)
        && is_isometric(pair.space(), witness.space())?
        && wa.invariant.records != a.invariant.records;
    if !ok {
        return Err(Error::ConstantSearchFailed(format!("witness for {} failed verification", clause.tag())));
    }
    Ok(Some((witness, recipe)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::realize::realize_symmetric_block;

    fn ctx(p: u64) -> PadicContext {
        PadicContext::new(p, 40).unwrap()
    }

    #[test]
    fn reflection_pair_witness() {
        let pair = IsometryPair::from_matrices(Mat::identity(2), Mat::diag(&[rat(1), rat(-1)]), ctx(5)).unwrap();
        let (w, r) = counterexample(&pair, None).unwrap().unwrap();
        assert_eq!(r.case, RecipeCase::BothOneDim);
        assert_eq!((r.gamma.clone(), r.delta.clone()), (Some(rat(5)), Some(rat(1))));
        assert!(check_witness(&pair, &w).unwrap().holds());
    }

    #[test]
    fn even_level_twist() {
        let q = PolyQ::from_i64(&[1, -3, 1]);
        let pair = realize_symmetric_block(&q, 2, &[PolyQ::one()], &ctx(5)).unwrap();
        let (w, r) = counterexample(&pair, None).unwrap().unwrap();
        assert_eq!(r.case, RecipeCase::EvenHermTwist);
        assert_eq!(r.twists, vec![PolyQ::constant(rat(2))]);
        assert!(check_witness(&pair, &w).unwrap().holds());
    }

    #[test]
    fn single_class_has_none() {
        let pair = IsometryPair::from_matrices(Mat::identity(1), Mat::identity(1), ctx(5)).unwrap();
        assert!(counterexample(&pair, None).unwrap().is_none());
    }
}
