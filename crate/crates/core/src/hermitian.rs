//! Hermitian spaces over an involutive algebra `E`: non-degeneracy, orthogonal
//! bases, the trace lift from bilinear forms, and invariant records.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{rat, PadicContext, Rat};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::padic_ext::{symmetrize, InvolutiveAlgebra};
use crate::poly::PolyQ;
use crate::quadspace::gram_invariant;

/// Hermitian form `h` with `h(λu, v) = λ·h(u, v)` and `h(v, u) = ι(h(u, v))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermSpace {
    algebra: InvolutiveAlgebra,
    gram: Vec<Vec<PolyQ>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HermCase {
    Field,
    Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HermInvariant {
    pub case: HermCase,
    pub rank: usize,
    /// Field case only: whether the determinant is a norm from `K` to its fixed field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_is_norm: Option<bool>,
}

/// Output of [`herm_orthogonalize`]: `basis[j]` is the j-th new vector in old
/// coordinates; the gram in the new basis is `diag`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orthogonalization {
    pub basis: Vec<Vec<PolyQ>>,
    pub diag: Vec<PolyQ>,
}

impl HermSpace {
    pub fn new(algebra: InvolutiveAlgebra, gram: Vec<Vec<PolyQ>>) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch("hermitian gram must be square".into()));
        }
        let gram: Vec<Vec<PolyQ>> = gram.iter().map(|r| r.iter().map(|a| algebra.reduce(a)).collect()).collect();
        for i in 0..n {
            for j in 0..=i {
                if gram[j][i] != algebra.iota(&gram[i][j]) {
                    return Err(Error::Malformed("gram is not hermitian".into()));
                }
            }
        }
        Ok(HermSpace { algebra, gram })
    }

    pub fn algebra(&self) -> &InvolutiveAlgebra {
        &self.algebra
    }

    pub fn gram(&self) -> &[Vec<PolyQ>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// `h(u, v)` for coordinate vectors over `E`.
    pub fn eval(&self, u: &[PolyQ], v: &[PolyQ]) -> PolyQ {
        let e = &self.algebra;
        let mut acc = PolyQ::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                acc = &acc + &e.mul(&e.mul(ui, &e.iota(vj)), &self.gram[i][j]);
            }
        }
        e.reduce(&acc)
    }
}

/// Matrix of multiplication by `a` on the power basis of `E`.
fn mult_matrix(e: &InvolutiveAlgebra, a: &PolyQ) -> Mat {
    let n = e.degree();
    let mut m = Mat::zeros(n, n);
    let mut cur = e.reduce(a);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = cur.coeff(i);
        }
        cur = e.mul(&cur, &PolyQ::x());
    }
    m
}

/// `det(gram)` is a unit of `E`, tested through the regular representation.
pub fn herm_nondegenerate(m: &HermSpace) -> bool {
    let n = m.rank();
    if n == 0 {
        return true;
    }
    let d = m.algebra.degree();
    let mut big = Mat::zeros(n * d, n * d);
    for i in 0..n {
        for j in 0..n {
            let b = mult_matrix(&m.algebra, &m.gram[i][j]);
            for r in 0..d {
                for c in 0..d {
                    big[(i * d + r, j * d + c)] = b[(r, c)].clone();
                }
            }
        }
    }
    !big.det().is_zero()
}

/// Small candidate scalars for the pivot search.
fn candidates(e: &InvolutiveAlgebra) -> Vec<PolyQ> {
    let mut base: Vec<PolyQ> = Vec::new();
    for k in 0..e.degree().max(1) {
        for c in [1, -1, 2, -2, 3] {
            base.push(PolyQ::monomial(k).scale(&rat(c)));
        }
    }
    base.push(PolyQ::from_i64(&[1, 1]));
    base.push(PolyQ::from_i64(&[1, -1]));
    if !e.is_split() {
        return base;
    }
    let mut pairs = Vec::new();
    let mut comps = vec![PolyQ::zero()];
    comps.extend(base.iter().cloned());
    for a in &comps {
        for b in &comps {
            if let Some(z) = e.from_components(a, b) {
                if !z.is_zero() {
                    pairs.push(z);
                }
            }
        }
    }
    pairs
}

struct Gauss<'a> {
    e: &'a InvolutiveAlgebra,
    g: Vec<Vec<PolyQ>>,
    basis: Vec<Vec<PolyQ>>,
}

impl Gauss<'_> {
    /// `e_i ← e_i + c·e_j`
    fn add(&mut self, i: usize, j: usize, c: &PolyQ) {
        let e = self.e;
        let n = self.g.len();
        for m in 0..n {
            let t = e.mul(c, &self.g[j][m]);
            self.g[i][m] = e.reduce(&(&self.g[i][m] + &t));
        }
        let cb = e.iota(c);
        for m in 0..n {
            let t = e.mul(&cb, &self.g[m][j]);
            self.g[m][i] = e.reduce(&(&self.g[m][i] + &t));
        }
        for r in 0..n {
            let t = e.mul(c, &self.basis[j][r]);
            self.basis[i][r] = e.reduce(&(&self.basis[i][r] + &t));
        }
    }

    /// `e_i ← s·e_i`
    fn scale(&mut self, i: usize, s: &PolyQ) {
        let e = self.e;
        let n = self.g.len();
        for m in 0..n {
            self.g[i][m] = e.mul(s, &self.g[i][m]);
        }
        let sb = e.iota(s);
        for m in 0..n {
            self.g[m][i] = e.mul(&sb, &self.g[m][i]);
        }
        for r in 0..n {
            self.basis[i][r] = e.mul(s, &self.basis[i][r]);
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.g.swap(a, b);
        for row in self.g.iter_mut() {
            row.swap(a, b);
        }
        self.basis.swap(a, b);
    }
}

/// Orthogonal basis by hermitian Gauss elimination. In the split case every
/// diagonal entry is normalized to 1; in the field case diagonal entries are
/// ι-fixed and left as found.
pub fn herm_orthogonalize(m: &HermSpace) -> Result<Orthogonalization> {
    let e = &m.algebra;
    let n = m.rank();
    let mut st = Gauss {
        e,
        g: m.gram.clone(),
        basis: (0..n).map(|i| (0..n).map(|r| if r == i { PolyQ::one() } else { PolyQ::zero() }).collect()).collect(),
    };
    let cands = candidates(e);
    for k in 0..n {
        if let Some(i) = (k..n).find(|&i| e.is_invertible(&st.g[i][i])) {
            st.swap(k, i);
        } else {
            if (k..n).all(|i| (k..n).all(|j| st.g[i][j].is_zero())) {
                return Err(Error::DegenerateInput);
            }
            let mut done = false;
            'search: for j in k..n {
                for i in k..n {
                    if i == j {
                        continue;
                    }
                    for lam in &cands {
                        // value of e_j + λ e_i
                        let gjj = &st.g[j][j];
                        let t1 = e.mul(lam, &st.g[i][j]);
                        let t2 = e.iota(&t1);
                        let t3 = e.mul(&e.mul(lam, &e.iota(lam)), &st.g[i][i]);
                        let val = e.reduce(&(&(&(gjj + &t1) + &t2) + &t3));
                        if e.is_invertible(&val) {
                            st.add(j, i, lam);
                            st.swap(k, j);
                            done = true;
                            break 'search;
                        }
                    }
                }
            }
            if !done {
                return Err(Error::SearchExhausted("no invertible pivot among candidate scalars".into()));
            }
        }
        let a = st.g[k][k].clone();
        let inv = e.inv(&a).ok_or(Error::DegenerateInput)?;
        for i in k + 1..n {
            if !st.g[i][k].is_zero() {
                let c = e.mul(&st.g[i][k], &inv).scale(&rat(-1));
                st.add(i, k, &c);
            }
        }
        if let Some((e1, e2)) = e.idempotents() {
            // β = (α, 1) satisfies β·ι(β) = α for ι-fixed α
            let beta = e.reduce(&(&e.mul(&a, &e1) + &e2));
            let binv = e.inv(&beta).ok_or(Error::DegenerateInput)?;
            st.scale(k, &binv);
        }
    }
    let diag = (0..n).map(|i| st.g[i][i].clone()).collect();
    Ok(Orthogonalization { basis: st.basis, diag })
}

/// Result of [`herm_from_bilinear`]: the hermitian space and the `k`-basis
/// `x^i·u_k` (columns, k-major) it is expressed in.
#[derive(Debug, Clone)]
pub struct HermLift {
    pub space: HermSpace,
    pub generators: Vec<Vec<Rat>>,
    pub k_basis: Mat,
}

/// Chooses `E`-module generators among the columns of `span` (column order) so
/// that the spans `{x^i u}` are independent. Returns the generators.
pub(crate) fn free_generators(x_action: &Mat, span: &Mat, deg: usize) -> Option<Vec<Vec<Rat>>> {
    let n = x_action.rows();
    let target = span.rank();
    let mut gens = Vec::new();
    let mut current = Mat::zeros(n, 0);
    let mut pool: Vec<Vec<Rat>> = span.columns();
    let m = pool.len();
    for a in 0..m {
        for b in a + 1..m {
            let s: Vec<Rat> = pool[a].iter().zip(&pool[b]).map(|(x, y)| x + y).collect();
            pool.push(s);
        }
    }
    for cand in pool {
        if current.cols() == target {
            break;
        }
        let mut orbit = Vec::with_capacity(deg);
        let mut v = cand.clone();
        for _ in 0..deg {
            orbit.push(v.clone());
            v = x_action.mul_vec(&v);
        }
        let trial = current.hstack(&Mat::from_columns(&orbit, n));
        if trial.rank() == current.cols() + deg {
            current = trial;
            gens.push(cand);
        }
    }
    (current.cols() == target).then_some(gens)
}

/// The unique hermitian `h` with `⟨λu, v⟩ = Tr_{E/k}(λ·h(u, v))`.
pub fn herm_from_bilinear(gram: &Mat, x_action: &Mat, e: &InvolutiveAlgebra) -> Result<HermLift> {
    let n = gram.rows();
    let deg = e.degree();
    if x_action.rows() != n || n % deg != 0 || !e.modulus().eval_mat(x_action).is_zero() {
        return Err(Error::MinPolyMismatch);
    }
    let gens = free_generators(x_action, &Mat::identity(n), deg).ok_or(Error::MinPolyMismatch)?;
    let r = gens.len();
    let mut pairing = Mat::zeros(deg, deg);
    let s = crate::padic_ext::power_sums(e.modulus(), 2 * deg);
    for i in 0..deg {
        for j in 0..deg {
            pairing[(i, j)] = s[i + j].clone();
        }
    }
    if pairing.det().is_zero() {
        return Err(Error::SingularTracePairing);
    }
    let orbits: Vec<Vec<Vec<Rat>>> = gens
        .iter()
        .map(|u| {
            let mut out = Vec::with_capacity(deg);
            let mut v = u.clone();
            for _ in 0..deg {
                out.push(v.clone());
                v = x_action.mul_vec(&v);
            }
            out
        })
        .collect();
    let mut h = vec![vec![PolyQ::zero(); r]; r];
    for k in 0..r {
        for l in 0..r {
            let rhs: Vec<Rat> = (0..deg).map(|i| gram.bilinear(&orbits[k][i], &gens[l])).collect();
            let sol = pairing.solve(&Mat::from_columns(&[rhs], deg))?;
            h[k][l] = PolyQ::new(sol.column(0));
        }
    }
    let cols: Vec<Vec<Rat>> = orbits.into_iter().flatten().collect();
    let k_basis = Mat::from_columns(&cols, n);
    Ok(HermLift { space: HermSpace::new(e.clone(), h)?, generators: gens, k_basis })
}

/// Bilinear form `⟨u, v⟩ = Tr(h(u, v))` on the `k`-basis `x^i·e_k` (k-major).
pub fn trace_lift(m: &HermSpace) -> Mat {
    let e = &m.algebra;
    let d = e.degree();
    let r = m.rank();
    let mut g = Mat::zeros(r * d, r * d);
    let xinv = e.iota(&PolyQ::x());
    for k in 0..r {
        for l in 0..r {
            for i in 0..d {
                for j in 0..d {
                    // h(x^i e_k, x^j e_l) = x^i · x^{-j} · h_kl
                    let z = e.mul(&e.mul(&PolyQ::monomial(i), &pow_mod(e, &xinv, j)), &m.gram[k][l]);
                    g[(k * d + i, l * d + j)] = e.trace(&z);
                }
            }
        }
    }
    g
}

fn pow_mod(e: &InvolutiveAlgebra, a: &PolyQ, k: usize) -> PolyQ {
    (0..k).fold(PolyQ::one(), |acc, _| e.mul(&acc, a))
}

/// Whether an ι-fixed `det` of `L = Q[x]/(F)` is a norm to the fixed field in
/// the completion component `Q_p[x]/(q)`, `q` a self-reciprocal p-adic factor of `F`.
///
/// Compares Hasse symbols of the trace forms `z ↦ Tr(d·z·ι(z))` and `z ↦ Tr(z·ι(z))`.
pub fn det_norm_class(det: &PolyQ, component: &PolyQ, ctx: &PadicContext) -> Result<bool> {
    let q = symmetrize(component)?;
    let alg = InvolutiveAlgebra::field(&q)?;
    let d = alg.reduce(det);
    let d = alg.reduce(&(&d + &alg.iota(&d)).scale(&Rat::new(1.into(), 2.into())));
    if d.is_zero() {
        return Err(Error::DegenerateInput);
    }
    let one = HermSpace { algebra: alg.clone(), gram: vec![vec![PolyQ::one()]] };
    let twisted = HermSpace { algebra: alg, gram: vec![vec![d]] };
    Ok(gram_invariant(&trace_lift(&one), ctx)?.hasse == gram_invariant(&trace_lift(&twisted), ctx)?.hasse)
}

/// Invariant record of a non-degenerate hermitian space over `Q_p[x]/(q)`.
pub fn herm_invariant(m: &HermSpace, ctx: &PadicContext) -> Result<HermInvariant> {
    if !herm_nondegenerate(m) {
        return Err(Error::DegenerateInput);
    }
    let e = &m.algebra;
    if e.is_split() {
        return Ok(HermInvariant { case: HermCase::Split, rank: m.rank(), det_is_norm: None });
    }
    let o = herm_orthogonalize(m)?;
    let det = o.diag.iter().fold(PolyQ::one(), |acc, a| e.mul(&acc, a));
    let norm = det_norm_class(&det, e.modulus(), ctx)?;
    Ok(HermInvariant { case: HermCase::Field, rank: m.rank(), det_is_norm: Some(norm) })
}
