//! Non-degenerate quadratic spaces over `Q_p` and their classification by
//! `(dim, det class, Hasse symbol)`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{hilbert_symbol, rat, square_class, valuation, PadicContext, Rat, SquareClass};
use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSpace {
    gram: Mat,
    ctx: PadicContext,
}

/// Complete isometry invariant of a quadratic space over `Q_p`.
/// Hasse convention: `∏_{i<j} (d_i, d_j)` over a diagonalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadInvariant {
    pub dim: usize,
    pub det_class: SquareClass,
    pub hasse: i8,
}

impl QuadSpace {
    pub fn new(gram: Mat, ctx: PadicContext) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if gram.rows() == 0 || gram.det().is_zero() {
            return Err(Error::DegenerateForm);
        }
        Ok(QuadSpace { gram, ctx })
    }

    pub fn diagonal(entries: &[Rat], ctx: PadicContext) -> Result<Self> {
        QuadSpace::new(Mat::diag(entries), ctx)
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn ctx(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn orthogonal_sum(&self, other: &QuadSpace) -> Result<QuadSpace> {
        if self.ctx.p() != other.ctx.p() {
            return Err(Error::PrimeMismatch);
        }
        QuadSpace::new(Mat::block_diag(&[self.gram.clone(), other.gram.clone()]), self.ctx)
    }
}

/// Symmetric Gauss elimination: returns `(d, T)` with `Tᵀ G T = diag(d)`.
pub fn diagonalize(v: &QuadSpace) -> Result<(Vec<Rat>, Mat)> {
    diagonalize_gram(&v.gram, v.ctx.p())
}

pub(crate) fn diagonalize_gram(g0: &Mat, p: u64) -> Result<(Vec<Rat>, Mat)> {
    let n = g0.rows();
    let mut g = g0.clone();
    let mut t = Mat::identity(n);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        // best diagonal pivot among k..n
        let best = (k..n)
            .filter(|&i| !g[(i, i)].is_zero())
            .min_by_key(|&i| (valuation(&g[(i, i)], p).unwrap(), i));
        let piv = match best {
            Some(i) => i,
            None => {
                let Some((i, j)) = (k..n).flat_map(|i| (k..n).map(move |j| (i, j))).find(|&(i, j)| !g[(i, j)].is_zero())
                else {
                    return Err(Error::DegenerateForm);
                };
                // replace e_i by e_i + e_j: value becomes 2·g_ij
                add_basis(&mut g, &mut t, i, j, &Rat::one());
                i
            }
        };
        swap_basis(&mut g, &mut t, k, piv);
        let a = g[(k, k)].clone();
        for i in k + 1..n {
            if !g[(k, i)].is_zero() {
                let c = -(&g[(k, i)] / &a);
                add_basis(&mut g, &mut t, i, k, &c);
            }
        }
        diag.push(a);
    }
    Ok((diag, t))
}

/// Basis change `e_i ← e_i + c·e_j`.
fn add_basis(g: &mut Mat, t: &mut Mat, i: usize, j: usize, c: &Rat) {
    let n = g.rows();
    for r in 0..n {
        let x = &t[(r, j)] * c;
        t[(r, i)] += x;
    }
    for r in 0..n {
        let x = &g[(r, j)] * c;
        g[(r, i)] += x;
    }
    for r in 0..n {
        let x = &g[(j, r)] * c;
        g[(i, r)] += x;
    }
}

fn swap_basis(g: &mut Mat, t: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = g.rows();
    for r in 0..n {
        let x = t[(r, a)].clone();
        t[(r, a)] = t[(r, b)].clone();
        t[(r, b)] = x;
        let x = g[(r, a)].clone();
        g[(r, a)] = g[(r, b)].clone();
        g[(r, b)] = x;
    }
    for r in 0..n {
        let x = g[(a, r)].clone();
        g[(a, r)] = g[(b, r)].clone();
        g[(b, r)] = x;
    }
}

/// Hasse symbol `∏_{i<j} (d_i, d_j)` of a diagonal form.
pub fn hasse_of_diagonal(d: &[Rat], ctx: &PadicContext) -> Result<i8> {
    let mut s = 1;
    let mut prefix = Rat::one();
    for (i, di) in d.iter().enumerate() {
        if i > 0 {
            s *= hilbert_symbol(&prefix, di, ctx)?;
        }
        prefix *= di;
    }
    Ok(s)
}

pub fn invariant_of_diagonal(d: &[Rat], ctx: &PadicContext) -> Result<QuadInvariant> {
    if d.is_empty() || d.iter().any(|x| x.is_zero()) {
        return Err(Error::DegenerateForm);
    }
    let det: Rat = d.iter().product();
    Ok(QuadInvariant { dim: d.len(), det_class: square_class(&det, ctx)?, hasse: hasse_of_diagonal(d, ctx)? })
}

pub fn quad_invariant(v: &QuadSpace) -> Result<QuadInvariant> {
    let (d, _) = diagonalize(v)?;
    invariant_of_diagonal(&d, &v.ctx)
}

/// Invariant of an arbitrary non-degenerate symmetric Gram matrix.
pub fn gram_invariant(g: &Mat, ctx: &PadicContext) -> Result<QuadInvariant> {
    quad_invariant(&QuadSpace::new(g.clone(), *ctx)?)
}

pub fn is_isometric(a: &QuadSpace, b: &QuadSpace) -> Result<bool> {
    if a.ctx.p() != b.ctx.p() {
        return Err(Error::PrimeMismatch);
    }
    Ok(quad_invariant(a)? == quad_invariant(b)?)
}

impl QuadInvariant {
    /// Invariant of the orthogonal sum.
    pub fn sum(&self, other: &QuadInvariant, ctx: &PadicContext) -> Result<QuadInvariant> {
        let h = hilbert_symbol(&self.det_class.to_rat(), &other.det_class.to_rat(), ctx)?;
        Ok(QuadInvariant {
            dim: self.dim + other.dim,
            det_class: self.det_class.mul(&other.det_class, ctx),
            hasse: self.hasse * other.hasse * h,
        })
    }

    /// Whether a space with this invariant contains a nonzero isotropic vector.
    pub fn is_isotropic(&self, ctx: &PadicContext) -> Result<bool> {
        let d = self.det_class.to_rat();
        let minus_one = rat(-1);
        Ok(match self.dim {
            0 | 1 => false,
            2 => square_class(&-d, ctx)?.is_one(),
            3 => self.hasse == hilbert_symbol(&minus_one, &-d, ctx)?,
            4 => !self.det_class.is_one() || self.hasse == hilbert_symbol(&minus_one, &minus_one, ctx)?,
            _ => true,
        })
    }

    /// Invariant of the complement of a hyperbolic plane, for isotropic spaces.
    pub fn drop_hyperbolic(&self, ctx: &PadicContext) -> Result<QuadInvariant> {
        let d = -self.det_class.to_rat();
        Ok(QuadInvariant {
            dim: self.dim - 2,
            det_class: square_class(&d, ctx)?,
            hasse: self.hasse * hilbert_symbol(&rat(-1), &d, ctx)?,
        })
    }

    pub fn witt_index(&self, ctx: &PadicContext) -> Result<usize> {
        let mut inv = self.clone();
        let mut w = 0;
        while inv.is_isotropic(ctx)? {
            inv = inv.drop_hyperbolic(ctx)?;
            w += 1;
        }
        Ok(w)
    }

    pub fn represents(&self, a: &Rat, ctx: &PadicContext) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::ZeroInput);
        }
        let one = QuadInvariant { dim: 1, det_class: square_class(&-a.clone(), ctx)?, hasse: 1 };
        self.sum(&one, ctx)?.is_isotropic(ctx)
    }

    /// Whether some quadratic space over `Q_p` has this invariant.
    pub fn is_admissible(&self, ctx: &PadicContext) -> Result<bool> {
        Ok(match self.dim {
            0 => false,
            1 => self.hasse == 1,
            2 => !square_class(&-self.det_class.to_rat(), ctx)?.is_one() || self.hasse == 1,
            _ => true,
        })
    }

    pub fn hyperbolic_plane(ctx: &PadicContext) -> Result<QuadInvariant> {
        invariant_of_diagonal(&[rat(1), rat(-1)], ctx)
    }
}

pub fn witt_index(v: &QuadSpace) -> Result<usize> {
    quad_invariant(v)?.witt_index(&v.ctx)
}

pub fn is_hyperbolic_plane(v: &QuadSpace) -> Result<bool> {
    let inv = quad_invariant(v)?;
    Ok(inv.dim == 2 && square_class(&rat(-1), &v.ctx)? == inv.det_class)
}

pub fn represents(v: &QuadSpace, a: &Rat) -> Result<bool> {
    quad_invariant(v)?.represents(a, &v.ctx)
}

/// Diagonal entries (class representatives) realizing an admissible invariant.
pub fn diagonal_from_invariant(inv: &QuadInvariant, ctx: &PadicContext) -> Result<Vec<Rat>> {
    if !inv.is_admissible(ctx)? {
        return Err(Error::InadmissibleInvariant);
    }
    let n = inv.dim;
    let free = n.min(3);
    let lead: Vec<Rat> = vec![Rat::one(); n - free];
    let reps: Vec<Rat> = SquareClass::all(ctx).iter().map(|c| c.to_rat()).collect();
    let mut idx = vec![0usize; free];
    loop {
        let mut d = lead.clone();
        d.extend(idx.iter().map(|&i| reps[i].clone()));
        if &invariant_of_diagonal(&d, ctx)? == inv {
            return Ok(d);
        }
        // next index tuple
        let mut k = 0;
        while k < free {
            idx[k] += 1;
            if idx[k] < reps.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == free {
            return Err(Error::InadmissibleInvariant);
        }
    }
}

pub fn form_from_invariant(inv: &QuadInvariant, ctx: &PadicContext) -> Result<QuadSpace> {
    QuadSpace::diagonal(&diagonal_from_invariant(inv, ctx)?, *ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn ctx(p: u64) -> PadicContext {
        PadicContext::new(p, 20).unwrap()
    }

    fn diag(d: &[i64], p: u64) -> QuadSpace {
        QuadSpace::diagonal(&d.iter().map(|&x| rat(x)).collect::<Vec<_>>(), ctx(p)).unwrap()
    }

    #[test]
    fn diagonalize_examples() {
        let h = QuadSpace::new(Mat::from_i64(&[&[0, 1], &[1, 0]]), ctx(5)).unwrap();
        let (d, t) = diagonalize(&h).unwrap();
        assert_eq!(d, vec![rat(2), ratio(-1, 2)]);
        assert_eq!(h.gram().congruence(&t), Mat::diag(&d));
        let (d, t) = diagonalize(&diag(&[1, 1], 5)).unwrap();
        assert_eq!((d, t), (vec![rat(1), rat(1)], Mat::identity(2)));
        let g = QuadSpace::new(Mat::from_i64(&[&[1, 1], &[1, 2]]), ctx(5)).unwrap();
        assert_eq!(diagonalize(&g).unwrap().0, vec![rat(1), rat(1)]);
        assert_eq!(QuadSpace::new(Mat::from_i64(&[&[1, 1], &[1, 1]]), ctx(5)), Err(Error::DegenerateForm));
    }

    #[test]
    fn invariant_examples() {
        let c = ctx(5);
        let inv = quad_invariant(&diag(&[1, -1], 5)).unwrap();
        assert_eq!((inv.dim, inv.det_class, inv.hasse), (2, square_class(&rat(-1), &c).unwrap(), 1));
        assert_eq!(quad_invariant(&diag(&[5, 5], 5)).unwrap().hasse, 1);
        assert!(is_isometric(&diag(&[1, 1], 5), &diag(&[5, 5], 5)).unwrap());
        assert!(!is_isometric(&diag(&[1], 5), &diag(&[5], 5)).unwrap());
        assert_eq!(is_isometric(&diag(&[1], 5), &diag(&[1], 3)), Err(Error::PrimeMismatch));
    }

    #[test]
    fn witt_and_representation() {
        assert_eq!(witt_index(&diag(&[1, -1], 5)).unwrap(), 1);
        assert!(is_hyperbolic_plane(&diag(&[1, -1], 5)).unwrap());
        assert!(!is_hyperbolic_plane(&diag(&[1, -5], 5)).unwrap());
        // -1 is a square in Q_5 so <1,1,1,1> is hyperbolic
        assert_eq!(witt_index(&diag(&[1, 1, 1, 1], 5)).unwrap(), 2);
        // d = 1 and hasse = (-1,-1)_3 = 1, so isotropic
        assert_eq!(witt_index(&diag(&[1, 1, 1, 1], 3)).unwrap(), 2);
        // over Q_2 the sum of four squares is anisotropic
        assert_eq!(witt_index(&diag(&[1, 1, 1, 1], 2)).unwrap(), 0);
        assert!(represents(&diag(&[1, -1], 5), &rat(7)).unwrap());
        assert!(!represents(&diag(&[1], 5), &rat(5)).unwrap());
        // 2 = 1 + 1
        assert!(represents(&diag(&[1, 1], 5), &rat(2)).unwrap());
        assert_eq!(represents(&diag(&[1], 5), &rat(0)), Err(Error::ZeroInput));
    }

    #[test]
    fn forms_from_invariants() {
        let c = ctx(5);
        let inv = QuadInvariant { dim: 1, det_class: square_class(&rat(5), &c).unwrap(), hasse: 1 };
        assert_eq!(form_from_invariant(&inv, &c).unwrap(), diag(&[5], 5));
        let inv = QuadInvariant { dim: 2, det_class: SquareClass::all(&c)[0], hasse: 1 };
        assert_eq!(form_from_invariant(&inv, &c).unwrap(), diag(&[1, 1], 5));
        let inv = QuadInvariant { dim: 3, det_class: SquareClass::all(&c)[0], hasse: -1 };
        let v = form_from_invariant(&inv, &c).unwrap();
        assert_eq!(quad_invariant(&v).unwrap(), inv);
        let bad = QuadInvariant { dim: 1, det_class: SquareClass::all(&c)[0], hasse: -1 };
        assert_eq!(form_from_invariant(&bad, &c), Err(Error::InadmissibleInvariant));
        let bad = QuadInvariant { dim: 2, det_class: square_class(&rat(-1), &c).unwrap(), hasse: -1 };
        assert_eq!(form_from_invariant(&bad, &c), Err(Error::InadmissibleInvariant));
    }
}
