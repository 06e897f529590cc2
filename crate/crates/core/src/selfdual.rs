//! Truncated self-dual spaces `K = K1 + K2`, block operators and subspaces.
//!
//! Coordinates are `(e_1..e_n, e_1*..e_n*)`. The conjugation `J` swaps the two
//! halves and conjugates entries, so `J P1 J = 1 - P1` holds exactly.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Orthonormality tolerance for subspace frames.
pub const TAU_ORTHO: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SelfDualSpace {
    n1: usize,
}

/// Selects `K1` or `K2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Half {
    One,
    Two,
}

impl SelfDualSpace {
    pub fn new(n1: usize) -> Self {
        Self { n1 }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn dim(&self) -> usize {
        2 * self.n1
    }

    /// Coordinate of `e_i` (0-based).
    pub fn particle(&self, i: usize) -> usize {
        i
    }

    /// Coordinate of `e_i*` (0-based).
    pub fn antiparticle(&self, i: usize) -> usize {
        self.n1 + i
    }

    pub fn offset(&self, half: Half) -> usize {
        match half {
            Half::One => 0,
            Half::Two => self.n1,
        }
    }

    pub fn basis_vector(&self, idx: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[idx] = linalg::ONE;
        v
    }

    pub fn conjugate_vector(&self, x: &CVector) -> CVector {
        let n = self.n1;
        CVector::from_fn(2 * n, |i, _| {
            let j = if i < n { i + n } else { i - n };
            x[j].conj()
        })
    }

    /// Applies `J` to every column.
    pub fn conjugate_frame(&self, f: &CMatrix) -> CMatrix {
        let n = self.n1;
        CMatrix::from_fn(2 * n, f.ncols(), |i, k| {
            let j = if i < n { i + n } else { i - n };
            f[(j, k)].conj()
        })
    }

    pub fn identity(&self) -> BlockOperator {
        BlockOperator::identity(*self)
    }

    pub fn p1(&self) -> BlockOperator {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.n1 {
            m[(i, i)] = linalg::ONE;
        }
        BlockOperator::unchecked(*self, *self, m)
    }

    pub fn p2(&self) -> BlockOperator {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for i in self.n1..self.dim() {
            m[(i, i)] = linalg::ONE;
        }
        BlockOperator::unchecked(*self, *self, m)
    }

    /// Embeds a `K1` coordinate vector.
    pub fn embed_k1(&self, x: &CVector) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v.rows_mut(0, self.n1).copy_from(x);
        v
    }

    /// Embeds the columns of a `K1` frame.
    pub fn embed_k1_frame(&self, f: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), f.ncols());
        out.view_mut((0, 0), (self.n1, f.ncols())).copy_from(f);
        out
    }
}

/// Dense complex matrix from `domain` into `codomain`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    domain: SelfDualSpace,
    codomain: SelfDualSpace,
    entries: CMatrix,
}

impl BlockOperator {
    pub fn new(domain: SelfDualSpace, codomain: SelfDualSpace, entries: CMatrix) -> Result<Self> {
        if entries.shape() != (codomain.dim(), domain.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "entries are {}x{}, spaces require {}x{}",
                entries.nrows(),
                entries.ncols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(Self::unchecked(domain, codomain, entries))
    }

    pub fn square(space: SelfDualSpace, entries: CMatrix) -> Result<Self> {
        Self::new(space, space, entries)
    }

    pub(crate) fn unchecked(domain: SelfDualSpace, codomain: SelfDualSpace, entries: CMatrix) -> Self {
        Self {
            domain,
            codomain,
            entries,
        }
    }

    /// Assembles `[[a11, a12], [a21, a22]]`.
    pub fn from_blocks(
        domain: SelfDualSpace,
        codomain: SelfDualSpace,
        a11: &CMatrix,
        a12: &CMatrix,
        a21: &CMatrix,
        a22: &CMatrix,
    ) -> Result<Self> {
        let (nc, nd) = (codomain.n1(), domain.n1());
        for b in [a11, a12, a21, a22] {
            if b.shape() != (nc, nd) {
                return Err(Error::ShapeMismatch(format!(
                    "block is {}x{}, expected {}x{}",
                    b.nrows(),
                    b.ncols(),
                    nc,
                    nd
                )));
            }
        }
        let mut m = CMatrix::zeros(2 * nc, 2 * nd);
        m.view_mut((0, 0), (nc, nd)).copy_from(a11);
        m.view_mut((0, nd), (nc, nd)).copy_from(a12);
        m.view_mut((nc, 0), (nc, nd)).copy_from(a21);
        m.view_mut((nc, nd), (nc, nd)).copy_from(a22);
        Ok(Self::unchecked(domain, codomain, m))
    }

    pub fn zeros(domain: SelfDualSpace, codomain: SelfDualSpace) -> Self {
        Self::unchecked(domain, codomain, CMatrix::zeros(codomain.dim(), domain.dim()))
    }

    pub fn identity(space: SelfDualSpace) -> Self {
        Self::unchecked(space, space, CMatrix::identity(space.dim(), space.dim()))
    }

    pub fn domain(&self) -> SelfDualSpace {
        self.domain
    }

    pub fn codomain(&self) -> SelfDualSpace {
        self.codomain
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    /// `A_mn = P_m A P_n` as an `n1(codomain) x n1(domain)` matrix.
    pub fn block(&self, m: Half, n: Half) -> CMatrix {
        let r = self.codomain.offset(m);
        let c = self.domain.offset(n);
        self.entries
            .view((r, c), (self.codomain.n1(), self.domain.n1()))
            .into_owned()
    }

    /// Operator whose only nonzero block is `A_mn = b`.
    pub fn embed_block(domain: SelfDualSpace, codomain: SelfDualSpace, m: Half, n: Half, b: &CMatrix) -> Result<Self> {
        if b.shape() != (codomain.n1(), domain.n1()) {
            return Err(Error::ShapeMismatch("block shape".into()));
        }
        let mut out = Self::zeros(domain, codomain);
        out.entries
            .view_mut((codomain.offset(m), domain.offset(n)), b.shape())
            .copy_from(b);
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        Self::unchecked(self.codomain, self.domain, self.entries.adjoint())
    }

    /// `J A J`.
    pub fn conjugate(&self) -> Self {
        let (nc, nd) = (self.codomain.n1(), self.domain.n1());
        let e = &self.entries;
        let m = CMatrix::from_fn(2 * nc, 2 * nd, |i, j| {
            let si = if i < nc { i + nc } else { i - nc };
            let sj = if j < nd { j + nd } else { j - nd };
            e[(si, sj)].conj()
        });
        Self::unchecked(self.domain, self.codomain, m)
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        &self.entries * x
    }

    /// `self * rhs`, checked.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if rhs.codomain != self.domain {
            return Err(Error::ShapeMismatch("composition of incompatible operators".into()));
        }
        Ok(Self::unchecked(rhs.domain, self.codomain, &self.entries * &rhs.entries))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::unchecked(self.domain, self.codomain, &self.entries * z)
    }
}

impl Add for &BlockOperator {
    type Output = BlockOperator;
    fn add(self, rhs: &BlockOperator) -> BlockOperator {
        assert_eq!((self.domain, self.codomain), (rhs.domain, rhs.codomain));
        BlockOperator::unchecked(self.domain, self.codomain, &self.entries + &rhs.entries)
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;
    fn sub(self, rhs: &BlockOperator) -> BlockOperator {
        assert_eq!((self.domain, self.codomain), (rhs.domain, rhs.codomain));
        BlockOperator::unchecked(self.domain, self.codomain, &self.entries - &rhs.entries)
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;
    fn mul(self, rhs: &BlockOperator) -> BlockOperator {
        self.compose(rhs).expect("incompatible operator product")
    }
}

/// Orthonormal frame in a self-dual space.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient: SelfDualSpace,
    frame: CMatrix,
}

impl Subspace {
    pub fn new(ambient: SelfDualSpace, frame: CMatrix) -> Result<Self> {
        if frame.nrows() != ambient.dim() {
            return Err(Error::ShapeMismatch("frame rows differ from ambient dimension".into()));
        }
        let defect = linalg::orthonormality_defect(&frame);
        if defect > TAU_ORTHO {
            return Err(Error::OrthonormalityFailure { defect, tol: TAU_ORTHO });
        }
        Ok(Self { ambient, frame })
    }

    pub fn empty(ambient: SelfDualSpace) -> Self {
        Self {
            ambient,
            frame: CMatrix::zeros(ambient.dim(), 0),
        }
    }

    /// Canonical orthonormal basis of the column span of `vectors`.
    pub fn span(ambient: SelfDualSpace, vectors: &CMatrix) -> Result<Self> {
        if vectors.nrows() != ambient.dim() {
            return Err(Error::ShapeMismatch("vectors do not live in the ambient space".into()));
        }
        Self::new(ambient, linalg::span_frame(vectors, None))
    }

    pub fn ambient(&self) -> SelfDualSpace {
        self.ambient
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// `J S`, e.g. the conjugate space `h*`.
    pub fn conjugate(&self) -> Self {
        Self {
            ambient: self.ambient,
            frame: linalg::canonical_frame(&self.ambient.conjugate_frame(&self.frame)),
        }
    }

    pub fn projector(&self) -> BlockOperator {
        orthoprojection(self)
    }

    /// `|(1 - [S]) x|`.
    pub fn distance(&self, x: &CVector) -> f64 {
        let proj = &self.frame * (self.frame.adjoint() * x);
        linalg::vec_norm(&(x - proj))
    }
}

pub fn conjugate_op(a: &BlockOperator) -> BlockOperator {
    a.conjugate()
}

pub fn hs_norm(a: &BlockOperator) -> f64 {
    linalg::frobenius(a.entries())
}

/// Orthonormal basis of `{x : |A x|` small`}` in the domain of `A`.
pub fn kernel_basis(a: &BlockOperator, tol: f64) -> Subspace {
    Subspace {
        ambient: a.domain(),
        frame: linalg::kernel_frame(a.entries(), tol),
    }
}

pub fn pinv_on_range(a: &BlockOperator, tol: f64) -> BlockOperator {
    BlockOperator::unchecked(a.codomain(), a.domain(), linalg::pinv(a.entries(), tol))
}

pub fn orthoprojection(s: &Subspace) -> BlockOperator {
    BlockOperator::unchecked(s.ambient, s.ambient, linalg::projector(&s.frame))
}

/// `[A, B] = AB - BA` for rectangular pairs with compatible spaces.
pub fn commutator(a: &BlockOperator, b: &BlockOperator) -> BlockOperator {
    &(a * b) - &(b * a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, random_complex_matrix, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugate_of_p1_is_p2() {
        let s = SelfDualSpace::new(3);
        assert_eq!(conjugate_op(&s.p1()), s.p2());
        assert_eq!(conjugate_op(&s.identity()), s.identity());
    }

    #[test]
    fn conjugation_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = SelfDualSpace::new(2);
        let cd = SelfDualSpace::new(3);
        let a = BlockOperator::new(d, cd, random_complex_matrix(6, 4, &mut rng)).unwrap();
        assert_eq!(a.conjugate().conjugate(), a);
    }

    #[test]
    fn hs_norm_examples() {
        let s = SelfDualSpace::new(1);
        assert_eq!(hs_norm(&BlockOperator::zeros(s, s)), 0.0);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(3.0, 4.0);
        assert_eq!(hs_norm(&BlockOperator::square(s, m).unwrap()), 5.0);
    }

    #[test]
    fn blocks_recompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = SelfDualSpace::new(2);
        let cd = SelfDualSpace::new(3);
        let a = BlockOperator::new(d, cd, random_complex_matrix(6, 4, &mut rng)).unwrap();
        let b = BlockOperator::from_blocks(
            d,
            cd,
            &a.block(Half::One, Half::One),
            &a.block(Half::One, Half::Two),
            &a.block(Half::Two, Half::One),
            &a.block(Half::Two, Half::Two),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pinv_of_diag() {
        let s = SelfDualSpace::new(1);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(2.0, 0.0);
        let p = pinv_on_range(&BlockOperator::square(s, m).unwrap(), 1e-10);
        assert!((p.entries()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(p.entries()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn projections() {
        let s = SelfDualSpace::new(2);
        assert_eq!(orthoprojection(&Subspace::empty(s)), BlockOperator::zeros(s, s));
        let mut f = CMatrix::zeros(4, 1);
        f[(0, 0)] = ONE * std::f64::consts::FRAC_1_SQRT_2;
        f[(1, 0)] = ONE * std::f64::consts::FRAC_1_SQRT_2;
        let p = orthoprojection(&Subspace::new(s, f).unwrap());
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((p.entries()[(i, j)] - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let s = SelfDualSpace::new(2);
        assert!(matches!(
            BlockOperator::square(s, CMatrix::zeros(3, 4)),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
