//! Bosonic charge data in the indefinite form `kappa(f, g) = <f, C g>`.

use crate::car::{membership_record, Index, Membership, StatDim};
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMatrix, C64};
use crate::selfdual::{BlockOperator, Half, SelfDualSpace};

/// Margin in `|T| < 1 - NORM_MARGIN`.
pub const NORM_MARGIN: f64 = 1e-8;

/// `C = P1 - P2` on a self-dual space.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaForm {
    space: SelfDualSpace,
    c: CMatrix,
}

impl KappaForm {
    pub fn new(space: SelfDualSpace) -> Self {
        let n = space.n1();
        let c = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < n) {
            (false, _) => linalg::ZERO,
            (true, true) => linalg::ONE,
            (true, false) => -linalg::ONE,
        });
        Self { space, c }
    }

    pub fn space(&self) -> SelfDualSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    pub fn operator(&self) -> BlockOperator {
        BlockOperator::square(self.space, self.c.clone()).expect("C shape")
    }

    /// `kappa(f, g)`.
    pub fn eval(&self, f: &linalg::CVector, g: &linalg::CVector) -> C64 {
        linalg::inner(f, &(&self.c * g))
    }

    /// Gram matrix `F* C G`.
    pub fn gram(&self, f: &CMatrix, g: &CMatrix) -> CMatrix {
        f.adjoint() * &self.c * g
    }
}

/// `A+ = C_dom A* C_cod`.
pub fn kappa_adjoint(a: &BlockOperator) -> BlockOperator {
    let cd = KappaForm::new(a.domain());
    let cc = KappaForm::new(a.codomain());
    let m = cd.matrix() * a.entries().adjoint() * cc.matrix();
    BlockOperator::new(a.codomain(), a.domain(), m).expect("kappa adjoint shape")
}

#[derive(Clone, Debug)]
pub struct CcrIsometry {
    v: BlockOperator,
}

impl CcrIsometry {
    pub fn new(v: BlockOperator) -> Result<Self> {
        if v.codomain().n1() < v.domain().n1() {
            return Err(Error::ShapeMismatch(
                "codomain must be at least as large as the domain".into(),
            ));
        }
        Ok(Self { v })
    }

    pub fn v(&self) -> &BlockOperator {
        &self.v
    }

    pub fn structural_index(&self) -> usize {
        2 * (self.v.codomain().n1() - self.v.domain().n1())
    }
}

/// Membership with `V+ V = 1` in place of `V* V = 1`.
pub fn ccr_membership(v: &CcrIsometry, tol: f64) -> Result<Membership> {
    let op = v.v();
    let n = op.domain().dim();
    let vp = kappa_adjoint(op);
    let defect = frobenius(&(vp.entries() * op.entries() - CMatrix::identity(n, n)));
    Ok(membership_record(op, defect, tol))
}

/// Orthonormal frame of `ker V+ = C ker V*`.
pub fn kernel_kappa_adjoint(v: &BlockOperator) -> CMatrix {
    let ker = linalg::kernel_frame_default(&v.entries().adjoint());
    linalg::canonical_frame(&(KappaForm::new(v.codomain()).matrix() * ker))
}

/// `ind = dim ker V+`, audited against the truncation shape.
pub fn index_ccr(v: &CcrIsometry) -> Result<usize> {
    let structural = v.structural_index();
    let numeric = kernel_kappa_adjoint(v.v()).ncols();
    if numeric != structural {
        return Err(Error::DimensionMismatch {
            what: "dim ker V+",
            expected: structural,
            found: numeric,
        });
    }
    Ok(structural)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PChecks {
    pub idempotent: f64,
    pub kappa_selfadjoint: f64,
    pub support: f64,
    pub split: f64,
}

#[derive(Clone, Debug)]
pub struct SmallP {
    pub p: BlockOperator,
    pub e: BlockOperator,
    pub a_plus: BlockOperator,
    pub checks: PChecks,
}

/// `p = A+^{-1} C` where `A = E C E` on `E = [ker V+]`.
pub fn compute_p(v: &CcrIsometry, tol: f64) -> Result<SmallP> {
    let op = v.v();
    let space = op.codomain();
    let kf = KappaForm::new(space);
    let frame = kernel_kappa_adjoint(op);
    let dim = frame.ncols();
    let n = space.dim();
    let e = linalg::projector(&frame);
    let (vals, vecs) = linalg::hermitian_eigen(&kf.gram(&frame, &frame));
    let nonzero = vals.iter().filter(|x| x.abs() > tol).count();
    if nonzero != dim {
        return Err(Error::DegenerateForm { nonzero, dim, tol });
    }
    let positive = vals.iter().filter(|&&x| x > tol).count();
    if 2 * positive != dim {
        return Err(Error::DegenerateForm {
            nonzero: positive,
            dim,
            tol,
        });
    }
    let mut a_plus = CMatrix::zeros(n, n);
    let mut a_minus = CMatrix::zeros(n, n);
    let mut a_plus_inv = CMatrix::zeros(n, n);
    for (j, &l) in vals.iter().enumerate() {
        let w = &frame * vecs.column(j);
        let outer = &w * w.adjoint();
        if l > 0.0 {
            a_plus += &outer * C64::new(l, 0.0);
            a_plus_inv += &outer * C64::new(1.0 / l, 0.0);
        } else {
            a_minus += &outer * C64::new(-l, 0.0);
        }
    }
    let p = &a_plus_inv * kf.matrix();
    let pop = BlockOperator::square(space, p.clone())?;
    let a_plus_bar = BlockOperator::square(space, a_plus.clone())?.conjugate();
    let id = CMatrix::identity(n, n);
    let checks = PChecks {
        idempotent: frobenius(&(&p * &p - &p)),
        kappa_selfadjoint: frobenius(&(kappa_adjoint(&pop).entries() - &p)),
        support: frobenius(&((&id - &e) * &p)),
        split: frobenius(&(&a_plus * a_plus_bar.entries())) + frobenius(&(a_plus_bar.entries() - &a_minus)),
    };
    let worst = checks
        .idempotent
        .max(checks.kappa_selfadjoint)
        .max(checks.support)
        .max(checks.split);
    if worst > tol {
        return Err(Error::RecoveryMismatch {
            what: "p is a kappa-projection in ker V+",
            residual: worst,
            tol,
        });
    }
    Ok(SmallP {
        p: pop,
        e: BlockOperator::square(space, e)?,
        a_plus: BlockOperator::square(space, a_plus)?,
        checks,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BigPChecks {
    pub idempotent: f64,
    pub kappa_selfadjoint: f64,
    pub conjugate: f64,
    pub min_positivity: f64,
    pub t_symmetry: f64,
    pub t_norm: f64,
}

#[derive(Clone, Debug)]
pub struct CcrProjection {
    pub p: BlockOperator,
    pub t: BlockOperator,
    pub checks: BigPChecks,
}

/// `P = V P1 V+ + p`, `T = P21 P11^{-1}`.
pub fn compute_p_ccr(v: &CcrIsometry, small: &SmallP, tol: f64) -> Result<CcrProjection> {
    let op = v.v();
    let space = op.codomain();
    let kf = KappaForm::new(space);
    let vp = kappa_adjoint(op);
    let pm = op.entries() * op.domain().p1().entries() * vp.entries() + small.p.entries();
    let p = BlockOperator::square(space, pm.clone())?;
    let n = space.dim();
    let id = CMatrix::identity(n, n);
    let ran = linalg::span_frame(&pm, None);
    let (pos, _) = linalg::hermitian_eigen(&kf.gram(&ran, &ran));
    let min_positivity = pos.first().copied().unwrap_or(f64::INFINITY);
    let p11 = p.block(Half::One, Half::One);
    let p21 = p.block(Half::Two, Half::One);
    let t = p21 * linalg::pinv_default(&p11);
    let t_norm = linalg::op_norm(&t);
    let checks = BigPChecks {
        idempotent: frobenius(&(&pm * &pm - &pm)),
        kappa_selfadjoint: frobenius(&(kappa_adjoint(&p).entries() - &pm)),
        conjugate: frobenius(&(p.conjugate().entries() - (&id - &pm))),
        min_positivity,
        t_symmetry: frobenius(&(t.transpose() - &t)),
        t_norm,
    };
    let worst = checks.idempotent.max(checks.kappa_selfadjoint).max(checks.conjugate);
    if worst > tol {
        return Err(Error::RecoveryMismatch {
            what: "CCR basis projection identities",
            residual: worst,
            tol,
        });
    }
    if min_positivity <= 0.0 || ran.ncols() != space.n1() {
        return Err(Error::RecoveryMismatch {
            what: "C positive on ran P",
            residual: min_positivity,
            tol: 0.0,
        });
    }
    if checks.t_symmetry > tol * frobenius(&t).max(1.0) {
        return Err(Error::AntisymmetryViolation {
            kind: "symmetric",
            defect: checks.t_symmetry,
            tol,
        });
    }
    if t_norm >= 1.0 - NORM_MARGIN {
        return Err(Error::NormBoundViolation {
            norm: t_norm,
            margin: NORM_MARGIN,
        });
    }
    let t = BlockOperator::embed_block(space, space, Half::Two, Half::One, &t)?;
    Ok(CcrProjection { p, t, checks })
}

/// Frame `g_j` of `P (ker V+)` with `kappa(g_j, g_k) = delta_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaFrame {
    pub ambient: SelfDualSpace,
    pub frame: CMatrix,
}

impl KappaFrame {
    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn gram_defect(&self) -> f64 {
        let kf = KappaForm::new(self.ambient);
        let k = self.dim();
        frobenius(&(kf.gram(&self.frame, &self.frame) - CMatrix::identity(k, k)))
    }
}

/// Gram-Schmidt in `kappa`, pivoting on the largest `kappa`-norm.
pub fn compute_k_ccr(v: &CcrIsometry, p: &BlockOperator, tol: f64) -> Result<KappaFrame> {
    let ind = index_ccr(v)?;
    let space = p.codomain();
    let kf = KappaForm::new(space);
    let mut cand = p.entries() * kernel_kappa_adjoint(v.v());
    let scale = cand.iter().fold(0.0f64, |a, x| a.max(x.norm())).max(1.0);
    let mut out: Vec<linalg::CVector> = Vec::new();
    loop {
        let mut best = None;
        let mut best_norm = tol * scale;
        for j in 0..cand.ncols() {
            let col = cand.column(j).into_owned();
            let kn = kf.eval(&col, &col).re;
            if kn > best_norm * (1.0 + 1e-9) {
                best = Some(j);
                best_norm = kn;
            }
        }
        let Some(j) = best else { break };
        let g = cand.column(j).into_owned() / C64::new(best_norm.sqrt(), 0.0);
        for l in 0..cand.ncols() {
            let col = cand.column(l).into_owned();
            let coef = kf.eval(&g, &col);
            cand.set_column(l, &(col - &g * coef));
        }
        out.push(g);
    }
    let mut frame = CMatrix::zeros(space.dim(), out.len());
    for (j, g) in out.iter().enumerate() {
        frame.set_column(j, g);
    }
    if frame.ncols() != ind / 2 {
        return Err(Error::DimensionMismatch {
            what: "dim k",
            expected: ind / 2,
            found: frame.ncols(),
        });
    }
    Ok(KappaFrame { ambient: space, frame })
}

pub fn statistics_dimension_ccr(ind: Index) -> Result<StatDim> {
    match ind {
        Index::Finite(k) if k % 2 == 1 => Err(Error::OddIndex(k)),
        Index::Finite(0) => Ok(StatDim::Finite(1)),
        _ => Ok(StatDim::Infinite),
    }
}

#[derive(Clone, Debug)]
pub struct CcrChargeData {
    pub membership: Membership,
    pub small_p: SmallP,
    pub projection: CcrProjection,
    pub k: KappaFrame,
    pub ind: usize,
    pub stat_dim: StatDim,
    pub hs_defect: f64,
}

impl CcrChargeData {
    pub fn p(&self) -> &BlockOperator {
        &self.projection.p
    }

    pub fn t(&self) -> &BlockOperator {
        &self.projection.t
    }
}

pub fn ccr_charge_data(v: &CcrIsometry, tol: f64) -> Result<CcrChargeData> {
    let membership = ccr_membership(v, tol)?;
    if !membership.implementable {
        return Err(Error::NotAMember(format!(
            "kappa-isometry defect {:.3e}, reality defect {:.3e} (tolerance {:.1e})",
            membership.isometry_defect, membership.reality_defect, tol
        )));
    }
    let ind = index_ccr(v)?;
    let small_p = compute_p(v, tol)?;
    let projection = compute_p_ccr(v, &small_p, tol)?;
    let k = compute_k_ccr(v, &projection.p, tol)?;
    let stat_dim = statistics_dimension_ccr(Index::Finite(ind))?;
    Ok(CcrChargeData {
        hs_defect: membership.hs_defect,
        membership,
        small_p,
        projection,
        k,
        ind,
        stat_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::car::TAU;
    use crate::linalg::{c, random_complex_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn member(v: BlockOperator) -> CcrIsometry {
        CcrIsometry::new(v).unwrap()
    }

    #[test]
    fn kappa_adjoint_examples() {
        let s = SelfDualSpace::new(2);
        let id = s.identity();
        assert_eq!(kappa_adjoint(&id), id);
        let cop = KappaForm::new(s).operator();
        assert_eq!(kappa_adjoint(&cop), cop);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = BlockOperator::square(s, random_complex_matrix(4, 4, &mut rng)).unwrap();
        let b = BlockOperator::square(s, random_complex_matrix(4, 4, &mut rng)).unwrap();
        let lhs = kappa_adjoint(&(&a * &b));
        let rhs = &kappa_adjoint(&b) * &kappa_adjoint(&a);
        assert!(frobenius(&(lhs.entries() - rhs.entries())) < 1e-12);
    }

    #[test]
    fn kappa_form_properties() {
        let s = SelfDualSpace::new(2);
        let kf = KappaForm::new(s);
        assert_eq!(kf.operator().conjugate(), kf.operator().scale(c(-1.0, 0.0)));
        for i in 0..4 {
            for j in 0..4 {
                let (f, g) = (s.basis_vector(i), s.basis_vector(j));
                let lhs = kf.eval(&s.conjugate_vector(&f), &s.conjugate_vector(&g));
                assert_eq!(lhs, -kf.eval(&g, &f));
            }
        }
    }

    #[test]
    fn membership_examples() {
        for v in [
            builders::identity(2),
            builders::shift(3, 1, 1),
            builders::squeeze(0.5, true),
        ] {
            let m = ccr_membership(&member(v), TAU).unwrap();
            assert!(m.implementable, "{m:?}");
        }
        let m = ccr_membership(&member(builders::squeeze(0.5, true)), TAU).unwrap();
        assert!(m.hs_defect > 0.1);
    }

    #[test]
    fn p_for_shift() {
        let v = member(builders::shift(3, 1, 1));
        let sp = compute_p(&v, TAU).unwrap();
        let mut expect = CMatrix::zeros(8, 8);
        expect[(0, 0)] = c(1.0, 0.0);
        assert!(frobenius(&(sp.p.entries() - expect)) < 1e-12);
        let big = compute_p_ccr(&v, &sp, TAU).unwrap();
        assert!(frobenius(&(big.p.entries() - v.v().codomain().p1().entries())) < 1e-12);
        let k = compute_k_ccr(&v, &big.p, TAU).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(k.gram_defect() < 1e-12);
    }

    #[test]
    fn doubled_shift() {
        let v = member(builders::shift(2, 1, 2));
        let d = ccr_charge_data(&v, TAU).unwrap();
        let mut expect = CMatrix::zeros(12, 12);
        expect[(0, 0)] = c(1.0, 0.0);
        expect[(3, 3)] = c(1.0, 0.0);
        assert!(frobenius(&(d.small_p.p.entries() - expect)) < 1e-12);
        assert_eq!(d.k.dim(), 2);
        assert_eq!(d.stat_dim, StatDim::Infinite);
    }

    #[test]
    fn unitary_has_no_p() {
        let d = ccr_charge_data(&member(builders::identity(2)), TAU).unwrap();
        assert_eq!(frobenius(d.small_p.p.entries()), 0.0);
        assert_eq!(d.stat_dim, StatDim::Finite(1));
        assert!(frobenius(&(d.p().entries() - SelfDualSpace::new(2).p1().entries())) < 1e-12);
    }

    #[test]
    fn single_mode_squeeze_t() {
        let r: f64 = 0.5;
        let d = ccr_charge_data(&member(builders::squeeze(r, false)), TAU).unwrap();
        let t = d.t().block(Half::Two, Half::One);
        assert!((t[(0, 0)].norm() - r.tanh()).abs() < 1e-12);
        assert!(d.projection.checks.t_norm < 1.0);
    }

    #[test]
    fn statistics_dimensions() {
        assert_eq!(statistics_dimension_ccr(Index::Finite(0)), Ok(StatDim::Finite(1)));
        assert_eq!(statistics_dimension_ccr(Index::Finite(2)), Ok(StatDim::Infinite));
        assert_eq!(statistics_dimension_ccr(Index::Infinite), Ok(StatDim::Infinite));
        assert_eq!(statistics_dimension_ccr(Index::Finite(1)), Err(Error::OddIndex(1)));
    }
}
