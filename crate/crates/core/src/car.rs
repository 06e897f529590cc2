//! Fermionic charge data: membership, `h`, `T`, `P`, `k`, index and statistics dimension.

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMatrix, C64};
use crate::selfdual::{commutator, BlockOperator, Half, SelfDualSpace, Subspace};

/// Default absolute tolerance for invariant checks.
pub const TAU: f64 = 1e-10;
/// Tolerance for the `ker P11 = h`, `P21 P11^+ = T` round trip.
pub const TAU_RECOVERY: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclaredIndex {
    FromTruncation,
    Even(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Index {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatDim {
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for StatDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatDim::Finite(d) => write!(f, "{d}"),
            StatDim::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CarIsometry {
    v: BlockOperator,
    declared: DeclaredIndex,
}

impl CarIsometry {
    pub fn new(v: BlockOperator, declared: DeclaredIndex) -> Result<Self> {
        if v.codomain().n1() < v.domain().n1() {
            return Err(Error::ShapeMismatch(
                "codomain must be at least as large as the domain".into(),
            ));
        }
        if let DeclaredIndex::Even(k) = declared {
            if k % 2 == 1 {
                return Err(Error::OddIndex(k));
            }
            let structural = 2 * (v.codomain().n1() - v.domain().n1());
            if k != structural {
                return Err(Error::DimensionMismatch {
                    what: "declared index",
                    expected: structural,
                    found: k,
                });
            }
        }
        Ok(Self { v, declared })
    }

    pub fn from_truncation(v: BlockOperator) -> Result<Self> {
        Self::new(v, DeclaredIndex::FromTruncation)
    }

    pub fn v(&self) -> &BlockOperator {
        &self.v
    }

    pub fn declared(&self) -> DeclaredIndex {
        self.declared
    }

    /// `2 (n1(codomain) - n1(domain))`.
    pub fn structural_index(&self) -> usize {
        2 * (self.v.codomain().n1() - self.v.domain().n1())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub isometry_defect: f64,
    pub reality_defect: f64,
    pub hs_defect: f64,
    pub is_isometry: bool,
    pub is_real: bool,
    pub implementable: bool,
    pub tol: f64,
}

/// `|V* V - 1|`, `|conj(V) - V|` and `|[P1, V]|_HS`.
pub fn car_membership(v: &CarIsometry, tol: f64) -> Result<Membership> {
    let op = v.v();
    let n = op.domain().dim();
    let isometry_defect = frobenius(&(op.entries().adjoint() * op.entries() - CMatrix::identity(n, n)));
    Ok(membership_record(op, isometry_defect, tol))
}

pub(crate) fn membership_record(op: &BlockOperator, isometry_defect: f64, tol: f64) -> Membership {
    let reality_defect = frobenius(&(op.conjugate().entries() - op.entries()));
    let hs_defect = hs_commutator_p1(op);
    let is_isometry = isometry_defect <= tol;
    let is_real = reality_defect <= tol;
    Membership {
        isometry_defect,
        reality_defect,
        hs_defect,
        is_isometry,
        is_real,
        implementable: is_isometry && is_real && hs_defect.is_finite(),
        tol,
    }
}

/// `|P1 V - V P1|_HS` for a possibly rectangular `V`.
pub fn hs_commutator_p1(v: &BlockOperator) -> f64 {
    let lhs = &v.codomain().p1() * v;
    let rhs = v * &v.domain().p1();
    crate::selfdual::hs_norm(&(&lhs - &rhs))
}

fn kernel_of(m: &CMatrix) -> CMatrix {
    linalg::kernel_frame_default(m)
}

/// `h = V12 (ker V22)`, a subspace of `K1` of the codomain.
pub fn compute_h(v: &CarIsometry) -> Result<Subspace> {
    let op = v.v();
    let cod = op.codomain();
    let ker = kernel_of(&op.block(Half::Two, Half::Two));
    let img = op.block(Half::One, Half::Two) * ker;
    Subspace::span(cod, &cod.embed_k1_frame(&img))
}

/// `T = V21 V11^+ - (V22^+)* V12* [ker V11*]`, stored as its `K1 -> K2` block.
pub fn compute_t_car(v: &CarIsometry, h: &Subspace, tol: f64) -> Result<BlockOperator> {
    let op = v.v();
    let v11 = op.block(Half::One, Half::One);
    let v12 = op.block(Half::One, Half::Two);
    let v21 = op.block(Half::Two, Half::One);
    let v22 = op.block(Half::Two, Half::Two);
    let coker = kernel_of(&v11.adjoint());
    let proj = linalg::projector(&coker);
    let t = &v21 * linalg::pinv_default(&v11) - linalg::pinv_default(&v22).adjoint() * v12.adjoint() * proj;
    check_t(&t, h, tol)?;
    let cod = op.codomain();
    BlockOperator::embed_block(cod, cod, Half::Two, Half::One, &t)
}

fn check_t(t: &CMatrix, h: &Subspace, tol: f64) -> Result<()> {
    let scale = frobenius(t).max(1.0);
    let defect = frobenius(&(t.transpose() + t));
    if defect > tol * scale {
        return Err(Error::AntisymmetryViolation {
            kind: "antisymmetric",
            defect,
            tol: tol * scale,
        });
    }
    let n = t.nrows();
    let hk = h.frame().rows(0, n).into_owned();
    let th = frobenius(&(t * hk));
    if th > tol * scale {
        return Err(Error::AntisymmetryViolation {
            kind: "vanishing on h",
            defect: th,
            tol: tol * scale,
        });
    }
    Ok(())
}

/// Measured defects of a basis projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionChecks {
    pub idempotent: f64,
    pub selfadjoint: f64,
    pub conjugate: f64,
    pub recovery_h: f64,
    pub recovery_t: f64,
}

#[derive(Clone, Debug)]
pub struct CarProjection {
    pub p: BlockOperator,
    pub checks: ProjectionChecks,
}

/// `P = (P1 + T)(P1 + T*T)^{-1}(P1 + T*) - [h] + [h*]` with self-tests.
pub fn compute_p_car(h: &Subspace, t: &BlockOperator, tol: f64) -> Result<CarProjection> {
    let space = t.codomain();
    let n = space.n1();
    let tb = t.block(Half::Two, Half::One);
    let mut graph = CMatrix::zeros(2 * n, n);
    graph.view_mut((0, 0), (n, n)).fill_with_identity();
    graph.view_mut((n, 0), (n, n)).copy_from(&tb);
    let gram = CMatrix::identity(n, n) + tb.adjoint() * &tb;
    let inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("1 + T*T is singular".into()))?;
    let mut p = &graph * inv * graph.adjoint();
    p -= linalg::projector(h.frame());
    p += linalg::projector(h.conjugate().frame());
    let p = BlockOperator::square(space, p)?;
    let checks = projection_checks(&p, Some(h), &tb)?;
    if checks.idempotent > tol || checks.selfadjoint > tol || checks.conjugate > tol {
        return Err(Error::RecoveryMismatch {
            what: "basis projection identities",
            residual: checks.idempotent.max(checks.selfadjoint).max(checks.conjugate),
            tol,
        });
    }
    if checks.recovery_h > TAU_RECOVERY {
        return Err(Error::RecoveryMismatch {
            what: "ker P11 = h",
            residual: checks.recovery_h,
            tol: TAU_RECOVERY,
        });
    }
    if checks.recovery_t > TAU_RECOVERY {
        return Err(Error::RecoveryMismatch {
            what: "P21 P11^+ = T",
            residual: checks.recovery_t,
            tol: TAU_RECOVERY,
        });
    }
    Ok(CarProjection { p, checks })
}

fn projection_checks(p: &BlockOperator, h: Option<&Subspace>, t: &CMatrix) -> Result<ProjectionChecks> {
    let space = p.codomain();
    let pm = p.entries();
    let id = CMatrix::identity(space.dim(), space.dim());
    let idempotent = frobenius(&(pm * pm - pm));
    let selfadjoint = frobenius(&(pm - pm.adjoint()));
    let conjugate = frobenius(&(p.conjugate().entries() - (&id - pm)));
    let p11 = p.block(Half::One, Half::One);
    let p21 = p.block(Half::Two, Half::One);
    let recovery_h = match h {
        Some(h) => {
            let ker = kernel_of(&p11);
            let hk = h.frame().rows(0, space.n1()).into_owned();
            frobenius(&(linalg::projector(&ker) - linalg::projector(&hk)))
        }
        None => 0.0,
    };
    let recovery_t = frobenius(&(p21 * linalg::pinv_default(&p11) - t));
    Ok(ProjectionChecks {
        idempotent,
        selfadjoint,
        conjugate,
        recovery_h,
        recovery_t,
    })
}

/// Numerical cokernel `ker V*` in the codomain.
pub fn cokernel(v: &BlockOperator) -> Subspace {
    let f = kernel_of(&v.entries().adjoint());
    Subspace::new(v.codomain(), f).expect("kernel frames are orthonormal")
}

/// Structural index, audited against `dim ker V*`.
pub fn index_car(v: &CarIsometry) -> Result<usize> {
    let structural = v.structural_index();
    let numeric = cokernel(v.v()).dim();
    if numeric != structural {
        return Err(Error::DimensionMismatch {
            what: "dim ker V*",
            expected: structural,
            found: numeric,
        });
    }
    if structural % 2 == 1 {
        return Err(Error::OddIndex(structural));
    }
    Ok(structural)
}

/// `k = P (ker V*)`, checked to have dimension `ind / 2`.
pub fn compute_k_car(v: &CarIsometry, p: &BlockOperator) -> Result<Subspace> {
    let ind = index_car(v)?;
    let coker = cokernel(v.v());
    let img = p.entries() * coker.frame();
    let k = Subspace::span(p.codomain(), &img)?;
    if k.dim() != ind / 2 {
        return Err(Error::DimensionMismatch {
            what: "dim k",
            expected: ind / 2,
            found: k.dim(),
        });
    }
    Ok(k)
}

pub fn statistics_dimension_car(ind: Index) -> Result<StatDim> {
    match ind {
        Index::Infinite => Ok(StatDim::Infinite),
        Index::Finite(k) if k % 2 == 1 => Err(Error::OddIndex(k)),
        Index::Finite(k) => {
            let half = k / 2;
            if half >= 64 {
                Err(Error::Overflow(half))
            } else {
                Ok(StatDim::Finite(1u64 << half))
            }
        }
    }
}

/// `(-1)^{dim ker V11}` for index-zero `V`.
pub fn z2_index(v: &CarIsometry) -> Result<i8> {
    let ind = index_car(v)?;
    if ind != 0 {
        return Err(Error::NonzeroIndex(ind));
    }
    let k = kernel_of(&v.v().block(Half::One, Half::One)).ncols();
    Ok(if k.is_multiple_of(2) { 1 } else { -1 })
}

fn check_grading(q: &[i32], n: usize) -> Result<()> {
    if q.len() != n {
        return Err(Error::InvalidGrading(format!("{} labels for {} modes", q.len(), n)));
    }
    if let Some(bad) = q.iter().find(|&&x| x != 1 && x != -1) {
        return Err(Error::InvalidGrading(format!("label {bad} is not +1 or -1")));
    }
    Ok(())
}

fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn positions(q: &[i32], sign: i32) -> Vec<usize> {
    (0..q.len()).filter(|&i| q[i] == sign).collect()
}

/// Off-diagonal mass of `V11` with respect to the gradings.
pub fn grading_defect(v11: &CMatrix, q_dom: &[i32], q_cod: &[i32]) -> f64 {
    let (pd, md) = (positions(q_dom, 1), positions(q_dom, -1));
    let (pc, mc) = (positions(q_cod, 1), positions(q_cod, -1));
    let a = frobenius(&select(v11, &pc, &md));
    let b = frobenius(&select(v11, &mc, &pd));
    (a * a + b * b).sqrt()
}

/// `dim ker V++* - dim ker V++` for `V11 = V++ + V--`.
pub fn u1_charge(v: &CarIsometry, q_dom: &[i32], q_cod: &[i32]) -> Result<i64> {
    let ind = index_car(v)?;
    if ind != 0 {
        return Err(Error::NonzeroIndex(ind));
    }
    let op = v.v();
    check_grading(q_dom, op.domain().n1())?;
    check_grading(q_cod, op.codomain().n1())?;
    let v11 = op.block(Half::One, Half::One);
    let defect = grading_defect(&v11, q_dom, q_cod);
    if defect > TAU {
        return Err(Error::NotChargeDiagonal { defect });
    }
    let vpp = select(&v11, &positions(q_cod, 1), &positions(q_dom, 1));
    let ker = kernel_of(&vpp).ncols() as i64;
    let coker = kernel_of(&vpp.adjoint()).ncols() as i64;
    Ok(coker - ker)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeConvention {
    /// `det_h(U_lambda) = exp(+i lambda ind)`.
    Plus,
    /// `det_h(U_lambda) = exp(-i lambda ind)`.
    Minus,
    /// Index zero, both conventions agree.
    Both,
    Neither,
}

#[derive(Clone, Debug, PartialEq)]
pub struct U1Audit {
    pub index: i64,
    pub det_h_winding: i64,
    pub convention: ChargeConvention,
    /// `|[Q, V]|` for the grading lifted to `K`; zero iff the U(1) commutes with `V`.
    pub gauge_defect: f64,
}

fn grading_operator(space: SelfDualSpace, q: &[i32]) -> CMatrix {
    let n = space.n1();
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            linalg::ZERO
        } else if i < n {
            C64::new(q[i] as f64, 0.0)
        } else {
            C64::new(-q[i - n] as f64, 0.0)
        }
    })
}

/// Index together with the winding of `lambda -> det_h(U_lambda)`.
pub fn u1_charge_audit(v: &CarIsometry, q_dom: &[i32], q_cod: &[i32], h: &Subspace) -> Result<U1Audit> {
    let index = u1_charge(v, q_dom, q_cod)?;
    let op = v.v();
    let qd = grading_operator(op.domain(), q_dom);
    let qc = grading_operator(op.codomain(), q_cod);
    let gauge_defect = frobenius(&(&qc * op.entries() - op.entries() * &qd));
    let qh = h.frame().adjoint() * &qc * h.frame();
    let winding = qh.trace().re.round() as i64;
    let convention = match (index, winding) {
        (0, 0) => ChargeConvention::Both,
        (i, w) if i == w => ChargeConvention::Plus,
        (i, w) if i == -w => ChargeConvention::Minus,
        _ => ChargeConvention::Neither,
    };
    Ok(U1Audit {
        index,
        det_h_winding: winding,
        convention,
        gauge_defect,
    })
}

/// Everything the pipeline derives from one CAR member.
#[derive(Clone, Debug)]
pub struct CarChargeData {
    pub membership: Membership,
    pub h: Subspace,
    pub t: BlockOperator,
    pub p: BlockOperator,
    pub checks: ProjectionChecks,
    pub k: Subspace,
    pub ind: usize,
    pub stat_dim: StatDim,
    pub hs_defect: f64,
    pub t_norm: f64,
}

pub fn car_charge_data(v: &CarIsometry, tol: f64) -> Result<CarChargeData> {
    let membership = car_membership(v, tol)?;
    if !membership.implementable {
        return Err(Error::NotAMember(format!(
            "isometry defect {:.3e}, reality defect {:.3e} (tolerance {:.1e})",
            membership.isometry_defect, membership.reality_defect, tol
        )));
    }
    let ind = index_car(v)?;
    let h = compute_h(v)?;
    let t = compute_t_car(v, &h, tol)?;
    let CarProjection { p, checks } = compute_p_car(&h, &t, tol)?;
    let k = compute_k_car(v, &p)?;
    let stat_dim = statistics_dimension_car(Index::Finite(ind))?;
    let t_norm = linalg::op_norm(&t.block(Half::Two, Half::One));
    Ok(CarChargeData {
        hs_defect: membership.hs_defect,
        membership,
        h,
        t,
        p,
        checks,
        k,
        ind,
        stat_dim,
        t_norm,
    })
}

/// `|(1 - [S]) U [S]|` for a frame `S`.
pub fn invariance_defect(frame: &CMatrix, u: &CMatrix) -> f64 {
    let uf = u * frame;
    frobenius(&(&uf - frame * (frame.adjoint() * &uf)))
}

/// `|[A, B]|_F` on operators of a common space.
pub fn commutator_norm(a: &BlockOperator, b: &BlockOperator) -> f64 {
    frobenius(commutator(a, b).entries())
}
