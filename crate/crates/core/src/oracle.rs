//! Runs the Fock-space oracle against computed charge data.

use rayon::prelude::*;

use crate::car::{self, CarChargeData, CarIsometry};
use crate::ccr::{CcrChargeData, CcrIsometry, KappaForm};
use crate::error::{Error, Result};
use crate::fock::{self, BoseFock, FermiFock, ImplementerResiduals, ModeFock, OmegaFamily};
use crate::gauge::{self, Algebra, GaugeAction, GroupElement, RestrictedAction, SectorTable};
use crate::linalg::{self, CMatrix, C64, ONE};
use crate::selfdual::{BlockOperator, Half};

/// Tolerance for fermionic oracle identities.
pub const TAU_ORACLE: f64 = 1e-10;
/// Tolerance for the fermionic character comparison.
pub const TAU_THEOREM: f64 = 1e-8;
/// Base tolerance for bosonic comparisons, before adding the tail.
pub const TAU_BOSE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GaugeRun {
    pub action: GaugeAction,
    pub sample_size: usize,
    pub seed: u64,
}

/// Per-sample data of a gauge check.
#[derive(Clone, Debug)]
pub struct SampleRecord {
    pub label: String,
    /// `|U_cod V - V U_dom|`.
    pub commutator: f64,
    pub omega_span_residual: f64,
    pub implementer_span_residual: Option<f64>,
    pub det_h: C64,
    pub oracle: CMatrix,
    /// `det_h Lambda(U|k)` or `Sym(U|k)` in the family basis, when `k` is invariant.
    pub predicted: Option<CMatrix>,
    pub k_eigs: Option<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct TheoremCheck {
    pub table: SectorTable,
    pub per_level: Vec<f64>,
    pub max_trace_deviation: f64,
    pub max_matrix_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct GaugeCheck {
    pub group: String,
    pub samples: Vec<SampleRecord>,
    pub max_commutator: f64,
    pub max_omega_span_residual: f64,
    pub max_implementer_span_residual: Option<f64>,
    /// A reason instead of a comparison when the invariance hypothesis fails on the sample.
    pub theorem: std::result::Result<TheoremCheck, String>,
}

#[derive(Clone, Debug)]
pub struct CarOracleReport {
    pub domain_modes: usize,
    pub codomain_modes: usize,
    pub omega_p_norm_defect: f64,
    /// `max |pi(f) Omega_P|` over a frame of `ran(1 - P)`.
    pub vacuum_defect: f64,
    pub omega_gram_defect: f64,
    pub family: OmegaFamily,
    pub implementer_count: usize,
    pub implementer_residuals: ImplementerResiduals,
    pub gauge: Option<GaugeCheck>,
}

fn sample_elements(run: &GaugeRun) -> Vec<GroupElement> {
    run.action.samples(run.sample_size, run.seed)
}

fn k_compression(frame: &CMatrix, u: &CMatrix, kappa: Option<&KappaForm>) -> Option<(CMatrix, Vec<C64>)> {
    let m = gauge::compress(frame, u, kappa).ok()?;
    let eigs = gauge::restricted_eigenvalues(&m, 1e-8).ok()?;
    Some((m, eigs))
}

fn finish_gauge(
    algebra: Algebra,
    run: &GaugeRun,
    dim_k: usize,
    max_level: usize,
    levels: &[std::ops::Range<usize>],
    samples: Vec<SampleRecord>,
    tol: f64,
) -> Result<GaugeCheck> {
    let max_commutator = samples.iter().map(|s| s.commutator).fold(0.0, f64::max);
    let max_omega_span_residual = samples.iter().map(|s| s.omega_span_residual).fold(0.0, f64::max);
    let max_implementer_span_residual = samples
        .iter()
        .map(|s| s.implementer_span_residual)
        .try_fold(0.0f64, |a, r| r.map(|r| a.max(r)));
    let theorem = if let Some(bad) = samples.iter().find(|s| s.omega_span_residual > tol) {
        Err(format!(
            "span of Omega_alpha is not invariant under element {} (residual {:.3e})",
            bad.label, bad.omega_span_residual
        ))
    } else if let Some(bad) = samples.iter().find(|s| s.predicted.is_none()) {
        Err(format!("h or k is not invariant under element {}", bad.label))
    } else {
        let restricted: Vec<RestrictedAction> = samples
            .iter()
            .map(|s| RestrictedAction {
                label: s.label.clone(),
                det_h: s.det_h,
                k_eigs: s.k_eigs.clone().unwrap_or_default(),
            })
            .collect();
        let table = gauge::sector_table(
            algebra,
            &run.action.group,
            dim_k,
            max_level,
            &restricted,
            matches!(run.action.group, gauge::GroupTag::UN(_) | gauge::GroupTag::SUN(_)).then_some(run.seed),
        )?;
        let oracle: Vec<CMatrix> = samples.iter().map(|s| s.oracle.clone()).collect();
        let predicted: Vec<CMatrix> = samples.iter().filter_map(|s| s.predicted.clone()).collect();
        let cmp = match gauge::oracle_compare(&table, levels, &oracle, Some(&predicted), tol) {
            Ok(c) => c,
            Err(Error::Mismatch { .. }) => {
                gauge::oracle_compare(&table, levels, &oracle, Some(&predicted), f64::INFINITY)?
            }
            Err(e) => return Err(e),
        };
        let max_matrix_deviation = cmp.max_matrix_deviation.unwrap_or(0.0);
        Ok(TheoremCheck {
            table,
            pass: cmp.max_trace_deviation <= tol && max_matrix_deviation <= tol,
            per_level: cmp.per_level,
            max_trace_deviation: cmp.max_trace_deviation,
            max_matrix_deviation,
            tol,
        })
    };
    Ok(GaugeCheck {
        group: run.action.group.to_string(),
        samples,
        max_commutator,
        max_omega_span_residual,
        max_implementer_span_residual,
        theorem,
    })
}

fn gauge_pair(action: &GaugeAction, g: &GroupElement, v: &BlockOperator) -> Result<(BlockOperator, BlockOperator)> {
    let (u_dom, u_cod) = (action.lift(g, false)?, action.lift(g, true)?);
    for (what, u, n) in [
        ("gauge action on the domain", &u_dom, v.domain().n1()),
        ("gauge action on the codomain", &u_cod, v.codomain().n1()),
    ] {
        if u.domain().n1() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: u.domain().n1(),
            });
        }
    }
    Ok((u_dom, u_cod))
}

fn commutator_defect(v: &BlockOperator, u_dom: &BlockOperator, u_cod: &BlockOperator) -> f64 {
    linalg::frobenius(&(u_cod.entries() * v.entries() - v.entries() * u_dom.entries()))
}

/// Fermionic oracle: `Omega_P`, `Omega_alpha`, implementers and the optional gauge check.
pub fn car_oracle(
    v: &CarIsometry,
    data: &CarChargeData,
    cap: usize,
    gauge_run: Option<&GaugeRun>,
) -> Result<CarOracleReport> {
    let op = v.v();
    let dom = FermiFock::new(op.domain().n1(), cap)?;
    let cod = FermiFock::new(op.codomain().n1(), cap)?;
    let t = data.t.block(Half::Two, Half::One);
    let omega_p = fock::omega_p_fermi(&cod, data.h.frame(), &t);
    let omega_p_norm_defect = (linalg::vec_norm(&omega_p) - 1.0).abs();
    let complement = CMatrix::identity(op.codomain().dim(), op.codomain().dim()) - data.p.entries();
    let comp_frame = linalg::span_frame(&complement, None);
    let vacuum_defect = (0..comp_frame.ncols())
        .map(|j| linalg::vec_norm(&cod.apply_pi(&comp_frame.column(j).into_owned(), &omega_p)))
        .fold(0.0, f64::max);
    let family = fock::omega_alpha_fermi(&cod, &omega_p, data.k.frame())?;
    let omega_gram_defect = family.gram_defect();
    let set = fock::implementers_from_omegas(&dom, &cod, op, &family, TAU_ORACLE)?;
    let gauge = match gauge_run {
        None => None,
        Some(run) => {
            let elements = sample_elements(run);
            let samples = elements
                .par_iter()
                .map(|g| -> Result<SampleRecord> {
                    let (u_dom, u_cod) = gauge_pair(&run.action, g, op)?;
                    let u11_dom = fock::gauge_block(&u_dom, TAU_ORACLE)?;
                    let u11_cod = fock::gauge_block(&u_cod, TAU_ORACLE)?;
                    let rep = fock::charge_rep(&cod, &family, &u11_cod);
                    let gi = fock::gauge_invariance_residuals(&dom, &cod, &set, &family, &u11_dom, &u11_cod);
                    let det_h = gauge::char_det_h(data.h.frame(), u_cod.entries(), 1e-8).ok();
                    let kc = k_compression(data.k.frame(), u_cod.entries(), None);
                    let (predicted, k_eigs, det) = match (det_h, kc) {
                        (Some(d), Some((m, eigs))) => {
                            (Some(gauge::lambda_matrix(d, &m, &family.labels)), Some(eigs), d)
                        }
                        _ => (None, None, ONE),
                    };
                    Ok(SampleRecord {
                        label: g.label(),
                        commutator: commutator_defect(op, &u_dom, &u_cod),
                        omega_span_residual: rep.invariance_residual,
                        implementer_span_residual: Some(gi.implementer_span),
                        det_h: det,
                        oracle: rep.matrix,
                        predicted,
                        k_eigs,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let levels = family.levels();
            Some(finish_gauge(
                Algebra::Car,
                run,
                data.k.dim(),
                0,
                &levels,
                samples,
                TAU_THEOREM,
            )?)
        }
    };
    Ok(CarOracleReport {
        domain_modes: dom.modes(),
        codomain_modes: cod.modes(),
        omega_p_norm_defect,
        vacuum_defect,
        omega_gram_defect,
        implementer_count: set.len(),
        implementer_residuals: set.residuals.clone(),
        family,
        gauge,
    })
}

#[derive(Clone, Debug)]
pub struct CcrOracleReport {
    pub modes: usize,
    pub cutoff: usize,
    pub max_level: usize,
    pub tail: f64,
    pub det_factor: f64,
    pub omega_gram_defect: f64,
    /// Worst relative distance between the two constructions of `Omega_alpha`.
    pub proportionality: Option<f64>,
    /// `|pi(g...) Omega_P| / |psi(g...) Omega_P|` per multi-index.
    pub constants: Option<Vec<f64>>,
    pub labels: Vec<Vec<usize>>,
    pub tol: f64,
    pub gauge: Option<GaugeCheck>,
}

/// Bosonic oracle on the codomain modes with per-mode cutoff.
pub fn ccr_oracle(
    v: &CcrIsometry,
    data: &CcrChargeData,
    cutoff: usize,
    cap: usize,
    max_level: usize,
    max_tail: f64,
    gauge_run: Option<&GaugeRun>,
) -> Result<CcrOracleReport> {
    let op = v.v();
    let n = op.codomain().n1();
    let f = BoseFock::new(n, cutoff, cap)?;
    let t = data.t().block(Half::Two, Half::One);
    let vac = fock::omega_p_bose(&f, &t, max_tail)?;
    let fam = fock::omega_alpha_bose(&f, &vac.vector, &data.k.frame, max_level)?;
    let tol = TAU_BOSE + vac.tail;
    let kf = KappaForm::new(op.codomain());
    let gauge = match gauge_run {
        None => None,
        Some(run) => {
            let elements = sample_elements(run);
            let family = &fam.family;
            let samples = elements
                .par_iter()
                .map(|g| -> Result<SampleRecord> {
                    let (u_dom, u_cod) = gauge_pair(&run.action, g, op)?;
                    let u11 = fock::gauge_block(&u_cod, TAU_ORACLE)?;
                    let rep = fock::charge_rep(&f, family, &u11);
                    let kc = k_compression(&data.k.frame, u_cod.entries(), Some(&kf));
                    let (predicted, k_eigs) = match kc {
                        Some((m, eigs)) => (Some(gauge::sym_matrix(&m, &family.labels)), Some(eigs)),
                        None => (None, None),
                    };
                    Ok(SampleRecord {
                        label: g.label(),
                        commutator: commutator_defect(op, &u_dom, &u_cod),
                        omega_span_residual: rep.invariance_residual,
                        implementer_span_residual: None,
                        det_h: ONE,
                        oracle: rep.matrix,
                        predicted,
                        k_eigs,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let levels = family.levels();
            Some(finish_gauge(
                Algebra::Ccr,
                run,
                data.k.dim(),
                max_level,
                &levels,
                samples,
                tol,
            )?)
        }
    };
    Ok(CcrOracleReport {
        modes: n,
        cutoff,
        max_level,
        tail: vac.tail,
        det_factor: vac.det_factor,
        omega_gram_defect: fam.family.gram_defect(),
        proportionality: fam.proportionality,
        constants: fam.constants.clone(),
        labels: fam.family.labels.clone(),
        tol,
        gauge,
    })
}

/// `(-1)^{dim ker V11}` next to `det_h(-1)` and the oracle's action on `Omega_P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Z2Check {
    pub index: i8,
    pub det_h: C64,
    pub oracle: C64,
}

pub fn z2_check(v: &CarIsometry, data: &CarChargeData, cap: usize) -> Result<Z2Check> {
    let cod = FermiFock::new(v.v().codomain().n1(), cap)?;
    let t = data.t.block(Half::Two, Half::One);
    let omega_p = fock::omega_p_fermi(&cod, data.h.frame(), &t);
    let det_h = gauge::char_det_h(
        data.h.frame(),
        &(-CMatrix::identity(2 * cod.modes(), 2 * cod.modes())),
        1e-8,
    )?;
    let parity = cod.apply_parity(&omega_p);
    Ok(Z2Check {
        index: car::z2_index(v)?,
        det_h,
        oracle: linalg::inner(&omega_p, &parity),
    })
}
