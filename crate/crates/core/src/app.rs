//! Command implementations behind the binary: each returns a JSON report and an exit code.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::car::{self, CarChargeData, CarIsometry, DeclaredIndex, Membership};
use crate::ccr::{self, CcrChargeData, CcrIsometry, KappaForm};
use crate::dirac;
use crate::error::{Error, Result};
use crate::gauge::{self, Algebra, GaugeAction, GroupTag, ModeAction, RestrictedAction, SectorTable};
use crate::linalg::{self, C64};
use crate::model::{self, AlgebraTag, Builder, GaugeSpec, Model, Realized};
use crate::oracle::{self, CarOracleReport, CcrOracleReport, GaugeCheck, GaugeRun};
use crate::report::{self, at_least, at_most, complex, complex_list, equals};
use crate::selfdual::Half;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_MEMBER: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Highest CCR level in sector tables and the bosonic oracle.
pub const DEFAULT_LEVELS: usize = 5;
/// Largest accepted norm of the discarded part of the bosonic vacuum.
pub const DEFAULT_MAX_TAIL: f64 = 5e-2;
pub const DEFAULT_CUTOFFS: [usize; 4] = [64, 128, 256, 512];
/// Localization bound at the largest cutoff.
pub const TAU_LOCALIZATION: f64 = 1e-3;
/// Entrywise Gram bound at the largest cutoff.
pub const TAU_GRAM: f64 = 2e-2;

#[derive(Clone, Debug)]
pub struct Options {
    pub algebra: Option<AlgebraTag>,
    pub tol: f64,
    pub seed: Option<u64>,
    pub fock_cap: usize,
    pub bose_cutoff: usize,
    pub cutoffs: Vec<usize>,
    pub gauge_n: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            algebra: None,
            tol: car::TAU,
            seed: None,
            fock_cap: crate::fock::DEFAULT_FOCK_CAP,
            bose_cutoff: 8,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
            gauge_n: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
    pub summary: Vec<String>,
}

impl Outcome {
    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::ShapeMismatch(_)
        | Error::DimensionMismatch { .. }
        | Error::CapExceeded { .. }
        | Error::InvalidGrading(_)
        | Error::WindowTooSmall(_) => EXIT_INPUT,
        Error::NotAMember(_) => EXIT_NOT_MEMBER,
        _ => EXIT_NUMERICAL,
    }
}

fn fail(mut head: Map<String, Value>, stage: &str, e: &Error, code: i32) -> Outcome {
    head.insert(
        "error".into(),
        json!({ "stage": stage, "message": e.to_string(), "exit_code": code }),
    );
    Outcome {
        report: Value::Object(head),
        exit_code: code,
        summary: vec![format!("error ({stage}): {e}")],
    }
}

fn membership_json(m: &Membership) -> Value {
    json!({
        "isometry_defect": at_most(m.isometry_defect, m.tol),
        "reality_defect": at_most(m.reality_defect, m.tol),
        "hs_norm_commutator_p1": m.hs_defect,
        "is_isometry": m.is_isometry,
        "is_real": m.is_real,
        "implementable": m.implementable,
    })
}

fn table_json(t: &SectorTable) -> Value {
    json!({
        "algebra": t.algebra.to_string(),
        "group": t.group.to_string(),
        "sample_size": t.sample_size,
        "seed": t.seed,
        "tol_char": t.tol_char,
        "sample_labels": t.sample_labels,
        "rows": t.rows.iter().map(|r| json!({
            "level": r.level,
            "dimension": r.dimension,
            "class": r.class,
            "characters": complex_list(&r.characters),
        })).collect::<Vec<_>>(),
        "annotation": t.annotation.as_ref().map(|a| json!({
            "expected": a.expected,
            "expected_classes": a.expected_classes,
            "classes": t.classes(),
            "pass": a.matches,
        })),
    })
}

fn sample_seed(spec: &GaugeSpec, opts: &Options) -> u64 {
    opts.seed.or(spec.seed).unwrap_or(0)
}

/// Restricted actions on `h` and `k` for every sample element.
fn restricted_actions(
    action: &GaugeAction,
    elements: &[gauge::GroupElement],
    h_frame: Option<&linalg::CMatrix>,
    k_frame: &linalg::CMatrix,
    kappa: Option<&KappaForm>,
) -> Result<Vec<RestrictedAction>> {
    elements
        .par_iter()
        .map(|g| {
            let u = action.lift(g, true)?;
            let det_h = match h_frame {
                Some(h) => gauge::char_det_h(h, u.entries(), 1e-8)?,
                None => linalg::ONE,
            };
            let m = gauge::compress(k_frame, u.entries(), kappa)?;
            Ok(RestrictedAction {
                label: g.label(),
                det_h,
                k_eigs: gauge::restricted_eigenvalues(&m, 1e-8)?,
            })
        })
        .collect()
}

fn charges_of(action: &GaugeAction) -> Option<(Vec<i32>, Vec<i32>)> {
    let pick = |modes: &[ModeAction]| -> Option<Vec<i32>> {
        modes
            .iter()
            .map(|m| match m {
                ModeAction::Charge(q) => Some(*q),
                _ => None,
            })
            .collect()
    };
    Some((pick(&action.domain)?, pick(&action.codomain)?))
}

struct CarRun {
    iso: CarIsometry,
    data: CarChargeData,
    gauge: Option<(GaugeAction, u64, usize)>,
}

struct CcrRun {
    iso: CcrIsometry,
    data: CcrChargeData,
    gauge: Option<(GaugeAction, u64, usize)>,
}

enum Stage<T> {
    Done(T),
    Stop(Outcome),
}

fn car_stage(
    realized: &Realized,
    gspec: Option<&GaugeSpec>,
    opts: &Options,
    head: &mut Map<String, Value>,
    summary: &mut Vec<String>,
) -> Stage<CarRun> {
    let iso = match CarIsometry::new(realized.v.clone(), DeclaredIndex::FromTruncation) {
        Ok(i) => i,
        Err(e) => return Stage::Stop(fail(head.clone(), "membership", &e, exit_code_for(&e))),
    };
    let membership = match car::car_membership(&iso, opts.tol) {
        Ok(m) => m,
        Err(e) => return Stage::Stop(fail(head.clone(), "membership", &e, exit_code_for(&e))),
    };
    head.insert("membership".into(), membership_json(&membership));
    if !membership.implementable {
        let e = Error::NotAMember(format!(
            "V*V = 1 defect {:.3e}, conjugation defect {:.3e}",
            membership.isometry_defect, membership.reality_defect
        ));
        return Stage::Stop(fail(head.clone(), "membership", &e, EXIT_NOT_MEMBER));
    }
    let data = match car::car_charge_data(&iso, opts.tol) {
        Ok(d) => d,
        Err(e) => return Stage::Stop(fail(head.clone(), "charge_data", &e, exit_code_for(&e))),
    };
    let coker = car::cokernel(iso.v()).dim();
    let c = &data.checks;
    head.insert(
        "charge_data".into(),
        json!({
            "dim_h": data.h.dim(),
            "dim_k": data.k.dim(),
            "ind": data.ind,
            "ind_vs_dim_ker_v_adjoint": equals(data.ind, coker),
            "stat_dim": data.stat_dim.to_string(),
            "hs_defect": data.hs_defect,
            "t_norm": data.t_norm,
            "checks": {
                "p_idempotent": at_most(c.idempotent, car::TAU),
                "p_selfadjoint": at_most(c.selfadjoint, car::TAU),
                "p_conjugate": at_most(c.conjugate, car::TAU),
                "ker_p11_equals_h": at_most(c.recovery_h, car::TAU_RECOVERY),
                "p21_pinv_p11_equals_t": at_most(c.recovery_t, car::TAU_RECOVERY),
            },
        }),
    );
    if data.ind == 0 {
        if let Ok(z) = car::z2_index(&iso) {
            head.insert("z2_index".into(), json!(z));
        }
    }
    summary.push(format!(
        "car: dim h = {}, dim k = {}, ind = {}, stat_dim = {}",
        data.h.dim(),
        data.k.dim(),
        data.ind,
        data.stat_dim
    ));
    let gauge = match gspec {
        None => None,
        Some(spec) => {
            let action = match model::complete_gauge(spec, realized) {
                Ok(a) => a,
                Err(e) => return Stage::Stop(fail(head.clone(), "gauge", &e, exit_code_for(&e))),
            };
            let seed = sample_seed(spec, opts);
            let elements = action.samples(spec.sample_size, seed);
            let table =
                restricted_actions(&action, &elements, Some(data.h.frame()), data.k.frame(), None).and_then(|r| {
                    gauge::sector_table(
                        Algebra::Car,
                        &action.group,
                        data.k.dim(),
                        0,
                        &r,
                        matches!(action.group, GroupTag::UN(_) | GroupTag::SUN(_)).then_some(seed),
                    )
                });
            match table {
                Ok(t) => {
                    summary.push(format!("sector classes by level: {:?}", t.classes()));
                    head.insert("sector_table".into(), table_json(&t));
                }
                Err(e) => return Stage::Stop(fail(head.clone(), "sector_table", &e, exit_code_for(&e))),
            }
            if action.group == GroupTag::U1 {
                if let Some((qd, qc)) = charges_of(&action) {
                    let audit = car::u1_charge_audit(&iso, &qd, &qc, &data.h);
                    head.insert(
                        "u1_charge".into(),
                        match audit {
                            Ok(a) => json!({
                                "index": a.index,
                                "det_h_winding": a.det_h_winding,
                                "convention": format!("{:?}", a.convention),
                                "gauge_defect": a.gauge_defect,
                            }),
                            Err(e) => json!({ "not_applicable": e.to_string() }),
                        },
                    );
                }
            }
            Some((action, seed, spec.sample_size))
        }
    };
    Stage::Done(CarRun { iso, data, gauge })
}

fn ccr_stage(
    realized: &Realized,
    gspec: Option<&GaugeSpec>,
    opts: &Options,
    head: &mut Map<String, Value>,
    summary: &mut Vec<String>,
) -> Stage<CcrRun> {
    let iso = match CcrIsometry::new(realized.v.clone()) {
        Ok(i) => i,
        Err(e) => return Stage::Stop(fail(head.clone(), "membership", &e, exit_code_for(&e))),
    };
    let membership = match ccr::ccr_membership(&iso, opts.tol) {
        Ok(m) => m,
        Err(e) => return Stage::Stop(fail(head.clone(), "membership", &e, exit_code_for(&e))),
    };
    head.insert("membership".into(), membership_json(&membership));
    if !membership.implementable {
        let e = Error::NotAMember(format!(
            "V+V = 1 defect {:.3e}, conjugation defect {:.3e}",
            membership.isometry_defect, membership.reality_defect
        ));
        return Stage::Stop(fail(head.clone(), "membership", &e, EXIT_NOT_MEMBER));
    }
    let data = match ccr::ccr_charge_data(&iso, opts.tol) {
        Ok(d) => d,
        Err(e) => return Stage::Stop(fail(head.clone(), "charge_data", &e, exit_code_for(&e))),
    };
    let pc = &data.small_p.checks;
    let bc = &data.projection.checks;
    let t_norm = linalg::op_norm(&data.t().block(Half::Two, Half::One));
    head.insert(
        "charge_data".into(),
        json!({
            "dim_k": data.k.dim(),
            "ind": data.ind,
            "stat_dim": data.stat_dim.to_string(),
            "hs_defect": data.hs_defect,
            "t_norm": at_most(t_norm, 1.0 - ccr::NORM_MARGIN),
            "k_kappa_gram_defect": at_most(data.k.gram_defect(), car::TAU),
            "checks": {
                "p_idempotent": at_most(pc.idempotent, car::TAU),
                "p_kappa_selfadjoint": at_most(pc.kappa_selfadjoint, car::TAU),
                "p_support": at_most(pc.support, car::TAU),
                "p_split": at_most(pc.split, car::TAU),
                "big_p_idempotent": at_most(bc.idempotent, car::TAU),
                "big_p_kappa_selfadjoint": at_most(bc.kappa_selfadjoint, car::TAU),
                "big_p_conjugate": at_most(bc.conjugate, car::TAU),
                "t_symmetry": at_most(bc.t_symmetry, car::TAU),
            },
        }),
    );
    summary.push(format!(
        "ccr: dim k = {}, ind = {}, stat_dim = {}, |T| = {:.6}",
        data.k.dim(),
        data.ind,
        data.stat_dim,
        t_norm
    ));
    let gauge = match gspec {
        None => None,
        Some(spec) => {
            let action = match model::complete_gauge(spec, realized) {
                Ok(a) => a,
                Err(e) => return Stage::Stop(fail(head.clone(), "gauge", &e, exit_code_for(&e))),
            };
            let seed = sample_seed(spec, opts);
            let elements = action.samples(spec.sample_size, seed);
            let kf = KappaForm::new(iso.v().codomain());
            let table = restricted_actions(&action, &elements, None, &data.k.frame, Some(&kf)).and_then(|r| {
                gauge::sector_table(
                    Algebra::Ccr,
                    &action.group,
                    data.k.dim(),
                    DEFAULT_LEVELS,
                    &r,
                    matches!(action.group, GroupTag::UN(_) | GroupTag::SUN(_)).then_some(seed),
                )
            });
            match table {
                Ok(t) => {
                    summary.push(format!("sector classes by level: {:?}", t.classes()));
                    head.insert("sector_table".into(), table_json(&t));
                }
                Err(e) => return Stage::Stop(fail(head.clone(), "sector_table", &e, exit_code_for(&e))),
            }
            Some((action, seed, spec.sample_size))
        }
    };
    Stage::Done(CcrRun { iso, data, gauge })
}

struct Prepared {
    head: Map<String, Value>,
    model: Model,
    algebra: AlgebraTag,
}

fn prepare(command: &str, input: &[u8], opts: &Options) -> std::result::Result<Prepared, Outcome> {
    let digest = report::sha256_hex(input);
    let mut head = report::header(command, &digest, opts.seed);
    head.insert(
        "tolerances".into(),
        json!({
            "membership": opts.tol,
            "projection": car::TAU,
            "recovery": car::TAU_RECOVERY,
            "oracle": oracle::TAU_ORACLE,
            "theorem_fermionic": oracle::TAU_THEOREM,
            "theorem_bosonic_base": oracle::TAU_BOSE,
            "characters": gauge::TAU_CHAR,
        }),
    );
    let text = match std::str::from_utf8(input) {
        Ok(t) => t,
        Err(_) => {
            let e = Error::InvalidInput("input is not UTF-8".into());
            return Err(fail(head, "input", &e, EXIT_INPUT));
        }
    };
    let model = match Model::parse(text) {
        Ok(m) => m,
        Err(e) => return Err(fail(head, "input", &e, EXIT_INPUT)),
    };
    let algebra = opts.algebra.or(model.algebra).unwrap_or(AlgebraTag::Car);
    head.insert("algebra".into(), json!(algebra.to_string()));
    if let Some(l) = &model.labels {
        head.insert("labels".into(), json!(l));
    }
    if let Some(b) = model.builder() {
        head.insert("builder".into(), json!(format!("{b:?}")));
    }
    Ok(Prepared { head, model, algebra })
}

fn finish(head: Map<String, Value>, mut summary: Vec<String>) -> Outcome {
    let report = Value::Object(head);
    let code = if report::all_pass(&report) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    };
    if code != EXIT_OK {
        summary.push("a self-check failed; see the report".into());
    }
    Outcome {
        report,
        exit_code: code,
        summary,
    }
}

/// Membership, charge data and sector table.
pub fn analyze(input: &[u8], opts: &Options) -> Outcome {
    let Prepared {
        mut head,
        model,
        algebra,
    } = match prepare("analyze", input, opts) {
        Ok(p) => p,
        Err(o) => return o,
    };
    if let Some(Builder::DiracV { w, m_loc }) = model.builder() {
        return dirac_single(head, *w, *m_loc, opts);
    }
    let realized = match model::realize(&model.isometry) {
        Ok(r) => r,
        Err(e) => return fail(head, "input", &e, exit_code_for(&e)),
    };
    let mut summary = Vec::new();
    match algebra {
        AlgebraTag::Car => {
            if let Stage::Stop(o) = car_stage(&realized, model.gauge.as_ref(), opts, &mut head, &mut summary) {
                return o;
            }
        }
        AlgebraTag::Ccr => {
            if let Stage::Stop(o) = ccr_stage(&realized, model.gauge.as_ref(), opts, &mut head, &mut summary) {
                return o;
            }
        }
    }
    finish(head, summary)
}

fn gauge_check_json(g: &GaugeCheck, seed: u64, sample_size: usize, invariance_tol: f64) -> Value {
    let theorem = match &g.theorem {
        Ok(t) => json!({
            "per_level_trace_deviation": t.per_level,
            "trace_deviation": at_most(t.max_trace_deviation, t.tol),
            "matrix_deviation": at_most(t.max_matrix_deviation, t.tol),
            "sector_table": table_json(&t.table),
        }),
        Err(reason) => json!({ "skipped": reason }),
    };
    json!({
        "group": g.group,
        "seed": seed,
        "requested_sample_size": sample_size,
        "samples": g.samples.iter().map(|s| json!({
            "label": s.label,
            "commutator_with_v": s.commutator,
            "omega_span_residual": s.omega_span_residual,
            "implementer_span_residual": s.implementer_span_residual,
            "det_h": complex(s.det_h),
        })).collect::<Vec<_>>(),
        "max_commutator_with_v": g.max_commutator,
        "max_omega_span_residual": g.max_omega_span_residual,
        "max_implementer_span_residual": g.max_implementer_span_residual,
        "gauge_commutes": g.max_commutator <= invariance_tol,
        "span_invariant": g.max_omega_span_residual <= invariance_tol,
        "theorem": theorem,
    })
}

fn car_oracle_json(r: &CarOracleReport, expected: usize, gauge: Option<(u64, usize)>) -> Value {
    let res = &r.implementer_residuals;
    json!({
        "fock": "fermionic",
        "domain_modes": r.domain_modes,
        "codomain_modes": r.codomain_modes,
        "omega_p_norm_defect": at_most(r.omega_p_norm_defect, oracle::TAU_ORACLE),
        "omega_p_annihilated_by_ran_1_minus_p": at_most(r.vacuum_defect, oracle::TAU_ORACLE),
        "omega_alpha_gram_defect": at_most(r.omega_gram_defect, oracle::TAU_ORACLE),
        "omega_labels": r.family.labels,
        "implementer_count": equals(r.implementer_count, expected),
        "implementers": {
            "orthonormality": at_most(res.orthonormality, oracle::TAU_ORACLE),
            "completeness": at_most(res.completeness, oracle::TAU_ORACLE),
            "implementation": at_most(res.implementation, oracle::TAU_ORACLE),
        },
        "gauge": r.gauge.as_ref().zip(gauge).map(|(g, (seed, n))| gauge_check_json(g, seed, n, oracle::TAU_ORACLE)),
    })
}

fn ccr_oracle_json(r: &CcrOracleReport, gauge: Option<(u64, usize)>) -> Value {
    json!({
        "fock": "bosonic",
        "modes": r.modes,
        "cutoff": r.cutoff,
        "max_level": r.max_level,
        "tail_bound": r.tail,
        "det_factor": r.det_factor,
        "tolerance": r.tol,
        "omega_alpha_gram_defect": at_most(r.omega_gram_defect, r.tol),
        "omega_labels": r.labels,
        "route_proportionality": r.proportionality.map(|p| at_most(p, r.tol)),
        "route_constants": r.constants,
        "gauge": r.gauge.as_ref().zip(gauge).map(|(g, (seed, n))| gauge_check_json(g, seed, n, r.tol)),
    })
}

/// Analysis followed by the Fock-space verification.
pub fn oracle_cmd(input: &[u8], opts: &Options) -> Outcome {
    let Prepared {
        mut head,
        model,
        algebra,
    } = match prepare("oracle", input, opts) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let realized = match model::realize(&model.isometry) {
        Ok(r) => r,
        Err(e) => return fail(head, "input", &e, exit_code_for(&e)),
    };
    let mut summary = Vec::new();
    match algebra {
        AlgebraTag::Car => {
            let run = match car_stage(&realized, model.gauge.as_ref(), opts, &mut head, &mut summary) {
                Stage::Done(r) => r,
                Stage::Stop(o) => return o,
            };
            let grun = run.gauge.as_ref().map(|(a, seed, n)| GaugeRun {
                action: a.clone(),
                sample_size: *n,
                seed: *seed,
            });
            match oracle::car_oracle(&run.iso, &run.data, opts.fock_cap, grun.as_ref()) {
                Ok(r) => {
                    let expected = 1usize << (run.data.ind / 2);
                    summary.push(format!(
                        "oracle: {} implementers, implementation residual {:.3e}",
                        r.implementer_count, r.implementer_residuals.implementation
                    ));
                    if let Some(g) = &r.gauge {
                        if let Ok(t) = &g.theorem {
                            summary.push(format!("theorem: max deviation {:.3e}", t.max_matrix_deviation));
                        }
                    }
                    head.insert(
                        "oracle".into(),
                        car_oracle_json(&r, expected, run.gauge.as_ref().map(|g| (g.1, g.2))),
                    );
                    if run.data.ind == 0 {
                        if let Ok(z) = oracle::z2_check(&run.iso, &run.data, opts.fock_cap) {
                            head.insert(
                                "z2_check".into(),
                                json!({
                                    "index": z.index,
                                    "det_h_of_minus_one": complex(z.det_h),
                                    "oracle_parity_on_omega_p": complex(z.oracle),
                                    "agreement": at_most(
                                        (z.oracle - C64::new(z.index as f64, 0.0)).norm()
                                            .max((z.det_h - C64::new(z.index as f64, 0.0)).norm()),
                                        oracle::TAU_ORACLE,
                                    ),
                                }),
                            );
                        }
                    }
                }
                Err(e) => return fail(head, "oracle", &e, exit_code_for(&e)),
            }
        }
        AlgebraTag::Ccr => {
            let run = match ccr_stage(&realized, model.gauge.as_ref(), opts, &mut head, &mut summary) {
                Stage::Done(r) => r,
                Stage::Stop(o) => return o,
            };
            let grun = run.gauge.as_ref().map(|(a, seed, n)| GaugeRun {
                action: a.clone(),
                sample_size: *n,
                seed: *seed,
            });
            let levels = DEFAULT_LEVELS.min(opts.bose_cutoff);
            match oracle::ccr_oracle(
                &run.iso,
                &run.data,
                opts.bose_cutoff,
                opts.fock_cap,
                levels,
                DEFAULT_MAX_TAIL,
                grun.as_ref(),
            ) {
                Ok(r) => {
                    summary.push(format!("oracle: cutoff {}, tail bound {:.3e}", r.cutoff, r.tail));
                    if let Some(g) = &r.gauge {
                        if let Ok(t) = &g.theorem {
                            summary.push(format!(
                                "theorem: max deviation {:.3e} (tolerance {:.3e})",
                                t.max_matrix_deviation.max(t.max_trace_deviation),
                                t.tol
                            ));
                        }
                    }
                    head.insert(
                        "oracle".into(),
                        ccr_oracle_json(&r, run.gauge.as_ref().map(|g| (g.1, g.2))),
                    );
                }
                Err(e) => return fail(head, "oracle", &e, exit_code_for(&e)),
            }
        }
    }
    finish(head, summary)
}

fn diagnostics_json(d: &dirac::WindowDiagnostics, localization: f64) -> Value {
    json!({
        "cutoff": d.cutoff,
        "m_loc": d.m_loc,
        "isometry_defect": d.isometry_defect,
        "isometry_defect_with_edge": d.isometry_defect_with_edge,
        "row_norm_deviation": at_most(d.row_norm_deviation, d.tail_bound),
        "gram_off_identity": d.gram_off_identity,
        "shift_overlap_min": d.shift_overlap_min,
        "shift_residual": d.shift_residual,
        "fixed_residual": d.fixed_residual,
        "localization_residual": localization,
    })
}

fn index_sample_json(s: &dirac::IndexSample) -> Value {
    json!({
        "cutoff": s.cutoff,
        "m_loc": s.m_loc,
        "start": s.start,
        "count_below_threshold": s.count,
        "small_singular_values": s.smallest,
        "cokernel_overlap_with_f_start": s.cokernel_overlap,
    })
}

fn assembly_json(a: &dirac::SpeciesAssembly) -> Value {
    json!({
        "species": a.species,
        "blocks": a.blocks,
        "half_index": equals(a.half_index, a.species),
        "stat_dim": equals(a.stat_dim, 1u64 << a.species.min(63)),
    })
}

fn hs_json(s: &dirac::HsStudy) -> Value {
    json!({
        "operator": s.operator,
        "cutoffs": s.cutoffs,
        "partial_norms": s.partial_norms,
        "increments": s.increments,
        "exponent": s.exponent,
        "exponent_threshold": s.exponent_threshold,
        "verdict": s.verdict.to_string(),
    })
}

fn localization_components(model: &dirac::CircleModel) -> Vec<Vec<linalg::CVector>> {
    vec![dirac::LOCALIZATION_MODES.map(|k| model.complement_vector(k)).collect()]
}

/// One window of `dirac-v` from a model file.
fn dirac_single(mut head: Map<String, Value>, w: usize, m_loc: usize, opts: &Options) -> Outcome {
    let v = match dirac::build_v(w, m_loc) {
        Ok(v) => v,
        Err(e) => return fail(head, "input", &e, exit_code_for(&e)),
    };
    let d = dirac::diagnostics(&v);
    let loc = dirac::localization_residual(&v);
    let idx = dirac::index_sample(&v);
    let comps = localization_components(&v.model);
    let phases = match dirac::prop_loc_check(&|x| v.apply(x), &comps, TAU_LOCALIZATION.max(loc)) {
        Ok(p) => p,
        Err(e) => return fail(head, "localization", &e, exit_code_for(&e)),
    };
    let assembly = match dirac::assemble_species(opts.gauge_n, idx.count) {
        Ok(a) => a,
        Err(e) => return fail(head, "assembly", &e, exit_code_for(&e)),
    };
    head.insert("normalization".into(), json!("d lambda / 2 pi"));
    head.insert("window".into(), diagnostics_json(&d, loc));
    head.insert("index_sample".into(), index_sample_json(&idx));
    head.insert(
        "localization_phases".into(),
        json!(phases
            .iter()
            .map(|p| json!({"tau": complex(p.tau), "residual": p.residual}))
            .collect::<Vec<_>>()),
    );
    head.insert("assembly".into(), assembly_json(&assembly));
    let summary = vec![format!(
        "dirac-v W = {w}: small singular values {}, localization residual {loc:.3e}",
        idx.count
    )];
    finish(head, summary)
}

/// Convergence study of `v` over the cutoff list.
pub fn dirac_cmd(opts: &Options) -> Outcome {
    let args = format!("cutoffs={:?};gauge_n={}", opts.cutoffs, opts.gauge_n);
    let mut head = report::header("dirac", &report::sha256_hex(args.as_bytes()), opts.seed);
    head.insert("normalization".into(), json!("d lambda / 2 pi"));
    head.insert(
        "reading".into(),
        json!("chiral circle: S^1 \\ I is a single complement component"),
    );
    let cutoffs = &opts.cutoffs;
    if cutoffs.len() < 3 || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        let e = Error::InvalidInput(format!(
            "cutoffs {cutoffs:?} must be at least three, strictly ascending"
        ));
        return fail(head, "input", &e, EXIT_INPUT);
    }
    if opts.gauge_n == 0 {
        return fail(
            head,
            "input",
            &Error::InvalidInput("gauge N must be positive".into()),
            EXIT_INPUT,
        );
    }
    let windows = cutoffs
        .par_iter()
        .map(|&w| -> Result<(dirac::WindowDiagnostics, f64)> {
            let v = dirac::build_v(w, w / 4)?;
            Ok((dirac::diagnostics(&v), dirac::localization_residual(&v)))
        })
        .collect::<Result<Vec<_>>>();
    let windows = match windows {
        Ok(w) => w,
        Err(e) => return fail(head, "window", &e, exit_code_for(&e)),
    };
    let (hs_plus, hs_minus) = match dirac::hs_commutator_study(cutoffs) {
        Ok(s) => s,
        Err(e) => return fail(head, "hs_study", &e, exit_code_for(&e)),
    };
    let control = match dirac::hs_control_study(cutoffs) {
        Ok(s) => s,
        Err(e) => return fail(head, "hs_control", &e, exit_code_for(&e)),
    };
    let index = match dirac::index_estimate(cutoffs, 0) {
        Ok(i) => i,
        Err(e) => return fail(head, "index", &e, exit_code_for(&e)),
    };
    let probe = dirac::index_estimate(cutoffs, 1);
    let w_max = *cutoffs.last().unwrap();
    let v_max = match dirac::build_v(w_max, w_max / 4) {
        Ok(v) => v,
        Err(e) => return fail(head, "window", &e, exit_code_for(&e)),
    };
    let comps = localization_components(&v_max.model);
    let loc_max = windows.last().unwrap().1;
    let phases = match dirac::prop_loc_check(&|x| v_max.apply(x), &comps, TAU_LOCALIZATION) {
        Ok(p) => p,
        Err(e) => return fail(head, "localization", &e, exit_code_for(&e)),
    };
    let phased = v_max
        .clone()
        .with_phase(C64::from_polar(1.0, std::f64::consts::PI / 3.0));
    let phased_tau = dirac::prop_loc_check(&|x| phased.apply(x), &comps, TAU_LOCALIZATION)
        .map(|p| p[0].tau)
        .ok();
    // Rotate e_0 into a far mode after applying v: not localized.
    let far = v_max.model.index_of((w_max / 2) as i64).unwrap();
    let near = v_max.model.index_of(0).unwrap();
    let rotated = |x: &linalg::CVector| {
        let mut y = v_max.apply(x);
        let (a, b) = (y[near], y[far]);
        y[near] = -b;
        y[far] = a;
        y
    };
    let control_loc = match dirac::prop_loc_check(&rotated, &comps, TAU_LOCALIZATION) {
        Err(Error::NoCommonPhase { residual, .. }) => at_least(residual, TAU_LOCALIZATION),
        Err(e) => return fail(head, "localization_control", &e, exit_code_for(&e)),
        Ok(p) => at_least(p[0].residual, TAU_LOCALIZATION),
    };
    let assembly = match dirac::assemble_species(opts.gauge_n, index.index) {
        Ok(a) => a,
        Err(e) => return fail(head, "assembly", &e, exit_code_for(&e)),
    };
    let loc_series: Vec<f64> = windows.iter().map(|w| w.1).collect();
    let defect_series: Vec<f64> = windows.iter().map(|w| w.0.isometry_defect).collect();
    let gram_max = windows.last().unwrap().0.gram_off_identity;
    head.insert("cutoffs".into(), json!(cutoffs));
    head.insert(
        "windows".into(),
        Value::Array(windows.iter().map(|(d, l)| diagnostics_json(d, *l)).collect()),
    );
    head.insert(
        "window_checks".into(),
        json!({
            "isometry_defect_decreasing": equals(defect_series.windows(2).all(|w| w[1] < w[0]), true),
            "gram_off_identity_at_largest_cutoff": at_most(gram_max, TAU_GRAM),
        }),
    );
    head.insert(
        "hs_studies".into(),
        json!({
            "plus": hs_json(&hs_plus),
            "minus": hs_json(&hs_minus),
            "plus_verdict": equals(hs_plus.verdict.to_string(), "consistent-with-HS".to_string()),
            "minus_verdict": equals(hs_minus.verdict.to_string(), "consistent-with-HS".to_string()),
            "m_ref": w_max / 4,
            "control": hs_json(&control),
            "control_flagged": equals(control.verdict == dirac::Verdict::NotConsistent, true),
        }),
    );
    head.insert(
        "index".into(),
        json!({
            "threshold": dirac::INDEX_THRESHOLD,
            "value": index.index,
            "samples": index.samples.iter().map(index_sample_json).collect::<Vec<_>>(),
            "start_one_probe": match &probe {
                Ok(p) => json!({
                    "value": p.index,
                    "samples": p.samples.iter().map(index_sample_json).collect::<Vec<_>>(),
                }),
                Err(e) => json!({ "error": e.to_string() }),
            },
        }),
    );
    head.insert(
        "localization".into(),
        json!({
            "test_family": "chi(S^1 \\ I) e_k, |k| <= 4",
            "residuals": loc_series,
            "decreasing": equals(loc_series.windows(2).all(|w| w[1] < w[0]), true),
            "at_largest_cutoff": at_most(loc_max, TAU_LOCALIZATION),
            "phases": phases.iter().map(|p| json!({"tau": complex(p.tau), "residual": p.residual})).collect::<Vec<_>>(),
            "global_phase_probe": phased_tau.map(complex),
            "non_localized_control": control_loc,
        }),
    );
    head.insert("assembly".into(), assembly_json(&assembly));
    let summary = vec![
        format!("index of v: {} (cutoffs {:?})", index.index, cutoffs),
        format!("[E+, v]: {} (exponent {:.3})", hs_plus.verdict, hs_plus.exponent),
        format!("[E-, v]: {} (exponent {:.3})", hs_minus.verdict, hs_minus.exponent),
        format!("control: {} (exponent {:.3})", control.verdict, control.exponent),
        format!(
            "localization residuals: {:?}",
            loc_series.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
        format!(
            "N = {}: half index {}, stat_dim {}",
            assembly.species, assembly.half_index, assembly.stat_dim
        ),
    ];
    finish(head, summary)
}
