//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quasifree::app::DEFAULT_MAX_TAIL;
use quasifree::builders;
use quasifree::car::{self, CarIsometry, Index, StatDim};
use quasifree::ccr::{self, CcrIsometry};
use quasifree::dirac::{self, Verdict};
use quasifree::fock::DEFAULT_FOCK_CAP;
use quasifree::gauge::{GaugeAction, GroupTag};
use quasifree::linalg::{self, frobenius};
use quasifree::oracle::{self, GaugeCheck, GaugeRun};
use quasifree::report::sha256_hex;
use quasifree::selfdual::{BlockOperator, Half};

type Verdicts = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Verdicts);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn car_examples() -> Vec<(&'static str, BlockOperator, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    vec![
        ("identity(3)", builders::identity(3), 0),
        ("flip(3; 0)", builders::flip(3, &[0]), 0),
        ("bogoliubov(pi/6)", builders::bogoliubov(PI / 6.0), 0),
        ("permutation(2 0 1)", builders::permutation(&[2, 0, 1]), 0),
        ("sea-shift(2)", builders::sea_shift(2).v, 0),
        ("random unitary(3)", builders::random_car_unitary(3, 1.0, &mut rng), 0),
        ("shift(3, 1)", builders::shift(3, 1, 1), 2),
        (
            "random isometry(3 -> 4)",
            builders::random_car_isometry(3, 1, &mut rng),
            2,
        ),
        ("doubled shift(2, 1)", builders::shift(2, 1, 2), 4),
        ("shift(4, 2)", builders::shift(4, 2, 1), 4),
    ]
}

fn ccr_examples() -> Vec<(&'static str, BlockOperator, StatDim)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    vec![
        ("identity(2)", builders::identity(2), StatDim::Finite(1)),
        ("squeeze(0.5)", builders::squeeze(0.5, false), StatDim::Finite(1)),
        (
            "two-mode squeeze(0.5)",
            builders::squeeze(0.5, true),
            StatDim::Finite(1),
        ),
        (
            "random unitary(2)",
            builders::random_ccr_unitary(2, 0.3, &mut rng),
            StatDim::Finite(1),
        ),
        ("shift(1, 1)", builders::shift(1, 1, 1), StatDim::Infinite),
        ("shift(3, 1)", builders::shift(3, 1, 1), StatDim::Infinite),
        ("doubled shift(2, 1)", builders::shift(2, 1, 2), StatDim::Infinite),
    ]
}

fn statistics_dimension() -> Verdicts {
    let mut seen = Vec::new();
    for (name, v, ind) in car_examples() {
        let start = Instant::now();
        let iso = CarIsometry::from_truncation(v).map_err(|e| format!("{name}: {e}"))?;
        let data = car::car_charge_data(&iso, car::TAU).map_err(|e| format!("{name}: {e}"))?;
        let elapsed = start.elapsed();
        ensure(data.ind == ind, || format!("{name}: ind {} != {ind}", data.ind))?;
        let law = StatDim::Finite(1 << (ind / 2));
        ensure(data.stat_dim == law, || {
            format!("{name}: d = {} != {law}", data.stat_dim)
        })?;
        ensure(
            car::statistics_dimension_car(Index::Finite(ind)).ok() == Some(law),
            || format!("{name}: law table disagrees"),
        )?;
        ensure(elapsed < Duration::from_secs(1), || format!("{name}: {elapsed:?}"))?;
        seen.push(format!("{name}: ind {ind}, d {law}"));
    }
    for (name, v, expected) in ccr_examples() {
        let start = Instant::now();
        let iso = CcrIsometry::new(v).map_err(|e| format!("{name}: {e}"))?;
        let data = ccr::ccr_charge_data(&iso, 1e-10).map_err(|e| format!("{name}: {e}"))?;
        let elapsed = start.elapsed();
        ensure(data.stat_dim == expected, || {
            format!("{name}: d = {} != {expected}", data.stat_dim)
        })?;
        ensure(elapsed < Duration::from_secs(1), || format!("{name}: {elapsed:?}"))?;
        seen.push(format!("{name} (ccr): d {expected}"));
    }
    Ok(seen.join("; "))
}

fn charge_data_recovery() -> Verdicts {
    let (mut recovery, mut identities, mut pullback) = (0.0f64, 0.0f64, 0.0f64);
    let count = car_examples().len();
    for (name, v, _) in car_examples() {
        let start = Instant::now();
        let iso = CarIsometry::from_truncation(v.clone()).map_err(|e| format!("{name}: {e}"))?;
        let data = car::car_charge_data(&iso, car::TAU).map_err(|e| format!("{name}: {e}"))?;
        let elapsed = start.elapsed();
        let c = &data.checks;
        recovery = recovery.max(c.recovery_h).max(c.recovery_t);
        identities = identities.max(c.idempotent).max(c.selfadjoint).max(c.conjugate);

        // Independent of the pipeline's own checks: the state of P pulled back
        // along V is the reference Fock state.
        let p = data.p.entries();
        let pulled = v.entries().adjoint() * p * v.entries();
        pullback = pullback.max(frobenius(&(pulled - v.domain().p1().entries())));
        ensure(elapsed < Duration::from_secs(1), || format!("{name}: {elapsed:?}"))?;
    }
    ensure(recovery <= 1e-8, || format!("recovery residual {recovery:.3e} > 1e-8"))?;
    ensure(identities <= 1e-10, || {
        format!("projection identities {identities:.3e} > 1e-10")
    })?;
    ensure(pullback <= 1e-10, || format!("pullback {pullback:.3e} > 1e-10"))?;
    Ok(format!(
        "{count} examples, recovery {recovery:.2e}, identities {identities:.2e}, V*PV - P1 {pullback:.2e}"
    ))
}

fn implementation_formula() -> Verdicts {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = [
        ("shift 3 -> 4", builders::shift(3, 1, 1)),
        ("shift 4 -> 6", builders::shift(4, 2, 1)),
        ("random 3 -> 4", builders::random_car_isometry(3, 1, &mut rng)),
        ("random 4 -> 6", builders::random_car_isometry(4, 2, &mut rng)),
    ];
    let mut lines = Vec::new();
    for (name, v) in cases {
        let iso = CarIsometry::from_truncation(v).map_err(|e| e.to_string())?;
        let data = car::car_charge_data(&iso, car::TAU).map_err(|e| e.to_string())?;
        let r = oracle::car_oracle(&iso, &data, DEFAULT_FOCK_CAP, None).map_err(|e| format!("{name}: {e}"))?;
        let expected = 1usize << (data.ind / 2);
        ensure(r.implementer_count == expected, || {
            format!("{name}: {} implementers, expected {expected}", r.implementer_count)
        })?;
        let res = &r.implementer_residuals;
        let worst = res.implementation.max(res.orthonormality).max(res.completeness);
        ensure(worst <= 1e-10, || format!("{name}: residuals {res:?}"))?;
        lines.push(format!("{name}: {expected} implementers, worst residual {worst:.2e}"));
    }
    Ok(lines.join("; "))
}

fn run_car_gauge(v: BlockOperator, action: GaugeAction, samples: usize, seed: u64) -> Result<GaugeCheck, String> {
    let iso = CarIsometry::from_truncation(v).map_err(|e| e.to_string())?;
    let data = car::car_charge_data(&iso, car::TAU).map_err(|e| e.to_string())?;
    let run = GaugeRun {
        action,
        sample_size: samples,
        seed,
    };
    let r = oracle::car_oracle(&iso, &data, DEFAULT_FOCK_CAP, Some(&run)).map_err(|e| e.to_string())?;
    r.gauge.ok_or_else(|| "no gauge check".into())
}

fn theorem_holds(name: &str, g: &GaugeCheck, min_samples: usize) -> Result<String, String> {
    let t = g.theorem.as_ref().map_err(|why| format!("{name}: skipped: {why}"))?;
    ensure(g.samples.len() >= min_samples, || {
        format!("{name}: {} samples", g.samples.len())
    })?;
    ensure(
        t.pass && t.max_matrix_deviation <= 1e-8 && t.max_trace_deviation <= 1e-8,
        || format!("{name}: deviation {:.3e}", t.max_matrix_deviation),
    )?;
    Ok(format!(
        "{name}: {} samples, dev {:.2e}",
        g.samples.len(),
        t.max_matrix_deviation
    ))
}

fn fermionic_charge_theorem() -> Verdicts {
    let mut lines = Vec::new();
    let g = run_car_gauge(
        builders::shift(3, 1, 1),
        GaugeAction::uniform(GroupTag::U1, 3, 4),
        64,
        0,
    )?;
    lines.push(theorem_holds("shift U(1)", &g, 20)?);
    let g = run_car_gauge(
        builders::shift(2, 1, 2),
        GaugeAction::fundamental(2, 2, 3, false),
        24,
        11,
    )?;
    lines.push(theorem_holds("doubled shift U(2)", &g, 20)?);
    let g = run_car_gauge(builders::flip(3, &[0]), GaugeAction::uniform(GroupTag::U1, 3, 3), 64, 0)?;
    lines.push(theorem_holds("flip U(1)", &g, 20)?);
    let g = run_car_gauge(builders::flip(3, &[0]), GaugeAction::uniform(GroupTag::Z2, 3, 3), 2, 0)?;
    lines.push(theorem_holds("flip Z2", &g, 2)?);

    for (name, v) in [
        ("flip", builders::flip(3, &[0])),
        ("double flip", builders::flip(3, &[0, 2])),
        ("identity", builders::identity(3)),
    ] {
        let iso = CarIsometry::from_truncation(v.clone()).map_err(|e| e.to_string())?;
        let data = car::car_charge_data(&iso, car::TAU).map_err(|e| e.to_string())?;
        let z = oracle::z2_check(&iso, &data, DEFAULT_FOCK_CAP).map_err(|e| e.to_string())?;
        let kernel = linalg::singular_values(&v.block(Half::One, Half::One))
            .iter()
            .filter(|&&s| s < 1e-10)
            .count();
        let expected = if kernel % 2 == 0 { 1.0 } else { -1.0 };
        ensure(f64::from(z.index) == expected, || format!("{name}: index {}", z.index))?;
        ensure(
            (z.det_h.re - expected).abs() <= 1e-8 && (z.oracle.re - expected).abs() <= 1e-8,
            || format!("{name}: det_h {} oracle {}", z.det_h, z.oracle),
        )?;
        lines.push(format!("{name}: Z2 {expected:+}"));
    }
    Ok(lines.join("; "))
}

fn bosonic_charge_theorem() -> Verdicts {
    let mut lines = Vec::new();
    let cases = [
        (
            "bosonic shift",
            builders::shift(1, 1, 1),
            GaugeAction::uniform(GroupTag::U1, 1, 2),
        ),
        (
            "two-mode squeeze",
            builders::squeeze(0.5, true),
            GaugeAction::charges(GroupTag::U1, &[1, -1], &[1, -1]),
        ),
    ];
    for (name, v, action) in cases {
        let iso = CcrIsometry::new(v).map_err(|e| e.to_string())?;
        let data = ccr::ccr_charge_data(&iso, 1e-10).map_err(|e| e.to_string())?;
        let run = GaugeRun {
            action,
            sample_size: 64,
            seed: 0,
        };
        let r = oracle::ccr_oracle(&iso, &data, 8, DEFAULT_FOCK_CAP, 5, DEFAULT_MAX_TAIL, Some(&run))
            .map_err(|e| format!("{name}: {e}"))?;
        let g = r.gauge.as_ref().ok_or("no gauge check")?;
        let t = g.theorem.as_ref().map_err(|why| format!("{name}: skipped: {why}"))?;
        let tol = 1e-6 + r.tail;
        ensure(t.max_trace_deviation <= tol && t.max_matrix_deviation <= tol, || {
            format!("{name}: deviation {:.3e} > {tol:.3e}", t.max_matrix_deviation)
        })?;
        ensure(t.table.rows.len() == 6, || {
            format!("{name}: {} levels", t.table.rows.len())
        })?;
        lines.push(format!(
            "{name}: M = 8, l <= 5, dev {:.2e}, tail {:.2e}",
            t.max_matrix_deviation, r.tail
        ));
    }
    Ok(lines.join("; "))
}

fn gauge_invariance() -> Verdicts {
    let g = run_car_gauge(
        builders::shift(3, 1, 1),
        GaugeAction::uniform(GroupTag::U1, 3, 4),
        64,
        0,
    )?;
    let implementers = g.max_implementer_span_residual.unwrap_or(f64::INFINITY);
    ensure(g.max_commutator <= 1e-10, || {
        format!("shift commutator {:.3e}", g.max_commutator)
    })?;
    ensure(g.max_omega_span_residual <= 1e-10, || {
        format!("commuting residual {:.3e}", g.max_omega_span_residual)
    })?;
    ensure(implementers <= 1e-10, || {
        format!("implementer span residual {implementers:.3e}")
    })?;

    let bad = run_car_gauge(
        builders::bogoliubov(PI / 6.0),
        GaugeAction::uniform(GroupTag::U1, 2, 2),
        64,
        0,
    )?;
    ensure(bad.max_commutator > 1e-2, || {
        format!("bogoliubov commutator {:.3e}", bad.max_commutator)
    })?;
    ensure(bad.max_omega_span_residual > 1e-2, || {
        format!("non-commuting residual {:.3e}", bad.max_omega_span_residual)
    })?;
    Ok(format!(
        "commuting {:.2e} <= 1e-10, non-commuting {:.2e} > 1e-2",
        g.max_omega_span_residual, bad.max_omega_span_residual
    ))
}

fn dirac_example() -> Verdicts {
    let cutoffs = [64, 128, 256, 512];
    let mut loc = Vec::new();
    let mut row = 0.0;
    for &w in &cutoffs {
        let v = dirac::build_v(w, w / 4).map_err(|e| e.to_string())?;
        let d = dirac::diagnostics(&v);
        ensure(d.row_norm_deviation <= d.tail_bound, || {
            format!(
                "W = {w}: row norm {:.3e} above tail {:.3e}",
                d.row_norm_deviation, d.tail_bound
            )
        })?;
        row = d.row_norm_deviation;
        loc.push(dirac::localization_residual(&v));
    }
    ensure(row <= 3e-3, || format!("row norm {row:.3e} at 512"))?;
    ensure(loc[3] <= 1e-3, || format!("localization {:.3e} at 512", loc[3]))?;
    ensure(loc.windows(2).all(|p| p[1] < p[0]), || {
        format!("localization not decreasing: {loc:?}")
    })?;

    let idx = dirac::index_estimate(&[256, 512], 0).map_err(|e| e.to_string())?;
    ensure(idx.index == 1, || format!("IND {}", idx.index))?;

    let (plus, minus) = dirac::hs_commutator_study(&cutoffs).map_err(|e| e.to_string())?;
    let control = dirac::hs_control_study(&cutoffs).map_err(|e| e.to_string())?;
    ensure(plus.verdict == Verdict::ConsistentWithHs, || {
        format!("E+: {}", plus.verdict)
    })?;
    ensure(minus.verdict == Verdict::ConsistentWithHs, || {
        format!("E-: {}", minus.verdict)
    })?;
    ensure(control.verdict == Verdict::NotConsistent, || {
        "control not flagged".into()
    })?;

    for n in 1..=3 {
        let a = dirac::assemble_species(n, idx.index).map_err(|e| e.to_string())?;
        ensure(a.half_index == n && a.stat_dim == 1 << n, || format!("N = {n}: {a:?}"))?;
    }
    Ok(format!(
        "row norm {row:.2e}, IND {}, E+ {} ({:.3}), E- {} ({:.3}), localization {:.2e}, N = 1..3 -> d = 2, 4, 8",
        idx.index, plus.verdict, plus.exponent, minus.verdict, minus.exponent, loc[3]
    ))
}

fn report_digest(args: &[&str], out: &Path) -> Result<String, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_quasifree"))
        .args(args)
        .arg("--report")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.code() == Some(0), || {
        format!("{args:?} exited {:?}", status.status.code())
    })?;
    Ok(sha256_hex(&std::fs::read(out).map_err(|e| e.to_string())?))
}

fn determinism() -> Verdicts {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model = dir.path().join("dshift.json");
    std::fs::write(
        &model,
        r#"{"isometry":{"builder":{"name":"shift","params":{"domain_modes":2,"species":2}}},
            "gauge":{"group":"UN","n":2,"sites_domain":2,"sites_codomain":3,"seed":11}}"#,
    )
    .map_err(|e| e.to_string())?;
    let input = model.to_str().unwrap();
    let runs: [(&str, Vec<&str>); 2] = [
        ("oracle", vec!["oracle", "--input", input]),
        ("dirac", vec!["dirac", "--gauge-n", "2"]),
    ];
    let mut lines = Vec::new();
    for (name, args) in runs {
        let mut digests = Vec::new();
        for threads in ["1", "4", "4"] {
            let mut a = args.clone();
            a.extend(["--threads", threads]);
            let out = dir.path().join(format!("{name}-{threads}-{}.json", digests.len()));
            digests.push(report_digest(&a, &out)?);
        }
        ensure(digests.iter().all(|d| *d == digests[0]), || {
            format!("{name}: {digests:?}")
        })?;
        lines.push(format!("{name}: sha256 {}", &digests[0][..16]));
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("statistics dimension law", 10, statistics_dimension),
        ("charge data recovery", 10, charge_data_recovery),
        ("implementation formula", 10, implementation_formula),
        ("fermionic charge theorem", 30, fermionic_charge_theorem),
        ("bosonic charge theorem", 60, bosonic_charge_theorem),
        ("gauge invariance", 10, gauge_invariance),
        ("circle example", 300, dirac_example),
        ("determinism", 300, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            ensure(elapsed <= Duration::from_secs(limit), || {
                format!("took {elapsed:?}, limit {limit} s")
            })
            .map(|_| detail)
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {tag} [{:.2} s] {name}: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
