//! Chiral fermions on the circle: the localized isometry `v` in a Fourier window.
//!
//! Modes are `e_n(z) = z^n`, `|n| <= W`, orthonormal for `d lambda / 2 pi`. The
//! interval is `I = {e^{i lambda} : pi/2 <= lambda <= 3 pi/2}` and the local basis is
//! `f_m = sqrt 2 (-1)^m z^{2m} chi_I`. Continuum objects enter only through the
//! closed-form Fourier coefficients `<e_n, f_m>`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Singular values below this count towards the index.
pub const INDEX_THRESHOLD: f64 = 0.5;

/// `x -> (x - i) / (x + i)`, mapping the real line onto the circle minus `1`.
pub fn cayley(x: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    (C64::new(x, 0.0) - i) / (C64::new(x, 0.0) + i)
}

/// `-exp(2 i arctan x)`, the same map written through the angle.
pub fn cayley_angle(x: f64) -> C64 {
    -C64::from_polar(1.0, 2.0 * x.atan())
}

/// `<e_n, f_m>`, real-valued.
pub fn overlap(m: i64, n: i64) -> f64 {
    let d = 2 * m - n;
    let sign_m = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if d == 0 {
        SQRT_2 * sign_m / 2.0
    } else if d % 2 == 0 {
        0.0
    } else {
        let s = if ((d - 1) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        -SQRT_2 * sign_m * s / (PI * d as f64)
    }
}

/// `<e_n, chi_{S^1 \ I} e_k>`.
pub fn complement_coefficient(k: i64, n: i64) -> f64 {
    let d = k - n;
    if d == 0 {
        0.5
    } else {
        (d as f64 * PI / 2.0).sin() / (PI * d as f64)
    }
}

/// Fourier window `|n| <= W` with local-basis range `|m| <= M_loc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleModel {
    w: usize,
    m_loc: usize,
}

impl CircleModel {
    pub fn new(w: usize, m_loc: usize) -> Result<Self> {
        if m_loc == 0 || 4 * m_loc > w {
            return Err(Error::WindowTooSmall(format!(
                "M_loc = {m_loc} needs 1 <= M_loc <= W/4 with W = {w}"
            )));
        }
        Ok(Self { w, m_loc })
    }

    /// `M_loc = W / 4`.
    pub fn with_default_range(w: usize) -> Result<Self> {
        Self::new(w, w / 4)
    }

    pub fn cutoff(&self) -> usize {
        self.w
    }

    pub fn m_loc(&self) -> usize {
        self.m_loc
    }

    pub fn dim(&self) -> usize {
        2 * self.w + 1
    }

    pub fn mode(&self, idx: usize) -> i64 {
        idx as i64 - self.w as i64
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        (n.unsigned_abs() as usize <= self.w).then(|| (n + self.w as i64) as usize)
    }

    /// `P_W f_m`.
    pub fn f_vector(&self, m: i64) -> CVector {
        CVector::from_fn(self.dim(), |i, _| C64::new(overlap(m, self.mode(i)), 0.0))
    }

    /// `P_W chi_{S^1 \ I} e_k`.
    pub fn complement_vector(&self, k: i64) -> CVector {
        CVector::from_fn(self.dim(), |i, _| {
            C64::new(complement_coefficient(k, self.mode(i)), 0.0)
        })
    }

    /// Diagonal of `E_+` (`n >= 0`).
    pub fn hardy_plus(&self) -> Vec<bool> {
        (0..self.dim()).map(|i| self.mode(i) >= 0).collect()
    }

    /// Columns `P_W f_m` for `m` in `lo..=hi`.
    pub fn f_frame(&self, lo: i64, hi: i64) -> CMatrix {
        let cols: Vec<CVector> = (lo..=hi).map(|m| self.f_vector(m)).collect();
        let mut out = CMatrix::zeros(self.dim(), cols.len());
        for (j, c) in cols.iter().enumerate() {
            out.set_column(j, c);
        }
        out
    }

    /// Gram matrix of `P_W f_m`, `|m| <= M_loc`.
    pub fn gram(&self) -> CMatrix {
        let m = self.m_loc as i64;
        let f = self.f_frame(-m, m);
        f.adjoint() * f
    }

    /// `max_m |1 - |P_W f_m|^2|`.
    pub fn row_norm_deviation(&self) -> f64 {
        let g = self.gram();
        (0..g.nrows()).map(|i| (1.0 - g[(i, i)].re).abs()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal Gram entry.
    pub fn gram_off_identity(&self) -> f64 {
        let g = self.gram();
        let mut out: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    out = out.max(g[(i, j)].norm());
                }
            }
        }
        out
    }

    /// `4 / (pi^2 W/2)`, the tail of `sum 2 / (pi^2 d^2)` beyond the window.
    pub fn tail_bound(&self) -> f64 {
        4.0 / (PI * PI * (self.w as f64 / 2.0))
    }
}

/// `v = phase (1 + sum_{m = start}^{M_loc - 1} (f_{m+1} - f_m) <f_m, .>)` on the window.
#[derive(Clone, Debug)]
pub struct LocalizedIsometry {
    pub model: CircleModel,
    pub start: i64,
    /// Columns `f_{m+1} - f_m`.
    a: CMatrix,
    /// Columns `f_m`.
    b: CMatrix,
    phase: C64,
}

impl LocalizedIsometry {
    pub fn apply(&self, x: &CVector) -> CVector {
        (x + &self.a * (self.b.adjoint() * x)) * self.phase
    }

    pub fn matrix(&self) -> CMatrix {
        let d = self.model.dim();
        (CMatrix::identity(d, d) + &self.a * self.b.adjoint()) * self.phase
    }

    /// `v - phase`, a rank `M_loc - start` matrix.
    pub fn perturbation(&self) -> CMatrix {
        &self.a * self.b.adjoint() * self.phase
    }

    pub fn with_phase(mut self, phase: C64) -> Self {
        self.phase = phase;
        self
    }

    /// Orthonormal frame of `K = span{P_W f_m : start <= m <= M_loc}`; `v = v_K (+) 1`.
    pub fn support_frame(&self) -> CMatrix {
        let top = self.model.m_loc as i64;
        linalg::span_frame(&self.model.f_frame(self.start, top), None)
    }

    /// Compression `Q* v Q` to the support frame.
    pub fn compressed(&self, q: &CMatrix) -> CMatrix {
        let vq = (q + &self.a * (self.b.adjoint() * q)) * self.phase;
        q.adjoint() * vq
    }
}

pub fn build_v(w: usize, m_loc: usize) -> Result<LocalizedIsometry> {
    build_v_from(CircleModel::new(w, m_loc)?, 0)
}

/// As [`build_v`] with the sum started at `m = start`.
pub fn build_v_from(model: CircleModel, start: i64) -> Result<LocalizedIsometry> {
    let top = model.m_loc as i64;
    if start < 0 || start >= top {
        return Err(Error::WindowTooSmall(format!("start {start} outside 0..{top}")));
    }
    let f = model.f_frame(start, top);
    let k = f.ncols() - 1;
    let a = f.columns(1, k) - f.columns(0, k);
    let b = f.columns(0, k).into_owned();
    Ok(LocalizedIsometry {
        model,
        start,
        a,
        b,
        phase: ONE,
    })
}

/// Window diagnostics of `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowDiagnostics {
    pub cutoff: usize,
    pub m_loc: usize,
    /// `|Q*(v*v - 1)Q|_F` on `span{f_m : m <= M_loc - 2}`, away from the truncation edge.
    pub isometry_defect: f64,
    /// The same on all of `K`, including the edge where `v f_{M-1} = v f_M`.
    pub isometry_defect_with_edge: f64,
    pub row_norm_deviation: f64,
    pub tail_bound: f64,
    pub gram_off_identity: f64,
    /// `min_{0 <= m < M_loc/2} <f_{m+1}, v f_m>`.
    pub shift_overlap_min: f64,
    /// `|v f_2 - f_3|`.
    pub shift_residual: f64,
    /// `|v f_{-1} - f_{-1}|`.
    pub fixed_residual: f64,
}

pub fn diagnostics(v: &LocalizedIsometry) -> WindowDiagnostics {
    let model = v.model;
    let top = model.m_loc as i64;
    let defect_on = |hi: i64| {
        let q = linalg::span_frame(&model.f_frame(v.start, hi), None);
        let vq = &q + &v.a * (v.b.adjoint() * &q);
        let k = q.ncols();
        linalg::frobenius(&(vq.adjoint() * vq - CMatrix::identity(k, k)))
    };
    let shift_overlap_min = (0..(top / 2).max(1))
        .map(|m| linalg::inner(&model.f_vector(m + 1), &v.apply(&model.f_vector(m))).re)
        .fold(f64::INFINITY, f64::min);
    let probe = 2.min(top - 1);
    WindowDiagnostics {
        cutoff: model.w,
        m_loc: model.m_loc,
        isometry_defect: defect_on((top - 2).max(v.start)),
        isometry_defect_with_edge: defect_on(top),
        row_norm_deviation: model.row_norm_deviation(),
        tail_bound: model.tail_bound(),
        gram_off_identity: model.gram_off_identity(),
        shift_overlap_min,
        shift_residual: linalg::vec_norm(&(v.apply(&model.f_vector(probe)) - model.f_vector(probe + 1))),
        fixed_residual: linalg::vec_norm(&(v.apply(&model.f_vector(-1)) - model.f_vector(-1))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithHs,
    NotConsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::ConsistentWithHs => write!(f, "consistent-with-HS"),
            Verdict::NotConsistent => write!(f, "not-consistent-with-HS"),
        }
    }
}

/// Partial Hilbert-Schmidt norms of a commutator with `E_+` over growing windows.
#[derive(Clone, Debug, PartialEq)]
pub struct HsStudy {
    pub operator: String,
    pub cutoffs: Vec<usize>,
    pub partial_norms: Vec<f64>,
    pub increments: Vec<f64>,
    /// Least-squares slope of `ln increment` against `ln W`.
    pub exponent: f64,
    pub exponent_threshold: f64,
    pub verdict: Verdict,
}

/// Exponent below which increments are treated as summable.
pub const HS_EXPONENT: f64 = -0.5;

fn check_cutoffs(cutoffs: &[usize]) -> Result<()> {
    if cutoffs.len() < 3 {
        return Err(Error::InvalidInput("the study needs at least three cutoffs".into()));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("cutoffs must be strictly ascending".into()));
    }
    Ok(())
}

/// `s_W` for an operator given entrywise on the largest window.
///
/// Only entries with exactly one of `n, k` non-negative enter `[E_+, X]`, and
/// `[E_-, X] = -[E_+, X]` has the same entries up to sign.
fn partial_norms(entry: &(dyn Fn(i64, i64) -> f64 + Sync), cutoffs: &[usize]) -> Vec<f64> {
    let w_max = *cutoffs.last().unwrap() as i64;
    // Shell contributions, summed in a fixed order.
    let shell = |n: i64, k: i64| -> bool { (n >= 0) != (k >= 0) };
    let per_row: Vec<Vec<f64>> = (-w_max..=w_max)
        .into_par_iter()
        .map(|n| {
            let mut acc = vec![0.0; cutoffs.len()];
            for k in -w_max..=w_max {
                if !shell(n, k) {
                    continue;
                }
                let r = n.unsigned_abs().max(k.unsigned_abs()) as usize;
                let x = entry(n, k);
                if x == 0.0 {
                    continue;
                }
                let first = cutoffs.partition_point(|&w| w < r);
                if first < cutoffs.len() {
                    acc[first] += x;
                }
            }
            acc
        })
        .collect();
    let mut level = vec![0.0; cutoffs.len()];
    for row in &per_row {
        for (l, x) in level.iter_mut().zip(row) {
            *l += x;
        }
    }
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut sum = 0.0;
    for l in level {
        sum += l;
        out.push(sum.sqrt());
    }
    out
}

fn fit_exponent(cutoffs: &[usize], increments: &[f64]) -> f64 {
    let xs: Vec<f64> = cutoffs[1..].iter().map(|&w| (w as f64).ln()).collect();
    let ys: Vec<f64> = increments.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn study(operator: &str, entry: &(dyn Fn(i64, i64) -> f64 + Sync), cutoffs: &[usize]) -> Result<HsStudy> {
    check_cutoffs(cutoffs)?;
    let partial = partial_norms(entry, cutoffs);
    let increments: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    if increments.iter().any(|&d| d < 0.0) {
        return Err(Error::NonMonotone(format!("{operator}: partial norms {partial:?}")));
    }
    let positive = increments.iter().all(|&d| d > 0.0);
    let decreasing = increments.windows(2).all(|w| w[1] < w[0]);
    let exponent = if positive {
        fit_exponent(cutoffs, &increments)
    } else {
        f64::NAN
    };
    let verdict = if positive && decreasing && exponent < HS_EXPONENT {
        Verdict::ConsistentWithHs
    } else {
        Verdict::NotConsistent
    };
    Ok(HsStudy {
        operator: operator.to_string(),
        cutoffs: cutoffs.to_vec(),
        partial_norms: partial,
        increments,
        exponent,
        exponent_threshold: HS_EXPONENT,
        verdict,
    })
}

/// Studies of `[E_+, v]` and `[E_-, v]` with `v` built at `M_ref = W_max / 4`.
pub fn hs_commutator_study(cutoffs: &[usize]) -> Result<(HsStudy, HsStudy)> {
    check_cutoffs(cutoffs)?;
    let w_max = *cutoffs.last().unwrap();
    let v = build_v(w_max, w_max / 4)?;
    let x = v.perturbation();
    let model = v.model;
    let entry = |n: i64, k: i64| -> f64 {
        let (i, j) = (model.index_of(n).unwrap(), model.index_of(k).unwrap());
        x[(i, j)].norm_sqr()
    };
    Ok((study("[E+, v]", &entry, cutoffs)?, study("[E-, v]", &entry, cutoffs)?))
}

/// `[E_+, M_phi]` for `phi` with a single jump and winding `1/2`; log-divergent.
pub fn hs_control_study(cutoffs: &[usize]) -> Result<HsStudy> {
    let entry = |n: i64, k: i64| -> f64 {
        let d = (n - k) as f64;
        let c = 1.0 / (PI * (0.5 - d));
        c * c
    };
    study("[E+, M_phi] (jump control)", &entry, cutoffs)
}

/// Small singular values of `v` at one cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSample {
    pub cutoff: usize,
    pub m_loc: usize,
    pub start: i64,
    pub count: usize,
    pub smallest: Vec<f64>,
    /// `|<u, f_start>| / |f_start|` for the left singular vector of the smallest value.
    pub cokernel_overlap: f64,
}

pub fn index_sample(v: &LocalizedIsometry) -> IndexSample {
    let q = v.support_frame();
    let vk = v.compressed(&q);
    let dec = linalg::svd(&vk);
    let small: Vec<f64> = dec.s.iter().copied().filter(|&s| s < INDEX_THRESHOLD).collect();
    let f0 = v.model.f_vector(v.start);
    let cokernel_overlap = if dec.s.is_empty() {
        0.0
    } else {
        let j = dec.s.len() - 1;
        let u = &q * dec.u.column(j);
        linalg::inner(&u, &f0).norm() / linalg::vec_norm(&f0)
    };
    IndexSample {
        cutoff: v.model.w,
        m_loc: v.model.m_loc,
        start: v.start,
        count: small.len(),
        smallest: small,
        cokernel_overlap,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexEstimate {
    pub index: usize,
    pub samples: Vec<IndexSample>,
}

/// Stable count of singular values below [`INDEX_THRESHOLD`] at the two largest cutoffs.
pub fn index_estimate(cutoffs: &[usize], start: i64) -> Result<IndexEstimate> {
    if cutoffs.len() < 2 {
        return Err(Error::InvalidInput("index estimate needs two cutoffs".into()));
    }
    let samples = cutoffs
        .par_iter()
        .map(|&w| Ok(index_sample(&build_v_from(CircleModel::with_default_range(w)?, start)?)))
        .collect::<Result<Vec<_>>>()?;
    let last: Vec<usize> = samples[samples.len() - 2..].iter().map(|s| s.count).collect();
    if last[0] != last[1] {
        return Err(Error::Unstable(last));
    }
    Ok(IndexEstimate {
        index: last[1],
        samples,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentPhase {
    pub tau: C64,
    pub residual: f64,
    pub tol: f64,
}

/// Common phase of `v` on each component's test functions.
pub fn prop_loc_check(
    apply: &dyn Fn(&CVector) -> CVector,
    components: &[Vec<CVector>],
    tol: f64,
) -> Result<Vec<ComponentPhase>> {
    let mut out = Vec::with_capacity(components.len());
    for (c, fs) in components.iter().enumerate() {
        let images: Vec<CVector> = fs.iter().map(apply).collect();
        let mut acc = ZERO;
        for (f, vf) in fs.iter().zip(&images) {
            acc += linalg::inner(f, vf);
        }
        let tau = if acc.norm() > 0.0 { acc / acc.norm() } else { ONE };
        let residual = fs
            .iter()
            .zip(&images)
            .map(|(f, vf)| linalg::vec_norm(&(vf - f * tau)) / linalg::vec_norm(f))
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::NoCommonPhase {
                component: c,
                residual,
                tol,
            });
        }
        out.push(ComponentPhase { tau, residual, tol });
    }
    Ok(out)
}

/// Test family `chi_{S^1 \ I} e_k` used for localization.
pub const LOCALIZATION_MODES: std::ops::RangeInclusive<i64> = -4..=4;

/// Localization residual `max_k |(v - 1) g_k| / |g_k|` at one cutoff.
pub fn localization_residual(v: &LocalizedIsometry) -> f64 {
    LOCALIZATION_MODES
        .map(|k| {
            let g = v.model.complement_vector(k);
            linalg::vec_norm(&(v.apply(&g) - &g)) / linalg::vec_norm(&g)
        })
        .fold(0.0, f64::max)
}

/// `N` species of `v` and `N` of its conjugate, assembled by block tags only.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesAssembly {
    pub species: usize,
    pub blocks: Vec<String>,
    pub half_index: usize,
    pub stat_dim: u64,
}

pub fn assemble_species(n: usize, ind_v: usize) -> Result<SpeciesAssembly> {
    let half_index = n * ind_v;
    let stat_dim = 1u64
        .checked_shl(half_index as u32)
        .filter(|_| half_index < 64)
        .ok_or(Error::Overflow(half_index))?;
    let mut blocks: Vec<String> = (0..n).map(|j| format!("v[{j}]")).collect();
    blocks.extend((0..n).map(|j| format!("conj(v)[{j}]")));
    Ok(SpeciesAssembly {
        species: n,
        blocks,
        half_index,
        stat_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: impl Fn(f64) -> C64, a: f64, b: f64) -> C64 {
        // Composite Simpson on a smooth integrand.
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + j as f64 * h) * w;
        }
        acc * (h / 3.0)
    }

    fn overlap_by_quadrature(m: i64, n: i64) -> C64 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        quad(
            |l| C64::from_polar(1.0, (2 * m - n) as f64 * l) * (SQRT_2 * sign),
            PI / 2.0,
            3.0 * PI / 2.0,
        ) / (2.0 * PI)
    }

    #[test]
    fn overlap_matches_quadrature() {
        assert!((overlap(0, 0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(overlap(0, 2), 0.0);
        assert!((overlap(0, 1).abs() - SQRT_2 / PI).abs() < 1e-15);
        for m in -3..=3 {
            for n in -7..=7 {
                let q = overlap_by_quadrature(m, n);
                assert!((q - C64::new(overlap(m, n), 0.0)).norm() < 1e-12, "m={m} n={n} {q}");
            }
        }
    }

    #[test]
    fn cayley_map() {
        for x in [-3.0, -1.0, -0.2, 0.0, 0.7, 1.0, 5.0] {
            assert!((cayley(x).norm() - 1.0).abs() < 1e-15);
            assert!((cayley(x) - cayley_angle(x)).norm() < 1e-15);
        }
        assert!((cayley(0.0) + ONE).norm() < 1e-15);
        assert!((cayley(1.0) - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((cayley(-1.0) - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn window_validation() {
        assert!(matches!(CircleModel::new(16, 5), Err(Error::WindowTooSmall(_))));
        assert!(matches!(CircleModel::new(16, 0), Err(Error::WindowTooSmall(_))));
        assert!(CircleModel::new(16, 4).is_ok());
    }

    #[test]
    fn hardy_projections_partition_window() {
        let m = CircleModel::new(8, 2).unwrap();
        let plus = m.hardy_plus();
        assert_eq!(plus.iter().filter(|&&p| p).count(), 9);
        assert_eq!(plus.len(), m.dim());
    }

    #[test]
    fn shift_and_fixed_action() {
        let v = build_v(128, 32).unwrap();
        let d = diagnostics(&v);
        assert!(d.shift_residual < 0.05, "{d:?}");
        assert!(d.fixed_residual < 0.05, "{d:?}");
        assert!(d.row_norm_deviation <= d.tail_bound);
    }

    #[test]
    fn odd_complement_modes_are_exactly_fixed() {
        let v = build_v(64, 16).unwrap();
        let g = v.model.complement_vector(3);
        assert!(linalg::vec_norm(&(v.apply(&g) - &g)) < 1e-13);
    }

    #[test]
    fn phases_factor_out() {
        let v = build_v(64, 16).unwrap().with_phase(C64::from_polar(1.0, PI / 3.0));
        let fs: Vec<CVector> = (-2..=2).map(|k| v.model.complement_vector(k)).collect();
        let r = prop_loc_check(&|x| v.apply(x), &[fs], 1e-2).unwrap();
        assert!((r[0].tau - C64::from_polar(1.0, PI / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn control_is_flagged() {
        let s = hs_control_study(&[16, 32, 64, 128]).unwrap();
        assert_eq!(s.verdict, Verdict::NotConsistent);
        assert!(s.exponent > HS_EXPONENT);
    }

    #[test]
    fn species_assembly() {
        let a = assemble_species(3, 1).unwrap();
        assert_eq!(a.half_index, 3);
        assert_eq!(a.stat_dim, 8);
        assert_eq!(a.blocks.len(), 6);
    }
}
