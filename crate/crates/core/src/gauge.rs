//! Gauge actions, characters of `det_h (x) Lambda^l k` and `Sym^l k`, sector tables.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ccr::KappaForm;
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMatrix, C64, ONE, ZERO};
use crate::selfdual::{BlockOperator, SelfDualSpace};

/// Tolerance for deciding that two sectors have equal characters.
pub const TAU_CHAR: f64 = 1e-9;
/// Grid size for U(1) samples.
pub const U1_GRID: usize = 64;
/// Default number of Haar samples for matrix groups.
pub const DEFAULT_SAMPLES: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupTag {
    U1,
    UN(usize),
    SUN(usize),
    Z2,
    Custom,
}

impl std::fmt::Display for GroupTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupTag::U1 => write!(f, "U(1)"),
            GroupTag::UN(n) => write!(f, "U({n})"),
            GroupTag::SUN(n) => write!(f, "SU({n})"),
            GroupTag::Z2 => write!(f, "Z2"),
            GroupTag::Custom => write!(f, "custom"),
        }
    }
}

/// How a group element acts on one `K1` mode.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeAction {
    /// Phase `e^{i q lambda}` (U(1)), `(-1)^q` (Z2) or `det(g)^q` (matrix groups).
    Charge(i32),
    /// Component `species` of the defining representation at `site`.
    Fundamental {
        site: usize,
        species: usize,
        conjugate: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    Phase(f64),
    Sign(bool),
    Matrix(CMatrix),
    Custom(usize),
}

impl GroupElement {
    pub fn label(&self) -> String {
        match self {
            GroupElement::Phase(l) => format!("lambda={l:.6}"),
            GroupElement::Sign(neg) => (if *neg { "-1" } else { "+1" }).to_string(),
            GroupElement::Matrix(m) => format!("matrix[{}]", m.nrows()),
            GroupElement::Custom(i) => format!("custom#{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeAction {
    pub group: GroupTag,
    pub domain: Vec<ModeAction>,
    pub codomain: Vec<ModeAction>,
    /// `(domain K1 unitary, codomain K1 unitary)` pairs for [`GroupTag::Custom`].
    pub custom: Vec<(CMatrix, CMatrix)>,
}

impl GaugeAction {
    pub fn charges(group: GroupTag, q_dom: &[i32], q_cod: &[i32]) -> Self {
        Self {
            group,
            domain: q_dom.iter().map(|&q| ModeAction::Charge(q)).collect(),
            codomain: q_cod.iter().map(|&q| ModeAction::Charge(q)).collect(),
            custom: Vec::new(),
        }
    }

    /// Every mode carries charge one.
    pub fn uniform(group: GroupTag, n_dom: usize, n_cod: usize) -> Self {
        Self::charges(group, &vec![1; n_dom], &vec![1; n_cod])
    }

    /// Species-major layout: mode `s * sites + j` is species `s` at site `j`.
    pub fn fundamental(n: usize, sites_dom: usize, sites_cod: usize, special: bool) -> Self {
        let modes = |sites: usize| {
            (0..n)
                .flat_map(|s| {
                    (0..sites).map(move |j| ModeAction::Fundamental {
                        site: j,
                        species: s,
                        conjugate: false,
                    })
                })
                .collect::<Vec<_>>()
        };
        Self {
            group: if special { GroupTag::SUN(n) } else { GroupTag::UN(n) },
            domain: modes(sites_dom),
            codomain: modes(sites_cod),
            custom: Vec::new(),
        }
    }

    fn modes(&self, codomain: bool) -> &[ModeAction] {
        if codomain {
            &self.codomain
        } else {
            &self.domain
        }
    }

    /// The unitary on `K1` of the domain or codomain.
    pub fn k1_matrix(&self, g: &GroupElement, codomain: bool) -> Result<CMatrix> {
        if let GroupElement::Custom(i) = g {
            let pair = self
                .custom
                .get(*i)
                .ok_or_else(|| Error::InvalidInput(format!("custom element {i} missing")))?;
            return Ok(if codomain { pair.1.clone() } else { pair.0.clone() });
        }
        let modes = self.modes(codomain);
        let n = modes.len();
        let scalar = |q: i32| -> Result<C64> {
            Ok(match g {
                GroupElement::Phase(l) => C64::from_polar(1.0, q as f64 * l),
                GroupElement::Sign(neg) => {
                    if *neg && q.rem_euclid(2) == 1 {
                        -ONE
                    } else {
                        ONE
                    }
                }
                GroupElement::Matrix(m) => linalg::determinant(m).powi(q),
                GroupElement::Custom(_) => unreachable!(),
            })
        };
        let mut u = CMatrix::zeros(n, n);
        for (i, a) in modes.iter().enumerate() {
            match a {
                ModeAction::Charge(q) => u[(i, i)] = scalar(*q)?,
                ModeAction::Fundamental {
                    site,
                    species,
                    conjugate,
                } => {
                    let GroupElement::Matrix(m) = g else {
                        return Err(Error::InvalidInput("fundamental modes need a matrix group".into()));
                    };
                    if *species >= m.nrows() {
                        return Err(Error::InvalidInput(format!("species {species} out of range")));
                    }
                    for (j, b) in modes.iter().enumerate() {
                        if let ModeAction::Fundamental {
                            site: s2,
                            species: sp2,
                            conjugate: c2,
                        } = b
                        {
                            if s2 == site && c2 == conjugate {
                                if *sp2 >= m.nrows() {
                                    return Err(Error::InvalidInput(format!("species {sp2} out of range")));
                                }
                                let z = m[(*species, *sp2)];
                                u[(i, j)] = if *conjugate { z.conj() } else { z };
                            }
                        }
                    }
                }
            }
        }
        let defect = frobenius(&(u.adjoint() * &u - CMatrix::identity(n, n)));
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "gauge action is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(u)
    }

    /// `u (+) conj(u)` on `K`.
    pub fn lift(&self, g: &GroupElement, codomain: bool) -> Result<BlockOperator> {
        let u = self.k1_matrix(g, codomain)?;
        Ok(lift_k1(&u))
    }

    /// Deterministic sample of the group.
    pub fn samples(&self, size: usize, seed: u64) -> Vec<GroupElement> {
        match self.group {
            GroupTag::U1 => (0..U1_GRID)
                .map(|j| GroupElement::Phase(2.0 * PI * j as f64 / U1_GRID as f64))
                .collect(),
            GroupTag::Z2 => vec![GroupElement::Sign(false), GroupElement::Sign(true)],
            GroupTag::UN(n) | GroupTag::SUN(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let special = matches!(self.group, GroupTag::SUN(_));
                (0..size)
                    .map(|_| {
                        GroupElement::Matrix(if special {
                            linalg::haar_special_unitary(n, &mut rng)
                        } else {
                            linalg::haar_unitary(n, &mut rng)
                        })
                    })
                    .collect()
            }
            GroupTag::Custom => (0..self.custom.len()).map(GroupElement::Custom).collect(),
        }
    }
}

pub fn lift_k1(u: &CMatrix) -> BlockOperator {
    let n = u.nrows();
    let s = SelfDualSpace::new(n);
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(u);
    m.view_mut((n, n), (n, n)).copy_from(&u.map(|z| z.conj()));
    BlockOperator::square(s, m).expect("lift shape")
}

/// `det(F* U F)` after checking that `span F` is `U`-invariant.
pub fn char_det_h(frame: &CMatrix, u: &CMatrix, tol: f64) -> Result<C64> {
    let residual = crate::car::invariance_defect(frame, u);
    if residual > tol {
        return Err(Error::NotInvariant { residual, tol });
    }
    Ok(linalg::determinant(&(frame.adjoint() * u * frame)))
}

/// Elementary symmetric polynomial `e_l`.
pub fn char_lambda(eigs: &[C64], l: usize) -> Result<C64> {
    if l > eigs.len() {
        return Err(Error::LevelOutOfRange {
            level: l,
            max: eigs.len(),
        });
    }
    let mut e = vec![ZERO; l + 1];
    e[0] = ONE;
    for &z in eigs {
        for k in (1..=l).rev() {
            let prev = e[k - 1];
            e[k] += z * prev;
        }
    }
    Ok(e[l])
}

/// Complete homogeneous symmetric polynomial `h_l`.
pub fn char_sym(eigs: &[C64], l: usize) -> C64 {
    let mut h = vec![ZERO; l + 1];
    h[0] = ONE;
    for &z in eigs {
        for k in 1..=l {
            let prev = h[k - 1];
            h[k] += z * prev;
        }
    }
    h[l]
}

/// Compression of `U` to the `k` frame: `F* U F`, or `F* C U F` for a `kappa`-frame.
pub fn compress(frame: &CMatrix, u: &CMatrix, kappa: Option<&KappaForm>) -> Result<CMatrix> {
    let m = match kappa {
        Some(kf) => frame.adjoint() * kf.matrix() * u * frame,
        None => frame.adjoint() * u * frame,
    };
    let uf = u * frame;
    let back = frame * &m;
    let residual = frobenius(&(uf - back));
    if residual > 1e-8 {
        return Err(Error::NotInvariant { residual, tol: 1e-8 });
    }
    Ok(m)
}

/// Eigenvalues of the compression, rejecting non-normal compressions.
pub fn restricted_eigenvalues(m: &CMatrix, tol: f64) -> Result<Vec<C64>> {
    let normality = frobenius(&(m * m.adjoint() - m.adjoint() * m));
    if normality > tol {
        return Err(Error::NotInvariant {
            residual: normality,
            tol,
        });
    }
    Ok(linalg::schur_eigenvalues(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    Car,
    Ccr,
}

impl std::fmt::Display for Algebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algebra::Car => write!(f, "car"),
            Algebra::Ccr => write!(f, "ccr"),
        }
    }
}

/// Action of one sample element restricted to `h` and `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedAction {
    pub label: String,
    pub det_h: C64,
    pub k_eigs: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorRow {
    pub level: usize,
    pub dimension: u64,
    pub characters: Vec<C64>,
    pub class: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub expected: String,
    pub expected_classes: Vec<usize>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorTable {
    pub algebra: Algebra,
    pub group: GroupTag,
    pub sample_size: usize,
    pub seed: Option<u64>,
    pub sample_labels: Vec<String>,
    pub rows: Vec<SectorRow>,
    pub annotation: Option<Annotation>,
    pub tol_char: f64,
}

impl SectorTable {
    pub fn classes(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.class).collect()
    }
}

/// Characters per level and their equivalence classes on the sample.
///
/// CAR rows run over `l = 0..=dim k` with `chi_l = det_h e_l`; CCR rows run over
/// `l = 0..=max_level` with `chi_l = h_l`.
pub fn sector_table(
    algebra: Algebra,
    group: &GroupTag,
    dim_k: usize,
    max_level: usize,
    samples: &[RestrictedAction],
    seed: Option<u64>,
) -> Result<SectorTable> {
    let top = match algebra {
        Algebra::Car => dim_k,
        Algebra::Ccr => max_level,
    };
    let mut rows = Vec::with_capacity(top + 1);
    for l in 0..=top {
        let dimension = match algebra {
            Algebra::Car => linalg::binomial(dim_k, l).unwrap_or(u64::MAX),
            Algebra::Ccr if dim_k == 0 => u64::from(l == 0),
            Algebra::Ccr => linalg::binomial(dim_k + l - 1, l).unwrap_or(u64::MAX),
        };
        let mut characters = Vec::with_capacity(samples.len());
        for s in samples {
            if s.k_eigs.len() != dim_k {
                return Err(Error::DimensionMismatch {
                    what: "restricted action on k",
                    expected: dim_k,
                    found: s.k_eigs.len(),
                });
            }
            characters.push(match algebra {
                Algebra::Car => s.det_h * char_lambda(&s.k_eigs, l)?,
                Algebra::Ccr => char_sym(&s.k_eigs, l),
            });
        }
        rows.push(SectorRow {
            level: l,
            dimension,
            characters,
            class: 0,
        });
    }
    let classes = classify(&rows.iter().map(|r| r.characters.clone()).collect::<Vec<_>>());
    for (r, c) in rows.iter_mut().zip(&classes) {
        r.class = *c;
    }
    let annotation = match (algebra, group) {
        (Algebra::Car, GroupTag::UN(n)) if *n == dim_k => Some(Annotation {
            expected: format!("U({n}): levels 0..={n} mutually inequivalent"),
            expected_classes: (0..=dim_k).collect(),
            matches: classes == (0..=dim_k).collect::<Vec<_>>(),
        }),
        (Algebra::Car, GroupTag::SUN(n)) if *n == dim_k => {
            let expected_classes: Vec<usize> = (0..=dim_k).map(|l| l % n).collect();
            Some(Annotation {
                expected: format!("SU({n}): levels 0..{n} mutually inequivalent, level {n} equivalent to level 0"),
                matches: classes == expected_classes,
                expected_classes,
            })
        }
        _ => None,
    };
    Ok(SectorTable {
        algebra,
        group: group.clone(),
        sample_size: samples.len(),
        seed,
        sample_labels: samples.iter().map(|s| s.label.clone()).collect(),
        rows,
        annotation,
        tol_char: TAU_CHAR,
    })
}

/// Class index of each row: the first earlier row with equal characters, else a new class.
fn classify(chars: &[Vec<C64>]) -> Vec<usize> {
    let mut classes: Vec<usize> = Vec::with_capacity(chars.len());
    let mut reps: Vec<usize> = Vec::new();
    for (i, row) in chars.iter().enumerate() {
        let found = reps
            .iter()
            .position(|&r| chars[r].iter().zip(row).all(|(a, b)| (a - b).norm() <= TAU_CHAR));
        match found {
            Some(c) => classes.push(c),
            None => {
                reps.push(i);
                classes.push(reps.len() - 1);
            }
        }
    }
    classes
}

/// `det_h(U) det(u_k[alpha, beta])` over subsets, in the family's label order.
pub fn lambda_matrix(det_h: C64, u_k: &CMatrix, labels: &[Vec<usize>]) -> CMatrix {
    let n = labels.len();
    CMatrix::from_fn(n, n, |a, b| {
        let (ra, cb) = (&labels[a], &labels[b]);
        if ra.len() != cb.len() {
            return ZERO;
        }
        let sub = CMatrix::from_fn(ra.len(), cb.len(), |i, j| u_k[(ra[i], cb[j])]);
        det_h * linalg::determinant(&sub)
    })
}

fn permanent(m: &CMatrix) -> C64 {
    let n = m.nrows();
    if n == 0 {
        return ONE;
    }
    let mut acc = ZERO;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let mut prod = ONE;
        for (i, &j) in p.iter().enumerate() {
            prod *= m[(i, j)];
        }
        acc += prod;
    });
    acc
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn multiplicity_factor(label: &[usize]) -> f64 {
    let mut out = 1.0;
    let mut i = 0;
    while i < label.len() {
        let mut j = i;
        while j < label.len() && label[j] == label[i] {
            j += 1;
        }
        out *= (1..=(j - i)).fold(1.0, |a, k| a * k as f64);
        i = j;
    }
    out
}

/// `perm(u_k[alpha, beta]) / sqrt(alpha! beta!)` over multisets.
pub fn sym_matrix(u_k: &CMatrix, labels: &[Vec<usize>]) -> CMatrix {
    let n = labels.len();
    CMatrix::from_fn(n, n, |a, b| {
        let (ra, cb) = (&labels[a], &labels[b]);
        if ra.len() != cb.len() {
            return ZERO;
        }
        let sub = CMatrix::from_fn(ra.len(), cb.len(), |i, j| u_k[(ra[i], cb[j])]);
        permanent(&sub) / (multiplicity_factor(ra) * multiplicity_factor(cb)).sqrt()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    /// Largest `|tr(oracle block_l) - chi_l|` per level over the sample.
    pub per_level: Vec<f64>,
    pub max_trace_deviation: f64,
    /// Largest entrywise deviation from the predicted matrices, when supplied.
    pub max_matrix_deviation: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Per-level trace comparison of oracle matrices against the sector table.
pub fn oracle_compare(
    table: &SectorTable,
    level_ranges: &[std::ops::Range<usize>],
    oracle: &[CMatrix],
    predicted: Option<&[CMatrix]>,
    tol: f64,
) -> Result<OracleComparison> {
    if oracle.len() != table.sample_size {
        return Err(Error::DimensionMismatch {
            what: "oracle samples",
            expected: table.sample_size,
            found: oracle.len(),
        });
    }
    let mut per_level = vec![0.0f64; level_ranges.len()];
    let mut worst = (0.0f64, 0usize, 0usize);
    for (s, m) in oracle.iter().enumerate() {
        for (l, r) in level_ranges.iter().enumerate() {
            let Some(row) = table.rows.get(l) else {
                return Err(Error::LevelOutOfRange {
                    level: l,
                    max: table.rows.len().saturating_sub(1),
                });
            };
            let tr: C64 = r.clone().map(|i| m[(i, i)]).sum();
            let dev = (tr - row.characters[s]).norm();
            per_level[l] = per_level[l].max(dev);
            if dev > worst.0 {
                worst = (dev, s, l);
            }
        }
    }
    let max_matrix_deviation = predicted.map(|p| {
        oracle
            .iter()
            .zip(p)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max)
    });
    let overall = worst.0.max(max_matrix_deviation.unwrap_or(0.0));
    if overall > tol {
        return Err(Error::Mismatch {
            element: worst.1,
            level: worst.2,
            deviation: overall,
            tol,
        });
    }
    Ok(OracleComparison {
        per_level,
        max_trace_deviation: worst.0,
        max_matrix_deviation,
        tol,
        pass: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn det_h_examples() {
        let u = CMatrix::from_diagonal_element(2, 2, C64::from_polar(1.0, 0.3));
        assert_eq!(char_det_h(&CMatrix::zeros(2, 0), &u, 1e-10).unwrap(), ONE);
        let mut f = CMatrix::zeros(2, 1);
        f[(0, 0)] = ONE;
        assert!((char_det_h(&f, &u, 1e-10).unwrap() - C64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert_eq!(char_det_h(&f, &(-CMatrix::identity(2, 2)), 1e-10).unwrap(), -ONE);
    }

    #[test]
    fn lambda_examples() {
        let (z1, z2) = (C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.1));
        assert_eq!(char_lambda(&[z1, z2], 0).unwrap(), ONE);
        assert!((char_lambda(&[z1, z2], 2).unwrap() - z1 * z2).norm() < 1e-15);
        assert!((char_lambda(&[z1, z1.conj()], 2).unwrap() - ONE).norm() < 1e-15);
        assert!(matches!(char_lambda(&[z1], 2), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn sym_examples() {
        let (z1, z2) = (C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.1));
        assert_eq!(char_sym(&[z1, z2], 0), ONE);
        assert!((char_sym(&[z1], 3) - z1.powu(3)).norm() < 1e-15);
        assert!((char_sym(&[z1, z2], 2) - (z1 * z1 + z1 * z2 + z2 * z2)).norm() < 1e-15);
    }

    #[test]
    fn u1_table_for_one_dimensional_k() {
        let act = GaugeAction::uniform(GroupTag::U1, 1, 1);
        let samples: Vec<RestrictedAction> = act
            .samples(0, 0)
            .iter()
            .map(|g| {
                let GroupElement::Phase(l) = g else { unreachable!() };
                RestrictedAction {
                    label: g.label(),
                    det_h: ONE,
                    k_eigs: vec![C64::from_polar(1.0, *l)],
                }
            })
            .collect();
        let t = sector_table(Algebra::Car, &GroupTag::U1, 1, 0, &samples, None).unwrap();
        assert_eq!(t.classes(), vec![0, 1]);
        assert_eq!(t.sample_size, 64);
        let t = sector_table(Algebra::Ccr, &GroupTag::U1, 1, 5, &samples, None).unwrap();
        assert_eq!(t.classes(), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn su2_pattern() {
        let act = GaugeAction::fundamental(2, 1, 1, true);
        let samples: Vec<RestrictedAction> = act
            .samples(DEFAULT_SAMPLES, 7)
            .iter()
            .map(|g| {
                let u = act.k1_matrix(g, true).unwrap();
                RestrictedAction {
                    label: g.label(),
                    det_h: ONE,
                    k_eigs: linalg::schur_eigenvalues(&u),
                }
            })
            .collect();
        let t = sector_table(Algebra::Car, &GroupTag::SUN(2), 2, 0, &samples, Some(7)).unwrap();
        assert_eq!(t.classes(), vec![0, 1, 0]);
        assert!(t.annotation.unwrap().matches);
        assert_eq!(t.rows.iter().map(|r| r.dimension).collect::<Vec<_>>(), vec![1, 2, 1]);
    }

    #[test]
    fn permanent_small() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(permanent(&m), c(10.0, 0.0));
        assert_eq!(multiplicity_factor(&[0, 0, 1, 1, 1]), 12.0);
    }
}
