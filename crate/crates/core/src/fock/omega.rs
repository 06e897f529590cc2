use super::{BoseFock, FermiFock, ModeFock};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Orthonormal family `Omega_alpha` labelled by multi-indices, ordered by level
/// and then lexicographically.
#[derive(Clone, Debug)]
pub struct OmegaFamily {
    pub labels: Vec<Vec<usize>>,
    pub vectors: Vec<CVector>,
}

impl OmegaFamily {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn as_matrix(&self) -> CMatrix {
        let d = self.vectors.first().map_or(0, |v| v.len());
        let mut m = CMatrix::zeros(d, self.len());
        for (j, v) in self.vectors.iter().enumerate() {
            m.set_column(j, v);
        }
        m
    }

    pub fn gram_defect(&self) -> f64 {
        linalg::orthonormality_defect(&self.as_matrix())
    }

    /// Index ranges of each level.
    pub fn levels(&self) -> Vec<std::ops::Range<usize>> {
        let mut out: Vec<std::ops::Range<usize>> = Vec::new();
        for (j, l) in self.labels.iter().enumerate() {
            match out.last_mut() {
                Some(r) if self.labels[r.start].len() == l.len() => r.end = j + 1,
                _ => out.push(j..j + 1),
            }
        }
        out
    }
}

/// `Omega_P = det(1 + T*T)^{-1/4} psi(e_1) ... psi(e_L) exp(1/2 conj(T) a* a*) Omega`.
///
/// `h_frame` holds `K`-vectors (zero `K2` part), `t` is the `K1 -> K2` block.
pub fn omega_p_fermi(f: &FermiFock, h_frame: &CMatrix, t: &CMatrix) -> CVector {
    let n = f.modes();
    let s = t.map(|z| z.conj());
    let gram = CMatrix::identity(n, n) + t.adjoint() * t;
    let det = linalg::determinant(&gram).re;
    let mut v = f.apply_pair_exponential(&s, 1.0, &f.vacuum());
    for j in (0..h_frame.ncols()).rev() {
        v = f.apply_psi(&h_frame.column(j).into_owned(), &v);
    }
    v * C64::new(det.powf(-0.25), 0.0)
}

/// `Omega_alpha = psi(g_{alpha_1}) ... psi(g_{alpha_l}) Omega_P` over all subsets.
pub fn omega_alpha_fermi(f: &FermiFock, omega_p: &CVector, k_frame: &CMatrix) -> Result<OmegaFamily> {
    let d = k_frame.ncols();
    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    for l in 0..=d {
        for alpha in linalg::combinations(d, l) {
            let mut v = omega_p.clone();
            for &j in alpha.iter().rev() {
                v = f.apply_psi(&k_frame.column(j).into_owned(), &v);
            }
            labels.push(alpha);
            vectors.push(v);
        }
    }
    let fam = OmegaFamily { labels, vectors };
    let defect = fam.gram_defect();
    if defect > 1e-10 {
        return Err(Error::OrthonormalityFailure { defect, tol: 1e-10 });
    }
    Ok(fam)
}

/// Truncated bosonic `Omega_P` with its exact missing mass.
#[derive(Clone, Debug)]
pub struct BoseVacuum {
    pub vector: CVector,
    /// `|Omega_P - truncation|`, from the closed-form Gaussian norm.
    pub tail: f64,
    pub det_factor: f64,
}

/// `Omega_P = det(1 - T*T)^{1/4} exp(-1/2 conj(T) a* a*) Omega`, truncated.
pub fn omega_p_bose(f: &BoseFock, t: &CMatrix, max_tail: f64) -> Result<BoseVacuum> {
    let n = f.modes();
    let gram = CMatrix::identity(n, n) - t.adjoint() * t;
    let det = linalg::determinant(&gram).re;
    if det <= 0.0 {
        return Err(Error::NormBoundViolation {
            norm: linalg::op_norm(t),
            margin: 0.0,
        });
    }
    let s = t.map(|z| z.conj());
    let raw = f.apply_pair_exponential(&s, -1.0, &f.vacuum());
    let factor = det.powf(0.25);
    let vector = raw * C64::new(factor, 0.0);
    let kept = linalg::vec_norm(&vector).powi(2);
    let tail = (1.0 - kept).max(0.0).sqrt();
    if tail > max_tail {
        return Err(Error::CutoffTooSmall { tail, max: max_tail });
    }
    Ok(BoseVacuum {
        vector,
        tail,
        det_factor: factor,
    })
}

/// Bosonic `Omega_alpha` built two ways.
#[derive(Clone, Debug)]
pub struct BoseFamily {
    /// Normalized `pi(g_{alpha_1}) ... pi(g_{alpha_l}) Omega_P`.
    pub family: OmegaFamily,
    /// Ratio `|pi(g...) Omega_P| / |psi(g...) Omega_P|` per multi-index, when the
    /// polar route was evaluated.
    pub constants: Option<Vec<f64>>,
    /// Worst `|x - c y| / |x|` between the two routes.
    pub proportionality: Option<f64>,
}

/// Largest Fock dimension for which the dense polar route is evaluated.
pub const POLAR_DIM_LIMIT: usize = 1000;

/// `Omega_alpha` for all multisets `alpha` of size at most `max_level`.
pub fn omega_alpha_bose(f: &BoseFock, omega_p: &CVector, k_frame: &CMatrix, max_level: usize) -> Result<BoseFamily> {
    let d = k_frame.ncols();
    let polar: Option<Vec<CMatrix>> = if f.dim() <= POLAR_DIM_LIMIT {
        Some(
            (0..d)
                .map(|j| {
                    let m = f.pi_matrix(&k_frame.column(j).into_owned());
                    let dec = linalg::svd(&m);
                    &dec.u * dec.v.adjoint()
                })
                .collect(),
        )
    } else {
        None
    };
    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    let mut constants = Vec::new();
    let mut worst: f64 = 0.0;
    for l in 0..=max_level {
        for alpha in linalg::multisets(d, l) {
            let mut v = omega_p.clone();
            for &j in alpha.iter().rev() {
                v = f.apply_pi(&k_frame.column(j).into_owned(), &v);
            }
            let nv = linalg::vec_norm(&v);
            if let Some(ws) = &polar {
                let mut w = omega_p.clone();
                for &j in alpha.iter().rev() {
                    w = &ws[j] * w;
                }
                let nw = linalg::vec_norm(&w);
                let c = linalg::inner(&w, &v) / (nw * nw);
                worst = worst.max(linalg::vec_norm(&(&v - &w * c)) / nv);
                constants.push(nv / nw);
            }
            labels.push(alpha);
            vectors.push(v / C64::new(nv, 0.0));
        }
    }
    let (constants, proportionality) = if polar.is_some() {
        (Some(constants), Some(worst))
    } else {
        (None, None)
    };
    Ok(BoseFamily {
        family: OmegaFamily { labels, vectors },
        constants,
        proportionality,
    })
}

/// `<Omega_alpha, Gamma(U) Omega_beta>` with the distance of `Gamma(U) span` from the span.
#[derive(Clone, Debug)]
pub struct ChargeRep {
    pub matrix: CMatrix,
    pub invariance_residual: f64,
}

pub fn charge_rep<F: ModeFock>(f: &F, family: &OmegaFamily, u11: &CMatrix) -> ChargeRep {
    let basis = family.as_matrix();
    let n = family.len();
    let mut images = CMatrix::zeros(f.dim(), n);
    for (j, v) in family.vectors.iter().enumerate() {
        images.set_column(j, &f.apply_gamma(u11, v));
    }
    let matrix = basis.adjoint() * &images;
    let mut residual: f64 = 0.0;
    for j in 0..n {
        let r = images.column(j) - &basis * matrix.column(j);
        residual = residual.max(r.norm());
    }
    ChargeRep {
        matrix,
        invariance_residual: residual,
    }
}

/// As [`charge_rep`], failing when the span is not invariant.
pub fn charge_rep_matrix<F: ModeFock>(f: &F, family: &OmegaFamily, u11: &CMatrix, tol: f64) -> Result<CMatrix> {
    let rep = charge_rep(f, family, u11);
    if rep.invariance_residual > tol {
        return Err(Error::NotInvariant {
            residual: rep.invariance_residual,
            tol,
        });
    }
    Ok(rep.matrix)
}
