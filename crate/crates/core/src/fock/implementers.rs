use super::{FermiFock, ModeFock, OmegaFamily};
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMatrix, CVector, C64};
use crate::selfdual::BlockOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct ImplementerResiduals {
    /// `max_{alpha, beta} |Psi_alpha* Psi_beta - delta|`.
    pub orthonormality: f64,
    /// `|sum Psi Psi* - 1|`.
    pub completeness: f64,
    /// `max_f |sum Psi pi(f) Psi* - pi(V f)|` over domain basis vectors.
    pub implementation: f64,
}

/// Isometries `Psi_alpha` from the domain Fock space into the codomain Fock space.
#[derive(Clone, Debug)]
pub struct ImplementerSet {
    pub labels: Vec<Vec<usize>>,
    pub maps: Vec<CMatrix>,
    pub residuals: ImplementerResiduals,
}

impl ImplementerSet {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

/// `Psi_alpha |S> = pi(V e_{i_1}) ... pi(V e_{i_k}) Omega_alpha` for `S = {i_1 < ... < i_k}`.
pub fn implementers_from_omegas(
    dom: &FermiFock,
    cod: &FermiFock,
    v: &BlockOperator,
    omegas: &OmegaFamily,
    tol: f64,
) -> Result<ImplementerSet> {
    let nd = dom.modes();
    if v.domain().n1() != nd || v.codomain().n1() != cod.modes() {
        return Err(Error::ShapeMismatch("Fock spaces do not match V".into()));
    }
    let images: Vec<CVector> = (0..nd).map(|i| v.entries().column(i).into_owned()).collect();
    let mut maps = Vec::with_capacity(omegas.len());
    for omega in &omegas.vectors {
        let mut psi = CMatrix::zeros(cod.dim(), dom.dim());
        psi.set_column(0, omega);
        for s in 1..dom.dim() {
            let low = s.trailing_zeros() as usize;
            let rest = psi.column(s & (s - 1)).into_owned();
            psi.set_column(s, &cod.apply_pi(&images[low], &rest));
        }
        maps.push(psi);
    }
    let residuals = implementer_residuals(dom, cod, v, &maps);
    let worst = residuals
        .orthonormality
        .max(residuals.completeness)
        .max(residuals.implementation);
    if worst > tol {
        let what = if residuals.implementation > tol {
            "sum Psi pi(f) Psi* = pi(V f)"
        } else if residuals.orthonormality > tol {
            "Psi_alpha* Psi_beta = delta"
        } else {
            "sum Psi Psi* = 1"
        };
        return Err(Error::ImplementationDefect {
            what,
            residual: worst,
            tol,
        });
    }
    Ok(ImplementerSet {
        labels: omegas.labels.clone(),
        maps,
        residuals,
    })
}

fn implementer_residuals(
    dom: &FermiFock,
    cod: &FermiFock,
    v: &BlockOperator,
    maps: &[CMatrix],
) -> ImplementerResiduals {
    let (dd, dc) = (dom.dim(), cod.dim());
    let id_d = CMatrix::identity(dd, dd);
    let mut orthonormality: f64 = 0.0;
    for (a, pa) in maps.iter().enumerate() {
        for (b, pb) in maps.iter().enumerate() {
            let g = pa.adjoint() * pb;
            let r = if a == b { frobenius(&(g - &id_d)) } else { frobenius(&g) };
            orthonormality = orthonormality.max(r);
        }
    }
    let mut sum = CMatrix::zeros(dc, dc);
    for p in maps {
        sum += p * p.adjoint();
    }
    let completeness = frobenius(&(sum - CMatrix::identity(dc, dc)));
    let sd = v.domain();
    let mut implementation: f64 = 0.0;
    for idx in 0..sd.dim() {
        let f = sd.basis_vector(idx);
        let pf = dom.pi_matrix(&f);
        let mut lhs = CMatrix::zeros(dc, dc);
        for p in maps {
            lhs += p * &pf * p.adjoint();
        }
        let rhs = cod.pi_matrix(&v.apply(&f));
        implementation = implementation.max(frobenius(&(lhs - rhs)));
    }
    ImplementerResiduals {
        orthonormality,
        completeness,
        implementation,
    }
}

/// Distances that witness (or refute) gauge invariance of the implementers.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeResiduals {
    /// `max_beta |(1 - [span Omega]) Gamma(U) Omega_beta|`.
    pub omega_span: f64,
    /// `max_beta |Gamma(U) Psi_beta Gamma(U)* - proj onto span Psi|`, normalized per Fock dimension.
    pub implementer_span: f64,
}

/// Residuals for `Gamma_cod(U) Psi_beta Gamma_dom(U)*` staying in `span{Psi_alpha}`.
pub fn gauge_invariance_residuals(
    dom: &FermiFock,
    cod: &FermiFock,
    set: &ImplementerSet,
    omegas: &OmegaFamily,
    u_dom: &CMatrix,
    u_cod: &CMatrix,
) -> GaugeResiduals {
    let omega_span = super::charge_rep(cod, omegas, u_cod).invariance_residual;
    let gd = dom.gamma_matrix(u_dom);
    let gc = cod.gamma_matrix(u_cod);
    let scale = (dom.dim() as f64).sqrt();
    let mut implementer_span: f64 = 0.0;
    for pb in &set.maps {
        let x = &gc * pb * gd.adjoint();
        let mut proj = CMatrix::zeros(x.nrows(), x.ncols());
        for pa in &set.maps {
            let coef = (pa.adjoint() * &x).trace() / C64::new(dom.dim() as f64, 0.0);
            proj += pa * coef;
        }
        implementer_span = implementer_span.max(linalg::frobenius(&(x - proj)) / scale);
    }
    GaugeResiduals {
        omega_span,
        implementer_span,
    }
}
