//! Brute-force Fock spaces used as an independent oracle.
//!
//! Second quantization of a one-particle unitary is applied to vectors through
//! a factorization into adjacent two-mode rotations, so no `2^n x 2^n` matrix
//! is ever formed unless a caller asks for one.

mod bose;
mod fermi;
mod implementers;
mod omega;

pub use bose::BoseFock;
pub use fermi::FermiFock;
pub use implementers::{
    gauge_invariance_residuals, implementers_from_omegas, GaugeResiduals, ImplementerResiduals, ImplementerSet,
};
pub use omega::{
    charge_rep, charge_rep_matrix, omega_alpha_bose, omega_alpha_fermi, omega_p_bose, omega_p_fermi, BoseFamily,
    BoseVacuum, ChargeRep, OmegaFamily,
};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::selfdual::{BlockOperator, Half};

/// Default cap on the fermionic Fock dimension.
pub const DEFAULT_FOCK_CAP: usize = 4096;

/// Operations shared by the fermionic and bosonic oracles.
pub trait ModeFock {
    fn modes(&self) -> usize;
    fn dim(&self) -> usize;
    fn vacuum(&self) -> CVector;
    /// `out += coeff * a*(e_i) x`.
    fn add_create(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector);
    /// `out += coeff * a(e_i) x`.
    fn add_annihilate(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector);
    /// `Gamma(diag(d))`.
    fn apply_diagonal(&self, d: &[C64], x: &mut CVector);
    /// Second quantization of a rotation `g` on modes `(p, p + 1)`.
    fn apply_two_mode(&self, p: usize, g: &[[C64; 2]; 2], x: &mut CVector);

    /// `pi(f) = a*(P1 f) + a(P1 f*)` for `f` in `K`.
    fn apply_pi(&self, f: &CVector, x: &CVector) -> CVector {
        let n = self.modes();
        assert_eq!(f.len(), 2 * n, "vector lives in the wrong space");
        let mut out = CVector::zeros(self.dim());
        for i in 0..n {
            if f[i] != linalg::ZERO {
                self.add_create(i, f[i], x, &mut out);
            }
            if f[n + i] != linalg::ZERO {
                self.add_annihilate(i, f[n + i], x, &mut out);
            }
        }
        out
    }

    fn matrix_of(&self, apply: &dyn Fn(&CVector) -> CVector) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = CVector::zeros(d);
            e[j] = linalg::ONE;
            m.set_column(j, &apply(&e));
        }
        m
    }

    fn pi_matrix(&self, f: &CVector) -> CMatrix {
        self.matrix_of(&|x| self.apply_pi(f, x))
    }

    fn create_matrix(&self, i: usize) -> CMatrix {
        self.matrix_of(&|x| {
            let mut out = CVector::zeros(self.dim());
            self.add_create(i, linalg::ONE, x, &mut out);
            out
        })
    }

    fn annihilate_matrix(&self, i: usize) -> CMatrix {
        self.matrix_of(&|x| {
            let mut out = CVector::zeros(self.dim());
            self.add_annihilate(i, linalg::ONE, x, &mut out);
            out
        })
    }

    /// `Gamma(u) x` for a unitary `u` on `K1`.
    fn apply_gamma(&self, u: &CMatrix, x: &CVector) -> CVector {
        assert_eq!(u.nrows(), self.modes());
        let dec = givens(u);
        let mut y = x.clone();
        self.apply_diagonal(&dec.diag, &mut y);
        for (p, g) in dec.steps.iter().rev() {
            let gh = [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]];
            self.apply_two_mode(*p, &gh, &mut y);
        }
        y
    }

    fn gamma_matrix(&self, u: &CMatrix) -> CMatrix {
        self.matrix_of(&|x| self.apply_gamma(u, x))
    }

    /// `exp(sign * 1/2 sum_ik s_ik a*_i a*_k) x`, summed until the series stops.
    fn apply_pair_exponential(&self, s: &CMatrix, sign: f64, x: &CVector) -> CVector {
        let n = self.modes();
        let mut total = x.clone();
        let mut term = x.clone();
        let mut k = 1.0;
        let tiny = 1e-300;
        for _ in 0..(n * 64 + 8) {
            let mut next = CVector::zeros(self.dim());
            for i in 0..n {
                for j in 0..n {
                    let coef = s[(i, j)] * (0.5 * sign / k);
                    if coef == linalg::ZERO {
                        continue;
                    }
                    let mut tmp = CVector::zeros(self.dim());
                    self.add_create(j, linalg::ONE, &term, &mut tmp);
                    self.add_create(i, coef, &tmp, &mut next);
                }
            }
            if linalg::vec_norm(&next) <= tiny {
                break;
            }
            total += &next;
            term = next;
            k += 1.0;
        }
        total
    }
}

/// `G_m ... G_1 u = diag` with `G_k` acting on modes `(p_k, p_k + 1)`.
pub(crate) struct Givens {
    pub steps: Vec<(usize, [[C64; 2]; 2])>,
    pub diag: Vec<C64>,
}

pub(crate) fn givens(u: &CMatrix) -> Givens {
    let n = u.nrows();
    let mut a = u.clone();
    let mut steps = Vec::new();
    for col in 0..n.saturating_sub(1) {
        for r in (col + 1..n).rev() {
            let x = a[(r - 1, col)];
            let y = a[(r, col)];
            if y.norm() == 0.0 {
                continue;
            }
            let rho = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let g = [[x.conj() / rho, y.conj() / rho], [-y / rho, x / rho]];
            for j in 0..n {
                let (top, bot) = (a[(r - 1, j)], a[(r, j)]);
                a[(r - 1, j)] = g[0][0] * top + g[0][1] * bot;
                a[(r, j)] = g[1][0] * top + g[1][1] * bot;
            }
            steps.push((r - 1, g));
        }
    }
    let diag = (0..n).map(|i| a[(i, i)]).collect();
    Givens { steps, diag }
}

/// `U11` of a gauge unitary, after checking `[U, P1] = 0`.
pub fn gauge_block(u: &BlockOperator, tol: f64) -> Result<CMatrix> {
    let space = u.domain();
    if !u.is_square() {
        return Err(Error::ShapeMismatch("gauge unitaries are square".into()));
    }
    let defect = linalg::frobenius(crate::selfdual::commutator(&space.p1(), u).entries());
    if defect > tol {
        return Err(Error::NotGaugeCompatible { defect });
    }
    Ok(u.block(Half::One, Half::One))
}
