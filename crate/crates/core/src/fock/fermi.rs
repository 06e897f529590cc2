use super::ModeFock;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, I};

/// Antisymmetric Fock space over `n` modes; basis state `S` is a bitmask,
/// `|S> = a*_{i1} ... a*_{ik} |0>` with `i1 < ... < ik`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FermiFock {
    modes: usize,
}

impl FermiFock {
    pub const MAX_MODES: usize = 20;

    pub fn new(modes: usize, cap: usize) -> Result<Self> {
        if modes > Self::MAX_MODES || (1usize << modes) > cap {
            return Err(Error::CapExceeded {
                dim: 1usize.checked_shl(modes as u32).unwrap_or(usize::MAX),
                cap,
            });
        }
        Ok(Self { modes })
    }

    #[inline]
    fn sign_below(s: usize, i: usize) -> f64 {
        if (s & ((1usize << i) - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn basis_state(&self, mask: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[mask] = crate::linalg::ONE;
        v
    }

    /// `Gamma(-1)`, the parity operator.
    pub fn apply_parity(&self, x: &CVector) -> CVector {
        CVector::from_fn(self.dim(), |s, _| if s.count_ones() % 2 == 0 { x[s] } else { -x[s] })
    }

    /// `theta = (1 - i Gamma(-1)) / sqrt 2`.
    pub fn theta_matrix(&self) -> CMatrix {
        let d = self.dim();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_fn(d, d, |i, j| {
            if i != j {
                C64::new(0.0, 0.0)
            } else if i.count_ones() % 2 == 0 {
                C64::new(r, -r)
            } else {
                C64::new(r, r)
            }
        })
    }

    /// `psi(f) x = theta pi(f) theta* x = i pi(f) Gamma(-1) x`.
    pub fn apply_psi(&self, f: &CVector, x: &CVector) -> CVector {
        self.apply_pi(f, &self.apply_parity(x)) * I
    }

    pub fn psi_matrix(&self, f: &CVector) -> CMatrix {
        self.matrix_of(&|x| self.apply_psi(f, x))
    }
}

impl ModeFock for FermiFock {
    fn modes(&self) -> usize {
        self.modes
    }

    fn dim(&self) -> usize {
        1usize << self.modes
    }

    fn vacuum(&self) -> CVector {
        self.basis_state(0)
    }

    fn add_create(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector) {
        let bit = 1usize << i;
        for s in 0..self.dim() {
            if s & bit == 0 && x[s] != C64::new(0.0, 0.0) {
                out[s | bit] += coeff * x[s] * Self::sign_below(s, i);
            }
        }
    }

    fn add_annihilate(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector) {
        let bit = 1usize << i;
        for s in 0..self.dim() {
            if s & bit != 0 && x[s] != C64::new(0.0, 0.0) {
                out[s ^ bit] += coeff * x[s] * Self::sign_below(s, i);
            }
        }
    }

    fn apply_diagonal(&self, d: &[C64], x: &mut CVector) {
        for s in 0..self.dim() {
            let mut ph = C64::new(1.0, 0.0);
            let mut m = s;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                ph *= d[i];
                m &= m - 1;
            }
            x[s] *= ph;
        }
    }

    fn apply_two_mode(&self, p: usize, g: &[[C64; 2]; 2], x: &mut CVector) {
        let (bp, bq) = (1usize << p, 1usize << (p + 1));
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        for s in 0..self.dim() {
            match (s & bp != 0, s & bq != 0) {
                (true, false) => {
                    let t = s ^ bp ^ bq;
                    let (a, b) = (x[s], x[t]);
                    x[s] = g[0][0] * a + g[0][1] * b;
                    x[t] = g[1][0] * a + g[1][1] * b;
                }
                (true, true) => x[s] *= det,
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius, haar_unitary, random_complex_vector, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn car_relations() {
        let f = FermiFock::new(4, 4096).unwrap();
        let id = CMatrix::identity(16, 16);
        for i in 0..4 {
            let ai = f.annihilate_matrix(i);
            let ci = f.create_matrix(i);
            assert!(frobenius(&(&ci * &ci)) == 0.0);
            for j in 0..4 {
                let cj = f.create_matrix(j);
                let anti = &ai * &cj + &cj * &ai;
                let expect = if i == j { id.clone() } else { CMatrix::zeros(16, 16) };
                assert!(frobenius(&(anti - expect)) == 0.0);
            }
        }
    }

    #[test]
    fn pi_of_basis_vectors() {
        let f = FermiFock::new(3, 4096).unwrap();
        let mut e1 = CVector::zeros(6);
        e1[0] = ONE;
        assert_eq!(f.pi_matrix(&e1), f.create_matrix(0));
        let mut e1s = CVector::zeros(6);
        e1s[3] = ONE;
        assert_eq!(f.pi_matrix(&e1s), f.annihilate_matrix(0));
    }

    #[test]
    fn pi_anticommutator_is_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = FermiFock::new(3, 4096).unwrap();
        let a = random_complex_vector(6, &mut rng);
        let b = random_complex_vector(6, &mut rng);
        let pa = f.pi_matrix(&a);
        let pb = f.pi_matrix(&b);
        let anti = pa.adjoint() * &pb + &pb * pa.adjoint();
        let ip = crate::linalg::inner(&a, &b);
        assert!(frobenius(&(anti - CMatrix::identity(8, 8) * ip)) < 1e-12);
    }

    #[test]
    fn gamma_examples() {
        let f = FermiFock::new(3, 4096).unwrap();
        assert!(frobenius(&(f.gamma_matrix(&CMatrix::identity(3, 3)) - CMatrix::identity(8, 8))) < 1e-14);
        let minus = f.gamma_matrix(&(-CMatrix::identity(3, 3)));
        for s in 0..8usize {
            let expect = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            assert!((minus[(s, s)] - c(expect, 0.0)).norm() < 1e-14);
        }
        let lam = 0.7;
        let mut u = CMatrix::identity(3, 3);
        u[(1, 1)] = C64::from_polar(1.0, lam);
        let g = f.gamma_matrix(&u);
        for s in 0..8usize {
            let occ = ((s >> 1) & 1) as f64;
            assert!((g[(s, s)] - C64::from_polar(1.0, lam * occ)).norm() < 1e-14);
        }
    }

    #[test]
    fn gamma_implements_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let f = FermiFock::new(4, 4096).unwrap();
        let u = haar_unitary(4, &mut rng);
        let g = f.gamma_matrix(&u);
        assert!(frobenius(&(g.adjoint() * &g - CMatrix::identity(16, 16))) < 1e-12);
        let vac = f.vacuum();
        assert!(crate::linalg::vec_norm(&(&g * &vac - &vac)) < 1e-12);
        let x = random_complex_vector(8, &mut rng);
        let mut ux = x.clone();
        let top = &u * x.rows(0, 4);
        let bottom = u.map(|z| z.conj()) * x.rows(4, 4);
        ux.rows_mut(0, 4).copy_from(&top);
        ux.rows_mut(4, 4).copy_from(&bottom);
        let lhs = &g * f.pi_matrix(&x) * g.adjoint();
        assert!(frobenius(&(lhs - f.pi_matrix(&ux))) < 1e-12);
    }

    #[test]
    fn twist_identities() {
        let f = FermiFock::new(3, 4096).unwrap();
        let th = f.theta_matrix();
        assert!(frobenius(&(&th * th.adjoint() - CMatrix::identity(8, 8))) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = random_complex_vector(6, &mut rng);
        let direct = &th * f.pi_matrix(&x) * th.adjoint();
        assert!(frobenius(&(direct - f.psi_matrix(&x))) < 1e-13);
        let mut e1 = CVector::zeros(6);
        e1[0] = ONE;
        let mut e2 = CVector::zeros(6);
        e2[1] = ONE;
        let psi = f.psi_matrix(&e1);
        let pi = f.pi_matrix(&e2);
        assert!(frobenius(&(&psi * &pi - &pi * &psi)) < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(FermiFock::new(13, 4096), Err(Error::CapExceeded { .. })));
    }
}
