//! Named constructors for the structured examples.

use rand::Rng;

use crate::linalg::{self, c, CMatrix, C64, ONE};
use crate::selfdual::{BlockOperator, SelfDualSpace};

pub fn identity(n1: usize) -> BlockOperator {
    BlockOperator::identity(SelfDualSpace::new(n1))
}

/// `e_j -> e_{j+steps}` and `e_j* -> e_{j+steps}*` for each of `species` copies.
///
/// Mode `j` of species `s` sits at `K1` coordinate `s * n + j`.
pub fn shift(n1_domain: usize, steps: usize, species: usize) -> BlockOperator {
    let nd = n1_domain * species;
    let nc_per = n1_domain + steps;
    let nc = nc_per * species;
    let d = SelfDualSpace::new(nd);
    let cd = SelfDualSpace::new(nc);
    let mut m = CMatrix::zeros(cd.dim(), d.dim());
    for s in 0..species {
        for j in 0..n1_domain {
            let src = s * n1_domain + j;
            let dst = s * nc_per + j + steps;
            m[(cd.particle(dst), d.particle(src))] = ONE;
            m[(cd.antiparticle(dst), d.antiparticle(src))] = ONE;
        }
    }
    BlockOperator::new(d, cd, m).expect("shift shape")
}

/// Swaps `e_i` and `e_i*` for every listed mode.
pub fn flip(n1: usize, modes: &[usize]) -> BlockOperator {
    let s = SelfDualSpace::new(n1);
    let mut m = CMatrix::identity(s.dim(), s.dim());
    for &i in modes {
        let (p, a) = (s.particle(i), s.antiparticle(i));
        m[(p, p)] = linalg::ZERO;
        m[(a, a)] = linalg::ZERO;
        m[(a, p)] = ONE;
        m[(p, a)] = ONE;
    }
    BlockOperator::square(s, m).expect("flip shape")
}

/// Two-mode Bogoliubov rotation mixing `e_1` with `e_2*`.
pub fn bogoliubov(theta: f64) -> BlockOperator {
    let s = SelfDualSpace::new(2);
    let (co, si) = (theta.cos(), theta.sin());
    let mut m = CMatrix::zeros(4, 4);
    let (e1, e2, e1s, e2s) = (0, 1, 2, 3);
    m[(e1, e1)] = c(co, 0.0);
    m[(e2s, e1)] = c(si, 0.0);
    m[(e2, e2)] = c(co, 0.0);
    m[(e1s, e2)] = c(-si, 0.0);
    m[(e1s, e1s)] = c(co, 0.0);
    m[(e2, e1s)] = c(si, 0.0);
    m[(e2s, e2s)] = c(co, 0.0);
    m[(e1, e2s)] = c(-si, 0.0);
    BlockOperator::square(s, m).expect("bogoliubov shape")
}

/// Bosonic squeeze: single-mode (`e_1` with `e_1*`) or two-mode (`e_1` with `e_2*`).
pub fn squeeze(r: f64, two_mode: bool) -> BlockOperator {
    let (ch, sh) = (c(r.cosh(), 0.0), c(r.sinh(), 0.0));
    if two_mode {
        let s = SelfDualSpace::new(2);
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..2 {
            let other = 1 - i;
            m[(s.particle(i), s.particle(i))] = ch;
            m[(s.antiparticle(other), s.particle(i))] = sh;
            m[(s.antiparticle(i), s.antiparticle(i))] = ch;
            m[(s.particle(other), s.antiparticle(i))] = sh;
        }
        BlockOperator::square(s, m).expect("squeeze shape")
    } else {
        let s = SelfDualSpace::new(1);
        let m = CMatrix::from_row_slice(2, 2, &[ch, sh, sh, ch]);
        BlockOperator::square(s, m).expect("squeeze shape")
    }
}

/// Charged field on the Fourier window shifted by one mode, `z^n -> z^{n+1}`.
#[derive(Clone, Debug)]
pub struct SeaShift {
    pub v: BlockOperator,
    pub charges_domain: Vec<i32>,
    pub charges_codomain: Vec<i32>,
}

/// Domain window `[-w, w]`, codomain window `[-w+1, w+1]`.
///
/// `K1` holds `e_n` for `n >= 0` (charge +1) followed by the conjugates of
/// `e_n` for `n < 0` (charge -1).
pub fn sea_shift(w: usize) -> SeaShift {
    assert!(w >= 1, "sea shift needs w >= 1");
    let w = w as i64;
    let n1 = (2 * w + 1) as usize;
    let s = SelfDualSpace::new(n1);
    let dom_pos = |n: i64| n as usize;
    let dom_neg = |n: i64| (w + 1 + (-n - 1)) as usize;
    let cod_pos = |n: i64| n as usize;
    let cod_neg = |n: i64| (w + 2 + (-n - 1)) as usize;
    // Each one-particle mode e_n maps to e_{n+1}; the K1 label depends on the sign of n.
    let k_coord = |n: i64, pos: &dyn Fn(i64) -> usize, neg: &dyn Fn(i64) -> usize| -> (usize, bool) {
        if n >= 0 {
            (pos(n), true)
        } else {
            (neg(n), false)
        }
    };
    let mut m = CMatrix::zeros(s.dim(), s.dim());
    for n in -w..=w {
        let (src, src_particle) = k_coord(n, &dom_pos, &dom_neg);
        let (dst, dst_particle) = k_coord(n + 1, &cod_pos, &cod_neg);
        // e_n is a K1 vector iff n >= 0; its conjugate lives in the other half.
        let src_e = if src_particle {
            s.particle(src)
        } else {
            s.antiparticle(src)
        };
        let dst_e = if dst_particle {
            s.particle(dst)
        } else {
            s.antiparticle(dst)
        };
        let src_bar = if src_particle {
            s.antiparticle(src)
        } else {
            s.particle(src)
        };
        let dst_bar = if dst_particle {
            s.antiparticle(dst)
        } else {
            s.particle(dst)
        };
        m[(dst_e, src_e)] = ONE;
        m[(dst_bar, src_bar)] = ONE;
    }
    let mut qd = vec![1; (w + 1) as usize];
    qd.extend(std::iter::repeat_n(-1, w as usize));
    let mut qc = vec![1; (w + 2) as usize];
    qc.extend(std::iter::repeat_n(-1, (w - 1) as usize));
    SeaShift {
        v: BlockOperator::square(s, m).expect("sea shift shape"),
        charges_domain: qd,
        charges_codomain: qc,
    }
}

/// Mode permutation inside `K1` (and correspondingly in `K2`).
pub fn permutation(perm: &[usize]) -> BlockOperator {
    let s = SelfDualSpace::new(perm.len());
    let mut m = CMatrix::zeros(s.dim(), s.dim());
    for (j, &i) in perm.iter().enumerate() {
        m[(s.particle(i), s.particle(j))] = ONE;
        m[(s.antiparticle(i), s.antiparticle(j))] = ONE;
    }
    BlockOperator::square(s, m).expect("permutation shape")
}

/// Random real CAR unitary `exp(iH)` with `conj(H) = -H`.
pub fn random_car_unitary<R: Rng + ?Sized>(n1: usize, scale: f64, rng: &mut R) -> BlockOperator {
    let s = SelfDualSpace::new(n1);
    let g = linalg::random_complex_matrix(s.dim(), s.dim(), rng);
    let h0 = (&g + g.adjoint()) * c(0.5 * scale, 0.0);
    let h0op = BlockOperator::square(s, h0.clone()).unwrap();
    let h = (h0 - h0op.conjugate().into_entries()) * c(0.5, 0.0);
    BlockOperator::square(s, linalg::expi_hermitian(&h)).unwrap()
}

/// Random CCR member `exp(i C H)` with `conj(H) = H`.
pub fn random_ccr_unitary<R: Rng + ?Sized>(n1: usize, scale: f64, rng: &mut R) -> BlockOperator {
    let s = SelfDualSpace::new(n1);
    let g = linalg::random_complex_matrix(s.dim(), s.dim(), rng);
    let h0 = (&g + g.adjoint()) * c(0.5 * scale, 0.0);
    let h0op = BlockOperator::square(s, h0.clone()).unwrap();
    let h = (h0 + h0op.conjugate().into_entries()) * c(0.5, 0.0);
    let cm = (&s.p1() - &s.p2()).into_entries();
    let x = cm * h * C64::new(0.0, 1.0);
    BlockOperator::square(s, x.exp()).unwrap()
}

/// `u_cod * shift * u_dom`, a random rectangular CAR member.
pub fn random_car_isometry<R: Rng + ?Sized>(n1_domain: usize, steps: usize, rng: &mut R) -> BlockOperator {
    let sh = shift(n1_domain, steps, 1);
    let ud = random_car_unitary(n1_domain, 1.0, rng);
    let uc = random_car_unitary(n1_domain + steps, 1.0, rng);
    &(&uc * &sh) * &ud
}

/// `u_cod * shift * u_dom` with CCR members.
pub fn random_ccr_isometry<R: Rng + ?Sized>(n1_domain: usize, steps: usize, scale: f64, rng: &mut R) -> BlockOperator {
    let sh = shift(n1_domain, steps, 1);
    let ud = random_ccr_unitary(n1_domain, scale, rng);
    let uc = random_ccr_unitary(n1_domain + steps, scale, rng);
    &(&uc * &sh) * &ud
}
