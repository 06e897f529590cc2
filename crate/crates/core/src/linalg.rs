//! Dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Every norm and sum here walks the matrix in column-major order so that
//! results are bit-stable regardless of how callers schedule work.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative numerical-rank threshold.
pub const TAU_RANK: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Rank threshold `TAU_RANK * max(1, sigma_max)`.
pub fn rank_tol(sigma_max: f64) -> f64 {
    TAU_RANK * sigma_max.max(1.0)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn vec_norm(v: &CVector) -> f64 {
    let mut acc = 0.0;
    for x in v.iter() {
        acc += x.norm_sqr();
    }
    acc.sqrt()
}

/// `<x, y>`, conjugate-linear in the first slot.
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    let mut acc = ZERO;
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Thin singular value decomposition with singular values sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Svd {
            u: CMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        };
    }
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        dec.singular_values[b]
            .partial_cmp(&dec.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut su = CMatrix::zeros(rows, r);
    let mut sv = CMatrix::zeros(cols, r);
    let mut s = Vec::with_capacity(r);
    for (k, &j) in order.iter().enumerate() {
        su.set_column(k, &u.column(j));
        for i in 0..cols {
            sv[(i, k)] = v_t[(j, i)].conj();
        }
        s.push(dec.singular_values[j]);
    }
    Svd { u: su, s, v: sv }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Canonical orthonormal frame for the column span of an orthonormal `q`.
///
/// The result depends only on the subspace: columns come from pivoted
/// Gram-Schmidt on the projected coordinate vectors, largest residual first,
/// with the pivot coordinate of each column made real and positive.
pub fn canonical_frame(q: &CMatrix) -> CMatrix {
    let (n, k) = q.shape();
    if k == 0 {
        return CMatrix::zeros(n, 0);
    }
    let mut y = q.adjoint();
    let mut z = CMatrix::zeros(k, k);
    let mut pivots = Vec::with_capacity(k);
    for s in 0..k {
        let mut best = 0usize;
        let mut best_norm = -1.0;
        for j in 0..n {
            let mut nrm = 0.0;
            for l in 0..k {
                nrm += y[(l, j)].norm_sqr();
            }
            if nrm > best_norm * (1.0 + 1e-9) + 1e-300 {
                best = j;
                best_norm = nrm;
            }
        }
        let scale = best_norm.sqrt();
        let w: CVector = y.column(best) / C64::new(scale, 0.0);
        for j in 0..n {
            let mut proj = ZERO;
            for l in 0..k {
                proj += w[l].conj() * y[(l, j)];
            }
            for l in 0..k {
                let d = w[l] * proj;
                y[(l, j)] -= d;
            }
        }
        z.set_column(s, &w);
        pivots.push(best);
    }
    let mut frame = q * z;
    for (s, &p) in pivots.iter().enumerate() {
        let x = frame[(p, s)];
        if x.norm() > 0.0 {
            let phase = x.conj() / x.norm();
            for i in 0..n {
                frame[(i, s)] *= phase;
            }
        }
    }
    frame
}

/// Orthonormal frame of the right null space, `sigma <= tol`.
pub fn kernel_frame(a: &CMatrix, tol: f64) -> CMatrix {
    let (m, n) = a.shape();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m == 0 {
        return CMatrix::identity(n, n);
    }
    let padded = if m < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let dec = svd(&padded);
    let cols: Vec<usize> = (0..n).filter(|&j| dec.s[j] <= tol).collect();
    let mut raw = CMatrix::zeros(n, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        raw.set_column(k, &dec.v.column(j));
    }
    canonical_frame(&raw)
}

/// Kernel with the default relative threshold.
pub fn kernel_frame_default(a: &CMatrix) -> CMatrix {
    kernel_frame(a, rank_tol(op_norm(a)))
}

/// Canonical orthonormal frame for the column span of arbitrary vectors.
pub fn span_frame(vectors: &CMatrix, tol: Option<f64>) -> CMatrix {
    let n = vectors.nrows();
    if vectors.ncols() == 0 || n == 0 {
        return CMatrix::zeros(n, 0);
    }
    let dec = svd(vectors);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let t = tol.unwrap_or_else(|| rank_tol(smax));
    let cols: Vec<usize> = (0..dec.s.len()).filter(|&j| dec.s[j] > t).collect();
    let mut raw = CMatrix::zeros(n, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        raw.set_column(k, &dec.u.column(j));
    }
    canonical_frame(&raw)
}

/// Moore-Penrose pseudoinverse with singular values `<= tol` dropped.
pub fn pinv(a: &CMatrix, tol: f64) -> CMatrix {
    let (m, n) = a.shape();
    let dec = svd(a);
    let mut out = CMatrix::zeros(n, m);
    for (j, &s) in dec.s.iter().enumerate() {
        if s > tol {
            let vj = dec.v.column(j);
            let uj = dec.u.column(j);
            let inv = 1.0 / s;
            for c in 0..m {
                let uc = uj[c].conj() * inv;
                for r in 0..n {
                    out[(r, c)] += vj[r] * uc;
                }
            }
        }
    }
    out
}

pub fn pinv_default(a: &CMatrix) -> CMatrix {
    pinv(a, rank_tol(op_norm(a)))
}

/// Projector `F F*` for a frame `F`.
pub fn projector(frame: &CMatrix) -> CMatrix {
    frame * frame.adjoint()
}

/// `|F* F - 1|_F`.
pub fn orthonormality_defect(frame: &CMatrix) -> f64 {
    let k = frame.ncols();
    frobenius(&(frame.adjoint() * frame - CMatrix::identity(k, k)))
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let dec = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        dec.eigenvalues[a]
            .partial_cmp(&dec.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        vecs.set_column(k, &dec.eigenvectors.column(j));
        vals.push(dec.eigenvalues[j]);
    }
    (vals, vecs)
}

/// `exp(i H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let mut d = CMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        d[(k, k)] = C64::from_polar(1.0, l);
    }
    &vecs * d * vecs.adjoint()
}

/// Eigenvalues from the diagonal of the complex Schur form.
pub fn schur_eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn determinant(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().determinant()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let (q, r) = g.qr().unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar unitary rescaled to unit determinant.
pub fn haar_special_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(n, rng);
    let det = determinant(&u);
    let root = C64::from_polar(1.0, -det.arg() / n as f64);
    u * root
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_complex_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Binomial coefficient as `u64`; `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Strictly increasing `l`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if l > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..l).collect();
    loop {
        out.push(cur.clone());
        let mut i = l;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - l + i {
                cur[i] += 1;
                for j in i + 1..l {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Non-decreasing `l`-multisets of `0..n` in lexicographic order.
pub fn multisets(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        if l == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0usize; l];
    loop {
        out.push(cur.clone());
        let mut i = l;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - 1 {
                cur[i] += 1;
                for j in i + 1..l {
                    cur[j] = cur[i];
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex_matrix(5, 3, &mut rng);
        let d = svd(&a);
        let mut s = CMatrix::zeros(3, 3);
        for k in 0..3 {
            s[(k, k)] = C64::new(d.s[k], 0.0);
        }
        let back = &d.u * s * d.v.adjoint();
        assert!(frobenius(&(back - a)) < 1e-12);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn canonical_frame_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let raw = random_complex_matrix(6, 3, &mut rng);
        let q = span_frame(&raw, None);
        let rot = haar_unitary(3, &mut rng);
        let q2 = canonical_frame(&(&q * rot));
        assert!(frobenius(&(q - q2)) < 1e-10);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let mut a = CMatrix::zeros(1, 3);
        a[(0, 0)] = ONE;
        let k = kernel_frame_default(&a);
        assert_eq!(k.ncols(), 2);
        assert!(frobenius(&(&a * &k)) < 1e-12);
    }

    #[test]
    fn combinatorics() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(multisets(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn special_unitary_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_special_unitary(3, &mut rng);
        assert!((determinant(&u) - ONE).norm() < 1e-12);
        assert!(frobenius(&(u.adjoint() * &u - CMatrix::identity(3, 3))) < 1e-12);
    }
}
