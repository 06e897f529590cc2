use super::ModeFock;
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Symmetric Fock space over `n` modes with occupations `0..=cutoff` per mode.
///
/// Index of `|n_0, ..., n_{k-1}>` is `sum_i n_i (cutoff + 1)^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoseFock {
    modes: usize,
    cutoff: usize,
}

impl BoseFock {
    pub fn new(modes: usize, cutoff: usize, cap: usize) -> Result<Self> {
        let dim = (cutoff + 1)
            .checked_pow(modes as u32)
            .ok_or(Error::CapExceeded { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        Ok(Self { modes, cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn radix(&self) -> usize {
        self.cutoff + 1
    }

    fn stride(&self, i: usize) -> usize {
        self.radix().pow(i as u32)
    }

    pub fn occupation(&self, idx: usize, i: usize) -> usize {
        (idx / self.stride(i)) % self.radix()
    }

    pub fn total_occupation(&self, idx: usize) -> usize {
        (0..self.modes).map(|i| self.occupation(idx, i)).sum()
    }

    pub fn index_of(&self, occ: &[usize]) -> usize {
        occ.iter().enumerate().map(|(i, &n)| n * self.stride(i)).sum()
    }

    pub fn number_state(&self, occ: &[usize]) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.index_of(occ)] = crate::linalg::ONE;
        v
    }

    /// Coefficient of `|j, s-j>` in `Gamma(g)|k, s-k>` on a mode pair.
    fn sym_entry(g: &[[C64; 2]; 2], s: usize, j: usize, k: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let lo = j.saturating_sub(s - k);
        let hi = k.min(j);
        for p in lo..=hi {
            let q = j - p;
            let binom = binom_f(k, p) * binom_f(s - k, q);
            let term = g[0][0].powu(p as u32)
                * g[1][0].powu((k - p) as u32)
                * g[0][1].powu(q as u32)
                * g[1][1].powu((s - k - q) as u32);
            acc += term * binom;
        }
        let norm = (fact(j) * fact(s - j) / (fact(k) * fact(s - k))).sqrt();
        acc * norm
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

fn binom_f(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        fact(n) / (fact(k) * fact(n - k))
    }
}

impl ModeFock for BoseFock {
    fn modes(&self) -> usize {
        self.modes
    }

    fn dim(&self) -> usize {
        self.radix().pow(self.modes as u32)
    }

    fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = crate::linalg::ONE;
        v
    }

    fn add_create(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector) {
        let st = self.stride(i);
        for idx in 0..self.dim() {
            let n = self.occupation(idx, i);
            if n < self.cutoff && x[idx] != C64::new(0.0, 0.0) {
                out[idx + st] += coeff * x[idx] * ((n + 1) as f64).sqrt();
            }
        }
    }

    fn add_annihilate(&self, i: usize, coeff: C64, x: &CVector, out: &mut CVector) {
        let st = self.stride(i);
        for idx in 0..self.dim() {
            let n = self.occupation(idx, i);
            if n > 0 && x[idx] != C64::new(0.0, 0.0) {
                out[idx - st] += coeff * x[idx] * (n as f64).sqrt();
            }
        }
    }

    fn apply_diagonal(&self, d: &[C64], x: &mut CVector) {
        for idx in 0..self.dim() {
            let mut ph = C64::new(1.0, 0.0);
            for (i, di) in d.iter().enumerate() {
                ph *= di.powu(self.occupation(idx, i) as u32);
            }
            x[idx] *= ph;
        }
    }

    /// Exact on states whose pair occupation `n_p + n_{p+1}` is at most the cutoff.
    fn apply_two_mode(&self, p: usize, g: &[[C64; 2]; 2], x: &mut CVector) {
        let m = self.cutoff;
        let (sp, sq) = (self.stride(p), self.stride(p + 1));
        let blocks: Vec<Vec<Vec<C64>>> = (0..=2 * m)
            .map(|s| {
                let lo = s.saturating_sub(m);
                let hi = s.min(m);
                (lo..=hi)
                    .map(|j| (lo..=hi).map(|k| Self::sym_entry(g, s, j, k)).collect())
                    .collect()
            })
            .collect();
        for base in 0..self.dim() {
            if self.occupation(base, p) != 0 || self.occupation(base, p + 1) != 0 {
                continue;
            }
            for (s, block) in blocks.iter().enumerate() {
                let lo = s.saturating_sub(m);
                let hi = s.min(m);
                let idx: Vec<usize> = (lo..=hi).map(|k| base + k * sp + (s - k) * sq).collect();
                let old: Vec<C64> = idx.iter().map(|&i| x[i]).collect();
                for (a, &i) in idx.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (b, &o) in old.iter().enumerate() {
                        acc += block[a][b] * o;
                    }
                    x[i] = acc;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, haar_unitary, CMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ccr_below_cutoff() {
        let f = BoseFock::new(2, 4, 10_000).unwrap();
        let a0 = f.annihilate_matrix(0);
        let c0 = f.create_matrix(0);
        let c1 = f.create_matrix(1);
        let comm = &a0 * &c0 - &c0 * &a0;
        let cross = &a0 * &c1 - &c1 * &a0;
        for idx in 0..f.dim() {
            if (0..2).all(|i| f.occupation(idx, i) < 4) {
                let e = f.number_state(&[f.occupation(idx, 0), f.occupation(idx, 1)]);
                let r = &comm * &e - &e;
                assert!(crate::linalg::vec_norm(&r) < 1e-12);
                assert!(crate::linalg::vec_norm(&(&cross * &e)) < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_is_exact_below_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let f = BoseFock::new(3, 3, 10_000).unwrap();
        let u = haar_unitary(3, &mut rng);
        // Gamma(u) a*_i Gamma(u)* = sum_j u_ji a*_j on low-occupation states.
        let low: Vec<usize> = (0..f.dim()).filter(|&i| f.total_occupation(i) <= 2).collect();
        let g = f.gamma_matrix(&u);
        for i in 0..3 {
            let lhs = &g * f.create_matrix(i) * g.adjoint();
            let mut rhs = CMatrix::zeros(f.dim(), f.dim());
            for j in 0..3 {
                rhs += f.create_matrix(j) * u[(j, i)];
            }
            for &col in &low {
                let d = (lhs.column(col) - rhs.column(col)).norm();
                assert!(d < 1e-12, "mode {i} col {col}: {d}");
            }
        }
        let vac = f.vacuum();
        assert!(crate::linalg::vec_norm(&(&g * &vac - &vac)) < 1e-12);
        let sub: Vec<usize> = (0..f.dim()).filter(|&i| f.total_occupation(i) <= 3).collect();
        let gs = CMatrix::from_fn(sub.len(), sub.len(), |a, b| g[(sub[a], sub[b])]);
        assert!(frobenius(&(gs.adjoint() * &gs - CMatrix::identity(sub.len(), sub.len()))) < 1e-12);
    }
}
