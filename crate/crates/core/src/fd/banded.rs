use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex band matrix in LAPACK `gb` layout with room for pivoting fill-in.
///
/// Column `c` occupies `ldab = 2kl + ku + 1` consecutive slots; entry `(r, c)`
/// sits at slot `kl + ku + r − c`. The top `kl` slots of each column are the
/// fill-in rows used by [`band_lu_factor`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandedComplexMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
}

impl BandedComplexMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            ab: vec![ZERO; n * (2 * kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn in_band(&self, r: usize, c: usize) -> bool {
        r < self.n && c < self.n && r <= c + self.kl && c <= r + self.ku
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        c * self.ldab() + self.kl + self.ku + r - c
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if self.in_band(r, c) {
            self.ab[self.slot(r, c)]
        } else {
            ZERO
        }
    }

    /// Panics when `(r, c)` lies outside the band.
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band kl={} ku={}", self.kl, self.ku);
        let s = self.slot(r, c);
        self.ab[s] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band kl={} ku={}", self.kl, self.ku);
        let s = self.slot(r, c);
        self.ab[s] += v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![ZERO; self.n];
        let ld = self.ldab();
        for (c, &xc) in x.iter().enumerate() {
            let r0 = c.saturating_sub(self.ku);
            let r1 = (c + self.kl).min(self.n - 1);
            let base = c * ld + self.kl + self.ku - c;
            for r in r0..=r1 {
                y[r] += self.ab[base + r] * xc;
            }
        }
        y
    }

    /// Dense copy, row-major. Intended for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c)).collect())
            .collect()
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            ab: self.ab.iter().map(|z| z.conj()).collect(),
            ..self.clone()
        }
    }
}

/// LU factors of `A − σI` with row interchanges, immutable once built.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandedComplexMatrix,
    ipiv: Vec<usize>,
    sigma: Complex64,
}

/// Factorizes `A − σI` by banded Gaussian elimination with partial pivoting.
pub fn band_lu_factor(a: &BandedComplexMatrix, sigma: Complex64) -> Result<BandLu> {
    let mut m = a.clone();
    let (n, kl, ku) = (m.n, m.kl, m.ku);
    let ld = m.ldab();
    let kv = kl + ku;
    for j in 0..n {
        let s = j * ld + kv;
        m.ab[s] -= sigma;
    }
    let mut ipiv = vec![0; n];
    // last column touched by U so far
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = j * ld + kv;
        let mut p = 0;
        let mut best = m.ab[col].norm_sqr();
        for i in 1..=km {
            let v = m.ab[col + i].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        ipiv[j] = j + p;
        if best == 0.0 || !best.is_finite() {
            return Err(Error::SingularShift { sigma, column: j });
        }
        ju = ju.max((j + ku + p).min(n - 1));
        if p != 0 {
            for c in j..=ju {
                let base = c * ld + kv - c;
                m.ab.swap(base + j, base + j + p);
            }
        }
        let inv = m.ab[col].inv();
        for i in 1..=km {
            m.ab[col + i] *= inv;
        }
        for c in j + 1..=ju {
            let base = c * ld + kv - c;
            let ujc = m.ab[base + j];
            if ujc == ZERO {
                continue;
            }
            for i in 1..=km {
                let l = m.ab[col + i];
                m.ab[base + j + i] -= l * ujc;
            }
        }
    }
    Ok(BandLu { m, ipiv, sigma })
}

impl BandLu {
    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.m.n
    }

    /// Solves `(A − σI)x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        assert_eq!(b.len(), n);
        let ld = self.m.ldab();
        let kv = kl + ku;
        let ab = &self.m.ab;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let col = j * ld + kv;
            for i in 1..=kl.min(n - 1 - j) {
                b[j + i] -= ab[col + i] * bj;
            }
        }
        for j in (0..n).rev() {
            let col = j * ld + kv;
            b[j] /= ab[col];
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            for i in 1..=kv.min(j) {
                b[j - i] -= ab[col - i] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    let t = a[k][j];
                    a[i][j] -= f * t;
                }
                let t = b[k];
                b[i] -= f * t;
            }
        }
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_solve_is_division() {
        let mut a = BandedComplexMatrix::zeros(3, 0, 0);
        for (i, v) in [c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.5)].into_iter().enumerate() {
            a.set(i, i, v);
        }
        let lu = band_lu_factor(&a, ZERO).unwrap();
        let mut b = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0)];
        let expect: Vec<_> = b.iter().enumerate().map(|(i, v)| v / a.get(i, i)).collect();
        lu.solve(&mut b);
        assert!(max_diff(&b, &expect) < 1e-15);
        assert_eq!(lu.m.get(1, 1), a.get(1, 1));
    }

    #[test]
    fn random_banded_against_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = 6;
            let kl = rng.gen_range(0..3);
            let ku = rng.gen_range(0..3);
            let mut a = BandedComplexMatrix::zeros(n, kl, ku);
            for r in 0..n {
                for cidx in 0..n {
                    if r <= cidx + kl && cidx <= r + ku {
                        a.set(r, cidx, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let sigma = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let b: Vec<_> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut dense = a.to_dense();
            for (i, row) in dense.iter_mut().enumerate() {
                row[i] -= sigma;
            }
            let x_ref = dense_solve(dense, b.clone());
            let lu = band_lu_factor(&a, sigma).unwrap();
            let mut x = b.clone();
            lu.solve(&mut x);
            let scale = x_ref.iter().map(|z| z.norm()).fold(1.0, f64::max);
            assert!(max_diff(&x, &x_ref) < 1e-12 * scale);
        }
    }

    #[test]
    fn backward_error_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, kl, ku) = (200, 5, 5);
        let mut a = BandedComplexMatrix::zeros(n, kl, ku);
        for r in 0..n {
            for cidx in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                if cidx + kl >= r {
                    a.set(r, cidx, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let sigma = c(0.3, -0.2);
        let b: Vec<_> = (0..n).map(|i| c((i as f64).sin(), 1.0)).collect();
        let lu = band_lu_factor(&a, sigma).unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        let ax = a.matvec(&x);
        let num: f64 = ax
            .iter()
            .zip(&x)
            .zip(&b)
            .map(|((ax, x), b)| (ax - sigma * x - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-12, "backward error {}", num / den);
    }

    #[test]
    fn parabola_from_discrete_laplacian() {
        let n = 99;
        let h = 2.0 / (n + 1) as f64;
        let mut a = BandedComplexMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, c(2.0 / (h * h), 0.0));
            if i > 0 {
                a.set(i, i - 1, c(-1.0 / (h * h), 0.0));
                a.set(i - 1, i, c(-1.0 / (h * h), 0.0));
            }
        }
        let lu = band_lu_factor(&a, ZERO).unwrap();
        let mut u = vec![c(1.0, 0.0); n];
        lu.solve(&mut u);
        for (i, ui) in u.iter().enumerate() {
            let x = -1.0 + (i + 1) as f64 * h;
            assert!((ui.re - (1.0 - x * x) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_eigenvalue_shift_is_singular() {
        let mut a = BandedComplexMatrix::zeros(3, 0, 0);
        for i in 0..3 {
            a.set(i, i, c((i + 1) as f64, 0.0));
        }
        match band_lu_factor(&a, c(2.0, 0.0)) {
            Err(Error::SingularShift { column, .. }) => assert_eq!(column, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
