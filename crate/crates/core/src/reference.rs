//! Slow, independent reference paths used to cross-check the fast ones.
//!
//! Nothing here is used on the production path: the self-test and the test
//! suites compare the parity-split tridiagonal solver against a dense Jacobi
//! diagonalization of the unsplit Hamiltonian, and the closed-form 2×2
//! fidelity against explicit matrix square roots.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::{LmgParams, SectorMatrix};

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn zeros(dim: usize) -> Self {
        DenseSymmetric {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn from_tridiagonal(m: &SectorMatrix) -> Self {
        let n = m.dim();
        let mut a = Self::zeros(n);
        for i in 0..n {
            a.set(i, i, m.diagonal[i]);
        }
        for (i, &e) in m.offdiagonal.iter().enumerate() {
            a.set(i, i + 1, e);
            a.set(i + 1, i, e);
        }
        a
    }
}

/// Full `(N+1)×(N+1)` pentadiagonal Hamiltonian in the basis `M = -S, ..., S`,
/// built from the textbook ladder elements without any parity splitting.
pub fn unsplit_hamiltonian(p: &LmgParams) -> DenseSymmetric {
    let n = p.n_spins as f64;
    let s = n / 2.0;
    let dim = p.n_spins as usize + 1;
    let ladder = |m: f64| math::sqrt(s * (s + 1.0) - m * (m + 1.0));
    let mut h = DenseSymmetric::zeros(dim);
    for i in 0..dim {
        let m = -s + i as f64;
        let diag = -(p.lambda / n) * (1.0 + p.gamma) * (s * (s + 1.0) - m * m - n / 2.0)
            - 2.0 * p.field * m;
        h.set(i, i, diag);
        if i + 2 < dim {
            // <M+2| S+² |M> = c(M) c(M+1)
            let v = -(p.lambda / (2.0 * n)) * (1.0 - p.gamma) * ladder(m) * ladder(m + 1.0);
            h.set(i, i + 2, v);
            h.set(i + 2, i, v);
        }
    }
    h
}

/// Eigenvalues (ascending) and column eigenvectors by cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &DenseSymmetric) -> (Vec<f64>, DenseSymmetric) {
    let n = a.dim;
    let mut a = a.clone();
    let mut v = DenseSymmetric::zeros(n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let total: f64 = a.data.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a.get(i, j) * a.get(i, j);
                }
            }
        }
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = DenseSymmetric::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, col, v.get(k, src));
        }
    }
    (values, vectors)
}

/// Full spectrum of a sector matrix via dense Jacobi.
pub fn tridiagonal_spectrum(m: &SectorMatrix) -> Vec<f64> {
    jacobi_eigen(&DenseSymmetric::from_tridiagonal(m)).0
}

/// Spectrum of the unsplit Hamiltonian.
pub fn unsplit_spectrum(p: &LmgParams) -> Vec<f64> {
    jacobi_eigen(&unsplit_hamiltonian(p)).0
}

/// Real symmetric 2×2 matrix `[[a, b], [b, d]]` as a plain array.
pub type Sym2 = [f64; 3];

fn sym2_eigen(m: Sym2) -> ([f64; 2], [[f64; 2]; 2]) {
    let [a, b, d] = m;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = math::sqrt(half * half + b * b);
    let vals = [mean - r, mean + r];
    if r == 0.0 {
        return (vals, [[1.0, 0.0], [0.0, 1.0]]);
    }
    // eigenvector for mean + r
    let (x, y) = if half >= 0.0 {
        (half + r, b)
    } else {
        (b, r - half)
    };
    let norm = math::sqrt(x * x + y * y);
    let (x, y) = (x / norm, y / norm);
    (vals, [[-y, x], [x, y]])
}

/// Principal square root of a positive semidefinite symmetric 2×2 matrix.
pub fn sym2_sqrt(m: Sym2) -> Sym2 {
    let (vals, vecs) = sym2_eigen(m);
    let mut out = [0.0; 3];
    for (lam, v) in vals.iter().zip(vecs.iter()) {
        let r = math::sqrt(lam.max(0.0));
        out[0] += r * v[0] * v[0];
        out[1] += r * v[0] * v[1];
        out[2] += r * v[1] * v[1];
    }
    out
}

/// `tr sqrt(A^{1/2} B A^{1/2})` computed through explicit eigendecompositions.
pub fn uhlmann_2x2(a: Sym2, b: Sym2) -> f64 {
    let ra = sym2_sqrt(a);
    // C = ra * B * ra, symmetric
    let mul = |x: Sym2, y: Sym2| -> [[f64; 2]; 2] {
        let xm = [[x[0], x[1]], [x[1], x[2]]];
        let ym = [[y[0], y[1]], [y[1], y[2]]];
        let mut z = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                z[i][j] = xm[i][0] * ym[0][j] + xm[i][1] * ym[1][j];
            }
        }
        z
    };
    let rb = mul(ra, b);
    let ram = [[ra[0], ra[1]], [ra[1], ra[2]]];
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = rb[i][0] * ram[0][j] + rb[i][1] * ram[1][j];
        }
    }
    let sym = [c[0][0], 0.5 * (c[0][1] + c[1][0]), c[1][1]];
    let rc = sym2_sqrt(sym);
    rc[0] + rc[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrix() {
        let mut a = DenseSymmetric::zeros(2);
        a.set(0, 0, 2.0);
        a.set(1, 1, -2.0);
        a.set(0, 1, -0.5);
        a.set(1, 0, -0.5);
        let (vals, _) = jacobi_eigen(&a);
        assert!((vals[0] + 4.25f64.sqrt()).abs() < 1e-14);
        assert!((vals[1] - 4.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sym2_sqrt_squares_back() {
        let m = [0.7, 0.2, 0.3];
        let r = sym2_sqrt(m);
        let sq = [r[0] * r[0] + r[1] * r[1], r[0] * r[1] + r[1] * r[2], r[1] * r[1] + r[2] * r[2]];
        for (x, y) in sq.iter().zip(m.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
