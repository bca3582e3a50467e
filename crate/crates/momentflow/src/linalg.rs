//! Small dense helpers: exact elimination over [`Scalar`] and `f64` symmetric
//! eigensolves backed by faer.

use faer::{Mat, Side};

use crate::configspace::{ConfigurationSpace, WeightedOperator};
use crate::error::{Error, Result};
use crate::Scalar;

/// Indices of a maximal independent set of columns of a positive
/// semidefinite Gram matrix, found by an LDLᵀ sweep that skips null pivots.
pub fn ldl_pivots<S: Scalar>(gram: &[Vec<S>]) -> Vec<usize> {
    let n = gram.len();
    let scale = gram.iter().enumerate().map(|(k, r)| r[k].abs().as_f64()).fold(0.0, f64::max);
    let mut l: Vec<Vec<S>> = Vec::new();
    let mut d: Vec<S> = Vec::new();
    let mut keep = Vec::new();
    for k in 0..n {
        // Row k of L restricted to the kept pivots.
        let mut lk = Vec::with_capacity(keep.len());
        for (p, &j) in keep.iter().enumerate() {
            let mut v = gram[k][j];
            for q in 0..p {
                v = v - lk[q] * l[p][q] * d[q];
            }
            lk.push(v / d[p]);
        }
        let mut dk = gram[k][k];
        for (p, &lkp) in lk.iter().enumerate() {
            dk = dk - lkp * lkp * d[p];
        }
        if !dk.negligible(scale) {
            keep.push(k);
            l.push(lk);
            d.push(dk);
        }
    }
    keep
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse<S: Scalar>(a: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let scale = a.iter().flatten().map(|v| v.abs().as_f64()).fold(0.0, f64::max);
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].negligible(scale) {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        for j in 0..n {
            m[col][j] = m[col][j] / p;
            inv[col][j] = inv[col][j] / p;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col];
            for j in 0..n {
                m[i][j] = m[i][j] - f * m[col][j];
                inv[i][j] = inv[i][j] - f * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// `Π^{1/2} A Π^{−1/2}`, symmetric whenever `A` is π-self-adjoint.
pub fn symmetrize(space: &ConfigurationSpace, op: &WeightedOperator<f64>) -> Mat<f64> {
    let r: Vec<f64> = space.weights().iter().map(|&w| (w as f64).sqrt()).collect();
    let n = op.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for x in 0..n {
        for &(y, a) in op.row(x) {
            m[(x, y)] = r[x] * a / r[y];
        }
    }
    // Average the two triangles to remove rounding asymmetry.
    for x in 0..n {
        for y in 0..x {
            let v = 0.5 * (m[(x, y)] + m[(y, x)]);
            m[(x, y)] = v;
            m[(y, x)] = v;
        }
    }
    m
}

/// Spectral form of a π-reversible operator, used for exact exponentials.
#[derive(Clone, Debug)]
pub struct SymmetrizedSpectrum {
    pub sqrt_pi: Vec<f64>,
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymmetrizedSpectrum {
    pub fn new(space: &ConfigurationSpace, op: &WeightedOperator<f64>) -> Result<Self> {
        let (values, vectors) = sym_eigen(&symmetrize(space, op))?;
        let sqrt_pi = space.weights().iter().map(|&w| (w as f64).sqrt()).collect();
        Ok(SymmetrizedSpectrum { sqrt_pi, values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `e^{sA}` in the function representation, as a dense matrix.
    pub fn exp(&self, s: f64) -> Mat<f64> {
        let n = self.dim();
        let q = &self.vectors;
        let mut scaled = q.to_owned();
        for k in 0..n {
            let e = (s * self.values[k]).exp();
            for r in 0..n {
                scaled[(r, k)] *= e;
            }
        }
        let mut m = &scaled * q.transpose();
        for x in 0..n {
            for y in 0..n {
                m[(x, y)] *= self.sqrt_pi[y] / self.sqrt_pi[x];
            }
        }
        m
    }

    /// `e^{sA} f` without forming the matrix.
    pub fn apply_exp(&self, s: f64, f: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let g: Vec<f64> = (0..n).map(|x| f[x] * self.sqrt_pi[x]).collect();
        let mut coeff = vec![0.0; n];
        for (k, c) in coeff.iter_mut().enumerate() {
            let d: f64 = (0..n).map(|x| self.vectors[(x, k)] * g[x]).sum();
            *c = d * (s * self.values[k]).exp();
        }
        (0..n)
            .map(|x| (0..n).map(|k| self.vectors[(x, k)] * coeff[k]).sum::<f64>() / self.sqrt_pi[x])
            .collect()
    }
}


pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn ldl_finds_rank() {
        let q = |v: i64| Q::from_integer(v);
        // Third column = first + second.
        let g = vec![vec![q(2), q(1), q(3)], vec![q(1), q(2), q(3)], vec![q(3), q(3), q(6)]];
        assert_eq!(ldl_pivots(&g), vec![0, 1]);
    }

    #[test]
    fn gauss_jordan_exact_inverse() {
        let q = |v: i64| Q::from_integer(v);
        let a = vec![vec![q(0), q(2)], vec![q(3), q(1)]];
        let inv = gauss_jordan_inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![Q::new(-1, 6), Q::new(1, 3)], vec![Q::new(1, 2), q(0)]]);
        assert!(gauss_jordan_inverse(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }

    #[test]
    fn eigen_of_swap_matrix() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
        let (vals, _) = sym_eigen(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }
}
