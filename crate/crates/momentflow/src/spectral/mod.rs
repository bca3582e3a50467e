//! Eigendecompositions, resolvent quadratic forms and the free convolution
//! with the semicircle law.

mod assumptions;
mod freeconv;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::SymmetricMatrix;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

pub use assumptions::{verify_assumptions, AssumptionsReport, RegularityWindow};
pub use freeconv::{FreeConvolutionProfile, SolverSettings};

/// Tolerance on `‖v‖ − 1` for vectors entering quadratic forms.
pub const UNIT_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with an orthonormal frame whose columns are
/// the eigenvectors. Each column has its largest-magnitude entry positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub frame: Mat<f64>,
}

/// Point `E + iη` of the closed upper half plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    #[serde(rename = "E")]
    pub e: f64,
    pub eta: f64,
}

impl HalfPlanePoint {
    pub fn new(e: f64, eta: f64) -> Self {
        HalfPlanePoint { e, eta }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

/// Flip each column so its largest-magnitude coordinate is positive.
pub fn fix_signs(frame: &mut Mat<f64>) {
    for k in 0..frame.ncols() {
        let mut best = 0;
        for r in 1..frame.nrows() {
            if frame[(r, k)].abs() > frame[(best, k)].abs() {
                best = r;
            }
        }
        if frame[(best, k)] < 0.0 {
            for r in 0..frame.nrows() {
                frame[(r, k)] = -frame[(r, k)];
            }
        }
    }
}

pub fn eig_sym(h: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    if !h.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (eigenvalues, mut frame) = sym_eigen(&h.to_faer())?;
    fix_signs(&mut frame);
    Ok(SpectralDecomposition { eigenvalues, frame })
}

impl SpectralDecomposition {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Decomposition of `diag(values)` with the standard basis as frame.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let frame = Mat::from_fn(values.len(), values.len(), |r, c| if idx[c] == r { 1.0 } else { 0.0 });
        SpectralDecomposition { eigenvalues: idx.iter().map(|&k| values[k]).collect(), frame }
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.size()).map(|r| self.frame[(r, k)]).collect()
    }

    /// `⟨u_k, v⟩` for every `k`.
    pub fn overlaps(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            let col = self.frame.col(k);
            *o = (0..n).map(|r| col[r] * v[r]).sum();
        }
        out
    }

    /// `max |UᵀU − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.frame.transpose() * &self.frame;
        let mut worst = 0.0f64;
        for i in 0..self.size() {
            for j in 0..self.size() {
                worst = worst.max((g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// `max |UΛUᵀ − H|`.
    pub fn reconstruction_defect(&self, h: &SymmetricMatrix) -> f64 {
        let n = self.size();
        let scaled = Mat::from_fn(n, n, |r, c| self.frame[(r, c)] * self.eigenvalues[c]);
        let rec = &scaled * self.frame.transpose();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((rec[(i, j)] - h.get(i, j)).abs());
            }
        }
        worst
    }

    /// True when every documented invariant holds against the source matrix.
    pub fn satisfies_invariants(&self, h: &SymmetricMatrix) -> bool {
        self.eigenvalues.windows(2).all(|w| w[0] <= w[1])
            && self.orthogonality_defect() <= 1e-10
            && self.reconstruction_defect(h) <= 1e-8 * (1.0 + h.max_abs())
    }

    pub fn min_gap(&self) -> f64 {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `m_N(z) = N⁻¹ Σ_k 1/(λ_k − z)` for plain eigenvalues; no restriction on `z`.
pub fn stieltjes_raw(eigenvalues: &[f64], z: Complex64) -> Complex64 {
    let s: Complex64 = eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
    s / eigenvalues.len() as f64
}

pub fn stieltjes(dec: &SpectralDecomposition, z: HalfPlanePoint) -> Result<Complex64> {
    if !(z.eta > 0.0) {
        return Err(Error::BoundaryEvaluation);
    }
    Ok(stieltjes_raw(&dec.eigenvalues, z.z()))
}

pub fn check_unit(v: &[f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector(norm));
    }
    Ok(())
}

/// `⟨v, G(z) w⟩ = Σ_k ⟨v,u_k⟩⟨u_k,w⟩/(λ_k − z)`.
pub fn green_form(dec: &SpectralDecomposition, z: HalfPlanePoint, v: &[f64], w: &[f64]) -> Result<Complex64> {
    if !(z.eta > 0.0) {
        return Err(Error::BoundaryEvaluation);
    }
    check_unit(v)?;
    check_unit(w)?;
    Ok(green_form_raw(&dec.eigenvalues, &dec.overlaps(v), &dec.overlaps(w), z.z()))
}

pub(crate) fn green_form_raw(eigenvalues: &[f64], ov: &[f64], ow: &[f64], z: Complex64) -> Complex64 {
    eigenvalues.iter().zip(ov.iter().zip(ow)).map(|(&l, (&a, &b))| a * b / (l - z)).sum()
}
