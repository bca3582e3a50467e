//! Gaussian Wick moments and the ansatz observable built from the
//! free-convolution covariance forms.

use serde::{Deserialize, Serialize};

use crate::configspace::{matchings, Configuration, PerfectMatching};
use crate::error::{Error, Result};
use crate::spectral::{check_unit, FreeConvolutionProfile};

/// Unit test vectors `v_1, …, v_n` of a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TestVectors(Vec<Vec<f64>>);

impl TestVectors {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidArgument("test vectors must be nonempty and share a dimension".into()));
        }
        for v in &vectors {
            check_unit(v)?;
        }
        Ok(TestVectors(vectors))
    }

    /// Normalize each vector first; zero vectors are rejected.
    pub fn normalized(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let mut out = Vec::with_capacity(vectors.len());
        for v in vectors {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(n > 0.0) {
                return Err(Error::NonUnitVector(n));
            }
            out.push(v.into_iter().map(|x| x / n).collect());
        }
        Self::new(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0[0].len()
    }

    pub fn get(&self, a: usize) -> &[f64] {
        &self.0[a]
    }

    pub fn as_slice(&self) -> &[Vec<f64>] {
        &self.0
    }

    /// Relabel so that new vector `a` is old vector `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        TestVectors(perm.iter().map(|&p| self.0[p].clone()).collect())
    }
}

impl TryFrom<Vec<Vec<f64>>> for TestVectors {
    type Error = Error;

    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TestVectors> for Vec<Vec<f64>> {
    fn from(v: TestVectors) -> Self {
        v.0
    }
}

/// Bilinear forms `⟨v, Λ_i w⟩` indexed by eigenvalue position.
pub trait CovarianceForm {
    fn form(&self, i: usize, v: &[f64], w: &[f64]) -> Result<f64>;
}

/// `Λ_i = I` for every `i`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityCovariance;

impl CovarianceForm for IdentityCovariance {
    fn form(&self, _: usize, v: &[f64], w: &[f64]) -> Result<f64> {
        Ok(dot(v, w))
    }
}

impl CovarianceForm for FreeConvolutionProfile {
    fn form(&self, i: usize, v: &[f64], w: &[f64]) -> Result<f64> {
        self.covariance_form(i, v, w)
    }
}

fn dot(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

fn check_inputs(x: &Configuration, vectors: &TestVectors) -> Result<()> {
    if !x.is_even() {
        return Err(Error::OddConfiguration);
    }
    if x.len() != vectors.len() {
        return Err(Error::InvalidArgument(format!("{} particles but {} vectors", x.len(), vectors.len())));
    }
    Ok(())
}

/// `π(x)^{-1/2} Σ_{σ ∈ M_n ∩ Stab(x)} Π_{(a,σa)} ⟨v_a, v_σa⟩`.
pub fn gaussian_wick_moment(x: &Configuration, vectors: &TestVectors) -> Result<f64> {
    check_inputs(x, vectors)?;
    let total: f64 = matchings(x.len(), Some(x))
        .iter()
        .map(|m| m.pairs().map(|(a, b)| dot(vectors.get(a), vectors.get(b))).product::<f64>())
        .sum();
    Ok(total / x.sqrt_weight() as f64)
}

/// Pair product `Π_{(a,σa)} ⟨v_a, ½(Λ_{y_a} + Λ_{y_σa}) v_σa⟩` for one
/// matching, the coefficient of `χ_σ` in the ansatz.
pub fn ansatz_coefficient(
    sigma: &PerfectMatching,
    y: &Configuration,
    vectors: &TestVectors,
    cov: &impl CovarianceForm,
) -> Result<f64> {
    let mut prod = 1.0;
    for (a, b) in sigma.pairs() {
        let (va, vb) = (vectors.get(a), vectors.get(b));
        let left = cov.form(y[a], va, vb)?;
        let right = if y[a] == y[b] { left } else { cov.form(y[b], va, vb)? };
        prod *= 0.5 * (left + right);
    }
    Ok(prod)
}

/// Ansatz observable `F(x; y)` with signed pair products:
/// `π(x)^{-1/2} Σ_{σ ∈ M_n ∩ Stab(x)} Π_{(a,σa)} ⟨v_a, ½(Λ_{y_a} + Λ_{y_σa}) v_σa⟩`.
pub fn ansatz_f(x: &Configuration, y: &Configuration, vectors: &TestVectors, cov: &impl CovarianceForm) -> Result<f64> {
    check_inputs(x, vectors)?;
    if !y.is_even() || y.len() != x.len() {
        return Err(Error::InvalidArgument(format!("reference configuration {y} must be even with {} particles", x.len())));
    }
    let mut total = 0.0;
    for m in matchings(x.len(), Some(x)) {
        total += ansatz_coefficient(&m, y, vectors, cov)?;
    }
    Ok(total / x.sqrt_weight() as f64)
}
