use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configspace::Configuration;
use crate::ensembles::{goe_with, sample, sample_with, EnsembleSpec, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::spectral::{check_unit, eig_sym, SpectralDecomposition};
use crate::stats::{Accumulator, Estimate};

/// Where the unperturbed matrix `H` of each trial comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMatrix {
    /// A fresh draw from the ensemble in every trial.
    #[default]
    Resample,
    /// One draw with the ensemble's own seed, shared by all trials.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MomentRequest {
    /// Eigenvector index carried by each particle (0-based).
    pub configuration: Configuration,
    /// One unit test vector per particle.
    pub vectors: Vec<Vec<f64>>,
    pub ensemble: EnsembleSpec,
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub base: BaseMatrix,
}

impl MomentRequest {
    pub fn validate(&self) -> Result<()> {
        let x = &self.configuration;
        if !x.is_even() {
            return Err(Error::OddConfiguration);
        }
        if self.vectors.len() != x.len() {
            return Err(Error::InvalidArgument(format!("{} vectors for {} particles", self.vectors.len(), x.len())));
        }
        for v in &self.vectors {
            if v.len() != self.ensemble.n {
                return Err(Error::InvalidArgument(format!("vector of length {} for N = {}", v.len(), self.ensemble.n)));
            }
            check_unit(v)?;
        }
        if x.iter().any(|&i| i >= self.ensemble.n) {
            return Err(Error::InvalidArgument(format!("configuration {x} has an index ≥ N")));
        }
        if !(self.t >= 0.0) || self.trials == 0 {
            return Err(Error::InvalidArgument("need t ≥ 0 and at least one trial".into()));
        }
        self.ensemble.validate()
    }
}

/// `π(x)^{-1/2} Π_a √N ⟨u_{x_a}, v_a⟩` for one decomposition.
pub fn moment_value(dec: &SpectralDecomposition, x: &Configuration, vectors: &[Vec<f64>]) -> f64 {
    let n = dec.size() as f64;
    let mut prod = 1.0 / x.sqrt_weight() as f64;
    for (a, &i) in x.iter().enumerate() {
        let col = dec.frame.col(i);
        let dot: f64 = vectors[a].iter().enumerate().map(|(r, v)| col[r] * v).sum();
        prod *= n.sqrt() * dot;
    }
    prod
}

/// Per-trial rescaled overlaps `√N ⟨u_i, v_k⟩` for a fixed set of
/// eigenvector indices and test vectors.
#[derive(Clone, Debug)]
pub struct OverlapSamples {
    indices: Vec<usize>,
    vectors: usize,
    rows: Vec<Vec<f64>>,
}

impl OverlapSamples {
    pub fn trials(&self) -> usize {
        self.rows.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `√N ⟨u_index, v_vector⟩` in one trial; `index` must be one of the
    /// sampled indices.
    pub fn get(&self, trial: usize, index: usize, vector: usize) -> f64 {
        let slot = self.indices.iter().position(|&i| i == index).expect("index was sampled");
        self.rows[trial][slot * self.vectors + vector]
    }

    /// Per-trial values of `π(x)^{-1/2} Π_a √N ⟨u_{x_a}, v_{assign[a]}⟩`.
    pub fn moment_values(&self, x: &Configuration, assign: &[usize]) -> Result<Vec<f64>> {
        if !x.is_even() {
            return Err(Error::OddConfiguration);
        }
        if assign.len() != x.len() || assign.iter().any(|&k| k >= self.vectors) {
            return Err(Error::InvalidArgument("vector assignment does not match the configuration".into()));
        }
        let slots: Vec<usize> = x
            .iter()
            .map(|i| self.indices.iter().position(|j| j == i))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument(format!("configuration {x} uses an index that was not sampled")))?;
        let norm = 1.0 / x.sqrt_weight() as f64;
        Ok(self
            .rows
            .iter()
            .map(|row| slots.iter().zip(assign).fold(norm, |p, (&s, &k)| p * row[s * self.vectors + k]))
            .collect())
    }

    pub fn moment(&self, x: &Configuration, assign: &[usize]) -> Result<Estimate> {
        Ok(summarize(&self.moment_values(x, assign)?))
    }
}

pub fn summarize(values: &[f64]) -> Estimate {
    let mut acc = Accumulator::default();
    values.iter().for_each(|&v| acc.push(v));
    acc.estimate()
}

/// Draw `trials` matrices `H + √t·GOE` and record the rescaled overlaps of
/// the requested eigenvectors with every test vector. Trial `k` uses its own
/// stream, so results do not depend on the thread count.
pub fn sample_overlaps(
    ensemble: &EnsembleSpec,
    base: BaseMatrix,
    t: f64,
    trials: usize,
    seed: u64,
    indices: &[usize],
    vectors: &[Vec<f64>],
) -> Result<OverlapSamples> {
    ensemble.validate()?;
    let n = ensemble.n;
    if indices.iter().any(|&i| i >= n) || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument("indices or vectors do not fit the matrix size".into()));
    }
    let fixed: Option<SymmetricMatrix> = match base {
        BaseMatrix::Fixed => Some(sample(ensemble)?),
        BaseMatrix::Resample => None,
    };
    let trial_seed = derive_seed(seed, ensemble.seed);
    let scale = (n as f64).sqrt();
    let rows = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let mut rng = stream(trial_seed, k as u64);
            let h = match &fixed {
                Some(h) => h.clone(),
                None => sample_with(ensemble, &mut rng)?,
            };
            let h = if t > 0.0 { h.add_scaled(t.sqrt(), &goe_with(n, &mut rng)) } else { h };
            let dec = eig_sym(&h)?;
            let mut row = Vec::with_capacity(indices.len() * vectors.len());
            for &i in indices {
                let col = dec.frame.col(i);
                for v in vectors {
                    row.push(scale * v.iter().enumerate().map(|(r, x)| col[r] * x).sum::<f64>());
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapSamples { indices: indices.to_vec(), vectors: vectors.len(), rows })
}

/// Per-trial values of the colored moment observable.
pub fn moment_samples(req: &MomentRequest) -> Result<Vec<f64>> {
    req.validate()?;
    let x = &req.configuration;
    let mut indices: Vec<usize> = x.to_vec();
    indices.sort_unstable();
    indices.dedup();
    let samples = sample_overlaps(&req.ensemble, req.base, req.t, req.trials, req.seed, &indices, &req.vectors)?;
    let assign: Vec<usize> = (0..x.len()).collect();
    samples.moment_values(x, &assign)
}

/// Monte Carlo mean and standard error of the colored moment observable.
pub fn estimate_moment(req: &MomentRequest) -> Result<Estimate> {
    Ok(summarize(&moment_samples(req)?))
}
