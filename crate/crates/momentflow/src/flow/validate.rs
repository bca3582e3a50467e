use serde::Serialize;

use super::moments::moment_value;
use super::see::{integrate_see_with, SeeOptions};
use crate::configspace::{assemble_generator, Configuration, ConfigurationSpace, GeneratorPart, PairCoefficients};
use crate::error::{Error, Result};
use crate::spectral::{check_unit, SpectralDecomposition};
use crate::stats::{chunked, Estimate};

/// Coefficients `c_ij = 1/(2N(λ_i − λ_j)²)` driving the moment flow. The
/// factor 2 matches the move part, which relocates an unordered pair at rate
/// `2c_ij`.
pub fn see_coefficients(eigenvalues: &[f64]) -> Result<PairCoefficients<f64>> {
    let n = eigenvalues.len();
    PairCoefficients::from_fn(n, |i, j| {
        let d = eigenvalues[i] - eigenvalues[j];
        1.0 / (2.0 * n as f64 * d * d)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorCheck {
    pub configuration: Configuration,
    /// `f_0(x)`.
    pub initial: f64,
    /// `(B_0 f_0)(x)` from the assembled generator.
    pub exact: f64,
    /// `(E f_δ(x) − f_0(x))/δ` over simulated paths.
    pub drift: Estimate,
}

impl GeneratorCheck {
    pub fn passes(&self, k: f64) -> bool {
        self.drift.within(self.exact, k)
    }
}

/// Compare the Monte Carlo time derivative of the moment observable along
/// SEE paths started at `dec0` with the generator applied at time 0.
///
/// `paths` counts simulated paths; they are run as antithetic pairs and the
/// pair mean is one sample.
pub fn validate_generator(
    dec0: &SpectralDecomposition,
    vectors: &[Vec<f64>],
    delta: f64,
    dt: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<GeneratorCheck>> {
    let n = dec0.size();
    for v in vectors {
        if v.len() != n {
            return Err(Error::InvalidArgument("test vector length differs from N".into()));
        }
        check_unit(v)?;
    }
    if !(delta > 0.0) || paths < 4 {
        return Err(Error::InvalidArgument("need δ > 0 and at least four paths".into()));
    }
    let space = ConfigurationSpace::enumerate(n, vectors.len())?;
    let f0: Vec<f64> = space.configs().iter().map(|x| moment_value(dec0, x, vectors)).collect();
    let b = assemble_generator(&space, &see_coefficients(&dec0.eigenvalues)?, GeneratorPart::Full)?;
    let exact = b.apply(&f0);
    let dim = space.len();
    let failure = std::sync::Mutex::new(None);
    let acc = chunked(seed, paths / 2, dim, |rng, count, acc| {
        for _ in 0..count {
            let mut twin = rng.clone();
            let plus = integrate_see_with(dec0, delta, dt, rng, SeeOptions { record_every: usize::MAX, antithetic: false });
            let minus =
                integrate_see_with(dec0, delta, dt, &mut twin, SeeOptions { record_every: usize::MAX, antithetic: true });
            let (plus, minus) = match (plus, minus) {
                (Ok(p), Ok(m)) => (p, m),
                (Err(e), _) | (_, Err(e)) => {
                    failure.lock().unwrap().get_or_insert(e.to_string());
                    return;
                }
            };
            let dp = SpectralDecomposition { eigenvalues: plus.last_eigenvalues().to_vec(), frame: plus.last_frame().clone() };
            let dm = SpectralDecomposition { eigenvalues: minus.last_eigenvalues().to_vec(), frame: minus.last_frame().clone() };
            for (k, x) in space.configs().iter().enumerate() {
                let mean = 0.5 * (moment_value(&dp, x, vectors) + moment_value(&dm, x, vectors));
                acc[k].push((mean - f0[k]) / delta);
            }
        }
    });
    if let Some(msg) = failure.into_inner().unwrap() {
        return Err(Error::Integration(msg));
    }
    Ok(space
        .configs()
        .iter()
        .enumerate()
        .map(|(k, x)| GeneratorCheck { configuration: x.clone(), initial: f0[k], exact: exact[k], drift: acc[k].estimate() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eig_sym;

    #[test]
    fn coefficients_scale_with_gap() {
        let c = see_coefficients(&[0.0, 1.0, 3.0]).unwrap();
        assert!((c.get(0, 1) - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.get(2, 0) - 1.0 / 54.0).abs() < 1e-15);
    }

    #[test]
    fn small_generator_check() {
        let h = crate::ensembles::SymmetricMatrix::diagonal(&[-1.0, 0.0, 1.0]);
        let dec = eig_sym(&h).unwrap();
        let v = vec![0.6, 0.0, 0.8];
        let checks = validate_generator(&dec, &[v.clone(), v], 1e-3, 1e-4, 4000, 7).unwrap();
        assert_eq!(checks.len(), 3);
        for c in &checks {
            assert!(c.passes(4.0), "{c:?}");
        }
    }
}
