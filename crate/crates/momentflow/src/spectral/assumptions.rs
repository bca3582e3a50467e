use serde::{Deserialize, Serialize};

use super::{green_form_raw, stieltjes_raw, SpectralDecomposition};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Energy window `[E0 − r, E0 + r]` with the scales used for regularity checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityWindow {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub r: f64,
    pub eta_star: f64,
    pub kappa: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl RegularityWindow {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidArgument(format!("kappa = {} outside (0,1)", self.kappa)));
        }
        if !(self.eta_star > 0.0 && self.eta_star <= self.r) {
            return Err(Error::InvalidArgument("need 0 < eta_star <= r".into()));
        }
        if self.eta_star < 1.0 / n as f64 {
            log::warn!("eta_star = {} is below 1/N", self.eta_star);
        }
        Ok(())
    }

    /// Truncated interval `[E0 − (1−κ) r, E0 + (1−κ) r]`.
    pub fn truncated(&self) -> (f64, f64) {
        let h = (1.0 - self.kappa) * self.r;
        (self.e0 - h, self.e0 + h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsReport {
    pub energies: usize,
    pub scales: usize,
    pub im_m_min: f64,
    pub im_m_max: f64,
    pub density_pass: bool,
    pub green_sup: f64,
    pub green_bound: f64,
    pub green_pass: bool,
}

impl AssumptionsReport {
    pub fn pass(&self) -> bool {
        self.density_pass && self.green_pass
    }
}

/// Grid points per axis.
const ENERGY_POINTS: usize = 41;
const SCALE_POINTS: usize = 21;

/// Scan `Im m_N` and `|⟨v, Im G w⟩|` over energies in the truncated window
/// and log-spaced `η ∈ [η*, 1]`. The density passes when `Im m_N` stays in
/// `[1/C, C]`; the forms pass when bounded by `C · N^{exponent}`.
pub fn verify_assumptions(
    dec: &SpectralDecomposition,
    window: &RegularityWindow,
    directions: &[Vec<f64>],
    exponent: f64,
) -> Result<AssumptionsReport> {
    window.validate(dec.size())?;
    let (lo, hi) = window.truncated();
    let overlaps: Vec<Vec<f64>> = directions.iter().map(|v| dec.overlaps(v)).collect();
    let top = 1.0f64.max(window.eta_star);
    let mut im_min = f64::INFINITY;
    let mut im_max = 0.0f64;
    let mut green_sup = 0.0f64;
    for a in 0..ENERGY_POINTS {
        let e = lo + (hi - lo) * a as f64 / (ENERGY_POINTS - 1) as f64;
        for b in 0..SCALE_POINTS {
            let eta = window.eta_star * (top / window.eta_star).powf(b as f64 / (SCALE_POINTS - 1) as f64);
            let z = Complex64::new(e, eta);
            let im = stieltjes_raw(&dec.eigenvalues, z).im;
            im_min = im_min.min(im);
            im_max = im_max.max(im);
            for ov in &overlaps {
                for ow in &overlaps {
                    let g = green_form_raw(&dec.eigenvalues, ov, ow, z).im.abs();
                    green_sup = green_sup.max(g);
                }
            }
        }
    }
    let green_bound = window.c * (dec.size() as f64).powf(exponent);
    Ok(AssumptionsReport {
        energies: ENERGY_POINTS,
        scales: SCALE_POINTS,
        im_m_min: im_min,
        im_m_max: im_max,
        density_pass: im_min >= 1.0 / window.c && im_max <= window.c,
        green_sup,
        green_bound,
        green_pass: green_sup <= green_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_goe;
    use crate::spectral::eig_sym;

    #[test]
    fn goe_bulk_is_regular() {
        let n = 500;
        let dec = eig_sym(&sample_goe(n, 21).unwrap()).unwrap();
        let window = RegularityWindow { e0: 0.0, r: 1.0, eta_star: (n as f64).powf(-0.9), kappa: 0.1, c: 4.0 };
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let rep = verify_assumptions(&dec, &window, &[e1], 0.0).unwrap();
        assert!(rep.density_pass, "{rep:?}");
        assert!(rep.green_sup <= 10.0, "{rep:?}");
    }

    #[test]
    fn atomic_spectrum_fails() {
        let dec = SpectralDecomposition::diagonal(&[0.0; 20]);
        let window = RegularityWindow { e0: 0.0, r: 1.0, eta_star: 1e-6, kappa: 0.1, c: 4.0 };
        let rep = verify_assumptions(&dec, &window, &[], 0.0).unwrap();
        assert!(!rep.density_pass);
        assert!(!rep.pass());
    }

    #[test]
    fn invalid_window() {
        let dec = SpectralDecomposition::diagonal(&[0.0; 4]);
        let window = RegularityWindow { e0: 0.0, r: 1.0, eta_star: 1e-3, kappa: 1.5, c: 4.0 };
        assert!(verify_assumptions(&dec, &window, &[], 0.0).is_err());
    }
}
