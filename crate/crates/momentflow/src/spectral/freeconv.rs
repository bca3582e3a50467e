use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_unit, HalfPlanePoint, SpectralDecomposition};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub damping: f64,
    pub max_iterations: usize,
    /// Bisection width for classical locations.
    pub quantile_tolerance: f64,
    /// Smallest `Im m_fc` accepted by `covariance_form`.
    pub im_threshold: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-12,
            damping: 0.5,
            max_iterations: 10_000,
            quantile_tolerance: 1e-10,
            im_threshold: 1e-8,
        }
    }
}

/// Imaginary part used when a real-axis solve stalls.
const RESTART_ETA: f64 = 1e-8;

/// Free convolution of the spectrum of a reference matrix with a semicircle
/// of variance `t`. Fixed points are cached by `(E, η)`.
#[derive(Debug)]
pub struct FreeConvolutionProfile {
    reference: SpectralDecomposition,
    t: f64,
    settings: SolverSettings,
    cache: Mutex<HashMap<(u64, u64), Complex64>>,
    gamma: OnceLock<Vec<f64>>,
}

impl FreeConvolutionProfile {
    pub fn new(reference: SpectralDecomposition, t: f64) -> Result<Self> {
        Self::with_settings(reference, t, SolverSettings::default())
    }

    pub fn with_settings(reference: SpectralDecomposition, t: f64, settings: SolverSettings) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("free convolution needs t > 0, got {t}")));
        }
        Ok(FreeConvolutionProfile {
            reference,
            t,
            settings,
            cache: Mutex::new(HashMap::new()),
            gamma: OnceLock::new(),
        })
    }

    pub fn reference(&self) -> &SpectralDecomposition {
        &self.reference
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    fn size(&self) -> usize {
        self.reference.size()
    }

    /// `m_N(w)` and `m_N'(w)`.
    fn m_and_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut m = Complex64::new(0.0, 0.0);
        let mut dm = Complex64::new(0.0, 0.0);
        for &l in &self.reference.eigenvalues {
            let r = 1.0 / (l - w);
            m += r;
            dm += r * r;
        }
        let n = self.size() as f64;
        (m / n, dm / n)
    }

    /// `|m − m_N(z + t m)|`.
    pub fn residual(&self, z: Complex64, m: Complex64) -> f64 {
        (m - self.m_and_derivative(z + self.t * m).0).norm()
    }

    /// Fixed point of `m = m_N(z + t m)` in the closed upper half plane.
    ///
    /// Each step tries a Newton update and keeps it only if it stays in the
    /// upper half plane and lowers the residual; otherwise a damped update
    /// `m ← (1 − ω) m + ω m_N(z + t m)` is taken.
    fn solve(&self, z: Complex64, warm: Option<Complex64>) -> Result<Complex64> {
        let t = self.t;
        let s = &self.settings;
        let mut m = warm.unwrap_or_else(|| self.m_and_derivative(z + Complex64::new(0.0, t)).0);
        if m.im < 0.0 {
            m.im = 0.0;
        }
        let (mut g, mut dg) = self.m_and_derivative(z + t * m);
        let mut res = (m - g).norm();
        for _ in 0..s.max_iterations {
            if res <= s.tolerance {
                return Ok(m);
            }
            let newton = m - (m - g) / (1.0 - t * dg);
            let mut accepted = false;
            if newton.im >= 0.0 && newton.is_finite() {
                let (g2, dg2) = self.m_and_derivative(z + t * newton);
                let r2 = (newton - g2).norm();
                if r2 < res {
                    m = newton;
                    g = g2;
                    dg = dg2;
                    res = r2;
                    accepted = true;
                }
            }
            if !accepted {
                m = (1.0 - s.damping) * m + s.damping * g;
                let next = self.m_and_derivative(z + t * m);
                g = next.0;
                dg = next.1;
                res = (m - g).norm();
            }
        }
        if res <= s.tolerance {
            Ok(m)
        } else {
            Err(Error::NoConvergence { iterations: s.max_iterations, residual: res })
        }
    }

    fn solve_point(&self, z: HalfPlanePoint, warm: Option<Complex64>) -> Result<Complex64> {
        if !(z.eta >= 0.0) {
            return Err(Error::InvalidArgument(format!("eta = {} is negative", z.eta)));
        }
        let key = (z.e.to_bits(), z.eta.to_bits());
        if let Some(&m) = self.cache.lock().unwrap().get(&key) {
            return Ok(m);
        }
        let m = if z.eta == 0.0 { self.solve_real(z.e, warm)? } else { self.solve(z.z(), warm)? };
        self.cache.lock().unwrap().insert(key, m);
        Ok(m)
    }

    /// Real-axis fixed point. The equation also has real roots inside the
    /// support, so the solve is continued down from the upper half plane,
    /// where the root with `Im m > 0` is unique.
    fn solve_real(&self, e: f64, warm: Option<Complex64>) -> Result<Complex64> {
        let mut m = match warm.filter(|w| w.im > 0.0) {
            Some(w) => self.solve(Complex64::new(e, RESTART_ETA), Some(w)).ok(),
            None => None,
        };
        if m.map_or(true, |v| v.im <= 0.0) {
            let mut cur = None;
            for k in 0..=8 {
                cur = Some(self.solve(Complex64::new(e, 10f64.powi(-k)), cur)?);
            }
            m = cur;
        }
        let above = m.expect("ladder ran");
        match self.solve(Complex64::new(e, 0.0), Some(above)) {
            Ok(m0) if (m0 - above).norm() <= 1e-4 * (1.0 + above.norm()) => Ok(m0),
            Ok(_) | Err(_) => {
                log::debug!("real-axis solve at E = {e} left the upper branch; keeping eta = {RESTART_ETA}");
                Ok(above)
            }
        }
    }

    /// `m_fc,t(z)`.
    pub fn m(&self, z: HalfPlanePoint) -> Result<Complex64> {
        self.solve_point(z, None)
    }

    /// Cached fixed points with their `(E, η)`.
    pub fn cached(&self) -> Vec<(HalfPlanePoint, Complex64)> {
        let mut out: Vec<_> = self
            .cache
            .lock()
            .unwrap()
            .iter()
            .map(|(&(e, eta), &m)| (HalfPlanePoint::new(f64::from_bits(e), f64::from_bits(eta)), m))
            .collect();
        out.sort_by(|a, b| a.0.e.total_cmp(&b.0.e).then(a.0.eta.total_cmp(&b.0.eta)));
        out
    }

    /// Largest fixed-point residual over the cache.
    pub fn max_cached_residual(&self) -> f64 {
        self.cached().iter().map(|(z, m)| self.residual(z.z(), *m)).fold(0.0, f64::max)
    }

    /// Free convolution density `Im m_fc,t(E)/π` on the real axis.
    pub fn density(&self, e: f64) -> Result<f64> {
        Ok(self.m(HalfPlanePoint::new(e, 0.0))?.im / std::f64::consts::PI)
    }

    /// Distribution function `π⁻¹ ∫_{−∞}^{E} Im m_fc,t`.
    ///
    /// With `ω = E + t m` the subordination point, an antiderivative of
    /// `m_fc,t` is `−N⁻¹ Σ_k log(λ_k − ω) − (t/2) m_N(ω)²`; its imaginary part
    /// vanishes at `−∞`, so no quadrature is needed.
    pub fn cdf(&self, e: f64) -> Result<f64> {
        self.cdf_warm(e, None).map(|r| r.0)
    }

    fn cdf_warm(&self, e: f64, warm: Option<Complex64>) -> Result<(f64, Complex64)> {
        let m = self.solve_point(HalfPlanePoint::new(e, 0.0), warm)?;
        let omega = Complex64::new(e, 0.0) + self.t * m;
        // Keep the imaginary part a positive zero so real points left of an
        // eigenvalue get arg −π, the limit from the lower half plane.
        let im = omega.im.max(0.0);
        let mut args = 0.0;
        for &l in &self.reference.eigenvalues {
            args += (-im).atan2(l - omega.re);
        }
        let n = self.size() as f64;
        let mn = self.m_and_derivative(omega).0;
        let value = (-args / n - 0.5 * self.t * (mn * mn).im) / std::f64::consts::PI;
        Ok((value.clamp(0.0, 1.0), m))
    }

    /// Energy bracket containing the whole free convolution support.
    pub fn support_bracket(&self) -> (f64, f64) {
        let ev = &self.reference.eigenvalues;
        let r = 2.0 * self.t.sqrt() + 1.0;
        (ev[0] - r, ev[ev.len() - 1] + r)
    }

    /// Classical locations `γ_i(t)`, the `(i − 1/2)/N` quantiles, `i = 1..N`.
    pub fn classical_locations(&self) -> Result<&[f64]> {
        if let Some(g) = self.gamma.get() {
            return Ok(g);
        }
        let g = self.compute_locations()?;
        Ok(self.gamma.get_or_init(|| g))
    }

    fn compute_locations(&self) -> Result<Vec<f64>> {
        let n = self.size();
        let (lo, hi) = self.support_bracket();
        // Coarse sweep for brackets, warm-starting along the axis.
        let cells = 4 * n + 16;
        let mut grid = Vec::with_capacity(cells + 1);
        let mut warm = None;
        for k in 0..=cells {
            let e = lo + (hi - lo) * k as f64 / cells as f64;
            let (f, m) = self.cdf_warm(e, warm)?;
            warm = Some(m);
            grid.push((e, f, m));
        }
        if grid[0].1 > 1e-9 || grid[cells].1 < 1.0 - 1e-9 {
            return Err(Error::Integration(format!(
                "distribution function is {} and {} at the bracket ends",
                grid[0].1, grid[cells].1
            )));
        }
        let mut gamma = Vec::with_capacity(n);
        let mut cell = 0;
        for i in 0..n {
            let q = (i as f64 + 0.5) / n as f64;
            while cell + 1 < cells && grid[cell + 1].1 < q {
                cell += 1;
            }
            let (mut a, mut b) = (grid[cell].0, grid[cell + 1].0);
            let mut warm = grid[cell].2;
            while b - a > self.settings.quantile_tolerance {
                let mid = 0.5 * (a + b);
                let (f, m) = self.cdf_warm(mid, Some(warm))?;
                warm = m;
                if f >= q {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            gamma.push(b);
        }
        for k in 1..n {
            if gamma[k] < gamma[k - 1] {
                gamma[k] = gamma[k - 1];
            }
        }
        Ok(gamma)
    }

    /// `γ_i` for a 0-based index.
    pub fn classical_location(&self, i: usize) -> Result<f64> {
        Ok(self.classical_locations()?[i])
    }

    /// `⟨v, Im G(γ_i + t m_fc(γ_i)) w⟩ / Im m_fc(γ_i)` for a 0-based index `i`.
    pub fn covariance_form(&self, i: usize, v: &[f64], w: &[f64]) -> Result<f64> {
        check_unit(v)?;
        check_unit(w)?;
        let ov = self.reference.overlaps(v);
        let ow = self.reference.overlaps(w);
        self.covariance_form_overlaps(i, &ov, &ow)
    }

    /// As `covariance_form` with precomputed overlaps `⟨u_k, v⟩`, `⟨u_k, w⟩`.
    pub fn covariance_form_overlaps(&self, i: usize, ov: &[f64], ow: &[f64]) -> Result<f64> {
        let g = self.classical_location(i)?;
        let m = self.m(HalfPlanePoint::new(g, 0.0))?;
        if m.im <= self.settings.im_threshold {
            return Err(Error::OutsideRegularSpectrum(m.im));
        }
        let w = Complex64::new(g, 0.0) + self.t * m;
        let mut acc = 0.0;
        for (k, &l) in self.reference.eigenvalues.iter().enumerate() {
            acc += ov[k] * ow[k] * (1.0 / (l - w)).im;
        }
        Ok(acc / m.im)
    }
}
