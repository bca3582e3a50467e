use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ensembles::{EnsembleSpec, EntryLaw};
use crate::error::{Error, Result};
use crate::flow::BaseMatrix;
use crate::spectral::RegularityWindow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Assumptions,
    GeneratorValidate,
    OperatorSuite,
    Mixing,
    Fsp,
    JointNormality,
    AnsatzCompare,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Assumptions,
        ExperimentKind::GeneratorValidate,
        ExperimentKind::OperatorSuite,
        ExperimentKind::Mixing,
        ExperimentKind::Fsp,
        ExperimentKind::JointNormality,
        ExperimentKind::AnsatzCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Assumptions => "assumptions",
            ExperimentKind::GeneratorValidate => "generator-validate",
            ExperimentKind::OperatorSuite => "operator-suite",
            ExperimentKind::Mixing => "mixing",
            ExperimentKind::Fsp => "fsp",
            ExperimentKind::JointNormality => "joint-normality",
            ExperimentKind::AnsatzCompare => "ansatz-compare",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Length and time scales of the mixing argument, from `N`, `t`, `n` and the
/// exponent `ω_d`:
/// `K = N^{1−ω_d} t`, `T₂ = (K/N)(K/(N^{1+ω_d} t))^{1/(n+2)}`,
/// `ℓ₂ = √(K N T₂)`, `ℓ₁ = K^{3/4}`, `T₁ = √K/N`, `t₀ = t − T₂ − T₁`,
/// `t₁ = t − T₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Scales {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    pub ell2: f64,
    pub ell1: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    pub t0_time: f64,
    pub t1_time: f64,
}

impl Scales {
    pub fn derive(n_sites: usize, t: f64, particles: usize, omega_d: f64) -> Self {
        let nf = n_sites as f64;
        let k = nf.powf(1.0 - omega_d) * t;
        let t2 = k / nf * (k / (nf.powf(1.0 + omega_d) * t)).powf(1.0 / (particles as f64 + 2.0));
        let ell2 = (k * nf * t2).sqrt();
        let ell1 = k.powf(0.75);
        let t1 = k.sqrt() / nf;
        Scales { k, t2, ell2, ell1, t1, t0_time: t - t2 - t1, t1_time: t - t2 }
    }
}

/// Fully resolved experiment description. Missing JSON fields take the
/// defaults of the experiment kind, so the echoed config records every value
/// that was used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub ensemble: EnsembleSpec,
    pub base: BaseMatrix,
    /// Gaussian perturbation time `t`.
    pub t: f64,
    pub window: RegularityWindow,
    /// Exponent in the bound `C·N^{exponent}` on resolvent forms.
    pub exponent: f64,
    /// Number of sites `N` of the configuration space.
    pub sites: usize,
    /// Number of particles `n`.
    pub particles: usize,
    /// Decay rate declared for `c_ij = υ|i − j|^{-2}`.
    pub upsilon: f64,
    /// Length scales `ℓ` (Poincaré scan, cutoff scale for the profile).
    pub ells: Vec<usize>,
    /// Sites of the Poincaré scan, which runs with two particles.
    pub poincare_sites: usize,
    /// Reference configuration `y`; the center of the space when absent.
    pub reference: Option<Vec<usize>>,
    /// Time grid for propagator curves.
    pub s_grid: Vec<f64>,
    /// Fit range for the log-log slope.
    pub slope_range: (f64, f64),
    pub slope_bound: f64,
    /// Random functions / schedules drawn by sampling checks.
    pub samples: usize,
    pub trials: usize,
    pub paths: usize,
    pub delta: f64,
    pub dt: f64,
    /// Eigenvalues of the initial matrix for generator validation; its
    /// eigenvectors are Haar distributed.
    pub spectrum: Vec<f64>,
    /// Test vectors for generator validation; random unit vectors when absent.
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Project test vectors orthogonal to the all-ones vector; automatic for
    /// sparse graph ensembles when absent.
    pub project_ones: Option<bool>,
    /// Number of random orthonormal test vector pairs.
    pub pairs: usize,
    /// Eigenvector index probed by moment checks; `N/2` when absent.
    pub index: Option<usize>,
    /// Standard errors allowed in Monte Carlo checks.
    pub stderr_multiple: f64,
    /// Relative tolerance on the fourth moment.
    pub fourth_moment_rtol: f64,
    pub omega_d: f64,
    pub omega_c: f64,
    /// Check the scale chain `η* N^{ω_c} < t < r N^{−ω_c}`.
    pub scale_chain: bool,
    /// Derived from `(N, t, n, ω_d)` when absent.
    pub scales: Option<Scales>,
    /// Bound on the sampled Nash ratio.
    pub nash_bound: f64,
    /// Threshold for finite-speed tails beyond `4ℓ`.
    pub fsp_threshold: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            kind,
            seed: 0,
            ensemble: EnsembleSpec::goe(200, 0),
            base: BaseMatrix::Resample,
            t: 0.0,
            window: RegularityWindow { e0: 0.0, r: 1.0, eta_star: 200f64.powf(-0.9), kappa: 0.1, c: 4.0 },
            exponent: 0.0,
            sites: 8,
            particles: 4,
            upsilon: 1.0,
            ells: vec![8, 16, 32, 64],
            poincare_sites: 160,
            reference: None,
            s_grid: (0..=10).map(|k| 0.05 * k as f64).collect(),
            slope_range: (0.2, 0.5),
            slope_bound: -0.7,
            samples: 100,
            trials: 10_000,
            paths: 100_000,
            delta: 1e-3,
            dt: 1e-4,
            spectrum: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            vectors: None,
            project_ones: None,
            pairs: 5,
            index: None,
            stderr_multiple: 3.0,
            fourth_moment_rtol: 0.1,
            omega_d: 0.2,
            omega_c: 0.05,
            scale_chain: false,
            scales: None,
            nash_bound: 10.0,
            fsp_threshold: 1e-6,
            out: None,
        };
        match kind {
            ExperimentKind::Assumptions => {
                c.ensemble = EnsembleSpec::goe(500, 0);
                c.window.eta_star = 500f64.powf(-0.9);
                c.t = 0.1;
                c.pairs = 3;
                c.scale_chain = true;
            }
            ExperimentKind::GeneratorValidate => {
                c.sites = 5;
                c.particles = 2;
            }
            ExperimentKind::OperatorSuite => {}
            ExperimentKind::Mixing => {
                c.sites = 10;
                c.t = 0.5;
                c.s_grid = (4..=10).map(|k| 0.05 * k as f64).collect();
                c.ensemble = EnsembleSpec::goe(40, 0);
            }
            ExperimentKind::Fsp => {
                c.sites = 40;
                c.particles = 2;
                c.ells = vec![4];
            }
            ExperimentKind::JointNormality => {
                c.ensemble = EnsembleSpec { entry_law: EntryLaw::Bernoulli, ..EnsembleSpec::flat_wigner(200, 0) };
            }
            ExperimentKind::AnsatzCompare => {
                c.sites = 6;
                c.ensemble = EnsembleSpec::goe(6, 0);
                c.t = 1.0;
            }
        }
        c
    }

    /// Overlay a (possibly partial) JSON object on the defaults of its kind.
    /// `kind` fills in a missing `kind` field and must agree with a present one.
    pub fn from_json(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let overlay: Value = serde_json::from_str(text)?;
        let Value::Object(fields) = overlay else {
            return Err(Error::InvalidArgument("config must be a JSON object".into()));
        };
        let declared: Option<ExperimentKind> = match fields.get("kind") {
            Some(v) => Some(serde_json::from_value(v.clone())?),
            None => None,
        };
        let kind = match (declared, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidArgument(format!("config kind {a} does not match requested {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::InvalidArgument("config has no kind".into())),
        };
        let mut base = serde_json::to_value(Self::defaults(kind))?;
        if let Value::Object(map) = &mut base {
            for (k, v) in fields {
                map.insert(k, v);
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 || self.particles % 2 != 0 {
            return Err(Error::InvalidArgument(format!("particle count {} must be even and positive", self.particles)));
        }
        if self.sites < 2 {
            return Err(Error::InvalidArgument("need at least two sites".into()));
        }
        if !(self.t >= 0.0) || !(self.upsilon > 0.0) || !(self.stderr_multiple > 0.0) {
            return Err(Error::InvalidArgument("need t ≥ 0, υ > 0 and a positive stderr multiple".into()));
        }
        if let Some(y) = &self.reference {
            if y.iter().any(|&i| i >= self.sites) {
                return Err(Error::InvalidArgument("reference configuration leaves the sites".into()));
            }
        }
        self.ensemble.validate()
    }

    pub fn scales(&self) -> Scales {
        self.scales.unwrap_or_else(|| Scales::derive(self.ensemble.n, self.t, self.particles, self.omega_d))
    }

    /// All particles on the middle site unless a reference was given.
    pub fn reference_or_center(&self, sites: usize, particles: usize) -> Vec<usize> {
        match &self.reference {
            Some(y) if y.len() == particles && y.iter().all(|&i| i < sites) => y.clone(),
            _ => vec![sites / 2; particles],
        }
    }
}
