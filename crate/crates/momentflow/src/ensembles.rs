//! Random symmetric matrix ensembles.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Rng};

/// Dense real symmetric matrix. Only the upper triangle is ever drawn; the
/// lower triangle is a mirror, so symmetry is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix { n, data: vec![0.0; n * n] }
    }

    /// Fill from `f(i, j)` for `i ≤ j` and mirror.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymmetricMatrix { n, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.n, other.n);
        SymmetricMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect() }
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Goe,
    GeneralizedWigner,
    ErdosRenyi,
    PRegular,
    Levy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryLaw {
    #[default]
    Bernoulli,
    Gaussian,
}

/// Default bound `C` in `C⁻¹ ≤ Nσ²_ij ≤ C`.
pub const DEFAULT_PROFILE_BOUND: f64 = 10.0;
/// Restarts allowed when drawing a random regular graph.
pub const PAIRING_RETRY_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// `σ²_ij`; a flat profile `1/N` is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_profile: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_bound: Option<f64>,
    #[serde(default)]
    pub entry_law: EntryLaw,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, seed: u64) -> Self {
        EnsembleSpec { kind, n, p: None, alpha: None, variance_profile: None, profile_bound: None, entry_law: EntryLaw::default(), seed }
    }

    pub fn goe(n: usize, seed: u64) -> Self {
        Self::new(EnsembleKind::Goe, n, seed)
    }

    pub fn flat_wigner(n: usize, seed: u64) -> Self {
        Self::new(EnsembleKind::GeneralizedWigner, n, seed)
    }

    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        EnsembleSpec { p: Some(p), ..Self::new(EnsembleKind::ErdosRenyi, n, seed) }
    }

    pub fn p_regular(n: usize, p: usize, seed: u64) -> Self {
        EnsembleSpec { p: Some(p as f64), ..Self::new(EnsembleKind::PRegular, n, seed) }
    }

    pub fn levy(n: usize, alpha: f64, seed: u64) -> Self {
        EnsembleSpec { alpha: Some(alpha), ..Self::new(EnsembleKind::Levy, n, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        match self.kind {
            EnsembleKind::Goe => Ok(()),
            EnsembleKind::GeneralizedWigner => self.profile().map(|_| ()),
            EnsembleKind::ErdosRenyi => {
                let p = self.p.ok_or_else(|| Error::InvalidArgument("erdos-renyi needs p".into()))?;
                if !(1.0..=self.n as f64 / 2.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!("p = {p} outside [1, N/2]")));
                }
                Ok(())
            }
            EnsembleKind::PRegular => {
                let p = self.p.ok_or_else(|| Error::InvalidArgument("p-regular needs p".into()))?;
                if p.fract() != 0.0 || p < 2.0 || p >= self.n as f64 {
                    return Err(Error::InvalidArgument(format!("p = {p} must be an integer in [2, N)")));
                }
                if (self.n * p as usize) % 2 != 0 {
                    return Err(Error::InvalidArgument("N·p must be even".into()));
                }
                Ok(())
            }
            EnsembleKind::Levy => {
                let a = self.alpha.ok_or_else(|| Error::InvalidArgument("levy needs alpha".into()))?;
                if !(a > 0.0 && a < 2.0) {
                    return Err(Error::InvalidArgument(format!("alpha = {a} outside (0, 2)")));
                }
                Ok(())
            }
        }
    }

    /// Variance profile after validation (flat when none was given).
    pub fn profile(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.n;
        let prof = match &self.variance_profile {
            None => return Ok(vec![vec![1.0 / n as f64; n]; n]),
            Some(p) => p,
        };
        if prof.len() != n || prof.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidProfile(format!("profile must be {n}×{n}")));
        }
        let bound = self.profile_bound.unwrap_or(DEFAULT_PROFILE_BOUND);
        for i in 0..n {
            for j in 0..n {
                let v = prof[i][j];
                if !(v >= 0.0) || v != prof[j][i] {
                    return Err(Error::InvalidProfile(format!("entry ({i},{j}) = {v} not symmetric nonnegative")));
                }
                let scaled = n as f64 * v;
                if scaled < 1.0 / bound || scaled > bound {
                    return Err(Error::InvalidProfile(format!("N·σ² = {scaled} at ({i},{j}) outside [1/{bound}, {bound}]")));
                }
            }
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| prof[i][j]).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidProfile(format!("column {j} sums to {s}, not 1")));
            }
        }
        Ok(prof.clone())
    }
}

/// `Z` with independent Gaussian entries of variance `(1 + δ_ij)/N`.
pub fn sample_goe(n: usize, seed: u64) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be positive".into()));
    }
    Ok(goe_with(n, &mut stream(seed, 0)))
}

pub fn goe_with(n: usize, rng: &mut Rng) -> SymmetricMatrix {
    let off = (1.0 / n as f64).sqrt();
    let diag = (2.0 / n as f64).sqrt();
    SymmetricMatrix::from_upper(n, |i, j| {
        let g: f64 = StandardNormal.sample(rng);
        g * if i == j { diag } else { off }
    })
}

pub fn sample_generalized_wigner(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    let prof = spec.profile()?;
    Ok(generalized_wigner_with(&prof, spec.entry_law, &mut stream(spec.seed, 0)))
}

pub fn generalized_wigner_with(profile: &[Vec<f64>], law: EntryLaw, rng: &mut Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(profile.len(), |i, j| {
        let s = profile[i][j].sqrt();
        match law {
            EntryLaw::Bernoulli => {
                if rng.gen::<bool>() {
                    s
                } else {
                    -s
                }
            }
            EntryLaw::Gaussian => {
                let g: f64 = StandardNormal.sample(rng);
                s * g
            }
        }
    })
}

pub fn sample_sparse_graph(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    spec.validate()?;
    let mut rng = stream(spec.seed, 0);
    match spec.kind {
        EnsembleKind::ErdosRenyi => Ok(erdos_renyi_with(spec.n, spec.p.unwrap(), &mut rng)),
        EnsembleKind::PRegular => p_regular_with(spec.n, spec.p.unwrap() as usize, &mut rng),
        _ => Err(Error::InvalidArgument("not a sparse graph ensemble".into())),
    }
}

/// `A/√(p(1 − p/N))` for an Erdős–Rényi graph with edge probability `p/N`.
pub fn erdos_renyi_with(n: usize, p: f64, rng: &mut Rng) -> SymmetricMatrix {
    let q = p / n as f64;
    let value = 1.0 / (p * (1.0 - q)).sqrt();
    SymmetricMatrix::from_upper(n, |i, j| if i != j && rng.gen::<f64>() < q { value } else { 0.0 })
}

/// `A/√(p − 1)` for a random `p`-regular simple graph.
///
/// Stubs are paired one edge at a time, redrawing a partner that would make a
/// loop or a repeated edge; a run that gets stuck restarts from scratch.
pub fn p_regular_with(n: usize, p: usize, rng: &mut Rng) -> Result<SymmetricMatrix> {
    let value = 1.0 / (p as f64 - 1.0).sqrt();
    'restart: for _ in 0..PAIRING_RETRY_CAP {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(p)).collect();
        stubs.shuffle(rng);
        let mut adj = vec![false; n * n];
        while let Some(a) = stubs.pop() {
            let mut found = None;
            for _ in 0..100 {
                let k = rng.gen_range(0..stubs.len());
                let b = stubs[k];
                if b != a && !adj[a * n + b] {
                    found = Some(k);
                    break;
                }
            }
            let k = match found.or_else(|| stubs.iter().position(|&b| b != a && !adj[a * n + b])) {
                Some(k) => k,
                None => continue 'restart,
            };
            let b = stubs.swap_remove(k);
            adj[a * n + b] = true;
            adj[b * n + a] = true;
        }
        return Ok(SymmetricMatrix::from_upper(n, |i, j| if adj[i * n + j] { value } else { 0.0 }));
    }
    Err(Error::DegeneratePairing(PAIRING_RETRY_CAP))
}

/// Scale `σ = (π / (2 sin(πα/2) Γ(α)))^{1/α}` of the symmetric stable entries.
pub fn levy_sigma(alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (pi / (2.0 * (pi * alpha / 2.0).sin() * libm::tgamma(alpha))).powf(1.0 / alpha)
}

/// Symmetric α-stable draw with characteristic function `exp(−σ^α |t|^α)`
/// (Chambers–Mallows–Stuck).
pub fn stable_draw(alpha: f64, sigma: f64, rng: &mut Rng) -> f64 {
    let pi = std::f64::consts::PI;
    let v = pi * (rng.gen::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let x = if (alpha - 1.0).abs() < 1e-12 {
        v.tan()
    } else {
        (alpha * v).sin() / v.cos().powf(1.0 / alpha) * ((v - alpha * v).cos() / w).powf((1.0 - alpha) / alpha)
    };
    sigma * x
}

pub fn sample_levy(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    spec.validate()?;
    Ok(levy_with(spec.n, spec.alpha.unwrap(), &mut stream(spec.seed, 0)))
}

pub fn levy_with(n: usize, alpha: f64, rng: &mut Rng) -> SymmetricMatrix {
    let sigma = levy_sigma(alpha);
    let scale = (n as f64).powf(-1.0 / alpha);
    SymmetricMatrix::from_upper(n, |_, _| scale * stable_draw(alpha, sigma, rng))
}

/// `H + √t · Z` with `Z` drawn from `sample_goe(N, seed)`.
pub fn perturb_gaussian(h: &SymmetricMatrix, t: f64, seed: u64) -> Result<SymmetricMatrix> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok(h.clone());
    }
    Ok(h.add_scaled(t.sqrt(), &sample_goe(h.size(), seed)?))
}

/// Draw from any ensemble with an explicit stream.
pub fn sample_with(spec: &EnsembleSpec, rng: &mut Rng) -> Result<SymmetricMatrix> {
    spec.validate()?;
    Ok(match spec.kind {
        EnsembleKind::Goe => goe_with(spec.n, rng),
        EnsembleKind::GeneralizedWigner => generalized_wigner_with(&spec.profile()?, spec.entry_law, rng),
        EnsembleKind::ErdosRenyi => erdos_renyi_with(spec.n, spec.p.unwrap(), rng),
        EnsembleKind::PRegular => p_regular_with(spec.n, spec.p.unwrap() as usize, rng)?,
        EnsembleKind::Levy => levy_with(spec.n, spec.alpha.unwrap(), rng),
    })
}

/// Draw from any ensemble using the spec's own seed.
pub fn sample(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    sample_with(spec, &mut stream(spec.seed, 0))
}
