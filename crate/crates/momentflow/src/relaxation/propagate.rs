use faer::Mat;
use serde::Serialize;

use super::CoefficientSchedule;
use crate::configspace::{ConfigurationSpace, GeneratorPart};
use crate::error::{Error, Result};
use crate::linalg::SymmetrizedSpectrum;
use crate::Operator;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Exact exponentials when the schedule is piecewise constant, RK4
    /// otherwise.
    #[default]
    Auto,
    Exact,
    Rk4,
}

/// `L¹`, `L²` norms under π and the sup norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    pub fn of(space: &ConfigurationSpace, f: &[f64]) -> Self {
        Norms { l1: space.norm1(f), l2: space.norm2(f), linf: f.iter().fold(0.0, |m, v| m.max(v.abs())) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub norms: Vec<Norms>,
}

/// Solve `∂_s f_s = B_s f_s` from `f_{s1} = f0`, with `steps` equal intervals
/// between `s1` and `s2`.
pub fn propagate(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    f0: &[f64],
    s1: f64,
    s2: f64,
    steps: usize,
) -> Result<PropagationResult> {
    propagate_with(space, schedule, f0, s1, s2, steps, Integrator::Auto, GeneratorPart::Full)
}

#[allow(clippy::too_many_arguments)]
pub fn propagate_with(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    f0: &[f64],
    s1: f64,
    s2: f64,
    steps: usize,
    integrator: Integrator,
    part: GeneratorPart,
) -> Result<PropagationResult> {
    if !(s2 >= s1) || f0.len() != space.len() {
        return Err(Error::InvalidArgument("need s2 ≥ s1 and a function on the space".into()));
    }
    let steps = steps.max(1);
    let times: Vec<f64> = (0..=steps).map(|k| s1 + (s2 - s1) * k as f64 / steps as f64).collect();
    let exact = match integrator {
        Integrator::Auto => schedule.is_piecewise_constant(),
        Integrator::Exact if !schedule.is_piecewise_constant() => {
            return Err(Error::InvalidArgument("exact propagation needs a piecewise-constant schedule".into()))
        }
        Integrator::Exact => true,
        Integrator::Rk4 => false,
    };
    let mut snapshots = vec![f0.to_vec()];
    if exact {
        let mut f = f0.to_vec();
        for w in times.windows(2) {
            f = exact_step(space, schedule, part, w[0], w[1], &f)?;
            snapshots.push(f.clone());
        }
    } else {
        check_stability(space, schedule, part, s1, s2, steps)?;
        let mut f = f0.to_vec();
        let mut cache: Option<Operator> = None;
        for w in times.windows(2) {
            if w[1] == w[0] {
                snapshots.push(f.clone());
                continue;
            }
            f = rk4_step(space, schedule, part, w[0], w[1] - w[0], &f, &mut cache)?;
            snapshots.push(f.clone());
        }
    }
    let norms = snapshots.iter().map(|f| Norms::of(space, f)).collect();
    Ok(PropagationResult { times, snapshots, norms })
}

fn check_stability(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    part: GeneratorPart,
    s1: f64,
    s2: f64,
    steps: usize,
) -> Result<()> {
    let mut norm = 0.0f64;
    for s in [s1, 0.5 * (s1 + s2), s2] {
        norm = norm.max(schedule.generator_at(space, s, part)?.inf_norm());
    }
    let needed = ((s2 - s1) * norm * 4.0).ceil() as usize;
    if steps < needed {
        return Err(Error::StabilityBound { suggested: needed });
    }
    Ok(())
}

fn rk4_step(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    part: GeneratorPart,
    s: f64,
    h: f64,
    f: &[f64],
    cache: &mut Option<Operator>,
) -> Result<Vec<f64>> {
    let mut apply = |t: f64, g: &[f64]| -> Result<Vec<f64>> {
        if schedule.is_time_constant() {
            if cache.is_none() {
                *cache = Some(schedule.generator_at(space, t, part)?);
            }
            Ok(cache.as_ref().unwrap().apply(g))
        } else {
            Ok(schedule.generator_at(space, t, part)?.apply(g))
        }
    };
    let axpy = |a: &[f64], c: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
    let k1 = apply(s, f)?;
    let k2 = apply(s + 0.5 * h, &axpy(f, 0.5 * h, &k1))?;
    let k3 = apply(s + 0.5 * h, &axpy(f, 0.5 * h, &k2))?;
    let k4 = apply(s + h, &axpy(f, h, &k3))?;
    Ok((0..f.len()).map(|x| f[x] + h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x])).collect())
}

/// Constant pieces of `[s1, s2]` as `(start, end)`.
fn pieces(schedule: &CoefficientSchedule, s1: f64, s2: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![s1];
    cuts.extend(schedule.breakpoints().iter().copied().filter(|&b| b > s1 && b < s2));
    cuts.push(s2);
    cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

fn exact_step(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    part: GeneratorPart,
    s1: f64,
    s2: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    let mut g = f.to_vec();
    for (a, b) in pieces(schedule, s1, s2) {
        let spec = SymmetrizedSpectrum::new(space, &schedule.generator_at(space, a, part)?)?;
        g = spec.apply_exp(b - a, &g);
    }
    Ok(g)
}

/// Dense propagator `U(s1, s2)` in the function representation. Exact for
/// piecewise-constant schedules; otherwise RK4 with `steps` steps applied to
/// every basis vector.
pub fn propagator(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    s1: f64,
    s2: f64,
    steps: usize,
) -> Result<Mat<f64>> {
    if !(s2 >= s1) {
        return Err(Error::InvalidArgument("need s2 ≥ s1".into()));
    }
    let n = space.len();
    if schedule.is_piecewise_constant() {
        let mut u = Mat::<f64>::identity(n, n);
        for (a, b) in pieces(schedule, s1, s2) {
            let spec = SymmetrizedSpectrum::new(space, &schedule.generator_at(space, a, GeneratorPart::Full)?)?;
            u = spec.exp(b - a) * &u;
        }
        return Ok(u);
    }
    let mut u = Mat::<f64>::zeros(n, n);
    for y in 0..n {
        let mut e = vec![0.0; n];
        e[y] = 1.0;
        let res = propagate_with(space, schedule, &e, s1, s2, steps, Integrator::Rk4, GeneratorPart::Full)?;
        let last = res.snapshots.last().unwrap();
        for x in 0..n {
            u[(x, y)] = last[x];
        }
    }
    Ok(u)
}

/// Exact spectral propagator of a single time-constant generator.
pub struct ConstantPropagator {
    spectrum: SymmetrizedSpectrum,
}

impl ConstantPropagator {
    pub fn new(space: &ConfigurationSpace, generator: &Operator) -> Result<Self> {
        Ok(ConstantPropagator { spectrum: SymmetrizedSpectrum::new(space, generator)? })
    }

    pub fn at(&self, s: f64) -> Mat<f64> {
        self.spectrum.exp(s)
    }

    pub fn apply(&self, s: f64, f: &[f64]) -> Vec<f64> {
        self.spectrum.apply_exp(s, f)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }
}

/// `‖A‖_{1,1} = max_y Σ_x π(x)|A[x,y]|/π(y)`.
pub fn norm_1_1(space: &ConfigurationSpace, a: &Mat<f64>) -> f64 {
    let w = space.weights();
    (0..a.ncols())
        .map(|y| (0..a.nrows()).map(|x| w[x] as f64 * a[(x, y)].abs()).sum::<f64>() / w[y] as f64)
        .fold(0.0, f64::max)
}

/// `‖A‖_{2,∞} = max_x (Σ_y A[x,y]²/π(y))^{1/2}`.
pub fn norm_2_inf(space: &ConfigurationSpace, a: &Mat<f64>) -> f64 {
    let w = space.weights();
    (0..a.nrows())
        .map(|x| (0..a.ncols()).map(|y| a[(x, y)] * a[(x, y)] / w[y] as f64).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
