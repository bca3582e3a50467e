use std::ops::Range;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use super::propagate::{norm_1_1, norm_2_inf, propagator, ConstantPropagator};
use super::CoefficientSchedule;
use crate::configspace::{
    config_distance, kernel_projection, local_neighborhood, local_projection, Configuration, ConfigurationSpace,
    GeneratorPart, LocalRelation, PairCoefficients,
};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::Operator;

/// Largest neighborhood handled by the dense Poincaré solve.
pub const DENSE_GUARD: usize = 4000;

/// `D(f) = ⟨f, (−B) f⟩_π`.
pub fn dirichlet_form(space: &ConfigurationSpace, generator: &Operator, f: &[f64]) -> Result<f64> {
    require_reversible(space, generator)?;
    let bf = generator.apply(f);
    Ok(-space.inner(f, &bf))
}

/// `½ Σ_{x,y} π(x) B[x,y] (f(x) − f(y))²`, the difference form of `D`.
pub fn dirichlet_pair_form(space: &ConfigurationSpace, generator: &Operator, f: &[f64]) -> Result<f64> {
    require_reversible(space, generator)?;
    let mut total = 0.0;
    for x in 0..space.len() {
        let px = space.weight(x) as f64;
        for &(y, b) in generator.row(x) {
            if y != x {
                let d = f[x] - f[y];
                total += px * b * d * d;
            }
        }
    }
    Ok(0.5 * total)
}

fn require_reversible(space: &ConfigurationSpace, generator: &Operator) -> Result<()> {
    let scale = generator.max_abs().max(1.0) * space.weights().iter().copied().max().unwrap_or(1) as f64;
    if generator.reversibility_defect(space) > 1e-12 * scale {
        return Err(Error::InvalidArgument("generator is not π-self-adjoint".into()));
    }
    Ok(())
}

/// `Σ_{i<j, i ~ j} c_ij(s) B_ij` restricted to the neighborhood of `y`,
/// with the neighborhood states in space order.
pub fn local_generator(
    space: &ConfigurationSpace,
    y: &Configuration,
    ell: usize,
    schedule: &CoefficientSchedule,
    s: f64,
) -> Result<(Vec<usize>, Operator)> {
    let rel = LocalRelation::new(space.sites(), y, ell);
    let coeffs = PairCoefficients::from_fn(space.sites(), |i, j| if rel.related(i, j) { schedule.get(s, i, j) } else { 0.0 })?;
    let b = crate::configspace::assemble_generator(space, &coeffs, GeneratorPart::Full)?;
    let hood = local_neighborhood(space, y, ell);
    Ok((hood.clone(), b.restrict(&hood)))
}

/// Sharp constant in `Σ π |f − P f|² ≤ C · D_yℓ(f)` over the neighborhood of
/// `y`, from a dense generalized eigensolve on the complement of `ker D_yℓ`.
pub fn poincare_constant(
    space: &ConfigurationSpace,
    y: &Configuration,
    ell: usize,
    schedule: &CoefficientSchedule,
    s: f64,
) -> Result<f64> {
    schedule.require_heavytail(&[s])?;
    let (hood, b) = local_generator(space, y, ell, schedule, s)?;
    let m = hood.len();
    if m > DENSE_GUARD {
        return Err(Error::NeighborhoodTooLarge(m));
    }
    if m <= 1 {
        return Ok(0.0);
    }
    let pi: Vec<f64> = hood.iter().map(|&x| space.weight(x) as f64).collect();
    // D = Π(−B) and A = (I − P)ᵀ Π (I − P), both symmetric.
    let d = Mat::from_fn(m, m, |x, z| {
        let v = -pi[x] * b.entry(x, z);
        let w = -pi[z] * b.entry(z, x);
        0.5 * (v + w)
    });
    let p = local_projection::<f64>(space, y, ell).restrict(&hood);
    let r = Mat::from_fn(m, m, |x, z| if x == z { 1.0 } else { 0.0 } - p.entry(x, z));
    let pr = Mat::from_fn(m, m, |x, z| pi[x] * r[(x, z)]);
    let a = r.transpose() * &pr;
    let (mu, v) = sym_eigen(&d)?;
    let top = mu.iter().fold(0.0f64, |t, &x| t.max(x.abs()));
    let keep: Vec<usize> = (0..m).filter(|&k| mu[k] > 1e-10 * top).collect();
    let kernel: Vec<usize> = (0..m).filter(|&k| mu[k] <= 1e-10 * top).collect();
    // The numerator must vanish on ker D for the constant to be finite.
    for &k in &kernel {
        let col = v.col(k);
        let q: f64 = (0..m).map(|x| col[x] * (0..m).map(|z| a[(x, z)] * col[z]).sum::<f64>()).sum();
        if q > 1e-9 * (1.0 + a.norm_max()) {
            log::warn!("deviation does not vanish on the local kernel; Poincaré constant is infinite");
            return Ok(f64::INFINITY);
        }
    }
    let k = keep.len();
    let scaled = Mat::from_fn(m, k, |x, c| v[(x, keep[c])] / mu[keep[c]].sqrt());
    let reduced = scaled.transpose() * &a * &scaled;
    let sym = Mat::from_fn(k, k, |i, j| 0.5 * (reduced[(i, j)] + reduced[(j, i)]));
    let (vals, _) = sym_eigen(&sym)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0))
}

/// `υ ‖f − 𝒦f‖₂^{2+4/n} / (D(f) ‖f‖₁^{4/n})`, zero when `f` lies in the
/// kernel span.
pub fn nash_ratio(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    s: f64,
    kernel: &Operator,
    f: &[f64],
) -> Result<f64> {
    let upsilon = schedule.require_heavytail(&[s])?;
    let n = space.particles() as f64;
    let kf = kernel.apply(f);
    let dev: Vec<f64> = f.iter().zip(&kf).map(|(a, b)| a - b).collect();
    let dev2 = space.norm2(&dev);
    if dev2 <= 1e-12 * space.norm2(f).max(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    let b = schedule.generator_at(space, s, GeneratorPart::Full)?;
    let d = dirichlet_form(space, &b, f)?;
    Ok(upsilon * dev2.powf(2.0 + 4.0 / n) / (d * space.norm1(f).powf(4.0 / n)))
}

/// A sampled curve with the metadata emitted alongside it.
#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub sites: usize,
    pub particles: usize,
    pub ell: Option<usize>,
    pub upsilon: Option<f64>,
    pub schedule: String,
}

impl Curve {
    fn new(space: &ConfigurationSpace, schedule: &CoefficientSchedule, ell: Option<usize>, points: Vec<(f64, f64)>) -> Self {
        Curve {
            points,
            sites: space.sites(),
            particles: space.particles(),
            ell,
            upsilon: schedule.upsilon(),
            schedule: schedule.tag().to_string(),
        }
    }

    /// Least-squares slope of `log value` against `log x` over points with
    /// `x ∈ [lo, hi]`; needs two such points with positive values.
    pub fn loglog_slope(&self, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.0 >= lo && p.0 <= hi && p.0 > 0.0 && p.1 > 0.0)
            .map(|p| (p.0.ln(), p.1.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }

    /// Running maximum taken from the right: the smallest nonincreasing curve
    /// above the data.
    pub fn decreasing_envelope(&self) -> Vec<(f64, f64)> {
        let mut out = self.points.clone();
        for k in (0..out.len().saturating_sub(1)).rev() {
            out[k].1 = out[k].1.max(out[k + 1].1);
        }
        out
    }

    /// CSV with header `<x_name>,value,N,n,ell,upsilon,schedule`.
    pub fn to_csv(&self, x_name: &str) -> String {
        let mut out = format!("{x_name},value,N,n,ell,upsilon,schedule\n");
        let ell = self.ell.map(|l| l.to_string()).unwrap_or_default();
        let ups = self.upsilon.map(|u| format!("{u:?}")).unwrap_or_default();
        for (x, v) in &self.points {
            out.push_str(&format!("{x:?},{v:?},{},{},{ell},{ups},{}\n", self.sites, self.particles, self.schedule));
        }
        out
    }
}

/// `(s, ‖(1 − 𝒦) U(0, s)‖_{2,∞})` on a grid, for a time-constant schedule.
pub fn ultracontractivity_curve(space: &ConfigurationSpace, schedule: &CoefficientSchedule, grid: &[f64]) -> Result<Curve> {
    schedule.require_heavytail(&[0.0])?;
    if !schedule.is_time_constant() {
        return Err(Error::InvalidArgument("ultracontractivity curve needs a time-constant schedule".into()));
    }
    let b = schedule.generator_at(space, 0.0, GeneratorPart::Full)?;
    let prop = ConstantPropagator::new(space, &b)?;
    let k = kernel_projection::<f64>(space).to_dense();
    let n = space.len();
    let id_minus_k = Mat::from_fn(n, n, |x, y| if x == y { 1.0 } else { 0.0 } - k[(x, y)]);
    let points = grid
        .par_iter()
        .map(|&s| (s, norm_2_inf(space, &(&id_minus_k * prop.at(s)))))
        .collect();
    Ok(Curve::new(space, schedule, None, points))
}

/// `(s, ‖U(0, s)‖_{1,1})` on a grid.
pub fn l1_growth(space: &ConfigurationSpace, schedule: &CoefficientSchedule, grid: &[f64], steps: usize) -> Result<Curve> {
    let points = grid
        .par_iter()
        .map(|&s| Ok((s, norm_1_1(space, &propagator(space, schedule, 0.0, s, steps)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve::new(space, schedule, None, points))
}

/// One row of a finite-speed profile.
#[derive(Clone, Debug, Serialize)]
pub struct FspEntry {
    pub configuration: Configuration,
    pub distance: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FspProfile {
    pub entries: Vec<FspEntry>,
    pub ell: usize,
    pub window: (usize, usize),
}

impl FspProfile {
    /// Largest entry at each distance, in increasing distance.
    pub fn by_distance(&self) -> Vec<(usize, f64)> {
        let top = self.entries.iter().map(|e| e.distance).max().unwrap_or(0);
        let mut out = vec![0.0f64; top + 1];
        for e in &self.entries {
            out[e.distance] = out[e.distance].max(e.value);
        }
        out.into_iter().enumerate().collect()
    }

    pub fn max_beyond(&self, distance: usize) -> f64 {
        self.entries.iter().filter(|e| e.distance >= distance).map(|e| e.value).fold(0.0, f64::max)
    }

    /// CSV with header `dist,value,configuration`; positions are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dist,value,configuration\n");
        for e in &self.entries {
            let x: Vec<String> = e.configuration.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("{},{:?},{}\n", e.distance, e.value, x.join(";")));
        }
        out
    }
}

/// Entries `|U_S(s1, s2)[x, y]|` of the short-range propagator against
/// `dist(x, y)` over `window`.
pub fn fsp_profile(
    space: &ConfigurationSpace,
    schedule: &CoefficientSchedule,
    y: &Configuration,
    ell: usize,
    window: Range<usize>,
    s1: f64,
    s2: f64,
) -> Result<FspProfile> {
    let n = space.sites() as f64;
    if !(s2 >= s1) || s2 - s1 > ell as f64 / n * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ s2 − s1 ≤ ℓ/N = {}", ell as f64 / n)));
    }
    let yi = space.index_of(y).ok_or_else(|| Error::InvalidArgument(format!("{y} is not in the space")))?;
    let short = schedule.short_range(ell, window.clone());
    let mut e = vec![0.0; space.len()];
    e[yi] = 1.0;
    // Column y of U_S, obtained by propagating the indicator of y.
    let column = if short.is_piecewise_constant() {
        super::propagate::propagate(space, &short, &e, s1, s2, 1)?.snapshots.pop().unwrap()
    } else {
        let b = short.generator_at(space, s1, GeneratorPart::Full)?;
        let steps = ((s2 - s1) * b.inf_norm() * 16.0).ceil().max(16.0) as usize;
        super::propagate::propagate(space, &short, &e, s1, s2, steps)?.snapshots.pop().unwrap()
    };
    let entries = space
        .configs()
        .iter()
        .zip(column)
        .map(|(x, v)| FspEntry { configuration: x.clone(), distance: config_distance(x, y, &window), value: v.abs() })
        .collect();
    Ok(FspProfile { entries, ell, window: (window.start, window.end) })
}
