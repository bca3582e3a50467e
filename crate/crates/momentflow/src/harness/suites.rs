use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::report::{num, Check, ExperimentReport, Table};
use super::{ExperimentConfig, ExperimentKind};
use crate::ansatz::{ansatz_f, gaussian_wick_moment, IdentityCovariance, TestVectors};
use crate::configspace::{
    assemble_generator, chi_indicator, conditional_expectation, kernel_projection, matchings, pair_generator,
    sample_haar, set_partitions, Configuration, ConfigurationSpace, GeneratorPart, PairCoefficients,
};
use crate::ensembles::{sample, EnsembleKind, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::flow::{sample_overlaps, summarize, validate_generator, BaseMatrix};
use crate::linalg::{sym_eigenvalues, symmetrize};
use crate::relaxation::{
    dirichlet_form, dirichlet_pair_form, fsp_profile, l1_growth, nash_ratio, poincare_constant, propagate,
    ultracontractivity_curve, CoefficientSchedule,
};
use crate::rng::{derive_seed, stream, Rng};
use crate::spectral::{eig_sym, verify_assumptions, FreeConvolutionProfile};
use crate::stats::Estimate;
use crate::{ExactOperator, Operator};

/// Salts separating the random streams of one experiment.
const SALT_COEFFS: u64 = 1;
const SALT_VECTORS: u64 = 2;
const SALT_PATHS: u64 = 3;
const SALT_CASES: u64 = 4;
const SALT_FUNCTIONS: u64 = 5;

/// Relative tolerance for numerically zero eigenvalues.
const NULL_RTOL: f64 = 1e-9;

pub(super) fn run_suite(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    if cfg.scale_chain {
        scale_chain(cfg, report);
    }
    if cfg.scale_chain || cfg.kind == ExperimentKind::Mixing {
        scales_table(cfg, report);
    }
    match cfg.kind {
        ExperimentKind::Assumptions => assumptions(cfg, report),
        ExperimentKind::GeneratorValidate => generator_validate(cfg, report),
        ExperimentKind::OperatorSuite => operator_suite(cfg, report),
        ExperimentKind::Mixing => mixing(cfg, report),
        ExperimentKind::Fsp => fsp(cfg, report),
        ExperimentKind::JointNormality => joint_normality(cfg, report),
        ExperimentKind::AnsatzCompare => ansatz_compare(cfg, report),
    }
}

fn scale_chain(cfg: &ExperimentConfig, report: &mut ExperimentReport) {
    let n = cfg.ensemble.n as f64;
    let margin = n.powf(cfg.omega_c);
    report.checks.push(Check::at_least("scale-chain-lower", cfg.t, cfg.window.eta_star * margin));
    report.checks.push(Check::at_most("scale-chain-upper", cfg.t, cfg.window.r / margin));
    let s = cfg.scales();
    report.checks.push(Check::at_least("scale-t0-positive", s.t0_time, 0.0));
}

fn scales_table(cfg: &ExperimentConfig, report: &mut ExperimentReport) {
    let s = cfg.scales();
    let mut t = Table::new("scales", &["name", "value"]);
    for (k, v) in [("K", s.k), ("T2", s.t2), ("ell2", s.ell2), ("ell1", s.ell1), ("T1", s.t1), ("t0", s.t0_time), ("t1", s.t1_time)] {
        t.push(vec![k.into(), num(v)]);
    }
    report.tables.push(t);
}

fn unit_gaussian(n: usize, project_ones: bool, rng: &mut Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    if project_ones {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    }
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random orthonormal pairs `(v, w)`, optionally orthogonal to the all-ones
/// vector.
pub fn orthonormal_pairs(n: usize, count: usize, project_ones: bool, rng: &mut Rng) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..count)
        .map(|_| {
            let v = unit_gaussian(n, project_ones, rng);
            let mut w = unit_gaussian(n, project_ones, rng);
            let c = dot(&v, &w);
            w.iter_mut().zip(&v).for_each(|(x, y)| *x -= c * y);
            normalize(&mut w);
            (v, w)
        })
        .collect()
}

fn random_coefficients(sites: usize, rng: &mut Rng) -> Result<PairCoefficients<f64>> {
    PairCoefficients::from_fn(sites, |_, _| rng.gen_range(0.1..1.0))
}

fn assumptions(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let h = sample(&cfg.ensemble)?;
    let h = perturbed(&h, cfg)?;
    let dec = eig_sym(&h)?;
    let project = projects_ones(cfg);
    let mut rng = stream(derive_seed(cfg.seed, SALT_VECTORS), 0);
    let dirs: Vec<Vec<f64>> = (0..cfg.pairs).map(|_| unit_gaussian(cfg.ensemble.n, project, &mut rng)).collect();
    let rep = verify_assumptions(&dec, &cfg.window, &dirs, cfg.exponent)?;
    let c = cfg.window.c;
    report.checks.push(Check::at_least("density-lower", rep.im_m_min, 1.0 / c));
    report.checks.push(Check::at_most("density-upper", rep.im_m_max, c));
    report.checks.push(Check::at_most("green-forms", rep.green_sup, rep.green_bound));
    let mut t = Table::new("window", &["energies", "scales", "im_m_min", "im_m_max", "green_sup", "green_bound"]);
    t.push(vec![
        rep.energies.to_string(),
        rep.scales.to_string(),
        num(rep.im_m_min),
        num(rep.im_m_max),
        num(rep.green_sup),
        num(rep.green_bound),
    ]);
    report.tables.push(t);
    Ok(())
}

/// `H + √t·GOE` with the perturbation drawn from the experiment seed.
fn perturbed(h: &SymmetricMatrix, cfg: &ExperimentConfig) -> Result<SymmetricMatrix> {
    if cfg.t > 0.0 {
        crate::ensembles::perturb_gaussian(h, cfg.t, derive_seed(cfg.seed, cfg.ensemble.seed))
    } else {
        Ok(h.clone())
    }
}

fn projects_ones(cfg: &ExperimentConfig) -> bool {
    cfg.project_ones.unwrap_or(matches!(cfg.ensemble.kind, EnsembleKind::ErdosRenyi | EnsembleKind::PRegular))
}

fn generator_validate(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let n = cfg.spectrum.len();
    if cfg.particles != 2 && cfg.particles != 4 {
        return Err(Error::InvalidArgument("generator validation supports two or four particles".into()));
    }
    let q = sample_haar(n, &mut stream(cfg.seed, 0));
    let h = SymmetricMatrix::from_upper(n, |i, j| (0..n).map(|k| q[i * n + k] * q[j * n + k] * cfg.spectrum[k]).sum());
    let dec = eig_sym(&h)?;
    let vectors = match &cfg.vectors {
        Some(v) => TestVectors::new(v.clone())?.into(),
        None => {
            let mut rng = stream(derive_seed(cfg.seed, SALT_VECTORS), 0);
            (0..cfg.particles).map(|_| unit_gaussian(n, false, &mut rng)).collect::<Vec<_>>()
        }
    };
    let checks = validate_generator(&dec, &vectors, cfg.delta, cfg.dt, cfg.paths, derive_seed(cfg.seed, SALT_PATHS))?;
    let mut t = Table::new("drift", &["configuration", "initial", "exact", "mean", "stderr", "z"]);
    for c in &checks {
        report.checks.push(Check::estimate(format!("drift{}", field(&c.configuration)), &c.drift, c.exact, cfg.stderr_multiple));
        t.push(vec![
            field(&c.configuration),
            num(c.initial),
            num(c.exact),
            num(c.drift.mean),
            num(c.drift.stderr),
            num(c.drift.z_score(c.exact)),
        ]);
    }
    report.tables.push(t);
    Ok(())
}

/// CSV-safe rendering of a configuration, `a;b;c`.
pub fn field(x: &Configuration) -> String {
    x.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
}

fn operator_suite(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let space = ConfigurationSpace::enumerate(cfg.sites, cfg.particles)?;
    let mut rng = stream(derive_seed(cfg.seed, SALT_COEFFS), 0);
    let coeffs = random_coefficients(cfg.sites, &mut rng)?;
    let b = assemble_generator(&space, &coeffs, GeneratorPart::Full)?;
    let ms = matchings(cfg.particles, None);
    let checks = &mut report.checks;

    checks.push(Check::at_most("reversibility", b.reversibility_defect(&space), 1e-12));
    let chi_defect = ms
        .iter()
        .map(|m| b.apply(&chi_indicator::<f64>(&space, m)).iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("kernel-indicators", chi_defect, 1e-12));

    let vals = sym_eigenvalues(&symmetrize(&space, &b))?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let null = vals.iter().filter(|v| v.abs() <= NULL_RTOL * scale).count();
    checks.push(Check::within("nullspace-dimension", null as f64, ms.len() as f64, 0.0));
    checks.push(Check::at_most("top-eigenvalue", vals.last().copied().unwrap_or(0.0), 1e-10));

    let mut exch_max = f64::NEG_INFINITY;
    let mut diff_min = f64::INFINITY;
    for i in 0..cfg.sites {
        for j in i + 1..cfg.sites {
            let e: Operator = pair_generator(&space, i, j, GeneratorPart::ExchangeOnly)?;
            let m: Operator = pair_generator(&space, i, j, GeneratorPart::MoveOnly)?;
            let ev = sym_eigenvalues(&symmetrize(&space, &e))?;
            exch_max = exch_max.max(ev.last().copied().unwrap_or(0.0));
            let dv = sym_eigenvalues(&symmetrize(&space, &e.sub(&m)))?;
            diff_min = diff_min.min(dv.first().copied().unwrap_or(0.0));
        }
    }
    // −E ⪰ 0 means the largest eigenvalue of E is nonpositive.
    checks.push(Check::at_most("exchange-negative", exch_max, 1e-10));
    checks.push(Check::at_least("exchange-minus-move-positive", diff_min, -1e-10));

    let partitions = set_partitions(cfg.particles);
    let conds: Vec<ExactOperator> = partitions.iter().map(|p| conditional_expectation(&space, p)).collect();
    let mut comm = 0.0f64;
    for i in 0..cfg.sites {
        for j in i + 1..cfg.sites {
            let bij: ExactOperator = pair_generator(&space, i, j, GeneratorPart::Full)?;
            for e in &conds {
                comm = comm.max(bij.commutator(e).max_abs());
            }
        }
    }
    checks.push(Check::at_most("commutation-exact", comm, 1e-12));

    let k = kernel_projection::<f64>(&space);
    let inv = k.compose(&b).max_abs().max(b.compose(&k).max_abs());
    checks.push(Check::at_most("kernel-invariance", inv, 1e-10));

    let mut frng = stream(derive_seed(cfg.seed, SALT_FUNCTIONS), 0);
    let mut pair_gap = 0.0f64;
    for _ in 0..cfg.samples.min(20) {
        let f: Vec<f64> = (0..space.len()).map(|_| StandardNormal.sample(&mut frng)).collect();
        let d1 = dirichlet_form(&space, &b, &f)?;
        let d2 = dirichlet_pair_form(&space, &b, &f)?;
        pair_gap = pair_gap.max((d1 - d2).abs() / d1.abs().max(1.0));
    }
    checks.push(Check::at_most("dirichlet-pair-form", pair_gap, 1e-10));

    let bound = ms.len() as f64;
    let mut t = Table::new("l1", &["case", "configuration", "s", "pieces", "value"]);
    let mut worst = 0.0f64;
    let mut crng = stream(derive_seed(cfg.seed, SALT_CASES), 0);
    for case in 0..cfg.samples {
        let x = crng.gen_range(0..space.len());
        let pieces = crng.gen_range(1..=4usize);
        let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| crng.gen_range(0.0..1.0)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let coeffs = (0..=breaks.len())
            .map(|_| PairCoefficients::from_fn(cfg.sites, |_, _| if crng.gen_bool(0.2) { 0.0 } else { crng.gen_range(0.0..2.0) }))
            .collect::<Result<Vec<_>>>()?;
        let sched = CoefficientSchedule::piecewise(breaks.clone(), coeffs)?;
        let s = 1.0 - crng.gen_range(0.0..1.0);
        let r = propagate(&space, &sched, &space.delta(x), 0.0, s, 1)?;
        let v = space.norm1(r.snapshots.last().expect("propagation returns the endpoint"));
        worst = worst.max(v);
        t.push(vec![case.to_string(), field(space.config(x)), num(s), (breaks.len() + 1).to_string(), num(v)]);
    }
    report.checks.push(Check::at_most("l1-bound", worst, bound + 1e-9));
    report.tables.push(t);
    Ok(())
}

fn mixing(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    // Poincaré constants for two particles over a range of scales.
    let psites = cfg.poincare_sites;
    let pspace = ConfigurationSpace::enumerate(psites, 2)?;
    let psched = CoefficientSchedule::power_law(psites, cfg.upsilon);
    let y = Configuration::new(cfg.reference_or_center(psites, 2));
    let mut t = Table::new("poincare", &["ell", "constant", "ratio"]);
    let mut ratios = Vec::new();
    for &ell in &cfg.ells {
        let c = poincare_constant(&pspace, &y, ell, &psched, 0.0)?;
        let ratio = c / ell as f64;
        ratios.push(ratio);
        t.push(vec![ell.to_string(), num(c), num(ratio)]);
    }
    report.tables.push(t);
    if !ratios.is_empty() {
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        report.checks.push(Check::at_most("poincare-linear-scaling", hi / lo, 4.0));
    }

    let space = ConfigurationSpace::enumerate(cfg.sites, cfg.particles)?;
    let sched = CoefficientSchedule::power_law(cfg.sites, cfg.upsilon);
    let curve = ultracontractivity_curve(&space, &sched, &cfg.s_grid)?;
    let slope = curve.loglog_slope(cfg.slope_range.0, cfg.slope_range.1).unwrap_or(f64::NAN);
    report.checks.push(Check::at_most("ultracontractivity-slope", slope, cfg.slope_bound));
    report.tables.push(Table::from_csv("ultracontractivity", &curve.to_csv("s")));

    let growth = l1_growth(&space, &sched, &cfg.s_grid, 1)?;
    let worst = growth.points.iter().map(|p| p.1).fold(0.0, f64::max);
    report.checks.push(Check::at_most("l1-growth", worst, matchings(cfg.particles, None).len() as f64 + 1e-9));
    report.tables.push(Table::from_csv("l1", &growth.to_csv("s")));

    let k = kernel_projection::<f64>(&space);
    let mut rng = stream(derive_seed(cfg.seed, SALT_FUNCTIONS), 0);
    let mut t = Table::new("nash", &["sample", "ratio"]);
    let mut worst = 0.0f64;
    for sample in 0..cfg.samples {
        // Alternate Gaussian functions with point masses, which have the
        // smallest L¹ norm for their L² norm.
        let f: Vec<f64> = if sample % 2 == 0 {
            (0..space.len()).map(|_| StandardNormal.sample(&mut rng)).collect()
        } else {
            space.delta(rng.gen_range(0..space.len()))
        };
        let r = nash_ratio(&space, &sched, 0.0, &k, &f)?;
        worst = worst.max(r);
        t.push(vec![sample.to_string(), num(r)]);
    }
    report.checks.push(Check::at_most("nash-ratio", worst, cfg.nash_bound));
    report.tables.push(t);
    Ok(())
}

fn fsp(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let space = ConfigurationSpace::enumerate(cfg.sites, cfg.particles)?;
    let sched = CoefficientSchedule::power_law(cfg.sites, cfg.upsilon);
    let y = Configuration::new(cfg.reference_or_center(cfg.sites, cfg.particles));
    let ell = *cfg.ells.first().ok_or_else(|| Error::InvalidArgument("fsp needs a length scale".into()))?;
    let span = ell as f64 / cfg.sites as f64;
    let profile = fsp_profile(&space, &sched, &y, ell, 0..cfg.sites, 0.0, span)?;
    report.checks.push(Check::at_most("fsp-tail", profile.max_beyond(4 * ell), cfg.fsp_threshold));
    let mut t = Table::new("profile", &["dist", "value", "configuration"]);
    for e in &profile.entries {
        t.push(vec![e.distance.to_string(), num(e.value), field(&e.configuration)]);
    }
    report.tables.push(t);
    let mut t = Table::new("envelope", &["dist", "max"]);
    for (d, v) in profile.by_distance() {
        t.push(vec![d.to_string(), num(v)]);
    }
    report.tables.push(t);
    Ok(())
}

/// `θ̂ = mean(ab) − mean(a)·mean(b)` with its delta-method standard error.
fn covariance_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let k = a.len() as f64;
    let ma = a.iter().sum::<f64>() / k;
    let mb = b.iter().sum::<f64>() / k;
    let mab = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / k;
    let influence: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y - mab - mb * (x - ma) - ma * (y - mb)).collect();
    let spread = summarize(&influence);
    Estimate { mean: mab - ma * mb, stderr: spread.stderr, samples: spread.samples }
}

fn joint_normality(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let n = cfg.ensemble.n;
    let i = cfg.index.unwrap_or(n / 2);
    if i >= n || n < 2 {
        return Err(Error::InvalidArgument(format!("index {i} outside 0..{n}")));
    }
    let j = if i + 1 < n { i + 1 } else { i - 1 };
    let project = projects_ones(cfg);
    let mut rng = stream(derive_seed(cfg.seed, SALT_VECTORS), 0);
    let pairs = orthonormal_pairs(n, cfg.pairs, project, &mut rng);
    let vectors: Vec<Vec<f64>> = pairs.iter().flat_map(|(v, w)| [v.clone(), w.clone()]).collect();
    let samples = sample_overlaps(&cfg.ensemble, cfg.base, cfg.t, cfg.trials, cfg.seed, &[i, j], &vectors)?;
    let trials = samples.trials();
    let k = cfg.stderr_multiple;

    for (p, (v, w)) in pairs.iter().enumerate() {
        let (a, b) = (2 * p, 2 * p + 1);
        let vw: Vec<f64> = (0..trials).map(|r| samples.get(r, i, a) * samples.get(r, i, b)).collect();
        report.checks.push(Check::estimate(format!("pair{p}-vw"), &summarize(&vw), dot(v, w), k));
        let vv: Vec<f64> = (0..trials).map(|r| samples.get(r, i, a).powi(2)).collect();
        report.checks.push(Check::estimate(format!("pair{p}-vv"), &summarize(&vv), 1.0, k));
        let wj: Vec<f64> = (0..trials).map(|r| samples.get(r, j, b).powi(2)).collect();
        let cov = covariance_estimate(&vv, &wj);
        report.checks.push(Check::estimate(format!("pair{p}-factorization"), &cov, 0.0, k));
    }

    // Fourth moment, averaged over all test vectors within each trial.
    let fourth: Vec<f64> = (0..trials)
        .map(|r| (0..vectors.len()).map(|a| samples.get(r, i, a).powi(4)).sum::<f64>() / vectors.len() as f64)
        .collect();
    let fourth = summarize(&fourth);
    report.checks.push(Check::within("fourth-moment", fourth.mean, 3.0, 3.0 * cfg.fourth_moment_rtol));

    if let Some((v, w)) = pairs.first() {
        let x = Configuration::new(vec![i, i, i, i]);
        let tv = TestVectors::new(vec![v.clone(), v.clone(), w.clone(), w.clone()])?;
        let wick = gaussian_wick_moment(&x, &tv)?;
        let est = samples.moment(&x, &[0, 0, 1, 1])?;
        report.checks.push(Check::estimate("wick-colored", &est, wick, k));
    }

    if cfg.base == BaseMatrix::Fixed && cfg.t > 0.0 {
        let h = sample(&cfg.ensemble)?;
        let profile = FreeConvolutionProfile::new(eig_sym(&h)?, cfg.t)?;
        for (p, (v, w)) in pairs.iter().enumerate() {
            let x = Configuration::new(vec![i, i]);
            let tv = TestVectors::new(vec![v.clone(), w.clone()])?;
            let target = ansatz_f(&x, &x, &tv, &profile)?;
            let est = samples.moment(&x, &[2 * p, 2 * p + 1])?;
            report.checks.push(Check::estimate(format!("pair{p}-ansatz"), &est, target, k));
        }
    }

    let mut header = vec!["trial".to_string()];
    for idx in [i, j] {
        for a in 0..vectors.len() {
            header.push(format!("u{idx}_v{a}"));
        }
    }
    let mut t = Table { name: "overlaps".into(), header, rows: Vec::with_capacity(trials) };
    for r in 0..trials {
        let mut row = vec![r.to_string()];
        for idx in [i, j] {
            row.extend((0..vectors.len()).map(|a| num(samples.get(r, idx, a))));
        }
        t.rows.push(row);
    }
    report.tables.push(t);
    Ok(())
}

fn ansatz_compare(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let n = cfg.ensemble.n;
    if n != cfg.sites {
        return Err(Error::InvalidArgument(format!("ansatz comparison needs N = sites, got {n} and {}", cfg.sites)));
    }
    let space = ConfigurationSpace::enumerate(cfg.sites, cfg.particles)?;
    let mut rng = stream(derive_seed(cfg.seed, SALT_VECTORS), 0);
    let tv = TestVectors::new((0..cfg.particles).map(|_| unit_gaussian(n, false, &mut rng)).collect())?;

    let mut t = Table::new("wick", &["configuration", "ansatz", "wick"]);
    let mut gap = 0.0f64;
    for x in space.configs() {
        let a = ansatz_f(x, x, &tv, &IdentityCovariance)?;
        let w = gaussian_wick_moment(x, &tv)?;
        gap = gap.max((a - w).abs());
        t.push(vec![field(x), num(a), num(w)]);
    }
    report.checks.push(Check::at_most("identity-ansatz-is-wick", gap, 1e-12));
    report.tables.push(t);

    let h = sample(&cfg.ensemble)?;
    let profile = FreeConvolutionProfile::new(eig_sym(&h)?, cfg.t)?;
    let pairs: Vec<Operator> = (0..cfg.sites)
        .flat_map(|i| (i + 1..cfg.sites).map(move |j| (i, j)))
        .map(|(i, j)| pair_generator(&space, i, j, GeneratorPart::Full))
        .collect::<Result<_>>()?;
    let references: Vec<&Configuration> = match &cfg.reference {
        Some(_) => vec![space.config(
            space
                .index_of(&cfg.reference_or_center(cfg.sites, cfg.particles))
                .ok_or_else(|| Error::InvalidArgument("reference configuration is not even".into()))?,
        )],
        None => space.configs().iter().collect(),
    };
    let mut worst = 0.0f64;
    for y in references {
        let f = space.configs().iter().map(|x| ansatz_f(x, y, &tv, &profile)).collect::<Result<Vec<f64>>>()?;
        for b in &pairs {
            worst = worst.max(b.apply(&f).iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    report.checks.push(Check::at_most("ansatz-in-kernel", worst, 1e-12));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_of_independent_draws_is_small() {
        let mut rng = stream(5, 0);
        let a: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let est = covariance_estimate(&a, &b);
        assert!(est.within(0.0, 4.0));
        let same = covariance_estimate(&a, &a);
        assert!((same.mean - 1.0).abs() < 0.05);
    }

    #[test]
    fn pairs_are_orthonormal() {
        let mut rng = stream(1, 0);
        for (v, w) in orthonormal_pairs(30, 4, true, &mut rng) {
            assert!((dot(&v, &v) - 1.0).abs() < 1e-12);
            assert!(dot(&v, &w).abs() < 1e-12);
            assert!(v.iter().sum::<f64>().abs() < 1e-12);
            assert!(w.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn rational_commutator_is_exactly_zero() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let b: ExactOperator = pair_generator(&space, 0, 2, GeneratorPart::Full).unwrap();
        for p in set_partitions(4) {
            let e: ExactOperator = conditional_expectation(&space, &p);
            assert_eq!(b.commutator(&e).max_abs(), 0.0);
        }
    }
}
