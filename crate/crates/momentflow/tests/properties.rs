use faer::Mat;
use momentflow::configspace::{
    assemble_generator, chi_indicator, conditional_expectation, kernel_projection, matchings, pair_generator,
    set_partitions, ConfigurationSpace, GeneratorPart, PairCoefficients,
};
use momentflow::relaxation::{dirichlet_form, propagator, CoefficientSchedule, ConstantPropagator};
use momentflow::rng::stream;
use momentflow::{Coefficients, ExactOperator, Rational};
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

fn coefficients(sites: usize, seed: u64) -> Coefficients {
    let mut rng = stream(seed, 0);
    PairCoefficients::from_fn(sites, |_, _| rng.gen_range(0.05..2.0)).unwrap()
}

fn random_function(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 1);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_is_reversible_and_conservative(sites in 2usize..7, half in 1usize..3, seed in any::<u64>()) {
        let space = ConfigurationSpace::enumerate(sites, 2 * half).unwrap();
        let b = assemble_generator(&space, &coefficients(sites, seed), GeneratorPart::Full).unwrap();
        prop_assert!(b.reversibility_defect(&space) <= 1e-12);
        prop_assert!(b.row_sum_defect() <= 1e-12);
    }

    #[test]
    fn stratum_indicators_are_annihilated(sites in 2usize..7, half in 1usize..3, seed in any::<u64>()) {
        let space = ConfigurationSpace::enumerate(sites, 2 * half).unwrap();
        let b = assemble_generator(&space, &coefficients(sites, seed), GeneratorPart::Full).unwrap();
        for m in matchings(2 * half, None) {
            let chi: Vec<f64> = chi_indicator(&space, &m);
            prop_assert!(b.apply(&chi).iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn pair_generators_commute_with_conditional_expectations(sites in 2usize..6, a in any::<usize>(), b in any::<usize>(), p in 0usize..15) {
        let i = a % sites;
        let j = (i + 1 + b % (sites - 1)) % sites;
        let (i, j) = (i.min(j), i.max(j));
        let space = ConfigurationSpace::enumerate(sites, 4).unwrap();
        let b: ExactOperator = pair_generator(&space, i, j, GeneratorPart::Full).unwrap();
        let e: ExactOperator = conditional_expectation(&space, &set_partitions(4)[p]);
        let c = b.commutator(&e);
        prop_assert!((0..c.dim()).all(|x| c.row(x).iter().all(|&(_, v)| v == Rational::from_integer(0))));
    }

    #[test]
    fn dirichlet_form_ignores_kernel_components(sites in 2usize..6, seed in any::<u64>(), weights in prop::collection::vec(-3.0f64..3.0, 3)) {
        let space = ConfigurationSpace::enumerate(sites, 4).unwrap();
        let b = assemble_generator(&space, &coefficients(sites, seed), GeneratorPart::Full).unwrap();
        let k = kernel_projection::<f64>(&space);
        let f = random_function(space.len(), seed);
        let mut g = f.clone();
        for (m, w) in matchings(4, None).iter().zip(&weights) {
            let chi: Vec<f64> = chi_indicator(&space, m);
            g.iter_mut().zip(&chi).for_each(|(a, c)| *a += w * c);
        }
        let (df, dg) = (dirichlet_form(&space, &b, &f).unwrap(), dirichlet_form(&space, &b, &g).unwrap());
        prop_assert!((df - dg).abs() <= 1e-10 * df.max(1.0));
        let dev = |h: &[f64]| {
            let kh = k.apply(h);
            let d: Vec<f64> = h.iter().zip(&kh).map(|(a, b)| a - b).collect();
            space.norm2(&d)
        };
        prop_assert!((dev(&f) - dev(&g)).abs() <= 1e-10 * dev(&f).max(1.0));
    }

    #[test]
    fn energy_decays_at_twice_the_dirichlet_form(sites in 2usize..6, seed in any::<u64>(), s in 0.05f64..1.0) {
        let space = ConfigurationSpace::enumerate(sites, 4).unwrap();
        let b = assemble_generator(&space, &coefficients(sites, seed), GeneratorPart::Full).unwrap();
        let prop = ConstantPropagator::new(&space, &b).unwrap();
        let f = random_function(space.len(), seed);
        let h = 1e-5;
        let energy = |t: f64| {
            let g = prop.apply(t, &f);
            space.inner(&g, &g)
        };
        let slope = (energy(s + h) - energy(s - h)) / (2.0 * h);
        let d = dirichlet_form(&space, &b, &prop.apply(s, &f)).unwrap();
        prop_assert!((slope + 2.0 * d).abs() <= 1e-5 * d.max(1.0), "slope {slope}, D {d}");
    }

    #[test]
    fn short_range_cutoff_is_inert_beyond_the_lattice(sites in 2usize..7, extra in 0usize..3, s in 0.0f64..2.0) {
        let full = CoefficientSchedule::power_law(sites, 1.0);
        let short = full.short_range(sites + extra, 0..sites);
        let space = ConfigurationSpace::enumerate(sites, 2).unwrap();
        prop_assert_eq!(
            full.generator_at(&space, s, GeneratorPart::Full).unwrap(),
            short.generator_at(&space, s, GeneratorPart::Full).unwrap()
        );
    }

    #[test]
    fn propagators_compose(seed in any::<u64>(), split in 0.05f64..0.95, s in 0.1f64..1.0) {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let sched = CoefficientSchedule::piecewise(vec![0.3 * s, 0.7 * s], vec![coefficients(4, seed), coefficients(4, seed ^ 1), coefficients(4, seed ^ 2)]).unwrap();
        let mid = split * s;
        let whole = propagator(&space, &sched, 0.0, s, 1).unwrap();
        let first = propagator(&space, &sched, 0.0, mid, 1).unwrap();
        let second = propagator(&space, &sched, mid, s, 1).unwrap();
        // f_s = U(0,s) f_0 evolves forward, so later factors act last.
        prop_assert!(max_abs_diff(&whole, &(&second * &first)) <= 1e-10);
    }

    #[test]
    fn duhamel_formula(seed in any::<u64>(), s in 0.1f64..0.8) {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let a = assemble_generator(&space, &coefficients(4, seed), GeneratorPart::Full).unwrap();
        let b = assemble_generator(&space, &coefficients(4, seed ^ 7), GeneratorPart::Full).unwrap();
        let (pa, pb) = (ConstantPropagator::new(&space, &a).unwrap(), ConstantPropagator::new(&space, &b).unwrap());
        let diff = a.sub(&b).to_dense();
        // e^{sA} − e^{sB} = ∫₀ˢ e^{(s−r)A} (A − B) e^{rB} dr, by composite Simpson.
        let steps = 512;
        let h = s / steps as f64;
        let dim = space.len();
        let mut integral = Mat::<f64>::zeros(dim, dim);
        for k in 0..=steps {
            let r = k as f64 * h;
            let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let term = pa.at(s - r) * &diff * pb.at(r);
            integral += term * faer::Scale(w * h / 3.0);
        }
        let lhs = pa.at(s) - pb.at(s);
        prop_assert!(max_abs_diff(&lhs, &integral) <= 1e-8);
    }
}
