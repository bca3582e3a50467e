use rand_distr::{Distribution, StandardNormal};

use crate::configspace::{matchings, Configuration, ConfigurationSpace, PerfectMatching, WeightedOperator};
use crate::linalg::{gauss_jordan_inverse, ldl_pivots};
use crate::rng::Rng;
use crate::stats::{chunked, Estimate};
use crate::Scalar;

/// Stratum indicator `χ_σ(x) = 1{σ⊙x = x}/√π(x)`.
pub fn chi_indicator<S: Scalar>(space: &ConfigurationSpace, sigma: &PerfectMatching) -> Vec<S> {
    space
        .configs()
        .iter()
        .enumerate()
        .map(|(k, x)| {
            if sigma.stabilizes(x) {
                S::one() / S::of(space.sqrt_weight(k) as usize)
            } else {
                S::zero()
            }
        })
        .collect()
}

/// π-orthogonal projection onto `span{χ_σ}` in the function representation.
///
/// Dependent indicators (possible when there are very few sites) are dropped
/// before inverting the Gram matrix.
pub fn kernel_projection<S: Scalar>(space: &ConfigurationSpace) -> WeightedOperator<S> {
    let ms = matchings(space.particles(), None);
    let chis: Vec<Vec<S>> = ms.iter().map(|m| chi_indicator(space, m)).collect();
    let r = chis.len();
    let mut gram = vec![vec![S::zero(); r]; r];
    for s in 0..r {
        for t in s..r {
            // π χ_σ χ_τ = 1 on the common stratum.
            let both = (0..space.len()).filter(|&k| !chis[s][k].is_zero() && !chis[t][k].is_zero()).count();
            gram[s][t] = S::of(both);
            gram[t][s] = S::of(both);
        }
    }
    let keep = ldl_pivots(&gram);
    let sub: Vec<Vec<S>> = keep.iter().map(|&s| keep.iter().map(|&t| gram[s][t]).collect()).collect();
    let inv = gauss_jordan_inverse(&sub).expect("restricted Gram matrix is nonsingular");
    let basis: Vec<&Vec<S>> = keep.iter().map(|&s| &chis[s]).collect();
    let pi = space.pi::<S>();
    let dim = space.len();
    let mut rows = Vec::with_capacity(dim);
    for x in 0..dim {
        let coeff: Vec<S> = (0..keep.len())
            .map(|a| (0..keep.len()).fold(S::zero(), |acc, b| acc + inv[a][b] * basis[b][x]))
            .collect();
        let row: Vec<(usize, S)> = (0..dim)
            .filter_map(|y| {
                let v = (0..keep.len()).fold(S::zero(), |acc, a| acc + coeff[a] * basis[a][y]);
                (!v.is_zero()).then(|| (y, v * pi[y]))
            })
            .collect();
        rows.push(row);
    }
    WeightedOperator::from_rows(rows).with_flags(false, true)
}

/// `⟨δ_x, 𝒦 δ_y⟩_π = 𝒦[x, y]/π(y)`. For Haar `O` this equals
/// `E[Π_a O_{x_a y_a}] / √(π(x) π(y))`.
pub fn kernel_pairing<S: Scalar>(space: &ConfigurationSpace, k: &WeightedOperator<S>, x: usize, y: usize) -> S {
    k.entry(x, y) / S::of(space.weight(y) as usize)
}

/// Haar orthogonal matrix, row-major, from Gram–Schmidt on a Gaussian matrix.
/// Gram–Schmidt leaves a positive triangular factor, which is the sign
/// correction that makes the orthogonal factor exactly Haar.
pub fn sample_haar(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect()).collect();
        let mut ok = true;
        for k in 0..n {
            for j in 0..k {
                let d: f64 = (0..n).map(|r| cols[k][r] * cols[j][r]).sum();
                for r in 0..n {
                    cols[k][r] -= d * cols[j][r];
                }
            }
            let norm = cols[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-10 {
                ok = false;
                break;
            }
            cols[k].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            let mut o = vec![0.0; n * n];
            for (c, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    o[r * n + c] = *v;
                }
            }
            return o;
        }
    }
}

/// Monte Carlo estimates of `E[∏_a O_{x_a y_a}]` for Haar `O`, all pairs
/// sharing the same samples.
pub fn haar_kernel_entries(
    sites: usize,
    pairs: &[(Configuration, Configuration)],
    samples: usize,
    seed: u64,
) -> Vec<Estimate> {
    let acc = chunked(seed, samples, pairs.len(), |rng, count, acc| {
        for _ in 0..count {
            let o = sample_haar(sites, rng);
            for (p, (x, y)) in pairs.iter().enumerate() {
                let v: f64 = x.iter().zip(y.iter()).map(|(&a, &b)| o[a * sites + b]).product();
                acc[p].push(v);
            }
        }
    });
    acc.iter().map(|a| a.estimate()).collect()
}

pub fn haar_kernel_entry(sites: usize, x: &Configuration, y: &Configuration, samples: usize, seed: u64) -> Estimate {
    haar_kernel_entries(sites, &[(x.clone(), y.clone())], samples, seed)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{assemble_generator, GeneratorPart, PairCoefficients};
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn chi_values() {
        let space = ConfigurationSpace::enumerate(3, 4).unwrap();
        let ms = matchings(4, None);
        let x = space.index_of(&[0, 0, 1, 1]).unwrap();
        let chi12: Vec<Q> = chi_indicator(&space, &ms[0]);
        let chi13: Vec<Q> = chi_indicator(&space, &ms[1]);
        assert_eq!(chi12[x], Q::from_integer(1));
        assert_eq!(chi13[x], Q::from_integer(0));
        let all = space.index_of(&[2, 2, 2, 2]).unwrap();
        for m in &ms {
            assert_eq!(chi_indicator::<Q>(&space, m)[all], Q::new(1, 3));
        }
    }

    #[test]
    fn two_particle_projection_is_uniform() {
        for sites in [2, 3, 5] {
            let space = ConfigurationSpace::enumerate(sites, 2).unwrap();
            let k = kernel_projection::<Q>(&space);
            for x in 0..space.len() {
                for y in 0..space.len() {
                    assert_eq!(kernel_pairing(&space, &k, x, y), Q::new(1, sites as i64));
                }
            }
        }
    }

    #[test]
    fn projection_fixes_indicators_and_is_idempotent() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let k = kernel_projection::<Q>(&space);
        for m in matchings(4, None) {
            let chi: Vec<Q> = chi_indicator(&space, &m);
            assert_eq!(k.apply(&chi), chi);
        }
        assert_eq!(k.compose(&k), k);
        assert_eq!(k.reversibility_defect(&space), 0.0);
        let ones = vec![Q::from_integer(1); space.len()];
        assert_eq!(k.apply(&ones), ones);
    }

    #[test]
    fn indicators_lie_in_generator_kernel() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let c = PairCoefficients::<Q>::from_fn(4, |i, j| Q::new(1 + (i * j) as i64, 3)).unwrap();
        let b = assemble_generator(&space, &c, GeneratorPart::Full).unwrap();
        for m in matchings(4, None) {
            let chi: Vec<Q> = chi_indicator(&space, &m);
            assert!(b.apply(&chi).iter().all(|v| *v == Q::from_integer(0)));
        }
    }

    #[test]
    fn single_site_drops_dependent_indicators() {
        let space = ConfigurationSpace::enumerate(1, 4).unwrap();
        let k = kernel_projection::<Q>(&space);
        assert_eq!(k.entry(0, 0), Q::from_integer(1));
    }

    #[test]
    fn haar_is_orthogonal() {
        let mut rng = crate::rng::stream(1, 0);
        let o = sample_haar(5, &mut rng);
        for a in 0..5 {
            for b in 0..5 {
                let d: f64 = (0..5).map(|r| o[r * 5 + a] * o[r * 5 + b]).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_fourth_moment_matches_kernel() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let k = kernel_projection::<f64>(&space);
        let x = Configuration(vec![0, 0, 0, 0]);
        let y = Configuration(vec![1, 1, 2, 2]);
        let (xi, yi) = (space.index_of(&x).unwrap(), space.index_of(&y).unwrap());
        let scale = ((space.weight(xi) * space.weight(yi)) as f64).sqrt();
        let e = haar_kernel_entry(4, &x, &y, 200_000, 8);
        assert!(e.within(scale * kernel_pairing(&space, &k, xi, yi), 4.0), "{e:?}");
        // E[O⁴] = 3/(N(N+2)) for one Haar entry.
        let e = haar_kernel_entry(4, &x, &x, 200_000, 9);
        assert!((9.0 * kernel_pairing(&space, &k, xi, xi) - 3.0 / 24.0).abs() < 1e-12);
        assert!(e.within(3.0 / 24.0, 4.0), "{e:?}");
    }

    #[test]
    fn haar_second_moment() {
        let x = Configuration(vec![0, 0]);
        let y = Configuration(vec![2, 2]);
        let e = haar_kernel_entry(4, &x, &y, 200_000, 5);
        assert!(e.within(0.25, 4.0), "{e:?}");
        let z = Configuration(vec![0, 1]);
        assert!(haar_kernel_entry(4, &x, &z, 200_000, 6).within(0.0, 4.0));
    }
}
