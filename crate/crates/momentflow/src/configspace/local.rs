use std::ops::Range;

use crate::configspace::{Configuration, ConfigurationSpace, Partition, WeightedOperator};
use crate::Scalar;

/// Equivalence classes of sites generated by the windows `[y_a − ℓ, y_a + ℓ]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRelation {
    class: Vec<usize>,
}

impl LocalRelation {
    pub fn new(sites: usize, y: &Configuration, ell: usize) -> Self {
        let mut parent: Vec<usize> = (0..sites).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for &c in y.iter() {
            let lo = c.saturating_sub(ell);
            let hi = (c + ell).min(sites - 1);
            for i in lo..hi {
                let (a, b) = (find(&mut parent, i), find(&mut parent, i + 1));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
        let class = (0..sites).map(|i| find(&mut parent, i)).collect();
        LocalRelation { class }
    }

    pub fn related(&self, i: usize, j: usize) -> bool {
        self.class[i] == self.class[j]
    }
}

/// States of `Λ_{yℓ} = {x : x_a ~ y_a for all a}`, in space order.
pub fn local_neighborhood(space: &ConfigurationSpace, y: &Configuration, ell: usize) -> Vec<usize> {
    let rel = LocalRelation::new(space.sites(), y, ell);
    (0..space.len())
        .filter(|&k| space.config(k).iter().zip(y.iter()).all(|(&xa, &ya)| rel.related(xa, ya)))
        .collect()
}

/// Local projection
/// `P f(x) = Σ_{z ∈ Λ, P_z ≤ P_x} π(z) f(z) / Σ_{z ∈ Λ, P_z ≤ P_x} π(z)`
/// on the neighborhood of `y`; rows outside the neighborhood are zero.
pub fn local_projection<S: Scalar>(space: &ConfigurationSpace, y: &Configuration, ell: usize) -> WeightedOperator<S> {
    let hood = local_neighborhood(space, y, ell);
    let parts: Vec<Partition> = hood.iter().map(|&k| Partition::of_positions(space.config(k))).collect();
    let mut rows = vec![Vec::new(); space.len()];
    for (i, &x) in hood.iter().enumerate() {
        let members: Vec<usize> = (0..hood.len()).filter(|&j| parts[j].le(&parts[i])).collect();
        let total = members.iter().map(|&j| space.weight(hood[j])).sum::<u64>();
        rows[x] = members
            .iter()
            .map(|&j| (hood[j], S::frac(space.weight(hood[j]) as usize, total as usize)))
            .collect();
    }
    WeightedOperator::from_rows(rows)
}

/// Diagonal mollifier `Av(x; K, y) = K^{-1} Σ_{α=K}^{2K−1} 1{‖x − y‖₁ < α}`.
pub fn averaging_coefficients<S: Scalar>(space: &ConfigurationSpace, k: usize, y: &Configuration) -> WeightedOperator<S> {
    assert!(k >= 1, "averaging scale must be positive");
    let values: Vec<S> = space
        .configs()
        .iter()
        .map(|x| {
            let d = x.l1_distance(y);
            S::frac((k..2 * k).filter(|&alpha| d < alpha).count(), k)
        })
        .collect();
    WeightedOperator::diagonal(&values)
}

/// `Av` as a function of the ℓ¹ distance alone.
pub fn av_value(distance: usize, k: usize) -> f64 {
    (k..2 * k).filter(|&alpha| distance < alpha).count() as f64 / k as f64
}

/// `dist(x, y) = max_a |J ∩ [min(x_a, y_a), max(x_a, y_a))|` for a window `J`.
pub fn config_distance(x: &Configuration, y: &Configuration, window: &Range<usize>) -> usize {
    x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let (lo, hi) = (a.min(b).max(window.start), a.max(b).min(window.end));
            hi.saturating_sub(lo)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{chi_indicator, matchings};
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn relation_merges_overlapping_windows() {
        let rel = LocalRelation::new(20, &Configuration(vec![3, 3, 6, 6]), 1);
        assert!(rel.related(2, 4));
        assert!(rel.related(5, 7));
        assert!(!rel.related(4, 5));
        let rel = LocalRelation::new(20, &Configuration(vec![3, 3, 6, 6]), 2);
        assert!(rel.related(1, 8));
        assert!(!rel.related(8, 9));
    }

    #[test]
    fn zero_length_gives_singleton() {
        let space = ConfigurationSpace::enumerate(5, 4).unwrap();
        let y = Configuration(vec![1, 1, 3, 3]);
        assert_eq!(local_neighborhood(&space, &y, 0), vec![space.index_of(&y).unwrap()]);
    }

    #[test]
    fn two_particle_projection_is_neighborhood_mean() {
        let space = ConfigurationSpace::enumerate(9, 2).unwrap();
        let y = Configuration(vec![4, 4]);
        let p = local_projection::<Q>(&space, &y, 2);
        let hood = local_neighborhood(&space, &y, 2);
        assert_eq!(hood.len(), 5);
        let f: Vec<Q> = (0..space.len()).map(|k| Q::from_integer(k as i64 * k as i64)).collect();
        let pf = p.apply(&f);
        let mean = hood.iter().fold(Q::from_integer(0), |a, &k| a + f[k]) / Q::from_integer(5);
        for &k in &hood {
            assert_eq!(pf[k], mean);
        }
        assert_eq!(pf[0], Q::from_integer(0));
    }

    #[test]
    fn projection_fixes_local_indicators_and_is_not_self_adjoint() {
        let space = ConfigurationSpace::enumerate(6, 4).unwrap();
        let y = Configuration(vec![2, 2, 3, 3]);
        let p = local_projection::<Q>(&space, &y, 1);
        let hood = local_neighborhood(&space, &y, 1);
        for m in matchings(4, None) {
            let chi: Vec<Q> = chi_indicator(&space, &m);
            let mut restricted = vec![Q::from_integer(0); space.len()];
            for &k in &hood {
                restricted[k] = chi[k];
            }
            assert_eq!(p.apply(&restricted), restricted);
        }
        assert!(p.reversibility_defect(&space) > 0.0);
    }

    #[test]
    fn averaging_values() {
        assert_eq!(av_value(3, 4), 1.0);
        assert_eq!(av_value(8, 4), 0.0);
        assert_eq!(av_value(5, 4), 0.5);
        let space = ConfigurationSpace::enumerate(20, 2).unwrap();
        let y = Configuration(vec![0, 0]);
        let av = averaging_coefficients::<Q>(&space, 4, &y);
        let at = |p: usize| {
            let k = space.index_of(&[p, p]).unwrap();
            av.entry(k, k)
        };
        assert_eq!(at(1), Q::from_integer(1));
        assert_eq!(at(3), Q::new(1, 4));
        assert_eq!(at(4), Q::from_integer(0));
    }

    #[test]
    fn distance_examples() {
        let x = Configuration(vec![3, 3]);
        let y = Configuration(vec![7, 7]);
        assert_eq!(config_distance(&x, &x, &(0..20)), 0);
        assert_eq!(config_distance(&x, &y, &(1..11)), 4);
        assert_eq!(config_distance(&x, &y, &(10..20)), 0);
    }
}
