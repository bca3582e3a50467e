use std::collections::BTreeMap;

use crate::configspace::{ConfigurationSpace, WeightedOperator};
use crate::Scalar;

/// Unlabelled configurations `η` with `η_i = n_i(x)/2`, and the fibers of the
/// map `x ↦ η` over a labelled space.
#[derive(Clone, Debug)]
pub struct ColorblindSpace {
    etas: Vec<Vec<usize>>,
    image: Vec<usize>,
    fibers: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transport {
    Pushforward,
    Pullback,
}

impl ColorblindSpace {
    pub fn new(space: &ConfigurationSpace) -> Self {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (k, x) in space.configs().iter().enumerate() {
            let eta: Vec<usize> = x.occupancies(space.sites()).iter().map(|n| n / 2).collect();
            map.entry(eta).or_default().push(k);
        }
        let mut image = vec![0; space.len()];
        let mut etas = Vec::with_capacity(map.len());
        let mut fibers = Vec::with_capacity(map.len());
        for (e, (eta, fiber)) in map.into_iter().enumerate() {
            for &k in &fiber {
                image[k] = e;
            }
            etas.push(eta);
            fibers.push(fiber);
        }
        ColorblindSpace { etas, image, fibers }
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    pub fn eta(&self, e: usize) -> &[usize] {
        &self.etas[e]
    }

    pub fn image(&self, k: usize) -> usize {
        self.image[k]
    }

    pub fn index_of(&self, eta: &[usize]) -> Option<usize> {
        self.etas.binary_search_by(|e| e.as_slice().cmp(eta)).ok()
    }

    /// `φ* f = f ∘ φ`.
    pub fn pullback<S: Scalar>(&self, f: &[S]) -> Vec<S> {
        self.image.iter().map(|&e| f[e]).collect()
    }

    /// `φ_* g(η) = Σ_{x ∈ φ⁻¹(η)} π(x) g(x) / π(φ⁻¹(η))`.
    pub fn pushforward<S: Scalar>(&self, space: &ConfigurationSpace, g: &[S]) -> Vec<S> {
        self.fibers
            .iter()
            .map(|fiber| {
                let total = fiber.iter().map(|&k| space.weight(k)).sum::<u64>();
                let s = fiber.iter().fold(S::zero(), |acc, &k| acc + S::of(space.weight(k) as usize) * g[k]);
                s / S::of(total as usize)
            })
            .collect()
    }

    /// `φ*φ_*` as an operator on the labelled space.
    pub fn projection<S: Scalar>(&self, space: &ConfigurationSpace) -> WeightedOperator<S> {
        let rows = (0..space.len())
            .map(|x| {
                let fiber = &self.fibers[self.image[x]];
                let total = fiber.iter().map(|&k| space.weight(k)).sum::<u64>();
                fiber.iter().map(|&y| (y, S::frac(space.weight(y) as usize, total as usize))).collect()
            })
            .collect();
        WeightedOperator::from_rows(rows).with_flags(false, true)
    }
}

/// Push a function down to unlabelled configurations or pull one back up.
pub fn colorblind_transport<S: Scalar>(
    space: &ConfigurationSpace,
    blind: &ColorblindSpace,
    direction: Transport,
    f: &[S],
) -> Vec<S> {
    match direction {
        Transport::Pushforward => blind.pushforward(space, f),
        Transport::Pullback => blind.pullback(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{assemble_generator, GeneratorPart, PairCoefficients};
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn image_of_two_pairs() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let blind = ColorblindSpace::new(&space);
        let x = space.index_of(&[1, 1, 3, 3]).unwrap();
        assert_eq!(blind.eta(blind.image(x)), &[0, 1, 0, 1]);
        // Number of multisets of size 2 on 4 sites.
        assert_eq!(blind.len(), 10);
    }

    #[test]
    fn constants_push_to_constants() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let blind = ColorblindSpace::new(&space);
        let ones = vec![Q::from_integer(7); space.len()];
        let pushed = colorblind_transport(&space, &blind, Transport::Pushforward, &ones);
        assert!(pushed.iter().all(|&v| v == Q::from_integer(7)));
        let back = colorblind_transport(&space, &blind, Transport::Pullback, &pushed);
        assert_eq!(back, ones);
    }

    #[test]
    fn projection_commutes_with_generator() {
        let space = ConfigurationSpace::enumerate(4, 4).unwrap();
        let blind = ColorblindSpace::new(&space);
        let p = blind.projection::<Q>(&space);
        assert_eq!(p.compose(&p), p);
        let c = PairCoefficients::<Q>::from_fn(4, |i, j| Q::new((3 * i + j + 2) as i64, 5)).unwrap();
        let b = assemble_generator(&space, &c, GeneratorPart::Full).unwrap();
        assert_eq!(b.commutator(&p).nnz(), 0);
    }
}
