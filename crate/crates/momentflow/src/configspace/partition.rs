use std::fmt;

use crate::configspace::{Configuration, ConfigurationSpace, WeightedOperator};
use crate::Scalar;

/// Set partition of the labels `0..n`, blocks sorted by smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Checked constructor; blocks are normalized.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Option<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return None;
            }
            for &a in b {
                if a >= n || seen[a] {
                    return None;
                }
                seen[a] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return None;
        }
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        Some(Partition { n, blocks })
    }

    pub fn singletons(n: usize) -> Self {
        Partition { n, blocks: (0..n).map(|a| vec![a]).collect() }
    }

    pub fn whole(n: usize) -> Self {
        Partition { n, blocks: vec![(0..n).collect()] }
    }

    /// Labels at the same site share a block.
    pub fn of_positions(x: &Configuration) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut site_block: Vec<(usize, usize)> = Vec::new();
        for (a, &p) in x.iter().enumerate() {
            match site_block.iter().find(|e| e.0 == p) {
                Some(&(_, k)) => blocks[k].push(a),
                None => {
                    site_block.push((p, blocks.len()));
                    blocks.push(vec![a]);
                }
            }
        }
        Partition::new(x.len(), blocks).expect("positions define a partition")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n];
        for (k, b) in self.blocks.iter().enumerate() {
            for &a in b {
                owner[a] = k;
            }
        }
        owner
    }

    /// Refinement order: every block of `self` sits inside a block of `other`.
    pub fn le(&self, other: &Partition) -> bool {
        let owner = other.block_of();
        self.blocks.iter().all(|b| b.iter().all(|&a| owner[a] == owner[b[0]]))
    }

    /// Permutations mapping every label into its own block.
    pub fn compatible_permutations(&self) -> Vec<Vec<usize>> {
        let mut out = vec![(0..self.n).collect::<Vec<_>>()];
        for block in &self.blocks {
            let perms = permutations(block);
            let mut next = Vec::with_capacity(out.len() * perms.len());
            for base in &out {
                for p in &perms {
                    let mut s = base.clone();
                    for (&from, &to) in block.iter().zip(p) {
                        s[from] = to;
                    }
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{{{}}}", parts.join("|"))
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All set partitions of `0..n` (Bell many), by restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    grow(1, 0, &mut rgs, &mut out);
    out
}

fn grow(k: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Partition>) {
    let n = rgs.len();
    if n == 0 || k == n {
        let blocks_count = if n == 0 { 0 } else { max + 1 };
        let mut blocks = vec![Vec::new(); blocks_count];
        for (a, &b) in rgs.iter().enumerate() {
            blocks[b].push(a);
        }
        out.push(Partition::new(n, blocks).expect("growth string gives a partition"));
        return;
    }
    for b in 0..=max + 1 {
        rgs[k] = b;
        grow(k + 1, max.max(b), rgs, out);
    }
    rgs[k] = 0;
}

/// `E^P f(x) = |S_P|^{-1} Σ_{σ ∈ S_P} f(σ⊙x)`.
pub fn conditional_expectation<S: Scalar>(space: &ConfigurationSpace, p: &Partition) -> WeightedOperator<S> {
    let perms = p.compatible_permutations();
    let w = S::one() / S::of(perms.len());
    let rows = space
        .configs()
        .iter()
        .map(|x| {
            perms
                .iter()
                .map(|s| (space.index_of(&x.act(s)).expect("label action preserves the space"), w))
                .collect()
        })
        .collect();
    WeightedOperator::from_rows(rows).with_flags(false, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn refinement_order() {
        let fine = Partition::new(4, vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        let coarse = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(fine.le(&coarse));
        assert!(!coarse.le(&fine));
        assert!(Partition::singletons(4).le(&fine));
        assert!(fine.le(&Partition::whole(4)));
    }

    #[test]
    fn position_partition() {
        let p = Partition::of_positions(&Configuration(vec![5, 2, 5, 2]));
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn compatible_permutation_counts() {
        let p = Partition::new(5, vec![vec![0, 3], vec![1, 2, 4]]).unwrap();
        assert_eq!(p.compatible_permutations().len(), 12);
        assert_eq!(Partition::whole(4).compatible_permutations().len(), 24);
    }

    #[test]
    fn singleton_expectation_is_identity() {
        let space = ConfigurationSpace::enumerate(3, 4).unwrap();
        let e = conditional_expectation::<Q>(&space, &Partition::singletons(4));
        assert_eq!(e, WeightedOperator::identity(space.len()).with_flags(false, true));
    }

    #[test]
    fn expectations_are_projections() {
        let space = ConfigurationSpace::enumerate(3, 4).unwrap();
        for p in set_partitions(4) {
            let e = conditional_expectation::<Q>(&space, &p);
            assert_eq!(e.compose(&e), e, "{p}");
            assert_eq!(e.reversibility_defect(&space), 0.0);
        }
    }

    #[test]
    fn whole_partition_averages_label_orbit() {
        let space = ConfigurationSpace::enumerate(2, 4).unwrap();
        let e = conditional_expectation::<Q>(&space, &Partition::whole(4));
        let x = space.index_of(&[0, 0, 1, 1]).unwrap();
        // The orbit of (0,0,1,1) has 6 elements, each reached by 4 permutations.
        assert_eq!(e.row(x).len(), 6);
        assert!(e.row(x).iter().all(|&(_, w)| w == Q::new(1, 6)));
    }
}
