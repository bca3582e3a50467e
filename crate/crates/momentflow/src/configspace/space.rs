use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest configuration space `enumerate_space` will build.
pub const SPACE_GUARD: usize = 1_000_000;

/// Odd double factorial `1·3·…·(k−1)`, so `df(0) = df(2) = 1`, `df(4) = 3`, `df(6) = 15`.
/// For even `k` this is the number of perfect matchings of `k` labels.
pub fn df(k: usize) -> u64 {
    (1..k).step_by(2).map(|m| m as u64).product()
}

/// Particle positions indexed by label. Sites are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn new(positions: Vec<usize>) -> Self {
        Configuration(positions)
    }

    pub fn particles(&self) -> usize {
        self.0.len()
    }

    pub fn occupancy(&self, site: usize) -> usize {
        self.0.iter().filter(|&&p| p == site).count()
    }

    /// Occupancy numbers of all sites `0..sites`.
    pub fn occupancies(&self, sites: usize) -> Vec<usize> {
        let mut occ = vec![0; sites];
        for &p in &self.0 {
            occ[p] += 1;
        }
        occ
    }

    pub fn is_even(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.chunk_by(|a, b| a == b).all(|run| run.len() % 2 == 0)
    }

    /// `∏ df(n_i)²`.
    pub fn weight(&self) -> u64 {
        let s = self.sqrt_weight();
        s * s
    }

    /// `∏ df(n_i)`, the number of perfect matchings stabilizing the configuration.
    pub fn sqrt_weight(&self) -> u64 {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.chunk_by(|a, b| a == b).map(|run| df(run.len())).product()
    }

    /// Label action `(σ⊙x)_a = x_{σ(a)}`.
    pub fn act(&self, sigma: &[usize]) -> Configuration {
        Configuration(sigma.iter().map(|&a| self.0[a]).collect())
    }

    /// Relabel sites by `tau`.
    pub fn map_sites(&self, tau: &[usize]) -> Configuration {
        Configuration(self.0.iter().map(|&p| tau[p]).collect())
    }

    /// Move particles `a` and `b` from `i` to `j` when both sit at `i`.
    pub fn moved(&self, a: usize, b: usize, i: usize, j: usize) -> Configuration {
        let mut y = self.clone();
        if self.0[a] == i && self.0[b] == i {
            y.0[a] = j;
            y.0[b] = j;
        }
        y
    }

    /// Swap particle `a` at `i` with particle `b` at `j`.
    pub fn swapped(&self, a: usize, b: usize, i: usize, j: usize) -> Configuration {
        let mut y = self.clone();
        if self.0[a] == i && self.0[b] == j {
            y.0[a] = j;
            y.0[b] = i;
        }
        y
    }

    pub fn l1_distance(&self, other: &Configuration) -> usize {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a.abs_diff(b)).sum()
    }
}

impl Deref for Configuration {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Configuration {
    fn from(v: Vec<usize>) -> Self {
        Configuration(v)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpKind {
    Move,
    Swap,
}

pub fn jump(x: &Configuration, kind: JumpKind, a: usize, b: usize, i: usize, j: usize) -> Result<Configuration> {
    if a == b {
        return Err(Error::InvalidArgument("jump labels must differ".into()));
    }
    Ok(match kind {
        JumpKind::Move => x.moved(a, b, i, j),
        JumpKind::Swap => x.swapped(a, b, i, j),
    })
}

/// Even configurations of `n` labelled particles on `N` sites, with weights.
#[derive(Clone, Debug)]
pub struct ConfigurationSpace {
    sites: usize,
    particles: usize,
    configs: Vec<Configuration>,
    weights: Vec<u64>,
    sqrt_weights: Vec<u64>,
    index: HashMap<u64, usize>,
}

/// Exact size of the even sector, `2^{-N} Σ_k C(N,k) (N−2k)^n`, in floating point.
pub fn space_size_estimate(sites: usize, particles: usize) -> f64 {
    let n = sites as f64;
    let mut total = 0.0;
    let mut binom = 1.0;
    for k in 0..=sites {
        total += binom * (n - 2.0 * k as f64).powi(particles as i32);
        binom *= (n - k as f64) / (k as f64 + 1.0);
    }
    total / 2f64.powi(sites as i32)
}

impl ConfigurationSpace {
    pub fn enumerate(sites: usize, particles: usize) -> Result<Self> {
        Self::enumerate_with_guard(sites, particles, SPACE_GUARD)
    }

    pub fn enumerate_with_guard(sites: usize, particles: usize, guard: usize) -> Result<Self> {
        if particles % 2 != 0 {
            return Err(Error::InvalidArgument(format!("particle number {particles} is odd")));
        }
        if sites == 0 {
            return Err(Error::InvalidArgument("need at least one site".into()));
        }
        if (sites as f64).powi(particles as i32) >= 2f64.powi(63) {
            return Err(Error::SpaceTooLarge { estimate: space_size_estimate(sites, particles), guard });
        }
        let estimate = space_size_estimate(sites, particles);
        if estimate > guard as f64 + 0.5 {
            return Err(Error::SpaceTooLarge { estimate, guard });
        }
        let mut configs = Vec::with_capacity(estimate.round() as usize);
        let mut current = vec![0usize; particles];
        let mut parity = vec![false; sites];
        fill(0, &mut current, &mut parity, 0, &mut configs);
        let mut space = ConfigurationSpace {
            sites,
            particles,
            weights: Vec::with_capacity(configs.len()),
            sqrt_weights: Vec::with_capacity(configs.len()),
            index: HashMap::with_capacity(configs.len()),
            configs: Vec::new(),
        };
        for (k, x) in configs.iter().enumerate() {
            let s = x.sqrt_weight();
            space.sqrt_weights.push(s);
            space.weights.push(s * s);
            space.index.insert(space.key(x), k);
        }
        space.configs = configs;
        Ok(space)
    }

    fn key(&self, x: &[usize]) -> u64 {
        x.iter().rev().fold(0u64, |acc, &p| acc * self.sites as u64 + p as u64)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn config(&self, k: usize) -> &Configuration {
        &self.configs[k]
    }

    pub fn index_of(&self, x: &[usize]) -> Option<usize> {
        if x.len() != self.particles || x.iter().any(|&p| p >= self.sites) {
            return None;
        }
        self.index.get(&self.key(x)).copied()
    }

    /// `π` as integers.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> u64 {
        self.weights[k]
    }

    pub fn sqrt_weight(&self, k: usize) -> u64 {
        self.sqrt_weights[k]
    }

    pub fn pi<S: crate::Scalar>(&self) -> Vec<S> {
        self.weights.iter().map(|&w| S::of(w as usize)).collect()
    }

    /// `δ_x(y) = 1{x = y}/π(x)`, so that `⟨δ_x, f⟩_π = f(x)`.
    pub fn delta<S: crate::Scalar>(&self, k: usize) -> Vec<S> {
        let mut f = vec![S::zero(); self.len()];
        f[k] = S::one() / S::of(self.weights[k] as usize);
        f
    }

    /// `⟨f, g⟩_π = Σ π f g`.
    pub fn inner<S: crate::Scalar>(&self, f: &[S], g: &[S]) -> S {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .fold(S::zero(), |acc, (&w, (&a, &b))| acc + S::of(w as usize) * a * b)
    }

    pub fn norm2(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn norm1(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(&w, v)| w as f64 * v.abs()).sum()
    }

    /// Configurations as CSV: `index,x1,…,xn,pi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index");
        for a in 1..=self.particles {
            out.push_str(&format!(",x{a}"));
        }
        out.push_str(",pi\n");
        for (k, x) in self.configs.iter().enumerate() {
            out.push_str(&k.to_string());
            for p in x.iter() {
                out.push_str(&format!(",{p}"));
            }
            out.push_str(&format!(",{}\n", self.weights[k]));
        }
        out
    }
}

// Lexicographic depth-first fill, pruned when the remaining labels cannot
// pair up the currently odd sites.
fn fill(depth: usize, cur: &mut Vec<usize>, parity: &mut [bool], odd: usize, out: &mut Vec<Configuration>) {
    let n = cur.len();
    if depth == n {
        if odd == 0 {
            out.push(Configuration(cur.clone()));
        }
        return;
    }
    let remaining = n - depth - 1;
    for p in 0..parity.len() {
        let new_odd = if parity[p] { odd - 1 } else { odd + 1 };
        if new_odd > remaining {
            continue;
        }
        parity[p] = !parity[p];
        cur[depth] = p;
        fill(depth + 1, cur, parity, new_odd, out);
        parity[p] = !parity[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(sites: usize, n: usize) -> Vec<Configuration> {
        let total = sites.pow(n as u32);
        (0..total)
            .map(|mut k| {
                let mut x = vec![0; n];
                for slot in x.iter_mut().rev() {
                    *slot = k % sites;
                    k /= sites;
                }
                Configuration(x)
            })
            .filter(|x| x.is_even())
            .collect()
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!([df(0), df(2), df(4), df(6), df(8)], [1, 1, 3, 15, 105]);
    }

    #[test]
    fn two_sites_two_particles() {
        let s = ConfigurationSpace::enumerate(2, 2).unwrap();
        assert_eq!(s.configs(), &[Configuration(vec![0, 0]), Configuration(vec![1, 1])]);
        assert_eq!(s.weights(), &[1, 1]);
    }

    #[test]
    fn four_particles_ten_sites_matches_brute_force() {
        let s = ConfigurationSpace::enumerate(10, 4).unwrap();
        let brute = brute_force(10, 4);
        assert_eq!(s.len(), 280);
        assert_eq!(s.configs(), brute.as_slice());
        assert_eq!(space_size_estimate(10, 4).round() as usize, 280);
    }

    #[test]
    fn enumeration_matches_brute_force_small_cases() {
        for (sites, n) in [(1, 2), (3, 2), (4, 4), (3, 6), (5, 4)] {
            let s = ConfigurationSpace::enumerate(sites, n).unwrap();
            assert_eq!(s.configs(), brute_force(sites, n).as_slice(), "N={sites} n={n}");
            for (k, x) in s.configs().iter().enumerate() {
                assert_eq!(s.index_of(x), Some(k));
            }
        }
    }

    #[test]
    fn weight_of_quadruple_site() {
        assert_eq!(Configuration(vec![2, 2, 2, 2]).weight(), 9);
        assert_eq!(Configuration(vec![0, 0, 0, 0, 0, 0]).weight(), 225);
        assert_eq!(Configuration(vec![0, 0, 1, 1]).weight(), 1);
    }

    #[test]
    fn guard_rejects_large_spaces() {
        assert!(matches!(
            ConfigurationSpace::enumerate_with_guard(50, 6, 1000),
            Err(Error::SpaceTooLarge { .. })
        ));
        assert!(ConfigurationSpace::enumerate(4, 3).is_err());
    }

    #[test]
    fn jumps() {
        let (i, j) = (0, 1);
        let x = Configuration(vec![i, i, j, j]);
        assert_eq!(jump(&x, JumpKind::Move, 0, 1, i, j).unwrap(), Configuration(vec![j, j, j, j]));
        assert_eq!(jump(&x, JumpKind::Swap, 0, 2, i, j).unwrap(), Configuration(vec![j, i, i, j]));
        assert_eq!(jump(&x, JumpKind::Move, 2, 3, i, j).unwrap(), x);
        assert!(jump(&x, JumpKind::Swap, 1, 1, i, j).is_err());
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let s = ConfigurationSpace::enumerate(2, 2).unwrap();
        assert_eq!(s.to_csv(), "index,x1,x2,pi\n0,0,0,1\n1,1,1,1\n");
    }
}
