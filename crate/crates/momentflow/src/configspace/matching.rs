use std::fmt;

use crate::configspace::Configuration;

/// Fixed-point-free involution of the labels `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PerfectMatching(Vec<usize>);

impl PerfectMatching {
    /// Checked constructor from the involution table.
    pub fn new(partner: Vec<usize>) -> Option<Self> {
        let n = partner.len();
        let ok = partner.iter().enumerate().all(|(a, &b)| b < n && b != a && partner[b] == a);
        ok.then_some(PerfectMatching(partner))
    }

    pub fn partner(&self, a: usize) -> usize {
        self.0[a]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Pairs `(a, σ(a))` with `a < σ(a)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().filter(|(a, &b)| *a < b).map(|(a, &b)| (a, b))
    }

    pub fn stabilizes(&self, x: &Configuration) -> bool {
        self.pairs().all(|(a, b)| x[a] == x[b])
    }
}

impl fmt::Display for PerfectMatching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            write!(f, "({a} {b})")?;
        }
        Ok(())
    }
}

/// All perfect matchings of `n` labels, optionally only those stabilizing `x`.
/// The lowest unmatched label is paired first, which fixes the order.
pub fn matchings(n: usize, stabilizing: Option<&Configuration>) -> Vec<PerfectMatching> {
    let mut out = Vec::new();
    if n % 2 != 0 {
        return out;
    }
    let mut partner = vec![usize::MAX; n];
    build(&mut partner, stabilizing, &mut out);
    out
}

fn build(partner: &mut Vec<usize>, x: Option<&Configuration>, out: &mut Vec<PerfectMatching>) {
    let Some(a) = partner.iter().position(|&p| p == usize::MAX) else {
        out.push(PerfectMatching(partner.clone()));
        return;
    };
    for b in a + 1..partner.len() {
        if partner[b] != usize::MAX || x.is_some_and(|x| x[a] != x[b]) {
            continue;
        }
        partner[a] = b;
        partner[b] = a;
        build(partner, x, out);
        partner[a] = usize::MAX;
        partner[b] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{df, ConfigurationSpace};

    #[test]
    fn four_labels_have_three_matchings() {
        let all: Vec<String> = matchings(4, None).iter().map(|m| m.to_string()).collect();
        assert_eq!(all, ["(0 1)(2 3)", "(0 2)(1 3)", "(0 3)(1 2)"]);
        assert_eq!(matchings(6, None).len() as u64, df(6));
    }

    #[test]
    fn stabilizer_of_two_pairs() {
        let x = Configuration(vec![0, 0, 1, 1]);
        let st = matchings(4, Some(&x));
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].as_slice(), &[1, 0, 3, 2]);
    }

    #[test]
    fn stabilizer_count_is_sqrt_weight() {
        let space = ConfigurationSpace::enumerate(6, 4).unwrap();
        for (k, x) in space.configs().iter().enumerate() {
            assert_eq!(matchings(4, Some(x)).len() as u64, space.sqrt_weight(k));
        }
    }

    #[test]
    fn constructor_rejects_non_involutions() {
        assert!(PerfectMatching::new(vec![1, 0]).is_some());
        assert!(PerfectMatching::new(vec![0, 1]).is_none());
        assert!(PerfectMatching::new(vec![1, 2, 0]).is_none());
    }
}
