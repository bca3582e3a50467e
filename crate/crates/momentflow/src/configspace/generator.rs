use serde::{Deserialize, Serialize};

use crate::configspace::{ConfigurationSpace, WeightedOperator};
use crate::error::{Error, Result};
use crate::Scalar;

/// Symmetric nonnegative site-pair coefficients `c_ij` with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCoefficients<S> {
    sites: usize,
    values: Vec<S>,
}

impl<S: Scalar> PairCoefficients<S> {
    /// Build from `c(i, j)` evaluated for `i < j`.
    pub fn from_fn(sites: usize, mut c: impl FnMut(usize, usize) -> S) -> Result<Self> {
        let mut values = vec![S::zero(); sites * sites];
        for i in 0..sites {
            for j in i + 1..sites {
                let v = c(i, j);
                if v < S::zero() {
                    return Err(Error::NegativeCoefficient { i, j, value: v.as_f64() });
                }
                values[i * sites + j] = v;
                values[j * sites + i] = v;
            }
        }
        Ok(PairCoefficients { sites, values })
    }

    /// Build from a full matrix, checking symmetry, sign and the diagonal.
    pub fn from_matrix(sites: usize, values: Vec<S>) -> Result<Self> {
        if values.len() != sites * sites {
            return Err(Error::InvalidArgument("coefficient matrix has wrong size".into()));
        }
        for i in 0..sites {
            if !values[i * sites + i].is_zero() {
                return Err(Error::InvalidArgument(format!("nonzero diagonal coefficient at {i}")));
            }
            for j in 0..sites {
                let v = values[i * sites + j];
                if v < S::zero() {
                    return Err(Error::NegativeCoefficient { i, j, value: v.as_f64() });
                }
                if v != values[j * sites + i] {
                    return Err(Error::InvalidArgument(format!("coefficients not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(PairCoefficients { sites, values })
    }

    /// Only the pair `{i, j}` switched on, with unit weight.
    pub fn single_pair(sites: usize, i: usize, j: usize) -> Self {
        let mut values = vec![S::zero(); sites * sites];
        values[i * sites + j] = S::one();
        values[j * sites + i] = S::one();
        PairCoefficients { sites, values }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.values[i * self.sites + j]
    }

    pub fn scaled(&self, c: S) -> Self {
        PairCoefficients { sites: self.sites, values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> PairCoefficients<T> {
        PairCoefficients { sites: self.sites, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorPart {
    Full,
    MoveOnly,
    ExchangeOnly,
}

/// Assemble `Σ_{i<j} c_ij · part_ij` in the function representation.
///
/// The move part relocates an ordered label pair sharing site `p` to `q` at rate
/// `c_pq (n_q + 1)/(n_p − 1)`. The exchange part swaps every label pair sitting
/// on distinct sites `{p, q}` at rate `2 c_pq`. `Full` is move minus exchange;
/// `ExchangeOnly` returns the exchange operator itself.
pub fn assemble_generator<S: Scalar>(
    space: &ConfigurationSpace,
    coeffs: &PairCoefficients<S>,
    part: GeneratorPart,
) -> Result<WeightedOperator<S>> {
    if coeffs.sites() != space.sites() {
        return Err(Error::InvalidArgument(format!(
            "coefficients cover {} sites, space has {}",
            coeffs.sites(),
            space.sites()
        )));
    }
    let with_move = part != GeneratorPart::ExchangeOnly;
    let with_exchange = part != GeneratorPart::MoveOnly;
    let exchange_sign = if part == GeneratorPart::Full { -S::one() } else { S::one() };
    let two = S::of(2);
    let sites = space.sites();
    let n = space.particles();
    let mut rows = Vec::with_capacity(space.len());
    for x in space.configs() {
        let occ = x.occupancies(sites);
        let mut row: Vec<(usize, S)> = Vec::new();
        let mut diag = S::zero();
        if with_move {
            for a in 0..n {
                for b in 0..n {
                    if a == b || x[a] != x[b] {
                        continue;
                    }
                    let p = x[a];
                    for q in 0..sites {
                        let c = coeffs.get(p, q);
                        if q == p || c.is_zero() {
                            continue;
                        }
                        let rate = c * S::frac(occ[q] + 1, occ[p] - 1);
                        let y = x.moved(a, b, p, q);
                        row.push((space.index_of(&y).expect("move leaves the even sector"), rate));
                        diag = diag - rate;
                    }
                }
            }
        }
        if with_exchange {
            for a in 0..n {
                for b in a + 1..n {
                    let (p, q) = (x[a], x[b]);
                    let c = coeffs.get(p, q);
                    if p == q || c.is_zero() {
                        continue;
                    }
                    let rate = exchange_sign * two * c;
                    let y = x.swapped(a, b, p, q);
                    row.push((space.index_of(&y).expect("swap leaves the even sector"), rate));
                    diag = diag - rate;
                }
            }
        }
        let k = space.index_of(x).expect("configuration belongs to its space");
        row.push((k, diag));
        rows.push(row);
    }
    Ok(WeightedOperator::from_rows(rows).with_flags(true, true))
}

/// The single-pair operator `B_ij` (or its move/exchange part).
pub fn pair_generator<S: Scalar>(
    space: &ConfigurationSpace,
    i: usize,
    j: usize,
    part: GeneratorPart,
) -> Result<WeightedOperator<S>> {
    assemble_generator(space, &PairCoefficients::single_pair(space.sites(), i, j), part)
}
