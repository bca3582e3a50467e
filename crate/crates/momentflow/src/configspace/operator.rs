use faer::Mat;

use crate::configspace::ConfigurationSpace;
use crate::Scalar;

/// Sparse linear operator on functions over a configuration space.
///
/// Rows are stored in the function representation: `(Af)(x) = Σ_y A[x, y] f(y)`.
/// Each row keeps its entries sorted by column with no duplicates.
#[derive(Clone, Debug)]
pub struct WeightedOperator<S> {
    rows: Vec<Vec<(usize, S)>>,
    /// Zero row sums in the function representation.
    pub is_generator: bool,
    /// `Π A = Aᵀ Π`.
    pub is_pi_self_adjoint: bool,
}

/// Equality compares entries only; the structural flags are metadata.
impl<S: PartialEq> PartialEq for WeightedOperator<S> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl<S: Scalar> WeightedOperator<S> {
    pub fn from_rows(mut rows: Vec<Vec<(usize, S)>>) -> Self {
        for row in rows.iter_mut() {
            normalize_row(row);
        }
        WeightedOperator { rows, is_generator: false, is_pi_self_adjoint: false }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_rows(vec![Vec::new(); dim])
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::from_rows((0..dim).map(|k| vec![(k, S::one())]).collect());
        op.is_pi_self_adjoint = true;
        op
    }

    pub fn diagonal(values: &[S]) -> Self {
        let mut op = Self::from_rows(values.iter().enumerate().map(|(k, &v)| vec![(k, v)]).collect());
        op.is_pi_self_adjoint = true;
        op
    }

    pub fn with_flags(mut self, generator: bool, pi_self_adjoint: bool) -> Self {
        self.is_generator = generator;
        self.is_pi_self_adjoint = pi_self_adjoint;
        self
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, x: usize) -> &[(usize, S)] {
        &self.rows[x]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, x: usize, y: usize) -> S {
        match self.rows[x].binary_search_by_key(&y, |e| e.0) {
            Ok(k) => self.rows[x][k].1,
            Err(_) => S::zero(),
        }
    }

    pub fn apply(&self, f: &[S]) -> Vec<S> {
        assert_eq!(f.len(), self.dim());
        self.rows
            .iter()
            .map(|row| row.iter().fold(S::zero(), |acc, &(y, a)| acc + a * f[y]))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, a) in row {
                rows[y].push((x, a));
            }
        }
        Self::from_rows(rows)
    }

    pub fn scale(&self, c: S) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().map(|&(y, a)| (y, a * c)).collect()).collect();
        let mut op = Self::from_rows(rows);
        op.is_pi_self_adjoint = self.is_pi_self_adjoint;
        op.is_generator = self.is_generator;
        op
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -S::one())
    }

    fn combine(&self, other: &Self, c: S) -> Self {
        assert_eq!(self.dim(), other.dim());
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut r = a.clone();
                r.extend(b.iter().map(|&(y, v)| (y, v * c)));
                r
            })
            .collect();
        Self::from_rows(rows)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = Vec::new();
                for &(z, a) in row {
                    acc.extend(other.rows[z].iter().map(|&(y, b)| (y, a * b)));
                }
                acc
            })
            .collect();
        Self::from_rows(rows)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|&(_, a)| a.abs().as_f64()).fold(0.0, f64::max)
    }

    /// Largest absolute row sum, the ∞→∞ norm in the function representation.
    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, a)| a.abs().as_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max deviation from `Π A = Aᵀ Π`, i.e. of `π(x) A[x,y] − π(y) A[y,x]`.
    pub fn reversibility_defect(&self, space: &ConfigurationSpace) -> f64 {
        let pi = space.pi::<S>();
        let mut worst = 0.0f64;
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, a) in row {
                let d = pi[x] * a - pi[y] * self.entry(y, x);
                worst = worst.max(d.abs().as_f64());
            }
        }
        worst
    }

    /// Largest absolute row sum of the operator, zero for a generator.
    pub fn row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().fold(S::zero(), |acc, &(_, a)| acc + a).abs().as_f64())
            .fold(0.0, f64::max)
    }

    /// Restriction to the listed states (rows and columns, in the given order).
    pub fn restrict(&self, states: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &s) in states.iter().enumerate() {
            pos[s] = k;
        }
        let rows = states
            .iter()
            .map(|&s| {
                self.rows[s]
                    .iter()
                    .filter(|e| pos[e.0] != usize::MAX)
                    .map(|&(y, a)| (pos[y], a))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> WeightedOperator<T> {
        WeightedOperator {
            rows: self.rows.iter().map(|r| r.iter().map(|&(y, a)| (y, f(a))).collect()).collect(),
            is_generator: self.is_generator,
            is_pi_self_adjoint: self.is_pi_self_adjoint,
        }
    }

    pub fn to_f64(&self) -> WeightedOperator<f64> {
        self.map_scalar(|a| a.as_f64())
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, a) in row {
                m[(x, y)] = a.as_f64();
            }
        }
        m
    }

    /// Triplet text export, one `row col value` line per stored entry.
    pub fn to_triplets(&self) -> String {
        let mut out = String::new();
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, a) in row {
                out.push_str(&format!("{x} {y} {:?}\n", a.as_f64()));
            }
        }
        out
    }
}

fn normalize_row<S: Scalar>(row: &mut Vec<(usize, S)>) {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, S)> = Vec::with_capacity(row.len());
    for &(y, a) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == y => last.1 = last.1 + a,
            _ => out.push((y, a)),
        }
    }
    out.retain(|e| !e.1.is_zero());
    *row = out;
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(a: i64, b: i64) -> Q {
        Ratio::new(a, b)
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let op = WeightedOperator::from_rows(vec![vec![(1, q(1, 2)), (0, q(1, 3)), (1, q(-1, 2))], vec![]]);
        assert_eq!(op.row(0), &[(0, q(1, 3))]);
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn compose_and_commutator() {
        let a = WeightedOperator::from_rows(vec![vec![(1, q(1, 1))], vec![]]);
        let b = WeightedOperator::from_rows(vec![vec![], vec![(0, q(1, 1))]]);
        let ab = a.compose(&b);
        assert_eq!(ab.entry(0, 0), q(1, 1));
        assert_eq!(ab.entry(1, 1), q(0, 1));
        let c = a.commutator(&b);
        assert_eq!(c.entry(0, 0), q(1, 1));
        assert_eq!(c.entry(1, 1), q(-1, 1));
    }

    #[test]
    fn transpose_and_apply() {
        let a = WeightedOperator::from_rows(vec![vec![(0, 1.0), (1, 2.0)], vec![(1, 3.0)]]);
        assert_eq!(a.apply(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.transpose().apply(&[1.0, 1.0]), vec![1.0, 5.0]);
        assert_eq!(a.to_triplets(), "0 0 1.0\n0 1 2.0\n1 1 3.0\n");
    }

    #[test]
    fn restrict_keeps_order() {
        let a = WeightedOperator::from_rows(vec![
            vec![(0, 1.0), (2, 5.0)],
            vec![(1, 2.0)],
            vec![(0, 7.0), (2, 3.0)],
        ]);
        let r = a.restrict(&[2, 0]);
        assert_eq!(r.row(0), &[(0, 3.0), (1, 7.0)]);
        assert_eq!(r.row(1), &[(0, 5.0), (1, 1.0)]);
    }
}
