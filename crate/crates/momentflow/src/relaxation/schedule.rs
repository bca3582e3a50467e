use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;

use crate::configspace::{assemble_generator, ConfigurationSpace, GeneratorPart, PairCoefficients};
use crate::error::{Error, Result};
use crate::Operator;

type Evaluator = Arc<dyn Fn(f64, usize, usize) -> f64 + Send + Sync>;

/// Which cutoff, if any, was applied to the underlying coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "variant")]
pub enum ScheduleTag {
    Full,
    ShortRange { ell: usize, window: (usize, usize) },
    Lattice { ell: usize, window: (usize, usize) },
}

impl fmt::Display for ScheduleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleTag::Full => write!(f, "full"),
            ScheduleTag::ShortRange { ell, window } => write!(f, "short-range(ell={ell};{}..{})", window.0, window.1),
            ScheduleTag::Lattice { ell, window } => write!(f, "lattice(ell={ell};{}..{})", window.0, window.1),
        }
    }
}

/// Time-dependent symmetric nonnegative coefficients `c_ij(s)` on `sites`
/// sites. Breakpoints mark where a piecewise-constant schedule changes; a
/// schedule with `time_constant` set has none.
#[derive(Clone)]
pub struct CoefficientSchedule {
    sites: usize,
    eval: Evaluator,
    time_constant: bool,
    breakpoints: Vec<f64>,
    upsilon: Option<f64>,
    tag: ScheduleTag,
}

impl fmt::Debug for CoefficientSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSchedule")
            .field("sites", &self.sites)
            .field("time_constant", &self.time_constant)
            .field("breakpoints", &self.breakpoints)
            .field("upsilon", &self.upsilon)
            .field("tag", &self.tag)
            .finish()
    }
}

impl CoefficientSchedule {
    /// `c_ij = υ |i − j|^{-2}`, declaring decay rate `υ`.
    pub fn power_law(sites: usize, upsilon: f64) -> Self {
        let mut s = Self::from_fn(sites, true, move |_, i, j| {
            let d = i.abs_diff(j) as f64;
            upsilon / (d * d)
        });
        s.upsilon = Some(upsilon);
        s
    }

    pub fn constant(coeffs: PairCoefficients<f64>) -> Self {
        let sites = coeffs.sites();
        Self::from_fn(sites, true, move |_, i, j| coeffs.get(i, j))
    }

    /// Arbitrary evaluator, symmetrized by only ever being called with `i < j`.
    pub fn from_fn(sites: usize, time_constant: bool, f: impl Fn(f64, usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        CoefficientSchedule {
            sites,
            eval: Arc::new(move |s, i, j| if i < j { f(s, i, j) } else { f(s, j, i) }),
            time_constant,
            breakpoints: Vec::new(),
            upsilon: None,
            tag: ScheduleTag::Full,
        }
    }

    /// `pieces[k]` holds on `[breaks[k−1], breaks[k])`; `breaks` is increasing
    /// and one shorter than `pieces`.
    pub fn piecewise(breaks: Vec<f64>, pieces: Vec<PairCoefficients<f64>>) -> Result<Self> {
        if pieces.is_empty() || breaks.len() + 1 != pieces.len() || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("piecewise schedule needs increasing breaks, one fewer than pieces".into()));
        }
        let sites = pieces[0].sites();
        if pieces.iter().any(|p| p.sites() != sites) {
            return Err(Error::InvalidArgument("pieces disagree on the number of sites".into()));
        }
        let b = breaks.clone();
        let mut s = Self::from_fn(sites, pieces.len() == 1, move |s, i, j| {
            let k = b.partition_point(|&t| t <= s);
            pieces[k].get(i, j)
        });
        s.breakpoints = breaks;
        Ok(s)
    }

    /// Declare a decay rate for the heavy-tail assumption.
    pub fn with_upsilon(mut self, upsilon: f64) -> Self {
        self.upsilon = Some(upsilon);
        self
    }

    /// Keep `c_ij` when `|i − j| ≤ ℓ` and both sites lie in `window`; zero
    /// otherwise.
    pub fn short_range(&self, ell: usize, window: Range<usize>) -> Self {
        let inner = self.eval.clone();
        let w = window.clone();
        CoefficientSchedule {
            sites: self.sites,
            eval: Arc::new(move |s, i, j| {
                if i.abs_diff(j) <= ell && w.contains(&i) && w.contains(&j) {
                    inner(s, i, j)
                } else {
                    0.0
                }
            }),
            time_constant: self.time_constant,
            breakpoints: self.breakpoints.clone(),
            upsilon: None,
            tag: ScheduleTag::ShortRange { ell, window: (window.start, window.end) },
        }
    }

    /// Keep `c_ij` when `|i − j| ≤ ℓ` and both sites lie in `window`; use
    /// `N/|i − j|²` otherwise.
    pub fn lattice(&self, ell: usize, window: Range<usize>) -> Self {
        let inner = self.eval.clone();
        let w = window.clone();
        let n = self.sites as f64;
        CoefficientSchedule {
            sites: self.sites,
            eval: Arc::new(move |s, i, j| {
                if i.abs_diff(j) <= ell && w.contains(&i) && w.contains(&j) {
                    inner(s, i, j)
                } else {
                    let d = i.abs_diff(j) as f64;
                    n / (d * d)
                }
            }),
            time_constant: self.time_constant,
            breakpoints: self.breakpoints.clone(),
            upsilon: None,
            tag: ScheduleTag::Lattice { ell, window: (window.start, window.end) },
        }
    }

    /// All coefficients multiplied by `k > 0`; a declared rate scales too.
    pub fn scaled(&self, k: f64) -> Self {
        let inner = self.eval.clone();
        CoefficientSchedule {
            eval: Arc::new(move |s, i, j| k * inner(s, i, j)),
            upsilon: self.upsilon.map(|u| u * k),
            ..self.clone()
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn is_time_constant(&self) -> bool {
        self.time_constant
    }

    /// Constant on each interval between breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        self.time_constant || !self.breakpoints.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn upsilon(&self) -> Option<f64> {
        self.upsilon
    }

    pub fn tag(&self) -> &ScheduleTag {
        &self.tag
    }

    pub fn get(&self, s: f64, i: usize, j: usize) -> f64 {
        (self.eval)(s, i, j)
    }

    pub fn coefficients_at(&self, s: f64) -> Result<PairCoefficients<f64>> {
        PairCoefficients::from_fn(self.sites, |i, j| self.get(s, i, j))
    }

    pub fn generator_at(&self, space: &ConfigurationSpace, s: f64, part: GeneratorPart) -> Result<Operator> {
        if space.sites() != self.sites {
            return Err(Error::InvalidArgument(format!("schedule has {} sites, space has {}", self.sites, space.sites())));
        }
        assemble_generator(space, &self.coefficients_at(s)?, part)
    }

    /// Check `c_ij(s) ≥ υ|i − j|^{-2}` at the given times; false when no rate
    /// is declared.
    pub fn heavytail_holds(&self, times: &[f64]) -> bool {
        let Some(u) = self.upsilon else { return false };
        times.iter().all(|&s| {
            (0..self.sites).all(|i| {
                (i + 1..self.sites).all(|j| {
                    let d = (j - i) as f64;
                    self.get(s, i, j) >= u / (d * d) * (1.0 - 1e-12)
                })
            })
        })
    }

    /// The declared rate, provided the heavy-tail bound holds at `times`.
    pub fn require_heavytail(&self, times: &[f64]) -> Result<f64> {
        match self.upsilon {
            Some(u) if self.heavytail_holds(times) => Ok(u),
            Some(u) => Err(Error::InvalidArgument(format!("coefficients fall below {u}·|i−j|^-2; heavy-tail bound not applicable"))),
            None => Err(Error::InvalidArgument("no decay rate declared for the heavy-tail bound".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_values_and_symmetry() {
        let s = CoefficientSchedule::power_law(6, 2.0);
        assert_eq!(s.get(0.0, 1, 3), 0.5);
        assert_eq!(s.get(0.3, 3, 1), 0.5);
        assert!(s.heavytail_holds(&[0.0, 1.0]));
        assert_eq!(s.scaled(2.0).upsilon(), Some(4.0));
    }

    #[test]
    fn cutoffs() {
        let s = CoefficientSchedule::power_law(10, 1.0);
        let short = s.short_range(2, 1..9);
        assert_eq!(short.get(0.0, 1, 3), 0.25);
        assert_eq!(short.get(0.0, 1, 4), 0.0);
        assert_eq!(short.get(0.0, 0, 1), 0.0);
        assert!(!short.heavytail_holds(&[0.0]));
        let latt = s.scaled(3.0).lattice(2, 1..9);
        assert_eq!(latt.get(0.0, 1, 3), 0.75);
        assert_eq!(latt.get(0.0, 0, 5), 10.0 / 25.0);
        assert_eq!(short.tag().to_string(), "short-range(ell=2;1..9)");
    }

    #[test]
    fn piecewise_switches_at_breaks() {
        let a = PairCoefficients::from_fn(3, |_, _| 1.0).unwrap();
        let b = PairCoefficients::from_fn(3, |_, _| 2.0).unwrap();
        let s = CoefficientSchedule::piecewise(vec![0.5], vec![a.clone(), b]).unwrap();
        assert_eq!(s.get(0.49, 0, 1), 1.0);
        assert_eq!(s.get(0.5, 0, 1), 2.0);
        assert!(s.is_piecewise_constant() && !s.is_time_constant());
        assert!(CoefficientSchedule::piecewise(vec![0.5], vec![a]).is_err());
    }
}
