//! Exact dyadic bookkeeping for probabilities.
//!
//! Every amplitude produced by 50:50 networks on dual-rail inputs squares to
//! a dyadic rational. Squared amplitudes are snapped to the nearest `k / 2^q`
//! and summed exactly; if any term fails to snap the result degrades to a
//! float.

use std::fmt;
use std::ops::{Add, Mul};

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

const MAX_DYADIC_EXPONENT: u32 = 48;

/// Snaps `p` to `k / 2^q` with the smallest `q` for which both the absolute
/// error is below `1e-9` and `p * 2^q` sits within `1e-6` of an integer.
pub fn snap_dyadic(p: f64) -> Option<Rational> {
    if !p.is_finite() {
        return None;
    }
    if p.abs() < 1e-15 {
        return Some(Rational::zero());
    }
    for q in 0..=MAX_DYADIC_EXPONENT {
        let scale = (1u64 << q) as f64;
        let k = (p * scale).round();
        if (p * scale - k).abs() <= 1e-6 && (p - k / scale).abs() <= 1e-9 {
            return Some(Rational::new(k as i128, 1i128 << q));
        }
    }
    None
}

/// A probability that is exact when all contributing terms were dyadic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probability {
    Exact(Rational),
    Approx(f64),
}

impl Probability {
    pub fn zero() -> Self {
        Probability::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Probability::Exact(Rational::one())
    }

    pub fn ratio(num: i128, den: i128) -> Self {
        Probability::Exact(Rational::new(num, den))
    }

    pub fn from_f64(p: f64) -> Self {
        snap_dyadic(p).map_or(Probability::Approx(p), Probability::Exact)
    }

    pub fn value(&self) -> f64 {
        match self {
            Probability::Exact(r) => to_f64(r),
            Probability::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Probability::Exact(r) => Some(*r),
            Probability::Approx(_) => None,
        }
    }

    pub fn is_exactly(&self, r: Rational) -> bool {
        self.exact() == Some(r)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl Add for Probability {
    type Output = Probability;

    fn add(self, rhs: Probability) -> Probability {
        match (self, rhs) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a + b),
            (a, b) => Probability::Approx(a.value() + b.value()),
        }
    }
}

impl Mul for Probability {
    type Output = Probability;

    fn mul(self, rhs: Probability) -> Probability {
        match (self, rhs) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a * b),
            (a, b) => Probability::Approx(a.value() * b.value()),
        }
    }
}

impl std::iter::Sum for Probability {
    fn sum<I: Iterator<Item = Probability>>(iter: I) -> Self {
        iter.fold(Probability::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Probability {
    fn product<I: Iterator<Item = Probability>>(iter: I) -> Self {
        iter.fold(Probability::one(), |a, b| a * b)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Probability::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Probability::Approx(v) => write!(f, "{v:.12}"),
        }
    }
}

/// Running sum of squared amplitudes.
#[derive(Clone, Copy, Debug)]
pub struct ProbabilitySum {
    exact: Option<Rational>,
    float: f64,
}

impl Default for ProbabilitySum {
    fn default() -> Self {
        ProbabilitySum {
            exact: Some(Rational::zero()),
            float: 0.0,
        }
    }
}

impl ProbabilitySum {
    pub fn add(&mut self, p: f64) {
        self.float += p;
        self.exact = match (self.exact, snap_dyadic(p)) {
            (Some(acc), Some(r)) => Some(acc + r),
            _ => None,
        };
    }

    pub fn add_exact(&mut self, p: Probability) {
        self.float += p.value();
        self.exact = match (self.exact, p.exact()) {
            (Some(acc), Some(r)) => Some(acc + r),
            _ => None,
        };
    }

    pub fn merge(&mut self, other: &ProbabilitySum) {
        self.float += other.float;
        self.exact = match (self.exact, other.exact) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }

    pub fn finish(&self) -> Probability {
        match self.exact {
            Some(r) => Probability::Exact(r),
            None => Probability::Approx(self.float),
        }
    }

    pub fn scaled(&self, factor: Rational) -> Probability {
        match self.exact {
            Some(r) => Probability::Exact(r * factor),
            None => Probability::Approx(self.float * to_f64(&factor)),
        }
    }
}

/// Polynomial `sum_k c_k x^k` with probability-valued coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Probability>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Probability>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            let zero = match last {
                Probability::Exact(r) => r.is_zero(),
                Probability::Approx(v) => v.abs() < 1e-15,
            };
            if zero {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    /// Adds `weight * x^kept * (1 - x)^lost`.
    pub fn add_binomial_term(&mut self, weight: Probability, kept: usize, lost: usize) {
        self.add_loss_term(weight, kept, lost, 1);
    }

    /// Adds `weight * x^kept * (1 - x^step)^lost`.
    pub fn add_loss_term(&mut self, weight: Probability, kept: usize, lost: usize, step: usize) {
        let degree = kept + step * lost;
        if self.coeffs.len() <= degree {
            self.coeffs.resize(degree + 1, Probability::zero());
        }
        let mut binom: i128 = 1;
        for j in 0..=lost {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let term = weight * Probability::Exact(Rational::from_integer(sign * binom));
            self.coeffs[kept + step * j] = self.coeffs[kept + step * j] + term;
            binom = binom * (lost - j) as i128 / (j + 1) as i128;
        }
        self.trim();
    }

    pub fn coefficient(&self, power: usize) -> Probability {
        self.coeffs.get(power).copied().unwrap_or(Probability::zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Probability] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.value())
    }

    /// Nonzero `(power, coefficient)` pairs.
    pub fn terms(&self) -> Vec<(usize, Probability)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| match c {
                Probability::Exact(r) => !r.is_zero(),
                Probability::Approx(v) => v.abs() >= 1e-15,
            })
            .map(|(k, c)| (k, *c))
            .collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*eta")?,
                _ => write!(f, "({c})*eta^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        assert_eq!(snap_dyadic(0.5), Some(Rational::new(1, 2)));
        assert_eq!(snap_dyadic(0.75 + 1e-13), Some(Rational::new(3, 4)));
        assert_eq!(snap_dyadic(2f64.powi(-25)), Some(Rational::new(1, 1 << 25)));
        assert_eq!(snap_dyadic(1.0 / 3.0), None);
        assert_eq!(snap_dyadic(0.0), Some(Rational::zero()));
    }

    #[test]
    fn sums_stay_exact() {
        let mut acc = ProbabilitySum::default();
        for _ in 0..3 {
            acc.add(0.125);
        }
        acc.add(0.0625);
        assert_eq!(acc.finish(), Probability::ratio(7, 16));
        acc.add(1.0 / 3.0);
        assert!(matches!(acc.finish(), Probability::Approx(_)));
    }

    #[test]
    fn binomial_expansion() {
        // x^2 (1 - x) = x^2 - x^3
        let mut p = Polynomial::zero();
        p.add_binomial_term(Probability::one(), 2, 1);
        assert_eq!(p.coefficient(2), Probability::ratio(1, 1));
        assert_eq!(p.coefficient(3), Probability::ratio(-1, 1));
        // plus x^3 cancels the cubic term
        p.add_binomial_term(Probability::one(), 3, 0);
        assert_eq!(p.degree(), Some(2));
        assert!((p.eval(0.5) - 0.25).abs() < 1e-15);
        // x (1 - x^2) = x - x^3
        let mut q = Polynomial::zero();
        q.add_loss_term(Probability::one(), 1, 1, 2);
        assert_eq!(q.terms(), vec![(1, Probability::one()), (3, Probability::ratio(-1, 1))]);
    }

    #[test]
    fn display() {
        assert_eq!(Probability::ratio(17, 64).to_string(), "17/64");
        assert_eq!(Probability::one().to_string(), "1");
    }
}
