use std::fmt;

use num_traits::{One, Signed, Zero};

use super::instance::Point;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Which construction produced an inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Pitch1,
    Pitch2Canonical,
    Kc,
    FixedSupport,
    User,
    KnapsackRow,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Pitch1 => "pitch1",
            Family::Pitch2Canonical => "pitch2-canonical",
            Family::Kc => "kc",
            Family::FixedSupport => "fixed-support",
            Family::User => "user",
            Family::KnapsackRow => "knapsack-row",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `sum_{i in T} w_i x_i >= rhs` with every stored `w_i > 0` and `rhs > 0`.
///
/// Terms are kept sorted by index. Equality and hashing ignore the family
/// tag, so two constructions of the same cut compare equal.
#[derive(Debug, Clone)]
pub struct Inequality {
    terms: Vec<(usize, Rational)>,
    rhs: Rational,
    family: Family,
}

impl PartialEq for Inequality {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.rhs == other.rhs
    }
}

impl Eq for Inequality {}

impl std::hash::Hash for Inequality {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
        self.rhs.hash(state);
    }
}

impl Inequality {
    /// Builds an inequality, dropping zero coefficients. Negative
    /// coefficients, repeated indices and a nonpositive rhs are rejected.
    pub fn new(
        terms: impl IntoIterator<Item = (usize, Rational)>,
        rhs: Rational,
        family: Family,
    ) -> Result<Inequality> {
        if !rhs.is_positive() {
            return Err(Error::Precondition(format!(
                "right-hand side must be positive, got {rhs}"
            )));
        }
        let mut terms: Vec<(usize, Rational)> = terms.into_iter().collect();
        if let Some((i, w)) = terms.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::Precondition(format!(
                "coefficient of index {i} is negative ({w})"
            )));
        }
        terms.retain(|(_, w)| !w.is_zero());
        terms.sort_by_key(|(i, _)| *i);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition("repeated index in inequality".into()));
        }
        Ok(Inequality { terms, rhs, family })
    }

    /// Dense constructor: `coeffs[i]` is the coefficient of index `i`.
    pub fn from_dense(coeffs: &[Rational], rhs: Rational, family: Family) -> Result<Inequality> {
        Inequality::new(coeffs.iter().cloned().enumerate(), rhs, family)
    }

    /// `sum_{i in set} x_i >= rhs`.
    pub fn unit(set: &[usize], rhs: Rational, family: Family) -> Result<Inequality> {
        Inequality::new(set.iter().map(|&i| (i, Rational::one())), rhs, family)
    }

    pub fn terms(&self) -> &[(usize, Rational)] {
        &self.terms
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn with_family(mut self, family: Family) -> Inequality {
        self.family = family;
        self
    }

    pub fn support(&self) -> Vec<usize> {
        self.terms.iter().map(|(i, _)| *i).collect()
    }

    pub fn coeff(&self, index: usize) -> Rational {
        self.terms
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|k| self.terms[k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn dense(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (i, w) in &self.terms {
            v[*i] = w.clone();
        }
        v
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.last().map(|(i, _)| *i)
    }

    /// Left-hand side at `x`.
    pub fn lhs(&self, x: &Point) -> Rational {
        self.terms.iter().map(|(i, w)| w * &x[*i]).sum()
    }

    pub fn lhs_dense(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|(i, w)| w * &x[*i]).sum()
    }

    /// `rhs - lhs(x)`; positive exactly when `x` violates the inequality.
    pub fn violation(&self, x: &Point) -> Rational {
        &self.rhs - self.lhs(x)
    }

    pub fn is_satisfied_by(&self, x: &Point) -> bool {
        self.lhs(x) >= self.rhs
    }

    pub fn is_violated_by(&self, x: &Point) -> bool {
        !self.is_satisfied_by(x)
    }

    /// Multiplies coefficients and rhs by a positive rational.
    pub fn scaled(&self, factor: &Rational) -> Inequality {
        assert!(factor.is_positive(), "scale factor must be positive");
        Inequality {
            terms: self.terms.iter().map(|(i, w)| (*i, w * factor)).collect(),
            rhs: &self.rhs * factor,
            family: self.family,
        }
    }

    /// Same inequality scaled so that the rhs is 1.
    pub fn normalized(&self) -> Inequality {
        self.scaled(&self.rhs.recip())
    }

    /// Least `k` such that every `k` coefficients sum to at least the rhs;
    /// `|T| + 1` when even the full sum falls short.
    pub fn pitch(&self) -> usize {
        let mut ws: Vec<&Rational> = self.terms.iter().map(|(_, w)| w).collect();
        ws.sort();
        let mut acc = Rational::zero();
        for (k, w) in ws.into_iter().enumerate() {
            acc += w;
            if acc >= self.rhs {
                return k + 1;
            }
        }
        self.terms.len() + 1
    }

    /// Renders with the given item names, e.g. `x1 + 2 x4 >= 2`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Labelled { ineq: self, names }
    }

    fn write_terms(
        &self,
        f: &mut fmt::Formatter<'_>,
        name: &dyn Fn(usize) -> String,
    ) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (k, (i, w)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if w.is_one() {
                write!(f, "{}", name(*i))?;
            } else {
                write!(f, "{} {}", w, name(*i))?;
            }
        }
        write!(f, " >= {}", self.rhs)
    }
}

/// Uses zero-based sorted indices, `x[0] + 2 x[3] >= 2`.
impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_terms(f, &|i| format!("x[{i}]"))
    }
}

struct Labelled<'a> {
    ineq: &'a Inequality,
    names: &'a [String],
}

impl fmt::Display for Labelled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ineq.write_terms(f, &|i| {
            self.names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("x[{i}]"))
        })
    }
}
