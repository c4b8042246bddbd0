use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{common_denominator, Rational};
use crate::error::{Error, Result};

/// One item as the user supplied it, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawItem {
    pub label: String,
    pub cost: Rational,
    pub profit: Rational,
}

/// A min-knapsack instance with an arbitrary positive threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub items: Vec<RawItem>,
    pub threshold: Rational,
}

impl RawInstance {
    pub fn new(threshold: Rational) -> Self {
        RawInstance {
            items: Vec::new(),
            threshold,
        }
    }

    pub fn push(&mut self, label: impl Into<String>, cost: Rational, profit: Rational) {
        self.items.push(RawItem {
            label: label.into(),
            cost,
            profit,
        });
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Normalized min-knapsack: `min c·x  s.t.  p·x >= 1, x in {0,1}^n`.
///
/// Items are stored sorted by profit (ties by input position) and every
/// index used by the rest of the crate refers to this sorted order.
/// `input_index[i]` gives the position of sorted item `i` in the raw input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    profits: Vec<Rational>,
    costs: Vec<Rational>,
    q: BigInt,
    r: Vec<BigInt>,
    labels: Vec<String>,
    input_index: Vec<usize>,
}

impl Instance {
    /// Brings a raw instance into normal form: profits divided by the
    /// threshold, capped at 1, sorted ascending.
    pub fn normalize(raw: &RawInstance) -> Result<Instance> {
        if !raw.threshold.is_positive() {
            return Err(Error::NonPositiveThreshold(raw.threshold.to_string()));
        }
        for (index, item) in raw.items.iter().enumerate() {
            if !item.cost.is_positive() {
                return Err(Error::NonPositiveCost {
                    index,
                    label: item.label.clone(),
                    value: item.cost.to_string(),
                });
            }
            if item.profit.is_negative() {
                return Err(Error::NegativeProfit {
                    index,
                    label: item.label.clone(),
                    value: item.profit.to_string(),
                });
            }
        }
        let one = Rational::one();
        let scaled: Vec<Rational> = raw
            .items
            .iter()
            .map(|it| {
                let p = &it.profit / &raw.threshold;
                if p > one {
                    one.clone()
                } else {
                    p
                }
            })
            .collect();
        let total: Rational = scaled.iter().sum();
        if total < one {
            return Err(Error::Infeasible {
                total: total.to_string(),
            });
        }
        let mut order: Vec<usize> = (0..raw.items.len()).collect();
        order.sort_by(|&a, &b| scaled[a].cmp(&scaled[b]).then(a.cmp(&b)));

        let profits: Vec<Rational> = order.iter().map(|&i| scaled[i].clone()).collect();
        let costs = order.iter().map(|&i| raw.items[i].cost.clone()).collect();
        let labels = order.iter().map(|&i| raw.items[i].label.clone()).collect();
        Ok(Instance::assemble(profits, costs, labels, order))
    }

    fn assemble(
        profits: Vec<Rational>,
        costs: Vec<Rational>,
        labels: Vec<String>,
        input_index: Vec<usize>,
    ) -> Instance {
        let q = common_denominator(&profits);
        let r = profits
            .iter()
            .map(|p| (p * Rational::from_integer(q.clone())).to_integer())
            .collect();
        Instance {
            profits,
            costs,
            q,
            r,
            labels,
            input_index,
        }
    }

    /// Convenience constructor for already-normalized data (threshold 1).
    /// Labels default to `x1..xn` in input order.
    pub fn from_profits_costs(profits: &[Rational], costs: &[Rational]) -> Result<Instance> {
        if profits.len() != costs.len() {
            return Err(Error::DimensionMismatch {
                expected: profits.len(),
                got: costs.len(),
            });
        }
        let mut raw = RawInstance::new(Rational::one());
        for (i, (p, c)) in profits.iter().zip(costs).enumerate() {
            raw.push(format!("x{}", i + 1), c.clone(), p.clone());
        }
        Instance::normalize(&raw)
    }

    /// The normalized instance written back as a raw instance (threshold 1,
    /// sorted order). `normalize(to_raw())` reproduces this instance's data.
    pub fn to_raw(&self) -> RawInstance {
        let mut raw = RawInstance::new(Rational::one());
        for i in 0..self.len() {
            raw.push(
                self.labels[i].clone(),
                self.costs[i].clone(),
                self.profits[i].clone(),
            );
        }
        raw
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    pub fn profits(&self) -> &[Rational] {
        &self.profits
    }

    pub fn profit(&self, i: usize) -> &Rational {
        &self.profits[i]
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn cost(&self, i: usize) -> &Rational {
        &self.costs[i]
    }

    /// Least common denominator of the profits.
    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// Integer profits: `profit(i) == r(i) / q`.
    pub fn r(&self) -> &[BigInt] {
        &self.r
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Position in the raw input of sorted item `i`.
    pub fn input_index(&self, i: usize) -> usize {
        self.input_index[i]
    }

    /// Sorted position of raw input item `k`.
    pub fn sorted_index(&self, k: usize) -> usize {
        self.input_index
            .iter()
            .position(|&v| v == k)
            .expect("input index in range")
    }

    /// Reorders a vector given in input order into sorted order.
    pub fn from_input_order<T: Clone>(&self, values: &[T]) -> Result<Vec<T>> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(self
            .input_index
            .iter()
            .map(|&k| values[k].clone())
            .collect())
    }

    /// Reorders a sorted-order vector back into input order.
    pub fn to_input_order<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out: Vec<Option<T>> = vec![None; values.len()];
        for (i, v) in values.iter().enumerate() {
            out[self.input_index[i]] = Some(v.clone());
        }
        out.into_iter().map(|v| v.expect("permutation")).collect()
    }

    /// Total profit of a set of (sorted) indices.
    pub fn profit_of(&self, set: &[usize]) -> Rational {
        set.iter().map(|&i| &self.profits[i]).sum()
    }

    pub fn cost_of(&self, set: &[usize]) -> Rational {
        set.iter().map(|&i| &self.costs[i]).sum()
    }

    pub fn is_feasible_set(&self, set: &[usize]) -> bool {
        self.profit_of(set) >= Rational::one()
    }

    /// `1 - p([n] \ set)`: the residual demand once everything outside
    /// `set` is taken.
    pub fn beta_of_support(&self, set: &[usize]) -> Rational {
        let inside: Rational = self.profit_of(set);
        let total: Rational = self.profits.iter().sum();
        Rational::one() - (total - inside)
    }

    /// Profit sum as an integer multiple of `1/q`.
    pub fn r_of(&self, set: &[usize]) -> BigInt {
        set.iter().map(|&i| &self.r[i]).sum()
    }

    pub fn total_r(&self) -> BigInt {
        self.r.iter().sum()
    }

    pub fn all_costs_positive(&self) -> bool {
        self.costs.iter().all(|c| !c.is_zero() && c.is_positive())
    }
}

/// A point of the unit cube, indexed in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Result<Point> {
        let one = Rational::one();
        for (i, v) in coords.iter().enumerate() {
            if v.is_negative() || *v > one {
                return Err(Error::Precondition(format!(
                    "coordinate {i} = {v} is outside [0,1]"
                )));
            }
        }
        Ok(Point(coords))
    }

    pub fn zeros(n: usize) -> Point {
        Point(vec![Rational::zero(); n])
    }

    pub fn ones(n: usize) -> Point {
        Point(vec![Rational::one(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    /// `c · x`.
    pub fn dot(&self, weights: &[Rational]) -> Rational {
        self.0.iter().zip(weights).map(|(x, w)| x * w).sum()
    }

    /// Indices with a strictly positive coordinate.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&i| self.0[i].is_positive())
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|v| v.is_integer())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Point) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// 0/1 point with ones exactly on `set`.
pub fn char_vector(set: &[usize], n: usize) -> Result<Point> {
    let mut coords = vec![Rational::zero(); n];
    for &i in set {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        coords[i] = Rational::one();
    }
    Ok(Point(coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::{int, rat};

    fn raw(costs: &[Rational], profits: &[Rational], threshold: Rational) -> RawInstance {
        let mut r = RawInstance::new(threshold);
        for (i, (c, p)) in costs.iter().zip(profits).enumerate() {
            r.push(format!("i{i}"), c.clone(), p.clone());
        }
        r
    }

    #[test]
    fn caps_profits_above_one() {
        let inst = Instance::normalize(&raw(&[int(1), int(2)], &[int(3), int(4)], int(2))).unwrap();
        assert_eq!(inst.profits(), &[int(1), int(1)]);
        assert_eq!(inst.costs(), &[int(1), int(2)]);
        assert_eq!(inst.q(), &BigInt::from(1));
    }

    #[test]
    fn lemma4_family_scaling() {
        let costs = [rat(1, 8), int(2), int(1), int(1), int(1), int(1)];
        let profits = [int(2), int(2), int(1), int(1), int(1), int(1)];
        let inst = Instance::normalize(&raw(&costs, &profits, int(4))).unwrap();
        assert_eq!(
            inst.profits(),
            &[
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                rat(1, 2),
                rat(1, 2)
            ]
        );
        assert_eq!(inst.q(), &BigInt::from(4));
        assert_eq!(inst.r()[4], BigInt::from(2));
        // the two half-profit items keep input order: y before z
        assert_eq!(inst.input_index(4), 0);
        assert_eq!(inst.input_index(5), 1);
        assert_eq!(inst.cost(4), &rat(1, 8));
    }

    #[test]
    fn rejects_bad_input() {
        let err = Instance::normalize(&raw(&[int(1)], &[rat(1, 2)], int(1))).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
        let err = Instance::normalize(&raw(&[int(1)], &[int(1)], int(0))).unwrap_err();
        assert!(matches!(err, Error::NonPositiveThreshold(_)));
        let err = Instance::normalize(&raw(&[int(0)], &[int(1)], int(1))).unwrap_err();
        assert!(matches!(err, Error::NonPositiveCost { .. }));
        let err = Instance::normalize(&raw(&[int(1)], &[int(-1)], int(1))).unwrap_err();
        assert!(matches!(err, Error::NegativeProfit { .. }));
    }

    #[test]
    fn input_order_round_trip() {
        let inst = Instance::from_profits_costs(
            &[rat(1, 2), rat(1, 4), rat(3, 4)],
            &[int(1), int(2), int(3)],
        )
        .unwrap();
        assert_eq!(inst.profits(), &[rat(1, 4), rat(1, 2), rat(3, 4)]);
        let sorted = inst.from_input_order(&[10, 20, 30]).unwrap();
        assert_eq!(sorted, vec![20, 10, 30]);
        assert_eq!(inst.to_input_order(&sorted), vec![10, 20, 30]);
        assert_eq!(inst.sorted_index(0), 1);
    }

    #[test]
    fn char_vectors() {
        assert_eq!(char_vector(&[], 3).unwrap(), Point::zeros(3));
        assert_eq!(
            char_vector(&[0, 2], 3).unwrap().coords(),
            &[int(1), int(0), int(1)]
        );
        assert_eq!(char_vector(&[0, 1, 2], 3).unwrap(), Point::ones(3));
        assert!(char_vector(&[3], 3).is_err());
    }

    #[test]
    fn point_bounds() {
        assert!(Point::new(vec![rat(3, 2)]).is_err());
        assert!(Point::new(vec![rat(-1, 2)]).is_err());
        assert!(Point::new(vec![rat(1, 2), int(1), int(0)]).is_ok());
    }
}
