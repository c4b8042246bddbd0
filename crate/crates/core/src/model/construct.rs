//! Closed-form constructions over a normalized instance.

use num_traits::{One, Signed, Zero};

use super::inequality::{Family, Inequality};
use super::instance::{Instance, RawInstance};
use super::rational::Rational;
use crate::error::{Error, Result};
use crate::knapdp;

/// Pitch of an inequality (see [`Inequality::pitch`]).
pub fn compute_pitch(ineq: &Inequality) -> usize {
    ineq.pitch()
}

/// Whether `ineq` holds at every 0/1 point with `p·x >= 1`.
///
/// Decided exactly: the minimum of the left-hand side over the feasible set
/// is computed by the profit DP of [`knapdp::solve_exact`].
pub fn is_valid(ineq: &Inequality, inst: &Instance) -> Result<bool> {
    is_valid_budgeted(ineq, inst, knapdp::DEFAULT_DP_BUDGET)
}

pub fn is_valid_budgeted(ineq: &Inequality, inst: &Instance, budget: u64) -> Result<bool> {
    let n = inst.len();
    if let Some(i) = ineq.max_index() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    let sol = knapdp::solve_exact_budgeted(inst, &ineq.dense(n), budget)?;
    Ok(sol.value >= *ineq.rhs())
}

/// Knapsack-cover inequality of `set`:
/// `sum_{i not in set} min(p_i, beta) x_i >= beta` with `beta = 1 - p(set)`.
pub fn kc_inequality(inst: &Instance, set: &[usize]) -> Result<Inequality> {
    let n = inst.len();
    let mut in_set = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        in_set[i] = true;
    }
    let beta = Rational::one() - inst.profit_of(set);
    if !beta.is_positive() {
        return Err(Error::Precondition(format!(
            "no knapsack-cover inequality: 1 - p(S) = {beta} is not positive"
        )));
    }
    let terms = (0..n).filter(|&i| !in_set[i]).map(|i| {
        let p = inst.profit(i);
        (i, if *p < beta { p.clone() } else { beta.clone() })
    });
    Inequality::new(terms, beta.clone(), Family::Kc)
}

/// The data of a canonical pitch-2 inequality `sum_{I1} x + 2 sum_{I2} x >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pitch2Canonical {
    pub support: Vec<usize>,
    /// `1 - p([n] \ I)`.
    pub beta: Rational,
    /// Items of `I` with profit strictly below `beta`.
    pub light: Vec<usize>,
    /// The rest of `I`.
    pub heavy: Vec<usize>,
}

impl Pitch2Canonical {
    /// Splits `support` at its residual demand. Does not check the
    /// canonical-form preconditions; see [`pitch2_canonical`].
    pub fn split(inst: &Instance, support: &[usize]) -> Result<Pitch2Canonical> {
        let n = inst.len();
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if let Some(&i) = support.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let beta = inst.beta_of_support(&support);
        let (light, heavy) = support.iter().partition(|&&i| *inst.profit(i) < beta);
        Ok(Pitch2Canonical {
            support,
            beta,
            light,
            heavy,
        })
    }

    pub fn inequality(&self) -> Result<Inequality> {
        let two = Rational::from_integer(2.into());
        let terms = self
            .light
            .iter()
            .map(|&i| (i, Rational::one()))
            .chain(self.heavy.iter().map(|&i| (i, two.clone())));
        Inequality::new(terms, two.clone(), Family::Pitch2Canonical)
    }
}

/// Canonical pitch-2 inequality on support `I`.
///
/// Requires `|I| >= 2`, `beta(I) > 0` and at least one item of `I` with
/// profit below `beta(I)`.
pub fn pitch2_canonical(inst: &Instance, support: &[usize]) -> Result<Inequality> {
    let split = Pitch2Canonical::split(inst, support)?;
    if split.support.len() < 2 {
        return Err(Error::Precondition(format!(
            "support must have at least 2 items, got {}",
            split.support.len()
        )));
    }
    if !split.beta.is_positive() {
        return Err(Error::Precondition(format!(
            "beta(I) = {} is not positive",
            split.beta
        )));
    }
    if split.light.is_empty() {
        return Err(Error::Precondition(format!(
            "I1 is empty: no item of I has profit below beta(I) = {}",
            split.beta
        )));
    }
    split.inequality()
}

/// Lowers the pitch of a valid pitch-`t` inequality by one.
///
/// The inequality is first scaled to rhs 1; the variable with the smallest
/// coefficient (lowest index on ties) is dropped and the rhs becomes
/// `max(1/2, (t-2)/(t-1))`.
pub fn pitch_reduce(ineq: &Inequality, t: usize) -> Result<Inequality> {
    if t < 2 {
        return Err(Error::Precondition(format!(
            "pitch must be at least 2, got {t}"
        )));
    }
    let actual = ineq.pitch();
    if actual != t {
        return Err(Error::Precondition(format!(
            "inequality has pitch {actual}, not {t}"
        )));
    }
    let norm = ineq.normalized();
    let (drop_index, _) = norm
        .terms()
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("pitch >= 2 implies a nonempty support");
    let half = Rational::new(1.into(), 2.into());
    let tt = t as i64;
    let ratio = Rational::new((tt - 2).into(), (tt - 1).into());
    let rhs = if ratio > half { ratio } else { half };
    let terms = norm
        .terms()
        .iter()
        .filter(|(i, _)| i != drop_index)
        .cloned();
    Inequality::new(terms, rhs, norm.family())
}

/// A max-knapsack instance `max v·x s.t. w·x <= 1` recast as min-knapsack.
///
/// Item `k` of the max-knapsack input becomes item `k` of the min-knapsack
/// raw instance; a min-knapsack selection `S` corresponds to the
/// max-knapsack selection `[n] \ S`.
#[derive(Debug, Clone)]
pub struct MaxKnapReduction {
    pub instance: Instance,
    pub raw: RawInstance,
}

impl MaxKnapReduction {
    /// Max-knapsack selection (input indices) for a min-knapsack selection
    /// given in sorted indices.
    pub fn maxknap_selection(&self, minknap_sorted: &[usize]) -> Vec<usize> {
        let n = self.instance.len();
        let mut taken = vec![false; n];
        for &i in minknap_sorted {
            taken[self.instance.input_index(i)] = true;
        }
        (0..n).filter(|&k| !taken[k]).collect()
    }

    /// Min-knapsack selection (sorted indices) for a max-knapsack selection
    /// given in input indices.
    pub fn minknap_selection(&self, maxknap_input: &[usize]) -> Vec<usize> {
        let n = self.instance.len();
        let mut taken = vec![false; n];
        for &k in maxknap_input {
            taken[k] = true;
        }
        let mut out: Vec<usize> = (0..n)
            .filter(|&k| !taken[k])
            .map(|k| self.instance.sorted_index(k))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Builds the min-knapsack instance with `p_i = w_i / (sum w - 1)` and
/// `c_i = v_i` from a max-knapsack instance with capacity 1.
pub fn reduce_maxknap(values: &[Rational], weights: &[Rational]) -> Result<MaxKnapReduction> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    if let Some(k) = values
        .iter()
        .chain(weights)
        .position(|v| !v.is_positive() || v.is_zero())
    {
        return Err(Error::Precondition(format!(
            "values and weights must be positive (entry {k})"
        )));
    }
    let excess: Rational = weights.iter().sum::<Rational>() - Rational::one();
    if !excess.is_positive() {
        return Err(Error::Precondition(
            "total weight must exceed the capacity 1".into(),
        ));
    }
    let mut raw = RawInstance::new(Rational::one());
    for (k, (v, w)) in values.iter().zip(weights).enumerate() {
        raw.push(format!("x{}", k + 1), v.clone(), w / &excess);
    }
    let instance = Instance::normalize(&raw)?;
    Ok(MaxKnapReduction { instance, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::char_vector;
    use crate::model::rational::{int, rat};

    fn inst(profits: &[Rational]) -> Instance {
        let costs = vec![int(1); profits.len()];
        Instance::from_profits_costs(profits, &costs).unwrap()
    }

    /// Validity by enumerating all 2^n points.
    fn brute_valid(ineq: &Inequality, inst: &Instance) -> bool {
        let n = inst.len();
        (0u32..1 << n).all(|mask| {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            !inst.is_feasible_set(&set) || ineq.is_satisfied_by(&char_vector(&set, n).unwrap())
        })
    }

    #[test]
    fn kc_examples() {
        let i = inst(&[rat(3, 5), rat(3, 5), rat(3, 5)]);
        let kc = kc_inequality(&i, &[0]).unwrap();
        assert_eq!(kc.terms(), &[(1, rat(2, 5)), (2, rat(2, 5))]);
        assert_eq!(kc.rhs(), &rat(2, 5));

        let row = kc_inequality(&i, &[]).unwrap();
        assert_eq!(row.dense(3), i.profits().to_vec());
        assert_eq!(row.rhs(), &int(1));

        let j = inst(&[rat(1, 4), rat(1, 2), rat(1, 2)]);
        assert!(kc_inequality(&j, &[1, 2]).is_err());
    }

    #[test]
    fn pitch2_examples() {
        let i = inst(&[rat(1, 4), rat(1, 4), rat(1, 2), rat(1, 2)]);
        let c = pitch2_canonical(&i, &[0, 1, 2, 3]).unwrap();
        assert_eq!(c.dense(4), vec![int(1); 4]);
        assert_eq!(c.rhs(), &int(2));
        assert!(brute_valid(&c, &i));
        assert!(matches!(
            pitch2_canonical(&i, &[2, 3]),
            Err(Error::Precondition(_))
        ));

        let j = inst(&[rat(1, 8), rat(1, 2), rat(3, 4)]);
        let c = pitch2_canonical(&j, &[0, 1]).unwrap();
        assert_eq!(c.terms(), &[(0, int(1)), (1, int(2))]);
        assert!(brute_valid(&c, &j));
        assert!(is_valid(&c, &j).unwrap());
        assert_eq!(c.pitch(), 2);
        assert!(pitch2_canonical(&j, &[0]).is_err());
    }

    #[test]
    fn pitch_reduce_examples() {
        let d = Inequality::from_dense(
            &[rat(1, 2), rat(1, 2), int(1), int(1)],
            int(1),
            Family::User,
        )
        .unwrap();
        let r = pitch_reduce(&d, 2).unwrap();
        assert_eq!(r.terms(), &[(1, rat(1, 2)), (2, int(1)), (3, int(1))]);
        assert_eq!(r.rhs(), &rat(1, 2));

        let d = Inequality::from_dense(
            &[rat(1, 3), rat(1, 3), rat(1, 3), int(1)],
            int(1),
            Family::User,
        )
        .unwrap();
        let r = pitch_reduce(&d, 3).unwrap();
        assert_eq!(r.dense(4), vec![int(0), rat(1, 3), rat(1, 3), int(1)]);
        assert_eq!(r.rhs(), &rat(1, 2));

        let d = Inequality::from_dense(
            &[rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4), int(1)],
            int(1),
            Family::User,
        )
        .unwrap();
        assert_eq!(pitch_reduce(&d, 4).unwrap().rhs(), &rat(2, 3));
        assert!(pitch_reduce(&d, 3).is_err());
        assert!(pitch_reduce(&d, 1).is_err());
    }

    #[test]
    fn invalid_all_ones_cut() {
        let i = inst(&[rat(1, 2), rat(1, 2), int(1)]);
        let cut = Inequality::unit(&[0, 1, 2], int(4), Family::User).unwrap();
        assert!(!is_valid(&cut, &i).unwrap());
    }

    #[test]
    fn maxknap_examples() {
        let r = reduce_maxknap(&[int(1), int(1)], &[rat(3, 4), rat(3, 4)]).unwrap();
        assert_eq!(r.instance.profits(), &[int(1), int(1)]);
        let r = reduce_maxknap(&[int(5), int(6)], &[rat(1, 2), rat(3, 4)]).unwrap();
        assert_eq!(r.instance.profits(), &[int(1), int(1)]);
        assert!(reduce_maxknap(&[int(1)], &[rat(1, 2)]).is_err());
        assert!(reduce_maxknap(&[int(1)], &[int(1)]).is_err());
        assert!(reduce_maxknap(&[int(0), int(1)], &[int(1), int(1)]).is_err());
    }

    #[test]
    fn maxknap_optimum_correspondence() {
        let values = [int(1), int(2), int(3)];
        let weights = [rat(1, 2), rat(1, 2), rat(1, 2)];
        let red = reduce_maxknap(&values, &weights).unwrap();
        assert_eq!(red.instance.profits(), &[int(1), int(1), int(1)]);
        assert_eq!(red.instance.costs(), &[int(1), int(2), int(3)]);

        // enumerate both problems
        let mut best_max = int(0);
        let mut best_min: Option<Rational> = None;
        for mask in 0u32..8 {
            let set: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).collect();
            let w: Rational = set.iter().map(|&k| &weights[k]).sum();
            let max_feasible = w <= int(1);
            let comp = red.minknap_selection(&set);
            assert_eq!(max_feasible, red.instance.is_feasible_set(&comp));
            assert_eq!(red.maxknap_selection(&comp), set);
            if max_feasible {
                let v: Rational = set.iter().map(|&k| &values[k]).sum();
                best_max = best_max.max(v);
            }
            if red.instance.is_feasible_set(&set) {
                let c = red.instance.cost_of(&set);
                best_min = Some(best_min.map_or(c.clone(), |b: Rational| b.min(c)));
            }
        }
        assert_eq!(best_max, int(5));
        assert_eq!(best_min.unwrap(), int(1));
        let total: Rational = values.iter().sum();
        assert_eq!(total - int(1), best_max);
    }
}
