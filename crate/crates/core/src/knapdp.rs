//! Exact and approximate solvers for min-knapsack covering problems.
//!
//! Both solvers work on the integer form `sum r_i z_i >= R` of a covering
//! constraint. The exact solver runs a DP over profit states `0..=R`; the
//! FPTAS runs a DP over scaled cost states whose count depends only on `n`
//! and `1/eps`.

use std::cmp::Ordering;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::rational::common_denominator;
use crate::model::{Instance, Point, Rational};

/// Default cap on DP table cells.
pub const DEFAULT_DP_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Fptas(Rational),
}

/// How a covering subproblem is solved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    Fptas(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapSolution {
    /// Objective value of `chosen`, exact.
    pub value: Rational,
    /// Chosen items, sorted indices in increasing order.
    pub chosen: Vec<usize>,
    pub exactness: Exactness,
}

/// Exact minimizer of `objective · x` over `p·x >= 1, x in {0,1}^n`.
pub fn solve_exact(inst: &Instance, objective: &[Rational]) -> Result<KnapSolution> {
    solve_exact_budgeted(inst, objective, DEFAULT_DP_BUDGET)
}

pub fn solve_exact_budgeted(
    inst: &Instance,
    objective: &[Rational],
    budget: u64,
) -> Result<KnapSolution> {
    check_objective(inst, objective)?;
    let chosen =
        cover_exact(inst.r(), inst.q(), objective, budget)?.ok_or_else(|| Error::Infeasible {
            total: Rational::new(inst.total_r(), inst.q().clone()).to_string(),
        })?;
    Ok(solution(chosen, objective, Exactness::Exact))
}

/// A feasible set whose objective is at most `(1 + eps)` times optimal.
pub fn solve_fptas(
    inst: &Instance,
    objective: &[Rational],
    eps: &Rational,
) -> Result<KnapSolution> {
    solve_fptas_budgeted(inst, objective, eps, DEFAULT_DP_BUDGET)
}

pub fn solve_fptas_budgeted(
    inst: &Instance,
    objective: &[Rational],
    eps: &Rational,
    budget: u64,
) -> Result<KnapSolution> {
    check_objective(inst, objective)?;
    check_eps(eps)?;
    let chosen = cover_fptas(inst.r(), inst.q(), objective, eps, budget)?.ok_or_else(|| {
        Error::Infeasible {
            total: Rational::new(inst.total_r(), inst.q().clone()).to_string(),
        }
    })?;
    Ok(solution(chosen, objective, Exactness::Fptas(eps.clone())))
}

pub fn solve(inst: &Instance, objective: &[Rational], mode: &SolveMode) -> Result<KnapSolution> {
    match mode {
        SolveMode::Exact => solve_exact(inst, objective),
        SolveMode::Fptas(eps) => solve_fptas(inst, objective, eps),
    }
}

/// The separation subproblem for residual demand `alpha`:
///
/// `min sum_{p_i < alpha} xbar_i z_i + 2 sum_{p_i >= alpha} xbar_i z_i`
/// subject to `sum p_i (1 - z_i) <= 1 - alpha`.
///
/// `alpha` must be a multiple of `1/q` in `(0, 1]`. The returned set is
/// `I = {i : z_i = 1}`.
pub fn solve_palpha(
    inst: &Instance,
    xbar: &Point,
    alpha: &Rational,
    mode: &SolveMode,
) -> Result<KnapSolution> {
    solve_palpha_budgeted(inst, xbar, alpha, mode, DEFAULT_DP_BUDGET)
}

pub fn solve_palpha_budgeted(
    inst: &Instance,
    xbar: &Point,
    alpha: &Rational,
    mode: &SolveMode,
    budget: u64,
) -> Result<KnapSolution> {
    if xbar.len() != inst.len() {
        return Err(Error::DimensionMismatch {
            expected: inst.len(),
            got: xbar.len(),
        });
    }
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} is not in (0,1]"
        )));
    }
    let scaled = alpha * Rational::from_integer(inst.q().clone());
    if !scaled.is_integer() {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} is not a multiple of 1/{}",
            inst.q()
        )));
    }
    let objective = palpha_objective(inst, xbar, alpha);
    let target = inst.total_r() - inst.q() + scaled.to_integer();
    let exactness = match mode {
        SolveMode::Exact => Exactness::Exact,
        SolveMode::Fptas(eps) => Exactness::Fptas(eps.clone()),
    };
    let chosen = match mode {
        SolveMode::Exact => cover_exact(inst.r(), &target, &objective, budget)?,
        SolveMode::Fptas(eps) => {
            check_eps(eps)?;
            cover_fptas(inst.r(), &target, &objective, eps, budget)?
        }
    }
    .expect("z = 1 is always feasible for P_alpha");
    Ok(solution(chosen, &objective, exactness))
}

/// Objective of the separation subproblem: `xbar_i` below `alpha`, doubled
/// from `alpha` up.
pub fn palpha_objective(inst: &Instance, xbar: &Point, alpha: &Rational) -> Vec<Rational> {
    let two = Rational::from_integer(2.into());
    (0..inst.len())
        .map(|i| {
            if inst.profit(i) < alpha {
                xbar[i].clone()
            } else {
                &xbar[i] * &two
            }
        })
        .collect()
}

fn solution(chosen: Vec<usize>, objective: &[Rational], exactness: Exactness) -> KnapSolution {
    let value = chosen.iter().map(|&i| &objective[i]).sum();
    KnapSolution {
        value,
        chosen,
        exactness,
    }
}

fn check_objective(inst: &Instance, objective: &[Rational]) -> Result<()> {
    if objective.len() != inst.len() {
        return Err(Error::DimensionMismatch {
            expected: inst.len(),
            got: objective.len(),
        });
    }
    if let Some(i) = objective.iter().position(|v| v.is_negative()) {
        return Err(Error::Precondition(format!(
            "objective coefficient {i} is negative"
        )));
    }
    Ok(())
}

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    Ok(())
}

fn to_budgeted_usize(v: &BigInt, budget: u64) -> Result<usize> {
    match v.to_u64() {
        Some(x) if x <= budget => Ok(x as usize),
        _ => Err(Error::BudgetExceeded {
            cells: v.to_u128().unwrap_or(u128::MAX),
            budget,
        }),
    }
}

fn check_cells(rows: usize, cols: usize, budget: u64) -> Result<()> {
    let cells = rows as u128 * cols as u128;
    if cells > budget as u128 {
        return Err(Error::BudgetExceeded { cells, budget });
    }
    Ok(())
}

/// Integer costs with a common denominator: `costs[i] = ints[i] / L`.
fn integer_costs(costs: &[Rational]) -> Vec<BigInt> {
    let l = common_denominator(costs);
    costs.iter().map(|c| c.numer() * (&l / c.denom())).collect()
}

/// Exact minimum-cost set with `sum_{i in S} r_i >= target`. `None` when
/// even all items fall short. Among optimal sets the one with least total
/// profit wins; remaining ties prefer leaving out lower indices, i.e. the
/// lexicographically smallest characteristic vector.
pub(crate) fn cover_exact(
    r: &[BigInt],
    target: &BigInt,
    costs: &[Rational],
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    if !target.is_positive() {
        return Ok(Some(Vec::new()));
    }
    let total: BigInt = r.iter().sum();
    if total < *target {
        return Ok(None);
    }
    let target = to_budgeted_usize(target, budget)?;
    check_cells(r.len().max(1), target + 1, budget)?;
    let profit: Vec<u128> = r.iter().map(|v| v.to_u128().unwrap_or(u128::MAX)).collect();
    let r: Vec<usize> = r
        .iter()
        .map(|v| v.to_usize().unwrap_or(usize::MAX).min(target))
        .collect();
    let ints = integer_costs(costs);
    let sum: BigInt = ints.iter().sum();
    let profit_sum: u128 = profit.iter().fold(0u128, |a, &p| a.saturating_add(p));
    let chosen = match sum.to_u64() {
        // cost in the high half, profit in the low half, MAX for unreachable
        Some(_) if profit_sum < u64::MAX as u128 => {
            let keys: Vec<u128> = ints
                .iter()
                .zip(&profit)
                .map(|(v, &p)| (v.to_u128().expect("<= sum") << 64) | p)
                .collect();
            min_cover_dp_packed(&r, target, &keys)
        }
        _ if sum.to_u128().is_some() => {
            let small: Vec<CostProfit<u128>> = ints
                .iter()
                .zip(&profit)
                .map(|(v, &p)| CostProfit(v.to_u128().expect("<= sum"), p))
                .collect();
            min_cover_dp(&r, target, &small)
        }
        _ => {
            let big: Vec<CostProfit<BigInt>> = ints
                .into_iter()
                .zip(&profit)
                .map(|(v, &p)| CostProfit(v, p))
                .collect();
            min_cover_dp(&r, target, &big)
        }
    };
    Ok(Some(chosen.expect("total profit covers the target")))
}

/// Cost first, then total profit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CostProfit<T>(T, u128);

impl<T: Add<Output = T>> Add for CostProfit<T> {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        CostProfit(self.0 + other.0, self.1.saturating_add(other.1))
    }
}

impl<T: Zero> Zero for CostProfit<T> {
    fn zero() -> Self {
        CostProfit(T::zero(), 0)
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1 == 0
    }
}

/// `f[i][s]`: least cost of items `i..` collecting at least `s` profit,
/// kept as one rolling row plus a bit per cell recording whether taking item
/// `i` is strictly better than skipping it.
fn min_cover_dp<T>(r: &[usize], target: usize, cost: &[T]) -> Option<Vec<usize>>
where
    T: Clone + Ord + Add<Output = T> + Zero,
{
    let n = r.len();
    let width = target + 1;
    let mut f: Vec<Option<T>> = vec![None; width];
    f[0] = Some(T::zero());
    let mut take = vec![false; n * width];
    for i in (0..n).rev() {
        let bits = &mut take[i * width..(i + 1) * width];
        // descending s reads f[s - r_i] before it is overwritten
        for s in (0..width).rev() {
            let Some(from) = &f[s.saturating_sub(r[i])] else {
                continue;
            };
            let with = from.clone() + cost[i].clone();
            if f[s].as_ref().is_none_or(|skip| with < *skip) {
                f[s] = Some(with);
                bits[s] = true;
            }
        }
    }
    f[target].as_ref()?;
    Some(trace(r, target, &take))
}

/// [`min_cover_dp`] on `(cost << 64) | profit` keys, which order the same
/// way and add without carries.
fn min_cover_dp_packed(r: &[usize], target: usize, keys: &[u128]) -> Option<Vec<usize>> {
    const NONE: u128 = u128::MAX;
    let n = r.len();
    let width = target + 1;
    let mut f = vec![NONE; width];
    f[0] = 0;
    let mut take = vec![false; n * width];
    for i in (0..n).rev() {
        let bits = &mut take[i * width..(i + 1) * width];
        let key = keys[i];
        for s in (0..width).rev() {
            let from = f[s.saturating_sub(r[i])];
            if from != NONE && from + key < f[s] {
                f[s] = from + key;
                bits[s] = true;
            }
        }
    }
    if f[target] == NONE {
        return None;
    }
    Some(trace(r, target, &take))
}

fn trace(r: &[usize], target: usize, take: &[bool]) -> Vec<usize> {
    let width = target + 1;
    let mut chosen = Vec::new();
    let mut s = target;
    for (i, &ri) in r.iter().enumerate() {
        if take[i * width + s] {
            chosen.push(i);
            s = s.saturating_sub(ri);
        }
    }
    debug_assert_eq!(s, 0);
    chosen
}

/// `(1 + eps)`-approximate minimum-cost cover.
///
/// A 2-approximation `ub` is found by guessing the most expensive item of an
/// optimal solution and completing greedily by density. Costs are then
/// rounded up to multiples of `delta = eps * (ub/2) / n` and a DP over
/// rounded cost states (at most `2n/eps + n` of them) maximizes capped
/// profit. Rounding adds at most `n * delta <= eps * OPT`.
pub(crate) fn cover_fptas(
    r: &[BigInt],
    target: &BigInt,
    costs: &[Rational],
    eps: &Rational,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    let n = r.len();
    if !target.is_positive() {
        return Ok(Some(Vec::new()));
    }
    let total: BigInt = r.iter().sum();
    if total < *target {
        return Ok(None);
    }
    let useful: Vec<usize> = (0..n).filter(|&i| r[i].is_positive()).collect();

    // zero-cost items alone may already cover
    let free: Vec<usize> = useful
        .iter()
        .copied()
        .filter(|&i| costs[i].is_zero())
        .collect();
    let free_r: BigInt = free.iter().map(|&i| &r[i]).sum();
    if free_r >= *target {
        let mut acc = BigInt::zero();
        let mut chosen = Vec::new();
        for i in free {
            chosen.push(i);
            acc += &r[i];
            if acc >= *target {
                break;
            }
        }
        return Ok(Some(chosen));
    }

    let (ub_set, ub) = two_approx(r, target, costs, &useful);
    debug_assert!(ub.is_positive());
    let nn = Rational::from_integer(BigInt::from(n as u64));
    let delta = eps * &ub / (Rational::from_integer(2.into()) * nn);
    let state_cap = (&ub / &delta).floor().to_integer() + BigInt::from(n as u64);
    let cap = to_budgeted_usize(&state_cap, budget)?;
    check_cells(n + 1, cap + 1, budget)?;

    let mut weight = vec![usize::MAX; n];
    for &i in &useful {
        if costs[i] <= ub {
            let w = (&costs[i] / &delta).ceil().to_integer();
            weight[i] = w.to_usize().expect("bounded by the state cap");
        }
    }
    let chosen = if let Some(t) = target.to_u128() {
        let small: Vec<u128> = r
            .iter()
            .map(|v| v.to_u128().unwrap_or(u128::MAX).min(t))
            .collect();
        max_profit_dp(&small, t, &weight, cap)
    } else {
        let capped: Vec<BigInt> = r.iter().map(|v| v.min(target).clone()).collect();
        max_profit_dp(&capped, target.clone(), &weight, cap)
    };
    let best = match chosen {
        Some(set) => {
            let v: Rational = set.iter().map(|&i| &costs[i]).sum();
            if v <= ub {
                set
            } else {
                ub_set
            }
        }
        None => ub_set,
    };
    Ok(Some(best))
}

/// Best of the "guess the most expensive item, then greedy by density"
/// completions. Within a factor 2 of optimal.
fn two_approx(
    r: &[BigInt],
    target: &BigInt,
    costs: &[Rational],
    useful: &[usize],
) -> (Vec<usize>, Rational) {
    let mut by_density = useful.to_vec();
    // c_a / r_a < c_b / r_b  <=>  c_a r_b < c_b r_a
    by_density.sort_by(|&a, &b| {
        let lhs = &costs[a] * Rational::from_integer(r[b].clone());
        let rhs = &costs[b] * Rational::from_integer(r[a].clone());
        lhs.cmp(&rhs).then(a.cmp(&b))
    });
    let mut best: Option<(Vec<usize>, Rational)> = None;
    for &j in useful {
        let mut set = vec![j];
        let mut value = costs[j].clone();
        let mut acc = r[j].clone();
        if acc < *target {
            for &i in &by_density {
                if i == j || costs[i] > costs[j] {
                    continue;
                }
                set.push(i);
                value += &costs[i];
                acc += &r[i];
                if acc >= *target {
                    break;
                }
            }
        }
        if acc < *target {
            continue;
        }
        let better = match &best {
            Some((_, v)) => value.cmp(v) == Ordering::Less,
            None => true,
        };
        if better {
            set.sort_unstable();
            best = Some((set, value));
        }
    }
    best.expect("the instance covers the target")
}

/// `g[i][k]`: largest profit (capped at `target`) of items `i..` with
/// rounded cost at most `k`. Returns the chosen set for the least `k`
/// reaching `target`.
fn max_profit_dp<T>(r: &[T], target: T, weight: &[usize], cap: usize) -> Option<Vec<usize>>
where
    T: Clone + Ord + Add<Output = T> + Sub<Output = T> + Zero,
{
    let n = r.len();
    let width = cap + 1;
    let mut g: Vec<T> = vec![T::zero(); (n + 1) * width];
    for i in (0..n).rev() {
        let (head, tail) = g.split_at_mut((i + 1) * width);
        let next = &tail[..width];
        let cur = &mut head[i * width..];
        for k in 0..width {
            let mut best = next[k].clone();
            if weight[i] <= k {
                let take = r[i].clone() + next[k - weight[i]].clone();
                let take = if take > target { target.clone() } else { take };
                if take > best {
                    best = take;
                }
            }
            cur[k] = best;
        }
    }
    let k_star = (0..width).find(|&k| g[k] >= target)?;
    let mut chosen = Vec::new();
    let mut k = k_star;
    let mut need = target;
    for i in 0..n {
        if need.is_zero() {
            break;
        }
        if g[(i + 1) * width + k] >= need {
            continue;
        }
        chosen.push(i);
        k -= weight[i];
        need = if r[i] >= need {
            T::zero()
        } else {
            need - r[i].clone()
        };
    }
    Some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cost, then profit, then the characteristic vector read from item 0.
    fn brute_cover(r: &[u64], target: u64, costs: &[u64]) -> Vec<usize> {
        let n = r.len();
        (0u32..1 << n)
            .filter(|m| {
                (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| r[i])
                    .sum::<u64>()
                    >= target
            })
            .min_by_key(|m| {
                let set: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
                let bits: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                (
                    set.iter().map(|&i| costs[i]).sum::<u64>(),
                    set.iter().map(|&i| r[i]).sum::<u64>(),
                    bits,
                )
            })
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .unwrap()
    }

    #[test]
    fn cover_exact_tie_rule_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(1..=7);
            let r: Vec<u64> = (0..n).map(|_| rng.gen_range(0..6)).collect();
            let costs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let total: u64 = r.iter().sum();
            let target = rng.gen_range(1..=total.max(1));
            if total < target {
                continue;
            }
            let big_r: Vec<BigInt> = r.iter().map(|&v| BigInt::from(v)).collect();
            let rc: Vec<Rational> = costs.iter().map(|&c| int(c as i64)).collect();
            let got = cover_exact(&big_r, &BigInt::from(target), &rc, DEFAULT_DP_BUDGET)
                .unwrap()
                .unwrap();
            assert_eq!(
                got,
                brute_cover(&r, target, &costs),
                "r={r:?} c={costs:?} t={target}"
            );
        }
    }

    #[test]
    fn wide_costs_keep_the_same_cover() {
        // scaling every cost by one factor changes nothing but the DP width
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for shift in [70u32, 130] {
            let factor = Rational::from_integer(BigInt::from(1u8) << shift);
            for _ in 0..200 {
                let n = rng.gen_range(1..=7);
                let r: Vec<u64> = (0..n).map(|_| rng.gen_range(0..6)).collect();
                let costs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                let total: u64 = r.iter().sum();
                if total == 0 {
                    continue;
                }
                let target = rng.gen_range(1..=total);
                let big_r: Vec<BigInt> = r.iter().map(|&v| BigInt::from(v)).collect();
                let rc: Vec<Rational> = costs.iter().map(|&c| int(c as i64) * &factor).collect();
                let got = cover_exact(&big_r, &BigInt::from(target), &rc, DEFAULT_DP_BUDGET)
                    .unwrap()
                    .unwrap();
                assert_eq!(
                    got,
                    brute_cover(&r, target, &costs),
                    "shift={shift} r={r:?} c={costs:?}"
                );
            }
        }
    }

    fn brute(inst: &Instance, objective: &[Rational]) -> Rational {
        let n = inst.len();
        (0u32..1 << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|s| inst.is_feasible_set(s))
            .map(|s| s.iter().map(|&i| &objective[i]).sum::<Rational>())
            .min()
            .unwrap()
    }

    #[test]
    fn single_item() {
        let inst = Instance::from_profits_costs(&[int(1)], &[rat(7, 3)]).unwrap();
        let s = solve_exact(&inst, inst.costs()).unwrap();
        assert_eq!(s.value, rat(7, 3));
        assert_eq!(s.chosen, vec![0]);
    }

    #[test]
    fn exact_matches_brute_force_small() {
        let inst = Instance::from_profits_costs(
            &[rat(3, 10), rat(4, 10), rat(5, 10), rat(8, 10)],
            &[int(3), int(2), int(4), int(5)],
        )
        .unwrap();
        let s = solve_exact(&inst, inst.costs()).unwrap();
        assert_eq!(s.value, brute(&inst, inst.costs()));
        assert!(inst.is_feasible_set(&s.chosen));
    }

    #[test]
    fn budget_is_enforced() {
        let inst =
            Instance::from_profits_costs(&[rat(1, 1000), int(1)], &[int(1), int(1)]).unwrap();
        let err = solve_exact_budgeted(&inst, inst.costs(), 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn palpha_example() {
        let inst = Instance::from_profits_costs(
            &[rat(3, 10), rat(4, 10), rat(5, 10), rat(8, 10)],
            &vec![int(1); 4],
        )
        .unwrap();
        let x = Point::new(vec![int(0), int(0), rat(1, 2), rat(2, 5)]).unwrap();
        let s = solve_palpha(&inst, &x, &rat(1, 10), &SolveMode::Exact).unwrap();
        assert_eq!(s.value, rat(4, 5));
        assert_eq!(s.chosen, vec![0, 3]);
        assert!(solve_palpha(&inst, &x, &rat(1, 20), &SolveMode::Exact).is_err());
        assert!(solve_palpha(&inst, &x, &int(0), &SolveMode::Exact).is_err());
    }

    #[test]
    fn fptas_zero_cost_cover() {
        let inst = Instance::from_profits_costs(&[rat(1, 2), rat(1, 2), int(1)], &vec![int(1); 3])
            .unwrap();
        let obj = vec![int(0), int(0), int(5)];
        let s = solve_fptas(&inst, &obj, &rat(1, 10)).unwrap();
        assert_eq!(s.value, int(0));
    }
}
