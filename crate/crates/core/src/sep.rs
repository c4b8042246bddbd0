//! Separation oracles.
//!
//! * [`separate_pitch12`]: the `(1+eps)`-oracle for the knapsack row, all
//!   pitch-1 and all pitch-2 inequalities, built on the subproblems of
//!   [`knapdp::solve_palpha`];
//! * [`separate_kc`]: knapsack-cover separation, heuristic or exhaustive;
//! * [`separate_fixed_support`]: the LP over all valid inequalities with a
//!   prescribed support, solved by row generation;
//! * [`enumerate_pitch1`], [`enumerate_pitch2`]: brute-force lists for small
//!   instances;
//! * [`implied_by`]: the conic implication test.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::knapdp::{self, SolveMode};
use crate::model::rational::common_denominator;
use crate::model::{kc_inequality, Family, Inequality, Instance, Pitch2Canonical, Point, Rational};
use crate::ratlp::{self, LpModel, Row, Sense};

/// A cut together with how far the query point is from satisfying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolatedCut {
    pub cut: Inequality,
    /// `rhs - lhs(x)`, strictly positive.
    pub violation: Rational,
}

impl ViolatedCut {
    fn at(cut: Inequality, x: &Point) -> ViolatedCut {
        let violation = cut.violation(x);
        ViolatedCut { cut, violation }
    }

    /// Violation divided by the rhs, for comparing cuts of different scale.
    pub fn relative(&self) -> Rational {
        &self.violation / self.cut.rhs()
    }

    pub fn family(&self) -> Family {
        self.cut.family()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationResult {
    Violated(ViolatedCut),
    /// `xbar <= ybar <= (1+eps) xbar`, `ybar` in the unit cube, satisfying
    /// the whole family.
    Certified(Point),
}

impl SeparationResult {
    pub fn violated(&self) -> Option<&ViolatedCut> {
        match self {
            SeparationResult::Violated(v) => Some(v),
            SeparationResult::Certified(_) => None,
        }
    }
}

/// How the pitch-1/pitch-2 oracle solves its subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Exact DP; a certificate is the query point itself.
    Exact,
    /// FPTAS with `eps' = eps / (2 + eps)`; the certificate is inflated by
    /// at most `1 + eps`.
    Approximate,
}

fn check_point(inst: &Instance, xbar: &Point) -> Result<()> {
    if xbar.len() != inst.len() {
        return Err(Error::DimensionMismatch {
            expected: inst.len(),
            got: xbar.len(),
        });
    }
    Ok(())
}

/// `p·x >= 1`.
pub fn knapsack_row(inst: &Instance) -> Inequality {
    Inequality::new(
        inst.profits().iter().cloned().enumerate(),
        Rational::one(),
        Family::KnapsackRow,
    )
    .expect("a feasible instance has a positive profit")
}

/// `sum_{i in set, p_i > 0} x_i >= 1`.
fn pitch1_cut(inst: &Instance, set: &[usize]) -> Inequality {
    let support: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&i| inst.profit(i).is_positive())
        .collect();
    Inequality::unit(&support, Rational::one(), Family::Pitch1).expect("rhs is 1")
}

/// The cut read off a subproblem solution `I`: the canonical pitch-2
/// inequality split at the true `beta(I)`, or the pitch-1 inequality on `I`
/// when no item of `I` lies below `beta(I)`.
fn cut_from_support(inst: &Instance, support: &[usize]) -> Result<Inequality> {
    let split = Pitch2Canonical::split(inst, support)?;
    if split.light.is_empty() {
        Ok(pitch1_cut(inst, &split.support))
    } else {
        split.inequality()
    }
}

fn subproblem_mode(eps: &Rational, mode: OracleMode) -> Result<SolveMode> {
    if !eps.is_positive() {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    Ok(match mode {
        OracleMode::Exact => SolveMode::Exact,
        OracleMode::Approximate => {
            let two = Rational::from_integer(2.into());
            SolveMode::Fptas(eps / (two + eps))
        }
    })
}

/// Residual demands `(r_i + 1)/q <= 1`, distinct and increasing.
pub fn alpha_grid(inst: &Instance) -> Vec<Rational> {
    let mut rs: Vec<BigInt> = inst
        .r()
        .iter()
        .map(|r| r + 1)
        .filter(|r| r <= inst.q())
        .collect();
    rs.sort();
    rs.dedup();
    rs.into_iter()
        .map(|r| Rational::new(r, inst.q().clone()))
        .collect()
}

/// The `(1+eps)`-oracle for the knapsack row, pitch-1 and pitch-2
/// inequalities.
///
/// Checks the knapsack row first. Then the subproblem is solved at
/// `alpha = 1/q` (pitch-1) and at every `alpha` of [`alpha_grid`]; the cut
/// with the largest violation relative to its rhs wins, ties going to the
/// smaller alpha. If nothing is found the point, inflated by `1 + eps` and
/// clipped at 1, is certified.
pub fn separate_pitch12(
    inst: &Instance,
    xbar: &Point,
    eps: &Rational,
    mode: OracleMode,
) -> Result<SeparationResult> {
    check_point(inst, xbar)?;
    let row = knapsack_row(inst);
    if row.is_violated_by(xbar) {
        return Ok(SeparationResult::Violated(ViolatedCut::at(row, xbar)));
    }
    pitch12_oracle(inst, xbar, eps, mode)
}

/// [`separate_pitch12`] without the knapsack-row check: only pitch-1 and
/// pitch-2 cuts are returned, and a certificate says nothing about the row.
pub fn pitch12_oracle(
    inst: &Instance,
    xbar: &Point,
    eps: &Rational,
    mode: OracleMode,
) -> Result<SeparationResult> {
    check_point(inst, xbar)?;
    let solve_mode = subproblem_mode(eps, mode)?;
    let two = Rational::from_integer(2.into());

    let mut best = separate_pitch1_with(inst, xbar, &solve_mode)?;
    for alpha in alpha_grid(inst) {
        let sol = knapdp::solve_palpha(inst, xbar, &alpha, &solve_mode)?;
        if sol.value >= two {
            continue;
        }
        let found = ViolatedCut::at(cut_from_support(inst, &sol.chosen)?, xbar);
        debug_assert!(found.violation.is_positive());
        if best
            .as_ref()
            .is_none_or(|b| found.relative() > b.relative())
        {
            best = Some(found);
        }
    }
    if let Some(found) = best {
        return Ok(SeparationResult::Violated(found));
    }
    let ybar = match mode {
        OracleMode::Exact => xbar.clone(),
        OracleMode::Approximate => {
            let factor = Rational::one() + eps;
            Point::new(
                xbar.coords()
                    .iter()
                    .map(|v| (v * &factor).min(Rational::one()))
                    .collect(),
            )?
        }
    };
    Ok(SeparationResult::Certified(ybar))
}

/// Pitch-1 separation alone: the subproblem at `alpha = 1/q`.
pub fn separate_pitch1(
    inst: &Instance,
    xbar: &Point,
    eps: &Rational,
    mode: OracleMode,
) -> Result<Option<ViolatedCut>> {
    check_point(inst, xbar)?;
    separate_pitch1_with(inst, xbar, &subproblem_mode(eps, mode)?)
}

fn separate_pitch1_with(
    inst: &Instance,
    xbar: &Point,
    mode: &SolveMode,
) -> Result<Option<ViolatedCut>> {
    let alpha = Rational::new(BigInt::one(), inst.q().clone());
    let sol = knapdp::solve_palpha(inst, xbar, &alpha, mode)?;
    if sol.value >= Rational::from_integer(2.into()) {
        return Ok(None);
    }
    let found = ViolatedCut::at(pitch1_cut(inst, &sol.chosen), xbar);
    debug_assert!(found.violation.is_positive());
    Ok(Some(found))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcMode {
    /// Sets `{i : xbar_i >= t}` for thresholds `t` among the coordinates
    /// and 1/2, plus the empty set. No completeness claim.
    Heuristic,
    /// Every set with positive residual demand; `n <= 20`.
    Exhaustive,
}

pub const KC_EXHAUSTIVE_LIMIT: usize = 20;

/// Most violated knapsack-cover inequality among the tested sets, if any.
pub fn separate_kc(inst: &Instance, xbar: &Point, mode: KcMode) -> Result<Option<ViolatedCut>> {
    check_point(inst, xbar)?;
    match mode {
        KcMode::Heuristic => {
            let mut thresholds: Vec<Rational> = xbar.coords().to_vec();
            thresholds.push(Rational::new(1.into(), 2.into()));
            thresholds.retain(|t| t.is_positive());
            thresholds.sort();
            thresholds.dedup();
            let mut sets: Vec<Vec<usize>> = vec![Vec::new()];
            for t in thresholds {
                let s: Vec<usize> = (0..inst.len()).filter(|&i| xbar[i] >= t).collect();
                if !sets.contains(&s) {
                    sets.push(s);
                }
            }
            let mut best: Option<ViolatedCut> = None;
            for s in sets {
                if Rational::one() - inst.profit_of(&s) <= Rational::zero() {
                    continue;
                }
                let found = ViolatedCut::at(kc_inequality(inst, &s)?, xbar);
                if found.violation.is_positive()
                    && best.as_ref().is_none_or(|b| found.violation > b.violation)
                {
                    best = Some(found);
                }
            }
            Ok(best)
        }
        KcMode::Exhaustive => {
            let n = inst.len();
            if n > KC_EXHAUSTIVE_LIMIT {
                return Err(Error::SizeGuard {
                    n,
                    limit: KC_EXHAUSTIVE_LIMIT,
                });
            }
            let Some(set) = most_violated_kc_set(inst, xbar) else {
                return Ok(None);
            };
            let found = ViolatedCut::at(kc_inequality(inst, &set)?, xbar);
            debug_assert!(found.violation.is_positive());
            Ok(Some(found))
        }
    }
}

/// Enumerates every `S` with `p(S) < 1` and returns the one whose KC
/// inequality is most violated (first in mask order on ties).
fn most_violated_kc_set(inst: &Instance, xbar: &Point) -> Option<Vec<usize>> {
    let n = inst.len();
    let d = common_denominator(xbar.coords());
    let to_i128 = |v: &BigInt| v.to_i128().filter(|x| x.abs() < 1 << 40);
    let fast = (|| {
        let q = to_i128(inst.q())?;
        let r: Vec<i128> = inst.r().iter().map(to_i128).collect::<Option<_>>()?;
        let scale = to_i128(&d)?;
        let x: Vec<i128> = xbar
            .coords()
            .iter()
            .map(|v| to_i128(&(v * Rational::from_integer(d.clone())).to_integer()))
            .collect::<Option<_>>()?;
        Some((q, r, scale, x))
    })();

    let masks = 0u32..(1u32 << n);
    match fast {
        Some((q, r, scale, x)) => {
            // violation * q * D = b D - sum_{i not in S} min(r_i, b) X_i
            let mut best: Option<(i128, u32)> = None;
            for mask in masks {
                let rs: i128 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).sum();
                let b = q - rs;
                if b <= 0 {
                    continue;
                }
                let lhs: i128 = (0..n)
                    .filter(|i| mask >> i & 1 == 0)
                    .map(|i| r[i].min(b) * x[i])
                    .sum();
                let v = b * scale - lhs;
                if v > 0 && best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, mask));
                }
            }
            best.map(|(_, mask)| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        }
        None => {
            let mut best: Option<(Rational, Vec<usize>)> = None;
            for mask in masks {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                if Rational::one() - inst.profit_of(&s) <= Rational::zero() {
                    continue;
                }
                let v = kc_inequality(inst, &s).ok()?.violation(xbar);
                if v.is_positive() && best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, s));
                }
            }
            best.map(|(_, s)| s)
        }
    }
}

/// State of a fixed-support separation: the support, its residual demand
/// and the massive sets generated so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSupportQuery {
    pub support: Vec<usize>,
    /// `1 - p([n] \ I)`.
    pub beta: Rational,
    /// Massive sets `J` (profit at least `beta`) generated as rows.
    pub massive_rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSupportOutcome {
    /// Optimal coefficient per support item (zeros included), in support order.
    pub alpha: Vec<(usize, Rational)>,
    /// `sum alpha_i xbar_i` at the optimum.
    pub value: Rational,
    /// `value < 1`.
    pub violated: bool,
    /// `alpha · x >= 1` with zero coefficients dropped, when violated.
    pub cut: Option<ViolatedCut>,
    pub query: FixedSupportQuery,
}

/// Most violated valid inequality `alpha · x >= 1` with support inside `I`.
///
/// Minimizes `sum_{i in I} alpha_i xbar_i` over `alpha >= 0` with
/// `sum_{j in J} alpha_j >= 1` for every massive `J` of `I`. The massive
/// rows are generated lazily: the most violated one is a min-knapsack over
/// `I` with costs `alpha` solved exactly. Generation starts from `J = I`
/// and all massive singletons, the latter as bounds `alpha_i >= 1`.
///
/// With `pitch_bound = Some(k)` the search is restricted to inequalities of
/// pitch at most `k`: every `k`-subset of `I` must also sum to 1, that is
/// the `k` smallest coefficients must. By LP duality that holds exactly when
/// some `lambda, mu >= 0` have `k lambda - sum mu_i >= 1` and
/// `alpha_i + mu_i >= lambda`, which the LP carries as extra columns.
pub fn separate_fixed_support(
    inst: &Instance,
    xbar: &Point,
    support: &[usize],
    pitch_bound: Option<usize>,
) -> Result<FixedSupportOutcome> {
    check_point(inst, xbar)?;
    FixedSupportSeparator::new(inst, support, pitch_bound)?.separate(inst, xbar)
}

/// [`separate_fixed_support`] for repeated queries on one support. Each
/// query restarts the LP from the previous optimal basis; generated rows
/// that no longer bind are dropped in between.
#[derive(Debug, Clone)]
pub struct FixedSupportSeparator {
    /// Integer profits over `I`.
    sub_r: Vec<BigInt>,
    /// `beta(I) * q`.
    demand: BigInt,
    lp: ratlp::IncrementalLp,
    /// LP rows before the generated ones.
    fixed_rows: usize,
    query: FixedSupportQuery,
}

impl FixedSupportSeparator {
    pub fn new(inst: &Instance, support: &[usize], pitch_bound: Option<usize>) -> Result<Self> {
        let n = inst.len();
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if let Some(&i) = support.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if pitch_bound == Some(0) {
            return Err(Error::Precondition("pitch bound must be positive".into()));
        }
        let beta = inst.beta_of_support(&support);
        if !beta.is_positive() {
            return Err(Error::Precondition(format!(
                "no valid inequality with this support: beta(I) = {beta}"
            )));
        }
        let sub_r: Vec<BigInt> = support.iter().map(|&i| inst.r()[i].clone()).collect();
        let demand = (&beta * Rational::from_integer(inst.q().clone())).to_integer();

        let mut query = FixedSupportQuery {
            support: support.clone(),
            beta: beta.clone(),
            massive_rows: vec![support.clone()],
        };
        let m = support.len();
        let mut model = LpModel::new();
        for &i in &support {
            let massive = m > 1 && *inst.profit(i) >= beta;
            let lower = if massive {
                Rational::one()
            } else {
                Rational::zero()
            };
            model.add_var(lower, None, Rational::zero());
            if massive {
                query.massive_rows.push(vec![i]);
            }
        }
        let all: Vec<usize> = (0..m).collect();
        model.push_row(cover_row(&all));
        if let Some(k) = pitch_bound.filter(|&k| k < m) {
            let lambda = model.add_var(Rational::zero(), None, Rational::zero());
            let mu: Vec<usize> = (0..m)
                .map(|_| model.add_var(Rational::zero(), None, Rational::zero()))
                .collect();
            let mut terms = vec![(lambda, Rational::from_integer(k.into()))];
            terms.extend(mu.iter().map(|&u| (u, -Rational::one())));
            model.push_row(Row::new(terms, Sense::Ge, Rational::one()));
            for (i, &u) in mu.iter().enumerate() {
                model.push_row(Row::new(
                    vec![
                        (i, Rational::one()),
                        (u, Rational::one()),
                        (lambda, -Rational::one()),
                    ],
                    Sense::Ge,
                    Rational::zero(),
                ));
            }
        }
        let fixed_rows = model.num_rows();
        let lp = ratlp::IncrementalLp::new(&model)?.expect("zero costs are dual feasible");
        Ok(FixedSupportSeparator {
            sub_r,
            demand,
            lp,
            fixed_rows,
            query,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.query.support
    }

    pub fn separate(&mut self, inst: &Instance, xbar: &Point) -> Result<FixedSupportOutcome> {
        check_point(inst, xbar)?;
        let support = self.query.support.clone();
        let m = support.len();
        let mut cost: Vec<Rational> = support.iter().map(|&i| xbar[i].clone()).collect();
        cost.resize(self.lp.num_vars(), Rational::zero());
        self.lp.set_costs(&cost)?;
        let sol = loop {
            let sol = self.lp.solve();
            debug_assert!(
                sol.is_optimal(),
                "alpha = 1 on I is feasible and the objective is >= 0"
            );
            let alpha = &sol.x[..m];
            let chosen =
                knapdp::cover_exact(&self.sub_r, &self.demand, alpha, knapdp::DEFAULT_DP_BUDGET)?
                    .expect("I itself is massive");
            let weight: Rational = chosen.iter().map(|&k| &alpha[k]).sum();
            if weight >= Rational::one() {
                break sol;
            }
            self.query
                .massive_rows
                .push(chosen.iter().map(|&k| support[k]).collect());
            self.lp.add_row(&cover_row(&chosen))?;
        };
        self.lp.drop_basic_rows(self.fixed_rows);

        let alpha: Vec<(usize, Rational)> = support.iter().copied().zip(sol.x).collect();
        let value = sol.objective;
        let violated = value < Rational::one();
        let cut = if violated {
            let ineq =
                Inequality::new(alpha.iter().cloned(), Rational::one(), Family::FixedSupport)?;
            Some(ViolatedCut::at(ineq, xbar))
        } else {
            None
        };
        Ok(FixedSupportOutcome {
            alpha,
            value,
            violated,
            cut,
            query: self.query.clone(),
        })
    }
}

fn cover_row(cols: &[usize]) -> Row {
    Row::new(
        cols.iter().map(|&k| (k, Rational::one())).collect(),
        Sense::Ge,
        Rational::one(),
    )
}

pub const PITCH1_ENUM_LIMIT: usize = 20;
pub const PITCH2_ENUM_LIMIT: usize = 16;

fn small_r(inst: &Instance) -> Result<(Vec<i128>, i128)> {
    let conv = |v: &BigInt| {
        v.to_i128()
            .filter(|x| *x < 1 << 100)
            .ok_or_else(|| Error::Precondition("profit denominator too large to enumerate".into()))
    };
    Ok((
        inst.r().iter().map(conv).collect::<Result<_>>()?,
        conv(inst.q())?,
    ))
}

/// All undominated valid pitch-1 inequalities `sum_{i in T} x_i >= 1`: the
/// inclusion-minimal `T` whose complement has profit below 1.
pub fn enumerate_pitch1(inst: &Instance) -> Result<Vec<Inequality>> {
    let n = inst.len();
    if n > PITCH1_ENUM_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: PITCH1_ENUM_LIMIT,
        });
    }
    let (r, q) = small_r(inst)?;
    let total: i128 = r.iter().sum();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let inside: i128 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).sum();
        let outside = total - inside;
        if outside >= q {
            continue;
        }
        let minimal = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .all(|i| outside + r[i] >= q);
        if minimal {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            out.push(Inequality::unit(&set, Rational::one(), Family::Pitch1)?);
        }
    }
    Ok(out)
}

/// Every canonical pitch-2 inequality of the instance.
pub fn enumerate_pitch2(inst: &Instance) -> Result<Vec<Inequality>> {
    let n = inst.len();
    if n > PITCH2_ENUM_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: PITCH2_ENUM_LIMIT,
        });
    }
    let (r, q) = small_r(inst)?;
    let total: i128 = r.iter().sum();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let inside: i128 = set.iter().map(|&i| r[i]).sum();
        let beta = q - (total - inside);
        if beta <= 0 || !set.iter().any(|&i| r[i] < beta) {
            continue;
        }
        let ineq = Pitch2Canonical::split(inst, &set)?.inequality()?;
        if seen.insert(ineq.clone()) {
            out.push(ineq);
        }
    }
    Ok(out)
}

/// Whether `target` follows from `family` and nonnegativity: some
/// `lambda >= 0` has `sum_k lambda_k w^k <= w_target` componentwise and
/// `sum_k lambda_k beta_k >= beta_target`. Decided by an exact LP.
pub fn implied_by(target: &Inequality, family: &[Inequality], n: usize) -> Result<bool> {
    for ineq in std::iter::once(target).chain(family) {
        if let Some(i) = ineq.max_index() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
        }
    }
    let target_coeffs = target.dense(n);
    // members touching an index outside the target's support must get lambda = 0
    let usable: Vec<&Inequality> = family
        .iter()
        .filter(|f| {
            f.terms()
                .iter()
                .all(|(i, _)| target_coeffs[*i].is_positive())
        })
        .collect();
    if usable.is_empty() {
        return Ok(false);
    }
    let mut model = LpModel::new();
    for _ in &usable {
        model.add_var(Rational::zero(), None, Rational::zero());
    }
    for (j, _) in target.terms() {
        let coeffs: Vec<(usize, Rational)> = usable
            .iter()
            .enumerate()
            .map(|(k, f)| (k, f.coeff(*j)))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        if !coeffs.is_empty() {
            model.add_row(coeffs, Sense::Le, target_coeffs[*j].clone());
        }
    }
    model.add_row(
        usable
            .iter()
            .enumerate()
            .map(|(k, f)| (k, f.rhs().clone()))
            .collect(),
        Sense::Ge,
        target.rhs().clone(),
    );
    Ok(ratlp::solve_lp(&model)?.is_optimal())
}
