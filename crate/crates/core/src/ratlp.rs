//! Exact rational linear programming.
//!
//! A warm-startable bounded dual simplex for models that start dual
//! feasible (all the LPs in this crate), and a dense two-phase primal
//! simplex with Bland's rule for everything else. Every quantity is an
//! exact rational, so there are no tolerances: a reduced cost is negative
//! or it is not.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, Rational)>, sense: Sense, rhs: Rational) -> Row {
        Row { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Ge => lhs >= self.rhs,
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub lower: Rational,
    pub upper: Option<Rational>,
    pub cost: Rational,
}

/// `min c·x  s.t.  rows, lower <= x <= upper`. Lower bounds are finite.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl LpModel {
    pub fn new() -> LpModel {
        LpModel::default()
    }

    pub fn add_var(&mut self, lower: Rational, upper: Option<Rational>, cost: Rational) -> usize {
        self.vars.push(Variable { lower, upper, cost });
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        coeffs: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> usize {
        self.rows.push(Row::new(coeffs, sense, rhs));
        self.rows.len() - 1
    }

    pub fn push_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.vars.iter().zip(x).map(|(v, x)| &v.cost * x).sum()
    }

    fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if let Some(u) = &v.upper {
                if *u < v.lower {
                    return Err(Error::MalformedModel(format!(
                        "variable {j}: upper bound {u} below lower bound {}",
                        v.lower
                    )));
                }
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= self.vars.len()) {
                return Err(Error::MalformedModel(format!(
                    "row {i} references variable {j} of {}",
                    self.vars.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// One multiplier per row; `>= 0` on `Ge` rows, `<= 0` on `Le` rows.
    pub duals: Vec<Rational>,
    /// `c_j - sum_i duals_i a_ij` per variable.
    pub reduced_costs: Vec<Rational>,
}

impl LpSolution {
    fn not_optimal(status: LpStatus) -> LpSolution {
        LpSolution {
            status,
            x: Vec::new(),
            objective: Rational::zero(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `b·y + sum_j (l_j d_j^+ + u_j d_j^-)`, the value of the dual
    /// solution read off the final basis.
    pub fn dual_objective(&self, model: &LpModel) -> Rational {
        let rows: Rational = model
            .rows
            .iter()
            .zip(&self.duals)
            .map(|(r, y)| &r.rhs * y)
            .sum();
        let bounds: Rational = model
            .vars
            .iter()
            .zip(&self.reduced_costs)
            .map(|(v, d)| {
                if d.is_positive() {
                    &v.lower * d
                } else if d.is_negative() {
                    v.upper
                        .as_ref()
                        .expect("negative reduced cost needs an upper bound")
                        * d
                } else {
                    Rational::zero()
                }
            })
            .sum();
        rows + bounds
    }

    /// Checks primal feasibility, dual sign conditions, complementary
    /// slackness and equality of primal and dual objectives.
    pub fn check_optimality(&self, model: &LpModel) -> std::result::Result<(), String> {
        if !self.is_optimal() {
            return Err("not optimal".into());
        }
        for (j, (v, x)) in model.vars.iter().zip(&self.x).enumerate() {
            if *x < v.lower || v.upper.as_ref().is_some_and(|u| x > u) {
                return Err(format!("variable {j} = {x} violates its bounds"));
            }
            let d = &self.reduced_costs[j];
            if d.is_positive() && *x != v.lower {
                return Err(format!(
                    "variable {j}: positive reduced cost off its lower bound"
                ));
            }
            if d.is_negative() && Some(x) != v.upper.as_ref() {
                return Err(format!(
                    "variable {j}: negative reduced cost off its upper bound"
                ));
            }
        }
        // sums of many unlike fractions: GMP is much faster here
        let x: Vec<Big> = self.x.iter().map(big).collect();
        let mut expected: Vec<Big> = model.vars.iter().map(|v| big(&v.cost)).collect();
        for (i, (row, y)) in model.rows.iter().zip(&self.duals).enumerate() {
            let coeffs: Vec<(usize, Big)> = row.coeffs.iter().map(|(j, a)| (*j, big(a))).collect();
            let mut lhs = Big::new();
            for (j, a) in &coeffs {
                lhs += Big::from(a * &x[*j]);
            }
            let rhs = big(&row.rhs);
            let satisfied = match row.sense {
                Sense::Ge => lhs >= rhs,
                Sense::Le => lhs <= rhs,
                Sense::Eq => lhs == rhs,
            };
            if !satisfied {
                return Err(format!("row {i} violated"));
            }
            let sign_ok = match row.sense {
                Sense::Ge => !y.is_negative(),
                Sense::Le => !y.is_positive(),
                Sense::Eq => true,
            };
            if !sign_ok {
                return Err(format!("row {i}: dual {y} has the wrong sign"));
            }
            if y.is_zero() {
                continue;
            }
            if lhs != rhs {
                return Err(format!("row {i}: nonzero dual on a slack row"));
            }
            let y = big(y);
            for (j, a) in &coeffs {
                expected[*j] -= Big::from(a * &y);
            }
        }
        if let Some(j) = (0..expected.len()).find(|&j| unbig(&expected[j]) != self.reduced_costs[j])
        {
            return Err(format!("variable {j}: inconsistent reduced cost"));
        }
        if self.dual_objective(model) != self.objective {
            return Err("primal and dual objectives differ".into());
        }
        Ok(())
    }
}

/// Solves the model to exact optimality.
///
/// Models whose cost signs allow a dual feasible start (every cost
/// nonnegative, or nonpositive on a variable with an upper bound) go to the
/// dual simplex of [`IncrementalLp`]; the rest to the two-phase primal
/// simplex. Returns `Err` only for malformed models; infeasibility and
/// unboundedness are reported through [`LpSolution::status`].
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    match IncrementalLp::new(model)? {
        Some(mut lp) => Ok(lp.solve()),
        None => solve_lp_primal(model),
    }
}

/// Two-phase bounded primal simplex with Bland's rule, from scratch.
pub fn solve_lp_primal(model: &LpModel) -> Result<LpSolution> {
    model.validate()?;
    let sol = Tableau::build(model).run(model);
    debug_assert!(
        !sol.is_optimal() || sol.check_optimality(model).is_ok(),
        "{:?}",
        sol.check_optimality(model)
    );
    Ok(sol)
}

/// Row generation: solves, asks `separate` for violated rows, adds them
/// and resolves until `separate` returns none or the LP stops being
/// optimal. The added rows stay in `model`. Re-solves are warm started when
/// the model admits the dual simplex.
pub fn solve_lp_with_rows<F>(model: &mut LpModel, mut separate: F) -> Result<LpSolution>
where
    F: FnMut(&LpSolution) -> Result<Vec<Row>>,
{
    if let Some(mut lp) = IncrementalLp::new(model)? {
        loop {
            let sol = lp.solve();
            if !sol.is_optimal() {
                return Ok(sol);
            }
            let rows = separate(&sol)?;
            if rows.is_empty() {
                return Ok(sol);
            }
            for row in rows {
                lp.add_row(&row)?;
                model.push_row(row);
            }
        }
    }
    loop {
        let sol = solve_lp_primal(model)?;
        if !sol.is_optimal() {
            return Ok(sol);
        }
        let rows = separate(&sol)?;
        if rows.is_empty() {
            return Ok(sol);
        }
        for row in rows {
            model.push_row(row);
        }
    }
}

/// Consecutive degenerate dual steps before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

type Big = rug::Rational;

fn to_rug(v: &BigInt) -> rug::Integer {
    let (sign, digits) = v.to_u32_digits();
    let abs = rug::Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if sign == num_bigint::Sign::Minus {
        -abs
    } else {
        abs
    }
}

fn from_rug(v: &rug::Integer) -> BigInt {
    let digits = v.to_digits::<u32>(rug::integer::Order::Lsf);
    let sign = match v.cmp0() {
        Ordering::Less => num_bigint::Sign::Minus,
        Ordering::Equal => num_bigint::Sign::NoSign,
        Ordering::Greater => num_bigint::Sign::Plus,
    };
    BigInt::from_slice(sign, &digits)
}

fn big(r: &Rational) -> Big {
    Big::from((to_rug(r.numer()), to_rug(r.denom())))
}

fn unbig(r: &Big) -> Rational {
    Rational::new_raw(from_rug(r.numer()), from_rug(r.denom()))
}

fn big_bound(r: &Option<Rational>) -> Option<Big> {
    r.as_ref().map(big)
}

/// Tableau integers. `None` means the result does not fit.
trait Int: Clone + PartialEq + std::fmt::Debug {
    fn from_bigint(v: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn sign(&self) -> Ordering;
    fn is_one(&self) -> bool;
    fn nil() -> Self;
    fn neg_c(&self) -> Option<Self>;
    fn abs_c(&self) -> Option<Self>;
    /// `self + f * r`.
    fn add_mul(&self, f: &Self, r: &Self) -> Option<Self>;
    fn mul_c(&self, o: &Self) -> Option<Self>;
    /// Nonnegative gcd.
    fn gcd_with(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn approx(&self) -> f64;
    /// `q * self`.
    fn times(&self, q: &Big) -> Big;
    /// `q / self`.
    fn under(&self, q: &Big) -> Big;

    fn is_nil(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

impl Int for i128 {
    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128().filter(|&v| v != i128::MIN)
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn sign(&self) -> Ordering {
        self.cmp(&0)
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn nil() -> Self {
        0
    }
    fn neg_c(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn abs_c(&self) -> Option<Self> {
        self.checked_abs()
    }
    fn add_mul(&self, f: &Self, r: &Self) -> Option<Self> {
        i128::checked_add(*self, i128::checked_mul(*f, *r)?).filter(|&v| v != i128::MIN)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        i128::checked_mul(*self, *o).filter(|&v| v != i128::MIN)
    }
    fn gcd_with(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn approx(&self) -> f64 {
        *self as f64
    }
    fn times(&self, q: &Big) -> Big {
        Big::from(q * rug::Integer::from(*self))
    }
    fn under(&self, q: &Big) -> Big {
        Big::from(q / rug::Integer::from(*self))
    }
}

impl Int for rug::Integer {
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(to_rug(v))
    }
    fn to_bigint(&self) -> BigInt {
        from_rug(self)
    }
    fn sign(&self) -> Ordering {
        self.cmp0()
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn nil() -> Self {
        rug::Integer::new()
    }
    fn neg_c(&self) -> Option<Self> {
        Some(rug::Integer::from(-self))
    }
    fn abs_c(&self) -> Option<Self> {
        Some(rug::Integer::from(self.abs_ref()))
    }
    fn add_mul(&self, f: &Self, r: &Self) -> Option<Self> {
        let mut v = self.clone();
        v += f * r;
        Some(v)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        Some(rug::Integer::from(self * o))
    }
    fn gcd_with(&self, o: &Self) -> Self {
        rug::Integer::from(self.gcd_ref(o))
    }
    fn div_exact(&self, o: &Self) -> Self {
        rug::Integer::from(self.div_exact_ref(o))
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
    fn times(&self, q: &Big) -> Big {
        Big::from(q * self)
    }
    fn under(&self, q: &Big) -> Big {
        Big::from(q / self)
    }
}

/// Bounded simplex in dictionary form.
///
/// Column `j < n` is structural; column `n + i` is the logical variable
/// `r_i = a_i · x` of row `i`, bounded by the row's sense and rhs. Each
/// dictionary row expresses one basic column as a combination of the
/// nonbasic ones, stored as integers over a positive row denominator so
/// that a pivot needs no rational gcds. Values and reduced costs are
/// rationals.
#[derive(Debug, Clone)]
struct Dictionary<I> {
    lower: Vec<Option<Big>>,
    upper: Vec<Option<Big>>,
    /// `alpha[i][j] / den[i]`: coefficient of nonbasic column `j` in basic
    /// row `i`. Each row is reduced together with its denominator.
    alpha: Vec<Vec<I>>,
    den: Vec<I>,
    basis: Vec<usize>,
    /// Row of each basic column.
    row_of: Vec<Option<usize>>,
    value: Vec<Big>,
    /// Reduced costs; zero on basic columns.
    d: Vec<Big>,
}

enum DualOutcome {
    Optimal,
    Infeasible,
}

enum PrimalOutcome {
    Optimal,
    Unbounded,
}

fn is_nil(v: &Big) -> bool {
    v.cmp0() == Ordering::Equal
}

impl<I: Int> Dictionary<I> {
    /// Structurals start nonbasic at a bound chosen to make them dual
    /// feasible, which the caller has checked is possible. `None` on overflow.
    fn build(model: &LpModel, cost: &[Rational]) -> Option<Dictionary<I>> {
        let n = model.vars.len();
        let mut dict = Dictionary {
            lower: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
            alpha: Vec::new(),
            den: Vec::new(),
            basis: Vec::new(),
            row_of: vec![None; n],
            value: Vec::with_capacity(n),
            d: Vec::with_capacity(n),
        };
        for (v, c) in model.vars.iter().zip(cost) {
            dict.lower.push(Some(big(&v.lower)));
            dict.upper.push(big_bound(&v.upper));
            let start = if v.cost.is_negative() {
                v.upper.as_ref().expect("checked by the caller")
            } else {
                &v.lower
            };
            dict.value.push(big(start));
            dict.d.push(big(c));
        }
        for row in &model.rows {
            dict.add_row(row)?;
        }
        Some(dict)
    }

    /// Appends the row's logical as a new basic column.
    fn add_row(&mut self, row: &Row) -> Option<()> {
        let col = self.d.len();
        let terms: Vec<(usize, &Rational)> = row
            .coeffs
            .iter()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| (*j, a))
            .collect();
        // common denominator of every contribution
        let mut scale = BigInt::one();
        for &(j, a) in &terms {
            scale = scale.lcm(a.denom());
            if let Some(k) = self.row_of[j] {
                scale = scale.lcm(&(a.denom() * self.den[k].to_bigint()));
            }
        }
        let mut acc = vec![BigInt::zero(); col + 1];
        let mut val = Big::new();
        for &(j, a) in &terms {
            val += big(a) * &self.value[j];
            match self.row_of[j] {
                None => acc[j] += a.numer() * (&scale / a.denom()),
                Some(k) => {
                    let f = a.numer() * (&scale / (a.denom() * self.den[k].to_bigint()));
                    for (t, v) in acc.iter_mut().zip(&self.alpha[k]) {
                        if !v.is_nil() {
                            *t += &f * v.to_bigint();
                        }
                    }
                }
            }
        }
        let g = acc.iter().fold(scale.clone(), |g, v| g.gcd(v));
        let mut new_row = Vec::with_capacity(col + 1);
        for v in &acc {
            new_row.push(I::from_bigint(&(v / &g))?);
        }
        let den = I::from_bigint(&(scale / &g))?;
        for r in &mut self.alpha {
            r.push(I::nil());
        }
        let rhs = Some(row.rhs.clone());
        let (lo, up) = match row.sense {
            Sense::Ge => (big_bound(&rhs), None),
            Sense::Le => (None, big_bound(&rhs)),
            Sense::Eq => (big_bound(&rhs), big_bound(&rhs)),
        };
        self.lower.push(lo);
        self.upper.push(up);
        self.value.push(val);
        self.d.push(Big::new());
        self.row_of.push(Some(self.basis.len()));
        self.basis.push(col);
        self.alpha.push(new_row);
        self.den.push(den);
        Some(())
    }

    /// Signed distance outside the bounds: negative below, positive above.
    fn infeasibility(&self, j: usize) -> Option<Big> {
        let v = &self.value[j];
        if let Some(l) = &self.lower[j] {
            if v < l {
                return Some(Big::from(v - l));
            }
        }
        if let Some(u) = &self.upper[j] {
            if v > u {
                return Some(Big::from(v - u));
            }
        }
        None
    }

    fn at_upper(&self, j: usize) -> bool {
        self.upper[j].as_ref() == Some(&self.value[j])
            && self.lower[j].as_ref() != Some(&self.value[j])
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(l), Some(u)) if l == u)
    }

    /// Iterates until the basis is primal feasible or a row proves
    /// infeasibility. `None` on overflow, leaving the dictionary unusable.
    fn solve(&mut self) -> Option<DualOutcome> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            // dual steepest edge: infeasibility^2 / (1 + |row|^2), in floats
            // since any infeasible row is a valid choice
            let mut leave: Option<(usize, Big, f64)> = None;
            for (i, &b) in self.basis.iter().enumerate() {
                let Some(inf) = self.infeasibility(b) else {
                    continue;
                };
                let score = if bland {
                    0.0
                } else {
                    let den = self.den[i].approx();
                    let norm: f64 = self.alpha[i]
                        .iter()
                        .filter(|v| !v.is_nil())
                        .map(|v| (v.approx() / den).powi(2))
                        .sum();
                    inf.to_f64().powi(2) / (1.0 + norm)
                };
                let better = match &leave {
                    None => true,
                    Some((li, _, best)) => {
                        if bland {
                            b < self.basis[*li]
                        } else {
                            score > *best
                        }
                    }
                };
                if better {
                    leave = Some((i, inf, score));
                }
            }
            let Some((r, inf, _)) = leave else {
                return Some(DualOutcome::Optimal);
            };
            let increase = inf.cmp0() == Ordering::Less;
            // ratios |d_j / a_rj| share the factor den[r], left out
            let mut enter: Option<(usize, Big)> = None;
            for (j, a) in self.alpha[r].iter().enumerate() {
                if a.is_nil() || self.row_of[j].is_some() || self.is_fixed(j) {
                    continue;
                }
                let up = self.at_upper(j);
                let positive = a.sign() == Ordering::Greater;
                // moving j off its bound must push the basic toward feasibility
                let eligible = if increase {
                    up != positive
                } else {
                    up == positive
                };
                if !eligible {
                    continue;
                }
                let ratio = Big::from(a.under(&self.d[j]).abs_ref());
                if enter.as_ref().is_none_or(|(_, best)| ratio < *best) {
                    enter = Some((j, ratio));
                }
            }
            let Some((e, ratio)) = enter else {
                return Some(DualOutcome::Infeasible);
            };
            if is_nil(&ratio) {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, e, Big::from(-&inf))?;
        }
    }

    /// Removes rows `from..` whose logicals are basic, with `n`
    /// structurals, and returns their indices. The basis and the solution
    /// stay as they are.
    fn drop_basic_rows(&mut self, n: usize, from: usize) -> Vec<usize> {
        let cols = self.d.len();
        let keep: Vec<bool> = (0..cols)
            .map(|j| j < n + from || self.row_of[j].is_none())
            .collect();
        let dropped: Vec<usize> = (n..cols).filter(|&j| !keep[j]).map(|j| j - n).collect();
        if dropped.is_empty() {
            return dropped;
        }
        let mut new_col = vec![usize::MAX; cols];
        let mut next = 0;
        for j in 0..cols {
            if keep[j] {
                new_col[j] = next;
                next += 1;
            }
        }
        retain_mask(&mut self.lower, &keep);
        retain_mask(&mut self.upper, &keep);
        retain_mask(&mut self.value, &keep);
        retain_mask(&mut self.d, &keep);
        let rows = std::mem::take(&mut self.alpha);
        let dens = std::mem::take(&mut self.den);
        let basis = std::mem::take(&mut self.basis);
        for ((mut row, den), b) in rows.into_iter().zip(dens).zip(basis) {
            if keep[b] {
                retain_mask(&mut row, &keep);
                self.alpha.push(row);
                self.den.push(den);
                self.basis.push(new_col[b]);
            }
        }
        self.row_of = vec![None; next];
        for (k, &b) in self.basis.iter().enumerate() {
            self.row_of[b] = Some(k);
        }
        dropped
    }

    /// Replaces the structural costs, keeping the basis.
    fn set_costs(&mut self, cost: &[Rational]) {
        let mut d = Vec::with_capacity(self.d.len());
        for j in 0..self.d.len() {
            d.push(match cost.get(j) {
                Some(c) if self.row_of[j].is_none() => big(c),
                _ => Big::new(),
            });
        }
        for (k, &b) in self.basis.iter().enumerate() {
            let Some(c) = cost.get(b).filter(|c| !c.is_zero()) else {
                continue;
            };
            let c = self.den[k].under(&big(c));
            for (j, a) in self.alpha[k].iter().enumerate() {
                if !a.is_nil() {
                    d[j] += a.times(&c);
                }
            }
        }
        self.d = d;
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&b| self.infeasibility(b).is_none())
    }

    /// Bounded primal simplex from a primal feasible basis: Dantzig pricing,
    /// Bland's rule once progress stalls. `None` on overflow.
    fn primal(&mut self) -> Option<PrimalOutcome> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut enter: Option<(usize, bool, f64)> = None;
            for j in 0..self.d.len() {
                let dj = &self.d[j];
                if self.row_of[j].is_some() || self.is_fixed(j) || is_nil(dj) {
                    continue;
                }
                let v = &self.value[j];
                let increase = dj.cmp0() == Ordering::Less;
                let free = if increase {
                    self.upper[j].as_ref().is_none_or(|u| v < u)
                } else {
                    self.lower[j].as_ref().is_none_or(|l| v > l)
                };
                if !free {
                    continue;
                }
                let score = dj.to_f64().abs();
                if enter.as_ref().is_none_or(|(_, _, best)| score > *best) {
                    enter = Some((j, increase, score));
                }
                if bland {
                    break;
                }
            }
            let Some((e, increase, _)) = enter else {
                return Some(PrimalOutcome::Optimal);
            };
            // step length, blocking row (None: e reaches its other bound)
            // and the bound the blocking basic stops at
            let mut step: Option<(Big, Option<(usize, Big)>)> = None;
            if let (Some(l), Some(u)) = (&self.lower[e], &self.upper[e]) {
                step = Some((Big::from(u - l), None));
            }
            for (k, a) in self.alpha.iter().map(|row| &row[e]).enumerate() {
                if a.is_nil() {
                    continue;
                }
                let b = self.basis[k];
                let rising = (a.sign() == Ordering::Greater) == increase;
                let bound = if rising {
                    &self.upper[b]
                } else {
                    &self.lower[b]
                };
                let Some(bound) = bound else {
                    continue;
                };
                // distance to the bound over the rate |a| / den
                let gap = Big::from(bound - &self.value[b]);
                let limit = Big::from(a.under(&self.den[k].times(&gap)).abs_ref());
                let better = match &step {
                    None => true,
                    Some((t, blocking)) => {
                        limit < *t
                            || (bland
                                && limit == *t
                                && blocking.as_ref().is_some_and(|(r, _)| b < self.basis[*r]))
                    }
                };
                if better {
                    step = Some((limit, Some((k, bound.clone()))));
                }
            }
            let Some((t, blocking)) = step else {
                return Some(PrimalOutcome::Unbounded);
            };
            if is_nil(&t) {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            match blocking {
                Some((r, bound)) => {
                    let shift = Big::from(&bound - &self.value[self.basis[r]]);
                    self.pivot(r, e, shift)?;
                }
                None => {
                    let delta = if increase { t } else { Big::from(-&t) };
                    self.value[e] += &delta;
                    for (k, &b) in self.basis.iter().enumerate() {
                        let a = &self.alpha[k][e];
                        if !a.is_nil() {
                            self.value[b] += self.den[k].under(&a.times(&delta));
                        }
                    }
                }
            }
        }
    }

    /// Basic of row `r` moves by `shift` and leaves; column `e` enters.
    fn pivot(&mut self, r: usize, e: usize, shift: Big) -> Option<()> {
        let b = self.basis[r];
        let are = self.alpha[r][e].clone();
        let p = are.abs_c()?;
        let flip = are.sign() == Ordering::Less;
        let delta_e = are.under(&self.den[r].times(&shift));
        // values: only e moves among the nonbasics
        for (k, &bk) in self.basis.iter().enumerate() {
            let a = &self.alpha[k][e];
            if !a.is_nil() {
                self.value[bk] += self.den[k].under(&a.times(&delta_e));
            }
        }
        self.value[e] += &delta_e;

        // new row r expresses e: x_e = (den_r x_b - sum_{j != e} a_rj x_j) / a_re
        let mut nz: Vec<(usize, I)> = Vec::new();
        for (j, v) in self.alpha[r].iter().enumerate() {
            if j != e && !v.is_nil() {
                nz.push((j, if flip { v.clone() } else { v.neg_c()? }));
            }
        }
        nz.push((
            b,
            if flip {
                self.den[r].neg_c()?
            } else {
                self.den[r].clone()
            },
        ));
        let one_p = p.is_one();
        for k in 0..self.alpha.len() {
            if k == r || self.alpha[k][e].is_nil() {
                continue;
            }
            let row = &mut self.alpha[k];
            let f = std::mem::replace(&mut row[e], I::nil());
            if !one_p {
                for v in row.iter_mut() {
                    if !v.is_nil() {
                        *v = v.mul_c(&p)?;
                    }
                }
            }
            for (j, v) in &nz {
                row[*j] = row[*j].add_mul(&f, v)?;
            }
            let mut den = if one_p {
                self.den[k].clone()
            } else {
                self.den[k].mul_c(&p)?
            };
            let mut g = den.clone();
            for v in row.iter() {
                if g.is_one() {
                    break;
                }
                if !v.is_nil() {
                    g = g.gcd_with(v);
                }
            }
            if !g.is_one() {
                for v in row.iter_mut() {
                    if !v.is_nil() {
                        *v = v.div_exact(&g);
                    }
                }
                den = den.div_exact(&g);
            }
            self.den[k] = den;
        }
        let de = std::mem::replace(&mut self.d[e], Big::new());
        if !is_nil(&de) {
            let c = p.under(&de);
            for (j, v) in &nz {
                self.d[*j] += v.times(&c);
            }
        }
        let pivot_row = &mut self.alpha[r];
        pivot_row.iter_mut().for_each(|v| *v = I::nil());
        for (j, v) in nz {
            pivot_row[j] = v;
        }
        self.den[r] = p;
        self.basis[r] = e;
        self.row_of[e] = Some(r);
        self.row_of[b] = None;
        Some(())
    }

    /// Structural values, all reduced costs (still scaled) and the scaled
    /// objective.
    fn extract(&self, n: usize, cost: &[Rational]) -> (Vec<Rational>, Vec<Rational>, Rational) {
        let x = self.value[..n].iter().map(unbig).collect();
        let d = self.d.iter().map(unbig).collect();
        let mut objective = Big::new();
        for (c, v) in cost.iter().zip(&self.value) {
            if !c.is_zero() {
                objective += big(c) * v;
            }
        }
        (x, d, unbig(&objective))
    }
}

/// The dictionary at its current precision: 128-bit tableau entries, then
/// arbitrary-precision ones.
#[derive(Debug, Clone)]
enum Dict {
    Small(Dictionary<i128>),
    Big(Dictionary<rug::Integer>),
}

impl Dict {
    /// The first tier at or above `tier` that can hold the model.
    fn build(model: &LpModel, cost: &[Rational], tier: u8) -> Dict {
        if tier == 0 {
            if let Some(d) = Dictionary::build(model, cost) {
                return Dict::Small(d);
            }
        }
        Dict::Big(Dictionary::build(model, cost).expect("exact arithmetic"))
    }

    fn tier(&self) -> u8 {
        match self {
            Dict::Small(_) => 0,
            Dict::Big(_) => 1,
        }
    }
}

/// Simplex kept alive between solves. Rows added after an optimum are
/// handled by a few dual pivots, new costs by primal pivots from the old
/// basis.
///
/// Runs on 128-bit rationals and moves to arbitrary precision, rebuilding
/// from the stored rows, when an operation overflows.
#[derive(Debug, Clone)]
pub struct IncrementalLp {
    model: LpModel,
    /// Costs times `scale`, the lcm of their denominators.
    cost: Vec<Rational>,
    scale: BigInt,
    dict: Dict,
    /// False after a cost change, until the primal phase has run.
    dual_feasible: bool,
}

impl IncrementalLp {
    /// `None` when no all-at-bound starting point is dual feasible: some
    /// variable has a negative cost and no upper bound.
    pub fn new(model: &LpModel) -> Result<Option<IncrementalLp>> {
        model.validate()?;
        if model
            .vars
            .iter()
            .any(|v| v.cost.is_negative() && v.upper.is_none())
        {
            return Ok(None);
        }
        let scale = model
            .vars
            .iter()
            .fold(BigInt::one(), |l, v| l.lcm(v.cost.denom()));
        let factor = Rational::from_integer(scale.clone());
        let cost: Vec<Rational> = model.vars.iter().map(|v| &v.cost * &factor).collect();
        let dict = Dict::build(model, &cost, 0);
        Ok(Some(IncrementalLp {
            model: model.clone(),
            cost,
            scale,
            dict,
            dual_feasible: true,
        }))
    }

    pub fn num_vars(&self) -> usize {
        self.model.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.model.rows.len()
    }

    fn promote(&mut self) {
        let tier = self.dict.tier() + 1;
        self.rebuild(tier);
    }

    /// Fresh all-at-bound dictionary, which is dual feasible.
    fn rebuild(&mut self, tier: u8) {
        self.dict = Dict::build(&self.model, &self.cost, tier);
        self.dual_feasible = true;
    }

    /// Drops the rows from index `from` on that do not bind the current
    /// basis, returning their indices before removal. The current optimum
    /// stays optimal for what is left.
    pub fn drop_basic_rows(&mut self, from: usize) -> Vec<usize> {
        let n = self.model.vars.len();
        let dropped = match &mut self.dict {
            Dict::Small(d) => d.drop_basic_rows(n, from),
            Dict::Big(d) => d.drop_basic_rows(n, from),
        };
        let mut i = 0;
        let mut next = dropped.iter().peekable();
        self.model.rows.retain(|_| {
            i += 1;
            if next.peek() == Some(&&(i - 1)) {
                next.next();
                false
            } else {
                true
            }
        });
        dropped
    }

    /// Replaces the objective. The next solve starts from the current basis.
    pub fn set_costs(&mut self, costs: &[Rational]) -> Result<()> {
        let n = self.model.vars.len();
        if costs.len() != n {
            return Err(Error::MalformedModel(format!(
                "{} costs for {n} variables",
                costs.len()
            )));
        }
        if self
            .model
            .vars
            .iter()
            .zip(costs)
            .any(|(v, c)| c.is_negative() && v.upper.is_none())
        {
            return Err(Error::MalformedModel(
                "negative cost on a variable without upper bound".into(),
            ));
        }
        for (v, c) in self.model.vars.iter_mut().zip(costs) {
            v.cost = c.clone();
        }
        self.scale = costs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let factor = Rational::from_integer(self.scale.clone());
        self.cost = costs.iter().map(|c| c * &factor).collect();
        match &mut self.dict {
            Dict::Small(d) => d.set_costs(&self.cost),
            Dict::Big(d) => d.set_costs(&self.cost),
        }
        self.dual_feasible = false;
        Ok(())
    }

    /// Appends a row; its logical variable enters the basis.
    pub fn add_row(&mut self, row: &Row) -> Result<()> {
        let n = self.model.vars.len();
        if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
            return Err(Error::MalformedModel(format!(
                "row references variable {j} of {n}"
            )));
        }
        self.model.rows.push(row.clone());
        let ok = match &mut self.dict {
            Dict::Small(d) => d.add_row(row).is_some(),
            Dict::Big(d) => d.add_row(row).is_some(),
        };
        if !ok {
            // the rebuild picks up the new row from the model
            self.promote();
        }
        Ok(())
    }

    pub fn solve(&mut self) -> LpSolution {
        while !self.dual_feasible {
            let outcome = match &mut self.dict {
                Dict::Small(d) => primal_phase(d),
                Dict::Big(d) => primal_phase(d),
            };
            match outcome {
                Some(Some(PrimalOutcome::Optimal)) => self.dual_feasible = true,
                Some(Some(PrimalOutcome::Unbounded)) => {
                    return LpSolution::not_optimal(LpStatus::Unbounded);
                }
                // rows added since the last optimum: start over dual
                Some(None) => self.rebuild(self.dict.tier()),
                None => self.promote(),
            }
        }
        loop {
            let outcome = match &mut self.dict {
                Dict::Small(d) => d.solve(),
                Dict::Big(d) => d.solve(),
            };
            match outcome {
                Some(outcome) => return self.finish(outcome),
                None => self.promote(),
            }
        }
    }

    fn finish(&self, outcome: DualOutcome) -> LpSolution {
        if let DualOutcome::Infeasible = outcome {
            return LpSolution::not_optimal(LpStatus::Infeasible);
        }
        let n = self.model.vars.len();
        let (x, d, objective) = match &self.dict {
            Dict::Small(t) => t.extract(n, &self.cost),
            Dict::Big(t) => t.extract(n, &self.cost),
        };
        let factor = Rational::from_integer(self.scale.clone());
        let unscale = |v: Rational| {
            if self.scale.is_one() {
                v
            } else {
                v / &factor
            }
        };
        let objective = unscale(objective);
        let mut d: Vec<Rational> = d.into_iter().map(unscale).collect();
        let duals = d.split_off(n);
        let sol = LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            duals,
            reduced_costs: d,
        };
        debug_assert!(
            sol.check_optimality(&self.model).is_ok(),
            "{:?}",
            sol.check_optimality(&self.model)
        );
        sol
    }
}

fn retain_mask<V>(v: &mut Vec<V>, keep: &[bool]) {
    let mut flags = keep.iter();
    v.retain(|_| *flags.next().expect("mask covers the vector"));
}

/// Primal simplex when the basis is primal feasible, `Some(None)` when not.
fn primal_phase<I: Int>(d: &mut Dictionary<I>) -> Option<Option<PrimalOutcome>> {
    if !d.primal_feasible() {
        return Some(None);
    }
    d.primal().map(Some)
}

/// Column layout: structural `0..n`, then one slack per inequality row,
/// then one artificial per row.
struct Tableau {
    m: usize,
    n: usize,
    cols: usize,
    art_start: usize,
    /// `m x cols`, row-major: current `B^-1 A`.
    t: Vec<Rational>,
    /// Values of the basic variables.
    beta: Vec<Rational>,
    basis: Vec<usize>,
    /// Upper bound of each shifted column (`None` = unbounded).
    upper: Vec<Option<Rational>>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    /// `-1` where the row was negated to make its rhs nonnegative.
    row_sign: Vec<Rational>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn build(model: &LpModel) -> Tableau {
        let m = model.rows.len();
        let n = model.vars.len();
        let n_slack = model.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let art_start = n + n_slack;
        let cols = art_start + m;

        let mut upper: Vec<Option<Rational>> = model
            .vars
            .iter()
            .map(|v| v.upper.as_ref().map(|u| u - &v.lower))
            .collect();
        upper.extend(std::iter::repeat_n(None, n_slack + m));

        let mut t = vec![Rational::zero(); m * cols];
        let mut beta = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let mut slack = n;
        for (i, row) in model.rows.iter().enumerate() {
            let shift: Rational = row
                .coeffs
                .iter()
                .map(|(j, a)| a * &model.vars[*j].lower)
                .sum();
            let rhs = &row.rhs - shift;
            let sign = if rhs.is_negative() {
                -Rational::one()
            } else {
                Rational::one()
            };
            let base = i * cols;
            for (j, a) in &row.coeffs {
                t[base + j] += a * &sign;
            }
            match row.sense {
                Sense::Ge => {
                    t[base + slack] = -sign.clone();
                    slack += 1;
                }
                Sense::Le => {
                    t[base + slack] = sign.clone();
                    slack += 1;
                }
                Sense::Eq => {}
            }
            t[base + art_start + i] = Rational::one();
            beta.push(rhs * &sign);
            row_sign.push(sign);
        }
        let basis: Vec<usize> = (0..m).map(|i| art_start + i).collect();
        let mut is_basic = vec![false; cols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Tableau {
            m,
            n,
            cols,
            art_start,
            t,
            beta,
            basis,
            upper,
            at_upper: vec![false; cols],
            is_basic,
            row_sign,
        }
    }

    fn at(&self, i: usize, j: usize) -> &Rational {
        &self.t[i * self.cols + j]
    }

    fn value_of_nonbasic(&self, j: usize) -> Rational {
        if self.at_upper[j] {
            self.upper[j].clone().expect("at upper implies bounded")
        } else {
            Rational::zero()
        }
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let a = self.at(i, j);
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| u.is_zero())
    }

    /// One Bland step: lowest-index improving column, lowest-index
    /// blocking basic variable on ratio ties.
    fn step(&mut self, cost: &[Rational]) -> Step {
        let d = self.reduced_costs(cost);
        let entering = (0..self.cols).find(|&j| {
            !self.is_basic[j]
                && !self.is_fixed(j)
                && ((d[j].is_negative() && !self.at_upper[j])
                    || (d[j].is_positive() && self.at_upper[j]))
        });
        let Some(e) = entering else {
            return Step::Optimal;
        };
        // +1: entering increases from its lower bound; -1: decreases from upper
        let increasing = !self.at_upper[e];

        // ratio test: (row, step length, leaves at upper)
        let mut best: Option<(usize, Rational, bool)> = None;
        for i in 0..self.m {
            let a = self.at(i, e);
            if a.is_zero() {
                continue;
            }
            // change of basic i per unit step of the entering variable
            let rate = if increasing { -a.clone() } else { a.clone() };
            let b = self.basis[i];
            let (limit, to_upper) = if rate.is_negative() {
                (&self.beta[i] / -&rate, false)
            } else {
                match &self.upper[b] {
                    Some(u) => ((u - &self.beta[i]) / &rate, true),
                    None => continue,
                }
            };
            let better = match &best {
                None => true,
                Some((bi, bl, _)) => limit < *bl || (limit == *bl && b < self.basis[*bi]),
            };
            if better {
                best = Some((i, limit, to_upper));
            }
        }

        let own = self.upper[e].clone();
        let flip = match (&own, &best) {
            (Some(u), Some((_, l, _))) => u <= l,
            (Some(_), None) => true,
            (None, None) => return Step::Unbounded,
            (None, Some(_)) => false,
        };
        if flip {
            let u = own.expect("flip needs a bound");
            let delta = if increasing { u.clone() } else { -u.clone() };
            for i in 0..self.m {
                let a = self.at(i, e).clone();
                if !a.is_zero() {
                    self.beta[i] -= &a * &delta;
                }
            }
            self.at_upper[e] = increasing;
            return Step::Moved;
        }

        let (r, len, to_upper) = best.expect("checked above");
        let delta = if increasing {
            len.clone()
        } else {
            -len.clone()
        };
        let entering_value = self.value_of_nonbasic(e) + &delta;
        for i in 0..self.m {
            let a = self.at(i, e).clone();
            if !a.is_zero() {
                self.beta[i] -= &a * &delta;
            }
        }
        let leaving = self.basis[r];
        self.pivot(r, e);
        self.beta[r] = entering_value;
        self.is_basic[leaving] = false;
        self.at_upper[leaving] = to_upper;
        self.at_upper[e] = false;
        Step::Moved
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let cols = self.cols;
        let piv = self.at(r, e).clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for j in 0..cols {
                let v = &mut self.t[r * cols + j];
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row: Vec<(usize, Rational)> = (0..cols)
            .filter_map(|j| {
                let v = &self.t[r * cols + j];
                (!v.is_zero()).then(|| (j, v.clone()))
            })
            .collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + e].clone();
            if f.is_zero() {
                continue;
            }
            for (j, v) in &pivot_row {
                self.t[i * cols + j] -= &f * v;
            }
        }
        self.basis[r] = e;
        self.is_basic[e] = true;
    }

    fn optimize(&mut self, cost: &[Rational]) -> bool {
        loop {
            match self.step(cost) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Moved => {}
            }
        }
    }

    fn run(mut self, model: &LpModel) -> LpSolution {
        // phase 1: minimize the sum of artificials
        let mut phase1 = vec![Rational::zero(); self.cols];
        for c in phase1.iter_mut().skip(self.art_start) {
            *c = Rational::one();
        }
        let bounded = self.optimize(&phase1);
        debug_assert!(bounded, "phase 1 is bounded below by zero");
        let infeas: Rational = (0..self.m)
            .filter(|&i| self.basis[i] >= self.art_start)
            .map(|i| self.beta[i].clone())
            .sum();
        if infeas.is_positive() {
            return LpSolution::not_optimal(LpStatus::Infeasible);
        }
        // artificials are pinned at zero from now on
        for j in self.art_start..self.cols {
            self.upper[j] = Some(Rational::zero());
            if !self.is_basic[j] {
                self.at_upper[j] = false;
            }
        }
        // drive basic artificials out where a structural or slack column allows
        for r in 0..self.m {
            if self.basis[r] < self.art_start {
                continue;
            }
            if let Some(e) =
                (0..self.art_start).find(|&j| !self.is_basic[j] && !self.at(r, j).is_zero())
            {
                let value = self.value_of_nonbasic(e);
                let leaving = self.basis[r];
                self.pivot(r, e);
                self.beta[r] = value;
                self.is_basic[leaving] = false;
                self.at_upper[leaving] = false;
                self.at_upper[e] = false;
            }
        }

        // phase 2
        let mut cost = vec![Rational::zero(); self.cols];
        for (j, v) in model.vars.iter().enumerate() {
            cost[j] = v.cost.clone();
        }
        if !self.optimize(&cost) {
            return LpSolution::not_optimal(LpStatus::Unbounded);
        }
        self.extract(model, &cost)
    }

    fn extract(&self, model: &LpModel, cost: &[Rational]) -> LpSolution {
        let mut shifted: Vec<Rational> = (0..self.cols)
            .map(|j| {
                if self.is_basic[j] {
                    Rational::zero()
                } else {
                    self.value_of_nonbasic(j)
                }
            })
            .collect();
        for i in 0..self.m {
            shifted[self.basis[i]] = self.beta[i].clone();
        }
        let x: Vec<Rational> = (0..self.n)
            .map(|j| &shifted[j] + &model.vars[j].lower)
            .collect();

        // y^T = c_B B^-1; the artificial columns hold B^-1 of the signed rows
        let duals: Vec<Rational> = (0..self.m)
            .map(|k| {
                let s: Rational = (0..self.m)
                    .map(|i| {
                        let cb = &cost[self.basis[i]];
                        if cb.is_zero() {
                            Rational::zero()
                        } else {
                            cb * self.at(i, self.art_start + k)
                        }
                    })
                    .sum();
                s * &self.row_sign[k]
            })
            .collect();
        let mut reduced_costs: Vec<Rational> = model.vars.iter().map(|v| v.cost.clone()).collect();
        for (row, y) in model.rows.iter().zip(&duals) {
            if y.is_zero() {
                continue;
            }
            for (j, a) in &row.coeffs {
                reduced_costs[*j] -= a * y;
            }
        }
        let objective = model.objective_at(&x);
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            duals,
            reduced_costs,
        }
    }
}
