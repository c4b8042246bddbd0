//! Cutting-plane driver and knapsack-cover rounding.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::knapdp;
use crate::model::{is_valid, Family, Inequality, Instance, Point, Rational};
use crate::ratlp::{self, LpModel, LpStatus, Row, Sense};
use crate::sep::{self, FixedSupportSeparator, KcMode, OracleMode, SeparationResult, ViolatedCut};

/// Fixed-support separators kept between iterations.
const FS_CACHE: usize = 8;

/// Ordered, duplicate-free list of cuts.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Inequality>,
    index: HashSet<Inequality>,
}

impl CutPool {
    pub fn new() -> CutPool {
        CutPool::default()
    }

    /// Adds `cut` unless an identical inequality is already present.
    pub fn insert(&mut self, cut: Inequality) -> bool {
        if self.index.contains(&cut) {
            return false;
        }
        self.index.insert(cut.clone());
        self.cuts.push(cut);
        true
    }

    pub fn contains(&self, cut: &Inequality) -> bool {
        self.index.contains(cut)
    }

    pub fn cuts(&self) -> &[Inequality] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn count(&self, family: Family) -> usize {
        self.cuts.iter().filter(|c| c.family() == family).count()
    }
}

/// Where fixed-support separation looks for inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsTrigger {
    /// `{i : x*_i > 0}`.
    LpSupport,
    /// All items.
    Full,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub kc: Option<KcMode>,
    pub p12: bool,
    pub fixed_support: Option<FsTrigger>,
    /// Restricts fixed-support cuts to pitch at most this value.
    pub fs_pitch_bound: Option<usize>,
    pub eps: Rational,
    pub mode: OracleMode,
    pub max_iter: usize,
    /// Check every new cut with an exact validity test before adding it.
    pub check_cuts: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            kc: None,
            p12: true,
            fixed_support: None,
            fs_pitch_bound: None,
            eps: Rational::new(1.into(), 100.into()),
            mode: OracleMode::Exact,
            max_iter: 1000,
            check_cuts: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The pitch-1/pitch-2 oracle certified the point and no other enabled
    /// separator found a cut.
    Certified,
    NoCutFound,
    MaxIter,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Certified => "certified",
            Termination::NoCutFound => "no-cut-found",
            Termination::MaxIter => "max-iter",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub instance_id: String,
    pub int_opt: Rational,
    /// LP value after each solve, starting with the natural relaxation.
    pub lp_values: Vec<Rational>,
    pub final_lp: Rational,
    /// `int_opt / final_lp`; `None` when the LP value is zero.
    pub gap: Option<Rational>,
    pub cuts_kc: usize,
    pub cuts_p12: usize,
    pub cuts_fs: usize,
    pub termination: Termination,
    /// Whether the last round's separators were complete for their family.
    pub kc_exhaustive: bool,
    pub p12_exact: bool,
    pub final_point: Point,
    pub pool: CutPool,
}

/// Runs the cutting-plane loop from the natural relaxation.
///
/// Each round solves the LP exactly, queries the enabled separators in the
/// order kc, p12, fixed-support and adds the single cut with the largest
/// violation relative to its rhs (earlier separators win ties).
pub fn run(inst: &Instance, config: &Config) -> Result<GapReport> {
    run_named(inst, config, "")
}

pub fn run_named(inst: &Instance, config: &Config, id: &str) -> Result<GapReport> {
    let int_opt = knapdp::solve_exact(inst, inst.costs())?.value;
    let n = inst.len();
    let mut pool = CutPool::new();
    let mut lp_values = Vec::new();
    let mut iter = 0usize;
    // separators keep their generated rows from one iteration to the next
    let mut fs_cache: Vec<FixedSupportSeparator> = Vec::new();
    let mut lp = ratlp::IncrementalLp::new(&relaxation_model(inst, &[]))?
        .expect("nonnegative costs start dual feasible");
    loop {
        let (value, x) = relaxation_optimum(lp.solve())?;
        if let Some(last) = lp_values.last() {
            debug_assert!(&value >= last, "LP value decreased after adding a cut");
        }
        lp_values.push(value.clone());
        let point = Point::new(x)?;
        if iter >= config.max_iter {
            return Ok(report(
                id,
                int_opt,
                lp_values,
                point,
                pool,
                Termination::MaxIter,
                config,
            ));
        }
        iter += 1;

        let mut candidates: Vec<ViolatedCut> = Vec::new();
        if let Some(mode) = config.kc {
            candidates.extend(sep::separate_kc(inst, &point, mode)?);
        }
        let mut certified = false;
        if config.p12 {
            match sep::separate_pitch12(inst, &point, &config.eps, config.mode)? {
                SeparationResult::Violated(v) => candidates.push(v),
                SeparationResult::Certified(_) => certified = true,
            }
        }
        if let Some(trigger) = config.fixed_support {
            let mut supports = Vec::new();
            if matches!(trigger, FsTrigger::LpSupport | FsTrigger::Both) {
                supports.push(point.support());
            }
            if matches!(trigger, FsTrigger::Full | FsTrigger::Both) {
                let all: Vec<usize> = (0..n).collect();
                if !supports.contains(&all) {
                    supports.push(all);
                }
            }
            for support in supports {
                if !inst.beta_of_support(&support).is_positive() {
                    continue;
                }
                let pos = match fs_cache
                    .iter()
                    .position(|f| f.support() == support.as_slice())
                {
                    Some(pos) => pos,
                    None => {
                        if fs_cache.len() == FS_CACHE {
                            fs_cache.remove(0);
                        }
                        fs_cache.push(FixedSupportSeparator::new(
                            inst,
                            &support,
                            config.fs_pitch_bound,
                        )?);
                        fs_cache.len() - 1
                    }
                };
                let out = fs_cache[pos].separate(inst, &point)?;
                candidates.extend(out.cut);
            }
        }

        let mut best: Option<ViolatedCut> = None;
        for c in candidates {
            if best.as_ref().is_none_or(|b| c.relative() > b.relative()) {
                best = Some(c);
            }
        }
        let Some(best) = best else {
            let reason = if certified {
                Termination::Certified
            } else {
                Termination::NoCutFound
            };
            return Ok(report(id, int_opt, lp_values, point, pool, reason, config));
        };
        if config.check_cuts && !is_valid(&best.cut, inst)? {
            return Err(Error::Precondition(format!(
                "separator returned an invalid {} cut: {}",
                best.cut.family(),
                best.cut
            )));
        }
        if !pool.insert(best.cut.clone()) {
            return Err(Error::Precondition(format!(
                "separator returned a cut already in the pool: {}",
                best.cut
            )));
        }
        lp.add_row(&Row::new(
            best.cut.terms().to_vec(),
            Sense::Ge,
            best.cut.rhs().clone(),
        ))?;
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    id: &str,
    int_opt: Rational,
    lp_values: Vec<Rational>,
    final_point: Point,
    pool: CutPool,
    termination: Termination,
    config: &Config,
) -> GapReport {
    let final_lp = lp_values.last().cloned().expect("at least one LP solve");
    let gap = (!final_lp.is_zero()).then(|| &int_opt / &final_lp);
    debug_assert!(gap.as_ref().is_none_or(|g| *g >= Rational::one()));
    GapReport {
        instance_id: id.to_string(),
        int_opt,
        lp_values,
        final_lp,
        gap,
        cuts_kc: pool.count(Family::Kc),
        cuts_p12: pool.count(Family::Pitch1)
            + pool.count(Family::Pitch2Canonical)
            + pool.count(Family::KnapsackRow),
        cuts_fs: pool.count(Family::FixedSupport),
        termination,
        kc_exhaustive: config.kc == Some(KcMode::Exhaustive),
        p12_exact: config.p12 && config.mode == OracleMode::Exact,
        final_point,
        pool,
    }
}

/// Minimizes `c·x` over `p·x >= 1`, `0 <= x <= 1` and `cuts`; returns the
/// value and an optimal point.
pub fn solve_relaxation(inst: &Instance, cuts: &[Inequality]) -> Result<(Rational, Vec<Rational>)> {
    relaxation_optimum(ratlp::solve_lp(&relaxation_model(inst, cuts))?)
}

fn relaxation_model(inst: &Instance, cuts: &[Inequality]) -> LpModel {
    let mut model = LpModel::new();
    for i in 0..inst.len() {
        model.add_var(
            Rational::zero(),
            Some(Rational::one()),
            inst.cost(i).clone(),
        );
    }
    model.add_row(
        inst.profits().iter().cloned().enumerate().collect(),
        Sense::Ge,
        Rational::one(),
    );
    for cut in cuts {
        model.add_row(cut.terms().to_vec(), Sense::Ge, cut.rhs().clone());
    }
    model
}

fn relaxation_optimum(sol: ratlp::LpSolution) -> Result<(Rational, Vec<Rational>)> {
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.x)),
        // valid cuts keep every feasible 0/1 point, and costs are nonnegative
        LpStatus::Infeasible => Err(Error::Precondition("relaxation became infeasible".into())),
        LpStatus::Unbounded => unreachable!("bounded variables"),
    }
}

/// Output of [`round_kc`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounding {
    /// Chosen items, sorted.
    pub chosen: Vec<usize>,
    pub cost: Rational,
    /// The point satisfies the KC inequality for `{i : xbar_i >= 1/2}`, so
    /// `cost <= 2 c·xbar` holds.
    pub guaranteed: bool,
}

/// Rounds a fractional point to a cover.
///
/// Items with `xbar_i >= 1/2` are taken. The residual demand `b'` is met
/// greedily by density `c_i / min(p_i, b')`: with `t+1` the shortest prefix
/// whose truncated profit reaches `2 b'`, the prefix of length `t` is used
/// if it already covers `b'`, otherwise `t+1`.
pub fn round_kc(inst: &Instance, xbar: &Point) -> Result<Rounding> {
    let n = inst.len();
    if xbar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xbar.len(),
        });
    }
    let half = Rational::new(1.into(), 2.into());
    let taken: Vec<usize> = (0..n).filter(|&i| xbar[i] >= half).collect();
    let residual_demand = Rational::one() - inst.profit_of(&taken);
    let guaranteed = if residual_demand.is_positive() {
        crate::model::kc_inequality(inst, &taken)?.is_satisfied_by(xbar)
    } else {
        true
    };
    let mut chosen = taken.clone();
    if residual_demand.is_positive() {
        let mut rest: Vec<(usize, Rational)> = (0..n)
            .filter(|i| xbar[*i] < half)
            .map(|i| (i, inst.profit(i).clone().min(residual_demand.clone())))
            .filter(|(_, p)| p.is_positive())
            .collect();
        // c_a / p_a < c_b / p_b  <=>  c_a p_b < c_b p_a
        rest.sort_by(|(a, pa), (b, pb)| {
            (inst.cost(*a) * pb)
                .cmp(&(inst.cost(*b) * pa))
                .then(a.cmp(b))
        });
        let available: Rational = rest.iter().map(|(_, p)| p).sum();
        if available < residual_demand {
            return Err(Error::Infeasible {
                total: available.to_string(),
            });
        }
        let twice = &residual_demand * Rational::from_integer(2.into());
        let mut acc = Rational::zero();
        let mut len = rest.len();
        for (k, (_, p)) in rest.iter().enumerate() {
            acc += p;
            if acc >= twice {
                len = k + 1;
                break;
            }
        }
        let shorter: Rational = rest[..len - 1].iter().map(|(_, p)| p).sum();
        if shorter >= residual_demand {
            len -= 1;
        }
        chosen.extend(rest[..len].iter().map(|(i, _)| *i));
        chosen.sort_unstable();
    }
    let cost = inst.cost_of(&chosen);
    debug_assert!(inst.is_feasible_set(&chosen));
    if guaranteed {
        let bound = xbar.dot(inst.costs()) * Rational::from_integer(2.into());
        debug_assert!(cost <= bound, "rounding exceeded twice the fractional cost");
    }
    Ok(Rounding {
        chosen,
        cost,
        guaranteed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::{int, rat};

    fn pc(profits: &[Rational]) -> Instance {
        Instance::from_profits_costs(profits, profits).unwrap()
    }

    #[test]
    fn three_halves_p_equals_c() {
        let i = pc(&[rat(1, 2), rat(1, 2), rat(1, 2)]);
        let r = run(&i, &Config::default()).unwrap();
        assert_eq!(r.int_opt, int(1));
        assert_eq!(r.lp_values[0], int(1));
        assert_eq!(r.final_lp, int(1));
        assert_eq!(r.gap, Some(int(1)));
    }

    #[test]
    fn max_iter_zero_reports_natural_lp() {
        let i = pc(&[rat(1, 2), rat(1, 2), rat(1, 2)]);
        let cfg = Config {
            max_iter: 0,
            ..Config::default()
        };
        let r = run(&i, &cfg).unwrap();
        assert_eq!(r.termination, Termination::MaxIter);
        assert_eq!(r.lp_values.len(), 1);
    }

    #[test]
    fn single_expensive_item_closes_gap() {
        // natural LP takes 1/10 of item 1 at cost 10; any cut forces it in
        let i = Instance::from_profits_costs(&[rat(1, 10), int(1)], &[int(1), int(100)]).unwrap();
        let r = run(&i, &Config::default()).unwrap();
        assert_eq!(r.int_opt, int(100));
        assert_eq!(r.final_lp, int(100));
        assert_eq!(r.termination, Termination::Certified);
        assert!(r.lp_values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pool_dedups() {
        let mut p = CutPool::new();
        let c = Inequality::unit(&[0, 1], int(1), Family::Pitch1).unwrap();
        assert!(p.insert(c.clone()));
        assert!(!p.insert(c.with_family(Family::Kc)));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn rounding_examples() {
        let i = pc(&[rat(3, 5), rat(3, 5), rat(3, 5)]);
        let x = Point::new(vec![rat(5, 6), rat(5, 6), int(0)]).unwrap();
        let r = round_kc(&i, &x).unwrap();
        assert_eq!(r.chosen, vec![0, 1]);
        assert_eq!(r.cost, rat(6, 5));
        assert!(r.guaranteed);

        let h = Instance::from_profits_costs(&vec![rat(1, 2); 4], &vec![int(1); 4]).unwrap();
        let r = round_kc(&h, &Point::new(vec![rat(1, 2); 4]).unwrap()).unwrap();
        assert_eq!(r.chosen, vec![0, 1, 2, 3]);
        assert_eq!(r.cost, int(4));

        let x = Point::new(vec![int(1), int(0), int(1)]).unwrap();
        let r = round_kc(&i, &x).unwrap();
        assert_eq!(r.chosen, vec![0, 2]);
    }

    #[test]
    fn rounding_uses_residual_prefix() {
        // S = {3}, b' = 1/2 met from the residual prefix
        let i = Instance::from_profits_costs(
            &[rat(1, 4), rat(1, 4), rat(1, 2), rat(1, 2)],
            &[int(3), int(1), int(1), int(1)],
        )
        .unwrap();
        let x = Point::new(vec![int(0), rat(1, 4), rat(1, 4), int(1)]).unwrap();
        let r = round_kc(&i, &x).unwrap();
        assert!(i.is_feasible_set(&r.chosen));
        assert!(r.chosen.contains(&3));
    }
}
