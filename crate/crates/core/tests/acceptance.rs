//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minknap::cutloop::{self, round_kc, solve_relaxation, Config};
use minknap::gaplab::{self, experiment::ExperimentFamily};
use minknap::knapdp::{solve_exact, solve_fptas};
use minknap::model::{is_valid, kc_inequality, pitch_reduce};
use minknap::sep::{self, KcMode, OracleMode, SeparationResult};
use minknap::{Family, Inequality, Instance, Point, Rational};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Brute-force validity: the least lhs over all 0/1 points with `p·x >= 1`.
fn brute_valid(inst: &Instance, coeffs: &[Rational], rhs: &Rational) -> bool {
    let n = inst.len();
    (0u32..1 << n).all(|mask| {
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        !inst.is_feasible_set(&set) || set.iter().map(|&i| &coeffs[i]).sum::<Rational>() >= *rhs
    })
}

fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, p_equals_c: bool) -> Instance {
    let n = rng.gen_range(1..=n_max);
    let raw = gaplab::gen_random(n, rng.gen(), p_equals_c).expect("n >= 1");
    Instance::normalize(&raw).expect("generator output is valid")
}

fn c1_pitch3() -> Outcome {
    let inst = Instance::normalize(&gaplab::gen_pitch3_wild()).map_err(e)?;
    let dir = std::env::temp_dir().join(format!("minknap-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e)?;
    let file = dir.join("wild.mk");
    std::fs::write(
        &file,
        gaplab::serialize_instance(&gaplab::gen_pitch3_wild()).map_err(e)?,
    )
    .map_err(e)?;
    let verify = |ineq: &str| -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_minknap"))
            .arg("verify")
            .arg(&file)
            .arg("--ineq")
            .arg(ineq)
            .output()
            .map_err(e)?;
        ensure(out.status.success(), || {
            format!("verify exited with {}", out.status)
        })?;
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
    };
    let first = verify("1,0,1,1,2,1,2 >= 3")?;
    ensure(first == "pitch=3 valid=true", || {
        format!("first inequality: {first}")
    })?;
    let second = verify("1,1,2,3,4,3,4 >= 8")?;
    ensure(second.ends_with("valid=true"), || {
        format!("second inequality: {second}")
    })?;
    // independent check over all 128 points
    for (w, rhs) in [
        (vec![1, 0, 1, 1, 2, 1, 2], 3),
        (vec![1, 1, 2, 3, 4, 3, 4], 8),
    ] {
        let coeffs: Vec<Rational> = w.into_iter().map(int).collect();
        let sorted = inst.from_input_order(&coeffs).map_err(e)?;
        ensure(brute_valid(&inst, &sorted, &int(rhs)), || {
            "brute force disagrees".into()
        })?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{first}; second: {second}"))
}

fn c2_lemma4() -> Outcome {
    let eps = rat(1, 8);
    let mut bounds = Vec::new();
    let mut gaps = Vec::new();
    for n in [4u64, 9, 16, 25] {
        let inst = Instance::normalize(&gaplab::gen_lemma4(n, &eps).map_err(e)?).map_err(e)?;
        let s = (n as f64).sqrt() as i64;
        let opt = solve_exact(&inst, inst.costs()).map_err(e)?.value;
        ensure(opt == int(s) + &eps, || format!("n={n}: optimum {opt}"))?;
        let x = gaplab::lemma4_point(n, &inst).map_err(e)?;
        ensure(x.dot(inst.profits()) >= int(1), || {
            format!("n={n}: point violates the row")
        })?;
        let cut = sep::separate_pitch1(&inst, &x, &eps, OracleMode::Exact).map_err(e)?;
        ensure(cut.is_none(), || {
            format!("n={n}: point cut by {}", cut.unwrap().cut)
        })?;
        let report = cutloop::run(&inst, &Config::default()).map_err(e)?;
        let gap = report.gap.clone().ok_or("zero LP value")?;
        let bound = (int(s) + &eps) / gaplab::lemma4_point_value(n, &eps).map_err(e)?;
        ensure(gap >= bound, || format!("n={n}: gap {gap} below {bound}"))?;
        bounds.push(bound);
        gaps.push(format!("n={n} gap={gap}"));
    }
    ensure(bounds.windows(2).all(|w| w[0] < w[1]), || {
        "bound not increasing".into()
    })?;
    Ok(gaps.join(", "))
}

fn c3_ola() -> Outcome {
    let inst = Instance::normalize(&gaplab::gen_ola(4).map_err(e)?).map_err(e)?;
    let opt = solve_exact(&inst, inst.costs()).map_err(e)?.value;
    ensure(opt == int(2), || format!("n=4 optimum {opt}"))?;
    let p1 = sep::enumerate_pitch1(&inst).map_err(e)?;
    let p2 = sep::enumerate_pitch2(&inst).map_err(e)?;
    for k in [1u64, 2] {
        let x = gaplab::ola_point(4, k, &inst).map_err(e)?;
        ensure(x.dot(inst.profits()) >= int(1), || {
            format!("k={k}: row violated")
        })?;
        for mask in 0u32..1 << 8 {
            let s: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
            if inst.profit_of(&s) >= int(1) {
                continue;
            }
            let kc = kc_inequality(&inst, &s).map_err(e)?;
            ensure(kc.is_satisfied_by(&x), || {
                format!("k={k}: KC {kc} violated")
            })?;
        }
        for c in p1.iter().chain(&p2) {
            if c.pitch() as u64 <= k {
                ensure(c.is_satisfied_by(&x), || format!("k={k}: {c} violated"))?;
            }
        }
    }
    let mut notes = Vec::new();
    for k in [1u64, 2] {
        let n = 100;
        let inst = Instance::normalize(&gaplab::gen_ola(n).map_err(e)?).map_err(e)?;
        let family = ExperimentFamily::Ola { k: k as usize };
        let start = Instant::now();
        let report = cutloop::run(&inst, &family.default_config()).map_err(e)?;
        let limit = gaplab::ola_point_value(n, k).map_err(e)?;
        ensure(report.final_lp <= limit, || {
            format!("n=100 k={k}: LP {} above {limit}", report.final_lp)
        })?;
        let gap = report.gap.clone().ok_or("zero LP value")?;
        let want = int(2) / (int(1) + rat(k as i64 + 1, 10));
        ensure(gap >= want, || {
            format!("n=100 k={k}: gap {gap} below {want}")
        })?;
        notes.push(format!(
            "n=100 k={k} lp={} gap~{:.4} cuts={} ({:.1}s)",
            report.final_lp,
            minknap::model::rational::approx_f64(&gap),
            report.pool.len(),
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(notes.join(", "))
}

/// Optimum of the natural LP plus every inequality of `family`, added lazily.
fn lp_with_family(inst: &Instance, family: &[Inequality]) -> Result<(Rational, Point), String> {
    let mut active: Vec<Inequality> = Vec::new();
    loop {
        let (value, x) = solve_relaxation(inst, &active).map_err(e)?;
        let x = Point::new(x).map_err(e)?;
        let worst = family
            .iter()
            .filter(|c| c.is_violated_by(&x))
            .max_by(|a, b| a.violation(&x).cmp(&b.violation(&x)));
        match worst {
            Some(c) => active.push(c.clone()),
            None => return Ok((value, x)),
        }
    }
}

fn c4_three_halves() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = int(1);
    for t in 0..200 {
        let inst = random_instance(&mut rng, 10, true);
        let mut family = sep::enumerate_pitch1(&inst).map_err(e)?;
        family.extend(sep::enumerate_pitch2(&inst).map_err(e)?);
        let (lp, _) = lp_with_family(&inst, &family)?;
        let opt = solve_exact(&inst, inst.costs()).map_err(e)?.value;
        let gap = &opt / &lp;
        ensure(gap <= rat(3, 2), || format!("instance {t}: gap {gap}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("200 instances, largest gap {worst}"))
}

fn c5_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cuts, mut certs) = (0, 0);
    for t in 0..200 {
        let inst = random_instance(&mut rng, 10, false);
        let n = inst.len();
        let eps = if t % 2 == 0 { rat(1, 2) } else { rat(1, 10) };
        // prefer points on the knapsack row's feasible side so the body of
        // the oracle is exercised
        let mut x = Point::zeros(n);
        for _ in 0..20 {
            let coords: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=8), 8)).collect();
            x = Point::new(coords).map_err(e)?;
            if x.dot(inst.profits()) >= int(1) {
                break;
            }
        }
        match sep::separate_pitch12(&inst, &x, &eps, OracleMode::Approximate).map_err(e)? {
            SeparationResult::Violated(v) => {
                ensure(is_valid(&v.cut, &inst).map_err(e)?, || {
                    format!("triple {t}: invalid {}", v.cut)
                })?;
                ensure(v.cut.is_violated_by(&x), || {
                    format!("triple {t}: cut not violated")
                })?;
                cuts += 1;
            }
            SeparationResult::Certified(y) => {
                let top = Point::new(
                    x.coords()
                        .iter()
                        .map(|v| (v * (int(1) + &eps)).min(int(1)))
                        .collect(),
                )
                .map_err(e)?;
                ensure(x.le(&y) && y.le(&top), || {
                    format!("triple {t}: sandwich fails")
                })?;
                for c in sep::enumerate_pitch1(&inst)
                    .map_err(e)?
                    .iter()
                    .chain(&sep::enumerate_pitch2(&inst).map_err(e)?)
                {
                    ensure(c.is_satisfied_by(&y), || {
                        format!("triple {t}: {c} violated by ybar")
                    })?;
                }
                certs += 1;
            }
        }
    }
    Ok(format!("{cuts} violated, {certs} certified"))
}

fn c6_fptas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = int(1);
    for t in 0..100 {
        let raw = gaplab::gen_random(12, rng.gen(), false).map_err(e)?;
        let inst = Instance::normalize(&raw).map_err(e)?;
        let opt = solve_exact(&inst, inst.costs()).map_err(e)?.value;
        for eps in [rat(1, 2), rat(1, 10), rat(1, 100)] {
            let approx = solve_fptas(&inst, inst.costs(), &eps).map_err(e)?.value;
            ensure(approx >= opt && approx <= (int(1) + &eps) * &opt, || {
                format!("instance {t}, eps {eps}: {approx} vs {opt}")
            })?;
            if !opt.is_zero() {
                worst = worst.max(&approx / &opt);
            }
        }
    }
    Ok(format!("300 solves, worst ratio {worst}"))
}

fn c7_round_kc() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = Rational::zero();
    for t in 0..500 {
        let inst = random_instance(&mut rng, 14, false);
        let mut cuts = Vec::new();
        let x = loop {
            let (_, x) = solve_relaxation(&inst, &cuts).map_err(e)?;
            let x = Point::new(x).map_err(e)?;
            match sep::separate_kc(&inst, &x, KcMode::Exhaustive).map_err(e)? {
                Some(v) => cuts.push(v.cut),
                None => break x,
            }
        };
        let r = round_kc(&inst, &x).map_err(e)?;
        let frac = x.dot(inst.costs());
        ensure(inst.is_feasible_set(&r.chosen), || {
            format!("instance {t}: infeasible rounding")
        })?;
        ensure(r.guaranteed, || format!("instance {t}: KC for S violated"))?;
        ensure(r.cost <= &frac * int(2), || {
            format!("instance {t}: {} > 2 * {frac}", r.cost)
        })?;
        if frac.is_positive() {
            worst = worst.max(&r.cost / &frac);
        }
    }
    Ok(format!("500 instances, worst cost ratio {worst}"))
}

use num_traits::Signed;

fn c8_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = [int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)];
    let mut checked = 0usize;
    for t in 0..50 {
        let inst = random_instance(&mut rng, 6, false);
        let n = inst.len();
        let mut family = sep::enumerate_pitch1(&inst).map_err(e)?;
        family.extend(sep::enumerate_pitch2(&inst).map_err(e)?);
        let feasible: Vec<Vec<usize>> = (0u32..1 << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|s| inst.is_feasible_set(s))
            .collect();
        let total = grid.len().pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let coeffs: Vec<Rational> = (0..n)
                .map(|_| {
                    let v = grid[c % grid.len()].clone();
                    c /= grid.len();
                    v
                })
                .collect();
            let valid = feasible
                .iter()
                .all(|s| s.iter().map(|&i| &coeffs[i]).sum::<Rational>() >= int(1));
            if !valid {
                continue;
            }
            let target = Inequality::from_dense(&coeffs, int(1), Family::User).map_err(e)?;
            if target.pitch() != 2 {
                continue;
            }
            checked += 1;
            ensure(sep::implied_by(&target, &family, n).map_err(e)?, || {
                format!("instance {t}: {target} not implied")
            })?;
        }
    }
    Ok(format!("{checked} valid pitch-2 inequalities implied"))
}

fn c9_pitch_reduce() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut made = 0;
    let mut attempts = 0u64;
    while made < 100 {
        attempts += 1;
        if attempts > 2_000_000 {
            return Err(format!("only {made} inequalities generated"));
        }
        let t = 2 + made % 3;
        let inst = random_instance(&mut rng, 8, false);
        let n = inst.len();
        if n < t {
            continue;
        }
        let coeffs: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=4), 4)).collect();
        let Ok(ineq) = Inequality::from_dense(&coeffs, int(1), Family::User) else {
            continue;
        };
        if ineq.pitch() != t || !brute_valid(&inst, &coeffs, &int(1)) {
            continue;
        }
        let reduced = pitch_reduce(&ineq, t).map_err(e)?;
        ensure(is_valid(&reduced, &inst).map_err(e)?, || {
            format!("{ineq}: {reduced} invalid")
        })?;
        ensure(reduced.pitch() < t, || {
            format!("{ineq}: {reduced} has pitch {}", reduced.pitch())
        })?;
        made += 1;
    }
    Ok(format!("100 inequalities (t = 2, 3, 4), {attempts} draws"))
}

fn c10_fixed_support() -> Outcome {
    let inst = Instance::normalize(&gaplab::gen_ola(4).map_err(e)?).map_err(e)?;
    let x = gaplab::ola_point(4, 2, &inst).map_err(e)?;
    let all: Vec<usize> = (0..inst.len()).collect();
    let bounded = sep::separate_fixed_support(&inst, &x, &all, Some(2)).map_err(e)?;
    ensure(bounded.value == rat(7, 4), || {
        format!("value {} with pitch bound 2", bounded.value)
    })?;
    ensure(!bounded.violated, || "point reported as violated".into())?;
    let stated = bounded
        .alpha
        .iter()
        .all(|(i, a)| *a == rat(1, 2) || inst.profit(*i).is_zero());
    let free = sep::separate_fixed_support(&inst, &x, &all, None).map_err(e)?;
    Ok(format!(
        "value 7/4 over inequalities of pitch <= 2 (alpha 1/2 everywhere: {stated}); without the pitch bound the LP value is {}",
        free.value
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 pitch-3 facts", c1_pitch3),
        ("2 lemma4 family", c2_lemma4),
        ("3 ola family", c3_ola),
        ("4 p=c gap <= 3/2", c4_three_halves),
        ("5 oracle contract", c5_oracle),
        ("6 fptas guarantee", c6_fptas),
        ("7 kc rounding", c7_round_kc),
        ("8 pitch-2 dominance", c8_dominance),
        ("9 pitch reduction", c9_pitch_reduce),
        ("10 fixed-support lp", c10_fixed_support),
    ];
    let limits = [1, 10, 60, 120, 120, 60, 120, 120, 30, 1];
    let mut failed = 0;
    for ((name, check), limit) in criteria.into_iter().zip(limits) {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let slow = took > Duration::from_secs(limit);
        match outcome {
            Ok(detail) if !slow => println!(
                "PASS criterion {name} ({:.2}s): {detail}",
                took.as_secs_f64()
            ),
            Ok(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {name} ({:.2}s, limit {limit}s): {detail}",
                    took.as_secs_f64()
                );
            }
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({:.2}s): {msg}", took.as_secs_f64());
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
