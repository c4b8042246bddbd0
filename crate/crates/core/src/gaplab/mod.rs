//! Instance generators, the instance file format, gap experiments and the
//! command line.

pub mod cli;
pub mod experiment;
pub mod format;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Point, Rational, RawInstance};

pub use experiment::{
    experiment_gap_table, write_csv, ExperimentFamily, ExperimentRow, CSV_HEADER,
};
pub use format::{parse_instance, serialize_instance};

fn exact_sqrt(n: u64) -> Result<u64> {
    let s = n.sqrt();
    if s * s != n {
        return Err(Error::Precondition(format!(
            "n = {n} is not a perfect square"
        )));
    }
    Ok(s)
}

fn r(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// The instance from the pitch-1 gap construction: `y` (cost `eps`, profit
/// `n - sqrt n`), `z` (cost `sqrt n`, profit `n/2`) and `n` unit items, with
/// threshold `n`.
pub fn gen_lemma4(n: u64, eps: &Rational) -> Result<RawInstance> {
    let s = exact_sqrt(n)?;
    if n < 4 {
        return Err(Error::Precondition(format!("n = {n} must be at least 4")));
    }
    if *eps <= Rational::from_integer(0.into()) {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    let mut raw = RawInstance::new(r(n));
    raw.push("y", eps.clone(), r(n - s));
    raw.push("z", r(s), Rational::new(n.into(), 2.into()));
    for i in 1..=n {
        raw.push(format!("x{i}"), Rational::one(), Rational::one());
    }
    Ok(raw)
}

/// The fractional point `y = 1`, `z = 2/sqrt n`, `x_i = 1/(n - sqrt n + 1)`
/// of the [`gen_lemma4`] instance, in sorted order of `inst`.
pub fn lemma4_point(n: u64, inst: &Instance) -> Result<Point> {
    let s = exact_sqrt(n)?;
    let mut input = vec![Rational::one(), Rational::new(2.into(), s.into())];
    input.extend((0..n).map(|_| Rational::new(1.into(), (n - s + 1).into())));
    Point::new(inst.from_input_order(&input)?)
}

/// Value of the [`lemma4_point`]: `eps + 2 + n/(n - sqrt n + 1)`.
pub fn lemma4_point_value(n: u64, eps: &Rational) -> Result<Rational> {
    let s = exact_sqrt(n)?;
    Ok(eps + r(2) + Rational::new(n.into(), (n - s + 1).into()))
}

/// `n` unit items `x` (cost 1, profit 1) and `n` small items `z` (cost
/// `1/sqrt n`, profit `1/n`), threshold `1 + 1/sqrt n`.
pub fn gen_ola(n: u64) -> Result<RawInstance> {
    let s = exact_sqrt(n)?;
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let mut raw = RawInstance::new(Rational::one() + Rational::new(1.into(), s.into()));
    for i in 1..=n {
        raw.push(format!("x{i}"), Rational::one(), Rational::one());
    }
    for j in 1..=n {
        raw.push(
            format!("z{j}"),
            Rational::new(1.into(), s.into()),
            Rational::new(1.into(), n.into()),
        );
    }
    Ok(raw)
}

/// `x_i = (1 + 1/sqrt n)/n`, `z_j = k/n` on the [`gen_ola`] instance, in
/// sorted order of `inst`.
pub fn ola_point(n: u64, k: u64, inst: &Instance) -> Result<Point> {
    let s = exact_sqrt(n)?;
    let xv = (Rational::one() + Rational::new(1.into(), s.into())) / r(n);
    let zv = Rational::new(k.into(), n.into());
    let mut input = vec![xv; n as usize];
    input.extend(std::iter::repeat_n(zv, n as usize));
    Point::new(inst.from_input_order(&input)?)
}

/// Cost of the [`ola_point`]: `1 + 1/sqrt n + k/sqrt n`.
pub fn ola_point_value(n: u64, k: u64) -> Result<Rational> {
    let s = exact_sqrt(n)?;
    Ok(Rational::one() + Rational::new((1 + k).into(), s.into()))
}

/// Seven items with profits 5, 6, 11, 16, 17, 18, 21, threshold 41 and unit
/// costs.
pub fn gen_pitch3_wild() -> RawInstance {
    let mut raw = RawInstance::new(r(41));
    for (i, p) in [5u64, 6, 11, 16, 17, 18, 21].into_iter().enumerate() {
        raw.push(format!("x{}", i + 1), Rational::one(), r(p));
    }
    raw
}

const RANDOM_GRID: i64 = 16;

/// Random instance with profits and costs on the grid `k/16`, threshold 1.
/// Deterministic in `seed`; redrawn until the total profit reaches 1.
pub fn gen_random(n: usize, seed: u64, p_equals_c: bool) -> Result<RawInstance> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Rational::new(rng.gen_range(1..=RANDOM_GRID).into(), RANDOM_GRID.into())
    };
    loop {
        let mut raw = RawInstance::new(Rational::one());
        let mut total = Rational::from_integer(0.into());
        for i in 1..=n {
            let p = draw(&mut rng);
            let c = if p_equals_c {
                p.clone()
            } else {
                draw(&mut rng)
            };
            total += &p;
            raw.push(format!("x{i}"), c, p);
        }
        if total >= Rational::one() {
            return Ok(raw);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapdp::solve_exact;
    use crate::model::rational::{int, rat};

    #[test]
    fn lemma4_normalization() {
        let i = Instance::normalize(&gen_lemma4(16, &rat(1, 8)).unwrap()).unwrap();
        assert_eq!(i.q(), &BigInt::from(16));
        let p: Vec<Rational> = (0..18)
            .map(|k| i.profit(i.sorted_index(k)).clone())
            .collect();
        assert_eq!(p[0], rat(3, 4));
        assert_eq!(p[1], rat(1, 2));
        assert_eq!(p[2], rat(1, 16));
        let i9 = Instance::normalize(&gen_lemma4(9, &rat(1, 8)).unwrap()).unwrap();
        assert_eq!(i9.profit(i9.sorted_index(1)), &rat(1, 2));
        assert!(gen_lemma4(8, &rat(1, 8)).is_err());
        assert!(gen_lemma4(1, &rat(1, 8)).is_err());
    }

    #[test]
    fn lemma4_optimum_n4() {
        let i = Instance::normalize(&gen_lemma4(4, &rat(1, 8)).unwrap()).unwrap();
        assert_eq!(solve_exact(&i, i.costs()).unwrap().value, rat(17, 8));
        let x = lemma4_point(4, &i).unwrap();
        assert_eq!(x.dot(i.costs()), lemma4_point_value(4, &rat(1, 8)).unwrap());
    }

    #[test]
    fn ola_normalization() {
        let i = Instance::normalize(&gen_ola(4).unwrap()).unwrap();
        assert_eq!(i.q(), &BigInt::from(6));
        assert_eq!(i.profit(0), &rat(1, 6));
        assert_eq!(i.profit(7), &rat(2, 3));
        assert_eq!(solve_exact(&i, i.costs()).unwrap().value, int(2));
        let x = ola_point(4, 2, &i).unwrap();
        assert_eq!(x.dot(i.costs()), rat(5, 2));
        assert_eq!(ola_point_value(4, 2).unwrap(), rat(5, 2));
        let big = gen_ola(100).unwrap();
        assert_eq!(big.threshold, rat(11, 10));
        assert_eq!(Instance::normalize(&big).unwrap().q(), &BigInt::from(110));
    }

    #[test]
    fn wild_scaling() {
        let i = Instance::normalize(&gen_pitch3_wild()).unwrap();
        assert_eq!(i.q(), &BigInt::from(41));
        let r: Vec<BigInt> = i.r().to_vec();
        assert_eq!(r, [5, 6, 11, 16, 17, 18, 21].map(BigInt::from).to_vec());
    }

    #[test]
    fn random_is_deterministic_and_feasible() {
        let a = gen_random(5, 1, true).unwrap();
        assert_eq!(a, gen_random(5, 1, true).unwrap());
        for seed in 0..50 {
            let raw = gen_random(3, seed, false).unwrap();
            let i = Instance::normalize(&raw).unwrap();
            assert!(BigInt::from(16) % i.q() == BigInt::from(0));
        }
        assert!(a.items.iter().all(|it| it.cost == it.profit));
    }
}
