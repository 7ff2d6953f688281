#![allow(dead_code)]

use carpenter::feasibility::kadison_ab;
use carpenter::rational::{rat, Rational};
use carpenter::{DiagonalSpec, ExtRational, TailRule};
use num_traits::{One, Zero};
use rand::Rng;

pub fn random_entry(rng: &mut impl Rng) -> Rational {
    match rng.gen_range(0..10) {
        0 => Rational::zero(),
        1 => Rational::one(),
        2 => rat(1, 2),
        _ => {
            let q = rng.gen_range(2..=12);
            rat(rng.gen_range(1..q), q)
        }
    }
}

pub fn random_tail(rng: &mut impl Rng) -> TailRule {
    let c = |rng: &mut dyn rand::RngCore| rat(rng.gen_range(1..=4), 8);
    let r = |rng: &mut dyn rand::RngCore| rat(1, rng.gen_range(2..=4));
    match rng.gen_range(0..7) {
        0 => TailRule::Zero,
        1 => TailRule::constant(rat(rng.gen_range(1..=5), 10)),
        2 => TailRule::constant(rat(rng.gen_range(6..=9), 10)),
        3 => TailRule::constant(Rational::one()),
        4 | 5 => TailRule::geometric(c(rng), r(rng)),
        _ => TailRule::one_minus_geometric(c(rng), r(rng)),
    }
}

/// Random feasible spec: when both sums are finite, one entry is appended
/// to make `a - b` an integer.
pub fn random_feasible_spec(rng: &mut impl Rng) -> DiagonalSpec {
    let len = rng.gen_range(0..=8);
    let mut prefix: Vec<Rational> = (0..len).map(|_| random_entry(rng)).collect();
    let tail = random_tail(rng);
    let spec = DiagonalSpec::new(prefix.clone(), tail.clone()).unwrap();
    if let (ExtRational::Finite(a), ExtRational::Finite(b)) = kadison_ab(&spec) {
        let diff = a - b;
        let delta = diff.ceil() - diff;
        if !delta.is_zero() {
            let at = rng.gen_range(0..=prefix.len());
            prefix.insert(at, delta);
        }
    }
    DiagonalSpec::new(prefix, tail).unwrap()
}

/// Random finite spec with integer `a - b` (hence integer sum).
pub fn random_feasible_finite(rng: &mut impl Rng, len: usize) -> Vec<Rational> {
    loop {
        let mut values: Vec<Rational> = (0..len).map(|_| random_entry(rng)).collect();
        let total: Rational = values.iter().sum();
        let delta = total.ceil() - &total;
        if delta.is_zero() {
            return values;
        }
        // replace one entry by itself plus delta when that stays in [0,1]
        if let Some(i) = (0..len).find(|&i| &values[i] + &delta <= Rational::one()) {
            values[i] = &values[i] + &delta;
            return values;
        }
    }
}
