#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sampleprivacy_core::geometry::{build_constraint_matrix, null_space_basis, DEFAULT_SV_TOL};
use sampleprivacy_core::oracle::{ExactScenario, Rational};
use sampleprivacy_core::prob::{build_observation_scenario, for_each_tuple};
use sampleprivacy_core::{Channel, DiscreteScenario, Pmf};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Positive integer weights normalised to an exact pmf.
fn exact_pmf(rng: &mut ChaCha8Rng, len: usize, allow_zero: bool) -> Vec<Rational> {
    loop {
        let lo = if allow_zero { 0 } else { 1 };
        let w: Vec<i64> = (0..len).map(|_| rng.gen_range(lo..=9)).collect();
        let s: i64 = w.iter().sum();
        if s > 0 {
            return w.into_iter().map(|v| q(v, s)).collect();
        }
    }
}

pub fn nullity(s: &DiscreteScenario) -> usize {
    let p = build_constraint_matrix(s, &[]).unwrap();
    null_space_basis(&p, DEFAULT_SV_TOL).nullity()
}

/// A random exact scenario with at most 8 support points and nullity at
/// most 3, small enough for the brute-force oracle.
pub fn oracle_scenario(rng: &mut ChaCha8Rng) -> ExactScenario {
    const SHAPES: [&[usize]; 4] = [&[2, 2], &[2, 3], &[3, 2], &[2, 2, 2]];
    loop {
        let alphabets = SHAPES[rng.gen_range(0..SHAPES.len())].to_vec();
        let mut support = Vec::new();
        for_each_tuple(&alphabets, |x| {
            if rng.gen_bool(0.85) {
                support.push(x.to_vec());
            }
        });
        if support.len() < 2 || support.len() > 8 {
            continue;
        }
        let p = exact_pmf(rng, support.len(), false);
        let nw = rng.gen_range(2..=3);
        let cols: Vec<Vec<Rational>> = (0..support.len()).map(|_| exact_pmf(rng, nw, true)).collect();
        let latent = (0..nw).map(|w| cols.iter().map(|c| c[w].clone()).collect()).collect();
        let Ok(s) = ExactScenario::new(alphabets, support, p, latent) else { continue };
        let f = s.to_float().unwrap();
        if nullity(&f) <= 3 {
            return s;
        }
    }
}

pub fn random_pmf(rng: &mut ChaCha8Rng, len: usize) -> Pmf {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    Pmf::new(w.into_iter().map(|v| v / s).collect()).unwrap()
}

/// A channel with `outputs` rows and `inputs` columns, every column a random pmf.
pub fn random_channel(rng: &mut ChaCha8Rng, outputs: usize, inputs: usize) -> Channel {
    let cols: Vec<Vec<f64>> = (0..inputs).map(|_| random_pmf(rng, outputs).into_vec()).collect();
    Channel::from_columns(&cols).unwrap()
}

/// Random joint `p(w, x)` indexed `[w][x]`, strictly positive.
pub fn random_joint(rng: &mut ChaCha8Rng, nw: usize, nx: usize) -> Vec<Vec<f64>> {
    let flat = random_pmf(rng, nw * nx).into_vec();
    flat.chunks(nx).map(|c| c.to_vec()).collect()
}

/// A small random floating scenario: `W` observed `n` times through a random
/// channel, sometimes with a random latent channel on a full product support.
pub fn small_scenario(rng: &mut ChaCha8Rng) -> DiscreteScenario {
    if rng.gen_bool(0.5) {
        let nw = rng.gen_range(2..=3);
        let nx = rng.gen_range(2..=3);
        let n = if nx == 2 { rng.gen_range(2..=3) } else { 2 };
        let p_w = random_pmf(rng, nw);
        let obs = random_channel(rng, nx, nw);
        build_observation_scenario(&p_w, &obs, n).unwrap()
    } else {
        let alphabets = if rng.gen_bool(0.5) { vec![2, 2] } else { vec![2, 3] };
        let mut support = Vec::new();
        for_each_tuple(&alphabets, |x| support.push(x.to_vec()));
        let p = random_pmf(rng, support.len());
        let nw = rng.gen_range(2..=3);
        let latent = random_channel(rng, nw, support.len());
        DiscreteScenario::new(alphabets, support, p, latent).unwrap()
    }
}

/// Exact rational entries sum to one.
pub fn sums_to_one(v: &[Rational]) -> bool {
    v.iter().fold(Rational::zero(), |a, b| a + b) == q(1, 1)
}

/// Whether two point sets agree as sets under `L∞ <= tol`.
pub fn same_point_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let close = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).all(|(u, v)| (u - v).abs() <= tol);
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| close(x, y))) && b.iter().all(|y| a.iter().any(|x| close(x, y)))
}
