//! Analytic solutions that bypass the LP: two binary samples, modular sums,
//! modular chains and the equiprobable-partition construction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{assemble_mapping, disclosure_upper_bound, DisclosureMapping, DisclosureReport};
use crate::math::{abs, log2, max_abs};
use crate::prob::{for_each_tuple, shannon_entropy, Channel, DiscreteScenario, Pmf};
use crate::{Error, Result};

/// Two binary samples with `P(X1 = 0) = alpha`, `P(X2 = 0) = beta` and
/// `r = P(X1 = 0, X2 = 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBinaryParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
}

/// Direction spanning the null space of the two-sample constraints.
pub const TWO_BINARY_NULL: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

impl TwoBinaryParams {
    pub fn new(alpha: f64, beta: f64, r: f64) -> Result<Self> {
        let p = TwoBinaryParams { alpha, beta, r };
        p.p_dataset()?;
        Ok(p)
    }

    /// `R = min(alpha, 1 - beta)`.
    pub fn r_max(&self) -> f64 {
        self.alpha.min(1.0 - self.beta)
    }

    /// `[alpha - r, r, beta - alpha + r, 1 - beta - r]` over
    /// `(0,0), (0,1), (1,0), (1,1)`.
    pub fn p_dataset(&self) -> Result<[f64; 4]> {
        let TwoBinaryParams { alpha, beta, r } = *self;
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "marginals must lie in (0,1), got alpha={alpha}, beta={beta}"
            )));
        }
        if !(r >= 0.0 && r <= self.r_max()) {
            return Err(Error::InvalidParameter(format!(
                "r={r} outside [0, {}]",
                self.r_max()
            )));
        }
        let p = [alpha - r, r, beta - alpha + r, 1.0 - beta - r];
        if p.iter().any(|&v| v < -1e-12) {
            return Err(Error::InvalidParameter(format!("induced joint {p:?} is not a pmf")));
        }
        Ok(p.map(|v| if v < 1e-12 { 0.0 } else { v }))
    }

    /// The scenario for a latent channel over all four outcomes
    /// (`|W| x 4`); zero-probability outcomes are dropped from the support.
    pub fn scenario(&self, latent: &Channel) -> Result<DiscreteScenario> {
        if latent.inputs() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "latent channel has {} inputs, expected 4",
                latent.inputs()
            )));
        }
        let p = self.p_dataset()?;
        let tuples = [[0, 0], [0, 1], [1, 0], [1, 1]];
        let keep: Vec<usize> = (0..4).filter(|&i| p[i] > 0.0).collect();
        let support = keep.iter().map(|&i| tuples[i].to_vec()).collect();
        let pmf = Pmf::normalized(keep.iter().map(|&i| p[i]).collect(), 1e-12)?;
        let cols: Vec<Vec<f64>> = keep.iter().map(|&i| latent.column(i)).collect();
        DiscreteScenario::new(vec![2, 2], support, pmf, Channel::from_columns(&cols)?)
    }

    /// The segment `p + t n` inside the simplex: `(t_min, t_max)`.
    fn segment(&self, p: &[f64; 4]) -> (f64, f64) {
        (-p[0].min(p[3]), p[1].min(p[2]))
    }
}

/// Capacity and optimal mapping for two binary samples in closed form.
///
/// The admissible polytope is the segment between `a1 = p + t_min n` and
/// `a2 = p + t_max n`, mixed with weights `t_max / (t_max - t_min)` and its
/// complement. When `beta >= alpha` these are `p - (R - r) n`, `p + r n` and
/// `r / R`. Degenerate parameters (three or fewer outcomes) give zero
/// capacity and a constant output.
pub fn two_binary_solve(params: &TwoBinaryParams, latent: &Channel) -> Result<DisclosureReport> {
    let scenario = params.scenario(latent)?;
    let p = params.p_dataset()?;
    let (t_min, t_max) = params.segment(&p);
    let entropy_w = scenario.entropy_w();
    let upper_bound = disclosure_upper_bound(&scenario);

    if scenario.support_size() < 4 || t_min >= 0.0 || t_max <= 0.0 {
        let pd = scenario.p_dataset().clone();
        let mapping = assemble_mapping(core::slice::from_ref(&pd), &[1.0], &pd)?;
        let residuals = mapping.residuals(&scenario);
        return Ok(DisclosureReport {
            capacity: 0.0,
            lp_optimum: entropy_w,
            entropy_w,
            mapping,
            upper_bound,
            feasible: false,
            y_cardinality: 1,
            lp_weights: vec![1.0],
            vertices: vec![pd],
            residuals,
            alternative_optimum: false,
            rank: scenario.support_size(),
            nullity: 0,
        });
    }

    let shift = |t: f64| -> Pmf {
        let v: Vec<f64> = p.iter().zip(TWO_BINARY_NULL).map(|(a, d)| (a + t * d).max(0.0)).collect();
        Pmf::normalized(v, 1e-9).expect("segment endpoints lie in the simplex")
    };
    let a1 = shift(t_min);
    let a2 = shift(t_max);
    let w1 = t_max / (t_max - t_min);
    let weights = [w1, 1.0 - w1];
    let h1 = shannon_entropy(&latent.apply(a1.probs()));
    let h2 = shannon_entropy(&latent.apply(a2.probs()));
    let lp_optimum = w1 * h1 + (1.0 - w1) * h2;
    let capacity = (entropy_w - lp_optimum).max(0.0);
    let vertices = vec![a1, a2];
    let mapping = assemble_mapping(&vertices, &weights, scenario.p_dataset())?;
    let residuals = mapping.residuals(&scenario);
    let direction = latent.apply(&TWO_BINARY_NULL);
    Ok(DisclosureReport {
        capacity,
        lp_optimum,
        entropy_w,
        y_cardinality: mapping.y_cardinality(),
        mapping,
        upper_bound,
        feasible: max_abs(direction.iter().map(|v| v / 2.0)) > crate::engine::FEASIBILITY_TOL,
        lp_weights: weights.to_vec(),
        vertices,
        residuals,
        alternative_optimum: abs(h1 - h2) <= 1e-9,
        rank: 3,
        nullity: 1,
    })
}

fn uniform_product(alphabets: &[usize]) -> (Vec<Vec<usize>>, Pmf) {
    let mut support = Vec::new();
    for_each_tuple(alphabets, |x| support.push(x.to_vec()));
    let n = support.len();
    (support, Pmf::uniform(n))
}

/// `X1` uniform on `[M]`, `X2` uniform on `[kM]`, independent, with
/// `W = Y = X1 + X2 mod M`. The mapping attains `I(W;Y) = log2 M`.
pub fn modular_sum_construct(m: usize, k_mult: usize) -> Result<(DiscreteScenario, DisclosureMapping)> {
    if m < 2 || k_mult < 1 {
        return Err(Error::InvalidParameter(format!("need M >= 2 and k >= 1, got M={m}, k={k_mult}")));
    }
    let (support, p) = uniform_product(&[m, k_mult * m]);
    let map: Vec<usize> = support.iter().map(|x| (x[0] + x[1]) % m).collect();
    let latent = Channel::deterministic(m, &map)?;
    let scenario = DiscreteScenario::new(vec![m, k_mult * m], support, p, latent.clone())?;
    let mapping = DisclosureMapping::from_forward(scenario.p_dataset(), &latent)?;
    Ok((scenario, mapping))
}

/// Upper limit on `M^(n+1)` for exact marginalization of the auxiliary key.
pub const CHAIN_BUDGET: u64 = 10_000_000;

/// Release `Y = (L_1, ..., L_{n-k+1})` with
/// `L_i = Q + X_i + ... + X_{i+k-1} mod M` and a uniform key `Q`.
#[derive(Debug, Clone)]
pub struct ModularChain {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// `X^n` i.i.d. uniform on `[M]` with `W = X^n`.
    pub scenario: DiscreteScenario,
    /// `P_{Y|X^n}` with `Q` marginalized exactly.
    pub mapping: DisclosureMapping,
    /// `I(X^n; Y)`.
    pub information: f64,
    /// `(n - k) log2 M`, what the entropy chain guarantees.
    pub lower_bound: f64,
    rng: ChaCha8Rng,
}

impl ModularChain {
    /// Draws one release for `dataset`, sampling `Q` from the seeded
    /// generator.
    pub fn release(&mut self, dataset: &[usize]) -> Vec<usize> {
        let q = self.rng.gen_range(0..self.m);
        chain_outputs(dataset, q, self.k, self.m)
    }

    /// Independence residual of `Y` against each window
    /// `(X_i, ..., X_{i+k-1})`.
    pub fn window_residuals(&self) -> Vec<f64> {
        let windows: Vec<Channel> = (0..=self.n - self.k)
            .map(|i| self.scenario.window_indicator(&(i..i + self.k).collect::<Vec<_>>()))
            .collect();
        self.mapping.residuals_against(&windows)
    }
}

fn chain_outputs(x: &[usize], q: usize, k: usize, m: usize) -> Vec<usize> {
    (0..=x.len() - k)
        .map(|i| (q + x[i..i + k].iter().sum::<usize>()) % m)
        .collect()
}

pub fn modular_chain_construct(n: usize, k: usize, m: usize, seed: u64) -> Result<ModularChain> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need M >= 2, got {m}")));
    }
    let outs = n - k + 1;
    let within = |e: usize| (m as u64).checked_pow(e as u32).is_some_and(|v| v <= CHAIN_BUDGET);
    if !within(n + 1) || !within(n + outs) {
        return Err(Error::BudgetExceeded(format!(
            "M={m}, n={n}, k={k} exceeds {CHAIN_BUDGET} joint outcomes"
        )));
    }
    let (support, p) = uniform_product(&vec![m; n]);
    let scenario = DiscreteScenario::new(vec![m; n], support, p, Channel::identity(m.pow(n as u32)))?;
    let ny = m.pow(outs as u32);
    let nx = scenario.support_size();
    let mut forward = vec![0.0; ny * nx];
    for (xi, x) in scenario.support().iter().enumerate() {
        for q in 0..m {
            let y = chain_outputs(x, q, k, m).iter().fold(0, |acc, &l| acc * m + l);
            forward[y * nx + xi] += 1.0 / m as f64;
        }
    }
    let forward = Channel::new(ny, nx, forward)?;
    let mapping = DisclosureMapping::from_forward(scenario.p_dataset(), &forward)?;
    let information = mapping.information(&scenario);
    Ok(ModularChain {
        n,
        k,
        m,
        information,
        lower_bound: (n - k) as f64 * log2(m as f64),
        scenario,
        mapping,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

/// `Ŷ = (I + J) mod K` over independent cell indices `I, J` uniform on
/// `[K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionConstruction {
    pub scenario: DiscreteScenario,
    pub mapping: DisclosureMapping,
    /// `I(I, J; Ŷ) = log2 K`.
    pub information: f64,
}

pub fn partition_construct(k: usize) -> Result<PartitionConstruction> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need K >= 2, got {k}")));
    }
    let (support, p) = uniform_product(&[k, k]);
    let map: Vec<usize> = support.iter().map(|x| (x[0] + x[1]) % k).collect();
    let scenario = DiscreteScenario::new(vec![k, k], support, p, Channel::identity(k * k))?;
    let mapping = DisclosureMapping::from_forward(scenario.p_dataset(), &Channel::deterministic(k, &map)?)?;
    let information = mapping.information(&scenario);
    Ok(PartitionConstruction {
        scenario,
        mapping,
        information,
    })
}
