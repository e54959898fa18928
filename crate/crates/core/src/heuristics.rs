//! Low-complexity sample-private mappings for datasets of independent
//! samples: windowed partial processing and uniformizer pre-processing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{self_disclosure, DisclosureMapping};
use crate::math::abs;
use crate::prob::{
    binary_entropy, conditional_mutual_information, for_each_tuple, Channel, DiscreteScenario, Pmf,
};
use crate::{Error, Result};

/// Largest `|Y| · |X̂|` (or `|S^n| · |X^n|`) enumerated exactly.
pub const ENUMERATION_BUDGET: usize = 10_000_000;
/// Slack on `p(x^n) = Π p(x_i)` for the independence precondition.
pub const INDEPENDENCE_TOL: f64 = 1e-9;
/// Largest residual for which a combined release counts as sample-private.
pub const PRIVACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicReport {
    /// The dataset, with `W = X^n`.
    pub scenario: DiscreteScenario,
    /// One mapping per window, each over that window's outcomes.
    pub mapping_family: Vec<DisclosureMapping>,
    /// `I(Y_j; X_j | X_{j+1}, ..., X_{j+k-1})` for each window.
    pub per_window_terms: Vec<f64>,
    /// The headline figure: the window-sum identity for partial processing
    /// with `k = 2`, the closed form for pre-processing, and the enumerated
    /// value otherwise.
    pub total_information: f64,
    /// `total_information / H(X^n)`.
    pub efficiency: f64,
    /// `I(Y; X^n)` by exhaustive enumeration of the joint release.
    pub enumerated_information: Option<f64>,
    /// `P_{Y|X^n}` of the combined release, when it fits the budget.
    pub joint_mapping: Option<DisclosureMapping>,
    /// Whether the combined release is independent of every sample (within
    /// [`PRIVACY_TOL`]); `None` when it was not built.
    pub private: Option<bool>,
}

impl HeuristicReport {
    /// Residual of the combined release against each sample, if built.
    pub fn residuals(&self) -> Option<Vec<f64>> {
        self.joint_mapping.as_ref().map(|m| m.residuals(&self.scenario))
    }
}

fn privacy_of(scenario: &DiscreteScenario, joint: &Option<DisclosureMapping>) -> Option<bool> {
    joint
        .as_ref()
        .map(|m| m.residuals(scenario).iter().all(|&d| d <= PRIVACY_TOL))
}

fn product_marginals(scenario: &DiscreteScenario) -> Vec<Vec<f64>> {
    (0..scenario.n_samples()).map(|i| scenario.sample_marginal(i)).collect()
}

/// Largest deviation of the dataset law from the product of its marginals.
pub fn independence_deviation(scenario: &DiscreteScenario) -> f64 {
    let m = product_marginals(scenario);
    let prod = |x: &[usize]| x.iter().enumerate().map(|(i, &v)| m[i][v]).product::<f64>();
    let mut covered = 0.0;
    let mut dev: f64 = 0.0;
    for (x, p) in scenario.support().iter().zip(scenario.p_dataset().probs()) {
        let q = prod(x);
        covered += q;
        dev = dev.max(abs(p - q));
    }
    dev.max(1.0 - covered)
}

fn window_scenario(marginals: &[Vec<f64>], coords: &[usize]) -> Result<DiscreteScenario> {
    let alphabets: Vec<usize> = coords.iter().map(|&c| marginals[c].len()).collect();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for_each_tuple(&alphabets, |x| {
        let p: f64 = x.iter().zip(coords).map(|(&v, &c)| marginals[c][v]).product();
        if p > 0.0 {
            support.push(x.to_vec());
            probs.push(p);
        }
    });
    let n = support.len();
    DiscreteScenario::new(alphabets, support, Pmf::normalized(probs, 1e-9)?, Channel::identity(n))
}

/// `I(Y; X_first | X_rest)` for a window mapping over `window`.
fn leading_sample_term(window: &DiscreteScenario, mapping: &DisclosureMapping) -> f64 {
    let a = window.sample_alphabets();
    let rest: usize = a[1..].iter().product();
    let forward = mapping.cond_y_given_dataset();
    let mut t = vec![vec![vec![0.0; rest]; a[0]]; forward.outputs()];
    for (k, (x, p)) in window.support().iter().zip(window.p_dataset().probs()).enumerate() {
        let r = x[1..].iter().zip(&a[1..]).fold(0, |acc, (&v, &s)| acc * s + v);
        for (y, row) in t.iter_mut().enumerate() {
            row[x[0]][r] += p * forward.get(y, k);
        }
    }
    conditional_mutual_information(&t).unwrap_or(0.0)
}

/// Combines per-window forward channels (given as functions of the full
/// dataset tuple) into one `P_{Y|X^n}`, `Y` in mixed radix, first window
/// most significant.
fn combine(
    scenario: &DiscreteScenario,
    sizes: &[usize],
    cond: impl Fn(usize, &[usize], usize) -> f64,
) -> Result<Option<DisclosureMapping>> {
    let ny = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let nx = scenario.support_size();
    let Some(ny) = ny.filter(|&ny| ny.saturating_mul(nx) <= ENUMERATION_BUDGET) else {
        return Ok(None);
    };
    let mut data = vec![0.0; ny * nx];
    for (xi, x) in scenario.support().iter().enumerate() {
        let mut y = 0;
        for_each_tuple(sizes, |ys| {
            data[y * nx + xi] = ys.iter().enumerate().map(|(j, &v)| cond(j, x, v)).product();
            y += 1;
        });
    }
    let forward = Channel::with_tolerance(ny, nx, data, 1e-9)?;
    Ok(Some(DisclosureMapping::from_forward(scenario.p_dataset(), &forward)?))
}

/// Releases `Y_j` from each window `(X_j, ..., X_{j+k-1})`, each chosen as
/// the optimal self-disclosure mapping of its window.
///
/// With `k = 2` the combined release is independent of every sample. For
/// larger windows that is not guaranteed: overlapping windows share more than
/// one sample and the combined release can leak. Check
/// [`HeuristicReport::private`].
pub fn partial_processing(scenario: &DiscreteScenario, k: usize, cap: u64) -> Result<HeuristicReport> {
    let n = scenario.n_samples();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("window size {k} outside [2, {n}]")));
    }
    let dev = independence_deviation(scenario);
    if dev > INDEPENDENCE_TOL {
        return Err(Error::NotIndependent(dev));
    }
    let scenario = scenario.self_scenario();
    let marginals = product_marginals(&scenario);
    let mut windows = Vec::new();
    let mut family = Vec::new();
    let mut terms = Vec::new();
    for j in 0..=n - k {
        let coords: Vec<usize> = (j..j + k).collect();
        let w = window_scenario(&marginals, &coords)?;
        let sd = self_disclosure(&w, cap)?;
        terms.push(leading_sample_term(&w, &sd.report.mapping));
        family.push(sd.report.mapping);
        windows.push(w);
    }
    let lookups: Vec<BTreeMap<&[usize], usize>> = windows
        .iter()
        .map(|w| w.support().iter().enumerate().map(|(i, x)| (x.as_slice(), i)).collect())
        .collect();
    let sizes: Vec<usize> = family.iter().map(|m| m.y_cardinality()).collect();
    let joint = combine(&scenario, &sizes, |j, x, y| {
        let col = lookups[j][&x[j..j + k]];
        family[j].cond_y_given_dataset().get(y, col)
    })?;
    let enumerated = joint.as_ref().map(|m| m.information(&scenario));
    let total = if k == 2 {
        terms.iter().sum()
    } else {
        enumerated.ok_or_else(|| {
            Error::BudgetExceeded("joint release too large to enumerate for k > 2".into())
        })?
    };
    let private = privacy_of(&scenario, &joint);
    if private == Some(false) {
        log::warn!("the combined release of {k}-sample windows is not independent of every sample");
    }
    let h = scenario.entropy_dataset();
    Ok(HeuristicReport {
        private,
        efficiency: if h > 0.0 { total / h } else { 0.0 },
        scenario,
        mapping_family: family,
        per_window_terms: terms,
        total_information: total,
        enumerated_information: enumerated,
        joint_mapping: joint,
    })
}

/// Z-channel taking `Bern(q)` (with `q = P(X = 1) <= 1/2`) to a fair coin:
/// `1` passes unchanged, `0` flips to `1` with probability
/// `β = (1/2 - q) / (1 - q)`. For `q > 1/2` relabel the symbols first.
pub fn uniformize(q: f64) -> Result<Channel> {
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::InvalidParameter(format!("q = {q} outside (0, 1/2]")));
    }
    let beta = uniformizer_crossover(q);
    Channel::from_rows(&[vec![1.0 - beta, 0.0], vec![beta, 1.0]])
}

pub fn uniformizer_crossover(q: f64) -> f64 {
    (0.5 - q) / (1.0 - q)
}

/// Per-pair closed form `1 - 2q(1-q) h_b(β) - (1-q)^2 h_b(2β(1-β))`.
pub fn preprocess_pair_information(q: f64) -> f64 {
    let beta = uniformizer_crossover(q);
    1.0 - 2.0 * q * (1.0 - q) * binary_entropy(beta)
        - (1.0 - q) * (1.0 - q) * binary_entropy(2.0 * beta * (1.0 - beta))
}

fn iid_bernoulli(q: f64, n: usize) -> Result<DiscreteScenario> {
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for_each_tuple(&vec![2; n], |x| {
        support.push(x.to_vec());
        probs.push(x.iter().map(|&v| if v == 1 { q } else { 1.0 - q }).product());
    });
    let size = support.len();
    DiscreteScenario::new(vec![2; n], support, Pmf::normalized(probs, 1e-9)?, Channel::identity(size))
}

/// `Y_pre = (S_1 ⊕ S_2, ..., S_{n-1} ⊕ S_n)` where `S_i` is `X_i` passed
/// through [`uniformize`], for `X_i` i.i.d. `Bern(q)`.
///
/// `total_information` is `(n - 1)` times the per-pair closed form;
/// `enumerated_information` is the exact `I(Y_pre; X^n)`.
pub fn preprocess_chain(q: f64, n: usize) -> Result<HeuristicReport> {
    let z = uniformize(q)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let scenario = iid_bernoulli(q, n)?;
    let pair = iid_bernoulli(q, 2)?;
    let xor_given = |a: usize, b: usize, y: usize| -> f64 {
        (0..2)
            .flat_map(|s| (0..2).map(move |t| (s, t)))
            .filter(|&(s, t)| s ^ t == y)
            .map(|(s, t)| z.get(s, a) * z.get(t, b))
            .sum()
    };
    let pair_forward = Channel::with_tolerance(
        2,
        4,
        (0..2)
            .flat_map(|y| pair.support().iter().map(move |x| (y, x)))
            .map(|(y, x)| xor_given(x[0], x[1], y))
            .collect(),
        1e-12,
    )?;
    let pair_mapping = DisclosureMapping::from_forward(pair.p_dataset(), &pair_forward)?;
    let term = preprocess_pair_information(q);
    let total = (n - 1) as f64 * term;

    // Enumerate S^n given X^n; the release is a function of S^n.
    let states = 1usize << n;
    let joint = if states.saturating_mul(states) <= ENUMERATION_BUDGET {
        let ny = 1usize << (n - 1);
        let mut data = vec![0.0; ny * states];
        for (xi, x) in scenario.support().iter().enumerate() {
            for_each_tuple(&vec![2; n], |s| {
                let p: f64 = s.iter().zip(x).map(|(&si, &xi)| z.get(si, xi)).product();
                let y = (0..n - 1).fold(0, |acc, j| acc * 2 + (s[j] ^ s[j + 1]));
                data[y * states + xi] += p;
            });
        }
        let forward = Channel::with_tolerance(ny, states, data, 1e-9)?;
        Some(DisclosureMapping::from_forward(scenario.p_dataset(), &forward)?)
    } else {
        None
    };
    let enumerated = joint.as_ref().map(|m| m.information(&scenario));
    let h = scenario.entropy_dataset();
    Ok(HeuristicReport {
        private: privacy_of(&scenario, &joint),
        efficiency: total / h,
        scenario,
        mapping_family: vec![pair_mapping; n - 1],
        per_window_terms: vec![term; n - 1],
        total_information: total,
        enumerated_information: enumerated,
        joint_mapping: joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DEFAULT_CAP;

    #[test]
    fn fair_bits_window_pairs() {
        let s = iid_bernoulli(0.5, 4).unwrap();
        let r = partial_processing(&s, 2, DEFAULT_CAP).unwrap();
        assert_eq!(r.per_window_terms.len(), 3);
        for t in &r.per_window_terms {
            assert!(abs(t - 1.0) < 1e-9);
        }
        assert!(abs(r.total_information - 3.0) < 1e-9);
        assert!(abs(r.efficiency - 0.75) < 1e-9);
        assert!(abs(r.enumerated_information.unwrap() - 3.0) < 1e-9);
        assert!(r.residuals().unwrap().iter().all(|&d| d <= 1e-9));
    }

    #[test]
    fn dependent_samples_are_rejected() {
        let s = crate::prob::build_observation_scenario(
            &Pmf::uniform(2),
            &Channel::bsc(0.1).unwrap(),
            3,
        )
        .unwrap();
        assert!(matches!(partial_processing(&s, 2, DEFAULT_CAP), Err(Error::NotIndependent(_))));
    }

    #[test]
    fn uniformizer() {
        let id = uniformize(0.5).unwrap();
        assert_eq!(id.rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(abs(uniformizer_crossover(0.3) - 2.0 / 7.0) < 1e-15);
        let z = uniformize(0.2).unwrap();
        let out = z.apply(&[0.8, 0.2]);
        assert!(abs(out[0] - 0.5) < 1e-15 && abs(out[1] - 0.5) < 1e-15);
        assert!(uniformize(0.6).is_err());
        assert!(uniformize(0.0).is_err());
    }

    #[test]
    fn preprocess_pairs() {
        let r = preprocess_chain(0.5, 4).unwrap();
        assert!(abs(r.total_information - 3.0) < 1e-12);
        let r = preprocess_chain(0.3, 2).unwrap();
        assert!(abs(r.total_information - r.enumerated_information.unwrap()) < 1e-10);
        let r = preprocess_chain(0.25, 3).unwrap();
        assert!(r.residuals().unwrap().iter().all(|&d| d <= 1e-12));
    }
}
