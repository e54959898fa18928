//! Independent checks: privacy and consistency residuals of a mapping,
//! exact-rational vertex enumeration and a brute-force capacity.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::engine::DisclosureMapping;
use crate::geometry::ConstraintMatrix;
use crate::math::{abs, binomial, next_combination};
use crate::prob::{for_each_tuple, independence_residual, shannon_entropy, Channel, DiscreteScenario, Pmf};
use crate::{Error, Result};

pub type Rational = BigRational;

/// Largest support handled by [`exact_extreme_points`].
pub const EXACT_SUPPORT_BUDGET: usize = 24;
/// Largest support handled by [`brute_force_capacity`].
pub const BRUTE_FORCE_SUPPORT_BUDGET: usize = 8;
/// Largest nullity handled by [`brute_force_capacity`].
pub const BRUTE_FORCE_NULLITY_BUDGET: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    /// `ℓ1` distance of `p_{Y,X_i}` (or `p_{Y,G_k}`) from the product of its
    /// marginals, per protected variable.
    pub per_sample_tv: Vec<f64>,
    /// `max_x |Σ_y p_Y(y) p_{X^n|y}(x) - p_{X^n}(x)|`.
    pub marginal_preservation_error: f64,
    /// `max |P_{Y|X^n} - diag(p_Y) P_{X^n|Y}^T diag(p_{X^n})^{-1}|`.
    pub markov_consistency_error: f64,
    pub passed: bool,
}

/// Checks `mapping` against the sample indicators of `scenario`.
pub fn verify_mapping(scenario: &DiscreteScenario, mapping: &DisclosureMapping, tol: f64) -> Result<VerificationResult> {
    let channels: Vec<Channel> = (0..scenario.n_samples()).map(|i| scenario.sample_indicator(i)).collect();
    verify_mapping_against(scenario, mapping, &channels, tol)
}

/// Checks `mapping` against arbitrary protected channels on the support.
pub fn verify_mapping_against(
    scenario: &DiscreteScenario,
    mapping: &DisclosureMapping,
    protected: &[Channel],
    tol: f64,
) -> Result<VerificationResult> {
    let nx = scenario.support_size();
    let forward = mapping.cond_y_given_dataset();
    let reverse = mapping.cond_dataset_given_y();
    if forward.inputs() != nx || reverse.outputs() != nx {
        return Err(Error::DimensionMismatch(format!(
            "mapping over {} outcomes, scenario support has {nx}",
            forward.inputs()
        )));
    }
    if let Some(g) = protected.iter().find(|g| g.inputs() != nx) {
        return Err(Error::DimensionMismatch(format!(
            "protected channel over {} outcomes, support has {nx}",
            g.inputs()
        )));
    }
    let px = scenario.p_dataset().probs();
    let ny = forward.outputs();
    // Joint p(y, x) from the forward description alone.
    let joint: Vec<Vec<f64>> = (0..ny)
        .map(|y| (0..nx).map(|x| forward.get(y, x) * px[x]).collect())
        .collect();
    let per_sample_tv = protected
        .iter()
        .map(|g| independence_residual(&joint.iter().map(|row| g.apply(row)).collect::<Vec<_>>()))
        .collect::<Vec<_>>();
    let py = mapping.p_y().probs();
    let mut marginal: f64 = 0.0;
    for (x, &p) in px.iter().enumerate() {
        let mix: f64 = py.iter().enumerate().map(|(y, q)| q * reverse.get(x, y)).sum();
        marginal = marginal.max(abs(mix - p));
    }
    let mut markov: f64 = 0.0;
    for (y, &q) in py.iter().enumerate() {
        for (x, &p) in px.iter().enumerate() {
            markov = markov.max(abs(forward.get(y, x) - q * reverse.get(x, y) / p));
        }
    }
    let passed = per_sample_tv.iter().all(|&d| d <= tol) && marginal <= tol && markov <= tol;
    Ok(VerificationResult {
        per_sample_tv,
        marginal_preservation_error: marginal,
        markov_consistency_error: markov,
        passed,
    })
}

/// Converts a finite float to the rational it represents exactly.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("{v} is not finite")))
}

pub fn rational_to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// A scenario with exact rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactScenario {
    pub sample_alphabets: Vec<usize>,
    pub support: Vec<Vec<usize>>,
    pub p_dataset: Vec<Rational>,
    /// `latent[w][x]`, `P(W = w | X^n = support[x])`.
    pub latent: Vec<Vec<Rational>>,
}

fn sums_to_one(v: impl Iterator<Item = Rational>) -> bool {
    v.fold(Rational::zero(), |a, b| a + b).is_one()
}

impl ExactScenario {
    pub fn new(
        sample_alphabets: Vec<usize>,
        support: Vec<Vec<usize>>,
        p_dataset: Vec<Rational>,
        latent: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if p_dataset.iter().any(|p| !p.is_positive()) || !sums_to_one(p_dataset.iter().cloned()) {
            return Err(Error::InvalidPmf("exact dataset law must be positive and sum to 1".into()));
        }
        if latent.is_empty() || latent.iter().any(|r| r.len() != p_dataset.len()) {
            return Err(Error::DimensionMismatch("latent rows must cover the support".into()));
        }
        for x in 0..p_dataset.len() {
            if latent.iter().any(|r| r[x].is_negative()) || !sums_to_one(latent.iter().map(|r| r[x].clone())) {
                return Err(Error::InvalidChannel(format!("latent column {x} is not a pmf")));
            }
        }
        let s = ExactScenario {
            sample_alphabets,
            support,
            p_dataset,
            latent,
        };
        s.to_float()?;
        Ok(s)
    }

    /// `W ~ p_w`, sample `i` drawn through `channels[i]` given as rows
    /// `[x][w]`. Zero-probability dataset outcomes are dropped.
    pub fn observation(p_w: &[Rational], channels: &[Vec<Vec<Rational>>]) -> Result<Self> {
        let nw = p_w.len();
        if channels.is_empty() || channels.iter().any(|c| c.is_empty() || c.iter().any(|r| r.len() != nw)) {
            return Err(Error::DimensionMismatch("observation channels must have |W| columns".into()));
        }
        if !sums_to_one(p_w.iter().cloned()) || p_w.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidPmf("exact p_w must sum to 1".into()));
        }
        let alphabets: Vec<usize> = channels.iter().map(|c| c.len()).collect();
        let mut support = Vec::new();
        let mut px = Vec::new();
        let mut cols: Vec<Vec<Rational>> = Vec::new();
        for_each_tuple(&alphabets, |x| {
            let joint: Vec<Rational> = (0..nw)
                .map(|w| {
                    x.iter()
                        .zip(channels)
                        .fold(p_w[w].clone(), |acc, (&xi, c)| acc * &c[xi][w])
                })
                .collect();
            let m = joint.iter().fold(Rational::zero(), |a, b| a + b);
            if m.is_positive() {
                cols.push(joint.iter().map(|j| j / &m).collect());
                support.push(x.to_vec());
                px.push(m);
            }
        });
        let latent = (0..nw).map(|w| cols.iter().map(|c| c[w].clone()).collect()).collect();
        ExactScenario::new(alphabets, support, px, latent)
    }

    /// The exact rational image of a floating scenario.
    pub fn from_float(s: &DiscreteScenario) -> Result<Self> {
        let p = s
            .p_dataset()
            .probs()
            .iter()
            .map(|&v| rational_from_f64(v))
            .collect::<Result<Vec<_>>>()?;
        let latent = (0..s.latent_alphabet())
            .map(|w| s.latent_channel().row(w).iter().map(|&v| rational_from_f64(v)).collect())
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactScenario {
            sample_alphabets: s.sample_alphabets().to_vec(),
            support: s.support().to_vec(),
            p_dataset: p,
            latent,
        })
    }

    pub fn to_float(&self) -> Result<DiscreteScenario> {
        let p = Pmf::normalized(self.p_dataset.iter().map(rational_to_f64).collect(), 1e-12)?;
        let cols: Vec<Vec<f64>> = (0..self.p_dataset.len())
            .map(|x| self.latent.iter().map(|r| rational_to_f64(&r[x])).collect())
            .collect();
        let latent = crate::prob::columns_to_channel(&cols)?;
        DiscreteScenario::new(self.sample_alphabets.clone(), self.support.clone(), p, latent)
    }

    /// Exact sample-indicator constraint rows.
    pub fn constraint_rows(&self) -> Vec<Vec<Rational>> {
        let mut rows = Vec::new();
        for (i, &a) in self.sample_alphabets.iter().enumerate() {
            for v in 0..a {
                rows.push(
                    self.support
                        .iter()
                        .map(|x| if x[i] == v { Rational::one() } else { Rational::zero() })
                        .collect(),
                );
            }
        }
        rows
    }

    fn entropy_of_latent(&self, t: &[Rational]) -> f64 {
        let pw: Vec<f64> = self
            .latent
            .iter()
            .map(|r| rational_to_f64(&r.iter().zip(t).fold(Rational::zero(), |a, (l, v)| a + l * v)))
            .collect();
        let s: f64 = pw.iter().sum();
        shannon_entropy(&pw.iter().map(|v| v / s).collect::<Vec<_>>())
    }

    pub fn entropy_w(&self) -> f64 {
        self.entropy_of_latent(&self.p_dataset)
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut Vec<Vec<Rational>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][c].recip();
        m[row].iter_mut().for_each(|v| *v *= &inv);
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[c].is_zero() {
                let f = other[c].clone();
                other.iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= &f * q);
            }
        }
        pivots.push(c);
        row += 1;
    }
    m.truncate(row.max(pivots.len()));
    pivots
}

/// The unique solution of `a x = b` (`a` is `m x s`), if there is one.
fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let s = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let pivots = rref(&mut m, s + 1);
    if pivots.len() != s || pivots.contains(&s) {
        return None;
    }
    Some((0..s).map(|i| m[i][s].clone()).collect())
}

/// Exact vertices of `{ t >= 0 : P t = P p }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExtremePoints {
    pub points: Vec<Vec<Rational>>,
    pub rank: usize,
}

impl ExactExtremePoints {
    pub fn to_float(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.iter().map(rational_to_f64).collect()).collect()
    }
}

/// Vertex enumeration by exact row reduction of `P`, independent of the
/// floating SVD path.
pub fn exact_extreme_points(p: &ConstraintMatrix, p_dataset: &[Rational]) -> Result<ExactExtremePoints> {
    let rows = p
        .rows()
        .iter()
        .map(|r| r.iter().map(|&v| rational_from_f64(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    exact_extreme_points_of_rows(rows, p_dataset)
}

/// [`exact_extreme_points`] for constraint rows given exactly.
pub fn exact_extreme_points_of_rows(mut rows: Vec<Vec<Rational>>, p_dataset: &[Rational]) -> Result<ExactExtremePoints> {
    let n = p_dataset.len();
    if n > EXACT_SUPPORT_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{n} support points exceed the exact budget of {EXACT_SUPPORT_BUDGET}"
        )));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("constraint rows must cover the support".into()));
    }
    let rank = rref(&mut rows, n).len();
    rows.truncate(rank);
    let b: Vec<Rational> = rows
        .iter()
        .map(|r| r.iter().zip(p_dataset).fold(Rational::zero(), |a, (x, y)| a + x * y))
        .collect();
    let mut found = BTreeSet::new();
    let mut idx: Vec<usize> = (0..rank).collect();
    loop {
        let sub: Vec<Vec<Rational>> = rows.iter().map(|r| idx.iter().map(|&c| r[c].clone()).collect()).collect();
        if let Some(x) = solve_unique(&sub, &b) {
            if x.iter().all(|v| !v.is_negative()) {
                let mut t = vec![Rational::zero(); n];
                for (&c, v) in idx.iter().zip(x) {
                    t[c] = v;
                }
                found.insert(t);
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    Ok(ExactExtremePoints {
        points: found.into_iter().collect(),
        rank,
    })
}

/// Capacity by exhaustive search over vertex subsets of size at most
/// `min(max_y, nullity + 1)`, each weighted exactly to reproduce the dataset
/// law. Entropies are evaluated in floating point.
pub fn brute_force_capacity(scenario: &ExactScenario, max_y: usize) -> Result<f64> {
    let n = scenario.p_dataset.len();
    if n > BRUTE_FORCE_SUPPORT_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{n} support points exceed the brute-force budget of {BRUTE_FORCE_SUPPORT_BUDGET}"
        )));
    }
    let vertices = exact_extreme_points_of_rows(scenario.constraint_rows(), &scenario.p_dataset)?;
    let nullity = n - vertices.rank;
    if nullity > BRUTE_FORCE_NULLITY_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "nullity {nullity} exceeds the brute-force budget of {BRUTE_FORCE_NULLITY_BUDGET}"
        )));
    }
    let costs: Vec<f64> = vertices.points.iter().map(|v| scenario.entropy_of_latent(v)).collect();
    let k = vertices.points.len();
    let limit = max_y.min(nullity + 1).min(k);
    if binomial(k, limit) > 50_000_000 {
        return Err(Error::BudgetExceeded(format!("{k} vertices are too many to search")));
    }
    let mut best = f64::INFINITY;
    for size in 1..=limit {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let a: Vec<Vec<Rational>> = (0..n)
                .map(|x| idx.iter().map(|&v| vertices.points[v][x].clone()).collect())
                .collect();
            if let Some(w) = solve_unique(&a, &scenario.p_dataset) {
                if w.iter().all(|v| !v.is_negative()) {
                    let cost: f64 = w.iter().zip(&idx).map(|(wi, &v)| rational_to_f64(wi) * costs[v]).sum();
                    best = best.min(cost);
                }
            }
            if !next_combination(&mut idx, k) {
                break;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::InfeasibleLp("no vertex subset reproduces the dataset law".into()));
    }
    Ok((scenario.entropy_w() - best).max(0.0))
}

/// [`brute_force_capacity`] on the exact image of a floating scenario.
pub fn brute_force_capacity_float(scenario: &DiscreteScenario, max_y: usize) -> Result<f64> {
    brute_force_capacity(&ExactScenario::from_float(scenario)?, max_y)
}
