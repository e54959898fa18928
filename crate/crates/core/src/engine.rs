//! Optimal disclosure mappings: feasibility, bounds, the vertex LP and
//! mapping assembly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{
    build_constraint_matrix, enumerate_extreme_points, null_space_basis, subset_count,
    ConstraintSystem, DEFAULT_SV_TOL,
};
use crate::linalg;
use crate::math::{log2, max_abs};
use crate::prob::{
    columns_to_channel, conditional_mutual_information, independence_residual, shannon_entropy,
    Channel, DiscreteScenario, Pmf,
};
use crate::simplex::{solve_standard_form, LpSolution};
use crate::{Error, Result};

pub use crate::geometry::DEFAULT_CAP;

/// LP weights at or below this are treated as zero.
pub const ZERO_WEIGHT_TOL: f64 = 1e-10;
/// Threshold on `‖P_{W|X^n} v‖∞` for a unit null vector `v`.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Slack on `Σ_y p_y p_{X^n|y} = p_{X^n}`.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Capacities at or below this count as zero.
pub const CAPACITY_TOL: f64 = 1e-9;

/// A release mechanism `P_{Y|X^n}` with its reverse description.
#[derive(Debug, Clone, PartialEq)]
pub struct DisclosureMapping {
    p_y: Pmf,
    cond_dataset_given_y: Channel,
    cond_y_given_dataset: Channel,
}

impl DisclosureMapping {
    pub fn p_y(&self) -> &Pmf {
        &self.p_y
    }

    /// `P_{X^n|Y}`, column `y` is the conditional law of the dataset.
    pub fn cond_dataset_given_y(&self) -> &Channel {
        &self.cond_dataset_given_y
    }

    /// `P_{Y|X^n}`, the mechanism itself.
    pub fn cond_y_given_dataset(&self) -> &Channel {
        &self.cond_y_given_dataset
    }

    pub fn y_cardinality(&self) -> usize {
        self.p_y.alphabet_size()
    }

    /// Builds the mapping from a forward channel `P_{Y|X^n}`. Outputs that
    /// never occur are dropped.
    pub fn from_forward(p_dataset: &Pmf, forward: &Channel) -> Result<Self> {
        if forward.inputs() != p_dataset.alphabet_size() {
            return Err(Error::DimensionMismatch(format!(
                "mechanism has {} inputs, dataset support has {}",
                forward.inputs(),
                p_dataset.alphabet_size()
            )));
        }
        let px = p_dataset.probs();
        let py = forward.apply(px);
        let mut vertices = Vec::new();
        let mut weights = Vec::new();
        for (y, &m) in py.iter().enumerate() {
            if m > 0.0 {
                let col: Vec<f64> = px.iter().enumerate().map(|(x, p)| forward.get(y, x) * p / m).collect();
                vertices.push(Pmf::normalized(col, MARGINAL_TOL)?);
                weights.push(m);
            }
        }
        assemble_mapping(&vertices, &weights, p_dataset)
    }

    /// `p(y, x)` indexed `[y][x]`.
    pub fn joint(&self) -> Vec<Vec<f64>> {
        let py = self.p_y.probs();
        (0..py.len())
            .map(|y| self.cond_dataset_given_y.column(y).iter().map(|v| v * py[y]).collect())
            .collect()
    }

    /// `I(W; Y)` when the mapping is applied to `scenario`.
    pub fn information(&self, scenario: &DiscreteScenario) -> f64 {
        let py = self.p_y.probs();
        let lost: f64 = (0..py.len())
            .map(|y| {
                let col = self.cond_dataset_given_y.column(y);
                py[y] * shannon_entropy(&scenario.latent_channel().apply(&col))
            })
            .sum();
        (scenario.entropy_w() - lost).max(0.0)
    }

    /// `ℓ1` distance of `p_{Y,G}` from `p_Y p_G` for each protected channel
    /// `G = channels[k]`.
    pub fn residuals_against(&self, channels: &[Channel]) -> Vec<f64> {
        let joint = self.joint();
        channels
            .iter()
            .map(|g| {
                let t: Vec<Vec<f64>> = joint.iter().map(|row| g.apply(row)).collect();
                independence_residual(&t)
            })
            .collect()
    }

    /// Per-sample residuals `TV(p_{Y,X_i}, p_Y p_{X_i})`.
    pub fn residuals(&self, scenario: &DiscreteScenario) -> Vec<f64> {
        let channels: Vec<Channel> = (0..scenario.n_samples()).map(|i| scenario.sample_indicator(i)).collect();
        self.residuals_against(&channels)
    }
}

/// Builds a mapping from conditional laws `vertices[l] = p_{X^n|y=l}` and
/// weights `p_Y`. Weights at or below [`ZERO_WEIGHT_TOL`] are dropped.
pub fn assemble_mapping(vertices: &[Pmf], weights: &[f64], p_dataset: &Pmf) -> Result<DisclosureMapping> {
    if vertices.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices but {} weights",
            vertices.len(),
            weights.len()
        )));
    }
    let nx = p_dataset.alphabet_size();
    if let Some(v) = vertices.iter().find(|v| v.alphabet_size() != nx) {
        return Err(Error::DimensionMismatch(format!(
            "vertex over {} outcomes, dataset over {nx}",
            v.alphabet_size()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidParameter(format!("weight {w} is not nonnegative")));
    }
    let kept: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > ZERO_WEIGHT_TOL).collect();
    if kept.is_empty() {
        return Err(Error::InvalidParameter("all weights are zero".into()));
    }
    let px = p_dataset.probs();
    let mut mix = vec![0.0; nx];
    for &k in &kept {
        for (m, v) in mix.iter_mut().zip(vertices[k].probs()) {
            *m += weights[k] * v;
        }
    }
    let dev = max_abs(mix.iter().zip(px).map(|(a, b)| a - b));
    if dev > MARGINAL_TOL {
        return Err(Error::InvalidParameter(format!(
            "weighted vertices miss the dataset law by {dev:e}"
        )));
    }
    let p_y = Pmf::normalized(kept.iter().map(|&k| weights[k]).collect(), MARGINAL_TOL)?;
    let reverse_cols: Vec<Vec<f64>> = kept.iter().map(|&k| vertices[k].probs().to_vec()).collect();
    let cond_dataset_given_y = columns_to_channel(&reverse_cols)?;
    let forward_cols: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            p_y.probs()
                .iter()
                .zip(&reverse_cols)
                .map(|(py, col)| py * col[x] / mix[x])
                .collect()
        })
        .collect();
    let cond_y_given_dataset = columns_to_channel(&forward_cols)?;
    Ok(DisclosureMapping {
        p_y,
        cond_dataset_given_y,
        cond_y_given_dataset,
    })
}

/// Outcome of [`solve_capacity`].
#[derive(Debug, Clone, PartialEq)]
pub struct DisclosureReport {
    /// `I_s(W, X^n)` in bits.
    pub capacity: f64,
    /// `min_u Σ_k u_k H(P_{W|X^n} p_k)`.
    pub lp_optimum: f64,
    pub entropy_w: f64,
    pub mapping: DisclosureMapping,
    pub upper_bound: f64,
    /// Whether a positive capacity is possible at all.
    pub feasible: bool,
    pub y_cardinality: usize,
    /// One weight per entry of `vertices`.
    pub lp_weights: Vec<f64>,
    pub vertices: Vec<Pmf>,
    /// Independence residual of `Y` against each protected variable.
    pub residuals: Vec<f64>,
    pub alternative_optimum: bool,
    pub rank: usize,
    pub nullity: usize,
}

fn default_channels(scenario: &DiscreteScenario) -> Vec<Channel> {
    (0..scenario.n_samples()).map(|i| scenario.sample_indicator(i)).collect()
}

fn feasible_in(scenario: &DiscreteScenario, sys: &ConstraintSystem) -> bool {
    let latent = scenario.latent_channel();
    sys.null_basis()
        .iter()
        .any(|v| max_abs(latent.apply(v)) > FEASIBILITY_TOL)
}

/// True iff some `Y` independent of every sample carries information about
/// `W`, i.e. `Null(P) ⊄ Null(P_{W|X^n})`.
pub fn check_feasibility(scenario: &DiscreteScenario) -> bool {
    check_feasibility_with(scenario, &[]).unwrap_or(false)
}

/// [`check_feasibility`] against custom protected channels (empty: samples).
pub fn check_feasibility_with(scenario: &DiscreteScenario, protected: &[Channel]) -> Result<bool> {
    let p = build_constraint_matrix(scenario, protected)?;
    Ok(feasible_in(scenario, &null_space_basis(&p, DEFAULT_SV_TOL)))
}

/// `min_j I(W; X_{-j} | X_j)`, an upper bound on the capacity.
pub fn disclosure_upper_bound(scenario: &DiscreteScenario) -> f64 {
    (0..scenario.n_samples())
        .map(|j| {
            conditional_mutual_information(&scenario.joint_w_rest_given_sample(j))
                .expect("scenario tables are valid")
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(feature = "parallel")]
fn vertex_costs(latent: &Channel, vertices: &[Pmf]) -> Vec<f64> {
    use rayon::prelude::*;
    vertices
        .par_iter()
        .map(|v| shannon_entropy(&latent.apply(v.probs())))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn vertex_costs(latent: &Channel, vertices: &[Pmf]) -> Vec<f64> {
    vertices
        .iter()
        .map(|v| shannon_entropy(&latent.apply(v.probs())))
        .collect()
}

/// The LP `min c·u, [p_k] u = p, u >= 0` posed in null-space coordinates:
/// `Σ u_k = 1` and `Σ u_k N^T (p_k - p) = 0`. Every vertex already satisfies
/// the row-space part, so these `nullity + 1` rows are the independent ones.
fn vertex_lp(null_basis: &[Vec<f64>], vertices: &[Pmf], p: &Pmf, costs: &[f64]) -> Result<LpSolution> {
    let mut a = Vec::with_capacity(null_basis.len() + 1);
    a.push(vec![1.0; vertices.len()]);
    for v in null_basis {
        a.push(
            vertices
                .iter()
                .map(|t| t.probs().iter().zip(p.probs()).zip(v).map(|((ti, pi), vi)| (ti - pi) * vi).sum())
                .collect(),
        );
    }
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0;
    solve_standard_form(&a, &b, costs)
}

/// Re-fits the weights of the retained vertices by least squares so the
/// mixture matches `p` to rounding; falls back to the LP weights when the
/// fit leaves the nonnegative orthant.
fn refit_weights(vertices: &[Pmf], keep: &[usize], lp: &[f64], p: &Pmf) -> Vec<f64> {
    let rows = p.alphabet_size();
    let cols = keep.len();
    let mut a = vec![0.0; rows * cols];
    for (j, &k) in keep.iter().enumerate() {
        for (i, v) in vertices[k].probs().iter().enumerate() {
            a[i * cols + j] = *v;
        }
    }
    let (x, rank) = linalg::least_squares(rows, cols, &a, p.probs(), 1e-12);
    let lp_kept: Vec<f64> = keep.iter().map(|&k| lp[k]).collect();
    if rank == cols && x.iter().all(|&w| w > 0.0) && max_abs(x.iter().zip(&lp_kept).map(|(a, b)| a - b)) < 1e-6 {
        x
    } else {
        lp_kept
    }
}

/// Solves the capacity LP over all vertices of the admissible polytope.
///
/// `protected` replaces the sample indicators by arbitrary channels on the
/// support. Fails with [`Error::TruncatedEnumeration`] when more than `cap`
/// column subsets would have to be examined.
pub fn solve_capacity(
    scenario: &DiscreteScenario,
    protected: Option<&[Channel]>,
    cap: u64,
) -> Result<DisclosureReport> {
    let channels = match protected {
        Some(c) if !c.is_empty() => c.to_vec(),
        _ => default_channels(scenario),
    };
    let p = build_constraint_matrix(scenario, &channels)?;
    let sys = null_space_basis(&p, DEFAULT_SV_TOL);
    solve_with_system(scenario, &channels, protected.is_none(), &sys, cap)
}

fn solve_with_system(
    scenario: &DiscreteScenario,
    channels: &[Channel],
    samples_protected: bool,
    sys: &ConstraintSystem,
    cap: u64,
) -> Result<DisclosureReport> {
    let subsets = subset_count(sys);
    if subsets > cap as u128 {
        return Err(Error::TruncatedEnumeration { subsets, cap });
    }
    let pts = enumerate_extreme_points(sys, scenario.p_dataset(), cap);
    if pts.is_empty() {
        return Err(Error::InfeasibleLp("no vertex found; the polytope should contain p_dataset".into()));
    }
    let latent = scenario.latent_channel();
    let costs = vertex_costs(latent, &pts.points);
    let lp = vertex_lp(sys.null_basis(), &pts.points, scenario.p_dataset(), &costs)?;
    let keep: Vec<usize> = (0..lp.x.len()).filter(|&k| lp.x[k] > ZERO_WEIGHT_TOL).collect();
    let refit = refit_weights(&pts.points, &keep, &lp.x, scenario.p_dataset());
    let kept_vertices: Vec<Pmf> = keep.iter().map(|&k| pts.points[k].clone()).collect();
    let mapping = assemble_mapping(&kept_vertices, &refit, scenario.p_dataset())?;
    let entropy_w = scenario.entropy_w();
    let capacity = (entropy_w - lp.objective).max(0.0);
    let upper_bound = if samples_protected {
        disclosure_upper_bound(scenario)
    } else {
        scenario.mutual_information_w_dataset()
    };
    let residuals = mapping.residuals_against(channels);
    let mut lp_weights = vec![0.0; pts.len()];
    for (&k, w) in keep.iter().zip(&refit) {
        lp_weights[k] = *w;
    }
    Ok(DisclosureReport {
        capacity,
        lp_optimum: lp.objective,
        entropy_w,
        y_cardinality: mapping.y_cardinality(),
        mapping,
        upper_bound,
        feasible: feasible_in(scenario, sys),
        lp_weights,
        vertices: pts.points,
        residuals,
        alternative_optimum: lp.alternative_optimum,
        rank: sys.rank(),
        nullity: sys.nullity(),
    })
}

/// Self-disclosure: the capacity with `W = X^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDisclosure {
    pub report: DisclosureReport,
    /// `Î_s / H(X^n)`.
    pub efficiency: f64,
    /// `1 - max_j H(X_j) / H(X^n)`, an upper bound on the efficiency.
    pub efficiency_bound: f64,
}

pub fn self_disclosure(scenario: &DiscreteScenario, cap: u64) -> Result<SelfDisclosure> {
    let s = scenario.self_scenario();
    let report = solve_capacity(&s, None, cap)?;
    let h = s.entropy_dataset();
    let hmax = (0..s.n_samples())
        .map(|j| shannon_entropy(&s.sample_marginal(j)))
        .fold(0.0, f64::max);
    let (efficiency, efficiency_bound) = if h > 0.0 {
        (report.capacity / h, 1.0 - hmax / h)
    } else {
        (0.0, 0.0)
    };
    Ok(SelfDisclosure {
        report,
        efficiency,
        efficiency_bound,
    })
}

/// The two bounds on `H(X^n | Y)` under an optimal self-disclosure mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEntropyBound {
    /// `log2 rank(P)`.
    pub rank_bound: f64,
    /// `log2 min(Σ|X_i| - n + 1, |X̂|)`.
    pub alphabet_bound: f64,
    pub rank: usize,
}

pub fn conditional_entropy_bound(scenario: &DiscreteScenario) -> ConditionalEntropyBound {
    let p = build_constraint_matrix(scenario, &[]).expect("sample indicators match the support");
    let rank = null_space_basis(&p, DEFAULT_SV_TOL).rank();
    let sum: usize = scenario.sample_alphabets().iter().sum();
    let limit = (sum + 1 - scenario.n_samples()).min(scenario.support_size());
    let out = ConditionalEntropyBound {
        rank_bound: log2(rank as f64),
        alphabet_bound: log2(limit as f64),
        rank,
    };
    assert!(
        out.rank_bound <= out.alphabet_bound + 1e-12,
        "rank of the sample constraints exceeds its combinatorial limit"
    );
    out
}

/// `H(X^n | Y)` under `mapping`.
pub fn conditional_entropy_dataset(mapping: &DisclosureMapping) -> f64 {
    let py = mapping.p_y().probs();
    (0..py.len())
        .map(|y| py[y] * shannon_entropy(&mapping.cond_dataset_given_y().column(y)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;
    use crate::prob::{build_observation_scenario, observation_scenario};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    fn xor2() -> DiscreteScenario {
        let support = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let latent = Channel::deterministic(2, &[0, 1, 1, 0]).unwrap();
        DiscreteScenario::new(vec![2, 2], support, Pmf::uniform(4), latent).unwrap()
    }

    fn example1() -> DiscreteScenario {
        let bsc = Channel::bsc(2.0 / 3.0).unwrap();
        let bec = Channel::bec(0.5).unwrap();
        observation_scenario(&Pmf::uniform(2), &[bsc, bec]).unwrap()
    }

    #[test]
    fn xor_releases_one_bit() {
        let s = xor2();
        assert!(check_feasibility(&s));
        let r = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
        assert!(close(r.capacity, 1.0, 1e-9));
        assert!(close(r.upper_bound, 1.0, 1e-12));
        assert!(r.residuals.iter().all(|&d| d <= 1e-9));
        assert_eq!(r.y_cardinality, 2);
    }

    #[test]
    fn example1_capacity_and_weights() {
        let s = example1();
        let r = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
        assert!(close(r.capacity, 0.0134, 5e-5), "{}", r.capacity);
        assert!(close(r.lp_optimum, 0.9866, 5e-5));
        assert_eq!(r.vertices.len(), 4);
        assert_eq!(r.y_cardinality, 3);
        assert!(r.upper_bound >= r.capacity);
        let hy = conditional_entropy_bound(&s);
        assert_eq!(hy.rank, 4);
        assert!(close(hy.rank_bound, 2.0, 1e-12));
    }

    #[test]
    fn constant_latent_is_infeasible() {
        let s = xor2().with_latent(Channel::from_rows(&[vec![1.0; 4]]).unwrap()).unwrap();
        assert!(!check_feasibility(&s));
        let r = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
        assert!(r.capacity <= CAPACITY_TOL);
    }

    #[test]
    fn table1_n2() {
        let s = build_observation_scenario(
            &Pmf::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
            &Channel::bsc(0.1).unwrap(),
            2,
        )
        .unwrap();
        let r = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
        assert!(close(r.capacity, 8.34e-3, 5e-6), "{}", r.capacity);
    }

    #[test]
    fn truncation_is_an_error() {
        let s = example1();
        assert!(matches!(
            solve_capacity(&s, None, 5),
            Err(Error::TruncatedEnumeration { subsets: 15, cap: 5 })
        ));
    }

    #[test]
    fn self_disclosure_two_fair_bits() {
        let sd = self_disclosure(&xor2(), DEFAULT_CAP).unwrap();
        assert!(close(sd.report.capacity, 1.0, 1e-9));
        assert!(close(sd.efficiency, 0.5, 1e-9));
        assert!(close(sd.efficiency_bound, 0.5, 1e-12));
        let h = conditional_entropy_dataset(&sd.report.mapping);
        assert!(h <= conditional_entropy_bound(&xor2()).rank_bound + 1e-9);
    }

    #[test]
    fn single_vertex_gives_constant_output() {
        let p = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
        let m = assemble_mapping(core::slice::from_ref(&p), &[1.0], &p).unwrap();
        assert_eq!(m.y_cardinality(), 1);
        assert!(m.cond_y_given_dataset().row(0).iter().all(|&v| close(v, 1.0, 1e-12)));
    }

    #[test]
    fn assemble_rejects_bad_marginal() {
        let p = Pmf::new(vec![0.5, 0.5]).unwrap();
        let v = Pmf::new(vec![1.0, 0.0]).unwrap();
        assert!(assemble_mapping(core::slice::from_ref(&v), &[1.0], &p).is_err());
        assert!(assemble_mapping(&[v], &[0.5, 0.5], &p).is_err());
    }

    #[test]
    fn forward_round_trip() {
        let s = example1();
        let r = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
        let again = DisclosureMapping::from_forward(s.p_dataset(), r.mapping.cond_y_given_dataset()).unwrap();
        assert!(close(again.information(&s), r.capacity, 1e-9));
    }
}
