//! Large-dataset behaviour: private information `C_X(W)`, the zero-leakage
//! endpoints `C_1(0)`, `C_2(0)`, the bridge quantity `J(W, X^n)` and
//! finite-`n` capacity scans.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{disclosure_upper_bound, solve_capacity};
use crate::math::max_abs;
use crate::prob::{
    build_observation_scenario, for_each_tuple, mutual_information_unchecked, shannon_entropy,
    validate_table, Channel, DiscreteScenario, Pmf,
};
use crate::{Error, Result};

/// Conditional columns `p_{X|W}(·|w)` closer than this are merged.
pub const GROUPING_TOL: f64 = 1e-10;

/// `W̃`: the symbols of `W` with identical conditional laws of `X` merged.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateInformationResult {
    /// `C_X(W) = H(W̃)`.
    pub c_x_w: f64,
    pub w_tilde_size: usize,
    /// `W` symbol to `W̃` symbol; `None` for symbols of zero mass.
    pub grouping: Vec<Option<usize>>,
    pub p_w_tilde: Pmf,
    /// `P_{X|W̃}`, `|X| x |W̃|`.
    pub channel_x_given_w_tilde: Channel,
    /// `I(X; W)`.
    pub mutual_information: f64,
    /// `H(W̃ | X)`.
    pub conditional_entropy: f64,
}

impl PrivateInformationResult {
    /// Joint `p(w̃, x)` indexed `[w̃][x]`.
    pub fn joint(&self) -> Vec<Vec<f64>> {
        self.p_w_tilde
            .probs()
            .iter()
            .enumerate()
            .map(|(g, p)| self.channel_x_given_w_tilde.column(g).iter().map(|c| c * p).collect())
            .collect()
    }
}

/// Groups the rows of `p_wx[w][x]` by their conditional law and reports
/// `H(W̃)`.
pub fn private_information(p_wx: &[Vec<f64>]) -> Result<PrivateInformationResult> {
    let nx = p_wx.first().map_or(0, |r| r.len());
    if nx == 0 || p_wx.iter().any(|r| r.len() != nx) {
        return Err(Error::InvalidJoint("empty or ragged joint".into()));
    }
    validate_table(p_wx.iter().flatten())?;
    let mut grouping = vec![None; p_wx.len()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for (w, row) in p_wx.iter().enumerate() {
        let m: f64 = row.iter().sum();
        if m <= 0.0 {
            continue;
        }
        let col: Vec<f64> = row.iter().map(|v| v / m).collect();
        let g = match columns
            .iter()
            .position(|c| max_abs(c.iter().zip(&col).map(|(a, b)| a - b)) <= GROUPING_TOL)
        {
            Some(g) => {
                let old = masses[g];
                columns[g].iter_mut().zip(&col).for_each(|(c, v)| *c = (*c * old + v * m) / (old + m));
                masses[g] += m;
                g
            }
            None => {
                columns.push(col);
                masses.push(m);
                columns.len() - 1
            }
        };
        grouping[w] = Some(g);
    }
    let p_w_tilde = Pmf::normalized(masses, 1e-9)?;
    let channel = Channel::from_columns(
        &columns
            .iter()
            .map(|c| {
                let s: f64 = c.iter().sum();
                c.iter().map(|v| v / s).collect()
            })
            .collect::<Vec<_>>(),
    )?;
    let c_x_w = p_w_tilde.entropy();
    let joint: Vec<Vec<f64>> = p_wx.to_vec();
    let mutual_information = mutual_information_unchecked(&joint);
    let px: Vec<f64> = (0..nx).map(|x| p_wx.iter().map(|r| r[x]).sum()).collect();
    let mut out = PrivateInformationResult {
        c_x_w,
        w_tilde_size: columns.len(),
        grouping,
        p_w_tilde,
        channel_x_given_w_tilde: channel,
        mutual_information,
        conditional_entropy: 0.0,
    };
    let jt = out.joint();
    let h_joint = shannon_entropy(&jt.concat());
    out.conditional_entropy = (h_joint - shannon_entropy(&px)).max(0.0);
    Ok(out)
}

/// Which zero-leakage endpoint to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageMode {
    /// `C_1(0)`: the release is computed from `W̃` alone.
    OutputPerturbation,
    /// `C_2(0)`: the release may use both `W̃` and `X`.
    FullData,
}

fn single_variable_scenario(p: &Pmf) -> Result<DiscreteScenario> {
    let n = p.alphabet_size();
    let keep: Vec<usize> = (0..n).filter(|&i| p.probs()[i] > 0.0).collect();
    DiscreteScenario::new(
        vec![n],
        keep.iter().map(|&i| vec![i]).collect(),
        Pmf::normalized(keep.iter().map(|&i| p.probs()[i]).collect(), 1e-9)?,
        Channel::identity(keep.len()),
    )
}

/// Scenario on `Z = (W̃, X_1, ..., X_n)` in `w̃`-major order with
/// `X_i | W̃` i.i.d. through `P_{X|W̃}` and target `W̃`. The protected
/// channels are the `n` sample indicators.
fn bridge_scenario(pi: &PrivateInformationResult, n: usize) -> Result<(DiscreteScenario, Vec<Channel>)> {
    let ng = pi.w_tilde_size;
    let nx = pi.channel_x_given_w_tilde.outputs();
    let mut alphabets = vec![nx; n + 1];
    alphabets[0] = ng;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for_each_tuple(&alphabets, |z| {
        let p = pi.p_w_tilde.probs()[z[0]]
            * z[1..]
                .iter()
                .map(|&x| pi.channel_x_given_w_tilde.get(x, z[0]))
                .product::<f64>();
        if p > 0.0 {
            support.push(z.to_vec());
            probs.push(p);
        }
    });
    let map: Vec<usize> = support.iter().map(|z| z[0]).collect();
    let latent = Channel::deterministic(ng, &map)?;
    let scenario = DiscreteScenario::new(alphabets, support, Pmf::normalized(probs, 1e-9)?, latent)?;
    let protected = (1..=n).map(|i| scenario.sample_indicator(i)).collect();
    Ok((scenario, protected))
}

/// `C_1(0)` or `C_2(0)` for the joint `p_wx[w][x]`.
pub fn c_alpha_zero(p_wx: &[Vec<f64>], mode: LeakageMode, cap: u64) -> Result<f64> {
    let pi = private_information(p_wx)?;
    if pi.w_tilde_size == 1 {
        return Ok(0.0);
    }
    match mode {
        LeakageMode::OutputPerturbation => {
            let scenario = single_variable_scenario(&pi.p_w_tilde)?;
            let protected = [pi.channel_x_given_w_tilde.clone()];
            Ok(solve_capacity(&scenario, Some(&protected), cap)?.capacity)
        }
        LeakageMode::FullData => {
            let (scenario, protected) = bridge_scenario(&pi, 1)?;
            Ok(solve_capacity(&scenario, Some(&protected), cap)?.capacity)
        }
    }
}

fn observation_joint(p_w: &Pmf, obs: &Channel) -> Result<Vec<Vec<f64>>> {
    if obs.inputs() != p_w.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "observation channel has {} inputs, |W| = {}",
            obs.inputs(),
            p_w.alphabet_size()
        )));
    }
    Ok(p_w
        .probs()
        .iter()
        .enumerate()
        .map(|(w, p)| obs.column(w).iter().map(|c| c * p).collect())
        .collect())
}

/// `J(W, X^n)`: the best `I(W̃; Y)` when `Y` may depend on `(W̃, X^n)` but
/// must be independent of every `X_i`.
pub fn j_value(p_w: &Pmf, obs: &Channel, n: usize, cap: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let pi = private_information(&observation_joint(p_w, obs)?)?;
    if pi.w_tilde_size == 1 {
        return Ok(0.0);
    }
    let (scenario, protected) = bridge_scenario(&pi, n)?;
    Ok(solve_capacity(&scenario, Some(&protected), cap)?.capacity)
}

/// One row of a [`capacity_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    /// `I(W; X^n)`.
    pub mutual_information: f64,
    /// `I_s(W, X^n)`, `None` once the enumeration cap is exceeded.
    pub capacity: Option<f64>,
    /// `min_j I(W; X_{-j} | X_j)`.
    pub upper_bound: f64,
    pub vertices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityScan {
    pub rows: Vec<ScanRow>,
    /// `C_X(W)`.
    pub private_information: f64,
    /// `C_1(0)`, `None` when it exceeded the cap.
    pub c1_zero: Option<f64>,
    /// First `n` whose capacity could not be computed.
    pub truncated_at: Option<usize>,
}

/// `I(W; X^n)` and `I_s(W, X^n)` for `n = 1..=n_max` with `X_i` i.i.d.
/// through `obs` given `W ~ p_w`.
pub fn capacity_scan(p_w: &Pmf, obs: &Channel, n_max: usize, cap: u64) -> Result<CapacityScan> {
    let joint = observation_joint(p_w, obs)?;
    let pi = private_information(&joint)?;
    let c1_zero = match c_alpha_zero(&joint, LeakageMode::OutputPerturbation, cap) {
        Ok(v) => Some(v),
        Err(Error::TruncatedEnumeration { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut rows = Vec::with_capacity(n_max);
    let mut truncated_at = None;
    for n in 1..=n_max {
        let scenario = build_observation_scenario(p_w, obs, n)?;
        let (capacity, vertices) = if truncated_at.is_some() {
            (None, None)
        } else {
            match solve_capacity(&scenario, None, cap) {
                Ok(r) => (Some(r.capacity), Some(r.vertices.len())),
                Err(Error::TruncatedEnumeration { subsets, cap }) => {
                    log::warn!("scan stops solving at n={n}: {subsets} subsets exceed cap {cap}");
                    truncated_at = Some(n);
                    (None, None)
                }
                Err(e) => return Err(e),
            }
        };
        rows.push(ScanRow {
            n,
            mutual_information: scenario.mutual_information_w_dataset(),
            capacity,
            upper_bound: disclosure_upper_bound(&scenario),
            vertices,
        });
    }
    Ok(CapacityScan {
        rows,
        private_information: pi.c_x_w,
        c1_zero,
        truncated_at,
    })
}
