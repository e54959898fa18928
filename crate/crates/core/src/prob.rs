//! Discrete probability primitives: pmfs, channels, entropies, mutual
//! informations and the dataset/latent-feature scenario.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, xlogx};
use crate::{Error, Result};

/// Tolerance on `sum(p) = 1` when constructing a [`Pmf`] or [`Channel`].
pub const PMF_TOL: f64 = 1e-12;
/// Tolerance used when validating joint tables passed to the information
/// functions.
pub const JOINT_TOL: f64 = 1e-9;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::check(&probs, PMF_TOL)?;
        Ok(Pmf { probs })
    }

    /// Accepts `probs` when its sum is within `tol` of one and divides by the
    /// sum. This is the only place renormalization happens.
    pub fn normalized(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        Self::check(&probs, tol)?;
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= s);
        Ok(Pmf { probs })
    }

    fn check(probs: &[f64], tol: f64) -> Result<()> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        let s: f64 = probs.iter().sum();
        if abs(s - 1.0) > tol {
            return Err(Error::InvalidPmf(format!("entries sum to {s}")));
        }
        Ok(())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform pmf over an empty alphabet");
        Pmf {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Pmf { probs }
    }

    pub fn bernoulli(p_one: f64) -> Result<Self> {
        Pmf::new(vec![1.0 - p_one, p_one])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A conditional law `P_{B|A}` stored as a `|B| x |A|` matrix whose columns
/// are pmfs.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    outputs: usize,
    inputs: usize,
    // row-major, data[o * inputs + i] = P(o | i)
    data: Vec<f64>,
}

impl Channel {
    pub fn new(outputs: usize, inputs: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(outputs, inputs, data, PMF_TOL)
    }

    pub(crate) fn with_tolerance(
        outputs: usize,
        inputs: usize,
        data: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        if outputs == 0 || inputs == 0 || data.len() != outputs * inputs {
            return Err(Error::InvalidChannel(format!(
                "{} entries for a {outputs}x{inputs} channel",
                data.len()
            )));
        }
        if data.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidChannel("negative or non-finite entry".into()));
        }
        for i in 0..inputs {
            let s: f64 = (0..outputs).map(|o| data[o * inputs + i]).sum();
            if abs(s - 1.0) > tol {
                return Err(Error::InvalidChannel(format!("column {i} sums to {s}")));
            }
        }
        Ok(Channel {
            outputs,
            inputs,
            data,
        })
    }

    /// Builds a channel from its rows (`rows[o][i] = P(o | i)`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let outputs = rows.len();
        let inputs = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::InvalidChannel("ragged rows".into()));
        }
        Self::new(outputs, inputs, rows.concat())
    }

    /// Builds a channel from its columns (`cols[i][o] = P(o | i)`).
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let inputs = cols.len();
        let outputs = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != outputs) {
            return Err(Error::InvalidChannel("ragged columns".into()));
        }
        let mut data = vec![0.0; outputs * inputs];
        for (i, c) in cols.iter().enumerate() {
            for (o, v) in c.iter().enumerate() {
                data[o * inputs + i] = *v;
            }
        }
        Self::new(outputs, inputs, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Channel {
            outputs: n,
            inputs: n,
            data,
        }
    }

    /// Deterministic channel `o = f(i)`.
    pub fn deterministic(outputs: usize, map: &[usize]) -> Result<Self> {
        let inputs = map.len();
        let mut data = vec![0.0; outputs * inputs];
        for (i, &o) in map.iter().enumerate() {
            if o >= outputs {
                return Err(Error::InvalidChannel(format!("output {o} out of range")));
            }
            data[o * inputs + i] = 1.0;
        }
        Self::new(outputs, inputs, data)
    }

    /// Binary symmetric channel with crossover `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::from_rows(&[vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    /// Binary erasure channel; outputs are ordered `0, erasure, 1`.
    pub fn bec(e: f64) -> Result<Self> {
        Self::from_rows(&[vec![1.0 - e, 0.0], vec![e, e], vec![0.0, 1.0 - e]])
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    #[inline]
    pub fn get(&self, output: usize, input: usize) -> f64 {
        self.data[output * self.inputs + input]
    }

    pub fn row(&self, output: usize) -> &[f64] {
        &self.data[output * self.inputs..(output + 1) * self.inputs]
    }

    pub fn column(&self, input: usize) -> Vec<f64> {
        (0..self.outputs).map(|o| self.get(o, input)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.outputs).map(|o| self.row(o).to_vec()).collect()
    }

    /// `P · v`, i.e. the output law when the input law is `v` (for pmf
    /// inputs), or the image of any vector under the matrix.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.inputs);
        (0..self.outputs)
            .map(|o| self.row(o).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Composition `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if inner.outputs != self.inputs {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-input channel after {}-output channel",
                self.inputs, inner.outputs
            )));
        }
        let mut data = vec![0.0; self.outputs * inner.inputs];
        for o in 0..self.outputs {
            for i in 0..inner.inputs {
                data[o * inner.inputs + i] =
                    (0..self.inputs).map(|m| self.get(o, m) * inner.get(m, i)).sum();
            }
        }
        Channel::with_tolerance(self.outputs, inner.inputs, data, 1e-9)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Entropy in bits of a nonnegative vector, `0 log 0 = 0`. No validation.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| xlogx(p)).sum()
}

/// Entropy of a pmf in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.entropy()
}

/// `H(p)` in bits, or in nats when `base2` is false.
pub fn entropy_in(p: &Pmf, base2: bool) -> f64 {
    let h = p.entropy();
    if base2 {
        h
    } else {
        h * core::f64::consts::LN_2
    }
}

/// Binary entropy function `h_b(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    xlogx(p) + xlogx(1.0 - p)
}

pub(crate) fn validate_table<'a>(entries: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut s = 0.0;
    for &e in entries {
        if !e.is_finite() || e < 0.0 {
            return Err(Error::InvalidJoint(format!("entry {e}")));
        }
        s += e;
    }
    if abs(s - 1.0) > JOINT_TOL {
        return Err(Error::InvalidJoint(format!("entries sum to {s}")));
    }
    Ok(())
}

fn check_rect<T>(rows: &[Vec<T>]) -> Result<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidJoint("empty or ragged table".into()));
    }
    Ok(cols)
}

/// `I(A;B)` in bits for a joint table `joint[a][b]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    check_rect(joint)?;
    validate_table(joint.iter().flatten())?;
    Ok(mutual_information_unchecked(joint))
}

pub(crate) fn mutual_information_unchecked(joint: &[Vec<f64>]) -> f64 {
    let cols = joint[0].len();
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let pb: Vec<f64> = (0..cols).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let hab: f64 = joint.iter().flatten().map(|&p| xlogx(p)).sum();
    let mi = shannon_entropy(&pa) + shannon_entropy(&pb) - hab;
    if mi < 0.0 {
        0.0
    } else {
        mi
    }
}

/// `I(A;B|C)` in bits for a joint table `joint[a][b][c]`.
pub fn conditional_mutual_information(joint: &[Vec<Vec<f64>>]) -> Result<f64> {
    let nb = check_rect(joint)?;
    let nc = joint[0][0].len();
    if nc == 0 || joint.iter().flatten().any(|v| v.len() != nc) {
        return Err(Error::InvalidJoint("ragged third axis".into()));
    }
    validate_table(joint.iter().flatten().flatten())?;
    let mut total = 0.0;
    for c in 0..nc {
        let pc: f64 = joint.iter().flatten().map(|v| v[c]).sum();
        if pc <= 0.0 {
            continue;
        }
        let slice: Vec<Vec<f64>> = joint
            .iter()
            .map(|ra| (0..nb).map(|b| ra[b][c] / pc).collect())
            .collect();
        total += pc * mutual_information_unchecked(&slice);
    }
    Ok(total)
}

/// `ℓ1` distance between a joint table and the product of its marginals.
/// Zero exactly when the two coordinates are independent.
pub fn independence_residual(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, |r| r.len());
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let pb: Vec<f64> = (0..cols).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let mut d = 0.0;
    for (a, row) in joint.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            d += abs(v - pa[a] * pb[b]);
        }
    }
    d
}

/// Calls `f` on every tuple of the product alphabet, first coordinate most
/// significant.
pub fn for_each_tuple(alphabets: &[usize], mut f: impl FnMut(&[usize])) {
    if alphabets.contains(&0) {
        return;
    }
    let mut t = vec![0usize; alphabets.len()];
    loop {
        f(&t);
        let mut i = alphabets.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < alphabets[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Joint law of a latent feature `W` and a dataset `X^n`, restricted to the
/// support of `X^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScenario {
    sample_alphabets: Vec<usize>,
    support: Vec<Vec<usize>>,
    p_dataset: Pmf,
    latent_channel: Channel,
}

impl DiscreteScenario {
    pub fn new(
        sample_alphabets: Vec<usize>,
        support: Vec<Vec<usize>>,
        p_dataset: Pmf,
        latent_channel: Channel,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if sample_alphabets.is_empty() || sample_alphabets.contains(&0) {
            return Err(Error::InvalidParameter("sample alphabets must be nonempty".into()));
        }
        if p_dataset.alphabet_size() != support.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support points but a pmf over {}",
                support.len(),
                p_dataset.alphabet_size()
            )));
        }
        if latent_channel.inputs() != support.len() {
            return Err(Error::DimensionMismatch(format!(
                "latent channel has {} inputs for {} support points",
                latent_channel.inputs(),
                support.len()
            )));
        }
        for x in &support {
            if x.len() != sample_alphabets.len()
                || x.iter().zip(&sample_alphabets).any(|(v, a)| v >= a)
            {
                return Err(Error::InvalidParameter(format!(
                    "support tuple {x:?} outside the product alphabet"
                )));
            }
        }
        let mut sorted = support.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::InvalidParameter("repeated support tuple".into()));
        }
        if p_dataset.probs().iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidParameter(
                "dataset probabilities must be strictly positive on the support".into(),
            ));
        }
        Ok(DiscreteScenario {
            sample_alphabets,
            support,
            p_dataset,
            latent_channel,
        })
    }

    /// Builds a scenario from the joint pmf `p_wx[w][x]` over the full
    /// product alphabet (tuples in lexicographic order). Dataset outcomes of
    /// exactly zero probability are dropped.
    pub fn from_joint(sample_alphabets: Vec<usize>, p_wx: &[Vec<f64>]) -> Result<Self> {
        let total: usize = sample_alphabets.iter().product();
        if p_wx.is_empty() || p_wx.iter().any(|r| r.len() != total) {
            return Err(Error::DimensionMismatch(format!(
                "joint rows must have {total} entries"
            )));
        }
        validate_table(p_wx.iter().flatten())?;
        let nw = p_wx.len();
        let mut support = Vec::new();
        let mut px = Vec::new();
        let mut cols = Vec::new();
        let mut flat = 0usize;
        for_each_tuple(&sample_alphabets, |x| {
            let m: f64 = (0..nw).map(|w| p_wx[w][flat]).sum();
            if m > 0.0 {
                support.push(x.to_vec());
                px.push(m);
                cols.push((0..nw).map(|w| p_wx[w][flat] / m).collect::<Vec<_>>());
            }
            flat += 1;
        });
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let p = Pmf::normalized(px, JOINT_TOL)?;
        let latent = columns_to_channel(&cols)?;
        DiscreteScenario::new(sample_alphabets, support, p, latent)
    }

    pub fn sample_alphabets(&self) -> &[usize] {
        &self.sample_alphabets
    }

    pub fn n_samples(&self) -> usize {
        self.sample_alphabets.len()
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn p_dataset(&self) -> &Pmf {
        &self.p_dataset
    }

    pub fn latent_channel(&self) -> &Channel {
        &self.latent_channel
    }

    pub fn latent_alphabet(&self) -> usize {
        self.latent_channel.outputs()
    }

    /// Same dataset with a different `P_{W|X^n}`.
    pub fn with_latent(&self, latent_channel: Channel) -> Result<Self> {
        DiscreteScenario::new(
            self.sample_alphabets.clone(),
            self.support.clone(),
            self.p_dataset.clone(),
            latent_channel,
        )
    }

    /// The self-disclosure scenario `W = X^n`.
    pub fn self_scenario(&self) -> Self {
        DiscreteScenario {
            latent_channel: Channel::identity(self.support.len()),
            ..self.clone()
        }
    }

    pub fn p_w(&self) -> Vec<f64> {
        self.latent_channel.apply(self.p_dataset.probs())
    }

    pub fn entropy_w(&self) -> f64 {
        shannon_entropy(&self.p_w())
    }

    pub fn entropy_dataset(&self) -> f64 {
        self.p_dataset.entropy()
    }

    /// Marginal law of sample `i` over its full alphabet.
    pub fn sample_marginal(&self, i: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.sample_alphabets[i]];
        for (x, p) in self.support.iter().zip(self.p_dataset.probs()) {
            m[x[i]] += p;
        }
        m
    }

    /// `P_{X_i | X^n}` as a 0/1 channel over the support.
    pub fn sample_indicator(&self, i: usize) -> Channel {
        let map: Vec<usize> = self.support.iter().map(|x| x[i]).collect();
        Channel::deterministic(self.sample_alphabets[i], &map)
            .expect("support tuples lie inside the alphabet")
    }

    /// Indicator channel of a group of coordinates, the output being the
    /// mixed-radix index of the sub-tuple.
    pub fn window_indicator(&self, coords: &[usize]) -> Channel {
        let size: usize = coords.iter().map(|&c| self.sample_alphabets[c]).product();
        let map: Vec<usize> = self
            .support
            .iter()
            .map(|x| {
                coords
                    .iter()
                    .fold(0, |acc, &c| acc * self.sample_alphabets[c] + x[c])
            })
            .collect();
        Channel::deterministic(size, &map).expect("window index inside range")
    }

    /// `I(W; X^n)`.
    pub fn mutual_information_w_dataset(&self) -> f64 {
        let hw = self.entropy_w();
        let cond: f64 = self
            .p_dataset
            .probs()
            .iter()
            .enumerate()
            .map(|(x, p)| p * shannon_entropy(&self.latent_channel.column(x)))
            .sum();
        let mi = hw - cond;
        if mi < 0.0 {
            0.0
        } else {
            mi
        }
    }

    /// Joint table `p(w, x_{-j}, x_j)` used for `I(W; X_{-j} | X_j)`.
    pub fn joint_w_rest_given_sample(&self, j: usize) -> Vec<Vec<Vec<f64>>> {
        let rest: Vec<usize> = (0..self.n_samples()).filter(|&i| i != j).collect();
        let rest_size: usize = rest.iter().map(|&i| self.sample_alphabets[i]).product();
        let nw = self.latent_alphabet();
        let mut t = vec![vec![vec![0.0; self.sample_alphabets[j]]; rest_size]; nw];
        for (k, (x, p)) in self.support.iter().zip(self.p_dataset.probs()).enumerate() {
            let r = rest
                .iter()
                .fold(0, |acc, &i| acc * self.sample_alphabets[i] + x[i]);
            for (w, row) in t.iter_mut().enumerate() {
                row[r][x[j]] += p * self.latent_channel.get(w, k);
            }
        }
        t
    }
}

/// Channel from computed columns, renormalizing each column after checking it
/// sums to one within `JOINT_TOL`.
pub(crate) fn columns_to_channel(cols: &[Vec<f64>]) -> Result<Channel> {
    let inputs = cols.len();
    let outputs = cols.first().map_or(0, |c| c.len());
    let mut data = vec![0.0; outputs * inputs];
    for (i, c) in cols.iter().enumerate() {
        let s: f64 = c.iter().sum();
        if abs(s - 1.0) > JOINT_TOL {
            return Err(Error::InvalidChannel(format!("column {i} sums to {s}")));
        }
        for (o, v) in c.iter().enumerate() {
            data[o * inputs + i] = if *v < 0.0 { 0.0 } else { v / s };
        }
    }
    Channel::with_tolerance(outputs, inputs, data, JOINT_TOL)
}

/// Dataset of observations of `W`, sample `i` drawn through `channels[i]`
/// (each `|X_i| x |W|`) conditionally independently given `W`.
pub fn observation_scenario(p_w: &Pmf, channels: &[Channel]) -> Result<DiscreteScenario> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let nw = p_w.alphabet_size();
    if let Some(c) = channels.iter().find(|c| c.inputs() != nw) {
        return Err(Error::DimensionMismatch(format!(
            "observation channel has {} inputs but |W| = {nw}",
            c.inputs()
        )));
    }
    let alphabets: Vec<usize> = channels.iter().map(|c| c.outputs()).collect();
    let mut support = Vec::new();
    let mut px = Vec::new();
    let mut cols = Vec::new();
    for_each_tuple(&alphabets, |x| {
        let joint: Vec<f64> = (0..nw)
            .map(|w| {
                p_w.probs()[w]
                    * x.iter()
                        .zip(channels)
                        .map(|(&xi, c)| c.get(xi, w))
                        .product::<f64>()
            })
            .collect();
        let m: f64 = joint.iter().sum();
        if m > 0.0 {
            support.push(x.to_vec());
            px.push(m);
            cols.push(joint.iter().map(|j| j / m).collect::<Vec<_>>());
        }
    });
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let p = Pmf::normalized(px, JOINT_TOL)?;
    let latent = columns_to_channel(&cols)?;
    DiscreteScenario::new(alphabets, support, p, latent)
}

/// `n` samples, i.i.d. through `obs` (`|X| x |W|`) given `W ~ p_w`.
pub fn build_observation_scenario(p_w: &Pmf, obs: &Channel, n: usize) -> Result<DiscreteScenario> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    observation_scenario(p_w, &vec![obs.clone(); n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Pmf::new(vec![0.5, 0.5]).unwrap()), 1.0);
        assert_eq!(entropy(&Pmf::new(vec![1.0, 0.0]).unwrap()), 0.0);
        let h = entropy(&Pmf::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap());
        // -(1/3)log2(1/3) - (2/3)log2(2/3) = log2 3 - 2/3
        assert!(close(h, 0.918_295_834_054_489_6, 1e-12));
        assert!(close(h, 0.9183, 5e-5));
    }

    #[test]
    fn pmf_rejects_bad_input() {
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::normalized(vec![0.5, 0.5 + 1e-10], 1e-9).is_ok());
        assert!(Pmf::normalized(vec![0.5, 0.6], 1e-9).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = vec![vec![0.06, 0.14], vec![0.24, 0.56]];
        assert!(mutual_information(&prod).unwrap() < 1e-12);
        let ident = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert!(close(mutual_information(&ident).unwrap(), 1.0, 1e-12));
        // (X1 xor X2, X1) for fair coins: all four pairs equally likely.
        let mut xor = vec![vec![0.0; 2]; 2];
        for x1 in 0..2 {
            for x2 in 0..2 {
                xor[x1 ^ x2][x1] += 0.25;
            }
        }
        assert!(mutual_information(&xor).unwrap() < 1e-12);
        assert!(mutual_information(&[vec![0.5, -0.1], vec![0.6, 0.0]]).is_err());
        assert!(mutual_information(&[vec![0.5, 0.1]]).is_err());
    }

    #[test]
    fn conditional_mutual_information_modular_sum() {
        for m in [2usize, 3, 5] {
            // joint[w][x2][x1]
            let mut t = vec![vec![vec![0.0; m]; m]; m];
            for x1 in 0..m {
                for x2 in 0..m {
                    t[(x1 + x2) % m][x2][x1] += 1.0 / (m * m) as f64;
                }
            }
            let cmi = conditional_mutual_information(&t).unwrap();
            assert!(close(cmi, libm::log2(m as f64), 1e-12), "M={m}: {cmi}");
        }
        let indep = vec![vec![vec![0.125; 2]; 2]; 2];
        assert!(conditional_mutual_information(&indep).unwrap() < 1e-12);
    }

    #[test]
    fn observation_scenario_examples() {
        let s = build_observation_scenario(
            &Pmf::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
            &Channel::bsc(0.1).unwrap(),
            2,
        )
        .unwrap();
        // (2/3)(0.81) + (1/3)(0.01) and (2/3)(0.01) + (1/3)(0.81)
        assert_eq!(s.support()[0], vec![0, 0]);
        assert!(close(s.p_dataset().probs()[0], 0.543_333_333_333_333_3, 1e-12));
        assert!(close(s.p_dataset().probs()[3], 0.276_666_666_666_666_7, 1e-12));

        let noiseless =
            build_observation_scenario(&Pmf::new(vec![0.2, 0.3, 0.5]).unwrap(), &Channel::identity(3), 3)
                .unwrap();
        assert_eq!(noiseless.support_size(), 3);
        for k in 0..3 {
            let col = noiseless.latent_channel().column(k);
            assert!(col.iter().all(|&v| v == 0.0 || v == 1.0));
        }

        let bec = build_observation_scenario(&Pmf::uniform(2), &Channel::bec(0.5).unwrap(), 1).unwrap();
        let erasure = bec.support().iter().position(|x| x[0] == 1).unwrap();
        assert!(close(bec.p_dataset().probs()[erasure], 0.5, 1e-15));
    }

    #[test]
    fn scenario_validation() {
        let p = Pmf::uniform(2);
        let latent = Channel::identity(2);
        assert!(DiscreteScenario::new(vec![2], vec![vec![0], vec![0]], p.clone(), latent.clone()).is_err());
        assert!(DiscreteScenario::new(vec![2], vec![vec![0], vec![2]], p.clone(), latent.clone()).is_err());
        assert!(DiscreteScenario::new(vec![2], vec![], p.clone(), latent.clone()).is_err());
        assert!(DiscreteScenario::new(
            vec![2],
            vec![vec![0], vec![1]],
            Pmf::new(vec![1.0, 0.0]).unwrap(),
            latent
        )
        .is_err());
        assert!(observation_scenario(&p, &[Channel::identity(3)]).is_err());
    }

    #[test]
    fn upper_bound_table_matches_cmi_identity() {
        let s = build_observation_scenario(
            &Pmf::new(vec![0.3, 0.7]).unwrap(),
            &Channel::bsc(0.2).unwrap(),
            3,
        )
        .unwrap();
        let t = s.joint_w_rest_given_sample(1);
        let cmi = conditional_mutual_information(&t).unwrap();
        // I(W; X_{-j} | X_j) = I(W; X^n) - I(W; X_j)
        let single = build_observation_scenario(
            &Pmf::new(vec![0.3, 0.7]).unwrap(),
            &Channel::bsc(0.2).unwrap(),
            1,
        )
        .unwrap();
        let expected = s.mutual_information_w_dataset() - single.mutual_information_w_dataset();
        assert!(close(cmi, expected, 1e-12));
    }
}
