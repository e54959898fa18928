//! The privacy constraint matrix, its null space, and the vertices of the
//! admissible polytope `S = { t >= 0 : A t = A p }`.
//!
//! A conditional law `p_{X^n|y}` keeps `Y` independent of every protected
//! variable exactly when `p_{X^n} - p_{X^n|y}` lies in the null space of the
//! stacked protected channels `P`. Optimal mappings only mix vertices of `S`,
//! which are the basic feasible solutions of the standard-form system
//! `A t = b, t >= 0` with `A` an orthonormal basis of the row space of `P`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::math::{abs, binomial, max_abs, next_combination};
use crate::prob::{Channel, DiscreteScenario, Pmf};
use crate::{Error, Result};

/// Singular values at or below this fraction of the largest count as zero.
pub const DEFAULT_SV_TOL: f64 = 1e-10;
/// A basis submatrix `A_B` is skipped when `σ_min < BASIS_COND_TOL · σ_max`.
pub const BASIS_COND_TOL: f64 = 1e-10;
/// Nonnegativity / equality slack for basic solutions.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Two vertices closer than this in `ℓ∞` are the same vertex.
pub const DEDUP_TOL: f64 = 1e-8;
/// Default number of column subsets examined before giving up.
pub const DEFAULT_CAP: u64 = 2_000_000;

const SNAP_TOL: f64 = 1e-12;
const CHUNK: usize = 4096;

/// One protected variable's rows inside a [`ConstraintMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowBlock {
    pub protected: usize,
    pub height: usize,
}

/// The stacked protected channels `P` (`G x |support|`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    blocks: Vec<RowBlock>,
    binary: bool,
}

impl ConstraintMatrix {
    /// Wraps an explicit matrix, treated as a single block.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("empty or ragged constraint matrix".into()));
        }
        let data = rows.concat();
        let binary = data.iter().all(|&v| v == 0.0 || v == 1.0);
        Ok(ConstraintMatrix {
            rows: rows.len(),
            cols,
            data,
            blocks: vec![RowBlock {
                protected: 0,
                height: rows.len(),
            }],
            binary,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn blocks(&self) -> &[RowBlock] {
        &self.blocks
    }

    /// True when every entry is 0 or 1 (sample-indicator constraints).
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Stacks the protected channels of `scenario`. An empty `protected` list
/// means the `n` sample indicators `P_{X_i|X^n}`.
pub fn build_constraint_matrix(
    scenario: &DiscreteScenario,
    protected: &[Channel],
) -> Result<ConstraintMatrix> {
    let defaults;
    let channels: &[Channel] = if protected.is_empty() {
        defaults = (0..scenario.n_samples())
            .map(|i| scenario.sample_indicator(i))
            .collect::<Vec<_>>();
        &defaults
    } else {
        protected
    };
    let cols = scenario.support_size();
    if cols == 0 {
        return Err(Error::EmptySupport);
    }
    let mut data = Vec::new();
    let mut blocks = Vec::with_capacity(channels.len());
    for (k, ch) in channels.iter().enumerate() {
        if ch.inputs() != cols {
            return Err(Error::DimensionMismatch(format!(
                "protected channel {k} has {} inputs, support has {cols}",
                ch.inputs()
            )));
        }
        data.extend_from_slice(ch.data());
        blocks.push(RowBlock {
            protected: k,
            height: ch.outputs(),
        });
    }
    let binary = data.iter().all(|&v| v == 0.0 || v == 1.0);
    Ok(ConstraintMatrix {
        rows: data.len() / cols,
        cols,
        data,
        blocks,
        binary,
    })
}

/// Orthonormal row basis `A` of `P` together with a basis of `Null(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    a: Vec<f64>,
    cols: usize,
    rank: usize,
    null_basis: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
}

impl ConstraintSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    /// Row `i` of `A`.
    pub fn a_row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn null_basis(&self) -> &[Vec<f64>] {
        &self.null_basis
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `A · t`.
    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        (0..self.rank)
            .map(|i| self.a_row(i).iter().zip(t).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The right-hand side `b = A · p`.
    pub fn rhs(&self, p: &Pmf) -> Vec<f64> {
        self.apply(p.probs())
    }
}

/// SVD of `P`: `A` is the top-`rank` right singular vectors, the rest span
/// `Null(P)`. Singular values `<= sv_tol · σ_max` are treated as zero.
pub fn null_space_basis(p: &ConstraintMatrix, sv_tol: f64) -> ConstraintSystem {
    let (values, vectors) = linalg::right_singular(p.rows, p.cols, &p.data);
    let max = values.first().cloned().unwrap_or(0.0);
    let rank = values.iter().filter(|&&s| s > sv_tol * max).count();
    let a = vectors[..rank].concat();
    let null_basis = vectors[rank..].to_vec();
    ConstraintSystem {
        a,
        cols: p.cols,
        rank,
        null_basis,
        singular_values: values,
    }
}

/// Vertices of `S` found by basis enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePointSet {
    pub points: Vec<Pmf>,
    /// The first basis (sorted column indices) that produced each point.
    pub bases: Vec<Vec<usize>>,
    /// Set when the number of `rank`-subsets exceeded the cap; `points` is
    /// then only the part found in the examined subsets.
    pub truncated: bool,
    pub subsets_examined: u64,
}

impl ExtremePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of column subsets basis enumeration has to examine.
pub fn subset_count(sys: &ConstraintSystem) -> u128 {
    binomial(sys.cols, sys.rank)
}

fn evaluate_basis(sys: &ConstraintSystem, b: &[f64], basis: &[usize]) -> Option<Vec<f64>> {
    let r = sys.rank;
    let mut ab = Vec::with_capacity(r * r);
    for i in 0..r {
        let row = sys.a_row(i);
        ab.extend(basis.iter().map(|&c| row[c]));
    }
    let xb = linalg::solve_well_conditioned(r, &ab, b, BASIS_COND_TOL)?;
    if xb.iter().any(|&v| v < -FEASIBILITY_TOL) {
        return None;
    }
    let mut t = vec![0.0; sys.cols];
    for (&c, &v) in basis.iter().zip(&xb) {
        t[c] = if v < SNAP_TOL { 0.0 } else { v };
    }
    let resid = max_abs(sys.apply(&t).iter().zip(b).map(|(x, y)| x - y));
    if resid > FEASIBILITY_TOL {
        return None;
    }
    let s: f64 = t.iter().sum();
    if abs(s - 1.0) > FEASIBILITY_TOL {
        return None;
    }
    t.iter_mut().for_each(|v| *v /= s);
    Some(t)
}

#[cfg(feature = "parallel")]
fn evaluate_chunk(sys: &ConstraintSystem, b: &[f64], chunk: &[Vec<usize>]) -> Vec<Option<Vec<f64>>> {
    use rayon::prelude::*;
    chunk.par_iter().map(|basis| evaluate_basis(sys, b, basis)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_chunk(sys: &ConstraintSystem, b: &[f64], chunk: &[Vec<usize>]) -> Vec<Option<Vec<f64>>> {
    chunk.iter().map(|basis| evaluate_basis(sys, b, basis)).collect()
}

struct Dedup {
    buckets: BTreeMap<Vec<u64>, Vec<usize>>,
}

impl Dedup {
    fn key(t: &[f64]) -> Vec<u64> {
        let mut key = vec![0u64; t.len().div_ceil(64)];
        for (i, &v) in t.iter().enumerate() {
            if v > DEDUP_TOL {
                key[i / 64] |= 1 << (i % 64);
            }
        }
        key
    }

    /// Returns true when `t` is new, recording it under index `idx`.
    fn insert(&mut self, points: &[Pmf], t: &[f64], idx: usize) -> bool {
        let bucket = self.buckets.entry(Self::key(t)).or_default();
        let dup = bucket.iter().any(|&j| {
            max_abs(points[j].probs().iter().zip(t).map(|(a, b)| a - b)) <= DEDUP_TOL
        });
        if !dup {
            bucket.push(idx);
        }
        !dup
    }
}

/// Enumerates the vertices of `S = { t >= 0 : A t = A p }` by visiting the
/// `rank`-subsets of columns in lexicographic order. At most `cap` subsets
/// are examined; beyond that the result is flagged `truncated`.
pub fn enumerate_extreme_points(sys: &ConstraintSystem, p_dataset: &Pmf, cap: u64) -> ExtremePointSet {
    assert!(cap >= 1, "enumeration cap must be positive");
    let b = sys.rhs(p_dataset);
    let total = subset_count(sys);
    let truncated = total > cap as u128;
    if truncated {
        log::warn!(
            "{total} column subsets exceed the enumeration cap of {cap}; \
             the vertex set is partial, consider the heuristic mappings"
        );
    }
    let mut out = ExtremePointSet {
        points: Vec::new(),
        bases: Vec::new(),
        truncated,
        subsets_examined: 0,
    };
    let mut dedup = Dedup {
        buckets: BTreeMap::new(),
    };
    let r = sys.rank;
    let mut idx: Vec<usize> = (0..r).collect();
    let mut more = r <= sys.cols;
    let mut chunk: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
    while more && out.subsets_examined < cap {
        chunk.clear();
        while more && chunk.len() < CHUNK && out.subsets_examined < cap {
            chunk.push(idx.clone());
            out.subsets_examined += 1;
            more = next_combination(&mut idx, sys.cols);
        }
        for (basis, point) in chunk.iter().zip(evaluate_chunk(sys, &b, &chunk)) {
            if let Some(t) = point {
                if dedup.insert(&out.points, &t, out.points.len()) {
                    out.points.push(Pmf::normalized(t, FEASIBILITY_TOL).expect("normalized vertex"));
                    out.bases.push(basis.clone());
                }
            }
        }
    }
    out
}

/// Convenience: constraint matrix, SVD and vertex enumeration in one call.
pub fn extreme_points_of(
    scenario: &DiscreteScenario,
    protected: &[Channel],
    cap: u64,
) -> Result<(ConstraintMatrix, ConstraintSystem, ExtremePointSet)> {
    let p = build_constraint_matrix(scenario, protected)?;
    let sys = null_space_basis(&p, DEFAULT_SV_TOL);
    let pts = enumerate_extreme_points(&sys, scenario.p_dataset(), cap);
    Ok((p, sys, pts))
}
