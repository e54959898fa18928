//! Two-phase revised simplex for `min c·x  s.t.  A x = b, x >= 0`.
//!
//! The basis matrix is refactorized from the original data at every
//! iteration, so rounding does not accumulate across pivots. Bland's rule
//! picks both the entering column and the leaving row, which guarantees
//! termination on degenerate problems. Linearly dependent equality rows are
//! detected at the end of phase one and dropped.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math::abs;
use crate::{Error, Result};

/// Reduced costs within this of zero count as zero.
pub const REDUCED_COST_TOL: f64 = 1e-9;
const ENTER_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-9;

/// An optimal basic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Basic columns, one per non-redundant row.
    pub basis: Vec<usize>,
    /// Some nonbasic column has a reduced cost within [`REDUCED_COST_TOL`] of
    /// zero, so other optimal vertices may exist.
    pub alternative_optimum: bool,
    pub redundant_rows: usize,
    pub pivots: usize,
}

/// Equality system with `n` structural columns followed by one artificial
/// column per original row.
struct Problem {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// Original row index of each active row.
    origin: Vec<usize>,
    n: usize,
}

impl Problem {
    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.n {
            DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r[j]))
        } else {
            let art = j - self.n;
            DVector::from_iterator(self.rows.len(), self.origin.iter().map(|&o| if o == art { 1.0 } else { 0.0 }))
        }
    }

    fn basis_matrix(&self, basis: &[usize]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut bm = DMatrix::zeros(m, m);
        for (c, &j) in basis.iter().enumerate() {
            bm.set_column(c, &self.column(j));
        }
        bm
    }
}

struct Factor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factor {
    fn new(bm: DMatrix<f64>) -> Result<Self> {
        let lu_t = bm.transpose().lu();
        let lu = bm.lu();
        if !lu.is_invertible() {
            return Err(Error::InfeasibleLp("singular basis".into()));
        }
        Ok(Factor { lu, lu_t })
    }

    fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(v).ok_or_else(|| Error::InfeasibleLp("singular basis".into()))
    }

    fn solve_t(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu_t.solve(v).ok_or_else(|| Error::InfeasibleLp("singular basis".into()))
    }
}

struct State {
    basis: Vec<usize>,
    pivots: usize,
}

/// Reduced costs of the columns `0..allowed` for the current basis.
fn reduced_costs(p: &Problem, f: &Factor, basis: &[usize], cost: &[f64], allowed: usize) -> Result<Vec<f64>> {
    let cb = DVector::from_iterator(basis.len(), basis.iter().map(|&j| cost[j]));
    let y = f.solve_t(&cb)?;
    Ok((0..allowed)
        .map(|j| {
            let col = if j < p.n {
                p.rows.iter().zip(y.iter()).map(|(r, yi)| r[j] * yi).sum::<f64>()
            } else {
                p.origin.iter().zip(y.iter()).filter(|(o, _)| **o == j - p.n).map(|(_, yi)| *yi).sum()
            };
            cost[j] - col
        })
        .collect())
}

/// Bland's-rule iterations over columns `0..allowed`; returns the final
/// reduced costs.
fn optimize(p: &Problem, st: &mut State, cost: &[f64], allowed: usize, max_pivots: usize) -> Result<Vec<f64>> {
    loop {
        let f = Factor::new(p.basis_matrix(&st.basis))?;
        let d = reduced_costs(p, &f, &st.basis, cost, allowed)?;
        let Some(enter) = (0..allowed).find(|&j| d[j] < -ENTER_TOL && !st.basis.contains(&j)) else {
            return Ok(d);
        };
        let xb = f.solve(&DVector::from_column_slice(&p.b))?;
        let dir = f.solve(&p.column(enter))?;
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..st.basis.len() {
            if dir[i] > PIVOT_TOL {
                let ratio = xb[i].max(0.0) / dir[i];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr || (ratio == lr && st.basis[i] < st.basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::InfeasibleLp("objective unbounded below".into()));
        };
        if st.pivots >= max_pivots {
            return Err(Error::InfeasibleLp(format!("no convergence after {max_pivots} pivots")));
        }
        st.basis[row] = enter;
        st.pivots += 1;
    }
}

/// Solves `min c·x` subject to `A x = b`, `x >= 0` where `a` holds the rows
/// of `A`.
pub fn solve_standard_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) || n == 0 || m == 0 {
        return Err(Error::DimensionMismatch("LP data has inconsistent shape".into()));
    }
    let mut p = Problem {
        rows: a
            .iter()
            .zip(b)
            .map(|(r, &bi)| if bi < 0.0 { r.iter().map(|v| -v).collect() } else { r.clone() })
            .collect(),
        b: b.iter().map(|v| abs(*v)).collect(),
        origin: (0..m).collect(),
        n,
    };
    let mut st = State {
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    let max_pivots = 50 * (n + m) + 1000;

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    optimize(&p, &mut st, &phase1, n + m, max_pivots)?;
    let f = Factor::new(p.basis_matrix(&st.basis))?;
    let xb = f.solve(&DVector::from_column_slice(&p.b))?;
    let infeas: f64 = (0..m).filter(|&i| st.basis[i] >= n).map(|i| xb[i].max(0.0)).sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(abs(*v)));
    if infeas > PHASE1_TOL * scale {
        return Err(Error::InfeasibleLp(format!("phase one residual {infeas:e}")));
    }

    // Drive the remaining artificials out; a row where that is impossible is
    // a combination of the others and is dropped.
    let mut redundant = 0;
    while let Some(i) = (0..st.basis.len()).find(|&i| st.basis[i] >= n) {
        let f = Factor::new(p.basis_matrix(&st.basis))?;
        let mut e = DVector::zeros(st.basis.len());
        e[i] = 1.0;
        let r = f.solve_t(&e)?;
        let best = (0..n)
            .filter(|j| !st.basis.contains(j))
            .map(|j| (j, abs(p.rows.iter().zip(r.iter()).map(|(row, ri)| row[j] * ri).sum::<f64>())))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .filter(|&(_, v)| v > DRIVE_OUT_TOL);
        match best {
            Some((j, _)) => {
                st.basis[i] = j;
                st.pivots += 1;
            }
            None => {
                let art = st.basis[i] - n;
                let row = p.origin.iter().position(|&o| o == art).expect("artificial row is active");
                p.rows.remove(row);
                p.b.remove(row);
                p.origin.remove(row);
                st.basis.remove(i);
                redundant += 1;
            }
        }
    }

    let mut cost = c.to_vec();
    cost.extend(core::iter::repeat_n(0.0, m));
    let d = optimize(&p, &mut st, &cost, n, max_pivots)?;

    let f = Factor::new(p.basis_matrix(&st.basis))?;
    let xb = f.solve(&DVector::from_column_slice(&p.b))?;
    let mut x = vec![0.0; n];
    for (i, &bj) in st.basis.iter().enumerate() {
        x[bj] = xb[i].max(0.0);
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let alternative_optimum = (0..n).any(|j| !st.basis.contains(&j) && abs(d[j]) <= REDUCED_COST_TOL);
    Ok(LpSolution {
        x,
        objective,
        basis: st.basis,
        alternative_optimum,
        redundant_rows: redundant,
        pivots: st.pivots,
    })
}
