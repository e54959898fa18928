//! Subcommand bodies. Each returns human-readable text, an optional table
//! and whether every check passed.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sampleprivacy_core::asymptotics::{c_alpha_zero, capacity_scan, j_value, LeakageMode};
use sampleprivacy_core::closed_form::{two_binary_solve, TwoBinaryParams};
use sampleprivacy_core::engine::{self_disclosure, solve_capacity, DisclosureMapping, DisclosureReport};
use sampleprivacy_core::heuristics::{partial_processing, preprocess_chain, HeuristicReport};
use sampleprivacy_core::oracle::{
    brute_force_capacity, exact_extreme_points_of_rows, rational_to_f64, verify_mapping, ExactScenario, Rational,
    VerificationResult, BRUTE_FORCE_SUPPORT_BUDGET,
};
use sampleprivacy_core::prob::{build_observation_scenario, observation_scenario};
use sampleprivacy_core::{Channel, DiscreteScenario, Error, Pmf};

use crate::table::{int, sig10, Table};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub cap: u64,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub table: Option<Table>,
    pub passed: bool,
}

fn floats(v: &[Rational]) -> Vec<f64> {
    v.iter().map(rational_to_f64).collect()
}

fn float_rows(m: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| floats(r)).collect()
}

/// `P_{Y|X^n}` as a table: one row per output symbol.
pub fn mapping_table(scenario: &DiscreteScenario, mapping: &DisclosureMapping) -> Table {
    let labels: Vec<String> = scenario
        .support()
        .iter()
        .map(|x| format!("x={}", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("")))
        .collect();
    let mut header = vec!["y", "p_y"];
    header.extend(labels.iter().map(String::as_str));
    let mut t = Table::new(&header);
    let forward = mapping.cond_y_given_dataset();
    for y in 0..mapping.y_cardinality() {
        let mut row = vec![int(y), sig10(mapping.p_y().probs()[y])];
        row.extend(forward.row(y).iter().map(|&v| sig10(v)));
        t.push(row);
    }
    t
}

fn describe_verification(out: &mut String, v: &VerificationResult, tol: f64) {
    let tv: Vec<String> = v.per_sample_tv.iter().map(|d| format!("{d:.3e}")).collect();
    let _ = writeln!(out, "per-sample residuals: [{}]", tv.join(", "));
    let _ = writeln!(out, "marginal preservation error: {:.3e}", v.marginal_preservation_error);
    let _ = writeln!(out, "consistency error: {:.3e}", v.markov_consistency_error);
    let _ = writeln!(
        out,
        "verification (tol {tol:e}): {}",
        if v.passed { "passed" } else { "FAILED" }
    );
}

fn describe_report(out: &mut String, rep: &DisclosureReport) {
    if rep.feasible {
        let _ = writeln!(out, "I_s = {:.4} bits", rep.capacity);
    } else {
        let _ = writeln!(
            out,
            "I_s = 0 bits, infeasible: no sample-private output can depend on W"
        );
    }
    let _ = writeln!(out, "capacity: {}", sig10(rep.capacity));
    let _ = writeln!(out, "H(W): {}", sig10(rep.entropy_w));
    let _ = writeln!(out, "upper bound: {}", sig10(rep.upper_bound));
    let _ = writeln!(out, "rank: {}, nullity: {}", rep.rank, rep.nullity);
    let _ = writeln!(out, "extreme points: {}", rep.vertices.len());
    let _ = writeln!(out, "|Y|: {}", rep.y_cardinality);
    if rep.alternative_optimum {
        let _ = writeln!(out, "note: the optimum is not unique");
    }
}

fn solved(scenario: &DiscreteScenario, rep: &DisclosureReport, opts: &Options) -> Result<Outcome> {
    let mut text = String::new();
    describe_report(&mut text, rep);
    let table = mapping_table(scenario, &rep.mapping);
    let _ = write!(text, "P(Y|X^n):\n{}", table.to_csv_string()?);
    let v = verify_mapping(scenario, &rep.mapping, opts.tol)?;
    describe_verification(&mut text, &v, opts.tol);
    Ok(Outcome {
        text,
        table: Some(table),
        passed: v.passed,
    })
}

fn truncation_context(e: Error) -> anyhow::Error {
    match e {
        Error::TruncatedEnumeration { subsets, cap } => anyhow::anyhow!(
            "vertex enumeration needs {subsets} column subsets, above the cap of {cap}; raise --cap or use a heuristic"
        ),
        other => other.into(),
    }
}

pub fn solve(scenario: &DiscreteScenario, opts: &Options) -> Result<Outcome> {
    let rep = solve_capacity(scenario, None, opts.cap).map_err(truncation_context)?;
    solved(scenario, &rep, opts)
}

pub fn self_capacity(scenario: &DiscreteScenario, opts: &Options) -> Result<Outcome> {
    let sd = self_disclosure(scenario, opts.cap).map_err(truncation_context)?;
    let s = scenario.self_scenario();
    let mut out = solved(&s, &sd.report, opts)?;
    out.text = format!(
        "self-disclosure efficiency: {} (bound {})\n{}",
        sig10(sd.efficiency),
        sig10(sd.efficiency_bound),
        out.text
    );
    Ok(out)
}

/// Solves, verifies, and cross-checks against the exact oracle when the
/// scenario is small enough.
pub fn verify(exact: &ExactScenario, opts: &Options) -> Result<Outcome> {
    let scenario = exact.to_float()?;
    let mut out = solve(&scenario, opts)?;
    let rep = solve_capacity(&scenario, None, opts.cap)?;
    if exact.p_dataset.len() <= BRUTE_FORCE_SUPPORT_BUDGET {
        match brute_force_capacity(exact, usize::MAX) {
            Ok(bf) => {
                let gap = (bf - rep.capacity).abs();
                let ok = gap <= 1e-6;
                let _ = writeln!(
                    out.text,
                    "brute-force oracle: {} (gap {gap:.3e}) {}",
                    sig10(bf),
                    if ok { "agrees" } else { "DISAGREES" }
                );
                out.passed &= ok;
            }
            Err(Error::BudgetExceeded(msg)) => {
                let _ = writeln!(out.text, "brute-force oracle skipped: {msg}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    match exact_extreme_points_of_rows(exact.constraint_rows(), &exact.p_dataset) {
        Ok(v) => {
            let exact_pts = v.to_float();
            let float_pts: Vec<Vec<f64>> = rep.vertices.iter().map(|p| p.probs().to_vec()).collect();
            let close = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-8);
            let ok = exact_pts.len() == float_pts.len()
                && exact_pts.iter().all(|a| float_pts.iter().any(|b| close(a, b)));
            let _ = writeln!(
                out.text,
                "exact vertices: {} {}",
                exact_pts.len(),
                if ok { "match" } else { "DO NOT MATCH" }
            );
            out.passed &= ok;
        }
        Err(Error::BudgetExceeded(msg)) => {
            let _ = writeln!(out.text, "exact vertices skipped: {msg}");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

fn xor_latent() -> Channel {
    Channel::deterministic(2, &[0, 1, 1, 0]).expect("static channel")
}

pub fn two_binary(alpha: f64, beta: f64, r: f64, latent: Option<&[Vec<f64>]>, opts: &Options) -> Result<Outcome> {
    let params = TwoBinaryParams::new(alpha, beta, r)?;
    let latent = match latent {
        Some(rows) => Channel::from_rows(rows).context("latent channel rows must have four columns summing to 1")?,
        None => xor_latent(),
    };
    let closed = two_binary_solve(&params, &latent)?;
    let scenario = params.scenario(&latent)?;
    let lp = solve_capacity(&scenario, None, opts.cap)?;
    let gap = (closed.capacity - lp.capacity).abs();
    let mut out = solved(&scenario, &closed, opts)?;
    let _ = writeln!(out.text, "linear program: {} (gap {gap:.3e})", sig10(lp.capacity));
    out.passed &= gap <= 1e-8;
    Ok(out)
}

pub fn scan(p_w: &[Rational], channel: &[Vec<Rational>], n_max: usize, opts: &Options) -> Result<Outcome> {
    let p_w = Pmf::new(floats(p_w))?;
    let obs = Channel::from_rows(&float_rows(channel))?;
    let sc = capacity_scan(&p_w, &obs, n_max, opts.cap)?;
    let mut t = Table::new(&["n", "mutual_information", "capacity", "upper_bound", "vertices"]);
    for r in &sc.rows {
        t.push(vec![
            int(r.n),
            sig10(r.mutual_information),
            r.capacity.map(sig10).unwrap_or_default(),
            sig10(r.upper_bound),
            r.vertices.map(int).unwrap_or_default(),
        ]);
    }
    let mut text = String::new();
    let _ = writeln!(text, "C_X(W): {}", sig10(sc.private_information));
    if let Some(c1) = sc.c1_zero {
        let _ = writeln!(text, "C_1(0): {}", sig10(c1));
    }
    if let Some(n) = sc.truncated_at {
        let _ = writeln!(text, "capacity not computed from n={n} on: enumeration cap {} reached", opts.cap);
    }
    text.push_str(&t.to_csv_string()?);
    Ok(Outcome {
        text,
        table: Some(t),
        passed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    Partial,
    Preprocess,
}

fn iid_bits(q: f64, n: usize) -> Result<DiscreteScenario> {
    let obs = Channel::from_columns(&[vec![1.0 - q, q]])?;
    Ok(build_observation_scenario(&Pmf::uniform(1), &obs, n)?.self_scenario())
}

fn describe_heuristic(rep: &HeuristicReport) -> (String, bool) {
    let mut text = String::new();
    let terms: Vec<String> = rep.per_window_terms.iter().map(|&v| sig10(v)).collect();
    let _ = writeln!(text, "per-window terms: [{}]", terms.join(", "));
    let _ = writeln!(text, "total information: {}", sig10(rep.total_information));
    if let Some(e) = rep.enumerated_information {
        let _ = writeln!(text, "enumerated I(Y;X^n): {}", sig10(e));
    }
    let _ = writeln!(text, "efficiency: {}", sig10(rep.efficiency));
    let private = rep.private != Some(false);
    match rep.private {
        Some(true) => text.push_str("combined release is independent of every sample\n"),
        Some(false) => text.push_str("combined release is NOT independent of every sample\n"),
        None => text.push_str("combined release too large to check\n"),
    }
    (text, private)
}

pub fn heuristic(kind: HeuristicKind, q: f64, n: usize, k: usize, opts: &Options) -> Result<Outcome> {
    if !(q > 0.0 && q < 1.0) {
        bail!("q must lie in (0, 1), got {q}");
    }
    let rep = match kind {
        HeuristicKind::Partial => partial_processing(&iid_bits(q, n)?, k, opts.cap).map_err(truncation_context)?,
        HeuristicKind::Preprocess => preprocess_chain(q.min(1.0 - q), n)?,
    };
    let (text, passed) = describe_heuristic(&rep);
    Ok(Outcome {
        text,
        table: None,
        passed,
    })
}

/// Named experiments with fixed inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Example1,
    Table1,
    TwoBinaryGrid,
    HeuristicsFig,
    Scan,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Table1 => "table1",
            Preset::TwoBinaryGrid => "two-binary-grid",
            Preset::HeuristicsFig => "heuristics-fig",
            Preset::Scan => "scan",
        }
    }
}

fn check(text: &mut String, label: &str, got: f64, want: f64, tol: f64) -> bool {
    let ok = (got - want).abs() <= tol;
    let _ = writeln!(
        text,
        "{} {label}: {} (reference {want}, tolerance {tol:e})",
        if ok { "PASS" } else { "FAIL" },
        sig10(got)
    );
    ok
}

fn table1_setting() -> (Pmf, Channel) {
    (
        Pmf::new(vec![2.0 / 3.0, 1.0 / 3.0]).expect("static pmf"),
        Channel::bsc(0.1).expect("static channel"),
    )
}

pub fn example1_scenario() -> Result<DiscreteScenario> {
    Ok(observation_scenario(
        &Pmf::uniform(2),
        &[Channel::bsc(2.0 / 3.0)?, Channel::bec(0.5)?],
    )?)
}

pub fn preset(p: Preset, opts: &Options) -> Result<Outcome> {
    let mut text = String::new();
    let mut passed = true;
    let table = match p {
        Preset::Example1 => {
            let s = example1_scenario()?;
            let rep = solve_capacity(&s, None, opts.cap)?;
            describe_report(&mut text, &rep);
            passed &= check(&mut text, "I_s", rep.capacity, 0.0134, 5e-4);
            passed &= check(&mut text, "LP optimum", rep.lp_optimum, 0.9866, 5e-4);
            let v = verify_mapping(&s, &rep.mapping, opts.tol)?;
            describe_verification(&mut text, &v, opts.tol);
            passed &= v.passed;
            mapping_table(&s, &rep.mapping)
        }
        Preset::Table1 => {
            let (p_w, obs) = table1_setting();
            let mut t = Table::new(&["n", "mutual_information", "capacity"]);
            let reference = [(2, 8.34e-3, 5e-5), (3, 4.88e-2, 5e-4), (4, 4.47e-2, 5e-4)];
            let mut caps = Vec::new();
            for n in 1..=4 {
                let s = build_observation_scenario(&p_w, &obs, n)?;
                let c = solve_capacity(&s, None, opts.cap).map_err(truncation_context)?.capacity;
                t.push(vec![int(n), sig10(s.mutual_information_w_dataset()), sig10(c)]);
                caps.push(c);
            }
            for (n, want, tol) in reference {
                passed &= check(&mut text, &format!("I_s(n={n})"), caps[n - 1], want, tol);
            }
            let drop = caps[2] > caps[3];
            let _ = writeln!(text, "{} I_s(3) > I_s(4)", if drop { "PASS" } else { "FAIL" });
            passed &= drop;
            t
        }
        Preset::TwoBinaryGrid => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut t = Table::new(&["alpha", "beta", "r", "closed_form", "linear_program", "abs_diff"]);
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                for j in 0..20 {
                    let alpha = (i + 1) as f64 / 21.0;
                    let beta = (j + 1) as f64 / 21.0;
                    let lo = (alpha - beta).max(0.0);
                    let hi = alpha.min(1.0 - beta);
                    for k in 0..20 {
                        let r = if k == 19 { hi } else { lo + k as f64 * (hi - lo) / 19.0 };
                        let params = TwoBinaryParams::new(alpha, beta, r)?;
                        let cols: Vec<Vec<f64>> = (0..4)
                            .map(|_| {
                                let a: f64 = rng.gen_range(0.0..1.0);
                                vec![a, 1.0 - a]
                            })
                            .collect();
                        let latent = Channel::from_columns(&cols)?;
                        let closed = two_binary_solve(&params, &latent)?.capacity;
                        let lp = solve_capacity(&params.scenario(&latent)?, None, opts.cap)?.capacity;
                        let d = (closed - lp).abs();
                        worst = worst.max(d);
                        t.push(vec![sig10(alpha), sig10(beta), sig10(r), sig10(closed), sig10(lp), sig10(d)]);
                    }
                }
            }
            let ok = worst <= 1e-8;
            let _ = writeln!(
                text,
                "{} closed form vs linear program: max discrepancy {worst:.3e} over {} points (tolerance 1e-8)",
                if ok { "PASS" } else { "FAIL" },
                t.rows.len()
            );
            passed &= ok;
            t
        }
        Preset::HeuristicsFig => {
            let n = 4;
            let mut t = Table::new(&["q", "optimal", "partial", "preprocess"]);
            for step in 1..=10 {
                let q = step as f64 * 0.05;
                let s = iid_bits(q, n)?;
                let opt = self_disclosure(&s, opts.cap)?.report.capacity;
                let par = partial_processing(&s, 2, opts.cap)?.total_information;
                let pre = preprocess_chain(q, n)?.enumerated_information.unwrap_or(f64::NAN);
                t.push(vec![sig10(q), sig10(opt), sig10(par), sig10(pre)]);
                if step == 10 {
                    passed &= check(&mut text, "optimal at q=0.5", opt, 3.0, 1e-9);
                    passed &= check(&mut text, "partial at q=0.5", par, 3.0, 1e-9);
                }
                if par > opt + 1e-9 || pre > opt + 1e-9 {
                    let _ = writeln!(text, "FAIL heuristic exceeds the optimum at q={q}");
                    passed = false;
                }
            }
            t
        }
        Preset::Scan => {
            let (p_w, obs) = table1_setting();
            let joint: Vec<Vec<f64>> = (0..2)
                .map(|w| (0..2).map(|x| p_w.probs()[w] * obs.get(x, w)).collect())
                .collect();
            let sc = capacity_scan(&p_w, &obs, 4, opts.cap)?;
            let c1 = c_alpha_zero(&joint, LeakageMode::OutputPerturbation, opts.cap)?;
            let c2 = c_alpha_zero(&joint, LeakageMode::FullData, opts.cap)?;
            let _ = writeln!(text, "C_X(W): {}", sig10(sc.private_information));
            let _ = writeln!(text, "C_1(0): {}", sig10(c1));
            let _ = writeln!(text, "C_2(0): {}", sig10(c2));
            let mut t = Table::new(&["n", "mutual_information", "capacity", "upper_bound", "j_value"]);
            let mut last_j = f64::INFINITY;
            for r in &sc.rows {
                let j = if r.n <= 3 { Some(j_value(&p_w, &obs, r.n, opts.cap)?) } else { None };
                if let Some(j) = j {
                    let ok = c1 <= j + 1e-8 && j <= c2 + 1e-8 && j <= last_j + 1e-8;
                    if !ok {
                        let _ = writeln!(text, "FAIL C_1(0) <= J(n) <= C_2(0), nonincreasing, at n={}", r.n);
                        passed = false;
                    }
                    last_j = j;
                }
                if r.mutual_information > sc.private_information + 1e-12 {
                    let _ = writeln!(text, "FAIL I(W;X^n) exceeds C_X(W) at n={}", r.n);
                    passed = false;
                }
                t.push(vec![
                    int(r.n),
                    sig10(r.mutual_information),
                    r.capacity.map(sig10).unwrap_or_default(),
                    sig10(r.upper_bound),
                    j.map(sig10).unwrap_or_default(),
                ]);
            }
            if passed {
                text.push_str("PASS zero-leakage sandwich and information bound\n");
            }
            t
        }
    };
    Ok(Outcome {
        text,
        table: Some(table),
        passed,
    })
}
