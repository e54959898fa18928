//! JSON scenario files.
//!
//! A file holds either an explicit dataset law with a latent channel, or a
//! generative description (`W ~ p_w` observed through per-sample channels).
//! Probabilities may be JSON numbers, decimal strings or `"p/q"` rationals;
//! all of them are read exactly.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use sampleprivacy_core::oracle::{ExactScenario, Rational};
use sampleprivacy_core::DiscreteScenario;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Number::Text(s) => parse_rational(s),
            Number::Float(v) => parse_rational(&v.to_string()),
        }
    }
}

impl From<&Rational> for Number {
    fn from(r: &Rational) -> Self {
        Number::Text(r.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Explicit {
    pub sample_alphabets: Vec<usize>,
    pub support: Vec<Vec<usize>>,
    pub p_dataset: Vec<Number>,
    /// Rows `[w][x]`: `P(W = w | X^n = support[x])`.
    pub latent: Vec<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generative {
    pub p_w: Vec<Number>,
    /// One observation channel shared by `n` samples, rows `[x][w]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// One channel per sample, rows `[x][w]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<Vec<Vec<Number>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Explicit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generative: Option<Generative>,
}

/// Reads `"p/q"`, integers and decimals (with optional exponent) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().with_context(|| format!("bad numerator in {s:?}"))?;
        let d: BigInt = d.trim().parse().with_context(|| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            bail!("zero denominator in {s:?}");
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().with_context(|| format!("bad exponent in {s:?}"))?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        bail!("{s:?} is not a number");
    }
    let n: BigInt = format!("{int}{frac}").parse().with_context(|| format!("{s:?} is not a number"))?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let mut r = if scale >= 0 {
        Rational::from_integer(n * pow)
    } else {
        Rational::new(n, pow)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn rationals(v: &[Number]) -> Result<Vec<Rational>> {
    v.iter().map(Number::to_rational).collect()
}

fn matrix(v: &[Vec<Number>]) -> Result<Vec<Vec<Rational>>> {
    v.iter().map(|r| rationals(r)).collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).context("malformed scenario file")?;
        if file.format_version != FORMAT_VERSION {
            bail!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            );
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The scenario with exact rational probabilities.
    pub fn to_exact(&self) -> Result<ExactScenario> {
        match (&self.explicit, &self.generative) {
            (Some(_), Some(_)) => bail!("a scenario is either explicit or generative, not both"),
            (None, None) => bail!("scenario needs an \"explicit\" or a \"generative\" section"),
            (Some(e), None) => {
                if e.support.len() != e.p_dataset.len() {
                    bail!(
                        "support has {} tuples but p_dataset has {} entries",
                        e.support.len(),
                        e.p_dataset.len()
                    );
                }
                for x in &e.support {
                    if x.len() != e.sample_alphabets.len() || x.iter().zip(&e.sample_alphabets).any(|(v, a)| v >= a) {
                        bail!("support tuple {x:?} does not fit alphabets {:?}", e.sample_alphabets);
                    }
                }
                Ok(ExactScenario::new(
                    e.sample_alphabets.clone(),
                    e.support.clone(),
                    rationals(&e.p_dataset)?,
                    matrix(&e.latent)?,
                )?)
            }
            (None, Some(g)) => {
                let p_w = rationals(&g.p_w)?;
                let channels = match (&g.channel, g.n, &g.channels) {
                    (Some(c), Some(n), None) => {
                        if n == 0 {
                            bail!("n must be at least 1");
                        }
                        vec![matrix(c)?; n]
                    }
                    (None, None, Some(cs)) => cs.iter().map(|c| matrix(c)).collect::<Result<_>>()?,
                    _ => bail!("generative scenarios give either \"channel\" with \"n\", or \"channels\""),
                };
                for (i, c) in channels.iter().enumerate() {
                    for w in 0..p_w.len() {
                        let s = c.iter().filter_map(|r| r.get(w)).fold(Rational::zero(), |a, b| a + b);
                        if !s.is_one() {
                            bail!("column {w} of channel {i} sums to {s}, not 1");
                        }
                    }
                }
                Ok(ExactScenario::observation(&p_w, &channels)?)
            }
        }
    }

    pub fn to_scenario(&self) -> Result<DiscreteScenario> {
        Ok(self.to_exact()?.to_float()?)
    }

    /// Explicit form of an exact scenario.
    pub fn from_exact(s: &ExactScenario, description: Option<String>) -> Self {
        ScenarioFile {
            format_version: FORMAT_VERSION,
            description,
            explicit: Some(Explicit {
                sample_alphabets: s.sample_alphabets.clone(),
                support: s.support.clone(),
                p_dataset: s.p_dataset.iter().map(Number::from).collect(),
                latent: s.latent.iter().map(|r| r.iter().map(Number::from).collect()).collect(),
            }),
            generative: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }
}

/// Parses `"a,b;c,d"` into rows of exact rationals.
pub fn parse_matrix(s: &str) -> Result<Vec<Vec<Rational>>> {
    s.split(';')
        .map(|row| row.split(',').map(parse_rational).collect::<Result<Vec<_>>>())
        .collect()
}

pub fn parse_vector(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(parse_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn numbers_are_exact() {
        assert_eq!(parse_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(Number::Float(0.1).to_rational().unwrap(), q(1, 10));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn both_forms_are_rejected() {
        let text = r#"{"format_version": 1,
            "explicit": {"sample_alphabets": [2], "support": [[0],[1]], "p_dataset": ["1/2","1/2"], "latent": [[1,1]]},
            "generative": {"p_w": [1], "channel": [[0.5],[0.5]], "n": 1}}"#;
        assert!(ScenarioFile::parse(text).unwrap().to_exact().is_err());
    }

    #[test]
    fn wrong_version_is_rejected() {
        assert!(ScenarioFile::parse(r#"{"format_version": 7}"#).is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ScenarioFile::parse("{\n  \"format_version\": 1,\n  oops\n}").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"));
    }
}
