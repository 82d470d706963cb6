use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied link with its derivative.
#[derive(Clone)]
pub struct CustomLink {
    pub name: String,
    f: ScalarFn,
    df: ScalarFn,
}

impl CustomLink {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f), df: Arc::new(df) }
    }
}

impl fmt::Debug for CustomLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomLink({})", self.name)
    }
}

/// Link function of a single-index model.
#[derive(Debug, Clone)]
pub enum LinkFunction {
    Monomial(u32),
    /// Coefficients `c_0, c_1, ...` of `c_0 + c_1 x + ...`.
    Polynomial(Vec<f64>),
    /// Strictly increasing on the real line.
    StrictlyIncreasing(CustomLink),
    /// Even, and increasing on the positive half line.
    EvenPolynomial(CustomLink),
}

impl LinkFunction {
    pub fn monomial(k: u32) -> Result<Self> {
        if k == 0 {
            return domain("monomial degree must be at least 1");
        }
        Ok(LinkFunction::Monomial(k))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Monomial(k) => x.powi(*k as i32),
            LinkFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
            LinkFunction::StrictlyIncreasing(l) | LinkFunction::EvenPolynomial(l) => (l.f)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Monomial(k) => *k as f64 * x.powi(*k as i32 - 1),
            LinkFunction::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (j, &a)| acc * x + j as f64 * a),
            LinkFunction::StrictlyIncreasing(l) | LinkFunction::EvenPolynomial(l) => (l.df)(x),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            LinkFunction::Monomial(k) => k % 2 == 0,
            LinkFunction::Polynomial(c) => {
                c.iter().enumerate().all(|(j, &a)| if j % 2 == 1 { a == 0.0 } else { j == 0 || a >= 0.0 })
                    && c.iter().skip(1).any(|&a| a != 0.0)
            }
            LinkFunction::EvenPolynomial(_) => true,
            LinkFunction::StrictlyIncreasing(_) => false,
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            LinkFunction::Monomial(k) => k % 2 == 1,
            LinkFunction::Polynomial(c) => {
                c.iter().enumerate().all(|(j, &a)| if j % 2 == 0 { j == 0 || a == 0.0 } else { a >= 0.0 })
                    && c.iter().skip(1).any(|&a| a > 0.0)
            }
            LinkFunction::StrictlyIncreasing(_) => true,
            LinkFunction::EvenPolynomial(_) => false,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LinkFunction::Monomial(k) => format!("x^{k}"),
            LinkFunction::Polynomial(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a != 0.0)
                    .map(|(j, a)| format!("{a}x^{j}"))
                    .collect();
                terms.join("+")
            }
            LinkFunction::StrictlyIncreasing(l) | LinkFunction::EvenPolynomial(l) => l.name.clone(),
        }
    }
}

/// Serializable description of a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkSpec {
    Monomial { degree: u32 },
    Polynomial { coefficients: Vec<f64> },
}

impl LinkSpec {
    pub fn build(&self) -> Result<LinkFunction> {
        match self {
            LinkSpec::Monomial { degree } => LinkFunction::monomial(*degree),
            LinkSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return domain("polynomial link needs finite coefficients");
                }
                Ok(LinkFunction::Polynomial(coefficients.clone()))
            }
        }
    }
}
